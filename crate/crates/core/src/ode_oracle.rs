//! Reference phase shifts from direct integration of the radial equation
//! `φ'' + (k² - q(r) - l(l+1)/r²) φ = 0`.
//!
//! Classical fixed-step RK4 from a small `r_start`, with steps aligned to the
//! layer interfaces so that no step straddles a jump of `q`. At the support
//! radius the solution is matched to `A j_l(kr) + B n_l(kr)`.
//!
//! This path shares nothing with the transfer-matrix solver except the
//! Riccati–Bessel functions used for the final matching, and it accepts
//! layers above the energy.

use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::riccati_bessel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeSettings {
    /// Integration starts at `r_start_factor · R`.
    pub r_start_factor: f64,
    /// Total number of RK4 steps between `r_start` and `R`.
    pub step_count: usize,
}

impl Default for OdeSettings {
    fn default() -> Self {
        Self {
            r_start_factor: 1e-4,
            step_count: 20_000,
        }
    }
}

impl OdeSettings {
    pub fn validate(&self, p: &Potential) -> Result<()> {
        if self.step_count < 100 {
            return Err(Error::InvalidParameter(format!(
                "step_count must be at least 100, got {}",
                self.step_count
            )));
        }
        let first = p.radii().first().map_or(1.0, |r1| r1 / p.support_radius());
        if !(self.r_start_factor > 0.0 && self.r_start_factor < first) {
            return Err(Error::InvalidParameter(format!(
                "r_start_factor {} must lie in (0, r_1 / R)",
                self.r_start_factor
            )));
        }
        Ok(())
    }
}

/// Phase shift `δ(k, l)` by integrating the radial equation.
pub fn phase_shift_ode(p: &Potential, k: f64, l: usize, s: &OdeSettings) -> Result<f64> {
    let (phi, dphi, radius) = integrate_regular(p, k, l, s, 1.0)?;
    match_exterior(phi, dphi, radius, k, l)
}

/// Solves `φ = A j_l(kR) + B n_l(kR)`, `φ' = k (A j_l' + B n_l')` with the
/// unit Wronskian and returns `-arctan(B/A)`.
pub(crate) fn match_exterior(phi: f64, dphi: f64, radius: f64, k: f64, l: usize) -> Result<f64> {
    let b = riccati_bessel::evaluate(l, k * radius)?;
    let slope = dphi / k;
    let a_coef = phi * b.np[l] - slope * b.n[l];
    let b_coef = slope * b.j[l] - phi * b.jp[l];
    if a_coef == 0.0 {
        return Ok(-b_coef.signum() * std::f64::consts::FRAC_PI_2);
    }
    Ok(-(b_coef / a_coef).atan() + 0.0)
}

/// Integrates the regular solution out to the support radius, returning
/// `(φ(R), φ'(R), R)`. The initial condition is multiplied by `initial_scale`.
pub(crate) fn integrate_regular(
    p: &Potential,
    k: f64,
    l: usize,
    s: &OdeSettings,
    initial_scale: f64,
) -> Result<(f64, f64, f64)> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidWavenumber(k));
    }
    s.validate(p)?;

    // The free potential has no support; match anywhere.
    let radius = if p.is_empty() { 1.0 } else { p.support_radius() };
    let r_start = s.r_start_factor * radius;
    let energy = k * k;
    let centrifugal = (l * (l + 1)) as f64;

    let double_factorial: f64 = (1..=2 * l + 1).rev().step_by(2).map(|v| v as f64).product();
    let mut phi = initial_scale * r_start.powi(l as i32 + 1) / double_factorial;
    let mut dphi = initial_scale * (l as f64 + 1.0) * r_start.powi(l as i32) / double_factorial;

    // Segment boundaries: r_start, then every interface beyond it.
    let mut edges = vec![r_start];
    let mut values = Vec::new();
    if p.is_empty() {
        edges.push(radius);
        values.push(0.0);
    } else {
        for (r, q) in p.layers() {
            if r > r_start {
                edges.push(r);
                values.push(q);
            }
        }
    }

    let span = radius - r_start;
    let mut budget = s.step_count;
    for (seg, q) in values.iter().enumerate() {
        let (lo, hi) = (edges[seg], edges[seg + 1]);
        let steps = if seg + 1 == values.len() {
            budget.max(1)
        } else {
            (((hi - lo) / span) * s.step_count as f64).round().max(1.0) as usize
        };
        budget = budget.saturating_sub(steps);
        let h = (hi - lo) / steps as f64;
        let g = |r: f64| centrifugal / (r * r) + q - energy;
        for i in 0..steps {
            let r = lo + i as f64 * h;
            let (k1p, k1v) = (dphi, g(r) * phi);
            let rm = r + 0.5 * h;
            let (k2p, k2v) = (dphi + 0.5 * h * k1v, g(rm) * (phi + 0.5 * h * k1p));
            let (k3p, k3v) = (dphi + 0.5 * h * k2v, g(rm) * (phi + 0.5 * h * k2p));
            let re = r + h;
            let (k4p, k4v) = (dphi + h * k3v, g(re) * (phi + h * k3p));
            phi += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
            dphi += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);

            let size = phi.abs().max(dphi.abs());
            if !size.is_finite() {
                return Err(Error::Integration(format!(
                    "solution overflowed near r = {re}"
                )));
            }
            if size > 1e200 {
                phi *= 1e-200;
                dphi *= 1e-200;
            } else if size < 1e-200 && size > 0.0 {
                phi *= 1e200;
                dphi *= 1e200;
            }
        }
    }
    if phi == 0.0 && dphi == 0.0 {
        return Err(Error::Integration("solution underflowed to zero".into()));
    }
    Ok((phi, dphi, radius))
}
