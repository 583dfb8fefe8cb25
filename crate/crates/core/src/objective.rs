//! Normalized ℓ² misfit between a candidate's phase shifts and a target set.
//!
//! `Φ = ( Σ_l |δ(k,l) - δ̃(k,l)|² / Σ_l |δ̃(k,l)|² )^{1/2}` over
//! `l = l_start..=l_end`.

use crate::error::{Error, Result};
use crate::forward_solver::phase_shift_table;
use crate::potential::Potential;

pub const DEFAULT_L_START: usize = 1;
pub const DEFAULT_L_END: usize = 20;

/// Target phase shifts at one wavenumber and the summation range of `Φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftTarget {
    k: f64,
    delta_tilde: Vec<f64>,
    l_start: usize,
    l_end: usize,
    norm_sq: f64,
}

impl ShiftTarget {
    /// `delta_tilde[l]` is the target shift for angular momentum `l`; it must
    /// cover `0..=l_end`.
    pub fn new(k: f64, delta_tilde: Vec<f64>, l_start: usize, l_end: usize) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidWavenumber(k));
        }
        if l_start > l_end {
            return Err(Error::InvalidParameter(format!(
                "l_start ({l_start}) exceeds l_end ({l_end})"
            )));
        }
        if delta_tilde.len() <= l_end {
            return Err(Error::InvalidParameter(format!(
                "target has {} shifts but l_end = {l_end}",
                delta_tilde.len()
            )));
        }
        if let Some(l) = delta_tilde.iter().position(|d| !d.is_finite()) {
            return Err(Error::InvalidParameter(format!("target shift at l = {l} is not finite")));
        }
        let norm_sq: f64 = delta_tilde[l_start..=l_end].iter().map(|d| d * d).sum();
        if norm_sq <= 0.0 {
            return Err(Error::DegenerateTarget { l_start, l_end });
        }
        Ok(Self {
            k,
            delta_tilde,
            l_start,
            l_end,
            norm_sq,
        })
    }

    /// Shifts of `p` at `k`, computed with the transfer-matrix solver.
    pub fn from_potential(p: &Potential, k: f64, l_start: usize, l_end: usize) -> Result<Self> {
        let table = phase_shift_table(p, k, l_end)?;
        Self::new(k, table.delta, l_start, l_end)
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn delta_tilde(&self) -> &[f64] {
        &self.delta_tilde
    }

    pub fn l_start(&self) -> usize {
        self.l_start
    }

    pub fn l_end(&self) -> usize {
        self.l_end
    }

    /// Same shifts, different summation range.
    pub fn with_range(&self, l_start: usize, l_end: usize) -> Result<Self> {
        Self::new(self.k, self.delta_tilde.clone(), l_start, l_end)
    }

    /// `Φ` for an already computed shift sequence covering `0..=l_end`.
    pub fn misfit(&self, delta: &[f64]) -> f64 {
        let num: f64 = (self.l_start..=self.l_end)
            .map(|l| (delta[l] - self.delta_tilde[l]).powi(2))
            .sum();
        (num / self.norm_sq).sqrt()
    }
}

/// `Φ(p)` against `target`.
pub fn phi(p: &Potential, target: &ShiftTarget) -> Result<f64> {
    let table = phase_shift_table(p, target.k, target.l_end)?;
    Ok(target.misfit(&table.delta))
}

/// `Φ` with candidate values multiplied by a fixed factor before solving.
///
/// The factor converts the units in which potentials are written into the
/// `k² - q` units of the radial equation; `1.0` means they coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    target: ShiftTarget,
    potential_scale: f64,
}

impl Objective {
    pub fn new(target: ShiftTarget) -> Self {
        Self {
            target,
            potential_scale: 1.0,
        }
    }

    pub fn with_potential_scale(target: ShiftTarget, potential_scale: f64) -> Result<Self> {
        if !(potential_scale > 0.0 && potential_scale.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "potential scale must be positive, got {potential_scale}"
            )));
        }
        Ok(Self {
            target,
            potential_scale,
        })
    }

    pub fn target(&self) -> &ShiftTarget {
        &self.target
    }

    pub fn potential_scale(&self) -> f64 {
        self.potential_scale
    }

    /// Largest written-unit value whose layer stays above `k² - margin`.
    pub fn value_ceiling(&self, margin: f64) -> f64 {
        (self.target.k * self.target.k - margin) / self.potential_scale
    }

    pub fn evaluate(&self, p: &Potential) -> Result<f64> {
        if self.potential_scale == 1.0 {
            phi(p, &self.target)
        } else {
            phi(&p.scaled(self.potential_scale), &self.target)
        }
    }
}
