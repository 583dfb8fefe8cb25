//! Phase shifts of a layered potential by matching Riccati–Bessel solutions
//! across each interface.
//!
//! On layer `i` the regular radial solution is `A_i j_l(κ_i r) + B_i n_l(κ_i r)`
//! with `κ_i² = k² - q_i`. Continuity of the solution and its derivative at
//! `r_i` gives `(A_{i+1}, B_{i+1}) ∝ α^i (A_i, B_i)`, and outside the support
//! `tan δ = -B/A`.
//!
//! The coefficient pair is carried instead of the ratio `B/A`, since the ratio
//! recursion has poles wherever `A` passes through zero. The pair is
//! renormalized by a power of two whenever it drifts outside
//! `[1e-100, 1e100]`; only the ratio is physical.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::riccati_bessel::{self, BesselEval};

/// `κ_min = KAPPA_MIN_FACTOR · k` is the smallest accepted layer wavenumber.
pub const KAPPA_MIN_FACTOR: f64 = 1e-6;

const RESCALE_ABOVE: f64 = 1e100;
const RESCALE_BELOW: f64 = 1e-100;

/// `κ_i = sqrt(k² - q_i)` for each layer, followed by `κ_{N+1} = k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerWavenumbers {
    pub kappa: Vec<f64>,
}

impl LayerWavenumbers {
    pub fn exterior(&self) -> f64 {
        *self.kappa.last().expect("exterior wavenumber is always present")
    }
}

/// Coefficients of `A j_l(κ r) + B n_l(κ r)` on one layer, up to the positive
/// factor `2^scale_exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorState {
    pub a: f64,
    pub b: f64,
    pub scale_exponent: i64,
}

impl InteriorState {
    /// Regular solution on the innermost layer.
    pub const ORIGIN: Self = Self {
        a: 1.0,
        b: 0.0,
        scale_exponent: 0,
    };

    pub fn ratio(&self) -> f64 {
        self.b / self.a
    }

    /// `-arctan(B/A)` on `(-π/2, π/2]`.
    pub fn phase_shift(&self) -> f64 {
        if self.a == 0.0 {
            if self.b > 0.0 {
                -FRAC_PI_2
            } else {
                FRAC_PI_2
            }
        } else {
            // `+ 0.0` turns -0 into 0 for unscattered waves
            -(self.b / self.a).atan() + 0.0
        }
    }

    fn apply(&mut self, m: &[[f64; 2]; 2]) {
        let a = m[0][0] * self.a + m[0][1] * self.b;
        let b = m[1][0] * self.a + m[1][1] * self.b;
        self.a = a;
        self.b = b;
        self.renormalize();
    }

    fn renormalize(&mut self) {
        let size = self.a.abs().max(self.b.abs());
        if size > RESCALE_ABOVE || (size < RESCALE_BELOW && size > 0.0) {
            let e = size.log2().floor() as i32;
            let factor = 2f64.powi(-e);
            self.a *= factor;
            self.b *= factor;
            self.scale_exponent += i64::from(e);
        }
    }
}

/// Phase shifts `δ(k, l)` for `l = 0..=l_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseShiftTable {
    pub k: f64,
    pub l_max: usize,
    pub delta: Vec<f64>,
}

impl PhaseShiftTable {
    pub fn get(&self, l: usize) -> Option<f64> {
        self.delta.get(l).copied()
    }
}

fn check_k(k: f64) -> Result<()> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidWavenumber(k))
    }
}

pub fn compute_wavenumbers(p: &Potential, k: f64) -> Result<LayerWavenumbers> {
    check_k(k)?;
    let threshold = (KAPPA_MIN_FACTOR * k).powi(2);
    let mut kappa = Vec::with_capacity(p.len() + 1);
    for (i, q) in p.values().iter().enumerate() {
        let gap = k * k - q;
        if gap <= threshold {
            return Err(Error::EvanescentLayer {
                layer: i + 1,
                gap,
                threshold,
            });
        }
        kappa.push(gap.sqrt());
    }
    kappa.push(k);
    Ok(LayerWavenumbers { kappa })
}

/// The matrix `α` of the interface at `r` between wavenumbers `kappa_in` and
/// `kappa_out`, built from already evaluated Bessel tables.
///
/// `inner` is evaluated at `kappa_in·r`, `outer` at `kappa_out·r`.
fn alpha(
    l: usize,
    kappa_in: f64,
    kappa_out: f64,
    inner: &BesselEval,
    outer: &BesselEval,
) -> [[f64; 2]; 2] {
    let (j_in, n_in, jp_in, np_in) = (inner.j[l], inner.n[l], inner.jp[l], inner.np[l]);
    let (j_out, n_out, jp_out, np_out) = (outer.j[l], outer.n[l], outer.jp[l], outer.np[l]);
    [
        [
            kappa_out * j_in * np_out - kappa_in * jp_in * n_out,
            kappa_out * n_in * np_out - kappa_in * np_in * n_out,
        ],
        [
            kappa_in * jp_in * j_out - kappa_out * j_in * jp_out,
            kappa_in * np_in * j_out - kappa_out * n_in * jp_out,
        ],
    ]
}

/// `α^i` for angular momentum `l` at the interface radius `r_i`, where the
/// wavenumber changes from `kappa_i` to `kappa_next`.
///
/// Its determinant is `kappa_i · kappa_next`.
pub fn interface_matrix(
    l: usize,
    kappa_i: f64,
    kappa_next: f64,
    r_i: f64,
) -> Result<[[f64; 2]; 2]> {
    for (name, v) in [("kappa_i", kappa_i), ("kappa_next", kappa_next), ("r_i", r_i)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "{name} must be positive, got {v}"
            )));
        }
    }
    let inner = riccati_bessel::evaluate(l, kappa_i * r_i)?;
    let outer = riccati_bessel::evaluate(l, kappa_next * r_i)?;
    Ok(alpha(l, kappa_i, kappa_next, &inner, &outer))
}

/// Carries `(A, B) = (1, 0)` from the innermost layer to the exterior.
pub fn propagate(p: &Potential, k: f64, l: usize) -> Result<InteriorState> {
    let kappa = compute_wavenumbers(p, k)?.kappa;
    let mut state = InteriorState::ORIGIN;
    for (i, &r) in p.radii().iter().enumerate() {
        let (kin, kout) = (kappa[i], kappa[i + 1]);
        if kin == kout {
            continue;
        }
        let inner = riccati_bessel::evaluate(l, kin * r)?;
        let outer = riccati_bessel::evaluate(l, kout * r)?;
        state.apply(&alpha(l, kin, kout, &inner, &outer));
    }
    Ok(state)
}

pub fn phase_shift(p: &Potential, k: f64, l: usize) -> Result<f64> {
    Ok(propagate(p, k, l)?.phase_shift())
}

/// All shifts up to `l_max`, sharing one Bessel evaluation per interface.
pub fn phase_shift_table(p: &Potential, k: f64, l_max: usize) -> Result<PhaseShiftTable> {
    let kappa = compute_wavenumbers(p, k)?.kappa;
    let mut states = vec![InteriorState::ORIGIN; l_max + 1];
    for (i, &r) in p.radii().iter().enumerate() {
        let (kin, kout) = (kappa[i], kappa[i + 1]);
        if kin == kout {
            continue;
        }
        let inner = riccati_bessel::evaluate(l_max, kin * r)?;
        let outer = riccati_bessel::evaluate(l_max, kout * r)?;
        for (l, state) in states.iter_mut().enumerate() {
            state.apply(&alpha(l, kin, kout, &inner, &outer));
        }
    }
    Ok(PhaseShiftTable {
        k,
        l_max,
        delta: states.iter().map(InteriorState::phase_shift).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn q0() -> Potential {
        Potential::from_layers(&[(0.5, 7.2), (1.0, 4.5), (1.5, 7.2), (2.0, 4.5)]).unwrap()
    }

    #[test]
    fn wavenumbers_of_q0() {
        let w = compute_wavenumbers(&q0(), 3.0).unwrap();
        let want = [1.8f64.sqrt(), 4.5f64.sqrt(), 1.8f64.sqrt(), 4.5f64.sqrt(), 3.0];
        for (got, want) in w.kappa.iter().zip(want) {
            assert_relative_eq!(*got, want, max_relative = 1e-15);
        }
        assert_eq!(w.exterior(), 3.0);
    }

    #[test]
    fn wavenumbers_of_near_threshold_layer() {
        let p = Potential::from_layers(&[(0.4316, 8.9991)]).unwrap();
        let w = compute_wavenumbers(&p, 3.0).unwrap();
        assert_relative_eq!(w.kappa[0], 0.03, max_relative = 1e-10);

        let zero = Potential::from_layers(&[(2.0, 0.0)]).unwrap();
        assert_eq!(compute_wavenumbers(&zero, 3.0).unwrap().kappa, vec![3.0, 3.0]);
    }

    #[test]
    fn evanescent_layer_is_rejected() {
        let p = Potential::from_layers(&[(1.0, 1.0), (2.0, 9.0)]).unwrap();
        match compute_wavenumbers(&p, 3.0) {
            Err(Error::EvanescentLayer { layer, .. }) => assert_eq!(layer, 2),
            other => panic!("expected evanescent layer, got {other:?}"),
        }
        assert!(phase_shift(&p, 3.0, 0).is_err());
        assert!(matches!(
            compute_wavenumbers(&p, 0.0),
            Err(Error::InvalidWavenumber(_))
        ));
    }

    #[test]
    fn matched_interface_is_scaled_identity() {
        for l in [0, 3, 11] {
            let m = interface_matrix(l, 2.2, 2.2, 0.7).unwrap();
            let b = riccati_bessel::evaluate(l, 2.2 * 0.7).unwrap();
            let size = 2.2 * (b.n[l] * b.np[l]).abs().max(1.0);
            assert_relative_eq!(m[0][0], 2.2, max_relative = 1e-10);
            assert_relative_eq!(m[1][1], 2.2, max_relative = 1e-10);
            assert!(m[0][1].abs() < 1e-14 * size);
            assert!(m[1][0].abs() < 1e-14 * size);
        }
    }

    #[test]
    fn l0_matrix_matches_closed_forms() {
        let (ki, kn, r) = (1.0_f64, 2.0_f64, 1.0_f64);
        let m = interface_matrix(0, ki, kn, r).unwrap();
        // j_0 = sin, n_0 = -cos, j_0' = cos, n_0' = sin
        let (j_in, n_in, jp_in, np_in) = ((ki * r).sin(), -(ki * r).cos(), (ki * r).cos(), (ki * r).sin());
        let (j_out, n_out, jp_out, np_out) =
            ((kn * r).sin(), -(kn * r).cos(), (kn * r).cos(), (kn * r).sin());
        let want = [
            [
                kn * j_in * np_out - ki * jp_in * n_out,
                kn * n_in * np_out - ki * np_in * n_out,
            ],
            [
                ki * jp_in * j_out - kn * j_in * jp_out,
                ki * np_in * j_out - kn * n_in * jp_out,
            ],
        ];
        for a in 0..2 {
            for b in 0..2 {
                assert_relative_eq!(m[a][b], want[a][b], epsilon = 1e-14);
            }
        }
        assert_relative_eq!(
            m[0][0],
            2.0 * 1f64.sin() * 2f64.sin() + 1f64.cos() * 2f64.cos(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn determinant_is_product_of_wavenumbers() {
        for &(l, ki, kn, r) in &[(0, 1.0, 2.0, 1.0), (4, 0.3, 3.0, 1.7), (15, 2.9, 1.1, 2.0)] {
            let m = interface_matrix(l, ki, kn, r).unwrap();
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            let scale = m.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max).powi(2);
            assert!((det - ki * kn).abs() <= 1e-10 * (ki * kn).max(scale * 1e-6), "l={l}: det {det}");
        }
    }

    #[test]
    fn free_potential_does_not_scatter() {
        for l in 0..8 {
            let s = propagate(&Potential::zero(), 3.0, l).unwrap();
            assert_eq!(s.b, 0.0);
            let flat = Potential::from_layers(&[(2.0, 0.0)]).unwrap();
            assert_eq!(phase_shift(&flat, 3.0, l).unwrap(), 0.0);
        }
        let t = phase_shift_table(&Potential::zero(), 3.0, 20).unwrap();
        assert_eq!(t.delta.len(), 21);
        assert!(t.delta.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn single_l_and_table_agree() {
        let p = q0();
        let t = phase_shift_table(&p, 3.0, 20).unwrap();
        for l in 0..=20 {
            let d = phase_shift(&p, 3.0, l).unwrap();
            assert_relative_eq!(d, t.delta[l], max_relative = 1e-12, epsilon = 1e-300);
        }
    }

    #[test]
    fn vertical_asymptote_branch() {
        let s = InteriorState {
            a: 0.0,
            b: 2.0,
            scale_exponent: 0,
        };
        assert_eq!(s.phase_shift(), -FRAC_PI_2);
        let s = InteriorState { b: -2.0, ..s };
        assert_eq!(s.phase_shift(), FRAC_PI_2);
    }

    #[test]
    fn renormalization_keeps_the_ratio() {
        let mut s = InteriorState {
            a: 3e120,
            b: -1.5e120,
            scale_exponent: 0,
        };
        s.renormalize();
        assert!(s.a.abs() <= 2.0 && s.a.abs() >= 0.5 || s.b.abs() >= 0.5);
        assert_eq!(s.ratio(), -0.5);
        assert!(s.scale_exponent > 0);
    }
}
