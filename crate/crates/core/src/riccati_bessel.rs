//! Riccati–Bessel functions `j_l(x) = x·j_l^sph(x)` and `n_l(x) = x·y_l^sph(x)`.
//!
//! With this normalization `j_0 = sin x`, `n_0 = -cos x`, the Wronskian
//! `j_l n_l' - j_l' n_l` equals one for every `l`, and for large arguments
//! `j_l ~ sin(x - lπ/2)`, `n_l ~ -cos(x - lπ/2)`.
//!
//! `n_l` is generated by upward recurrence. `j_l` comes from the ascending
//! series for small arguments and from Miller's downward recurrence whenever
//! the requested order exceeds the argument; otherwise upward recurrence is
//! stable and used directly.

use crate::error::BesselError;

/// Largest magnitude of `n_l` accepted before reporting overflow.
pub const OVERFLOW_LIMIT: f64 = 1e290;

/// Number of terms summed in the ascending series.
const SERIES_TERMS: usize = 20;

/// Values and first derivatives of `j_l`, `n_l` for `l = 0..=l_max` at one argument.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselEval {
    pub l_max: usize,
    pub x: f64,
    pub j: Vec<f64>,
    pub n: Vec<f64>,
    pub jp: Vec<f64>,
    pub np: Vec<f64>,
}

impl BesselEval {
    /// `j_l n_l' - j_l' n_l`, which is identically one.
    pub fn wronskian(&self, l: usize) -> f64 {
        self.j[l] * self.np[l] - self.jp[l] * self.n[l]
    }
}

/// Evaluates `j_l`, `n_l` and their derivatives for all `l <= l_max`.
pub fn evaluate(l_max: usize, x: f64) -> Result<BesselEval, BesselError> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(BesselError::Domain(x));
    }

    let n = irregular(l_max, x)?;
    let j = regular(l_max, x);

    let (s, c) = x.sin_cos();
    let mut jp = Vec::with_capacity(l_max + 1);
    let mut np = Vec::with_capacity(l_max + 1);
    jp.push(c);
    np.push(s);
    for l in 1..=l_max {
        let lx = l as f64 / x;
        jp.push(j[l - 1] - lx * j[l]);
        np.push(n[l - 1] - lx * n[l]);
    }

    Ok(BesselEval {
        l_max,
        x,
        j,
        n,
        jp,
        np,
    })
}

/// `n_l` by upward recurrence, aborting before the values overflow.
fn irregular(l_max: usize, x: f64) -> Result<Vec<f64>, BesselError> {
    let (s, c) = x.sin_cos();
    let mut n = Vec::with_capacity(l_max + 1);
    n.push(-c);
    if l_max >= 1 {
        n.push(-c / x - s);
    }
    for l in 1..l_max {
        let next = (2 * l + 1) as f64 / x * n[l] - n[l - 1];
        if !next.is_finite() || next.abs() > OVERFLOW_LIMIT {
            return Err(BesselError::Overflow { l: l + 1, x });
        }
        n.push(next);
    }
    if n[l_max.min(1)].abs() > OVERFLOW_LIMIT {
        return Err(BesselError::Overflow { l: 1, x });
    }
    Ok(n)
}

/// `j_l` for all `l <= l_max`, picking the stable method per order.
fn regular(l_max: usize, x: f64) -> Vec<f64> {
    let mut j = if (l_max as f64) > x {
        downward(l_max, x)
    } else {
        upward(l_max, x)
    };
    // The series takes over wherever x < 0.1 (l + 1); those orders sit at the
    // top of the range, so only the tail needs replacing.
    for (l, slot) in j.iter_mut().enumerate() {
        if x < 0.1 * (l as f64 + 1.0) {
            *slot = series(l, x);
        }
    }
    j
}

fn upward(l_max: usize, x: f64) -> Vec<f64> {
    let (s, c) = x.sin_cos();
    let mut j = Vec::with_capacity(l_max + 1);
    j.push(s);
    if l_max >= 1 {
        j.push(s / x - c);
    }
    for l in 1..l_max {
        j.push((2 * l + 1) as f64 / x * j[l] - j[l - 1]);
    }
    j
}

/// Miller's algorithm: recur downward from an order well above both `l_max`
/// and `x`, then normalize against whichever closed form (`l = 0` or `l = 1`)
/// is better conditioned at this argument.
fn downward(l_max: usize, x: f64) -> Vec<f64> {
    let keep = l_max.max(1);
    let top = keep.max(x.ceil() as usize) + 20 + (40.0 * (keep as f64 + x)).sqrt() as usize;
    let mut j = vec![0.0; keep + 1];
    let mut upper = 0.0_f64;
    let mut current = 1e-300_f64;
    for l in (1..=top).rev() {
        let lower = (2 * l + 1) as f64 / x * current - upper;
        upper = current;
        current = lower;
        if l - 1 <= keep {
            j[l - 1] = current;
        }
        if current.abs() > 1e250 {
            current *= 1e-250;
            upper *= 1e-250;
            for v in j.iter_mut() {
                *v *= 1e-250;
            }
        }
    }

    let (s, c) = x.sin_cos();
    let j1 = s / x - c;
    let scale = if s.abs() >= j1.abs() { s / j[0] } else { j1 / j[1] };
    j.truncate(l_max + 1);
    for v in j.iter_mut() {
        *v *= scale;
    }
    j
}

/// Ascending series `j_l(x) = x^{l+1}/(2l+1)!! Σ_k (-x²/2)^k / (k! (2l+3)(2l+5)…(2l+2k+1))`.
pub fn series(l: usize, x: f64) -> f64 {
    let mut lead = 1.0;
    for i in 0..=l {
        lead *= x / (2 * i + 1) as f64;
    }
    let half_sq = -0.5 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..SERIES_TERMS {
        term *= half_sq / (k as f64 * (2 * l + 2 * k + 1) as f64);
        sum += term;
        if term.abs() < f64::EPSILON * sum.abs() {
            break;
        }
    }
    lead * sum
}
