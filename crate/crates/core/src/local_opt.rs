//! Derivative-free local minimization over layered configurations.
//!
//! A [`Configuration`] is a point `(r_1..r_M, v_1..v_M)` of `R^{2M}`; the
//! admissible set bounds every coordinate and keeps the radii ordered. Line
//! searches stay on the exactly computed feasible segment, so every point the
//! optimizer visits is admissible.
//!
//! * [`line_minimize`]: golden-section search along one direction.
//! * [`basic_powell`]: Powell-type direction-set descent in which trial line
//!   minima only reorder the coordinate directions.
//! * [`reduction_procedure`]: greedy merging of adjacent layers whose values
//!   can be equalized at a small relative change of the objective.
//! * [`lmm`]: reduce, descend in the reduced subspace, reduce again.

use crate::error::{Error, Result};
use crate::potential::Potential;

/// Layered configuration: `values[i]` on `[radii[i-1], radii[i])`, zero beyond
/// the last radius.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
}

impl Configuration {
    pub fn new(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.len() != values.len() || radii.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "configuration needs matching non-empty radii and values, got {} and {}",
                radii.len(),
                values.len()
            )));
        }
        Ok(Self { radii, values })
    }

    pub fn from_potential(p: &Potential) -> Result<Self> {
        Self::new(p.radii().to_vec(), p.values().to_vec())
    }

    /// Number of layers `M`.
    pub fn dim(&self) -> usize {
        self.radii.len()
    }

    /// `(r_1..r_M, v_1..v_M)`.
    pub fn coords(&self) -> Vec<f64> {
        let mut c = self.radii.clone();
        c.extend_from_slice(&self.values);
        c
    }

    pub fn from_coords(coords: &[f64]) -> Self {
        let m = coords.len() / 2;
        Self {
            radii: coords[..m].to_vec(),
            values: coords[m..].to_vec(),
        }
    }

    /// The potential this configuration describes; zero-width layers vanish.
    pub fn to_potential(&self) -> Result<Potential> {
        Potential::new(self.radii.clone(), self.values.clone())
    }

    fn displaced(&self, u: &[f64], t: f64) -> Self {
        let m = self.dim();
        Self {
            radii: (0..m).map(|i| self.radii[i] + t * u[i]).collect(),
            values: (0..m).map(|i| self.values[i] + t * u[m + i]).collect(),
        }
    }
}

/// Box `0 <= r_i <= radius`, `q_low <= v_i <= q_high`, ordered radii, and at
/// most `m_max` layers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibleSet {
    pub m_max: usize,
    pub radius: f64,
    pub q_low: f64,
    pub q_high: f64,
}

impl AdmissibleSet {
    pub fn new(m_max: usize, radius: f64, q_low: f64, q_high: f64) -> Result<Self> {
        let adm = Self {
            m_max,
            radius,
            q_low,
            q_high,
        };
        adm.validate()?;
        Ok(adm)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_max == 0 {
            return Err(Error::InvalidParameter("m_max must be positive".into()));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "support bound must be positive, got {}",
                self.radius
            )));
        }
        if !(self.q_low < self.q_high) || !self.q_low.is_finite() || !self.q_high.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "need q_low < q_high, got [{}, {}]",
                self.q_low, self.q_high
            )));
        }
        Ok(())
    }

    pub fn contains(&self, c: &Configuration) -> bool {
        let m = c.dim();
        if m == 0 || m > self.m_max || c.values.len() != m {
            return false;
        }
        let mut prev = 0.0;
        for &r in &c.radii {
            if !(r >= prev && r <= self.radius) {
                return false;
            }
            prev = r;
        }
        c.values
            .iter()
            .all(|&v| v >= self.q_low && v <= self.q_high)
    }

    /// Largest `[t_lo, t_hi]` (containing 0) with `c + t·u` admissible, or
    /// `None` if `u` leaves the set immediately in both directions.
    pub fn feasible_segment(&self, c: &Configuration, u: &[f64]) -> Option<(f64, f64)> {
        let m = c.dim();
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        // a·t <= b
        let mut clip = |a: f64, b: f64| {
            if a > 0.0 {
                hi = hi.min(b / a);
            } else if a < 0.0 {
                lo = lo.max(b / a);
            }
        };
        for i in 0..m {
            let (r, du) = (c.radii[i], u[i]);
            clip(du, self.radius - r);
            clip(-du, r);
            let (v, dv) = (c.values[i], u[m + i]);
            clip(dv, self.q_high - v);
            clip(-dv, v - self.q_low);
            if i + 1 < m {
                clip(du - u[i + 1], c.radii[i + 1] - c.radii[i]);
            }
        }
        let lo = lo.min(0.0);
        let hi = hi.max(0.0);
        if !lo.is_finite() || !hi.is_finite() || hi - lo <= 0.0 {
            None
        } else {
            Some((lo, hi))
        }
    }

    /// Projects onto the box and restores the ordering of the radii.
    pub fn clamp(&self, c: &Configuration) -> Configuration {
        let mut radii: Vec<f64> = c.radii.iter().map(|r| r.clamp(0.0, self.radius)).collect();
        for i in 1..radii.len() {
            if radii[i] < radii[i - 1] {
                radii[i] = radii[i - 1];
            }
        }
        Configuration {
            radii,
            values: c.values.iter().map(|v| v.clamp(self.q_low, self.q_high)).collect(),
        }
    }
}

/// Whether the next Powell cycle restarts from the coordinate basis or keeps
/// the order established by the previous cycle's trial minima.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DirectionOrder {
    #[default]
    KeepReindexed,
    FreshBasis,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalOptParams {
    /// Relative objective change below which adjacent layers merge.
    pub epsilon_r: f64,
    /// Final width of the golden-section bracket.
    pub line_tol: f64,
    /// Relative decrease per cycle below which Powell stops.
    pub f_tol: f64,
    pub max_sweeps: usize,
    pub direction_order: DirectionOrder,
}

impl Default for LocalOptParams {
    fn default() -> Self {
        Self {
            epsilon_r: 0.1,
            line_tol: 1e-6,
            f_tol: 1e-8,
            max_sweeps: 500,
            direction_order: DirectionOrder::KeepReindexed,
        }
    }
}

impl LocalOptParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("epsilon_r", self.epsilon_r),
            ("line_tol", self.line_tol),
            ("f_tol", self.f_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_sweeps == 0 {
            return Err(Error::InvalidParameter("max_sweeps must be positive".into()));
        }
        Ok(())
    }
}

/// A point together with its objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluated {
    pub config: Configuration,
    pub value: f64,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Far more than needed to shrink any bracket in the admissible box to 1e-15.
const MAX_GOLDEN_STEPS: usize = 200;

/// Minimizes `f(q + t·u)` over the feasible segment of `t` by golden-section
/// search. Never returns a point worse than `q`.
pub fn line_minimize<F>(
    f: &mut F,
    q: &Evaluated,
    u: &[f64],
    adm: &AdmissibleSet,
    tol: f64,
) -> Result<Evaluated>
where
    F: FnMut(&Configuration) -> Result<f64>,
{
    // Measure t in coordinate units so that `tol` is a distance.
    let size = u.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    if !(size > 0.0 && size.is_finite()) {
        return Ok(q.clone());
    }
    let unit: Vec<f64> = u.iter().map(|d| d / size).collect();
    let u = unit.as_slice();
    let Some((lo, hi)) = adm.feasible_segment(&q.config, u) else {
        return Ok(q.clone());
    };
    let point = |t: f64| adm.clamp(&q.config.displaced(u, t));
    let mut eval = |t: f64| -> Result<Evaluated> {
        let config = point(t);
        let value = f(&config)?;
        Ok(Evaluated { config, value })
    };

    let mut best = q.clone();
    let keep = |e: Evaluated, best: &mut Evaluated| {
        if e.value < best.value {
            *best = e;
        }
    };

    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut e1 = eval(x1)?;
    let mut e2 = eval(x2)?;
    let mut steps = 0;
    while b - a > tol && steps < MAX_GOLDEN_STEPS {
        steps += 1;
        if e1.value <= e2.value {
            b = x2;
            x2 = x1;
            e2 = e1.clone();
            x1 = b - INV_PHI * (b - a);
            e1 = eval(x1)?;
        } else {
            a = x1;
            x1 = x2;
            e1 = e2.clone();
            x2 = a + INV_PHI * (b - a);
            e2 = eval(x2)?;
        }
    }
    keep(e1, &mut best);
    keep(e2, &mut best);
    // The constrained minimum may sit on the boundary.
    if a == lo {
        keep(eval(lo)?, &mut best);
    }
    if b == hi {
        keep(eval(hi)?, &mut best);
    }
    Ok(best)
}

fn basis(dim: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; dim];
    e[i] = 1.0;
    e
}

/// Powell-type descent from `q0` within `adm`.
///
/// Each cycle: line-minimize from the saved point along every direction to
/// obtain trial minima; reorder the directions by their trial values; minimize
/// along them in sequence; finally minimize from the saved point along the
/// total displacement `v`, which becomes the new saved point. The direction
/// set itself is never replaced by `v`.
pub fn basic_powell<F>(
    f: &mut F,
    q0: &Configuration,
    adm: &AdmissibleSet,
    params: &LocalOptParams,
) -> Result<Evaluated>
where
    F: FnMut(&Configuration) -> Result<f64>,
{
    let dim = 2 * q0.dim();
    let mut saved = Evaluated {
        config: q0.clone(),
        value: f(q0)?,
    };
    let mut order: Vec<usize> = (0..dim).collect();

    for _ in 0..params.max_sweeps {
        if params.direction_order == DirectionOrder::FreshBasis {
            order = (0..dim).collect();
        }
        let start_value = saved.value;

        let mut trial = Vec::with_capacity(dim);
        for &i in &order {
            let t = line_minimize(f, &saved, &basis(dim, i), adm, params.line_tol)?;
            trial.push((i, t.value));
        }
        // stable: ties keep the previous order
        trial.sort_by(|a, b| a.1.total_cmp(&b.1));
        order = trial.into_iter().map(|(i, _)| i).collect();

        let mut current = saved.clone();
        for &i in &order {
            current = line_minimize(f, &current, &basis(dim, i), adm, params.line_tol)?;
        }

        let from = saved.config.coords();
        let to = current.config.coords();
        let v: Vec<f64> = to.iter().zip(&from).map(|(b, a)| b - a).collect();
        let along_v = if v.iter().any(|&d| d != 0.0) {
            line_minimize(f, &saved, &v, adm, params.line_tol)?
        } else {
            saved.clone()
        };
        // The sequential sweep already reached `current`; never end a cycle
        // above it.
        saved = if along_v.value <= current.value {
            along_v
        } else {
            current
        };

        let decrease = start_value - saved.value;
        if decrease < params.f_tol * (start_value.abs() + 1e-30) {
            break;
        }
    }
    Ok(saved)
}

/// One candidate merge of the reduction scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Merge {
    /// Layer `i - 1` takes the value of layer `i` (1-based, `i = 2..=M+1`).
    Down(usize),
    /// Layer `i + 1` takes the value of layer `i` (1-based, `i = 1..=M`).
    Up(usize),
}

/// `c` value of one candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeCandidate {
    pub merge: Merge,
    /// Objective after the merge.
    pub value: f64,
    /// `|f(before) - f(after)|`.
    pub change: f64,
}

/// The configuration obtained by applying `merge` to `c` within `radius`, or
/// `None` when the merge is not meaningful (it would leave no layers, or it
/// touches an empty exterior layer).
pub fn apply_merge(c: &Configuration, merge: Merge, radius: f64) -> Option<Configuration> {
    let m = c.dim();
    let mut radii = c.radii.clone();
    let mut values = c.values.clone();
    match merge {
        Merge::Down(i) if i == m + 1 => {
            // Last layer takes the exterior value 0: the support shrinks.
            if m == 1 {
                return None;
            }
            radii.pop();
            values.pop();
        }
        Merge::Down(i) => {
            // layers i-1, i (1-based) -> one layer ending at r_i with v_i
            radii.remove(i - 2);
            values.remove(i - 2);
        }
        Merge::Up(i) if i == m => {
            // The exterior shell [r_M, R] takes v_M: the support grows to R.
            if radii[m - 1] >= radius {
                return None;
            }
            radii[m - 1] = radius;
        }
        Merge::Up(i) => {
            // layers i, i+1 -> one layer ending at r_{i+1} with v_i
            radii.remove(i - 1);
            values.remove(i);
        }
    }
    Some(Configuration { radii, values })
}

/// `c` values of every meaningful merge of `q`, "down" candidates first, each
/// group in increasing `i`.
pub fn merge_candidates<F>(
    f: &mut F,
    q: &Configuration,
    base: f64,
    radius: f64,
) -> Result<Vec<(MergeCandidate, Configuration)>>
where
    F: FnMut(&Configuration) -> Result<f64>,
{
    let m = q.dim();
    let mut out = Vec::with_capacity(2 * m);
    let merges = (2..=m + 1).map(Merge::Down).chain((1..=m).map(Merge::Up));
    for merge in merges {
        if let Some(next) = apply_merge(q, merge, radius) {
            let value = f(&next)?;
            out.push((
                MergeCandidate {
                    merge,
                    value,
                    change: (base - value).abs(),
                },
                next,
            ));
        }
    }
    Ok(out)
}

/// Merges adjacent layers (including the zero exterior shell out to
/// `radius`) while the cheapest merge changes `f` by less than `eps_r·f`.
pub fn reduction_procedure<F>(
    q: &Configuration,
    f: &mut F,
    eps_r: f64,
    radius: f64,
) -> Result<Evaluated>
where
    F: FnMut(&Configuration) -> Result<f64>,
{
    let mut current = Evaluated {
        config: q.clone(),
        value: f(q)?,
    };
    loop {
        if current.value == 0.0 {
            return Ok(current);
        }
        let candidates = merge_candidates(f, &current.config, current.value, radius)?;
        // Smallest change wins; ties resolve to the earliest candidate, which
        // is "down" before "up" and smaller i first.
        let Some((best, next)) = candidates
            .into_iter()
            .reduce(|acc, c| if c.0.change < acc.0.change { c } else { acc })
        else {
            return Ok(current);
        };
        if best.change >= eps_r * current.value {
            return Ok(current);
        }
        current = Evaluated {
            config: next,
            value: best.value,
        };
    }
}

/// Reduce, run [`basic_powell`] in the reduced space, reduce again.
///
/// The result is never worse than the first reduced configuration: if the
/// final reduction would undo the descent, the unreduced Powell minimum is
/// returned instead.
pub fn lmm<F>(
    q0: &Configuration,
    f: &mut F,
    adm: &AdmissibleSet,
    params: &LocalOptParams,
) -> Result<Evaluated>
where
    F: FnMut(&Configuration) -> Result<f64>,
{
    let reduced = reduction_procedure(q0, f, params.epsilon_r, adm.radius)?;
    let descended = basic_powell(f, &reduced.config, adm, params)?;
    let final_reduced =
        reduction_procedure(&descended.config, f, params.epsilon_r, adm.radius)?;
    if final_reduced.value <= reduced.value {
        Ok(final_reduced)
    } else {
        Ok(descended)
    }
}
