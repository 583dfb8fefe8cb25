//! Reduced-sample random search: draw a uniform batch of admissible
//! configurations, keep the fraction with the smallest objective, and run the
//! local minimizer from each survivor.
//!
//! Batch point `i` is drawn from its own ChaCha stream `(seed, i)` and the
//! local minimizer is deterministic, so the outcome does not depend on how
//! many threads run the local searches.

use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::local_opt::{lmm, AdmissibleSet, Configuration, LocalOptParams};
use crate::objective::Objective;
use crate::potential::Potential;

/// Values are kept at least `MARGIN_FRACTION · k²` below the energy.
pub const MARGIN_FRACTION: f64 = 1e-3;

/// Radial samples used to compare potentials.
pub const PROFILE_POINTS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct SearchParams {
    /// Batch size `L`.
    pub batch_size: usize,
    /// Fraction `γ` of the batch passed to the local searches.
    pub gamma: f64,
    pub seed: u64,
    pub adm: AdmissibleSet,
    pub local: LocalOptParams,
    /// Minima closer than this in sup-norm of `q(r)` are reported once.
    pub dedup_tol: f64,
    /// Pin the outermost radius of every batch point to the support bound.
    pub pin_outer_radius: bool,
}

impl SearchParams {
    pub fn new(batch_size: usize, gamma: f64, seed: u64, adm: AdmissibleSet) -> Self {
        Self {
            batch_size,
            gamma,
            seed,
            adm,
            local: LocalOptParams::default(),
            dedup_tol: 0.05,
            pin_outer_radius: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.adm.validate()?;
        self.local.validate()?;
        if self.batch_size == 0 {
            return Err(Error::InvalidParameter("batch size must be positive".into()));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma must lie in (0, 1], got {}",
                self.gamma
            )));
        }
        if !(self.dedup_tol > 0.0 && self.dedup_tol.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "dedup_tol must be positive, got {}",
                self.dedup_tol
            )));
        }
        Ok(())
    }

    /// `ceil(γ L)`.
    pub fn sample_size(&self) -> usize {
        ((self.gamma * self.batch_size as f64).ceil() as usize).clamp(1, self.batch_size)
    }

    /// Lowers `q_high` so that no layer reaches the energy of `objective`.
    pub fn clamped_for(&self, objective: &Objective) -> Result<Self> {
        let k = objective.target().k();
        let ceiling = objective.value_ceiling(MARGIN_FRACTION * k * k);
        let mut out = self.clone();
        out.adm.q_high = out.adm.q_high.min(ceiling);
        if !(out.adm.q_low < out.adm.q_high) {
            return Err(Error::InvalidParameter(format!(
                "q_low = {} is not below the evanescence ceiling {}",
                out.adm.q_low, ceiling
            )));
        }
        Ok(out)
    }
}

/// Batch point `index`, drawn from its own stream of `seed`.
pub fn random_point(params: &SearchParams, index: usize) -> Configuration {
    let adm = &params.adm;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(index as u64);
    let m = adm.m_max;
    let values = (0..m).map(|_| rng.gen_range(adm.q_low..=adm.q_high)).collect();
    // uniform on (0, R]
    let mut radii: Vec<f64> = (0..m)
        .map(|_| adm.radius * (1.0 - rng.gen::<f64>()))
        .collect();
    radii.sort_by(f64::total_cmp);
    if params.pin_outer_radius {
        radii[m - 1] = adm.radius;
    }
    Configuration { radii, values }
}

/// `L` admissible configurations: `M_max` uniform values, `M_max` uniform
/// radii sorted ascending.
pub fn random_batch(params: &SearchParams) -> Vec<Configuration> {
    (0..params.batch_size)
        .map(|i| random_point(params, i))
        .collect()
}

/// A batch member with its objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePoint {
    pub index: usize,
    pub config: Configuration,
    pub value: f64,
}

/// The `ceil(γ L)` batch members with the smallest objective, ascending.
/// Members whose evaluation fails are dropped before selecting.
pub fn reduced_sample<F>(batch: &[Configuration], f: F, gamma: f64) -> Result<Vec<SamplePoint>>
where
    F: Fn(&Configuration) -> Result<f64> + Sync,
{
    if batch.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut scored: Vec<SamplePoint> = batch
        .par_iter()
        .enumerate()
        .filter_map(|(index, c)| {
            f(c).ok().map(|value| SamplePoint {
                index,
                config: c.clone(),
                value,
            })
        })
        .collect();
    if scored.is_empty() {
        return Err(Error::EmptySample);
    }
    scored.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.index.cmp(&b.index)));
    let keep = ((gamma * batch.len() as f64).ceil() as usize).max(1);
    scored.truncate(keep);
    Ok(scored)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalMinimum {
    pub config: Configuration,
    pub phi: f64,
    /// Index of the batch point the local search started from.
    pub start_index: usize,
    pub seed: u64,
}

impl LocalMinimum {
    pub fn potential(&self) -> Result<Potential> {
        self.config.to_potential()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    /// Distinct minima, ascending in `phi`.
    pub minima: Vec<LocalMinimum>,
    /// Best objective value in the reduced sample.
    pub best_sample_phi: f64,
    /// Objective evaluations over the whole run.
    pub evaluations: u64,
    /// Local searches that ended in an error, with their start index.
    pub failures: Vec<(usize, Error)>,
    pub wall_time: f64,
}

impl SearchOutcome {
    pub fn best(&self) -> Option<&LocalMinimum> {
        self.minima.first()
    }
}

/// Worker count and progress reporting for [`reduced_random_search_with`].
#[derive(Default)]
pub struct RunOptions<'a> {
    /// Worker threads; 0 lets the thread pool decide.
    pub jobs: usize,
    /// Called with the number of finished local searches.
    pub progress: Option<&'a (dyn Fn(usize) + Sync)>,
}

pub fn reduced_random_search(params: &SearchParams, objective: &Objective) -> Result<SearchOutcome> {
    reduced_random_search_with(params, objective, &RunOptions::default())
}

pub fn reduced_random_search_with(
    params: &SearchParams,
    objective: &Objective,
    options: &RunOptions<'_>,
) -> Result<SearchOutcome> {
    params.validate()?;
    let params = params.clamped_for(objective)?;
    let started = Instant::now();

    let evaluations = AtomicU64::new(0);
    let f = |c: &Configuration| -> Result<f64> {
        evaluations.fetch_add(1, Ordering::Relaxed);
        objective.evaluate(&c.to_potential()?)
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker threads: {e}")))?;

    let done = AtomicUsize::new(0);
    let (sample, results) = pool.install(|| -> Result<_> {
        let batch = random_batch(&params);
        let sample = reduced_sample(&batch, f, params.gamma)?;
        let results: Vec<(usize, Result<LocalMinimum>)> = sample
            .par_iter()
            .map(|start| {
                let mut local_f = f;
                let out = lmm(&start.config, &mut local_f, &params.adm, &params.local).map(|m| {
                    LocalMinimum {
                        config: m.config,
                        phi: m.value,
                        start_index: start.index,
                        seed: params.seed,
                    }
                });
                let n = done.fetch_add(1, Ordering::Relaxed) + 1;
                if let Some(progress) = options.progress {
                    progress(n);
                }
                (start.index, out)
            })
            .collect();
        Ok((sample, results))
    })?;

    let mut minima = Vec::new();
    let mut failures = Vec::new();
    for (index, r) in results {
        match r {
            Ok(m) => minima.push(m),
            Err(e) => failures.push((index, e)),
        }
    }
    minima.sort_by(|a, b| a.phi.total_cmp(&b.phi).then(a.start_index.cmp(&b.start_index)));
    let minima = deduplicate(minima, params.dedup_tol, params.adm.radius);

    Ok(SearchOutcome {
        minima,
        best_sample_phi: sample.first().map_or(f64::INFINITY, |s| s.value),
        evaluations: evaluations.into_inner(),
        failures,
        wall_time: started.elapsed().as_secs_f64(),
    })
}

/// Keeps each minimum unless a better one already kept lies within `tol` in
/// sup-norm of `q(r)` on `[0, radius]`. Input must be sorted ascending.
pub fn deduplicate(sorted: Vec<LocalMinimum>, tol: f64, radius: f64) -> Vec<LocalMinimum> {
    let mut kept: Vec<(LocalMinimum, Potential)> = Vec::new();
    for m in sorted {
        let Ok(p) = m.potential() else { continue };
        let duplicate = kept
            .iter()
            .any(|(_, q)| p.sup_distance(q, radius, PROFILE_POINTS) < tol);
        if !duplicate {
            kept.push((m, p));
        }
    }
    kept.into_iter().map(|(m, _)| m).collect()
}
