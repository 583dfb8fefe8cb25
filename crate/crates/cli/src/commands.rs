//! The four subcommands. Each one validates its whole configuration,
//! computes, and only then hands back what to print and which files to
//! write, so a failure never leaves partial output behind.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use phaseshift::global_search::{reduced_random_search_with, RunOptions, SearchParams, PROFILE_POINTS};
use phaseshift::local_opt::{AdmissibleSet, LocalOptParams};
use phaseshift::objective::{Objective, ShiftTarget, DEFAULT_L_END, DEFAULT_L_START};
use phaseshift::ode_oracle::{phase_shift_ode, OdeSettings};
use phaseshift::{phase_shift_table, Potential};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::format;

/// Used when neither the command line nor the configuration sets a seed.
pub const DEFAULT_SEED: u64 = 20011;

const DEFAULT_L_MAX: usize = 20;
const SUMMARY_ROWS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Matrix,
    Ode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedChoice {
    Fixed(u64),
    Time,
}

/// Command-line overrides shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Overrides {
    pub k: Option<f64>,
    pub l_max: Option<usize>,
    pub seed: Option<SeedChoice>,
    pub jobs: usize,
    pub method: Method,
    pub precision: Option<usize>,
}

/// What a successful command produced.
#[derive(Debug, Default)]
pub struct Output {
    pub stdout: String,
    /// Diagnostics that must not affect golden output (timings).
    pub stderr: String,
    pub files: Vec<(PathBuf, String)>,
}

impl Output {
    /// Content goes to `path` when given, otherwise to standard output.
    fn emit(&mut self, path: Option<&PathBuf>, content: String) {
        match path {
            Some(p) => self.files.push((p.clone(), content)),
            None => self.stdout.push_str(&content),
        }
    }
}

struct Context<'a> {
    cfg: &'a RunConfig,
    opts: &'a Overrides,
}

impl Context<'_> {
    fn k(&self) -> Result<f64, CliError> {
        let k = self
            .opts
            .k
            .or(self.cfg.k)
            .ok_or_else(|| CliError::Invalid("wavenumber missing: set `k` or pass --k".into()))?;
        if !(k > 0.0 && k.is_finite()) {
            return Err(CliError::Invalid(format!("k must be positive, got {k}")));
        }
        Ok(k)
    }

    fn l_max(&self) -> usize {
        self.opts.l_max.or(self.cfg.l_max).unwrap_or(DEFAULT_L_MAX)
    }

    fn range(&self) -> (usize, usize) {
        (
            self.cfg.l_start.unwrap_or(DEFAULT_L_START),
            self.cfg.l_end.unwrap_or(DEFAULT_L_END),
        )
    }

    fn scale(&self) -> Result<f64, CliError> {
        let s = self.cfg.potential_scale.unwrap_or(1.0);
        if !(s > 0.0) {
            return Err(CliError::Invalid(format!("potential_scale must be positive, got {s}")));
        }
        Ok(s)
    }

    fn digits(&self, default: usize) -> Result<usize, CliError> {
        match self.opts.precision {
            Some(p) if !(1..=17).contains(&p) => {
                Err(CliError::Invalid(format!("--precision must lie in 1..=17, got {p}")))
            }
            Some(p) => Ok(p),
            None => Ok(default),
        }
    }

    /// Shifts `0..=l_max` of `p` (already in solver units).
    fn shifts(&self, p: &Potential, k: f64, l_max: usize) -> Result<Vec<f64>, CliError> {
        match self.opts.method {
            Method::Matrix => Ok(phase_shift_table(p, k, l_max)?.delta),
            Method::Ode => ode_shifts(p, k, l_max),
        }
    }

    /// Target shifts from target layers or a shift CSV.
    fn target(&self, k: f64, scale: f64) -> Result<ShiftTarget, CliError> {
        let (l_start, l_end) = self.range();
        let delta = match (&self.cfg.target_layers, &self.cfg.target_shifts) {
            (Some(layers), _) => {
                let p = potential(layers, "target")?.scaled(scale);
                self.shifts(&p, k, l_end)?
            }
            (None, Some(path)) => read_shift_csv(path)?,
            (None, None) => {
                return Err(CliError::Invalid(
                    "no target: set `target_layer`, `target_layers` or `target_shifts`".into(),
                ))
            }
        };
        Ok(ShiftTarget::new(k, delta, l_start, l_end)?)
    }
}

fn ode_shifts(p: &Potential, k: f64, l_max: usize) -> Result<Vec<f64>, CliError> {
    let s = OdeSettings::default();
    (0..=l_max)
        .map(|l| phase_shift_ode(p, k, l, &s).map_err(CliError::from))
        .collect()
}

fn potential(layers: &[(f64, f64)], which: &str) -> Result<Potential, CliError> {
    Potential::from_layers(layers).map_err(|e| CliError::Invalid(format!("{which} potential: {e}")))
}

/// Output files must be creatable before any work starts.
fn check_writable(path: Option<&PathBuf>) -> Result<(), CliError> {
    let Some(path) = path else { return Ok(()) };
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    if !parent.is_dir() {
        return Err(CliError::Invalid(format!(
            "output directory {} does not exist",
            parent.display()
        )));
    }
    Ok(())
}

/// Reads an `l,delta` CSV; rows must list `l = 0, 1, 2, ...` in order.
pub fn read_shift_csv(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let bad = |line: usize, field: &str, message: String| CliError::Config {
        file: path.display().to_string(),
        line,
        field: field.to_string(),
        message,
    };
    let mut delta = Vec::new();
    for (i, row) in text.lines().enumerate() {
        let row = row.trim();
        if row.is_empty() || row.starts_with('#') || (i == 0 && row.starts_with('l')) {
            continue;
        }
        let Some((l, d)) = row.split_once(',') else {
            return Err(bad(i + 1, "row", format!("expected `l,delta`, got `{row}`")));
        };
        let l: usize = l
            .trim()
            .parse()
            .map_err(|_| bad(i + 1, "l", format!("expected an integer, got `{}`", l.trim())))?;
        if l != delta.len() {
            return Err(bad(i + 1, "l", format!("expected l = {}, got {l}", delta.len())));
        }
        let d: f64 = d
            .trim()
            .parse()
            .ok()
            .filter(|d: &f64| d.is_finite())
            .ok_or_else(|| bad(i + 1, "delta", format!("expected a number, got `{}`", d.trim())))?;
        delta.push(d);
    }
    Ok(delta)
}

fn shift_csv(delta: &[f64]) -> String {
    let mut s = String::from("l,delta\n");
    for (l, d) in delta.iter().enumerate() {
        let _ = writeln!(s, "{l},{d:e}");
    }
    s
}

pub fn shifts(cfg: &RunConfig, opts: &Overrides) -> Result<Output, CliError> {
    let ctx = Context { cfg, opts };
    let k = ctx.k()?;
    let l_max = ctx.l_max();
    let p = potential(&cfg.layers, "layer")?.scaled(ctx.scale()?);
    let digits = ctx.digits(6)?;
    check_writable(cfg.csv.as_ref())?;
    if opts.method == Method::Ode {
        OdeSettings::default().validate(&p)?;
    }

    let delta = ctx.shifts(&p, k, l_max)?;
    let mut out = Output::default();
    let _ = writeln!(out.stdout, "{:>3} {:>width$}", "l", "delta", width = digits + 7);
    for (l, d) in delta.iter().enumerate() {
        let _ = writeln!(out.stdout, "{l:>3} {:>width$}", format::table(*d, digits), width = digits + 7);
    }
    if opts.method == Method::Ode {
        let footer = match phase_shift_table(&p, k, l_max) {
            Ok(m) => {
                let gap = delta
                    .iter()
                    .zip(&m.delta)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                format!("# max |ode - matrix| = {}", format::plain(gap, 3))
            }
            Err(e) => format!("# matrix solver unavailable: {e}"),
        };
        out.stdout.push_str(&footer);
        out.stdout.push('\n');
    }
    if let Some(path) = &cfg.csv {
        out.files.push((path.clone(), shift_csv(&delta)));
    }
    Ok(out)
}

pub fn phi(cfg: &RunConfig, opts: &Overrides) -> Result<Output, CliError> {
    let ctx = Context { cfg, opts };
    let k = ctx.k()?;
    let scale = ctx.scale()?;
    let digits = ctx.digits(8)?;
    let candidate = potential(&cfg.layers, "layer")?.scaled(scale);
    let target = ctx.target(k, scale)?;

    let delta = ctx.shifts(&candidate, k, target.l_end())?;
    let value = target.misfit(&delta);
    Ok(Output {
        stdout: format!("phi = {}\n", format::plain(value, digits)),
        ..Output::default()
    })
}

pub fn search(cfg: &RunConfig, opts: &Overrides) -> Result<Output, CliError> {
    let ctx = Context { cfg, opts };
    if opts.method != Method::Matrix {
        return Err(CliError::Invalid("search supports only --method matrix".into()));
    }
    let k = ctx.k()?;
    let scale = ctx.scale()?;
    let digits = ctx.digits(8)?;
    let target = ctx.target(k, scale)?;
    let objective = Objective::with_potential_scale(target, scale)?;

    let seed = match opts.seed {
        Some(SeedChoice::Fixed(s)) => s,
        Some(SeedChoice::Time) => time_seed(),
        None => cfg.seed.unwrap_or(DEFAULT_SEED),
    };
    let margin = phaseshift::global_search::MARGIN_FRACTION * k * k;
    let adm = AdmissibleSet::new(
        cfg.m_max.unwrap_or(6),
        cfg.radius.unwrap_or(3.0),
        cfg.q_low.unwrap_or(0.0),
        cfg.q_high.unwrap_or_else(|| objective.value_ceiling(margin)),
    )?;
    let mut params = SearchParams::new(
        cfg.batch_size.unwrap_or(2000),
        cfg.gamma.unwrap_or(0.02),
        seed,
        adm,
    );
    let defaults = LocalOptParams::default();
    params.local.epsilon_r = cfg.eps_r.unwrap_or(defaults.epsilon_r);
    params.local.max_sweeps = cfg.max_sweeps.unwrap_or(defaults.max_sweeps);
    params.dedup_tol = cfg.dedup_tol.unwrap_or(params.dedup_tol);
    params.validate()?;
    params.clamped_for(&objective)?;
    check_writable(cfg.results.as_ref())?;

    let run = RunOptions {
        jobs: opts.jobs,
        progress: None,
    };
    let outcome = reduced_random_search_with(&params, &objective, &run)?;
    if outcome.minima.is_empty() {
        return Err(CliError::Solver(phaseshift::Error::EmptySample));
    }

    let mut results = String::new();
    for m in &outcome.minima {
        let _ = writeln!(results, "phi={:e} layers={}", m.phi, m.potential()?);
    }

    let mut out = Output::default();
    let s = &mut out.stdout;
    let _ = writeln!(
        s,
        "seed {seed}: {} distinct minima from {} local searches, {} evaluations, {} failed",
        outcome.minima.len(),
        params.sample_size(),
        outcome.evaluations,
        outcome.failures.len()
    );
    let _ = writeln!(s, "best phi in reduced sample {}", format::plain(outcome.best_sample_phi, digits));
    let _ = writeln!(s, "{:>4}  {:<width$}  {:>6}  layers", "rank", "phi", "M", width = digits + 5);
    for (i, m) in outcome.minima.iter().take(SUMMARY_ROWS).enumerate() {
        let p = m.potential()?;
        let _ = writeln!(
            s,
            "{:>4}  {:<width$}  {:>6}  {}",
            i + 1,
            format::plain(m.phi, digits),
            p.len(),
            p,
            width = digits + 5
        );
    }
    out.emit(cfg.results.as_ref(), results);
    out.stderr = format!("search finished in {:.1} s\n", outcome.wall_time);
    Ok(out)
}

fn time_seed() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_nanos() as u64)
        .unwrap_or(DEFAULT_SEED)
}

pub fn compare(cfg: &RunConfig, opts: &Overrides) -> Result<Output, CliError> {
    let ctx = Context { cfg, opts };
    let k = ctx.k()?;
    let scale = ctx.scale()?;
    let digits = ctx.digits(8)?;
    let candidate = potential(&cfg.layers, "layer")?;
    let Some(original) = &cfg.target_layers else {
        return Err(CliError::Invalid(
            "compare needs the original potential as `target_layer` or `target_layers`".into(),
        ));
    };
    let original = potential(original, "target")?;
    let radius = match cfg.radius {
        Some(r) if r > 0.0 && r.is_finite() => r,
        Some(r) => return Err(CliError::Invalid(format!("R must be positive, got {r}"))),
        None => {
            let r = candidate.support_radius().max(original.support_radius());
            if r > 0.0 {
                r
            } else {
                1.0
            }
        }
    };
    let (l_start, l_end) = ctx.range();
    let l_max = ctx.l_max().max(l_end);
    check_writable(cfg.csv.as_ref())?;

    let dc = ctx.shifts(&candidate.scaled(scale), k, l_max)?;
    let d0 = ctx.shifts(&original.scaled(scale), k, l_max)?;
    let target = ShiftTarget::new(k, d0.clone(), l_start, l_end)?;
    let value = target.misfit(&dc);

    let mut text = String::from("r,q_candidate,q_original\n");
    for (r, qc) in candidate.sample(radius, PROFILE_POINTS) {
        let _ = writeln!(text, "{r},{qc},{}", original.value_at(r));
    }
    text.push_str("\nl,delta_candidate,delta_original\n");
    for (l, (a, b)) in dc.iter().zip(&d0).enumerate() {
        let _ = writeln!(text, "{l},{a:e},{b:e}");
    }
    let _ = writeln!(text, "\n# phi={} (l = {l_start}..={l_end})", format::plain(value, digits));

    let mut out = Output::default();
    out.emit(cfg.csv.as_ref(), text);
    if cfg.csv.is_some() {
        out.stdout = format!("phi = {}\n", format::plain(value, digits));
    }
    Ok(out)
}
