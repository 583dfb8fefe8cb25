//! Flat `key = value` run configuration.
//!
//! One setting per line, `#` starts a comment, blank lines are ignored.
//! Layers are listed either one per line (`layer = r, v`, in order) or inline
//! (`layers = r1:v1, r2:v2`). The `target_` variants describe the potential
//! whose shifts are matched; `target_shifts` names an `l,delta` CSV instead.

use std::path::{Path, PathBuf};

use crate::error::CliError;

/// Everything a configuration file can set. Unset fields keep their
/// defaults; commands decide which fields they need.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub k: Option<f64>,
    pub l_max: Option<usize>,
    pub l_start: Option<usize>,
    pub l_end: Option<usize>,
    pub potential_scale: Option<f64>,
    pub layers: Vec<(f64, f64)>,
    pub target_layers: Option<Vec<(f64, f64)>>,
    pub target_shifts: Option<PathBuf>,
    pub batch_size: Option<usize>,
    pub gamma: Option<f64>,
    pub seed: Option<u64>,
    pub m_max: Option<usize>,
    pub radius: Option<f64>,
    pub q_low: Option<f64>,
    pub q_high: Option<f64>,
    pub eps_r: Option<f64>,
    pub max_sweeps: Option<usize>,
    pub dedup_tol: Option<f64>,
    pub csv: Option<PathBuf>,
    pub results: Option<PathBuf>,
}

/// How the layers of one potential were given, to reject mixing the forms.
#[derive(Clone, Copy, PartialEq)]
enum LayerForm {
    Unset,
    PerLine,
    Inline,
}

struct Parser<'a> {
    source: &'a str,
    line: usize,
    key: &'a str,
    base: &'a Path,
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> CliError {
        CliError::Config {
            file: self.source.to_string(),
            line: self.line,
            field: self.key.to_string(),
            message: message.into(),
        }
    }

    fn real(&self, text: &str) -> Result<f64, CliError> {
        parse_real(text).ok_or_else(|| self.error(format!("expected a number, got `{text}`")))
    }

    fn count(&self, text: &str) -> Result<usize, CliError> {
        text.parse()
            .map_err(|_| self.error(format!("expected a non-negative integer, got `{text}`")))
    }

    fn pair(&self, text: &str, sep: char) -> Result<(f64, f64), CliError> {
        let Some((r, v)) = text.split_once(sep) else {
            return Err(self.error(format!("expected `radius{sep}value`, got `{text}`")));
        };
        Ok((self.real(r.trim())?, self.real(v.trim())?))
    }

    fn inline(&self, text: &str) -> Result<Vec<(f64, f64)>, CliError> {
        text.split(',')
            .filter(|item| !item.trim().is_empty())
            .map(|item| self.pair(item.trim(), ':'))
            .collect()
    }

    fn path(&self, text: &str) -> PathBuf {
        let p = Path::new(text);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }
}

/// Accepts plain decimals and simple fractions such as `1/9`.
pub fn parse_real(text: &str) -> Option<f64> {
    let value = match text.split_once('/') {
        Some((num, den)) => num.trim().parse::<f64>().ok()? / den.trim().parse::<f64>().ok()?,
        None => text.parse::<f64>().ok()?,
    };
    value.is_finite().then_some(value)
}

fn set<T>(slot: &mut Option<T>, value: T, p: &Parser<'_>) -> Result<(), CliError> {
    if slot.is_some() {
        return Err(p.error("set more than once"));
    }
    *slot = Some(value);
    Ok(())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, &path.display().to_string(), base)
    }

    /// Parses configuration text; relative paths are resolved against `base`.
    pub fn parse(text: &str, source: &str, base: &Path) -> Result<Self, CliError> {
        let mut c = RunConfig::default();
        let mut form = LayerForm::Unset;
        let mut target_form = LayerForm::Unset;

        for (index, raw) in text.lines().enumerate() {
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut p = Parser {
                source,
                line: index + 1,
                key: "",
                base,
            };
            let Some((key, value)) = content.split_once('=') else {
                return Err(p.error(format!("expected `key = value`, got `{content}`")));
            };
            p.key = key.trim();
            let value = value.trim();
            if value.is_empty() {
                return Err(p.error("missing value"));
            }

            match p.key {
                "k" => set(&mut c.k, p.real(value)?, &p)?,
                "l_max" => set(&mut c.l_max, p.count(value)?, &p)?,
                "l_start" => set(&mut c.l_start, p.count(value)?, &p)?,
                "l_end" => set(&mut c.l_end, p.count(value)?, &p)?,
                "potential_scale" => set(&mut c.potential_scale, p.real(value)?, &p)?,
                "layer" | "layers" | "target_layer" | "target_layers" => {
                    let target = p.key.starts_with("target");
                    let this = if p.key.ends_with('s') {
                        LayerForm::Inline
                    } else {
                        LayerForm::PerLine
                    };
                    let seen = if target { &mut target_form } else { &mut form };
                    if *seen == LayerForm::Inline || (*seen == LayerForm::PerLine && this == LayerForm::Inline) {
                        return Err(p.error("layers of this potential were already given"));
                    }
                    *seen = this;
                    let new = match this {
                        LayerForm::Inline => p.inline(value)?,
                        _ => vec![p.pair(value, ',')?],
                    };
                    let list = if target {
                        c.target_layers.get_or_insert_with(Vec::new)
                    } else {
                        &mut c.layers
                    };
                    list.extend(new);
                }
                "target_shifts" => set(&mut c.target_shifts, p.path(value), &p)?,
                "L" => set(&mut c.batch_size, p.count(value)?, &p)?,
                "gamma" => set(&mut c.gamma, p.real(value)?, &p)?,
                "seed" => {
                    let seed = value
                        .parse()
                        .map_err(|_| p.error(format!("expected an unsigned integer, got `{value}`")))?;
                    set(&mut c.seed, seed, &p)?
                }
                "M_max" => set(&mut c.m_max, p.count(value)?, &p)?,
                "R" => set(&mut c.radius, p.real(value)?, &p)?,
                "q_low" => set(&mut c.q_low, p.real(value)?, &p)?,
                "q_high" => set(&mut c.q_high, p.real(value)?, &p)?,
                "eps_r" => set(&mut c.eps_r, p.real(value)?, &p)?,
                "max_sweeps" => set(&mut c.max_sweeps, p.count(value)?, &p)?,
                "dedup_tol" => set(&mut c.dedup_tol, p.real(value)?, &p)?,
                "csv" => set(&mut c.csv, p.path(value), &p)?,
                "results" => set(&mut c.results, p.path(value), &p)?,
                _ => return Err(p.error("unknown key")),
            }
        }
        if c.target_layers.is_some() && c.target_shifts.is_some() {
            return Err(CliError::Invalid(
                "give either target layers or target_shifts, not both".into(),
            ));
        }
        Ok(c)
    }
}
