//! Piecewise-constant spherically symmetric potentials.

use std::fmt;

use crate::error::{Error, Result};

/// Radii closer than this are treated as the same interface.
pub const RADIUS_TIE: f64 = 1e-12;

/// `q(r) = values[i]` on `[radii[i-1], radii[i])` with `radii[-1] = 0`, and
/// `q(r) = 0` for `r >= radii.last()`.
///
/// The empty potential (no layers) is the free case `q ≡ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    radii: Vec<f64>,
    values: Vec<f64>,
}

impl Potential {
    /// Builds a potential from layer right-endpoints and layer values.
    ///
    /// Layers thinner than [`RADIUS_TIE`] are dropped. Radii must otherwise be
    /// strictly increasing, positive and finite; values must be finite.
    pub fn new(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.len() != values.len() {
            return Err(Error::InvalidPotential(format!(
                "{} radii but {} values",
                radii.len(),
                values.len()
            )));
        }
        let mut kept_r: Vec<f64> = Vec::with_capacity(radii.len());
        let mut kept_v: Vec<f64> = Vec::with_capacity(values.len());
        let mut inner = 0.0;
        for (i, (&r, &v)) in radii.iter().zip(&values).enumerate() {
            if !r.is_finite() || r < 0.0 {
                return Err(Error::InvalidPotential(format!(
                    "radius {} of layer {} is not a finite non-negative number",
                    r,
                    i + 1
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidPotential(format!(
                    "value of layer {} is not finite",
                    i + 1
                )));
            }
            if r < inner - RADIUS_TIE {
                return Err(Error::InvalidPotential(format!(
                    "radii must increase: layer {} ends at {} before {}",
                    i + 1,
                    r,
                    inner
                )));
            }
            if r - inner <= RADIUS_TIE {
                continue;
            }
            kept_r.push(r);
            kept_v.push(v);
            inner = r;
        }
        Ok(Self {
            radii: kept_r,
            values: kept_v,
        })
    }

    pub fn from_layers(layers: &[(f64, f64)]) -> Result<Self> {
        let (radii, values) = layers.iter().copied().unzip();
        Self::new(radii, values)
    }

    pub fn zero() -> Self {
        Self {
            radii: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    /// `(outer radius, value)` pairs, innermost first.
    pub fn layers(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.radii.iter().copied().zip(self.values.iter().copied())
    }

    /// Radius beyond which the potential vanishes; zero for the empty potential.
    pub fn support_radius(&self) -> f64 {
        self.radii.last().copied().unwrap_or(0.0)
    }

    pub fn value_at(&self, r: f64) -> f64 {
        let idx = self.radii.partition_point(|&edge| edge <= r);
        self.values.get(idx).copied().unwrap_or(0.0)
    }

    /// Multiplies every layer value by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            radii: self.radii.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// Splits every layer into two halves carrying the same value.
    pub fn bisected(&self) -> Self {
        let mut radii = Vec::with_capacity(2 * self.len());
        let mut values = Vec::with_capacity(2 * self.len());
        let mut inner = 0.0;
        for (r, v) in self.layers() {
            radii.push(0.5 * (inner + r));
            radii.push(r);
            values.push(v);
            values.push(v);
            inner = r;
        }
        Self { radii, values }
    }

    /// `q(r)` on `points` equally spaced samples of `[0, radius]`.
    pub fn sample(&self, radius: f64, points: usize) -> Vec<(f64, f64)> {
        let step = if points > 1 {
            radius / (points - 1) as f64
        } else {
            0.0
        };
        (0..points)
            .map(|i| {
                let r = i as f64 * step;
                (r, self.value_at(r))
            })
            .collect()
    }

    /// Largest `|q(r) - other(r)|` over the radial grid.
    pub fn sup_distance(&self, other: &Potential, radius: f64, points: usize) -> f64 {
        self.sample(radius, points)
            .into_iter()
            .map(|(r, v)| (v - other.value_at(r)).abs())
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for Potential {
    /// `r1:v1,r2:v2,...`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (r, v)) in self.layers().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{r:?}:{v:?}")?;
        }
        Ok(())
    }
}
