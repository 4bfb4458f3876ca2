use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};

/// A unimodal, centrally symmetric density centred at 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Kernel {
    Gaussian { sigma: f64 },
    Triangular { half_width: f64 },
    Tabulated(TabulatedKernel),
}

/// Symmetric density given by non-increasing samples on `[0, step * (n-1)]`,
/// linearly interpolated and zero beyond the last sample. Normalised to
/// integrate to 1 at construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TabulatedKernel {
    step: f64,
    values: Vec<f64>,
    /// mass on `[0, k * step]`
    #[serde(skip)]
    cumulative: Vec<f64>,
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {v}")))
    }
}

impl Kernel {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        Ok(Kernel::Gaussian { sigma: positive("sigma", sigma)? })
    }

    pub fn triangular(half_width: f64) -> Result<Self> {
        Ok(Kernel::Triangular { half_width: positive("half_width", half_width)? })
    }

    pub fn tabulated(step: f64, values: Vec<f64>) -> Result<Self> {
        let step = positive("step", step)?;
        if values.len() < 2 || values.iter().any(|v| !v.is_finite() || *v < 0.0) || values[0] <= 0.0 {
            return Err(Error::InvalidArgument(
                "tabulated kernel needs >= 2 finite non-negative values with a positive peak".into(),
            ));
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidArgument("tabulated kernel values must be non-increasing away from 0".into()));
        }
        let half: f64 = values.windows(2).map(|w| 0.5 * (w[0] + w[1]) * step).sum();
        let values: Vec<f64> = values.iter().map(|v| v / (2.0 * half)).collect();
        let mut cumulative = vec![0.0];
        for w in values.windows(2) {
            cumulative.push(cumulative.last().unwrap() + 0.5 * (w[0] + w[1]) * step);
        }
        Ok(Kernel::Tabulated(TabulatedKernel { step, values, cumulative }))
    }

    /// Standard deviation for the gaussian, half-width of the support for the
    /// others.
    pub fn scale(&self) -> f64 {
        match self {
            Kernel::Gaussian { sigma } => *sigma,
            Kernel::Triangular { half_width } => *half_width,
            Kernel::Tabulated(t) => t.step * (t.values.len() - 1) as f64,
        }
    }

    /// Only the gaussian is twice continuously differentiable.
    pub fn is_smooth(&self) -> bool {
        matches!(self, Kernel::Gaussian { .. })
    }

    pub fn density(&self, x: f64) -> f64 {
        match self {
            Kernel::Gaussian { sigma } => {
                let z = x / sigma;
                (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
            }
            Kernel::Triangular { half_width: h } => {
                let d = h - x.abs();
                if d > 0.0 {
                    d / (h * h)
                } else {
                    0.0
                }
            }
            Kernel::Tabulated(t) => t.density(x.abs()),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Kernel::Gaussian { sigma } => 0.5 * libm::erfc(-x / (sigma * std::f64::consts::SQRT_2)),
            Kernel::Triangular { half_width: h } => {
                if x <= -h {
                    0.0
                } else if x < 0.0 {
                    (x + h).powi(2) / (2.0 * h * h)
                } else if x < *h {
                    1.0 - (h - x).powi(2) / (2.0 * h * h)
                } else {
                    1.0
                }
            }
            Kernel::Tabulated(t) => {
                let m = t.mass_from_zero(x.abs());
                if x < 0.0 {
                    0.5 - m
                } else {
                    0.5 + m
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Kernel::Gaussian { sigma } => sigma * rng.sample::<f64, _>(StandardNormal),
            Kernel::Triangular { half_width } => (rng.random::<f64>() + rng.random::<f64>() - 1.0) * half_width,
            Kernel::Tabulated(t) => {
                let u: f64 = rng.random();
                let offset = t.inverse_half_mass((u - 0.5).abs());
                if u < 0.5 {
                    -offset
                } else {
                    offset
                }
            }
        }
    }
}

impl TabulatedKernel {
    fn cell(&self, t: f64) -> Option<(usize, f64)> {
        let k = (t / self.step).floor() as usize;
        (k + 1 < self.values.len()).then_some((k, t - k as f64 * self.step))
    }

    fn density(&self, t: f64) -> f64 {
        match self.cell(t) {
            Some((k, u)) => self.values[k] + (self.values[k + 1] - self.values[k]) * u / self.step,
            None => 0.0,
        }
    }

    fn mass_from_zero(&self, t: f64) -> f64 {
        match self.cell(t) {
            Some((k, u)) => {
                let (v0, v1) = (self.values[k], self.values[k + 1]);
                self.cumulative[k] + v0 * u + (v1 - v0) * u * u / (2.0 * self.step)
            }
            None => 0.5,
        }
    }

    /// Offset `t >= 0` whose mass on `[0, t]` equals `m` (in `[0, 0.5)`).
    fn inverse_half_mass(&self, m: f64) -> f64 {
        let k = self.cumulative.partition_point(|&c| c <= m).saturating_sub(1).min(self.values.len() - 2);
        let (v0, v1) = (self.values[k], self.values[k + 1]);
        let rest = m - self.cumulative[k];
        let a = (v1 - v0) / (2.0 * self.step);
        // solve a*u^2 + v0*u = rest in the stable form
        let u =
            if a.abs() < 1e-300 { rest / v0 } else { 2.0 * rest / (v0 + (v0 * v0 + 4.0 * a * rest).max(0.0).sqrt()) };
        k as f64 * self.step + u.clamp(0.0, self.step)
    }
}
