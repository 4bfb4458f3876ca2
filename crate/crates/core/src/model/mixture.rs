use rand::Rng;
use serde::Serialize;

use super::kernel::Kernel;
use crate::error::{Error, Result};

/// Two-population opinion density `h = p f + (1 - p) g`.
///
/// `f` (positive evaluators) is centred at `mu + (1 - p) alpha` and `g`
/// (negative evaluators) at `mu - p alpha`. The means are `alpha` apart and
/// the mixture mean is `mu`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureModel {
    pub p: f64,
    pub alpha: f64,
    pub mu: f64,
    pub kernel_f: Kernel,
    pub kernel_g: Kernel,
}

impl MixtureModel {
    /// Translate case: both populations share one kernel shape.
    pub fn new(p: f64, alpha: f64, mu: f64, kernel: Kernel) -> Result<Self> {
        Self::with_kernels(p, alpha, mu, kernel.clone(), kernel)
    }

    pub fn with_kernels(p: f64, alpha: f64, mu: f64, kernel_f: Kernel, kernel_g: Kernel) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidArgument(format!("balance p must lie in (0, 1), got {p}")));
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("controversy alpha must be >= 0, got {alpha}")));
        }
        if !mu.is_finite() {
            return Err(Error::InvalidArgument(format!("mu must be finite, got {mu}")));
        }
        Ok(MixtureModel { p, alpha, mu, kernel_f, kernel_g })
    }

    pub fn q(&self) -> f64 {
        1.0 - self.p
    }

    pub fn mean_f(&self) -> f64 {
        self.mu + self.q() * self.alpha
    }

    pub fn mean_g(&self) -> f64 {
        self.mu - self.p * self.alpha
    }

    pub fn f(&self, x: f64) -> f64 {
        self.kernel_f.density(x - self.mean_f())
    }

    pub fn g(&self, x: f64) -> f64 {
        self.kernel_g.density(x - self.mean_g())
    }

    pub fn density(&self, x: f64) -> f64 {
        self.p * self.f(x) + self.q() * self.g(x)
    }

    /// Mass of `h` on `[lo, hi]`.
    pub fn window_mass(&self, lo: f64, hi: f64) -> f64 {
        let (mf, mg) = (self.mean_f(), self.mean_g());
        let f = self.kernel_f.cdf(hi - mf) - self.kernel_f.cdf(lo - mf);
        let g = self.kernel_g.cdf(hi - mg) - self.kernel_g.cdf(lo - mg);
        self.p * f + self.q() * g
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if rng.random::<f64>() < self.p {
            self.mean_f() + self.kernel_f.sample(rng)
        } else {
            self.mean_g() + self.kernel_g.sample(rng)
        }
    }

    pub fn max_scale(&self) -> f64 {
        self.kernel_f.scale().max(self.kernel_g.scale())
    }

    pub fn min_scale(&self) -> f64 {
        self.kernel_f.scale().min(self.kernel_g.scale())
    }

    /// Mirror image under `x -> 2 mu - x`: balance `1 - p`, kernels swapped.
    pub fn reflected(&self) -> MixtureModel {
        MixtureModel {
            p: self.q(),
            alpha: self.alpha,
            mu: self.mu,
            kernel_f: self.kernel_g.clone(),
            kernel_g: self.kernel_f.clone(),
        }
    }
}

/// `(x, f, g, h)` rows on `[from, to]` for plotting.
pub fn density_table(model: &MixtureModel, from: f64, to: f64, step: f64) -> Result<Vec<[f64; 4]>> {
    if !(step > 0.0 && to >= from) {
        return Err(Error::InvalidArgument("density table needs step > 0 and to >= from".into()));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    Ok((0..=n)
        .map(|k| {
            let x = from + k as f64 * step;
            [x, model.f(x), model.g(x), model.density(x)]
        })
        .collect())
}
