use serde::Serialize;

use super::kernel::Kernel;
use super::mixture::MixtureModel;
use crate::error::{Error, Result};

/// Values closer than this (relative) count as equal when scanning for plateaus.
const PLATEAU_RTOL: f64 = 1e-12;
const SCAN_POINTS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    Unimodal,
    Bimodal,
    /// More than two maxima; only reachable with non-smooth kernels.
    Multimodal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ArgmaxPosition {
    BetweenMuAndMuF,
    BetweenMugAndMu,
    AtMu,
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport {
    pub regime: Regime,
    pub maxima: Vec<f64>,
    pub minima: Vec<f64>,
    /// Minimum between the two maxima of a bimodal density.
    pub local_min: Option<f64>,
    /// Global maximum.
    pub argmax: f64,
    pub argmax_position: ArgmaxPosition,
    pub alpha_low_est: Option<f64>,
    pub alpha_high_est: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSearch {
    pub halfwidth: f64,
    pub grid_step: f64,
    pub refine_tol: f64,
}

impl ModeSearch {
    /// Window of `alpha + 10 scale` around `mu`, 400 cells per scale unit.
    pub fn for_model(model: &MixtureModel) -> Self {
        ModeSearch {
            halfwidth: model.alpha + 10.0 * model.max_scale(),
            grid_step: model.min_scale() / 400.0,
            refine_tol: 1e-6,
        }
    }

    fn validate(&self, model: &MixtureModel) -> Result<()> {
        let s = model.max_scale();
        if !(self.grid_step > 0.0 && self.refine_tol > 0.0 && self.halfwidth > 0.0) {
            return Err(Error::InvalidArgument("mode search parameters must be positive".into()));
        }
        if self.grid_step > model.min_scale() / 10.0 {
            return Err(Error::InvalidArgument(format!(
                "grid step {} exceeds scale/10 = {}",
                self.grid_step,
                model.min_scale() / 10.0
            )));
        }
        if model.mu - self.halfwidth > model.mean_g() - 5.0 * s || model.mu + self.halfwidth < model.mean_f() + 5.0 * s
        {
            return Err(Error::InvalidArgument(format!(
                "search window mu ± {} does not cover [{}, {}]",
                self.halfwidth,
                model.mean_g() - 5.0 * s,
                model.mean_f() + 5.0 * s
            )));
        }
        Ok(())
    }
}

fn nearly_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= PLATEAU_RTOL * a.abs().max(b.abs())
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64, maximize: bool) -> f64 {
    let sign = if maximize { 1.0 } else { -1.0 };
    let g = |x: f64| sign * f(x);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (g(c), g(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = g(d);
        }
    }
    0.5 * (a + b)
}

/// Locates every strict local extremum of `h` by a grid scan followed by
/// golden-section refinement. The grid is anchored at `mu`.
pub fn find_modes(model: &MixtureModel, search: &ModeSearch) -> Result<RegimeReport> {
    search.validate(model)?;
    let step = search.grid_step;
    let half_cells = (search.halfwidth / step).ceil() as i64;
    let xs: Vec<f64> = (-half_cells..=half_cells).map(|k| model.mu + k as f64 * step).collect();
    let hs: Vec<f64> = xs.iter().map(|&x| model.density(x)).collect();

    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for k in 1..=hs.len() {
        if k == hs.len() || !nearly_equal(hs[start], hs[k]) {
            runs.push((start, k - 1));
            start = k;
        }
    }

    let (mut maxima, mut minima) = (Vec::new(), Vec::new());
    for w in runs.windows(3) {
        let (left, (s, e), right) = (hs[w[0].1], w[1], hs[w[2].0]);
        let v = hs[s];
        let is_max = v > left && v > right;
        let is_min = v < left && v < right;
        if !(is_max || is_min) {
            continue;
        }
        if e - s + 1 > 2 {
            return Err(Error::Plateau { x: xs[s], cells: e - s + 1 });
        }
        let x = golden_section(|x| model.density(x), xs[s - 1], xs[e + 1], search.refine_tol, is_max);
        if is_max {
            maxima.push(x);
        } else {
            minima.push(x);
        }
    }
    if maxima.is_empty() {
        return Err(Error::InvalidArgument("no interior maximum inside the search window".into()));
    }

    let regime = match maxima.len() {
        1 => Regime::Unimodal,
        2 => Regime::Bimodal,
        _ => Regime::Multimodal,
    };
    let local_min =
        (regime == Regime::Bimodal).then(|| minima.iter().copied().find(|&m| maxima[0] < m && m < maxima[1])).flatten();
    let argmax =
        maxima.iter().copied().fold(maxima[0], |best, x| if model.density(x) > model.density(best) { x } else { best });
    Ok(RegimeReport {
        regime,
        argmax_position: argmax_position(model, argmax, search.refine_tol),
        maxima,
        minima,
        local_min,
        argmax,
        alpha_low_est: None,
        alpha_high_est: None,
    })
}

pub fn argmax_position(model: &MixtureModel, argmax: f64, margin: f64) -> ArgmaxPosition {
    let mu = model.mu;
    if (argmax - mu).abs() <= margin {
        ArgmaxPosition::AtMu
    } else if argmax > mu && argmax < model.mean_f() - margin {
        ArgmaxPosition::BetweenMuAndMuF
    } else if argmax < mu && argmax > model.mean_g() + margin {
        ArgmaxPosition::BetweenMugAndMu
    } else {
        ArgmaxPosition::Other
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionEstimate {
    /// Largest alpha seen unimodal.
    pub alpha_low: f64,
    /// Smallest alpha seen bimodal.
    pub alpha_high: f64,
}

impl TransitionEstimate {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.alpha_low + self.alpha_high)
    }
}

fn regime_at(p: f64, kernel: &Kernel, mu: f64, alpha: f64) -> Result<Regime> {
    let model = MixtureModel::new(p, alpha, mu, kernel.clone())?;
    Ok(find_modes(&model, &ModeSearch::for_model(&model))?.regime)
}

/// Brackets the unimodal to bimodal boundary in alpha for a gaussian
/// translate mixture. A dense scan over `[0, alpha_max]` first confirms a
/// single crossing; bisection then narrows it to width `tol`.
pub fn estimate_transition_alphas(
    p: f64,
    kernel: &Kernel,
    mu: f64,
    alpha_max: f64,
    tol: f64,
) -> Result<TransitionEstimate> {
    if !kernel.is_smooth() {
        return Err(Error::InvalidArgument("transition estimation requires a gaussian kernel".into()));
    }
    if !(tol > 0.0 && alpha_max > 0.0 && alpha_max.is_finite()) {
        return Err(Error::InvalidArgument("alpha_max and tol must be positive".into()));
    }
    let alphas: Vec<f64> = (0..=SCAN_POINTS).map(|k| alpha_max * k as f64 / SCAN_POINTS as f64).collect();
    let unimodal: Vec<bool> =
        alphas.iter().map(|&a| regime_at(p, kernel, mu, a).map(|r| r == Regime::Unimodal)).collect::<Result<_>>()?;
    let Some(first_split) = unimodal.iter().position(|u| !u) else {
        return Err(Error::NoRegimeChange { alpha_max });
    };
    if first_split == 0 || unimodal[first_split..].iter().any(|&u| u) {
        return Err(Error::NonMonotoneRegime { alpha_max });
    }
    let (mut lo, mut hi) = (alphas[first_split - 1], alphas[first_split]);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if regime_at(p, kernel, mu, mid)? == Regime::Unimodal {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(TransitionEstimate { alpha_low: lo, alpha_high: hi })
}
