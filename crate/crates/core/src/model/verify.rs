use std::fmt::Write as _;

use serde::Serialize;

use super::kernel::Kernel;
use super::mixture::MixtureModel;
use super::modes::{estimate_transition_alphas, find_modes, ModeSearch, Regime, TransitionEstimate};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    /// Means coincide; the open interval is empty.
    Boundary,
    /// Sample lies outside the statement's hypothesis.
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim {
    /// Unimodal below the transition with the peak between the means,
    /// a local minimum between the means above it.
    RegimeTransition,
    /// For small alpha the peak sits between `mu` and the majority mean.
    ArgmaxShift,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleCheck {
    pub alpha: f64,
    pub regime: Regime,
    pub argmax: f64,
    pub local_min: Option<f64>,
    pub mean_g: f64,
    pub mean_f: f64,
    pub outcome: Outcome,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub claim: Claim,
    pub p: f64,
    pub mu: f64,
    pub transition: Option<TransitionEstimate>,
    /// Largest alpha for which the argmax-shift predicate was seen to hold.
    pub shift_limit: Option<f64>,
    pub checks: Vec<SampleCheck>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.outcome != Outcome::Fail)
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let name = match self.claim {
            Claim::RegimeTransition => "regime transition",
            Claim::ArgmaxShift => "argmax shift",
        };
        let _ = writeln!(out, "{name}: p={} mu={}", self.p, self.mu);
        if let Some(t) = self.transition {
            let _ = writeln!(out, "  transition alpha in [{:.6}, {:.6}]", t.alpha_low, t.alpha_high);
        }
        if let Some(l) = self.shift_limit {
            let _ = writeln!(out, "  argmax shift holds up to alpha ~ {l:.6}");
        }
        for c in &self.checks {
            let outcome = match c.outcome {
                Outcome::Pass => "PASS",
                Outcome::Fail => "FAIL",
                Outcome::Boundary => "BOUNDARY",
                Outcome::NotApplicable => "N/A",
            };
            let regime = match c.regime {
                Regime::Unimodal => "unimodal",
                Regime::Bimodal => "bimodal",
                Regime::Multimodal => "multimodal",
            };
            let _ = writeln!(out, "  {outcome:<8} alpha={:<8} {regime:<10} {}", c.alpha, c.detail);
        }
        let _ = writeln!(out, "  result: {}", if self.passed() { "pass" } else { "FAIL" });
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Required clearance from interval endpoints.
    pub margin: f64,
    pub refine_tol: f64,
    pub transition_tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { margin: 1e-4, refine_tol: 1e-6, transition_tol: 1e-4 }
    }
}

fn inside(x: f64, lo: f64, hi: f64, margin: f64) -> bool {
    lo + margin < x && x < hi - margin
}

fn analyse(
    p: f64,
    alpha: f64,
    mu: f64,
    kernel: &Kernel,
    opts: &VerifyOptions,
) -> Result<(MixtureModel, super::modes::RegimeReport)> {
    let model = MixtureModel::new(p, alpha, mu, kernel.clone())?;
    let search = ModeSearch { refine_tol: opts.refine_tol, ..ModeSearch::for_model(&model) };
    let report = find_modes(&model, &search)?;
    Ok((model, report))
}

fn scan_limit(samples: &[f64], kernel: &Kernel) -> f64 {
    let top = samples.iter().copied().fold(0.0, f64::max);
    (2.0 * top).max(10.0 * kernel.scale())
}

/// Checks the unimodal/bimodal statement at each alpha sample. For gaussian
/// kernels each sample is judged against the estimated transition; other
/// kernels are judged by the regime actually observed.
pub fn verify_regime_transition(
    p: f64,
    kernel: &Kernel,
    mu: f64,
    alphas: &[f64],
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    let transition = if kernel.is_smooth() {
        match estimate_transition_alphas(p, kernel, mu, scan_limit(alphas, kernel), opts.transition_tol) {
            Ok(t) => Some(t),
            Err(Error::NoRegimeChange { .. }) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };

    let mut checks = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let (model, r) = analyse(p, alpha, mu, kernel, opts)?;
        let (mg, mf) = (model.mean_g(), model.mean_f());
        let below = match transition {
            Some(t) if alpha > t.alpha_low && alpha < t.alpha_high => None,
            Some(t) => Some(alpha <= t.alpha_low),
            None if kernel.is_smooth() => Some(true),
            None => Some(r.regime == Regime::Unimodal),
        };
        let (outcome, detail) = match below {
            None => (Outcome::NotApplicable, "inside the transition bracket".to_string()),
            Some(true) if alpha == 0.0 => {
                let at_mu = r.regime == Regime::Unimodal && (r.argmax - mu).abs() <= opts.margin;
                let o = if at_mu { Outcome::Boundary } else { Outcome::Fail };
                (o, format!("argmax={:.6} means coincide at {mu}", r.argmax))
            }
            Some(true) => {
                let ok = r.regime == Regime::Unimodal && inside(r.argmax, mg, mf, opts.margin);
                let o = if ok { Outcome::Pass } else { Outcome::Fail };
                (o, format!("argmax={:.6} in ({mg:.6}, {mf:.6})", r.argmax))
            }
            Some(false) => {
                let ok = r.regime == Regime::Bimodal && r.local_min.is_some_and(|m| inside(m, mg, mf, opts.margin));
                let o = if ok { Outcome::Pass } else { Outcome::Fail };
                let m = r.local_min.map_or("none".to_string(), |m| format!("{m:.6}"));
                (o, format!("local_min={m} in ({mg:.6}, {mf:.6})"))
            }
        };
        checks.push(SampleCheck {
            alpha,
            regime: r.regime,
            argmax: r.argmax,
            local_min: r.local_min,
            mean_g: mg,
            mean_f: mf,
            outcome,
            detail,
        });
    }
    Ok(VerificationReport { claim: Claim::RegimeTransition, p, mu, transition, shift_limit: None, checks })
}

fn shift_holds(p: f64, model: &MixtureModel, r: &super::modes::RegimeReport, margin: f64) -> bool {
    r.regime == Regime::Unimodal
        && if p > 0.5 {
            inside(r.argmax, model.mu, model.mean_f(), margin)
        } else {
            inside(r.argmax, model.mean_g(), model.mu, margin)
        }
}

/// Checks that the single peak is pulled toward the majority population:
/// into `(mu, mean_f)` for `p > 1/2`, into `(mean_g, mu)` for `p < 1/2`.
///
/// For gaussian kernels the largest alpha where this holds is estimated by
/// a scan below the regime transition followed by bisection; samples at or
/// past the transition are reported as not applicable.
pub fn verify_argmax_shift(
    p: f64,
    kernel: &Kernel,
    mu: f64,
    alphas: &[f64],
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    if p == 0.5 {
        return Err(Error::InvalidArgument("argmax shift needs p != 0.5".into()));
    }
    // scan predicate, margin = refine_tol
    let predicate = |alpha: f64| -> Result<bool> {
        let (m, r) = analyse(p, alpha, mu, kernel, &VerifyOptions { margin: opts.refine_tol, ..*opts })?;
        Ok(shift_holds(p, &m, &r, opts.refine_tol))
    };

    let (transition, shift_limit) = if kernel.is_smooth() {
        let transition =
            match estimate_transition_alphas(p, kernel, mu, scan_limit(alphas, kernel), opts.transition_tol) {
                Ok(t) => Some(t),
                Err(Error::NoRegimeChange { .. }) => None,
                Err(e) => return Err(e),
            };
        let upper = transition.map_or(scan_limit(alphas, kernel), |t| t.alpha_low);
        let steps = 100;
        let mut last_ok = None;
        let mut first_bad = None;
        for k in 1..=steps {
            let a = upper * k as f64 / steps as f64;
            if predicate(a)? {
                last_ok = Some(a);
            } else if last_ok.is_some() {
                first_bad = Some(a);
                break;
            }
        }
        let limit = match (last_ok, first_bad) {
            (Some(mut lo), Some(mut hi)) => {
                while hi - lo > opts.transition_tol {
                    let mid = 0.5 * (lo + hi);
                    if predicate(mid)? {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Some(lo)
            }
            (ok, None) => ok,
            (None, Some(_)) => None,
        };
        (transition, limit)
    } else {
        (None, None)
    };

    let mut checks = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let (model, r) = analyse(p, alpha, mu, kernel, opts)?;
        let (mg, mf) = (model.mean_g(), model.mean_f());
        let (lo, hi) = if p > 0.5 { (mu, mf) } else { (mg, mu) };
        let past_transition = transition.is_some_and(|t| alpha > t.alpha_low);
        let (outcome, detail) = if past_transition {
            (Outcome::NotApplicable, "alpha past the regime transition".to_string())
        } else if alpha == 0.0 {
            let o = if (r.argmax - mu).abs() <= opts.margin { Outcome::Boundary } else { Outcome::Fail };
            (o, format!("argmax={:.6} means coincide at {mu}", r.argmax))
        } else {
            let o = if shift_holds(p, &model, &r, opts.margin) { Outcome::Pass } else { Outcome::Fail };
            (o, format!("argmax={:.6} in ({lo:.6}, {hi:.6})", r.argmax))
        };
        checks.push(SampleCheck {
            alpha,
            regime: r.regime,
            argmax: r.argmax,
            local_min: r.local_min,
            mean_g: mg,
            mean_f: mf,
            outcome,
            detail,
        });
    }
    Ok(VerificationReport { claim: Claim::ArgmaxShift, p, mu, transition, shift_limit, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss() -> Kernel {
        Kernel::gaussian(1.0).unwrap()
    }

    #[test]
    fn balanced_samples_pass() {
        let r = verify_regime_transition(0.5, &gauss(), 0.0, &[0.5, 1.0, 3.0, 6.0], &VerifyOptions::default()).unwrap();
        assert!(r.passed(), "{}", r.render_text());
        let regimes: Vec<Regime> = r.checks.iter().map(|c| c.regime).collect();
        assert_eq!(regimes, [Regime::Unimodal, Regime::Unimodal, Regime::Bimodal, Regime::Bimodal]);
        assert!(r.checks.iter().all(|c| c.outcome == Outcome::Pass));
    }

    #[test]
    fn zero_alpha_is_boundary() {
        let r = verify_regime_transition(0.7, &gauss(), 0.0, &[0.0], &VerifyOptions::default()).unwrap();
        assert_eq!(r.checks[0].outcome, Outcome::Boundary);
        let s = verify_argmax_shift(0.7, &gauss(), 0.0, &[0.0], &VerifyOptions::default()).unwrap();
        assert_eq!(s.checks[0].outcome, Outcome::Boundary);
        assert!(s.passed());
    }

    #[test]
    fn mirrored_balance_gives_mirrored_report() {
        let alphas = [0.5, 1.0, 4.0, 6.0];
        let a = verify_regime_transition(0.7, &gauss(), 0.0, &alphas, &VerifyOptions::default()).unwrap();
        let b = verify_regime_transition(0.3, &gauss(), 0.0, &alphas, &VerifyOptions::default()).unwrap();
        assert!(a.passed() && b.passed());
        for (x, y) in a.checks.iter().zip(&b.checks) {
            assert_eq!(x.regime, y.regime);
            assert!((x.argmax + y.argmax).abs() < 2e-6 || x.regime == Regime::Bimodal);
        }
    }

    #[test]
    fn argmax_shift_examples() {
        let opts = VerifyOptions::default();
        let a = verify_argmax_shift(0.7, &gauss(), 0.0, &[0.4], &opts).unwrap();
        assert!(a.passed());
        assert!(a.checks[0].argmax > 0.0 && a.checks[0].argmax < 0.12);
        let b = verify_argmax_shift(0.3, &gauss(), 0.0, &[0.4], &opts).unwrap();
        assert!(b.passed());
        assert!(b.checks[0].argmax < 0.0 && b.checks[0].argmax > -0.12);
        assert!((a.checks[0].argmax + b.checks[0].argmax).abs() < 2e-6);
        assert!(a.shift_limit.is_some_and(|l| l > 0.4));
    }

    #[test]
    fn small_alpha_shift_matches_series() {
        // leading term of the peak offset: p q (p - q) alpha^3 / 2
        let (p, alpha) = (0.7, 0.2);
        let r = verify_argmax_shift(p, &gauss(), 0.0, &[alpha], &VerifyOptions::default()).unwrap();
        let series = 0.5 * p * (1.0 - p) * (2.0 * p - 1.0) * alpha.powi(3);
        assert!((r.checks[0].argmax - series).abs() < 0.1 * series);
    }

    #[test]
    fn balanced_shift_is_rejected() {
        assert!(verify_argmax_shift(0.5, &gauss(), 0.0, &[0.4], &VerifyOptions::default()).is_err());
    }

    #[test]
    fn triangular_kernel_judged_by_observed_regime() {
        let k = Kernel::triangular(2.0).unwrap();
        let r = verify_regime_transition(0.7, &k, 0.0, &[3.0], &VerifyOptions::default()).unwrap();
        assert!(r.transition.is_none());
        assert_eq!(r.checks[0].regime, Regime::Bimodal);
    }
}
