//! Two-population opinion mixture: density, modes, claim checks and a
//! tolerance-evaluator simulator.

mod kernel;
mod mixture;
mod modes;
mod simulate;
mod verify;

pub use kernel::{Kernel, TabulatedKernel};
pub use mixture::{density_table, MixtureModel};
pub use modes::{
    argmax_position, estimate_transition_alphas, find_modes, ArgmaxPosition, ModeSearch, Regime, RegimeReport,
    TransitionEstimate,
};
pub use simulate::{expected_ratio, simulate_helpfulness, SimulationConfig, SIMULATED_LABEL};
pub use verify::{
    verify_argmax_shift, verify_regime_transition, Claim, Outcome, SampleCheck, VerificationReport, VerifyOptions,
};
