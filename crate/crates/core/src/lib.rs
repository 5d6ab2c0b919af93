//! Monte Carlo simulation of symmetric pure-jump Markov processes whose jump
//! kernel is comparable to the α-stable kernel below unit jump length and
//! vanishes beyond it.
//!
//! * [`kernel`]: kernel parameters, large-jump rates and samplers.
//! * [`simulate`]: exact path simulation by thinning, the layered big-jump
//!   construction, and pathwise functionals.
//! * [`estimate`]: Monte Carlo estimators with error bars.
//! * [`verify`]: named statistical experiments with pass/fail criteria.
//! * [`cli`]: the `jumppath` command-line front end.

pub mod cli;
pub mod error;
pub mod estimate;
pub mod kernel;
pub mod rng;
pub mod simulate;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use kernel::{KernelParams, Modulation};
pub use simulate::{meyer_compose, simulate_path, Domain, MeyerState, Path, SimConfig, StopReason};
pub use estimate::{EstimateResult, Estimator, TubeSpec};
pub use verify::{default_suite, run_scenario, Report, Scenario, ScenarioKind};
