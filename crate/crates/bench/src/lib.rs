//! Scenario runner, frequency-response export and dynamic-manifold tuner built on `chatter-core`.

// `!(x > 0)` style guards intentionally reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod nyquist;
pub mod output;
pub mod run;
pub mod tune;

pub use config::{
    load_scenarios, parse_scenarios, scenarios_to_toml, ConfigError, Scenario, SimOverrides,
};
pub use nyquist::{df_locus_csv, emit_nyquist, nyquist_csv};
pub use run::{evaluate, run_loaded, run_scenarios, RunError, RunReport, ScenarioSummary};
pub use tune::{tune_dsm, TuneError, TuneResult, TunerRequest};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const CONFIG_ERROR: i32 = 2;
    pub const PARTIAL_FAILURE: i32 = 3;
}
