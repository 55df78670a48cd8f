//! Scenario-driven batch runner.

pub mod report;
pub mod run;
pub mod scenario;

pub use report::{emit_report, render, write_atomic, Format, Report};
pub use run::{run_scenario, run_scenario_text, Overrides};
pub use scenario::{parse_scenario, Scenario};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

/// Scenarios shipped with the binary, by file name.
pub const BUNDLED: &[(&str, &str)] = &[
    ("diagonal_s3.json", include_str!("../scenarios/diagonal_s3.json")),
    ("me_product_z3_z5.json", include_str!("../scenarios/me_product_z3_z5.json")),
    ("wstar_z4_klein.json", include_str!("../scenarios/wstar_z4_klein.json")),
    ("wstar_order8_pairwise.json", include_str!("../scenarios/wstar_order8_pairwise.json")),
];
