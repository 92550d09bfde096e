//! Library surface of the command-line tool: document loading, suite
//! execution and deterministic reports.

pub mod document;
pub mod report;
pub mod suites;

use dgperf_core::error::Caps;

/// Size caps with environment overrides (DGPERF_MAX_DIM, DGPERF_MAX_POINTS).
pub fn caps_from_env() -> Caps {
    let mut caps = Caps::default();
    if let Ok(v) = std::env::var("DGPERF_MAX_DIM") {
        if let Ok(n) = v.parse() {
            caps.max_dim = n;
        }
    }
    if let Ok(v) = std::env::var("DGPERF_MAX_POINTS") {
        if let Ok(n) = v.parse() {
            caps.max_points = n;
        }
    }
    caps
}
