//! Shared fixtures for the benchmarks.

use paraxial_core::{parse_config, reference_document, sample_incident_profile, FieldLine, RunConfig};

/// Reference case on a square grid of cell size `mesh`.
pub fn reference_case(mesh: f64) -> RunConfig {
    parse_config(&reference_document(mesh)).expect("reference document is valid")
}

/// Incident profile of the first beam at the entrance.
pub fn entrance_line(config: &RunConfig) -> FieldLine {
    sample_incident_profile(&config.beams[0], &config.grid, 0.0)
}
