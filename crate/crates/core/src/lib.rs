//! Tilted-frame paraxial laser propagation: an exact spectral diffraction
//! stage split with a flux-limited upwind transport stage, marched in `x`.

pub mod config;
pub mod error;
pub mod harness;
pub mod march;
pub mod metrics;
pub mod model;
pub mod output;
pub mod spectral;
pub mod transport;

pub use config::{parse_config, reference_document, to_document};
pub use error::{Error, Result};
pub use model::{
    cfl_number, sample_incident_profile, AbsorbingLayerSpec, BeamSpec, BoundaryMode, Complex,
    FieldLine, GridSpec, MediumSpec, Refraction, RunConfig, ScalarField, Speckle,
};
pub use spectral::SpectralGrid;
pub use transport::{LimiterKind, SchemeOrder, StepCoefficients};
pub use march::{
    energy_balance_report, march_one_ray, march_two_ray, time_envelope_step, EnergyBalance,
    MarchState, Marcher, TimeEnvelopeParams,
};
pub use metrics::{beam_metrics, compare_interpolated, compare_to_reference, ComparisonReport, RunMetrics};
pub use harness::{
    absorption_split_sweep, angle_sweep, cfl_sweep, convergence_harness, layer_sweep, limits_check,
    regrid, regrid_cfl, two_ray_report, AngleCase, CsvRow,
};
pub use output::{emit_outputs, read_intensity_csv, IntensityPlanes, OutputFiles};
