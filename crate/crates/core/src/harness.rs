//! Parameter sweeps reproducing the convergence and sensitivity studies.
//!
//! Each sweep builds one configuration per point, runs them in parallel and
//! returns typed rows that can be written as CSV.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::march::{march_one_ray, MarchState, Marcher};
use crate::metrics::{beam_metrics, compare_interpolated, compare_to_reference, RunMetrics};
use crate::model::{
    sample_incident_profile, AbsorbingLayerSpec, BeamSpec, BoundaryMode, Complex, GridSpec,
    Refraction, RunConfig, ScalarField,
};
use crate::spectral::{boundary_data_g, SpectralGrid};
use crate::transport::{LimiterKind, SchemeOrder};

/// A row of a harness table.
pub trait CsvRow {
    fn header() -> &'static str;
    fn fields(&self) -> Vec<String>;
}

/// Renders rows as CSV text with a header line.
pub fn to_csv<R: CsvRow>(rows: &[R]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", R::header());
    for row in rows {
        let _ = writeln!(out, "{}", row.fields().join(","));
    }
    out
}

pub fn write_csv<R: CsvRow>(rows: &[R], path: &Path) -> Result<()> {
    std::fs::write(path, to_csv(rows)).map_err(|e| Error::io(path, e))
}

/// `δx` giving Courant number `cfl` for `beam` on cells of height `delta_y`.
pub fn cfl_delta_x(beam: &BeamSpec, delta_y: f64, cfl: f64) -> Result<f64> {
    if beam.ky == 0.0 {
        return Err(Error::Invalid("normal incidence has no CFL-bound δx".into()));
    }
    Ok(cfl * delta_y * beam.kx / beam.ky.abs())
}

/// `base` on a new cell size, keeping the physical extent, origin and
/// layer width.
pub fn regrid(base: &RunConfig, delta_x: f64, delta_y: f64) -> Result<RunConfig> {
    let g = &base.grid;
    let mut cfg = base.clone();
    cfg.grid = GridSpec::new(delta_x, delta_y, g.length_x(), g.length_y(), g.y_origin, g.layer_width)?;
    cfg.validate()?;
    Ok(cfg)
}

/// `base` with cell height `delta_y` and the largest `δx` keeping every
/// beam at Courant number `cfl`.
pub fn regrid_cfl(base: &RunConfig, delta_y: f64, cfl: f64) -> Result<RunConfig> {
    let dx = base
        .beams
        .iter()
        .map(|b| cfl_delta_x(b, delta_y, cfl))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    regrid(base, dx, delta_y)
}

fn run_all(configs: &[RunConfig]) -> Result<Vec<MarchState>> {
    configs.par_iter().map(|c| Marcher::new(c)?.run()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub mesh: f64,
    pub energy_error: f64,
    pub focusing_distance: f64,
    pub focusing_error: f64,
    pub max_energy: f64,
    pub max_energy_error: f64,
}

impl CsvRow for ConvergenceRow {
    fn header() -> &'static str {
        "mesh,energy_error,focusing_distance,focusing_error,max_energy,max_energy_error"
    }
    fn fields(&self) -> Vec<String> {
        [
            self.mesh,
            self.energy_error,
            self.focusing_distance,
            self.focusing_error,
            self.max_energy,
            self.max_energy_error,
        ]
        .iter()
        .map(f64::to_string)
        .collect()
    }
}

/// Result of a convergence study: one row per mesh plus the reference.
#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
    pub reference: RunMetrics,
}

/// Runs `base` at Courant number 1 on each mesh `δy` and on `reference_mesh`,
/// comparing every run with the finest one at coincident nodes.
pub fn convergence_harness(base: &RunConfig, meshes: &[f64], reference_mesh: f64) -> Result<ConvergenceStudy> {
    let mut configs = vec![regrid_cfl(base, reference_mesh, 1.0)?];
    for &m in meshes {
        configs.push(regrid_cfl(base, m, 1.0)?);
    }
    let states = run_all(&configs)?;
    let reference = &states[0];
    let rows = meshes
        .iter()
        .zip(&states[1..])
        .map(|(&mesh, state)| {
            let report = compare_to_reference(state, reference)?;
            let m = beam_metrics(state);
            Ok(ConvergenceRow {
                mesh,
                energy_error: report.energy_error,
                focusing_distance: m.focusing_distance,
                focusing_error: report.focusing_error,
                max_energy: m.max_energy,
                max_energy_error: report.max_energy_error,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceStudy {
        rows,
        reference: beam_metrics(reference),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CflRow {
    pub cfl: f64,
    pub delta_x: f64,
    pub delta_y: f64,
    pub order: SchemeOrder,
    pub limiter: LimiterKind,
    pub energy_error: f64,
    pub focusing_distance: f64,
    pub focusing_error: f64,
    pub max_energy: f64,
    pub max_energy_error: f64,
}

impl CsvRow for CflRow {
    fn header() -> &'static str {
        "cfl,delta_x,delta_y,order,limiter,energy_error,focusing_distance,focusing_error,max_energy,max_energy_error"
    }
    fn fields(&self) -> Vec<String> {
        let order = match self.order {
            SchemeOrder::First => "1",
            SchemeOrder::Second => "2",
        };
        vec![
            self.cfl.to_string(),
            self.delta_x.to_string(),
            self.delta_y.to_string(),
            order.to_string(),
            self.limiter.to_string(),
            self.energy_error.to_string(),
            self.focusing_distance.to_string(),
            self.focusing_error.to_string(),
            self.max_energy.to_string(),
            self.max_energy_error.to_string(),
        ]
    }
}

/// Runs `base` (cell height `base.grid.delta_y`) at each Courant number with
/// the given scheme and compares with `reference`. Stations are not nested
/// in `x`, so the reference is interpolated between its stations.
pub fn cfl_sweep(
    base: &RunConfig,
    cfls: &[f64],
    order: SchemeOrder,
    limiter: LimiterKind,
    reference: &MarchState,
) -> Result<Vec<CflRow>> {
    let dy = base.grid.delta_y;
    let configs = cfls
        .iter()
        .map(|&c| {
            let mut cfg = regrid_cfl(base, dy, c)?;
            cfg.order = order;
            cfg.limiter = limiter;
            Ok(cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    let states = run_all(&configs)?;
    cfls.iter()
        .zip(configs.iter().zip(&states))
        .map(|(&cfl, (cfg, state))| {
            let report = compare_interpolated(state, reference)?;
            let m = beam_metrics(state);
            Ok(CflRow {
                cfl,
                delta_x: cfg.grid.delta_x,
                delta_y: dy,
                order,
                limiter,
                energy_error: report.energy_error,
                focusing_distance: m.focusing_distance,
                focusing_error: report.focusing_error,
                max_energy: m.max_energy,
                max_energy_error: report.max_energy_error,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerRow {
    pub b: f64,
    pub beta: f64,
    pub total_energy: f64,
    /// l¹ energy difference against the baseline layer.
    pub energy_error: f64,
}

impl CsvRow for LayerRow {
    fn header() -> &'static str {
        "b,beta,total_energy,energy_error"
    }
    fn fields(&self) -> Vec<String> {
        [self.b, self.beta, self.total_energy, self.energy_error]
            .iter()
            .map(f64::to_string)
            .collect()
    }
}

/// Layer strength sensitivity: every `(b, β)` pair against the `baseline`
/// layer on the grid of `base`.
pub fn layer_sweep(
    base: &RunConfig,
    bs: &[f64],
    betas: &[f64],
    baseline: AbsorbingLayerSpec,
) -> Result<Vec<LayerRow>> {
    let mut layers = vec![baseline];
    for &b in bs {
        for &beta in betas {
            layers.push(AbsorbingLayerSpec { b, beta });
        }
    }
    let configs = layers
        .iter()
        .map(|&layer| {
            let mut cfg = base.clone();
            cfg.layer = layer;
            cfg.validate()?;
            Ok(cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    let states = run_all(&configs)?;
    let reference = &states[0];
    layers[1..]
        .iter()
        .zip(&states[1..])
        .map(|(layer, state)| {
            Ok(LayerRow {
                b: layer.b,
                beta: layer.beta,
                total_energy: beam_metrics(state).total_energy,
                energy_error: compare_to_reference(state, reference)?.energy_error,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitRow {
    /// `ν₀ / ν`.
    pub fraction: f64,
    pub energy_error: f64,
    pub focusing_distance: f64,
    pub max_energy: f64,
    pub max_energy_change: f64,
}

impl CsvRow for SplitRow {
    fn header() -> &'static str {
        "nu0_fraction,energy_error,focusing_distance,max_energy,max_energy_change"
    }
    fn fields(&self) -> Vec<String> {
        [
            self.fraction,
            self.energy_error,
            self.focusing_distance,
            self.max_energy,
            self.max_energy_change,
        ]
        .iter()
        .map(f64::to_string)
        .collect()
    }
}

/// Splits a constant total absorption `nu` as `ν₀ = fν`, `ν₁ = (1-f)ν` for
/// each fraction `f` and compares against the even split.
pub fn absorption_split_sweep(base: &RunConfig, nu: f64, fractions: &[f64]) -> Result<Vec<SplitRow>> {
    let with_split = |f: f64| -> Result<RunConfig> {
        let mut cfg = base.clone();
        cfg.medium.nu0 = f * nu;
        cfg.medium.nu1 = ScalarField::Uniform((1.0 - f) * nu);
        cfg.validate()?;
        Ok(cfg)
    };
    let mut configs = vec![with_split(0.5)?];
    for &f in fractions {
        configs.push(with_split(f)?);
    }
    let states = run_all(&configs)?;
    let reference = &states[0];
    let ref_max = beam_metrics(reference).max_energy;
    fractions
        .iter()
        .zip(&states[1..])
        .map(|(&fraction, state)| {
            let m = beam_metrics(state);
            Ok(SplitRow {
                fraction,
                energy_error: compare_to_reference(state, reference)?.energy_error,
                focusing_distance: m.focusing_distance,
                max_energy: m.max_energy,
                max_energy_change: ((m.max_energy - ref_max) / ref_max).abs(),
            })
        })
        .collect()
}

/// One incidence angle with its cell sizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleCase {
    pub angle_deg: f64,
    pub delta_x: f64,
    pub delta_y: f64,
}

impl AngleCase {
    /// The case as given when its Courant number is at most 1. Otherwise
    /// `δx` is kept and `δy` widened to the Courant-1 value, which the listed
    /// `δy` then only rounds.
    pub fn within_cfl(self) -> AngleCase {
        let a = self.angle_deg.to_radians();
        let ratio = a.sin().abs() / a.cos();
        if ratio * self.delta_x / self.delta_y <= 1.0 {
            self
        } else {
            AngleCase {
                delta_y: ratio * self.delta_x,
                ..self
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngleRow {
    pub angle_deg: f64,
    pub delta_x: f64,
    pub delta_y: f64,
    pub cfl: f64,
    pub max_energy: f64,
    pub max_energy_error: f64,
    pub focusing_distance: f64,
    pub focusing_error: f64,
}

impl CsvRow for AngleRow {
    fn header() -> &'static str {
        "angle_deg,delta_x,delta_y,cfl,max_energy,max_energy_error,focusing_distance,focusing_error"
    }
    fn fields(&self) -> Vec<String> {
        [
            self.angle_deg,
            self.delta_x,
            self.delta_y,
            self.cfl,
            self.max_energy,
            self.max_energy_error,
            self.focusing_distance,
            self.focusing_error,
        ]
        .iter()
        .map(f64::to_string)
        .collect()
    }
}

/// Re-aims the first beam of `base` at each angle, keeping its speckles,
/// and compares focusing figures with `reference`.
pub fn angle_sweep(base: &RunConfig, cases: &[AngleCase], reference: &RunMetrics) -> Result<Vec<AngleRow>> {
    let configs = cases
        .iter()
        .map(|c| {
            let beam = &base.beams[0];
            let mut aimed = base.clone();
            aimed.beams = vec![BeamSpec::from_angle_deg(c.angle_deg, beam.epsilon, beam.speckles.clone())?];
            regrid(&aimed, c.delta_x, c.delta_y)
        })
        .collect::<Result<Vec<_>>>()?;
    let states = run_all(&configs)?;
    Ok(cases
        .iter()
        .zip(configs.iter().zip(&states))
        .map(|(c, (cfg, state))| {
            let m = beam_metrics(state);
            AngleRow {
                angle_deg: c.angle_deg,
                delta_x: c.delta_x,
                delta_y: c.delta_y,
                cfl: crate::model::cfl_number(&cfg.grid, &cfg.beams[0]),
                max_energy: m.max_energy,
                max_energy_error: ((m.max_energy - reference.max_energy) / reference.max_energy).abs(),
                focusing_distance: m.focusing_distance,
                focusing_error: ((m.focusing_distance - reference.focusing_distance)
                    / reference.focusing_distance)
                    .abs(),
            }
        })
        .collect())
}

/// Peak of the interacting two-ray run against the peak of the two rays
/// marched separately and superposed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoRayReport {
    pub interacting_max: f64,
    pub superposed_max: f64,
    pub interacting_location: (f64, f64),
}

impl CsvRow for TwoRayReport {
    fn header() -> &'static str {
        "interacting_max,superposed_max,x,y"
    }
    fn fields(&self) -> Vec<String> {
        [
            self.interacting_max,
            self.superposed_max,
            self.interacting_location.0,
            self.interacting_location.1,
        ]
        .iter()
        .map(f64::to_string)
        .collect()
    }
}

/// `base` with a second beam mirroring the first about the domain mid-line.
/// The upward beam comes first. Configurations that already hold two beams
/// are returned unchanged.
pub fn mirrored_pair(base: &RunConfig) -> RunConfig {
    let mut cfg = base.clone();
    if cfg.beams.len() == 1 {
        let axis = cfg.grid.y_origin + 0.5 * cfg.grid.length_y();
        let beam = cfg.beams[0].clone();
        let first = if beam.ky > 0.0 { beam } else { beam.mirrored(axis) };
        cfg.beams = vec![first.clone(), first.mirrored(axis)];
    }
    cfg
}

/// Runs the two-beam configuration coupled, then each beam alone.
pub fn two_ray_report(config: &RunConfig) -> Result<(TwoRayReport, MarchState)> {
    if config.beams.len() != 2 {
        return Err(Error::invalid("beam2", "two-ray comparison needs two beams"));
    }
    let mut configs = vec![config.clone()];
    for beam in &config.beams {
        let mut single = config.clone();
        single.beams = vec![beam.clone()];
        single.snapshot_stride = 1;
        configs.push(single);
    }
    configs[0].snapshot_stride = 1;
    let mut states = run_all(&configs)?;
    let coupled = states.remove(0);
    let m = beam_metrics(&coupled);
    let grid = coupled.grid.clone();
    let (a, b) = (&states[0].snapshots, &states[1].snapshots);
    let mut superposed_max = 0.0f64;
    for k in 0..a.len() {
        let (ra, rb) = (a.row(k), b.row(k));
        for j in grid.interior() {
            superposed_max = superposed_max.max(ra[j] as f64 + rb[j] as f64);
        }
    }
    let mut coupled = coupled;
    coupled.snapshots = if config.snapshot_stride == 1 {
        coupled.snapshots
    } else {
        thin_snapshots(&coupled.snapshots, config.snapshot_stride, grid.n_x)
    };
    Ok((
        TwoRayReport {
            interacting_max: m.max_energy,
            superposed_max,
            interacting_location: m.max_location,
        },
        coupled,
    ))
}

fn thin_snapshots(s: &crate::march::Snapshots, stride: usize, last: usize) -> crate::march::Snapshots {
    let mut out = crate::march::Snapshots {
        n_y: s.n_y,
        ..Default::default()
    };
    for (k, &n) in s.stations.iter().enumerate() {
        if n % stride == 0 || n == last {
            out.stations.push(n);
            out.intensity.extend_from_slice(s.row(k));
        }
    }
    out
}

/// Classical split-step march of `i∂_x u + (ε/2)∂²_y u + iνu - μu = 0` with
/// `u(0) = u^in`: exact diffraction in Fourier space, then the same
/// trapezoidal reaction step and absorbing layers as the tilted scheme.
/// Returns the final line.
pub fn schrodinger_reference(config: &RunConfig) -> Result<Vec<Complex>> {
    config.validate()?;
    let grid = &config.grid;
    let beam = &config.beams[0];
    let sgrid = SpectralGrid::for_grid(grid);
    let dx = grid.delta_x;
    let nu0 = config.medium.nu0;
    let diffraction: Vec<Complex> = sgrid
        .frequencies()
        .iter()
        .map(|&eta| (Complex::new(-nu0, -0.5 * beam.epsilon * eta * eta) * dx).exp())
        .collect();
    let absorb = crate::transport::absorbing_profile(&config.layer, grid.n_y, grid.layer_width);
    let mut u = sample_incident_profile(beam, grid, 0.0).values;
    for n in 0..grid.n_x {
        sgrid.filter(&mut u, &diffraction);
        for (j, v) in u.iter_mut().enumerate() {
            let mu = match &config.medium.refraction {
                Refraction::Prescribed(f) => f.at(n, j),
                Refraction::Nonlinear { alpha } => (-alpha * v.norm_sqr()).exp() - 1.0,
            };
            let half = 0.5 * Complex::new(config.medium.nu1.at(n, j), mu);
            *v = (1.0 / dx - half) * *v / (1.0 / dx + half + absorb[j]);
        }
    }
    Ok(u)
}

/// Outcome of one limit consistency check.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitCheck {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
}

impl LimitCheck {
    pub fn passed(&self) -> bool {
        self.value <= self.tolerance
    }
}

impl CsvRow for LimitCheck {
    fn header() -> &'static str {
        "check,value,tolerance,passed"
    }
    fn fields(&self) -> Vec<String> {
        vec![
            self.name.to_string(),
            self.value.to_string(),
            self.tolerance.to_string(),
            self.passed().to_string(),
        ]
    }
}

fn relative_l2(a: &[Complex], b: &[Complex]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let norm: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (diff / norm).sqrt()
}

/// Transverse tilt used for the normal-incidence limit.
pub const NEAR_NORMAL_KY: f64 = 1e-12;

/// Runs the consistency suite around `base`:
/// near-normal incidence against the classical split-step march, the
/// linear two-ray run against superposed single rays, and the vanishing
/// correction of the boundary datum as `ε → 0`.
pub fn limits_check(base: &RunConfig) -> Result<Vec<LimitCheck>> {
    let beam = &base.beams[0];

    // Near-normal incidence.
    let mut normal = base.clone();
    normal.beams = vec![BeamSpec {
        kx: (1.0 - NEAR_NORMAL_KY * NEAR_NORMAL_KY).sqrt(),
        ky: NEAR_NORMAL_KY,
        ..beam.clone()
    }];
    let tilted = march_one_ray(&normal)?;
    let classical = schrodinger_reference(&normal)?;
    let normal_gap = relative_l2(&tilted.lines[0].values, &classical);

    // Linear two-ray superposition.
    let mut linear = base.clone();
    linear.medium.refraction = Refraction::Nonlinear { alpha: 0.0 };
    linear.beams.truncate(1);
    let linear = mirrored_pair(&linear);
    let states = run_all(&[
        linear.clone(),
        RunConfig { beams: vec![linear.beams[0].clone()], ..linear.clone() },
        RunConfig { beams: vec![linear.beams[1].clone()], ..linear.clone() },
    ])?;
    let superposition_gap = relative_l2(&states[0].lines[0].values, &states[1].lines[0].values)
        .max(relative_l2(&states[0].lines[1].values, &states[2].lines[0].values));

    // Boundary datum as ε → 0: the correction shrinks linearly.
    let correction = |eps: f64| -> f64 {
        let b = BeamSpec { epsilon: eps, ..beam.clone() };
        let g = boundary_data_g(&b, &base.grid, BoundaryMode::Analytic);
        let u = sample_incident_profile(&b, &base.grid, 0.0);
        relative_l2(&g.values, &u.values)
    };
    let (c1, c2) = (correction(1e-3), correction(1e-6));
    let slope_gap = ((c1 / c2) / 1e3 - 1.0).abs();

    Ok(vec![
        LimitCheck { name: "near_normal_vs_classical", value: normal_gap, tolerance: 1e-8 },
        LimitCheck { name: "linear_two_ray_superposition", value: superposition_gap, tolerance: 1e-10 },
        LimitCheck { name: "boundary_correction_epsilon_1e-6", value: c2, tolerance: 1e-5 },
        LimitCheck { name: "boundary_correction_linearity", value: slope_gap, tolerance: 1e-6 },
    ])
}
