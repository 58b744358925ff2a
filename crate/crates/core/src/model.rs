//! Domain types shared by every stage: grid geometry, beams, medium
//! coefficients, absorbing layers and the marching slice itself.

use std::path::PathBuf;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::transport::{LimiterKind, SchemeOrder};

pub type Complex = Complex64;

/// Default absorbing-layer thickness in cells.
pub const DEFAULT_LAYER_WIDTH: usize = 5;

/// Default speckle half-width (μm).
pub const DEFAULT_SPECKLE_WIDTH: f64 = 2.5;

/// Rectangular grid: `n_x` marching steps of `delta_x` and `n_y` transverse
/// cells of `delta_y`, starting at `y_origin`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub delta_x: f64,
    pub delta_y: f64,
    pub n_x: usize,
    pub n_y: usize,
    pub y_origin: f64,
    pub layer_width: usize,
}

impl GridSpec {
    /// Builds a grid covering at least `length_x` by `length_y`.
    ///
    /// The step count along x is rounded up; the transverse count is rounded
    /// up to the next power of two, padding the domain beyond `length_y`.
    pub fn new(
        delta_x: f64,
        delta_y: f64,
        length_x: f64,
        length_y: f64,
        y_origin: f64,
        layer_width: usize,
    ) -> Result<Self> {
        if !(delta_x > 0.0 && delta_x.is_finite()) {
            return Err(Error::invalid("grid.dx", "must be positive"));
        }
        if !(delta_y > 0.0 && delta_y.is_finite()) {
            return Err(Error::invalid("grid.dy", "must be positive"));
        }
        if !(length_x > 0.0 && length_x.is_finite()) {
            return Err(Error::invalid("grid.lx", "must be positive"));
        }
        if !(length_y > 0.0 && length_y.is_finite()) {
            return Err(Error::invalid("grid.ly", "must be positive"));
        }
        if !y_origin.is_finite() {
            return Err(Error::invalid("grid.y0", "must be finite"));
        }
        let n_x = cell_count(length_x, delta_x);
        let n_y = cell_count(length_y, delta_y)
            .max(2 * layer_width + 2)
            .next_power_of_two();
        let grid = GridSpec {
            delta_x,
            delta_y,
            n_x,
            n_y,
            y_origin,
            layer_width,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_x > 0.0) || !(self.delta_y > 0.0) {
            return Err(Error::invalid("grid.dx", "cell sizes must be positive"));
        }
        if self.n_x < 1 {
            return Err(Error::invalid("grid.lx", "need at least one marching step"));
        }
        if self.n_y < 2 * self.layer_width + 2 {
            return Err(Error::invalid(
                "grid.ly",
                format!(
                    "n_y = {} must be at least 2*layer_width+2 = {}",
                    self.n_y,
                    2 * self.layer_width + 2
                ),
            ));
        }
        if !self.n_y.is_power_of_two() {
            return Err(Error::invalid("grid.ly", "n_y must be a power of two"));
        }
        Ok(())
    }

    pub fn length_x(&self) -> f64 {
        self.n_x as f64 * self.delta_x
    }

    pub fn length_y(&self) -> f64 {
        self.n_y as f64 * self.delta_y
    }

    #[inline]
    pub fn x_at(&self, n: usize) -> f64 {
        n as f64 * self.delta_x
    }

    #[inline]
    pub fn y_at(&self, j: usize) -> f64 {
        self.y_origin + j as f64 * self.delta_y
    }

    /// Transverse indices outside the absorbing layers (`layer_width + 1`
    /// cells dropped at each edge).
    pub fn interior(&self) -> std::ops::Range<usize> {
        let skip = self.layer_width + 1;
        skip..self.n_y.saturating_sub(skip)
    }
}

fn cell_count(length: f64, step: f64) -> usize {
    // Tolerate round-off so that `n * d / d` maps back to `n`.
    let ratio = length / step;
    ((ratio - 1e-9 * ratio.max(1.0)).ceil() as usize).max(1)
}

/// One Gaussian hot spot of the incident profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Speckle {
    pub amplitude: f64,
    /// Center on the entrance boundary (μm).
    pub center: f64,
    /// Half-width `L_s` (μm).
    pub width: f64,
    /// Phase (radians).
    pub phase: f64,
}

impl Speckle {
    pub fn gaussian(center: f64) -> Self {
        Speckle {
            amplitude: 1.0,
            center,
            width: DEFAULT_SPECKLE_WIDTH,
            phase: 0.0,
        }
    }

    /// Transverse coordinate `k_x (y - y_k) - k_y x`.
    #[inline]
    pub fn transverse(&self, beam: &BeamSpec, x: f64, y: f64) -> f64 {
        beam.kx * (y - self.center) - beam.ky * x
    }
}

/// Propagation direction, wavelength parameter and incident profile.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamSpec {
    pub kx: f64,
    pub ky: f64,
    pub epsilon: f64,
    pub speckles: Vec<Speckle>,
}

impl BeamSpec {
    /// Beam whose direction makes `angle_deg` with the x axis.
    pub fn from_angle_deg(angle_deg: f64, epsilon: f64, speckles: Vec<Speckle>) -> Result<Self> {
        let a = angle_deg.to_radians();
        let beam = BeamSpec {
            kx: a.cos(),
            ky: a.sin(),
            epsilon,
            speckles,
        };
        beam.validate("beam")?;
        Ok(beam)
    }

    pub fn validate(&self, prefix: &str) -> Result<()> {
        let norm = self.kx * self.kx + self.ky * self.ky;
        if !((norm - 1.0).abs() <= 1e-12) {
            return Err(Error::invalid(
                &format!("{prefix}.kx"),
                format!("k must be a unit vector (|k|^2 = {norm})"),
            ));
        }
        if !(self.kx > 0.0) {
            return Err(Error::invalid(
                &format!("{prefix}.kx"),
                "k_x must be positive (the march runs along +x)",
            ));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::invalid(&format!("{prefix}.epsilon"), "must be positive"));
        }
        if self.speckles.is_empty() {
            return Err(Error::invalid(&format!("{prefix}.speckles"), "no speckles"));
        }
        for s in &self.speckles {
            if !(s.width > 0.0) {
                return Err(Error::invalid(
                    &format!("{prefix}.speckles"),
                    "speckle width must be positive",
                ));
            }
            if !(s.amplitude.is_finite() && s.center.is_finite() && s.phase.is_finite()) {
                return Err(Error::invalid(&format!("{prefix}.speckles"), "non-finite entry"));
            }
        }
        Ok(())
    }

    /// Amplitude-weighted center of the speckles on the entrance boundary.
    pub fn center(&self) -> f64 {
        let (num, den) = self
            .speckles
            .iter()
            .fold((0.0, 0.0), |(n, d), s| (n + s.amplitude.abs() * s.center, d + s.amplitude.abs()));
        if den > 0.0 {
            num / den
        } else {
            self.speckles[0].center
        }
    }

    /// Same beam with `k_y` negated and speckles reflected about `axis`.
    pub fn mirrored(&self, axis: f64) -> BeamSpec {
        BeamSpec {
            kx: self.kx,
            ky: -self.ky,
            epsilon: self.epsilon,
            speckles: self
                .speckles
                .iter()
                .map(|s| Speckle {
                    center: 2.0 * axis - s.center,
                    ..*s
                })
                .collect(),
        }
    }
}

/// Real coefficient sampled over the grid, or a constant.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarField {
    Uniform(f64),
    /// Row-major samples: one row of `n_y` values per station `0..=n_x`.
    Sampled { n_y: usize, values: Arc<[f64]> },
}

impl ScalarField {
    pub fn sampled(n_y: usize, values: Vec<f64>) -> Self {
        ScalarField::Sampled {
            n_y,
            values: values.into(),
        }
    }

    /// Value at station `n`, cell `j`. Stations past the sampled range reuse
    /// the last row.
    #[inline]
    pub fn at(&self, n: usize, j: usize) -> f64 {
        match self {
            ScalarField::Uniform(v) => *v,
            ScalarField::Sampled { n_y, values } => {
                let rows = values.len() / n_y;
                let n = n.min(rows - 1);
                values[n * n_y + j]
            }
        }
    }

    pub fn fill_row(&self, n: usize, out: &mut [f64]) {
        match self {
            ScalarField::Uniform(v) => out.fill(*v),
            ScalarField::Sampled { n_y, values } => {
                let rows = values.len() / n_y;
                let n = n.min(rows - 1);
                out.copy_from_slice(&values[n * n_y..(n + 1) * n_y]);
            }
        }
    }

    pub fn min(&self) -> f64 {
        match self {
            ScalarField::Uniform(v) => *v,
            ScalarField::Sampled { values, .. } => {
                values.iter().copied().fold(f64::INFINITY, f64::min)
            }
        }
    }

    pub fn max(&self) -> f64 {
        match self {
            ScalarField::Uniform(v) => *v,
            ScalarField::Sampled { values, .. } => {
                values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            ScalarField::Uniform(v) => v.is_finite(),
            ScalarField::Sampled { values, .. } => values.iter().all(|v| v.is_finite()),
        }
    }

    fn check_shape(&self, grid: &GridSpec, key: &str) -> Result<()> {
        if let ScalarField::Sampled { n_y, values } = self {
            if *n_y != grid.n_y || values.is_empty() || values.len() % n_y != 0 {
                return Err(Error::invalid(key, "sampled field does not match the grid"));
            }
        }
        Ok(())
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        match self {
            ScalarField::Uniform(v) => ScalarField::Uniform(f(*v)),
            ScalarField::Sampled { n_y, values } => ScalarField::Sampled {
                n_y: *n_y,
                values: values.iter().map(|&v| f(v)).collect(),
            },
        }
    }
}

/// How the refraction coefficient μ is obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum Refraction {
    Prescribed(ScalarField),
    /// `μ = exp(-α |u|²) - 1`.
    Nonlinear { alpha: f64 },
}

/// Absorption split into a constant floor handled spectrally and a
/// variable remainder handled by the transport stage.
#[derive(Debug, Clone, PartialEq)]
pub struct MediumSpec {
    pub nu0: f64,
    pub nu1: ScalarField,
    pub refraction: Refraction,
}

impl MediumSpec {
    /// Splits a total absorption field as `ν₀ = inf ν`, `ν₁ = ν - ν₀`.
    pub fn split(total: &ScalarField, refraction: Refraction) -> Result<Self> {
        let nu0 = total.min();
        if !(nu0 >= 0.0) {
            return Err(Error::invalid("medium.nu1", "absorption must be nonnegative"));
        }
        Ok(MediumSpec {
            nu0,
            nu1: total.map(|v| (v - nu0).max(0.0)),
            refraction,
        })
    }

    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        if !(self.nu0 >= 0.0 && self.nu0.is_finite()) {
            return Err(Error::invalid("medium.nu0", "must be finite and nonnegative"));
        }
        if !self.nu1.is_finite() || !(self.nu1.min() >= 0.0) {
            return Err(Error::invalid("medium.nu1", "must be finite and nonnegative"));
        }
        self.nu1.check_shape(grid, "medium.nu1")?;
        match &self.refraction {
            Refraction::Nonlinear { alpha } => {
                if !(*alpha >= 0.0 && alpha.is_finite()) {
                    return Err(Error::invalid("medium.alpha", "must be finite and nonnegative"));
                }
            }
            Refraction::Prescribed(mu) => {
                if !mu.is_finite() {
                    return Err(Error::invalid("medium.mu", "must be finite"));
                }
                mu.check_shape(grid, "medium.mu")?;
            }
        }
        Ok(())
    }
}

/// Graded damping near the lateral edges: `B_j = b β^(w-j)` inside the layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbsorbingLayerSpec {
    pub b: f64,
    pub beta: f64,
}

impl Default for AbsorbingLayerSpec {
    fn default() -> Self {
        AbsorbingLayerSpec { b: 0.1, beta: 50.0 }
    }
}

impl AbsorbingLayerSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.b >= 0.0 && self.b.is_finite()) {
            return Err(Error::invalid("layer.b", "must be finite and nonnegative"));
        }
        if !(self.beta > 1.0 && self.beta.is_finite()) {
            return Err(Error::invalid("layer.beta", "must be greater than 1"));
        }
        Ok(())
    }
}

/// Complex envelope values on one marching station.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldLine {
    pub values: Vec<Complex>,
    pub x_index: usize,
}

impl FieldLine {
    pub fn new(values: Vec<Complex>, x_index: usize) -> Self {
        FieldLine { values, x_index }
    }

    pub fn zeros(n_y: usize, x_index: usize) -> Self {
        FieldLine::new(vec![Complex::new(0.0, 0.0); n_y], x_index)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// `Σ |u_j|² δy`.
    pub fn energy(&self, delta_y: f64) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * delta_y
    }

    /// Discrete l² norm `sqrt(Σ |u_j|² δy)`.
    pub fn norm_l2(&self, delta_y: f64) -> f64 {
        self.energy(delta_y).sqrt()
    }

    /// Same line with the transverse index reversed.
    pub fn reflected(&self) -> FieldLine {
        let mut values = self.values.clone();
        values.reverse();
        FieldLine::new(values, self.x_index)
    }
}

/// Which boundary datum feeds the entrance initialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMode {
    /// Incident profile plus the exact transverse-derivative correction.
    Analytic,
    /// Boundary datum taken equal to the incident profile.
    Simplified,
}

/// Fully validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub beams: Vec<BeamSpec>,
    pub medium: MediumSpec,
    pub layer: AbsorbingLayerSpec,
    pub order: SchemeOrder,
    pub limiter: LimiterKind,
    pub boundary_mode: BoundaryMode,
    pub snapshot_stride: usize,
    pub output_dir: PathBuf,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.beams.is_empty() || self.beams.len() > 2 {
            return Err(Error::invalid("beam", "one or two beams are supported"));
        }
        for (i, beam) in self.beams.iter().enumerate() {
            beam.validate(if i == 0 { "beam" } else { "beam2" })?;
            let theta = cfl_number(&self.grid, beam);
            if theta > 1.0 + 1e-12 {
                return Err(Error::Cfl { beam: i + 1, theta });
            }
        }
        if self.beams.len() == 2 && !(self.beams[0].ky > 0.0 && self.beams[1].ky < 0.0) {
            return Err(Error::invalid(
                "beam2",
                "two-ray runs need k_y > 0 for the first beam and k_y < 0 for the second",
            ));
        }
        self.medium.validate(&self.grid)?;
        self.layer.validate()?;
        if self.snapshot_stride == 0 {
            return Err(Error::invalid("output.stride", "must be at least 1"));
        }
        Ok(())
    }

    /// Default beam center for a given transverse direction: 15% of the
    /// domain height from the edge the beam moves away from.
    pub fn default_center(grid: &GridSpec, ky: f64) -> f64 {
        let fraction = if ky < 0.0 { 0.85 } else { 0.15 };
        grid.y_origin + fraction * grid.length_y()
    }
}

/// Courant number of the transport stage, `|k_y|/k_x · δx/δy`.
pub fn cfl_number(grid: &GridSpec, beam: &BeamSpec) -> f64 {
    beam.ky.abs() / beam.kx * grid.delta_x / grid.delta_y
}

/// Incident envelope `u^in` sampled on the grid at abscissa `x`.
pub fn sample_incident_profile(beam: &BeamSpec, grid: &GridSpec, x: f64) -> FieldLine {
    let values = (0..grid.n_y)
        .map(|j| {
            let y = grid.y_at(j);
            beam.speckles
                .iter()
                .map(|s| {
                    let t = s.transverse(beam, x, y) / s.width;
                    Complex::from_polar(s.amplitude * (-t * t).exp(), s.phase)
                })
                .sum()
        })
        .collect();
    FieldLine::new(values, 0)
}

/// Largest `|u|` within `layer_width` cells of either edge, relative to the
/// peak of the line.
pub fn edge_leakage(line: &FieldLine, layer_width: usize) -> f64 {
    let n = line.len();
    let peak = line.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    let w = (layer_width + 1).min(n);
    line.values[..w]
        .iter()
        .chain(&line.values[n - w..])
        .map(|v| v.norm())
        .fold(0.0, f64::max)
        / peak
}
