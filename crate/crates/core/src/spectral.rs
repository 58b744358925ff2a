//! Constant-coefficient diffraction solved exactly in transverse Fourier
//! space.
//!
//! With `S(η) = sqrt(1 - 2εk_yη/k_x² + 2iνεk_y²/k_x²)` (principal branch) the
//! half-space solution is
//!
//! ```text
//! û(x, η) = 2 ĝ(η) / (1 + S(η)) · exp(R₋(iη) x)
//! ```
//!
//! and one marching step of the diffraction stage multiplies each mode by
//! `exp((R₋(iη) + iηk_y/k_x) δx)`, evaluated in a form that stays finite as
//! `k_y → 0`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::model::{
    sample_incident_profile, BeamSpec, BoundaryMode, Complex, FieldLine, GridSpec,
};

/// Discrete transverse frequencies plus cached transform plans.
///
/// Bin `m` (transform order) carries `η_m = 2π m' / (n δy)` with
/// `m' ∈ (-n/2, n/2]`. The forward transform is unnormalized, the inverse
/// carries `1/n`, so `Σ|û_m|² δy/n = Σ|u_j|² δy`.
#[derive(Clone)]
pub struct SpectralGrid {
    delta_y: f64,
    frequencies: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("n", &self.frequencies.len())
            .field("delta_y", &self.delta_y)
            .finish()
    }
}

impl SpectralGrid {
    pub fn new(n: usize, delta_y: f64) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let period = n as f64 * delta_y;
        let frequencies = (0..n)
            .map(|k| {
                let m = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
                2.0 * PI * m / period
            })
            .collect();
        SpectralGrid {
            delta_y,
            frequencies,
            forward,
            inverse,
        }
    }

    pub fn for_grid(grid: &GridSpec) -> Self {
        SpectralGrid::new(grid.n_y, grid.delta_y)
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn delta_y(&self) -> f64 {
        self.delta_y
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    /// Weight making `Σ|û_m|² · weight` equal to the l² energy `Σ|u_j|² δy`.
    pub fn parseval_weight(&self) -> f64 {
        self.delta_y / self.len() as f64
    }

    pub fn forward(&self, data: &mut [Complex]) {
        self.forward.process(data);
    }

    pub fn inverse(&self, data: &mut [Complex]) {
        self.inverse.process(data);
        let scale = 1.0 / data.len() as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    /// Multiplies mode `m` of `data` by `multipliers[m]` in place.
    pub fn filter(&self, data: &mut [Complex], multipliers: &[Complex]) {
        self.forward(data);
        for (v, m) in data.iter_mut().zip(multipliers) {
            *v *= m;
        }
        self.inverse(data);
    }

    /// Transverse derivative `∂_y` evaluated spectrally.
    pub fn derivative(&self, data: &[Complex]) -> Vec<Complex> {
        let mut out = data.to_vec();
        self.forward(&mut out);
        let n = out.len();
        for (k, (v, &eta)) in out.iter_mut().zip(&self.frequencies).enumerate() {
            // The Nyquist mode has no odd partner; drop it.
            *v = if n % 2 == 0 && k == n / 2 {
                Complex::new(0.0, 0.0)
            } else {
                *v * Complex::new(0.0, eta)
            };
        }
        self.inverse(&mut out);
        out
    }
}

/// Principal square root with `Re ≥ 0`; a negative real argument with a
/// signed-zero imaginary part maps to `+i sqrt|z|`, the limit taken from
/// the upper half-plane.
#[inline]
pub fn principal_sqrt(z: Complex) -> Complex {
    // -0.0 + 0.0 == +0.0
    Complex::new(z.re, z.im + 0.0).sqrt()
}

/// `S(η) = sqrt(1 - 2εk_yη/k_x² + 2iνεk_y²/k_x²)`.
#[inline]
pub fn symbol_root(eta: f64, nu: f64, beam: &BeamSpec) -> Complex {
    let kx2 = beam.kx * beam.kx;
    let arg = Complex::new(
        1.0 - 2.0 * beam.epsilon * beam.ky * eta / kx2,
        2.0 * nu * beam.epsilon * beam.ky * beam.ky / kx2,
    );
    principal_sqrt(arg)
}

/// Decaying root `R₋(iη)` of the factorized symbol. Undefined at `k_y = 0`,
/// where [`propagation_exponent`] must be used instead.
pub fn r_minus(eta: f64, nu0: f64, beam: &BeamSpec) -> Result<Complex> {
    if beam.ky == 0.0 {
        return Err(Error::Invalid(
            "R- is singular at k_y = 0; use propagation_exponent".into(),
        ));
    }
    let s = symbol_root(eta, nu0, beam);
    let i = Complex::i();
    let first = i * (beam.kx * eta / beam.ky);
    let second = i * (beam.kx / (beam.epsilon * beam.ky * beam.ky)) * (1.0 - s);
    Ok(first - second)
}

/// `R₋(iη) + iη k_y/k_x` in its removable-singularity form.
#[inline]
pub fn propagation_exponent(eta: f64, nu0: f64, beam: &BeamSpec) -> Complex {
    let s = symbol_root(eta, nu0, beam);
    let one_plus = 1.0 + s;
    let kx3 = beam.kx * beam.kx * beam.kx;
    let absorption = -2.0 * nu0 / (beam.kx * one_plus);
    let diffraction = Complex::new(0.0, -2.0 * eta * beam.epsilon)
        * Complex::new(eta, -nu0 * beam.ky)
        / (kx3 * one_plus * one_plus);
    absorption + diffraction
}

/// Entrance multiplier `2 / (1 + S(η))` mapping `ĝ` to `û⁰`.
#[inline]
pub fn boundary_multiplier(eta: f64, nu_in: f64, beam: &BeamSpec) -> Complex {
    2.0 / (1.0 + symbol_root(eta, nu_in, beam))
}

/// Per-mode multipliers of one diffraction step, computed once per run.
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    multipliers: Vec<Complex>,
}

impl SpectralPropagator {
    pub fn new(sgrid: &SpectralGrid, delta_x: f64, nu0: f64, beam: &BeamSpec) -> Self {
        let multipliers = sgrid
            .frequencies()
            .iter()
            .map(|&eta| (propagation_exponent(eta, nu0, beam) * delta_x).exp())
            .collect();
        SpectralPropagator { multipliers }
    }

    pub fn multipliers(&self) -> &[Complex] {
        &self.multipliers
    }

    pub fn apply(&self, sgrid: &SpectralGrid, data: &mut [Complex]) {
        sgrid.filter(data, &self.multipliers);
    }
}

/// Advances one line through the diffraction stage over `delta_x`.
pub fn spectral_stage_apply(
    line: &FieldLine,
    delta_x: f64,
    nu0: f64,
    beam: &BeamSpec,
    sgrid: &SpectralGrid,
) -> Result<FieldLine> {
    if line.len() != sgrid.len() {
        return Err(Error::Invalid(format!(
            "line has {} cells, spectral grid {}",
            line.len(),
            sgrid.len()
        )));
    }
    if !line.is_finite() {
        return Err(Error::NonFinite { step: line.x_index });
    }
    let mut values = line.values.clone();
    SpectralPropagator::new(sgrid, delta_x, nu0, beam).apply(sgrid, &mut values);
    Ok(FieldLine::new(values, line.x_index))
}

/// Boundary datum `g = u^in + iεk_y/(2k_x) (k_x∂_y - k_y∂_x) u^in` at `x = 0`.
///
/// Each Gaussian speckle depends on `Y = k_x(y - y_k) - k_y x` only, so the
/// tilted derivative reduces to `d/dY`, giving the factor
/// `1 - iεk_y Y / (k_x L_s²)`.
pub fn boundary_data_g(beam: &BeamSpec, grid: &GridSpec, mode: BoundaryMode) -> FieldLine {
    match mode {
        BoundaryMode::Simplified => sample_incident_profile(beam, grid, 0.0),
        BoundaryMode::Analytic => {
            let values = (0..grid.n_y)
                .map(|j| {
                    let y = grid.y_at(j);
                    beam.speckles
                        .iter()
                        .map(|s| {
                            let big_y = s.transverse(beam, 0.0, y);
                            let t = big_y / s.width;
                            let h = Complex::from_polar(s.amplitude * (-t * t).exp(), s.phase);
                            let correction = Complex::new(
                                1.0,
                                -beam.epsilon * beam.ky * big_y / (beam.kx * s.width * s.width),
                            );
                            h * correction
                        })
                        .sum()
                })
                .collect();
            FieldLine::new(values, 0)
        }
    }
}

/// Entrance field `u⁰` obtained by dividing `ĝ` by `(1 + S(η))/2`.
pub fn init_boundary_field(
    g: &FieldLine,
    nu_in: f64,
    beam: &BeamSpec,
    sgrid: &SpectralGrid,
) -> FieldLine {
    let multipliers: Vec<Complex> = sgrid
        .frequencies()
        .iter()
        .map(|&eta| boundary_multiplier(eta, nu_in, beam))
        .collect();
    let mut values = g.values.clone();
    sgrid.filter(&mut values, &multipliers);
    FieldLine::new(values, 0)
}

/// Exact half-space solution for constant absorption `nu` and `μ = 0`,
/// evaluated at abscissa `x`.
pub fn analytic_halfspace_solution(
    g: &FieldLine,
    x: f64,
    nu: f64,
    beam: &BeamSpec,
    sgrid: &SpectralGrid,
) -> FieldLine {
    let multipliers: Vec<Complex> = sgrid
        .frequencies()
        .iter()
        .map(|&eta| {
            let r = propagation_exponent(eta, nu, beam) - Complex::new(0.0, eta * beam.ky / beam.kx);
            boundary_multiplier(eta, nu, beam) * (r * x).exp()
        })
        .collect();
    let mut values = g.values.clone();
    sgrid.filter(&mut values, &multipliers);
    FieldLine::new(values, 0)
}
