//! Advection, variable absorption and refraction along the characteristic
//! `k_x ∂_x + k_y ∂_y`, solved with an upwind scheme.
//!
//! The reaction term is treated with a trapezoidal average between the foot
//! of the characteristic and the new value, so the first-order update is
//!
//! ```text
//! u_j^{n+1} = [(k_x/δx - z/2) u_θj + S_j] / [k_x/δx + z/2 + B_j],   z = ν₁ + iμ
//! ```
//!
//! with `u_θj = θ u_{j-1} + (1-θ) u_j`. The second-order variant replaces the
//! upwind difference by limited fluxes driven by the energy `|u|²`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{AbsorbingLayerSpec, BeamSpec, Complex, FieldLine, GridSpec};

/// Value used for `λ` when only the denominator of the gradient ratio vanishes.
pub const SATURATED_RATIO: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LimiterKind {
    VanLeer,
    /// `clamp(λ, 0, 1)`.
    Clamped,
    Superbee,
}

impl LimiterKind {
    pub const ALL: [LimiterKind; 3] = [LimiterKind::VanLeer, LimiterKind::Clamped, LimiterKind::Superbee];
}

impl fmt::Display for LimiterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LimiterKind::VanLeer => "vanleer",
            LimiterKind::Clamped => "clamped",
            LimiterKind::Superbee => "superbee",
        })
    }
}

impl FromStr for LimiterKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "vanleer" | "van_leer" => Ok(LimiterKind::VanLeer),
            "clamped" => Ok(LimiterKind::Clamped),
            "superbee" => Ok(LimiterKind::Superbee),
            other => Err(format!("unknown limiter `{other}` (vanleer, clamped, superbee)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeOrder {
    First,
    Second,
}

/// Per-cell coefficients of one transport step, in the orientation of the
/// field line (index `j` increasing with `y`).
#[derive(Debug, Clone, PartialEq)]
pub struct StepCoefficients {
    pub theta: f64,
    pub nu1: Vec<f64>,
    pub mu: Vec<f64>,
    pub absorb: Vec<f64>,
    pub source: Option<Vec<Complex>>,
}

impl StepCoefficients {
    /// Coefficients with no absorption, refraction, damping or source.
    pub fn free(theta: f64, n_y: usize) -> Self {
        StepCoefficients {
            theta,
            nu1: vec![0.0; n_y],
            mu: vec![0.0; n_y],
            absorb: vec![0.0; n_y],
            source: None,
        }
    }

    fn validate(&self, n_y: usize) -> Result<()> {
        if !(self.theta >= 0.0) {
            return Err(Error::Invalid(format!("negative CFL number {}", self.theta)));
        }
        if self.theta > 1.0 + 1e-12 {
            return Err(Error::Cfl { beam: 1, theta: self.theta });
        }
        let lens = [self.nu1.len(), self.mu.len(), self.absorb.len()];
        if lens.iter().any(|&l| l != n_y) || self.source.as_ref().is_some_and(|s| s.len() != n_y) {
            return Err(Error::Invalid("coefficient lines do not match the field line".into()));
        }
        Ok(())
    }

    fn reflected(&self) -> StepCoefficients {
        let rev = |v: &[f64]| v.iter().rev().copied().collect::<Vec<_>>();
        StepCoefficients {
            theta: self.theta,
            nu1: rev(&self.nu1),
            mu: rev(&self.mu),
            absorb: rev(&self.absorb),
            source: self.source.as_ref().map(|s| s.iter().rev().copied().collect()),
        }
    }
}

/// Graded absorbing coefficients `B_j` over `n_y` cells.
pub fn absorbing_profile(layer: &AbsorbingLayerSpec, n_y: usize, layer_width: usize) -> Vec<f64> {
    let j_max = n_y - 1;
    (0..n_y)
        .map(|j| {
            if j <= layer_width {
                layer.b * layer.beta.powi((layer_width - j) as i32)
            } else if j_max - j <= layer_width {
                layer.b * layer.beta.powi((layer_width + j - j_max) as i32)
            } else {
                0.0
            }
        })
        .collect()
}

#[inline]
fn at(line: &[Complex], j: isize) -> Complex {
    if j < 0 || j as usize >= line.len() {
        Complex::new(0.0, 0.0)
    } else {
        line[j as usize]
    }
}

/// Value at the foot of the characteristic through cell `j`:
/// `θ u_{j-1} + (1-θ) u_j`, with a zero ghost below the first cell.
#[inline]
pub fn characteristic_value(line: &[Complex], j: usize, theta: f64) -> Complex {
    theta * at(line, j as isize - 1) + (1.0 - theta) * line[j]
}

/// [`characteristic_value`] for every cell. `upwind_below` selects the
/// direction: true for `k_y ≥ 0`, false when the upwind side is `j + 1`.
pub fn characteristic_line(line: &[Complex], theta: f64, upwind_below: bool) -> Vec<Complex> {
    let n = line.len() as isize;
    (0..n)
        .map(|j| {
            let up = if upwind_below { j - 1 } else { j + 1 };
            theta * at(line, up) + (1.0 - theta) * line[j as usize]
        })
        .collect()
}

/// Flux limiter `φ(λ)`.
#[inline]
pub fn limiter_phi(kind: LimiterKind, lambda: f64) -> f64 {
    if !(lambda > 0.0) {
        return 0.0;
    }
    match kind {
        LimiterKind::VanLeer => 2.0 * lambda / (1.0 + lambda),
        LimiterKind::Clamped => lambda.min(1.0),
        LimiterKind::Superbee => (2.0 * lambda).min(1.0).max(lambda.min(2.0)),
    }
}

/// Ratio of consecutive energy differences
/// `(|u_j|² - |u_{j-1}|²) / (|u_{j+1}|² - |u_j|²)` with zero ghosts.
pub fn gradient_ratio(line: &[Complex], j: usize) -> f64 {
    let j = j as isize;
    let e = |k: isize| at(line, k).norm_sqr();
    let num = e(j) - e(j - 1);
    let den = e(j + 1) - e(j);
    if den == 0.0 {
        if num == 0.0 {
            1.0
        } else {
            num.signum() * SATURATED_RATIO
        }
    } else {
        num / den
    }
}

/// Limited flux `F_j = u_j + ½(1-θ)(u_{j+1} - u_j) φ(λ_j)`.
pub fn limited_flux(line: &[Complex], j: usize, theta: f64, kind: LimiterKind) -> Complex {
    let u = line[j];
    if theta >= 1.0 {
        return u;
    }
    let phi = limiter_phi(kind, gradient_ratio(line, j));
    u + 0.5 * (1.0 - theta) * (at(line, j as isize + 1) - u) * phi
}

/// Refraction of the self-focusing model, `f(w) = exp(-α w²) - 1`.
#[inline]
pub fn nonlinear_mu(w: f64, alpha: f64) -> f64 {
    nonlinear_mu_sq(w * w, alpha)
}

/// [`nonlinear_mu`] from the squared amplitude.
#[inline]
pub fn nonlinear_mu_sq(w2: f64, alpha: f64) -> f64 {
    (-alpha * w2).exp_m1()
}

/// One transport step for `k_y ≥ 0` lines.
fn step_upwind_below(
    line: &[Complex],
    c: &StepCoefficients,
    kx_over_dx: f64,
    order: SchemeOrder,
    kind: LimiterKind,
) -> Vec<Complex> {
    let theta = c.theta;
    let n = line.len();
    let fluxes: Option<Vec<Complex>> = match order {
        SchemeOrder::Second if theta < 1.0 => {
            Some((0..n).map(|j| limited_flux(line, j, theta, kind)).collect())
        }
        _ => None,
    };
    (0..n)
        .map(|j| {
            let foot = characteristic_value(line, j, theta);
            let advected = match &fluxes {
                // F_{-1} vanishes: ghost value and limiter both zero.
                Some(f) => line[j] - theta * (f[j] - if j == 0 { Complex::new(0.0, 0.0) } else { f[j - 1] }),
                None => foot,
            };
            let half_z = 0.5 * Complex::new(c.nu1[j], c.mu[j]);
            let mut numer = kx_over_dx * advected - half_z * foot;
            if let Some(s) = &c.source {
                numer += s[j];
            }
            numer / (kx_over_dx + half_z + c.absorb[j])
        })
        .collect()
}

/// Advances one line through the transport stage over `grid.delta_x`.
///
/// Lines with `k_y < 0` are reflected, stepped as `k_y > 0`, and reflected
/// back, so the upwind side is always the one the beam comes from.
pub fn transport_step(
    line: &FieldLine,
    coeffs: &StepCoefficients,
    grid: &GridSpec,
    beam: &BeamSpec,
    order: SchemeOrder,
    kind: LimiterKind,
) -> Result<FieldLine> {
    coeffs.validate(line.len())?;
    let kx_over_dx = beam.kx / grid.delta_x;
    let values = if beam.ky < 0.0 {
        let mut rev = line.values.clone();
        rev.reverse();
        let mut out = step_upwind_below(&rev, &coeffs.reflected(), kx_over_dx, order, kind);
        out.reverse();
        out
    } else {
        step_upwind_below(&line.values, coeffs, kx_over_dx, order, kind)
    };
    let out = FieldLine::new(values, line.x_index + 1);
    if !out.is_finite() {
        return Err(Error::NonFinite { step: out.x_index });
    }
    Ok(out)
}
