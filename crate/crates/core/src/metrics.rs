//! Focusing distance, peak intensity and error figures against a finer run.

use crate::error::{Error, Result};
use crate::march::MarchState;

/// Summary figures of one march. Intensities are the combined `Σ_p |u^p|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    /// `E^n = Σ_j |u_j^n|² δy` per station.
    pub energy_per_step: Vec<f64>,
    /// Interior maximum of `|u_j^n|²` over all stations.
    pub max_energy: f64,
    /// Station and cell of the maximum (first in `n`, then in `j`).
    pub max_index: (usize, usize),
    /// `(x, y)` of the maximum, μm.
    pub max_location: (f64, f64),
    /// Distance from the incident beam center `(0, y_c)` to the maximum.
    pub focusing_distance: f64,
    /// `ΣΣ |u|² δx δy` over interior cells.
    pub total_energy: f64,
}

/// Relative differences between a run and a reference run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonReport {
    /// `Σ ||u|² - |u_ref|²| / Σ |u_ref|²` over the compared nodes.
    pub energy_error: f64,
    pub focusing_error: f64,
    pub max_energy_error: f64,
    /// Number of grid nodes entering the energy error.
    pub nodes: usize,
}

impl ComparisonReport {
    pub fn zero() -> Self {
        ComparisonReport {
            energy_error: 0.0,
            focusing_error: 0.0,
            max_energy_error: 0.0,
            nodes: 0,
        }
    }
}

/// Extracts [`RunMetrics`] from a completed march.
pub fn beam_metrics(state: &MarchState) -> RunMetrics {
    let grid = &state.grid;
    let mut best = (0usize, state.station_max[0]);
    for (n, m) in state.station_max.iter().enumerate().skip(1) {
        if m.value > best.1.value {
            best = (n, *m);
        }
    }
    let (n, m) = best;
    let x = grid.x_at(n);
    let y = grid.y_at(m.j);
    RunMetrics {
        energy_per_step: state.energy_per_step(),
        max_energy: m.value,
        max_index: (n, m.j),
        max_location: (x, y),
        focusing_distance: x.hypot(y - state.beam_center),
        total_energy: state.interior_energy.iter().sum::<f64>() * grid.delta_x,
    }
}

fn relative(value: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        if value == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        ((value - reference) / reference).abs()
    }
}

/// Integer refinement factor `coarse / fine`, if it is a power of two.
fn refinement(coarse: f64, fine: f64) -> Option<usize> {
    let r = coarse / fine;
    let k = r.round();
    if k >= 1.0 && (r - k).abs() < 1e-9 * k && (k as usize).is_power_of_two() {
        Some(k as usize)
    } else {
        None
    }
}

fn scalar_errors(coarse: &MarchState, reference: &MarchState) -> (f64, f64) {
    let mc = beam_metrics(coarse);
    let mr = beam_metrics(reference);
    (
        relative(mc.focusing_distance, mr.focusing_distance),
        relative(mc.max_energy, mr.max_energy),
    )
}

fn check_transverse(coarse: &MarchState, reference: &MarchState) -> Result<usize> {
    let ry = refinement(coarse.grid.delta_y, reference.grid.delta_y).ok_or_else(|| {
        Error::NonNested(format!(
            "δy = {} is not a power-of-two multiple of {}",
            coarse.grid.delta_y, reference.grid.delta_y
        ))
    })?;
    if (coarse.grid.y_origin - reference.grid.y_origin).abs() > 1e-9 {
        return Err(Error::NonNested("grids have different y origins".into()));
    }
    if coarse.grid.interior().end.saturating_sub(1) * ry >= reference.grid.n_y {
        return Err(Error::NonNested("reference grid is narrower".into()));
    }
    Ok(ry)
}

/// Compares `coarse` against a reference whose grid refines it by powers of
/// two in both directions. The energy error is taken at the coarse interior
/// nodes of every coarse snapshot.
pub fn compare_to_reference(coarse: &MarchState, reference: &MarchState) -> Result<ComparisonReport> {
    let ry = check_transverse(coarse, reference)?;
    let rx = refinement(coarse.grid.delta_x, reference.grid.delta_x).ok_or_else(|| {
        Error::NonNested(format!(
            "δx = {} is not a power-of-two multiple of {}",
            coarse.grid.delta_x, reference.grid.delta_x
        ))
    })?;
    let mut diff = 0.0;
    let mut total = 0.0;
    let mut nodes = 0;
    for (k, &n) in coarse.snapshots.stations.iter().enumerate() {
        let fine = reference.snapshots.at_station(n * rx).ok_or_else(|| {
            Error::NonNested(format!("reference has no snapshot at x = {}", coarse.grid.x_at(n)))
        })?;
        let row = coarse.snapshots.row(k);
        for j in coarse.grid.interior() {
            let c = row[j] as f64;
            let r = fine[j * ry] as f64;
            diff += (c - r).abs();
            total += r;
            nodes += 1;
        }
    }
    let (focusing_error, max_energy_error) = scalar_errors(coarse, reference);
    Ok(ComparisonReport {
        energy_error: if total > 0.0 { diff / total } else { 0.0 },
        focusing_error,
        max_energy_error,
        nodes,
    })
}

/// Like [`compare_to_reference`] for runs whose stations do not coincide
/// with reference stations: the reference is interpolated linearly in `x`
/// between its snapshots. Transverse nodes must still be nested.
pub fn compare_interpolated(coarse: &MarchState, reference: &MarchState) -> Result<ComparisonReport> {
    let ry = check_transverse(coarse, reference)?;
    let rs = &reference.snapshots;
    let last_x = reference.grid.x_at(*rs.stations.last().unwrap_or(&0));
    let mut diff = 0.0;
    let mut total = 0.0;
    let mut nodes = 0;
    for (k, &n) in coarse.snapshots.stations.iter().enumerate() {
        let x = coarse.grid.x_at(n);
        if x > last_x + 1e-9 {
            break;
        }
        // Bracketing reference snapshots.
        let pos = rs
            .stations
            .partition_point(|&m| reference.grid.x_at(m) <= x + 1e-12);
        let hi = pos.min(rs.len() - 1);
        let lo = pos.saturating_sub(1);
        let (xl, xh) = (reference.grid.x_at(rs.stations[lo]), reference.grid.x_at(rs.stations[hi]));
        let t = if xh > xl { ((x - xl) / (xh - xl)).clamp(0.0, 1.0) } else { 0.0 };
        let (a, b) = (rs.row(lo), rs.row(hi));
        let row = coarse.snapshots.row(k);
        for j in coarse.grid.interior() {
            let r = (1.0 - t) * a[j * ry] as f64 + t * b[j * ry] as f64;
            diff += (row[j] as f64 - r).abs();
            total += r;
            nodes += 1;
        }
    }
    let (focusing_error, max_energy_error) = scalar_errors(coarse, reference);
    Ok(ComparisonReport {
        energy_error: if total > 0.0 { diff / total } else { 0.0 },
        focusing_error,
        max_energy_error,
        nodes,
    })
}
