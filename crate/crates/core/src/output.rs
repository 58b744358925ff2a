//! CSV and PGM artifacts for a finished march.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::march::MarchState;
use crate::metrics::RunMetrics;

pub const METRICS_FILE: &str = "metrics.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const INTENSITY_CSV: &str = "intensity.csv";
pub const INTENSITY_PGM: &str = "intensity.pgm";

/// Paths written by [`emit_outputs`].
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFiles {
    pub metrics: PathBuf,
    pub summary: PathBuf,
    pub intensity_csv: PathBuf,
    pub intensity_pgm: PathBuf,
}

/// Writes the per-step metrics, the run summary and the recorded intensity
/// planes into `out_dir`, creating it if needed.
pub fn emit_outputs(state: &MarchState, metrics: &RunMetrics, out_dir: &Path) -> Result<OutputFiles> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let files = OutputFiles {
        metrics: out_dir.join(METRICS_FILE),
        summary: out_dir.join(SUMMARY_FILE),
        intensity_csv: out_dir.join(INTENSITY_CSV),
        intensity_pgm: out_dir.join(INTENSITY_PGM),
    };
    write(&files.metrics, metrics_csv(state, metrics).as_bytes())?;
    write(&files.summary, summary_csv(metrics).as_bytes())?;
    write(&files.intensity_csv, intensity_csv(state).as_bytes())?;
    write(&files.intensity_pgm, &intensity_pgm(state))?;
    Ok(files)
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn metrics_csv(state: &MarchState, metrics: &RunMetrics) -> String {
    let mut out = String::from("n,x,energy,max_intensity\n");
    for (n, e) in metrics.energy_per_step.iter().enumerate() {
        let max = state.station_max.get(n).map_or(0.0, |m| m.value);
        let _ = writeln!(out, "{n},{},{e},{max}", state.grid.x_at(n));
    }
    out
}

pub fn summary_csv(metrics: &RunMetrics) -> String {
    let (n, j) = metrics.max_index;
    let (x, y) = metrics.max_location;
    let mut out = String::from("key,value\n");
    let _ = writeln!(out, "max_energy,{}", metrics.max_energy);
    let _ = writeln!(out, "max_station,{n}");
    let _ = writeln!(out, "max_cell,{j}");
    let _ = writeln!(out, "max_x,{x}");
    let _ = writeln!(out, "max_y,{y}");
    let _ = writeln!(out, "focusing_distance,{}", metrics.focusing_distance);
    let _ = writeln!(out, "total_energy,{}", metrics.total_energy);
    out
}

/// Row-major `|u|²`, one row per recorded station. The first comment line
/// holds `nx ny dx dy`, the second the station index of every row.
pub fn intensity_csv(state: &MarchState) -> String {
    let s = &state.snapshots;
    let g = &state.grid;
    let mut out = format!("# {} {} {} {}\n# stations", s.len(), s.n_y, g.delta_x, g.delta_y);
    for n in &s.stations {
        let _ = write!(out, " {n}");
    }
    out.push('\n');
    for k in 0..s.len() {
        let row = s.row(k);
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    out
}

/// Intensity planes read back from [`intensity_csv`] text.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityPlanes {
    pub n_y: usize,
    pub delta_x: f64,
    pub delta_y: f64,
    pub stations: Vec<usize>,
    pub values: Vec<f32>,
}

fn parse_error(path: &Path, msg: &str) -> Error {
    Error::io(path, std::io::Error::new(std::io::ErrorKind::InvalidData, msg.to_string()))
}

pub fn read_intensity_csv(path: &Path) -> Result<IntensityPlanes> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .and_then(|l| l.strip_prefix('#'))
        .ok_or_else(|| parse_error(path, "missing header"))?
        .split_whitespace()
        .collect();
    if header.len() != 4 {
        return Err(parse_error(path, "header must hold nx ny dx dy"));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|_| parse_error(path, "bad header value"));
    let rows = num(header[0])? as usize;
    let n_y = num(header[1])? as usize;
    let stations = lines
        .next()
        .and_then(|l| l.strip_prefix("# stations"))
        .ok_or_else(|| parse_error(path, "missing station line"))?
        .split_whitespace()
        .map(|s| s.parse().map_err(|_| parse_error(path, "bad station index")))
        .collect::<Result<Vec<usize>>>()?;
    let mut values = Vec::with_capacity(rows * n_y);
    for line in lines {
        for v in line.split(',') {
            values.push(v.parse::<f32>().map_err(|_| parse_error(path, "bad intensity value"))?);
        }
    }
    if values.len() != rows * n_y || stations.len() != rows {
        return Err(parse_error(path, "row count does not match header"));
    }
    Ok(IntensityPlanes {
        n_y,
        delta_x: num(header[2])?,
        delta_y: num(header[3])?,
        stations,
        values,
    })
}

/// Binary grayscale image with `x` to the right and `y` upwards, scaled
/// linearly from 0 to the largest recorded intensity.
pub fn intensity_pgm(state: &MarchState) -> Vec<u8> {
    let s = &state.snapshots;
    let (width, height) = (s.len(), s.n_y);
    let max = s.intensity.iter().copied().fold(0.0f32, f32::max);
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.reserve(width * height);
    for r in 0..height {
        let j = height - 1 - r;
        for k in 0..width {
            let v = s.row(k)[j];
            let level = if max > 0.0 { (v / max * 255.0).round().clamp(0.0, 255.0) } else { 0.0 };
            out.push(level as u8);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{parse_config, reference_document};
    use crate::march::Marcher;
    use crate::metrics::beam_metrics;

    fn coarse_run() -> MarchState {
        let mut cfg = parse_config(&reference_document(0.8)).unwrap();
        cfg.snapshot_stride = 3;
        Marcher::new(&cfg).unwrap().run().unwrap()
    }

    #[test]
    fn intensity_round_trips_bit_for_bit() {
        let state = coarse_run();
        let dir = tempfile::tempdir().unwrap();
        let files = emit_outputs(&state, &beam_metrics(&state), dir.path()).unwrap();
        let back = read_intensity_csv(&files.intensity_csv).unwrap();
        assert_eq!(back.n_y, state.snapshots.n_y);
        assert_eq!(back.stations, state.snapshots.stations);
        assert_eq!(back.delta_x, state.grid.delta_x);
        let same = back
            .values
            .iter()
            .zip(&state.snapshots.intensity)
            .all(|(a, b)| a.to_bits() == b.to_bits());
        assert!(same);
    }

    #[test]
    fn emission_is_deterministic() {
        let (a, b) = (coarse_run(), coarse_run());
        let (da, db) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        emit_outputs(&a, &beam_metrics(&a), da.path()).unwrap();
        emit_outputs(&b, &beam_metrics(&b), db.path()).unwrap();
        for name in [METRICS_FILE, SUMMARY_FILE, INTENSITY_CSV, INTENSITY_PGM] {
            let x = fs::read(da.path().join(name)).unwrap();
            let y = fs::read(db.path().join(name)).unwrap();
            assert_eq!(x, y, "{name}");
        }
    }

    #[test]
    fn zero_field_gives_black_image() {
        let mut state = coarse_run();
        state.snapshots.intensity.iter_mut().for_each(|v| *v = 0.0);
        let pgm = intensity_pgm(&state);
        let header = format!("P5\n{} {}\n255\n", state.snapshots.len(), state.snapshots.n_y);
        assert!(pgm.starts_with(header.as_bytes()));
        assert!(pgm[header.len()..].iter().all(|&p| p == 0));
        assert!(intensity_csv(&state).lines().skip(2).all(|l| l.split(',').all(|v| v == "0")));
    }

    #[test]
    fn brightest_pixel_sits_at_the_focus() {
        let mut cfg = parse_config(&reference_document(0.4)).unwrap();
        cfg.snapshot_stride = 1;
        let state = Marcher::new(&cfg).unwrap().run().unwrap();
        let m = beam_metrics(&state);
        let pgm = intensity_pgm(&state);
        let (w, h) = (state.snapshots.len(), state.snapshots.n_y);
        let pixels = &pgm[pgm.len() - w * h..];
        let bright: Vec<usize> = (0..pixels.len()).filter(|&i| pixels[i] == 255).collect();
        let (n, j) = m.max_index;
        assert!(bright.contains(&((h - 1 - j) * w + n)));
    }

    #[test]
    fn metrics_file_has_one_row_per_station() {
        let state = coarse_run();
        let m = beam_metrics(&state);
        let csv = metrics_csv(&state, &m);
        assert_eq!(csv.lines().count(), m.energy_per_step.len() + 1);
        let last: Vec<&str> = csv.lines().last().unwrap().split(',').collect();
        assert_eq!(last[0], (m.energy_per_step.len() - 1).to_string());
    }

    #[test]
    fn unwritable_directory_reports_the_path() {
        let state = coarse_run();
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, b"x").unwrap();
        let err = emit_outputs(&state, &beam_metrics(&state), &blocker.join("sub")).unwrap_err();
        assert!(err.to_string().contains("file"));
    }
}
