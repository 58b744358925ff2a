//! Flat `key = value` run configuration.
//!
//! ```text
//! # reference case
//! grid.dx = 0.05
//! grid.dy = 0.05
//! grid.lx = 102.4
//! beam.angle_deg = 45
//! beam.epsilon = 0.05
//! medium.nu0 = 5e-4
//! medium.nu1 = 5e-4
//! medium.mode = nonlinear
//! medium.alpha = 0.05
//! ```
//!
//! Beam keys may be repeated under the `beam2.` prefix for two-ray runs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::model::{
    AbsorbingLayerSpec, BeamSpec, BoundaryMode, GridSpec, MediumSpec, Refraction, RunConfig,
    ScalarField, Speckle, DEFAULT_LAYER_WIDTH, DEFAULT_SPECKLE_WIDTH,
};
use crate::transport::{LimiterKind, SchemeOrder};

const BEAM_KEYS: &[&str] = &["angle_deg", "kx", "ky", "epsilon", "speckles", "center", "ls"];

const KEYS: &[&str] = &[
    "grid.dx",
    "grid.dy",
    "grid.lx",
    "grid.ly",
    "grid.y0",
    "medium.nu0",
    "medium.nu1",
    "medium.mode",
    "medium.alpha",
    "medium.mu",
    "layer.b",
    "layer.beta",
    "layer.width",
    "scheme.order",
    "scheme.limiter",
    "scheme.g_mode",
    "output.dir",
    "output.stride",
];

fn is_known(key: &str) -> bool {
    if KEYS.contains(&key) {
        return true;
    }
    for prefix in ["beam.", "beam2."] {
        if let Some(rest) = key.strip_prefix(prefix) {
            return BEAM_KEYS.contains(&rest);
        }
    }
    false
}

struct Document {
    entries: BTreeMap<String, String>,
}

impl Document {
    fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Syntax {
                line: line_no,
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            if !is_known(key) {
                return Err(Error::UnknownKey {
                    key: key.to_string(),
                    line: line_no,
                });
            }
            if value.is_empty() {
                return Err(Error::Syntax {
                    line: line_no,
                    msg: format!("empty value for `{key}`"),
                });
            }
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                return Err(Error::Syntax {
                    line: line_no,
                    msg: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(Document { entries })
    }

    fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn required(&self, key: &str) -> Result<&str> {
        self.raw(key).ok_or_else(|| Error::MissingKey(key.to_string()))
    }

    fn f64_opt(&self, key: &str) -> Result<Option<f64>> {
        self.raw(key).map(|v| parse_f64(key, v)).transpose()
    }

    fn f64_req(&self, key: &str) -> Result<f64> {
        parse_f64(key, self.required(key)?)
    }

    fn usize_opt(&self, key: &str) -> Result<Option<usize>> {
        self.raw(key)
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|_| Error::invalid(key, format!("expected a nonnegative integer, got `{v}`")))
            })
            .transpose()
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .parse()
        .map_err(|_| Error::invalid(key, format!("expected a number, got `{v}`")))?;
    if !x.is_finite() {
        return Err(Error::invalid(key, "must be finite"));
    }
    Ok(x)
}

fn parse_speckles(key: &str, v: &str) -> Result<Vec<Speckle>> {
    v.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|tuple| {
            let parts: Vec<&str> = tuple.split(':').map(str::trim).collect();
            if parts.len() != 4 {
                return Err(Error::invalid(
                    key,
                    format!("speckle `{tuple}` must be `amplitude:center:width:phase`"),
                ));
            }
            Ok(Speckle {
                amplitude: parse_f64(key, parts[0])?,
                center: parse_f64(key, parts[1])?,
                width: parse_f64(key, parts[2])?,
                phase: parse_f64(key, parts[3])?,
            })
        })
        .collect()
}

fn parse_beam(doc: &Document, prefix: &str, grid: &GridSpec) -> Result<BeamSpec> {
    let key = |k: &str| format!("{prefix}.{k}");
    let (kx, ky) = match doc.f64_opt(&key("angle_deg"))? {
        Some(angle) => {
            if doc.has(&key("kx")) || doc.has(&key("ky")) {
                return Err(Error::invalid(
                    &key("angle_deg"),
                    "give either the angle or kx/ky, not both",
                ));
            }
            let a = angle.to_radians();
            (a.cos(), a.sin())
        }
        None => {
            if !doc.has(&key("kx")) && !doc.has(&key("ky")) {
                return Err(Error::MissingKey(key("angle_deg")));
            }
            (doc.f64_req(&key("kx"))?, doc.f64_req(&key("ky"))?)
        }
    };
    let epsilon = doc.f64_req(&key("epsilon"))?;
    let speckles = match doc.raw(&key("speckles")) {
        Some(v) => {
            if doc.has(&key("center")) || doc.has(&key("ls")) {
                return Err(Error::invalid(
                    &key("speckles"),
                    "explicit speckles exclude `center` and `ls`",
                ));
            }
            parse_speckles(&key("speckles"), v)?
        }
        None => {
            let center = doc
                .f64_opt(&key("center"))?
                .unwrap_or_else(|| RunConfig::default_center(grid, ky));
            let width = doc.f64_opt(&key("ls"))?.unwrap_or(DEFAULT_SPECKLE_WIDTH);
            vec![Speckle {
                width,
                ..Speckle::gaussian(center)
            }]
        }
    };
    let beam = BeamSpec {
        kx,
        ky,
        epsilon,
        speckles,
    };
    beam.validate(prefix)?;
    Ok(beam)
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let doc = Document::parse(text)?;

    let dx = doc.f64_req("grid.dx")?;
    let dy = doc.f64_req("grid.dy")?;
    let lx = doc.f64_req("grid.lx")?;
    let ly = doc.f64_opt("grid.ly")?.unwrap_or(lx);
    let y0 = doc.f64_opt("grid.y0")?.unwrap_or(0.0);
    let layer_width = doc.usize_opt("layer.width")?.unwrap_or(DEFAULT_LAYER_WIDTH);
    let grid = GridSpec::new(dx, dy, lx, ly, y0, layer_width)?;

    let mut beams = vec![parse_beam(&doc, "beam", &grid)?];
    if doc.entries.keys().any(|k| k.starts_with("beam2.")) {
        beams.push(parse_beam(&doc, "beam2", &grid)?);
    }

    let nu0 = doc.f64_req("medium.nu0")?;
    let nu1 = doc.f64_req("medium.nu1")?;
    let refraction = match doc.required("medium.mode")? {
        "linear" => {
            if doc.has("medium.alpha") {
                return Err(Error::invalid("medium.alpha", "only valid in nonlinear mode"));
            }
            Refraction::Prescribed(ScalarField::Uniform(doc.f64_opt("medium.mu")?.unwrap_or(0.0)))
        }
        "nonlinear" => {
            if doc.has("medium.mu") {
                return Err(Error::invalid("medium.mu", "only valid in linear mode"));
            }
            Refraction::Nonlinear {
                alpha: doc.f64_req("medium.alpha")?,
            }
        }
        other => {
            return Err(Error::invalid(
                "medium.mode",
                format!("expected `linear` or `nonlinear`, got `{other}`"),
            ))
        }
    };
    let medium = MediumSpec {
        nu0,
        nu1: ScalarField::Uniform(nu1),
        refraction,
    };

    let layer = AbsorbingLayerSpec {
        b: doc.f64_opt("layer.b")?.unwrap_or(0.1),
        beta: doc.f64_opt("layer.beta")?.unwrap_or(50.0),
    };

    let order = match doc.raw("scheme.order").unwrap_or("1") {
        "1" => SchemeOrder::First,
        "2" => SchemeOrder::Second,
        other => {
            return Err(Error::invalid(
                "scheme.order",
                format!("expected 1 or 2, got `{other}`"),
            ))
        }
    };
    let limiter = match doc.raw("scheme.limiter") {
        Some(v) => v.parse::<LimiterKind>().map_err(|m| Error::invalid("scheme.limiter", m))?,
        None => LimiterKind::VanLeer,
    };
    let boundary_mode = match doc.raw("scheme.g_mode").unwrap_or("analytic") {
        "analytic" => BoundaryMode::Analytic,
        "simplified" => BoundaryMode::Simplified,
        other => {
            return Err(Error::invalid(
                "scheme.g_mode",
                format!("expected `analytic` or `simplified`, got `{other}`"),
            ))
        }
    };

    let config = RunConfig {
        grid,
        beams,
        medium,
        layer,
        order,
        limiter,
        boundary_mode,
        snapshot_stride: doc.usize_opt("output.stride")?.unwrap_or(1),
        output_dir: PathBuf::from(doc.raw("output.dir").unwrap_or("out")),
    };
    config.validate()?;
    Ok(config)
}

/// Serializes a configuration into a document that parses back to an
/// identical value. Sampled coefficient fields have no text form.
pub fn to_document(config: &RunConfig) -> Result<String> {
    let mut out = String::new();
    let g = &config.grid;
    // `write!` into a String cannot fail.
    let _ = writeln!(out, "grid.dx = {:?}", g.delta_x);
    let _ = writeln!(out, "grid.dy = {:?}", g.delta_y);
    let _ = writeln!(out, "grid.lx = {:?}", g.length_x());
    let _ = writeln!(out, "grid.ly = {:?}", g.length_y());
    let _ = writeln!(out, "grid.y0 = {:?}", g.y_origin);
    let _ = writeln!(out, "layer.width = {}", g.layer_width);
    for (i, beam) in config.beams.iter().enumerate() {
        let p = if i == 0 { "beam" } else { "beam2" };
        let _ = writeln!(out, "{p}.kx = {:?}", beam.kx);
        let _ = writeln!(out, "{p}.ky = {:?}", beam.ky);
        let _ = writeln!(out, "{p}.epsilon = {:?}", beam.epsilon);
        let speckles: Vec<String> = beam
            .speckles
            .iter()
            .map(|s| format!("{:?}:{:?}:{:?}:{:?}", s.amplitude, s.center, s.width, s.phase))
            .collect();
        let _ = writeln!(out, "{p}.speckles = {}", speckles.join(";"));
    }
    let _ = writeln!(out, "medium.nu0 = {:?}", config.medium.nu0);
    match &config.medium.nu1 {
        ScalarField::Uniform(v) => {
            let _ = writeln!(out, "medium.nu1 = {v:?}");
        }
        ScalarField::Sampled { .. } => {
            return Err(Error::invalid("medium.nu1", "sampled fields cannot be serialized"))
        }
    }
    match &config.medium.refraction {
        Refraction::Nonlinear { alpha } => {
            let _ = writeln!(out, "medium.mode = nonlinear");
            let _ = writeln!(out, "medium.alpha = {alpha:?}");
        }
        Refraction::Prescribed(ScalarField::Uniform(mu)) => {
            let _ = writeln!(out, "medium.mode = linear");
            let _ = writeln!(out, "medium.mu = {mu:?}");
        }
        Refraction::Prescribed(ScalarField::Sampled { .. }) => {
            return Err(Error::invalid("medium.mu", "sampled fields cannot be serialized"))
        }
    }
    let _ = writeln!(out, "layer.b = {:?}", config.layer.b);
    let _ = writeln!(out, "layer.beta = {:?}", config.layer.beta);
    let order = match config.order {
        SchemeOrder::First => 1,
        SchemeOrder::Second => 2,
    };
    let _ = writeln!(out, "scheme.order = {order}");
    let _ = writeln!(out, "scheme.limiter = {}", config.limiter);
    let mode = match config.boundary_mode {
        BoundaryMode::Analytic => "analytic",
        BoundaryMode::Simplified => "simplified",
    };
    let _ = writeln!(out, "scheme.g_mode = {mode}");
    let _ = writeln!(out, "output.dir = {}", config.output_dir.display());
    let _ = writeln!(out, "output.stride = {}", config.snapshot_stride);
    Ok(out)
}

/// Reference-case document: 45° incidence, ε = 0.05, ν₀ = ν₁ = 5e-4,
/// α = 0.05, b = 0.1, β = 50, on a `mesh`-sized square grid of side 102.4.
pub fn reference_document(mesh: f64) -> String {
    format!(
        "# reference case\n\
         grid.dx = {mesh}\n\
         grid.dy = {mesh}\n\
         grid.lx = 102.4\n\
         grid.ly = 102.4\n\
         beam.angle_deg = 45\n\
         beam.epsilon = 0.05\n\
         medium.nu0 = 5e-4\n\
         medium.nu1 = 5e-4\n\
         medium.mode = nonlinear\n\
         medium.alpha = 0.05\n\
         layer.b = 0.1\n\
         layer.beta = 50\n"
    )
}
