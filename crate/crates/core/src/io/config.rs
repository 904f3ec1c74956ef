//! Line-based configuration files.
//!
//! ```text
//! # comment
//! geometry.finger_gap = 5 um
//! material.youngs_modulus = 170 GPa
//! overrides.stiffness = 10 N_per_m
//! ```
//!
//! One `section.key = value [unit]` per line. A value without a unit is
//! taken in the key's SI unit. Unknown or repeated keys are errors.
//!
//! Optional keys and their defaults:
//!
//! | key                            | default                      |
//! |--------------------------------|------------------------------|
//! | geometry.proof_mass_thickness  | geometry.device_thickness    |
//! | geometry.n_fixed_fingers       | 0                            |
//! | geometry.initial_overlap       | geometry.finger_length       |
//! | geometry.pad_metal_{length,width,thickness} | absent (all three or none) |
//! | material.permittivity          | 8.854e-12 F_per_m            |
//! | material.effective_viscosity   | 18.5e-6 Pa_s                 |
//! | overrides.{stiffness,sensitivity,mass} | absent               |
//! | model.g_value                  | 9.80665 m_per_s2             |
//! | simulation.dt                  | 1e-7 s                       |
//! | simulation.duration            | 15e-3 s                      |
//! | simulation.settling_band       | 0.02                         |
//! | frequency.f_min                | 10 Hz                        |
//! | frequency.f_max                | 100e3 Hz                     |
//! | frequency.points               | 512                          |
//! | frequency.spacing              | log                          |

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use super::units::{self, Dimension};
use crate::device_model::{
    DeviceGeometry, MaterialProps, ModelError, ModelOverrides, AIR_EFFECTIVE_VISCOSITY,
    STANDARD_GRAVITY, VACUUM_PERMITTIVITY,
};
use crate::freq_response::{Spacing, DEFAULT_F_MAX, DEFAULT_F_MIN, DEFAULT_POINTS};
use crate::sweep_engine::Design;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected 'section.key = value [unit]'")]
    Malformed { line: usize },
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key '{key}' (first set on line {first})")]
    DuplicateKey {
        line: usize,
        key: String,
        first: usize,
    },
    #[error("line {line}: missing required key '{key}'")]
    MissingKey { line: usize, key: &'static str },
    #[error("line {line}: bad unit '{unit}' for '{key}' (expected {expected} or an equivalent)")]
    BadUnit {
        line: usize,
        key: String,
        unit: String,
        expected: &'static str,
    },
    #[error("line {line}: value '{value}' for '{key}' is not numeric")]
    NonNumeric {
        line: usize,
        key: String,
        value: String,
    },
    #[error("line {line}: {key}: {reason}")]
    InvariantViolation {
        line: usize,
        key: &'static str,
        reason: String,
    },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationDefaults {
    pub dt: f64,
    pub duration: f64,
    pub settling_band: f64,
}

impl Default for SimulationDefaults {
    fn default() -> Self {
        Self {
            dt: 1e-7,
            duration: 15e-3,
            settling_band: 0.02,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyDefaults {
    pub f_min: f64,
    pub f_max: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Default for FrequencyDefaults {
    fn default() -> Self {
        Self {
            f_min: DEFAULT_F_MIN,
            f_max: DEFAULT_F_MAX,
            points: DEFAULT_POINTS,
            spacing: Spacing::Log,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub design: Design,
    pub simulation: SimulationDefaults,
    pub frequency: FrequencyDefaults,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Real(Dimension),
    Count,
    Spacing,
}

struct KeySpec {
    key: &'static str,
    kind: Kind,
    required: bool,
}

const fn real(key: &'static str, dim: Dimension, required: bool) -> KeySpec {
    KeySpec {
        key,
        kind: Kind::Real(dim),
        required,
    }
}

const fn count(key: &'static str, required: bool) -> KeySpec {
    KeySpec {
        key,
        kind: Kind::Count,
        required,
    }
}

use Dimension as D;

const KEYS: &[KeySpec] = &[
    real("geometry.proof_mass_length", D::Length, true),
    real("geometry.proof_mass_width", D::Length, true),
    real("geometry.proof_mass_thickness", D::Length, false),
    count("geometry.n_proof_masses", true),
    count("geometry.n_movable_fingers", true),
    count("geometry.n_fixed_fingers", false),
    real("geometry.finger_length", D::Length, true),
    real("geometry.finger_breadth", D::Length, true),
    real("geometry.device_thickness", D::Length, true),
    real("geometry.finger_gap", D::Length, true),
    real("geometry.initial_overlap", D::Length, false),
    real("geometry.beam_length", D::Length, true),
    real("geometry.beam_width", D::Length, true),
    real("geometry.pad_metal_length", D::Length, false),
    real("geometry.pad_metal_width", D::Length, false),
    real("geometry.pad_metal_thickness", D::Length, false),
    real("material.youngs_modulus", D::Pressure, true),
    real("material.density", D::Density, true),
    real("material.permittivity", D::Permittivity, false),
    real("material.effective_viscosity", D::Viscosity, false),
    real("overrides.stiffness", D::Stiffness, false),
    real("overrides.sensitivity", D::Sensitivity, false),
    real("overrides.mass", D::Mass, false),
    real("model.g_value", D::Acceleration, false),
    real("simulation.dt", D::Time, false),
    real("simulation.duration", D::Time, false),
    real("simulation.settling_band", D::Dimensionless, false),
    real("frequency.f_min", D::Frequency, false),
    real("frequency.f_max", D::Frequency, false),
    count("frequency.points", false),
    KeySpec {
        key: "frequency.spacing",
        kind: Kind::Spacing,
        required: false,
    },
];

#[derive(Debug, Clone, Copy)]
enum Value {
    Real(f64),
    Count(u32),
    Spacing(Spacing),
}

struct Entries {
    values: HashMap<&'static str, (Value, usize)>,
    end_line: usize,
}

impl Entries {
    fn line(&self, key: &'static str) -> usize {
        self.values.get(key).map_or(self.end_line, |&(_, l)| l)
    }

    fn real(&self, key: &'static str) -> Option<f64> {
        match self.values.get(key) {
            Some((Value::Real(v), _)) => Some(*v),
            _ => None,
        }
    }

    fn count(&self, key: &'static str) -> Option<u32> {
        match self.values.get(key) {
            Some((Value::Count(v), _)) => Some(*v),
            _ => None,
        }
    }

    fn req_real(&self, key: &'static str) -> f64 {
        // presence of required keys is checked before building
        self.real(key).unwrap_or(f64::NAN)
    }

    fn violation(&self, key: &'static str, reason: impl Into<String>) -> ConfigError {
        ConfigError::InvariantViolation {
            line: self.line(key),
            key,
            reason: reason.into(),
        }
    }
}

/// Parses and validates a config, converting every quantity to SI.
pub fn parse_config(text: &str) -> Result<Config, ConfigError> {
    let mut values: HashMap<&'static str, (Value, usize)> = HashMap::new();
    let mut n_lines = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        n_lines = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, rhs) = content
            .split_once('=')
            .ok_or(ConfigError::Malformed { line })?;
        let key = key.trim();
        if !key.contains('.') {
            return Err(ConfigError::Malformed { line });
        }
        let spec = KEYS
            .iter()
            .find(|s| s.key == key)
            .ok_or_else(|| ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            })?;
        if let Some(&(_, first)) = values.get(spec.key) {
            return Err(ConfigError::DuplicateKey {
                line,
                key: key.to_string(),
                first,
            });
        }

        let mut tokens = rhs.split_whitespace();
        let value_tok = tokens.next().ok_or(ConfigError::Malformed { line })?;
        let unit_tok = tokens.next().unwrap_or("");
        if tokens.next().is_some() {
            return Err(ConfigError::Malformed { line });
        }
        let value = parse_value(spec, value_tok, unit_tok, line)?;
        values.insert(spec.key, (value, line));
    }

    let entries = Entries {
        values,
        end_line: n_lines + 1,
    };
    for spec in KEYS.iter().filter(|s| s.required) {
        if !entries.values.contains_key(spec.key) {
            return Err(ConfigError::MissingKey {
                line: entries.end_line,
                key: spec.key,
            });
        }
    }
    build(&entries)
}

fn parse_value(spec: &KeySpec, tok: &str, unit: &str, line: usize) -> Result<Value, ConfigError> {
    let non_numeric = || ConfigError::NonNumeric {
        line,
        key: spec.key.to_string(),
        value: tok.to_string(),
    };
    let bad_unit = |expected: &'static str| ConfigError::BadUnit {
        line,
        key: spec.key.to_string(),
        unit: unit.to_string(),
        expected,
    };
    match spec.kind {
        Kind::Real(dim) => {
            let v: f64 = tok.parse().map_err(|_| non_numeric())?;
            let si = units::to_si(v, unit, dim).ok_or_else(|| {
                bad_unit(if dim == D::Dimensionless {
                    "no unit"
                } else {
                    dim.si_unit()
                })
            })?;
            if !(si.is_finite() && si > 0.0) {
                return Err(ConfigError::InvariantViolation {
                    line,
                    key: spec.key,
                    reason: format!("must be finite and > 0, got {tok} {unit}"),
                });
            }
            Ok(Value::Real(si))
        }
        Kind::Count => {
            if !unit.is_empty() {
                return Err(bad_unit("no unit"));
            }
            let v: i64 = tok.parse().map_err(|_| non_numeric())?;
            let v = u32::try_from(v).map_err(|_| ConfigError::InvariantViolation {
                line,
                key: spec.key,
                reason: format!("count must be a non-negative integer, got {v}"),
            })?;
            Ok(Value::Count(v))
        }
        Kind::Spacing => {
            if !unit.is_empty() {
                return Err(bad_unit("no unit"));
            }
            tok.parse::<Spacing>().map(Value::Spacing).map_err(|e| {
                ConfigError::InvariantViolation {
                    line,
                    key: spec.key,
                    reason: e.to_string(),
                }
            })
        }
    }
}

fn build(e: &Entries) -> Result<Config, ConfigError> {
    let device_thickness = e.req_real("geometry.device_thickness");
    let finger_length = e.req_real("geometry.finger_length");

    let pad_keys = [
        "geometry.pad_metal_length",
        "geometry.pad_metal_width",
        "geometry.pad_metal_thickness",
    ];
    let pad: Vec<Option<f64>> = pad_keys.iter().map(|k| e.real(k)).collect();
    let pad_metal = match (pad[0], pad[1], pad[2]) {
        (Some(l), Some(w), Some(t)) => Some([l, w, t]),
        (None, None, None) => None,
        _ => {
            let missing = pad_keys
                .iter()
                .zip(&pad)
                .find(|(_, v)| v.is_none())
                .unwrap()
                .0;
            let present = pad_keys
                .iter()
                .zip(&pad)
                .find(|(_, v)| v.is_some())
                .unwrap()
                .0;
            return Err(e.violation(
                present,
                format!("pad metal needs all three dimensions; '{missing}' is absent"),
            ));
        }
    };

    let initial_overlap = e.real("geometry.initial_overlap");
    if let Some(x1) = initial_overlap {
        if x1 > finger_length {
            return Err(e.violation(
                "geometry.initial_overlap",
                format!("overlap {x1} m exceeds finger_length {finger_length} m"),
            ));
        }
    }

    let n_proof_masses = e.count("geometry.n_proof_masses").unwrap_or(0);
    if n_proof_masses < 1 {
        return Err(e.violation("geometry.n_proof_masses", "need at least one proof mass"));
    }
    let n_movable_fingers = e.count("geometry.n_movable_fingers").unwrap_or(0);
    if n_movable_fingers < 1 {
        return Err(e.violation(
            "geometry.n_movable_fingers",
            "need at least one movable finger",
        ));
    }

    let geometry = DeviceGeometry {
        proof_mass_length: e.req_real("geometry.proof_mass_length"),
        proof_mass_width: e.req_real("geometry.proof_mass_width"),
        proof_mass_thickness: e
            .real("geometry.proof_mass_thickness")
            .unwrap_or(device_thickness),
        n_proof_masses,
        n_movable_fingers,
        n_fixed_fingers: e.count("geometry.n_fixed_fingers").unwrap_or(0),
        finger_length,
        finger_breadth: e.req_real("geometry.finger_breadth"),
        device_thickness,
        finger_gap: e.req_real("geometry.finger_gap"),
        initial_overlap,
        beam_length: e.req_real("geometry.beam_length"),
        beam_width: e.req_real("geometry.beam_width"),
        pad_metal,
    };
    let material = MaterialProps {
        youngs_modulus: e.req_real("material.youngs_modulus"),
        density: e.req_real("material.density"),
        permittivity: e
            .real("material.permittivity")
            .unwrap_or(VACUUM_PERMITTIVITY),
        effective_viscosity: e
            .real("material.effective_viscosity")
            .unwrap_or(AIR_EFFECTIVE_VISCOSITY),
    };
    let overrides = ModelOverrides {
        stiffness: e.real("overrides.stiffness"),
        sensitivity: e.real("overrides.sensitivity"),
        mass: e.real("overrides.mass"),
    };

    let sim_defaults = SimulationDefaults::default();
    let simulation = SimulationDefaults {
        dt: e.real("simulation.dt").unwrap_or(sim_defaults.dt),
        duration: e
            .real("simulation.duration")
            .unwrap_or(sim_defaults.duration),
        settling_band: e
            .real("simulation.settling_band")
            .unwrap_or(sim_defaults.settling_band),
    };
    if simulation.settling_band >= 1.0 {
        return Err(e.violation("simulation.settling_band", "band must be below 1"));
    }
    if simulation.dt > simulation.duration {
        return Err(e.violation("simulation.dt", "time step exceeds duration"));
    }

    let freq_defaults = FrequencyDefaults::default();
    let frequency = FrequencyDefaults {
        f_min: e.real("frequency.f_min").unwrap_or(freq_defaults.f_min),
        f_max: e.real("frequency.f_max").unwrap_or(freq_defaults.f_max),
        points: e
            .count("frequency.points")
            .map_or(freq_defaults.points, |p| p as usize),
        spacing: match e.values.get("frequency.spacing") {
            Some((Value::Spacing(s), _)) => *s,
            _ => freq_defaults.spacing,
        },
    };
    if frequency.f_min >= frequency.f_max {
        return Err(e.violation("frequency.f_max", "f_max must exceed f_min"));
    }
    if frequency.points < 2 {
        return Err(e.violation("frequency.points", "need at least 2 points"));
    }

    let design = Design {
        geometry,
        material,
        overrides,
        g_value: e.real("model.g_value").unwrap_or(STANDARD_GRAVITY),
    };
    if let Err(err) = design.derive() {
        let key = match &err {
            ModelError::ConflictingOverrides { .. } => "overrides.sensitivity",
            ModelError::InvalidParameter { field, .. } => key_for_field(field),
            _ => "geometry.beam_length",
        };
        return Err(e.violation(key, err.to_string()));
    }

    Ok(Config {
        design,
        simulation,
        frequency,
    })
}

fn key_for_field(field: &str) -> &'static str {
    KEYS.iter()
        .map(|s| s.key)
        .find(|k| k.rsplit('.').next() == Some(field))
        .unwrap_or("geometry.beam_length")
}

pub fn load_config(path: impl AsRef<Path>) -> Result<Config, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|err| ConfigError::Io {
        path: path.display().to_string(),
        message: err.to_string(),
    })?;
    parse_config(&text)
}

impl Config {
    /// Serializes every field in SI units. Reparsing the output yields an
    /// identical `Config`.
    pub fn to_config_text(&self) -> String {
        let g = &self.design.geometry;
        let m = &self.design.material;
        let o = &self.design.overrides;
        let mut out = String::new();
        let mut real = |key: &str, v: f64, dim: Dimension| {
            let unit = dim.si_unit();
            if unit.is_empty() {
                writeln!(out, "{key} = {v:e}").unwrap();
            } else {
                writeln!(out, "{key} = {v:e} {unit}").unwrap();
            }
        };
        real("geometry.proof_mass_length", g.proof_mass_length, D::Length);
        real("geometry.proof_mass_width", g.proof_mass_width, D::Length);
        real(
            "geometry.proof_mass_thickness",
            g.proof_mass_thickness,
            D::Length,
        );
        real("geometry.finger_length", g.finger_length, D::Length);
        real("geometry.finger_breadth", g.finger_breadth, D::Length);
        real("geometry.device_thickness", g.device_thickness, D::Length);
        real("geometry.finger_gap", g.finger_gap, D::Length);
        if let Some(x1) = g.initial_overlap {
            real("geometry.initial_overlap", x1, D::Length);
        }
        real("geometry.beam_length", g.beam_length, D::Length);
        real("geometry.beam_width", g.beam_width, D::Length);
        if let Some([l, w, t]) = g.pad_metal {
            real("geometry.pad_metal_length", l, D::Length);
            real("geometry.pad_metal_width", w, D::Length);
            real("geometry.pad_metal_thickness", t, D::Length);
        }
        real("material.youngs_modulus", m.youngs_modulus, D::Pressure);
        real("material.density", m.density, D::Density);
        real("material.permittivity", m.permittivity, D::Permittivity);
        real(
            "material.effective_viscosity",
            m.effective_viscosity,
            D::Viscosity,
        );
        if let Some(k) = o.stiffness {
            real("overrides.stiffness", k, D::Stiffness);
        }
        if let Some(s) = o.sensitivity {
            real("overrides.sensitivity", s, D::Sensitivity);
        }
        if let Some(mass) = o.mass {
            real("overrides.mass", mass, D::Mass);
        }
        real("model.g_value", self.design.g_value, D::Acceleration);
        real("simulation.dt", self.simulation.dt, D::Time);
        real("simulation.duration", self.simulation.duration, D::Time);
        real(
            "simulation.settling_band",
            self.simulation.settling_band,
            D::Dimensionless,
        );
        real("frequency.f_min", self.frequency.f_min, D::Frequency);
        real("frequency.f_max", self.frequency.f_max, D::Frequency);

        writeln!(out, "geometry.n_proof_masses = {}", g.n_proof_masses).unwrap();
        writeln!(out, "geometry.n_movable_fingers = {}", g.n_movable_fingers).unwrap();
        writeln!(out, "geometry.n_fixed_fingers = {}", g.n_fixed_fingers).unwrap();
        writeln!(out, "frequency.points = {}", self.frequency.points).unwrap();
        writeln!(
            out,
            "frequency.spacing = {}",
            self.frequency.spacing.as_str()
        )
        .unwrap();
        out
    }
}
