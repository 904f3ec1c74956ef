//! Comparison of computed quantities against a table of reference values.
//!
//! Targets files are CSV with header `quantity,value,unit,tolerance,note`.
//! `tolerance` is relative; leave it empty to list a reference value for
//! information only (it is shown but never fails the report). Lines starting
//! with `#` are comments.

use std::cell::OnceCell;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use super::config::Config;
use super::csv_out::{Cell, CsvTable};
use super::units::{self, Dimension};
use crate::device_model::{self, analytic_step_metrics, DerivedParams, ModelError};
use crate::dynamics_sim::{
    integrate, step_metrics_with, RiseTimeDefinition, SecondOrderModel, SimError, StepMetrics,
    Waveform,
};
use crate::freq_response::{bode, resonance_metrics, FreqError, ResonanceMetrics};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("line {line}: unknown quantity '{name}'")]
    UnknownQuantity { line: usize, name: String },
    #[error("line {line}: {message}")]
    BadTarget { line: usize, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Freq(#[from] FreqError),
}

impl ReportError {
    /// Problems with the targets file itself, as opposed to computation failures.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Self::UnknownQuantity { .. } | Self::BadTarget { .. } | Self::Io { .. }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    StaticCapacitance,
    Mass,
    Stiffness,
    FormulaStiffness,
    NaturalFrequency,
    DampingCoefficient,
    DampingRatio,
    Sensitivity,
    StaticDisplacement1g,
    RiseTimeAnalytic,
    SettlingTimeAnalytic,
    RiseTimeSimulated,
    SettlingTimeSimulated,
    OvershootSimulated,
    PeakFrequency,
    QualityFactor,
    MaxSafeAccelerationG,
}

impl Quantity {
    pub const ALL: [Quantity; 17] = [
        Self::StaticCapacitance,
        Self::Mass,
        Self::Stiffness,
        Self::FormulaStiffness,
        Self::NaturalFrequency,
        Self::DampingCoefficient,
        Self::DampingRatio,
        Self::Sensitivity,
        Self::StaticDisplacement1g,
        Self::RiseTimeAnalytic,
        Self::SettlingTimeAnalytic,
        Self::RiseTimeSimulated,
        Self::SettlingTimeSimulated,
        Self::OvershootSimulated,
        Self::PeakFrequency,
        Self::QualityFactor,
        Self::MaxSafeAccelerationG,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::StaticCapacitance => "static_capacitance",
            Self::Mass => "mass",
            Self::Stiffness => "stiffness",
            Self::FormulaStiffness => "formula_stiffness",
            Self::NaturalFrequency => "natural_frequency",
            Self::DampingCoefficient => "damping_coefficient",
            Self::DampingRatio => "damping_ratio",
            Self::Sensitivity => "sensitivity",
            Self::StaticDisplacement1g => "static_displacement_1g",
            Self::RiseTimeAnalytic => "rise_time_analytic",
            Self::SettlingTimeAnalytic => "settling_time_analytic",
            Self::RiseTimeSimulated => "rise_time_simulated",
            Self::SettlingTimeSimulated => "settling_time_simulated",
            Self::OvershootSimulated => "overshoot_percent_simulated",
            Self::PeakFrequency => "peak_frequency",
            Self::QualityFactor => "quality_factor",
            Self::MaxSafeAccelerationG => "max_safe_acceleration_g",
        }
    }

    pub fn dimension(&self) -> Dimension {
        match self {
            Self::StaticCapacitance => Dimension::Capacitance,
            Self::Mass => Dimension::Mass,
            Self::Stiffness | Self::FormulaStiffness => Dimension::Stiffness,
            Self::NaturalFrequency | Self::PeakFrequency => Dimension::Frequency,
            Self::DampingCoefficient => Dimension::Damping,
            Self::Sensitivity => Dimension::Sensitivity,
            Self::StaticDisplacement1g => Dimension::Length,
            Self::RiseTimeAnalytic
            | Self::SettlingTimeAnalytic
            | Self::RiseTimeSimulated
            | Self::SettlingTimeSimulated => Dimension::Time,
            Self::DampingRatio
            | Self::OvershootSimulated
            | Self::QualityFactor
            | Self::MaxSafeAccelerationG => Dimension::Dimensionless,
        }
    }
}

impl FromStr for Quantity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|q| q.name() == s)
            .ok_or_else(|| s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Target {
    pub quantity: Quantity,
    /// SI
    pub value: f64,
    /// Relative; `None` for informational rows.
    pub tolerance: Option<f64>,
    pub note: String,
}

pub fn parse_targets(text: &str) -> Result<Vec<Target>, ReportError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut targets = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| ReportError::BadTarget {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let bad = |message: String| ReportError::BadTarget { line, message };
        let field = |i: usize| record.get(i).unwrap_or("");

        let name = field(0);
        let quantity: Quantity = name
            .parse()
            .map_err(|name| ReportError::UnknownQuantity { line, name })?;
        let raw: f64 = field(1)
            .parse()
            .map_err(|_| bad(format!("value '{}' is not numeric", field(1))))?;
        let value = units::to_si(raw, field(2), quantity.dimension()).ok_or_else(|| {
            bad(format!(
                "unit '{}' does not fit {} (expected {:?})",
                field(2),
                quantity.name(),
                quantity.dimension()
            ))
        })?;
        let tolerance = match field(3) {
            "" => None,
            t => {
                let tol: f64 = t
                    .parse()
                    .map_err(|_| bad(format!("tolerance '{t}' is not numeric")))?;
                if !(tol >= 0.0) {
                    return Err(bad(format!("tolerance must be >= 0, got {tol}")));
                }
                Some(tol)
            }
        };
        targets.push(Target {
            quantity,
            value,
            tolerance,
            note: field(4).to_string(),
        });
    }
    Ok(targets)
}

pub fn load_targets(path: impl AsRef<Path>) -> Result<Vec<Target>, ReportError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| ReportError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_targets(&text)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub quantity: String,
    pub computed: f64,
    pub reference: f64,
    pub rel_error: f64,
    pub tolerance: Option<f64>,
    /// `None` for informational rows.
    pub pass: Option<bool>,
    pub note: String,
}

impl ReportRow {
    fn new(
        quantity: &str,
        computed: f64,
        reference: f64,
        tolerance: Option<f64>,
        note: String,
    ) -> Self {
        let rel_error = if reference == 0.0 {
            computed - reference
        } else {
            (computed - reference) / reference
        };
        Self {
            quantity: quantity.to_string(),
            computed,
            reference,
            rel_error,
            tolerance,
            pass: tolerance.map(|tol| rel_error.abs() <= tol),
            note,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub rows: Vec<ReportRow>,
}

impl Report {
    /// True when every toleranced row passes.
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass != Some(false))
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| r.pass == Some(false))
    }

    pub fn to_table(&self) -> CsvTable {
        let mut t = CsvTable::new([
            "quantity",
            "computed",
            "reference",
            "rel_error",
            "tolerance",
            "status",
            "note",
        ]);
        for r in &self.rows {
            t.push(vec![
                r.quantity.as_str().into(),
                r.computed.into(),
                r.reference.into(),
                r.rel_error.into(),
                r.tolerance.map_or(Cell::Text(String::new()), Cell::Float),
                status(r.pass).into(),
                r.note.as_str().into(),
            ]);
        }
        t
    }
}

pub fn status(pass: Option<bool>) -> &'static str {
    match pass {
        Some(true) => "PASS",
        Some(false) => "FAIL",
        None => "INFO",
    }
}

struct Evaluator<'a> {
    config: &'a Config,
    params: DerivedParams,
    step: OnceCell<StepMetrics>,
    resonance: OnceCell<ResonanceMetrics>,
}

impl Evaluator<'_> {
    fn model(&self) -> Result<SecondOrderModel, ReportError> {
        Ok(SecondOrderModel::from_params(&self.params)?)
    }

    fn step(&self) -> Result<&StepMetrics, ReportError> {
        if let Some(s) = self.step.get() {
            return Ok(s);
        }
        let model = self.model()?;
        let sim = &self.config.simulation;
        let accel = self.config.design.g_value;
        let traj = integrate(&model, &Waveform::step(accel)?, sim.dt, sim.duration)?;
        let metrics = step_metrics_with(
            &traj,
            accel * model.dc_gain,
            sim.settling_band,
            RiseTimeDefinition::FirstCrossing,
        )?;
        Ok(self.step.get_or_init(|| metrics))
    }

    fn resonance(&self) -> Result<&ResonanceMetrics, ReportError> {
        if let Some(r) = self.resonance.get() {
            return Ok(r);
        }
        let f = &self.config.frequency;
        let resp = bode(&self.model()?, f.f_min, f.f_max, f.points, f.spacing)?;
        let metrics = resonance_metrics(&resp)?;
        Ok(self.resonance.get_or_init(|| metrics))
    }

    fn eval(&self, q: Quantity) -> Result<f64, ReportError> {
        let p = &self.params;
        Ok(match q {
            Quantity::StaticCapacitance => p.static_capacitance,
            Quantity::Mass => p.mass,
            Quantity::Stiffness => p.stiffness,
            Quantity::FormulaStiffness => p.formula_stiffness,
            Quantity::NaturalFrequency => p.f_n,
            Quantity::DampingCoefficient => p.damping_coefficient,
            Quantity::DampingRatio => p.zeta,
            Quantity::Sensitivity => p.sensitivity,
            Quantity::StaticDisplacement1g => {
                device_model::static_displacement(p.sensitivity, self.config.design.g_value)
            }
            Quantity::RiseTimeAnalytic => analytic_step_metrics(p.omega_n, p.zeta)?.rise_time,
            Quantity::SettlingTimeAnalytic => {
                analytic_step_metrics(p.omega_n, p.zeta)?.settling_time
            }
            Quantity::RiseTimeSimulated => self.step()?.rise_time,
            Quantity::SettlingTimeSimulated => self.step()?.settling_time,
            Quantity::OvershootSimulated => self.step()?.percent_overshoot,
            Quantity::PeakFrequency => self.resonance()?.peak_frequency,
            Quantity::QualityFactor => self.resonance()?.quality_factor,
            Quantity::MaxSafeAccelerationG => {
                device_model::max_safe_acceleration(
                    p.sensitivity,
                    self.config.design.geometry.finger_gap,
                    1.0,
                ) / self.config.design.g_value
            }
        })
    }
}

/// Computes every target quantity and compares it with its reference value.
///
/// Whenever an override replaces a formula value, an informational row
/// comparing the two is appended so the substitution stays visible.
pub fn reference_report(config: &Config, targets: &[Target]) -> Result<Report, ReportError> {
    let params = config.design.derive()?;
    let eval = Evaluator {
        config,
        params: params.clone(),
        step: OnceCell::new(),
        resonance: OnceCell::new(),
    };

    let mut rows = Vec::with_capacity(targets.len() + 3);
    for t in targets {
        let computed = eval.eval(t.quantity)?;
        rows.push(ReportRow::new(
            t.quantity.name(),
            computed,
            t.value,
            t.tolerance,
            t.note.clone(),
        ));
    }

    let geom = &config.design.geometry;
    let mat = &config.design.material;
    let ov = &config.design.overrides;
    if let Some(k) = ov.stiffness {
        rows.push(ReportRow::new(
            "override_stiffness",
            params.formula_stiffness,
            k,
            None,
            format!(
                "DISCREPANCY: folded-beam formula gives {:.6} N/m but the override {} N/m is used",
                params.formula_stiffness, k
            ),
        ));
    }
    if let Some(m) = ov.mass {
        let formula = device_model::total_mass(geom, mat);
        rows.push(ReportRow::new(
            "override_mass",
            formula,
            m,
            None,
            format!("DISCREPANCY: geometry gives {formula:e} kg but the override {m:e} kg is used"),
        ));
    }
    if let Some(s) = ov.sensitivity {
        let mass = ov
            .mass
            .unwrap_or_else(|| device_model::total_mass(geom, mat));
        let formula = device_model::displacement_sensitivity(mass, params.formula_stiffness);
        rows.push(ReportRow::new(
            "override_sensitivity",
            formula,
            s,
            None,
            format!("DISCREPANCY: m/K gives {formula:e} but the override {s:e} is used"),
        ));
    }
    Ok(Report { rows })
}
