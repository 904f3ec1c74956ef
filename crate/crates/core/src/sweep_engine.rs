//! Parameter sweeps, finger-collision checks and inverse design over the
//! analytic device model.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::device_model::{
    self, derive_all, max_safe_acceleration, DerivedParams, DeviceGeometry, MaterialProps,
    ModelError, ModelOverrides,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SweepError {
    #[error("invalid sweep range [{lo}, {hi}] with {n_points} points")]
    InvalidRange { lo: f64, hi: f64, n_points: usize },
    #[error("unknown sweep parameter '{0}'")]
    UnknownParameter(String),
    #[error("{parameter} = {value}: {source}")]
    InvalidPoint {
        parameter: SweepParameter,
        value: f64,
        source: ModelError,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("target {target} Hz is outside the achievable range [{f_lo}, {f_hi}] Hz for the given bounds")]
    NotBracketed { target: f64, f_lo: f64, f_hi: f64 },
    #[error("bisection did not converge in {0} iterations")]
    NoConvergence(usize),
    #[error("invalid {0}")]
    InvalidArgument(&'static str),
}

pub type Result<T> = std::result::Result<T, SweepError>;

/// A complete analysable design point.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub geometry: DeviceGeometry,
    pub material: MaterialProps,
    pub overrides: ModelOverrides,
    /// m/s^2 per g.
    pub g_value: f64,
}

impl Design {
    pub fn derive(&self) -> std::result::Result<DerivedParams, ModelError> {
        derive_all(&self.geometry, &self.material, &self.overrides)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepParameter {
    AccelerationG,
    BeamLength,
    BeamWidth,
    FingerCount,
    FingerLength,
    ProofMassLength,
    Gap,
}

impl SweepParameter {
    pub const ALL: [SweepParameter; 7] = [
        Self::AccelerationG,
        Self::BeamLength,
        Self::BeamWidth,
        Self::FingerCount,
        Self::FingerLength,
        Self::ProofMassLength,
        Self::Gap,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::AccelerationG => "acceleration_g",
            Self::BeamLength => "beam_length",
            Self::BeamWidth => "beam_width",
            Self::FingerCount => "finger_count",
            Self::FingerLength => "finger_length",
            Self::ProofMassLength => "proof_mass_length",
            Self::Gap => "gap",
        }
    }

    /// True for parameters measured in meters.
    pub fn is_length(&self) -> bool {
        !matches!(self, Self::AccelerationG | Self::FingerCount)
    }

    /// Returns `design` with this parameter set to `value`. Overrides that
    /// would mask the parameter's effect are dropped.
    pub fn apply(&self, design: &Design, value: f64) -> Design {
        let mut d = design.clone();
        let g = &mut d.geometry;
        match self {
            Self::AccelerationG => {}
            Self::BeamLength | Self::BeamWidth => {
                if *self == Self::BeamLength {
                    g.beam_length = value;
                } else {
                    g.beam_width = value;
                }
                d.overrides.stiffness = None;
                d.overrides.sensitivity = None;
            }
            Self::FingerCount | Self::FingerLength | Self::ProofMassLength => {
                match self {
                    Self::FingerCount => g.n_movable_fingers = value.round().max(0.0) as u32,
                    Self::FingerLength => g.finger_length = value,
                    _ => g.proof_mass_length = value,
                }
                d.overrides.mass = None;
                d.overrides.sensitivity = None;
            }
            Self::Gap => g.finger_gap = value,
        }
        d
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParameter {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| SweepError::UnknownParameter(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub lo: f64,
    pub hi: f64,
    pub n_points: usize,
    /// Acceleration [g] used for the displacement column of geometry sweeps.
    pub reference_accel_g: f64,
}

impl SweepSpec {
    pub fn new(parameter: SweepParameter, lo: f64, hi: f64, n_points: usize) -> Self {
        Self {
            parameter,
            lo,
            hi,
            n_points,
            reference_accel_g: 1.0,
        }
    }

    fn values(&self) -> Result<Vec<f64>> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi && self.n_points >= 2)
        {
            return Err(SweepError::InvalidRange {
                lo: self.lo,
                hi: self.hi,
                n_points: self.n_points,
            });
        }
        let last = (self.n_points - 1) as f64;
        Ok((0..self.n_points)
            .map(|i| {
                if i + 1 == self.n_points {
                    self.hi
                } else {
                    self.lo + (self.hi - self.lo) * i as f64 / last
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub params: DerivedParams,
    /// Static displacement [m] at the row's acceleration.
    pub displacement: f64,
    /// Finger gap at this point [m].
    pub gap: f64,
    /// Static displacement has reached the finger gap.
    pub collision: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub parameter: SweepParameter,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn first_collision(&self) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.collision)
    }
}

/// Displacement against applied acceleration in g; linear through the origin.
pub fn sweep_acceleration(design: &Design, g_lo: f64, g_hi: f64, n: usize) -> Result<SweepResult> {
    if !(g_lo >= 0.0) {
        return Err(SweepError::InvalidRange {
            lo: g_lo,
            hi: g_hi,
            n_points: n,
        });
    }
    let spec = SweepSpec::new(SweepParameter::AccelerationG, g_lo, g_hi, n);
    let params = design.derive()?;
    let d0 = design.geometry.finger_gap;
    let rows = spec
        .values()?
        .into_iter()
        .map(|g| {
            let x = device_model::static_displacement(params.sensitivity, g * design.g_value);
            SweepRow {
                value: g,
                params: params.clone(),
                displacement: x,
                gap: d0,
                collision: x >= d0,
            }
        })
        .collect();
    Ok(SweepResult {
        parameter: SweepParameter::AccelerationG,
        rows,
    })
}

/// Re-derives the full parameter set at every point of the sweep.
pub fn sweep_parameter(design: &Design, spec: &SweepSpec) -> Result<SweepResult> {
    if spec.parameter == SweepParameter::AccelerationG {
        return sweep_acceleration(design, spec.lo, spec.hi, spec.n_points);
    }
    let accel = spec.reference_accel_g * design.g_value;
    let rows = spec
        .values()?
        .into_par_iter()
        .map(|value| {
            let point = spec.parameter.apply(design, value);
            let invalid = |source| SweepError::InvalidPoint {
                parameter: spec.parameter,
                value,
                source,
            };
            point.geometry.validate().map_err(invalid)?;
            let params = point.derive().map_err(invalid)?;
            let x = device_model::static_displacement(params.sensitivity, accel);
            let gap = point.geometry.finger_gap;
            Ok(SweepRow {
                value: if spec.parameter == SweepParameter::FingerCount {
                    f64::from(point.geometry.n_movable_fingers)
                } else {
                    value
                },
                params,
                displacement: x,
                gap,
                collision: x >= gap,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        parameter: spec.parameter,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CollisionMode {
    /// x = S_d * a
    #[default]
    Static,
    /// Static displacement scaled by (1 + step overshoot).
    Dynamic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintReport {
    pub rated_g: f64,
    pub displacement: f64,
    pub gap: f64,
    pub safety_factor: f64,
    pub pass: bool,
    /// safety_factor * gap - displacement [m]; negative on failure.
    pub margin: f64,
    pub max_safe_acceleration_g: f64,
    pub mode: CollisionMode,
}

pub fn constraint_check(
    design: &Design,
    rated_g: f64,
    safety_factor: f64,
    mode: CollisionMode,
) -> Result<ConstraintReport> {
    if !(rated_g >= 0.0 && rated_g.is_finite()) {
        return Err(SweepError::InvalidArgument("rated acceleration"));
    }
    if !(safety_factor > 0.0 && safety_factor <= 1.0) {
        return Err(SweepError::InvalidArgument(
            "safety factor (must be in (0, 1])",
        ));
    }
    let params = design.derive()?;
    let excursion = match mode {
        CollisionMode::Static => 1.0,
        CollisionMode::Dynamic => {
            let zeta = params.zeta;
            if zeta < 1.0 {
                1.0 + (-std::f64::consts::PI * zeta / (1.0 - zeta * zeta).sqrt()).exp()
            } else {
                1.0
            }
        }
    };
    let d0 = design.geometry.finger_gap;
    let sensitivity = params.sensitivity * excursion;
    let displacement = sensitivity * rated_g * design.g_value;
    let limit = safety_factor * d0;
    Ok(ConstraintReport {
        rated_g,
        displacement,
        gap: d0,
        safety_factor,
        pass: displacement < limit,
        margin: limit - displacement,
        max_safe_acceleration_g: max_safe_acceleration(sensitivity, d0, safety_factor)
            / design.g_value,
        mode,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreeParameter {
    BeamLength,
    BeamWidth,
}

impl FromStr for FreeParameter {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "beam_length" => Ok(Self::BeamLength),
            "beam_width" => Ok(Self::BeamWidth),
            other => Err(SweepError::UnknownParameter(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InverseSolution {
    /// Input design with the free parameter replaced and stiffness overrides removed.
    pub design: Design,
    pub value: f64,
    pub achieved_f_n: f64,
    pub iterations: usize,
}

pub const INVERSE_REL_TOL: f64 = 1e-9;
pub const INVERSE_MAX_ITER: usize = 200;

/// Bisects a beam dimension until the folded-beam natural frequency matches
/// `target_f_n` to 1e-9 relative. The mass is held at the design's value.
pub fn solve_for_target_frequency(
    design: &Design,
    target_f_n: f64,
    free: FreeParameter,
    bounds: (f64, f64),
) -> Result<InverseSolution> {
    let (lo, hi) = bounds;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(SweepError::InvalidRange {
            lo,
            hi,
            n_points: 2,
        });
    }
    if !(target_f_n > 0.0 && target_f_n.is_finite()) {
        return Err(SweepError::InvalidArgument("target frequency"));
    }
    let mass = design.derive()?.mass;
    let sweep_param = match free {
        FreeParameter::BeamLength => SweepParameter::BeamLength,
        FreeParameter::BeamWidth => SweepParameter::BeamWidth,
    };
    let f_at = |v: f64| -> Result<f64> {
        let point = sweep_param.apply(design, v);
        let k = device_model::spring_constant(&point.geometry, &point.material);
        Ok(device_model::natural_frequency(mass, k)?.1)
    };

    let (f_lo, f_hi) = (f_at(lo)?, f_at(hi)?);
    let (e_lo, e_hi) = (f_lo - target_f_n, f_hi - target_f_n);
    if e_lo * e_hi > 0.0 {
        return Err(SweepError::NotBracketed {
            target: target_f_n,
            f_lo: f_lo.min(f_hi),
            f_hi: f_lo.max(f_hi),
        });
    }

    let finish = |value: f64, achieved_f_n: f64, iterations: usize| {
        let mut d = sweep_param.apply(design, value);
        d.overrides.mass = Some(mass);
        InverseSolution {
            design: d,
            value,
            achieved_f_n,
            iterations,
        }
    };

    let converged = |f: f64| ((f - target_f_n) / target_f_n).abs() < INVERSE_REL_TOL;
    if converged(f_lo) {
        return Ok(finish(lo, f_lo, 0));
    }
    if converged(f_hi) {
        return Ok(finish(hi, f_hi, 0));
    }

    let (mut a, mut b, mut e_a) = (lo, hi, e_lo);
    for iter in 1..=INVERSE_MAX_ITER {
        let mid = 0.5 * (a + b);
        let f_mid = f_at(mid)?;
        if converged(f_mid) {
            return Ok(finish(mid, f_mid, iter));
        }
        let e_mid = f_mid - target_f_n;
        if e_a * e_mid <= 0.0 {
            b = mid;
        } else {
            a = mid;
            e_a = e_mid;
        }
    }
    Err(SweepError::NoConvergence(INVERSE_MAX_ITER))
}
