//! Closed-form analytic model of a single-axis comb-drive accelerometer.
//!
//! Geometry and material inputs go in, lumped spring-mass-damper parameters
//! come out. Everything is SI: meters, kilograms, seconds, farads.
//!
//! ```text
//! m   = rho * (n_pm * V_pm + N_f * l_f * b_f * t)
//! K   = E * t * W^3 / (4 * L^3)                  folded beam
//! C0  = eps * N_f * l_f * t / d0
//! b   = N_f * n_eff * l_f * (t / d0)^3           squeeze film
//! w_n = sqrt(K / m),  zeta = b / (2 m w_n),  S_d = m / K
//! ```

use std::f64::consts::PI;

use thiserror::Error;

/// Vacuum permittivity used for the air gap [F/m].
pub const VACUUM_PERMITTIVITY: f64 = 8.854e-12;
/// Standard gravity [m/s^2].
pub const STANDARD_GRAVITY: f64 = 9.80665;
/// Effective viscosity of air for squeeze-film damping [Pa s].
pub const AIR_EFFECTIVE_VISCOSITY: f64 = 18.5e-6;
/// Young's modulus of silicon [Pa].
pub const SILICON_YOUNGS_MODULUS: f64 = 170e9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid {field}: {value} ({reason})")]
    InvalidParameter {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("displacement {displacement} m exceeds finger overlap {overlap} m")]
    DisplacementExceedsOverlap { displacement: f64, overlap: f64 },
    #[error("mass and stiffness must be positive (m = {mass}, k = {stiffness})")]
    NonPositiveMassOrStiffness { mass: f64, stiffness: f64 },
    #[error(
        "system is not underdamped (zeta = {zeta}); closed-form step metrics need 0 < zeta < 1"
    )]
    NotUnderdamped { zeta: f64 },
    #[error("stiffness override {stiffness} N/m conflicts with sensitivity override {sensitivity} (implies {implied} N/m)")]
    ConflictingOverrides {
        stiffness: f64,
        sensitivity: f64,
        implied: f64,
    },
}

pub type Result<T> = std::result::Result<T, ModelError>;

/// Layout dimensions of the sensing element.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceGeometry {
    /// Per proof mass.
    pub proof_mass_length: f64,
    pub proof_mass_width: f64,
    pub proof_mass_thickness: f64,
    pub n_proof_masses: u32,
    /// N_f, used by every capacitance, damping and mass formula.
    pub n_movable_fingers: u32,
    /// Stored for reference only.
    pub n_fixed_fingers: u32,
    pub finger_length: f64,
    pub finger_breadth: f64,
    pub device_thickness: f64,
    pub finger_gap: f64,
    /// Rest overlap between fixed and moving fingers. `None` means full overlap (`finger_length`).
    pub initial_overlap: Option<f64>,
    pub beam_length: f64,
    pub beam_width: f64,
    /// Pad metal (length, width, thickness). Not used by any formula.
    pub pad_metal: Option<[f64; 3]>,
}

impl DeviceGeometry {
    /// Effective rest overlap x1.
    pub fn overlap(&self) -> f64 {
        self.initial_overlap.unwrap_or(self.finger_length)
    }

    pub fn proof_mass_volume(&self) -> f64 {
        self.proof_mass_length * self.proof_mass_width * self.proof_mass_thickness
    }

    pub fn validate(&self) -> Result<()> {
        let lengths = [
            ("proof_mass_length", self.proof_mass_length),
            ("proof_mass_width", self.proof_mass_width),
            ("proof_mass_thickness", self.proof_mass_thickness),
            ("finger_length", self.finger_length),
            ("finger_breadth", self.finger_breadth),
            ("device_thickness", self.device_thickness),
            ("finger_gap", self.finger_gap),
            ("beam_length", self.beam_length),
            ("beam_width", self.beam_width),
        ];
        for (field, value) in lengths {
            positive(field, value)?;
        }
        if let Some(x1) = self.initial_overlap {
            positive("initial_overlap", x1)?;
            if x1 > self.finger_length {
                return Err(ModelError::InvalidParameter {
                    field: "initial_overlap",
                    value: x1,
                    reason: "must not exceed finger_length",
                });
            }
        }
        if let Some(pad) = self.pad_metal {
            for v in pad {
                positive("pad_metal", v)?;
            }
        }
        if self.n_movable_fingers < 1 {
            return Err(ModelError::InvalidParameter {
                field: "n_movable_fingers",
                value: 0.0,
                reason: "need at least one finger",
            });
        }
        if self.n_proof_masses < 1 {
            return Err(ModelError::InvalidParameter {
                field: "n_proof_masses",
                value: 0.0,
                reason: "need at least one proof mass",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialProps {
    /// Pa
    pub youngs_modulus: f64,
    /// kg/m^3
    pub density: f64,
    /// F/m
    pub permittivity: f64,
    /// Pa s
    pub effective_viscosity: f64,
}

impl MaterialProps {
    pub fn validate(&self) -> Result<()> {
        positive("youngs_modulus", self.youngs_modulus)?;
        positive("density", self.density)?;
        positive("permittivity", self.permittivity)?;
        positive("effective_viscosity", self.effective_viscosity)
    }
}

/// Audited replacements for computed lumped parameters.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModelOverrides {
    /// N/m
    pub stiffness: Option<f64>,
    /// m per m/s^2
    pub sensitivity: Option<f64>,
    /// kg
    pub mass: Option<f64>,
}

impl ModelOverrides {
    pub fn is_empty(&self) -> bool {
        self.stiffness.is_none() && self.sensitivity.is_none() && self.mass.is_none()
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(k) = self.stiffness {
            positive("stiffness_override", k)?;
        }
        if let Some(s) = self.sensitivity {
            positive("sensitivity_override", s)?;
        }
        if let Some(m) = self.mass {
            positive("mass_override", m)?;
        }
        Ok(())
    }
}

/// Which derived fields came from an override instead of a formula.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OverrideFlags {
    pub mass: bool,
    pub stiffness: bool,
    pub sensitivity: bool,
}

impl OverrideFlags {
    pub fn any(&self) -> bool {
        self.mass || self.stiffness || self.sensitivity
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivedParams {
    pub mass: f64,
    /// Stiffness used by the dynamics (override if present).
    pub stiffness: f64,
    /// Folded-beam formula stiffness, kept even when overridden.
    pub formula_stiffness: f64,
    pub static_capacitance: f64,
    pub damping_coefficient: f64,
    pub omega_n: f64,
    pub f_n: f64,
    pub zeta: f64,
    /// m per m/s^2
    pub sensitivity: f64,
    pub overridden: OverrideFlags,
}

fn positive(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            field,
            value,
            reason: "must be finite and > 0",
        })
    }
}

/// Proof masses plus movable fingers.
pub fn total_mass(geom: &DeviceGeometry, mat: &MaterialProps) -> f64 {
    let fingers = f64::from(geom.n_movable_fingers)
        * geom.finger_length
        * geom.finger_breadth
        * geom.device_thickness;
    mat.density * (f64::from(geom.n_proof_masses) * geom.proof_mass_volume() + fingers)
}

/// Folded-beam suspension stiffness.
pub fn spring_constant(geom: &DeviceGeometry, mat: &MaterialProps) -> f64 {
    mat.youngs_modulus * geom.device_thickness * geom.beam_width.powi(3)
        / (4.0 * geom.beam_length.powi(3))
}

pub fn static_capacitance(geom: &DeviceGeometry, mat: &MaterialProps) -> f64 {
    mat.permittivity
        * f64::from(geom.n_movable_fingers)
        * geom.finger_length
        * geom.device_thickness
        / geom.finger_gap
}

/// Left/right capacitances `(C1, C2)` for a proof-mass displacement `x`.
pub fn differential_capacitance(
    geom: &DeviceGeometry,
    mat: &MaterialProps,
    x: f64,
) -> Result<(f64, f64)> {
    let x1 = geom.overlap();
    if !(x.abs() <= x1) {
        return Err(ModelError::DisplacementExceedsOverlap {
            displacement: x,
            overlap: x1,
        });
    }
    let per_length = mat.permittivity * f64::from(geom.n_movable_fingers) * geom.device_thickness
        / geom.finger_gap;
    Ok((per_length * (x1 + x), per_length * (x1 - x)))
}

/// Squeeze-film damping coefficient of the finger array.
pub fn damping_coefficient(geom: &DeviceGeometry, mat: &MaterialProps) -> f64 {
    f64::from(geom.n_movable_fingers)
        * mat.effective_viscosity
        * geom.finger_length
        * (geom.device_thickness / geom.finger_gap).powi(3)
}

/// Returns `(omega_n [rad/s], f_n [Hz])`.
pub fn natural_frequency(mass: f64, stiffness: f64) -> Result<(f64, f64)> {
    if !(mass > 0.0 && stiffness > 0.0) {
        return Err(ModelError::NonPositiveMassOrStiffness { mass, stiffness });
    }
    let omega_n = (stiffness / mass).sqrt();
    Ok((omega_n, omega_n / (2.0 * PI)))
}

pub fn damping_ratio(damping: f64, mass: f64, omega_n: f64) -> f64 {
    damping / (2.0 * mass * omega_n)
}

/// Static displacement per unit acceleration, m/K.
pub fn displacement_sensitivity(mass: f64, stiffness: f64) -> f64 {
    mass / stiffness
}

pub fn static_displacement(sensitivity: f64, accel: f64) -> f64 {
    sensitivity * accel
}

/// Analytic underdamped step metrics: 0-100 % rise time and 4/(zeta w_n) settling time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticStepMetrics {
    pub rise_time: f64,
    pub settling_time: f64,
}

pub fn analytic_step_metrics(omega_n: f64, zeta: f64) -> Result<AnalyticStepMetrics> {
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(ModelError::NotUnderdamped { zeta });
    }
    let root = (1.0 - zeta * zeta).sqrt();
    let rise_time = (PI - (root / zeta).atan()) / (omega_n * root);
    let settling_time = 4.0 / (zeta * omega_n);
    Ok(AnalyticStepMetrics {
        rise_time,
        settling_time,
    })
}

/// Acceleration [m/s^2] at which the static displacement reaches
/// `safety_factor` times the finger gap.
pub fn max_safe_acceleration(sensitivity: f64, finger_gap: f64, safety_factor: f64) -> f64 {
    safety_factor * finger_gap / sensitivity
}

/// Runs the full analytic chain.
///
/// Overrides are applied before dependent quantities are computed. A
/// sensitivity override fixes the effective stiffness to `m / S_d`, so the
/// identity `S_d * w_n^2 = 1` holds for every output.
pub fn derive_all(
    geom: &DeviceGeometry,
    mat: &MaterialProps,
    overrides: &ModelOverrides,
) -> Result<DerivedParams> {
    overrides.validate()?;
    let mut flags = OverrideFlags::default();

    let mass = match overrides.mass {
        Some(m) => {
            flags.mass = true;
            m
        }
        None => total_mass(geom, mat),
    };
    let formula_stiffness = spring_constant(geom, mat);

    let stiffness = match (overrides.stiffness, overrides.sensitivity) {
        (stiffness, Some(sd)) => {
            let implied = mass / sd;
            if let Some(k) = stiffness {
                if ((k - implied) / implied).abs() > 1e-9 {
                    return Err(ModelError::ConflictingOverrides {
                        stiffness: k,
                        sensitivity: sd,
                        implied,
                    });
                }
                flags.stiffness = true;
            }
            flags.sensitivity = true;
            implied
        }
        (Some(k), None) => {
            flags.stiffness = true;
            k
        }
        (None, None) => formula_stiffness,
    };

    let (omega_n, f_n) = natural_frequency(mass, stiffness)?;
    let damping = damping_coefficient(geom, mat);
    let sensitivity = overrides
        .sensitivity
        .unwrap_or_else(|| displacement_sensitivity(mass, stiffness));

    Ok(DerivedParams {
        mass,
        stiffness,
        formula_stiffness,
        static_capacitance: static_capacitance(geom, mat),
        damping_coefficient: damping,
        omega_n,
        f_n,
        zeta: damping_ratio(damping, mass, omega_n),
        sensitivity,
        overridden: flags,
    })
}

/// Dimensions of the shipped reference device, 250 um finger length variant.
pub fn reference_geometry() -> DeviceGeometry {
    DeviceGeometry {
        proof_mass_length: 225e-6,
        proof_mass_width: 1000e-6,
        proof_mass_thickness: 25e-6,
        n_proof_masses: 2,
        n_movable_fingers: 66,
        n_fixed_fingers: 68,
        finger_length: 250e-6,
        finger_breadth: 10e-6,
        device_thickness: 25e-6,
        finger_gap: 5e-6,
        initial_overlap: None,
        beam_length: 250e-6,
        beam_width: 10e-6,
        pad_metal: Some([100e-6, 1000e-6, 25e-6]),
    }
}

pub fn silicon_in_air() -> MaterialProps {
    MaterialProps {
        youngs_modulus: SILICON_YOUNGS_MODULUS,
        density: 2300.0,
        permittivity: VACUUM_PERMITTIVITY,
        effective_viscosity: AIR_EFFECTIVE_VISCOSITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn geom() -> DeviceGeometry {
        reference_geometry()
    }

    fn mat() -> MaterialProps {
        silicon_in_air()
    }

    #[test]
    fn mass_of_reference_device() {
        assert_relative_eq!(
            total_mass(&geom(), &mat()),
            3.53625e-8,
            max_relative = 1e-12
        );
    }

    #[test]
    fn mass_of_empty_and_single_mass_device() {
        let mut g = geom();
        g.n_movable_fingers = 0;
        g.n_proof_masses = 0;
        assert_eq!(total_mass(&g, &mat()), 0.0);
        g.n_proof_masses = 1;
        assert_relative_eq!(total_mass(&g, &mat()), 1.29375e-8, max_relative = 1e-12);
    }

    #[test]
    fn folded_beam_stiffness() {
        let g = geom();
        assert_relative_eq!(spring_constant(&g, &mat()), 68.0, max_relative = 1e-12);
        let mut wide = g.clone();
        wide.beam_width *= 2.0;
        assert_relative_eq!(spring_constant(&wide, &mat()), 544.0, max_relative = 1e-12);
        let mut long = g;
        long.beam_length *= 2.0;
        assert_relative_eq!(spring_constant(&long, &mat()), 8.5, max_relative = 1e-12);
    }

    #[test]
    fn static_capacitance_values() {
        let mut g = geom();
        assert_relative_eq!(
            static_capacitance(&g, &mat()),
            7.30455e-13,
            max_relative = 1e-12
        );
        g.finger_length = 245e-6;
        assert_relative_eq!(
            static_capacitance(&g, &mat()),
            7.158459e-13,
            max_relative = 1e-12
        );
        g.n_movable_fingers = 0;
        assert_eq!(static_capacitance(&g, &mat()), 0.0);
    }

    #[test]
    fn differential_capacitance_balance_and_limits() {
        let g = geom();
        let (c1, c2) = differential_capacitance(&g, &mat(), 0.0).unwrap();
        assert_eq!(c1, c2);

        let (c1, c2) = differential_capacitance(&g, &mat(), 3.53625e-8).unwrap();
        assert_relative_eq!(c1 - c2, 2.066457195e-16, max_relative = 1e-6);

        let (_, c2) = differential_capacitance(&g, &mat(), g.overlap()).unwrap();
        assert_eq!(c2, 0.0);

        let err = differential_capacitance(&g, &mat(), 1.01 * g.overlap()).unwrap_err();
        assert!(matches!(err, ModelError::DisplacementExceedsOverlap { .. }));
        assert!(differential_capacitance(&g, &mat(), f64::NAN).is_err());
    }

    #[test]
    fn squeeze_film_damping() {
        let mut g = geom();
        assert_relative_eq!(
            damping_coefficient(&g, &mat()),
            3.815625e-5,
            max_relative = 1e-12
        );
        g.finger_length = 245e-6;
        assert_relative_eq!(
            damping_coefficient(&g, &mat()),
            3.7393125e-5,
            max_relative = 1e-12
        );
        g.device_thickness = g.finger_gap;
        assert_relative_eq!(
            damping_coefficient(&g, &mat()),
            66.0 * AIR_EFFECTIVE_VISCOSITY * 245e-6,
            max_relative = 1e-12
        );
    }

    #[test]
    fn natural_frequency_values() {
        let (w, f) = natural_frequency(3.53625e-8, 10.0).unwrap();
        assert_relative_eq!(w, 16816.2254, max_relative = 1e-8);
        assert_relative_eq!(f, 2676.3854, max_relative = 1e-7);
        assert_eq!(natural_frequency(1.0, 4.0).unwrap().0, 2.0);
        let (_, f68) = natural_frequency(3.53625e-8, 68.0).unwrap();
        assert_relative_eq!(f68, 6979.16, max_relative = 1e-5);
        assert!(natural_frequency(0.0, 1.0).is_err());
        assert!(natural_frequency(1.0, -1.0).is_err());
    }

    #[test]
    fn damping_ratio_values() {
        let z = damping_ratio(3.815625e-5, 3.53625e-8, 16816.2254);
        assert_relative_eq!(z, 0.03208, max_relative = 1e-3);
        assert_eq!(damping_ratio(0.0, 1.0, 3.0), 0.0);
        assert_relative_eq!(damping_ratio(2.0 * 0.7 * 3.0, 0.7, 3.0), 1.0);
    }

    #[test]
    fn sensitivity_and_displacement() {
        let sd = displacement_sensitivity(3.53625e-8, 10.0);
        assert_relative_eq!(sd, 3.53625e-9, max_relative = 1e-12);
        assert_eq!(static_displacement(sd, 0.0), 0.0);
        assert_relative_eq!(
            static_displacement(sd, 10.0),
            3.53625e-8,
            max_relative = 1e-12
        );
    }

    #[test]
    fn analytic_metrics() {
        let m = analytic_step_metrics(16816.2254, 0.03208).unwrap();
        assert_relative_eq!(m.rise_time, 95.37e-6, max_relative = 1e-3);
        assert_relative_eq!(m.settling_time, 7.414e-3, max_relative = 1e-3);
        assert_eq!(analytic_step_metrics(1.0, 0.5).unwrap().settling_time, 8.0);
        assert!(analytic_step_metrics(1.0, 1.0).is_err());
        assert!(analytic_step_metrics(1.0, 0.0).is_err());
        assert!(analytic_step_metrics(1.0, -0.2).is_err());
    }

    #[test]
    fn collision_acceleration() {
        let a = max_safe_acceleration(5e-9, 5e-6, 1.0);
        assert_relative_eq!(a, 1000.0, max_relative = 1e-12);
        assert_relative_eq!(a / STANDARD_GRAVITY, 101.97, max_relative = 1e-4);
        let a = max_safe_acceleration(3.53625e-9, 5e-6, 1.0);
        assert_relative_eq!(a, 1413.927, max_relative = 1e-6);
        assert_eq!(max_safe_acceleration(3.53625e-9, 0.0, 1.0), 0.0);
    }

    #[test]
    fn derive_all_with_stiffness_override_matches_reference_table() {
        let ov = ModelOverrides {
            stiffness: Some(10.0),
            ..Default::default()
        };
        let p = derive_all(&geom(), &mat(), &ov).unwrap();
        assert_relative_eq!(p.static_capacitance, 0.730455e-12, max_relative = 1e-9);
        assert_relative_eq!(p.mass, 3.53625e-8, max_relative = 1e-9);
        assert_eq!(p.stiffness, 10.0);
        assert_relative_eq!(p.formula_stiffness, 68.0, max_relative = 1e-12);
        assert_relative_eq!(p.damping_coefficient, 3.815625e-5, max_relative = 1e-9);
        assert_relative_eq!(p.zeta, 0.03208, max_relative = 1e-3);
        assert_relative_eq!(p.sensitivity, 3.53625e-9, max_relative = 1e-9);
        assert!(p.overridden.stiffness && !p.overridden.mass && !p.overridden.sensitivity);
    }

    #[test]
    fn derive_all_without_overrides_uses_beam_formula() {
        let mut g = geom();
        g.finger_length = 245e-6;
        let p = derive_all(&g, &mat(), &ModelOverrides::default()).unwrap();
        assert_relative_eq!(p.stiffness, 68.0, max_relative = 1e-12);
        // lighter fingers than the 250 um variant, so slightly above 6.98 kHz
        assert_relative_eq!(p.f_n, 6.98e3, max_relative = 5e-3);
        assert!(!p.overridden.any());
    }

    #[test]
    fn mass_override_equal_to_computed_is_idempotent() {
        let base = derive_all(&geom(), &mat(), &ModelOverrides::default()).unwrap();
        let ov = ModelOverrides {
            mass: Some(base.mass),
            ..Default::default()
        };
        let p = derive_all(&geom(), &mat(), &ov).unwrap();
        assert_eq!(p.stiffness, base.stiffness);
        assert_eq!(p.omega_n, base.omega_n);
        assert_eq!(p.zeta, base.zeta);
        assert_eq!(p.sensitivity, base.sensitivity);
        assert!(p.overridden.mass);
    }

    #[test]
    fn sensitivity_override_sets_effective_stiffness() {
        let ov = ModelOverrides {
            sensitivity: Some(5e-9),
            ..Default::default()
        };
        let p = derive_all(&geom(), &mat(), &ov).unwrap();
        assert_eq!(p.sensitivity, 5e-9);
        assert_relative_eq!(
            p.sensitivity * p.omega_n * p.omega_n,
            1.0,
            max_relative = 1e-12
        );

        let conflicting = ModelOverrides {
            sensitivity: Some(5e-9),
            stiffness: Some(10.0),
            mass: None,
        };
        assert!(matches!(
            derive_all(&geom(), &mat(), &conflicting),
            Err(ModelError::ConflictingOverrides { .. })
        ));
    }

    #[test]
    fn geometry_validation() {
        let mut g = geom();
        assert!(g.validate().is_ok());
        g.initial_overlap = Some(300e-6);
        assert!(g.validate().is_err());
        g.initial_overlap = None;
        g.finger_gap = -5e-6;
        assert!(g.validate().is_err());
        let mut g = geom();
        g.n_movable_fingers = 0;
        assert!(g.validate().is_err());
    }
}
