//! Unit suffixes accepted in config and targets files.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Dimensionless,
    Length,
    Pressure,
    Density,
    Viscosity,
    Permittivity,
    Capacitance,
    Stiffness,
    Damping,
    Mass,
    /// Displacement per acceleration, m per m/s^2.
    Sensitivity,
    Acceleration,
    Time,
    Frequency,
}

impl Dimension {
    /// Canonical SI suffix written by the serializer.
    pub fn si_unit(&self) -> &'static str {
        match self {
            Self::Dimensionless => "",
            Self::Length => "m",
            Self::Pressure => "Pa",
            Self::Density => "kg_per_m3",
            Self::Viscosity => "Pa_s",
            Self::Permittivity => "F_per_m",
            Self::Capacitance => "F",
            Self::Stiffness => "N_per_m",
            Self::Damping => "N_s_per_m",
            Self::Mass => "kg",
            Self::Sensitivity => "m_per_ms2",
            Self::Acceleration => "m_per_s2",
            Self::Time => "s",
            Self::Frequency => "Hz",
        }
    }
}

const UNITS: &[(&str, Dimension, f64)] = &[
    ("m", Dimension::Length, 1.0),
    ("mm", Dimension::Length, 1e-3),
    ("um", Dimension::Length, 1e-6),
    ("µm", Dimension::Length, 1e-6),
    ("nm", Dimension::Length, 1e-9),
    ("Pa", Dimension::Pressure, 1.0),
    ("kPa", Dimension::Pressure, 1e3),
    ("MPa", Dimension::Pressure, 1e6),
    ("GPa", Dimension::Pressure, 1e9),
    ("kg_per_m3", Dimension::Density, 1.0),
    ("g_per_cm3", Dimension::Density, 1e3),
    ("Pa_s", Dimension::Viscosity, 1.0),
    ("F_per_m", Dimension::Permittivity, 1.0),
    ("F", Dimension::Capacitance, 1.0),
    ("pF", Dimension::Capacitance, 1e-12),
    ("fF", Dimension::Capacitance, 1e-15),
    ("N_per_m", Dimension::Stiffness, 1.0),
    ("N_s_per_m", Dimension::Damping, 1.0),
    ("kg", Dimension::Mass, 1.0),
    ("m_per_ms2", Dimension::Sensitivity, 1.0),
    ("m_per_s2", Dimension::Acceleration, 1.0),
    ("s", Dimension::Time, 1.0),
    ("ms", Dimension::Time, 1e-3),
    ("us", Dimension::Time, 1e-6),
    ("µs", Dimension::Time, 1e-6),
    ("Hz", Dimension::Frequency, 1.0),
    ("kHz", Dimension::Frequency, 1e3),
];

/// Looks up a unit suffix, returning its dimension and SI scale factor.
pub fn lookup(unit: &str) -> Option<(Dimension, f64)> {
    UNITS
        .iter()
        .find(|(name, _, _)| *name == unit)
        .map(|&(_, dim, scale)| (dim, scale))
}

/// Converts `value` given in `unit` to SI. An empty unit means the value is
/// already in the SI unit of `expected`.
pub fn to_si(value: f64, unit: &str, expected: Dimension) -> Option<f64> {
    if unit.is_empty() {
        return Some(value);
    }
    match lookup(unit) {
        Some((dim, scale)) if dim == expected => Some(value * scale),
        _ => None,
    }
}
