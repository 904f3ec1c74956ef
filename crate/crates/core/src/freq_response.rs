//! Frequency response of the displacement-per-acceleration transfer function
//! `H(jw) = dc_gain * w_n^2 / (w_n^2 - w^2 + j 2 zeta w_n w)`.

use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use crate::dynamics_sim::SecondOrderModel;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FreqError {
    #[error("invalid frequency range: f_min = {f_min} Hz, f_max = {f_max} Hz, {n_points} points")]
    InvalidRange {
        f_min: f64,
        f_max: f64,
        n_points: usize,
    },
    #[error("response has {0} points; at least 3 are needed to locate a peak")]
    TooFewPoints(usize),
    #[error("no interior resonance peak: magnitude is largest at the lowest grid frequency")]
    NoInteriorPeak,
    #[error("unknown grid spacing '{0}' (expected log or linear)")]
    UnknownSpacing(String),
}

pub type Result<T> = std::result::Result<T, FreqError>;

pub const DEFAULT_F_MIN: f64 = 10.0;
pub const DEFAULT_F_MAX: f64 = 100e3;
pub const DEFAULT_POINTS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Spacing {
    #[default]
    Log,
    Linear,
}

impl FromStr for Spacing {
    type Err = FreqError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log" => Ok(Self::Log),
            "linear" | "lin" => Ok(Self::Linear),
            other => Err(FreqError::UnknownSpacing(other.to_string())),
        }
    }
}

impl Spacing {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Log => "log",
            Self::Linear => "linear",
        }
    }
}

pub fn transfer_function_eval(model: &SecondOrderModel, omega: f64) -> Complex64 {
    let w2 = model.omega_n * model.omega_n;
    let denom = Complex64::new(w2 - omega * omega, 2.0 * model.zeta * model.omega_n * omega);
    Complex64::new(model.dc_gain * w2, 0.0) / denom
}

/// Phase in degrees, within (-180, 0].
pub fn phase_degrees(h: Complex64) -> f64 {
    let deg = h.arg().to_degrees();
    if deg == 0.0 {
        // normalizes -0.0
        0.0
    } else if deg > 0.0 {
        deg - 360.0
    } else {
        deg
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyResponse {
    /// Hz, strictly increasing.
    pub frequencies: Vec<f64>,
    pub response: Vec<Complex64>,
    pub spacing: Spacing,
    pub model: SecondOrderModel,
}

impl FrequencyResponse {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.response.iter().map(|h| h.norm()).collect()
    }

    pub fn phases_deg(&self) -> Vec<f64> {
        self.response.iter().copied().map(phase_degrees).collect()
    }

    /// Magnitude relative to the exact DC gain, in dB.
    pub fn magnitudes_db_rel_dc(&self) -> Vec<f64> {
        let dc = self.model.dc_gain;
        self.response
            .iter()
            .map(|h| 20.0 * (h.norm() / dc).log10())
            .collect()
    }

    /// First frequency at which the phase reaches `target_deg`, linearly
    /// interpolated between grid points.
    pub fn frequency_at_phase(&self, target_deg: f64) -> Option<f64> {
        let phases = self.phases_deg();
        phases.windows(2).enumerate().find_map(|(i, w)| {
            if w[0] >= target_deg && w[1] <= target_deg {
                let frac = if w[0] == w[1] {
                    0.0
                } else {
                    (w[0] - target_deg) / (w[0] - w[1])
                };
                let (f0, f1) = (self.frequencies[i], self.frequencies[i + 1]);
                Some(f0 + frac * (f1 - f0))
            } else {
                None
            }
        })
    }
}

pub fn frequency_grid(
    f_min: f64,
    f_max: f64,
    n_points: usize,
    spacing: Spacing,
) -> Result<Vec<f64>> {
    if !(f_min.is_finite() && f_max.is_finite() && f_min > 0.0 && f_min < f_max && n_points >= 2) {
        return Err(FreqError::InvalidRange {
            f_min,
            f_max,
            n_points,
        });
    }
    let last = (n_points - 1) as f64;
    let mut grid: Vec<f64> = match spacing {
        Spacing::Log => {
            let (a, b) = (f_min.ln(), f_max.ln());
            (0..n_points)
                .map(|i| (a + (b - a) * i as f64 / last).exp())
                .collect()
        }
        Spacing::Linear => (0..n_points)
            .map(|i| f_min + (f_max - f_min) * i as f64 / last)
            .collect(),
    };
    grid[0] = f_min;
    grid[n_points - 1] = f_max;
    Ok(grid)
}

pub fn bode(
    model: &SecondOrderModel,
    f_min: f64,
    f_max: f64,
    n_points: usize,
    spacing: Spacing,
) -> Result<FrequencyResponse> {
    let frequencies = frequency_grid(f_min, f_max, n_points, spacing)?;
    let response = frequencies
        .iter()
        .map(|f| transfer_function_eval(model, 2.0 * PI * f))
        .collect();
    Ok(FrequencyResponse {
        frequencies,
        response,
        spacing,
        model: *model,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonanceMetrics {
    /// Hz
    pub peak_frequency: f64,
    pub peak_magnitude: f64,
    /// peak_magnitude / dc_magnitude
    pub quality_factor: f64,
    pub dc_magnitude: f64,
    /// Set when the largest magnitude sits on the upper grid edge; the peak
    /// is then the edge sample and not refined.
    pub boundary_peak: bool,
}

/// Locates the resonance peak with a 3-point quadratic fit of log-magnitude
/// around the largest grid sample (abscissa in log-frequency for log grids).
pub fn resonance_metrics(resp: &FrequencyResponse) -> Result<ResonanceMetrics> {
    if resp.len() < 3 {
        return Err(FreqError::TooFewPoints(resp.len()));
    }
    let mags = resp.magnitudes();
    let dc_magnitude = transfer_function_eval(&resp.model, 0.0).norm();
    let (imax, _) = mags
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &m)| {
            if m > best.1 {
                (i, m)
            } else {
                best
            }
        });

    if imax == 0 {
        return Err(FreqError::NoInteriorPeak);
    }
    if imax == mags.len() - 1 {
        return Ok(ResonanceMetrics {
            peak_frequency: resp.frequencies[imax],
            peak_magnitude: mags[imax],
            quality_factor: mags[imax] / dc_magnitude,
            dc_magnitude,
            boundary_peak: true,
        });
    }

    let coord = |f: f64| match resp.spacing {
        Spacing::Log => f.ln(),
        Spacing::Linear => f,
    };
    let xs = [
        coord(resp.frequencies[imax - 1]),
        coord(resp.frequencies[imax]),
        coord(resp.frequencies[imax + 1]),
    ];
    let ys = [mags[imax - 1].ln(), mags[imax].ln(), mags[imax + 1].ln()];
    let (x_peak, y_peak) = parabola_vertex(xs, ys).unwrap_or((xs[1], ys[1]));

    let peak_frequency = match resp.spacing {
        Spacing::Log => x_peak.exp(),
        Spacing::Linear => x_peak,
    };
    let peak_magnitude = y_peak.exp();
    Ok(ResonanceMetrics {
        peak_frequency,
        peak_magnitude,
        quality_factor: peak_magnitude / dc_magnitude,
        dc_magnitude,
        boundary_peak: false,
    })
}

/// Vertex of the parabola through three points with distinct abscissae.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Option<(f64, f64)> {
    // Newton divided differences
    let d01 = (y[1] - y[0]) / (x[1] - x[0]);
    let d12 = (y[2] - y[1]) / (x[2] - x[1]);
    let a = (d12 - d01) / (x[2] - x[0]);
    if !(a < 0.0) {
        return None;
    }
    let b = d01 - a * (x[0] + x[1]);
    let xv = -b / (2.0 * a);
    let yv = y[0] + d01 * (xv - x[0]) + a * (xv - x[0]) * (xv - x[1]);
    Some((xv, yv))
}
