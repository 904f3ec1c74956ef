use std::f64::consts::PI;
use std::str::FromStr;

use super::{Result, SimError};

/// Input acceleration a(t) in m/s^2.
#[derive(Debug, Clone, PartialEq)]
pub enum Waveform {
    /// Constant `amplitude` for t >= 0, zero before.
    Step {
        amplitude: f64,
    },
    Sine {
        amplitude: f64,
        frequency: f64,
    },
    /// Linear sweep from `f_start` to `f_end` over `sweep_time`, holding `f_end` afterwards.
    Chirp {
        amplitude: f64,
        f_start: f64,
        f_end: f64,
        sweep_time: f64,
    },
    /// Piecewise-linear table of `(t, a)`; ends are held constant.
    Samples(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveformKind {
    Step,
    Sine,
    Chirp,
    Samples,
}

impl FromStr for WaveformKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "step" => Ok(Self::Step),
            "sine" => Ok(Self::Sine),
            "chirp" => Ok(Self::Chirp),
            "samples" => Ok(Self::Samples),
            other => Err(SimError::InvalidWaveform(format!("unknown kind '{other}'"))),
        }
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(SimError::InvalidWaveform(format!("{name} = {v}")))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(SimError::InvalidWaveform(format!(
            "{name} must be > 0, got {v}"
        )))
    }
}

impl Waveform {
    pub fn step(amplitude: f64) -> Result<Self> {
        finite("amplitude", amplitude)?;
        Ok(Self::Step { amplitude })
    }

    pub fn sine(amplitude: f64, frequency: f64) -> Result<Self> {
        finite("amplitude", amplitude)?;
        positive("frequency", frequency)?;
        Ok(Self::Sine {
            amplitude,
            frequency,
        })
    }

    pub fn chirp(amplitude: f64, f_start: f64, f_end: f64, sweep_time: f64) -> Result<Self> {
        finite("amplitude", amplitude)?;
        positive("f_start", f_start)?;
        positive("f_end", f_end)?;
        positive("sweep_time", sweep_time)?;
        Ok(Self::Chirp {
            amplitude,
            f_start,
            f_end,
            sweep_time,
        })
    }

    pub fn samples(table: Vec<(f64, f64)>) -> Result<Self> {
        if table.is_empty() {
            return Err(SimError::InvalidWaveform("empty sample table".into()));
        }
        for &(t, a) in &table {
            if !t.is_finite() || !a.is_finite() {
                return Err(SimError::NonFinite { time: t });
            }
        }
        if table.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(SimError::InvalidWaveform(
                "sample times must be strictly increasing".into(),
            ));
        }
        Ok(Self::Samples(table))
    }

    pub fn kind(&self) -> WaveformKind {
        match self {
            Self::Step { .. } => WaveformKind::Step,
            Self::Sine { .. } => WaveformKind::Sine,
            Self::Chirp { .. } => WaveformKind::Chirp,
            Self::Samples(_) => WaveformKind::Samples,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Self::Step { amplitude }
            | Self::Sine { amplitude, .. }
            | Self::Chirp { amplitude, .. } => *amplitude == 0.0,
            Self::Samples(table) => table.iter().all(|&(_, a)| a == 0.0),
        }
    }

    /// a(t) in m/s^2.
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::Step { amplitude } => {
                if t >= 0.0 {
                    *amplitude
                } else {
                    0.0
                }
            }
            Self::Sine {
                amplitude,
                frequency,
            } => amplitude * (2.0 * PI * frequency * t).sin(),
            Self::Chirp {
                amplitude,
                f_start,
                f_end,
                sweep_time,
            } => {
                let rate = (f_end - f_start) / sweep_time;
                let phase = if t <= *sweep_time {
                    f_start * t + 0.5 * rate * t * t
                } else {
                    f_start * sweep_time
                        + 0.5 * rate * sweep_time * sweep_time
                        + f_end * (t - sweep_time)
                };
                amplitude * (2.0 * PI * phase).sin()
            }
            Self::Samples(table) => interpolate(table, t),
        }
    }
}

fn interpolate(table: &[(f64, f64)], t: f64) -> f64 {
    let (first, last) = (table[0], table[table.len() - 1]);
    if t <= first.0 {
        return first.1;
    }
    if t >= last.0 {
        return last.1;
    }
    // first index with time > t; guaranteed in 1..len
    let hi = table.partition_point(|&(ti, _)| ti <= t);
    let (t0, a0) = table[hi - 1];
    let (t1, a1) = table[hi];
    a0 + (a1 - a0) * (t - t0) / (t1 - t0)
}

/// Builds a waveform from a kind and a flat parameter list.
///
/// | kind    | params                                   |
/// |---------|------------------------------------------|
/// | step    | `[amplitude]`                            |
/// | sine    | `[amplitude, frequency]`                 |
/// | chirp   | `[amplitude, f_start, f_end, sweep_time]`|
/// | samples | `[t0, a0, t1, a1, ...]`                  |
pub fn make_waveform(kind: WaveformKind, params: &[f64]) -> Result<Waveform> {
    let expect = |n: usize| {
        if params.len() == n {
            Ok(())
        } else {
            Err(SimError::InvalidWaveform(format!(
                "{kind:?} takes {n} parameters, got {}",
                params.len()
            )))
        }
    };
    match kind {
        WaveformKind::Step => {
            expect(1)?;
            Waveform::step(params[0])
        }
        WaveformKind::Sine => {
            expect(2)?;
            Waveform::sine(params[0], params[1])
        }
        WaveformKind::Chirp => {
            expect(4)?;
            Waveform::chirp(params[0], params[1], params[2], params[3])
        }
        WaveformKind::Samples => {
            if !params.len().is_multiple_of(2) {
                return Err(SimError::InvalidWaveform(
                    "samples need (t, a) pairs".into(),
                ));
            }
            Waveform::samples(params.chunks(2).map(|c| (c[0], c[1])).collect())
        }
    }
}
