use super::{Result, SimError, Trajectory};

/// Default settling band, ±2 % of the final value.
pub const DEFAULT_SETTLING_BAND: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RiseTimeDefinition {
    /// First time the response reaches the final value.
    #[default]
    FirstCrossing,
    /// Time from 10 % to 90 % of the final value.
    TenToNinety,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepMetrics {
    pub rise_time: f64,
    pub settling_time: f64,
    pub percent_overshoot: f64,
    pub peak_time: f64,
    pub final_value: f64,
}

/// Rise time (0-100 %), ±2 % settling time, overshoot and peak time.
pub fn step_metrics(traj: &Trajectory, final_value: f64) -> Result<StepMetrics> {
    step_metrics_with(
        traj,
        final_value,
        DEFAULT_SETTLING_BAND,
        RiseTimeDefinition::FirstCrossing,
    )
}

/// Crossing times are linearly interpolated between samples.
pub fn step_metrics_with(
    traj: &Trajectory,
    final_value: f64,
    band: f64,
    rise: RiseTimeDefinition,
) -> Result<StepMetrics> {
    if traj.len() < 2 || final_value == 0.0 || !final_value.is_finite() {
        return Err(SimError::NeverRises);
    }
    let t = &traj.times;
    // normalized response, 1.0 = final value
    let y: Vec<f64> = traj.displacements.iter().map(|x| x / final_value).collect();

    let rise_time = match rise {
        RiseTimeDefinition::FirstCrossing => {
            first_crossing(t, &y, 1.0).ok_or(SimError::NeverRises)?
        }
        RiseTimeDefinition::TenToNinety => {
            let lo = first_crossing(t, &y, 0.1).ok_or(SimError::NeverRises)?;
            let hi = first_crossing(t, &y, 0.9).ok_or(SimError::NeverRises)?;
            hi - lo
        }
    };

    let outside = |v: f64| (v - 1.0).abs() > band;
    let settling_time = match y.iter().rposition(|&v| outside(v)) {
        None => 0.0,
        Some(i) if i + 1 == y.len() => return Err(SimError::NeverSettles { band }),
        Some(i) => {
            // error magnitude falls from > band to <= band between i and i+1
            let e0 = (y[i] - 1.0).abs();
            let e1 = (y[i + 1] - 1.0).abs();
            let frac = if e0 == e1 {
                1.0
            } else {
                (e0 - band) / (e0 - e1)
            };
            t[i] + frac.clamp(0.0, 1.0) * (t[i + 1] - t[i])
        }
    };

    let (peak_idx, peak) =
        y.iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, v)| {
                if v > best.1 {
                    (i, v)
                } else {
                    best
                }
            });

    Ok(StepMetrics {
        rise_time,
        settling_time,
        percent_overshoot: ((peak - 1.0) * 100.0).max(0.0),
        peak_time: t[peak_idx],
        final_value,
    })
}

fn first_crossing(t: &[f64], y: &[f64], level: f64) -> Option<f64> {
    let i = y.iter().position(|&v| v >= level)?;
    if i == 0 {
        return Some(t[0]);
    }
    let (y0, y1) = (y[i - 1], y[i]);
    Some(t[i - 1] + (level - y0) / (y1 - y0) * (t[i] - t[i - 1]))
}

#[cfg(test)]
mod tests {
    use super::super::{integrate, SecondOrderModel, Waveform};
    use super::*;

    fn reference() -> SecondOrderModel {
        let omega_n = (10.0f64 / 3.53625e-8).sqrt();
        SecondOrderModel::new(omega_n, 0.032082205, 3.53625e-9).unwrap()
    }

    fn step(model: &SecondOrderModel, duration: f64) -> Trajectory {
        integrate(model, &Waveform::step(10.0).unwrap(), 1e-7, duration).unwrap()
    }

    #[test]
    fn reference_step_metrics() {
        let m = reference();
        let traj = step(&m, 15e-3);
        let sm = step_metrics(&traj, 10.0 * m.dc_gain).unwrap();
        assert!(
            sm.rise_time > 95.2e-6 && sm.rise_time < 95.4e-6,
            "{}",
            sm.rise_time
        );
        assert!(
            (sm.settling_time / 7.261e-3 - 1.0).abs() < 0.02,
            "{}",
            sm.settling_time
        );
        assert!(sm.rise_time <= sm.peak_time);
        assert!((sm.percent_overshoot - 90.41).abs() < 0.05);
    }

    #[test]
    fn half_damped_overshoot() {
        let m = reference().with_zeta(0.5).unwrap();
        let traj = step(&m, 2e-3);
        let sm = step_metrics(&traj, 10.0 * m.dc_gain).unwrap();
        assert!(
            (sm.percent_overshoot - 16.303).abs() < 0.01,
            "{}",
            sm.percent_overshoot
        );
    }

    #[test]
    fn ten_ninety_rise_time_is_shorter() {
        let m = reference();
        let traj = step(&m, 15e-3);
        let sm = step_metrics_with(
            &traj,
            10.0 * m.dc_gain,
            0.02,
            RiseTimeDefinition::TenToNinety,
        )
        .unwrap();
        assert!(
            sm.rise_time > 55e-6 && sm.rise_time < 65e-6,
            "{}",
            sm.rise_time
        );
    }

    #[test]
    fn short_trajectory_never_settles() {
        let m = reference();
        let traj = step(&m, 3e-3);
        assert!(matches!(
            step_metrics(&traj, 10.0 * m.dc_gain),
            Err(SimError::NeverSettles { .. })
        ));
    }

    #[test]
    fn zero_final_value_rejected() {
        let m = reference();
        let traj = step(&m, 1e-4);
        assert!(step_metrics(&traj, 0.0).is_err());
    }
}
