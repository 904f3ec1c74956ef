use super::{Result, SecondOrderModel, SimError, Waveform};

/// Uniformly sampled response, starting at t = 0 from rest.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub displacements: Vec<f64>,
    pub velocities: Option<Vec<f64>>,
    pub dt: f64,
    pub model: SecondOrderModel,
    pub waveform: Waveform,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }
}

/// Fixed-step classical Runge-Kutta solution from rest.
///
/// `dt` must resolve the natural period: `dt <= 1 / (50 f_n)`.
pub fn integrate(
    model: &SecondOrderModel,
    waveform: &Waveform,
    dt: f64,
    duration: f64,
) -> Result<Trajectory> {
    model.validate()?;
    if !(dt.is_finite() && dt > 0.0 && duration.is_finite() && duration > 0.0) {
        return Err(SimError::InvalidTimeGrid { dt, duration });
    }
    let limit = 1.0 / (50.0 * model.natural_frequency_hz());
    if dt > limit {
        return Err(SimError::StepTooLarge { dt, limit });
    }

    let steps = ((duration / dt).round() as usize).max(1);
    let w2 = model.omega_n * model.omega_n;
    let two_zeta_w = 2.0 * model.zeta * model.omega_n;
    let forcing_gain = model.dc_gain * w2;
    let accel = |t: f64, x: f64, v: f64| forcing_gain * waveform.eval(t) - two_zeta_w * v - w2 * x;

    let mut times = Vec::with_capacity(steps + 1);
    let mut xs = Vec::with_capacity(steps + 1);
    let mut vs = Vec::with_capacity(steps + 1);
    let (mut x, mut v) = (0.0f64, 0.0f64);
    times.push(0.0);
    xs.push(x);
    vs.push(v);

    let half = 0.5 * dt;
    for i in 0..steps {
        let t = i as f64 * dt;
        let k1x = v;
        let k1v = accel(t, x, v);
        let k2x = v + half * k1v;
        let k2v = accel(t + half, x + half * k1x, v + half * k1v);
        let k3x = v + half * k2v;
        let k3v = accel(t + half, x + half * k2x, v + half * k2v);
        let k4x = v + dt * k3v;
        let k4v = accel(t + dt, x + dt * k3x, v + dt * k3v);
        x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);

        let t_next = (i + 1) as f64 * dt;
        if !(x.is_finite() && v.is_finite()) {
            return Err(SimError::NonFinite { time: t_next });
        }
        times.push(t_next);
        xs.push(x);
        vs.push(v);
    }

    Ok(Trajectory {
        times,
        displacements: xs,
        velocities: Some(vs),
        dt,
        model: *model,
        waveform: waveform.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::super::closed_form_step;
    use super::*;
    use crate::freq_response::transfer_function_eval;

    fn reference() -> SecondOrderModel {
        let omega_n = (10.0f64 / 3.53625e-8).sqrt();
        SecondOrderModel::new(omega_n, 0.032082205, 3.53625e-9).unwrap()
    }

    #[test]
    fn zero_input_stays_at_rest() {
        let traj = integrate(&reference(), &Waveform::step(0.0).unwrap(), 1e-6, 1e-3).unwrap();
        assert!(traj.displacements.iter().all(|&x| x == 0.0));
        assert_eq!(traj.len(), 1001);
    }

    #[test]
    fn step_matches_closed_form() {
        let m = reference();
        let a = 9.81;
        let traj = integrate(&m, &Waveform::step(a).unwrap(), 1e-7, 10e-3).unwrap();
        let scale = a * m.dc_gain;
        let worst = traj
            .times
            .iter()
            .zip(&traj.displacements)
            .map(|(&t, &x)| (x - closed_form_step(&m, a, t).unwrap()).abs() / scale)
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "max relative deviation {worst}");
    }

    #[test]
    fn resonant_sine_reaches_resonance_amplitude() {
        let m = reference();
        let a = 2.0;
        let f = m.natural_frequency_hz();
        let traj = integrate(&m, &Waveform::sine(a, f).unwrap(), 1e-7, 30e-3).unwrap();
        let period_samples = (1.0 / f / 1e-7).ceil() as usize;
        let tail = &traj.displacements[traj.len() - 2 * period_samples..];
        let amp = tail.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));

        let expected = a * m.dc_gain / (2.0 * m.zeta * (1.0 - m.zeta * m.zeta).sqrt());
        assert!((amp / expected - 1.0).abs() < 5e-3, "{amp} vs {expected}");

        let h = transfer_function_eval(&m, m.omega_n).norm() * a;
        assert!((amp / h - 1.0).abs() < 5e-3, "{amp} vs {h}");
    }

    #[test]
    fn resolution_guard() {
        let m = reference();
        let w = Waveform::step(1.0).unwrap();
        let limit = 1.0 / (50.0 * m.natural_frequency_hz());
        assert!(matches!(
            integrate(&m, &w, limit * 1.01, 1e-3),
            Err(SimError::StepTooLarge { .. })
        ));
        assert!(integrate(&m, &w, limit, 1e-3).is_ok());
        assert!(integrate(&m, &w, 0.0, 1e-3).is_err());
        assert!(integrate(&m, &w, 1e-7, -1.0).is_err());
    }

    #[test]
    fn deterministic() {
        let m = reference();
        let w = Waveform::chirp(1.0, 100.0, 5000.0, 5e-3).unwrap();
        let a = integrate(&m, &w, 1e-6, 5e-3).unwrap();
        let b = integrate(&m, &w, 1e-6, 5e-3).unwrap();
        assert_eq!(a, b);
    }
}
