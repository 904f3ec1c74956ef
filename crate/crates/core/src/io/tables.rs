//! Column layouts for every exported table.

use super::csv_out::CsvTable;
use crate::device_model::DerivedParams;
use crate::dynamics_sim::Trajectory;
use crate::freq_response::FrequencyResponse;
use crate::sweep_engine::SweepResult;

pub fn derived_params_table(p: &DerivedParams) -> CsvTable {
    let source = |overridden: bool| if overridden { "override" } else { "formula" };
    let mut t = CsvTable::new(["quantity", "value", "unit", "source"]);
    let rows: [(&str, f64, &str, &str); 10] = [
        ("mass", p.mass, "kg", source(p.overridden.mass)),
        (
            "stiffness",
            p.stiffness,
            "N/m",
            source(p.overridden.stiffness || p.overridden.sensitivity),
        ),
        ("formula_stiffness", p.formula_stiffness, "N/m", "formula"),
        ("static_capacitance", p.static_capacitance, "F", "formula"),
        (
            "damping_coefficient",
            p.damping_coefficient,
            "N*s/m",
            "formula",
        ),
        ("omega_n", p.omega_n, "rad/s", "derived"),
        ("f_n", p.f_n, "Hz", "derived"),
        ("zeta", p.zeta, "1", "derived"),
        (
            "sensitivity",
            p.sensitivity,
            "m/(m/s^2)",
            source(p.overridden.sensitivity),
        ),
        (
            "sensitivity_times_omega_n_sq",
            p.sensitivity * p.omega_n * p.omega_n,
            "1",
            "check",
        ),
    ];
    for (name, value, unit, src) in rows {
        t.push(vec![name.into(), value.into(), unit.into(), src.into()]);
    }
    t
}

pub fn trajectory_table(traj: &Trajectory) -> CsvTable {
    let mut t = CsvTable::new(["t_s", "x_m"]);
    t.rows.reserve(traj.len());
    for (&time, &x) in traj.times.iter().zip(&traj.displacements) {
        t.push(vec![time.into(), x.into()]);
    }
    t
}

pub fn frequency_table(resp: &FrequencyResponse) -> CsvTable {
    let mut t = CsvTable::new(["f_hz", "mag_m_per_ms2", "mag_db_rel_dc", "phase_deg"]);
    let mags = resp.magnitudes();
    let db = resp.magnitudes_db_rel_dc();
    let phase = resp.phases_deg();
    for i in 0..resp.len() {
        t.push(vec![
            resp.frequencies[i].into(),
            mags[i].into(),
            db[i].into(),
            phase[i].into(),
        ]);
    }
    t
}

pub fn sweep_table(result: &SweepResult) -> CsvTable {
    let mut t = CsvTable::new([
        "param_name",
        "param_value",
        "m_kg",
        "k_n_per_m",
        "c0_f",
        "b_ns_per_m",
        "f_n_hz",
        "zeta",
        "s_d",
        "x_m",
        "collision_flag",
    ]);
    for row in &result.rows {
        let p = &row.params;
        t.push(vec![
            result.parameter.name().into(),
            row.value.into(),
            p.mass.into(),
            p.stiffness.into(),
            p.static_capacitance.into(),
            p.damping_coefficient.into(),
            p.f_n.into(),
            p.zeta.into(),
            p.sensitivity.into(),
            row.displacement.into(),
            row.collision.into(),
        ]);
    }
    t
}
