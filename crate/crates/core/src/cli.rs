//! Command-line front end.
//!
//! Exit codes: 0 success, 1 computation error or failed report, 2 usage or
//! configuration error.
//!
//! Human-readable summaries go to stdout. Tables are written as CSV to the
//! `--out` file; `--out -` sends the CSV to stdout and moves the summary to
//! stderr.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::device_model::{analytic_step_metrics, DerivedParams};
use crate::dynamics_sim::{
    integrate, step_metrics_with, RiseTimeDefinition, SecondOrderModel, Waveform,
};
use crate::freq_response::{bode, resonance_metrics, Spacing};
use crate::io::config::{load_config, Config};
use crate::io::csv_out::CsvTable;
use crate::io::report::{load_targets, reference_report, status};
use crate::io::tables;
use crate::io::units::{self, Dimension};
use crate::sweep_engine::{
    constraint_check, solve_for_target_frequency, sweep_parameter, CollisionMode, FreeParameter,
    SweepParameter, SweepSpec,
};

/// Environment variable overriding `model.g_value` [m/s^2 per g].
pub const G_ENV_VAR: &str = "ACCEL_SIM_G";

#[derive(Debug, Parser)]
#[command(
    name = "accelsim",
    version,
    about = "Comb-drive MEMS accelerometer analysis"
)]
struct Cli {
    /// Suppress narration (file-written notices and headers)
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Derive every lumped parameter from the config
    Analyze {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate a step in acceleration and measure rise/settling time
    Step {
        config: PathBuf,
        #[arg(long = "accel-g")]
        accel_g: f64,
        /// Replace the derived damping ratio
        #[arg(long)]
        zeta: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        duration: Option<f64>,
        /// Report 10-90 % rise time instead of 0-100 %
        #[arg(long = "rise-10-90")]
        rise_10_90: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Frequency response and resonance metrics
    Bode {
        config: PathBuf,
        #[arg(long)]
        fmin: Option<f64>,
        #[arg(long)]
        fmax: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        /// log or linear
        #[arg(long)]
        spacing: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep one parameter and re-derive the device at every point
    Sweep {
        config: PathBuf,
        #[arg(long)]
        param: String,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        #[arg(long)]
        points: usize,
        /// Unit of --lo/--hi for length parameters (default m)
        #[arg(long)]
        unit: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Finger collision check at a rated acceleration
    Check {
        config: PathBuf,
        #[arg(long = "rated-g")]
        rated_g: f64,
        #[arg(long, default_value_t = 1.0)]
        safety: f64,
        /// Include the step overshoot in the excursion
        #[arg(long)]
        dynamic: bool,
    },
    /// Solve a beam dimension for a target natural frequency
    Solve {
        config: PathBuf,
        #[arg(long = "target-hz")]
        target_hz: f64,
        /// beam_length or beam_width
        #[arg(long, default_value = "beam_length")]
        free: String,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        #[arg(long)]
        unit: Option<String>,
    },
    /// Compare computed quantities with a targets file
    Report {
        config: PathBuf,
        #[arg(long)]
        targets: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Compute(String),
    /// Report ran but at least one row failed.
    /// A check ran but its verdict was negative.
    Failed(&'static str),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Compute(_) | Self::Failed(_) => 1,
        }
    }
}

fn compute<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Compute(e.to_string())
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

/// Entry point used by the binary: real stdio and the `ACCEL_SIM_G` variable.
pub fn run_command<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let g_env = std::env::var(G_ENV_VAR).ok();
    run_with(
        args,
        g_env.as_deref(),
        &mut stdout.lock(),
        &mut stderr.lock(),
    )
}

/// Runs one command with explicit output streams and g override.
pub fn run_with<I, T>(args: I, g_env: Option<&str>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    2
                }
            };
        }
    };
    let mut ctx = Ctx {
        quiet: cli.quiet,
        g_env,
        out,
        err,
        summary_to_stderr: false,
    };
    match ctx.dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            match &e {
                CliError::Usage(msg) => {
                    let _ = writeln!(ctx.err, "error: {msg}");
                }
                CliError::Compute(msg) => {
                    let _ = writeln!(ctx.err, "computation failed: {msg}");
                }
                CliError::Failed(msg) => {
                    let _ = writeln!(ctx.err, "{msg}");
                }
            }
            e.code()
        }
    }
}

struct Ctx<'a> {
    quiet: bool,
    g_env: Option<&'a str>,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    summary_to_stderr: bool,
}

macro_rules! say {
    ($ctx:expr, $($arg:tt)*) => {{
        let stream: &mut dyn Write = if $ctx.summary_to_stderr { &mut *$ctx.err } else { &mut *$ctx.out };
        writeln!(stream, $($arg)*).map_err(compute)?;
    }};
}

impl Ctx<'_> {
    fn dispatch(&mut self, command: Command) -> Result<(), CliError> {
        match command {
            Command::Analyze { config, out } => self.analyze(&config, out.as_deref()),
            Command::Step {
                config,
                accel_g,
                zeta,
                dt,
                duration,
                rise_10_90,
                out,
            } => self.step(
                &config,
                accel_g,
                zeta,
                dt,
                duration,
                rise_10_90,
                out.as_deref(),
            ),
            Command::Bode {
                config,
                fmin,
                fmax,
                points,
                spacing,
                out,
            } => self.bode(
                &config,
                fmin,
                fmax,
                points,
                spacing.as_deref(),
                out.as_deref(),
            ),
            Command::Sweep {
                config,
                param,
                lo,
                hi,
                points,
                unit,
                out,
            } => self.sweep(
                &config,
                &param,
                lo,
                hi,
                points,
                unit.as_deref(),
                out.as_deref(),
            ),
            Command::Check {
                config,
                rated_g,
                safety,
                dynamic,
            } => self.check(&config, rated_g, safety, dynamic),
            Command::Solve {
                config,
                target_hz,
                free,
                lo,
                hi,
                unit,
            } => self.solve(&config, target_hz, &free, lo, hi, unit.as_deref()),
            Command::Report {
                config,
                targets,
                out,
            } => self.report(&config, &targets, out.as_deref()),
        }
    }

    fn load(&self, path: &Path) -> Result<Config, CliError> {
        let mut config = load_config(path).map_err(usage)?;
        if let Some(raw) = self.g_env {
            let g: f64 = raw
                .trim()
                .parse()
                .ok()
                .filter(|g: &f64| g.is_finite() && *g > 0.0)
                .ok_or_else(|| usage(format!("{G_ENV_VAR}='{raw}' is not a positive number")))?;
            config.design.g_value = g;
        }
        Ok(config)
    }

    fn emit(&mut self, table: &CsvTable, out: Option<&Path>) -> Result<(), CliError> {
        match out {
            None => Ok(()),
            Some(p) if p.as_os_str() == "-" => {
                self.summary_to_stderr = true;
                table.write_to(&mut *self.out).map_err(compute)
            }
            Some(p) => {
                crate::io::write_csv(table, p).map_err(compute)?;
                if !self.quiet {
                    say!(self, "wrote {} rows to {}", table.rows.len(), p.display());
                }
                Ok(())
            }
        }
    }

    fn print_params(&mut self, p: &DerivedParams) -> Result<(), CliError> {
        let flag = |b: bool| if b { "  (override)" } else { "" };
        say!(
            self,
            "{:<22} {:>15.6e} kg{}",
            "mass",
            p.mass,
            flag(p.overridden.mass)
        );
        say!(
            self,
            "{:<22} {:>15.6e} N/m{}",
            "stiffness",
            p.stiffness,
            flag(p.overridden.stiffness || p.overridden.sensitivity)
        );
        if p.overridden.stiffness || p.overridden.sensitivity {
            say!(
                self,
                "{:<22} {:>15.6e} N/m",
                "formula_stiffness",
                p.formula_stiffness
            );
        }
        say!(
            self,
            "{:<22} {:>15.6e} F",
            "static_capacitance",
            p.static_capacitance
        );
        say!(
            self,
            "{:<22} {:>15.6e} N*s/m",
            "damping_coefficient",
            p.damping_coefficient
        );
        say!(self, "{:<22} {:>15.6e} rad/s", "omega_n", p.omega_n);
        say!(self, "{:<22} {:>15.6e} Hz", "f_n", p.f_n);
        say!(self, "{:<22} {:>15.6e}", "zeta", p.zeta);
        say!(
            self,
            "{:<22} {:>15.6e} m/(m/s^2){}",
            "sensitivity",
            p.sensitivity,
            flag(p.overridden.sensitivity)
        );
        Ok(())
    }

    fn analyze(&mut self, path: &Path, out: Option<&Path>) -> Result<(), CliError> {
        let config = self.load(path)?;
        let params = config.design.derive().map_err(compute)?;
        self.emit(&tables::derived_params_table(&params), out)?;
        self.print_params(&params)
    }

    #[allow(clippy::too_many_arguments)]
    fn step(
        &mut self,
        path: &Path,
        accel_g: f64,
        zeta: Option<f64>,
        dt: Option<f64>,
        duration: Option<f64>,
        rise_10_90: bool,
        out: Option<&Path>,
    ) -> Result<(), CliError> {
        let config = self.load(path)?;
        let params = config.design.derive().map_err(compute)?;
        let mut model = SecondOrderModel::from_params(&params).map_err(compute)?;
        if let Some(z) = zeta {
            model = model.with_zeta(z).map_err(usage)?;
        }
        let accel = accel_g * config.design.g_value;
        let dt = dt.unwrap_or(config.simulation.dt);
        let duration = duration.unwrap_or(config.simulation.duration);
        let waveform = Waveform::step(accel).map_err(usage)?;
        let traj = integrate(&model, &waveform, dt, duration).map_err(compute)?;
        let rise = if rise_10_90 {
            RiseTimeDefinition::TenToNinety
        } else {
            RiseTimeDefinition::FirstCrossing
        };
        let metrics = step_metrics_with(
            &traj,
            accel * model.dc_gain,
            config.simulation.settling_band,
            rise,
        )
        .map_err(compute)?;

        self.emit(&tables::trajectory_table(&traj), out)?;
        if !self.quiet {
            say!(
                self,
                "step {accel_g} g ({accel} m/s^2), omega_n = {:.6e} rad/s, zeta = {:.6}, dt = {dt:e} s",
                model.omega_n,
                model.zeta
            );
        }
        say!(
            self,
            "{:<20} {:>15.6e} m",
            "final_value",
            metrics.final_value
        );
        say!(self, "{:<20} {:>15.6e} s", "rise_time", metrics.rise_time);
        say!(
            self,
            "{:<20} {:>15.6e} s",
            "settling_time",
            metrics.settling_time
        );
        say!(self, "{:<20} {:>15.6e} s", "peak_time", metrics.peak_time);
        say!(
            self,
            "{:<20} {:>15.6} %",
            "overshoot",
            metrics.percent_overshoot
        );
        if let Ok(analytic) = analytic_step_metrics(model.omega_n, model.zeta) {
            if !rise_10_90 {
                say!(
                    self,
                    "{:<20} {:>15.6e} s",
                    "rise_time_analytic",
                    analytic.rise_time
                );
            }
            say!(
                self,
                "{:<20} {:>15.6e} s",
                "4/(zeta*omega_n)",
                analytic.settling_time
            );
        }
        Ok(())
    }

    fn bode(
        &mut self,
        path: &Path,
        fmin: Option<f64>,
        fmax: Option<f64>,
        points: Option<usize>,
        spacing: Option<&str>,
        out: Option<&Path>,
    ) -> Result<(), CliError> {
        let config = self.load(path)?;
        let params = config.design.derive().map_err(compute)?;
        let model = SecondOrderModel::from_params(&params).map_err(compute)?;
        let spacing = match spacing {
            Some(s) => s.parse::<Spacing>().map_err(usage)?,
            None => config.frequency.spacing,
        };
        let resp = bode(
            &model,
            fmin.unwrap_or(config.frequency.f_min),
            fmax.unwrap_or(config.frequency.f_max),
            points.unwrap_or(config.frequency.points),
            spacing,
        )
        .map_err(usage)?;
        self.emit(&tables::frequency_table(&resp), out)?;

        say!(
            self,
            "{:<20} {:>15.6e} m/(m/s^2)",
            "dc_magnitude",
            model.dc_gain
        );
        say!(self, "{:<20} {:>15.6e} Hz", "f_n", params.f_n);
        match resonance_metrics(&resp) {
            Ok(r) => {
                say!(
                    self,
                    "{:<20} {:>15.6e} Hz",
                    "peak_frequency",
                    r.peak_frequency
                );
                say!(
                    self,
                    "{:<20} {:>15.6e} m/(m/s^2)",
                    "peak_magnitude",
                    r.peak_magnitude
                );
                say!(self, "{:<20} {:>15.6}", "quality_factor", r.quality_factor);
                if r.boundary_peak {
                    writeln!(self.err, "warning: peak lies on the upper grid edge")
                        .map_err(compute)?;
                }
            }
            Err(e) => say!(self, "no resonance peak: {e}"),
        }
        if let Some(f90) = resp.frequency_at_phase(-90.0) {
            say!(self, "{:<20} {:>15.6e} Hz", "phase_-90deg_at", f90);
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn sweep(
        &mut self,
        path: &Path,
        param: &str,
        lo: f64,
        hi: f64,
        points: usize,
        unit: Option<&str>,
        out: Option<&Path>,
    ) -> Result<(), CliError> {
        let config = self.load(path)?;
        let parameter: SweepParameter = param.parse().map_err(usage)?;
        let (lo, hi) = match unit {
            Some(u) if parameter.is_length() => (
                units::to_si(lo, u, Dimension::Length)
                    .ok_or_else(|| usage(format!("bad length unit '{u}'")))?,
                units::to_si(hi, u, Dimension::Length)
                    .ok_or_else(|| usage(format!("bad length unit '{u}'")))?,
            ),
            Some(u) => return Err(usage(format!("--unit {u} does not apply to {parameter}"))),
            None => (lo, hi),
        };
        let spec = SweepSpec::new(parameter, lo, hi, points);
        let result = sweep_parameter(&config.design, &spec).map_err(|e| match e {
            crate::sweep_engine::SweepError::InvalidRange { .. } => usage(e),
            other => compute(other),
        })?;
        self.emit(&tables::sweep_table(&result), out)?;
        say!(
            self,
            "{} rows over {parameter} in [{lo:e}, {hi:e}]",
            result.rows.len()
        );
        match result.first_collision() {
            Some(row) => say!(
                self,
                "first collision at {parameter} = {:e} (x = {:.6e} m >= gap {:.6e} m)",
                row.value,
                row.displacement,
                row.gap
            ),
            None => say!(self, "no collision rows"),
        }
        Ok(())
    }

    fn check(
        &mut self,
        path: &Path,
        rated_g: f64,
        safety: f64,
        dynamic: bool,
    ) -> Result<(), CliError> {
        let config = self.load(path)?;
        let mode = if dynamic {
            CollisionMode::Dynamic
        } else {
            CollisionMode::Static
        };
        let r = constraint_check(&config.design, rated_g, safety, mode).map_err(usage)?;
        say!(self, "{:<24} {:>15}", "rated_acceleration_g", rated_g);
        say!(self, "{:<24} {:>15.6e} m", "displacement", r.displacement);
        say!(self, "{:<24} {:>15.6e} m", "gap", r.gap);
        say!(self, "{:<24} {:>15}", "safety_factor", r.safety_factor);
        say!(self, "{:<24} {:>15.6e} m", "margin", r.margin);
        say!(
            self,
            "{:<24} {:>15.6} g",
            "max_safe_acceleration",
            r.max_safe_acceleration_g
        );
        say!(
            self,
            "{:<24} {:>15}",
            "result",
            if r.pass { "PASS" } else { "FAIL" }
        );
        if r.pass {
            Ok(())
        } else {
            Err(CliError::Failed(
                "check: rated acceleration exceeds the collision limit",
            ))
        }
    }

    fn solve(
        &mut self,
        path: &Path,
        target_hz: f64,
        free: &str,
        lo: f64,
        hi: f64,
        unit: Option<&str>,
    ) -> Result<(), CliError> {
        let config = self.load(path)?;
        let free: FreeParameter = free.parse().map_err(usage)?;
        let unit = unit.unwrap_or("m");
        let to_m = |v: f64| {
            units::to_si(v, unit, Dimension::Length)
                .ok_or_else(|| usage(format!("bad length unit '{unit}'")))
        };
        let sol =
            solve_for_target_frequency(&config.design, target_hz, free, (to_m(lo)?, to_m(hi)?))
                .map_err(compute)?;
        say!(self, "{:<20} {:>15.9e} m", "value", sol.value);
        say!(
            self,
            "{:<20} {:>15.9e} Hz",
            "achieved_f_n",
            sol.achieved_f_n
        );
        say!(self, "{:<20} {:>15}", "iterations", sol.iterations);
        Ok(())
    }

    fn report(&mut self, path: &Path, targets: &Path, out: Option<&Path>) -> Result<(), CliError> {
        let config = self.load(path)?;
        let targets = load_targets(targets).map_err(usage)?;
        let report = reference_report(&config, &targets).map_err(|e| {
            if e.is_input_error() {
                usage(e)
            } else {
                compute(e)
            }
        })?;
        self.emit(&report.to_table(), out)?;
        if !self.quiet {
            say!(
                self,
                "{:<30} {:>15} {:>15} {:>11} {:>9} {:<6} note",
                "quantity",
                "computed",
                "reference",
                "rel_error",
                "tol",
                "status"
            );
        }
        for r in &report.rows {
            let tol = r
                .tolerance
                .map_or(String::from("-"), |t| format!("{t:.1e}"));
            say!(
                self,
                "{:<30} {:>15.6e} {:>15.6e} {:>11.3e} {:>9} {:<6} {}",
                r.quantity,
                r.computed,
                r.reference,
                r.rel_error,
                tol,
                status(r.pass),
                r.note
            );
        }
        if report.passed() {
            say!(self, "overall: PASS");
            Ok(())
        } else {
            say!(self, "overall: FAIL");
            Err(CliError::Failed("report: one or more rows failed"))
        }
    }
}
