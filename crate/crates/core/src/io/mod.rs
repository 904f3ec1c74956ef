//! Config files, CSV output tables and reference reports.

pub mod config;
pub mod csv_out;
pub mod report;
pub mod tables;
pub mod units;

pub use config::{load_config, parse_config, Config, ConfigError};
pub use csv_out::{write_csv, Cell, CsvError, CsvTable};
pub use report::{load_targets, parse_targets, reference_report, Report, ReportError, ReportRow};
