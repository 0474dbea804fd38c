//! Config parsing, pipeline dispatch and CSV/SVG export for the `fracterp`
//! command-line tool.

pub mod config;
pub mod export;
pub mod figures;
pub mod run;

pub use config::{parse_config, ConfigError, Mode, ProblemConfig};
pub use export::{export_csv, export_svg, ExportError, SvgStyle};
pub use figures::figures;
pub use run::{fixture_config, run, Command, RunOptions, RunReport, Status};
