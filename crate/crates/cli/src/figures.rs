//! Figure reproduction: each figure is a checked-in config run with its
//! export redirected to `figN.*`.

use std::path::{Path, PathBuf};

use fracterp::Projection;

use crate::config::{parse_config, ProblemConfig};
use crate::export::{export_csv, export_projection_csv, ExportError};
use crate::run::{run, Command, RunOptions, RunReport, Status};

pub const EXAMPLE1: &str = include_str!("../configs/example1.cfg");
pub const CONTINUOUS: &str = include_str!("../configs/continuous.cfg");
pub const TAKAGI_PARABOLA: &str = include_str!("../configs/takagi_parabola.cfg");
pub const KIESSWETTER_CASINO: &str = include_str!("../configs/kiesswetter_casino.cfg");
pub const QUATERNION: &str = include_str!("../configs/quaternion.cfg");

/// Every shipped config with the status `run` should end in.
pub const SHIPPED: &[(&str, &str, Status)] = &[
    ("example1", EXAMPLE1, Status::Success),
    ("continuous", CONTINUOUS, Status::Success),
    ("takagi_parabola", TAKAGI_PARABOLA, Status::Success),
    ("kiesswetter_casino", KIESSWETTER_CASINO, Status::Success),
    ("quaternion", QUATERNION, Status::Success),
    ("fif", include_str!("../configs/fif.cfg"), Status::Success),
    ("even_n", include_str!("../configs/even_n.cfg"), Status::Success),
    ("local", include_str!("../configs/local.cfg"), Status::Success),
    ("interpolating", include_str!("../configs/interpolating.cfg"), Status::Success),
    ("failing/not_contractive", include_str!("../configs/failing/not_contractive.cfg"), Status::Failure),
    ("failing/perturbed_continuity", include_str!("../configs/failing/perturbed_continuity.cfg"), Status::Failure),
];

/// The command matching a config's mode.
pub fn command_for(cfg: &ProblemConfig) -> Command {
    match cfg.mode {
        crate::config::Mode::Global | crate::config::Mode::Local => Command::Solve,
        crate::config::Mode::Nonstationary => Command::Trajectory,
        crate::config::Mode::Quaternion => Command::Quat,
    }
}

#[derive(Debug, Clone)]
pub struct FigureReport {
    pub status: Status,
    pub summary: Vec<String>,
    pub artifacts: Vec<PathBuf>,
}

fn graph_figure(name: &str, text: &str, opts: &RunOptions) -> RunReport {
    let mut cfg = parse_config(text).expect("shipped configs parse");
    cfg.export.csv = Some(PathBuf::from(format!("{name}.csv")));
    cfg.export.svg = Some(PathBuf::from(format!("{name}.svg")));
    cfg.export.projections.clear();
    run(&cfg, command_for(&cfg), opts)
}

/// Write `fig1`..`fig4` (CSV and SVG), `fig5.csv` (`x,psi_0,...,psi_3`) and
/// `fig6.csv` (`psi_0,...,psi_3`) into `out_dir`.
pub fn figures(out_dir: &Path) -> FigureReport {
    let opts = RunOptions { out_dir: out_dir.to_path_buf(), ..Default::default() };
    let mut summary = Vec::new();
    let mut artifacts = Vec::new();
    let mut status = Status::Success;
    let graphs = [("fig1", EXAMPLE1), ("fig2", CONTINUOUS), ("fig3", TAKAGI_PARABOLA), ("fig4", KIESSWETTER_CASINO)];
    for (name, text) in graphs {
        let report = graph_figure(name, text, &opts);
        summary.push(format!("[{name}]"));
        summary.extend(report.summary);
        artifacts.extend(report.artifacts);
        if report.status != Status::Success {
            status = report.status;
        }
    }

    let mut cfg = parse_config(QUATERNION).expect("shipped configs parse");
    cfg.export = Default::default();
    let report = run(&cfg, Command::Quat, &opts);
    summary.push("[fig5, fig6]".into());
    summary.extend(report.summary);
    match (report.status, report.psi) {
        (Status::Success, Some(psi)) => {
            let written = (|| -> Result<(), ExportError> {
                let p5 = out_dir.join("fig5.csv");
                export_csv(&psi, &p5)?;
                artifacts.push(p5);
                let p6 = out_dir.join("fig6.csv");
                export_projection_csv(&psi, &Projection::Parametric(vec![0, 1, 2, 3]), &p6)?;
                artifacts.push(p6);
                Ok(())
            })();
            if let Err(e) = written {
                summary.push(format!("error: {e}"));
                status = Status::Failure;
            }
        }
        (s, _) => status = if s == Status::Success { Status::Failure } else { s },
    }
    FigureReport { status, summary, artifacts }
}
