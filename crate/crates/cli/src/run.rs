//! Config to pipeline dispatch, certification summary and artifacts.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use fracterp::fixtures::random_global_operator;
use fracterp::nonstationary::{builtin_operator, builtin_schedule, LevelGenerator};
use fracterp::{
    backward_trajectory, build_even_n, build_fif, build_interpolating_schedule, check_interpolation, summability_check, CoefficientFn,
    ConditionReport, DomainBox, Error, Expr, GridFunction, InterpolatingSchedule, Level, LocalPiece, LocalRBOperator, OperatorSchedule,
    Partition, QuatRBOperator, RBOperator, JUNCTION_TOL, NOT_CONTRACTIVE_BAND,
};

use crate::config::{Construction, ConfigError, Gate, InitialFunction, Mode, ProblemConfig, ScheduleSpec};
use crate::export::{export_csv, export_projection_csv, export_svg, graph_series, ExportError, SvgStyle};

pub const DYADIC_RESOLUTION: usize = (1 << 10) + 1;
pub const TRIADIC_RESOLUTION: usize = 2188;

/// Tolerance for interpolation checks against data on the grid.
const INTERPOLATION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Certification only: partition, contraction, join-up and Lp verdicts.
    Check,
    /// Fixed point of a global or local operator.
    Solve,
    /// Backward trajectory of a schedule.
    Trajectory,
    /// Fixed point of a quaternionic operator.
    Quat,
}

impl Command {
    fn accepts(self, mode: Mode) -> bool {
        match self {
            Command::Check => true,
            Command::Solve => matches!(mode, Mode::Global | Mode::Local),
            Command::Trajectory => mode == Mode::Nonstationary,
            Command::Quat => mode == Mode::Quaternion,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub eps: Option<f64>,
    pub depth: Option<usize>,
    pub resolution: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    /// A certification gate failed or the pipeline raised an error.
    Failure,
    /// The config does not fit the command.
    ConfigError,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Success => 0,
            Status::Failure => 1,
            Status::ConfigError => 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub status: Status,
    pub summary: Vec<String>,
    pub artifacts: Vec<PathBuf>,
    /// The computed fixed point or trajectory, when the command produces one.
    pub psi: Option<GridFunction>,
}

#[derive(Debug, thiserror::Error)]
enum Stop {
    #[error("{0}")]
    Core(#[from] Error),
    #[error("{0}")]
    Export(#[from] ExportError),
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Mismatch(String),
}

struct Session<'a> {
    cfg: &'a ProblemConfig,
    opts: &'a RunOptions,
    command: Command,
    summary: Vec<String>,
    failed: Vec<String>,
    artifacts: Vec<PathBuf>,
    psi: Option<GridFunction>,
}

pub fn run(cfg: &ProblemConfig, command: Command, opts: &RunOptions) -> RunReport {
    let mut session = Session { cfg, opts, command, summary: Vec::new(), failed: Vec::new(), artifacts: Vec::new(), psi: None };
    let outcome = if !command.accepts(cfg.mode) {
        Err(Stop::Mismatch(format!("{} mode does not support `{}`", cfg.mode, format!("{command:?}").to_lowercase())))
    } else {
        match cfg.mode {
            Mode::Global => session.global(),
            Mode::Local => session.local(),
            Mode::Nonstationary => session.nonstationary(),
            Mode::Quaternion => session.quaternion(),
        }
    };
    let status = match outcome {
        Ok(()) if session.failed.is_empty() => Status::Success,
        Ok(()) => {
            session.summary.push(format!("certification failed: {}", session.failed.join(", ")));
            Status::Failure
        }
        Err(e @ (Stop::Config(_) | Stop::Mismatch(_))) => {
            session.summary.push(format!("config error: {e}"));
            Status::ConfigError
        }
        Err(e) => {
            session.summary.push(format!("error: {e}"));
            Status::Failure
        }
    };
    RunReport { status, summary: session.summary, artifacts: session.artifacts, psi: session.psi }
}

fn coefficients(exprs: &[Expr], domain: &DomainBox) -> Result<Vec<CoefficientFn>, Error> {
    exprs.iter().map(|e| CoefficientFn::new(e.clone(), domain.clone())).collect()
}

fn power_of_two(d: &fracterp::Rational) -> bool {
    let d = *d.denom();
    d > 0 && d & (d - 1) == 0
}

fn dyadic(maps: &[fracterp::AffineMap]) -> bool {
    maps.iter().all(|m| m.exact().is_some_and(|(a, b)| a.iter().chain(b).all(power_of_two)))
}

impl Session<'_> {
    fn say(&mut self, line: impl Into<String>) {
        self.summary.push(line.into());
    }

    fn eps(&self) -> f64 {
        self.opts.eps.unwrap_or(self.cfg.solver.eps)
    }

    fn depth(&self) -> usize {
        self.opts.depth.unwrap_or(self.cfg.solver.depth)
    }

    fn resolution(&self, dyadic: bool) -> usize {
        self.opts.resolution.or(self.cfg.solver.resolution).unwrap_or(if dyadic { DYADIC_RESOLUTION } else { TRIADIC_RESOLUTION })
    }

    fn solving(&self) -> bool {
        self.command != Command::Check
    }

    /// Record a verdict; a failing verdict fails the run when `gate` is required.
    fn gate(&mut self, gate: Gate, name: &str, report: &ConditionReport) {
        self.say(format!("{name}: {report}"));
        if !report.verdict && self.cfg.solver.require.contains(&gate) {
            self.failed.push(name.to_string());
        }
    }

    fn partition_gate(&mut self, report: &fracterp::PartitionReport) {
        self.say(format!("partition: disjoint {}, covers {}, exact {}", report.disjoint, report.covers, report.exact));
        if !report.disjoint || !report.covers {
            self.failed.push("partition".into());
        }
    }

    fn contraction_gate(&mut self, s: f64) -> bool {
        self.say(format!("contraction factor: {s}"));
        if s >= 1.0 - NOT_CONTRACTIVE_BAND {
            self.failed.push(format!("not contractive (s = {s})"));
            false
        } else {
            true
        }
    }

    fn initial(&self, domain: &DomainBox, resolution: usize, value_dim: usize, chord: Option<(&Expr, &Expr)>) -> Result<GridFunction, Error> {
        let expr = match (&self.cfg.solver.f0, chord) {
            (InitialFunction::Expr(e), _) => e,
            (InitialFunction::Chord, Some((b, _))) => b,
            (InitialFunction::Base, Some((_, f))) => f,
            _ => return Err(Error::InvalidArgument("f0 refers to a missing base function".into())),
        };
        let mut err = None;
        let g = GridFunction::from_fn(domain.clone(), resolution, value_dim, |x| match expr.eval(x) {
            Ok(v) if value_dim == 1 => vec![v.as_scalar().unwrap_or_else(|| {
                err.get_or_insert(Error::ValueKind("f0 must be real-valued here".into()));
                0.0
            })],
            Ok(v) => v.to_quat().to_array().to_vec(),
            Err(e) => {
                err.get_or_insert(e);
                vec![0.0; value_dim]
            }
        })?;
        err.map_or(Ok(g), Err)
    }

    fn path(&self, p: &Path) -> PathBuf {
        self.opts.out_dir.join(p)
    }

    fn export_graph(&mut self, psi: &GridFunction) -> Result<(), Stop> {
        if let Some(p) = &self.cfg.export.csv {
            let path = self.path(p);
            export_csv(psi, &path)?;
            self.artifacts.push(path);
        }
        if let Some(p) = &self.cfg.export.svg {
            let path = self.path(p);
            export_svg(&graph_series(psi), &path, &SvgStyle::default())?;
            self.artifacts.push(path);
        }
        Ok(())
    }

    fn global_operator(&self) -> Result<RBOperator, Error> {
        let cfg = self.cfg;
        match cfg.construction {
            Construction::Fif => {
                let lo = cfg.data.first().map_or(0.0, |p| p.0);
                let hi = cfg.data.last().map_or(1.0, |p| p.0);
                let dom = DomainBox::closed(lo, hi);
                build_fif(&cfg.data, &coefficients(&cfg.s, &dom)?)
            }
            _ => {
                let partition = Partition::new(cfg.domain.clone(), cfg.maps.clone())?;
                RBOperator::new(partition, coefficients(&cfg.q, &cfg.domain)?, coefficients(&cfg.s, &cfg.domain)?)
            }
        }
    }

    fn global(&mut self) -> Result<(), Stop> {
        let op = self.global_operator()?;
        let report = op.partition().verify();
        self.partition_gate(&report);
        let contractive = self.contraction_gate(op.contraction_factor());
        if op.domain().dim() == 1 {
            match op.boundary_values() {
                Ok(bv) => {
                    for (x, v) in bv {
                        self.say(format!("psi({x}) = {v}"));
                    }
                }
                Err(e) => self.say(format!("boundary values: {e}")),
            }
            let cont = op.check_continuity(JUNCTION_TOL)?;
            self.gate(Gate::Continuity, "continuity", &cont);
        }
        for &p in &self.cfg.solver.lp.clone() {
            let r = op.lp_certificate(p)?;
            self.gate(Gate::Lp, &format!("L^{p} bound"), &r);
        }
        if !self.solving() || !contractive || !self.failed.is_empty() {
            return Ok(());
        }
        let res = self.resolution(dyadic(op.partition().maps()));
        let f0 = self.initial(op.domain(), res, 1, None)?;
        let fp = op.iterate_to_fixed_point(&f0, self.eps(), self.cfg.solver.k_max)?;
        self.say(format!("iterations: {}", fp.iterations));
        self.say(format!("a-priori bound: {:e}", fp.apriori_bound));
        self.say(format!("residual: {:e}", fp.residual));
        if op.domain().dim() == 1 && !report.contacts.is_empty() {
            let r = op.check_compatibility(&fp.psi, JUNCTION_TOL.max(10.0 * self.eps()))?;
            self.gate(Gate::Compatibility, "compatibility", &r);
        }
        if self.cfg.construction == Construction::Fif {
            let r = check_interpolation(&fp.psi, &self.cfg.data, INTERPOLATION_TOL)?;
            self.gate(Gate::Interpolation, "interpolation", &r);
        }
        self.export_graph(&fp.psi)?;
        self.psi = Some(fp.psi);
        Ok(())
    }

    fn local(&mut self) -> Result<(), Stop> {
        let cfg = self.cfg;
        let (op, data) = match cfg.construction {
            Construction::EvenN => {
                let lo = cfg.data.first().map_or(0.0, |p| p.0);
                let hi = cfg.data.last().map_or(1.0, |p| p.0);
                let c = build_even_n(&cfg.data, &coefficients(&cfg.s, &DomainBox::closed(lo, hi))?)?;
                self.say(format!("even-n construction: n = {}, contact values {:?}", c.n, c.contact_values));
                (c.operator, Some(cfg.data.clone()))
            }
            _ => {
                let mut pieces = Vec::with_capacity(cfg.maps.len());
                for i in 0..cfg.maps.len() {
                    let sub = &cfg.subsets[i];
                    pieces.push(LocalPiece {
                        subset: sub.clone(),
                        map: cfg.maps[i].clone(),
                        q: CoefficientFn::new(cfg.q[i].clone(), sub.clone())?,
                        s: CoefficientFn::new(cfg.s[i].clone(), sub.clone())?,
                    });
                }
                (LocalRBOperator::new(cfg.domain.clone(), pieces)?, None)
            }
        };
        self.partition_gate(&op.verify_local_partition());
        let contractive = self.contraction_gate(op.local_contraction());
        for &p in &cfg.solver.lp {
            let r = op.local_lp_certificate(p)?;
            self.gate(Gate::Lp, &format!("L^{p} bound"), &r);
        }
        if !self.solving() || !contractive || !self.failed.is_empty() {
            return Ok(());
        }
        let res = self.resolution(dyadic(op.partition().maps()));
        let f0 = self.initial(op.domain(), res, 1, None)?;
        let fp = op.iterate_local(&f0, self.eps(), cfg.solver.k_max)?;
        self.say(format!("iterations: {}", fp.iterations));
        self.say(format!("a-priori bound: {:e}", fp.apriori_bound));
        self.say(format!("residual: {:e}", fp.residual));
        if op.domain().dim() == 1 {
            let r = op.check_junctions(&fp.psi, INTERPOLATION_TOL)?;
            self.gate(Gate::Continuity, "junctions", &r);
        }
        if let Some(data) = data {
            let r = check_interpolation(&fp.psi, &data, INTERPOLATION_TOL)?;
            self.gate(Gate::Interpolation, "interpolation", &r);
        }
        self.export_graph(&fp.psi)?;
        self.psi = Some(fp.psi);
        Ok(())
    }

    fn nonstationary(&mut self) -> Result<(), Stop> {
        let depth = self.depth();
        let mut interpolating = None;
        let (sched, dyadic_levels) = match self.cfg.schedule.as_ref().expect("nonstationary configs carry a schedule") {
            ScheduleSpec::Builtin(name) => match builtin_schedule(name) {
                Ok(s) => (s, true),
                Err(Error::UnknownName(_)) => (OperatorSchedule::constant(builtin_operator(name)?), true),
                Err(e) => return Err(e.into()),
            },
            ScheduleSpec::Blocks(blocks) => {
                let ops = blocks.iter().map(|(n, len)| Ok((builtin_operator(n)?, *len))).collect::<Result<Vec<_>, Error>>()?;
                (OperatorSchedule::blocks(ops)?, true)
            }
            ScheduleSpec::Interpolating { base, pieces, scales } => {
                let unit = DomainBox::closed(0.0, 1.0);
                let f = CoefficientFn::new(base.clone(), unit.clone())?;
                let scales = coefficients(scales, &unit)?;
                let pieces_by_level = pieces.clone();
                let levels: LevelGenerator = Arc::new(move |k| {
                    let n = pieces_by_level[(k - 1) % pieces_by_level.len()];
                    Ok(Level::uniform((0..n).map(|i| scales[i % scales.len()].clone()).collect()))
                });
                let spec = InterpolatingSchedule::new(f, levels)?.with_horizon(pieces.len().max(depth), Some(pieces.len()));
                let sched = build_interpolating_schedule(&spec)?;
                let dyadic_levels = pieces.iter().all(|n| n.is_power_of_two());
                interpolating = Some(spec);
                (sched, dyadic_levels)
            }
        };
        let s = sched.uniform_s();
        let contractive = self.contraction_gate(s);
        self.say(format!("uniform q bound: {}", sched.uniform_m()));
        if contractive {
            match &interpolating {
                Some(spec) => self.say(format!("invariant radius: {}", spec.invariant_radius(s)?)),
                None => self.say(format!("invariant radius: {}", sched.invariant_radius()?)),
            }
            let r = summability_check(&sched, depth)?;
            self.gate(Gate::Summability, "summability", &r);
        }
        if !self.solving() || !contractive || !self.failed.is_empty() {
            return Ok(());
        }
        let domain = sched.domain()?;
        let res = self.resolution(dyadic_levels);
        let chord = interpolating.as_ref().map(|spec| (spec.chord(), spec.base().expr()));
        let f0 = self.initial(&domain, res, 1, chord)?;
        let traj = backward_trajectory(&sched, &f0, depth)?;
        self.say(format!("depth: {}", traj.depth));
        if let Some(t) = traj.tail_bound {
            self.say(format!("a-priori bound: {t:e}"));
        }
        if let Some(w) = &traj.warning {
            self.say(format!("warning: {w}"));
        }
        if let Some(spec) = &interpolating {
            let r = check_interpolation(&traj.psi, &spec.nodes(1)?, INTERPOLATION_TOL)?;
            self.gate(Gate::Interpolation, "interpolation", &r);
        }
        self.export_graph(&traj.psi)?;
        self.psi = Some(traj.psi);
        Ok(())
    }

    fn quaternion(&mut self) -> Result<(), Stop> {
        let cfg = self.cfg;
        let partition = Partition::new(cfg.domain.clone(), cfg.maps.clone())?;
        let op = QuatRBOperator::new(partition, coefficients(&cfg.q, &cfg.domain)?, coefficients(&cfg.s, &cfg.domain)?, cfg.side)?;
        self.partition_gate(&op.partition().verify());
        for (i, s) in op.s().iter().enumerate() {
            self.say(format!("sup |s{}| = {}", i + 1, s.sup_bound()));
        }
        let contractive = self.contraction_gate(op.contraction_factor());
        if !self.solving() || !contractive || !self.failed.is_empty() {
            return Ok(());
        }
        let res = self.resolution(dyadic(op.partition().maps()));
        let f0 = self.initial(op.domain(), res, 4, None)?;
        let fp = op.quat_fixed_point(&f0, self.eps(), cfg.solver.k_max)?;
        self.say(format!("iterations: {}", fp.iterations));
        self.say(format!("a-priori bound: {:e}", fp.apriori_bound));
        self.say(format!("residual: {:e}", fp.residual));
        self.export_graph(&fp.psi)?;
        if let Some(csv) = &cfg.export.csv {
            let stem = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            for (name, projection) in &cfg.export.projections {
                let path = self.path(&csv.with_file_name(format!("{stem}_{name}.csv")));
                export_projection_csv(&fp.psi, projection, &path)?;
                self.artifacts.push(path);
            }
        }
        self.psi = Some(fp.psi);
        Ok(())
    }
}

/// A global config reproducing the seeded random operator used in property tests.
pub fn fixture_config(seed: u64) -> ProblemConfig {
    let op = random_global_operator(seed);
    ProblemConfig {
        mode: Mode::Global,
        construction: Construction::Direct,
        domain: op.domain().clone(),
        side: fracterp::Side::Left,
        maps: op.partition().maps().to_vec(),
        subsets: Vec::new(),
        q: op.q().iter().map(|c| c.expr().clone()).collect(),
        s: op.s().iter().map(|c| c.expr().clone()).collect(),
        data: Vec::new(),
        schedule: None,
        solver: Default::default(),
        export: Default::default(),
    }
}
