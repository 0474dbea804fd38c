//! Problem configs: a sectioned `key = value` text format.
//!
//! ```text
//! [problem]
//! mode = global
//! domain = [0, 1)
//!
//! [maps]
//! l1 = 1/3, 0
//! l2 = 2/3, 1/3
//!
//! [coefficients]
//! q1 = -1
//! q2 = x
//! s1 = 0.5*sin(x)
//! s2 = -2/3*cos(x)
//! ```
//!
//! `#` starts a comment. Indexed keys (`l1`, `q2`, `X3`, `p0`) must be
//! numbered contiguously.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use fracterp::expr::{parse_expr_with, ParseOptions};
use fracterp::geometry::{exact_from_f64, Rational};
use fracterp::nonstationary::{builtin_operator, builtin_schedule};
use fracterp::{AffineMap, DomainBox, Expr, ParseError, Projection, Side};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String, expected: Vec<String> },
    #[error("line {line}: {message}")]
    Semantic { line: usize, message: String },
}

impl ConfigError {
    fn semantic(line: usize, message: impl Into<String>) -> Self {
        ConfigError::Semantic { line, message: message.into() }
    }

    fn syntax(line: usize, column: usize, message: impl Into<String>, expected: &[&str]) -> Self {
        ConfigError::Syntax { line, column, message: message.into(), expected: expected.iter().map(|s| s.to_string()).collect() }
    }
}

impl From<ParseError> for ConfigError {
    fn from(e: ParseError) -> Self {
        ConfigError::Syntax {
            line: e.line,
            column: e.column,
            message: format!("expected {}, found {}", e.expected.join(" or "), e.found),
            expected: e.expected,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Global,
    Local,
    Nonstationary,
    Quaternion,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Global => "global",
            Mode::Local => "local",
            Mode::Nonstationary => "nonstationary",
            Mode::Quaternion => "quaternion",
        })
    }
}

/// How the operator is obtained from the config.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Construction {
    /// Maps and coefficients as written.
    Direct,
    /// Fractal interpolation through `[data]` with scales `s_i`.
    Fif,
    /// The even-n local construction through `[data]` with scales `s_i`.
    EvenN,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleSpec {
    Builtin(String),
    /// Builtin operator names with block lengths, repeated periodically.
    Blocks(Vec<(String, usize)>),
    /// `q = f o l - s b` on uniform levels; `pieces` and `scales` are cycled
    /// over levels and pieces respectively.
    Interpolating { base: Expr, pieces: Vec<usize>, scales: Vec<Expr> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialFunction {
    Expr(Expr),
    /// The chord `b` of the base function (interpolating schedules).
    Chord,
    /// The base function itself (interpolating schedules).
    Base,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Continuity,
    Compatibility,
    Lp,
    Interpolation,
    Summability,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverParams {
    pub eps: f64,
    pub k_max: usize,
    /// `None` picks `2^10 + 1` for dyadic maps and `3^7 + 1` otherwise.
    pub resolution: Option<usize>,
    pub depth: usize,
    pub f0: InitialFunction,
    pub lp: Vec<f64>,
    pub require: Vec<Gate>,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            eps: 1e-9,
            k_max: 200,
            resolution: None,
            depth: 30,
            f0: InitialFunction::Expr(Expr::Num(0.0)),
            lp: Vec::new(),
            require: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExportSpec {
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    /// Named projections written next to `csv` as `<stem>_<name>.csv`.
    pub projections: Vec<(String, Projection)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig {
    pub mode: Mode,
    pub construction: Construction,
    pub domain: DomainBox,
    pub side: Side,
    pub maps: Vec<AffineMap>,
    pub subsets: Vec<DomainBox>,
    pub q: Vec<Expr>,
    pub s: Vec<Expr>,
    pub data: Vec<(f64, f64)>,
    pub schedule: Option<ScheduleSpec>,
    pub solver: SolverParams,
    pub export: ExportSpec,
}

#[derive(Debug, Clone)]
struct Entry {
    line: usize,
    column: usize,
    value: String,
}

type Sections = BTreeMap<String, (usize, BTreeMap<String, Entry>)>;

const BUILTINS: [&str; 6] = ["takagi_parabola", "kiesswetter_casino", "takagi", "parabola", "kiesswetter", "casino"];

const SECTIONS: &[&str] = &["problem", "maps", "subsets", "coefficients", "data", "schedule", "solver", "export"];

fn tokenize(text: &str) -> Result<Sections, ConfigError> {
    let mut sections: Sections = BTreeMap::new();
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len();
        if let Some(rest) = trimmed.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return Err(ConfigError::syntax(line, indent + trimmed.len() + 1, "unterminated section header", &["]"]));
            };
            let name = name.trim().to_string();
            if !SECTIONS.contains(&name.as_str()) {
                return Err(ConfigError::syntax(line, indent + 2, format!("unknown section [{name}]"), SECTIONS));
            }
            if sections.contains_key(&name) {
                return Err(ConfigError::semantic(line, format!("section [{name}] appears twice")));
            }
            sections.insert(name.clone(), (line, BTreeMap::new()));
            current = Some(name);
            continue;
        }
        let Some(eq) = content.find('=') else {
            return Err(ConfigError::syntax(line, indent + trimmed.len() + 1, "expected `key = value`", &["="]));
        };
        let key = content[..eq].trim().to_string();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(ConfigError::syntax(line, indent + 1, format!("invalid key `{key}`"), &["key"]));
        }
        let after = &content[eq + 1..];
        let lead = after.len() - after.trim_start().len();
        let value = after.trim().to_string();
        let column = eq + 2 + lead;
        if value.is_empty() {
            return Err(ConfigError::syntax(line, column, format!("missing value for `{key}`"), &["value"]));
        }
        let Some(sec) = &current else {
            return Err(ConfigError::syntax(line, indent + 1, "entry outside any section", &["[section]"]));
        };
        let entries = &mut sections.get_mut(sec).expect("current section").1;
        if entries.contains_key(&key) {
            return Err(ConfigError::semantic(line, format!("key `{key}` appears twice in [{sec}]")));
        }
        entries.insert(key, Entry { line, column, value });
    }
    Ok(sections)
}

/// Split at commas outside parentheses and brackets, keeping column offsets.
fn split_top(s: &str) -> Vec<(usize, &str)> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ',' if depth == 0 => {
                parts.push((start, &s[start..i]));
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push((start, &s[start..]));
    parts
        .into_iter()
        .map(|(off, p)| {
            let lead = p.len() - p.trim_start().len();
            (off + lead, p.trim())
        })
        .collect()
}

fn expr_at(src: &str, line: usize, column: usize, quaternion: bool) -> Result<Expr, ConfigError> {
    parse_expr_with(src, ParseOptions { allow_quaternion: quaternion }).map_err(|e| e.offset(line, column).into())
}

enum Number {
    Exact(Rational),
    Float(f64),
}

impl Number {
    fn value(&self) -> f64 {
        match self {
            Number::Exact(r) => fracterp::geometry::rational_to_f64(r),
            Number::Float(v) => *v,
        }
    }
}

fn number_at(src: &str, line: usize, column: usize) -> Result<Number, ConfigError> {
    let e = expr_at(src, line, column, false)?;
    if let Some(r) = e.as_rational() {
        return Ok(Number::Exact(r));
    }
    if !e.is_constant() {
        return Err(ConfigError::semantic(line, format!("`{src}` is not a constant")));
    }
    let v = e.eval(&[0.0]).map_err(|err| ConfigError::semantic(line, err.to_string()))?;
    let v = v.as_scalar().ok_or_else(|| ConfigError::semantic(line, format!("`{src}` is not real")))?;
    Ok(exact_from_f64(v).map_or(Number::Float(v), Number::Exact))
}

fn numbers(entry: &Entry, count: usize) -> Result<Vec<Number>, ConfigError> {
    let parts = split_top(&entry.value);
    if parts.len() != count {
        return Err(ConfigError::semantic(entry.line, format!("expected {count} comma-separated values, found {}", parts.len())));
    }
    parts.into_iter().map(|(off, p)| number_at(p, entry.line, entry.column + off)).collect()
}

fn interval(entry: &Entry) -> Result<DomainBox, ConfigError> {
    let v = entry.value.trim();
    let closed_hi = match v.chars().last() {
        Some(']') => true,
        Some(')') => false,
        _ => return Err(ConfigError::syntax(entry.line, entry.column + v.len(), "interval must end with `]` or `)`", &["]", ")"])),
    };
    let Some(inner) = v.strip_prefix('[') else {
        return Err(ConfigError::syntax(entry.line, entry.column, "interval must start with `[`", &["["]));
    };
    let inner = &inner[..inner.len() - 1];
    let fake = Entry { line: entry.line, column: entry.column + 1, value: inner.to_string() };
    let ends = numbers(&fake, 2)?;
    DomainBox::new(vec![ends[0].value()], vec![ends[1].value()], vec![closed_hi])
        .map_err(|e| ConfigError::semantic(entry.line, e.to_string()))
}

/// Entries `prefix1, prefix2, ...` (or from 0 with `from_zero`) in order.
fn indexed<'a>(entries: &'a BTreeMap<String, Entry>, prefix: &str, from_zero: bool, line: usize) -> Result<Vec<&'a Entry>, ConfigError> {
    let mut found: BTreeMap<usize, &Entry> = BTreeMap::new();
    for (k, e) in entries {
        if let Some(rest) = k.strip_prefix(prefix) {
            if let Ok(i) = rest.parse::<usize>() {
                found.insert(i, e);
            }
        }
    }
    let first = usize::from(!from_zero);
    for (expect, (&i, e)) in (first..).zip(&found) {
        if i != expect {
            return Err(ConfigError::semantic(e.line, format!("`{prefix}{i}` without `{prefix}{expect}`")));
        }
    }
    if found.is_empty() {
        return Err(ConfigError::semantic(line, format!("no `{prefix}{first}` entries")));
    }
    Ok(found.into_values().collect())
}

fn unknown_keys(entries: &BTreeMap<String, Entry>, allowed: &dyn Fn(&str) -> bool, section: &str) -> Result<(), ConfigError> {
    for (k, e) in entries {
        if !allowed(k) {
            return Err(ConfigError::syntax(e.line, 1, format!("unknown key `{k}` in [{section}]"), &[]));
        }
    }
    Ok(())
}

fn is_indexed(k: &str, prefix: &str) -> bool {
    k.strip_prefix(prefix).is_some_and(|r| !r.is_empty() && r.chars().all(|c| c.is_ascii_digit()))
}

fn parse_usize(e: &Entry) -> Result<usize, ConfigError> {
    e.value.parse().map_err(|_| ConfigError::syntax(e.line, e.column, format!("expected a nonnegative integer, found `{}`", e.value), &["integer"]))
}

fn parse_f64(e: &Entry) -> Result<f64, ConfigError> {
    if e.value == "inf" {
        return Ok(f64::INFINITY);
    }
    Ok(number_at(&e.value, e.line, e.column)?.value())
}

fn list<T>(e: &Entry, f: impl Fn(&str, usize) -> Result<T, ConfigError>) -> Result<Vec<T>, ConfigError> {
    split_top(&e.value).into_iter().map(|(off, p)| f(p, e.column + off)).collect()
}

fn projection(name: &str, line: usize, column: usize) -> Result<Projection, ConfigError> {
    let axes = |digits: &str| -> Option<Vec<usize>> {
        (!digits.is_empty()).then(|| digits.chars().map(|c| c.to_digit(10).map(|d| d as usize)).collect::<Option<Vec<_>>>()).flatten()
    };
    let bad = || ConfigError::syntax(line, column, format!("unknown projection `{name}`"), &["graph<axis>", "param<axes>"]);
    if let Some(rest) = name.strip_prefix("graph") {
        match axes(rest).as_deref() {
            Some([a]) if *a <= 3 => Ok(Projection::Graph(*a)),
            _ => Err(bad()),
        }
    } else if let Some(rest) = name.strip_prefix("param") {
        match axes(rest) {
            Some(a) if a.len() >= 2 && a.iter().all(|&x| x <= 3) => Ok(Projection::Parametric(a)),
            _ => Err(bad()),
        }
    } else {
        Err(bad())
    }
}

pub fn parse_config(text: &str) -> Result<ProblemConfig, ConfigError> {
    let sections = tokenize(text)?;
    let empty = BTreeMap::new();
    let section = |name: &str| sections.get(name).map_or(&empty, |(_, e)| e);
    let section_line = |name: &str| sections.get(name).map_or(1, |(l, _)| *l);

    let problem = section("problem");
    unknown_keys(problem, &|k| matches!(k, "mode" | "domain" | "side" | "construction"), "problem")?;
    let mode_entry = problem.get("mode").ok_or_else(|| ConfigError::semantic(section_line("problem"), "missing `mode` in [problem]"))?;
    let mode = match mode_entry.value.as_str() {
        "global" => Mode::Global,
        "local" => Mode::Local,
        "nonstationary" => Mode::Nonstationary,
        "quaternion" => Mode::Quaternion,
        other => {
            return Err(ConfigError::syntax(
                mode_entry.line,
                mode_entry.column,
                format!("unknown mode `{other}`"),
                &["global", "local", "nonstationary", "quaternion"],
            ))
        }
    };
    let quaternion = mode == Mode::Quaternion;
    let domain = match problem.get("domain") {
        Some(e) => interval(e)?,
        None => DomainBox::closed(0.0, 1.0),
    };
    let side = match problem.get("side").map(|e| (e, e.value.as_str())) {
        None | Some((_, "left")) => Side::Left,
        Some((_, "right")) => Side::Right,
        Some((e, other)) => return Err(ConfigError::syntax(e.line, e.column, format!("unknown side `{other}`"), &["left", "right"])),
    };
    if problem.contains_key("side") && !quaternion {
        return Err(ConfigError::semantic(problem["side"].line, "`side` only applies to quaternion mode"));
    }
    let construction = match problem.get("construction").map(|e| (e, e.value.as_str())) {
        None | Some((_, "direct")) => Construction::Direct,
        Some((_, "fif")) => Construction::Fif,
        Some((_, "even_n")) => Construction::EvenN,
        Some((e, other)) => {
            return Err(ConfigError::syntax(e.line, e.column, format!("unknown construction `{other}`"), &["direct", "fif", "even_n"]))
        }
    };
    match (construction, mode) {
        (Construction::Fif, Mode::Global) | (Construction::EvenN, Mode::Local) | (Construction::Direct, _) => {}
        (c, m) => {
            let line = problem["construction"].line;
            return Err(ConfigError::semantic(line, format!("construction {c:?} is not available in {m} mode")));
        }
    }

    let coefficient_list = |prefix: &str| -> Result<Vec<Expr>, ConfigError> {
        let coeffs = section("coefficients");
        indexed(coeffs, prefix, false, section_line("coefficients"))?
            .into_iter()
            .map(|e| expr_at(&e.value, e.line, e.column, quaternion))
            .collect()
    };

    let mut maps = Vec::new();
    let mut subsets = Vec::new();
    let mut q = Vec::new();
    let mut s = Vec::new();
    let mut data = Vec::new();
    if mode != Mode::Nonstationary {
        unknown_keys(section("coefficients"), &|k| is_indexed(k, "q") || is_indexed(k, "s"), "coefficients")?;
        if construction == Construction::Direct {
            unknown_keys(section("maps"), &|k| is_indexed(k, "l"), "maps")?;
            for e in indexed(section("maps"), "l", false, section_line("maps"))? {
                let [a, b]: [Number; 2] = numbers(e, 2)?.try_into().map_err(|_| ConfigError::semantic(e.line, "bad map"))?;
                let map = match (a, b) {
                    (Number::Exact(a), Number::Exact(b)) => AffineMap::from_rationals(vec![a], vec![b]),
                    (a, b) => AffineMap::linear(a.value(), b.value()),
                };
                maps.push(map);
            }
            q = coefficient_list("q")?;
            s = coefficient_list("s")?;
            if q.len() != maps.len() || s.len() != maps.len() {
                return Err(ConfigError::semantic(
                    section_line("coefficients"),
                    format!("{} maps but {} q and {} s coefficients", maps.len(), q.len(), s.len()),
                ));
            }
        } else if section("coefficients").keys().any(|k| k.starts_with('q')) {
            return Err(ConfigError::semantic(section_line("coefficients"), "q coefficients are derived from the data here; give only s"));
        } else {
            s = coefficient_list("s")?;
        }
        if mode == Mode::Local && construction == Construction::Direct {
            if !sections.contains_key("subsets") {
                return Err(ConfigError::semantic(mode_entry.line, "local mode needs a [subsets] section"));
            }
            unknown_keys(section("subsets"), &|k| is_indexed(k, "X"), "subsets")?;
            subsets = indexed(section("subsets"), "X", false, section_line("subsets"))?
                .into_iter()
                .map(interval)
                .collect::<Result<_, _>>()?;
            if subsets.len() != maps.len() {
                return Err(ConfigError::semantic(section_line("subsets"), format!("{} maps but {} subsets", maps.len(), subsets.len())));
            }
        } else if sections.contains_key("subsets") {
            return Err(ConfigError::semantic(section_line("subsets"), "[subsets] does not apply to this problem"));
        }
        if construction != Construction::Direct {
            unknown_keys(section("data"), &|k| is_indexed(k, "p"), "data")?;
            for e in indexed(section("data"), "p", true, section_line("data"))? {
                let v = numbers(e, 2)?;
                data.push((v[0].value(), v[1].value()));
            }
        } else if sections.contains_key("data") {
            return Err(ConfigError::semantic(section_line("data"), "[data] needs `construction = fif` or `even_n`"));
        }
    } else {
        for name in ["maps", "subsets", "coefficients", "data"] {
            if sections.contains_key(name) {
                return Err(ConfigError::semantic(section_line(name), format!("[{name}] does not apply to nonstationary mode; use [schedule]")));
            }
        }
    }

    let schedule = if mode == Mode::Nonstationary {
        let sch = section("schedule");
        let line = section_line("schedule");
        unknown_keys(sch, &|k| matches!(k, "builtin" | "blocks" | "base" | "pieces" | "scales"), "schedule")?;
        let spec = if let Some(e) = sch.get("builtin") {
            if builtin_schedule(&e.value).is_err() && builtin_operator(&e.value).is_err() {
                return Err(ConfigError::syntax(e.line, e.column, format!("unknown builtin `{}`", e.value), &BUILTINS[..]));
            }
            ScheduleSpec::Builtin(e.value.clone())
        } else if let Some(e) = sch.get("blocks") {
            ScheduleSpec::Blocks(list(e, |p, col| {
                let (name, len) = p.split_once('*').ok_or_else(|| ConfigError::syntax(e.line, col, format!("expected `name*length`, found `{p}`"), &["*"]))?;
                let len: usize = len.trim().parse().map_err(|_| ConfigError::syntax(e.line, col, format!("bad block length in `{p}`"), &["integer"]))?;
                let name = name.trim();
                if builtin_operator(name).is_err() {
                    return Err(ConfigError::syntax(e.line, col, format!("unknown operator `{name}`"), &BUILTINS[2..]));
                }
                Ok((name.to_string(), len))
            })?)
        } else if let Some(e) = sch.get("base") {
            let base = expr_at(&e.value, e.line, e.column, false)?;
            let pieces_entry = sch.get("pieces").ok_or_else(|| ConfigError::semantic(line, "interpolating schedules need `pieces`"))?;
            let pieces = list(pieces_entry, |p, col| {
                p.parse::<usize>().ok().filter(|n| *n >= 1).ok_or_else(|| ConfigError::syntax(pieces_entry.line, col, format!("expected a positive integer, found `{p}`"), &["integer"]))
            })?;
            let scales_entry = sch.get("scales").ok_or_else(|| ConfigError::semantic(line, "interpolating schedules need `scales`"))?;
            let scales = list(scales_entry, |p, col| expr_at(p, scales_entry.line, col, false))?;
            ScheduleSpec::Interpolating { base, pieces, scales }
        } else {
            return Err(ConfigError::semantic(line, "[schedule] needs `builtin`, `blocks` or `base`"));
        };
        Some(spec)
    } else {
        if sections.contains_key("schedule") {
            return Err(ConfigError::semantic(section_line("schedule"), "[schedule] only applies to nonstationary mode"));
        }
        None
    };

    let mut solver = SolverParams::default();
    let sol = section("solver");
    unknown_keys(sol, &|k| matches!(k, "eps" | "k_max" | "resolution" | "depth" | "f0" | "lp" | "require"), "solver")?;
    if let Some(e) = sol.get("eps") {
        solver.eps = parse_f64(e)?;
        if !(solver.eps > 0.0) {
            return Err(ConfigError::semantic(e.line, "eps must be positive"));
        }
    }
    if let Some(e) = sol.get("k_max") {
        solver.k_max = parse_usize(e)?;
    }
    if let Some(e) = sol.get("resolution") {
        let r = parse_usize(e)?;
        if r < 2 {
            return Err(ConfigError::semantic(e.line, "resolution must be at least 2"));
        }
        solver.resolution = Some(r);
    }
    if let Some(e) = sol.get("depth") {
        solver.depth = parse_usize(e)?;
        if solver.depth == 0 {
            return Err(ConfigError::semantic(e.line, "depth must be at least 1"));
        }
    }
    if let Some(e) = sol.get("f0") {
        let interpolating = matches!(schedule, Some(ScheduleSpec::Interpolating { .. }));
        solver.f0 = match e.value.as_str() {
            "chord" | "base" if !interpolating => {
                return Err(ConfigError::semantic(e.line, format!("`f0 = {}` needs an interpolating schedule", e.value)))
            }
            "chord" => InitialFunction::Chord,
            "base" => InitialFunction::Base,
            src => InitialFunction::Expr(expr_at(src, e.line, e.column, quaternion)?),
        };
    } else if matches!(schedule, Some(ScheduleSpec::Interpolating { .. })) {
        solver.f0 = InitialFunction::Chord;
    }
    if let Some(e) = sol.get("lp") {
        solver.lp = list(e, |p, col| {
            let fake = Entry { line: e.line, column: col, value: p.to_string() };
            let v = parse_f64(&fake)?;
            if v.is_nan() || v < 1.0 {
                return Err(ConfigError::semantic(e.line, format!("p = {p} is outside [1, inf]")));
            }
            Ok(v)
        })?;
    }
    if let Some(e) = sol.get("require") {
        solver.require = list(e, |p, col| match p {
            "continuity" => Ok(Gate::Continuity),
            "compatibility" => Ok(Gate::Compatibility),
            "lp" => Ok(Gate::Lp),
            "interpolation" => Ok(Gate::Interpolation),
            "summability" => Ok(Gate::Summability),
            _ => Err(ConfigError::syntax(
                e.line,
                col,
                format!("unknown gate `{p}`"),
                &["continuity", "compatibility", "lp", "interpolation", "summability"],
            )),
        })?;
        if solver.require.contains(&Gate::Lp) && solver.lp.is_empty() {
            return Err(ConfigError::semantic(e.line, "`require = lp` needs an `lp` list"));
        }
    }

    let mut export = ExportSpec::default();
    let ex = section("export");
    unknown_keys(ex, &|k| matches!(k, "csv" | "svg" | "projections"), "export")?;
    export.csv = ex.get("csv").map(|e| PathBuf::from(&e.value));
    export.svg = ex.get("svg").map(|e| PathBuf::from(&e.value));
    if let Some(e) = ex.get("projections") {
        if !quaternion {
            return Err(ConfigError::semantic(e.line, "projections only apply to quaternion mode"));
        }
        if export.csv.is_none() {
            return Err(ConfigError::semantic(e.line, "projections are written next to `csv`; set it"));
        }
        export.projections = list(e, |p, col| Ok((p.to_string(), projection(p, e.line, col)?)))?;
    }

    Ok(ProblemConfig { mode, construction, domain, side, maps, subsets, q, s, data, schedule, solver, export })
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE1: &str = "\
[problem]
mode = global
domain = [0, 1)

[maps]
l1 = 1/3, 0
l2 = 2/3, 1/3

[coefficients]
q1 = -1
q2 = x
s1 = 0.5*sin(x)
s2 = -2/3*cos(x)
";

    #[test]
    fn first_example_parses() {
        let cfg = parse_config(EXAMPLE1).unwrap();
        assert_eq!(cfg.mode, Mode::Global);
        assert_eq!(cfg.domain, DomainBox::half_open(0.0, 1.0));
        assert_eq!(cfg.maps[1], AffineMap::ratio((2, 3), (1, 3)));
        assert_eq!(cfg.q[1], Expr::Var);
        assert_eq!(cfg.s.len(), 2);
        assert_eq!(cfg.solver, SolverParams::default());
    }

    #[test]
    fn large_scale_still_parses() {
        let text = EXAMPLE1.replace("s1 = 0.5*sin(x)", "s1 = 1.5");
        assert!(parse_config(&text).is_ok());
    }

    #[test]
    fn expression_errors_carry_document_positions() {
        let text = EXAMPLE1.replace("q2 = x", "q2 = sin(");
        match parse_config(&text).unwrap_err() {
            ConfigError::Syntax { line, column, expected, .. } => {
                assert_eq!((line, column), (11, 10));
                assert!(expected.contains(&"expression".to_string()));
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn local_mode_needs_subsets() {
        let text = EXAMPLE1.replace("mode = global", "mode = local");
        assert!(matches!(parse_config(&text), Err(ConfigError::Semantic { line: 2, .. })));
    }

    #[test]
    fn quaternion_literals_only_in_quaternion_mode() {
        let text = EXAMPLE1.replace("q1 = -1", "q1 = (1, 0, 0, 0)");
        assert!(matches!(parse_config(&text), Err(ConfigError::Syntax { line: 10, .. })));
        let text = text.replace("mode = global", "mode = quaternion");
        let cfg = parse_config(&text).unwrap();
        assert!(cfg.q[0].has_quaternion_literal());
    }

    #[test]
    fn structural_errors() {
        assert!(matches!(parse_config("mode = global"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(parse_config("[problem]\nmode = global\n[nope]\n"), Err(ConfigError::Syntax { line: 3, .. })));
        assert!(matches!(parse_config("[problem]\nmode global\n"), Err(ConfigError::Syntax { line: 2, .. })));
        assert!(matches!(parse_config("[problem]\nmode = global\nmode = local\n"), Err(ConfigError::Semantic { line: 3, .. })));
        let gap = EXAMPLE1.replace("l2 = 2/3, 1/3", "l3 = 2/3, 1/3");
        assert!(matches!(parse_config(&gap), Err(ConfigError::Semantic { line: 7, .. })));
    }

    #[test]
    fn schedules_and_solver_keys() {
        let text = "\
[problem]
mode = nonstationary
[schedule]
blocks = takagi*5, parabola*5
[solver]
depth = 20
lp = 1, 2, inf
require = summability
";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.schedule, Some(ScheduleSpec::Blocks(vec![("takagi".into(), 5), ("parabola".into(), 5)])));
        assert_eq!(cfg.solver.depth, 20);
        assert_eq!(cfg.solver.lp, vec![1.0, 2.0, f64::INFINITY]);
        assert_eq!(cfg.solver.require, vec![Gate::Summability]);
        let typo = text.replace("parabola*5", "parabol*5");
        assert!(matches!(parse_config(&typo), Err(ConfigError::Syntax { line: 4, column: 20, .. })));
    }

    #[test]
    fn interpolating_schedule_defaults_to_the_chord() {
        let text = "\
[problem]
mode = nonstationary
[schedule]
base = sin(pi*x)/2
pieces = 8, 16
scales = 0.3, -0.3
";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.solver.f0, InitialFunction::Chord);
        assert!(matches!(cfg.schedule, Some(ScheduleSpec::Interpolating { ref pieces, .. }) if pieces == &[8, 16]));
    }

    #[test]
    fn projections_parse() {
        assert_eq!(projection("graph2", 1, 1).unwrap(), Projection::Graph(2));
        assert_eq!(projection("param023", 1, 1).unwrap(), Projection::Parametric(vec![0, 2, 3]));
        assert!(projection("graph4", 1, 1).is_err());
        assert!(projection("param", 1, 1).is_err());
    }

    #[test]
    fn split_keeps_columns() {
        assert_eq!(split_top("a, f(1, 2) ,c"), vec![(0, "a"), (3, "f(1, 2)"), (12, "c")]);
    }
}
