//! Sequences of RB operators `{T_k}` and their trajectories.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::coefficient::CoefficientFn;
use crate::engine::{Plan, NOT_CONTRACTIVE_BAND};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{AffineMap, DomainBox, Partition};
use crate::global::RBOperator;
use crate::grid::GridFunction;
use crate::report::{ConditionKind, ConditionReport, Witness};

/// Default number of levels over which `uniform_s` and `uniform_M` are taken.
pub const DEFAULT_HORIZON: usize = 200;

pub type Generator = Arc<dyn Fn(usize) -> Result<RBOperator> + Send + Sync>;

/// `k -> T_k` for `k >= 1`, with contraction and `q` bounds taken over the
/// first `horizon` levels. Levels past the horizon are assumed to repeat
/// with the declared period, or else to stay within the same bounds.
#[derive(Clone)]
pub struct OperatorSchedule {
    generator: Generator,
    uniform_s: f64,
    uniform_m: f64,
    horizon: usize,
    period: Option<usize>,
    cache: Arc<Mutex<HashMap<usize, Arc<RBOperator>>>>,
}

impl fmt::Debug for OperatorSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorSchedule")
            .field("uniform_s", &self.uniform_s)
            .field("uniform_m", &self.uniform_m)
            .field("horizon", &self.horizon)
            .field("period", &self.period)
            .finish_non_exhaustive()
    }
}

impl OperatorSchedule {
    pub fn new(generator: Generator, horizon: usize, period: Option<usize>) -> Result<Self> {
        if horizon == 0 || period == Some(0) {
            return Err(Error::InvalidArgument("horizon and period must be positive".into()));
        }
        let mut sched = OperatorSchedule {
            generator,
            uniform_s: 0.0,
            uniform_m: 0.0,
            horizon,
            period,
            cache: Arc::new(Mutex::new(HashMap::new())),
        };
        let levels = period.map_or(horizon, |p| p.min(horizon));
        let mut domain: Option<DomainBox> = None;
        for k in 1..=levels {
            let t = sched.operator(k)?;
            match &domain {
                None => domain = Some(t.domain().clone()),
                Some(d) if d != t.domain() => {
                    return Err(Error::ShapeMismatch(format!("T_{k} acts on a different domain")));
                }
                _ => {}
            }
            sched.uniform_s = sched.uniform_s.max(t.contraction_factor());
            sched.uniform_m = sched.uniform_m.max(t.q_bound());
        }
        Ok(sched)
    }

    /// `T_k = t` for every `k`.
    pub fn constant(t: RBOperator) -> Self {
        let t = Arc::new(t);
        let shared = t.clone();
        let mut cache = HashMap::new();
        cache.insert(1, t.clone());
        OperatorSchedule {
            generator: Arc::new(move |_| Ok((*shared).clone())),
            uniform_s: t.contraction_factor(),
            uniform_m: t.q_bound(),
            horizon: 1,
            period: Some(1),
            cache: Arc::new(Mutex::new(cache)),
        }
    }

    /// Repeating blocks: `blocks[0].0` for `blocks[0].1` levels, then the next
    /// block, and so on with period `sum of lengths`.
    pub fn blocks(blocks: Vec<(RBOperator, usize)>) -> Result<Self> {
        if blocks.is_empty() || blocks.iter().any(|(_, len)| *len == 0) {
            return Err(Error::InvalidArgument("blocks must be nonempty with positive lengths".into()));
        }
        let period: usize = blocks.iter().map(|(_, len)| len).sum();
        let table: Vec<(Arc<RBOperator>, usize)> = blocks.into_iter().map(|(t, len)| (Arc::new(t), len)).collect();
        let lookup = table.clone();
        let pick = move |k: usize| -> Arc<RBOperator> {
            let mut r = (k - 1) % period;
            for (t, len) in &lookup {
                if r < *len {
                    return t.clone();
                }
                r -= len;
            }
            unreachable!("offset within period")
        };
        let shared = Arc::new(pick);
        let gen = shared.clone();
        let sched = OperatorSchedule::new(Arc::new(move |k| Ok((*gen(k)).clone())), period, Some(period))?;
        // share the block operators so plans can be reused by identity
        let mut cache = sched.cache.lock().expect("cache");
        for k in 1..=period {
            cache.insert(k, shared(k));
        }
        drop(cache);
        Ok(sched)
    }

    /// `T_k`, generated once and memoized.
    pub fn operator(&self, k: usize) -> Result<Arc<RBOperator>> {
        if k == 0 {
            return Err(Error::InvalidArgument("schedules are indexed from k = 1".into()));
        }
        let key = match self.period {
            Some(p) => (k - 1) % p + 1,
            None => k,
        };
        if let Some(t) = self.cache.lock().expect("cache").get(&key) {
            return Ok(t.clone());
        }
        let t = Arc::new((self.generator)(key)?);
        self.cache.lock().expect("cache").insert(key, t.clone());
        Ok(t)
    }

    /// `Lip(T_k)`, bounded by `max_i sup|s_{i,k}|`.
    pub fn lipschitz(&self, k: usize) -> Result<f64> {
        Ok(self.operator(k)?.contraction_factor())
    }

    pub fn uniform_s(&self) -> f64 {
        self.uniform_s
    }

    pub fn uniform_m(&self) -> f64 {
        self.uniform_m
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn period(&self) -> Option<usize> {
        self.period
    }

    pub fn domain(&self) -> Result<DomainBox> {
        Ok(self.operator(1)?.domain().clone())
    }

    /// `M / (1 - s)` for this schedule.
    pub fn invariant_radius(&self) -> Result<f64> {
        invariant_ball_radius(self.uniform_m, self.uniform_s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryResult {
    pub psi: GridFunction,
    pub depth: usize,
    pub direction: Direction,
    /// `s^k * 2R` for backward trajectories, `R` the radius of an invariant
    /// ball containing `f0`; `None` for forward ones.
    pub tail_bound: Option<f64>,
    /// Set when `f0` lies outside the ball of radius `M / (1 - s)`.
    pub warning: Option<Error>,
}

/// `M / (1 - s)`.
pub fn invariant_ball_radius(m: f64, s: f64) -> Result<f64> {
    if !(m >= 0.0) || !(s >= 0.0) {
        return Err(Error::InvalidArgument(format!("need M >= 0 and s >= 0, got M = {m}, s = {s}")));
    }
    if s >= 1.0 - NOT_CONTRACTIVE_BAND {
        return Err(Error::NotContractive { s });
    }
    Ok(m / (1.0 - s))
}

/// Checks `prod_{j<=k} Lip(T_j) <= s^k` for `k <= k_max`; the value is the
/// geometric tail `s / (1 - s)`, infinite when `s >= 1`.
pub fn summability_check(schedule: &OperatorSchedule, k_max: usize) -> Result<ConditionReport> {
    let s = schedule.uniform_s();
    let mut product = 1.0;
    let mut witnesses = Vec::with_capacity(k_max);
    let mut ok = s < 1.0;
    for k in 1..=k_max {
        let lip = schedule.lipschitz(k)?;
        ok &= lip < 1.0;
        product *= lip;
        let bound = s.powi(k as i32);
        let excess = (product - bound).max(0.0);
        if excess > 1e-15 * bound {
            ok = false;
        }
        witnesses.push(Witness { location: k as f64, lhs: product, rhs: bound, gap: excess });
    }
    let tail = if s < 1.0 { s / (1.0 - s) } else { f64::INFINITY };
    Ok(ConditionReport { kind: ConditionKind::Summability, verdict: ok, witnesses, value: Some(tail) })
}

struct Plans<'a> {
    schedule: &'a OperatorSchedule,
    domain: DomainBox,
    resolution: usize,
    by_operator: HashMap<*const RBOperator, (Arc<RBOperator>, Plan)>,
}

impl Plans<'_> {
    fn apply(&mut self, k: usize, f: &GridFunction) -> Result<GridFunction> {
        let t = self.schedule.operator(k)?;
        let key = Arc::as_ptr(&t);
        if !self.by_operator.contains_key(&key) {
            let plan = t.set.plan(&self.domain, self.resolution)?;
            self.by_operator.insert(key, (t.clone(), plan));
        }
        self.by_operator[&key].1.apply(f)
    }
}

fn trajectory(schedule: &OperatorSchedule, f0: &GridFunction, k: usize, direction: Direction) -> Result<TrajectoryResult> {
    if k == 0 {
        return Err(Error::InvalidArgument("trajectory depth must be at least 1".into()));
    }
    let radius = schedule.invariant_radius()?;
    let norm = f0.sup_norm();
    let warning = (norm > radius * (1.0 + 1e-12)).then_some(Error::OutsideInvariantBall { norm, radius });
    let mut plans = Plans {
        schedule,
        domain: f0.domain().clone(),
        resolution: f0.resolution(),
        by_operator: HashMap::new(),
    };
    let mut psi = f0.clone();
    let order: Box<dyn Iterator<Item = usize>> = match direction {
        Direction::Backward => Box::new((1..=k).rev()),
        Direction::Forward => Box::new(1..=k),
    };
    for j in order {
        psi = plans.apply(j, &psi)?;
    }
    let tail_bound = match direction {
        Direction::Backward => Some(schedule.uniform_s().powi(k as i32) * 2.0 * radius.max(norm)),
        Direction::Forward => None,
    };
    Ok(TrajectoryResult { psi, depth: k, direction, tail_bound, warning })
}

/// `Psi_k f0 = T_1(T_2(...T_k(f0)))`.
pub fn backward_trajectory(schedule: &OperatorSchedule, f0: &GridFunction, k: usize) -> Result<TrajectoryResult> {
    trajectory(schedule, f0, k, Direction::Backward)
}

/// `Phi_k f0 = T_k(...T_2(T_1(f0)))`.
pub fn forward_trajectory(schedule: &OperatorSchedule, f0: &GridFunction, k: usize) -> Result<TrajectoryResult> {
    trajectory(schedule, f0, k, Direction::Forward)
}

/// Maps and scale functions of one level of an interpolating schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub maps: Vec<AffineMap>,
    pub scales: Vec<CoefficientFn>,
}

impl Level {
    /// `l_i(x) = (x + i - 1) / n` with the given scales.
    pub fn uniform(scales: Vec<CoefficientFn>) -> Self {
        let n = scales.len() as i128;
        let maps = (0..n).map(|i| AffineMap::ratio((1, n), (i, n))).collect();
        Level { maps, scales }
    }
}

pub type LevelGenerator = Arc<dyn Fn(usize) -> Result<Level> + Send + Sync>;

/// Operators `T_k g = f + sum_i s_{i,k}(l^{-1}) (g - b)(l^{-1})` on `[0, 1]`,
/// i.e. `q_{i,k} = f o l_{i,k} - s_{i,k} b` with `b` the chord of `f`.
#[derive(Clone)]
pub struct InterpolatingSchedule {
    f: CoefficientFn,
    b: Expr,
    levels: LevelGenerator,
    horizon: usize,
    period: Option<usize>,
}

impl fmt::Debug for InterpolatingSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InterpolatingSchedule")
            .field("f", self.f.expr())
            .field("b", &self.b)
            .field("horizon", &self.horizon)
            .field("period", &self.period)
            .finish_non_exhaustive()
    }
}

impl InterpolatingSchedule {
    pub fn new(f: CoefficientFn, levels: LevelGenerator) -> Result<Self> {
        if *f.domain() != DomainBox::closed(0.0, 1.0) {
            return Err(Error::ShapeMismatch("the base function must be defined on [0, 1]".into()));
        }
        if f.value_dim() != 1 {
            return Err(Error::ValueKind("the base function must be real-valued".into()));
        }
        let f0 = scalar(&f, 0.0)?;
        let f1 = scalar(&f, 1.0)?;
        let b = Expr::Num(f1 - f0) * Expr::Var + Expr::Num(f0);
        Ok(InterpolatingSchedule { f, b, levels, horizon: DEFAULT_HORIZON, period: None })
    }

    pub fn with_horizon(mut self, horizon: usize, period: Option<usize>) -> Self {
        self.horizon = horizon;
        self.period = period;
        self
    }

    pub fn base(&self) -> &CoefficientFn {
        &self.f
    }

    /// `b(x) = (f(1) - f(0)) x + f(0)`.
    pub fn chord(&self) -> &Expr {
        &self.b
    }

    pub fn level(&self, k: usize) -> Result<Level> {
        (self.levels)(k)
    }

    /// `P_k`: the level-`k` knots `l_{i,k}(0)`, `l_{n,k}(1)` with the values of `f`.
    pub fn nodes(&self, k: usize) -> Result<Vec<(f64, f64)>> {
        let level = self.level(k)?;
        let mut xs: Vec<f64> = level.maps.iter().flat_map(|m| [m.apply(&[0.0])[0], m.apply(&[1.0])[0]]).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
        xs.into_iter().map(|x| Ok((x, scalar(&self.f, x)?))).collect()
    }

    /// `(|f| + s |b|) / (1 - s)`.
    pub fn invariant_radius(&self, s: f64) -> Result<f64> {
        let b_norm = scalar_expr(&self.b, 0.0)?.abs().max(scalar_expr(&self.b, 1.0)?.abs());
        if s >= 1.0 - NOT_CONTRACTIVE_BAND {
            return Err(Error::NotContractive { s });
        }
        Ok((self.f.sup_bound() + s * b_norm) / (1.0 - s))
    }

    fn operator(&self, k: usize) -> Result<RBOperator> {
        let level = self.level(k)?;
        let domain = DomainBox::closed(0.0, 1.0);
        if level.maps.is_empty() || level.maps.len() != level.scales.len() {
            return Err(Error::ShapeMismatch(format!("level {k} has {} maps and {} scales", level.maps.len(), level.scales.len())));
        }
        let partition = Partition::new(domain.clone(), level.maps)?;
        let report = partition.verify();
        let first = &report.images[0].sides[0];
        let last = &report.images[report.images.len() - 1].sides[0];
        let first_map = partition.map(report.images[0].index);
        let last_map = partition.map(report.images[report.images.len() - 1].index);
        if first.lo != 0.0 || last.hi != 1.0 || first_map.apply(&[0.0])[0] != 0.0 || last_map.apply(&[1.0])[0] != 1.0 {
            return Err(Error::EndpointMismatch { level: k });
        }
        let mut q = Vec::with_capacity(partition.len());
        for (m, s) in partition.maps().iter().zip(&level.scales) {
            let l = Expr::Num(m.scale()[0]) * Expr::Var + Expr::Num(m.offset()[0]);
            let expr = self.f.expr().substitute_x(&l) - s.expr().clone() * self.b.clone();
            q.push(CoefficientFn::new(expr, domain.clone())?);
        }
        RBOperator::new(partition, q, level.scales)
    }
}

fn scalar(c: &CoefficientFn, x: f64) -> Result<f64> {
    c.eval_clamped(&[x])?.as_scalar().ok_or_else(|| Error::ValueKind("expected a real value".into()))
}

fn scalar_expr(e: &Expr, x: f64) -> Result<f64> {
    e.eval(&[x])?.as_scalar().ok_or_else(|| Error::ValueKind("expected a real value".into()))
}

pub fn build_interpolating_schedule(spec: &InterpolatingSchedule) -> Result<OperatorSchedule> {
    let shared = spec.clone();
    let sched = OperatorSchedule::new(Arc::new(move |k| shared.operator(k)), spec.horizon, spec.period)?;
    if sched.uniform_s() >= 1.0 {
        let index = 0;
        return Err(Error::ScaleTooLarge { index, bound: sched.uniform_s() });
    }
    Ok(sched)
}

/// `|psi(x) - y| <= tol` at every node.
pub fn check_interpolation(psi: &GridFunction, nodes: &[(f64, f64)], tol: f64) -> Result<ConditionReport> {
    let witnesses = nodes
        .iter()
        .map(|&(x, y)| Ok(Witness::equality(x, psi.eval(&[x])?[0], y)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConditionReport::from_gaps(ConditionKind::Interpolation, witnesses, tol))
}

/// Named operators on `[0, 1]`: `takagi`, `parabola`, `kiesswetter`, `casino`.
pub fn builtin_operator(name: &str) -> Result<RBOperator> {
    let unit = DomainBox::closed(0.0, 1.0);
    let halves = || vec![AffineMap::ratio((1, 2), (0, 1)), AffineMap::ratio((1, 2), (1, 2))];
    match name {
        "takagi" => RBOperator::from_exprs(unit, halves(), &["x", "1 - x"], &["1/2", "1/2"]),
        "parabola" => RBOperator::from_exprs(unit, halves(), &["x", "1 - x"], &["1/4", "1/4"]),
        "kiesswetter" => {
            let maps = (0..4).map(|i| AffineMap::ratio((1, 4), (i, 4))).collect();
            RBOperator::from_exprs(unit, maps, &["0", "-1/2", "0", "1/2"], &["-1/2", "1/2", "1/2", "1/2"])
        }
        "casino" => RBOperator::from_exprs(unit, halves(), &["0", "3/4"], &["3/4", "1/4"]),
        _ => Err(Error::UnknownName(name.to_string())),
    }
}

/// `T_k = A` for `10(j-1) < k <= 10j - 5` and `B` for `10j - 5 < k <= 10j`,
/// with `(A, B)` = (takagi, parabola) or (kiesswetter, casino).
pub fn builtin_schedule(name: &str) -> Result<OperatorSchedule> {
    let (a, b) = match name {
        "takagi_parabola" => ("takagi", "parabola"),
        "kiesswetter_casino" => ("kiesswetter", "casino"),
        _ => return Err(Error::UnknownName(name.to_string())),
    };
    OperatorSchedule::blocks(vec![(builtin_operator(a)?, 5), (builtin_operator(b)?, 5)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::sup_distance;

    fn unit() -> DomainBox {
        DomainBox::closed(0.0, 1.0)
    }

    #[test]
    fn radius_arithmetic() {
        assert_eq!(invariant_ball_radius(1.0, 0.5).unwrap(), 2.0);
        assert_eq!(invariant_ball_radius(0.0, 0.3).unwrap(), 0.0);
        assert!(matches!(invariant_ball_radius(1.0, 1.0), Err(Error::NotContractive { .. })));
    }

    #[test]
    fn builtin_factors() {
        assert_eq!(builtin_operator("takagi").unwrap().contraction_factor(), 0.5);
        assert_eq!(builtin_operator("parabola").unwrap().contraction_factor(), 0.25);
        assert_eq!(builtin_operator("kiesswetter").unwrap().contraction_factor(), 0.5);
        assert_eq!(builtin_operator("casino").unwrap().contraction_factor(), 0.75);
        assert_eq!(builtin_operator("weierstrass").unwrap_err(), Error::UnknownName("weierstrass".into()));
        assert_eq!(builtin_schedule("takagi_parabola").unwrap().uniform_s(), 0.5);
        assert_eq!(builtin_schedule("kiesswetter_casino").unwrap().uniform_s(), 0.75);
    }

    #[test]
    fn block_pattern() {
        let sched = builtin_schedule("takagi_parabola").unwrap();
        let takagi = builtin_operator("takagi").unwrap();
        let parabola = builtin_operator("parabola").unwrap();
        for k in 1..=25 {
            let want = if (k - 1) % 10 < 5 { &takagi } else { &parabola };
            assert_eq!(&*sched.operator(k).unwrap(), want, "k = {k}");
        }
    }

    #[test]
    fn takagi_value_at_half() {
        let t = builtin_operator("takagi").unwrap();
        let f0 = GridFunction::zeros(unit(), 257, 1).unwrap();
        let r = t.iterate_to_fixed_point(&f0, 1e-9, 200).unwrap();
        assert!((r.psi.eval(&[0.5]).unwrap()[0] - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn parabola_limit() {
        let t = builtin_operator("parabola").unwrap();
        let f0 = GridFunction::zeros(unit(), 257, 1).unwrap();
        let r = t.iterate_to_fixed_point(&f0, 1e-10, 200).unwrap();
        let q = GridFunction::from_fn(unit(), 257, 1, |x| vec![4.0 * x[0] * (1.0 - x[0])]).unwrap();
        assert!(sup_distance(&r.psi, &q).unwrap() <= r.apriori_bound);
    }

    #[test]
    fn summability_tails() {
        let half = summability_check(&builtin_schedule("takagi_parabola").unwrap(), 30).unwrap();
        assert!(half.verdict);
        assert_eq!(half.value, Some(1.0));
        let thirds = OperatorSchedule::constant(
            RBOperator::from_exprs(unit(), vec![AffineMap::ratio((1, 2), (0, 1)), AffineMap::ratio((1, 2), (1, 2))], &["0", "0"], &["2/3", "2/3"]).unwrap(),
        );
        let r = summability_check(&thirds, 10).unwrap();
        assert!((r.value.unwrap() - 2.0).abs() < 1e-12);
        let one = OperatorSchedule::constant(
            RBOperator::from_exprs(unit(), vec![AffineMap::ratio((1, 2), (0, 1)), AffineMap::ratio((1, 2), (1, 2))], &["0", "0"], &["1", "1/2"]).unwrap(),
        );
        assert!(!summability_check(&one, 10).unwrap().verdict);
    }

    #[test]
    fn stationary_reduction() {
        let t = builtin_operator("takagi").unwrap();
        let sched = OperatorSchedule::constant(t.clone());
        let f0 = GridFunction::from_fn(unit(), 129, 1, |x| vec![x[0].sin()]).unwrap();
        for k in [1, 2, 7] {
            let want = t.power(&f0, k).unwrap();
            assert_eq!(backward_trajectory(&sched, &f0, k).unwrap().psi, want);
            assert_eq!(forward_trajectory(&sched, &f0, k).unwrap().psi, want);
        }
    }

    #[test]
    fn order_of_composition() {
        let sched = builtin_schedule("takagi_parabola").unwrap();
        let t1 = builtin_operator("takagi").unwrap();
        let f0 = GridFunction::from_fn(unit(), 129, 1, |x| vec![x[0]]).unwrap();
        let b = backward_trajectory(&sched, &f0, 1).unwrap();
        assert_eq!(b.psi, t1.apply(&f0).unwrap());
        assert_eq!(forward_trajectory(&sched, &f0, 1).unwrap().psi, b.psi);
        assert!(b.warning.is_none());
    }

    #[test]
    fn backward_tail_bound() {
        let sched = builtin_schedule("takagi_parabola").unwrap();
        let f0 = GridFunction::zeros(unit(), 513, 1).unwrap();
        let a = backward_trajectory(&sched, &f0, 20).unwrap();
        let b = backward_trajectory(&sched, &f0, 25).unwrap();
        assert!(sup_distance(&a.psi, &b.psi).unwrap() <= a.tail_bound.unwrap());
    }

    #[test]
    fn outside_ball_is_a_warning() {
        let sched = builtin_schedule("takagi_parabola").unwrap();
        let f0 = GridFunction::constant(unit(), 33, &[10.0]).unwrap();
        let r = backward_trajectory(&sched, &f0, 3).unwrap();
        assert!(matches!(r.warning, Some(Error::OutsideInvariantBall { .. })));
    }

    fn sine_schedule(scale: f64) -> InterpolatingSchedule {
        let f = CoefficientFn::parse("sin(pi*x)/2 + x", unit()).unwrap();
        let levels: LevelGenerator = Arc::new(move |k| {
            let n = 1 << (2 + (k - 1) % 2);
            let scales = (0..n).map(|_| CoefficientFn::constant(scale, unit())).collect();
            Ok(Level::uniform(scales))
        });
        InterpolatingSchedule::new(f, levels).unwrap().with_horizon(2, Some(2))
    }

    #[test]
    fn chord_of_base() {
        let spec = sine_schedule(0.3);
        let b = spec.chord();
        assert!((b.eval(&[0.0]).unwrap().as_scalar().unwrap()).abs() < 1e-15);
        assert!((b.eval(&[1.0]).unwrap().as_scalar().unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_scales_return_the_base() {
        let spec = sine_schedule(0.0);
        let sched = build_interpolating_schedule(&spec).unwrap();
        let g = GridFunction::from_fn(unit(), 65, 1, |x| vec![x[0] * x[0]]).unwrap();
        let tg = sched.operator(1).unwrap().apply(&g).unwrap();
        for i in 0..65 {
            let x = tg.node(i)[0];
            let f = (std::f64::consts::PI * x).sin() / 2.0 + x;
            assert!((tg.value(i)[0] - f).abs() < 1e-12);
        }
    }

    #[test]
    fn interpolating_trajectory_hits_nodes() {
        let spec = sine_schedule(0.4);
        let sched = build_interpolating_schedule(&spec).unwrap();
        let f0 = GridFunction::from_fn(unit(), 257, 1, |x| vec![x[0]]).unwrap();
        let r = backward_trajectory(&sched, &f0, 12).unwrap();
        // Psi_k = T_1(...), so it interpolates the level-1 nodes exactly
        let report = check_interpolation(&r.psi, &spec.nodes(1).unwrap(), 1e-12).unwrap();
        assert!(report.verdict, "{report}");
        let mut wrong = spec.nodes(1).unwrap();
        wrong[1].1 += 0.1;
        assert!(!check_interpolation(&r.psi, &wrong, 1e-6).unwrap().verdict);
    }

    #[test]
    fn endpoint_mismatch() {
        let f = CoefficientFn::parse("x", unit()).unwrap();
        let levels: LevelGenerator = Arc::new(|_| {
            Ok(Level {
                maps: vec![AffineMap::ratio((-1, 2), (1, 2)), AffineMap::ratio((1, 2), (1, 2))],
                scales: vec![CoefficientFn::constant(0.1, DomainBox::closed(0.0, 1.0)); 2],
            })
        });
        let spec = InterpolatingSchedule::new(f, levels).unwrap().with_horizon(1, Some(1));
        assert_eq!(build_interpolating_schedule(&spec).unwrap_err(), Error::EndpointMismatch { level: 1 });
    }
}
