//! Global RB operators `Tf = q_i(l_i^{-1} x) + s_i(l_i^{-1} x) f(l_i^{-1} x)` on
//! bounded real-valued functions.
//!
//! On a grid, values of `f` off the nodes come from multilinear interpolation,
//! which is a convex combination of node values. The discrete operator is
//! therefore a contraction with the same factor `s` as the continuous one, and
//! the a-priori bound `s^k / (1 - s) * |psi_1 - psi_0|` is a true bound on the
//! distance to the discrete fixed point. The distance from the discrete to the
//! continuous fixed point is an `O(h)` interpolation term, zero when every
//! `l_i^{-1}` maps nodes onto nodes.

use num_traits::{CheckedDiv, CheckedMul, CheckedSub};

use crate::coefficient::CoefficientFn;
use crate::engine::{PieceSet, Product};
use crate::error::{Error, Result};
use crate::expr::{parse_expr, Expr};
use crate::geometry::{AffineMap, DomainBox, Partition, Rational, exact_from_f64};
use crate::grid::GridFunction;
use crate::report::{ConditionKind, ConditionReport, Witness};

/// Relative tolerance used to recognise endpoints of the domain.
const ENDPOINT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointResult {
    pub psi: GridFunction,
    pub iterations: usize,
    pub contraction_s: f64,
    /// `s^k / (1 - s) * |psi_1 - psi_0|`.
    pub apriori_bound: f64,
    /// `|T psi_k - psi_k|`, for diagnostics.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AddressEval {
    pub value: f64,
    pub error_bound: f64,
    /// Piece indices `i_1, ..., i_m` (0-based), outermost first.
    pub address: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RBOperator {
    pub(crate) set: PieceSet,
}

impl RBOperator {
    pub fn new(partition: Partition, q: Vec<CoefficientFn>, s: Vec<CoefficientFn>) -> Result<Self> {
        if !partition.is_global() {
            return Err(Error::InvalidArgument("global operators need every map defined on the whole domain".into()));
        }
        Ok(RBOperator { set: PieceSet::new(partition, q, s, Product::Scalar)? })
    }

    /// Build from map coefficients and expression sources.
    pub fn from_exprs(domain: DomainBox, maps: Vec<AffineMap>, q: &[&str], s: &[&str]) -> Result<Self> {
        let partition = Partition::new(domain.clone(), maps)?;
        let parse = |src: &&str| CoefficientFn::parse(src, domain.clone());
        let q = q.iter().map(parse).collect::<Result<Vec<_>>>()?;
        let s = s.iter().map(parse).collect::<Result<Vec<_>>>()?;
        RBOperator::new(partition, q, s)
    }

    pub fn partition(&self) -> &Partition {
        &self.set.partition
    }

    pub fn q(&self) -> &[CoefficientFn] {
        &self.set.q
    }

    pub fn s(&self) -> &[CoefficientFn] {
        &self.set.s
    }

    pub fn domain(&self) -> &DomainBox {
        self.set.partition.domain()
    }

    /// `max_i sup |s_i|`, the Lipschitz constant of `T` on bounded functions.
    pub fn contraction_factor(&self) -> f64 {
        self.set.contraction()
    }

    /// `max_i sup |q_i|`.
    pub fn q_bound(&self) -> f64 {
        self.set.max_q()
    }

    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        self.set.apply(f)
    }

    /// `T^k f0`.
    pub fn power(&self, f0: &GridFunction, k: usize) -> Result<GridFunction> {
        self.set.power(f0, k)
    }

    /// Banach iteration from `f0` until the a-priori bound is at most `eps`.
    pub fn iterate_to_fixed_point(&self, f0: &GridFunction, eps: f64, k_max: usize) -> Result<FixedPointResult> {
        self.set.iterate(f0, eps, k_max)
    }

    /// `T^m` applied to the constant `f0_value`, evaluated at `x` without a grid.
    ///
    /// The address of `x` is found by repeatedly locating the current point and
    /// pulling it back; the self-referential equation is then unwound from the
    /// innermost level. The distance to `psi(x)` is at most
    /// `s^m (|f0_value| + max|q| / (1 - s))`.
    pub fn evaluate_by_address(&self, x: &[f64], depth: usize, f0_value: f64) -> Result<AddressEval> {
        if depth == 0 {
            return Err(Error::InvalidArgument("address depth must be at least 1".into()));
        }
        if !self.domain().contains_closure(x) {
            return Err(Error::DomainError { point: x.to_vec() });
        }
        let mut p = x.to_vec();
        let mut steps = Vec::with_capacity(depth);
        for _ in 0..depth {
            let st = self.set.step(&p)?;
            p = st.xi.clone();
            steps.push(st);
        }
        let mut v = f0_value;
        for st in steps.iter().rev() {
            v = st.q[0] + st.s[0] * v;
        }
        let s = self.contraction_factor();
        let error_bound = if s < 1.0 {
            s.powi(depth as i32) * (f0_value.abs() + self.q_bound() / (1.0 - s))
        } else {
            f64::INFINITY
        };
        Ok(AddressEval { value: v, error_bound, address: steps.iter().map(|st| st.piece).collect() })
    }

    /// `q_i(x) + s_i(x) psi(x)` for piece `i` at a point of the domain.
    fn rhs(&self, i: usize, x: f64, psi_x: f64) -> Result<f64> {
        let q = self.set.q[i].eval_clamped(&[x])?.as_scalar().expect("real q");
        let s = self.set.s[i].eval_clamped(&[x])?.as_scalar().expect("real s");
        Ok(q + s * psi_x)
    }

    fn require_1d(&self) -> Result<()> {
        if self.domain().dim() != 1 {
            return Err(Error::InvalidArgument("only available in one dimension".into()));
        }
        Ok(())
    }

    /// Check the compatibility conditions at every point shared by two closed
    /// images (contact points, and grid nodes of overlaps) against `psi`.
    pub fn check_compatibility(&self, psi: &GridFunction, tol: f64) -> Result<ConditionReport> {
        self.require_1d()?;
        let report = self.partition().verify();
        let mut witnesses = Vec::new();
        let psi_at = |x: f64| -> Result<f64> { Ok(psi.eval(&[x])?[0]) };
        for c in &report.contacts {
            let lhs = self.rhs(c.left, c.left_preimage, psi_at(c.left_preimage)?)?;
            let rhs = self.rhs(c.right, c.right_preimage, psi_at(c.right_preimage)?)?;
            witnesses.push(Witness::equality(c.point, lhs, rhs));
        }
        for &(i, j) in &report.overlaps {
            let (a, b) = (self.partition().image(i), self.partition().image(j));
            let lo = a.lo()[0].max(b.lo()[0]);
            let hi = a.hi()[0].min(b.hi()[0]);
            for n in 0..psi.node_count() {
                let p = psi.node(n)[0];
                if p < lo || p > hi {
                    continue;
                }
                let x1 = self.partition().inverse(i).apply(&[p])[0];
                let x2 = self.partition().inverse(j).apply(&[p])[0];
                let lhs = self.rhs(i, x1, psi_at(x1)?)?;
                let rhs = self.rhs(j, x2, psi_at(x2)?)?;
                witnesses.push(Witness::equality(p, lhs, rhs));
            }
        }
        Ok(ConditionReport::from_gaps(ConditionKind::Compatibility, witnesses, tol))
    }

    /// Values of the fixed point at the ends of the interval from the
    /// self-referential equation there. With a single map, the value at the
    /// fixed point of `l_1` instead.
    pub fn boundary_values(&self) -> Result<Vec<(f64, f64)>> {
        self.require_1d()?;
        let dom = self.domain();
        let (x0, xn) = (dom.lo()[0], dom.hi()[0]);
        if self.partition().len() == 1 {
            let p = self.partition().map(0).fixed_point_1d().ok_or_else(|| {
                Error::InvalidArgument("the single map has no unique fixed point".into())
            })?;
            let v = self.solve_fixed(0, p)?;
            return Ok(vec![(p, v)]);
        }
        let ends = [x0, xn];
        let mut eq = Vec::with_capacity(2);
        for &end in &ends {
            let i = self.partition().locate(&[end]).ok_or(Error::PartitionGap { point: vec![end] })?;
            let e = self.partition().inverse(i).apply(&[end])[0];
            let which = if near(e, x0, dom) {
                0
            } else if near(e, xn, dom) {
                1
            } else {
                return Err(Error::InvalidArgument(format!("the map owning {end} does not send an endpoint to it")));
            };
            eq.push((i, ends[which], which));
        }
        let diagonal = eq[0].2 == 0 && eq[1].2 == 1;
        if diagonal {
            let a = self.solve_fixed(eq[0].0, x0)?;
            let b = self.solve_fixed(eq[1].0, xn)?;
            return Ok(vec![(x0, a), (xn, b)]);
        }
        // psi(end_r) = q + s psi(e_r): a 2x2 linear system in (psi(x0), psi(xn)).
        let mut m = [[1.0, 0.0], [0.0, 1.0]];
        let mut rhs = [0.0; 2];
        for (r, &(i, e, which)) in eq.iter().enumerate() {
            let q = self.set.q[i].eval_clamped(&[e])?.as_scalar().expect("real q");
            let s = self.set.s[i].eval_clamped(&[e])?.as_scalar().expect("real s");
            m[r][which] -= s;
            rhs[r] = q;
        }
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det == 0.0 {
            return Err(Error::DegenerateScale { point: x0 });
        }
        let a = (rhs[0] * m[1][1] - m[0][1] * rhs[1]) / det;
        let b = (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / det;
        Ok(vec![(x0, a), (xn, b)])
    }

    /// `psi(p) = q_i(p) / (1 - s_i(p))` at a fixed point `p` of `l_i`.
    fn solve_fixed(&self, i: usize, p: f64) -> Result<f64> {
        let q = self.set.q[i].eval_clamped(&[p])?.as_scalar().expect("real q");
        let s = self.set.s[i].eval_clamped(&[p])?.as_scalar().expect("real s");
        if 1.0 - s == 0.0 {
            return Err(Error::DegenerateScale { point: p });
        }
        Ok(q / (1.0 - s))
    }

    /// Join-up conditions at every junction of adjacent images, using the
    /// endpoint values from [`RBOperator::boundary_values`].
    pub fn check_continuity(&self, tol: f64) -> Result<ConditionReport> {
        self.require_1d()?;
        let report = self.partition().verify();
        if !report.covers || !report.disjoint {
            return Ok(ConditionReport { kind: ConditionKind::Continuous, verdict: false, witnesses: vec![], value: None });
        }
        if self.partition().len() == 1 {
            return Ok(ConditionReport::from_gaps(ConditionKind::Continuous, vec![], tol));
        }
        let bv = self.boundary_values()?;
        let dom = self.domain();
        let psi_end = |e: f64| if near(e, bv[0].0, dom) { bv[0].1 } else { bv[1].1 };
        let mut witnesses = Vec::new();
        for w in report.images.windows(2) {
            let (a, b) = (w[0].index, w[1].index);
            let p = w[1].sides[0].lo;
            let ea = self.image_end_preimage(a, true);
            let eb = self.image_end_preimage(b, false);
            let left = self.rhs(a, ea, psi_end(ea))?;
            let right = self.rhs(b, eb, psi_end(eb))?;
            witnesses.push(Witness::equality(p, left, right));
        }
        Ok(ConditionReport::from_gaps(ConditionKind::Continuous, witnesses, tol))
    }

    fn image_end_preimage(&self, i: usize, right: bool) -> f64 {
        let dom = self.domain();
        let positive = self.partition().map(i).scale()[0] > 0.0;
        if right == positive {
            dom.hi()[0]
        } else {
            dom.lo()[0]
        }
    }

    /// `sum_i lambda_i sup|s_i|^p < 1` with `lambda_i = |(l_i^{-1})'|`
    /// (the product over dimensions), or `max_i sup|s_i| < 1` for `p = inf`.
    ///
    /// Witness `i` carries `lambda_i` as `lhs`, `sup|s_i|` as `rhs` and the
    /// term `lambda_i sup|s_i|^p` as `gap`.
    pub fn lp_certificate(&self, p: f64) -> Result<ConditionReport> {
        let weights: Vec<f64> = self.partition().maps().iter().map(|m| 1.0 / m.jacobian()).collect();
        let bounds: Vec<f64> = self.set.s.iter().map(CoefficientFn::sup_bound).collect();
        lp_report(&weights, &bounds, p)
    }
}

fn near(a: f64, b: f64, dom: &DomainBox) -> bool {
    (a - b).abs() <= ENDPOINT_TOL * dom.width(0).max(1.0)
}

pub(crate) fn lp_report(weights: &[f64], bounds: &[f64], p: f64) -> Result<ConditionReport> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidArgument(format!("p must lie in [1, inf], got {p}")));
    }
    let witnesses: Vec<Witness> = weights
        .iter()
        .zip(bounds)
        .enumerate()
        .map(|(i, (l, s))| {
            let term = if p.is_infinite() { *s } else { l * s.powf(p) };
            Witness { location: i as f64, lhs: *l, rhs: *s, gap: term }
        })
        .collect();
    let value = if p.is_infinite() {
        bounds.iter().cloned().fold(0.0, f64::max)
    } else {
        witnesses.iter().map(|w| w.gap).sum()
    };
    Ok(ConditionReport { kind: ConditionKind::Lp, verdict: value < 1.0, witnesses, value: Some(value) })
}

/// The RB operator whose fixed point interpolates `data` on `[x_0, x_n]`.
///
/// `l_i` maps `[x_0, x_n]` onto `[x_{i-1}, x_i]` preserving orientation, and
/// `q_i` is the affine function with `q_i(x_0) = y_{i-1} - s_i(x_0) y_0` and
/// `q_i(x_n) = y_i - s_i(x_n) y_n`, so that the self-referential equation
/// forces `psi(x_j) = y_j` and continuity at every knot.
pub fn build_fif(data: &[(f64, f64)], scales: &[CoefficientFn]) -> Result<RBOperator> {
    if data.len() < 2 {
        return Err(Error::InvalidArgument("need at least two data points".into()));
    }
    if data.windows(2).any(|w| !(w[0].0 < w[1].0)) {
        return Err(Error::UnsortedData);
    }
    let n = data.len() - 1;
    if scales.len() != n {
        return Err(Error::ShapeMismatch(format!("{n} intervals but {} scale functions", scales.len())));
    }
    let (x0, y0) = data[0];
    let (xn, yn) = data[n];
    let domain = DomainBox::closed(x0, xn);
    let mut maps = Vec::with_capacity(n);
    let mut q = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    for i in 1..=n {
        let sc = if *scales[i - 1].domain() == domain {
            scales[i - 1].clone()
        } else {
            scales[i - 1].restrict(domain.clone())?
        };
        if sc.sup_bound() >= 1.0 {
            return Err(Error::ScaleTooLarge { index: i - 1, bound: sc.sup_bound() });
        }
        if sc.value_dim() != 1 {
            return Err(Error::ValueKind("scale functions must be real-valued".into()));
        }
        let (xa, ya) = data[i - 1];
        let (xb, yb) = data[i];
        maps.push(interval_map(x0, xn, xa, xb));
        let s0 = sc.eval_clamped(&[x0])?.as_scalar().expect("real");
        let sn = sc.eval_clamped(&[xn])?.as_scalar().expect("real");
        let left = ya - s0 * y0;
        let right = yb - sn * yn;
        let slope = (right - left) / (xn - x0);
        let expr = Expr::Num(slope) * Expr::Var + Expr::Num(left - slope * x0);
        q.push(CoefficientFn::new(expr, domain.clone())?);
        s.push(sc);
    }
    RBOperator::new(Partition::new(domain, maps)?, q, s)
}

/// The orientation-preserving affine map of `[x0, xn]` onto `[xa, xb]`,
/// exact when the rational arithmetic does not overflow.
pub(crate) fn interval_map(x0: f64, xn: f64, xa: f64, xb: f64) -> AffineMap {
    let exact = (|| {
        let (x0, xn, xa, xb) = (exact_from_f64(x0)?, exact_from_f64(xn)?, exact_from_f64(xa)?, exact_from_f64(xb)?);
        let a: Rational = xb.checked_sub(&xa)?.checked_div(&xn.checked_sub(&x0)?)?;
        let b = xa.checked_sub(&a.checked_mul(&x0)?)?;
        Some((a, b))
    })();
    match exact {
        Some((a, b)) => AffineMap::from_rationals(vec![a], vec![b]),
        None => {
            let a = (xb - xa) / (xn - x0);
            AffineMap::linear(a, xa - a * x0)
        }
    }
}

/// Parse-and-certify helper used by the fixtures and the CLI.
pub fn coefficient(src: &str, domain: &DomainBox) -> Result<CoefficientFn> {
    CoefficientFn::new(parse_expr(src)?, domain.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::sup_distance;

    fn example1() -> RBOperator {
        RBOperator::from_exprs(
            DomainBox::half_open(0.0, 1.0),
            vec![AffineMap::ratio((1, 3), (0, 1)), AffineMap::ratio((2, 3), (1, 3))],
            &["-1", "x"],
            &["0.5*sin(x)", "-2/3*cos(x)"],
        )
        .unwrap()
    }

    fn continuous_example(q2: &str) -> RBOperator {
        RBOperator::from_exprs(
            DomainBox::closed(0.0, 1.0),
            vec![AffineMap::ratio((1, 3), (0, 1)), AffineMap::ratio((2, 3), (1, 3))],
            &["x", q2],
            &["0.5*sin(x)", "-2/3*cos(x)"],
        )
        .unwrap()
    }

    fn halves(q: &[&str], s: &[&str]) -> RBOperator {
        RBOperator::from_exprs(
            DomainBox::closed(0.0, 1.0),
            vec![AffineMap::ratio((1, 2), (0, 1)), AffineMap::ratio((1, 2), (1, 2))],
            q,
            s,
        )
        .unwrap()
    }

    #[test]
    fn contraction_factor_examples() {
        let s = example1().contraction_factor();
        assert!((2.0 / 3.0..=2.0 / 3.0 + 1e-3).contains(&s), "{s}");
        assert_eq!(halves(&["x", "x"], &["0", "0"]).contraction_factor(), 0.0);
        assert_eq!(halves(&["x", "x"], &["1/2", "1/4"]).contraction_factor(), 0.5);
    }

    #[test]
    fn apply_to_zero_gives_q() {
        let t = example1();
        let zero = GridFunction::zeros(t.domain().clone(), 2188, 1).unwrap();
        let tf = t.apply(&zero).unwrap();
        assert_eq!(tf.value(0), &[-1.0]);
        let x = tf.node(1500)[0];
        let xi = 1.5 * x - 0.5;
        assert!((tf.value(1500)[0] - xi).abs() < 1e-15);
    }

    #[test]
    fn zero_scales_make_apply_constant_in_f() {
        let t = halves(&["x", "1-x"], &["0", "0"]);
        let a = GridFunction::zeros(t.domain().clone(), 65, 1).unwrap();
        let b = GridFunction::from_fn(t.domain().clone(), 65, 1, |x| vec![x[0].sin() * 7.0]).unwrap();
        assert_eq!(t.apply(&a).unwrap(), t.apply(&b).unwrap());
    }

    #[test]
    fn example1_fixed_point() {
        let t = example1();
        let f0 = GridFunction::zeros(t.domain().clone(), 2188, 1).unwrap();
        let r = t.iterate_to_fixed_point(&f0, 1e-8, 200).unwrap();
        assert!(r.apriori_bound <= 1e-8);
        assert!((r.psi.value(0)[0] + 1.0).abs() <= 1e-8);
        let d1 = sup_distance(&t.apply(&f0).unwrap(), &f0).unwrap();
        let s = r.contraction_s;
        let k_max = ((1e-8 * (1.0 - s) / d1).ln() / s.ln()).ceil() as usize;
        assert!(r.iterations <= k_max);
    }

    #[test]
    fn zero_q_gives_zero_fixed_point() {
        let t = halves(&["0", "0"], &["0.5*x", "-0.3"]);
        let f0 = GridFunction::from_fn(t.domain().clone(), 33, 1, |x| vec![x[0] * 3.0 - 1.0]).unwrap();
        let r = t.iterate_to_fixed_point(&f0, 1e-10, 200).unwrap();
        assert!(r.psi.sup_norm() <= 1e-10);
    }

    #[test]
    fn not_contractive_is_refused() {
        let t = halves(&["x", "x"], &["1.5", "0"]);
        let f0 = GridFunction::zeros(t.domain().clone(), 9, 1).unwrap();
        assert!(matches!(t.iterate_to_fixed_point(&f0, 1e-9, 10), Err(Error::NotContractive { .. })));
        let t = halves(&["x", "x"], &["1", "0"]);
        assert!(matches!(t.iterate_to_fixed_point(&f0, 1e-9, 10), Err(Error::NotContractive { .. })));
    }

    #[test]
    fn max_iterations_reported() {
        let t = halves(&["x", "1-x"], &["0.9", "0.9"]);
        let f0 = GridFunction::zeros(t.domain().clone(), 9, 1).unwrap();
        assert!(matches!(t.iterate_to_fixed_point(&f0, 1e-12, 5), Err(Error::MaxIterations { iterations: 5, .. })));
    }

    #[test]
    fn address_evaluation_at_the_origin() {
        let t = example1();
        for depth in [1, 5, 30] {
            let r = t.evaluate_by_address(&[0.0], depth, 0.0).unwrap();
            assert_eq!(r.value, -1.0);
            assert!(r.address.iter().all(|&i| i == 0));
        }
        let r = t.evaluate_by_address(&[0.0], 3, 0.0).unwrap();
        let s = t.contraction_factor();
        assert!((r.error_bound - s.powi(3) * 1.0 / (1.0 - s)).abs() < 1e-12);
    }

    #[test]
    fn address_depth_one() {
        let t = example1();
        let x = 0.8;
        let r = t.evaluate_by_address(&[x], 1, 2.0).unwrap();
        let xi: f64 = 1.5 * x - 0.5;
        assert!((r.value - (xi - 2.0 / 3.0 * xi.cos() * 2.0)).abs() < 1e-15);
    }

    #[test]
    fn compatibility_is_vacuous_for_half_open_example() {
        let t = example1();
        let psi = GridFunction::zeros(t.domain().clone(), 10, 1).unwrap();
        let r = t.check_compatibility(&psi, 1e-9).unwrap();
        assert!(r.verdict && r.witnesses.is_empty());
    }

    #[test]
    fn continuous_example_boundary_values_and_compatibility() {
        let t = continuous_example("1-x");
        assert_eq!(t.boundary_values().unwrap(), vec![(0.0, 0.0), (1.0, 0.0)]);
        let f0 = GridFunction::zeros(t.domain().clone(), 2188, 1).unwrap();
        let psi = t.iterate_to_fixed_point(&f0, 1e-10, 200).unwrap().psi;
        let r = t.check_compatibility(&psi, 1e-9).unwrap();
        assert!(r.verdict);
        assert_eq!(r.witnesses.len(), 1);
        assert!((r.witnesses[0].lhs - 1.0).abs() < 1e-12 && (r.witnesses[0].rhs - 1.0).abs() < 1e-12);
        let c = t.check_continuity(1e-9).unwrap();
        assert!(c.verdict && c.max_gap() <= 1e-9);

        let bumped = continuous_example("1-x+0.1");
        let r = bumped.check_compatibility(&psi, 1e-9).unwrap();
        assert!(!r.verdict);
        assert!((r.max_gap() - 0.1).abs() < 1e-9);
    }

    #[test]
    fn perturbed_continuity_gap_matches_hand_computation() {
        for delta in [0.1, 0.2] {
            let t = continuous_example(&format!("1-x+{delta}"));
            let r = t.check_continuity(1e-9).unwrap();
            assert!(!r.verdict);
            let psi1 = delta / (1.0 + 2.0 / 3.0 * 1f64.cos());
            let want = ((1.0 + 0.5 * 1f64.sin() * psi1) - (1.0 + delta)).abs();
            assert!((r.max_gap() - want).abs() < 1e-12, "{} vs {want}", r.max_gap());
        }
    }

    #[test]
    fn boundary_value_formula() {
        let t = halves(&["1", "0"], &["1/2", "0"]);
        assert_eq!(t.boundary_values().unwrap()[0], (0.0, 2.0));
        let e1 = example1().boundary_values().unwrap();
        assert_eq!(e1[0], (0.0, -1.0));
    }

    #[test]
    fn degenerate_scale() {
        let t = halves(&["1", "0"], &["1", "0"]);
        assert!(matches!(t.boundary_values(), Err(Error::DegenerateScale { .. })));
    }

    #[test]
    fn reversed_map_boundary_values_solve_the_coupled_system() {
        // l1 reverses orientation, so psi(0) depends on psi(1).
        let t = RBOperator::from_exprs(
            DomainBox::closed(0.0, 1.0),
            vec![AffineMap::ratio((-1, 2), (1, 2)), AffineMap::ratio((1, 2), (1, 2))],
            &["1", "x"],
            &["1/4", "1/2"],
        )
        .unwrap();
        let bv = t.boundary_values().unwrap();
        // psi(1) = 1 + psi(1)/2 = 2, psi(0) = q1(1) + s1 psi(1) = 1 + 1/2.
        assert!((bv[1].1 - 2.0).abs() < 1e-15);
        assert!((bv[0].1 - 1.5).abs() < 1e-15);
    }

    #[test]
    fn takagi_is_continuous() {
        let t = halves(&["x", "1-x"], &["1/2", "1/2"]);
        assert!(t.check_continuity(1e-9).unwrap().verdict);
    }

    #[test]
    fn lp_examples() {
        let t = example1();
        let r = t.lp_certificate(1.0).unwrap();
        assert!(!r.verdict);
        let want = 3.0 * 0.5 * 1f64.sin() + 1.5 * 2.0 / 3.0;
        assert!((r.value.unwrap() - want).abs() < 2e-3);
        assert!(t.lp_certificate(f64::INFINITY).unwrap().verdict);
        let z = halves(&["x", "x"], &["0", "0"]);
        for p in [1.0, 2.0, 7.5, f64::INFINITY] {
            let r = z.lp_certificate(p).unwrap();
            assert!(r.verdict && r.value == Some(0.0));
        }
        assert!(t.lp_certificate(0.5).is_err());
    }

    #[test]
    fn fif_with_zero_scales_is_piecewise_linear() {
        let zero = CoefficientFn::constant(0.0, DomainBox::closed(0.0, 1.0));
        let t = build_fif(&[(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)], &[zero.clone(), zero]).unwrap();
        let f0 = GridFunction::zeros(t.domain().clone(), 65, 1).unwrap();
        let r = t.iterate_to_fixed_point(&f0, 1e-12, 10).unwrap();
        for i in 0..65 {
            let x = r.psi.node(i)[0];
            let want = 1.0 - (2.0 * x - 1.0).abs();
            assert!((r.psi.value(i)[0] - want).abs() < 1e-15);
        }
    }

    #[test]
    fn fif_interpolates_and_is_continuous() {
        let half = CoefficientFn::constant(0.5, DomainBox::closed(0.0, 1.0));
        let data = [(0.0, 0.0), (0.5, 0.5), (1.0, 1.0)];
        let t = build_fif(&data, &[half.clone(), half]).unwrap();
        assert!(t.check_continuity(1e-9).unwrap().verdict);
        let f0 = GridFunction::zeros(t.domain().clone(), 257, 1).unwrap();
        let r = t.iterate_to_fixed_point(&f0, 1e-10, 200).unwrap();
        for (x, y) in data {
            assert!((r.psi.eval(&[x]).unwrap()[0] - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn fif_rejects_bad_input() {
        let half = CoefficientFn::constant(0.5, DomainBox::closed(0.0, 1.0));
        let big = CoefficientFn::constant(1.0, DomainBox::closed(0.0, 1.0));
        assert_eq!(build_fif(&[(0.0, 0.0), (0.0, 1.0)], std::slice::from_ref(&half)), Err(Error::UnsortedData));
        assert!(matches!(build_fif(&[(0.0, 0.0), (1.0, 1.0)], &[big]), Err(Error::ScaleTooLarge { .. })));
    }
}
