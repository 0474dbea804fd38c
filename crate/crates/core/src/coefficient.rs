//! Coefficient functions `q_i`, `s_i` with certified sup-norm bounds.
//!
//! The bound is computed once, at construction. The domain is sampled on a
//! uniform grid; around each sample an interval jet of the expression over the
//! surrounding cell yields a Lipschitz bound `L_j` per coordinate, and the cell
//! contributes `|c(x_k)| + sum_j L_j h_j / 2`. A plain interval enclosure of the
//! cell is also formed and the smaller of the two is kept. All interval
//! operations round outward, so the bound is never below the true supremum.

use crate::error::{Error, Result};
use crate::expr::{eval_generic, parse_expr, Expr, Val, Value};
use crate::geometry::DomainBox;
use crate::interval::{Interval, Jet};
use crate::quaternion::Quaternion;

pub const DEFAULT_SAMPLES: usize = 4097;

/// Maximum number of bisections of a cell whose enclosure fails (for example
/// a denominator interval touching zero).
const MAX_SPLIT_DEPTH: u32 = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientFn {
    expr: Expr,
    domain: DomainBox,
    sup_bound: f64,
    value_dim: usize,
}

impl CoefficientFn {
    pub fn new(expr: Expr, domain: DomainBox) -> Result<Self> {
        Self::with_samples(expr, domain, DEFAULT_SAMPLES)
    }

    pub fn with_samples(expr: Expr, domain: DomainBox, n_samples: usize) -> Result<Self> {
        let probe = expr.eval(domain.lo())?;
        let sup_bound = certify_expr(&expr, &domain, n_samples)?;
        Ok(CoefficientFn { expr, domain, sup_bound, value_dim: probe.dim() })
    }

    pub fn parse(src: &str, domain: DomainBox) -> Result<Self> {
        Self::new(parse_expr(src)?, domain)
    }

    pub fn constant(v: f64, domain: DomainBox) -> Self {
        CoefficientFn { expr: Expr::Num(v), domain, sup_bound: v.abs(), value_dim: 1 }
    }

    pub fn quaternion(q: Quaternion, domain: DomainBox) -> Self {
        CoefficientFn { expr: Expr::quat(q), domain, sup_bound: q.norm(), value_dim: 4 }
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    /// 1 for real-valued, 4 for quaternion-valued coefficients.
    pub fn value_dim(&self) -> usize {
        self.value_dim
    }

    /// Same expression on another domain, with a fresh bound.
    pub fn restrict(&self, domain: DomainBox) -> Result<Self> {
        Self::new(self.expr.clone(), domain)
    }

    /// Evaluate without the domain check, clamping the point into the domain
    /// first. For callers that have already located the point.
    pub(crate) fn eval_clamped(&self, x: &[f64]) -> Result<Value> {
        let mut p = x.to_vec();
        self.domain.clamp(&mut p);
        self.expr.eval(&p)
    }
}

/// Evaluate `c` at a point of its domain (closure, up to rounding).
pub fn eval_coefficient(c: &CoefficientFn, x: &[f64]) -> Result<Value> {
    if !c.domain.contains_closure(x) {
        return Err(Error::DomainError { point: x.to_vec() });
    }
    c.eval_clamped(x)
}

/// Recompute the sup-norm bound of `c` with `n_samples` samples.
pub fn certify_sup_bound(c: &CoefficientFn, n_samples: usize) -> Result<f64> {
    certify_expr(&c.expr, &c.domain, n_samples)
}

fn certify_expr(expr: &Expr, domain: &DomainBox, n_samples: usize) -> Result<f64> {
    if n_samples < 2 {
        return Err(Error::InvalidArgument("at least two samples are needed".into()));
    }
    if expr.is_constant() {
        return Ok(expr.eval(domain.lo())?.norm());
    }
    let d = domain.dim();
    let per_dim = ((n_samples as f64).powf(1.0 / d as f64).floor() as usize).max(2);
    let h: Vec<f64> = (0..d).map(|j| domain.width(j) / (per_dim - 1) as f64).collect();
    let total = per_dim.pow(d as u32);
    let mut idx = vec![0usize; d];
    let mut x = vec![0.0; d];
    let mut bound: f64 = 0.0;
    for _ in 0..total {
        for j in 0..d {
            x[j] = if idx[j] + 1 == per_dim {
                domain.hi()[j]
            } else {
                domain.lo()[j] + h[j] * idx[j] as f64
            };
        }
        let cell: Vec<Interval> = (0..d)
            .map(|j| {
                let lo = (x[j] - h[j] / 2.0).max(domain.lo()[j]);
                let hi = (x[j] + h[j] / 2.0).min(domain.hi()[j]);
                Interval::new(lo, hi)
            })
            .collect();
        let sample = expr.eval(&x)?;
        bound = bound.max(cell_bound(expr, &x, &sample, &cell, 0)?);
        for j in 0..d {
            idx[j] += 1;
            if idx[j] < per_dim {
                break;
            }
            idx[j] = 0;
        }
    }
    Ok(bound)
}

/// Upper bound of `|expr|` over `cell`, which contains the sample point `x`.
fn cell_bound(expr: &Expr, x: &[f64], sample: &Value, cell: &[Interval], depth: u32) -> Result<f64> {
    match enclose(expr, x, sample, cell) {
        Ok(b) => Ok(b),
        Err(e) if depth >= MAX_SPLIT_DEPTH => Err(e),
        Err(_) => {
            let j = (0..cell.len())
                .max_by(|a, b| cell[*a].width().total_cmp(&cell[*b].width()))
                .expect("nonempty cell");
            let mid = 0.5 * (cell[j].lo + cell[j].hi);
            let mut out: f64 = 0.0;
            for half in [Interval::new(cell[j].lo, mid), Interval::new(mid, cell[j].hi)] {
                let mut sub = cell.to_vec();
                sub[j] = half;
                let mut c: Vec<f64> = sub.iter().map(|iv| 0.5 * (iv.lo + iv.hi)).collect();
                c[j] = 0.5 * (half.lo + half.hi);
                let s = expr.eval(&c)?;
                out = out.max(cell_bound(expr, &c, &s, &sub, depth + 1)?);
            }
            Ok(out)
        }
    }
}

fn enclose(expr: &Expr, x: &[f64], sample: &Value, cell: &[Interval]) -> Result<f64> {
    let d = cell.len();
    let direct = match eval_generic::<Interval>(expr, cell)? {
        Val::Scalar(v) => v.mag(),
        Val::Quat(q) => norm_bound(q.map(|c| c.mag())),
    };
    let jets: Vec<Jet> = (0..d).map(|j| Jet::variable(cell[j], j, d)).collect();
    let comps: Vec<Jet> = match eval_generic::<Jet>(expr, &jets) {
        Ok(Val::Scalar(v)) => vec![v],
        Ok(Val::Quat(q)) => q.to_vec(),
        Err(_) => return Ok(direct),
    };
    let values: Vec<f64> = match sample {
        Value::Scalar(v) => vec![*v],
        Value::Quat(q) => q.to_array().to_vec(),
    };
    let radius: Vec<f64> = (0..d).map(|j| (x[j] - cell[j].lo).max(cell[j].hi - x[j])).collect();
    let per_comp: Vec<f64> = comps
        .iter()
        .zip(&values)
        .map(|(jet, v)| {
            let inc: f64 = jet.grad().iter().zip(&radius).map(|(g, r)| g.mag() * r).sum();
            up(v.abs() + up(inc))
        })
        .collect();
    let lipschitz = if per_comp.len() == 1 {
        per_comp[0]
    } else {
        norm_bound([per_comp[0], per_comp[1], per_comp[2], per_comp[3]])
    };
    Ok(direct.min(lipschitz))
}

fn up(v: f64) -> f64 {
    v.next_up()
}

/// Euclidean norm rounded upward.
fn norm_bound(c: [f64; 4]) -> f64 {
    let sq = c.iter().fold(0.0, |acc: f64, v| up(acc + up(v * v)));
    up(sq.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> DomainBox {
        DomainBox::half_open(0.0, 1.0)
    }

    #[test]
    fn evaluation_examples() {
        let s1 = CoefficientFn::parse("0.5*sin(x)", unit()).unwrap();
        assert_eq!(eval_coefficient(&s1, &[0.0]).unwrap(), Value::Scalar(0.0));
        let q = CoefficientFn::parse("x", unit()).unwrap();
        assert_eq!(eval_coefficient(&q, &[0.7]).unwrap(), Value::Scalar(0.7));
        let s2 = CoefficientFn::parse("-2/3*cos(x)", unit()).unwrap();
        let v = eval_coefficient(&s2, &[0.0]).unwrap().as_scalar().unwrap();
        assert!((v + 2.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn outside_domain_is_rejected() {
        let q = CoefficientFn::parse("x", unit()).unwrap();
        assert!(matches!(eval_coefficient(&q, &[1.5]), Err(Error::DomainError { .. })));
    }

    #[test]
    fn sine_bound_brackets_the_supremum() {
        let s1 = CoefficientFn::parse("0.5*sin(x)", unit()).unwrap();
        let b = s1.sup_bound();
        assert!(b >= 0.5 * 1f64.sin() && b <= 0.5, "{b}");
        assert!(b - 0.5 * 1f64.sin() < 1e-3);
    }

    #[test]
    fn constant_bound_is_exact() {
        let c = CoefficientFn::parse("3/4", unit()).unwrap();
        assert_eq!(c.sup_bound(), 0.75);
    }

    #[test]
    fn cosine_bound_is_tight_at_the_peak() {
        let s2 = CoefficientFn::parse("-2/3*cos(x)", unit()).unwrap();
        let b = s2.sup_bound();
        assert!((2.0 / 3.0..=2.0 / 3.0 * (1.0 + 1e-6)).contains(&b), "{b}");
    }

    #[test]
    fn quaternion_constant_bound() {
        let c = CoefficientFn::parse("(0.1, 0.5, -0.2, -0.1)", unit()).unwrap();
        assert!((c.sup_bound() - 31f64.sqrt() / 10.0).abs() < 1e-15);
        assert_eq!(c.value_dim(), 4);
    }

    #[test]
    fn quaternion_polynomial_bound() {
        let c = CoefficientFn::parse("(-1, -2, 2, 1)*x^2", unit()).unwrap();
        let b = c.sup_bound();
        assert!(b >= 10f64.sqrt() && b < 10f64.sqrt() * 1.001, "{b}");
    }

    #[test]
    fn pole_is_an_eval_error() {
        let c = CoefficientFn::parse("1/x", DomainBox::closed(0.0, 1.0));
        assert!(c.is_err());
    }

    #[test]
    fn too_few_samples() {
        let c = CoefficientFn::parse("x", unit()).unwrap();
        assert!(certify_sup_bound(&c, 1).is_err());
        assert_eq!(certify_sup_bound(&c, 2).unwrap(), 1.0);
    }
}
