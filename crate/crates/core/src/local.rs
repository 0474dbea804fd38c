//! Local RB operators: piece `i` reads `f` on its own subset `X_i` and writes
//! it onto `l_i(X_i)`. The maps need not be contractions.

use crate::coefficient::CoefficientFn;
use crate::engine::{PieceSet, Product};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{AffineMap, DomainBox, Partition, PartitionReport};
use crate::global::{lp_report, FixedPointResult, RBOperator};
use crate::grid::GridFunction;
use crate::report::{ConditionKind, ConditionReport, Witness};

/// One piece `(X_i, l_i, q_i, s_i)`; `q_i`, `s_i` are defined on `X_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalPiece {
    pub subset: DomainBox,
    pub map: AffineMap,
    pub q: CoefficientFn,
    pub s: CoefficientFn,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalRBOperator {
    set: PieceSet,
}

impl LocalRBOperator {
    pub fn new(domain: DomainBox, pieces: Vec<LocalPiece>) -> Result<Self> {
        let mut subsets = Vec::with_capacity(pieces.len());
        let mut maps = Vec::with_capacity(pieces.len());
        let mut q = Vec::with_capacity(pieces.len());
        let mut s = Vec::with_capacity(pieces.len());
        for p in pieces {
            if !domain.is_superset_of(&p.subset) {
                return Err(Error::ShapeMismatch("subset X_i is not contained in the domain".into()));
            }
            subsets.push(p.subset);
            maps.push(p.map);
            q.push(p.q);
            s.push(p.s);
        }
        let partition = Partition::with_sources(domain, subsets, maps)?;
        Ok(LocalRBOperator { set: PieceSet::new(partition, q, s, Product::Scalar)? })
    }

    /// The global operator seen as a local one with `X_i = X` for all `i`.
    pub fn from_global(t: &RBOperator) -> Self {
        LocalRBOperator { set: t.set.clone() }
    }

    pub fn partition(&self) -> &Partition {
        &self.set.partition
    }

    pub fn domain(&self) -> &DomainBox {
        self.set.partition.domain()
    }

    pub fn q(&self) -> &[CoefficientFn] {
        &self.set.q
    }

    pub fn s(&self) -> &[CoefficientFn] {
        &self.set.s
    }

    /// Disjointness and coverage of the images `l_i(X_i)`. The reported
    /// Lipschitz constants may exceed 1.
    pub fn verify_local_partition(&self) -> PartitionReport {
        self.set.partition.verify()
    }

    pub fn apply_local(&self, f: &GridFunction) -> Result<GridFunction> {
        self.set.apply(f)
    }

    /// `max_i sup_{X_i} |s_i|`.
    pub fn local_contraction(&self) -> f64 {
        self.set.contraction()
    }

    /// `sum_i a_i sup_{X_i}|s_i|^p < 1` with `a_i = |(l_i^{-1})'|`, or the
    /// maximum for `p = inf`. The reported value is the sum itself, not its
    /// `p`-th root; both are below 1 together.
    pub fn local_lp_certificate(&self, p: f64) -> Result<ConditionReport> {
        let weights: Vec<f64> = self.partition().maps().iter().map(|m| 1.0 / m.jacobian()).collect();
        let bounds: Vec<f64> = self.set.s.iter().map(CoefficientFn::sup_bound).collect();
        lp_report(&weights, &bounds, p)
    }

    pub fn iterate_local(&self, f0: &GridFunction, eps: f64, k_max: usize) -> Result<FixedPointResult> {
        self.set.iterate(f0, eps, k_max)
    }

    /// `T^k f0`.
    pub fn power(&self, f0: &GridFunction, k: usize) -> Result<GridFunction> {
        self.set.power(f0, k)
    }

    /// One-sided values of `T psi` at every junction of adjacent images in one
    /// dimension: the left piece evaluated at the preimage of its right end
    /// against the right piece at the preimage of its left end.
    pub fn check_junctions(&self, psi: &GridFunction, tol: f64) -> Result<ConditionReport> {
        if self.domain().dim() != 1 {
            return Err(Error::InvalidArgument("only available in one dimension".into()));
        }
        let report = self.verify_local_partition();
        let mut witnesses = Vec::new();
        for w in report.images.windows(2) {
            let (a, b) = (w[0].index, w[1].index);
            let p = w[1].sides[0].lo;
            if (w[0].sides[0].hi - p).abs() > 1e-12 {
                continue;
            }
            let left = self.one_sided(a, true, psi)?;
            let right = self.one_sided(b, false, psi)?;
            witnesses.push(Witness::equality(p, left, right));
        }
        Ok(ConditionReport::from_gaps(ConditionKind::Continuous, witnesses, tol))
    }

    fn one_sided(&self, i: usize, right_end: bool, psi: &GridFunction) -> Result<f64> {
        let src = self.partition().source(i);
        let positive = self.partition().map(i).scale()[0] > 0.0;
        let e = if right_end == positive { src.hi()[0] } else { src.lo()[0] };
        let q = self.set.q[i].eval_clamped(&[e])?.as_scalar().expect("real q");
        let s = self.set.s[i].eval_clamped(&[e])?.as_scalar().expect("real s");
        Ok(q + s * psi.eval(&[e])?[0])
    }
}

/// How the affine freedom of the `q_i` is used in [`build_even_n_with`].
#[derive(Debug, Clone, PartialEq)]
pub enum QFamily {
    /// Affine `q_i`; the common value of `T f` at odd knot `x_{2j-1}` is
    /// `contact_values[j-1]`, by default the chord midpoint `(y_{j-1} + y_j)/2`.
    Affine { contact_values: Option<Vec<f64>> },
    /// Constant `q_i` fixed by the interpolation conditions; the join-up
    /// condition at odd knots is then checked rather than enforced.
    Constant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvenNConstruction {
    pub n: usize,
    /// `x_i = i/n`, `i = 0..=n`.
    pub knots: Vec<f64>,
    /// `(x_{2j}, y_j)`, `j = 0..=n/2`.
    pub data: Vec<(f64, f64)>,
    /// Value of `T f` at the odd knots `x_{2j-1}`, `j = 1..=n/2`.
    pub contact_values: Vec<f64>,
    pub operator: LocalRBOperator,
    /// Largest interpolation or join-up defect of `T f` for a probe `f` in `C_Delta`.
    pub probe_gap: f64,
}

/// Even-n construction on `[0, 1]` with affine `q_i` and chord-midpoint contact values.
pub fn build_even_n(data: &[(f64, f64)], scales: &[CoefficientFn]) -> Result<EvenNConstruction> {
    build_even_n_with(data, scales, QFamily::Affine { contact_values: None })
}

/// Subsets `X_{2j-1} = X_{2j} = [x_{2j-2}, x_{2j}]`, maps `l_{2j-1} = x/2 + (j-1)/n`,
/// `l_{2j} = x/2 + j/n`, and `q_i` solving the interpolation and join-up
/// conditions for the given scales (one per piece, `n` in total).
pub fn build_even_n_with(data: &[(f64, f64)], scales: &[CoefficientFn], family: QFamily) -> Result<EvenNConstruction> {
    if data.len() < 2 {
        return Err(Error::InvalidArgument("need at least two data points".into()));
    }
    if data.windows(2).any(|w| !(w[0].0 < w[1].0)) {
        return Err(Error::UnsortedData);
    }
    let half = data.len() - 1;
    let n = 2 * half;
    for (j, (x, _)) in data.iter().enumerate() {
        if (x - (2 * j) as f64 / n as f64).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("data abscissa {x} is not the knot {}/{n}", 2 * j)));
        }
    }
    if scales.len() != n {
        return Err(Error::ShapeMismatch(format!("{n} pieces but {} scale functions", scales.len())));
    }
    let contacts: Vec<f64> = match &family {
        QFamily::Affine { contact_values: Some(c) } => {
            if c.len() != half {
                return Err(Error::ShapeMismatch(format!("{half} odd knots but {} contact values", c.len())));
            }
            c.clone()
        }
        _ => (1..=half).map(|j| 0.5 * (data[j - 1].1 + data[j].1)).collect(),
    };
    let knot = |i: usize| if i == n { 1.0 } else { i as f64 / n as f64 };
    let mut pieces = Vec::with_capacity(n);
    let mut contact_values = Vec::with_capacity(half);
    for j in 1..=half {
        let subset = DomainBox::closed(knot(2 * j - 2), knot(2 * j));
        let (xa, xb) = (subset.lo()[0], subset.hi()[0]);
        let (ya, yb) = (data[j - 1].1, data[j].1);
        let s_odd = restricted(&scales[2 * j - 2], &subset, 2 * j - 2)?;
        let s_even = restricted(&scales[2 * j - 1], &subset, 2 * j - 1)?;
        let at = |c: &CoefficientFn, x: f64| -> Result<f64> { Ok(c.eval_clamped(&[x])?.as_scalar().expect("real")) };
        let (q_odd, q_even) = match family {
            QFamily::Constant => {
                let qo = (1.0 - at(&s_odd, xa)?) * ya;
                let qe = (1.0 - at(&s_even, xb)?) * yb;
                let left = qo + at(&s_odd, xb)? * yb;
                let right = qe + at(&s_even, xa)? * ya;
                if (left - right).abs() > 1e-12 * left.abs().max(right.abs()).max(1.0) {
                    return Err(Error::InconsistentJoinUp { knot: knot(2 * j - 1), residual: left - right });
                }
                contact_values.push(left);
                (Expr::Num(qo), Expr::Num(qe))
            }
            QFamily::Affine { .. } => {
                let m = contacts[j - 1];
                contact_values.push(m);
                let qo = affine_through(xa, (1.0 - at(&s_odd, xa)?) * ya, xb, m - at(&s_odd, xb)? * yb);
                let qe = affine_through(xa, m - at(&s_even, xa)? * ya, xb, (1.0 - at(&s_even, xb)?) * yb);
                (qo, qe)
            }
        };
        let map_odd = AffineMap::ratio((1, 2), ((j - 1) as i128, n as i128));
        let map_even = AffineMap::ratio((1, 2), (j as i128, n as i128));
        pieces.push(LocalPiece { subset: subset.clone(), map: map_odd, q: CoefficientFn::new(q_odd, subset.clone())?, s: s_odd });
        pieces.push(LocalPiece { subset: subset.clone(), map: map_even, q: CoefficientFn::new(q_even, subset)?, s: s_even });
    }
    let operator = LocalRBOperator::new(DomainBox::closed(0.0, 1.0), pieces)?;
    let knots: Vec<f64> = (0..=n).map(knot).collect();
    let probe_gap = probe_defect(&operator, data, &knots)?;
    if probe_gap > 1e-9 {
        let worst = knots[1];
        return Err(Error::InconsistentJoinUp { knot: worst, residual: probe_gap });
    }
    Ok(EvenNConstruction { n, knots, data: data.to_vec(), contact_values, operator, probe_gap })
}

fn restricted(c: &CoefficientFn, subset: &DomainBox, index: usize) -> Result<CoefficientFn> {
    let c = if c.domain() == subset { c.clone() } else { c.restrict(subset.clone())? };
    if c.value_dim() != 1 {
        return Err(Error::ValueKind("scale functions must be real-valued".into()));
    }
    if c.sup_bound() >= 1.0 {
        return Err(Error::ScaleTooLarge { index, bound: c.sup_bound() });
    }
    Ok(c)
}

fn affine_through(xa: f64, ya: f64, xb: f64, yb: f64) -> Expr {
    let slope = (yb - ya) / (xb - xa);
    Expr::Num(slope) * Expr::Var + Expr::Num(ya - slope * xa)
}

/// Largest defect of `T f` at the knots for the probe
/// `f = chord through the data + 0.3 sin(n pi x) cos(3x)`, which lies in `C_Delta`.
fn probe_defect(op: &LocalRBOperator, data: &[(f64, f64)], knots: &[f64]) -> Result<f64> {
    let n = knots.len() - 1;
    let probe = |x: f64| -> f64 {
        let j = ((x * (n / 2) as f64).floor() as usize).min(n / 2 - 1);
        let (xa, ya) = data[j];
        let (xb, yb) = data[j + 1];
        let chord = ya + (yb - ya) * (x - xa) / (xb - xa);
        chord + 0.3 * (std::f64::consts::PI * x * (n / 2) as f64 * 2.0).sin() * (x * 3.0).cos()
    };
    let value = |i: usize, e: f64| -> Result<f64> {
        let q = op.set.q[i].eval_clamped(&[e])?.as_scalar().expect("real");
        let s = op.set.s[i].eval_clamped(&[e])?.as_scalar().expect("real");
        Ok(q + s * probe(e))
    };
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let src = op.partition().source(i);
        let (lo, hi) = (src.lo()[0], src.hi()[0]);
        // Tf at the left and right ends of image i
        let left = value(i, lo)?;
        let right = value(i, hi)?;
        if i % 2 == 0 {
            worst = worst.max((left - data[i / 2].1).abs());
        } else {
            worst = worst.max((right - data[i / 2 + 1].1).abs());
        }
        if i + 1 < n && i % 2 == 0 {
            let next_left = value(i + 1, op.partition().source(i + 1).lo()[0])?;
            worst = worst.max((right - next_left).abs());
        }
    }
    Ok(worst)
}
