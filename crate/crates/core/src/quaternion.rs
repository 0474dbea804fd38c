//! Real quaternions and RB operators with quaternion-valued coefficients.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::coefficient::CoefficientFn;
use crate::engine::{combine, PieceSet, Product};
use crate::error::{Error, Result};
use crate::geometry::{cube_maps, AffineMap, DomainBox, Partition, Rational};
use crate::global::FixedPointResult;
use crate::grid::GridFunction;

/// `a e0 + v1 e1 + v2 e2 + v3 e3`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quaternion {
    pub a: f64,
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
}

impl Quaternion {
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const E1: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const E2: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const E3: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(a: f64, v1: f64, v2: f64, v3: f64) -> Self {
        Quaternion { a, v1, v2, v3 }
    }

    pub const fn real(a: f64) -> Self {
        Quaternion::new(a, 0.0, 0.0, 0.0)
    }

    pub const fn from_array(c: [f64; 4]) -> Self {
        Quaternion::new(c[0], c[1], c[2], c[3])
    }

    pub const fn to_array(self) -> [f64; 4] {
        [self.a, self.v1, self.v2, self.v3]
    }

    /// Scalar part.
    pub fn sc(self) -> f64 {
        self.a
    }

    /// Vector part, as a pure quaternion.
    pub fn ve(self) -> Quaternion {
        Quaternion::new(0.0, self.v1, self.v2, self.v3)
    }

    pub fn conj(self) -> Quaternion {
        Quaternion::new(self.a, -self.v1, -self.v2, -self.v3)
    }

    pub fn norm_sqr(self) -> f64 {
        self.a * self.a + self.v1 * self.v1 + self.v2 * self.v2 + self.v3 * self.v3
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn inverse(self) -> Result<Quaternion> {
        let n2 = self.norm_sqr();
        if n2 == 0.0 {
            return Err(Error::ZeroDivisor);
        }
        Ok(self.conj() * (1.0 / n2))
    }

    pub fn scale(self, t: f64) -> Quaternion {
        Quaternion::new(self.a * t, self.v1 * t, self.v2 * t, self.v3 * t)
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;

    fn mul(self, q: Quaternion) -> Quaternion {
        let p = self;
        Quaternion::new(
            p.a * q.a - p.v1 * q.v1 - p.v2 * q.v2 - p.v3 * q.v3,
            p.a * q.v1 + p.v1 * q.a + p.v2 * q.v3 - p.v3 * q.v2,
            p.a * q.v2 - p.v1 * q.v3 + p.v2 * q.a + p.v3 * q.v1,
            p.a * q.v3 + p.v1 * q.v2 - p.v2 * q.v1 + p.v3 * q.a,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;

    fn mul(self, t: f64) -> Quaternion {
        self.scale(t)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;

    fn add(self, q: Quaternion) -> Quaternion {
        Quaternion::new(self.a + q.a, self.v1 + q.v1, self.v2 + q.v2, self.v3 + q.v3)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;

    fn sub(self, q: Quaternion) -> Quaternion {
        Quaternion::new(self.a - q.a, self.v1 - q.v1, self.v2 - q.v2, self.v3 - q.v3)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;

    fn neg(self) -> Quaternion {
        Quaternion::new(-self.a, -self.v1, -self.v2, -self.v3)
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.a, self.v1, self.v2, self.v3)
    }
}

pub fn quat_mul(p: Quaternion, q: Quaternion) -> Quaternion {
    p * q
}

pub fn quat_conj(q: Quaternion) -> Quaternion {
    q.conj()
}

pub fn quat_norm(q: Quaternion) -> f64 {
    q.norm()
}

pub fn quat_inv(q: Quaternion) -> Result<Quaternion> {
    q.inverse()
}

/// Hamilton product over exact rationals.
pub fn quat_mul_exact(p: &[Rational; 4], q: &[Rational; 4]) -> [Rational; 4] {
    [
        p[0] * q[0] - p[1] * q[1] - p[2] * q[2] - p[3] * q[3],
        p[0] * q[1] + p[1] * q[0] + p[2] * q[3] - p[3] * q[2],
        p[0] * q[2] - p[1] * q[3] + p[2] * q[0] + p[3] * q[1],
        p[0] * q[3] + p[1] * q[2] - p[2] * q[1] + p[3] * q[0],
    ]
}

/// For pure quaternions `v`, `w`: `(<v, w>, v x w)`, with `v w = -<v, w> + v x w`.
pub fn vector_product_identity(v: Quaternion, w: Quaternion) -> Result<(f64, Quaternion)> {
    for q in [v, w] {
        if q.a != 0.0 {
            return Err(Error::NotAVector(q.a));
        }
    }
    let dot = v.v1 * w.v1 + v.v2 * w.v2 + v.v3 * w.v3;
    let cross = Quaternion::new(0.0, v.v2 * w.v3 - v.v3 * w.v2, v.v3 * w.v1 - v.v1 * w.v3, v.v1 * w.v2 - v.v2 * w.v1);
    let prod = v * w;
    debug_assert!(prod == Quaternion::real(-dot) + cross || (prod - (Quaternion::real(-dot) + cross)).norm() <= 1e-12 * (v.norm() * w.norm()).max(1.0));
    Ok((dot, cross))
}

/// Which side the scale function multiplies `f` from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// `Tf(l_i(x)) = q_i(x) + s_i(x) f(x)` (left) or `q_i(x) + f(x) s_i(x)` (right)
/// for quaternion-valued `f`. Grids carry four values per node.
#[derive(Debug, Clone, PartialEq)]
pub struct QuatRBOperator {
    set: PieceSet,
    side: Side,
}

impl QuatRBOperator {
    pub fn new(partition: Partition, q: Vec<CoefficientFn>, s: Vec<CoefficientFn>, side: Side) -> Result<Self> {
        if !partition.is_global() {
            return Err(Error::InvalidArgument("every map must be defined on the whole domain".into()));
        }
        let product = match side {
            Side::Left => Product::Left,
            Side::Right => Product::Right,
        };
        Ok(QuatRBOperator { set: PieceSet::new(partition, q, s, product)?, side })
    }

    /// The same operator with the scale acting from the other side.
    pub fn with_side(&self, side: Side) -> Self {
        let mut set = self.set.clone();
        set.product = match side {
            Side::Left => Product::Left,
            Side::Right => Product::Right,
        };
        QuatRBOperator { set, side }
    }

    /// Operator on `[-1, 1]^4` with the sixteen half-scale subcube maps.
    pub fn on_cube(q: Vec<CoefficientFn>, s: Vec<CoefficientFn>, side: Side) -> Result<Self> {
        QuatRBOperator::new(Partition::new(DomainBox::cube4(-1.0, 1.0), cube_maps())?, q, s, side)
    }

    pub fn side(&self) -> Side {
        self.side
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

    /// `max_i sup |s_i|` in the quaternion norm.
    pub fn contraction_factor(&self) -> f64 {
        self.set.contraction()
    }

    pub fn quat_apply(&self, f: &GridFunction) -> Result<GridFunction> {
        self.set.apply(f)
    }

    /// `T^k f0`.
    pub fn power(&self, f0: &GridFunction, k: usize) -> Result<GridFunction> {
        self.set.power(f0, k)
    }

    pub fn quat_fixed_point(&self, f0: &GridFunction, eps: f64, k_max: usize) -> Result<FixedPointResult> {
        self.set.iterate(f0, eps, k_max)
    }

    /// `psi(p)` at the fixed point `p` of the 1-D map `l_i`: `(1 - s)^{-1} q`
    /// (left) or `q (1 - s)^{-1}` (right), coefficients taken at `p`.
    pub fn fixed_point_value(&self, i: usize) -> Result<(f64, Quaternion)> {
        if self.domain().dim() != 1 {
            return Err(Error::InvalidArgument("only available in one dimension".into()));
        }
        let p = self.partition().map(i).fixed_point_1d().ok_or_else(|| Error::InvalidArgument("map has no fixed point".into()))?;
        let q = self.set.q[i].eval_clamped(&[p])?.to_quat();
        let s = self.set.s[i].eval_clamped(&[p])?.to_quat();
        let inv = (Quaternion::ONE - s).inverse().map_err(|_| Error::DegenerateScale { point: p })?;
        Ok((p, if self.side == Side::Left { inv * q } else { q * inv }))
    }

    /// `T^m f` at `z = l_{i_1}(l_{i_2}(... l_{i_m}(x)))` for `f` constant
    /// `f0_value`, from the ordered-product formula. `address` lists piece
    /// indices outermost first; coefficients of level `j` are evaluated at
    /// `y_j = l_{i_{j+1}}(... l_{i_m}(x))`. In left mode the prefix products are
    /// `s_{i_1} s_{i_2} ... s_{i_k}`; in right mode they multiply in reverse.
    /// Returns `z` and the value.
    pub fn m_fold_eval(&self, address: &[usize], x: &[f64], f0_value: Quaternion) -> Result<(Vec<f64>, Quaternion)> {
        if address.is_empty() {
            return Err(Error::InvalidArgument("address must not be empty".into()));
        }
        let n = self.partition().len();
        if let Some(&bad) = address.iter().find(|&&i| i >= n) {
            return Err(Error::InvalidArgument(format!("piece index {bad} out of range")));
        }
        let m = address.len();
        let mut ys = vec![x.to_vec(); m + 1];
        for j in (0..m).rev() {
            ys[j] = self.partition().map(address[j]).apply(&ys[j + 1]);
        }
        let mut prefix = Quaternion::ONE;
        let mut value = Quaternion::real(0.0);
        for j in 0..m {
            let y = &ys[j + 1];
            let q = self.set.q[address[j]].eval_clamped(y)?.to_quat();
            let s = self.set.s[address[j]].eval_clamped(y)?.to_quat();
            match self.side {
                Side::Left => {
                    value = value + prefix * q;
                    prefix = prefix * s;
                }
                Side::Right => {
                    value = value + q * prefix;
                    prefix = s * prefix;
                }
            }
        }
        let tail = match self.side {
            Side::Left => prefix * f0_value,
            Side::Right => f0_value * prefix,
        };
        Ok((ys[0].clone(), value + tail))
    }

    /// One application of the operator at a single point, with `f` given as a closure.
    pub fn apply_at(&self, x: &[f64], f: impl Fn(&[f64]) -> Result<Quaternion>) -> Result<Quaternion> {
        let st = self.set.step(x)?;
        let fv = f(&st.xi)?.to_array();
        let mut out = [0.0; 4];
        combine(self.set.product, 4, &st.q, &st.s, &fv, &mut out);
        Ok(Quaternion::from_array(out))
    }
}

/// A planar or spatial view of a quaternion-valued grid function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Projection {
    /// Rows `(x, psi_axis)` over a 1-D domain.
    Graph(usize),
    /// Rows `(psi_a, psi_b, ...)`.
    Parametric(Vec<usize>),
}

pub fn component_projection(psi: &GridFunction, projection: &Projection) -> Result<Vec<Vec<f64>>> {
    if psi.value_dim() != 4 {
        return Err(Error::ValueKind("projection needs a quaternion-valued grid".into()));
    }
    let axes: &[usize] = match projection {
        Projection::Graph(a) => std::slice::from_ref(a),
        Projection::Parametric(a) => a,
    };
    if let Some(&bad) = axes.iter().find(|&&a| a > 3) {
        return Err(Error::BadAxis(bad));
    }
    if let Projection::Graph(_) = projection {
        if psi.dim() != 1 {
            return Err(Error::InvalidArgument("graph projections need a 1-D domain".into()));
        }
    }
    Ok((0..psi.node_count())
        .map(|i| {
            let v = psi.value(i);
            match projection {
                Projection::Graph(a) => vec![psi.node(i)[0], v[*a]],
                Projection::Parametric(axes) => axes.iter().map(|a| v[*a]).collect(),
            }
        })
        .collect())
}

/// The constants of the worked example: `Q1 = e0 + 2e1 - e2 + 3e3`,
/// `Q2 = -e0 - 2e1 + 2e2 + e3`, `S1`, `S2`.
pub const EXAMPLE_Q1: Quaternion = Quaternion::new(1.0, 2.0, -1.0, 3.0);
pub const EXAMPLE_Q2: Quaternion = Quaternion::new(-1.0, -2.0, 2.0, 1.0);
pub const EXAMPLE_S1: Quaternion = Quaternion::new(0.1, 0.5, -0.2, -0.1);
pub const EXAMPLE_S2: Quaternion = Quaternion::new(-0.2, 0.2, -0.6, 0.1);

/// The worked example on `[0, 1)`: maps `x/2`, `(x+1)/2`,
/// `q_1(x) = (1 - Q1) x`, `q_2(x) = Q2 x^2` and constant scales `S1`, `S2`.
pub fn example_operator(side: Side) -> QuatRBOperator {
    use crate::expr::Expr;
    let dom = DomainBox::half_open(0.0, 1.0);
    let maps = vec![AffineMap::ratio((1, 2), (0, 1)), AffineMap::ratio((1, 2), (1, 2))];
    let q1 = Expr::quat(Quaternion::ONE - EXAMPLE_Q1) * Expr::Var;
    let q2 = Expr::quat(EXAMPLE_Q2) * Expr::Var.pow(Expr::Num(2.0));
    let q = vec![
        CoefficientFn::new(q1, dom.clone()).expect("example q1"),
        CoefficientFn::new(q2, dom.clone()).expect("example q2"),
    ];
    let s = vec![CoefficientFn::quaternion(EXAMPLE_S1, dom.clone()), CoefficientFn::quaternion(EXAMPLE_S2, dom.clone())];
    QuatRBOperator::new(Partition::new(dom, maps).expect("example partition"), q, s, side).expect("example operator")
}

/// Quaternion from a rational 4-tuple, for exact checks.
pub fn rational_quat(c: [i64; 4]) -> [Rational; 4] {
    c.map(|v| Rational::from_integer(v as i128))
}
