//! The coefficient expression language.
//!
//! Coefficient functions `q_i`, `s_i` are small closed-form expressions in the
//! point variable `x`: numbers, `pi`, `x` or `x[j]`, the four arithmetic
//! operators, `^`, `sin`, `cos`, `abs`, and quaternion literals `(a, b, c, d)`.
//! The same tree is evaluated over `f64`, over [`Interval`](crate::interval::Interval)
//! and over [`Jet`](crate::interval::Jet) through the [`Scalar`] trait.

mod parse;

use std::fmt;
use std::ops;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub};

use crate::error::{Error, Result};
use crate::geometry::{exact_from_f64, Rational};
use crate::quaternion::Quaternion;

pub use parse::{parse_expr, parse_expr_with, ParseError, ParseOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Abs,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Pi,
    /// `x`: the whole point (a real in 1-D, a quaternion in 4-D).
    Var,
    /// `x[j]`: one coordinate of the point.
    VarIndex(usize),
    Quat(Box<[Expr; 4]>),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn x() -> Expr {
        Expr::Var
    }

    pub fn quat(q: Quaternion) -> Expr {
        Expr::Quat(Box::new(q.to_array().map(Expr::Num)))
    }

    pub fn call(f: Func, arg: Expr) -> Expr {
        Expr::Call(f, Box::new(arg))
    }

    pub fn pow(self, e: Expr) -> Expr {
        Expr::Pow(Box::new(self), Box::new(e))
    }

    /// True when the expression does not mention the point variable.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Pi => true,
            Expr::Var | Expr::VarIndex(_) => false,
            Expr::Quat(c) => c.iter().all(Expr::is_constant),
            Expr::Neg(a) | Expr::Call(_, a) => a.is_constant(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.is_constant() && b.is_constant()
            }
        }
    }

    pub fn has_quaternion_literal(&self) -> bool {
        match self {
            Expr::Quat(_) => true,
            Expr::Num(_) | Expr::Pi | Expr::Var | Expr::VarIndex(_) => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.has_quaternion_literal(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.has_quaternion_literal() || b.has_quaternion_literal()
            }
        }
    }

    /// Replace every occurrence of the point variable by `with`.
    ///
    /// Only meaningful for 1-D expressions, where `x` and `x[0]` coincide.
    pub fn substitute_x(&self, with: &Expr) -> Expr {
        let sub = |e: &Expr| Box::new(e.substitute_x(with));
        match self {
            Expr::Var | Expr::VarIndex(0) => with.clone(),
            Expr::Num(_) | Expr::Pi | Expr::VarIndex(_) => self.clone(),
            Expr::Quat(c) => Expr::Quat(Box::new([
                c[0].substitute_x(with),
                c[1].substitute_x(with),
                c[2].substitute_x(with),
                c[3].substitute_x(with),
            ])),
            Expr::Neg(a) => Expr::Neg(sub(a)),
            Expr::Call(f, a) => Expr::Call(*f, sub(a)),
            Expr::Add(a, b) => Expr::Add(sub(a), sub(b)),
            Expr::Sub(a, b) => Expr::Sub(sub(a), sub(b)),
            Expr::Mul(a, b) => Expr::Mul(sub(a), sub(b)),
            Expr::Div(a, b) => Expr::Div(sub(a), sub(b)),
            Expr::Pow(a, b) => Expr::Pow(sub(a), sub(b)),
        }
    }

    /// Exact value of a constant rational expression (numbers combined with
    /// `+ - * /` and unary minus), if it is one.
    pub fn as_rational(&self) -> Option<Rational> {
        match self {
            Expr::Num(v) => exact_from_f64(*v),
            Expr::Neg(a) => a.as_rational().map(|r| -r),
            Expr::Add(a, b) => a.as_rational()?.checked_add(&b.as_rational()?),
            Expr::Sub(a, b) => a.as_rational()?.checked_sub(&b.as_rational()?),
            Expr::Mul(a, b) => a.as_rational()?.checked_mul(&b.as_rational()?),
            Expr::Div(a, b) => {
                let d = b.as_rational()?;
                if d == Ratio::from_integer(0) {
                    None
                } else {
                    a.as_rational()?.checked_div(&d)
                }
            }
            _ => None,
        }
    }

    /// Evaluate at a point with `x.len()` coordinates (1 or 4).
    pub fn eval(&self, x: &[f64]) -> Result<Value> {
        let v = eval_generic(self, x)?;
        let out = match v {
            Val::Scalar(s) => Value::Scalar(s),
            Val::Quat(q) => Value::Quat(Quaternion::from_array(q)),
        };
        if !out.is_finite() {
            return Err(Error::EvalError(format!("non-finite value at {x:?}")));
        }
        Ok(out)
    }
}

macro_rules! impl_binop {
    ($tr:ident, $method:ident, $variant:ident) => {
        impl ops::$tr for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$variant(Box::new(self), Box::new(rhs))
            }
        }
    };
}

impl_binop!(Add, add, Add);
impl_binop!(Sub, sub, Sub);
impl_binop!(Mul, mul, Mul);
impl_binop!(Div, div, Div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

/// Fully parenthesised rendering; parsing it yields the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => write!(f, "(-{})", -v),
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Pi => f.write_str("pi"),
            Expr::Var => f.write_str("x"),
            Expr::VarIndex(j) => write!(f, "x[{j}]"),
            Expr::Quat(c) => write!(f, "({}, {}, {}, {})", c[0], c[1], c[2], c[3]),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

/// The value of a coefficient function: a real or a quaternion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Scalar(f64),
    Quat(Quaternion),
}

impl Value {
    /// Absolute value or quaternion norm.
    pub fn norm(&self) -> f64 {
        match self {
            Value::Scalar(v) => f64::abs(*v),
            Value::Quat(q) => q.norm(),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Value::Scalar(v) => v.is_finite(),
            Value::Quat(q) => q.to_array().iter().all(|c| c.is_finite()),
        }
    }

    /// Number of real components (1 or 4).
    pub fn dim(&self) -> usize {
        match self {
            Value::Scalar(_) => 1,
            Value::Quat(_) => 4,
        }
    }

    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            Value::Scalar(v) => Some(*v),
            Value::Quat(_) => None,
        }
    }

    /// Promote to a quaternion (a real `r` becomes `r e0`).
    pub fn to_quat(&self) -> Quaternion {
        match self {
            Value::Scalar(v) => Quaternion::real(*v),
            Value::Quat(q) => *q,
        }
    }
}

/// Arithmetic needed by the evaluator. Implemented for `f64` and for the two
/// enclosure types in [`crate::interval`].
pub trait Scalar: Clone + Sized {
    /// A constant with the same shape as `like` (jets carry a dimension).
    fn constant(v: f64, like: &Self) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn div(&self, o: &Self) -> Result<Self>;
    fn sin(&self) -> Result<Self>;
    fn cos(&self) -> Result<Self>;
    fn abs(&self) -> Result<Self>;
    fn sqrt(&self) -> Result<Self>;
    fn powi(&self, n: i32) -> Result<Self>;
    fn powf(&self, p: f64) -> Result<Self>;

    fn quat_norm(q: &[Self; 4]) -> Result<Self> {
        let sq = q.iter().skip(1).fold(q[0].mul(&q[0]), |acc, c| acc.add(&c.mul(c)));
        sq.sqrt()
    }
}

impl Scalar for f64 {
    fn constant(v: f64, _like: &Self) -> Self {
        v
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div(&self, o: &Self) -> Result<Self> {
        if *o == 0.0 {
            return Err(Error::EvalError("division by zero".into()));
        }
        Ok(self / o)
    }
    fn sin(&self) -> Result<Self> {
        Ok(f64::sin(*self))
    }
    fn cos(&self) -> Result<Self> {
        Ok(f64::cos(*self))
    }
    fn abs(&self) -> Result<Self> {
        Ok(f64::abs(*self))
    }
    fn sqrt(&self) -> Result<Self> {
        if *self < 0.0 {
            return Err(Error::EvalError("square root of a negative number".into()));
        }
        Ok(f64::sqrt(*self))
    }
    fn powi(&self, n: i32) -> Result<Self> {
        if n < 0 && *self == 0.0 {
            return Err(Error::EvalError("negative power of zero".into()));
        }
        Ok(f64::powi(*self, n))
    }
    fn powf(&self, p: f64) -> Result<Self> {
        if *self < 0.0 || (*self == 0.0 && p < 0.0) {
            return Err(Error::EvalError(format!("{self}^{p} is undefined")));
        }
        Ok(f64::powf(*self, p))
    }
}

/// Intermediate value during generic evaluation.
#[derive(Debug, Clone)]
pub enum Val<T> {
    Scalar(T),
    Quat([T; 4]),
}

fn hamilton<T: Scalar>(p: &[T; 4], q: &[T; 4]) -> [T; 4] {
    let m = |a: &T, b: &T| a.mul(b);
    [
        m(&p[0], &q[0]).sub(&m(&p[1], &q[1])).sub(&m(&p[2], &q[2])).sub(&m(&p[3], &q[3])),
        m(&p[0], &q[1]).add(&m(&p[1], &q[0])).add(&m(&p[2], &q[3])).sub(&m(&p[3], &q[2])),
        m(&p[0], &q[2]).sub(&m(&p[1], &q[3])).add(&m(&p[2], &q[0])).add(&m(&p[3], &q[1])),
        m(&p[0], &q[3]).add(&m(&p[1], &q[2])).sub(&m(&p[2], &q[1])).add(&m(&p[3], &q[0])),
    ]
}

fn quat_inverse<T: Scalar>(q: &[T; 4]) -> Result<[T; 4]> {
    let n2 = q.iter().skip(1).fold(q[0].mul(&q[0]), |acc, c| acc.add(&c.mul(c)));
    Ok([q[0].div(&n2)?, q[1].neg().div(&n2)?, q[2].neg().div(&n2)?, q[3].neg().div(&n2)?])
}

fn scale<T: Scalar>(s: &T, q: &[T; 4]) -> [T; 4] {
    [s.mul(&q[0]), s.mul(&q[1]), s.mul(&q[2]), s.mul(&q[3])]
}

fn promote<T: Scalar>(s: &T) -> [T; 4] {
    let z = T::constant(0.0, s);
    [s.clone(), z.clone(), z.clone(), z]
}

fn quat_powi<T: Scalar>(q: &[T; 4], n: i64) -> Result<[T; 4]> {
    let base = if n < 0 { quat_inverse(q)? } else { q.clone() };
    let mut acc = promote(&T::constant(1.0, &q[0]));
    for _ in 0..n.unsigned_abs() {
        acc = hamilton(&acc, &base);
    }
    Ok(acc)
}

const MAX_INT_POWER: f64 = 64.0;

/// Evaluate `expr` with coordinates of type `T`.
pub fn eval_generic<T: Scalar>(expr: &Expr, x: &[T]) -> Result<Val<T>> {
    let like = &x[0];
    Ok(match expr {
        Expr::Num(v) => Val::Scalar(T::constant(*v, like)),
        Expr::Pi => Val::Scalar(T::constant(std::f64::consts::PI, like)),
        Expr::Var => match x.len() {
            1 => Val::Scalar(x[0].clone()),
            4 => Val::Quat([x[0].clone(), x[1].clone(), x[2].clone(), x[3].clone()]),
            d => return Err(Error::EvalError(format!("unsupported point dimension {d}"))),
        },
        Expr::VarIndex(j) => Val::Scalar(
            x.get(*j)
                .cloned()
                .ok_or_else(|| Error::EvalError(format!("x[{j}] out of range for a {}-D point", x.len())))?,
        ),
        Expr::Quat(c) => {
            let mut out = Vec::with_capacity(4);
            for e in c.iter() {
                match eval_generic(e, x)? {
                    Val::Scalar(s) => out.push(s),
                    Val::Quat(_) => {
                        return Err(Error::EvalError("quaternion literal components must be real".into()))
                    }
                }
            }
            let arr: [T; 4] = out.try_into().ok().expect("four components");
            Val::Quat(arr)
        }
        Expr::Neg(a) => match eval_generic(a, x)? {
            Val::Scalar(s) => Val::Scalar(s.neg()),
            Val::Quat(q) => Val::Quat(q.map(|c| c.neg())),
        },
        Expr::Add(a, b) => match (eval_generic(a, x)?, eval_generic(b, x)?) {
            (Val::Scalar(p), Val::Scalar(q)) => Val::Scalar(p.add(&q)),
            (p, q) => {
                let (p, q) = (as_quat(p), as_quat(q));
                Val::Quat([p[0].add(&q[0]), p[1].add(&q[1]), p[2].add(&q[2]), p[3].add(&q[3])])
            }
        },
        Expr::Sub(a, b) => match (eval_generic(a, x)?, eval_generic(b, x)?) {
            (Val::Scalar(p), Val::Scalar(q)) => Val::Scalar(p.sub(&q)),
            (p, q) => {
                let (p, q) = (as_quat(p), as_quat(q));
                Val::Quat([p[0].sub(&q[0]), p[1].sub(&q[1]), p[2].sub(&q[2]), p[3].sub(&q[3])])
            }
        },
        Expr::Mul(a, b) => match (eval_generic(a, x)?, eval_generic(b, x)?) {
            (Val::Scalar(p), Val::Scalar(q)) => Val::Scalar(p.mul(&q)),
            (Val::Scalar(s), Val::Quat(q)) | (Val::Quat(q), Val::Scalar(s)) => Val::Quat(scale(&s, &q)),
            (Val::Quat(p), Val::Quat(q)) => Val::Quat(hamilton(&p, &q)),
        },
        Expr::Div(a, b) => match (eval_generic(a, x)?, eval_generic(b, x)?) {
            (Val::Scalar(p), Val::Scalar(q)) => Val::Scalar(p.div(&q)?),
            (Val::Quat(p), Val::Scalar(s)) => {
                Val::Quat([p[0].div(&s)?, p[1].div(&s)?, p[2].div(&s)?, p[3].div(&s)?])
            }
            (Val::Scalar(s), Val::Quat(q)) => Val::Quat(scale(&s, &quat_inverse(&q)?)),
            (Val::Quat(p), Val::Quat(q)) => Val::Quat(hamilton(&p, &quat_inverse(&q)?)),
        },
        Expr::Pow(a, b) => {
            if !b.is_constant() {
                return Err(Error::EvalError("exponents must not depend on x".into()));
            }
            let p = match eval_generic::<f64>(b, &[0.0])? {
                Val::Scalar(p) => p,
                Val::Quat(_) => return Err(Error::EvalError("quaternion exponent".into())),
            };
            let integral = p.fract() == 0.0 && p.abs() <= MAX_INT_POWER;
            match eval_generic(a, x)? {
                Val::Scalar(s) if integral => Val::Scalar(s.powi(p as i32)?),
                Val::Scalar(s) => Val::Scalar(s.powf(p)?),
                Val::Quat(q) if integral => Val::Quat(quat_powi(&q, p as i64)?),
                Val::Quat(_) => return Err(Error::EvalError("non-integer power of a quaternion".into())),
            }
        }
        Expr::Call(f, a) => match (f, eval_generic(a, x)?) {
            (Func::Sin, Val::Scalar(s)) => Val::Scalar(s.sin()?),
            (Func::Cos, Val::Scalar(s)) => Val::Scalar(s.cos()?),
            (Func::Abs, Val::Scalar(s)) => Val::Scalar(s.abs()?),
            (Func::Abs, Val::Quat(q)) => Val::Scalar(T::quat_norm(&q)?),
            (f, Val::Quat(_)) => {
                return Err(Error::EvalError(format!("{} is not defined for quaternions", f.name())))
            }
        },
    })
}

fn as_quat<T: Scalar>(v: Val<T>) -> [T; 4] {
    match v {
        Val::Scalar(s) => promote(&s),
        Val::Quat(q) => q,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, x: f64) -> f64 {
        parse_expr(src).unwrap().eval(&[x]).unwrap().as_scalar().unwrap()
    }

    #[test]
    fn evaluates_coefficients_of_the_first_example() {
        assert_eq!(ev("0.5*sin(x)", 0.0), 0.0);
        assert_eq!(ev("x", 0.7), 0.7);
        assert!((ev("-2/3*cos(x)", 0.0) + 2.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn division_by_zero_is_an_eval_error() {
        let e = parse_expr("1/x").unwrap();
        assert!(matches!(e.eval(&[0.0]), Err(Error::EvalError(_))));
    }

    #[test]
    fn quaternion_literal_products() {
        let opts = ParseOptions { allow_quaternion: true };
        let e = parse_expr_with("(0,1,0,0)*(0,0,1,0)", opts).unwrap();
        assert_eq!(e.eval(&[0.0]).unwrap(), Value::Quat(Quaternion::new(0.0, 0.0, 0.0, 1.0)));
        let e = parse_expr_with("(0,1,0,0)^2", opts).unwrap();
        assert_eq!(e.eval(&[0.0]).unwrap(), Value::Quat(Quaternion::real(-1.0)));
    }

    #[test]
    fn quaternion_point_variable_in_four_dims() {
        let e = parse_expr("x[2] + abs(x)").unwrap();
        let v = e.eval(&[0.0, 0.0, 3.0, 4.0]).unwrap();
        assert_eq!(v, Value::Scalar(8.0));
    }

    #[test]
    fn substitution_composes_with_affine_map() {
        let f = parse_expr("x^2").unwrap();
        let g = f.substitute_x(&parse_expr("0.5*x + 0.5").unwrap());
        assert_eq!(g.eval(&[1.0]).unwrap(), Value::Scalar(1.0));
    }

    #[test]
    fn rational_constants_are_exact() {
        let e = parse_expr("2/3").unwrap();
        assert_eq!(e.as_rational(), Some(Ratio::new(2, 3)));
        assert_eq!(parse_expr("x/3").unwrap().as_rational(), None);
    }

    #[test]
    fn non_constant_exponent_rejected() {
        assert!(parse_expr("2^x").unwrap().eval(&[1.0]).is_err());
    }
}
