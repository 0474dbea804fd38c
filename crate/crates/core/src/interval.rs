//! Outward-rounded interval arithmetic and first-order interval jets.
//!
//! These are the two enclosure types the expression evaluator runs over when
//! certifying bounds: [`Interval`] encloses the range of an expression on a box,
//! [`Jet`] additionally encloses every partial derivative, which is what the
//! Lipschitz inflation in sup-norm certification needs.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::error::{Error, Result};
use crate::expr::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "inverted interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    /// Largest absolute value in the interval.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    fn outward(lo: f64, hi: f64) -> Self {
        if lo == hi && lo == 0.0 {
            return Interval::point(0.0);
        }
        Interval { lo: lo.next_down(), hi: hi.next_up() }
    }

    fn hull(vals: &[f64]) -> Self {
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval::outward(lo, hi)
    }

    pub fn add(self, o: Self) -> Self {
        Interval::outward(self.lo + o.lo, self.hi + o.hi)
    }

    pub fn sub(self, o: Self) -> Self {
        Interval::outward(self.lo - o.hi, self.hi - o.lo)
    }

    pub fn neg(self) -> Self {
        Interval { lo: -self.hi, hi: -self.lo }
    }

    pub fn mul(self, o: Self) -> Self {
        if (self.lo == 0.0 && self.hi == 0.0) || (o.lo == 0.0 && o.hi == 0.0) {
            return Interval::point(0.0);
        }
        Interval::hull(&[self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi])
    }

    pub fn div(self, o: Self) -> Result<Self> {
        if o.contains_zero() {
            return Err(Error::EvalError(format!(
                "division by an interval containing zero [{}, {}]",
                o.lo, o.hi
            )));
        }
        Ok(Interval::hull(&[self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi]))
    }

    pub fn sqr(self) -> Self {
        self.powi(2)
    }

    pub fn abs(self) -> Self {
        if self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            self.neg()
        } else {
            Interval::new(0.0, self.mag())
        }
    }

    pub fn sqrt(self) -> Result<Self> {
        if self.hi < 0.0 {
            return Err(Error::EvalError("square root of a negative interval".into()));
        }
        let lo = self.lo.max(0.0).sqrt();
        Ok(Interval::outward(lo, self.hi.sqrt()).clamp_below(0.0))
    }

    fn clamp_below(self, floor: f64) -> Self {
        Interval { lo: self.lo.max(floor), hi: self.hi }
    }

    pub fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Interval::point(1.0);
        }
        if n == 1 {
            return self;
        }
        if n % 2 == 0 {
            let a = self.abs();
            Interval::outward(a.lo.powi(n), a.hi.powi(n)).clamp_below(0.0)
        } else {
            Interval::outward(self.lo.powi(n), self.hi.powi(n))
        }
    }

    /// `self^p` for a real exponent; requires a nonnegative base.
    pub fn powf(self, p: f64) -> Result<Self> {
        if self.lo < 0.0 || (self.lo == 0.0 && p < 0.0) {
            return Err(Error::EvalError(format!(
                "non-integer power {p} of interval [{}, {}]",
                self.lo, self.hi
            )));
        }
        let (a, b) = (self.lo.powf(p), self.hi.powf(p));
        Ok(Interval::outward(a.min(b), a.max(b)).clamp_below(0.0))
    }

    /// Enclosure of `sin` over the interval.
    pub fn sin(self) -> Self {
        // maxima at pi/2 + 2k pi, minima at -pi/2 + 2k pi
        self.trig(f64::sin, FRAC_PI_2, -FRAC_PI_2)
    }

    /// Enclosure of `cos` over the interval.
    pub fn cos(self) -> Self {
        self.trig(f64::cos, 0.0, PI)
    }

    fn trig(self, f: fn(f64) -> f64, peak: f64, trough: f64) -> Self {
        if self.width() >= TAU {
            return Interval::new(-1.0, 1.0);
        }
        let (fa, fb) = (f(self.lo), f(self.hi));
        let mut lo = fa.min(fb);
        let mut hi = fa.max(fb);
        if hits_phase(self, peak) {
            hi = 1.0;
        }
        if hits_phase(self, trough) {
            lo = -1.0;
        }
        // libm sin/cos are accurate to about one ulp
        let slack = 4.0 * f64::EPSILON;
        Interval::new((lo - slack).max(-1.0), (hi + slack).min(1.0))
    }
}

/// Whether `phase + 2k pi` lies in the interval for some integer k.
fn hits_phase(iv: Interval, phase: f64) -> bool {
    let k = ((iv.lo - phase) / TAU).ceil();
    let t = phase + k * TAU;
    // conservative: also accept a point just below lo lost to rounding
    t <= iv.hi + 1e-12 || phase + (k - 1.0) * TAU >= iv.lo - 1e-12
}

impl Scalar for Interval {
    fn constant(v: f64, _like: &Self) -> Self {
        Interval::point(v)
    }
    fn add(&self, o: &Self) -> Self {
        Interval::add(*self, *o)
    }
    fn sub(&self, o: &Self) -> Self {
        Interval::sub(*self, *o)
    }
    fn mul(&self, o: &Self) -> Self {
        Interval::mul(*self, *o)
    }
    fn neg(&self) -> Self {
        Interval::neg(*self)
    }
    fn div(&self, o: &Self) -> Result<Self> {
        Interval::div(*self, *o)
    }
    fn sin(&self) -> Result<Self> {
        Ok(Interval::sin(*self))
    }
    fn cos(&self) -> Result<Self> {
        Ok(Interval::cos(*self))
    }
    fn abs(&self) -> Result<Self> {
        Ok(Interval::abs(*self))
    }
    fn sqrt(&self) -> Result<Self> {
        Interval::sqrt(*self)
    }
    fn powi(&self, n: i32) -> Result<Self> {
        if n < 0 {
            Interval::point(1.0).div(Interval::powi(*self, -n))
        } else {
            Ok(Interval::powi(*self, n))
        }
    }
    fn powf(&self, p: f64) -> Result<Self> {
        Interval::powf(*self, p)
    }
}

/// An interval enclosure of a value together with enclosures of its partial
/// derivatives with respect to up to four coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: Interval,
    grad: [Interval; 4],
    dim: usize,
}

impl Jet {
    /// The coordinate function `x[index]` over `range`.
    pub fn variable(range: Interval, index: usize, dim: usize) -> Self {
        assert!(dim <= 4 && index < dim);
        let mut grad = [Interval::point(0.0); 4];
        grad[index] = Interval::point(1.0);
        Jet { value: range, grad, dim }
    }

    pub fn grad(&self) -> &[Interval] {
        &self.grad[..self.dim]
    }

    fn map_grad(&self, factor: Interval) -> [Interval; 4] {
        let mut g = [Interval::point(0.0); 4];
        for (out, d) in g.iter_mut().zip(self.grad()) {
            *out = Interval::mul(*d, factor);
        }
        g
    }

    fn with(&self, value: Interval, grad: [Interval; 4]) -> Self {
        Jet { value, grad, dim: self.dim }
    }
}

impl Scalar for Jet {
    fn constant(v: f64, like: &Self) -> Self {
        Jet { value: Interval::point(v), grad: [Interval::point(0.0); 4], dim: like.dim }
    }

    fn add(&self, o: &Self) -> Self {
        let mut g = self.grad;
        for j in 0..self.dim {
            g[j] = self.grad[j].add(o.grad[j]);
        }
        self.with(self.value.add(o.value), g)
    }

    fn sub(&self, o: &Self) -> Self {
        let mut g = self.grad;
        for j in 0..self.dim {
            g[j] = self.grad[j].sub(o.grad[j]);
        }
        self.with(self.value.sub(o.value), g)
    }

    fn mul(&self, o: &Self) -> Self {
        let mut g = self.grad;
        for j in 0..self.dim {
            g[j] = self.grad[j].mul(o.value).add(self.value.mul(o.grad[j]));
        }
        self.with(self.value.mul(o.value), g)
    }

    fn neg(&self) -> Self {
        let mut g = self.grad;
        for d in g.iter_mut().take(self.dim) {
            *d = d.neg();
        }
        self.with(self.value.neg(), g)
    }

    fn div(&self, o: &Self) -> Result<Self> {
        let value = self.value.div(o.value)?;
        let denom = o.value.sqr();
        let mut g = self.grad;
        for j in 0..self.dim {
            let num = self.grad[j].mul(o.value).sub(self.value.mul(o.grad[j]));
            g[j] = num.div(denom)?;
        }
        Ok(self.with(value, g))
    }

    fn sin(&self) -> Result<Self> {
        Ok(self.with(self.value.sin(), self.map_grad(self.value.cos())))
    }

    fn cos(&self) -> Result<Self> {
        Ok(self.with(self.value.cos(), self.map_grad(self.value.sin().neg())))
    }

    fn abs(&self) -> Result<Self> {
        let sign = if self.value.lo > 0.0 {
            Interval::point(1.0)
        } else if self.value.hi < 0.0 {
            Interval::point(-1.0)
        } else {
            Interval::new(-1.0, 1.0)
        };
        Ok(self.with(self.value.abs(), self.map_grad(sign)))
    }

    fn sqrt(&self) -> Result<Self> {
        if self.value.lo <= 0.0 && self.grad().iter().any(|d| *d != Interval::point(0.0)) {
            return Err(Error::EvalError("square root is not Lipschitz near zero".into()));
        }
        let root = self.value.sqrt()?;
        if self.grad().iter().all(|d| *d == Interval::point(0.0)) {
            return Ok(self.with(root, self.grad));
        }
        let factor = Interval::point(0.5).div(root)?;
        Ok(self.with(root, self.map_grad(factor)))
    }

    fn powi(&self, n: i32) -> Result<Self> {
        if n == 0 {
            return Ok(Jet::constant(1.0, self));
        }
        let value = Scalar::powi(&self.value, n)?;
        let factor = Scalar::powi(&self.value, n - 1)?.mul(Interval::point(n as f64));
        Ok(self.with(value, self.map_grad(factor)))
    }

    fn powf(&self, p: f64) -> Result<Self> {
        let value = self.value.powf(p)?;
        let factor = self.value.powf(p - 1.0)?.mul(Interval::point(p));
        Ok(self.with(value, self.map_grad(factor)))
    }

    fn quat_norm(q: &[Self; 4]) -> Result<Self> {
        // |grad |q|| <= |grad q| componentwise in the Euclidean sense
        let sq = q.iter().fold(Interval::point(0.0), |acc, c| acc.add(c.value.sqr()));
        let value = sq.sqrt()?;
        let mut grad = [Interval::point(0.0); 4];
        let dim = q[0].dim;
        for (j, g) in grad.iter_mut().enumerate().take(dim) {
            let bound = q
                .iter()
                .map(|c| c.grad[j].mag().powi(2))
                .sum::<f64>()
                .sqrt()
                .next_up();
            *g = Interval::new(-bound, bound);
        }
        Ok(Jet { value, grad, dim })
    }
}
