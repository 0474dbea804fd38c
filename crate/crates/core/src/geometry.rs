//! Domains, affine maps and the partitions they generate.
//!
//! Image intervals follow a half-open convention: an image `l_i(X)` owns its
//! left end and owns its right end only when that end is the right end of the
//! domain. With it, images meeting at a point are disjoint and every point of
//! the closed domain has exactly one owner.
//!
//! Endpoint arithmetic is carried out in exact rationals whenever the map
//! coefficients and the domain are representable (every binary float is); if a
//! product overflows the rational representation the comparison falls back to
//! floating point with tolerance [`FLOAT_TOL`].

use std::cmp::Ordering;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = Ratio<i128>;

/// Relative tolerance for endpoint comparisons in floating-point mode.
pub const FLOAT_TOL: f64 = 1e-12;

/// Largest denominator accepted when reading a float as a rational.
const MAX_DENOMINATOR: i128 = 1 << 32;

/// The simplest rational that rounds to `v`, if its denominator is at most
/// `2^32`. Decimal and fractional inputs such as `0.1` or `2.0 / 3.0` come
/// back as `1/10` and `2/3`; floats with no short rational form give `None`
/// and are then handled in floating point with [`FLOAT_TOL`].
pub fn exact_from_f64(v: f64) -> Option<Rational> {
    if !v.is_finite() || v.abs() >= (1u64 << 53) as f64 {
        return None;
    }
    let (mut h0, mut h1, mut k0, mut k1) = (0i128, 1i128, 1i128, 0i128);
    let mut x = v;
    for _ in 0..64 {
        let a = x.floor();
        let ai = a as i128;
        let (h2, k2) = (ai.checked_mul(h1)?.checked_add(h0)?, ai.checked_mul(k1)?.checked_add(k0)?);
        if k2 > MAX_DENOMINATOR {
            return None;
        }
        if h2 as f64 / k2 as f64 == v {
            return Some(Rational::new(h2, k2));
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = x - a;
        if frac == 0.0 {
            return None;
        }
        x = 1.0 / frac;
    }
    None
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// An axis-aligned box `[lo, hi]` or `[lo, hi)` per dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
    closed_hi: Vec<bool>,
}

impl DomainBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, closed_hi: Vec<bool>) -> Result<Self> {
        let d = lo.len();
        if !(d == 1 || d == 4) || hi.len() != d || closed_hi.len() != d {
            return Err(Error::InvalidArgument(format!("boxes must be 1-D or 4-D, got {d} dims")));
        }
        for j in 0..d {
            if !(lo[j] < hi[j]) || !lo[j].is_finite() || !hi[j].is_finite() {
                return Err(Error::InvalidArgument(format!("empty box side [{}, {}]", lo[j], hi[j])));
            }
        }
        Ok(DomainBox { lo, hi, closed_hi })
    }

    /// The closed interval `[lo, hi]`.
    pub fn closed(lo: f64, hi: f64) -> Self {
        DomainBox::new(vec![lo], vec![hi], vec![true]).expect("valid interval")
    }

    /// The half-open interval `[lo, hi)`.
    pub fn half_open(lo: f64, hi: f64) -> Self {
        DomainBox::new(vec![lo], vec![hi], vec![false]).expect("valid interval")
    }

    /// The closed cube `[lo, hi]^4`.
    pub fn cube4(lo: f64, hi: f64) -> Self {
        DomainBox::new(vec![lo; 4], vec![hi; 4], vec![true; 4]).expect("valid cube")
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn closed_hi(&self) -> &[bool] {
        &self.closed_hi
    }

    pub fn width(&self, j: usize) -> f64 {
        self.hi[j] - self.lo[j]
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|j| self.width(j)).product()
    }

    /// Membership in the closure, with a relative slack of [`FLOAT_TOL`].
    pub fn contains_closure(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && (0..self.dim()).all(|j| {
                let tol = FLOAT_TOL * self.width(j).max(1.0);
                x[j] >= self.lo[j] - tol && x[j] <= self.hi[j] + tol
            })
    }

    /// Clamp a point that is inside the closure up to rounding.
    pub fn clamp(&self, x: &mut [f64]) {
        for (j, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lo[j], self.hi[j]);
        }
    }

    pub fn is_superset_of(&self, other: &DomainBox) -> bool {
        self.dim() == other.dim()
            && (0..self.dim()).all(|j| {
                let tol = FLOAT_TOL * self.width(j).max(1.0);
                other.lo[j] >= self.lo[j] - tol && other.hi[j] <= self.hi[j] + tol
            })
    }
}

/// `l(x)_j = scale_j * x_j + offset_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    scale: Vec<f64>,
    offset: Vec<f64>,
    exact: Option<(Vec<Rational>, Vec<Rational>)>,
}

impl AffineMap {
    pub fn new(scale: Vec<f64>, offset: Vec<f64>) -> Self {
        assert_eq!(scale.len(), offset.len(), "scale and offset dimensions differ");
        let exact = scale
            .iter()
            .map(|v| exact_from_f64(*v))
            .collect::<Option<Vec<_>>>()
            .zip(offset.iter().map(|v| exact_from_f64(*v)).collect::<Option<Vec<_>>>());
        AffineMap { scale, offset, exact }
    }

    /// A 1-D map `a x + b`.
    pub fn linear(a: f64, b: f64) -> Self {
        AffineMap::new(vec![a], vec![b])
    }

    pub fn from_rationals(scale: Vec<Rational>, offset: Vec<Rational>) -> Self {
        assert_eq!(scale.len(), offset.len(), "scale and offset dimensions differ");
        AffineMap {
            scale: scale.iter().map(rational_to_f64).collect(),
            offset: offset.iter().map(rational_to_f64).collect(),
            exact: Some((scale, offset)),
        }
    }

    /// A 1-D map with rational coefficients `(a_num/a_den) x + b_num/b_den`.
    pub fn ratio(a: (i128, i128), b: (i128, i128)) -> Self {
        AffineMap::from_rationals(vec![Rational::new(a.0, a.1)], vec![Rational::new(b.0, b.1)])
    }

    pub fn identity(dim: usize) -> Self {
        AffineMap::from_rationals(vec![Rational::from_integer(1); dim], vec![Rational::zero(); dim])
    }

    pub fn dim(&self) -> usize {
        self.scale.len()
    }

    pub fn scale(&self) -> &[f64] {
        &self.scale
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    pub fn exact(&self) -> Option<(&[Rational], &[Rational])> {
        self.exact.as_ref().map(|(a, b)| (a.as_slice(), b.as_slice()))
    }

    pub fn is_injective(&self) -> bool {
        self.scale.iter().all(|a| *a != 0.0)
    }

    pub fn lipschitz(&self) -> f64 {
        self.scale.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    /// `|det l'|`, the factor by which the map scales volume.
    pub fn jacobian(&self) -> f64 {
        self.scale.iter().map(|a| a.abs()).product()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.scale).zip(&self.offset).map(|((x, a), b)| a * x + b).collect()
    }

    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        for j in 0..x.len() {
            out[j] = self.scale[j] * x[j] + self.offset[j];
        }
    }

    pub fn apply_exact(&self, x: &[Rational]) -> Option<Vec<Rational>> {
        let (a, b) = self.exact.as_ref()?;
        x.iter()
            .zip(a)
            .zip(b)
            .map(|((x, a), b)| a.checked_mul(x)?.checked_add(b))
            .collect()
    }

    /// The fixed point of a contraction in one dimension.
    pub fn fixed_point_1d(&self) -> Option<f64> {
        let a = self.scale[0];
        if a == 1.0 {
            return None;
        }
        Some(self.offset[0] / (1.0 - a))
    }
}

/// `m^{-1}` such that `m^{-1}(m(x)) = x`; exact when `m` has rational coefficients.
pub fn affine_inverse(m: &AffineMap) -> Result<AffineMap> {
    if let Some(dim) = m.scale.iter().position(|a| *a == 0.0) {
        return Err(Error::NonInjectiveMap { index: 0, dim });
    }
    if let Some((a, b)) = &m.exact {
        let inv: Option<(Vec<Rational>, Vec<Rational>)> = a
            .iter()
            .zip(b)
            .map(|(a, b)| {
                let ia = Rational::from_integer(1).checked_div(a)?;
                let ib = -(b.checked_mul(&ia)?);
                Some((ia, ib))
            })
            .collect::<Option<Vec<_>>>()
            .map(|v| v.into_iter().unzip());
        if let Some((ia, ib)) = inv {
            return Ok(AffineMap::from_rationals(ia, ib));
        }
    }
    let scale: Vec<f64> = m.scale.iter().map(|a| 1.0 / a).collect();
    let offset = m.offset.iter().zip(&m.scale).map(|(b, a)| -b / a).collect();
    Ok(AffineMap { scale, offset, exact: None })
}

/// An endpoint value, exact when possible.
#[derive(Debug, Clone, PartialEq)]
struct Pt {
    f: f64,
    q: Option<Rational>,
}

impl Pt {
    fn new(f: f64, q: Option<Rational>) -> Self {
        Pt { f, q }
    }

    fn cmp_tol(&self, o: &Pt, scale: f64) -> Ordering {
        if let (Some(a), Some(b)) = (&self.q, &o.q) {
            return a.cmp(b);
        }
        let tol = FLOAT_TOL * scale.max(1.0);
        if (self.f - o.f).abs() <= tol {
            Ordering::Equal
        } else {
            self.f.partial_cmp(&o.f).unwrap_or(Ordering::Equal)
        }
    }
}

/// One side of an image box, with closedness of the ends as sets.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageSide {
    pub lo: f64,
    pub hi: f64,
    pub includes_lo: bool,
    pub includes_hi: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageBox {
    /// Index of the map producing this image.
    pub index: usize,
    pub sides: Vec<ImageSide>,
}

/// A point where the closed images of two maps touch (1-D only).
#[derive(Debug, Clone, PartialEq)]
pub struct Contact {
    pub point: f64,
    /// Map whose image lies to the left of the point.
    pub left: usize,
    pub right: usize,
    /// `l_left^{-1}(point)` and `l_right^{-1}(point)`.
    pub left_preimage: f64,
    pub right_preimage: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionReport {
    /// Images pairwise disjoint under the half-open convention.
    pub disjoint: bool,
    /// Union of images equals the domain (up to shared endpoints).
    pub covers: bool,
    /// Endpoint comparisons were carried out in exact rationals.
    pub exact: bool,
    /// Images sorted by lower corner.
    pub images: Vec<ImageBox>,
    /// Lipschitz constant of each map, in map order.
    pub lipschitz: Vec<f64>,
    /// Pairs of maps whose images overlap in a set of positive measure.
    pub overlaps: Vec<(usize, usize)>,
    /// Uncovered sub-intervals of the domain (1-D only).
    pub gaps: Vec<(f64, f64)>,
    /// Shared endpoints of closed images, to be checked for compatibility.
    pub contacts: Vec<Contact>,
    /// Every map is a strict contraction.
    pub contractive: bool,
}

/// A domain together with injective affine maps, each defined on its own
/// source box (the whole domain in the global setting).
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    domain: DomainBox,
    sources: Vec<DomainBox>,
    maps: Vec<AffineMap>,
    inverses: Vec<AffineMap>,
    images: Vec<DomainBox>,
}

impl Partition {
    /// Global partition: every map acts on the whole domain.
    pub fn new(domain: DomainBox, maps: Vec<AffineMap>) -> Result<Self> {
        let sources = vec![domain.clone(); maps.len()];
        Partition::with_sources(domain, sources, maps)
    }

    /// Local partition: map `i` acts on `sources[i]`.
    pub fn with_sources(domain: DomainBox, sources: Vec<DomainBox>, maps: Vec<AffineMap>) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::EmptyFamily);
        }
        if sources.len() != maps.len() {
            return Err(Error::ShapeMismatch(format!("{} source boxes for {} maps", sources.len(), maps.len())));
        }
        let d = domain.dim();
        let mut inverses = Vec::with_capacity(maps.len());
        let mut images = Vec::with_capacity(maps.len());
        for (i, (m, src)) in maps.iter().zip(&sources).enumerate() {
            if m.dim() != d || src.dim() != d {
                return Err(Error::ShapeMismatch(format!("map {i} is {}-D on a {d}-D domain", m.dim())));
            }
            if let Some(dim) = m.scale.iter().position(|a| *a == 0.0) {
                return Err(Error::NonInjectiveMap { index: i, dim });
            }
            inverses.push(affine_inverse(m)?);
            let (a, b) = (m.apply(src.lo()), m.apply(src.hi()));
            let lo: Vec<f64> = a.iter().zip(&b).map(|(a, b)| a.min(*b)).collect();
            let hi: Vec<f64> = a.iter().zip(&b).map(|(a, b)| a.max(*b)).collect();
            images.push(DomainBox { lo, hi, closed_hi: vec![true; d] });
        }
        Ok(Partition { domain, sources, maps, inverses, images })
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn maps(&self) -> &[AffineMap] {
        &self.maps
    }

    pub fn map(&self, i: usize) -> &AffineMap {
        &self.maps[i]
    }

    pub fn inverse(&self, i: usize) -> &AffineMap {
        &self.inverses[i]
    }

    pub fn source(&self, i: usize) -> &DomainBox {
        &self.sources[i]
    }

    pub fn image(&self, i: usize) -> &DomainBox {
        &self.images[i]
    }

    pub fn is_global(&self) -> bool {
        self.sources.iter().all(|s| *s == self.domain)
    }

    /// The piece owning `x` under the half-open convention, with a fallback
    /// tolerance for points that miss every image by rounding only.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        self.locate_with(x, 0.0).or_else(|| self.locate_with(x, FLOAT_TOL))
    }

    fn locate_with(&self, x: &[f64], rel_tol: f64) -> Option<usize> {
        let dom = &self.domain;
        (0..self.images.len()).find(|&i| {
            let img = &self.images[i];
            (0..dom.dim()).all(|j| {
                let tol = rel_tol * dom.width(j).max(1.0);
                let right_closed = img.hi[j] >= dom.hi[j];
                x[j] >= img.lo[j] - tol && (x[j] < img.hi[j] - tol || (right_closed && x[j] <= img.hi[j] + tol))
            })
        })
    }

    /// Check disjointness and coverage of the images.
    pub fn verify(&self) -> PartitionReport {
        if self.domain.dim() == 1 {
            self.verify_1d()
        } else {
            self.verify_nd()
        }
    }

    fn endpoints_1d(&self, i: usize) -> (Pt, Pt, bool, bool) {
        let m = &self.maps[i];
        let src = &self.sources[i];
        let ends = [src.lo[0], src.hi[0]];
        let exact: Option<Vec<Rational>> = ends
            .iter()
            .map(|v| exact_from_f64(*v))
            .collect::<Option<Vec<_>>>()
            .and_then(|e| e.into_iter().map(|v| m.apply_exact(&[v]).map(|r| r[0])).collect());
        let fl = [m.scale[0] * ends[0] + m.offset[0], m.scale[0] * ends[1] + m.offset[0]];
        let p0 = Pt::new(fl[0], exact.as_ref().map(|e| e[0]));
        let p1 = Pt::new(fl[1], exact.as_ref().map(|e| e[1]));
        let src_hi_closed = src.closed_hi[0];
        if m.scale[0] > 0.0 {
            (p0, p1, true, src_hi_closed)
        } else {
            (p1, p0, src_hi_closed, true)
        }
    }

    fn verify_1d(&self) -> PartitionReport {
        let n = self.maps.len();
        let width = self.domain.width(0);
        let ends: Vec<_> = (0..n).map(|i| self.endpoints_1d(i)).collect();
        let exact = ends.iter().all(|(a, b, _, _)| a.q.is_some() && b.q.is_some());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| ends[a].0.cmp_tol(&ends[b].0, width).then(a.cmp(&b)));

        let mut overlaps = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let lo = if ends[i].0.cmp_tol(&ends[j].0, width) == Ordering::Greater { &ends[i].0 } else { &ends[j].0 };
                let hi = if ends[i].1.cmp_tol(&ends[j].1, width) == Ordering::Less { &ends[i].1 } else { &ends[j].1 };
                if lo.cmp_tol(hi, width) == Ordering::Less {
                    overlaps.push((i, j));
                }
            }
        }

        let dom_lo = Pt::new(self.domain.lo[0], exact_from_f64(self.domain.lo[0]));
        let dom_hi = Pt::new(self.domain.hi[0], exact_from_f64(self.domain.hi[0]));
        let mut gaps = Vec::new();
        let mut reach = dom_lo.clone();
        let mut within = true;
        for &i in &order {
            let (lo, hi, _, _) = &ends[i];
            if lo.cmp_tol(&dom_lo, width) == Ordering::Less || hi.cmp_tol(&dom_hi, width) == Ordering::Greater {
                within = false;
            }
            if lo.cmp_tol(&reach, width) == Ordering::Greater {
                gaps.push((reach.f, lo.f));
            }
            if hi.cmp_tol(&reach, width) == Ordering::Greater {
                reach = hi.clone();
            }
        }
        if reach.cmp_tol(&dom_hi, width) == Ordering::Less {
            gaps.push((reach.f, dom_hi.f));
        }

        let mut contacts = Vec::new();
        for w in order.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (_, a_hi, _, a_inc_hi) = &ends[a];
            let (b_lo, _, b_inc_lo, _) = &ends[b];
            if a_hi.cmp_tol(b_lo, width) == Ordering::Equal && *a_inc_hi && *b_inc_lo {
                let p = b_lo.f;
                contacts.push(Contact {
                    point: p,
                    left: a,
                    right: b,
                    left_preimage: self.preimage_endpoint(a, true),
                    right_preimage: self.preimage_endpoint(b, false),
                });
            }
        }

        let images = order
            .iter()
            .map(|&i| {
                let (lo, hi, il, ih) = &ends[i];
                ImageBox { index: i, sides: vec![ImageSide { lo: lo.f, hi: hi.f, includes_lo: *il, includes_hi: *ih }] }
            })
            .collect();
        let lipschitz: Vec<f64> = self.maps.iter().map(AffineMap::lipschitz).collect();
        PartitionReport {
            disjoint: overlaps.is_empty(),
            covers: gaps.is_empty() && within,
            exact,
            images,
            contractive: lipschitz.iter().all(|l| *l < 1.0),
            lipschitz,
            overlaps,
            gaps,
            contacts,
        }
    }

    /// Source endpoint mapped to the right (`right = true`) or left end of image `i`.
    fn preimage_endpoint(&self, i: usize, right: bool) -> f64 {
        let src = &self.sources[i];
        let positive = self.maps[i].scale[0] > 0.0;
        if right == positive {
            src.hi[0]
        } else {
            src.lo[0]
        }
    }

    fn verify_nd(&self) -> PartitionReport {
        let n = self.maps.len();
        let d = self.domain.dim();
        let mut exact = true;
        // per image, per dim: (lo, hi) as exact points
        let mut sides: Vec<Vec<(Pt, Pt)>> = Vec::with_capacity(n);
        for i in 0..n {
            let m = &self.maps[i];
            let src = &self.sources[i];
            let lo_q: Option<Vec<Rational>> = src.lo.iter().map(|v| exact_from_f64(*v)).collect();
            let hi_q: Option<Vec<Rational>> = src.hi.iter().map(|v| exact_from_f64(*v)).collect();
            let a_q = lo_q.and_then(|v| m.apply_exact(&v));
            let b_q = hi_q.and_then(|v| m.apply_exact(&v));
            if a_q.is_none() || b_q.is_none() {
                exact = false;
            }
            let a = m.apply(&src.lo);
            let b = m.apply(&src.hi);
            let mut per = Vec::with_capacity(d);
            for j in 0..d {
                let pa = Pt::new(a[j], a_q.as_ref().map(|v| v[j]));
                let pb = Pt::new(b[j], b_q.as_ref().map(|v| v[j]));
                if m.scale[j] > 0.0 {
                    per.push((pa, pb));
                } else {
                    per.push((pb, pa));
                }
            }
            sides.push(per);
        }
        let w = (0..d).map(|j| self.domain.width(j)).fold(0.0, f64::max);

        let mut overlaps = Vec::new();
        for i in 0..n {
            for k in i + 1..n {
                let meet = (0..d).all(|j| {
                    let lo = if sides[i][j].0.cmp_tol(&sides[k][j].0, w) == Ordering::Greater { &sides[i][j].0 } else { &sides[k][j].0 };
                    let hi = if sides[i][j].1.cmp_tol(&sides[k][j].1, w) == Ordering::Less { &sides[i][j].1 } else { &sides[k][j].1 };
                    lo.cmp_tol(hi, w) == Ordering::Less
                });
                if meet {
                    overlaps.push((i, k));
                }
            }
        }

        let within = sides.iter().all(|per| {
            per.iter().enumerate().all(|(j, (lo, hi))| {
                let dlo = Pt::new(self.domain.lo[j], exact_from_f64(self.domain.lo[j]));
                let dhi = Pt::new(self.domain.hi[j], exact_from_f64(self.domain.hi[j]));
                lo.cmp_tol(&dlo, w) != Ordering::Less && hi.cmp_tol(&dhi, w) != Ordering::Greater
            })
        });

        let covers = within && self.covers_by_cells(&sides, w);

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            (0..d)
                .map(|j| sides[a][j].0.cmp_tol(&sides[b][j].0, w))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
                .then(a.cmp(&b))
        });
        let images = order
            .iter()
            .map(|&i| ImageBox {
                index: i,
                sides: sides[i]
                    .iter()
                    .map(|(lo, hi)| ImageSide { lo: lo.f, hi: hi.f, includes_lo: true, includes_hi: true })
                    .collect(),
            })
            .collect();
        let lipschitz: Vec<f64> = self.maps.iter().map(AffineMap::lipschitz).collect();
        PartitionReport {
            disjoint: overlaps.is_empty(),
            covers,
            exact,
            images,
            contractive: lipschitz.iter().all(|l| *l < 1.0),
            lipschitz,
            overlaps,
            gaps: Vec::new(),
            contacts: Vec::new(),
        }
    }

    /// Coordinate compression: every elementary cell of the grid spanned by
    /// all image breakpoints must lie in some image.
    fn covers_by_cells(&self, sides: &[Vec<(Pt, Pt)>], w: f64) -> bool {
        let d = self.domain.dim();
        let mut cuts: Vec<Vec<f64>> = Vec::with_capacity(d);
        for j in 0..d {
            let mut c: Vec<f64> = vec![self.domain.lo[j], self.domain.hi[j]];
            for per in sides {
                c.push(per[j].0.f);
                c.push(per[j].1.f);
            }
            c.sort_by(|a, b| a.partial_cmp(b).unwrap());
            c.dedup_by(|a, b| (*a - *b).abs() <= FLOAT_TOL * w.max(1.0));
            c.retain(|v| *v >= self.domain.lo[j] && *v <= self.domain.hi[j]);
            cuts.push(c);
        }
        let counts: Vec<usize> = cuts.iter().map(|c| c.len() - 1).collect();
        let total: usize = counts.iter().product();
        let mut idx = vec![0usize; d];
        let mut mid = vec![0.0; d];
        for _ in 0..total {
            for j in 0..d {
                mid[j] = 0.5 * (cuts[j][idx[j]] + cuts[j][idx[j] + 1]);
            }
            let hit = sides.iter().any(|per| per.iter().enumerate().all(|(j, (lo, hi))| lo.f < mid[j] && mid[j] < hi.f));
            if !hit {
                return false;
            }
            for j in 0..d {
                idx[j] += 1;
                if idx[j] < counts[j] {
                    break;
                }
                idx[j] = 0;
            }
        }
        true
    }
}

/// Build a global partition and report on it.
pub fn verify_partition(maps: &[AffineMap], domain: &DomainBox) -> Result<PartitionReport> {
    Ok(Partition::new(domain.clone(), maps.to_vec())?.verify())
}

/// The sixteen maps `x -> x/2 + c/2`, `c in {-1, 1}^4`, taking `[-1, 1]^4`
/// onto its half-scale subcubes.
pub fn cube_maps() -> Vec<AffineMap> {
    let half = Rational::new(1, 2);
    (0..16)
        .map(|bits: u32| {
            let offset = (0..4)
                .map(|j| if bits >> j & 1 == 1 { half } else { -half })
                .collect();
            AffineMap::from_rationals(vec![half; 4], offset)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example1_maps() -> Vec<AffineMap> {
        vec![AffineMap::ratio((1, 3), (0, 1)), AffineMap::ratio((2, 3), (1, 3))]
    }

    #[test]
    fn first_example_partitions_the_half_open_interval() {
        let r = verify_partition(&example1_maps(), &DomainBox::half_open(0.0, 1.0)).unwrap();
        assert!(r.disjoint && r.covers && r.exact);
        assert!(r.contacts.is_empty());
        let s = &r.images[0].sides[0];
        assert_eq!((s.lo, s.hi, s.includes_hi), (0.0, 1.0 / 3.0, false));
        let s = &r.images[1].sides[0];
        assert_eq!((s.lo, s.hi), (1.0 / 3.0, 1.0));
        assert_eq!(r.lipschitz, vec![1.0 / 3.0, 2.0 / 3.0]);
    }

    #[test]
    fn closed_domain_yields_a_contact_point() {
        let r = verify_partition(&example1_maps(), &DomainBox::closed(0.0, 1.0)).unwrap();
        assert!(r.disjoint && r.covers);
        assert_eq!(r.contacts.len(), 1);
        let c = &r.contacts[0];
        assert_eq!((c.left, c.right), (0, 1));
        assert_eq!((c.left_preimage, c.right_preimage), (1.0, 0.0));
    }

    #[test]
    fn identity_map_is_a_trivial_partition() {
        let r = verify_partition(&[AffineMap::identity(1)], &DomainBox::half_open(0.0, 1.0)).unwrap();
        assert!(r.disjoint && r.covers);
        assert!(!r.contractive);
    }

    #[test]
    fn overlapping_halves_fail_both_tests() {
        let maps = [AffineMap::ratio((1, 2), (0, 1)), AffineMap::ratio((1, 2), (1, 4))];
        let r = verify_partition(&maps, &DomainBox::half_open(0.0, 1.0)).unwrap();
        assert!(!r.disjoint && !r.covers);
        assert_eq!(r.overlaps, vec![(0, 1)]);
        assert_eq!(r.gaps, vec![(0.75, 1.0)]);
    }

    #[test]
    fn perturbed_offset_flips_a_verdict() {
        for delta in [1e-6, -1e-6] {
            let maps = [AffineMap::ratio((1, 3), (0, 1)), AffineMap::linear(2.0 / 3.0, 1.0 / 3.0 + delta)];
            let r = verify_partition(&maps, &DomainBox::half_open(0.0, 1.0)).unwrap();
            assert!(!(r.disjoint && r.covers), "delta {delta}");
        }
    }

    #[test]
    fn empty_and_degenerate_families_rejected() {
        let dom = DomainBox::closed(0.0, 1.0);
        assert_eq!(verify_partition(&[], &dom), Err(Error::EmptyFamily));
        assert_eq!(
            verify_partition(&[AffineMap::linear(0.0, 0.5)], &dom),
            Err(Error::NonInjectiveMap { index: 0, dim: 0 })
        );
    }

    #[test]
    fn inverse_examples() {
        let inv = affine_inverse(&AffineMap::ratio((1, 3), (0, 1))).unwrap();
        assert_eq!(inv.scale(), &[3.0]);
        assert_eq!(inv.offset(), &[0.0]);
        let inv = affine_inverse(&AffineMap::ratio((2, 3), (1, 3))).unwrap();
        assert_eq!(inv.exact().unwrap().0[0], Rational::new(3, 2));
        assert_eq!(inv.exact().unwrap().1[0], Rational::new(-1, 2));
        let id = AffineMap::identity(1);
        assert_eq!(affine_inverse(&id).unwrap(), id);
        assert!(affine_inverse(&AffineMap::linear(0.0, 1.0)).is_err());
    }

    #[test]
    fn exact_float_conversion() {
        assert_eq!(exact_from_f64(0.5), Some(Rational::new(1, 2)));
        assert_eq!(exact_from_f64(-3.0), Some(Rational::from_integer(-3)));
        assert_eq!(exact_from_f64(0.1), Some(Rational::new(1, 10)));
        assert_eq!(exact_from_f64(2.0 / 3.0), Some(Rational::new(2, 3)));
        assert_eq!(exact_from_f64(-0.75), Some(Rational::new(-3, 4)));
        assert_eq!(exact_from_f64(1.0 / 3.0 + 1e-6), None);
        assert_eq!(exact_from_f64(f64::NAN), None);
    }

    #[test]
    fn cube_maps_partition_the_cube() {
        let r = verify_partition(&cube_maps(), &DomainBox::cube4(-1.0, 1.0)).unwrap();
        assert!(r.disjoint && r.covers && r.exact);
        assert_eq!(r.images.len(), 16);
    }

    #[test]
    fn missing_subcube_breaks_cover() {
        let mut maps = cube_maps();
        maps.pop();
        let r = verify_partition(&maps, &DomainBox::cube4(-1.0, 1.0)).unwrap();
        assert!(r.disjoint && !r.covers);
    }

    #[test]
    fn locate_uses_half_open_convention() {
        let p = Partition::new(DomainBox::closed(0.0, 1.0), example1_maps()).unwrap();
        assert_eq!(p.locate(&[0.0]), Some(0));
        assert_eq!(p.locate(&[1.0 / 3.0]), Some(1));
        assert_eq!(p.locate(&[1.0]), Some(1));
    }

    #[test]
    fn negative_scale_contact_preimages() {
        // l1 = x/2 reversed onto [0, 1/2], l2 = x/2 + 1/2
        let maps = [AffineMap::ratio((-1, 2), (1, 2)), AffineMap::ratio((1, 2), (1, 2))];
        let r = verify_partition(&maps, &DomainBox::closed(0.0, 1.0)).unwrap();
        assert_eq!(r.contacts.len(), 1);
        assert_eq!(r.contacts[0].left_preimage, 0.0);
        assert_eq!(r.contacts[0].right_preimage, 0.0);
    }
}
