//! Node-level machinery shared by the global, local and quaternionic operators.
//!
//! For a fixed grid the operator is an affine map of the node values: node
//! `x` in the image of piece `i` gets `q_i(xi) + s_i(xi) * f(xi)` with
//! `xi = l_i^{-1}(x)` and `f(xi)` a convex combination of node values. A
//! [`Plan`] caches the piece, coefficient values and interpolation stencil of
//! every node so that repeated applications only do the arithmetic.

use rayon::prelude::*;

use crate::coefficient::CoefficientFn;
use crate::error::{Error, Result};
use crate::expr::Value;
use crate::geometry::{DomainBox, Partition};
use crate::global::FixedPointResult;
use crate::grid::{self, sup_distance, GridFunction};
use crate::quaternion::Quaternion;

/// Operators with a contraction factor at or above `1 - NOT_CONTRACTIVE_BAND`
/// are refused.
pub const NOT_CONTRACTIVE_BAND: f64 = 1e-12;

/// How `s_i(xi)` multiplies `f(xi)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Product {
    /// Real scale times each component.
    Scalar,
    /// Quaternion product `s * f`.
    Left,
    /// Quaternion product `f * s`.
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct PieceSet {
    pub partition: Partition,
    pub q: Vec<CoefficientFn>,
    pub s: Vec<CoefficientFn>,
    pub value_dim: usize,
    pub product: Product,
}

/// One application of the self-referential equation at a point.
#[derive(Debug, Clone)]
pub(crate) struct Step {
    pub piece: usize,
    pub xi: Vec<f64>,
    pub q: [f64; 4],
    pub s: [f64; 4],
}

#[derive(Debug, Clone)]
struct NodePlan {
    q: [f64; 4],
    s: [f64; 4],
    stencil: Vec<(u32, f64)>,
}

#[derive(Debug, Clone)]
pub(crate) struct Plan {
    domain: DomainBox,
    resolution: usize,
    value_dim: usize,
    product: Product,
    nodes: Vec<NodePlan>,
}

fn pad(v: &Value) -> [f64; 4] {
    match v {
        Value::Scalar(r) => [*r, 0.0, 0.0, 0.0],
        Value::Quat(q) => q.to_array(),
    }
}

impl PieceSet {
    /// Check counts, domains and value kinds; returns the value dimension.
    pub fn new(partition: Partition, q: Vec<CoefficientFn>, s: Vec<CoefficientFn>, product: Product) -> Result<Self> {
        let n = partition.len();
        if q.len() != n || s.len() != n {
            return Err(Error::ShapeMismatch(format!("{n} maps but {} q and {} s functions", q.len(), s.len())));
        }
        for i in 0..n {
            let src = partition.source(i);
            for c in [&q[i], &s[i]] {
                if !c.domain().is_superset_of(src) {
                    return Err(Error::ShapeMismatch(format!("coefficient domain of piece {i} does not contain its source set")));
                }
            }
            if product == Product::Scalar && s[i].value_dim() != 1 {
                return Err(Error::ValueKind(format!("s_{} is quaternion-valued in a real operator", i + 1)));
            }
        }
        let value_dim = match product {
            Product::Scalar => {
                if let Some(i) = q.iter().position(|c| c.value_dim() != 1) {
                    return Err(Error::ValueKind(format!("q_{} is quaternion-valued in a real operator", i + 1)));
                }
                1
            }
            Product::Left | Product::Right => 4,
        };
        Ok(PieceSet { partition, q, s, value_dim, product })
    }

    pub fn contraction(&self) -> f64 {
        self.s.iter().map(CoefficientFn::sup_bound).fold(0.0, f64::max)
    }

    pub fn max_q(&self) -> f64 {
        self.q.iter().map(CoefficientFn::sup_bound).fold(0.0, f64::max)
    }

    pub fn step(&self, x: &[f64]) -> Result<Step> {
        let piece = self.partition.locate(x).ok_or_else(|| Error::PartitionGap { point: x.to_vec() })?;
        let mut xi = self.partition.inverse(piece).apply(x);
        self.partition.source(piece).clamp(&mut xi);
        let q = pad(&self.q[piece].eval_clamped(&xi)?);
        let s = pad(&self.s[piece].eval_clamped(&xi)?);
        Ok(Step { piece, xi, q, s })
    }

    pub fn plan(&self, domain: &DomainBox, resolution: usize) -> Result<Plan> {
        if *domain != *self.partition.domain() {
            return Err(Error::ShapeMismatch("grid domain differs from the partition domain".into()));
        }
        grid::check_shape(domain, resolution, self.value_dim)?;
        let n = resolution.pow(domain.dim() as u32);
        let nodes = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut x = vec![0.0; domain.dim()];
                grid::node_coords(domain, resolution, i, &mut x);
                let st = self.step(&x)?;
                let stencil = grid::stencil(domain, resolution, &st.xi)?
                    .into_iter()
                    .map(|(k, w)| (k as u32, w))
                    .collect();
                Ok(NodePlan { q: st.q, s: st.s, stencil })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Plan { domain: domain.clone(), resolution, value_dim: self.value_dim, product: self.product, nodes })
    }

    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        self.plan(f.domain(), f.resolution())?.apply(f)
    }

    pub fn iterate(&self, f0: &GridFunction, eps: f64, k_max: usize) -> Result<FixedPointResult> {
        if !(eps > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {eps}")));
        }
        let s = self.contraction();
        if s >= 1.0 - NOT_CONTRACTIVE_BAND {
            return Err(Error::NotContractive { s });
        }
        let plan = self.plan(f0.domain(), f0.resolution())?;
        let mut psi = plan.apply(f0)?;
        let factor = sup_distance(&psi, f0)? / (1.0 - s);
        let mut k = 1usize;
        let mut bound = s * factor;
        while bound > eps {
            if k >= k_max {
                return Err(Error::MaxIterations { iterations: k, bound });
            }
            psi = plan.apply(&psi)?;
            k += 1;
            bound = s.powi(k as i32) * factor;
        }
        let residual = sup_distance(&plan.apply(&psi)?, &psi)?;
        Ok(FixedPointResult { psi, iterations: k, contraction_s: s, apriori_bound: bound, residual })
    }

    /// `T^k f0` for `k >= 0`.
    pub fn power(&self, f0: &GridFunction, k: usize) -> Result<GridFunction> {
        let plan = self.plan(f0.domain(), f0.resolution())?;
        let mut f = f0.clone();
        for _ in 0..k {
            f = plan.apply(&f)?;
        }
        Ok(f)
    }
}

pub(crate) fn combine(product: Product, k: usize, q: &[f64; 4], s: &[f64; 4], f: &[f64], out: &mut [f64]) {
    match product {
        Product::Scalar => {
            for j in 0..k {
                out[j] = q[j] + s[0] * f[j];
            }
        }
        Product::Left | Product::Right => {
            let sq = Quaternion::from_array(*s);
            let fq = Quaternion::from_array([f[0], f[1], f[2], f[3]]);
            let h = if product == Product::Left { sq * fq } else { fq * sq };
            let h = h.to_array();
            for j in 0..4 {
                out[j] = q[j] + h[j];
            }
        }
    }
}

impl Plan {
    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        if *f.domain() != self.domain || f.resolution() != self.resolution || f.value_dim() != self.value_dim {
            return Err(Error::ShapeMismatch("function grid does not match the operator grid".into()));
        }
        let k = self.value_dim;
        let src = f.values();
        let mut out = vec![0.0; src.len()];
        out.par_chunks_mut(k).zip(self.nodes.par_iter()).for_each(|(o, node)| {
            let mut fv = [0.0; 4];
            for (idx, w) in &node.stencil {
                let base = *idx as usize * k;
                for j in 0..k {
                    fv[j] += w * src[base + j];
                }
            }
            combine(self.product, k, &node.q, &node.s, &fv[..k], o);
        });
        GridFunction::new(self.domain.clone(), self.resolution, k, out)
    }
}
