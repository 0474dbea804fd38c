//! Functions sampled on uniform tensor grids.

use crate::error::{Error, Result};
use crate::geometry::DomainBox;

/// Node cap for 4-D grids (`33^4`).
pub const MAX_NODES_4D: usize = 33 * 33 * 33 * 33;

/// Offsets this close to a node (in units of the spacing) snap to it, so that
/// evaluation at a node returns the stored value exactly.
const SNAP: f64 = 1e-9;

/// Values at the nodes `lo + (hi - lo) j / (resolution - 1)` of every
/// dimension, dimension 0 varying fastest. Each node holds `value_dim` reals
/// (1 for real-valued functions, 4 for quaternions).
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    domain: DomainBox,
    resolution: usize,
    value_dim: usize,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(domain: DomainBox, resolution: usize, value_dim: usize, values: Vec<f64>) -> Result<Self> {
        check_shape(&domain, resolution, value_dim)?;
        let n = resolution.pow(domain.dim() as u32);
        if values.len() != n * value_dim {
            return Err(Error::ShapeMismatch(format!(
                "{} values for {n} nodes of dimension {value_dim}",
                values.len()
            )));
        }
        if let Some(p) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::EvalError(format!("non-finite grid value at node {}", p / value_dim)));
        }
        Ok(GridFunction { domain, resolution, value_dim, values })
    }

    /// Sample `f` at every node.
    pub fn from_fn(
        domain: DomainBox,
        resolution: usize,
        value_dim: usize,
        mut f: impl FnMut(&[f64]) -> Vec<f64>,
    ) -> Result<Self> {
        check_shape(&domain, resolution, value_dim)?;
        let n = resolution.pow(domain.dim() as u32);
        let mut values = Vec::with_capacity(n * value_dim);
        let mut x = vec![0.0; domain.dim()];
        for i in 0..n {
            node_coords(&domain, resolution, i, &mut x);
            let v = f(&x);
            if v.len() != value_dim {
                return Err(Error::ShapeMismatch(format!("function returned {} components", v.len())));
            }
            values.extend(v);
        }
        GridFunction::new(domain, resolution, value_dim, values)
    }

    pub fn constant(domain: DomainBox, resolution: usize, value: &[f64]) -> Result<Self> {
        GridFunction::from_fn(domain, resolution, value.len(), |_| value.to_vec())
    }

    pub fn zeros(domain: DomainBox, resolution: usize, value_dim: usize) -> Result<Self> {
        GridFunction::constant(domain, resolution, &vec![0.0; value_dim])
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn value_dim(&self) -> usize {
        self.value_dim
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn node_count(&self) -> usize {
        self.values.len() / self.value_dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at node `i`.
    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.value_dim..(i + 1) * self.value_dim]
    }

    /// Coordinates of node `i`.
    pub fn node(&self, i: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        node_coords(&self.domain, self.resolution, i, &mut x);
        x
    }

    pub fn spacing(&self, j: usize) -> f64 {
        self.domain.width(j) / (self.resolution - 1) as f64
    }

    /// Largest value norm over the nodes.
    pub fn sup_norm(&self) -> f64 {
        self.values
            .chunks(self.value_dim)
            .map(norm)
            .fold(0.0, f64::max)
    }

    /// Multilinear interpolation; see [`grid_eval`].
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.value_dim];
        let st = self.stencil(x)?;
        for (node, w) in st.iter() {
            for (o, v) in out.iter_mut().zip(self.value(*node)) {
                *o += w * v;
            }
        }
        Ok(out)
    }

    /// Nodes and weights of the multilinear interpolation at `x`. Dimensions
    /// in which `x` sits on a node contribute a single node of weight 1.
    pub fn stencil(&self, x: &[f64]) -> Result<Vec<(usize, f64)>> {
        stencil(&self.domain, self.resolution, x)
    }
}

pub(crate) fn check_shape(domain: &DomainBox, resolution: usize, value_dim: usize) -> Result<()> {
    if resolution < 2 {
        return Err(Error::InvalidArgument("grid resolution must be at least 2".into()));
    }
    if value_dim == 0 {
        return Err(Error::InvalidArgument("value dimension must be positive".into()));
    }
    if domain.dim() == 4 && resolution.checked_pow(4).is_none_or(|n| n > MAX_NODES_4D) {
        return Err(Error::InvalidArgument(format!("4-D grids are capped at 33^4 nodes, got {resolution}^4")));
    }
    Ok(())
}

pub(crate) fn node_coords(domain: &DomainBox, resolution: usize, mut i: usize, x: &mut [f64]) {
    for (j, xj) in x.iter_mut().enumerate() {
        let k = i % resolution;
        i /= resolution;
        *xj = node_coord(domain.lo()[j], domain.hi()[j], resolution, k);
    }
}

pub(crate) fn node_coord(lo: f64, hi: f64, resolution: usize, k: usize) -> f64 {
    if k + 1 == resolution {
        hi
    } else {
        lo + (hi - lo) * k as f64 / (resolution - 1) as f64
    }
}

pub(crate) fn stencil(domain: &DomainBox, resolution: usize, x: &[f64]) -> Result<Vec<(usize, f64)>> {
    if !domain.contains_closure(x) {
        return Err(Error::DomainError { point: x.to_vec() });
    }
    let d = domain.dim();
    let cells = (resolution - 1) as f64;
    let mut base = [0usize; 4];
    let mut frac = [0.0f64; 4];
    for j in 0..d {
        let t = ((x[j] - domain.lo()[j]) / domain.width(j) * cells).clamp(0.0, cells);
        let r = t.round();
        let (i, f) = if (t - r).abs() <= SNAP {
            (r as usize, 0.0)
        } else {
            let i = (t.floor() as usize).min(resolution - 2);
            (i, t - i as f64)
        };
        base[j] = i;
        frac[j] = f;
    }
    let mut out = Vec::with_capacity(1 << d);
    'corner: for mask in 0..(1usize << d) {
        let mut w = 1.0;
        let mut node = 0usize;
        let mut stride = 1usize;
        for j in 0..d {
            let up = mask >> j & 1 == 1;
            if up && frac[j] == 0.0 {
                continue 'corner;
            }
            if frac[j] != 0.0 {
                w *= if up { frac[j] } else { 1.0 - frac[j] };
            }
            node += (base[j] + up as usize) * stride;
            stride *= resolution;
        }
        out.push((node, w));
    }
    Ok(out)
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    if v.len() == 1 {
        v[0].abs()
    } else {
        v.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// Multilinear interpolation between neighbouring nodes; exact at nodes.
pub fn grid_eval(f: &GridFunction, x: &[f64]) -> Result<Vec<f64>> {
    f.eval(x)
}

/// Largest node-wise distance between two grids of the same shape.
pub fn sup_distance(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    if f.domain != g.domain || f.resolution != g.resolution || f.value_dim != g.value_dim {
        return Err(Error::ShapeMismatch("grids differ in domain, resolution or value dimension".into()));
    }
    let k = f.value_dim;
    let mut diff = vec![0.0; k];
    let mut best: f64 = 0.0;
    for (a, b) in f.values.chunks(k).zip(g.values.chunks(k)) {
        for j in 0..k {
            diff[j] = a[j] - b[j];
        }
        best = best.max(norm(&diff));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit() -> DomainBox {
        DomainBox::closed(0.0, 1.0)
    }

    #[test]
    fn constant_grid_interpolates_to_the_constant() {
        let g = GridFunction::constant(unit(), 5, &[1.0]).unwrap();
        for x in [0.0, 0.13, 0.5, 0.999, 1.0] {
            assert_eq!(grid_eval(&g, &[x]).unwrap(), vec![1.0]);
        }
    }

    #[test]
    fn two_node_linear() {
        let g = GridFunction::new(unit(), 2, 1, vec![0.0, 1.0]).unwrap();
        assert_eq!(grid_eval(&g, &[0.5]).unwrap(), vec![0.5]);
    }

    #[test]
    fn three_node_hat() {
        let g = GridFunction::new(unit(), 3, 1, vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(grid_eval(&g, &[0.25]).unwrap(), vec![0.5]);
    }

    #[test]
    fn exact_at_nodes() {
        let g = GridFunction::from_fn(unit(), 2188, 1, |x| vec![(7.0 * x[0]).sin()]).unwrap();
        for i in 0..g.node_count() {
            assert_eq!(grid_eval(&g, &g.node(i)).unwrap(), g.value(i));
        }
    }

    #[test]
    fn outside_domain() {
        let g = GridFunction::zeros(unit(), 3, 1).unwrap();
        assert!(matches!(grid_eval(&g, &[1.1]), Err(Error::DomainError { .. })));
    }

    #[test]
    fn distance_examples() {
        let a = GridFunction::constant(unit(), 4, &[1.0]).unwrap();
        let b = GridFunction::constant(unit(), 4, &[-1.0]).unwrap();
        assert_eq!(sup_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(sup_distance(&a, &b).unwrap(), 2.0);
        let e1 = GridFunction::constant(unit(), 4, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        let e2 = GridFunction::constant(unit(), 4, &[0.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(sup_distance(&e1, &e2).unwrap(), 2f64.sqrt());
        assert!(matches!(sup_distance(&a, &e1), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn four_dim_multilinear_reproduces_affine_functions() {
        let cube = DomainBox::cube4(-1.0, 1.0);
        let f = |x: &[f64]| vec![1.0 + x[0] - 2.0 * x[1] + 0.5 * x[2] + 3.0 * x[3]];
        let g = GridFunction::from_fn(cube, 5, 1, f).unwrap();
        let p = [0.1, -0.33, 0.77, -0.9];
        assert!((g.eval(&p).unwrap()[0] - f(&p)[0]).abs() < 1e-12);
    }

    #[test]
    fn four_dim_cap() {
        assert!(GridFunction::zeros(DomainBox::cube4(-1.0, 1.0), 34, 1).is_err());
    }

    #[test]
    fn non_finite_values_rejected() {
        assert!(GridFunction::new(unit(), 2, 1, vec![0.0, f64::NAN]).is_err());
    }

    fn grid(values: Vec<f64>) -> GridFunction {
        GridFunction::new(unit(), values.len(), 1, values).unwrap()
    }

    proptest! {
        #[test]
        fn sup_distance_is_a_metric(
            a in prop::collection::vec(-10.0..10.0f64, 9),
            b in prop::collection::vec(-10.0..10.0f64, 9),
            c in prop::collection::vec(-10.0..10.0f64, 9),
        ) {
            let (f, g, h) = (grid(a.clone()), grid(b.clone()), grid(c));
            let fg = sup_distance(&f, &g).unwrap();
            prop_assert_eq!(fg, sup_distance(&g, &f).unwrap());
            prop_assert_eq!(fg == 0.0, a == b);
            let fh = sup_distance(&f, &h).unwrap();
            let gh = sup_distance(&g, &h).unwrap();
            prop_assert!(fh <= fg + gh + 1e-12);
        }

        #[test]
        fn interpolant_stays_within_neighbour_values(
            v in prop::collection::vec(-5.0..5.0f64, 2..20),
            x in 0.0..=1.0f64,
        ) {
            let g = grid(v.clone());
            let y = g.eval(&[x]).unwrap()[0];
            let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(y >= lo - 1e-12 && y <= hi + 1e-12);
        }
    }
}
