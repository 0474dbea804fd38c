//! Seeded random operators for property tests and the CLI `--seed` flag.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coefficient::CoefficientFn;
use crate::expr::Expr;
use crate::geometry::{AffineMap, DomainBox, Partition};
use crate::global::RBOperator;

/// A global operator on `[0, 1]` with 2 to 4 maps onto dyadic intervals,
/// random orientation, affine-plus-sine `q_i` and `s_i = c_i cos(x)` scaled
/// so that the contraction factor lies in `[0.4, 0.9]`.
pub fn random_global_operator(seed: u64) -> RBOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = DomainBox::closed(0.0, 1.0);
    let n: usize = rng.gen_range(2..=4);
    // cut [0, 1] at distinct multiples of 1/16
    let mut cuts: Vec<i128> = vec![0, 16];
    while cuts.len() < n + 1 {
        let c = rng.gen_range(1..16);
        if !cuts.contains(&c) {
            cuts.push(c);
        }
    }
    cuts.sort_unstable();
    let maps: Vec<AffineMap> = cuts
        .windows(2)
        .map(|w| {
            let width = w[1] - w[0];
            if rng.gen_bool(0.5) {
                AffineMap::ratio((width, 16), (w[0], 16))
            } else {
                AffineMap::ratio((-width, 16), (w[1], 16))
            }
        })
        .collect();
    let target = rng.gen_range(0.4..=0.9);
    let lead = rng.gen_range(0..n);
    let mut q = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b, c): (f64, f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-0.5..0.5));
        let qe = Expr::Num(a) * Expr::Var + Expr::Num(b) + Expr::Num(c) * Expr::call(crate::expr::Func::Sin, Expr::Num(3.0) * Expr::Var);
        q.push(CoefficientFn::new(qe, unit.clone()).expect("finite"));
        let amp = if i == lead { target } else { target * rng.gen_range(0.0..=1.0) };
        let amp = if rng.gen_bool(0.5) { amp } else { -amp };
        // cos is at most 1 on [0, 1] with equality at 0, so the sup is |amp|
        let se = Expr::Num(amp) * Expr::call(crate::expr::Func::Cos, Expr::Var);
        s.push(CoefficientFn::new(se, unit.clone()).expect("finite"));
    }
    let partition = Partition::new(unit, maps).expect("injective maps");
    RBOperator::new(partition, q, s).expect("consistent shapes")
}
