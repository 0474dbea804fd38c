//! Fractal functions as fixed points of Read-Bajraktarević operators.
//!
//! The crate covers global operators on bounded functions ([`RBOperator`]),
//! local operators whose pieces read from subsets ([`LocalRBOperator`]),
//! non-stationary sequences ([`OperatorSchedule`]) and quaternion-valued
//! operators on the unit 4-cube ([`QuatRBOperator`]). Functions are sampled on
//! tensor grids ([`GridFunction`]) and coefficients are closed-form
//! expressions with certified sup-norm bounds ([`CoefficientFn`]).

pub mod coefficient;
mod engine;
pub mod error;
pub mod expr;
pub mod fixtures;
pub mod geometry;
pub mod global;
pub mod grid;
pub mod interval;
pub mod local;
pub mod nonstationary;
pub mod quaternion;
pub mod report;

pub use coefficient::{certify_sup_bound, eval_coefficient, CoefficientFn};
pub use engine::{Product, NOT_CONTRACTIVE_BAND};
pub use error::{Error, Result};
pub use expr::{parse_expr, Expr, ParseError, Value};
pub use geometry::{affine_inverse, verify_partition, AffineMap, DomainBox, Partition, PartitionReport, Rational};
pub use global::{build_fif, coefficient, AddressEval, FixedPointResult, RBOperator};
pub use grid::{grid_eval, sup_distance, GridFunction};
pub use local::{build_even_n, build_even_n_with, EvenNConstruction, LocalPiece, LocalRBOperator, QFamily};
pub use nonstationary::{
    backward_trajectory, build_interpolating_schedule, builtin_operator, builtin_schedule, check_interpolation,
    forward_trajectory, invariant_ball_radius, summability_check, Direction, InterpolatingSchedule, Level,
    OperatorSchedule, TrajectoryResult,
};
pub use quaternion::{component_projection, Projection, QuatRBOperator, Quaternion, Side};
pub use report::{ConditionKind, ConditionReport, Witness, JUNCTION_TOL};
