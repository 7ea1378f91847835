//! Exact-to-tolerance evaluation of an octahedral, Gateaux-smooth norm
//! tower on `R^d (+) l1`, together with the differential machinery and a
//! verification harness that certifies every structural inequality of the
//! construction on sampled inputs.

pub mod calculus;
pub mod error;
pub mod norm;
pub mod shape;
pub mod slice;
pub mod space;
pub mod verify;

pub use error::{Error, Result};
pub use norm::{
    comparison_norm, ell1_sum_norm, equivalence_constants, level_norm, member_ball,
    minkowski_oracle, solve_level, tower_norm, EquivalenceConstants, LevelNormResult,
};
pub use shape::{ScheduleKind, ShapeFn, ShapeSchedule};
pub use space::{
    axpy, random_vector, BaseNormKind, BaseSpace, SampleStyle, Tolerances, TowerSpace,
    TowerVector,
};
