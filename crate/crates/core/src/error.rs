use thiserror::Error;

use crate::fan::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero vector has no primitive part")]
    ZeroVector,
    #[error("generators are linearly dependent (cone is not simplicial)")]
    NotSimplicial,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("cone contains a line")]
    ConeHasLineality,
    #[error("region is unbounded along direction {direction:?}")]
    Unbounded { direction: Vec<String> },
    #[error("region is empty")]
    Infeasible,
    #[error("invalid fan: {}", format_violations(.0))]
    InvalidFan(Vec<Violation>),
    #[error("vector {0} is not primitive")]
    NotPrimitive(String),
    #[error("vector {0} is already a ray of the fan")]
    RayExists(String),
    #[error("vector {0} is outside the support of the fan")]
    OutsideSupport(String),
    #[error("wall {0:?} is a boundary wall")]
    BoundaryWall(Vec<usize>),
    #[error("no wall with index {0}")]
    NoSuchWall(usize),
    #[error("invalid foliation: {0}")]
    InvalidFoliation(String),
    #[error("vector {0} spans an existing ray, so its divisor is not exceptional")]
    NotExceptional(String),
    #[error("vector {0} does not lie in the cone")]
    NotInCone(String),
    #[error("operation requires a complete fan")]
    RequiresComplete,
    #[error("the cone of curves is not pointed (fan is not projective)")]
    NotProjective,
    #[error("extremal ray is not K_F-negative (K_F.C = {0})")]
    NotNegative(String),
    #[error("contraction is not divisorial")]
    NotDivisorial,
    #[error("contraction is not small")]
    NotSmall,
    #[error("surgery produced a non-simplicial cone {0:?}")]
    NonQFactorialResult(Vec<usize>),
    #[error("flip data inconsistent with the fan: {0}")]
    InconsistentFlip(String),
    #[error("flip cap of {0} exceeded")]
    FlipCapExceeded(usize),
    #[error("foliation is not canonical; rerun with the override to proceed")]
    NotCanonical,
    #[error("wall {0} does not lie on a K_F-negative extremal ray")]
    InvalidPick(usize),
    #[error("cone is not smooth; the minor oracle needs a smooth chart")]
    SmoothChartOnly,
    #[error("parse error: {0}")]
    Parse(String),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
