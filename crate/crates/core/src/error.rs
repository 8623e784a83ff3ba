use thiserror::Error;

use crate::pde::FieldState;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("|1 - u| = {distance:.3e} is below the singularity floor {floor:.3e}")]
    DivisionNearSingularity { distance: f64, floor: f64 },

    #[error("left-hand prefactor of the {equation} equation vanishes at epsilon = 0")]
    ZeroPrefactor { equation: &'static str },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("{quantity} = {value:.3e} exceeds the cap {cap:.3e}")]
    DomainBlowup {
        quantity: &'static str,
        value: f64,
        cap: f64,
    },

    #[error("alpha = {0} lies on a regime boundary (1 or 2); no singular profile exists there")]
    BoundaryAlpha(f64),

    #[error("non-finite state at t = {time}")]
    NonFiniteState {
        time: f64,
        last_good: Option<Box<FieldState>>,
    },

    #[error("time step {dt:.3e} exceeds the stability bound {bound:.3e}")]
    CflViolation { dt: f64, bound: f64 },

    #[error("level {level} is not crossed in snapshot at t = {time}")]
    NoCrossing { level: f64, time: f64 },

    #[error("level {level} is crossed {count} times in snapshot at t = {time}")]
    MultipleCrossings { level: f64, count: usize, time: f64 },

    #[error("front at x = {position} is within 5 cells of the boundary at t = {time}")]
    FrontLeftDomain { position: f64, time: f64 },

    #[error("need at least {needed} snapshots, got {got}")]
    TooFewSnapshots { needed: usize, got: usize },

    #[error("quadrature did not converge after {refinements} refinements (last change {change:.3e})")]
    QuadratureNotConverged { refinements: usize, change: f64 },

    #[error("floating-point overflow in {0}")]
    OverflowGuard(&'static str),

    #[error("layer shooting did not converge: {0}")]
    NoConvergence(String),

    #[error("profile invariant violated: {0}")]
    InvariantViolation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
