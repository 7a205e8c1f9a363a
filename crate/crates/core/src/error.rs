use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The Wronskian of the boundary-anchored solutions vanished: the energy
    /// shift sits on (or numerically at) a negated Dirichlet eigenvalue.
    #[error("resolvent pole at E = {energy}: |W| = {wronskian:e} below {threshold:e}")]
    Pole {
        energy: f64,
        wronskian: f64,
        threshold: f64,
    },

    #[error("Laplace node E = {node} is not above the abscissa of validity {e_min}")]
    Abscissa { node: f64, e_min: f64 },

    #[error("{what} did not converge (index {index}, {iterations} iterations)")]
    Convergence {
        what: &'static str,
        index: usize,
        iterations: usize,
    },

    #[error("argument {arg} above overflow guard {limit}")]
    Overflow { arg: f64, limit: f64 },

    #[error("argument {arg} outside domain: {reason}")]
    Domain { arg: f64, reason: &'static str },

    #[error("no sign change of g' in bracket [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },

    #[error("power-law fit failed: {0}")]
    Fit(String),

    #[error("path touches zero at x = {x} inside the box")]
    Singularity { x: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    /// Gaussian decay constants of the two-amplitude integral are not
    /// positive definite, so the integral diverges.
    #[error("divergent amplitude integral: decay constants ({a}, {b})")]
    Divergent { a: f64, b: f64 },

    #[error("supplied amplitude has a node at x = {x}")]
    Node { x: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
