use thiserror::Error;

/// Errors raised by the simulator.
///
/// Numeric payloads are carried as `f64` regardless of the scalar type used
/// for the computation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("target transmittance {target} exceeds the coupler maximum {max}")]
    NoSolution { target: f64, max: f64 },

    #[error("same-sign closed form does not apply to (x_E, p_E) = ({x_e}, {p_e}): {reason}; use the general solver")]
    WrongBranch {
        x_e: f64,
        p_e: f64,
        reason: &'static str,
    },

    #[error("attack equations infeasible: no admissible T2 in [{t2_min}, {t2_max}]")]
    Infeasible { t2_min: f64, t2_max: f64 },

    #[error("no wavelength in the band realizes {which}")]
    Unrealizable { which: &'static str },

    #[error(
        "attack solution violates the attack equations: residuals ({rx:e}, {rp:e}) above {tol:e}"
    )]
    ContractViolation { rx: f64, rp: f64, tol: f64 },

    #[error("insufficient data: {n} rounds, need at least {min}")]
    InsufficientData { n: usize, min: usize },

    #[error("round {round}: {source}")]
    Round {
        round: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(what: &'static str, value: f64) -> Error {
    Error::Domain { what, value }
}
