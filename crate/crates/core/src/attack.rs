//! Eve's forged-beam parameters.
//!
//! Eve sends a fake signal of intensity `I_S` and a fake LO of intensity
//! `I_LO` at wavelengths where Bob's splitters transmit `T1` and `T2`. The
//! two attacking equations are
//!
//! ```text
//! (1-T1)(1-2T1) I_S - (1-T2)(1-2T2) I_LO = sqrt(η) x_E |α_LO|
//!     T1 (1-2T1) I_S -     T2 (1-2T2) I_LO = sqrt(η) p_E |α_LO|
//! ```
//!
//! Moving the LO terms right gives `R_x` and `R_p`. For fixed `T2` the pair
//! has the unique solution
//!
//! ```text
//! T1 = R_p / (R_x + R_p),   I_S = (R_x + R_p)² / (R_x - R_p)
//! ```
//!
//! which is admissible (`T1 ∈ [0, 1]`, `I_S ≥ 0`) iff `R_x R_p ≥ 0` and
//! `R_x > R_p`.

use serde::{Deserialize, Serialize};

use crate::coupler::{CouplerModel, InversionOptions, WavelengthBand, TELECOM_WAVELENGTH};
use crate::error::{Error, Result};
use crate::roots::uniform_grid;
use crate::scalar::Real;
use crate::units::QuadraturePair;

/// Relative tolerance on the attack-equation residuals.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// Eve outcomes below this magnitude are treated as exactly zero.
pub const DEGENERATE_OUTCOME: f64 = 1e-12;

/// Fake-signal intensity allowed by the weak-signal guard, as a fraction of
/// the fake LO intensity.
pub const WEAK_SIGNAL_GUARD: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackSolution<F> {
    pub t1: F,
    pub t2: F,
    /// |α'_S|².
    pub signal_intensity: F,
    /// |α'_LO|².
    pub lo_intensity: F,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda1: Option<F>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda2: Option<F>,
}

impl<F: Real> AttackSolution<F> {
    /// `I_S / I_LO`.
    pub fn signal_ratio(&self) -> F {
        self.signal_intensity / self.lo_intensity
    }

    /// Whether the fake signal respects the weak-signal guard.
    pub fn is_weak_signal(&self) -> bool {
        self.signal_intensity <= F::lit(WEAK_SIGNAL_GUARD) * self.lo_intensity
    }

    fn canonical_zero(t2: F, lo_intensity: F) -> Self {
        Self {
            t1: F::lit(0.5),
            t2,
            signal_intensity: F::zero(),
            lo_intensity,
            lambda1: None,
            lambda2: None,
        }
    }
}

/// Right-hand side data of the attacking equations for one round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackTarget<F> {
    /// Eve's heterodyne outcome.
    pub eve: QuadraturePair<F>,
    pub eta: F,
    /// Genuine |α_LO|.
    pub lo_amplitude: F,
}

impl<F: Real> AttackTarget<F> {
    pub fn new(eve: QuadraturePair<F>, eta: F, lo_amplitude: F) -> Self {
        Self {
            eve,
            eta,
            lo_amplitude,
        }
    }

    fn is_degenerate(&self) -> bool {
        let tiny = F::lit(DEGENERATE_OUTCOME);
        self.eve.x.abs() <= tiny && self.eve.p.abs() <= tiny
    }

    /// `(sqrt(η) x_E |α_LO|, sqrt(η) p_E |α_LO|)`, zeroed for degenerate
    /// outcomes.
    pub fn rhs(&self) -> (F, F) {
        if self.is_degenerate() {
            return (F::zero(), F::zero());
        }
        let k = self.eta.sqrt() * self.lo_amplitude;
        (k * self.eve.x, k * self.eve.p)
    }

    /// `sqrt(η) |α_LO| max(|x_E|, |p_E|, 1)`.
    pub fn residual_scale(&self) -> F {
        let m = self.eve.x.abs().max(self.eve.p.abs()).max(F::one());
        let s = self.eta.sqrt() * self.lo_amplitude * m;
        if s > F::zero() {
            s
        } else {
            F::one()
        }
    }
}

/// LHS − RHS of both attacking equations.
pub fn attack_residuals<F: Real>(sol: &AttackSolution<F>, target: &AttackTarget<F>) -> (F, F) {
    let one = F::one();
    let two = F::lit(2.0);
    let k = target.eta.sqrt() * target.lo_amplitude;
    let (t1, t2) = (sol.t1, sol.t2);
    let rx = (one - t1) * (one - two * t1) * sol.signal_intensity
        - (one - t2) * (one - two * t2) * sol.lo_intensity
        - k * target.eve.x;
    let rp = t1 * (one - two * t1) * sol.signal_intensity
        - t2 * (one - two * t2) * sol.lo_intensity
        - k * target.eve.p;
    (rx, rp)
}

/// Largest magnitude among the intensity terms of both equations; rounding
/// in the residuals is proportional to it.
fn term_scale<F: Real>(sol: &AttackSolution<F>) -> F {
    let one = F::one();
    let two = F::lit(2.0);
    let (t1, t2) = (sol.t1, sol.t2);
    let s = sol.signal_intensity.abs() * (one - two * t1).abs() * (one - t1).max(t1);
    let lo = sol.lo_intensity.abs() * (one - two * t2).abs() * (one - t2).max(t2);
    s.max(lo)
}

/// Whether both residuals are within [`RESIDUAL_TOL`] relative to the larger
/// of [`AttackTarget::residual_scale`] and the equations' intensity terms.
pub fn check_residuals<F: Real>(sol: &AttackSolution<F>, target: &AttackTarget<F>) -> Result<()> {
    let (rx, rp) = attack_residuals(sol, target);
    let tol = tolerance::<F>() * target.residual_scale().max(term_scale(sol));
    if rx.abs() < tol && rp.abs() < tol {
        Ok(())
    } else {
        Err(Error::ContractViolation {
            rx: rx.as_f64(),
            rp: rp.as_f64(),
            tol: tol.as_f64(),
        })
    }
}

fn tolerance<F: Real>() -> F {
    F::lit(RESIDUAL_TOL).max(F::epsilon() * F::lit(64.0))
}

/// Closed form for the balanced fake LO (`T2 = 1/2`): `T1 = p_E / (x_E + p_E)`.
///
/// Only admissible when `x_E` and `p_E` share a sign and `|x_E| > |p_E|`
/// for positive outcomes (`|p_E| > |x_E|` for negative ones); otherwise the
/// implied `|α'_S|²` would be negative. `x_E = p_E` gives `T1 = 1/2`, which
/// annihilates both coefficients.
pub fn solve_same_sign<F: Real>(
    target: &AttackTarget<F>,
    forged_lo_intensity: F,
) -> Result<AttackSolution<F>> {
    let (x, p) = (target.eve.x, target.eve.p);
    let wrong = |reason| Error::WrongBranch {
        x_e: x.as_f64(),
        p_e: p.as_f64(),
        reason,
    };
    if !(x * p > F::zero()) {
        return Err(wrong("outcomes do not share a sign"));
    }
    if x == p {
        return Err(wrong("x_E = p_E makes T1 = 1/2 singular"));
    }
    let one = F::one();
    let two = F::lit(2.0);
    let t1 = p / (x + p);
    let rhs_p = target.eta.sqrt() * target.lo_amplitude * p;
    let signal_intensity = rhs_p / (t1 * (one - two * t1));
    if !(signal_intensity >= F::zero()) || !signal_intensity.is_finite() {
        return Err(wrong("implied signal intensity is negative"));
    }
    let sol = AttackSolution {
        t1,
        t2: F::lit(0.5),
        signal_intensity,
        lo_intensity: forged_lo_intensity,
        lambda1: None,
        lambda2: None,
    };
    check_residuals(&sol, target)?;
    Ok(sol)
}

/// Unchecked solve at a fixed `T2`; `None` when inadmissible.
fn solve_fixed<F: Real>(
    target: &AttackTarget<F>,
    t2: F,
    forged_lo_intensity: F,
) -> Option<AttackSolution<F>> {
    let one = F::one();
    let two = F::lit(2.0);
    let (ax, ap) = target.rhs();
    let u = one - two * t2;
    let rx = ax + (one - t2) * u * forged_lo_intensity;
    let rp = ap + t2 * u * forged_lo_intensity;
    if rx == F::zero() && rp == F::zero() {
        return Some(AttackSolution::canonical_zero(t2, forged_lo_intensity));
    }
    let s = rx + rp;
    let d = rx - rp;
    if rx * rp < F::zero() || !(d > F::zero()) {
        return None;
    }
    let t1 = rp / s;
    let signal_intensity = s * s / d;
    if !(t1 >= F::zero() && t1 <= one && signal_intensity.is_finite()) {
        return None;
    }
    Some(AttackSolution {
        t1,
        t2,
        signal_intensity,
        lo_intensity: forged_lo_intensity,
        lambda1: None,
        lambda2: None,
    })
}

/// Solves for `T1` and `|α'_S|²` at a prescribed fake-LO transmittance.
pub fn solve_at_t2<F: Real>(
    target: &AttackTarget<F>,
    t2: F,
    forged_lo_intensity: F,
) -> Result<AttackSolution<F>> {
    if !(t2 >= F::zero() && t2 <= F::one()) {
        return Err(crate::error::domain("T2", t2.as_f64()));
    }
    let sol = solve_fixed(target, t2, forged_lo_intensity).ok_or(Error::Infeasible {
        t2_min: t2.as_f64(),
        t2_max: t2.as_f64(),
    })?;
    check_residuals(&sol, target)?;
    Ok(sol)
}

/// Default `T2` search grid: 2001 points on `[0.01, 0.99]`.
pub fn default_t2_grid<F: Real>() -> Vec<F> {
    uniform_grid(F::lit(0.01), F::lit(0.99), 2001).collect()
}

/// General solver covering every sign regime.
///
/// Candidates are tried in order of `|T2 - 1/2|`; the first admissible `T2`
/// whose fake signal passes the weak-signal guard wins. When no candidate
/// passes the guard, the admissible candidate with the smallest `|α'_S|²`
/// is returned instead.
pub fn solve_general<F: Real>(
    target: &AttackTarget<F>,
    forged_lo_intensity: F,
    t2_search: Option<&[F]>,
) -> Result<AttackSolution<F>> {
    if !(forged_lo_intensity.is_finite() && forged_lo_intensity > F::zero()) {
        return Err(crate::error::domain(
            "forged LO intensity",
            forged_lo_intensity.as_f64(),
        ));
    }
    let half = F::lit(0.5);
    let (ax, ap) = target.rhs();
    if ax == F::zero() && ap == F::zero() {
        let sol = AttackSolution::canonical_zero(half, forged_lo_intensity);
        check_residuals(&sol, target)?;
        return Ok(sol);
    }

    let owned;
    let grid = match t2_search {
        Some(g) => g,
        None => {
            owned = default_t2_grid::<F>();
            &owned[..]
        }
    };
    let mut order: Vec<F> = grid.to_vec();
    order.sort_by(|a, b| {
        ((*a - half).abs(), *a)
            .partial_cmp(&((*b - half).abs(), *b))
            .unwrap()
    });

    let mut fallback: Option<AttackSolution<F>> = None;
    for &t2 in &order {
        let Some(sol) = solve_fixed(target, t2, forged_lo_intensity) else {
            continue;
        };
        if check_residuals(&sol, target).is_err() {
            continue;
        }
        if sol.is_weak_signal() {
            return Ok(sol);
        }
        if fallback.is_none_or(|f| sol.signal_intensity < f.signal_intensity) {
            fallback = Some(sol);
        }
    }
    fallback.ok_or_else(|| {
        let lo = grid.iter().copied().fold(F::infinity(), F::min);
        let hi = grid.iter().copied().fold(F::neg_infinity(), F::max);
        Error::Infeasible {
            t2_min: lo.as_f64(),
            t2_max: hi.as_f64(),
        }
    })
}

/// Fills `lambda1` and `lambda2` by inverting the coupler transmittance.
/// Among several candidates the one closest to 1.55 µm is kept for both
/// beams.
pub fn realize_wavelengths<F: Real>(
    sol: &AttackSolution<F>,
    model: &CouplerModel<F>,
    band: &WavelengthBand<F>,
    options: &InversionOptions,
) -> Result<AttackSolution<F>> {
    let pick = |t: F| -> Option<F> {
        let roots = model.invert_transmittance(t, band, options).ok()?;
        let telecom = F::lit(TELECOM_WAVELENGTH);
        roots.into_iter().min_by(|a, b| {
            (*a - telecom)
                .abs()
                .partial_cmp(&(*b - telecom).abs())
                .unwrap()
        })
    };
    let l1 = pick(sol.t1);
    let l2 = pick(sol.t2);
    match (l1, l2) {
        (Some(lambda1), Some(lambda2)) => Ok(AttackSolution {
            lambda1: Some(lambda1),
            lambda2: Some(lambda2),
            ..*sol
        }),
        (None, Some(_)) => Err(Error::Unrealizable { which: "T1" }),
        (Some(_), None) => Err(Error::Unrealizable { which: "T2" }),
        (None, None) => Err(Error::Unrealizable { which: "T1 and T2" }),
    }
}
