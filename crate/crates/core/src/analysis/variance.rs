use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::roots::{bisect, grid_roots, uniform_grid};
use crate::scalar::Real;

/// Bracketing grid size for the hiding-condition root search.
pub const HIDING_GRID_POINTS: usize = 10_000;

/// `V_B|E` split into the one-port and two-port contributions, N0 units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalVariance<F> {
    /// `2 T2 (1-T2) (1-2T2)²`, from the one-port splitter of the fake LO.
    pub first_term: F,
    /// `8 T2 (1-T2)²`, from the two-port detector.
    pub second_term: F,
    pub v_be: F,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport<F> {
    pub v_be: F,
    pub v_ba: F,
    pub first_term: F,
    pub second_term: F,
}

impl<F: Real> VarianceReport<F> {
    pub fn new(eta: F, t2: F) -> Result<Self> {
        let cv = v_be_closed_form(t2)?;
        Ok(Self {
            v_be: cv.v_be,
            v_ba: v_ba(eta, t2)?,
            first_term: cv.first_term,
            second_term: cv.second_term,
        })
    }
}

fn check_unit<F: Real>(what: &'static str, t: F) -> Result<()> {
    if !(t >= F::zero() && t <= F::one()) {
        return Err(domain(what, t.as_f64()));
    }
    Ok(())
}

#[inline]
fn terms<F: Real>(t2: F) -> (F, F) {
    let one = F::one();
    let u = one - F::lit(2.0) * t2;
    let s = one - t2;
    (F::lit(2.0) * t2 * s * u * u, F::lit(8.0) * t2 * s * s)
}

/// Bob-given-Eve conditional variance with a fake LO as bright as the
/// genuine one and a negligible fake signal, x quadrature.
pub fn v_be_closed_form<F: Real>(t2: F) -> Result<ConditionalVariance<F>> {
    check_unit("T2", t2)?;
    let (first_term, second_term) = terms(t2);
    Ok(ConditionalVariance {
        first_term,
        second_term,
        v_be: first_term + second_term,
    })
}

/// Same as [`v_be_closed_form`] for the p quadrature, whose detector sees
/// the transmitted ports: `2 T2 (1-T2)(1-2T2)² + 8 T2² (1-T2)`.
pub fn v_be_p_closed_form<F: Real>(t2: F) -> Result<ConditionalVariance<F>> {
    check_unit("T2", t2)?;
    let one = F::one();
    let u = one - F::lit(2.0) * t2;
    let first_term = F::lit(2.0) * t2 * (one - t2) * u * u;
    let second_term = F::lit(8.0) * t2 * t2 * (one - t2);
    Ok(ConditionalVariance {
        first_term,
        second_term,
        v_be: first_term + second_term,
    })
}

/// Unapproximated x-quadrature `V_B|E` for arbitrary beam intensities:
///
/// ```text
/// [ (1-2T1)² 4T1(1-T1) I_S + (1-2T2)² 4T2(1-T2) I_LO
///   + 4(1-T1) I_S · 4T1(1-T1) + 4(1-T2) I_LO · 4T2(1-T2) ] / (2 |α_LO|²)
/// ```
pub fn v_be_general<F: Real>(
    t1: F,
    t2: F,
    signal_intensity: F,
    lo_intensity: F,
    genuine_lo_intensity: F,
) -> Result<F> {
    check_unit("T1", t1)?;
    check_unit("T2", t2)?;
    for (what, v) in [
        ("signal intensity", signal_intensity),
        ("fake LO intensity", lo_intensity),
    ] {
        if !(v >= F::zero() && v.is_finite()) {
            return Err(domain(what, v.as_f64()));
        }
    }
    if !(genuine_lo_intensity > F::zero()) {
        return Err(domain("LO intensity", genuine_lo_intensity.as_f64()));
    }
    let one = F::one();
    let two = F::lit(2.0);
    let four = F::lit(4.0);
    let beam = |t: F, i: F| {
        let u = one - two * t;
        let shot = four * t * (one - t);
        u * u * shot * i + four * (one - t) * i * shot
    };
    Ok((beam(t1, signal_intensity) + beam(t2, lo_intensity)) / (two * genuine_lo_intensity))
}

/// `V_B|A = η + V_B|E(T2)`, N0 units.
pub fn v_ba<F: Real>(eta: F, t2: F) -> Result<F> {
    check_unit("eta", eta)?;
    Ok(eta + v_be_closed_form(t2)?.v_be)
}

/// Location and value of the maximum of `V_B|E` on `[0, 1]`, from the root
/// of `dV/dT2 = 10 - 52 T2 + 72 T2² - 32 T2³`.
pub fn argmax_v_be<F: Real>() -> (F, F) {
    let d =
        |t: F| F::lit(10.0) - F::lit(52.0) * t + F::lit(72.0) * t * t - F::lit(32.0) * t * t * t;
    // d(0) = 10 > 0 and d(1/2) = -2 < 0; d stays negative on [1/2, 1]
    let t = bisect(d, F::zero(), F::lit(0.5), F::zero());
    (t, terms(t).0 + terms(t).1)
}

/// Every `T2` in `[0, 1]` with `V_B|E(T2) = (1 - η)`, sorted ascending.
///
/// For `0 < 1 - η < max V_B|E` there is one root on each side of the
/// maximum. Exact zeros at the interval ends are included, so `η = 1`
/// yields `[0, 1]`.
pub fn hiding_t2<F: Real>(eta: F) -> Result<Vec<F>> {
    check_unit("eta", eta)?;
    let target = F::one() - eta;
    let (_, vmax) = argmax_v_be::<F>();
    if target > vmax {
        return Err(Error::Infeasible {
            t2_min: 0.0,
            t2_max: 1.0,
        });
    }
    let f = |t: F| {
        let (a, b) = terms(t);
        a + b - target
    };
    Ok(grid_roots(
        f,
        F::zero(),
        F::one(),
        HIDING_GRID_POINTS,
        F::zero(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow<F> {
    pub t2: F,
    pub first_term: F,
    pub second_term: F,
    pub v_be: F,
}

/// `V_B|E` and its two terms on `steps` uniform points of `[t2_min, t2_max]`.
pub fn sweep_v_be<F: Real>(t2_min: F, t2_max: F, steps: usize) -> Result<Vec<SweepRow<F>>> {
    check_unit("sweep lower bound", t2_min)?;
    check_unit("sweep upper bound", t2_max)?;
    if !(t2_min < t2_max) {
        return Err(domain("sweep interval width", (t2_max - t2_min).as_f64()));
    }
    if steps < 2 {
        return Err(domain("sweep steps", steps as f64));
    }
    uniform_grid(t2_min, t2_max, steps)
        .map(|t2| {
            let cv = v_be_closed_form(t2)?;
            Ok(SweepRow {
                t2,
                first_term: cv.first_term,
                second_term: cv.second_term,
                v_be: cv.v_be,
            })
        })
        .collect()
}
