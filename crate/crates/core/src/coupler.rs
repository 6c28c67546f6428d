//! Wavelength-dependent fused-fiber coupler.
//!
//! The transmittance of the coupler is `T(λ) = F² sin²(c w λ^2.5 / F)` with λ
//! in micrometers. The phase grows monotonically with λ, so `T` oscillates
//! between 0 and `F²` with extrema at phases `k π / 2`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::roots::{bisect, uniform_grid};
use crate::scalar::Real;

/// Wavelength of the genuine local oscillator, µm.
pub const TELECOM_WAVELENGTH: f64 = 1.55;

const EXPONENT: f64 = 2.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplerModel<F> {
    /// Square root of the maximal coupled power.
    pub f: F,
    /// Coupling coefficient.
    pub c: F,
    /// Heat-source width.
    pub w: F,
}

impl<F: Real> CouplerModel<F> {
    pub fn new(f: F, c: F, w: F) -> Result<Self> {
        if !(f > F::zero() && f * f <= F::one()) {
            return Err(domain("coupler amplitude f", f.as_f64()));
        }
        if !(c.is_finite() && c > F::zero()) {
            return Err(domain("coupling coefficient c", c.as_f64()));
        }
        if !(w.is_finite() && w > F::zero()) {
            return Err(domain("heat-source width w", w.as_f64()));
        }
        Ok(Self { f, c, w })
    }

    /// `f = 1`, `w = 1`, and `c` chosen so the phase at 1.55 µm is π/4,
    /// i.e. a 50/50 splitter on the rising branch at the telecom wavelength.
    pub fn telecom_default() -> Self {
        let lambda0 = F::lit(TELECOM_WAVELENGTH);
        let c = F::FRAC_PI_4() / lambda0.powf(F::lit(EXPONENT));
        Self {
            f: F::one(),
            c,
            w: F::one(),
        }
    }

    /// F², the largest reachable transmittance.
    #[inline]
    pub fn max_transmittance(&self) -> F {
        self.f * self.f
    }

    /// `c w λ^2.5 / F`.
    #[inline]
    pub fn phase(&self, lambda: F) -> F {
        self.c * self.w * lambda.powf(F::lit(EXPONENT)) / self.f
    }

    fn wavelength_at_phase(&self, phase: F) -> F {
        (phase * self.f / (self.c * self.w)).powf(F::one() / F::lit(EXPONENT))
    }

    fn transmittance_unchecked(&self, lambda: F) -> F {
        let s = self.phase(lambda).sin();
        self.max_transmittance() * s * s
    }

    pub fn transmittance(&self, lambda: F) -> Result<F> {
        if !(lambda.is_finite() && lambda > F::zero()) {
            return Err(domain("wavelength", lambda.as_f64()));
        }
        Ok(self.transmittance_unchecked(lambda))
    }

    /// Wavelengths inside `band` where `T` has a zero or a peak.
    pub fn extrema_in(&self, band: &WavelengthBand<F>) -> Vec<F> {
        let half_pi = F::FRAC_PI_2();
        let k_lo = (self.phase(band.lambda_min) / half_pi).ceil();
        let k_hi = (self.phase(band.lambda_max) / half_pi).floor();
        let mut out = Vec::new();
        let mut k = k_lo.max(F::one());
        while k <= k_hi {
            let lambda = self.wavelength_at_phase(k * half_pi);
            if lambda > band.lambda_min && lambda < band.lambda_max {
                out.push(lambda);
            }
            k = k + F::one();
        }
        out
    }

    /// All wavelengths in `band` whose transmittance equals `target`.
    ///
    /// The band is cut at the extrema of `T` so every piece is monotone.
    /// Sign changes of `T(λ) - target` are bracketed on the grid from
    /// `options` and bisected. Peaks and zeros are reported when they touch
    /// the target. Sorted ascending; empty when the band holds no solution.
    pub fn invert_transmittance(
        &self,
        target: F,
        band: &WavelengthBand<F>,
        options: &InversionOptions,
    ) -> Result<Vec<F>> {
        let max_t = self.max_transmittance();
        if !(target >= F::zero()) || !target.is_finite() {
            return Err(domain("target transmittance", target.as_f64()));
        }
        if target > max_t {
            return Err(Error::NoSolution {
                target: target.as_f64(),
                max: max_t.as_f64(),
            });
        }
        let accept = F::lit(options.accept_tol).max(F::epsilon() * F::lit(64.0));
        let x_tol = F::lit(options.lambda_tol);
        let g = |lambda: F| self.transmittance_unchecked(lambda) - target;

        let extrema = self.extrema_in(band);
        let mut breaks = Vec::with_capacity(extrema.len() + 2);
        breaks.push(band.lambda_min);
        breaks.extend(extrema.iter().copied());
        breaks.push(band.lambda_max);

        let grid: Vec<F> =
            uniform_grid(band.lambda_min, band.lambda_max, options.grid_points).collect();
        let mut roots = Vec::new();
        for piece in breaks.windows(2) {
            let (a, b) = (piece[0], piece[1]);
            let mut pts = vec![a];
            pts.extend(grid.iter().copied().filter(|&x| x > a && x < b));
            pts.push(b);
            let vals: Vec<F> = pts.iter().map(|&x| g(x)).collect();
            for (i, (&x, &v)) in pts.iter().zip(&vals).enumerate() {
                if v.abs() < accept && (i == 0 || i == pts.len() - 1) {
                    // extremum or band edge touching the target
                    roots.push(x);
                } else if v == F::zero() {
                    roots.push(x);
                }
                if i > 0 {
                    let vp = vals[i - 1];
                    if vp != F::zero() && v != F::zero() && (vp < F::zero()) != (v < F::zero()) {
                        roots.push(bisect(g, pts[i - 1], x, x_tol));
                    }
                }
            }
        }
        roots.retain(|&x| g(x).abs() < accept);
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let merge = F::lit(1e-12);
        roots.dedup_by(|b, a| (*b - *a).abs() <= merge);
        Ok(roots)
    }
}

impl<F: Real> Default for CouplerModel<F> {
    fn default() -> Self {
        Self::telecom_default()
    }
}

/// Search window for inverting the transmittance, µm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WavelengthBand<F> {
    pub lambda_min: F,
    pub lambda_max: F,
}

impl<F: Real> WavelengthBand<F> {
    pub fn new(lambda_min: F, lambda_max: F) -> Result<Self> {
        if !(lambda_min > F::zero() && lambda_min.is_finite()) {
            return Err(domain("band lower edge", lambda_min.as_f64()));
        }
        if !(lambda_max > lambda_min && lambda_max.is_finite()) {
            return Err(domain("band upper edge", lambda_max.as_f64()));
        }
        Ok(Self {
            lambda_min,
            lambda_max,
        })
    }

    pub fn contains(&self, lambda: F) -> bool {
        lambda >= self.lambda_min && lambda <= self.lambda_max
    }
}

impl<F: Real> Default for WavelengthBand<F> {
    /// 0.8 to 2.4 µm.
    fn default() -> Self {
        Self {
            lambda_min: F::lit(0.8),
            lambda_max: F::lit(2.4),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InversionOptions {
    /// Bracketing grid size over the whole band.
    pub grid_points: usize,
    /// Bisection stopping width on λ.
    pub lambda_tol: f64,
    /// Largest accepted |T(λ) − target|.
    pub accept_tol: f64,
}

impl Default for InversionOptions {
    fn default() -> Self {
        Self {
            grid_points: 10_000,
            lambda_tol: 1e-12,
            accept_tol: 1e-9,
        }
    }
}
