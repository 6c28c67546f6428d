//! Balanced and unbalanced homodyne detection with a classical local
//! oscillator.
//!
//! Vacuum quadratures entering the open port of a beam splitter are drawn
//! with variance N0 = 1. Each splitter event draws its own vacuum sample;
//! the two output ports of one splitter share it with opposite signs.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::scalar::Real;
use crate::units::{QuadraturePair, RandomSource};

/// Photocurrent proportionality constant. Outputs are pre-scaled by it.
pub const PHOTOCURRENT_GAIN: f64 = 1.0;

/// Signal-to-LO intensity ratio above which the linearized output is
/// reported as unreliable.
pub const WEAK_SIGNAL_RATIO: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorSpec<F> {
    /// Beam-splitter transmittance.
    pub t: F,
    /// LO phase relative to the signal, radians.
    pub theta: F,
}

impl<F: Real> DetectorSpec<F> {
    pub fn new(t: F, theta: F) -> Result<Self> {
        check_transmittance(t)?;
        if !theta.is_finite() {
            return Err(domain("LO phase", theta.as_f64()));
        }
        Ok(Self { t, theta })
    }

    /// θ = 0, reads the x quadrature.
    pub fn x_quadrature(t: F) -> Result<Self> {
        Self::new(t, F::zero())
    }

    /// θ = π/2, reads the p quadrature.
    pub fn p_quadrature(t: F) -> Result<Self> {
        Self::new(t, F::FRAC_PI_2())
    }

    #[inline]
    pub fn q(&self) -> F {
        F::lit(PHOTOCURRENT_GAIN)
    }

    pub fn is_balanced(&self) -> bool {
        self.t == F::lit(0.5)
    }
}

/// A beam entering a detector: total intensity and the classical part of
/// its quadratures (zero for vacuum).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BeamState<F> {
    pub intensity: F,
    pub mean: QuadraturePair<F>,
}

impl<F: Real> BeamState<F> {
    pub fn new(intensity: F, mean: QuadraturePair<F>) -> Result<Self> {
        if !(intensity.is_finite() && intensity >= F::zero()) {
            return Err(domain("beam intensity", intensity.as_f64()));
        }
        Ok(Self { intensity, mean })
    }

    pub fn vacuum() -> Self {
        Self {
            intensity: F::zero(),
            mean: QuadraturePair::zero(),
        }
    }
}

/// Intensities leaving the two ports of a splitter. `i1` carries the
/// transmitted share `t I`, `i2` the reflected share `(1 - t) I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PortIntensities<F> {
    pub i1: F,
    pub i2: F,
}

impl<F: Real> PortIntensities<F> {
    pub fn total(&self) -> F {
        self.i1 + self.i2
    }

    pub fn transmitted(&self) -> F {
        self.i1
    }

    pub fn reflected(&self) -> F {
        self.i2
    }
}

fn check_transmittance<F: Real>(t: F) -> Result<()> {
    if !(t >= F::zero() && t <= F::one()) {
        return Err(domain("transmittance", t.as_f64()));
    }
    Ok(())
}

/// Balanced detector reading `2 |α_LO| (x cos θ + p sin θ)`.
pub fn balanced_output<F: Real>(lo_intensity: F, input: QuadraturePair<F>, theta: F) -> F {
    F::lit(2.0) * lo_intensity.sqrt() * (input.x * theta.cos() + input.p * theta.sin())
}

/// Noise-free unbalanced two-port photocurrent difference
/// `2 sqrt(t(1-t)) x_θ + (1 - 2t)(|α_S|² - |α_LO|²)` for a given `x_θ`.
pub fn unbalanced_difference<F: Real>(t: F, x_theta: F, signal_intensity: F, lo_intensity: F) -> F {
    let two = F::lit(2.0);
    two * (t * (F::one() - t)).sqrt() * x_theta
        + (F::one() - two * t) * (signal_intensity - lo_intensity)
}

/// Shot-noise variance of the two-port unbalanced output, `4 t (1 - t)` N0.
pub fn two_port_shot_noise_variance<F: Real>(t: F) -> Result<F> {
    check_transmittance(t)?;
    Ok(F::lit(4.0) * t * (F::one() - t))
}

/// Whether the signal's own intensity enters the two-port output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelfIntensity {
    /// Linearized output: the `|α_S|²` term is dropped.
    #[default]
    Neglected,
    /// Keep `(1 - 2t) |α_S|²`.
    Retained,
}

/// One reading of a two-port unbalanced detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UbhdReading<F> {
    /// Photocurrent difference of the two ports.
    pub photocurrent: F,
    /// Photocurrent divided by `2 |α_LO|`, in `sqrt(N0)` units; at `t = 1/2`
    /// this is the balanced quadrature reading.
    pub quadrature: F,
    /// `signal.intensity / lo_intensity` exceeded [`WEAK_SIGNAL_RATIO`].
    pub strong_signal: bool,
}

/// Two-port unbalanced detector: one vacuum draw per quadrature is added to
/// the signal's classical mean, mixed with the LO and differenced.
pub fn two_port_ubhd_output<F: Real>(
    spec: &DetectorSpec<F>,
    signal: &BeamState<F>,
    lo_intensity: F,
    rng: &mut RandomSource,
    self_intensity: SelfIntensity,
) -> Result<UbhdReading<F>> {
    if !(lo_intensity.is_finite() && lo_intensity > F::zero()) {
        return Err(domain("LO intensity", lo_intensity.as_f64()));
    }
    let noise = QuadraturePair::new(rng.standard_normal(), rng.standard_normal());
    let input = signal.mean + noise;
    let x_theta = balanced_output(lo_intensity, input, spec.theta);
    let s = match self_intensity {
        SelfIntensity::Neglected => F::zero(),
        SelfIntensity::Retained => signal.intensity,
    };
    let photocurrent = spec.q() * unbalanced_difference(spec.t, x_theta, s, lo_intensity);
    let strong_signal = signal.intensity > F::lit(WEAK_SIGNAL_RATIO) * lo_intensity;
    if strong_signal {
        log::warn!(
            "signal/LO intensity ratio {} above {WEAK_SIGNAL_RATIO}; linearized output is approximate",
            (signal.intensity / lo_intensity).as_f64()
        );
    }
    Ok(UbhdReading {
        photocurrent,
        quadrature: photocurrent / (F::lit(2.0) * lo_intensity.sqrt()),
        strong_signal,
    })
}

/// Deterministic one-port split of a beam of `intensity` at a splitter of
/// transmittance `t`, given the vacuum quadrature `vacuum` at its open port.
pub fn one_port_split<F: Real>(t: F, intensity: F, vacuum: F) -> PortIntensities<F> {
    let fluct = F::lit(2.0) * (t * (F::one() - t) * intensity).sqrt() * vacuum;
    PortIntensities {
        i1: t * intensity + fluct,
        i2: (F::one() - t) * intensity - fluct,
    }
}

/// One-port unbalanced detector fed by the LO alone: a single vacuum draw
/// appears with opposite signs in the two ports.
pub fn one_port_ubhd_intensities<F: Real>(
    t: F,
    lo_intensity: F,
    rng: &mut RandomSource,
) -> Result<PortIntensities<F>> {
    check_transmittance(t)?;
    if !(lo_intensity.is_finite() && lo_intensity > F::zero()) {
        return Err(domain("LO intensity", lo_intensity.as_f64()));
    }
    let vacuum: F = rng.standard_normal();
    Ok(one_port_split(t, lo_intensity, vacuum))
}
