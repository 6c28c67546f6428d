//! Shot-noise units, quadrature values, protocol parameters and the seeded
//! random source shared by every simulation routine.
//!
//! All variances are expressed as multiples of the shot-noise variance N0.
//! Quadratures are expressed in units of `sqrt(N0)`.

use std::ops::{Add, Mul, Sub};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::scalar::Real;

/// Shot-noise variance N0. Internally fixed to 1 unless a caller rescales.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ShotNoise<F> {
    n0: F,
}

impl<F: Real> ShotNoise<F> {
    pub fn new(n0: F) -> Result<Self> {
        if !(n0.is_finite() && n0 > F::zero()) {
            return Err(domain("shot-noise variance n0", n0.as_f64()));
        }
        Ok(Self { n0 })
    }

    #[inline]
    pub fn n0(self) -> F {
        self.n0
    }
}

impl<F: Real> Default for ShotNoise<F> {
    fn default() -> Self {
        Self { n0: F::one() }
    }
}

/// An `(x, p)` quadrature pair.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QuadraturePair<F> {
    pub x: F,
    pub p: F,
}

impl<F: Real> QuadraturePair<F> {
    #[inline]
    pub fn new(x: F, p: F) -> Self {
        Self { x, p }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(F::zero(), F::zero())
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.p.is_finite()
    }

    #[inline]
    pub fn scale(self, k: F) -> Self {
        Self::new(self.x * k, self.p * k)
    }
}

impl<F: Real> Add for QuadraturePair<F> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.p + rhs.p)
    }
}

impl<F: Real> Sub for QuadraturePair<F> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.p - rhs.p)
    }
}

impl<F: Real> Mul<F> for QuadraturePair<F> {
    type Output = Self;
    fn mul(self, k: F) -> Self {
        self.scale(k)
    }
}

/// Session-level physics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    deny_unknown_fields,
    default,
    bound(serialize = "F: Serialize", deserialize = "F: Real + Deserialize<'de>")
)]
pub struct ProtocolParams<F> {
    /// Alice's modulation variance, N0 units.
    pub v_a: F,
    /// Channel transmission.
    pub eta: F,
    /// Genuine local-oscillator intensity |α_LO|², photon number.
    pub lo_intensity: F,
    /// Tolerated excess noise, N0 units.
    pub epsilon: F,
    pub n0: ShotNoise<F>,
}

impl<F: Real> ProtocolParams<F> {
    pub fn new(v_a: F, eta: F, lo_intensity: F, epsilon: F) -> Result<Self> {
        let params = Self {
            v_a,
            eta,
            lo_intensity,
            epsilon,
            n0: ShotNoise::default(),
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_shot_noise(mut self, n0: ShotNoise<F>) -> Self {
        self.n0 = n0;
        self
    }

    pub fn with_eta(mut self, eta: F) -> Result<Self> {
        self.eta = eta;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let zero = F::zero();
        if !(self.eta >= zero && self.eta <= F::one()) {
            return Err(domain("channel transmission eta", self.eta.as_f64()));
        }
        if !(self.v_a.is_finite() && self.v_a >= zero) {
            return Err(domain("modulation variance v_a", self.v_a.as_f64()));
        }
        if !(self.lo_intensity.is_finite() && self.lo_intensity > zero) {
            return Err(domain("LO intensity", self.lo_intensity.as_f64()));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= zero) {
            return Err(domain(
                "excess-noise allowance epsilon",
                self.epsilon.as_f64(),
            ));
        }
        ShotNoise::new(self.n0.n0())?;
        Ok(())
    }

    /// |α_LO|.
    #[inline]
    pub fn lo_amplitude(&self) -> F {
        self.lo_intensity.sqrt()
    }
}

impl<F: Real> Default for ProtocolParams<F> {
    /// V_A = 10, η = 0.6, |α_LO|² = 10^8, ε = 0.01.
    fn default() -> Self {
        Self {
            v_a: F::lit(10.0),
            eta: F::lit(0.6),
            lo_intensity: F::lit(1e8),
            epsilon: F::lit(0.01),
            n0: ShotNoise::default(),
        }
    }
}

/// Seeded, single-owner random stream.
///
/// Backed by ChaCha8. Gaussian draws use the ziggurat sampler of
/// `rand_distr::StandardNormal`. The pair `(seed, stream)` fully determines
/// the sequence, so independent substreams can be handed to parallel tasks
/// without coordination.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self::substream(seed, 0)
    }

    /// Stream `stream` of the generator keyed by `seed`.
    pub fn substream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    #[inline]
    pub fn standard_normal<F: Real>(&mut self) -> F {
        F::standard_normal(&mut self.rng)
    }

    /// One draw from Normal(mean, variance).
    pub fn gaussian<F: Real>(&mut self, mean: F, variance: F) -> Result<F> {
        check_variance(variance)?;
        let z: F = self.standard_normal();
        Ok(mean + z * variance.sqrt())
    }
}

impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

fn check_variance<F: Real>(variance: F) -> Result<()> {
    if !(variance.is_finite() && variance >= F::zero()) {
        return Err(domain("variance", variance.as_f64()));
    }
    Ok(())
}

/// Independent x and p, each Normal(0, variance).
///
/// Two draws are consumed even when `variance` is zero so that call
/// sequences stay aligned across configurations.
pub fn sample_gaussian_pair<F: Real>(
    rng: &mut RandomSource,
    variance: F,
) -> Result<QuadraturePair<F>> {
    check_variance(variance)?;
    let zx: F = rng.standard_normal();
    let zp: F = rng.standard_normal();
    if variance == F::zero() {
        return Ok(QuadraturePair::zero());
    }
    let s = variance.sqrt();
    Ok(QuadraturePair::new(zx * s, zp * s))
}
