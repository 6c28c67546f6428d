//! Monte Carlo of complete protocol rounds under the wavelength attack.
//!
//! Round `k` of a session seeded with `s` draws from substream `(s, k)` of
//! [`RandomSource`], in this order: Alice's modulation (x, p), the coherent
//! state's vacuum noise (x, p), Eve's heterodyne noise (x, p), then Bob's
//! six vacuum modes (fake-signal one-port splitter, fake-LO one-port
//! splitter, x detector signal and LO, p detector signal and LO). Rounds are
//! therefore independent of scheduling, and parallel and serial runs agree
//! bit for bit.

use std::io::{self, BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::hiding_t2;
use crate::attack::{
    check_residuals, solve_at_t2, solve_general, solve_same_sign, AttackSolution, AttackTarget,
};
use crate::coupler::{CouplerModel, InversionOptions, WavelengthBand, TELECOM_WAVELENGTH};
use crate::error::{domain, Error, Result};
use crate::units::{sample_gaussian_pair, ProtocolParams, QuadraturePair, RandomSource};

/// How Eve chooses the fake-LO transmittance.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum T2Policy {
    /// One `T2` for the whole session.
    Fixed { t2: f64 },
    /// A root of `V_B|E(T2) = 1 - η`, fixed for the whole session.
    #[default]
    Hiding,
    /// `T2 = 1/2` closed form per round; rounds outside its domain go
    /// through the general solver.
    SameSignOnly,
}

/// Whether the fake signal's vacuum noise reaches Bob's reading.
///
/// `Neglected` drops the two fake-signal terms, the weak-signal
/// approximation under which `V_B|E` takes its closed form. `Included` keeps
/// them with the intensity the solver actually produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignalNoise {
    #[default]
    Neglected,
    Included,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AttackConfig {
    pub policy: T2Policy,
    /// |α'_LO|²; the genuine LO intensity when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub forged_lo_intensity: Option<f64>,
    pub signal_noise: SignalNoise,
}

/// Bob's detector noise switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BobNoise {
    /// Draw vacuum fluctuations at all.
    pub vacuum: bool,
    pub signal_path: SignalNoise,
}

impl Default for BobNoise {
    fn default() -> Self {
        Self {
            vacuum: true,
            signal_path: SignalNoise::Neglected,
        }
    }
}

/// Coupler used to pick between hiding roots by wavelength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplerSetup {
    pub model: CouplerModel<f64>,
    pub band: WavelengthBand<f64>,
    pub inversion: InversionOptions,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionConfig {
    pub attack: AttackConfig,
    /// Quantum noise of Alice's states, Eve's detection and Bob's detection.
    pub vacuum_noise: bool,
    pub coupler: Option<CouplerSetup>,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            attack: AttackConfig::default(),
            vacuum_noise: true,
            coupler: None,
        }
    }
}

impl SessionConfig {
    pub fn fixed(t2: f64) -> Self {
        Self {
            attack: AttackConfig {
                policy: T2Policy::Fixed { t2 },
                ..AttackConfig::default()
            },
            ..Self::default()
        }
    }

    pub fn hiding() -> Self {
        Self::default()
    }

    fn bob_noise(&self) -> BobNoise {
        BobNoise {
            vacuum: self.vacuum_noise,
            signal_path: self.attack.signal_noise,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub alice: QuadraturePair<f64>,
    pub eve: QuadraturePair<f64>,
    pub bob: QuadraturePair<f64>,
    pub solution: AttackSolution<f64>,
}

impl RoundRecord {
    /// `(x̂_B|E, p̂_B|E)`, Bob's deviation from the scaled Eve outcome.
    pub fn bob_given_eve(&self, eta: f64) -> QuadraturePair<f64> {
        self.bob - self.eve * (eta / 2.0).sqrt()
    }

    /// Bob's deviation from the scaled Alice value.
    pub fn bob_given_alice(&self, eta: f64) -> QuadraturePair<f64> {
        self.bob - self.alice * (eta / 2.0).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionDataset {
    pub params: ProtocolParams<f64>,
    pub records: Vec<RoundRecord>,
    pub seed: u64,
}

pub const CSV_HEADER: &str = "round,x_A,p_A,x_E,p_E,x_B,p_B,T1,T2,signal_intensity";

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

impl SessionDataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for (k, r) in self.records.iter().enumerate() {
            let vals = [
                r.alice.x,
                r.alice.p,
                r.eve.x,
                r.eve.p,
                r.bob.x,
                r.bob.p,
                r.solution.t1,
                r.solution.t2,
                r.solution.signal_intensity,
            ];
            write!(w, "{k}")?;
            for v in vals {
                write!(w, ",{}", fmt_f64(v))?;
            }
            writeln!(w)?;
        }
        w.flush()
    }
}

/// One parsed line of the dataset export.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsvRow {
    pub round: usize,
    pub alice: QuadraturePair<f64>,
    pub eve: QuadraturePair<f64>,
    pub bob: QuadraturePair<f64>,
    pub t1: f64,
    pub t2: f64,
    pub signal_intensity: f64,
}

/// Reads back a file written by [`SessionDataset::write_csv`].
pub fn read_csv<R: BufRead>(r: R) -> io::Result<Vec<CsvRow>> {
    let bad = |line: usize, msg: &str| {
        io::Error::new(io::ErrorKind::InvalidData, format!("line {line}: {msg}"))
    };
    let mut lines = r.lines();
    let header = lines.next().transpose()?;
    if header.as_deref().map(str::trim_end) != Some(CSV_HEADER) {
        return Err(bad(1, "missing header"));
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(bad(i + 2, "expected 10 fields"));
        }
        let round = fields[0]
            .parse()
            .map_err(|_| bad(i + 2, "bad round index"))?;
        let mut v = [0.0; 9];
        for (slot, f) in v.iter_mut().zip(&fields[1..]) {
            *slot = f.parse().map_err(|_| bad(i + 2, "bad float"))?;
        }
        out.push(CsvRow {
            round,
            alice: QuadraturePair::new(v[0], v[1]),
            eve: QuadraturePair::new(v[2], v[3]),
            bob: QuadraturePair::new(v[4], v[5]),
            t1: v[6],
            t2: v[7],
            signal_intensity: v[8],
        });
    }
    Ok(out)
}

/// Eve's heterodyne outcome: Alice's mean plus the coherent state's vacuum
/// noise plus Eve's own detection noise, each of variance N0 = 1.
pub fn eve_heterodyne(
    alice_means: QuadraturePair<f64>,
    rng: &mut RandomSource,
) -> QuadraturePair<f64> {
    eve_heterodyne_scaled(alice_means, rng, 1.0)
}

fn eve_heterodyne_scaled(
    alice: QuadraturePair<f64>,
    rng: &mut RandomSource,
    noise_sd: f64,
) -> QuadraturePair<f64> {
    let zx_a: f64 = rng.standard_normal();
    let zp_a: f64 = rng.standard_normal();
    let zx_e: f64 = rng.standard_normal();
    let zp_e: f64 = rng.standard_normal();
    QuadraturePair::new(
        alice.x + noise_sd * zx_a + noise_sd * zx_e,
        alice.p + noise_sd * zp_a + noise_sd * zp_e,
    )
}

/// Bob's measurement deviation `(x̂_B|E, p̂_B|E)` for one round.
pub fn bob_noise(
    sol: &AttackSolution<f64>,
    params: &ProtocolParams<f64>,
    rng: &mut RandomSource,
    noise: &BobNoise,
) -> QuadraturePair<f64> {
    let z: [f64; 6] = std::array::from_fn(|_| rng.standard_normal());
    if !noise.vacuum {
        return QuadraturePair::zero();
    }
    let sd = params.n0.n0().sqrt();
    let [z_s, z_lo, dx_s, dx_lo, dp_s, dp_lo] = z.map(|v| v * sd);

    let (t1, t2) = (sol.t1, sol.t2);
    let i_s = match noise.signal_path {
        SignalNoise::Neglected => 0.0,
        SignalNoise::Included => sol.signal_intensity,
    };
    let i_lo = sol.lo_intensity;

    // one-port splitters: the same vacuum mode feeds both ports with
    // opposite signs
    let a_s = (1.0 - 2.0 * t1) * 2.0 * (t1 * (1.0 - t1) * i_s).sqrt();
    let a_lo = (1.0 - 2.0 * t2) * 2.0 * (t2 * (1.0 - t2) * i_lo).sqrt();
    // two-port detectors: shot-noise amplitude sqrt(4T(1-T)) per beam
    let g_s = (4.0 * t1 * (1.0 - t1)).sqrt();
    let g_lo = (4.0 * t2 * (1.0 - t2)).sqrt();

    let x = -a_s * z_s
        + a_lo * z_lo
        + 2.0 * ((1.0 - t1) * i_s).sqrt() * g_s * dx_s
        + 2.0 * ((1.0 - t2) * i_lo).sqrt() * g_lo * dx_lo;
    let p = a_s * z_s - a_lo * z_lo
        + 2.0 * (t1 * i_s).sqrt() * g_s * dp_s
        + 2.0 * (t2 * i_lo).sqrt() * g_lo * dp_lo;

    let scale = 1.0 / (2.0f64.sqrt() * params.lo_amplitude());
    QuadraturePair::new(x * scale, p * scale)
}

/// Bob's heterodyne reading `sqrt(η/2) (x_E, p_E) + (x̂_B|E, p̂_B|E)`.
///
/// The deterministic part holds only if `sol` satisfies the attacking
/// equations for `eve`, which is checked first.
pub fn bob_measure(
    sol: &AttackSolution<f64>,
    eve: QuadraturePair<f64>,
    params: &ProtocolParams<f64>,
    rng: &mut RandomSource,
    noise: &BobNoise,
) -> Result<QuadraturePair<f64>> {
    let target = AttackTarget::new(eve, params.eta, params.lo_amplitude());
    check_residuals(sol, &target)?;
    Ok(eve * (params.eta / 2.0).sqrt() + bob_noise(sol, params, rng, noise))
}

/// Picks the hiding root: the one whose fake-LO wavelength lands closest to
/// 1.55 µm when a coupler is given, otherwise the one closest to 1/2.
pub fn select_hiding_t2(eta: f64, coupler: Option<&CouplerSetup>) -> Result<f64> {
    let roots = hiding_t2(eta)?;
    let best = match coupler {
        Some(c) => roots
            .iter()
            .filter_map(|&t2| {
                let lambdas = c
                    .model
                    .invert_transmittance(t2, &c.band, &c.inversion)
                    .ok()?;
                let d = lambdas
                    .iter()
                    .map(|l| (l - TELECOM_WAVELENGTH).abs())
                    .fold(f64::INFINITY, f64::min);
                d.is_finite().then_some((t2, d))
            })
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .map(|(t2, _)| t2),
        None => roots
            .iter()
            .copied()
            .min_by(|a, b| (a - 0.5).abs().partial_cmp(&(b - 0.5).abs()).unwrap()),
    };
    best.ok_or(Error::Infeasible {
        t2_min: 0.0,
        t2_max: 1.0,
    })
}

/// The session-wide `T2`, or `None` for per-round selection.
pub fn session_t2(params: &ProtocolParams<f64>, config: &SessionConfig) -> Result<Option<f64>> {
    match config.attack.policy {
        T2Policy::Fixed { t2 } => {
            if !(0.0..=1.0).contains(&t2) {
                return Err(domain("T2", t2));
            }
            Ok(Some(t2))
        }
        T2Policy::Hiding => select_hiding_t2(params.eta, config.coupler.as_ref()).map(Some),
        T2Policy::SameSignOnly => Ok(None),
    }
}

struct Plan {
    params: ProtocolParams<f64>,
    t2: Option<f64>,
    forged_lo: f64,
    noise_sd: f64,
    bob: BobNoise,
    seed: u64,
}

impl Plan {
    fn new(params: &ProtocolParams<f64>, config: &SessionConfig, seed: u64) -> Result<Self> {
        params.validate()?;
        let forged_lo = config
            .attack
            .forged_lo_intensity
            .unwrap_or(params.lo_intensity);
        if !(forged_lo.is_finite() && forged_lo > 0.0) {
            return Err(domain("forged LO intensity", forged_lo));
        }
        Ok(Self {
            params: *params,
            t2: session_t2(params, config)?,
            forged_lo,
            noise_sd: if config.vacuum_noise {
                params.n0.n0().sqrt()
            } else {
                0.0
            },
            bob: config.bob_noise(),
            seed,
        })
    }

    fn round(&self, k: usize) -> Result<RoundRecord> {
        let p = &self.params;
        let mut rng = RandomSource::substream(self.seed, k as u64);
        let alice = sample_gaussian_pair(&mut rng, p.v_a * p.n0.n0())?;
        let eve = eve_heterodyne_scaled(alice, &mut rng, self.noise_sd);
        let target = AttackTarget::new(eve, p.eta, p.lo_amplitude());
        let solution = match self.t2 {
            Some(t2) => solve_at_t2(&target, t2, self.forged_lo)?,
            None => match solve_same_sign(&target, self.forged_lo) {
                Ok(sol) => sol,
                Err(Error::WrongBranch { .. }) => solve_general(&target, self.forged_lo, None)?,
                Err(e) => return Err(e),
            },
        };
        let bob = bob_measure(&solution, eve, p, &mut rng, &self.bob)?;
        Ok(RoundRecord {
            alice,
            eve,
            bob,
            solution,
        })
    }
}

fn first_error(results: Vec<Result<RoundRecord>>) -> Result<Vec<RoundRecord>> {
    results
        .into_iter()
        .enumerate()
        .map(|(k, r)| {
            r.map_err(|e| Error::Round {
                round: k,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Runs `n_rounds` protocol rounds, in parallel over rounds.
pub fn run_session(
    params: &ProtocolParams<f64>,
    config: &SessionConfig,
    n_rounds: usize,
    seed: u64,
) -> Result<SessionDataset> {
    if n_rounds == 0 {
        return Err(domain("round count", 0.0));
    }
    let plan = Plan::new(params, config, seed)?;
    let results: Vec<_> = (0..n_rounds)
        .into_par_iter()
        .map(|k| plan.round(k))
        .collect();
    Ok(SessionDataset {
        params: *params,
        records: first_error(results)?,
        seed,
    })
}

/// Single-threaded reference for [`run_session`].
pub fn run_session_serial(
    params: &ProtocolParams<f64>,
    config: &SessionConfig,
    n_rounds: usize,
    seed: u64,
) -> Result<SessionDataset> {
    if n_rounds == 0 {
        return Err(domain("round count", 0.0));
    }
    let plan = Plan::new(params, config, seed)?;
    let results: Vec<_> = (0..n_rounds).map(|k| plan.round(k)).collect();
    Ok(SessionDataset {
        params: *params,
        records: first_error(results)?,
        seed,
    })
}
