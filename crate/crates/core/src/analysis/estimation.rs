use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::session::SessionDataset;

/// Fewest rounds accepted by [`estimate_parameters`].
pub const MIN_ROUNDS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quadratures {
    /// x only.
    #[default]
    X,
    /// x and p pooled as independent samples.
    Pooled,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimationOptions {
    pub quadratures: Quadratures,
}

/// Channel estimates from Alice's and Bob's shared data, N0 units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimationReport {
    /// Regression slope of Bob's value on Alice's; `sqrt(η/2)` for an
    /// unbiased channel.
    pub t_hat: f64,
    pub t_hat_se: f64,
    /// Empirical `V_B|A = Var(x_B - sqrt(η/2) x_A)`.
    pub v_ba_hat: f64,
    /// `V_B|A` above the honest heterodyne baseline of one N0.
    pub excess_hat: f64,
    pub excess_se: f64,
    pub n_rounds: usize,
    pub n_samples: usize,
}

impl EstimationReport {
    /// Whether the estimated excess noise exceeds `epsilon`.
    pub fn detects_attack(&self, epsilon: f64) -> bool {
        self.excess_hat > epsilon
    }
}

/// Estimates the channel from a session dataset.
///
/// The honest heterodyne channel gives `V_B|A = η (shot noise of Alice's
/// state and of the heterodyne split) + (1 - η)` = 1 N0, so
/// `excess_hat = V_B|A - 1`. Standard errors come from the sample fourth
/// moment (excess) and the ordinary least-squares formula (slope).
pub fn estimate_parameters(
    dataset: &SessionDataset,
    options: &EstimationOptions,
) -> Result<EstimationReport> {
    let n_rounds = dataset.records.len();
    if n_rounds < MIN_ROUNDS {
        return Err(Error::InsufficientData {
            n: n_rounds,
            min: MIN_ROUNDS,
        });
    }
    let params = &dataset.params;
    let unit = params.n0.n0().sqrt();
    let k = (params.eta / 2.0).sqrt();

    let mut pairs: Vec<(f64, f64)> = dataset
        .records
        .iter()
        .map(|r| (r.alice.x, r.bob.x))
        .collect();
    if options.quadratures == Quadratures::Pooled {
        pairs.extend(dataset.records.iter().map(|r| (r.alice.p, r.bob.p)));
    }
    for (a, b) in pairs.iter_mut() {
        *a /= unit;
        *b /= unit;
    }
    let n = pairs.len() as f64;

    let mean_a = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_b = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut saa, mut sab) = (0.0, 0.0);
    for &(a, b) in &pairs {
        saa += (a - mean_a) * (a - mean_a);
        sab += (a - mean_a) * (b - mean_b);
    }
    let t_hat = sab / saa;
    let sse: f64 = pairs
        .iter()
        .map(|&(a, b)| {
            let r = (b - mean_b) - t_hat * (a - mean_a);
            r * r
        })
        .sum();
    let t_hat_se = (sse / (n - 2.0) / saa).sqrt();

    let d: Vec<f64> = pairs.iter().map(|&(a, b)| b - k * a).collect();
    let mean_d = d.iter().sum::<f64>() / n;
    let (mut m2, mut m4) = (0.0, 0.0);
    for &x in &d {
        let c = (x - mean_d) * (x - mean_d);
        m2 += c;
        m4 += c * c;
    }
    let v_ba_hat = m2 / (n - 1.0);
    let m4 = m4 / n;
    let excess_se = ((m4 - v_ba_hat * v_ba_hat).max(0.0) / n).sqrt();

    Ok(EstimationReport {
        t_hat,
        t_hat_se,
        v_ba_hat,
        excess_hat: v_ba_hat - 1.0,
        excess_se,
        n_rounds,
        n_samples: pairs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::session::{run_session, SessionConfig};
    use crate::units::{ProtocolParams, ShotNoise};

    fn params() -> ProtocolParams<f64> {
        ProtocolParams::new(10.0, 0.6, 1e8, 0.01).unwrap()
    }

    #[test]
    fn too_few_rounds() {
        let ds = run_session(&params(), &SessionConfig::hiding(), 99, 1).unwrap();
        let err = estimate_parameters(&ds, &EstimationOptions::default()).unwrap_err();
        assert_eq!(err, Error::InsufficientData { n: 99, min: 100 });
    }

    #[test]
    fn noiseless_chain() {
        let cfg = SessionConfig {
            vacuum_noise: false,
            ..SessionConfig::hiding()
        };
        let ds = run_session(&params(), &cfg, 1000, 2).unwrap();
        let r = estimate_parameters(&ds, &EstimationOptions::default()).unwrap();
        assert!((r.t_hat - 0.3f64.sqrt()).abs() < 1e-12);
        assert_eq!(r.v_ba_hat, 0.0);
        assert_eq!(r.excess_hat, -1.0);
    }

    #[test]
    fn standard_errors_shrink_as_root_n() {
        let cfg = SessionConfig::fixed(0.3);
        let small = run_session(&params(), &cfg, 10_000, 4).unwrap();
        let large = run_session(&params(), &cfg, 160_000, 4).unwrap();
        let o = EstimationOptions::default();
        let (a, b) = (
            estimate_parameters(&small, &o).unwrap(),
            estimate_parameters(&large, &o).unwrap(),
        );
        // ratio should be 4; allow sampling noise in the SE estimates
        assert!((a.excess_se / b.excess_se - 4.0).abs() < 0.2);
        assert!((a.t_hat_se / b.t_hat_se - 4.0).abs() < 0.2);
    }

    #[test]
    fn rescaled_shot_noise_gives_identical_estimates() {
        let cfg = SessionConfig::fixed(0.3);
        let p1 = params();
        let p4 = params().with_shot_noise(ShotNoise::new(4.0).unwrap());
        let o = EstimationOptions::default();
        let a = estimate_parameters(&run_session(&p1, &cfg, 5000, 8).unwrap(), &o).unwrap();
        let b = estimate_parameters(&run_session(&p4, &cfg, 5000, 8).unwrap(), &o).unwrap();
        assert_eq!(a.excess_hat, b.excess_hat);
        assert_eq!(a.t_hat, b.t_hat);
    }

    #[test]
    fn pooling_doubles_samples() {
        let ds = run_session(&params(), &SessionConfig::hiding(), 1000, 6).unwrap();
        let r = estimate_parameters(
            &ds,
            &EstimationOptions {
                quadratures: Quadratures::Pooled,
            },
        )
        .unwrap();
        assert_eq!(r.n_samples, 2000);
        assert_eq!(r.n_rounds, 1000);
    }
}
