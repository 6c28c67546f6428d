//! TOML run configuration.

use std::f64::consts::FRAC_PI_4;
use std::path::{Path, PathBuf};

use cvqkd_attack::coupler::{InversionOptions, TELECOM_WAVELENGTH};
use cvqkd_attack::session::{CouplerSetup, SessionConfig};
use cvqkd_attack::{AttackConfig, CouplerModel, ProtocolParams, WavelengthBand};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub protocol: ProtocolParams,
    pub coupler: CouplerConfig,
    pub attack: AttackConfig,
    pub simulation: SimulationConfig,
    pub sweep: SweepConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CouplerConfig {
    pub f: f64,
    /// Calibrated to a 50/50 split at 1.55 µm when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    pub w: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub grid_points: usize,
    /// Pick the hiding root whose wavelength is closest to 1.55 µm instead
    /// of the one closest to T2 = 1/2.
    pub select_by_wavelength: bool,
}

impl Default for CouplerConfig {
    fn default() -> Self {
        let band = WavelengthBand::default();
        Self {
            f: 1.0,
            c: None,
            w: 1.0,
            lambda_min: band.lambda_min,
            lambda_max: band.lambda_max,
            grid_points: InversionOptions::default().grid_points,
            select_by_wavelength: false,
        }
    }
}

impl CouplerConfig {
    pub fn model(&self) -> Result<CouplerModel, CliError> {
        let c = self
            .c
            .unwrap_or(FRAC_PI_4 * self.f / (self.w * TELECOM_WAVELENGTH.powf(2.5)));
        Ok(CouplerModel::new(self.f, c, self.w)?)
    }

    pub fn band(&self) -> Result<WavelengthBand, CliError> {
        Ok(WavelengthBand::new(self.lambda_min, self.lambda_max)?)
    }

    pub fn inversion(&self) -> InversionOptions {
        InversionOptions {
            grid_points: self.grid_points,
            ..InversionOptions::default()
        }
    }

    pub fn setup(&self) -> Result<CouplerSetup, CliError> {
        Ok(CouplerSetup {
            model: self.model()?,
            band: self.band()?,
            inversion: self.inversion(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    pub n_rounds: usize,
    pub seed: u64,
    pub vacuum_noise: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            n_rounds: 100_000,
            seed: 1,
            vacuum_noise: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub t2_min: f64,
    pub t2_max: f64,
    pub steps: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            t2_min: 0.0,
            t2_max: 1.0,
            steps: 1001,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    JsonLines,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Standard output when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub format: OutputFormat,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let invalid = |e: cvqkd_attack::Error| CliError::Config(e.to_string());
        self.protocol.validate().map_err(invalid)?;
        self.coupler
            .model()
            .and(self.coupler.band())
            .map_err(|e| CliError::Config(e.to_string()))?;
        if self.coupler.grid_points < 2 {
            return Err(CliError::Config(
                "coupler.grid_points must be at least 2".into(),
            ));
        }
        if let Some(lo) = self.attack.forged_lo_intensity {
            if !(lo.is_finite() && lo > 0.0) {
                return Err(CliError::Config(format!(
                    "attack.forged_lo_intensity must be positive, got {lo}"
                )));
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes to TOML")
    }

    pub fn session(&self) -> Result<SessionConfig, CliError> {
        Ok(SessionConfig {
            attack: self.attack,
            vacuum_noise: self.simulation.vacuum_noise,
            coupler: if self.coupler.select_by_wavelength {
                Some(self.coupler.setup()?)
            } else {
                None
            },
        })
    }
}
