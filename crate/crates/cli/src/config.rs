use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sqkd_core::device::{ChannelParams, DeviceChainParams, Preset, EXPERIMENT_CHANNEL_LOSS, LOWEST_COUPLED_NOISE};
use sqkd_core::security::{FiniteSizeParams, DEFAULT_EPS_PA, DEFAULT_EPS_SMOOTH, DEFAULT_E_EC};
use sqkd_core::protocol::BasisMode;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// One channel in a sweep: either a coupled noise photon number at the
/// configured loss, or a thermal background coupling `n_th eps / 2` photons
/// through loss `eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridPoint {
    Noise(f64),
    Thermal { background_photons: f64, loss: f64 },
}

impl GridPoint {
    pub fn channel(&self, default_loss: f64) -> Result<ChannelParams, CliError> {
        let ch = match *self {
            GridPoint::Noise(n) => ChannelParams::new(default_loss, n),
            GridPoint::Thermal { background_photons, loss } => {
                sqkd_core::link_budget::thermal_channel(loss, background_photons)
            }
        };
        ch.map_err(CliError::from_core_as_config)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SecurityConfig {
    pub include_delta: bool,
    pub include_pe: bool,
    pub e_ec: f64,
    pub beta: f64,
    pub p_ec: f64,
    /// Fraction of the sifted block used for the key; the rest estimates the
    /// channel.
    pub n_ec_fraction: f64,
    /// Search the key/estimation split instead of using `n_ec_fraction`.
    pub optimize_split: bool,
    pub eps_smooth: f64,
    pub eps_pa: f64,
}

impl Default for SecurityConfig {
    fn default() -> Self {
        Self {
            include_delta: true,
            include_pe: true,
            e_ec: DEFAULT_E_EC,
            beta: 1.0,
            p_ec: 1.0,
            n_ec_fraction: 0.5,
            optimize_split: false,
            eps_smooth: DEFAULT_EPS_SMOOTH,
            eps_pa: DEFAULT_EPS_PA,
        }
    }
}

impl SecurityConfig {
    pub fn any_penalty(&self) -> bool {
        self.include_delta || self.include_pe
    }

    pub fn finite_size(&self, total: usize, sifted: usize) -> Result<FiniteSizeParams, CliError> {
        let key = sqkd_core::security::key_count(sifted, self.n_ec_fraction).map_err(CliError::from_core_as_config)?;
        let mut fs = FiniteSizeParams::with_counts(total, sifted, key).map_err(CliError::from_core_as_config)?;
        fs.beta = self.beta;
        fs.p_ec = self.p_ec;
        fs.e_ec = self.e_ec;
        fs.eps_smooth = self.eps_smooth;
        fs.eps_pa = self.eps_pa;
        fs.include_delta = self.include_delta;
        fs.include_pe = self.include_pe;
        fs.validate().map_err(CliError::from_core_as_config)?;
        Ok(fs)
    }
}

/// A named medium for link budgets, or an explicit one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MediumEntry {
    Preset(String),
    Custom {
        label: String,
        attenuation_db_per_m: f64,
        background_photons: f64,
    },
}

impl MediumEntry {
    pub fn resolve(&self) -> Result<sqkd_core::link_budget::MediumSpec, CliError> {
        use sqkd_core::link_budget::MediumSpec;
        match self {
            MediumEntry::Preset(name) => MediumSpec::preset(name)
                .ok_or_else(|| CliError::Config(format!("unknown medium preset `{name}` (cryo-15mK, openair-300K)"))),
            MediumEntry::Custom {
                label,
                attenuation_db_per_m,
                background_photons,
            } => MediumSpec::new(label.clone(), *attenuation_db_per_m, *background_photons)
                .map_err(CliError::from_core_as_config),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: Preset,
    /// Full device chain; overrides `preset` when present.
    pub chain: Option<DeviceChainParams>,
    pub channel_loss: f64,
    pub channel_grid: Vec<GridPoint>,
    /// Coupled noise photons for `protocol` and `report`.
    pub operating_noise: f64,
    pub symbols: usize,
    pub seed: u64,
    pub basis_mode: BasisMode,
    pub security: SecurityConfig,
    pub media: Vec<MediumEntry>,
    /// Attenuation used for the background sweep of `linkbudget`.
    pub sweep_attenuation_db_per_m: f64,
    pub background_grid: Vec<f64>,
    pub bandwidth_hz: f64,
    pub bootstrap_resamples: usize,
    pub output_dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            preset: Preset::Run1,
            chain: None,
            channel_loss: EXPERIMENT_CHANNEL_LOSS,
            channel_grid: (0..=100).map(|i| GridPoint::Noise(i as f64 * 1e-3)).collect(),
            operating_noise: LOWEST_COUPLED_NOISE,
            symbols: 16665,
            seed: 1,
            basis_mode: BasisMode::Sift,
            security: SecurityConfig::default(),
            media: vec![
                MediumEntry::Preset("cryo-15mK".into()),
                MediumEntry::Preset("openair-300K".into()),
            ],
            sweep_attenuation_db_per_m: 1.0e-3,
            background_grid: (0..=40).map(|i| 10f64.powf(-2.0 + i as f64 * 0.15)).collect(),
            bandwidth_hz: 400e3,
            bootstrap_resamples: 200,
            output_dir: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Json],
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config is serializable")
    }

    pub fn chain(&self) -> DeviceChainParams {
        self.chain.clone().unwrap_or_else(|| DeviceChainParams::preset(self.preset))
    }

    /// Fill in the resolved chain so that outputs carry every parameter.
    pub fn resolved(&self) -> Result<Self, CliError> {
        let mut c = self.clone();
        c.chain = Some(self.chain());
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.chain().validate().map_err(CliError::from_core_as_config)?;
        ChannelParams::new(self.channel_loss, self.operating_noise).map_err(CliError::from_core_as_config)?;
        if self.symbols == 0 {
            return Err(CliError::Config("symbols must be >= 1".into()));
        }
        if !(self.bandwidth_hz.is_finite() && self.bandwidth_hz > 0.0) {
            return Err(CliError::Config(format!("bandwidth {} must be > 0", self.bandwidth_hz)));
        }
        if self.bootstrap_resamples < 2 {
            return Err(CliError::Config("bootstrap_resamples must be >= 2".into()));
        }
        if self.formats.is_empty() {
            return Err(CliError::Config("at least one output format is required".into()));
        }
        for p in &self.channel_grid {
            p.channel(self.channel_loss)?;
        }
        for m in &self.media {
            m.resolve()?;
        }
        self.security.finite_size(self.symbols, self.symbols / 2)?;
        Ok(())
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let c = ExperimentConfig::default().resolved().unwrap();
        let back = ExperimentConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn grid_points_parse_both_forms() {
        let c = ExperimentConfig::from_json(
            r#"{"channel_grid": [0.01, {"background_photons": 1250, "loss": 1e-4}]}"#,
        )
        .unwrap();
        assert_eq!(c.channel_grid[0], GridPoint::Noise(0.01));
        let ch = c.channel_grid[1].channel(c.channel_loss).unwrap();
        assert!((ch.coupled_noise_photons - 0.0625).abs() < 1e-12);
    }

    #[test]
    fn unknown_fields_and_presets_are_config_errors() {
        assert!(matches!(ExperimentConfig::from_json(r#"{"bogus": 1}"#), Err(CliError::Config(_))));
        assert!(matches!(ExperimentConfig::from_json(r#"{"preset": "run9"}"#), Err(CliError::Config(_))));
        let c = ExperimentConfig::from_json(r#"{"media": ["moon"]}"#).unwrap();
        assert!(matches!(c.validate(), Err(CliError::Config(_))));
    }

    #[test]
    fn presets_carry_run_parameters() {
        let c = ExperimentConfig {
            preset: Preset::Run2,
            ..Default::default()
        };
        let chain = c.chain();
        assert_eq!((chain.squeezing_db, chain.antisqueezing_db, chain.quantum_efficiency), (3.6, 7.6, 0.68));
        assert_eq!(chain.measurement_gain_db, 19.1);
        assert_eq!(c.channel_loss, 0.0115);
    }
}
