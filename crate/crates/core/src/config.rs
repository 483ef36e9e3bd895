//! Experiment configuration file. One TOML document with four optional
//! sections; anything omitted falls back to the library defaults, so an
//! empty file (or no file at all) describes the reference setup.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::activation::{ActivationKind, ActivationSpec};
use crate::adc::{AdcConfig, CalibUnit};
use crate::analog::MacroConfig;
use crate::error::{Error, Result};
use crate::hwat::TrainConfig;
use crate::ramp::{InitStyle, RampMode};

/// `[adc]` section: converter resolution and ramp sourcing, in plain
/// strings so a config file never has to spell Rust enum names.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdcSection {
    pub n_bits: u32,
    /// "pwm" or "mcl".
    pub mode: String,
    /// Activation name: sigmoid, tanh, elu, selu, softsign, softplus, linear.
    pub activation: String,
    /// Override of the sampled output interval [lo, hi].
    pub output_range: Option<[f64; 2]>,
    /// Override of the ramp-step quantization divisor.
    pub quant_divisor: Option<u32>,
    pub calib_rows: usize,
    pub calib_pulses: Vec<u32>,
    /// "lsq_anchor", "half_sum" or "first_half".
    pub init_style: InitStyle,
    /// "half_lsb" or "full_lsb".
    pub calib_unit: CalibUnit,
}

impl Default for AdcSection {
    fn default() -> Self {
        let base = AdcConfig::new(
            5,
            RampMode::Pwm,
            ActivationSpec::preset(ActivationKind::Sigmoid),
        );
        AdcSection {
            n_bits: base.n_bits,
            mode: "pwm".into(),
            activation: "sigmoid".into(),
            output_range: None,
            quant_divisor: None,
            calib_rows: base.calib_rows,
            calib_pulses: base.calib_pulses,
            init_style: base.init_style,
            calib_unit: base.calib_unit,
        }
    }
}

impl AdcSection {
    /// Resolve the string fields into a validated converter config.
    pub fn to_adc(&self) -> Result<AdcConfig> {
        let kind = ActivationKind::parse(&self.activation)?;
        let mut act = ActivationSpec::preset(kind);
        if let Some([lo, hi]) = self.output_range {
            act = act.with_range(lo, hi);
        }
        if let Some(d) = self.quant_divisor {
            act = act.with_divisor(d);
        }
        let mode = RampMode::parse(&self.mode)?;
        let mut adc = AdcConfig::new(self.n_bits, mode, act);
        adc.calib_rows = self.calib_rows;
        adc.calib_pulses = self.calib_pulses.clone();
        adc.init_style = self.init_style;
        adc.calib_unit = self.calib_unit;
        adc.validate()?;
        Ok(adc)
    }
}

/// `[lstm]` section: layer geometry for mapping and reference runs.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LstmSection {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub seq_len: usize,
    pub classes: usize,
    pub weight_bits: u32,
}

impl Default for LstmSection {
    fn default() -> Self {
        // reference recognition layer: 40-dim features, 38 hidden units
        LstmSection {
            input_dim: 40,
            hidden_dim: 38,
            seq_len: 49,
            classes: 12,
            weight_bits: 3,
        }
    }
}

/// Whole config file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    /// `macro` is a Rust keyword; the section keeps the natural TOML name.
    #[serde(rename = "macro")]
    pub macro_cfg: MacroConfig,
    pub adc: AdcSection,
    pub lstm: LstmSection,
    pub train: TrainConfig,
}

impl FileConfig {
    pub fn from_toml(text: &str) -> Result<FileConfig> {
        let cfg: FileConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<FileConfig> {
        let text = std::fs::read_to_string(path)?;
        FileConfig::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.macro_cfg.validate()?;
        self.to_adc()?;
        self.train.validate()?;
        let l = &self.lstm;
        if l.input_dim == 0 || l.hidden_dim == 0 || l.seq_len == 0 || l.classes == 0 {
            return Err(Error::Config(
                "lstm dimensions must all be >= 1".into(),
            ));
        }
        Ok(())
    }

    pub fn to_adc(&self) -> Result<AdcConfig> {
        self.adc.to_adc()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_reference_setup() {
        let cfg = FileConfig::from_toml("").unwrap();
        assert_eq!(cfg.macro_cfg.rows, 160);
        assert_eq!(cfg.adc.n_bits, 5);
        assert_eq!(cfg.lstm.hidden_dim, 38);
        let adc = cfg.to_adc().unwrap();
        assert_eq!(adc.n_bits, 5);
        assert_eq!(adc.mode, RampMode::Pwm);
    }

    #[test]
    fn sections_override_independently() {
        let text = r#"
            [adc]
            n_bits = 4
            mode = "mcl"
            activation = "tanh"

            [macro]
            sigma_iu = 0.03

            [lstm]
            weight_bits = 5
        "#;
        let cfg = FileConfig::from_toml(text).unwrap();
        assert_eq!(cfg.adc.n_bits, 4);
        assert_eq!(cfg.macro_cfg.sigma_iu, 0.03);
        assert_eq!(cfg.lstm.weight_bits, 5);
        // untouched sections keep defaults
        assert_eq!(cfg.lstm.input_dim, 40);
        let adc = cfg.to_adc().unwrap();
        assert_eq!(adc.mode, RampMode::Mcl);
        assert_eq!(adc.activation.kind, ActivationKind::Tanh);
    }

    #[test]
    fn range_and_divisor_overrides_reach_the_spec() {
        let text = r#"
            [adc]
            activation = "elu"
            output_range = [-1.0, 3.0]
            quant_divisor = 2
        "#;
        let adc = FileConfig::from_toml(text).unwrap().to_adc().unwrap();
        assert_eq!(adc.activation.output_range, (-1.0, 3.0));
        assert_eq!(adc.activation.quant_divisor, 2);
    }

    #[test]
    fn unknown_keys_and_bad_names_are_rejected_with_positions() {
        let err = FileConfig::from_toml("[adc]\nn_bit = 4\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("n_bit"), "unknown key named: {msg}");
        assert!(msg.contains("line 2"), "position anchored: {msg}");

        let err = FileConfig::from_toml("[adc]\nactivation = \"sine\"\n").unwrap_err();
        assert!(matches!(err, Error::Activation(_)));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn invalid_physics_is_caught_at_load() {
        let err = FileConfig::from_toml("[macro]\nrows = 0\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = FileConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        let back = FileConfig::from_toml(&text).unwrap();
        assert_eq!(back.adc.n_bits, cfg.adc.n_bits);
        assert_eq!(back.train.epochs, cfg.train.epochs);
        assert_eq!(back.macro_cfg.i_u, cfg.macro_cfg.i_u);
    }
}
