//! TOML run configuration shared by the command-line front end.
//!
//! Every section is optional and falls back to the default device parameters.
//! Unknown keys are rejected, and physical parameters are validated as soon as
//! the file is loaded.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::BaselineKind;
use crate::error::Error;
use crate::montecarlo::McConfig;
use crate::params::{
    ChannelParams, MemoryParams, ProtocolConfig, QberMode, QberModel, Scenario, SourceParams,
    Variant,
};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("line {line}: {source}")]
    InvalidAt { line: usize, source: Error },
    #[error(transparent)]
    Invalid(#[from] Error),
    #[error("missing required key `{0}` (set it in the config file or pass the matching flag)")]
    Missing(&'static str),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolSection {
    pub variant: Option<Variant>,
    pub f_ec: f64,
    /// Defaults to the variant's usual QBER model when absent.
    pub qber: Option<QberMode>,
    pub e0: f64,
    pub derate: bool,
}

impl Default for ProtocolSection {
    fn default() -> Self {
        Self {
            variant: None,
            f_ec: 0.0,
            qber: None,
            e0: 0.5,
            derate: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSection {
    pub n_trials: Option<u64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    /// Loading efficiencies checked by `mc-validate`.
    pub etas: Option<Vec<f64>>,
    /// `tau / T2` for the loading checks; defaults to the memory section's ratio.
    pub tau_over_t2: Option<f64>,
    /// Distances for the multimode yield checks.
    pub distances_km: Option<Vec<f64>>,
    /// Spectral modes for the multimode yield checks.
    pub m_s: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RangeSection {
    pub start_km: Option<f64>,
    pub stop_km: Option<f64>,
    pub step_km: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrossoverSection {
    pub start_km: Option<f64>,
    pub stop_km: Option<f64>,
    pub step_km: Option<f64>,
    pub m_cap: Option<u64>,
    pub baseline: Option<BaselineKind>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeSection {
    pub grid_step: Option<f64>,
    pub m_t_cap: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub channel: ChannelParams,
    pub source: SourceParams,
    pub memory: MemoryParams,
    pub protocol: ProtocolSection,
    pub mc: McSection,
    pub sweep: RangeSection,
    pub crossover: CrossoverSection,
    pub optimize: OptimizeSection,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let config: RunConfig =
            toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate().map_err(|e| match locate(text, &e) {
            Some(line) => ConfigError::InvalidAt { line, source: e },
            None => ConfigError::Invalid(e),
        })?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.channel.validate()?;
        self.source.validate()?;
        self.memory.validate()?;
        self.protocol_config(self.protocol.variant.unwrap_or(Variant::Multimode))
            .validate()?;
        if let Some(etas) = &self.mc.etas {
            for &eta in etas {
                if !(eta > 0.0 && eta <= 1.0) {
                    return Err(crate::error::domain("mc.etas", eta, "(0, 1]"));
                }
            }
        }
        if self.mc.workers == Some(0) {
            return Err(crate::error::domain("mc.workers", 0.0, "[1, inf)"));
        }
        if self.mc.n_trials == Some(0) {
            return Err(crate::error::domain("mc.n_trials", 0.0, "[1, inf)"));
        }
        Ok(())
    }

    pub fn protocol_config(&self, variant: Variant) -> ProtocolConfig {
        let mut qber = QberModel::default_for(variant);
        if let Some(mode) = self.protocol.qber {
            qber.mode = mode;
        }
        qber.e0 = self.protocol.e0;
        ProtocolConfig {
            f_ec: self.protocol.f_ec,
            qber,
            variant,
            derate: self.protocol.derate,
        }
    }

    pub fn scenario(&self, variant: Variant) -> Scenario {
        Scenario {
            channel: self.channel,
            source: self.source,
            memory: self.memory,
            protocol: self.protocol_config(variant),
        }
    }

    /// Monte Carlo settings; the seed has no default.
    pub fn mc_config(&self) -> Result<McConfig, ConfigError> {
        let seed = self.mc.seed.ok_or(ConfigError::Missing("mc.seed"))?;
        Ok(McConfig {
            n_trials: self.mc.n_trials.unwrap_or(1_000_000),
            seed,
            workers: self.mc.workers.unwrap_or(1),
        })
    }
}

/// Line of the offending `section.key` assignment, if it appears in `text`.
fn locate(text: &str, err: &Error) -> Option<usize> {
    let Error::Domain { name, .. } = err else {
        return None;
    };
    let (section, key) = name.split_once('.')?;
    let mut current = "";
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if let Some(header) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = header.trim();
        } else if current == section
            && line
                .split_once('=')
                .is_some_and(|(k, _)| k.trim() == key)
        {
            return Some(i + 1);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
# benchmark long-distance link
[channel]
l_att_km = 22.0
eta_d = 0.93
p_dc = 1e-8

[memory]
t2_s = 300e-6
m_s = 1000

[protocol]
variant = "multimode"
qber = "dark_count"

[mc]
seed = 7
n_trials = 1000
"#;

    #[test]
    fn parses_partial_file_with_defaults() {
        let cfg = RunConfig::parse(SAMPLE).unwrap();
        assert_eq!(cfg.memory.m_s, 1000);
        assert_eq!(cfg.channel.eta_f, 0.8);
        assert_eq!(cfg.protocol.variant, Some(Variant::Multimode));
        let mc = cfg.mc_config().unwrap();
        assert_eq!((mc.seed, mc.n_trials, mc.workers), (7, 1000, 1));
        let s = cfg.scenario(Variant::OnDemand);
        assert_eq!(s.protocol.qber.mode, QberMode::DarkCount);
        let s = RunConfig::default().scenario(Variant::OnDemand);
        assert_eq!(s.protocol.qber.mode, QberMode::DarkCountPlusDephasing);
    }

    #[test]
    fn echo_round_trips() {
        let cfg = RunConfig::parse(SAMPLE).unwrap();
        let echoed = toml::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::parse(&echoed).unwrap(), cfg);
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&json).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_are_rejected_with_line() {
        let err = RunConfig::parse("[channel]\neta_d = 0.9\nbogus = 1\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3"), "{msg}");
        assert!(msg.contains("bogus"), "{msg}");
        assert!(RunConfig::parse("[nonsense]\nx = 1\n").is_err());
    }

    #[test]
    fn out_of_range_values_report_their_line() {
        let err = RunConfig::parse("[source]\nmu = 0.5\n\n[channel]\neta_d = 1.5\n").unwrap_err();
        assert!(matches!(err, ConfigError::InvalidAt { line: 5, .. }), "{err}");
        assert!(err.to_string().contains("channel.eta_d"));
    }

    #[test]
    fn seed_is_required_for_monte_carlo() {
        let err = RunConfig::default().mc_config().unwrap_err();
        assert!(err.to_string().contains("mc.seed"));
    }
}
