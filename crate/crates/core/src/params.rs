//! Parameter sets for the channel, the sources, the memories and the protocol.
//!
//! Defaults reproduce the long-distance benchmark setup: 22 km attenuation
//! length, 93% detectors, 50% entangling efficiency, 1e-8 dark counts,
//! 80% frequency shifting, 300 us coherence time.

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, check_prob, domain, Error, Result};

/// Fiber and detector properties.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelParams {
    /// Attenuation length in km.
    pub l_att_km: f64,
    /// Dark-count probability per detector per pulse.
    pub p_dc: f64,
    /// Detector efficiency.
    pub eta_d: f64,
    /// Efficiency of the entangled-photon source feeding the side BSM.
    pub eta_ent: f64,
    /// Frequency-shifting efficiency before the middle BSM.
    pub eta_f: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            l_att_km: 22.0,
            p_dc: 1e-8,
            eta_d: 0.93,
            eta_ent: 0.5,
            eta_f: 0.8,
        }
    }
}

impl ChannelParams {
    /// Lossless devices and no dark counts.
    pub fn ideal() -> Self {
        Self {
            l_att_km: 22.0,
            p_dc: 0.0,
            eta_d: 1.0,
            eta_ent: 1.0,
            eta_f: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("channel.l_att_km", self.l_att_km)?;
        if !(0.0..1.0).contains(&self.p_dc) {
            return Err(domain("channel.p_dc", self.p_dc, "[0, 1)"));
        }
        check_prob("channel.eta_d", self.eta_d)?;
        check_prob("channel.eta_ent", self.eta_ent)?;
        check_prob("channel.eta_f", self.eta_f)?;
        Ok(())
    }
}

/// Mean photon numbers of Alice's and Bob's weak coherent pulses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceParams {
    pub mu: f64,
    pub nu: f64,
}

impl Default for SourceParams {
    fn default() -> Self {
        Self { mu: 1.0, nu: 1.0 }
    }
}

impl SourceParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(domain("source.mu", self.mu, "[0, inf)"));
        }
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(domain("source.nu", self.nu, "[0, inf)"));
        }
        Ok(())
    }

    /// Probability that both pulses carry exactly one photon.
    pub fn single_photon_pair_prob(&self) -> f64 {
        self.mu * self.nu * (-self.mu - self.nu).exp()
    }
}

/// Memory timing, readout efficiency and mode counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MemoryParams {
    /// Optical coherence time in seconds.
    pub t2_s: f64,
    /// Repetition period in seconds.
    pub tau_s: f64,
    /// Readout efficiency at zero storage time.
    pub eta_r0: f64,
    /// Spectral or spatial modes.
    pub m_s: u64,
    /// Temporal modes.
    pub m_t: u64,
}

impl Default for MemoryParams {
    fn default() -> Self {
        Self {
            t2_s: 300e-6,
            tau_s: 5e-9,
            eta_r0: 1.0,
            m_s: 1,
            m_t: 1,
        }
    }
}

impl MemoryParams {
    pub fn validate(&self) -> Result<()> {
        check_positive("memory.t2_s", self.t2_s)?;
        check_positive("memory.tau_s", self.tau_s)?;
        check_prob("memory.eta_r0", self.eta_r0)?;
        if self.m_s == 0 {
            return Err(domain("memory.m_s", 0.0, "[1, inf)"));
        }
        if self.m_t == 0 {
            return Err(domain("memory.m_t", 0.0, "[1, inf)"));
        }
        Ok(())
    }

    pub fn tau_over_t2(&self) -> f64 {
        self.tau_s / self.t2_s
    }
}

/// Which key-rate formula to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Memoryless MDI-QKD, i.e. the multimode protocol with a single mode.
    Original,
    /// Asynchronous pairing through on-demand readout.
    OnDemand,
    /// Spectral or spatial multiplexing.
    Multimode,
    /// Multiplexing over `m_s * m_t` modes spread across `m_t` slots.
    Temporal,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Original,
        Variant::OnDemand,
        Variant::Multimode,
        Variant::Temporal,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Variant::Original => "original",
            Variant::OnDemand => "on_demand",
            Variant::Multimode => "multimode",
            Variant::Temporal => "temporal",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "original" => Ok(Variant::Original),
            "on_demand" | "ondemand" => Ok(Variant::OnDemand),
            "multimode" => Ok(Variant::Multimode),
            "temporal" => Ok(Variant::Temporal),
            other => Err(Error::Precondition(format!("unknown variant `{other}`"))),
        }
    }
}

/// Source of the bit errors fed into the secret fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QberMode {
    /// `e_x = e_z = 0`.
    Ideal,
    /// Dark-count coincidences of the middle BSM carry random bits.
    DarkCount,
    /// As `DarkCount`, with the X basis further dephased over the mean storage time.
    DarkCountPlusDephasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QberModel {
    pub mode: QberMode,
    /// Error rate of a noise-triggered click.
    #[serde(default = "QberModel::default_e0")]
    pub e0: f64,
}

impl QberModel {
    fn default_e0() -> f64 {
        0.5
    }

    pub fn new(mode: QberMode) -> Self {
        Self { mode, e0: 0.5 }
    }

    pub fn default_for(variant: Variant) -> Self {
        match variant {
            Variant::OnDemand => Self::new(QberMode::DarkCountPlusDephasing),
            _ => Self::new(QberMode::DarkCount),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=0.5).contains(&self.e0) {
            return Err(domain("protocol.qber.e0", self.e0, "[0, 0.5]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    /// Error-correction inefficiency `f`.
    pub f_ec: f64,
    pub qber: QberModel,
    pub variant: Variant,
    /// Apply readout and frequency-shift losses to the arms of the middle BSM.
    /// Off evaluates the bare multimode formula.
    pub derate: bool,
}

impl ProtocolConfig {
    pub fn new(variant: Variant) -> Self {
        Self {
            f_ec: 0.0,
            qber: QberModel::default_for(variant),
            variant,
            derate: true,
        }
    }

    pub fn with_qber(mut self, mode: QberMode) -> Self {
        self.qber.mode = mode;
        self
    }

    pub fn with_derate(mut self, derate: bool) -> Self {
        self.derate = derate;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f_ec >= 0.0 && self.f_ec.is_finite()) {
            return Err(domain("protocol.f_ec", self.f_ec, "[0, inf)"));
        }
        self.qber.validate()
    }
}

/// Everything a rate evaluation depends on besides the distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub channel: ChannelParams,
    pub source: SourceParams,
    pub memory: MemoryParams,
    pub protocol: ProtocolConfig,
}

impl Scenario {
    /// Default device parameters evaluated with `variant`.
    pub fn new(variant: Variant) -> Self {
        Self {
            channel: ChannelParams::default(),
            source: SourceParams::default(),
            memory: MemoryParams::default(),
            protocol: ProtocolConfig::new(variant),
        }
    }

    pub fn with_modes(mut self, m_s: u64, m_t: u64) -> Self {
        self.memory.m_s = m_s;
        self.memory.m_t = m_t;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        self.source.validate()?;
        self.memory.validate()?;
        self.protocol.validate()
    }
}
