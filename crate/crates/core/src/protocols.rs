//! Key-rate formulas for the on-demand, multimode and temporally multiplexed
//! protocols.
//!
//! Every formula evaluates `R = Y11_QM * (1 - h(e_x) - f h(e_z))` where
//! `Y11_QM` is the raw-bit yield per pulse slot. Distances are total
//! Alice-Bob distances with the middle node at the midpoint.

use serde::{Deserialize, Serialize};

use crate::bsm::{dark_fraction, side_bsm_prob, y11, y11_unchecked};
use crate::error::{check_nonneg, check_prob, domain, Error, Result};
use crate::memory::{eta_late, expected_abs_delta, expected_eta_early, expected_loading_attempts};
use crate::params::{
    ChannelParams, MemoryParams, ProtocolConfig, QberMode, Scenario, SourceParams, Variant,
};
use crate::primitives::{binary_entropy, channel_transmittance, dephasing_weight, mix_error};

/// Intermediate quantities behind a rate evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Channel-plus-detector transmittance of each user arm.
    pub eta_arm_a: f64,
    pub eta_arm_b: f64,
    /// Per-round memory loading probability (`eta_mm` for the multiplexed
    /// protocols, the WCP loading probability for on-demand).
    pub eta_load_a: f64,
    pub eta_load_b: f64,
    /// Expected loading rounds (on-demand only).
    pub n_l: Option<f64>,
    /// Mean storage time of the early memory in seconds (on-demand only).
    pub storage_time_s: Option<f64>,
    /// `Y11_QM` with both channels fully lossy: the dark-count floor.
    pub dark_floor: f64,
    /// Set when a memory can never load and the rate is forced to zero.
    pub zero_loading: bool,
}

/// One evaluated point of a key-rate curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub distance_km: f64,
    /// Secret bits per pulse slot.
    pub rate: f64,
    /// Raw bits per pulse slot.
    pub y11_qm: f64,
    pub e_x: f64,
    pub e_z: f64,
    pub diagnostics: Diagnostics,
}

/// Distillable fraction `max(0, 1 - h(e_x) - f h(e_z))`.
pub fn secret_fraction(e_x: f64, e_z: f64, f_ec: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&e_x) {
        return Err(domain("e_x", e_x, "[0, 0.5]"));
    }
    if !(0.0..=0.5).contains(&e_z) {
        return Err(domain("e_z", e_z, "[0, 0.5]"));
    }
    check_nonneg("f_ec", f_ec)?;
    let fraction = 1.0 - binary_entropy(e_x)? - f_ec * binary_entropy(e_z)?;
    Ok(fraction.max(0.0))
}

/// Transmittance of each user arm (fiber to the midpoint, then detection).
pub fn arm_transmittance(total_km: f64, ch: &ChannelParams) -> Result<(f64, f64)> {
    check_nonneg("total_km", total_km)?;
    let eta = channel_transmittance(total_km / 2.0, ch.l_att_km)? * ch.eta_d;
    Ok((eta, eta))
}

/// How a memory gets loaded by its user's weak coherent pulse.
///
/// The on-demand yield needs the loading probability for a single photon and
/// for a full WCP; swap this out to model a different heralding stage.
pub trait LoadingModel {
    /// Loading probability when the arm carries exactly one photon.
    fn single_photon(&self, eta_arm: f64, ch: &ChannelParams) -> Result<f64>;

    /// Loading probability for a WCP of mean photon number `mean_photons`,
    /// given the single-photon value.
    fn coherent(&self, mean_photons: f64, single_photon: f64) -> f64;
}

/// Side-BSM heralding with Poissonian photon statistics: each photon loads
/// independently, so `eta_mu = 1 - exp(-mu * eta_1)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PoissonLoading;

impl LoadingModel for PoissonLoading {
    fn single_photon(&self, eta_arm: f64, ch: &ChannelParams) -> Result<f64> {
        side_bsm_prob(eta_arm, ch)
    }

    fn coherent(&self, mean_photons: f64, single_photon: f64) -> f64 {
        -(-mean_photons * single_photon).exp_m1()
    }
}

/// Fraction of loaded rounds in which both memories hold a single-photon state.
pub fn single_photon_fraction(
    src: &SourceParams,
    eta_1: (f64, f64),
    eta_wcp: (f64, f64),
) -> f64 {
    if eta_wcp.0 == 0.0 || eta_wcp.1 == 0.0 {
        return 0.0;
    }
    eta_1.0 * eta_1.1 / (eta_wcp.0 * eta_wcp.1) * src.single_photon_pair_prob()
}

fn qber(
    cfg: &ProtocolConfig,
    middle: (f64, f64),
    p_dc: f64,
    storage: Option<(f64, f64)>,
) -> Result<(f64, f64)> {
    let base = match cfg.qber.mode {
        QberMode::Ideal => 0.0,
        QberMode::DarkCount | QberMode::DarkCountPlusDephasing => {
            cfg.qber.e0 * dark_fraction(middle.0, middle.1, p_dc)
        }
    };
    let e_x = match (cfg.qber.mode, storage) {
        (QberMode::DarkCountPlusDephasing, Some((t, t2))) => {
            mix_error(base, dephasing_weight(t, t2)?)
        }
        _ => base,
    };
    Ok((e_x.min(0.5), base))
}

fn finish(
    distance_km: f64,
    y11_qm: f64,
    (e_x, e_z): (f64, f64),
    cfg: &ProtocolConfig,
    diagnostics: Diagnostics,
) -> Result<RatePoint> {
    let rate = y11_qm * secret_fraction(e_x, e_z, cfg.f_ec)?;
    Ok(RatePoint {
        distance_km,
        rate,
        y11_qm,
        e_x,
        e_z,
        diagnostics,
    })
}

/// On-demand protocol with the default Poissonian loading model.
pub fn ondemand_rate(
    total_km: f64,
    src: &SourceParams,
    mem: &MemoryParams,
    ch: &ChannelParams,
    cfg: &ProtocolConfig,
) -> Result<RatePoint> {
    ondemand_rate_with(total_km, src, mem, ch, cfg, &PoissonLoading)
}

/// On-demand protocol: each memory holds its photon until the partner loads,
/// then both are read out into the middle BSM.
pub fn ondemand_rate_with(
    total_km: f64,
    src: &SourceParams,
    mem: &MemoryParams,
    ch: &ChannelParams,
    cfg: &ProtocolConfig,
    model: &dyn LoadingModel,
) -> Result<RatePoint> {
    let arms = arm_transmittance(total_km, ch)?;
    let mut point = ondemand_from_arms(total_km, arms, src, mem, ch, cfg, model)?;
    point.diagnostics.dark_floor =
        ondemand_from_arms(total_km, (0.0, 0.0), src, mem, ch, cfg, model)?.y11_qm;
    Ok(point)
}

fn ondemand_from_arms(
    total_km: f64,
    (arm_a, arm_b): (f64, f64),
    src: &SourceParams,
    mem: &MemoryParams,
    ch: &ChannelParams,
    cfg: &ProtocolConfig,
    model: &dyn LoadingModel,
) -> Result<RatePoint> {
    let eta_1 = (
        check_prob("eta_1a", model.single_photon(arm_a, ch)?)?,
        check_prob("eta_1b", model.single_photon(arm_b, ch)?)?,
    );
    let eta_wcp = (
        check_prob("eta_mu_a", model.coherent(src.mu, eta_1.0))?,
        check_prob("eta_nu_b", model.coherent(src.nu, eta_1.1))?,
    );
    let mut diagnostics = Diagnostics {
        eta_arm_a: arm_a,
        eta_arm_b: arm_b,
        eta_load_a: eta_wcp.0,
        eta_load_b: eta_wcp.1,
        ..Diagnostics::default()
    };
    if eta_wcp.0 == 0.0 || eta_wcp.1 == 0.0 {
        diagnostics.zero_loading = true;
        return Ok(RatePoint {
            distance_km: total_km,
            rate: 0.0,
            y11_qm: 0.0,
            e_x: 0.0,
            e_z: 0.0,
            diagnostics,
        });
    }

    let n_l = expected_loading_attempts(eta_wcp.0, eta_wcp.1)?;
    let early = expected_eta_early(eta_wcp.0, eta_wcp.1, mem, ch)?;
    let late = eta_late(mem, ch);
    let middle = y11(early, late, ch.p_dc)?;
    let y11_qm = middle / n_l * single_photon_fraction(src, eta_1, eta_wcp);

    let storage_time = expected_abs_delta(eta_wcp.0, eta_wcp.1)? * mem.tau_s;
    diagnostics.n_l = Some(n_l);
    diagnostics.storage_time_s = Some(storage_time);
    let errors = qber(cfg, (early, late), ch.p_dc, Some((storage_time, mem.t2_s)))?;
    finish(total_km, y11_qm, errors, cfg, diagnostics)
}

fn loading_from_arm(eta_arm: f64, modes: f64, ch: &ChannelParams) -> Result<f64> {
    let per_mode = side_bsm_prob(eta_arm, ch)?;
    // 1 - (1 - p)^m without cancellation for small p.
    Ok(-(modes * (-per_mode).ln_1p()).exp_m1())
}

/// Probability that at least one of `modes` heralded loading attempts succeeds
/// over an arm of length `arm_km`.
pub fn multimode_loading_prob(arm_km: f64, modes: u64, ch: &ChannelParams) -> Result<f64> {
    if modes == 0 {
        return Err(domain("modes", 0.0, "[1, inf)"));
    }
    let eta_arm = channel_transmittance(arm_km, ch.l_att_km)? * ch.eta_d;
    loading_from_arm(eta_arm, modes as f64, ch)
}

fn multiplexed(
    total_km: f64,
    src: &SourceParams,
    mem: &MemoryParams,
    ch: &ChannelParams,
    cfg: &ProtocolConfig,
    modes: f64,
    slots: f64,
) -> Result<RatePoint> {
    let arms = arm_transmittance(total_km, ch)?;
    let mut point = multiplexed_from_arms(total_km, arms, src, mem, ch, cfg, modes, slots)?;
    point.diagnostics.dark_floor =
        multiplexed_from_arms(total_km, (0.0, 0.0), src, mem, ch, cfg, modes, slots)?.y11_qm;
    Ok(point)
}

#[allow(clippy::too_many_arguments)]
fn multiplexed_from_arms(
    total_km: f64,
    (arm_a, arm_b): (f64, f64),
    src: &SourceParams,
    mem: &MemoryParams,
    ch: &ChannelParams,
    cfg: &ProtocolConfig,
    modes: f64,
    slots: f64,
) -> Result<RatePoint> {
    let load_a = loading_from_arm(arm_a, modes, ch)?;
    let load_b = loading_from_arm(arm_b, modes, ch)?;
    let derate = if cfg.derate {
        mem.eta_r0 * ch.eta_f
    } else {
        1.0
    };
    let middle = (derate * load_a, derate * load_b);
    let y11_qm = src.single_photon_pair_prob() * y11_unchecked(middle.0, middle.1, ch.p_dc) / slots;
    let diagnostics = Diagnostics {
        eta_arm_a: arm_a,
        eta_arm_b: arm_b,
        eta_load_a: load_a,
        eta_load_b: load_b,
        ..Diagnostics::default()
    };
    let errors = qber(cfg, middle, ch.p_dc, None)?;
    finish(total_km, y11_qm, errors, cfg, diagnostics)
}

/// Spectral/spatial multimode protocol over `mem.m_s` modes. Requires `m_t = 1`.
pub fn multimode_rate(
    total_km: f64,
    src: &SourceParams,
    mem: &MemoryParams,
    ch: &ChannelParams,
    cfg: &ProtocolConfig,
) -> Result<RatePoint> {
    if mem.m_t != 1 {
        return Err(Error::Precondition(format!(
            "multimode rate needs m_t = 1, got {}; use the temporal variant",
            mem.m_t
        )));
    }
    mem.validate()?;
    multiplexed(total_km, src, mem, ch, cfg, mem.m_s as f64, 1.0)
}

/// Multiplexing over `m_s * m_t` modes; one middle BSM per `m_t` slots.
pub fn temporal_rate(
    total_km: f64,
    src: &SourceParams,
    mem: &MemoryParams,
    ch: &ChannelParams,
    cfg: &ProtocolConfig,
) -> Result<RatePoint> {
    mem.validate()?;
    let modes = mem.m_s as f64 * mem.m_t as f64;
    multiplexed(total_km, src, mem, ch, cfg, modes, mem.m_t as f64)
}

/// Memoryless MDI-QKD: a single mode, no readout or frequency-shift loss.
pub fn original_mdi_rate(
    total_km: f64,
    src: &SourceParams,
    ch: &ChannelParams,
    cfg: &ProtocolConfig,
) -> Result<RatePoint> {
    let mem = MemoryParams {
        eta_r0: 1.0,
        m_s: 1,
        m_t: 1,
        ..MemoryParams::default()
    };
    let ch = ChannelParams { eta_f: 1.0, ..*ch };
    multiplexed(total_km, src, &mem, &ch, cfg, 1.0, 1.0)
}

/// Evaluates the formula selected by `scenario.protocol.variant`.
pub fn evaluate(total_km: f64, scenario: &Scenario) -> Result<RatePoint> {
    let Scenario {
        channel,
        source,
        memory,
        protocol,
    } = scenario;
    match protocol.variant {
        Variant::Original => original_mdi_rate(total_km, source, channel, protocol),
        Variant::OnDemand => ondemand_rate(total_km, source, memory, channel, protocol),
        Variant::Multimode => multimode_rate(total_km, source, memory, channel, protocol),
        Variant::Temporal => temporal_rate(total_km, source, memory, channel, protocol),
    }
}
