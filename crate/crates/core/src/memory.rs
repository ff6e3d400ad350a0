//! Expectations of the asynchronous memory-loading process.
//!
//! Each memory is loaded after a geometric number of rounds `N_A`, `N_B`
//! (counting from 1) with per-round success `eta_a`, `eta_b`. The memory that
//! loads first waits `|N_A - N_B|` rounds for its partner and decays as
//! `exp(-t / T2)` in the meantime.

use serde::{Deserialize, Serialize};

use crate::error::{check_nonneg, check_positive, check_prob, domain, Error, Result};
use crate::params::{ChannelParams, MemoryParams};

/// Analytic loading statistics for a pair of memories.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadingStats {
    /// `E|N_A - N_B|` in rounds.
    pub mean_abs_delta_n: f64,
    /// `E max(N_A, N_B)` in rounds.
    pub mean_attempts: f64,
    /// `E exp(-|N_A - N_B| tau / T2)`.
    pub mean_decay: f64,
}

impl LoadingStats {
    pub fn new(eta_a: f64, eta_b: f64, tau_over_t2: f64) -> Result<Self> {
        Ok(Self {
            mean_abs_delta_n: expected_abs_delta(eta_a, eta_b)?,
            mean_attempts: expected_loading_attempts(eta_a, eta_b)?,
            mean_decay: expected_decay(eta_a, eta_b, tau_over_t2)?,
        })
    }
}

fn check_loading(name: &'static str, eta: f64) -> Result<f64> {
    check_prob(name, eta)?;
    if eta == 0.0 {
        return Err(Error::Divergence(name));
    }
    Ok(eta)
}

/// Readout efficiency after storing for `t` seconds.
pub fn read_efficiency(t: f64, mem: &MemoryParams) -> Result<f64> {
    check_nonneg("t", t)?;
    Ok(mem.eta_r0 * (-t / mem.t2_s).exp())
}

/// Expected rounds until both memories hold a photon, `E max(N_A, N_B)`.
pub fn expected_loading_attempts(eta_a: f64, eta_b: f64) -> Result<f64> {
    let a = check_loading("eta_a", eta_a)?;
    let b = check_loading("eta_b", eta_b)?;
    let either = a + b - a * b;
    Ok(1.0 / a + 1.0 / b - 1.0 / either)
}

/// `E|N_A - N_B|`: the rounds the early memory spends waiting.
pub fn expected_abs_delta(eta_a: f64, eta_b: f64) -> Result<f64> {
    let a = check_loading("eta_a", eta_a)?;
    let b = check_loading("eta_b", eta_b)?;
    let either = a + b - a * b;
    // E max - E min, rearranged so that eta = 1 gives exactly zero.
    Ok((1.0 - a) / a + (1.0 - b) / b - 2.0 * (1.0 - a) * (1.0 - b) / either)
}

/// Mean storage time for symmetric loading efficiency `eta`.
pub fn expected_storage_time(eta: f64, tau: f64) -> Result<f64> {
    check_positive("tau", tau)?;
    let eta = check_loading("eta", eta)?;
    Ok(2.0 * (1.0 - eta) * tau / (eta * (2.0 - eta)))
}

/// `E exp(-|N_A - N_B| tau / T2)` in closed form.
pub fn expected_decay(eta_a: f64, eta_b: f64, tau_over_t2: f64) -> Result<f64> {
    check_nonneg("tau_over_t2", tau_over_t2)?;
    let a = check_prob("eta_a", eta_a)?;
    let b = check_prob("eta_b", eta_b)?;
    if a == 0.0 && b == 0.0 {
        return Err(domain("eta_a + eta_b", 0.0, "(0, 2]"));
    }
    let q = (-tau_over_t2).exp();
    let either = a + b - a * b;
    let bracket = 1.0 / (1.0 - q * (1.0 - a)) + 1.0 / (1.0 - q * (1.0 - b)) - 1.0;
    Ok((a * b / either * bracket).min(1.0))
}

/// Mean efficiency of the early memory: readout after waiting, then detection.
pub fn expected_eta_early(
    eta_a: f64,
    eta_b: f64,
    mem: &MemoryParams,
    ch: &ChannelParams,
) -> Result<f64> {
    let decay = expected_decay(eta_a, eta_b, mem.tau_over_t2())?;
    Ok(ch.eta_d * mem.eta_r0 * decay)
}

/// Efficiency of the late memory, read out immediately.
pub fn eta_late(mem: &MemoryParams, ch: &ChannelParams) -> f64 {
    mem.eta_r0 * ch.eta_d
}
