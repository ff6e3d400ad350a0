//! Linear-optics Bell state measurement with threshold detectors.

use serde::{Deserialize, Serialize};

use crate::error::{check_prob, Result};
use crate::params::ChannelParams;

/// Arm transmittances seen by one BSM, plus the detector dark-count probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BsmArms {
    pub eta_a: f64,
    pub eta_b: f64,
    pub p_dc: f64,
}

impl BsmArms {
    pub fn new(eta_a: f64, eta_b: f64, p_dc: f64) -> Result<Self> {
        check_prob("eta_a", eta_a)?;
        check_prob("eta_b", eta_b)?;
        check_prob("p_dc", p_dc)?;
        Ok(Self { eta_a, eta_b, p_dc })
    }

    pub fn success_prob(&self) -> f64 {
        y11_unchecked(self.eta_a, self.eta_b, self.p_dc)
    }
}

/// Probability of a heralding two-detector coincidence when each arm carries
/// one photon that survives with probability `eta_a` / `eta_b`.
///
/// The `eta_a * eta_b / 2` term caps the photonic contribution at the 50%
/// linear-optics limit; the remaining terms are coincidences involving one or
/// two dark counts.
pub fn y11(eta_a: f64, eta_b: f64, p_dc: f64) -> Result<f64> {
    BsmArms::new(eta_a, eta_b, p_dc).map(|arms| arms.success_prob())
}

pub(crate) fn y11_unchecked(eta_a: f64, eta_b: f64, p_dc: f64) -> f64 {
    // Products are formed pairwise so that swapping the arms is exact.
    let both = eta_a * eta_b;
    let neither = (1.0 - eta_a) * (1.0 - eta_b);
    let quiet = (1.0 - p_dc) * (1.0 - p_dc);
    let photons = both / 2.0;
    let one_dark = (2.0 * (eta_a + eta_b) - 3.0 * both) * p_dc;
    let two_dark = 4.0 * neither * p_dc * p_dc;
    quiet * (photons + one_dark + two_dark)
}

/// Share of `y11` produced by dark counts rather than by two photons.
pub(crate) fn dark_fraction(eta_a: f64, eta_b: f64, p_dc: f64) -> f64 {
    let total = y11_unchecked(eta_a, eta_b, p_dc);
    if total <= 0.0 {
        return 0.0;
    }
    let clean = y11_unchecked(eta_a, eta_b, 0.0);
    ((total - clean) / total).clamp(0.0, 1.0)
}

/// Success probability of the central BSM.
pub fn middle_bsm_prob(eta_a: f64, eta_b: f64, ch: &ChannelParams) -> Result<f64> {
    y11(eta_a, eta_b, ch.p_dc)
}

/// Success probability of the side BSM heralding a memory load: the user photon
/// (`eta_k`) interferes with the entangled-source photon (`eta_ent * eta_d`).
pub fn side_bsm_prob(eta_k: f64, ch: &ChannelParams) -> Result<f64> {
    y11(eta_k, ch.eta_ent * ch.eta_d, ch.p_dc)
}
