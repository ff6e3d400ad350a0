//! Dimensionless building blocks shared by every rate model.

use crate::error::{check_nonneg, check_positive, check_prob, domain, Error, Result};

/// Fiber transmittance `exp(-distance / l_att)`.
pub fn channel_transmittance(distance_km: f64, l_att_km: f64) -> Result<f64> {
    check_nonneg("distance_km", distance_km)?;
    check_positive("l_att_km", l_att_km)?;
    Ok((-distance_km / l_att_km).exp())
}

/// Shannon binary entropy in bits, with `0 log 0 = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    check_prob("p", p)?;
    if p == 0.0 || p == 1.0 {
        return Ok(0.0);
    }
    Ok(-p * p.log2() - (1.0 - p) * (1.0 - p).log2())
}

/// Repeaterless secret-key capacity `-log2(1 - eta_ch)` in bits per pulse.
pub fn plob_bound(eta_ch: f64) -> Result<f64> {
    if eta_ch == 1.0 {
        return Err(Error::InfiniteCapacity);
    }
    if !(0.0..1.0).contains(&eta_ch) {
        return Err(domain("eta_ch", eta_ch, "[0, 1)"));
    }
    // ln_1p keeps the small-eta regime accurate.
    Ok(-(-eta_ch).ln_1p() / std::f64::consts::LN_2)
}

/// The linearized bound `eta_ch / ln 2` summed over `modes` independent channels.
pub fn plob_per_mode(eta_ch: f64, modes: u64) -> f64 {
    modes as f64 * eta_ch / std::f64::consts::LN_2
}

/// Phase-flip weight of the memory dephasing channel after storing for `t`.
///
/// A qubit stored for time `t` becomes `(1 - w) rho + w Z rho Z` with
/// `w = (1 - exp(-t / t2)) / 2`.
pub fn dephasing_weight(t: f64, t2: f64) -> Result<f64> {
    check_nonneg("t", t)?;
    check_positive("t2", t2)?;
    Ok(-(-t / t2).exp_m1() / 2.0)
}

/// Flips a bit error rate through a symmetric channel with flip probability `weight`.
pub fn mix_error(e: f64, weight: f64) -> f64 {
    e * (1.0 - weight) + (1.0 - e) * weight
}
