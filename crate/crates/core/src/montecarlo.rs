//! Seeded Monte Carlo simulation of the loading and heralding process.
//!
//! This is the stochastic oracle for the closed forms in [`crate::memory`] and
//! [`crate::protocols`]. Trials are split into `workers` contiguous batches;
//! batch `w` draws from ChaCha8 stream `w` of the configured seed, and batch
//! statistics are merged in worker order, so a fixed `(seed, workers,
//! n_trials)` gives bit-identical results regardless of thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_nonneg, check_prob, domain, Error, Result};
use crate::params::{Scenario, SourceParams, Variant};
use crate::primitives::{channel_transmittance, plob_bound, plob_per_mode};
use crate::protocols::{arm_transmittance, evaluate};

/// Geometric waits longer than this many rounds are truncated and counted.
pub const MAX_ROUNDS: u64 = 1_000_000_000;

/// Above this many modes per arm, heralds are drawn by skipping straight to
/// the first successful mode instead of simulating each mode.
const DIRECT_MODE_LIMIT: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub n_trials: u64,
    pub seed: u64,
    #[serde(default = "McConfig::default_workers")]
    pub workers: usize,
}

impl McConfig {
    fn default_workers() -> usize {
        1
    }

    pub fn new(n_trials: u64, seed: u64) -> Self {
        Self {
            n_trials,
            seed,
            workers: 1,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(domain("mc.n_trials", 0.0, "[1, inf)"));
        }
        if self.workers == 0 {
            return Err(domain("mc.workers", 0.0, "[1, inf)"));
        }
        Ok(())
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub n: u64,
}

impl McEstimate {
    /// Standardized distance of `analytic` from the estimate. Zero when both
    /// agree exactly, infinite when a zero-variance estimate disagrees.
    pub fn z_score(&self, analytic: f64) -> f64 {
        let diff = self.mean - analytic;
        if diff == 0.0 {
            0.0
        } else if self.std_err == 0.0 {
            f64::INFINITY.copysign(diff)
        } else {
            diff / self.std_err
        }
    }
}

/// Welford accumulator; `merge` is Chan's pairwise update.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        self.n = n;
    }

    fn estimate(&self) -> McEstimate {
        let std_err = if self.n > 1 {
            (self.m2.max(0.0) / (self.n - 1) as f64 / self.n as f64).sqrt()
        } else {
            0.0
        };
        McEstimate {
            mean: self.mean,
            std_err,
            n: self.n,
        }
    }
}

struct Batch<const K: usize> {
    moments: [Moments; K],
    truncated: u64,
}

/// Runs `trial` `mc.n_trials` times and aggregates each of its `K` outputs.
/// The trial returns its samples and whether any wait was truncated.
fn run<const K: usize, F>(mc: &McConfig, trial: F) -> Result<([McEstimate; K], u64)>
where
    F: Fn(&mut ChaCha8Rng) -> ([f64; K], bool) + Sync,
{
    mc.validate()?;
    let workers = mc.workers as u64;
    let batch = |w: u64| {
        let size = mc.n_trials / workers + u64::from(w < mc.n_trials % workers);
        let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
        rng.set_stream(w);
        let mut out = Batch {
            moments: [Moments::default(); K],
            truncated: 0,
        };
        for _ in 0..size {
            let (values, truncated) = trial(&mut rng);
            for (m, v) in out.moments.iter_mut().zip(values) {
                m.push(v);
            }
            out.truncated += u64::from(truncated);
        }
        out
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(mc.workers)
        .build()
        .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?;
    let batches: Vec<Batch<K>> = pool.install(|| (0..workers).into_par_iter().map(batch).collect());

    let mut total = [Moments::default(); K];
    let mut truncated = 0;
    for b in &batches {
        for (t, m) in total.iter_mut().zip(&b.moments) {
            t.merge(m);
        }
        truncated += b.truncated;
    }
    Ok((total.map(|m| m.estimate()), truncated))
}

/// Rounds until success, counting the successful round; capped at [`MAX_ROUNDS`].
fn rounds_until_success(rng: &mut ChaCha8Rng, dist: &Geometric) -> (u64, bool) {
    let n = dist.sample(rng).saturating_add(1);
    if n > MAX_ROUNDS {
        (MAX_ROUNDS, true)
    } else {
        (n, false)
    }
}

/// Monte Carlo estimates of the loading statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadingEstimate {
    /// `E|N_A - N_B|`.
    pub abs_delta: McEstimate,
    /// `E max(N_A, N_B)`.
    pub attempts: McEstimate,
    /// `E exp(-|N_A - N_B| tau / T2)`.
    pub decay: McEstimate,
    /// Trials in which a wait hit [`MAX_ROUNDS`].
    pub truncated: u64,
}

/// Draws independent geometric loading rounds for both memories.
pub fn simulate_loading(
    eta_a: f64,
    eta_b: f64,
    tau_over_t2: f64,
    mc: &McConfig,
) -> Result<LoadingEstimate> {
    for (name, eta) in [("eta_a", eta_a), ("eta_b", eta_b)] {
        check_prob(name, eta)?;
        if eta == 0.0 {
            return Err(domain(name, eta, "(0, 1]"));
        }
    }
    check_nonneg("tau_over_t2", tau_over_t2)?;
    let geo_a = Geometric::new(eta_a).map_err(|_| domain("eta_a", eta_a, "(0, 1]"))?;
    let geo_b = Geometric::new(eta_b).map_err(|_| domain("eta_b", eta_b, "(0, 1]"))?;

    let ([abs_delta, attempts, decay], truncated) = run(mc, |rng| {
        let (n_a, cut_a) = rounds_until_success(rng, &geo_a);
        let (n_b, cut_b) = rounds_until_success(rng, &geo_b);
        let gap = n_a.abs_diff(n_b) as f64;
        (
            [gap, n_a.max(n_b) as f64, (-gap * tau_over_t2).exp()],
            cut_a || cut_b,
        )
    })?;
    Ok(LoadingEstimate {
        abs_delta,
        attempts,
        decay,
        truncated,
    })
}

/// Success probability of one linear-optics BSM attempt given which inputs
/// actually carry a photon. Averaging over photon presence reproduces `y11`.
fn bsm_success_given(photons: u8, p_dc: f64) -> f64 {
    let quiet = (1.0 - p_dc) * (1.0 - p_dc);
    match photons {
        2 => quiet * (0.5 + p_dc),
        1 => quiet * 2.0 * p_dc,
        _ => quiet * 4.0 * p_dc * p_dc,
    }
}

/// One BSM attempt: each input is present with its own probability.
fn bsm_attempt(rng: &mut ChaCha8Rng, eta_a: f64, eta_b: f64, p_dc: f64) -> bool {
    let photons = u8::from(rng.random::<f64>() < eta_a) + u8::from(rng.random::<f64>() < eta_b);
    rng.random::<f64>() < bsm_success_given(photons, p_dc)
}

/// Per-mode herald probability, summed over photon-presence patterns.
fn mode_herald_prob(eta_user: f64, eta_source: f64, p_dc: f64) -> f64 {
    let both = eta_user * eta_source;
    let one = eta_user * (1.0 - eta_source) + (1.0 - eta_user) * eta_source;
    let none = (1.0 - eta_user) * (1.0 - eta_source);
    both * bsm_success_given(2, p_dc) + one * bsm_success_given(1, p_dc) + none * bsm_success_given(0, p_dc)
}

/// How one arm's side BSM is sampled across its modes.
struct Herald {
    eta_user: f64,
    eta_source: f64,
    p_dc: f64,
    modes: u64,
    skip: Option<Geometric>,
}

impl Herald {
    fn new(eta_user: f64, eta_source: f64, p_dc: f64, modes: u64) -> Result<Self> {
        let skip = if modes > DIRECT_MODE_LIMIT {
            let p = mode_herald_prob(eta_user, eta_source, p_dc);
            Some(Geometric::new(p).map_err(|_| domain("mode herald probability", p, "[0, 1]"))?)
        } else {
            None
        };
        Ok(Self {
            eta_user,
            eta_source,
            p_dc,
            modes,
            skip,
        })
    }

    /// Whether any mode heralds a load this round.
    fn sample(&self, rng: &mut ChaCha8Rng) -> bool {
        match &self.skip {
            Some(geo) => geo.sample(rng) < self.modes,
            None => (0..self.modes)
                .any(|_| bsm_attempt(rng, self.eta_user, self.eta_source, self.p_dc)),
        }
    }
}

fn single_photon(rng: &mut ChaCha8Rng, source: Option<&Poisson<f64>>) -> bool {
    source.is_some_and(|d| d.sample(rng) == 1.0)
}

fn poisson(mean: f64) -> Option<Poisson<f64>> {
    (mean > 0.0).then(|| Poisson::new(mean).ok()).flatten()
}

/// Monte Carlo estimate of the multiplexed raw-bit yield `Y11_QM`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultimodeEstimate {
    pub y11_qm: McEstimate,
    /// Fraction of rounds with both memories heralded.
    pub both_loaded: McEstimate,
}

/// Simulates rounds of the multiplexed protocols.
///
/// Each round draws Poissonian photon numbers for both users; only
/// single-photon rounds contribute. Each arm then attempts its side BSM on
/// `m_s * m_t` modes until one heralds. A heralded photon reaches the middle
/// BSM after readout and frequency shifting, and the middle BSM is sampled
/// from its photon-presence pattern. Successes are divided by the `m_t` slots
/// a round occupies.
pub fn simulate_multimode_round(
    total_km: f64,
    scenario: &Scenario,
    mc: &McConfig,
) -> Result<MultimodeEstimate> {
    scenario.validate()?;
    let Scenario {
        channel: ch,
        source,
        memory: mem,
        protocol: cfg,
    } = scenario;
    let (modes, slots, derate) = match cfg.variant {
        Variant::Original => (1, 1, 1.0),
        Variant::Multimode if mem.m_t != 1 => {
            return Err(Error::Precondition(format!(
                "multimode simulation needs m_t = 1, got {}",
                mem.m_t
            )))
        }
        Variant::Multimode | Variant::Temporal => (
            mem.m_s.saturating_mul(mem.m_t),
            mem.m_t,
            if cfg.derate { mem.eta_r0 * ch.eta_f } else { 1.0 },
        ),
        Variant::OnDemand => {
            return Err(Error::Precondition(
                "on-demand loading is simulated by simulate_loading".into(),
            ))
        }
    };
    let (arm_a, arm_b) = arm_transmittance(total_km, ch)?;
    let eta_source = ch.eta_ent * ch.eta_d;
    let herald_a = Herald::new(arm_a, eta_source, ch.p_dc, modes)?;
    let herald_b = Herald::new(arm_b, eta_source, ch.p_dc, modes)?;
    let SourceParams { mu, nu } = *source;
    let (wcp_a, wcp_b) = (poisson(mu), poisson(nu));
    let slots = slots as f64;

    let ([y11_qm, both_loaded], _) = run(mc, |rng| {
        if !(single_photon(rng, wcp_a.as_ref()) & single_photon(rng, wcp_b.as_ref())) {
            return ([0.0, 0.0], false);
        }
        let loaded_a = herald_a.sample(rng);
        let loaded_b = herald_b.sample(rng);
        let present_a = if loaded_a { derate } else { 0.0 };
        let present_b = if loaded_b { derate } else { 0.0 };
        let success = bsm_attempt(rng, present_a, present_b, ch.p_dc);
        (
            [
                f64::from(u8::from(success)) / slots,
                f64::from(u8::from(loaded_a && loaded_b)),
            ],
            false,
        )
    })?;
    Ok(MultimodeEstimate {
        y11_qm,
        both_loaded,
    })
}

/// A simulated rate point: the analytic record's columns plus the sampling error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McRatePoint {
    pub km: f64,
    pub rate: f64,
    pub y11_qm: f64,
    pub e_x: f64,
    pub e_z: f64,
    pub plob_single: f64,
    pub plob_per_mode: f64,
    pub std_err: f64,
    pub n: u64,
}

/// Simulated yield combined with the analytic secret fraction at the same point.
pub fn mc_rate_point(total_km: f64, scenario: &Scenario, mc: &McConfig) -> Result<McRatePoint> {
    let analytic = evaluate(total_km, scenario)?;
    let sim = simulate_multimode_round(total_km, scenario, mc)?;
    let fraction = if analytic.y11_qm > 0.0 {
        analytic.rate / analytic.y11_qm
    } else {
        0.0
    };
    let eta_ch = channel_transmittance(total_km, scenario.channel.l_att_km)?;
    Ok(McRatePoint {
        km: total_km,
        rate: sim.y11_qm.mean * fraction,
        y11_qm: sim.y11_qm.mean,
        e_x: analytic.e_x,
        e_z: analytic.e_z,
        plob_single: plob_bound(eta_ch).unwrap_or(f64::INFINITY),
        plob_per_mode: plob_per_mode(eta_ch, scenario.memory.m_s),
        std_err: sim.y11_qm.std_err,
        n: sim.y11_qm.n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bsm::y11;
    use crate::memory::{expected_abs_delta, expected_decay, expected_loading_attempts};
    use crate::params::{ChannelParams, QberMode};

    fn within_3_sigma(est: &McEstimate, analytic: f64) -> bool {
        est.z_score(analytic).abs() <= 3.0
    }

    #[test]
    fn presence_patterns_reproduce_y11() {
        for &(a, b, p) in &[(0.0, 0.0, 1e-3), (0.3, 0.7, 1e-8), (1.0, 0.2, 0.05), (0.9, 0.8, 0.3)] {
            let direct = y11(a, b, p).unwrap();
            let summed = mode_herald_prob(a, b, p);
            assert!((direct - summed).abs() <= 1e-15, "{a} {b} {p}");
        }
    }

    #[test]
    fn certain_loading_is_deterministic() {
        let est = simulate_loading(1.0, 1.0, 0.3, &McConfig::new(10_000, 5)).unwrap();
        assert_eq!((est.abs_delta.mean, est.abs_delta.std_err), (0.0, 0.0));
        assert_eq!((est.attempts.mean, est.attempts.std_err), (1.0, 0.0));
        assert_eq!((est.decay.mean, est.decay.std_err), (1.0, 0.0));
        assert_eq!(est.abs_delta.z_score(0.0), 0.0);
    }

    #[test]
    fn loading_matches_closed_forms() {
        let mc = McConfig::new(1_000_000, 42).with_workers(4);
        let est = simulate_loading(0.5, 0.5, 0.1, &mc).unwrap();
        assert!(within_3_sigma(&est.abs_delta, 2.0 * 0.5 / (0.5 * 1.5)));
        let est = simulate_loading(0.1, 0.1, 0.1, &mc).unwrap();
        assert!(within_3_sigma(&est.decay, expected_decay(0.1, 0.1, 0.1).unwrap()));
        let est = simulate_loading(0.01, 0.02, 0.05, &McConfig::new(2_000_000, 9)).unwrap();
        assert!(within_3_sigma(
            &est.attempts,
            expected_loading_attempts(0.01, 0.02).unwrap()
        ));
        assert!(within_3_sigma(&est.abs_delta, expected_abs_delta(0.01, 0.02).unwrap()));
        assert_eq!(est.truncated, 0);
    }

    #[test]
    fn rejects_zero_efficiency() {
        assert!(simulate_loading(0.0, 0.5, 0.1, &McConfig::new(10, 1)).is_err());
        assert!(simulate_loading(0.5, 0.5, 0.1, &McConfig::new(0, 1)).is_err());
        assert!(simulate_loading(0.5, 0.5, 0.1, &McConfig::new(10, 1).with_workers(0)).is_err());
    }

    #[test]
    fn identical_config_is_bit_identical() {
        let mc = McConfig::new(50_000, 1234).with_workers(3);
        let a = simulate_loading(0.2, 0.3, 0.05, &mc).unwrap();
        let b = simulate_loading(0.2, 0.3, 0.05, &mc).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let other = simulate_loading(0.2, 0.3, 0.05, &McConfig::new(50_000, 1235).with_workers(3))
            .unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn std_err_shrinks_like_root_n() {
        let small = simulate_loading(0.1, 0.1, 0.1, &McConfig::new(200_000, 77)).unwrap();
        let large = simulate_loading(0.1, 0.1, 0.1, &McConfig::new(400_000, 78)).unwrap();
        let ratio = small.abs_delta.std_err / large.abs_delta.std_err;
        assert!((ratio / 2f64.sqrt() - 1.0).abs() <= 0.1, "ratio {ratio}");
    }

    #[test]
    fn ideal_single_mode_round() {
        let mut s = Scenario::new(Variant::Multimode);
        s.channel = ChannelParams::ideal();
        s.protocol = s.protocol.with_qber(QberMode::Ideal);
        let est = simulate_multimode_round(0.0, &s, &McConfig::new(1_000_000, 3)).unwrap();
        assert!(within_3_sigma(&est.y11_qm, 0.016_916_910_404_576_586));
    }

    #[test]
    fn quadratic_mode_gain() {
        // Lossless devices with a per-mode herald probability of exactly 1%:
        // the arm transmittance is 0.02 and the side BSM halves it.
        let mut base = Scenario::new(Variant::Multimode);
        base.channel = ChannelParams::ideal();
        base.protocol = base.protocol.with_qber(QberMode::Ideal);
        let km = 2.0 * base.channel.l_att_km * 50f64.ln();
        let one = evaluate(km, &base).unwrap();
        assert!((one.diagnostics.eta_load_a - 0.01).abs() < 1e-12);

        let analytic = evaluate(km, &base.with_modes(10, 1)).unwrap().y11_qm / one.y11_qm;
        assert!((analytic / 100.0 - 1.0).abs() <= 0.2);

        let mc = McConfig::new(50_000_000, 8);
        let single = simulate_multimode_round(km, &base, &mc).unwrap().y11_qm;
        let ten = simulate_multimode_round(km, &base.with_modes(10, 1), &mc).unwrap().y11_qm;
        let ratio = ten.mean / single.mean;
        let rel = ((ten.std_err / ten.mean).powi(2) + (single.std_err / single.mean).powi(2)).sqrt();
        assert!((ratio / 100.0 - 1.0).abs() <= 0.2, "ratio {ratio}");
        assert!((ratio - analytic).abs() <= 3.0 * rel * ratio, "ratio {ratio} vs {analytic}");
    }

    #[test]
    fn skipping_matches_direct_sampling() {
        // Same scenario on either side of the direct-sampling limit.
        let base = Scenario::new(Variant::Multimode);
        let mc = McConfig::new(400_000, 21);
        for m in [DIRECT_MODE_LIMIT, DIRECT_MODE_LIMIT + 1] {
            let s = base.with_modes(m, 1);
            let est = simulate_multimode_round(150.0, &s, &mc).unwrap();
            let analytic = evaluate(150.0, &s).unwrap().y11_qm;
            assert!(within_3_sigma(&est.y11_qm, analytic), "m = {m}");
        }
    }

    #[test]
    fn temporal_round_matches_formula() {
        let s = Scenario::new(Variant::Temporal).with_modes(2, 50);
        let est = simulate_multimode_round(200.0, &s, &McConfig::new(2_000_000, 4)).unwrap();
        let analytic = evaluate(200.0, &s).unwrap().y11_qm;
        assert!(within_3_sigma(&est.y11_qm, analytic));
    }

    #[test]
    fn ondemand_has_no_round_simulation() {
        let s = Scenario::new(Variant::OnDemand);
        assert!(simulate_multimode_round(10.0, &s, &McConfig::new(10, 1)).is_err());
    }
}
