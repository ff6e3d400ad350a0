//! Sweeps, scaling fits, crossover search and parameter optimization.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_nonneg, Error, Result};
use crate::params::{Scenario, Variant};
use crate::primitives::{channel_transmittance, plob_bound, plob_per_mode};
use crate::protocols::{evaluate, RatePoint};

/// A rate-vs-distance curve evaluated with one fixed scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCurve {
    pub variant: Variant,
    pub scenario: Scenario,
    pub points: Vec<RatePoint>,
}

/// `l_min, l_min + step, ...` up to `l_max` (inclusive, with rounding slack).
pub fn distance_grid(l_min_km: f64, l_max_km: f64, step_km: f64) -> Result<Vec<f64>> {
    check_nonneg("l_min_km", l_min_km)?;
    if !(step_km > 0.0 && step_km.is_finite()) {
        return Err(Error::Grid(format!("step must be positive, got {step_km}")));
    }
    if !(l_max_km >= l_min_km && l_max_km.is_finite()) {
        return Err(Error::Grid(format!(
            "empty range [{l_min_km}, {l_max_km}]"
        )));
    }
    let count = ((l_max_km - l_min_km) / step_km + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| l_min_km + i as f64 * step_km).collect())
}

/// Evaluates the scenario's variant at each grid distance, in grid order.
pub fn sweep_distance(
    scenario: &Scenario,
    l_min_km: f64,
    l_max_km: f64,
    step_km: f64,
) -> Result<RateCurve> {
    let grid = distance_grid(l_min_km, l_max_km, step_km)?;
    sweep_distances(scenario, &grid)
}

pub fn sweep_distances(scenario: &Scenario, distances: &[f64]) -> Result<RateCurve> {
    if distances.is_empty() {
        return Err(Error::Grid("no distances".into()));
    }
    if distances.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Grid("distances must be strictly increasing".into()));
    }
    scenario.validate()?;
    let points = distances
        .par_iter()
        .map(|&km| evaluate(km, scenario))
        .collect::<Result<Vec<_>>>()?;
    Ok(RateCurve {
        variant: scenario.protocol.variant,
        scenario: *scenario,
        points,
    })
}

/// Independent variable of a scaling fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XAxis {
    /// Semi-log fit: `ln(rate)` against distance in km.
    Distance,
    /// Log-log fit against the end-to-end transmittance `exp(-L / L_att)`.
    EtaCh,
    ModesS,
    ModesT,
}

/// Rate points keyed by the value of one axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub axis: XAxis,
    pub points: Vec<(f64, RatePoint)>,
}

impl RateCurve {
    /// Keys the curve by distance or by channel transmittance.
    pub fn series(&self, axis: XAxis) -> Result<Series> {
        let l_att = self.scenario.channel.l_att_km;
        let points = self
            .points
            .iter()
            .map(|p| {
                let x = match axis {
                    XAxis::Distance => p.distance_km,
                    XAxis::EtaCh => channel_transmittance(p.distance_km, l_att)?,
                    XAxis::ModesS | XAxis::ModesT => {
                        return Err(Error::Precondition(
                            "a distance curve has no mode axis".into(),
                        ))
                    }
                };
                Ok((x, *p))
            })
            .collect::<Result<_>>()?;
        Ok(Series { axis, points })
    }
}

/// Rates at one distance for a list of spectral (`ModesS`) or temporal
/// (`ModesT`) mode counts. `ModesS` evaluates the multimode formula with
/// `m_t = 1`; `ModesT` keeps the scenario's `m_s` and evaluates the temporal one.
pub fn mode_series(
    distance_km: f64,
    scenario: &Scenario,
    axis: XAxis,
    modes: &[u64],
) -> Result<Series> {
    let points = modes
        .par_iter()
        .map(|&m| {
            let mut s = *scenario;
            match axis {
                XAxis::ModesS => {
                    s.protocol.variant = Variant::Multimode;
                    s = s.with_modes(m, 1);
                }
                XAxis::ModesT => {
                    s.protocol.variant = Variant::Temporal;
                    s = s.with_modes(scenario.memory.m_s, m);
                }
                _ => return Err(Error::Precondition("mode series needs a mode axis".into())),
            }
            Ok((m as f64, evaluate(distance_km, &s)?))
        })
        .collect::<Result<_>>()?;
    Ok(Series { axis, points })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub std_err: f64,
    pub intercept: f64,
    pub n: usize,
}

/// Ordinary least squares of `y` on `x`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    let n = xs.len().min(ys.len());
    if n < 3 {
        return Err(Error::InsufficientPoints(n));
    }
    let nf = n as f64;
    let mx = xs[..n].iter().sum::<f64>() / nf;
    let my = ys[..n].iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::InsufficientPoints(1));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let std_err = (rss / (nf - 2.0) / sxx).sqrt();
    Ok(FitResult {
        slope,
        std_err,
        intercept,
        n,
    })
}

/// Exponent `k` of `y = c x^k`, fitted in log-log space over positive points.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .unzip();
    least_squares(&lx, &ly)
}

/// Scaling exponent of the rate along the series axis.
///
/// Only points inside `window` (axis units, inclusive) whose rate exceeds ten
/// times their dark-count floor are used, which keeps plateaus and cutoffs out
/// of the fit. Distance series are fitted semi-logarithmically.
pub fn fit_loglog_slope(series: &Series, window: Option<(f64, f64)>) -> Result<FitResult> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = series
        .points
        .iter()
        .filter(|(x, _)| window.is_none_or(|(lo, hi)| (lo..=hi).contains(x)))
        .filter(|(_, p)| p.rate > 0.0 && p.rate > 10.0 * p.diagnostics.dark_floor)
        .map(|(x, p)| (*x, p.rate))
        .unzip();
    match series.axis {
        XAxis::Distance => {
            let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
            least_squares(&xs, &ly)
        }
        _ => fit_power_law(&xs, &ys),
    }
}

/// Reference the multimode rate must beat for a crossover.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    /// `-log2(1 - eta_ch)`, one repeaterless channel.
    PlobSingle,
    /// `m_s * eta_ch / ln 2`, one repeaterless channel per mode.
    PlobPerMode,
}

impl BaselineKind {
    pub fn value(self, eta_ch: f64, modes: u64) -> f64 {
        match self {
            BaselineKind::PlobSingle => plob_bound(eta_ch).unwrap_or(f64::INFINITY),
            BaselineKind::PlobPerMode => plob_per_mode(eta_ch, modes),
        }
    }
}

impl std::str::FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "plob_single" | "single" => Ok(BaselineKind::PlobSingle),
            "plob_per_mode" | "per_mode" => Ok(BaselineKind::PlobPerMode),
            other => Err(Error::Precondition(format!("unknown baseline `{other}`"))),
        }
    }
}

/// Default upper limit on the mode count searched for a crossover.
pub const DEFAULT_MODE_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossoverResult {
    pub distance_km: f64,
    /// Smallest `m_s` beating the baseline; `None` when no `m_s <= cap` does.
    pub m_star: Option<u64>,
    pub baseline_kind: BaselineKind,
}

/// Log-spaced integers in `[1, cap]`, about a hundred per decade.
fn log_grid(cap: u64) -> Vec<u64> {
    let mut grid = vec![1u64];
    let mut k = 1;
    loop {
        let m = 10f64.powf(k as f64 / 100.0).round() as u64;
        if m >= cap {
            break;
        }
        if m > *grid.last().unwrap() {
            grid.push(m);
        }
        k += 1;
    }
    if cap > 1 {
        grid.push(cap);
    }
    grid
}

/// Largest value of a unimodal integer function on `[lo, hi]`, ties to the left.
fn integer_argmax(lo: u64, hi: u64, f: impl Fn(u64) -> f64) -> u64 {
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > 2 {
        let third = (hi - lo) / 3;
        let (m1, m2) = (lo + third, hi - third);
        if f(m1) < f(m2) {
            lo = m1 + 1;
        } else {
            hi = m2;
        }
    }
    (lo..=hi)
        .map(|m| (m, f(m)))
        .fold((lo, f64::NEG_INFINITY), |best, (m, v)| if v > best.1 { (m, v) } else { best })
        .0
}

/// Smallest spectral mode count at which the multimode rate exceeds the
/// baseline at `distance_km`.
///
/// The rate-to-baseline ratio is unimodal in `m_s` (quadratic growth, then
/// saturation), so the search scans a log grid for the first winning point,
/// or for the ratio's peak if no grid point wins, and bisects on the rising
/// flank below it.
pub fn crossover_modes(
    distance_km: f64,
    scenario: &Scenario,
    baseline_kind: BaselineKind,
    m_cap: u64,
) -> Result<CrossoverResult> {
    if m_cap == 0 {
        return Err(Error::Precondition("m_cap must be at least 1".into()));
    }
    let mut base = *scenario;
    base.protocol.variant = Variant::Multimode;
    base.memory.m_t = 1;
    base.validate()?;
    let eta_ch = channel_transmittance(distance_km, base.channel.l_att_km)?;
    let rate = |m: u64| evaluate(distance_km, &base.with_modes(m, 1)).map(|p| p.rate);
    let ratio = |m: u64| {
        let baseline = baseline_kind.value(eta_ch, m);
        rate(m).map(|r| if baseline > 0.0 { r / baseline } else if r > 0.0 { f64::INFINITY } else { 0.0 })
    };
    let wins = |m: u64| ratio(m).map(|q| q > 1.0);
    let found = |m_star| CrossoverResult {
        distance_km,
        m_star,
        baseline_kind,
    };

    if wins(1)? {
        return Ok(found(Some(1)));
    }
    let grid = log_grid(m_cap);
    let mut ratios = Vec::with_capacity(grid.len());
    let mut bracket = None;
    for (i, &m) in grid.iter().enumerate() {
        let q = ratio(m)?;
        ratios.push(q);
        if q > 1.0 {
            bracket = Some((grid[i - 1], m));
            break;
        }
    }
    let (mut lo, mut hi) = match bracket {
        Some(b) => b,
        None => {
            let best = ratios
                .iter()
                .enumerate()
                .fold(0, |b, (i, q)| if *q > ratios[b] { i } else { b });
            let left = grid[best.saturating_sub(1)];
            let right = grid[(best + 1).min(grid.len() - 1)];
            let cache = |m: u64| ratio(m).unwrap_or(0.0);
            let peak = integer_argmax(left, right, cache);
            if !wins(peak)? {
                return Ok(found(None));
            }
            (left, peak)
        }
    };
    // The flank between a losing and a winning point must be rising.
    if ratio(lo)? >= ratio(hi)? {
        return Err(Error::Precondition(format!(
            "rate/baseline ratio is not increasing on [{lo}, {hi}]"
        )));
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if wins(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(found(Some(hi)))
}

/// Result of an intensity optimization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntensityOptimum {
    pub mu: f64,
    pub nu: f64,
    pub rate: f64,
    /// The rate vanished everywhere; `(1, 1)` is returned.
    pub flat: bool,
}

pub const MAX_INTENSITY: f64 = 4.0;

/// Maximizes the rate over `(mu, nu)` in `(0, 4]^2` on a 0.05 grid followed
/// by a shrinking pattern search.
pub fn optimize_intensities(distance_km: f64, scenario: &Scenario) -> Result<IntensityOptimum> {
    optimize_intensities_with(distance_km, scenario, 0.05)
}

pub fn optimize_intensities_with(
    distance_km: f64,
    scenario: &Scenario,
    grid_step: f64,
) -> Result<IntensityOptimum> {
    if !(grid_step > 0.0 && grid_step <= 1.0) {
        return Err(Error::Grid(format!("grid step must be in (0, 1], got {grid_step}")));
    }
    scenario.validate()?;
    let rate = |mu: f64, nu: f64| {
        let mut s = *scenario;
        s.source.mu = mu;
        s.source.nu = nu;
        evaluate(distance_km, &s).map(|p| p.rate)
    };
    let steps = (MAX_INTENSITY / grid_step).round() as usize;
    let axis: Vec<f64> = (1..=steps).map(|i| i as f64 * grid_step).collect();
    let candidates: Vec<(f64, f64)> = axis
        .iter()
        .flat_map(|&mu| axis.iter().map(move |&nu| (mu, nu)))
        .collect();
    let evaluated = candidates
        .par_iter()
        .map(|&(mu, nu)| rate(mu, nu).map(|r| (mu, nu, r)))
        .collect::<Result<Vec<_>>>()?;
    let mut best = (1.0, 1.0, rate(1.0, 1.0)?);
    for &(mu, nu, r) in &evaluated {
        if r > best.2 {
            best = (mu, nu, r);
        }
    }
    if best.2 <= 0.0 {
        return Ok(IntensityOptimum {
            mu: 1.0,
            nu: 1.0,
            rate: 0.0,
            flat: true,
        });
    }

    let mut step = grid_step;
    while step > 1e-7 {
        let mut moved = false;
        for (dmu, dnu) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let (mu, nu) = (best.0 + dmu, best.1 + dnu);
            if mu <= 0.0 || nu <= 0.0 || mu > MAX_INTENSITY || nu > MAX_INTENSITY {
                continue;
            }
            let r = rate(mu, nu)?;
            if r > best.2 {
                best = (mu, nu, r);
                moved = true;
            }
        }
        if !moved {
            step /= 2.0;
        }
    }
    Ok(IntensityOptimum {
        mu: best.0,
        nu: best.1,
        rate: best.2,
        flat: false,
    })
}

/// Best temporal mode count at one distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemporalOptimum {
    pub m_t: u64,
    pub point: RatePoint,
}

/// Integer `m_t <= m_t_cap` maximizing the temporal rate with `m_s` fixed.
///
/// More slots raise the loading probability but divide the attempt rate, so
/// the rate is unimodal in `m_t`.
pub fn optimize_temporal_modes(
    distance_km: f64,
    m_s: u64,
    scenario: &Scenario,
    m_t_cap: u64,
) -> Result<TemporalOptimum> {
    if m_t_cap == 0 {
        return Err(Error::Precondition("m_t_cap must be at least 1".into()));
    }
    let mut base = *scenario;
    base.protocol.variant = Variant::Temporal;
    base = base.with_modes(m_s, 1);
    base.validate()?;
    let point = |m_t: u64| evaluate(distance_km, &base.with_modes(m_s, m_t));
    let rate = |m_t: u64| point(m_t).map(|p| p.rate).unwrap_or(0.0);

    let grid = log_grid(m_t_cap);
    let rates: Vec<f64> = grid.iter().map(|&m| rate(m)).collect();
    let best = rates
        .iter()
        .enumerate()
        .fold(0, |b, (i, r)| if *r > rates[b] { i } else { b });
    if rates[best] <= 0.0 {
        return Ok(TemporalOptimum {
            m_t: 1,
            point: point(1)?,
        });
    }
    let left = grid[best.saturating_sub(1)];
    let right = grid[(best + 1).min(grid.len() - 1)];
    let m_t = integer_argmax(left, right, rate);
    Ok(TemporalOptimum {
        m_t,
        point: point(m_t)?,
    })
}

/// Optimal temporal mode count and rate at each distance.
pub fn temporal_envelope(
    distances: &[f64],
    m_s: u64,
    scenario: &Scenario,
    m_t_cap: u64,
) -> Result<Vec<TemporalOptimum>> {
    distances
        .par_iter()
        .map(|&km| optimize_temporal_modes(km, m_s, scenario, m_t_cap))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{ChannelParams, QberMode};

    #[test]
    fn grid_construction() {
        assert_eq!(distance_grid(0.0, 20.0, 10.0).unwrap(), vec![0.0, 10.0, 20.0]);
        assert_eq!(distance_grid(5.0, 5.0, 1.0).unwrap(), vec![5.0]);
        assert_eq!(distance_grid(0.0, 0.3, 0.1).unwrap().len(), 4);
        assert!(distance_grid(10.0, 0.0, 1.0).is_err());
        assert!(distance_grid(0.0, 10.0, 0.0).is_err());
        assert!(sweep_distances(&Scenario::new(Variant::Multimode), &[]).is_err());
        assert!(sweep_distances(&Scenario::new(Variant::Multimode), &[10.0, 5.0]).is_err());
    }

    #[test]
    fn single_point_sweep_matches_direct_call() {
        let s = Scenario::new(Variant::OnDemand);
        let curve = sweep_distance(&s, 150.0, 150.0, 10.0).unwrap();
        assert_eq!(curve.points, vec![evaluate(150.0, &s).unwrap()]);
    }

    #[test]
    fn synthetic_power_laws() {
        let xs: Vec<f64> = (1..=30).map(|i| i as f64 * 0.7).collect();
        for k in [0.5, 1.0, 2.0] {
            let ys: Vec<f64> = xs.iter().map(|x| 3.2 * x.powf(k)).collect();
            let fit = fit_power_law(&xs, &ys).unwrap();
            assert!((fit.slope - k).abs() < 1e-6, "k = {k}: {}", fit.slope);
        }
        assert_eq!(
            fit_power_law(&[1.0, 2.0], &[1.0, 2.0]),
            Err(Error::InsufficientPoints(2))
        );
        assert_eq!(
            fit_power_law(&[1.0, 2.0, 3.0], &[0.0, 0.0, 1.0]),
            Err(Error::InsufficientPoints(1))
        );
    }

    #[test]
    fn plob_curve_is_linear_in_eta() {
        let etas: Vec<f64> = (0..40).map(|i| (-(i as f64) * 0.5 - 3.0).exp()).collect();
        let rates: Vec<f64> = etas.iter().map(|&e| plob_bound(e).unwrap()).collect();
        let fit = fit_power_law(&etas, &rates).unwrap();
        assert!((fit.slope - 1.0).abs() < 0.01);
    }

    #[test]
    fn transmittance_from_exported_curve() {
        // ln(eta_ch) against distance recovers -1 / L_att.
        let s = Scenario::new(Variant::Original);
        let curve = sweep_distance(&s, 0.0, 440.0, 20.0).unwrap();
        let series = curve.series(XAxis::EtaCh).unwrap();
        let ds: Vec<f64> = series.points.iter().map(|(_, p)| p.distance_km).collect();
        let ln_eta: Vec<f64> = series.points.iter().map(|(x, _)| x.ln()).collect();
        let fit = least_squares(&ds, &ln_eta).unwrap();
        assert!((fit.slope + 1.0 / 22.0).abs() < 1e-12);
        assert!((fit.intercept + fit.slope * 440.0 + 20.0).abs() < 1e-9);
    }

    #[test]
    fn crossover_at_one_mode() {
        // Beyond f64 range the channel is opaque and any positive rate wins.
        let mut s = Scenario::new(Variant::Multimode);
        s.protocol = s.protocol.with_qber(QberMode::Ideal);
        for kind in [BaselineKind::PlobPerMode, BaselineKind::PlobSingle] {
            let r = crossover_modes(20_000.0, &s, kind, 1000).unwrap();
            assert_eq!(r.m_star, Some(1));
        }
    }

    #[test]
    fn crossover_is_tight() {
        let s = Scenario::new(Variant::Multimode);
        for km in [300.0, 350.0, 450.0] {
            let r = crossover_modes(km, &s, BaselineKind::PlobPerMode, DEFAULT_MODE_CAP).unwrap();
            let m = r.m_star.unwrap();
            let eta = channel_transmittance(km, 22.0).unwrap();
            let at = |m: u64| evaluate(km, &s.with_modes(m, 1)).unwrap().rate;
            assert!(at(m) > plob_per_mode(eta, m));
            assert!(at(m - 1) <= plob_per_mode(eta, m - 1));
        }
    }

    #[test]
    fn no_crossover_at_short_distance() {
        let s = Scenario::new(Variant::Multimode);
        let r = crossover_modes(100.0, &s, BaselineKind::PlobPerMode, DEFAULT_MODE_CAP).unwrap();
        assert_eq!(r.m_star, None);
        assert!(crossover_modes(100.0, &s, BaselineKind::PlobPerMode, 0).is_err());
    }

    #[test]
    fn single_baseline_crossover_is_monotone_search() {
        let s = Scenario::new(Variant::Multimode);
        let r = crossover_modes(400.0, &s, BaselineKind::PlobSingle, DEFAULT_MODE_CAP).unwrap();
        let m = r.m_star.unwrap();
        let eta = channel_transmittance(400.0, 22.0).unwrap();
        let at = |m: u64| evaluate(400.0, &s.with_modes(m, 1)).unwrap().rate;
        assert!(at(m) > plob_bound(eta).unwrap());
        assert!(at(m - 1) <= plob_bound(eta).unwrap());
    }

    #[test]
    fn multimode_intensities_peak_at_one() {
        let s = Scenario::new(Variant::Multimode).with_modes(100, 1);
        let opt = optimize_intensities(300.0, &s).unwrap();
        assert!((opt.mu - 1.0).abs() < 1e-3 && (opt.nu - 1.0).abs() < 1e-3, "{opt:?}");
        assert!(!opt.flat);
    }

    #[test]
    fn ondemand_intensities_are_symmetric_and_reproducible() {
        let s = Scenario::new(Variant::OnDemand);
        let coarse = optimize_intensities_with(200.0, &s, 0.1).unwrap();
        let fine = optimize_intensities_with(200.0, &s, 0.02).unwrap();
        assert!((coarse.mu - coarse.nu).abs() < 1e-3, "{coarse:?}");
        assert!((coarse.mu - fine.mu).abs() < 1e-2 && (coarse.nu - fine.nu).abs() < 1e-2);
        let at_one = evaluate(200.0, &s).unwrap().rate;
        assert!(coarse.rate >= at_one && fine.rate >= at_one);
    }

    #[test]
    fn flat_landscape_is_flagged() {
        let s = Scenario::new(Variant::OnDemand);
        let opt = optimize_intensities_with(3000.0, &s, 0.5).unwrap();
        assert!(opt.flat);
        assert_eq!((opt.mu, opt.nu, opt.rate), (1.0, 1.0, 0.0));
    }

    #[test]
    fn temporal_optimum_matches_enumeration() {
        // Lossless link: heralding succeeds with p = 1/2 per mode, so the
        // rate goes as (1 - 2^-m)^2 / m, which peaks at m = 2.
        let mut s = Scenario::new(Variant::Temporal);
        s.channel = ChannelParams::ideal();
        let opt = optimize_temporal_modes(0.0, 1, &s, 1_000_000).unwrap();
        let brute = (1..=200u64)
            .max_by(|a, b| {
                let f = |m: u64| (1.0 - 0.5f64.powi(m as i32)).powi(2) / m as f64;
                f(*a).total_cmp(&f(*b))
            })
            .unwrap();
        assert_eq!(brute, 2);
        assert_eq!(opt.m_t, brute);
        // With a cap of one slot there is nothing to choose.
        assert_eq!(optimize_temporal_modes(0.0, 1, &s, 1).unwrap().m_t, 1);

        let s = Scenario::new(Variant::Temporal);
        for km in [200.0, 400.0] {
            let opt = optimize_temporal_modes(km, 1, &s, 100_000).unwrap();
            let rate = |m: u64| evaluate(km, &s.with_modes(1, m)).unwrap().rate;
            let brute = (1..=100_000u64).max_by(|a, b| rate(*a).total_cmp(&rate(*b))).unwrap();
            assert!((rate(opt.m_t) - rate(brute)).abs() <= 1e-12 * rate(brute));
        }
    }

    #[test]
    fn temporal_optimum_grows_with_distance() {
        let s = Scenario::new(Variant::Temporal);
        let distances: Vec<f64> = (0..10).map(|i| 150.0 + i as f64 * 50.0).collect();
        let env = temporal_envelope(&distances, 1, &s, 100_000_000).unwrap();
        for w in env.windows(2) {
            assert!(w[1].m_t >= w[0].m_t, "{} then {}", w[0].m_t, w[1].m_t);
        }
        for opt in &env {
            let here = opt.point.rate;
            let s1 = s.with_modes(1, opt.m_t + 1);
            let s0 = s.with_modes(1, opt.m_t.saturating_sub(1).max(1));
            assert!(here >= evaluate(opt.point.distance_km, &s1).unwrap().rate);
            assert!(here >= evaluate(opt.point.distance_km, &s0).unwrap().rate);
        }
    }
}
