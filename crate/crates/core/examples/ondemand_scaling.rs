// On-demand memory-assisted MDI-QKD: fits the rate exponent against the
// channel transmittance and compares the curve with the PLOB bound.
//
// Run with `cargo run --example ondemand_scaling`.

use mdiqkd::analysis::{fit_loglog_slope, sweep_distance, XAxis};
use mdiqkd::primitives::{channel_transmittance, plob_bound};
use mdiqkd::{Scenario, Variant};

pub struct OndemandSummary {
    pub exponent: f64,
    pub exponent_err: f64,
    /// Rate and PLOB bound at 500 km.
    pub rate_500: f64,
    pub plob_500: f64,
}

pub fn run_example() -> mdiqkd::Result<OndemandSummary> {
    let scenario = Scenario::new(Variant::OnDemand);
    let curve = sweep_distance(&scenario, 0.0, 600.0, 10.0)?;
    let l_att = scenario.channel.l_att_km;

    println!("{:>6} {:>12} {:>12} {:>8}", "km", "rate", "plob", "n_l");
    for p in curve.points.iter().step_by(5) {
        let eta = channel_transmittance(p.distance_km, l_att)?;
        println!(
            "{:>6.0} {:>12.4e} {:>12.4e} {:>8.1}",
            p.distance_km,
            p.rate,
            plob_bound(eta).unwrap_or(f64::INFINITY),
            p.diagnostics.n_l.unwrap_or(f64::NAN)
        );
    }

    let series = curve.series(XAxis::EtaCh)?;
    let window = (
        channel_transmittance(300.0, l_att)?,
        channel_transmittance(100.0, l_att)?,
    );
    let fit = fit_loglog_slope(&series, Some(window))?;
    println!("rate ~ eta_ch^{:.3} (+/- {:.3}) over 100-300 km", fit.slope, fit.std_err);

    let at_500 = curve
        .points
        .iter()
        .find(|p| p.distance_km == 500.0)
        .expect("500 km is on the grid");
    let plob_500 = plob_bound(channel_transmittance(500.0, l_att)?)?;
    println!("500 km: rate {:.3e}, PLOB {:.3e}", at_500.rate, plob_500);

    Ok(OndemandSummary {
        exponent: fit.slope,
        exponent_err: fit.std_err,
        rate_500: at_500.rate,
        plob_500,
    })
}

fn main() -> mdiqkd::Result<()> {
    run_example().map(|_| ())
}
