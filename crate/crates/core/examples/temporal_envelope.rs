// Temporal multiplexing with the slot count optimized at every distance.
// The optimized envelope scales like the square root of the channel
// transmittance.
//
// Run with `cargo run --example temporal_envelope`.

use mdiqkd::analysis::{fit_power_law, temporal_envelope, TemporalOptimum};
use mdiqkd::primitives::channel_transmittance;
use mdiqkd::{Scenario, Variant};

pub struct Envelope {
    pub points: Vec<(f64, TemporalOptimum)>,
    pub exponent: f64,
}

pub fn run_example() -> mdiqkd::Result<Envelope> {
    let scenario = Scenario::new(Variant::Temporal);
    let distances: Vec<f64> = (0..=8).map(|k| 200.0 + 50.0 * k as f64).collect();
    let optima = temporal_envelope(&distances, 1, &scenario, 100_000_000)?;

    println!("{:>5} {:>12} {:>12}", "km", "m_t*", "rate");
    for (km, o) in distances.iter().zip(&optima) {
        println!("{km:>5} {:>12} {:>12.4e}", o.m_t, o.point.rate);
    }
    let etas = distances
        .iter()
        .map(|&km| channel_transmittance(km, scenario.channel.l_att_km))
        .collect::<mdiqkd::Result<Vec<_>>>()?;
    let rates: Vec<f64> = optima.iter().map(|o| o.point.rate).collect();
    let fit = fit_power_law(&etas, &rates)?;
    println!("envelope ~ eta_ch^{:.3} (+/- {:.3})", fit.slope, fit.std_err);

    Ok(Envelope {
        points: distances.into_iter().zip(optima).collect(),
        exponent: fit.slope,
    })
}

fn main() -> mdiqkd::Result<()> {
    run_example().map(|_| ())
}
