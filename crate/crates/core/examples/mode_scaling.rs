// Rate versus the number of spectral and temporal modes at fixed distance.
// Spectral modes enter quadratically, temporal ones linearly, until the
// loading probability saturates.
//
// Run with `cargo run --example mode_scaling`.

use mdiqkd::analysis::{fit_loglog_slope, mode_series, XAxis};
use mdiqkd::{Scenario, Variant};

/// Fitted exponents `(spectral, temporal)` at 400 km.
pub fn run_example() -> mdiqkd::Result<(f64, f64)> {
    let km = 400.0;
    let scenario = Scenario::new(Variant::Multimode);
    let modes: Vec<u64> = (0..=20).map(|k| 10f64.powf(k as f64 / 10.0).round() as u64).collect();

    let spectral = mode_series(km, &scenario, XAxis::ModesS, &modes)?;
    let temporal = mode_series(km, &scenario.with_modes(1, 1), XAxis::ModesT, &modes)?;
    println!("{:>5} {:>12} {:>12}", "m", "rate(m_s)", "rate(m_t)");
    for ((m, s), (_, t)) in spectral.points.iter().zip(&temporal.points) {
        println!("{m:>5} {:>12.4e} {:>12.4e}", s.rate, t.rate);
    }

    let s_fit = fit_loglog_slope(&spectral, Some((1.0, 100.0)))?;
    let t_fit = fit_loglog_slope(&temporal, Some((1.0, 100.0)))?;
    println!("spectral exponent {:.3} +/- {:.3}", s_fit.slope, s_fit.std_err);
    println!("temporal exponent {:.3} +/- {:.3}", t_fit.slope, t_fit.std_err);
    Ok((s_fit.slope, t_fit.slope))
}

fn main() -> mdiqkd::Result<()> {
    run_example().map(|_| ())
}
