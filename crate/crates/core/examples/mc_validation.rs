// Seeded Monte Carlo checks of the memory-loading statistics and of the
// multimode single-photon yield.
//
// Run with `cargo run --release --example mc_validation`.

use mdiqkd::memory::LoadingStats;
use mdiqkd::montecarlo::{simulate_loading, simulate_multimode_round, McConfig};
use mdiqkd::{evaluate, Scenario, Variant};

/// Largest `|z|` over all comparisons.
pub fn run_example() -> mdiqkd::Result<f64> {
    let mc = McConfig::new(400_000, 2024).with_workers(2);
    let tau_over_t2 = Scenario::new(Variant::OnDemand).memory.tau_over_t2();
    let mut worst: f64 = 0.0;
    let mut report = |name: String, analytic: f64, est: mdiqkd::montecarlo::McEstimate| {
        let z = est.z_score(analytic);
        worst = worst.max(z.abs());
        println!("{name:<24} {analytic:>12.6e} {:>12.6e} +/- {:>9.2e}  z = {z:+.2}", est.mean, est.std_err);
    };

    for eta in [0.5, 0.1, 0.01] {
        let stats = LoadingStats::new(eta, eta, tau_over_t2)?;
        let est = simulate_loading(eta, eta, tau_over_t2, &mc)?;
        report(format!("N_L, eta={eta}"), stats.mean_attempts, est.attempts);
        report(format!("E|dN|, eta={eta}"), stats.mean_abs_delta_n, est.abs_delta);
        report(format!("decay, eta={eta}"), stats.mean_decay, est.decay);
    }

    let scenario = Scenario::new(Variant::Multimode).with_modes(100, 1);
    for km in [200.0, 300.0] {
        let analytic = evaluate(km, &scenario)?.y11_qm;
        let est = simulate_multimode_round(km, &scenario, &mc)?;
        report(format!("Y11_QM, {km} km"), analytic, est.y11_qm);
    }
    println!("largest |z| = {worst:.2}");
    Ok(worst)
}

fn main() -> mdiqkd::Result<()> {
    run_example().map(|_| ())
}
