// Grid search over the WCP intensities of the on-demand scheme.
//
// Run with `cargo run --example intensity_optimization`.

use mdiqkd::analysis::{optimize_intensities, IntensityOptimum};
use mdiqkd::{evaluate, Scenario, Variant};

pub fn run_example() -> mdiqkd::Result<Vec<(f64, IntensityOptimum)>> {
    let scenario = Scenario::new(Variant::OnDemand);
    let mut out = Vec::new();
    println!("{:>5} {:>7} {:>7} {:>12} {:>12}", "km", "mu", "nu", "rate", "rate(mu=1)");
    for km in [50.0, 150.0, 250.0, 350.0] {
        let opt = optimize_intensities(km, &scenario)?;
        let unit = evaluate(km, &scenario)?.rate;
        println!("{km:>5} {:>7.3} {:>7.3} {:>12.4e} {:>12.4e}", opt.mu, opt.nu, opt.rate, unit);
        out.push((km, opt));
    }
    Ok(out)
}

fn main() -> mdiqkd::Result<()> {
    run_example().map(|_| ())
}
