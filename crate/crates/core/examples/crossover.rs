// Smallest number of spectral modes needed to beat the repeaterless bound.
//
// Run with `cargo run --example crossover`.

use mdiqkd::analysis::{crossover_modes, BaselineKind, CrossoverResult, DEFAULT_MODE_CAP};
use mdiqkd::{Scenario, Variant};

pub fn run_example() -> mdiqkd::Result<Vec<CrossoverResult>> {
    let scenario = Scenario::new(Variant::Multimode);
    let mut rows = Vec::new();
    println!("{:>5} {:>12} {:>12}", "km", "per-mode", "single");
    for km in [100.0, 200.0, 270.0, 300.0, 400.0, 500.0] {
        let per_mode = crossover_modes(km, &scenario, BaselineKind::PlobPerMode, DEFAULT_MODE_CAP)?;
        let single = crossover_modes(km, &scenario, BaselineKind::PlobSingle, DEFAULT_MODE_CAP)?;
        let show = |r: &CrossoverResult| r.m_star.map_or("-".to_string(), |m| m.to_string());
        println!("{km:>5} {:>12} {:>12}", show(&per_mode), show(&single));
        rows.push(per_mode);
    }
    Ok(rows)
}

fn main() -> mdiqkd::Result<()> {
    run_example().map(|_| ())
}
