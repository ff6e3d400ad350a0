// Builds a scenario from a TOML run configuration, as the command-line tool
// does, and evaluates every protocol variant at one distance.
//
// Run with `cargo run --example run_config`.

use mdiqkd::config::RunConfig;
use mdiqkd::{evaluate, RatePoint, Variant};

const CONFIG: &str = r#"
[channel]
l_att_km = 22.0
p_dc = 1e-8

[memory]
m_s = 1000
m_t = 10
t2_s = 300e-6

[protocol]
f_ec = 1.16
"#;

pub fn run_example() -> Result<Vec<(Variant, RatePoint)>, Box<dyn std::error::Error>> {
    let cfg = RunConfig::parse(CONFIG)?;
    let mut out = Vec::new();
    for variant in Variant::ALL {
        let mut scenario = cfg.scenario(variant);
        if variant == Variant::Multimode {
            // Spectral-only multiplexing has a single time slot.
            scenario = scenario.with_modes(scenario.memory.m_s, 1);
        }
        let point = evaluate(250.0, &scenario)?;
        println!("{:<10} {:.4e}", variant.label(), point.rate);
        out.push((variant, point));
    }
    Ok(out)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example().map(|_| ())
}
