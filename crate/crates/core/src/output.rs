//! CSV records for sweeps, crossover scans and Monte Carlo rate points.
//!
//! Floats are written in Rust's shortest round-trip exponent notation, which
//! is locale independent; column order is fixed.

use std::io::{self, Write};

use crate::analysis::{CrossoverResult, RateCurve};
use crate::montecarlo::McRatePoint;
use crate::primitives::{channel_transmittance, plob_bound, plob_per_mode};

pub const SWEEP_HEADER: &str = "km,rate,y11_qm,e_x,e_z,plob_single,plob_per_mode";
pub const CROSSOVER_HEADER: &str = "km,m_star";
pub const COMPARISON_HEADER: &str = "quantity,analytic,mc_mean,mc_stderr,z";
pub const MC_HEADER: &str = "km,rate,y11_qm,e_x,e_z,plob_single,plob_per_mode,std_err,n";

fn num(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:e}")
    }
}

fn writer<W: Write>(out: W, header: &str) -> io::Result<csv::Writer<W>> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header.split(','))?;
    Ok(w)
}

/// One row per curve point; the per-mode bound uses the scenario's `m_s`.
pub fn write_sweep_csv<W: Write>(out: W, curve: &RateCurve) -> io::Result<()> {
    let mut w = writer(out, SWEEP_HEADER)?;
    let ch = &curve.scenario.channel;
    let modes = curve.scenario.memory.m_s;
    for p in &curve.points {
        let eta = channel_transmittance(p.distance_km, ch.l_att_km).unwrap_or(0.0);
        w.write_record([
            p.distance_km.to_string(),
            num(p.rate),
            num(p.y11_qm),
            num(p.e_x),
            num(p.e_z),
            num(plob_bound(eta).unwrap_or(f64::INFINITY)),
            num(plob_per_mode(eta, modes)),
        ])?;
    }
    w.flush()
}

/// `m_star` is left empty when no crossover exists below the cap.
pub fn write_crossover_csv<W: Write>(out: W, rows: &[CrossoverResult]) -> io::Result<()> {
    let mut w = writer(out, CROSSOVER_HEADER)?;
    for r in rows {
        let m = r.m_star.map_or(String::new(), |m| m.to_string());
        w.write_record([r.distance_km.to_string(), m])?;
    }
    w.flush()
}

pub fn write_mc_csv<W: Write>(out: W, rows: &[McRatePoint]) -> io::Result<()> {
    let mut w = writer(out, MC_HEADER)?;
    for r in rows {
        w.write_record([
            r.km.to_string(),
            num(r.rate),
            num(r.y11_qm),
            num(r.e_x),
            num(r.e_z),
            num(r.plob_single),
            num(r.plob_per_mode),
            num(r.std_err),
            r.n.to_string(),
        ])?;
    }
    w.flush()
}

/// The `mc-validate` comparison table.
pub fn write_comparison_csv<W: Write>(out: W, rows: &[crate::cli::Comparison]) -> io::Result<()> {
    let mut w = writer(out, COMPARISON_HEADER)?;
    for r in rows {
        w.write_record([
            r.quantity.clone(),
            num(r.analytic),
            num(r.mc_mean),
            num(r.mc_stderr),
            format!("{:.3}", r.z),
        ])?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{sweep_distance, BaselineKind};
    use crate::params::{Scenario, Variant};

    #[test]
    fn sweep_rows_and_header() {
        let curve = sweep_distance(&Scenario::new(Variant::Multimode), 0.0, 20.0, 10.0).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &curve).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], SWEEP_HEADER);
        assert!(lines[1].starts_with("0,"));
        assert!(lines[1].contains(",inf,"), "{}", lines[1]);
        for line in &lines[1..] {
            assert_eq!(line.split(',').count(), 7);
            for field in line.split(',') {
                assert!(field == "inf" || field.parse::<f64>().is_ok(), "{field}");
            }
        }
    }

    #[test]
    fn missing_crossover_is_empty_field() {
        let rows = [
            CrossoverResult {
                distance_km: 100.0,
                m_star: None,
                baseline_kind: BaselineKind::PlobPerMode,
            },
            CrossoverResult {
                distance_km: 400.0,
                m_star: Some(731),
                baseline_kind: BaselineKind::PlobPerMode,
            },
        ];
        let mut buf = Vec::new();
        write_crossover_csv(&mut buf, &rows).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "km,m_star\n100,\n400,731\n");
    }

    #[test]
    fn numbers_round_trip() {
        for x in [1.0, 2.5e-17, 0.016916910404576586, 123456.789] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }
}
