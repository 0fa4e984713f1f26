//! CSV and JSON serialization of results. Numbers carry 17 significant
//! digits; every file opens with a `#` provenance line.

use std::fmt::Write;

use serde::Serialize;

use crate::dynamics::{hamiltonian, CylinderState};
use crate::error::Result;
use crate::params::DimensionParams;
use crate::portrait::PortraitSet;
use crate::solver::SweepReport;
use crate::study::ConvergenceReport;
use crate::VERSION;

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// `# qdelaunay <version> n=<n> <settings>`
pub fn header(n: u32, settings: &str) -> String {
    if settings.is_empty() {
        format!("# qdelaunay {VERSION} n={n}\n")
    } else {
        format!("# qdelaunay {VERSION} n={n} {settings}\n")
    }
}

/// Columns t,v,v1,v2,v3,H.
pub fn trajectory_csv(params: &DimensionParams, states: &[CylinderState], settings: &str) -> Result<String> {
    let mut out = header(params.n, settings);
    out.push_str("t,v,v1,v2,v3,H\n");
    for s in states {
        let h = hamiltonian(params, s)?;
        writeln!(
            out,
            "{},{},{},{},{},{}",
            num(s.t),
            num(s.v),
            num(s.v1),
            num(s.v2),
            num(s.v3),
            num(h)
        )
        .unwrap();
    }
    Ok(out)
}

/// Columns a,b,T_a,eps_a,H,I_a,defect; failed points keep their a and leave
/// the rest empty.
pub fn sweep_csv(report: &SweepReport, settings: &str) -> String {
    let mut out = header(report.n, settings);
    out.push_str("a,b,T_a,eps_a,H,I_a,defect\n");
    for p in &report.points {
        match &p.result {
            Ok(o) => writeln!(
                out,
                "{},{},{},{},{},{},{}",
                num(o.a),
                num(o.b),
                num(o.t_a),
                num(o.eps_a),
                num(o.h),
                num(o.i_a),
                num(o.defect)
            )
            .unwrap(),
            Err(_) => writeln!(out, "{},,,,,,", num(p.a)).unwrap(),
        }
    }
    out
}

/// Columns a,T_a,I_a,Y,Y_over_Ysph.
pub fn convergence_csv(report: &ConvergenceReport, settings: &str) -> String {
    let mut out = header(report.n, settings);
    out.push_str("a,T_a,I_a,Y,Y_over_Ysph\n");
    for r in &report.rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            num(r.a),
            opt(r.t_a),
            opt(r.i_a),
            opt(r.y),
            opt(r.y_over_ysph)
        )
        .unwrap();
    }
    out
}

/// Columns curve_id,label,v,v1.
pub fn portrait_csv(set: &PortraitSet, settings: &str) -> String {
    let mut out = header(set.n, settings);
    out.push_str("curve_id,label,v,v1\n");
    for (i, c) in set.curves.iter().enumerate() {
        for p in &c.points {
            writeln!(out, "{i},{},{},{}", c.label, num(p[0]), num(p[1])).unwrap();
        }
    }
    out
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("result types serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::make_params;
    use crate::solver::sweep;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 123456.789] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            assert_eq!(
                s.split('e')
                    .next()
                    .unwrap()
                    .trim_start_matches('-')
                    .replace('.', "")
                    .len(),
                17
            );
        }
    }

    #[test]
    fn sweep_rows_and_header() {
        let p = make_params(5).unwrap();
        let rep = sweep(&p, &[p.v_cyl, 0.9], 1e-9).unwrap();
        let csv = sweep_csv(&rep, "tol=1e-9");
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# qdelaunay ") && lines[0].contains("n=5"));
        assert_eq!(lines[1], "a,b,T_a,eps_a,H,I_a,defect");
        assert!(lines[2].ends_with(",,,,,,"));
        assert_eq!(lines[3].split(',').count(), 7);
    }

    #[test]
    fn trajectory_columns() {
        let p = make_params(5).unwrap();
        let s = CylinderState::cylinder(&p);
        let csv = trajectory_csv(&p, &[s], "").unwrap();
        assert_eq!(csv.lines().nth(1).unwrap(), "t,v,v1,v2,v3,H");
        let h: f64 = csv
            .lines()
            .nth(2)
            .unwrap()
            .split(',')
            .next_back()
            .unwrap()
            .parse()
            .unwrap();
        assert!((h / p.h_cyl - 1.0).abs() < 1e-12);
    }
}
