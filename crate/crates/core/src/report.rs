//! CSV result files.
//!
//! Every file starts with a header row. Reals are written in scientific
//! notation with 17 significant digits so that values survive a text
//! round-trip bit-exactly.

use std::fmt::Write;

use crate::experiments::{SweepResult, ThresholdPoint};
use crate::magnetics::MutualMatrix;
use crate::optimizer::OptimizationTrace;
use crate::oracle::OracleReport;

pub const TRACE_HEADER: &str = "iter,alpha,i1,i2,i3,s1,s2,s3,pathloss_db";
pub const SWEEP_HEADER: &str = "alpha,joint_db,txonly_db,rxonly_db,equal_db,iters,converged";
pub const THRESHOLD_HEADER: &str = "delta,mean_reduction_pct,mean_iters";
pub const ORACLE_HEADER: &str = "claim,closed_form,oracle_best,gap,samples,seed";
pub const MUTUAL_HEADER: &str = "tx_coil,r1,r2,r3";

/// Full-precision real formatting.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

pub fn trace_csv(trace: &OptimizationTrace, alpha: f64) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for e in &trace.entries {
        let i = e.current.amps();
        let s = e.weights.weights();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            e.iteration,
            num(alpha),
            num(i[0]),
            num(i[1]),
            num(i[2]),
            num(s[0]),
            num(s[1]),
            num(s[2]),
            num(e.pathloss_db)
        );
    }
    out
}

pub fn sweep_csv(result: &SweepResult) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in &result.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            num(r.alpha),
            num(r.joint_db),
            num(r.txonly_db),
            num(r.rxonly_db),
            num(r.equal_db),
            r.iterations,
            r.converged
        );
    }
    out
}

pub fn threshold_csv(points: &[ThresholdPoint]) -> String {
    let mut out = String::from(THRESHOLD_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{}",
            num(p.delta),
            num(p.mean_reduction_pct),
            num(p.mean_iterations)
        );
    }
    out
}

pub fn oracle_csv(reports: &[OracleReport]) -> String {
    let mut out = String::from(ORACLE_HEADER);
    out.push('\n');
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.claim,
            num(r.closed_form),
            num(r.oracle_best),
            num(r.gap),
            r.samples,
            r.seed
        );
    }
    out
}

pub fn mutual_csv(m: &MutualMatrix) -> String {
    let mut out = String::from(MUTUAL_HEADER);
    out.push('\n');
    for (i, row) in m.entries().iter().enumerate() {
        let _ = writeln!(
            out,
            "T{},{},{},{}",
            i + 1,
            num(row[0]),
            num(row[1]),
            num(row[2])
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-17, 6.283185307179586, 1e300] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
            let digits = s
                .split('e')
                .next()
                .unwrap()
                .chars()
                .filter(|c| c.is_ascii_digit())
                .count();
            assert_eq!(digits, 17);
        }
        assert_eq!(num(f64::INFINITY), "inf");
    }

    #[test]
    fn oracle_rows() {
        let r = OracleReport {
            claim: "current_step".into(),
            closed_form: 3.0,
            oracle_best: 2.5,
            gap: -1.0 / 6.0,
            samples: 10,
            seed: 42,
            low_confidence: true,
            passed: true,
        };
        let csv = oracle_csv(&[r]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(ORACLE_HEADER));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0], "current_step");
        assert_eq!(row[4], "10");
        assert_eq!(row[5], "42");
    }
}
