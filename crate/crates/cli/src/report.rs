//! Human-readable summaries of result records.

use std::fmt::Write as _;

use crate::record::ResultRecord;

/// Least-squares slope of `log y` against `log x`; `None` with fewer than two usable points.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

fn sci(x: f64) -> String {
    if x != 0.0 && (x.abs() < 1e-3 || x.abs() >= 1e4) {
        format!("{x:.4e}")
    } else {
        format!("{x:.6}")
    }
}

fn describe(r: &ResultRecord) -> String {
    let mut s = String::new();
    let point = r
        .point
        .as_ref()
        .map(|p| format!(" [{} = {}]", p.parameter, p.value))
        .unwrap_or_default();
    let _ = writeln!(
        s,
        "{} {}{}: N = {}, nnz = {}, seed {}",
        r.experiment, r.name, point, r.dimension, r.nnz, r.seed
    );
    if let Some(x) = &r.solve {
        let _ = writeln!(
            s,
            "  {}: {} iterations, converged {}, residual {}",
            x.method,
            x.iterations,
            x.converged,
            sci(x.relative_residual)
        );
    }
    if let Some(x) = &r.preconditioned_solve {
        let _ = writeln!(
            s,
            "  spai {}: {} iterations, converged {}, residual {}",
            x.method,
            x.iterations,
            x.converged,
            sci(x.relative_residual)
        );
    }
    if let Some(c) = &r.conditioning {
        let mut parts = Vec::new();
        if let Some(k) = c.kappa {
            parts.push(format!("kappa {}", sci(k)));
        }
        if let Some(k) = c.kappa_preconditioned {
            parts.push(format!("kappa(MA) {}", sci(k)));
        }
        if let Some(e) = c.eps_pre {
            parts.push(format!("eps_pre {}", sci(e)));
        }
        match (c.bound, c.bound_radius) {
            (Some(b), _) => parts.push(format!(
                "bound {} (holds {})",
                sci(b),
                c.bound_holds.unwrap_or(false)
            )),
            (None, Some(rad)) => parts.push(format!("bound n/a (sqrt(d) eps_pre = {})", sci(rad))),
            _ => {}
        }
        if !parts.is_empty() {
            let _ = writeln!(s, "  {}", parts.join(", "));
        }
    }
    if let Some(q) = &r.qlsa {
        let _ = writeln!(
            s,
            "  qlsa: {} qubits ({} clock), t0 {}, C {}, fidelity {}, overlap {} vs dense {}",
            q.total_qubits,
            q.clock_qubits,
            sci(q.t0),
            sci(q.c),
            sci(q.fidelity),
            sci(q.overlap.value),
            sci(q.dense_overlap)
        );
        if let Some(est) = q.overlap_estimate {
            let _ = writeln!(
                s,
                "  ae {} bits: overlap {} +- {}",
                q.ae_bits.unwrap_or(0),
                sci(est.value),
                sci(est.error.unwrap_or(0.0))
            );
        }
        if let Some(e) = q.trotter_state_error {
            let _ = writeln!(s, "  trotter state error {}", sci(e));
        }
    }
    if let Some(x) = &r.rcs {
        let mut line = format!("  {}: classical {}", x.kind, sci(x.classical));
        if let Some(rf) = x.reference {
            let _ = write!(
                line,
                ", reference {} (rel err {})",
                sci(rf),
                sci(x.reference_relative_error.unwrap_or(0.0))
            );
        }
        if let Some(qv) = x.quantum {
            let _ = write!(line, ", quantum[{}] {}", x.quantum_path, sci(qv.value));
            if let Some(t) = x.quantum_target {
                let _ = write!(line, " (target {})", sci(t));
            }
        }
        if let Some(qe) = x.quantum_estimate {
            let _ = write!(
                line,
                ", ae {} +- {}",
                sci(qe.value),
                sci(qe.error.unwrap_or(0.0))
            );
        }
        let _ = writeln!(s, "{line}");
    }
    let _ = writeln!(
        s,
        "  counters: A {} ({} per row), b {}, R {}, exponentials {}; {:.3} s",
        r.counters.a_oracle_calls,
        r.counters.a_oracle_calls_per_row,
        r.counters.b_oracle_calls,
        r.counters.r_oracle_calls,
        r.counters.exponentials,
        r.wall_time_s
    );
    if let Some(f) = &r.failure {
        let _ = writeln!(s, "  FAILURE: {f}");
    }
    s
}

/// Fits over the sweep points that carry the relevant metric.
fn sweep_fits(records: &[ResultRecord]) -> Vec<String> {
    let mut out = Vec::new();
    fn param<'a>(
        records: &'a [ResultRecord],
        p: &'static str,
    ) -> impl Iterator<Item = &'a ResultRecord> {
        records
            .iter()
            .filter(move |r| r.point.as_ref().is_some_and(|x| x.parameter == p))
    }
    let kappa: Vec<(f64, f64)> = param(records, "size")
        .filter_map(|r| {
            r.conditioning
                .as_ref()?
                .kappa
                .map(|k| (r.dimension as f64, k))
        })
        .collect();
    if let Some(s) = loglog_slope(&kappa) {
        out.push(format!(
            "kappa vs N: log-log slope {s:.3} over {} points",
            kappa.len()
        ));
    }
    let trotter: Vec<(f64, f64)> = param(records, "trotter_steps")
        .filter_map(|r| {
            Some((
                r.point.as_ref()?.value as f64,
                r.qlsa.as_ref()?.trotter_state_error?,
            ))
        })
        .collect();
    if let Some(s) = loglog_slope(&trotter) {
        out.push(format!(
            "trotter error vs steps: log-log slope {s:.3} over {} points",
            trotter.len()
        ));
    }
    let ae: Vec<(u64, f64)> = param(records, "ae_bits")
        .filter_map(|r| Some((r.point.as_ref()?.value, r.qlsa.as_ref()?.ae_mean_abs_error?)))
        .collect();
    if ae.len() >= 2 {
        let ratios: Vec<String> = ae
            .windows(2)
            .map(|w| format!("{}->{}: {:.3}", w[0].0, w[1].0, w[1].1 / w[0].1))
            .collect();
        out.push(format!("ae error ratio per step: {}", ratios.join(", ")));
        // ln(err) against bits, via x = e^bits
        let pts: Vec<(f64, f64)> = ae.iter().map(|&(b, e)| ((b as f64).exp(), e)).collect();
        if let Some(s) = loglog_slope(&pts) {
            out.push(format!("ae error fitted factor per bit {:.3}", s.exp()));
        }
    }
    out
}

/// Full report: one block per record, then sweep fits.
pub fn render(records: &[ResultRecord]) -> String {
    let mut s = String::new();
    for r in records {
        s.push_str(&describe(r));
    }
    let fits = sweep_fits(records);
    if !fits.is_empty() {
        s.push_str("fits:\n");
        for f in fits {
            let _ = writeln!(s, "  {f}");
        }
    }
    let failures = records.iter().filter(|r| r.failure.is_some()).count();
    let _ = writeln!(
        s,
        "{} record(s), {failures} with numerical failures",
        records.len()
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::{ConditioningRecord, SweepPoint};

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = (1..6)
            .map(|i| (i as f64, 3.0 * (i as f64).powi(2)))
            .collect();
        assert!((loglog_slope(&pts).unwrap() - 2.0).abs() < 1e-12);
        assert!(loglog_slope(&pts[..1]).is_none());
    }

    #[test]
    fn size_sweep_reports_kappa_slope() {
        let records: Vec<ResultRecord> = [8usize, 16, 32]
            .iter()
            .map(|&n| {
                let mut r = ResultRecord::new("spai", "k", 1, n, 3 * n);
                r.point = Some(SweepPoint {
                    parameter: "size".into(),
                    value: n as u64,
                });
                r.conditioning = Some(ConditioningRecord {
                    kappa: Some((n * n) as f64),
                    kappa_preconditioned: None,
                    level: None,
                    side: None,
                    eps_pre: None,
                    d: None,
                    bound_radius: None,
                    bound: None,
                    bound_holds: None,
                });
                r
            })
            .collect();
        let text = render(&records);
        assert!(text.contains("kappa vs N: log-log slope 2.000"), "{text}");
        assert!(text.contains("3 record(s), 0 with numerical failures"));
    }
}
