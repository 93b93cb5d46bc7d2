//! Trajectory and report serialization: CSV time series with full-precision
//! floats, and JSON verification reports that embed the resolved
//! configuration they were produced from.

use std::io::Write as _;
use std::path::Path;

use serde_json::{json, Value};

use sddsim_core::analysis::VerificationReport;
use sddsim_core::integrator::{Scenario, Trajectory};
use sddsim_core::spectral::SpectralBasis;

use crate::config::format_f64;

/// CSV header for a trajectory export with `order` spectral modes.
pub fn csv_header(order: usize, include_coeffs: bool) -> String {
    let mut header = String::from("t,norm_l2,norm_h1,eta,f_norm");
    if include_coeffs {
        for k in 1..=order {
            header.push_str(&format!(",g_{k}"));
        }
    }
    header.push('\n');
    header
}

/// Renders a trajectory as CSV: one row per node with the time, the fractional
/// Sobolev norms `‖u‖` and `‖A^{1/2}u‖`, the delay value used to leave the
/// node, and the norm of the frozen right-hand side; optionally the raw
/// spectral coefficients. All floats carry 17 significant digits, so the
/// rows re-parse losslessly.
pub fn trajectory_csv(
    trajectory: &Trajectory,
    scenario: &Scenario,
    include_coeffs: bool,
) -> sddsim_core::Result<String> {
    let basis = SpectralBasis::new(scenario.domain, scenario.order)?;
    let mut out = csv_header(scenario.order, include_coeffs);
    for (j, node) in trajectory.nodes().iter().enumerate() {
        out.push_str(&format_f64(trajectory.time(j)));
        out.push(',');
        out.push_str(&format_f64(node.field.norm_l2()));
        out.push(',');
        out.push_str(&format_f64(basis.norm(&node.field, 0.5)?));
        out.push(',');
        out.push_str(&format_f64(node.eta));
        out.push(',');
        out.push_str(&format_f64(node.rhs.norm_l2()));
        if include_coeffs {
            for g in node.field.coeffs() {
                out.push(',');
                out.push_str(&format_f64(*g));
            }
        }
        out.push('\n');
    }
    Ok(out)
}

/// Two-column CSV (`x,y` with custom names) for plot data such as
/// divergence curves or kernel-refinement errors.
pub fn xy_csv(x_name: &str, y_name: &str, rows: &[(f64, f64)]) -> String {
    let mut out = format!("{x_name},{y_name}\n");
    for (x, y) in rows {
        out.push_str(&format_f64(*x));
        out.push(',');
        out.push_str(&format_f64(*y));
        out.push('\n');
    }
    out
}

fn record_value(record: &sddsim_core::analysis::CheckRecord) -> Value {
    let constants: serde_json::Map<String, Value> = record
        .constants
        .iter()
        .map(|(name, value)| (name.clone(), json!(value)))
        .collect();
    json!({
        "name": record.name,
        "inequality": record.inequality,
        "constants": constants,
        "margin": record.margin,
        "slack": record.slack,
        "passed": record.passed,
        "notes": record.notes,
    })
}

/// Serializes a verification report as pretty JSON, embedding the resolved
/// configuration so the artifact is self-describing.
pub fn report_json(report: &VerificationReport, resolved_config: &str) -> String {
    let checks: Vec<Value> = report.records.iter().map(record_value).collect();
    let doc = json!({
        "all_passed": report.all_passed(),
        "checks": checks,
        "config": resolved_config,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("report serialization");
    text.push('\n');
    text
}

/// Writes `content` to `path`, attaching the path to any I/O failure.
pub fn write_text(path: &Path, content: &str) -> Result<(), String> {
    let mut file = std::fs::File::create(path)
        .map_err(|e| format!("cannot create {}: {e}", path.display()))?;
    file.write_all(content.as_bytes())
        .map_err(|e| format!("cannot write {}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_scenario;
    use sddsim_core::analysis::CheckRecord;
    use sddsim_core::integrator::run;

    #[test]
    fn header_matches_column_contract() {
        assert_eq!(csv_header(2, false), "t,norm_l2,norm_h1,eta,f_norm\n");
        assert_eq!(csv_header(2, true), "t,norm_l2,norm_h1,eta,f_norm,g_1,g_2\n");
    }

    #[test]
    fn csv_rows_reparse_to_the_stored_coefficients() {
        let mut cfg = parse_scenario("[integration]\nhorizon = 0.25\n").unwrap();
        cfg.scenario.order = 4;
        cfg.scenario.domain = sddsim_core::spectral::Domain::new(
            cfg.scenario.domain.length(),
            16,
        )
        .unwrap();
        let traj = run(&cfg.scenario).unwrap();
        let text = trajectory_csv(&traj, &cfg.scenario, true).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,norm_l2,norm_h1,eta,f_norm,g_1,g_2,g_3,g_4");
        let mut rows = 0;
        for (j, line) in lines.enumerate() {
            let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
            assert_eq!(cols.len(), 9);
            assert!((cols[0] - traj.time(j)).abs() < 1e-15);
            let node = traj.node(j);
            for (k, g) in node.field.coeffs().iter().enumerate() {
                assert_eq!(cols[5 + k], *g, "coefficient column must be lossless");
            }
            let norm_from_cols: f64 = cols[5..9].iter().map(|g| g * g).sum::<f64>().sqrt();
            assert!((norm_from_cols - cols[1]).abs() <= 1e-12 * (1.0 + cols[1]));
            rows += 1;
        }
        assert_eq!(rows, traj.len());
    }

    #[test]
    fn report_json_has_the_agreed_shape() {
        let mut report = VerificationReport::new();
        report.push(
            CheckRecord::from_bounds("demo", "a <= b", &[(1.0, 2.0)], 0.0)
                .with_constant("K", 3.25),
        );
        let text = report_json(&report, "[domain]\nlength = 1\n");
        let doc: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(doc["all_passed"], json!(true));
        assert_eq!(doc["checks"][0]["name"], json!("demo"));
        assert_eq!(doc["checks"][0]["constants"]["K"], json!(3.25));
        assert!(doc["config"].as_str().unwrap().contains("[domain]"));
    }
}
