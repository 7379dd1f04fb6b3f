//! Aligned text rendering of validation reports.

use std::fmt::Write;

use levy_ats_core::validate::ReportDetails;
use levy_ats_core::ValidationReport;

fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: &mut dyn Iterator<Item = &str>| {
        let parts: Vec<String> = cells.zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(&mut out, &mut header.iter().copied());
    let _ = writeln!(out, "{}", widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  "));
    for r in rows {
        line(&mut out, &mut r.iter().map(String::as_str));
    }
    out
}

fn num(x: f64) -> String {
    format!("{x:.6e}")
}

/// Summary block plus a detail table suited to the report kind.
pub fn render(rep: &ValidationReport) -> String {
    let mut summary = vec![
        vec!["test".into(), rep.test.clone()],
        vec!["description".into(), rep.description.clone()],
        vec!["statistic".into(), rep.statistic.clone()],
        vec!["value".into(), num(rep.max_statistic)],
        vec!["tolerance".into(), num(rep.tolerance)],
        vec!["verdict".into(), if rep.passed() { "PASS".into() } else { "FAIL".into() }],
    ];
    if let Some(s) = rep.seed {
        summary.push(vec!["seed".into(), s.to_string()]);
    }
    if let Some(t) = rep.runtime_secs {
        summary.push(vec!["runtime_s".into(), format!("{t:.3}")]);
    }
    for n in &rep.notes {
        summary.push(vec!["note".into(), n.clone()]);
    }
    let mut out = table(&["field", "value"], &summary);
    out.push('\n');
    match &rep.details {
        ReportDetails::Residual { x_grid, v_grid, residuals } => {
            // worst residual per x row keeps the table short
            let rows: Vec<Vec<String>> = x_grid
                .iter()
                .enumerate()
                .map(|(i, x)| {
                    let row = &residuals[i * v_grid.len()..(i + 1) * v_grid.len()];
                    let (j, r) = row
                        .iter()
                        .enumerate()
                        .fold((0, 0.0f64), |acc, (j, &r)| if r > acc.1 { (j, r) } else { acc });
                    vec![num(*x), num(v_grid[j]), num(r)]
                })
                .collect();
            out += &table(&["x", "worst v", "residual"], &rows);
        }
        ReportDetails::MonteCarlo {
            checkpoints, means, std_errors, z_scores, reference_price, clamps, negative_values, ..
        } => {
            let rows: Vec<Vec<String>> = checkpoints
                .iter()
                .zip(means)
                .zip(std_errors)
                .zip(z_scores)
                .map(|(((t, m), se), z)| vec![num(*t), num(*m), num(*reference_price), num(*se), format!("{z:.3}")])
                .collect();
            out += &table(&["t", "mean P^", "P(0,T)", "std err", "z"], &rows);
            let _ = writeln!(
                out,
                "\nclamped steps {} of {} ({:.3e}); negative stored values {negative_values}",
                clamps.clamped_steps,
                clamps.total_steps,
                clamps.fraction()
            );
        }
        ReportDetails::Checks { items } => {
            let rows: Vec<Vec<String>> = items
                .iter()
                .map(|c| vec![c.name.clone(), if c.passed { "ok".into() } else { "FAIL".into() }, c.detail.clone()])
                .collect();
            out += &table(&["check", "result", "detail"], &rows);
        }
        ReportDetails::Statistics { labels, values } => {
            let rows: Vec<Vec<String>> = labels.iter().zip(values).map(|(l, v)| vec![l.clone(), num(*v)]).collect();
            out += &table(&["quantity", "value"], &rows);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use levy_ats_core::validate::levy_admissibility_check;
    use levy_ats_core::LevyModel;

    #[test]
    fn columns_are_aligned() {
        let t = table(&["a", "bb"], &[vec!["xxx".into(), "y".into()], vec!["z".into(), "wwww".into()]]);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0], "a    bb");
        assert_eq!(lines[1], "---  ----");
        assert_eq!(lines[2], "xxx  y");
        assert_eq!(lines[3], "z    wwww");
    }

    #[test]
    fn renders_checks() {
        let rep = levy_admissibility_check(&LevyModel::stable(1.5).unwrap());
        let text = render(&rep);
        assert!(text.contains("PASS") && text.contains("positive_jump_support"));
    }
}
