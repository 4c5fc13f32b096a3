//! Deterministic CSV renderings of study and constant results.
//!
//! Every float is written as `{:.16e}` (17 significant digits), which
//! round-trips `f64` exactly and makes repeated runs byte-identical.

use super::constants::ConstantEstimate;
use super::studies::{ConvergenceReport, EXACT_FLOOR};

/// The one float format used in every CSV cell.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders a study as `level,h,ndof,errL2,errH1,rateL2,rateH1` rows.
///
/// The first row leaves the rate cells empty; later rows report the
/// adjacent-level rate, or `exact` when both adjacent errors sit at the
/// reproduction floor.
pub fn convergence_csv(report: &ConvergenceReport) -> String {
    let mut out = String::from("level,h,ndof,errL2,errH1,rateL2,rateH1\n");
    for (i, row) in report.rows.iter().enumerate() {
        let (rate_l2, rate_h1) = if i == 0 {
            (String::new(), String::new())
        } else {
            let prev = &report.rows[i - 1];
            (
                rate_cell(prev.err_l2, row.err_l2, prev.h, row.h),
                rate_cell(prev.err_h1, row.err_h1, prev.h, row.h),
            )
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.level,
            format_float(row.h),
            row.n_dofs,
            format_float(row.err_l2),
            format_float(row.err_h1),
            rate_l2,
            rate_h1
        ));
    }
    out
}

fn rate_cell(err_prev: f64, err: f64, h_prev: f64, h: f64) -> String {
    if err_prev <= EXACT_FLOOR && err <= EXACT_FLOOR {
        "exact".to_string()
    } else {
        format_float((err_prev / err).ln() / (h_prev / h).ln())
    }
}

/// Renders constant estimates as
/// `quantity,shape,k,l,r,lambda_min,lambda_max,constant` rows.
pub fn constants_csv(estimates: &[ConstantEstimate]) -> String {
    let mut out = String::from("quantity,shape,k,l,r,lambda_min,lambda_max,constant\n");
    for e in estimates {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            e.quantity.label(),
            e.shape,
            e.k,
            e.l,
            e.r,
            format_float(e.lambda_min),
            format_float(e.lambda_max),
            format_float(e.constant)
        ));
    }
    out
}

/// Renders a solution vector as `dof_id,value` rows.
pub fn solution_csv(u: &[f64]) -> String {
    let mut out = String::from("dof_id,value\n");
    for (i, v) in u.iter().enumerate() {
        out.push_str(&format!("{},{}\n", i, format_float(*v)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::studies::StudyRow;

    fn report(errs: &[(f64, f64)]) -> ConvergenceReport {
        let rows: Vec<StudyRow> = errs
            .iter()
            .enumerate()
            .map(|(i, &(l2, h1))| StudyRow {
                level: i,
                h: 1.0 / (1 << i) as f64,
                n_dofs: 10 * (i + 1),
                err_l2: l2,
                err_h1: h1,
            })
            .collect();
        ConvergenceReport {
            rows,
            fitted_l2: None,
            fitted_h1: None,
        }
    }

    #[test]
    fn float_format_round_trips_and_is_stable() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0] {
            let s = format_float(x);
            assert_eq!(s, format_float(x));
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }

    #[test]
    fn first_row_has_empty_rate_cells() {
        let csv = convergence_csv(&report(&[(1e-2, 1e-1), (2.5e-3, 5e-2)]));
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "level,h,ndof,errL2,errH1,rateL2,rateH1");
        let first = lines.next().unwrap();
        assert!(first.ends_with(",,"), "{first}");
        // Second row: errors quartered/halved while h halves, so the rates
        // are exactly 2 and 1.
        let second = lines.next().unwrap();
        let cells: Vec<&str> = second.split(',').collect();
        assert_eq!(cells.len(), 7);
        assert!((cells[5].parse::<f64>().unwrap() - 2.0).abs() < 1e-12);
        assert!((cells[6].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reproduced_levels_are_marked_exact() {
        let csv = convergence_csv(&report(&[(1e-12, 1e-12), (1e-13, 1e-12)]));
        let second = csv.lines().nth(2).unwrap();
        assert!(second.ends_with(",exact,exact"), "{second}");
    }

    #[test]
    fn constants_csv_has_one_row_per_estimate() {
        use crate::lab::{ConstantEstimate, ConstantQuantity};
        let rows = [ConstantEstimate {
            quantity: ConstantQuantity::Inverse,
            shape: "square".into(),
            k: 2,
            l: 0,
            r: 2,
            lambda_min: 0.5,
            lambda_max: 8.0,
            constant: 4.0,
        }];
        let csv = constants_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "quantity,shape,k,l,r,lambda_min,lambda_max,constant"
        );
        let row = lines.next().unwrap();
        assert!(row.starts_with("inverse,square,2,0,2,"), "{row}");
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn solution_csv_is_indexed_from_zero() {
        let csv = solution_csv(&[1.5, -0.25]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "dof_id,value");
        assert!(lines[1].starts_with("0,1.5"));
        assert!(lines[2].starts_with("1,-2.5"));
    }
}
