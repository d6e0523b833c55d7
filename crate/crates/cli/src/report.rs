//! Result tables and plot-ready series as CSV.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use slicenet_core::admm::Variant;
use slicenet_core::ServiceId;

use crate::error::CliError;
use crate::experiment::{CellStatus, ResultRow, SweepAxis};

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

fn services(rows: &[ResultRow]) -> Vec<ServiceId> {
    rows.iter()
        .flat_map(|r| r.traffic.iter().map(|t| t.service))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// One line per row.
pub fn results_csv(axis: SweepAxis, rows: &[ResultRow]) -> String {
    let svc = services(rows);
    let mut s = format!(
        "{axis},variant,seed,status,links_total,links_admitted,required_bps,objective_lp,objective_admm,admm_iterations,admm_iterations_to_gap,subgradient_iterations_to_gap"
    );
    for id in &svc {
        let _ = write!(s, ",traffic_s{id}_licensed_bps,traffic_s{id}_unlicensed_bps");
    }
    s.push('\n');
    for r in rows {
        let status = match r.status {
            CellStatus::Ok => "ok",
            CellStatus::Infeasible => "infeasible",
            CellStatus::Error => "error",
        };
        let _ = write!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.sweep_value,
            r.variant,
            r.seed,
            status,
            r.links_total,
            r.links_admitted,
            r.required_bps,
            opt(r.objective_lp),
            opt(r.objective_admm),
            opt(r.admm_iterations),
            opt(r.admm_iterations_to_gap),
            opt(r.subgradient_iterations_to_gap),
        );
        for id in &svc {
            match r.traffic.iter().find(|t| t.service == *id) {
                Some(t) => {
                    let _ = write!(s, ",{},{}", t.licensed_bps, t.unlicensed_bps);
                }
                None => s.push_str(",,"),
            }
        }
        s.push('\n');
    }
    s
}

/// Mean of `f` over the successful rows of each (sweep value, variant):
/// one column per variant.
fn series(
    axis: SweepAxis,
    variants: &[Variant],
    rows: &[ResultRow],
    f: impl Fn(&ResultRow) -> Option<f64>,
) -> String {
    let mut values: Vec<f64> = rows.iter().map(|r| r.sweep_value).collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let mut s = axis.to_string();
    for v in variants {
        let _ = write!(s, ",{v}");
    }
    s.push('\n');
    for x in values {
        let _ = write!(s, "{x}");
        for &v in variants {
            let ys: Vec<f64> = rows
                .iter()
                .filter(|r| r.sweep_value == x && r.variant == v && r.status == CellStatus::Ok)
                .filter_map(&f)
                .collect();
            if ys.is_empty() {
                s.push(',');
            } else {
                let _ = write!(s, ",{}", ys.iter().sum::<f64>() / ys.len() as f64);
            }
        }
        s.push('\n');
    }
    s
}

/// Admitted traffic against the sweep value for one service and band.
pub fn traffic_series(
    axis: SweepAxis,
    variants: &[Variant],
    rows: &[ResultRow],
    service: ServiceId,
    licensed: bool,
) -> String {
    series(axis, variants, rows, |r| {
        r.traffic
            .iter()
            .find(|t| t.service == service)
            .map(|t| if licensed { t.licensed_bps } else { t.unlicensed_bps })
    })
}

pub fn objective_series(axis: SweepAxis, variants: &[Variant], rows: &[ResultRow]) -> String {
    series(axis, variants, rows, |r| r.objective_admm)
}

/// `results.csv` and `series/*.csv` under `dir`.
pub fn write_report(variants: &[Variant], axis: SweepAxis, rows: &[ResultRow], dir: &Path) -> Result<(), CliError> {
    let write = |path: &Path, text: String| -> Result<(), CliError> {
        std::fs::write(path, text).map_err(|e| CliError::io(path, e))
    };
    write(&dir.join("results.csv"), results_csv(axis, rows))?;
    let sdir = dir.join("series");
    std::fs::create_dir_all(&sdir).map_err(|e| CliError::io(&sdir, e))?;
    write(&sdir.join("objective.csv"), objective_series(axis, variants, rows))?;
    for id in services(rows) {
        for (band, licensed) in [("licensed", true), ("unlicensed", false)] {
            write(
                &sdir.join(format!("traffic_s{id}_{band}.csv")),
                traffic_series(axis, variants, rows, id, licensed),
            )?;
        }
    }
    Ok(())
}
