//! Serialization of spectra, sweep tables and crossing reports.

use std::fmt::Write as _;

use j1j2::sweep::{grid_derivative, CrossingKind, CrossingReport, LevelObservables, SweepFailure, SweepTable};
use j1j2::LowSpectrum;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Observable, RunConfig};

pub const CSV_COLUMNS: [&str; 18] = [
    "j2", "level", "energy", "degeneracy", "c_nn", "c_nnn", "dg_nn", "dg_nnn", "qd_nn", "qd_nnn", "sl_nn", "f_nn", "f_nnn",
    "e1_nn", "e1_nnn", "total_f", "exe", "flags",
];

type Column = Vec<Option<f64>>;

pub const DERIVATIVE_COLUMNS: [&str; 6] = ["j2", "level", "fh_c_nn", "fh_c_nnn", "d_energy", "d_dg_nn"];

/// 12 significant digits, shortest of fixed or exponent notation, `NA` for
/// non-finite values. Never locale dependent.
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return "NA".into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn opt_num(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".into(), fmt_num)
}

fn json_num(x: f64) -> Value {
    if x.is_finite() { json!(x) } else { Value::Null }
}

/// Observable values in CSV column order (`energy` .. `exe`), with
/// unrequested groups blanked to NaN.
fn level_values(cfg: &RunConfig, o: &LevelObservables) -> [(&'static str, f64); 15] {
    let pick = |group: Observable, v: f64| if cfg.wants(group) { v } else { f64::NAN };
    use Observable::*;
    [
        ("energy", pick(Energy, o.energy)),
        ("degeneracy", o.degeneracy as f64),
        ("c_nn", pick(Correlators, o.c_nn)),
        ("c_nnn", pick(Correlators, o.c_nnn)),
        ("dg_nn", pick(Gmqd, o.dg_nn)),
        ("dg_nnn", pick(Gmqd, o.dg_nnn)),
        ("qd_nn", pick(Qd, o.qd_nn)),
        ("qd_nnn", pick(Qd, o.qd_nnn)),
        ("sl_nn", pick(Entropy, o.sl_nn)),
        ("f_nn", pick(Frustration, o.f_nn)),
        ("f_nnn", pick(Frustration, o.f_nnn)),
        ("e1_nn", pick(Frustration, o.e1_nn)),
        ("e1_nnn", pick(Frustration, o.e1_nnn)),
        ("total_f", pick(Frustration, o.total_f)),
        ("exe", pick(Exe, o.exe)),
    ]
}

pub fn sweep_csv(cfg: &RunConfig, table: &SweepTable) -> String {
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    for row in &table.rows {
        for o in &row.levels {
            let _ = write!(out, "{},{}", fmt_num(row.j2), o.level);
            for (name, v) in level_values(cfg, o) {
                if name == "degeneracy" {
                    let _ = write!(out, ",{}", o.degeneracy);
                } else {
                    let _ = write!(out, ",{}", fmt_num(v));
                }
            }
            let _ = writeln!(out, ",{}", o.flags.labels().join("|"));
        }
    }
    out
}

pub fn sweep_json(cfg: &RunConfig, table: &SweepTable) -> Value {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .flat_map(|row| {
            row.levels.iter().map(move |o| {
                let mut m = serde_json::Map::new();
                m.insert("j2".into(), json!(row.j2));
                m.insert("level".into(), json!(o.level));
                for (name, v) in level_values(cfg, o) {
                    let v = if name == "degeneracy" { json!(o.degeneracy) } else { json_num(v) };
                    m.insert(name.into(), v);
                }
                m.insert("flags".into(), json!(o.flags.labels()));
                Value::Object(m)
            })
        })
        .collect();
    json!({ "n_sites": table.n_sites, "columns": CSV_COLUMNS, "rows": rows })
}

/// Couplings that break derivative stencils of `level`.
fn breaks_for(level: usize, reports: &[CrossingReport]) -> Vec<f64> {
    reports
        .iter()
        .filter(|r| match r.kind {
            CrossingKind::GsKink => true,
            CrossingKind::EsCrossing => r.level == level,
            CrossingKind::GmqdJump => false,
        })
        .map(|r| r.j2)
        .collect()
}

/// Slope data: energy-slope correlators and grid derivatives, `NA` near kinks.
pub fn derivative_csv(table: &SweepTable, reports: &[CrossingReport]) -> String {
    let mut out = DERIVATIVE_COLUMNS.join(",");
    out.push('\n');
    let j2 = table.j2();
    let levels = table.rows.iter().map(|r| r.levels.len()).min().unwrap_or(0);
    let columns: Vec<(Column, Column)> = (0..levels)
        .map(|l| {
            let breaks = breaks_for(l, reports);
            let energy: Vec<Option<f64>> = table.rows.iter().map(|r| Some(r.levels[l].energy)).collect();
            let dg: Vec<Option<f64>> = table.rows.iter().map(|r| Some(r.levels[l].dg_nn)).collect();
            (grid_derivative(&j2, &energy, &breaks), grid_derivative(&j2, &dg, &breaks))
        })
        .collect();
    for (i, row) in table.rows.iter().enumerate() {
        for (l, o) in row.levels.iter().enumerate().take(levels) {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                fmt_num(row.j2),
                l,
                opt_num(o.fh_c_nn),
                opt_num(o.fh_c_nnn),
                opt_num(columns[l].0[i]),
                opt_num(columns[l].1[i]),
            );
        }
    }
    out
}

/// A matplotlib script that plots the sweep table it sits next to.
pub fn plot_script(csv_name: &str) -> String {
    format!(
        r#"# Plots the sweep table {csv_name}. Edit freely.
import csv
import sys

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "{csv_name}"
rows = list(csv.DictReader(open(path)))
columns = ["energy", "dg_nn", "qd_nn", "f_nn", "f_nnn", "exe"]
fig, axes = plt.subplots(2, 3, figsize=(12, 7), sharex=True)
for ax, col in zip(axes.flat, columns):
    for level in sorted({{r["level"] for r in rows}}):
        pts = [(float(r["j2"]), float(r[col])) for r in rows if r["level"] == level and r[col] != "NA"]
        if pts:
            x, y = zip(*pts)
            ax.plot(x, y, label=f"level {{level}}")
    ax.set_title(col)
    ax.set_xlabel("J2")
axes.flat[0].legend()
fig.tight_layout()
plt.show()
"#
    )
}

#[derive(Serialize)]
struct LevelEntry<'a> {
    index: usize,
    energy: f64,
    degeneracy: usize,
    /// Up-spin counts of the Sz sectors holding each member.
    sector_tags: &'a [usize],
}

pub fn spectrum_json(j2: f64, s: &LowSpectrum) -> Value {
    let levels: Vec<LevelEntry> = s
        .levels
        .iter()
        .enumerate()
        .map(|(index, l)| LevelEntry {
            index,
            energy: l.energy,
            degeneracy: l.degeneracy,
            sector_tags: &l.sector_tags,
        })
        .collect();
    json!({ "n_sites": s.n_sites, "j2": j2, "degeneracy_tol": s.degeneracy_tol, "levels": levels })
}

pub fn spectrum_csv(s: &LowSpectrum) -> String {
    let mut out = String::from("level,energy,degeneracy\n");
    for (i, l) in s.levels.iter().enumerate() {
        let _ = writeln!(out, "{i},{},{}", fmt_num(l.energy), l.degeneracy);
    }
    out
}

pub fn crossings_json(cfg: &RunConfig, reports: &[CrossingReport]) -> Value {
    json!({
        "n_sites": cfg.n_sites,
        "j2_min": cfg.j2_min,
        "j2_max": cfg.j2_max,
        "steps": cfg.steps,
        "crossings": reports,
    })
}

pub fn summary_json(cfg: &RunConfig, table: &SweepTable, reports: &[CrossingReport], failures: &[SweepFailure]) -> Value {
    json!({
        "n_sites": cfg.n_sites,
        "rows": table.rows.len(),
        "failed_points": failures.len(),
        "crossings": reports,
        "config": cfg,
    })
}

pub fn error_manifest(completed: usize, failures: &[SweepFailure]) -> Value {
    json!({ "completed_rows": completed, "failures": failures })
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(2.0 / 9.0), "0.222222222222");
        assert_eq!(fmt_num(-2.802775637731995), "-2.80277563773");
        assert_eq!(fmt_num(0.5), "0.5");
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(-1.7), "-1.7");
        assert_eq!(fmt_num(1.0e-7), "1e-7");
        assert_eq!(fmt_num(3.0e-17), "3e-17");
        assert_eq!(fmt_num(123456789012345.0), "1.23456789012e14");
        assert_eq!(fmt_num(f64::NAN), "NA");
        assert_eq!(fmt_num(0.99999999999999), "1");
    }

    #[test]
    fn column_schema() {
        assert_eq!(
            CSV_COLUMNS.join(","),
            "j2,level,energy,degeneracy,c_nn,c_nnn,dg_nn,dg_nnn,qd_nn,qd_nnn,sl_nn,f_nn,f_nnn,e1_nn,e1_nnn,total_f,exe,flags"
        );
    }
}
