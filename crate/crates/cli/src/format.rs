//! Text renderings: fixed-width tables and CSV at 12 significant digits.

use std::fmt::Write as _;

use auxmarket::verification::{CheckRecord, VerificationReport};

use crate::solve::SolveOutput;

/// `%.12g`-style rendering: 12 significant digits, trailing zeros trimmed.
pub fn sig12(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(sig12).unwrap_or_default()
}

fn vector(w: &[f64]) -> String {
    let parts: Vec<String> = w.iter().map(|v| sig12(*v)).collect();
    format!("[{}]", parts.join(", "))
}

fn problem_name(out: &SolveOutput) -> String {
    serde_json::to_value(out.problem)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

pub fn solve_table(out: &SolveOutput) -> String {
    let mut rows: Vec<(&str, String)> = vec![("problem", problem_name(out)), ("case", out.case.clone())];
    if let Some(r) = out.regime {
        rows.push(("regime", serde_json::to_value(r).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()));
    }
    for (name, v) in [("alpha", out.alpha), ("beta_star", out.beta_star), ("d", out.d)] {
        if let Some(v) = v {
            rows.push((name, sig12(v)));
        }
    }
    rows.push(("nu1_star", sig12(out.nu1_star)));
    rows.push(("w_star", vector(&out.w_star)));
    rows.push(("x", sig12(out.x)));
    for (name, v) in [("L", out.lower), ("U", out.upper), ("rho", out.rho), ("value", out.value), ("value_years", out.value_years)] {
        if let Some(v) = v {
            rows.push((name, sig12(v)));
        }
    }
    rows.push(("wealth log drift", sig12(out.wealth.log_drift)));
    rows.push(("wealth log vol", sig12(out.wealth.log_vol)));
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter().fold(String::new(), |mut s, (k, v)| {
        let _ = writeln!(s, "{k:<width$}  {v}");
        s
    })
}

/// Header shared by `solve --format csv` and sweep output.
pub fn solve_csv_header(n_assets: usize) -> String {
    let mut cols = vec!["problem", "x", "L", "U", "rho", "c_net", "status", "case", "exponent", "nu1_star", "value"]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
    cols.extend((1..=n_assets).map(|i| format!("w{i}")));
    cols.join(",")
}

pub fn solve_csv_row(out: &SolveOutput, c_net: f64) -> String {
    let mut cells = vec![
        problem_name(out),
        sig12(out.x),
        opt(out.lower),
        opt(out.upper),
        opt(out.rho),
        sig12(c_net),
        "ok".into(),
        out.case.clone(),
        opt(out.exponent()),
        sig12(out.nu1_star),
        opt(out.headline()),
    ];
    cells.extend(out.w_star.iter().map(|v| sig12(*v)));
    cells.join(",")
}

/// Row for a grid point where the closed form does not apply.
pub fn failed_csv_row(problem: &str, inputs: [Option<f64>; 5], kind: &str, n_assets: usize) -> String {
    let mut cells: Vec<String> = vec![problem.to_string()];
    cells.extend(inputs.iter().map(|v| opt(*v)));
    cells.push(kind.to_string());
    cells.extend(std::iter::repeat_n(String::new(), 4 + n_assets));
    cells.join(",")
}

fn check_compare(c: &CheckRecord) -> String {
    match (c.closed_form, c.oracle, c.mc) {
        (Some(cf), Some(or), _) => format!("{} vs {}", sig12(cf), sig12(or)),
        (Some(cf), None, Some(mc)) => format!("{} vs {} ± {}", sig12(cf), sig12(mc.mean), sig12(mc.std_error)),
        (Some(cf), None, None) => sig12(cf),
        _ => String::new(),
    }
}

pub fn report_table(report: &VerificationReport) -> String {
    let name_w = report.checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
    let mut s = String::new();
    let _ = writeln!(s, "{:<name_w$}  {:<4}  {:<10}  {:<10}  comparison", "check", "ok", "tolerance", "worst");
    for c in &report.checks {
        let _ = writeln!(
            s,
            "{:<name_w$}  {:<4}  {:<10}  {:<10}  {}{}",
            c.name,
            if c.passed { "yes" } else { "NO" },
            sig12_short(c.tolerance),
            c.worst.map(sig12_short).unwrap_or_default(),
            check_compare(c),
            c.detail.as_ref().map(|d| format!("  ({d})")).unwrap_or_default()
        );
    }
    let _ = writeln!(s, "overall: {}", if report.passed { "PASS" } else { "FAIL" });
    s
}

fn sig12_short(v: f64) -> String {
    format!("{v:.3e}")
}

pub fn report_csv(report: &VerificationReport) -> String {
    let mut s = String::from("check,passed,tolerance,worst,closed_form,oracle,mc_mean,mc_std_error,mc_n_used,detail\n");
    for c in &report.checks {
        let detail = c.detail.as_deref().unwrap_or("").replace('"', "\"\"");
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},\"{}\"",
            c.name,
            c.passed,
            sig12(c.tolerance),
            opt(c.worst),
            opt(c.closed_form),
            opt(c.oracle),
            opt(c.mc.map(|m| m.mean)),
            opt(c.mc.map(|m| m.std_error)),
            c.mc.map(|m| m.n_used.to_string()).unwrap_or_default(),
            detail
        );
    }
    s
}
