//! Locale-independent numeric output and the CSV schemas.

use std::io::{Read, Write};
use std::path::Path;

use vasicek_core::asymptotics::LimitConstants;
use vasicek_core::estimators::EstimateTriple;
use vasicek_core::montecarlo::{scaled_errors, CellSummary, ReplicationRecord};
use vasicek_core::vasicek::{VasicekParams, VasicekPath};
use vasicek_core::{KernelSpec, TimeGrid};

use crate::error::CliError;

/// C's `%.17g`: 17 significant digits, fixed notation for decimal exponents
/// in `[-4, 17)`, trailing zeros removed. Enough digits to round-trip any
/// double.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let decimals = (16 - exp) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let m = trim_zeros(mantissa.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    t.to_string()
}

pub fn path_file_name(spec: &KernelSpec, grid: &TimeGrid, seed: u64) -> String {
    format!("{spec}_T{}_n{}_seed{seed}.csv", grid.horizon(), grid.intervals())
}

/// Parses `{token}_T{T}_n{n}_seed{seed}.csv` back into its parts.
pub fn parse_path_file_name(name: &str) -> Option<(KernelSpec, u64)> {
    let stem = name.strip_suffix(".csv")?;
    let (rest, seed) = stem.rsplit_once("_seed")?;
    let (rest, _n) = rest.rsplit_once("_n")?;
    let (token, _t) = rest.rsplit_once("_T")?;
    Some((token.parse().ok()?, seed.parse().ok()?))
}

pub fn write_path_csv(path: &VasicekPath, mut out: impl Write) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(&mut out);
    w.write_record(["t", "g", "x"])?;
    for i in 0..path.values.len() {
        w.write_record([num(path.grid.node(i)), num(path.driver.values[i]), num(path.values[i])])?;
    }
    w.flush()
}

/// A path read back from CSV: node times, optional driver values, solution.
#[derive(Debug, Clone)]
pub struct PathTable {
    pub grid: TimeGrid,
    pub g: Option<Vec<f64>>,
    pub x: Vec<f64>,
}

pub fn read_path_csv(file: &Path) -> Result<PathTable, CliError> {
    let mut raw = String::new();
    std::fs::File::open(file)
        .and_then(|mut f| f.read_to_string(&mut raw))
        .map_err(|e| CliError::Data(format!("{}: {e}", file.display())))?;
    let bad = |msg: String| CliError::Data(format!("{}: {msg}", file.display()));
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(raw.as_bytes());
    let headers = r.headers().map_err(|e| bad(e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let ti = col("t").ok_or_else(|| bad("missing column `t`".into()))?;
    let xi = col("x").ok_or_else(|| bad("missing column `x`".into()))?;
    let gi = col("g");
    let (mut t, mut x, mut g) = (Vec::new(), Vec::new(), Vec::new());
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let field = |i: usize| -> Result<f64, CliError> {
            let s = rec
                .get(i)
                .ok_or_else(|| bad(format!("row {}: missing field", line + 2)))?;
            s.parse()
                .map_err(|_| bad(format!("row {}: `{s}` is not a number", line + 2)))
        };
        t.push(field(ti)?);
        x.push(field(xi)?);
        if let Some(gi) = gi {
            g.push(field(gi)?);
        }
    }
    if t.len() < 3 {
        return Err(bad(format!("need at least 3 rows, got {}", t.len())));
    }
    let n = t.len() - 1;
    let horizon = t[n];
    let grid = TimeGrid::new(horizon, n).map_err(|e| bad(e.to_string()))?;
    for (i, &ti) in t.iter().enumerate() {
        if (ti - grid.node(i)).abs() > 1e-9 * horizon {
            return Err(bad(format!("row {}: t = {ti} is off the uniform grid", i + 2)));
        }
    }
    Ok(PathTable {
        grid,
        g: gi.map(|_| g),
        x,
    })
}

pub const ESTIMATE_HEADER: [&str; 10] = [
    "seed",
    "kernel",
    "theta",
    "mu",
    "T",
    "n",
    "variant",
    "theta_hat",
    "mu_hat",
    "alpha_hat",
];

pub const SCALED_HEADER: [&str; 3] = ["scaled_theta_err", "scaled_mu_err", "scaled_alpha_err"];

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn estimate_fields(
    seed: Option<u64>,
    spec: Option<&KernelSpec>,
    params: (Option<f64>, Option<f64>),
    e: &EstimateTriple,
) -> Vec<String> {
    vec![
        seed.map(|s| s.to_string()).unwrap_or_default(),
        spec.map(|s| s.to_string()).unwrap_or_default(),
        opt(params.0),
        opt(params.1),
        num(e.horizon),
        e.intervals.to_string(),
        e.variant.to_string(),
        num(e.theta_hat),
        num(e.mu_hat),
        num(e.alpha_hat),
    ]
}

pub fn raw_csv(spec: &KernelSpec, params: &VasicekParams, records: &[ReplicationRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = ESTIMATE_HEADER.to_vec();
    header.extend(SCALED_HEADER);
    header.push("status");
    w.write_record(&header).expect("in-memory write");
    let p = (Some(params.theta()), Some(params.mu()));
    for rec in records {
        let mut row = match rec.estimate() {
            Some(e) => {
                let mut row = estimate_fields(Some(rec.seed), Some(spec), p, e);
                let (a, b, c) = scaled_errors(e, params, spec.eta());
                row.extend([num(a), num(b), num(c)]);
                row
            }
            None => {
                let mut row = vec![
                    rec.seed.to_string(),
                    spec.to_string(),
                    num(params.theta()),
                    num(params.mu()),
                    num(rec.horizon),
                    rec.intervals.to_string(),
                    "extended".into(),
                ];
                row.resize(ESTIMATE_HEADER.len() + SCALED_HEADER.len(), String::new());
                row
            }
        };
        row.push(rec.status().into());
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

pub const SUMMARY_HEADER: [&str; 23] = [
    "kernel",
    "theta",
    "mu",
    "T",
    "n",
    "replications",
    "failures",
    "infinite",
    "theta_hat_mean",
    "theta_hat_median",
    "theta_hat_iqr",
    "mu_hat_mean",
    "mu_hat_median",
    "mu_hat_iqr",
    "alpha_hat_mean",
    "alpha_hat_median",
    "alpha_hat_iqr",
    "median_abs_theta_err",
    "median_abs_mu_err",
    "ks_theta",
    "ks_mu",
    "ks_alpha",
    "spearman_theta_mu",
];

pub fn summary_csv(spec: &KernelSpec, params: &VasicekParams, cells: &[CellSummary]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SUMMARY_HEADER).expect("in-memory write");
    for c in cells {
        let row = vec![
            spec.to_string(),
            num(params.theta()),
            num(params.mu()),
            num(c.horizon),
            c.intervals.to_string(),
            c.replications.to_string(),
            c.failures.to_string(),
            c.infinite.to_string(),
            num(c.theta_hat.mean),
            num(c.theta_hat.median),
            num(c.theta_hat.iqr),
            num(c.mu_hat.mean),
            num(c.mu_hat.median),
            num(c.mu_hat.iqr),
            num(c.alpha_hat.mean),
            num(c.alpha_hat.median),
            num(c.alpha_hat.iqr),
            num(c.median_abs_theta_err),
            num(c.median_abs_mu_err),
            num(c.ks_theta),
            num(c.ks_mu),
            num(c.ks_alpha),
            num(c.spearman_theta_mu),
        ];
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

pub const CONSTANTS_HEADER: &str = "kernel,theta,eta,lambda_sq,sigma_sq,var_zeta_inf";

pub fn constants_row(spec: &KernelSpec, c: &LimitConstants) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        spec.to_string(),
        num(c.theta),
        num(c.eta),
        num(c.lambda_sq),
        num(c.sigma_sq),
        num(c.var_zeta_inf),
    ])
    .expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}
