//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Experiment artifacts are kept under the cargo target
//! temp directory for inspection.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command as Process;
use std::time::Instant;

use vasicek_core::asymptotics::{empirical_assumption_check, klm_integrals, limit_constants, sample_theta_limit};
use vasicek_core::calculus::ibp_residual;
use vasicek_core::estimators::{estimate, estimate_young, remainder_rt};
use vasicek_core::montecarlo::ExperimentConfig;
use vasicek_core::rng::derive_seed;
use vasicek_core::sampler::{PathFactor, PathSampler};
use vasicek_core::special::normal_cdf;
use vasicek_core::stats::{iqr, ks_one_sample, ks_two_sample, median, spearman};
use vasicek_core::vasicek::{explicit_solution, functionals, Scheme, VasicekParams};
use vasicek_core::{KernelSpec, TimeGrid};
use vasicek_lse::commands::{load_manifest, Command, ConstantsArgs, ExperimentArgs};
use vasicek_lse::config::ExperimentFile;
use vasicek_lse::{build_sampler, SamplerChoice};

const BASE_SEED: u64 = 20240601;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn artifacts() -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

/// A parsed CSV: header index and string rows.
struct Table {
    index: HashMap<String, usize>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn read(path: &Path) -> Table {
        let mut r = csv::Reader::from_path(path).unwrap();
        let index = r
            .headers()
            .unwrap()
            .iter()
            .enumerate()
            .map(|(i, h)| (h.to_string(), i))
            .collect();
        let rows = r
            .records()
            .map(|rec| rec.unwrap().iter().map(String::from).collect())
            .collect();
        Table { index, rows }
    }

    fn column(&self, name: &str, filter: impl Fn(&[String]) -> bool) -> Vec<f64> {
        let i = self.index[name];
        self.rows
            .iter()
            .filter(|r| filter(r))
            .map(|r| r[i].parse().unwrap())
            .collect()
    }

    fn at_horizon(&self, name: &str, t: f64) -> Vec<f64> {
        let (ti, si) = (self.index["T"], self.index["status"]);
        self.column(name, |r| r[si] == "ok" && r[ti].parse::<f64>().unwrap() == t)
    }
}

struct Experiment {
    dir: PathBuf,
    command: Command,
    raw: Table,
    summary: Table,
}

fn experiment(
    root: &Path,
    name: &str,
    kernel: &str,
    horizons: Vec<(f64, usize)>,
    replications: usize,
    mu: f64,
) -> Experiment {
    let config = ExperimentFile {
        kernel: kernel.into(),
        theta: 1.0,
        mu,
        horizons,
        replications,
        base_seed: BASE_SEED,
        scheme: "explicit".into(),
        sampler: "auto".into(),
    };
    let command = Command::Experiment(ExperimentArgs { config, svg: true });
    let dir = root.join(name);
    command.execute(Some(&dir), None).unwrap();
    Experiment {
        raw: Table::read(&dir.join("raw.csv")),
        summary: Table::read(&dir.join("summary.csv")),
        dir,
        command,
    }
}

fn a1() -> Verdict {
    let start = Instant::now();
    let constants = |kernel: &str, theta: &str| -> HashMap<String, f64> {
        let out = Process::new(env!("CARGO_BIN_EXE_vasicek-lse"))
            .args(["constants", kernel, "--theta", theta])
            .output()
            .unwrap();
        let text = String::from_utf8(out.stdout).unwrap();
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        header
            .iter()
            .zip(row)
            .filter_map(|(h, v)| v.parse().ok().map(|v| (h.to_string(), v)))
            .collect()
    };
    let fbm = constants("fbm:H=0.5", "2");
    let sub = constants("subfbm:H=0.5", "1");
    let (k, l, m) = klm_integrals(0.5, 1.0).unwrap();
    let checks = [
        (fbm["sigma_sq"], 0.25),
        (fbm["var_zeta_inf"], 0.25),
        (fbm["lambda_sq"], 1.0),
        (sub["sigma_sq"], 0.5),
        (sub["var_zeta_inf"], 0.5),
        (sub["lambda_sq"], 1.0),
        (k, 1.0),
        (l, 1.0),
        (m, 2.0),
    ];
    let worst = checks
        .iter()
        .map(|(got, want)| ((got - want) / want).abs())
        .fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst <= 1e-10 && secs < 1.0,
        format!("max rel err {worst:.3e} (≤ 1e-10), {secs:.2}s (< 1s)"),
    )
}

fn a2() -> Verdict {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for h in [0.1, 0.3, 0.5, 0.7, 0.9] {
        for theta in [0.5, 1.0, 2.0] {
            let (k, l, m) = klm_integrals(h, theta).unwrap();
            let (bk, bl, bm) = support::klm_brute_force(h, theta);
            for (a, b) in [(k, bk), (l, bl), (m, bm)] {
                worst = worst.max(((a - b) / b).abs());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst < 1e-6 && secs < 30.0,
        format!("max rel err {worst:.3e} (< 1e-6) over 15 cells, {secs:.1}s (< 30s)"),
    )
}

fn a3() -> Verdict {
    let start = Instant::now();
    let reps = 20_000u64;
    let grid = TimeGrid::new(4.0, 256).unwrap();
    let n = grid.intervals();
    let mut pass = true;
    let mut parts = Vec::new();
    for (spec, lambda_sq) in [
        (KernelSpec::fbm(0.7).unwrap(), 1.0),
        (KernelSpec::subfbm(0.3).unwrap(), 2.0 - 2f64.powf(-0.4)),
        (KernelSpec::bifbm(0.6, 0.8).unwrap(), 1.0),
    ] {
        let f = PathFactor::build(spec, grid).unwrap();
        let pairs = n * (n + 1) / 2;
        let (mut s1, mut s2) = (vec![0.0; pairs], vec![0.0; pairs]);
        let mut path = vec![0.0; n + 1];
        for seed in 0..reps {
            f.sample_into(seed, &mut path);
            let mut k = 0;
            for i in 1..=n {
                let pi = path[i];
                for pj in &path[i..=n] {
                    let p = pi * pj;
                    s1[k] += p;
                    s2[k] += p * p;
                    k += 1;
                }
            }
        }
        let (mut worst, mut outside, mut k) = (0.0f64, 0, 0);
        for i in 1..=n {
            for j in i..=n {
                let mean = s1[k] / reps as f64;
                let var = (s2[k] - reps as f64 * mean * mean) / (reps - 1) as f64;
                let z =
                    (mean - spec.covariance(grid.node(i), grid.node(j)).unwrap()).abs() / (var / reps as f64).sqrt();
                worst = worst.max(z);
                outside += usize::from(z >= 4.0);
                k += 1;
            }
        }
        let terminal = s1[k - 1] / reps as f64 / 4f64.powf(2.0 * spec.eta());
        let growth_err = (terminal / lambda_sq - 1.0).abs();
        let ok = outside == 0 && growth_err < 0.02;
        pass &= ok;
        parts.push(format!(
            "{spec}: max |z| {worst:.2} ({outside} of {pairs} ≥ 4), growth {terminal:.4} vs {lambda_sq:.6} ({:.2}%)",
            100.0 * growth_err
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 300.0;
    verdict(pass, format!("{}; {secs:.1}s (< 300s)", parts.join("; ")))
}

fn a4(e: &Experiment) -> Verdict {
    let scaled = e.raw.at_horizon("scaled_theta_err", 5.0);
    let c = limit_constants(&KernelSpec::fbm(0.5).unwrap(), 1.0).unwrap();
    let draws: Vec<f64> = (0..200_000u64)
        .map(|i| sample_theta_limit(&c, 2.0, derive_seed(BASE_SEED, &[4, i])))
        .collect();
    let ks = ks_two_sample(&scaled, &draws).unwrap();
    let dm = (median(&scaled) - median(&draws)).abs();
    let ratio = iqr(&scaled) / iqr(&draws);
    verdict(
        ks < 0.15 && dm <= 0.05 && (0.7..=1.4).contains(&ratio),
        format!(
            "n={} KS {ks:.4} (< 0.15), |Δmedian| {dm:.4} (≤ 0.05), IQR ratio {ratio:.3} (in [0.7, 1.4])",
            scaled.len()
        ),
    )
}

fn a5(runs: &[(&str, f64, &Experiment)]) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, lambda_sq, e) in runs {
        let sd = lambda_sq.sqrt();
        let ks_mu = ks_one_sample(&e.raw.at_horizon("scaled_mu_err", 8.0), |x| normal_cdf(x / sd)).unwrap();
        let ks_alpha = ks_one_sample(&e.raw.at_horizon("scaled_alpha_err", 8.0), |x| normal_cdf(x / sd)).unwrap();
        pass &= ks_mu < 0.10 && ks_alpha < 0.10;
        parts.push(format!("{name}: KS μ {ks_mu:.4}, KS α {ks_alpha:.4}"));
    }
    verdict(pass, format!("{} (each < 0.10)", parts.join("; ")))
}

fn a6(runs: &[(&str, f64, &Experiment)]) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, _, e) in runs {
        let rho = spearman(
            &e.raw.at_horizon("scaled_theta_err", 8.0),
            &e.raw.at_horizon("scaled_mu_err", 8.0),
        )
        .unwrap();
        pass &= rho.abs() < 0.1;
        parts.push(format!("{name}: ρ {rho:.4}"));
    }
    verdict(pass, format!("{} (|ρ| < 0.1)", parts.join("; ")))
}

fn a7(runs: &[(&str, f64, &Experiment)]) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, _, e) in runs {
        let th = e.summary.column("median_abs_theta_err", |_| true);
        let mu = e.summary.column("median_abs_mu_err", |_| true);
        let decreasing = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
        let ok = decreasing(&th) && decreasing(&mu) && th[2] < 0.02 && mu[2] < 0.2;
        pass &= ok;
        let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" > ");
        parts.push(format!("{name}: |θ̃−θ| {} ; |μ̃−μ| {}", fmt(&th), fmt(&mu)));
    }
    verdict(
        pass,
        format!("{} (T = 4, 6, 8; at T=8 θ < 0.02, μ < 0.2)", parts.join("; ")),
    )
}

fn a8() -> Verdict {
    let t = 5.0;
    let spec = KernelSpec::fbm(0.75).unwrap();
    let sampler = build_sampler(spec, TimeGrid::new(t, 4096).unwrap(), SamplerChoice::Auto).unwrap();
    let params = VasicekParams::new(1.0, 1.0).unwrap();
    let (mut bound_ok, mut close) = (0, 0);
    let mut rel = Vec::new();
    for r in 0..100u64 {
        let x = explicit_solution(params, sampler.sample(derive_seed(BASE_SEED, &[8, r]))).unwrap();
        let (young, ext) = (estimate_young(&x).unwrap(), estimate(&x).unwrap());
        let f = functionals(&x);
        let den = t * f.int_x2 - f.int_x * f.int_x;
        let bound = t * ibp_residual(&x.as_gridded(), &x.as_gridded()).unwrap().abs() / den;
        let diff = (young.theta_hat - ext.theta_hat).abs();
        bound_ok += usize::from(diff <= bound * (1.0 + 1e-9));
        let rd = diff / ext.theta_hat.abs();
        close += usize::from(rd < 1e-3);
        rel.push(rd);
    }
    verdict(
        bound_ok == 100 && close >= 95,
        format!(
            "bound holds on {bound_ok}/100 paths; rel diff < 1e-3 on {close}/100 (need 95), median rel diff {:.4e}",
            median(&rel)
        ),
    )
}

fn a9() -> Verdict {
    let cfg = ExperimentConfig {
        spec: KernelSpec::fbm(0.5).unwrap(),
        params: VasicekParams::new(1.0, 1.0).unwrap(),
        horizons: vec![(4.0, 4096), (6.0, 4096), (8.0, 4096)],
        replications: 200,
        base_seed: BASE_SEED,
        scheme: Scheme::Explicit,
    };
    let mut means = Vec::new();
    for (h, &(t, _)) in cfg.horizons.iter().enumerate() {
        let sampler = build_sampler(cfg.spec, cfg.grid(h).unwrap(), SamplerChoice::Auto).unwrap();
        let total: f64 = (0..cfg.replications)
            .map(|r| {
                let x = explicit_solution(cfg.params, sampler.sample(cfg.child_seed(h, r))).unwrap();
                ((-t).exp() * remainder_rt(&x)).abs()
            })
            .sum();
        means.push(total / cfg.replications as f64);
    }
    let ok = means.windows(2).all(|w| w[1] < w[0]);
    let fmt: Vec<String> = means.iter().map(|m| format!("{m:.4e}")).collect();
    verdict(
        ok,
        format!(
            "mean |e^(−θT) R_T| at T = 4, 6, 8: {} (strictly decreasing)",
            fmt.join(" > ")
        ),
    )
}

fn a10() -> Verdict {
    let start = Instant::now();
    let horizons = [4.0, 8.0, 12.0, 25.0, 50.0];
    let mut pass = true;
    let mut parts = Vec::new();
    for spec in [
        KernelSpec::fbm(0.7).unwrap(),
        KernelSpec::subfbm(0.3).unwrap(),
        KernelSpec::bifbm(0.6, 0.8).unwrap(),
    ] {
        let rows = empirical_assumption_check(&spec, 1.0, &horizons).unwrap();
        let closed = match spec.family() {
            vasicek_core::Family::SubFbm => 2.0 - 2f64.powf(2.0 * spec.hurst() - 1.0),
            _ => 1.0,
        };
        let a = rows.iter().map(|r| (r.growth - closed).abs()).fold(0.0, f64::max);
        let at12 = rows.iter().find(|r| r.horizon == 12.0).unwrap();
        let b = (at12.variance / at12.sigma_sq - 1.0).abs();
        let last = rows.last().unwrap();
        let (c, d) = (last.cross_fixed.abs(), last.cross_terminal.abs());
        let oks = [a <= 1e-12, b < 0.02, c < 0.05, d < 0.05];
        pass &= oks.iter().all(|x| *x);
        let mark = |ok: bool| if ok { "ok" } else { "FAIL" };
        parts.push(format!(
            "{spec}: (a) {a:.1e} {} (b) {:.4}/{:.4} {:.2}% {} (c) {c:.4} {} (d) {d:.4} {}",
            mark(oks[0]),
            at12.variance,
            at12.sigma_sq,
            100.0 * b,
            mark(oks[1]),
            mark(oks[2]),
            mark(oks[3])
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 120.0;
    verdict(pass, format!("{}; {secs:.1}s (< 120s)", parts.join("; ")))
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

fn a11(root: &Path, runs: &[(&str, &Path, &Command)]) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, dir, original) in runs {
        let manifest = load_manifest(dir).unwrap();
        let same_command = &manifest.command == *original;
        let mut identical = true;
        for workers in [1, 3] {
            let replay = root.join(format!("{name}-replay-w{workers}"));
            manifest.command.execute(Some(&replay), Some(workers)).unwrap();
            identical &= csv_files(dir) == csv_files(&replay);
        }
        pass &= same_command && identical;
        parts.push(format!(
            "{name}: {}",
            if same_command && identical {
                "identical"
            } else {
                "DIFFERENT"
            }
        ));
    }
    verdict(pass, format!("replayed with 1 and 3 workers: {}", parts.join(", ")))
}

fn main() {
    let root = artifacts();
    let mut results: Vec<(&str, Verdict)> = Vec::new();
    let mut report = |id: &'static str, v: Verdict| {
        println!("{id:<3} {} {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        results.push((id, v));
    };

    report("A1", a1());
    report("A2", a2());
    report("A3", a3());

    let e4 = experiment(&root, "a4-fbm", "fbm:H=0.5", vec![(5.0, 16_384)], 2000, 2.0);
    report("A4", a4(&e4));

    let horizons = vec![(4.0, 4096), (6.0, 4096), (8.0, 4096)];
    let fbm = experiment(&root, "a5-fbm", "fbm:H=0.5", horizons.clone(), 1000, 2.0);
    let sub = experiment(&root, "a5-subfbm", "subfbm:H=0.3", horizons, 1000, 2.0);
    let runs = [("fbm:H=0.5", 1.0, &fbm), ("subfbm:H=0.3", 2.0 - 2f64.powf(-0.4), &sub)];
    report("A5", a5(&runs));
    report("A6", a6(&runs));
    report("A7", a7(&runs));
    report("A8", a8());
    report("A9", a9());
    report("A10", a10());

    let constants_dir = root.join("a1-constants");
    let constants = Command::Constants(ConstantsArgs {
        kernel: "fbm:H=0.5".into(),
        theta: 2.0,
    });
    constants.execute(Some(&constants_dir), None).unwrap();
    report(
        "A11",
        a11(
            &root,
            &[
                ("a1-constants", &constants_dir, &constants),
                ("a4-fbm", &e4.dir, &e4.command),
                ("a5-fbm", &fbm.dir, &fbm.command),
                ("a5-subfbm", &sub.dir, &sub.command),
            ],
        ),
    );

    let failed: Vec<&str> = results.iter().filter(|(_, v)| !v.pass).map(|(id, _)| *id).collect();
    println!("artifacts: {}", root.display());
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", results.len());
    } else {
        println!(
            "acceptance: {} of {} criteria fail: {}",
            failed.len(),
            results.len(),
            failed.join(", ")
        );
        std::process::exit(1);
    }
}
