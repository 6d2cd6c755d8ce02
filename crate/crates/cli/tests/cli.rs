use std::collections::HashMap;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use blockcorr::analytic::{critical_density, rho_inf_no_blockage_boundary, rho_no_blockage};
use blockcorr::{AnalyticOptions, MobilityMode, NetworkParams, PointKind};
use blockcorr_cli::args::{Cli, Command as Sub};
use blockcorr_cli::sweep::{cmd_sweep, row_is, SweepRow};
use clap::Parser;

struct Table {
    meta: HashMap<String, String>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn parse(text: &str) -> Self {
        let meta = text
            .lines()
            .filter_map(|l| l.strip_prefix("# "))
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let header = rdr.headers().unwrap().iter().map(String::from).collect();
        let rows = rdr
            .records()
            .map(|r| r.unwrap().iter().map(String::from).collect())
            .collect();
        Self { meta, header, rows }
    }

    fn col(&self, name: &str) -> usize {
        self.header.iter().position(|h| h == name).unwrap()
    }

    fn value(&self, row: usize, name: &str) -> f64 {
        self.rows[row][self.col(name)].parse().unwrap()
    }
}

fn blockcorr(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_blockcorr"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn ok(args: &[&str]) -> Table {
    let (code, stdout, stderr) = blockcorr(args);
    assert_eq!(code, 0, "{args:?}: {stderr}");
    Table::parse(&stdout)
}

const BASE: [&str; 10] = [
    "--lambda",
    "1",
    "--gamma",
    "1",
    "--xi",
    "1",
    "--alpha",
    "2",
    "--halflen",
    "25",
];

fn with_base<'a>(cmd: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![cmd];
    v.extend_from_slice(&BASE);
    v.extend_from_slice(extra);
    v
}

#[test]
fn eval_without_blockage_gives_half() {
    let t = ok(&with_base("eval", &["--mu", "0"]));
    assert_eq!(
        t.header,
        [
            "point",
            "method",
            "mean",
            "second_moment",
            "sigma",
            "sigma1",
            "sigma2",
            "rho0",
            "rho_inf"
        ]
    );
    assert!((t.value(0, "rho0") - 0.5).abs() < 1e-12);
    assert!((t.value(0, "mean") - 3.92).abs() < 1e-12);
    assert_eq!(t.meta["mu"], "0");
    assert_eq!(t.meta["point"], "center");
}

#[test]
fn eval_boundary_without_blockage_is_about_half_the_center() {
    let center = ok(&with_base("eval", &["--mu", "0"])).value(0, "rho_inf");
    let boundary = ok(&with_base("eval", &["--mu", "0", "--point", "boundary"]));
    let b = boundary.value(0, "rho_inf");
    assert!(((b / center) - 0.5).abs() < 0.03, "{b} vs {center}");
    let p = NetworkParams::new(1.0, 0.0, 1.0, 1.0, 2.0, 25.0).unwrap();
    assert!((b - rho_inf_no_blockage_boundary(&p).unwrap()).abs() < 1e-6);
    assert!((boundary.value(0, "rho0") - 0.5).abs() < 1e-12);
}

#[test]
fn eval_rejects_invalid_parameters() {
    let (code, stdout, stderr) = blockcorr(&["eval", "--lambda", "0", "--mu", "1"]);
    assert_eq!(code, 2);
    assert!(stdout.is_empty());
    assert!(stderr.contains("lambda must be positive"), "{stderr}");
    let (code, _, stderr) = blockcorr(&["eval", "--point", "left"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("invalid point"));
    let (code, _, _) = blockcorr(&["eval", "--bogus"]);
    assert_eq!(code, 2);
}

#[test]
fn eval_high_mu_adds_expansion_row() {
    let t = ok(&with_base("eval", &["--mu", "10", "--high-mu"]));
    assert_eq!(t.rows.len(), 2);
    assert_eq!(t.rows[0][t.col("method")], "exact");
    assert_eq!(t.rows[1][t.col("method")], "high_mu_expansion");
    assert_eq!(t.rows[1][t.col("mean")], "");
    let (e, h) = (t.value(0, "rho_inf"), t.value(1, "rho_inf"));
    assert!((h - e).abs() / e < 0.05);
    let (code, _, _) = blockcorr(&with_base("eval", &["--mu", "0", "--high-mu"]));
    assert_eq!(code, 2);
}

#[test]
fn eval_general_point_accepts_negative_coordinates() {
    let a = ok(&with_base("eval", &["--mu", "1", "--point", "-5"]));
    let b = ok(&with_base("eval", &["--mu", "1", "--point", "5"]));
    assert_eq!(a.meta["point"], "-5");
    assert!((a.value(0, "rho_inf") - b.value(0, "rho_inf")).abs() < 1e-9);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# test\nmu = 0\nxi = 0.4\nhalflen = 25\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let t = ok(&["eval", "--config", cfg]);
    assert!((t.value(0, "rho0") - 0.2).abs() < 1e-12);
    assert_eq!(t.meta["xi"], "0.4");
    let t = ok(&["eval", "--config", cfg, "--xi", "1"]);
    assert!((t.value(0, "rho0") - 0.5).abs() < 1e-12);
    assert_eq!(t.meta["xi"], "1");

    std::fs::write(dir.path().join("bad.cfg"), "colour = red\n").unwrap();
    let bad = dir.path().join("bad.cfg");
    let (code, _, stderr) = blockcorr(&["eval", "--config", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(stderr.contains("unknown key"));
}

#[test]
fn sweep_golden_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let (code, stdout, stderr) = blockcorr(&[
        "sweep",
        "--axis",
        "lambda",
        "--grid",
        "0.5,1,2",
        "--mu",
        "1",
        "--gamma",
        "0.5",
        "--xi",
        "0.8",
        "--alpha",
        "2",
        "--halflen",
        "10",
        "--mode",
        "iid",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    let golden = format!(
        "# generator=blockcorr {}\n\
         # command=sweep\n\
         # lambda=1\n\
         # mu=1\n\
         # gamma=0.5\n\
         # xi=0.8\n\
         # alpha=2\n\
         # halflen=10\n\
         # tx_power=1\n\
         # axis=lambda\n\
         # grid=0.5;1;2\n\
         # curves=1\n\
         # points=center\n\
         # modes=iid\n\
         # method=exact\n\
         # i0=quadrature\n\
         axis_value,lambda,mu,halflen,point,mode,rho0,rho_inf,rho,method\n",
        env!("CARGO_PKG_VERSION")
    );
    assert!(text.starts_with(&golden), "{text}");
    let t = Table::parse(&text);
    assert_eq!(t.rows.len(), 3);
    for (i, lambda) in [0.5, 1.0, 2.0].iter().enumerate() {
        assert_eq!(t.value(i, "axis_value"), *lambda);
        assert_eq!(t.value(i, "lambda"), *lambda);
        assert_eq!(t.value(i, "rho"), t.value(i, "rho_inf"));
        assert_eq!(t.rows[i].len(), t.header.len());
    }
}

#[test]
fn sweep_usage_errors() {
    let (code, _, stderr) = blockcorr(&["sweep", "--axis", "mu", "--grid", ""]);
    assert_eq!(code, 2);
    assert!(stderr.contains("grid is empty"), "{stderr}");
    let (code, _, _) = blockcorr(&["sweep", "--axis", "mu", "--grid", "2,1"]);
    assert_eq!(code, 2);
    let (code, _, _) = blockcorr(&["sweep", "--axis", "mu", "--grid-min", "1"]);
    assert_eq!(code, 2);
    let (code, _, stderr) = blockcorr(&["sweep", "--preset", "fig1", "--mu", "3"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("fixed by preset"));
    let (code, _, _) = blockcorr(&["sweep", "--grid", "1,2"]);
    assert_eq!(code, 2);
}

#[test]
fn failed_sweep_leaves_no_partial_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig1.csv");
    // The μ = 0 curve has no large-blockage expansion.
    let (code, _, _) = blockcorr(&[
        "sweep",
        "--preset",
        "fig1",
        "--high-mu",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_ne!(code, 0);
    assert!(!out.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);

    std::fs::write(&out, "previous").unwrap();
    let (code, _, _) = blockcorr(&[
        "sweep",
        "--preset",
        "fig1",
        "--high-mu",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_ne!(code, 0);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), "previous");
}

#[test]
fn unwritable_output_is_an_io_error() {
    let (code, _, stderr) = blockcorr(&["critical", "--mu", "10", "--out", "/nonexistent-dir/x.csv"]);
    assert_eq!(code, 1);
    assert!(stderr.contains("i/o error"));
}

fn preset_rows(preset: &str, out: &Path) -> Vec<SweepRow> {
    let cli = Cli::try_parse_from([
        "blockcorr",
        "sweep",
        "--preset",
        preset,
        "--out",
        out.to_str().unwrap(),
    ])
    .unwrap();
    let Sub::Sweep(args) = cli.command else {
        unreachable!()
    };
    let start = Instant::now();
    let rows = cmd_sweep(&args).unwrap();
    // Wall-clock bound for the analytic presets, measured with the default pool.
    assert!(
        start.elapsed().as_secs() < 60,
        "{preset} took {:?}",
        start.elapsed()
    );
    let t = Table::parse(&std::fs::read_to_string(out).unwrap());
    assert_eq!(t.rows.len(), rows.len());
    assert_eq!(t.meta["preset"], preset);
    rows
}

fn curve(rows: &[SweepRow], pick: impl Fn(&SweepRow) -> bool) -> Vec<(f64, f64)> {
    rows.iter()
        .filter(|r| pick(r))
        .map(|r| (r.axis_value, r.rho()))
        .collect()
}

#[test]
fn fig1_curves_cross_near_critical_density() {
    let dir = tempfile::tempdir().unwrap();
    let rows = preset_rows("fig1", &dir.path().join("fig1.csv"));
    let mobile = |mu: f64| {
        curve(&rows, |r| {
            r.params.mu == mu && r.mode == MobilityMode::IidMobility
        })
    };
    let (none, dense) = (mobile(0.0), mobile(10.0));
    assert_eq!(none.len(), 81);
    let diff: Vec<f64> = none.iter().zip(&dense).map(|(a, b)| b.1 - a.1).collect();
    let crossings: Vec<usize> = (1..diff.len())
        .filter(|&i| diff[i - 1] < 0.0 && diff[i] >= 0.0)
        .collect();
    assert_eq!(crossings.len(), 1, "{diff:?}");
    let (lo, hi) = (none[crossings[0] - 1].0, none[crossings[0]].0);
    let p = NetworkParams::new(1.0, 10.0, 1.0, 1.0, 2.0, 25.0).unwrap();
    let lstar = critical_density(&p, &AnalyticOptions::default()).unwrap();
    assert!(lo < lstar && lstar <= hi, "{lo} {lstar} {hi}");
    // Without blockage the coefficient does not depend on λ.
    assert!(none.iter().all(|(_, r)| (r - none[0].1).abs() < 1e-9));
    let static_none = curve(&rows, |r| r.params.mu == 0.0 && r.mode == MobilityMode::Static);
    assert!(static_none.iter().all(|(_, r)| (r - 0.5).abs() < 1e-12));
}

#[test]
fn fig2_smaller_domain_correlates_more() {
    let dir = tempfile::tempdir().unwrap();
    let rows = preset_rows("fig2", &dir.path().join("fig2.csv"));
    let mobile = |v: f64| {
        curve(&rows, |r| {
            r.params.half_length == v && r.mode == MobilityMode::IidMobility
        })
    };
    let (small, large) = (mobile(10.0), mobile(25.0));
    assert!(small[0].1 > 1.5 * large[0].1, "{:?} {:?}", small[0], large[0]);
    // The gap closes as blockage grows, down to the residual 1/(2λV) term.
    let gaps: Vec<f64> = small.iter().zip(&large).map(|(a, b)| (a.1 - b.1) / a.1).collect();
    assert!(gaps.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{gaps:?}");
    assert!(gaps.last().unwrap() < &(0.25 * gaps[0]), "{gaps:?}");
    let fixed = |v: f64| {
        curve(&rows, |r| {
            r.params.half_length == v && r.mode == MobilityMode::Static
        })
    };
    let (s, l) = (fixed(10.0).last().unwrap().1, fixed(25.0).last().unwrap().1);
    assert!((s - l).abs() / s < 0.01, "{s} vs {l}");
}

#[test]
fn fig3_boundary_converges_to_center() {
    let dir = tempfile::tempdir().unwrap();
    let rows = preset_rows("fig3", &dir.path().join("fig3.csv"));
    assert!(rows
        .iter()
        .all(|r| r.mode == MobilityMode::IidMobility && r.params.half_length == 10.0));
    let center = curve(&rows, |r| row_is(r, PointKind::Center));
    let boundary = curve(&rows, |r| row_is(r, PointKind::Boundary));
    assert_eq!(center.len(), boundary.len());
    assert!(boundary[0].1 < center[0].1);
    let p = NetworkParams::new(1.0, 0.0, 1.0, 1.0, 2.0, 10.0).unwrap();
    assert!((center[0].1 - rho_no_blockage(&p).unwrap().rho_inf).abs() / center[0].1 < 0.01);
    let gaps: Vec<f64> = center
        .iter()
        .zip(&boundary)
        .map(|(c, b)| (c.1 - b.1) / c.1)
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{gaps:?}");
    assert!(gaps.last().unwrap() < &(0.25 * gaps[0]), "{gaps:?}");
}

#[test]
fn sweep_is_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, name: &str| {
        let out = dir.path().join(name);
        let (code, _, stderr) = blockcorr(&[
            "sweep",
            "--axis",
            "mu",
            "--grid-min",
            "0.1",
            "--grid-max",
            "10",
            "--grid-count",
            "9",
            "--point",
            "center",
            "--point",
            "boundary",
            "--threads",
            threads,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{stderr}");
        std::fs::read(out).unwrap()
    };
    assert_eq!(run("1", "a.csv"), run("8", "b.csv"));
}

#[test]
fn validate_static_without_blockage() {
    let t = ok(&with_base(
        "validate",
        &[
            "--mu", "0", "--mode", "static", "--trials", "100000", "--seed", "7",
        ],
    ));
    assert_eq!(t.value(0, "analytic"), 0.5);
    assert!(t.value(0, "z").abs() <= 3.0, "z = {}", t.value(0, "z"));
    assert_eq!(t.meta["estimator"], "pooled-variance pearson");
    assert_eq!(t.meta["trials"], "100000");
}

#[test]
fn validate_mobile_with_blockage() {
    let t = ok(&with_base(
        "validate",
        &["--mu", "1", "--mode", "iid", "--trials", "100000", "--seed", "8"],
    ));
    assert!(t.value(0, "z").abs() <= 3.0, "z = {}", t.value(0, "z"));
    assert!((t.value(0, "analytic") - 0.137_826_039_988_437).abs() < 1e-9);
}

#[test]
fn validate_usage_and_activity_errors() {
    let (code, _, stderr) = blockcorr(&with_base("validate", &["--trials", "10"]));
    assert_eq!(code, 2);
    assert!(stderr.contains("trials must be at least 1000"), "{stderr}");
    let (code, _, stderr) = blockcorr(&[
        "validate",
        "--lambda",
        "1e-9",
        "--halflen",
        "2",
        "--trials",
        "1000",
    ]);
    assert_eq!(code, 1);
    assert!(stderr.contains("insufficient activity"), "{stderr}");
}

#[test]
fn validate_flags_disagreement() {
    // Exit status 3 exactly when |z| exceeds the limit.
    let (code, stdout, stderr) = blockcorr(&[
        "validate", "--mu", "0", "--xi", "0.2", "--mode", "static", "--trials", "2000", "--seed", "1",
    ]);
    let t = Table::parse(&stdout);
    let z = t.value(0, "z");
    assert_eq!(code == 3, z.abs() > 4.0, "{stderr}");
    assert!(code == 0 || code == 3);
}

#[test]
fn critical_reports_both_values() {
    let t = ok(&["critical", "--mu", "10", "--halflen", "25"]);
    let closed = t.value(0, "closed_form");
    assert!((closed - 0.9574).abs() < 1e-4);
    let numeric = t.value(0, "numeric");
    assert!((t.value(0, "relative_gap") - (numeric - closed).abs() / closed).abs() < 1e-15);
    let t = ok(&["critical", "--mu", "10", "--halflen", "50"]);
    assert!((t.value(0, "closed_form") - 0.4639).abs() < 1e-4);
    let t = ok(&["critical", "--mu", "10", "--xi", "0.5"]);
    assert_eq!(t.rows[0][t.col("closed_form")], "");
    let (code, _, stderr) = blockcorr(&["critical", "--mu", "0"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("mu > 0"));
}
