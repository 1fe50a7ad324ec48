//! Command-line front end: evaluate integrals, estimate graph dimensions,
//! run the dimension-preservation experiments, and run self-checks.
//!
//! Subcommands and artifact formats:
//!
//! * `integrate` — one operator evaluation, printed as a single JSON
//!   object with exactly the keys `value`, `operator`, `order`, `rho`,
//!   `point` (`rho` is `[-1, -1]` for Hadamard runs).
//! * `boxdim` — box-count curve CSV (`k,delta,N,logN`) followed by a JSON
//!   estimate with keys `slope`, `intercept`, `r_squared`, `k_min`,
//!   `k_max`, `reliable`.
//! * `experiment theorem-main|hadamard` — report CSV with columns
//!   `surface,alpha1,alpha2,rho1,rho2,dim_f,r2_f,dim_If,r2_If,runtime_s`;
//!   `experiment separable` prints the factorization identity's maximum
//!   relative error.
//! * `verify` — pass/fail lines for fast self-checks.
//!
//! Exit codes: 0 success, 1 failed verification or I/O failure, 2
//! argument errors. Error messages go to standard error. Every
//! floating-point value is printed with 17 significant digits, so
//! identical configurations reproduce artifacts byte-for-byte (the
//! report's `runtime_s` column is the one wall-clock exception).
//! `--config FILE` loads flat `key=value` defaults; explicit flags win.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::boxdim::{box_count_curve, estimate_dimension, BoxCountCurve, DimensionEstimate};
use crate::experiment::{
    experiment_rect, experiment_surfaces, hadamard_config, report_csv, run_surface_experiment,
    separable_check, theorem_main_config, verify_all, ExperimentConfig,
};
use crate::frac_integral::{
    hadamard_point, katugampola_point, FractionalOrder, KatugampolaParams, OperatorKind,
    OperatorSpec, DEFAULT_RULE_N,
};
use crate::surfaces::{make_surface, sample_surface, GridData, Rect, Surface, SurfaceSpec};
use crate::text::fmt_f64;
use crate::{Error, Result};

const SEPARABLE_THRESHOLD: f64 = 1e-8;

const TOP_USAGE: &str = "\
fracdim - mixed fractional integrals of surfaces and box-counting dimension

USAGE:
    fracdim <SUBCOMMAND> [OPTIONS]

SUBCOMMANDS:
    integrate    Evaluate a mixed fractional integral at a point (JSON)
    boxdim       Box-count a surface graph and fit its dimension (CSV + JSON)
    experiment   Dimension-preservation experiments (report CSV)
    verify       Run fast self-checks and print pass/fail lines

Run `fracdim <SUBCOMMAND> --help` for the subcommand's options.
`--config FILE` supplies flat key=value defaults (explicit flags win).
The FRACDIM_THREADS environment variable caps worker threads.

SURFACE SPECIFICATIONS (for --surface):
    constant:C                  f = C
    bilinear:P,Q,R0             f = P*x + Q*y + R0
    sineproduct:K1,K2           f = sin(K1 pi x) sin(K2 pi y) + 1
    weierstrass:LAMBDA,H,TERMS  lacunary sine series, Hurst H
    takagi:W,TERMS              tent-map series, weight W
    oscillatory                 f = g(x) g(y), g(u) = u sin(1/u), shifted
    grid:PATH                   bilinear interpolation of a sample CSV
";

const INTEGRATE_USAGE: &str = "\
USAGE:
    fracdim integrate --point X,Y [OPTIONS]

OPTIONS:
    --op NAME          katugampola | hadamard        [default: katugampola]
    --alpha A1,A2      fractional orders in (0, 1]   [default: 0.5,0.5]
    --rho R1,R2        exponents > -1 (katugampola)  [default: 0,0]
    --lower A,C        lower limits                  [default: rectangle corner]
    --surface SPEC     surface specification         [default: constant:1]
    --rect X0,X1,Y0,Y1 domain rectangle              [default: 0,1,0,1;
                                                      hadamard: 0.1,1,0.1,1]
    --point X,Y        evaluation point (required)
    --nodes N          quadrature nodes per axis     [default: 192]
    --config FILE      flat key=value defaults

Prints one JSON object: {\"value\", \"operator\", \"order\", \"rho\", \"point\"}.
";

const BOXDIM_USAGE: &str = "\
USAGE:
    fracdim boxdim [OPTIONS]

OPTIONS:
    --surface SPEC     surface specification         [default: constant:1]
    --rect X0,X1,Y0,Y1 domain rectangle              [default: 0,1,0,1]
    --n N              grid cells per axis           [default: 512]
    --oversample R     samples per cell edge         [default: 2]
    --k KMIN:KMAX      box-count window              [default: 3:7]
    --out DIR          also write curve CSV + estimate JSON files
    --config FILE      flat key=value defaults

Prints the count curve CSV (k,delta,N,logN), then one JSON estimate.
";

const EXPERIMENT_USAGE: &str = "\
USAGE:
    fracdim experiment <MODE> [OPTIONS]

MODES:
    theorem-main    dimension preservation under the Katugampola operator
                    (order (0.5,0.5), exponents (0,0), unit square)
    hadamard        dimension preservation under the Hadamard operator
                    (order (0.5,0.5), lower limits (0.1,0.1))
    separable       factorization identity of the Hadamard operator for
                    f(x,y) = h(x) with second-axis order 1

OPTIONS (theorem-main, hadamard):
    --grid N           cells per axis                [default: 512]
    --oversample R     samples per cell edge         [default: 4]
    --k KMIN:KMAX      box-count window              [default: 3:7]
    --nodes N          quadrature nodes per axis     [default: 32]
    --surface SPEC     single surface instead of the default trio
    --seed S           seed for randomized checks    [default: 42]
    --out DIR          write report + curve CSVs there
    --config FILE      flat key=value defaults

OPTIONS (separable):
    --grid N           interior check points per axis [default: 9]
    --config FILE      flat key=value defaults

theorem-main/hadamard print the report CSV; separable prints the maximum
relative error and fails (exit 1) above 1e-8.
";

const VERIFY_USAGE: &str = "\
USAGE:
    fracdim verify [OPTIONS]

OPTIONS:
    --seed S           seed for randomized spot checks [default: 42]
    --config FILE      flat key=value defaults

Runs closed-form, oracle-agreement, box-count-sandwich, and separable
checks; prints one pass/fail line each and exits 1 on any failure.
";

/// Entry point behind the binary: parses `args` (without the program
/// name), writes results to `out` and diagnostics to `err`, and returns
/// the process exit code.
pub fn run(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match execute(args, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Io(_) => 1,
                _ => {
                    let _ = writeln!(err, "run `fracdim --help` for usage");
                    2
                }
            }
        }
    }
}

fn execute(args: &[String], out: &mut dyn Write) -> Result<i32> {
    let Some(first) = args.first() else {
        return Err(Error::Parse("missing subcommand".into()));
    };
    match first.as_str() {
        "--help" | "-h" | "help" => {
            out.write_all(TOP_USAGE.as_bytes())?;
            Ok(0)
        }
        "integrate" => cmd_integrate(&args[1..], out),
        "boxdim" => cmd_boxdim(&args[1..], out),
        "experiment" => cmd_experiment(&args[1..], out),
        "verify" => cmd_verify(&args[1..], out),
        other => Err(Error::Parse(format!("unknown subcommand `{other}`"))),
    }
}

// ---------------------------------------------------------------------------
// Option plumbing

fn wants_help(args: &[String]) -> bool {
    args.iter().any(|a| a == "--help" || a == "-h")
}

/// Collects `--name value` pairs, then fills gaps from an optional
/// `--config FILE` of flat `key=value` lines. Explicit flags win; config
/// keys that do not apply to the current subcommand are ignored so one
/// file can serve several subcommands.
fn parse_opts(args: &[String], allowed: &[&str]) -> Result<HashMap<String, String>> {
    let mut map = HashMap::new();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let Some(name) = arg.strip_prefix("--") else {
            return Err(Error::Parse(format!("unexpected argument `{arg}`")));
        };
        if name != "config" && !allowed.contains(&name) {
            return Err(Error::Parse(format!("unknown option --{name}")));
        }
        let Some(value) = it.next() else {
            return Err(Error::Parse(format!("option --{name} needs a value")));
        };
        if map.insert(name.to_string(), value.clone()).is_some() {
            return Err(Error::Parse(format!("option --{name} given more than once")));
        }
    }
    if let Some(path) = map.remove("config") {
        for (key, value) in parse_config_file(&path)? {
            if allowed.contains(&key.as_str()) {
                map.entry(key).or_insert(value);
            }
        }
    }
    Ok(map)
}

fn parse_config_file(path: &str) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path)?;
    let mut pairs = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse(format!(
                "{path}:{}: expected key=value, got `{line}`",
                idx + 1
            )));
        };
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

fn parse_f64(text: &str, what: &str) -> Result<f64> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("{what}: `{text}` is not a number")))
}

fn parse_usize(text: &str, what: &str) -> Result<usize> {
    text.trim()
        .parse::<usize>()
        .map_err(|_| Error::Parse(format!("{what}: `{text}` is not a non-negative integer")))
}

fn parse_pair(text: &str, what: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::Parse(format!("{what}: expected two comma-separated numbers, got `{text}`")));
    }
    Ok((parse_f64(parts[0], what)?, parse_f64(parts[1], what)?))
}

fn parse_rect(text: &str) -> Result<Rect> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 4 {
        return Err(Error::Parse(format!("--rect: expected X0,X1,Y0,Y1, got `{text}`")));
    }
    let v: Vec<f64> = parts
        .iter()
        .map(|p| parse_f64(p, "--rect"))
        .collect::<Result<_>>()?;
    Rect::new(v[0], v[1], v[2], v[3])
}

fn parse_window(text: &str) -> Result<(u32, u32)> {
    let Some((lo, hi)) = text.split_once(':') else {
        return Err(Error::Parse(format!("--k: expected KMIN:KMAX, got `{text}`")));
    };
    let parse = |t: &str| {
        t.trim()
            .parse::<u32>()
            .map_err(|_| Error::Parse(format!("--k: `{t}` is not a level")))
    };
    Ok((parse(lo)?, parse(hi)?))
}

fn parse_surface_spec(text: &str) -> Result<SurfaceSpec> {
    let (name, params) = match text.split_once(':') {
        Some((n, p)) => (n, Some(p)),
        None => (text, None),
    };
    let nums = |p: Option<&str>, n: usize| -> Result<Vec<f64>> {
        let p = p.ok_or_else(|| {
            Error::Parse(format!("surface `{name}` needs {n} parameter(s), e.g. from --help"))
        })?;
        let v: Vec<f64> = p
            .split(',')
            .map(|t| parse_f64(t, "--surface"))
            .collect::<Result<_>>()?;
        if v.len() != n {
            return Err(Error::Parse(format!(
                "surface `{name}` needs {n} parameter(s), got {}",
                v.len()
            )));
        }
        Ok(v)
    };
    match name {
        "constant" => Ok(SurfaceSpec::Constant(nums(params, 1)?[0])),
        "bilinear" => {
            let v = nums(params, 3)?;
            Ok(SurfaceSpec::Bilinear {
                p: v[0],
                q: v[1],
                r0: v[2],
            })
        }
        "sineproduct" => {
            let v = nums(params, 2)?;
            let as_freq = |x: f64| -> Result<u32> {
                if x.fract() == 0.0 && x >= 1.0 && x <= u32::MAX as f64 {
                    Ok(x as u32)
                } else {
                    Err(Error::Parse(format!("sineproduct frequencies must be positive integers, got {x}")))
                }
            };
            Ok(SurfaceSpec::SineProduct {
                k1: as_freq(v[0])?,
                k2: as_freq(v[1])?,
            })
        }
        "weierstrass" => {
            let v = nums(params, 3)?;
            if v[2].fract() != 0.0 || v[2] < 1.0 {
                return Err(Error::Parse("weierstrass term count must be a positive integer".into()));
            }
            Ok(SurfaceSpec::Weierstrass2D {
                lambda: v[0],
                hurst: v[1],
                terms: v[2] as u32,
            })
        }
        "takagi" => {
            let v = nums(params, 2)?;
            if v[1].fract() != 0.0 || v[1] < 1.0 {
                return Err(Error::Parse("takagi term count must be a positive integer".into()));
            }
            Ok(SurfaceSpec::Takagi2D {
                w: v[0],
                terms: v[1] as u32,
            })
        }
        "oscillatory" => {
            if params.is_some() {
                return Err(Error::Parse("surface `oscillatory` takes no parameters".into()));
            }
            Ok(SurfaceSpec::OscillatorySineInv)
        }
        "grid" => {
            let path = params.ok_or_else(|| Error::Parse("surface `grid` needs a file path".into()))?;
            let text = fs::read_to_string(path)?;
            Ok(SurfaceSpec::InterpolatedGrid(GridData::from_csv_str(&text)?))
        }
        other => Err(Error::Parse(format!("unknown surface `{other}`"))),
    }
}

// ---------------------------------------------------------------------------
// JSON assembly (hand-built: fixed key sets, 17 significant digits)

fn json_num(v: f64) -> String {
    if v.is_finite() {
        fmt_f64(v)
    } else {
        "null".to_string()
    }
}

fn integrate_json(value: f64, kind: OperatorKind, order: (f64, f64), rho: (f64, f64), point: (f64, f64)) -> String {
    format!(
        "{{\"value\":{},\"operator\":\"{}\",\"order\":[{},{}],\"rho\":[{},{}],\"point\":[{},{}]}}",
        json_num(value),
        kind.name(),
        json_num(order.0),
        json_num(order.1),
        json_num(rho.0),
        json_num(rho.1),
        json_num(point.0),
        json_num(point.1),
    )
}

fn estimate_json(est: &DimensionEstimate) -> String {
    format!(
        "{{\"slope\":{},\"intercept\":{},\"r_squared\":{},\"k_min\":{},\"k_max\":{},\"reliable\":{}}}",
        json_num(est.slope),
        json_num(est.intercept),
        json_num(est.r_squared),
        est.k_min,
        est.k_max,
        est.reliable(),
    )
}

// ---------------------------------------------------------------------------
// Subcommands

fn cmd_integrate(args: &[String], out: &mut dyn Write) -> Result<i32> {
    if wants_help(args) {
        out.write_all(INTEGRATE_USAGE.as_bytes())?;
        return Ok(0);
    }
    let opts = parse_opts(
        args,
        &["op", "alpha", "rho", "lower", "surface", "rect", "point", "nodes"],
    )?;
    let kind = match opts.get("op").map(String::as_str).unwrap_or("katugampola") {
        "katugampola" => OperatorKind::Katugampola,
        "hadamard" => OperatorKind::Hadamard,
        other => {
            return Err(Error::Parse(format!(
                "--op: expected katugampola or hadamard, got `{other}`"
            )))
        }
    };
    let (alpha1, alpha2) = match opts.get("alpha") {
        Some(t) => parse_pair(t, "--alpha")?,
        None => (0.5, 0.5),
    };
    let order = FractionalOrder::new(alpha1, alpha2)?;
    let rect = match opts.get("rect") {
        Some(t) => parse_rect(t)?,
        None => match kind {
            OperatorKind::Katugampola => Rect::UNIT,
            OperatorKind::Hadamard => Rect::new(0.1, 1.0, 0.1, 1.0)?,
        },
    };
    let (rho1, rho2) = match opts.get("rho") {
        Some(t) => {
            if kind == OperatorKind::Hadamard {
                return Err(Error::Parse(
                    "--rho does not apply to the hadamard operator".into(),
                ));
            }
            parse_pair(t, "--rho")?
        }
        None => (0.0, 0.0),
    };
    let (a, c) = match opts.get("lower") {
        Some(t) => parse_pair(t, "--lower")?,
        None => (rect.x0(), rect.y0()),
    };
    let nodes = match opts.get("nodes") {
        Some(t) => parse_usize(t, "--nodes")?,
        None => DEFAULT_RULE_N,
    };
    let point = opts
        .get("point")
        .ok_or_else(|| Error::Parse("--point X,Y is required".into()))
        .and_then(|t| parse_pair(t, "--point"))?;

    let surface_spec = parse_surface_spec(opts.get("surface").map(String::as_str).unwrap_or("constant:1"))?;
    let surface = make_surface(surface_spec, rect)?;
    let params = KatugampolaParams::new(rho1, rho2, a, c)?;
    let spec = OperatorSpec::new(kind, order, params, nodes)?;
    let (value, rho_out) = match kind {
        OperatorKind::Katugampola => (
            katugampola_point(&surface, &spec, point.0, point.1)?,
            (rho1, rho2),
        ),
        OperatorKind::Hadamard => (
            hadamard_point(&surface, &spec, point.0, point.1)?,
            (-1.0, -1.0),
        ),
    };
    writeln!(
        out,
        "{}",
        integrate_json(value, kind, (alpha1, alpha2), rho_out, point)
    )?;
    Ok(0)
}

fn write_artifact(dir: &str, name: &str, content: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(Path::new(dir).join(name), content)?;
    Ok(())
}

fn curve_artifact(dir: &str, curve: &BoxCountCurve) -> Result<()> {
    write_artifact(dir, &format!("curve_{}.csv", curve.surface_label), &curve.to_csv())
}

fn cmd_boxdim(args: &[String], out: &mut dyn Write) -> Result<i32> {
    if wants_help(args) {
        out.write_all(BOXDIM_USAGE.as_bytes())?;
        return Ok(0);
    }
    let opts = parse_opts(args, &["surface", "rect", "n", "oversample", "k", "out"])?;
    let rect = match opts.get("rect") {
        Some(t) => parse_rect(t)?,
        None => Rect::UNIT,
    };
    let n = match opts.get("n") {
        Some(t) => parse_usize(t, "--n")?,
        None => 512,
    };
    let oversample = match opts.get("oversample") {
        Some(t) => parse_usize(t, "--oversample")?,
        None => 2,
    };
    let (k_min, k_max) = match opts.get("k") {
        Some(t) => parse_window(t)?,
        None => (3, 7),
    };
    let spec = parse_surface_spec(opts.get("surface").map(String::as_str).unwrap_or("constant:1"))?;
    let surface = make_surface(spec, rect)?;
    let sampled = sample_surface(&surface, n, oversample)?;
    let curve = box_count_curve(&sampled, k_min, k_max)?;
    let estimate = estimate_dimension(&curve)?;

    out.write_all(curve.to_csv().as_bytes())?;
    writeln!(out, "{}", estimate_json(&estimate))?;
    if let Some(dir) = opts.get("out") {
        curve_artifact(dir, &curve)?;
        write_artifact(
            dir,
            &format!("estimate_{}.json", curve.surface_label),
            &format!("{}\n", estimate_json(&estimate)),
        )?;
    }
    Ok(0)
}

fn cmd_experiment(args: &[String], out: &mut dyn Write) -> Result<i32> {
    if wants_help(args) {
        out.write_all(EXPERIMENT_USAGE.as_bytes())?;
        return Ok(0);
    }
    let Some(mode) = args.first() else {
        return Err(Error::Parse(
            "experiment needs a mode: theorem-main, hadamard, or separable".into(),
        ));
    };
    match mode.as_str() {
        "theorem-main" => cmd_experiment_report(&args[1..], out, theorem_main_config(), "report_theorem_main.csv"),
        "hadamard" => cmd_experiment_report(&args[1..], out, hadamard_config(), "report_hadamard.csv"),
        "separable" => cmd_experiment_separable(&args[1..], out),
        other => Err(Error::Parse(format!(
            "unknown experiment mode `{other}` (expected theorem-main, hadamard, or separable)"
        ))),
    }
}

fn cmd_experiment_report(
    args: &[String],
    out: &mut dyn Write,
    mut cfg: ExperimentConfig,
    report_name: &str,
) -> Result<i32> {
    let opts = parse_opts(
        args,
        &["grid", "oversample", "k", "nodes", "surface", "seed", "out"],
    )?;
    if let Some(t) = opts.get("grid") {
        cfg.grid_n = parse_usize(t, "--grid")?;
    }
    if let Some(t) = opts.get("oversample") {
        cfg.oversample = parse_usize(t, "--oversample")?;
    }
    if let Some(t) = opts.get("k") {
        let (lo, hi) = parse_window(t)?;
        cfg.k_min = lo;
        cfg.k_max = hi;
    }
    if let Some(t) = opts.get("nodes") {
        cfg.rule_n = parse_usize(t, "--nodes")?;
    }
    if let Some(t) = opts.get("seed") {
        cfg.seed = parse_usize(t, "--seed")? as u64;
    }
    cfg.validate()?;

    let rect = experiment_rect(&cfg)?;
    let surfaces: Vec<Surface> = match opts.get("surface") {
        Some(t) => vec![make_surface(parse_surface_spec(t)?, rect)?],
        None => experiment_surfaces(rect)?,
    };

    let mut rows = Vec::new();
    let mut curves = Vec::new();
    for surface in &surfaces {
        let outcome = run_surface_experiment(surface, &cfg)?;
        rows.push(outcome.row);
        curves.push(outcome.curve_f);
        curves.push(outcome.curve_if);
    }
    let report = report_csv(&rows);
    out.write_all(report.as_bytes())?;
    if let Some(dir) = opts.get("out") {
        write_artifact(dir, report_name, &report)?;
        for curve in &curves {
            curve_artifact(dir, curve)?;
        }
    }
    Ok(0)
}

fn cmd_experiment_separable(args: &[String], out: &mut dyn Write) -> Result<i32> {
    let opts = parse_opts(args, &["grid"])?;
    let grid = match opts.get("grid") {
        Some(t) => parse_usize(t, "--grid")?,
        None => 9,
    };
    let worst = separable_check(grid)?;
    writeln!(
        out,
        "separable identity max relative error = {} over {grid}x{grid} interior points",
        fmt_f64(worst)
    )?;
    if worst <= SEPARABLE_THRESHOLD {
        writeln!(out, "separable: PASS (threshold {})", fmt_f64(SEPARABLE_THRESHOLD))?;
        Ok(0)
    } else {
        writeln!(out, "separable: FAIL (threshold {})", fmt_f64(SEPARABLE_THRESHOLD))?;
        Ok(1)
    }
}

fn cmd_verify(args: &[String], out: &mut dyn Write) -> Result<i32> {
    if wants_help(args) {
        out.write_all(VERIFY_USAGE.as_bytes())?;
        return Ok(0);
    }
    let opts = parse_opts(args, &["seed"])?;
    let seed = match opts.get("seed") {
        Some(t) => parse_usize(t, "--seed")? as u64,
        None => 42,
    };
    let lines = verify_all(seed)?;
    let mut failures = 0usize;
    for line in &lines {
        let status = if line.passed { "PASS" } else { "FAIL" };
        writeln!(out, "[verify] {}: {status} ({})", line.label, line.detail)?;
        if !line.passed {
            failures += 1;
        }
    }
    if failures == 0 {
        writeln!(out, "verify: all {} checks passed", lines.len())?;
        Ok(0)
    } else {
        writeln!(out, "verify: {failures} of {} checks FAILED", lines.len())?;
        Ok(1)
    }
}
