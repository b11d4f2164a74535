//! Command-line front end: `list`, `validate`, `converge` and `stability`.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::convergence::{run_study, Study};
use crate::error::{Error, Result};
use crate::field::Exact;
use crate::gark_expansion::{check_gark_order, expand_exact, FastRK};
use crate::integrator::{InnerMode, InnerSolveConfig};
use crate::order_conditions::{check_all, Arithmetic, ConditionReport};
use crate::problems::Problem;
use crate::stability::{scan_region, ComplexGrid, RegionScan, ScanMode};
use crate::tableaux::{builtin, builtin_names, from_json, MriGarkMethod};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "mri-gark",
    version,
    about = "Multirate infinitesimal GARK methods: registry, order checks, convergence and stability"
)]
pub struct Cli {
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the primary output here; converge and stability add a `.json` sidecar.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Reserved; no command draws random numbers.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for scans and convergence levels.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Load the method from a JSON file instead of the registry.
    #[arg(long, global = true)]
    pub method_file: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List registry methods.
    List {
        /// Keep names containing this text.
        #[arg(long)]
        filter: Option<String>,
    },
    /// Check order conditions of a method.
    Validate(ValidateArgs),
    /// Fixed-step convergence study.
    Converge(ConvergeArgs),
    /// Slow stability region scan.
    Stability(StabilityArgs),
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub method: Option<String>,
    /// Order to check; defaults to the declared order.
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Evaluate in double precision instead of exactly.
    #[arg(long)]
    pub float: bool,
    /// Also check bi-colored tree conditions of the GARK expansion with RK4 and the 3/8 rule.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub problem: String,
    /// Coarsest step; defaults to the interval length over 16.
    #[arg(long)]
    pub h0: Option<f64>,
    #[arg(long, default_value_t = 6)]
    pub levels: usize,
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub tf: Option<f64>,
    #[arg(long, value_enum, default_value_t = InnerKind::Adaptive)]
    pub inner: InnerKind,
    #[arg(long, default_value_t = 1e-10)]
    pub inner_tol: f64,
    #[arg(long, default_value_t = 10)]
    pub substeps: usize,
    #[arg(long, default_value_t = 4)]
    pub inner_order: usize,
    /// Tolerance of the monolithic reference for problems without an exact solution.
    #[arg(long, default_value_t = 1e-12)]
    pub reference_tol: f64,
    /// Problem parameter override, `key=value`; repeatable.
    #[arg(long = "param", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InnerKind {
    Adaptive,
    Fixed,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long, value_enum, default_value_t = ModeArg::Scalar)]
    pub mode: ModeArg,
    /// Wedge radius; `inf` for the unbounded wedge.
    #[arg(long, default_value = "inf", value_parser = parse_rho)]
    pub rho: f64,
    /// Wedge half-angle in degrees.
    #[arg(long, default_value_t = 45.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    pub xi: f64,
    #[arg(long, default_value_t = -6.0, allow_negative_numbers = true)]
    pub re_min: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub re_max: f64,
    #[arg(long, default_value_t = -4.0, allow_negative_numbers = true)]
    pub im_min: f64,
    #[arg(long, default_value_t = 4.0, allow_negative_numbers = true)]
    pub im_max: f64,
    #[arg(long, default_value_t = 141)]
    pub n_re: usize,
    #[arg(long, default_value_t = 161)]
    pub n_im: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Scalar,
    Matrix,
}

fn parse_param(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("bad value in `{s}`: {e}"))?;
    Ok((k.trim().to_string(), v))
}

fn parse_rho(s: &str) -> std::result::Result<f64, String> {
    match s {
        "inf" | "infinity" | "Inf" => Ok(f64::INFINITY),
        _ => s.parse::<f64>().map_err(|e| e.to_string()),
    }
}

/// Outcome of a command: text written to stdout or `--out`, an optional JSON
/// sidecar and the exit code.
#[derive(Debug)]
pub struct Outcome {
    pub body: String,
    pub sidecar: Option<String>,
    pub code: i32,
}

fn resolve_method(name: Option<&str>, file: Option<&Path>) -> Result<MriGarkMethod> {
    match (file, name) {
        (Some(path), _) => from_json(&std::fs::read_to_string(path)?),
        (None, Some(name)) => builtin(name),
        (None, None) => Err(Error::InvalidArgument("give --method NAME or --method-file PATH".into())),
    }
}

#[derive(Serialize)]
struct MethodSummary<'a> {
    name: &'a str,
    order: usize,
    embedded_order: usize,
    kind: &'static str,
    stages: usize,
}

fn cmd_list(filter: Option<&str>, format: Format) -> Result<Outcome> {
    let methods: Vec<MriGarkMethod> = builtin_names()
        .iter()
        .filter(|n| filter.is_none_or(|f| n.contains(f)))
        .map(|n| builtin(n))
        .collect::<Result<_>>()?;
    let rows: Vec<MethodSummary> = methods
        .iter()
        .map(|m| MethodSummary {
            name: &m.name,
            order: m.order,
            embedded_order: m.embedded_order,
            kind: m.kind.as_str(),
            stages: m.stages(),
        })
        .collect();
    let body = match format {
        Format::Json => serde_json::to_string_pretty(&rows)? + "\n",
        Format::Csv => {
            let mut s = String::from("name,order,embedded_order,kind,stages\n");
            for r in &rows {
                s.push_str(&format!("{},{},{},{},{}\n", r.name, r.order, r.embedded_order, r.kind, r.stages));
            }
            s
        }
    };
    Ok(Outcome { body, sidecar: None, code: EXIT_OK })
}

#[derive(Serialize)]
struct ValidationReport {
    method: String,
    order: usize,
    arithmetic: &'static str,
    tol: f64,
    pass: bool,
    conditions: Vec<ConditionReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    oracle: Vec<OracleReport>,
}

#[derive(Serialize)]
struct OracleReport {
    fast_method: String,
    trees: Vec<ConditionReport>,
}

fn report_csv(reports: impl Iterator<Item = ConditionReport>) -> String {
    let mut s = String::from("id,lhs,rhs,residual,pass\n");
    for r in reports {
        s.push_str(&format!("{},{:.16e},{:.16e},{:.16e},{}\n", r.id, r.lhs, r.rhs, r.residual, u8::from(r.pass)));
    }
    s
}

fn cmd_validate(args: &ValidateArgs, method: &MriGarkMethod, format: Format) -> Result<Outcome> {
    let p = args.order.unwrap_or(method.order);
    let arith = if args.float { Arithmetic::Float } else { Arithmetic::Exact };
    let conditions = check_all(method, p, args.tol, arith)?;
    let mut oracle = Vec::new();
    if args.oracle {
        for fast in [FastRK::<Exact>::rk4(), FastRK::<Exact>::rule38()] {
            let tab = expand_exact(method, &fast)?;
            oracle.push(OracleReport { fast_method: fast.name.clone(), trees: check_gark_order(&tab, p, args.tol)? });
        }
    }
    let pass = conditions.iter().all(|r| r.pass) && oracle.iter().all(|o| o.trees.iter().all(|r| r.pass));
    let report = ValidationReport {
        method: method.name.clone(),
        order: p,
        arithmetic: if args.float { "float" } else { "exact" },
        tol: args.tol,
        pass,
        conditions,
        oracle,
    };
    let body = match format {
        Format::Json => serde_json::to_string_pretty(&report)? + "\n",
        Format::Csv => {
            let oracle_rows = report.oracle.iter().flat_map(|o| {
                o.trees.iter().map(move |r| ConditionReport { id: format!("{}/{}", o.fast_method, r.id), ..r.clone() })
            });
            report_csv(report.conditions.iter().cloned().chain(oracle_rows))
        }
    };
    Ok(Outcome { body, sidecar: None, code: if pass { EXIT_OK } else { EXIT_FAILED } })
}

fn cmd_converge(args: &ConvergeArgs, method: &MriGarkMethod, format: Format) -> Result<Outcome> {
    let problem = Problem::by_name(&args.problem, &args.params)?;
    let (d0, d1) = problem.default_interval();
    let (t0, tf) = (args.t0.unwrap_or(d0), args.tf.unwrap_or(d1));
    let inner = InnerSolveConfig {
        mode: match args.inner {
            InnerKind::Adaptive => InnerMode::Adaptive,
            InnerKind::Fixed => InnerMode::Fixed,
        },
        rel_tol: args.inner_tol,
        abs_tol: args.inner_tol,
        substeps: args.substeps,
        order: args.inner_order,
        ..Default::default()
    };
    let h0 = args.h0.unwrap_or((tf - t0) / 16.0);
    let mut study = Study::new(h0, args.levels, t0, tf, inner);
    study.reference_tol = args.reference_tol;
    let report = run_study(method, &problem, &study)?;
    let json = serde_json::to_string_pretty(&report)? + "\n";
    let code = if report.failed() { EXIT_FAILED } else { EXIT_OK };
    Ok(match format {
        Format::Csv => Outcome { body: report.to_csv(), sidecar: Some(json), code },
        Format::Json => Outcome { body: json, sidecar: None, code },
    })
}

fn cmd_stability(args: &StabilityArgs, method: &MriGarkMethod, format: Format) -> Result<Outcome> {
    let grid = ComplexGrid {
        re_min: args.re_min,
        re_max: args.re_max,
        im_min: args.im_min,
        im_max: args.im_max,
        n_re: args.n_re,
        n_im: args.n_im,
    };
    let mode = match args.mode {
        ModeArg::Scalar => ScanMode::Scalar,
        ModeArg::Matrix => ScanMode::Matrix,
    };
    let scan = scan_region(method, RegionScan::new(&method.name, mode, args.rho, args.alpha, args.xi, grid))?;
    let meta = scan.metadata_json()? + "\n";
    Ok(match format {
        Format::Csv => Outcome { body: scan.to_csv(), sidecar: Some(meta), code: EXIT_OK },
        Format::Json => {
            let v = serde_json::json!({
                "scan": serde_json::from_str::<serde_json::Value>(&meta)?,
                "member_count": scan.member_count(),
                "values": scan.values.iter().map(|v| if v.is_finite() { serde_json::json!(v) } else { serde_json::json!("inf") }).collect::<Vec<_>>(),
                "membership": scan.membership,
            });
            Outcome { body: serde_json::to_string_pretty(&v)? + "\n", sidecar: None, code: EXIT_OK }
        }
    })
}

/// Run a parsed command and return its output without writing it.
pub fn execute(cli: &Cli) -> Result<Outcome> {
    let file = cli.method_file.as_deref();
    match &cli.command {
        Command::List { filter } => cmd_list(filter.as_deref(), cli.format.unwrap_or(Format::Csv)),
        Command::Validate(a) => {
            let m = resolve_method(a.method.as_deref(), file)?;
            cmd_validate(a, &m, cli.format.unwrap_or(Format::Json))
        }
        Command::Converge(a) => {
            let m = resolve_method(a.method.as_deref(), file)?;
            cmd_converge(a, &m, cli.format.unwrap_or(Format::Csv))
        }
        Command::Stability(a) => {
            let m = resolve_method(a.method.as_deref(), file)?;
            cmd_stability(a, &m, cli.format.unwrap_or(Format::Csv))
        }
    }
}

/// `path` with `.json` appended to its file name.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".json");
    path.with_file_name(name)
}

fn emit(cli: &Cli, out: &Outcome) -> Result<()> {
    match &cli.out {
        Some(path) => {
            std::fs::write(path, &out.body)?;
            if let Some(side) = &out.sidecar {
                std::fs::write(sidecar_path(path), side)?;
            }
        }
        None => std::io::stdout().lock().write_all(out.body.as_bytes())?,
    }
    Ok(())
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::UnknownMethod { .. } | Error::InvalidArgument(_) | Error::InvalidMethod(_) => EXIT_USAGE,
        Error::Io(_) | Error::Json(_) => EXIT_USAGE,
        _ => EXIT_FAILED,
    }
}

/// Parse `args`, run and write outputs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return EXIT_USAGE;
        }
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let result = execute(&cli).and_then(|out| emit(&cli, &out).map(|_| out.code));
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exec(args: &[&str]) -> Result<Outcome> {
        let cli = Cli::try_parse_from(std::iter::once("mri-gark").chain(args.iter().copied())).unwrap();
        execute(&cli)
    }

    #[test]
    fn list_all_methods() {
        let out = exec(&["list"]).unwrap();
        let lines: Vec<&str> = out.body.lines().collect();
        assert_eq!(lines[0], "name,order,embedded_order,kind,stages");
        assert_eq!(lines.len(), 9);
        assert_eq!(lines[1], "mri-erk22a,2,1,explicit,2");
        let json: serde_json::Value = serde_json::from_str(&exec(&["list", "--format", "json"]).unwrap().body).unwrap();
        assert_eq!(json.as_array().unwrap().len(), 8);
        let none = exec(&["list", "--filter", "zzz"]).unwrap();
        assert_eq!(none.body, "name,order,embedded_order,kind,stages\n");
        assert_eq!(none.code, EXIT_OK);
    }

    #[test]
    fn validate_codes() {
        assert_eq!(exec(&["validate", "--method", "mri-erk45a", "--order", "4"]).unwrap().code, EXIT_OK);
        let out = exec(&["validate", "--method", "mri-erk22a", "--order", "3"]).unwrap();
        assert_eq!(out.code, EXIT_FAILED);
        let v: serde_json::Value = serde_json::from_str(&out.body).unwrap();
        let failing: Vec<&str> = v["conditions"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|c| c["pass"] == false)
            .map(|c| c["id"].as_str().unwrap())
            .collect();
        assert!(failing.contains(&"coupling3"), "{failing:?}");
        assert!(matches!(exec(&["validate", "--method", "nope"]), Err(Error::UnknownMethod { .. })));
    }

    #[test]
    fn validate_with_oracle() {
        let out = exec(&["validate", "--method", "mri-erk33a", "--order", "3", "--oracle"]).unwrap();
        assert_eq!(out.code, EXIT_OK);
        let v: serde_json::Value = serde_json::from_str(&out.body).unwrap();
        let oracle = v["oracle"].as_array().unwrap();
        assert_eq!(oracle.len(), 2);
        for o in oracle {
            let trees = o["trees"].as_array().unwrap();
            assert_eq!(trees.len(), 2 + 4 + 14);
            assert!(trees.iter().all(|t| t["pass"] == true));
        }
    }

    #[test]
    fn stability_outputs() {
        let args = ["stability", "--method", "mri-erk22a", "--rho", "0", "--alpha", "0", "--n-re", "5", "--n-im", "4"];
        let out = exec(&args).unwrap();
        assert_eq!(out.body.lines().count(), 21);
        let meta: serde_json::Value = serde_json::from_str(out.sidecar.as_ref().unwrap()).unwrap();
        assert_eq!(meta["mode"], "scalar");
        let inf = exec(&["stability", "--method", "mri-erk22a", "--rho", "inf", "--n-re", "3", "--n-im", "3"]).unwrap();
        let meta: serde_json::Value = serde_json::from_str(inf.sidecar.as_ref().unwrap()).unwrap();
        assert_eq!(meta["rho"], "inf");
        assert!(exec(&["stability", "--method", "mri-erk22a", "--n-re", "1"]).is_err());
        let a = exec(&args).unwrap().body;
        assert_eq!(a, out.body);
    }

    #[test]
    fn converge_linear_scalar() {
        let out =
            exec(&["converge", "--method", "mri-erk22a", "--problem", "linear-scalar", "--levels", "3", "--h0", "0.1"])
                .unwrap();
        assert_eq!(out.code, EXIT_OK);
        assert_eq!(out.body.lines().count(), 4);
        let rep: serde_json::Value = serde_json::from_str(out.sidecar.as_ref().unwrap()).unwrap();
        assert_eq!(rep["problem"], "linear-scalar");
        assert!(exec(&["converge", "--method", "mri-erk22a", "--problem", "kpr", "--param", "bogus=1"]).is_err());
        assert!(exec(&["converge", "--method", "mri-erk22a", "--problem", "kpr", "--levels", "2"]).is_err());
    }

    #[test]
    fn params_and_rho_parse() {
        assert_eq!(parse_param("xi=0.5").unwrap(), ("xi".to_string(), 0.5));
        assert!(parse_param("xi").is_err());
        assert!(parse_param("xi=a").is_err());
        assert_eq!(parse_rho("inf").unwrap(), f64::INFINITY);
        assert_eq!(parse_rho("10").unwrap(), 10.0);
    }

    #[test]
    fn sidecar_naming() {
        assert_eq!(sidecar_path(Path::new("/tmp/scan.csv")), PathBuf::from("/tmp/scan.csv.json"));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["mri-gark", "validate", "--method", "no-such"]), EXIT_USAGE);
        assert_eq!(run(["mri-gark", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["mri-gark", "stability", "--method", "mri-erk22a", "--n-re", "1"]), EXIT_USAGE);
        assert_eq!(run(["mri-gark", "validate"]), EXIT_USAGE);
    }
}
