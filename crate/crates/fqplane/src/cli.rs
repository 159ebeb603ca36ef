//! The command-line surface.
//!
//! Five subcommands: `field` (plane profile), `count` (tuple counts),
//! `delta` (support size and mask), `verify` (exact-property battery),
//! `sweep` (seeded CSV experiments). Machine output goes to stdout and is
//! JSON or CSV with a schema tag; diagnostics go to stderr. Exit codes:
//! 0 success, 1 a verification check failed, 2 usage error, 3 a file
//! could not be read or parsed.
//!
//! Identical invocations produce identical stdout except for the
//! elapsed_ms fields, which report wall-clock time.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::configs::{
    delta, nu, nu_squared_sum, psi, ConfigGraph, DistanceVector, LambdaTable, PointSet,
};
use crate::error::{Error, Result};
use crate::experiments::{
    default_q_list, factor_prime_power, json_escape, report_to_json, run_sweep, verify_suite,
    ExperimentConfig, SetKind,
};
use crate::field::Field;
use crate::geometry::Plane;

#[derive(Parser)]
#[command(
    name = "fqplane",
    version,
    about = "Distance-vector configuration counts over small finite planes",
    disable_help_subcommand = true
)]
struct Cli {
    /// Cap on worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print field and plane structure as JSON.
    Field(FieldCmd),
    /// Count configurations in a point set.
    Count(CountCmd),
    /// Measure the distance-vector support of a point set.
    Delta(DeltaCmd),
    /// Run the exact-property battery; exits 1 if any check fails.
    Verify(VerifyCmd),
    /// Run a seeded experiment sweep, emitting CSV.
    Sweep(SweepCmd),
}

/// Shared field selection: --p with optional --n, or --q as shorthand.
#[derive(Args)]
struct FieldArgs {
    /// Field characteristic, an odd prime.
    #[arg(long, conflicts_with = "q")]
    p: Option<u64>,
    /// Extension degree.
    #[arg(long, default_value_t = 1, conflicts_with = "q")]
    n: u32,
    /// Prime power shorthand: --q 27 means --p 3 --n 3.
    #[arg(long)]
    q: Option<u32>,
}

impl FieldArgs {
    fn build(&self) -> Result<Field> {
        match (self.p, self.q) {
            (Some(p), None) => Field::new(p, self.n),
            (None, Some(q)) => {
                let (p, n) = factor_prime_power(q)?;
                Field::new(p, n)
            }
            (None, None) => Err(Error::InvalidArgument(
                "a field is required: --p P [--n N] or --q Q".into(),
            )),
            (Some(_), Some(_)) => unreachable!("clap rejects --p with --q"),
        }
    }
}

#[derive(Args)]
struct FieldCmd {
    #[command(flatten)]
    field: FieldArgs,
}

#[derive(Args)]
struct CountCmd {
    #[command(flatten)]
    field: FieldArgs,
    /// Point file: one "c1,c2" coordinate pair per line.
    #[arg(long)]
    set: PathBuf,
    /// Built-in graph name, or a path to a graph file.
    #[arg(long)]
    graph: String,
    /// Distance vector as comma-separated codes, one per edge. With
    /// this flag the output is the bare count ν(t).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    t: Option<Vec<u32>>,
}

#[derive(Args)]
struct DeltaCmd {
    #[command(flatten)]
    field: FieldArgs,
    /// Point file: one "c1,c2" coordinate pair per line.
    #[arg(long)]
    set: PathBuf,
    /// Built-in graph name, or a path to a graph file.
    #[arg(long)]
    graph: String,
    /// Also write the support as a bitmask of little-endian 64-bit
    /// words, bit i = vector index i.
    #[arg(long)]
    mask_out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyCmd {
    #[command(flatten)]
    field: FieldArgs,
    /// Base trial count; expensive checks scale it down themselves.
    #[arg(long, default_value_t = 100)]
    trials: u32,
    /// Seed for every randomized check. Required: there is no
    /// wall-clock fallback.
    #[arg(long)]
    seed: u64,
}

#[derive(Args)]
struct SweepCmd {
    /// JSON experiment description; replaces the individual flags.
    #[arg(long, conflicts_with_all = ["q_list", "exponent", "trials", "seed",
        "graph", "kind", "allow_any_field"])]
    config: Option<PathBuf>,
    /// Comma-separated prime powers.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    q_list: Option<Vec<u32>>,
    /// Set size rule |E| = ceil(q^(NUM/DEN)), written NUM/DEN.
    #[arg(long)]
    exponent: Option<String>,
    #[arg(long)]
    trials: Option<u32>,
    /// Master seed. Required unless the config file provides one.
    #[arg(long)]
    seed: Option<u64>,
    /// Built-in graph name.
    #[arg(long)]
    graph: Option<String>,
    /// Sampling kind: uniform, sphere-union, or grid.
    #[arg(long)]
    kind: Option<SetKind>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Permit fields where -1 is a square.
    #[arg(long)]
    allow_any_field: bool,
}

/// Parses and dispatches; the returned code is the process exit status.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                clap::error::ErrorKind::DisplayHelp
                | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = err.print();
            return code;
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(err) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("fqplane: thread pool: {err}");
            return 2;
        }
    }
    let outcome = match &cli.command {
        Command::Field(cmd) => cmd_field(cmd),
        Command::Count(cmd) => cmd_count(cmd),
        Command::Delta(cmd) => cmd_delta(cmd),
        Command::Verify(cmd) => cmd_verify(cmd),
        Command::Sweep(cmd) => cmd_sweep(cmd),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("fqplane: {err}");
            exit_code(&err)
        }
    }
}

/// Usage errors exit 2, unreadable or unparseable files exit 3.
fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_)
        | Error::Json(_)
        | Error::BadPointFile { .. }
        | Error::BadGraph(_)
        | Error::BadDescriptor(_) => 3,
        _ => 2,
    }
}

/// A builtin name, else a path to a graph file.
fn resolve_graph(given: &str) -> Result<ConfigGraph> {
    match ConfigGraph::by_name(given) {
        Ok(g) => Ok(g),
        Err(name_err) => {
            if Path::new(given).is_file() {
                ConfigGraph::from_path(Path::new(given))
            } else {
                let msg = match name_err {
                    Error::BadGraph(inner) => inner,
                    other => format!("{other}"),
                };
                Err(Error::InvalidArgument(msg))
            }
        }
    }
}

fn cmd_field(cmd: &FieldCmd) -> Result<i32> {
    let field = cmd.field.build()?;
    let plane = Plane::new(field)?;
    let f = plane.field();
    let mut out = String::new();
    out.push_str("{\n  \"schema\": \"fqplane.field.v1\",\n");
    let _ = writeln!(out, "  \"p\": {},", f.p());
    let _ = writeln!(out, "  \"n\": {},", f.n());
    let _ = writeln!(out, "  \"q\": {},", f.q());
    let _ = writeln!(out, "  \"modulus\": {},", fmt_u32_array(f.modulus()));
    let _ = writeln!(out, "  \"anisotropic\": {},", f.is_anisotropic());
    let _ = writeln!(out, "  \"orth_group_order\": {},", plane.orth_count());
    let sizes: Vec<u32> = (0..plane.q())
        .map(|t| plane.sphere_idx(t).len() as u32)
        .collect();
    let _ = writeln!(out, "  \"sphere_sizes\": {}", fmt_u32_array(&sizes));
    out.push('}');
    println!("{out}");
    Ok(0)
}

fn cmd_count(cmd: &CountCmd) -> Result<i32> {
    let field = cmd.field.build()?;
    let plane = Plane::new(field)?;
    let set = PointSet::from_path(&plane, &cmd.set)?;
    let graph = resolve_graph(&cmd.graph)?;
    if let Some(codes) = &cmd.t {
        let t = DistanceVector::from_codes(plane.field(), codes)?;
        let count = nu(&plane, &set, &graph, &t)?;
        println!("{count}");
        return Ok(0);
    }
    let support = delta(&plane, &set, &graph)?;
    let nu_sq = nu_squared_sum(&plane, &set, &graph)?;
    let lam = LambdaTable::new(&plane, &set);
    let psi22 = psi(&plane, &lam, 2, 2)?;
    let psi31 = psi(&plane, &lam, 3, 1)?;
    let mut out = String::new();
    out.push_str("{\n  \"schema\": \"fqplane.count.v1\",\n");
    let _ = writeln!(out, "  \"graph\": \"{}\",", json_escape(graph.name()));
    let _ = writeln!(out, "  \"q\": {},", plane.q());
    let _ = writeln!(out, "  \"set_size\": {},", set.len());
    let _ = writeln!(out, "  \"delta_size\": {},", support.len());
    let _ = writeln!(out, "  \"nu_sq_sum\": {nu_sq},");
    let _ = writeln!(out, "  \"psi22\": {psi22},");
    let _ = writeln!(out, "  \"psi31\": {psi31}");
    out.push('}');
    println!("{out}");
    Ok(0)
}

fn cmd_delta(cmd: &DeltaCmd) -> Result<i32> {
    let field = cmd.field.build()?;
    let plane = Plane::new(field)?;
    let set = PointSet::from_path(&plane, &cmd.set)?;
    let graph = resolve_graph(&cmd.graph)?;
    let support = delta(&plane, &set, &graph)?;
    let mask_file = match &cmd.mask_out {
        Some(path) => {
            let mut bytes = Vec::with_capacity(support.mask_words().len() * 8);
            for w in support.mask_words() {
                bytes.extend_from_slice(&w.to_le_bytes());
            }
            fs::write(path, bytes)?;
            Some(path.display().to_string())
        }
        None => None,
    };
    let mut out = String::new();
    out.push_str("{\n  \"schema\": \"fqplane.delta.v1\",\n");
    let _ = writeln!(out, "  \"graph\": \"{}\",", json_escape(graph.name()));
    let _ = writeln!(out, "  \"q\": {},", plane.q());
    let _ = writeln!(out, "  \"set_size\": {},", set.len());
    let _ = writeln!(out, "  \"delta_size\": {},", support.len());
    let _ = writeln!(out, "  \"capacity\": {},", support.capacity());
    match mask_file {
        Some(path) => {
            let _ = writeln!(out, "  \"mask_file\": \"{}\"", json_escape(&path));
        }
        None => {
            let _ = writeln!(out, "  \"mask_file\": null");
        }
    }
    out.push('}');
    println!("{out}");
    Ok(0)
}

fn cmd_verify(cmd: &VerifyCmd) -> Result<i32> {
    let field = cmd.field.build()?;
    let report = verify_suite(field, cmd.trials, cmd.seed)?;
    print!("{}", report_to_json(&report));
    if report.all_passed() {
        Ok(0)
    } else {
        for check in report.checks.iter().filter(|c| !c.passed) {
            eprintln!("fqplane: check failed: {}: {}", check.name, check.detail);
        }
        Ok(1)
    }
}

/// "NUM/DEN" or a bare integer exponent.
fn parse_exponent(text: &str) -> Result<(u32, u32)> {
    let bad = || Error::InvalidArgument(format!("exponent '{text}' is not NUM or NUM/DEN"));
    match text.split_once('/') {
        Some((num, den)) => {
            let num: u32 = num.trim().parse().map_err(|_| bad())?;
            let den: u32 = den.trim().parse().map_err(|_| bad())?;
            if den == 0 {
                return Err(bad());
            }
            Ok((num, den))
        }
        None => Ok((text.trim().parse().map_err(|_| bad())?, 1)),
    }
}

fn cmd_sweep(cmd: &SweepCmd) -> Result<i32> {
    let cfg = match &cmd.config {
        Some(path) => ExperimentConfig::from_json(&fs::read_to_string(path)?)?,
        None => ExperimentConfig {
            q_list: cmd.q_list.clone().unwrap_or_else(default_q_list),
            exponent: parse_exponent(cmd.exponent.as_deref().unwrap_or("12/7"))?,
            trials: cmd.trials.unwrap_or(20),
            seed: cmd.seed,
            graph: cmd.graph.clone().unwrap_or_else(|| "bowtie".into()),
            kind: cmd.kind.unwrap_or(SetKind::Uniform),
            output: None,
            allow_any_field: cmd.allow_any_field,
        },
    };
    let out_path = cmd
        .out
        .as_ref()
        .map(|p| p.display().to_string())
        .or_else(|| cfg.output.clone());
    match out_path {
        Some(path) => {
            let mut file = io::BufWriter::new(fs::File::create(&path)?);
            run_sweep(&cfg, &mut file)?;
            file.flush()?;
            eprintln!("fqplane: wrote {path}");
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            run_sweep(&cfg, &mut lock)?;
        }
    }
    Ok(0)
}

fn fmt_u32_array(values: &[u32]) -> String {
    let mut out = String::from("[");
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{v}");
    }
    out.push(']');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_strings_parse() {
        assert_eq!(parse_exponent("12/7").unwrap(), (12, 7));
        assert_eq!(parse_exponent("2").unwrap(), (2, 1));
        assert_eq!(parse_exponent(" 8 / 5 ").unwrap(), (8, 5));
        assert!(parse_exponent("12/0").is_err());
        assert!(parse_exponent("a/b").is_err());
        assert!(parse_exponent("").is_err());
    }

    #[test]
    fn graph_specs_resolve_by_name_first() {
        assert_eq!(resolve_graph("triangle").unwrap().name(), "triangle");
        assert_eq!(resolve_graph("KITE").unwrap().name(), "kite");
        assert!(matches!(
            resolve_graph("no-such-graph"),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn usage_and_format_errors_split_exit_codes() {
        assert_eq!(exit_code(&Error::InvalidArgument("x".into())), 2);
        assert_eq!(exit_code(&Error::NotPrime(4)), 2);
        assert_eq!(exit_code(&Error::HypothesisViolated { q: 5 }), 2);
        assert_eq!(exit_code(&Error::BadGraph("x".into())), 3);
        assert_eq!(
            exit_code(&Error::BadPointFile {
                line: 1,
                msg: "x".into()
            }),
            3
        );
        assert_eq!(
            exit_code(&Error::Io(std::io::Error::other("x"))),
            3
        );
    }
}
