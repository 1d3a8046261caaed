//! Batch front end: read an operator file, run one pipeline, write artifacts.
//!
//! Every JSON artifact is wrapped as {"seed": .., "command": .., "report": ..}
//! and every CSV starts with a `# seed=..` header line, so identical configs
//! reproduce byte-identical outputs.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use liouville_core::bloch::band_path;
use liouville_core::fermi::{default_grid_res, real_fermi_surface_at, FermiVerdict};
use liouville_core::liouville::{
    build_floquet_solutions, liouville_dimension_at, verify_solution, LiouvilleVerdict,
};
use liouville_core::localdata::taylor_expand_seeded;
use liouville_core::model::{validate_operator, PeriodicOperator};
use liouville_core::positive::{
    classify_liouville_case_seeded, lambda_profile_seeded, LiouvilleCase,
};
use liouville_core::{tol, Error};

#[derive(Parser)]
#[command(
    name = "liouville",
    about = "Dispersion, Fermi sets, and polynomial-growth solution spaces of periodic lattice operators",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Operator description file (JSON)
    #[arg(long = "op", value_name = "FILE")]
    op: PathBuf,
    /// Replace the operator's energy shift before any analysis
    #[arg(long, value_name = "X", allow_negative_numbers = true)]
    shift: Option<f64>,
    /// Fermi scan resolution per axis (default depends on rank)
    #[arg(long, value_name = "N")]
    grid: Option<usize>,
    /// Largest polynomial growth order
    #[arg(long = "N-max", value_name = "K", default_value_t = 4)]
    n_max: usize,
    /// Window radius for residual checks on constructed solutions
    #[arg(long, value_name = "R", default_value_t = 10)]
    window: i64,
    /// Seed for randomized sub-checks (nondegeneracy sampling, concavity certificates)
    #[arg(long, value_name = "S", default_value_t = 0)]
    seed: u64,
    /// Output directory for artifacts
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Check an operator file and report its structure flags
    Validate(Common),
    /// Sample band functions along a k-path into bands.csv
    Bands {
        #[command(flatten)]
        common: Common,
        /// Waypoints as "k1,k2;k1,k2;..." (defaults to a corner-to-corner sweep)
        #[arg(long, value_name = "PATH")]
        path: Option<String>,
        /// Samples per path segment
        #[arg(long, value_name = "M", default_value_t = 100)]
        samples: usize,
    },
    /// Locate and refine the real Fermi set
    Fermi(Common),
    /// Local spectral data (r, leading order, leading form) at each Fermi point
    Local(Common),
    /// Dimension table of polynomial-growth solution spaces, orders 0..=N-max
    Dim(Common),
    /// Construct solutions of order N-max at each Fermi point into solutions.json
    Solutions(Common),
    /// Sample the twisted principal eigenvalue along each axis into lambda.csv
    Lambda {
        #[command(flatten)]
        common: Common,
        /// Half-width of the sampling interval around the maximizer
        #[arg(long, value_name = "W", default_value_t = 2.0)]
        range: f64,
        /// Samples per axis
        #[arg(long, value_name = "M", default_value_t = 41)]
        samples: usize,
    },
    /// Positive-form trichotomy: vacuous / noncritical / critical
    Classify(Common),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let wants_stdout = !e.use_stderr();
            let _ = e.print();
            return if wants_stdout { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_category().code() as u8)
        }
    }
}

fn run(command: Command) -> Result<u8, Error> {
    match command {
        Command::Validate(c) => cmd_validate(&c),
        Command::Bands { common, path, samples } => cmd_bands(&common, path.as_deref(), samples),
        Command::Fermi(c) => cmd_fermi(&c),
        Command::Local(c) => cmd_local(&c),
        Command::Dim(c) => cmd_dim(&c),
        Command::Solutions(c) => cmd_solutions(&c),
        Command::Lambda { common, range, samples } => cmd_lambda(&common, range, samples),
        Command::Classify(c) => cmd_classify(&c),
    }
}

fn load_operator(c: &Common) -> Result<PeriodicOperator, Error> {
    let text = fs::read_to_string(&c.op)?;
    let mut op = PeriodicOperator::from_json_str(&text)?;
    if let Some(x) = c.shift {
        op.energy_shift = x;
    }
    Ok(op)
}

fn write_json(c: &Common, name: &str, command: &str, payload: Value) -> Result<PathBuf, Error> {
    fs::create_dir_all(&c.out)?;
    let doc = json!({ "seed": c.seed, "command": command, "report": payload });
    let path = c.out.join(name);
    let mut text = serde_json::to_string_pretty(&doc).expect("artifact serialization cannot fail");
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}

fn write_csv(c: &Common, name: &str, command: &str, body: &str) -> Result<PathBuf, Error> {
    fs::create_dir_all(&c.out)?;
    let path = c.out.join(name);
    fs::write(&path, format!("# seed={} command={}\n{}", c.seed, command, body))?;
    Ok(path)
}

fn grid_res(c: &Common, rank: usize) -> usize {
    c.grid.unwrap_or_else(|| default_grid_res(rank))
}

fn cmd_validate(c: &Common) -> Result<u8, Error> {
    let text = fs::read_to_string(&c.op)?;
    let (mut op, mut report) = PeriodicOperator::from_json_str_with_report(&text)?;
    if let Some(x) = c.shift {
        op.energy_shift = x;
        report = validate_operator(&op);
    }
    let payload = serde_json::to_value(&report).expect("report serialization cannot fail");
    write_json(c, "report.json", "validate", payload)?;
    println!(
        "valid: {} (selfadjoint: {}, positivity structure: {}, rank {}, {} vertices)",
        report.valid,
        report.selfadjoint,
        report.positivity_structure,
        report.rank,
        report.vertex_count
    );
    for e in &report.errors {
        println!("  {e}");
    }
    Ok(if report.valid { 0 } else { 2 })
}

fn parse_waypoints(text: &str, rank: usize) -> Result<Vec<Vec<f64>>, Error> {
    let mut out = Vec::new();
    for chunk in text.split(';') {
        let point: Vec<f64> = chunk
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("bad waypoint {chunk:?}: {e}")))?;
        if point.len() != rank {
            return Err(Error::Parse(format!(
                "waypoint {chunk:?} has {} components, operator rank is {rank}",
                point.len()
            )));
        }
        out.push(point);
    }
    Ok(out)
}

fn cmd_bands(c: &Common, path: Option<&str>, samples: usize) -> Result<u8, Error> {
    let op = load_operator(c)?;
    let waypoints = match path {
        Some(text) => parse_waypoints(text, op.rank)?,
        None => vec![vec![-std::f64::consts::PI; op.rank], vec![std::f64::consts::PI; op.rank]],
    };
    let bp = band_path(&op, &waypoints, samples)?;
    let csv_path = write_csv(c, "bands.csv", "bands", &bp.to_csv())?;
    let bands = bp.bands.first().map_or(0, |b| b.len());
    let payload = json!({
        "waypoints": waypoints,
        "samples_per_segment": samples,
        "rows": bp.t.len(),
        "bands": bands,
    });
    write_json(c, "report.json", "bands", payload)?;
    println!("wrote {} rows x {} bands to {}", bp.t.len(), bands, csv_path.display());
    Ok(0)
}

fn cmd_fermi(c: &Common) -> Result<u8, Error> {
    let op = load_operator(c)?;
    let report = real_fermi_surface_at(&op, grid_res(c, op.rank))?;
    let payload: Value =
        serde_json::from_str(&report.to_json()).expect("report round trip cannot fail");
    write_json(c, "report.json", "fermi", payload)?;
    match &report.verdict {
        FermiVerdict::Empty { certified_lower_bound } => {
            println!("verdict: empty (certified singular-value bound {certified_lower_bound:.6})");
        }
        FermiVerdict::Finite { points } => {
            println!("verdict: finite ({} point(s))", points.len());
            for p in points {
                println!("  k = {:?}  r_geom = {}  r_alg = {}", p.k, p.r_geom, p.r_alg);
            }
        }
        FermiVerdict::LikelyPositiveDimensional { diagnostics } => {
            println!("verdict: likely_positive_dimensional");
            println!("  {diagnostics}");
        }
    }
    Ok(0)
}

fn cmd_local(c: &Common) -> Result<u8, Error> {
    let op = load_operator(c)?;
    let report = real_fermi_surface_at(&op, grid_res(c, op.rank))?;
    match report.verdict {
        FermiVerdict::Empty { .. } => {
            write_json(c, "report.json", "local", json!({ "points": [] }))?;
            println!("empty real Fermi set: no local data to compute");
            Ok(0)
        }
        FermiVerdict::LikelyPositiveDimensional { diagnostics } => {
            write_json(
                c,
                "report.json",
                "local",
                json!({ "verdict": "likely_positive_dimensional", "note": diagnostics }),
            )?;
            eprintln!("Fermi set looks positive-dimensional; point-local data is undefined");
            Ok(3)
        }
        FermiVerdict::Finite { points } => {
            let mut entries = Vec::with_capacity(points.len());
            for p in &points {
                let data =
                    taylor_expand_seeded(&op, &p.k, tol::L_MAX, tol::TOL_TAYLOR_ZERO, c.seed)?;
                println!(
                    "k = {:?}: r = {}, l0 = {}, nondegenerate: {}",
                    data.k0, data.r, data.l0, data.nondegenerate
                );
                entries.push(data.to_json());
            }
            write_json(c, "report.json", "local", json!({ "points": entries }))?;
            Ok(0)
        }
    }
}

fn cmd_dim(c: &Common) -> Result<u8, Error> {
    let op = load_operator(c)?;
    let report = liouville_dimension_at(&op, c.n_max, c.seed, c.grid)?;
    write_json(c, "report.json", "dim", report.to_json())?;
    print!("{}", report.to_table());
    Ok(if report.verdict == LiouvilleVerdict::HypothesesFail { 3 } else { 0 })
}

fn cmd_solutions(c: &Common) -> Result<u8, Error> {
    let op = load_operator(c)?;
    let report = real_fermi_surface_at(&op, grid_res(c, op.rank))?;
    match report.verdict {
        FermiVerdict::Empty { .. } => {
            write_json(c, "solutions.json", "solutions", json!([]))?;
            write_json(
                c,
                "report.json",
                "solutions",
                json!({ "points": 0, "solutions": 0, "max_residual": 0.0 }),
            )?;
            println!("empty real Fermi set: the solution space is zero");
            Ok(0)
        }
        FermiVerdict::LikelyPositiveDimensional { diagnostics } => {
            write_json(
                c,
                "report.json",
                "solutions",
                json!({ "verdict": "likely_positive_dimensional", "note": diagnostics }),
            )?;
            eprintln!("Fermi set looks positive-dimensional; refusing a finite basis");
            Ok(3)
        }
        FermiVerdict::Finite { points } => {
            let mut entries = Vec::new();
            let mut max_residual = 0.0f64;
            for p in &points {
                for sol in build_floquet_solutions(&op, &p.k, c.n_max)? {
                    let check = verify_solution(&op, &sol, c.window)?;
                    max_residual = max_residual.max(check.residual);
                    let mut entry = sol.to_json();
                    entry["residual"] = json!(check.residual);
                    entry["growth_exponent"] = json!(check.growth_exponent);
                    entries.push(entry);
                }
            }
            let count = entries.len();
            write_json(c, "solutions.json", "solutions", Value::Array(entries))?;
            write_json(
                c,
                "report.json",
                "solutions",
                json!({ "points": points.len(), "solutions": count, "max_residual": max_residual }),
            )?;
            println!(
                "built {} order-{} solution(s) at {} point(s); max residual {:.3e} on window R={}",
                count,
                c.n_max,
                points.len(),
                max_residual,
                c.window
            );
            Ok(0)
        }
    }
}

fn cmd_lambda(c: &Common, range: f64, samples: usize) -> Result<u8, Error> {
    let op = load_operator(c)?;
    let profile = lambda_profile_seeded(&op, range, samples, c.seed)?;
    let mut body = String::from("axis");
    for i in 1..=op.rank {
        body.push_str(&format!(",xi_{i}"));
    }
    body.push_str(",lambda\n");
    for (row, (xi, lam)) in profile.rows.iter().enumerate() {
        body.push_str(&(row / samples).to_string());
        for x in xi {
            body.push_str(&format!(",{x:.16e}"));
        }
        body.push_str(&format!(",{lam:.16e}\n"));
    }
    let csv_path = write_csv(c, "lambda.csv", "lambda", &body)?;
    let payload = json!({
        "lambda0": profile.lambda0,
        "xi_star": profile.xi_star,
        "concavity_certified": profile.concavity_certified,
        "rows": profile.rows.len(),
    });
    write_json(c, "report.json", "lambda", payload)?;
    println!(
        "Lambda_0 = {:.6} at xi* = {:?} (concavity certified: {}); wrote {} rows to {}",
        profile.lambda0,
        profile.xi_star,
        profile.concavity_certified,
        profile.rows.len(),
        csv_path.display()
    );
    Ok(0)
}

fn cmd_classify(c: &Common) -> Result<u8, Error> {
    let op = load_operator(c)?;
    let result = classify_liouville_case_seeded(&op, c.n_max, c.seed)?;
    let case = match result.case {
        LiouvilleCase::Vacuous => "vacuous",
        LiouvilleCase::Noncritical => "noncritical",
        LiouvilleCase::Critical => "critical",
    };
    let payload = json!({
        "case": case,
        "lambda_at_zero": result.lambda_at_zero,
        "lambda_max": result.lambda_max,
        "xi_star": result.xi_star,
        "expected_d": result.expected_d,
        "note": result.note,
    });
    write_json(c, "report.json", "classify", payload)?;
    println!(
        "case: {case}; Lambda(0) = {:.6e}; Lambda_0 = {:.6e}; xi* = {:?}",
        result.lambda_at_zero, result.lambda_max, result.xi_star
    );
    if let Some(note) = &result.note {
        println!("  {note}");
    }
    Ok(0)
}
