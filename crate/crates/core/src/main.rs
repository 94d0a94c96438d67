use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use centerfocus_core::classify::{
    analyze, emit_report, format_table, run_corpus, AnalysisConfig, ReportFormat, Rho0Grid, SystemFile,
};
use centerfocus_core::diagram::{newton_diagram, remove_common_factor, Weight};

const EXIT_FIXTURE_FAILED: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_INVARIANT: u8 = 3;

/// Center-focus analysis of monodromic singular points of planar polynomial vector fields.
///
/// The thread count for parallel sampling is read from CENTERFOCUS_THREADS.
#[derive(Parser)]
#[command(name = "centerfocus", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze the singular point at the origin of a system file.
    Analyze {
        file: PathBuf,
        /// Restrict to one weight, e.g. `1,2`.
        #[arg(long, value_parser = parse_weight)]
        weights: Option<Weight>,
        /// Emit JSON instead of text.
        #[arg(long)]
        json: bool,
        /// Starting radii `min,max,count` (geometric).
        #[arg(long = "rho0-grid", value_parser = parse_grid)]
        rho0_grid: Option<Rho0Grid>,
        #[arg(long = "bautin-order")]
        bautin_order: Option<usize>,
        #[arg(long = "branch-order")]
        branch_order: Option<usize>,
    },
    /// Print the Newton diagram of a system file.
    Diagram {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Run the corpus fixtures, optionally only the named one.
    Corpus {
        name: Option<String>,
        #[arg(long)]
        json: bool,
    },
}

fn parse_weight(s: &str) -> Result<Weight, String> {
    let (p, q) = s.split_once(',').ok_or("expected p,q")?;
    let p: u32 = p.trim().parse().map_err(|e| format!("p: {e}"))?;
    let q: u32 = q.trim().parse().map_err(|e| format!("q: {e}"))?;
    Weight::new(p, q).map_err(|e| e.to_string())
}

fn parse_grid(s: &str) -> Result<Rho0Grid, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [a, b, n] = parts.as_slice() else {
        return Err("expected min,max,count".into());
    };
    let a: f64 = a.parse().map_err(|e| format!("min: {e}"))?;
    let b: f64 = b.parse().map_err(|e| format!("max: {e}"))?;
    let count: usize = n.parse().map_err(|e| format!("count: {e}"))?;
    Ok(Rho0Grid { min: a.min(b), max: a.max(b), count })
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("CENTERFOCUS_THREADS") {
        let n: usize = v.trim().parse().with_context(|| format!("CENTERFOCUS_THREADS={v:?}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn write_out(bytes: &[u8]) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(bytes)?;
    out.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<u8, (u8, anyhow::Error)> {
    let input = |e: anyhow::Error| (EXIT_INPUT, e);
    let internal = |e: anyhow::Error| (EXIT_INVARIANT, e);
    init_threads().map_err(input)?;
    match cli.command {
        Command::Analyze { file, weights, json, rho0_grid, bautin_order, branch_order } => {
            let sys = SystemFile::load(&file).map_err(|e| input(e.into()))?;
            let mut cfg: AnalysisConfig = sys.config().map_err(|e| input(e.into()))?;
            if weights.is_some() {
                cfg.weights = weights;
            }
            if let Some(g) = rho0_grid {
                cfg.rho0_grid = g;
            }
            if let Some(k) = bautin_order {
                cfg.bautin_order = k;
            }
            if let Some(m) = branch_order {
                cfg.branch_order = m;
            }
            cfg.validate().map_err(|e| input(e.into()))?;
            let report = analyze(&sys, &cfg).map_err(|e| input(e.into()))?;
            let format = if json { ReportFormat::Json } else { ReportFormat::Text };
            write_out(&emit_report(&report, format)).map_err(internal)?;
            Ok(if report.invariant_violations.is_empty() { 0 } else { EXIT_INVARIANT })
        }
        Command::Diagram { file, json } => {
            let sys = SystemFile::load(&file).map_err(|e| input(e.into()))?;
            let field = sys.field().map_err(|e| input(e.into()))?;
            let reduced = remove_common_factor(&field).map_err(|e| input(e.into()))?;
            let d = newton_diagram(&reduced.field).map_err(|e| input(e.into()))?;
            let text = if json {
                let mut s = serde_json::to_string_pretty(&d).map_err(|e| internal(e.into()))?;
                s.push('\n');
                s
            } else {
                let mut s = String::new();
                let verts: Vec<String> = d.vertices.iter().map(|v| format!("({},{})", v.0, v.1)).collect();
                s.push_str(&format!("vertices: {}\n", verts.join(" ")));
                for e in &d.edges {
                    s.push_str(&format!(
                        "edge ({},{})–({},{}): weight {}, r = {}\n",
                        e.start.0, e.start.1, e.end.0, e.end.1, e.weight, e.leading_degree
                    ));
                }
                for w in &d.warnings {
                    s.push_str(&format!("warning: {w}\n"));
                }
                s
            };
            write_out(text.as_bytes()).map_err(internal)?;
            Ok(0)
        }
        Command::Corpus { name, json } => {
            let outcomes = run_corpus(name.as_deref()).map_err(|e| input(e.into()))?;
            let text = if json {
                let mut s = serde_json::to_string_pretty(&outcomes).map_err(|e| internal(e.into()))?;
                s.push('\n');
                s
            } else {
                format_table(&outcomes)
            };
            write_out(text.as_bytes()).map_err(internal)?;
            if outcomes.iter().all(|o| o.passed()) {
                Ok(0)
            } else {
                Ok(EXIT_FIXTURE_FAILED)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err((code, e)) => {
            eprintln!("error: {e}");
            ExitCode::from(code)
        }
    }
}

