use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dgperf_cli::caps_from_env;
use dgperf_cli::document::{load_file, Workspace};
use dgperf_cli::report::{Bounds, Verdict};
use dgperf_cli::suites::{run_suite, SUITES};

#[derive(Parser)]
#[command(name = "dgperf", about = "Exact verification suites for rectified pullbacks, resolutions and dg-quotients on finite ringed spaces", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load and validate a document, printing a summary.
    Load { file: PathBuf },
    /// Run a verification suite against a document.
    Run {
        /// one of: functoriality, theta-cocycle, sigma-naturality,
        /// dg-laws, resolve, cover, audit, quotient, h0-compare
        suite: String,
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        eps_bound: usize,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// write the machine-readable report here
        #[arg(long)]
        report: Option<PathBuf>,
        /// negative control: mis-sign a cone and watch the laws fail
        #[arg(long, default_value_t = false)]
        debug_flip_cone_sign: bool,
    },
    /// Run the cardinality audit over every space in a document.
    Audit { file: PathBuf },
    /// Describe one record of a document.
    Describe { file: PathBuf, id: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(ok) => {
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<bool, String> {
    let caps = caps_from_env();
    match cli.command {
        Command::Load { file } => {
            let ws = load_file(&file, &caps)?;
            print_summary(&ws);
            Ok(true)
        }
        Command::Run {
            suite,
            file,
            seed,
            eps_bound,
            depth,
            samples,
            report,
            debug_flip_cone_sign,
        } => {
            if !SUITES.contains(&suite.as_str()) {
                return Err(format!(
                    "unknown suite '{suite}'; available: {}",
                    SUITES.join(", ")
                ));
            }
            let ws = load_file(&file, &caps)?;
            let bounds = Bounds {
                seed,
                eps_bound,
                depth,
                samples,
                debug_flip_cone_sign,
            };
            let rep = run_suite(&suite, &ws, &bounds)?;
            for case in &rep.cases {
                let mark = match case.verdict {
                    Verdict::Pass => "pass",
                    Verdict::Fail => "FAIL",
                    Verdict::Reported => "note",
                };
                match &case.counterexample {
                    Some(c) => println!("[{mark}] {} -- {}", case.id, c),
                    None => println!("[{mark}] {}", case.id),
                }
            }
            println!(
                "suite {}: {} passed, {} failed, {} reported ({} ms)",
                rep.suite, rep.passed, rep.failed, rep.reported, rep.wall_ms
            );
            if let Some(path) = report {
                std::fs::write(&path, rep.to_canonical_json())
                    .map_err(|e| format!("write {path:?}: {e}"))?;
            }
            Ok(rep.ok())
        }
        Command::Audit { file } => {
            let ws = load_file(&file, &caps)?;
            let bounds = Bounds::default();
            let rep = run_suite("audit", &ws, &bounds)?;
            for case in &rep.cases {
                let mark = if case.verdict == Verdict::Pass { "pass" } else { "FAIL" };
                println!("[{mark}] {}", case.id);
            }
            println!(
                "audit: {} passed, {} failed ({} ms)",
                rep.passed, rep.failed, rep.wall_ms
            );
            Ok(rep.ok())
        }
        Command::Describe { file, id } => {
            let ws = load_file(&file, &caps)?;
            describe(&ws, &id)
        }
    }
}

fn print_summary(ws: &Workspace) {
    println!(
        "loaded: {} algebras, {} algebra maps, {} spaces, {} maps, {} sheaves, {} complexes, {} chains",
        ws.algebras.len(),
        ws.algebra_maps.len(),
        ws.spaces.len(),
        ws.maps.len(),
        ws.sheaves.len(),
        ws.complexes.len(),
        ws.chains.len()
    );
    for (id, sp) in &ws.spaces {
        let opens = sp.opens(&ws.caps).map(|o| o.len()).unwrap_or(0);
        println!(
            "  space '{id}': {} points, {} opens, characteristic {}",
            sp.n_points(),
            opens,
            sp.p()
        );
    }
}

fn describe(ws: &Workspace, id: &str) -> Result<bool, String> {
    if let Some(a) = ws.algebras.get(id) {
        println!(
            "algebra '{id}': F_{}-algebra of dimension {}, basis [{}]{}",
            a.p(),
            a.dim(),
            a.labels().join(", "),
            if a.is_zero_algebra() { " (zero algebra)" } else { "" }
        );
        return Ok(true);
    }
    if let Some(m) = ws.algebra_maps.get(id) {
        println!(
            "algebra map '{id}': dim {} -> dim {}, validated unital and multiplicative",
            m.source().dim(),
            m.target().dim()
        );
        return Ok(true);
    }
    if let Some(sp) = ws.spaces.get(id) {
        println!(
            "space '{id}': {} points [{}], characteristic {}{}",
            sp.n_points(),
            sp.labels().join(", "),
            sp.p(),
            if ws.spec_spaces.contains_key(id) {
                ", spectrum of an algebra"
            } else {
                ""
            }
        );
        return Ok(true);
    }
    if let Some(m) = ws.maps.get(id) {
        println!(
            "map '{id}': {} points -> {} points, validated monotone with natural pullbacks",
            m.source().n_points(),
            m.target().n_points()
        );
        return Ok(true);
    }
    if let Some(s) = ws.sheaves.get(id) {
        let dims: Vec<String> = (0..s.space().n_points())
            .map(|x| format!("{}:{}", s.space().label(x), s.stalk_dim(x)))
            .collect();
        println!("sheaf '{id}': stalk dims {{{}}}", dims.join(", "));
        return Ok(true);
    }
    if let Some(c) = ws.complexes.get(id) {
        println!(
            "complex '{id}': window [{}, {}], component sizes [{}]",
            c.lo(),
            c.hi(),
            c.window()
                .map(|n| c.component(n).len().to_string())
                .collect::<Vec<_>>()
                .join(", ")
        );
        return Ok(true);
    }
    if let Some((g, f)) = ws.chains.get(id) {
        println!("chain '{id}': g = '{g}', f = '{f}'");
        return Ok(true);
    }
    Err(format!("no record with id '{id}'"))
}
