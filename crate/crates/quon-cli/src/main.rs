//! `quon` — evaluates diagram DSL files, runs the built-in verification
//! suites, the Clifford census, braid-word searches and teleportation demos.

use clap::{Parser, Subcommand};
use quon_cli::{dsl, engine, load_config, parse_dims, report, CheckArgs, FileConfig};
use quon_core::numerics::Tensor;
use quon_core::pf_algebra::{
    jw_rep, pf_adjoint, pf_charge, pf_generator, pf_mul, pf_twisted_mul, ChargeValue,
};
use quon_core::qudit_core::{clifford_order, gate, random_state, teleport_run, GateName};
use quon_core::quon_calculus::find_word;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "quon", version, about = "quon diagram engine", disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every built-in verification suite.
    Check {
        /// Comma-separated qudit dimensions.
        #[arg(long)]
        dims: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Random teleportation states per dimension.
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Random soundness contexts per rewrite rule.
        #[arg(long, default_value_t = 100)]
        contexts: usize,
        /// Write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Run the suite cells on one thread.
        #[arg(long)]
        sequential: bool,
        /// Optional key = value configuration file (dims, tol, seed).
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Parse and run a .quon document (checks and evals).
    Eval {
        file: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Parse a .quon document and print the normal form of its diagrams.
    Normalize { file: PathBuf },
    /// Breadth-first census of the group generated by X, Z, F, G mod phase.
    Clifford {
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 1_000_000)]
        cap: usize,
    },
    /// Teleport seeded random states across every measurement outcome.
    Teleport {
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Search braid words up to a length for a target gate.
    Search {
        #[arg(long)]
        dim: usize,
        /// One of F, F2, G, X, Y, Z, identity.
        #[arg(long)]
        target: String,
        #[arg(long, default_value_t = 4)]
        max_len: usize,
    },
    /// Parafermion algebra demonstration.
    Pf {
        #[arg(long)]
        dim: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Check {
            dims,
            tol,
            seed,
            trials,
            contexts,
            report: report_path,
            sequential,
            config,
        } => {
            let file_cfg = match config {
                Some(path) => load_config(&path)?,
                None => FileConfig::default(),
            };
            let dims = match dims {
                Some(text) => parse_dims(&text)?,
                None => file_cfg.dims.unwrap_or_else(|| vec![2, 3, 4, 5]),
            };
            let tol = tol.or(file_cfg.tol).unwrap_or(1e-9);
            let seed = seed.or(file_cfg.seed).unwrap_or(42);
            let args = CheckArgs {
                dims: dims.clone(),
                tol,
                seed,
                trials,
                contexts,
                sequential,
            };
            let (suite_report, text) = quon_cli::run_check_suite(&args);
            print!("{text}");
            if let Some(path) = report_path {
                let json = report::to_json(&report::build_report(
                    &dims,
                    seed,
                    tol,
                    &suite_report.records,
                ));
                std::fs::write(&path, json).map_err(|e| format!("{}: {e}", path.display()))?;
            }
            Ok(if suite_report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Eval {
            file,
            tol,
            report: report_path,
            config,
        } => {
            let file_cfg = match config {
                Some(path) => load_config(&path)?,
                None => FileConfig::default(),
            };
            let tol = tol.or(file_cfg.tol).unwrap_or(1e-9);
            let text =
                std::fs::read_to_string(&file).map_err(|e| format!("{}: {e}", file.display()))?;
            let doc = dsl::parse(&text).map_err(|e| e.to_string())?;
            let outcome = engine::run_document(&doc, tol).map_err(|e| e.to_string())?;
            print!("{}", outcome.output);
            let pass = outcome.records.iter().all(|r| r.passed());
            if let Some(path) = report_path {
                let json = report::to_json(&report::build_report(
                    &outcome.dims,
                    0,
                    tol,
                    &outcome.records,
                ));
                std::fs::write(&path, json).map_err(|e| format!("{}: {e}", path.display()))?;
            }
            Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Normalize { file } => {
            let text =
                std::fs::read_to_string(&file).map_err(|e| format!("{}: {e}", file.display()))?;
            let doc = dsl::parse(&text).map_err(|e| e.to_string())?;
            let out = engine::normalize_document(&doc).map_err(|e| e.to_string())?;
            print!("{out}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Clifford { dim, cap } => {
            if dim == 0 {
                return Err("dimension must be at least 1".into());
            }
            match clifford_order(dim, cap) {
                Ok(n) => {
                    println!("{n}");
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => Err(e.to_string()),
            }
        }
        Command::Teleport { dim, trials, seed } => {
            if dim == 0 {
                return Err("dimension must be at least 1".into());
            }
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut worst: f64 = 1.0;
            for trial in 0..trials {
                let phi = random_state(dim, &mut rng);
                for a in 0..dim {
                    for b in 0..dim {
                        let rep = teleport_run(dim, &phi, (a, b)).map_err(|e| e.to_string())?;
                        worst = worst.min(rep.fidelity);
                        if trial == 0 {
                            println!(
                                "outcome ({a},{b}): fidelity {:.12} correction {}",
                                rep.fidelity, rep.correction
                            );
                        }
                    }
                }
            }
            println!("worst fidelity over {trials} trials: {worst:.12}");
            Ok(if worst >= 1.0 - 1e-9 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Search {
            dim,
            target,
            max_len,
        } => {
            if dim == 0 {
                return Err("dimension must be at least 1".into());
            }
            let t: Tensor = match target.as_str() {
                "F" => gate(dim, GateName::F),
                "F2" => gate(dim, GateName::F2),
                "G" => gate(dim, GateName::G),
                "X" => gate(dim, GateName::X),
                "Y" => gate(dim, GateName::Y),
                "Z" => gate(dim, GateName::Z),
                "identity" => Tensor::identity(dim, 1),
                other => return Err(format!("unknown target '{other}'")),
            };
            match find_word(dim, &t, max_len) {
                Ok(word) => {
                    if word.gens.is_empty() {
                        println!("found: (empty word)");
                    } else {
                        println!("found: {}", word.render());
                    }
                    Ok(ExitCode::SUCCESS)
                }
                Err(_) => {
                    println!("not found within length {max_len}");
                    Ok(ExitCode::from(1))
                }
            }
        }
        Command::Pf { dim } => {
            if dim == 0 {
                return Err("dimension must be at least 1".into());
            }
            let d = dim;
            let n = 2;
            let c1 = pf_generator(d, n, 1, 1).map_err(|e| e.to_string())?;
            let c2 = pf_generator(d, n, 2, 1).map_err(|e| e.to_string())?;
            println!("generators of PF_{n} at order {d}:");
            println!("  c1 = {c1}");
            println!("  c2 = {c2}");
            let prod = pf_mul(&c2, &c1).map_err(|e| e.to_string())?;
            println!("  c2 * c1 = {prod}");
            let adj = pf_adjoint(&prod);
            println!("  (c2 * c1)* = {adj}");
            match pf_charge(&prod) {
                ChargeValue::Value(v) => println!("  charge(c2 * c1) = {v}"),
                ChargeValue::NonHomogeneous => println!("  charge(c2 * c1) = mixed"),
            }
            let tw = pf_twisted_mul(&c1, &c2).map_err(|e| e.to_string())?;
            println!("  twisted(c1, c2) = {tw}");
            let m = jw_rep(&c1).map_err(|e| e.to_string())?;
            println!("  jw(c1) is a {0}x{0} matrix:", m.out_dim());
            for row in 0..m.out_dim() {
                let cells: Vec<String> = (0..m.in_dim())
                    .map(|col| {
                        let v = m.entries()[row * m.in_dim() + col];
                        format!("{:+.4}{:+.4}i", v.re, v.im)
                    })
                    .collect();
                println!("    [{}]", cells.join(", "));
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
