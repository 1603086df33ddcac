//! Command-line front end.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::algo_general::DEFAULT_CANDIDATE_CAP;
use crate::bench::{load_dir, run_bench, BenchOptions, GeneratorSpec};
use crate::circuit::{Circuit, ValidationMode};
use crate::exact::DEFAULT_NODE_BUDGET;
use crate::instance::{gen_random, Instance};
use crate::reductions::{extract_vc, vc_to_bstso, VCGraph};
use crate::solve::{run, Algorithm, SolveOptions};

/// Largest instance `verify` checks by exhaustive evaluation.
pub const EXHAUSTIVE_VARS: usize = 10;

#[derive(Parser, Debug)]
#[command(
    name = "treeshare",
    version,
    about = "Minimum shared circuits for symmetric products over overlapping variable sets"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a circuit for an instance and print a JSON report.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Algorithm::Auto)]
        algorithm: Algorithm,
        /// Closed-subset candidates enumerated per step by the general algorithm.
        #[arg(long, default_value_t = DEFAULT_CANDIDATE_CAP)]
        candidate_cap: usize,
        /// Search nodes the exact solver may expand.
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        node_budget: u64,
        /// Merge structurally identical gates afterwards.
        #[arg(long)]
        dedupe: bool,
        /// Circuit JSON output.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Graphviz output.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Also write the report to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Check a circuit against an instance.
    Verify {
        instance: PathBuf,
        circuit: PathBuf,
        /// Also warn about undirected cycles through shared gates.
        #[arg(long)]
        strict: bool,
    },
    /// Generate a seeded random instance.
    Gen {
        #[arg(long)]
        vars: usize,
        #[arg(long)]
        trees: usize,
        #[arg(long)]
        max_size: usize,
        /// Probability of drawing a variable already used by an earlier tree.
        #[arg(long, default_value_t = 0.5)]
        bias: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Turn a graph into the instance whose optimum encodes its minimum vertex cover.
    Reduce {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Read a vertex cover off a circuit for a reduced instance.
    ExtractVc {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        circuit: PathBuf,
    },
    /// Run algorithms over a corpus and compare with the exact optimum.
    Bench {
        /// Directory of instance files.
        #[arg(
            long,
            conflicts_with = "generate",
            required_unless_present = "generate"
        )]
        dir: Option<PathBuf>,
        /// Generator spec such as `vars=8,trees=6,k=3,bias=0.5,count=20,seed=1`.
        #[arg(long)]
        generate: Option<String>,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "auto")]
        algorithms: Vec<Algorithm>,
        /// Compute the optimum for instances with at most this many variables.
        #[arg(long, default_value_t = 10)]
        oracle_cap: usize,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        node_budget: u64,
        #[arg(long, default_value_t = DEFAULT_CANDIDATE_CAP)]
        candidate_cap: usize,
        /// Record wall-clock time per row (makes reports non-reproducible).
        #[arg(long)]
        timing: bool,
        /// JSON report output.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// A failure with its process exit code: 1 for bad input or unmet
/// preconditions, 2 for circuits that fail validation.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn input(message: impl ToString) -> Self {
        CliError {
            code: 1,
            message: message.to_string(),
        }
    }

    fn invalid(message: impl ToString) -> Self {
        CliError {
            code: 2,
            message: message.to_string(),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    match output {
        Some(p) => write(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|e| CliError::input(format!("stdout: {e}")))
        }
    }
}

fn load_instance(path: &Path) -> Result<Instance, CliError> {
    Instance::parse(&read(path)?)
        .map(|p| p.instance)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve {
            instance,
            algorithm,
            candidate_cap,
            node_budget,
            dedupe,
            output,
            dot,
            report,
        } => {
            let inst = load_instance(&instance)?;
            let opts = SolveOptions {
                algorithm,
                candidate_cap,
                node_budget,
                dedupe,
            };
            let outcome = run(&inst, &opts).map_err(CliError::input)?;
            let json =
                serde_json::to_string_pretty(&outcome.report).expect("report serializes") + "\n";
            if !outcome.report.validated {
                let diag = outcome.circuit.validate(&inst, ValidationMode::Lenient);
                let lines: Vec<String> = diag.errors.iter().map(ToString::to_string).collect();
                return Err(CliError::invalid(format!(
                    "produced circuit failed validation:\n{}",
                    lines.join("\n")
                )));
            }
            if let Some(p) = output {
                write(&p, &(outcome.circuit.to_json() + "\n"))?;
            }
            if let Some(p) = dot {
                write(&p, &outcome.circuit.to_dot())?;
            }
            if let Some(p) = report {
                write(&p, &json)?;
            }
            emit(None, &json)
        }
        Command::Verify {
            instance,
            circuit,
            strict,
        } => {
            let inst = load_instance(&instance)?;
            let c = Circuit::from_json(&read(&circuit)?)
                .map_err(|e| CliError::input(format!("{}: {e}", circuit.display())))?;
            let mode = if strict {
                ValidationMode::Strict
            } else {
                ValidationMode::Lenient
            };
            let report = c.validate(&inst, mode);
            for w in &report.warnings {
                log::warn!("{w}");
            }
            if !report.is_ok() {
                let lines: Vec<String> = report.errors.iter().map(ToString::to_string).collect();
                return Err(CliError::invalid(lines.join("\n")));
            }
            if c.num_vars <= EXHAUSTIVE_VARS {
                if let Err(bits) = c.check_exhaustive() {
                    let a: String = bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
                    return Err(CliError::invalid(format!(
                        "output mismatch under assignment {a} (x0 first)"
                    )));
                }
            }
            emit(
                None,
                &format!("valid: size {}, depth {}\n", c.size(), c.depth()),
            )
        }
        Command::Gen {
            vars,
            trees,
            max_size,
            bias,
            seed,
            format,
            output,
        } => {
            let inst = gen_random(vars, trees, max_size, bias, seed).map_err(CliError::input)?;
            let text = match format {
                Format::Text => inst.to_text(),
                Format::Json => inst.to_json() + "\n",
            };
            emit(output.as_deref(), &text)
        }
        Command::Reduce {
            graph,
            format,
            output,
        } => {
            let g = VCGraph::parse(&read(&graph)?)
                .map_err(|e| CliError::input(format!("{}: {e}", graph.display())))?;
            let inst = vc_to_bstso(&g);
            let text = match format {
                Format::Text => inst.to_text(),
                Format::Json => inst.to_json() + "\n",
            };
            emit(output.as_deref(), &text)
        }
        Command::ExtractVc { graph, circuit } => {
            let g = VCGraph::parse(&read(&graph)?)
                .map_err(|e| CliError::input(format!("{}: {e}", graph.display())))?;
            let c = Circuit::from_json(&read(&circuit)?)
                .map_err(|e| CliError::input(format!("{}: {e}", circuit.display())))?;
            let cover = extract_vc(&g, &c).map_err(CliError::invalid)?;
            let json = serde_json::json!({ "cover": cover, "size": cover.len() });
            emit(
                None,
                &(serde_json::to_string_pretty(&json).expect("json") + "\n"),
            )
        }
        Command::Bench {
            dir,
            generate,
            algorithms,
            oracle_cap,
            node_budget,
            candidate_cap,
            timing,
            output,
        } => {
            let corpus = match (dir, generate) {
                (Some(d), _) => load_dir(&d).map_err(CliError::input)?,
                (None, Some(spec)) => spec
                    .parse::<GeneratorSpec>()
                    .and_then(|s| s.generate())
                    .map_err(CliError::input)?,
                (None, None) => {
                    return Err(CliError::input("either --dir or --generate is required"))
                }
            };
            let opts = BenchOptions {
                algorithms,
                oracle_cap,
                solve: SolveOptions {
                    algorithm: Algorithm::Auto,
                    candidate_cap,
                    node_budget,
                    dedupe: false,
                },
                timing,
            };
            let report = run_bench(&corpus, &opts);
            if report.rows.iter().all(|r| r.size.is_none()) {
                return Err(CliError::input("every run failed"));
            }
            if let Some(p) = output {
                write(&p, &(report.to_json() + "\n"))?;
            }
            emit(None, &report.table())
        }
    }
}
