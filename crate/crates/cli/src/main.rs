use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use qcross_cli::commands::{
    cmd_acquire, cmd_estimate, cmd_gen, cmd_pca, cmd_report, cmd_route, cmd_subsystem,
    AcquireArgs, CircuitKind, EstimateArgs, GenArgs, PcaArgs, ReportArgs, RouteArgs, SamplerKind,
    SubsystemArgs,
};
use qcross_core::estimate::Protocol;
use std::path::PathBuf;

/// Cross-platform comparison pipeline over emulated quantum devices.
#[derive(Parser)]
#[command(name = "qcross", version, about)]
struct Cli {
    /// Master seed for the run (used by `gen`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Run directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate the test circuit and initialize the run directory.
    Gen {
        /// GHZ ladder on this many qubits.
        #[arg(long, conflicts_with = "qv")]
        ghz: Option<usize>,
        /// Quantum-volume circuit on this many qubits (needs --d).
        #[arg(long, requires = "d")]
        qv: Option<usize>,
        /// QV layer count.
        #[arg(long)]
        d: Option<usize>,
        /// Circuit label (defaults to ghz<N> / qv<N>d<D>).
        #[arg(long)]
        label: Option<String>,
        /// Run identifier (defaults to <label>-s<seed>).
        #[arg(long)]
        run_id: Option<String>,
    },
    /// Acquire randomized measurements on one or more platforms.
    Acquire {
        /// Platform profile file (.toml or .json); repeatable.
        #[arg(long = "platform", required = true)]
        platforms: Vec<PathBuf>,
        /// Number of measurement settings.
        #[arg(long, default_value_t = 100)]
        mu: usize,
        /// Shots per setting.
        #[arg(long, default_value_t = 2000)]
        ms: u32,
        /// Setting sampler: greedy or random.
        #[arg(long, default_value = "greedy")]
        sampler: String,
        /// Candidate pool size for the greedy sampler.
        #[arg(long, default_value_t = 200)]
        candidates: usize,
    },
    /// All-pairs cross-platform fidelities with bootstrap errors.
    Estimate {
        /// Protocol: auto, 1/I, or 2/II.
        #[arg(long, default_value = "auto")]
        protocol: String,
        /// Bootstrap replicates.
        #[arg(long, default_value_t = 100)]
        bootstrap: usize,
    },
    /// Subsystem fidelities for every qubit subset up to a size.
    Subsystem {
        #[arg(long, default_value_t = 2)]
        max_size: usize,
        #[arg(long, default_value = "auto")]
        protocol: String,
        #[arg(long, default_value_t = 100)]
        bootstrap: usize,
    },
    /// Pauli-feature matrix and PCA projection.
    Pca {
        /// Dataset file; repeatable. Defaults to every dataset in the run.
        #[arg(long = "dataset")]
        datasets: Vec<PathBuf>,
        /// Technology override, e.g. --technology ion_a=trapped-ion.
        #[arg(long = "technology")]
        technologies: Vec<String>,
        #[arg(long, default_value_t = 1000)]
        shots_per_sample: usize,
        #[arg(long, default_value_t = 500)]
        repeats: usize,
        #[arg(long, default_value_t = 2)]
        weight_cap: usize,
        #[arg(long, default_value_t = 20)]
        n_min: usize,
        /// Forbid shot reuse across repeats (defaults to auto).
        #[arg(long)]
        strict: Option<bool>,
        #[arg(long, default_value_t = 2)]
        components: usize,
    },
    /// SWAP-overhead curves of QV circuits on connectivity graphs.
    Route {
        /// Graph spec: line:N, complete:N, t-shaped-7, heavy-hex-fragment,
        /// or a graph JSON file; repeatable.
        #[arg(long = "graph", required = true)]
        graphs: Vec<String>,
        /// Circuit width.
        #[arg(long)]
        n: usize,
        /// Comma-separated layer counts.
        #[arg(long, default_value = "1,2,3,4,5,6")]
        d_values: String,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// Bundle every artifact of the run into report.json.
    Report,
}

fn parse_protocol(s: &str) -> Result<Option<Protocol>> {
    if s == "auto" {
        return Ok(None);
    }
    Ok(Some(Protocol::parse(s)?))
}

fn run(cli: Cli) -> Result<()> {
    let Some(run_dir) = cli.out.clone() else {
        bail!("--out <run directory> is required");
    };
    match cli.cmd {
        Cmd::Gen {
            ghz,
            qv,
            d,
            label,
            run_id,
        } => {
            let kind = match (ghz, qv) {
                (Some(n), None) => CircuitKind::Ghz { n },
                (None, Some(n)) => CircuitKind::Qv { n, d: d.unwrap() },
                _ => bail!("pass exactly one of --ghz <n> or --qv <n> --d <d>"),
            };
            let path = cmd_gen(&GenArgs {
                run_dir,
                kind,
                label,
                run_id,
                seed: cli.seed.unwrap_or(0),
            })?;
            println!("wrote {}", path.display());
        }
        Cmd::Acquire {
            platforms,
            mu,
            ms,
            sampler,
            candidates,
        } => {
            let paths = cmd_acquire(&AcquireArgs {
                run_dir,
                platform_paths: platforms,
                m_u: mu,
                m_s: ms,
                sampler: SamplerKind::parse(&sampler)?,
                n_candidates: candidates,
                threads: cli.threads,
            })?;
            for p in paths {
                println!("wrote {}", p.display());
            }
        }
        Cmd::Estimate {
            protocol,
            bootstrap,
        } => {
            let out = cmd_estimate(&EstimateArgs {
                run_dir,
                protocol: parse_protocol(&protocol)?,
                bootstrap_b: bootstrap,
                threads: cli.threads,
            })?;
            println!(
                "wrote {} (+{} pair files, protocol {})",
                out.matrix_csv.display(),
                out.pair_files.len(),
                out.protocol.as_str()
            );
        }
        Cmd::Subsystem {
            max_size,
            protocol,
            bootstrap,
        } => {
            let path = cmd_subsystem(&SubsystemArgs {
                run_dir,
                max_size,
                protocol: parse_protocol(&protocol)?,
                bootstrap_b: bootstrap,
                threads: cli.threads,
            })?;
            println!("wrote {}", path.display());
        }
        Cmd::Pca {
            datasets,
            technologies,
            shots_per_sample,
            repeats,
            weight_cap,
            n_min,
            strict,
            components,
        } => {
            let technologies = technologies
                .iter()
                .map(|t| {
                    t.split_once('=')
                        .map(|(a, b)| (a.to_string(), b.to_string()))
                        .ok_or_else(|| anyhow::anyhow!("--technology expects name=tag, got {t:?}"))
                })
                .collect::<Result<Vec<_>>>()?;
            let (features, projection, variance) = cmd_pca(&PcaArgs {
                run_dir,
                datasets,
                technologies,
                shots_per_sample,
                n_repeat: repeats,
                weight_cap,
                n_min,
                strict,
                components,
                threads: cli.threads,
            })?;
            println!("wrote {}", features.display());
            println!("wrote {}", projection.display());
            println!("wrote {}", variance.display());
        }
        Cmd::Route {
            graphs,
            n,
            d_values,
            trials,
        } => {
            let d_values = d_values
                .split(',')
                .map(|s| Ok(s.trim().parse::<usize>()?))
                .collect::<Result<Vec<_>>>()?;
            let path = cmd_route(&RouteArgs {
                run_dir,
                graphs,
                n,
                d_values,
                trials,
                threads: cli.threads,
            })?;
            println!("wrote {}", path.display());
        }
        Cmd::Report => {
            let path = cmd_report(&ReportArgs { run_dir })?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
