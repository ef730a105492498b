use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sealedbottle::commands::{self, GenArgs, MatchArgs, Report, SimulateArgs, SweepArgs};
use sealedbottle::config::{Protocol, RequestConfig};
use sealedbottle::{CliError, EXIT_USAGE, EXIT_VIOLATION};
use sealedbottle_core::profile::{AttrCount, PopulationParams};

#[derive(Parser)]
#[command(
    name = "sealedbottle",
    version,
    about = "Privacy-preserving profile matching: data, matching runs and network simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ProtocolArg {
    P1,
    P2,
    P3,
}

impl From<ProtocolArg> for Protocol {
    fn from(p: ProtocolArg) -> Self {
        match p {
            ProtocolArg::P1 => Protocol::P1,
            ProtocolArg::P2 => Protocol::P2,
            ProtocolArg::P3 => Protocol::P3,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic population as `user_id,category,value` CSV.
    Gen {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        categories: usize,
        #[arg(long, default_value_t = 4096)]
        values: usize,
        /// Zipf exponent of value popularity; 0 is uniform.
        #[arg(long, default_value_t = 1.0)]
        zipf_s: f64,
        /// Exactly this many attributes per user instead of the Poisson default.
        #[arg(long)]
        attrs: Option<usize>,
        #[arg(long, default_value_t = 6.0)]
        attrs_mean: f64,
        #[arg(long, default_value_t = 20)]
        attrs_max: usize,
        #[arg(long, short)]
        out: PathBuf,
        /// Also write per-category value counts as JSON.
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Validate a population CSV and summarize it.
    Load {
        population: PathBuf,
        #[arg(long)]
        stats_out: Option<PathBuf>,
    },
    /// Run one request against every user and cross-check with the oracle.
    Match {
        population: PathBuf,
        #[arg(long)]
        stats: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "p1")]
        protocol: ProtocolArg,
        #[arg(long, default_value_t = 11)]
        p: u32,
        /// `category=value` or a bare tag; repeatable.
        #[arg(long)]
        necessary: Vec<String>,
        #[arg(long)]
        optional: Vec<String>,
        #[arg(long, conflicts_with = "theta")]
        beta: Option<usize>,
        #[arg(long)]
        theta: Option<f64>,
        /// Use the first M_T attributes of this user (by position in the file) as the request.
        #[arg(long, requires = "m_t", conflicts_with_all = ["necessary", "optional"])]
        from_user: Option<u32>,
        #[arg(long)]
        m_t: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// List every accepted user.
        #[arg(long)]
        list: bool,
    },
    /// Simulate one request over a network; see the README for the config format.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
    /// Run a (protocol, p, θ, seed) grid and write metrics CSV.
    Sweep {
        config: PathBuf,
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        jobs: u64,
    },
    /// Vicinity overlap of users on the hexagonal lattice.
    Geo { config: Option<PathBuf> },
}

fn run(cmd: Command) -> Result<Report, CliError> {
    match cmd {
        Command::Gen {
            n,
            seed,
            categories,
            values,
            zipf_s,
            attrs,
            attrs_mean,
            attrs_max,
            out,
            stats,
        } => {
            let attrs_per_user = match attrs {
                Some(k) => AttrCount::Fixed(k),
                None => AttrCount::Poisson {
                    mean: attrs_mean,
                    max: attrs_max,
                },
            };
            let params = PopulationParams {
                n: n as usize,
                categories,
                values_per_category: values,
                zipf_s,
                attrs_per_user,
                seed,
            };
            commands::gen(&GenArgs { params, out, stats })
        }
        Command::Load {
            population,
            stats_out,
        } => commands::load(&population, stats_out.as_deref()),
        Command::Match {
            population,
            stats,
            protocol,
            p,
            necessary,
            optional,
            beta,
            theta,
            from_user,
            m_t,
            seed,
            list,
        } => {
            let request = RequestConfig {
                protocol: protocol.into(),
                p,
                initiator: from_user.unwrap_or(0),
                necessary,
                optional,
                from_initiator: from_user.and(m_t),
                beta,
                theta,
            };
            commands::match_population(&MatchArgs {
                population,
                stats,
                request,
                seed,
                list,
            })
        }
        Command::Simulate {
            config,
            trace,
            metrics,
        } => commands::simulate(&SimulateArgs {
            config,
            trace,
            metrics,
        }),
        Command::Sweep { config, out, jobs } => commands::sweep(&SweepArgs {
            config,
            out,
            jobs: jobs as usize,
        }),
        Command::Geo { config } => commands::geo(config.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(report) => {
            print!("{}", report.text);
            match report.violation {
                Some(v) => {
                    eprintln!("property violated: {v}");
                    ExitCode::from(EXIT_VIOLATION)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
