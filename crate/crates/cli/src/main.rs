mod cache;
mod claims;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use zerosum::search::DEFAULT_MAX_CALLS;

/// Exact zero-sum invariants and Ω-thresholds of small finite abelian groups.
#[derive(Parser, Debug)]
#[command(name = "zerosum", version, about)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Property evaluations allowed per search before reporting unknown.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_CALLS)]
    pub budget: u64,
    /// Worker threads within one command.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Neither read nor write the result cache.
    #[arg(long, global = true)]
    pub no_cache: bool,
    /// Cache file (default: $ZEROSUM_CACHE, else ~/.cache/zerosum/cache.json).
    #[arg(long, global = true, value_name = "PATH")]
    pub cache_file: Option<PathBuf>,
    /// Also write the full JSON result, with witnesses, to this file.
    #[arg(long, global = true, value_name = "PATH")]
    pub certificate: Option<PathBuf>,
    /// Seed for the randomized checks.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute one invariant: D, eta, s, E, dL, disc, D2 or qprime.
    Invariant {
        #[arg(long)]
        group: String,
        name: String,
        /// Length set for dL: `3`, `2,4`, `1..4` or `all`.
        #[arg(long)]
        lengths: Option<String>,
    },
    /// Finiteness and threshold of an Ω given as JSON.
    Domega {
        #[arg(long)]
        group: String,
        #[arg(long, conflicts_with = "omega_file", required_unless_present = "omega_file")]
        omega: Option<String>,
        #[arg(long)]
        omega_file: Option<PathBuf>,
    },
    /// Check the published claims on a list of groups.
    VerifyPaper {
        #[arg(long, num_args = 1.., value_name = "GROUP")]
        groups: Vec<String>,
        #[arg(long, num_args = 1.., value_delimiter = ',', value_name = "ID")]
        claims: Vec<String>,
        /// List the claim ids and exit.
        #[arg(long)]
        list: bool,
    },
    /// One row of invariants per group.
    Table {
        #[arg(long, num_args = 1.., value_name = "GROUP")]
        groups: Vec<String>,
        /// Cyclic groups C_a … C_b, written `a..b`.
        #[arg(long, value_name = "A..B")]
        cyclic: Option<String>,
        /// Every rank-2 group of order at most this.
        #[arg(long, value_name = "ORDER")]
        rank2: Option<u64>,
        /// Comma-separated invariant names; empty for a header-only table.
        #[arg(long, default_value = "D,eta,s,E")]
        invariants: String,
        #[arg(long)]
        lengths: Option<String>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Whether Ω is minimal with respect to t.
    MinimalCheck {
        #[arg(long)]
        group: String,
        #[arg(long)]
        omega: String,
        #[arg(long)]
        t: u64,
    },
    /// Whether a zero-sum sequence is essential with respect to t.
    EssentialCheck {
        #[arg(long)]
        group: String,
        /// The sequence, e.g. `1 2` or `1^2 2`.
        #[arg(long)]
        form: String,
        #[arg(long)]
        t: u64,
    },
    /// q(G) with the per-t essential profile.
    Q {
        #[arg(long)]
        group: String,
        /// Last t scanned (default: D2(G)).
        #[arg(long)]
        t_cap: Option<u64>,
    },
    /// Certify values of Vol(G).
    VolScan {
        #[arg(long)]
        group: String,
        #[arg(long, value_delimiter = ',')]
        targets: Option<Vec<u64>>,
        #[arg(long, default_value_t = 256)]
        max_supports: usize,
    },
    /// d over index-one minimal zero-sum sequences of C_p.
    LemkeKleitman {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = zerosum::structure::DEFAULT_PRIME_CAP)]
        cap: u64,
    },
}

/// Exit status of a completed command.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Success,
    Unknown,
    Fail,
}

impl Status {
    fn code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::Fail => 2,
            Status::Unknown => 3,
        }
    }
}

const EXIT_ERROR: u8 = 1;
const EXIT_USAGE: u8 = 4;

fn run(cli: Cli) -> anyhow::Result<Status> {
    let g = &cli.global;
    match cli.command {
        Command::Invariant { group, name, lengths } => commands::invariant(g, &group, &name, lengths.as_deref()),
        Command::Domega { group, omega, omega_file } => {
            let text = match (omega, omega_file) {
                (Some(text), _) => text,
                (None, Some(path)) => std::fs::read_to_string(&path)?,
                (None, None) => unreachable!("clap requires one of the two"),
            };
            commands::domega(g, &group, &text)
        }
        Command::VerifyPaper { groups, claims, list } => {
            if list {
                for (id, about) in claims::CLAIMS {
                    commands::out(&format!("{id:<26} {about}\n"))?;
                }
                return Ok(Status::Success);
            }
            claims::verify_paper(g, &groups, &claims)
        }
        Command::Table {
            groups,
            cyclic,
            rank2,
            invariants,
            lengths,
            format,
        } => commands::table(g, &groups, cyclic.as_deref(), rank2, &invariants, lengths.as_deref(), format),
        Command::MinimalCheck { group, omega, t } => commands::minimal_check(g, &group, &omega, t),
        Command::EssentialCheck { group, form, t } => commands::essential_check(g, &group, &form, t),
        Command::Q { group, t_cap } => commands::q(g, &group, t_cap),
        Command::VolScan {
            group,
            targets,
            max_supports,
        } => commands::vol_scan(g, &group, targets, max_supports),
        Command::LemkeKleitman { p, cap } => commands::lemke_kleitman(g, p, cap),
    }
}

/// Input that the library rejects is a usage error; running out of budget
/// is an unknown outcome.
fn error_code(err: &anyhow::Error) -> u8 {
    use zerosum::Error as E;
    if err.downcast_ref::<commands::UsageError>().is_some() {
        return EXIT_USAGE;
    }
    match err.downcast_ref::<E>() {
        Some(E::BudgetExceeded(_)) => Status::Unknown.code(),
        Some(E::PropertyContract { .. } | E::UnsafeCap { .. }) => EXIT_ERROR,
        Some(_) => EXIT_USAGE,
        None => EXIT_ERROR,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(status) => ExitCode::from(status.code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(error_code(&e))
        }
    }
}
