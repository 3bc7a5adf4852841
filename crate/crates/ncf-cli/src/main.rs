//! `ncf`: validate, inspect, convert, compare, enumerate, and verify
//! extensive game forms in the NCF/1 text format.
//!
//! Exit status is semantic: 0 for success or a true check, 1 for a check
//! that came out false (property fails, not isomorphic, enclosure refuted),
//! 2 for invalid input, and 3 for an internal assertion breach.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod report;
mod run;

pub const STATUS_OK: u8 = 0;
pub const STATUS_FALSE: u8 = 1;
pub const STATUS_INVALID: u8 = 2;
pub const STATUS_INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(name = "ncf", version, about = "Extensive game forms: kernel operations")]
pub(crate) struct Cli {
    /// Suppress all output; only the exit status is reported.
    #[arg(long, global = true)]
    quiet: bool,

    /// Worker threads for enumeration and verification (default: available
    /// parallelism; the NCF_JOBS environment variable is the fallback).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
pub(crate) enum Command {
    /// Parse and validate a document, naming the first violated axiom.
    Validate { file: PathBuf },
    /// Print the derived entities of a document in canonical order.
    Derive {
        file: PathBuf,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert a form to a node style, emitting the isomorphism witness.
    Convert {
        file: PathBuf,
        #[arg(long, value_enum)]
        to: StyleArg,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the witness mapping tables here.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Check a property; exit 0 if it holds, 1 with a witness if not.
    Check {
        file: PathBuf,
        #[arg(long)]
        property: String,
    },
    /// Decide whether two documents describe isomorphic objects.
    Iso {
        file_a: PathBuf,
        file_b: PathBuf,
        /// Write the witness mapping tables here when isomorphic.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Enumerate trees, preforms, or forms up to a node bound.
    Enumerate {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        nodes: usize,
        /// Cap on nonvacuous players (forms only; default: the node bound).
        #[arg(long)]
        players: Option<usize>,
        /// Print only the number of enumerated objects.
        #[arg(long, conflicts_with = "out")]
        count_only: bool,
        /// Write one file per object into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check an isomorphic-enclosure claim between two subcategories.
    VerifyEnclosure {
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long)]
        nodes: usize,
        /// Use the style converters instead of pure search where possible.
        #[arg(long)]
        constructive: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
pub(crate) enum StyleArg {
    Csq,
    Cset,
}

#[derive(Clone, Copy, ValueEnum)]
pub(crate) enum KindArg {
    Tree,
    Preform,
    Form,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let jobs = cli.jobs.or_else(|| {
        std::env::var("NCF_JOBS").ok().and_then(|v| v.parse().ok())
    });
    if let Some(jobs) = jobs {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global();
    }

    // Library invariants are enforced with assertions; a breach is reported
    // as an internal error, never as a semantic result. The default hook is
    // silenced so the single report below is all that reaches stderr.
    let quiet = cli.quiet;
    std::panic::set_hook(Box::new(|_| {}));
    let outcome = std::panic::catch_unwind(move || run::run(cli.command, quiet));
    match outcome {
        Ok(status) => ExitCode::from(status),
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            if !quiet {
                eprintln!("internal assertion breach: {message}");
            }
            ExitCode::from(STATUS_INTERNAL)
        }
    }
}

impl StyleArg {
    pub fn target(self) -> ncf::transport::TargetStyle {
        match self {
            StyleArg::Csq => ncf::transport::TargetStyle::ChoiceSequence,
            StyleArg::Cset => ncf::transport::TargetStyle::ChoiceSet,
        }
    }
}
