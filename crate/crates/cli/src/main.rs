//! `rankcanon` - exact canonical forms and rank-inequality checks for
//! bipartite block matrices and multipartite states.
//!
//! Exit codes: 0 when all checks pass, 1 when a mathematical check failed
//! (an implementation bug; a reproduction seed is printed where one exists),
//! 2 on usage, parse, or input errors.

mod commands;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "rankcanon",
    version,
    about = "Exact block-matrix canonicalization and rank-inequality verification"
)]
struct Cli {
    /// Emit machine-readable key=value lines instead of prose.
    #[arg(long, global = true)]
    machine: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Canonicalize a block matrix and print its staircase profile.
    Canon {
        /// Input blockmatrix file.
        #[arg(long = "in")]
        input: PathBuf,
        /// Write the reduced canonical form to this file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the local-transform certificate to this file.
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// Check the partial-transpose rank bound on a block matrix.
    Verify {
        /// Input blockmatrix file.
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Run the rank-product inequality suite on a density matrix.
    Entropy {
        /// Input density file.
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Necessary-condition check for three two-party marginals.
    Marginal {
        /// Density file for the AB marginal.
        #[arg(long)]
        ab: PathBuf,
        /// Density file for the AC marginal.
        #[arg(long)]
        ac: PathBuf,
        /// Density file for the BC marginal.
        #[arg(long)]
        bc: PathBuf,
        /// Exit nonzero when the verdict rules out a joint state.
        #[arg(long)]
        expect_consistent: bool,
    },
    /// Run the full canonicalization pipeline on seeded random matrices.
    Fuzz {
        /// Number of instances.
        #[arg(long)]
        trials: usize,
        /// Base seed; trial i uses seed + i.
        #[arg(long)]
        seed: u64,
        /// Grid and block dimensions as m1,n1,m2,n2.
        #[arg(long)]
        dims: String,
        /// Upper bound on the Schmidt rank of generated instances.
        #[arg(long)]
        max_sr: Option<usize>,
    },
    /// Print the seven reduced ranks of a four-party pure state.
    Vec {
        /// Input density file.
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let machine = cli.machine;
    let result = match &cli.command {
        Command::Canon { input, out, cert } => {
            commands::canon(input, out.as_deref(), cert.as_deref(), machine)
        }
        Command::Verify { input } => commands::verify(input, machine),
        Command::Entropy { input } => commands::entropy(input, machine),
        Command::Marginal {
            ab,
            ac,
            bc,
            expect_consistent,
        } => commands::marginal(ab, ac, bc, *expect_consistent, machine),
        Command::Fuzz {
            trials,
            seed,
            dims,
            max_sr,
        } => commands::fuzz(*trials, *seed, dims, *max_sr, machine),
        Command::Vec { input } => commands::vec_command(input, machine),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
