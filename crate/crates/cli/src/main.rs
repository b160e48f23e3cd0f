mod commands;
mod statefmt;

use clap::{Args, Parser, Subcommand};

/// Post-selected teleportation simulator: loop circuits, encrypted future
/// measurements, and multistage pipelining, with reproducible seeds.
#[derive(Parser)]
#[command(name = "backwire", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonRunArgs {
    /// Master seed; per-trial streams are derived as (seed, trial id).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of trials.
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Run the algebraic self-check suite; exit 1 on any identity failure.
    Verify {
        /// Tolerance for the loop-vs-partial-trace checks.
        #[arg(long, default_value_t = 1e-10, value_parser = parse_positive)]
        tolerance: f64,
        /// Seed for the random-unitary checks.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the JSON report here.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
        /// Fault injection (negative control): "wrong-sigma".
        #[arg(long, hide = true)]
        sabotage: Option<String>,
    },
    /// Loop a CNOT on a control state α∣0⟩+β∣1⟩ and histogram the outcomes.
    CnotDemo {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
        #[command(flatten)]
        run: CommonRunArgs,
        /// Histogram CSV path.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Simulate a unitary with one wire looped back in time.
    Loop {
        /// Loop unitary: "cnot", "swap", or "random" (seeded Haar-style).
        #[arg(long, default_value = "cnot")]
        gate: String,
        /// Total wires of the unitary (only for --gate random).
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(2..=8))]
        qubits: u64,
        /// Which wire is fed back (default: the last one).
        #[arg(long)]
        loop_qubit: Option<usize>,
        /// Input state on the open wires (see state grammar in --help-grammar).
        #[arg(long, default_value = "comp:0")]
        state: String,
        #[command(flatten)]
        run: CommonRunArgs,
        /// Tolerance for the loop identity check.
        #[arg(long, default_value_t = 1e-10, value_parser = parse_positive)]
        tolerance: f64,
        /// Histogram CSV path.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Run the encrypted joint-measurement protocol and persist the records.
    EncryptRun {
        /// Two-qubit state to measure tomorrow ("bell:xy", "comp:b₀b₁", "amp:…").
        #[arg(long)]
        state: String,
        #[command(flatten)]
        run: CommonRunArgs,
        /// Trial-record JSONL path; the today-histogram CSV lands next to it.
        #[arg(long)]
        out: std::path::PathBuf,
        /// Switch to --substitute-state from this trial index onward.
        #[arg(long, requires = "substitute_state")]
        substitute_at: Option<u64>,
        /// Replacement two-qubit state for the substitution experiment.
        #[arg(long, requires = "substitute_at")]
        substitute_state: Option<String>,
    },
    /// Decode a persisted record file (pure post-processing; never sees the state).
    Decode {
        /// Trial-record JSONL file produced by encrypt-run.
        records: std::path::PathBuf,
        /// Decoded JSONL path; the decoded-histogram CSV lands next to it.
        #[arg(long)]
        out: std::path::PathBuf,
    },
    /// Chain unitary stages by repeated post-selected teleportation.
    Multistage {
        /// Comma-separated stages: I, X, Y, Z, H, or mat:a;b;c;d (row-major,
        /// entries re or re/im).
        #[arg(long)]
        stages: String,
        /// Single-qubit input state.
        #[arg(long, default_value = "comp:0")]
        state: String,
        #[command(flatten)]
        run: CommonRunArgs,
        /// Trial JSONL path.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err("must be a positive finite number".into())
    }
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Verify {
            tolerance,
            seed,
            out,
            sabotage,
        } => commands::verify(tolerance, seed, out, sabotage),
        Command::CnotDemo {
            alpha,
            beta,
            run,
            out,
        } => commands::cnot_demo(alpha, beta, run.trials, run.seed, out),
        Command::Loop {
            gate,
            qubits,
            loop_qubit,
            state,
            run,
            tolerance,
            out,
        } => commands::loop_run(
            &gate,
            qubits as usize,
            loop_qubit,
            &state,
            run.trials,
            run.seed,
            tolerance,
            out,
        ),
        Command::EncryptRun {
            state,
            run,
            out,
            substitute_at,
            substitute_state,
        } => commands::encrypt_run(
            &state,
            run.trials,
            run.seed,
            out,
            substitute_at.zip(substitute_state),
        ),
        Command::Decode { records, out } => commands::decode(records, out),
        Command::Multistage {
            stages,
            state,
            run,
            out,
        } => commands::multistage(&stages, &state, run.trials, run.seed, out),
    };

    std::process::exit(match outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    });
}
