use clap::{Parser, Subcommand};
use rhb_cli::config::Command;
use rhb_cli::CliError;
use std::path::PathBuf;
use std::process::ExitCode;

/// Periodic solutions of nonlinear ODEs by collocation harmonic balance.
#[derive(Parser)]
#[command(name = "rhb", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory receiving the output files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides the random seed of `montecarlo` and `identity-check`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true, env = "RHB_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Solve for one periodic orbit and verify it by integration.
    Solve,
    /// Continue branches of orbits over a frequency range.
    Sweep,
    /// Multistart Newton with clustering and physicality statistics.
    Montecarlo,
    /// Tabulate the aliasing matrix against its closed form.
    Aliasing,
    /// Check the projection identity on random cases.
    IdentityCheck,
    /// Integrate from a solved orbit and measure orbit keeping.
    Propagate,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Solve => Command::Solve,
            Cmd::Sweep => Command::Sweep,
            Cmd::Montecarlo => Command::Montecarlo,
            Cmd::Aliasing => Command::Aliasing,
            Cmd::IdentityCheck => Command::IdentityCheck,
            Cmd::Propagate => Command::Propagate,
        }
    }
}

fn execute(cli: &Cli) -> Result<i32, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    let command = Command::from(cli.command);
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?,
        None if command == Command::IdentityCheck => String::new(),
        None => {
            return Err(CliError::Config(
                "--config is required for this command".into(),
            ))
        }
    };
    let outcome = rhb_cli::run(command, &text, &cli.out, cli.seed)?;
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    if let Some(reason) = &outcome.failure {
        eprintln!("rhb: {reason}");
    }
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("rhb: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
