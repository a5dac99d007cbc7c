use clap::{Parser, Subcommand, ValueEnum};
use floer_qkernel::commands::{
    cmd_cohomology, cmd_crossratio, cmd_example, cmd_validate, cmd_verify, error_exit_code, init_threads_from_env,
    parse_energy_arg, RunOptions, SuiteId, Which, DEFAULT_SEED,
};
use floer_qkernel::report::Report;
use floer_qkernel::Result;
use std::process::ExitCode;

/// Exact verification of deformed q-operator backends.
///
/// Exit codes: 0 pass, 1 verification failure, 2 input error,
/// 3 undecidable below the energy cutoff.
#[derive(Parser)]
#[command(name = "floer-qkernel", version)]
struct Cli {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(clap::Args)]
struct Bounds {
    /// Largest number of boundary inputs.
    #[arg(long, default_value_t = 3)]
    max_k: usize,
    /// Largest number of interior inputs.
    #[arg(long, default_value_t = 2)]
    max_l: usize,
    /// Energy cutoff, an integer or fraction.
    #[arg(long, default_value = "10")]
    energy: String,
    /// Bulk deformation gamma, overriding the file.
    #[arg(long)]
    gamma: Option<String>,
    /// Boundary deformation b, overriding the file.
    #[arg(long)]
    b: Option<String>,
    /// Drop the terms that carry the differential of the models.
    #[arg(long)]
    exclude_degenerate: bool,
}

impl Bounds {
    fn options(&self) -> Result<RunOptions> {
        Ok(RunOptions {
            max_k: self.max_k,
            max_l: self.max_l,
            energy: parse_energy_arg(&self.energy)?,
            gamma: self.gamma.clone(),
            b: self.b.clone(),
            exclude_degenerate: self.exclude_degenerate,
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a backend (a path or a bundled name).
    Validate {
        backend: String,
        /// Energy cutoff for the declared bounding pair.
        #[arg(long, default_value = "10")]
        energy: String,
    },
    /// Run verification suites.
    Verify {
        /// Backend path or bundled name; the signs suite needs none.
        backend: Option<String>,
        /// all, axioms, signs, theorems, struc, gstruc, gzstruc, hstruc,
        /// ggstruc, lstruc or rstruc.
        #[arg(long, default_value = "all")]
        suite: String,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// Ranks, generators and product tables of HF or QH.
    Cohomology {
        backend: String,
        #[arg(long, default_value = "HF")]
        which: String,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// Replay a worked example.
    Example {
        #[arg(long, default_value = "clifford")]
        name: String,
        #[arg(long, default_value = "10")]
        energy: String,
        /// Replace the bundled backend.
        #[arg(long)]
        backend: Option<String>,
    },
    /// Cross-ratio, theta and constraint tables.
    Crossratio {
        /// A nodal configuration file; random single disks otherwise.
        #[arg(long)]
        config: Option<String>,
        #[arg(long, default_value_t = 8)]
        samples: usize,
        /// Number of boundary marks minus one for sampled configurations.
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

fn run(cli: &Cli) -> Result<Report> {
    init_threads_from_env()?;
    match &cli.command {
        Command::Validate { backend, energy } => cmd_validate(backend, parse_energy_arg(energy)?),
        Command::Verify { backend, suite, bounds } => {
            cmd_verify(backend.as_deref(), suite.parse::<SuiteId>()?, &bounds.options()?)
        }
        Command::Cohomology { backend, which, bounds } => {
            cmd_cohomology(backend, which.parse::<Which>()?, &bounds.options()?)
        }
        Command::Example { name, energy, backend } => cmd_example(name, parse_energy_arg(energy)?, backend.as_deref()),
        Command::Crossratio { config, samples, k, seed } => cmd_crossratio(config.as_deref(), *samples, *k, *seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(report) => {
            match cli.format {
                Format::Text => print!("{}", report.render_text()),
                Format::Json => print!("{}", report.render_json()),
            }
            report.exit_code()
        }
        Err(e) => {
            let code = error_exit_code(&e);
            if let Format::Json = cli.format {
                println!("{}", serde_json::json!({ "error": e.to_string(), "exit_code": code }));
            }
            eprintln!("error: {e}");
            code
        }
    };
    ExitCode::from(code as u8)
}
