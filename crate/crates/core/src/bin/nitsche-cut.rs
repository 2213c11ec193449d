use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use nitsche_cut::experiment::{
    dof_drop_markers, geometric_eps, run_sweep, write_csv, Example, ExperimentConfig,
};
use nitsche_cut::quadrature::DEFAULT_DEPTH;
use nitsche_cut::stabilization::{FormVariant, DEFAULT_CAP};

#[derive(Parser)]
#[command(name = "nitsche-cut", version, about = "ε-sweeps for unfitted Nitsche discretizations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an ε-sweep and write one CSV row per ε.
    Run(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Nitsche,
    Hybrid,
}

#[derive(clap::Args)]
struct RunArgs {
    /// ex1-tri, ex1-quad, ex2, ex3 or ex4.
    #[arg(long)]
    example: Example,
    /// Cells per unit length (h = 1/K).
    #[arg(long = "K", default_value_t = 16)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    order: usize,
    #[arg(long, default_value_t = 0.0625)]
    eps_from: f64,
    #[arg(long, default_value_t = 5.960464477539063e-8)]
    eps_to: f64,
    #[arg(long, default_value_t = 0.5)]
    eps_factor: f64,
    #[arg(long, value_enum, default_value_t = VariantArg::Nitsche)]
    variant: VariantArg,
    /// Penalty cap of the hybrid variant.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: f64,
    #[arg(long, default_value_t = DEFAULT_DEPTH)]
    depth: usize,
    /// Append c_est, C_est and the Céa ratio.
    #[arg(long)]
    diagnostics: bool,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(args: RunArgs) -> nitsche_cut::Result<()> {
    let config = ExperimentConfig {
        example: args.example,
        k: args.k,
        order: args.order,
        eps_list: geometric_eps(args.eps_from, args.eps_to, args.eps_factor)?,
        variant: match args.variant {
            VariantArg::Nitsche => FormVariant::SymmetricNitsche,
            VariantArg::Hybrid => FormVariant::HybridNitschePenalty { cap: args.cap },
        },
        depth: args.depth,
        diagnostics: args.diagnostics,
    };
    config.validate()?;
    let records = run_sweep(&config)?;
    match &args.out {
        Some(path) => write_csv(&config, &records, BufWriter::new(File::create(path)?))?,
        None => write_csv(&config, &records, io::stdout().lock())?,
    }
    let failed = records.iter().filter(|r| !r.is_ok()).count();
    let markers = dof_drop_markers(&records);
    let mut err = io::stderr().lock();
    writeln!(err, "{} rows, {} not ok", records.len(), failed)?;
    if !markers.is_empty() {
        let list: Vec<String> = markers.iter().map(|m| format!("{m:e}")).collect();
        writeln!(err, "dof drops at ε = {}", list.join(", "))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
