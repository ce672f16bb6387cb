use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hypercurve::cli::{
    find_preset, output, preset_names, presets, run_converge, run_evolve, run_exact_circle,
    table1_config, CliError, RunConfig, EXIT_CONFIG, EXIT_OK, EXIT_SOLVER_ABORT,
};

/// Hyperbolic curvature flow of closed planar curves.
#[derive(Debug, Parser)]
#[command(name = "hypercurve", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one flow from a preset or a JSON config.
    Evolve(EvolveArgs),
    /// Convergence study on the perturbed circle with dt = h.
    Converge {
        /// Comma-separated grid sizes, e.g. 32,64,128.
        #[arg(long, value_delimiter = ',', required = true)]
        levels: Vec<usize>,
        #[arg(long, default_value = "out/converge")]
        out: PathBuf,
    },
    /// Radius table of a circle moving with the flow.
    ExactCircle {
        #[arg(long)]
        r0: f64,
        #[arg(long, allow_negative_numbers = true)]
        v0: f64,
        #[arg(long)]
        t_end: f64,
        #[arg(long)]
        samples: usize,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the presets; with a name, print its config as JSON.
    Presets { name: Option<String> },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Source {
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvolveArgs {
    #[command(flatten)]
    source: Source,
    /// Output directory (overrides the config's output_dir).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn evolve(args: EvolveArgs) -> Result<i32, CliError> {
    let (config, name) = match (args.source.preset, args.source.config) {
        (Some(name), _) => {
            let preset = find_preset(&name).ok_or_else(|| {
                CliError::Config(format!("unknown preset {name:?}; known: {}", preset_names().join(", ")))
            })?;
            (preset.config, Some(name))
        }
        (None, Some(path)) => (RunConfig::from_file(&path)?, None),
        (None, None) => unreachable!("clap enforces one source"),
    };
    let out = args
        .out
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(name.as_deref().unwrap_or("run")));
    let summary = run_evolve(&config, name.as_deref(), &out)?;
    let last = summary.records.last();
    println!(
        "{}: t = {:.6}, length = {}, K = {} -> {}",
        summary.termination.reason_name(),
        summary.final_time,
        last.map_or("-".into(), |r| output::fmt_table(r.length)),
        last.map_or("-".into(), |r| output::fmt_table(r.kinf)),
        out.display()
    );
    Ok(if summary.aborted() { EXIT_SOLVER_ABORT } else { EXIT_OK })
}

fn converge(levels: Vec<usize>, out: PathBuf) -> Result<i32, CliError> {
    let first = levels.iter().copied().min().unwrap_or(32);
    let summary = run_converge(&levels, &table1_config(first), &out)?;
    print!("{}", summary.table);
    for (j, e) in &summary.failures {
        eprintln!("level J = {j} failed: {e}");
    }
    Ok(if summary.failures.is_empty() { EXIT_OK } else { EXIT_SOLVER_ABORT })
}

fn exact_circle(r0: f64, v0: f64, t_end: f64, samples: usize, out: Option<PathBuf>) -> Result<i32, CliError> {
    let table = run_exact_circle(r0, v0, t_end, samples)?;
    match out {
        Some(path) => {
            let file = std::fs::File::create(&path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            output::write_radius_csv(file, &table.rows)
        }
        None => output::write_radius_csv(std::io::stdout().lock(), &table.rows),
    }
    .map_err(|e| CliError::Config(format!("cannot write table: {e}")))?;
    if let Some(t) = table.extinct_at {
        eprintln!("circle collapsed at t = {t:.10}; table truncated");
    }
    Ok(EXIT_OK)
}

fn list_presets(name: Option<String>) -> Result<i32, CliError> {
    match name {
        Some(name) => {
            let p = find_preset(&name).ok_or_else(|| CliError::Config(format!("unknown preset {name:?}")))?;
            println!("{}", p.config.to_json());
        }
        None => {
            let mut out = std::io::stdout().lock();
            for p in presets() {
                let _ = writeln!(out, "{:<18} {}", p.name, p.description);
            }
        }
    }
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let result = match cli.command {
        Command::Evolve(args) => evolve(args),
        Command::Converge { levels, out } => converge(levels, out),
        Command::ExactCircle { r0, v0, t_end, samples, out } => exact_circle(r0, v0, t_end, samples, out),
        Command::Presets { name } => list_presets(name),
    };
    let code = result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
