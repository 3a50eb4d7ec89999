//! Command-line front end for the wave-map solver.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use wavemaps_cli::commands::{cmd_convergence, cmd_diagnostics, cmd_run, cmd_synth, CliFailure};
use wavemaps_cli::config::{parse_with_overrides, preset_text, LoadedConfig, ENV_PREFIX, PRESETS};

/// Pseudospectral wave-map solver: filtered splitting runs, convergence
/// studies against reference solutions, and frequency-space diagnostics.
///
/// Configuration comes from a TOML file (--config) or a built-in preset
/// (--preset), with `WAVEMAPS_*` environment variables layered on top and
/// `--set key=value` flags applied last. Unknown keys are errors.
///
/// Exit codes: 0 on success, 1 when a check or evolution fails, 2 for
/// configuration problems.
#[derive(Parser)]
#[command(name = "wavemaps", version, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// Path to a TOML configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Name of a built-in preset; `--list-presets` shows the choices.
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,

    /// Output directory for reports, snapshots and manifests.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Override one configuration key, e.g. `--set scheme.filter_constant=2`.
    /// May be repeated; applied after the file and the environment.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Worker threads for ladder studies; defaults to the CPU count.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Shortcut for `--set data.seed=N`, applied before other --set flags.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// List the built-in presets and exit.
    #[arg(long, global = true)]
    list_presets: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the configured initial data once and write snapshots.
    Run,
    /// Run the step-size ladder against the reference and fit the rate.
    Convergence,
    /// Run the self-check battery (identities, vanishing, Strichartz).
    Diagnostics,
    /// Build the configured initial data and write it out.
    Synth,
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = Cli::parse();
    if cli.list_presets {
        for (name, _) in PRESETS {
            println!("{name}");
        }
        return 0;
    }
    let Some(command) = &cli.command else {
        eprintln!("error: a subcommand is required; try --help");
        return 2;
    };
    match dispatch(&cli, command) {
        Ok(()) => 0,
        Err(failure) => {
            eprintln!("error: {failure}");
            failure.code()
        }
    }
}

fn dispatch(cli: &Cli, command: &Command) -> Result<(), CliFailure> {
    let loaded = load_config(cli)?;
    let threads = cli
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    match command {
        Command::Run => cmd_run(&loaded, &cli.out),
        Command::Convergence => cmd_convergence(&loaded, &cli.out, threads),
        Command::Diagnostics => cmd_diagnostics(&loaded, &cli.out),
        Command::Synth => cmd_synth(&loaded, &cli.out),
    }
}

fn load_config(cli: &Cli) -> Result<LoadedConfig, CliFailure> {
    let text = match (&cli.config, &cli.preset) {
        (Some(_), Some(_)) => {
            return Err(CliFailure::Config(
                "--config and --preset are mutually exclusive".into(),
            ));
        }
        (Some(path), None) => std::fs::read_to_string(path).map_err(|e| {
            CliFailure::Config(format!("cannot read {}: {e}", path.display()))
        })?,
        (None, Some(name)) => preset_text(name)?.to_string(),
        (None, None) => {
            return Err(CliFailure::Config(
                "a configuration is required: pass --config <path> or --preset <name>".into(),
            ));
        }
    };

    let mut env: Vec<(String, String)> = std::env::vars()
        .filter(|(name, _)| name.starts_with(ENV_PREFIX))
        .collect();
    env.sort();

    let mut sets = Vec::new();
    if let Some(seed) = cli.seed {
        sets.push(format!("data.seed={seed}"));
    }
    sets.extend(cli.set.iter().cloned());

    Ok(parse_with_overrides(&text, &env, &sets)?)
}
