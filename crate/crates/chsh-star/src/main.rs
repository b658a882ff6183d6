use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use chsh_star::cli::{
    cmd_compile_check, cmd_crosscheck, cmd_optimize, cmd_search, cmd_sweep, Format, SearchSetting,
    SweepArgs, COMPILE_CHECK_COLUMNS, CROSSCHECK_COLUMNS, OPTIMIZE_COLUMNS, SEARCH_COLUMNS,
    SWEEP_COLUMNS,
};
use chsh_star::optimizer::Family;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SettingArg {
    Classical,
    Clifford,
    CliffordExtended,
    Permutation,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyArg {
    /// four unitary gates, fixed initial state and measurement
    Unitary,
    /// unitary gates plus a free pure initial state
    FreeInit,
    /// irreversible family mixing ERASE with the identity
    Erase,
}

#[derive(Parser)]
#[command(name = "chsh-star", about = "CHSH* game simulator, optimizer and shot harness")]
struct Cli {
    /// master seed for all stochastic commands
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// write output to a file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo sweep of the ideal unitary strategy over θ ∈ [0, π/2]
    Sweep {
        /// number of grid steps (emits steps + 1 rows)
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long, default_value_t = 38_000)]
        shots: u64,
        /// cycle inputs (a, b) instead of sampling them
        #[arg(long, default_value_t = false)]
        balanced: bool,
    },
    /// Exhaustive strategy search over a named family
    Search {
        #[arg(long, value_enum)]
        setting: SettingArg,
        /// qudit dimension (permutation setting only)
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// maximum number of tied optima to emit
        #[arg(long, default_value_t = 100)]
        max_optima: usize,
    },
    /// Multi-start Nelder-Mead maximization of the game value
    Optimize {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, value_enum, default_value_t = FamilyArg::Unitary)]
        family: FamilyArg,
        #[arg(long, default_value_t = 50)]
        restarts: usize,
    },
    /// Verify waveplate compilation of Rz over a θ grid spanning [−π, π]
    CompileCheck {
        #[arg(long, default_value_t = 1001)]
        points: usize,
    },
    /// Two-player CHSH reference bounds (classical, quantum, PR box)
    Crosscheck,
    /// Sweep through compiled waveplate optics with a noise model
    Simulate {
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long, default_value_t = 38_000)]
        shots: u64,
        #[arg(long, default_value_t = false)]
        balanced: bool,
        /// standard deviation of waveplate angle jitter (radians)
        #[arg(long, default_value_t = 0.0)]
        angle_jitter_sigma: f64,
        /// probability that the flip-stage insertion fails
        #[arg(long, default_value_t = 0.0)]
        flip_error_prob: f64,
    },
}

fn run(cli: &Cli) -> chsh_star::Result<(String, Format)> {
    let format = match cli.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    let rendered = match &cli.command {
        Command::Sweep {
            steps,
            shots,
            balanced,
        } => cmd_sweep(
            &SweepArgs {
                steps: *steps,
                shots: *shots,
                seed: cli.seed,
                balanced: *balanced,
                ..Default::default()
            },
            "sweep",
        )?
        .render(format, SWEEP_COLUMNS),
        Command::Search {
            setting,
            d,
            max_optima,
        } => {
            let setting = match setting {
                SettingArg::Classical => SearchSetting::Classical,
                SettingArg::Clifford => SearchSetting::Clifford,
                SettingArg::CliffordExtended => SearchSetting::CliffordExtended,
                SettingArg::Permutation => SearchSetting::Permutation,
            };
            cmd_search(setting, *d, *max_optima)?.render(format, SEARCH_COLUMNS)
        }
        Command::Optimize {
            d,
            family,
            restarts,
        } => {
            let family = match family {
                FamilyArg::Unitary => Family::UnitaryGates,
                FamilyArg::FreeInit => Family::UnitaryGatesFreeInit,
                FamilyArg::Erase => Family::EraseAugmented,
            };
            cmd_optimize(*d, family, *restarts, cli.seed)?.render(format, OPTIMIZE_COLUMNS)
        }
        Command::CompileCheck { points } => {
            cmd_compile_check(*points)?.render(format, COMPILE_CHECK_COLUMNS)
        }
        Command::Crosscheck => cmd_crosscheck()?.render(format, CROSSCHECK_COLUMNS),
        Command::Simulate {
            steps,
            shots,
            balanced,
            angle_jitter_sigma,
            flip_error_prob,
        } => cmd_sweep(
            &SweepArgs {
                steps: *steps,
                shots: *shots,
                seed: cli.seed,
                use_compiled_optics: true,
                angle_jitter_sigma: *angle_jitter_sigma,
                flip_error_prob: *flip_error_prob,
                balanced: *balanced,
            },
            "simulate",
        )?
        .render(format, SWEEP_COLUMNS),
    };
    Ok((rendered, format))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((rendered, _)) => match &cli.out {
            Some(path) => match std::fs::File::create(path).and_then(|mut f| f.write_all(rendered.as_bytes())) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: cannot write {}: {}", path.display(), e);
                    ExitCode::FAILURE
                }
            },
            None => {
                print!("{rendered}");
                ExitCode::SUCCESS
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
