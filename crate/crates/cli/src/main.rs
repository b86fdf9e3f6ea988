//! `mixphase`: interference phase, phase curves, windings, singularity scans
//! and interferograms from the command line.

mod commands;
mod format;

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use commands::{CliError, CliResult, Fig1Args, OutputFormat, RunConfig, ScanArgs, Source, WindArgs};
use mixphase::topology::{Orientation, DEFAULT_MAX_DEPTH};

#[derive(Parser, Debug)]
#[command(name = "mixphase", version, about = "Mixed-state interference phase toolkit")]
struct Cli {
    /// Record format for `phase` and `wind`
    #[arg(long, value_enum, default_value = "csv", global = true)]
    format: OutputFormat,
    /// Visibility at or below which the phase is indeterminate
    #[arg(long, default_value_t = mixphase::phase::DEFAULT_EPSILON, global = true)]
    epsilon: f64,
    /// Validation tolerance for matrices read from files
    #[arg(long, default_value_t = mixphase::qmatrix::DEFAULT_TOLERANCE, global = true)]
    tolerance: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct SourceFlags {
    /// Polarization r of the spin-1/2 state
    #[arg(long)]
    r: Option<f64>,
    /// Zeeman angle δ
    #[arg(long)]
    delta: Option<f64>,
    /// Density matrix file ({"dim", "re", "im"})
    #[arg(long)]
    rho_file: Option<PathBuf>,
    /// Unitary matrix file ({"dim", "re", "im"})
    #[arg(long)]
    u_file: Option<PathBuf>,
}

impl SourceFlags {
    fn source(self) -> CliResult<Source> {
        Source::from_flags(self.r, self.delta, self.rho_file, self.u_file)
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OrientationArg {
    Ccw,
    Cw,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// z = Tr(Uρ), its visibility and phase
    #[command(allow_negative_numbers = true)]
    Phase {
        #[command(flatten)]
        source: SourceFlags,
        /// Write the matrices used to rho.json and u.json in this directory
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Unwrapped phase against δ for a list of polarizations (CSV)
    #[command(allow_negative_numbers = true)]
    Fig1 {
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            default_value = "1,-1,0.001,-0.001"
        )]
        r_list: Vec<f64>,
        #[arg(long, default_value_t = 0.0)]
        delta_from: f64,
        #[arg(long, default_value_t = PI)]
        delta_to: f64,
        #[arg(long, default_value_t = 2001)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
        max_depth: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Winding number of a circle in the (r, δ) plane
    #[command(allow_negative_numbers = true)]
    Wind {
        #[arg(long)]
        center_r: f64,
        #[arg(long)]
        center_delta: f64,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 256)]
        samples: usize,
        #[arg(long, value_enum, default_value = "ccw")]
        orientation: OrientationArg,
        /// Spin j of the linear population family
        #[arg(long)]
        spin_j: Option<f64>,
        /// Populations p_m (m = j..-j) mixed with their mirror image by r
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
        #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
        max_depth: usize,
    },
    /// Locate visibility zeros and classify them by winding (JSON)
    Scan {
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true, default_value = "-1,1")]
        r_range: (f64, f64),
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true, default_value = "0,6.283185307179586")]
        delta_range: (f64, f64),
        /// Grid size as NRxND
        #[arg(long, value_parser = parse_grid, default_value = "201x401")]
        grid: (usize, usize),
        #[arg(long)]
        spin_j: Option<f64>,
        /// `linear`, or comma-separated populations for the mirrored family
        #[arg(long, default_value = "linear")]
        pol_r_family: String,
        #[arg(long, default_value_t = 0.1)]
        zero_threshold: f64,
        #[arg(long)]
        probe_radius: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
        max_depth: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Interferogram I(χ) with its peak and contrast (CSV)
    #[command(allow_negative_numbers = true)]
    Pattern {
        #[command(flatten)]
        source: SourceFlags,
        #[arg(long, default_value_t = 1024)]
        chi_samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `lo,hi`, got `{s}`"))?;
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    Ok((parse(a)?, parse(b)?))
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once('x')
        .ok_or_else(|| format!("expected `NRxND`, got `{s}`"))?;
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}"));
    Ok((parse(a)?, parse(b)?))
}

fn parse_weights(s: &str) -> CliResult<Option<Vec<f64>>> {
    if s == "linear" {
        return Ok(None);
    }
    s.split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
        .map_err(|e| CliError::Usage(format!("--pol-r-family `{s}`: {e}")))
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = RunConfig {
        format: cli.format,
        epsilon: cli.epsilon,
        tolerance: cli.tolerance,
    };
    match cli.command {
        Command::Phase { source, dump } => {
            let text = commands::phase(&cfg, &source.source()?, dump.as_deref())?;
            commands::emit(None, &text)
        }
        Command::Fig1 {
            r_list,
            delta_from,
            delta_to,
            samples,
            max_depth,
            out,
        } => {
            let args = Fig1Args {
                r_list,
                delta_from,
                delta_to,
                samples,
                max_depth,
            };
            commands::emit(out.as_deref(), &commands::fig1(&cfg, &args)?)
        }
        Command::Wind {
            center_r,
            center_delta,
            radius,
            samples,
            orientation,
            spin_j,
            weights,
            max_depth,
        } => {
            let args = WindArgs {
                center: (center_r, center_delta),
                radius,
                samples,
                orientation: match orientation {
                    OrientationArg::Ccw => Orientation::Ccw,
                    OrientationArg::Cw => Orientation::Cw,
                },
                family: commands::resolve_family(spin_j, weights.as_deref())?,
                max_depth,
            };
            commands::emit(None, &commands::wind(&cfg, args)?)
        }
        Command::Scan {
            r_range,
            delta_range,
            grid,
            spin_j,
            pol_r_family,
            zero_threshold,
            probe_radius,
            max_depth,
            out,
        } => {
            let weights = parse_weights(&pol_r_family)?;
            let args = ScanArgs {
                r_range,
                delta_range,
                grid,
                family: commands::resolve_family(spin_j, weights.as_deref())?,
                zero_threshold,
                probe_radius,
                max_depth,
            };
            commands::emit(out.as_deref(), &commands::scan(&cfg, &args)?)
        }
        Command::Pattern {
            source,
            chi_samples,
            out,
        } => {
            let text = commands::pattern(&cfg, &source.source()?, chi_samples)?;
            commands::emit(out.as_deref(), &text)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {e}", e.name());
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;
    use std::f64::consts::TAU;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn pairs_and_grids() {
        assert_eq!(parse_pair("-1,1"), Ok((-1.0, 1.0)));
        assert!(parse_pair("1").is_err());
        assert_eq!(parse_grid("201x401"), Ok((201, 401)));
        assert!(parse_grid("201,401").is_err());
    }

    #[test]
    fn negative_values_parse() {
        let cli = Cli::try_parse_from(["mixphase", "fig1", "--r-list", "-1,0.5", "--delta-from", "-3"]).unwrap();
        match cli.command {
            Command::Fig1 { r_list, delta_from, .. } => {
                assert_eq!(r_list, vec![-1.0, 0.5]);
                assert_eq!(delta_from, -3.0);
            }
            other => panic!("{other:?}"),
        }
        let cli = Cli::try_parse_from(["mixphase", "scan", "--r-range", "-0.5,0.5"]).unwrap();
        match cli.command {
            Command::Scan {
                r_range, delta_range, ..
            } => {
                assert_eq!(r_range, (-0.5, 0.5));
                assert_eq!(delta_range, (0.0, TAU));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_flags_rejected() {
        assert!(Cli::try_parse_from(["mixphase", "phase", "--bogus", "1"]).is_err());
    }
}
