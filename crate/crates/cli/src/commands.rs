use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use mixphase::interferogram::{counter_moving_demo, peak_shift, synthesize_pattern, Interferogram};
use mixphase::phase::{
    interference_functional, spin_half_density, spin_half_unitary, InterferencePhase, Spin, SpinHalfPoint, SpinSystem,
};
use mixphase::qmatrix::{validate_density, validate_unitary, ComplexMatrix, DensityMatrix, UnitaryMatrix};
use mixphase::topology::{
    circle_path, figure1_curves, scan_singularities, winding_number, Family, Orientation, ScanOptions, ScanRegion,
    WindingReport,
};
use serde::Serialize;
use thiserror::Error;

use crate::format::{flag, number, rounded};

/// Largest matrix dimension accepted from files.
pub const MAX_DIM: usize = 64;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] mixphase::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn name(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.name(),
            CliError::Io { .. } => "Io",
            CliError::Usage(_) => "Usage",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_computational() => 3,
            _ => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug)]
pub struct RunConfig {
    pub format: OutputFormat,
    pub epsilon: f64,
    pub tolerance: f64,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(io_err(path)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_matrix(path: &Path) -> CliResult<ComplexMatrix> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let m = ComplexMatrix::from_json_str(&text)?;
    if m.dim() > MAX_DIM {
        return Err(mixphase::Error::InvalidArgument(format!("dimension {} exceeds {MAX_DIM}", m.dim())).into());
    }
    Ok(m)
}

/// Either a spin-1/2 (r, δ) point or a pair of matrix files.
#[derive(Clone, Debug)]
pub enum Source {
    SpinHalf { r: f64, delta: f64 },
    Files { rho: PathBuf, u: PathBuf },
}

impl Source {
    pub fn from_flags(r: Option<f64>, delta: Option<f64>, rho: Option<PathBuf>, u: Option<PathBuf>) -> CliResult<Self> {
        match (r, delta, rho, u) {
            (Some(r), Some(delta), None, None) => Ok(Source::SpinHalf { r, delta }),
            (None, None, Some(rho), Some(u)) => Ok(Source::Files { rho, u }),
            _ => Err(CliError::Usage(
                "give either --r and --delta, or --rho-file and --u-file".into(),
            )),
        }
    }

    fn load(&self, tol: f64) -> CliResult<(UnitaryMatrix, DensityMatrix)> {
        match self {
            Source::SpinHalf { r, delta } => Ok((spin_half_unitary(*delta)?, spin_half_density(*r)?)),
            Source::Files { rho, u } => {
                let rho = validate_density(read_matrix(rho)?, tol)?;
                let u = validate_unitary(read_matrix(u)?, tol)?;
                Ok((u, rho))
            }
        }
    }
}

#[derive(Serialize)]
struct PhaseRecord {
    re: f64,
    im: f64,
    visibility: f64,
    phase: Option<f64>,
    indeterminate: bool,
}

fn phase_text(f: &InterferencePhase, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => format!(
            "re,im,visibility,phase,indeterminate\n{},{},{},{},{}\n",
            number(f.z.re),
            number(f.z.im),
            number(f.visibility),
            number(f.phase.unwrap_or(f64::NAN)),
            flag(f.is_indeterminate())
        ),
        OutputFormat::Json => {
            let record = PhaseRecord {
                re: rounded(f.z.re),
                im: rounded(f.z.im),
                visibility: rounded(f.visibility),
                phase: f.phase.map(rounded),
                indeterminate: f.is_indeterminate(),
            };
            serde_json::to_string(&record).expect("record serializes") + "\n"
        }
    }
}

/// Always evaluates through the matrices so a dump reproduces the output.
pub fn phase(cfg: &RunConfig, source: &Source, dump: Option<&Path>) -> CliResult<String> {
    let (u, rho) = source.load(cfg.tolerance)?;
    if let Some(dir) = dump {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        for (name, m) in [("rho.json", rho.matrix()), ("u.json", u.matrix())] {
            let path = dir.join(name);
            fs::write(&path, m.to_json_string() + "\n").map_err(io_err(&path))?;
        }
    }
    let f = interference_functional(&u, &rho, cfg.epsilon)?;
    Ok(phase_text(&f, cfg.format))
}

pub struct Fig1Args {
    pub r_list: Vec<f64>,
    pub delta_from: f64,
    pub delta_to: f64,
    pub samples: usize,
    pub max_depth: usize,
}

pub fn fig1(cfg: &RunConfig, args: &Fig1Args) -> CliResult<String> {
    let rows = figure1_curves(
        &args.r_list,
        args.delta_from,
        args.delta_to,
        args.samples,
        cfg.epsilon,
        args.max_depth,
    )?;
    let mut out = String::from("r,delta,unwrapped_phase,visibility\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            number(row.r),
            number(row.delta),
            number(row.accumulated_phase),
            number(row.visibility)
        );
    }
    Ok(out)
}

/// Resolves `--spin-j` and a weight list into a family on the (r, δ) plane.
/// Without either flag the spin-1/2 model is used. Weights select the
/// mirrored family; j is inferred from their count when not given.
pub fn resolve_family(spin_j: Option<f64>, weights: Option<&[f64]>) -> CliResult<Family> {
    match (spin_j, weights) {
        (None, None) => Ok(Family::SpinHalf),
        (Some(j), None) => Ok(Family::LinearSpin(Spin::new(j)?)),
        (j, Some(w)) => {
            let spin = match j {
                Some(j) => Spin::new(j)?,
                None if w.len() >= 2 => Spin::from_twice(w.len() as u32 - 1)?,
                None => return Err(mixphase::Error::BadWeights("need at least two weights".into()).into()),
            };
            Ok(Family::Mirrored(SpinSystem::new(spin, w.to_vec())?))
        }
    }
}

pub struct WindArgs {
    pub center: (f64, f64),
    pub radius: f64,
    pub samples: usize,
    pub orientation: Orientation,
    pub family: Family,
    pub max_depth: usize,
}

#[derive(Serialize)]
struct WindRecord {
    total_phase: f64,
    winding: i64,
    residual: f64,
    min_visibility: f64,
}

fn wind_text(rep: &WindingReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => format!(
            "total_phase,winding,residual,min_visibility\n{},{},{},{}\n",
            number(rep.total_phase),
            rep.winding,
            number(rep.residual),
            number(rep.min_visibility)
        ),
        OutputFormat::Json => {
            let record = WindRecord {
                total_phase: rounded(rep.total_phase),
                winding: rep.winding,
                residual: rounded(rep.residual),
                min_visibility: rounded(rep.min_visibility),
            };
            serde_json::to_string(&record).expect("record serializes") + "\n"
        }
    }
}

pub fn wind(cfg: &RunConfig, args: WindArgs) -> CliResult<String> {
    let center = SpinHalfPoint::new(args.center.0, args.center.1)?;
    let path = circle_path(center, args.radius, args.samples, args.orientation)?.with_family(args.family);
    let rep = winding_number(&path, cfg.epsilon, args.max_depth)?;
    Ok(wind_text(&rep, cfg.format))
}

pub struct ScanArgs {
    pub r_range: (f64, f64),
    pub delta_range: (f64, f64),
    pub grid: (usize, usize),
    pub family: Family,
    pub zero_threshold: f64,
    pub probe_radius: Option<f64>,
    pub max_depth: usize,
}

#[derive(Serialize)]
struct ScanEntry {
    r: f64,
    delta: f64,
    winding: Option<i64>,
    probe_radius: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

pub fn scan(cfg: &RunConfig, args: &ScanArgs) -> CliResult<String> {
    let region = ScanRegion::new(args.r_range, args.delta_range)?;
    let options = ScanOptions {
        grid_r: args.grid.0,
        grid_delta: args.grid.1,
        zero_threshold: args.zero_threshold,
        probe_radius: args.probe_radius,
        epsilon: cfg.epsilon,
        max_depth: args.max_depth,
        ..ScanOptions::default()
    };
    let report = scan_singularities(&args.family, &region, &options)?;
    let mut entries: Vec<ScanEntry> = report
        .records
        .iter()
        .map(|rec| ScanEntry {
            r: rounded(rec.location.r()),
            delta: rounded(rec.location.delta()),
            winding: Some(rec.winding),
            probe_radius: rounded(rec.probe_radius),
            error: None,
        })
        .chain(report.failures.iter().map(|f| ScanEntry {
            r: rounded(f.location.r()),
            delta: rounded(f.location.delta()),
            winding: None,
            probe_radius: rounded(f.probe_radius),
            error: Some(format!("{}: {}", f.error.name(), f.error)),
        }))
        .collect();
    entries.sort_by(|a, b| a.delta.total_cmp(&b.delta).then(a.r.total_cmp(&b.r)));
    Ok(serde_json::to_string_pretty(&entries).expect("entries serialize") + "\n")
}

fn pattern_text(g: &Interferogram, channels: bool, epsilon: f64) -> String {
    let mut out = String::from(if channels {
        "chi,intensity,channel_plus,channel_minus\n"
    } else {
        "chi,intensity\n"
    });
    let (plus, minus) = if channels {
        (g.channel_intensities(0), g.channel_intensities(1))
    } else {
        (Vec::new(), Vec::new())
    };
    for (i, (chi, intensity)) in g.chi_grid.iter().zip(&g.intensity).enumerate() {
        let _ = write!(out, "{},{}", number(*chi), number(*intensity));
        if channels {
            let _ = write!(out, ",{},{}", number(plus[i]), number(minus[i]));
        }
        out.push('\n');
    }
    let shift = peak_shift(g, epsilon);
    let _ = writeln!(
        out,
        "# peak={} contrast={} indeterminate={}",
        number(shift.chi_star.unwrap_or(f64::NAN)),
        number(shift.contrast),
        flag(shift.is_indeterminate())
    );
    out
}

pub fn pattern(cfg: &RunConfig, source: &Source, chi_samples: usize) -> CliResult<String> {
    match source {
        Source::SpinHalf { r, delta } => {
            let g = counter_moving_demo(*r, &[*delta], chi_samples)?.remove(0);
            Ok(pattern_text(&g, true, cfg.epsilon))
        }
        Source::Files { .. } => {
            let (u, rho) = source.load(cfg.tolerance)?;
            let g = synthesize_pattern(&u, &rho, chi_samples)?;
            Ok(pattern_text(&g, false, cfg.epsilon))
        }
    }
}
