//! Continuous phase along parameter paths, winding numbers of closed
//! circuits, and singularity scans of the (r, δ) plane.
//!
//! Paths are polylines. [`track_phase`] evaluates the interference functional
//! at every node and bisects any segment whose wrapped phase increment is
//! π/2 or larger, so the accumulated phase never has to guess the sign of a
//! near-π jump. The (r, δ) plane is oriented with r horizontal and δ
//! vertical; a counterclockwise circuit has increasing polar angle.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::phase::{
    interference_functional, linear_weight_family, principal_arg, spin_half_functional, InterferencePhase, Spin,
    SpinHalfPoint, SpinSystem,
};
use crate::qmatrix::{DensityMatrix, UnitaryMatrix};

pub const DEFAULT_MAX_DEPTH: usize = 40;
/// Largest accepted |winding residual| before a circuit is called undersampled.
pub const WINDING_RESIDUAL_LIMIT: f64 = 0.01;
/// Largest accepted wrapped increment between consecutive samples.
pub const INCREMENT_CAP: f64 = FRAC_PI_2;
// Keeps accumulated differences below the cap after rounding.
const INCREMENT_MARGIN: f64 = 1e-9;
const CLOSURE_TOLERANCE: f64 = 1e-12;

/// A one-parameter-pair family mapping (r, δ) to the interference value.
#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// ρ = diag[(1+r)/2, (1−r)/2], U = diag(e^{iδ}, e^{−iδ}).
    SpinHalf,
    /// Linear populations p_m = (1 + r·m/j)/(2j+1) under diag(e^{imδ}).
    LinearSpin(Spin),
    /// Populations mixed with their mirror image,
    /// p_m(r) = (1+r)/2·w_m + (1−r)/2·w_{−m}, under diag(e^{imδ}).
    Mirrored(SpinSystem),
}

impl Family {
    pub fn value(&self, p: SpinHalfPoint) -> Complex64 {
        match self {
            Family::SpinHalf => spin_half_functional(p, 0.0).z,
            Family::LinearSpin(spin) => linear_weight_family(*spin, p.r())
                .expect("point r is within [-1, 1]")
                .value(p.delta()),
            Family::Mirrored(base) => base
                .polarization_mixture(p.r())
                .expect("point r is within [-1, 1]")
                .value(p.delta()),
        }
    }

    pub fn functional(&self, p: SpinHalfPoint, epsilon: f64) -> InterferencePhase {
        InterferencePhase::from_value(self.value(p), epsilon)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    Ccw,
    Cw,
}

#[derive(Clone, Debug, PartialEq)]
enum Nodes {
    Plane { family: Family, points: Vec<SpinHalfPoint> },
    Explicit(Vec<(UnitaryMatrix, DensityMatrix)>),
}

/// Ordered samples of a path; closed paths repeat their first node at the
/// end.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterPath {
    nodes: Nodes,
    closed: bool,
}

fn check_node_count(len: usize, closed: bool) -> Result<()> {
    let needed = if closed { 3 } else { 2 };
    if len < needed {
        return Err(Error::InvalidPath(format!(
            "{} path needs at least {needed} points, got {len}",
            if closed { "closed" } else { "open" }
        )));
    }
    Ok(())
}

impl ParameterPath {
    pub fn open(family: Family, points: Vec<SpinHalfPoint>) -> Result<Self> {
        check_node_count(points.len(), false)?;
        Ok(Self {
            nodes: Nodes::Plane { family, points },
            closed: false,
        })
    }

    /// The last point must repeat the first to 1e-12 in each coordinate.
    pub fn closed(family: Family, points: Vec<SpinHalfPoint>) -> Result<Self> {
        check_node_count(points.len(), true)?;
        let (first, last) = (points[0], points[points.len() - 1]);
        if (first.r() - last.r()).abs() > CLOSURE_TOLERANCE || (first.delta() - last.delta()).abs() > CLOSURE_TOLERANCE
        {
            return Err(Error::InvalidPath("closed path must end at its first point".into()));
        }
        Ok(Self {
            nodes: Nodes::Plane { family, points },
            closed: true,
        })
    }

    /// A path of explicit (U, ρ) pairs. Segments cannot be bisected, so every
    /// consecutive increment must already be below π/2.
    pub fn explicit(pairs: Vec<(UnitaryMatrix, DensityMatrix)>, closed: bool) -> Result<Self> {
        check_node_count(pairs.len(), closed)?;
        if closed {
            let (u0, rho0) = &pairs[0];
            let (un, rhon) = &pairs[pairs.len() - 1];
            let gap = u0
                .matrix()
                .max_abs_diff(un.matrix())?
                .max(rho0.matrix().max_abs_diff(rhon.matrix())?);
            if gap > CLOSURE_TOLERANCE {
                return Err(Error::InvalidPath("closed path must end at its first point".into()));
            }
        }
        Ok(Self {
            nodes: Nodes::Explicit(pairs),
            closed,
        })
    }

    pub fn len(&self) -> usize {
        match &self.nodes {
            Nodes::Plane { points, .. } => points.len(),
            Nodes::Explicit(pairs) => pairs.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// `None` for explicit paths.
    pub fn family(&self) -> Option<&Family> {
        match &self.nodes {
            Nodes::Plane { family, .. } => Some(family),
            Nodes::Explicit(_) => None,
        }
    }

    pub fn points(&self) -> Option<&[SpinHalfPoint]> {
        match &self.nodes {
            Nodes::Plane { points, .. } => Some(points),
            Nodes::Explicit(_) => None,
        }
    }

    /// Same points evaluated under another family. Explicit paths are
    /// returned unchanged.
    pub fn with_family(self, family: Family) -> Self {
        match self.nodes {
            Nodes::Plane { points, .. } => Self {
                nodes: Nodes::Plane { family, points },
                closed: self.closed,
            },
            nodes @ Nodes::Explicit(_) => Self {
                nodes,
                closed: self.closed,
            },
        }
    }

    pub fn reversed(&self) -> Self {
        let nodes = match &self.nodes {
            Nodes::Plane { family, points } => Nodes::Plane {
                family: family.clone(),
                points: points.iter().rev().copied().collect(),
            },
            Nodes::Explicit(pairs) => Nodes::Explicit(pairs.iter().rev().cloned().collect()),
        };
        Self {
            nodes,
            closed: self.closed,
        }
    }

    fn node_value(&self, k: usize) -> Result<Complex64> {
        match &self.nodes {
            Nodes::Plane { family, points } => Ok(family.value(points[k])),
            Nodes::Explicit(pairs) => Ok(interference_functional(&pairs[k].0, &pairs[k].1, 0.0)?.z),
        }
    }

    /// Value at fractional parameter `t` inside segment `k` (t ∈ [k, k+1]).
    fn interior(&self, k: usize, t: f64) -> Option<(SpinHalfPoint, Complex64)> {
        match &self.nodes {
            Nodes::Plane { family, points } => {
                let (a, b) = (points[k], points[k + 1]);
                let s = t - k as f64;
                let r = (a.r() + s * (b.r() - a.r())).clamp(-1.0, 1.0);
                let delta = a.delta() + s * (b.delta() - a.delta());
                let p = SpinHalfPoint::new(r, delta).expect("interpolated point stays in range");
                Some((p, family.value(p)))
            }
            Nodes::Explicit(_) => None,
        }
    }
}

/// Uniform open path at fixed r from `delta_from` to `delta_to`.
pub fn sweep_path(r: f64, delta_from: f64, delta_to: f64, samples: usize) -> Result<ParameterPath> {
    if samples < 2 {
        return Err(Error::InvalidArgument(format!(
            "sweep needs at least 2 samples, got {samples}"
        )));
    }
    let last = (samples - 1) as f64;
    let points = (0..samples)
        .map(|k| {
            let delta = if k + 1 == samples {
                delta_to
            } else {
                delta_from + (delta_to - delta_from) * k as f64 / last
            };
            SpinHalfPoint::new(r, delta)
        })
        .collect::<Result<Vec<_>>>()?;
    ParameterPath::open(Family::SpinHalf, points)
}

/// Closed circle of `samples` segments; the first point is repeated at the
/// end. The CW path is the CCW path in reverse order.
pub fn circle_path(
    center: SpinHalfPoint,
    radius: f64,
    samples: usize,
    orientation: Orientation,
) -> Result<ParameterPath> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidArgument(format!("radius {radius} must be positive")));
    }
    if samples < 16 {
        return Err(Error::InvalidArgument(format!(
            "circle needs at least 16 samples, got {samples}"
        )));
    }
    if center.r().abs() + radius > 1.0 {
        return Err(Error::RadiusOutOfDomain {
            center_r: center.r(),
            radius,
        });
    }
    let mut points = (0..samples)
        .map(|k| {
            let angle = 2.0 * PI * k as f64 / samples as f64;
            let (s, c) = angle.sin_cos();
            SpinHalfPoint::new((center.r() + radius * c).clamp(-1.0, 1.0), center.delta() + radius * s)
        })
        .collect::<Result<Vec<_>>>()?;
    points.push(points[0]);
    let path = ParameterPath::closed(Family::SpinHalf, points)?;
    Ok(match orientation {
        Orientation::Ccw => path,
        Orientation::Cw => path.reversed(),
    })
}

/// Closed polygon through `vertices` (not repeated), each edge split into
/// `samples_per_edge` segments.
pub fn polygon_path(vertices: &[SpinHalfPoint], samples_per_edge: usize) -> Result<ParameterPath> {
    if vertices.len() < 3 || samples_per_edge == 0 {
        return Err(Error::InvalidArgument(
            "polygon needs 3 vertices and samples_per_edge >= 1".into(),
        ));
    }
    let mut points = Vec::with_capacity(vertices.len() * samples_per_edge + 1);
    for (k, &a) in vertices.iter().enumerate() {
        let b = vertices[(k + 1) % vertices.len()];
        for i in 0..samples_per_edge {
            let s = i as f64 / samples_per_edge as f64;
            points.push(SpinHalfPoint::new(
                a.r() + s * (b.r() - a.r()),
                a.delta() + s * (b.delta() - a.delta()),
            )?);
        }
    }
    points.push(vertices[0]);
    ParameterPath::closed(Family::SpinHalf, points)
}

/// Axis-aligned rectangle [r0, r1] × [δ0, δ1].
pub fn rectangle_path(
    r_range: (f64, f64),
    delta_range: (f64, f64),
    samples_per_edge: usize,
    orientation: Orientation,
) -> Result<ParameterPath> {
    let (r0, r1) = r_range;
    let (d0, d1) = delta_range;
    let corners = [
        SpinHalfPoint::new(r0, d0)?,
        SpinHalfPoint::new(r1, d0)?,
        SpinHalfPoint::new(r1, d1)?,
        SpinHalfPoint::new(r0, d1)?,
    ];
    let path = polygon_path(&corners, samples_per_edge)?;
    Ok(match orientation {
        Orientation::Ccw => path,
        Orientation::Cw => path.reversed(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseSample {
    /// Node k sits at parameter k; refinement points are fractional.
    pub parameter: f64,
    /// `None` on explicit paths.
    pub point: Option<SpinHalfPoint>,
    pub accumulated_phase: f64,
    pub visibility: f64,
    pub is_node: bool,
}

/// The unwrapped phase ∫dφ along a path, including refinement samples.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseTrace {
    pub samples: Vec<PhaseSample>,
    pub total_phase: f64,
    pub min_visibility: f64,
    pub refinement_depth_used: usize,
}

impl PhaseTrace {
    /// The samples at the path's own nodes, in order.
    pub fn nodes(&self) -> impl Iterator<Item = &PhaseSample> {
        self.samples.iter().filter(|s| s.is_node)
    }
}

struct Raw {
    parameter: f64,
    point: Option<SpinHalfPoint>,
    z: Complex64,
    is_node: bool,
}

struct Tracker<'a> {
    path: &'a ParameterPath,
    epsilon: f64,
    max_depth: usize,
    depth_used: usize,
    out: Vec<Raw>,
}

impl Tracker<'_> {
    fn check(&self, parameter: f64, z: Complex64) -> Result<()> {
        let visibility = z.norm();
        if visibility <= self.epsilon {
            return Err(Error::SingularityOnPath {
                parameter,
                visibility,
                epsilon: self.epsilon,
            });
        }
        Ok(())
    }

    /// Pushes the refined interior of (t0, t1] ending with the node at t1.
    fn segment(&mut self, k: usize, t0: f64, z0: Complex64, end: Raw, depth: usize) -> Result<()> {
        let increment = principal_arg(end.z * z0.conj());
        if increment.abs() < INCREMENT_CAP - INCREMENT_MARGIN {
            self.depth_used = self.depth_used.max(depth);
            self.out.push(end);
            return Ok(());
        }
        let exhausted = Error::RefinementExhausted {
            from: t0,
            to: end.parameter,
            increment,
            depth,
        };
        if depth >= self.max_depth {
            return Err(exhausted);
        }
        let t_mid = 0.5 * (t0 + end.parameter);
        let Some((point, z_mid)) = self.path.interior(k, t_mid) else {
            return Err(exhausted);
        };
        self.check(t_mid, z_mid)?;
        let mid = Raw {
            parameter: t_mid,
            point: Some(point),
            z: z_mid,
            is_node: false,
        };
        self.segment(k, t0, z0, mid, depth + 1)?;
        self.segment(k, t_mid, z_mid, end, depth + 1)
    }
}

/// Accumulates wrapped phase increments along `path`, bisecting segments
/// (up to `max_depth` levels) until every increment is below π/2.
pub fn track_phase(path: &ParameterPath, epsilon: f64, max_depth: usize) -> Result<PhaseTrace> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!("epsilon {epsilon} must be positive")));
    }
    if max_depth < 1 {
        return Err(Error::InvalidArgument("max_depth must be at least 1".into()));
    }
    let node = |k: usize| -> Result<Raw> {
        Ok(Raw {
            parameter: k as f64,
            point: path.points().map(|p| p[k]),
            z: path.node_value(k)?,
            is_node: true,
        })
    };
    let mut tracker = Tracker {
        path,
        epsilon,
        max_depth,
        depth_used: 0,
        out: Vec::with_capacity(path.len()),
    };
    let first = node(0)?;
    tracker.check(0.0, first.z)?;
    tracker.out.push(first);
    for k in 0..path.len() - 1 {
        let end = node(k + 1)?;
        tracker.check(end.parameter, end.z)?;
        let z0 = tracker.out.last().expect("trace starts with a node").z;
        tracker.segment(k, k as f64, z0, end, 0)?;
    }

    let mut accumulated = 0.0;
    let mut min_visibility = f64::INFINITY;
    let mut previous: Option<Complex64> = None;
    let samples = tracker
        .out
        .iter()
        .map(|raw| {
            if let Some(z0) = previous {
                accumulated += principal_arg(raw.z * z0.conj());
            }
            previous = Some(raw.z);
            let visibility = raw.z.norm();
            min_visibility = min_visibility.min(visibility);
            PhaseSample {
                parameter: raw.parameter,
                point: raw.point,
                accumulated_phase: accumulated,
                visibility,
                is_node: raw.is_node,
            }
        })
        .collect();
    Ok(PhaseTrace {
        samples,
        total_phase: accumulated,
        min_visibility,
        refinement_depth_used: tracker.depth_used,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindingReport {
    pub total_phase: f64,
    pub winding: i64,
    /// |total_phase/2π − winding|.
    pub residual: f64,
    pub min_visibility: f64,
}

/// Total phase around a closed path in units of 2π.
pub fn winding_number(path: &ParameterPath, epsilon: f64, max_depth: usize) -> Result<WindingReport> {
    if !path.is_closed() {
        return Err(Error::NotClosed);
    }
    let trace = track_phase(path, epsilon, max_depth)?;
    let turns = trace.total_phase / (2.0 * PI);
    let winding = turns.round();
    let residual = (turns - winding).abs();
    if residual > WINDING_RESIDUAL_LIMIT {
        return Err(Error::ResidualTooLarge {
            total_phase: trace.total_phase,
            residual,
            limit: WINDING_RESIDUAL_LIMIT,
        });
    }
    Ok(WindingReport {
        total_phase: trace.total_phase,
        winding: winding as i64,
        residual,
        min_visibility: trace.min_visibility,
    })
}

/// One row of a phase-shift curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveRow {
    pub r: f64,
    pub delta: f64,
    pub accumulated_phase: f64,
    pub visibility: f64,
}

/// Unwrapped phase against δ at each fixed r, one sweep per r, rows grouped
/// by r in input order. Only the sweep nodes are reported.
pub fn figure1_curves(
    r_values: &[f64],
    delta_from: f64,
    delta_to: f64,
    samples: usize,
    epsilon: f64,
    max_depth: usize,
) -> Result<Vec<CurveRow>> {
    let curves: Vec<Result<Vec<CurveRow>>> = r_values
        .par_iter()
        .map(|&r| {
            let labelled = |e: Error| Error::Curve { r, source: Box::new(e) };
            let path = sweep_path(r, delta_from, delta_to, samples).map_err(labelled)?;
            let trace = track_phase(&path, epsilon, max_depth).map_err(labelled)?;
            Ok(trace
                .nodes()
                .map(|s| CurveRow {
                    r,
                    delta: s.point.expect("sweep nodes are plane points").delta(),
                    accumulated_phase: s.accumulated_phase,
                    visibility: s.visibility,
                })
                .collect())
        })
        .collect();
    let mut rows = Vec::new();
    for curve in curves {
        rows.extend(curve?);
    }
    Ok(rows)
}

/// Rectangle of the (r, δ) plane; r must lie in [−1, 1].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanRegion {
    pub r: (f64, f64),
    pub delta: (f64, f64),
}

impl ScanRegion {
    pub fn new(r: (f64, f64), delta: (f64, f64)) -> Result<Self> {
        let ordered = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo < hi;
        if !ordered(r) || !ordered(delta) {
            return Err(Error::InvalidArgument(
                "region bounds must be finite with lo < hi".into(),
            ));
        }
        if r.0 < -1.0 || r.1 > 1.0 {
            return Err(Error::ROutOfRange(if r.0 < -1.0 { r.0 } else { r.1 }));
        }
        Ok(Self { r, delta })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanOptions {
    pub grid_r: usize,
    pub grid_delta: usize,
    /// Grid minima must have visibility below this to become candidates.
    pub zero_threshold: f64,
    /// Defaults to the smaller grid spacing; must be below twice that.
    pub probe_radius: Option<f64>,
    pub probe_samples: usize,
    pub epsilon: f64,
    pub max_depth: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            grid_r: 201,
            grid_delta: 401,
            zero_threshold: 0.1,
            probe_radius: None,
            probe_samples: 64,
            epsilon: crate::phase::DEFAULT_EPSILON,
            max_depth: DEFAULT_MAX_DEPTH,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingularityRecord {
    pub location: SpinHalfPoint,
    pub winding: i64,
    pub probe_radius: f64,
    pub min_visibility_on_probe: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeFailure {
    pub location: SpinHalfPoint,
    pub probe_radius: f64,
    pub error: Error,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScanReport {
    pub records: Vec<SingularityRecord>,
    pub failures: Vec<ProbeFailure>,
}

const GOLDEN_TOLERANCE: f64 = 1e-12;
const DESCENT_TOLERANCE: f64 = 1e-10;
const DESCENT_ROUNDS: usize = 200;
const DUPLICATE_TOLERANCE: f64 = 1e-5;

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > GOLDEN_TOLERANCE {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

fn grid_axis((lo, hi): (f64, f64), n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

/// Finds visibility zeros carrying a nonzero winding number.
///
/// Grid-local minima below `zero_threshold` are refined by alternating
/// golden-section searches on the visibility (within one grid cell of the
/// start), then classified by the winding of a CCW probe circle. Minima with
/// winding 0 are discarded; probes that fail are reported in `failures`.
/// Both lists are sorted by δ, then r.
pub fn scan_singularities(family: &Family, region: &ScanRegion, options: &ScanOptions) -> Result<ScanReport> {
    let (nr, nd) = (options.grid_r, options.grid_delta);
    if nr < 8 || nd < 8 {
        return Err(Error::InvalidArgument(format!("grid {nr}x{nd} is smaller than 8x8")));
    }
    if options.zero_threshold.is_nan() || options.zero_threshold <= 0.0 {
        return Err(Error::InvalidArgument("zero_threshold must be positive".into()));
    }
    let rs = grid_axis(region.r, nr);
    let ds = grid_axis(region.delta, nd);
    let h_r = (region.r.1 - region.r.0) / (nr - 1) as f64;
    let h_d = (region.delta.1 - region.delta.0) / (nd - 1) as f64;
    let spacing = h_r.min(h_d);
    let probe_radius = options.probe_radius.unwrap_or(spacing);
    if !(probe_radius > 0.0 && probe_radius < 2.0 * spacing) {
        return Err(Error::InvalidArgument(format!(
            "probe radius {probe_radius} must be positive and below twice the grid spacing {spacing}"
        )));
    }

    let visibility = |r: f64, delta: f64| {
        let p = SpinHalfPoint::new(r.clamp(-1.0, 1.0), delta).expect("scan point in range");
        family.value(p).norm()
    };
    let grid: Vec<f64> = (0..nr * nd)
        .into_par_iter()
        .map(|k| visibility(rs[k / nd], ds[k % nd]))
        .collect();

    let mut candidates = Vec::new();
    for i in 0..nr {
        for j in 0..nd {
            let k = i * nd + j;
            let v = grid[k];
            if v >= options.zero_threshold {
                continue;
            }
            let mut is_min = true;
            'neighbours: for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0) || ii < 0 || jj < 0 || ii >= nr as i64 || jj >= nd as i64 {
                        continue;
                    }
                    let kk = ii as usize * nd + jj as usize;
                    // Plateaus keep only their first cell in index order.
                    if grid[kk] < v || (grid[kk] == v && kk < k) {
                        is_min = false;
                        break 'neighbours;
                    }
                }
            }
            if is_min {
                candidates.push((i, j));
            }
        }
    }

    let refined: Vec<(f64, f64)> = candidates
        .par_iter()
        .map(|&(i, j)| {
            let r_box = ((rs[i] - h_r).max(region.r.0), (rs[i] + h_r).min(region.r.1));
            let d_box = ((ds[j] - h_d).max(region.delta.0), (ds[j] + h_d).min(region.delta.1));
            let (mut r, mut d) = (rs[i], ds[j]);
            for _ in 0..DESCENT_ROUNDS {
                let r_next = golden_section(|x| visibility(x, d), r_box.0, r_box.1);
                let d_next = golden_section(|y| visibility(r_next, y), d_box.0, d_box.1);
                let moved = (r_next - r).abs().max((d_next - d).abs());
                r = r_next;
                d = d_next;
                if moved < DESCENT_TOLERANCE {
                    break;
                }
            }
            (r, d)
        })
        .collect();

    let mut distinct: Vec<(f64, f64)> = Vec::new();
    for (r, d) in refined {
        if visibility(r, d) >= options.zero_threshold {
            continue;
        }
        let duplicate = distinct
            .iter()
            .any(|&(r0, d0)| (r - r0).abs() < DUPLICATE_TOLERANCE && (d - d0).abs() < DUPLICATE_TOLERANCE);
        if !duplicate {
            distinct.push((r, d));
        }
    }

    let probed: Vec<std::result::Result<Option<SingularityRecord>, ProbeFailure>> = distinct
        .par_iter()
        .map(|&(r, d)| {
            let location = SpinHalfPoint::new(r, d).expect("refined point in range");
            let room = 1.0 - r.abs();
            let radius = if room < probe_radius { room } else { probe_radius };
            let failure = |error| ProbeFailure {
                location,
                probe_radius: radius,
                error,
            };
            if radius < 0.5 * probe_radius {
                return Err(failure(Error::RadiusOutOfDomain {
                    center_r: r,
                    radius: probe_radius,
                }));
            }
            let report = circle_path(location, radius, options.probe_samples, Orientation::Ccw)
                .map(|path| path.with_family(family.clone()))
                .and_then(|path| winding_number(&path, options.epsilon, options.max_depth))
                .map_err(failure)?;
            Ok((report.winding != 0).then_some(SingularityRecord {
                location,
                winding: report.winding,
                probe_radius: radius,
                min_visibility_on_probe: report.min_visibility,
            }))
        })
        .collect();

    let mut report = ScanReport::default();
    for outcome in probed {
        match outcome {
            Ok(Some(record)) => report.records.push(record),
            Ok(None) => {}
            Err(failure) => report.failures.push(failure),
        }
    }
    let by_location =
        |a: &SpinHalfPoint, b: &SpinHalfPoint| a.delta().total_cmp(&b.delta()).then(a.r().total_cmp(&b.r()));
    report.records.sort_by(|a, b| by_location(&a.location, &b.location));
    report.failures.sort_by(|a, b| by_location(&a.location, &b.location));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::{spin_half_density, spin_half_unitary, DEFAULT_EPSILON};
    use std::f64::consts::FRAC_PI_2;

    fn pt(r: f64, delta: f64) -> SpinHalfPoint {
        SpinHalfPoint::new(r, delta).unwrap()
    }

    #[test]
    fn sweep_builder() {
        let path = sweep_path(1.0, 0.0, PI, 3).unwrap();
        assert_eq!(path.points().unwrap(), &[pt(1.0, 0.0), pt(1.0, FRAC_PI_2), pt(1.0, PI)]);
        assert!(!path.is_closed());

        let degenerate = sweep_path(0.5, 0.0, 0.0, 2).unwrap();
        assert_eq!(track_phase(&degenerate, DEFAULT_EPSILON, 40).unwrap().total_phase, 0.0);

        let five = sweep_path(-1.0, 0.0, 2.0 * PI, 5).unwrap();
        let deltas: Vec<f64> = five.points().unwrap().iter().map(|p| p.delta()).collect();
        for (k, d) in deltas.iter().enumerate() {
            assert!((d - k as f64 * FRAC_PI_2).abs() < 1e-15);
        }
        assert!(sweep_path(0.0, 0.0, 1.0, 1).is_err());
    }

    #[test]
    fn circle_builder() {
        let ccw = circle_path(pt(0.0, FRAC_PI_2), 0.1, 16, Orientation::Ccw).unwrap();
        assert_eq!(ccw.len(), 17);
        assert!(ccw.is_closed());
        assert_eq!(ccw.points().unwrap()[0], ccw.points().unwrap()[16]);

        assert_eq!(
            circle_path(pt(0.8, 1.0), 1.5, 16, Orientation::Ccw),
            Err(Error::RadiusOutOfDomain {
                center_r: 0.8,
                radius: 1.5
            })
        );

        let cw = circle_path(pt(0.0, FRAC_PI_2), 0.1, 16, Orientation::Cw).unwrap();
        let mut reversed = ccw.points().unwrap().to_vec();
        reversed.reverse();
        assert_eq!(cw.points().unwrap(), reversed.as_slice());
        assert!(circle_path(pt(0.0, 0.0), 0.1, 15, Orientation::Ccw).is_err());
    }

    #[test]
    fn path_invariants() {
        assert!(matches!(
            ParameterPath::open(Family::SpinHalf, vec![pt(0.0, 0.0)]),
            Err(Error::InvalidPath(_))
        ));
        assert!(matches!(
            ParameterPath::closed(Family::SpinHalf, vec![pt(0.0, 0.0), pt(0.1, 0.0), pt(0.1, 0.1)]),
            Err(Error::InvalidPath(_))
        ));
        let open = sweep_path(0.5, 0.0, 1.0, 10).unwrap();
        assert_eq!(winding_number(&open, DEFAULT_EPSILON, 40), Err(Error::NotClosed));
    }

    #[test]
    fn pure_sweep_is_linear() {
        let trace = track_phase(&sweep_path(1.0, 0.0, PI, 64).unwrap(), DEFAULT_EPSILON, 40).unwrap();
        assert!((trace.total_phase - PI).abs() < 1e-12);
        for s in trace.nodes() {
            assert!((s.accumulated_phase - s.point.unwrap().delta()).abs() < 1e-12);
        }
        assert_eq!(trace.samples[0].accumulated_phase, 0.0);
    }

    #[test]
    fn near_singular_sweep_jumps_backwards() {
        let trace = track_phase(&sweep_path(-0.001, 0.0, PI, 64).unwrap(), DEFAULT_EPSILON, 40).unwrap();
        assert!((trace.total_phase + PI).abs() < 1e-9);
        assert!(trace.refinement_depth_used > 0);
        for w in trace.samples.windows(2) {
            assert!((w[1].accumulated_phase - w[0].accumulated_phase).abs() < FRAC_PI_2);
        }
    }

    #[test]
    fn unpolarized_sweep_hits_singularity() {
        let err = track_phase(&sweep_path(0.0, 0.0, PI, 64).unwrap(), DEFAULT_EPSILON, 40).unwrap_err();
        assert!(matches!(err, Error::SingularityOnPath { .. }));
    }

    #[test]
    fn shallow_depth_is_exhausted() {
        let err = track_phase(&sweep_path(0.001, 0.0, 3.0, 8).unwrap(), DEFAULT_EPSILON, 2).unwrap_err();
        assert!(matches!(err, Error::RefinementExhausted { depth: 2, .. }));
        assert!(track_phase(&sweep_path(0.001, 0.0, PI, 8).unwrap(), 0.0, 2).is_err());
        assert!(track_phase(&sweep_path(0.001, 0.0, PI, 8).unwrap(), 1e-9, 0).is_err());
    }

    #[test]
    fn explicit_paths_track_without_bisection() {
        let rho = spin_half_density(0.4).unwrap();
        let fine: Vec<_> = (0..=40)
            .map(|k| (spin_half_unitary(PI * k as f64 / 40.0).unwrap(), rho.clone()))
            .collect();
        let trace = track_phase(&ParameterPath::explicit(fine, false).unwrap(), DEFAULT_EPSILON, 40).unwrap();
        assert!((trace.total_phase - PI).abs() < 1e-12);
        assert_eq!(trace.refinement_depth_used, 0);

        let coarse: Vec<_> = (0..=2)
            .map(|k| (spin_half_unitary(PI * k as f64 / 2.0).unwrap(), rho.clone()))
            .collect();
        let err = track_phase(&ParameterPath::explicit(coarse, false).unwrap(), DEFAULT_EPSILON, 40).unwrap_err();
        assert!(matches!(err, Error::RefinementExhausted { depth: 0, .. }));
    }

    #[test]
    fn circuits_around_first_singularity() {
        let center = pt(0.0, FRAC_PI_2);
        let ccw = circle_path(center, 0.2, 256, Orientation::Ccw).unwrap();
        let report = winding_number(&ccw, DEFAULT_EPSILON, 40).unwrap();
        assert_eq!(report.winding, 1);
        assert!(report.residual < 1e-6);
        let cw = circle_path(center, 0.2, 256, Orientation::Cw).unwrap();
        assert_eq!(winding_number(&cw, DEFAULT_EPSILON, 40).unwrap().winding, -1);

        let away = circle_path(pt(0.5, FRAC_PI_2), 0.1, 256, Orientation::Ccw).unwrap();
        assert_eq!(winding_number(&away, DEFAULT_EPSILON, 40).unwrap().winding, 0);
    }

    #[test]
    fn rectangle_enclosing_both_singularities() {
        let rect = rectangle_path((-0.1, 0.1), (0.1, 2.0 * PI - 0.1), 64, Orientation::Ccw).unwrap();
        assert_eq!(winding_number(&rect, DEFAULT_EPSILON, 40).unwrap().winding, 2);
    }

    #[test]
    fn golden_section_finds_vertex() {
        let x = golden_section(|x| (x - 0.3).abs(), -1.0, 1.0);
        assert!((x - 0.3).abs() < 1e-11);
    }

    #[test]
    fn empty_scan_where_visibility_is_large() {
        let region = ScanRegion::new((-1.0, 1.0), (0.0, 1.0)).unwrap();
        let report = scan_singularities(&Family::SpinHalf, &region, &ScanOptions::default()).unwrap();
        assert!(report.records.is_empty() && report.failures.is_empty());
    }

    #[test]
    fn scan_argument_checks() {
        let region = ScanRegion::new((-1.0, 1.0), (0.0, 2.0 * PI)).unwrap();
        let small = ScanOptions {
            grid_r: 7,
            ..ScanOptions::default()
        };
        assert!(scan_singularities(&Family::SpinHalf, &region, &small).is_err());
        let wide_probe = ScanOptions {
            probe_radius: Some(0.5),
            ..ScanOptions::default()
        };
        assert!(scan_singularities(&Family::SpinHalf, &region, &wide_probe).is_err());
        assert!(ScanRegion::new((-1.5, 1.0), (0.0, 1.0)).is_err());
        assert!(ScanRegion::new((0.5, 0.1), (0.0, 1.0)).is_err());
    }

    #[test]
    fn mirrored_spin_half_runs_on_half_angles() {
        // Mirroring (1, 0) at spin 1/2 gives weights ((1+r)/2, (1-r)/2) under
        // e^{±iδ/2}: zeros at (0, π) and (0, 3π); only (0, π) is in range.
        let base = SpinSystem::new(Spin::HALF, vec![1.0, 0.0]).unwrap();
        let region = ScanRegion::new((-1.0, 1.0), (0.0, 2.0 * PI)).unwrap();
        let report = scan_singularities(&Family::Mirrored(base), &region, &ScanOptions::default()).unwrap();
        assert_eq!(report.records.len(), 1);
        assert!((report.records[0].location.delta() - PI).abs() < 1e-6);
        assert!(report.records[0].location.r().abs() < 1e-6);
        assert_eq!(report.records[0].winding, 1);
    }

    #[test]
    fn failed_probes_are_reported_not_fatal() {
        // Probe circles of radius 0.01 see visibility ~0.01, below this epsilon.
        let region = ScanRegion::new((-1.0, 1.0), (0.0, 2.0 * PI)).unwrap();
        let options = ScanOptions {
            epsilon: 0.05,
            ..ScanOptions::default()
        };
        let report = scan_singularities(&Family::SpinHalf, &region, &options).unwrap();
        assert!(report.records.is_empty());
        assert_eq!(report.failures.len(), 2);
        assert!(report
            .failures
            .iter()
            .all(|f| matches!(f.error, Error::SingularityOnPath { .. })));
        assert!(report.failures[0].location.delta() < report.failures[1].location.delta());
    }
}
