//! Two-beam interference patterns.
//!
//! The internal unitary U sits in one arm, a scanned reference phase χ in the
//! other. With ρ = Σ_k p_k |k⟩⟨k| each eigenchannel contributes a cosine
//! fringe p_k·(1 + a_k cos(χ − θ_k)) where a_k e^{iθ_k} = ⟨k|U|k⟩, so the
//! total is I(χ) = 1 + c·cos(χ − φ) with c e^{iφ} = Tr(Uρ).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::phase::{
    interference_functional, principal_arg, spin_half_density, spin_half_unitary, wrap_phase, InterferencePhase,
    DEFAULT_EPSILON,
};
use crate::qmatrix::{ComplexMatrix, DensityMatrix, UnitaryMatrix};

const JACOBI_OFF_DIAGONAL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;
const HERMITIAN_INPUT_TOLERANCE: f64 = 1e-9;

/// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations.
///
/// Returns eigenvalues in descending order and the matching orthonormal
/// eigenvectors (`vectors[k]` belongs to `values[k]`). Each vector's first
/// component of non-negligible modulus is made real and positive.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<(Vec<f64>, Vec<Vec<Complex64>>)> {
    let violation = m.hermiticity_violation();
    if violation > HERMITIAN_INPUT_TOLERANCE {
        return Err(Error::NotHermitian { violation });
    }
    let n = m.dim();
    let mut a: Vec<Complex64> = m.hermitian_part().entries().to_vec();
    let mut v: Vec<Complex64> = ComplexMatrix::identity(n).entries().to_vec();
    let scale = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1.0);
    let threshold = JACOBI_OFF_DIAGONAL * scale;

    let off_diagonal = |a: &[Complex64]| {
        let mut worst = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                worst = worst.max(a[p * n + q].norm());
            }
        }
        worst
    };

    let mut sweeps = 0;
    loop {
        let off = off_diagonal(&a);
        if off < threshold {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off_diagonal: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let magnitude = apq.norm();
                if magnitude < f64::MIN_POSITIVE {
                    continue;
                }
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                // Phase-rotate column q so the (p, q) entry becomes real, then
                // apply the real symmetric rotation that annihilates it.
                let phase = apq / magnitude;
                let theta = (aqq - app) / (2.0 * magnitude);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // G restricted to (p, q): [[c, s], [-s·e^{-iα}, c·e^{-iα}]].
                let g = [
                    [Complex64::new(c, 0.0), Complex64::new(s, 0.0)],
                    [-phase.conj() * s, phase.conj() * c],
                ];
                // A ← A·G on columns p, q.
                for row in 0..n {
                    let x = a[row * n + p];
                    let y = a[row * n + q];
                    a[row * n + p] = x * g[0][0] + y * g[1][0];
                    a[row * n + q] = x * g[0][1] + y * g[1][1];
                }
                // A ← G†·A on rows p, q.
                for col in 0..n {
                    let x = a[p * n + col];
                    let y = a[q * n + col];
                    a[p * n + col] = g[0][0].conj() * x + g[1][0].conj() * y;
                    a[q * n + col] = g[0][1].conj() * x + g[1][1].conj() * y;
                }
                a[p * n + q] = Complex64::new(0.0, 0.0);
                a[q * n + p] = Complex64::new(0.0, 0.0);
                a[p * n + p].im = 0.0;
                a[q * n + q].im = 0.0;
                for row in 0..n {
                    let x = v[row * n + p];
                    let y = v[row * n + q];
                    v[row * n + p] = x * g[0][0] + y * g[1][0];
                    v[row * n + q] = x * g[0][1] + y * g[1][1];
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].re.total_cmp(&a[i * n + i].re).then(i.cmp(&j)));
    let values = order.iter().map(|&k| a[k * n + k].re).collect();
    let vectors = order
        .iter()
        .map(|&k| {
            let mut col: Vec<Complex64> = (0..n).map(|row| v[row * n + k]).collect();
            if let Some(lead) = col.iter().copied().find(|z| z.norm() > 1e-8) {
                let unphase = lead.conj() / lead.norm();
                col.iter_mut().for_each(|z| *z *= unphase);
            }
            col
        })
        .collect();
    Ok((values, vectors))
}

/// One eigenchannel of ρ: weight p_k and ⟨k|U|k⟩ = a_k e^{iθ_k}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Channel {
    pub weight: f64,
    pub visibility: f64,
    pub phase: f64,
}

impl Channel {
    fn from_amplitude(weight: f64, amplitude: Complex64) -> Self {
        let visibility = amplitude.norm().min(1.0);
        Self {
            weight,
            visibility,
            phase: if visibility > 0.0 {
                principal_arg(amplitude)
            } else {
                0.0
            },
        }
    }

    /// p_k·(1 + a_k cos(χ − θ_k)).
    pub fn intensity(&self, chi: f64) -> f64 {
        self.weight * (1.0 + self.visibility * (chi - self.phase).cos())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Interferogram {
    pub chi_grid: Vec<f64>,
    pub intensity: Vec<f64>,
    pub channels: Vec<Channel>,
    pub source_phase: InterferencePhase,
}

impl Interferogram {
    fn from_channels(channels: Vec<Channel>, source_phase: InterferencePhase, chi_samples: usize) -> Result<Self> {
        if chi_samples < 8 {
            return Err(Error::InvalidArgument(format!("chi_samples {chi_samples} < 8")));
        }
        let chi_grid: Vec<f64> = (0..chi_samples)
            .map(|i| -PI + 2.0 * PI * i as f64 / chi_samples as f64)
            .collect();
        let intensity = chi_grid
            .iter()
            .map(|&chi| {
                1.0 + channels
                    .iter()
                    .map(|ch| ch.weight * ch.visibility * (chi - ch.phase).cos())
                    .sum::<f64>()
            })
            .collect();
        Ok(Self {
            chi_grid,
            intensity,
            channels,
            source_phase,
        })
    }

    /// Per-channel fringe p_k·(1 + a_k cos(χ − θ_k)) at every grid point.
    pub fn channel_intensities(&self, k: usize) -> Vec<f64> {
        self.chi_grid
            .iter()
            .map(|&chi| self.channels[k].intensity(chi))
            .collect()
    }
}

/// Builds I(χ) on the uniform grid χ_i = −π + 2πi/N, i < N.
///
/// Channels are ordered by descending weight, ties by ascending phase.
pub fn synthesize_pattern(u: &UnitaryMatrix, rho: &DensityMatrix, chi_samples: usize) -> Result<Interferogram> {
    let source = interference_functional(u, rho, DEFAULT_EPSILON)?;
    let (weights, vectors) = hermitian_eigen(rho.matrix())?;
    let mut channels = Vec::with_capacity(weights.len());
    for (weight, vector) in weights.into_iter().zip(vectors) {
        let image = u.matrix().apply(&vector)?;
        let amplitude: Complex64 = vector.iter().zip(&image).map(|(a, b)| a.conj() * b).sum();
        channels.push(Channel::from_amplitude(weight.max(0.0), amplitude));
    }
    channels.sort_by(|a, b| b.weight.total_cmp(&a.weight).then(a.phase.total_cmp(&b.phase)));
    Interferogram::from_channels(channels, source, chi_samples)
}

/// Observable phase: position of the fringe maximum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeakShift {
    /// `None` when the contrast is at or below epsilon.
    pub chi_star: Option<f64>,
    pub contrast: f64,
}

impl PeakShift {
    pub fn is_indeterminate(&self) -> bool {
        self.chi_star.is_none()
    }
}

/// Vertex of the parabola through (−1, left), (0, mid), (1, right):
/// returns (offset in grid steps, interpolated value).
fn parabolic_vertex(left: f64, mid: f64, right: f64) -> (f64, f64) {
    let curvature = left - 2.0 * mid + right;
    if curvature == 0.0 {
        return (0.0, mid);
    }
    let offset = (0.5 * (left - right) / curvature).clamp(-0.5, 0.5);
    let value = mid - 0.25 * (left - right) * offset;
    (offset, value)
}

/// Refined extremum of a periodic sampled signal. `sign` = 1 for the maximum,
/// −1 for the minimum; ties go to the smallest index.
fn refined_extremum(values: &[f64], sign: f64) -> (usize, f64, f64) {
    let n = values.len();
    let mut best = 0;
    for (i, &x) in values.iter().enumerate() {
        if sign * x > sign * values[best] {
            best = i;
        }
    }
    let left = values[(best + n - 1) % n];
    let right = values[(best + 1) % n];
    let (offset, value) = parabolic_vertex(sign * left, sign * values[best], sign * right);
    (best, offset, sign * value)
}

/// Contrast (I_max − I_min)/(I_max + I_min) and the fringe maximum, both
/// refined by three-point quadratic interpolation on the periodic grid.
pub fn peak_shift(g: &Interferogram, epsilon: f64) -> PeakShift {
    let n = g.intensity.len();
    let (best, offset, i_max) = refined_extremum(&g.intensity, 1.0);
    let (_, _, i_min) = refined_extremum(&g.intensity, -1.0);
    let contrast = ((i_max - i_min) / (i_max + i_min)).clamp(0.0, 1.0);
    if contrast <= epsilon {
        return PeakShift {
            chi_star: None,
            contrast,
        };
    }
    let step = 2.0 * PI / n as f64;
    PeakShift {
        chi_star: Some(wrap_phase(g.chi_grid[best] + offset * step)),
        contrast,
    }
}

/// Spin-1/2 patterns for each δ with the two |z±⟩ channels kept in basis
/// order: weights ((1+r)/2, (1−r)/2), phases (+δ, −δ) wrapped.
pub fn counter_moving_demo(r: f64, deltas: &[f64], chi_samples: usize) -> Result<Vec<Interferogram>> {
    let rho = spin_half_density(r)?;
    deltas
        .iter()
        .map(|&delta| {
            let u = spin_half_unitary(delta)?;
            let source = interference_functional(&u, &rho, DEFAULT_EPSILON)?;
            let channels = vec![
                Channel {
                    weight: (1.0 + r) / 2.0,
                    visibility: 1.0,
                    phase: wrap_phase(delta),
                },
                Channel {
                    weight: (1.0 - r) / 2.0,
                    visibility: 1.0,
                    phase: wrap_phase(-delta),
                },
            ];
            Interferogram::from_channels(channels, source, chi_samples)
        })
        .collect()
}
