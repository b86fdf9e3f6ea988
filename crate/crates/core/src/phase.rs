//! The interference functional z = Tr(Uρ), its split into visibility and
//! principal phase, and the spin families it is evaluated on.
//!
//! Basis ordering follows the |z+⟩-first convention: index 0 carries
//! m = +j, the last index carries m = −j.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmatrix::{
    validate_density, validate_unitary, ComplexMatrix, DensityMatrix, UnitaryMatrix, DEFAULT_TOLERANCE,
};

/// Visibility at or below which the phase is reported as indeterminate.
pub const DEFAULT_EPSILON: f64 = 1e-9;

/// Reduces an angle to the principal branch (−π, π].
pub fn wrap_phase(angle: f64) -> f64 {
    let mut x = angle.rem_euclid(2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    }
    if x <= -PI {
        x += 2.0 * PI;
    }
    x
}

/// Principal argument in (−π, π]; atan2 returns −π for (−1, −0.0).
pub fn principal_arg(z: Complex64) -> f64 {
    let a = z.im.atan2(z.re);
    if a <= -PI {
        PI
    } else {
        a
    }
}

/// z = c·e^{iφ}. The phase is `None` when c ≤ epsilon.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterferencePhase {
    pub z: Complex64,
    pub visibility: f64,
    pub phase: Option<f64>,
    pub epsilon: f64,
}

impl InterferencePhase {
    pub fn from_value(z: Complex64, epsilon: f64) -> Self {
        let visibility = z.norm();
        let phase = (visibility > epsilon).then(|| principal_arg(z));
        Self {
            z,
            visibility,
            phase,
            epsilon,
        }
    }

    pub fn is_indeterminate(&self) -> bool {
        self.phase.is_none()
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon >= 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "epsilon {epsilon} must be finite and >= 0"
        )))
    }
}

/// Tr(Uρ) with its visibility and principal phase.
pub fn interference_functional(u: &UnitaryMatrix, rho: &DensityMatrix, epsilon: f64) -> Result<InterferencePhase> {
    check_epsilon(epsilon)?;
    let z = u.matrix().mat_mul(rho.matrix())?.trace();
    let value = InterferencePhase::from_value(z, epsilon);
    // |Tr(Uρ)| ≤ Σ_k p_k |⟨k|U|k⟩| ≤ 1.
    debug_assert!(
        value.visibility <= 1.0 + u.tolerance() + rho.tolerance() + 1e-12,
        "visibility {} exceeds 1",
        value.visibility
    );
    Ok(value)
}

/// ⟨ψ|U|ψ⟩/⟨ψ|ψ⟩, computed directly from the inner product.
pub fn pancharatnam_phase(psi: &[Complex64], u: &UnitaryMatrix, epsilon: f64) -> Result<InterferencePhase> {
    check_epsilon(epsilon)?;
    let norm_sqr: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    if psi.is_empty() || norm_sqr == 0.0 {
        return Err(Error::ZeroVector);
    }
    let image = u.matrix().apply(psi)?;
    let inner: Complex64 = psi.iter().zip(&image).map(|(a, b)| a.conj() * b).sum();
    Ok(InterferencePhase::from_value(inner / norm_sqr, epsilon))
}

/// A point (r, δ) of the spin-1/2 parameter plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinHalfPoint {
    r: f64,
    delta: f64,
}

impl SpinHalfPoint {
    pub fn new(r: f64, delta: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&r) {
            return Err(Error::ROutOfRange(r));
        }
        if !delta.is_finite() {
            return Err(Error::InvalidArgument(format!("delta {delta} is not finite")));
        }
        Ok(Self { r, delta })
    }

    #[inline]
    pub fn r(&self) -> f64 {
        self.r
    }

    #[inline]
    pub fn delta(&self) -> f64 {
        self.delta
    }
}

fn check_r(r: f64) -> Result<()> {
    if (-1.0..=1.0).contains(&r) {
        Ok(())
    } else {
        Err(Error::ROutOfRange(r))
    }
}

/// ρ₀ = diag[(1+r)/2, (1−r)/2].
pub fn spin_half_density(r: f64) -> Result<DensityMatrix> {
    check_r(r)?;
    validate_density(
        ComplexMatrix::real_diagonal(&[(1.0 + r) / 2.0, (1.0 - r) / 2.0]),
        DEFAULT_TOLERANCE,
    )
}

/// diag(e^{iδ}, e^{−iδ}).
pub fn spin_half_unitary(delta: f64) -> Result<UnitaryMatrix> {
    if !delta.is_finite() {
        return Err(Error::InvalidArgument(format!("delta {delta} is not finite")));
    }
    validate_unitary(
        ComplexMatrix::diagonal(&[Complex64::from_polar(1.0, delta), Complex64::from_polar(1.0, -delta)]),
        DEFAULT_TOLERANCE,
    )
}

/// Closed form z = cos δ + i·r·sin δ.
pub fn spin_half_functional(p: SpinHalfPoint, epsilon: f64) -> InterferencePhase {
    let (s, c) = p.delta.sin_cos();
    InterferencePhase::from_value(Complex64::new(c, p.r * s), epsilon)
}

/// Spin quantum number j, stored as the integer 2j.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Spin {
    two_j: u32,
}

impl Spin {
    pub const HALF: Spin = Spin { two_j: 1 };

    pub fn new(j: f64) -> Result<Self> {
        let two_j = 2.0 * j;
        if !(two_j.is_finite() && two_j >= 1.0 && two_j.fract() == 0.0 && two_j <= u32::MAX as f64) {
            return Err(Error::BadSpin(j));
        }
        Ok(Self { two_j: two_j as u32 })
    }

    pub fn from_twice(two_j: u32) -> Result<Self> {
        if two_j == 0 {
            return Err(Error::BadSpin(0.0));
        }
        Ok(Self { two_j })
    }

    pub fn j(&self) -> f64 {
        f64::from(self.two_j) / 2.0
    }

    pub fn twice(&self) -> u32 {
        self.two_j
    }

    /// 2j + 1.
    pub fn multiplicity(&self) -> usize {
        self.two_j as usize + 1
    }

    /// Magnetic quantum numbers j, j−1, …, −j.
    pub fn m_values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.two_j).map(move |k| (f64::from(self.two_j) - 2.0 * f64::from(k)) / 2.0)
    }
}

/// diag(e^{imδ}) for m = j, …, −j. `zeeman_unitary(1/2, 2δ)` equals
/// [`spin_half_unitary`]`(δ)`.
pub fn zeeman_unitary(spin: Spin, delta: f64) -> Result<UnitaryMatrix> {
    if !delta.is_finite() {
        return Err(Error::InvalidArgument(format!("delta {delta} is not finite")));
    }
    let phases: Vec<Complex64> = spin.m_values().map(|m| Complex64::from_polar(1.0, m * delta)).collect();
    validate_unitary(ComplexMatrix::diagonal(&phases), DEFAULT_TOLERANCE)
}

/// Populations p_m of a spin-j system diagonal in the Zeeman basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinSystem {
    spin: Spin,
    weights: Vec<f64>,
}

impl SpinSystem {
    /// `weights[k]` is the population of m = j − k.
    pub fn new(spin: Spin, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != spin.multiplicity() {
            return Err(Error::BadWeights(format!(
                "spin {} needs {} weights, got {}",
                spin.j(),
                spin.multiplicity(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::BadWeights(format!("weight {w} is negative or not finite")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::BadWeights(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { spin, weights })
    }

    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn density(&self) -> Result<DensityMatrix> {
        validate_density(ComplexMatrix::real_diagonal(&self.weights), DEFAULT_TOLERANCE)
    }

    /// Σ_m p_m e^{imδ}.
    pub fn value(&self, delta: f64) -> Complex64 {
        self.spin
            .m_values()
            .zip(&self.weights)
            .map(|(m, &p)| Complex64::from_polar(p, m * delta))
            .sum()
    }

    /// Mixes the populations with their m → −m mirror image:
    /// p_m(r) = (1+r)/2·p_m + (1−r)/2·p_{−m}.
    pub fn polarization_mixture(&self, r: f64) -> Result<SpinSystem> {
        check_r(r)?;
        let (a, b) = ((1.0 + r) / 2.0, (1.0 - r) / 2.0);
        let weights = self
            .weights
            .iter()
            .zip(self.weights.iter().rev())
            .map(|(&w, &mirror)| a * w + b * mirror)
            .collect();
        SpinSystem::new(self.spin, weights)
    }
}

pub fn spin_system_functional(system: &SpinSystem, delta: f64, epsilon: f64) -> InterferencePhase {
    InterferencePhase::from_value(system.value(delta), epsilon)
}

/// p_m = (1 + r·m/j)/(2j+1); at j = 1/2 these are the weights of
/// [`spin_half_density`]`(r)`.
pub fn linear_weight_family(spin: Spin, r: f64) -> Result<SpinSystem> {
    check_r(r)?;
    let j = spin.j();
    let n = spin.multiplicity() as f64;
    let weights = spin.m_values().map(|m| (1.0 + r * m / j) / n).collect();
    SpinSystem::new(spin, weights)
}
