#![allow(dead_code)]

use mixphase::qmatrix::{validate_density, validate_unitary, ComplexMatrix, DensityMatrix, UnitaryMatrix};
use mixphase::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_vector(rng: &mut impl Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| random_complex(rng)).collect()
}

pub fn random_matrix(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    ComplexMatrix::new(n, random_vector(rng, n * n)).unwrap()
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    random_matrix(rng, n).hermitian_part()
}

/// Gram-Schmidt orthonormalization of random columns.
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> UnitaryMatrix {
    let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    while columns.len() < n {
        let mut v = random_vector(rng, n);
        for q in &columns {
            let dot: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            v.iter_mut().zip(q).for_each(|(x, qi)| *x -= dot * qi);
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-6 {
            continue;
        }
        columns.push(v.into_iter().map(|z| z / norm).collect());
    }
    let data = (0..n * n).map(|k| columns[k % n][k / n]).collect();
    validate_unitary(ComplexMatrix::new(n, data).unwrap(), 1e-10).unwrap()
}

/// ρ = AA†/Tr(AA†).
pub fn random_density(rng: &mut impl Rng, n: usize) -> DensityMatrix {
    let a = random_matrix(rng, n);
    let g = a.mat_mul(&a.adjoint()).unwrap().hermitian_part();
    let t = g.trace().re;
    validate_density(g.scale(Complex64::new(1.0 / t, 0.0)), 1e-10).unwrap()
}

/// Brute-force accumulated phase of a closed parametric curve, sampled at
/// `n` uniform steps of t ∈ [0, 1]; increments via atan2 of z_{k+1}/z_k.
pub fn dense_total_phase(f: impl Fn(f64) -> Complex64, n: usize) -> f64 {
    let mut total = 0.0;
    let mut prev = f(0.0);
    for k in 1..=n {
        let z = f(k as f64 / n as f64);
        let ratio = z / prev;
        total += ratio.im.atan2(ratio.re);
        prev = z;
    }
    total
}

pub fn dense_winding(f: impl Fn(f64) -> Complex64, n: usize) -> i64 {
    (dense_total_phase(f, n) / std::f64::consts::TAU).round() as i64
}

/// cos δ + i·r·sin δ written out directly.
pub fn spin_half_closed_form(r: f64, delta: f64) -> Complex64 {
    Complex64::new(delta.cos(), r * delta.sin())
}

/// (1 + 2cos δ + 2i·r·sin δ)/3, the spin-1 linear-family value.
pub fn spin_one_closed_form(r: f64, delta: f64) -> Complex64 {
    Complex64::new((1.0 + 2.0 * delta.cos()) / 3.0, 2.0 * r * delta.sin() / 3.0)
}

/// Point on a circle at fraction t of a full turn.
pub fn on_circle(center: (f64, f64), radius: f64, ccw: bool, t: f64) -> (f64, f64) {
    let angle = std::f64::consts::TAU * if ccw { t } else { -t };
    (center.0 + radius * angle.cos(), center.1 + radius * angle.sin())
}

/// Point on the perimeter of an axis-aligned rectangle traversed CCW from
/// its lower-left corner, at fraction t of the perimeter.
pub fn on_rectangle(r: (f64, f64), d: (f64, f64), t: f64) -> (f64, f64) {
    let (w, h) = (r.1 - r.0, d.1 - d.0);
    let mut s = t * 2.0 * (w + h);
    if s <= w {
        return (r.0 + s, d.0);
    }
    s -= w;
    if s <= h {
        return (r.1, d.0 + s);
    }
    s -= h;
    if s <= w {
        return (r.1 - s, d.1);
    }
    s -= w;
    (r.0, d.1 - s.min(h))
}
