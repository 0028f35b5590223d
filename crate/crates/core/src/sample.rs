//! Random operators for tests, benchmarks and optimizer restarts.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::qmat::{ComplexMatrix, HermitianOperator};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Ginibre matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// GUE-like Hermitian matrix.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> HermitianOperator {
    HermitianOperator::hermitian_part(&ginibre(rng, n, n))
}

/// Trace-one Hermitian matrix (generally indefinite).
pub fn random_trace_one<R: Rng + ?Sized>(rng: &mut R, n: usize) -> HermitianOperator {
    let h = random_hermitian(rng, n).scale(1.0 / n as f64);
    let shift = (h.trace() - 1.0) / n as f64;
    &h - &HermitianOperator::identity(n).scale(shift)
}

/// Full-rank density matrix from the Hilbert–Schmidt ensemble.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, n: usize) -> HermitianOperator {
    let g = ginibre(rng, n, n);
    let h = HermitianOperator::hermitian_part(&(&g * g.adjoint()));
    let t = h.trace();
    h.scale(1.0 / t)
}

/// Haar-random unit vector.
pub fn random_ket<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..n).map(|_| gaussian(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> HermitianOperator {
    HermitianOperator::projector_onto(&random_ket(rng, n))
}

/// Haar-random unitary: Gram–Schmidt on a Ginibre matrix, with the column
/// phases fixed by the QR convention.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let g = ginibre(rng, n, n);
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = q.clone();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..n {
            u[(i, j)] = q[(i, j)] * phase;
        }
    }
    u
}
