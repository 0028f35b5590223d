//! Operator bases for one qubit or one qutrit, and correlation tensors of
//! bipartite operators in a product basis.
//!
//! Element order is fixed:
//!
//! | label                 | d | index 0 | indices 1..                                      |
//! |-----------------------|---|---------|--------------------------------------------------|
//! | `Pauli`               | 2 | I       | σx, σy, σz                                       |
//! | `WignerQutrit`        | 3 | K₁      | K₂ … K₉                                          |
//! | `GellMannNormalized`  | 2 | I/√2    | σx/√2, σy/√2, σz/√2                              |
//! | `GellMannNormalized`  | 3 | I/√3    | λ₁ … λ₈ in the usual Gell-Mann order, each / √2  |

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{kron, ComplexMatrix, HermitianOperator, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisLabel {
    Pauli,
    WignerQutrit,
    GellmannNormalized,
}

/// An ordered Hilbert-Schmidt orthogonal basis of `d × d` Hermitian matrices
/// whose elements all have the same norm.
#[derive(Debug, Clone)]
pub struct OperatorBasis {
    dim: usize,
    label: BasisLabel,
    elements: Vec<HermitianOperator>,
    norm_sq: f64,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn op3(rows: [[Complex64; 3]; 3]) -> HermitianOperator {
    let m = DMatrix::from_fn(3, 3, |i, j| rows[i][j]);
    HermitianOperator::new(m).expect("constant basis element is Hermitian")
}

fn op2(rows: [[Complex64; 2]; 2]) -> HermitianOperator {
    let m = DMatrix::from_fn(2, 2, |i, j| rows[i][j]);
    HermitianOperator::new(m).expect("constant basis element is Hermitian")
}

pub fn sigma_x() -> HermitianOperator {
    op2([[ZERO, ONE], [ONE, ZERO]])
}

pub fn sigma_y() -> HermitianOperator {
    op2([[ZERO, c(0.0, -1.0)], [c(0.0, 1.0), ZERO]])
}

pub fn sigma_z() -> HermitianOperator {
    op2([[ONE, ZERO], [ZERO, -ONE]])
}

/// `{I, σx, σy, σz}`.
pub fn pauli_basis() -> OperatorBasis {
    OperatorBasis {
        dim: 2,
        label: BasisLabel::Pauli,
        elements: vec![HermitianOperator::identity(2), sigma_x(), sigma_y(), sigma_z()],
        norm_sq: 2.0,
    }
}

/// The nine qutrit phase-point operators K₁ … K₉.
pub fn wigner_qutrit_basis() -> OperatorBasis {
    let h = 3f64.sqrt() / 2.0;
    let a = c(-0.5, -h);
    let b = c(-0.5, h);
    let (o, z) = (ONE, ZERO);
    let k4 = op3([[o, z, z], [z, z, a], [z, b, z]]);
    let k5 = op3([[z, a, z], [b, z, z], [z, z, o]]);
    let k6 = op3([[z, z, a], [z, o, z], [b, z, z]]);
    let elements = vec![
        op3([[o, z, z], [z, z, o], [z, o, z]]),
        op3([[z, o, z], [o, z, z], [z, z, o]]),
        op3([[z, z, o], [z, o, z], [o, z, z]]),
        k4.clone(),
        k5.clone(),
        k6.clone(),
        k4.transpose(),
        k5.transpose(),
        k6.transpose(),
    ];
    let basis = OperatorBasis {
        dim: 3,
        label: BasisLabel::WignerQutrit,
        elements,
        norm_sq: 3.0,
    };
    let defect = basis.wigner_defect();
    assert!(
        defect < 1e-12,
        "phase-point operators fail their identities by {defect:e}"
    );
    basis
}

/// Hilbert-Schmidt orthonormal basis with `I/√d` first.
pub fn gellmann_basis(d: usize) -> Result<OperatorBasis> {
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let elements = match d {
        2 => vec![
            HermitianOperator::identity(2).scale(s2),
            sigma_x().scale(s2),
            sigma_y().scale(s2),
            sigma_z().scale(s2),
        ],
        3 => {
            let sym = |p: usize, q: usize| {
                let mut m = ComplexMatrix::zeros(3, 3);
                m[(p, q)] = c(s2, 0.0);
                m[(q, p)] = c(s2, 0.0);
                HermitianOperator::hermitian_part(&m)
            };
            let anti = |p: usize, q: usize| {
                let mut m = ComplexMatrix::zeros(3, 3);
                m[(p, q)] = c(0.0, -s2);
                m[(q, p)] = c(0.0, s2);
                HermitianOperator::hermitian_part(&m)
            };
            let r6 = 6f64.sqrt();
            vec![
                HermitianOperator::identity(3).scale(1.0 / 3f64.sqrt()),
                sym(0, 1),
                anti(0, 1),
                HermitianOperator::diagonal(&[s2, -s2, 0.0]),
                sym(0, 2),
                anti(0, 2),
                sym(1, 2),
                anti(1, 2),
                HermitianOperator::diagonal(&[1.0 / r6, 1.0 / r6, -2.0 / r6]),
            ]
        }
        _ => {
            return Err(Error::Argument(format!(
                "Gell-Mann basis is available for d = 2 or 3, not {d}"
            )))
        }
    };
    Ok(OperatorBasis {
        dim: d,
        label: BasisLabel::GellmannNormalized,
        elements,
        norm_sq: 1.0,
    })
}

impl OperatorBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> BasisLabel {
        self.label
    }

    pub fn elements(&self) -> &[HermitianOperator] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Common value of `tr(Gᵢ²)`.
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// Gram matrix `tr(GᵢGⱼ)`.
    pub fn gram(&self) -> DMatrix<f64> {
        let n = self.elements.len();
        DMatrix::from_fn(n, n, |i, j| self.elements[i].hs_inner(&self.elements[j]))
    }

    /// Largest violation of `ΣKᵢ = 3I`, `tr(KᵢKⱼ) = 3δᵢⱼ`, `tr Kᵢ = 1`.
    fn wigner_defect(&self) -> f64 {
        let sum = self
            .elements
            .iter()
            .fold(HermitianOperator::zeros(3), |acc, k| &acc + k);
        let mut worst = sum.max_abs_diff(&HermitianOperator::identity(3).scale(3.0));
        let gram = self.gram();
        for i in 0..9 {
            worst = worst.max((self.elements[i].trace() - 1.0).abs());
            for j in 0..9 {
                let target = if i == j { 3.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - target).abs());
            }
        }
        worst
    }
}

/// Coefficients of a bipartite operator in a product basis, relative to the
/// unit-normalized elements `Ĝ = G/‖G‖`.
#[derive(Debug, Clone)]
pub struct CorrelationTensor {
    pub label_a: BasisLabel,
    pub label_b: BasisLabel,
    pub coefficients: DMatrix<f64>,
}

/// `C_ij = tr[op (Gᵢ⊗Gⱼ)] / (‖Gᵢ‖‖Gⱼ‖)`.
pub fn expand(op: &HermitianOperator, basis_a: &OperatorBasis, basis_b: &OperatorBasis) -> Result<CorrelationTensor> {
    let expected = basis_a.dim * basis_b.dim;
    if op.dim() != expected {
        return Err(Error::Dimension {
            expected,
            found: op.dim(),
        });
    }
    let norm = (basis_a.norm_sq * basis_b.norm_sq).sqrt();
    let mut coefficients = DMatrix::zeros(basis_a.len(), basis_b.len());
    for (i, ga) in basis_a.elements.iter().enumerate() {
        for (j, gb) in basis_b.elements.iter().enumerate() {
            coefficients[(i, j)] = op.hs_inner(&kron(ga, gb)?) / norm;
        }
    }
    Ok(CorrelationTensor {
        label_a: basis_a.label,
        label_b: basis_b.label,
        coefficients,
    })
}

/// Inverse of [`expand`].
pub fn reconstruct(
    tensor: &CorrelationTensor,
    basis_a: &OperatorBasis,
    basis_b: &OperatorBasis,
) -> Result<HermitianOperator> {
    let (r, k) = tensor.coefficients.shape();
    if r != basis_a.len() || k != basis_b.len() {
        return Err(Error::Dimension {
            expected: basis_a.len() * basis_b.len(),
            found: r * k,
        });
    }
    let norm = (basis_a.norm_sq * basis_b.norm_sq).sqrt();
    let dim = basis_a.dim * basis_b.dim;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for (i, ga) in basis_a.elements.iter().enumerate() {
        for (j, gb) in basis_b.elements.iter().enumerate() {
            let cij = tensor.coefficients[(i, j)];
            if cij != 0.0 {
                m += kron(ga, gb)?.matrix() * Complex64::from(cij / norm);
            }
        }
    }
    Ok(HermitianOperator::hermitian_part(&m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{eig_hermitian, eigprojectors, DEFAULT_CLUSTER_TOL};
    use crate::sample::random_hermitian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn swap(d: usize) -> HermitianOperator {
        let n = d * d;
        let m = ComplexMatrix::from_fn(n, n, |r, c| if r / d == c % d && r % d == c / d { ONE } else { ZERO });
        HermitianOperator::new(m).unwrap()
    }

    #[test]
    fn pauli_elements() {
        let p = pauli_basis();
        assert_eq!(p.elements()[0], HermitianOperator::identity(2));
        assert_eq!(p.elements()[1].hs_inner(&p.elements()[2]), 0.0);
        let total: f64 = p.elements().iter().map(|s| s.hs_inner(s)).sum();
        assert_eq!(total, 8.0);
    }

    #[test]
    fn wigner_identities() {
        let k = wigner_qutrit_basis();
        assert!((k.elements()[3].trace() - 1.0).abs() < 1e-15);
        let sum = k.elements().iter().fold(HermitianOperator::zeros(3), |a, b| &a + b);
        assert!(sum.max_abs_diff(&HermitianOperator::identity(3).scale(3.0)) < 1e-14);
        assert!(k.elements()[1].hs_inner(&k.elements()[4]).abs() < 1e-15);
    }

    #[test]
    fn wigner_spectra() {
        for kk in wigner_qutrit_basis().elements() {
            let ev = eig_hermitian(kk).unwrap().eigenvalues;
            for (got, want) in ev.iter().zip([1.0, 1.0, -1.0]) {
                assert!((got - want).abs() < 1e-13, "{ev:?}");
            }
        }
    }

    #[test]
    fn k1_projectors() {
        let basis = wigner_qutrit_basis();
        let k1 = &basis.elements()[0];
        let p = eigprojectors(k1, DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(p.len(), 2);
        assert!((p[0].0 - 1.0).abs() < 1e-14 && (p[0].1.trace() - 2.0).abs() < 1e-13);
        assert!((p[1].0 + 1.0).abs() < 1e-14 && (p[1].1.trace() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn gellmann_orthonormal() {
        let g2 = gellmann_basis(2).unwrap();
        assert!(g2.elements()[1].max_abs_diff(&sigma_x().scale(std::f64::consts::FRAC_1_SQRT_2)) < 1e-16);
        for d in [2, 3] {
            let g = gellmann_basis(d).unwrap();
            assert_eq!(g.len(), d * d);
            let gram = g.gram();
            let err = (gram - DMatrix::<f64>::identity(d * d, d * d)).abs().max();
            assert!(err < 1e-14, "d={d} gram error {err}");
        }
        assert!(gellmann_basis(4).is_err());
    }

    #[test]
    fn expand_maximally_mixed() {
        let p = pauli_basis();
        let t = expand(&HermitianOperator::identity(4).scale(0.25), &p, &p).unwrap();
        // tr[(I/4)(I⊗I)] / 2 = 1/2 with unit-normalized elements.
        assert!((t.coefficients[(0, 0)] - 0.5).abs() < 1e-15);
        assert_eq!(t.coefficients.iter().filter(|x| x.abs() > 1e-15).count(), 1);
    }

    #[test]
    fn expand_swap_is_diagonal() {
        // SWAP = ½ Σ σᵢ⊗σᵢ, so tr[SWAP/2 (σᵢ⊗σⱼ)] = δᵢⱼ.
        let p = pauli_basis();
        let t = expand(&swap(2).scale(0.5), &p, &p).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 0.5 } else { 0.0 };
                assert!((t.coefficients[(i, j)] - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn expand_rejects_dimension() {
        let p = pauli_basis();
        assert!(expand(&HermitianOperator::identity(9), &p, &p).is_err());
    }

    #[test]
    fn round_trip_all_bases() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let bases = [
            (pauli_basis(), pauli_basis()),
            (wigner_qutrit_basis(), wigner_qutrit_basis()),
            (gellmann_basis(3).unwrap(), wigner_qutrit_basis()),
            (gellmann_basis(2).unwrap(), gellmann_basis(3).unwrap()),
        ];
        for (a, b) in &bases {
            for _ in 0..10 {
                let op = random_hermitian(&mut rng, a.dim() * b.dim());
                let back = reconstruct(&expand(&op, a, b).unwrap(), a, b).unwrap();
                assert!(back.max_abs_diff(&op) < 1e-10);
            }
        }
    }
}
