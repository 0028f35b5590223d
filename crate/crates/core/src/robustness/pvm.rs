use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmat::{eig_hermitian, ComplexMatrix, HermitianOperator, Spectrum};

/// Tolerance for idempotence, orthogonality and completeness of a PVM.
pub const PVM_TOL: f64 = 1e-10;

/// Projection-valued measurement: orthogonal projectors summing to the identity.
#[derive(Debug, Clone)]
pub struct Pvm {
    dim: usize,
    projectors: Vec<HermitianOperator>,
}

impl Pvm {
    pub fn new(projectors: Vec<HermitianOperator>) -> Result<Self> {
        let dim = match projectors.first() {
            Some(p) => p.dim(),
            None => return Err(Error::InvalidMeasurement("a PVM needs at least one outcome".into())),
        };
        let mut total = ComplexMatrix::zeros(dim, dim);
        for (i, p) in projectors.iter().enumerate() {
            if p.dim() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    found: p.dim(),
                });
            }
            let sq = p.matrix() * p.matrix();
            let idem = (&sq - p.matrix()).map(|z| z.norm()).max();
            if idem > PVM_TOL {
                return Err(Error::InvalidMeasurement(format!(
                    "outcome {i} is not idempotent (defect {idem:.3e})"
                )));
            }
            for (j, q) in projectors.iter().enumerate().skip(i + 1) {
                let overlap = (p.matrix() * q.matrix()).map(|z| z.norm()).max();
                if overlap > PVM_TOL {
                    return Err(Error::InvalidMeasurement(format!(
                        "outcomes {i} and {j} are not orthogonal (overlap {overlap:.3e})"
                    )));
                }
            }
            total += p.matrix();
        }
        let defect = (total - ComplexMatrix::identity(dim, dim)).map(|z| z.norm()).max();
        if defect > PVM_TOL {
            return Err(Error::InvalidMeasurement(format!(
                "projectors do not sum to the identity (defect {defect:.3e})"
            )));
        }
        Ok(Pvm { dim, projectors })
    }

    /// Rank-one PVM onto the columns of a unitary.
    pub fn from_unitary(u: &ComplexMatrix) -> Result<Self> {
        if u.nrows() != u.ncols() {
            return Err(Error::Argument("basis matrix must be square".into()));
        }
        let projectors = (0..u.ncols())
            .map(|k| {
                let col: Vec<Complex64> = u.column(k).iter().copied().collect();
                HermitianOperator::projector_onto(&col)
            })
            .collect();
        Pvm::new(projectors)
    }

    /// Measurement in the computational basis.
    pub fn computational(dim: usize) -> Self {
        let projectors = (0..dim)
            .map(|k| {
                let mut v = vec![0.0; dim];
                v[k] = 1.0;
                HermitianOperator::diagonal(&v)
            })
            .collect();
        Pvm { dim, projectors }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcomes(&self) -> usize {
        self.projectors.len()
    }

    pub fn projectors(&self) -> &[HermitianOperator] {
        &self.projectors
    }
}

/// Positive operator-valued measurement with Lüders instrument `√M ρ √M`.
#[derive(Debug, Clone)]
pub struct Povm {
    dim: usize,
    effects: Vec<HermitianOperator>,
    roots: Vec<HermitianOperator>,
}

impl Povm {
    /// Effects must be positive semidefinite and sum to the identity, both to [`PVM_TOL`].
    pub fn new(effects: Vec<HermitianOperator>) -> Result<Self> {
        let dim = match effects.first() {
            Some(e) => e.dim(),
            None => return Err(Error::InvalidMeasurement("a POVM needs at least one outcome".into())),
        };
        let mut total = ComplexMatrix::zeros(dim, dim);
        let mut roots = Vec::with_capacity(effects.len());
        for (i, e) in effects.iter().enumerate() {
            if e.dim() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    found: e.dim(),
                });
            }
            let spec = eig_hermitian(e)?;
            let min = spec.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
            if min < -PVM_TOL {
                return Err(Error::InvalidMeasurement(format!(
                    "effect {i} is not positive semidefinite (eigenvalue {min:.3e})"
                )));
            }
            let root = Spectrum {
                eigenvalues: spec.eigenvalues.iter().map(|v| v.max(0.0).sqrt()).collect(),
                eigenvectors: spec.eigenvectors,
            };
            roots.push(HermitianOperator::hermitian_part(&root.reconstruct()));
            total += e.matrix();
        }
        let defect = (total - ComplexMatrix::identity(dim, dim)).map(|z| z.norm()).max();
        if defect > PVM_TOL {
            return Err(Error::InvalidMeasurement(format!(
                "effects do not sum to the identity (defect {defect:.3e})"
            )));
        }
        Ok(Povm { dim, effects, roots })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn effects(&self) -> &[HermitianOperator] {
        &self.effects
    }

    /// `√M` for each effect.
    pub fn roots(&self) -> &[HermitianOperator] {
        &self.roots
    }
}

impl From<&Pvm> for Povm {
    fn from(p: &Pvm) -> Self {
        Povm {
            dim: p.dim,
            effects: p.projectors.clone(),
            roots: p.projectors.clone(),
        }
    }
}

fn basis_unitary(d: usize, entry: impl Fn(usize, usize) -> Complex64) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, entry)
}

/// The first `count` of a complete set of mutually unbiased bases.
///
/// Order for `d = 2`: Z, X, Y eigenbases. For `d = 3`: Z, then the
/// eigenbases of X, XZ and XZ², written as `ω^{k j² + m j}/√3`.
pub fn mub_pvms(d: usize, count: usize) -> Result<Vec<Pvm>> {
    if !(d == 2 || d == 3) {
        return Err(Error::Argument(format!(
            "mutually unbiased bases are provided for d = 2 or 3, not {d}"
        )));
    }
    if count == 0 || count > d + 1 {
        return Err(Error::Argument(format!(
            "between 1 and {} mutually unbiased bases exist for d = {d}, requested {count}",
            d + 1
        )));
    }
    let mut out = vec![Pvm::computational(d)];
    for k in 1..count {
        let u = if d == 2 {
            let s = FRAC_1_SQRT_2;
            let phase = if k == 1 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 1.0)
            };
            basis_unitary(2, |j, m| match (j, m) {
                (0, _) => Complex64::new(s, 0.0),
                (1, 0) => phase * s,
                _ => -phase * s,
            })
        } else {
            let q = (k - 1) as f64;
            let norm = 1.0 / 3f64.sqrt();
            basis_unitary(3, |j, m| {
                let (j, m) = (j as f64, m as f64);
                Complex64::from_polar(norm, 2.0 * PI * (q * j * j + m * j) / 3.0)
            })
        };
        out.push(Pvm::from_unitary(&u)?);
    }
    Ok(out)
}
