//! Dense complex linear algebra for small Hermitian operators.
//!
//! Everything here works on matrices of dimension at most [`MAX_DIM`]. The
//! eigensolver is a cyclic complex Jacobi method; at these sizes its cost is
//! negligible and it is accurate to a few ulps in the eigenvalues.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::Value;

use crate::error::{Error, Result};

/// Dense complex matrix.
pub type ComplexMatrix = DMatrix<Complex64>;

/// Largest operator dimension accepted by [`kron`] (a two-qutrit doubled space is 81).
pub const MAX_DIM: usize = 81;

/// Asymmetry above which a matrix is rejected instead of symmetrized.
pub const HERMITIAN_REJECT_TOL: f64 = 1e-8;

/// Default absolute tolerance for clustering eigenvalues into eigenspaces.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-9;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Which factor of a bipartite space an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subsystem {
    A,
    B,
}

/// A Hermitian operator on a `dim`-dimensional space.
///
/// Construction symmetrizes the input as `(M + M†)/2`, so the stored matrix is
/// Hermitian to the last bit.
#[derive(Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    /// Validate and symmetrize `m`. Rejects non-square input, non-finite
    /// entries, and asymmetry larger than [`HERMITIAN_REJECT_TOL`].
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::Argument("empty matrix".into()));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let asym = max_abs(&(&m - m.adjoint()));
        if asym > HERMITIAN_REJECT_TOL {
            return Err(Error::NotHermitian { asymmetry: asym });
        }
        Ok(Self::hermitian_part(&m))
    }

    /// `(M + M†)/2` without any tolerance check.
    pub fn hermitian_part(m: &ComplexMatrix) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "hermitian_part needs a square matrix");
        let matrix = (m + m.adjoint()).scale(0.5);
        Self { matrix }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(dim, dim),
        }
    }

    /// Real diagonal operator.
    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut matrix = ComplexMatrix::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            matrix[(i, i)] = Complex64::new(v, 0.0);
        }
        Self { matrix }
    }

    /// `|ψ⟩⟨ψ|` for the given (not necessarily normalized) vector.
    pub fn projector_onto(psi: &[Complex64]) -> Self {
        let n = psi.len();
        let matrix = ComplexMatrix::from_fn(n, n, |i, j| psi[i] * psi[j].conj());
        Self { matrix }
    }

    /// Row-major construction.
    pub fn from_rows(rows: &[&[Complex64]]) -> Result<Self> {
        let n = rows.len();
        let mut m = ComplexMatrix::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, z) in row.iter().enumerate() {
                m[(i, j)] = *z;
            }
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).sum()
    }

    /// Hilbert–Schmidt inner product `tr(AB)`, real for Hermitian arguments.
    pub fn hs_inner(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.matrix
            .iter()
            .zip(other.matrix.transpose().iter())
            .map(|(a, b)| (a * b).re)
            .sum()
    }

    /// `tr(A M)` for an arbitrary square matrix `M`.
    pub fn trace_with(&self, m: &ComplexMatrix) -> Complex64 {
        (&self.matrix * m).trace()
    }

    pub fn transpose(&self) -> Self {
        Self {
            matrix: self.matrix.transpose(),
        }
    }

    /// `U A U†`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Self {
        Self::hermitian_part(&(u * &self.matrix * u.adjoint()))
    }

    /// `A B A` (Hermitian whenever both are).
    pub fn sandwich(&self, middle: &Self) -> Self {
        Self::hermitian_part(&(&self.matrix * &middle.matrix * &self.matrix))
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            matrix: self.matrix.scale(factor),
        }
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs(&(&self.matrix - &other.matrix))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm()
    }

    /// Smallest eigenvalue.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let spec = eig_hermitian(self)?;
        Ok(*spec.eigenvalues.last().expect("non-empty spectrum"))
    }

    /// Serializes as nested `[re, im]` pairs, row-major.
    pub fn to_json(&self) -> Value {
        matrix_to_json(&self.matrix)
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        Self::new(matrix_from_json(value)?)
    }
}

impl fmt::Debug for HermitianOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HermitianOperator{}", self.matrix)
    }
}

impl Add for &HermitianOperator {
    type Output = HermitianOperator;
    fn add(self, rhs: Self) -> HermitianOperator {
        HermitianOperator {
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl Sub for &HermitianOperator {
    type Output = HermitianOperator;
    fn sub(self, rhs: Self) -> HermitianOperator {
        HermitianOperator {
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

impl Add for HermitianOperator {
    type Output = HermitianOperator;
    fn add(self, rhs: Self) -> HermitianOperator {
        &self + &rhs
    }
}

impl Sub for HermitianOperator {
    type Output = HermitianOperator;
    fn sub(self, rhs: Self) -> HermitianOperator {
        &self - &rhs
    }
}

impl Mul<f64> for &HermitianOperator {
    type Output = HermitianOperator;
    fn mul(self, rhs: f64) -> HermitianOperator {
        self.scale(rhs)
    }
}

impl Mul<f64> for HermitianOperator {
    type Output = HermitianOperator;
    fn mul(self, rhs: f64) -> HermitianOperator {
        self.scale(rhs)
    }
}

impl Neg for &HermitianOperator {
    type Output = HermitianOperator;
    fn neg(self) -> HermitianOperator {
        self.scale(-1.0)
    }
}

/// Eigendecomposition `M = V diag(λ) V†` with eigenvalues sorted descending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Unitary matrix whose columns are the eigenvectors.
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let mut scaled = self.eigenvectors.clone();
        for j in 0..n {
            let lam = self.eigenvalues[j];
            scaled.column_mut(j).scale_mut(lam);
        }
        scaled * self.eigenvectors.adjoint()
    }
}

fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi eigensolver for complex Hermitian matrices.
///
/// Each rotation first removes the phase of `a_pq` and then applies a real
/// Givens rotation that annihilates it. Sweeps stop once the off-diagonal
/// Frobenius norm drops below `1e-15·‖A‖_F`. The rotation budget is `100·n²`.
pub fn eig_hermitian(op: &HermitianOperator) -> Result<Spectrum> {
    let n = op.dim();
    let mut a = op.matrix.clone();
    let mut v = ComplexMatrix::identity(n, n);
    let fro = a.norm();
    let max_rotations = 100 * n * n;
    let mut rotations = 0usize;

    if fro > 0.0 {
        let target = 1e-15 * fro;
        loop {
            let off = off_diagonal_norm(&a);
            if off <= target {
                break;
            }
            if rotations >= max_rotations {
                return Err(Error::EigenConvergence {
                    rotations,
                    residual: off,
                });
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    let g = apq.norm();
                    if g <= f64::MIN_POSITIVE || g <= 1e-18 * fro {
                        continue;
                    }
                    rotations += 1;
                    let phase = apq / g;
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    let tau = (aqq - app) / (2.0 * g);
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    // U restricted to (p, q): [[c, s], [-s e^{-iφ}, c e^{-iφ}]]
                    let ph_conj = phase.conj();
                    let u_pp = Complex64::new(c, 0.0);
                    let u_pq = Complex64::new(s, 0.0);
                    let u_qp = ph_conj * (-s);
                    let u_qq = ph_conj * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = akp * u_pp + akq * u_qp;
                        a[(k, q)] = akp * u_pq + akq * u_qq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
                        a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
                    }
                    a[(p, q)] = ZERO;
                    a[(q, p)] = ZERO;
                    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * u_pp + vkq * u_qp;
                        v[(k, q)] = vkp * u_pq + vkq * u_qq;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Sum of absolute eigenvalues.
pub fn trace_norm(op: &HermitianOperator) -> Result<f64> {
    Ok(eig_hermitian(op)?.eigenvalues.iter().map(|l| l.abs()).sum())
}

/// Trace norm (sum of singular values) of an arbitrary matrix, computed from
/// the Hermitian dilation `[[0, M], [M†, 0]]` whose eigenvalues are `±σᵢ`.
pub fn trace_norm_general(m: &ComplexMatrix) -> Result<f64> {
    let (r, c) = m.shape();
    let n = r + c;
    let mut h = ComplexMatrix::zeros(n, n);
    h.view_mut((0, r), (r, c)).copy_from(m);
    h.view_mut((r, 0), (c, r)).copy_from(&m.adjoint());
    let spec = eig_hermitian(&HermitianOperator::hermitian_part(&h))?;
    Ok(0.5 * spec.eigenvalues.iter().map(|l| l.abs()).sum::<f64>())
}

/// Kronecker product `a ⊗ b`, with `(a⊗b)_{(i,k),(j,l)} = a_ij b_kl`.
pub fn kron(a: &HermitianOperator, b: &HermitianOperator) -> Result<HermitianOperator> {
    let dim = a.dim() * b.dim();
    if dim > MAX_DIM {
        return Err(Error::Capacity {
            what: "kron dimension",
            requested: dim,
            limit: MAX_DIM,
        });
    }
    Ok(HermitianOperator {
        matrix: a.matrix.kronecker(&b.matrix),
    })
}

fn check_bipartite(op_dim: usize, dims: (usize, usize)) -> Result<()> {
    if dims.0 == 0 || dims.1 == 0 || dims.0 * dims.1 != op_dim {
        return Err(Error::Argument(format!(
            "subsystem dims {}x{} do not factor operator dimension {}",
            dims.0, dims.1, op_dim
        )));
    }
    Ok(())
}

/// Partial trace of a general matrix on `dA ⊗ dB`, keeping `keep`.
pub fn partial_trace_matrix(m: &ComplexMatrix, dims: (usize, usize), keep: Subsystem) -> Result<ComplexMatrix> {
    check_bipartite(m.nrows(), dims)?;
    let (da, db) = dims;
    Ok(match keep {
        Subsystem::A => ComplexMatrix::from_fn(da, da, |i, j| (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()),
        Subsystem::B => ComplexMatrix::from_fn(db, db, |k, l| (0..da).map(|i| m[(i * db + k, i * db + l)]).sum()),
    })
}

pub fn partial_trace(op: &HermitianOperator, dims: (usize, usize), keep: Subsystem) -> Result<HermitianOperator> {
    Ok(HermitianOperator::hermitian_part(&partial_trace_matrix(
        &op.matrix, dims, keep,
    )?))
}

/// Partial transpose on the chosen factor of `dA ⊗ dB`.
pub fn partial_transpose(op: &HermitianOperator, dims: (usize, usize), side: Subsystem) -> Result<HermitianOperator> {
    check_bipartite(op.dim(), dims)?;
    let (da, db) = dims;
    let m = &op.matrix;
    let matrix = ComplexMatrix::from_fn(da * db, da * db, |r, c| {
        let (i, k) = (r / db, r % db);
        let (j, l) = (c / db, c % db);
        match side {
            Subsystem::A => m[(j * db + k, i * db + l)],
            Subsystem::B => m[(i * db + l, j * db + k)],
        }
    });
    Ok(HermitianOperator { matrix })
}

/// Spectral projectors, one per cluster of eigenvalues, ordered by
/// decreasing eigenvalue. Consecutive eigenvalues are merged while they lie
/// within `tol` of the first member of the cluster; the reported value is the
/// cluster mean.
pub fn eigprojectors(op: &HermitianOperator, tol: f64) -> Result<Vec<(f64, HermitianOperator)>> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Argument(format!("cluster tolerance must be > 0, got {tol}")));
    }
    let spec = eig_hermitian(op)?;
    let n = spec.eigenvalues.len();
    let mut out = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && spec.eigenvalues[start] - spec.eigenvalues[end] <= tol {
            end += 1;
        }
        let cols = spec.eigenvectors.columns(start, end - start);
        let proj = cols * cols.adjoint();
        let mean = spec.eigenvalues[start..end].iter().sum::<f64>() / (end - start) as f64;
        out.push((mean, HermitianOperator::hermitian_part(&proj)));
        start = end;
    }
    Ok(out)
}

/// Nested `[re, im]` pairs, row-major.
pub fn matrix_to_json(m: &ComplexMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| {
                Value::Array(
                    (0..m.ncols())
                        .map(|j| serde_json::json!([m[(i, j)].re, m[(i, j)].im]))
                        .collect(),
                )
            })
            .collect(),
    )
}

pub fn matrix_from_json(value: &Value) -> Result<ComplexMatrix> {
    let rows = value
        .as_array()
        .ok_or_else(|| Error::Parse("matrix must be an array of rows".into()))?;
    let nrows = rows.len();
    if nrows == 0 {
        return Err(Error::Parse("matrix has no rows".into()));
    }
    let mut m: Option<ComplexMatrix> = None;
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| Error::Parse(format!("row {i} is not an array")))?;
        let mm = m.get_or_insert_with(|| ComplexMatrix::zeros(nrows, row.len()));
        if row.len() != mm.ncols() {
            return Err(Error::Parse(format!(
                "row {i} has {} entries, expected {}",
                row.len(),
                mm.ncols()
            )));
        }
        for (j, entry) in row.iter().enumerate() {
            let pair = entry
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| Error::Parse(format!("entry ({i},{j}) is not an [re, im] pair")))?;
            let re = pair[0].as_f64();
            let im = pair[1].as_f64();
            match (re, im) {
                (Some(re), Some(im)) => mm[(i, j)] = Complex64::new(re, im),
                _ => return Err(Error::Parse(format!("entry ({i},{j}) is not numeric"))),
            }
        }
    }
    Ok(m.expect("at least one row"))
}
