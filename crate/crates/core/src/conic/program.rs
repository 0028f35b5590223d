use std::f64::consts::SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmat::{partial_transpose, ComplexMatrix, HermitianOperator, Subsystem};

/// One block of the product cone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cone {
    /// Complex Hermitian positive semidefinite `n × n` matrices.
    Psd(usize),
    /// The nonnegative orthant of dimension `n`.
    Nonneg(usize),
}

impl Cone {
    /// Barrier order (matrix size or orthant dimension).
    pub fn order(&self) -> usize {
        match *self {
            Cone::Psd(n) | Cone::Nonneg(n) => n,
        }
    }

    /// Number of real coordinates.
    pub fn len(&self) -> usize {
        match *self {
            Cone::Psd(n) => n * n,
            Cone::Nonneg(n) => n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.order() == 0
    }
}

/// Real coordinates of a Hermitian matrix: the diagonal, then `√2·Re` and
/// `√2·Im` of each upper-triangular entry in row-major order. The map is an
/// isometry from the trace inner product `Re tr(AB)` to the Euclidean one.
pub fn svec(m: &ComplexMatrix) -> Vec<f64> {
    let mut out = vec![0.0; m.nrows() * m.nrows()];
    svec_into(m, &mut out);
    out
}

/// [`svec`] of the Hermitian part of `m`, written into `out`.
pub fn svec_into(m: &ComplexMatrix, out: &mut [f64]) {
    let n = m.nrows();
    debug_assert_eq!(out.len(), n * n);
    for i in 0..n {
        out[i] = m[(i, i)].re;
    }
    let mut k = n;
    for i in 0..n {
        for j in i + 1..n {
            let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            out[k] = SQRT_2 * z.re;
            out[k + 1] = SQRT_2 * z.im;
            k += 2;
        }
    }
}

/// Inverse of [`svec`].
pub fn smat(v: &[f64], n: usize) -> ComplexMatrix {
    debug_assert_eq!(v.len(), n * n);
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = Complex64::from(v[i]);
    }
    let mut k = n;
    for i in 0..n {
        for j in i + 1..n {
            let z = Complex64::new(v[k], v[k + 1]) / SQRT_2;
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            k += 2;
        }
    }
    m
}

/// Linear map applied to a PSD block inside a matrix equality constraint.
/// Both variants are self-adjoint for the trace inner product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockMap {
    Identity,
    PartialTranspose { dims: (usize, usize), side: Subsystem },
}

impl BlockMap {
    fn apply(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        match *self {
            BlockMap::Identity => Ok(m.clone()),
            BlockMap::PartialTranspose { dims, side } => {
                Ok(partial_transpose(&HermitianOperator::hermitian_part(m), dims, side)?.into_matrix())
            }
        }
    }
}

/// A block of a primal or dual solution.
#[derive(Debug, Clone)]
pub enum BlockValue {
    Psd(HermitianOperator),
    Nonneg(Vec<f64>),
}

impl BlockValue {
    pub fn as_psd(&self) -> Option<&HermitianOperator> {
        match self {
            BlockValue::Psd(h) => Some(h),
            BlockValue::Nonneg(_) => None,
        }
    }

    pub fn as_nonneg(&self) -> Option<&[f64]> {
        match self {
            BlockValue::Nonneg(v) => Some(v),
            BlockValue::Psd(_) => None,
        }
    }

    /// Trace of a PSD block or sum of an orthant block.
    pub fn trace(&self) -> f64 {
        match self {
            BlockValue::Psd(h) => h.trace(),
            BlockValue::Nonneg(v) => v.iter().sum(),
        }
    }

    pub(crate) fn from_coords(cone: Cone, coords: &[f64]) -> Self {
        match cone {
            Cone::Psd(n) => BlockValue::Psd(HermitianOperator::hermitian_part(&smat(coords, n))),
            Cone::Nonneg(_) => BlockValue::Nonneg(coords.to_vec()),
        }
    }
}

/// A block-structured conic program in primal standard form
///
/// ```text
/// minimize   ⟨c, x⟩
/// subject to ⟨aᵢ, x⟩ = bᵢ,   x ∈ K₁ × … × K_p
/// ```
///
/// with every block stored in [`svec`] coordinates.
#[derive(Debug, Clone, Default)]
pub struct ConicProgram {
    cones: Vec<Cone>,
    offsets: Vec<usize>,
    objective: Vec<f64>,
    rows: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
}

impl ConicProgram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append a block and return its index.
    pub fn add_block(&mut self, cone: Cone) -> usize {
        self.offsets.push(self.objective.len());
        self.objective.extend(std::iter::repeat_n(0.0, cone.len()));
        self.cones.push(cone);
        self.cones.len() - 1
    }

    pub fn cones(&self) -> &[Cone] {
        &self.cones
    }

    pub fn offset(&self, block: usize) -> usize {
        self.offsets[block]
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.rows.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    /// Sum of the barrier orders.
    pub fn barrier_order(&self) -> usize {
        self.cones.iter().map(Cone::order).sum()
    }

    fn coord(&self, block: usize, local: usize) -> Result<usize> {
        let cone = self
            .cones
            .get(block)
            .ok_or_else(|| Error::Argument(format!("block {block} does not exist")))?;
        if local >= cone.len() {
            return Err(Error::Argument(format!(
                "coordinate {local} out of range for block {block} ({cone:?})"
            )));
        }
        Ok(self.offsets[block] + local)
    }

    /// Add `value` to the objective coefficient of one coordinate.
    pub fn add_objective(&mut self, block: usize, local: usize, value: f64) -> Result<()> {
        let k = self.coord(block, local)?;
        self.objective[k] += value;
        Ok(())
    }

    /// Add `coef · tr(X)` (or `coef · Σx`) for one block.
    pub fn add_objective_trace(&mut self, block: usize, coef: f64) -> Result<()> {
        let n = self.cones[block].order();
        let off = self.coord(block, 0)?;
        for i in 0..n {
            self.objective[off + i] += coef;
        }
        Ok(())
    }

    /// Add `⟨m, X⟩` for a PSD block.
    pub fn add_objective_matrix(&mut self, block: usize, m: &ComplexMatrix) -> Result<()> {
        match self.cones.get(block) {
            Some(Cone::Psd(n)) if *n == m.nrows() => {}
            _ => {
                return Err(Error::Argument(format!(
                    "block {block} is not a PSD block of size {}",
                    m.nrows()
                )))
            }
        }
        let off = self.offsets[block];
        for (k, v) in svec(m).into_iter().enumerate() {
            self.objective[off + k] += v;
        }
        Ok(())
    }

    /// Add one scalar equality `Σ coef · x[block][local] = rhs`.
    pub fn add_constraint(&mut self, terms: &[(usize, usize, f64)], rhs: f64) -> Result<()> {
        let mut row = Vec::with_capacity(terms.len());
        for &(block, local, coef) in terms {
            row.push((self.coord(block, local)?, coef));
        }
        self.push_row(row, rhs);
        Ok(())
    }

    fn push_row(&mut self, mut row: Vec<(usize, f64)>, rhs: f64) {
        row.sort_by_key(|&(k, _)| k);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
        for (k, v) in row {
            match merged.last_mut() {
                Some((lk, lv)) if *lk == k => *lv += v,
                _ => merged.push((k, v)),
            }
        }
        merged.retain(|&(_, v)| v != 0.0);
        self.rows.push(merged);
        self.rhs.push(rhs);
    }

    /// Add the Hermitian matrix equality `Σ coef · map(X_block) = rhs`, one
    /// scalar row per [`svec`] coordinate of the `n × n` target space.
    pub fn add_matrix_equality(&mut self, terms: &[(usize, f64, BlockMap)], rhs: &ComplexMatrix) -> Result<()> {
        let n = rhs.nrows();
        for &(block, _, _) in terms {
            match self.cones.get(block) {
                Some(Cone::Psd(k)) if *k == n => {}
                other => {
                    return Err(Error::Argument(format!(
                        "matrix equality of size {n} cannot use block {block} ({other:?})"
                    )))
                }
            }
        }
        let rhs_coords = svec(rhs);
        let mut unit = vec![0.0; n * n];
        for k in 0..n * n {
            unit[k] = 1.0;
            let e = smat(&unit, n);
            unit[k] = 0.0;
            let mut row = Vec::new();
            for &(block, coef, map) in terms {
                let off = self.offsets[block];
                for (j, v) in svec(&map.apply(&e)?).into_iter().enumerate() {
                    if v.abs() > 1e-15 {
                        row.push((off + j, coef * v));
                    }
                }
            }
            self.push_row(row, rhs_coords[k]);
        }
        Ok(())
    }

    /// Reject non-finite data.
    pub fn validate(&self) -> Result<()> {
        let finite = self.objective.iter().all(|v| v.is_finite())
            && self.rhs.iter().all(|v| v.is_finite())
            && self.rows.iter().flatten().all(|(_, v)| v.is_finite());
        if !finite {
            return Err(Error::NonFinite);
        }
        if self.cones.is_empty() {
            return Err(Error::Argument("program has no blocks".into()));
        }
        Ok(())
    }

    /// `⟨c, x⟩` for a full coordinate vector.
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Split a coordinate vector into per-block values.
    pub fn split(&self, x: &[f64]) -> Vec<BlockValue> {
        self.cones
            .iter()
            .zip(&self.offsets)
            .map(|(&cone, &off)| BlockValue::from_coords(cone, &x[off..off + cone.len()]))
            .collect()
    }

    pub(crate) fn from_parts(
        cones: Vec<Cone>,
        objective: Vec<f64>,
        rows: Vec<Vec<(usize, f64)>>,
        rhs: Vec<f64>,
    ) -> Result<Self> {
        let mut p = ConicProgram::new();
        for cone in cones {
            p.add_block(cone);
        }
        if objective.len() != p.num_vars() {
            return Err(Error::Parse(format!(
                "objective has {} entries, blocks need {}",
                objective.len(),
                p.num_vars()
            )));
        }
        p.objective = objective;
        for (row, b) in rows.into_iter().zip(rhs) {
            if let Some(&(k, _)) = row.iter().find(|(k, _)| *k >= p.num_vars()) {
                return Err(Error::Parse(format!(
                    "row refers to coordinate {k} beyond {}",
                    p.num_vars()
                )));
            }
            p.push_row(row, b);
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::random_hermitian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn svec_is_isometric() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..6 {
            let a = random_hermitian(&mut rng, n);
            let b = random_hermitian(&mut rng, n);
            let dot: f64 = svec(a.matrix()).iter().zip(svec(b.matrix())).map(|(x, y)| x * y).sum();
            assert!((dot - a.hs_inner(&b)).abs() < 1e-12);
            let back = smat(&svec(a.matrix()), n);
            assert!((back - a.matrix()).map(|z| z.norm()).max() < 1e-15);
        }
    }

    #[test]
    fn matrix_equality_rows() {
        let mut p = ConicProgram::new();
        let x = p.add_block(Cone::Psd(2));
        let y = p.add_block(Cone::Psd(2));
        let rhs = ComplexMatrix::identity(2, 2);
        p.add_matrix_equality(&[(x, 1.0, BlockMap::Identity), (y, -1.0, BlockMap::Identity)], &rhs)
            .unwrap();
        assert_eq!(p.num_constraints(), 4);
        assert_eq!(p.rows()[0], vec![(0, 1.0), (4, -1.0)]);
        assert_eq!(p.rhs(), &[1.0, 1.0, 0.0, 0.0]);
        assert!(p
            .add_matrix_equality(&[(x, 1.0, BlockMap::Identity)], &ComplexMatrix::identity(3, 3))
            .is_err());
    }

    #[test]
    fn bad_coordinates_rejected() {
        let mut p = ConicProgram::new();
        let b = p.add_block(Cone::Nonneg(2));
        assert!(p.add_constraint(&[(b, 2, 1.0)], 0.0).is_err());
        assert!(p.add_constraint(&[(1, 0, 1.0)], 0.0).is_err());
        p.add_constraint(&[(b, 0, f64::NAN)], 0.0).unwrap();
        assert!(p.validate().is_err());
    }
}
