use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::program::{smat, svec_into, BlockValue, Cone, ConicProgram};
use crate::error::{Error, Result};
use crate::qmat::{eig_hermitian, ComplexMatrix, HermitianOperator};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Relative primal and dual residual tolerance.
    pub feas_tol: f64,
    /// Relative duality gap tolerance.
    pub gap_tol: f64,
    pub max_iter: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
    /// Relative threshold below which a constraint row is treated as a
    /// linear combination of earlier rows.
    pub presolve_tol: f64,
    /// Ratio that certifies primal or dual infeasibility from a diverging iterate.
    pub infeasibility_ratio: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            feas_tol: 1e-8,
            gap_tol: 1e-8,
            max_iter: 200,
            step_fraction: 0.98,
            presolve_tol: 1e-10,
            infeasibility_ratio: 1e8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    /// The primal constraints cannot be met.
    Infeasible,
    /// The primal objective is unbounded below.
    DualInfeasible,
    MaxIter,
}

#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub status: SolveStatus,
    pub primal: Vec<BlockValue>,
    /// Multipliers `y`, one per constraint of the input program.
    pub dual: Vec<f64>,
    /// Dual slack `S = C − Σ yᵢAᵢ`.
    pub dual_slack: Vec<BlockValue>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `|pobj − dobj| / (1 + |pobj| + |dobj|)`.
    pub gap: f64,
    /// `‖b − Ax‖ / (1 + ‖b‖)`.
    pub primal_residual: f64,
    /// `‖c − Aᵀy − s‖ / (1 + ‖c‖)`.
    pub dual_residual: f64,
    pub iterations: usize,
    /// Constraints removed as linearly dependent before solving.
    pub dropped_rows: usize,
    pub note: Option<String>,
}

impl ConicSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Return `self` if optimal, otherwise an error carrying the status.
    pub fn require_optimal(&self) -> Result<&Self> {
        if self.is_optimal() {
            Ok(self)
        } else {
            Err(Error::Solver {
                status: self.status,
                detail: format!(
                    "after {} iterations: gap {:.2e}, primal residual {:.2e}, dual residual {:.2e}",
                    self.iterations, self.gap, self.primal_residual, self.dual_residual
                ),
            })
        }
    }
}

/// Dual objective of an optimal solution.
pub fn dual_certificate(sol: &ConicSolution) -> Result<f64> {
    sol.require_optimal().map(|s| s.dual_objective)
}

/// Dense constraint data after removal of dependent rows.
struct Reduced {
    a: DMatrix<f64>,
    b: DVector<f64>,
    kept: Vec<usize>,
}

fn presolve(p: &ConicProgram, tol: f64) -> std::result::Result<Reduced, usize> {
    let n = p.num_vars();
    let bmax = p.rhs().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut basis: Vec<(DVector<f64>, f64)> = Vec::new();
    let mut kept = Vec::new();
    for (i, row) in p.rows().iter().enumerate() {
        let mut v = DVector::zeros(n);
        for &(k, c) in row {
            v[k] = c;
        }
        let norm0 = v.norm();
        let mut beta = p.rhs()[i];
        for _ in 0..2 {
            for (q, qb) in &basis {
                let c = q.dot(&v);
                v.axpy(-c, q, 1.0);
                beta -= c * qb;
            }
        }
        let norm = v.norm();
        if norm > tol * norm0.max(1.0) && norm0 > 0.0 {
            basis.push((v / norm, beta / norm));
            kept.push(i);
        } else if beta.abs() > 1e3 * tol * (1.0 + bmax) {
            return Err(i);
        }
    }
    let m = kept.len();
    let mut a = DMatrix::zeros(m, n);
    let mut b = DVector::zeros(m);
    for (r, &i) in kept.iter().enumerate() {
        for &(k, c) in &p.rows()[i] {
            a[(r, k)] = c;
        }
        b[r] = p.rhs()[i];
    }
    Ok(Reduced { a, b, kept })
}

/// A block quantity in scaled coordinates: diagonal for the orthant.
enum Hat {
    Diag(Vec<f64>),
    Full(ComplexMatrix),
}

impl Hat {
    fn complementarity(d: &[f64], target: f64, x: &Hat, s: &Hat) -> Hat {
        match (x, s) {
            (Hat::Diag(x), Hat::Diag(s)) => Hat::Diag(
                d.iter()
                    .zip(x.iter().zip(s))
                    .map(|(di, (xi, si))| 2.0 * (target - di * di) - 2.0 * xi * si)
                    .collect(),
            ),
            (Hat::Full(xh), Hat::Full(sh)) => {
                let cross = xh * sh + sh * xh;
                Hat::Full(ComplexMatrix::from_fn(d.len(), d.len(), |i, j| {
                    let diag = if i == j {
                        Complex64::from(2.0 * (target - d[i] * d[i]))
                    } else {
                        Complex64::from(0.0)
                    };
                    diag - cross[(i, j)]
                }))
            }
            _ => unreachable!("scaled quantities of one block share a representation"),
        }
    }
}

/// Nesterov-Todd scaling of one block: `W = GG†` with `W S W = X`,
/// `G⁻¹ X G⁻† = G† S G = diag(d)`. For an orthant block `g` holds the
/// diagonal of `W`, `√(x/s)`.
enum Scaling {
    Psd {
        g: ComplexMatrix,
        ginv: ComplexMatrix,
        w: ComplexMatrix,
        d: Vec<f64>,
    },
    Lp {
        g: Vec<f64>,
        d: Vec<f64>,
    },
}

fn hermitian_eig(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let spec = eig_hermitian(&HermitianOperator::hermitian_part(m))?;
    Ok((spec.eigenvalues, spec.eigenvectors))
}

fn numerical(detail: impl Into<String>, condition: f64) -> Error {
    Error::Numerical {
        detail: detail.into(),
        condition,
    }
}

impl Scaling {
    fn new(cone: Cone, x: &[f64], s: &[f64]) -> Result<Self> {
        match cone {
            Cone::Nonneg(_) => {
                if x.iter().chain(s).any(|v| v.is_nan() || *v <= 0.0) {
                    return Err(numerical("iterate left the nonnegative orthant", f64::INFINITY));
                }
                Ok(Scaling::Lp {
                    g: x.iter().zip(s).map(|(a, b)| (a / b).sqrt()).collect(),
                    d: x.iter().zip(s).map(|(a, b)| (a * b).sqrt()).collect(),
                })
            }
            Cone::Psd(n) => {
                let xm = smat(x, n);
                let sm = smat(s, n);
                let chol = nalgebra::Cholesky::new(xm)
                    .ok_or_else(|| numerical("primal block lost positive definiteness", f64::INFINITY))?;
                let l = chol.l();
                let (lam, u) = hermitian_eig(&(l.adjoint() * &sm * &l))?;
                let lam_min = lam.iter().cloned().fold(f64::INFINITY, f64::min);
                if lam_min.is_nan() || lam_min <= 0.0 {
                    return Err(numerical("dual block lost positive definiteness", f64::INFINITY));
                }
                let q: Vec<f64> = lam.iter().map(|v| v.powf(-0.25)).collect();
                let mut lu = &l * &u;
                for (j, qj) in q.iter().enumerate() {
                    lu.column_mut(j).scale_mut(*qj);
                }
                let g = lu;
                let linv = l
                    .solve_lower_triangular(&ComplexMatrix::identity(n, n))
                    .ok_or_else(|| numerical("singular Cholesky factor", f64::INFINITY))?;
                let mut ginv = u.adjoint() * linv;
                for (i, qi) in q.iter().enumerate() {
                    ginv.row_mut(i).scale_mut(1.0 / qi);
                }
                let w = &g * g.adjoint();
                Ok(Scaling::Psd {
                    g,
                    ginv,
                    w,
                    d: lam.iter().map(|v| v.sqrt()).collect(),
                })
            }
        }
    }

    fn d(&self) -> &[f64] {
        match self {
            Scaling::Psd { d, .. } | Scaling::Lp { d, .. } => d,
        }
    }

    /// `W V W` in coordinates.
    fn apply_w(&self, v: &[f64], out: &mut [f64]) {
        match self {
            Scaling::Lp { g, .. } => {
                for i in 0..v.len() {
                    out[i] = g[i] * g[i] * v[i];
                }
            }
            Scaling::Psd { w, d, .. } => {
                let m = smat(v, d.len());
                svec_into(&(w * m * w), out);
            }
        }
    }

    /// Scaled primal direction `G⁻¹ ΔX G⁻†`.
    fn scale_x(&self, v: &[f64]) -> Hat {
        match self {
            Scaling::Lp { g, .. } => Hat::Diag(v.iter().zip(g).map(|(a, b)| a / b).collect()),
            Scaling::Psd { ginv, d, .. } => Hat::Full(ginv * smat(v, d.len()) * ginv.adjoint()),
        }
    }

    /// Scaled dual direction `G† ΔS G`.
    fn scale_s(&self, v: &[f64]) -> Hat {
        match self {
            Scaling::Lp { g, .. } => Hat::Diag(v.iter().zip(g).map(|(a, b)| a * b).collect()),
            Scaling::Psd { g, d, .. } => Hat::Full(g.adjoint() * smat(v, d.len()) * g),
        }
    }

    /// Scaled complementarity residual for the affine predictor.
    fn affine_target(&self) -> Hat {
        match self {
            Scaling::Lp { d, .. } => Hat::Diag(d.iter().map(|v| -2.0 * v * v).collect()),
            Scaling::Psd { d, .. } => Hat::Full(ComplexMatrix::from_diagonal(&DVector::from_iterator(
                d.len(),
                d.iter().map(|v| Complex64::from(-2.0 * v * v)),
            ))),
        }
    }

    /// `R = G (H ∘ [1/(dᵢ+dⱼ)]) G†`, the primal right-hand side of the scaled
    /// complementarity equation `D(ΔX̂+ΔŜ) + (ΔX̂+ΔŜ)D = H`.
    fn rc(&self, h: &Hat, out: &mut [f64]) {
        let d = self.d();
        let n = d.len();
        match (self, h) {
            (Scaling::Lp { g, .. }, Hat::Diag(h)) => {
                for i in 0..n {
                    out[i] = g[i] * h[i] / (2.0 * d[i]);
                }
            }
            (Scaling::Psd { g, .. }, Hat::Full(h)) => {
                let l = ComplexMatrix::from_fn(n, n, |i, j| h[(i, j)] / (d[i] + d[j]));
                svec_into(&(g * l * g.adjoint()), out);
            }
            _ => unreachable!("scaled quantities of one block share a representation"),
        }
    }

    /// Largest `α` with `D + α Δ̂ ⪰ 0`, or infinity.
    fn max_step(&self, delta_hat: &Hat) -> Result<f64> {
        let d = self.d();
        let n = d.len();
        let min = match delta_hat {
            Hat::Diag(h) => (0..n).map(|i| h[i] / d[i]).fold(f64::INFINITY, f64::min),
            Hat::Full(delta_hat) => {
                let m = ComplexMatrix::from_fn(n, n, |i, j| delta_hat[(i, j)] / (d[i] * d[j]).sqrt());
                let (lam, _) = hermitian_eig(&m)?;
                lam.iter().cloned().fold(f64::INFINITY, f64::min)
            }
        };
        Ok(if min < 0.0 { -1.0 / min } else { f64::INFINITY })
    }
}

/// Per-block nonzero constraint rows of the reduced matrix.
struct Sparsity {
    rows_of_block: Vec<Vec<usize>>,
    rows_of_col: Vec<Vec<usize>>,
}

fn sparsity(a: &DMatrix<f64>, cones: &[Cone], offsets: &[usize]) -> Sparsity {
    let (m, n) = a.shape();
    let rows_of_col: Vec<Vec<usize>> = (0..n).map(|k| (0..m).filter(|&i| a[(i, k)] != 0.0).collect()).collect();
    let rows_of_block = cones
        .iter()
        .zip(offsets)
        .map(|(cone, &off)| {
            let mut hit = vec![false; m];
            for k in off..off + cone.len() {
                for &i in &rows_of_col[k] {
                    hit[i] = true;
                }
            }
            (0..m).filter(|&i| hit[i]).collect()
        })
        .collect();
    Sparsity {
        rows_of_block,
        rows_of_col,
    }
}

struct Work<'a> {
    cones: &'a [Cone],
    offsets: &'a [usize],
    a: &'a DMatrix<f64>,
    sp: &'a Sparsity,
}

impl Work<'_> {
    fn schur(&self, scal: &[Scaling]) -> DMatrix<f64> {
        let m = self.a.nrows();
        let mut mm = DMatrix::<f64>::zeros(m, m);
        for (k, (cone, sc)) in self.cones.iter().zip(scal).enumerate() {
            let off = self.offsets[k];
            let len = cone.len();
            match sc {
                Scaling::Lp { g, .. } => {
                    for c in 0..len {
                        let w = g[c] * g[c];
                        let rows = &self.sp.rows_of_col[off + c];
                        for &i in rows {
                            let ai = self.a[(i, off + c)] * w;
                            for &j in rows {
                                mm[(i, j)] += ai * self.a[(j, off + c)];
                            }
                        }
                    }
                }
                Scaling::Psd { .. } => {
                    let rows = &self.sp.rows_of_block[k];
                    let mut col = vec![0.0; len];
                    let mut aj = vec![0.0; len];
                    for (jj, &j) in rows.iter().enumerate() {
                        for c in 0..len {
                            aj[c] = self.a[(j, off + c)];
                        }
                        sc.apply_w(&aj, &mut col);
                        for &i in &rows[jj..] {
                            let mut acc = 0.0;
                            for c in 0..len {
                                acc += self.a[(i, off + c)] * col[c];
                            }
                            mm[(i, j)] += acc;
                            if i != j {
                                mm[(j, i)] += acc;
                            }
                        }
                    }
                }
            }
        }
        mm
    }

    fn blockwise(&self, v: &[f64], f: impl Fn(usize, &[f64], &mut [f64])) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for (k, cone) in self.cones.iter().enumerate() {
            let r = self.offsets[k]..self.offsets[k] + cone.len();
            f(k, &v[r.clone()], &mut out[r]);
        }
        out
    }
}

struct Factored {
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

fn factor(mut mm: DMatrix<f64>) -> Result<Factored> {
    let m = mm.nrows();
    let dmax = (0..m).map(|i| mm[(i, i)].abs()).fold(0.0f64, f64::max).max(1e-300);
    let mut shift = 0.0;
    for attempt in 0..4 {
        if let Some(chol) = nalgebra::Cholesky::new(mm.clone()) {
            return Ok(Factored { chol });
        }
        let next = dmax * 1e-14 * 100f64.powi(attempt);
        for i in 0..m {
            mm[(i, i)] += next - shift;
        }
        shift = next;
    }
    let eig = nalgebra::SymmetricEigen::new(mm).eigenvalues;
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), v| {
        (lo.min(v.abs()), hi.max(v.abs()))
    });
    Err(numerical("Schur complement is not positive definite", hi / lo))
}

/// Solve a conic program with an infeasible-start primal-dual interior-point
/// method using Nesterov-Todd scaling and Mehrotra's predictor-corrector.
pub fn solve(p: &ConicProgram, opts: &SolverOptions) -> Result<ConicSolution> {
    p.validate()?;
    let cones = p.cones();
    let offsets: Vec<usize> = (0..cones.len()).map(|k| p.offset(k)).collect();
    let n = p.num_vars();
    let nu = p.barrier_order() as f64;
    let c = DVector::from_column_slice(p.objective());

    let reduced = match presolve(p, opts.presolve_tol) {
        Ok(r) => r,
        Err(row) => {
            return Ok(ConicSolution {
                status: SolveStatus::Infeasible,
                primal: p.split(&vec![0.0; n]),
                dual: vec![0.0; p.num_constraints()],
                dual_slack: p.split(&vec![0.0; n]),
                primal_objective: f64::INFINITY,
                dual_objective: f64::INFINITY,
                gap: f64::NAN,
                primal_residual: f64::INFINITY,
                dual_residual: f64::NAN,
                iterations: 0,
                dropped_rows: 0,
                note: Some(format!("constraint {row} contradicts earlier constraints")),
            })
        }
    };
    let a = &reduced.a;
    let b = &reduced.b;
    let m = a.nrows();
    let sp = sparsity(a, cones, &offsets);
    let work = Work {
        cones,
        offsets: &offsets,
        a,
        sp: &sp,
    };

    // Infeasible start scaled to the data.
    let mut x = DVector::zeros(n);
    let mut s = DVector::zeros(n);
    let mut y = DVector::zeros(m);
    for (k, cone) in cones.iter().enumerate() {
        let off = offsets[k];
        let len = cone.len();
        let ord = cone.order() as f64;
        let mut amax = 0.0f64;
        let mut ratio = 0.0f64;
        for &i in &sp.rows_of_block[k] {
            let an = a.row(i).columns(off, len).norm();
            amax = amax.max(an);
            ratio = ratio.max((1.0 + b[i].abs()) / (1.0 + an));
        }
        let cn = c.rows(off, len).norm();
        let xi = 10f64.max(ord.sqrt()).max(ord * ratio);
        let eta = 10f64.max(ord.sqrt()).max(amax.max(cn));
        match cone {
            Cone::Psd(nn) => {
                for i in 0..*nn {
                    x[off + i] = xi;
                    s[off + i] = eta;
                }
            }
            Cone::Nonneg(nn) => {
                for i in 0..*nn {
                    x[off + i] = xi;
                    s[off + i] = eta;
                }
            }
        }
    }

    let bnorm = b.norm();
    let cnorm = c.norm();
    let mut status = SolveStatus::MaxIter;
    let mut iterations = 0;
    let (mut pres, mut dres, mut gap);
    loop {
        let rp = b - a * &x;
        let rd = &c - a.transpose() * &y - &s;
        let pobj = c.dot(&x);
        let dobj = b.dot(&y);
        pres = rp.norm() / (1.0 + bnorm);
        dres = rd.norm() / (1.0 + cnorm);
        let xs = x.dot(&s);
        gap = (pobj - dobj).abs().max(xs.abs()) / (1.0 + pobj.abs() + dobj.abs());
        if pres <= opts.feas_tol && dres <= opts.feas_tol && gap <= opts.gap_tol {
            status = SolveStatus::Optimal;
            break;
        }
        let aty_s = (a.transpose() * &y + &s).norm();
        if dobj > 0.0 && dobj > opts.infeasibility_ratio * aty_s {
            status = SolveStatus::Infeasible;
            break;
        }
        let ax = (a * &x).norm();
        if pobj < 0.0 && -pobj > opts.infeasibility_ratio * ax {
            status = SolveStatus::DualInfeasible;
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }
        iterations += 1;

        let mu = xs / nu;
        let scal: Vec<Scaling> = cones
            .iter()
            .enumerate()
            .map(|(k, cone)| {
                let r = offsets[k]..offsets[k] + cone.len();
                Scaling::new(*cone, &x.as_slice()[r.clone()], &s.as_slice()[r])
            })
            .collect::<Result<_>>()?;
        let fac = factor(work.schur(&scal))?;
        let wrdw = work.blockwise(rd.as_slice(), |k, v, out| scal[k].apply_w(v, out));
        let base_rhs = &rp + a * DVector::from_vec(wrdw);

        let direction = |hs: &[Hat]| -> (DVector<f64>, DVector<f64>, DVector<f64>) {
            let rc = DVector::from_vec(work.blockwise(&vec![0.0; n], |k, _, out| scal[k].rc(&hs[k], out)));
            let rhs = &base_rhs - a * &rc;
            let dy = fac.chol.solve(&rhs);
            let ds = &rd - a.transpose() * &dy;
            let wdsw = work.blockwise(ds.as_slice(), |k, v, out| scal[k].apply_w(v, out));
            let dx = rc - DVector::from_vec(wdsw);
            (dx, dy, ds)
        };
        let steps = |dx: &DVector<f64>, ds: &DVector<f64>| -> Result<(f64, f64, Vec<Hat>, Vec<Hat>)> {
            let (mut ap, mut ad) = (f64::INFINITY, f64::INFINITY);
            let mut xh = Vec::with_capacity(cones.len());
            let mut sh = Vec::with_capacity(cones.len());
            for (k, cone) in cones.iter().enumerate() {
                let r = offsets[k]..offsets[k] + cone.len();
                let dxh = scal[k].scale_x(&dx.as_slice()[r.clone()]);
                let dsh = scal[k].scale_s(&ds.as_slice()[r]);
                ap = ap.min(scal[k].max_step(&dxh)?);
                ad = ad.min(scal[k].max_step(&dsh)?);
                xh.push(dxh);
                sh.push(dsh);
            }
            Ok((ap, ad, xh, sh))
        };

        // Predictor.
        let h_aff: Vec<Hat> = scal.iter().map(Scaling::affine_target).collect();
        let (dxa, _, dsa) = direction(&h_aff);
        let (apa, ada, xha, sha) = steps(&dxa, &dsa)?;
        let (apa, ada) = (apa.min(1.0), ada.min(1.0));
        let mu_aff = (&x + &dxa * apa).dot(&(&s + &dsa * ada)) / nu;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // Corrector.
        let h_cor: Vec<Hat> = scal
            .iter()
            .enumerate()
            .map(|(k, sc)| Hat::complementarity(sc.d(), sigma * mu, &xha[k], &sha[k]))
            .collect();
        let (dx, dy, ds) = direction(&h_cor);
        let (ap, ad, _, _) = steps(&dx, &ds)?;
        let ap = (opts.step_fraction * ap).min(1.0);
        let ad = (opts.step_fraction * ad).min(1.0);
        if !(ap > 0.0 && ad > 0.0) || !dx.iter().chain(dy.iter()).all(|v| v.is_finite()) {
            return Err(numerical("search direction is degenerate", f64::INFINITY));
        }
        x.axpy(ap, &dx, 1.0);
        y.axpy(ad, &dy, 1.0);
        s.axpy(ad, &ds, 1.0);
    }

    let mut dual = vec![0.0; p.num_constraints()];
    for (r, &i) in reduced.kept.iter().enumerate() {
        dual[i] = y[r];
    }
    Ok(ConicSolution {
        status,
        primal: p.split(x.as_slice()),
        dual,
        dual_slack: p.split(s.as_slice()),
        primal_objective: c.dot(&x),
        dual_objective: b.dot(&y),
        gap,
        primal_residual: pres,
        dual_residual: dres,
        iterations,
        dropped_rows: p.num_constraints() - m,
        note: None,
    })
}
