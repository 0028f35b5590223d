//! Single-qudit noise channels and their Choi operators.
//!
//! Every channel is parameterized by the dimensionless product `γt`, written
//! `gamma_t` throughout; `e = exp(-γt)` is the surviving coherence factor.
//! `γt = +∞` is accepted and gives the asymptotic channel.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{partial_trace_matrix, ComplexMatrix, HermitianOperator, Subsystem, ONE};

/// Tolerance on positivity and unit trace of an input state.
pub const STATE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    AmplitudeDamping,
    PhaseDamping,
    Depolarizing,
    Identity,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 4] = [
        ChannelKind::AmplitudeDamping,
        ChannelKind::PhaseDamping,
        ChannelKind::Depolarizing,
        ChannelKind::Identity,
    ];

    /// The three noisy kinds.
    pub const NOISY: [ChannelKind; 3] = [
        ChannelKind::AmplitudeDamping,
        ChannelKind::PhaseDamping,
        ChannelKind::Depolarizing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::AmplitudeDamping => "amplitude_damping",
            ChannelKind::PhaseDamping => "phase_damping",
            ChannelKind::Depolarizing => "depolarizing",
            ChannelKind::Identity => "identity",
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "amplitude_damping" | "ad" => Ok(ChannelKind::AmplitudeDamping),
            "phase_damping" | "pd" => Ok(ChannelKind::PhaseDamping),
            "depolarizing" | "dep" => Ok(ChannelKind::Depolarizing),
            "identity" | "id" => Ok(ChannelKind::Identity),
            other => Err(Error::Parse(format!("unknown channel kind '{other}'"))),
        }
    }
}

/// A CPTP map on a qubit or qutrit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    dim: usize,
    kind: ChannelKind,
    gamma_t: f64,
}

impl Channel {
    pub fn new(dim: usize, kind: ChannelKind, gamma_t: f64) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::Argument(format!(
                "channels are defined for d = 2 or 3, not {dim}"
            )));
        }
        if gamma_t.is_nan() || gamma_t < 0.0 {
            return Err(Error::Argument(format!("gamma_t must be >= 0, got {gamma_t}")));
        }
        Ok(Channel { dim, kind, gamma_t })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Channel::new(dim, ChannelKind::Identity, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn gamma_t(&self) -> f64 {
        self.gamma_t
    }

    /// Same kind and dimension at a different `γt`.
    pub fn at(&self, gamma_t: f64) -> Result<Self> {
        Channel::new(self.dim, self.kind, gamma_t)
    }

    /// The linear map on arbitrary (not necessarily Hermitian) matrices.
    pub fn map(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = self.dim;
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::Dimension {
                expected: d,
                found: rho.nrows(),
            });
        }
        let e = (-self.gamma_t).exp();
        let r = |v: f64| Complex64::from(v);
        let mut out = rho.clone();
        match self.kind {
            ChannelKind::Identity => {}
            ChannelKind::Depolarizing => {
                let tr: Complex64 = rho.diagonal().iter().sum();
                out *= r(e);
                for i in 0..d {
                    out[(i, i)] += tr * r((1.0 - e) / d as f64);
                }
            }
            ChannelKind::PhaseDamping => {
                for i in 0..d {
                    for j in 0..d {
                        if i != j {
                            out[(i, j)] *= r(e);
                        }
                    }
                }
            }
            ChannelKind::AmplitudeDamping if d == 2 => {
                let se = e.sqrt();
                out[(0, 0)] = rho[(0, 0)] + rho[(1, 1)] * r(1.0 - e);
                out[(1, 1)] = rho[(1, 1)] * r(e);
                out[(0, 1)] = rho[(0, 1)] * r(se);
                out[(1, 0)] = rho[(1, 0)] * r(se);
            }
            ChannelKind::AmplitudeDamping => {
                let se = e.sqrt();
                let e32 = e * se;
                let cross = 2f64.sqrt() * (se - e32);
                out[(0, 0)] = rho[(0, 0)] * r(e * e);
                out[(0, 1)] = rho[(0, 1)] * r(e32);
                out[(1, 0)] = rho[(1, 0)] * r(e32);
                out[(0, 2)] = rho[(0, 2)] * r(e);
                out[(2, 0)] = rho[(2, 0)] * r(e);
                out[(1, 1)] = rho[(0, 0)] * r(2.0 * (e - e * e)) + rho[(1, 1)] * r(e);
                out[(1, 2)] = rho[(0, 1)] * r(cross) + rho[(1, 2)] * r(se);
                out[(2, 1)] = rho[(1, 0)] * r(cross) + rho[(2, 1)] * r(se);
                out[(2, 2)] = rho[(0, 0)] * r((1.0 - e) * (1.0 - e)) + rho[(1, 1)] * r(1.0 - e) + rho[(2, 2)];
            }
        }
        Ok(out)
    }

    /// Action on a density matrix.
    pub fn apply(&self, rho: &HermitianOperator) -> Result<HermitianOperator> {
        check_state(rho, self.dim)?;
        Ok(HermitianOperator::hermitian_part(&self.map(rho.matrix())?))
    }

    /// `E = Σᵢⱼ |i⟩⟨j| ⊗ E(|j⟩⟨i|)`.
    pub fn choi(&self) -> ChoiOperator {
        let d = self.dim;
        let mut m = ComplexMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                let mut unit = ComplexMatrix::zeros(d, d);
                unit[(j, i)] = ONE;
                let img = self.map(&unit).expect("unit matrix has channel dimension");
                m.view_mut((i * d, j * d), (d, d)).copy_from(&img);
            }
        }
        ChoiOperator {
            dims: (d, d),
            operator: HermitianOperator::hermitian_part(&m),
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(d={}, gamma_t={})", self.kind, self.dim, self.gamma_t)
    }
}

/// Reject operators that are not density matrices of dimension `dim`.
pub fn check_state(rho: &HermitianOperator, dim: usize) -> Result<()> {
    if rho.dim() != dim {
        return Err(Error::Dimension {
            expected: dim,
            found: rho.dim(),
        });
    }
    let tr = rho.trace();
    if (tr - 1.0).abs() > STATE_TOL {
        return Err(Error::NotAState(format!("trace is {tr}")));
    }
    let min = rho.min_eigenvalue()?;
    if min < -STATE_TOL {
        return Err(Error::NotAState(format!("minimum eigenvalue is {min:e}")));
    }
    Ok(())
}

/// Choi-Jamiołkowski operator of a channel from `A` to `B`.
#[derive(Debug, Clone)]
pub struct ChoiOperator {
    dims: (usize, usize),
    operator: HermitianOperator,
}

impl ChoiOperator {
    pub fn new(dims: (usize, usize), operator: HermitianOperator) -> Result<Self> {
        if dims.0 * dims.1 != operator.dim() {
            return Err(Error::Dimension {
                expected: dims.0 * dims.1,
                found: operator.dim(),
            });
        }
        Ok(ChoiOperator { dims, operator })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.operator
    }

    /// `tr[E (X ⊗ G)] = tr[E(X) G]` for arbitrary `X` on `A` and `G` on `B`.
    pub fn pair(&self, x: &ComplexMatrix, g: &ComplexMatrix) -> Result<Complex64> {
        let (da, db) = self.dims;
        if x.nrows() != da || g.nrows() != db {
            return Err(Error::Dimension {
                expected: da,
                found: x.nrows(),
            });
        }
        let e = self.operator.matrix();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..da {
            for j in 0..da {
                let xji = x[(j, i)];
                if xji == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..db {
                    for l in 0..db {
                        acc += e[(i * db + k, j * db + l)] * xji * g[(l, k)];
                    }
                }
            }
        }
        Ok(acc)
    }
}

/// `tr_A[E (ρ ⊗ I)]`, the output of the channel encoded by `choi` on `rho`.
pub fn propagate_choi(choi: &ChoiOperator, rho: &HermitianOperator) -> Result<HermitianOperator> {
    let (da, db) = choi.dims;
    if rho.dim() != da {
        return Err(Error::Dimension {
            expected: da,
            found: rho.dim(),
        });
    }
    let lifted = rho.matrix().kronecker(&ComplexMatrix::identity(db, db));
    let prod = choi.operator.matrix() * lifted;
    Ok(HermitianOperator::hermitian_part(&partial_trace_matrix(
        &prod,
        (da, db),
        Subsystem::B,
    )?))
}

/// A channel kind with its `γt`, independent of dimension.
///
/// Text form: `kind:gamma_t=0.5` or `kind:gamma=2,t=0.25`; a bare `identity`
/// is also accepted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub kind: ChannelKind,
    pub gamma_t: f64,
}

impl ChannelSpec {
    pub fn at_dim(&self, dim: usize) -> Result<Channel> {
        Channel::new(dim, self.kind, self.gamma_t)
    }
}

fn parse_number(key: &str, v: &str) -> Result<f64> {
    let v = v.trim();
    let x = match v {
        "inf" | "+inf" | "infinity" => f64::INFINITY,
        _ => v
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("{key} = '{v}' is not a number")))?,
    };
    if x.is_nan() || x < 0.0 {
        return Err(Error::Parse(format!("{key} must be >= 0, got {v}")));
    }
    Ok(x)
}

impl FromStr for ChannelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = match s.split_once(':') {
            Some((k, r)) => (k, Some(r)),
            None => (s, None),
        };
        let kind: ChannelKind = kind.parse()?;
        let Some(rest) = rest else {
            if kind == ChannelKind::Identity {
                return Ok(ChannelSpec { kind, gamma_t: 0.0 });
            }
            return Err(Error::Parse(format!("channel '{s}' needs gamma_t or gamma and t")));
        };
        let (mut gamma_t, mut gamma, mut t) = (None, None, None);
        for part in rest.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value in '{part}'")))?;
            let slot = match k.trim() {
                "gamma_t" => &mut gamma_t,
                "gamma" => &mut gamma,
                "t" => &mut t,
                other => return Err(Error::Parse(format!("unknown channel parameter '{other}'"))),
            };
            if slot.replace(parse_number(k.trim(), v)?).is_some() {
                return Err(Error::Parse(format!("channel parameter '{}' given twice", k.trim())));
            }
        }
        let gamma_t = match (gamma_t, gamma, t) {
            (Some(gt), None, None) => gt,
            (None, Some(g), Some(t)) => g * t,
            _ => {
                return Err(Error::Parse(format!(
                    "channel '{s}' needs either gamma_t or both gamma and t"
                )))
            }
        };
        if gamma_t.is_nan() {
            return Err(Error::Parse(format!("channel '{s}' gives an undefined gamma_t")));
        }
        Ok(ChannelSpec { kind, gamma_t })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{eig_hermitian, partial_trace, ZERO};
    use crate::sample::random_density;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ket_op(d: usize, k: usize) -> HermitianOperator {
        let mut v = vec![ZERO; d];
        v[k] = ONE;
        HermitianOperator::projector_onto(&v)
    }

    fn swap(d: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(
            d * d,
            d * d,
            |r, c| {
                if r / d == c % d && r % d == c / d {
                    ONE
                } else {
                    ZERO
                }
            },
        )
    }

    /// Kraus form of the qutrit amplitude-damping map.
    fn qutrit_ad_kraus(e: f64) -> Vec<ComplexMatrix> {
        let mut k0 = ComplexMatrix::zeros(3, 3);
        k0[(0, 0)] = Complex64::from(e);
        k0[(1, 1)] = Complex64::from(e.sqrt());
        k0[(2, 2)] = ONE;
        let mut k1 = ComplexMatrix::zeros(3, 3);
        k1[(1, 0)] = Complex64::from((2.0 * (e - e * e)).sqrt());
        k1[(2, 1)] = Complex64::from((1.0 - e).sqrt());
        let mut k2 = ComplexMatrix::zeros(3, 3);
        k2[(2, 0)] = Complex64::from(1.0 - e);
        vec![k0, k1, k2]
    }

    const GRID: [f64; 6] = [0.0, 0.1, 0.5, 1.0, 2.5, 5.0];

    #[test]
    fn depolarizing_limit_is_maximally_mixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in [2, 3] {
            let ch = Channel::new(d, ChannelKind::Depolarizing, f64::INFINITY).unwrap();
            let out = ch.apply(&random_density(&mut rng, d)).unwrap();
            assert!(out.max_abs_diff(&HermitianOperator::identity(d).scale(1.0 / d as f64)) < 1e-15);
        }
    }

    #[test]
    fn qutrit_phase_damping_coherence() {
        let ch = Channel::new(3, ChannelKind::PhaseDamping, 0.7).unwrap();
        let mut m = ComplexMatrix::zeros(3, 3);
        m[(0, 1)] = Complex64::new(0.3, -0.1);
        let out = ch.map(&m).unwrap();
        assert!((out[(0, 1)] - m[(0, 1)] * (-0.7f64).exp()).norm() < 1e-16);
    }

    #[test]
    fn qutrit_amplitude_damping_ground_population() {
        for gt in GRID {
            let e = (-gt).exp();
            let ch = Channel::new(3, ChannelKind::AmplitudeDamping, gt).unwrap();
            let out = ch.apply(&ket_op(3, 0)).unwrap();
            let want = (-2.0 * gt).exp() - 2.0 * e + 1.0;
            assert!((out.matrix()[(2, 2)].re - want).abs() < 1e-15);
        }
    }

    #[test]
    fn qutrit_amplitude_damping_matches_kraus() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for gt in GRID {
            let ch = Channel::new(3, ChannelKind::AmplitudeDamping, gt).unwrap();
            let rho = random_density(&mut rng, 3);
            let mut want = ComplexMatrix::zeros(3, 3);
            for k in qutrit_ad_kraus((-gt).exp()) {
                want += &k * rho.matrix() * k.adjoint();
            }
            let got = ch.apply(&rho).unwrap();
            assert!((got.matrix() - want).map(|z| z.norm()).max() < 1e-14);
        }
    }

    #[test]
    fn identity_choi_is_swap() {
        for d in [2, 3] {
            let e = Channel::identity(d).unwrap().choi();
            assert_eq!(e.operator().matrix(), &swap(d));
            assert!((e.operator().trace() - d as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn depolarizing_choi_closed_form() {
        for gt in GRID {
            let e = (-gt).exp();
            let got = Channel::new(2, ChannelKind::Depolarizing, gt).unwrap().choi();
            let want = swap(2) * Complex64::from(e) + ComplexMatrix::identity(4, 4) * Complex64::from((1.0 - e) / 2.0);
            assert!((got.operator().matrix() - want).map(|z| z.norm()).max() < 1e-15);
        }
    }

    #[test]
    fn choi_marginal_and_positivity() {
        for d in [2, 3] {
            for kind in ChannelKind::ALL {
                for k in 0..=50 {
                    let gt = 0.1 * k as f64;
                    let e = Channel::new(d, kind, gt).unwrap().choi();
                    let marg = partial_trace(e.operator(), (d, d), Subsystem::A).unwrap();
                    assert!(marg.max_abs_diff(&HermitianOperator::identity(d)) < 1e-10);
                    // Positivity holds for the partially transposed operator Σ|i⟩⟨j|⊗E(|i⟩⟨j|).
                    let pt = crate::qmat::partial_transpose(e.operator(), (d, d), Subsystem::A).unwrap();
                    assert!(eig_hermitian(&pt).unwrap().eigenvalues.last().unwrap() > &-1e-10);
                }
            }
        }
    }

    #[test]
    fn propagate_examples() {
        let rho = ket_op(2, 0);
        let id = Channel::identity(2).unwrap().choi();
        assert!(propagate_choi(&id, &rho).unwrap().max_abs_diff(&rho) < 1e-15);
        let gt: f64 = 0.8;
        let e = (-gt).exp();
        let dep = Channel::new(2, ChannelKind::Depolarizing, gt).unwrap();
        let want = &rho.scale(e) + &HermitianOperator::identity(2).scale((1.0 - e) / 2.0);
        assert!(propagate_choi(&dep.choi(), &rho).unwrap().max_abs_diff(&want) < 1e-15);
        let diag = HermitianOperator::diagonal(&[0.2, 0.5, 0.3]);
        let pd = Channel::new(3, ChannelKind::PhaseDamping, 1.3).unwrap().choi();
        assert!(propagate_choi(&pd, &diag).unwrap().max_abs_diff(&diag) < 1e-15);
    }

    #[test]
    fn apply_rejects_bad_input() {
        let ch = Channel::identity(2).unwrap();
        assert!(ch.apply(&HermitianOperator::identity(3).scale(1.0 / 3.0)).is_err());
        assert!(ch.apply(&HermitianOperator::identity(2)).is_err());
        assert!(ch.apply(&HermitianOperator::diagonal(&[1.5, -0.5])).is_err());
        assert!(Channel::new(4, ChannelKind::Identity, 0.0).is_err());
        assert!(Channel::new(2, ChannelKind::Identity, -1.0).is_err());
    }

    #[test]
    fn spec_parsing() {
        let a: ChannelSpec = "depolarizing:gamma_t=0.5".parse().unwrap();
        assert_eq!(
            a,
            ChannelSpec {
                kind: ChannelKind::Depolarizing,
                gamma_t: 0.5
            }
        );
        let b: ChannelSpec = "amplitude_damping:gamma=2,t=0.25".parse().unwrap();
        assert_eq!(b.gamma_t, 0.5);
        let c: ChannelSpec = "identity".parse().unwrap();
        assert_eq!(c.gamma_t, 0.0);
        let inf: ChannelSpec = "pd:gamma_t=inf".parse().unwrap();
        assert!(inf.gamma_t.is_infinite());
        for bad in [
            "foo:gamma_t=1",
            "depolarizing",
            "depolarizing:gamma=1",
            "depolarizing:gamma_t=-1",
            "depolarizing:gamma_t=1,gamma_t=2",
            "depolarizing:x=1",
        ] {
            assert!(bad.parse::<ChannelSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn semigroup_spot_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [2, 3] {
            for kind in [ChannelKind::Depolarizing, ChannelKind::PhaseDamping] {
                let rho = random_density(&mut rng, d);
                let (t1, t2) = (0.37f64, 1.21f64);
                let two = Channel::new(d, kind, t2)
                    .unwrap()
                    .apply(&Channel::new(d, kind, t1).unwrap().apply(&rho).unwrap())
                    .unwrap();
                let one = Channel::new(d, kind, t1 + t2).unwrap().apply(&rho).unwrap();
                assert!(two.max_abs_diff(&one) < 1e-10);
            }
        }
    }

    #[test]
    fn apply_agrees_with_choi_propagation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for d in [2, 3] {
            for kind in ChannelKind::ALL {
                for gt in GRID {
                    let ch = Channel::new(d, kind, gt).unwrap();
                    let choi = ch.choi();
                    for _ in 0..200 {
                        let rho = random_density(&mut rng, d);
                        let a = ch.apply(&rho).unwrap();
                        assert!((a.trace() - 1.0).abs() < 1e-12);
                        assert!(a.max_abs_diff(&propagate_choi(&choi, &rho).unwrap()) < 1e-10);
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn trace_preserved(seed in any::<u64>(), gt in 0.0f64..8.0, kind in 0usize..4, d in 2usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ch = Channel::new(d, ChannelKind::ALL[kind], gt).unwrap();
            let out = ch.apply(&random_density(&mut rng, d)).unwrap();
            prop_assert!((out.trace() - 1.0).abs() < 1e-12);
            prop_assert!(out.min_eigenvalue().unwrap() > -1e-12);
        }
    }
}
