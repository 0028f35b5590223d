//! Two-time states over time.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bases::{wigner_qutrit_basis, BasisLabel, OperatorBasis};
use crate::dynamics::{check_state, Channel};
use crate::error::{Error, Result};
use crate::qmat::{
    eigprojectors, kron, partial_trace, trace_norm, ComplexMatrix, HermitianOperator, Subsystem, DEFAULT_CLUSTER_TOL,
};
use crate::robustness::Pvm;

/// Threshold on the trace-norm distance below which NSIT is reported as satisfied.
pub const NSIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    Pdo,
    Wigner,
    /// Supplied directly rather than built from a state and a channel.
    Explicit,
}

#[derive(Debug, Clone)]
pub struct Provenance {
    pub initial_state: HermitianOperator,
    pub channel: Channel,
}

/// A trace-one Hermitian operator on `dA ⊗ dB` describing one system at two times.
#[derive(Debug, Clone)]
pub struct StateOverTime {
    dims: (usize, usize),
    operator: HermitianOperator,
    construction: Construction,
    provenance: Option<Provenance>,
}

impl StateOverTime {
    /// Wrap an arbitrary trace-one operator.
    pub fn explicit(operator: HermitianOperator, dims: (usize, usize)) -> Result<Self> {
        if dims.0 * dims.1 != operator.dim() {
            return Err(Error::Dimension {
                expected: dims.0 * dims.1,
                found: operator.dim(),
            });
        }
        let tr = operator.trace();
        if (tr - 1.0).abs() > 1e-10 {
            return Err(Error::Argument(format!(
                "state over time must have unit trace, got {tr}"
            )));
        }
        Ok(StateOverTime {
            dims,
            operator,
            construction: Construction::Explicit,
            provenance: None,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.operator
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn marginal(&self, keep: Subsystem) -> Result<HermitianOperator> {
        partial_trace(&self.operator, self.dims, keep)
    }
}

/// `R = (1/d²) Σᵢⱼ ⟨Gᵢ⊗Gⱼ⟩ Gᵢ⊗Gⱼ` where the earlier measurement of `Gᵢ` is a
/// Lüders measurement onto its eigenspaces.
pub fn build_pdo(rho_a: &HermitianOperator, ch: &Channel, basis: &OperatorBasis) -> Result<StateOverTime> {
    let d = ch.dim();
    match (d, basis.label()) {
        (2, BasisLabel::Pauli) | (3, BasisLabel::WignerQutrit) => {}
        (_, label) => {
            return Err(Error::Argument(format!(
                "PDO needs the Pauli basis for d = 2 or the phase-point basis for d = 3, got {label:?} with d = {d}"
            )))
        }
    }
    if basis.dim() != d {
        return Err(Error::Dimension {
            expected: d,
            found: basis.dim(),
        });
    }
    check_state(rho_a, d)?;
    let choi = ch.choi();
    let n = d * d;
    let mut r = ComplexMatrix::zeros(n, n);
    for gi in basis.elements() {
        let mut collapsed = ComplexMatrix::zeros(d, d);
        for (a, proj) in eigprojectors(gi, DEFAULT_CLUSTER_TOL)? {
            collapsed += proj.sandwich(rho_a).matrix() * Complex64::from(a);
        }
        for gj in basis.elements() {
            let corr = choi.pair(&collapsed, gj.matrix())?.re;
            if corr != 0.0 {
                r += kron(gi, gj)?.matrix() * Complex64::from(corr);
            }
        }
    }
    r /= Complex64::from((d * d) as f64);
    Ok(StateOverTime {
        dims: (d, d),
        operator: HermitianOperator::hermitian_part(&r),
        construction: Construction::Pdo,
        provenance: Some(Provenance {
            initial_state: rho_a.clone(),
            channel: *ch,
        }),
    })
}

/// The Wigner-quasiprobability state over time, qutrits only:
/// `R = Σᵢⱼ r(j|i) r(i) Kᵢ⊗Kⱼ` with `r(i) = tr(ρKᵢ)/3` and `r(j|i) = tr[E(Kᵢ⊗Kⱼ)]/3`.
pub fn build_wigner(rho_a: &HermitianOperator, ch: &Channel) -> Result<StateOverTime> {
    if ch.dim() != 3 {
        return Err(Error::Argument(format!(
            "Wigner construction is defined for qutrits only, got d = {}",
            ch.dim()
        )));
    }
    check_state(rho_a, 3)?;
    let basis = wigner_qutrit_basis();
    let ks = basis.elements();
    let choi = ch.choi();
    let mut r = ComplexMatrix::zeros(9, 9);
    for ki in ks {
        let ri = rho_a.hs_inner(ki) / 3.0;
        for kj in ks {
            let rji = choi.pair(ki.matrix(), kj.matrix())?.re / 3.0;
            let w = ri * rji;
            if w != 0.0 {
                r += kron(ki, kj)?.matrix() * Complex64::from(w);
            }
        }
    }
    Ok(StateOverTime {
        dims: (3, 3),
        operator: HermitianOperator::hermitian_part(&r),
        construction: Construction::Wigner,
        provenance: Some(Provenance {
            initial_state: rho_a.clone(),
            channel: *ch,
        }),
    })
}

/// `f(R) = ‖R‖_tr − 1`.
pub fn causality_f(r: &StateOverTime) -> Result<f64> {
    Ok((trace_norm(r.operator())? - 1.0).max(0.0))
}

#[derive(Debug, Clone)]
pub struct NsitReport {
    pub satisfied: bool,
    /// Largest `‖Σₐ ρ̃_{a|x} − E(ρ)‖_tr` over settings.
    pub max_violation: f64,
    /// `Σₐ ρ̃_{a|x}` for each setting `x`.
    pub marginals: Vec<HermitianOperator>,
    /// Later state without an earlier measurement.
    pub unmeasured: HermitianOperator,
    /// Set when only one setting was supplied.
    pub single_setting: bool,
}

/// Compare the later marginal after each earlier measurement with the
/// unmeasured evolution.
pub fn nsit_check(rho_a: &HermitianOperator, ch: &Channel, settings: &[Pvm]) -> Result<NsitReport> {
    if settings.is_empty() {
        return Err(Error::Argument("NSIT check needs at least one setting".into()));
    }
    let unmeasured = ch.apply(rho_a)?;
    let mut marginals = Vec::with_capacity(settings.len());
    let mut max_violation: f64 = 0.0;
    for pvm in settings {
        if pvm.dim() != ch.dim() {
            return Err(Error::Dimension {
                expected: ch.dim(),
                found: pvm.dim(),
            });
        }
        let mut sum = ComplexMatrix::zeros(ch.dim(), ch.dim());
        for p in pvm.projectors() {
            sum += ch.map(p.sandwich(rho_a).matrix())?;
        }
        let m = HermitianOperator::hermitian_part(&sum);
        max_violation = max_violation.max(trace_norm(&(&m - &unmeasured))?);
        marginals.push(m);
    }
    Ok(NsitReport {
        satisfied: max_violation <= NSIT_TOL,
        max_violation,
        marginals,
        unmeasured,
        single_setting: settings.len() == 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::pauli_basis;
    use crate::dynamics::ChannelKind;
    use crate::qmat::{eig_hermitian, ONE, ZERO};
    use crate::robustness::mub_pvms;
    use crate::sample::{random_density, random_pure_state, random_trace_one, random_unitary};
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn swap(d: usize) -> HermitianOperator {
        let m = ComplexMatrix::from_fn(
            d * d,
            d * d,
            |r, c| {
                if r / d == c % d && r % d == c / d {
                    ONE
                } else {
                    ZERO
                }
            },
        );
        HermitianOperator::new(m).unwrap()
    }

    fn mixed(d: usize) -> HermitianOperator {
        HermitianOperator::identity(d).scale(1.0 / d as f64)
    }

    fn ket(d: usize, k: usize) -> HermitianOperator {
        let mut v = vec![ZERO; d];
        v[k] = ONE;
        HermitianOperator::projector_onto(&v)
    }

    fn basis_for(d: usize) -> OperatorBasis {
        if d == 2 {
            pauli_basis()
        } else {
            wigner_qutrit_basis()
        }
    }

    #[test]
    fn qubit_identity_pdo_is_half_swap() {
        let r = build_pdo(&mixed(2), &Channel::identity(2).unwrap(), &pauli_basis()).unwrap();
        assert!(r.operator().max_abs_diff(&swap(2).scale(0.5)) < 1e-15);
        assert!((causality_f(&r).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn maximally_mixed_input_gives_scaled_choi() {
        for d in [2, 3] {
            for kind in ChannelKind::ALL {
                for gt in [0.0, 0.3, 1.7] {
                    let ch = Channel::new(d, kind, gt).unwrap();
                    let r = build_pdo(&mixed(d), &ch, &basis_for(d)).unwrap();
                    let want = ch.choi().operator().scale(1.0 / d as f64);
                    assert!(r.operator().max_abs_diff(&want) < 1e-12, "{ch}");
                    if d == 3 {
                        let w = build_wigner(&mixed(3), &ch).unwrap();
                        assert!(w.operator().max_abs_diff(&want) < 1e-12, "{ch}");
                    }
                }
            }
        }
    }

    #[test]
    fn qutrit_identity_spectrum_is_state_independent() {
        let ch = Channel::identity(3).unwrap();
        let spectrum = |rho: &HermitianOperator| {
            eig_hermitian(build_pdo(rho, &ch, &wigner_qutrit_basis()).unwrap().operator())
                .unwrap()
                .eigenvalues
        };
        let reference = spectrum(&ket(3, 0));
        let s = 1.0 / 3f64.sqrt();
        let balanced = HermitianOperator::projector_onto(&[Complex64::from(s); 3]);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut states = vec![balanced];
        states.extend((0..50).map(|_| random_pure_state(&mut rng, 3)));
        for rho in &states {
            for (a, b) in spectrum(rho).iter().zip(&reference) {
                assert!((a - b).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn wigner_identity_trace_norm() {
        let r = build_wigner(&mixed(3), &Channel::identity(3).unwrap()).unwrap();
        assert!((trace_norm(r.operator()).unwrap() - 3.0).abs() < 1e-12);
        assert!((causality_f(&r).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn wigner_conditionals_normalized() {
        let ks = wigner_qutrit_basis();
        for kind in ChannelKind::ALL {
            let choi = Channel::new(3, kind, 0.6).unwrap().choi();
            for ki in ks.elements() {
                let total: f64 = ks
                    .elements()
                    .iter()
                    .map(|kj| choi.pair(ki.matrix(), kj.matrix()).unwrap().re / 3.0)
                    .sum();
                assert!((total - 1.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn positive_operator_has_zero_f() {
        let r = StateOverTime::explicit(HermitianOperator::identity(4).scale(0.25), (2, 2)).unwrap();
        assert_eq!(causality_f(&r).unwrap(), 0.0);
    }

    #[test]
    fn unsupported_pairings_rejected() {
        let q = Channel::identity(2).unwrap();
        assert!(build_pdo(&mixed(2), &q, &wigner_qutrit_basis()).is_err());
        assert!(build_pdo(&mixed(2), &q, &crate::bases::gellmann_basis(2).unwrap()).is_err());
        assert!(build_wigner(&mixed(2), &q).is_err());
        assert!(build_pdo(&mixed(3), &Channel::identity(3).unwrap(), &pauli_basis()).is_err());
    }

    #[test]
    fn classical_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in [2, 3] {
            let ch = Channel::new(d, ChannelKind::Depolarizing, f64::INFINITY).unwrap();
            let rho = random_density(&mut rng, d);
            let want = kron(&rho, &mixed(d)).unwrap();
            let r = build_pdo(&rho, &ch, &basis_for(d)).unwrap();
            assert!(r.operator().max_abs_diff(&want) < 1e-12);
            assert_eq!(causality_f(&r).unwrap(), 0.0);
            if d == 3 {
                let w = build_wigner(&rho, &ch).unwrap();
                assert!(w.operator().max_abs_diff(&want) < 1e-12);
            }
        }
    }

    #[test]
    fn nsit_examples() {
        let id3 = Channel::identity(3).unwrap();
        let mubs = mub_pvms(3, 4).unwrap();
        assert!(nsit_check(&mixed(3), &id3, &mubs).unwrap().satisfied);

        let id2 = Channel::identity(2).unwrap();
        let zx = mub_pvms(2, 2).unwrap();
        let rep = nsit_check(&ket(2, 0), &id2, &zx).unwrap();
        assert!(!rep.satisfied);
        assert!(rep.marginals[0].max_abs_diff(&ket(2, 0)) < 1e-14);
        assert!(rep.marginals[1].max_abs_diff(&mixed(2)) < 1e-14);
        assert!((rep.max_violation - 1.0).abs() < 1e-12);

        let single = nsit_check(&ket(2, 0), &id2, &zx[..1]).unwrap();
        assert!(single.single_setting && single.satisfied);
        assert!(nsit_check(&ket(2, 0), &id2, &[]).is_err());
        assert!(nsit_check(&ket(2, 0), &id2, &mubs).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn marginal_is_initial_state(seed in any::<u64>(), kind in 0usize..4, gt in 0.0f64..5.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for d in [2, 3] {
                let ch = Channel::new(d, ChannelKind::ALL[kind], gt).unwrap();
                let rho = random_density(&mut rng, d);
                let mut built = vec![build_pdo(&rho, &ch, &basis_for(d)).unwrap()];
                if d == 3 {
                    built.push(build_wigner(&rho, &ch).unwrap());
                }
                for r in built {
                    prop_assert!((r.operator().trace() - 1.0).abs() < 1e-10);
                    prop_assert!(r.marginal(Subsystem::A).unwrap().max_abs_diff(&rho) < 1e-9);
                }
            }
        }

        #[test]
        fn qubit_pdo_is_unitarily_covariant(seed in any::<u64>(), kind in 0usize..4, gt in 0.0f64..4.0) {
            // R built from (UρU†, V∘E∘U†) equals (U⊗V) R (U⊗V)†, so f is unchanged.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ch = Channel::new(2, ChannelKind::ALL[kind], gt).unwrap();
            let rho = random_density(&mut rng, 2);
            let u = random_unitary(&mut rng, 2);
            let v = random_unitary(&mut rng, 2);
            let r = build_pdo(&rho, &ch, &pauli_basis()).unwrap();
            let rotated = rotated_pdo(&rho.conjugate_by(&u), &ch, &u, &v);
            let uv = u.kronecker(&v);
            prop_assert!(rotated.max_abs_diff(&r.operator().conjugate_by(&uv)) < 1e-10);
            let f_rot = trace_norm(&rotated).unwrap() - 1.0;
            prop_assert!((f_rot - causality_f(&r).unwrap()).abs() < 1e-8);
        }

        #[test]
        fn f_is_convex(seed in any::<u64>(), d in 2usize..4, k in 2usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rs: Vec<_> = (0..k).map(|_| random_trace_one(&mut rng, d * d)).collect();
            let mut p: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
            let total: f64 = p.iter().sum();
            p.iter_mut().for_each(|x| *x /= total);
            let mix = rs.iter().zip(&p).fold(HermitianOperator::zeros(d * d), |acc, (r, w)| &acc + &r.scale(*w));
            let f = |op: &HermitianOperator| causality_f(&StateOverTime::explicit(op.clone(), (d, d)).unwrap()).unwrap();
            let rhs: f64 = rs.iter().zip(&p).map(|(r, w)| w * f(r)).sum();
            prop_assert!(f(&mix) <= rhs + 1e-10);
        }
    }

    /// PDO of `rho` under `X ↦ V E(U† X U) V†`, computed directly from the
    /// definition without going through `Channel`.
    fn rotated_pdo(rho: &HermitianOperator, ch: &Channel, u: &ComplexMatrix, v: &ComplexMatrix) -> HermitianOperator {
        let basis = pauli_basis();
        let mut r = ComplexMatrix::zeros(4, 4);
        for gi in basis.elements() {
            let mut y = ComplexMatrix::zeros(2, 2);
            for (a, p) in eigprojectors(gi, DEFAULT_CLUSTER_TOL).unwrap() {
                let post = p.matrix() * rho.matrix() * p.matrix();
                let inner = ch.map(&(u.adjoint() * post * u)).unwrap();
                y += v * inner * v.adjoint() * Complex64::from(a);
            }
            for gj in basis.elements() {
                let corr = (&y * gj.matrix()).trace().re;
                r += kron(gi, gj).unwrap().matrix() * Complex64::from(corr / 4.0);
            }
        }
        HermitianOperator::hermitian_part(&r)
    }
}
