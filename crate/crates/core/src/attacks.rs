//! Optimal cheating strategies for both parties and their success probabilities.
//!
//! Bob measures the committed system with the Helstrom pair; if the commit
//! state has weight `alpha` on the `P0` subspace he decodes correctly with
//! probability `alpha` (or `1 - alpha`) and survives an intactness check
//! with probability `alpha^2 + (1 - alpha)^2`.
//!
//! Alice commits to the normalized sum of two fidelity-maximizing
//! purifications and later unveils whichever bit she likes; each unveil
//! succeeds with probability `(1 + F) / 2`.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::qmath::{eig_hermitian, svd, Complex, ComplexMatrix, ComplexVector, QmathError};
use crate::state::{
    helstrom_projectors, trace_distance, uhlmann_pair, Bit, DensityMatrix, Ensemble, PureState,
    Split, StateError,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AttackError {
    #[error("{name} = {value} is outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid split {ancilla}x{system} for a state of dimension {dim}")]
    InvalidSplit {
        ancilla: usize,
        system: usize,
        dim: usize,
    },
    #[error("commit state is not supported on either committed density matrix")]
    OutsideSupport,
    #[error(transparent)]
    State(StateError),
}

impl From<StateError> for AttackError {
    fn from(e: StateError) -> Self {
        match e {
            StateError::DimensionMismatch { expected, found } => {
                AttackError::DimensionMismatch { expected, found }
            }
            StateError::InvalidSplit {
                ancilla,
                system,
                dim,
            } => AttackError::InvalidSplit {
                ancilla,
                system,
                dim,
            },
            other => AttackError::State(other),
        }
    }
}

impl From<QmathError> for AttackError {
    fn from(e: QmathError) -> Self {
        StateError::from(e).into()
    }
}

fn unit_interval(name: &'static str, value: f64) -> Result<f64, AttackError> {
    if !(0.0..=1.0).contains(&value) {
        return Err(AttackError::OutOfRange { name, value });
    }
    Ok(value)
}

/// `h(p) = -p log2 p - (1-p) log2 (1-p)` with `0 log 0 = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    term(p) + term(1.0 - p)
}

/// Probability that Bob's measurement goes unnoticed by an intactness check.
pub fn bob_pass_probability(alpha: f64) -> Result<f64, AttackError> {
    let alpha = unit_interval("alpha", alpha)?;
    let bias = 2.0 * alpha - 1.0;
    Ok(0.5 + 0.5 * bias * bias)
}

/// Bits of information Bob's measurement extracts about the committed bit.
pub fn bob_mutual_information(alpha: f64) -> Result<f64, AttackError> {
    let alpha = unit_interval("alpha", alpha)?;
    Ok((1.0 - binary_entropy(alpha)).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BobAttackReport {
    pub alpha: f64,
    pub pass_probability: f64,
    pub mutual_information_bits: f64,
    pub decode_reliability: f64,
}

fn require_supported(sigma: &DensityMatrix, rhos: [&DensityMatrix; 2]) -> Result<(), AttackError> {
    const TOL: f64 = 1e-9;
    for rho in rhos {
        let eig = eig_hermitian(rho.matrix())?;
        let kernel = eig.projector(|x| x <= TOL);
        if sigma.expectation(&kernel)? <= TOL {
            return Ok(());
        }
    }
    Err(AttackError::OutsideSupport)
}

/// Bob's Helstrom attack against one commit state living on `split`.
pub fn bob_attack_analyze(
    rho0: &DensityMatrix,
    rho1: &DensityMatrix,
    commit_state: &PureState,
    split: Split,
) -> Result<BobAttackReport, AttackError> {
    if split.ancilla == 0 || split.system == 0 || split.total() != commit_state.dim() {
        return Err(AttackError::InvalidSplit {
            ancilla: split.ancilla,
            system: split.system,
            dim: commit_state.dim(),
        });
    }
    if rho0.dim() != split.system {
        return Err(AttackError::DimensionMismatch {
            expected: rho0.dim(),
            found: split.system,
        });
    }
    let reduced = commit_state.reduced_system(split)?;
    require_supported(&reduced, [rho0, rho1])?;

    let pair = helstrom_projectors(rho0, rho1)?;
    let projected = pair.apply_on_system(Bit::Zero, split, commit_state.vector())?;
    let alpha = projected.norm_squared().clamp(0.0, 1.0);
    let d = trace_distance(rho0, rho1)?;
    Ok(BobAttackReport {
        alpha,
        pass_probability: bob_pass_probability(alpha)?,
        mutual_information_bits: bob_mutual_information(alpha)?,
        decode_reliability: (1.0 + d) / 2.0,
    })
}

/// Alice's superposition of the two Uhlmann purifications.
#[derive(Debug, Clone, PartialEq)]
pub struct AliceAttackState {
    pub cheat_state: PureState,
    pub normalization: f64,
    pub pass_probability: f64,
    pub psi0: PureState,
    pub psi1: PureState,
    pub split: Split,
}

fn superpose(psi0: &PureState, psi1: &PureState) -> Result<(PureState, f64), AttackError> {
    let cross = psi0.inner(psi1)?;
    let normalization = (2.0 + 2.0 * cross.re).max(0.0).sqrt();
    let sum = psi0.vector().add(psi1.vector())?;
    Ok((PureState::normalize(sum)?, normalization))
}

/// Prepares the commit state from which Alice can unveil either bit.
///
/// Purifications live on `ancilla(d) ⊗ system(d)`.
pub fn alice_cheat_prepare(
    rho0: &DensityMatrix,
    rho1: &DensityMatrix,
) -> Result<AliceAttackState, AttackError> {
    let (psi0, psi1) = uhlmann_pair(rho0, rho1)?;
    let (cheat_state, normalization) = superpose(&psi0, &psi1)?;
    let pass_probability = psi0.inner(&cheat_state)?.norm_sqr().clamp(0.0, 1.0);
    Ok(AliceAttackState {
        cheat_state,
        normalization,
        pass_probability,
        psi0,
        psi1,
        split: Split::new(rho0.dim(), rho0.dim()),
    })
}

/// Alice's attack written against an explicit pair of commit ensembles.
///
/// The ancilla index labels ensemble members, so at unveil Alice can turn
/// her ancilla into a concrete announcement: measuring it in
/// `unveil_basis[b]` yields the index of an honest state for bit `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleCheat {
    pub attack: AliceAttackState,
    /// Orthonormal ancilla bases, one per unveiled bit.
    pub unveil_basis: [Vec<ComplexVector>; 2],
}

fn ensemble_purification(ensemble: &Ensemble, ancilla: usize) -> Result<PureState, AttackError> {
    let d = ensemble.dim();
    let mut amps = vec![Complex::new(0.0, 0.0); ancilla * d];
    for (i, (p, state)) in ensemble.members().iter().enumerate() {
        let w = p.sqrt();
        for (j, z) in state.amplitudes().iter().enumerate() {
            amps[i * d + j] = z * w;
        }
    }
    Ok(PureState::normalize(ComplexVector::new(amps)?)?)
}

pub fn alice_cheat_prepare_ensemble(
    ensemble0: &Ensemble,
    ensemble1: &Ensemble,
) -> Result<EnsembleCheat, AttackError> {
    if ensemble0.dim() != ensemble1.dim() {
        return Err(AttackError::DimensionMismatch {
            expected: ensemble0.dim(),
            found: ensemble1.dim(),
        });
    }
    let m = ensemble0.len().max(ensemble1.len());
    let split = Split::new(m, ensemble0.dim());

    // G[i][j] = sqrt(p_i q_j) <phi_i|chi_j>; the ancilla unitary W with
    // W^T = V U^dagger (G = U S V^dagger) maximizes <psi0|(W ⊗ I)|psi1>.
    let mut gram = DMatrix::<Complex>::zeros(m, m);
    for (i, (p, a)) in ensemble0.members().iter().enumerate() {
        for (j, (q, b)) in ensemble1.members().iter().enumerate() {
            gram[(i, j)] = a.inner(b)? * (p * q).sqrt();
        }
    }
    let dec = svd(&ComplexMatrix::from_inner(gram)?);
    let w = dec.v.matmul(&dec.u.adjoint())?.as_inner().transpose();

    let psi0 = ensemble_purification(ensemble0, m)?;
    let chi1 = ensemble_purification(ensemble1, m)?;
    let d = split.system;
    let src = chi1.amplitudes();
    let mut rotated = vec![Complex::new(0.0, 0.0); m * d];
    for a in 0..m {
        for b in 0..m {
            let wab = w[(a, b)];
            if wab == Complex::new(0.0, 0.0) {
                continue;
            }
            for j in 0..d {
                rotated[a * d + j] += wab * src[b * d + j];
            }
        }
    }
    let psi1 = PureState::normalize(ComplexVector::new(rotated)?)?;

    let (cheat_state, normalization) = superpose(&psi0, &psi1)?;
    let pass_probability = psi0.inner(&cheat_state)?.norm_sqr().clamp(0.0, 1.0);
    let basis0 = (0..m)
        .map(|i| ComplexVector::basis(m, i))
        .collect::<Result<Vec<_>, _>>()?;
    let basis1 = (0..m)
        .map(|j| ComplexVector::from_inner(w.column(j).into_owned()))
        .collect();
    Ok(EnsembleCheat {
        attack: AliceAttackState {
            cheat_state,
            normalization,
            pass_probability,
            psi0,
            psi1,
            split,
        },
        unveil_basis: [basis0, basis1],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::fidelity;
    use std::f64::consts::PI;

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn ket(a: &[f64]) -> PureState {
        PureState::from_real(a).unwrap()
    }

    fn hbc_pair() -> (DensityMatrix, DensityMatrix) {
        let r0 = DensityMatrix::mixture([(0.5, &ket(&[1.0, 0.0])), (0.5, &ket(&[H, -H]))]).unwrap();
        let r1 = DensityMatrix::mixture([(0.5, &ket(&[0.0, 1.0])), (0.5, &ket(&[H, H]))]).unwrap();
        (r0, r1)
    }

    fn diagonal_model(alpha: f64) -> (DensityMatrix, DensityMatrix) {
        let r0 = DensityMatrix::new(ComplexMatrix::from_diagonal(&[alpha, 1.0 - alpha]).unwrap());
        let r1 = DensityMatrix::new(ComplexMatrix::from_diagonal(&[1.0 - alpha, alpha]).unwrap());
        (r0.unwrap(), r1.unwrap())
    }

    #[test]
    fn pass_probability_examples() {
        assert_eq!(bob_pass_probability(0.5).unwrap(), 0.5);
        let a = (PI / 8.0).cos().powi(2);
        assert!((bob_pass_probability(a).unwrap() - 0.75).abs() < 1e-12);
        assert_eq!(bob_pass_probability(1.0).unwrap(), 1.0);
        assert!(matches!(
            bob_pass_probability(1.1),
            Err(AttackError::OutOfRange { .. })
        ));
        assert!(bob_pass_probability(-0.1).is_err());
        assert!(bob_pass_probability(f64::NAN).is_err());
    }

    #[test]
    fn mutual_information_examples() {
        assert_eq!(bob_mutual_information(0.5).unwrap(), 0.0);
        assert!((bob_mutual_information(0.8536).unwrap() - 0.3992).abs() < 1e-3);
        assert_eq!(bob_mutual_information(1.0).unwrap(), 1.0);
        assert_eq!(bob_mutual_information(0.0).unwrap(), 1.0);
        assert!(bob_mutual_information(2.0).is_err());
    }

    #[test]
    fn symmetric_under_complement() {
        for i in 0..=1000 {
            let a = i as f64 / 1000.0;
            let pb = bob_pass_probability(a).unwrap() - bob_pass_probability(1.0 - a).unwrap();
            let im = bob_mutual_information(a).unwrap() - bob_mutual_information(1.0 - a).unwrap();
            assert!(pb.abs() <= 1e-12 && im.abs() <= 1e-12, "alpha = {a}");
        }
    }

    #[test]
    fn monotone_on_upper_half() {
        let mut prev = (0.0, -1.0);
        for i in 500..=1000 {
            let a = i as f64 * 1e-3;
            let cur = (
                bob_pass_probability(a).unwrap(),
                bob_mutual_information(a).unwrap(),
            );
            assert!(cur.0 >= prev.0 && cur.1 >= prev.1 - 1e-15, "alpha = {a}");
            prev = cur;
        }
    }

    #[test]
    fn bob_attack_on_hbc_zero() {
        let (r0, r1) = hbc_pair();
        let report = bob_attack_analyze(&r0, &r1, &ket(&[1.0, 0.0]), Split::trivial(2)).unwrap();
        assert!((report.alpha - (PI / 8.0).cos().powi(2)).abs() < 1e-12);
        assert!((report.pass_probability - 0.75).abs() < 1e-12);
        assert!((report.decode_reliability - 0.853_553_390_593_273_7).abs() < 1e-12);
    }

    #[test]
    fn bob_attack_identical_densities() {
        let (r0, _) = hbc_pair();
        let report = bob_attack_analyze(&r0, &r0, &ket(&[H, -H]), Split::trivial(2)).unwrap();
        assert!(report.pass_probability >= 0.5);
        assert!((report.decode_reliability - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bob_attack_fair_angle_state() {
        let t = 19.85f64.to_radians();
        let (r0, r1) = diagonal_model(t.cos().powi(2));
        let report =
            bob_attack_analyze(&r0, &r1, &ket(&[t.cos(), t.sin()]), Split::trivial(2)).unwrap();
        assert!((report.alpha - t.cos().powi(2)).abs() < 1e-12);
        assert!((report.alpha - 0.885).abs() < 1e-3);
    }

    #[test]
    fn bob_attack_with_ancilla_factor() {
        let (r0, r1) = hbc_pair();
        // |+>_anc ⊗ |0>_sys has the same alpha as |0> alone
        let joint = ket(&[H, H]).kron(&ket(&[1.0, 0.0])).unwrap();
        let report = bob_attack_analyze(&r0, &r1, &joint, Split::new(2, 2)).unwrap();
        assert!((report.alpha - (PI / 8.0).cos().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn bob_attack_errors() {
        let (r0, r1) = hbc_pair();
        assert!(matches!(
            bob_attack_analyze(&r0, &r1, &ket(&[1.0, 0.0, 0.0, 0.0]), Split::new(3, 2)),
            Err(AttackError::InvalidSplit { .. })
        ));
        assert!(matches!(
            bob_attack_analyze(&r0, &r1, &ket(&[1.0, 0.0, 0.0]), Split::trivial(3)),
            Err(AttackError::DimensionMismatch { .. })
        ));
        let z = DensityMatrix::from_pure(&ket(&[1.0, 0.0])).unwrap();
        assert_eq!(
            bob_attack_analyze(&z, &z, &ket(&[0.0, 1.0]), Split::trivial(2)),
            Err(AttackError::OutsideSupport)
        );
    }

    #[test]
    fn alice_attack_examples() {
        let z = DensityMatrix::from_pure(&ket(&[1.0, 0.0])).unwrap();
        let s = alice_cheat_prepare(&z, &z).unwrap();
        assert!((s.pass_probability - 1.0).abs() < 1e-9);

        let o = DensityMatrix::from_pure(&ket(&[0.0, 1.0])).unwrap();
        let s = alice_cheat_prepare(&z, &o).unwrap();
        assert!((s.pass_probability - 0.5).abs() < 1e-9);

        let (a, b) = diagonal_model(0.885);
        let s = alice_cheat_prepare(&a, &b).unwrap();
        // (1 + 2 sqrt(0.885 * 0.115)) / 2
        assert!((s.pass_probability - 0.819_021_942_818_985_3).abs() < 1e-9);
        let cross = s.psi0.inner(&s.psi1).unwrap().re;
        assert!((s.normalization - (2.0 + 2.0 * cross).sqrt()).abs() < 1e-12);
        // unveiling one is as good as unveiling zero
        let p1 = s.psi1.inner(&s.cheat_state).unwrap().norm_sqr();
        assert!((p1 - s.pass_probability).abs() < 1e-9);
    }

    #[test]
    fn ensemble_attack_agrees_with_spectral_attack() {
        let e0 = Ensemble::new(vec![(0.5, ket(&[1.0, 0.0])), (0.5, ket(&[H, -H]))]).unwrap();
        let e1 = Ensemble::new(vec![(0.5, ket(&[0.0, 1.0])), (0.5, ket(&[H, H]))]).unwrap();
        let (r0, r1) = hbc_pair();
        let spectral = alice_cheat_prepare(&r0, &r1).unwrap();
        let ensemble = alice_cheat_prepare_ensemble(&e0, &e1).unwrap();
        let f = fidelity(&r0, &r1).unwrap();
        assert!((spectral.pass_probability - (1.0 + f) / 2.0).abs() < 1e-9);
        assert!((ensemble.attack.pass_probability - (1.0 + f) / 2.0).abs() < 1e-9);
        let split = ensemble.attack.split;
        let red0 = ensemble.attack.psi0.reduced_system(split).unwrap();
        let red1 = ensemble.attack.psi1.reduced_system(split).unwrap();
        assert!(red0.matrix().max_abs_diff(r0.matrix()).unwrap() < 1e-9);
        assert!(red1.matrix().max_abs_diff(r1.matrix()).unwrap() < 1e-9);
        // the rotated ancilla basis is orthonormal
        let b = &ensemble.unveil_basis[1];
        for i in 0..b.len() {
            for j in 0..b.len() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((b[i].inner(&b[j]).unwrap() - Complex::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn ensemble_attack_with_unequal_sizes() {
        let e0 = Ensemble::new(vec![(1.0, ket(&[1.0, 0.0, 0.0]))]).unwrap();
        let e1 = Ensemble::new(vec![
            (0.5, ket(&[0.0, 1.0, 0.0])),
            (0.25, ket(&[0.6, 0.0, 0.8])),
            (0.25, ket(&[0.0, 0.0, 1.0])),
        ])
        .unwrap();
        let cheat = alice_cheat_prepare_ensemble(&e0, &e1).unwrap();
        let f = fidelity(&e0.density().unwrap(), &e1.density().unwrap()).unwrap();
        assert!((cheat.attack.pass_probability - (1.0 + f) / 2.0).abs() < 1e-9);
        assert_eq!(cheat.attack.split, Split::new(3, 3));
    }
}
