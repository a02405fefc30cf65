//! Pure states, density matrices, binary projective measurements, and the
//! two distance measures between density matrices.

use std::fmt;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::qmath::{
    eig_hermitian, sqrtm_psd, svd, trace_norm, Complex, ComplexMatrix, ComplexVector, QmathError,
    HERMITIAN_TOL, PSD_TOL,
};

/// Tolerance on the unit norm of pure states and the unit trace of density matrices.
pub const NORM_TOL: f64 = 1e-9;
/// Eigenvalues of `rho0 - rho1` with magnitude below this go to the `P0` eigenspace.
pub const HELSTROM_TIE_TOL: f64 = 1e-10;
/// A projected state with smaller norm cannot be renormalized.
pub const DEGENERATE_NORM: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("trace is {trace}, expected 1")]
    NotUnitTrace { trace: f64 },
    #[error("invalid bipartite split {ancilla}x{system} for dimension {dim}")]
    InvalidSplit {
        ancilla: usize,
        system: usize,
        dim: usize,
    },
    #[error("invalid projector pair: {0}")]
    InvalidProjectors(&'static str),
    #[error("projected state has norm {norm:e} and cannot be normalized")]
    DegenerateOutcome { norm: f64 },
    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),
    #[error(transparent)]
    Math(#[from] QmathError),
}

/// One classical bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bit {
    Zero,
    One,
}

impl Bit {
    pub const BOTH: [Bit; 2] = [Bit::Zero, Bit::One];

    pub fn index(self) -> usize {
        match self {
            Bit::Zero => 0,
            Bit::One => 1,
        }
    }

    pub fn flip(self) -> Bit {
        match self {
            Bit::Zero => Bit::One,
            Bit::One => Bit::Zero,
        }
    }
}

impl From<bool> for Bit {
    fn from(b: bool) -> Self {
        if b {
            Bit::One
        } else {
            Bit::Zero
        }
    }
}

impl fmt::Display for Bit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

impl Serialize for Bit {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.index() as u8)
    }
}

/// A bipartite split `ancilla ⊗ system` with explicit factor dimensions.
///
/// Composite index layout is `ancilla_index * system + system_index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Split {
    pub ancilla: usize,
    pub system: usize,
}

impl Split {
    pub fn new(ancilla: usize, system: usize) -> Self {
        Self { ancilla, system }
    }

    /// No ancilla: the whole space is the system.
    pub fn trivial(system: usize) -> Self {
        Self { ancilla: 1, system }
    }

    pub fn total(&self) -> usize {
        self.ancilla * self.system
    }

    fn check(&self, dim: usize) -> Result<(), StateError> {
        if self.ancilla == 0
            || self.system == 0
            || self.ancilla.checked_mul(self.system) != Some(dim)
        {
            return Err(StateError::InvalidSplit {
                ancilla: self.ancilla,
                system: self.system,
                dim,
            });
        }
        Ok(())
    }
}

fn same_dim(expected: usize, found: usize) -> Result<(), StateError> {
    if expected != found {
        return Err(StateError::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// A unit-norm state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    vector: ComplexVector,
}

impl PureState {
    pub fn new(vector: ComplexVector) -> Result<Self, StateError> {
        let norm = vector.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(StateError::NotNormalized { norm });
        }
        Ok(Self { vector })
    }

    /// Normalizes `vector`; fails when its norm is below [`DEGENERATE_NORM`].
    pub fn normalize(vector: ComplexVector) -> Result<Self, StateError> {
        let norm = vector.norm();
        if norm < DEGENERATE_NORM {
            return Err(StateError::DegenerateOutcome { norm });
        }
        Ok(Self {
            vector: vector.scale(Complex::new(1.0 / norm, 0.0)),
        })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self, StateError> {
        Self::new(ComplexVector::from_real(amplitudes)?)
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self, StateError> {
        Ok(Self {
            vector: ComplexVector::basis(dim, index)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.vector.dim()
    }

    pub fn vector(&self) -> &ComplexVector {
        &self.vector
    }

    pub fn amplitudes(&self) -> &[Complex] {
        self.vector.as_slice()
    }

    pub fn inner(&self, other: &PureState) -> Result<Complex, StateError> {
        same_dim(self.dim(), other.dim())?;
        Ok(self.vector.inner(&other.vector)?)
    }

    /// `|self> ⊗ |other>`.
    pub fn kron(&self, other: &PureState) -> Result<PureState, StateError> {
        Ok(PureState {
            vector: self.vector.kron(&other.vector)?,
        })
    }

    /// `|psi><psi|`.
    pub fn projector(&self) -> Result<ComplexMatrix, StateError> {
        Ok(ComplexMatrix::outer(&self.vector, &self.vector)?)
    }

    /// Same ray: `|<a|b>| = 1` within `tol`.
    pub fn same_ray(&self, other: &PureState, tol: f64) -> bool {
        self.inner(other)
            .map(|z| (z.norm() - 1.0).abs() <= tol)
            .unwrap_or(false)
    }

    /// Reduced density matrix of the system factor.
    pub fn reduced_system(&self, split: Split) -> Result<DensityMatrix, StateError> {
        split.check(self.dim())?;
        let psi = self.amplitudes();
        let d = split.system;
        let rho = DMatrix::from_fn(d, d, |j, k| {
            (0..split.ancilla)
                .map(|a| psi[a * d + j] * psi[a * d + k].conj())
                .sum::<Complex>()
        });
        DensityMatrix::new(ComplexMatrix::from_inner(rho)?)
    }
}

/// A Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self, StateError> {
        let deviation = matrix.hermitian_deviation()?;
        if deviation > HERMITIAN_TOL {
            return Err(QmathError::NotHermitian { deviation }.into());
        }
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > NORM_TOL {
            return Err(StateError::NotUnitTrace { trace });
        }
        let eig = eig_hermitian(&matrix)?;
        if let Some(&lowest) = eig.values.last() {
            if lowest < -PSD_TOL {
                return Err(QmathError::NotPsd { eigenvalue: lowest }.into());
            }
        }
        Ok(Self { matrix })
    }

    pub fn from_pure(state: &PureState) -> Result<Self, StateError> {
        Ok(Self {
            matrix: state.projector()?,
        })
    }

    /// `sum_i p_i |psi_i><psi_i|`.
    pub fn mixture<'a>(
        members: impl IntoIterator<Item = (f64, &'a PureState)>,
    ) -> Result<Self, StateError> {
        let mut acc: Option<ComplexMatrix> = None;
        for (p, state) in members {
            let term = state.projector()?.scale(Complex::new(p, 0.0));
            acc = Some(match acc {
                None => term,
                Some(m) => m.add(&term)?,
            });
        }
        let matrix = acc.ok_or_else(|| StateError::InvalidEnsemble("empty ensemble".into()))?;
        Self::new(matrix)
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `tr(P rho)` for a Hermitian operator `P`.
    pub fn expectation(&self, op: &ComplexMatrix) -> Result<f64, StateError> {
        Ok(op.matmul(&self.matrix)?.trace().re)
    }
}

/// A weighted list of pure states, as used by an honest committer.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    members: Vec<(f64, PureState)>,
}

impl Ensemble {
    pub fn new(members: Vec<(f64, PureState)>) -> Result<Self, StateError> {
        let Some(first) = members.first() else {
            return Err(StateError::InvalidEnsemble("empty ensemble".into()));
        };
        let dim = first.1.dim();
        for (p, s) in &members {
            same_dim(dim, s.dim())?;
            if !(0.0..=1.0).contains(p) {
                return Err(StateError::InvalidEnsemble(format!(
                    "probability {p} outside [0, 1]"
                )));
            }
        }
        let total: f64 = members.iter().map(|(p, _)| p).sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(StateError::InvalidEnsemble(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self { members })
    }

    pub fn dim(&self) -> usize {
        self.members[0].1.dim()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[(f64, PureState)] {
        &self.members
    }

    pub fn density(&self) -> Result<DensityMatrix, StateError> {
        DensityMatrix::mixture(self.members.iter().map(|(p, s)| (*p, s)))
    }

    /// Draws a member index according to the selection probabilities.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, (p, _)) in self.members.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        // rounding left u above the cumulative sum; take the last member with weight
        self.members
            .iter()
            .rposition(|(p, _)| *p > 0.0)
            .unwrap_or(self.members.len() - 1)
    }
}

/// A complete pair of orthogonal projectors `{P0, P1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorPair {
    p0: ComplexMatrix,
    p1: ComplexMatrix,
}

impl ProjectorPair {
    /// Validates Hermiticity, idempotence, completeness and orthogonality within 1e-9.
    pub fn new(p0: ComplexMatrix, p1: ComplexMatrix) -> Result<Self, StateError> {
        const TOL: f64 = 1e-9;
        if p0.shape() != p1.shape() || !p0.is_square() {
            return Err(StateError::InvalidProjectors("shape"));
        }
        for p in [&p0, &p1] {
            if !p.is_hermitian(TOL) {
                return Err(StateError::InvalidProjectors("not Hermitian"));
            }
            if p.matmul(p)?.max_abs_diff(p)? > TOL {
                return Err(StateError::InvalidProjectors("not idempotent"));
            }
        }
        let id = ComplexMatrix::identity(p0.rows())?;
        if p0.add(&p1)?.max_abs_diff(&id)? > TOL {
            return Err(StateError::InvalidProjectors("P0 + P1 != I"));
        }
        let zero = ComplexMatrix::zeros(p0.rows(), p0.rows())?;
        if p0.matmul(&p1)?.max_abs_diff(&zero)? > TOL {
            return Err(StateError::InvalidProjectors("P0 P1 != 0"));
        }
        Ok(Self { p0, p1 })
    }

    pub fn dim(&self) -> usize {
        self.p0.rows()
    }

    pub fn p0(&self) -> &ComplexMatrix {
        &self.p0
    }

    pub fn p1(&self) -> &ComplexMatrix {
        &self.p1
    }

    pub fn projector(&self, bit: Bit) -> &ComplexMatrix {
        match bit {
            Bit::Zero => &self.p0,
            Bit::One => &self.p1,
        }
    }

    /// `(I_ancilla ⊗ P_bit) |v>` without forming the Kronecker product.
    pub fn apply_on_system(
        &self,
        bit: Bit,
        split: Split,
        v: &ComplexVector,
    ) -> Result<ComplexVector, StateError> {
        split.check(v.dim())?;
        same_dim(self.dim(), split.system)?;
        let p = self.projector(bit).as_inner();
        let d = split.system;
        let src = v.as_slice();
        let mut out = Vec::with_capacity(v.dim());
        for a in 0..split.ancilla {
            let block = &src[a * d..(a + 1) * d];
            for r in 0..d {
                out.push((0..d).map(|c| p[(r, c)] * block[c]).sum::<Complex>());
            }
        }
        Ok(ComplexVector::new(out)?)
    }

    /// `tr(P0 rho0)/2 + tr(P1 rho1)/2`.
    pub fn success_probability(
        &self,
        rho0: &DensityMatrix,
        rho1: &DensityMatrix,
    ) -> Result<f64, StateError> {
        same_dim(self.dim(), rho0.dim())?;
        same_dim(self.dim(), rho1.dim())?;
        Ok(0.5 * rho0.expectation(&self.p0)? + 0.5 * rho1.expectation(&self.p1)?)
    }
}

/// Result of a two-outcome projective measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    pub outcome: Bit,
    pub post_state: PureState,
    pub outcome_probability: f64,
}

/// `tr|a - b| / 2`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64, StateError> {
    same_dim(a.dim(), b.dim())?;
    let diff = a.matrix.sub(&b.matrix)?;
    Ok((trace_norm(&diff)? / 2.0).clamp(0.0, 1.0))
}

/// `tr sqrt(sqrt(a) b sqrt(a))`, evaluated as the sum of the singular
/// values of `sqrt(a) sqrt(b)`.
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64, StateError> {
    same_dim(a.dim(), b.dim())?;
    let product = sqrtm_psd(&a.matrix)?.matmul(&sqrtm_psd(&b.matrix)?)?;
    Ok(svd(&product)
        .singular_values
        .iter()
        .sum::<f64>()
        .clamp(0.0, 1.0))
}

/// Optimal binary discrimination measurement for `rho0` against `rho1`.
///
/// `P0` projects onto the nonnegative eigenspace of `rho0 - rho1`, with
/// eigenvalues in `[-1e-10, 1e-10]` assigned to `P0`.
pub fn helstrom_projectors(
    rho0: &DensityMatrix,
    rho1: &DensityMatrix,
) -> Result<ProjectorPair, StateError> {
    same_dim(rho0.dim(), rho1.dim())?;
    let diff = rho0.matrix.sub(&rho1.matrix)?;
    let eig = eig_hermitian(&diff)?;
    Ok(ProjectorPair {
        p0: eig.projector(|x| x >= -HELSTROM_TIE_TOL),
        p1: eig.projector(|x| x < -HELSTROM_TIE_TOL),
    })
}

/// Draws `true` with probability `p`; probabilities within 1e-12 of 0 or 1 are exact.
pub(crate) fn bernoulli<R: Rng + ?Sized>(rng: &mut R, p: f64) -> bool {
    if p >= 1.0 - 1e-12 {
        return true;
    }
    if p <= 1e-12 {
        return false;
    }
    rng.random::<f64>() < p
}

/// Projective measurement of a pure state.
pub fn measure<R: Rng + ?Sized>(
    state: &PureState,
    pair: &ProjectorPair,
    rng: &mut R,
) -> Result<MeasurementOutcome, StateError> {
    same_dim(pair.dim(), state.dim())?;
    measure_system(state, pair, Split::trivial(state.dim()), rng)
}

/// Measures `I_ancilla ⊗ {P0, P1}` on a composite pure state.
pub fn measure_system<R: Rng + ?Sized>(
    state: &PureState,
    pair: &ProjectorPair,
    split: Split,
    rng: &mut R,
) -> Result<MeasurementOutcome, StateError> {
    let projected0 = pair.apply_on_system(Bit::Zero, split, state.vector())?;
    let p0 = projected0.norm_squared().clamp(0.0, 1.0);
    let (outcome, projected, probability) = if bernoulli(rng, p0) {
        (Bit::Zero, projected0, p0)
    } else {
        let projected1 = pair.apply_on_system(Bit::One, split, state.vector())?;
        (Bit::One, projected1, 1.0 - p0)
    };
    Ok(MeasurementOutcome {
        outcome,
        post_state: PureState::normalize(projected)?,
        outcome_probability: probability,
    })
}

/// `|<original|post>|^2`, the probability that an intactness check passes.
pub fn overlap_check_pass_probability(
    original: &PureState,
    post: &PureState,
) -> Result<f64, StateError> {
    Ok(original.inner(post)?.norm_sqr().clamp(0.0, 1.0))
}

/// Purification of `ancilla ⊗ system` whose amplitude at `(i, j)` is `A[j][i]`,
/// so that tracing the ancilla leaves `A A^dagger`.
fn purification_from_operator(a: &DMatrix<Complex>) -> Result<PureState, StateError> {
    let d = a.nrows();
    let mut amps = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            amps.push(a[(j, i)]);
        }
    }
    PureState::normalize(ComplexVector::new(amps)?)
}

/// Purifications of `rho0` and `rho1` on `ancilla(d) ⊗ system(d)` whose
/// overlap is real, nonnegative and equal to their fidelity.
pub fn uhlmann_pair(
    rho0: &DensityMatrix,
    rho1: &DensityMatrix,
) -> Result<(PureState, PureState), StateError> {
    same_dim(rho0.dim(), rho1.dim())?;
    let root0 = sqrtm_psd(&rho0.matrix)?;
    let root1 = sqrtm_psd(&rho1.matrix)?;
    // <psi_A|psi_B> = tr(A^dagger B); with sqrt(rho0) sqrt(rho1) = U S V^dagger,
    // B = sqrt(rho1) V U^dagger gives tr(S).
    let cross = svd(&root0.matmul(&root1)?);
    let rotation = cross.v.matmul(&cross.u.adjoint())?;
    let a1 = root1.matmul(&rotation)?;
    let psi0 = purification_from_operator(root0.as_inner())?;
    let psi1 = purification_from_operator(a1.as_inner())?;
    Ok((psi0, psi1))
}

/// Reduced state after tracing out one factor of a bipartite operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    Ancilla,
    System,
}

pub fn partial_trace(
    m: &ComplexMatrix,
    split: Split,
    keep: Keep,
) -> Result<ComplexMatrix, StateError> {
    if !m.is_square() {
        return Err(QmathError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        }
        .into());
    }
    split.check(m.rows())?;
    let (na, ns) = (split.ancilla, split.system);
    let inner = m.as_inner();
    let out = match keep {
        Keep::System => DMatrix::from_fn(ns, ns, |j, k| {
            (0..na).map(|a| inner[(a * ns + j, a * ns + k)]).sum()
        }),
        Keep::Ancilla => DMatrix::from_fn(na, na, |a, b| {
            (0..ns).map(|j| inner[(a * ns + j, b * ns + j)]).sum()
        }),
    };
    Ok(ComplexMatrix::from_inner(out)?)
}
