//! Two-qubit states, their Bell-diagonal parametrization, purifications and the
//! eavesdropper's conditional ensemble after z-basis measurements.

use num_traits::Num;
use thiserror::Error;

use crate::qlin::{
    herm_eig, partial_trace, partial_transpose, CMatrix, CVector, LinalgError, Subsystem, C64,
};

/// Validation tolerance for density matrices (Hermiticity, positivity, trace).
pub const STATE_TOL: f64 = 1e-10;
/// Eigenvalues above this count towards the purification rank.
pub const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error("invalid Bell-diagonal weights: {0}")]
    InvalidBellWeights(String),
    #[error("invalid purification: {0}")]
    InvalidPurification(String),
    #[error("purification is not in Bell-diagonal form: {0}")]
    NotBellForm(String),
    #[error("equal-outcome overlap undefined: Eve's equal-outcome states vanish")]
    DegenerateOverlap,
    #[error("Bob's error probability is 1; the advantage ratio is undefined")]
    CertainError,
    #[error("invalid probability table: {0}")]
    InvalidDistribution(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// The four Bell states, in the ordering used for Bell-diagonal weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BellIndex {
    PhiPlus,
    PsiPlus,
    PsiMinus,
    PhiMinus,
}

impl BellIndex {
    pub const ALL: [BellIndex; 4] = [
        BellIndex::PhiPlus,
        BellIndex::PsiPlus,
        BellIndex::PsiMinus,
        BellIndex::PhiMinus,
    ];

    pub fn position(self) -> usize {
        self as usize
    }
}

pub fn bell_state(index: BellIndex) -> CVector {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    match index {
        BellIndex::PhiPlus => CVector::from_real(&[r, 0.0, 0.0, r]),
        BellIndex::PsiPlus => CVector::from_real(&[0.0, r, r, 0.0]),
        BellIndex::PsiMinus => CVector::from_real(&[0.0, r, -r, 0.0]),
        BellIndex::PhiMinus => CVector::from_real(&[r, 0.0, 0.0, -r]),
    }
}

/// A Pauli operator applied on Bob's qubit. Each one permutes the Bell basis
/// by a pair of transpositions, which is how weights are brought into
/// canonical order without leaving the Bell-diagonal family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LocalPauli {
    I,
    X,
    Y,
    Z,
}

impl LocalPauli {
    pub fn matrix(self) -> CMatrix {
        let [x, y, z] = crate::qlin::paulis();
        match self {
            LocalPauli::I => CMatrix::identity(2),
            LocalPauli::X => x,
            LocalPauli::Y => y,
            LocalPauli::Z => z,
        }
    }

    /// Bell position that lands on position `i` after applying `1 ⊗ self`.
    /// The map is an involution.
    pub fn bell_permutation(self) -> [usize; 4] {
        match self {
            LocalPauli::I => [0, 1, 2, 3],
            LocalPauli::X => [1, 0, 3, 2],
            LocalPauli::Y => [2, 3, 0, 1],
            LocalPauli::Z => [3, 2, 1, 0],
        }
    }

    fn moving_to_front(index: usize) -> LocalPauli {
        [LocalPauli::I, LocalPauli::X, LocalPauli::Y, LocalPauli::Z][index]
    }
}

/// Bell-diagonal weights `(Λ1, Λ2, Λ3, Λ4)` on `(Φ+, Ψ+, Ψ−, Φ−)`, with
/// `Λ1` maximal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellDiagonal {
    lambdas: [f64; 4],
    applied: LocalPauli,
}

impl BellDiagonal {
    /// Validates raw weights and canonicalizes them. If the largest weight is
    /// not on `Φ+`, the Bob-side Pauli that moves it there is applied and
    /// recorded.
    pub fn new(raw: [f64; 4]) -> Result<Self, StateError> {
        if let Some(bad) = raw.iter().find(|l| !(0.0..=1.0).contains(*l)) {
            return Err(StateError::InvalidBellWeights(format!(
                "weight {bad} outside [0, 1]"
            )));
        }
        let sum: f64 = raw.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(StateError::InvalidBellWeights(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        let mut top = 0;
        for i in 1..4 {
            if raw[i] > raw[top] {
                top = i;
            }
        }
        let applied = LocalPauli::moving_to_front(top);
        let perm = applied.bell_permutation();
        let lambdas = [raw[perm[0]], raw[perm[1]], raw[perm[2]], raw[perm[3]]];
        Ok(Self { lambdas, applied })
    }

    pub fn lambdas(&self) -> [f64; 4] {
        self.lambdas
    }

    /// The Bob-side Pauli used to reach canonical order.
    pub fn applied_pauli(&self) -> LocalPauli {
        self.applied
    }

    pub fn state(&self) -> TwoQubitState {
        bell_diagonal_state(self)
    }
}

/// Density matrix `ρ_AB` of two qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    rho: CMatrix,
}

impl TwoQubitState {
    pub fn new(rho: CMatrix) -> Result<Self, StateError> {
        if rho.rows() != 4 || rho.cols() != 4 {
            return Err(StateError::InvalidDensity(format!(
                "expected 4x4, found {}x{}",
                rho.rows(),
                rho.cols()
            )));
        }
        let defect = rho.hermiticity_defect();
        if defect.is_nan() || defect > STATE_TOL {
            return Err(StateError::InvalidDensity(format!(
                "not Hermitian (defect {defect:e})"
            )));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(StateError::InvalidDensity(format!("trace {tr} != 1")));
        }
        let min = herm_eig(&rho)?.min();
        if min < -STATE_TOL {
            return Err(StateError::InvalidDensity(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(Self {
            rho: rho.hermitian_part(),
        })
    }

    pub fn from_pure(psi: &CVector) -> Result<Self, StateError> {
        let v = psi
            .normalized()
            .ok_or_else(|| StateError::InvalidDensity("zero state vector".into()))?;
        Self::new(v.projector())
    }

    pub fn maximally_mixed() -> Self {
        Self {
            rho: CMatrix::identity(4).scale_real(0.25),
        }
    }

    /// `p|Φ+⟩⟨Φ+| + (1−p) I/4`.
    pub fn werner(p: f64) -> Result<Self, StateError> {
        let phi = bell_state(BellIndex::PhiPlus).projector().scale_real(p);
        Self::new(&phi + &CMatrix::identity(4).scale_real((1.0 - p) / 4.0))
    }

    pub fn rho(&self) -> &CMatrix {
        &self.rho
    }

    pub fn into_rho(self) -> CMatrix {
        self.rho
    }

    /// Weights `⟨Bᵢ|ρ|Bᵢ⟩` in Bell order, not canonicalized.
    pub fn bell_weights(&self) -> [f64; 4] {
        BellIndex::ALL.map(|b| {
            let v = bell_state(b);
            v.inner(&self.rho.matvec(&v)).re
        })
    }

    /// Largest entry of `ρ − Σ wᵢ |Bᵢ⟩⟨Bᵢ|` with `wᵢ` the Bell weights.
    pub fn bell_residual(&self) -> f64 {
        let w = self.bell_weights();
        self.rho.max_abs_diff(&bell_mixture(w))
    }
}

fn bell_mixture(w: [f64; 4]) -> CMatrix {
    let mut rho = CMatrix::zeros(4, 4);
    for (b, wi) in BellIndex::ALL.iter().zip(w) {
        rho = &rho + &bell_state(*b).projector().scale_real(wi);
    }
    rho
}

pub fn bell_diagonal_state(bd: &BellDiagonal) -> TwoQubitState {
    TwoQubitState {
        rho: bell_mixture(bd.lambdas).hermitian_part(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EntanglementVerdict {
    Entangled,
    Separable,
    Boundary,
}

/// Smallest eigenvalue of the partial transpose on Bob's qubit.
pub fn pt_min_eigenvalue(rho: &CMatrix) -> Result<f64, LinalgError> {
    let pt = partial_transpose(rho, Subsystem::B)?;
    Ok(herm_eig(&pt)?.min())
}

/// PPT test, exact for two qubits.
pub fn is_entangled(s: &TwoQubitState, tol: f64) -> EntanglementVerdict {
    let min = pt_min_eigenvalue(&s.rho).expect("valid 4x4 state");
    classify_margin(min, tol)
}

pub(crate) fn classify_margin(min: f64, tol: f64) -> EntanglementVerdict {
    if min.abs() <= tol {
        EntanglementVerdict::Boundary
    } else if min < 0.0 {
        EntanglementVerdict::Entangled
    } else {
        EntanglementVerdict::Separable
    }
}

/// `Λ1 > 1/2`.
pub fn is_entangled_bell(bd: &BellDiagonal) -> bool {
    entanglement_condition(bd.lambdas)
}

/// `Λ1 > 1/2` over any ordered field, for exact checks.
pub fn entanglement_condition<T: Num + PartialOrd + Copy>(l: [T; 4]) -> bool {
    let two = T::one() + T::one();
    l[0] > T::one() / two
}

/// `(Λ2+Λ3)/(Λ1+Λ4) < (Λ1−Λ4)/(Λ1+Λ4)`, the advantage-distillation condition
/// written in Bell weights (canonical order assumed).
pub fn advantage_condition<T: Num + PartialOrd + Copy>(l: [T; 4]) -> bool {
    let keep = l[0] + l[3];
    if keep == T::zero() {
        return false;
    }
    let lhs = (l[1] + l[2]) / keep;
    let rhs = if l[0] >= l[3] {
        (l[0] - l[3]) / keep
    } else {
        (l[3] - l[0]) / keep
    };
    lhs < rhs
}

/// Pure state `|Ψ_ABE⟩` whose reduction to AB is a given `ρ_AB`. Components
/// are indexed `ab * eve_dim + e`.
#[derive(Debug, Clone, PartialEq)]
pub struct Purification {
    state: CVector,
    eve_dim: usize,
}

impl Purification {
    pub fn new(state: CVector, eve_dim: usize) -> Result<Self, StateError> {
        if eve_dim == 0 || state.dim() != 4 * eve_dim {
            return Err(StateError::InvalidPurification(format!(
                "vector of dimension {} does not match 4 x {eve_dim}",
                state.dim()
            )));
        }
        let norm = state.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(StateError::InvalidPurification(format!(
                "norm {norm} != 1"
            )));
        }
        Ok(Self { state, eve_dim })
    }

    pub fn state(&self) -> &CVector {
        &self.state
    }

    pub fn eve_dim(&self) -> usize {
        self.eve_dim
    }

    /// `tr_E |Ψ⟩⟨Ψ|`.
    pub fn reduced(&self) -> CMatrix {
        partial_trace(&self.state.projector(), (4, self.eve_dim), Subsystem::A)
            .expect("dimensions fixed at construction")
    }

    /// `(⟨ab| ⊗ 1)|Ψ⟩`, Eve's unnormalized state given outcomes `a`, `b`.
    pub fn conditional(&self, a: u8, b: u8) -> CVector {
        let k = 2 * a as usize + b as usize;
        let data = (0..self.eve_dim)
            .map(|e| self.state[k * self.eve_dim + e])
            .collect();
        CVector::new(data).expect("finite entries")
    }
}

/// Purification through the spectral decomposition, `Σ √rᵢ |i⟩|i_e⟩`.
pub fn purify(s: &TwoQubitState) -> Purification {
    let eig = herm_eig(&s.rho).expect("valid state is Hermitian");
    let kept: Vec<(f64, &CVector)> = eig
        .eigenvalues
        .iter()
        .zip(&eig.eigenvectors)
        .filter(|(l, _)| **l > RANK_TOL)
        .map(|(l, v)| (*l, v))
        .collect();
    let eve_dim = kept.len().max(1);
    let mut data = vec![C64::new(0.0, 0.0); 4 * eve_dim];
    for (e, (r, v)) in kept.iter().enumerate() {
        let amp = r.sqrt();
        for ab in 0..4 {
            data[ab * eve_dim + e] = v[ab] * amp;
        }
    }
    let state = CVector::new(data).expect("finite");
    let state = state.normalized().expect("non-zero spectrum");
    Purification { state, eve_dim }
}

/// `Σ √Λᵢ |Bᵢ⟩|i⟩` with Eve holding the Bell label.
pub fn purification_from_bell_diagonal(bd: &BellDiagonal) -> Purification {
    let mut state = CVector::zeros(16);
    for (i, b) in BellIndex::ALL.iter().enumerate() {
        let amp = bd.lambdas[i].sqrt();
        let bell = bell_state(*b);
        for ab in 0..4 {
            state[ab * 4 + i] += bell[ab] * amp;
        }
    }
    Purification { state, eve_dim: 4 }
}

/// Eve's unnormalized conditional states after Alice and Bob measure z.
#[derive(Debug, Clone, PartialEq)]
pub struct EveEnsemble {
    pub e00: CVector,
    pub e11: CVector,
    pub e01: CVector,
    pub e10: CVector,
    /// `|⟨e0|e1⟩|` for the normalized equal-outcome states.
    pub overlap: f64,
    /// Bob's single-round error probability.
    pub eps_b: f64,
}

impl EveEnsemble {
    pub fn from_bell_diagonal(bd: &BellDiagonal) -> Result<Self, StateError> {
        eve_conditionals(&purification_from_bell_diagonal(bd))
    }

    pub fn conditional(&self, a: u8, b: u8) -> &CVector {
        match (a, b) {
            (0, 0) => &self.e00,
            (1, 1) => &self.e11,
            (0, 1) => &self.e01,
            (1, 0) => &self.e10,
            _ => panic!("outcomes are bits"),
        }
    }

    /// Normalized equal-outcome states `|e0⟩`, `|e1⟩` as 2-vectors on
    /// `span{|1⟩, |4⟩}`.
    pub fn equal_outcome_pair(&self) -> (CVector, CVector) {
        let restrict = |v: &CVector| {
            CVector::new(vec![v[0], v[3]])
                .expect("finite")
                .normalized()
                .expect("non-degenerate ensemble")
        };
        (restrict(&self.e00), restrict(&self.e11))
    }
}

/// Eve's conditional ensemble for a purification in Bell-label form.
pub fn eve_conditionals(p: &Purification) -> Result<EveEnsemble, StateError> {
    if p.eve_dim != 4 {
        return Err(StateError::NotBellForm(format!(
            "Eve dimension {} (expected 4)",
            p.eve_dim
        )));
    }
    let e00 = p.conditional(0, 0);
    let e11 = p.conditional(1, 1);
    let e01 = p.conditional(0, 1);
    let e10 = p.conditional(1, 0);

    let mut defect: f64 = 0.0;
    for x in [&e00, &e11] {
        for y in [&e01, &e10] {
            defect = defect.max(x.inner(y).norm());
        }
        defect = defect.max(x[1].norm()).max(x[2].norm());
    }
    for y in [&e01, &e10] {
        defect = defect.max(y[0].norm()).max(y[3].norm());
    }
    if defect > STATE_TOL {
        return Err(StateError::NotBellForm(format!(
            "equal/unequal outcome subspaces overlap by {defect:e}"
        )));
    }

    let n0 = e00.norm();
    let n1 = e11.norm();
    if n0 <= 1e-15 || n1 <= 1e-15 {
        return Err(StateError::DegenerateOverlap);
    }
    let overlap = (e00.inner(&e11).norm() / (n0 * n1)).min(1.0);
    let eps_b = e01.norm_sqr() + e10.norm_sqr();
    Ok(EveEnsemble {
        e00,
        e11,
        e01,
        e10,
        overlap,
        eps_b,
    })
}

/// `ε_B/(1−ε_B) < |⟨e1|e0⟩|`.
pub fn security_condition(ens: &EveEnsemble) -> Result<bool, StateError> {
    if ens.eps_b >= 1.0 {
        return Err(StateError::CertainError);
    }
    Ok(ens.eps_b / (1.0 - ens.eps_b) < ens.overlap)
}

/// Joint distribution `P(a, b)` of two bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointTable {
    p: [[f64; 2]; 2],
}

impl JointTable {
    pub fn new(p: [[f64; 2]; 2]) -> Result<Self, StateError> {
        if p.iter().flatten().any(|x| x.is_nan() || *x < -1e-15) {
            return Err(StateError::InvalidDistribution(
                "negative or non-finite entry".into(),
            ));
        }
        let sum: f64 = p.iter().flatten().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(StateError::InvalidDistribution(format!(
                "entries sum to {sum}"
            )));
        }
        Ok(Self {
            p: p.map(|r| r.map(|x| x.max(0.0))),
        })
    }

    pub fn get(&self, a: u8, b: u8) -> f64 {
        self.p[a as usize][b as usize]
    }

    pub fn probabilities(&self) -> [[f64; 2]; 2] {
        self.p
    }

    pub fn disagreement(&self) -> f64 {
        self.p[0][1] + self.p[1][0]
    }
}

pub fn z_measurement_distribution(s: &TwoQubitState) -> JointTable {
    let p = [0, 1].map(|a| [0, 1].map(|b| s.rho[(2 * a + b, 2 * a + b)].re));
    JointTable::new(p).expect("diagonal of a valid state is a distribution")
}

fn entropy_bits(ps: impl IntoIterator<Item = f64>) -> f64 {
    ps.into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum()
}

/// Shannon mutual information `I(A:B)` in bits.
pub fn mutual_info_ab(p: &JointTable) -> f64 {
    let t = p.p;
    let pa = [t[0][0] + t[0][1], t[1][0] + t[1][1]];
    let pb = [t[0][0] + t[1][0], t[0][1] + t[1][1]];
    let joint = entropy_bits(t.iter().flatten().copied());
    (entropy_bits(pa) + entropy_bits(pb) - joint).max(0.0)
}
