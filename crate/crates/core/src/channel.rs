//! Qubit channels in Choi form, entanglement-breaking detection, and the
//! link between an entanglement-based scheme and its prepare-and-measure
//! version.
//!
//! Choi convention: `J = (1 ⊗ Υ)(|Φ+⟩⟨Φ+|)`, so `J` is a normalized two-qubit
//! state with `tr_out J = I/2`, and `Υ(σ) = 2 tr_in[(σᵀ ⊗ 1) J]`.

use thiserror::Error;

use crate::filter::{bell_diagonalize, FilterError};
use crate::qlin::{herm_eig, partial_trace, CMatrix, CVector, LinalgError, Subsystem, C64};
use crate::states::{
    bell_state, eve_conditionals, pt_min_eigenvalue, purification_from_bell_diagonal,
    security_condition, BellDiagonal, BellIndex, StateError, TwoQubitState,
};

/// Tolerance for channel validity checks.
pub const CHANNEL_TOL: f64 = 1e-10;
/// Probes must be unit vectors to this precision.
pub const PROBE_TOL: f64 = 1e-12;
/// Branch probabilities below this count as zero.
const ZERO_BRANCH: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("Kraus operators are not trace preserving (residual {0:e})")]
    NotTracePreserving(f64),
    #[error("invalid Kraus set: {0}")]
    InvalidKraus(String),
    #[error("invalid Choi matrix: {0}")]
    InvalidChoi(String),
    #[error("invalid measure-prepare data: {0}")]
    InvalidBreakingData(String),
    #[error("probe must be a unit vector in C^4: {0}")]
    InvalidProbe(String),
    #[error("parameter {name} = {value} outside [0, 1]")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("branch a = {0} has zero probability")]
    ZeroBranch(u8),
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelVerdict {
    Breaking,
    Entangling,
    /// Choi partial-transpose minimum within the tolerance of zero.
    Boundary,
}

/// A qubit channel `Υ`, stored through its Choi state.
#[derive(Debug, Clone)]
pub struct QubitChannel {
    kraus: Option<Vec<CMatrix>>,
    choi: CMatrix,
}

fn check_param(name: &'static str, value: f64) -> Result<(), ChannelError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(ChannelError::InvalidParameter { name, value })
    }
}

/// `(1 ⊗ Υ)(|Φ+⟩⟨Φ+|)` for `Υ(σ) = Σ K σ K†`.
pub fn choi_from_kraus(kraus: &[CMatrix]) -> Result<CMatrix, ChannelError> {
    if kraus.is_empty() {
        return Err(ChannelError::InvalidKraus("empty set".into()));
    }
    let mut completeness = CMatrix::zeros(2, 2);
    for (i, k) in kraus.iter().enumerate() {
        if k.rows() != 2 || k.cols() != 2 {
            return Err(ChannelError::InvalidKraus(format!("operator {i} is not 2x2")));
        }
        completeness = &completeness + &(&k.adjoint() * k);
    }
    let residual = completeness.max_abs_diff(&CMatrix::identity(2));
    if !residual.is_finite() || residual > CHANNEL_TOL {
        return Err(ChannelError::NotTracePreserving(residual));
    }
    let phi = bell_state(BellIndex::PhiPlus).projector();
    let mut choi = CMatrix::zeros(4, 4);
    for k in kraus {
        let lifted = crate::qlin::tensor(&CMatrix::identity(2), k);
        choi = &choi + &lifted.sandwich(&phi);
    }
    Ok(choi.hermitian_part())
}

impl QubitChannel {
    pub fn from_kraus(kraus: Vec<CMatrix>) -> Result<Self, ChannelError> {
        let choi = choi_from_kraus(&kraus)?;
        let mut ch = Self::from_choi(choi)?;
        ch.kraus = Some(kraus);
        Ok(ch)
    }

    pub fn from_choi(choi: CMatrix) -> Result<Self, ChannelError> {
        if choi.rows() != 4 || choi.cols() != 4 {
            return Err(ChannelError::InvalidChoi(format!(
                "shape {}x{}",
                choi.rows(),
                choi.cols()
            )));
        }
        let defect = choi.hermiticity_defect();
        if !defect.is_finite() || defect > CHANNEL_TOL {
            return Err(ChannelError::InvalidChoi(format!("not Hermitian ({defect:e})")));
        }
        let choi = choi.hermitian_part();
        let tr = choi.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > CHANNEL_TOL {
            return Err(ChannelError::InvalidChoi(format!("trace {tr}")));
        }
        let min = herm_eig(&choi)?.min();
        if min < -CHANNEL_TOL {
            return Err(ChannelError::InvalidChoi(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        let input = partial_trace(&choi, (2, 2), Subsystem::A)?;
        let tp = input.max_abs_diff(&CMatrix::identity(2).scale_real(0.5));
        if tp > CHANNEL_TOL {
            return Err(ChannelError::InvalidChoi(format!(
                "not trace preserving ({tp:e})"
            )));
        }
        Ok(Self { kraus: None, choi })
    }

    pub fn identity() -> Self {
        Self::from_kraus(vec![CMatrix::identity(2)]).expect("unitary")
    }

    /// `σ ↦ p σ + (1 − p) I/2`.
    pub fn depolarizing(p: f64) -> Result<Self, ChannelError> {
        check_param("p", p)?;
        let [x, y, z] = crate::qlin::paulis();
        let k0 = ((1.0 + 3.0 * p) / 4.0).sqrt();
        let k = ((1.0 - p) / 4.0).sqrt();
        Self::from_kraus(vec![
            CMatrix::identity(2).scale_real(k0),
            x.scale_real(k),
            y.scale_real(k),
            z.scale_real(k),
        ])
    }

    /// `σ ↦ (1 − p) σ + p ZσZ`.
    pub fn dephasing(p: f64) -> Result<Self, ChannelError> {
        check_param("p", p)?;
        let [_, _, z] = crate::qlin::paulis();
        Self::from_kraus(vec![
            CMatrix::identity(2).scale_real((1.0 - p).sqrt()),
            z.scale_real(p.sqrt()),
        ])
    }

    /// Measure in the z basis and resend the outcome.
    pub fn measure_resend_z() -> Self {
        let p0 = CMatrix::diag_real(&[1.0, 0.0]);
        let p1 = CMatrix::diag_real(&[0.0, 1.0]);
        Self::from_breaking_data(&[(p0.clone(), p0), (p1.clone(), p1)]).expect("valid")
    }

    /// `σ ↦ Σ_k tr(L_k σ) ρ_k` for a POVM `{L_k}` and states `{ρ_k}`.
    pub fn from_breaking_data(parts: &[(CMatrix, CMatrix)]) -> Result<Self, ChannelError> {
        if parts.is_empty() {
            return Err(ChannelError::InvalidBreakingData("empty".into()));
        }
        let mut povm = CMatrix::zeros(2, 2);
        let mut choi = CMatrix::zeros(4, 4);
        for (k, (l, rho)) in parts.iter().enumerate() {
            for (name, m) in [("L", l), ("rho", rho)] {
                if m.rows() != 2 || m.cols() != 2 || !m.is_hermitian(CHANNEL_TOL) {
                    return Err(ChannelError::InvalidBreakingData(format!(
                        "{name}_{k} is not a Hermitian 2x2 matrix"
                    )));
                }
                if herm_eig(m)?.min() < -CHANNEL_TOL {
                    return Err(ChannelError::InvalidBreakingData(format!(
                        "{name}_{k} is not positive"
                    )));
                }
            }
            if (rho.trace() - C64::new(1.0, 0.0)).norm() > CHANNEL_TOL {
                return Err(ChannelError::InvalidBreakingData(format!(
                    "rho_{k} has trace {}",
                    rho.trace()
                )));
            }
            povm = &povm + l;
            choi = &choi + &crate::qlin::tensor(&l.transpose(), rho).scale_real(0.5);
        }
        let residual = povm.max_abs_diff(&CMatrix::identity(2));
        if residual > CHANNEL_TOL {
            return Err(ChannelError::InvalidBreakingData(format!(
                "measurement is incomplete ({residual:e})"
            )));
        }
        Self::from_choi(choi)
    }

    pub fn kraus(&self) -> Option<&[CMatrix]> {
        self.kraus.as_deref()
    }

    pub fn choi(&self) -> &CMatrix {
        &self.choi
    }

    /// `Υ(σ)` for a 2×2 operator.
    pub fn apply(&self, sigma: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(2, 2);
        for k in 0..2 {
            for l in 0..2 {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..2 {
                    for j in 0..2 {
                        acc += sigma[(i, j)] * self.choi[(i * 2 + k, j * 2 + l)];
                    }
                }
                out[(k, l)] = acc * 2.0;
            }
        }
        out
    }
}

/// Input state `|Φ⟩` for distributing entanglement through a channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeState {
    phi: CVector,
}

impl ProbeState {
    pub fn new(phi: CVector) -> Result<Self, ChannelError> {
        if phi.dim() != 4 {
            return Err(ChannelError::InvalidProbe(format!("dimension {}", phi.dim())));
        }
        let n = phi.norm();
        if !n.is_finite() || (n - 1.0).abs() > PROBE_TOL {
            return Err(ChannelError::InvalidProbe(format!("norm {n}")));
        }
        Ok(Self { phi })
    }

    pub fn phi_plus() -> Self {
        Self {
            phi: bell_state(BellIndex::PhiPlus),
        }
    }

    /// `cos θ |00⟩ + sin θ |11⟩`.
    pub fn schmidt(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self {
            phi: CVector::from_real(&[c, 0.0, 0.0, s]),
        }
    }

    pub fn phi(&self) -> &CVector {
        &self.phi
    }
}

/// `(1 ⊗ Υ)(|Φ⟩⟨Φ|)`.
pub fn apply_to_half(ch: &QubitChannel, probe: &ProbeState) -> TwoQubitState {
    let rho = probe.phi.projector();
    let j = &ch.choi;
    let mut out = CMatrix::zeros(4, 4);
    for a in 0..2 {
        for b in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    let mut acc = C64::new(0.0, 0.0);
                    for i in 0..2 {
                        for jj in 0..2 {
                            acc += rho[(a * 2 + i, b * 2 + jj)] * j[(i * 2 + k, jj * 2 + l)];
                        }
                    }
                    out[(a * 2 + k, b * 2 + l)] = acc * 2.0;
                }
            }
        }
    }
    TwoQubitState::new(out.hermitian_part()).expect("channel output of a valid probe")
}

/// Partial-transpose minima at or above this are PPT up to rounding.
const ROUNDING_FLOOR: f64 = -1e-14;

// Measure-and-resend channels sit exactly on the PPT boundary (their Choi
// partial transpose has a zero eigenvalue), so only a negative margin inside
// the tolerance band is reported as undecided.
fn channel_verdict(min: f64, tol: f64) -> ChannelVerdict {
    if min < -tol {
        ChannelVerdict::Entangling
    } else if min >= ROUNDING_FLOOR {
        ChannelVerdict::Breaking
    } else {
        ChannelVerdict::Boundary
    }
}

/// Smallest eigenvalue of the partially transposed Choi state.
pub fn choi_pt_min(ch: &QubitChannel) -> f64 {
    pt_min_eigenvalue(&ch.choi).expect("4x4 Choi")
}

/// PPT test on the Choi state; exact for qubit channels.
pub fn is_entanglement_breaking(ch: &QubitChannel, tol: f64) -> ChannelVerdict {
    channel_verdict(choi_pt_min(ch), tol)
}

/// Searches `|Φ+⟩`, the Choi eigenvectors and a grid of Schmidt states for
/// the probe whose output has the most negative partial transpose. No probe
/// is returned unless the channel is entangling.
pub fn best_probe(ch: &QubitChannel, tol: f64) -> (Option<ProbeState>, ChannelVerdict) {
    let verdict = is_entanglement_breaking(ch, tol);
    if verdict != ChannelVerdict::Entangling {
        return (None, verdict);
    }
    let mut candidates = vec![ProbeState::phi_plus()];
    if let Ok(eig) = herm_eig(&ch.choi) {
        candidates.extend(
            eig.eigenvectors
                .into_iter()
                .filter_map(|v| v.normalized())
                .map(|phi| ProbeState { phi }),
        );
    }
    let grid = 16;
    for k in 1..grid {
        let theta = std::f64::consts::FRAC_PI_2 * k as f64 / grid as f64;
        candidates.push(ProbeState::schmidt(theta));
    }
    let best = candidates
        .into_iter()
        .map(|p| {
            let min = pt_min_eigenvalue(apply_to_half(ch, &p).rho()).unwrap_or(f64::INFINITY);
            (min, p)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, p)| p);
    (best, verdict)
}

/// States Bob receives in the prepare-and-measure picture.
#[derive(Debug, Clone, PartialEq)]
pub struct PmEnsemble {
    /// Normalized `(⟨a|⊗1)|Φ⟩` for `a = 0, 1`.
    pub states: [CVector; 2],
    pub priors: [f64; 2],
}

fn branch(probe: &ProbeState, a: usize) -> CVector {
    CVector::new(vec![probe.phi[2 * a], probe.phi[2 * a + 1]]).expect("finite")
}

pub fn pm_states(probe: &ProbeState) -> Result<PmEnsemble, ChannelError> {
    let mut states = [CVector::zeros(2), CVector::zeros(2)];
    let mut priors = [0.0; 2];
    for a in 0..2 {
        let v = branch(probe, a);
        priors[a] = v.norm_sqr();
        if priors[a] <= ZERO_BRANCH {
            return Err(ChannelError::ZeroBranch(a as u8));
        }
        states[a] = v.normalized().expect("non-zero");
    }
    Ok(PmEnsemble { states, priors })
}

fn normalized_table(p: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let total: f64 = p.iter().flatten().sum();
    p.map(|row| row.map(|x| x / total))
}

/// Largest difference between the z-basis statistics of the
/// entanglement-based scheme and of its prepare-and-measure version, with
/// Bob's filter from the Bell-diagonal normal form applied in both.
pub fn pm_equivalence_check(ch: &QubitChannel, probe: &ProbeState) -> Result<f64, ChannelError> {
    let shared = apply_to_half(ch, probe);
    let fb = bell_diagonalize(&shared)?.operation_b();

    let filtered = crate::qlin::tensor(&CMatrix::identity(2), &fb).sandwich(shared.rho());
    let mut eb = [[0.0; 2]; 2];
    for (a, row) in eb.iter_mut().enumerate() {
        for (b, p) in row.iter_mut().enumerate() {
            *p = filtered[(2 * a + b, 2 * a + b)].re;
        }
    }

    let mut pm = [[0.0; 2]; 2];
    for (a, row) in pm.iter_mut().enumerate() {
        let v = branch(probe, a);
        let prior = v.norm_sqr();
        let Some(psi) = v.normalized().filter(|_| prior > ZERO_BRANCH) else {
            continue;
        };
        let received = fb.sandwich(&ch.apply(&psi.projector()));
        for (b, p) in row.iter_mut().enumerate() {
            *p = prior * received[(b, b)].re;
        }
    }

    let eb = normalized_table(eb);
    let pm = normalized_table(pm);
    Ok(eb
        .iter()
        .flatten()
        .zip(pm.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// Outcome of probing a channel, filtering the shared state and checking
/// the distillation condition.
#[derive(Debug, Clone)]
pub struct ChannelReport {
    pub verdict: ChannelVerdict,
    pub choi_pt_min: f64,
    pub probe: Option<ProbeState>,
    /// Bell weights after filtering, when a probe exists.
    pub lambdas: Option<BellDiagonal>,
    pub p_success: Option<f64>,
    pub key_positive: bool,
}

pub fn analyze_channel(ch: &QubitChannel, tol: f64) -> Result<ChannelReport, ChannelError> {
    let (probe, verdict) = best_probe(ch, tol);
    let mut report = ChannelReport {
        verdict,
        choi_pt_min: choi_pt_min(ch),
        probe: None,
        lambdas: None,
        p_success: None,
        key_positive: false,
    };
    if let Some(p) = probe {
        let shared = apply_to_half(ch, &p);
        let fr = bell_diagonalize(&shared)?;
        let ens = eve_conditionals(&purification_from_bell_diagonal(&fr.lambdas))?;
        report.key_positive = security_condition(&ens)?;
        report.lambdas = Some(fr.lambdas);
        report.p_success = Some(fr.p_success);
        report.probe = Some(p);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_kraus, stream_rng};
    use approx::assert_abs_diff_eq;

    #[test]
    fn choi_examples() {
        let id = choi_from_kraus(&[CMatrix::identity(2)]).unwrap();
        assert!(id.max_abs_diff(&bell_state(BellIndex::PhiPlus).projector()) < 1e-15);
        let full = QubitChannel::depolarizing(0.0).unwrap();
        assert!(full.choi().max_abs_diff(&CMatrix::identity(4).scale_real(0.25)) < 1e-15);
        let deph = QubitChannel::dephasing(0.5).unwrap();
        let expect = &bell_state(BellIndex::PhiPlus).projector().scale_real(0.5)
            + &bell_state(BellIndex::PhiMinus).projector().scale_real(0.5);
        assert!(deph.choi().max_abs_diff(&expect) < 1e-15);
        assert!(matches!(
            choi_from_kraus(&[CMatrix::identity(2).scale_real(0.9)]),
            Err(ChannelError::NotTracePreserving(_))
        ));
    }

    #[test]
    fn choi_validation() {
        assert!(QubitChannel::from_choi(CMatrix::identity(4)).is_err());
        // trace one, PSD, but not trace preserving
        let bad = CMatrix::diag_real(&[0.5, 0.5, 0.0, 0.0]);
        assert!(matches!(
            QubitChannel::from_choi(bad),
            Err(ChannelError::InvalidChoi(_))
        ));
        assert!(QubitChannel::depolarizing(1.5).is_err());
    }

    #[test]
    fn apply_to_half_examples() {
        let out = apply_to_half(&QubitChannel::identity(), &ProbeState::phi_plus());
        assert!(out.rho().max_abs_diff(&bell_state(BellIndex::PhiPlus).projector()) < 1e-15);
        let mut rng = stream_rng(4, 0);
        let ch = QubitChannel::from_kraus(random_kraus(3, &mut rng)).unwrap();
        let out = apply_to_half(&ch, &ProbeState::phi_plus());
        assert!(out.rho().max_abs_diff(ch.choi()) < 1e-15);
        for p in [0.0, 0.2, 0.5, 1.0] {
            let out = apply_to_half(&QubitChannel::depolarizing(p).unwrap(), &ProbeState::phi_plus());
            let werner = TwoQubitState::werner(p).unwrap();
            assert!(out.rho().max_abs_diff(werner.rho()) < 1e-15);
        }
    }

    #[test]
    fn apply_matches_kraus() {
        let mut rng = stream_rng(8, 0);
        let ks = random_kraus(4, &mut rng);
        let ch = QubitChannel::from_kraus(ks.clone()).unwrap();
        let sigma = crate::random::random_pure(2, &mut rng).projector();
        let mut direct = CMatrix::zeros(2, 2);
        for k in &ks {
            direct = &direct + &k.sandwich(&sigma);
        }
        assert!(ch.apply(&sigma).max_abs_diff(&direct) < 1e-14);
    }

    #[test]
    fn entanglement_breaking_examples() {
        assert_eq!(
            is_entanglement_breaking(&QubitChannel::identity(), 1e-9),
            ChannelVerdict::Entangling
        );
        assert_eq!(
            is_entanglement_breaking(&QubitChannel::measure_resend_z(), 1e-9),
            ChannelVerdict::Breaking
        );
        for p in [0.0, 0.2, 0.33, 1.0 / 3.0] {
            let v = is_entanglement_breaking(&QubitChannel::depolarizing(p).unwrap(), 1e-9);
            assert_eq!(v, ChannelVerdict::Breaking, "p = {p}");
        }
        for p in [0.34, 0.5, 1.0] {
            let v = is_entanglement_breaking(&QubitChannel::depolarizing(p).unwrap(), 1e-9);
            assert_eq!(v, ChannelVerdict::Entangling, "p = {p}");
        }
        assert_eq!(
            is_entanglement_breaking(&QubitChannel::depolarizing(1.0 / 3.0 + 1e-9).unwrap(), 1e-9),
            ChannelVerdict::Boundary
        );
    }

    #[test]
    fn depolarizing_threshold_by_bisection() {
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if choi_pt_min(&QubitChannel::depolarizing(mid).unwrap()) < 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert_abs_diff_eq!(0.5 * (lo + hi), 1.0 / 3.0, epsilon = 1e-9);
        let p = 0.5;
        assert_abs_diff_eq!(
            choi_pt_min(&QubitChannel::depolarizing(p).unwrap()),
            (1.0 - 3.0 * p) / 4.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn best_probe_examples() {
        let (p, v) = best_probe(&QubitChannel::identity(), 1e-9);
        assert_eq!(v, ChannelVerdict::Entangling);
        let out = apply_to_half(&QubitChannel::identity(), &p.unwrap());
        assert_abs_diff_eq!(pt_min_eigenvalue(out.rho()).unwrap(), -0.5, epsilon = 1e-12);

        let dep = QubitChannel::depolarizing(0.5).unwrap();
        let (p, v) = best_probe(&dep, 1e-9);
        assert_eq!(v, ChannelVerdict::Entangling);
        assert!(pt_min_eigenvalue(apply_to_half(&dep, &p.unwrap()).rho()).unwrap() < 0.0);

        let (p, v) = best_probe(&QubitChannel::measure_resend_z(), 1e-9);
        assert_eq!(v, ChannelVerdict::Breaking);
        assert!(p.is_none());
    }

    #[test]
    fn pm_states_examples() {
        let e = pm_states(&ProbeState::phi_plus()).unwrap();
        assert!(e.states[0].as_slice()[0].re > 1.0 - 1e-15);
        assert!(e.states[1].as_slice()[1].re > 1.0 - 1e-15);
        assert_abs_diff_eq!(e.priors[0], 0.5, epsilon = 1e-15);

        let theta = 0.3f64;
        let e = pm_states(&ProbeState::schmidt(theta)).unwrap();
        assert_abs_diff_eq!(e.priors[0], theta.cos().powi(2), epsilon = 1e-15);
        assert_abs_diff_eq!(e.priors[1], theta.sin().powi(2), epsilon = 1e-15);

        let h = 0.5;
        let probe = ProbeState::new(CVector::from_real(&[h, h, h, -h])).unwrap();
        let e = pm_states(&probe).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((e.states[0].inner(&CVector::from_real(&[r, r])).norm() - 1.0).abs() < 1e-15);
        assert!((e.states[1].inner(&CVector::from_real(&[r, -r])).norm() - 1.0).abs() < 1e-15);

        let product = ProbeState::new(CVector::from_real(&[1.0, 0.0, 0.0, 0.0])).unwrap();
        assert_eq!(pm_states(&product), Err(ChannelError::ZeroBranch(1)));
        assert!(ProbeState::new(CVector::from_real(&[1.0, 1.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn pm_equivalence_examples() {
        let d = pm_equivalence_check(&QubitChannel::identity(), &ProbeState::phi_plus()).unwrap();
        assert!(d <= 1e-12);
        let dep = QubitChannel::depolarizing(0.7).unwrap();
        assert!(pm_equivalence_check(&dep, &ProbeState::phi_plus()).unwrap() <= 1e-12);
        let mut rng = stream_rng(21, 0);
        for _ in 0..100 {
            let env = rand::Rng::random_range(&mut rng, 1..=4);
            let ch = QubitChannel::from_kraus(random_kraus(env, &mut rng)).unwrap();
            let probe = ProbeState::new(crate::random::random_pure(4, &mut rng)).unwrap();
            assert!(pm_equivalence_check(&ch, &probe).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn breaking_data_round_trip() {
        let mut rng = stream_rng(13, 0);
        for _ in 0..100 {
            let povm = crate::random::random_rank_one_povm(3, &mut rng);
            let parts: Vec<(CMatrix, CMatrix)> = povm
                .iter()
                .map(|(w, v)| {
                    let l = v.projector().scale_real(*w).hermitian_part();
                    let s = crate::random::random_simplex(2, &mut rng);
                    let u = crate::random::random_unitary(2, &mut rng);
                    (l, u.sandwich(&CMatrix::diag_real(&s)).hermitian_part())
                })
                .collect();
            let ch = QubitChannel::from_breaking_data(&parts).unwrap();
            assert_ne!(is_entanglement_breaking(&ch, 1e-9), ChannelVerdict::Entangling);
        }
    }

    #[test]
    fn analyze_identity_and_breaking() {
        let r = analyze_channel(&QubitChannel::identity(), 1e-9).unwrap();
        assert!(r.key_positive);
        assert_eq!(r.lambdas.unwrap().lambdas()[0], 1.0);
        let r = analyze_channel(&QubitChannel::measure_resend_z(), 1e-9).unwrap();
        assert!(!r.key_positive);
        assert!(r.probe.is_none());
    }
}
