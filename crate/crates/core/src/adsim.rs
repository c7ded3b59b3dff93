//! Advantage distillation on z-basis outcomes and the eavesdropper's
//! individual attacks.
//!
//! Alice and Bob hold outcomes of a canonical Bell-diagonal state. For each
//! key bit Alice picks `N` of her symbols `a`, publishes `x_vec = a ⊕ x`, and
//! Bob accepts iff `b ⊕ x_vec` is constant. Eve holds one conditional state per
//! round and measures each with the same POVM on her equal-outcome plane
//! `span{|1⟩, |4⟩}`; rounds where Alice and Bob disagree land in the
//! orthogonal plane and produce a dedicated error-flag outcome.
//!
//! Analytic companions: Bob's block error, the exact tie-event lower bound on
//! Eve's block error (plus a brute-force enumeration oracle for it) and its
//! large-`N` exponential form.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::qlin::{herm_eig, CMatrix, CVector, C64};
use crate::random::stream_rng;
use crate::states::{BellDiagonal, EveEnsemble, StateError};

/// Probabilities below this are treated as exact zeros by Eve's decision rule.
const ZERO_PROB: f64 = 1e-14;
/// Completeness tolerance for POVMs.
pub const POVM_TOL: f64 = 1e-10;
/// Largest `M^N · 2^N` the brute-force oracle will enumerate.
pub const BRUTE_FORCE_CAP: f64 = 1e8;
/// Above this block length the exact bound is accumulated in log domain.
pub const LINEAR_DOMAIN_MAX_N: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdError {
    #[error("invalid POVM: {0}")]
    InvalidPovm(String),
    #[error("unambiguous discrimination needs overlap strictly inside (0, 1), got {0}")]
    TrivialDiscrimination(f64),
    #[error("angle {beta} outside [{lo}, {hi}]")]
    AngleOutOfRange { beta: f64, lo: f64, hi: f64 },
    #[error("block lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("brute force needs {0:e} evaluations, above the cap")]
    TooLarge(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("block {block} not accepted within {attempts} attempts")]
    NoAcceptedBlocks { block: u64, attempts: u64 },
    #[error("no accepted block with agreeing key bits; Eve's error is undefined")]
    NoAgreementBlocks,
    #[error("rate fit needs at least 4 block lengths, got {0}")]
    TooFewPoints(usize),
    #[error("empirical Eve error is zero at N = {0}; more trials needed")]
    InsufficientTrials(usize),
    #[error(transparent)]
    State(#[from] StateError),
}

/// What Eve concludes from an outcome, used by the majority rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutcomeLabel {
    Guess0,
    Guess1,
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct PovmElement {
    /// Positive operator on Eve's equal-outcome plane.
    pub operator: CMatrix,
    /// `(weight, unit direction)` when the operator is rank one.
    pub rank_one: Option<(f64, CVector)>,
    pub label: OutcomeLabel,
}

impl PovmElement {
    /// `weight · |direction⟩⟨direction|`.
    pub fn rank_one(weight: f64, direction: &CVector, label: OutcomeLabel) -> Self {
        Self {
            operator: direction.projector().scale_real(weight),
            rank_one: Some((weight, direction.clone())),
            label,
        }
    }

    /// `⟨e|M|e⟩`. Rank-one elements are evaluated from the amplitude
    /// `⟨m|e⟩`, which keeps exact zeros (as in unambiguous discrimination)
    /// at rounding level before any square root is taken.
    pub fn probability(&self, e: &CVector) -> f64 {
        match &self.rank_one {
            Some((w, m)) => w * m.inner(e).norm_sqr(),
            None => e.inner(&self.operator.matvec(e)).re.max(0.0),
        }
    }
}

/// Eve's measurement on `span{|1⟩, |4⟩}`.
#[derive(Debug, Clone)]
pub struct Povm {
    elements: Vec<PovmElement>,
}

impl Povm {
    pub fn new(elements: Vec<PovmElement>) -> Result<Self, AdError> {
        if elements.is_empty() {
            return Err(AdError::InvalidPovm("no outcomes".into()));
        }
        let mut sum = CMatrix::zeros(2, 2);
        for (i, e) in elements.iter().enumerate() {
            if e.operator.rows() != 2 || e.operator.cols() != 2 {
                return Err(AdError::InvalidPovm(format!("element {i} is not 2x2")));
            }
            let eig = herm_eig(&e.operator)
                .map_err(|err| AdError::InvalidPovm(format!("element {i}: {err}")))?;
            if eig.min() < -POVM_TOL || eig.eigenvalues[0] <= 0.0 {
                return Err(AdError::InvalidPovm(format!(
                    "element {i} is not positive and non-zero"
                )));
            }
            sum = &sum + &e.operator;
        }
        let residual = sum.max_abs_diff(&CMatrix::identity(2));
        if residual > POVM_TOL {
            return Err(AdError::InvalidPovm(format!(
                "completeness residual {residual:e}"
            )));
        }
        Ok(Self { elements })
    }

    /// Single trivial outcome, `M = 1`.
    pub fn trivial() -> Self {
        Self {
            elements: vec![PovmElement {
                operator: CMatrix::identity(2),
                rank_one: None,
                label: OutcomeLabel::Inconclusive,
            }],
        }
    }

    pub fn elements(&self) -> &[PovmElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn completeness_residual(&self) -> f64 {
        let mut sum = CMatrix::zeros(2, 2);
        for e in &self.elements {
            sum = &sum + &e.operator;
        }
        sum.max_abs_diff(&CMatrix::identity(2))
    }

    /// `⟨e|Mᵢ|e⟩` for each outcome.
    pub fn outcome_probabilities(&self, e: &CVector) -> Vec<f64> {
        self.elements.iter().map(|m| m.probability(e)).collect()
    }
}

/// Projective measurement on `|±x⟩ = (|1⟩ ± |4⟩)/√2`.
pub fn povm_xbasis() -> Povm {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    Povm {
        elements: vec![
            PovmElement::rank_one(1.0, &CVector::from_real(&[r, r]), OutcomeLabel::Guess0),
            PovmElement::rank_one(1.0, &CVector::from_real(&[r, -r]), OutcomeLabel::Guess1),
        ],
    }
}

fn orthogonal(v: &CVector) -> CVector {
    CVector::new(vec![-v[1].conj(), v[0].conj()]).expect("finite")
}

/// Unambiguous discrimination of `|e0⟩` and `|e1⟩` with the smallest
/// inconclusive probability.
pub fn povm_usd(ens: &EveEnsemble) -> Result<Povm, AdError> {
    let s = ens.overlap;
    if !(s > 1e-12 && s < 1.0 - 1e-12) {
        return Err(AdError::TrivialDiscrimination(s));
    }
    let (e0, e1) = ens.equal_outcome_pair();
    let c = 1.0 / (1.0 + s);
    let m0 = PovmElement::rank_one(c, &orthogonal(&e1), OutcomeLabel::Guess0);
    let m1 = PovmElement::rank_one(c, &orthogonal(&e0), OutcomeLabel::Guess1);
    let rest = &(&CMatrix::identity(2) - &m0.operator) - &m1.operator;
    let eig = herm_eig(&rest.hermitian_part()).map_err(|e| AdError::InvalidPovm(e.to_string()))?;
    let m_inc = PovmElement::rank_one(
        eig.eigenvalues[0],
        &eig.eigenvectors[0],
        OutcomeLabel::Inconclusive,
    );
    Povm::new(vec![m0, m1, m_inc])
}

/// Admissible range `[π/4, π/2 − θ]`, `θ = atan(λ4/λ1)`, of
/// [`povm_family`] angles.
pub fn family_range(ens: &EveEnsemble) -> (f64, f64) {
    let (e0, _) = ens.equal_outcome_pair();
    let theta = e0[1].norm().atan2(e0[0].norm());
    (
        std::f64::consts::FRAC_PI_4,
        std::f64::consts::FRAC_PI_2 - theta,
    )
}

/// Three-outcome measurements with `|m0⟩ = cos β|1⟩ + sin β|4⟩`, its mirror
/// image `|m1⟩` and an inconclusive `|1⟩`, interpolating between the x-basis
/// (β = π/4) and unambiguous discrimination (β = π/2 − θ).
pub fn povm_family(ens: &EveEnsemble, beta: f64) -> Result<Povm, AdError> {
    let (lo, hi) = family_range(ens);
    if !(beta >= lo - 1e-12 && beta <= hi + 1e-12) {
        return Err(AdError::AngleOutOfRange { beta, lo, hi });
    }
    let (s, c) = beta.sin_cos();
    let weight = 1.0 / (2.0 * s * s);
    let inconclusive = 1.0 - (c / s).powi(2);
    let mut elements = vec![
        PovmElement::rank_one(weight, &CVector::from_real(&[c, s]), OutcomeLabel::Guess0),
        PovmElement::rank_one(weight, &CVector::from_real(&[c, -s]), OutcomeLabel::Guess1),
    ];
    if inconclusive > 1e-15 {
        elements.push(PovmElement::rank_one(
            inconclusive,
            &CVector::from_real(&[1.0, 0.0]),
            OutcomeLabel::Inconclusive,
        ));
    }
    Povm::new(elements)
}

/// `(tr(E0 Mᵢ), tr(E1 Mᵢ))` per outcome.
pub fn outcome_table(ens: &EveEnsemble, povm: &Povm) -> Vec<(f64, f64)> {
    let (e0, e1) = ens.equal_outcome_pair();
    povm.outcome_probabilities(&e0)
        .into_iter()
        .zip(povm.outcome_probabilities(&e1))
        .collect()
}

/// `Σᵢ √(tr(E0 Mᵢ) tr(E1 Mᵢ))`; never below the overlap for a complete POVM.
pub fn bhattacharyya_sum(ens: &EveEnsemble, povm: &Povm) -> f64 {
    outcome_table(ens, povm)
        .iter()
        .map(|(p0, p1)| (p0 * p1).sqrt())
        .sum()
}

/// Bob's error after advantage distillation with blocks of `n`.
pub fn eps_bn_analytic(eps_b: f64, n: usize) -> f64 {
    let n = n as i32;
    let err = eps_b.powi(n);
    let ok = (1.0 - eps_b).powi(n);
    err / (ok + err)
}

/// `(ε_B/(1−ε_B))^N`, the upper bound on [`eps_bn_analytic`].
pub fn eps_bn_bound(eps_b: f64, n: usize) -> f64 {
    (eps_b / (1.0 - eps_b)).powi(n as i32)
}

/// Neumaier-compensated sum.
fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r.round()
}

/// Calls `f` with every composition of `total` into `parts` non-negative parts.
fn for_each_composition(total: usize, parts: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(rest: usize, slot: usize, buf: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if slot + 1 == buf.len() {
            buf[slot] = rest;
            f(buf);
            return;
        }
        for k in 0..=rest {
            buf[slot] = k;
            rec(rest - k, slot + 1, buf, f);
        }
    }
    let mut buf = vec![0; parts];
    rec(total, 0, &mut buf, f);
}

/// Probability (times 1/2) of the tie events in which Eve's outcome counts
/// carry no information about the key bit: `a` has as many zeros as ones and
/// every outcome appears equally often on zeros and on ones. Zero for odd `n`.
pub fn eve_bound_exact(ens: &EveEnsemble, povm: &Povm, n: usize) -> f64 {
    if n % 2 == 1 {
        return 0.0;
    }
    let q: Vec<f64> = outcome_table(ens, povm).iter().map(|(a, b)| a * b).collect();
    let half = n / 2;
    let mut terms = Vec::new();
    if n <= LINEAR_DOMAIN_MAX_N {
        let scale = 0.5f64.powi(n as i32 + 1);
        for_each_composition(half, q.len(), &mut |counts| {
            let mut coeff = 1.0;
            let mut remaining = n;
            let mut weight = 1.0;
            for (&k, &qi) in counts.iter().zip(&q) {
                coeff *= binomial(remaining, 2 * k) * binomial(2 * k, k);
                remaining -= 2 * k;
                weight *= qi.powi(k as i32);
            }
            terms.push(coeff * weight * scale);
        });
        compensated_sum(terms)
    } else {
        let mut ln_fact = vec![0.0; n + 1];
        for k in 1..=n {
            ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
        }
        let base = ln_fact[n] - (n as f64 + 1.0) * std::f64::consts::LN_2;
        for_each_composition(half, q.len(), &mut |counts| {
            let mut ln = base;
            for (&k, &qi) in counts.iter().zip(&q) {
                ln -= 2.0 * ln_fact[k];
                if k > 0 {
                    ln += k as f64 * qi.ln();
                }
            }
            terms.push(ln);
        });
        let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return 0.0;
        }
        max.exp() * compensated_sum(terms.iter().map(|t| (t - max).exp()))
    }
}

/// Large-`N` form of the tie bound and its overlap floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticBound {
    /// `(1/2)(1/2^{M−1}) (Σᵢ √(tr(E0Mᵢ) tr(E1Mᵢ)))^N`.
    pub value: f64,
    /// `(1/2)(1/2^{M−1}) |⟨e0|e1⟩|^N`.
    pub floor: f64,
}

pub fn eve_bound_asym(ens: &EveEnsemble, povm: &Povm, n: usize) -> AsymptoticBound {
    let prefactor = 0.5 * 0.5f64.powi(povm.len() as i32 - 1);
    AsymptoticBound {
        value: prefactor * bhattacharyya_sum(ens, povm).powi(n as i32),
        floor: prefactor * ens.overlap.powi(n as i32),
    }
}

/// Direct enumeration of all `2^N` strings and all `M^N` outcome sequences,
/// accumulating the probability of the tie events, times 1/2.
pub fn brute_force_eve_bound(ens: &EveEnsemble, povm: &Povm, n: usize) -> Result<f64, AdError> {
    let m = povm.len();
    let size = (m as f64).powi(n as i32) * 2f64.powi(n as i32);
    if size > BRUTE_FORCE_CAP {
        return Err(AdError::TooLarge(size));
    }
    let (e0, e1) = ens.equal_outcome_pair();
    let probs = [povm.outcome_probabilities(&e0), povm.outcome_probabilities(&e1)];

    struct Walk<'a> {
        n: usize,
        m: usize,
        probs: &'a [Vec<f64>; 2],
        diff: Vec<i64>,
        total: f64,
    }
    fn walk(w: &mut Walk<'_>, depth: usize, prob: f64) {
        if depth == w.n {
            if w.diff.iter().all(|&d| d == 0) {
                w.total += prob;
            }
            return;
        }
        for bit in 0..2 {
            for j in 0..w.m {
                let p = w.probs[bit][j];
                w.diff[j] += if bit == 0 { 1 } else { -1 };
                walk(w, depth + 1, prob * 0.5 * p);
                w.diff[j] -= if bit == 0 { 1 } else { -1 };
            }
        }
    }
    let mut w = Walk {
        n,
        m,
        probs: &probs,
        diff: vec![0; m],
        total: 0.0,
    };
    walk(&mut w, 0, 1.0);
    Ok(0.5 * w.total)
}

/// Alice's public message: `x_vec[i] = a[i] ⊕ x`.
pub fn ad_encode(a_block: &[u8], x: u8) -> Vec<u8> {
    a_block.iter().map(|a| (a ^ x) & 1).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decode {
    Accept(u8),
    Reject,
}

/// Bob accepts iff `b[i] ⊕ x_vec[i]` is the same for every `i`.
pub fn ad_decode(b_block: &[u8], x_vec: &[u8]) -> Result<Decode, AdError> {
    if b_block.len() != x_vec.len() {
        return Err(AdError::LengthMismatch(b_block.len(), x_vec.len()));
    }
    let mut it = b_block.iter().zip(x_vec).map(|(b, x)| (b ^ x) & 1);
    let Some(y) = it.next() else {
        return Err(AdError::LengthMismatch(0, 0));
    };
    Ok(if it.all(|v| v == y) {
        Decode::Accept(y)
    } else {
        Decode::Reject
    })
}

/// Which conditional state Eve holds after a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EveIndex {
    E00,
    E11,
    E01,
    E10,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Round {
    pub a: u8,
    pub b: u8,
    pub eve: EveIndex,
}

/// Cumulative table for drawing `(a, b)` with `P(a, b) = ‖e_ab‖²`.
#[derive(Debug, Clone, Copy)]
pub struct RoundSampler {
    cumulative: [f64; 3],
}

impl RoundSampler {
    pub fn new(ens: &EveEnsemble) -> Self {
        let p = [
            ens.e00.norm_sqr(),
            ens.e11.norm_sqr(),
            ens.e01.norm_sqr(),
            ens.e10.norm_sqr(),
        ];
        let total: f64 = p.iter().sum();
        Self {
            cumulative: [
                p[0] / total,
                (p[0] + p[1]) / total,
                (p[0] + p[1] + p[2]) / total,
            ],
        }
    }

    pub fn from_lambdas(bd: &BellDiagonal) -> Result<Self, AdError> {
        Ok(Self::new(&EveEnsemble::from_bell_diagonal(bd)?))
    }
}

pub fn sample_round<R: Rng + ?Sized>(sampler: &RoundSampler, rng: &mut R) -> Round {
    let u: f64 = rng.random();
    let c = sampler.cumulative;
    if u < c[0] {
        Round { a: 0, b: 0, eve: EveIndex::E00 }
    } else if u < c[1] {
        Round { a: 1, b: 1, eve: EveIndex::E11 }
    } else if u < c[2] {
        Round { a: 0, b: 1, eve: EveIndex::E01 }
    } else {
        Round { a: 1, b: 0, eve: EveIndex::E10 }
    }
}

/// How Eve turns her outcomes into a guess of the key bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum DecisionRule {
    /// Maximum likelihood between the two candidate strings; ties by coin.
    #[default]
    Bayes,
    /// Vote with each outcome's label; inconclusive outcomes abstain.
    Majority,
}

#[derive(Debug, Clone)]
pub struct AdConfig {
    pub n: usize,
    /// Number of accepted blocks to collect.
    pub trials: u64,
    pub seed: u64,
    pub strategy: Povm,
    pub lambdas: BellDiagonal,
    pub decision: DecisionRule,
    /// Attempts allowed per accepted block before giving up.
    pub max_attempts_per_block: u64,
}

impl AdConfig {
    pub fn new(lambdas: BellDiagonal, strategy: Povm, n: usize, trials: u64, seed: u64) -> Self {
        Self {
            n,
            trials,
            seed,
            strategy,
            lambdas,
            decision: DecisionRule::Bayes,
            max_attempts_per_block: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdResult {
    pub n: usize,
    pub accepted_blocks: u64,
    pub attempts: u64,
    /// Accepted blocks in which Bob's bit equals Alice's.
    pub agreement_blocks: u64,
    pub bob_errors: u64,
    pub eve_errors_agreement: u64,
    pub eve_errors_all: u64,
    pub eps_bn_emp: f64,
    pub eps_bn_stderr: f64,
    /// Eve's error over accepted blocks with agreeing key bits.
    pub eps_en_emp: f64,
    pub eps_en_stderr: f64,
    /// Eve's error over all accepted blocks.
    pub eps_en_all: f64,
    pub eps_en_all_stderr: f64,
    pub eps_bn_analytic: f64,
    pub eps_bn_bound: f64,
    pub eve_bound_exact: f64,
    pub eve_bound_asym: f64,
    pub eve_bound_floor: f64,
}

fn binomial_stderr(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    attempts: u64,
    accepted: u64,
    agreement: u64,
    bob_errors: u64,
    eve_errors_agreement: u64,
    eve_errors_all: u64,
}

impl Tally {
    fn merge(self, o: Tally) -> Tally {
        Tally {
            attempts: self.attempts + o.attempts,
            accepted: self.accepted + o.accepted,
            agreement: self.agreement + o.agreement,
            bob_errors: self.bob_errors + o.bob_errors,
            eve_errors_agreement: self.eve_errors_agreement + o.eve_errors_agreement,
            eve_errors_all: self.eve_errors_all + o.eve_errors_all,
        }
    }
}

/// Per-outcome sampling and likelihood tables for Eve, with the error flag
/// appended as the last outcome.
struct EveModel {
    /// `probs[a][j]`, j over POVM outcomes.
    probs: [Vec<f64>; 2],
    cumulative: [Vec<f64>; 2],
    ln_probs: [Vec<f64>; 2],
    labels: Vec<OutcomeLabel>,
}

impl EveModel {
    fn new(ens: &EveEnsemble, povm: &Povm) -> Self {
        let (e0, e1) = ens.equal_outcome_pair();
        let probs = [e0, e1].map(|e| {
            povm.outcome_probabilities(&e)
                .into_iter()
                .map(|p| if p < ZERO_PROB { 0.0 } else { p })
                .collect::<Vec<f64>>()
        });
        let cumulative = probs.clone().map(|p| {
            let total: f64 = p.iter().sum();
            let mut acc = 0.0;
            p.iter()
                .map(|x| {
                    acc += x / total;
                    acc
                })
                .collect()
        });
        let ln_probs = probs.clone().map(|p| p.iter().map(|x| x.ln()).collect());
        Self {
            probs,
            cumulative,
            ln_probs,
            labels: povm.elements().iter().map(|e| e.label).collect(),
        }
    }

    fn flag(&self) -> usize {
        self.labels.len()
    }

    fn measure<R: Rng + ?Sized>(&self, round: &Round, rng: &mut R) -> usize {
        if round.a != round.b {
            return self.flag();
        }
        let cum = &self.cumulative[round.a as usize];
        let u: f64 = rng.random();
        cum.iter().position(|&c| u < c).unwrap_or(cum.len() - 1)
    }

    fn guess<R: Rng + ?Sized>(
        &self,
        rule: DecisionRule,
        x_vec: &[u8],
        outcomes: &[usize],
        rng: &mut R,
    ) -> u8 {
        let pick = match rule {
            DecisionRule::Bayes => self.bayes(x_vec, outcomes),
            DecisionRule::Majority => self.majority(x_vec, outcomes),
        };
        pick.unwrap_or_else(|| rng.random_range(0..2u8))
    }

    /// `None` on a tie.
    fn bayes(&self, x_vec: &[u8], outcomes: &[usize]) -> Option<u8> {
        let mut ln = [0.0f64; 2];
        let mut impossible = [false; 2];
        for (&xv, &j) in x_vec.iter().zip(outcomes) {
            if j == self.flag() {
                continue;
            }
            for cand in 0..2u8 {
                let a = (xv ^ cand) as usize;
                if self.probs[a][j] == 0.0 {
                    impossible[cand as usize] = true;
                } else {
                    ln[cand as usize] += self.ln_probs[a][j];
                }
            }
        }
        match impossible {
            [true, false] => Some(1),
            [false, true] => Some(0),
            [true, true] => None,
            [false, false] => {
                let gap = ln[0] - ln[1];
                if gap.abs() <= 1e-9 * ln[0].abs().max(ln[1].abs()).max(1.0) {
                    None
                } else if gap > 0.0 {
                    Some(0)
                } else {
                    Some(1)
                }
            }
        }
    }

    fn majority(&self, x_vec: &[u8], outcomes: &[usize]) -> Option<u8> {
        let mut votes = [0u64; 2];
        for (&xv, &j) in x_vec.iter().zip(outcomes) {
            let guess_a = match self.labels.get(j) {
                Some(OutcomeLabel::Guess0) => 0,
                Some(OutcomeLabel::Guess1) => 1,
                _ => continue,
            };
            votes[(guess_a ^ xv) as usize] += 1;
        }
        match votes[0].cmp(&votes[1]) {
            std::cmp::Ordering::Greater => Some(0),
            std::cmp::Ordering::Less => Some(1),
            std::cmp::Ordering::Equal => None,
        }
    }
}

/// Per-block generator; depends only on `(seed, n, block)`.
pub fn block_rng(seed: u64, n: usize, block: u64) -> ChaCha8Rng {
    let key = seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    stream_rng(key, block)
}

const CHUNK: u64 = 2048;

/// Runs `cfg.trials` accepted blocks and tallies Bob's and Eve's errors.
pub fn simulate(cfg: &AdConfig) -> Result<AdResult, AdError> {
    if cfg.n == 0 {
        return Err(AdError::InvalidConfig("block length must be >= 1".into()));
    }
    if cfg.trials == 0 {
        return Err(AdError::InvalidConfig("trials must be >= 1".into()));
    }
    let ens = EveEnsemble::from_bell_diagonal(&cfg.lambdas)?;
    let sampler = RoundSampler::new(&ens);
    let model = EveModel::new(&ens, &cfg.strategy);

    let chunks = cfg.trials.div_ceil(CHUNK);
    let partial: Vec<Result<Tally, AdError>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(cfg.trials);
            let mut tally = Tally::default();
            let mut rounds = Vec::with_capacity(cfg.n);
            let mut outcomes = Vec::with_capacity(cfg.n);
            for block in start..end {
                run_block(cfg, &sampler, &model, block, &mut rounds, &mut outcomes, &mut tally)?;
            }
            Ok(tally)
        })
        .collect();
    let mut tally = Tally::default();
    for t in partial {
        tally = tally.merge(t?);
    }
    if tally.agreement == 0 {
        return Err(AdError::NoAgreementBlocks);
    }

    let eps_bn_emp = tally.bob_errors as f64 / tally.accepted as f64;
    let eps_en_emp = tally.eve_errors_agreement as f64 / tally.agreement as f64;
    let eps_en_all = tally.eve_errors_all as f64 / tally.accepted as f64;
    let asym = eve_bound_asym(&ens, &cfg.strategy, cfg.n);
    Ok(AdResult {
        n: cfg.n,
        accepted_blocks: tally.accepted,
        attempts: tally.attempts,
        agreement_blocks: tally.agreement,
        bob_errors: tally.bob_errors,
        eve_errors_agreement: tally.eve_errors_agreement,
        eve_errors_all: tally.eve_errors_all,
        eps_bn_emp,
        eps_bn_stderr: binomial_stderr(eps_bn_emp, tally.accepted),
        eps_en_emp,
        eps_en_stderr: binomial_stderr(eps_en_emp, tally.agreement),
        eps_en_all,
        eps_en_all_stderr: binomial_stderr(eps_en_all, tally.accepted),
        eps_bn_analytic: eps_bn_analytic(ens.eps_b, cfg.n),
        eps_bn_bound: eps_bn_bound(ens.eps_b, cfg.n),
        eve_bound_exact: eve_bound_exact(&ens, &cfg.strategy, cfg.n),
        eve_bound_asym: asym.value,
        eve_bound_floor: asym.floor,
    })
}

fn run_block(
    cfg: &AdConfig,
    sampler: &RoundSampler,
    model: &EveModel,
    block: u64,
    rounds: &mut Vec<Round>,
    outcomes: &mut Vec<usize>,
    tally: &mut Tally,
) -> Result<(), AdError> {
    let mut rng = block_rng(cfg.seed, cfg.n, block);
    let mut attempts = 0u64;
    // Bob's acceptance only depends on whether every round is an error
    // round or none is, so a block is abandoned at the first mixed round.
    loop {
        attempts += 1;
        if attempts > cfg.max_attempts_per_block {
            return Err(AdError::NoAcceptedBlocks {
                block,
                attempts: cfg.max_attempts_per_block,
            });
        }
        rounds.clear();
        let first = sample_round(sampler, &mut rng);
        let error_block = first.a != first.b;
        rounds.push(first);
        while rounds.len() < cfg.n {
            let r = sample_round(sampler, &mut rng);
            if (r.a != r.b) != error_block {
                break;
            }
            rounds.push(r);
        }
        if rounds.len() == cfg.n {
            break;
        }
    }

    let x: u8 = rng.random_range(0..2u8);
    let a: Vec<u8> = rounds.iter().map(|r| r.a).collect();
    let b: Vec<u8> = rounds.iter().map(|r| r.b).collect();
    let x_vec = ad_encode(&a, x);
    let y = match ad_decode(&b, &x_vec)? {
        Decode::Accept(y) => y,
        Decode::Reject => unreachable!("block sampled as accepted"),
    };

    outcomes.clear();
    for r in rounds.iter() {
        outcomes.push(model.measure(r, &mut rng));
    }
    let guess = model.guess(cfg.decision, &x_vec, outcomes, &mut rng);

    tally.attempts += attempts;
    tally.accepted += 1;
    let eve_wrong = (guess != x) as u64;
    tally.eve_errors_all += eve_wrong;
    if y == x {
        tally.agreement += 1;
        tally.eve_errors_agreement += eve_wrong;
    } else {
        tally.bob_errors += 1;
    }
    Ok(())
}

/// Least-squares line through `(N, ln ε_EN)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

pub fn rate_fit(results: &[AdResult]) -> Result<RateFit, AdError> {
    if results.len() < 4 {
        return Err(AdError::TooFewPoints(results.len()));
    }
    if let Some(r) = results.iter().find(|r| r.eps_en_emp <= 0.0) {
        return Err(AdError::InsufficientTrials(r.n));
    }
    let pts: Vec<(f64, f64)> = results
        .iter()
        .map(|r| (r.n as f64, r.eps_en_emp.ln()))
        .collect();
    Ok(least_squares(&pts))
}

pub(crate) fn least_squares(pts: &[(f64, f64)]) -> RateFit {
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    RateFit {
        slope,
        intercept: my - slope * mx,
        points: pts.len(),
    }
}

/// `Σ c |m⟩⟨m|` check helper for rank-one descriptions.
pub fn povm_from_rank_one(parts: &[(f64, CVector, OutcomeLabel)]) -> Result<Povm, AdError> {
    Povm::new(
        parts
            .iter()
            .map(|(w, d, l)| PovmElement::rank_one(*w, d, *l))
            .collect(),
    )
}

/// `⟨e0|M|e1⟩` for each element.
pub fn cross_amplitudes(ens: &EveEnsemble, povm: &Povm) -> Vec<C64> {
    let (e0, e1) = ens.equal_outcome_pair();
    povm.elements()
        .iter()
        .map(|m| e0.inner(&m.operator.matvec(&e1)))
        .collect()
}
