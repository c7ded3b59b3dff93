//! Command bodies. Each returns a human-readable report plus a CSV table.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use simcap::adsim::{
    povm_family, povm_usd, povm_xbasis, simulate, AdConfig, AdResult, DecisionRule, Povm,
};
use simcap::channel::{
    analyze_channel as channel_report, choi_pt_min, pm_equivalence_check, pm_states,
    ChannelVerdict, ProbeState, QubitChannel,
};
use simcap::filter::{bell_diagonalize, FilterResult};
use simcap::qlin::{CMatrix, CVector};
use simcap::random::{random_kraus, random_state, stream_rng};
use simcap::states::{
    eve_conditionals, is_entangled, mutual_info_ab, pt_min_eigenvalue,
    purification_from_bell_diagonal, security_condition, z_measurement_distribution, BellDiagonal,
    EntanglementVerdict, EveEnsemble, TwoQubitState,
};

use crate::error::CliError;
use crate::input::Input;
use crate::output::{fmt_f64, Table};

/// Result of a command. `failure` carries an error detected after partial
/// output was produced.
#[derive(Debug)]
pub struct Outcome {
    pub report: String,
    pub table: Table,
    pub failure: Option<CliError>,
}

/// `|PT min|` below this is flagged as close to the separable boundary.
pub const NEAR_BOUNDARY: f64 = 1e-6;

/// Largest block length searched for an advantage.
const MAX_ADVANTAGE_N: usize = 1_000_000;

fn verdict_name(v: EntanglementVerdict) -> &'static str {
    match v {
        EntanglementVerdict::Entangled => "entangled",
        EntanglementVerdict::Separable => "separable",
        EntanglementVerdict::Boundary => "boundary",
    }
}

fn channel_verdict_name(v: ChannelVerdict) -> &'static str {
    match v {
        ChannelVerdict::Breaking => "breaking",
        ChannelVerdict::Entangling => "entangling",
        ChannelVerdict::Boundary => "boundary",
    }
}

fn fmt_matrix(m: &CMatrix) -> String {
    let mut s = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols())
            .map(|j| {
                let z = m[(i, j)];
                format!("{:+.6}{:+.6}i", z.re, z.im)
            })
            .collect();
        let _ = writeln!(s, "    [{}]", row.join(", "));
    }
    s
}

fn fmt_vector(v: &CVector) -> String {
    v.as_slice()
        .iter()
        .map(|z| format!("{}{}{}i", fmt_f64(z.re), if z.im < 0.0 { "-" } else { "+" }, fmt_f64(z.im.abs())))
        .collect::<Vec<_>>()
        .join(" ")
}

fn ln_eps_bn(eps_b: f64, n: usize) -> f64 {
    if eps_b == 0.0 {
        return f64::NEG_INFINITY;
    }
    let ln_r = (eps_b / (1.0 - eps_b)).ln();
    let x = n as f64 * ln_r;
    x - x.exp().ln_1p()
}

/// Smallest `N` with Bob's block error below the x-basis floor
/// `(1/4)·overlap^N`.
pub fn min_advantage_n(ens: &EveEnsemble) -> Option<usize> {
    if ens.overlap <= 0.0 {
        return None;
    }
    let ln_s = ens.overlap.ln();
    (1..=MAX_ADVANTAGE_N).find(|&n| ln_eps_bn(ens.eps_b, n) < 0.25f64.ln() + n as f64 * ln_s)
}

pub const STATE_HEADER: &[&str] = &[
    "kind", "pt_min", "ppt_verdict", "p_success", "lambda1", "lambda2", "lambda3", "lambda4",
    "pauli", "eps_b", "overlap", "secure", "i_ab", "min_n",
];

pub fn analyze_state(input: &Input, tol: f64) -> Result<Outcome, CliError> {
    let state = match input {
        Input::DensityMatrix(s) => s.clone(),
        Input::BellDiagonal { bd, .. } => bd.state(),
        Input::Channel { kind, .. } => {
            return Err(CliError::Input(format!(
                "field `kind`: `{kind}` describes a channel; use analyze-channel"
            )))
        }
    };
    let pt_min = pt_min_eigenvalue(state.rho()).map_err(|e| CliError::Numeric(e.to_string()))?;
    let verdict = is_entangled(&state, tol);
    let mut report = String::new();
    let _ = writeln!(report, "input: {}", input.kind());
    let _ = writeln!(report, "partial transpose min eigenvalue: {}", fmt_f64(pt_min));
    let _ = writeln!(report, "ppt verdict: {}", verdict_name(verdict));

    let mut table = Table::new(STATE_HEADER);
    let filter = match bell_diagonalize(&state) {
        Ok(f) => f,
        Err(e) => {
            let _ = writeln!(report, "filter: failed ({e})");
            let mut row = vec![
                input.kind().to_string(),
                fmt_f64(pt_min),
                verdict_name(verdict).into(),
            ];
            row.resize(STATE_HEADER.len(), String::new());
            table.push(row);
            return Ok(Outcome {
                report,
                table,
                failure: Some(e.into()),
            });
        }
    };
    let row = state_row(input.kind(), pt_min, verdict, &filter, &mut report)?;
    table.push(row);
    Ok(Outcome {
        report,
        table,
        failure: None,
    })
}

fn state_row(
    kind: &str,
    pt_min: f64,
    verdict: EntanglementVerdict,
    f: &FilterResult,
    report: &mut String,
) -> Result<Vec<String>, CliError> {
    let l = f.lambdas.lambdas();
    let ens = eve_conditionals(&purification_from_bell_diagonal(&f.lambdas))?;
    let secure = security_condition(&ens)?;
    let i_ab = mutual_info_ab(&z_measurement_distribution(&f.lambdas.state()));
    let min_n = if secure { min_advantage_n(&ens) } else { None };
    let pauli = format!("{:?}", f.lambdas.applied_pauli());

    let _ = writeln!(report, "filter A (unitary after filter):");
    report.push_str(&fmt_matrix(&f.operation_a()));
    let _ = writeln!(report, "filter B (unitary after filter):");
    report.push_str(&fmt_matrix(&f.operation_b()));
    let _ = writeln!(report, "filter iterations: {}", f.iterations);
    let _ = writeln!(report, "p_success: {}", fmt_f64(f.p_success));
    let _ = writeln!(
        report,
        "lambdas: {}",
        l.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(", ")
    );
    let _ = writeln!(report, "relabelling pauli on B: {pauli}");
    let _ = writeln!(report, "eps_b: {}", fmt_f64(ens.eps_b));
    let _ = writeln!(report, "overlap: {}", fmt_f64(ens.overlap));
    let _ = writeln!(report, "secure: {secure}");
    let _ = writeln!(report, "i_ab (bits): {}", fmt_f64(i_ab));
    match min_n {
        Some(n) => {
            let _ = writeln!(report, "min N with eps_bn below the x-basis floor: {n}");
        }
        None => {
            let _ = writeln!(report, "min N with eps_bn below the x-basis floor: none");
        }
    }
    Ok(vec![
        kind.to_string(),
        fmt_f64(pt_min),
        verdict_name(verdict).into(),
        fmt_f64(f.p_success),
        fmt_f64(l[0]),
        fmt_f64(l[1]),
        fmt_f64(l[2]),
        fmt_f64(l[3]),
        pauli,
        fmt_f64(ens.eps_b),
        fmt_f64(ens.overlap),
        secure.to_string(),
        fmt_f64(i_ab),
        min_n.map(|n| n.to_string()).unwrap_or_default(),
    ])
}

/// Eve's measurement, as chosen on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StrategySpec {
    XBasis,
    Usd,
    /// Interpolating family at angle β (radians).
    Family(f64),
    /// Single-outcome measurement.
    Trivial,
}

impl FromStr for StrategySpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "xbasis" => Ok(Self::XBasis),
            "usd" => Ok(Self::Usd),
            "trivial" => Ok(Self::Trivial),
            _ => {
                let beta = s
                    .strip_prefix("family:")
                    .ok_or_else(|| {
                        CliError::Input(format!(
                            "--strategy: unknown `{s}` (xbasis, usd, trivial or family:<beta>)"
                        ))
                    })?
                    .parse::<f64>()
                    .map_err(|e| CliError::Input(format!("--strategy: bad angle: {e}")))?;
                Ok(Self::Family(beta))
            }
        }
    }
}

impl std::fmt::Display for StrategySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::XBasis => write!(f, "xbasis"),
            Self::Usd => write!(f, "usd"),
            Self::Trivial => write!(f, "trivial"),
            Self::Family(b) => write!(f, "family:{b}"),
        }
    }
}

impl StrategySpec {
    pub fn build(&self, ens: &EveEnsemble) -> Result<Povm, CliError> {
        Ok(match self {
            Self::XBasis => povm_xbasis(),
            Self::Usd => povm_usd(ens)?,
            Self::Trivial => Povm::trivial(),
            Self::Family(b) => povm_family(ens, *b)?,
        })
    }
}

pub fn parse_lambdas(s: &str) -> Result<[f64; 4], CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(CliError::Input(format!(
            "--lambdas: expected 4 comma-separated weights, found {}",
            parts.len()
        )));
    }
    let mut out = [0.0; 4];
    for (i, p) in parts.iter().enumerate() {
        out[i] = p
            .parse()
            .map_err(|e| CliError::Input(format!("--lambdas: weight {}: {e}", i + 1)))?;
    }
    Ok(out)
}

/// `"a..b"` (inclusive) or a single value.
pub fn parse_n_range(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = |e: std::num::ParseIntError| CliError::Input(format!("--n: {e}"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (a.trim().parse().map_err(bad)?, b.trim().parse().map_err(bad)?),
        None => {
            let n = s.trim().parse().map_err(bad)?;
            (n, n)
        }
    };
    if lo == 0 || hi < lo {
        return Err(CliError::Input(format!(
            "--n: need 1 <= a <= b, got {lo}..{hi}"
        )));
    }
    Ok((lo..=hi).collect())
}

#[derive(Debug, Clone)]
pub struct AdSimParams {
    pub lambdas: [f64; 4],
    pub ns: Vec<usize>,
    pub strategy: StrategySpec,
    pub trials: u64,
    pub seed: u64,
    pub decision: DecisionRule,
}

pub const AD_HEADER: &[&str] = &[
    "n", "strategy", "decision", "accepted_blocks", "attempts", "agreement_blocks", "bob_errors",
    "eve_errors_agreement", "eve_errors_all", "eps_bn_emp", "eps_bn_stderr", "eps_en_emp",
    "eps_en_stderr", "eps_en_all", "eps_en_all_stderr", "eps_bn_analytic", "eps_bn_bound",
    "eve_bound_exact", "eve_bound_asym", "eve_bound_floor",
];

fn decision_name(d: DecisionRule) -> &'static str {
    match d {
        DecisionRule::Bayes => "bayes",
        DecisionRule::Majority => "majority",
    }
}

fn ad_row(p: &AdSimParams, r: &AdResult) -> Vec<String> {
    vec![
        r.n.to_string(),
        p.strategy.to_string(),
        decision_name(p.decision).into(),
        r.accepted_blocks.to_string(),
        r.attempts.to_string(),
        r.agreement_blocks.to_string(),
        r.bob_errors.to_string(),
        r.eve_errors_agreement.to_string(),
        r.eve_errors_all.to_string(),
        fmt_f64(r.eps_bn_emp),
        fmt_f64(r.eps_bn_stderr),
        fmt_f64(r.eps_en_emp),
        fmt_f64(r.eps_en_stderr),
        fmt_f64(r.eps_en_all),
        fmt_f64(r.eps_en_all_stderr),
        fmt_f64(r.eps_bn_analytic),
        fmt_f64(r.eps_bn_bound),
        fmt_f64(r.eve_bound_exact),
        fmt_f64(r.eve_bound_asym),
        fmt_f64(r.eve_bound_floor),
    ]
}

pub fn ad_sim(p: &AdSimParams) -> Result<Outcome, CliError> {
    if p.trials == 0 {
        return Err(CliError::Input("--trials must be at least 1".into()));
    }
    let bd = BellDiagonal::new(p.lambdas).map_err(|e| CliError::Input(format!("--lambdas: {e}")))?;
    let ens = EveEnsemble::from_bell_diagonal(&bd)?;
    let povm = p.strategy.build(&ens)?;
    let mut table = Table::new(AD_HEADER);
    let mut report = String::new();
    let _ = writeln!(
        report,
        "lambdas {:?}, strategy {}, decision {}, {} accepted blocks per N",
        bd.lambdas(),
        p.strategy,
        decision_name(p.decision),
        p.trials
    );
    for &n in &p.ns {
        let mut cfg = AdConfig::new(bd, povm.clone(), n, p.trials, p.seed);
        cfg.decision = p.decision;
        let r = simulate(&cfg)?;
        let _ = writeln!(
            report,
            "N={n:>3}  eps_bn {:.6} (analytic {:.6})  eps_en {:.6} +- {:.6}  bound {:.6}",
            r.eps_bn_emp, r.eps_bn_analytic, r.eps_en_emp, r.eps_en_stderr, r.eve_bound_exact
        );
        table.push(ad_row(p, &r));
    }
    Ok(Outcome {
        report,
        table,
        failure: None,
    })
}

pub const VERIFY_HEADER: &[&str] = &[
    "samples", "seed", "states_checked", "state_counterexamples", "state_boundary_skipped",
    "state_ppt_boundary", "state_filter_failures", "channels", "channels_checked",
    "channel_counterexamples", "channel_boundary_skipped", "channel_failures",
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VerifyCounts {
    pub checked: u64,
    pub counterexamples: u64,
    pub boundary_skipped: u64,
    pub ppt_boundary: u64,
    pub failures: u64,
}

impl VerifyCounts {
    fn merge(self, o: Self) -> Self {
        Self {
            checked: self.checked + o.checked,
            counterexamples: self.counterexamples + o.counterexamples,
            boundary_skipped: self.boundary_skipped + o.boundary_skipped,
            ppt_boundary: self.ppt_boundary + o.ppt_boundary,
            failures: self.failures + o.failures,
        }
    }
}

const CHANNEL_STREAM_SALT: u64 = 0xC4A7_7E11_D15C_0DE5;

fn verify_state(s: &TwoQubitState, tol: f64) -> VerifyCounts {
    let mut c = VerifyCounts::default();
    let verdict = is_entangled(s, tol);
    if verdict == EntanglementVerdict::Boundary {
        c.ppt_boundary = 1;
        return c;
    }
    let Ok(f) = bell_diagonalize(s) else {
        c.failures = 1;
        return c;
    };
    if (f.lambdas.lambdas()[0] - 0.5).abs() <= tol {
        c.boundary_skipped = 1;
        return c;
    }
    let secure = eve_conditionals(&purification_from_bell_diagonal(&f.lambdas))
        .and_then(|e| security_condition(&e));
    match secure {
        Ok(secure) => {
            c.checked = 1;
            c.counterexamples = (secure != (verdict == EntanglementVerdict::Entangled)) as u64;
        }
        Err(_) => c.failures = 1,
    }
    c
}

fn verify_channel(ch: &QubitChannel, tol: f64) -> VerifyCounts {
    let mut c = VerifyCounts::default();
    let verdict = simcap::channel::is_entanglement_breaking(ch, tol);
    if verdict == ChannelVerdict::Boundary {
        c.boundary_skipped = 1;
        return c;
    }
    match channel_report(ch, tol) {
        Ok(r) => {
            c.checked = 1;
            c.counterexamples = (r.key_positive != (verdict == ChannelVerdict::Entangling)) as u64;
        }
        Err(_) => c.failures = 1,
    }
    c
}

pub fn verify_states(samples: u64, seed: u64, tol: f64) -> VerifyCounts {
    (0..samples)
        .into_par_iter()
        .map(|i| verify_state(&random_state(&mut stream_rng(seed, i)), tol))
        .reduce(VerifyCounts::default, VerifyCounts::merge)
}

pub fn verify_channels(count: u64, seed: u64, tol: f64) -> VerifyCounts {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed ^ CHANNEL_STREAM_SALT, i);
            let env = rng.random_range(1..=4usize);
            let ch = QubitChannel::from_kraus(random_kraus(env, &mut rng)).expect("isometry");
            verify_channel(&ch, tol)
        })
        .reduce(VerifyCounts::default, VerifyCounts::merge)
}

pub fn verify(samples: u64, channels: u64, seed: u64, tol: f64) -> Result<Outcome, CliError> {
    if samples == 0 {
        return Err(CliError::Input("--samples must be at least 1".into()));
    }
    let s = verify_states(samples, seed, tol);
    let c = verify_channels(channels, seed, tol);
    let mut report = String::new();
    let _ = writeln!(report, "random states: {samples} (seed {seed})");
    let _ = writeln!(report, "  checked: {}", s.checked);
    let _ = writeln!(report, "  counterexamples: {}", s.counterexamples);
    let _ = writeln!(report, "  skipped, filtered lambda1 within tol of 1/2: {}", s.boundary_skipped);
    let _ = writeln!(report, "  skipped, partial transpose within tol of 0: {}", s.ppt_boundary);
    let _ = writeln!(report, "  filter failures: {}", s.failures);
    let _ = writeln!(report, "random channels: {channels}");
    let _ = writeln!(report, "  checked: {}", c.checked);
    let _ = writeln!(report, "  counterexamples: {}", c.counterexamples);
    let _ = writeln!(report, "  skipped, boundary: {}", c.boundary_skipped);
    let _ = writeln!(report, "  failures: {}", c.failures);
    let mut table = Table::new(VERIFY_HEADER);
    table.push(vec![
        samples.to_string(),
        seed.to_string(),
        s.checked.to_string(),
        s.counterexamples.to_string(),
        s.boundary_skipped.to_string(),
        s.ppt_boundary.to_string(),
        s.failures.to_string(),
        channels.to_string(),
        c.checked.to_string(),
        c.counterexamples.to_string(),
        c.boundary_skipped.to_string(),
        c.failures.to_string(),
    ]);
    let total = s.counterexamples + c.counterexamples;
    let failure = (total > 0).then(|| CliError::Property(format!("{total} counterexamples")));
    Ok(Outcome {
        report,
        table,
        failure,
    })
}

pub const CHANNEL_HEADER: &[&str] = &[
    "kind", "choi_pt_min", "verdict", "near_boundary", "probe", "prior0", "prior1",
    "pm_discrepancy", "p_success", "lambda1", "lambda2", "lambda3", "lambda4", "key_positive",
];

pub fn analyze_channel(input: &Input, tol: f64) -> Result<Outcome, CliError> {
    let Input::Channel { channel, kind } = input else {
        return Err(CliError::Input(format!(
            "field `kind`: `{}` describes a state; use analyze-state",
            input.kind()
        )));
    };
    let r = channel_report(channel, tol)?;
    let pt_min = choi_pt_min(channel);
    let near = pt_min.abs() <= NEAR_BOUNDARY;
    let mut report = String::new();
    let _ = writeln!(report, "input: {kind}");
    let _ = writeln!(report, "choi partial transpose min eigenvalue: {}", fmt_f64(pt_min));
    let _ = writeln!(report, "verdict: {}", channel_verdict_name(r.verdict));
    if near {
        let _ = writeln!(
            report,
            "near boundary: |min| <= {NEAR_BOUNDARY:e}; the verdict is sensitive to noise"
        );
    }
    // Prepare-and-measure statistics use the best probe, or |Φ+⟩ when the
    // channel cannot distribute entanglement.
    let probe = r.probe.clone().unwrap_or_else(ProbeState::phi_plus);
    match &r.probe {
        Some(p) => {
            let _ = writeln!(report, "best probe: {}", fmt_vector(p.phi()));
        }
        None => {
            let _ = writeln!(report, "best probe: none (statistics below use |Phi+>)");
        }
    }
    let pm = pm_states(&probe)?;
    let _ = writeln!(
        report,
        "prepared states: a=0 {} (prior {}), a=1 {} (prior {})",
        fmt_vector(&pm.states[0]),
        fmt_f64(pm.priors[0]),
        fmt_vector(&pm.states[1]),
        fmt_f64(pm.priors[1])
    );
    let discrepancy = match pm_equivalence_check(channel, &probe) {
        Ok(d) => {
            let _ = writeln!(report, "prepare-and-measure discrepancy: {}", fmt_f64(d));
            fmt_f64(d)
        }
        Err(e) => {
            let _ = writeln!(report, "prepare-and-measure discrepancy: n/a ({e})");
            String::new()
        }
    };
    let l = r.lambdas.map(|b| b.lambdas());
    if let (Some(l), Some(p)) = (l, r.p_success) {
        let _ = writeln!(
            report,
            "filtered lambdas: {} (p_success {})",
            l.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(", "),
            fmt_f64(p)
        );
    }
    let _ = writeln!(report, "key: {}", if r.key_positive { "secure" } else { "insecure" });
    let lcol = |i: usize| l.map(|l| fmt_f64(l[i])).unwrap_or_default();
    let mut table = Table::new(CHANNEL_HEADER);
    table.push(vec![
        kind.to_string(),
        fmt_f64(pt_min),
        channel_verdict_name(r.verdict).into(),
        near.to_string(),
        r.probe.as_ref().map(|p| fmt_vector(p.phi())).unwrap_or_default(),
        fmt_f64(pm.priors[0]),
        fmt_f64(pm.priors[1]),
        discrepancy,
        r.p_success.map(fmt_f64).unwrap_or_default(),
        lcol(0),
        lcol(1),
        lcol(2),
        lcol(3),
        r.key_positive.to_string(),
    ]);
    Ok(Outcome {
        report,
        table,
        failure: None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepSpec {
    /// Every point of the simplex grid with spacing `1/steps`.
    Simplex { steps: usize },
    /// `Λ2 = Λ3`, `Λ4` fixed, `Λ1` on `steps + 1` points of `[0, 1 − Λ4]`.
    Slice { steps: usize, lambda4: f64 },
    Point { lambdas: [f64; 4] },
}

pub const SWEEP_HEADER: &[&str] = &[
    "lambda1", "lambda2", "lambda3", "lambda4", "pauli", "entangled", "secure", "eps_b",
    "overlap", "ln_bob_ratio", "ln_overlap", "exponent_gap",
];

fn sweep_row(raw: [f64; 4]) -> Result<Vec<String>, CliError> {
    let bd = BellDiagonal::new(raw)?;
    let ens = EveEnsemble::from_bell_diagonal(&bd)?;
    let secure = security_condition(&ens)?;
    let entangled = simcap::states::is_entangled_bell(&bd);
    let ln_bob = (ens.eps_b / (1.0 - ens.eps_b)).ln();
    let ln_overlap = ens.overlap.ln();
    Ok(vec![
        fmt_f64(raw[0]),
        fmt_f64(raw[1]),
        fmt_f64(raw[2]),
        fmt_f64(raw[3]),
        format!("{:?}", bd.applied_pauli()),
        entangled.to_string(),
        secure.to_string(),
        fmt_f64(ens.eps_b),
        fmt_f64(ens.overlap),
        fmt_f64(ln_bob),
        fmt_f64(ln_overlap),
        fmt_f64(ln_overlap - ln_bob),
    ])
}

fn sweep_points(spec: &SweepSpec) -> Result<Vec<[f64; 4]>, CliError> {
    match *spec {
        SweepSpec::Simplex { steps } => {
            if steps == 0 {
                return Err(CliError::Input("--steps must be at least 1".into()));
            }
            let d = steps as f64;
            let mut pts = Vec::new();
            for i in 0..=steps {
                for j in 0..=steps - i {
                    for k in 0..=steps - i - j {
                        let l = steps - i - j - k;
                        pts.push([i as f64 / d, j as f64 / d, k as f64 / d, l as f64 / d]);
                    }
                }
            }
            Ok(pts)
        }
        SweepSpec::Slice { steps, lambda4 } => {
            if steps == 0 {
                return Err(CliError::Input("--steps must be at least 1".into()));
            }
            if !(0.0..=1.0).contains(&lambda4) {
                return Err(CliError::Input(format!("--lambda4 {lambda4} outside [0, 1]")));
            }
            let span = 1.0 - lambda4;
            Ok((0..=steps)
                .map(|i| {
                    let l1 = span * i as f64 / steps as f64;
                    let mid = (span - l1) / 2.0;
                    [l1, mid, mid, lambda4]
                })
                .collect())
        }
        SweepSpec::Point { lambdas } => Ok(vec![lambdas]),
    }
}

pub fn sweep(spec: &SweepSpec, tol: f64) -> Result<Outcome, CliError> {
    let pts = sweep_points(spec)?;
    let rows: Vec<Vec<String>> = pts
        .par_iter()
        .map(|&p| sweep_row(p))
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(SWEEP_HEADER);
    let secure = rows.iter().filter(|r| r[6] == "true").count();
    for r in rows {
        table.push(r);
    }
    let mut report = String::new();
    if let SweepSpec::Point { lambdas } = spec {
        let bd = BellDiagonal::new(*lambdas)?;
        let input = Input::BellDiagonal { raw: *lambdas, bd };
        report = analyze_state(&input, tol)?.report;
    } else {
        let _ = writeln!(report, "{} grid points, {} secure", pts.len(), secure);
    }
    Ok(Outcome {
        report,
        table,
        failure: None,
    })
}
