use rayon::prelude::*;
use simcap::channel::{analyze_channel, is_entanglement_breaking, ChannelVerdict, QubitChannel};
use simcap::filter::bell_diagonalize;
use simcap::random::{random_kraus, random_state, stream_rng};
use simcap::states::{
    eve_conditionals, is_entangled, purification_from_bell_diagonal, security_condition,
    EntanglementVerdict,
};

#[test]
fn filtered_security_matches_ppt_on_random_states() {
    let mismatches: Vec<u64> = (0..2000u64)
        .into_par_iter()
        .filter_map(|i| {
            let s = random_state(&mut stream_rng(2024, i));
            let r = bell_diagonalize(&s).expect("generic state");
            if (r.lambdas.lambdas()[0] - 0.5).abs() <= 1e-9 {
                return None;
            }
            let ens = eve_conditionals(&purification_from_bell_diagonal(&r.lambdas)).unwrap();
            let secure = security_condition(&ens).unwrap();
            let entangled = match is_entangled(&s, 1e-9) {
                EntanglementVerdict::Entangled => true,
                EntanglementVerdict::Separable => false,
                EntanglementVerdict::Boundary => return None,
            };
            (secure != entangled).then_some(i)
        })
        .collect();
    assert!(mismatches.is_empty(), "counterexamples at {mismatches:?}");
}

#[test]
fn channel_key_verdict_matches_entanglement_breaking() {
    let mut bad = Vec::new();
    for i in 0..300u64 {
        let mut rng = stream_rng(77, i);
        let env = 1 + (i % 4) as usize;
        let ch = QubitChannel::from_kraus(random_kraus(env, &mut rng)).unwrap();
        let verdict = is_entanglement_breaking(&ch, 1e-9);
        if verdict == ChannelVerdict::Boundary {
            continue;
        }
        let report = analyze_channel(&ch, 1e-9).unwrap();
        if report.key_positive != (verdict == ChannelVerdict::Entangling) {
            bad.push(i);
        }
    }
    assert!(bad.is_empty(), "mismatches at {bad:?}");
}
