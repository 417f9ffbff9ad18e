//! Property-based tests of the library's invariants.  Random objects come
//! from the crate's seeded generators, driven by proptest-chosen seeds so
//! that failures shrink to a reproducible seed.

mod common;

use proptest::prelude::*;

use common::{path_class, path_matrix, world_class};
use probcirc::axioms::{apply_step, check_soundness, AxiomId, Direction, RewriteStep};
use probcirc::circuit::gates::{and_n, failure_circuit, permutation};
use probcirc::circuit::{flatten, parse_circuit, serialize, Circuit};
use probcirc::normalform::{
    bend, chain_of_normal_form, cpt_chain, disintegrate_at, eliminate_conditioning, from_matrix,
    is_normal_form, normal_form, recompose, shannon_expand, shannon_recompose, truth_table, unbend,
    unbend_matrix,
};
use probcirc::random::{CircuitConfig, Gen};
use probcirc::semantics::{class_of, eval};
use probcirc::surface::{infer, parse_program};

fn config(cond: bool) -> CircuitConfig {
    CircuitConfig {
        max_width: 3,
        max_gens: 10,
        cond,
        flips: true,
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn flatten_is_idempotent_and_sound(seed in any::<u64>(), cond in any::<bool>()) {
        let c = Gen::new(seed).any_circuit(&config(cond));
        let f = flatten(&c);
        prop_assert_eq!(&flatten(&f), &f);
        prop_assert_eq!(eval(&f).unwrap(), eval(&c).unwrap());
        prop_assert_eq!(f.ty(), c.ty());
    }

    #[test]
    fn text_round_trip(seed in any::<u64>(), cond in any::<bool>()) {
        let c = Gen::new(seed).any_circuit(&config(cond));
        prop_assert_eq!(parse_circuit(&serialize(&c)).unwrap(), flatten(&c));
    }

    #[test]
    fn evaluator_matches_path_oracle(seed in any::<u64>(), cond in any::<bool>()) {
        let c = Gen::new(seed).any_circuit(&config(cond));
        prop_assert_eq!(eval(&c).unwrap(), path_matrix(&c));
    }

    #[test]
    fn causal_circuits_are_stochastic(seed in any::<u64>()) {
        let c = Gen::new(seed).any_circuit(&config(false));
        prop_assert!(eval(&c).unwrap().is_stochastic());
    }

    #[test]
    fn canonical_class_is_scale_invariant(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let c = g.any_circuit(&config(true));
        let m = eval(&c).unwrap();
        let lambda = g.prob_open();
        prop_assert_eq!(m.scale(&lambda).canonical_class(), m.canonical_class());
        prop_assert_eq!(m.canonical_class(), path_class(&c));
    }

    #[test]
    fn normal_form_is_sound_and_canonical(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let c = g.any_circuit(&config(false));
        let nf = normal_form(&c).unwrap();
        prop_assert_eq!(eval(&nf).unwrap(), eval(&c).unwrap());
        prop_assert!(is_normal_form(&nf));
        prop_assert_eq!(normal_form(&nf).unwrap(), nf.clone());
        let d = g.engineered_equal(&c);
        prop_assert_eq!(normal_form(&d).unwrap(), nf);
    }

    #[test]
    fn cpt_chain_round_trip(seed in any::<u64>(), m in 0usize..3, n in 0usize..3) {
        let mut g = Gen::new(seed);
        let mat = g.stochastic(m, n);
        let chain = cpt_chain(&mat).unwrap();
        prop_assert_eq!(chain.to_matrix(), mat.clone());
        let c = from_matrix(&mat).unwrap();
        prop_assert_eq!(chain_of_normal_form(&c), Some(chain));
        prop_assert_eq!(path_matrix(&c), mat);
    }

    #[test]
    fn disintegration_recomposes(seed in any::<u64>(), n in 1usize..5) {
        let mut g = Gen::new(seed);
        let joint = g.joint(n);
        for a in 1..=n {
            let (marginal, conditional) = disintegrate_at(&joint, a).unwrap();
            prop_assert!(conditional.is_stochastic());
            prop_assert_eq!(recompose(&marginal, &conditional).unwrap(), joint.clone());
        }
    }

    #[test]
    fn shannon_expansion_recomposes(seed in any::<u64>(), inputs in 1usize..4) {
        // A random Boolean circuit, reduced to a single output.
        let wide = Gen::new(seed).boolean_circuit(inputs, 4, 8);
        let b = Circuit::seq(wide.clone(), and_n(wide.outputs())).unwrap();
        for wire in 1..=inputs {
            let (b0, b1) = shannon_expand(&b, wire).unwrap();
            let back = shannon_recompose(&b0, &b1, wire).unwrap();
            prop_assert_eq!(truth_table(&back).unwrap(), truth_table(&b).unwrap());
        }
    }

    #[test]
    fn bending_round_trips(seed in any::<u64>()) {
        let c = Gen::new(seed).any_circuit(&config(true));
        let bent = bend(&c);
        prop_assert_eq!(bent.inputs(), 0);
        let back = unbend(&bent, c.inputs()).unwrap();
        prop_assert_eq!(class_of(&back).unwrap(), class_of(&c).unwrap());
        let via_matrix = unbend_matrix(&eval(&bent).unwrap(), c.inputs()).unwrap();
        prop_assert_eq!(via_matrix.canonical_class(), class_of(&c).unwrap());
    }

    #[test]
    fn elimination_preserves_class(seed in any::<u64>()) {
        let c = Gen::new(seed).circuit(0, &config(true));
        let out = eliminate_conditioning(&c).unwrap();
        let class = path_class(&c);
        prop_assert_eq!(path_class(&out), class.clone());
        if class.is_bottom() {
            prop_assert_eq!(flatten(&out), flatten(&failure_circuit(0, c.outputs())));
        } else {
            prop_assert!(out.is_causal());
        }
    }

    #[test]
    fn introduction_rewrites_preserve_semantics(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let c = g.any_circuit(&config(true));
        let d = g.engineered_equal(&c);
        prop_assert_eq!(eval(&d).unwrap(), eval(&c).unwrap());
    }

    #[test]
    fn permutations_are_invertible(perm in Just((0..4usize).collect::<Vec<_>>()).prop_shuffle()) {
        let mut inverse = vec![0; perm.len()];
        for (j, &i) in perm.iter().enumerate() {
            inverse[i] = j;
        }
        let round = Circuit::seq(permutation(&perm), permutation(&inverse)).unwrap();
        prop_assert_eq!(eval(&round).unwrap(), eval(&probcirc::circuit::gates::id_n(4)).unwrap());
    }

    #[test]
    fn programs_match_world_enumeration(p in 0u32..=8, q in 0u32..=8, obs in any::<bool>()) {
        let text = format!(
            "let a = flip {p}/8 in let b = flip {q}/8 in let c = a or b in {} (a, c)",
            if obs { "let o = observe c in" } else { "" }
        );
        let prog = parse_program(&text).unwrap();
        prop_assert_eq!(infer(&prog).unwrap(), world_class(&prog, 2));
    }
}

#[test]
fn structural_rules_are_sound_on_many_draws() {
    for rule in [AxiomId::Interchange, AxiomId::SymNat, AxiomId::SeqAssoc] {
        let report = check_soundness(rule, 300, 11);
        assert!(report.ok(), "{rule}: {:?}", report.failures.first());
    }
}

#[test]
fn apply_step_preserves_class_at_random_sites() {
    let mut g = Gen::new(5);
    let mut applied = 0;
    for _ in 0..200 {
        let c = flatten(&g.any_circuit(&config(true)));
        let class = class_of(&c).unwrap();
        for rule in [AxiomId::A2r, AxiomId::B4, AxiomId::Interchange] {
            for path in [vec![], vec![0], vec![1], vec![0, 1], vec![1, 0]] {
                for dir in [Direction::LeftToRight, Direction::RightToLeft] {
                    if let Ok(d) = apply_step(&c, &RewriteStep::new(rule, dir, path.clone())) {
                        applied += 1;
                        assert_eq!(class_of(&d).unwrap(), class, "{rule} {dir:?} at {path:?} on {}", serialize(&c));
                    }
                }
            }
        }
    }
    assert!(applied > 100, "only {applied} rewrites applied");
}
