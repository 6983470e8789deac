mod support;

use proptest::prelude::*;
use qverify_core::hamiltonian::IsingHamiltonian;
use qverify_core::qasm::{emit, Circuit, Gate};
use qverify_core::reward::{hierarchical_reward, RewardConfig, Stage, Task};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn stages_follow_the_decision_tree(seed in any::<u64>()) {
        let case = support::random_case(seed);
        let b = hierarchical_reward(&case.source, &case.task, &case.config);
        let Some(gen) = &case.gen else {
            prop_assert_eq!(b.stages_run, vec![Stage::Syntax]);
            prop_assert_eq!(b.total, -1.0);
            return Ok(());
        };
        let (d, r_ev) = support::oracle_scores(&case, gen);
        // d is a square root, so ~1e-16 noise in probabilities shows up near 1e-8.
        prop_assert!((b.d_js.unwrap() - d).abs() < 1e-6, "{:?} vs {}", b.d_js, d);
        let near = |a: f64, t: f64| (a - t).abs() < 1e-6;
        prop_assume!(!near(d, case.config.tau_js) && !near(r_ev, case.config.tau_ev));
        let expected = support::expected_stages(true, d, r_ev, case.config.tau_js, case.config.tau_ev);
        prop_assert!(b.errors.is_empty(), "{:?}", b.errors);
        prop_assert_eq!(&b.stages_run, &expected);
        if let Some(r) = b.r_ev {
            prop_assert!((r - r_ev).abs() < 1e-9);
        }
    }

    #[test]
    fn total_is_the_sum_of_stage_rewards(seed in any::<u64>()) {
        let case = support::random_case(seed);
        let c = case.config;
        let b = hierarchical_reward(&case.source, &case.task, &c);
        if !b.syntax_ok {
            return Ok(());
        }
        let sum = b.r_entropy.unwrap()
            + b.r_qm.unwrap()
            + c.lambda_ev * b.r_ev.unwrap_or(0.0)
            + c.lambda_opt * b.r_opt.unwrap_or(0.0);
        prop_assert!((b.total - sum).abs() < 1e-12);
        let w = 1.0 / (1.0 + b.delta_n.unwrap() as f64);
        prop_assert!((b.r_entropy.unwrap() - w * (1.0 - b.d_js.unwrap())).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&b.d_js.unwrap()));
        prop_assert!((-0.2..=0.0).contains(&b.r_qm.unwrap()));
        if let Some(f) = b.f_gen {
            prop_assert!((0.0..=1.0).contains(&f));
        }
        if let Some(r) = b.r_opt {
            prop_assert!(r > 0.0 && r <= 2.0 + 1e-12);
        }
    }

    #[test]
    fn evaluation_is_deterministic(seed in any::<u64>()) {
        let case = support::random_case(seed);
        let a = hierarchical_reward(&case.source, &case.task, &case.config);
        let b = hierarchical_reward(&case.source, &case.task, &case.config);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn idle_extra_qubits_only_cost_the_width_penalty(seed in any::<u64>(), extra in 1usize..3) {
        let case = support::random_case(seed);
        let Some(gen) = &case.gen else { return Ok(()) };
        let wide = gen.widened(gen.n_qubits + extra);
        let a = hierarchical_reward(&emit(gen), &case.task, &case.config);
        let b = hierarchical_reward(&emit(&wide), &case.task, &case.config);
        prop_assert!(b.syntax_ok && b.errors.is_empty(), "{:?}", b.errors);
        prop_assert_eq!(b.active_extra, a.active_extra);
        prop_assert_eq!(b.cross_gates, a.cross_gates);
        prop_assert_eq!(b.delta_n.unwrap(), (gen.n_qubits + extra).abs_diff(case.gt.n_qubits));
        if gen.n_qubits >= case.gt.n_qubits {
            prop_assert!((a.d_js.unwrap() - b.d_js.unwrap()).abs() < 1e-12);
        }
    }
}

fn z0(n: usize) -> IsingHamiltonian {
    let mut h = IsingHamiltonian::new(n);
    h.add_term(&[0], 1.0).unwrap();
    h
}

#[test]
fn distribution_mismatch_rescued_by_expectation() {
    // gt = x(0) on two qubits; gen also flips qubit 1, so the distributions
    // are disjoint but the energy is optimal.
    let mut gt = Circuit::new(2);
    gt.push(Gate::X, &[0], &[]);
    let task = Task::new(z0(2), gt).unwrap();
    let src = "OPENQASM 3.0;\nqubit[2] q;\nx q[0];\nx q[1];\n";
    let b = hierarchical_reward(src, &task, &RewardConfig::default());
    assert_eq!(b.d_js, Some(1.0));
    assert_eq!(b.f_gen, Some(0.0));
    assert_eq!(b.r_ev, Some(1.0));
    assert_eq!(b.stages_run, [Stage::Syntax, Stage::Entropy, Stage::Expectation, Stage::Optimization]);
    assert_eq!(b.total, 0.0 + 0.0 + 1.0 + 2.0);
}

#[test]
fn identical_circuit_skips_expectation() {
    let mut gt = Circuit::new(1);
    gt.push(Gate::X, &[0], &[]);
    let task = Task::new(z0(1), gt.clone()).unwrap();
    let b = hierarchical_reward(&emit(&gt), &task, &RewardConfig::default());
    assert_eq!(b.stages_run, [Stage::Syntax, Stage::Entropy, Stage::Optimization]);
    assert_eq!(b.r_entropy, Some(1.0));
    assert_eq!(b.r_opt, Some(1.0 + 1.0));
    assert_eq!(b.total, 3.0);
}
