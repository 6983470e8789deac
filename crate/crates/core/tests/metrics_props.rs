use proptest::prelude::*;
use qverify_core::metrics::{compute_metrics, CandidateEval, EvalOutcome};

fn candidate() -> impl Strategy<Value = CandidateEval> {
    prop_oneof![
        1 => Just(CandidateEval::default()),
        4 => (0.0f64..1.0, 0.0f64..2.0, 0.0f64..1.0).prop_map(|(d, re, js)| CandidateEval {
            parse_ok: true,
            e_gen: Some(d),
            delta_e: Some(d),
            re: Some(re),
            js: Some(js),
            f_gen: Some(0.5),
        }),
    ]
}

fn fixture(k: usize) -> impl Strategy<Value = Vec<EvalOutcome>> {
    prop::collection::vec(prop::collection::vec(candidate(), k), 1..20).prop_map(|tasks| {
        tasks
            .into_iter()
            .enumerate()
            .map(|(i, candidates)| EvalOutcome {
                task_id: format!("t{i}"),
                candidates,
            })
            .collect()
    })
}

/// Percentage of tasks with a hit among the first `k` candidates.
fn oracle_rate(outcomes: &[EvalOutcome], k: usize, hit: impl Fn(&CandidateEval) -> bool) -> f64 {
    let n = outcomes.iter().filter(|o| o.candidates[..k].iter().any(&hit)).count();
    100.0 * n as f64 / outcomes.len() as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn pass_k_dominates_pass_1(outcomes in fixture(10)) {
        let r = compute_metrics(&outcomes, 0.2, 0.1, 10).unwrap();
        prop_assert!(r.pass_k.scr >= r.pass_1.scr);
        prop_assert!(r.pass_k.srev >= r.pass_1.srev);
        prop_assert!(r.pass_k.hqcr >= r.pass_1.hqcr);
        prop_assert_eq!(r.pass_1.re.is_some(), outcomes.iter().any(|o| o.candidates[0].parse_ok));
    }

    #[test]
    fn rows_match_the_definitions(outcomes in fixture(5), srev_tol in 0.0f64..1.0, hqcr_tol in 0.0f64..2.0) {
        let r = compute_metrics(&outcomes, srev_tol, hqcr_tol, 5).unwrap();
        for (k, row) in [(1, &r.pass_1), (5, &r.pass_k)] {
            prop_assert_eq!(row.scr, oracle_rate(&outcomes, k, |c| c.parse_ok));
            prop_assert_eq!(row.srev, oracle_rate(&outcomes, k, |c| c.delta_e.is_some_and(|d| d <= srev_tol)));
            prop_assert_eq!(row.hqcr, oracle_rate(&outcomes, k, |c| c.re.is_some_and(|x| x <= hqcr_tol)));
        }
    }

    #[test]
    fn task_order_does_not_matter(outcomes in fixture(3), rot in 0usize..20) {
        let mut shuffled = outcomes.clone();
        let len = shuffled.len();
        shuffled.rotate_left(rot % len);
        shuffled.reverse();
        let a = compute_metrics(&outcomes, 0.2, 0.1, 3).unwrap();
        let b = compute_metrics(&shuffled, 0.2, 0.1, 3).unwrap();
        prop_assert_eq!(a.pass_1.scr, b.pass_1.scr);
        prop_assert_eq!(a.pass_k.srev, b.pass_k.srev);
        prop_assert_eq!(a.pass_k.hqcr, b.pass_k.hqcr);
        let close = |x: Option<f64>, y: Option<f64>| match (x, y) {
            (Some(x), Some(y)) => (x - y).abs() < 1e-12,
            (None, None) => true,
            _ => false,
        };
        prop_assert!(close(a.pass_1.re, b.pass_1.re) && close(a.pass_k.re, b.pass_k.re));
    }

    #[test]
    fn k_of_one_reproduces_pass_1(outcomes in fixture(4)) {
        let full = compute_metrics(&outcomes, 0.2, 0.1, 4).unwrap();
        let one = compute_metrics(&outcomes, 0.2, 0.1, 1).unwrap();
        prop_assert_eq!(full.pass_1, one.pass_k);
    }
}

fn hit() -> CandidateEval {
    CandidateEval {
        parse_ok: true,
        e_gen: Some(0.0),
        delta_e: Some(0.05),
        re: Some(0.0),
        js: Some(0.0),
        f_gen: Some(0.0),
    }
}

fn miss() -> CandidateEval {
    CandidateEval {
        delta_e: Some(0.9),
        re: Some(1.0),
        ..hit()
    }
}

#[test]
fn thirty_seventy_fixture() {
    // 3 tasks solved by their first sample, 4 only by a later one, 3 never.
    let outcomes: Vec<EvalOutcome> = (0..10)
        .map(|i| {
            let mut c = vec![miss(); 10];
            match i {
                0..=2 => c[0] = hit(),
                3..=6 => c[9 - i] = hit(),
                _ => {}
            }
            EvalOutcome {
                task_id: format!("t{i}"),
                candidates: c,
            }
        })
        .collect();
    let r = compute_metrics(&outcomes, 0.2, 0.1, 10).unwrap();
    assert_eq!(r.pass_1.srev, 30.0);
    assert_eq!(r.pass_k.srev, 70.0);
    assert_eq!(r.pass_k.scr, 100.0);
}

#[test]
fn too_few_candidates_is_an_error() {
    let o = vec![EvalOutcome {
        task_id: "a".into(),
        candidates: vec![hit(); 3],
    }];
    assert!(compute_metrics(&o, 0.2, 0.1, 10).is_err());
    assert!(compute_metrics(&o, 0.2, 0.1, 0).is_err());
}
