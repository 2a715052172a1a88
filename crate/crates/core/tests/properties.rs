use proptest::prelude::*;

use racl_core::credal::{contains, contains_bruteforce, elicit_possibility, project, CredalSet, PossibilityDist};
use racl_core::losses::{racl_loss, AlphaSelector, RaclConfig};
use racl_core::metrics::{binary_auc, binary_average_precision};
use racl_core::prob::ProbDist;
use racl_core::relax::{compute_alpha, AlphaParams, ClassErrorRates};

fn simplex(k: usize) -> impl Strategy<Value = ProbDist> {
    prop::collection::vec(0.001f64..1.0, k).prop_map(|v| {
        let s: f64 = v.iter().sum();
        ProbDist::new(v.iter().map(|x| x / s).collect()).unwrap()
    })
}

fn possibility(k: usize) -> impl Strategy<Value = PossibilityDist> {
    (prop::collection::vec(prop_oneof![Just(0.0), Just(0.25), Just(1.0), 0.0f64..1.0], k), 0..k).prop_map(
        |(mut v, top)| {
            v[top] = 1.0;
            PossibilityDist::new(v).unwrap()
        },
    )
}

fn case() -> impl Strategy<Value = (PossibilityDist, ProbDist)> {
    (2usize..=7).prop_flat_map(|k| (possibility(k), simplex(k)))
}

fn two_level_case() -> impl Strategy<Value = (ProbDist, usize, f64, f64)> {
    (2usize..=6).prop_flat_map(|k| (simplex(k), 0..k, 0.3f64..1.0, 0.0f64..0.95))
}

proptest! {
    #[test]
    fn level_sweep_matches_enumeration((pi, p) in case()) {
        let set = CredalSet::new(pi);
        prop_assert_eq!(contains(&set, &p).unwrap(), contains_bruteforce(&set, &p).unwrap());
    }

    #[test]
    fn projection_lands_in_the_set((p, y, beta, alpha) in two_level_case()) {
        let pi = elicit_possibility(y, &p, beta, alpha).unwrap();
        let r = project(&p, &pi, alpha).unwrap();
        prop_assert!((r.values().iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        prop_assert!(contains_bruteforce(&CredalSet::new(pi), &r).unwrap());
    }

    #[test]
    fn loss_is_binary_kl((p, y, beta, alpha) in two_level_case()) {
        let k = p.len();
        let cfg = RaclConfig::new(beta, vec![alpha; k], AlphaSelector::ObservedLabel).unwrap();
        let out = racl_loss(&p, y, &cfg).unwrap();
        prop_assert!(out.loss >= 0.0);
        if out.inside {
            prop_assert_eq!(out.loss, 0.0);
        } else {
            let s_a: f64 = out.pi.plausible_mask().iter().zip(p.values()).filter(|(m, _)| **m).map(|(_, v)| v).sum();
            let mut kl = (1.0 - alpha) * ((1.0 - alpha) / s_a).ln();
            if alpha > 0.0 {
                kl += alpha * (alpha / (1.0 - s_a)).ln();
            }
            prop_assert!((out.loss - kl).abs() <= 1e-10 * kl.abs().max(1.0));
        }
    }

    #[test]
    fn auc_complements_under_label_swap(
        scores in prop::collection::vec(prop_oneof![Just(0.5), 0.0f64..1.0], 4..40),
        flags in prop::collection::vec(any::<bool>(), 40),
    ) {
        let pos: Vec<bool> = flags[..scores.len()].to_vec();
        let neg: Vec<bool> = pos.iter().map(|b| !b).collect();
        match (binary_auc(&scores, &pos), binary_auc(&scores, &neg)) {
            (Some(a), Some(b)) => prop_assert!((a + b - 1.0).abs() < 1e-12),
            (None, None) => {}
            other => prop_assert!(false, "{:?}", other),
        }
        if let Some(ap) = binary_average_precision(&scores, &pos) {
            prop_assert!((0.0..=1.0).contains(&ap));
        }
    }

    #[test]
    fn alpha_bounded_and_decreasing(e in prop::collection::vec(0.0f64..=1.0, 2..8), k in 0.001f64..1.0) {
        let params = AlphaParams::new(k, 0.01, 0.9).unwrap();
        let n = e.len();
        let rates = ClassErrorRates { e: e.clone(), tau: 0.0, sample_counts: vec![1; n], empty_classes: vec![] };
        let alpha = compute_alpha(&rates, &params);
        for i in 0..n {
            prop_assert!(alpha[i] > 0.0 && alpha[i] <= 0.9);
            for j in 0..n {
                if e[i] < e[j] {
                    prop_assert!(alpha[i] >= alpha[j]);
                }
            }
        }
    }
}
