use std::collections::{BTreeMap, BTreeSet};

use racl_core::data::Dataset;
use racl_core::noise::{
    adjacent_grade_map, flip_count, generate, score_with_proxy, stratified_split, AuditFile, LogisticScorer,
    MisdiagnosisMap, NoiseConfig, SelectionMode,
};
use racl_core::trainer::synth_blobs;

#[test]
fn generator_contract_on_blobs() {
    let data = synth_blobs(5, 80, 3, 2.0, 1).unwrap();
    let map = adjacent_grade_map(5).unwrap();
    for rate in [0.0, 0.05, 0.1, 0.3, 0.55] {
        let cfg = NoiseConfig::new(rate, 42);
        let out = generate(&data, &map, &cfg, &LogisticScorer::default()).unwrap();
        let n = out.noisy.len();
        assert_eq!(n + out.proxy.len(), data.len());
        assert_eq!(out.noisy.num_flipped(), flip_count(n, rate));
        assert_eq!(out.noisy.num_flipped(), (rate * n as f64).ceil() as usize);
        for s in out.noisy.samples() {
            if s.flipped {
                assert!(map.targets(s.clean_label).contains(&s.observed_label));
            } else {
                assert_eq!(s.observed_label, s.clean_label);
            }
            assert!(s.candidate_loss.unwrap() >= 0.0);
        }
        let again = generate(&data, &map, &cfg, &LogisticScorer::default()).unwrap();
        assert_eq!(out.noisy, again.noisy);
        assert_eq!(serde_json::to_string(&out.audit).unwrap(), serde_json::to_string(&again.audit).unwrap());
    }
}

#[test]
fn flipped_samples_are_the_highest_loss_ones() {
    let data = synth_blobs(3, 100, 2, 3.0, 2).unwrap();
    let out = generate(&data, &adjacent_grade_map(3).unwrap(), &NoiseConfig::new(0.2, 5), &LogisticScorer::default())
        .unwrap();
    let min_flipped = out
        .noisy
        .samples()
        .iter()
        .filter(|s| s.flipped)
        .map(|s| s.candidate_loss.unwrap())
        .fold(f64::INFINITY, f64::min);
    let max_kept = out
        .noisy
        .samples()
        .iter()
        .filter(|s| !s.flipped)
        .map(|s| s.candidate_loss.unwrap())
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(min_flipped >= max_kept);
}

#[test]
fn audit_json_roundtrip_and_schema() {
    let data = synth_blobs(3, 30, 2, 3.0, 3).unwrap();
    let cfg = NoiseConfig::new(0.2, 9);
    let out = generate(&data, &adjacent_grade_map(3).unwrap(), &cfg, &LogisticScorer::default()).unwrap();
    let text = serde_json::to_string(&out.audit).unwrap();
    let back: AuditFile = serde_json::from_str(&text).unwrap();
    assert_eq!(back, out.audit);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["seed"], 9);
    assert_eq!(v["format_version"], 1);
    for key in ["id", "clean_label", "observed_label", "flipped", "candidate_loss"] {
        assert!(v["samples"][0].get(key).is_some(), "{key}");
    }
    let training_csv = {
        let mut buf = Vec::new();
        out.noisy.observed().write_csv(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    };
    assert!(!training_csv.contains("clean"));
}

#[test]
fn bernoulli_mode_respects_the_map() {
    let data = synth_blobs(4, 200, 2, 3.0, 4).unwrap();
    let map = adjacent_grade_map(4).unwrap();
    let cfg = NoiseConfig { mode: SelectionMode::Bernoulli, ..NoiseConfig::new(0.25, 3) };
    let out = generate(&data, &map, &cfg, &LogisticScorer::default()).unwrap();
    let frac = out.noisy.num_flipped() as f64 / out.noisy.len() as f64;
    assert!((frac - 0.25).abs() < 0.05, "{frac}");
    assert!(out.noisy.samples().iter().all(|s| s.candidate_loss.is_none()));
    for s in out.noisy.samples().iter().filter(|s| s.flipped) {
        assert!(map.targets(s.clean_label).contains(&s.observed_label));
    }
}

#[test]
fn custom_asymmetric_map() {
    let data = synth_blobs(3, 60, 2, 3.0, 5).unwrap();
    let map = MisdiagnosisMap::from_json(r#"{"0": [2], "1": [2], "2": [0]}"#, 3).unwrap();
    let out = generate(&data, &map, &NoiseConfig::new(0.4, 1), &LogisticScorer::default()).unwrap();
    for s in out.noisy.samples().iter().filter(|s| s.flipped) {
        let expected = if s.clean_label == 2 { 0 } else { 2 };
        assert_eq!(s.observed_label, expected);
    }
}

#[test]
fn scorer_ranks_mislabeled_samples_above_clean_ones() {
    let data = synth_blobs(3, 200, 2, 8.0, 6).unwrap();
    let (proxy, target) = stratified_split(&data, 0.3, 6).unwrap();
    // mislabel every 10th target sample to the next class
    let mislabeled: BTreeSet<usize> = (0..target.len()).step_by(10).collect();
    let labels: Vec<usize> = target
        .samples()
        .iter()
        .enumerate()
        .map(|(i, s)| if mislabeled.contains(&i) { (s.label + 1) % 3 } else { s.label })
        .collect();
    let target = target.with_labels(&labels).unwrap();
    let losses = score_with_proxy(&proxy, &target, 3, &LogisticScorer::default()).unwrap();
    let (mut ordered, mut total) = (0usize, 0usize);
    for (_, li) in losses.iter().enumerate().filter(|(i, _)| !mislabeled.contains(i)) {
        for &j in &mislabeled {
            total += 1;
            ordered += usize::from(*li < losses[j]);
        }
    }
    let frac = ordered as f64 / total as f64;
    assert!(frac >= 0.9, "ordered fraction {frac}");
}

#[test]
fn split_partitions_and_keeps_proportions() {
    let data = synth_blobs(4, 37, 2, 3.0, 7).unwrap();
    let (proxy, target) = stratified_split(&data, 0.3, 11).unwrap();
    let mut ids: Vec<u64> = proxy.samples().iter().chain(target.samples()).map(|s| s.id).collect();
    ids.sort_unstable();
    let mut all: Vec<u64> = data.samples().iter().map(|s| s.id).collect();
    all.sort_unstable();
    assert_eq!(ids, all);
    assert_eq!(proxy.len(), (0.3f64 * data.len() as f64).round() as usize);
    let counts: BTreeMap<usize, usize> = proxy.indices_by_class().into_iter().map(|(c, v)| (c, v.len())).collect();
    assert!(counts.values().all(|&c| c == 11 || c == 12));
    let empty = Dataset::new(2, vec![]).unwrap();
    assert!(stratified_split(&empty, 0.3, 0).is_err());
}
