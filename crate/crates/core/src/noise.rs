//! Clinical-knowledge asymmetric label noise.
//!
//! The pipeline splits off a stratified proxy set, trains a scorer on it,
//! ranks the remaining samples by cross-entropy under that scorer, and
//! relabels the highest-loss fraction with a class drawn uniformly from the
//! expert misdiagnosis map `S(y)`. Every step is seeded and the clean labels
//! are kept in an audit trail.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Sample};
use crate::error::{RaclError, Result};
use crate::model::{Model, ModelSpec};
use crate::prob::{softmax_slice, PROB_FLOOR};

/// Independent RNG streams derived from one user seed.
pub fn seeded_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

const STREAM_SPLIT: u64 = 1;
const STREAM_SCORER: u64 = 2;
const STREAM_SELECT: u64 = 3;
const STREAM_FLIP: u64 = 4;

/// Expert-specified plausible mislabels for each class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MisdiagnosisMap {
    targets: Vec<Vec<usize>>,
}

impl MisdiagnosisMap {
    pub fn new(targets: BTreeMap<usize, BTreeSet<usize>>, num_classes: usize) -> Result<Self> {
        let mut out = Vec::with_capacity(num_classes);
        for c in 0..num_classes {
            let set = targets.get(&c).ok_or_else(|| {
                RaclError::InvalidConfig(format!("misdiagnosis map has no entry for class {c}"))
            })?;
            if set.is_empty() {
                return Err(RaclError::InvalidConfig(format!("S({c}) is empty")));
            }
            if set.contains(&c) {
                return Err(RaclError::InvalidConfig(format!("S({c}) contains {c} itself")));
            }
            if let Some(bad) = set.iter().find(|&&t| t >= num_classes) {
                return Err(RaclError::InvalidConfig(format!(
                    "S({c}) contains {bad}, outside {num_classes} classes"
                )));
            }
            out.push(set.iter().copied().collect());
        }
        if let Some(extra) = targets.keys().find(|&&c| c >= num_classes) {
            return Err(RaclError::InvalidConfig(format!(
                "misdiagnosis map has entry for class {extra}, outside {num_classes} classes"
            )));
        }
        Ok(Self { targets: out })
    }

    pub fn num_classes(&self) -> usize {
        self.targets.len()
    }

    /// Sorted members of `S(class)`.
    pub fn targets(&self, class: usize) -> &[usize] {
        &self.targets[class]
    }

    /// Parses the JSON form `{"0": [1], "1": [0, 2], ...}`.
    pub fn from_json(text: &str, num_classes: usize) -> Result<Self> {
        let raw: BTreeMap<String, Vec<usize>> = serde_json::from_str(text)?;
        let mut targets = BTreeMap::new();
        for (key, vals) in raw {
            let c: usize = key
                .parse()
                .map_err(|_| RaclError::Parse(format!("map key {key:?} is not a class index")))?;
            targets.insert(c, vals.into_iter().collect());
        }
        Self::new(targets, num_classes)
    }

    pub fn to_json_map(&self) -> BTreeMap<String, Vec<usize>> {
        self.targets
            .iter()
            .enumerate()
            .map(|(c, t)| (c.to_string(), t.clone()))
            .collect()
    }
}

/// `S(c) = {c − 1, c + 1} ∩ [0, K − 1]`, the ordinal-grade confusion map.
pub fn adjacent_grade_map(num_classes: usize) -> Result<MisdiagnosisMap> {
    if num_classes < 2 {
        return Err(RaclError::InvalidConfig(format!(
            "adjacent map needs at least 2 classes, got {num_classes}"
        )));
    }
    let targets = (0..num_classes)
        .map(|c| {
            let mut s = BTreeSet::new();
            if c > 0 {
                s.insert(c - 1);
            }
            if c + 1 < num_classes {
                s.insert(c + 1);
            }
            (c, s)
        })
        .collect();
    MisdiagnosisMap::new(targets, num_classes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMode {
    /// Flip the top `⌈r_n·N⌉` samples by proxy loss.
    #[default]
    LossRanked,
    /// Flip each sample independently with probability `r_n`.
    Bernoulli,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default = "default_noise_rate")]
    pub noise_rate: f64,
    #[serde(default = "default_proxy_fraction")]
    pub proxy_fraction: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: SelectionMode,
}

fn default_noise_rate() -> f64 {
    0.2
}

fn default_proxy_fraction() -> f64 {
    0.3
}

impl NoiseConfig {
    pub fn new(noise_rate: f64, seed: u64) -> Self {
        Self { noise_rate, proxy_fraction: default_proxy_fraction(), seed, mode: SelectionMode::LossRanked }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.noise_rate) {
            return Err(RaclError::InvalidConfig(format!(
                "noise rate {} outside [0, 1)",
                self.noise_rate
            )));
        }
        if !(self.proxy_fraction > 0.0 && self.proxy_fraction < 1.0) {
            return Err(RaclError::InvalidConfig(format!(
                "proxy fraction {} outside (0, 1)",
                self.proxy_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisySample {
    pub id: u64,
    pub features: Vec<f64>,
    pub observed_label: usize,
    pub clean_label: usize,
    pub flipped: bool,
    pub candidate_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoisyDataset {
    feature_dim: usize,
    samples: Vec<NoisySample>,
}

impl NoisyDataset {
    pub fn samples(&self) -> &[NoisySample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn num_flipped(&self) -> usize {
        self.samples.iter().filter(|s| s.flipped).count()
    }

    /// Training-facing view: observed labels only.
    pub fn observed(&self) -> Dataset {
        self.view(|s| s.observed_label)
    }

    pub fn clean(&self) -> Dataset {
        self.view(|s| s.clean_label)
    }

    fn view(&self, label: impl Fn(&NoisySample) -> usize) -> Dataset {
        let samples = self
            .samples
            .iter()
            .map(|s| Sample { id: s.id, features: s.features.clone(), label: label(s) })
            .collect();
        Dataset::new(self.feature_dim, samples).expect("noisy dataset built from a valid dataset")
    }

    pub fn audit(&self, config: &NoiseConfig, map: &MisdiagnosisMap, proxy_ids: Vec<u64>) -> AuditFile {
        AuditFile {
            format_version: AUDIT_FORMAT_VERSION,
            config: *config,
            seed: config.seed,
            misdiagnosis_map: map.to_json_map(),
            num_target: self.samples.len(),
            num_flipped: self.num_flipped(),
            proxy_ids,
            samples: self
                .samples
                .iter()
                .map(|s| AuditEntry {
                    id: s.id,
                    clean_label: s.clean_label,
                    observed_label: s.observed_label,
                    flipped: s.flipped,
                    candidate_loss: s.candidate_loss,
                })
                .collect(),
        }
    }
}

pub const AUDIT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub id: u64,
    pub clean_label: usize,
    pub observed_label: usize,
    pub flipped: bool,
    pub candidate_loss: Option<f64>,
}

/// Private record of what the generator did; never used for training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditFile {
    pub format_version: u32,
    pub config: NoiseConfig,
    pub seed: u64,
    pub misdiagnosis_map: BTreeMap<String, Vec<usize>>,
    pub num_target: usize,
    pub num_flipped: usize,
    pub proxy_ids: Vec<u64>,
    pub samples: Vec<AuditEntry>,
}

impl AuditFile {
    pub fn clean_labels(&self) -> BTreeMap<u64, (usize, bool)> {
        self.samples.iter().map(|e| (e.id, (e.clean_label, e.flipped))).collect()
    }
}

/// Per-class proxy counts by the largest-remainder method: floors of
/// `fraction·n_c`, then one extra sample to the classes with the largest
/// remainders until the total reaches `round(fraction·N)`.
pub fn proxy_counts(class_counts: &[usize], fraction: f64) -> Vec<usize> {
    let exact: Vec<f64> = class_counts.iter().map(|&n| fraction * n as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let total = (fraction * class_counts.iter().sum::<usize>() as f64).round() as usize;
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut missing = total.saturating_sub(counts.iter().sum());
    for &c in order.iter().cycle().take(order.len() * 2) {
        if missing == 0 {
            break;
        }
        if counts[c] < class_counts[c] {
            counts[c] += 1;
            missing -= 1;
        }
    }
    counts
}

/// Seeded stratified split into `(proxy, target)`, both in dataset order.
pub fn stratified_split(dataset: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(RaclError::InvalidConfig(format!("split fraction {fraction} outside (0, 1)")));
    }
    if dataset.is_empty() {
        return Err(RaclError::InvalidInput("cannot split an empty dataset".into()));
    }
    let k = dataset.inferred_num_classes();
    let counts = dataset.class_counts(k);
    if let Some(c) = counts.iter().position(|&n| n == 0) {
        return Err(RaclError::InvalidInput(format!("class {c} has no samples")));
    }
    let take = proxy_counts(&counts, fraction);
    let mut rng = seeded_stream(seed, STREAM_SPLIT);
    let mut in_proxy = vec![false; dataset.len()];
    for (class, mut idx) in dataset.indices_by_class() {
        idx.shuffle(&mut rng);
        for &i in &idx[..take[class]] {
            in_proxy[i] = true;
        }
    }
    let (proxy, target): (Vec<usize>, Vec<usize>) = (0..dataset.len()).partition(|&i| in_proxy[i]);
    Ok((dataset.subset(&proxy), dataset.subset(&target)))
}

/// Scores target samples by cross-entropy under a model fitted on the
/// proxy set.
pub trait ProxyScorer {
    fn score(&self, proxy: &Dataset, target: &Dataset, num_classes: usize) -> Result<Vec<f64>>;
}

/// Multinomial logistic regression on standardized features, trained by
/// full-batch gradient descent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogisticScorer {
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub seed: u64,
}

impl Default for LogisticScorer {
    fn default() -> Self {
        Self { epochs: 300, learning_rate: 0.5, l2: 1e-4, seed: 0 }
    }
}

impl ProxyScorer for LogisticScorer {
    fn score(&self, proxy: &Dataset, target: &Dataset, num_classes: usize) -> Result<Vec<f64>> {
        let present: BTreeSet<usize> = proxy.samples().iter().map(|s| s.label).collect();
        if present.len() < 2 {
            return Err(RaclError::InvalidInput(format!(
                "proxy set covers {} class(es); the scorer needs at least 2",
                present.len()
            )));
        }
        if target.feature_dim() != proxy.feature_dim() {
            return Err(RaclError::DimensionMismatch {
                expected: proxy.feature_dim(),
                actual: target.feature_dim(),
            });
        }
        let d = proxy.feature_dim();
        let n = proxy.len() as f64;
        let mut mean = vec![0.0; d];
        for s in proxy.samples() {
            for (m, v) in mean.iter_mut().zip(&s.features) {
                *m += v / n;
            }
        }
        let mut scale = vec![0.0; d];
        for s in proxy.samples() {
            for ((sd, v), m) in scale.iter_mut().zip(&s.features).zip(&mean) {
                *sd += (v - m) * (v - m) / n;
            }
        }
        let scale: Vec<f64> = scale.into_iter().map(|v| if v > 1e-12 { v.sqrt() } else { 1.0 }).collect();
        let standardize = |x: &[f64]| -> Vec<f64> {
            x.iter().zip(&mean).zip(&scale).map(|((v, m), s)| (v - m) / s).collect()
        };
        let xs: Vec<Vec<f64>> = proxy.samples().iter().map(|s| standardize(&s.features)).collect();

        let mut rng = seeded_stream(self.seed, STREAM_SCORER);
        let mut model = Model::init(ModelSpec::linear(d), num_classes, &mut rng)?;
        let mut velocity = model.zero_grads();
        for epoch in 0..self.epochs {
            let mut grads = model.zero_grads();
            for (x, s) in xs.iter().zip(proxy.samples()) {
                let trace = model.forward(x);
                let mut p = softmax_slice(&trace.logits);
                p[s.label] -= 1.0;
                model.backward(x, &trace, &p, &mut grads);
            }
            grads.scale(1.0 / n);
            model.add_weight_decay(&mut grads, self.l2);
            if !grads.is_finite() {
                return Err(RaclError::Divergence {
                    epoch,
                    detail: "proxy scorer gradient became non-finite".into(),
                });
            }
            model.momentum_step(&grads, &mut velocity, self.learning_rate, 0.0);
        }

        target
            .samples()
            .iter()
            .map(|s| {
                let z = model.forward(&standardize(&s.features)).logits;
                if z.iter().any(|v| !v.is_finite()) {
                    return Err(RaclError::Divergence {
                        epoch: self.epochs,
                        detail: format!("proxy scorer produced non-finite logits for sample {}", s.id),
                    });
                }
                let p = softmax_slice(&z);
                let label_p = p.get(s.label).copied().unwrap_or(0.0);
                Ok(-label_p.max(PROB_FLOOR).ln())
            })
            .collect()
    }
}

/// Thin wrapper so callers need not construct the scorer explicitly.
pub fn score_with_proxy(
    proxy: &Dataset,
    target: &Dataset,
    num_classes: usize,
    scorer: &dyn ProxyScorer,
) -> Result<Vec<f64>> {
    scorer.score(proxy, target, num_classes)
}

/// The `⌈r_n·N⌉` ids with the largest losses, ties broken by ascending id.
pub fn select_candidates(scored: &[(u64, f64)], noise_rate: f64) -> Result<BTreeSet<u64>> {
    if !(0.0..1.0).contains(&noise_rate) {
        return Err(RaclError::InvalidConfig(format!("noise rate {noise_rate} outside [0, 1)")));
    }
    let count = flip_count(scored.len(), noise_rate);
    let mut order: Vec<&(u64, f64)> = scored.iter().collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(order.into_iter().take(count).map(|(id, _)| *id).collect())
}

/// `⌈r_n·N⌉`, guarded against products like `0.3·10 = 3.0000000000000004`.
pub fn flip_count(n: usize, noise_rate: f64) -> usize {
    let exact = noise_rate * n as f64;
    let count = (exact - 1e-9 * exact.max(1.0)).ceil().max(0.0) as usize;
    count.min(n)
}

/// Replaces each candidate's label with a uniform draw from `S(y_c)`,
/// drawing in ascending id order.
pub fn flip_labels(
    target: &Dataset,
    candidates: &BTreeSet<u64>,
    map: &MisdiagnosisMap,
    seed: u64,
    losses: Option<&[f64]>,
) -> Result<NoisyDataset> {
    let ids: BTreeSet<u64> = target.samples().iter().map(|s| s.id).collect();
    if let Some(missing) = candidates.iter().find(|id| !ids.contains(id)) {
        return Err(RaclError::InvalidInput(format!("candidate {missing} is not in the target set")));
    }
    let mut rng = seeded_stream(seed, STREAM_FLIP);
    let mut order: Vec<usize> = (0..target.len()).collect();
    order.sort_by_key(|&i| target.samples()[i].id);
    let mut draws = vec![None; target.len()];
    for i in order {
        let s = &target.samples()[i];
        if !candidates.contains(&s.id) {
            continue;
        }
        if s.label >= map.num_classes() {
            return Err(RaclError::IndexOutOfRange { index: s.label, num_classes: map.num_classes() });
        }
        let options = map.targets(s.label);
        if options.is_empty() {
            return Err(RaclError::InvalidConfig(format!("S({}) is empty", s.label)));
        }
        draws[i] = Some(options[rng.gen_range(0..options.len())]);
    }
    let samples = target
        .samples()
        .iter()
        .zip(draws)
        .enumerate()
        .map(|(i, (s, draw))| NoisySample {
            id: s.id,
            features: s.features.clone(),
            observed_label: draw.unwrap_or(s.label),
            clean_label: s.label,
            flipped: draw.is_some(),
            candidate_loss: losses.map(|l| l[i]),
        })
        .collect();
    Ok(NoisyDataset { feature_dim: target.feature_dim(), samples })
}

/// Output of the full generator.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseOutcome {
    pub noisy: NoisyDataset,
    pub proxy: Dataset,
    pub audit: AuditFile,
}

/// Split, score, select and flip.
pub fn generate(
    dataset: &Dataset,
    map: &MisdiagnosisMap,
    config: &NoiseConfig,
    scorer: &dyn ProxyScorer,
) -> Result<NoiseOutcome> {
    config.validate()?;
    let k = map.num_classes();
    if dataset.inferred_num_classes() > k {
        return Err(RaclError::InvalidConfig(format!(
            "dataset has labels beyond the {k} classes of the misdiagnosis map"
        )));
    }
    let (proxy, target) = stratified_split(dataset, config.proxy_fraction, config.seed)?;
    let (candidates, losses) = match config.mode {
        SelectionMode::LossRanked => {
            let losses = score_with_proxy(&proxy, &target, k, scorer)?;
            let scored: Vec<(u64, f64)> =
                target.samples().iter().map(|s| s.id).zip(losses.iter().copied()).collect();
            (select_candidates(&scored, config.noise_rate)?, Some(losses))
        }
        SelectionMode::Bernoulli => {
            let mut rng = seeded_stream(config.seed, STREAM_SELECT);
            let mut ids: Vec<u64> = target.samples().iter().map(|s| s.id).collect();
            ids.sort_unstable();
            let chosen = ids.into_iter().filter(|_| rng.gen::<f64>() < config.noise_rate).collect();
            (chosen, None)
        }
    };
    let noisy = flip_labels(&target, &candidates, map, config.seed, losses.as_deref())?;
    let proxy_ids = proxy.samples().iter().map(|s| s.id).collect();
    let audit = noisy.audit(config, map, proxy_ids);
    Ok(NoiseOutcome { noisy, proxy, audit })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labelled(counts: &[usize]) -> Dataset {
        let mut samples = Vec::new();
        let mut id = 0;
        for (c, &n) in counts.iter().enumerate() {
            for _ in 0..n {
                samples.push(Sample { id, features: vec![id as f64, c as f64], label: c });
                id += 1;
            }
        }
        Dataset::new(2, samples).unwrap()
    }

    #[test]
    fn largest_remainder_counts() {
        assert_eq!(proxy_counts(&[50, 30, 20], 0.3), vec![15, 9, 6]);
        assert_eq!(proxy_counts(&[10, 7], 0.3), vec![3, 2]);
        // 0.5·(3,3,3) = 1.5 each, total round(4.5) = 5 → lowest indices get the extra
        assert_eq!(proxy_counts(&[3, 3, 3], 0.5), vec![2, 2, 1]);
    }

    #[test]
    fn split_partitions_and_is_seeded() {
        let d = labelled(&[50, 30, 20]);
        let (p, t) = stratified_split(&d, 0.3, 7).unwrap();
        assert_eq!(p.class_counts(3), vec![15, 9, 6]);
        assert_eq!(p.len() + t.len(), 100);
        let mut ids: Vec<u64> = p.samples().iter().chain(t.samples()).map(|s| s.id).collect();
        ids.sort_unstable();
        assert_eq!(ids, (0..100).collect::<Vec<_>>());
        assert_eq!(stratified_split(&d, 0.3, 7).unwrap(), (p.clone(), t));
        let (p2, _) = stratified_split(&d, 0.3, 8).unwrap();
        assert_ne!(p, p2);
    }

    #[test]
    fn split_rejects_empty_class() {
        let d = Dataset::new(1, vec![
            Sample { id: 0, features: vec![0.0], label: 0 },
            Sample { id: 1, features: vec![0.0], label: 2 },
        ])
        .unwrap();
        assert!(stratified_split(&d, 0.3, 0).is_err());
    }

    #[test]
    fn adjacent_maps() {
        let m = adjacent_grade_map(5).unwrap();
        assert_eq!(m.targets(0), &[1]);
        assert_eq!(m.targets(2), &[1, 3]);
        assert_eq!(m.targets(4), &[3]);
        let m = adjacent_grade_map(2).unwrap();
        assert_eq!((m.targets(0), m.targets(1)), (&[1][..], &[0][..]));
        assert!(adjacent_grade_map(1).is_err());
    }

    #[test]
    fn map_validation_and_json() {
        let m = MisdiagnosisMap::from_json(r#"{"0": [1], "1": [0, 2], "2": [1]}"#, 3).unwrap();
        assert_eq!(m, adjacent_grade_map(3).unwrap());
        assert!(MisdiagnosisMap::from_json(r#"{"0": [0], "1": [0]}"#, 2).is_err());
        assert!(MisdiagnosisMap::from_json(r#"{"0": [], "1": [0]}"#, 2).is_err());
        assert!(MisdiagnosisMap::from_json(r#"{"0": [1]}"#, 2).is_err());
        assert!(MisdiagnosisMap::from_json(r#"{"0": [5], "1": [0]}"#, 2).is_err());
        assert!(MisdiagnosisMap::from_json(r#"{"x": [1], "1": [0]}"#, 2).is_err());
    }

    #[test]
    fn candidate_selection() {
        let scored: Vec<(u64, f64)> = (0..100).map(|i| (i, (i * 37 % 100) as f64)).collect();
        assert_eq!(select_candidates(&scored, 0.2).unwrap().len(), 20);
        assert!(select_candidates(&scored, 0.0).unwrap().is_empty());
        let s = select_candidates(&[(10, 3.0), (11, 1.0), (12, 2.0)], 1.0 / 3.0).unwrap();
        assert_eq!(s, BTreeSet::from([10]));
        // tie on loss → lower id first
        let s = select_candidates(&[(5, 1.0), (2, 1.0), (9, 0.5)], 0.3).unwrap();
        assert_eq!(s, BTreeSet::from([2]));
        assert!(select_candidates(&scored, 1.0).is_err());
    }

    #[test]
    fn flip_count_is_exact_ceiling() {
        assert_eq!(flip_count(10, 0.3), 3);
        assert_eq!(flip_count(1000, 0.2), 200);
        assert_eq!(flip_count(7, 0.5), 4);
        assert_eq!(flip_count(0, 0.5), 0);
        for n in 1..200 {
            for r in [0.05, 0.1, 0.15, 0.2, 0.3, 0.45, 0.7] {
                let expected = (1..=n).find(|c| *c as f64 >= r * n as f64 - 1e-9).unwrap_or(n);
                assert_eq!(flip_count(n, r), expected, "n={n} r={r}");
            }
        }
    }

    #[test]
    fn flips_follow_map() {
        let d = labelled(&[0, 0, 40, 0, 0]);
        let d = Dataset::new(2, d.samples().to_vec()).unwrap();
        let map = adjacent_grade_map(5).unwrap();
        let all: BTreeSet<u64> = d.samples().iter().map(|s| s.id).collect();
        let noisy = flip_labels(&d, &all, &map, 3, None).unwrap();
        assert_eq!(noisy.num_flipped(), 40);
        assert!(noisy.samples().iter().all(|s| s.observed_label == 1 || s.observed_label == 3));
        assert!(noisy.samples().iter().any(|s| s.observed_label == 1));
        assert!(noisy.samples().iter().any(|s| s.observed_label == 3));

        let none = flip_labels(&d, &BTreeSet::new(), &map, 3, None).unwrap();
        assert_eq!(none.observed(), d);

        let d2 = labelled(&[5, 5]);
        let map2 = adjacent_grade_map(2).unwrap();
        let zeros: BTreeSet<u64> = (0..5).collect();
        let flipped = flip_labels(&d2, &zeros, &map2, 0, None).unwrap();
        assert!(flipped.samples()[..5].iter().all(|s| s.observed_label == 1 && s.flipped));
        assert!(flip_labels(&d2, &BTreeSet::from([99]), &map2, 0, None).is_err());
    }

    #[test]
    fn scorer_rejects_single_class_proxy() {
        let d = labelled(&[5, 5]);
        let proxy = d.subset(&[0, 1, 2]);
        assert!(LogisticScorer::default().score(&proxy, &d, 2).is_err());
    }

    #[test]
    fn scorer_memorizes_separable_data() {
        let mut samples = Vec::new();
        for i in 0..40u64 {
            let c = (i % 2) as usize;
            let x = if c == 0 { -5.0 } else { 5.0 } + (i as f64 * 0.37).sin();
            samples.push(Sample { id: i, features: vec![x, (i as f64).cos()], label: c });
        }
        let d = Dataset::new(2, samples).unwrap();
        let scorer = LogisticScorer { epochs: 2000, learning_rate: 1.0, l2: 0.0, seed: 1 };
        let losses = scorer.score(&d, &d, 2).unwrap();
        assert!(losses.iter().all(|l| *l < 0.05), "{losses:?}");
    }
}
