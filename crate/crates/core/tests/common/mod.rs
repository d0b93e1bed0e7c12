//! Test-only oracles and generators. Nothing here calls into the library's
//! distance or classification code.

#![allow(dead_code)]

use std::path::PathBuf;

use hav_profiler::embedding::EmbeddingModel;
use hav_profiler::text::NounBag;
use hav_profiler::topic::{Topic, TopicSet};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

/// Plain left-to-right summation, one `sqrt` per pair.
pub fn naive_euclidean(a: &[f64], b: &[f64]) -> f64 {
    let mut sum = 0.0;
    for i in 0..a.len() {
        sum += (a[i] - b[i]) * (a[i] - b[i]);
    }
    sum.sqrt()
}

/// A classification instance held as plain vectors so the oracle never
/// touches the library's data structures.
#[derive(Debug, Clone)]
pub struct Instance {
    pub dim: usize,
    pub vocab: Vec<(String, Vec<f64>)>,
    pub topics: Vec<(String, Vec<String>)>,
    pub bag: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleOutcome {
    Unclassified,
    Assigned {
        topic: String,
        distance: f64,
        per_topic: Vec<(String, f64)>,
    },
}

impl Instance {
    fn vector(&self, word: &str) -> Option<&Vec<f64>> {
        self.vocab.iter().find(|(w, _)| w == word).map(|(_, v)| v)
    }

    /// Brute force: bag words × topics × centroid words, linear vocabulary
    /// search, strict `<` so the first-declared topic keeps ties.
    pub fn oracle(&self) -> OracleOutcome {
        let mut per_topic = Vec::new();
        let mut any_matched = false;
        for (name, words) in &self.topics {
            // Centroids are deduplicated and OOV-filtered, in first-seen order.
            let mut centroid: Vec<&Vec<f64>> = Vec::new();
            let mut seen: Vec<&str> = Vec::new();
            for w in words {
                if seen.contains(&w.as_str()) {
                    continue;
                }
                if let Some(v) = self.vector(w) {
                    seen.push(w);
                    centroid.push(v);
                }
            }
            let mut total = 0.0;
            let mut matched = 0;
            for k in &self.bag {
                let Some(kv) = self.vector(k) else { continue };
                matched += 1;
                let mut best = f64::INFINITY;
                for cv in &centroid {
                    let d = naive_euclidean(kv, cv);
                    if d < best {
                        best = d;
                    }
                }
                total += best;
            }
            if matched == 0 {
                total = f64::INFINITY;
            } else {
                any_matched = true;
            }
            per_topic.push((name.clone(), total));
        }
        if !any_matched {
            return OracleOutcome::Unclassified;
        }
        let mut winner = 0;
        for i in 1..per_topic.len() {
            if per_topic[i].1 < per_topic[winner].1 {
                winner = i;
            }
        }
        OracleOutcome::Assigned {
            topic: per_topic[winner].0.clone(),
            distance: per_topic[winner].1,
            per_topic,
        }
    }

    pub fn model(&self) -> EmbeddingModel {
        EmbeddingModel::from_entries(self.dim, self.vocab.clone()).unwrap()
    }

    pub fn topic_set(&self, model: &EmbeddingModel) -> TopicSet {
        TopicSet::new(
            self.topics
                .iter()
                .map(|(n, ws)| Topic::from_words(n.clone(), ws, model).unwrap())
                .collect(),
        )
        .unwrap()
    }

    pub fn noun_bag(&self) -> NounBag {
        self.bag.iter().cloned().collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Components {
    /// Multiples of 1/4 in [-2, 2]; every squared difference and partial
    /// sum is exact, so any summation order gives the same bits.
    Dyadic,
    Continuous,
}

/// vocab ≤ 50, dim ≤ 8, 2–5 topics of 1–20 centroid words, bags of 0–10
/// words with ~10% out-of-vocabulary injections. Some topics copy another
/// topic's word set in a different order to force exact ties.
pub fn random_instance<R: Rng>(rng: &mut R, components: Components) -> Instance {
    let dim = rng.gen_range(1..=8);
    let vocab_size = rng.gen_range(2..=50);
    let vocab: Vec<(String, Vec<f64>)> = (0..vocab_size)
        .map(|i| {
            let v = (0..dim)
                .map(|_| match components {
                    Components::Dyadic => rng.gen_range(-8i32..=8) as f64 / 4.0,
                    Components::Continuous => rng.gen_range(-10.0..10.0),
                })
                .collect();
            (format!("w{i}"), v)
        })
        .collect();
    let n_topics = rng.gen_range(2..=5);
    let mut topics: Vec<(String, Vec<String>)> = Vec::new();
    for t in 0..n_topics {
        let words = if t > 0 && rng.gen_bool(0.15) {
            let mut copy = topics[rng.gen_range(0..t)].1.clone();
            copy.shuffle(rng);
            copy
        } else {
            let n = rng.gen_range(1..=20);
            (0..n)
                .map(|_| vocab[rng.gen_range(0..vocab_size)].0.clone())
                .collect()
        };
        topics.push((format!("t{t}"), words));
    }
    let bag_len = rng.gen_range(0..=10);
    let bag = (0..bag_len)
        .map(|i| {
            if rng.gen_bool(0.1) {
                format!("oov{i}")
            } else {
                vocab[rng.gen_range(0..vocab_size)].0.clone()
            }
        })
        .collect();
    Instance {
        dim,
        vocab,
        topics,
        bag,
    }
}
