//! Reference implementations used as independent oracles.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet};

use movoc::corpus::{gen_synthetic_corpus, Inventory, SegmentedCorpus, WordCounts};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One training word as symbol strings plus the scalar offset at which each
/// symbol ends.
struct RefWord {
    syms: Vec<String>,
    ends: Vec<usize>,
    count: u64,
    blocked: BTreeSet<usize>,
}

impl RefWord {
    fn new(word: &str, count: u64, blocked: &[usize]) -> Self {
        let syms: Vec<String> = word.chars().map(String::from).collect();
        RefWord {
            ends: (1..=syms.len()).collect(),
            syms,
            count,
            blocked: blocked.iter().copied().collect(),
        }
    }

    fn junction_ok(&self, i: usize) -> bool {
        !self.blocked.contains(&self.ends[i])
    }
}

/// Brute-force BPE: every step recounts all adjacent pairs from scratch.
/// Ties go to the smallest (left, right) pair. Stops when the best count is
/// below 2, when `target` distinct symbols exist, or after `max_merges`.
/// Pairs whose concatenation is not in `allowed` are never chosen.
pub fn reference_bpe(
    words: &[(String, u64, Vec<usize>)],
    target: Option<usize>,
    max_merges: Option<usize>,
    allowed: Option<&HashSet<String>>,
) -> Vec<(String, String)> {
    let mut ws: Vec<RefWord> = words
        .iter()
        .map(|(w, c, b)| RefWord::new(w, *c, b))
        .collect();
    let mut symbols: BTreeSet<String> = ws.iter().flat_map(|w| w.syms.iter().cloned()).collect();
    let mut merges = Vec::new();
    loop {
        if max_merges.is_some_and(|m| merges.len() >= m)
            || target.is_some_and(|t| symbols.len() >= t)
        {
            break;
        }
        let mut counts: BTreeMap<(String, String), u64> = BTreeMap::new();
        for w in &ws {
            for i in 0..w.syms.len().saturating_sub(1) {
                if w.junction_ok(i) {
                    *counts
                        .entry((w.syms[i].clone(), w.syms[i + 1].clone()))
                        .or_default() += w.count;
                }
            }
        }
        // BTreeMap iterates pairs in ascending order, so the first maximum is
        // the tie-break winner.
        let mut best: Option<(&(String, String), u64)> = None;
        for (pair, &c) in &counts {
            if let Some(allowed) = allowed {
                if !allowed.contains(&format!("{}{}", pair.0, pair.1)) {
                    continue;
                }
            }
            if best.is_none_or(|(_, bc)| c > bc) {
                best = Some((pair, c));
            }
        }
        let Some(((l, r), c)) = best else { break };
        if c < 2 {
            break;
        }
        let (l, r) = (l.clone(), r.clone());
        let merged = format!("{l}{r}");
        for w in &mut ws {
            let mut i = 0;
            while i + 1 < w.syms.len() {
                if w.syms[i] == l && w.syms[i + 1] == r && w.junction_ok(i) {
                    w.syms[i] = merged.clone();
                    w.syms.remove(i + 1);
                    w.ends.remove(i);
                }
                i += 1;
            }
        }
        symbols.insert(merged);
        merges.push((l, r));
    }
    merges
}

pub fn plain_words(counts: &WordCounts) -> Vec<(String, u64, Vec<usize>)> {
    counts
        .iter()
        .map(|(w, c)| (w.to_string(), c, Vec::new()))
        .collect()
}

pub fn segmented_words(corpus: &SegmentedCorpus) -> Vec<(String, u64, Vec<usize>)> {
    corpus
        .iter()
        .map(|(s, c)| (s.surface().to_string(), c, s.boundaries().to_vec()))
        .collect()
}

/// Random corpus with at most `max_words` distinct words over the first
/// `alphabet` letters starting at `base`.
pub fn random_counts(
    rng: &mut ChaCha8Rng,
    max_words: usize,
    alphabet: usize,
    base: char,
) -> WordCounts {
    let letters: Vec<char> = (0..alphabet as u32)
        .map(|i| char::from_u32(base as u32 + i).unwrap())
        .collect();
    let n = rng.gen_range(1..=max_words);
    let mut wc = WordCounts::default();
    for _ in 0..n {
        let len = rng.gen_range(1..=8);
        let w: String = (0..len)
            .map(|_| letters[rng.gen_range(0..letters.len())])
            .collect();
        wc.add(&w, rng.gen_range(1..=6));
    }
    wc
}

/// Small synthetic fusional corpus with random inventory sizes.
pub fn random_synthetic(seed: u64) -> SegmentedCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inv = Inventory::random(
        seed,
        rng.gen_range(1..6),
        rng.gen_range(2..30),
        rng.gen_range(1..6),
        &movoc::corpus::synthetic_alphabet()[..rng.gen_range(4..20)],
    )
    .unwrap();
    gen_synthetic_corpus(seed, rng.gen_range(50..400), &inv).unwrap()
}

/// Gold boundaries recovered by an encoding, as a fraction of the gold set.
pub fn recall(predicted: &[usize], gold: &[usize]) -> f64 {
    if gold.is_empty() {
        return 1.0;
    }
    gold.iter().filter(|b| predicted.contains(b)).count() as f64 / gold.len() as f64
}
