//! Intrinsic evaluation: MorphScore, morpheme boundary precision/recall,
//! Rényi entropy of the token distribution, and token statistics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bpe::Encoding;
use crate::corpus::{SegmentedCorpus, SurfaceSegmentation, WordCounts};
use crate::segmenter::TokenizerModel;
use crate::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 2.0;

/// How a word with several gold boundaries is scored by MorphScore.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMode {
    /// Fraction of gold boundaries recovered.
    #[default]
    Fractional,
    /// 1 only if every gold boundary is recovered.
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    /// Pooled over all boundaries of all words.
    #[default]
    Micro,
    /// Mean of per-word ratios.
    Macro,
}

fn intersection_size(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

fn check_lengths(pairs: &[(Encoding, SurfaceSegmentation)]) -> Result<()> {
    for (enc, gold) in pairs {
        if enc.word_len() != gold.len() {
            return Err(Error::argument(format!(
                "encoding covers {} scalars but gold word {:?} has {}",
                enc.word_len(),
                gold.surface(),
                gold.len()
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MorphScore {
    pub value: Option<f64>,
    pub scored: usize,
    /// Words the tokenizer left whole.
    pub excluded_unsegmented: usize,
    /// Words whose gold analysis has no interior boundary.
    pub excluded_no_gold: usize,
}

pub fn morph_score(
    pairs: &[(Encoding, SurfaceSegmentation)],
    mode: ScoreMode,
) -> Result<MorphScore> {
    check_lengths(pairs)?;
    let mut out = MorphScore::default();
    let mut sum = 0.0;
    for (enc, gold) in pairs {
        let predicted = enc.boundaries();
        if predicted.is_empty() {
            out.excluded_unsegmented += 1;
            continue;
        }
        let gold = gold.boundaries();
        if gold.is_empty() {
            out.excluded_no_gold += 1;
            continue;
        }
        let hit = intersection_size(&predicted, gold);
        sum += match mode {
            ScoreMode::Fractional => hit as f64 / gold.len() as f64,
            ScoreMode::Strict => f64::from(u8::from(hit == gold.len())),
        };
        out.scored += 1;
    }
    out.value = (out.scored > 0).then(|| sum / out.scored as f64);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundaryScores {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

pub fn boundary_scores(
    pairs: &[(Encoding, SurfaceSegmentation)],
    averaging: Averaging,
) -> Result<BoundaryScores> {
    check_lengths(pairs)?;
    let (mut hits, mut predicted_total, mut gold_total) = (0usize, 0usize, 0usize);
    let (mut p_sum, mut p_n, mut r_sum, mut r_n) = (0.0, 0usize, 0.0, 0usize);
    for (enc, gold) in pairs {
        let predicted = enc.boundaries();
        let gold = gold.boundaries();
        let hit = intersection_size(&predicted, gold);
        hits += hit;
        predicted_total += predicted.len();
        gold_total += gold.len();
        if !predicted.is_empty() {
            p_sum += hit as f64 / predicted.len() as f64;
            p_n += 1;
        }
        if !gold.is_empty() {
            r_sum += hit as f64 / gold.len() as f64;
            r_n += 1;
        }
    }
    Ok(match averaging {
        Averaging::Micro => BoundaryScores {
            precision: (predicted_total > 0).then(|| hits as f64 / predicted_total as f64),
            recall: (gold_total > 0).then(|| hits as f64 / gold_total as f64),
        },
        Averaging::Macro => BoundaryScores {
            precision: (p_n > 0).then(|| p_sum / p_n as f64),
            recall: (r_n > 0).then(|| r_sum / r_n as f64),
        },
    })
}

/// Micro-averaged boundary precision; `None` when nothing was predicted.
pub fn boundary_precision(pairs: &[(Encoding, SurfaceSegmentation)]) -> Result<Option<f64>> {
    Ok(boundary_scores(pairs, Averaging::Micro)?.precision)
}

/// Micro-averaged boundary recall; `None` when no gold boundary exists.
pub fn boundary_recall(pairs: &[(Encoding, SurfaceSegmentation)]) -> Result<Option<f64>> {
    Ok(boundary_scores(pairs, Averaging::Micro)?.recall)
}

/// Rényi entropy of order `alpha` in nats.
pub fn renyi_entropy<I: IntoIterator<Item = u64>>(counts: I, alpha: f64) -> Result<f64> {
    if alpha == 1.0 {
        return Err(Error::argument(
            "alpha = 1 is the Shannon limit, which this function does not compute; use alpha != 1",
        ));
    }
    if alpha.is_nan() || alpha <= 0.0 || !alpha.is_finite() {
        return Err(Error::argument(format!(
            "alpha must be positive and finite, got {alpha}"
        )));
    }
    // Sorting makes the sum independent of input order.
    let mut counts: Vec<u64> = counts.into_iter().filter(|&c| c > 0).collect();
    if counts.is_empty() {
        return Err(Error::argument("no positive token counts"));
    }
    counts.sort_unstable();
    let total: f64 = counts.iter().map(|&c| c as f64).sum();
    let power_sum: f64 = counts.iter().map(|&c| (c as f64 / total).powf(alpha)).sum();
    Ok(power_sum.ln() / (1.0 - alpha))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub alpha: f64,
    pub score_mode: ScoreMode,
    pub averaging: Averaging,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            alpha: DEFAULT_ALPHA,
            score_mode: ScoreMode::default(),
            averaging: Averaging::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub morph_score: Option<f64>,
    pub boundary_precision: Option<f64>,
    pub boundary_recall: Option<f64>,
    pub renyi_entropy: f64,
    pub alpha: f64,
    pub entropy_unit: String,
    pub tokens_per_word: f64,
    pub words_total: usize,
    pub words_scored: usize,
    pub words_unsegmented: usize,
    pub words_no_gold_boundary: usize,
    pub words_excluded_nonprojectable: usize,
    pub score_mode: ScoreMode,
    pub averaging: Averaging,
}

/// Builds a report from already-encoded gold words and a token frequency
/// table.
pub fn report_from_pairs(
    pairs: &[(Encoding, SurfaceSegmentation)],
    token_counts: &BTreeMap<String, u64>,
    excluded_nonprojectable: usize,
    options: &EvalOptions,
) -> Result<MetricReport> {
    let ms = morph_score(pairs, options.score_mode)?;
    let scores = boundary_scores(pairs, options.averaging)?;
    let renyi_entropy = renyi_entropy(token_counts.values().copied(), options.alpha)?;
    let tokens_per_word = if pairs.is_empty() {
        0.0
    } else {
        pairs.iter().map(|(e, _)| e.len()).sum::<usize>() as f64 / pairs.len() as f64
    };
    Ok(MetricReport {
        morph_score: ms.value,
        boundary_precision: scores.precision,
        boundary_recall: scores.recall,
        renyi_entropy,
        alpha: options.alpha,
        entropy_unit: "nats".to_string(),
        tokens_per_word,
        words_total: pairs.len() + excluded_nonprojectable,
        words_scored: ms.scored,
        words_unsegmented: ms.excluded_unsegmented,
        words_no_gold_boundary: ms.excluded_no_gold,
        words_excluded_nonprojectable: excluded_nonprojectable,
        score_mode: options.score_mode,
        averaging: options.averaging,
    })
}

/// Encodes every gold surface with `model` and scores it. Entropy uses
/// token frequencies of `raw_text` when given, else of the gold words
/// weighted by their counts.
pub fn evaluate(
    model: &TokenizerModel,
    gold: &SegmentedCorpus,
    raw_text: Option<&WordCounts>,
    options: &EvalOptions,
) -> Result<MetricReport> {
    evaluate_with(|w| model.encode(w), gold, raw_text, options)
}

/// [`evaluate`] with a caller-supplied word encoder.
pub fn evaluate_with<F>(
    encode: F,
    gold: &SegmentedCorpus,
    raw_text: Option<&WordCounts>,
    options: &EvalOptions,
) -> Result<MetricReport>
where
    F: Fn(&str) -> Encoding,
{
    let pairs: Vec<(Encoding, SurfaceSegmentation)> = gold
        .iter()
        .map(|(seg, _)| (encode(seg.surface()), seg.clone()))
        .collect();

    let mut token_counts: BTreeMap<String, u64> = BTreeMap::new();
    match raw_text {
        Some(text) => {
            for (word, count) in text.iter() {
                for tok in encode(word).tokens {
                    *token_counts.entry(tok).or_default() += count;
                }
            }
        }
        None => {
            for ((enc, _), (_, count)) in pairs.iter().zip(gold.iter()) {
                for tok in &enc.tokens {
                    *token_counts.entry(tok.clone()).or_default() += count;
                }
            }
        }
    }
    report_from_pairs(&pairs, &token_counts, gold.excluded_nonprojectable, options)
}
