//! Hybrid vocabulary construction.
//!
//! A total budget `s` is split evenly across `L` languages (remainder to the
//! first). Each language's share is divided into `floor(s_lang * r)`
//! morpheme slots, filled with the most frequent morphs of its segmented
//! corpus, and the remaining BPE slots. Seed characters and special tokens
//! sit outside the budget.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::bpe::{Provenance, Vocabulary};
use crate::corpus::{Annotation, CanonicalAnalysis, SurfaceSegmentation};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoVoCConfig {
    /// Total vocabulary size `s`.
    pub size: usize,
    /// Morpheme proportion `r`.
    pub ratio: f64,
    /// Language tags, in budget and id-assignment order.
    pub languages: Vec<String>,
}

impl MoVoCConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.ratio) {
            return Err(Error::Config(format!(
                "ratio r = {} is outside [0, 1]",
                self.ratio
            )));
        }
        if self.languages.is_empty() {
            return Err(Error::Config("at least one language is required".into()));
        }
        if self.size < self.languages.len() {
            return Err(Error::Config(format!(
                "size {} cannot give each of {} languages a positive budget",
                self.size,
                self.languages.len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub language: String,
    pub s_lang: usize,
    pub s_bpe: usize,
    pub s_morpheme: usize,
}

pub fn compute_budgets(config: &MoVoCConfig) -> Result<Vec<Budget>> {
    config.validate()?;
    let l = config.languages.len();
    let base = config.size / l;
    let remainder = config.size % l;
    Ok(config
        .languages
        .iter()
        .enumerate()
        .map(|(i, lang)| {
            let s_lang = if i == 0 { base + remainder } else { base };
            let s_morpheme = ((s_lang as f64 * config.ratio).floor() as usize).min(s_lang);
            Budget {
                language: lang.clone(),
                s_lang,
                s_bpe: s_lang - s_morpheme,
                s_morpheme,
            }
        })
        .collect())
}

/// Morphs in descending frequency order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphemeList {
    pub language: String,
    pub morphemes: Vec<(String, u64)>,
}

impl MorphemeList {
    pub fn len(&self) -> usize {
        self.morphemes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.morphemes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.morphemes.iter().map(|(m, c)| (m.as_str(), *c))
    }
}

/// Anything that yields morph forms.
pub trait Morphs {
    fn morph_forms(&self) -> Vec<&str>;
}

impl Morphs for SurfaceSegmentation {
    fn morph_forms(&self) -> Vec<&str> {
        self.morphs()
    }
}

impl Morphs for CanonicalAnalysis {
    fn morph_forms(&self) -> Vec<&str> {
        self.forms().collect()
    }
}

impl Morphs for Annotation {
    fn morph_forms(&self) -> Vec<&str> {
        self.morphs()
    }
}

/// Counts every morph form weighted by its word's count and keeps the top
/// `k`, ties broken by the smaller string.
pub fn extract_morphemes<'a, M, I>(entries: I, k: usize, language: &str) -> MorphemeList
where
    M: Morphs + 'a,
    I: IntoIterator<Item = (&'a M, u64)>,
{
    let mut freq: HashMap<&str, u64> = HashMap::new();
    for (entry, count) in entries {
        for form in entry.morph_forms() {
            if !form.is_empty() {
                *freq.entry(form).or_default() += count;
            }
        }
    }
    let mut ranked: Vec<(&str, u64)> = freq.into_iter().collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.truncate(k);
    MorphemeList {
        language: language.to_string(),
        morphemes: ranked
            .into_iter()
            .map(|(m, c)| (m.to_string(), c))
            .collect(),
    }
}

/// Unions per-language BPE vocabularies and morpheme lists. Ids go to
/// specials, then seed characters, then morphemes (language order, rank),
/// then BPE tokens (language order, rank). A string seen twice keeps its
/// first id; a morpheme takes over the provenance of a seed or BPE entry.
pub fn build_movoc_vocab(
    bpe_vocabs: &[(String, Vocabulary)],
    morphemes: &[MorphemeList],
) -> Vocabulary {
    let mut out = Vocabulary::with_specials();
    for (lang, v) in bpe_vocabs {
        for e in v.iter().filter(|e| e.provenance == Provenance::Seed) {
            out.push(&e.token, Provenance::Seed, Some(lang));
        }
    }
    for list in morphemes {
        for (m, _) in list.iter() {
            out.push(m, Provenance::Morpheme, Some(&list.language));
        }
    }
    for (lang, v) in bpe_vocabs {
        for e in v.iter().filter(|e| e.provenance == Provenance::Bpe) {
            out.push(&e.token, Provenance::Bpe, Some(lang));
        }
    }
    out
}

/// Sizes reported for a hybrid vocabulary: the sum of its parts and the
/// size after deduplication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabSizes {
    pub raw_sum: usize,
    pub deduplicated: usize,
    pub specials: usize,
    pub seed: usize,
    pub morpheme: usize,
    pub bpe: usize,
}

pub fn vocab_sizes(
    bpe_vocabs: &[(String, Vocabulary)],
    morphemes: &[MorphemeList],
    merged: &Vocabulary,
) -> VocabSizes {
    let raw_sum = crate::bpe::SPECIAL_TOKENS.len()
        + bpe_vocabs.iter().map(|(_, v)| v.len()).sum::<usize>()
        + morphemes.iter().map(MorphemeList::len).sum::<usize>();
    VocabSizes {
        raw_sum,
        deduplicated: merged.len(),
        specials: merged.count(Provenance::Special),
        seed: merged.count(Provenance::Seed),
        morpheme: merged.count(Provenance::Morpheme),
        bpe: merged.count(Provenance::Bpe),
    }
}
