//! End-to-end hybrid vocabulary construction for one or more languages.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::bpe::{train_bpe, MergeTable, Vocabulary};
use crate::corpus::{AnnotatedCorpus, SegmentedCorpus, SurfaceSegmentation, WordCounts};
use crate::segmenter::{train_constrained_with, TokenizerModel, TrainOptions};
use crate::vocab::{
    build_movoc_vocab, compute_budgets, extract_morphemes, vocab_sizes, Budget, MoVoCConfig,
    MorphemeList, VocabSizes,
};
use crate::{Error, Result};

/// Inputs for one language.
#[derive(Debug, Clone)]
pub struct LanguageInput {
    pub language: String,
    /// Plain-text word frequencies. When empty, the annotated surfaces are
    /// used instead.
    pub plain: WordCounts,
    pub annotations: AnnotatedCorpus,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub budgets: Vec<Budget>,
    pub bpe: Vec<(String, Vocabulary, MergeTable)>,
    pub morphemes: Vec<MorphemeList>,
    pub vocabulary: Vocabulary,
    pub sizes: VocabSizes,
    pub model: TokenizerModel,
    /// Words the final model was trained on, with gold boundaries where
    /// known.
    pub training_corpus: SegmentedCorpus,
}

/// Summary written next to pipeline artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSummary {
    pub budgets: Vec<Budget>,
    pub sizes: VocabSizes,
    pub morphemes_per_language: BTreeMap<String, usize>,
    pub bpe_tokens_per_language: BTreeMap<String, usize>,
    pub learned_merges: usize,
    pub boundary_certified: bool,
}

impl PipelineOutput {
    pub fn summary(&self) -> PipelineSummary {
        PipelineSummary {
            budgets: self.budgets.clone(),
            sizes: self.sizes,
            morphemes_per_language: self
                .morphemes
                .iter()
                .map(|m| (m.language.clone(), m.len()))
                .collect(),
            bpe_tokens_per_language: self
                .bpe
                .iter()
                .map(|(l, v, _)| (l.clone(), v.count(crate::bpe::Provenance::Bpe)))
                .collect(),
            learned_merges: self.model.merges().len(),
            boundary_certified: self.model.metadata.boundary_certified,
        }
    }
}

/// Plain-corpus words with gold boundaries attached where an annotation
/// covers the surface. Counts of a word repeated across corpora add up; the
/// first gold corpus to segment a surface wins.
pub fn training_corpus(
    language: &str,
    plains: &[WordCounts],
    golds: &[SegmentedCorpus],
) -> Result<SegmentedCorpus> {
    let mut boundaries: BTreeMap<&str, &SurfaceSegmentation> = BTreeMap::new();
    for gold in golds {
        for (seg, _) in gold.iter() {
            boundaries.entry(seg.surface()).or_insert(seg);
        }
    }
    let mut entries: Vec<(SurfaceSegmentation, u64)> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    for plain in plains {
        for (word, count) in plain.iter() {
            if let Some(&i) = index.get(word) {
                entries[i].1 += count;
                continue;
            }
            let seg = match boundaries.get(word) {
                Some(seg) => (*seg).clone(),
                None => SurfaceSegmentation::whole(word)?,
            };
            index.insert(word.to_string(), entries.len());
            entries.push((seg, count));
        }
    }
    SegmentedCorpus::from_entries(language, entries)
}

fn alphabet_size(counts: &WordCounts) -> usize {
    counts
        .iter()
        .flat_map(|(w, _)| w.chars())
        .collect::<BTreeSet<char>>()
        .len()
}

/// Output of the vocabulary stage, before merge learning.
#[derive(Debug, Clone)]
pub struct VocabStage {
    pub budgets: Vec<Budget>,
    pub bpe: Vec<(String, Vocabulary, MergeTable)>,
    pub morphemes: Vec<MorphemeList>,
    pub vocabulary: Vocabulary,
    pub sizes: VocabSizes,
    /// Per-language word counts actually used.
    pub plains: Vec<WordCounts>,
    /// Per-language surface-projectable gold segmentations.
    pub golds: Vec<SegmentedCorpus>,
}

/// Budgets, per-language BPE, morpheme extraction and the vocabulary union.
pub fn build_vocabulary(config: &MoVoCConfig, inputs: &[LanguageInput]) -> Result<VocabStage> {
    config.validate()?;
    let tags: Vec<&str> = inputs.iter().map(|i| i.language.as_str()).collect();
    if tags
        != config
            .languages
            .iter()
            .map(String::as_str)
            .collect::<Vec<_>>()
    {
        return Err(Error::Config(format!(
            "configured languages {:?} do not match the supplied inputs {:?}",
            config.languages, tags
        )));
    }
    let budgets = compute_budgets(config)?;

    let mut bpe = Vec::with_capacity(inputs.len());
    let mut morphemes = Vec::with_capacity(inputs.len());
    let mut plains = Vec::with_capacity(inputs.len());
    let mut golds = Vec::with_capacity(inputs.len());
    for (input, budget) in inputs.iter().zip(&budgets) {
        let gold = input.annotations.to_segmented();
        let mut plain = if input.plain.is_empty() {
            gold.word_counts()
        } else {
            input.plain.clone()
        };
        plain.language = Some(input.language.clone());

        let target = alphabet_size(&plain) + budget.s_bpe;
        let (vocab, merges) = train_bpe(&plain, target)?;
        bpe.push((input.language.clone(), vocab, merges));

        let mut weighted = input.annotations.clone();
        weighted.reweight(&plain);
        morphemes.push(extract_morphemes(
            weighted.entries.iter().map(|(a, c)| (a, *c)),
            budget.s_morpheme,
            &input.language,
        ));
        plains.push(plain);
        golds.push(gold);
    }

    let bpe_vocabs: Vec<(String, Vocabulary)> =
        bpe.iter().map(|(l, v, _)| (l.clone(), v.clone())).collect();
    let vocabulary = build_movoc_vocab(&bpe_vocabs, &morphemes);
    let sizes = vocab_sizes(&bpe_vocabs, &morphemes, &vocabulary);
    Ok(VocabStage {
        budgets,
        bpe,
        morphemes,
        vocabulary,
        sizes,
        plains,
        golds,
    })
}

/// Runs [`build_vocabulary`], then constrained merge learning restricted to
/// the hybrid vocabulary.
///
/// `max_merges` caps the final merge table; `None` learns every merge whose
/// output is in the hybrid vocabulary.
pub fn run_pipeline(
    config: &MoVoCConfig,
    inputs: &[LanguageInput],
    max_merges: Option<usize>,
) -> Result<PipelineOutput> {
    let VocabStage {
        budgets,
        bpe,
        morphemes,
        vocabulary,
        sizes,
        plains,
        golds,
    } = build_vocabulary(config, inputs)?;
    let training_corpus = training_corpus(&config.languages.join("+"), &plains, &golds)?;

    let mut model = train_constrained_with(
        &training_corpus,
        &vocabulary,
        &TrainOptions {
            n_merges: max_merges.unwrap_or(usize::MAX),
            closed_vocabulary: true,
            ..Default::default()
        },
    )?;
    model.metadata.requested_merges = max_merges;
    model.metadata.config = serde_json::json!({
        "size": config.size,
        "ratio": config.ratio,
        "languages": config.languages,
        "closed_vocabulary": true,
    });
    for (input, plain) in inputs.iter().zip(&plains) {
        model
            .metadata
            .corpus_fingerprints
            .insert(format!("{}:plain", input.language), plain.fingerprint());
        model.metadata.corpus_fingerprints.insert(
            format!("{}:segmented", input.language),
            input.annotations.fingerprint(),
        );
    }

    Ok(PipelineOutput {
        budgets,
        bpe,
        morphemes,
        vocabulary,
        sizes,
        model,
        training_corpus,
    })
}
