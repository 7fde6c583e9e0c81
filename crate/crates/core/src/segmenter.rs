//! Morpheme-aware tokenizer model.
//!
//! Training is plain BPE except that, for a word with gold boundary set `M`,
//! an adjacent symbol pair whose junction offset lies in `M` is never
//! counted nor merged. Starting from single characters this means no
//! learned token ever strictly contains a gold boundary.
//!
//! Encoding in [`Mode::Movoc`] runs in two stages: a leftmost-longest match
//! of morpheme-lexicon entries, then BPE over the unmatched gaps. Lexicon
//! matches are emitted as single tokens.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_normalization::{is_nfc, UnicodeNormalization};

use crate::bpe::{
    learn_merges, BpeEncoder, Encoding, Fallback, MergeTable, Provenance, StopRule, TokenTable,
    TrainWord, VocabEntry, Vocabulary, BOS_TOKEN, EOS_TOKEN, PAD_TOKEN, SPECIAL_TOKENS, UNK_TOKEN,
};
use crate::corpus::{SegmentedCorpus, WordCounts};
use crate::pretok::{
    join_pretokens, pretokenize, pretokenize_str, NormalizationPolicy, NormalizedText, PreToken,
    PreTokenKind,
};
use crate::trie::Trie;
use crate::{Error, Result};

pub const MODEL_VERSION: u32 = 1;
pub const SUPPORTED_VERSIONS: [u32; 1] = [MODEL_VERSION];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    PlainBpe,
    Movoc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Specials {
    pub unk: u32,
    pub pad: u32,
    pub bos: u32,
    pub eos: u32,
}

/// Provenance of a trained model. Contains no timestamps so identical
/// inputs serialize identically.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    /// `"junction"` when merges were learned under boundary exclusion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint: Option<String>,
    /// Set when every training word's final segmentation was checked to
    /// contain no token spanning a gold boundary.
    #[serde(default)]
    pub boundary_certified: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requested_merges: Option<usize>,
    #[serde(default)]
    pub learned_merges: usize,
    #[serde(default)]
    pub config: serde_json::Value,
    #[serde(default)]
    pub corpus_fingerprints: BTreeMap<String, String>,
    #[serde(default)]
    pub toolkit_version: String,
}

#[derive(Debug, Clone)]
pub struct TokenizerModel {
    vocabulary: Vocabulary,
    merges: MergeTable,
    lexicon: BTreeSet<String>,
    mode: Mode,
    fallback: Fallback,
    specials: Specials,
    end_of_word: Option<String>,
    pub metadata: ModelMetadata,
    encoder: BpeEncoder,
    trie: Trie,
}

fn ensure_specials(vocab: &Vocabulary) -> Vocabulary {
    if SPECIAL_TOKENS.iter().all(|t| vocab.contains(t)) {
        return vocab.clone();
    }
    let mut out = Vocabulary::with_specials();
    for e in vocab.iter() {
        out.push(&e.token, e.provenance, e.language.as_deref());
    }
    out
}

impl TokenizerModel {
    /// Assembles a model. Special tokens are prepended when missing, which
    /// renumbers the remaining entries.
    pub fn new(
        vocabulary: &Vocabulary,
        merges: MergeTable,
        lexicon: BTreeSet<String>,
        mode: Mode,
        fallback: Fallback,
        end_of_word: Option<String>,
    ) -> Result<Self> {
        let vocabulary = ensure_specials(vocabulary);
        Self::assemble(
            vocabulary,
            merges,
            lexicon,
            mode,
            fallback,
            end_of_word,
            ModelMetadata::default(),
        )
    }

    /// Plain BPE model from a trained vocabulary and merge table.
    pub fn plain(vocabulary: &Vocabulary, merges: MergeTable) -> Result<Self> {
        Self::new(
            vocabulary,
            merges,
            BTreeSet::new(),
            Mode::PlainBpe,
            Fallback::Unk,
            None,
        )
    }

    fn assemble(
        vocabulary: Vocabulary,
        merges: MergeTable,
        lexicon: BTreeSet<String>,
        mode: Mode,
        fallback: Fallback,
        end_of_word: Option<String>,
        metadata: ModelMetadata,
    ) -> Result<Self> {
        let id = |t: &str| {
            vocabulary
                .get(t)
                .ok_or_else(|| Error::load("specials", format!("missing {t}")))
        };
        let specials = Specials {
            unk: id(UNK_TOKEN)?,
            pad: id(PAD_TOKEN)?,
            bos: id(BOS_TOKEN)?,
            eos: id(EOS_TOKEN)?,
        };
        if let Some(t) = lexicon.iter().find(|t| !vocabulary.contains(t)) {
            return Err(Error::load(
                "lexicon",
                format!("{t:?} is not in the vocabulary"),
            ));
        }
        let encoder = BpeEncoder::new(&vocabulary, &merges, end_of_word.as_deref())?;
        let trie = lexicon.iter().map(String::as_str).collect();
        Ok(TokenizerModel {
            vocabulary,
            merges,
            lexicon,
            mode,
            fallback,
            specials,
            end_of_word,
            metadata,
            encoder,
            trie,
        })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn merges(&self) -> &MergeTable {
        &self.merges
    }

    pub fn lexicon(&self) -> &BTreeSet<String> {
        &self.lexicon
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn fallback(&self) -> Fallback {
        self.fallback
    }

    pub fn specials(&self) -> Specials {
        self.specials
    }

    pub fn with_fallback(mut self, fallback: Fallback) -> Self {
        self.fallback = fallback;
        self
    }

    /// Same vocabulary and merges, different encoding mode.
    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    /// Encodes one whitespace-free word.
    pub fn encode(&self, word: &str) -> Encoding {
        let chars: Vec<char> = word.chars().collect();
        match self.mode {
            Mode::PlainBpe => self.bpe(&chars, true, &[]),
            Mode::Movoc => {
                if self.trie.is_empty() {
                    return self.bpe(&chars, true, &[]);
                }
                let mut enc = Encoding::default();
                for (start, end, matched) in self.trie.segment(&chars) {
                    let piece = &chars[start..end];
                    if matched {
                        let text: String = piece.iter().collect();
                        let id = self
                            .vocabulary
                            .get(&text)
                            .expect("lexicon is part of the vocabulary");
                        enc.push(id, text, (start, end));
                    } else {
                        enc.extend_shifted(self.bpe(piece, end == chars.len(), &[]), start);
                    }
                }
                enc
            }
        }
    }

    /// BPE with merges forbidden at the given gold boundaries, i.e. the
    /// segmentation of a word whose analysis is known.
    pub fn encode_with_boundaries(&self, word: &str, boundaries: &[usize]) -> Encoding {
        let chars: Vec<char> = word.chars().collect();
        self.bpe(&chars, true, boundaries)
    }

    fn bpe(&self, chars: &[char], is_word_end: bool, blocked: &[usize]) -> Encoding {
        self.encoder
            .encode_chars(&self.vocabulary, chars, is_word_end, blocked, self.fallback)
    }

    /// Pre-tokenizes and encodes normalized text. Words go through
    /// [`Self::encode`]; punctuation, numbers and other runs are looked up
    /// whole and otherwise split by BPE with the fallback policy.
    pub fn encode_text(
        &self,
        text: &NormalizedText,
        policy: &NormalizationPolicy,
    ) -> Vec<TextToken> {
        pretokenize(text, policy)
            .into_iter()
            .map(|pretoken| {
                let encoding = match pretoken.kind {
                    PreTokenKind::Word => self.encode(&pretoken.text),
                    _ => match self.vocabulary.get(&pretoken.text) {
                        Some(id) => Encoding {
                            token_ids: vec![id],
                            tokens: vec![pretoken.text.clone()],
                            spans: vec![(0, pretoken.span.1 - pretoken.span.0)],
                        },
                        None => {
                            let chars: Vec<char> = pretoken.text.chars().collect();
                            self.bpe(&chars, true, &[])
                        }
                    },
                };
                TextToken { pretoken, encoding }
            })
            .collect()
    }

    fn token_text(&self, id: u32) -> Result<&str> {
        let tok = self.vocabulary.token(id).ok_or_else(|| {
            Error::argument(format!(
                "token id {id} out of range 0..{}",
                self.vocabulary.len()
            ))
        })?;
        Ok(match &self.end_of_word {
            Some(m) => tok.strip_suffix(m.as_str()).unwrap_or(tok),
            None => tok,
        })
    }

    /// Concatenates token strings.
    pub fn decode(&self, ids: &[u32]) -> Result<String> {
        let mut out = String::new();
        for &id in ids {
            out.push_str(self.token_text(id)?);
        }
        Ok(out)
    }

    /// Decodes per-pre-token id groups and rejoins them with the
    /// pre-tokenization spacing convention.
    pub fn decode_groups(
        &self,
        groups: &[Vec<u32>],
        policy: &NormalizationPolicy,
    ) -> Result<String> {
        let words = groups
            .iter()
            .map(|g| self.decode(g))
            .collect::<Result<Vec<_>>>()?;
        let kinds: Vec<PreTokenKind> = words
            .iter()
            .map(|w| match pretokenize_str(w, policy).as_slice() {
                [only] => only.kind,
                _ => PreTokenKind::Word,
            })
            .collect();
        Ok(join_pretokens(words.iter().map(String::as_str).zip(kinds)))
    }

    pub fn to_document(&self) -> ModelDocument {
        ModelDocument {
            version: MODEL_VERSION,
            mode: self.mode,
            fallback: self.fallback,
            specials: self.specials,
            end_of_word: self.end_of_word.clone(),
            vocab: self.vocabulary.entries().to_vec(),
            merges: self.merges.clone(),
            lexicon: self.lexicon.iter().cloned().collect(),
            metadata: self.metadata.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn save<W: Write>(&self, mut sink: W) -> Result<()> {
        sink.write_all(self.to_json()?.as_bytes())?;
        sink.write_all(b"\n")?;
        Ok(())
    }

    pub fn save_path(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.save(std::io::BufWriter::new(file))
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(json)?;
        let version = value
            .get("version")
            .ok_or_else(|| Error::load("version", "missing"))?;
        let version = version
            .as_u64()
            .ok_or_else(|| Error::load("version", format!("expected an integer, got {version}")))?;
        if !SUPPORTED_VERSIONS.contains(&(version as u32)) || version > u32::MAX as u64 {
            return Err(Error::Version {
                found: version.min(u32::MAX as u64) as u32,
                supported: SUPPORTED_VERSIONS.to_vec(),
            });
        }
        let doc: ModelDocument =
            serde_json::from_value(value).map_err(|e| Error::load("document", e.to_string()))?;
        Self::from_document(doc)
    }

    pub fn from_document(doc: ModelDocument) -> Result<Self> {
        if let Some(e) = doc.vocab.iter().find(|e| !is_nfc(&e.token)) {
            return Err(Error::load(
                "vocab",
                format!("token {:?} is not NFC", e.token),
            ));
        }
        let vocabulary = Vocabulary::from_entries(doc.vocab)?;
        let merges = MergeTable::from_rules(doc.merges.rules().to_vec())?;
        let lexicon: BTreeSet<String> = doc.lexicon.into_iter().collect();
        let model = Self::assemble(
            vocabulary,
            merges,
            lexicon,
            doc.mode,
            doc.fallback,
            doc.end_of_word,
            doc.metadata,
        )?;
        if model.specials != doc.specials {
            return Err(Error::load(
                "specials",
                format!(
                    "declared {:?} but vocabulary gives {:?}",
                    doc.specials, model.specials
                ),
            ));
        }
        Ok(model)
    }

    pub fn load<R: Read>(mut source: R) -> Result<Self> {
        let mut text = String::new();
        source.read_to_string(&mut text)?;
        Self::from_json(&text)
    }

    pub fn load_path(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Serialized form of a [`TokenizerModel`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub version: u32,
    pub mode: Mode,
    #[serde(default)]
    pub fallback: Fallback,
    pub specials: Specials,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_of_word: Option<String>,
    pub vocab: Vec<VocabEntry>,
    pub merges: MergeTable,
    pub lexicon: Vec<String>,
    #[serde(default)]
    pub metadata: ModelMetadata,
}

/// One pre-token of a text and its encoding (spans relative to the
/// pre-token).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextToken {
    pub pretoken: PreToken,
    pub encoding: Encoding,
}

/// Options for [`train_constrained_with`].
#[derive(Debug, Clone, Default)]
pub struct TrainOptions {
    pub n_merges: usize,
    /// Only learn merges whose output is already in the seed vocabulary.
    pub closed_vocabulary: bool,
    pub end_of_word: Option<String>,
    /// Ignore gold boundaries (plain BPE with the same merge loop).
    pub unconstrained: bool,
}

/// Boundary-constrained BPE over `corpus`, seeded with `seed_vocab`. New
/// merge outputs are appended with provenance `bpe`; seed entries with
/// provenance `morpheme` form the encoding lexicon.
pub fn train_constrained(
    corpus: &SegmentedCorpus,
    seed_vocab: &Vocabulary,
    n_merges: usize,
) -> Result<TokenizerModel> {
    train_constrained_with(
        corpus,
        seed_vocab,
        &TrainOptions {
            n_merges,
            ..Default::default()
        },
    )
}

pub fn train_constrained_with(
    corpus: &SegmentedCorpus,
    seed_vocab: &Vocabulary,
    options: &TrainOptions,
) -> Result<TokenizerModel> {
    let eow = options.end_of_word.as_deref();
    let mut vocab = ensure_specials(seed_vocab);
    let lang = Some(corpus.language.as_str()).filter(|l| !l.is_empty());

    let mut table = TokenTable::default();
    let mut alphabet: BTreeSet<String> = BTreeSet::new();
    for (seg, _) in corpus.iter() {
        let n = seg.len();
        for (i, c) in seg.surface().chars().enumerate() {
            let mut s = c.to_string();
            if i + 1 == n {
                if let Some(m) = eow {
                    s.push_str(m);
                }
            }
            alphabet.insert(s);
        }
    }
    for s in &alphabet {
        table.intern(s);
        vocab.push(s, Provenance::Seed, lang);
    }

    let mut words: Vec<TrainWord> = corpus
        .iter()
        .map(|(seg, count)| {
            let boundaries = if options.unconstrained {
                Vec::new()
            } else {
                seg.boundaries().to_vec()
            };
            TrainWord::new(seg.surface(), count, boundaries, &mut table, eow)
        })
        .collect();

    let allowed: Option<HashSet<String>> = options
        .closed_vocabulary
        .then(|| vocab.tokens().map(str::to_string).collect());
    let learned = learn_merges(
        &mut words,
        &mut table,
        StopRule {
            max_merges: Some(options.n_merges),
            max_tokens: None,
        },
        allowed.as_ref(),
    );

    let mut rules = Vec::with_capacity(learned.len());
    for &(l, r, out) in &learned {
        vocab.push(table.get(out), Provenance::Bpe, lang);
        rules.push((table.get(l).to_string(), table.get(r).to_string()));
    }
    let merges = MergeTable::from_rules(rules)?;

    let certified = !options.unconstrained
        && corpus.iter().zip(&words).all(|((seg, _), w)| {
            w.spans()
                .iter()
                .all(|&(s, e)| !seg.boundaries().iter().any(|&b| s < b && b < e))
        });

    let lexicon: BTreeSet<String> = vocab
        .iter()
        .filter(|e| e.provenance == Provenance::Morpheme)
        .map(|e| e.token.clone())
        .collect();
    let mode = if options.unconstrained && lexicon.is_empty() {
        Mode::PlainBpe
    } else {
        Mode::Movoc
    };
    let metadata = ModelMetadata {
        constraint: (!options.unconstrained).then(|| "junction".to_string()),
        boundary_certified: certified,
        requested_merges: Some(options.n_merges),
        learned_merges: merges.len(),
        config: serde_json::json!({
            "closed_vocabulary": options.closed_vocabulary,
            "unconstrained": options.unconstrained,
        }),
        corpus_fingerprints: [(corpus.language.clone(), corpus.fingerprint())]
            .into_iter()
            .collect(),
        toolkit_version: crate::VERSION.to_string(),
    };
    TokenizerModel::assemble(
        vocab,
        merges,
        lexicon,
        mode,
        Fallback::Unk,
        options.end_of_word.clone(),
        metadata,
    )
}

/// Plain BPE over word counts with the shared merge loop, capped at
/// `n_merges` rules.
pub fn train_plain(counts: &WordCounts, n_merges: usize) -> Result<TokenizerModel> {
    let entries = counts
        .iter()
        .map(|(w, c)| {
            crate::corpus::SurfaceSegmentation::whole(w.nfc().collect::<String>()).map(|s| (s, c))
        })
        .collect::<Result<Vec<_>>>()?;
    let corpus =
        SegmentedCorpus::from_entries(counts.language.clone().unwrap_or_default(), entries)?;
    train_constrained_with(
        &corpus,
        &Vocabulary::with_specials(),
        &TrainOptions {
            n_merges,
            unconstrained: true,
            ..Default::default()
        },
    )
}
