//! Byte-pair encoding over Unicode scalars.
//!
//! Training is word-internal: pairs never span pre-token boundaries. Equal
//! pair frequencies are broken by the smaller `(left, right)` pair in
//! code-point order, and training stops once the best pair occurs fewer
//! than twice. The same merge loop backs boundary-constrained training in
//! [`crate::segmenter`]; there a pair whose junction falls on a gold
//! boundary is never counted.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::WordCounts;
use crate::{char_slice, Error, Result};

pub const UNK_TOKEN: &str = "<unk>";
pub const PAD_TOKEN: &str = "<pad>";
pub const BOS_TOKEN: &str = "<s>";
pub const EOS_TOKEN: &str = "</s>";
pub const SPECIAL_TOKENS: [&str; 4] = [UNK_TOKEN, PAD_TOKEN, BOS_TOKEN, EOS_TOKEN];

/// Id used for unknown symbols when a vocabulary has no UNK entry.
pub const NO_ID: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Seed,
    Bpe,
    Morpheme,
    Special,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabEntry {
    pub token: String,
    pub id: u32,
    pub provenance: Provenance,
    #[serde(rename = "lang", default, skip_serializing_if = "Option::is_none")]
    pub language: Option<String>,
}

/// Token strings with dense ids `0..n`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    entries: Vec<VocabEntry>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// A vocabulary holding only the four special tokens.
    pub fn with_specials() -> Self {
        let mut v = Self::new();
        for tok in SPECIAL_TOKENS {
            v.push(tok, Provenance::Special, None);
        }
        v
    }

    /// Appends `token` unless present and returns its id. A morpheme
    /// re-added over a seed or BPE entry keeps the id but takes the
    /// morpheme provenance.
    pub fn push(&mut self, token: &str, provenance: Provenance, language: Option<&str>) -> u32 {
        if let Some(&id) = self.index.get(token) {
            let entry = &mut self.entries[id as usize];
            if provenance == Provenance::Morpheme
                && matches!(entry.provenance, Provenance::Seed | Provenance::Bpe)
            {
                entry.provenance = Provenance::Morpheme;
                if entry.language.is_none() {
                    entry.language = language.map(str::to_string);
                }
            }
            return id;
        }
        let id = self.entries.len() as u32;
        self.entries.push(VocabEntry {
            token: token.to_string(),
            id,
            provenance,
            language: language.map(str::to_string),
        });
        self.index.insert(token.to_string(), id);
        id
    }

    /// Rebuilds from serialized entries, checking id density and token
    /// uniqueness.
    pub fn from_entries(entries: Vec<VocabEntry>) -> Result<Self> {
        let mut index = HashMap::with_capacity(entries.len());
        for (pos, e) in entries.iter().enumerate() {
            if e.id as usize != pos {
                return Err(Error::load(
                    "vocab",
                    format!(
                        "entry {pos} has id {} (ids must be dense 0..n in order)",
                        e.id
                    ),
                ));
            }
            if e.token.is_empty() {
                return Err(Error::load(
                    "vocab",
                    format!("entry {pos} has an empty token"),
                ));
            }
            if index.insert(e.token.clone(), e.id).is_some() {
                return Err(Error::load(
                    "vocab",
                    format!("duplicate token {:?}", e.token),
                ));
            }
        }
        Ok(Vocabulary { entries, index })
    }

    pub fn get(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.entries.get(id as usize).map(|e| e.token.as_str())
    }

    pub fn entry(&self, id: u32) -> Option<&VocabEntry> {
        self.entries.get(id as usize)
    }

    pub fn entries(&self) -> &[VocabEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &VocabEntry> {
        self.entries.iter()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.token.as_str())
    }

    pub fn count(&self, provenance: Provenance) -> usize {
        self.entries
            .iter()
            .filter(|e| e.provenance == provenance)
            .count()
    }

    pub fn token_set(&self) -> BTreeSet<String> {
        self.entries.iter().map(|e| e.token.clone()).collect()
    }
}

/// Ordered merge rules; rank is list position.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MergeTable {
    rules: Vec<(String, String)>,
}

impl MergeTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_rules(rules: Vec<(String, String)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(rules.len());
        for (l, r) in &rules {
            if l.is_empty() || r.is_empty() {
                return Err(Error::load("merges", "empty merge operand"));
            }
            if !seen.insert((l.as_str(), r.as_str())) {
                return Err(Error::load(
                    "merges",
                    format!("duplicate rule ({l:?}, {r:?})"),
                ));
            }
        }
        Ok(MergeTable { rules })
    }

    pub fn push(&mut self, left: &str, right: &str) -> Result<()> {
        if self.rules.iter().any(|(l, r)| l == left && r == right) {
            return Err(Error::argument(format!(
                "duplicate rule ({left:?}, {right:?})"
            )));
        }
        self.rules.push((left.to_string(), right.to_string()));
        Ok(())
    }

    pub fn rules(&self) -> &[(String, String)] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn truncated(&self, n: usize) -> Self {
        MergeTable {
            rules: self.rules[..n.min(self.rules.len())].to_vec(),
        }
    }
}

/// Tokens of one word with their scalar spans.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Encoding {
    pub token_ids: Vec<u32>,
    pub tokens: Vec<String>,
    pub spans: Vec<(usize, usize)>,
}

impl Encoding {
    pub fn len(&self) -> usize {
        self.token_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.token_ids.is_empty()
    }

    /// Length of the encoded word in scalars.
    pub fn word_len(&self) -> usize {
        self.spans.last().map_or(0, |s| s.1)
    }

    /// Predicted boundaries: interior span endpoints.
    pub fn boundaries(&self) -> Vec<usize> {
        self.spans.iter().skip(1).map(|s| s.0).collect()
    }

    pub(crate) fn push(&mut self, id: u32, token: String, span: (usize, usize)) {
        self.token_ids.push(id);
        self.tokens.push(token);
        self.spans.push(span);
    }

    pub(crate) fn extend_shifted(&mut self, other: Encoding, offset: usize) {
        self.token_ids.extend(other.token_ids);
        self.tokens.extend(other.tokens);
        self.spans.extend(
            other
                .spans
                .into_iter()
                .map(|(s, e)| (s + offset, e + offset)),
        );
    }
}

/// Replaces every adjacent `(left, right)` occurrence, left to right,
/// non-overlapping.
pub fn apply_merge(sequence: &[String], rule: (&str, &str)) -> Vec<String> {
    let mut out = Vec::with_capacity(sequence.len());
    let mut i = 0;
    while i < sequence.len() {
        if i + 1 < sequence.len() && sequence[i] == rule.0 && sequence[i + 1] == rule.1 {
            out.push(format!("{}{}", rule.0, rule.1));
            i += 2;
        } else {
            out.push(sequence[i].clone());
            i += 1;
        }
    }
    out
}

/// How characters missing from the vocabulary are emitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fallback {
    /// UNK id and the UNK token string.
    #[default]
    Unk,
    /// UNK id with the original character kept as token text.
    CharPassthrough,
}

/// Rank-ordered merge application over a fixed vocabulary.
#[derive(Debug, Clone)]
pub struct BpeEncoder {
    ranks: HashMap<(u32, u32), (usize, u32)>,
    end_of_word: Option<String>,
}

impl BpeEncoder {
    pub fn new(vocab: &Vocabulary, merges: &MergeTable, end_of_word: Option<&str>) -> Result<Self> {
        let mut ranks = HashMap::with_capacity(merges.len());
        for (rank, (l, r)) in merges.rules().iter().enumerate() {
            let lookup = |t: &str| {
                vocab.get(t).ok_or_else(|| {
                    Error::load(
                        "merges",
                        format!("rule {rank} operand {t:?} is not in the vocabulary"),
                    )
                })
            };
            let (li, ri) = (lookup(l)?, lookup(r)?);
            let out = vocab.get(&format!("{l}{r}")).ok_or_else(|| {
                Error::load(
                    "merges",
                    format!(
                        "rule {rank} output {:?} is not in the vocabulary",
                        format!("{l}{r}")
                    ),
                )
            })?;
            ranks.entry((li, ri)).or_insert((rank, out));
        }
        Ok(BpeEncoder {
            ranks,
            end_of_word: end_of_word.map(str::to_string),
        })
    }

    pub fn end_of_word(&self) -> Option<&str> {
        self.end_of_word.as_deref()
    }

    /// Encodes `chars` (one word or one gap inside a word). Junctions listed
    /// in `blocked` (offsets relative to `chars`) are never merged across.
    /// `is_word_end` marks that the last character ends the word, which
    /// matters only with an end-of-word marker.
    pub(crate) fn encode_chars(
        &self,
        vocab: &Vocabulary,
        chars: &[char],
        is_word_end: bool,
        blocked: &[usize],
        fallback: Fallback,
    ) -> Encoding {
        let n = chars.len();
        let mut syms: Vec<(usize, usize, Option<u32>)> = chars
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let mut s = c.to_string();
                if is_word_end && i + 1 == n {
                    if let Some(m) = &self.end_of_word {
                        s.push_str(m);
                    }
                }
                (i, i + 1, vocab.get(&s))
            })
            .collect();

        loop {
            let mut best: Option<(usize, usize, u32)> = None;
            for i in 0..syms.len().saturating_sub(1) {
                let (Some(a), Some(b)) = (syms[i].2, syms[i + 1].2) else {
                    continue;
                };
                if blocked.binary_search(&syms[i].1).is_ok() {
                    continue;
                }
                if let Some(&(rank, out)) = self.ranks.get(&(a, b)) {
                    if best.is_none_or(|(r, _, _)| rank < r) {
                        best = Some((rank, i, out));
                    }
                }
            }
            let Some((_, i, out)) = best else { break };
            syms[i] = (syms[i].0, syms[i + 1].1, Some(out));
            syms.remove(i + 1);
        }

        let unk = vocab.get(UNK_TOKEN).unwrap_or(NO_ID);
        let mut enc = Encoding::default();
        for (start, end, id) in syms {
            let text: String = chars[start..end].iter().collect();
            match id {
                Some(id) => enc.push(id, text, (start, end)),
                None => match fallback {
                    Fallback::Unk => enc.push(unk, UNK_TOKEN.to_string(), (start, end)),
                    Fallback::CharPassthrough => enc.push(unk, text, (start, end)),
                },
            }
        }
        enc
    }

    pub fn encode(&self, vocab: &Vocabulary, word: &str, fallback: Fallback) -> Encoding {
        let chars: Vec<char> = word.chars().collect();
        self.encode_chars(vocab, &chars, true, &[], fallback)
    }
}

/// Encodes `word` with rank-ordered merges and the UNK fallback.
pub fn encode_bpe(vocab: &Vocabulary, merges: &MergeTable, word: &str) -> Result<Encoding> {
    let encoder = BpeEncoder::new(vocab, merges, None)?;
    Ok(encoder.encode(vocab, word, Fallback::Unk))
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

pub(crate) struct TrainWord {
    syms: Vec<u32>,
    /// End offset (scalars) of each symbol.
    ends: Vec<usize>,
    count: u64,
    boundaries: Vec<usize>,
}

impl TrainWord {
    pub(crate) fn new(
        word: &str,
        count: u64,
        boundaries: Vec<usize>,
        table: &mut TokenTable,
        end_of_word: Option<&str>,
    ) -> Self {
        let n = word.chars().count();
        let mut syms = Vec::with_capacity(n);
        for (i, c) in word.chars().enumerate() {
            let mut s = c.to_string();
            if i + 1 == n {
                if let Some(m) = end_of_word {
                    s.push_str(m);
                }
            }
            syms.push(table.intern(&s));
        }
        TrainWord {
            syms,
            ends: (1..=n).collect(),
            count,
            boundaries,
        }
    }

    fn legal(&self, i: usize) -> bool {
        self.boundaries.binary_search(&self.ends[i]).is_err()
    }

    fn pairs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.syms.len().saturating_sub(1))
            .filter(|&i| self.legal(i))
            .map(|i| (self.syms[i], self.syms[i + 1]))
    }

    fn merge(&mut self, pair: (u32, u32), new: u32) -> bool {
        let mut changed = false;
        let mut i = 0;
        while i + 1 < self.syms.len() {
            if self.syms[i] == pair.0 && self.syms[i + 1] == pair.1 && self.legal(i) {
                self.syms[i] = new;
                self.syms.remove(i + 1);
                self.ends.remove(i);
                changed = true;
            }
            i += 1;
        }
        changed
    }

    /// Final token spans, for replay checks.
    pub(crate) fn spans(&self) -> Vec<(usize, usize)> {
        let mut start = 0;
        self.ends
            .iter()
            .map(|&e| {
                let s = (start, e);
                start = e;
                s
            })
            .collect()
    }
}

/// Interned training symbols.
#[derive(Debug, Default)]
pub(crate) struct TokenTable {
    strings: Vec<String>,
    index: HashMap<String, u32>,
}

impl TokenTable {
    pub(crate) fn intern(&mut self, s: &str) -> u32 {
        if let Some(&id) = self.index.get(s) {
            return id;
        }
        let id = self.strings.len() as u32;
        self.strings.push(s.to_string());
        self.index.insert(s.to_string(), id);
        id
    }

    pub(crate) fn get(&self, id: u32) -> &str {
        &self.strings[id as usize]
    }

    pub(crate) fn len(&self) -> usize {
        self.strings.len()
    }
}

#[derive(Debug, PartialEq, Eq)]
struct Candidate {
    count: u64,
    left: String,
    right: String,
    pair: (u32, u32),
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.count
            .cmp(&other.count)
            .then_with(|| other.left.cmp(&self.left))
            .then_with(|| other.right.cmp(&self.right))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct StopRule {
    pub max_merges: Option<usize>,
    /// Stop once this many distinct tokens exist in the token table.
    pub max_tokens: Option<usize>,
}

/// Greedy merge loop shared by plain and constrained training. Returns the
/// merges as `(left, right, output)` symbol ids in learning order.
pub(crate) fn learn_merges(
    words: &mut [TrainWord],
    table: &mut TokenTable,
    stop: StopRule,
    allowed: Option<&HashSet<String>>,
) -> Vec<(u32, u32, u32)> {
    let mut counts: HashMap<(u32, u32), u64> = HashMap::new();
    let mut locations: HashMap<(u32, u32), BTreeSet<usize>> = HashMap::new();
    for (wi, w) in words.iter().enumerate() {
        for p in w.pairs() {
            *counts.entry(p).or_default() += w.count;
            locations.entry(p).or_default().insert(wi);
        }
    }

    let candidate = |pair: (u32, u32), count: u64, table: &TokenTable| Candidate {
        count,
        left: table.get(pair.0).to_string(),
        right: table.get(pair.1).to_string(),
        pair,
    };
    let mut heap: BinaryHeap<Candidate> = counts
        .iter()
        .map(|(&p, &c)| candidate(p, c, table))
        .collect();

    let mut merges = Vec::new();
    while let Some(top) = heap.pop() {
        let actual = counts.get(&top.pair).copied().unwrap_or(0);
        if actual != top.count {
            if actual > 0 {
                heap.push(Candidate {
                    count: actual,
                    ..top
                });
            }
            continue;
        }
        let merged = format!("{}{}", top.left, top.right);
        if let Some(allowed) = allowed {
            if !allowed.contains(&merged) {
                continue;
            }
        }
        if top.count < 2
            || stop.max_merges.is_some_and(|m| merges.len() >= m)
            || stop.max_tokens.is_some_and(|m| table.len() >= m)
        {
            break;
        }

        let new = table.intern(&merged);
        merges.push((top.pair.0, top.pair.1, new));

        let affected = locations.remove(&top.pair).unwrap_or_default();
        let mut touched: BTreeSet<(u32, u32)> = BTreeSet::new();
        for wi in affected {
            let w = &mut words[wi];
            let before: Vec<(u32, u32)> = w.pairs().collect();
            if !w.merge(top.pair, new) {
                continue;
            }
            for p in before {
                if let Some(c) = counts.get_mut(&p) {
                    *c -= w.count;
                    if *c == 0 {
                        counts.remove(&p);
                    }
                }
                touched.insert(p);
            }
            for p in w.pairs() {
                *counts.entry(p).or_default() += w.count;
                locations.entry(p).or_default().insert(wi);
                touched.insert(p);
            }
        }
        counts.remove(&top.pair);
        for p in touched {
            if let Some(&c) = counts.get(&p) {
                heap.push(candidate(p, c, table));
            }
        }
    }
    merges
}

/// Plain BPE trainer.
#[derive(Debug, Clone, Default)]
pub struct BpeTrainer {
    /// Marker appended to each word's final character, e.g. `</w>`.
    pub end_of_word: Option<String>,
}

impl BpeTrainer {
    pub fn train(
        &self,
        counts: &WordCounts,
        target_size: usize,
    ) -> Result<(Vocabulary, MergeTable)> {
        let eow = self.end_of_word.as_deref();
        let mut alphabet: BTreeSet<String> = BTreeSet::new();
        for (word, _) in counts.iter() {
            let n = word.chars().count();
            for (i, c) in word.chars().enumerate() {
                let mut s = c.to_string();
                if i + 1 == n {
                    if let Some(m) = eow {
                        s.push_str(m);
                    }
                }
                alphabet.insert(s);
            }
        }
        if target_size < alphabet.len() {
            return Err(Error::argument(format!(
                "target size {target_size} is below the alphabet size {}",
                alphabet.len()
            )));
        }

        let mut table = TokenTable::default();
        for s in &alphabet {
            table.intern(s);
        }
        let mut words: Vec<TrainWord> = counts
            .iter()
            .map(|(w, c)| TrainWord::new(w, c, Vec::new(), &mut table, eow))
            .collect();
        let merges = learn_merges(
            &mut words,
            &mut table,
            StopRule {
                max_merges: None,
                max_tokens: Some(target_size),
            },
            None,
        );

        let lang = counts.language.as_deref();
        let mut vocab = Vocabulary::new();
        for s in &alphabet {
            vocab.push(s, Provenance::Seed, lang);
        }
        let mut table_out = MergeTable::new();
        for &(l, r, out) in &merges {
            vocab.push(table.get(out), Provenance::Bpe, lang);
            table_out
                .rules
                .push((table.get(l).to_string(), table.get(r).to_string()));
        }
        Ok((vocab, table_out))
    }
}

/// Trains plain BPE up to `target_size` tokens (seed characters included).
pub fn train_bpe(counts: &WordCounts, target_size: usize) -> Result<(Vocabulary, MergeTable)> {
    BpeTrainer::default().train(counts, target_size)
}

/// Token strings of `word` split at `spans`, for tests and diagnostics.
pub fn split_by_spans(word: &str, spans: &[(usize, usize)]) -> Vec<String> {
    spans
        .iter()
        .map(|&(s, e)| char_slice(word, s, e).to_string())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn counts(pairs: &[(&str, u64)]) -> WordCounts {
        pairs.iter().map(|&(w, c)| (w, c)).collect()
    }

    fn rules(m: &MergeTable) -> Vec<(&str, &str)> {
        m.rules()
            .iter()
            .map(|(l, r)| (l.as_str(), r.as_str()))
            .collect()
    }

    #[test]
    fn overlapping_pair_counts_then_stops() {
        // (a,a) occurs twice in "aaab"; afterwards every pair occurs once.
        let (vocab, merges) = train_bpe(&counts(&[("aaab", 1)]), 5).unwrap();
        assert_eq!(rules(&merges), vec![("a", "a")]);
        assert_eq!(vocab.token_set(), ["a", "aa", "b"].map(String::from).into());
        assert_eq!(vocab.entry(0).unwrap().provenance, Provenance::Seed);
        assert_eq!(
            vocab
                .get("aa")
                .map(|id| vocab.entry(id).unwrap().provenance),
            Some(Provenance::Bpe)
        );
    }

    #[test]
    fn lexicographic_tie_break() {
        let (vocab, merges) = train_bpe(&counts(&[("ab", 3), ("cd", 3)]), 6).unwrap();
        assert_eq!(rules(&merges), vec![("a", "b"), ("c", "d")]);
        assert_eq!(vocab.len(), 6);
    }

    #[test]
    fn single_char_corpus_has_no_merges() {
        let (vocab, merges) = train_bpe(&counts(&[("a", 10)]), 1).unwrap();
        assert_eq!(vocab.token_set(), ["a"].map(String::from).into());
        assert!(merges.is_empty());
    }

    #[test]
    fn target_below_alphabet_is_error() {
        let err = train_bpe(&counts(&[("abc", 1)]), 2).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains('2') && msg.contains('3'), "{msg}");
    }

    #[test]
    fn target_caps_vocabulary() {
        let (vocab, merges) = train_bpe(&counts(&[("abcd", 10)]), 5).unwrap();
        assert_eq!(vocab.len(), 5);
        assert_eq!(merges.len(), 1);
    }

    #[test]
    fn apply_merge_cases() {
        let seq = |s: &[&str]| s.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        assert_eq!(
            apply_merge(&seq(&["a", "a", "a"]), ("a", "a")),
            seq(&["aa", "a"])
        );
        assert_eq!(apply_merge(&seq(&["a", "b"]), ("b", "a")), seq(&["a", "b"]));
        assert_eq!(
            apply_merge(&seq(&["a", "b", "a", "b"]), ("a", "b")),
            seq(&["ab", "ab"])
        );
    }

    fn toy(merges: &[(&str, &str)], extra: &[&str]) -> (Vocabulary, MergeTable) {
        let mut v = Vocabulary::with_specials();
        for t in extra {
            v.push(t, Provenance::Seed, None);
        }
        for (l, r) in merges {
            v.push(&format!("{l}{r}"), Provenance::Bpe, None);
        }
        let m = MergeTable::from_rules(
            merges
                .iter()
                .map(|(l, r)| (l.to_string(), r.to_string()))
                .collect(),
        )
        .unwrap();
        (v, m)
    }

    #[test]
    fn encode_examples() {
        let (v, m) = toy(&[("a", "b")], &["a", "b"]);
        assert_eq!(encode_bpe(&v, &m, "abab").unwrap().tokens, vec!["ab", "ab"]);

        let (v, m) = toy(&[], &["a", "b"]);
        assert_eq!(encode_bpe(&v, &m, "ab").unwrap().tokens, vec!["a", "b"]);

        let (v, m) = toy(&[("a", "b"), ("ab", "c")], &["a", "b", "c"]);
        let enc = encode_bpe(&v, &m, "abc").unwrap();
        assert_eq!(enc.tokens, vec!["abc"]);
        assert_eq!(enc.spans, vec![(0, 3)]);
        assert!(enc.boundaries().is_empty());
    }

    #[test]
    fn encode_respects_rank_not_position() {
        // (b,c) outranks (a,b) so "abc" -> [a, bc].
        let (v, m) = toy(&[("b", "c"), ("a", "b")], &["a", "b", "c"]);
        assert_eq!(encode_bpe(&v, &m, "abc").unwrap().tokens, vec!["a", "bc"]);
    }

    #[test]
    fn unknown_characters_fall_back() {
        let (v, m) = toy(&[("a", "b")], &["a", "b"]);
        let enc = encode_bpe(&v, &m, "axb").unwrap();
        assert_eq!(enc.tokens, vec!["a", UNK_TOKEN, "b"]);
        assert_eq!(enc.token_ids[1], v.get(UNK_TOKEN).unwrap());
        assert_eq!(enc.spans, vec![(0, 1), (1, 2), (2, 3)]);

        let encoder = BpeEncoder::new(&v, &m, None).unwrap();
        let enc = encoder.encode(&v, "axb", Fallback::CharPassthrough);
        assert_eq!(enc.tokens, vec!["a", "x", "b"]);
        assert_eq!(enc.token_ids[1], v.get(UNK_TOKEN).unwrap());
    }

    #[test]
    fn merge_table_validation() {
        assert!(
            MergeTable::from_rules(vec![("a".into(), "b".into()), ("a".into(), "b".into())])
                .is_err()
        );
        let v = Vocabulary::with_specials();
        let m = MergeTable::from_rules(vec![("a".into(), "b".into())]).unwrap();
        assert!(matches!(
            BpeEncoder::new(&v, &m, None),
            Err(Error::Load { .. })
        ));
    }

    #[test]
    fn vocabulary_dedup_and_morpheme_upgrade() {
        let mut v = Vocabulary::new();
        assert_eq!(v.push("a", Provenance::Seed, None), 0);
        assert_eq!(v.push("ab", Provenance::Bpe, Some("amh")), 1);
        assert_eq!(v.push("ab", Provenance::Morpheme, Some("tir")), 1);
        assert_eq!(v.entry(1).unwrap().provenance, Provenance::Morpheme);
        assert_eq!(v.entry(1).unwrap().language.as_deref(), Some("amh"));
        assert_eq!(v.push("ab", Provenance::Bpe, None), 1);
        assert_eq!(v.entry(1).unwrap().provenance, Provenance::Morpheme);
        assert_eq!(v.len(), 2);
    }

    #[test]
    fn vocabulary_from_entries_validates() {
        let e = |t: &str, id| VocabEntry {
            token: t.into(),
            id,
            provenance: Provenance::Seed,
            language: None,
        };
        assert!(Vocabulary::from_entries(vec![e("a", 0), e("b", 1)]).is_ok());
        assert!(Vocabulary::from_entries(vec![e("a", 0), e("a", 1)]).is_err());
        assert!(Vocabulary::from_entries(vec![e("a", 1)]).is_err());
    }

    #[test]
    fn end_of_word_marker() {
        let trainer = BpeTrainer {
            end_of_word: Some("</w>".into()),
        };
        let (v, m) = trainer.train(&counts(&[("ab", 4), ("ba", 1)]), 10).unwrap();
        assert!(v.contains("b</w>"));
        assert!(v.contains("ab</w>"));
        let enc = BpeEncoder::new(&v, &m, Some("</w>")).unwrap();
        let e = enc.encode(&v, "ab", Fallback::Unk);
        assert_eq!(e.tokens, vec!["ab"]);
        assert_eq!(v.token(e.token_ids[0]), Some("ab</w>"));
        // without the marker, "b" mid-word is a different symbol than "b</w>"
        let e = enc.encode(&v, "ba", Fallback::Unk);
        assert_eq!(e.len(), 2);
    }

    #[test]
    fn deterministic_training() {
        let c = counts(&[("ሰበረ", 5), ("ሰበሩ", 3), ("አልሰበሩም", 2), ("ቤት", 7)]);
        let a = train_bpe(&c, 30).unwrap();
        let b = train_bpe(&c, 30).unwrap();
        assert_eq!(a, b);
    }

    fn corpus_strategy() -> impl Strategy<Value = WordCounts> {
        prop::collection::vec(("[a-e]{1,7}", 1u64..6), 1..15).prop_map(|v| v.into_iter().collect())
    }

    proptest! {
        #[test]
        fn round_trip_and_tiling(c in corpus_strategy(), target in 5usize..40, word in "[a-e]{1,10}") {
            let target = target.max(c.counts.keys().flat_map(|w| w.chars()).collect::<BTreeSet<_>>().len());
            let (mut v, m) = train_bpe(&c, target).unwrap();
            v.push(UNK_TOKEN, Provenance::Special, None);
            let enc = BpeEncoder::new(&v, &m, None).unwrap().encode(&v, &word, Fallback::CharPassthrough);
            prop_assert_eq!(enc.tokens.concat(), word.clone());
            let mut pos = 0;
            for (i, &(s, e)) in enc.spans.iter().enumerate() {
                prop_assert_eq!(s, pos);
                prop_assert!(e > s);
                prop_assert_eq!(char_slice(&word, s, e), enc.tokens[i].as_str());
                pos = e;
            }
            prop_assert_eq!(pos, word.chars().count());
        }

        #[test]
        fn extending_merges_never_adds_tokens(c in corpus_strategy(), word in "[a-e]{1,10}") {
            let alphabet = c.counts.keys().flat_map(|w| w.chars()).collect::<BTreeSet<_>>().len();
            let (v, m) = train_bpe(&c, alphabet + 30).unwrap();
            let mut prev = usize::MAX;
            for n in 0..=m.len() {
                let enc = encode_bpe(&v, &m.truncated(n), &word).unwrap();
                prop_assert!(enc.len() <= prev);
                prev = enc.len();
            }
        }

        #[test]
        fn vocab_within_target(c in corpus_strategy(), extra in 0usize..30) {
            let alphabet = c.counts.keys().flat_map(|w| w.chars()).collect::<BTreeSet<_>>().len();
            let (v, m) = train_bpe(&c, alphabet + extra).unwrap();
            prop_assert!(v.len() <= alphabet + extra);
            for (l, r) in m.rules() {
                let joined = l.clone() + r;
                prop_assert!(v.contains(&joined));
            }
        }
    }
}
