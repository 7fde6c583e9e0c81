//! Corpora and morphological annotations.
//!
//! Two annotation tiers are kept apart. A [`SurfaceSegmentation`] places
//! boundaries inside the surface string and is what boundary metrics and
//! constrained training consume. A [`CanonicalAnalysis`] lists morph forms
//! that may not concatenate back to the surface (fusional morphology); it
//! feeds morpheme extraction only. [`project_to_surface`] converts the
//! second into the first when the forms concatenate exactly.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::BufRead;
use std::path::Path;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use unicode_normalization::UnicodeNormalization;

use crate::pretok::{normalize, pretokenize, NormalizationPolicy, PreTokenKind};
use crate::{char_len, char_slice, Error, Result};

/// Frequencies of word pre-tokens in a plain corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WordCounts {
    pub counts: BTreeMap<String, u64>,
    pub language: Option<String>,
}

impl WordCounts {
    pub fn add(&mut self, word: &str, count: u64) {
        if count > 0 {
            *self.counts.entry(word.to_string()).or_default() += count;
        }
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(w, c)| (w.as_str(), *c))
    }

    pub fn get(&self, word: &str) -> Option<u64> {
        self.counts.get(word).copied()
    }

    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for (w, c) in &self.counts {
            hasher.update(w.as_bytes());
            hasher.update([0u8]);
            hasher.update(c.to_le_bytes());
        }
        hex::encode(hasher.finalize())
    }
}

impl<S: AsRef<str>> FromIterator<(S, u64)> for WordCounts {
    fn from_iter<I: IntoIterator<Item = (S, u64)>>(iter: I) -> Self {
        let mut counts = WordCounts::default();
        for (w, c) in iter {
            counts.add(w.as_ref(), c);
        }
        counts
    }
}

/// Reads a one-sentence-per-line corpus and counts its word pre-tokens.
pub fn read_plain_corpus<R: BufRead>(
    mut reader: R,
    policy: &NormalizationPolicy,
) -> Result<WordCounts> {
    let mut counts = WordCounts::default();
    let mut buf = Vec::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_no += 1;
        let line = std::str::from_utf8(&buf).map_err(|_| Error::Decode { line: line_no })?;
        let normalized = normalize(line, policy);
        for tok in pretokenize(&normalized, policy) {
            if tok.kind == PreTokenKind::Word {
                counts.add(&tok.text, 1);
            }
        }
    }
    Ok(counts)
}

/// A word with gold interior morpheme boundaries (scalar offsets).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SurfaceSegmentation {
    surface: String,
    boundaries: Vec<usize>,
}

impl SurfaceSegmentation {
    pub fn new(surface: impl Into<String>, boundaries: Vec<usize>) -> Result<Self> {
        let surface: String = surface.into();
        let len = char_len(&surface);
        if len == 0 {
            return Err(Error::format("empty surface form"));
        }
        if surface.chars().any(char::is_whitespace) {
            return Err(Error::format(format!(
                "surface {surface:?} contains whitespace"
            )));
        }
        let mut prev = 0;
        for &b in &boundaries {
            if b <= prev || b >= len {
                return Err(Error::format(format!(
                    "boundary {b} in {surface:?} is not strictly increasing inside 0..{len}"
                )));
            }
            prev = b;
        }
        Ok(SurfaceSegmentation {
            surface,
            boundaries,
        })
    }

    /// An unsegmented word (no interior boundaries).
    pub fn whole(surface: impl Into<String>) -> Result<Self> {
        Self::new(surface, Vec::new())
    }

    pub fn from_morphs<S: AsRef<str>>(morphs: &[S]) -> Result<Self> {
        let mut surface = String::new();
        let mut boundaries = Vec::new();
        let mut offset = 0;
        for (i, m) in morphs.iter().enumerate() {
            let m = m.as_ref();
            if m.is_empty() {
                return Err(Error::format("empty morph"));
            }
            if i > 0 {
                boundaries.push(offset);
            }
            offset += char_len(m);
            surface.push_str(m);
        }
        Self::new(surface, boundaries)
    }

    pub fn surface(&self) -> &str {
        &self.surface
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn len(&self) -> usize {
        char_len(&self.surface)
    }

    pub fn is_empty(&self) -> bool {
        self.surface.is_empty()
    }

    pub fn morphs(&self) -> Vec<&str> {
        let len = self.len();
        let mut cuts = Vec::with_capacity(self.boundaries.len() + 2);
        cuts.push(0);
        cuts.extend_from_slice(&self.boundaries);
        cuts.push(len);
        cuts.windows(2)
            .map(|w| char_slice(&self.surface, w[0], w[1]))
            .collect()
    }

    /// The gold-file line for this word, without trailing newline.
    pub fn format_line(&self) -> String {
        format!("{}\t{}", self.surface, self.morphs().join("|"))
    }
}

impl fmt::Display for SurfaceSegmentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.morphs().join("|"))
    }
}

/// Parses a gold line `surface<TAB>m1|m2|...|mk`.
pub fn parse_surface_segmentation(line: &str) -> Result<SurfaceSegmentation> {
    let line = line.trim_end_matches(['\r', '\n']);
    let (surface, morphs) = line
        .split_once('\t')
        .ok_or_else(|| Error::format(format!("expected `surface<TAB>morphs`, got {line:?}")))?;
    let surface: String = surface.trim().nfc().collect();
    let morphs: Vec<String> = morphs
        .trim()
        .split('|')
        .map(|m| m.nfc().collect())
        .collect();
    if morphs.iter().any(String::is_empty) {
        return Err(Error::format(format!(
            "empty morph in segmentation of {surface:?}"
        )));
    }
    let seg = SurfaceSegmentation::from_morphs(&morphs)?;
    if seg.surface != surface {
        return Err(Error::format(format!(
            "morphs {:?} concatenate to {:?}, not the surface {surface:?}",
            morphs.join("|"),
            seg.surface
        )));
    }
    Ok(seg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MorphRole {
    Prefix,
    Root,
    Suffix,
    Infix,
    Clitic,
    Stem,
}

impl MorphRole {
    pub fn is_core(self) -> bool {
        matches!(self, MorphRole::Root | MorphRole::Stem)
    }
}

impl std::str::FromStr for MorphRole {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prefix" => Ok(MorphRole::Prefix),
            "root" => Ok(MorphRole::Root),
            "suffix" => Ok(MorphRole::Suffix),
            "infix" => Ok(MorphRole::Infix),
            "clitic" => Ok(MorphRole::Clitic),
            "stem" => Ok(MorphRole::Stem),
            other => Err(Error::format(format!(
                "unknown morpheme role {other:?} (expected prefix, root, suffix, infix, clitic or stem)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphUnit {
    pub form: String,
    pub role: MorphRole,
}

impl MorphUnit {
    pub fn new(form: impl Into<String>, role: MorphRole) -> Self {
        MorphUnit {
            form: form.into(),
            role,
        }
    }
}

/// Morph forms of a word with their roles; forms need not concatenate to
/// the surface.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalAnalysis {
    pub surface: String,
    pub units: Vec<MorphUnit>,
}

impl CanonicalAnalysis {
    pub fn new(surface: impl Into<String>, units: Vec<MorphUnit>) -> Result<Self> {
        let surface: String = surface.into();
        if units.iter().any(|u| u.form.is_empty()) {
            return Err(Error::format(format!(
                "empty morph form in analysis of {surface:?}"
            )));
        }
        let cores = units.iter().filter(|u| u.role.is_core()).count();
        if cores != 1 {
            return Err(Error::format(format!(
                "analysis of {surface:?} has {cores} root/stem units; exactly one is required"
            )));
        }
        Ok(CanonicalAnalysis { surface, units })
    }

    pub fn forms(&self) -> impl Iterator<Item = &str> {
        self.units.iter().map(|u| u.form.as_str())
    }
}

/// Parses the display notation `-አል- <ሰበር> ኡ- ም---`: `-`-delimited
/// slots, the stem inside `<...>`, a lone `-` for an empty slot.
pub fn parse_hornmorpho_notation(raw: &str, surface: &str) -> Result<CanonicalAnalysis> {
    let trimmed = raw.trim();
    let body = trimmed
        .strip_prefix('\'')
        .and_then(|s| s.strip_suffix('\''))
        .unwrap_or(trimmed);

    let opens = body.matches('<').count();
    let closes = body.matches('>').count();
    if opens == 0 && closes == 0 {
        return Err(Error::format(format!("missing <...> stem in {raw:?}")));
    }
    if opens != 1 || closes != 1 {
        return Err(Error::format(format!(
            "nested or repeated angle brackets in {raw:?}"
        )));
    }
    let open = body.find('<').expect("counted above");
    let close = body.find('>').expect("counted above");
    if close < open {
        return Err(Error::format(format!(
            "unbalanced angle brackets in {raw:?}"
        )));
    }
    let stem = body[open + 1..close].trim();
    if stem.is_empty() {
        return Err(Error::format(format!("empty stem in {raw:?}")));
    }

    let slots = |region: &str| -> Vec<String> {
        region
            .split(|c: char| c == '-' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.nfc().collect())
            .collect()
    };

    let mut units: Vec<MorphUnit> = slots(&body[..open])
        .into_iter()
        .map(|f| MorphUnit::new(f, MorphRole::Prefix))
        .collect();
    units.push(MorphUnit::new(
        stem.nfc().collect::<String>(),
        MorphRole::Stem,
    ));
    units.extend(
        slots(&body[close + 1..])
            .into_iter()
            .map(|f| MorphUnit::new(f, MorphRole::Suffix)),
    );
    CanonicalAnalysis::new(surface.nfc().collect::<String>(), units)
}

#[derive(Deserialize)]
struct RoleRecord {
    surface: String,
    units: Vec<RoleUnit>,
    #[serde(default)]
    count: Option<u64>,
}

#[derive(Deserialize)]
struct RoleUnit {
    form: String,
    role: String,
}

/// Parses one JSONL role-annotation record. Returns the analysis and its
/// optional `count` field.
pub fn parse_role_annotation_counted(record: &str) -> Result<(CanonicalAnalysis, Option<u64>)> {
    let rec: RoleRecord = serde_json::from_str(record)
        .map_err(|e| Error::format(format!("annotation record: {e}")))?;
    if rec.count == Some(0) {
        return Err(Error::format(format!("zero count for {:?}", rec.surface)));
    }
    let units = rec
        .units
        .into_iter()
        .map(|u| {
            let role = u.role.trim().to_lowercase().parse()?;
            Ok(MorphUnit::new(u.form.nfc().collect::<String>(), role))
        })
        .collect::<Result<Vec<_>>>()?;
    let analysis = CanonicalAnalysis::new(rec.surface.nfc().collect::<String>(), units)?;
    Ok((analysis, rec.count))
}

pub fn parse_role_annotation(record: &str) -> Result<CanonicalAnalysis> {
    parse_role_annotation_counted(record).map(|(a, _)| a)
}

/// Surface boundaries of an analysis whose forms concatenate exactly to the
/// surface; `None` otherwise.
pub fn project_to_surface(analysis: &CanonicalAnalysis) -> Option<SurfaceSegmentation> {
    let joined: String = analysis.forms().collect();
    if joined != analysis.surface {
        return None;
    }
    let forms: Vec<&str> = analysis.forms().collect();
    SurfaceSegmentation::from_morphs(&forms).ok()
}

/// Gold surface segmentations with aggregated counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SegmentedCorpus {
    pub entries: Vec<(SurfaceSegmentation, u64)>,
    pub language: String,
    /// Analyses dropped because they could not be projected to the surface.
    pub excluded_nonprojectable: usize,
}

impl SegmentedCorpus {
    pub fn new(language: impl Into<String>) -> Self {
        SegmentedCorpus {
            language: language.into(),
            ..Default::default()
        }
    }

    /// Builds a corpus, aggregating repeated surfaces. Conflicting
    /// segmentations of the same surface are an error.
    pub fn from_entries(
        language: impl Into<String>,
        entries: impl IntoIterator<Item = (SurfaceSegmentation, u64)>,
    ) -> Result<Self> {
        let mut corpus = SegmentedCorpus::new(language);
        let mut index: HashMap<String, usize> = HashMap::new();
        for (seg, count) in entries {
            if count == 0 {
                return Err(Error::argument(format!(
                    "zero count for {:?}",
                    seg.surface()
                )));
            }
            match index.get(seg.surface()) {
                Some(&i) => corpus.merge_into(i, seg, count)?,
                None => {
                    index.insert(seg.surface().to_string(), corpus.entries.len());
                    corpus.entries.push((seg, count));
                }
            }
        }
        Ok(corpus)
    }

    fn merge_into(&mut self, i: usize, seg: SurfaceSegmentation, count: u64) -> Result<()> {
        let (existing, c) = &mut self.entries[i];
        if existing.boundaries() != seg.boundaries() {
            return Err(Error::format(format!(
                "conflicting segmentations for {:?}: {existing} vs {seg}",
                seg.surface()
            )));
        }
        *c += count;
        Ok(())
    }

    pub fn push(&mut self, seg: SurfaceSegmentation, count: u64) -> Result<()> {
        if count == 0 {
            return Err(Error::argument(format!(
                "zero count for {:?}",
                seg.surface()
            )));
        }
        match self
            .entries
            .iter()
            .position(|(s, _)| s.surface() == seg.surface())
        {
            Some(i) => self.merge_into(i, seg, count),
            None => {
                self.entries.push((seg, count));
                Ok(())
            }
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SurfaceSegmentation, u64)> {
        self.entries.iter().map(|(s, c)| (s, *c))
    }

    pub fn word_counts(&self) -> WordCounts {
        let mut wc: WordCounts = self.iter().map(|(s, c)| (s.surface(), c)).collect();
        wc.language = Some(self.language.clone());
        wc
    }

    pub fn lookup(&self) -> HashMap<&str, &SurfaceSegmentation> {
        self.entries.iter().map(|(s, _)| (s.surface(), s)).collect()
    }

    /// Gold-file rendering, one line per entry.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (seg, _) in &self.entries {
            out.push_str(&seg.format_line());
            out.push('\n');
        }
        out
    }

    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.language.as_bytes());
        for (seg, count) in &self.entries {
            hasher.update(seg.format_line().as_bytes());
            hasher.update(count.to_le_bytes());
        }
        hex::encode(hasher.finalize())
    }
}

/// Either tier of annotation for one word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Annotation {
    Surface(SurfaceSegmentation),
    Canonical(CanonicalAnalysis),
}

impl Annotation {
    pub fn surface(&self) -> &str {
        match self {
            Annotation::Surface(s) => s.surface(),
            Annotation::Canonical(a) => &a.surface,
        }
    }

    pub fn morphs(&self) -> Vec<&str> {
        match self {
            Annotation::Surface(s) => s.morphs(),
            Annotation::Canonical(a) => a.forms().collect(),
        }
    }

    pub fn to_surface(&self) -> Option<SurfaceSegmentation> {
        match self {
            Annotation::Surface(s) => Some(s.clone()),
            Annotation::Canonical(a) => project_to_surface(a),
        }
    }
}

fn at_line(e: Error, line: usize) -> Error {
    match e {
        Error::Format(msg) => Error::Format(format!("line {line}: {msg}")),
        other => Error::Format(format!("line {line}: {other}")),
    }
}

/// Annotations loaded from a gold TSV or a JSONL role-annotation file.
#[derive(Debug, Clone, Default)]
pub struct AnnotatedCorpus {
    pub language: String,
    pub entries: Vec<(Annotation, u64)>,
}

impl AnnotatedCorpus {
    /// Reads `surface<TAB>m|m|...` lines; blank lines and `#` comments are
    /// skipped. Repeated lines accumulate counts.
    pub fn read_tsv<R: BufRead>(reader: R, language: &str) -> Result<Self> {
        let mut corpus = AnnotatedCorpus {
            language: language.to_string(),
            entries: Vec::new(),
        };
        let mut index: HashMap<String, usize> = HashMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| match e.kind() {
                std::io::ErrorKind::InvalidData => Error::Decode { line: i + 1 },
                _ => Error::Io(e),
            })?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let seg = parse_surface_segmentation(&line).map_err(|e| at_line(e, i + 1))?;
            corpus.insert(Annotation::Surface(seg), 1, &mut index);
        }
        Ok(corpus)
    }

    /// Reads one role-annotation object per line.
    pub fn read_jsonl<R: BufRead>(reader: R, language: &str) -> Result<Self> {
        let mut corpus = AnnotatedCorpus {
            language: language.to_string(),
            entries: Vec::new(),
        };
        let mut index: HashMap<String, usize> = HashMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| match e.kind() {
                std::io::ErrorKind::InvalidData => Error::Decode { line: i + 1 },
                _ => Error::Io(e),
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let (analysis, count) =
                parse_role_annotation_counted(&line).map_err(|e| at_line(e, i + 1))?;
            corpus.insert(
                Annotation::Canonical(analysis),
                count.unwrap_or(1),
                &mut index,
            );
        }
        Ok(corpus)
    }

    pub fn from_segmented(corpus: &SegmentedCorpus) -> Self {
        AnnotatedCorpus {
            language: corpus.language.clone(),
            entries: corpus
                .iter()
                .map(|(s, c)| (Annotation::Surface(s.clone()), c))
                .collect(),
        }
    }

    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.language.as_bytes());
        for (ann, count) in &self.entries {
            hasher.update([0u8]);
            hasher.update(ann.surface().as_bytes());
            for m in ann.morphs() {
                hasher.update([1u8]);
                hasher.update(m.as_bytes());
            }
            hasher.update(count.to_le_bytes());
        }
        hex::encode(hasher.finalize())
    }

    /// Dispatches on extension: `.jsonl`/`.json` are role annotations,
    /// anything else is a gold TSV.
    pub fn load(path: &Path, language: &str) -> Result<Self> {
        let file = std::io::BufReader::new(std::fs::File::open(path)?);
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") => Self::read_jsonl(file, language),
            _ => Self::read_tsv(file, language),
        }
    }

    fn insert(&mut self, ann: Annotation, count: u64, index: &mut HashMap<String, usize>) {
        match index.get(ann.surface()) {
            Some(&i) if self.entries[i].0 == ann => self.entries[i].1 += count,
            Some(_) => {
                // Conflicting analyses of one surface: keep both for morpheme
                // counting; projection keeps the first.
                self.entries.push((ann, count));
            }
            None => {
                index.insert(ann.surface().to_string(), self.entries.len());
                self.entries.push((ann, count));
            }
        }
    }

    /// Replaces counts with corpus frequencies where the surface occurs in
    /// `counts`.
    pub fn reweight(&mut self, counts: &WordCounts) {
        for (ann, c) in &mut self.entries {
            if let Some(freq) = counts.get(ann.surface()) {
                *c = freq;
            }
        }
    }

    /// Surface-projectable entries; the rest are counted as excluded.
    pub fn to_segmented(&self) -> SegmentedCorpus {
        let mut seen = std::collections::HashSet::new();
        let mut projected = Vec::new();
        let mut excluded = 0;
        for (ann, count) in &self.entries {
            if !seen.insert(ann.surface()) {
                continue;
            }
            match ann.to_surface() {
                Some(seg) => projected.push((seg, *count)),
                None => excluded += 1,
            }
        }
        let mut corpus = SegmentedCorpus::from_entries(self.language.clone(), projected)
            .expect("surfaces are deduplicated and counts positive");
        corpus.excluded_nonprojectable = excluded;
        corpus
    }
}

/// Affix and stem inventories for the synthetic generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inventory {
    pub prefixes: Vec<String>,
    pub stems: Vec<String>,
    pub suffixes: Vec<String>,
}

/// Consonant-vowel syllables U+1200..U+1240 (ሀ..ቀ).
pub fn synthetic_alphabet() -> Vec<char> {
    ('\u{1200}'..'\u{1240}').collect()
}

impl Inventory {
    /// Draws distinct random forms over `alphabet`: 1–2 scalars for affixes,
    /// 2–4 for stems.
    pub fn random(
        seed: u64,
        n_prefixes: usize,
        n_stems: usize,
        n_suffixes: usize,
        alphabet: &[char],
    ) -> Result<Self> {
        if alphabet.is_empty() {
            return Err(Error::argument("empty alphabet"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |n: usize, min: usize, max: usize| -> Result<Vec<String>> {
            let capacity: usize = (min..=max)
                .map(|l| alphabet.len().saturating_pow(l as u32))
                .fold(0usize, usize::saturating_add);
            if n > capacity {
                return Err(Error::argument(format!(
                    "cannot draw {n} distinct forms of length {min}..={max} over {} symbols",
                    alphabet.len()
                )));
            }
            let mut seen = std::collections::BTreeSet::new();
            let mut out = Vec::with_capacity(n);
            while out.len() < n {
                let len = rand::Rng::gen_range(&mut rng, min..=max);
                let form: String = (0..len)
                    .map(|_| *alphabet.choose(&mut rng).expect("non-empty"))
                    .collect();
                if seen.insert(form.clone()) {
                    out.push(form);
                }
            }
            Ok(out)
        };
        Ok(Inventory {
            prefixes: draw(n_prefixes, 1, 2)?,
            stems: draw(n_stems, 2, 4)?,
            suffixes: draw(n_suffixes, 1, 2)?,
        })
    }
}

fn zipf(n: usize) -> WeightedIndex<f64> {
    WeightedIndex::new((1..=n).map(|rank| 1.0 / rank as f64)).expect("n > 0")
}

/// Deterministic prefix+stem+suffix corpus with Zipf-distributed choices.
pub fn gen_synthetic_corpus(
    seed: u64,
    n_words: usize,
    inventory: &Inventory,
) -> Result<SegmentedCorpus> {
    for (name, list) in [
        ("prefixes", &inventory.prefixes),
        ("stems", &inventory.stems),
        ("suffixes", &inventory.suffixes),
    ] {
        if list.is_empty() {
            return Err(Error::argument(format!("empty {name} inventory")));
        }
        if list.iter().any(String::is_empty) {
            return Err(Error::argument(format!("empty form in {name} inventory")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (pd, sd, xd) = (
        zipf(inventory.prefixes.len()),
        zipf(inventory.stems.len()),
        zipf(inventory.suffixes.len()),
    );
    let mut counts: BTreeMap<(usize, usize, usize), u64> = BTreeMap::new();
    let mut order = Vec::new();
    for _ in 0..n_words {
        let key = (
            pd.sample(&mut rng),
            sd.sample(&mut rng),
            xd.sample(&mut rng),
        );
        let c = counts.entry(key).or_insert(0);
        if *c == 0 {
            order.push(key);
        }
        *c += 1;
    }

    let mut corpus = SegmentedCorpus::new("syn");
    let mut index: HashMap<String, usize> = HashMap::new();
    for key in order {
        let (p, s, x) = key;
        let morphs = [
            inventory.prefixes[p].as_str(),
            inventory.stems[s].as_str(),
            inventory.suffixes[x].as_str(),
        ];
        let seg = SurfaceSegmentation::from_morphs(&morphs)?;
        // Distinct triples can collide on the surface; keep the first split.
        match index.get(seg.surface()) {
            Some(&i) => corpus.entries[i].1 += counts[&key],
            None => {
                index.insert(seg.surface().to_string(), corpus.entries.len());
                corpus.entries.push((seg, counts[&key]));
            }
        }
    }
    Ok(corpus)
}
