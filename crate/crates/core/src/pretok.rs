//! Normalization and pre-tokenization of Ge'ez-script text.
//!
//! [`normalize`] applies NFC, maps the Ethiopic wordspace (U+1361) to an
//! ASCII space, removes the policy's strip set and collapses whitespace.
//! [`pretokenize`] then splits the normalized text into word, number,
//! punctuation and other runs. Every character of the punctuation set
//! becomes a token of its own.

use std::collections::BTreeSet;
use std::ops::RangeInclusive;
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::{Error, Result};

pub const ETHIOPIC_WORDSPACE: char = '\u{1361}';

const ETHIOPIC_BLOCKS: [RangeInclusive<u32>; 4] = [
    0x1200..=0x137F,
    0x1380..=0x139F,
    0x2D80..=0x2DDF,
    0xAB00..=0xAB2F,
];

const ETHIOPIC_NUMERALS: RangeInclusive<char> = '\u{1369}'..='\u{137C}';

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizationPolicy {
    pub treat_ethiopic_wordspace_as_space: bool,
    pub strip_set: BTreeSet<char>,
    pub punct_set: BTreeSet<char>,
    /// Code-point ranges considered native to the corpus.
    pub keep_scripts: Vec<RangeInclusive<u32>>,
    /// Drop non-space characters outside `keep_scripts`. Off by default.
    pub strip_foreign: bool,
}

impl Default for NormalizationPolicy {
    fn default() -> Self {
        let strip_set = [
            '\u{00AD}', '\u{200B}', '\u{200C}', '\u{200D}', '\u{2060}', '\u{FEFF}',
        ]
        .into_iter()
        .collect();
        let punct_set = ('\u{1361}'..='\u{1368}')
            .chain(
                (0u8..=127)
                    .map(char::from)
                    .filter(char::is_ascii_punctuation),
            )
            .collect();
        let mut keep_scripts: Vec<RangeInclusive<u32>> = ETHIOPIC_BLOCKS.to_vec();
        keep_scripts.push(0x30..=0x39);
        keep_scripts.extend([0x21..=0x2F, 0x3A..=0x40, 0x5B..=0x60, 0x7B..=0x7E]);
        NormalizationPolicy {
            treat_ethiopic_wordspace_as_space: true,
            strip_set,
            punct_set,
            keep_scripts,
            strip_foreign: false,
        }
    }
}

/// On-disk policy document. Missing keys fall back to the defaults.
#[derive(Debug, Deserialize, Serialize)]
struct PolicyDocument {
    #[serde(default)]
    wordspace_as_space: Option<bool>,
    #[serde(default)]
    strip: Option<Vec<String>>,
    #[serde(default)]
    punct: Option<Vec<String>>,
    #[serde(default)]
    strip_foreign: Option<bool>,
}

fn parse_code_point(field: &str, raw: &str) -> Result<char> {
    let digits = raw
        .trim()
        .trim_start_matches("U+")
        .trim_start_matches("u+")
        .trim_start_matches("0x")
        .trim_start_matches("0X");
    u32::from_str_radix(digits, 16)
        .ok()
        .and_then(char::from_u32)
        .ok_or_else(|| Error::Config(format!("policy `{field}`: invalid code point {raw:?}")))
}

impl NormalizationPolicy {
    pub fn from_json(json: &str) -> Result<Self> {
        let doc: PolicyDocument =
            serde_json::from_str(json).map_err(|e| Error::Config(format!("policy: {e}")))?;
        let mut policy = NormalizationPolicy::default();
        if let Some(flag) = doc.wordspace_as_space {
            policy.treat_ethiopic_wordspace_as_space = flag;
        }
        if let Some(flag) = doc.strip_foreign {
            policy.strip_foreign = flag;
        }
        if let Some(strip) = doc.strip {
            policy.strip_set = strip
                .iter()
                .map(|cp| parse_code_point("strip", cp))
                .collect::<Result<_>>()?;
        }
        if let Some(punct) = doc.punct {
            policy.punct_set = punct
                .iter()
                .map(|cp| parse_code_point("punct", cp))
                .collect::<Result<_>>()?;
        }
        policy.validate()?;
        Ok(policy)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(c) = self.strip_set.intersection(&self.punct_set).next() {
            return Err(Error::Config(format!(
                "U+{:04X} is in both the strip and punctuation sets",
                *c as u32
            )));
        }
        Ok(())
    }

    pub fn is_punct(&self, c: char) -> bool {
        self.punct_set.contains(&c)
    }

    pub fn is_kept(&self, c: char) -> bool {
        let cp = c as u32;
        self.keep_scripts.iter().any(|r| r.contains(&cp))
    }
}

/// NFC text plus anchors mapping normalized offsets back to the input.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NormalizedText {
    pub text: String,
    /// `(normalized offset, original offset)` pairs, one per position where
    /// the offset delta changes. Original offsets index the NFC form of the
    /// input.
    pub source_span_map: Vec<(usize, usize)>,
}

impl NormalizedText {
    pub fn as_str(&self) -> &str {
        &self.text
    }

    /// Maps a scalar offset in the normalized text to the input.
    pub fn original_offset(&self, offset: usize) -> usize {
        let idx = self
            .source_span_map
            .partition_point(|&(norm, _)| norm <= offset);
        match idx.checked_sub(1).map(|i| self.source_span_map[i]) {
            Some((norm, orig)) => orig + (offset - norm),
            None => offset,
        }
    }
}

pub fn normalize(raw: &str, policy: &NormalizationPolicy) -> NormalizedText {
    let mut text = String::with_capacity(raw.len());
    let mut anchors: Vec<(usize, usize)> = Vec::new();
    let mut out_len = 0usize;
    let mut pending_space = false;
    let mut last_delta: Option<isize> = None;

    for (orig, c) in raw.nfc().enumerate() {
        let c = if policy.treat_ethiopic_wordspace_as_space && c == ETHIOPIC_WORDSPACE {
            ' '
        } else {
            c
        };
        if policy.strip_set.contains(&c) {
            continue;
        }
        if c.is_whitespace() {
            pending_space = out_len > 0;
            continue;
        }
        if policy.strip_foreign && !policy.is_kept(c) {
            continue;
        }
        if pending_space {
            text.push(' ');
            out_len += 1;
            pending_space = false;
        }
        let delta = orig as isize - out_len as isize;
        if last_delta != Some(delta) {
            anchors.push((out_len, orig));
            last_delta = Some(delta);
        }
        text.push(c);
        out_len += 1;
    }

    NormalizedText {
        text,
        source_span_map: anchors,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PreTokenKind {
    Word,
    Punctuation,
    Number,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreToken {
    pub text: String,
    /// Half-open scalar range in the normalized text.
    pub span: (usize, usize),
    pub kind: PreTokenKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CharClass {
    Space,
    Punct,
    Digit,
    Letter,
    Other,
}

pub(crate) fn is_digit(c: char) -> bool {
    c.is_ascii_digit() || ETHIOPIC_NUMERALS.contains(&c) || c.is_numeric()
}

fn is_combining_mark(c: char) -> bool {
    matches!(c as u32,
        0x0300..=0x036F | 0x1AB0..=0x1AFF | 0x1DC0..=0x1DFF | 0x20D0..=0x20FF | 0xFE20..=0xFE2F)
}

fn is_ethiopic(c: char) -> bool {
    let cp = c as u32;
    ETHIOPIC_BLOCKS.iter().any(|r| r.contains(&cp))
}

fn classify(c: char, policy: &NormalizationPolicy) -> CharClass {
    if c.is_whitespace() {
        CharClass::Space
    } else if policy.is_punct(c) {
        CharClass::Punct
    } else if is_digit(c) {
        CharClass::Digit
    } else if c.is_alphabetic() || is_combining_mark(c) || is_ethiopic(c) {
        CharClass::Letter
    } else {
        CharClass::Other
    }
}

pub fn pretokenize(text: &NormalizedText, policy: &NormalizationPolicy) -> Vec<PreToken> {
    pretokenize_str(&text.text, policy)
}

/// Pre-tokenizes a string that is already normalized under `policy`.
pub fn pretokenize_str(text: &str, policy: &NormalizationPolicy) -> Vec<PreToken> {
    let mut tokens = Vec::new();
    let mut current: Option<(CharClass, usize, String)> = None;

    let flush =
        |tokens: &mut Vec<PreToken>, run: Option<(CharClass, usize, String)>, end: usize| {
            if let Some((class, start, text)) = run {
                let kind = match class {
                    CharClass::Letter => PreTokenKind::Word,
                    CharClass::Digit => PreTokenKind::Number,
                    CharClass::Punct => PreTokenKind::Punctuation,
                    CharClass::Other => PreTokenKind::Other,
                    CharClass::Space => unreachable!("spaces never open a run"),
                };
                tokens.push(PreToken {
                    text,
                    span: (start, end),
                    kind,
                });
            }
        };

    for (i, c) in text.chars().enumerate() {
        let class = classify(c, policy);
        let continues =
            matches!(&current, Some((open, _, _)) if *open == class && class != CharClass::Punct);
        if continues {
            if let Some((_, _, buf)) = current.as_mut() {
                buf.push(c);
            }
            continue;
        }
        flush(&mut tokens, current.take(), i);
        if class != CharClass::Space {
            current = Some((class, i, c.to_string()));
        }
    }
    let end = text.chars().count();
    flush(&mut tokens, current.take(), end);
    tokens
}

/// Rejoins pre-token texts: one space between non-punctuation neighbours,
/// none around punctuation.
pub fn join_pretokens<'a>(parts: impl IntoIterator<Item = (&'a str, PreTokenKind)>) -> String {
    let mut out = String::new();
    let mut prev: Option<PreTokenKind> = None;
    for (text, kind) in parts {
        if let Some(p) = prev {
            if p != PreTokenKind::Punctuation && kind != PreTokenKind::Punctuation {
                out.push(' ');
            }
        }
        out.push_str(text);
        prev = Some(kind);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn norm(s: &str) -> String {
        normalize(s, &NormalizationPolicy::default()).text
    }

    fn kinds(s: &str) -> Vec<(String, PreTokenKind)> {
        let policy = NormalizationPolicy::default();
        pretokenize(&normalize(s, &policy), &policy)
            .into_iter()
            .map(|t| (t.text, t.kind))
            .collect()
    }

    #[test]
    fn wordspace_becomes_space() {
        assert_eq!(norm("ሰላም፡ዓለም"), "ሰላም ዓለም");
    }

    #[test]
    fn wordspace_kept_when_flag_off() {
        let policy = NormalizationPolicy {
            treat_ethiopic_wordspace_as_space: false,
            ..Default::default()
        };
        let n = normalize("ሰላም፡ዓለም", &policy);
        assert_eq!(n.text, "ሰላም፡ዓለም");
        let toks = pretokenize(&n, &policy);
        assert_eq!(toks[1].kind, PreTokenKind::Punctuation);
        assert_eq!(toks[1].text, "፡");
    }

    #[test]
    fn whitespace_collapses_and_trims() {
        assert_eq!(norm("a  b "), "a b");
        assert_eq!(norm("  \t a\n\nb"), "a b");
        assert_eq!(norm(""), "");
        assert_eq!(norm("   "), "");
    }

    #[test]
    fn strip_set_removed() {
        assert_eq!(norm("ቤት\u{200B}"), "ቤት");
        assert_eq!(norm("ቤ\u{FEFF}ት"), "ቤት");
    }

    #[test]
    fn nfc_applied() {
        assert_eq!(norm("e\u{0301}"), "\u{00E9}");
    }

    #[test]
    fn span_map_tracks_removals() {
        let n = normalize("ቤ\u{200B}ት  ሰው", &NormalizationPolicy::default());
        assert_eq!(n.text, "ቤት ሰው");
        assert_eq!(n.original_offset(0), 0);
        assert_eq!(n.original_offset(1), 2);
        assert_eq!(n.original_offset(3), 5);
        assert_eq!(n.original_offset(4), 6);
    }

    #[test]
    fn punctuation_split() {
        assert_eq!(
            kinds("ሰላም።"),
            vec![
                ("ሰላም".to_string(), PreTokenKind::Word),
                ("።".to_string(), PreTokenKind::Punctuation)
            ]
        );
        // consecutive punctuation stays one token per character
        assert_eq!(kinds("!!").len(), 2);
    }

    #[test]
    fn digits_classified_as_numbers() {
        assert_eq!(
            kinds("ዓመት 2015"),
            vec![
                ("ዓመት".to_string(), PreTokenKind::Word),
                ("2015".to_string(), PreTokenKind::Number)
            ]
        );
        assert_eq!(
            kinds("ዓመት፲፱"),
            vec![
                ("ዓመት".to_string(), PreTokenKind::Word),
                ("፲፱".to_string(), PreTokenKind::Number)
            ]
        );
    }

    #[test]
    fn empty_input() {
        assert!(kinds("").is_empty());
    }

    #[test]
    fn symbols_are_other() {
        assert_eq!(kinds("ሰው €")[1].1, PreTokenKind::Other);
    }

    #[test]
    fn strip_foreign_drops_unlisted_scripts() {
        let policy = NormalizationPolicy {
            strip_foreign: true,
            ..Default::default()
        };
        assert_eq!(normalize("ሰላም hello 12", &policy).text, "ሰላም 12");
    }

    #[test]
    fn policy_json() {
        let p = NormalizationPolicy::from_json(
            r#"{"wordspace_as_space": false, "strip": ["200B"], "punct": ["1362", "U+0021"]}"#,
        )
        .unwrap();
        assert!(!p.treat_ethiopic_wordspace_as_space);
        assert_eq!(p.strip_set, ['\u{200B}'].into_iter().collect());
        assert_eq!(p.punct_set, ['\u{1362}', '!'].into_iter().collect());

        let overlap = NormalizationPolicy::from_json(r#"{"strip": ["21"], "punct": ["21"]}"#);
        assert!(matches!(overlap, Err(Error::Config(_))));
        assert!(NormalizationPolicy::from_json(r#"{"strip": ["zz"]}"#).is_err());
    }

    #[test]
    fn default_policy_is_valid() {
        let p = NormalizationPolicy::default();
        p.validate().unwrap();
        for cp in [0x1200, 0x1380, 0x2D80, 0xAB00, 0x30, 0x21] {
            assert!(p.is_kept(char::from_u32(cp).unwrap()));
        }
    }

    #[test]
    fn join_follows_spacing_convention() {
        let toks = kinds("ሰላም ዓለም። 2015");
        let joined = join_pretokens(toks.iter().map(|(t, k)| (t.as_str(), *k)));
        assert_eq!(joined, "ሰላም ዓለም።2015");
    }

    fn ethiopic_text() -> impl Strategy<Value = String> {
        prop::collection::vec(
            prop_oneof![
                (0x1200u32..0x1248).prop_map(|c| char::from_u32(c).unwrap()),
                Just(' '),
                Just('\u{1361}'),
                Just('\u{1362}'),
                Just('\u{200B}'),
                Just('a'),
                Just('7'),
                Just('!'),
                Just('\t'),
            ],
            0..40,
        )
        .prop_map(|v| v.into_iter().collect())
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(s in ethiopic_text()) {
            let p = NormalizationPolicy::default();
            let once = normalize(&s, &p).text;
            prop_assert_eq!(normalize(&once, &p).text, once.clone());
        }

        #[test]
        fn normalized_invariants(s in ethiopic_text()) {
            let p = NormalizationPolicy::default();
            let n = normalize(&s, &p).text;
            prop_assert!(!n.starts_with(' ') && !n.ends_with(' '));
            prop_assert!(!n.contains("  "));
            prop_assert!(n.chars().all(|c| !p.strip_set.contains(&c)));
        }

        #[test]
        fn spans_partition_non_space_content(s in ethiopic_text()) {
            let p = NormalizationPolicy::default();
            let n = normalize(&s, &p);
            let toks = pretokenize(&n, &p);
            let chars: Vec<char> = n.text.chars().collect();
            let mut covered = vec![false; chars.len()];
            let mut last_end = 0;
            for t in &toks {
                prop_assert!(t.span.0 < t.span.1);
                prop_assert!(t.span.0 >= last_end);
                last_end = t.span.1;
                let sub: String = chars[t.span.0..t.span.1].iter().collect();
                prop_assert_eq!(&sub, &t.text);
                for c in covered.iter_mut().take(t.span.1).skip(t.span.0) {
                    *c = true;
                }
                if t.kind == PreTokenKind::Word {
                    prop_assert!(t.text.chars().all(|c| !p.is_punct(c) && !c.is_whitespace()));
                }
                if t.kind == PreTokenKind::Punctuation {
                    prop_assert_eq!(t.text.chars().count(), 1);
                }
            }
            for (c, cov) in chars.iter().zip(covered) {
                prop_assert_eq!(*c != ' ', cov);
            }
        }

        #[test]
        fn ethiopic_letters_only_yield_words(
            s in prop::collection::vec(
                prop_oneof![(0x1200u32..0x135B).prop_map(|c| char::from_u32(c).unwrap()), Just(' ')],
                0..30,
            )
        ) {
            let s: String = s.into_iter().collect();
            let p = NormalizationPolicy::default();
            let toks = pretokenize(&normalize(&s, &p), &p);
            prop_assert!(toks.iter().all(|t| t.kind == PreTokenKind::Word));
        }
    }
}
