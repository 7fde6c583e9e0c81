//! Character trie for leftmost-longest lexicon matching.

use std::collections::HashMap;

#[derive(Debug, Default, Clone)]
struct Node {
    children: HashMap<char, Node>,
    terminal: bool,
}

#[derive(Debug, Default, Clone)]
pub(crate) struct Trie {
    root: Node,
    len: usize,
}

impl Trie {
    pub fn insert(&mut self, key: &str) {
        let mut node = &mut self.root;
        for c in key.chars() {
            node = node.children.entry(c).or_default();
        }
        if !node.terminal && !key.is_empty() {
            node.terminal = true;
            self.len += 1;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Length in scalars of the longest key that prefixes `chars`.
    pub fn longest_prefix(&self, chars: &[char]) -> Option<usize> {
        let mut node = &self.root;
        let mut best = None;
        for (i, c) in chars.iter().enumerate() {
            match node.children.get(c) {
                Some(next) => {
                    node = next;
                    if node.terminal {
                        best = Some(i + 1);
                    }
                }
                None => break,
            }
        }
        best
    }

    /// Greedy leftmost-longest cover of `chars`: `(start, end, matched)`
    /// pieces tiling the input, where unmatched runs are merged into gaps.
    pub fn segment(&self, chars: &[char]) -> Vec<(usize, usize, bool)> {
        let mut out: Vec<(usize, usize, bool)> = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            match self.longest_prefix(&chars[i..]) {
                Some(len) => {
                    out.push((i, i + len, true));
                    i += len;
                }
                None => {
                    match out.last_mut() {
                        Some((_, end, false)) => *end = i + 1,
                        _ => out.push((i, i + 1, false)),
                    }
                    i += 1;
                }
            }
        }
        out
    }
}

impl<'a> FromIterator<&'a str> for Trie {
    fn from_iter<I: IntoIterator<Item = &'a str>>(iter: I) -> Self {
        let mut trie = Trie::default();
        for key in iter {
            trie.insert(key);
        }
        trie
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chars(s: &str) -> Vec<char> {
        s.chars().collect()
    }

    #[test]
    fn longest_match_prefers_longer_key() {
        let t: Trie = ["a", "ab", "abc"].into_iter().collect();
        assert_eq!(t.longest_prefix(&chars("abcd")), Some(3));
        assert_eq!(t.longest_prefix(&chars("abx")), Some(2));
        assert_eq!(t.longest_prefix(&chars("x")), None);
    }

    #[test]
    fn segment_gaps_and_matches() {
        let t: Trie = ["አል", "ም"].into_iter().collect();
        let segs = t.segment(&chars("አልሰበሩም"));
        assert_eq!(segs, vec![(0, 2, true), (2, 5, false), (5, 6, true)]);
    }

    #[test]
    fn empty_trie_is_one_gap() {
        let t = Trie::default();
        assert!(t.is_empty());
        assert_eq!(t.segment(&chars("abc")), vec![(0, 3, false)]);
        assert!(t.segment(&[]).is_empty());
    }
}
