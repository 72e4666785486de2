//! Tokens, tagged sentences and evaluation sets.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tags::{PosTag, TagSet};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    surface: String,
    norm: String,
}

impl Token {
    /// Panics on an empty surface; tokens always carry text.
    pub fn new(surface: impl Into<String>) -> Token {
        let surface = surface.into();
        assert!(!surface.is_empty(), "token surface must not be empty");
        let norm = surface.to_lowercase();
        Token { surface, norm }
    }

    pub fn surface(&self) -> &str {
        &self.surface
    }

    /// Lowercased form used for matching and embedding lookup.
    pub fn norm(&self) -> &str {
        &self.norm
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.surface)
    }
}

/// Whitespace tokenization with leading and trailing ASCII punctuation split
/// off one character at a time. Inner punctuation (`don't`, `e.g`) stays.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        let chars: Vec<char> = chunk.chars().collect();
        let mut start = 0;
        while start < chars.len() && chars[start].is_ascii_punctuation() {
            start += 1;
        }
        let mut end = chars.len();
        while end > start && chars[end - 1].is_ascii_punctuation() {
            end -= 1;
        }
        for &c in &chars[..start] {
            out.push(Token::new(c.to_string()));
        }
        if start < end {
            out.push(Token::new(chars[start..end].iter().collect::<String>()));
        }
        for &c in &chars[end..] {
            out.push(Token::new(c.to_string()));
        }
    }
    out
}

/// Space-joined surfaces; `tokenize(&detokenize(t))` reproduces `t`.
pub fn detokenize(tokens: &[Token]) -> String {
    tokens.iter().map(Token::surface).collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedToken {
    pub token: Token,
    pub tag: PosTag,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TaggedSentence {
    tokens: Vec<TaggedToken>,
}

impl TaggedSentence {
    pub fn new(tokens: Vec<TaggedToken>) -> Self {
        TaggedSentence { tokens }
    }

    pub fn from_pairs<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, PosTag)>,
        S: Into<String>,
    {
        TaggedSentence {
            tokens: pairs
                .into_iter()
                .map(|(s, tag)| TaggedToken {
                    token: Token::new(s),
                    tag,
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, TaggedToken> {
        self.tokens.iter()
    }

    pub fn tokens(&self) -> Vec<Token> {
        self.tokens.iter().map(|t| t.token.clone()).collect()
    }

    pub fn tags(&self) -> Vec<PosTag> {
        self.tokens.iter().map(|t| t.tag).collect()
    }

    pub fn count_tag(&self, tag: PosTag) -> usize {
        self.tokens.iter().filter(|t| t.tag == tag).count()
    }

    /// The sentence followed by itself.
    pub fn doubled(&self) -> TaggedSentence {
        let mut tokens = self.tokens.clone();
        tokens.extend(self.tokens.iter().cloned());
        TaggedSentence { tokens }
    }

    /// Replaces every `from` tag with `to`.
    pub fn remap(&self, from: PosTag, to: PosTag) -> TaggedSentence {
        TaggedSentence {
            tokens: self
                .tokens
                .iter()
                .map(|t| TaggedToken {
                    token: t.token.clone(),
                    tag: if t.tag == from { to } else { t.tag },
                })
                .collect(),
        }
    }
}

impl<'a> IntoIterator for &'a TaggedSentence {
    type Item = &'a TaggedToken;
    type IntoIter = std::slice::Iter<'a, TaggedToken>;

    fn into_iter(self) -> Self::IntoIter {
        self.tokens.iter()
    }
}

/// Tokens split by membership of their tag in a [`TagSet`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Partition {
    pub pos_words: Vec<Token>,
    pub pos_tags: Vec<PosTag>,
    pub non_pos_words: Vec<Token>,
}

pub fn partition(sentence: &TaggedSentence, tags: &TagSet) -> Partition {
    let mut out = Partition::default();
    for t in sentence {
        if tags.contains(t.tag) {
            out.pos_words.push(t.token.clone());
            out.pos_tags.push(t.tag);
        } else {
            out.non_pos_words.push(t.token.clone());
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Slot {
    #[serde(rename = "a")]
    A,
    #[serde(rename = "b")]
    B,
}

impl Slot {
    pub fn as_str(self) -> &'static str {
        match self {
            Slot::A => "a",
            Slot::B => "b",
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Slot {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "a" | "A" => Ok(Slot::A),
            "b" | "B" => Ok(Slot::B),
            other => Err(Error::InvalidArgument(format!(
                "slot must be `a` or `b`, got `{other}`"
            ))),
        }
    }
}

/// A context, its reference response and two candidates with distinct
/// human quality signals.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationSet {
    pub id: String,
    pub context: Vec<String>,
    pub reference: String,
    pub candidate_a: String,
    pub candidate_b: String,
    pub human_a: f64,
    pub human_b: f64,
}

impl EvaluationSet {
    /// Rejects tied or non-finite human scores.
    pub fn new(
        id: impl Into<String>,
        context: Vec<String>,
        reference: impl Into<String>,
        candidate_a: impl Into<String>,
        candidate_b: impl Into<String>,
        human_a: f64,
        human_b: f64,
    ) -> Result<Self> {
        let id = id.into();
        if !human_a.is_finite() || !human_b.is_finite() {
            return Err(Error::InvalidArgument(format!("set {id}: human scores must be finite")));
        }
        if human_a == human_b {
            return Err(Error::InvalidArgument(format!(
                "set {id}: tied human scores ({human_a})"
            )));
        }
        Ok(EvaluationSet {
            id,
            context,
            reference: reference.into(),
            candidate_a: candidate_a.into(),
            candidate_b: candidate_b.into(),
            human_a,
            human_b,
        })
    }

    pub fn candidate(&self, slot: Slot) -> &str {
        match slot {
            Slot::A => &self.candidate_a,
            Slot::B => &self.candidate_b,
        }
    }

    pub fn human(&self, slot: Slot) -> f64 {
        match slot {
            Slot::A => self.human_a,
            Slot::B => self.human_b,
        }
    }

    /// Slot of the candidate humans preferred.
    pub fn good_slot(&self) -> Slot {
        if self.human_a > self.human_b {
            Slot::A
        } else {
            Slot::B
        }
    }

    pub fn bad_slot(&self) -> Slot {
        match self.good_slot() {
            Slot::A => Slot::B,
            Slot::B => Slot::A,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn surfaces(text: &str) -> Vec<String> {
        tokenize(text).iter().map(|t| t.surface().to_string()).collect()
    }

    #[test]
    fn tokenize_examples() {
        assert!(tokenize("").is_empty());
        assert_eq!(surfaces("I am competing."), ["I", "am", "competing", "."]);
        assert_eq!(surfaces("chess?!"), ["chess", "?", "!"]);
        assert_eq!(surfaces("don't \"stop\""), ["don't", "\"", "stop", "\""]);
        assert_eq!(surfaces("  ...  "), [".", ".", "."]);
        assert_eq!(tokenize("Chess")[0].norm(), "chess");
    }

    pub(crate) fn table3() -> TaggedSentence {
        use PosTag::*;
        TaggedSentence::from_pairs([
            ("it", Pron),
            ("is", Verb),
            ("from", Adp),
            ("our", Pron),
            ("evolution", Noun),
            ("when", Sconj),
            ("land", Noun),
            ("animals", Noun),
            ("had", Verb),
            ("both", Conj),
            ("gills", Noun),
            ("and", Conj),
            ("lungs", Noun),
        ])
    }

    #[test]
    fn partition_table3() {
        let tags = TagSet::new("NOUN+VERB", &[PosTag::Noun, PosTag::Verb]).unwrap();
        let p = partition(&table3(), &tags);
        let words: Vec<_> = p.pos_words.iter().map(Token::surface).collect();
        assert_eq!(words, ["is", "evolution", "land", "animals", "had", "gills", "lungs"]);
        use PosTag::*;
        assert_eq!(p.pos_tags, [Verb, Noun, Noun, Noun, Verb, Noun, Noun]);
        assert_eq!(p.non_pos_words.len(), 6);
    }

    #[test]
    fn partition_full_and_empty_cover() {
        let s = TaggedSentence::from_pairs([("a", PosTag::Noun), ("b", PosTag::Adj)]);
        let p = partition(&s, &TagSet::all_adopted());
        assert!(p.non_pos_words.is_empty());
        let s = TaggedSentence::from_pairs([("the", PosTag::Det), (".", PosTag::Punct)]);
        let p = partition(&s, &TagSet::all_adopted());
        assert!(p.pos_words.is_empty());
        assert_eq!(p.non_pos_words.len(), 2);
    }

    #[test]
    fn evaluation_set_rejects_ties() {
        assert!(EvaluationSet::new("s", vec![], "r", "a", "b", 3.0, 3.0).is_err());
        let set = EvaluationSet::new("s", vec![], "r", "a", "b", 2.0, 3.0).unwrap();
        assert_eq!(set.good_slot(), Slot::B);
        assert_eq!(set.bad_slot(), Slot::A);
    }

    fn arb_sentence() -> impl Strategy<Value = TaggedSentence> {
        prop::collection::vec(("[a-e]{1,3}", prop::sample::select(PosTag::ALL.to_vec())), 0..12)
            .prop_map(TaggedSentence::from_pairs)
    }

    fn arb_tagset() -> impl Strategy<Value = TagSet> {
        prop::sample::subsequence(PosTag::ADOPTED.to_vec(), 1..=6).prop_map(|m| TagSet::new("t", &m).unwrap())
    }

    proptest! {
        #[test]
        fn partition_is_a_partition(s in arb_sentence(), tags in arb_tagset()) {
            let p = partition(&s, &tags);
            prop_assert_eq!(p.pos_words.len() + p.non_pos_words.len(), s.len());
            prop_assert_eq!(p.pos_words.len(), p.pos_tags.len());
            let mut all: Vec<_> = p.pos_words.iter().chain(&p.non_pos_words).map(|t| t.surface().to_string()).collect();
            let mut orig: Vec<_> = s.iter().map(|t| t.token.surface().to_string()).collect();
            all.sort();
            orig.sort();
            prop_assert_eq!(all, orig);
        }

        #[test]
        fn partition_is_monotone(s in arb_sentence(), a in arb_tagset(), b in arb_tagset()) {
            let members: Vec<_> = a.members().chain(b.members()).collect();
            let union = TagSet::new("u", &members).unwrap();
            prop_assert!(a.is_subset(&union));
            let small = partition(&s, &a).pos_words;
            let mut large = partition(&s, &union).pos_words;
            for w in small {
                let idx = large.iter().position(|x| *x == w);
                prop_assert!(idx.is_some());
                large.remove(idx.unwrap());
            }
        }

        #[test]
        fn tokenize_is_idempotent(text in "[a-zA-Z'.,!? ]{0,40}") {
            let once = tokenize(&text);
            let twice = tokenize(&detokenize(&once));
            prop_assert_eq!(once, twice);
        }
    }
}
