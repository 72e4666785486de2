//! Universal coarse POS tags and the tag sets that parameterize the
//! POS-aware metrics.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Universal coarse part-of-speech tag.
///
/// Declaration order is the fixed tag-alphabet order used to break ties in
/// the tagger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PosTag {
    Adj,
    Adv,
    Verb,
    Noun,
    Pron,
    Propn,
    Aux,
    Conj,
    Det,
    Intj,
    Num,
    Part,
    Punct,
    Sconj,
    Sym,
    Adp,
    X,
}

impl PosTag {
    pub const ALL: [PosTag; 17] = [
        PosTag::Adj,
        PosTag::Adv,
        PosTag::Verb,
        PosTag::Noun,
        PosTag::Pron,
        PosTag::Propn,
        PosTag::Aux,
        PosTag::Conj,
        PosTag::Det,
        PosTag::Intj,
        PosTag::Num,
        PosTag::Part,
        PosTag::Punct,
        PosTag::Sconj,
        PosTag::Sym,
        PosTag::Adp,
        PosTag::X,
    ];

    /// Tags carrying factual, interpretable content.
    pub const ADOPTED: [PosTag; 6] = [
        PosTag::Adj,
        PosTag::Adv,
        PosTag::Verb,
        PosTag::Noun,
        PosTag::Pron,
        PosTag::Propn,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PosTag::Adj => "ADJ",
            PosTag::Adv => "ADV",
            PosTag::Verb => "VERB",
            PosTag::Noun => "NOUN",
            PosTag::Pron => "PRON",
            PosTag::Propn => "PROPN",
            PosTag::Aux => "AUX",
            PosTag::Conj => "CONJ",
            PosTag::Det => "DET",
            PosTag::Intj => "INTJ",
            PosTag::Num => "NUM",
            PosTag::Part => "PART",
            PosTag::Punct => "PUNCT",
            PosTag::Sconj => "SCONJ",
            PosTag::Sym => "SYM",
            PosTag::Adp => "ADP",
            PosTag::X => "X",
        }
    }

    pub fn is_adopted(self) -> bool {
        matches!(
            self,
            PosTag::Adj | PosTag::Adv | PosTag::Verb | PosTag::Noun | PosTag::Pron | PosTag::Propn
        )
    }

    /// Maps a tag string to a tag. Unknown strings become `X`; `CCONJ`
    /// (UD v2 / spaCy) is read as `CONJ`.
    pub fn from_label(label: &str) -> PosTag {
        label.parse().unwrap_or(PosTag::X)
    }

    pub(crate) fn index(self) -> usize {
        self as usize
    }

    fn bit(self) -> u32 {
        1 << (self as u32)
    }
}

impl fmt::Display for PosTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PosTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let tag = match s.trim().to_ascii_uppercase().as_str() {
            "ADJ" => PosTag::Adj,
            "ADV" => PosTag::Adv,
            "VERB" => PosTag::Verb,
            "NOUN" => PosTag::Noun,
            "PRON" => PosTag::Pron,
            "PROPN" => PosTag::Propn,
            "AUX" => PosTag::Aux,
            "CONJ" | "CCONJ" => PosTag::Conj,
            "DET" => PosTag::Det,
            "INTJ" => PosTag::Intj,
            "NUM" => PosTag::Num,
            "PART" => PosTag::Part,
            "PUNCT" => PosTag::Punct,
            "SCONJ" => PosTag::Sconj,
            "SYM" => PosTag::Sym,
            "ADP" => PosTag::Adp,
            "X" => PosTag::X,
            other => return Err(Error::InvalidArgument(format!("unknown POS tag `{other}`"))),
        };
        Ok(tag)
    }
}

/// Tag combinations worth comparing, from single tags up to the full
/// adopted set.
const CANONICAL: [&str; 17] = [
    "ADJ",
    "ADV",
    "VERB",
    "PRON",
    "PROPN+NOUN",
    "ADV+VERB",
    "VERB+PROPN+NOUN",
    "PROPN+NOUN+PRON",
    "ADJ+PROPN+NOUN",
    "ADJ+VERB+PROPN+NOUN",
    "ADJ+PROPN+NOUN+PRON",
    "ADV+VERB+PROPN+NOUN",
    "ADV+ADJ+PROPN+NOUN",
    "ADV+PROPN+NOUN+PRON",
    "VERB+PROPN+NOUN+PRON",
    "ADJ+ADV+VERB+PROPN+NOUN",
    "ADJ+ADV+VERB+PROPN+NOUN+PRON",
];

/// Recommended combination for POSSCORE.
pub const DEFAULT_TAGSET: &str = "ADJ+ADV+VERB+PROPN+NOUN";

/// A named, nonempty subset of the adopted tags.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TagSet {
    name: String,
    bits: u32,
}

impl TagSet {
    /// Builds a tag set from explicit members. Every member must be adopted.
    pub fn new(name: impl Into<String>, members: &[PosTag]) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidArgument("tag set must not be empty".into()));
        }
        let mut bits = 0;
        for &tag in members {
            if !tag.is_adopted() {
                return Err(Error::InvalidArgument(format!("tag {tag} is not an adopted POS tag")));
            }
            bits |= tag.bit();
        }
        Ok(TagSet {
            name: name.into(),
            bits,
        })
    }

    /// All canonical combinations, in reporting order.
    pub fn canonical() -> Vec<TagSet> {
        CANONICAL
            .iter()
            .map(|name| parse_members(name).expect("canonical tag sets are well formed"))
            .collect()
    }

    pub fn recommended() -> TagSet {
        parse_members(DEFAULT_TAGSET).unwrap()
    }

    pub fn all_adopted() -> TagSet {
        TagSet::new("ADJ+ADV+VERB+PROPN+NOUN+PRON", &PosTag::ADOPTED).unwrap()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn contains(&self, tag: PosTag) -> bool {
        self.bits & tag.bit() != 0
    }

    pub fn members(&self) -> impl Iterator<Item = PosTag> + '_ {
        PosTag::ALL.into_iter().filter(|t| self.contains(*t))
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn is_subset(&self, other: &TagSet) -> bool {
        self.bits & !other.bits == 0
    }
}

impl fmt::Display for TagSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

fn parse_members(spec: &str) -> Result<TagSet> {
    let members = spec
        .split('+')
        .map(|part| part.trim().parse::<PosTag>())
        .collect::<Result<Vec<_>>>()
        .map_err(|_| Error::UnknownTagSet(spec.to_string()))?;
    let name: Vec<&str> = spec.split('+').map(str::trim).collect();
    TagSet::new(name.join("+").to_ascii_uppercase(), &members)
}

impl FromStr for TagSet {
    type Err = Error;

    /// Accepts `default`, `all`, or a `+`-separated tag list in any order.
    /// A list whose members equal a canonical combination takes the
    /// canonical name.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "default" | "recommended" => return Ok(TagSet::recommended()),
            "all" => return Ok(TagSet::all_adopted()),
            _ => {}
        }
        let parsed = parse_members(s)?;
        Ok(TagSet::canonical()
            .into_iter()
            .find(|c| c.bits == parsed.bits)
            .unwrap_or(parsed))
    }
}
