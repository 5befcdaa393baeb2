//! Entity spans and the BIO / BILOU tag schemes, including deterministic
//! repair of invalid sequences produced by greedy decoding.

use crate::error::{Error, Result};
use std::fmt;

/// The three entity types the tagger distinguishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EntityType {
    Loc,
    Org,
    Per,
}

impl EntityType {
    pub const ALL: [EntityType; 3] = [EntityType::Loc, EntityType::Org, EntityType::Per];

    pub fn as_str(self) -> &'static str {
        match self {
            EntityType::Loc => "LOC",
            EntityType::Org => "ORG",
            EntityType::Per => "PER",
        }
    }

    /// Human-readable name used in dataset statistics tables.
    pub fn long_name(self) -> &'static str {
        match self {
            EntityType::Loc => "Location",
            EntityType::Org => "Organization",
            EntityType::Per => "Person",
        }
    }

    pub fn parse(s: &str) -> Option<EntityType> {
        match s {
            "LOC" => Some(EntityType::Loc),
            "ORG" => Some(EntityType::Org),
            "PER" => Some(EntityType::Per),
            _ => None,
        }
    }
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A contiguous entity mention; `start` and `end` are inclusive token indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntitySpan {
    pub start: usize,
    pub end: usize,
    pub etype: EntityType,
}

impl EntitySpan {
    pub fn new(start: usize, end: usize, etype: EntityType) -> EntitySpan {
        EntitySpan { start, end, etype }
    }
}

/// One BILOU tag. BIO sequences reuse the same type restricted to
/// `Outside`, `Begin` and `Inside`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tag {
    Outside,
    Begin(EntityType),
    Inside(EntityType),
    Last(EntityType),
    Unit(EntityType),
}

impl Tag {
    pub fn as_str(self) -> &'static str {
        match self {
            Tag::Outside => "O",
            Tag::Begin(EntityType::Loc) => "B-LOC",
            Tag::Begin(EntityType::Org) => "B-ORG",
            Tag::Begin(EntityType::Per) => "B-PER",
            Tag::Inside(EntityType::Loc) => "I-LOC",
            Tag::Inside(EntityType::Org) => "I-ORG",
            Tag::Inside(EntityType::Per) => "I-PER",
            Tag::Last(EntityType::Loc) => "L-LOC",
            Tag::Last(EntityType::Org) => "L-ORG",
            Tag::Last(EntityType::Per) => "L-PER",
            Tag::Unit(EntityType::Loc) => "U-LOC",
            Tag::Unit(EntityType::Org) => "U-ORG",
            Tag::Unit(EntityType::Per) => "U-PER",
        }
    }

    pub fn parse(s: &str) -> Option<Tag> {
        if s == "O" {
            return Some(Tag::Outside);
        }
        let (prefix, etype) = s.split_once('-')?;
        let etype = EntityType::parse(etype)?;
        match prefix {
            "B" => Some(Tag::Begin(etype)),
            "I" => Some(Tag::Inside(etype)),
            "L" => Some(Tag::Last(etype)),
            "U" => Some(Tag::Unit(etype)),
            _ => None,
        }
    }

    pub fn etype(self) -> Option<EntityType> {
        match self {
            Tag::Outside => None,
            Tag::Begin(t) | Tag::Inside(t) | Tag::Last(t) | Tag::Unit(t) => Some(t),
        }
    }

    pub fn is_bio(self) -> bool {
        !matches!(self, Tag::Last(_) | Tag::Unit(_))
    }

    // (prefix rank, type rank) matching the lexicographic order of the
    // string forms: B-* < I-* < L-* < O < U-*.
    fn sort_key(self) -> (u8, u8) {
        let trank = |t: EntityType| t as u8;
        match self {
            Tag::Begin(t) => (0, trank(t)),
            Tag::Inside(t) => (1, trank(t)),
            Tag::Last(t) => (2, trank(t)),
            Tag::Outside => (3, 0),
            Tag::Unit(t) => (4, trank(t)),
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl PartialOrd for Tag {
    fn partial_cmp(&self, other: &Tag) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Tag {
    fn cmp(&self, other: &Tag) -> std::cmp::Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

/// The 13 BILOU tags in their string sort order. This order fixes the
/// label indices of the tagger and the tie-break winner of its argmax.
pub fn bilou_tags() -> [Tag; 13] {
    let mut tags = [Tag::Outside; 13];
    let mut i = 0;
    for make in [Tag::Begin, Tag::Inside, Tag::Last] {
        for t in EntityType::ALL {
            tags[i] = make(t);
            i += 1;
        }
    }
    tags[i] = Tag::Outside;
    i += 1;
    for t in EntityType::ALL {
        tags[i] = Tag::Unit(t);
        i += 1;
    }
    tags
}

/// Which tag scheme a sequence of tags belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TagScheme {
    Bio,
    Bilou,
}

impl TagScheme {
    /// BIO tags are a subset of BILOU tags, so a sequence is BIO unless it
    /// contains an L- or U- tag.
    pub fn detect<'a>(tags: impl IntoIterator<Item = &'a Tag>) -> TagScheme {
        if tags.into_iter().all(|t| t.is_bio()) {
            TagScheme::Bio
        } else {
            TagScheme::Bilou
        }
    }

    pub fn tag_count(self) -> usize {
        match self {
            TagScheme::Bio => 7,
            TagScheme::Bilou => 13,
        }
    }
}

/// Encodes non-overlapping spans as a BILOU sequence of the given length.
pub fn spans_to_bilou(spans: &[EntitySpan], length: usize) -> Result<Vec<Tag>> {
    let mut sorted: Vec<EntitySpan> = spans.to_vec();
    sorted.sort();
    for span in &sorted {
        if span.start > span.end || span.end >= length {
            return Err(Error::SpanOutOfRange {
                start: span.start,
                end: span.end,
                len: length,
            });
        }
    }
    for pair in sorted.windows(2) {
        if pair[1].start <= pair[0].end {
            return Err(Error::OverlappingSpans {
                first: (pair[0].start, pair[0].end),
                second: (pair[1].start, pair[1].end),
            });
        }
    }
    let mut tags = vec![Tag::Outside; length];
    for span in &sorted {
        if span.start == span.end {
            tags[span.start] = Tag::Unit(span.etype);
        } else {
            tags[span.start] = Tag::Begin(span.etype);
            for slot in tags.iter_mut().take(span.end).skip(span.start + 1) {
                *slot = Tag::Inside(span.etype);
            }
            tags[span.end] = Tag::Last(span.etype);
        }
    }
    Ok(tags)
}

/// Decodes a BILOU sequence into spans. Total: valid sequences invert
/// `spans_to_bilou` exactly, and invalid ones are repaired deterministically.
///
/// Repair rule: an open span absorbs same-type B and I tags, closes at a
/// same-type L or U (inclusive), and is cut short by O, a type change, or
/// the end of the sentence. A lone L or U outside any span is a one-token
/// span. Thus an all-B run collapses into a single span, while sequences
/// of completed spans (… L or U followed by more tags) keep their
/// boundaries.
pub fn bilou_to_spans(tags: &[Tag]) -> Vec<EntitySpan> {
    let mut spans = Vec::new();
    let mut open: Option<(usize, EntityType)> = None;
    for (i, &tag) in tags.iter().enumerate() {
        if let Some((start, t)) = open {
            match tag.etype() {
                Some(t2) if t2 == t => {
                    match tag {
                        Tag::Last(_) | Tag::Unit(_) => {
                            spans.push(EntitySpan::new(start, i, t));
                            open = None;
                        }
                        _ => {} // same-type B or I extends the open span
                    }
                    continue;
                }
                _ => {
                    spans.push(EntitySpan::new(start, i - 1, t));
                    open = None;
                }
            }
        }
        match tag {
            Tag::Outside => {}
            Tag::Begin(t) | Tag::Inside(t) => open = Some((i, t)),
            Tag::Last(t) | Tag::Unit(t) => spans.push(EntitySpan::new(i, i, t)),
        }
    }
    if let Some((start, t)) = open {
        spans.push(EntitySpan::new(start, tags.len() - 1, t));
    }
    spans
}

/// Converts a valid BIO sequence to BILOU. A stray I (no same-type span
/// open) starts a new span, matching the IOB-style lenience of common
/// corpus readers. L or U tags in the input are rejected.
pub fn bio_to_bilou(tags: &[Tag]) -> Result<Vec<Tag>> {
    let mut spans = Vec::new();
    let mut open: Option<(usize, usize, EntityType)> = None;
    for (i, &tag) in tags.iter().enumerate() {
        if !tag.is_bio() {
            return Err(Error::InvalidLabel {
                msg: format!("{tag} is not a BIO tag"),
            });
        }
        match tag {
            Tag::Outside => {
                if let Some((s, e, t)) = open.take() {
                    spans.push(EntitySpan::new(s, e, t));
                }
            }
            Tag::Begin(t) => {
                if let Some((s, e, t0)) = open.take() {
                    spans.push(EntitySpan::new(s, e, t0));
                }
                open = Some((i, i, t));
            }
            Tag::Inside(t) => match open {
                Some((s, _, t0)) if t0 == t => open = Some((s, i, t0)),
                _ => {
                    if let Some((s, e, t0)) = open.take() {
                        spans.push(EntitySpan::new(s, e, t0));
                    }
                    open = Some((i, i, t));
                }
            },
            Tag::Last(_) | Tag::Unit(_) => unreachable!(),
        }
    }
    if let Some((s, e, t)) = open {
        spans.push(EntitySpan::new(s, e, t));
    }
    spans_to_bilou(&spans, tags.len())
}

/// Converts a BILOU sequence to BIO. Total: the input is decoded with the
/// repairing `bilou_to_spans` first.
pub fn bilou_to_bio(tags: &[Tag]) -> Vec<Tag> {
    let mut out = vec![Tag::Outside; tags.len()];
    for span in bilou_to_spans(tags) {
        out[span.start] = Tag::Begin(span.etype);
        for slot in out.iter_mut().take(span.end + 1).skip(span.start + 1) {
            *slot = Tag::Inside(span.etype);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use EntityType::*;

    fn tags(s: &str) -> Vec<Tag> {
        s.split_whitespace()
            .map(|t| Tag::parse(t).unwrap())
            .collect()
    }

    #[test]
    fn encodes_unit_multi_and_empty() {
        assert_eq!(
            spans_to_bilou(&[EntitySpan::new(0, 0, Loc)], 1).unwrap(),
            tags("U-LOC")
        );
        assert_eq!(
            spans_to_bilou(&[EntitySpan::new(0, 2, Org)], 3).unwrap(),
            tags("B-ORG I-ORG L-ORG")
        );
        assert_eq!(spans_to_bilou(&[], 2).unwrap(), tags("O O"));
    }

    #[test]
    fn encode_rejects_bad_spans() {
        let err = spans_to_bilou(&[EntitySpan::new(1, 3, Per)], 3).unwrap_err();
        assert!(matches!(err, Error::SpanOutOfRange { .. }));
        let err = spans_to_bilou(&[EntitySpan::new(0, 2, Per), EntitySpan::new(2, 2, Loc)], 4)
            .unwrap_err();
        assert!(matches!(err, Error::OverlappingSpans { .. }));
    }

    #[test]
    fn decodes_valid_sequences() {
        assert_eq!(
            bilou_to_spans(&tags("B-PER L-PER")),
            vec![EntitySpan::new(0, 1, Per)]
        );
        assert_eq!(
            bilou_to_spans(&tags("U-PER B-ORG")),
            vec![EntitySpan::new(0, 0, Per), EntitySpan::new(1, 1, Org)]
        );
        // Adjacent completed spans keep their boundaries.
        assert_eq!(
            bilou_to_spans(&tags("U-PER U-PER")),
            vec![EntitySpan::new(0, 0, Per), EntitySpan::new(1, 1, Per)]
        );
        assert_eq!(
            bilou_to_spans(&tags("B-PER L-PER U-PER")),
            vec![EntitySpan::new(0, 1, Per), EntitySpan::new(2, 2, Per)]
        );
    }

    #[test]
    fn repairs_invalid_sequences() {
        assert_eq!(
            bilou_to_spans(&tags("I-LOC L-LOC")),
            vec![EntitySpan::new(0, 1, Loc)]
        );
        // An unbroken run of same-type B tags is a single span.
        assert_eq!(
            bilou_to_spans(&tags("B-LOC B-LOC B-LOC")),
            vec![EntitySpan::new(0, 2, Loc)]
        );
        // A type change cuts the open span short.
        assert_eq!(
            bilou_to_spans(&tags("B-PER I-ORG")),
            vec![EntitySpan::new(0, 0, Per), EntitySpan::new(1, 1, Org)]
        );
        // Trailing open span is closed at the end of the sentence.
        assert_eq!(
            bilou_to_spans(&tags("O B-ORG I-ORG")),
            vec![EntitySpan::new(1, 2, Org)]
        );
    }

    #[test]
    fn converts_between_schemes() {
        assert_eq!(
            bio_to_bilou(&tags("B-PER I-PER")).unwrap(),
            tags("B-PER L-PER")
        );
        assert_eq!(bio_to_bilou(&tags("B-LOC")).unwrap(), tags("U-LOC"));
        assert_eq!(bilou_to_bio(&tags("U-ORG")), tags("B-ORG"));
        assert_eq!(
            bilou_to_bio(&tags("B-PER I-PER L-PER O")),
            tags("B-PER I-PER I-PER O")
        );
        // Stray I starts a span; L in BIO input is rejected.
        assert_eq!(
            bio_to_bilou(&tags("O I-PER I-PER")).unwrap(),
            tags("O B-PER L-PER")
        );
        assert!(matches!(
            bio_to_bilou(&tags("L-PER")),
            Err(Error::InvalidLabel { .. })
        ));
    }

    #[test]
    fn bio_round_trip_is_identity() {
        for case in ["B-PER I-PER O B-LOC", "O", "B-ORG B-ORG I-ORG O"] {
            let bio = tags(case);
            assert_eq!(bilou_to_bio(&bio_to_bilou(&bio).unwrap()), bio);
        }
    }

    #[test]
    fn tag_order_matches_string_order() {
        let all = bilou_tags();
        let mut strings: Vec<&str> = all.iter().map(|t| t.as_str()).collect();
        let sorted = {
            let mut s = strings.clone();
            s.sort();
            s
        };
        assert_eq!(strings, sorted);
        strings.dedup();
        assert_eq!(strings.len(), 13);
        for t in all {
            assert_eq!(Tag::parse(t.as_str()), Some(t));
        }
        assert_eq!(Tag::parse("B-GPE"), None);
        assert_eq!(Tag::parse("X-PER"), None);
        assert_eq!(Tag::parse(""), None);
    }

    #[test]
    fn scheme_detection() {
        assert_eq!(TagScheme::detect(&tags("B-PER I-PER O")), TagScheme::Bio);
        assert_eq!(TagScheme::detect(&tags("O U-LOC")), TagScheme::Bilou);
        assert_eq!(TagScheme::Bio.tag_count(), 7);
        assert_eq!(TagScheme::Bilou.tag_count(), 13);
    }
}
