//! Sentence templates: the closed grammar the rule backend parses and the
//! generators render.
//!
//! A template is literal text with placeholder slots (`PersonX`, `RoomY`,
//! `Object1`, `Container1`). Parsing tries every template and keeps the
//! match with the most literal text; a tie between different readings is
//! reported as ambiguous.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use regex::{Regex, RegexSet};

use super::SemanticsError;
use crate::domain::{Primitive, PrimitiveKind, SentenceParser, Sentiment};

/// Shipped template file.
pub const DEFAULT_BANK: &str = include_str!("../../data/paraphrases.txt");

const PERSON_SLOT: &str = "PersonX";
const ROOM_SLOT: &str = "RoomY";
const OBJECT_SLOT: &str = "Object1";
const CONTAINER_SLOT: &str = "Container1";

const PERSON_RE: &str = "([A-Z][A-Za-z]*)";
const THING_RE: &str = "([a-z][A-Za-z0-9]*(?: [a-z][A-Za-z0-9]*)*)";

/// Capitalized words that begin sentences but are never character names.
const NOT_A_NAME: &[&str] = &["The", "There", "Inside", "A", "An"];
/// Words a thing slot may not start with.
const DETERMINERS: &[&str] = &["the", "a", "an"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TemplateTag {
    Enter,
    Exit,
    ObjectPosition,
    Move,
    PersonPosition,
    OpinionPositive,
    OpinionNegative,
}

impl TemplateTag {
    pub const ALL: [TemplateTag; 7] = [
        TemplateTag::Enter,
        TemplateTag::Exit,
        TemplateTag::ObjectPosition,
        TemplateTag::Move,
        TemplateTag::PersonPosition,
        TemplateTag::OpinionPositive,
        TemplateTag::OpinionNegative,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TemplateTag::Enter => "enter",
            TemplateTag::Exit => "exit",
            TemplateTag::ObjectPosition => "object_position",
            TemplateTag::Move => "move",
            TemplateTag::PersonPosition => "person_position",
            TemplateTag::OpinionPositive => "opinion_positive",
            TemplateTag::OpinionNegative => "opinion_negative",
        }
    }

    pub fn of(kind: &PrimitiveKind) -> Option<TemplateTag> {
        Some(match kind {
            PrimitiveKind::Enter { .. } => TemplateTag::Enter,
            PrimitiveKind::Exit { .. } => TemplateTag::Exit,
            PrimitiveKind::ObjectLocation { .. } => TemplateTag::ObjectPosition,
            PrimitiveKind::Move { .. } => TemplateTag::Move,
            PrimitiveKind::PersonLocation { .. } => TemplateTag::PersonPosition,
            PrimitiveKind::Opinion { sentiment: Sentiment::Likes, .. } => TemplateTag::OpinionPositive,
            PrimitiveKind::Opinion { sentiment: Sentiment::Hates, .. } => TemplateTag::OpinionNegative,
            PrimitiveKind::Unparsed => return None,
        })
    }
}

impl fmt::Display for TemplateTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TemplateTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TemplateTag::ALL.into_iter().find(|t| t.as_str() == s).ok_or_else(|| format!("unknown template tag {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Person,
    Room,
    Object,
    Container,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Segment {
    Literal(String),
    Slot(Slot),
}

#[derive(Debug, Clone)]
pub struct Template {
    tag: TemplateTag,
    text: String,
    segments: Vec<Segment>,
    literal_len: usize,
    regex: Regex,
    slots: Vec<Slot>,
}

impl Template {
    pub fn new(tag: TemplateTag, text: &str) -> Result<Self, SemanticsError> {
        let segments = split_segments(text);
        let slots: Vec<Slot> = segments
            .iter()
            .filter_map(|s| match s {
                Segment::Slot(slot) => Some(*slot),
                Segment::Literal(_) => None,
            })
            .collect();
        let expected = required_slots(tag);
        let mut sorted = slots.clone();
        sorted.sort_by_key(|s| *s as u8);
        sorted.dedup();
        if sorted != expected || sorted.len() != slots.len() {
            return Err(SemanticsError::InvalidTemplate(format!("{tag}: {text:?} has slots {slots:?}")));
        }
        let mut pattern = String::from("^");
        let mut literal_len = 0;
        let last = segments.len() - 1;
        for (i, seg) in segments.iter().enumerate() {
            match seg {
                Segment::Literal(l) => {
                    // the final period is optional when parsing
                    let l = if i == last { l.strip_suffix('.').unwrap_or(l) } else { l.as_str() };
                    literal_len += l.len();
                    pattern.push_str(&regex::escape(l));
                }
                Segment::Slot(Slot::Person) => pattern.push_str(PERSON_RE),
                Segment::Slot(_) => pattern.push_str(THING_RE),
            }
        }
        pattern.push_str(r"\.?$");
        let regex = Regex::new(&pattern).map_err(|e| SemanticsError::InvalidTemplate(e.to_string()))?;
        Ok(Template { tag, text: text.to_string(), segments, literal_len, regex, slots })
    }

    pub fn tag(&self) -> TemplateTag {
        self.tag
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// Fills the slots from `kind`; `None` if the kind does not belong to
    /// this template's tag.
    pub fn render(&self, kind: &PrimitiveKind) -> Option<String> {
        if TemplateTag::of(kind)? != self.tag {
            return None;
        }
        let (person, room, object, container) = slot_values(kind);
        let mut out = String::new();
        for seg in &self.segments {
            match seg {
                Segment::Literal(l) => out.push_str(l),
                Segment::Slot(Slot::Person) => out.push_str(person?),
                Segment::Slot(Slot::Room) => out.push_str(room?),
                Segment::Slot(Slot::Object) => out.push_str(object?),
                Segment::Slot(Slot::Container) => out.push_str(container?),
            }
        }
        Some(out)
    }

    fn matches(&self, text: &str) -> Option<PrimitiveKind> {
        let caps = self.regex.captures(text)?;
        let mut person = None;
        let mut room = None;
        let mut object = None;
        let mut container = None;
        for (i, slot) in self.slots.iter().enumerate() {
            let value = caps.get(i + 1)?.as_str();
            match slot {
                Slot::Person => {
                    if NOT_A_NAME.contains(&value) {
                        return None;
                    }
                    person = Some(value.to_string());
                }
                _ => {
                    let first = value.split(' ').next().unwrap_or_default();
                    if DETERMINERS.contains(&first) {
                        return None;
                    }
                    match slot {
                        Slot::Room => room = Some(value.to_string()),
                        Slot::Object => object = Some(value.to_string()),
                        Slot::Container => container = Some(value.to_string()),
                        Slot::Person => unreachable!(),
                    }
                }
            }
        }
        Some(match self.tag {
            TemplateTag::Enter => PrimitiveKind::Enter { character: person?, room: room? },
            TemplateTag::Exit => PrimitiveKind::Exit { character: person?, room: room? },
            TemplateTag::PersonPosition => PrimitiveKind::PersonLocation { character: person?, room: room? },
            TemplateTag::ObjectPosition => PrimitiveKind::ObjectLocation { thing: object?, location: container? },
            TemplateTag::Move => PrimitiveKind::Move { character: person?, object: object?, container: container? },
            TemplateTag::OpinionPositive => {
                PrimitiveKind::Opinion { character: person?, object: object?, sentiment: Sentiment::Likes }
            }
            TemplateTag::OpinionNegative => {
                PrimitiveKind::Opinion { character: person?, object: object?, sentiment: Sentiment::Hates }
            }
        })
    }
}

fn required_slots(tag: TemplateTag) -> Vec<Slot> {
    match tag {
        TemplateTag::Enter | TemplateTag::Exit | TemplateTag::PersonPosition => vec![Slot::Person, Slot::Room],
        TemplateTag::ObjectPosition => vec![Slot::Object, Slot::Container],
        TemplateTag::Move => vec![Slot::Person, Slot::Object, Slot::Container],
        TemplateTag::OpinionPositive | TemplateTag::OpinionNegative => vec![Slot::Person, Slot::Object],
    }
}

/// `(person, room, object, container)` slot fillers for a primitive.
fn slot_values(kind: &PrimitiveKind) -> (Option<&str>, Option<&str>, Option<&str>, Option<&str>) {
    match kind {
        PrimitiveKind::Enter { character, room }
        | PrimitiveKind::Exit { character, room }
        | PrimitiveKind::PersonLocation { character, room } => (Some(character), Some(room), None, None),
        PrimitiveKind::ObjectLocation { thing, location } => (None, None, Some(thing), Some(location)),
        PrimitiveKind::Move { character, object, container } => (Some(character), None, Some(object), Some(container)),
        PrimitiveKind::Opinion { character, object, .. } => (Some(character), None, Some(object), None),
        PrimitiveKind::Unparsed => (None, None, None, None),
    }
}

fn split_segments(text: &str) -> Vec<Segment> {
    let slots = [
        (PERSON_SLOT, Slot::Person),
        (ROOM_SLOT, Slot::Room),
        (OBJECT_SLOT, Slot::Object),
        (CONTAINER_SLOT, Slot::Container),
    ];
    let mut out = Vec::new();
    let mut rest = text;
    loop {
        let next = slots
            .iter()
            .filter_map(|(name, slot)| rest.find(name).map(|pos| (pos, *name, *slot)))
            .min_by_key(|(pos, _, _)| *pos);
        match next {
            Some((pos, name, slot)) => {
                if pos > 0 {
                    out.push(Segment::Literal(rest[..pos].to_string()));
                }
                out.push(Segment::Slot(slot));
                rest = &rest[pos + name.len()..];
            }
            None => {
                if !rest.is_empty() {
                    out.push(Segment::Literal(rest.to_string()));
                }
                return out;
            }
        }
    }
}

enum Role {
    Canonical,
    Paraphrase,
    Alias,
}

/// Canonical phrasing plus paraphrase pool for every primitive type.
#[derive(Debug, Clone)]
pub struct TemplateBank {
    canonical: BTreeMap<TemplateTag, Template>,
    paraphrases: BTreeMap<TemplateTag, Vec<Template>>,
    /// Accepted by the parser but never rendered.
    aliases: Vec<Template>,
    /// Distinct templates, used for parsing.
    parse_order: Vec<Template>,
    prefilter: RegexSet,
}

impl TemplateBank {
    /// Loads the bank shipped with the crate.
    pub fn shipped() -> Self {
        static BANK: std::sync::OnceLock<TemplateBank> = std::sync::OnceLock::new();
        BANK.get_or_init(|| Self::from_text(DEFAULT_BANK).expect("shipped template bank is valid")).clone()
    }

    pub fn from_file(path: &Path) -> Result<Self, SemanticsError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SemanticsError::InvalidTemplate(format!("{}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    /// Parses the `<tag>\t<template>` format. A `=` before the tag marks
    /// the canonical phrasing, a `+` a parse-only alias.
    pub fn from_text(text: &str) -> Result<Self, SemanticsError> {
        let mut canonical = BTreeMap::new();
        let mut paraphrases: BTreeMap<TemplateTag, Vec<Template>> = BTreeMap::new();
        let mut aliases = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (tag, template) = line.split_once('\t').ok_or_else(|| {
                SemanticsError::InvalidTemplate(format!("line {}: expected <tag>\\t<template>", lineno + 1))
            })?;
            let (role, tag) = match (tag.strip_prefix('='), tag.strip_prefix('+')) {
                (Some(t), _) => (Role::Canonical, t),
                (_, Some(t)) => (Role::Alias, t),
                _ => (Role::Paraphrase, tag),
            };
            let tag: TemplateTag =
                tag.parse().map_err(|e| SemanticsError::InvalidTemplate(format!("line {}: {e}", lineno + 1)))?;
            let template = Template::new(tag, template.trim())?;
            match role {
                Role::Canonical => {
                    if canonical.insert(tag, template).is_some() {
                        return Err(SemanticsError::InvalidTemplate(format!("duplicate canonical template for {tag}")));
                    }
                }
                Role::Paraphrase => paraphrases.entry(tag).or_default().push(template),
                Role::Alias => aliases.push(template),
            }
        }
        for tag in TemplateTag::ALL {
            if !canonical.contains_key(&tag) {
                return Err(SemanticsError::InvalidTemplate(format!("no canonical template for {tag}")));
            }
            if paraphrases.get(&tag).is_none_or(|p| p.is_empty()) {
                paraphrases.insert(tag, vec![canonical[&tag].clone()]);
            }
        }
        Self::assemble(canonical, paraphrases, aliases)
    }

    /// A bank whose paraphrase pools contain only the canonical phrasing.
    pub fn canonical_only(&self) -> Self {
        let paraphrases = self.canonical.iter().map(|(t, c)| (*t, vec![c.clone()])).collect();
        Self::assemble(self.canonical.clone(), paraphrases, self.aliases.clone())
            .expect("subset of a valid bank is valid")
    }

    fn assemble(
        canonical: BTreeMap<TemplateTag, Template>,
        paraphrases: BTreeMap<TemplateTag, Vec<Template>>,
        aliases: Vec<Template>,
    ) -> Result<Self, SemanticsError> {
        let mut parse_order: Vec<Template> = Vec::new();
        for t in canonical.values().chain(paraphrases.values().flatten()).chain(&aliases) {
            if !parse_order.iter().any(|p| p.tag == t.tag && p.text == t.text) {
                parse_order.push(t.clone());
            }
        }
        parse_order.sort_by_key(|t| std::cmp::Reverse(t.literal_len));
        let prefilter = RegexSet::new(parse_order.iter().map(|t| t.regex.as_str()))
            .map_err(|e| SemanticsError::InvalidTemplate(e.to_string()))?;
        Ok(TemplateBank { canonical, paraphrases, aliases, parse_order, prefilter })
    }

    pub fn canonical(&self, tag: TemplateTag) -> &Template {
        &self.canonical[&tag]
    }

    pub fn paraphrases(&self, tag: TemplateTag) -> &[Template] {
        &self.paraphrases[&tag]
    }

    /// Every distinct template known to the parser.
    pub fn templates(&self) -> &[Template] {
        &self.parse_order
    }

    /// Renders with the canonical phrasing.
    pub fn render_canonical(&self, kind: &PrimitiveKind) -> Option<String> {
        self.canonical.get(&TemplateTag::of(kind)?)?.render(kind)
    }

    /// Parses one sentence. Unmatched text yields [`PrimitiveKind::Unparsed`].
    pub fn parse(&self, text: &str, index: usize) -> Result<Primitive, SemanticsError> {
        let trimmed = text.trim();
        let mut best: Option<(usize, PrimitiveKind, &Template)> = None;
        for i in self.prefilter.matches(trimmed).iter() {
            let template = &self.parse_order[i];
            if let Some((len, _, _)) = &best {
                if template.literal_len < *len {
                    // parse_order is sorted by literal length
                    break;
                }
            }
            let Some(kind) = template.matches(trimmed) else { continue };
            match &best {
                None => best = Some((template.literal_len, kind, template)),
                Some((len, other, other_t)) if *len == template.literal_len && *other != kind => {
                    return Err(SemanticsError::AmbiguousParse {
                        sentence: text.to_string(),
                        first: other_t.text.clone(),
                        second: template.text.clone(),
                    });
                }
                Some(_) => {}
            }
        }
        let kind = best.map(|(_, k, _)| k).unwrap_or(PrimitiveKind::Unparsed);
        Ok(Primitive { kind, raw_text: text.to_string(), index })
    }
}

impl SentenceParser for TemplateBank {
    fn parse_sentence(&self, text: &str, index: usize) -> Result<Primitive, String> {
        self.parse(text, index).map_err(|e| e.to_string())
    }
}
