//! Deterministic backend for the closed story grammar.
//!
//! Contradiction is decided by three exclusivity axioms:
//! a subject has one location, an exit removes the matching location, and
//! an opinion is only contradicted by its opposite about the same pair.

use std::sync::OnceLock;

use regex::Regex;

use super::{Polarity, ResultingState, SemanticBackend, SemanticsError, TemplateBank};
use crate::domain::{Primitive, PrimitiveKind, Relation, RelationClass, Triple, HATES, IS_IN, LIKES};

/// Words stripped from the edges of extracted entity names.
pub const STOPWORDS: &[&str] = &["the", "a", "an", "to", "in", "into", "from"];

/// Removes leading and trailing stopwords, case-insensitively.
pub fn strip_stopwords(phrase: &str) -> String {
    let words: Vec<&str> = phrase.split_whitespace().collect();
    let is_stop = |w: &&str| STOPWORDS.iter().any(|s| s.eq_ignore_ascii_case(w));
    let start = words.iter().position(|w| !is_stop(w)).unwrap_or(words.len());
    let end = words.iter().rposition(|w| !is_stop(w)).map_or(start, |e| e + 1);
    words[start..end].join(" ")
}

fn statement_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(&format!(r"^(?P<s>.+?) (?P<r>{IS_IN}|{LIKES}|{HATES}) (?P<o>.+?)\.?$")).expect("valid regex")
    })
}

fn negation_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^(?P<s>.+?) is no longer in (?P<o>.+?)\.?$").expect("valid regex"))
}

/// Reads a `(subject, relation, object)` triple out of a positive statement.
pub fn extract_triple(statement: &str) -> Result<Triple, SemanticsError> {
    let fail = || SemanticsError::ExtractionFailure(statement.to_string());
    let caps = statement_re().captures(statement.trim()).ok_or_else(fail)?;
    let subject = strip_stopwords(&caps["s"]);
    let object = strip_stopwords(&caps["o"]);
    let relation = Relation::from_label(&caps["r"]).ok_or_else(fail)?;
    if subject.is_empty() || object.is_empty() || subject == object {
        return Err(fail());
    }
    Ok(Triple::new(subject, relation, object))
}

/// The rule backend needs the template bank to read context sentences
/// when answering.
#[derive(Debug, Clone)]
pub struct RuleBackend {
    bank: TemplateBank,
}

impl Default for RuleBackend {
    fn default() -> Self {
        RuleBackend::new(TemplateBank::shipped())
    }
}

impl RuleBackend {
    pub fn new(bank: TemplateBank) -> Self {
        RuleBackend { bank }
    }

    pub fn bank(&self) -> &TemplateBank {
        &self.bank
    }

    /// Resulting state of a parsed primitive.
    pub fn state_of(kind: &PrimitiveKind, index: usize, raw: &str) -> Result<ResultingState, SemanticsError> {
        Ok(match kind {
            PrimitiveKind::Enter { character, room } | PrimitiveKind::PersonLocation { character, room } => {
                ResultingState::positive(format!("{character} is in the {room}"), Triple::located(character, room))
            }
            PrimitiveKind::Exit { character, room } => {
                ResultingState::negative(format!("{character} is no longer in the {room}"))
            }
            PrimitiveKind::ObjectLocation { thing, location } => {
                ResultingState::positive(format!("The {thing} is in the {location}"), Triple::located(thing, location))
            }
            PrimitiveKind::Move { object, container, .. } => ResultingState::positive(
                format!("The {object} is in the {container}"),
                Triple::located(object, container),
            ),
            PrimitiveKind::Opinion { character, object, sentiment } => ResultingState::positive(
                format!("{character} {} the {object}", sentiment.label()),
                Triple::new(character, Relation::opinion(*sentiment), object),
            ),
            PrimitiveKind::Unparsed => {
                return Err(SemanticsError::UnparsedSentence { index, text: raw.to_string() });
            }
        })
    }
}

impl SemanticBackend for RuleBackend {
    fn name(&self) -> &str {
        "rule"
    }

    fn resulting_state(&self, sentence: &Primitive) -> Result<ResultingState, SemanticsError> {
        Self::state_of(&sentence.kind, sentence.index, &sentence.raw_text)
    }

    fn contradicts(&self, state: &ResultingState, edge: &Triple) -> Result<bool, SemanticsError> {
        match state.polarity {
            Polarity::Positive => {
                let fact = match &state.triple {
                    Some(t) => t.clone(),
                    None => extract_triple(&state.statement)?,
                };
                Ok(match (fact.relation.class, edge.relation.class) {
                    (RelationClass::Spatial, RelationClass::Spatial) => {
                        fact.subject == edge.subject && fact.object != edge.object
                    }
                    (RelationClass::Opinion, RelationClass::Opinion) => {
                        fact.subject == edge.subject
                            && fact.object == edge.object
                            && fact.relation.label != edge.relation.label
                    }
                    _ => false,
                })
            }
            Polarity::Negative => {
                let caps = negation_re()
                    .captures(state.statement.trim())
                    .ok_or_else(|| SemanticsError::ExtractionFailure(state.statement.clone()))?;
                Ok(edge.is_spatial()
                    && edge.subject == strip_stopwords(&caps["s"])
                    && edge.object == strip_stopwords(&caps["o"]))
            }
        }
    }

    fn answer(&self, context: &[String], _question: &str, target: &str) -> Result<Option<String>, SemanticsError> {
        let mut found = None;
        for (i, text) in context.iter().enumerate() {
            let p = self.bank.parse(text, i)?;
            let state = self.resulting_state(&p)?;
            if let Some(t) = state.triple {
                if t.is_spatial() && t.subject == target {
                    found = Some(t.object);
                }
            }
        }
        Ok(found)
    }
}
