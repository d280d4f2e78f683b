use std::fmt::Write as _;
use std::str::FromStr;

use regex::Regex;

use super::{EvalReport, HarnessError, LABEL_ORDER};

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned table, one line per (set, label) row plus a total.
    pub fn to_text(&self) -> String {
        let set_w = self.rows.iter().map(|r| r.set.len()).max().unwrap_or(3).max(3);
        let label_w = LABEL_ORDER.iter().map(|l| l.len()).max().unwrap_or(0);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "backend={} m={} filter={} baseline={}",
            self.backend,
            self.options.m,
            self.options.filter,
            self.options.baseline.map(|b| format!("{b:?}").to_lowercase()).unwrap_or_else(|| "none".into())
        );
        let _ = writeln!(
            out,
            "{:<set_w$}  {:<label_w$}  {:>7}  {:>7}  {:>8}",
            "set", "label", "correct", "total", "accuracy"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<set_w$}  {:<label_w$}  {:>7}  {:>7}  {:>8.4}",
                r.set, r.label, r.counts.correct, r.counts.total, r.counts.accuracy
            );
        }
        let _ = writeln!(
            out,
            "{:<set_w$}  {:<label_w$}  {:>7}  {:>7}  {:>8.4}",
            "all", "", self.total.correct, self.total.total, self.total.accuracy
        );
        out
    }
}

/// Which rows an assertion applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypeFilter {
    All,
    /// Every belief row, true and false.
    Belief,
    Tb,
    Fb,
    Reality,
    Memory,
}

impl TypeFilter {
    pub fn matches(self, label: &str) -> bool {
        match self {
            TypeFilter::All => true,
            TypeFilter::Belief => label.ends_with(" TB") || label.ends_with(" FB"),
            TypeFilter::Tb => label.ends_with(" TB"),
            TypeFilter::Fb => label.ends_with(" FB"),
            TypeFilter::Reality => label == "Reality",
            TypeFilter::Memory => label == "Memory",
        }
    }
}

impl FromStr for TypeFilter {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "all" => TypeFilter::All,
            "belief" => TypeFilter::Belief,
            "tb" => TypeFilter::Tb,
            "fb" => TypeFilter::Fb,
            "reality" => TypeFilter::Reality,
            "memory" => TypeFilter::Memory,
            _ => return Err(HarnessError::BadAssertion(format!("unknown question type {s:?}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Ge,
    Gt,
    Le,
    Lt,
    Eq,
}

impl Comparison {
    fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Comparison::Ge => lhs >= rhs,
            Comparison::Gt => lhs > rhs,
            Comparison::Le => lhs <= rhs,
            Comparison::Lt => lhs < rhs,
            Comparison::Eq => (lhs - rhs).abs() < 1e-12,
        }
    }
}

/// `accuracy>=1.0`, checked against every matching row.
#[derive(Debug, Clone, PartialEq)]
pub struct Assertion {
    pub op: Comparison,
    pub value: f64,
    pub text: String,
}

pub fn parse_assertion(text: &str) -> Result<Assertion, HarnessError> {
    let re = Regex::new(r"^\s*accuracy\s*(>=|<=|==|>|<)\s*([0-9]*\.?[0-9]+)\s*$").expect("valid regex");
    let caps = re.captures(text).ok_or_else(|| HarnessError::BadAssertion(text.to_string()))?;
    let op = match &caps[1] {
        ">=" => Comparison::Ge,
        "<=" => Comparison::Le,
        "==" => Comparison::Eq,
        ">" => Comparison::Gt,
        _ => Comparison::Lt,
    };
    let value = caps[2].parse().map_err(|_| HarnessError::BadAssertion(text.to_string()))?;
    Ok(Assertion { op, value, text: text.trim().to_string() })
}

/// Returns one message per matching row that breaks the assertion. A filter
/// that matches no row is itself a violation.
pub fn check_assertions(report: &EvalReport, assertion: &Assertion, types: TypeFilter) -> Vec<String> {
    let rows: Vec<_> = report.rows.iter().filter(|r| types.matches(&r.label)).collect();
    if rows.is_empty() {
        return vec![format!("{}: no rows of type {types:?}", assertion.text)];
    }
    rows.into_iter()
        .filter(|r| !assertion.op.holds(r.counts.accuracy, assertion.value))
        .map(|r| format!("{}: {} {} has accuracy {:.4}", assertion.text, r.set, r.label, r.counts.accuracy))
        .collect()
}
