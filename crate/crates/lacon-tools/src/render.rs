//! Text and JSON-lines rendering of reports.

use std::fmt::Write as _;
use std::str::FromStr;

use lacon_core::logic::types::AtomicFact;
use lacon_core::logic::RankType;
use lacon_core::report::{Check, Metric, Report};
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    JsonLines,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(Format::Text),
            "json" | "json-lines" | "jsonl" => Ok(Format::JsonLines),
            other => Err(format!("unknown format `{other}` (expected text or json-lines)")),
        }
    }
}

fn metric_text(m: &Metric) -> String {
    match m {
        Metric::Int(v) => v.to_string(),
        Metric::Float(v) => format!("{v:.6}"),
        Metric::Text(s) => s.replace(char::is_whitespace, "_"),
    }
}

fn metric_json(m: &Metric) -> Value {
    match m {
        Metric::Int(v) => json!(v),
        Metric::Float(v) => serde_json::Number::from_f64((v * 1e6).round() / 1e6).map_or(Value::Null, Value::Number),
        Metric::Text(s) => json!(s),
    }
}

/// One line per check; failing checks list their witnesses on indented
/// lines in text form.
pub fn render_check(c: &Check, format: Format) -> String {
    match format {
        Format::Text => {
            let mut line = format!("{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name);
            for (k, v) in &c.metrics {
                let _ = write!(line, " {k}={}", metric_text(v));
            }
            line.push('\n');
            for w in &c.witnesses {
                let _ = writeln!(line, "  witness: {w}");
            }
            if c.violations > c.witnesses.len() {
                let _ = writeln!(line, "  ... {} more", c.violations - c.witnesses.len());
            }
            line
        }
        Format::JsonLines => {
            let metrics: Map<String, Value> = c.metrics.iter().map(|(k, v)| (k.clone(), metric_json(v))).collect();
            let value = json!({
                "name": c.name,
                "status": if c.passed { "pass" } else { "fail" },
                "witness": c.witnesses.first(),
                "violations": c.violations,
                "metrics": metrics,
            });
            format!("{value}\n")
        }
    }
}

pub fn render_report(report: &Report, format: Format) -> String {
    report.checks.iter().map(|c| render_check(c, format)).collect()
}

/// Logged events such as type-rank escalations, one per line.
pub fn render_events(events: &[String], format: Format) -> String {
    events
        .iter()
        .map(|e| match format {
            Format::Text => format!("EVENT {e}\n"),
            Format::JsonLines => format!("{}\n", json!({ "event": e })),
        })
        .collect()
}

fn fact_text(f: &AtomicFact) -> String {
    match f {
        AtomicFact::Label(i, l) => format!("(label {l} #{i})"),
        AtomicFact::Equal(i, j) => format!("(= #{i} #{j})"),
        AtomicFact::Edge(i, j) => format!("(edge #{i} #{j})"),
        AtomicFact::Sim(i, j) => format!("(sim #{i} #{j})"),
    }
}

/// Indented tree: atomic facts at rank zero, then the base type and the
/// distinct one-vertex extensions.
pub fn render_type(t: &RankType) -> String {
    fn go(t: &RankType, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        let facts: Vec<String> = t.atomic_facts.iter().map(fact_text).collect();
        let _ = writeln!(out, "{pad}rank {} arity {} facts [{}]", t.rank, t.arity, facts.join(" "));
        if let Some(base) = &t.base {
            let _ = writeln!(out, "{pad}base:");
            go(base, depth + 1, out);
        }
        if !t.extensions.is_empty() {
            let _ = writeln!(out, "{pad}extensions: {}", t.extensions.len());
            for e in &t.extensions {
                go(e, depth + 1, out);
            }
        }
    }
    let mut out = String::new();
    go(t, 0, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut report = Report::new();
        report.push(Check::new("good").with_metric("cases", 3usize).with_metric("ratio", 0.5));
        let mut bad = Check::new("bad");
        bad.fail("a-b".into());
        report.push(bad);
        report
    }

    #[test]
    fn text_lines() {
        let text = render_report(&sample(), Format::Text);
        assert_eq!(text, "PASS good cases=3 ratio=0.500000\nFAIL bad\n  witness: a-b\n");
    }

    #[test]
    fn json_lines() {
        let text = render_report(&sample(), Format::JsonLines);
        let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(lines[0]["status"], "pass");
        assert_eq!(lines[0]["witness"], Value::Null);
        assert_eq!(lines[0]["metrics"]["cases"], 3);
        assert_eq!(lines[1]["witness"], "a-b");
        assert_eq!(lines[1]["status"], "fail");
    }

    #[test]
    fn formats_parse() {
        assert_eq!("text".parse(), Ok(Format::Text));
        assert_eq!("json-lines".parse(), Ok(Format::JsonLines));
        assert!("xml".parse::<Format>().is_err());
    }
}
