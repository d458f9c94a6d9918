//! Final-answer extraction and substring scoring.
//!
//! Extraction tries, in order: the text after the last answer marker, the
//! last line mentioning a keyword, then the whole output. Matching is a
//! case-insensitive substring test after direction synonyms are normalized,
//! so "I will move upward" matches the gold "up". That leniency is inherent to
//! substring scoring and is kept on purpose.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::grid::Direction;

pub const ANSWER_MARKERS: [&str; 3] = ["answer is", "answer:", "final answer"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractionRule {
    Marker,
    KeywordLine,
    WholeOutput,
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extraction {
    pub text: String,
    /// Byte offset in the raw output where the answer region starts.
    pub start: usize,
    pub rule: ExtractionRule,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerJudgment {
    pub extracted_answer: String,
    pub rule: ExtractionRule,
    pub correct: bool,
}

fn direction_synonyms() -> &'static [(Regex, &'static str); 4] {
    static RE: OnceLock<[(Regex, &'static str); 4]> = OnceLock::new();
    RE.get_or_init(|| {
        let re = |alts: &str| Regex::new(&format!(r"(?i)\b(?:{alts})\b")).unwrap();
        [
            (re("upwards?|north|up"), "up"),
            (re("downwards?|south|down"), "down"),
            (re("leftwards?|west|left"), "left"),
            (re("rightwards?|east|right"), "right"),
        ]
    })
}

fn direction_word() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\b(up|down|left|right)\b").unwrap())
}

/// Lower-case and rewrite direction synonyms and arrows to up/down/left/right.
pub fn normalize_directions(text: &str) -> String {
    let mut s = text
        .replace(['↑', '⬆'], " up ")
        .replace(['↓', '⬇'], " down ")
        .replace(['←', '⬅'], " left ")
        .replace(['→', '➡'], " right ");
    for (re, canon) in direction_synonyms() {
        s = re.replace_all(&s, *canon).into_owned();
    }
    s.to_lowercase()
}

/// Directions mentioned in `text`, in order.
pub fn parse_directions(text: &str) -> Vec<Direction> {
    let norm = normalize_directions(text);
    direction_word()
        .find_iter(&norm)
        .filter_map(|m| m.as_str().parse().ok())
        .collect()
}

fn marker_patterns() -> &'static Vec<Regex> {
    static RE: OnceLock<Vec<Regex>> = OnceLock::new();
    RE.get_or_init(|| {
        ANSWER_MARKERS
            .iter()
            .map(|m| Regex::new(&format!("(?i){}", regex::escape(m))).unwrap())
            .collect()
    })
}

fn find_last_marker(raw: &str) -> Option<(usize, usize)> {
    marker_patterns()
        .iter()
        .filter_map(|re| re.find_iter(raw).last().map(|m| (m.start(), m.end())))
        .max()
}

/// Locate the final answer in `raw`. `keywords` feed the keyword-line rule.
pub fn extract_answer(raw: &str, keywords: &[&str]) -> Extraction {
    if raw.trim().is_empty() {
        return Extraction {
            text: String::new(),
            start: raw.len(),
            rule: ExtractionRule::Empty,
        };
    }
    if let Some((start, end)) = find_last_marker(raw) {
        let rest = &raw[end..];
        let line_end = rest.find('\n').unwrap_or(rest.len());
        let same_line = clean(&rest[..line_end]);
        let text = if same_line.is_empty() {
            rest[line_end..]
                .trim_start_matches(['\n', '\r'])
                .split('\n')
                .take_while(|l| !l.trim().is_empty())
                .map(clean)
                .collect::<Vec<_>>()
                .join("\n")
        } else {
            same_line
        };
        log::debug!("answer extracted by marker rule");
        return Extraction {
            text,
            start,
            rule: ExtractionRule::Marker,
        };
    }
    let mut starts = vec![0];
    starts.extend(raw.match_indices('\n').map(|(i, _)| i + 1));
    for &start in starts.iter().rev() {
        let line = raw[start..].split('\n').next().unwrap_or("");
        let l = normalize_directions(line);
        let hit = keywords
            .iter()
            .any(|k| !k.is_empty() && l.contains(&normalize_directions(k)))
            || direction_word().is_match(&l)
            || l.contains("option");
        if hit {
            log::debug!("answer extracted by keyword-line rule");
            return Extraction {
                text: clean(line),
                start,
                rule: ExtractionRule::KeywordLine,
            };
        }
    }
    log::debug!("answer extracted by whole-output rule");
    Extraction {
        text: raw.trim().to_string(),
        start: 0,
        rule: ExtractionRule::WholeOutput,
    }
}

fn clean(s: &str) -> String {
    s.trim_matches(|c: char| c.is_whitespace() || matches!(c, ':' | '*' | '`' | '"' | '#'))
        .to_string()
}

/// Case-insensitive substring match after direction normalization.
pub fn matches_gold(answer: &str, gold: &str) -> bool {
    let gold = normalize_directions(gold.trim());
    !gold.is_empty() && normalize_directions(answer).contains(&gold)
}

pub fn score_answer(raw: &str, gold: &str) -> AnswerJudgment {
    score_answer_with(raw, gold, &[gold])
}

pub fn score_answer_with(raw: &str, gold: &str, keywords: &[&str]) -> AnswerJudgment {
    let ex = extract_answer(raw, keywords);
    AnswerJudgment {
        correct: matches_gold(&ex.text, gold),
        extracted_answer: ex.text,
        rule: ex.rule,
    }
}
