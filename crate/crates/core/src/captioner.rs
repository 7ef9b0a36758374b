//! Caption enrichment with pattern counts and geometry.
//!
//! A collective phrase such as "a group of" is replaced by "<count> similar";
//! without one, the count is inserted after the first "of" that precedes a
//! plural noun, or before a grounded noun. Translation-symmetry and
//! vanishing-point clauses are then appended.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::region::{box_union_area, BBox};
use crate::types::RecurringPattern;

pub const COLLECTIVE_NOUNS: [&str; 10] = [
    "group",
    "herd",
    "heard",
    "row",
    "series",
    "bunch",
    "flock",
    "pack",
    "set",
    "collection",
];

/// Minimum share of the pattern's instance union inside a grounding box.
pub const REGION_OVERLAP: f64 = 0.90;

/// Tokens after "of" searched for a plural noun.
const NOUN_LOOKAHEAD: usize = 3;

const IRREGULAR_PLURALS: [&str; 13] = [
    "men", "women", "children", "people", "geese", "mice", "teeth", "feet", "sheep", "fish", "deer", "oxen", "cattle",
];
const NOT_PLURAL: [&str; 12] = ["is", "was", "has", "this", "its", "as", "us", "yes", "his", "hers", "does", "gas"];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VpStatus {
    #[default]
    None,
    Inside,
    Outside,
}

/// A noun from the caption with the image box it was grounded to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NounRegion {
    pub noun: String,
    pub region: BBox,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaptionContext {
    pub base_caption: String,
    pub rp_count: usize,
    pub ts_detected: bool,
    pub vp_status: VpStatus,
    /// Grounded nouns the dominant pattern was assigned to.
    #[serde(default)]
    pub noun_regions: Option<Vec<NounRegion>>,
}

const ONES: [&str; 20] = [
    "zero",
    "one",
    "two",
    "three",
    "four",
    "five",
    "six",
    "seven",
    "eight",
    "nine",
    "ten",
    "eleven",
    "twelve",
    "thirteen",
    "fourteen",
    "fifteen",
    "sixteen",
    "seventeen",
    "eighteen",
    "nineteen",
];
const TENS: [&str; 10] = ["", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety"];

/// Lowercase English cardinal for 2..=99.
pub fn number_to_word(n: usize) -> Result<String> {
    if !(2..=99).contains(&n) {
        return Err(Error::OutOfRange {
            value: n as i64,
            min: 2,
            max: 99,
        });
    }
    Ok(match n {
        0..=19 => ONES[n].to_string(),
        _ if n.is_multiple_of(10) => TENS[n / 10].to_string(),
        _ => format!("{}-{}", TENS[n / 10], ONES[n % 10]),
    })
}

/// True when at least 90% of the pattern's instance union lies in `region`.
pub fn assign_rp_to_region(rp: &RecurringPattern, region: &BBox) -> bool {
    let boxes = rp.instance_boxes();
    let total = box_union_area(&boxes, None);
    if total <= 0.0 || region.area() <= 0.0 {
        return false;
    }
    box_union_area(&boxes, Some(region)) / total >= REGION_OVERLAP
}

/// Grounded nouns whose region holds the pattern.
pub fn grounded_nouns(rp: &RecurringPattern, regions: &[NounRegion]) -> Vec<NounRegion> {
    regions.iter().filter(|r| assign_rp_to_region(rp, &r.region)).cloned().collect()
}

fn bare(token: &str) -> String {
    token.trim_matches(|c: char| !c.is_alphanumeric() && c != '-').to_lowercase()
}

fn is_plural(token: &str) -> bool {
    let w = bare(token);
    if IRREGULAR_PLURALS.contains(&w.as_str()) {
        return true;
    }
    w.len() > 2 && w.ends_with('s') && !w.ends_with("ss") && !w.ends_with("us") && !NOT_PLURAL.contains(&w.as_str())
}

fn capitalize(word: &str) -> String {
    let mut c = word.chars();
    c.next()
        .map_or_else(String::new, |f| f.to_uppercase().collect::<String>() + c.as_str())
}

/// Position of the first `a|an <collective> of` (article optional) and its
/// token length.
fn find_collective(tokens: &[&str]) -> Option<(usize, usize)> {
    for i in 0..tokens.len() {
        let has_article = matches!(bare(tokens[i]).as_str(), "a" | "an");
        let noun_at = if has_article { i + 1 } else { i };
        if noun_at + 1 >= tokens.len() {
            continue;
        }
        if COLLECTIVE_NOUNS.contains(&bare(tokens[noun_at]).as_str()) && bare(tokens[noun_at + 1]) == "of" {
            return Some((i, noun_at + 2 - i));
        }
    }
    None
}

fn find_of_before_noun(tokens: &[&str]) -> Option<usize> {
    (0..tokens.len()).find(|&i| bare(tokens[i]) == "of" && tokens[i + 1..].iter().take(NOUN_LOOKAHEAD).any(|t| is_plural(t)))
}

fn find_grounded(tokens: &[&str], nouns: &[NounRegion]) -> Option<usize> {
    nouns.iter().find_map(|n| {
        let target = n.noun.to_lowercase();
        tokens.iter().position(|t| bare(t) == target)
    })
}

/// Noun for the appended clauses: the first plural-looking token after
/// `start`, else the token at `start`.
fn subject_noun(tokens: &[String], start: usize) -> Option<String> {
    tokens[start..]
        .iter()
        .find(|t| is_plural(t))
        .or_else(|| tokens.get(start))
        .map(|t| bare(t))
}

fn count_phrase_at(tokens: &[&str], count_word: &str) -> Option<usize> {
    (0..tokens.len().saturating_sub(1)).find(|&i| bare(tokens[i]) == count_word && bare(tokens[i + 1]) == "similar")
}

fn ts_clause(noun: &str) -> String {
    format!("The {noun} have a potential translation symmetry in 3D")
}

fn vp_clause(status: VpStatus) -> Option<&'static str> {
    match status {
        VpStatus::None => None,
        VpStatus::Inside => Some("form a vanishing point inside of the image"),
        VpStatus::Outside => Some("form a vanishing point outside of the image"),
    }
}

/// Enriches a caption with the dominant pattern's count and, when flagged,
/// translation-symmetry and vanishing-point clauses. Applying it twice with
/// the same context changes nothing.
pub fn enhance_caption(ctx: &CaptionContext) -> Result<String> {
    let base = ctx.base_caption.trim();
    if base.is_empty() {
        return Err(Error::NoInsertionPoint("empty caption".into()));
    }
    let count_word = number_to_word(ctx.rp_count)?;
    let raw: Vec<&str> = base.split_whitespace().collect();

    let (tokens, noun_start): (Vec<String>, usize) = if let Some(at) = count_phrase_at(&raw, &count_word) {
        (raw.iter().map(|s| s.to_string()).collect(), at + 2)
    } else if let Some((at, len)) = find_collective(&raw) {
        let word = if at == 0 { capitalize(&count_word) } else { count_word.clone() };
        let mut t: Vec<String> = raw[..at].iter().map(|s| s.to_string()).collect();
        t.push(word);
        t.push("similar".into());
        t.extend(raw[at + len..].iter().map(|s| s.to_string()));
        (t, at + 2)
    } else {
        let at = match find_of_before_noun(&raw) {
            Some(of) => of + 1,
            None => ctx
                .noun_regions
                .as_deref()
                .and_then(|n| find_grounded(&raw, n))
                .ok_or_else(|| Error::NoInsertionPoint(base.to_string()))?,
        };
        let word = if at == 0 { capitalize(&count_word) } else { count_word.clone() };
        let mut t: Vec<String> = raw[..at].iter().map(|s| s.to_string()).collect();
        t.push(word);
        t.push("similar".into());
        t.extend(raw[at..].iter().map(|s| s.to_string()));
        (t, at + 2)
    };

    let noun = subject_noun(&tokens, noun_start).ok_or_else(|| Error::NoInsertionPoint(base.to_string()))?;
    let mut text = tokens.join(" ");
    let ts = ts_clause(&noun);
    let vp = vp_clause(ctx.vp_status);
    let has_ts = text.contains(&ts);
    let has_vp = vp.is_some_and(|v| text.contains(v));
    let addition = match (ctx.ts_detected && !has_ts, vp.filter(|_| !has_vp)) {
        (true, Some(v)) => Some(format!("{ts} and {v}.")),
        (true, None) => Some(format!("{ts}.")),
        (false, Some(v)) if has_ts => {
            text = text.replacen(&format!("{ts}."), &format!("{ts} and {v}."), 1);
            None
        }
        (false, Some(v)) => Some(format!("The {noun} {v}.")),
        (false, None) => None,
    };
    if let Some(add) = addition {
        if !text.ends_with(['.', '!', '?']) {
            text.push('.');
        }
        text.push(' ');
        text.push_str(&add);
    }
    Ok(text)
}
