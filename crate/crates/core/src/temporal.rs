//! Coarse dating of entities from their descriptions, and classification of
//! entities and categories against a target period.

use std::collections::BTreeMap;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::kg::{CategoryTree, Iri};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TemporalConfig {
    /// Smallest year accepted as a date mention.
    pub min_year: i32,
    /// Largest year accepted as a date mention.
    pub max_year: i32,
    /// Share of years inside the period at which an entity is in-period.
    pub year_fraction: f64,
    /// Share of overlapping intervals at which an entity is in-period.
    pub interval_fraction: f64,
}

impl Default for TemporalConfig {
    fn default() -> Self {
        TemporalConfig { min_year: 100, max_year: 2100, year_fraction: 0.5, interval_fraction: 0.5 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemporalProfile {
    /// Sorted, deduplicated.
    pub years: Vec<i32>,
    /// Sorted, deduplicated, each with `start <= end`.
    pub intervals: Vec<(i32, i32)>,
}

impl TemporalProfile {
    pub fn is_undated(&self) -> bool {
        self.years.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Period {
    #[serde(default)]
    pub label: String,
    pub start_year: i32,
    pub end_year: i32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("period start {start_year} is after end {end_year}")]
pub struct InvalidPeriod {
    pub start_year: i32,
    pub end_year: i32,
}

impl Period {
    pub fn new(label: impl Into<String>, start_year: i32, end_year: i32) -> Result<Self, InvalidPeriod> {
        let p = Period { label: label.into(), start_year, end_year };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), InvalidPeriod> {
        if self.start_year > self.end_year {
            return Err(InvalidPeriod { start_year: self.start_year, end_year: self.end_year });
        }
        Ok(())
    }

    pub fn contains(&self, year: i32) -> bool {
        (self.start_year..=self.end_year).contains(&year)
    }

    pub fn overlaps(&self, (start, end): (i32, i32)) -> bool {
        start <= self.end_year && end >= self.start_year
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelevanceClass {
    InPeriod,
    OutOfPeriod,
    Borderline,
    Undated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PruneState {
    Included,
    Excluded,
}

static DIGIT_RUN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[0-9]+").unwrap());
const MONTH: &str = "(?:January|February|March|April|May|June|July|August|September|October|November|December|Jan|Feb|Mar|Apr|Jun|Jul|Aug|Sep|Sept|Oct|Nov|Dec)\\.?";

/// Text allowed between the two years of a range: the connector, then an
/// optional day and month belonging to the second year (`– 28 July `,
/// `to July 28, `).
static RANGE_GAP: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(r"^ ?(?:-|–|to) ?(?:(?:[0-9]{{1,2}} )?{MONTH} (?:[0-9]{{1,2}}, )?)?$")).unwrap()
});

/// Characters that glue digit runs into one larger number, as in `1,794`
/// or `12/1794`.
fn is_digit_joiner(c: char) -> bool {
    matches!(c, '.' | ',' | '/' | ':')
}

fn joined_to_digits(mut chars: impl Iterator<Item = char>) -> bool {
    matches!(
        (chars.next(), chars.next()),
        (Some(j), Some(d)) if is_digit_joiner(j) && d.is_ascii_digit()
    )
}

/// Pulls year mentions and year ranges out of free text.
///
/// A year is a standalone run of three or four ASCII digits inside the
/// configured window. Two consecutive years form an interval when they are
/// joined by `-`, `–` or `to` (at most one space either side, optionally
/// followed by the day and month of the second year) and the first is not
/// after the second.
pub fn extract_temporal_profile(text: &str, config: &TemporalConfig) -> TemporalProfile {
    let tokens: Vec<(usize, usize, i32)> = DIGIT_RUN
        .find_iter(text)
        .filter(|m| (3..=4).contains(&m.len()))
        .filter(|m| !joined_to_digits(text[..m.start()].chars().rev()) && !joined_to_digits(text[m.end()..].chars()))
        .filter_map(|m| {
            let year: i32 = m.as_str().parse().ok()?;
            (config.min_year..=config.max_year).contains(&year).then_some((m.start(), m.end(), year))
        })
        .collect();

    let mut intervals: Vec<(i32, i32)> = tokens
        .windows(2)
        .filter_map(|w| {
            let (_, end_a, a) = w[0];
            let (start_b, _, b) = w[1];
            (a <= b && RANGE_GAP.is_match(&text[end_a..start_b])).then_some((a, b))
        })
        .collect();
    intervals.sort_unstable();
    intervals.dedup();

    let mut years: Vec<i32> = tokens.into_iter().map(|(_, _, y)| y).collect();
    years.sort_unstable();
    years.dedup();
    TemporalProfile { years, intervals }
}

/// Places an entity relative to `period` using the share of its years in
/// the period, the share of its intervals overlapping the period, and
/// whether any year falls inside.
pub fn classify_entity(profile: &TemporalProfile, period: &Period, config: &TemporalConfig) -> RelevanceClass {
    if profile.years.is_empty() {
        return RelevanceClass::Undated;
    }
    let years_in = profile.years.iter().filter(|&&y| period.contains(y)).count();
    let overlapping = profile.intervals.iter().filter(|&&iv| period.overlaps(iv)).count();
    let year_fraction = years_in as f64 / profile.years.len() as f64;
    let interval_fraction =
        if profile.intervals.is_empty() { 0.0 } else { overlapping as f64 / profile.intervals.len() as f64 };
    if year_fraction >= config.year_fraction || interval_fraction >= config.interval_fraction {
        RelevanceClass::InPeriod
    } else if years_in > 0 || overlapping > 0 {
        RelevanceClass::Borderline
    } else {
        RelevanceClass::OutOfPeriod
    }
}

/// Default inclusion of each tree category. A category is excluded when
/// strictly more than half of its dated members are out of period.
/// Members missing from `classes` count as undated.
pub fn prune_categories(
    tree: &CategoryTree,
    members: &BTreeMap<Iri, Vec<Iri>>,
    classes: &BTreeMap<Iri, RelevanceClass>,
) -> BTreeMap<Iri, PruneState> {
    tree.categories()
        .map(|cat| {
            let mut dated = 0usize;
            let mut out = 0usize;
            for e in members.get(cat).map(Vec::as_slice).unwrap_or(&[]) {
                match classes.get(e).copied().unwrap_or(RelevanceClass::Undated) {
                    RelevanceClass::Undated => {}
                    RelevanceClass::OutOfPeriod => {
                        dated += 1;
                        out += 1;
                    }
                    RelevanceClass::InPeriod | RelevanceClass::Borderline => dated += 1,
                }
            }
            let state = if 2 * out > dated { PruneState::Excluded } else { PruneState::Included };
            (cat.clone(), state)
        })
        .collect()
}
