//! Lexicon sentiment scoring.
//!
//! A post is scored as follows:
//!
//! 1. Tokenize: lowercase, drop apostrophes, split on anything that is not
//!    alphanumeric. `!` characters are counted separately.
//! 2. Each token contributes its lexicon valence (unknown tokens give 0).
//!    A negator among the 3 preceding tokens flips the sign; an
//!    intensifier directly before the token multiplies it by
//!    [`INTENSIFIER_SCALE`].
//! 3. If the raw sum `v` is nonzero, each `!` (at most
//!    [`MAX_EXCLAMATIONS`]) adds [`EXCLAMATION_BOOST`] in the direction of
//!    `v`.
//! 4. The compound score is `v / sqrt(v² + 15)`.
//!
//! Lexicon files hold one `token<TAB>valence` pair per line; blank lines
//! and lines starting with `#` are skipped.

use std::collections::HashMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_in_range, Error, Result};

pub const NORMALIZATION_ALPHA: f64 = 15.0;
pub const INTENSIFIER_SCALE: f64 = 1.3;
pub const EXCLAMATION_BOOST: f64 = 0.292;
pub const MAX_EXCLAMATIONS: usize = 4;
pub const NEGATION_WINDOW: usize = 3;

pub const NEGATORS: &[&str] = &[
    "not", "no", "never", "none", "nobody", "nothing", "neither", "nor", "without", "hardly",
    "dont", "doesnt", "didnt", "cant", "cannot", "wont", "wouldnt", "shouldnt", "isnt", "arent",
    "wasnt", "werent", "aint",
];

pub const INTENSIFIERS: &[&str] = &[
    "very", "really", "extremely", "so", "incredibly", "totally", "absolutely", "highly",
    "completely", "hugely", "super",
];

const BUNDLED: &str = include_str!("../data/lexicon.tsv");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPost {
    pub text: String,
    pub compound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    valence: HashMap<String, f64>,
}

impl Lexicon {
    pub fn parse(text: &str) -> Result<Self> {
        let mut valence = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: &str| Error::Parse(format!("lexicon line {}: {msg}", i + 1));
            let (token, value) = line.split_once('\t').ok_or_else(|| bad("expected token<TAB>valence"))?;
            let v: f64 = value.trim().parse().map_err(|_| bad("valence is not a number"))?;
            if !v.is_finite() {
                return Err(bad("valence must be finite"));
            }
            if valence.insert(token.trim().to_lowercase(), v).is_some() {
                return Err(bad("duplicate token"));
            }
        }
        Ok(Lexicon { valence })
    }

    /// The lexicon shipped with the crate.
    pub fn bundled() -> &'static Lexicon {
        static LEXICON: OnceLock<Lexicon> = OnceLock::new();
        LEXICON.get_or_init(|| Lexicon::parse(BUNDLED).expect("bundled lexicon parses"))
    }

    pub fn len(&self) -> usize {
        self.valence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valence.is_empty()
    }

    pub fn valence(&self, token: &str) -> f64 {
        self.valence.get(token).copied().unwrap_or(0.0)
    }

    /// Raw valence sum of a post, before normalization.
    pub fn raw_sum(&self, text: &str) -> f64 {
        let (tokens, bangs) = tokenize(text);
        let mut sum = 0.0;
        for (i, token) in tokens.iter().enumerate() {
            let mut v = self.valence(token);
            if v == 0.0 {
                continue;
            }
            if i > 0 && INTENSIFIERS.contains(&tokens[i - 1].as_str()) {
                v *= INTENSIFIER_SCALE;
            }
            let window = &tokens[i.saturating_sub(NEGATION_WINDOW)..i];
            if window.iter().any(|t| NEGATORS.contains(&t.as_str())) {
                v = -v;
            }
            sum += v;
        }
        if sum != 0.0 {
            sum += sum.signum() * EXCLAMATION_BOOST * bangs.min(MAX_EXCLAMATIONS) as f64;
        }
        sum
    }

    pub fn score(&self, text: &str) -> Result<f64> {
        if text.trim().is_empty() {
            return Err(Error::domain("text", "post text must not be empty"));
        }
        Ok(normalize(self.raw_sum(text)))
    }
}

/// Lowercased tokens and the number of `!` characters.
pub fn tokenize(text: &str) -> (Vec<String>, usize) {
    let bangs = text.chars().filter(|&c| c == '!').count();
    let cleaned: String = text
        .chars()
        .filter(|&c| c != '\'' && c != '\u{2019}')
        .flat_map(char::to_lowercase)
        .collect();
    let tokens = cleaned
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect();
    (tokens, bangs)
}

pub fn normalize(raw: f64) -> f64 {
    raw / (raw * raw + NORMALIZATION_ALPHA).sqrt()
}

/// Scores a post with the bundled lexicon.
pub fn score_post(text: &str) -> Result<f64> {
    Lexicon::bundled().score(text)
}

fn check_scores(scores: &[f64]) -> Result<()> {
    if scores.is_empty() {
        return Err(Error::domain("scores", "at least one score is required"));
    }
    for &s in scores {
        ensure_in_range("scores", s, -1.0, 1.0)?;
    }
    Ok(())
}

/// Arithmetic mean of compound scores.
pub fn aggregate(scores: &[f64]) -> Result<f64> {
    check_scores(scores)?;
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
    Ok(mean.clamp(sorted[0], sorted[sorted.len() - 1]))
}

/// Mean of per-group means weighted by group size, i.e. the mean over all
/// underlying posts.
pub fn weighted_aggregate(groups: &[(f64, u64)]) -> Result<f64> {
    let means: Vec<f64> = groups.iter().map(|g| g.0).collect();
    check_scores(&means)?;
    let total: u64 = groups.iter().map(|g| g.1).sum();
    if total == 0 {
        return Err(Error::domain("counts", "post counts must not all be zero"));
    }
    let mut terms: Vec<f64> = groups.iter().map(|&(m, n)| m * n as f64).collect();
    terms.sort_by(f64::total_cmp);
    Ok(terms.iter().sum::<f64>() / total as f64)
}

/// Standing-cost multiplier `1 − s̄`.
pub fn cost_multiplier(mean_sentiment: f64) -> Result<f64> {
    ensure_in_range("mean_sentiment", mean_sentiment, -1.0, 1.0)?;
    Ok(1.0 - mean_sentiment)
}
