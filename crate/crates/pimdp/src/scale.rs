//! Finite totally ordered scales and their lattice operations.
//!
//! A [`Scale`] is a finite chain of qualitative levels with bottom `0_L`,
//! top `1_L`, and the involutive order-reversing map [`Level::neg`]. Levels
//! are integer ranks; the display labels (`"0.2"`, `"high"`, ...) carry no
//! numeric meaning and nothing in this crate does arithmetic on them.
//! Every level is tagged with the identity of the scale it came from, and
//! combining levels of different scales is an error rather than a silent
//! coercion.

use std::cmp::Ordering;
use std::fmt;
use std::sync::atomic::{AtomicU32, Ordering as AtomicOrd};

use thiserror::Error;

static NEXT_TAG: AtomicU32 = AtomicU32::new(1);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScaleError {
    #[error("a scale needs at least two levels, got {0}")]
    TooFewLevels(usize),
    #[error("duplicate scale label `{0}`")]
    DuplicateLabel(String),
    #[error("numeric scale labels must be strictly increasing, got `{0}` before `{1}`")]
    LabelsNotIncreasing(String, String),
    #[error("unknown scale label `{0}`")]
    UnknownLabel(String),
    #[error("levels belong to different scales")]
    MixedScales,
}

/// A finite totally ordered set of qualitative levels.
///
/// The order is the order of `labels`; the first label is the bottom
/// element and the last is the top. When every label parses as a number
/// the labels must be strictly increasing, so a file that lists
/// `["0", "1", "0.5"]` is rejected instead of silently reordering meaning.
#[derive(Debug, Clone)]
pub struct Scale {
    labels: Vec<String>,
    tag: u32,
}

impl PartialEq for Scale {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels
    }
}
impl Eq for Scale {}

impl Scale {
    pub fn new<S: Into<String>>(labels: Vec<S>) -> Result<Self, ScaleError> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() < 2 {
            return Err(ScaleError::TooFewLevels(labels.len()));
        }
        for (i, a) in labels.iter().enumerate() {
            if labels[i + 1..].contains(a) {
                return Err(ScaleError::DuplicateLabel(a.clone()));
            }
        }
        let numeric: Option<Vec<f64>> = labels.iter().map(|l| l.parse::<f64>().ok()).collect();
        if let Some(nums) = numeric {
            for w in nums.windows(2) {
                if w[0] >= w[1] {
                    let at = nums.iter().position(|&x| x == w[0]).unwrap();
                    return Err(ScaleError::LabelsNotIncreasing(
                        labels[at].clone(),
                        labels[at + 1].clone(),
                    ));
                }
            }
        }
        let tag = NEXT_TAG.fetch_add(1, AtomicOrd::Relaxed);
        Ok(Scale { labels, tag })
    }

    /// Shorthand for building a scale from string literals.
    pub fn from_labels(labels: &[&str]) -> Result<Self, ScaleError> {
        Scale::new(labels.to_vec())
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn bottom(&self) -> Level {
        self.level_at(0)
    }

    pub fn top(&self) -> Level {
        self.level_at(self.labels.len() - 1)
    }

    /// The level at a given rank. Panics if the rank is out of range.
    pub fn level_at(&self, rank: usize) -> Level {
        assert!(rank < self.labels.len(), "rank {rank} out of range");
        Level {
            rank: rank as u16,
            size: self.labels.len() as u16,
            tag: self.tag,
        }
    }

    pub fn level(&self, label: &str) -> Result<Level, ScaleError> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|r| self.level_at(r))
            .ok_or_else(|| ScaleError::UnknownLabel(label.to_string()))
    }

    /// Display label of a level from this scale.
    ///
    /// Panics if the level belongs to another scale: a label lookup across
    /// scales is always a bug in the caller.
    pub fn label(&self, level: Level) -> &str {
        assert_eq!(level.tag, self.tag, "level belongs to a different scale");
        &self.labels[level.rank as usize]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn levels(&self) -> impl Iterator<Item = Level> + '_ {
        (0..self.labels.len()).map(move |r| self.level_at(r))
    }

    pub fn contains(&self, level: Level) -> bool {
        level.tag == self.tag
    }
}

/// One element of a [`Scale`]: a rank tagged with its scale identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Level {
    rank: u16,
    size: u16,
    tag: u32,
}

impl Level {
    pub fn rank(self) -> usize {
        self.rank as usize
    }

    pub fn is_bottom(self) -> bool {
        self.rank == 0
    }

    pub fn is_top(self) -> bool {
        self.rank == self.size - 1
    }

    /// The order-reversing map `n` of the scale: rank `r` maps to `K-1-r`.
    /// Involutive and antitone; total on valid levels.
    pub fn neg(self) -> Level {
        Level {
            rank: self.size - 1 - self.rank,
            ..self
        }
    }

    /// Rank minimum. Errors when the operands come from different scales.
    pub fn meet(self, other: Level) -> Result<Level, ScaleError> {
        if self.tag != other.tag {
            return Err(ScaleError::MixedScales);
        }
        Ok(if self.rank <= other.rank { self } else { other })
    }

    /// Rank maximum. Errors when the operands come from different scales.
    pub fn join(self, other: Level) -> Result<Level, ScaleError> {
        if self.tag != other.tag {
            return Err(ScaleError::MixedScales);
        }
        Ok(if self.rank >= other.rank { self } else { other })
    }

    pub fn try_cmp(self, other: Level) -> Result<Ordering, ScaleError> {
        if self.tag != other.tag {
            return Err(ScaleError::MixedScales);
        }
        Ok(self.rank.cmp(&other.rank))
    }
}

/// Levels of different scales are incomparable (`None`), never coerced.
impl PartialOrd for Level {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        (self.tag == other.tag).then(|| self.rank.cmp(&other.rank))
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rank {}/{}", self.rank, self.size - 1)
    }
}
