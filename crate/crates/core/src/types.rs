//! Domain types shared by every stage of the pipeline.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, ShipError};

/// Shortest admissible breath segment, in samples.
pub const MIN_SERIES_LEN: usize = 3;

/// Default segment length after zero-padding.
pub const DEFAULT_SERIES_LEN: usize = 150;

/// Channel names of the four-channel ventilation recordings.
pub const DEFAULT_CHANNELS: [&str; 4] = ["Pmask", "Flow", "Thor", "Abdo"];

/// Class label of a breath segment.
///
/// The four ventilator classes sort first, in the order NP, AC, DT, IE; any
/// other label sorts after them lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassLabel(String);

impl ClassLabel {
    pub const KNOWN: [&'static str; 4] = ["NP", "AC", "DT", "IE"];

    pub fn new(name: impl Into<String>) -> Self {
        ClassLabel(name.into())
    }

    pub fn np() -> Self {
        ClassLabel::new("NP")
    }
    pub fn ac() -> Self {
        ClassLabel::new("AC")
    }
    pub fn dt() -> Self {
        ClassLabel::new("DT")
    }
    pub fn ie() -> Self {
        ClassLabel::new("IE")
    }

    /// Placeholder for segments that have not been annotated yet.
    pub fn unlabeled() -> Self {
        ClassLabel::new("UNLABELED")
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn rank(&self) -> usize {
        Self::KNOWN
            .iter()
            .position(|k| *k == self.0)
            .unwrap_or(Self::KNOWN.len())
    }
}

impl Ord for ClassLabel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank()
            .cmp(&other.rank())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for ClassLabel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ClassLabel {
    fn from(s: &str) -> Self {
        ClassLabel::new(s)
    }
}

/// One zero-padded multivariate instance: `V` channels of `T` samples each.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSeries")]
pub struct LabeledSeries {
    pub id: String,
    pub label: ClassLabel,
    pub original_length: usize,
    #[serde(rename = "channels")]
    pub channel_names: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawSeries {
    id: String,
    label: ClassLabel,
    original_length: usize,
    channels: Vec<String>,
    values: Vec<Vec<f64>>,
}

impl TryFrom<RawSeries> for LabeledSeries {
    type Error = ShipError;

    fn try_from(raw: RawSeries) -> Result<Self> {
        LabeledSeries::new(
            raw.id,
            raw.label,
            raw.original_length,
            raw.channels,
            raw.values,
        )
    }
}

impl LabeledSeries {
    /// Validates shape, minimum length and the zero-padded tail.
    pub fn new(
        id: impl Into<String>,
        label: ClassLabel,
        original_length: usize,
        channel_names: Vec<String>,
        values: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let series = LabeledSeries {
            id: id.into(),
            label,
            original_length,
            channel_names,
            values,
        };
        series.validate()?;
        Ok(series)
    }

    /// Builds an instance from unpadded channels, zero-padding each to `len`.
    pub fn from_unpadded(
        id: impl Into<String>,
        label: ClassLabel,
        channel_names: Vec<String>,
        channels: Vec<Vec<f64>>,
        len: usize,
    ) -> Result<Self> {
        let id = id.into();
        let original_length = channels.first().map_or(0, Vec::len);
        if channels.iter().any(|c| c.len() != original_length) {
            return Err(ShipError::InvalidSeries {
                id,
                reason: "channels have unequal lengths".into(),
            });
        }
        if original_length > len {
            return Err(ShipError::InvalidSeries {
                id,
                reason: format!("original length {original_length} exceeds padded length {len}"),
            });
        }
        let values = channels
            .into_iter()
            .map(|mut c| {
                c.resize(len, 0.0);
                c
            })
            .collect();
        LabeledSeries::new(id, label, original_length, channel_names, values)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| {
            Err(ShipError::InvalidSeries {
                id: self.id.clone(),
                reason,
            })
        };
        if self.values.is_empty() {
            return fail("no channels".into());
        }
        if self.channel_names.len() != self.values.len() {
            return fail(format!(
                "{} channel names for {} channels",
                self.channel_names.len(),
                self.values.len()
            ));
        }
        let len = self.values[0].len();
        if self.values.iter().any(|row| row.len() != len) {
            return fail("ragged channel matrix".into());
        }
        if self.original_length < MIN_SERIES_LEN {
            return fail(format!(
                "original length {} is below the minimum of {MIN_SERIES_LEN}",
                self.original_length
            ));
        }
        if self.original_length > len {
            return fail(format!(
                "original length {} exceeds series length {len}",
                self.original_length
            ));
        }
        for (v, row) in self.values.iter().enumerate() {
            if row.iter().any(|x| !x.is_finite()) {
                return fail(format!("channel {v} contains non-finite values"));
            }
            if row[self.original_length..].iter().any(|&x| x != 0.0) {
                return fail(format!("channel {v} has non-zero padding"));
            }
        }
        Ok(())
    }

    pub fn n_channels(&self) -> usize {
        self.values.len()
    }

    /// Padded length `T`.
    pub fn len(&self) -> usize {
        self.values[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.original_length == 0
    }

    /// The unpadded prefix of one channel.
    pub fn channel(&self, channel: usize) -> Result<&[f64]> {
        self.values
            .get(channel)
            .map(|row| &row[..self.original_length])
            .ok_or(ShipError::ChannelOutOfRange {
                channel,
                channels: self.values.len(),
            })
    }
}

/// An ordered collection of instances with per-class counts.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    instances: Vec<LabeledSeries>,
    class_counts: BTreeMap<ClassLabel, usize>,
}

impl Dataset {
    pub fn new(instances: Vec<LabeledSeries>) -> Self {
        let mut class_counts = BTreeMap::new();
        for x in &instances {
            *class_counts.entry(x.label.clone()).or_insert(0) += 1;
        }
        Dataset {
            instances,
            class_counts,
        }
    }

    pub fn instances(&self) -> &[LabeledSeries] {
        &self.instances
    }

    pub fn into_instances(self) -> Vec<LabeledSeries> {
        self.instances
    }

    pub fn class_counts(&self) -> &BTreeMap<ClassLabel, usize> {
        &self.class_counts
    }

    /// Classes present, in label order.
    pub fn labels(&self) -> Vec<ClassLabel> {
        self.class_counts.keys().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LabeledSeries> {
        self.instances.iter()
    }

    /// Padded length shared by the instances (the largest, if they disagree).
    pub fn series_len(&self) -> usize {
        self.instances.iter().map(LabeledSeries::len).max().unwrap_or(0)
    }

    pub fn n_channels(&self) -> usize {
        self.instances.first().map_or(0, LabeledSeries::n_channels)
    }

    pub fn min_original_length(&self) -> usize {
        self.instances
            .iter()
            .map(|x| x.original_length)
            .min()
            .unwrap_or(0)
    }

    pub fn channel_names(&self) -> Vec<String> {
        self.instances
            .first()
            .map(|x| x.channel_names.clone())
            .unwrap_or_default()
    }

    pub fn get(&self, id: &str) -> Option<&LabeledSeries> {
        self.instances.iter().find(|x| x.id == id)
    }
}

impl FromIterator<LabeledSeries> for Dataset {
    fn from_iter<I: IntoIterator<Item = LabeledSeries>>(iter: I) -> Self {
        Dataset::new(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a Dataset {
    type Item = &'a LabeledSeries;
    type IntoIter = std::slice::Iter<'a, LabeledSeries>;

    fn into_iter(self) -> Self::IntoIter {
        self.instances.iter()
    }
}

/// A discovered discriminative subsequence.
///
/// `start` and `end` are 0-based and inclusive: `values.len() == end - start + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Shapelet {
    pub values: Vec<f64>,
    pub channel: usize,
    pub source_id: String,
    pub start: usize,
    pub end: usize,
    pub label: ClassLabel,
    pub info_gain: f64,
    pub split_threshold: f64,
    /// Largest PSD observed against the training instances; stands in for
    /// the distance to instances too short to hold the shapelet.
    #[serde(default)]
    pub max_train_psd: f64,
}

impl Shapelet {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// The class-balanced set of selected shapelets.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ShapeletPool {
    pub shapelets: Vec<Shapelet>,
    pub per_class_quota: usize,
}

impl ShapeletPool {
    pub fn len(&self) -> usize {
        self.shapelets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shapelets.is_empty()
    }

    pub fn of_class<'a>(
        &'a self,
        label: &ClassLabel,
    ) -> impl Iterator<Item = (usize, &'a Shapelet)> + 'a {
        let label = label.clone();
        self.shapelets
            .iter()
            .enumerate()
            .filter(move |(_, s)| s.label == label)
    }

    pub fn class_counts(&self) -> BTreeMap<ClassLabel, usize> {
        let mut counts = BTreeMap::new();
        for s in &self.shapelets {
            *counts.entry(s.label.clone()).or_insert(0) += 1;
        }
        counts
    }
}
