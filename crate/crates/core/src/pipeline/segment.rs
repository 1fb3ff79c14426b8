//! Breath segmentation of raw recordings on the mask-pressure channel.

use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ShipError};
use crate::types::{ClassLabel, LabeledSeries, MIN_SERIES_LEN};

/// Uniformly sampled multichannel recording.
#[derive(Clone, Debug, PartialEq)]
pub struct RawRecording {
    pub id: String,
    pub names: Vec<String>,
    pub channels: Vec<Vec<f64>>,
}

impl RawRecording {
    pub fn new(id: impl Into<String>, names: Vec<String>, channels: Vec<Vec<f64>>) -> Result<Self> {
        let id = id.into();
        if names.len() != channels.len() || names.is_empty() {
            return Err(ShipError::InvalidInput(format!(
                "{id}: {} channel names for {} channels",
                names.len(),
                channels.len()
            )));
        }
        let n = channels[0].len();
        if channels.iter().any(|c| c.len() != n) {
            return Err(ShipError::InvalidInput(format!("{id}: channels differ in length")));
        }
        Ok(RawRecording { id, names, channels })
    }

    /// Reads a CSV file with a header row of channel names and one sample per row.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let csv_err = |source| ShipError::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(csv_err)?;
        let names: Vec<String> = reader.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
        let mut channels = vec![Vec::new(); names.len()];
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(csv_err)?;
            for (c, field) in record.iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| {
                    ShipError::InvalidInput(format!(
                        "{}: row {}: `{field}` is not a number",
                        path.display(),
                        row + 2
                    ))
                })?;
                channels[c].push(v);
            }
        }
        let id = path
            .file_stem()
            .map_or_else(|| "recording".to_string(), |s| s.to_string_lossy().into_owned());
        RawRecording::new(id, names, channels)
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.channels[i].as_slice())
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Onset-detection settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmentParams {
    pub pressure_channel: String,
    /// Width of the centered rolling-median baseline, in samples.
    pub baseline_window: usize,
    /// Trigger level as a fraction of the peak detrended pressure.
    pub on_fraction: f64,
    /// Release level; must be below `on_fraction`.
    pub off_fraction: f64,
    /// Channels to keep, in order; `None` keeps all.
    pub channels: Option<Vec<String>>,
}

impl Default for SegmentParams {
    fn default() -> Self {
        SegmentParams {
            pressure_channel: "Pmask".into(),
            baseline_window: 301,
            on_fraction: 0.5,
            off_fraction: 0.25,
            channels: None,
        }
    }
}

/// Centered rolling median, window truncated at the edges.
pub fn rolling_median(x: &[f64], window: usize) -> Vec<f64> {
    let half = window / 2;
    let mut buf = Vec::with_capacity(window + 1);
    (0..x.len())
        .map(|t| {
            let lo = t.saturating_sub(half);
            let hi = (t + half + 1).min(x.len());
            buf.clear();
            buf.extend_from_slice(&x[lo..hi]);
            buf.sort_by(f64::total_cmp);
            let m = buf.len();
            if m % 2 == 1 {
                buf[m / 2]
            } else {
                0.5 * (buf[m / 2 - 1] + buf[m / 2])
            }
        })
        .collect()
}

/// Breath onsets: upward crossings of the trigger level by the
/// baseline-removed pressure, re-armed only after it falls below the
/// release level. Samples before the series count as released.
pub fn detect_onsets(pressure: &[f64], params: &SegmentParams) -> Vec<usize> {
    if pressure.is_empty() {
        return Vec::new();
    }
    let baseline = rolling_median(pressure, params.baseline_window.max(1));
    let detrended: Vec<f64> = pressure.iter().zip(&baseline).map(|(p, b)| p - b).collect();
    let peak = detrended.iter().copied().fold(0.0, f64::max);
    if peak <= 1e-9 {
        return Vec::new();
    }
    let (h_on, h_off) = (params.on_fraction * peak, params.off_fraction * peak);
    let mut onsets = Vec::new();
    let mut active = false;
    for (t, &d) in detrended.iter().enumerate() {
        if !active && d >= h_on {
            onsets.push(t);
            active = true;
        } else if active && d < h_off {
            active = false;
        }
    }
    onsets
}

/// One unlabeled instance per inter-onset interval, truncated or zero-padded
/// to `series_len`.
pub fn segment(recording: &RawRecording, series_len: usize, params: &SegmentParams) -> Result<Vec<LabeledSeries>> {
    if params.on_fraction <= params.off_fraction {
        return Err(ShipError::InvalidConfig("on_fraction must exceed off_fraction".into()));
    }
    let pressure = recording.channel(&params.pressure_channel).ok_or_else(|| {
        ShipError::InvalidInput(format!(
            "{}: no `{}` channel",
            recording.id, params.pressure_channel
        ))
    })?;
    let keep: Vec<usize> = match &params.channels {
        None => (0..recording.names.len()).collect(),
        Some(names) => names
            .iter()
            .map(|n| {
                recording
                    .names
                    .iter()
                    .position(|m| m == n)
                    .ok_or_else(|| ShipError::InvalidInput(format!("{}: no `{n}` channel", recording.id)))
            })
            .collect::<Result<_>>()?,
    };
    let names: Vec<String> = keep.iter().map(|&i| recording.names[i].clone()).collect();

    let onsets = detect_onsets(pressure, params);
    if onsets.len() < 2 {
        warn!("{}: fewer than two breath onsets found", recording.id);
        return Ok(Vec::new());
    }
    let mut out = Vec::with_capacity(onsets.len() - 1);
    for (i, w) in onsets.windows(2).enumerate() {
        let len = (w[1] - w[0]).min(series_len);
        if len < MIN_SERIES_LEN {
            continue;
        }
        let channels = keep
            .iter()
            .map(|&c| recording.channels[c][w[0]..w[0] + len].to_vec())
            .collect();
        out.push(LabeledSeries::from_unpadded(
            format!("{}:seg{i:05}", recording.id),
            ClassLabel::unlabeled(),
            names.clone(),
            channels,
            series_len,
        )?);
    }
    Ok(out)
}
