//! Ingestion: segmentation, splitting, channel selection and the synthetic
//! data generator.

pub mod segment;
pub mod split;
pub mod synth;

pub use segment::{detect_onsets, segment, RawRecording, SegmentParams};
pub use split::split;
pub use synth::{generate_synthetic, SynthConfig};

use crate::error::{Result, ShipError};
use crate::types::{Dataset, LabeledSeries};

/// Keeps only the channels at `indices`, in that order.
pub fn subset_channels(dataset: &Dataset, indices: &[usize]) -> Result<Dataset> {
    if indices.is_empty() {
        return Err(ShipError::InvalidInput("channel subset is empty".into()));
    }
    dataset
        .iter()
        .map(|x| {
            if let Some(&bad) = indices.iter().find(|&&i| i >= x.n_channels()) {
                return Err(ShipError::ChannelOutOfRange {
                    channel: bad,
                    channels: x.n_channels(),
                });
            }
            LabeledSeries::new(
                x.id.clone(),
                x.label.clone(),
                x.original_length,
                indices.iter().map(|&i| x.channel_names[i].clone()).collect(),
                indices.iter().map(|&i| x.values[i].clone()).collect(),
            )
        })
        .collect::<Result<Vec<_>>>()
        .map(Dataset::new)
}
