//! Per-instance interpretability reports.
//!
//! A prediction is explained by the PSD of each shapelet of the predicted
//! class to the instance, together with the window where it matches best.

use std::path::Path;

use serde::{Deserialize, Serialize};
use ship_core::distance::psd_with;
use ship_core::features::transform;
use ship_core::model::metrics::argmax;
use ship_core::{io, ClassLabel, LabeledSeries, ModelCheckpoint, Result, ShapeletPool};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeletMatch {
    /// Index in the pool.
    pub shapelet: usize,
    pub label: ClassLabel,
    pub channel: usize,
    pub offset: usize,
    pub psd: f64,
    pub shapelet_values: Vec<f64>,
    pub window: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelTrace {
    pub name: String,
    /// Unpadded values.
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceExplanation {
    pub id: String,
    pub label: ClassLabel,
    pub predicted: ClassLabel,
    pub probabilities: Vec<(ClassLabel, f64)>,
    pub matches: Vec<ShapeletMatch>,
    pub channels: Vec<ChannelTrace>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplainReport {
    pub all_classes: bool,
    pub instances: Vec<InstanceExplanation>,
}

pub fn explain_instance(
    checkpoint: &ModelCheckpoint,
    pool: &ShapeletPool,
    x: &LabeledSeries,
    all_classes: bool,
) -> Result<InstanceExplanation> {
    let z = transform(x, pool, &checkpoint.features)?.concat();
    let probs = checkpoint.predict_proba(&z)?;
    let predicted = checkpoint.labels[argmax(&probs)].clone();
    let mut matches = Vec::new();
    for (i, s) in pool.shapelets.iter().enumerate() {
        if !all_classes && s.label != predicted {
            continue;
        }
        // Shapelets longer than the instance have no match to show.
        if s.len() > x.original_length {
            continue;
        }
        let m = psd_with(x, s.channel, &s.values, checkpoint.features.z_normalize)?;
        matches.push(ShapeletMatch {
            shapelet: i,
            label: s.label.clone(),
            channel: s.channel,
            offset: m.offset,
            psd: m.psd,
            shapelet_values: s.values.clone(),
            window: m.window,
        });
    }
    let channels = (0..x.n_channels())
        .map(|v| {
            Ok(ChannelTrace {
                name: x.channel_names[v].clone(),
                values: x.channel(v)?.to_vec(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(InstanceExplanation {
        id: x.id.clone(),
        label: x.label.clone(),
        predicted,
        probabilities: checkpoint.labels.iter().cloned().zip(probs).collect(),
        matches,
        channels,
    })
}

#[derive(Serialize)]
struct Trace<'a> {
    channel: usize,
    name: &'a str,
    time: Vec<usize>,
    values: &'a [f64],
}

#[derive(Serialize)]
struct Overlay<'a> {
    shapelet: usize,
    label: &'a ClassLabel,
    channel: usize,
    psd: f64,
    time: Vec<usize>,
    values: &'a [f64],
}

#[derive(Serialize)]
struct PlotDocument<'a> {
    id: &'a str,
    label: &'a ClassLabel,
    predicted: &'a ClassLabel,
    channels: Vec<Trace<'a>>,
    overlays: Vec<Overlay<'a>>,
}

/// One JSON document per instance: every channel against its time index and
/// every matched shapelet placed at its best offset.
pub fn emit_plot_data(report: &ExplainReport, out_path: &Path) -> Result<()> {
    io::write_atomic(out_path, |w| {
        for inst in &report.instances {
            let doc = PlotDocument {
                id: &inst.id,
                label: &inst.label,
                predicted: &inst.predicted,
                channels: inst
                    .channels
                    .iter()
                    .enumerate()
                    .map(|(c, t)| Trace {
                        channel: c,
                        name: &t.name,
                        time: (0..t.values.len()).collect(),
                        values: &t.values,
                    })
                    .collect(),
                overlays: inst
                    .matches
                    .iter()
                    .map(|m| Overlay {
                        shapelet: m.shapelet,
                        label: &m.label,
                        channel: m.channel,
                        psd: m.psd,
                        time: (m.offset..m.offset + m.shapelet_values.len()).collect(),
                        values: &m.shapelet_values,
                    })
                    .collect(),
            };
            serde_json::to_writer(&mut *w, &doc)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}
