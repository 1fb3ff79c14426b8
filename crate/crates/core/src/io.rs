//! Reading and writing the NDJSON and JSON artifacts.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Result, ShipError};
use crate::features::{FeatureMatrix, FeatureRecord};
use crate::types::{Dataset, LabeledSeries, Shapelet, ShapeletPool};

fn json_err(path: &Path, line: usize) -> impl FnOnce(serde_json::Error) -> ShipError + '_ {
    move |source| ShipError::Json {
        path: path.to_path_buf(),
        line,
        source,
    }
}

/// Reads one JSON value per non-blank line.
pub fn read_ndjson<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| ShipError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| ShipError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(json_err(path, i + 1))?);
    }
    Ok(out)
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| ShipError::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let file = File::create(&tmp).map_err(|e| ShipError::io(&tmp, e))?;
        let mut w = BufWriter::new(file);
        write(&mut w).map_err(|e| ShipError::io(&tmp, e))?;
        w.flush().map_err(|e| ShipError::io(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| ShipError::io(path, e))
}

pub fn write_ndjson<'a, T: Serialize + 'a>(path: &Path, items: impl IntoIterator<Item = &'a T>) -> Result<()> {
    write_atomic(path, |w| {
        for item in items {
            serde_json::to_writer(&mut *w, item)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| ShipError::io(path, e))?;
    serde_json::from_str(&text).map_err(json_err(path, 0))
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        w.write_all(b"\n")
    })
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    Ok(Dataset::new(read_ndjson::<LabeledSeries>(path)?))
}

pub fn write_dataset(path: &Path, dataset: &Dataset) -> Result<()> {
    write_ndjson(path, dataset.instances())
}

/// Pool file: the discovery configuration alongside the shapelets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoolFile {
    pub config: Config,
    pub per_class_quota: usize,
    pub shapelets: Vec<Shapelet>,
}

impl PoolFile {
    pub fn new(config: &Config, pool: &ShapeletPool) -> Self {
        PoolFile {
            config: config.clone(),
            per_class_quota: pool.per_class_quota,
            shapelets: pool.shapelets.clone(),
        }
    }

    pub fn pool(&self) -> ShapeletPool {
        ShapeletPool {
            shapelets: self.shapelets.clone(),
            per_class_quota: self.per_class_quota,
        }
    }
}

pub fn read_pool(path: &Path) -> Result<PoolFile> {
    read_json(path)
}

pub fn write_pool(path: &Path, config: &Config, pool: &ShapeletPool) -> Result<()> {
    write_json(path, &PoolFile::new(config, pool))
}

pub fn write_features(path: &Path, features: &FeatureMatrix) -> Result<()> {
    let records: Vec<FeatureRecord> = features.records().collect();
    write_ndjson(path, &records)
}

pub fn read_features(path: &Path) -> Result<FeatureMatrix> {
    Ok(FeatureMatrix::from_records(read_ndjson(path)?))
}
