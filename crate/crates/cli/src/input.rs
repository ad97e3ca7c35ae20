//! Inline-or-file JSON arguments and list parsing.

use std::fs;

use fracindex::metric::{Point, SpaceDescriptor};
use fracindex::{Error, Result};
use serde::de::DeserializeOwned;

/// Parses `arg` as JSON if it looks like JSON, otherwise reads it as a path.
pub fn json_arg<V: DeserializeOwned>(arg: &str, what: &str) -> Result<V> {
    let trimmed = arg.trim_start();
    let text = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        arg.to_string()
    } else {
        let path = arg.strip_prefix('@').unwrap_or(arg);
        fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read {what} from {path}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| Error::InvalidArgument(format!("bad {what}: {e}")))
}

pub fn space(arg: &str) -> Result<SpaceDescriptor<f64>> {
    let s: SpaceDescriptor<f64> = json_arg(arg, "space")?;
    s.validate()?;
    Ok(s)
}

/// Points as arrays of coordinates, validated against the space.
pub fn points(space: &SpaceDescriptor<f64>, arg: &str) -> Result<Vec<Point<f64>>> {
    let raw: Vec<Vec<f64>> = json_arg(arg, "points")?;
    raw.into_iter().map(|c| space.point(c)).collect()
}

pub fn point(space: &SpaceDescriptor<f64>, arg: &str) -> Result<Point<f64>> {
    let raw: Vec<f64> = json_arg(arg, "point")?;
    space.point(raw)
}
