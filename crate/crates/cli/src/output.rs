//! CSV and JSON writers. Floats go out with 17 significant digits.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::CliError;

pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::Io(p.to_path_buf(), e))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

#[inline]
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// `{"config": .., <key>: ..}` pretty-printed with a trailing newline.
pub fn write_json<C: Serialize, B: Serialize>(path: Option<&Path>, config: &C, key: &str, body: &B) -> Result<(), CliError> {
    let mut map = serde_json::Map::new();
    map.insert("config".into(), serde_json::to_value(config).expect("config serializes"));
    map.insert(key.into(), serde_json::to_value(body).expect("body serializes"));
    let mut w = sink(path)?;
    serde_json::to_writer_pretty(&mut w, &serde_json::Value::Object(map)).map_err(io::Error::from)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}
