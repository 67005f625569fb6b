//! Report file writing: atomic replace, CSV serialization, and
//! filename mangling for element names.

use crate::error::CliError;
use std::fmt::Write as _;
use std::path::Path;
use walklab_core::analysis::{SeriesData, TargetSeries};

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))
}

/// Writes through a temp file in the same directory, then renames, so a
/// crash never leaves a half-written report.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let tmp = dir.join(format!(".tmp.{name}"));
    let io_err = |e: std::io::Error| CliError::Io(format!("cannot write {name}: {e}"));
    std::fs::write(&tmp, contents).map_err(io_err)?;
    std::fs::rename(&tmp, dir.join(name)).map_err(io_err)
}

/// Element names mangled into portable file names; collisions are
/// avoided by the series index prefix.
pub fn safe_name(element: &str) -> String {
    element
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "(),^-_.".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// RatioSeries CSV: columns n, ratio_lo, ratio_hi, exact, engine. Exact
/// series print reduced rationals; float series print shortest
/// round-trip decimals.
pub fn series_csv(series: &TargetSeries) -> String {
    let mut out = String::from("n,ratio_lo,ratio_hi,exact,engine\n");
    let tag = series.engine.tag();
    match &series.data {
        SeriesData::Exact(points) => {
            for p in points {
                writeln!(out, "{},{},{},{},{tag}", p.n, p.lo, p.hi, p.exact).unwrap();
            }
        }
        SeriesData::Float(points) => {
            for p in points {
                writeln!(out, "{},{},{},false,{tag}", p.n, p.lo, p.hi).unwrap();
            }
        }
    }
    out
}

pub fn series_file_name(index: usize, target_name: &str) -> String {
    format!("series_{index}_{}.csv", safe_name(target_name))
}
