#![allow(dead_code)]

use std::path::PathBuf;

pub fn demo(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../demo").join(name)
}

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

/// Rows of a golden CSV as string records, header skipped.
pub fn golden(name: &str) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(data(name)).unwrap();
    r.records().map(|x| x.unwrap()).collect()
}

pub fn num(r: &csv::StringRecord, k: usize) -> f64 {
    r[k].parse().unwrap()
}
