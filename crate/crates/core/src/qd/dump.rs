//! CSV persistence for archives and run metrics.
//!
//! Floats are written in Rust's shortest round-trip form, so reading a dump
//! back yields bit-identical values.

use std::fmt::Write as _;
use std::path::Path;

use super::archive::{Archive, Elite};
use super::run::MetricsRow;
use crate::error::{Error, Result};
use crate::measures::{ArchiveConfig, CellIndex, MeasureValue};

pub fn archive_csv(archive: &Archive) -> String {
    let dim = archive.elites().next().map_or(0, |e| e.latent.len());
    let mut out = String::from("price_index,count_index,objective,total_price,furniture_count");
    for i in 0..dim {
        write!(out, ",z{i}").unwrap();
    }
    out.push('\n');
    for e in archive.elites() {
        write!(
            out,
            "{},{},{},{},{}",
            e.cell.price, e.cell.count, e.objective, e.measures.total_price, e.measures.furniture_count
        )
        .unwrap();
        for z in &e.latent {
            write!(out, ",{z}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_archive(archive: &Archive, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, archive_csv(archive)).map_err(|e| Error::io(path, e))
}

/// Parses an archive dump into elites; errors carry the 1-based row.
pub fn parse_archive(text: &str) -> std::result::Result<Vec<Elite>, (usize, String)> {
    let mut lines = text.lines();
    let header = lines.next().ok_or((1, "empty archive file".to_string()))?;
    let cols: Vec<&str> = header.split(',').collect();
    let fixed = [
        "price_index",
        "count_index",
        "objective",
        "total_price",
        "furniture_count",
    ];
    if cols.len() < fixed.len() || cols[..fixed.len()] != fixed {
        return Err((1, format!("expected header starting with {}", fixed.join(","))));
    }
    let dim = cols.len() - fixed.len();
    for (i, c) in cols[fixed.len()..].iter().enumerate() {
        if *c != format!("z{i}") {
            return Err((1, format!("expected column z{i}, found {c:?}")));
        }
    }
    let mut elites = Vec::new();
    for (idx, line) in lines.enumerate() {
        let row = idx + 2;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != cols.len() {
            return Err((row, format!("expected {} fields, found {}", cols.len(), f.len())));
        }
        let int = |k: usize| {
            f[k].parse::<usize>()
                .map_err(|_| (row, format!("bad integer {:?}", f[k])))
        };
        let num = |k: usize| f[k].parse::<f64>().map_err(|_| (row, format!("bad number {:?}", f[k])));
        let latent = (0..dim)
            .map(|i| num(fixed.len() + i))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        elites.push(Elite {
            cell: CellIndex {
                price: int(0)?,
                count: int(1)?,
            },
            objective: num(2)?,
            measures: MeasureValue {
                total_price: num(3)?,
                furniture_count: int(4)?,
            },
            latent,
        });
    }
    Ok(elites)
}

pub fn read_archive(path: impl AsRef<Path>, config: ArchiveConfig) -> Result<Archive> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let elites = parse_archive(&text).map_err(|(row, msg)| Error::Parse {
        path: path.to_path_buf(),
        row,
        msg,
    })?;
    let mut archive = Archive::new(config);
    for e in elites {
        archive.restore(e);
    }
    Ok(archive)
}

pub fn metrics_csv(rows: &[MetricsRow]) -> String {
    let mut out = String::from("evaluations,coverage,qd_score,best_objective\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{}",
            r.evaluations, r.coverage, r.qd_score, r.best_objective
        )
        .unwrap();
    }
    out
}

pub fn write_metrics(rows: &[MetricsRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, metrics_csv(rows)).map_err(|e| Error::io(path, e))
}

pub fn parse_metrics(text: &str) -> std::result::Result<Vec<MetricsRow>, (usize, String)> {
    let mut lines = text.lines();
    if lines.next() != Some("evaluations,coverage,qd_score,best_objective") {
        return Err((1, "bad metrics header".into()));
    }
    lines
        .enumerate()
        .map(|(idx, line)| {
            let row = idx + 2;
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err((row, format!("expected 4 fields, found {}", f.len())));
            }
            let bad = |s: &str| (row, format!("bad value {s:?}"));
            Ok(MetricsRow {
                evaluations: f[0].parse().map_err(|_| bad(f[0]))?,
                coverage: f[1].parse().map_err(|_| bad(f[1]))?,
                qd_score: f[2].parse().map_err(|_| bad(f[2]))?,
                best_objective: f[3].parse().map_err(|_| bad(f[3]))?,
            })
        })
        .collect()
}
