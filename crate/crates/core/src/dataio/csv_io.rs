//! CSV and JSON readers/writers for every file the pipeline touches.
//!
//! Numeric payloads are written with 17 significant digits so that a
//! write/read round trip reproduces every `f64` exactly.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::Array2;

use super::{DomainDataset, PairSet};
use crate::embedding::{JointAffinity, SharedEmbedding};
use crate::error::{Error, Result};
use crate::transport::Coupling;

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn path_str(path: &Path) -> String {
    path.display().to_string()
}

/// Load one domain from a CSV file with a header row.
///
/// All columns are numeric features except the label column, picked by
/// `label_column` when given and otherwise by the name `label` if present.
/// Empty label cells mean the row is unlabeled. Row order is preserved.
pub fn load_domain_csv(path: impl AsRef<Path>, label_column: Option<&str>) -> Result<DomainDataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();

    let label_idx = match label_column {
        Some(name) => Some(
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::MissingLabelColumn {
                    path: path_str(path),
                    column: name.to_string(),
                })?,
        ),
        None => headers.iter().position(|h| h == "label"),
    };
    let feature_cols: Vec<usize> = (0..headers.len()).filter(|i| Some(*i) != label_idx).collect();
    if feature_cols.is_empty() {
        return Err(Error::MalformedFile {
            path: path_str(path),
            reason: "no feature columns".to_string(),
        });
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<Option<String>> = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != headers.len() {
            return Err(Error::MalformedFile {
                path: path_str(path),
                reason: format!(
                    "row {}: expected {} fields, got {}",
                    row_idx + 1,
                    headers.len(),
                    record.len()
                ),
            });
        }
        let mut row = Vec::with_capacity(feature_cols.len());
        for &c in &feature_cols {
            let cell = &record[c];
            let value: f64 = cell.parse().map_err(|_| Error::NonNumericCell {
                path: path_str(path),
                row: row_idx + 1,
                column: headers[c].clone(),
                value: cell.to_string(),
            })?;
            row.push(value);
        }
        rows.push(row);
        labels.push(label_idx.map(|c| record[c].to_string()));
    }

    if rows.is_empty() {
        return Err(Error::MalformedFile {
            path: path_str(path),
            reason: "no data rows".to_string(),
        });
    }
    let n = rows.len();
    let p = feature_cols.len();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let features = Array2::from_shape_vec((n, p), flat).expect("row-major layout");
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    DomainDataset::new(features, labels, name)
}

/// Write a domain as CSV with columns `f0..f{p-1},label`.
pub fn write_domain_csv(dataset: &DomainDataset, path: impl AsRef<Path>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    let p = dataset.n_features();
    let mut header: Vec<String> = (0..p).map(|j| format!("f{j}")).collect();
    header.push("label".to_string());
    writer.write_record(&header)?;
    for i in 0..dataset.n_samples() {
        let mut record: Vec<String> = (0..p).map(|j| fmt(dataset.features()[[i, j]])).collect();
        record.push(dataset.labels()[i].clone().unwrap_or_default());
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Read ground-truth pairs from a CSV with header `source,target`.
pub fn read_pairs_csv(path: impl AsRef<Path>, n_source: usize, n_target: usize) -> Result<PairSet> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "source" || &headers[1] != "target" {
        return Err(Error::MalformedFile {
            path: path_str(path),
            reason: "expected header 'source,target'".to_string(),
        });
    }
    let mut pairs = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record?;
        let parse = |cell: &str, column: &str| -> Result<usize> {
            cell.parse().map_err(|_| Error::NonNumericCell {
                path: path_str(path),
                row: row_idx + 1,
                column: column.to_string(),
                value: cell.to_string(),
            })
        };
        pairs.push((parse(&record[0], "source")?, parse(&record[1], "target")?));
    }
    PairSet::new(pairs, n_source, n_target)
}

pub fn write_pairs_csv(pairs: &PairSet, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path.as_ref())?;
    let mut w = BufWriter::new(file);
    writeln!(w, "source,target")?;
    for &(s, t) in pairs.pairs() {
        writeln!(w, "{s},{t}")?;
    }
    w.flush()?;
    Ok(())
}

/// Write a coupling as sparse triplets `i,j,value`, keeping entries strictly
/// above `threshold`. Rows are emitted in row-major order.
pub fn write_coupling(coupling: &Coupling, path: impl AsRef<Path>, threshold: f64) -> Result<()> {
    let file = File::create(path.as_ref())?;
    let mut w = BufWriter::new(file);
    writeln!(w, "i,j,value")?;
    for ((i, j), &v) in coupling.values().indexed_iter() {
        if v > threshold {
            writeln!(w, "{i},{j},{}", fmt(v))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Write shared coordinates for both domains as CSV with columns
/// `domain,row,e0..e{d-1}`; source rows first.
pub fn write_aligned_coords(
    source: &Array2<f64>,
    target: &Array2<f64>,
    path: impl AsRef<Path>,
) -> Result<()> {
    if source.ncols() != target.ncols() {
        return Err(Error::ShapeMismatch {
            context: "source vs target coordinate dimension",
            expected: source.ncols().to_string(),
            actual: target.ncols().to_string(),
        });
    }
    let d = source.ncols();
    let file = File::create(path.as_ref())?;
    let mut w = BufWriter::new(file);
    let header: Vec<String> = (0..d).map(|j| format!("e{j}")).collect();
    writeln!(w, "domain,row,{}", header.join(","))?;
    for (tag, coords) in [("source", source), ("target", target)] {
        for i in 0..coords.nrows() {
            let cells: Vec<String> = (0..d).map(|j| fmt(coords[[i, j]])).collect();
            writeln!(w, "{tag},{i},{}", cells.join(","))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Write a spectral embedding (see [`write_aligned_coords`] for the schema).
pub fn write_embedding(embedding: &SharedEmbedding, path: impl AsRef<Path>) -> Result<()> {
    write_aligned_coords(
        &embedding.source_coords().to_owned(),
        &embedding.target_coords().to_owned(),
        path,
    )
}

/// Read coordinates written by [`write_aligned_coords`] /
/// [`write_embedding`] back into per-domain matrices.
pub fn read_embedding(path: impl AsRef<Path>) -> Result<(Array2<f64>, Array2<f64>)> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if headers.len() < 3 || headers[0] != "domain" || headers[1] != "row" {
        return Err(Error::MalformedFile {
            path: path_str(path),
            reason: "expected header 'domain,row,e0,...'".to_string(),
        });
    }
    let d = headers.len() - 2;
    let mut source: Vec<f64> = Vec::new();
    let mut target: Vec<f64> = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record?;
        let buf = match &record[0] {
            "source" => &mut source,
            "target" => &mut target,
            other => {
                return Err(Error::MalformedFile {
                    path: path_str(path),
                    reason: format!("row {}: unknown domain '{other}'", row_idx + 1),
                })
            }
        };
        let declared: usize = record[1].parse().map_err(|_| Error::NonNumericCell {
            path: path_str(path),
            row: row_idx + 1,
            column: "row".to_string(),
            value: record[1].to_string(),
        })?;
        if declared != buf.len() / d {
            return Err(Error::MalformedFile {
                path: path_str(path),
                reason: format!("row {}: indices out of order", row_idx + 1),
            });
        }
        for j in 0..d {
            let cell = &record[j + 2];
            let v: f64 = cell.parse().map_err(|_| Error::NonNumericCell {
                path: path_str(path),
                row: row_idx + 1,
                column: headers[j + 2].clone(),
                value: cell.to_string(),
            })?;
            buf.push(v);
        }
    }
    if source.is_empty() || target.is_empty() {
        return Err(Error::MalformedFile {
            path: path_str(path),
            reason: "missing source or target rows".to_string(),
        });
    }
    let src = Array2::from_shape_vec((source.len() / d, d), source).expect("row-major");
    let tgt = Array2::from_shape_vec((target.len() / d, d), target).expect("row-major");
    Ok((src, tgt))
}

/// Write a metric map as a JSON object of metric name to number.
pub fn write_metrics(metrics: &BTreeMap<String, f64>, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path.as_ref())?;
    let mut w = BufWriter::new(file);
    let json = serde_json::to_string_pretty(metrics).expect("map serializes");
    writeln!(w, "{json}")?;
    w.flush()?;
    Ok(())
}

/// Export the joint distance matrix `1 - W` as a dense headerless CSV,
/// with entries clamped into `[0, 1]`. Suitable as a precomputed distance
/// matrix for external visualization tools.
pub fn export_joint_distance(joint: &JointAffinity, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path.as_ref())?;
    let mut w = BufWriter::new(file);
    let values = joint.values();
    for i in 0..values.nrows() {
        let cells: Vec<String> = (0..values.ncols())
            .map(|j| fmt((1.0 - values[[i, j]]).clamp(0.0, 1.0)))
            .collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn write_file(dir: &Path, name: &str, contents: &str) -> std::path::PathBuf {
        let path = dir.join(name);
        let mut f = File::create(&path).unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        path
    }

    #[test]
    fn load_basic_csv() {
        let dir = tempdir().unwrap();
        let path = write_file(dir.path(), "d.csv", "f0,f1,label\n1,2,a\n3,4,b\n5,6,c\n");
        let ds = load_domain_csv(&path, None).unwrap();
        assert_eq!(ds.n_samples(), 3);
        assert_eq!(ds.n_features(), 2);
        assert_eq!(ds.n_labeled(), 3);
        assert_eq!(ds.features()[[1, 0]], 3.0);
        assert_eq!(ds.labels()[2].as_deref(), Some("c"));
    }

    #[test]
    fn load_partial_labels() {
        let dir = tempdir().unwrap();
        let path = write_file(dir.path(), "d.csv", "f0,f1,label\n1,2,a\n3,4,\n5,6,c\n");
        let ds = load_domain_csv(&path, None).unwrap();
        assert_eq!(ds.labels()[1], None);
        assert_eq!(ds.n_labeled(), 2);
    }

    #[test]
    fn load_reports_bad_cell() {
        let dir = tempdir().unwrap();
        let path = write_file(dir.path(), "d.csv", "f0,f1,label\n1,2,a\nabc,4,b\n");
        let err = load_domain_csv(&path, None).unwrap_err();
        match err {
            Error::NonNumericCell { row, column, value, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, "f0");
                assert_eq!(value, "abc");
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn load_missing_label_column() {
        let dir = tempdir().unwrap();
        let path = write_file(dir.path(), "d.csv", "f0,f1\n1,2\n");
        let err = load_domain_csv(&path, Some("cls")).unwrap_err();
        assert!(matches!(err, Error::MissingLabelColumn { .. }));
        // without an explicit label column everything is a feature
        let ds = load_domain_csv(&path, None).unwrap();
        assert_eq!(ds.n_features(), 2);
        assert_eq!(ds.n_labeled(), 0);
    }

    #[test]
    fn domain_csv_round_trip_is_exact() {
        let dir = tempdir().unwrap();
        let features = Array2::from_shape_fn((7, 3), |(i, j)| {
            (1.0 + i as f64).sqrt() * (-1.0f64).powi(j as i32) / 3.0
        });
        let labels = (0..7).map(|i| Some(format!("c{}", i % 2))).collect();
        let ds = DomainDataset::new(features, labels, "x").unwrap();
        let path = dir.path().join("out.csv");
        write_domain_csv(&ds, &path).unwrap();
        let back = load_domain_csv(&path, None).unwrap();
        assert_eq!(back.features(), ds.features());
        assert_eq!(back.labels(), ds.labels());
    }

    #[test]
    fn pairs_round_trip_and_validation() {
        let dir = tempdir().unwrap();
        let pairs = PairSet::new(vec![(0, 2), (1, 0)], 3, 3).unwrap();
        let path = dir.path().join("pairs.csv");
        write_pairs_csv(&pairs, &path).unwrap();
        let back = read_pairs_csv(&path, 3, 3).unwrap();
        assert_eq!(back, pairs);
        assert!(read_pairs_csv(&path, 1, 3).is_err());
    }
}
