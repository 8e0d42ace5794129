//! CSV ingestion, result documents, and JSON serialization.
//!
//! Group files are plain comma-delimited numeric matrices (UTF-8, LF or
//! CRLF, optional single header row): rows are samples, columns are
//! coordinates. Result documents carry content hashes of their inputs and a
//! config echo so a run can be reproduced exactly; numbers are serialized
//! with shortest round-trip precision.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::homtest::{BlockOutcome, BlockStatus, TestResult};
use crate::quadform::GroupSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeaderMode {
    None,
    FirstRow,
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn parse_err(path: &Path, line: usize, detail: String) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        detail,
    }
}

/// Read one group CSV: rows = samples, columns = coordinates. Rejects
/// ragged rows and non-numeric cells with their 1-based line number.
pub fn read_group_csv(path: impl AsRef<Path>, header: HeaderMode) -> Result<GroupSample> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    let mut lines_seen = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let mut line = line.map_err(|e| io_err(path, e))?;
        if idx == 0 {
            // tolerate a UTF-8 byte-order mark
            if let Some(stripped) = line.strip_prefix('\u{feff}') {
                line = stripped.to_string();
            }
        }
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        lines_seen = line_no;
        if idx == 0 && header == HeaderMode::FirstRow {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        match width {
            None => width = Some(cells.len()),
            Some(w) if cells.len() != w => {
                return Err(parse_err(
                    path,
                    line_no,
                    format!("row has {} cells, expected {w}", cells.len()),
                ));
            }
            _ => {}
        }
        let mut row = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| {
                parse_err(
                    path,
                    line_no,
                    format!("cell {} ({cell:?}) is not a number", c + 1),
                )
            })?;
            if !v.is_finite() {
                return Err(parse_err(
                    path,
                    line_no,
                    format!("cell {} is not finite", c + 1),
                ));
            }
            row.push(v);
        }
        rows.push(row);
    }
    if rows.len() < 2 {
        return Err(parse_err(
            path,
            lines_seen,
            format!("need at least 2 data rows, found {}", rows.len()),
        ));
    }
    GroupSample::from_rows(&rows)
}

/// Write a group as CSV with shortest round-trip number formatting, so
/// re-reading reproduces the matrix bit-exactly.
pub fn write_group_csv(path: impl AsRef<Path>, sample: &GroupSample) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    for row in sample.rows() {
        let mut first = true;
        for v in row {
            if !first {
                write!(w, ",").map_err(|e| io_err(path, e))?;
            }
            write!(w, "{v}").map_err(|e| io_err(path, e))?;
            first = false;
        }
        writeln!(w).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// SHA-256 of a file's bytes, lowercase hex.
pub fn sha256_file(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    let mut file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 65536];
    loop {
        let read = file.read(&mut buf).map_err(|e| io_err(path, e))?;
        if read == 0 {
            break;
        }
        hasher.update(&buf[..read]);
    }
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    Ok(hex)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputFingerprint {
    pub path: String,
    pub sha256: String,
}

impl InputFingerprint {
    pub fn of(path: impl AsRef<Path>) -> Result<Self> {
        Ok(InputFingerprint {
            path: path.as_ref().display().to_string(),
            sha256: sha256_file(path)?,
        })
    }
}

/// Echo of the run configuration inside a result document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub alpha: f64,
    pub mode: String,
    pub partition: Option<Vec<usize>>,
    pub seed: Option<u64>,
    pub r: f64,
    pub c: f64,
}

/// One labeled test outcome in the result document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub label: String,
    pub statistic: f64,
    pub rho: f64,
    pub scaled: f64,
    pub df: u64,
    pub p_value: f64,
    pub region: Option<[f64; 2]>,
    pub reject: bool,
    pub group_quadforms: Vec<f64>,
    pub pooled: f64,
}

impl ResultRecord {
    pub fn from_test(label: impl Into<String>, result: &TestResult) -> Self {
        ResultRecord {
            label: label.into(),
            statistic: result.statistic,
            rho: result.scale_factor,
            scaled: result.scaled_statistic,
            df: result.df,
            p_value: result.p_value_upper,
            region: result.region.map(|(lo, hi)| [lo, hi]),
            reject: result.reject,
            group_quadforms: result.group_quadforms.clone(),
            pooled: result.pooled,
        }
    }

    pub fn from_block(outcome: &BlockOutcome) -> Option<Self> {
        match &outcome.status {
            BlockStatus::Tested(result) => Some(ResultRecord::from_test(
                format!(
                    "block {} (coords {}-{})",
                    outcome.index, outcome.coord_start, outcome.coord_end
                ),
                result,
            )),
            BlockStatus::Degenerate { .. } => None,
        }
    }
}

/// Machine-readable record of one run. Re-running the tool on identical
/// inputs and config reproduces the document except for `timestamp`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub version: String,
    pub timestamp: String,
    pub inputs: Vec<InputFingerprint>,
    pub config: ConfigEcho,
    pub results: Vec<ResultRecord>,
    pub warnings: Vec<String>,
}

impl ResultDocument {
    pub fn new(inputs: Vec<InputFingerprint>, config: ConfigEcho) -> Self {
        ResultDocument {
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            inputs,
            config,
            results: Vec::new(),
            warnings: Vec::new(),
        }
    }
}

/// Write a result document as pretty JSON with a fixed field order.
pub fn write_result_json(doc: &ResultDocument, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, doc)?;
    writeln!(w).map_err(|e| io_err(path, e))?;
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_result_json(path: impl AsRef<Path>) -> Result<ResultDocument> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn read_simple_csv() {
        let f = write_temp("1,2\n3,4\n");
        let g = read_group_csv(f.path(), HeaderMode::None).unwrap();
        assert_eq!((g.n(), g.p()), (2, 2));
        assert_eq!(g.data(), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn read_csv_with_header_and_crlf() {
        let f = write_temp("a,b\r\n1,2\r\n3,4\r\n");
        let g = read_group_csv(f.path(), HeaderMode::FirstRow).unwrap();
        assert_eq!((g.n(), g.p()), (2, 2));
        assert_eq!(g.data(), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn ragged_row_names_line() {
        let f = write_temp("1,2\n3\n");
        let err = read_group_csv(f.path(), HeaderMode::None).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn non_numeric_cell_names_line() {
        let f = write_temp("1,2\n3,oops\n");
        let err = read_group_csv(f.path(), HeaderMode::None).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "{msg}");
        assert!(msg.contains("oops"), "{msg}");
    }

    #[test]
    fn too_few_rows_is_an_error() {
        let f = write_temp("1,2\n");
        assert!(read_group_csv(f.path(), HeaderMode::None).is_err());
        let f = write_temp("h1,h2\n1,2\n");
        assert!(read_group_csv(f.path(), HeaderMode::FirstRow).is_err());
    }

    #[test]
    fn csv_roundtrip_is_bit_exact() {
        let g = GroupSample::new(
            3,
            2,
            vec![
                0.1,
                -1.0 / 3.0,
                1e-300,
                123456.789e12,
                f64::MIN_POSITIVE,
                -0.0,
            ],
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.csv");
        write_group_csv(&path, &g).unwrap();
        let back = read_group_csv(&path, HeaderMode::None).unwrap();
        assert_eq!(g.data(), back.data());
    }

    #[test]
    fn sha256_matches_known_vector() {
        let f = write_temp("abc");
        let h = sha256_file(f.path()).unwrap();
        assert_eq!(
            h,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn result_document_roundtrip() {
        let doc = ResultDocument {
            version: "0.1.0".to_string(),
            timestamp: "2026-01-01T00:00:00+00:00".to_string(),
            inputs: vec![InputFingerprint {
                path: "g1.csv".to_string(),
                sha256: "00".repeat(32),
            }],
            config: ConfigEcho {
                alpha: 0.05,
                mode: "upper".to_string(),
                partition: None,
                seed: Some(7),
                r: 4.0,
                c: 1.0,
            },
            results: vec![ResultRecord {
                label: "full".to_string(),
                statistic: 1.0 / 3.0,
                rho: 0.9955307262569832,
                scaled: 0.3318435754189944,
                df: 2,
                p_value: 0.847,
                region: Some([0.05063561596857979, 7.377758908227871]),
                reject: false,
                group_quadforms: vec![1.0, 2.0, 3.0],
                pooled: 2.0,
            }],
            warnings: vec![],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.json");
        write_result_json(&doc, &path).unwrap();
        let back = read_result_json(&path).unwrap();
        assert_eq!(doc, back);

        // empty collections stay explicit in the serialized form
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"warnings\": []"));
    }
}
