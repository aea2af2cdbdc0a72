//! Flat record streams for paths.
//!
//! CSV: a header `horizon,<T>,dim,<d>` followed by rows
//! `kind,time,v_1,…,v_d` with `kind ∈ {sample, jump}`. JSON lines: a header
//! object `{"horizon": T, "dim": d}` followed by one
//! `{"kind", "time", "value"}` object per record. Floats are written in
//! shortest round-trip form, so reading back reproduces every bit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{CadlagPath, Jump, Sample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    Sample,
    Jump,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub kind: RecordKind,
    pub time: f64,
    pub value: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct Header {
    horizon: f64,
    dim: usize,
}

fn records(path: &CadlagPath) -> impl Iterator<Item = Record> + '_ {
    path.samples()
        .iter()
        .map(|s| Record {
            kind: RecordKind::Sample,
            time: s.time,
            value: s.value.clone(),
        })
        .chain(path.jumps().iter().map(|j| Record {
            kind: RecordKind::Jump,
            time: j.time,
            value: j.size.clone(),
        }))
}

fn assemble(header: Header, recs: Vec<Record>) -> Result<CadlagPath> {
    let mut samples = Vec::new();
    let mut jumps = Vec::new();
    for r in recs {
        match r.kind {
            RecordKind::Sample => samples.push(Sample {
                time: r.time,
                value: r.value,
            }),
            RecordKind::Jump => jumps.push(Jump {
                time: r.time,
                size: r.value,
            }),
        }
    }
    CadlagPath::new(header.horizon, header.dim, samples, jumps)
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("bad number {s:?}: {e}")))
}

pub fn write_csv(path: &CadlagPath) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .flexible(true)
        .from_writer(Vec::new());
    let io = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record([
        "horizon".to_string(),
        path.horizon().to_string(),
        "dim".to_string(),
        path.dim().to_string(),
    ])
    .map_err(io)?;
    for r in records(path) {
        let kind = match r.kind {
            RecordKind::Sample => "sample",
            RecordKind::Jump => "jump",
        };
        let mut row = vec![kind.to_string(), r.time.to_string()];
        row.extend(r.value.iter().map(f64::to_string));
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_csv(text: &str) -> Result<CadlagPath> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = rdr.records();
    let head = rows
        .next()
        .ok_or_else(|| Error::Parse("missing header row".into()))?
        .map_err(|e| Error::Parse(e.to_string()))?;
    if head.len() != 4 || &head[0] != "horizon" || &head[2] != "dim" {
        return Err(Error::Parse("header must be `horizon,<T>,dim,<d>`".into()));
    }
    let header = Header {
        horizon: parse_f64(&head[1])?,
        dim: head[3]
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("bad dimension: {e}")))?,
    };
    let mut recs = Vec::new();
    for (i, row) in rows.enumerate() {
        let row = row.map_err(|e| Error::Parse(e.to_string()))?;
        if row.len() != header.dim + 2 {
            return Err(Error::Parse(format!(
                "row {} has {} fields, expected {}",
                i + 2,
                row.len(),
                header.dim + 2
            )));
        }
        let kind = match &row[0] {
            "sample" => RecordKind::Sample,
            "jump" => RecordKind::Jump,
            other => return Err(Error::Parse(format!("unknown record kind {other:?}"))),
        };
        recs.push(Record {
            kind,
            time: parse_f64(&row[1])?,
            value: row.iter().skip(2).map(parse_f64).collect::<Result<_>>()?,
        });
    }
    assemble(header, recs)
}

pub fn write_jsonl(path: &CadlagPath) -> Result<String> {
    let enc = |e: serde_json::Error| Error::Parse(e.to_string());
    let mut out = serde_json::to_string(&Header {
        horizon: path.horizon(),
        dim: path.dim(),
    })
    .map_err(enc)?;
    out.push('\n');
    for r in records(path) {
        out.push_str(&serde_json::to_string(&r).map_err(enc)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn read_jsonl(text: &str) -> Result<CadlagPath> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let dec = |e: serde_json::Error| Error::Parse(e.to_string());
    let header: Header = serde_json::from_str(
        lines
            .next()
            .ok_or_else(|| Error::Parse("missing header line".into()))?,
    )
    .map_err(dec)?;
    let recs = lines
        .map(|l| serde_json::from_str::<Record>(l).map_err(dec))
        .collect::<Result<Vec<_>>>()?;
    if recs.iter().any(|r| r.value.len() != header.dim) {
        return Err(Error::Parse("record dimension disagrees with header".into()));
    }
    assemble(header, recs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mixed() -> CadlagPath {
        CadlagPath::new(
            1.5,
            2,
            vec![
                Sample {
                    time: 0.0,
                    value: vec![0.0, 0.0],
                },
                Sample {
                    time: 0.1,
                    value: vec![1.0 / 3.0, -0.0],
                },
                Sample {
                    time: 1.5,
                    value: vec![-1e-300, 7.25e10],
                },
            ],
            vec![Jump {
                time: 0.7,
                size: vec![std::f64::consts::PI, 0.0],
            }],
        )
        .unwrap()
    }

    fn bits(p: &CadlagPath) -> Vec<u64> {
        records(p)
            .flat_map(|r| std::iter::once(r.time).chain(r.value))
            .map(f64::to_bits)
            .collect()
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let p = mixed();
        let q = read_csv(&write_csv(&p).unwrap()).unwrap();
        assert_eq!(bits(&p), bits(&q));
        assert_eq!(p.horizon(), q.horizon());
    }

    #[test]
    fn jsonl_round_trip_is_bit_exact() {
        let p = mixed();
        let q = read_jsonl(&write_jsonl(&p).unwrap()).unwrap();
        assert_eq!(bits(&p), bits(&q));
    }

    #[test]
    fn malformed_inputs_are_parse_errors() {
        assert!(matches!(read_csv(""), Err(Error::Parse(_))));
        assert!(matches!(read_csv("horizon,1,dim,1\nspike,0.5,1\n"), Err(Error::Parse(_))));
        assert!(matches!(read_csv("horizon,1,dim,1\njump,0.5\n"), Err(Error::Parse(_))));
        assert!(read_csv("horizon,1,dim,1\njump,0.5,0\n").is_err());
        assert!(matches!(read_jsonl("{\"horizon\":1}"), Err(Error::Parse(_))));
    }

    proptest! {
        #[test]
        fn random_round_trips(
            jumps in prop::collection::vec((1e-6f64..1.0, prop::num::f64::NORMAL), 0..8),
        ) {
            let mut js = jumps;
            js.sort_by(|a, b| a.0.total_cmp(&b.0));
            js.dedup_by(|a, b| a.0 == b.0);
            let p = CadlagPath::from_jumps_1d(1.0, &js).unwrap();
            let q = read_csv(&write_csv(&p).unwrap()).unwrap();
            prop_assert_eq!(bits(&p), bits(&q));
            let r = read_jsonl(&write_jsonl(&p).unwrap()).unwrap();
            prop_assert_eq!(bits(&p), bits(&r));
        }
    }
}
