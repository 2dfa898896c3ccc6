//! CSV and JSON output of sweep records.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::sweep::SweepPoint;

pub const HEADER: [&str; 9] = ["param1", "param2", "n_a", "g2", "g3", "n_sigma", "n_max", "tail_mass", "status"];

/// One output line. Absent values are `NA` in CSV and `null` in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub param1: Option<f64>,
    pub param2: Option<f64>,
    pub n_a: Option<f64>,
    pub g2: Option<f64>,
    pub g3: Option<f64>,
    pub n_sigma: Option<f64>,
    pub n_max: Option<usize>,
    pub tail_mass: Option<f64>,
    pub status: String,
}

impl Row {
    pub fn from_point(p: &SweepPoint) -> Self {
        let mut row = match &p.outcome {
            Ok(r) => Row {
                param1: None,
                param2: None,
                n_a: Some(r.n_a),
                g2: r.g2,
                g3: r.g3,
                n_sigma: Some(r.n_sigma),
                n_max: Some(r.n_max),
                tail_mass: Some(r.tail_mass),
                status: "ok".into(),
            },
            Err(e) => Row {
                param1: None,
                param2: None,
                n_a: None,
                g2: None,
                g3: None,
                n_sigma: None,
                n_max: None,
                tail_mass: None,
                status: format!("error: {e}"),
            },
        };
        row.param1 = Some(p.param1);
        row.param2 = p.param2;
        row
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format `{s}` (csv or json)")),
        }
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn float(x: f64) -> String {
    if x.is_finite() {
        ryu::Buffer::new().format_finite(x).to_string()
    } else {
        x.to_string()
    }
}

fn cell(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), float)
}

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([
            cell(r.param1),
            cell(r.param2),
            cell(r.n_a),
            cell(r.g2),
            cell(r.g3),
            cell(r.n_sigma),
            r.n_max.map_or_else(|| "NA".to_string(), |n| n.to_string()),
            cell(r.tail_mass),
            r.status.clone(),
        ])?;
    }
    w.flush()
}

pub fn write_json<W: Write>(rows: &[Row], out: W) -> std::io::Result<()> {
    let mut out = out;
    serde_json::to_writer_pretty(&mut out, rows)?;
    writeln!(out)
}

pub fn emit<W: Write>(rows: &[Row], format: Format, out: W) -> std::io::Result<()> {
    match format {
        Format::Csv => write_csv(rows, out),
        Format::Json => write_json(rows, out),
    }
}

/// A plain numeric table (spectra, correlation curves, Wigner grids):
/// CSV with the given header, or JSON as an array of objects keyed by it.
pub fn write_table<W: Write>(header: &[&str], rows: &[Vec<f64>], format: Format, out: W) -> std::io::Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(header)?;
            for r in rows {
                w.write_record(r.iter().map(|&x| float(x)))?;
            }
            w.flush()
        }
        Format::Json => {
            let objects: Vec<serde_json::Map<String, serde_json::Value>> = rows
                .iter()
                .map(|r| {
                    header
                        .iter()
                        .zip(r)
                        .map(|(k, &x)| (k.to_string(), serde_json::Number::from_f64(x).map_or(serde_json::Value::Null, Into::into)))
                        .collect()
                })
                .collect();
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, &objects)?;
            writeln!(out)
        }
    }
}

fn parse_cell(s: &str) -> Result<Option<f64>, String> {
    if s == "NA" {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|_| format!("bad number `{s}`"))
}

/// Reads back a file written by [`write_csv`].
pub fn read_csv<R: Read>(input: R) -> Result<Vec<Row>, String> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| e.to_string())?;
    if header.iter().ne(HEADER) {
        return Err(format!("unexpected header {header:?}"));
    }
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| e.to_string())?;
            let f = |i: usize| parse_cell(&rec[i]);
            Ok(Row {
                param1: f(0)?,
                param2: f(1)?,
                n_a: f(2)?,
                g2: f(3)?,
                g3: f(4)?,
                n_sigma: f(5)?,
                n_max: match &rec[6] {
                    "NA" => None,
                    s => Some(s.parse().map_err(|_| format!("bad n_max `{s}`"))?),
                },
                tail_mass: f(7)?,
                status: rec[8].to_string(),
            })
        })
        .collect()
}

pub fn read_json<R: Read>(input: R) -> Result<Vec<Row>, String> {
    serde_json::from_reader(input).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(g2: Option<f64>) -> Row {
        Row {
            param1: Some(0.1),
            param2: None,
            n_a: Some(2.0 / 3.0),
            g2,
            g3: g2.map(|g| g * 1e-17),
            n_sigma: Some(0.5),
            n_max: Some(10),
            tail_mass: Some(3.2e-9),
            status: "ok".into(),
        }
    }

    #[test]
    fn one_record_two_lines() {
        let mut buf = Vec::new();
        write_csv(&[row(Some(0.8))], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "param1,param2,n_a,g2,g3,n_sigma,n_max,tail_mass,status");
        assert_eq!(lines[1], "0.1,NA,0.6666666666666666,0.8,8e-18,0.5,10,3.2e-9,ok");
    }

    #[test]
    fn round_trip_is_exact() {
        let rows = vec![row(Some(0.8)), row(None), row(Some(std::f64::consts::PI))];
        let mut c = Vec::new();
        let mut j = Vec::new();
        write_csv(&rows, &mut c).unwrap();
        write_json(&rows, &mut j).unwrap();
        assert_eq!(read_csv(c.as_slice()).unwrap(), rows);
        assert_eq!(read_json(j.as_slice()).unwrap(), rows);
        assert!(String::from_utf8(j).unwrap().contains("\"g2\": null"));
    }

    #[test]
    fn statuses_with_commas_are_quoted() {
        let mut r = row(None);
        r.status = "error: a, b".into();
        let mut c = Vec::new();
        write_csv(&[r.clone()], &mut c).unwrap();
        assert_eq!(read_csv(c.as_slice()).unwrap(), vec![r]);
    }
}
