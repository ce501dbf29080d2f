//! Result rows and their CSV / JSON renderings.

use std::io::Write;

use serde::Serialize;
use tasep_core::state::ParticleState;

use crate::config::Format;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub positions: Vec<i64>,
    pub species: Vec<usize>,
    pub value: f64,
    pub est_error: f64,
    pub nodes_used: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<u64>,
}

impl Row {
    pub fn state(&self) -> ParticleState {
        ParticleState::new(self.positions.clone(), self.species.clone())
    }
}

/// 17 significant digits, enough to recover the exact double.
fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn join<T: ToString>(items: &[T], sep: &str) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(sep)
}

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> Result<(), CliError> {
    let with_count = rows.iter().any(|r| r.count.is_some());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["positions", "species", "value", "est_error", "nodes_used"];
    if with_count {
        header.push("count");
    }
    w.write_record(&header)
        .map_err(|e| CliError::Output(e.to_string()))?;
    for r in rows {
        let mut record = vec![
            join(&r.positions, ";"),
            join(&r.species, ","),
            sci(r.value),
            sci(r.est_error),
            r.nodes_used.to_string(),
        ];
        if with_count {
            record.push(r.count.unwrap_or(0).to_string());
        }
        w.write_record(&record)
            .map_err(|e| CliError::Output(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// JSON numbers use the shortest text that parses back to the same double.
pub fn write_json<W: Write>(rows: &[Row], mut out: W) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut out, rows).map_err(|e| CliError::Output(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

pub fn write_rows<W: Write>(rows: &[Row], format: Format, out: W) -> Result<(), CliError> {
    match format {
        Format::Csv => write_csv(rows, out),
        Format::Json => write_json(rows, out),
    }
}

/// Parses CSV written by [`write_csv`].
pub fn read_csv(text: &str) -> Result<Vec<Row>, CliError> {
    let bad = |e: String| CliError::Output(format!("malformed CSV: {e}"));
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let with_count = reader
        .headers()
        .map_err(|e| bad(e.to_string()))?
        .iter()
        .any(|h| h == "count");
    let mut rows = Vec::new();
    for record in reader.records() {
        let rec = record.map_err(|e| bad(e.to_string()))?;
        let positions = rec[0]
            .split(';')
            .map(|s| s.parse().map_err(|e| bad(format!("{e}"))))
            .collect::<Result<_, _>>()?;
        let species = rec[1]
            .split(',')
            .map(|s| s.parse().map_err(|e| bad(format!("{e}"))))
            .collect::<Result<_, _>>()?;
        let num = |i: usize| rec[i].parse::<f64>().map_err(|e| bad(format!("{e}")));
        rows.push(Row {
            positions,
            species,
            value: num(2)?,
            est_error: num(3)?,
            nodes_used: rec[4].parse().map_err(|e| bad(format!("{e}")))?,
            count: if with_count {
                Some(rec[5].parse().map_err(|e| bad(format!("{e}")))?)
            } else {
                None
            },
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(value: f64, count: Option<u64>) -> Row {
        Row {
            positions: vec![-1, 10],
            species: vec![12, 3],
            value,
            est_error: 1e-12,
            nodes_used: 64,
            count,
        }
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_csv(&[row(0.1, None)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "positions,species,value,est_error,nodes_used\n-1;10,\"12,3\",1.0000000000000001e-1,9.9999999999999998e-13,64\n"
        );
    }

    #[test]
    fn csv_round_trips_exact_values() {
        let rows = vec![
            row(1.0 / 3.0, Some(7)),
            row(2.0f64.sqrt() * 1e-300, Some(0)),
        ];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let back = read_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn json_omits_missing_count() {
        let mut buf = Vec::new();
        write_json(&[row(0.5, None)], &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert!(v[0].get("count").is_none());
        assert_eq!(v[0]["value"], 0.5);
    }
}
