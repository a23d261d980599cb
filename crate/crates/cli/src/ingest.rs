//! Observation CSV: `bias,bias_kind,i,j,frequency,weight` with
//! `bias_kind` one of `epsilon` or `nphi` and an optional weight.

use std::io::Read;

use rabi_core::fit::{Bias, ResonanceObservation};

use crate::error::{CliError, Result};

const HEADER: [&str; 6] = ["bias", "bias_kind", "i", "j", "frequency", "weight"];

pub fn read_observations<R: Read>(reader: R, path: &str) -> Result<Vec<ResonanceObservation>> {
    let err = |line: u64, message: String| CliError::Ingest {
        path: path.to_string(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);

    let mut records = rdr.records();
    let header = match records.next() {
        None => return Err(err(1, "empty file".into())),
        Some(r) => r.map_err(|e| err(line_of(&e), e.to_string()))?,
    };
    let names: Vec<&str> = header.iter().collect();
    let line = header.position().map_or(1, |p| p.line());
    if names.len() < 5 || names.len() > 6 || names[..] != HEADER[..names.len()] {
        return Err(err(line, format!("expected header `{}`", HEADER.join(","))));
    }

    let mut out = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| err(line_of(&e), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() < 5 || rec.len() > 6 {
            return Err(err(line, format!("expected 5 or 6 fields, found {}", rec.len())));
        }
        let num = |k: usize| -> Result<f64> {
            rec[k]
                .parse::<f64>()
                .map_err(|_| err(line, format!("{}: not a number: `{}`", HEADER[k], &rec[k])))
        };
        let index = |k: usize| -> Result<usize> {
            rec[k]
                .parse::<usize>()
                .map_err(|_| err(line, format!("{}: not a level index: `{}`", HEADER[k], &rec[k])))
        };
        let value = num(0)?;
        let bias = match &rec[1] {
            "epsilon" => Bias::Epsilon(value),
            "nphi" => Bias::NPhi(value),
            other => return Err(err(line, format!("bias_kind must be epsilon or nphi, got `{other}`"))),
        };
        let (i, j) = (index(2)?, index(3)?);
        let frequency = num(4)?;
        let weight = match rec.get(5) {
            None | Some("") => 1.0,
            Some(_) => num(5)?,
        };
        if !(frequency > 0.0) || !frequency.is_finite() {
            return Err(err(line, "frequency must be positive".into()));
        }
        if !(weight > 0.0) || !weight.is_finite() {
            return Err(err(line, "weight must be positive".into()));
        }
        if i >= j {
            return Err(err(line, "transition requires i < j".into()));
        }
        out.push(ResonanceObservation {
            bias,
            transition: (i, j),
            frequency,
            weight,
        });
    }
    if out.is_empty() {
        return Err(err(line, "no observations after the header".into()));
    }
    Ok(out)
}

fn line_of(e: &csv::Error) -> u64 {
    e.position().map_or(0, |p| p.line())
}

/// Inverse of [`read_observations`].
pub fn write_observations(obs: &[ResonanceObservation]) -> String {
    let mut out = HEADER.join(",");
    out.push('\n');
    for o in obs {
        let (v, kind) = match o.bias {
            Bias::Epsilon(e) => (e, "epsilon"),
            Bias::NPhi(n) => (n, "nphi"),
        };
        out.push_str(&format!(
            "{v:?},{kind},{},{},{:?},{:?}\n",
            o.transition.0, o.transition.1, o.frequency, o.weight
        ));
    }
    out
}
