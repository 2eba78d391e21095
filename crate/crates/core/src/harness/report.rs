//! CSV results.
//!
//! Every row is `kind,snr_db,words,word_errors,wer,ci,seed,config_hash`. For
//! kinds other than `wer` the same columns hold a numerator
//! (`word_errors`), a denominator (`words`) and their ratio:
//!
//! | kind            | words             | word_errors              |
//! |-----------------|-------------------|--------------------------|
//! | `wer`           | decoded words     | word errors              |
//! | `bit_errors`    | information bits  | bit errors               |
//! | `relay_success` | relay attempts    | relay successes          |
//! | `false_success` | relay successes   | wrong accepted estimates |
//! | `frames_relay`  | frames sent       | frames sent by relays    |
//! | `outage`        | channel draws     | outages                  |

use std::io::{Read, Write};

use thiserror::Error;

use crate::outage::{binomial_half_width, OutagePoint};

use super::analysis::CurvePoint;
use super::sweep::WerPoint;

pub const HEADER: [&str; 8] = [
    "kind",
    "snr_db",
    "words",
    "word_errors",
    "wer",
    "ci",
    "seed",
    "config_hash",
];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("row {row}: {msg}")]
    Format { row: usize, msg: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub kind: String,
    pub snr_db: f64,
    pub words: u64,
    pub word_errors: u64,
    pub wer: f64,
    pub ci: f64,
    pub seed: u64,
    pub config_hash: String,
}

impl Row {
    fn ratio(kind: &str, snr_db: f64, den: u64, num: u64, seed: u64, hash: &str) -> Self {
        let p = if den == 0 { 0.0 } else { num as f64 / den as f64 };
        Self {
            kind: kind.into(),
            snr_db,
            words: den,
            word_errors: num,
            wer: p,
            ci: binomial_half_width(p, den),
            seed,
            config_hash: hash.into(),
        }
    }

    pub fn curve_point(&self) -> CurvePoint {
        CurvePoint {
            snr_db: self.snr_db,
            rate: self.wer,
            errors: self.word_errors,
        }
    }
}

/// Rows for one sweep point: the WER row plus bit-error and, for relay
/// runs, relay statistics.
pub fn wer_rows(p: &WerPoint, config_hash: &str) -> Vec<Row> {
    let t = &p.telemetry;
    let mut rows = vec![
        Row {
            kind: "wer".into(),
            snr_db: p.snr_db,
            words: p.words,
            word_errors: p.word_errors,
            wer: p.wer,
            ci: p.ci,
            seed: p.seed,
            config_hash: config_hash.into(),
        },
        Row::ratio(
            "bit_errors",
            p.snr_db,
            p.words * p.info_len as u64,
            p.info_bit_errors,
            p.seed,
            config_hash,
        ),
    ];
    if t.relay_attempts > 0 {
        rows.push(Row::ratio(
            "relay_success",
            p.snr_db,
            t.relay_attempts,
            t.relay_successes,
            p.seed,
            config_hash,
        ));
        rows.push(Row::ratio(
            "false_success",
            p.snr_db,
            t.relay_successes,
            t.false_successes,
            p.seed,
            config_hash,
        ));
        rows.push(Row::ratio(
            "frames_relay",
            p.snr_db,
            t.frames_from_source + t.frames_from_relays,
            t.frames_from_relays,
            p.seed,
            config_hash,
        ));
    }
    rows
}

pub fn outage_row(p: &OutagePoint, seed: u64, config_hash: &str) -> Row {
    Row {
        kind: "outage".into(),
        snr_db: p.snr_db,
        words: p.samples,
        word_errors: p.outages,
        wer: p.p_out,
        ci: p.ci,
        seed,
        config_hash: config_hash.into(),
    }
}

/// Writes the header at creation and flushes after every batch, so an
/// interrupted sweep keeps every completed point.
pub struct RowWriter<W: Write> {
    w: csv::Writer<W>,
}

impl<W: Write> RowWriter<W> {
    pub fn new(out: W) -> Result<Self, ReportError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(HEADER)?;
        w.flush().map_err(csv::Error::from)?;
        Ok(Self { w })
    }

    pub fn push(&mut self, rows: &[Row]) -> Result<(), ReportError> {
        for r in rows {
            self.w.write_record([
                r.kind.clone(),
                r.snr_db.to_string(),
                r.words.to_string(),
                r.word_errors.to_string(),
                format!("{:e}", r.wer),
                format!("{:e}", r.ci),
                r.seed.to_string(),
                r.config_hash.clone(),
            ])?;
        }
        self.w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

pub fn write_rows<W: Write>(out: W, rows: &[Row]) -> Result<(), ReportError> {
    RowWriter::new(out)?.push(rows)
}

pub fn read_rows<R: Read>(input: R) -> Result<Vec<Row>, ReportError> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(HEADER) {
        return Err(ReportError::Format {
            row: 0,
            msg: format!("unexpected header `{}`", header.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let field = |k: usize| rec.get(k).unwrap_or("");
        let bad = |k: usize| ReportError::Format {
            row,
            msg: format!("bad {} `{}`", HEADER[k], field(k)),
        };
        rows.push(Row {
            kind: field(0).to_string(),
            snr_db: field(1).parse().map_err(|_| bad(1))?,
            words: field(2).parse().map_err(|_| bad(2))?,
            word_errors: field(3).parse().map_err(|_| bad(3))?,
            wer: field(4).parse().map_err(|_| bad(4))?,
            ci: field(5).parse().map_err(|_| bad(5))?,
            seed: field(6).parse().map_err(|_| bad(6))?,
            config_hash: field(7).to_string(),
        });
    }
    Ok(rows)
}

/// Rows of one kind as an error-rate curve, ordered by SNR.
pub fn curve(rows: &[Row], kind: &str) -> Vec<CurvePoint> {
    let mut pts: Vec<CurvePoint> = rows
        .iter()
        .filter(|r| r.kind == kind)
        .map(Row::curve_point)
        .collect();
    pts.sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db));
    pts
}
