//! CSV readers and writers for the pipeline's file formats.
//!
//! * input: header `user_id,partition`, one contribution per row;
//! * selection output: one partition key per line, no header;
//! * release output: header `partition,noisy_count`.
//!
//! Fields are quoted per RFC 4180 when needed. Output is sorted by key.

use std::collections::BTreeSet;
use std::io::{Read, Write};

use crate::error::{PipelineError, Result};
use crate::histogram::{HistogramBuilder, IngestOptions, PartitionHistogram};
use crate::release::ReleaseRecord;

const INPUT_HEADER: [&str; 2] = ["user_id", "partition"];
const RELEASE_HEADER: [&str; 2] = ["partition", "noisy_count"];

fn line_of(record: &csv::ByteRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

/// Streams `user_id,partition` rows into a histogram.
pub fn read_histogram<R: Read>(reader: R, options: IngestOptions) -> Result<PartitionHistogram> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = csv.byte_headers()?.clone();
    let names: Vec<&[u8]> = header.iter().collect();
    let expected: Vec<&[u8]> = INPUT_HEADER.iter().map(|s| s.as_bytes()).collect();
    if names != expected {
        return Err(PipelineError::Parse {
            line: 1,
            message: format!(
                "expected header `user_id,partition`, got `{}`",
                String::from_utf8_lossy(header.as_slice())
            ),
        });
    }
    let mut builder = HistogramBuilder::new(options)?;
    let mut record = csv::ByteRecord::new();
    loop {
        match csv.read_byte_record(&mut record) {
            Ok(true) => {}
            Ok(false) => break,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                return Err(PipelineError::Parse {
                    line,
                    message: e.to_string(),
                });
            }
        }
        let line = line_of(&record);
        if record.len() != 2 {
            return Err(PipelineError::Parse {
                line,
                message: format!("expected 2 fields, found {}", record.len()),
            });
        }
        builder.push(&record[0], &record[1], line)?;
    }
    Ok(builder.finish())
}

/// Reads a key list in the selection-output format.
pub fn read_keys<R: Read>(reader: R) -> Result<BTreeSet<Vec<u8>>> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(reader);
    let mut keys = BTreeSet::new();
    for record in csv.byte_records() {
        let record = record?;
        if record.len() != 1 || record[0].is_empty() {
            return Err(PipelineError::Parse {
                line: line_of(&record),
                message: "expected one nonempty partition key per line".into(),
            });
        }
        keys.insert(record[0].to_vec());
    }
    Ok(keys)
}

pub fn write_keys<W: Write, K: AsRef<[u8]>>(writer: W, keys: &[K]) -> Result<()> {
    let mut csv = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(writer);
    for key in keys {
        csv.write_record([key.as_ref()])?;
    }
    csv.flush()?;
    Ok(())
}

pub fn write_release<W: Write>(writer: W, records: &[ReleaseRecord]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(RELEASE_HEADER)?;
    for r in records {
        let count = r.noisy_count.map(|c| c.to_string()).unwrap_or_default();
        csv.write_record([r.partition.as_slice(), count.as_bytes()])?;
    }
    csv.flush()?;
    Ok(())
}

pub fn read_release<R: Read>(reader: R) -> Result<Vec<ReleaseRecord>> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let header = csv.byte_headers()?.clone();
    if header.iter().collect::<Vec<_>>() != [b"partition".as_slice(), b"noisy_count".as_slice()] {
        return Err(PipelineError::Parse {
            line: 1,
            message: "expected header `partition,noisy_count`".into(),
        });
    }
    let mut out = Vec::new();
    for record in csv.byte_records() {
        let record = record?;
        let line = line_of(&record);
        let raw = std::str::from_utf8(&record[1]).map_err(|e| PipelineError::Parse {
            line,
            message: e.to_string(),
        })?;
        let noisy_count = if raw.is_empty() {
            None
        } else {
            Some(raw.parse::<i64>().map_err(|e| PipelineError::Parse {
                line,
                message: format!("bad noisy_count `{raw}`: {e}"),
            })?)
        };
        out.push(ReleaseRecord {
            partition: record[0].to_vec(),
            noisy_count,
        });
    }
    Ok(out)
}
