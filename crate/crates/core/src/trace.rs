//! Request-trace and decision-CSV file formats.
//!
//! A trace has one request per line, `t,kind,content_id,size_bits,objective,qos_bps`,
//! with empty fields where a column does not apply. Lines starting with `#`
//! are ignored, as is an optional header line whose first field is `t`.

use std::io::{Read, Write};

use thiserror::Error;

use crate::engine::{DecisionRecord, Request, RequestKind};
use crate::offload::ComputeTask;
use crate::optimizer::Objective;
use crate::table::format_float;

pub const TRACE_COLUMNS: [&str; 6] = [
    "t",
    "kind",
    "content_id",
    "size_bits",
    "objective",
    "qos_bps",
];

pub const DECISION_HEADER: &str = "t,kind,mode,action,objective_value,latency_s,energy_J";

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace line {line}: {reason}")]
    Parse { line: u64, reason: String },

    #[error("trace i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

fn optional_f64(field: &str, name: &str) -> Result<Option<f64>, String> {
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse::<f64>()
        .map(Some)
        .map_err(|_| format!("column `{name}`: `{field}` is not a number"))
}

fn parse_record(record: &csv::StringRecord, cycles_per_bit: f64) -> Result<Request, String> {
    if record.len() != TRACE_COLUMNS.len() {
        return Err(format!(
            "expected {} fields, found {}",
            TRACE_COLUMNS.len(),
            record.len()
        ));
    }
    let t = optional_f64(&record[0], "t")?.ok_or("column `t` is empty")?;
    let kind: RequestKind = record[1].parse()?;
    let content_id = (!record[2].is_empty()).then(|| record[2].to_owned());
    let size_bits = optional_f64(&record[3], "size_bits")?;
    let qos_bps = optional_f64(&record[5], "qos_bps")?;
    let objective = if record[4].is_empty() {
        None
    } else {
        Some(Objective::parse(&record[4], qos_bps)?)
    };

    let (payload_bits, task) = match kind {
        RequestKind::TaskOffloading => match size_bits {
            Some(size) => (
                None,
                Some(ComputeTask::new(size, cycles_per_bit).map_err(|e| e.to_string())?),
            ),
            None => (None, None),
        },
        _ => (size_bits, None),
    };
    let qos_min_bps = if kind == RequestKind::TaskOffloading {
        qos_bps
    } else {
        None
    };
    Ok(Request {
        t,
        kind,
        content_id,
        payload_bits,
        task,
        objective,
        qos_min_bps,
    })
}

/// Parses a trace; tasks take `cycles_per_bit` from the scenario.
pub fn read_trace<R: Read>(reader: R, cycles_per_bit: f64) -> Result<Vec<Request>, TraceError> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut requests = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if i == 0 && record.get(0) == Some("t") {
            continue;
        }
        if record.iter().all(str::is_empty) {
            continue;
        }
        requests.push(
            parse_record(&record, cycles_per_bit)
                .map_err(|reason| TraceError::Parse { line, reason })?,
        );
    }
    Ok(requests)
}

pub fn parse_trace(text: &str, cycles_per_bit: f64) -> Result<Vec<Request>, TraceError> {
    read_trace(text.as_bytes(), cycles_per_bit)
}

fn optional(value: Option<f64>) -> String {
    value.map(format_float).unwrap_or_default()
}

/// Writes decisions in the fixed CSV layout.
pub fn write_decisions<W: Write>(mut out: W, records: &[DecisionRecord]) -> std::io::Result<()> {
    writeln!(out, "{DECISION_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            format_float(r.t),
            r.kind,
            r.decision.mode.map(|m| m.as_str()).unwrap_or(""),
            r.decision.action,
            format_float(r.decision.objective_value),
            optional(r.decision.latency_s),
            optional(r.decision.energy_j),
        )?;
    }
    Ok(())
}

pub fn decisions_csv(records: &[DecisionRecord]) -> String {
    let mut buf = Vec::new();
    write_decisions(&mut buf, records).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("csv output is ascii")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_kind() {
        let text = "\
# comment
t,kind,content_id,size_bits,objective,qos_bps
0,communication,,1e6,min_energy,5e7
1.5,content_delivery,movie-7,8e6,,
2,caching,movie-9,,,
3,task_offloading,,2e6,,1e8
";
        let trace = parse_trace(text, 4.0).unwrap();
        assert_eq!(trace.len(), 4);
        assert_eq!(
            trace[0].objective,
            Some(Objective::MinEnergySubjectToQos { qos_min_bps: 5e7 })
        );
        assert_eq!(trace[1].content_id.as_deref(), Some("movie-7"));
        assert_eq!(trace[1].payload_bits, Some(8e6));
        assert_eq!(trace[2].payload_bits, None);
        assert_eq!(trace[3].task, Some(ComputeTask::new(2e6, 4.0).unwrap()));
        assert_eq!(trace[3].qos_min_bps, Some(1e8));
        assert!(trace.iter().all(|r| r.validate().is_ok()));
    }

    #[test]
    fn reports_line_of_bad_field() {
        let text = "0,communication,,1e6,max_capacity,\n1,teleport,,,,\n";
        match parse_trace(text, 4.0) {
            Err(TraceError::Parse { line, reason }) => {
                assert_eq!(line, 2);
                assert!(reason.contains("teleport"));
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_trace("0,communication,,abc,max_capacity,\n", 4.0).is_err());
        assert!(parse_trace("0,communication,,1,min_energy,\n", 4.0).is_err());
        assert!(parse_trace("0,communication\n", 4.0).is_err());
    }
}
