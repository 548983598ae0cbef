//! Workload trace CSV: `layer_index,kind,F,C_out_or_N,spike_sum`.

use std::fs;
use std::path::Path;

use spikesim_core::partition::{TraceEntry, TraceKind, WorkloadTrace};

use crate::{CliError, Result};

pub const HEADER: &str = "layer_index,kind,F,C_out_or_N,spike_sum";

fn kind_str(kind: TraceKind) -> &'static str {
    match kind {
        TraceKind::Dense => "dense",
        TraceKind::Conv => "conv",
        TraceKind::Fc => "fc",
    }
}

pub fn encode_trace(trace: &WorkloadTrace) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for e in &trace.entries {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            e.layer_index,
            kind_str(e.kind),
            e.filter_coeffs,
            e.outputs,
            e.spike_sum
        ));
    }
    out
}

pub fn decode_trace(text: &str) -> Result<WorkloadTrace> {
    let mut entries = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line == HEADER) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(CliError::Format(format!(
                "trace line {}: expected 5 fields, got {}",
                lineno + 1,
                fields.len()
            )));
        }
        let parse = |i: usize, what: &str| -> Result<u64> {
            fields[i].trim().parse().map_err(|_| {
                CliError::Format(format!(
                    "trace line {}: bad {what} `{}`",
                    lineno + 1,
                    fields[i]
                ))
            })
        };
        let kind = match fields[1].trim() {
            "dense" => TraceKind::Dense,
            "conv" => TraceKind::Conv,
            "fc" => TraceKind::Fc,
            other => {
                return Err(CliError::Format(format!(
                    "trace line {}: unknown kind `{other}`",
                    lineno + 1
                )))
            }
        };
        entries.push(TraceEntry {
            layer_index: parse(0, "layer index")? as usize,
            kind,
            filter_coeffs: parse(2, "filter coefficient count")?,
            outputs: parse(3, "output count")?,
            spike_sum: parse(4, "spike sum")?,
        });
    }
    if entries.is_empty() {
        return Err(CliError::Format("trace file has no entries".into()));
    }
    Ok(WorkloadTrace { entries })
}

pub fn write_trace(path: &Path, trace: &WorkloadTrace) -> Result<()> {
    fs::write(path, encode_trace(trace)).map_err(|e| CliError::io(path, e))
}

pub fn load_trace(path: &Path) -> Result<WorkloadTrace> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    decode_trace(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let trace = WorkloadTrace {
            entries: vec![
                TraceEntry {
                    layer_index: 0,
                    kind: TraceKind::Dense,
                    filter_coeffs: 9,
                    outputs: 64,
                    spike_sum: 0,
                },
                TraceEntry {
                    layer_index: 1,
                    kind: TraceKind::Conv,
                    filter_coeffs: 9,
                    outputs: 112,
                    spike_sum: 4321,
                },
                TraceEntry {
                    layer_index: 2,
                    kind: TraceKind::Fc,
                    filter_coeffs: 0,
                    outputs: 1064,
                    spike_sum: 500,
                },
            ],
        };
        let text = encode_trace(&trace);
        assert!(text.starts_with(HEADER));
        assert_eq!(decode_trace(&text).unwrap(), trace);
    }

    #[test]
    fn bad_lines_are_located() {
        let err =
            decode_trace("layer_index,kind,F,C_out_or_N,spike_sum\n0,conv,9,64\n").unwrap_err();
        assert!(err.to_string().contains("line 2"));
        let err = decode_trace("0,mystery,9,64,10\n").unwrap_err();
        assert!(err.to_string().contains("mystery"));
        assert!(decode_trace("").is_err());
    }
}
