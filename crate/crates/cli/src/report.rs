use std::io::Write;

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// Everything a subcommand produces. `inputs` and `outputs` go into the
/// canonical report; `text` and `rows` are the other renderings.
pub struct Outcome {
    pub command: String,
    pub inputs: Value,
    pub outputs: Value,
    pub seed: Option<u64>,
    pub text: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub exit: i32,
}

impl Outcome {
    pub fn new(command: &str, inputs: Value, outputs: impl Serialize) -> Self {
        Outcome {
            command: command.to_string(),
            inputs,
            outputs: serde_json::to_value(outputs).expect("outputs serialize"),
            seed: None,
            text: String::new(),
            header: Vec::new(),
            rows: Vec::new(),
            exit: 0,
        }
    }

    pub fn text(mut self, text: String) -> Self {
        self.text = text;
        self
    }

    pub fn table(mut self, header: Vec<&'static str>, rows: Vec<Vec<String>>) -> Self {
        self.header = header;
        self.rows = rows;
        self
    }
}

/// Field order is fixed by the struct; nested maps are key-sorted, so equal
/// inputs serialize to equal bytes. `timing_ms` is only present on request.
#[derive(Serialize)]
struct Report<'a> {
    schema_version: u32,
    command: &'a str,
    inputs: &'a Value,
    outputs: &'a Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timing_ms: Option<u128>,
}

pub fn canonical_json(outcome: &Outcome, timing_ms: Option<u128>) -> String {
    serde_json::to_string(&Report {
        schema_version: SCHEMA_VERSION,
        command: &outcome.command,
        inputs: &outcome.inputs,
        outputs: &outcome.outputs,
        seed: outcome.seed,
        timing_ms,
    })
    .expect("report serializes")
}

pub fn emit(
    out: &mut impl Write,
    outcome: &Outcome,
    format: Format,
    timing_ms: Option<u128>,
) -> std::io::Result<()> {
    match format {
        Format::Json => writeln!(out, "{}", canonical_json(outcome, timing_ms)),
        Format::Text => {
            write!(out, "{}", outcome.text)?;
            if let Some(t) = timing_ms {
                writeln!(out, "time: {t} ms")?;
            }
            Ok(())
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&outcome.header)?;
            for row in &outcome.rows {
                w.write_record(row)?;
            }
            w.flush()
        }
    }
}

pub fn join<T: ToString>(xs: &[T], sep: &str) -> String {
    xs.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(sep)
}
