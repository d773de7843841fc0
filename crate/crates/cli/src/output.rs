//! Table sinks. CSV rows stream out as they arrive, after a `#` block that
//! echoes the canonical config; JSON is assembled and written at the end.

use crate::config::{Format, RunConfig};
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use std::io::{self, Write};
use std::sync::mpsc;

pub struct Sink {
    format: Format,
    config: RunConfig,
    columns: Vec<String>,
    csv: Option<csv::Writer<Box<dyn Write>>>,
    raw: Option<Box<dyn Write>>,
    rows: Vec<Value>,
    notes: Map<String, Value>,
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

impl Sink {
    pub fn new(config: &RunConfig, out: Box<dyn Write>, columns: &[&str]) -> io::Result<Self> {
        let columns: Vec<String> = columns.iter().map(|c| c.to_string()).collect();
        let mut sink = Sink {
            format: config.format,
            config: config.clone(),
            columns,
            csv: None,
            raw: None,
            rows: Vec::new(),
            notes: Map::new(),
        };
        match config.format {
            Format::Csv => {
                let mut out = out;
                writeln!(out, "# meanfield-spectra {}", env!("CARGO_PKG_VERSION"))?;
                for line in config.canonical().lines() {
                    writeln!(out, "{}", format!("# {line}").trim_end())?;
                }
                let mut w = csv::WriterBuilder::new().from_writer(out);
                w.write_record(&sink.columns)?;
                w.flush()?;
                sink.csv = Some(w);
            }
            Format::Json => sink.raw = Some(out),
        }
        Ok(sink)
    }

    pub fn row(&mut self, cells: Vec<Value>) -> io::Result<()> {
        debug_assert_eq!(cells.len(), self.columns.len());
        match &mut self.csv {
            Some(w) => {
                w.write_record(cells.iter().map(cell))?;
                w.flush()
            }
            None => {
                let obj: Map<String, Value> = self.columns.iter().cloned().zip(cells).collect();
                self.rows.push(Value::Object(obj));
                Ok(())
            }
        }
    }

    /// Attach a summary; in CSV it becomes a trailing `# key: json` line.
    pub fn note(&mut self, key: &str, value: Value) {
        self.notes.insert(key.to_string(), value);
    }

    pub fn finish(mut self) -> io::Result<()> {
        match self.format {
            Format::Csv => {
                let w = self.csv.take().expect("csv sink");
                let mut out = w.into_inner().map_err(|e| e.into_error())?;
                for (k, v) in &self.notes {
                    writeln!(out, "# {k}: {v}")?;
                }
                out.flush()
            }
            Format::Json => {
                let doc = json!({
                    "version": env!("CARGO_PKG_VERSION"),
                    "config": self.config,
                    "columns": self.columns,
                    "rows": self.rows,
                    "notes": self.notes,
                });
                let mut out = self.raw.take().expect("json sink");
                serde_json::to_writer_pretty(&mut out, &doc)?;
                writeln!(out)?;
                out.flush()
            }
        }
    }
}

/// Run `work` over `items` on the rayon pool and hand results to `emit` in
/// input order, as soon as each prefix is complete.
pub fn ordered<I, T, E>(items: &[I], work: impl Fn(&I) -> T + Sync, mut emit: impl FnMut(T) -> Result<(), E>) -> Result<(), E>
where
    I: Sync,
    T: Send,
{
    let (tx, rx) = mpsc::channel();
    std::thread::scope(|s| {
        let work = &work;
        s.spawn(move || {
            items.par_iter().enumerate().for_each_with(tx, |tx, (i, item)| {
                // the receiver only disappears after an emit error
                let _ = tx.send((i, work(item)));
            })
        });
        let mut pending = BTreeMap::new();
        let mut next = 0;
        for (i, v) in rx {
            pending.insert(i, v);
            while let Some(v) = pending.remove(&next) {
                emit(v)?;
                next += 1;
            }
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordered_keeps_input_order() {
        let items: Vec<u64> = (0..64).rev().collect();
        let mut seen = Vec::new();
        ordered(&items, |&x| {
            std::thread::sleep(std::time::Duration::from_micros(x * 50));
            x * 2
        }, |v| {
            seen.push(v);
            Ok::<(), ()>(())
        })
        .unwrap();
        assert_eq!(seen, items.iter().map(|x| x * 2).collect::<Vec<_>>());
    }
}
