use std::fs;
use std::io::{self, Write};

use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{Cli, Format};
use crate::Failure;

/// Settings needed to rerun a command and get the same answer.
#[derive(Debug, Clone, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub threads: usize,
    pub max_seconds: Option<f64>,
    pub max_nodes: Option<u64>,
    pub long_run: bool,
    pub strict: bool,
}

impl Header {
    fn line(&self, status: Status) -> String {
        let opt = |v: Option<String>| v.unwrap_or_else(|| "-".into());
        format!(
            "# {} {} command={} status={} seed={} threads={} max_seconds={} max_nodes={} long_run={} strict={}",
            self.tool,
            self.version,
            self.command,
            status.as_str(),
            self.seed,
            self.threads,
            opt(self.max_seconds.map(|s| s.to_string())),
            opt(self.max_nodes.map(|s| s.to_string())),
            self.long_run,
            self.strict
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// A budget ran out; the answer is a bound rather than exact.
    Bounded,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Bounded => "bounded",
        }
    }
}

/// One command's result in every output format.
pub struct Report {
    pub status: Status,
    pub json: Value,
    pub text: String,
    pub csv: String,
    /// The text form is a data file (an .lp model, raw samples): keep the
    /// header out of it and print it on standard error instead.
    pub raw_text: bool,
}

pub fn emit(cli: &Cli, header: &Header, report: Report) -> Result<(), Failure> {
    let status = report.status;
    let body = match cli.common.format {
        Format::Json => {
            let doc = json!({
                "header": header,
                "status": status.as_str(),
                "result": report.json,
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
            s.push('\n');
            s
        }
        Format::Csv => format!("{}\n{}", header.line(status), report.csv),
        Format::Text if report.raw_text => {
            eprintln!("{}", header.line(status));
            report.text
        }
        Format::Text => format!("{}\n{}", header.line(status), report.text),
    };
    match &cli.common.out {
        Some(path) => fs::write(path, body)?,
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}
