use std::fs;
use std::io::Write;
use std::path::Path;

use gpi_core::report::{CheckReport, Outcome};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub indeterminate: usize,
}

impl Summary {
    pub fn of(checks: &[CheckReport]) -> Self {
        let mut s = Summary::default();
        for c in checks {
            match c.outcome() {
                Outcome::Pass => s.pass += 1,
                Outcome::Fail => s.fail += 1,
                Outcome::Indeterminate => s.indeterminate += 1,
            }
        }
        s
    }

    pub fn exit_code(&self) -> i32 {
        if self.fail > 0 {
            1
        } else if self.indeterminate > 0 {
            2
        } else {
            0
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub run: RunConfig,
    pub checks: Vec<CheckReport>,
    pub summary: Summary,
    /// `null` unless `--timing` was given, so that reports stay byte-identical.
    pub timing: Option<Timing>,
}

impl Report {
    pub fn new(run: RunConfig, checks: Vec<CheckReport>, timing: Option<Timing>) -> Self {
        let summary = Summary::of(&checks);
        Self {
            schema: SCHEMA_VERSION,
            run,
            checks,
            summary,
            timing,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn emit(&self, out: Option<&Path>) -> Result<(), CliError> {
        let text = self.to_json();
        match out {
            Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            }),
            None => std::io::stdout()
                .lock()
                .write_all(text.as_bytes())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                }),
        }
    }
}
