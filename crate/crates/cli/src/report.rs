use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Reported but does not fail the run.
    Warn,
    Info,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Warn => "warn",
            Status::Info => "info",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub status: Status,
    pub measured: String,
}

/// Ordered list of checks, each with its status and measured quantity.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiagnosticReport {
    pub lines: Vec<CheckLine>,
}

impl DiagnosticReport {
    pub fn push(&mut self, name: impl Into<String>, passed: bool, measured: impl Into<String>) {
        let status = if passed { Status::Pass } else { Status::Fail };
        self.push_status(name, status, measured);
    }

    pub fn push_status(&mut self, name: impl Into<String>, status: Status, measured: impl Into<String>) {
        self.lines.push(CheckLine { name: name.into(), status, measured: measured.into() });
    }

    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.status != Status::Fail)
    }

    pub fn failures(&self) -> usize {
        self.lines.iter().filter(|l| l.status == Status::Fail).count()
    }
}

impl fmt::Display for DiagnosticReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in &self.lines {
            writeln!(f, "[{}] {}: {}", line.status, line.name, line.measured)?;
        }
        let failures = self.failures();
        if failures == 0 {
            writeln!(f, "all checks passed")
        } else {
            writeln!(f, "{failures} check(s) failed")
        }
    }
}
