//! Line-oriented validation reports with a CSV twin.

use std::fmt;

/// One checked identity.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub target: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub pass: bool,
}

impl CheckLine {
    /// Two-sided check: |estimate − target| ≤ z·std_error.
    pub fn within_se(name: &str, target: f64, estimate: f64, std_error: f64, z: f64) -> Self {
        CheckLine {
            name: name.to_string(),
            target,
            estimate,
            std_error,
            pass: (estimate - target).abs() <= z * std_error,
        }
    }

    /// One-sided check: estimate ≤ target + z·std_error.
    pub fn at_most(name: &str, target: f64, estimate: f64, std_error: f64, z: f64) -> Self {
        CheckLine {
            name: name.to_string(),
            target,
            estimate,
            std_error,
            pass: estimate <= target + z * std_error,
        }
    }

    /// Relative check: |estimate − target| ≤ tol·|target|.
    pub fn relative(name: &str, target: f64, estimate: f64, std_error: f64, tol: f64) -> Self {
        CheckLine {
            name: name.to_string(),
            target,
            estimate,
            std_error,
            pass: (estimate - target).abs() <= tol * target.abs(),
        }
    }

    pub fn verdict(&self) -> &'static str {
        if self.pass {
            "PASS"
        } else {
            "FAIL"
        }
    }
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} target={:.6e} estimate={:.6e} std_error={:.3e} {}",
            self.name,
            self.target,
            self.estimate,
            self.std_error,
            self.verdict()
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub lines: Vec<CheckLine>,
}

pub const REPORT_CSV_HEADER: &str = "name,target,estimate,std_error,verdict";

impl Report {
    pub fn push(&mut self, line: CheckLine) {
        self.lines.push(line);
    }

    pub fn extend(&mut self, other: Report) {
        self.lines.extend(other.lines);
    }

    /// Prepends `prefix/` to every line name.
    pub fn prefixed(mut self, prefix: &str) -> Self {
        for l in &mut self.lines {
            l.name = format!("{prefix}/{}", l.name);
        }
        self
    }

    pub fn all_pass(&self) -> bool {
        self.lines.iter().all(|l| l.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckLine> {
        self.lines.iter().filter(|l| !l.pass)
    }

    pub fn to_text(&self) -> String {
        self.lines.iter().map(|l| format!("{l}\n")).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(REPORT_CSV_HEADER);
        out.push('\n');
        for l in &self.lines {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                l.name,
                l.target,
                l.estimate,
                l.std_error,
                l.verdict()
            ));
        }
        out
    }
}
