//! Bound-versus-measurement records shared by every verifier.

use std::fmt::{self, Write as _};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// `measured <= bound + tolerance`
    AtMost,
    /// `measured >= bound - tolerance`
    AtLeast,
    /// Estimated quantity with no bound attached; always passes.
    Info,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
            Relation::Info => "info",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub relation: Relation,
    pub bound: f64,
    pub measured: f64,
    pub se: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, relation: Relation, measured: f64, bound: f64, tolerance: f64) -> Self {
        let pass = match relation {
            Relation::AtMost => measured <= bound + tolerance,
            Relation::AtLeast => measured >= bound - tolerance,
            Relation::Info => true,
        };
        Self { name: name.into(), relation, bound, measured, se: None, tolerance, pass, detail: String::new() }
    }

    pub fn with_se(mut self, se: f64) -> Self {
        self.se = Some(se);
        self
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerificationReport {
    checks: Vec<Check>,
    notes: Vec<String>,
}

impl VerificationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, check: Check) -> &mut Check {
        self.checks.push(check);
        self.checks.last_mut().expect("just pushed")
    }

    pub fn at_most(&mut self, name: impl Into<String>, measured: f64, bound: f64, tolerance: f64) -> &mut Check {
        self.push(Check::new(name, Relation::AtMost, measured, bound, tolerance))
    }

    pub fn at_least(&mut self, name: impl Into<String>, measured: f64, bound: f64, tolerance: f64) -> &mut Check {
        self.push(Check::new(name, Relation::AtLeast, measured, bound, tolerance))
    }

    pub fn info(&mut self, name: impl Into<String>, value: f64) -> &mut Check {
        self.push(Check::new(name, Relation::Info, value, f64::NAN, 0.0))
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
        self.notes.extend(other.notes);
    }

    pub fn checks(&self) -> &[Check] {
        &self.checks
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// One check per line: name, relation, bound, measured, se, tolerance, pass, detail.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{}\t{}\tbound={}\tmeasured={}\tse={}\ttol={}\tpass={}{}",
                c.name,
                c.relation.symbol(),
                fmt_num(c.bound),
                fmt_num(c.measured),
                c.se.map(fmt_num).unwrap_or_else(|| "-".into()),
                fmt_num(c.tolerance),
                c.pass,
                if c.detail.is_empty() { String::new() } else { format!("\t{}", c.detail) }
            );
        }
        for n in &self.notes {
            let _ = writeln!(out, "# {n}");
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,relation,bound,measured,se,tolerance,pass,detail\n");
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                csv_field(&c.name),
                c.relation.symbol(),
                fmt_num(c.bound),
                fmt_num(c.measured),
                c.se.map(fmt_num).unwrap_or_default(),
                fmt_num(c.tolerance),
                c.pass,
                csv_field(&c.detail)
            );
        }
        out
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Shortest round-trip representation; `-` for NaN.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "-".into()
    } else {
        format!("{x}")
    }
}

pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_flag_follows_relation() {
        let mut r = VerificationReport::new();
        r.at_most("a", 1.0, 1.0, 0.0);
        r.at_most("b", 1.0 + 1e-11, 1.0, 1e-10);
        r.at_least("c", 0.5, 0.6, 0.05);
        r.info("gamma", 0.3);
        assert!(!r.checks()[2].pass);
        assert_eq!(r.failures().count(), 1);
        assert!(!r.all_pass());
    }

    #[test]
    fn csv_quotes_details() {
        let mut r = VerificationReport::new();
        r.at_most("x", 0.0, 1.0, 0.0).detail = "pair (1, 2)".into();
        let csv = r.to_csv();
        assert!(csv.lines().nth(1).unwrap().ends_with("\"pair (1, 2)\""));
        assert!(r.to_text().starts_with("x\t<=\tbound=1\tmeasured=0\tse=-"));
    }
}
