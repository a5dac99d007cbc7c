//! Reports shared by every suite: titled sections of named checks, each
//! passing, failing with a witness, or undecidable below the cutoff.

use serde::Serialize;

/// Outcome of one check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Undecidable,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Undecidable => "UNDECIDABLE",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    /// Case count or value on a pass, witness on a failure, reason when
    /// undecidable.
    pub detail: String,
}

impl Check {
    pub fn pass(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Check { name: name.into(), status: Status::Pass, detail: detail.into() }
    }

    pub fn fail(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Check { name: name.into(), status: Status::Fail, detail: detail.into() }
    }

    pub fn undecidable(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Check { name: name.into(), status: Status::Undecidable, detail: detail.into() }
    }

    /// Pass when `witness` is `None`, fail with the witness otherwise.
    pub fn from_witness(name: impl Into<String>, cases: usize, witness: Option<String>) -> Self {
        match witness {
            None => Check::pass(name, format!("{cases} cases")),
            Some(w) => Check::fail(name, w),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Section {
    pub title: String,
    /// Informational lines such as tables and computed values.
    pub lines: Vec<String>,
    pub checks: Vec<Check>,
}

impl Section {
    pub fn new(title: impl Into<String>) -> Self {
        Section { title: title.into(), ..Default::default() }
    }

    pub fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Report {
    pub title: String,
    pub sections: Vec<Section>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Report { title: title.into(), sections: vec![] }
    }

    pub fn push(&mut self, s: Section) {
        self.sections.push(s);
    }

    pub fn checks(&self) -> impl Iterator<Item = &Check> {
        self.sections.iter().flat_map(|s| &s.checks)
    }

    /// 1 if any check failed, else 3 if any is undecidable, else 0.
    pub fn exit_code(&self) -> i32 {
        if self.checks().any(|c| c.status == Status::Fail) {
            1
        } else if self.checks().any(|c| c.status == Status::Undecidable) {
            3
        } else {
            0
        }
    }

    pub fn passed(&self) -> bool {
        self.exit_code() == 0
    }

    pub fn render_text(&self) -> String {
        let mut out = format!("== {} ==\n", self.title);
        for s in &self.sections {
            out.push_str(&format!("\n[{}]\n", s.title));
            for l in &s.lines {
                out.push_str(&format!("  {l}\n"));
            }
            for c in &s.checks {
                out.push_str(&format!("  {:<11} {}: {}\n", c.status.label(), c.name, c.detail));
            }
        }
        let total = self.checks().count();
        let failed = self.checks().filter(|c| c.status == Status::Fail).count();
        let undecided = self.checks().filter(|c| c.status == Status::Undecidable).count();
        out.push_str(&format!("\n{total} checks, {failed} failed, {undecided} undecidable\n"));
        out
    }

    pub fn render_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_code_prefers_failure_over_undecidable() {
        let mut r = Report::new("t");
        let mut s = Section::new("s");
        s.check(Check::pass("a", "1 cases"));
        r.push(s.clone());
        assert_eq!(r.exit_code(), 0);
        s.check(Check::undecidable("b", "below cutoff"));
        r.push(s.clone());
        assert_eq!(r.exit_code(), 3);
        s.check(Check::fail("c", "witness"));
        r.push(s);
        assert_eq!(r.exit_code(), 1);
    }

    #[test]
    fn text_and_json_are_deterministic() {
        let mut r = Report::new("t");
        let mut s = Section::new("s");
        s.line("x = 1");
        s.check(Check::from_witness("a", 3, None));
        s.check(Check::from_witness("b", 3, Some("at (e1)".into())));
        r.push(s);
        assert_eq!(r.render_text(), r.clone().render_text());
        assert!(r.render_text().contains("FAIL        b: at (e1)"));
        let v: serde_json::Value = serde_json::from_str(&r.render_json()).unwrap();
        assert_eq!(v["sections"][0]["checks"][1]["status"], "fail");
    }
}
