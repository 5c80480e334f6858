//! Pass/fail reports with residual witnesses.

use serde::{Deserialize, Serialize};

/// A failing (or informational) witness: the generators involved and the
/// canonically rendered residual.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub items: Vec<String>,
    pub residual: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub check: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<Witness>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<Report>,
}

impl Report {
    pub fn pass(check: impl Into<String>) -> Self {
        Report {
            check: check.into(),
            passed: true,
            witnesses: Vec::new(),
            notes: Vec::new(),
            children: Vec::new(),
        }
    }

    /// Records a failing witness.
    pub fn fail<I, S>(&mut self, items: I, residual: impl Into<String>)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.passed = false;
        self.witnesses.push(Witness {
            items: items.into_iter().map(Into::into).collect(),
            residual: residual.into(),
        });
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    /// Passes iff every child passes.
    pub fn aggregate(check: impl Into<String>, children: Vec<Report>) -> Self {
        let mut r = Report::pass(check);
        r.passed = children.iter().all(|c| c.passed);
        r.children = children;
        r
    }

    /// Finds a check by name, searching depth-first.
    pub fn find(&self, check: &str) -> Option<&Report> {
        if self.check == check {
            return Some(self);
        }
        self.children.iter().find_map(|c| c.find(check))
    }

    /// Indented human-readable rendering.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.write_text(0, &mut out);
        out
    }

    fn write_text(&self, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        out.push_str(&format!(
            "{pad}[{}] {}\n",
            if self.passed { "PASS" } else { "FAIL" },
            self.check
        ));
        for w in &self.witnesses {
            out.push_str(&format!("{pad}    ({}) residual: {}\n", w.items.join(", "), w.residual));
        }
        for n in &self.notes {
            out.push_str(&format!("{pad}    note: {n}\n"));
        }
        for c in &self.children {
            c.write_text(depth + 1, out);
        }
    }
}
