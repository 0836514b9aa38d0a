use std::fmt;

/// Outcome of one named law checked exhaustively over a finite range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawOutcome {
    pub law: String,
    pub cases: usize,
    /// First counterexample found, rendered as a short description.
    pub counterexample: Option<String>,
}

impl LawOutcome {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// A deterministic report from a law checker: one outcome per law, in the
/// order the laws were checked. Violations are data, not errors.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LawReport {
    pub subject: String,
    pub outcomes: Vec<LawOutcome>,
}

impl LawReport {
    pub fn new(subject: impl Into<String>) -> Self {
        LawReport {
            subject: subject.into(),
            outcomes: Vec::new(),
        }
    }

    pub fn record(&mut self, law: impl Into<String>, cases: usize, counterexample: Option<String>) {
        self.outcomes.push(LawOutcome {
            law: law.into(),
            cases,
            counterexample,
        });
    }

    /// Runs `check` over `cases`, recording the first failure.
    pub fn check_all<T, I>(
        &mut self,
        law: impl Into<String>,
        cases: I,
        mut check: impl FnMut(&T) -> Option<String>,
    ) where
        I: IntoIterator<Item = T>,
    {
        let mut count = 0;
        let mut failure = None;
        for case in cases {
            count += 1;
            if failure.is_none() {
                failure = check(&case);
            }
        }
        self.record(law, count, failure);
    }

    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(LawOutcome::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &LawOutcome> {
        self.outcomes.iter().filter(|o| !o.passed())
    }

    /// Plain-text rendering, one line per law.
    pub fn render_text(&self) -> String {
        let mut out = format!("subject: {}\n", self.subject);
        for o in &self.outcomes {
            match &o.counterexample {
                None => out.push_str(&format!("ok   {} ({} cases)\n", o.law, o.cases)),
                Some(ce) => out.push_str(&format!("FAIL {} ({} cases): {}\n", o.law, o.cases, ce)),
            }
        }
        out
    }

    /// S-expression rendering.
    pub fn render_sexp(&self) -> String {
        let mut out = format!("(report {}", crate::sexp::quote(&self.subject));
        for o in &self.outcomes {
            match &o.counterexample {
                None => out.push_str(&format!(
                    " (law {} ok {})",
                    crate::sexp::quote(&o.law),
                    o.cases
                )),
                Some(ce) => out.push_str(&format!(
                    " (law {} fail {} {})",
                    crate::sexp::quote(&o.law),
                    o.cases,
                    crate::sexp::quote(ce)
                )),
            }
        }
        out.push(')');
        out
    }
}

impl fmt::Display for LawReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_text())
    }
}
