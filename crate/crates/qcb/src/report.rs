//! One row of a verification report.

use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub id: String,
    /// The identity being checked, written out.
    pub identity: String,
    pub r: usize,
    pub seed: Option<u64>,
    pub samples: usize,
    pub passed: bool,
    pub counterexample: Option<String>,
    /// Worst residual / measured quantity, for numeric checks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn new(id: &str, identity: &str, r: usize, seed: Option<u64>, samples: usize, failure: Option<String>) -> Self {
        Check {
            id: id.into(),
            identity: identity.into(),
            r,
            seed,
            samples,
            passed: failure.is_none(),
            counterexample: failure,
            value: None,
            tol: None,
            note: None,
        }
    }

    /// Numeric check: passes iff `value ≤ tol`.
    pub fn bound(id: &str, identity: &str, seed: Option<u64>, samples: usize, value: f64, tol: f64, witness: Option<String>) -> Self {
        let ok = value <= tol && value.is_finite();
        let mut c = Check::new(id, identity, 0, seed, samples, None);
        c.passed = ok;
        c.counterexample = if ok { None } else { Some(witness.unwrap_or_else(|| format!("{value:e} > {tol:e}"))) };
        c.value = Some(value);
        c.tol = Some(tol);
        c
    }

    pub fn with_r(mut self, r: usize) -> Self {
        self.r = r;
        self
    }

    pub fn with_note(mut self, note: &str) -> Self {
        self.note = Some(note.into());
        self
    }
}
