use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    Error,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 1,
            Outcome::Error => 2,
        }
    }
}

/// One verified statement and whatever data backs it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub data: Value,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, data: Value) -> Check {
        Check {
            name: name.into(),
            passed,
            data,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub outcome: Outcome,
    pub details: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub seed: u64,
    pub version: &'static str,
}

impl Report {
    /// Outcome is fail exactly when some check failed.
    pub fn from_checks(command: &str, seed: u64, details: Vec<Check>) -> Report {
        let outcome = if details.iter().all(|c| c.passed) {
            Outcome::Pass
        } else {
            Outcome::Fail
        };
        Report {
            command: command.to_owned(),
            outcome,
            details,
            error: None,
            seed,
            version: env!("CARGO_PKG_VERSION"),
        }
    }

    pub fn error(command: &str, seed: u64, message: String) -> Report {
        Report {
            command: command.to_owned(),
            outcome: Outcome::Error,
            details: Vec::new(),
            error: Some(message),
            seed,
            version: env!("CARGO_PKG_VERSION"),
        }
    }

    pub fn to_json(&self) -> String {
        crate::format::to_canonical_json(self)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} [{}] seed={} v{}\n", self.command, outcome_word(self.outcome), self.seed, self.version);
        if let Some(e) = &self.error {
            out.push_str(&format!("error: {e}\n"));
        }
        for c in &self.details {
            let mark = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("  {mark} {}", c.name));
            if !c.data.is_null() {
                out.push_str(&format!("  {}", c.data));
            }
            out.push('\n');
        }
        out
    }
}

fn outcome_word(o: Outcome) -> &'static str {
    match o {
        Outcome::Pass => "pass",
        Outcome::Fail => "fail",
        Outcome::Error => "error",
    }
}
