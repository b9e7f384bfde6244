use serde::Serialize;
use serde_json::Value;

pub const TOOL: &str = "ocnsim";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Machine-readable result of one command.
///
/// `verdict` is `simulated`, `not-simulated`, `unknown`, `ok`, `failed` or `error`; the exit
/// code is derived from it by [`ResultRecord::exit_code`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRecord {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub query: Value,
    pub verdict: String,
    pub payload: Value,
    pub stats: Value,
}

impl ResultRecord {
    pub fn new(command: &str, query: Value, verdict: &str, payload: Value, stats: Value) -> Self {
        ResultRecord { tool: TOOL, version: VERSION, command: command.into(), query, verdict: verdict.into(), payload, stats }
    }

    pub fn error(command: &str, message: String) -> Self {
        ResultRecord::new(command, Value::Null, "error", Value::String(message), Value::Null)
    }

    pub fn exit_code(&self) -> i32 {
        match self.verdict.as_str() {
            "simulated" | "ok" => 0,
            "not-simulated" | "failed" => 1,
            "unknown" => 2,
            _ => 3,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("records serialize")
    }
}
