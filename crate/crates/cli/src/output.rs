use serde::Serialize;
use serde_json::{json, Value};

use crate::{GlobalOpts, OutputFormat};

pub const SCHEMA: u32 = 1;

#[derive(Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: &'static str,
    pub config: Value,
    pub result: Value,
}

impl Report {
    pub fn new(
        command: &'static str,
        args: &impl Serialize,
        g: &GlobalOpts,
        result: Value,
    ) -> Self {
        let mut config = serde_json::to_value(args).unwrap_or(Value::Null);
        // the subcommand enum serializes as {"name": {...}}
        if let Value::Object(map) = &mut config {
            if let Some((_, inner)) = map.iter().next() {
                config = inner.clone();
            }
        }
        let config = json!({
            "args": config,
            "seed": g.seed,
            "budget_ms": g.budget_ms,
            "output": g.output,
        });
        Self {
            schema: SCHEMA,
            command,
            config,
            result,
        }
    }
}

pub fn emit(report: &Report, format: OutputFormat) {
    match format {
        OutputFormat::Json => {
            println!(
                "{}",
                serde_json::to_string_pretty(report).expect("report serializes")
            );
        }
        OutputFormat::Text => {
            println!("{} (schema {})", report.command, report.schema);
            let mut lines = Vec::new();
            flatten("", &report.result, &mut lines);
            for (k, v) in lines {
                println!("  {k}: {v}");
            }
            println!("  config.seed: {}", report.config["seed"]);
        }
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&key(k), v, out);
            }
        }
        Value::Array(items) if items.iter().all(|i| !i.is_object() && !i.is_array()) => {
            let joined: Vec<String> = items.iter().map(scalar).collect();
            out.push((prefix.to_string(), joined.join(" ")));
        }
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                flatten(&key(&i.to_string()), item, out);
            }
        }
        other => out.push((prefix.to_string(), scalar(other))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
