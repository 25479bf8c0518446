use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

/// Per-run summary written next to the bundle as JSON.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub pipeline: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    /// `(stage, seconds)` in execution order.
    pub stages: Vec<(String, f64)>,
    pub wall_seconds: f64,
    pub counts: BTreeMap<String, u64>,
    pub metrics: BTreeMap<String, f64>,
    #[serde(skip)]
    started: Option<Instant>,
    #[serde(skip)]
    mark: Option<Instant>,
}

impl RunReport {
    pub fn new(pipeline: &str) -> Self {
        let now = Instant::now();
        Self {
            pipeline: pipeline.to_owned(),
            parameters: BTreeMap::new(),
            stages: Vec::new(),
            wall_seconds: 0.0,
            counts: BTreeMap::new(),
            metrics: BTreeMap::new(),
            started: Some(now),
            mark: Some(now),
        }
    }

    pub fn param(&mut self, name: &str, value: impl Serialize) -> &mut Self {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.parameters.insert(name.to_owned(), v);
        self
    }

    pub fn count(&mut self, name: &str, value: usize) -> &mut Self {
        self.counts.insert(name.to_owned(), value as u64);
        self
    }

    pub fn metric(&mut self, name: &str, value: f64) -> &mut Self {
        self.metrics.insert(name.to_owned(), value);
        self
    }

    /// Closes the stage that began at the previous mark.
    pub fn stage(&mut self, name: &str) {
        let now = Instant::now();
        let since = self.mark.map_or(0.0, |m| (now - m).as_secs_f64());
        self.stages.push((name.to_owned(), since));
        self.mark = Some(now);
        self.wall_seconds = self.started.map_or(0.0, |s| (now - s).as_secs_f64());
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
