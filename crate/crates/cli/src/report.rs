//! Report assembly. Keys are sorted and records follow request order, so output is byte-stable.

use serde_json::{json, Value};

use crate::runner::{Outcome, Settings, Status};
use crate::schema::FORMAT_VERSION;

pub struct Report {
    pub value: Value,
    pub worst: Status,
}

impl Report {
    pub fn build(source: &str, s: Settings, outcomes: &[Outcome], timings: bool) -> Report {
        let mut counts = [0usize; 4];
        let mut worst = Status::Ok;
        let results: Vec<Value> = outcomes
            .iter()
            .map(|o| {
                counts[o.status as usize] += 1;
                worst = worst.max(o.status);
                json!({ "index": o.index, "op": o.op, "status": o.status.as_str(), "result": o.record })
            })
            .collect();
        let mut value = json!({
            "version": FORMAT_VERSION,
            "source": source,
            "settings": { "window": s.window, "bound": s.bound },
            "summary": { "ok": counts[0], "undecided": counts[1], "mismatch": counts[2], "error": counts[3] },
            "results": results,
        });
        if timings {
            let t: Vec<Value> = outcomes.iter().map(|o| json!({ "index": o.index, "millis": o.millis })).collect();
            value["timings"] = json!(t);
        }
        Report { value, worst }
    }

    /// 0 when every request succeeded, 1 on errors, 3 on oracle mismatches, 2 when something was undecided.
    pub fn exit_code(&self) -> i32 {
        match self.worst {
            Status::Ok => 0,
            Status::Undecided => 2,
            Status::Mismatch => 3,
            Status::Error => 1,
        }
    }

    pub fn to_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.value).expect("report serializes");
        s.push('\n');
        s
    }
}
