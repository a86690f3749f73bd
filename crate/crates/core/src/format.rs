//! Text and JSON encodings of instances and execution scenarios.
//!
//! Instance files are line oriented, `#` starts a comment:
//!
//! ```text
//! H 20
//! task 1 T=20 rmin=2 rmax=5 cmin=5 cmax=7 d=16 p=0
//! ```
//!
//! `H` is optional and defaults to the hyperperiod; `p` defaults to 0.
//! Scenario files list one `J <task> <index> r=<int> c=<int>` line per job.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::model::{ExecutionScenario, ProblemInstance, Task, Time};

fn parse_err(line: usize, message: impl Into<String>) -> ModelError {
    ModelError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_int(line: usize, what: &str, s: &str) -> Result<u64, ModelError> {
    s.parse()
        .map_err(|_| parse_err(line, format!("invalid integer for {what}: {s:?}")))
}

fn strip_comment(raw: &str) -> &str {
    raw.split('#').next().unwrap_or("").trim()
}

/// Parses the instance text format.
pub fn parse_instance(text: &str) -> Result<ProblemInstance, ModelError> {
    let mut horizon: Option<Time> = None;
    let mut tasks: Vec<(usize, Task)> = Vec::new();

    for (no, raw) in text.lines().enumerate() {
        let line = no + 1;
        let body = strip_comment(raw);
        if body.is_empty() {
            continue;
        }
        let mut words = body.split_whitespace();
        match words.next() {
            Some("H") => {
                if horizon.is_some() {
                    return Err(parse_err(line, "duplicate H directive"));
                }
                let value = words.next().ok_or_else(|| parse_err(line, "H needs a value"))?;
                if words.next().is_some() {
                    return Err(parse_err(line, "trailing input after H value"));
                }
                let h = parse_int(line, "H", value)?;
                if h == 0 {
                    return Err(parse_err(line, "H must be at least 1"));
                }
                horizon = Some(h);
            }
            Some("task") => {
                let id = words.next().ok_or_else(|| parse_err(line, "task needs an id"))?;
                let id = u32::try_from(parse_int(line, "task id", id)?)
                    .map_err(|_| parse_err(line, "task id out of range"))?;
                let mut fields: [Option<u64>; 7] = [None; 7];
                const KEYS: [&str; 7] = ["T", "rmin", "rmax", "cmin", "cmax", "d", "p"];
                for word in words {
                    let (key, value) = word
                        .split_once('=')
                        .ok_or_else(|| parse_err(line, format!("expected key=value, got {word:?}")))?;
                    let slot = KEYS
                        .iter()
                        .position(|k| *k == key)
                        .ok_or_else(|| parse_err(line, format!("unknown field {key:?}")))?;
                    if fields[slot].is_some() {
                        return Err(parse_err(line, format!("duplicate field {key:?}")));
                    }
                    fields[slot] = Some(parse_int(line, key, value)?);
                }
                let get = |i: usize| fields[i].ok_or_else(|| parse_err(line, format!("missing field {}", KEYS[i])));
                let priority =
                    u32::try_from(fields[6].unwrap_or(0)).map_err(|_| parse_err(line, "priority out of range"))?;
                let task = Task {
                    id,
                    period: get(0)?,
                    r_min: get(1)?,
                    r_max: get(2)?,
                    c_min: get(3)?,
                    c_max: get(4)?,
                    deadline: get(5)?,
                    priority,
                };
                task.validate().map_err(|e| parse_err(line, e.to_string()))?;
                if let Some((first, _)) = tasks.iter().find(|(_, t)| t.id == id) {
                    return Err(parse_err(
                        line,
                        format!("duplicate task id {id} (first defined on line {first})"),
                    ));
                }
                tasks.push((line, task));
            }
            Some(other) => return Err(parse_err(line, format!("unknown directive {other:?}"))),
            None => unreachable!(),
        }
    }

    if tasks.is_empty() {
        return Err(ModelError::EmptyInstance);
    }
    ProblemInstance::new(tasks.into_iter().map(|(_, t)| t).collect(), horizon)
}

/// Writes the instance text format. The observation interval is always
/// written explicitly.
pub fn write_instance(instance: &ProblemInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "H {}", instance.horizon());
    for t in instance.tasks() {
        let _ = writeln!(
            out,
            "task {} T={} rmin={} rmax={} cmin={} cmax={} d={} p={}",
            t.id, t.period, t.r_min, t.r_max, t.c_min, t.c_max, t.deadline, t.priority
        );
    }
    out
}

/// JSON mirror of the instance file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceDoc {
    pub horizon: Time,
    pub tasks: Vec<Task>,
}

impl From<&ProblemInstance> for InstanceDoc {
    fn from(instance: &ProblemInstance) -> Self {
        Self {
            horizon: instance.horizon(),
            tasks: instance.tasks().to_vec(),
        }
    }
}

impl InstanceDoc {
    pub fn into_instance(self) -> Result<ProblemInstance, ModelError> {
        ProblemInstance::new(self.tasks, Some(self.horizon))
    }
}

pub fn instance_to_json(instance: &ProblemInstance) -> String {
    serde_json::to_string_pretty(&InstanceDoc::from(instance)).expect("instance serializes")
}

/// Parses a scenario file against `instance`. Every job must be listed once.
pub fn parse_scenario(text: &str, instance: &ProblemInstance) -> Result<ExecutionScenario, ModelError> {
    let n = instance.job_count();
    let mut release: Vec<Option<Time>> = vec![None; n];
    let mut execution: Vec<Option<Time>> = vec![None; n];

    for (no, raw) in text.lines().enumerate() {
        let line = no + 1;
        let body = strip_comment(raw);
        if body.is_empty() {
            continue;
        }
        let words: Vec<&str> = body.split_whitespace().collect();
        if words.len() != 5 || words[0] != "J" {
            return Err(parse_err(line, "expected `J <task> <index> r=<int> c=<int>`"));
        }
        let task =
            u32::try_from(parse_int(line, "task", words[1])?).map_err(|_| parse_err(line, "task id out of range"))?;
        let index = u32::try_from(parse_int(line, "index", words[2])?)
            .map_err(|_| parse_err(line, "job index out of range"))?;
        let id = instance
            .find_job(task, index)
            .ok_or_else(|| parse_err(line, format!("no job J{task},{index} in the instance")))?;
        let mut r = None;
        let mut c = None;
        for word in &words[3..] {
            match word.split_once('=') {
                Some(("r", v)) if r.is_none() => r = Some(parse_int(line, "r", v)?),
                Some(("c", v)) if c.is_none() => c = Some(parse_int(line, "c", v)?),
                _ => return Err(parse_err(line, format!("unexpected {word:?}"))),
            }
        }
        if release[id.0].is_some() {
            return Err(parse_err(line, format!("J{task},{index} listed twice")));
        }
        release[id.0] = r;
        execution[id.0] = c;
    }

    let mut scenario = ExecutionScenario {
        release: Vec::with_capacity(n),
        execution: Vec::with_capacity(n),
    };
    for (i, job) in instance.jobs().iter().enumerate() {
        match (release[i], execution[i]) {
            (Some(r), Some(c)) => {
                scenario.release.push(r);
                scenario.execution.push(c);
            }
            _ => return Err(ModelError::InvalidScenario(format!("scenario does not cover {job}"))),
        }
    }
    scenario.validate(instance)?;
    Ok(scenario)
}

pub fn write_scenario(scenario: &ExecutionScenario, instance: &ProblemInstance) -> String {
    let mut out = String::new();
    for (i, job) in instance.jobs().iter().enumerate() {
        let _ = writeln!(
            out,
            "J {} {} r={} c={}",
            job.task_id, job.index, scenario.release[i], scenario.execution[i]
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures;

    const ANOMALY: &str = "\
# anomaly example
task 1 T=20 rmin=2 rmax=5 cmin=5 cmax=7 d=16
task 2 T=10 rmin=1 rmax=1 cmin=2 cmax=4 d=8
task 3 T=5  rmin=0 rmax=0 cmin=1 cmax=1 d=5   # short period
";

    #[test]
    fn parses_anomaly() {
        let inst = parse_instance(ANOMALY).unwrap();
        assert_eq!(inst.tasks().len(), 3);
        assert_eq!(inst.horizon(), 20);
        assert_eq!(inst.job_count(), 7);
        assert_eq!(inst, fixtures::anomaly());
    }

    #[test]
    fn explicit_horizon() {
        let inst = parse_instance(&format!("H 10\n{ANOMALY}")).unwrap();
        assert_eq!(inst.horizon(), 10);
        assert_eq!(inst.job_count(), 1 + 1 + 2);
    }

    #[test]
    fn empty_body() {
        assert_eq!(parse_instance(""), Err(ModelError::EmptyInstance));
        assert_eq!(parse_instance("# nothing\n\n"), Err(ModelError::EmptyInstance));
        assert_eq!(parse_instance("H 5\n"), Err(ModelError::EmptyInstance));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("task 1 T=5 rmin=0 rmax=0 cmin=1 cmax=1\n", 1, "missing field d"),
            ("\ntask 1 T=5 rmin=0 rmax=0 cmin=1 cmax=x d=5\n", 2, "invalid integer"),
            ("task 1 T=5 rmin=3 rmax=0 cmin=1 cmax=1 d=5\n", 1, "rmax"),
            ("bogus 3\n", 1, "unknown directive"),
            ("task 1 T=5 rmin=0 rmax=0 cmin=1 cmax=1 d=5 q=1\n", 1, "unknown field"),
            (
                "task 1 T=5 rmin=0 rmax=0 cmin=1 cmax=1 d=5\n#\ntask 1 T=5 rmin=0 rmax=0 cmin=1 cmax=1 d=5\n",
                3,
                "duplicate task id 1",
            ),
        ];
        for (text, want_line, needle) in cases {
            match parse_instance(text) {
                Err(ModelError::Parse { line, message }) => {
                    assert_eq!(line, want_line, "{text}");
                    assert!(message.contains(needle), "{message} lacks {needle}");
                }
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn write_then_parse() {
        for inst in [fixtures::anomaly(), fixtures::small_edf(), fixtures::se_false_alarm()] {
            let back = parse_instance(&write_instance(&inst)).unwrap();
            assert_eq!(back.tasks(), inst.tasks());
            assert_eq!(back.jobs(), inst.jobs());
            assert_eq!(back.horizon(), inst.horizon());
        }
    }

    #[test]
    fn json_roundtrip() {
        let inst = fixtures::se_false_alarm();
        let doc: InstanceDoc = serde_json::from_str(&instance_to_json(&inst)).unwrap();
        assert_eq!(doc.into_instance().unwrap().jobs(), inst.jobs());
    }

    #[test]
    fn scenario_file() {
        let inst = fixtures::anomaly();
        let text = "J 1 1 r=2 c=7\nJ 2 1 r=1 c=2\nJ 2 2 r=11 c=4\n\
                    J 3 1 r=0 c=1\nJ 3 2 r=5 c=1\nJ 3 3 r=10 c=1\nJ 3 4 r=15 c=1\n";
        let s = parse_scenario(text, &inst).unwrap();
        assert_eq!(s.release, vec![2, 1, 11, 0, 5, 10, 15]);
        assert_eq!(s.execution, vec![7, 2, 4, 1, 1, 1, 1]);
        assert_eq!(parse_scenario(&write_scenario(&s, &inst), &inst).unwrap(), s);

        assert!(parse_scenario("J 1 1 r=2 c=7\n", &inst).is_err());
        assert!(parse_scenario(&text.replace("r=2", "r=9"), &inst).is_err());
        assert!(matches!(
            parse_scenario("J 9 1 r=0 c=1\n", &inst),
            Err(ModelError::Parse { line: 1, .. })
        ));
    }
}
