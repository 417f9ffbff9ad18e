//! Derivations: equational proofs as lists of located rule applications,
//! with a JSON file format and a checker that audits every step against the
//! semantics.

use serde_json::{json, Map, Value};
use thiserror::Error;

use super::{apply_step, Direction, Params, RewriteStep, Rule};
use crate::circuit::{flatten, parse_circuit, serialize, Circuit};
use crate::error::Error;
use crate::rat::{rat_from_json, rat_json};
use crate::semantics::{class_of, ProjClass};

/// An error located at a derivation step (`None` for the header: start and
/// end terms or the overall file structure).  Step indices are 0-based
/// positions in the `steps` array.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}: {error}", match .step { Some(i) => format!("step {i}"), None => "derivation".to_string() })]
pub struct DerivationError {
    pub step: Option<usize>,
    pub error: Error,
}

impl DerivationError {
    fn at(step: usize) -> impl FnOnce(Error) -> DerivationError {
        move |error| DerivationError {
            step: Some(step),
            error,
        }
    }

    fn header(error: Error) -> DerivationError {
        DerivationError { step: None, error }
    }
}

/// A derivation from `start` to `end`.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivation {
    pub start: Circuit,
    pub steps: Vec<RewriteStep>,
    pub end: Circuit,
}

fn step_from_json(v: &Value) -> Result<RewriteStep, Error> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Json("a step must be an object".into()))?;
    let name = obj
        .get("axiom")
        .or_else(|| obj.get("rule"))
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Json("a step needs an `axiom` name".into()))?;
    let rule: Rule = name.parse()?;
    let direction = match obj.get("dir") {
        None => Direction::LeftToRight,
        Some(Value::String(s)) => s.parse()?,
        Some(_) => return Err(Error::Json("`dir` must be \"LR\" or \"RL\"".into())),
    };
    let path = match obj.get("path") {
        None => Vec::new(),
        Some(Value::Array(items)) => items
            .iter()
            .map(|x| match x.as_u64() {
                Some(0) => Ok(0),
                Some(1) => Ok(1),
                _ => Err(Error::Json(format!("path selectors must be 0 or 1, got {x}"))),
            })
            .collect::<Result<Vec<_>, _>>()?,
        Some(_) => return Err(Error::Json("`path` must be an array".into())),
    };
    let mut params = Params::new();
    match obj.get("params") {
        None => {}
        Some(Value::Object(map)) => {
            for (k, v) in map {
                let r = rat_from_json(v)
                    .ok_or_else(|| Error::Json(format!("parameter `{k}` is not a rational: {v}")))?;
                params.insert(k.clone(), r);
            }
        }
        Some(_) => return Err(Error::Json("`params` must be an object".into())),
    }
    Ok(RewriteStep {
        rule,
        direction,
        path,
        params,
    })
}

fn step_to_json(s: &RewriteStep) -> Value {
    let mut obj = Map::new();
    obj.insert("axiom".into(), json!(s.rule.name()));
    obj.insert("dir".into(), json!(s.direction.name()));
    obj.insert("path".into(), json!(s.path));
    if !s.params.is_empty() {
        let ps: Map<String, Value> = s
            .params
            .iter()
            .map(|(k, v)| {
                // Structural size parameters read better as plain integers.
                let value = match u64::try_from(v.to_integer()) {
                    Ok(n) if v.is_integer() && !is_probability_name(k) => json!(n),
                    _ => rat_json(v),
                };
                (k.clone(), value)
            })
            .collect();
        obj.insert("params".into(), Value::Object(ps));
    }
    Value::Object(obj)
}

fn is_probability_name(name: &str) -> bool {
    !matches!(name, "at" | "len" | "split" | "top" | "bottom" | "form" | "k" | "m" | "n") && !name.starts_with('j')
}

impl Derivation {
    /// Parses a derivation file:
    /// `{"start": text, "end": text, "steps": [{"axiom", "dir", "path", "params"}]}`.
    /// Malformed steps are reported with their index.
    pub fn from_json(text: &str) -> Result<Derivation, DerivationError> {
        let v: Value = serde_json::from_str(text).map_err(|e| DerivationError::header(Error::Json(e.to_string())))?;
        let obj = v
            .as_object()
            .ok_or_else(|| DerivationError::header(Error::Json("a derivation must be an object".into())))?;
        let term = |key: &str| -> Result<Circuit, DerivationError> {
            let text = obj
                .get(key)
                .and_then(Value::as_str)
                .ok_or_else(|| DerivationError::header(Error::Json(format!("missing string field `{key}`"))))?;
            parse_circuit(text).map_err(DerivationError::header)
        };
        let start = term("start")?;
        let end = term("end")?;
        let steps = obj
            .get("steps")
            .and_then(Value::as_array)
            .ok_or_else(|| DerivationError::header(Error::Json("missing array field `steps`".into())))?
            .iter()
            .enumerate()
            .map(|(i, s)| step_from_json(s).map_err(DerivationError::at(i)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Derivation { start, steps, end })
    }

    /// The file representation with one step per line.
    pub fn to_pretty_json(&self) -> String {
        let steps: Vec<String> = self
            .steps
            .iter()
            .map(|s| format!("    {}", step_to_json(s)))
            .collect();
        format!(
            "{{\n  \"start\": {},\n  \"end\": {},\n  \"steps\": [\n{}\n  ]\n}}\n",
            json!(serialize(&self.start)),
            json!(serialize(&self.end)),
            steps.join(",\n")
        )
    }

    /// The JSON file representation.
    pub fn to_json(&self) -> Value {
        json!({
            "start": serialize(&self.start),
            "end": serialize(&self.end),
            "steps": self.steps.iter().map(step_to_json).collect::<Vec<_>>(),
        })
    }
}

/// One line of a derivation trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    /// `None` for the start term.
    pub step: Option<usize>,
    pub rule: Option<RewriteStep>,
    pub term: Circuit,
    pub class: ProjClass,
}

/// Outcome of replaying a derivation.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivationReport {
    /// Whether the final term is structurally the flattened `end`.
    pub reaches_end: bool,
    pub trace: Vec<TraceEntry>,
    pub final_term: Circuit,
}

impl DerivationReport {
    /// Whether the derivation is valid.
    pub fn ok(&self) -> bool {
        self.reaches_end
    }

    /// The trace as JSON: one object per term with its canonical class.
    pub fn to_json(&self) -> Value {
        json!({
            "ok": self.ok(),
            "final": serialize(&self.final_term),
            "trace": self.trace.iter().map(|t| json!({
                "step": t.step,
                "rule": t.rule.as_ref().map(|r| r.to_string()),
                "term": serialize(&t.term),
                "class": t.class.to_json(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Replays a derivation.  Every intermediate term is evaluated and its
/// canonical class compared with the start term's, so an unsound step is
/// caught at the step that introduces it.
pub fn check_derivation(d: &Derivation) -> Result<DerivationReport, DerivationError> {
    let mut cur = flatten(&d.start);
    let class = class_of(&cur).map_err(DerivationError::header)?;
    let mut trace = vec![TraceEntry {
        step: None,
        rule: None,
        term: cur.clone(),
        class: class.clone(),
    }];
    for (i, step) in d.steps.iter().enumerate() {
        cur = apply_step(&cur, step).map_err(DerivationError::at(i))?;
        let now = class_of(&cur).map_err(DerivationError::at(i))?;
        if now != class {
            return Err(DerivationError::at(i)(Error::Inconsistent(format!(
                "{step} changed the semantics of the term"
            ))));
        }
        trace.push(TraceEntry {
            step: Some(i),
            rule: Some(step.clone()),
            term: cur.clone(),
            class: now,
        });
    }
    Ok(DerivationReport {
        reaches_end: cur == flatten(&d.end),
        trace,
        final_term: cur,
    })
}
