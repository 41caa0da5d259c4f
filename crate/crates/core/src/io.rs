//! Instance files and machine-readable reports.
//!
//! An instance is a JSON document with fields `n`, `arcs` (list of
//! `[i, j]` pairs), `u` (list of bounds; `null` marks an unbounded
//! coordinate), `integer` (list of vertex ids), and an optional
//! `objective`, either
//! `{"type": "quadratic", "Q": [[...]], "c": [...]}` or
//! `{"type": "table", "entries": [{"z": [...], "value": v}, ...]}` for
//! all-integer instances. Floats are parsed as binary64.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::{build_instance, finitize_bounds, ForestInstance, QuadraticSpec, ValueOracle};
use crate::Vertex;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n: usize,
    #[serde(default)]
    pub arcs: Vec<[usize; 2]>,
    pub u: Vec<Option<f64>>,
    #[serde(default)]
    pub integer: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<ObjectiveSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum ObjectiveSpec {
    #[serde(rename = "quadratic")]
    Quadratic {
        #[serde(rename = "Q")]
        q: Vec<Vec<f64>>,
        c: Vec<f64>,
    },
    #[serde(rename = "table")]
    Table { entries: Vec<TableEntry> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableEntry {
    pub z: Vec<i64>,
    pub value: f64,
}

/// A parsed instance: the validated forest plus whatever objective the
/// file carried.
#[derive(Clone, Debug)]
pub struct LoadedInstance {
    pub instance: ForestInstance,
    pub objective: Option<ObjectiveSpec>,
    /// Unbounded roots that received the fallback bound.
    pub defaulted_roots: Vec<Vertex>,
}

pub fn parse_instance(text: &str) -> Result<LoadedInstance> {
    let file: InstanceFile =
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("bad JSON: {e}")))?;
    if file.u.len() != file.n {
        return Err(Error::InvalidInput(format!(
            "field `u` has {} entries for n = {}",
            file.u.len(),
            file.n
        )));
    }
    let arcs: Vec<(Vertex, Vertex)> = file.arcs.iter().map(|&[i, j]| (i, j)).collect();
    let bounds: Vec<f64> = file.u.iter().map(|b| b.unwrap_or(f64::INFINITY)).collect();
    let (instance, defaulted_roots) = if bounds.iter().any(|b| !b.is_finite()) {
        finitize_bounds(file.n, &arcs, &bounds, &file.integer, 1.0)?
    } else {
        (
            build_instance(file.n, &arcs, &bounds, &file.integer)?,
            Vec::new(),
        )
    };
    if let Some(obj) = &file.objective {
        validate_objective(obj, &instance)?;
    }
    Ok(LoadedInstance {
        instance,
        objective: file.objective,
        defaulted_roots,
    })
}

pub fn load_instance(path: &Path) -> Result<LoadedInstance> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    parse_instance(&text)
}

fn validate_objective(obj: &ObjectiveSpec, inst: &ForestInstance) -> Result<()> {
    let n = inst.vertex_count();
    match obj {
        ObjectiveSpec::Quadratic { q, c } => {
            if c.len() != n {
                return Err(Error::InvalidInput(format!(
                    "objective dimension {} does not match n = {n}",
                    c.len()
                )));
            }
            QuadraticSpec::new(q.clone(), c.clone())?;
        }
        ObjectiveSpec::Table { entries } => {
            if inst.integer_vertices().count() != n {
                return Err(Error::InvalidInput(
                    "table objectives require an all-integer instance".into(),
                ));
            }
            for e in entries {
                if e.z.len() != n {
                    return Err(Error::InvalidInput("table entry has wrong width".into()));
                }
            }
        }
    }
    Ok(())
}

/// Turn a parsed objective into an evaluation oracle. Table lookups off
/// the tabulated lattice surface as an evaluation failure downstream
/// (the value comes back non-finite).
pub fn build_oracle(obj: &ObjectiveSpec, inst: &ForestInstance) -> Result<ValueOracle> {
    let n = inst.vertex_count();
    match obj {
        ObjectiveSpec::Quadratic { q, c } => Ok(QuadraticSpec::new(q.clone(), c.clone())?.oracle()),
        ObjectiveSpec::Table { entries } => {
            let mut map: HashMap<Vec<i64>, f64> = HashMap::with_capacity(entries.len());
            for e in entries {
                map.insert(e.z.clone(), e.value);
            }
            Ok(ValueOracle::new(n, move |z| {
                let key: Vec<i64> = z.iter().map(|&x| x.round() as i64).collect();
                if z.iter().any(|&x| (x - x.round()).abs() > 1e-6) {
                    return f64::NAN;
                }
                map.get(&key).copied().unwrap_or(f64::NAN)
            }))
        }
    }
}

/// Serialize any `serde` value with floats at 17 significant digits, so
/// written reports are byte-stable and round-trip exactly.
pub fn to_json_precise<T: Serialize>(value: &T) -> Result<String> {
    let tree: serde_json::Value = serde_json::to_value(value)
        .map_err(|e| Error::InvalidInput(format!("serialization failed: {e}")))?;
    let mut out = String::new();
    write_value(&tree, 0, &mut out);
    out.push('\n');
    Ok(out)
}

fn write_value(v: &serde_json::Value, indent: usize, out: &mut String) {
    match v {
        serde_json::Value::Null => out.push_str("null"),
        serde_json::Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        serde_json::Value::Number(num) => {
            if let Some(i) = num.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = num.as_u64() {
                out.push_str(&u.to_string());
            } else {
                let f = num.as_f64().unwrap_or(f64::NAN);
                out.push_str(&format_float(f));
            }
        }
        serde_json::Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("strings serialize"))
        }
        serde_json::Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                out.push('\n');
                out.push_str(&"  ".repeat(indent + 1));
                write_value(item, indent + 1, out);
            }
            out.push('\n');
            out.push_str(&"  ".repeat(indent));
            out.push(']');
        }
        serde_json::Value::Object(fields) => {
            if fields.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push('{');
            for (k, (key, item)) in fields.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                out.push('\n');
                out.push_str(&"  ".repeat(indent + 1));
                out.push_str(&serde_json::to_string(key).expect("keys serialize"));
                out.push_str(": ");
                write_value(item, indent + 1, out);
            }
            out.push('\n');
            out.push_str(&"  ".repeat(indent));
            out.push('}');
        }
    }
}

/// 17 significant digits round-trips every binary64 value.
pub fn format_float(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{:.1}", x)
    } else {
        format!("{:.16e}", x)
    }
}
