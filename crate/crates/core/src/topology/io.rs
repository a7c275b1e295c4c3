//! Diagram JSON: `{"dim0": [[b, d], ...], "dim1": [[b, d], ...]}` with the
//! string `"inf"` for essential deaths.

use serde_json::{json, Value};

use super::{Bar, PersistenceDiagram};
use crate::error::{Error, Result};

fn number(v: f64) -> Value {
    if v.is_infinite() {
        Value::String("inf".into())
    } else {
        json!(v)
    }
}

pub fn diagram_to_json(d: &PersistenceDiagram) -> Value {
    let canon = d.canonical();
    let dim = |k: u8| -> Vec<Value> {
        canon
            .in_dim(k)
            .map(|b| Value::Array(vec![number(b.birth), number(b.death)]))
            .collect()
    };
    json!({ "dim0": dim(0), "dim1": dim(1) })
}

fn parse_number(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| Error::Parse(format!("bad number {n}"))),
        Value::String(s) if s == "inf" => Ok(f64::INFINITY),
        other => Err(Error::Parse(format!("expected number or \"inf\", got {other}"))),
    }
}

pub fn diagram_from_json(v: &Value) -> Result<PersistenceDiagram> {
    let mut d = PersistenceDiagram::new();
    for (dim, key) in [(0u8, "dim0"), (1u8, "dim1")] {
        let Some(list) = v.get(key) else { continue };
        let list = list
            .as_array()
            .ok_or_else(|| Error::Parse(format!("{key} must be an array")))?;
        for pair in list {
            match pair.as_array().map(Vec::as_slice) {
                Some([b, e]) => {
                    let (birth, death) = (parse_number(b)?, parse_number(e)?);
                    if birth.is_infinite() || death < birth {
                        return Err(Error::Parse(format!("invalid bar [{b}, {e}] in {key}")));
                    }
                    d.push(Bar::new(dim, birth, death));
                }
                _ => return Err(Error::Parse(format!("{key} entries must be [birth, death]"))),
            }
        }
    }
    Ok(d)
}
