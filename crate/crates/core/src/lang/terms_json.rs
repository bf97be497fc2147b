//! JSON schema for exponential-term lists.
//!
//! ```json
//! {"terms": [{"r": 1.0, "theta": 0.0},
//!            {"coeff": {"re": -2.0, "im": 0.5}, "theta": 1.2}]}
//! ```
//!
//! `theta` is in radians. A term gives either a non-negative `r` or a complex
//! `coeff`; a coefficient is folded into the phase. Order is preserved.

use num_complex::Complex64;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::expsum::{normalize_term, ExpTerm};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}: {message}")]
pub struct SchemaError {
    /// Location of the offending value, e.g. `terms[2].r`.
    pub path: String,
    pub message: String,
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> SchemaError {
    SchemaError {
        path: path.into(),
        message: message.into(),
    }
}

fn number(obj: &Map<String, Value>, key: &str, path: &str) -> Result<f64, SchemaError> {
    let path = format!("{path}.{key}");
    match obj.get(key) {
        None => Err(schema(path, "missing field")),
        Some(v) => v
            .as_f64()
            .filter(|x| x.is_finite())
            .ok_or_else(|| schema(path, format!("expected a finite number, found {v}"))),
    }
}

pub fn parse_terms(json_text: &str) -> Result<Vec<ExpTerm>, SchemaError> {
    let root: Value =
        serde_json::from_str(json_text).map_err(|e| schema("$", format!("invalid JSON: {e}")))?;
    let obj = root
        .as_object()
        .ok_or_else(|| schema("$", "expected an object with a `terms` array"))?;
    let list = match obj.get("terms") {
        Some(Value::Array(list)) => list,
        Some(_) => return Err(schema("terms", "expected an array")),
        None => return Err(schema("terms", "missing field")),
    };

    list.iter()
        .enumerate()
        .map(|(i, item)| {
            let path = format!("terms[{i}]");
            let term = item
                .as_object()
                .ok_or_else(|| schema(&path, "expected an object"))?;
            if let Some(key) = term.keys().find(|k| !matches!(k.as_str(), "r" | "theta" | "coeff")) {
                return Err(schema(format!("{path}.{key}"), "unknown field"));
            }
            let theta = number(term, "theta", &path)?;
            match (term.get("r"), term.get("coeff")) {
                (Some(_), Some(_)) => Err(schema(&path, "give either `r` or `coeff`, not both")),
                (None, None) => Err(schema(format!("{path}.r"), "missing field")),
                (Some(_), None) => {
                    let r = number(term, "r", &path)?;
                    if r < 0.0 {
                        return Err(schema(
                            format!("{path}.r"),
                            "amplitude must be non-negative; use `coeff` for signed or complex coefficients",
                        ));
                    }
                    Ok(ExpTerm::new(r, theta).expect("validated amplitude and phase"))
                }
                (None, Some(c)) => {
                    let cpath = format!("{path}.coeff");
                    let c = c
                        .as_object()
                        .ok_or_else(|| schema(&cpath, "expected an object with `re` and `im`"))?;
                    let coeff = Complex64::new(number(c, "re", &cpath)?, number(c, "im", &cpath)?);
                    let n = normalize_term(coeff, theta);
                    ExpTerm::new(n.r, n.theta)
                        .map_err(|e| schema(&cpath, e.to_string()))
                }
            }
        })
        .collect()
}

/// Serializes terms in the `{"r", "theta"}` form accepted by [`parse_terms`].
pub fn terms_to_json(terms: &[ExpTerm]) -> Value {
    json!({
        "terms": terms
            .iter()
            .map(|t| json!({"r": t.r(), "theta": t.theta()}))
            .collect::<Vec<_>>()
    })
}
