//! Diagram files.
//!
//! CSV: header `birth,death` (one diagram) or `diagram,birth,death`, with
//! `diag,diag` for a diagonal entry. JSON: `{"n": 3, "points": [[b, d], "diag"]}`
//! or an array of such objects. Diagrams with fewer points than the arity
//! are padded with the diagonal.

use serde_json::{json, Value};

use crate::diagram::{DiagramPoint, PersistenceDiagram};
use crate::error::{Error, Result};

const DIAGONAL_TOKEN: &str = "diag";

fn parse_error(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("line {line}: {msg}"))
}

fn parse_coord(field: &str, line: usize) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| parse_error(line, format!("not a number: {field:?}")))
}

fn finish(groups: Vec<(String, Vec<DiagramPoint<f64>>)>, arity: Option<usize>) -> Result<Vec<PersistenceDiagram<f64>>> {
    let widest = groups.iter().map(|g| g.1.len()).max().unwrap_or(0);
    let n = arity.unwrap_or(widest);
    if n == 0 {
        return Err(Error::EmptyDiagram);
    }
    groups
        .into_iter()
        .map(|(id, mut points)| {
            if points.len() > n {
                return Err(Error::Parse(format!(
                    "diagram {id:?} has {} points, arity is {n}",
                    points.len()
                )));
            }
            points.resize(n, DiagramPoint::Diagonal);
            PersistenceDiagram::new(points)
        })
        .collect()
}

/// Reads one or more diagrams from CSV text, in order of first appearance.
pub fn read_csv(text: &str, arity: Option<usize>) -> Result<Vec<PersistenceDiagram<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse(e.to_string()))?
        .clone();
    let names: Vec<&str> = headers.iter().collect();
    let multi = match names.as_slice() {
        ["birth", "death"] => false,
        ["diagram", "birth", "death"] => true,
        other => return Err(Error::Parse(format!("unexpected CSV header {other:?}"))),
    };
    let mut groups: Vec<(String, Vec<DiagramPoint<f64>>)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let (id, b, d) = if multi {
            (record[0].to_string(), &record[1], &record[2])
        } else {
            (String::new(), &record[0], &record[1])
        };
        let point = match (b, d) {
            (DIAGONAL_TOKEN, DIAGONAL_TOKEN) => DiagramPoint::Diagonal,
            (b, d) => {
                let (b, d) = (parse_coord(b, line)?, parse_coord(d, line)?);
                DiagramPoint::new(b, d).map_err(|e| parse_error(line, e))?
            }
        };
        match groups.iter_mut().find(|g| g.0 == id) {
            Some(g) => g.1.push(point),
            None => groups.push((id, vec![point])),
        }
    }
    if groups.is_empty() {
        return Err(Error::Parse("no diagrams in input".into()));
    }
    finish(groups, arity)
}

fn json_diagram(v: &Value, index: usize, arity: Option<usize>) -> Result<PersistenceDiagram<f64>> {
    let err = |msg: String| Error::Parse(format!("diagram {index}: {msg}"));
    let points = v
        .get("points")
        .and_then(Value::as_array)
        .ok_or_else(|| err("missing \"points\" array".into()))?;
    let declared = match v.get("n") {
        None => None,
        Some(n) => Some(n.as_u64().ok_or_else(|| err("\"n\" must be a non-negative integer".into()))? as usize),
    };
    let mut parsed = Vec::with_capacity(points.len());
    for p in points {
        let point = match p {
            Value::String(s) if s == DIAGONAL_TOKEN => DiagramPoint::Diagonal,
            Value::Array(pair) if pair.len() == 2 => {
                let coord = |c: &Value| c.as_f64().ok_or_else(|| err(format!("bad coordinate {c}")));
                DiagramPoint::new(coord(&pair[0])?, coord(&pair[1])?).map_err(|e| err(e.to_string()))?
            }
            other => return Err(err(format!("bad point {other}"))),
        };
        parsed.push(point);
    }
    let n = match (declared, arity) {
        (Some(a), Some(b)) if a != b => return Err(Error::ArityMismatch { left: b, right: a }),
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => parsed.len(),
    };
    let mut out = finish(vec![(index.to_string(), parsed)], Some(n))?;
    Ok(out.remove(0))
}

/// Reads one diagram object or an array of them.
pub fn read_json(text: &str, arity: Option<usize>) -> Result<Vec<PersistenceDiagram<f64>>> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let diagrams = match &value {
        Value::Array(items) => items
            .iter()
            .enumerate()
            .map(|(i, v)| json_diagram(v, i, arity))
            .collect::<Result<Vec<_>>>()?,
        Value::Object(_) => vec![json_diagram(&value, 0, arity)?],
        _ => return Err(Error::Parse("expected a diagram object or array".into())),
    };
    if diagrams.is_empty() {
        return Err(Error::Parse("no diagrams in input".into()));
    }
    // An array without declared arities shares the widest one.
    let n = diagrams.iter().map(PersistenceDiagram::arity).max().unwrap_or(0);
    diagrams.into_iter().map(|d| crate::diagram::pad_to_arity(&d, n)).collect()
}

/// Reads by extension: `.json` as JSON, anything else as CSV.
pub fn read_diagrams(path: &std::path::Path, arity: Option<usize>) -> Result<Vec<PersistenceDiagram<f64>>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        read_json(&text, arity)
    } else {
        read_csv(&text, arity)
    }
}

fn point_fields(p: &DiagramPoint<f64>) -> (String, String) {
    match p.coords() {
        None => (DIAGONAL_TOKEN.into(), DIAGONAL_TOKEN.into()),
        Some((b, d)) => (b.to_string(), d.to_string()),
    }
}

/// CSV text; the `diagram` column appears only for more than one diagram.
pub fn write_csv(diagrams: &[PersistenceDiagram<f64>]) -> String {
    let multi = diagrams.len() > 1;
    let mut out = String::from(if multi { "diagram,birth,death\n" } else { "birth,death\n" });
    for (i, x) in diagrams.iter().enumerate() {
        for p in x.points() {
            let (b, d) = point_fields(p);
            if multi {
                out.push_str(&format!("{i},{b},{d}\n"));
            } else {
                out.push_str(&format!("{b},{d}\n"));
            }
        }
    }
    out
}

pub fn diagram_to_json(x: &PersistenceDiagram<f64>) -> Value {
    let points: Vec<Value> = x
        .points()
        .iter()
        .map(|p| match p.coords() {
            None => json!(DIAGONAL_TOKEN),
            Some((b, d)) => json!([b, d]),
        })
        .collect();
    json!({ "n": x.arity(), "points": points })
}

/// JSON text: an object for one diagram, an array otherwise.
pub fn write_json(diagrams: &[PersistenceDiagram<f64>]) -> String {
    let value = match diagrams {
        [one] => diagram_to_json(one),
        many => Value::Array(many.iter().map(diagram_to_json).collect()),
    };
    serde_json::to_string_pretty(&value).expect("diagram JSON")
}

/// One comma-separated vector per line.
pub fn read_vectors(text: &str) -> Result<Vec<Vec<f64>>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| l.split(',').map(|f| parse_coord(f, i + 1)).collect())
        .collect()
}

pub fn write_vector(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}
