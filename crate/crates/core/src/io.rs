//! Structured-text I/O: JSON documents written canonically (sorted keys,
//! 17-significant-digit floats) so every report is byte-stable across runs.

use std::path::Path;
use std::sync::Arc;

use serde_json::{Map, Value};

use crate::error::{CoreError, Result};
use crate::linalg::Pt;
use crate::mesh::SimplicialMesh;
use crate::plmap::PLMap;

/// 17 significant digits: round-trips every f64 exactly and is byte-stable.
pub fn fmt_float(v: f64) -> String {
    if v == 0.0 {
        // normalize -0.0
        return "0.0000000000000000e0".to_string();
    }
    format!("{:.16e}", v)
}

/// Canonical writer: object keys sorted, arrays in order, floats via
/// `fmt_float`, integers as-is. Output has a trailing newline.
pub fn canonical_string(value: &Value) -> String {
    let mut out = String::new();
    write_value(value, 0, &mut out);
    out.push('\n');
    out
}

fn indent(level: usize, out: &mut String) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn write_value(value: &Value, level: usize, out: &mut String) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else {
                out.push_str(&fmt_float(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).unwrap_or_else(|_| "\"\"".into()))
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            // short numeric arrays inline (vectors, index tuples)
            let all_scalar = items
                .iter()
                .all(|v| matches!(v, Value::Number(_) | Value::Bool(_) | Value::String(_)));
            if all_scalar && items.len() <= 8 {
                out.push('[');
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(v, level, out);
                }
                out.push(']');
            } else {
                out.push_str("[\n");
                for (i, v) in items.iter().enumerate() {
                    indent(level + 1, out);
                    write_value(v, level + 1, out);
                    if i + 1 < items.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                indent(level, out);
                out.push(']');
            }
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                indent(level + 1, out);
                out.push_str(&serde_json::to_string(k).unwrap());
                out.push_str(": ");
                write_value(&map[*k], level + 1, out);
                if i + 1 < keys.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            indent(level, out);
            out.push('}');
        }
    }
}

pub fn write_document(path: &Path, value: &Value) -> Result<()> {
    std::fs::write(path, canonical_string(value))
        .map_err(|e| CoreError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

pub fn read_document(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CoreError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    serde_json::from_str(&text)
        .map_err(|e| CoreError::Parse(format!("{}: {e}", path.display())))
}

fn pt_to_value(p: Pt, dim: usize) -> Value {
    Value::Array((0..dim).map(|k| Value::from(p[k])).collect())
}

fn value_to_pt(v: &Value, dim: usize, what: &str) -> Result<Pt> {
    let arr = v
        .as_array()
        .ok_or_else(|| CoreError::Parse(format!("{what}: expected an array")))?;
    if arr.len() != dim {
        return Err(CoreError::Parse(format!(
            "{what}: expected {dim} components, got {}",
            arr.len()
        )));
    }
    let mut p = [0.0; 3];
    for (k, c) in arr.iter().enumerate() {
        p[k] = c
            .as_f64()
            .ok_or_else(|| CoreError::Parse(format!("{what}: non-numeric component")))?;
    }
    Ok(p)
}

pub fn mesh_to_value(mesh: &SimplicialMesh) -> Value {
    let dim = mesh.dim;
    let mut map = Map::new();
    map.insert("dim".into(), Value::from(dim as i64));
    map.insert(
        "vertices".into(),
        Value::Array(mesh.vertices.iter().map(|v| pt_to_value(*v, dim)).collect()),
    );
    map.insert(
        "simplices".into(),
        Value::Array(
            (0..mesh.simplices.len())
                .map(|s| {
                    Value::Array(
                        mesh.simplex_vertices(s)
                            .iter()
                            .map(|&i| Value::from(i as i64))
                            .collect(),
                    )
                })
                .collect(),
        ),
    );
    Value::Object(map)
}

pub fn mesh_from_value(value: &Value) -> Result<SimplicialMesh> {
    let obj = value
        .as_object()
        .ok_or_else(|| CoreError::Parse("mesh document: expected an object".into()))?;
    let dim = obj
        .get("dim")
        .and_then(Value::as_u64)
        .ok_or_else(|| CoreError::Parse("mesh document: missing integer 'dim'".into()))?
        as usize;
    if dim != 2 && dim != 3 {
        return Err(CoreError::Parse(format!("mesh document: dim {dim} unsupported")));
    }
    let verts = obj
        .get("vertices")
        .and_then(Value::as_array)
        .ok_or_else(|| CoreError::Parse("mesh document: missing 'vertices' array".into()))?;
    let vertices: Result<Vec<Pt>> = verts
        .iter()
        .enumerate()
        .map(|(i, v)| value_to_pt(v, dim, &format!("vertex {i}")))
        .collect();
    let simps = obj
        .get("simplices")
        .and_then(Value::as_array)
        .ok_or_else(|| CoreError::Parse("mesh document: missing 'simplices' array".into()))?;
    let mut simplices = Vec::with_capacity(simps.len());
    for (i, s) in simps.iter().enumerate() {
        let arr = s
            .as_array()
            .ok_or_else(|| CoreError::Parse(format!("simplex {i}: expected an array")))?;
        if arr.len() != dim + 1 {
            return Err(CoreError::Parse(format!(
                "simplex {i}: expected {} indices, got {}",
                dim + 1,
                arr.len()
            )));
        }
        let mut idx = Vec::with_capacity(dim + 1);
        for c in arr {
            idx.push(
                c.as_u64()
                    .ok_or_else(|| CoreError::Parse(format!("simplex {i}: bad index")))?
                    as usize,
            );
        }
        simplices.push(idx);
    }
    SimplicialMesh::build(dim, vertices?, simplices)
}

pub fn read_mesh(path: &Path) -> Result<SimplicialMesh> {
    mesh_from_value(&read_document(path)?)
}

pub fn write_mesh(path: &Path, mesh: &SimplicialMesh) -> Result<()> {
    write_document(path, &mesh_to_value(mesh))
}

/// Deformation file: the mesh file it refers to plus one image per vertex.
pub fn deformation_to_value(map: &PLMap, mesh_ref: &str) -> Value {
    let dim = map.dim();
    let mut m = Map::new();
    m.insert("mesh_ref".into(), Value::from(mesh_ref));
    m.insert(
        "images".into(),
        Value::Array(map.images.iter().map(|p| pt_to_value(*p, dim)).collect()),
    );
    Value::Object(m)
}

pub fn write_deformation(path: &Path, map: &PLMap, mesh_ref: &str) -> Result<()> {
    write_document(path, &deformation_to_value(map, mesh_ref))
}

/// Read a deformation file; `mesh_ref` is resolved relative to the
/// deformation file's directory unless absolute.
pub fn read_deformation(path: &Path) -> Result<PLMap> {
    let value = read_document(path)?;
    let obj = value
        .as_object()
        .ok_or_else(|| CoreError::Parse("deformation document: expected an object".into()))?;
    let mesh_ref = obj
        .get("mesh_ref")
        .and_then(Value::as_str)
        .ok_or_else(|| CoreError::Parse("deformation document: missing 'mesh_ref'".into()))?;
    let mesh_path = {
        let p = Path::new(mesh_ref);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            path.parent().unwrap_or_else(|| Path::new(".")).join(p)
        }
    };
    let mesh = Arc::new(read_mesh(&mesh_path)?);
    let imgs = obj
        .get("images")
        .and_then(Value::as_array)
        .ok_or_else(|| CoreError::Parse("deformation document: missing 'images' array".into()))?;
    if imgs.len() != mesh.vertices.len() {
        return Err(CoreError::Parse(format!(
            "deformation document: {} images for {} vertices",
            imgs.len(),
            mesh.vertices.len()
        )));
    }
    let dim = mesh.dim;
    let images: Result<Vec<Pt>> = imgs
        .iter()
        .enumerate()
        .map(|(i, v)| value_to_pt(v, dim, &format!("image {i}")))
        .collect();
    PLMap::new(mesh, images?)
}

/// Energy model file.
pub fn model_to_value(model: &crate::elasticity::EnergyModel, dim: usize) -> Value {
    use crate::elasticity::Family;
    let mut m = Map::new();
    m.insert(
        "family".into(),
        Value::from(match model.family {
            Family::W1 => "w1",
            Family::W2 => "w2",
            Family::W3 => "w3",
        }),
    );
    m.insert("p".into(), Value::from(model.p));
    m.insert("r".into(), Value::from(model.r));
    m.insert("s".into(), Value::from(model.s));
    m.insert("c".into(), Value::from(model.c));
    m.insert("q".into(), Value::from(model.q));
    m.insert("g".into(), pt_to_value(model.g, dim));
    m.insert("box_lo".into(), pt_to_value(model.box_lo, dim));
    m.insert("box_hi".into(), pt_to_value(model.box_hi, dim));
    Value::Object(m)
}

pub fn model_from_value(value: &Value, dim: usize) -> Result<crate::elasticity::EnergyModel> {
    use crate::elasticity::Family;
    let obj = value
        .as_object()
        .ok_or_else(|| CoreError::Parse("model document: expected an object".into()))?;
    let family = match obj.get("family").and_then(Value::as_str) {
        Some("w1") => Family::W1,
        Some("w2") => Family::W2,
        Some("w3") => Family::W3,
        other => {
            return Err(CoreError::Parse(format!(
                "model document: unknown family {other:?}"
            )))
        }
    };
    let num = |key: &str, default: f64| -> Result<f64> {
        match obj.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_f64()
                .ok_or_else(|| CoreError::Parse(format!("model document: '{key}' not a number"))),
        }
    };
    let g = match obj.get("g") {
        Some(v) => value_to_pt(v, dim, "model g")?,
        None => [0.0; 3],
    };
    let box_lo = match obj.get("box_lo") {
        Some(v) => value_to_pt(v, dim, "model box_lo")?,
        None => [-f64::MAX; 3],
    };
    let box_hi = match obj.get("box_hi") {
        Some(v) => value_to_pt(v, dim, "model box_hi")?,
        None => [f64::MAX; 3],
    };
    Ok(crate::elasticity::EnergyModel {
        family,
        p: num("p", dim as f64)?,
        r: num("r", 1.0)?,
        s: num("s", 1.0)?,
        c: num("c", 1.0)?,
        q: num("q", 2.0)?,
        g,
        box_lo,
        box_hi,
    })
}

pub fn read_model(path: &Path, dim: usize) -> Result<crate::elasticity::EnergyModel> {
    model_from_value(&read_document(path)?, dim)
}
