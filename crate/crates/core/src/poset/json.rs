use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{ElemRef, Poset, PosetError, Vertex};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PosetDto {
    inputs: usize,
    vertices: Vec<VertexDto>,
    order: Vec<(RefDto, RefDto)>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexDto {
    id: usize,
    kind: String,
    label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    visibility: Option<Vec<Vec<RefDto>>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RefDto {
    In {
        #[serde(rename = "in")]
        input: usize,
    },
    V {
        v: usize,
    },
    Tag(String),
}

fn ref_out(e: ElemRef) -> RefDto {
    match e {
        ElemRef::In(i) => RefDto::In { input: i + 1 },
        ElemRef::V(v) => RefDto::V { v },
        ElemRef::Star => RefDto::Tag("star".into()),
    }
}

fn ref_in(r: &RefDto, ids: &BTreeMap<usize, usize>, n: usize) -> Result<ElemRef, PosetError> {
    match r {
        RefDto::In { input } if *input >= 1 && *input <= n => Ok(ElemRef::In(input - 1)),
        RefDto::In { input } => Err(PosetError::Json(format!("input {input} out of range"))),
        RefDto::V { v } => ids
            .get(v)
            .map(|&i| ElemRef::V(i))
            .ok_or_else(|| PosetError::Json(format!("unknown vertex id {v}"))),
        RefDto::Tag(s) if s == "star" => Ok(ElemRef::Star),
        RefDto::Tag(s) => Err(PosetError::Json(format!("unknown element reference {s:?}"))),
    }
}

fn to_dto(p: &Poset) -> PosetDto {
    PosetDto {
        inputs: p.n_inputs(),
        vertices: p
            .vertices()
            .iter()
            .enumerate()
            .map(|(id, v)| match v {
                Vertex::Action(l) => VertexDto {
                    id,
                    kind: "action".into(),
                    label: l.clone(),
                    visibility: None,
                },
                Vertex::Hole { var, visibility } => VertexDto {
                    id,
                    kind: "hole".into(),
                    label: var.clone(),
                    visibility: Some(
                        visibility
                            .iter()
                            .map(|s| s.iter().map(|&e| ref_out(e)).collect())
                            .collect(),
                    ),
                },
            })
            .collect(),
        order: p
            .order()
            .iter()
            .map(|&(a, b)| (ref_out(a), ref_out(b)))
            .collect(),
    }
}

pub fn to_json_value(p: &Poset) -> serde_json::Value {
    serde_json::to_value(to_dto(p)).expect("poset DTO serializes")
}

/// Pretty-printed JSON; order pairs are transitively closed and sorted.
pub fn to_json(p: &Poset) -> String {
    serde_json::to_string_pretty(&to_dto(p)).expect("poset DTO serializes")
}

/// Parse and validate. Order and visibility are closed on input; the
/// remaining well-formedness clauses are checked.
pub fn from_json(text: &str) -> Result<Poset, PosetError> {
    let dto: PosetDto = serde_json::from_str(text).map_err(|e| PosetError::Json(e.to_string()))?;
    let mut ids = BTreeMap::new();
    for (i, v) in dto.vertices.iter().enumerate() {
        if ids.insert(v.id, i).is_some() {
            return Err(PosetError::Json(format!("duplicate vertex id {}", v.id)));
        }
    }
    let n = dto.inputs;
    let mut vertices = Vec::with_capacity(dto.vertices.len());
    for v in &dto.vertices {
        vertices.push(match (v.kind.as_str(), &v.visibility) {
            ("action", None) => Vertex::Action(v.label.clone()),
            ("hole", Some(vis)) => Vertex::Hole {
                var: v.label.clone(),
                visibility: vis
                    .iter()
                    .map(|slot| slot.iter().map(|r| ref_in(r, &ids, n)).collect())
                    .collect::<Result<Vec<BTreeSet<_>>, _>>()?,
            },
            ("action", Some(_)) => {
                return Err(PosetError::Json(format!("action {} has visibility", v.id)))
            }
            ("hole", None) => {
                return Err(PosetError::Json(format!("hole {} lacks visibility", v.id)))
            }
            (other, _) => return Err(PosetError::Json(format!("unknown vertex kind {other:?}"))),
        });
    }
    let order = dto
        .order
        .iter()
        .map(|(a, b)| Ok((ref_in(a, &ids, n)?, ref_in(b, &ids, n)?)))
        .collect::<Result<Vec<_>, PosetError>>()?;
    let p = Poset::new(n, vertices, order);
    p.check_well_formed()?;
    Ok(p)
}
