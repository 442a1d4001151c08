use std::collections::BTreeSet;

use super::{ElemRef, Poset, Vertex};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Signature {
    kind: u8,
    label: String,
    arity: usize,
    inputs_below: BTreeSet<usize>,
    below_star: bool,
    n_pred: usize,
    n_succ: usize,
}

struct Dense {
    k: usize,
    lt: Vec<Vec<bool>>,
    sigs: Vec<Signature>,
}

fn dense(p: &Poset) -> Dense {
    let k = p.vertices().len();
    let mut lt = vec![vec![false; k]; k];
    for &(a, b) in p.order() {
        if let (ElemRef::V(i), ElemRef::V(j)) = (a, b) {
            lt[i][j] = true;
        }
    }
    let sigs = p
        .vertices()
        .iter()
        .enumerate()
        .map(|(v, vertex)| {
            let (kind, arity) = match vertex {
                Vertex::Action(_) => (0, 0),
                Vertex::Hole { visibility, .. } => (1, visibility.len()),
            };
            Signature {
                kind,
                label: vertex.label().to_string(),
                arity,
                inputs_below: p
                    .predecessors(ElemRef::V(v))
                    .into_iter()
                    .filter_map(|e| match e {
                        ElemRef::In(i) => Some(i),
                        _ => None,
                    })
                    .collect(),
                below_star: p.lt(ElemRef::V(v), ElemRef::Star),
                n_pred: (0..k).filter(|&u| lt[u][v]).count(),
                n_succ: (0..k).filter(|&u| lt[v][u]).count(),
            }
        })
        .collect();
    Dense { k, lt, sigs }
}

fn map_ref(e: ElemRef, m: &[usize]) -> ElemRef {
    match e {
        ElemRef::V(v) => ElemRef::V(m[v]),
        other => other,
    }
}

fn visibility_matches(p: &Poset, q: &Poset, m: &[usize]) -> bool {
    p.vertices()
        .iter()
        .enumerate()
        .all(|(v, vertex)| match (vertex, &q.vertices()[m[v]]) {
            (Vertex::Hole { visibility: fp, .. }, Vertex::Hole { visibility: fq, .. }) => fp
                .iter()
                .zip(fq)
                .all(|(sp, sq)| sp.iter().map(|&e| map_ref(e, m)).collect::<BTreeSet<_>>() == *sq),
            (Vertex::Action(_), Vertex::Action(_)) => true,
            _ => false,
        })
}

/// Find a label-, order- and visibility-preserving bijection on vertices
/// fixing inputs and the end. `result[v]` is the image of vertex `v`.
pub fn iso_check(p: &Poset, q: &Poset) -> Option<Vec<usize>> {
    if p.n_inputs() != q.n_inputs() || p.vertices().len() != q.vertices().len() {
        return None;
    }
    if p.order().len() != q.order().len() {
        return None;
    }
    let dp = dense(p);
    let dq = dense(q);
    let mut sp = dp.sigs.clone();
    let mut sq = dq.sigs.clone();
    sp.sort();
    sq.sort();
    if sp != sq {
        return None;
    }
    // predecessors first, so order constraints are checked early
    let mut seq: Vec<usize> = (0..dp.k).collect();
    seq.sort_by_key(|&v| (dp.sigs[v].n_pred, v));
    let candidates: Vec<Vec<usize>> = (0..dp.k)
        .map(|v| (0..dq.k).filter(|&w| dq.sigs[w] == dp.sigs[v]).collect())
        .collect();
    let mut mapping = vec![usize::MAX; dp.k];
    let mut used = vec![false; dq.k];
    if search(
        0,
        &seq,
        &candidates,
        &dp,
        &dq,
        &mut mapping,
        &mut used,
        p,
        q,
    ) {
        Some(mapping)
    } else {
        None
    }
}

#[allow(clippy::too_many_arguments)]
fn search(
    depth: usize,
    seq: &[usize],
    candidates: &[Vec<usize>],
    dp: &Dense,
    dq: &Dense,
    mapping: &mut Vec<usize>,
    used: &mut Vec<bool>,
    p: &Poset,
    q: &Poset,
) -> bool {
    if depth == seq.len() {
        return visibility_matches(p, q, mapping);
    }
    let v = seq[depth];
    for &w in &candidates[v] {
        if used[w] {
            continue;
        }
        let consistent = seq[..depth].iter().all(|&u| {
            let mu = mapping[u];
            dp.lt[u][v] == dq.lt[mu][w] && dp.lt[v][u] == dq.lt[w][mu]
        });
        if !consistent {
            continue;
        }
        mapping[v] = w;
        used[w] = true;
        if search(depth + 1, seq, candidates, dp, dq, mapping, used, p, q) {
            return true;
        }
        used[w] = false;
        mapping[v] = usize::MAX;
    }
    false
}

pub fn isomorphic(p: &Poset, q: &Poset) -> bool {
    iso_check(p, q).is_some()
}
