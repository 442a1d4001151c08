//! Labelled posets with holes, inputs and a distinguished main-thread end.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::ids::{IdError, Relation};
use crate::term::{Label, ScopeError};

mod dot;
mod interp;
mod iso;
mod json;

pub use dot::to_dot;
pub use interp::{
    decide_equal, interp, normalize, poset_subst, reify, Equality, NfBody, NfChild, NfRef,
    NormalForm,
};
pub use iso::{iso_check, isomorphic};
pub use json::{from_json, to_json, to_json_value};

/// Inputs are 0-based internally and printed 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElemRef {
    In(usize),
    V(usize),
    Star,
}

impl fmt::Display for ElemRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElemRef::In(i) => write!(f, "in{}", i + 1),
            ElemRef::V(v) => write!(f, "v{v}"),
            ElemRef::Star => f.write_str("*"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Vertex {
    Action(Label),
    Hole {
        var: String,
        visibility: Vec<BTreeSet<ElemRef>>,
    },
}

impl Vertex {
    pub fn is_hole(&self) -> bool {
        matches!(self, Vertex::Hole { .. })
    }

    pub fn label(&self) -> &str {
        match self {
            Vertex::Action(l) => l,
            Vertex::Hole { var, .. } => var,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("reference {0} is out of range")]
    BadRef(ElemRef),
    #[error("order is not irreflexive at {0}")]
    Reflexive(ElemRef),
    #[error("order is not transitive: {0} < {1} < {2}")]
    NotTransitive(ElemRef, ElemRef, ElemRef),
    #[error("input {0} is not minimal")]
    InputNotMinimal(ElemRef),
    #[error("the end vertex is not maximal")]
    StarNotMaximal,
    #[error("hole {hole} is missing from its own visibility slot {slot}")]
    HoleNotSelfVisible { hole: ElemRef, slot: usize },
    #[error("the end vertex is visible to hole {hole} in slot {slot}")]
    StarVisible { hole: ElemRef, slot: usize },
    #[error("visibility slot {slot} of hole {hole} is not downward closed at {missing}")]
    NotDownClosed {
        hole: ElemRef,
        slot: usize,
        missing: ElemRef,
    },
    #[error("order together with visibility has a cycle through {0}")]
    Cycle(ElemRef),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PosetError {
    #[error("ill-formed poset: {0}")]
    IllFormed(#[from] Violation),
    #[error(transparent)]
    Ids(#[from] IdError),
    #[error(transparent)]
    Scope(#[from] ScopeError),
    #[error("dimension mismatch: expected {expected} inputs, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("bad poset JSON: {0}")]
    Json(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Poset {
    n_inputs: usize,
    vertices: Vec<Vertex>,
    order: BTreeSet<(ElemRef, ElemRef)>,
}

fn transitive_closure(order: &mut BTreeSet<(ElemRef, ElemRef)>) {
    let elems: BTreeSet<ElemRef> = order.iter().flat_map(|&(a, b)| [a, b]).collect();
    let elems: Vec<ElemRef> = elems.into_iter().collect();
    let idx: BTreeMap<ElemRef, usize> = elems.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let k = elems.len();
    let mut m = vec![vec![false; k]; k];
    for (a, b) in order.iter() {
        m[idx[a]][idx[b]] = true;
    }
    for mid in 0..k {
        for i in 0..k {
            if m[i][mid] {
                let row = m[mid].clone();
                for (cell, via) in m[i].iter_mut().zip(row) {
                    *cell |= via;
                }
            }
        }
    }
    for i in 0..k {
        for j in 0..k {
            if m[i][j] {
                order.insert((elems[i], elems[j]));
            }
        }
    }
}

impl Poset {
    /// Build a poset, closing the order transitively and each visibility
    /// slot downward (adding the hole itself).
    pub fn new(
        n_inputs: usize,
        vertices: Vec<Vertex>,
        order: impl IntoIterator<Item = (ElemRef, ElemRef)>,
    ) -> Self {
        let mut order: BTreeSet<_> = order.into_iter().collect();
        transitive_closure(&mut order);
        let mut p = Poset {
            n_inputs,
            vertices,
            order,
        };
        p.close_visibility();
        p
    }

    /// `n` inputs and nothing else.
    pub fn stop(n: usize) -> Self {
        Poset::new(n, vec![], [])
    }

    pub fn act(label: &str, n: usize) -> Self {
        Poset::new(
            n,
            vec![Vertex::Action(label.to_string())],
            [(ElemRef::V(0), ElemRef::Star)],
        )
    }

    /// A single hole below the end, with slot `j` seeing the inputs in `args[j]`.
    pub fn hole(var: &str, args: &[BTreeSet<usize>], n: usize) -> Self {
        let visibility = args
            .iter()
            .map(|a| a.iter().map(|&i| ElemRef::In(i)).collect())
            .collect();
        Poset::new(
            n,
            vec![Vertex::Hole {
                var: var.to_string(),
                visibility,
            }],
            [(ElemRef::V(0), ElemRef::Star)],
        )
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn order(&self) -> &BTreeSet<(ElemRef, ElemRef)> {
        &self.order
    }

    pub fn lt(&self, a: ElemRef, b: ElemRef) -> bool {
        self.order.contains(&(a, b))
    }

    pub fn elements(&self) -> impl Iterator<Item = ElemRef> + '_ {
        (0..self.n_inputs)
            .map(ElemRef::In)
            .chain((0..self.vertices.len()).map(ElemRef::V))
            .chain(std::iter::once(ElemRef::Star))
    }

    pub fn predecessors(&self, e: ElemRef) -> BTreeSet<ElemRef> {
        self.order
            .iter()
            .filter(|&&(_, b)| b == e)
            .map(|&(a, _)| a)
            .collect()
    }

    pub fn successors(&self, e: ElemRef) -> BTreeSet<ElemRef> {
        self.order
            .range((e, ElemRef::In(0))..)
            .take_while(|&&(a, _)| a == e)
            .map(|&(_, b)| b)
            .collect()
    }

    /// Pairs `(a, b)` with `a < b` and nothing strictly between.
    pub fn covering_pairs(&self) -> Vec<(ElemRef, ElemRef)> {
        self.order
            .iter()
            .filter(|&&(a, b)| !self.successors(a).iter().any(|&m| m != b && self.lt(m, b)))
            .copied()
            .collect()
    }

    pub fn action_count(&self) -> usize {
        self.vertices.iter().filter(|v| !v.is_hole()).count()
    }

    pub fn hole_count(&self) -> usize {
        self.vertices.iter().filter(|v| v.is_hole()).count()
    }

    fn close_visibility(&mut self) {
        let preds: Vec<BTreeSet<ElemRef>> = (0..self.vertices.len())
            .map(|v| self.predecessors(ElemRef::V(v)))
            .collect();
        let all_preds: BTreeMap<ElemRef, BTreeSet<ElemRef>> =
            self.elements().map(|e| (e, self.predecessors(e))).collect();
        for (v, vertex) in self.vertices.iter_mut().enumerate() {
            if let Vertex::Hole { visibility, .. } = vertex {
                for slot in visibility.iter_mut() {
                    slot.insert(ElemRef::V(v));
                    slot.extend(preds[v].iter().copied());
                    let extra: Vec<ElemRef> = slot
                        .iter()
                        .flat_map(|e| all_preds.get(e).into_iter().flatten().copied())
                        .collect();
                    slot.extend(extra);
                }
            }
        }
    }

    fn valid_ref(&self, e: ElemRef) -> bool {
        match e {
            ElemRef::In(i) => i < self.n_inputs,
            ElemRef::V(v) => v < self.vertices.len(),
            ElemRef::Star => true,
        }
    }

    /// The relation `S`: `(e', h)` whenever `e'` is visible to hole `h`.
    pub fn visibility_pairs(&self) -> BTreeSet<(ElemRef, ElemRef)> {
        let mut out = BTreeSet::new();
        for (v, vertex) in self.vertices.iter().enumerate() {
            if let Vertex::Hole { visibility, .. } = vertex {
                for e in visibility.iter().flatten() {
                    if *e != ElemRef::V(v) {
                        out.insert((*e, ElemRef::V(v)));
                    }
                }
            }
        }
        out
    }

    /// Report the first violated well-formedness clause.
    pub fn check_well_formed(&self) -> Result<(), Violation> {
        for &(a, b) in &self.order {
            for e in [a, b] {
                if !self.valid_ref(e) {
                    return Err(Violation::BadRef(e));
                }
            }
            if a == b {
                return Err(Violation::Reflexive(a));
            }
        }
        for &(a, b) in &self.order {
            for c in self.successors(b) {
                if !self.lt(a, c) {
                    return Err(Violation::NotTransitive(a, b, c));
                }
            }
        }
        for &(_, b) in &self.order {
            if let ElemRef::In(_) = b {
                return Err(Violation::InputNotMinimal(b));
            }
        }
        if self.order.iter().any(|&(a, _)| a == ElemRef::Star) {
            return Err(Violation::StarNotMaximal);
        }
        for (v, vertex) in self.vertices.iter().enumerate() {
            let hole = ElemRef::V(v);
            if let Vertex::Hole { visibility, .. } = vertex {
                for (slot, set) in visibility.iter().enumerate() {
                    if let Some(&bad) = set.iter().find(|e| !self.valid_ref(**e)) {
                        return Err(Violation::BadRef(bad));
                    }
                    if !set.contains(&hole) {
                        return Err(Violation::HoleNotSelfVisible { hole, slot });
                    }
                    if set.contains(&ElemRef::Star) {
                        return Err(Violation::StarVisible { hole, slot });
                    }
                    for e in set {
                        if let Some(missing) =
                            self.predecessors(*e).into_iter().find(|d| !set.contains(d))
                        {
                            return Err(Violation::NotDownClosed {
                                hole,
                                slot,
                                missing,
                            });
                        }
                    }
                }
            }
        }
        let mut combined = self.order.clone();
        combined.extend(self.visibility_pairs());
        transitive_closure(&mut combined);
        if let Some(&(a, _)) = combined.iter().find(|(a, b)| a == b) {
            return Err(Violation::Cycle(a));
        }
        Ok(())
    }

    pub fn is_well_formed(&self) -> bool {
        self.check_well_formed().is_ok()
    }

    /// Functorial action of a relation on the inputs (direct image).
    pub fn relabel(&self, r: &Relation) -> Result<Poset, PosetError> {
        if r.src() != self.n_inputs {
            return Err(PosetError::DimensionMismatch {
                expected: self.n_inputs,
                found: r.src(),
            });
        }
        let map_ref = |e: ElemRef| -> Vec<ElemRef> {
            match e {
                ElemRef::In(i) => r.image(i).map(ElemRef::In).collect(),
                other => vec![other],
            }
        };
        let order = self
            .order
            .iter()
            .flat_map(|&(a, b)| {
                let bs = map_ref(b);
                map_ref(a)
                    .into_iter()
                    .flat_map(move |a2| bs.clone().into_iter().map(move |b2| (a2, b2)))
            })
            .collect::<Vec<_>>();
        let vertices = self
            .vertices
            .iter()
            .map(|v| match v {
                Vertex::Action(_) => v.clone(),
                Vertex::Hole { var, visibility } => Vertex::Hole {
                    var: var.clone(),
                    visibility: visibility
                        .iter()
                        .map(|s| s.iter().flat_map(|&e| map_ref(e)).collect())
                        .collect(),
                },
            })
            .collect();
        Ok(Poset::new(r.dst(), vertices, order))
    }

    /// Add a new last input below every vertex and the end.
    pub fn op_wait(&self) -> Poset {
        let new = ElemRef::In(self.n_inputs);
        let mut order = self.order.clone();
        for v in 0..self.vertices.len() {
            order.insert((new, ElemRef::V(v)));
        }
        order.insert((new, ElemRef::Star));
        let vertices = self
            .vertices
            .iter()
            .map(|v| match v {
                Vertex::Action(_) => v.clone(),
                Vertex::Hole { var, visibility } => Vertex::Hole {
                    var: var.clone(),
                    visibility: visibility
                        .iter()
                        .map(|s| {
                            let mut s = s.clone();
                            s.insert(new);
                            s
                        })
                        .collect(),
                },
            })
            .collect();
        Poset::new(self.n_inputs + 1, vertices, order)
    }

    /// `parent` has one more input than `child`; that input is connected
    /// to everything below the child's end, which is then removed.
    pub fn op_fork(parent: &Poset, child: &Poset) -> Result<Poset, PosetError> {
        let n = child.n_inputs;
        if parent.n_inputs != n + 1 {
            return Err(PosetError::DimensionMismatch {
                expected: n + 1,
                found: parent.n_inputs,
            });
        }
        let offset = child.vertices.len();
        let below_end = child.predecessors(ElemRef::Star);
        let connect = ElemRef::In(n);
        let shift = |e: ElemRef| -> Vec<ElemRef> {
            match e {
                ElemRef::V(v) => vec![ElemRef::V(v + offset)],
                e if e == connect => below_end.iter().copied().collect(),
                e => vec![e],
            }
        };
        let mut order: Vec<(ElemRef, ElemRef)> = child
            .order
            .iter()
            .filter(|&&(_, b)| b != ElemRef::Star)
            .copied()
            .collect();
        for &(a, b) in &parent.order {
            for a2 in shift(a) {
                for b2 in shift(b) {
                    order.push((a2, b2));
                }
            }
        }
        let mut vertices = child.vertices.clone();
        for v in &parent.vertices {
            vertices.push(match v {
                Vertex::Action(_) => v.clone(),
                Vertex::Hole { var, visibility } => Vertex::Hole {
                    var: var.clone(),
                    visibility: visibility
                        .iter()
                        .map(|s| s.iter().flat_map(|&e| shift(e)).collect())
                        .collect(),
                },
            });
        }
        Ok(Poset::new(n, vertices, order))
    }

    /// Drop the end vertex's order pairs (an ordinary labelled poset view).
    pub fn erase_star(&self) -> Poset {
        Poset {
            n_inputs: self.n_inputs,
            vertices: self.vertices.clone(),
            order: self
                .order
                .iter()
                .filter(|&&(a, b)| a != ElemRef::Star && b != ElemRef::Star)
                .copied()
                .collect(),
        }
    }
}

impl fmt::Display for Poset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "inputs: {}", self.n_inputs)?;
        for (v, vertex) in self.vertices.iter().enumerate() {
            match vertex {
                Vertex::Action(l) => writeln!(f, "v{v}: act {l}")?,
                Vertex::Hole { var, visibility } => {
                    write!(f, "v{v}: hole {var}/{}", visibility.len())?;
                    for slot in visibility {
                        let names: Vec<String> = slot.iter().map(ToString::to_string).collect();
                        write!(f, " {{{}}}", names.join(","))?;
                    }
                    writeln!(f)?;
                }
            }
        }
        let pairs: Vec<String> = self
            .covering_pairs()
            .iter()
            .map(|(a, b)| format!("{a}<{b}"))
            .collect();
        write!(f, "order: {}", pairs.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::{graph_of, TidSet};
    use ElemRef::*;

    fn fig5a() -> Poset {
        Poset::new(
            0,
            vec![Vertex::Action("s1".into()), Vertex::Action("s2".into())],
            [(V(0), V(1)), (V(1), Star)],
        )
    }

    #[test]
    fn closure_is_eager() {
        let p = fig5a();
        assert!(p.lt(V(0), Star));
        assert_eq!(p.check_well_formed(), Ok(()));
        assert_eq!(p.covering_pairs(), vec![(V(0), V(1)), (V(1), Star)]);
    }

    #[test]
    fn empty_poset_is_well_formed() {
        assert_eq!(Poset::stop(0).check_well_formed(), Ok(()));
        assert_eq!(Poset::stop(0).elements().count(), 1);
    }

    #[test]
    fn visibility_cycle_is_rejected() {
        // hole h sees action s, while h < s in the order
        let p = Poset {
            n_inputs: 0,
            vertices: vec![
                Vertex::Hole {
                    var: "x".into(),
                    visibility: vec![BTreeSet::from([V(0), V(1)])],
                },
                Vertex::Action("s".into()),
            ],
            order: BTreeSet::from([(V(0), V(1)), (V(0), Star), (V(1), Star)]),
        };
        assert!(matches!(
            p.check_well_formed(),
            Err(Violation::Cycle(_)) | Err(Violation::NotDownClosed { .. })
        ));
        // the same shape with the downward closure satisfied still cycles
        let q = Poset {
            order: BTreeSet::from([(V(0), V(1))]),
            ..p
        };
        assert_eq!(q.check_well_formed(), Err(Violation::Cycle(V(0))));
    }

    #[test]
    fn wf_negative_cases() {
        let input_not_min = Poset {
            n_inputs: 1,
            vertices: vec![Vertex::Action("s".into())],
            order: BTreeSet::from([(V(0), In(0))]),
        };
        assert_eq!(
            input_not_min.check_well_formed(),
            Err(Violation::InputNotMinimal(In(0)))
        );
        let star_visible = Poset {
            n_inputs: 0,
            vertices: vec![Vertex::Hole {
                var: "x".into(),
                visibility: vec![BTreeSet::from([V(0), Star])],
            }],
            order: BTreeSet::new(),
        };
        assert!(matches!(
            star_visible.check_well_formed(),
            Err(Violation::StarVisible { .. })
        ));
        let not_self = Poset {
            n_inputs: 0,
            vertices: vec![Vertex::Hole {
                var: "x".into(),
                visibility: vec![BTreeSet::new()],
            }],
            order: BTreeSet::new(),
        };
        assert!(matches!(
            not_self.check_well_formed(),
            Err(Violation::HoleNotSelfVisible { .. })
        ));
    }

    #[test]
    fn stop_and_act() {
        let a = Poset::act("s1", 2);
        assert_eq!(a.order().len(), 1);
        assert!(a.predecessors(V(0)).is_empty());
        assert!(a.check_well_formed().is_ok());
        assert!(Poset::stop(0).order().is_empty());
    }

    #[test]
    fn op_wait_on_stop() {
        let w = Poset::stop(0).op_wait();
        assert_eq!(w.n_inputs(), 1);
        assert_eq!(w.order(), &BTreeSet::from([(In(0), Star)]));
    }

    #[test]
    fn op_fork_connects_child_end() {
        // parent: In(1) < s2 < *, child: s1 < *
        let parent = Poset::act("s2", 0).op_wait();
        let child = Poset::act("s1", 0);
        let forked = Poset::op_fork(&parent, &child).unwrap();
        assert!(isomorphic(&forked, &fig5a()));
        assert!(forked.is_well_formed());
    }

    #[test]
    fn op_fork_dimension_check() {
        let err = Poset::op_fork(&Poset::stop(0), &Poset::stop(0));
        assert!(matches!(err, Err(PosetError::DimensionMismatch { .. })));
    }

    #[test]
    fn relabel_merges_inputs() {
        let p = Poset::act("s", 0).op_wait().op_wait();
        let r = graph_of(&[TidSet::from_indices(1, [0])], 1).unwrap();
        let merged = p.relabel(&r).unwrap();
        let once = Poset::act("s", 0).op_wait();
        assert!(isomorphic(&merged, &once));
        assert!(matches!(
            p.relabel(&Relation::identity(3)),
            Err(PosetError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn relabel_moves_visibility() {
        let p = Poset::hole("x", &[BTreeSet::from([1])], 2);
        let r = Relation::new(2, 1, [(1, 0)]).unwrap();
        let q = p.relabel(&r).unwrap();
        match &q.vertices()[0] {
            Vertex::Hole { visibility, .. } => {
                assert_eq!(visibility[0], BTreeSet::from([In(0), V(0)]))
            }
            _ => unreachable!(),
        }
    }
}
