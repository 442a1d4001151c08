use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::ids::{graph_of, ParamContext, TidSet};
use crate::term::{
    fresh_name, infer_context, rename_apart, scope_check, subst_comp, CompContext, Label, ParamSet,
    Term,
};

use super::{iso_check, ElemRef, Poset, PosetError, Vertex};

/// Interpret a term as a poset over `delta.len()` inputs.
pub fn interp(term: &Term, gamma: &CompContext, delta: &ParamContext) -> Result<Poset, PosetError> {
    let t = rename_apart(term, delta);
    scope_check(&t, gamma, delta)?;
    let mut names: Vec<String> = delta.names().to_vec();
    interp_in(&t, &mut names)
}

fn indices(set: &ParamSet, names: &[String]) -> BTreeSet<usize> {
    set.iter()
        .map(|n| {
            names
                .iter()
                .rposition(|m| m == n)
                .expect("scope checked before interpretation")
        })
        .collect()
}

fn interp_in(term: &Term, names: &mut Vec<String>) -> Result<Poset, PosetError> {
    let p = names.len();
    Ok(match term {
        Term::Var { name, args } => {
            let args: Vec<BTreeSet<usize>> = args.iter().map(|a| indices(a, names)).collect();
            Poset::hole(name, &args, p)
        }
        Term::Fork {
            binder,
            parent,
            child,
        } => {
            let q = interp_in(child, names)?;
            names.push(binder.clone());
            let r = interp_in(parent, names);
            names.pop();
            Poset::op_fork(&r?, &q)?
        }
        Term::Wait { guard, cont } => {
            let k = interp_in(cont, names)?;
            let u = TidSet::from_indices(p, indices(guard, names));
            k.op_wait().relabel(&graph_of(&[u], p)?)?
        }
        Term::Stop => Poset::stop(p),
        Term::Act(l) => Poset::act(l, p),
    })
}

/// A reference inside a normal form: an input or an earlier child's binder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NfRef {
    Input(usize),
    Binder(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NfBody {
    Act(Label),
    Var {
        name: String,
        args: Vec<BTreeSet<NfRef>>,
    },
}

/// Child `i` binds binder `i`, waits on `guard`, then runs `body`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NfChild {
    pub guard: BTreeSet<NfRef>,
    pub body: NfBody,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NormalForm {
    pub n_inputs: usize,
    pub children: Vec<NfChild>,
    pub final_guard: BTreeSet<NfRef>,
}

impl NormalForm {
    /// Closure conditions: every set mentioning binder `j` contains
    /// `guard_j`, and a variable body sees at least what its thread waited on.
    pub fn satisfies_closure(&self) -> bool {
        let closed = |set: &BTreeSet<NfRef>| {
            set.iter().all(|r| match r {
                NfRef::Binder(j) => {
                    *j < self.children.len() && self.children[*j].guard.is_subset(set)
                }
                NfRef::Input(i) => *i < self.n_inputs,
            })
        };
        let earlier = |i: usize, set: &BTreeSet<NfRef>| {
            set.iter().all(|r| match r {
                NfRef::Binder(j) => *j < i,
                NfRef::Input(_) => true,
            })
        };
        self.children.iter().enumerate().all(|(i, c)| {
            closed(&c.guard)
                && earlier(i, &c.guard)
                && match &c.body {
                    NfBody::Act(_) => true,
                    NfBody::Var { args, .. } => args
                        .iter()
                        .all(|a| closed(a) && earlier(i, a) && c.guard.is_subset(a)),
                }
        }) && closed(&self.final_guard)
    }

    fn binder_names(&self, delta: &ParamContext) -> Vec<String> {
        let mut avoid: BTreeSet<String> = delta.names().iter().cloned().collect();
        (1..=self.children.len())
            .map(|i| {
                let n = fresh_name(&format!("b{i}"), &avoid);
                avoid.insert(n.clone());
                n
            })
            .collect()
    }

    /// The fork chain `fork(b1. fork(b2. ... wait(final, stop), ...), wait(g1, body1))`.
    pub fn to_term(&self, delta: &ParamContext) -> Term {
        assert_eq!(delta.len(), self.n_inputs, "context size must match inputs");
        let binders = self.binder_names(delta);
        let name = |r: &NfRef| match r {
            NfRef::Input(i) => delta.names()[*i].clone(),
            NfRef::Binder(j) => binders[*j].clone(),
        };
        let set = |s: &BTreeSet<NfRef>| -> ParamSet { s.iter().map(name).collect() };
        let mut acc = Term::wait_set(set(&self.final_guard), Term::Stop);
        for (i, c) in self.children.iter().enumerate().rev() {
            let body = match &c.body {
                NfBody::Act(l) => Term::Act(l.clone()),
                NfBody::Var { name, args } => Term::Var {
                    name: name.clone(),
                    args: args.iter().map(set).collect(),
                },
            };
            acc = Term::Fork {
                binder: binders[i].clone(),
                parent: Box::new(acc),
                child: Box::new(Term::wait_set(set(&c.guard), body)),
            };
        }
        acc
    }

    /// Context `a1, ..., an` used when no names are supplied.
    pub fn default_context(&self) -> ParamContext {
        ParamContext::new((1..=self.n_inputs).map(|i| format!("a{i}")))
            .expect("generated names are distinct")
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term(&self.default_context()))
    }
}

/// Hole children sort after actions, then by body and guard.
type ChildKey = (u8, NfBody, BTreeSet<NfRef>);

/// Linearize a well-formed poset into a normal form.
pub fn reify(p: &Poset) -> Result<NormalForm, PosetError> {
    p.check_well_formed()?;
    let k = p.vertices().len();
    let mut deps: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); k];
    for &(a, b) in p.order().iter().chain(p.visibility_pairs().iter()) {
        if let (ElemRef::V(i), ElemRef::V(j)) = (a, b) {
            deps[j].insert(i);
        }
    }
    let mut position: BTreeMap<usize, usize> = BTreeMap::new();
    let to_ref = |e: &ElemRef, position: &BTreeMap<usize, usize>| match e {
        ElemRef::In(i) => NfRef::Input(*i),
        ElemRef::V(v) => NfRef::Binder(position[v]),
        ElemRef::Star => unreachable!("the end is never visible nor below anything"),
    };
    let mut children = Vec::with_capacity(k);
    while position.len() < k {
        let mut best: Option<(ChildKey, usize)> = None;
        for v in (0..k).filter(|v| !position.contains_key(v)) {
            if !deps[v].iter().all(|d| position.contains_key(d)) {
                continue;
            }
            let guard: BTreeSet<NfRef> = p
                .predecessors(ElemRef::V(v))
                .iter()
                .map(|e| to_ref(e, &position))
                .collect();
            let body = match &p.vertices()[v] {
                Vertex::Action(l) => NfBody::Act(l.clone()),
                Vertex::Hole { var, visibility } => NfBody::Var {
                    name: var.clone(),
                    args: visibility
                        .iter()
                        .map(|s| {
                            s.iter()
                                .filter(|e| **e != ElemRef::V(v))
                                .map(|e| to_ref(e, &position))
                                .collect()
                        })
                        .collect(),
                },
            };
            let kind = u8::from(p.vertices()[v].is_hole());
            let key = (kind, body, guard);
            if best.as_ref().is_none_or(|(b, _)| key < *b) {
                best = Some((key, v));
            }
        }
        let ((_, body, guard), v) = best.expect("order plus visibility is acyclic");
        position.insert(v, children.len());
        children.push(NfChild { guard, body });
    }
    let final_guard = p
        .predecessors(ElemRef::Star)
        .iter()
        .map(|e| to_ref(e, &position))
        .collect();
    Ok(NormalForm {
        n_inputs: p.n_inputs(),
        children,
        final_guard,
    })
}

pub fn normalize(
    term: &Term,
    gamma: &CompContext,
    delta: &ParamContext,
) -> Result<NormalForm, PosetError> {
    reify(&interp(term, gamma, delta)?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Equality {
    /// Image of each vertex of the left interpretation.
    Equal(Vec<usize>),
    NotEqual(String),
}

impl Equality {
    pub fn is_equal(&self) -> bool {
        matches!(self, Equality::Equal(_))
    }
}

fn label_counts(p: &Poset) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for v in p.vertices() {
        let key = match v {
            Vertex::Action(l) => format!("act[{l}]"),
            Vertex::Hole { var, .. } => format!("hole {var}"),
        };
        *out.entry(key).or_insert(0) += 1;
    }
    out
}

/// Explain why two posets are not isomorphic.
pub(crate) fn discriminate(p: &Poset, q: &Poset) -> String {
    let (cp, cq) = (label_counts(p), label_counts(q));
    if cp != cq {
        return format!("vertex counts differ: {cp:?} vs {cq:?}");
    }
    if p.order().len() != q.order().len() {
        return format!(
            "order sizes differ: {} vs {} strict pairs",
            p.order().len(),
            q.order().len()
        );
    }
    "no bijection preserves labels, order and visibility".to_string()
}

pub fn decide_equal(
    t1: &Term,
    t2: &Term,
    gamma: &CompContext,
    delta: &ParamContext,
) -> Result<Equality, PosetError> {
    let p = interp(t1, gamma, delta)?;
    let q = interp(t2, gamma, delta)?;
    Ok(match iso_check(&p, &q) {
        Some(m) => Equality::Equal(m),
        None => Equality::NotEqual(discriminate(&p, &q)),
    })
}

/// Substitute `guest` (over `n + m` inputs) for every hole `x` of `host`.
pub fn poset_subst(host: &Poset, x: &str, m: usize, guest: &Poset) -> Result<Poset, PosetError> {
    let n = host.n_inputs();
    if guest.n_inputs() != n + m {
        return Err(PosetError::DimensionMismatch {
            expected: n + m,
            found: guest.n_inputs(),
        });
    }
    let host_nf = reify(host)?;
    let delta = host_nf.default_context();
    let mut avoid: BTreeSet<String> = delta.names().iter().cloned().collect();
    let binders: Vec<String> = (1..=m)
        .map(|i| {
            let c = fresh_name(&format!("c{i}"), &avoid);
            avoid.insert(c.clone());
            c
        })
        .collect();
    let guest_ctx =
        ParamContext::new(delta.names().iter().cloned().chain(binders.iter().cloned()))?;
    let guest_term = reify(guest)?.to_term(&guest_ctx);
    let host_term = host_nf.to_term(&delta);
    let result = subst_comp(&host_term, &binders, &guest_term, x)?;
    let gamma = infer_context(&result)?;
    interp(&result, &gamma, &delta)
}
