//! Terms of the parameterized theory of dynamic threads.
//!
//! Signature: `fork : (0 | 1, 0)`, `wait : (1 | 0)`, `stop : (0 |)` and
//! `act[l] : (0 |)`, plus computation variables applied to thread-ID
//! arguments. Thread-ID arguments are stored already quotiented, as sets of
//! parameter names.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::ids::ParamContext;

/// A semilattice term in a term: the set of parameter names it joins.
pub type ParamSet = BTreeSet<String>;

pub type Label = String;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScopeError {
    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),
    #[error("unbound computation variable `{0}`")]
    UnboundVariable(String),
    #[error("variable `{name}` has arity {expected} but is applied to {found} arguments")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("binder `{0}` shadows a parameter already in scope")]
    ShadowedBinder(String),
    #[error("duplicate computation variable `{0}` in context")]
    DuplicateVariable(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var {
        name: String,
        args: Vec<ParamSet>,
    },
    Fork {
        binder: String,
        parent: Box<Term>,
        child: Box<Term>,
    },
    Wait {
        guard: ParamSet,
        cont: Box<Term>,
    },
    Stop,
    Act(Label),
}

/// `x1 : m1, ..., xk : mk`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct CompContext {
    entries: Vec<(String, usize)>,
}

impl CompContext {
    pub fn new<I, S>(entries: I) -> Result<Self, ScopeError>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut ctx = CompContext::default();
        for (name, arity) in entries {
            ctx.push(name, arity)?;
        }
        Ok(ctx)
    }

    pub fn push(&mut self, name: impl Into<String>, arity: usize) -> Result<(), ScopeError> {
        let name = name.into();
        if self.arity(&name).is_some() {
            return Err(ScopeError::DuplicateVariable(name));
        }
        self.entries.push((name, arity));
        Ok(())
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|&(_, m)| m)
    }

    pub fn entries(&self) -> &[(String, usize)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn params<'a>(names: impl IntoIterator<Item = &'a str>) -> ParamSet {
    names.into_iter().map(str::to_string).collect()
}

impl Term {
    pub fn var(name: &str, args: &[&[&str]]) -> Term {
        Term::Var {
            name: name.to_string(),
            args: args.iter().map(|a| params(a.iter().copied())).collect(),
        }
    }

    pub fn fork(binder: &str, parent: Term, child: Term) -> Term {
        Term::Fork {
            binder: binder.to_string(),
            parent: Box::new(parent),
            child: Box::new(child),
        }
    }

    pub fn wait(guard: &[&str], cont: Term) -> Term {
        Term::Wait {
            guard: params(guard.iter().copied()),
            cont: Box::new(cont),
        }
    }

    pub fn wait_set(guard: ParamSet, cont: Term) -> Term {
        Term::Wait {
            guard,
            cont: Box::new(cont),
        }
    }

    pub fn act(label: &str) -> Term {
        Term::Act(label.to_string())
    }

    /// Number of operation and variable nodes.
    pub fn size(&self) -> usize {
        match self {
            Term::Var { .. } | Term::Stop | Term::Act(_) => 1,
            Term::Fork { parent, child, .. } => 1 + parent.size() + child.size(),
            Term::Wait { cont, .. } => 1 + cont.size(),
        }
    }

    pub fn free_params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var { args, .. } => out.extend(args.iter().flatten().cloned()),
            Term::Fork {
                binder,
                parent,
                child,
            } => {
                let mut inner = parent.free_params();
                inner.remove(binder);
                out.extend(inner);
                child.collect_free(out);
            }
            Term::Wait { guard, cont } => {
                out.extend(guard.iter().cloned());
                cont.collect_free(out);
            }
            Term::Stop | Term::Act(_) => {}
        }
    }

    /// Every name occurring anywhere, bound or free.
    pub fn all_params(&self) -> BTreeSet<String> {
        let mut out = self.free_params();
        self.visit(&mut |t| {
            if let Term::Fork { binder, .. } = t {
                out.insert(binder.clone());
            }
        });
        out
    }

    pub fn labels(&self) -> BTreeSet<Label> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| {
            if let Term::Act(l) = t {
                out.insert(l.clone());
            }
        });
        out
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| {
            if let Term::Var { name, .. } = t {
                out.insert(name.clone());
            }
        });
        out
    }

    fn visit(&self, f: &mut impl FnMut(&Term)) {
        f(self);
        match self {
            Term::Fork { parent, child, .. } => {
                parent.visit(f);
                child.visit(f);
            }
            Term::Wait { cont, .. } => cont.visit(f),
            _ => {}
        }
    }
}

/// Check `gamma | delta |- term`. Binders must be distinct from every
/// parameter in scope at the point they are introduced.
pub fn scope_check(
    term: &Term,
    gamma: &CompContext,
    delta: &ParamContext,
) -> Result<(), ScopeError> {
    let mut scope: Vec<String> = delta.names().to_vec();
    check_in(term, gamma, &mut scope)
}

fn check_set(set: &ParamSet, scope: &[String]) -> Result<(), ScopeError> {
    match set.iter().find(|n| !scope.contains(n)) {
        Some(n) => Err(ScopeError::UnboundParameter(n.clone())),
        None => Ok(()),
    }
}

fn check_in(term: &Term, gamma: &CompContext, scope: &mut Vec<String>) -> Result<(), ScopeError> {
    match term {
        Term::Var { name, args } => {
            let expected = gamma
                .arity(name)
                .ok_or_else(|| ScopeError::UnboundVariable(name.clone()))?;
            if expected != args.len() {
                return Err(ScopeError::ArityMismatch {
                    name: name.clone(),
                    expected,
                    found: args.len(),
                });
            }
            args.iter().try_for_each(|a| check_set(a, scope))
        }
        Term::Fork {
            binder,
            parent,
            child,
        } => {
            if scope.contains(binder) {
                return Err(ScopeError::ShadowedBinder(binder.clone()));
            }
            check_in(child, gamma, scope)?;
            scope.push(binder.clone());
            let res = check_in(parent, gamma, scope);
            scope.pop();
            res
        }
        Term::Wait { guard, cont } => {
            check_set(guard, scope)?;
            check_in(cont, gamma, scope)
        }
        Term::Stop | Term::Act(_) => Ok(()),
    }
}

/// A name based on `base` that avoids `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    if !avoid.contains(base) {
        return base.to_string();
    }
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "p" } else { stem };
    (1..)
        .map(|i| format!("{stem}{i}"))
        .find(|n| !avoid.contains(n))
        .expect("infinitely many candidates")
}

fn apply_map(set: &ParamSet, map: &BTreeMap<String, ParamSet>) -> ParamSet {
    let mut out = ParamSet::new();
    for n in set {
        match map.get(n) {
            Some(rep) => out.extend(rep.iter().cloned()),
            None => {
                out.insert(n.clone());
            }
        }
    }
    out
}

/// Simultaneous capture-avoiding parameter substitution.
pub fn subst_params(term: &Term, map: &BTreeMap<String, ParamSet>) -> Term {
    if map.is_empty() {
        return term.clone();
    }
    match term {
        Term::Var { name, args } => Term::Var {
            name: name.clone(),
            args: args.iter().map(|a| apply_map(a, map)).collect(),
        },
        Term::Wait { guard, cont } => Term::Wait {
            guard: apply_map(guard, map),
            cont: Box::new(subst_params(cont, map)),
        },
        Term::Fork {
            binder,
            parent,
            child,
        } => {
            let child = subst_params(child, map);
            let mut inner = map.clone();
            inner.remove(binder);
            let parent_free = parent.free_params();
            inner.retain(|k, _| parent_free.contains(k));
            let incoming: BTreeSet<String> = inner.values().flatten().cloned().collect();
            let (binder, parent) = if incoming.contains(binder) {
                let mut avoid = incoming;
                avoid.extend(parent.all_params());
                avoid.extend(inner.keys().cloned());
                let fresh = fresh_name(binder, &avoid);
                inner.insert(binder.clone(), BTreeSet::from([fresh.clone()]));
                (fresh, subst_params(parent, &inner))
            } else {
                (binder.clone(), subst_params(parent, &inner))
            };
            Term::Fork {
                binder,
                parent: Box::new(parent),
                child: Box::new(child),
            }
        }
        Term::Stop | Term::Act(_) => term.clone(),
    }
}

/// `term[replacement / target]`.
pub fn subst_param(term: &Term, replacement: &ParamSet, target: &str) -> Term {
    let map = BTreeMap::from([(target.to_string(), replacement.clone())]);
    subst_params(term, &map)
}

/// `term[b1 ... bm . body / target]`: every `target(u1, ..., um)` becomes
/// `body` with each `bi` replaced by `ui`.
pub fn subst_comp(
    term: &Term,
    binders: &[String],
    body: &Term,
    target: &str,
) -> Result<Term, ScopeError> {
    let mut body_free = body.free_params();
    for b in binders {
        body_free.remove(b);
    }
    subst_comp_in(term, binders, body, &body_free, target)
}

fn subst_comp_in(
    term: &Term,
    binders: &[String],
    body: &Term,
    body_free: &BTreeSet<String>,
    target: &str,
) -> Result<Term, ScopeError> {
    Ok(match term {
        Term::Var { name, args } if name == target => {
            if args.len() != binders.len() {
                return Err(ScopeError::ArityMismatch {
                    name: name.clone(),
                    expected: binders.len(),
                    found: args.len(),
                });
            }
            let map: BTreeMap<String, ParamSet> =
                binders.iter().cloned().zip(args.iter().cloned()).collect();
            subst_params(body, &map)
        }
        Term::Fork {
            binder,
            parent,
            child,
        } => {
            let child = subst_comp_in(child, binders, body, body_free, target)?;
            // a binder that would capture a free parameter of the body is renamed first
            let (binder, parent) = if body_free.contains(binder) {
                let mut avoid = body_free.clone();
                avoid.extend(parent.all_params());
                let fresh = fresh_name(binder, &avoid);
                let renamed = subst_param(parent, &BTreeSet::from([fresh.clone()]), binder);
                (fresh, renamed)
            } else {
                (binder.clone(), (**parent).clone())
            };
            Term::Fork {
                binder,
                parent: Box::new(subst_comp_in(&parent, binders, body, body_free, target)?),
                child: Box::new(child),
            }
        }
        Term::Wait { guard, cont } => Term::Wait {
            guard: guard.clone(),
            cont: Box::new(subst_comp_in(cont, binders, body, body_free, target)?),
        },
        Term::Var { .. } | Term::Stop | Term::Act(_) => term.clone(),
    })
}

/// Rename every binder to a canonical name determined by its position, so
/// that alpha-equivalent terms become syntactically equal.
pub fn alpha_normalize(term: &Term) -> Term {
    let mut counter = 0usize;
    let avoid = term.free_params();
    normalize_in(term, &BTreeMap::new(), &mut counter, &avoid)
}

fn normalize_in(
    term: &Term,
    map: &BTreeMap<String, ParamSet>,
    counter: &mut usize,
    avoid: &BTreeSet<String>,
) -> Term {
    match term {
        Term::Var { name, args } => Term::Var {
            name: name.clone(),
            args: args.iter().map(|a| apply_map(a, map)).collect(),
        },
        Term::Wait { guard, cont } => Term::Wait {
            guard: apply_map(guard, map),
            cont: Box::new(normalize_in(cont, map, counter, avoid)),
        },
        Term::Fork {
            binder,
            parent,
            child,
        } => {
            let child = normalize_in(child, map, counter, avoid);
            let fresh = loop {
                let candidate = format!("_{counter}");
                *counter += 1;
                if !avoid.contains(&candidate) {
                    break candidate;
                }
            };
            let mut inner = map.clone();
            inner.insert(binder.clone(), BTreeSet::from([fresh.clone()]));
            Term::Fork {
                binder: fresh,
                parent: Box::new(normalize_in(parent, &inner, counter, avoid)),
                child: Box::new(child),
            }
        }
        Term::Stop | Term::Act(_) => term.clone(),
    }
}

pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    alpha_normalize(a) == alpha_normalize(b)
}

/// Rename binders so that all of them are pairwise distinct and distinct
/// from `delta`. The result passes the `ShadowedBinder` check.
pub fn rename_apart(term: &Term, delta: &ParamContext) -> Term {
    let mut used: BTreeSet<String> = delta.names().iter().cloned().collect();
    used.extend(term.free_params());
    rename_in(term, &BTreeMap::new(), &mut used)
}

fn rename_in(term: &Term, map: &BTreeMap<String, ParamSet>, used: &mut BTreeSet<String>) -> Term {
    match term {
        Term::Var { name, args } => Term::Var {
            name: name.clone(),
            args: args.iter().map(|a| apply_map(a, map)).collect(),
        },
        Term::Wait { guard, cont } => Term::Wait {
            guard: apply_map(guard, map),
            cont: Box::new(rename_in(cont, map, used)),
        },
        Term::Fork {
            binder,
            parent,
            child,
        } => {
            let child = rename_in(child, map, used);
            let fresh = fresh_name(binder, used);
            used.insert(fresh.clone());
            let mut inner = map.clone();
            inner.insert(binder.clone(), BTreeSet::from([fresh.clone()]));
            Term::Fork {
                binder: fresh,
                parent: Box::new(rename_in(parent, &inner, used)),
                child: Box::new(child),
            }
        }
        Term::Stop | Term::Act(_) => term.clone(),
    }
}

/// Read off `x:m` for every variable application in `term`.
pub fn infer_context(term: &Term) -> Result<CompContext, ScopeError> {
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    let mut err = None;
    term.visit(&mut |t| {
        if let Term::Var { name, args } = t {
            match seen.get(name) {
                Some(&m) if m != args.len() && err.is_none() => {
                    err = Some(ScopeError::ArityMismatch {
                        name: name.clone(),
                        expected: m,
                        found: args.len(),
                    })
                }
                Some(_) => {}
                None => {
                    seen.insert(name.clone(), args.len());
                }
            }
        }
    });
    match err {
        Some(e) => Err(e),
        None => CompContext::new(seen),
    }
}

/// `node[l](guard, binder. cont) = fork(binder. cont, wait(guard, act[l]))`.
pub fn derived_node(label: &str, guard: ParamSet, binder: &str, cont: Term) -> Term {
    Term::Fork {
        binder: binder.to_string(),
        parent: Box::new(cont),
        child: Box::new(Term::wait_set(guard, Term::act(label))),
    }
}

/// Perform `label`, then continue as `cont`:
/// `fork(a. wait(a, cont), act[label])`.
pub fn perform(label: &str, cont: Term) -> Term {
    let a = fresh_name("a", &cont.all_params());
    Term::fork(
        &a,
        Term::wait_set(params([a.as_str()]), cont),
        Term::act(label),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AxiomName {
    WaitUnit,
    WaitAccumulate,
    WaitClose,
    ForkWaitCommute,
    ForkCommute,
    ForkAssoc,
    ForkUnitLeft,
    ForkUnitRight,
}

impl AxiomName {
    pub const ALL: [AxiomName; 8] = [
        AxiomName::WaitUnit,
        AxiomName::WaitAccumulate,
        AxiomName::WaitClose,
        AxiomName::ForkWaitCommute,
        AxiomName::ForkCommute,
        AxiomName::ForkAssoc,
        AxiomName::ForkUnitLeft,
        AxiomName::ForkUnitRight,
    ];

    pub fn code(self) -> &'static str {
        match self {
            AxiomName::WaitUnit => "W-UNIT",
            AxiomName::WaitAccumulate => "W-ACC",
            AxiomName::WaitClose => "W-CLOSE",
            AxiomName::ForkWaitCommute => "FW-COMM",
            AxiomName::ForkCommute => "F-COMM",
            AxiomName::ForkAssoc => "F-ASSOC",
            AxiomName::ForkUnitLeft => "F-UNIT-L",
            AxiomName::ForkUnitRight => "F-UNIT-R",
        }
    }
}

impl fmt::Display for AxiomName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomInstance {
    pub name: AxiomName,
    pub gamma: CompContext,
    pub delta: ParamContext,
    pub lhs: Term,
    pub rhs: Term,
}

fn axiom(
    name: AxiomName,
    gamma: &[(&str, usize)],
    delta: &[&str],
    lhs: Term,
    rhs: Term,
) -> AxiomInstance {
    AxiomInstance {
        name,
        gamma: CompContext::new(gamma.iter().copied()).expect("distinct variables"),
        delta: ParamContext::new(delta.iter().copied()).expect("distinct parameters"),
        lhs,
        rhs,
    }
}

/// The eight equations of the theory, each at its minimal context.
pub fn axiom_schemas() -> Vec<AxiomInstance> {
    use AxiomName::*;
    let x0 = || Term::var("x", &[]);
    vec![
        axiom(WaitUnit, &[("x", 0)], &[], Term::wait(&[], x0()), x0()),
        axiom(
            WaitAccumulate,
            &[("x", 0)],
            &["a", "b"],
            Term::wait(&["a"], Term::wait(&["b"], x0())),
            Term::wait(&["a", "b"], x0()),
        ),
        axiom(
            WaitClose,
            &[("x", 1)],
            &["a", "b"],
            Term::wait(&["a"], Term::var("x", &[&["b"]])),
            Term::wait(&["a"], Term::var("x", &[&["a", "b"]])),
        ),
        axiom(
            ForkWaitCommute,
            &[("x", 1), ("y", 0)],
            &["b"],
            Term::wait(
                &["b"],
                Term::fork("a", Term::var("x", &[&["a"]]), Term::var("y", &[])),
            ),
            Term::fork(
                "a",
                Term::wait(&["b"], Term::var("x", &[&["a"]])),
                Term::wait(&["b"], Term::var("y", &[])),
            ),
        ),
        axiom(
            ForkCommute,
            &[("x", 2), ("y", 0), ("z", 0)],
            &[],
            Term::fork(
                "a",
                Term::fork("b", Term::var("x", &[&["a"], &["b"]]), Term::var("y", &[])),
                Term::var("z", &[]),
            ),
            Term::fork(
                "b",
                Term::fork("a", Term::var("x", &[&["a"], &["b"]]), Term::var("z", &[])),
                Term::var("y", &[]),
            ),
        ),
        axiom(
            ForkAssoc,
            &[("x", 1), ("y", 1), ("z", 0)],
            &[],
            Term::fork(
                "a",
                Term::var("x", &[&["a"]]),
                Term::fork("b", Term::var("y", &[&["b"]]), Term::var("z", &[])),
            ),
            Term::fork(
                "b",
                Term::fork("a", Term::var("x", &[&["a"]]), Term::var("y", &[&["b"]])),
                Term::var("z", &[]),
            ),
        ),
        axiom(
            ForkUnitLeft,
            &[("x", 0)],
            &[],
            Term::fork("a", Term::wait(&["a"], Term::Stop), x0()),
            x0(),
        ),
        axiom(
            ForkUnitRight,
            &[("x", 1)],
            &["b"],
            Term::fork(
                "a",
                Term::var("x", &[&["a"]]),
                Term::wait(&["b"], Term::Stop),
            ),
            Term::var("x", &[&["b"]]),
        ),
    ]
}

/// Re-interpret `gamma | delta |- term` at an ambient extension of `n`
/// parameters: the new parameters are prepended to `delta` and passed as the
/// first `n` arguments of every computation variable.
pub fn extend_ambient(
    term: &Term,
    gamma: &CompContext,
    delta: &ParamContext,
    n: usize,
) -> (Term, CompContext, ParamContext) {
    let mut avoid = term.all_params();
    avoid.extend(delta.names().iter().cloned());
    let mut extra = Vec::new();
    for i in 1..=n {
        let name = fresh_name(&format!("amb{i}"), &avoid);
        avoid.insert(name.clone());
        extra.push(name);
    }
    let new_delta = ParamContext::new(extra.iter().cloned().chain(delta.names().iter().cloned()))
        .expect("fresh names are distinct");
    let new_gamma = CompContext::new(gamma.entries().iter().map(|(x, m)| (x.clone(), m + n)))
        .expect("same variable names");
    (prefix_args(term, &extra), new_gamma, new_delta)
}

fn prefix_args(term: &Term, extra: &[String]) -> Term {
    match term {
        Term::Var { name, args } => Term::Var {
            name: name.clone(),
            args: extra
                .iter()
                .map(|e| BTreeSet::from([e.clone()]))
                .chain(args.iter().cloned())
                .collect(),
        },
        Term::Fork {
            binder,
            parent,
            child,
        } => Term::Fork {
            binder: binder.clone(),
            parent: Box::new(prefix_args(parent, extra)),
            child: Box::new(prefix_args(child, extra)),
        },
        Term::Wait { guard, cont } => Term::Wait {
            guard: guard.clone(),
            cont: Box::new(prefix_args(cont, extra)),
        },
        Term::Stop | Term::Act(_) => term.clone(),
    }
}

fn fmt_set(set: &ParamSet, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if set.is_empty() {
        return f.write_str("0");
    }
    for (i, n) in set.iter().enumerate() {
        if i > 0 {
            f.write_str(" + ")?;
        }
        f.write_str(n)?;
    }
    Ok(())
}

/// Display adapter for a parameter set in term syntax.
pub struct ShowSet<'a>(pub &'a ParamSet);

impl fmt::Display for ShowSet<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_set(self.0, f)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var { name, args } => {
                f.write_str(name)?;
                if !args.is_empty() {
                    f.write_str("(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(", ")?;
                        }
                        fmt_set(a, f)?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
            Term::Fork {
                binder,
                parent,
                child,
            } => write!(f, "fork({binder}. {parent}, {child})"),
            Term::Wait { guard, cont } => {
                f.write_str("wait(")?;
                fmt_set(guard, f)?;
                write!(f, ", {cont})")
            }
            Term::Stop => f.write_str("stop"),
            Term::Act(l) => write!(f, "act[{l}]"),
        }
    }
}

impl fmt::Display for CompContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, m)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}:{m}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gamma(entries: &[(&str, usize)]) -> CompContext {
        CompContext::new(entries.iter().copied()).unwrap()
    }

    fn delta(names: &[&str]) -> ParamContext {
        ParamContext::new(names.iter().copied()).unwrap()
    }

    #[test]
    fn scope_check_examples() {
        let t1 = Term::fork("a", Term::wait(&["a"], Term::act("s2")), Term::act("s1"));
        assert_eq!(scope_check(&t1, &gamma(&[]), &delta(&[])), Ok(()));

        let bad = Term::var("x", &[&["b"]]);
        assert_eq!(
            scope_check(&bad, &gamma(&[("x", 1)]), &delta(&["a"])),
            Err(ScopeError::UnboundParameter("b".into()))
        );

        let arity = Term::var("x", &[&["a"], &["a"]]);
        assert!(matches!(
            scope_check(&arity, &gamma(&[("x", 1)]), &delta(&["a"])),
            Err(ScopeError::ArityMismatch {
                expected: 1,
                found: 2,
                ..
            })
        ));

        let unbound = Term::var("y", &[]);
        assert_eq!(
            scope_check(&unbound, &gamma(&[("x", 0)]), &delta(&[])),
            Err(ScopeError::UnboundVariable("y".into()))
        );

        let shadow = Term::fork("a", Term::Stop, Term::Stop);
        assert_eq!(
            scope_check(&shadow, &gamma(&[]), &delta(&["a"])),
            Err(ScopeError::ShadowedBinder("a".into()))
        );
    }

    #[test]
    fn binder_does_not_scope_over_child() {
        let t = Term::fork("a", Term::Stop, Term::wait(&["a"], Term::Stop));
        assert_eq!(
            scope_check(&t, &gamma(&[]), &delta(&[])),
            Err(ScopeError::UnboundParameter("a".into()))
        );
    }

    #[test]
    fn subst_param_examples() {
        // node[s](a3, b1. node[t](a1, b2. x(b2, b1))) with a3 := a1 + a2
        let t = derived_node(
            "s",
            params(["a3"]),
            "b1",
            derived_node(
                "t",
                params(["a1"]),
                "b2",
                Term::var("x", &[&["b2"], &["b1"]]),
            ),
        );
        let expected = derived_node(
            "s",
            params(["a1", "a2"]),
            "b1",
            derived_node(
                "t",
                params(["a1"]),
                "b2",
                Term::var("x", &[&["b2"], &["b1"]]),
            ),
        );
        assert_eq!(subst_param(&t, &params(["a1", "a2"]), "a3"), expected);

        assert_eq!(subst_param(&t, &params(["a3"]), "a3"), t);

        let w = Term::wait(&["a"], Term::Stop);
        assert_eq!(
            subst_param(&w, &params([]), "a"),
            Term::wait(&[], Term::Stop)
        );
    }

    #[test]
    fn subst_param_avoids_capture() {
        // fork(b. wait(a + b, stop), stop)[b / a] must not capture
        let t = Term::fork("b", Term::wait(&["a", "b"], Term::Stop), Term::Stop);
        let out = subst_param(&t, &params(["b"]), "a");
        match &out {
            Term::Fork { binder, parent, .. } => {
                assert_ne!(binder, "b");
                let expect = Term::wait_set(params(["b", binder.as_str()]), Term::Stop);
                assert_eq!(**parent, expect);
            }
            _ => panic!("shape changed"),
        }
        assert_eq!(out.free_params(), params(["b"]));
    }

    #[test]
    fn subst_comp_examples() {
        // the computation-variable substitution of the node example
        let t = derived_node(
            "s",
            params(["a1", "a2"]),
            "c1",
            derived_node(
                "t",
                params(["a1"]),
                "c2",
                Term::var("x", &[&["c2"], &["c1"]]),
            ),
        );
        let out = subst_comp(
            &t,
            &["b1".into(), "b2".into()],
            &Term::var("y", &[&["b1", "b2"]]),
            "x",
        )
        .unwrap();
        let expected = derived_node(
            "s",
            params(["a1", "a2"]),
            "c1",
            derived_node("t", params(["a1"]), "c2", Term::var("y", &[&["c1", "c2"]])),
        );
        assert_eq!(out, expected);

        let r = subst_comp(
            &Term::var("x", &[&["a"]]),
            &["b".into()],
            &Term::var("x'", &[&["b"]]),
            "x",
        )
        .unwrap();
        assert_eq!(r, Term::var("x'", &[&["a"]]));

        let t = Term::fork("c", Term::var("x", &[&["c"]]), Term::Stop);
        let r = subst_comp(&t, &["b".into()], &Term::wait(&["b"], Term::Stop), "x").unwrap();
        assert_eq!(
            r,
            Term::fork("c", Term::wait(&["c"], Term::Stop), Term::Stop)
        );

        let err = subst_comp(&t, &[], &Term::Stop, "x");
        assert!(matches!(err, Err(ScopeError::ArityMismatch { .. })));
    }

    #[test]
    fn subst_comp_avoids_capture_of_body_params() {
        // body mentions free `a`; the binder `a` inside t must be renamed
        let t = Term::fork("a", Term::var("x", &[]), Term::Stop);
        let body = Term::wait(&["a"], Term::Stop);
        let out = subst_comp(&t, &[], &body, "x").unwrap();
        assert_eq!(out.free_params(), params(["a"]));
    }

    #[test]
    fn alpha_equivalence() {
        let a = Term::fork("a", Term::wait(&["a"], Term::act("s")), Term::Stop);
        let b = Term::fork("zz", Term::wait(&["zz"], Term::act("s")), Term::Stop);
        assert!(alpha_eq(&a, &b));
        let c = Term::fork("zz", Term::wait(&[], Term::act("s")), Term::Stop);
        assert!(!alpha_eq(&a, &c));
    }

    #[test]
    fn rename_apart_removes_shadowing() {
        let t = Term::fork(
            "a",
            Term::fork("a", Term::wait(&["a"], Term::Stop), Term::Stop),
            Term::Stop,
        );
        let r = rename_apart(&t, &delta(&["a"]));
        assert_eq!(scope_check(&r, &gamma(&[]), &delta(&["a"])), Ok(()));
        assert!(alpha_eq(&r, &t));
    }

    #[test]
    fn axioms_are_scope_correct() {
        let axioms = axiom_schemas();
        assert_eq!(axioms.len(), 8);
        for ax in &axioms {
            assert_eq!(
                scope_check(&ax.lhs, &ax.gamma, &ax.delta),
                Ok(()),
                "{}",
                ax.name
            );
            assert_eq!(
                scope_check(&ax.rhs, &ax.gamma, &ax.delta),
                Ok(()),
                "{}",
                ax.name
            );
        }
        let unit = &axioms[0];
        assert_eq!(unit.lhs.to_string(), "wait(0, x)");
        let assoc = axioms
            .iter()
            .find(|a| a.name == AxiomName::ForkAssoc)
            .unwrap();
        assert_eq!(assoc.lhs.to_string(), "fork(a. x(a), fork(b. y(b), z))");
        assert_eq!(assoc.rhs.to_string(), "fork(b. fork(a. x(a), y(b)), z)");
        let unit_r = axioms
            .iter()
            .find(|a| a.name == AxiomName::ForkUnitRight)
            .unwrap();
        assert_eq!(unit_r.lhs.to_string(), "fork(a. x(a), wait(b, stop))");
        assert_eq!(unit_r.gamma.to_string(), "x:1");
    }

    #[test]
    fn derived_node_expansion() {
        let n = derived_node("s", params(["a"]), "b", Term::var("x", &[&["b"]]));
        assert_eq!(n.to_string(), "fork(b. x(b), wait(a, act[s]))");
        let n0 = derived_node("s", params([]), "b", Term::Stop);
        assert_eq!(n0.to_string(), "fork(b. stop, wait(0, act[s]))");
    }

    #[test]
    fn ambient_extension_prefixes_arguments() {
        let ax = &axiom_schemas()[2];
        let (t, g, d) = extend_ambient(&ax.lhs, &ax.gamma, &ax.delta, 2);
        assert_eq!(g.arity("x"), Some(3));
        assert_eq!(d.len(), 4);
        assert_eq!(scope_check(&t, &g, &d), Ok(()));
    }
}
