use std::collections::{BTreeMap, BTreeSet};

use super::{DenoteError, Result};
use crate::ids::ParamContext;
use crate::poset::decide_equal;
use crate::term::{fresh_name, subst_comp, CompContext, Term};

/// Actions introduced by gadgets and closing contexts start with this.
pub const RESERVED_PREFIX: &str = "$";

fn check_alphabet(t: &Term) -> Result<()> {
    match t
        .labels()
        .into_iter()
        .find(|l| l.starts_with(RESERVED_PREFIX))
    {
        Some(l) => Err(DenoteError::AlphabetCollision(l)),
        None => Ok(()),
    }
}

/// The gadget for `x:m`, over binders `b1 .. bm`. The main thread acts
/// `$x` in a child it then waits on; marker `i` waits on that child and on
/// `bi` and acts `$x.i`, so the predecessors of marker `i` record what the
/// hole's slot `i` sees.
fn gadget(x: &str, m: usize) -> (Vec<String>, Term) {
    let binders: Vec<String> = (1..=m).map(|i| format!("b{i}")).collect();
    if m == 0 {
        return (binders, Term::Act(format!("{RESERVED_PREFIX}{x}")));
    }
    let mut inner = Term::wait(&["c"], Term::Stop);
    for (i, b) in binders.iter().enumerate().rev() {
        let marker = Term::wait(
            &["c", b],
            Term::Act(format!("{RESERVED_PREFIX}{x}.{}", i + 1)),
        );
        inner = Term::fork(&format!("d{}", i + 1), inner, marker);
    }
    let body = Term::fork("c", inner, Term::Act(format!("{RESERVED_PREFIX}{x}")));
    (binders, body)
}

/// One gadget per variable of `gamma`, as binders and a body.
pub fn gadget_subst(gamma: &CompContext) -> BTreeMap<String, (Vec<String>, Term)> {
    gamma
        .entries()
        .iter()
        .map(|(x, m)| (x.clone(), gadget(x, *m)))
        .collect()
}

/// `t[γ]` for the gadget substitution of `gamma`.
pub fn apply_gadgets(t: &Term, gamma: &CompContext) -> Result<Term> {
    check_alphabet(t)?;
    let mut out = t.clone();
    for (x, (binders, body)) in gadget_subst(gamma) {
        out = subst_comp(&out, &binders, &body, &x)?;
    }
    Ok(out)
}

/// Bind every parameter of `delta` to a child acting `$i`, and run `t` in
/// a last child that the main thread waits on before acting `$n+1`.
pub fn closing_context(t: &Term, delta: &ParamContext) -> Result<Term> {
    check_alphabet(t)?;
    Ok(close(t, delta))
}

fn close(t: &Term, delta: &ParamContext) -> Term {
    let n = delta.len();
    let mut avoid: BTreeSet<String> = t.all_params();
    avoid.extend(delta.names().iter().cloned());
    let last = fresh_name("a", &avoid);
    let mut out = Term::fork(
        &last,
        Term::wait(&[&last], Term::Act(format!("{RESERVED_PREFIX}{}", n + 1))),
        t.clone(),
    );
    for (i, a) in delta.names().iter().enumerate().rev() {
        out = Term::fork(a, out, Term::Act(format!("{RESERVED_PREFIX}{}", i + 1)));
    }
    out
}

/// Equality of two open terms against equality of their gadget-closed
/// instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProbeOutcome {
    pub open_equal: bool,
    pub closed_equal: bool,
}

impl ProbeOutcome {
    pub fn consistent(&self) -> bool {
        self.open_equal == self.closed_equal
    }
}

pub fn completeness_probe(
    t1: &Term,
    t2: &Term,
    gamma: &CompContext,
    delta: &ParamContext,
) -> Result<ProbeOutcome> {
    let open_equal = decide_equal(t1, t2, gamma, delta)?.is_equal();
    let (c1, c2) = (
        close(&apply_gadgets(t1, gamma)?, delta),
        close(&apply_gadgets(t2, gamma)?, delta),
    );
    let none = (CompContext::default(), ParamContext::default());
    let closed_equal = decide_equal(&c1, &c2, &none.0, &none.1)?.is_equal();
    Ok(ProbeOutcome {
        open_equal,
        closed_equal,
    })
}
