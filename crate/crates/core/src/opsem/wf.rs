use std::collections::BTreeSet;

use thiserror::Error;

use super::{explore, Config, RunError, Thread};
use crate::lang::{typecheck_comp, Comp, Env, RuntimeTid, Type, TypeError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WfViolation {
    #[error("the order does not list exactly the threads of the configuration")]
    BadOrder,
    #[error("waiting relation not transitive at {0} ≺ {1} ≺ {2}")]
    NotTransitive(RuntimeTid, RuntimeTid, RuntimeTid),
    #[error("{waiter} waits on {target}, which is neither in the pool nor external")]
    UnknownTarget {
        waiter: RuntimeTid,
        target: RuntimeTid,
    },
    #[error("{waiter} waits on {target}, which was created later")]
    WaitsOnLater {
        waiter: RuntimeTid,
        target: RuntimeTid,
    },
    #[error("thread {tid} is ill typed: {error}")]
    IllTyped { tid: RuntimeTid, error: TypeError },
    #[error("no creation order extends the previous one after step {from} -> {to}: {last}")]
    NoExtension {
        from: usize,
        to: usize,
        last: Box<WfViolation>,
    },
}

/// Well-formedness of `c` for `(ty, order, external)`. `order` lists the
/// pool from first created to last.
pub fn check_config_well_formed(
    c: &Config,
    ty: &Type,
    order: &[RuntimeTid],
    external: &BTreeSet<RuntimeTid>,
) -> Result<(), WfViolation> {
    let world = c.world();
    if order.len() != world.len() || order.iter().collect::<BTreeSet<_>>() != world.iter().collect()
    {
        return Err(WfViolation::BadOrder);
    }
    let pos = |a: &RuntimeTid| order.iter().position(|x| x == a);
    for (a, b) in &c.prec {
        for (b2, d) in &c.prec {
            if b2 == b && !c.prec.contains(&(a.clone(), d.clone())) {
                return Err(WfViolation::NotTransitive(a.clone(), b.clone(), d.clone()));
            }
        }
        if !world.contains(a) && !external.contains(a) {
            return Err(WfViolation::UnknownTarget {
                waiter: b.clone(),
                target: a.clone(),
            });
        }
        if let (Some(i), Some(j)) = (pos(a), pos(b)) {
            if i >= j {
                return Err(WfViolation::WaitsOnLater {
                    waiter: b.clone(),
                    target: a.clone(),
                });
            }
        }
    }
    for (i, a) in order.iter().enumerate() {
        if let Some(Thread::Running(t)) = c.threads.get(a) {
            let mut visible: BTreeSet<RuntimeTid> = order[..i].iter().cloned().collect();
            visible.extend(external.iter().cloned());
            typecheck_comp(&Env::new(), &visible, t, Some(ty)).map_err(|error| {
                WfViolation::IllTyped {
                    tid: a.clone(),
                    error,
                }
            })?;
        }
    }
    Ok(())
}

/// Extend `order` to the pool of `next`: new threads go just below their
/// parent first, and every other placement is tried if that fails.
fn extend_order(
    order: &[RuntimeTid],
    next: &Config,
    ty: &Type,
) -> Result<Vec<RuntimeTid>, WfViolation> {
    let mut out = order.to_vec();
    let fresh: Vec<RuntimeTid> = next
        .threads
        .keys()
        .filter(|a| !order.contains(a))
        .cloned()
        .collect();
    let none = BTreeSet::new();
    for b in &fresh {
        let below_parent = b
            .parent()
            .and_then(|p| out.iter().position(|x| *x == p))
            .unwrap_or(out.len());
        out.insert(below_parent, b.clone());
    }
    let first = match check_config_well_formed(next, ty, &out, &none) {
        Ok(()) => return Ok(out),
        Err(e) => e,
    };
    // a single new thread per step: try every slot
    if let [b] = fresh.as_slice() {
        for slot in 0..=order.len() {
            let mut cand = order.to_vec();
            cand.insert(slot, b.clone());
            if check_config_well_formed(next, ty, &cand, &none).is_ok() {
                return Ok(cand);
            }
        }
    }
    Err(first)
}

/// Check well-formedness along every transition reachable from `⟨t⟩`,
/// extending the creation order at each step. Returns the number of
/// transitions checked.
pub fn check_preservation(
    t: &Comp,
    ty: &Type,
    max_states: usize,
) -> Result<Result<usize, WfViolation>, RunError> {
    let ex = explore(t, max_states)?;
    let mut orders: Vec<Option<Vec<RuntimeTid>>> = vec![None; ex.states.len()];
    let initial = vec![RuntimeTid::root()];
    if let Err(e) = check_config_well_formed(&ex.states[0].config, ty, &initial, &BTreeSet::new()) {
        return Ok(Err(e));
    }
    orders[0] = Some(initial);
    let mut checked = 0;
    // states are discovered before their successors are pushed, so a
    // worklist in discovery order always has the source order available
    let mut work = vec![0];
    let mut seen = vec![false; ex.states.len()];
    seen[0] = true;
    while let Some(i) = work.pop() {
        let order = orders[i].clone().expect("visited states have an order");
        for (_, j) in &ex.edges[i] {
            match extend_order(&order, &ex.states[*j].config, ty) {
                Ok(next) => {
                    checked += 1;
                    if !seen[*j] {
                        seen[*j] = true;
                        orders[*j] = Some(next);
                        work.push(*j);
                    }
                }
                Err(last) => {
                    return Ok(Err(WfViolation::NoExtension {
                        from: i,
                        to: *j,
                        last: Box::new(last),
                    }))
                }
            }
        }
    }
    Ok(Ok(checked))
}
