use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use thiserror::Error;

use super::{RunError, State, StepLabel};
use crate::lang::{Comp, RuntimeTid};
use crate::poset::{isomorphic, Poset};
use crate::term::Label;

pub type Event = (RuntimeTid, Label);

/// The reachable state graph from `⟨t⟩`, deduplicated by exact equality.
#[derive(Debug)]
pub struct Exploration {
    pub states: Vec<State>,
    pub edges: Vec<Vec<(StepLabel, usize)>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfluenceViolation {
    #[error("thread {tid} has two different steps from state {state}")]
    NotLocallyDeterministic { state: usize, tid: RuntimeTid },
    #[error("steps of {a} and {b} from state {state} do not commute")]
    NoDiamond {
        state: usize,
        a: RuntimeTid,
        b: RuntimeTid,
    },
    #[error("step of {a} from state {state} adds {c} ≺ {b} without justification")]
    UnjustifiedPrec {
        state: usize,
        a: RuntimeTid,
        b: RuntimeTid,
        c: RuntimeTid,
    },
}

/// Depth-first exploration of every schedule, visiting at most `max_states`.
pub fn explore(t: &Comp, max_states: usize) -> Result<Exploration, RunError> {
    let mut index: HashMap<State, usize> = HashMap::new();
    let mut states = vec![State::initial(t.clone())];
    let mut edges: Vec<Vec<(StepLabel, usize)>> = vec![Vec::new()];
    index.insert(states[0].clone(), 0);
    let mut stack = vec![0];
    while let Some(i) = stack.pop() {
        let succ = states[i].successors()?;
        if succ.is_empty() && !states[i].config.is_terminal() {
            return Err(RunError::Deadlock(states[i].config.unfinished()));
        }
        for (label, next) in succ {
            let j = match index.get(&next) {
                Some(&j) => j,
                None => {
                    if states.len() >= max_states {
                        return Err(RunError::FuelExhausted(max_states));
                    }
                    let j = states.len();
                    index.insert(next.clone(), j);
                    states.push(next);
                    edges.push(Vec::new());
                    stack.push(j);
                    j
                }
            };
            edges[i].push((label, j));
        }
    }
    Ok(Exploration { states, edges })
}

impl Exploration {
    pub fn terminals(&self) -> impl Iterator<Item = &State> {
        self.states.iter().filter(|s| s.config.is_terminal())
    }

    /// One observation per distinct terminal state.
    pub fn observations(&self) -> Vec<Poset> {
        self.terminals().map(State::observation).collect()
    }

    /// Whether every schedule observes the same labelled poset up to
    /// isomorphism and allocates the same thread IDs.
    pub fn is_determinate(&self) -> bool {
        let obs = self.observations();
        let worlds: BTreeSet<_> = self.terminals().map(|s| s.config.world()).collect();
        worlds.len() <= 1 && obs.windows(2).all(|w| isomorphic(&w[0], &w[1]))
    }

    /// The distinct sequences of labelled events over all maximal schedules.
    pub fn traces(&self) -> BTreeSet<Vec<Event>> {
        let mut memo: Vec<Option<Rc<BTreeSet<Vec<Event>>>>> = vec![None; self.states.len()];
        let out = self.traces_from(0, &mut memo);
        Rc::try_unwrap(out).unwrap_or_else(|rc| (*rc).clone())
    }

    fn traces_from(
        &self,
        i: usize,
        memo: &mut Vec<Option<Rc<BTreeSet<Vec<Event>>>>>,
    ) -> Rc<BTreeSet<Vec<Event>>> {
        if let Some(done) = &memo[i] {
            return done.clone();
        }
        let mut out = BTreeSet::new();
        if self.edges[i].is_empty() {
            out.insert(Vec::new());
        }
        for (label, j) in &self.edges[i] {
            let rest = self.traces_from(*j, memo);
            match &label.action {
                None => out.extend(rest.iter().cloned()),
                Some(l) => {
                    for tail in rest.iter() {
                        let mut tr = vec![(label.tid.clone(), l.clone())];
                        tr.extend(tail.iter().cloned());
                        out.insert(tr);
                    }
                }
            }
        }
        let out = Rc::new(out);
        memo[i] = Some(out.clone());
        out
    }

    /// Local determinacy, the diamond property, and the strengthened
    /// waiting lemma, on every explored state.
    pub fn check_confluence(&self) -> Result<(), ConfluenceViolation> {
        for (i, out) in self.edges.iter().enumerate() {
            let by_tid = |tid: &RuntimeTid, edges: &[(StepLabel, usize)]| {
                edges
                    .iter()
                    .filter(|(l, _)| &l.tid == tid)
                    .map(|(l, j)| (l.clone(), *j))
                    .collect::<Vec<_>>()
            };
            for (la, _) in out {
                if by_tid(&la.tid, out).len() != 1 {
                    return Err(ConfluenceViolation::NotLocallyDeterministic {
                        state: i,
                        tid: la.tid.clone(),
                    });
                }
            }
            for (la, ja) in out {
                self.check_prec_lemma(i, &la.tid, *ja)?;
                for (lb, jb) in out {
                    if la.tid >= lb.tid {
                        continue;
                    }
                    let after_a = by_tid(&lb.tid, &self.edges[*ja]);
                    let after_b = by_tid(&la.tid, &self.edges[*jb]);
                    let closes = match (after_a.as_slice(), after_b.as_slice()) {
                        ([(lb2, k1)], [(la2, k2)]) => k1 == k2 && lb2 == lb && la2 == la,
                        _ => false,
                    };
                    if !closes {
                        return Err(ConfluenceViolation::NoDiamond {
                            state: i,
                            a: la.tid.clone(),
                            b: lb.tid.clone(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    fn check_prec_lemma(
        &self,
        i: usize,
        a: &RuntimeTid,
        j: usize,
    ) -> Result<(), ConfluenceViolation> {
        let before = &self.states[i].config;
        let after = &self.states[j].config;
        let world = before.world();
        for (c, b) in &after.prec {
            if !world.contains(b) {
                continue;
            }
            let ok = before.prec.contains(&(c.clone(), b.clone()))
                || a == b
                || before.prec.contains(&(a.clone(), b.clone()));
            if !ok {
                return Err(ConfluenceViolation::UnjustifiedPrec {
                    state: i,
                    a: a.clone(),
                    b: b.clone(),
                    c: c.clone(),
                });
            }
        }
        Ok(())
    }
}

/// Explore and check confluence in one go.
pub fn check_confluence(
    t: &Comp,
    max_states: usize,
) -> Result<Result<(), ConfluenceViolation>, RunError> {
    Ok(explore(t, max_states)?.check_confluence())
}
