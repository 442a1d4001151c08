//! Small-step semantics over thread pools with a waiting relation.
//!
//! A configuration maps thread IDs to running computations or `Finished`,
//! and records `b ≺ a` (a waits on b) as pairs `(b, a)`. A thread steps when
//! everything it waits on has finished; the step itself is computed on the
//! thread alone and then merged back into the pool.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::lang::{Comp, Const, RuntimeTid, Type, Value};
use crate::poset::{ElemRef, Poset, Vertex};
use crate::term::Label;

mod explore;
mod wf;

pub use explore::{check_confluence, explore, ConfluenceViolation, Exploration};
pub use wf::{check_config_well_formed, check_preservation, WfViolation};

pub const DEFAULT_FUEL: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Thread {
    Running(Comp),
    Finished,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Config {
    pub prec: BTreeSet<(RuntimeTid, RuntimeTid)>,
    pub threads: BTreeMap<RuntimeTid, Thread>,
    /// Children spawned so far, per thread; absent means none.
    pub spawned: BTreeMap<RuntimeTid, usize>,
}

/// A configuration plus the actions performed so far, by acting thread.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct State {
    pub config: Config,
    pub events: BTreeMap<RuntimeTid, Label>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StepLabel {
    pub tid: RuntimeTid,
    pub action: Option<Label>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error("fuel exhausted after {0} steps")]
    FuelExhausted(usize),
    #[error("deadlock: no thread can step, unfinished: {0}")]
    Deadlock(String),
    #[error("thread {tid} is stuck at `{term}`")]
    Stuck { tid: RuntimeTid, term: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    LowestTid,
    Random(u64),
}

/// The outcome of stepping one thread in isolation.
struct Local {
    action: Option<Label>,
    threads: Vec<(RuntimeTid, Thread)>,
    waits: Vec<(RuntimeTid, RuntimeTid)>,
    spawned: usize,
}

fn stuck(tid: &RuntimeTid, t: &Comp) -> RunError {
    RunError::Stuck {
        tid: tid.clone(),
        term: t.to_string(),
    }
}

fn single(a: &RuntimeTid, t: Thread, spawned: usize) -> Local {
    Local {
        action: None,
        threads: vec![(a.clone(), t)],
        waits: Vec::new(),
        spawned,
    }
}

fn fork_result(i: usize, v: Value) -> Comp {
    let ty = Type::Sum(vec![Type::Tid, Type::unit()]);
    Comp::Ret(Value::Ascribe(Box::new(Value::Inj(i, Box::new(v))), ty))
}

/// One step of thread `a` running `t` alone. `None` when `t` is a returned
/// value.
fn local_step(a: &RuntimeTid, t: &Comp, spawned: usize) -> Result<Option<Local>, RunError> {
    let run = |c: Comp| Ok(Some(single(a, Thread::Running(c), spawned)));
    match t {
        Comp::Ret(_) => Ok(None),
        Comp::App(f, v) => match f.bare() {
            Value::Const(Const::Fork) => {
                let b = a.child(spawned);
                Ok(Some(Local {
                    action: None,
                    threads: vec![
                        (
                            a.clone(),
                            Thread::Running(fork_result(0, Value::Tid(b.clone()))),
                        ),
                        (b, Thread::Running(fork_result(1, Value::unit()))),
                    ],
                    waits: Vec::new(),
                    spawned: spawned + 1,
                }))
            }
            Value::Const(Const::Wait) => {
                let tids = v.tids().ok_or_else(|| stuck(a, t))?;
                let mut l = single(a, Thread::Running(Comp::Ret(Value::unit())), spawned);
                l.waits = tids.into_iter().map(|b| (b, a.clone())).collect();
                Ok(Some(l))
            }
            Value::Const(Const::Stop) => Ok(Some(single(a, Thread::Finished, spawned))),
            Value::Const(Const::PrintStop(l)) => {
                let mut out = single(a, Thread::Finished, spawned);
                out.action = Some(l.clone());
                Ok(Some(out))
            }
            Value::Lam(x, _, body) => run(body.subst(x, v)),
            _ => Err(stuck(a, t)),
        },
        Comp::Proj(i, v) => match v.bare() {
            Value::Tuple(vs) if *i < vs.len() => run(Comp::Ret(vs[*i].clone())),
            _ => Err(stuck(a, t)),
        },
        Comp::Case(v, bs, _) => match v.bare() {
            Value::Inj(i, w) if *i < bs.len() => {
                let (x, body) = &bs[*i];
                run(body.subst(x, w))
            }
            _ => Err(stuck(a, t)),
        },
        Comp::Let(x, t1, s) => {
            if let Comp::Ret(v) = &**t1 {
                return run(s.subst(x, v));
            }
            let Some(mut inner) = local_step(a, t1, spawned)? else {
                return Err(stuck(a, t));
            };
            // every thread the bound computation became continues with `s`
            for (_, th) in inner.threads.iter_mut() {
                if let Thread::Running(t2) = th {
                    *th = Thread::Running(Comp::Let(x.clone(), Box::new(t2.clone()), s.clone()));
                }
            }
            Ok(Some(inner))
        }
        _ => Err(stuck(a, t)),
    }
}

fn close(prec: &mut BTreeSet<(RuntimeTid, RuntimeTid)>) {
    loop {
        let mut added = Vec::new();
        for (a, b) in prec.iter() {
            for (_, c) in prec
                .range((b.clone(), RuntimeTid(vec![]))..)
                .take_while(|(x, _)| x == b)
            {
                if !prec.contains(&(a.clone(), c.clone())) {
                    added.push((a.clone(), c.clone()));
                }
            }
        }
        if added.is_empty() {
            return;
        }
        prec.extend(added);
    }
}

impl Config {
    /// `⟨t⟩` at the root thread.
    pub fn initial(t: Comp) -> Config {
        Config {
            prec: BTreeSet::new(),
            threads: BTreeMap::from([(RuntimeTid::root(), Thread::Running(t))]),
            spawned: BTreeMap::new(),
        }
    }

    pub fn world(&self) -> BTreeSet<RuntimeTid> {
        self.threads.keys().cloned().collect()
    }

    pub fn is_terminal(&self) -> bool {
        self.threads.values().all(|t| *t == Thread::Finished)
    }

    pub fn waits_on(&self, a: &RuntimeTid) -> impl Iterator<Item = &RuntimeTid> + '_ {
        let a = a.clone();
        self.prec
            .iter()
            .filter(move |(_, x)| *x == a)
            .map(|(b, _)| b)
    }

    /// A thread may step when everything it waits on has finished.
    pub fn is_enabled(&self, a: &RuntimeTid) -> bool {
        matches!(self.threads.get(a), Some(Thread::Running(_)))
            && self
                .waits_on(a)
                .all(|b| self.threads.get(b) == Some(&Thread::Finished))
    }

    /// The global step of thread `a`, if it is enabled and can move.
    pub fn step_thread(&self, a: &RuntimeTid) -> Result<Option<(StepLabel, Config)>, RunError> {
        if !self.is_enabled(a) {
            return Ok(None);
        }
        let Some(Thread::Running(t)) = self.threads.get(a) else {
            return Ok(None);
        };
        let spawned = self.spawned.get(a).copied().unwrap_or(0);
        let Some(local) = local_step(a, t, spawned)? else {
            return Ok(None);
        };
        let mut next = self.clone();
        let inherited: Vec<RuntimeTid> = self.waits_on(a).cloned().collect();
        next.prec.extend(local.waits);
        for (c, th) in local.threads {
            for b in &inherited {
                next.prec.insert((b.clone(), c.clone()));
            }
            next.threads.insert(c, th);
        }
        close(&mut next.prec);
        if local.spawned > 0 {
            next.spawned.insert(a.clone(), local.spawned);
        }
        Ok(Some((
            StepLabel {
                tid: a.clone(),
                action: local.action,
            },
            next,
        )))
    }

    /// Every enabled global step, in thread order.
    pub fn enabled_steps(&self) -> Result<Vec<(StepLabel, Config)>, RunError> {
        let mut out = Vec::new();
        for a in self.threads.keys() {
            if let Some(s) = self.step_thread(a)? {
                out.push(s);
            }
        }
        Ok(out)
    }

    fn unfinished(&self) -> String {
        let names: Vec<String> = self
            .threads
            .iter()
            .filter(|(_, t)| **t != Thread::Finished)
            .map(|(a, _)| a.to_string())
            .collect();
        names.join(", ")
    }
}

impl State {
    pub fn initial(t: Comp) -> State {
        State {
            config: Config::initial(t),
            events: BTreeMap::new(),
        }
    }

    pub fn successors(&self) -> Result<Vec<(StepLabel, State)>, RunError> {
        Ok(self
            .config
            .enabled_steps()?
            .into_iter()
            .map(|(label, config)| {
                let mut events = self.events.clone();
                if let Some(l) = &label.action {
                    events.insert(label.tid.clone(), l.clone());
                }
                (label, State { config, events })
            })
            .collect())
    }

    /// The labelled poset of actions, ordered by the waiting relation.
    /// Vertices follow thread order, so equal states give equal posets.
    pub fn observation(&self) -> Poset {
        let ids: BTreeMap<&RuntimeTid, usize> = self
            .events
            .keys()
            .enumerate()
            .map(|(i, a)| (a, i))
            .collect();
        let vertices = self
            .events
            .values()
            .map(|l| Vertex::Action(l.clone()))
            .collect();
        let order = self
            .config
            .prec
            .iter()
            .filter_map(|(b, a)| Some((ElemRef::V(*ids.get(b)?), ElemRef::V(*ids.get(a)?))));
        Poset::new(0, vertices, order)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub label: StepLabel,
    pub summary: String,
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.label.action {
            Some(l) => write!(f, "{} [{l}] -> {}", self.label.tid, self.summary),
            None => write!(f, "{} · -> {}", self.label.tid, self.summary),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub trace: Vec<TraceStep>,
    pub terminal: State,
    pub observation: Poset,
}

fn shorten(s: String, max: usize) -> String {
    if s.chars().count() <= max {
        s
    } else {
        let cut: String = s.chars().take(max).collect();
        format!("{cut}...")
    }
}

fn summarize(before: &Config, label: &StepLabel, after: &Config) -> String {
    let own = match after.threads.get(&label.tid) {
        Some(Thread::Running(t)) => shorten(t.to_string(), 60),
        _ => "finished".into(),
    };
    let born: Vec<String> = after
        .threads
        .keys()
        .filter(|c| !before.threads.contains_key(*c))
        .map(ToString::to_string)
        .collect();
    if born.is_empty() {
        own
    } else {
        format!("{own} (spawned {})", born.join(", "))
    }
}

/// Run one schedule to completion.
pub fn run(t: &Comp, policy: Policy, fuel: usize) -> Result<RunResult, RunError> {
    let mut rng = match policy {
        Policy::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        Policy::LowestTid => None,
    };
    let mut state = State::initial(t.clone());
    let mut trace = Vec::new();
    while !state.config.is_terminal() {
        if trace.len() >= fuel {
            return Err(RunError::FuelExhausted(fuel));
        }
        let mut succ = state.successors()?;
        if succ.is_empty() {
            return Err(RunError::Deadlock(state.config.unfinished()));
        }
        let pick = match rng.as_mut() {
            Some(r) => r.gen_range(0..succ.len()),
            None => 0,
        };
        let (label, next) = succ.swap_remove(pick);
        trace.push(TraceStep {
            summary: summarize(&state.config, &label, &next.config),
            label,
        });
        state = next;
    }
    let observation = state.observation();
    Ok(RunResult {
        trace,
        terminal: state,
        observation,
    })
}
