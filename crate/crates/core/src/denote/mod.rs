//! First-order denotations: programs elaborate, continuation-passing, into
//! terms of the thread theory.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::ids::{IdError, ParamContext};
use crate::lang::{Comp, Const, RuntimeTid, Type, Value};
use crate::opsem::{run, Policy, RunError};
use crate::poset::{decide_equal, interp, isomorphic, Equality, Poset, PosetError};
use crate::term::{fresh_name, subst_comp, CompContext, ParamSet, ScopeError, Term};

mod gadget;

pub use gadget::{
    apply_gadgets, closing_context, completeness_probe, gadget_subst, ProbeOutcome, RESERVED_PREFIX,
};

#[derive(Debug, Error)]
pub enum DenoteError {
    #[error("result type {0} is not first order")]
    NotFirstOrderResult(Type),
    #[error("thread ID {0} is not in the world")]
    UnboundTid(RuntimeTid),
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("not a core computation: {0}")]
    NotCore(String),
    #[error("elaboration got stuck at {0}")]
    Stuck(String),
    #[error("value does not match type {0}")]
    Shape(Type),
    #[error("reserved action label {0}")]
    AlphabetCollision(String),
    #[error(transparent)]
    Poset(#[from] PosetError),
    #[error(transparent)]
    Scope(#[from] ScopeError),
    #[error(transparent)]
    Id(#[from] IdError),
    #[error(transparent)]
    Run(#[from] RunError),
}

type Result<T> = std::result::Result<T, DenoteError>;

/// `Σ_i tid^{m_i}`, listed as the arities `m_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalFoType {
    pub summands: Vec<usize>,
}

impl CanonicalFoType {
    /// Products distribute over sums; the first component of a product is
    /// the most significant digit of the summand index.
    pub fn of(ty: &Type) -> Result<Self> {
        fn go(ty: &Type) -> Option<Vec<usize>> {
            match ty {
                Type::Tid => Some(vec![1]),
                Type::Prod(ts) => {
                    let mut acc = vec![0];
                    for t in ts {
                        let s = go(t)?;
                        acc = acc
                            .iter()
                            .flat_map(|a| s.iter().map(move |b| a + b))
                            .collect();
                    }
                    Some(acc)
                }
                Type::Sum(ts) => {
                    let mut acc = Vec::new();
                    for t in ts {
                        acc.extend(go(t)?);
                    }
                    Some(acc)
                }
                Type::Arrow(..) => None,
            }
        }
        go(ty)
            .map(|summands| CanonicalFoType { summands })
            .ok_or_else(|| DenoteError::NotFirstOrderResult(ty.clone()))
    }

    /// One variable per summand: `x` alone, otherwise `x1 .. xk`.
    pub fn var_names(&self, base: &str) -> Vec<String> {
        if self.summands.len() == 1 {
            vec![base.to_string()]
        } else {
            (1..=self.summands.len())
                .map(|i| format!("{base}{i}"))
                .collect()
        }
    }

    pub fn context(&self, base: &str) -> CompContext {
        CompContext::new(
            self.var_names(base)
                .into_iter()
                .zip(self.summands.iter().copied()),
        )
        .expect("generated names are distinct")
    }
}

/// Values met during elaboration. Thread IDs are sets of parameter names.
#[derive(Debug, Clone)]
pub enum SemVal {
    Tids(ParamSet),
    Tuple(Vec<SemVal>),
    Inj(usize, Box<SemVal>),
    Closure {
        param: String,
        body: Comp,
        env: SemEnv,
    },
    Const(Const),
}

impl SemVal {
    fn unit() -> SemVal {
        SemVal::Tuple(Vec::new())
    }
}

#[derive(Debug, Clone, Default)]
pub struct SemEnv(Vec<(String, SemVal)>);

impl SemEnv {
    pub fn with(&self, x: &str, v: SemVal) -> SemEnv {
        let mut out = self.clone();
        out.0.push((x.to_string(), v));
        out
    }

    fn get(&self, x: &str) -> Option<&SemVal> {
        self.0.iter().rev().find(|(y, _)| y == x).map(|(_, v)| v)
    }
}

/// Summand index and tid vector of a first-order value.
fn flatten(v: &SemVal, ty: &Type) -> Result<(usize, Vec<ParamSet>)> {
    let shape = || DenoteError::Shape(ty.clone());
    match (ty, v) {
        (Type::Tid, SemVal::Tids(s)) => Ok((0, vec![s.clone()])),
        (Type::Prod(ts), SemVal::Tuple(vs)) if ts.len() == vs.len() => {
            let mut index = 0;
            let mut tids = Vec::new();
            for (t, w) in ts.iter().zip(vs) {
                let (i, us) = flatten(w, t)?;
                index = index * CanonicalFoType::of(t)?.summands.len() + i;
                tids.extend(us);
            }
            Ok((index, tids))
        }
        (Type::Sum(ts), SemVal::Inj(j, w)) if *j < ts.len() => {
            let mut offset = 0;
            for t in &ts[..*j] {
                offset += CanonicalFoType::of(t)?.summands.len();
            }
            let (i, us) = flatten(w, &ts[*j])?;
            Ok((offset + i, us))
        }
        _ => Err(shape()),
    }
}

/// Inverse of `flatten`: the value of summand `index` whose tids are
/// singletons of `params`, consumed left to right.
pub fn decode(ty: &Type, index: usize, params: &[String]) -> Result<SemVal> {
    let mut rest = params;
    let v = decode_in(ty, index, &mut rest)?;
    if !rest.is_empty() {
        return Err(DenoteError::Shape(ty.clone()));
    }
    Ok(v)
}

fn decode_in(ty: &Type, index: usize, params: &mut &[String]) -> Result<SemVal> {
    let shape = || DenoteError::Shape(ty.clone());
    match ty {
        Type::Tid => {
            let (first, rest) = params.split_first().ok_or_else(shape)?;
            *params = rest;
            Ok(SemVal::Tids(BTreeSet::from([first.clone()])))
        }
        Type::Prod(ts) => {
            let mut digits = vec![0; ts.len()];
            let mut i = index;
            for (k, t) in ts.iter().enumerate().rev() {
                let c = CanonicalFoType::of(t)?.summands.len();
                if c == 0 {
                    return Err(shape());
                }
                digits[k] = i % c;
                i /= c;
            }
            if i != 0 {
                return Err(shape());
            }
            let vs = ts
                .iter()
                .zip(digits)
                .map(|(t, d)| decode_in(t, d, params))
                .collect::<Result<Vec<_>>>()?;
            Ok(SemVal::Tuple(vs))
        }
        Type::Sum(ts) => {
            let mut i = index;
            for (j, t) in ts.iter().enumerate() {
                let c = CanonicalFoType::of(t)?.summands.len();
                if i < c {
                    return Ok(SemVal::Inj(j, Box::new(decode_in(t, i, params)?)));
                }
                i -= c;
            }
            Err(shape())
        }
        Type::Arrow(..) => Err(DenoteError::NotFirstOrderResult(ty.clone())),
    }
}

struct Elab {
    used: BTreeSet<String>,
}

type Cont<'a> = &'a dyn Fn(SemVal, &mut Elab) -> Result<Term>;

impl Elab {
    fn fresh(&mut self, base: &str) -> String {
        let name = fresh_name(base, &self.used);
        self.used.insert(name.clone());
        name
    }

    fn value(
        &self,
        v: &Value,
        env: &SemEnv,
        world: &BTreeMap<RuntimeTid, String>,
    ) -> Result<SemVal> {
        Ok(match v {
            Value::Var(x) => env
                .get(x)
                .cloned()
                .ok_or_else(|| DenoteError::UnboundVariable(x.clone()))?,
            Value::Tuple(vs) => SemVal::Tuple(
                vs.iter()
                    .map(|w| self.value(w, env, world))
                    .collect::<Result<_>>()?,
            ),
            Value::Inj(i, w) => SemVal::Inj(*i, Box::new(self.value(w, env, world)?)),
            Value::Lam(x, _, body) => SemVal::Closure {
                param: x.clone(),
                body: (**body).clone(),
                env: env.clone(),
            },
            Value::Tid(a) => SemVal::Tids(BTreeSet::from([world
                .get(a)
                .cloned()
                .ok_or_else(|| DenoteError::UnboundTid(a.clone()))?])),
            Value::Nil => SemVal::Tids(ParamSet::new()),
            Value::Join(a, b) => match (self.value(a, env, world)?, self.value(b, env, world)?) {
                (SemVal::Tids(mut s), SemVal::Tids(t)) => {
                    s.extend(t);
                    SemVal::Tids(s)
                }
                _ => return Err(DenoteError::Stuck(v.to_string())),
            },
            Value::Const(c) => SemVal::Const(c.clone()),
            Value::Ascribe(w, _) => self.value(w, env, world)?,
        })
    }

    fn comp(
        &mut self,
        t: &Comp,
        env: &SemEnv,
        world: &BTreeMap<RuntimeTid, String>,
        k: Cont,
    ) -> Result<Term> {
        let stuck = || DenoteError::Stuck(t.to_string());
        match t {
            Comp::Ret(v) => {
                let v = self.value(v, env, world)?;
                k(v, self)
            }
            Comp::Proj(i, v) => match self.value(v, env, world)? {
                SemVal::Tuple(mut vs) if *i < vs.len() => k(vs.swap_remove(*i), self),
                _ => Err(stuck()),
            },
            Comp::Case(v, branches, _) => match self.value(v, env, world)? {
                SemVal::Inj(i, w) if i < branches.len() => {
                    let (x, body) = &branches[i];
                    self.comp(body, &env.with(x, *w), world, k)
                }
                _ => Err(stuck()),
            },
            Comp::Let(x, first, rest) => {
                let then = |v: SemVal, el: &mut Elab| el.comp(rest, &env.with(x, v), world, k);
                self.comp(first, env, world, &then)
            }
            Comp::App(f, a) => {
                let arg = self.value(a, env, world)?;
                match self.value(f, env, world)? {
                    SemVal::Closure {
                        param,
                        body,
                        env: captured,
                    } => self.comp(&body, &captured.with(&param, arg), world, k),
                    SemVal::Const(c) => self.generic(&c, arg, k).map_err(|e| match e {
                        DenoteError::Stuck(_) => stuck(),
                        other => other,
                    }),
                    _ => Err(stuck()),
                }
            }
            _ => Err(DenoteError::NotCore(t.to_string())),
        }
    }

    /// The generic effects.
    fn generic(&mut self, c: &Const, arg: SemVal, k: Cont) -> Result<Term> {
        match c {
            Const::Fork => {
                let b = self.fresh("a");
                let parent = k(
                    SemVal::Inj(0, Box::new(SemVal::Tids(BTreeSet::from([b.clone()])))),
                    self,
                )?;
                let child = k(SemVal::Inj(1, Box::new(SemVal::unit())), self)?;
                Ok(Term::fork(&b, parent, child))
            }
            Const::Wait => match arg {
                SemVal::Tids(s) => Ok(Term::wait_set(s, k(SemVal::unit(), self)?)),
                _ => Err(DenoteError::Stuck(String::new())),
            },
            Const::Stop => Ok(Term::Stop),
            Const::PrintStop(l) => Ok(Term::Act(l.clone())),
            Const::Print(l) => {
                let b = self.fresh("a");
                let rest = k(SemVal::unit(), self)?;
                Ok(Term::fork(
                    &b,
                    Term::wait(&[&b], rest),
                    Term::Act(l.clone()),
                ))
            }
        }
    }
}

/// A program's meaning: a term over one variable per summand of its
/// result type and one parameter per thread of its world.
#[derive(Debug, Clone)]
pub struct Denotation {
    pub gamma: CompContext,
    pub delta: ParamContext,
    pub term: Term,
    pub poset: Poset,
}

/// Parameter names `w1 .. wk` for the world, in tid order.
pub fn world_params(world: &BTreeSet<RuntimeTid>) -> BTreeMap<RuntimeTid, String> {
    world
        .iter()
        .enumerate()
        .map(|(i, a)| (a.clone(), format!("w{}", i + 1)))
        .collect()
}

/// Elaborate a core computation under `env`. The result variables are
/// named after `var_base`; `params` lists the parameters in scope.
pub fn elaborate_term(
    t: &Comp,
    ty: &Type,
    env: &SemEnv,
    world: &BTreeMap<RuntimeTid, String>,
    used: BTreeSet<String>,
    var_base: &str,
) -> Result<(CompContext, Term)> {
    let fo = CanonicalFoType::of(ty)?;
    let names = fo.var_names(var_base);
    let top = |v: SemVal, _: &mut Elab| -> Result<Term> {
        let (i, tids) = flatten(&v, ty)?;
        Ok(Term::Var {
            name: names[i].clone(),
            args: tids,
        })
    };
    let mut el = Elab { used };
    el.used.extend(world.values().cloned());
    let term = el.comp(t, env, world, &top)?;
    Ok((fo.context(var_base), term))
}

/// Denotation of a core computation of first-order type `ty` in `world`.
pub fn denote(t: &Comp, ty: &Type, world: &BTreeSet<RuntimeTid>) -> Result<Denotation> {
    let names = world_params(world);
    let delta = ParamContext::new(names.values().cloned())?;
    let (gamma, term) = elaborate_term(t, ty, &SemEnv::default(), &names, BTreeSet::new(), "x")?;
    let poset = interp(&term, &gamma, &delta)?;
    Ok(Denotation {
        gamma,
        delta,
        term,
        poset,
    })
}

/// Observed and denoted posets of a closed program of type 0.
#[derive(Debug, Clone)]
pub struct AdequacyReport {
    pub observed: Poset,
    pub denoted: Poset,
    pub agree: bool,
}

pub fn adequacy_check(t: &Comp, policy: Policy, fuel: usize) -> Result<AdequacyReport> {
    let observed = run(t, policy, fuel)?.observation;
    let denoted = denote(t, &Type::empty(), &BTreeSet::new())?
        .poset
        .erase_star();
    let agree = isomorphic(&observed, &denoted);
    Ok(AdequacyReport {
        observed,
        denoted,
        agree,
    })
}

/// Compare `⟦let x = t in u⟧` with the substitution of each `⟦u⟧`, taken
/// at the value of summand `i` of `t_ty`, into `⟦t⟧`.
pub fn compositionality_check(
    x: &str,
    t: &Comp,
    t_ty: &Type,
    u: &Comp,
    u_ty: &Type,
    world: &BTreeSet<RuntimeTid>,
) -> Result<Equality> {
    let names = world_params(world);
    let delta = ParamContext::new(names.values().cloned())?;
    let whole = Comp::Let(x.to_string(), Box::new(t.clone()), Box::new(u.clone()));
    let (gamma, direct) = elaborate_term(
        &whole,
        u_ty,
        &SemEnv::default(),
        &names,
        BTreeSet::new(),
        "x",
    )?;

    let fo = CanonicalFoType::of(t_ty)?;
    let (_, mut composed) =
        elaborate_term(t, t_ty, &SemEnv::default(), &names, BTreeSet::new(), "y")?;
    for (i, (y, &m)) in fo.var_names("y").iter().zip(&fo.summands).enumerate() {
        let mut used: BTreeSet<String> = names.values().cloned().collect();
        let binders: Vec<String> = (0..m)
            .map(|_| {
                let c = fresh_name("c", &used);
                used.insert(c.clone());
                c
            })
            .collect();
        let env = SemEnv::default().with(x, decode(t_ty, i, &binders)?);
        let (_, body) = elaborate_term(u, u_ty, &env, &names, used, "x")?;
        composed = subst_comp(&composed, &binders, &body, y)?;
    }
    Ok(decide_equal(&direct, &composed, &gamma, &delta)?)
}

#[cfg(test)]
mod tests;
