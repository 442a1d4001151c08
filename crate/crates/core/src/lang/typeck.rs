//! Bidirectional type checking. Checking also elaborates: every lambda gets
//! its parameter type, every injection an ascription and every empty case
//! its result type, so the output infers without any expected type.

use std::collections::BTreeSet;

use thiserror::Error;

use super::{desugar, Branch, Comp, RuntimeTid, Type, Value};

pub type Env = Vec<(String, Type)>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("thread ID {0} is not in the world")]
    UnknownTid(RuntimeTid),
    #[error("in `{term}`: expected type {expected}, found {found}")]
    Mismatch {
        term: String,
        expected: Type,
        found: Type,
    },
    #[error("in `{term}`: expected a {what} type, found {found}")]
    WrongShape {
        term: String,
        what: &'static str,
        found: Type,
    },
    #[error("in `{term}`: {found} branches for a sum of {expected}")]
    BranchCount {
        term: String,
        expected: usize,
        found: usize,
    },
    #[error("in `{term}`: index {index} out of range for {ty}")]
    IndexOutOfRange {
        term: String,
        index: usize,
        ty: Type,
    },
    #[error("cannot infer a type for `{0}`; add an annotation")]
    CannotInfer(String),
}

struct Checker<'w> {
    world: &'w BTreeSet<RuntimeTid>,
}

fn lookup<'e>(env: &'e Env, x: &str) -> Option<&'e Type> {
    env.iter().rev().find(|(y, _)| y == x).map(|(_, t)| t)
}

fn with<T>(env: &mut Env, x: &str, ty: Type, f: impl FnOnce(&mut Env) -> T) -> T {
    env.push((x.to_string(), ty));
    let out = f(env);
    env.pop();
    out
}

fn expect_eq(term: impl ToString, expected: &Type, found: &Type) -> Result<(), TypeError> {
    if expected == found {
        Ok(())
    } else {
        Err(TypeError::Mismatch {
            term: term.to_string(),
            expected: expected.clone(),
            found: found.clone(),
        })
    }
}

fn shape(term: impl ToString, what: &'static str, found: &Type) -> TypeError {
    TypeError::WrongShape {
        term: term.to_string(),
        what,
        found: found.clone(),
    }
}

impl Checker<'_> {
    fn infer_value(&self, env: &mut Env, v: &Value) -> Result<(Value, Type), TypeError> {
        match v {
            Value::Var(x) => lookup(env, x)
                .cloned()
                .map(|t| (v.clone(), t))
                .ok_or_else(|| TypeError::UnboundVariable(x.clone())),
            Value::Tuple(vs) => {
                let mut out = Vec::with_capacity(vs.len());
                let mut tys = Vec::with_capacity(vs.len());
                for w in vs {
                    let (w, t) = self.infer_value(env, w)?;
                    out.push(w);
                    tys.push(t);
                }
                Ok((Value::Tuple(out), Type::Prod(tys)))
            }
            Value::Inj(..) => Err(TypeError::CannotInfer(v.to_string())),
            Value::Lam(_, None, _) => Err(TypeError::CannotInfer(v.to_string())),
            Value::Lam(x, Some(a), body) => {
                let (body, b) = with(env, x, a.clone(), |env| self.infer_comp(env, body))?;
                Ok((
                    Value::Lam(x.clone(), Some(a.clone()), Box::new(body)),
                    Type::arrow(a.clone(), b),
                ))
            }
            Value::Tid(a) => {
                if self.world.contains(a) {
                    Ok((v.clone(), Type::Tid))
                } else {
                    Err(TypeError::UnknownTid(a.clone()))
                }
            }
            Value::Nil => Ok((Value::Nil, Type::Tid)),
            Value::Join(a, b) => {
                let a = self.check_value(env, a, &Type::Tid)?;
                let b = self.check_value(env, b, &Type::Tid)?;
                Ok((Value::Join(Box::new(a), Box::new(b)), Type::Tid))
            }
            Value::Const(c) => {
                let (a, b) = c.signature();
                Ok((v.clone(), Type::arrow(a, b)))
            }
            Value::Ascribe(w, ty) => {
                let w = self.check_value(env, w, ty)?;
                Ok((w, ty.clone()))
            }
        }
    }

    fn check_value(&self, env: &mut Env, v: &Value, ty: &Type) -> Result<Value, TypeError> {
        match (v, ty) {
            (Value::Inj(i, w), Type::Sum(ts)) => {
                let component = ts.get(*i).ok_or_else(|| TypeError::IndexOutOfRange {
                    term: v.to_string(),
                    index: i + 1,
                    ty: ty.clone(),
                })?;
                let w = self.check_value(env, w, component)?;
                Ok(Value::Ascribe(
                    Box::new(Value::Inj(*i, Box::new(w))),
                    ty.clone(),
                ))
            }
            (Value::Inj(..), _) => Err(shape(v, "sum", ty)),
            (Value::Lam(x, ann, body), Type::Arrow(a, b)) => {
                if let Some(ann) = ann {
                    expect_eq(v, a, ann)?;
                }
                let body = with(env, x, (**a).clone(), |env| self.check_comp(env, body, b))?;
                Ok(Value::Lam(x.clone(), Some((**a).clone()), Box::new(body)))
            }
            (Value::Lam(..), _) => Err(shape(v, "function", ty)),
            (Value::Tuple(vs), Type::Prod(ts)) => {
                if vs.len() != ts.len() {
                    return Err(TypeError::Mismatch {
                        term: v.to_string(),
                        expected: ty.clone(),
                        found: Type::Prod(vec![Type::unit(); vs.len()]),
                    });
                }
                let out = vs
                    .iter()
                    .zip(ts)
                    .map(|(w, t)| self.check_value(env, w, t))
                    .collect::<Result<_, _>>()?;
                Ok(Value::Tuple(out))
            }
            _ => {
                let (w, found) = self.infer_value(env, v)?;
                expect_eq(v, ty, &found)?;
                Ok(w)
            }
        }
    }

    fn sum_components(
        &self,
        term: &dyn ToString,
        ty: &Type,
        n: usize,
    ) -> Result<Vec<Type>, TypeError> {
        match ty {
            Type::Sum(ts) if ts.len() == n => Ok(ts.clone()),
            Type::Sum(ts) => Err(TypeError::BranchCount {
                term: term.to_string(),
                expected: ts.len(),
                found: n,
            }),
            other => Err(shape(term.to_string(), "sum", other)),
        }
    }

    /// Infer the branches that can be inferred, then check the rest.
    fn case_branches(
        &self,
        env: &mut Env,
        term: &dyn ToString,
        comps: &[Type],
        branches: &[Branch],
        expected: Option<&Type>,
    ) -> Result<(Vec<Branch>, Type), TypeError> {
        let mut result: Option<Type> = expected.cloned();
        let mut done: Vec<Option<Comp>> = vec![None; branches.len()];
        if result.is_none() {
            for (i, ((x, t), a)) in branches.iter().zip(comps).enumerate() {
                match with(env, x, a.clone(), |env| self.infer_comp(env, t)) {
                    Ok((t, b)) => {
                        done[i] = Some(t);
                        result = Some(b);
                        break;
                    }
                    Err(TypeError::CannotInfer(_)) => continue,
                    Err(e) => return Err(e),
                }
            }
        }
        let result = result.ok_or_else(|| TypeError::CannotInfer(term.to_string()))?;
        let mut out = Vec::with_capacity(branches.len());
        for (i, ((x, t), a)) in branches.iter().zip(comps).enumerate() {
            let t = match done[i].take() {
                Some(t) => t,
                None => with(env, x, a.clone(), |env| self.check_comp(env, t, &result))?,
            };
            out.push((x.clone(), t));
        }
        Ok((out, result))
    }

    fn infer_comp(&self, env: &mut Env, t: &Comp) -> Result<(Comp, Type), TypeError> {
        self.comp(env, t, None)
    }

    fn check_comp(&self, env: &mut Env, t: &Comp, ty: &Type) -> Result<Comp, TypeError> {
        let (t2, found) = self.comp(env, t, Some(ty))?;
        expect_eq(t, ty, &found)?;
        Ok(t2)
    }

    fn comp(
        &self,
        env: &mut Env,
        t: &Comp,
        expected: Option<&Type>,
    ) -> Result<(Comp, Type), TypeError> {
        match t {
            Comp::Ret(v) => {
                let (v, ty) = match expected {
                    Some(ty) => (self.check_value(env, v, ty)?, ty.clone()),
                    None => self.infer_value(env, v)?,
                };
                Ok((Comp::Ret(v), ty))
            }
            Comp::Proj(i, v) => {
                let (v2, ty) = self.infer_value(env, v)?;
                match &ty {
                    Type::Prod(ts) => match ts.get(*i) {
                        Some(c) => Ok((Comp::Proj(*i, v2), c.clone())),
                        None => Err(TypeError::IndexOutOfRange {
                            term: t.to_string(),
                            index: i + 1,
                            ty: ty.clone(),
                        }),
                    },
                    other => Err(shape(t, "product", other)),
                }
            }
            Comp::Case(v, branches, ann) => {
                let (v2, vt) = self.infer_value(env, v)?;
                let comps = self.sum_components(t, &vt, branches.len())?;
                if let (Some(a), Some(e)) = (ann, expected) {
                    expect_eq(t, e, a)?;
                }
                let want = ann.as_ref().or(expected);
                let (bs, ty) = self.case_branches(env, t, &comps, branches, want)?;
                let ann = if bs.is_empty() {
                    Some(ty.clone())
                } else {
                    ann.clone()
                };
                Ok((Comp::Case(v2, bs, ann), ty))
            }
            Comp::CaseOf(s, branches, ann) => {
                let (s2, st) = self.infer_comp(env, s)?;
                let comps = self.sum_components(t, &st, branches.len())?;
                if let (Some(a), Some(e)) = (ann, expected) {
                    expect_eq(t, e, a)?;
                }
                let want = ann.as_ref().or(expected);
                let (bs, ty) = self.case_branches(env, t, &comps, branches, want)?;
                let ann = if bs.is_empty() {
                    Some(ty.clone())
                } else {
                    ann.clone()
                };
                Ok((Comp::CaseOf(Box::new(s2), bs, ann), ty))
            }
            Comp::App(f, a) => {
                if let Value::Lam(x, None, body) = f {
                    // a beta-redex with an unannotated lambda: type the argument first
                    let (a2, at) = self.infer_value(env, a)?;
                    let lam = Value::Lam(x.clone(), Some(at), body.clone());
                    return self.comp(env, &Comp::App(lam, a2), expected);
                }
                let (f2, ft) = self.infer_value(env, f)?;
                match ft {
                    Type::Arrow(dom, cod) => {
                        let a2 = self.check_value(env, a, &dom)?;
                        Ok((Comp::App(f2, a2), *cod))
                    }
                    other => Err(shape(t, "function", &other)),
                }
            }
            Comp::Let(x, a, b) => {
                let (a2, at) = self.infer_comp(env, a)?;
                let (b2, bt) = with(env, x, at, |env| self.comp(env, b, expected))?;
                Ok((Comp::Let(x.clone(), Box::new(a2), Box::new(b2)), bt))
            }
            Comp::Seq(a, b) => {
                let (a2, _) = self.infer_comp(env, a)?;
                let (b2, bt) = self.comp(env, b, expected)?;
                Ok((Comp::Seq(Box::new(a2), Box::new(b2)), bt))
            }
            Comp::Parallel(x, y) | Comp::Series(x, y) => {
                let thunk = Type::arrow(Type::unit(), Type::empty());
                let x2 = self.check_value(env, x, &thunk)?;
                let y2 = self.check_value(env, y, &thunk)?;
                let out = if matches!(t, Comp::Parallel(..)) {
                    Comp::Parallel(x2, y2)
                } else {
                    Comp::Series(x2, y2)
                };
                Ok((out, Type::empty()))
            }
            Comp::Node(l, v) => {
                let v2 = self.check_value(env, v, &Type::Tid)?;
                Ok((Comp::Node(l.clone(), v2), Type::Tid))
            }
        }
    }
}

/// Infer the type of a value.
pub fn typecheck_value(
    env: &Env,
    world: &BTreeSet<RuntimeTid>,
    v: &Value,
) -> Result<Type, TypeError> {
    let checker = Checker { world };
    checker.infer_value(&mut env.clone(), v).map(|(_, t)| t)
}

/// Infer the type of a computation, or check it when `expected` is given.
pub fn typecheck_comp(
    env: &Env,
    world: &BTreeSet<RuntimeTid>,
    t: &Comp,
    expected: Option<&Type>,
) -> Result<Type, TypeError> {
    let checker = Checker { world };
    let mut env = env.clone();
    match expected {
        Some(ty) => checker.check_comp(&mut env, t, ty).map(|_| ty.clone()),
        None => checker.infer_comp(&mut env, t).map(|(_, ty)| ty),
    }
}

/// Type check and annotate.
pub fn elaborate(
    env: &Env,
    world: &BTreeSet<RuntimeTid>,
    t: &Comp,
    expected: Option<&Type>,
) -> Result<(Comp, Type), TypeError> {
    let checker = Checker { world };
    let mut env = env.clone();
    match expected {
        Some(ty) => Ok((checker.check_comp(&mut env, t, ty)?, ty.clone())),
        None => checker.infer_comp(&mut env, t),
    }
}

/// Elaborate a closed surface program and desugar it into annotated core.
pub fn prepare(t: &Comp, world: &BTreeSet<RuntimeTid>) -> Result<(Comp, Type), TypeError> {
    let (elab, ty) = elaborate(&Env::new(), world, t, None)?;
    let core = desugar(&elab);
    let core_ty = typecheck_comp(&Env::new(), world, &core, None)?;
    debug_assert_eq!(core_ty, ty, "desugaring preserves types");
    Ok((core, ty))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::is_core;
    use crate::syntax::{parse_program, parse_type, parse_value};

    const EX1: &str = "let y = fork() in case y of { inj1 x1 => wait(x1); print[s1](); stop() \
                       | inj2 u => print[s2](); stop() }";

    fn prep(src: &str) -> Result<(Comp, Type), TypeError> {
        prepare(&parse_program(src).unwrap(), &BTreeSet::new())
    }

    #[test]
    fn example_program_has_empty_type() {
        let (core, ty) = prep(EX1).unwrap();
        assert_eq!(ty, Type::empty());
        assert!(is_core(&core));
    }

    #[test]
    fn world_membership() {
        let a = RuntimeTid(vec![0]);
        let v = parse_value("#[0]").unwrap();
        let world = BTreeSet::from([a.clone()]);
        assert_eq!(typecheck_value(&Env::new(), &world, &v), Ok(Type::Tid));
        assert_eq!(
            typecheck_value(&Env::new(), &BTreeSet::new(), &v),
            Err(TypeError::UnknownTid(a))
        );
    }

    #[test]
    fn combinators() {
        let (_, ty) = prep("parallel(\\u. printstop[a](), \\u. printstop[b]())").unwrap();
        assert_eq!(ty, Type::empty());
        let (_, ty) = prep("series(\\u. printstop[a](), \\u. printstop[b]())").unwrap();
        assert_eq!(ty, Type::empty());
        let n = "let a1 = node[s1](nil) in let a2 = node[s2](nil) in \
                 let a3 = node[s3](a1 (+) a2) in let a4 = node[s4](a2) in stop()";
        let (core, ty) = prep(n).unwrap();
        assert_eq!(ty, Type::empty());
        assert!(is_core(&core));
    }

    #[test]
    fn desugaring_preserves_types() {
        for src in [
            "print[s]()",
            "let p = ret print[s] in p(); ret nil",
            "case fork() of { inj1 a => ret inj1 a | inj2 u => ret inj2 () } : tid + 1",
            "let f = ret \\x: tid. wait(x) in case fork() of { inj1 a => f(a) | inj2 u => ret () }",
        ] {
            let surface = parse_program(src).unwrap();
            let (elab, ty) = elaborate(&Env::new(), &BTreeSet::new(), &surface, None).unwrap();
            let core = desugar(&elab);
            assert!(is_core(&core), "{core}");
            assert_eq!(
                typecheck_comp(&Env::new(), &BTreeSet::new(), &core, None),
                Ok(ty),
                "{src}"
            );
        }
    }

    #[test]
    fn elaboration_is_idempotent_and_printable() {
        let (once, ty) = elaborate(
            &Env::new(),
            &BTreeSet::new(),
            &parse_program(EX1).unwrap(),
            None,
        )
        .unwrap();
        let (twice, _) = elaborate(&Env::new(), &BTreeSet::new(), &once, Some(&ty)).unwrap();
        assert_eq!(once, twice);
        assert_eq!(parse_program(&once.to_string()).unwrap(), once);
    }

    #[test]
    fn errors() {
        assert!(matches!(prep("ret x"), Err(TypeError::UnboundVariable(_))));
        assert!(matches!(prep("wait(())"), Err(TypeError::Mismatch { .. })));
        assert!(matches!(
            prep("ret inj1 ()"),
            Err(TypeError::CannotInfer(_))
        ));
        assert!(matches!(
            prep("ret \\x. ret x"),
            Err(TypeError::CannotInfer(_))
        ));
        assert!(matches!(
            prep("proj1 nil"),
            Err(TypeError::WrongShape { .. })
        ));
        assert!(matches!(
            prep("case fork() of { inj1 a => stop() }"),
            Err(TypeError::BranchCount { .. })
        ));
        assert!(matches!(
            prep("proj3 ((), ())"),
            Err(TypeError::IndexOutOfRange { .. })
        ));
        assert!(matches!(prep("nil ()"), Err(TypeError::WrongShape { .. })));
        assert!(prep("case stop() of {}").is_err());
    }

    #[test]
    fn annotations_guide_checking() {
        let (_, ty) = prep("ret (inj1 () : 1 + tid)").unwrap();
        assert_eq!(ty, parse_type("1 + tid").unwrap());
        let (_, ty) = prep("case stop() of {} : tid * tid").unwrap();
        assert_eq!(ty, parse_type("tid * tid").unwrap());
        let (_, ty) = prep("(\\x. wait(x))(nil)").unwrap();
        assert_eq!(ty, Type::unit());
    }

    #[test]
    fn weakening_in_the_world() {
        let p = parse_program(EX1).unwrap();
        let big = BTreeSet::from([RuntimeTid(vec![7]), RuntimeTid(vec![8, 1])]);
        assert_eq!(prepare(&p, &big).map(|r| r.1), prep(EX1).map(|r| r.1));
    }
}
