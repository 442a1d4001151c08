//! Translation of the surface conveniences into the core calculus.

use std::collections::BTreeSet;

use crate::term::{fresh_name, Label};

use super::{Branch, Comp, Const, Type, Value};

struct Fresh {
    used: BTreeSet<String>,
}

impl Fresh {
    fn name(&mut self, base: &str) -> String {
        let n = fresh_name(base, &self.used);
        self.used.insert(n.clone());
        n
    }
}

fn app0(f: Value) -> Comp {
    Comp::App(f, Value::unit())
}

fn konst(c: Const) -> Value {
    Value::Const(c)
}

fn let_(x: String, a: Comp, b: Comp) -> Comp {
    Comp::Let(x, Box::new(a), Box::new(b))
}

/// `case c of {...}` with a computation scrutinee, already in core form.
fn case_comp(fr: &mut Fresh, scrut: Comp, branches: Vec<Branch>, ann: Option<Type>) -> Comp {
    let z = fr.name("z");
    let_(z.clone(), scrut, Comp::Case(Value::Var(z), branches, ann))
}

fn seq(fr: &mut Fresh, a: Comp, b: Comp) -> Comp {
    let_(fr.name("_"), a, b)
}

fn halt(fr: &mut Fresh, c: Const, ty: Type) -> Comp {
    let z = fr.name("z");
    let_(
        z.clone(),
        app0(konst(c)),
        Comp::Case(Value::Var(z), vec![], Some(ty)),
    )
}

fn print_body(fr: &mut Fresh, l: &Label) -> Comp {
    let (a, u) = (fr.name("a"), fr.name("_"));
    let done = halt(fr, Const::PrintStop(l.clone()), Type::unit());
    case_comp(
        fr,
        app0(konst(Const::Fork)),
        vec![
            (a.clone(), Comp::App(konst(Const::Wait), Value::Var(a))),
            (u, done),
        ],
        None,
    )
}

fn value(fr: &mut Fresh, v: &Value) -> Value {
    match v {
        Value::Const(Const::Print(l)) => {
            let u = fr.name("_");
            Value::Lam(u, Some(Type::unit()), Box::new(print_body(fr, l)))
        }
        Value::Var(_) | Value::Tid(_) | Value::Nil | Value::Const(_) => v.clone(),
        Value::Tuple(vs) => Value::Tuple(vs.iter().map(|w| value(fr, w)).collect()),
        Value::Inj(i, w) => Value::Inj(*i, Box::new(value(fr, w))),
        Value::Lam(x, ty, body) => Value::Lam(x.clone(), ty.clone(), Box::new(comp(fr, body))),
        Value::Join(a, b) => Value::Join(Box::new(value(fr, a)), Box::new(value(fr, b))),
        Value::Ascribe(w, ty) => Value::Ascribe(Box::new(value(fr, w)), ty.clone()),
    }
}

fn branches(fr: &mut Fresh, bs: &[Branch]) -> Vec<Branch> {
    bs.iter().map(|(x, t)| (x.clone(), comp(fr, t))).collect()
}

fn comp(fr: &mut Fresh, t: &Comp) -> Comp {
    match t {
        Comp::Ret(v) => Comp::Ret(value(fr, v)),
        Comp::Proj(i, v) => Comp::Proj(*i, value(fr, v)),
        Comp::Case(v, bs, ann) => Comp::Case(value(fr, v), branches(fr, bs), ann.clone()),
        Comp::App(f, _) if matches!(f.bare(), Value::Const(Const::Print(_))) => {
            let Value::Const(Const::Print(l)) = f.bare() else {
                unreachable!()
            };
            print_body(fr, l)
        }
        Comp::App(f, a) => Comp::App(value(fr, f), value(fr, a)),
        Comp::Let(x, a, b) => let_(x.clone(), comp(fr, a), comp(fr, b)),
        Comp::Seq(a, b) => {
            let a = comp(fr, a);
            let b = comp(fr, b);
            seq(fr, a, b)
        }
        Comp::CaseOf(s, bs, ann) => {
            let s = comp(fr, s);
            let bs = branches(fr, bs);
            case_comp(fr, s, bs, ann.clone())
        }
        Comp::Parallel(x, y) => {
            let (x, y) = (value(fr, x), value(fr, y));
            let (a, b) = (fr.name("a"), fr.name("b"));
            let (u1, u2) = (fr.name("_"), fr.name("_"));
            let join = {
                let wb = Comp::App(konst(Const::Wait), Value::Var(b.clone()));
                let tail = seq(fr, wb, app0(konst(Const::Stop)));
                let wa = Comp::App(konst(Const::Wait), Value::Var(a.clone()));
                seq(fr, wa, tail)
            };
            let inner = case_comp(
                fr,
                app0(konst(Const::Fork)),
                vec![(b, join), (u2, app0(y))],
                None,
            );
            case_comp(
                fr,
                app0(konst(Const::Fork)),
                vec![(a, inner), (u1, app0(x))],
                None,
            )
        }
        Comp::Series(x, y) => {
            let (x, y) = (value(fr, x), value(fr, y));
            let (a, u) = (fr.name("a"), fr.name("_"));
            let wa = Comp::App(konst(Const::Wait), Value::Var(a.clone()));
            let after = seq(fr, wa, app0(y));
            case_comp(
                fr,
                app0(konst(Const::Fork)),
                vec![(a, after), (u, app0(x))],
                None,
            )
        }
        Comp::Node(l, v) => {
            let v = value(fr, v);
            let (b, u) = (fr.name("b"), fr.name("_"));
            // `print[l](); stop()` collapses to `printstop[l]()`
            let printed = halt(fr, Const::PrintStop(l.clone()), Type::Tid);
            let child = seq(fr, Comp::App(konst(Const::Wait), v), printed);
            case_comp(
                fr,
                app0(konst(Const::Fork)),
                vec![(b.clone(), Comp::Ret(Value::Var(b))), (u, child)],
                None,
            )
        }
    }
}

/// Rewrite every piece of sugar into core syntax. Names introduced are
/// fresh for the whole input, so nothing is captured.
pub fn desugar(t: &Comp) -> Comp {
    let mut fr = Fresh {
        used: t.all_names(),
    };
    comp(&mut fr, t)
}

fn value_is_core(v: &Value) -> bool {
    match v {
        Value::Const(Const::Print(_)) => false,
        Value::Var(_) | Value::Tid(_) | Value::Nil | Value::Const(_) => true,
        Value::Tuple(vs) => vs.iter().all(value_is_core),
        Value::Inj(_, w) | Value::Ascribe(w, _) => value_is_core(w),
        Value::Lam(_, _, body) => is_core(body),
        Value::Join(a, b) => value_is_core(a) && value_is_core(b),
    }
}

/// No sugar left anywhere.
pub fn is_core(t: &Comp) -> bool {
    match t {
        Comp::Ret(v) | Comp::Proj(_, v) => value_is_core(v),
        Comp::App(f, a) => value_is_core(f) && value_is_core(a),
        Comp::Case(v, bs, _) => value_is_core(v) && bs.iter().all(|(_, b)| is_core(b)),
        Comp::Let(_, a, b) => is_core(a) && is_core(b),
        Comp::Seq(..)
        | Comp::CaseOf(..)
        | Comp::Parallel(..)
        | Comp::Series(..)
        | Comp::Node(..) => false,
    }
}
