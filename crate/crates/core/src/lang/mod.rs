//! The fine-grain call-by-value language with fork, wait, stop and printing.

use std::collections::BTreeSet;
use std::fmt;

use crate::term::Label;

mod desugar;
mod typeck;

pub use desugar::{desugar, is_core};
pub use typeck::{elaborate, prepare, typecheck_comp, typecheck_value, Env, TypeError};

/// A runtime thread ID: the path of spawn ordinals from the root thread.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct RuntimeTid(pub Vec<usize>);

impl RuntimeTid {
    pub fn root() -> Self {
        RuntimeTid(Vec::new())
    }

    pub fn child(&self, ordinal: usize) -> Self {
        let mut path = self.0.clone();
        path.push(ordinal);
        RuntimeTid(path)
    }

    pub fn parent(&self) -> Option<RuntimeTid> {
        let (_, init) = self.0.split_last()?;
        Some(RuntimeTid(init.to_vec()))
    }
}

impl fmt::Display for RuntimeTid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "#[{}]", parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Tid,
    Prod(Vec<Type>),
    Sum(Vec<Type>),
    Arrow(Box<Type>, Box<Type>),
}

impl Type {
    pub fn unit() -> Type {
        Type::Prod(vec![])
    }

    pub fn empty() -> Type {
        Type::Sum(vec![])
    }

    pub fn arrow(a: Type, b: Type) -> Type {
        Type::Arrow(Box::new(a), Box::new(b))
    }

    pub fn is_first_order(&self) -> bool {
        match self {
            Type::Tid => true,
            Type::Prod(ts) | Type::Sum(ts) => ts.iter().all(Type::is_first_order),
            Type::Arrow(..) => false,
        }
    }
}

fn fmt_type_at(t: &Type, level: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    // level 0: arrow position, 1: sum operand, 2: product operand
    let own = match t {
        Type::Arrow(..) => 0,
        Type::Sum(ts) if ts.len() >= 2 => 1,
        Type::Prod(ts) if ts.len() >= 2 => 2,
        _ => 3,
    };
    let paren = own < level || (own == level && own > 0);
    if paren {
        f.write_str("(")?;
    }
    match t {
        Type::Tid => f.write_str("tid")?,
        Type::Prod(ts) if ts.is_empty() => f.write_str("1")?,
        Type::Sum(ts) if ts.is_empty() => f.write_str("0")?,
        Type::Prod(ts) if ts.len() == 1 => write!(f, "prod[{}]", ts[0])?,
        Type::Sum(ts) if ts.len() == 1 => write!(f, "sum[{}]", ts[0])?,
        Type::Prod(ts) | Type::Sum(ts) => {
            let (sep, inner) = if matches!(t, Type::Prod(_)) {
                (" * ", 2)
            } else {
                (" + ", 1)
            };
            for (i, c) in ts.iter().enumerate() {
                if i > 0 {
                    f.write_str(sep)?;
                }
                fmt_type_at(c, inner, f)?;
            }
        }
        Type::Arrow(a, b) => {
            fmt_type_at(a, 1, f)?;
            f.write_str(" -> ")?;
            fmt_type_at(b, 0, f)?;
        }
    }
    if paren {
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_type_at(self, 0, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Const {
    Fork,
    Wait,
    Stop,
    PrintStop(Label),
    /// Sugar; removed by `desugar`.
    Print(Label),
}

impl Const {
    pub fn signature(&self) -> (Type, Type) {
        match self {
            Const::Fork => (Type::unit(), Type::Sum(vec![Type::Tid, Type::unit()])),
            Const::Wait => (Type::Tid, Type::unit()),
            Const::Stop | Const::PrintStop(_) => (Type::unit(), Type::empty()),
            Const::Print(_) => (Type::unit(), Type::unit()),
        }
    }
}

impl fmt::Display for Const {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Const::Fork => f.write_str("fork"),
            Const::Wait => f.write_str("wait"),
            Const::Stop => f.write_str("stop"),
            Const::PrintStop(l) => write!(f, "printstop[{l}]"),
            Const::Print(l) => write!(f, "print[{l}]"),
        }
    }
}

/// Injection and projection indices are 0-based here and 1-based in syntax.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Var(String),
    Tuple(Vec<Value>),
    Inj(usize, Box<Value>),
    Lam(String, Option<Type>, Box<Comp>),
    Tid(RuntimeTid),
    Nil,
    Join(Box<Value>, Box<Value>),
    Const(Const),
    Ascribe(Box<Value>, Type),
}

pub type Branch = (String, Comp);

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Comp {
    Ret(Value),
    Proj(usize, Value),
    /// The optional type annotates the result, needed for empty cases.
    Case(Value, Vec<Branch>, Option<Type>),
    App(Value, Value),
    Let(String, Box<Comp>, Box<Comp>),
    // surface sugar
    Seq(Box<Comp>, Box<Comp>),
    CaseOf(Box<Comp>, Vec<Branch>, Option<Type>),
    Parallel(Value, Value),
    Series(Value, Value),
    Node(Label, Value),
}

impl Value {
    pub fn unit() -> Value {
        Value::Tuple(vec![])
    }

    pub fn var(x: &str) -> Value {
        Value::Var(x.to_string())
    }

    fn is_atomic(&self) -> bool {
        !matches!(self, Value::Lam(..) | Value::Join(..) | Value::Inj(..))
    }

    /// The runtime thread IDs a tid value denotes, if it is closed.
    pub fn tids(&self) -> Option<BTreeSet<RuntimeTid>> {
        match self {
            Value::Tid(a) => Some(BTreeSet::from([a.clone()])),
            Value::Nil => Some(BTreeSet::new()),
            Value::Join(a, b) => {
                let mut s = a.tids()?;
                s.extend(b.tids()?);
                Some(s)
            }
            Value::Ascribe(v, _) => v.tids(),
            _ => None,
        }
    }

    /// Strip outer ascriptions.
    pub fn bare(&self) -> &Value {
        match self {
            Value::Ascribe(v, _) => v.bare(),
            v => v,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        free_value(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn subst(&self, x: &str, v: &Value) -> Value {
        match self {
            Value::Var(y) if y == x => v.clone(),
            Value::Var(_) | Value::Tid(_) | Value::Nil | Value::Const(_) => self.clone(),
            Value::Tuple(vs) => Value::Tuple(vs.iter().map(|w| w.subst(x, v)).collect()),
            Value::Inj(i, w) => Value::Inj(*i, Box::new(w.subst(x, v))),
            Value::Lam(y, ty, body) => {
                if y == x {
                    self.clone()
                } else {
                    Value::Lam(y.clone(), ty.clone(), Box::new(body.subst(x, v)))
                }
            }
            Value::Join(a, b) => Value::Join(Box::new(a.subst(x, v)), Box::new(b.subst(x, v))),
            Value::Ascribe(w, ty) => Value::Ascribe(Box::new(w.subst(x, v)), ty.clone()),
        }
    }
}

fn free_value(v: &Value, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match v {
        Value::Var(x) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        Value::Tid(_) | Value::Nil | Value::Const(_) => {}
        Value::Tuple(vs) => vs.iter().for_each(|w| free_value(w, bound, out)),
        Value::Inj(_, w) | Value::Ascribe(w, _) => free_value(w, bound, out),
        Value::Join(a, b) => {
            free_value(a, bound, out);
            free_value(b, bound, out);
        }
        Value::Lam(x, _, body) => {
            bound.push(x.clone());
            free_comp(body, bound, out);
            bound.pop();
        }
    }
}

fn free_branches(bs: &[Branch], bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    for (x, t) in bs {
        bound.push(x.clone());
        free_comp(t, bound, out);
        bound.pop();
    }
}

fn free_comp(t: &Comp, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match t {
        Comp::Ret(v) | Comp::Proj(_, v) | Comp::Node(_, v) => free_value(v, bound, out),
        Comp::App(a, b) | Comp::Parallel(a, b) | Comp::Series(a, b) => {
            free_value(a, bound, out);
            free_value(b, bound, out);
        }
        Comp::Case(v, bs, _) => {
            free_value(v, bound, out);
            free_branches(bs, bound, out);
        }
        Comp::CaseOf(s, bs, _) => {
            free_comp(s, bound, out);
            free_branches(bs, bound, out);
        }
        Comp::Let(x, a, b) => {
            free_comp(a, bound, out);
            bound.push(x.clone());
            free_comp(b, bound, out);
            bound.pop();
        }
        Comp::Seq(a, b) => {
            free_comp(a, bound, out);
            free_comp(b, bound, out);
        }
    }
}

fn subst_branches(bs: &[Branch], x: &str, v: &Value) -> Vec<Branch> {
    bs.iter()
        .map(|(y, t)| {
            if y == x {
                (y.clone(), t.clone())
            } else {
                (y.clone(), t.subst(x, v))
            }
        })
        .collect()
}

impl Comp {
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        free_comp(self, &mut Vec::new(), &mut out);
        out
    }

    /// `self[v / x]`. `v` is expected to be closed, as it always is at runtime.
    pub fn subst(&self, x: &str, v: &Value) -> Comp {
        match self {
            Comp::Ret(w) => Comp::Ret(w.subst(x, v)),
            Comp::Proj(i, w) => Comp::Proj(*i, w.subst(x, v)),
            Comp::Node(l, w) => Comp::Node(l.clone(), w.subst(x, v)),
            Comp::App(a, b) => Comp::App(a.subst(x, v), b.subst(x, v)),
            Comp::Parallel(a, b) => Comp::Parallel(a.subst(x, v), b.subst(x, v)),
            Comp::Series(a, b) => Comp::Series(a.subst(x, v), b.subst(x, v)),
            Comp::Case(w, bs, ann) => {
                Comp::Case(w.subst(x, v), subst_branches(bs, x, v), ann.clone())
            }
            Comp::CaseOf(s, bs, ann) => Comp::CaseOf(
                Box::new(s.subst(x, v)),
                subst_branches(bs, x, v),
                ann.clone(),
            ),
            Comp::Let(y, a, b) => {
                let b = if y == x { (**b).clone() } else { b.subst(x, v) };
                Comp::Let(y.clone(), Box::new(a.subst(x, v)), Box::new(b))
            }
            Comp::Seq(a, b) => Comp::Seq(Box::new(a.subst(x, v)), Box::new(b.subst(x, v))),
        }
    }

    /// Every identifier bound or used anywhere, for picking fresh names.
    pub fn all_names(&self) -> BTreeSet<String> {
        let mut out = self.free_vars();
        collect_binders(self, &mut out);
        out
    }
}

fn collect_binders_value(v: &Value, out: &mut BTreeSet<String>) {
    match v {
        Value::Lam(x, _, body) => {
            out.insert(x.clone());
            collect_binders(body, out);
        }
        Value::Tuple(vs) => vs.iter().for_each(|w| collect_binders_value(w, out)),
        Value::Inj(_, w) | Value::Ascribe(w, _) => collect_binders_value(w, out),
        Value::Join(a, b) => {
            collect_binders_value(a, out);
            collect_binders_value(b, out);
        }
        _ => {}
    }
}

fn collect_binders(t: &Comp, out: &mut BTreeSet<String>) {
    match t {
        Comp::Ret(v) | Comp::Proj(_, v) | Comp::Node(_, v) => collect_binders_value(v, out),
        Comp::App(a, b) | Comp::Parallel(a, b) | Comp::Series(a, b) => {
            collect_binders_value(a, out);
            collect_binders_value(b, out);
        }
        Comp::Case(v, bs, _) => {
            collect_binders_value(v, out);
            for (x, b) in bs {
                out.insert(x.clone());
                collect_binders(b, out);
            }
        }
        Comp::CaseOf(s, bs, _) => {
            collect_binders(s, out);
            for (x, b) in bs {
                out.insert(x.clone());
                collect_binders(b, out);
            }
        }
        Comp::Let(x, a, b) => {
            out.insert(x.clone());
            collect_binders(a, out);
            collect_binders(b, out);
        }
        Comp::Seq(a, b) => {
            collect_binders(a, out);
            collect_binders(b, out);
        }
    }
}

// ---- printing; the output parses back to the same tree ----

struct Atom<'a>(&'a Value);

impl fmt::Display for Atom<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_atomic() {
            write!(f, "{}", self.0)
        } else {
            write!(f, "({})", self.0)
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Var(x) => f.write_str(x),
            Value::Tuple(vs) => {
                f.write_str("(")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                if vs.len() == 1 {
                    f.write_str(",")?;
                }
                f.write_str(")")
            }
            Value::Inj(i, v) => write!(f, "inj{} {}", i + 1, Atom(v)),
            Value::Lam(x, None, body) => write!(f, "\\{x}. {body}"),
            Value::Lam(x, Some(ty), body) => write!(f, "\\{x}: {ty}. {body}"),
            Value::Tid(a) => write!(f, "{a}"),
            Value::Nil => f.write_str("nil"),
            Value::Join(a, b) => {
                match **a {
                    Value::Join(..) => write!(f, "{a}")?,
                    _ => write!(f, "{}", Atom(a))?,
                }
                write!(f, " (+) {}", Atom(b))
            }
            Value::Const(c) => write!(f, "{c}"),
            Value::Ascribe(v, ty) => match **v {
                Value::Lam(..) => write!(f, "(({v}) : {ty})"),
                _ => write!(f, "({v} : {ty})"),
            },
        }
    }
}

/// Wraps a computation in braces when its text would otherwise swallow
/// what follows it.
struct Closed<'a>(&'a Comp);

fn ends_open(t: &Comp) -> bool {
    matches!(
        t,
        Comp::Let(..) | Comp::Seq(..) | Comp::Case(_, _, Some(_)) | Comp::CaseOf(_, _, Some(_))
    )
}

impl fmt::Display for Closed<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if ends_open(self.0) {
            write!(f, "{{ {} }}", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

fn fmt_branches(bs: &[Branch], ann: &Option<Type>, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    f.write_str(" of {")?;
    for (i, (x, t)) in bs.iter().enumerate() {
        if i > 0 {
            f.write_str(" |")?;
        }
        write!(f, " inj{} {x} => {t}", i + 1)?;
    }
    f.write_str(if bs.is_empty() { "}" } else { " }" })?;
    if let Some(ty) = ann {
        write!(f, " : {ty}")?;
    }
    Ok(())
}

fn fmt_app_arg(v: &Value, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match v {
        Value::Tuple(vs) if vs.len() != 1 => write!(f, "{v}"),
        _ => write!(f, "({v})"),
    }
}

impl fmt::Display for Comp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Comp::Ret(v) => write!(f, "ret {}", Atom(v)),
            Comp::Proj(i, v) => write!(f, "proj{} {}", i + 1, Atom(v)),
            Comp::Case(v, bs, ann) => {
                write!(f, "case {v}")?;
                fmt_branches(bs, ann, f)
            }
            Comp::CaseOf(t, bs, ann) => {
                write!(f, "case {t}")?;
                fmt_branches(bs, ann, f)
            }
            Comp::App(g, a) => {
                write!(f, "{}", Atom(g))?;
                fmt_app_arg(a, f)
            }
            Comp::Let(x, a, b) => write!(f, "let {x} = {a} in {b}"),
            Comp::Seq(a, b) => write!(f, "{}; {b}", Closed(a)),
            Comp::Parallel(a, b) => write!(f, "parallel({a}, {b})"),
            Comp::Series(a, b) => write!(f, "series({a}, {b})"),
            Comp::Node(l, v) => write!(f, "node[{l}]({v})"),
        }
    }
}
