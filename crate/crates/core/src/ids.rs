//! Thread-ID parameters: contexts of parameter names, semilattice terms kept
//! as finite sets, and finite relations between worlds.
//!
//! Indices are 0-based in memory. Anything user-facing (display, JSON,
//! `Relation::to_one_based`) is 1-based so that `[n] = {1, ..., n}`.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdError {
    #[error("unbound parameter `{0}`")]
    UnboundName(String),
    #[error("duplicate parameter `{0}` in context")]
    DuplicateName(String),
    #[error("relation dimension mismatch: {left} -> {mid} composed with {mid2} -> {right}")]
    DimensionMismatch {
        left: usize,
        mid: usize,
        mid2: usize,
        right: usize,
    },
    #[error("pair ({0}, {1}) out of bounds for relation {2} -> {3}")]
    OutOfBounds(usize, usize, usize, usize),
    #[error("tid set over {found} parameters where {expected} were expected")]
    ContextSize { expected: usize, found: usize },
}

/// An ordered list of distinct parameter names. Position `i` is input `i + 1`
/// of any poset interpreted in this context.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ParamContext {
    names: Vec<String>,
}

impl ParamContext {
    pub fn new<I, S>(names: I) -> Result<Self, IdError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut ctx = ParamContext::default();
        for name in names {
            ctx.push(name)?;
        }
        Ok(ctx)
    }

    pub fn push(&mut self, name: impl Into<String>) -> Result<usize, IdError> {
        let name = name.into();
        if self.names.contains(&name) {
            return Err(IdError::DuplicateName(name));
        }
        self.names.push(name);
        Ok(self.names.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index_of(name).is_some()
    }

    /// Resolve a set of names to a `TidSet` over this context.
    pub fn resolve<'a, I>(&self, names: I) -> Result<TidSet, IdError>
    where
        I: IntoIterator<Item = &'a String>,
    {
        let mut members = BTreeSet::new();
        for name in names {
            let idx = self
                .index_of(name)
                .ok_or_else(|| IdError::UnboundName(name.clone()))?;
            members.insert(idx);
        }
        Ok(TidSet {
            ctx_size: self.len(),
            members,
        })
    }
}

/// Canonical representative of a semilattice term: a subset of the
/// parameter positions of a context of size `ctx_size`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TidSet {
    ctx_size: usize,
    members: BTreeSet<usize>,
}

impl TidSet {
    pub fn empty(ctx_size: usize) -> Self {
        TidSet {
            ctx_size,
            members: BTreeSet::new(),
        }
    }

    pub fn singleton(ctx_size: usize, idx: usize) -> Self {
        assert!(
            idx < ctx_size,
            "index {idx} outside context of size {ctx_size}"
        );
        TidSet {
            ctx_size,
            members: BTreeSet::from([idx]),
        }
    }

    /// Build from 0-based indices; panics when an index is out of range.
    pub fn from_indices(ctx_size: usize, members: impl IntoIterator<Item = usize>) -> Self {
        let members: BTreeSet<usize> = members.into_iter().collect();
        if let Some(&max) = members.iter().next_back() {
            assert!(
                max < ctx_size,
                "index {max} outside context of size {ctx_size}"
            );
        }
        TidSet { ctx_size, members }
    }

    pub fn ctx_size(&self) -> usize {
        self.ctx_size
    }

    pub fn members(&self) -> &BTreeSet<usize> {
        &self.members
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.members.contains(&idx)
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn union(&self, other: &TidSet) -> Result<TidSet, IdError> {
        if self.ctx_size != other.ctx_size {
            return Err(IdError::ContextSize {
                expected: self.ctx_size,
                found: other.ctx_size,
            });
        }
        Ok(TidSet {
            ctx_size: self.ctx_size,
            members: self.members.union(&other.members).copied().collect(),
        })
    }

    /// 1-based serialized form: a sorted array of integers.
    pub fn to_one_based(&self) -> Vec<usize> {
        self.members.iter().map(|i| i + 1).collect()
    }
}

impl fmt::Display for TidSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.to_one_based())
    }
}

/// Raw semilattice syntax. Only the parser produces these; everything else
/// works with sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TidExpr {
    Empty,
    Name(String),
    Join(Box<TidExpr>, Box<TidExpr>),
}

impl TidExpr {
    pub fn join(a: TidExpr, b: TidExpr) -> TidExpr {
        TidExpr::Join(Box::new(a), Box::new(b))
    }

    /// The names mentioned, i.e. the quotient by the semilattice laws.
    pub fn names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut BTreeSet<String>) {
        match self {
            TidExpr::Empty => {}
            TidExpr::Name(n) => {
                out.insert(n.clone());
            }
            TidExpr::Join(a, b) => {
                a.collect(out);
                b.collect(out);
            }
        }
    }
}

impl fmt::Display for TidExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TidExpr::Empty => write!(f, "0"),
            TidExpr::Name(n) => write!(f, "{n}"),
            TidExpr::Join(a, b) => {
                write!(f, "{a} + ")?;
                match **b {
                    TidExpr::Join(..) => write!(f, "({b})"),
                    _ => write!(f, "{b}"),
                }
            }
        }
    }
}

/// Union for `+`, the empty set for `0`, a singleton for a name.
pub fn eval_tid_expr(expr: &TidExpr, ctx: &ParamContext) -> Result<TidSet, IdError> {
    match expr {
        TidExpr::Empty => Ok(TidSet::empty(ctx.len())),
        TidExpr::Name(n) => ctx
            .index_of(n)
            .map(|i| TidSet::singleton(ctx.len(), i))
            .ok_or_else(|| IdError::UnboundName(n.clone())),
        TidExpr::Join(a, b) => eval_tid_expr(a, ctx)?.union(&eval_tid_expr(b, ctx)?),
    }
}

/// A morphism `src -> dst` of the category of finite sets and relations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Relation {
    src: usize,
    dst: usize,
    pairs: BTreeSet<(usize, usize)>,
}

impl Relation {
    pub fn new(
        src: usize,
        dst: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, IdError> {
        let pairs: BTreeSet<_> = pairs.into_iter().collect();
        for &(i, j) in &pairs {
            if i >= src || j >= dst {
                return Err(IdError::OutOfBounds(i, j, src, dst));
            }
        }
        Ok(Relation { src, dst, pairs })
    }

    /// Same as [`Relation::new`] but takes 1-based pairs.
    pub fn from_one_based(
        src: usize,
        dst: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, IdError> {
        let mut zero = Vec::new();
        for (i, j) in pairs {
            if i == 0 || j == 0 {
                return Err(IdError::OutOfBounds(i, j, src, dst));
            }
            zero.push((i - 1, j - 1));
        }
        Relation::new(src, dst, zero)
    }

    pub fn identity(n: usize) -> Self {
        Relation {
            src: n,
            dst: n,
            pairs: (0..n).map(|i| (i, i)).collect(),
        }
    }

    pub fn empty(src: usize, dst: usize) -> Self {
        Relation {
            src,
            dst,
            pairs: BTreeSet::new(),
        }
    }

    pub fn src(&self) -> usize {
        self.src
    }

    pub fn dst(&self) -> usize {
        self.dst
    }

    pub fn pairs(&self) -> &BTreeSet<(usize, usize)> {
        &self.pairs
    }

    pub fn to_one_based(&self) -> Vec<(usize, usize)> {
        self.pairs.iter().map(|&(i, j)| (i + 1, j + 1)).collect()
    }

    /// Direct image of a single source index.
    pub fn image(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.pairs.range((i, 0)..=(i, usize::MAX)).map(|&(_, j)| j)
    }

    /// Diagrammatic composition: first `self`, then `next`.
    pub fn compose(&self, next: &Relation) -> Result<Relation, IdError> {
        if self.dst != next.src {
            return Err(IdError::DimensionMismatch {
                left: self.src,
                mid: self.dst,
                mid2: next.src,
                right: next.dst,
            });
        }
        let mut pairs = BTreeSet::new();
        for &(i, j) in &self.pairs {
            pairs.extend(next.image(j).map(|k| (i, k)));
        }
        Ok(Relation {
            src: self.src,
            dst: next.dst,
            pairs,
        })
    }
}

/// `[id_p, u_1, ..., u_k] : p + k -> p`, the relation that interprets the
/// parameter arguments of an operation.
pub fn graph_of(u_list: &[TidSet], p: usize) -> Result<Relation, IdError> {
    let mut pairs: BTreeSet<(usize, usize)> = (0..p).map(|i| (i, i)).collect();
    for (j, u) in u_list.iter().enumerate() {
        if u.ctx_size() != p {
            return Err(IdError::ContextSize {
                expected: p,
                found: u.ctx_size(),
            });
        }
        pairs.extend(u.members().iter().map(|&k| (p + j, k)));
    }
    Ok(Relation {
        src: p + u_list.len(),
        dst: p,
        pairs,
    })
}
