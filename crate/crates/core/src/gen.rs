//! Random and exhaustive generators for posets and terms, and a
//! brute-force enumeration of small labelled posets.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::ids::ParamContext;
use crate::poset::{ElemRef, Poset, Vertex};
use crate::term::{derived_node, CompContext, ParamSet, Term};

/// Size limits for `random_poset`.
#[derive(Debug, Clone, Copy)]
pub struct PosetBounds {
    pub max_vertices: usize,
    pub max_holes: usize,
    pub max_inputs: usize,
    pub max_arity: usize,
}

impl Default for PosetBounds {
    fn default() -> Self {
        PosetBounds {
            max_vertices: 6,
            max_holes: 2,
            max_inputs: 3,
            max_arity: 2,
        }
    }
}

const LABELS: [&str; 3] = ["s1", "s2", "s3"];
const HOLE_VARS: [&str; 2] = ["x", "y"];

fn subset<T: Clone, R: Rng>(rng: &mut R, items: &[T], p: f64) -> Vec<T> {
    items.iter().filter(|_| rng.gen_bool(p)).cloned().collect()
}

/// A well-formed poset. Vertices are generated in a topological order and
/// both order and visibility only point forward in it.
pub fn random_poset<R: Rng>(rng: &mut R, bounds: PosetBounds) -> Poset {
    let n = rng.gen_range(0..=bounds.max_inputs);
    random_poset_over(rng, n, bounds)
}

/// As `random_poset`, with exactly `n` inputs.
pub fn random_poset_over<R: Rng>(rng: &mut R, n: usize, bounds: PosetBounds) -> Poset {
    let k = rng.gen_range(0..=bounds.max_vertices);
    let holes = rng.gen_range(0..=bounds.max_holes.min(k));
    let mut kinds: Vec<bool> = (0..k).map(|i| i < holes).collect();
    kinds.shuffle(rng);

    let density = rng.gen_range(0.1..0.6);
    let mut order = Vec::new();
    let mut vertices = Vec::with_capacity(k);
    for (j, &is_hole) in kinds.iter().enumerate() {
        let earlier: Vec<ElemRef> = (0..n)
            .map(ElemRef::In)
            .chain((0..j).map(ElemRef::V))
            .collect();
        for e in subset(rng, &earlier, density) {
            order.push((e, ElemRef::V(j)));
        }
        if rng.gen_bool(0.6) {
            order.push((ElemRef::V(j), ElemRef::Star));
        }
        vertices.push(if is_hole {
            let arity = rng.gen_range(0..=bounds.max_arity);
            Vertex::Hole {
                // holes of one variable share an arity
                var: format!("{}{arity}", HOLE_VARS[rng.gen_range(0..HOLE_VARS.len())]),
                visibility: (0..arity)
                    .map(|_| subset(rng, &earlier, density).into_iter().collect())
                    .collect(),
            }
        } else {
            Vertex::Action(LABELS[rng.gen_range(0..LABELS.len())].to_string())
        });
    }
    let p = Poset::new(n, vertices, order);
    debug_assert!(p.is_well_formed(), "{p}");
    p
}

/// The computation context and parameter context a generated poset lives
/// in, with its inputs named `a1 .. an`.
pub fn poset_contexts(p: &Poset) -> (CompContext, ParamContext) {
    let mut gamma = CompContext::default();
    for v in p.vertices() {
        if let Vertex::Hole { var, visibility } = v {
            if gamma.arity(var).is_none() {
                gamma
                    .push(var.clone(), visibility.len())
                    .expect("fresh variable");
            }
        }
    }
    let delta =
        ParamContext::new((1..=p.n_inputs()).map(|i| format!("a{i}"))).expect("distinct names");
    (gamma, delta)
}

/// A random scope-correct term of at most `max_size` constructors.
pub fn random_term<R: Rng>(
    rng: &mut R,
    gamma: &CompContext,
    delta: &ParamContext,
    labels: &[&str],
    max_size: usize,
) -> Term {
    let mut scope: Vec<String> = delta.names().to_vec();
    let mut counter = 0;
    term_in(
        rng,
        gamma,
        labels,
        max_size.max(1),
        &mut scope,
        &mut counter,
    )
}

fn term_in<R: Rng>(
    rng: &mut R,
    gamma: &CompContext,
    labels: &[&str],
    size: usize,
    scope: &mut Vec<String>,
    counter: &mut usize,
) -> Term {
    let leaf = size == 1 || rng.gen_bool(0.25);
    if leaf {
        let vars = gamma.entries();
        return match rng.gen_range(0..3) {
            0 if !vars.is_empty() => {
                let (x, m) = &vars[rng.gen_range(0..vars.len())];
                Term::Var {
                    name: x.clone(),
                    args: (0..*m)
                        .map(|_| subset(rng, scope, 0.4).into_iter().collect())
                        .collect(),
                }
            }
            1 => Term::Act(labels[rng.gen_range(0..labels.len())].to_string()),
            _ => Term::Stop,
        };
    }
    if size >= 3 && rng.gen_bool(0.55) {
        *counter += 1;
        let b = format!("c{counter}");
        let left = rng.gen_range(1..size - 1);
        let child = term_in(rng, gamma, labels, size - 1 - left, scope, counter);
        scope.push(b.clone());
        let parent = term_in(rng, gamma, labels, left, scope, counter);
        scope.pop();
        return Term::fork(&b, parent, child);
    }
    let mut guard: ParamSet = subset(rng, scope, 0.4).into_iter().collect();
    if guard.is_empty() && !scope.is_empty() {
        guard.insert(scope[rng.gen_range(0..scope.len())].clone());
    }
    let cont = term_in(rng, gamma, labels, size - 1, scope, counter);
    Term::wait_set(guard, cont)
}

/// Every closed term built from `node` and `stop` with at most `max_nodes`
/// nodes. Each node waits on a subset of the earlier nodes.
pub fn node_terms(max_nodes: usize, labels: &[&str]) -> Vec<Term> {
    let mut out = Vec::new();
    for k in 0..=max_nodes {
        nodes_from(0, k, labels, &mut Vec::new(), &mut out);
    }
    out
}

fn nodes_from(
    i: usize,
    k: usize,
    labels: &[&str],
    spec: &mut Vec<(String, ParamSet)>,
    out: &mut Vec<Term>,
) {
    if i == k {
        let mut t = Term::Stop;
        for (j, (l, guard)) in spec.iter().enumerate().rev() {
            t = derived_node(l, guard.clone(), &format!("n{}", j + 1), t);
        }
        out.push(t);
        return;
    }
    for l in labels {
        for mask in 0..(1usize << i) {
            let guard = (0..i)
                .filter(|j| mask >> j & 1 == 1)
                .map(|j| format!("n{}", j + 1))
                .collect();
            spec.push((l.to_string(), guard));
            nodes_from(i + 1, k, labels, spec, out);
            spec.pop();
        }
    }
}

/// A labelled poset given by its labels and strict order on `0..k`,
/// normalised to the least image under all permutations.
pub type Canonical = (Vec<String>, BTreeSet<(usize, usize)>);

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in permutations(k - 1) {
        for slot in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(slot, k - 1);
            out.push(p);
        }
    }
    out
}

pub fn canonical(labels: &[String], order: &BTreeSet<(usize, usize)>) -> Canonical {
    permutations(labels.len())
        .into_iter()
        .map(|perm| {
            let mut ls = vec![String::new(); labels.len()];
            for (i, &j) in perm.iter().enumerate() {
                ls[j] = labels[i].clone();
            }
            let ord = order.iter().map(|&(a, b)| (perm[a], perm[b])).collect();
            (ls, ord)
        })
        .min()
        .unwrap_or_default()
}

/// The canonical form of a poset without inputs or holes, ignoring the end.
pub fn canonical_of(p: &Poset) -> Option<Canonical> {
    if p.n_inputs() != 0 || p.hole_count() != 0 {
        return None;
    }
    let labels: Vec<String> = p.vertices().iter().map(|v| v.label().to_string()).collect();
    let order = p
        .order()
        .iter()
        .filter_map(|&(a, b)| match (a, b) {
            (ElemRef::V(i), ElemRef::V(j)) => Some((i, j)),
            _ => None,
        })
        .collect();
    Some(canonical(&labels, &order))
}

/// Every labelled poset on at most `max_points` points, one per
/// isomorphism class: all strict orders on `0..k` times all labellings.
pub fn labelled_posets(max_points: usize, labels: &[&str]) -> BTreeSet<Canonical> {
    let mut out = BTreeSet::new();
    for k in 0..=max_points {
        let pairs: Vec<(usize, usize)> = (0..k)
            .flat_map(|a| (0..k).filter(move |&b| b != a).map(move |b| (a, b)))
            .collect();
        for mask in 0..(1u64 << pairs.len()) {
            let rel: BTreeSet<(usize, usize)> = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &p)| p)
                .collect();
            let antisymmetric = rel.iter().all(|&(a, b)| !rel.contains(&(b, a)));
            let transitive = rel.iter().all(|&(a, b)| {
                rel.iter()
                    .filter(|&&(c, _)| c == b)
                    .all(|&(_, d)| rel.contains(&(a, d)))
            });
            if !(antisymmetric && transitive) {
                continue;
            }
            let mut ls = vec![0usize; k];
            loop {
                let named: Vec<String> = ls.iter().map(|&i| labels[i].to_string()).collect();
                out.insert(canonical(&named, &rel));
                // next labelling, odometer style
                let Some(pos) = ls.iter().position(|&i| i + 1 < labels.len()) else {
                    break;
                };
                ls[pos] += 1;
                for l in &mut ls[..pos] {
                    *l = 0;
                }
            }
        }
    }
    out
}
