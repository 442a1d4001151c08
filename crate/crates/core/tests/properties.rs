use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use forkwait::denote::apply_gadgets;
use forkwait::gen::{random_poset, random_poset_over, random_term, PosetBounds};
use forkwait::ids::{ParamContext, Relation};
use forkwait::lang::{prepare, typecheck_comp, Comp, Env, RuntimeTid, Type};
use forkwait::opsem::{explore, run, Policy};
use forkwait::poset::{decide_equal, interp, isomorphic, reify, ElemRef, Poset, Vertex};
use forkwait::syntax::parse_program;
use forkwait::term::{
    alpha_normalize, rename_apart, scope_check, subst_comp, subst_param, subst_params, CompContext,
    ParamSet, Term,
};

const LABELS: [&str; 3] = ["s1", "s2", "s3"];

fn gamma() -> CompContext {
    CompContext::new([("x", 1), ("y", 0)]).unwrap()
}

fn delta(n: usize) -> ParamContext {
    ParamContext::new((1..=n).map(|i| format!("a{i}"))).unwrap()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn equal(t1: &Term, t2: &Term, g: &CompContext, d: &ParamContext) -> bool {
    decide_equal(t1, t2, g, d).unwrap().is_equal()
}

fn corpus() -> Vec<(String, Comp)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "prog") {
            let src = std::fs::read_to_string(&path).unwrap();
            let (core, _) = prepare(&parse_program(&src).unwrap(), &BTreeSet::new()).unwrap();
            out.push((path.display().to_string(), core));
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn substitution_preserves_scope(seed: u64) {
        let mut r = rng(seed);
        let d = delta(2);
        let t = random_term(&mut r, &gamma(), &d, &LABELS, 8);
        let inner = ParamContext::new(["a1", "a2", "b"]).unwrap();
        let only_y = CompContext::new([("y", 0)]).unwrap();
        let body = random_term(&mut r, &only_y, &inner, &LABELS, 5);
        let s = subst_comp(&t, &["b".to_string()], &body, "x").unwrap();
        // binders of the body may shadow the host's, so compare up to renaming
        prop_assert!(scope_check(&rename_apart(&s, &d), &gamma(), &d).is_ok(), "{}", s);
        let renamed = subst_param(&t, &BTreeSet::from(["a2".to_string()]), "a1");
        prop_assert!(scope_check(&renamed, &gamma(), &d).is_ok(), "{}", renamed);
    }

    #[test]
    fn param_and_comp_substitution_commute(seed: u64) {
        let mut r = rng(seed);
        let d = delta(2);
        let t = random_term(&mut r, &gamma(), &d, &LABELS, 8);
        let inner = ParamContext::new(["a1", "a2", "b"]).unwrap();
        let only_y = CompContext::new([("y", 0)]).unwrap();
        let body = random_term(&mut r, &only_y, &inner, &LABELS, 5);
        let to: ParamSet = if r.gen_bool(0.5) { BTreeSet::from(["a2".into()]) } else { BTreeSet::new() };
        let b = vec!["b".to_string()];
        let left = subst_param(&subst_comp(&t, &b, &body, "x").unwrap(), &to, "a1");
        let right = subst_comp(&subst_param(&t, &to, "a1"), &b, &subst_param(&body, &to, "a1"), "x").unwrap();
        prop_assert!(equal(&left, &right, &gamma(), &d), "{} vs {}", left, right);
    }

    #[test]
    fn alpha_renaming_preserves_interpretation(seed: u64) {
        let mut r = rng(seed);
        let d = delta(seed as usize % 3);
        let t = random_term(&mut r, &gamma(), &d, &LABELS, 8);
        let p = interp(&t, &gamma(), &d).unwrap();
        prop_assert!(isomorphic(&p, &interp(&alpha_normalize(&t), &gamma(), &d).unwrap()));
        prop_assert!(isomorphic(&p, &interp(&rename_apart(&t, &d), &gamma(), &d).unwrap()));
    }

    #[test]
    fn interp_is_natural(seed: u64) {
        let mut r = rng(seed);
        let (n, m) = (r.gen_range(0..=3), r.gen_range(0..=3));
        let d = delta(n);
        let t = random_term(&mut r, &gamma(), &d, &LABELS, 8);
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (0..m).map(move |j| (i, j)))
            .filter(|_| r.gen_bool(0.4))
            .collect();
        let rel = Relation::new(n, m, pairs.iter().copied()).unwrap();
        // target parameters are renamed so that they cannot clash with the source
        let target = ParamContext::new((1..=m).map(|j| format!("z{j}"))).unwrap();
        let map: BTreeMap<String, ParamSet> = (0..n)
            .map(|i| {
                let image = rel.image(i).map(|j| target.names()[j].clone()).collect();
                (d.names()[i].clone(), image)
            })
            .collect();
        let moved = subst_params(&t, &map);
        let lhs = interp(&moved, &gamma(), &target).unwrap();
        let rhs = interp(&t, &gamma(), &d).unwrap().relabel(&rel).unwrap();
        prop_assert!(isomorphic(&lhs, &rhs), "{}\n{}\n{}", t, lhs, rhs);
    }

    #[test]
    fn operations_preserve_well_formedness(seed: u64) {
        let mut r = rng(seed);
        let b = PosetBounds::default();
        let n = r.gen_range(0..=2);
        let child = random_poset_over(&mut r, n, b);
        let parent = random_poset_over(&mut r, n + 1, b);
        let forked = Poset::op_fork(&parent, &child).unwrap();
        prop_assert!(forked.is_well_formed(), "{}", forked);
        prop_assert!(child.op_wait().is_well_formed());
        let m = r.gen_range(0..=3);
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..m).map(move |j| (i, j))).filter(|_| r.gen_bool(0.5)).collect();
        let relabelled = child.relabel(&Relation::new(n, m, pairs).unwrap()).unwrap();
        prop_assert!(relabelled.is_well_formed(), "{}", relabelled);
        let p = random_poset(&mut r, b);
        prop_assert!(p.erase_star().is_well_formed());
    }

    #[test]
    fn equality_is_an_equivalence_and_a_congruence(seed: u64) {
        let mut r = rng(seed);
        let d = delta(2);
        let t = random_term(&mut r, &gamma(), &d, &LABELS, 7);
        let nf = reify(&interp(&t, &gamma(), &d).unwrap()).unwrap().to_term(&d);
        let nf2 = reify(&interp(&alpha_normalize(&nf), &gamma(), &d).unwrap()).unwrap().to_term(&d);
        prop_assert!(equal(&t, &t, &gamma(), &d));
        prop_assert!(equal(&t, &nf, &gamma(), &d) && equal(&nf, &t, &gamma(), &d));
        prop_assert!(equal(&nf, &nf2, &gamma(), &d) && equal(&t, &nf2, &gamma(), &d));

        let u = random_term(&mut r, &gamma(), &d, &LABELS, 5);
        let other = random_term(&mut r, &gamma(), &d, &LABELS, 5);
        let sym = equal(&u, &other, &gamma(), &d) == equal(&other, &u, &gamma(), &d);
        prop_assert!(sym);
        // contexts: wait around, fork as child, fork as parent under a fresh binder
        let a1 = || BTreeSet::from(["a1".to_string()]);
        prop_assert!(equal(&Term::wait_set(a1(), t.clone()), &Term::wait_set(a1(), nf.clone()), &gamma(), &d));
        prop_assert!(equal(&Term::fork("c", u.clone(), t.clone()), &Term::fork("c", u.clone(), nf.clone()), &gamma(), &d));
        let d1 = ParamContext::new(["a1", "a2", "c"]).unwrap();
        let tc = random_term(&mut r, &gamma(), &d1, &LABELS, 6);
        let nfc = reify(&interp(&tc, &gamma(), &d1).unwrap()).unwrap().to_term(&d1);
        prop_assert!(equal(&Term::fork("c", tc, u.clone()), &Term::fork("c", nfc, u), &gamma(), &d));
    }

    #[test]
    fn gadgets_are_injective_on_holes(seed: u64) {
        let mut r = rng(seed);
        let d = delta(seed as usize % 3);
        let g = CompContext::new([("x", 1), ("y", 0), ("z", 2)]).unwrap();
        let t = random_term(&mut r, &g, &d, &LABELS, 8);
        let p = interp(&t, &g, &d).unwrap();
        let q = interp(&apply_gadgets(&t, &g).unwrap(), &CompContext::default(), &d).unwrap();
        prop_assert_eq!(hole_keys(&p), gadget_keys(&q), "{}", t);
    }

    #[test]
    fn random_schedules_terminate_with_one_observation(seed: u64) {
        for (name, t) in corpus() {
            let first = run(&t, Policy::LowestTid, 100_000).unwrap();
            let other = run(&t, Policy::Random(seed), 100_000).unwrap();
            prop_assert!(isomorphic(&first.observation, &other.observation), "{}", name);
            prop_assert_eq!(first.terminal.config.world(), other.terminal.config.world(), "{}", name);
        }
    }
}

type Key = (String, BTreeSet<usize>, Vec<String>, Vec<String>);

/// Per hole: its variable, the inputs below it, and the labels of the
/// actions and holes below it.
fn hole_keys(p: &Poset) -> Vec<Key> {
    let mut out: Vec<Key> = (0..p.vertices().len())
        .filter_map(|v| match &p.vertices()[v] {
            Vertex::Hole { var, .. } => Some(key(p, v, var.clone(), |l| Some(l.to_string()))),
            Vertex::Action(_) => None,
        })
        .collect();
    out.sort();
    out
}

/// The same for every gadget head `$x`, reading the heads below it as holes
/// and ignoring markers.
fn gadget_keys(q: &Poset) -> Vec<Key> {
    let head = |l: &str| {
        l.strip_prefix('$')
            .filter(|x| !x.contains('.'))
            .map(str::to_string)
    };
    let mut out: Vec<Key> = (0..q.vertices().len())
        .filter_map(|v| match &q.vertices()[v] {
            Vertex::Action(l) => head(l).map(|x| {
                key(q, v, x, |l| {
                    if l.starts_with('$') {
                        head(l)
                    } else {
                        Some(l.to_string())
                    }
                })
            }),
            Vertex::Hole { .. } => None,
        })
        .collect();
    out.sort();
    out
}

fn key(p: &Poset, v: usize, var: String, name: impl Fn(&str) -> Option<String>) -> Key {
    let mut inputs = BTreeSet::new();
    let (mut acts, mut holes) = (Vec::new(), Vec::new());
    for e in p.predecessors(ElemRef::V(v)) {
        match e {
            ElemRef::In(i) => {
                inputs.insert(i);
            }
            ElemRef::V(w) => match &p.vertices()[w] {
                Vertex::Hole { var, .. } => holes.push(var.clone()),
                Vertex::Action(l) if l.starts_with('$') => holes.extend(name(l)),
                Vertex::Action(l) => acts.extend(name(l)),
            },
            ElemRef::Star => {}
        }
    }
    acts.sort();
    holes.sort();
    (var, inputs, acts, holes)
}

#[test]
fn prec_only_grows_and_stays_transitive() {
    for (name, t) in corpus() {
        let ex = explore(&t, 10_000).unwrap();
        for (i, out) in ex.edges.iter().enumerate() {
            let before = &ex.states[i].config.prec;
            for (_, j) in out {
                let after = &ex.states[*j].config.prec;
                assert!(before.is_subset(after), "{name}: state {i} -> {j}");
                for (a, b) in after {
                    for (b2, c) in after {
                        if b == b2 {
                            assert!(
                                after.contains(&(a.clone(), c.clone())),
                                "{name}: not transitive"
                            );
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn typing_is_stable_under_world_extension() {
    let bigger: BTreeSet<RuntimeTid> = [vec![4], vec![4, 1], vec![9]]
        .into_iter()
        .map(RuntimeTid)
        .collect();
    for (name, t) in corpus() {
        let ty = typecheck_comp(&Env::new(), &BTreeSet::new(), &t, None).unwrap();
        assert_eq!(ty, Type::empty(), "{name}");
        assert_eq!(
            typecheck_comp(&Env::new(), &bigger, &t, None).unwrap(),
            ty,
            "{name}"
        );
    }
}
