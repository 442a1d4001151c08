use std::collections::BTreeSet;

use super::*;
use crate::lang::prepare;
use crate::poset::{ElemRef, Vertex};
use crate::syntax::{parse_program, parse_term, parse_type};
use crate::term::alpha_eq;

fn typed(src: &str, world: &BTreeSet<RuntimeTid>) -> (Comp, Type) {
    prepare(&parse_program(src).unwrap(), world).unwrap()
}

fn closed(src: &str) -> Comp {
    typed(src, &BTreeSet::new()).0
}

fn acts(labels: &[&str]) -> Vec<Vertex> {
    labels
        .iter()
        .map(|l| Vertex::Action(l.to_string()))
        .collect()
}

const V: fn(usize) -> ElemRef = ElemRef::V;

#[test]
fn canonical_types() {
    let fo = |s: &str| CanonicalFoType::of(&parse_type(s).unwrap()).map(|c| c.summands);
    assert_eq!(fo("tid").unwrap(), [1]);
    assert_eq!(fo("1").unwrap(), [0]);
    assert_eq!(fo("0").unwrap(), Vec::<usize>::new());
    assert_eq!(fo("tid + 1").unwrap(), [1, 0]);
    assert_eq!(fo("(tid + 1) * (tid + tid * tid)").unwrap(), [2, 3, 1, 2]);
    assert!(matches!(
        fo("1 -> 1"),
        Err(DenoteError::NotFirstOrderResult(_))
    ));
}

#[test]
fn decode_inverts_flatten() {
    let ty = parse_type("(tid + 1) * (tid + tid * tid)").unwrap();
    let fo = CanonicalFoType::of(&ty).unwrap();
    for (i, &m) in fo.summands.iter().enumerate() {
        let params: Vec<String> = (0..m).map(|j| format!("p{j}")).collect();
        let v = decode(&ty, i, &params).unwrap();
        let (j, tids) = flatten(&v, &ty).unwrap();
        assert_eq!(j, i);
        let expect: Vec<ParamSet> = params.iter().map(|p| BTreeSet::from([p.clone()])).collect();
        assert_eq!(tids, expect);
    }
}

#[test]
fn print_at_unit_type() {
    let (t, ty) = typed("print[s]()", &BTreeSet::new());
    assert_eq!(ty, Type::unit());
    let d = denote(&t, &ty, &BTreeSet::new()).unwrap();
    assert_eq!(d.gamma.to_string(), "x:0");
    assert!(d.delta.is_empty());
    let expect = parse_term("fork(a. wait(a, x), act[s])").unwrap();
    assert!(alpha_eq(&d.term, &expect), "{}", d.term);
}

#[test]
fn parallel_is_a_cherry() {
    let t = closed("parallel(\\u. printstop[s1](), \\u. printstop[s2]())");
    let d = denote(&t, &Type::empty(), &BTreeSet::new()).unwrap();
    assert!(d.gamma.is_empty());
    let cherry = Poset::new(
        0,
        acts(&["s1", "s2"]),
        [(V(0), ElemRef::Star), (V(1), ElemRef::Star)],
    );
    assert!(isomorphic(&d.poset, &cherry), "{}", d.poset);
}

#[test]
fn stop_is_empty() {
    let d = denote(&closed("stop()"), &Type::empty(), &BTreeSet::new()).unwrap();
    assert_eq!(d.term, Term::Stop);
    assert!(isomorphic(&d.poset, &Poset::stop(0)));
}

#[test]
fn adequacy_on_examples() {
    let chain = |a: &str, b: &str| Poset::new(0, acts(&[a, b]), [(V(0), V(1))]);
    let cases = [
        (
            "let y = fork() in case y of { inj1 x1 => wait(x1); print[s1](); stop() \
             | inj2 u => print[s2](); stop() }",
            chain("s2", "s1"),
        ),
        (
            "series(\\u. printstop[s1](), \\u. printstop[s2]())",
            chain("s1", "s2"),
        ),
        (
            "let a1 = node[s1](nil) in let a2 = node[s2](nil) in \
             let a3 = node[s3](a1 (+) a2) in let a4 = node[s4](a2) in stop()",
            Poset::new(
                0,
                acts(&["s1", "s2", "s3", "s4"]),
                [(V(0), V(2)), (V(1), V(2)), (V(1), V(3))],
            ),
        ),
    ];
    for (src, expect) in cases {
        let t = closed(src);
        for policy in [Policy::LowestTid, Policy::Random(7)] {
            let r = adequacy_check(&t, policy, 10_000).unwrap();
            assert!(
                r.agree,
                "{src}\nobserved {}\ndenoted {}",
                r.observed, r.denoted
            );
            assert!(isomorphic(&r.observed, &expect), "{src}: {}", r.observed);
        }
    }
}

#[test]
fn world_tids_become_parameters() {
    let a = RuntimeTid(vec![0]);
    let world = BTreeSet::from([a.clone()]);
    let (t, ty) = typed("wait(#[0]); print[s](); ret #[0]", &world);
    let d = denote(&t, &ty, &world).unwrap();
    assert_eq!(d.delta.names(), ["w1"]);
    let expect = parse_term("wait(w1, fork(a. wait(a, x(w1)), act[s]))").unwrap();
    assert!(alpha_eq(&d.term, &expect), "{}", d.term);

    let err = denote(&t, &ty, &BTreeSet::new()).unwrap_err();
    assert!(matches!(err, DenoteError::UnboundTid(b) if b == a));
}

#[test]
fn higher_order_subterms_and_result_check() {
    let t =
        closed("let f = ret \\u: 1. {print[s](); stop()} in let g = ret \\h: 1 -> 0. h () in g f");
    let d = denote(&t, &Type::empty(), &BTreeSet::new()).unwrap();
    let expect = parse_term("fork(a. wait(a, stop), act[s])").unwrap();
    assert!(alpha_eq(&d.term, &expect), "{}", d.term);

    let (f, ty) = typed("ret \\u: 1. stop()", &BTreeSet::new());
    assert!(matches!(
        denote(&f, &ty, &BTreeSet::new()),
        Err(DenoteError::NotFirstOrderResult(_))
    ));
}

#[test]
fn wait_then_fork_law() {
    let world = BTreeSet::from([RuntimeTid(vec![0])]);
    let (l, lty) = typed("wait(#[0]); fork()", &world);
    let (r, rty) = typed("let x = fork() in wait(#[0]); ret x", &world);
    assert_eq!(lty, rty);
    let dl = denote(&l, &lty, &world).unwrap();
    let dr = denote(&r, &rty, &world).unwrap();
    assert_eq!(dl.gamma, dr.gamma);
    assert!(decide_equal(&dl.term, &dr.term, &dl.gamma, &dl.delta)
        .unwrap()
        .is_equal());
    // fork then wait in the child as well is different
    let (o, oty) = typed(
        "let x = fork() in case x of { inj1 a => wait(#[0]); ret x | inj2 u => ret x }",
        &world,
    );
    let d_o = denote(&o, &oty, &world).unwrap();
    assert!(!decide_equal(&dl.term, &d_o.term, &dl.gamma, &dl.delta)
        .unwrap()
        .is_equal());
}

#[test]
fn let_is_substitution() {
    let world = BTreeSet::from([RuntimeTid(vec![0])]);
    let cases = [
        (
            "fork()",
            "case x of { inj1 a => wait(a); print[s](); stop() | inj2 u => printstop[r]() }",
        ),
        ("print[s](); ret #[0]", "wait(x); printstop[r]()"),
        (
            "ret (nil, (inj2 () : tid + 1))",
            "let p = proj2 x in case p of { inj1 a => stop() | inj2 u => print[q](); stop() }",
        ),
        ("fork()", "ret x"),
        ("print[s](); print[r]()", "print[q]()"),
    ];
    for (t_src, u_src) in cases {
        let (t, t_ty) = typed(t_src, &world);
        let env = vec![("x".to_string(), t_ty.clone())];
        let (u_el, u_ty) =
            crate::lang::elaborate(&env, &world, &parse_program(u_src).unwrap(), None).unwrap();
        let u = crate::lang::desugar(&u_el);
        let eq = compositionality_check("x", &t, &t_ty, &u, &u_ty, &world).unwrap();
        assert!(eq.is_equal(), "{t_src} / {u_src}: {eq:?}");
    }
}

#[test]
fn gadget_shapes() {
    let g = gadget_subst(&CompContext::new([("x", 0), ("y", 1), ("z", 2)]).unwrap());
    assert_eq!(g["x"].1, Term::act("$x"));
    assert_eq!(g["y"].0, ["b1"]);
    assert_eq!(
        g["y"].1.to_string(),
        "fork(c. fork(d1. wait(c, stop), wait(b1 + c, act[$y.1])), act[$y])"
    );
    assert_eq!(
        g["z"].1.to_string(),
        "fork(c. fork(d1. fork(d2. wait(c, stop), wait(b2 + c, act[$z.2])), \
         wait(b1 + c, act[$z.1])), act[$z])"
    );
}

#[test]
fn gadget_records_visibility() {
    let gamma = CompContext::new([("x", 1)]).unwrap();
    let delta = ParamContext::new(["a1"]).unwrap();
    let t = apply_gadgets(&parse_term("x(a1)").unwrap(), &gamma).unwrap();
    let p = interp(&t, &CompContext::default(), &delta).unwrap();
    let expect = Poset::new(
        1,
        acts(&["$x", "$x.1"]),
        [(V(0), ElemRef::Star), (V(0), V(1)), (ElemRef::In(0), V(1))],
    );
    assert!(isomorphic(&p, &expect), "{p}");
}

#[test]
fn closing_contexts() {
    let none = ParamContext::default();
    let c = closing_context(&Term::Stop, &none).unwrap();
    assert_eq!(c.to_string(), "fork(a. wait(a, act[$1]), stop)");
    let p = interp(&c, &CompContext::default(), &none).unwrap();
    assert!(isomorphic(
        &p,
        &Poset::new(0, acts(&["$1"]), [(V(0), ElemRef::Star)])
    ));

    let delta = ParamContext::new(["a1"]).unwrap();
    let c = closing_context(&parse_term("wait(a1, act[s])").unwrap(), &delta).unwrap();
    let p = interp(&c, &CompContext::default(), &ParamContext::default()).unwrap();
    let expect = Poset::new(
        0,
        acts(&["$1", "s", "$2"]),
        [
            (V(0), V(1)),
            (V(1), V(2)),
            (V(0), V(2)),
            (V(2), ElemRef::Star),
        ],
    );
    assert!(isomorphic(&p, &expect), "{p}");

    let err = closing_context(&Term::act("$1"), &none).unwrap_err();
    assert!(matches!(err, DenoteError::AlphabetCollision(l) if l == "$1"));
}

#[test]
fn probes() {
    let none = (CompContext::default(), ParamContext::default());
    let t2 = parse_term("fork(a. act[s2], act[s1])").unwrap();
    let t3 = parse_term("fork(a. act[s1], act[s2])").unwrap();
    let o = completeness_probe(&t2, &t3, &none.0, &none.1).unwrap();
    assert_eq!(
        o,
        ProbeOutcome {
            open_equal: false,
            closed_equal: false
        }
    );

    let l = parse_term("fork(a. wait(a, act[s1]), fork(b. stop, act[s2]))").unwrap();
    let r = parse_term("fork(b. act[s1], act[s2])").unwrap();
    let o = completeness_probe(&l, &r, &none.0, &none.1).unwrap();
    assert_eq!(
        o,
        ProbeOutcome {
            open_equal: true,
            closed_equal: true
        }
    );

    // waiting before a hole is visible to the hole's continuation
    let gamma = CompContext::new([("x", 1)]).unwrap();
    let delta = ParamContext::new(["a"]).unwrap();
    let w = parse_term("wait(a, x(a))").unwrap();
    let h = parse_term("x(a)").unwrap();
    let o = completeness_probe(&w, &h, &gamma, &delta).unwrap();
    assert!(!o.open_equal && o.consistent());
}
