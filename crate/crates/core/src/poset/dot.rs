use std::fmt::Write;

use super::{ElemRef, Poset, Vertex};

fn node_id(e: ElemRef) -> String {
    match e {
        ElemRef::In(i) => format!("in{}", i + 1),
        ElemRef::V(v) => format!("v{v}"),
        ElemRef::Star => "star".into(),
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering: covering pairs solid, visibility dotted.
pub fn to_dot(p: &Poset) -> String {
    let mut out = String::from("digraph poset {\n  rankdir=BT;\n");
    for i in 0..p.n_inputs() {
        let _ = writeln!(out, "  in{} [shape=box, label=\"{}\"];", i + 1, i + 1);
    }
    for (v, vertex) in p.vertices().iter().enumerate() {
        let _ = match vertex {
            Vertex::Action(l) => writeln!(out, "  v{v} [shape=circle, label=\"{}\"];", escape(l)),
            Vertex::Hole { var, .. } => {
                writeln!(out, "  v{v} [shape=diamond, label=\"{}\"];", escape(var))
            }
        };
    }
    out.push_str("  star [shape=circle, style=filled, fillcolor=black, label=\"\", width=0.2];\n");
    for (a, b) in p.covering_pairs() {
        let _ = writeln!(out, "  {} -> {};", node_id(a), node_id(b));
    }
    for (v, vertex) in p.vertices().iter().enumerate() {
        if let Vertex::Hole { visibility, .. } = vertex {
            for (slot, set) in visibility.iter().enumerate() {
                for &e in set.iter().filter(|&&e| e != ElemRef::V(v)) {
                    let _ = writeln!(
                        out,
                        "  {} -> v{v} [style=dotted, arrowhead=none, label=\"{}\"];",
                        node_id(e),
                        slot + 1
                    );
                }
            }
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_mentions_every_vertex() {
        let p = Poset::new(
            1,
            vec![Vertex::Action("s".into())],
            [
                (ElemRef::In(0), ElemRef::V(0)),
                (ElemRef::V(0), ElemRef::Star),
            ],
        );
        let d = to_dot(&p);
        assert!(d.contains("in1 [shape=box"));
        assert!(d.contains("v0 [shape=circle, label=\"s\"]"));
        assert!(d.contains("in1 -> v0;"));
        assert!(d.contains("v0 -> star;"));
        assert!(!d.contains("in1 -> star;"));
    }
}
