//! Graphviz export.

use std::collections::BTreeMap;
use std::fmt::Write;

use faultcast::automata::Dfa;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// DOT text for `d`. Marked states get a double circle; states flagged in `highlight` are
/// filled. Unobservable edges are dashed and fault edges red. Output depends only on `d`.
pub fn to_dot(name: &str, d: &Dfa, highlight: &[bool]) -> String {
    let a = d.alphabet();
    let mut out = String::new();
    writeln!(out, "digraph {} {{", quote(name)).unwrap();
    writeln!(out, "  rankdir=LR;").unwrap();
    writeln!(out, "  node [shape=circle];").unwrap();
    writeln!(out, "  __start [shape=point, label=\"\"];").unwrap();
    for q in d.states() {
        let mut attrs = vec![format!("label={}", quote(d.label(q)))];
        if d.is_marked(q) {
            attrs.push("shape=doublecircle".into());
        }
        if highlight.get(q).copied().unwrap_or(false) {
            attrs.push("style=filled".into());
            attrs.push("fillcolor=\"#f4cccc\"".into());
        }
        writeln!(out, "  n{q} [{}];", attrs.join(", ")).unwrap();
    }
    writeln!(out, "  __start -> n{};", d.initial()).unwrap();
    // one edge per (source, target, style), events joined in alphabet order
    let mut edges: BTreeMap<(usize, usize, u8), Vec<&str>> = BTreeMap::new();
    for (q, e, t) in d.transitions() {
        let style = if a.is_fault(e) {
            2
        } else if !a.is_observable(e) {
            1
        } else {
            0
        };
        edges.entry((q, t, style)).or_default().push(a.name(e));
    }
    for ((q, t, style), names) in edges {
        let extra = match style {
            2 => ", style=dashed, color=red",
            1 => ", style=dashed",
            _ => "",
        };
        writeln!(out, "  n{q} -> n{t} [label={}{extra}];", quote(&names.join(", "))).unwrap();
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quotes_are_escaped() {
        assert_eq!(quote("a\"b"), "\"a\\\"b\"");
    }

    #[test]
    fn parallel_edges_merge() {
        let g = faultcast::fixtures::g1();
        let d = to_dot("g1", &g, &[]);
        assert!(d.contains("label=\"f1\", style=dashed, color=red"));
        assert_eq!(d, to_dot("g1", &g, &[]));
    }
}
