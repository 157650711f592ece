//! Reference plants used by tests and examples.

use crate::automata::{Alphabet, Dfa, Event};

fn g1_alphabet() -> Alphabet {
    Alphabet::new(vec![
        Event::observable("a"),
        Event::observable("b"),
        Event::observable("c"),
        Event::unobservable("tau"),
        Event::fault("f1"),
    ])
    .expect("valid alphabet")
}

const G1_COMMON: [(&str, &str, &str); 10] = [
    ("0", "a", "1"),
    ("0", "c", "9"),
    ("0", "tau", "5"),
    ("1", "b", "2"),
    ("9", "b", "2"),
    ("2", "b", "3"),
    ("3", "f1", "4"),
    ("4", "c", "10"),
    ("10", "c", "10"),
    ("5", "a", "6"),
];

/// Eleven-state plant with one fault `f1` and unobservable `tau`.
pub fn g1() -> Dfa {
    let mut edges = G1_COMMON.to_vec();
    edges.extend([("6", "a", "7"), ("7", "b", "8"), ("8", "c", "8")]);
    Dfa::plant(g1_alphabet(), "0", &edges).expect("valid plant")
}

/// [`g1`] with the edge `6 -a-> 7` relabelled `b`.
pub fn g1_modified() -> Dfa {
    let mut edges = G1_COMMON.to_vec();
    edges.extend([("6", "b", "7"), ("7", "b", "8"), ("8", "c", "8")]);
    Dfa::plant(g1_alphabet(), "0", &edges).expect("valid plant")
}

/// Five-state plant with fault `f2` and unobservable `lambda`.
pub fn g2() -> Dfa {
    let alphabet = Alphabet::new(vec![
        Event::observable("a"),
        Event::observable("b"),
        Event::unobservable("lambda"),
        Event::fault("f2"),
    ])
    .expect("valid alphabet");
    Dfa::plant(
        alphabet,
        "0",
        &[
            ("0", "a", "1"),
            ("0", "lambda", "3"),
            ("1", "f2", "2"),
            ("2", "b", "0"),
            ("3", "a", "4"),
            ("4", "b", "4"),
        ],
    )
    .expect("valid plant")
}

/// Builds a prefix-closed plant from `(name, observable, controllable, fault)` events.
pub fn plant(events: &[(&str, bool, bool, bool)], edges: &[(&str, &str, &str)]) -> Dfa {
    let alphabet = Alphabet::new(
        events
            .iter()
            .map(|&(n, o, c, f)| Event::new(n, o, c, f))
            .collect(),
    )
    .expect("valid alphabet");
    let initial = edges.first().map_or("0", |e| e.0);
    Dfa::plant(alphabet, initial, edges).expect("valid plant")
}
