use std::collections::BTreeSet;

use faultcast::automata::{is_language_equal, is_strict_subautomaton, Alphabet, Dfa};
use faultcast::fault::{non_faulty_language, psi, psi_minus_k};
use faultcast::fixtures::{g1, g1_modified, g2};
use faultcast::lang::{
    complement_within, is_pre_normal, language_difference, Projection,
};
use faultcast::oracle::{enumerate, oracle_k_prognosable, EnumBound};
use faultcast::synth::{
    check_closed_loop, critical_language, prepare_h1, synthesize, Mode, SynthesisProblem,
};
use faultcast::verify::{
    build_verifier, check_diagnosable, check_k_prognosable, check_prognosable, observer,
    shortest_fault_observations, uncertain_states,
};

/// Recognizer of a finite set of words (space separated), with optional self-loops
/// `(word, event)` at the state a word ends in.
fn words(a: &Alphabet, ws: &[&str], loops: &[(&str, &str)]) -> Dfa {
    let mut b = Dfa::builder(a.clone());
    b.state("");
    b.initial("");
    for w in ws {
        let mut prefix = String::new();
        for e in w.split_whitespace() {
            let next = format!("{prefix}/{e}");
            b.edge(&prefix, e, &next).unwrap();
            prefix = next;
        }
        b.mark(&prefix);
    }
    for (w, e) in loops {
        let key: String = w.split_whitespace().map(|e| format!("/{e}")).collect();
        b.edge(&key, e, &key).unwrap();
    }
    b.build().unwrap()
}

fn strings(set: &[&str]) -> BTreeSet<Vec<String>> {
    set.iter()
        .map(|w| w.split_whitespace().map(str::to_string).collect())
        .collect()
}

fn transitions(d: &Dfa) -> BTreeSet<(String, String, String)> {
    d.transitions()
        .map(|(p, e, q)| {
            (
                d.label(p).to_string(),
                d.alphabet().name(e).to_string(),
                d.label(q).to_string(),
            )
        })
        .collect()
}

fn labels(d: &Dfa) -> BTreeSet<String> {
    d.labels().iter().cloned().collect()
}

fn set(xs: &[&str]) -> BTreeSet<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

// G1: fault-ending strings, the Ψ^{-k} sets and the k-prognosability verdicts.

#[test]
fn g1_fault_ending_strings() {
    let g = g1();
    let got = enumerate(psi(&g).recognizer(), &EnumBound::new(6));
    assert_eq!(got, strings(&["a b b f1", "c b b f1"]));
}

#[test]
fn g1_psi_minus_one_is_listed_set() {
    let g = g1();
    let hand = words(
        g.alphabet(),
        &["a b", "c b", "a b b", "c b b", "a b b f1", "c b b f1"],
        &[],
    );
    assert!(is_language_equal(psi_minus_k(&g, 1).recognizer(), &hand).unwrap());
}

#[test]
fn g1_psi_minus_two_complement_is_listed_set() {
    let g = g1();
    let listed = words(g.alphabet(), &["", "tau", "tau a", "tau a a", "tau a a b"], &[("tau a a b", "c")]);
    let ln = non_faulty_language(&g);
    let got = language_difference(&ln, &psi_minus_k(&g, 2)).unwrap();
    assert!(is_language_equal(got.recognizer(), &listed).unwrap());
    // the strings of Ψ^{-2} follow: the prefixes of the fault-ending strings after ε
    let hand = words(
        g.alphabet(),
        &["a", "a b", "a b b", "a b b f1", "c", "c b", "c b b", "c b b f1"],
        &[],
    );
    assert!(is_language_equal(psi_minus_k(&g, 2).recognizer(), &hand).unwrap());
}

#[test]
fn g1_psi_minus_one_complement_is_listed_set() {
    // the printed set leaves out c, which is fault-free and two observations before f1
    let g = g1();
    let listed = words(
        g.alphabet(),
        &["", "tau", "a", "c", "tau a", "tau a a", "tau a a b"],
        &[("tau a a b", "c")],
    );
    let got = language_difference(&non_faulty_language(&g), &psi_minus_k(&g, 1)).unwrap();
    assert!(is_language_equal(got.recognizer(), &listed).unwrap());
}

#[test]
fn g1_is_one_prognosable_not_two() {
    let g = g1();
    assert!(check_k_prognosable(&g, 1).unwrap().verdict);
    let r = check_k_prognosable(&g, 2).unwrap();
    assert!(!r.verdict);
    let w = r.witness.unwrap();
    assert_eq!(w.ps, vec!["a".to_string()]);
    assert_eq!(w.pt, vec!["a".to_string()]);
    assert!(oracle_k_prognosable(&g, 1).unwrap());
    assert!(!oracle_k_prognosable(&g, 2).unwrap());
}

// G1: observer and pre-normality.

#[test]
fn g1_observer_cells() {
    let g = g1();
    let obs = observer(&g);
    let cells: BTreeSet<BTreeSet<String>> = obs.cell_labels(&g).into_iter().collect();
    let want: BTreeSet<BTreeSet<String>> = [
        set(&["0", "5"]),
        set(&["1", "6"]),
        set(&["7"]),
        set(&["8"]),
        set(&["2"]),
        set(&["3", "4"]),
        set(&["9"]),
        set(&["10"]),
    ]
    .into_iter()
    .collect();
    assert_eq!(obs.n_states(), 8);
    assert_eq!(cells, want);
}

#[test]
fn g1_two_step_language_is_not_pre_normal() {
    let g = g1();
    let crit = language_difference(&non_faulty_language(&g), &psi_minus_k(&g, 2)).unwrap();
    let outside = complement_within(&crit);
    let (ok, w) = is_pre_normal(&outside, &Projection::Observable);
    assert!(!ok);
    assert!(w.is_some());
    assert!(!is_pre_normal(&crit, &Projection::Observable).0);
}

// G2: prognosability, diagnosability, observer and verifier.

#[test]
fn g2_not_prognosable_but_diagnosable() {
    let g = g2();
    let r = check_prognosable(&g).unwrap();
    assert!(!r.verdict);
    let w = r.witness.unwrap();
    assert_eq!(w.s, vec!["a".to_string()]);
    assert_eq!(w.t, vec!["lambda".to_string(), "a".to_string()]);
    let d = check_diagnosable(&g).unwrap();
    assert!(d.verdict);
    assert!(d.conclusive);
    assert_eq!(d.params.n_o, Some(4));
    assert_eq!(d.params.minimal_n, Some(3));
    assert_eq!(shortest_fault_observations(&g).unwrap().0, 1);
}

#[test]
fn g2_observer_cells() {
    let g = g2();
    let obs = observer(&g);
    let cells: BTreeSet<BTreeSet<String>> = obs.cell_labels(&g).into_iter().collect();
    let want: BTreeSet<BTreeSet<String>> = [
        set(&["0", "3"]),
        set(&["1", "2", "4"]),
        set(&["0", "3", "4"]),
        set(&["4"]),
    ]
    .into_iter()
    .collect();
    assert_eq!(cells, want);
}

fn pair_labels(g: &Dfa, pairs: &BTreeSet<(usize, usize)>) -> BTreeSet<String> {
    pairs
        .iter()
        .map(|&(q, r)| format!("({},{})", g.label(q), g.label(r)))
        .collect()
}

#[test]
fn g2_verifier_states() {
    let g = g2();
    let v = build_verifier(&g);
    let got: BTreeSet<String> = (0..v.pairs.len()).map(|i| v.pair_label(&g, i)).collect();
    let drawn = set(&[
        "(0,0)", "(1,1)", "(1,2)", "(3,0)", "(0,3)", "(4,1)", "(4,2)", "(4,4)", "(3,3)", "(4,3)",
        "(4,0)",
    ]);
    assert!(drawn.is_subset(&got));
    // (0,3) -(a,a)-> (1,4) is a dead end left out of the drawing
    let extra: BTreeSet<String> = got.difference(&drawn).cloned().collect();
    assert_eq!(extra, set(&["(1,4)"]));
}

#[test]
fn g2_uncertain_states() {
    // N = 2 is the last threshold with uncertain pairs
    let g = g2();
    let v = build_verifier(&g);
    assert_eq!(pair_labels(&g, &uncertain_states(&v, &g, 2)), set(&["(4,0)", "(4,3)"]));
    assert!(uncertain_states(&v, &g, 3).is_empty());
    assert!(uncertain_states(&v, &g, 4).is_empty());
}

// Synthesis on G1, modified G1 and G2.

#[test]
fn g1_critical_languages() {
    let g = g1();
    let m2 = critical_language(&SynthesisProblem::new(g.clone(), Mode::Prognosis(2)));
    let want2 = words(g.alphabet(), &["", "tau", "tau a", "tau a a", "tau a a b"], &[("tau a a b", "c")]);
    assert!(is_language_equal(m2.recognizer(), &want2).unwrap());
    let m1 = critical_language(&SynthesisProblem::new(g.clone(), Mode::Prognosis(1)));
    let want1 = words(
        g.alphabet(),
        &["", "tau", "a", "c", "tau a", "tau a a", "tau a a b"],
        &[("tau a a b", "c")],
    );
    assert!(is_language_equal(m1.recognizer(), &want1).unwrap());
}

#[test]
fn g1_refinement_marks_critical_states() {
    let p = SynthesisProblem::new(g1(), Mode::Prognosis(2));
    let h1 = prepare_h1(&p).unwrap();
    assert_eq!(h1.n_states(), 11);
    let marked: BTreeSet<String> = h1.marked_states().iter().map(|&x| h1.label(x).to_string()).collect();
    let unmarked: BTreeSet<String> = labels(&h1).difference(&marked).cloned().collect();
    assert_eq!(marked, set(&["0", "5", "6", "7", "8"]));
    assert_eq!(unmarked, set(&["1", "2", "3", "4", "9", "10"]));
}

#[test]
fn g1_two_prognosis_supervisor() {
    let p = SynthesisProblem::new(g1(), Mode::Prognosis(2))
        .with_uncontrollable(&["tau", "f1"])
        .unwrap();
    let r = synthesize(&p).unwrap();
    let core: BTreeSet<String> = r.core_states.iter().cloned().collect();
    let all = labels(&r.h1);
    let removed: BTreeSet<String> = all.difference(&core).cloned().collect();
    assert_eq!(removed, set(&["1", "6"]));
    assert_eq!(r.iterations, 2);
    let s = r.supervisor.as_ref().unwrap();
    assert_eq!(labels(s), set(&["0", "2", "3", "4", "5", "9", "10"]));
    let expected = Dfa::plant(
        g1().alphabet().clone(),
        "0",
        &[
            ("0", "tau", "5"),
            ("0", "c", "9"),
            ("9", "b", "2"),
            ("2", "b", "3"),
            ("3", "f1", "4"),
            ("4", "c", "10"),
            ("10", "c", "10"),
        ],
    )
    .unwrap();
    assert!(is_language_equal(s, &expected).unwrap());
    assert!(check_closed_loop(&p, s).unwrap().all());
}

#[test]
fn modified_g1_refinement() {
    let p = SynthesisProblem::new(g1_modified(), Mode::Prognosis(0));
    let h1 = prepare_h1(&p).unwrap();
    assert_eq!(h1.n_states(), 16);
    let want = set(&[
        "0", "1", "2", "3", "4", "5", "6", "7", "8", "9", "10", "2'", "3'", "4'", "8'", "10'",
    ]);
    assert_eq!(labels(&h1), want);
    assert!(is_language_equal(&h1.mark_all(), &g1_modified()).unwrap());
}

#[test]
fn modified_g1_zero_prognosis_supervisor() {
    let p = SynthesisProblem::new(g1_modified(), Mode::Prognosis(0));
    let r = synthesize(&p).unwrap();
    let core: BTreeSet<String> = r.core_states.iter().cloned().collect();
    let removed: BTreeSet<String> = labels(&r.h1).difference(&core).cloned().collect();
    assert_eq!(removed, set(&["3", "4", "8", "10", "8'"]));
    let s = r.supervisor.as_ref().unwrap();
    assert_eq!(
        labels(s),
        set(&["0", "1", "2", "5", "6", "7", "9", "2'", "3'", "4'", "10'"])
    );
    let want: BTreeSet<(String, String, String)> = [
        ("0", "a", "1"),
        ("0", "c", "9"),
        ("0", "tau", "5"),
        ("1", "b", "2"),
        ("9", "b", "2'"),
        ("5", "a", "6"),
        ("2'", "b", "3'"),
        ("6", "b", "7"),
        ("3'", "f1", "4'"),
        ("4'", "c", "10'"),
        ("10'", "c", "10'"),
    ]
    .iter()
    .map(|&(a, b, c)| (a.to_string(), b.to_string(), c.to_string()))
    .collect();
    assert_eq!(transitions(s), want);
    assert!(is_strict_subautomaton(s, &r.h1));
    assert!(check_closed_loop(&p, s).unwrap().all());
}

#[test]
fn g2_zero_prognosis_supervisor() {
    let p = SynthesisProblem::new(g2(), Mode::Prognosis(0));
    let r = synthesize(&p).unwrap();
    let s = r.supervisor.as_ref().unwrap();
    let want: BTreeSet<(String, String, String)> =
        [("0".to_string(), "lambda".to_string(), "3".to_string())].into_iter().collect();
    assert_eq!(transitions(s), want);
    assert!(check_closed_loop(&p, s).unwrap().all());
}

#[test]
fn g2_diagnosis_keeps_the_plant() {
    let p = SynthesisProblem::new(g2(), Mode::Diagnosis);
    let r = synthesize(&p).unwrap();
    // P(Ψ) = a(ba)* is infinite
    assert!(!r.maximality_guaranteed);
    assert!(is_language_equal(r.supervisor.as_ref().unwrap(), &g2()).unwrap());
}
