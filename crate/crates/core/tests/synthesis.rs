//! Supremality against exhaustive search and an enumeration-based soundness check.

use std::collections::BTreeSet;
use std::sync::Arc;

use faultcast::automata::{is_language_equal, Dfa, EventId};
use faultcast::fixtures::{g1, g1_modified, g2};
use faultcast::lang::LangRef;
use faultcast::oracle::{oracle_supremal, random_plant, PlantParams};
use faultcast::synth::{check_closed_loop, mode_property, prepare_h1, synthesize, Mode, SynthesisProblem};
use faultcast::Error;

const MODES: [Mode; 3] = [Mode::Prognosis(0), Mode::Prognosis(1), Mode::Diagnosis];

fn small() -> PlantParams {
    PlantParams {
        max_states: 4,
        max_events: 4,
        max_faults: 1,
        density: 0.35,
    }
}

/// Generated strings of `d` up to length `n`.
fn strings(d: &Dfa, n: usize) -> BTreeSet<Vec<EventId>> {
    let mut out = BTreeSet::new();
    let mut stack = vec![(d.initial(), Vec::new())];
    while let Some((q, w)) = stack.pop() {
        if w.len() < n {
            for (e, t) in d.successors(q) {
                let mut w2 = w.clone();
                w2.push(e);
                stack.push((t, w2));
            }
        }
        out.insert(w);
    }
    out
}

/// Controllability and normality of `L(s)` in `L(g)` over strings up to length `n`.
fn bounded_cn(g: &Dfa, s: &Dfa, uc: &[EventId], n: usize) -> (bool, bool) {
    let a = g.alphabet();
    let k = strings(s, n);
    let l = strings(g, n);
    let controllable = k.iter().filter(|w| w.len() < n).all(|w| {
        uc.iter().all(|&e| {
            let mut w2 = w.clone();
            w2.push(e);
            !l.contains(&w2) || k.contains(&w2)
        })
    });
    let seen: BTreeSet<Vec<EventId>> = k.iter().map(|w| a.project_word(w)).collect();
    // strings of length n may have same-observation partners longer than n; skip the boundary
    let normal = l
        .iter()
        .filter(|w| w.len() < n && seen.contains(&a.project_word(w)))
        .all(|w| k.contains(w));
    (controllable, normal)
}

fn assert_sound(problem: &SynthesisProblem, s: &Dfa, what: &str) {
    let check = check_closed_loop(problem, s).unwrap();
    assert!(check.controllable.0, "{what}: not controllable");
    assert!(check.normal.0, "{what}: not normal");
    assert!(check.mode_property.0, "{what}: mode property fails");
    let (c, n) = bounded_cn(&problem.plant, s, &problem.uncontrollable, 8);
    assert!(c && n, "{what}: enumeration disagrees (controllable {c}, normal {n})");
}

#[test]
fn synthesis_is_supremal_on_small_plants() {
    let mut checked = [0usize; 3];
    let mut seed = 0u64;
    while checked.iter().any(|&c| c < 100) {
        let g = random_plant(seed, &small());
        seed += 1;
        for (i, &mode) in MODES.iter().enumerate() {
            if checked[i] >= 100 {
                continue;
            }
            let problem = SynthesisProblem::new(g.clone(), mode);
            let truth = match oracle_supremal(&problem, 10) {
                Ok(t) => t,
                Err(Error::BudgetExceeded { .. }) => continue,
                Err(e) => panic!("seed {}: {e}", seed - 1),
            };
            checked[i] += 1;
            let r = synthesize(&problem).unwrap();
            match (&r.supervisor, &truth) {
                (None, None) => {}
                (Some(s), Some(t)) => {
                    let plant = Arc::new(g.clone());
                    let ours = LangRef::within(&plant, s).unwrap();
                    assert!(
                        is_language_equal(ours.recognizer(), t.recognizer()).unwrap(),
                        "seed {} {mode}: not supremal",
                        seed - 1
                    );
                }
                (a, b) => panic!(
                    "seed {} {mode}: synthesis {} vs search {}",
                    seed - 1,
                    a.is_some(),
                    b.is_some()
                ),
            }
        }
    }
}

#[test]
fn synthesis_output_is_sound_on_the_corpus() {
    let mut corpus = vec![g1(), g1_modified(), g2()];
    corpus.extend((0..150).map(|s| random_plant(s, &PlantParams::default())));
    let mut solved = 0;
    for (i, g) in corpus.iter().enumerate() {
        for mode in MODES.into_iter().chain([Mode::Prognosis(2)]) {
            let problem = SynthesisProblem::new(g.clone(), mode);
            let r = synthesize(&problem).unwrap();
            if let Some(s) = &r.supervisor {
                solved += 1;
                assert_sound(&problem, s, &format!("plant {i} {mode}"));
            }
        }
    }
    assert!(solved > 100, "only {solved} non-empty outputs");
}

#[test]
fn g1_with_tau_uncontrollable_is_sound() {
    let problem = SynthesisProblem::new(g1(), Mode::Prognosis(2))
        .with_uncontrollable(&["tau", "f1"])
        .unwrap();
    let s = synthesize(&problem).unwrap().supervisor.unwrap();
    assert_sound(&problem, &s, "g1");
}

#[test]
fn the_plant_itself_passes_when_already_prognosable() {
    // G1 is 1-prognosable, so nothing needs to be removed.
    let problem = SynthesisProblem::new(g1(), Mode::Prognosis(1));
    let r = synthesize(&problem).unwrap();
    let s = r.supervisor.unwrap();
    assert!(is_language_equal(&s, &g1().mark_all()).unwrap());
    assert!(mode_property(&g1(), Mode::Prognosis(1), &g1()).unwrap().0);
}

#[test]
fn refined_plant_is_language_equal_to_the_plant() {
    for seed in 0..50 {
        let g = random_plant(seed, &PlantParams::default());
        for mode in MODES {
            let h1 = prepare_h1(&SynthesisProblem::new(g.clone(), mode)).unwrap();
            assert!(is_language_equal(&h1.mark_all(), &g.mark_all()).unwrap(), "seed {seed}");
        }
    }
}

#[test]
fn no_solution_when_nothing_can_be_disabled() {
    // G1 is not 2-prognosable and every event is uncontrollable
    let problem = SynthesisProblem::new(g1(), Mode::Prognosis(2))
        .with_uncontrollable(&["a", "b", "c", "tau", "f1"])
        .unwrap();
    let r = synthesize(&problem).unwrap();
    assert!(!r.is_solution());
    assert!(oracle_supremal(&problem, 20).unwrap().is_none());
}
