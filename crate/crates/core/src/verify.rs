//! Observer and verifier constructions and the verdict procedures.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::automata::{
    accessible, is_convergent, is_finite, is_live, subset_construction, Dfa, EventId, StateId,
};
use crate::error::{Error, Result};
use crate::fault::{fault_refine, l_f_geq, non_faulty_language, psi, psi_minus_k, FaultPhase};
use crate::lang::{
    indistinguishable_pair, is_pre_normal, language_difference, prefix_closure, project,
    right_quotient, sigma_o_bounded, CountMode, LangRef, Projection, Witness,
};

/// Observer: the subset construction over the observable events.
#[derive(Clone, Debug)]
pub struct ObserverAutomaton {
    /// Over the observable sub-alphabet; labels are cells such as `{0,5}`.
    pub dfa: Dfa,
    /// Plant states of each observer state, sorted.
    pub cells: Vec<Vec<StateId>>,
}

impl ObserverAutomaton {
    pub fn n_states(&self) -> usize {
        self.cells.len()
    }

    /// Cells rendered with the plant's state labels.
    pub fn cell_labels(&self, g: &Dfa) -> Vec<BTreeSet<String>> {
        self.cells
            .iter()
            .map(|c| c.iter().map(|&q| g.label(q).to_string()).collect())
            .collect()
    }
}

pub fn observer(g: &Dfa) -> ObserverAutomaton {
    let (dfa, cells) = subset_construction(g, &g.alphabet().observable_mask(), &[g.initial()]);
    ObserverAutomaton { dfa, cells }
}

/// Label of a verifier transition: an event or ε on each side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairEvent(pub Option<EventId>, pub Option<EventId>);

/// The verifier `G|||G`: the left track never takes a fault, observable events are shared.
#[derive(Clone, Debug)]
pub struct VerifierAutomaton {
    pub pairs: Vec<(StateId, StateId)>,
    pub transitions: Vec<(usize, PairEvent, usize)>,
    pub initial: usize,
}

impl VerifierAutomaton {
    pub fn index_of(&self, pair: (StateId, StateId)) -> Option<usize> {
        self.pairs.iter().position(|&p| p == pair)
    }

    pub fn pair_label(&self, g: &Dfa, i: usize) -> String {
        let (q, r) = self.pairs[i];
        format!("({},{})", g.label(q), g.label(r))
    }

    pub fn event_label(&self, g: &Dfa, e: PairEvent) -> String {
        let name = |x: Option<EventId>| x.map_or("ε".to_string(), |e| g.alphabet().name(e).to_string());
        format!("{},{}", name(e.0), name(e.1))
    }
}

/// Successor moves of a verifier pair, in event order.
fn verifier_moves(
    g: &Dfa,
    q: StateId,
    r: StateId,
) -> impl Iterator<Item = (PairEvent, StateId, StateId)> + '_ {
    let sigma = g.alphabet();
    sigma.ids().flat_map(move |e| {
        let mut out = Vec::new();
        if sigma.is_observable(e) {
            if let (Some(a), Some(b)) = (g.next(q, e), g.next(r, e)) {
                out.push((PairEvent(Some(e), Some(e)), a, b));
            }
        } else {
            if !sigma.is_fault(e) {
                if let Some(a) = g.next(q, e) {
                    out.push((PairEvent(Some(e), None), a, r));
                }
            }
            if let Some(b) = g.next(r, e) {
                out.push((PairEvent(None, Some(e)), q, b));
            }
        }
        out
    })
}

pub fn build_verifier(g: &Dfa) -> VerifierAutomaton {
    let start = (g.initial(), g.initial());
    let mut index: HashMap<(StateId, StateId), usize> = HashMap::from([(start, 0)]);
    let mut pairs = vec![start];
    let mut transitions = Vec::new();
    let mut head = 0;
    while head < pairs.len() {
        let (q, r) = pairs[head];
        for (ev, a, b) in verifier_moves(g, q, r) {
            let next_id = pairs.len();
            let id = *index.entry((a, b)).or_insert_with(|| {
                pairs.push((a, b));
                next_id
            });
            transitions.push((head, ev, id));
        }
        head += 1;
    }
    VerifierAutomaton {
        pairs,
        transitions,
        initial: 0,
    }
}

/// `V_c^N`: verifier pairs reached by a non-faulty left string and a faulty right string
/// with at least `n` observations.
pub fn uncertain_states(
    v: &VerifierAutomaton,
    g: &Dfa,
    n: usize,
) -> BTreeSet<(StateId, StateId)> {
    let fr = fault_refine(g);
    let z = &fr.refined;
    let sigma = g.alphabet();
    let start = (g.initial(), z.initial(), 0usize);
    let mut seen = std::collections::HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    let mut out = BTreeSet::new();
    while let Some((q, r, c)) = queue.pop_front() {
        if fr.phase[r].is_faulty() && c >= n {
            out.insert((q, fr.origin[r]));
        }
        for e in sigma.ids() {
            let mut next = Vec::new();
            if sigma.is_observable(e) {
                if let (Some(a), Some(b)) = (g.next(q, e), z.next(r, e)) {
                    next.push((a, b, (c + 1).min(n)));
                }
            } else {
                if !sigma.is_fault(e) {
                    if let Some(a) = g.next(q, e) {
                        next.push((a, r, c));
                    }
                }
                if let Some(b) = z.next(r, e) {
                    next.push((q, b, c));
                }
            }
            for s in next {
                if seen.insert(s) {
                    queue.push_back(s);
                }
            }
        }
    }
    debug_assert!(out.iter().all(|p| v.index_of(*p).is_some()));
    out
}

/// Which property a report is about.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Property {
    KPrognosability,
    Diagnosability,
    PrognosisEqualsDiagnosis,
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Property::KPrognosability => "k-prognosability",
            Property::Diagnosability => "diagnosability",
            Property::PrognosisEqualsDiagnosis => "prognosability-equals-diagnosability",
        })
    }
}

/// Numeric parameters of a verdict.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Params {
    pub k: Option<usize>,
    pub n: Option<usize>,
    pub n_o: Option<usize>,
    pub n_s: Option<usize>,
    pub minimal_n: Option<usize>,
}

/// Outcome of a verification procedure.
#[derive(Clone, Debug)]
pub struct VerdictReport {
    pub property: Property,
    pub verdict: bool,
    /// False when a negative verdict only reflects a sufficient condition that failed.
    pub conclusive: bool,
    pub params: Params,
    pub witness: Option<Witness>,
    pub notes: Vec<String>,
}

/// Fails with `AssumptionViolated` unless the accessible part is live and convergent.
pub fn require_live_convergent(g: &Dfa) -> Result<()> {
    let a = accessible(g);
    if !is_live(&a) {
        return Err(Error::AssumptionViolated("the automaton is not live".into()));
    }
    if !is_convergent(&a) {
        return Err(Error::AssumptionViolated("the automaton has an unobservable cycle".into()));
    }
    Ok(())
}

/// States of `z` from which an infinite path stays inside `inside`.
pub(crate) fn infinite_within(z: &Dfa, inside: &[bool]) -> Vec<bool> {
    let mut alive = inside.to_vec();
    let mut out_deg: Vec<usize> = z
        .states()
        .map(|q| z.successors(q).filter(|&(_, t)| inside[t]).count())
        .collect();
    let preds = z.predecessors();
    let mut stack: Vec<StateId> = z.states().filter(|&q| alive[q] && out_deg[q] == 0).collect();
    while let Some(q) = stack.pop() {
        if !alive[q] {
            continue;
        }
        alive[q] = false;
        for &(p, _) in &preds[q] {
            if alive[p] {
                out_deg[p] -= 1;
                if out_deg[p] == 0 {
                    stack.push(p);
                }
            }
        }
    }
    alive
}

/// Shortest observation count (0-1 BFS) from the initial state to a goal state, with a word.
pub(crate) fn fewest_observations(
    z: &Dfa,
    goal: impl Fn(StateId) -> bool,
) -> Option<(usize, Vec<EventId>)> {
    let n = z.n_states();
    let mut dist = vec![usize::MAX; n];
    let mut parent: Vec<Option<(StateId, EventId)>> = vec![None; n];
    let mut deque = VecDeque::from([z.initial()]);
    dist[z.initial()] = 0;
    let mut done = vec![false; n];
    while let Some(q) = deque.pop_front() {
        if done[q] {
            continue;
        }
        done[q] = true;
        if goal(q) {
            let mut word = Vec::new();
            let mut cur = q;
            while let Some((p, e)) = parent[cur] {
                word.push(e);
                cur = p;
            }
            word.reverse();
            return Some((dist[q], word));
        }
        for (e, t) in z.successors(q) {
            let w = usize::from(z.alphabet().is_observable(e));
            if dist[q] + w < dist[t] {
                dist[t] = dist[q] + w;
                parent[t] = Some((q, e));
                if w == 0 {
                    deque.push_front(t);
                } else {
                    deque.push_back(t);
                }
            }
        }
    }
    None
}

/// `N_s`: the fewest observations in a fault-ending string, with such a string.
pub fn shortest_fault_observations(g: &Dfa) -> Option<(usize, Vec<EventId>)> {
    let fr = fault_refine(g);
    fewest_observations(&fr.refined, |z| fr.phase[z] == FaultPhase::JustFaulted)
}

/// k-prognosability decided on the fault-refined plant.
///
/// The plant fails exactly when some fault-ending string has fewer than `k` observations, or
/// when a string exactly `k` observations before a fault looks like a non-faulty string that
/// can be extended forever without a fault.
pub fn check_k_prognosable(g: &Dfa, k: usize) -> Result<VerdictReport> {
    require_live_convergent(g)?;
    Ok(check_k_prognosable_unchecked(g, k))
}

/// [`check_k_prognosable`] without the live/convergent precondition.
pub fn check_k_prognosable_unchecked(g: &Dfa, k: usize) -> VerdictReport {
    let fr = fault_refine(g);
    let z = &fr.refined;
    let sigma = g.alphabet();
    let psi_marks: Vec<bool> = fr.phase.iter().map(|&p| p == FaultPhase::JustFaulted).collect();
    let psi_rec = z.with_marking(psi_marks);
    let before = right_quotient(&psi_rec, &sigma_o_bounded(sigma, k, CountMode::Exactly))
        .expect("same alphabet");
    let nofault: Vec<bool> = fr.phase.iter().map(|&p| p == FaultPhase::NoFault).collect();
    let endless = infinite_within(z, &nofault);
    let keep = sigma.observable_mask();
    let n_s = fewest_observations(z, |q| fr.phase[q] == FaultPhase::JustFaulted);
    let mut report = VerdictReport {
        property: Property::KPrognosability,
        verdict: true,
        conclusive: true,
        params: Params {
            k: Some(k),
            n_s: n_s.as_ref().map(|x| x.0),
            ..Params::default()
        },
        witness: None,
        notes: Vec::new(),
    };
    if let Some((s, t)) = indistinguishable_pair(z, &keep, |x| before.is_marked(x), |y| endless[y]) {
        report.verdict = false;
        report.witness = Some(Witness::new(
            sigma,
            &s,
            &t,
            format!("s is {k} observations before a fault; t has no fault and a fault-free future"),
        ));
    } else if let Some((n, s)) = n_s.filter(|&(n, _)| n < k) {
        report.verdict = false;
        report.witness = Some(Witness::new(
            sigma,
            &s,
            &s,
            format!("fault-ending string with only {n} observations, fewer than {k}"),
        ));
    }
    let (incl, _) = prop1_inclusion(g, k);
    if incl != report.verdict {
        report.notes.push(format!(
            "the inclusion test on L_n \\ Psi^-{k} gives {incl}, differing from the definition-level verdict"
        ));
    }
    report
}

/// The inclusion `P^{-1}P(closure(L_n∖Ψ_f^{-k})) ∩ L ⊆ L_n∖Ψ_f^{-k}`, i.e. `L_n∖Ψ_f^{-k}` is
/// prefix-closed and pre-normal.
///
/// This is a necessary condition for k-prognosability. It accepts plants where every fault-free
/// continuation keeps looking like the run-up to a fault, and plants with fault-ending strings of
/// fewer than `k` observations, both of which the definition rejects.
pub fn prop1_inclusion(g: &Dfa, k: usize) -> (bool, Option<Witness>) {
    let crit = critical_prognosis_language(g, k);
    let closure = prefix_closure(&crit);
    let c = closure.recognizer();
    let s_rec = crit.recognizer();
    debug_assert_eq!(c.n_states(), s_rec.n_states());
    let keep = g.alphabet().observable_mask();
    match indistinguishable_pair(c, &keep, |x| c.is_marked(x), |y| !s_rec.is_marked(y)) {
        None => (true, None),
        Some((s, t)) => (
            false,
            Some(Witness::new(
                g.alphabet(),
                &s,
                &t,
                "s in the closure of L_n \\ Psi^-k, t outside L_n \\ Psi^-k, same observation",
            )),
        ),
    }
}

/// `L_n ∖ Ψ_f^{-k}` as a sublanguage of the plant.
pub fn critical_prognosis_language(g: &Dfa, k: usize) -> LangRef {
    let ln = non_faulty_language(g);
    let ln = LangRef::within(ln.plant().expect("plant"), ln.recognizer()).expect("same alphabet");
    let pk = psi_minus_k(g, k);
    let pk = LangRef::within(ln.plant().expect("plant"), pk.recognizer()).expect("same alphabet");
    language_difference(&ln, &pk).expect("same plant")
}

/// Prognosability, i.e. 0-prognosability.
pub fn check_prognosable(g: &Dfa) -> Result<VerdictReport> {
    check_k_prognosable(g, 0)
}

/// `P(Ψ(Σ_f))` is a finite language.
pub fn check_psi_projection_finite(g: &Dfa) -> bool {
    is_finite(&project(psi(g).recognizer(), &Projection::Observable))
}

/// Diagnosability through pre-normality of `L_f^{≥N_o}`, with the minimal threshold.
pub fn check_diagnosable(g: &Dfa) -> Result<VerdictReport> {
    require_live_convergent(g)?;
    Ok(check_diagnosable_unchecked(g))
}

/// [`check_diagnosable`] without the live/convergent precondition.
pub fn check_diagnosable_unchecked(g: &Dfa) -> VerdictReport {
    let n_o = observer(g).n_states();
    let mut minimal = None;
    let mut witness = None;
    for n in 0..=n_o {
        let (ok, w) = is_pre_normal(&l_f_geq(g, n), &Projection::Observable);
        if ok {
            minimal = Some(n);
            break;
        }
        witness = w;
    }
    let verdict = minimal.is_some();
    let finite = check_psi_projection_finite(g);
    let mut notes = Vec::new();
    if !finite {
        notes.push(
            "P(Psi) is infinite: pre-normality of L_f^{>=N_o} is sufficient but not necessary".into(),
        );
    }
    VerdictReport {
        property: Property::Diagnosability,
        verdict,
        conclusive: verdict || finite,
        params: Params {
            n_o: Some(n_o),
            n: Some(n_o),
            minimal_n: minimal,
            ..Params::default()
        },
        witness: if verdict { None } else { witness },
        notes,
    }
}

/// Sufficient condition for prognosability and diagnosability to coincide:
/// `L_f^{≥N_s+1}` is pre-normal.
pub fn check_pro_eq_dia(g: &Dfa) -> Result<VerdictReport> {
    require_live_convergent(g)?;
    let (n_s, _) = shortest_fault_observations(g).ok_or(Error::EmptyFaultLanguage)?;
    let (ok, w) = is_pre_normal(&l_f_geq(g, n_s + 1), &Projection::Observable);
    Ok(VerdictReport {
        property: Property::PrognosisEqualsDiagnosis,
        verdict: ok,
        conclusive: ok,
        params: Params {
            n_s: Some(n_s),
            n: Some(n_s + 1),
            ..Params::default()
        },
        witness: w,
        notes: Vec::new(),
    })
}

/// Largest prognosis horizon.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Horizon {
    Bounded(usize),
    /// No fault-ending string exists, so every k holds.
    Unbounded,
}

/// Largest `k` for which the plant is k-prognosable.
///
/// k-prognosability fails for every `k > N_s`, so the scan stops there.
pub fn max_prognosis_horizon(g: &Dfa) -> Result<Horizon> {
    require_live_convergent(g)?;
    max_prognosis_horizon_unchecked(g)
}

/// [`max_prognosis_horizon`] without the live/convergent precondition.
pub fn max_prognosis_horizon_unchecked(g: &Dfa) -> Result<Horizon> {
    let Some((n_s, _)) = shortest_fault_observations(g) else {
        return Ok(Horizon::Unbounded);
    };
    let mut best = None;
    for k in 0..=n_s {
        if check_k_prognosable_unchecked(g, k).verdict {
            best = Some(k);
        } else {
            break;
        }
    }
    best.map(Horizon::Bounded).ok_or(Error::NotPrognosable)
}
