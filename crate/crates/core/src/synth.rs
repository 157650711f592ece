//! Supervisor synthesis: the supremal controllable, normal and k-prognosable (or diagnosable)
//! sublanguage, computed as a fixpoint of state filters on a refined plant.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use crate::automata::{
    language_difference_witness, minimize, primed_labels, spa_refine_detailed,
    subset_construction, Dfa, EventId, StateId,
};
use crate::error::{Error, Result};
use crate::fault::{fault_refine, l_f_geq};
use crate::lang::{
    is_controllable, is_normal, is_pre_normal_in, language_intersection, prefix_closure,
    supremal_prefix_closed_subset, LangRef, Projection, Witness,
};
use crate::verify::{check_psi_projection_finite, critical_prognosis_language, observer, require_live_convergent};

/// What the closed loop must satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Prognosis(usize),
    Diagnosis,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::Prognosis(k) => write!(f, "prognosis(k={k})"),
            Mode::Diagnosis => f.write_str("diagnosis"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SynthesisProblem {
    pub plant: Dfa,
    pub mode: Mode,
    /// Events the supervisor cannot disable, sorted.
    pub uncontrollable: Vec<EventId>,
    pub projection: Projection,
}

impl SynthesisProblem {
    /// Uses the alphabet's own uncontrollable events and the observable projection.
    pub fn new(plant: Dfa, mode: Mode) -> SynthesisProblem {
        let uncontrollable = plant.alphabet().uncontrollable();
        SynthesisProblem {
            plant,
            mode,
            uncontrollable,
            projection: Projection::Observable,
        }
    }

    /// Adds events to the uncontrollable set by name.
    pub fn with_uncontrollable(mut self, names: &[&str]) -> Result<SynthesisProblem> {
        for n in names {
            let e = self
                .plant
                .alphabet()
                .id(n)
                .ok_or_else(|| Error::Invalid(format!("unknown event {n}")))?;
            self.uncontrollable.push(e);
        }
        self.uncontrollable.sort_unstable();
        self.uncontrollable.dedup();
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        require_live_convergent(&self.plant)?;
        for e in self.plant.alphabet().uncontrollable() {
            if !self.uncontrollable.contains(&e) {
                return Err(Error::Invalid(format!(
                    "event {} is declared uncontrollable but missing from the uncontrollable set",
                    self.plant.alphabet().name(e)
                )));
            }
        }
        Ok(())
    }
}

/// One execution of the controllability/normality filter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IterationLog {
    pub iteration: usize,
    /// Labels of states failing the controllability filter.
    pub uncontrollable_removed: Vec<String>,
    /// Labels of states failing the normality filter.
    pub non_normal_removed: Vec<String>,
    /// Labels of states dropped because they became unreachable.
    pub unreachable_removed: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct SynthesisResult {
    /// Recognizer of the supremal sublanguage, all states marked; `None` means no solution.
    pub supervisor: Option<Dfa>,
    /// Number of filter executions until the fixpoint.
    pub iterations: usize,
    pub trace: Vec<IterationLog>,
    /// The refined plant the filters run on.
    pub h1: Dfa,
    /// Labels of the states recognizing the critical language.
    pub critical_states: Vec<String>,
    /// Labels of the prognosability core `X^{N_p}`.
    pub core_states: Vec<String>,
    /// False for diagnosis when `P(Ψ)` is infinite.
    pub maximality_guaranteed: bool,
}

impl SynthesisResult {
    pub fn is_solution(&self) -> bool {
        self.supervisor.is_some()
    }
}

/// The critical language `M`: `sup-prefix-closed(L_n ∖ Ψ_f^{-k})` or `L_f^{≥N_o}`.
pub fn critical_language(problem: &SynthesisProblem) -> LangRef {
    critical_language_of(&problem.plant, problem.mode)
}

pub(crate) fn critical_language_of(g: &Dfa, mode: Mode) -> LangRef {
    match mode {
        Mode::Prognosis(k) => supremal_prefix_closed_subset(&critical_prognosis_language(g, k)),
        Mode::Diagnosis => l_f_geq(g, observer(g).n_states()),
    }
}

/// The refined plant `H_1`: plant × fault monitor × minimal recognizer of the critical language,
/// then made a state-partition automaton. Language-equal to the plant; marked states recognize
/// the critical language.
pub fn prepare_h1(problem: &SynthesisProblem) -> Result<Dfa> {
    problem.validate()?;
    let track_exit = matches!(problem.mode, Mode::Prognosis(_));
    Ok(build_h1(&problem.plant, &critical_base(&problem.plant, problem.mode), track_exit).dfa)
}

/// Language whose membership the refined plant tracks: `L_n ∖ Ψ_f^{-k}` or `L_f^{≥N_o}`.
fn critical_base(g: &Dfa, mode: Mode) -> LangRef {
    match mode {
        Mode::Prognosis(k) => critical_prognosis_language(g, k),
        Mode::Diagnosis => l_f_geq(g, observer(g).n_states()),
    }
}

pub(crate) struct RefinedH1 {
    pub dfa: Dfa,
    /// States reached by a member of the critical language that has a non-member prefix.
    pub reentry: Vec<bool>,
}

pub(crate) fn build_h1(g: &Dfa, c: &LangRef, track_exit: bool) -> RefinedH1 {
    let fr = fault_refine(g);
    let z = &fr.refined;
    let mm = minimize(c.recognizer());
    let sigma = g.alphabet();
    let left0 = track_exit && !mm.is_marked(mm.initial());
    let start = (z.initial(), mm.initial(), left0);
    let mut index: HashMap<(StateId, StateId, bool), StateId> = HashMap::from([(start, 0)]);
    let mut nodes = vec![start];
    let mut delta = Vec::new();
    let mut head = 0;
    while head < nodes.len() {
        let (x, y, left) = nodes[head];
        head += 1;
        for e in sigma.ids() {
            let t = z.next(x, e).map(|x2| {
                let y2 = mm.next(y, e).expect("minimal recognizer is complete");
                let key = (x2, y2, left || (track_exit && !mm.is_marked(y2)));
                let next_id = nodes.len();
                *index.entry(key).or_insert_with(|| {
                    nodes.push(key);
                    next_id
                })
            });
            delta.push(t);
        }
    }
    let marked = nodes.iter().map(|&(_, y, _)| mm.is_marked(y)).collect();
    let labels = (0..nodes.len()).map(|i| i.to_string()).collect();
    let prod = Dfa::from_parts(sigma.clone(), labels, delta, 0, marked).expect("well formed");
    let spa = spa_refine_detailed(&prod);
    let origin: Vec<StateId> = spa.origin.iter().map(|&p| fr.origin[nodes[p].0]).collect();
    let reentry = spa
        .origin
        .iter()
        .map(|&p| nodes[p].2 && mm.is_marked(nodes[p].1))
        .collect();
    RefinedH1 {
        dfa: spa.dfa.with_labels(primed_labels(g, &origin)),
        reentry,
    }
}

/// Observer cell (over `h`'s states) of every state of a state-partition automaton.
fn cells_of(h: &Dfa, p: &Projection) -> Vec<Vec<StateId>> {
    let (_, cells) = subset_construction(h, &p.mask(h.alphabet()), &[h.initial()]);
    let mut out: Vec<Vec<StateId>> = vec![Vec::new(); h.n_states()];
    for c in cells {
        for &x in &c {
            // a state-partition automaton puts each state in one cell
            debug_assert!(out[x].is_empty() || out[x] == c);
            out[x] = c.clone();
        }
    }
    out
}

/// `X^{N_p}`: states whose observer cell lies entirely inside or entirely outside `x_m`.
pub fn prognosability_core_states(cells: &[Vec<StateId>], x_m: &[bool]) -> Vec<bool> {
    cells
        .iter()
        .map(|c| c.iter().all(|&y| x_m[y]) || c.iter().all(|&y| !x_m[y]))
        .collect()
}

/// `X^C_i`: states of `x_i` from which no uncontrollable string of `h1` leaves `x_i`.
pub fn controllable_states(h1: &Dfa, x_i: &[bool], uncontrollable: &[EventId]) -> Vec<bool> {
    let mut uc = vec![false; h1.alphabet().len()];
    for &e in uncontrollable {
        uc[e] = true;
    }
    let mut good = x_i.to_vec();
    let preds = h1.predecessors();
    let mut stack: Vec<StateId> = h1
        .states()
        .filter(|&x| x_i[x] && h1.successors(x).any(|(e, t)| uc[e] && !x_i[t]))
        .collect();
    for &x in &stack {
        good[x] = false;
    }
    while let Some(x) = stack.pop() {
        for &(p, e) in &preds[x] {
            if uc[e] && good[p] {
                good[p] = false;
                stack.push(p);
            }
        }
    }
    good
}

/// `X^N_i`: states of `x_i` whose observer cell is contained in `x_i`.
pub fn normal_states(cells: &[Vec<StateId>], x_i: &[bool]) -> Vec<bool> {
    cells
        .iter()
        .enumerate()
        .map(|(x, c)| x_i[x] && c.iter().all(|&y| x_i[y]))
        .collect()
}

fn labels_where(h: &Dfa, set: &[bool]) -> Vec<String> {
    h.states().filter(|&x| set[x]).map(|x| h.label(x).to_string()).collect()
}

pub fn synthesize(problem: &SynthesisProblem) -> Result<SynthesisResult> {
    problem.validate()?;
    let g = &problem.plant;
    let track_exit = matches!(problem.mode, Mode::Prognosis(_));
    let RefinedH1 { dfa: h1, reentry } = build_h1(g, &critical_base(g, problem.mode), track_exit);
    let cells = cells_of(&h1, &problem.projection);
    let x_m: Vec<bool> = h1.marking().to_vec();
    let core: Vec<bool> = prognosability_core_states(&cells, &x_m)
        .into_iter()
        .zip(&reentry)
        .map(|(pure, &re)| pure && !re)
        .collect();
    let maximality_guaranteed = match problem.mode {
        Mode::Prognosis(_) => true,
        Mode::Diagnosis => check_psi_projection_finite(g),
    };
    let mut result = SynthesisResult {
        supervisor: None,
        iterations: 0,
        trace: Vec::new(),
        critical_states: labels_where(&h1, &x_m),
        core_states: labels_where(&h1, &core),
        h1: h1.clone(),
        maximality_guaranteed,
    };
    let mut x = core;
    while x[h1.initial()] {
        result.iterations += 1;
        let xc = controllable_states(&h1, &x, &problem.uncontrollable);
        let xn = normal_states(&cells, &x);
        let filtered: Vec<bool> = (0..x.len()).map(|i| xc[i] && xn[i]).collect();
        let reach = reachable_within(&h1, &filtered);
        let log = IterationLog {
            iteration: result.iterations,
            uncontrollable_removed: labels_where(&h1, &zip_diff(&x, &xc)),
            non_normal_removed: labels_where(&h1, &zip_diff(&x, &xn)),
            unreachable_removed: labels_where(&h1, &zip_diff(&filtered, &reach)),
        };
        result.trace.push(log);
        // the critical language stays prefix-closed inside every iterate
        debug_assert!(h1.states().all(|q| !(reach[q] && reentry[q])));
        if reach == x {
            break;
        }
        x = reach;
    }
    if x[h1.initial()] {
        let (sub, _) = h1.induced(&x);
        result.supervisor = Some(sub.mark_all());
    }
    Ok(result)
}

fn zip_diff(a: &[bool], b: &[bool]) -> Vec<bool> {
    a.iter().zip(b).map(|(&x, &y)| x && !y).collect()
}

/// States of `keep` reachable from the initial state through `keep`.
fn reachable_within(h: &Dfa, keep: &[bool]) -> Vec<bool> {
    let mut seen = vec![false; h.n_states()];
    if !keep[h.initial()] {
        return seen;
    }
    seen[h.initial()] = true;
    let mut stack = vec![h.initial()];
    while let Some(q) = stack.pop() {
        for (_, t) in h.successors(q) {
            if keep[t] && !seen[t] {
                seen[t] = true;
                stack.push(t);
            }
        }
    }
    seen
}

/// Outcome of checking a closed loop against the three synthesis requirements.
#[derive(Clone, Debug)]
pub struct ClosedLoopCheck {
    pub controllable: (bool, Option<Witness>),
    pub normal: (bool, Option<Witness>),
    pub mode_property: (bool, Option<Witness>),
}

impl ClosedLoopCheck {
    pub fn all(&self) -> bool {
        self.controllable.0 && self.normal.0 && self.mode_property.0
    }
}

/// The mode property of a closed-loop language `K ⊆ L(G)`, against the plant's languages.
///
/// Prognosis(k): `(L_n ∩ K) ∖ Ψ_f^{-k}` is prefix-closed and pre-normal with respect to `K`.
/// Diagnosis: `L_f^{≥N_o} ∩ K` is pre-normal with respect to `K`.
pub fn mode_property(g: &Dfa, mode: Mode, k: &Dfa) -> Result<(bool, Option<Witness>)> {
    let plant = Arc::new(g.clone());
    let kl = LangRef::within(&plant, &k.mark_all())?;
    let base = critical_base(g, mode);
    let c = language_intersection(&LangRef::within(&plant, base.recognizer())?, &kl)?;
    if let Mode::Prognosis(_) = mode {
        let closure = prefix_closure(&c);
        if let Some(w) = language_difference_witness(closure.recognizer(), c.recognizer())? {
            let note = "prefix of the critical language outside it";
            return Ok((false, Some(Witness::new(g.alphabet(), &w, &w, note))));
        }
    }
    is_pre_normal_in(c.recognizer(), kl.recognizer(), &Projection::Observable)
}

/// Checks controllability, normality and the mode property of the language generated by `k`.
pub fn check_closed_loop(problem: &SynthesisProblem, k: &Dfa) -> Result<ClosedLoopCheck> {
    let plant = Arc::new(problem.plant.clone());
    let kl = LangRef::within(&plant, &k.mark_all())?;
    Ok(ClosedLoopCheck {
        controllable: is_controllable(&kl, &problem.uncontrollable),
        normal: is_normal(&kl, &problem.projection),
        mode_property: mode_property(&problem.plant, problem.mode, k)?,
    })
}

/// Labels of the states of `d`, sorted.
pub fn state_labels(d: &Dfa) -> BTreeSet<String> {
    d.labels().iter().cloned().collect()
}
