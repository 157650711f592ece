//! Fault-derived languages: `L_f`, `L_n`, `Ψ(Σ_f)`, `Ψ_f^{-k}` and the observation-bounded variants.

use std::collections::HashMap;
use std::sync::Arc;

use crate::automata::{primed_labels, Dfa, StateId};
use crate::lang::{
    concat_sigma_star_within, inverse_project, language_intersection, prefix_closure, project,
    right_quotient, sigma_o_bounded, CountMode, LangRef, Projection,
};

/// Where a run stands with respect to fault occurrence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FaultPhase {
    /// No fault so far.
    NoFault,
    /// The last event was a fault.
    JustFaulted,
    /// A fault occurred earlier and the last event was not a fault.
    PostFault,
}

impl FaultPhase {
    pub fn is_faulty(self) -> bool {
        self != FaultPhase::NoFault
    }

    fn step(self, fault: bool) -> FaultPhase {
        match (self, fault) {
            (_, true) => FaultPhase::JustFaulted,
            (FaultPhase::NoFault, false) => FaultPhase::NoFault,
            (_, false) => FaultPhase::PostFault,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            FaultPhase::NoFault => "N",
            FaultPhase::JustFaulted => "J",
            FaultPhase::PostFault => "P",
        }
    }
}

/// A plant refined so that every state has a unique fault phase.
#[derive(Clone, Debug)]
pub struct FaultRefinedPlant {
    /// Language-equal to the plant; labels are original labels, primed when a state is split.
    pub refined: Dfa,
    pub phase: Vec<FaultPhase>,
    /// Original plant state of each refined state.
    pub origin: Vec<StateId>,
    pub plant: Arc<Dfa>,
}

impl FaultRefinedPlant {
    /// The refined plant marking the states whose phase satisfies `pred`, as a sublanguage of the plant.
    pub fn language(&self, pred: impl Fn(FaultPhase) -> bool) -> LangRef {
        let marked = self.phase.iter().map(|&p| pred(p)).collect();
        LangRef::shaped(&self.plant, self.refined.with_marking(marked))
    }
}

/// Product of the plant with the three-phase fault monitor.
pub fn fault_refine(g: &Dfa) -> FaultRefinedPlant {
    let sigma = g.alphabet();
    let m = sigma.len();
    let start = (g.initial(), FaultPhase::NoFault);
    let mut index: HashMap<(StateId, FaultPhase), StateId> = HashMap::from([(start, 0)]);
    let mut nodes = vec![start];
    let mut delta = Vec::new();
    let mut head = 0;
    while head < nodes.len() {
        let (q, ph) = nodes[head];
        head += 1;
        for e in 0..m {
            let t = g.next(q, e).map(|t| {
                let key = (t, ph.step(sigma.is_fault(e)));
                let next_id = nodes.len();
                *index.entry(key).or_insert_with(|| {
                    nodes.push(key);
                    next_id
                })
            });
            delta.push(t);
        }
    }
    let origin: Vec<StateId> = nodes.iter().map(|&(q, _)| q).collect();
    let labels = primed_labels(g, &origin);
    let marked = vec![true; nodes.len()];
    let refined = Dfa::from_parts(sigma.clone(), labels, delta, 0, marked).expect("well formed");
    FaultRefinedPlant {
        refined,
        phase: nodes.iter().map(|&(_, p)| p).collect(),
        origin,
        plant: Arc::new(g.clone()),
    }
}

/// `L_f = Σ*Σ_fΣ* ∩ L(G)`.
pub fn faulty_language(g: &Dfa) -> LangRef {
    fault_refine(g).language(FaultPhase::is_faulty)
}

/// `L_n = L(G) \ L_f`.
pub fn non_faulty_language(g: &Dfa) -> LangRef {
    fault_refine(g).language(|p| p == FaultPhase::NoFault)
}

/// `Ψ(Σ_f) = L(G) ∩ Σ*Σ_f`: strings ending with a fault.
pub fn psi(g: &Dfa) -> LangRef {
    fault_refine(g).language(|p| p == FaultPhase::JustFaulted)
}

/// `Ψ_f^{-k} = P^{-1}P[Ψ(Σ_f) / P^{-1}(Σ_o^{≤k})]Σ* ∩ closure(Ψ(Σ_f))`.
pub fn psi_minus_k(g: &Dfa, k: usize) -> LangRef {
    let plant = Arc::new(g.clone());
    let sigma = g.alphabet();
    let psi_l = psi(g);
    let quotient = right_quotient(psi_l.recognizer(), &sigma_o_bounded(sigma, k, CountMode::AtMost))
        .expect("same alphabet");
    let observed = project(&quotient, &Projection::Observable);
    let lookalike = inverse_project(&observed, sigma).expect("sub-alphabet");
    let start = LangRef::within(&plant, &lookalike).expect("same alphabet");
    let extended = concat_sigma_star_within(&start);
    let closure = prefix_closure(&psi_l);
    let closure = LangRef::within(&plant, closure.recognizer()).expect("same alphabet");
    language_intersection(&extended, &closure).expect("same plant")
}

/// `L_f^{≥N}`: faulty strings with at least `n` observations.
pub fn l_f_geq(g: &Dfa, n: usize) -> LangRef {
    let plant = Arc::new(g.clone());
    let lf = LangRef::within(&plant, faulty_language(g).recognizer()).expect("same alphabet");
    let counter = LangRef::within(&plant, &sigma_o_bounded(g.alphabet(), n, CountMode::AtLeast))
        .expect("same alphabet");
    language_intersection(&lf, &counter).expect("same plant")
}

/// `L_f^{<N} = {s ∈ closure(L_f) | |P(s)| < N}`.
pub fn l_f_lt(g: &Dfa, n: usize) -> LangRef {
    let plant = Arc::new(g.clone());
    if n == 0 {
        return LangRef::empty_within(&plant);
    }
    let closure = prefix_closure(&faulty_language(g));
    let closure = LangRef::within(&plant, closure.recognizer()).expect("same alphabet");
    let counter = LangRef::within(&plant, &sigma_o_bounded(g.alphabet(), n - 1, CountMode::AtMost))
        .expect("same alphabet");
    language_intersection(&closure, &counter).expect("same plant")
}

/// `L_{Ψf}^{≥N}`: faulty strings with at least `n` observations after the first fault.
pub fn l_psi_geq(g: &Dfa, n: usize) -> LangRef {
    let fr = fault_refine(g);
    let r = &fr.refined;
    let sigma = g.alphabet();
    let m = sigma.len();
    let start = (r.initial(), 0usize);
    let mut index: HashMap<(StateId, usize), StateId> = HashMap::from([(start, 0)]);
    let mut nodes = vec![start];
    let mut delta = Vec::new();
    let mut head = 0;
    while head < nodes.len() {
        let (z, c) = nodes[head];
        head += 1;
        for e in 0..m {
            let t = r.next(z, e).map(|t| {
                let c2 = if fr.phase[z].is_faulty() && sigma.is_observable(e) {
                    (c + 1).min(n)
                } else {
                    c
                };
                let next_id = nodes.len();
                *index.entry((t, c2)).or_insert_with(|| {
                    nodes.push((t, c2));
                    next_id
                })
            });
            delta.push(t);
        }
    }
    let labels = nodes
        .iter()
        .map(|&(z, c)| format!("({},{})", r.label(z), c))
        .collect();
    let marked = nodes
        .iter()
        .map(|&(z, c)| fr.phase[z].is_faulty() && c >= n)
        .collect();
    let d = Dfa::from_parts(sigma.clone(), labels, delta, 0, marked).expect("well formed");
    LangRef::shaped(&fr.plant, d)
}
