//! Definition-level checkers and a random plant generator, for differential testing.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automata::{accessible, Alphabet, Dfa, Event, EventId, StateId};
use crate::error::{Error, Result};
use crate::fault::{fault_refine, FaultPhase};
use crate::lang::{language_union, LangRef};
use crate::modular::ModularPlant;
use crate::synth::{check_closed_loop, prepare_h1, SynthesisProblem};
use crate::verify::require_live_convergent;

/// Length bound for enumeration.
#[derive(Clone, Debug)]
pub struct EnumBound {
    pub max_len: usize,
    pub justification: String,
}

impl EnumBound {
    pub fn new(max_len: usize) -> EnumBound {
        assert!(max_len >= 1, "max_len must be at least 1");
        EnumBound {
            max_len,
            justification: String::new(),
        }
    }

    /// Enough to separate two recognizers of `n` and `m` states: `n·m`.
    pub fn for_pair(a: &Dfa, b: &Dfa) -> EnumBound {
        EnumBound {
            max_len: (a.n_states() * b.n_states()).max(1),
            justification: format!("product of {} and {} states", a.n_states(), b.n_states()),
        }
    }
}

/// Marked strings of length at most `bound.max_len`, sorted.
pub fn enumerate(d: &Dfa, bound: &EnumBound) -> BTreeSet<Vec<String>> {
    let mut out = BTreeSet::new();
    let mut stack: Vec<(StateId, Vec<EventId>)> = vec![(d.initial(), Vec::new())];
    while let Some((q, w)) = stack.pop() {
        if d.is_marked(q) {
            out.insert(d.alphabet().names(&w));
        }
        if w.len() < bound.max_len {
            for (e, t) in d.successors(q) {
                let mut w2 = w.clone();
                w2.push(e);
                stack.push((t, w2));
            }
        }
    }
    out
}

/// States that lie on a cycle of the graph restricted to `inside`.
fn on_cycle(d: &Dfa, inside: &[bool]) -> Vec<bool> {
    d.states()
        .map(|v| {
            if !inside[v] {
                return false;
            }
            let mut seen = vec![false; d.n_states()];
            let mut stack: Vec<StateId> = d
                .successors(v)
                .map(|(_, t)| t)
                .filter(|&t| inside[t])
                .collect();
            while let Some(u) = stack.pop() {
                if u == v {
                    return true;
                }
                if seen[u] {
                    continue;
                }
                seen[u] = true;
                stack.extend(d.successors(u).map(|(_, t)| t).filter(|&t| inside[t]));
            }
            false
        })
        .collect()
}

/// k-prognosability straight from the definition, by subset simulation over observation words.
///
/// Fails when some observation word `w` is both the observation of a string exactly `k`
/// observations before a fault and the observation of a fault-free string from which a
/// fault-free cycle is reachable, or when a fault-ending string has fewer than `k` observations.
pub fn oracle_k_prognosable(g: &Dfa, k: usize) -> Result<bool> {
    require_live_convergent(g)?;
    let fr = fault_refine(g);
    let z = &fr.refined;
    let sigma = z.alphabet();
    let n = z.n_states();
    let nofault: Vec<bool> = fr.phase.iter().map(|&p| p == FaultPhase::NoFault).collect();

    // exact[j][x]: a fault-ending continuation from x with exactly j observations
    let mut exact: Vec<Vec<bool>> = Vec::with_capacity(k + 1);
    for j in 0..=k {
        let mut cur: Vec<bool> = (0..n)
            .map(|x| j == 0 && fr.phase[x] == FaultPhase::JustFaulted)
            .collect();
        loop {
            let mut changed = false;
            for x in 0..n {
                if cur[x] {
                    continue;
                }
                let hit = z.successors(x).any(|(e, y)| {
                    if sigma.is_observable(e) {
                        j > 0 && exact[j - 1][y]
                    } else {
                        cur[y]
                    }
                });
                if hit {
                    cur[x] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        exact.push(cur);
    }

    // fault-free states that reach a fault-free cycle through fault-free states
    let cyc = on_cycle(z, &nofault);
    let endless: Vec<bool> = (0..n)
        .map(|x| {
            if !nofault[x] {
                return false;
            }
            let mut seen = vec![false; n];
            let mut stack = vec![x];
            while let Some(u) = stack.pop() {
                if cyc[u] {
                    return true;
                }
                if seen[u] {
                    continue;
                }
                seen[u] = true;
                stack.extend(z.successors(u).map(|(_, t)| t).filter(|&t| nofault[t]));
            }
            false
        })
        .collect();

    let closure = |set: BTreeSet<StateId>, only_nofault: bool| -> BTreeSet<StateId> {
        let mut out = set.clone();
        let mut stack: Vec<StateId> = set.into_iter().collect();
        while let Some(u) = stack.pop() {
            for (e, t) in z.successors(u) {
                if !sigma.is_observable(e) && (!only_nofault || nofault[t]) && out.insert(t) {
                    stack.push(t);
                }
            }
        }
        out
    };

    type Node = (BTreeSet<StateId>, BTreeSet<StateId>, usize);
    let start: Node = (
        closure(BTreeSet::from([z.initial()]), false),
        closure(BTreeSet::from([z.initial()]), true),
        0,
    );
    let mut seen: HashSet<Node> = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some((a, b, d)) = queue.pop_front() {
        if a.iter().any(|&x| exact[k][x]) && b.iter().any(|&y| endless[y]) {
            return Ok(false);
        }
        if d < k && a.iter().any(|&x| fr.phase[x] == FaultPhase::JustFaulted) {
            return Ok(false);
        }
        for e in sigma.ids().filter(|&e| sigma.is_observable(e)) {
            let a2: BTreeSet<StateId> = a.iter().filter_map(|&x| z.next(x, e)).collect();
            if a2.is_empty() {
                continue;
            }
            let b2: BTreeSet<StateId> = b
                .iter()
                .filter_map(|&y| z.next(y, e))
                .filter(|&y| nofault[y])
                .collect();
            let node = (closure(a2, false), closure(b2, true), (d + 1).min(k));
            if seen.insert(node.clone()) {
                queue.push_back(node);
            }
        }
    }
    Ok(true)
}

/// Diagnosability by the classical indeterminate-cycle test on the verifier whose right track
/// carries the fault phase.
pub fn oracle_diagnosable(g: &Dfa) -> Result<bool> {
    require_live_convergent(g)?;
    let fr = fault_refine(g);
    let z = &fr.refined;
    let sigma = g.alphabet();
    // nodes (left plant state, right refined state); edges flagged when they observe an event
    let start = (g.initial(), z.initial());
    let mut index: HashMap<(StateId, StateId), usize> = HashMap::from([(start, 0)]);
    let mut nodes = vec![start];
    let mut edges: Vec<Vec<(usize, bool)>> = vec![Vec::new()];
    let mut head = 0;
    while head < nodes.len() {
        let (q, r) = nodes[head];
        let mut out = Vec::new();
        for e in sigma.ids() {
            let mut next = Vec::new();
            if sigma.is_observable(e) {
                if let (Some(a), Some(b)) = (g.next(q, e), z.next(r, e)) {
                    next.push(((a, b), true));
                }
            } else {
                if !sigma.is_fault(e) {
                    if let Some(a) = g.next(q, e) {
                        next.push(((a, r), false));
                    }
                }
                if let Some(b) = z.next(r, e) {
                    next.push(((q, b), false));
                }
            }
            for (node, obs) in next {
                let id = match index.get(&node) {
                    Some(&i) => i,
                    None => {
                        let i = nodes.len();
                        index.insert(node, i);
                        nodes.push(node);
                        edges.push(Vec::new());
                        i
                    }
                };
                out.push((id, obs));
            }
        }
        edges[head] = out;
        head += 1;
    }
    let faulty: Vec<bool> = nodes.iter().map(|&(_, r)| fr.phase[r].is_faulty()).collect();
    let comp = scc(nodes.len(), |v| {
        edges[v]
            .iter()
            .filter(|&&(w, _)| faulty[v] && faulty[w])
            .map(|&(w, _)| w)
            .collect()
    });
    for v in 0..nodes.len() {
        if !faulty[v] {
            continue;
        }
        for &(w, obs) in &edges[v] {
            if obs && faulty[w] && comp[v] == comp[w] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Strongly connected component id of each vertex (Kosaraju).
fn scc(n: usize, succ: impl Fn(usize) -> Vec<usize>) -> Vec<usize> {
    let adj: Vec<Vec<usize>> = (0..n).map(&succ).collect();
    let mut radj = vec![Vec::new(); n];
    for (v, out) in adj.iter().enumerate() {
        for &w in out {
            radj[w].push(v);
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    for root in 0..n {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        let mut stack = vec![(root, 0usize)];
        while let Some((v, i)) = stack.last_mut() {
            if *i < adj[*v].len() {
                let w = adj[*v][*i];
                *i += 1;
                if !visited[w] {
                    visited[w] = true;
                    stack.push((w, 0));
                }
            } else {
                order.push(*v);
                stack.pop();
            }
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut c = 0;
    for &root in order.iter().rev() {
        if comp[root] != usize::MAX {
            continue;
        }
        let mut stack = vec![root];
        comp[root] = c;
        while let Some(v) = stack.pop() {
            for &w in &radj[v] {
                if comp[w] == usize::MAX {
                    comp[w] = c;
                    stack.push(w);
                }
            }
        }
        c += 1;
    }
    comp
}

/// Shape of randomly generated plants.
#[derive(Clone, Debug)]
pub struct PlantParams {
    pub max_states: usize,
    pub max_events: usize,
    pub max_faults: usize,
    /// Probability that a given (state, event) pair gets a transition.
    pub density: f64,
}

impl Default for PlantParams {
    fn default() -> Self {
        PlantParams {
            max_states: 8,
            max_events: 5,
            max_faults: 2,
            density: 0.3,
        }
    }
}

/// A reproducible random plant that is live and convergent.
pub fn random_plant(seed: u64, params: &PlantParams) -> Dfa {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=params.max_states.max(2));
    let n_events = rng.gen_range(2..=params.max_events.max(2));
    let n_faults = rng.gen_range(0..=params.max_faults.min(n_events - 1));
    let mut events = Vec::new();
    let obs_names = ["a", "b", "c", "d", "e", "g", "h"];
    let uo_names = ["u", "v", "w", "x", "y"];
    let (mut no, mut nu) = (0, 0);
    for i in 0..n_events - n_faults {
        // keep at least one observable event
        let observable = i == 0 || rng.gen_bool(0.6);
        let controllable = rng.gen_bool(0.5);
        if observable {
            events.push(Event::new(obs_names[no], true, controllable, false));
            no += 1;
        } else {
            events.push(Event::new(uo_names[nu], false, controllable, false));
            nu += 1;
        }
    }
    for i in 0..n_faults {
        events.push(Event::fault(format!("f{}", i + 1)));
    }
    let alphabet = Alphabet::new(events).expect("distinct names");
    let m = alphabet.len();
    let mut delta: Vec<Option<StateId>> = (0..n * m)
        .map(|_| rng.gen_bool(params.density).then(|| rng.gen_range(0..n)))
        .collect();
    let first_obs = (0..m).find(|&e| alphabet.is_observable(e)).expect("one observable");
    loop {
        // liveness
        for q in 0..n {
            if (0..m).all(|e| delta[q * m + e].is_none()) {
                let obs: Vec<EventId> = (0..m).filter(|&e| alphabet.is_observable(e)).collect();
                let e = obs[rng.gen_range(0..obs.len())];
                delta[q * m + e] = Some(q);
            }
        }
        // convergence: cut one edge of some unobservable cycle
        match unobservable_cycle_edge(n, m, &alphabet, &delta) {
            Some(slot) => delta[slot] = None,
            None => break,
        }
    }
    let _ = first_obs;
    let labels = (0..n).map(|q| q.to_string()).collect();
    let d = Dfa::from_parts(alphabet, labels, delta, 0, vec![true; n]).expect("well formed");
    let d = accessible(&d);
    let labels = (0..d.n_states()).map(|q| q.to_string()).collect();
    d.with_labels(labels)
}

/// Slot `(q·m + e)` of an edge lying on an unobservable cycle, if any.
fn unobservable_cycle_edge(
    n: usize,
    m: usize,
    alphabet: &Alphabet,
    delta: &[Option<StateId>],
) -> Option<usize> {
    for q in 0..n {
        for e in 0..m {
            if alphabet.is_observable(e) {
                continue;
            }
            let Some(t) = delta[q * m + e] else { continue };
            // is q reachable from t through unobservable edges?
            let mut seen = vec![false; n];
            let mut stack = vec![t];
            while let Some(u) = stack.pop() {
                if u == q {
                    return Some(q * m + e);
                }
                if seen[u] {
                    continue;
                }
                seen[u] = true;
                for e2 in 0..m {
                    if !alphabet.is_observable(e2) {
                        if let Some(w) = delta[u * m + e2] {
                            stack.push(w);
                        }
                    }
                }
            }
        }
    }
    None
}

/// Supremal controllable, normal, mode-satisfying sublanguage by exhaustive search over the
/// strict sub-automata of the refined plant.
///
/// Every state subset containing the initial state is tried; the languages of the subsets that
/// pass all three checks are united.
pub fn oracle_supremal(problem: &SynthesisProblem, budget: usize) -> Result<Option<LangRef>> {
    let h1 = prepare_h1(problem)?;
    let n = h1.n_states();
    if n > budget {
        return Err(Error::BudgetExceeded { found: n, budget });
    }
    let plant = Arc::new(problem.plant.clone());
    let mut union: Option<LangRef> = None;
    for bits in 0u64..(1u64 << n) {
        if bits & (1 << h1.initial()) == 0 {
            continue;
        }
        let keep: Vec<bool> = (0..n).map(|i| bits & (1 << i) != 0).collect();
        let (sub, _) = h1.induced(&keep);
        if !check_closed_loop(problem, &sub)?.all() {
            continue;
        }
        let k = LangRef::within(&plant, &sub.mark_all())?;
        union = Some(match union {
            None => k,
            Some(u) => language_union(&u, &k)?,
        });
    }
    Ok(union)
}

/// Two random components. Events of the second get a `2` suffix; with `shared`, one
/// observable event of the second is renamed to an observable event of the first and takes
/// its attributes.
pub fn random_modular(seed: u64, params: &PlantParams, shared: bool) -> ModularPlant {
    let g1 = random_plant(seed.wrapping_mul(2), params);
    let g2 = random_plant(seed.wrapping_mul(2).wrapping_add(1), params);
    let a1 = g1.alphabet();
    let target = if shared {
        (a1.ids().find(|&e| a1.is_observable(e)), g2.alphabet().ids().find(|&e| g2.alphabet().is_observable(e)))
    } else {
        (None, None)
    };
    let events: Vec<Event> = g2
        .alphabet()
        .events()
        .iter()
        .enumerate()
        .map(|(i, e)| match target {
            (Some(t1), Some(t2)) if t2 == i => a1.event(t1).clone(),
            _ => Event::new(format!("{}2", e.name), e.observable, e.controllable, e.fault),
        })
        .collect();
    let alphabet = Alphabet::new(events).expect("distinct names");
    let m = alphabet.len();
    let delta = g2
        .states()
        .flat_map(|q| (0..m).map(move |e| (q, e)))
        .map(|(q, e)| g2.next(q, e))
        .collect();
    let g2 = Dfa::from_parts(
        alphabet,
        g2.labels().to_vec(),
        delta,
        g2.initial(),
        vec![true; g2.n_states()],
    )
    .expect("well formed");
    ModularPlant::new(vec![g1, g2])
}
