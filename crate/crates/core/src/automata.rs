//! Deterministic finite automata over attributed alphabets.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

pub type StateId = usize;
pub type EventId = usize;

/// A named event with its observability, controllability and fault flags.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Event {
    pub name: String,
    pub observable: bool,
    pub controllable: bool,
    pub fault: bool,
}

impl Event {
    pub fn new(name: impl Into<String>, observable: bool, controllable: bool, fault: bool) -> Self {
        Event {
            name: name.into(),
            observable,
            controllable,
            fault,
        }
    }

    /// Observable and controllable.
    pub fn observable(name: impl Into<String>) -> Self {
        Event::new(name, true, true, false)
    }

    /// Unobservable and uncontrollable.
    pub fn unobservable(name: impl Into<String>) -> Self {
        Event::new(name, false, false, false)
    }

    /// Unobservable, uncontrollable fault.
    pub fn fault(name: impl Into<String>) -> Self {
        Event::new(name, false, false, true)
    }

    pub fn with_controllable(mut self, controllable: bool) -> Self {
        self.controllable = controllable;
        self
    }
}

/// An ordered set of events. Event ids are positions in this order.
#[derive(Clone, Debug)]
pub struct Alphabet {
    events: Vec<Event>,
    index: HashMap<String, EventId>,
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        self.events == other.events
    }
}

impl Eq for Alphabet {}

impl Alphabet {
    pub fn new(events: Vec<Event>) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, e) in events.iter().enumerate() {
            if e.name.is_empty() {
                return Err(Error::Invalid("event name is empty".into()));
            }
            if e.fault && e.observable {
                return Err(Error::Invalid(format!("fault event `{}` is observable", e.name)));
            }
            if index.insert(e.name.clone(), i).is_some() {
                return Err(Error::Invalid(format!("duplicate event `{}`", e.name)));
            }
        }
        Ok(Alphabet { events, index })
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn event(&self, id: EventId) -> &Event {
        &self.events[id]
    }

    pub fn name(&self, id: EventId) -> &str {
        &self.events[id].name
    }

    pub fn id(&self, name: &str) -> Option<EventId> {
        self.index.get(name).copied()
    }

    pub fn is_observable(&self, id: EventId) -> bool {
        self.events[id].observable
    }

    pub fn is_fault(&self, id: EventId) -> bool {
        self.events[id].fault
    }

    pub fn is_controllable(&self, id: EventId) -> bool {
        self.events[id].controllable
    }

    pub fn ids(&self) -> std::ops::Range<EventId> {
        0..self.events.len()
    }

    pub fn observable_mask(&self) -> Vec<bool> {
        self.events.iter().map(|e| e.observable).collect()
    }

    pub fn uncontrollable(&self) -> Vec<EventId> {
        self.ids().filter(|&e| !self.events[e].controllable).collect()
    }

    pub fn has_faults(&self) -> bool {
        self.events.iter().any(|e| e.fault)
    }

    /// Sub-alphabet of the events whose mask entry is set, in the same order.
    pub fn restrict(&self, keep: &[bool]) -> Alphabet {
        let events = self
            .events
            .iter()
            .zip(keep)
            .filter(|(_, &k)| k)
            .map(|(e, _)| e.clone())
            .collect();
        Alphabet::new(events).expect("sub-alphabet of a valid alphabet")
    }

    /// Union of several alphabets in first-seen order.
    pub fn union<'a>(alphabets: impl IntoIterator<Item = &'a Alphabet>) -> Result<Alphabet> {
        let mut events: Vec<Event> = Vec::new();
        let mut seen: HashMap<String, usize> = HashMap::new();
        for a in alphabets {
            for e in &a.events {
                match seen.get(&e.name) {
                    Some(&i) => {
                        let prev = &events[i];
                        if prev.observable != e.observable {
                            return Err(Error::ObservabilityIncompatibility(e.name.clone()));
                        }
                        if prev != e {
                            return Err(Error::AttributeConflict(e.name.clone()));
                        }
                    }
                    None => {
                        seen.insert(e.name.clone(), events.len());
                        events.push(e.clone());
                    }
                }
            }
        }
        Alphabet::new(events)
    }

    pub fn word(&self, names: &[&str]) -> Result<Vec<EventId>> {
        names
            .iter()
            .map(|n| self.id(n).ok_or_else(|| Error::Invalid(format!("unknown event `{n}`"))))
            .collect()
    }

    pub fn names(&self, word: &[EventId]) -> Vec<String> {
        word.iter().map(|&e| self.events[e].name.clone()).collect()
    }

    /// Observable part of a word.
    pub fn project_word(&self, word: &[EventId]) -> Vec<EventId> {
        word.iter().copied().filter(|&e| self.events[e].observable).collect()
    }
}

/// A deterministic automaton with a partial transition function.
///
/// States are `0..n`. Labels are display metadata only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    alphabet: Alphabet,
    labels: Vec<String>,
    delta: Vec<Option<StateId>>,
    initial: StateId,
    marked: Vec<bool>,
}

impl Dfa {
    /// Raw constructor. `delta` is row-major, one row of `alphabet.len()` entries per state.
    pub fn from_parts(
        alphabet: Alphabet,
        labels: Vec<String>,
        delta: Vec<Option<StateId>>,
        initial: StateId,
        marked: Vec<bool>,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 || initial >= n {
            return Err(Error::Invalid("initial state out of range".into()));
        }
        if delta.len() != n * alphabet.len() || marked.len() != n {
            return Err(Error::Invalid("inconsistent table sizes".into()));
        }
        if delta.iter().flatten().any(|&t| t >= n) {
            return Err(Error::Invalid("transition target out of range".into()));
        }
        Ok(Dfa {
            alphabet,
            labels,
            delta,
            initial,
            marked,
        })
    }

    pub fn builder(alphabet: Alphabet) -> DfaBuilder {
        DfaBuilder::new(alphabet)
    }

    /// Prefix-closed plant: every state marked.
    pub fn plant(alphabet: Alphabet, initial: &str, edges: &[(&str, &str, &str)]) -> Result<Self> {
        let mut b = DfaBuilder::new(alphabet);
        b.state(initial);
        for &(s, e, t) in edges {
            b.edge(s, e, t)?;
        }
        b.initial(initial);
        b.mark_all();
        b.build()
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn n_states(&self) -> usize {
        self.labels.len()
    }

    pub fn states(&self) -> std::ops::Range<StateId> {
        0..self.labels.len()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn label(&self, q: StateId) -> &str {
        &self.labels[q]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn state_by_label(&self, label: &str) -> Option<StateId> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn is_marked(&self, q: StateId) -> bool {
        self.marked[q]
    }

    pub fn marking(&self) -> &[bool] {
        &self.marked
    }

    pub fn marked_states(&self) -> Vec<StateId> {
        self.states().filter(|&q| self.marked[q]).collect()
    }

    pub fn next(&self, q: StateId, e: EventId) -> Option<StateId> {
        self.delta[q * self.alphabet.len() + e]
    }

    /// Outgoing transitions of `q` in event order.
    pub fn successors(&self, q: StateId) -> impl Iterator<Item = (EventId, StateId)> + '_ {
        let m = self.alphabet.len();
        self.delta[q * m..(q + 1) * m]
            .iter()
            .enumerate()
            .filter_map(|(e, t)| t.map(|t| (e, t)))
    }

    /// All transitions `(source, event, target)` in (source, event) order.
    pub fn transitions(&self) -> impl Iterator<Item = (StateId, EventId, StateId)> + '_ {
        self.states()
            .flat_map(move |q| self.successors(q).map(move |(e, t)| (q, e, t)))
    }

    pub fn n_transitions(&self) -> usize {
        self.delta.iter().flatten().count()
    }

    pub fn run(&self, word: &[EventId]) -> Option<StateId> {
        let mut q = self.initial;
        for &e in word {
            q = self.next(q, e)?;
        }
        Some(q)
    }

    /// Membership in the marked language.
    pub fn accepts(&self, word: &[EventId]) -> bool {
        self.run(word).is_some_and(|q| self.marked[q])
    }

    /// Membership in the generated language.
    pub fn generates(&self, word: &[EventId]) -> bool {
        self.run(word).is_some()
    }

    pub fn accepts_names(&self, names: &[&str]) -> bool {
        match self.alphabet.word(names) {
            Ok(w) => self.accepts(&w),
            Err(_) => false,
        }
    }

    pub fn generates_names(&self, names: &[&str]) -> bool {
        match self.alphabet.word(names) {
            Ok(w) => self.generates(&w),
            Err(_) => false,
        }
    }

    pub fn with_marking(&self, marked: Vec<bool>) -> Dfa {
        assert_eq!(marked.len(), self.n_states());
        Dfa {
            marked,
            ..self.clone()
        }
    }

    pub fn with_labels(&self, labels: Vec<String>) -> Dfa {
        assert_eq!(labels.len(), self.n_states());
        Dfa {
            labels,
            ..self.clone()
        }
    }

    pub fn mark_all(&self) -> Dfa {
        self.with_marking(vec![true; self.n_states()])
    }

    /// Same automaton over a different alphabet containing every event of this one.
    pub fn over_alphabet(&self, alphabet: &Alphabet) -> Result<Dfa> {
        let mut map = Vec::with_capacity(self.alphabet.len());
        for e in self.alphabet.events() {
            let id = alphabet.id(&e.name).ok_or(Error::AlphabetMismatch)?;
            if alphabet.event(id) != e {
                return Err(Error::AttributeConflict(e.name.clone()));
            }
            map.push(id);
        }
        let m = alphabet.len();
        let mut delta = vec![None; self.n_states() * m];
        for (q, e, t) in self.transitions() {
            delta[q * m + map[e]] = Some(t);
        }
        Ok(Dfa {
            alphabet: alphabet.clone(),
            labels: self.labels.clone(),
            delta,
            initial: self.initial,
            marked: self.marked.clone(),
        })
    }

    /// Sub-automaton induced by `keep`, renumbered in id order. The initial state must be kept.
    /// Returns the automaton and the old id of each new state.
    pub fn induced(&self, keep: &[bool]) -> (Dfa, Vec<StateId>) {
        assert!(keep[self.initial], "initial state must be kept");
        let old: Vec<StateId> = self.states().filter(|&q| keep[q]).collect();
        let mut new_id = vec![usize::MAX; self.n_states()];
        for (i, &q) in old.iter().enumerate() {
            new_id[q] = i;
        }
        let m = self.alphabet.len();
        let mut delta = vec![None; old.len() * m];
        for (i, &q) in old.iter().enumerate() {
            for (e, t) in self.successors(q) {
                if keep[t] {
                    delta[i * m + e] = Some(new_id[t]);
                }
            }
        }
        let d = Dfa {
            alphabet: self.alphabet.clone(),
            labels: old.iter().map(|&q| self.labels[q].clone()).collect(),
            delta,
            initial: new_id[self.initial],
            marked: old.iter().map(|&q| self.marked[q]).collect(),
        };
        (d, old)
    }

    /// States reachable from the initial state, as a mask.
    pub fn reachable_mask(&self) -> Vec<bool> {
        let mut seen = vec![false; self.n_states()];
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial] = true;
        while let Some(q) = queue.pop_front() {
            for (_, t) in self.successors(q) {
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
        seen
    }

    /// States from which some state in `targets` is reachable (inclusive).
    pub fn coreachable_mask(&self, targets: &[bool]) -> Vec<bool> {
        let preds = self.predecessors();
        let mut seen = targets.to_vec();
        let mut stack: Vec<StateId> = self.states().filter(|&q| targets[q]).collect();
        while let Some(q) = stack.pop() {
            for &(p, _) in &preds[q] {
                if !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        seen
    }

    /// For every state, the incoming `(source, event)` pairs.
    pub fn predecessors(&self) -> Vec<Vec<(StateId, EventId)>> {
        let mut preds = vec![Vec::new(); self.n_states()];
        for (q, e, t) in self.transitions() {
            preds[t].push((q, e));
        }
        preds
    }

    /// BFS from the initial state; for each state the (parent, event) that first reached it.
    pub fn bfs_tree(&self) -> Vec<Option<(StateId, EventId)>> {
        let mut parent = vec![None; self.n_states()];
        let mut seen = vec![false; self.n_states()];
        seen[self.initial] = true;
        let mut queue = VecDeque::from([self.initial]);
        while let Some(q) = queue.pop_front() {
            for (e, t) in self.successors(q) {
                if !seen[t] {
                    seen[t] = true;
                    parent[t] = Some((q, e));
                    queue.push_back(t);
                }
            }
        }
        parent
    }

    /// Shortest word (BFS, event order tie-break) from the initial state to a state satisfying `goal`.
    pub fn shortest_word_to(&self, goal: impl Fn(StateId) -> bool) -> Option<Vec<EventId>> {
        let parent = self.bfs_tree();
        let reach = self.reachable_mask();
        // BFS order gives shortest; pick the first goal state in BFS discovery order.
        let mut order = Vec::new();
        let mut seen = vec![false; self.n_states()];
        seen[self.initial] = true;
        let mut queue = VecDeque::from([self.initial]);
        while let Some(q) = queue.pop_front() {
            order.push(q);
            for (_, t) in self.successors(q) {
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
        let target = order.into_iter().find(|&q| reach[q] && goal(q))?;
        let mut word = Vec::new();
        let mut q = target;
        while let Some((p, e)) = parent[q] {
            word.push(e);
            q = p;
        }
        word.reverse();
        Some(word)
    }
}

impl fmt::Display for Dfa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "initial {}", self.labels[self.initial])?;
        for (q, e, t) in self.transitions() {
            writeln!(f, "{} -{}-> {}", self.labels[q], self.alphabet.name(e), self.labels[t])?;
        }
        let marked: Vec<&str> = self.marked_states().iter().map(|&q| self.label(q)).collect();
        write!(f, "marked {{{}}}", marked.join(","))
    }
}

/// Incremental construction of a [`Dfa`] by state labels and event names.
pub struct DfaBuilder {
    alphabet: Alphabet,
    labels: Vec<String>,
    index: HashMap<String, StateId>,
    edges: Vec<(StateId, EventId, StateId)>,
    marked: Vec<StateId>,
    all_marked: bool,
    initial: Option<StateId>,
}

impl DfaBuilder {
    pub fn new(alphabet: Alphabet) -> Self {
        DfaBuilder {
            alphabet,
            labels: Vec::new(),
            index: HashMap::new(),
            edges: Vec::new(),
            marked: Vec::new(),
            all_marked: false,
            initial: None,
        }
    }

    /// Get or create a state.
    pub fn state(&mut self, label: &str) -> StateId {
        if let Some(&q) = self.index.get(label) {
            return q;
        }
        let q = self.labels.len();
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), q);
        q
    }

    pub fn edge(&mut self, source: &str, event: &str, target: &str) -> Result<&mut Self> {
        let e = self
            .alphabet
            .id(event)
            .ok_or_else(|| Error::Invalid(format!("unknown event `{event}`")))?;
        let s = self.state(source);
        let t = self.state(target);
        self.edges.push((s, e, t));
        Ok(self)
    }

    pub fn initial(&mut self, label: &str) -> &mut Self {
        let q = self.state(label);
        self.initial = Some(q);
        self
    }

    pub fn mark(&mut self, label: &str) -> &mut Self {
        let q = self.state(label);
        self.marked.push(q);
        self
    }

    pub fn mark_all(&mut self) -> &mut Self {
        self.all_marked = true;
        self
    }

    pub fn build(&self) -> Result<Dfa> {
        let initial = self
            .initial
            .ok_or_else(|| Error::Invalid("no initial state".into()))?;
        let m = self.alphabet.len();
        let n = self.labels.len();
        let mut delta = vec![None; n * m];
        for &(s, e, t) in &self.edges {
            let slot = &mut delta[s * m + e];
            match slot {
                Some(prev) if *prev != t => {
                    return Err(Error::Invalid(format!(
                        "nondeterministic transition from `{}` on `{}`",
                        self.labels[s],
                        self.alphabet.name(e)
                    )))
                }
                _ => *slot = Some(t),
            }
        }
        let mut marked = vec![self.all_marked; n];
        for &q in &self.marked {
            marked[q] = true;
        }
        Dfa::from_parts(self.alphabet.clone(), self.labels.clone(), delta, initial, marked)
    }
}

/// Sub-automaton of states reachable from the initial state.
pub fn accessible(d: &Dfa) -> Dfa {
    let reach = d.reachable_mask();
    renumber_bfs(&d.induced(&reach).0)
}

/// Renumber states in BFS discovery order. Assumes every state is reachable.
fn renumber_bfs(d: &Dfa) -> Dfa {
    let mut order = Vec::with_capacity(d.n_states());
    let mut new_id = vec![usize::MAX; d.n_states()];
    new_id[d.initial] = 0;
    order.push(d.initial);
    let mut head = 0;
    while head < order.len() {
        let q = order[head];
        head += 1;
        for (_, t) in d.successors(q) {
            if new_id[t] == usize::MAX {
                new_id[t] = order.len();
                order.push(t);
            }
        }
    }
    let m = d.alphabet.len();
    let mut delta = vec![None; order.len() * m];
    for (i, &q) in order.iter().enumerate() {
        for (e, t) in d.successors(q) {
            delta[i * m + e] = Some(new_id[t]);
        }
    }
    Dfa {
        alphabet: d.alphabet.clone(),
        labels: order.iter().map(|&q| d.labels[q].clone()).collect(),
        delta,
        initial: 0,
        marked: order.iter().map(|&q| d.marked[q]).collect(),
    }
}

/// Accessible and co-accessible part. With no marked reachable state the result is the bare initial state.
pub fn trim(d: &Dfa) -> Dfa {
    let acc = accessible(d);
    let co = acc.coreachable_mask(acc.marking());
    if !co[acc.initial] {
        let mut lone = vec![false; acc.n_states()];
        lone[acc.initial] = true;
        let (mut out, _) = acc.induced(&lone);
        out.marked = vec![false];
        return out;
    }
    renumber_bfs(&acc.induced(&co).0)
}

/// Every state has at least one outgoing transition.
pub fn is_live(d: &Dfa) -> bool {
    d.states().all(|q| d.successors(q).next().is_some())
}

/// No cycle made of unobservable transitions.
pub fn is_convergent(d: &Dfa) -> bool {
    let obs = d.alphabet.observable_mask();
    !has_cycle(d.n_states(), |q| {
        d.successors(q)
            .filter(|&(e, _)| !obs[e])
            .map(|(_, t)| t)
            .collect()
    })
}

/// Cycle detection on a graph given by a successor function (iterative DFS).
pub(crate) fn has_cycle(n: usize, succ: impl Fn(usize) -> Vec<usize>) -> bool {
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut color = vec![0u8; n];
    for root in 0..n {
        if color[root] != 0 {
            continue;
        }
        let mut stack: Vec<(usize, Vec<usize>, usize)> = vec![(root, succ(root), 0)];
        color[root] = 1;
        while let Some((v, next, i)) = stack.last_mut() {
            if *i < next.len() {
                let w = next[*i];
                *i += 1;
                match color[w] {
                    0 => {
                        color[w] = 1;
                        let s = succ(w);
                        stack.push((w, s, 0));
                    }
                    1 => return true,
                    _ => {}
                }
            } else {
                color[*v] = 2;
                stack.pop();
            }
        }
    }
    false
}

/// Completion with a non-marked sink, added only when some transition is missing.
pub(crate) fn complete(d: &Dfa) -> Dfa {
    if d.delta.iter().all(Option::is_some) {
        return d.clone();
    }
    let m = d.alphabet.len();
    let n = d.n_states();
    let sink = n;
    let mut delta: Vec<Option<StateId>> = d.delta.iter().map(|t| Some(t.unwrap_or(sink))).collect();
    delta.extend(std::iter::repeat_n(Some(sink), m));
    let mut labels = d.labels.clone();
    labels.push("⊥".to_string());
    let mut marked = d.marked.clone();
    marked.push(false);
    Dfa {
        alphabet: d.alphabet.clone(),
        labels,
        delta,
        initial: d.initial,
        marked,
    }
}

/// Product over a common alphabet: marked language is the intersection.
pub fn product(a: &Dfa, b: &Dfa) -> Result<Dfa> {
    product_with(a, b, |x, y| x && y)
}

/// Product of two automata over one alphabet, exploring reachable pairs only.
/// Transitions exist where both operands have one; marking combines through `mark`.
pub(crate) fn product_with(a: &Dfa, b: &Dfa, mark: impl Fn(bool, bool) -> bool) -> Result<Dfa> {
    if a.alphabet != b.alphabet {
        return Err(Error::AlphabetMismatch);
    }
    let m = a.alphabet.len();
    let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
    let mut pairs = vec![(a.initial, b.initial)];
    index.insert((a.initial, b.initial), 0);
    let mut delta = Vec::new();
    let mut head = 0;
    while head < pairs.len() {
        let (p, q) = pairs[head];
        head += 1;
        for e in 0..m {
            let t = match (a.next(p, e), b.next(q, e)) {
                (Some(x), Some(y)) => {
                    let next_id = pairs.len();
                    let id = *index.entry((x, y)).or_insert_with(|| {
                        pairs.push((x, y));
                        next_id
                    });
                    Some(id)
                }
                _ => None,
            };
            delta.push(t);
        }
    }
    let labels = pairs
        .iter()
        .map(|&(p, q)| format!("({},{})", a.labels[p], b.labels[q]))
        .collect();
    let marked = pairs.iter().map(|&(p, q)| mark(a.marked[p], b.marked[q])).collect();
    Ok(Dfa {
        alphabet: a.alphabet.clone(),
        labels,
        delta,
        initial: 0,
        marked,
    })
}

/// Checks the shared-event hypotheses of a synchronous product and returns the union alphabet.
pub fn compose_alphabets(ds: &[&Alphabet]) -> Result<Alphabet> {
    for (i, a) in ds.iter().enumerate() {
        for b in &ds[i + 1..] {
            for e in a.events() {
                if let Some(j) = b.id(&e.name) {
                    let f = b.event(j);
                    if f.observable != e.observable {
                        return Err(Error::ObservabilityIncompatibility(e.name.clone()));
                    }
                    if f != e {
                        return Err(Error::AttributeConflict(e.name.clone()));
                    }
                }
            }
        }
    }
    Alphabet::union(ds.iter().copied())
}

/// Synchronous product: components move together on shared events and alone on private ones.
pub fn sync_product(ds: &[Dfa]) -> Result<Dfa> {
    sync_product_bounded(ds, usize::MAX)
}

/// [`sync_product`] that fails with `ProductTooLarge` once more than `budget` states are built.
pub fn sync_product_bounded(ds: &[Dfa], budget: usize) -> Result<Dfa> {
    if ds.is_empty() {
        return Err(Error::Invalid("empty product".into()));
    }
    let alphabets: Vec<&Alphabet> = ds.iter().map(|d| &d.alphabet).collect();
    let sigma = compose_alphabets(&alphabets)?;
    let m = sigma.len();
    // local[i][e] = local id of global event e in component i
    let local: Vec<Vec<Option<EventId>>> = ds
        .iter()
        .map(|d| sigma.events().iter().map(|e| d.alphabet.id(&e.name)).collect())
        .collect();
    let init: Vec<StateId> = ds.iter().map(|d| d.initial).collect();
    let mut index: HashMap<Vec<StateId>, StateId> = HashMap::new();
    index.insert(init.clone(), 0);
    let mut tuples = vec![init];
    let mut delta = Vec::new();
    let mut head = 0;
    while head < tuples.len() {
        let cur = tuples[head].clone();
        head += 1;
        'ev: for e in 0..m {
            let mut next = cur.clone();
            for (i, d) in ds.iter().enumerate() {
                if let Some(le) = local[i][e] {
                    match d.next(cur[i], le) {
                        Some(t) => next[i] = t,
                        None => {
                            delta.push(None);
                            continue 'ev;
                        }
                    }
                }
            }
            let id = match index.get(&next) {
                Some(&id) => id,
                None => {
                    let id = tuples.len();
                    if id >= budget {
                        return Err(Error::ProductTooLarge(budget));
                    }
                    index.insert(next.clone(), id);
                    tuples.push(next);
                    id
                }
            };
            delta.push(Some(id));
        }
    }
    let labels = tuples
        .iter()
        .map(|t| {
            let parts: Vec<&str> = t.iter().zip(ds).map(|(&q, d)| d.label(q)).collect();
            format!("({})", parts.join(","))
        })
        .collect();
    let marked = tuples
        .iter()
        .map(|t| t.iter().zip(ds).all(|(&q, d)| d.marked[q]))
        .collect();
    Ok(Dfa {
        alphabet: sigma,
        labels,
        delta,
        initial: 0,
        marked,
    })
}

/// Subset construction after erasing the events not in `keep`.
///
/// Returns the deterministic automaton over the kept sub-alphabet and, for each of its
/// states, the sorted set of source states it stands for. A state is marked when any member is.
pub(crate) fn subset_construction(
    d: &Dfa,
    keep: &[bool],
    start: &[StateId],
) -> (Dfa, Vec<Vec<StateId>>) {
    let target = d.alphabet.restrict(keep);
    let kept: Vec<EventId> = d.alphabet.ids().filter(|&e| keep[e]).collect();
    let closure = |set: &mut Vec<StateId>| {
        let mut inside = vec![false; d.n_states()];
        for &q in set.iter() {
            inside[q] = true;
        }
        let mut stack = set.clone();
        while let Some(q) = stack.pop() {
            for (e, t) in d.successors(q) {
                if !keep[e] && !inside[t] {
                    inside[t] = true;
                    stack.push(t);
                }
            }
        }
        *set = (0..d.n_states()).filter(|&q| inside[q]).collect();
    };
    let mut first = start.to_vec();
    closure(&mut first);
    let mut index: HashMap<Vec<StateId>, StateId> = HashMap::new();
    index.insert(first.clone(), 0);
    let mut cells = vec![first];
    let mut delta = Vec::new();
    let mut head = 0;
    while head < cells.len() {
        let cell = cells[head].clone();
        head += 1;
        for &e in &kept {
            let mut next: Vec<StateId> = cell.iter().filter_map(|&q| d.next(q, e)).collect();
            if next.is_empty() {
                delta.push(None);
                continue;
            }
            next.sort_unstable();
            next.dedup();
            closure(&mut next);
            let id = match index.get(&next) {
                Some(&id) => id,
                None => {
                    let id = cells.len();
                    index.insert(next.clone(), id);
                    cells.push(next);
                    id
                }
            };
            delta.push(Some(id));
        }
    }
    let labels = cells.iter().map(|c| cell_label(d, c)).collect();
    let marked = cells.iter().map(|c| c.iter().any(|&q| d.marked[q])).collect();
    let out = Dfa {
        alphabet: target,
        labels,
        delta,
        initial: 0,
        marked,
    };
    (out, cells)
}

pub(crate) fn cell_label(d: &Dfa, cell: &[StateId]) -> String {
    let names: Vec<&str> = cell.iter().map(|&q| d.label(q)).collect();
    format!("{{{}}}", names.join(","))
}

/// Minimal complete automaton for the marked language (Moore refinement).
/// States are numbered in BFS order and labelled by their index.
pub fn minimize(d: &Dfa) -> Dfa {
    let c = complete(&accessible(d));
    let n = c.n_states();
    let m = c.alphabet.len();
    let mut block: Vec<usize> = c.marked.iter().map(|&x| usize::from(x)).collect();
    let mut n_blocks = 0;
    loop {
        let mut sig_index: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut next_block = vec![0; n];
        for q in 0..n {
            let mut sig = Vec::with_capacity(m + 1);
            sig.push(block[q]);
            for e in 0..m {
                sig.push(block[c.next(q, e).expect("complete")]);
            }
            let k = sig_index.len();
            next_block[q] = *sig_index.entry(sig).or_insert(k);
        }
        let count = sig_index.len();
        block = next_block;
        if count == n_blocks {
            break;
        }
        n_blocks = count;
    }
    let mut delta = vec![None; n_blocks * m];
    let mut marked = vec![false; n_blocks];
    for q in 0..n {
        marked[block[q]] = c.marked[q];
        for e in 0..m {
            delta[block[q] * m + e] = Some(block[c.next(q, e).expect("complete")]);
        }
    }
    let raw = Dfa {
        alphabet: c.alphabet.clone(),
        labels: (0..n_blocks).map(|b| b.to_string()).collect(),
        delta,
        initial: block[c.initial],
        marked,
    };
    let out = renumber_bfs(&raw);
    let labels = (0..out.n_states()).map(|i| i.to_string()).collect();
    out.with_labels(labels)
}

/// Breadth-first search over pairs of (possibly absent) states of two automata over one alphabet.
/// Returns a shortest word reaching a pair on which `bad` holds.
fn pair_search(
    a: &Dfa,
    b: &Dfa,
    bad: impl Fn(Option<StateId>, Option<StateId>) -> bool,
) -> Option<Vec<EventId>> {
    type P = (Option<StateId>, Option<StateId>);
    let start: P = (Some(a.initial), Some(b.initial));
    let mut parent: HashMap<P, Option<(P, EventId)>> = HashMap::new();
    parent.insert(start, None);
    let mut queue = VecDeque::from([start]);
    while let Some(p) = queue.pop_front() {
        if bad(p.0, p.1) {
            let mut word = Vec::new();
            let mut cur = p;
            while let Some(Some((prev, e))) = parent.get(&cur) {
                word.push(*e);
                cur = *prev;
            }
            word.reverse();
            return Some(word);
        }
        for e in 0..a.alphabet.len() {
            let x = p.0.and_then(|q| a.next(q, e));
            let y = p.1.and_then(|q| b.next(q, e));
            if x.is_none() && y.is_none() {
                continue;
            }
            let n = (x, y);
            if let std::collections::hash_map::Entry::Vacant(v) = parent.entry(n) {
                v.insert(Some((p, e)));
                queue.push_back(n);
            }
        }
    }
    None
}

fn marked_at(d: &Dfa, q: Option<StateId>) -> bool {
    q.is_some_and(|q| d.marked[q])
}

/// Marked-language equality.
pub fn is_language_equal(a: &Dfa, b: &Dfa) -> Result<bool> {
    Ok(language_difference_witness(a, b)?.is_none())
}

/// A shortest word in exactly one of the two marked languages, if any.
pub fn language_difference_witness(a: &Dfa, b: &Dfa) -> Result<Option<Vec<EventId>>> {
    if a.alphabet != b.alphabet {
        return Err(Error::AlphabetMismatch);
    }
    Ok(pair_search(a, b, |x, y| marked_at(a, x) != marked_at(b, y)))
}

/// Marked-language inclusion `L_m(a) ⊆ L_m(b)`.
pub fn is_language_included(a: &Dfa, b: &Dfa) -> Result<bool> {
    if a.alphabet != b.alphabet {
        return Err(Error::AlphabetMismatch);
    }
    Ok(pair_search(a, b, |x, y| marked_at(a, x) && !marked_at(b, y)).is_none())
}

/// Generated-language equality.
pub fn is_generated_equal(a: &Dfa, b: &Dfa) -> Result<bool> {
    if a.alphabet != b.alphabet {
        return Err(Error::AlphabetMismatch);
    }
    Ok(pair_search(a, b, |x, y| x.is_some() != y.is_some()).is_none())
}

/// The marked language is empty.
pub fn is_empty(d: &Dfa) -> bool {
    let reach = d.reachable_mask();
    !d.states().any(|q| reach[q] && d.marked[q])
}

/// The marked language is finite: no cycle on the trim part.
pub fn is_finite(d: &Dfa) -> bool {
    let t = trim(d);
    if is_empty(&t) {
        return true;
    }
    !has_cycle(t.n_states(), |q| t.successors(q).map(|(_, s)| s).collect())
}

/// Structural isomorphism of the accessible parts (labels ignored, markings compared).
pub fn is_isomorphic(a: &Dfa, b: &Dfa) -> bool {
    if a.alphabet != b.alphabet {
        return false;
    }
    let mut map_ab: HashMap<StateId, StateId> = HashMap::new();
    let mut map_ba: HashMap<StateId, StateId> = HashMap::new();
    let mut queue = VecDeque::from([(a.initial, b.initial)]);
    map_ab.insert(a.initial, b.initial);
    map_ba.insert(b.initial, a.initial);
    while let Some((p, q)) = queue.pop_front() {
        if a.marked[p] != b.marked[q] {
            return false;
        }
        for e in a.alphabet.ids() {
            match (a.next(p, e), b.next(q, e)) {
                (None, None) => {}
                (Some(x), Some(y)) => match (map_ab.get(&x), map_ba.get(&y)) {
                    (None, None) => {
                        map_ab.insert(x, y);
                        map_ba.insert(y, x);
                        queue.push_back((x, y));
                    }
                    (Some(&y2), Some(&x2)) if y2 == y && x2 == x => {}
                    _ => return false,
                },
                _ => return false,
            }
        }
    }
    map_ab.len() == a.reachable_mask().iter().filter(|&&r| r).count()
        && map_ba.len() == b.reachable_mask().iter().filter(|&&r| r).count()
}

/// State-partition refinement `accessible(G ∥ Obs(G))` with provenance.
#[derive(Clone, Debug)]
pub struct SpaRefinement {
    /// The refined automaton. Labels are the original labels, primed for second and later copies.
    pub dfa: Dfa,
    /// Original state of each refined state.
    pub origin: Vec<StateId>,
    /// Observer cell (original states) of each refined state.
    pub cell: Vec<Vec<StateId>>,
}

/// Refines `g` so that its observer cells are pairwise equal or disjoint.
pub fn spa_refine(g: &Dfa) -> Dfa {
    spa_refine_detailed(g).dfa
}

pub fn spa_refine_detailed(g: &Dfa) -> SpaRefinement {
    let obs_mask = g.alphabet.observable_mask();
    let (obs, cells) = subset_construction(g, &obs_mask, &[g.initial]);
    let obs_id: Vec<Option<EventId>> = {
        let mut k = 0;
        obs_mask
            .iter()
            .map(|&o| {
                if o {
                    k += 1;
                    Some(k - 1)
                } else {
                    None
                }
            })
            .collect()
    };
    let m = g.alphabet.len();
    let start = (g.initial, obs.initial);
    let mut index: HashMap<(StateId, StateId), StateId> = HashMap::from([(start, 0)]);
    let mut pairs = vec![start];
    let mut delta = Vec::new();
    let mut head = 0;
    while head < pairs.len() {
        let (q, y) = pairs[head];
        head += 1;
        for e in 0..m {
            let t = g.next(q, e).map(|t| {
                let y2 = match obs_id[e] {
                    Some(oe) => obs.next(y, oe).expect("observer covers plant moves"),
                    None => y,
                };
                let next_id = pairs.len();
                *index.entry((t, y2)).or_insert_with(|| {
                    pairs.push((t, y2));
                    next_id
                })
            });
            delta.push(t);
        }
    }
    let origin: Vec<StateId> = pairs.iter().map(|&(q, _)| q).collect();
    let labels = primed_labels(g, &origin);
    let dfa = Dfa {
        alphabet: g.alphabet.clone(),
        labels,
        delta,
        initial: 0,
        marked: origin.iter().map(|&q| g.marked[q]).collect(),
    };
    let cell = pairs.iter().map(|&(_, y)| cells[y].clone()).collect();
    SpaRefinement { dfa, origin, cell }
}

/// Original labels with one prime per earlier copy of the same original state.
pub(crate) fn primed_labels(g: &Dfa, origin: &[StateId]) -> Vec<String> {
    let mut copies = vec![0usize; g.n_states()];
    origin
        .iter()
        .map(|&q| {
            let l = format!("{}{}", g.label(q), "'".repeat(copies[q]));
            copies[q] += 1;
            l
        })
        .collect()
}

/// Strict sub-automaton test, matching states by label.
///
/// (1) the initial states agree and every transition of `h` exists in `g` between the same labels;
/// (2) every transition of `g` between two states retained in `h` is present in `h`.
pub fn is_strict_subautomaton(h: &Dfa, g: &Dfa) -> bool {
    if h.alphabet != g.alphabet {
        return false;
    }
    let mut to_g = Vec::with_capacity(h.n_states());
    for l in &h.labels {
        match g.state_by_label(l) {
            Some(q) => to_g.push(q),
            None => return false,
        }
    }
    if to_g[h.initial] != g.initial {
        return false;
    }
    let mut retained = vec![None; g.n_states()];
    for (x, &q) in to_g.iter().enumerate() {
        retained[q] = Some(x);
    }
    for x in h.states() {
        for e in h.alphabet.ids() {
            let gt = g.next(to_g[x], e);
            match h.next(x, e) {
                Some(y) => {
                    if gt != Some(to_g[y]) {
                        return false;
                    }
                }
                None => {
                    if gt.is_some_and(|t| retained[t].is_some()) {
                        return false;
                    }
                }
            }
        }
    }
    true
}
