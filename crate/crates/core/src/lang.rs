//! Language operations on recognizers and the observation-based predicates.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::automata::{
    accessible, complete, product_with, subset_construction, Alphabet, Dfa, EventId, StateId,
};
use crate::error::{Error, Result};

/// A regular language, optionally tied to the plant it is a sublanguage of.
///
/// With a plant, the recognizer generates exactly `L(plant)` and marks the strings in the
/// language, so membership of every plant string is decided by the state it reaches.
#[derive(Clone, Debug)]
pub struct LangRef {
    recognizer: Dfa,
    plant: Option<Arc<Dfa>>,
}

impl LangRef {
    /// A language with no plant: the marked language of `d`.
    pub fn free(d: Dfa) -> LangRef {
        LangRef {
            recognizer: d,
            plant: None,
        }
    }

    /// `L_m(d) ∩ L(plant)` as a sublanguage of `plant`.
    pub fn within(plant: &Arc<Dfa>, d: &Dfa) -> Result<LangRef> {
        let d = if d.alphabet() == plant.alphabet() {
            d.clone()
        } else {
            d.over_alphabet(plant.alphabet())?
        };
        let r = accessible(&product_with(plant, &complete(&d), |_, y| y)?);
        Ok(LangRef {
            recognizer: r,
            plant: Some(plant.clone()),
        })
    }

    /// The generated language of `plant`.
    pub fn plant_language(plant: &Arc<Dfa>) -> LangRef {
        LangRef {
            recognizer: accessible(&plant.mark_all()),
            plant: Some(plant.clone()),
        }
    }

    /// The empty sublanguage of `plant`.
    pub fn empty_within(plant: &Arc<Dfa>) -> LangRef {
        let r = accessible(plant);
        let n = r.n_states();
        LangRef {
            recognizer: r.with_marking(vec![false; n]),
            plant: Some(plant.clone()),
        }
    }

    /// Wraps a recognizer already shaped like `plant` (generated language equal to `L(plant)`).
    pub(crate) fn shaped(plant: &Arc<Dfa>, recognizer: Dfa) -> LangRef {
        LangRef {
            recognizer,
            plant: Some(plant.clone()),
        }
    }

    fn remark(&self, marked: Vec<bool>) -> LangRef {
        LangRef {
            recognizer: self.recognizer.with_marking(marked),
            plant: self.plant.clone(),
        }
    }

    pub fn recognizer(&self) -> &Dfa {
        &self.recognizer
    }

    pub fn plant(&self) -> Option<&Arc<Dfa>> {
        self.plant.as_ref()
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.recognizer.alphabet()
    }

    pub fn contains(&self, word: &[EventId]) -> bool {
        self.recognizer.accepts(word)
    }

    pub fn contains_names(&self, names: &[&str]) -> bool {
        self.recognizer.accepts_names(names)
    }

    pub fn is_empty(&self) -> bool {
        crate::automata::is_empty(&self.recognizer)
    }
}

/// Natural projection onto a subset of events.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Projection {
    /// Onto the observable events of whatever alphabet it is applied to.
    Observable,
    /// Onto the named events.
    Onto(BTreeSet<String>),
}

impl Projection {
    pub fn onto<'a>(names: impl IntoIterator<Item = &'a str>) -> Projection {
        Projection::Onto(names.into_iter().map(String::from).collect())
    }

    /// Which events of `a` are kept.
    pub fn mask(&self, a: &Alphabet) -> Vec<bool> {
        match self {
            Projection::Observable => a.observable_mask(),
            Projection::Onto(names) => a.events().iter().map(|e| names.contains(&e.name)).collect(),
        }
    }

    pub fn apply(&self, a: &Alphabet, word: &[EventId]) -> Vec<EventId> {
        let keep = self.mask(a);
        word.iter().copied().filter(|&e| keep[e]).collect()
    }
}

/// A counterexample: two strings and what they violate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub s: Vec<String>,
    pub t: Vec<String>,
    /// Observations of `s` and `t`.
    pub ps: Vec<String>,
    pub pt: Vec<String>,
    pub note: String,
}

impl Witness {
    pub fn new(a: &Alphabet, s: &[EventId], t: &[EventId], note: impl Into<String>) -> Witness {
        Witness {
            s: a.names(s),
            t: a.names(t),
            ps: a.names(&a.project_word(s)),
            pt: a.names(&a.project_word(t)),
            note: note.into(),
        }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |w: &[String]| {
            if w.is_empty() {
                "ε".to_string()
            } else {
                w.join(" ")
            }
        };
        write!(
            f,
            "s = {}, P(s) = {}, t = {}, P(t) = {} ({})",
            show(&self.s),
            show(&self.ps),
            show(&self.t),
            show(&self.pt),
            self.note
        )
    }
}

fn require_same_plant(a: &LangRef, b: &LangRef) -> Result<()> {
    match (&a.plant, &b.plant) {
        (Some(p), Some(q)) if Arc::ptr_eq(p, q) || **p == **q => Ok(()),
        (None, None) if a.alphabet() == b.alphabet() => Ok(()),
        _ => Err(Error::AlphabetMismatch),
    }
}

/// Boolean combination of two languages over the same plant (or both free).
pub fn combine(a: &LangRef, b: &LangRef, op: impl Fn(bool, bool) -> bool) -> Result<LangRef> {
    require_same_plant(a, b)?;
    let r = match &a.plant {
        Some(_) => product_with(&a.recognizer, &b.recognizer, op)?,
        None => product_with(&complete(&a.recognizer), &complete(&b.recognizer), op)?,
    };
    Ok(LangRef {
        recognizer: r,
        plant: a.plant.clone(),
    })
}

pub fn language_union(a: &LangRef, b: &LangRef) -> Result<LangRef> {
    combine(a, b, |x, y| x || y)
}

pub fn language_intersection(a: &LangRef, b: &LangRef) -> Result<LangRef> {
    combine(a, b, |x, y| x && y)
}

pub fn language_difference(a: &LangRef, b: &LangRef) -> Result<LangRef> {
    combine(a, b, |x, y| x && !y)
}

/// `L(plant) \ L_m(m)`. A free language is complemented within `Σ*`.
pub fn complement_within(m: &LangRef) -> LangRef {
    match &m.plant {
        Some(_) => {
            let marked = m.recognizer.marking().iter().map(|&x| !x).collect();
            m.remark(marked)
        }
        None => {
            let c = complete(&m.recognizer);
            let marked = c.marking().iter().map(|&x| !x).collect();
            LangRef::free(c.with_marking(marked))
        }
    }
}

/// Prefix closure: mark every reachable state that can reach a marked state.
pub fn prefix_closure(m: &LangRef) -> LangRef {
    let r = &m.recognizer;
    let reach = r.reachable_mask();
    let co = r.coreachable_mask(r.marking());
    m.remark(reach.iter().zip(&co).map(|(&a, &b)| a && b).collect())
}

/// The largest prefix-closed subset: strings all of whose prefixes are in the language.
pub fn supremal_prefix_closed_subset(m: &LangRef) -> LangRef {
    let r = &m.recognizer;
    let mut keep = vec![false; r.n_states()];
    if r.is_marked(r.initial()) {
        keep[r.initial()] = true;
        let mut queue = VecDeque::from([r.initial()]);
        while let Some(q) = queue.pop_front() {
            for (_, t) in r.successors(q) {
                if r.is_marked(t) && !keep[t] {
                    keep[t] = true;
                    queue.push_back(t);
                }
            }
        }
    }
    m.remark(keep)
}

/// `L_m(m)·Σ* ∩ L(plant)`: mark everything reachable from a marked state.
pub fn concat_sigma_star_within(m: &LangRef) -> LangRef {
    let base = match &m.plant {
        Some(_) => m.clone(),
        None => LangRef::free(complete(&m.recognizer)),
    };
    let r = &base.recognizer;
    let reach = r.reachable_mask();
    let mut marked = vec![false; r.n_states()];
    let mut stack: Vec<StateId> = r.states().filter(|&q| reach[q] && r.is_marked(q)).collect();
    for &q in &stack {
        marked[q] = true;
    }
    while let Some(q) = stack.pop() {
        for (_, t) in r.successors(q) {
            if !marked[t] {
                marked[t] = true;
                stack.push(t);
            }
        }
    }
    base.remark(marked)
}

/// Whether `K·Σ* ∩ L ⊆ K` where `L` is the plant language.
pub fn is_extension_closed(k: &LangRef) -> bool {
    let r = &k.recognizer;
    let reach = r.reachable_mask();
    r.states()
        .filter(|&q| reach[q] && r.is_marked(q))
        .all(|q| r.successors(q).all(|(_, t)| r.is_marked(t)))
}

/// Right quotient `L/L′ = {t | ∃s ∈ L′: ts ∈ L}`, as a re-marking of `l`.
pub fn right_quotient(l: &Dfa, divisor: &Dfa) -> Result<Dfa> {
    if l.alphabet() != divisor.alphabet() {
        return Err(Error::AlphabetMismatch);
    }
    let nd = divisor.n_states();
    let idx = |q: StateId, d: StateId| q * nd + d;
    let total = l.n_states() * nd;
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); total];
    for q in l.states() {
        for d in divisor.states() {
            for (e, t) in l.successors(q) {
                if let Some(u) = divisor.next(d, e) {
                    preds[idx(t, u)].push(idx(q, d));
                }
            }
        }
    }
    let mut good = vec![false; total];
    let mut stack = Vec::new();
    for q in l.states() {
        for d in divisor.states() {
            if l.is_marked(q) && divisor.is_marked(d) {
                good[idx(q, d)] = true;
                stack.push(idx(q, d));
            }
        }
    }
    while let Some(v) = stack.pop() {
        for &p in &preds[v] {
            if !good[p] {
                good[p] = true;
                stack.push(p);
            }
        }
    }
    let marked = l.states().map(|q| good[idx(q, divisor.initial())]).collect();
    Ok(l.with_marking(marked))
}

/// Left quotient `L′\L = {t | ∃s ∈ L′: st ∈ L}`.
pub fn left_quotient(divisor: &Dfa, l: &Dfa) -> Result<Dfa> {
    if l.alphabet() != divisor.alphabet() {
        return Err(Error::AlphabetMismatch);
    }
    let mut seen = std::collections::HashSet::new();
    let start = (l.initial(), divisor.initial());
    seen.insert(start);
    let mut queue = VecDeque::from([start]);
    let mut roots = BTreeSet::new();
    while let Some((q, d)) = queue.pop_front() {
        if divisor.is_marked(d) {
            roots.insert(q);
        }
        for (e, t) in l.successors(q) {
            if let Some(u) = divisor.next(d, e) {
                if seen.insert((t, u)) {
                    queue.push_back((t, u));
                }
            }
        }
    }
    let roots: Vec<StateId> = roots.into_iter().collect();
    let keep = vec![true; l.alphabet().len()];
    Ok(subset_construction(l, &keep, &roots).0)
}

/// Projection of the marked language: erase non-target events, then determinize.
pub fn project(d: &Dfa, p: &Projection) -> Dfa {
    let keep = p.mask(d.alphabet());
    subset_construction(d, &keep, &[d.initial()]).0
}

/// Inverse projection onto `full`: self-loops on every event of `full` not in `d`'s alphabet.
pub fn inverse_project(d: &Dfa, full: &Alphabet) -> Result<Dfa> {
    for e in d.alphabet().events() {
        if full.id(&e.name).is_none() {
            return Err(Error::AlphabetMismatch);
        }
    }
    let lifted = d.over_alphabet(full)?;
    let m = full.len();
    let mut delta = Vec::with_capacity(lifted.n_states() * m);
    for q in lifted.states() {
        for e in full.ids() {
            if d.alphabet().id(full.name(e)).is_some() {
                delta.push(lifted.next(q, e));
            } else {
                delta.push(Some(q));
            }
        }
    }
    Dfa::from_parts(
        full.clone(),
        lifted.labels().to_vec(),
        delta,
        lifted.initial(),
        lifted.marking().to_vec(),
    )
}

/// How an observation count is compared with its bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountMode {
    AtMost,
    AtLeast,
    Exactly,
}

/// Recognizer of the strings whose number of observable events is `≤ n`, `≥ n` or `= n`.
pub fn sigma_o_bounded(alphabet: &Alphabet, n: usize, mode: CountMode) -> Dfa {
    let m = alphabet.len();
    let states = n + 1;
    let mut delta = Vec::with_capacity(states * m);
    for c in 0..states {
        for e in alphabet.ids() {
            let t = if !alphabet.is_observable(e) {
                Some(c)
            } else if c < n {
                Some(c + 1)
            } else {
                match mode {
                    CountMode::AtLeast => Some(n),
                    _ => None,
                }
            };
            delta.push(t);
        }
    }
    let marked = (0..states)
        .map(|c| match mode {
            CountMode::AtMost => true,
            CountMode::AtLeast | CountMode::Exactly => c == n,
        })
        .collect();
    let labels = (0..states).map(|c| c.to_string()).collect();
    Dfa::from_parts(alphabet.clone(), labels, delta, 0, marked).expect("counter is well formed")
}

/// Shortest pair of runs `(s, t)` in `z` with `P(s) = P(t)`, `left(δ(s))` and `right(δ(t))`.
///
/// Kept events move both runs; erased events move one run at a time.
pub(crate) fn indistinguishable_pair(
    z: &Dfa,
    keep: &[bool],
    left: impl Fn(StateId) -> bool,
    right: impl Fn(StateId) -> bool,
) -> Option<(Vec<EventId>, Vec<EventId>)> {
    #[derive(Clone, Copy)]
    enum Step {
        Both(EventId),
        Left(EventId),
        Right(EventId),
    }
    type Pair = (StateId, StateId);
    let start = (z.initial(), z.initial());
    let mut parent: HashMap<Pair, Option<(Pair, Step)>> =
        HashMap::from([(start, None)]);
    let mut queue = VecDeque::from([start]);
    while let Some((x, y)) = queue.pop_front() {
        if left(x) && right(y) {
            let mut s = Vec::new();
            let mut t = Vec::new();
            let mut cur = (x, y);
            while let Some(Some((prev, step))) = parent.get(&cur) {
                match *step {
                    Step::Both(e) => {
                        s.push(e);
                        t.push(e);
                    }
                    Step::Left(e) => s.push(e),
                    Step::Right(e) => t.push(e),
                }
                cur = *prev;
            }
            s.reverse();
            t.reverse();
            return Some((s, t));
        }
        let mut push = |n: (StateId, StateId), step: Step| {
            if let std::collections::hash_map::Entry::Vacant(v) = parent.entry(n) {
                v.insert(Some(((x, y), step)));
                queue.push_back(n);
            }
        };
        for e in z.alphabet().ids() {
            if keep[e] {
                if let (Some(a), Some(b)) = (z.next(x, e), z.next(y, e)) {
                    push((a, b), Step::Both(e));
                }
            } else {
                if let Some(a) = z.next(x, e) {
                    push((a, y), Step::Left(e));
                }
                if let Some(b) = z.next(y, e) {
                    push((x, b), Step::Right(e));
                }
            }
        }
    }
    None
}

/// Pre-normality `M = P^{-1}P(M) ∩ L(plant)`.
///
/// The witness is a shortest pair `s ∈ M`, `t ∈ L(plant) \ M` with `P(s) = P(t)`.
pub fn is_pre_normal(m: &LangRef, p: &Projection) -> (bool, Option<Witness>) {
    let r = &m.recognizer;
    let keep = p.mask(r.alphabet());
    match indistinguishable_pair(r, &keep, |x| r.is_marked(x), |y| !r.is_marked(y)) {
        None => (true, None),
        Some((s, t)) => (
            false,
            Some(Witness::new(r.alphabet(), &s, &t, "s in the language, t outside, same observation")),
        ),
    }
}

/// Pre-normality of `L_m(m)` with respect to an arbitrary universe `L_m(universe)`:
/// `P^{-1}P(M) ∩ U ⊆ M`. Only the part of `M` inside `U` matters.
pub fn is_pre_normal_in(m: &Dfa, universe: &Dfa, p: &Projection) -> Result<(bool, Option<Witness>)> {
    let u = complete(universe);
    let mm = complete(m);
    let z_u = product_with(&u, &mm, |x, _| x)?;
    let z_m = product_with(&u, &mm, |_, y| y)?;
    let keep = p.mask(u.alphabet());
    let found = indistinguishable_pair(
        &z_u,
        &keep,
        |x| z_u.is_marked(x) && z_m.is_marked(x),
        |y| z_u.is_marked(y) && !z_m.is_marked(y),
    );
    Ok(match found {
        None => (true, None),
        Some((s, t)) => (
            false,
            Some(Witness::new(u.alphabet(), &s, &t, "s in the language, t in the universe only")),
        ),
    })
}

/// Pre-normality decided on observer cells: no cell of the flagged plant recognizer mixes
/// members and non-members.
pub fn is_pre_normal_cells(m: &LangRef, p: &Projection) -> bool {
    let r = &m.recognizer;
    let keep = p.mask(r.alphabet());
    let (_, cells) = subset_construction(r, &keep, &[r.initial()]);
    cells.iter().all(|c| {
        let inside = c.iter().filter(|&&q| r.is_marked(q)).count();
        inside == 0 || inside == c.len()
    })
}

/// Normality: pre-normality of the prefix closure.
pub fn is_normal(m: &LangRef, p: &Projection) -> (bool, Option<Witness>) {
    is_pre_normal(&prefix_closure(m), p)
}

/// Controllability `closure(M)·Σ_uc ∩ L(plant) ⊆ closure(M)`. The witness is `(s, sσ)`.
pub fn is_controllable(m: &LangRef, uncontrollable: &[EventId]) -> (bool, Option<Witness>) {
    let c = prefix_closure(m);
    let r = &c.recognizer;
    if !r.is_marked(r.initial()) {
        return (true, None);
    }
    let mut uc = vec![false; r.alphabet().len()];
    for &e in uncontrollable {
        uc[e] = true;
    }
    let mut parent: Vec<Option<(StateId, EventId)>> = vec![None; r.n_states()];
    let mut seen = vec![false; r.n_states()];
    seen[r.initial()] = true;
    let mut queue = VecDeque::from([r.initial()]);
    while let Some(q) = queue.pop_front() {
        for (e, t) in r.successors(q) {
            if uc[e] && !r.is_marked(t) {
                let mut s = Vec::new();
                let mut cur = q;
                while let Some((p, ev)) = parent[cur] {
                    s.push(ev);
                    cur = p;
                }
                s.reverse();
                let mut t_word = s.clone();
                t_word.push(e);
                return (
                    false,
                    Some(Witness::new(r.alphabet(), &s, &t_word, "uncontrollable event leaves the closure")),
                );
            }
            if r.is_marked(t) && !seen[t] {
                seen[t] = true;
                parent[t] = Some((q, e));
                queue.push_back(t);
            }
        }
    }
    (true, None)
}
