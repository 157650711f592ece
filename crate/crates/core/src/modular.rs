//! Modular plants: compositional fault languages, local supervisors and the global cross-check.

use std::sync::Arc;

use crate::automata::{compose_alphabets, is_language_equal, sync_product, sync_product_bounded, Dfa};
use crate::error::{Error, Result};
use crate::fault::{faulty_language, l_f_geq, non_faulty_language};
use crate::lang::{
    complement_within, is_controllable, is_normal, is_pre_normal_in, language_difference,
    language_intersection, language_union,
    prefix_closure, LangRef, Projection,
};
use crate::synth::{mode_property, synthesize, Mode, SynthesisProblem, SynthesisResult};
use crate::verify::{
    check_k_prognosable_unchecked, critical_prognosis_language, observer, Params, Property,
    VerdictReport,
};

/// Default state budget for building global products.
pub const DEFAULT_BUDGET: usize = 1_000_000;

/// A plant given as components running in parallel.
#[derive(Clone, Debug)]
pub struct ModularPlant {
    pub components: Vec<Dfa>,
}

impl ModularPlant {
    pub fn new(components: Vec<Dfa>) -> ModularPlant {
        ModularPlant { components }
    }

    /// Every violated structural requirement, in order.
    pub fn validate(&self) -> std::result::Result<(), Vec<Error>> {
        let mut errors = Vec::new();
        if self.components.len() < 2 {
            errors.push(Error::Invalid(format!(
                "a modular plant needs at least two components, got {}",
                self.components.len()
            )));
        }
        for (i, a) in self.components.iter().enumerate() {
            for b in &self.components[i + 1..] {
                if let Err(e) = compose_alphabets(&[a.alphabet(), b.alphabet()]) {
                    errors.push(e);
                }
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }

    fn checked(&self) -> Result<()> {
        self.validate().map_err(|mut es| es.remove(0))
    }

    /// Names of the events owned by more than one component, sorted.
    pub fn shared_events(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for (i, a) in self.components.iter().enumerate() {
            for e in a.alphabet().events() {
                let elsewhere = self
                    .components
                    .iter()
                    .enumerate()
                    .any(|(j, b)| j != i && b.alphabet().id(&e.name).is_some());
                if elsewhere && !out.contains(&e.name) {
                    out.push(e.name.clone());
                }
            }
        }
        out.sort();
        out
    }

    /// The explicit product `∥G_i`.
    pub fn global_plant(&self, budget: usize) -> Result<Dfa> {
        self.checked()?;
        sync_product_bounded(&self.components, budget)
    }
}

/// `∪_i L_1 ∥ … ∥ K_i ∥ … ∥ L_l` as a sublanguage of the global plant, where each `K_i` is
/// given by a recognizer generating `L_i`.
pub fn union_of_products(components: &[Dfa], ks: &[LangRef]) -> Result<LangRef> {
    assert_eq!(components.len(), ks.len());
    let global = Arc::new(sync_product(components)?);
    let mut acc = LangRef::empty_within(&global);
    for (i, k) in ks.iter().enumerate() {
        let parts: Vec<Dfa> = components
            .iter()
            .enumerate()
            .map(|(j, g)| if j == i { k.recognizer().clone() } else { g.mark_all() })
            .collect();
        let term = LangRef::within(&global, &sync_product(&parts)?)?;
        acc = language_union(&acc, &term)?;
    }
    Ok(acc)
}

/// `∥_i K_i` as a sublanguage of the global plant.
pub fn product_of(components: &[Dfa], ks: &[LangRef]) -> Result<LangRef> {
    let global = Arc::new(sync_product(components)?);
    let parts: Vec<Dfa> = ks.iter().map(|k| k.recognizer().clone()).collect();
    LangRef::within(&global, &sync_product(&parts)?)
}

/// Global faulty and non-faulty languages built from the components:
/// `L_f = ∪_i L_1∥…∥L_{i,f}∥…∥L_l` and `L_n = ∥_i L_{i,n}`.
pub fn compose_global_faulty(mp: &ModularPlant) -> Result<(LangRef, LangRef)> {
    mp.checked()?;
    let lf: Vec<LangRef> = mp.components.iter().map(faulty_language).collect();
    let ln: Vec<LangRef> = mp.components.iter().map(non_faulty_language).collect();
    Ok((
        union_of_products(&mp.components, &lf)?,
        product_of(&mp.components, &ln)?,
    ))
}

/// `∥_i (L_{i,n} ∖ Ψ_{i,f}^{-0})`, the compositional stand-in for `L_n ∖ Ψ_f^{-0}`.
pub fn psi_minus_zero_global(mp: &ModularPlant) -> Result<LangRef> {
    mp.checked()?;
    let parts: Vec<LangRef> = mp
        .components
        .iter()
        .map(|g| critical_prognosis_language(g, 0))
        .collect();
    product_of(&mp.components, &parts)
}

/// `closure(∥L_i) = ∥closure(L_i)`.
pub fn check_nonconflicting(langs: &[LangRef]) -> Result<bool> {
    let marked: Vec<Dfa> = langs.iter().map(|l| l.recognizer().clone()).collect();
    let closed: Vec<Dfa> = langs
        .iter()
        .map(|l| prefix_closure(l).recognizer().clone())
        .collect();
    let lhs = prefix_closure(&LangRef::free(sync_product(&marked)?));
    let rhs = sync_product(&closed)?;
    is_language_equal(lhs.recognizer(), &rhs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GlobalGuarantee {
    Prognosable,
    Diagnosable,
    NotGuaranteed,
}

#[derive(Clone, Debug)]
pub struct ModularSynthesisResult {
    pub mode: Mode,
    pub local: Vec<SynthesisResult>,
    /// `S_i`, all states marked.
    pub local_supervisors: Vec<Dfa>,
    pub nonconflicting: bool,
    /// Diagnosis only: whether `L_{i,f} ∩ S_i` is pre-normal with respect to `S_i`, i.e. `S_i`
    /// never lets a faulty string look like a non-faulty one. Empty for prognosis.
    pub fault_separation: Vec<bool>,
    pub global_guarantee: GlobalGuarantee,
    pub cross_check: Option<VerdictReport>,
}

/// Local supervisors `S_i`, one per component, without building the global product.
pub fn modular_enforce(mp: &ModularPlant, mode: Mode) -> Result<ModularSynthesisResult> {
    mp.checked()?;
    if let Mode::Prognosis(k) = mode {
        if k != 0 {
            return Err(Error::Usage(format!(
                "modular enforcement supports prognosis with k = 0 only, got k = {k}"
            )));
        }
    }
    let mut local = Vec::new();
    let mut sups = Vec::new();
    for (i, g) in mp.components.iter().enumerate() {
        let r = synthesize(&SynthesisProblem::new(g.clone(), mode))?;
        let s = r.supervisor.clone().ok_or(Error::ComponentSynthesisFailed(i + 1))?;
        sups.push(s);
        local.push(r);
    }
    let langs: Vec<LangRef> = sups.iter().map(|s| LangRef::free(s.clone())).collect();
    let nonconflicting = check_nonconflicting(&langs)?;
    let fault_separation = match mode {
        Mode::Prognosis(_) => Vec::new(),
        Mode::Diagnosis => mp
            .components
            .iter()
            .zip(&sups)
            .map(|(g, s)| separates_faults(g, s))
            .collect::<Result<Vec<bool>>>()?,
    };
    // Local diagnosis thresholds do not survive interleaving: another component can pile up
    // observations while a fault stays ambiguous. Diagnosable is only issued when every
    // S_i separates faulty strings outright, which holds for any global threshold.
    let global_guarantee = match (nonconflicting, mode) {
        (false, _) => GlobalGuarantee::NotGuaranteed,
        (true, Mode::Prognosis(_)) => GlobalGuarantee::Prognosable,
        (true, Mode::Diagnosis) if fault_separation.iter().all(|&b| b) => {
            GlobalGuarantee::Diagnosable
        }
        (true, Mode::Diagnosis) => GlobalGuarantee::NotGuaranteed,
    };
    Ok(ModularSynthesisResult {
        mode,
        local,
        local_supervisors: sups,
        nonconflicting,
        fault_separation,
        global_guarantee,
        cross_check: None,
    })
}

/// `L_f ∩ S` is pre-normal with respect to `S` inside the plant `g`.
pub fn separates_faults(g: &Dfa, s: &Dfa) -> Result<bool> {
    let plant = Arc::new(g.clone());
    let k = LangRef::within(&plant, &s.mark_all())?;
    let c = language_intersection(&faulty_language(g), &k)?;
    Ok(is_pre_normal_in(c.recognizer(), k.recognizer(), &Projection::Observable)?.0)
}

/// Builds `∥S_i` and the global plant and checks controllability, normality and the mode
/// property of the closed loop against the global plant.
pub fn cross_check_global(
    mp: &ModularPlant,
    result: &ModularSynthesisResult,
    budget: usize,
) -> Result<VerdictReport> {
    let global = mp.global_plant(budget)?;
    let closed = sync_product_bounded(&result.local_supervisors, budget)?;
    let plant = Arc::new(global.clone());
    let k = LangRef::within(&plant, &closed.mark_all())?;
    let uc = global.alphabet().uncontrollable();
    let (ctrl, w_c) = is_controllable(&k, &uc);
    let (norm, w_n) = is_normal(&k, &Projection::Observable);
    let (prop, w_p) = mode_property(&global, result.mode, &closed)?;
    let mut notes = vec![
        format!("global plant: {} states", global.n_states()),
        format!("closed loop: {} states", closed.n_states()),
        format!("controllable: {ctrl}"),
        format!("normal: {norm}"),
        format!("{} property: {prop}", result.mode),
    ];
    if let Mode::Prognosis(kk) = result.mode {
        let strict = check_k_prognosable_unchecked(&closed, kk);
        notes.push(format!(
            "string-level {kk}-prognosability of the closed loop: {}",
            strict.verdict
        ));
    }
    let (property, params) = match result.mode {
        Mode::Prognosis(kk) => (
            Property::KPrognosability,
            Params {
                k: Some(kk),
                ..Params::default()
            },
        ),
        Mode::Diagnosis => (
            Property::Diagnosability,
            Params {
                n_o: Some(observer(&global).n_states()),
                ..Params::default()
            },
        ),
    };
    Ok(VerdictReport {
        property,
        verdict: ctrl && norm && prop,
        conclusive: true,
        params,
        witness: w_c.or(w_n).or(w_p),
        notes,
    })
}

/// `(L ∖ ∥K_i, ∪_i L_1∥…∥(L_i∖K_i)∥…∥L_l)`: the two sides of the complement identity.
pub fn complement_identity_sides(components: &[Dfa], ks: &[LangRef]) -> Result<(LangRef, LangRef)> {
    let global = Arc::new(sync_product(components)?);
    let lhs = language_difference(
        &LangRef::plant_language(&global),
        &product_of(components, ks)?,
    )?;
    let comps: Vec<LangRef> = ks.iter().map(complement_within).collect();
    Ok((lhs, union_of_products(components, &comps)?))
}

/// Smallest `N` in `[max N_{i,o}, Σ N_{i,o}]` with `L_f^{≥N}` equal to
/// `∪_i L_1∥…∥L_{i,f}^{≥N_{i,o}}∥…∥L_l`, if any.
pub fn composed_threshold_scan(mp: &ModularPlant) -> Result<Option<usize>> {
    mp.checked()?;
    let n_os: Vec<usize> = mp.components.iter().map(|g| observer(g).n_states()).collect();
    let ks: Vec<LangRef> = mp
        .components
        .iter()
        .zip(&n_os)
        .map(|(g, &n)| l_f_geq(g, n))
        .collect();
    let composed = union_of_products(&mp.components, &ks)?;
    let global = sync_product(&mp.components)?;
    let lo = n_os.iter().copied().max().unwrap_or(0);
    let hi: usize = n_os.iter().sum();
    for n in lo..=hi {
        if is_language_equal(l_f_geq(&global, n).recognizer(), composed.recognizer())? {
            return Ok(Some(n));
        }
    }
    Ok(None)
}
