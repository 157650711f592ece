//! Machine-readable reports. Field order is the serialization order.

use faultcast::lang::Witness;
use faultcast::synth::IterationLog;
use faultcast::verify::{Params, VerdictReport};
use serde::Serialize;

pub const SCHEMA: &str = "1";

#[derive(Clone, Debug, Default, Serialize)]
pub struct Parameters {
    pub k: Option<usize>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[serde(rename = "N_o")]
    pub n_o: Option<usize>,
    #[serde(rename = "N_s")]
    pub n_s: Option<usize>,
    #[serde(rename = "minimal_N")]
    pub minimal_n: Option<usize>,
}

impl From<&Params> for Parameters {
    fn from(p: &Params) -> Self {
        Parameters {
            k: p.k,
            n: p.n,
            n_o: p.n_o,
            n_s: p.n_s,
            minimal_n: p.minimal_n,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessOut {
    pub s: Vec<String>,
    #[serde(rename = "P(s)")]
    pub ps: Vec<String>,
    pub t: Vec<String>,
    #[serde(rename = "P(t)")]
    pub pt: Vec<String>,
    pub note: String,
}

impl From<&Witness> for WitnessOut {
    fn from(w: &Witness) -> Self {
        WitnessOut {
            s: w.s.clone(),
            ps: w.ps.clone(),
            t: w.t.clone(),
            pt: w.pt.clone(),
            note: w.note.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IterationOut {
    pub iteration: usize,
    pub uncontrollable_removed: Vec<String>,
    pub non_normal_removed: Vec<String>,
    pub unreachable_removed: Vec<String>,
}

impl From<&IterationLog> for IterationOut {
    fn from(l: &IterationLog) -> Self {
        IterationOut {
            iteration: l.iteration,
            uncontrollable_removed: l.uncontrollable_removed.clone(),
            non_normal_removed: l.non_normal_removed.clone(),
            unreachable_removed: l.unreachable_removed.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportFile {
    pub schema: &'static str,
    pub command: Vec<String>,
    pub property: String,
    /// `holds`, `fails`, `inconclusive`, `solution`, `no-solution`, or a guarantee name.
    pub result: String,
    pub verdict: Option<bool>,
    pub conclusive: bool,
    pub parameters: Parameters,
    pub witness: Option<WitnessOut>,
    pub iterations: Vec<IterationOut>,
    pub outputs: Vec<String>,
    pub notes: Vec<String>,
    /// Only filled with `--timing`, so that reports are reproducible by default.
    pub timing_ms: Option<u128>,
}

impl ReportFile {
    pub fn new(command: Vec<String>, property: impl Into<String>) -> ReportFile {
        ReportFile {
            schema: SCHEMA,
            command,
            property: property.into(),
            result: String::new(),
            verdict: None,
            conclusive: true,
            parameters: Parameters::default(),
            witness: None,
            iterations: Vec::new(),
            outputs: Vec::new(),
            notes: Vec::new(),
            timing_ms: None,
        }
    }

    pub fn from_verdict(command: Vec<String>, r: &VerdictReport) -> ReportFile {
        let mut out = ReportFile::new(command, r.property.to_string());
        out.result = match (r.verdict, r.conclusive) {
            (true, _) => "holds",
            (false, true) => "fails",
            (false, false) => "inconclusive",
        }
        .into();
        out.verdict = Some(r.verdict);
        out.conclusive = r.conclusive;
        out.parameters = (&r.params).into();
        out.witness = r.witness.as_ref().map(Into::into);
        out.notes = r.notes.clone();
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }
}
