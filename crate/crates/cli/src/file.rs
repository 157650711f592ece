//! JSON automaton files.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use faultcast::automata::{Alphabet, Dfa, DfaBuilder, Event};
use serde::{Deserialize, Serialize};

use crate::CliError;

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventSpec {
    pub name: String,
    #[serde(default = "yes")]
    pub observable: bool,
    #[serde(default = "yes")]
    pub controllable: bool,
    #[serde(default)]
    pub fault: bool,
}

/// An automaton on disk. Without `marked`, every state is marked.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutomatonFile {
    pub name: String,
    pub events: Vec<EventSpec>,
    pub states: Vec<String>,
    pub initial: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marked: Option<Vec<String>>,
    pub transitions: Vec<(String, String, String)>,
}

impl AutomatonFile {
    pub fn parse(text: &str) -> Result<AutomatonFile, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<AutomatonFile, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        AutomatonFile::parse(&text).map_err(|e| match e {
            CliError::Parse(m) => CliError::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn to_dfa(&self) -> Result<Dfa, CliError> {
        let bad = |m: String| CliError::Parse(format!("{}: {m}", self.name));
        let events = self
            .events
            .iter()
            .map(|e| Event::new(e.name.clone(), e.observable, e.controllable, e.fault))
            .collect();
        let alphabet = Alphabet::new(events).map_err(|e| bad(e.to_string()))?;
        if self.states.is_empty() {
            return Err(bad("no states".into()));
        }
        let mut known = HashSet::new();
        for q in &self.states {
            if !known.insert(q.as_str()) {
                return Err(bad(format!("duplicate state `{q}`")));
            }
        }
        let state = |q: &str| {
            if known.contains(q) {
                Ok(())
            } else {
                Err(bad(format!("unknown state `{q}`")))
            }
        };
        let mut b = DfaBuilder::new(alphabet);
        for q in &self.states {
            b.state(q);
        }
        state(&self.initial)?;
        b.initial(&self.initial);
        match &self.marked {
            None => {
                b.mark_all();
            }
            Some(ms) => {
                for q in ms {
                    state(q)?;
                    b.mark(q);
                }
            }
        }
        let mut seen = HashSet::new();
        for (s, e, t) in &self.transitions {
            state(s)?;
            state(t)?;
            if !seen.insert((s.as_str(), e.as_str())) {
                return Err(bad(format!("duplicate transition from `{s}` on `{e}`")));
            }
            b.edge(s, e, t).map_err(|e| bad(e.to_string()))?;
        }
        b.build().map_err(|e| bad(e.to_string()))
    }

    /// Serializable form of `d`; state labels must be distinct.
    pub fn from_dfa(name: &str, d: &Dfa) -> Result<AutomatonFile, CliError> {
        let mut seen = HashMap::new();
        for q in d.states() {
            if let Some(p) = seen.insert(d.label(q), q) {
                return Err(CliError::Core(faultcast::Error::Invalid(format!(
                    "states {p} and {q} share the label `{}`",
                    d.label(q)
                ))));
            }
        }
        let a = d.alphabet();
        let marked = if d.marking().iter().all(|&m| m) {
            None
        } else {
            Some(d.marked_states().iter().map(|&q| d.label(q).to_string()).collect())
        };
        Ok(AutomatonFile {
            name: name.to_string(),
            events: a
                .events()
                .iter()
                .map(|e| EventSpec {
                    name: e.name.clone(),
                    observable: e.observable,
                    controllable: e.controllable,
                    fault: e.fault,
                })
                .collect(),
            states: d.labels().to_vec(),
            initial: d.label(d.initial()).to_string(),
            marked,
            transitions: d
                .transitions()
                .map(|(q, e, t)| {
                    (d.label(q).to_string(), a.name(e).to_string(), d.label(t).to_string())
                })
                .collect(),
        })
    }
}
