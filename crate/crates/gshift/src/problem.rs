//! JSON problem files: a presentation or an explicit follower automaton,
//! optionally paired with SFT rules.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cayley::FollowerAutomaton;
use crate::presentation::MonoidPresentation;
use crate::sft::SftRules;
use crate::{Error, Result};

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct PresentationJson {
    pub d: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<u8>>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct SftJson {
    pub k: usize,
    pub rules: Vec<Vec<Vec<u8>>>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct AutomatonJson {
    pub states: Vec<String>,
    pub initial: String,
    /// state -> generator number (as a string key) -> successor state
    pub transitions: BTreeMap<String, BTreeMap<String, String>>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub presentation: Option<PresentationJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub automaton: Option<AutomatonJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sft: Option<SftJson>,
}

impl ProblemFile {
    pub fn from_str(text: &str) -> Result<Self> {
        let file: ProblemFile = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("bad problem file: {e}")))?;
        match (&file.presentation, &file.automaton) {
            (Some(_), Some(_)) => Err(Error::InvalidInput(
                "presentation and automaton are mutually exclusive".into(),
            )),
            (None, None) => Err(Error::InvalidInput(
                "need a presentation or an automaton".into(),
            )),
            _ => Ok(file),
        }
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        Self::from_str(&text)
    }

    pub fn presentation(&self) -> Result<Option<MonoidPresentation>> {
        match &self.presentation {
            None => Ok(None),
            Some(p) => {
                if p.a.len() != p.d {
                    return Err(Error::InvalidInput(format!(
                        "matrix has {} rows but d = {}",
                        p.a.len(),
                        p.d
                    )));
                }
                MonoidPresentation::new(p.d, p.a.clone()).map(Some)
            }
        }
    }

    pub fn automaton(&self) -> Result<Option<FollowerAutomaton>> {
        let Some(a) = &self.automaton else { return Ok(None) };
        let state_of = |name: &str| -> Result<usize> {
            a.states
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| Error::InvalidInput(format!("unknown state {name:?}")))
        };
        let initial = state_of(&a.initial)?;
        let mut d = 0usize;
        for by_gen in a.transitions.values() {
            for key in by_gen.keys() {
                let g: usize = key.parse().map_err(|_| {
                    Error::InvalidInput(format!("generator key {key:?} is not a number"))
                })?;
                if g == 0 {
                    return Err(Error::InvalidInput("generators are numbered from 1".into()));
                }
                d = d.max(g);
            }
        }
        if d == 0 {
            return Err(Error::InvalidInput("automaton has no transitions".into()));
        }
        let mut step = vec![vec![None; d]; a.states.len()];
        for (src, by_gen) in &a.transitions {
            let q = state_of(src)?;
            for (key, dst) in by_gen {
                let g: usize = key.parse().unwrap();
                step[q][g - 1] = Some(state_of(dst)?);
            }
        }
        FollowerAutomaton::new(a.states.clone(), initial, step).map(Some)
    }

    pub fn rules(&self, d: usize) -> Result<Option<SftRules>> {
        match &self.sft {
            None => Ok(None),
            Some(s) => {
                if s.rules.len() != d {
                    return Err(Error::InvalidInput(format!(
                        "sft has {} rule matrices but needs one per generator ({d})",
                        s.rules.len()
                    )));
                }
                SftRules::new(s.k, s.rules.clone()).map(Some)
            }
        }
    }

    /// The rules, required: errors out when the file has no `sft` section.
    pub fn rules_required(&self, d: usize) -> Result<SftRules> {
        self.rules(d)?
            .ok_or_else(|| Error::InvalidInput("this command needs an \"sft\" section".into()))
    }
}
