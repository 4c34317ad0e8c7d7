use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::topology::{ComponentClass, ComponentSummary};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RhEntry {
    pub degree: usize,
    pub deficiency: usize,
}

impl RhEntry {
    pub fn holds(&self) -> bool {
        self.deficiency == 2 * (self.degree - 1)
    }
}

/// One row of a verification table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: String) -> Self {
        Check {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub seed: u64,
    pub resolutions: Vec<usize>,
    /// Counted components of the complement at each resolution.
    pub counts: Vec<usize>,
    pub class: Option<ComponentClass>,
    pub components: Vec<ComponentSummary>,
    /// Generator index to the image label of each counted component.
    pub permutations: BTreeMap<usize, Vec<usize>>,
    pub rh: Vec<RhEntry>,
    /// Closure sweeps at each resolution.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub iterations: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<Check>,
    pub runtime_seconds: f64,
}

impl RunReport {
    pub fn new(scenario: &str, seed: u64) -> Self {
        RunReport {
            scenario: scenario.to_string(),
            seed,
            resolutions: Vec::new(),
            counts: Vec::new(),
            class: None,
            components: Vec::new(),
            permutations: BTreeMap::new(),
            rh: Vec::new(),
            iterations: Vec::new(),
            checks: Vec::new(),
            runtime_seconds: 0.0,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}
