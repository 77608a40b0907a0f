use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::experiment::{run_experiment, ExperimentConfig, ExperimentOutcome, ModelEntry};
use crate::corpus::Dialogue;
use crate::error::Result;
use crate::features::{Extractor, Family};

/// Removable language-feature groups. Task-specific features are never removed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureGroup {
    Syntactic,
    #[serde(rename = "LIWC")]
    Liwc,
    /// Formality, temporal, Warriner, PERMA and EmoLex together.
    Lex,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 3] = [FeatureGroup::Syntactic, FeatureGroup::Liwc, FeatureGroup::Lex];

    pub fn families(self) -> Vec<Family> {
        match self {
            FeatureGroup::Syntactic => vec![Family::Syntactic],
            FeatureGroup::Liwc => vec![Family::Liwc],
            FeatureGroup::Lex => vec![
                Family::Formality,
                Family::Temporal,
                Family::Warriner,
                Family::Perma,
                Family::Emolex,
            ],
        }
    }

    pub fn prefixes(self) -> Vec<String> {
        self.families().into_iter().map(|f| f.prefix().to_string()).collect()
    }

    pub fn label(self) -> &'static str {
        match self {
            FeatureGroup::Syntactic => "Syntactic",
            FeatureGroup::Liwc => "LIWC",
            FeatureGroup::Lex => "Lex",
        }
    }
}

impl fmt::Display for FeatureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for FeatureGroup {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        FeatureGroup::ALL
            .into_iter()
            .find(|g| g.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown feature group `{s}` (expected Syntactic, LIWC or Lex)"))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AblationPlan {
    pub remove: Vec<FeatureGroup>,
}

impl AblationPlan {
    pub fn apply_entry(&self, entry: &ModelEntry) -> ModelEntry {
        let mut e = entry.clone();
        for g in &self.remove {
            for p in g.prefixes() {
                if !e.drop_prefixes.contains(&p) {
                    e.drop_prefixes.push(p);
                }
            }
        }
        if !self.remove.is_empty() {
            let names: Vec<&str> = self.remove.iter().map(|g| g.label()).collect();
            e.name = format!("{} -{}", entry.name, names.join(" -"));
        }
        e
    }

    pub fn apply(&self, config: &ExperimentConfig) -> ExperimentConfig {
        ExperimentConfig {
            models: config.models.iter().map(|m| self.apply_entry(m)).collect(),
            ..config.clone()
        }
    }
}

/// Re-run the experiment with the plan's groups removed from every model row.
pub fn ablate(plan: &AblationPlan, dialogues: Vec<Dialogue>, extractor: &Extractor, base: &ExperimentConfig) -> Result<ExperimentOutcome> {
    run_experiment(dialogues, extractor, &plan.apply(base))
}

/// The base rows plus one row per single-group removal.
pub fn single_removals(base: &ExperimentConfig) -> ExperimentConfig {
    let mut models = base.models.clone();
    for g in FeatureGroup::ALL {
        let plan = AblationPlan { remove: vec![g] };
        models.extend(base.models.iter().map(|m| plan.apply_entry(m)));
    }
    ExperimentConfig {
        models,
        baselines: Vec::new(),
        ..base.clone()
    }
}
