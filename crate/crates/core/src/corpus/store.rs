use std::collections::BTreeSet;
use std::sync::Mutex;

use super::{Dialogue, Split};
use crate::error::{Error, Result};

/// Pipeline stage on whose behalf a corpus is accessed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// Filtering the raw corpus; sees every split.
    Preprocess,
    /// Exporting model inputs for an external encoder; sees every split.
    Export,
    /// Anything that fits parameters or selects hyperparameters.
    Fit,
    /// Final scoring; the only modeling stage allowed to read the test split.
    Evaluate,
}

impl Stage {
    pub fn may_read(self, split: Split) -> bool {
        !(self == Stage::Fit && split == Split::Test)
    }
}

/// Corpus handle that only hands out the splits its stage is entitled to.
#[derive(Debug)]
pub struct CorpusStore {
    dialogues: Vec<Dialogue>,
    stage: Stage,
    reads: Mutex<BTreeSet<Split>>,
}

impl CorpusStore {
    pub fn new(dialogues: Vec<Dialogue>, stage: Stage) -> Self {
        CorpusStore {
            dialogues,
            stage,
            reads: Mutex::new(BTreeSet::new()),
        }
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn split(&self, split: Split) -> Result<Vec<&Dialogue>> {
        if !self.stage.may_read(split) {
            return Err(Error::contract(format!(
                "stage {:?} may not read the {split} split",
                self.stage
            )));
        }
        self.reads.lock().expect("poisoned").insert(split);
        Ok(self.dialogues.iter().filter(|d| d.split == split).collect())
    }

    /// Number of dialogues per split. Counting is not a read.
    pub fn split_sizes(&self) -> [(Split, usize); 3] {
        Split::ALL.map(|s| (s, self.dialogues.iter().filter(|d| d.split == s).count()))
    }

    /// Give up the dialogues, e.g. to re-open them under another stage.
    pub fn into_dialogues(self) -> Vec<Dialogue> {
        self.dialogues
    }

    /// Splits handed out so far.
    pub fn reads(&self) -> BTreeSet<Split> {
        self.reads.lock().expect("poisoned").clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tests::dialogue_with_messages;

    #[test]
    fn fit_stage_cannot_read_test() {
        let mut d = dialogue_with_messages(2);
        d.split = Split::Test;
        let store = CorpusStore::new(vec![dialogue_with_messages(2), d], Stage::Fit);
        assert_eq!(store.split(Split::Train).unwrap().len(), 1);
        assert!(matches!(store.split(Split::Test), Err(Error::Contract(_))));
        assert_eq!(store.reads(), [Split::Train].into_iter().collect());
        assert_eq!(store.split_sizes()[2], (Split::Test, 1));
    }

    #[test]
    fn evaluate_stage_reads_test() {
        let store = CorpusStore::new(vec![], Stage::Evaluate);
        assert!(store.split(Split::Test).unwrap().is_empty());
    }
}
