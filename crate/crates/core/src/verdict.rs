//! Shared verdict ladder. Stage verdicts and the overall verdict use
//! the same ordering: refuted < inconclusive < necessary-consistent <
//! sufficient-certified, and the overall verdict of a run is the
//! minimum over the enabled stages.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Refuted,
    Inconclusive,
    NecessaryConsistent,
    SufficientCertified,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::SufficientCertified => 0,
            Verdict::NecessaryConsistent => 1,
            Verdict::Inconclusive => 2,
            Verdict::Refuted => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Verdict::Refuted => "refuted",
            Verdict::Inconclusive => "inconclusive",
            Verdict::NecessaryConsistent => "necessary-consistent",
            Verdict::SufficientCertified => "sufficient-certified",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
