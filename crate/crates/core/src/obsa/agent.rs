use serde::{Deserialize, Serialize};

/// Identity of a proxy agent for one customer episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AgentId(pub u64);

impl std::fmt::Display for AgentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Participant,
    Observer,
    Departed,
}

/// State of a proxy agent with respect to one auction sequence.
///
/// Once the agent observes, `p_cur` only decreases. `id_mem` is only set for
/// observers under the second-price backbone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PAgentState {
    pub id: AgentId,
    pub bid: f64,
    pub t_ent: u64,
    pub t_pat: u64,
    pub p_cur: f64,
    pub id_mem: Option<AgentId>,
    pub mode: Mode,
}

impl PAgentState {
    /// A fresh winner entering observer mode at `t_ent` with initial charge `p_cur`.
    pub fn observer(id: AgentId, bid: f64, t_ent: u64, t_pat: u64, p_cur: f64, id_mem: Option<AgentId>) -> Self {
        Self { id, bid, t_ent, t_pat, p_cur, id_mem, mode: Mode::Observer }
    }

    /// Last round in which price matching still applies.
    pub fn deadline(&self) -> u64 {
        self.t_ent + self.t_pat
    }

    /// Whether the patience window covers round `t` (`t_ent + t_pat >= t`).
    pub fn is_patient_at(&self, t: u64) -> bool {
        self.deadline() >= t
    }
}
