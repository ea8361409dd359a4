//! The two price-matching rules applied by an observer after each round.

use super::agent::PAgentState;
use super::round::AuctionOutcome;

/// First-price backbone: within the patience window, drop the payment to any
/// lower winning bid.
pub fn price_match_first(state: &mut PAgentState, t: u64, b_w: f64) -> f64 {
    if state.is_patient_at(t) && b_w < state.p_cur {
        state.p_cur = b_w;
    }
    state.p_cur
}

/// Second-price backbone, with the bumped agent stored in `id_mem`.
///
/// - memory set, stored agent wins: follow the new runner-up if cheaper and
///   remember it;
/// - memory set, someone else wins below the payment: match it and forget;
/// - memory empty: match any cheaper winning bid.
///
/// An empty round changes nothing. A round without a runner-up reads the
/// bumped bid as the outcome's floor and clears the memory when it applies.
pub fn price_match_second(state: &mut PAgentState, outcome: &AuctionOutcome) -> f64 {
    let Some((id_w, b_w)) = outcome.winner else {
        return state.p_cur;
    };
    if !state.is_patient_at(outcome.time) {
        return state.p_cur;
    }
    match state.id_mem {
        Some(mem) if mem == id_w => {
            let b_bumped = outcome.bumped_bid();
            if b_bumped < state.p_cur {
                state.id_mem = outcome.bumped_id();
                state.p_cur = b_bumped;
            }
        }
        Some(_) => {
            if b_w < state.p_cur {
                state.id_mem = None;
                state.p_cur = b_w;
            }
        }
        None => {
            if b_w < state.p_cur {
                state.p_cur = b_w;
            }
        }
    }
    state.p_cur
}
