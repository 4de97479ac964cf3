//! Reference solvers for the capacity-constrained association problem:
//! the exhaustive-search global oracle, the per-user signal-strength
//! strategy, and a capacity-aware greedy heuristic.

use alloc::vec::Vec;
// With std in the crate graph (tests), inherent f64 methods shadow this trait.
#[allow(unused_imports)]
use num_traits::Float;

use crate::channel::{ChannelSnapshot, Matrix};
use crate::config::CapacityLimits;
use crate::env::{is_feasible, sum_rate, Association, Topology};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("instance too large for exhaustive search: (L+W)^K = {assignments:.3e} exceeds the budget of {budget} evaluations")]
    InstanceTooLarge { assignments: f64, budget: u64 },
    #[error("no capacity-feasible association exists: {users} users exceed the total capacity {capacity}")]
    Infeasible { users: usize, capacity: usize },
}

/// Outcome of one solver invocation. `objective` is the sum rate of
/// `association` recomputed on the snapshot it was solved against; `elapsed`
/// is filled by the harness that timed the call.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub association: Association,
    pub objective: f64,
    pub feasible: bool,
    pub evaluations: u64,
    pub elapsed: f64,
}

fn total_capacity(topology: &Topology, caps: &CapacityLimits) -> usize {
    (0..topology.ap_count()).map(|ap| topology.cap(ap, caps)).sum()
}

/// Globally optimal association by depth-first enumeration of the
/// capacity-feasible assignment tree. Ties break toward the
/// lexicographically smallest assignment vector; `evaluations` counts
/// visited leaves (complete feasible assignments).
///
/// Refuses instances whose unpruned assignment count (L+W)^K exceeds
/// `budget`.
pub fn exhaustive_search(
    snapshot: &ChannelSnapshot,
    topology: &Topology,
    caps: &CapacityLimits,
    budget: u64,
) -> Result<SolverResult, SolverError> {
    let ap_count = topology.ap_count();
    let user_count = snapshot.user_count();
    let assignments = (ap_count as f64).powi(user_count as i32);
    if assignments > budget as f64 {
        return Err(SolverError::InstanceTooLarge {
            assignments,
            budget,
        });
    }
    let capacity = total_capacity(topology, caps);
    if user_count > capacity {
        return Err(SolverError::Infeasible {
            users: user_count,
            capacity,
        });
    }

    struct Dfs<'a> {
        snapshot: &'a ChannelSnapshot,
        caps_per_ap: Vec<usize>,
        loads: Vec<usize>,
        assign: Vec<usize>,
        best_assign: Vec<usize>,
        best_value: f64,
        leaves: u64,
        user_count: usize,
    }

    impl Dfs<'_> {
        fn visit(&mut self, user: usize, partial: f64) {
            if user == self.user_count {
                self.leaves += 1;
                if partial > self.best_value {
                    self.best_value = partial;
                    self.best_assign.copy_from_slice(&self.assign);
                }
                return;
            }
            for ap in 0..self.caps_per_ap.len() {
                if self.loads[ap] == self.caps_per_ap[ap] {
                    continue;
                }
                self.loads[ap] += 1;
                self.assign[user] = ap;
                self.visit(user + 1, partial + self.snapshot.rate.get(ap, user));
                self.loads[ap] -= 1;
            }
        }
    }

    let caps_per_ap: Vec<usize> = (0..ap_count).map(|ap| topology.cap(ap, caps)).collect();
    let mut dfs = Dfs {
        snapshot,
        caps_per_ap,
        loads: alloc::vec![0; ap_count],
        assign: alloc::vec![0; user_count],
        best_assign: alloc::vec![0; user_count],
        best_value: f64::NEG_INFINITY,
        leaves: 0,
        user_count,
    };
    dfs.visit(0, 0.0);

    let association = Association::new(dfs.best_assign);
    let objective = sum_rate(&association, snapshot);
    let feasible = is_feasible(&association, caps, topology).feasible;
    debug_assert!(feasible);
    Ok(SolverResult {
        association,
        objective,
        feasible,
        evaluations: dfs.leaves,
        elapsed: 0.0,
    })
}

/// Signal-strength strategy: each user independently picks the AP with the
/// highest interference-free SNR. Capacity is deliberately not enforced;
/// the result only reports whether the limits happened to hold.
pub fn sss(
    snr: &Matrix,
    snapshot: &ChannelSnapshot,
    topology: &Topology,
    caps: &CapacityLimits,
) -> SolverResult {
    let user_count = snr.cols();
    let ap_count = snr.rows();
    let mut assign = Vec::with_capacity(user_count);
    for k in 0..user_count {
        let mut best_ap = 0;
        let mut best = f64::NEG_INFINITY;
        for ap in 0..ap_count {
            let v = snr.get(ap, k);
            if v > best {
                best = v;
                best_ap = ap;
            }
        }
        assign.push(best_ap);
    }
    let association = Association::new(assign);
    let objective = sum_rate(&association, snapshot);
    let feasible = is_feasible(&association, caps, topology).feasible;
    SolverResult {
        association,
        objective,
        feasible,
        evaluations: (ap_count * user_count) as u64,
        elapsed: 0.0,
    }
}

/// Capacity-aware greedy: repeatedly assign the highest-rate unserved
/// (user, AP) pair among APs with spare capacity; deterministic tie-break by
/// (user index, AP index). Users left over when all capacity is exhausted
/// fall back to the least-loaded WiFi AP, rendering the result infeasible.
pub fn greedy_capacity_aware(
    snapshot: &ChannelSnapshot,
    topology: &Topology,
    caps: &CapacityLimits,
) -> SolverResult {
    let ap_count = topology.ap_count();
    let user_count = snapshot.user_count();
    let mut loads = alloc::vec![0usize; ap_count];
    let mut assign = alloc::vec![usize::MAX; user_count];
    let mut remaining = user_count;
    let mut evaluations = 0u64;

    while remaining > 0 {
        let mut best: Option<(f64, usize, usize)> = None;
        for user in 0..user_count {
            if assign[user] != usize::MAX {
                continue;
            }
            for ap in 0..ap_count {
                if loads[ap] >= topology.cap(ap, caps) {
                    continue;
                }
                evaluations += 1;
                let rate = snapshot.rate.get(ap, user);
                let better = match best {
                    None => true,
                    Some((b, _, _)) => rate > b,
                };
                if better {
                    best = Some((rate, user, ap));
                }
            }
        }
        match best {
            Some((_, user, ap)) => {
                assign[user] = ap;
                loads[ap] += 1;
                remaining -= 1;
            }
            None => break, // capacity exhausted
        }
    }

    // Leftovers take the least-loaded WiFi AP.
    if remaining > 0 {
        for user in 0..user_count {
            if assign[user] != usize::MAX {
                continue;
            }
            let wifi = (topology.lifi_count..ap_count)
                .min_by_key(|&ap| (loads[ap], ap))
                .expect("topology has at least one WiFi AP");
            assign[user] = wifi;
            loads[wifi] += 1;
        }
    }

    let association = Association::new(assign);
    let objective = sum_rate(&association, snapshot);
    let feasible = is_feasible(&association, caps, topology).feasible;
    SolverResult {
        association,
        objective,
        feasible,
        evaluations,
        elapsed: 0.0,
    }
}
