use std::collections::BTreeMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{is_equilibrium, splay_set_distance, SplayConfig};
use crate::dynamics::{integrate, FlowSpec, SystemState};
use crate::error::{input, Result};
use crate::manifolds::random_tangent_with;

/// A perturbed run counts as returned when it ends this close to the splay set.
pub const RETURN_TOL: f64 = 1e-4;

/// Velocity bound for the equilibrium precondition.
const EQUILIBRIUM_TOL: f64 = 1e-8;

/// A draw that moves the state less than this fraction of `magnitude` away
/// from the splay set is a shift along the set and is redrawn.
const DEGENERATE_FRACTION: f64 = 1e-3;
const MAX_DRAWS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub return_fraction: f64,
    /// `"Returned"` or the outcome reached after escaping.
    pub outcomes: BTreeMap<String, usize>,
    pub trials: usize,
    pub magnitude: f64,
    pub seed: u64,
    /// Final distance to the splay set per trial.
    pub final_distances: Vec<f64>,
    /// Draws rejected because they only shifted the state along the splay set.
    pub redrawn: usize,
}

/// Perturbs every agent by a random tangent of norm `magnitude`, integrates
/// `flow` and checks whether the run comes back to the splay set.
///
/// Trial `k` draws its perturbation from a ChaCha8 stream seeded with the
/// `k`-th output of a ChaCha8 stream seeded with `seed`. Draws that leave the
/// state on the splay set (on the circle, equal signs everywhere give a rigid
/// rotation) are redrawn from the same stream.
pub fn stability_probe(
    state: &SystemState,
    config: &SplayConfig,
    flow: &FlowSpec,
    magnitude: f64,
    trials: usize,
    seed: u64,
) -> Result<ProbeReport> {
    if !(magnitude >= 0.0) {
        return input("perturbation magnitude must be nonnegative");
    }
    let (eq, v) = is_equilibrium(state, flow, EQUILIBRIUM_TOL)?;
    if !eq {
        return input(format!("probe needs an equilibrium; velocity norm is {v:.3e}"));
    }
    let mut seeds = ChaCha8Rng::seed_from_u64(seed);
    let points = state.points();
    let mut outcomes = BTreeMap::new();
    let mut final_distances = Vec::with_capacity(trials);
    let mut returned = 0usize;
    let mut redrawn = 0usize;
    let base_distance = splay_set_distance(state, config)?;
    for _ in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seeds.next_u64());
        let mut draws = 0;
        let start = loop {
            let tangents: Vec<_> = points.iter().map(|p| random_tangent_with(p, magnitude, &mut rng)).collect();
            let start = state.perturbed(&tangents)?;
            draws += 1;
            let moved = splay_set_distance(&start, config)? - base_distance;
            if magnitude == 0.0 || moved >= DEGENERATE_FRACTION * magnitude || draws == MAX_DRAWS {
                break start;
            }
            redrawn += 1;
        };
        let label = match integrate(&start, flow) {
            Ok(traj) => {
                let d = splay_set_distance(traj.final_state(), config)?;
                final_distances.push(d);
                if d < RETURN_TOL {
                    returned += 1;
                    "Returned".to_string()
                } else {
                    traj.outcome.kind.to_string()
                }
            }
            Err(e) => {
                log::warn!("probe trial failed: {e}");
                final_distances.push(f64::NAN);
                "IntegratorFailure".to_string()
            }
        };
        *outcomes.entry(label).or_insert(0) += 1;
    }
    Ok(ProbeReport {
        return_fraction: if trials == 0 { 0.0 } else { returned as f64 / trials as f64 },
        outcomes,
        trials,
        magnitude,
        seed,
        final_distances,
        redrawn,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Algorithm;
    use crate::graphs::NetworkGraph;
    use crate::splay::{construct_splay, ClosedGeodesicSpec};

    #[test]
    fn stable_twist_returns() {
        let g = NetworkGraph::cycle(6, &[]).unwrap();
        let c = SplayConfig::new(ClosedGeodesicSpec::circle(1).unwrap(), g.clone()).unwrap();
        let s = construct_splay(&c).unwrap();
        let flow = FlowSpec::new(Algorithm::GeodesicConsensus, g).with_dt(0.01).with_t_end(60.0).with_sample_every(1000);
        let r = stability_probe(&s, &c, &flow, 1e-2, 3, 7).unwrap();
        assert_eq!(r.return_fraction, 1.0, "{r:?}");
        assert_eq!(r.outcomes.get("Returned"), Some(&3));
    }

    #[test]
    fn rejects_non_equilibrium() {
        let g = NetworkGraph::cycle(4, &[]).unwrap();
        let c = SplayConfig::new(ClosedGeodesicSpec::circle(1).unwrap(), g.clone()).unwrap();
        let s = SystemState::circle_angles(&[0.0, 0.1, 0.2, 0.3]);
        assert!(stability_probe(&s, &c, &FlowSpec::new(Algorithm::ChordalConsensus, g), 1e-2, 1, 0).is_err());
    }
}
