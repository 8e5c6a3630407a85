//! Experiment configuration files.

use std::path::{Path, PathBuf};

use msync_core::dynamics::SmoothingProfile;
use msync_core::graphs::GraphSpec;
use msync_core::manifolds::{gaussian_tangent, random_point_with, ManifoldSpec};
use msync_core::splay::{construct_splay, ClosedGeodesicSpec, GeodesicDescriptor};
use msync_core::{Algorithm, Error, FlowSpec, NetworkGraph, SplayConfig, SystemState};
use nalgebra::DMatrix;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::failure::Failure;

fn default_dt() -> f64 {
    1e-3
}
fn default_t_end() -> f64 {
    10.0
}
fn default_sample_every() -> usize {
    100
}
fn default_grad_tol() -> f64 {
    1e-9
}

/// Initial agent positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    /// Independent uniform points.
    Random {},
    /// One uniform point, every agent moved by an isotropic Gaussian tangent.
    ConsensusPlusNoise { sigma: f64 },
    /// Splay state on a catalog geodesic, optionally with Gaussian noise.
    Splay {
        geodesic: GeodesicDescriptor,
        #[serde(default)]
        sigma: f64,
    },
    /// Ambient coordinates per agent, flattened column-major.
    Explicit { points: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub manifold: ManifoldSpec,
    pub graph: GraphSpec,
    pub algorithm: Algorithm,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
    #[serde(default = "default_grad_tol")]
    pub grad_tol: f64,
    /// Width of the smoothing band; defaults to a tenth of the injectivity radius.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Designated cycle (1-based); defaults to the ring 1-2-...-N-1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycle_order: Option<Vec<usize>>,
    pub initial_condition: InitialCondition,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

/// Everything needed to run one experiment.
pub struct Prepared {
    pub initial: SystemState,
    pub flow: FlowSpec,
    pub profile: SmoothingProfile,
    pub splay: Option<SplayConfig>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, Failure> {
        serde_json::from_str(text).map_err(|e| Failure::config(format!("invalid config: {e}")))
    }

    pub fn profile(&self) -> Result<SmoothingProfile, Error> {
        match self.epsilon {
            Some(eps) => SmoothingProfile::new(self.manifold.injectivity_radius(), eps),
            None => Ok(SmoothingProfile::for_manifold(&self.manifold)),
        }
    }

    pub fn splay_config(&self, graph: &NetworkGraph, geodesic: GeodesicDescriptor) -> Result<SplayConfig, Error> {
        let geo = ClosedGeodesicSpec::from_descriptor(self.manifold, geodesic)?;
        match &self.cycle_order {
            Some(o) => SplayConfig::with_order(geo, graph.clone(), o.clone(), self.profile()?),
            None => {
                let mut c = SplayConfig::new(geo, graph.clone())?;
                c.profile = self.profile()?;
                Ok(c)
            }
        }
    }

    /// Builds the graph, flow and initial state. All randomness comes from
    /// one ChaCha8 stream seeded with `self.seed`.
    pub fn prepare(&self) -> Result<Prepared, Error> {
        self.manifold.validate()?;
        let graph = self.graph.build()?;
        let profile = self.profile()?;
        let n = graph.n_agents();
        let m = self.manifold;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut splay = None;
        let initial = match &self.initial_condition {
            InitialCondition::Random {} => SystemState::from_points((0..n).map(|_| random_point_with(m, &mut rng)).collect())?,
            InitialCondition::ConsensusPlusNoise { sigma } => {
                let base = random_point_with(m, &mut rng);
                let noise = (0..n).map(|_| gaussian_tangent(&base, *sigma, &mut rng)).collect::<Vec<_>>();
                SystemState::consensus(&base, n).perturbed(&noise)?
            }
            InitialCondition::Splay { geodesic, sigma } => {
                let c = self.splay_config(&graph, *geodesic)?;
                let s = construct_splay(&c)?;
                splay = Some(c);
                if *sigma > 0.0 {
                    let noise = s.points().iter().map(|p| gaussian_tangent(p, *sigma, &mut rng)).collect::<Vec<_>>();
                    s.perturbed(&noise)?
                } else {
                    s
                }
            }
            InitialCondition::Explicit { points } => {
                let (r, c) = m.ambient_shape();
                if points.len() != n {
                    return Err(Error::Input(format!("{} explicit points for {n} agents", points.len())));
                }
                let pts = points
                    .iter()
                    .map(|p| {
                        if p.len() != r * c {
                            return Err(Error::Input(format!("explicit point has {} entries, {m} needs {}", p.len(), r * c)));
                        }
                        Ok(DMatrix::from_column_slice(r, c, p))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                SystemState::new(m, pts)?
            }
        };
        let mut flow = FlowSpec::new(self.algorithm, graph)
            .with_dt(self.dt)
            .with_t_end(self.t_end)
            .with_sample_every(self.sample_every)
            .with_grad_tol(self.grad_tol)
            .with_profile(profile);
        if let Some(o) = &self.cycle_order {
            flow = flow.with_cycle_order(o.clone());
        }
        flow.validate(&m, n)?;
        Ok(Prepared { initial, flow, profile, splay })
    }
}
