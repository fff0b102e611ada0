//! Seeded community detection on one layer or on the supra-graph of both
//! layers.
//!
//! In multiplex scope each country is replicated once per layer, intra-layer
//! edges connect replicas of the same layer, and every country's two replicas
//! are joined by a coupling link of weight `omega`. Modularity uses a separate
//! null model per layer.

mod louvain;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::components::Scope;
use crate::error::CommunityError;
use crate::graph::{CountryId, LayerId, MultiplexNetwork};

pub(crate) use louvain::ModularityGraph;

/// Statistic used to fold per-restart community counts into one number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    Median,
    /// Count of the best-quality restart.
    Best,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommunityParams {
    pub seed: u64,
    pub repetitions: usize,
    pub resolution: f64,
    pub omega: f64,
    pub aggregation: Aggregation,
    /// Weight edges by provenance cardinality instead of 1.
    pub weighted: bool,
}

impl Default for CommunityParams {
    fn default() -> Self {
        CommunityParams {
            seed: 1,
            repetitions: 5,
            resolution: 1.0,
            omega: 1.0,
            aggregation: Aggregation::Median,
            weighted: false,
        }
    }
}

impl CommunityParams {
    pub fn validate(&self) -> Result<(), CommunityError> {
        if self.repetitions == 0 {
            return Err(CommunityError::InvalidParams("repetitions must be at least 1".into()));
        }
        if !(self.resolution.is_finite() && self.resolution > 0.0) {
            return Err(CommunityError::InvalidParams(format!(
                "resolution must be positive, got {}",
                self.resolution
            )));
        }
        if !(self.omega.is_finite() && self.omega >= 0.0) {
            return Err(CommunityError::InvalidParams(format!(
                "omega must be non-negative, got {}",
                self.omega
            )));
        }
        Ok(())
    }
}

/// Community labels for every in-scope (country, layer) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub scope: Scope,
    pub seed: u64,
    pub restart: usize,
    pub quality: f64,
    countries: usize,
    /// Canonical labels, indexed layer-major in multiplex scope.
    labels: Vec<usize>,
}

impl Partition {
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, country: CountryId, layer: LayerId) -> Option<usize> {
        if country.0 >= self.countries {
            return None;
        }
        match self.scope {
            Scope::Layer(l) if l == layer => Some(self.labels[country.0]),
            Scope::Layer(_) => None,
            Scope::Multiplex => Some(self.labels[layer.index() * self.countries + country.0]),
        }
    }

    /// `(country, layer, label)` triples in canonical order.
    pub fn assignments(&self) -> Vec<(CountryId, LayerId, usize)> {
        let layers = self.scope.layers();
        let n = self.countries;
        layers
            .iter()
            .enumerate()
            .flat_map(|(slot, &layer)| {
                (0..n).map(move |c| (CountryId(c), layer, slot * n + c))
            })
            .map(|(c, l, idx)| (c, l, self.labels[idx]))
            .collect()
    }
}

pub fn community_count(partition: &Partition) -> usize {
    partition.labels.iter().max().map_or(0, |m| m + 1)
}

/// Folds the counts of several restarts. An even number of counts takes the
/// mean of the two middle values.
pub fn aggregate_count(partitions: &[Partition], aggregation: Aggregation) -> f64 {
    match aggregation {
        Aggregation::Best => best_of(partitions).map_or(0.0, |p| community_count(p) as f64),
        Aggregation::Median => {
            let mut counts: Vec<usize> = partitions.iter().map(community_count).collect();
            counts.sort_unstable();
            match counts.len() {
                0 => 0.0,
                len if len % 2 == 1 => counts[len / 2] as f64,
                len => (counts[len / 2 - 1] + counts[len / 2]) as f64 / 2.0,
            }
        }
    }
}

fn best_of(partitions: &[Partition]) -> Option<&Partition> {
    partitions.iter().reduce(|best, p| if p.quality > best.quality { p } else { best })
}

pub(crate) fn modularity_graph(network: &MultiplexNetwork, scope: Scope, params: &CommunityParams) -> ModularityGraph {
    let n = network.country_count();
    let layers = scope.layers();
    let l = layers.len();
    let mut edges = Vec::new();
    let mut strength = vec![0.0; n * l * l];
    for (slot, &layer) in layers.iter().enumerate() {
        let offset = slot * n;
        for (key, provenance) in network.layer(layer).iter() {
            let w = if params.weighted { provenance.len() as f64 } else { 1.0 };
            let (a, b) = key.endpoints();
            let (a, b) = (offset + a.0, offset + b.0);
            edges.push((a, b, w));
            strength[a * l + slot] += w;
            strength[b * l + slot] += w;
        }
    }
    if l == 2 && params.omega > 0.0 {
        for c in 0..n {
            edges.push((c, n + c, params.omega));
        }
    }
    ModularityGraph::new(n * l, l, &edges, strength, params.resolution)
}

fn derive_seed(seed: u64, restart: usize) -> u64 {
    // splitmix64 finalizer over the pair
    let mut z = seed ^ (restart as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs every restart and returns their partitions in restart order.
pub fn detect_runs(
    network: &MultiplexNetwork,
    scope: Scope,
    params: &CommunityParams,
) -> Result<Vec<Partition>, CommunityError> {
    params.validate()?;
    if network.country_count() == 0 {
        return Err(CommunityError::EmptyGraph);
    }
    let graph = modularity_graph(network, scope, params);
    let runs = (0..params.repetitions)
        .into_par_iter()
        .map(|restart| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(params.seed, restart));
            let (membership, quality) = louvain::louvain(&graph, &mut rng);
            Partition {
                scope,
                seed: params.seed,
                restart,
                quality,
                countries: network.country_count(),
                labels: louvain::compact(&membership),
            }
        })
        .collect();
    Ok(runs)
}

/// Best-quality partition over all restarts; ties go to the earliest restart.
pub fn detect(network: &MultiplexNetwork, scope: Scope, params: &CommunityParams) -> Result<Partition, CommunityError> {
    let runs = detect_runs(network, scope, params)?;
    Ok(best_of(&runs).cloned().expect("at least one restart"))
}

/// Modularity of an arbitrary labelling of the in-scope nodes, using the
/// same objective `detect` maximizes.
pub fn modularity(
    network: &MultiplexNetwork,
    scope: Scope,
    params: &CommunityParams,
    labels: &[usize],
) -> f64 {
    let graph = modularity_graph(network, scope, params);
    assert_eq!(labels.len(), graph.node_count(), "one label per in-scope node");
    if graph.total_weight() <= 0.0 {
        return 0.0;
    }
    graph.modularity(&louvain::compact(labels))
}
