//! Two-phase Louvain optimizer for modularity with a per-layer null model.
//!
//! The objective is the multislice form
//!
//! ```text
//! Q = 1/(2mu) * sum_ij [ A_ij - gamma * sum_s k_is k_js / (2 m_s) ] * [g_i == g_j]
//! ```
//!
//! where `A` already contains interlayer coupling links and `k_is` is the
//! strength of node `i` inside layer `s`. Coupling links carry no null-model
//! term. A single layer reduces this to ordinary Newman modularity. After
//! aggregation a super node keeps one strength per layer, so the same gain
//! formula applies at every level.

use rand::seq::SliceRandom;
use rand::Rng;

/// Moves must beat the incumbent by more than this to be taken.
const MOVE_EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
pub(crate) struct ModularityGraph {
    n: usize,
    layers: usize,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
    /// Ordered-pair weight `A_ii` (twice the internal weight after aggregation).
    self_loops: Vec<f64>,
    /// `n * layers` null-model strengths.
    strength: Vec<f64>,
    /// `2 m_s` per layer.
    layer_total: Vec<f64>,
    two_mu: f64,
    resolution: f64,
}

impl ModularityGraph {
    /// `edges` are undirected `(i, j, w)` with `i != j`; parallel entries add up.
    /// `strength` is laid out node-major with `layers` entries per node.
    pub(crate) fn new(
        n: usize,
        layers: usize,
        edges: &[(usize, usize, f64)],
        strength: Vec<f64>,
        resolution: f64,
    ) -> Self {
        debug_assert_eq!(strength.len(), n * layers);
        let mut degree = vec![0usize; n];
        for &(i, j, _) in edges {
            degree[i] += 1;
            degree[j] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut targets = vec![0; offsets[n]];
        let mut weights = vec![0.0; offsets[n]];
        for &(i, j, w) in edges {
            targets[fill[i]] = j;
            weights[fill[i]] = w;
            fill[i] += 1;
            targets[fill[j]] = i;
            weights[fill[j]] = w;
            fill[j] += 1;
        }
        let mut layer_total = vec![0.0; layers];
        for (idx, s) in strength.iter().enumerate() {
            layer_total[idx % layers] += s;
        }
        let two_mu = weights.iter().sum();
        ModularityGraph {
            n,
            layers,
            offsets,
            targets,
            weights,
            self_loops: vec![0.0; n],
            strength,
            layer_total,
            two_mu,
            resolution,
        }
    }

    pub(crate) fn node_count(&self) -> usize {
        self.n
    }

    pub(crate) fn total_weight(&self) -> f64 {
        self.two_mu
    }

    fn neighbours(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[i]..self.offsets[i + 1];
        self.targets[range.clone()].iter().copied().zip(self.weights[range].iter().copied())
    }

    fn node_strength(&self, i: usize) -> &[f64] {
        &self.strength[i * self.layers..(i + 1) * self.layers]
    }

    /// Null-model cost of putting node `i` next to community totals `tot`.
    fn null_term(&self, i: usize, tot: &[f64]) -> f64 {
        let k = self.node_strength(i);
        let mut acc = 0.0;
        for s in 0..self.layers {
            if self.layer_total[s] > 0.0 {
                acc += k[s] * tot[s] / self.layer_total[s];
            }
        }
        self.resolution * acc
    }

    /// Modularity of `membership` (labels in `0..k`).
    pub(crate) fn modularity(&self, membership: &[usize]) -> f64 {
        if self.two_mu <= 0.0 {
            return 0.0;
        }
        let k = membership.iter().max().map_or(0, |m| m + 1);
        let mut inside = 0.0;
        let mut tot = vec![0.0; k * self.layers];
        for i in 0..self.n {
            let c = membership[i];
            inside += self.self_loops[i];
            for (j, w) in self.neighbours(i) {
                if membership[j] == c {
                    inside += w;
                }
            }
            for (s, v) in self.node_strength(i).iter().enumerate() {
                tot[c * self.layers + s] += v;
            }
        }
        let mut expected = 0.0;
        for (idx, t) in tot.iter().enumerate() {
            let lt = self.layer_total[idx % self.layers];
            if lt > 0.0 {
                expected += t * t / lt;
            }
        }
        (inside - self.resolution * expected) / self.two_mu
    }

    /// Local moving phase starting from `initial` (labels below `n`).
    /// Returns labels compacted to `0..k` and whether any node changed
    /// community.
    fn local_moves<R: Rng>(&self, initial: &[usize], rng: &mut R) -> (Vec<usize>, bool) {
        let l = self.layers;
        let mut comm = initial.to_vec();
        let mut tot = vec![0.0; self.n * l];
        for (i, &c) in comm.iter().enumerate() {
            for s in 0..l {
                tot[c * l + s] += self.strength[i * l + s];
            }
        }
        let mut neigh_w = vec![0.0; self.n];
        let mut seen = vec![false; self.n];
        let mut touched = Vec::new();
        let mut order: Vec<usize> = (0..self.n).collect();
        order.shuffle(rng);

        let mut any_move = false;
        loop {
            let mut moved = false;
            for &i in &order {
                let own = comm[i];
                for (j, w) in self.neighbours(i) {
                    let c = comm[j];
                    if !seen[c] {
                        seen[c] = true;
                        touched.push(c);
                    }
                    neigh_w[c] += w;
                }
                for s in 0..l {
                    tot[own * l + s] -= self.strength[i * l + s];
                }
                let mut best = own;
                let mut best_gain = neigh_w[own] - self.null_term(i, &tot[own * l..own * l + l]);
                for &c in &touched {
                    if c == own {
                        continue;
                    }
                    let gain = neigh_w[c] - self.null_term(i, &tot[c * l..c * l + l]);
                    if gain > best_gain + MOVE_EPS {
                        best = c;
                        best_gain = gain;
                    }
                }
                for s in 0..l {
                    tot[best * l + s] += self.strength[i * l + s];
                }
                if best != own {
                    comm[i] = best;
                    moved = true;
                }
                for &c in &touched {
                    neigh_w[c] = 0.0;
                    seen[c] = false;
                }
                touched.clear();
            }
            if !moved {
                break;
            }
            any_move = true;
        }
        (compact(&comm), any_move)
    }

    /// Collapses each community of `membership` into one node.
    fn aggregate(&self, membership: &[usize], k: usize) -> ModularityGraph {
        let l = self.layers;
        let mut self_loops = vec![0.0; k];
        let mut strength = vec![0.0; k * l];
        let mut between: std::collections::BTreeMap<(usize, usize), f64> = Default::default();
        for i in 0..self.n {
            let ci = membership[i];
            self_loops[ci] += self.self_loops[i];
            for s in 0..l {
                strength[ci * l + s] += self.strength[i * l + s];
            }
            for (j, w) in self.neighbours(i) {
                let cj = membership[j];
                if ci == cj {
                    self_loops[ci] += w;
                } else if ci < cj {
                    *between.entry((ci, cj)).or_insert(0.0) += w;
                }
            }
        }
        let edges: Vec<(usize, usize, f64)> = between.into_iter().map(|((a, b), w)| (a, b, w)).collect();
        let mut next = ModularityGraph::new(k, l, &edges, strength, self.resolution);
        next.layer_total.clone_from(&self.layer_total);
        next.self_loops = self_loops;
        next.two_mu = self.two_mu;
        next
    }
}

/// Relabels to `0..k` in order of first appearance.
pub(crate) fn compact(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

/// Runs Louvain to a fixed point and returns the membership of the original
/// nodes together with its modularity.
///
/// Each cycle first moves single original nodes, starting from the current
/// membership, then climbs the aggregation levels. Cycles repeat until no
/// original node wants to move, so the result is also locally optimal with
/// respect to single-node moves on the input graph.
pub(crate) fn louvain<R: Rng>(graph: &ModularityGraph, rng: &mut R) -> (Vec<usize>, f64) {
    let mut membership: Vec<usize> = (0..graph.n).collect();
    if graph.two_mu <= 0.0 {
        return (membership, 0.0);
    }
    let mut quality = graph.modularity(&membership);
    loop {
        let (base, moved) = graph.local_moves(&membership, rng);
        if !moved {
            break;
        }
        membership = base;
        let mut k = membership.iter().max().map_or(0, |m| m + 1);
        let mut level = graph.aggregate(&membership, k);
        let mut level_quality = graph.modularity(&membership);
        assert!(
            level_quality >= quality - 1e-10,
            "modularity decreased during node moves: {quality} -> {level_quality}"
        );
        while k > 1 {
            let identity: Vec<usize> = (0..k).collect();
            let (moves, improved) = level.local_moves(&identity, rng);
            if !improved {
                break;
            }
            for m in membership.iter_mut() {
                *m = moves[*m];
            }
            k = moves.iter().max().map_or(0, |m| m + 1);
            level = level.aggregate(&moves, k);
            let next = level.modularity(&(0..k).collect::<Vec<_>>());
            assert!(
                next >= level_quality - 1e-10,
                "modularity decreased across Louvain levels: {level_quality} -> {next}"
            );
            level_quality = next;
        }
        let next = graph.modularity(&membership);
        if next <= quality + 1e-15 {
            quality = next;
            break;
        }
        quality = next;
    }
    (membership, quality)
}
