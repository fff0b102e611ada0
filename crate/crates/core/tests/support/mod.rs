//! Small bundled graphs plus brute-force oracles that share no code with the
//! library's algorithms.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use treatyweb_core::{build_network, Country, CountryId, LayerId, LayerTreaty, MultiplexNetwork};

#[derive(Debug, Clone)]
pub struct SmallGraph {
    pub name: &'static str,
    pub n: usize,
    pub political: Vec<(usize, usize)>,
    pub economic: Vec<(usize, usize)>,
}

impl SmallGraph {
    pub fn edges(&self, layer: LayerId) -> &[(usize, usize)] {
        match layer {
            LayerId::Political => &self.political,
            LayerId::Economic => &self.economic,
        }
    }

    pub fn network(&self) -> MultiplexNetwork {
        network_from_edges(self.n, &self.political, &self.economic)
    }
}

pub fn iso3(i: usize) -> String {
    let a = (b'A' + (i / 26) as u8) as char;
    let b = (b'A' + (i % 26) as u8) as char;
    format!("X{a}{b}")
}

pub fn countries(n: usize) -> Vec<Country> {
    (0..n).map(|i| Country { id: CountryId(i), iso3: iso3(i), name: format!("Country {i}") }).collect()
}

/// One two-member treaty per edge.
pub fn network_from_edges(n: usize, political: &[(usize, usize)], economic: &[(usize, usize)]) -> MultiplexNetwork {
    let mut treaties = Vec::new();
    for (layer, edges) in [(LayerId::Political, political), (LayerId::Economic, economic)] {
        for &(a, b) in edges {
            treaties.push(LayerTreaty {
                acronym: format!("{}{}-{}", &layer.as_str()[..1], a, b),
                name: String::new(),
                layer,
                members: vec![CountryId(a), CountryId(b)],
            });
        }
    }
    build_network(countries(n), treaties, &[]).unwrap()
}

pub fn clique(nodes: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, &a) in nodes.iter().enumerate() {
        for &b in &nodes[i + 1..] {
            out.push((a, b));
        }
    }
    out
}

pub fn path3() -> SmallGraph {
    SmallGraph { name: "path3", n: 3, political: vec![(0, 1), (1, 2)], economic: vec![] }
}

pub fn triangle() -> SmallGraph {
    SmallGraph { name: "triangle", n: 3, political: clique(&[0, 1, 2]), economic: vec![] }
}

pub fn pair() -> SmallGraph {
    SmallGraph { name: "pair", n: 2, political: vec![(0, 1)], economic: vec![] }
}

pub fn two_triangles() -> SmallGraph {
    let mut e = clique(&[0, 1, 2]);
    e.extend(clique(&[3, 4, 5]));
    SmallGraph { name: "two_triangles", n: 6, political: e, economic: vec![] }
}

pub fn k5() -> SmallGraph {
    SmallGraph { name: "k5", n: 5, political: clique(&[0, 1, 2, 3, 4]), economic: vec![] }
}

/// Two K4s joined by a single edge 3-4.
pub fn barbell8() -> SmallGraph {
    let mut e = clique(&[0, 1, 2, 3]);
    e.extend(clique(&[4, 5, 6, 7]));
    e.push((3, 4));
    SmallGraph { name: "barbell8", n: 8, political: e, economic: vec![] }
}

/// Two K4s joined through bridge node 8.
pub fn barbell9() -> SmallGraph {
    let mut e = clique(&[0, 1, 2, 3]);
    e.extend(clique(&[4, 5, 6, 7]));
    e.push((3, 8));
    e.push((8, 4));
    SmallGraph { name: "barbell9", n: 9, political: e, economic: vec![] }
}

/// Two K4s each hanging off its own hub; the hubs are adjacent.
pub fn double_barbell() -> SmallGraph {
    let mut e = clique(&[0, 1, 2, 3]);
    e.extend(clique(&[4, 5, 6, 7]));
    e.extend([(3, 8), (8, 9), (9, 4)]);
    SmallGraph { name: "double_barbell", n: 10, political: e, economic: vec![] }
}

/// K1,5 with hub 0.
pub fn star6() -> SmallGraph {
    SmallGraph { name: "star6", n: 6, political: (1..6).map(|i| (0, i)).collect(), economic: vec![] }
}

pub fn lollipop() -> SmallGraph {
    let mut e = clique(&[0, 1, 2, 3]);
    e.extend([(3, 4), (4, 5), (5, 6)]);
    SmallGraph { name: "lollipop", n: 7, political: e, economic: vec![] }
}

/// Both layers populated, 5 countries (10 supra-nodes).
pub fn duplex5() -> SmallGraph {
    SmallGraph {
        name: "duplex5",
        n: 5,
        political: vec![(0, 1), (1, 2), (0, 2), (3, 4)],
        economic: vec![(0, 1), (2, 3), (3, 4), (2, 4)],
    }
}

/// Both layers populated, 4 countries (8 supra-nodes).
pub fn duplex4() -> SmallGraph {
    SmallGraph { name: "duplex4", n: 4, political: vec![(0, 1), (2, 3)], economic: vec![(1, 2), (0, 1)] }
}

pub fn with_isolates() -> SmallGraph {
    SmallGraph { name: "with_isolates", n: 7, political: clique(&[0, 1, 2]), economic: vec![(4, 5)] }
}

pub fn eleven_ring() -> SmallGraph {
    let mut e: Vec<_> = (0..11).map(|i| (i, (i + 1) % 11)).collect();
    e.push((0, 5));
    SmallGraph { name: "eleven_ring", n: 11, political: e, economic: vec![(0, 1)] }
}

pub fn twelve_mixed() -> SmallGraph {
    let mut pol = clique(&[0, 1, 2, 3]);
    pol.extend([(4, 5), (5, 6), (7, 8)]);
    let mut eco = clique(&[6, 7, 8]);
    eco.extend([(9, 10), (3, 11), (0, 9)]);
    SmallGraph { name: "twelve_mixed", n: 12, political: pol, economic: eco }
}

/// Every bundled graph.
pub fn bundled() -> Vec<SmallGraph> {
    vec![
        path3(),
        triangle(),
        pair(),
        two_triangles(),
        k5(),
        barbell8(),
        barbell9(),
        double_barbell(),
        star6(),
        lollipop(),
        duplex4(),
        duplex5(),
        with_isolates(),
        eleven_ring(),
        twelve_mixed(),
    ]
}

// ---------------------------------------------------------------------------
// Connectivity oracle: BFS over an adjacency matrix.

pub fn bfs_components(n: usize, edges: &[(usize, usize)]) -> (usize, usize, Vec<usize>) {
    let mut adj = vec![vec![false; n]; n];
    for &(a, b) in edges {
        adj[a][b] = true;
        adj[b][a] = true;
    }
    let mut seen = vec![false; n];
    let mut sizes = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut size = 0;
        while let Some(v) = queue.pop_front() {
            size += 1;
            for w in 0..n {
                if adj[v][w] && !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        sizes.push(size);
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    (sizes.len(), sizes.first().copied().unwrap_or(0), sizes)
}

pub fn drop_incident(edges: &[(usize, usize)], removed: &BTreeSet<usize>) -> Vec<(usize, usize)> {
    edges.iter().copied().filter(|(a, b)| !removed.contains(a) && !removed.contains(b)).collect()
}

// ---------------------------------------------------------------------------
// Modularity oracle: dense modularity matrix, exhaustive set partitions.

/// Dense `B` matrix and `2 mu` for single-layer or supra-graph modularity.
pub struct DenseModularity {
    pub size: usize,
    pub b: Vec<Vec<f64>>,
    pub two_mu: f64,
    pub supra_degree: Vec<f64>,
}

pub fn dense_single(n: usize, edges: &[(usize, usize)], gamma: f64) -> DenseModularity {
    let mut a = vec![vec![0.0; n]; n];
    for &(x, y) in edges {
        a[x][y] += 1.0;
        a[y][x] += 1.0;
    }
    let k: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    let b = (0..n)
        .map(|i| (0..n).map(|j| a[i][j] - if two_m > 0.0 { gamma * k[i] * k[j] / two_m } else { 0.0 }).collect())
        .collect();
    DenseModularity { size: n, b, two_mu: two_m, supra_degree: k }
}

/// Multislice modularity matrix over replicas `(layer, country)`, indexed
/// `layer * n + country`.
pub fn dense_supra(g: &SmallGraph, gamma: f64, omega: f64) -> DenseModularity {
    let n = g.n;
    let size = 2 * n;
    let mut b = vec![vec![0.0; size]; size];
    let mut supra_degree = vec![0.0; size];
    let mut two_mu = 0.0;
    for (s, layer) in LayerId::ALL.iter().enumerate() {
        let single = dense_single(n, g.edges(*layer), gamma);
        let adj_sum: f64 = single.supra_degree.iter().sum();
        two_mu += adj_sum;
        for i in 0..n {
            supra_degree[s * n + i] += single.supra_degree[i];
            for j in 0..n {
                b[s * n + i][s * n + j] = single.b[i][j];
            }
        }
    }
    for i in 0..n {
        b[i][n + i] += omega;
        b[n + i][i] += omega;
        supra_degree[i] += omega;
        supra_degree[n + i] += omega;
        two_mu += 2.0 * omega;
    }
    DenseModularity { size, b, two_mu, supra_degree }
}

impl DenseModularity {
    pub fn quality(&self, labels: &[usize]) -> f64 {
        if self.two_mu <= 0.0 {
            return 0.0;
        }
        let mut q = 0.0;
        for i in 0..self.size {
            for j in 0..self.size {
                if labels[i] == labels[j] {
                    q += self.b[i][j];
                }
            }
        }
        q / self.two_mu
    }

    /// Maximum modularity over all partitions, and the set of community
    /// counts attained by maximizers (within `tol`). Nodes of zero supra
    /// degree are kept as singletons.
    pub fn brute_force(&self, tol: f64) -> (f64, BTreeSet<usize>) {
        let active: Vec<usize> = (0..self.size).filter(|&i| self.supra_degree[i] > 0.0).collect();
        let isolated = self.size - active.len();
        let mut best = f64::NEG_INFINITY;
        let mut counts = BTreeSet::new();
        let mut labels = vec![usize::MAX; self.size];
        let mut next = active.len();
        for i in 0..self.size {
            if self.supra_degree[i] == 0.0 {
                labels[i] = next;
                next += 1;
            }
        }
        for_each_partition(active.len(), &mut |rgs, blocks| {
            for (pos, &node) in active.iter().enumerate() {
                labels[node] = rgs[pos];
            }
            let q = self.quality(&labels);
            let count = blocks + isolated;
            if q > best + tol {
                best = q;
                counts.clear();
                counts.insert(count);
            } else if (q - best).abs() <= tol {
                counts.insert(count);
            }
        });
        if active.is_empty() {
            return (0.0, BTreeSet::from([self.size]));
        }
        (best, counts)
    }
}

/// Calls `f` with every restricted growth string of length `n` and its
/// block count.
pub fn for_each_partition(n: usize, f: &mut dyn FnMut(&[usize], usize)) {
    fn rec(pos: usize, n: usize, rgs: &mut Vec<usize>, max: usize, f: &mut dyn FnMut(&[usize], usize)) {
        if pos == n {
            f(rgs, if n == 0 { 0 } else { max + 1 });
            return;
        }
        let limit = if pos == 0 { 0 } else { max + 1 };
        for v in 0..=limit {
            rgs[pos] = v;
            rec(pos + 1, n, rgs, if pos == 0 { 0 } else { max.max(v) }, f);
        }
    }
    let mut rgs = vec![0; n];
    if n == 0 {
        f(&rgs, 0);
    } else {
        rec(0, n, &mut rgs, 0, f);
    }
}

/// Community count of the single-layer optimum; panics if maximizers
/// disagree on it.
pub fn oracle_community_count(n: usize, edges: &[(usize, usize)]) -> f64 {
    let (_, counts) = dense_single(n, edges, 1.0).brute_force(1e-12);
    assert_eq!(counts.len(), 1, "ambiguous community count {counts:?}");
    *counts.iter().next().unwrap() as f64
}

/// Single-layer `(c, q, g, delta)` between two edge sets, computed entirely
/// by oracles: exhaustive maximum modularity and BFS.
pub fn oracle_delta_edges(n: usize, before: &[(usize, usize)], after: &[(usize, usize)]) -> (f64, f64, f64, f64) {
    let (q0, g0, _) = bfs_components(n, before);
    let (q1, g1, _) = bfs_components(n, after);
    let c = oracle_community_count(n, after) / oracle_community_count(n, before);
    let q = q1 as f64 / q0 as f64;
    let g = g1 as f64 / g0 as f64;
    (c, q, g, (c * q) / g)
}

pub fn oracle_delta(n: usize, edges: &[(usize, usize)], removed: &BTreeSet<usize>) -> (f64, f64, f64, f64) {
    oracle_delta_edges(n, edges, &drop_incident(edges, removed))
}

/// Edge set of each layer as plain endpoint pairs.
pub fn edge_sets(net: &MultiplexNetwork) -> BTreeMap<LayerId, BTreeSet<(usize, usize)>> {
    LayerId::ALL
        .iter()
        .map(|&l| {
            let set = net.layer(l).keys().map(|k| {
                let (a, b) = k.endpoints();
                (a.0, b.0)
            });
            (l, set.collect())
        })
        .collect()
}
