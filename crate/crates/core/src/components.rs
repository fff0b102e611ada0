//! Connected components over one layer or the union of both layers.

use serde::{Deserialize, Serialize};

use crate::graph::{LayerId, MultiplexNetwork};

/// Which edge set a computation looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scope {
    Layer(LayerId),
    Multiplex,
}

impl Scope {
    pub fn layers(self) -> Vec<LayerId> {
        match self {
            Scope::Layer(l) => vec![l],
            Scope::Multiplex => LayerId::ALL.to_vec(),
        }
    }
}

impl std::fmt::Display for Scope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scope::Layer(l) => write!(f, "layer:{l}"),
            Scope::Multiplex => f.write_str("multiplex"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentsSummary {
    pub count: usize,
    pub giant_size: usize,
    /// Component sizes, largest first.
    pub sizes: Vec<usize>,
}

struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet { parent: (0..n).collect(), size: vec![1; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }
}

/// Isolated countries count as singleton components.
pub fn components(network: &MultiplexNetwork, scope: Scope) -> ComponentsSummary {
    let n = network.country_count();
    let mut dsu = DisjointSet::new(n);
    for layer in scope.layers() {
        for key in network.layer(layer).keys() {
            let (a, b) = key.endpoints();
            dsu.union(a.0, b.0);
        }
    }
    let roots: Vec<usize> = (0..n).filter(|&x| dsu.find(x) == x).collect();
    let mut sizes: Vec<usize> = roots.iter().map(|&r| dsu.size[r]).collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    ComponentsSummary {
        count: sizes.len(),
        giant_size: sizes.first().copied().unwrap_or(0),
        sizes,
    }
}
