//! Two-layer country/treaty multiplex network.
//!
//! Every treaty is projected onto the complete graph over its members within
//! its layer. Overlapping deals merge into a single edge whose provenance set
//! records every treaty (or bilateral deal) that supports it, so removing a
//! treaty only deletes edges that lose their last supporter.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::GraphError;

/// Dense country index, `0..N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CountryId(pub usize);

/// Index into the per-layer treaty registry of a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TreatyId(pub usize);

impl fmt::Display for CountryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

impl fmt::Display for TreatyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerId {
    Political,
    Economic,
}

impl LayerId {
    pub const ALL: [LayerId; 2] = [LayerId::Political, LayerId::Economic];

    pub fn index(self) -> usize {
        match self {
            LayerId::Political => 0,
            LayerId::Economic => 1,
        }
    }

    pub fn other(self) -> LayerId {
        match self {
            LayerId::Political => LayerId::Economic,
            LayerId::Economic => LayerId::Political,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LayerId::Political => "political",
            LayerId::Economic => "economic",
        }
    }
}

impl fmt::Display for LayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LayerId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "political" => Ok(LayerId::Political),
            "economic" => Ok(LayerId::Economic),
            other => Err(format!("unknown layer `{other}` (expected political|economic)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Country {
    pub id: CountryId,
    pub iso3: String,
    pub name: String,
}

/// A treaty restricted to one layer. Treaties that span both layers appear
/// once per layer with distinct ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerTreaty {
    pub acronym: String,
    pub name: String,
    pub layer: LayerId,
    pub members: Vec<CountryId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BilateralDeal {
    pub a: CountryId,
    pub b: CountryId,
    pub layer: LayerId,
}

/// Something that supports an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Source {
    Treaty(TreatyId),
    Bilateral,
}

/// Unordered endpoint pair, stored with the smaller id first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeKey(CountryId, CountryId);

impl EdgeKey {
    /// Returns `None` for self-loops.
    pub fn new(a: CountryId, b: CountryId) -> Option<EdgeKey> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some(EdgeKey(a, b)),
            std::cmp::Ordering::Greater => Some(EdgeKey(b, a)),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn endpoints(self) -> (CountryId, CountryId) {
        (self.0, self.1)
    }

    pub fn touches(self, c: CountryId) -> bool {
        self.0 == c || self.1 == c
    }
}

/// Borrowed view of one edge record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge<'a> {
    pub key: EdgeKey,
    pub layer: LayerId,
    pub provenance: &'a BTreeSet<Source>,
}

/// Edge set of a single layer.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LayerEdges {
    edges: BTreeMap<EdgeKey, BTreeSet<Source>>,
}

impl LayerEdges {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, key: EdgeKey) -> bool {
        self.edges.contains_key(&key)
    }

    pub fn provenance(&self, key: EdgeKey) -> Option<&BTreeSet<Source>> {
        self.edges.get(&key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (EdgeKey, &BTreeSet<Source>)> + '_ {
        self.edges.iter().map(|(k, p)| (*k, p))
    }

    pub fn keys(&self) -> impl Iterator<Item = EdgeKey> + '_ {
        self.edges.keys().copied()
    }

    fn insert(&mut self, key: EdgeKey, source: Source) {
        self.edges.entry(key).or_default().insert(source);
    }

    pub fn degree(&self, c: CountryId) -> usize {
        self.edges.keys().filter(|k| k.touches(c)).count()
    }
}

/// Two layers over one shared country set.
///
/// Values are immutable: every removal returns a new network and the
/// untouched layer is shared with the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiplexNetwork {
    countries: Arc<Vec<Country>>,
    treaties: Arc<Vec<LayerTreaty>>,
    layers: [Arc<LayerEdges>; 2],
}

fn validate_countries(countries: &[Country]) -> Result<(), GraphError> {
    let mut seen = HashSet::new();
    for (pos, c) in countries.iter().enumerate() {
        if c.id.0 != pos {
            return Err(GraphError::NonContiguousIds { position: pos, id: c.id.0 });
        }
        let valid = c.iso3.len() == 3 && c.iso3.bytes().all(|b| b.is_ascii_uppercase());
        if !valid {
            return Err(GraphError::InvalidIso3(c.iso3.clone()));
        }
        if !seen.insert(c.iso3.as_str()) {
            return Err(GraphError::DuplicateIso3(c.iso3.clone()));
        }
    }
    Ok(())
}

/// Builds the multiplex network by clique-projecting every treaty onto its
/// layer and adding bilateral deals.
pub fn build_network(
    countries: Vec<Country>,
    treaties: Vec<LayerTreaty>,
    bilaterals: &[BilateralDeal],
) -> Result<MultiplexNetwork, GraphError> {
    validate_countries(&countries)?;
    let n = countries.len();
    let mut layers = [LayerEdges::default(), LayerEdges::default()];

    for (t, treaty) in treaties.iter().enumerate() {
        if let Some(bad) = treaty.members.iter().find(|m| m.0 >= n) {
            return Err(GraphError::UnknownMember {
                treaty: treaty.acronym.clone(),
                token: bad.to_string(),
            });
        }
        let members: BTreeSet<CountryId> = treaty.members.iter().copied().collect();
        if members.len() < 2 {
            return Err(GraphError::TooFewMembers {
                treaty: treaty.acronym.clone(),
                count: members.len(),
            });
        }
        let members: Vec<CountryId> = members.into_iter().collect();
        let layer = &mut layers[treaty.layer.index()];
        for (i, &a) in members.iter().enumerate() {
            for &b in &members[i + 1..] {
                let key = EdgeKey::new(a, b).expect("members are distinct");
                layer.insert(key, Source::Treaty(TreatyId(t)));
            }
        }
    }

    for deal in bilaterals {
        for c in [deal.a, deal.b] {
            if c.0 >= n {
                return Err(GraphError::UnknownMember {
                    treaty: "bilateral".into(),
                    token: c.to_string(),
                });
            }
        }
        let key = EdgeKey::new(deal.a, deal.b).ok_or(GraphError::SelfLoop(deal.a))?;
        layers[deal.layer.index()].insert(key, Source::Bilateral);
    }

    let [political, economic] = layers;
    Ok(MultiplexNetwork {
        countries: Arc::new(countries),
        treaties: Arc::new(treaties),
        layers: [Arc::new(political), Arc::new(economic)],
    })
}

impl MultiplexNetwork {
    pub fn countries(&self) -> &[Country] {
        &self.countries
    }

    pub fn country_count(&self) -> usize {
        self.countries.len()
    }

    pub fn country(&self, id: CountryId) -> Result<&Country, GraphError> {
        self.countries.get(id.0).ok_or(GraphError::UnknownCountry(id))
    }

    pub fn country_by_iso3(&self, iso3: &str) -> Option<&Country> {
        self.countries.iter().find(|c| c.iso3 == iso3)
    }

    pub fn treaties(&self) -> &[LayerTreaty] {
        &self.treaties
    }

    pub fn treaty(&self, id: TreatyId) -> Result<&LayerTreaty, GraphError> {
        self.treaties.get(id.0).ok_or(GraphError::UnknownTreaty(id))
    }

    pub fn layer(&self, layer: LayerId) -> &LayerEdges {
        &self.layers[layer.index()]
    }

    pub fn edge_count(&self, layer: LayerId) -> usize {
        self.layer(layer).len()
    }

    pub fn edges(&self, layer: LayerId) -> impl Iterator<Item = Edge<'_>> + '_ {
        self.layer(layer).iter().map(move |(key, provenance)| Edge { key, layer, provenance })
    }

    /// Maps every source to the edges it currently supports.
    pub fn provenance_index(&self, layer: LayerId) -> BTreeMap<Source, Vec<EdgeKey>> {
        let mut index: BTreeMap<Source, Vec<EdgeKey>> = BTreeMap::new();
        for (key, provenance) in self.layer(layer).iter() {
            for source in provenance {
                index.entry(*source).or_default().push(key);
            }
        }
        index
    }

    fn with_layer(&self, layer: LayerId, edges: LayerEdges) -> MultiplexNetwork {
        let mut layers = self.layers.clone();
        layers[layer.index()] = Arc::new(edges);
        MultiplexNetwork {
            countries: Arc::clone(&self.countries),
            treaties: Arc::clone(&self.treaties),
            layers,
        }
    }

    /// Drops every edge of `layer` incident to `country`. The country stays
    /// in the node set as an isolated node of that layer.
    pub fn remove_country(&self, country: CountryId, layer: LayerId) -> Result<MultiplexNetwork, GraphError> {
        self.remove_block(&BTreeSet::from([country]), layer)
    }

    pub fn remove_block(
        &self,
        block: &BTreeSet<CountryId>,
        layer: LayerId,
    ) -> Result<MultiplexNetwork, GraphError> {
        for &c in block {
            self.country(c)?;
        }
        if block.is_empty() {
            return Ok(self.clone());
        }
        let edges = self
            .layer(layer)
            .edges
            .iter()
            .filter(|(k, _)| !block.contains(&k.0) && !block.contains(&k.1))
            .map(|(k, p)| (*k, p.clone()))
            .collect();
        Ok(self.with_layer(layer, LayerEdges { edges }))
    }

    /// Withdraws one treaty: it leaves the provenance of every edge in its
    /// layer and edges left without support disappear.
    pub fn remove_treaty(&self, treaty: TreatyId) -> Result<MultiplexNetwork, GraphError> {
        let layer = self.treaty(treaty)?.layer;
        let source = Source::Treaty(treaty);
        let edges = self
            .layer(layer)
            .edges
            .iter()
            .filter_map(|(k, p)| {
                if p.contains(&source) {
                    let mut p = p.clone();
                    p.remove(&source);
                    (!p.is_empty()).then_some((*k, p))
                } else {
                    Some((*k, p.clone()))
                }
            })
            .collect();
        Ok(self.with_layer(layer, LayerEdges { edges }))
    }

    /// Undirected adjacency lists of one layer. With `weighted`, each
    /// neighbour carries its provenance cardinality, otherwise weight 1.
    pub fn adjacency(&self, layer: LayerId, weighted: bool) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.country_count()];
        for (key, provenance) in self.layer(layer).iter() {
            let w = if weighted { provenance.len() as f64 } else { 1.0 };
            let (a, b) = key.endpoints();
            adj[a.0].push((b.0, w));
            adj[b.0].push((a.0, w));
        }
        adj
    }
}
