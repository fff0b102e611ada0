//! Disruption scenarios and the damage index.
//!
//! For a scenario removing country (or block, or treaty) `i` from layer `l`:
//!
//! ```text
//! c = C_after / C_before      community count ratio
//! q = Q_after / Q_before      connected component count ratio
//! g = G_after / G_before      giant component size ratio
//! delta = (c * q) / g
//! ```
//!
//! `delta == 1` means no structural change. Sweeps normalize by the largest
//! delta of the same layer so the most disruptive scenario scores exactly 1.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::community::{aggregate_count, detect_runs, CommunityParams};
use crate::components::{components, Scope};
use crate::error::{DamageError, GraphError};
use crate::graph::{CountryId, LayerId, MultiplexNetwork, TreatyId};

/// Scope selector that is resolved against the scenario's layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScopeKind {
    Layer,
    Multiplex,
}

impl ScopeKind {
    pub fn resolve(self, layer: LayerId) -> Scope {
        match self {
            ScopeKind::Layer => Scope::Layer(layer),
            ScopeKind::Multiplex => Scope::Multiplex,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ScopeKind::Layer => "layer",
            ScopeKind::Multiplex => "multiplex",
        }
    }
}

impl std::str::FromStr for ScopeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "layer" => Ok(ScopeKind::Layer),
            "multiplex" => Ok(ScopeKind::Multiplex),
            other => Err(format!("unknown scope `{other}` (expected layer|multiplex)")),
        }
    }
}

/// Where community counts and connectivity are measured. The default counts
/// communities on the whole multiplex and components on the scenario layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DamageScope {
    pub communities: ScopeKind,
    pub connectivity: ScopeKind,
}

impl Default for DamageScope {
    fn default() -> Self {
        DamageScope { communities: ScopeKind::Multiplex, connectivity: ScopeKind::Layer }
    }
}

impl DamageScope {
    pub fn uniform(kind: ScopeKind) -> Self {
        DamageScope { communities: kind, connectivity: kind }
    }
}

impl fmt::Display for DamageScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "communities={};connectivity={}", self.communities.as_str(), self.connectivity.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScenarioKind {
    CountryRemoval { country: CountryId, layer: LayerId },
    BlockRemoval { countries: BTreeSet<CountryId>, layer: LayerId },
    TreatyRemoval { treaty: TreatyId },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub label: String,
}

impl Scenario {
    pub fn country(network: &MultiplexNetwork, country: CountryId, layer: LayerId) -> Result<Scenario, GraphError> {
        let label = network.country(country)?.iso3.clone();
        Ok(Scenario { kind: ScenarioKind::CountryRemoval { country, layer }, label })
    }

    pub fn block(
        network: &MultiplexNetwork,
        countries: BTreeSet<CountryId>,
        layer: LayerId,
    ) -> Result<Scenario, GraphError> {
        let codes = countries
            .iter()
            .map(|&c| network.country(c).map(|c| c.iso3.as_str()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Scenario { label: codes.join(";"), kind: ScenarioKind::BlockRemoval { countries, layer } })
    }

    pub fn treaty(network: &MultiplexNetwork, treaty: TreatyId) -> Result<Scenario, GraphError> {
        let label = network.treaty(treaty)?.acronym.clone();
        Ok(Scenario { kind: ScenarioKind::TreatyRemoval { treaty }, label })
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ScenarioKind::CountryRemoval { .. } => "country",
            ScenarioKind::BlockRemoval { .. } => "block",
            ScenarioKind::TreatyRemoval { .. } => "treaty",
        }
    }

    pub fn layer(&self, network: &MultiplexNetwork) -> Result<LayerId, GraphError> {
        match &self.kind {
            ScenarioKind::CountryRemoval { layer, .. } | ScenarioKind::BlockRemoval { layer, .. } => Ok(*layer),
            ScenarioKind::TreatyRemoval { treaty } => Ok(network.treaty(*treaty)?.layer),
        }
    }

    pub fn apply(&self, network: &MultiplexNetwork) -> Result<MultiplexNetwork, GraphError> {
        match &self.kind {
            ScenarioKind::CountryRemoval { country, layer } => network.remove_country(*country, *layer),
            ScenarioKind::BlockRemoval { countries, layer } => network.remove_block(countries, *layer),
            ScenarioKind::TreatyRemoval { treaty } => network.remove_treaty(*treaty),
        }
    }
}

/// Community count, component count and giant-component size of one network
/// state as seen from one layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub communities: f64,
    pub components: usize,
    pub giant: usize,
}

pub fn snapshot(
    network: &MultiplexNetwork,
    layer: LayerId,
    params: &CommunityParams,
    scope: DamageScope,
) -> Result<Snapshot, DamageError> {
    let runs = detect_runs(network, scope.communities.resolve(layer), params)?;
    let summary = components(network, scope.connectivity.resolve(layer));
    Ok(Snapshot {
        communities: aggregate_count(&runs, params.aggregation),
        components: summary.count,
        giant: summary.giant_size,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DamageMetrics {
    pub c_before: f64,
    pub c_after: f64,
    pub q_before: usize,
    pub q_after: usize,
    pub g_before: usize,
    pub g_after: usize,
    pub c: f64,
    pub q: f64,
    pub g: f64,
    pub delta: f64,
    pub scope: DamageScope,
}

impl DamageMetrics {
    pub fn from_snapshots(before: Snapshot, after: Snapshot, scope: DamageScope) -> DamageMetrics {
        let c = after.communities / before.communities;
        let q = after.components as f64 / before.components as f64;
        let g = after.giant as f64 / before.giant as f64;
        DamageMetrics {
            c_before: before.communities,
            c_after: after.communities,
            q_before: before.components,
            q_after: after.components,
            g_before: before.giant,
            g_after: after.giant,
            c,
            q,
            g,
            delta: (c * q) / g,
            scope,
        }
    }
}

/// Evaluates one scenario from scratch, baseline included.
pub fn evaluate(
    network: &MultiplexNetwork,
    scenario: &Scenario,
    params: &CommunityParams,
    scope: DamageScope,
) -> Result<DamageMetrics, DamageError> {
    if network.country_count() == 0 {
        return Err(crate::error::CommunityError::EmptyGraph.into());
    }
    let layer = scenario.layer(network)?;
    let before = snapshot(network, layer, params, scope)?;
    evaluate_against(network, scenario, layer, before, params, scope)
}

fn evaluate_against(
    network: &MultiplexNetwork,
    scenario: &Scenario,
    layer: LayerId,
    before: Snapshot,
    params: &CommunityParams,
    scope: DamageScope,
) -> Result<DamageMetrics, DamageError> {
    let derived = scenario.apply(network)?;
    let after = snapshot(&derived, layer, params, scope)?;
    Ok(DamageMetrics::from_snapshots(before, after, scope))
}

/// Divides every value by the maximum, which maps to exactly 1.
pub fn normalize(deltas: &[f64]) -> Result<Vec<f64>, DamageError> {
    if deltas.is_empty() {
        return Err(DamageError::EmptySweep);
    }
    if let Some(&bad) = deltas.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
        return Err(DamageError::NonPositiveDelta(bad));
    }
    let max = deltas.iter().copied().fold(f64::MIN, f64::max);
    Ok(deltas.iter().map(|d| d / max).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DamageReport {
    pub scenario: Scenario,
    pub layer: LayerId,
    pub metrics: DamageMetrics,
    pub delta_norm: f64,
    pub params: CommunityParams,
}

/// Evaluates `scenarios` against one cached baseline per layer, normalizes
/// per layer and ranks by normalized damage (descending), then label, then
/// layer.
pub fn sweep_scenarios(
    network: &MultiplexNetwork,
    scenarios: Vec<Scenario>,
    params: &CommunityParams,
    scope: DamageScope,
) -> Result<Vec<DamageReport>, DamageError> {
    if network.country_count() == 0 {
        return Err(crate::error::CommunityError::EmptyGraph.into());
    }
    let layers = scenarios.iter().map(|s| s.layer(network)).collect::<Result<Vec<_>, _>>()?;
    let mut baselines: [Option<Snapshot>; 2] = [None, None];
    for &layer in &layers {
        if baselines[layer.index()].is_none() {
            baselines[layer.index()] = Some(snapshot(network, layer, params, scope)?);
        }
    }

    // Collected in input order whatever order the workers finish in.
    let metrics = scenarios
        .par_iter()
        .zip(layers.par_iter())
        .map(|(scenario, &layer)| {
            let before = baselines[layer.index()].expect("baseline computed above");
            evaluate_against(network, scenario, layer, before, params, scope)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut delta_norm = vec![0.0; scenarios.len()];
    for layer in LayerId::ALL {
        let idx: Vec<usize> = (0..scenarios.len()).filter(|&i| layers[i] == layer).collect();
        if idx.is_empty() {
            continue;
        }
        let normalized = normalize(&idx.iter().map(|&i| metrics[i].delta).collect::<Vec<_>>())?;
        for (&i, v) in idx.iter().zip(normalized) {
            delta_norm[i] = v;
        }
    }

    let mut reports: Vec<DamageReport> = scenarios
        .into_iter()
        .zip(layers)
        .zip(metrics)
        .zip(delta_norm)
        .map(|(((scenario, layer), metrics), delta_norm)| DamageReport {
            scenario,
            layer,
            metrics,
            delta_norm,
            params: *params,
        })
        .collect();
    reports.sort_by(|a, b| {
        b.delta_norm
            .total_cmp(&a.delta_norm)
            .then_with(|| a.scenario.label.cmp(&b.scenario.label))
            .then_with(|| a.layer.cmp(&b.layer))
    });
    Ok(reports)
}

/// Removes every country from `layer` in turn.
pub fn sweep_countries(
    network: &MultiplexNetwork,
    layer: LayerId,
    params: &CommunityParams,
    scope: DamageScope,
) -> Result<Vec<DamageReport>, DamageError> {
    let scenarios = (0..network.country_count())
        .map(|c| Scenario::country(network, CountryId(c), layer))
        .collect::<Result<Vec<_>, _>>()?;
    sweep_scenarios(network, scenarios, params, scope)
}

/// Withdraws every treaty of the registry in turn, normalized per layer.
pub fn sweep_treaties(
    network: &MultiplexNetwork,
    params: &CommunityParams,
    scope: DamageScope,
) -> Result<Vec<DamageReport>, DamageError> {
    let scenarios = (0..network.treaties().len())
        .map(|t| Scenario::treaty(network, TreatyId(t)))
        .collect::<Result<Vec<_>, _>>()?;
    sweep_scenarios(network, scenarios, params, scope)
}

/// Flat report record; field order is the column order of the CSV output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub scenario_kind: String,
    pub entity: String,
    pub layer: LayerId,
    #[serde(rename = "C0")]
    pub c0: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "Q0")]
    pub q0: usize,
    #[serde(rename = "Q1")]
    pub q1: usize,
    #[serde(rename = "G0")]
    pub g0: usize,
    #[serde(rename = "G1")]
    pub g1: usize,
    pub c: f64,
    pub q: f64,
    pub g: f64,
    pub delta: f64,
    pub delta_norm: f64,
    pub seed: u64,
    pub repetitions: usize,
    pub resolution: f64,
    pub omega: f64,
    pub scope: String,
}

impl From<&DamageReport> for ReportRow {
    fn from(r: &DamageReport) -> Self {
        let m = &r.metrics;
        ReportRow {
            scenario_kind: r.scenario.kind_name().to_string(),
            entity: r.scenario.label.clone(),
            layer: r.layer,
            c0: m.c_before,
            c1: m.c_after,
            q0: m.q_before,
            q1: m.q_after,
            g0: m.g_before,
            g1: m.g_after,
            c: m.c,
            q: m.q,
            g: m.g,
            delta: m.delta,
            delta_norm: r.delta_norm,
            seed: r.params.seed,
            repetitions: r.params.repetitions,
            resolution: r.params.resolution,
            omega: r.params.omega,
            scope: m.scope.to_string(),
        }
    }
}

pub fn write_reports_csv<W: Write>(writer: W, reports: &[DamageReport]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    for r in reports {
        out.serialize(ReportRow::from(r))?;
    }
    out.flush()?;
    Ok(())
}
