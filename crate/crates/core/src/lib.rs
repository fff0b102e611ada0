//! Country/treaty multiplex networks, unilateral-defection scenarios and the
//! damage index built from community, component and giant-component ratios.

pub mod community;
pub mod components;
pub mod damage;
pub mod error;
pub mod graph;
pub mod ingest;
pub mod stats;

pub use community::{community_count, detect, detect_runs, CommunityParams, Partition};
pub use components::{components, ComponentsSummary, Scope};
pub use damage::{
    evaluate, normalize, sweep_countries, sweep_scenarios, sweep_treaties, DamageMetrics, DamageReport, DamageScope,
    Scenario, ScenarioKind, ScopeKind,
};
pub use error::{CommunityError, DamageError, GraphError, IngestError, IngestErrorKind, StatsError};
pub use graph::{build_network, BilateralDeal, Country, CountryId, LayerId, LayerTreaty, MultiplexNetwork, TreatyId};
pub use ingest::{load_dataset, Dataset, DatasetAudit, DatasetPaths};
pub use stats::{spearman, CorrelationResult, IndexedSeries, PValueMethod};
