//! Batch pipeline behind the `treatyweb` binary.
//!
//! Every artifact starts with a provenance block: tool version, command,
//! configuration echo and sha256 digests of the inputs. CSV files carry it
//! as `#` comment lines, JSON files as a `provenance` object next to `data`.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use treatyweb_core::community::{aggregate_count, detect_runs};
use treatyweb_core::damage::ReportRow;
use treatyweb_core::ingest::read_index;
use treatyweb_core::{
    detect, load_dataset, spearman, sweep_countries, sweep_treaties, CommunityError, CommunityParams, DamageError,
    DamageReport, DamageScope, Dataset, DatasetPaths, GraphError, IndexedSeries, IngestError, LayerId,
    MultiplexNetwork, PValueMethod, Scope, ScopeKind, StatsError,
};

pub const TOOL: &str = concat!("treatyweb ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<CommunityError> for CliError {
    fn from(e: CommunityError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<DamageError> for CliError {
    fn from(e: DamageError) -> Self {
        match e {
            DamageError::Graph(g) => g.into(),
            DamageError::Community(c) => c.into(),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(name = "treatyweb", version, about = "Damage analysis of the treaty multiplex network")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load the registries and print deal and edge counts.
    Audit {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run a removal sweep and write the ranked damage report.
    Sweep {
        #[arg(value_enum)]
        target: SweepTarget,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// Layer for a country sweep; both layers when omitted.
        #[arg(long)]
        layer: Option<LayerId>,
        /// Uniform scope for communities and connectivity. Default counts
        /// communities on the multiplex and components on the layer.
        #[arg(long)]
        scope: Option<ScopeKind>,
        /// Also write an entity,delta_norm table per sweep.
        #[arg(long)]
        emit_plot_data: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Spearman correlation between a country sweep and an external index.
    Correlate {
        /// Report written by `sweep countries`.
        #[arg(long)]
        report: PathBuf,
        /// iso3,value table.
        #[arg(long)]
        index: PathBuf,
        /// Layer to select when the report holds both.
        #[arg(long)]
        layer: Option<LayerId>,
        #[arg(long, value_enum, default_value_t = MethodArg::T)]
        method: MethodArg,
        #[arg(long, default_value_t = 10_000)]
        permutations: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Detect communities and write (node, layer, label) assignments.
    Communities {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// Required with `--scope layer`.
        #[arg(long)]
        layer: Option<LayerId>,
        #[arg(long, default_value = "multiplex")]
        scope: ScopeKind,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepTarget {
    Countries,
    Treaties,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    T,
    Permutation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub countries: PathBuf,
    #[arg(long)]
    pub treaties: PathBuf,
    #[arg(long)]
    pub bilaterals: Option<PathBuf>,
    #[arg(long)]
    pub classification: Option<PathBuf>,
}

impl DataArgs {
    fn paths(&self) -> DatasetPaths {
        DatasetPaths {
            countries: self.countries.clone(),
            treaties: self.treaties.clone(),
            bilaterals: self.bilaterals.clone(),
            classification: self.classification.clone(),
        }
    }

    fn inputs(&self) -> Vec<(&'static str, PathBuf)> {
        let mut v = vec![("countries", self.countries.clone()), ("treaties", self.treaties.clone())];
        if let Some(p) = &self.bilaterals {
            v.push(("bilaterals", p.clone()));
        }
        if let Some(p) = &self.classification {
            v.push(("classification", p.clone()));
        }
        v
    }
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub repetitions: usize,
    #[arg(long, default_value_t = 1.0)]
    pub resolution: f64,
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    /// Worker cap for the parallel sweep.
    #[arg(long)]
    pub threads: Option<usize>,
}

impl ModelArgs {
    fn params(&self) -> CommunityParams {
        CommunityParams {
            seed: self.seed,
            repetitions: self.repetitions,
            resolution: self.resolution,
            omega: self.omega,
            ..Default::default()
        }
    }

    fn echo(&self, config: &mut BTreeMap<String, String>) {
        let p = self.params();
        config.insert("seed".into(), p.seed.to_string());
        config.insert("repetitions".into(), p.repetitions.to_string());
        config.insert("resolution".into(), p.resolution.to_string());
        config.insert("omega".into(), p.omega.to_string());
        config.insert("aggregation".into(), format!("{:?}", p.aggregation).to_lowercase());
        config.insert("weighted".into(), p.weighted.to_string());
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub role: String,
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub inputs: Vec<InputDigest>,
}

impl Provenance {
    fn new(
        command: &str,
        config: BTreeMap<String, String>,
        inputs: &[(&'static str, PathBuf)],
    ) -> Result<Self, CliError> {
        let inputs = inputs
            .iter()
            .map(|(role, path)| {
                let bytes = fs::read(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
                Ok(InputDigest {
                    role: role.to_string(),
                    file: path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
                    sha256: hex::encode(Sha256::digest(&bytes)),
                })
            })
            .collect::<Result<_, CliError>>()?;
        Ok(Provenance { tool: TOOL.into(), command: command.into(), config, inputs })
    }

    fn comment_lines(&self) -> String {
        let mut s = format!("# tool: {}\n# command: {}\n", self.tool, self.command);
        for (k, v) in &self.config {
            s.push_str(&format!("# config: {k}={v}\n"));
        }
        for i in &self.inputs {
            s.push_str(&format!("# input: {} {} sha256={}\n", i.role, i.file, i.sha256));
        }
        s
    }
}

#[derive(Serialize)]
struct JsonArtifact<'a, T: Serialize> {
    provenance: &'a Provenance,
    data: T,
}

/// Writes `rows` under the provenance header in the requested format.
fn write_artifact<T: Serialize>(
    path: &Path,
    format: Format,
    provenance: &Provenance,
    rows: &[T],
) -> Result<(), CliError> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => {
            buf.extend_from_slice(provenance.comment_lines().as_bytes());
            let mut w = csv::Writer::from_writer(&mut buf);
            for r in rows {
                w.serialize(r).map_err(|e| io_err(path, e))?;
            }
            w.flush().map_err(|e| io_err(path, e))?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut buf, &JsonArtifact { provenance, data: rows })
                .map_err(|e| io_err(path, e))?;
            buf.push(b'\n');
        }
    }
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::write(path, buf).map_err(|e| io_err(path, e))
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::Validation("--threads must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

fn load(data: &DataArgs) -> Result<(Dataset, MultiplexNetwork), CliError> {
    let (dataset, _) = load_dataset(&data.paths())?;
    let network = dataset.to_network()?;
    Ok((dataset, network))
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let out = |e: std::io::Error| CliError::Runtime(format!("stdout: {e}"));
    match cli.command {
        Command::Audit { data, output } => {
            let (_, audit) = load_dataset(&data.paths())?;
            let provenance = Provenance::new("audit", BTreeMap::new(), &data.inputs())?;
            let rows = [
                ("countries", audit.country_count),
                ("political_pairs", audit.political_pairs),
                ("economic_pairs", audit.economic_pairs),
                ("political_edges", audit.political_edges),
                ("economic_edges", audit.economic_edges),
                ("political_only", audit.political_only),
            ];
            for (k, v) in rows {
                writeln!(stdout, "{k:<16} {v}").map_err(out)?;
            }
            let table: Vec<AuditRow> = rows.iter().map(|&(metric, value)| AuditRow { metric, value }).collect();
            write_artifact(&output.out.join(format!("audit.{}", output.format.ext())), output.format, &provenance, &table)
        }
        Command::Sweep { target, data, model, layer, scope, emit_plot_data, output } => {
            let (_, network) = load(&data)?;
            let params = model.params();
            params.validate()?;
            let damage_scope = scope.map(DamageScope::uniform).unwrap_or_default();
            let mut config = BTreeMap::new();
            model.echo(&mut config);
            config.insert("scope".into(), damage_scope.to_string());
            let sweeps: Vec<(String, Vec<DamageReport>)> = match target {
                SweepTarget::Countries => {
                    let layers = layer.map_or(LayerId::ALL.to_vec(), |l| vec![l]);
                    config.insert("layer".into(), layers.iter().map(|l| l.as_str()).collect::<Vec<_>>().join(";"));
                    with_threads(model.threads, || {
                        layers
                            .iter()
                            .map(|&l| {
                                sweep_countries(&network, l, &params, damage_scope)
                                    .map(|r| (format!("countries_{}", l.as_str()), r))
                            })
                            .collect::<Result<Vec<_>, _>>()
                    })??
                }
                SweepTarget::Treaties => {
                    if layer.is_some() {
                        return Err(CliError::Validation("--layer applies to country sweeps only".into()));
                    }
                    vec![("treaties".into(), with_threads(model.threads, || sweep_treaties(&network, &params, damage_scope))??)]
                }
            };
            let command = match target {
                SweepTarget::Countries => "sweep countries",
                SweepTarget::Treaties => "sweep treaties",
            };
            let provenance = Provenance::new(command, config, &data.inputs())?;
            for (name, reports) in &sweeps {
                let rows: Vec<ReportRow> = reports.iter().map(ReportRow::from).collect();
                let path = output.out.join(format!("sweep_{name}.{}", output.format.ext()));
                write_artifact(&path, output.format, &provenance, &rows)?;
                if emit_plot_data {
                    let plot: Vec<PlotRow> = reports
                        .iter()
                        .map(|r| PlotRow { entity: r.scenario.label.clone(), layer: r.layer, delta_norm: r.delta_norm })
                        .collect();
                    write_artifact(&output.out.join(format!("plot_{name}.csv")), Format::Csv, &provenance, &plot)?;
                }
                writeln!(stdout, "top of sweep {name} ({} scenarios):", reports.len()).map_err(out)?;
                for (rank, r) in reports.iter().take(10).enumerate() {
                    writeln!(
                        stdout,
                        "{:>3}  {:<12} {:<9} delta={:<12.6} delta_norm={:.6}",
                        rank + 1,
                        r.scenario.label,
                        r.layer,
                        r.metrics.delta,
                        r.delta_norm
                    )
                    .map_err(out)?;
                }
            }
            Ok(())
        }
        Command::Correlate { report, index, layer, method, permutations, seed, threads, output } => {
            let (series, layer) = read_report_series(&report, layer)?;
            let name = index.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "index".into());
            let external = read_index(&index, &name)?;
            let method = match method {
                MethodArg::T => PValueMethod::TApprox,
                MethodArg::Permutation => PValueMethod::Permutation { permutations, seed },
            };
            let result = with_threads(threads, || spearman(&series, &external, method))??;
            let mut config = BTreeMap::new();
            config.insert("layer".into(), layer.as_str().into());
            config.insert("method".into(), method.name().into());
            if let PValueMethod::Permutation { permutations, seed } = method {
                config.insert("permutations".into(), permutations.to_string());
                config.insert("seed".into(), seed.to_string());
            }
            let provenance = Provenance::new("correlate", config, &[("report", report.clone()), ("index", index.clone())])?;
            let row = CorrelationRow {
                series_a: series.name.clone(),
                series_b: external.name.clone(),
                r: result.r,
                p: result.p,
                n: result.n,
                method: method.name().into(),
            };
            writeln!(stdout, "{} vs {}: r={:.6} p={:.6} n={} ({})", row.series_a, row.series_b, row.r, row.p, row.n, row.method)
                .map_err(out)?;
            write_artifact(
                &output.out.join(format!("correlation.{}", output.format.ext())),
                output.format,
                &provenance,
                &[row],
            )
        }
        Command::Communities { data, model, layer, scope, output } => {
            let (_, network) = load(&data)?;
            let params = model.params();
            params.validate()?;
            let scope = match (scope, layer) {
                (ScopeKind::Layer, Some(l)) => Scope::Layer(l),
                (ScopeKind::Layer, None) => return Err(CliError::Validation("--scope layer requires --layer".into())),
                (ScopeKind::Multiplex, None) => Scope::Multiplex,
                (ScopeKind::Multiplex, Some(_)) => {
                    return Err(CliError::Validation("--layer conflicts with --scope multiplex".into()))
                }
            };
            let (runs, best) = with_threads(model.threads, || {
                Ok::<_, CommunityError>((detect_runs(&network, scope, &params)?, detect(&network, scope, &params)?))
            })??;
            let count = aggregate_count(&runs, params.aggregation);
            let mut config = BTreeMap::new();
            model.echo(&mut config);
            config.insert("scope".into(), scope.to_string());
            let provenance = Provenance::new("communities", config, &data.inputs())?;
            let rows: Vec<CommunityRow> = best
                .assignments()
                .into_iter()
                .map(|(c, layer, label)| CommunityRow { node: network.countries()[c.0].iso3.clone(), layer, label })
                .collect();
            writeln!(
                stdout,
                "{scope}: {count} communities (aggregated over {} restarts), best quality {:.6}",
                runs.len(),
                best.quality
            )
            .map_err(out)?;
            write_artifact(
                &output.out.join(format!("communities.{}", output.format.ext())),
                output.format,
                &provenance,
                &rows,
            )
        }
    }
}

#[derive(Serialize)]
struct AuditRow {
    metric: &'static str,
    value: usize,
}

#[derive(Serialize)]
struct PlotRow {
    entity: String,
    layer: LayerId,
    delta_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub series_a: String,
    pub series_b: String,
    pub r: f64,
    pub p: f64,
    pub n: usize,
    pub method: String,
}

#[derive(Serialize)]
struct CommunityRow {
    node: String,
    layer: LayerId,
    label: usize,
}

#[derive(Deserialize)]
struct JsonReport {
    data: Vec<ReportRow>,
}

/// Reads the country rows of a sweep report (CSV or JSON) as an iso3-keyed
/// series of normalized damage, named EDI or PDI after the layer.
pub fn read_report_series(path: &Path, layer: Option<LayerId>) -> Result<(IndexedSeries, LayerId), CliError> {
    let bad = |e: &dyn std::fmt::Display| CliError::Validation(format!("{}: {e}", path.display()));
    let text = fs::read_to_string(path).map_err(|e| bad(&e))?;
    let rows: Vec<ReportRow> = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str::<JsonReport>(&text).map_err(|e| bad(&e))?.data
    } else {
        csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes())
            .deserialize()
            .collect::<Result<_, _>>()
            .map_err(|e| bad(&e))?
    };
    let rows: Vec<&ReportRow> = rows.iter().filter(|r| r.scenario_kind == "country").collect();
    let layer = match layer {
        Some(l) => l,
        None => {
            let mut layers: Vec<LayerId> = rows.iter().map(|r| r.layer).collect();
            layers.sort();
            layers.dedup();
            match layers[..] {
                [l] => l,
                [] => return Err(bad(&"no country rows in report")),
                _ => return Err(bad(&"report holds both layers; pass --layer")),
            }
        }
    };
    let name = match layer {
        LayerId::Political => "PDI",
        LayerId::Economic => "EDI",
    };
    let mut values = BTreeMap::new();
    for r in rows.into_iter().filter(|r| r.layer == layer) {
        if values.insert(r.entity.clone(), r.delta_norm).is_some() {
            return Err(bad(&format!("duplicate entity {}", r.entity)));
        }
    }
    if values.is_empty() {
        return Err(bad(&format!("no {layer} country rows in report")));
    }
    Ok((IndexedSeries { name: name.into(), values }, layer))
}
