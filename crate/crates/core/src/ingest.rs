//! Loading and validating the CSV inputs.
//!
//! | file             | header                        |
//! |------------------|-------------------------------|
//! | countries        | `iso3,name`                   |
//! | treaties         | `acronym,name,layer,members`  |
//! | bilaterals       | `iso3_a,iso3_b,layer`         |
//! | classification   | `acronym,layer`               |
//! | external index   | `iso3,value`                  |
//!
//! `members` is a semicolon-separated iso3 list and `layer` one of
//! `political`, `economic` or `both`. A classification entry overrides the
//! treaty file's own tag, which may then be left empty.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{GraphError, IngestError, IngestErrorKind};
use crate::graph::{build_network, BilateralDeal, Country, CountryId, LayerId, LayerTreaty, MultiplexNetwork};
use crate::stats::IndexedSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerTag {
    Political,
    Economic,
    Both,
}

impl LayerTag {
    pub fn layers(self) -> &'static [LayerId] {
        match self {
            LayerTag::Political => &[LayerId::Political],
            LayerTag::Economic => &[LayerId::Economic],
            LayerTag::Both => &LayerId::ALL,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LayerTag::Political => "political",
            LayerTag::Economic => "economic",
            LayerTag::Both => "both",
        }
    }
}

impl fmt::Display for LayerTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LayerTag {
    type Err = IngestErrorKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "political" => Ok(LayerTag::Political),
            "economic" => Ok(LayerTag::Economic),
            "both" => Ok(LayerTag::Both),
            _ => Err(IngestErrorKind::BadLayer(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Treaty {
    pub acronym: String,
    pub name: String,
    pub layer: LayerTag,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bilateral {
    pub a: String,
    pub b: String,
    pub layer: LayerTag,
}

/// Validated registries.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dataset {
    pub countries: Vec<Country>,
    pub treaties: Vec<Treaty>,
    pub bilaterals: Vec<Bilateral>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetAudit {
    pub country_count: usize,
    /// Member pairs summed over deals, before merging overlaps.
    pub political_pairs: usize,
    pub economic_pairs: usize,
    pub political_edges: usize,
    pub economic_edges: usize,
    /// Distinct political pairs with no economic counterpart.
    pub political_only: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DatasetPaths {
    pub countries: PathBuf,
    pub treaties: PathBuf,
    pub bilaterals: Option<PathBuf>,
    pub classification: Option<PathBuf>,
}

fn err(file: &Path, line: u64, kind: IngestErrorKind) -> IngestError {
    IngestError { file: file.to_path_buf(), line, kind }
}

fn valid_iso3(code: &str) -> bool {
    code.len() == 3 && code.bytes().all(|b| b.is_ascii_uppercase())
}

/// Opens a CSV table and checks its header row, returning `(line, fields)`
/// for every data record.
fn read_table(path: &Path, header: &[&str]) -> Result<Vec<(u64, Vec<String>)>, IngestError> {
    let file = File::open(path).map_err(|e| err(path, 0, IngestErrorKind::Io(e.to_string())))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let csv_err = |e: csv::Error| {
        let line = e.position().map_or(0, |p| p.line());
        err(path, line, IngestErrorKind::Csv(e.to_string()))
    };
    let found = reader.headers().map_err(csv_err)?.clone();
    if found.iter().collect::<Vec<_>>() != header {
        return Err(err(
            path,
            1,
            IngestErrorKind::BadHeader { expected: header.join(","), found: found.iter().collect::<Vec<_>>().join(",") },
        ));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        rows.push((line, record.iter().map(str::to_string).collect()));
    }
    Ok(rows)
}

pub fn read_countries(path: &Path) -> Result<Vec<Country>, IngestError> {
    let rows = read_table(path, &["iso3", "name"])?;
    if rows.is_empty() {
        return Err(err(path, 0, IngestErrorKind::EmptyCountries));
    }
    let mut seen = HashSet::new();
    let mut countries = Vec::with_capacity(rows.len());
    for (line, fields) in rows {
        let iso3 = &fields[0];
        if !valid_iso3(iso3) {
            return Err(err(path, line, IngestErrorKind::InvalidIso3(iso3.clone())));
        }
        if !seen.insert(iso3.clone()) {
            return Err(err(path, line, IngestErrorKind::DuplicateIso3(iso3.clone())));
        }
        countries.push(Country { id: CountryId(countries.len()), iso3: iso3.clone(), name: fields[1].clone() });
    }
    Ok(countries)
}

/// Acronym to layer tag.
pub fn read_classification(path: &Path) -> Result<HashMap<String, LayerTag>, IngestError> {
    let mut map = HashMap::new();
    for (line, fields) in read_table(path, &["acronym", "layer"])? {
        let tag = fields[1].parse().map_err(|k| err(path, line, k))?;
        if map.insert(fields[0].clone(), tag).is_some() {
            return Err(err(path, line, IngestErrorKind::DuplicateKey(fields[0].clone())));
        }
    }
    Ok(map)
}

pub fn read_treaties(
    path: &Path,
    countries: &[Country],
    classification: Option<&HashMap<String, LayerTag>>,
) -> Result<Vec<Treaty>, IngestError> {
    let rows = read_table(path, &["acronym", "name", "layer", "members"])?;
    if rows.is_empty() {
        return Err(err(path, 0, IngestErrorKind::EmptyTreaties));
    }
    let known: HashSet<&str> = countries.iter().map(|c| c.iso3.as_str()).collect();
    let mut acronyms = HashSet::new();
    let mut treaties = Vec::with_capacity(rows.len());
    for (line, fields) in rows {
        let fail = |kind| err(path, line, kind);
        let acronym = fields[0].clone();
        if !acronyms.insert(acronym.clone()) {
            return Err(fail(IngestErrorKind::DuplicateAcronym(acronym)));
        }
        let layer = match classification.and_then(|c| c.get(&acronym)) {
            Some(tag) => *tag,
            None if fields[2].is_empty() => return Err(fail(IngestErrorKind::MissingLayer(acronym))),
            None => fields[2].parse().map_err(fail)?,
        };
        let mut members = Vec::new();
        let mut seen = HashSet::new();
        for token in fields[3].split(';').map(str::trim).filter(|t| !t.is_empty()) {
            if !known.contains(token) {
                return Err(fail(IngestErrorKind::UnknownCountry { treaty: acronym, token: token.into() }));
            }
            if !seen.insert(token) {
                return Err(fail(IngestErrorKind::DuplicateMember { treaty: acronym, token: token.into() }));
            }
            members.push(token.to_string());
        }
        if members.len() < 2 {
            return Err(fail(IngestErrorKind::TooFewMembers { treaty: acronym, count: members.len() }));
        }
        treaties.push(Treaty { acronym, name: fields[1].clone(), layer, members });
    }
    Ok(treaties)
}

pub fn read_bilaterals(path: &Path, countries: &[Country]) -> Result<Vec<Bilateral>, IngestError> {
    let known: HashSet<&str> = countries.iter().map(|c| c.iso3.as_str()).collect();
    let mut deals = Vec::new();
    for (line, fields) in read_table(path, &["iso3_a", "iso3_b", "layer"])? {
        let fail = |kind| err(path, line, kind);
        for token in &fields[..2] {
            if !known.contains(token.as_str()) {
                return Err(fail(IngestErrorKind::UnknownCountry { treaty: "bilateral".into(), token: token.clone() }));
            }
        }
        if fields[0] == fields[1] {
            return Err(fail(IngestErrorKind::SelfLoop(fields[0].clone())));
        }
        if fields[2].is_empty() {
            return Err(fail(IngestErrorKind::MissingLayer(format!("{}-{}", fields[0], fields[1]))));
        }
        let layer = fields[2].parse().map_err(fail)?;
        deals.push(Bilateral { a: fields[0].clone(), b: fields[1].clone(), layer });
    }
    Ok(deals)
}

/// Reads an external `iso3,value` index such as a fragility score.
pub fn read_index(path: &Path, name: &str) -> Result<IndexedSeries, IngestError> {
    let mut values = std::collections::BTreeMap::new();
    for (line, fields) in read_table(path, &["iso3", "value"])? {
        if !valid_iso3(&fields[0]) {
            return Err(err(path, line, IngestErrorKind::InvalidIso3(fields[0].clone())));
        }
        let value: f64 = fields[1]
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| err(path, line, IngestErrorKind::BadValue(fields[1].clone())))?;
        if values.insert(fields[0].clone(), value).is_some() {
            return Err(err(path, line, IngestErrorKind::DuplicateKey(fields[0].clone())));
        }
    }
    Ok(IndexedSeries { name: name.to_string(), values })
}

pub fn load_dataset(paths: &DatasetPaths) -> Result<(Dataset, DatasetAudit), IngestError> {
    let countries = read_countries(&paths.countries)?;
    let classification = paths.classification.as_deref().map(read_classification).transpose()?;
    let treaties = read_treaties(&paths.treaties, &countries, classification.as_ref())?;
    let bilaterals = match &paths.bilaterals {
        Some(p) => read_bilaterals(p, &countries)?,
        None => Vec::new(),
    };
    let dataset = Dataset { countries, treaties, bilaterals };
    let audit = dataset.audit();
    Ok((dataset, audit))
}

fn pair(a: &str, b: &str) -> (String, String) {
    if a < b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl Dataset {
    /// Counts deal pairs straight from the registries.
    pub fn audit(&self) -> DatasetAudit {
        let mut pairs = [0usize; 2];
        let mut edges: [HashSet<(String, String)>; 2] = Default::default();
        for t in &self.treaties {
            let m = t.members.len();
            for layer in t.layer.layers() {
                pairs[layer.index()] += m * (m - 1) / 2;
                for (i, a) in t.members.iter().enumerate() {
                    for b in &t.members[i + 1..] {
                        edges[layer.index()].insert(pair(a, b));
                    }
                }
            }
        }
        for d in &self.bilaterals {
            for layer in d.layer.layers() {
                pairs[layer.index()] += 1;
                edges[layer.index()].insert(pair(&d.a, &d.b));
            }
        }
        let [pol, eco] = &edges;
        DatasetAudit {
            country_count: self.countries.len(),
            political_pairs: pairs[0],
            economic_pairs: pairs[1],
            political_edges: pol.len(),
            economic_edges: eco.len(),
            political_only: pol.difference(eco).count(),
        }
    }

    fn id_map(&self) -> HashMap<&str, CountryId> {
        self.countries.iter().map(|c| (c.iso3.as_str(), c.id)).collect()
    }

    /// One entry per (treaty, layer); `both` treaties yield a political entry
    /// followed by an economic one.
    pub fn layer_treaties(&self) -> Result<Vec<LayerTreaty>, GraphError> {
        let ids = self.id_map();
        let mut out = Vec::new();
        for t in &self.treaties {
            let members = t
                .members
                .iter()
                .map(|m| {
                    ids.get(m.as_str()).copied().ok_or_else(|| GraphError::UnknownMember {
                        treaty: t.acronym.clone(),
                        token: m.clone(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            for &layer in t.layer.layers() {
                out.push(LayerTreaty { acronym: t.acronym.clone(), name: t.name.clone(), layer, members: members.clone() });
            }
        }
        Ok(out)
    }

    pub fn bilateral_deals(&self) -> Result<Vec<BilateralDeal>, GraphError> {
        let ids = self.id_map();
        let lookup = |code: &str| {
            ids.get(code)
                .copied()
                .ok_or_else(|| GraphError::UnknownMember { treaty: "bilateral".into(), token: code.into() })
        };
        let mut out = Vec::new();
        for d in &self.bilaterals {
            let (a, b) = (lookup(&d.a)?, lookup(&d.b)?);
            out.extend(d.layer.layers().iter().map(|&layer| BilateralDeal { a, b, layer }));
        }
        Ok(out)
    }

    pub fn to_network(&self) -> Result<MultiplexNetwork, GraphError> {
        build_network(self.countries.clone(), self.layer_treaties()?, &self.bilateral_deals()?)
    }

    pub fn iso3_set(&self) -> BTreeSet<&str> {
        self.countries.iter().map(|c| c.iso3.as_str()).collect()
    }
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), IngestError> {
    let io = |e: csv::Error| err(path, 0, IngestErrorKind::Io(e.to_string()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| err(path, 0, IngestErrorKind::Io(e.to_string())))
}

/// Writes the registries back out in the input format. Layer tags are
/// written resolved, so no classification file is needed to reload.
pub fn write_dataset(dir: &Path, dataset: &Dataset) -> Result<DatasetPaths, IngestError> {
    let paths = DatasetPaths {
        countries: dir.join("countries.csv"),
        treaties: dir.join("treaties.csv"),
        bilaterals: Some(dir.join("bilaterals.csv")),
        classification: None,
    };
    write_csv(
        &paths.countries,
        &["iso3", "name"],
        dataset.countries.iter().map(|c| vec![c.iso3.clone(), c.name.clone()]),
    )?;
    write_csv(
        &paths.treaties,
        &["acronym", "name", "layer", "members"],
        dataset
            .treaties
            .iter()
            .map(|t| vec![t.acronym.clone(), t.name.clone(), t.layer.to_string(), t.members.join(";")]),
    )?;
    write_csv(
        paths.bilaterals.as_deref().expect("set above"),
        &["iso3_a", "iso3_b", "layer"],
        dataset.bilaterals.iter().map(|d| vec![d.a.clone(), d.b.clone(), d.layer.to_string()]),
    )?;
    Ok(paths)
}
