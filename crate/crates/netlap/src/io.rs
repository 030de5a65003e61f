//! Network files and table exports.
//!
//! The network file is JSON with the shape
//! `{"vertices": [...], "edges": [{"u", "v", "c"}...], "origin": ...,
//! "family": {"name", "params"}?}`; vertex ids may be strings or
//! integers, unknown keys are rejected. CSV output uses `.` as the
//! decimal separator, LF line endings, and UTF-8.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dipole::{EnergyVector, GramMatrix};
use crate::error::{Error, Result};
use crate::exact::{format_rational, parse_rational};
use crate::heat::{GrowthReport, TrendVerdict};
use crate::network::{build_network, generate, Generator, ResistanceNetwork};
use crate::spectral::SpectralMeasure;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
enum VertexId {
    Int(u64),
    Name(String),
}

impl VertexId {
    fn as_label(&self) -> String {
        match self {
            VertexId::Int(i) => i.to_string(),
            VertexId::Name(s) => s.clone(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeSpec {
    u: VertexId,
    v: VertexId,
    c: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilySpec {
    name: String,
    #[serde(default)]
    params: serde_json::Map<String, serde_json::Value>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    vertices: Vec<VertexId>,
    edges: Vec<EdgeSpec>,
    origin: VertexId,
    #[serde(skip_serializing_if = "Option::is_none")]
    family: Option<FamilySpec>,
}

fn family_from_spec(spec: &FamilySpec) -> Result<Generator> {
    let get_str = |key: &str| -> Option<String> {
        spec.params.get(key).map(|v| match v {
            serde_json::Value::String(s) => s.clone(),
            other => other.to_string(),
        })
    };
    match spec.name.as_str() {
        "geometric_halfline" => {
            let b = get_str("b").ok_or_else(|| {
                Error::Parse("geometric_halfline family needs a \"b\" parameter".into())
            })?;
            Ok(Generator::GeometricHalfline {
                ratio: parse_rational(&b)?,
            })
        }
        "unit_path" => Ok(Generator::UnitPath),
        "binary_tree" => Ok(Generator::BinaryTree),
        "complete" => Ok(Generator::Complete),
        "random_weighted" => {
            let seed = get_str("seed")
                .ok_or_else(|| {
                    Error::Parse("random_weighted family needs a \"seed\" parameter".into())
                })?
                .parse::<u64>()
                .map_err(|_| Error::Parse("seed must be an unsigned integer".into()))?;
            Ok(Generator::RandomWeighted { seed })
        }
        other => Err(Error::Parse(format!("unknown family name {other:?}"))),
    }
}

fn family_to_spec(family: &Generator) -> FamilySpec {
    let mut params = serde_json::Map::new();
    match family {
        Generator::GeometricHalfline { ratio } => {
            params.insert("b".into(), serde_json::Value::String(format_rational(ratio)));
        }
        Generator::RandomWeighted { seed } => {
            params.insert("seed".into(), serde_json::Value::from(*seed));
        }
        _ => {}
    }
    FamilySpec {
        name: family.name().to_string(),
        params,
    }
}

/// Parses a network from its JSON representation.
///
/// A `family` tag is honored only when the edge list matches the family's
/// generated truncation, in which case frontier data is reattached.
pub fn parse_network(json: &str) -> Result<ResistanceNetwork> {
    let file: NetworkFile = serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    if file.vertices.is_empty() {
        return Err(Error::EmptyNetwork);
    }
    let mut index = HashMap::new();
    for (i, id) in file.vertices.iter().enumerate() {
        if index.insert(id.clone(), i).is_some() {
            return Err(Error::Parse(format!(
                "duplicate vertex id {:?}",
                id.as_label()
            )));
        }
    }
    let lookup = |id: &VertexId| -> Result<usize> {
        index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(id.as_label()))
    };
    let edges = file
        .edges
        .iter()
        .map(|e| Ok((lookup(&e.u)?, lookup(&e.v)?, e.c)))
        .collect::<Result<Vec<_>>>()?;
    let origin = lookup(&file.origin)?;
    let mut net = build_network(&edges, origin)?;
    if net.len() != file.vertices.len() {
        return Err(Error::Parse(
            "vertex list includes vertices missing from every edge".into(),
        ));
    }
    net.set_labels(file.vertices.iter().map(VertexId::as_label).collect());
    if let Some(spec) = &file.family {
        let family = family_from_spec(spec)?;
        let reference = generate(&family, net.len())?;
        for x in 0..net.len() {
            let got = net.neighbors(x);
            let want = reference.neighbors(x);
            if got.len() != want.len()
                || got
                    .iter()
                    .zip(want)
                    .any(|(a, b)| a.0 != b.0 || (a.1 - b.1).abs() > 1e-12 * b.1.abs().max(1.0))
            {
                return Err(Error::Parse(format!(
                    "family tag {:?} does not match the edge list at vertex {x}",
                    spec.name
                )));
            }
        }
        let excess = (0..net.len()).map(|x| reference.boundary_excess(x)).collect();
        net.set_family(family, excess);
    }
    Ok(net)
}

/// Serializes a network to the JSON file format.
pub fn network_to_json(net: &ResistanceNetwork) -> String {
    let vertices: Vec<VertexId> = (0..net.len())
        .map(|x| VertexId::Name(net.label_of(x)))
        .collect();
    let mut edges = Vec::new();
    for x in 0..net.len() {
        for &(y, c) in net.neighbors(x) {
            if x < y {
                edges.push(EdgeSpec {
                    u: vertices[x].clone(),
                    v: vertices[y].clone(),
                    c,
                });
            }
        }
    }
    let file = NetworkFile {
        origin: vertices[net.origin()].clone(),
        family: net.family().map(family_to_spec),
        vertices,
        edges,
    };
    serde_json::to_string_pretty(&file).expect("network serialization cannot fail")
}

pub fn load_network(path: &Path) -> Result<ResistanceNetwork> {
    let text = std::fs::read_to_string(path)?;
    parse_network(&text)
}

pub fn save_network(net: &ResistanceNetwork, path: &Path) -> Result<()> {
    std::fs::write(path, network_to_json(net))?;
    Ok(())
}

/// Gram matrix as CSV with a header row (and leading column) of vertex ids.
pub fn gram_csv(net: &ResistanceNetwork, gram: &GramMatrix) -> String {
    let mut out = String::from("x");
    for &x in gram.index_set() {
        let _ = write!(out, ",{}", net.label_of(x));
    }
    out.push('\n');
    for (i, &x) in gram.index_set().iter().enumerate() {
        let _ = write!(out, "{}", net.label_of(x));
        for j in 0..gram.len() {
            let _ = write!(out, ",{}", gram.matrix()[(i, j)]);
        }
        out.push('\n');
    }
    out
}

/// Energy vector as two-column CSV `vertex,value`.
pub fn energy_vector_csv(net: &ResistanceNetwork, v: &EnergyVector) -> String {
    let mut out = String::from("vertex,value\n");
    for x in 0..v.len() {
        let _ = writeln!(out, "{},{}", net.label_of(x), v.value(x));
    }
    out
}

/// Spectral-measure atoms as CSV `sigma,weight,k`.
pub fn atoms_csv(measures: &[SpectralMeasure]) -> String {
    let mut out = String::from("sigma,weight,k\n");
    for mu in measures {
        for &(sigma, weight) in &mu.atoms {
            let _ = writeln!(out, "{},{},{}", sigma, weight, mu.exhaustion_index);
        }
    }
    out
}

/// Heat-mass sequence as CSV `k,mass`.
pub fn mass_csv(masses: &[(usize, f64)]) -> String {
    let mut out = String::from("k,mass\n");
    for &(k, m) in masses {
        let _ = writeln!(out, "{},{}", k, m);
    }
    out
}

/// Two-column plot data `x,value`.
pub fn plot_csv(header: (&str, &str), rows: &[(usize, f64)]) -> String {
    let mut out = format!("{},{}\n", header.0, header.1);
    for &(x, v) in rows {
        let _ = writeln!(out, "{},{}", x, v);
    }
    out
}

pub fn verdict_str(verdict: TrendVerdict) -> &'static str {
    match verdict {
        TrendVerdict::CriterionMet => "criterion_met",
        TrendVerdict::Inconclusive => "inconclusive",
    }
}

#[derive(Debug, Clone, Serialize)]
struct GrowthStep {
    k: usize,
    norm: f64,
    partial_sum: f64,
}

#[derive(Debug, Clone, Serialize)]
struct GrowthReportJson {
    steps: Vec<GrowthStep>,
    verdict: &'static str,
}

/// Growth report as JSON `{steps: [{k, norm, partial_sum}...], verdict}`.
pub fn growth_report_json(report: &GrowthReport, k_offset: usize) -> String {
    let steps = report
        .norms
        .iter()
        .zip(&report.partial_sums)
        .enumerate()
        .map(|(i, (&norm, &partial_sum))| GrowthStep {
            k: k_offset + i,
            norm,
            partial_sum,
        })
        .collect();
    let json = GrowthReportJson {
        steps,
        verdict: verdict_str(report.verdict),
    };
    serde_json::to_string_pretty(&json).expect("report serialization cannot fail")
}

/// One residual check in a machine-readable report.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub check_name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ResidualReport {
    pub fn new(check_name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        ResidualReport {
            check_name: check_name.into(),
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }
}

/// Serializes residual checks as a JSON array.
pub fn residual_report_json(reports: &[ResidualReport]) -> String {
    serde_json::to_string_pretty(reports).expect("report serialization cannot fail")
}
