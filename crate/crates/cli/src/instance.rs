//! Problem instances: files on disk, synthetic manifests, and the SDPs built
//! from them.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hallar_core::problems::{
    build_matrix_completion, build_phase_retrieval, build_stable_set, generate_matrix_completion,
    generate_phase_retrieval, load_graph, load_observations, sample_count, DiffractionModel, Graph, ObservationSet,
};
use hallar_core::SdpProblem;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::json;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    #[value(name = "stableset")]
    StableSet,
    #[value(name = "phaseretrieval")]
    PhaseRetrieval,
    #[value(name = "matcomp")]
    MatComp,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::StableSet => "stableset",
            Kind::PhaseRetrieval => "phaseretrieval",
            Kind::MatComp => "matcomp",
        }
    }
}

/// Generator parameters; which fields apply depends on the kind.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n1: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n2: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
}

/// Everything needed to regenerate a synthetic instance bit-exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub kind: Kind,
    pub params: Params,
    pub seed: u64,
    /// Matrix order and constraint count of the generated SDP.
    #[serde(default)]
    pub n: usize,
    #[serde(default)]
    pub m: usize,
}

pub enum Instance {
    StableSet(Graph),
    PhaseRetrieval(DiffractionModel),
    MatComp { obs: ObservationSet, truth: Option<Vec<Vec<f64>>> },
}

pub enum AnyProblem {
    Real(SdpProblem<f64>),
    Complex(SdpProblem<Complex64>),
}

impl AnyProblem {
    pub fn n(&self) -> usize {
        match self {
            AnyProblem::Real(p) => p.n(),
            AnyProblem::Complex(p) => p.n(),
        }
    }

    pub fn m(&self) -> usize {
        match self {
            AnyProblem::Real(p) => p.m(),
            AnyProblem::Complex(p) => p.m(),
        }
    }
}

fn need<T>(v: Option<T>, what: &str, kind: Kind) -> Result<T> {
    v.with_context(|| format!("{} instances need parameter {what}", kind.name()))
}

impl Manifest {
    pub fn regenerate(&self) -> Result<Instance> {
        let p = &self.params;
        Ok(match self.kind {
            Kind::StableSet => {
                let family = need(p.family.as_deref(), "family", self.kind)?;
                let g = match family {
                    "cycle" => Graph::cycle(need(p.n, "n", self.kind)?)?,
                    "complete" => Graph::complete(need(p.n, "n", self.kind)?)?,
                    "empty" => Graph::empty(need(p.n, "n", self.kind)?)?,
                    "hypercube" => Graph::hypercube(need(p.d, "d", self.kind)?)?,
                    "petersen" => Graph::petersen(),
                    "random" => Graph::random(need(p.n, "n", self.kind)?, need(p.p, "p", self.kind)?, self.seed)?,
                    other => bail!("unknown graph family {other:?}"),
                };
                Instance::StableSet(g)
            }
            Kind::PhaseRetrieval => Instance::PhaseRetrieval(generate_phase_retrieval(need(p.n, "n", self.kind)?, self.seed)?),
            Kind::MatComp => {
                let (n1, n2, r) = (need(p.n1, "n1", self.kind)?, need(p.n2, "n2", self.kind)?, need(p.r, "r", self.kind)?);
                let (obs, m) = generate_matrix_completion(n1, n2, r, self.seed)?;
                let truth = (0..n1).map(|i| (0..n2).map(|j| m[(i, j)]).collect()).collect();
                Instance::MatComp { obs, truth: Some(truth) }
            }
        })
    }

    /// Fills in `n` and `m` from the generated instance.
    pub fn with_sizes(mut self, inst: &Instance) -> Self {
        let (n, m) = inst.sizes();
        self.n = n;
        self.m = m;
        self
    }

    /// Sample count a matrix-completion manifest will produce.
    pub fn expected_m(&self) -> Option<usize> {
        match (self.kind, self.params.n1, self.params.n2, self.params.r) {
            (Kind::MatComp, Some(n1), Some(n2), Some(r)) => Some(sample_count(n1, n2, r)),
            _ => None,
        }
    }
}

impl Instance {
    pub fn kind(&self) -> Kind {
        match self {
            Instance::StableSet(_) => Kind::StableSet,
            Instance::PhaseRetrieval(_) => Kind::PhaseRetrieval,
            Instance::MatComp { .. } => Kind::MatComp,
        }
    }

    pub fn sizes(&self) -> (usize, usize) {
        match self {
            Instance::StableSet(g) => (g.n(), g.edges().len() + 1),
            Instance::PhaseRetrieval(m) => (m.n, m.b.len()),
            Instance::MatComp { obs, .. } => (obs.n1() + obs.n2(), obs.entries().len()),
        }
    }

    pub fn build(&self) -> Result<AnyProblem> {
        Ok(match self {
            Instance::StableSet(g) => AnyProblem::Real(build_stable_set(g)),
            Instance::PhaseRetrieval(m) => AnyProblem::Complex(build_phase_retrieval(m)?),
            Instance::MatComp { obs, .. } => AnyProblem::Real(build_matrix_completion(obs)?),
        })
    }
}

/// On-disk form of a phase retrieval instance; complex numbers are
/// `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseFile {
    pub n: usize,
    pub masks: Vec<Vec<[f64; 2]>>,
    pub b: Vec<f64>,
    #[serde(default)]
    pub truth: Option<Vec<[f64; 2]>>,
}

fn pairs(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn complex(v: &[[f64; 2]]) -> Vec<Complex64> {
    v.iter().map(|&[re, im]| Complex64::new(re, im)).collect()
}

impl From<&DiffractionModel> for PhaseFile {
    fn from(m: &DiffractionModel) -> Self {
        PhaseFile {
            n: m.n,
            masks: m.masks.iter().map(|y| pairs(y)).collect(),
            b: m.b.clone(),
            truth: m.truth.as_deref().map(pairs),
        }
    }
}

impl From<PhaseFile> for DiffractionModel {
    fn from(f: PhaseFile) -> Self {
        DiffractionModel {
            n: f.n,
            masks: f.masks.iter().map(|y| complex(y)).collect(),
            b: f.b,
            truth: f.truth.as_deref().map(complex),
        }
    }
}

/// Where an instance came from, as recorded in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Graph(PathBuf),
    Observations(PathBuf),
    Phase(PathBuf),
    Manifest(Manifest),
}

impl Source {
    /// Infers the source type of a path: `.csv` observations, JSON
    /// manifests or phase instances, anything else a graph.
    pub fn from_path(path: &Path) -> Result<Source> {
        let path = absolute(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => Ok(Source::Observations(path)),
            Some("json") => {
                let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                let v: serde_json::Value =
                    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
                if v.get("masks").is_some() {
                    Ok(Source::Phase(path))
                } else {
                    Ok(Source::Manifest(
                        serde_json::from_value(v).with_context(|| format!("reading manifest {}", path.display()))?,
                    ))
                }
            }
            _ => Ok(Source::Graph(path)),
        }
    }

    pub fn kind(&self) -> Kind {
        match self {
            Source::Graph(_) => Kind::StableSet,
            Source::Observations(_) => Kind::MatComp,
            Source::Phase(_) => Kind::PhaseRetrieval,
            Source::Manifest(m) => m.kind,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Source::Graph(p) | Source::Observations(p) | Source::Phase(p) => p.display().to_string(),
            Source::Manifest(m) => format!("{}(seed={})", m.kind.name(), m.seed),
        }
    }

    pub fn load(&self) -> Result<Instance> {
        Ok(match self {
            Source::Graph(p) => Instance::StableSet(load_graph(p).with_context(|| format!("loading {}", p.display()))?),
            Source::Observations(p) => Instance::MatComp {
                obs: load_observations(p).with_context(|| format!("loading {}", p.display()))?,
                truth: None,
            },
            Source::Phase(p) => Instance::PhaseRetrieval(read_phase(p)?),
            Source::Manifest(m) => m.regenerate()?,
        })
    }
}

fn absolute(path: &Path) -> Result<PathBuf> {
    fs::canonicalize(path).with_context(|| format!("cannot open {}", path.display()))
}

pub fn read_phase(path: &Path) -> Result<DiffractionModel> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let f: PhaseFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(f.into())
}

/// Writes a generated instance and its manifest into `dir`; returns the
/// instance file path.
pub fn write_instance(dir: &Path, manifest: &Manifest, inst: &Instance) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let file = match inst {
        Instance::StableSet(g) => {
            let p = dir.join("graph.txt");
            fs::write(&p, g.to_text())?;
            p
        }
        Instance::PhaseRetrieval(m) => {
            let p = dir.join("instance.json");
            fs::write(&p, json::to_string(&PhaseFile::from(m))?)?;
            p
        }
        Instance::MatComp { obs, truth } => {
            let p = dir.join("observations.csv");
            fs::write(&p, obs.to_csv())?;
            if let Some(t) = truth {
                let rows: Vec<String> = t
                    .iter()
                    .map(|r| r.iter().map(|v| json::fmt_f64(*v)).collect::<Vec<_>>().join(","))
                    .collect();
                fs::write(dir.join("truth.csv"), rows.join("\n") + "\n")?;
            }
            p
        }
    };
    fs::write(dir.join("manifest.json"), json::to_string(manifest)?)?;
    Ok(file)
}
