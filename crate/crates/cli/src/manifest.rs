//! `key = value` instance manifests.
//!
//! ```text
//! problem = independentset
//! k = 2
//! circuit = tri.circuit
//! ```
//! Circuit paths are relative to the manifest. For `ntm` the `circuit` key
//! names a machine description instead.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use nexp2dqbf::circuit::{parse_circuit, Circuit};
use nexp2dqbf::reductions::Instance;
use nexp2dqbf::reductions::{
    parse_ntm, NtmInstance, Problem, SetFamilyInstance, SubsetSumInstance, SuccinctGraph, SuccinctSat,
};
use nexp2dqbf::Error;

use crate::Failure;

const KEYS: [&str; 6] = ["problem", "k", "t", "word", "circuit", "circuit2"];

#[derive(Debug, Default)]
pub struct Manifest {
    pub entries: BTreeMap<String, String>,
    pub dir: PathBuf,
}

impl Manifest {
    pub fn parse(text: &str, dir: &Path) -> Result<Self, Error> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: idx + 1,
                message: format!("expected `key = value`, found `{line}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("unknown key `{key}`"),
                });
            }
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(Manifest {
            entries,
            dir: dir.to_path_buf(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = read(path)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        Manifest::parse(&text, dir).map_err(|e| Failure::at(path, e))
    }

    fn get(&self, key: &str) -> Result<&str, Error> {
        self.entries
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::InvalidInstance(format!("manifest lacks `{key}`")))
    }

    fn number(&self, key: &str) -> Result<u64, Error> {
        let v = self.get(key)?;
        v.parse()
            .map_err(|_| Error::InvalidInstance(format!("`{key}` must be a non-negative integer, found `{v}`")))
    }

    fn file(&self, key: &str) -> Result<(PathBuf, String), Failure> {
        let path = self.dir.join(self.get(key).map_err(Failure::from)?);
        let text = read(&path)?;
        Ok((path, text))
    }

    fn circuit(&self, key: &str) -> Result<Circuit, Failure> {
        let (path, text) = self.file(key)?;
        parse_circuit(&text).map_err(|e| Failure::at(&path, e))
    }

    fn graph(&self, key: &str) -> Result<SuccinctGraph, Failure> {
        Ok(SuccinctGraph::new(self.circuit(key)?)?)
    }

    /// Builds the instance. `forced` comes from `--problem` and must match
    /// the manifest's own `problem` when both are present.
    pub fn instance(&self, forced: Option<Problem>) -> Result<Instance, Failure> {
        let declared = match self.entries.get("problem") {
            Some(tag) => {
                Some(Problem::from_tag(tag).ok_or_else(|| Error::InvalidInstance(format!("unknown problem `{tag}`")))?)
            }
            None => None,
        };
        let problem = match (declared, forced) {
            (Some(d), Some(f)) if d != f => {
                return Err(Error::InvalidInstance(format!("manifest declares `{d}` but `{f}` was requested")).into())
            }
            (Some(p), _) | (None, Some(p)) => p,
            (None, None) => return Err(Error::InvalidInstance("no problem given".into()).into()),
        };
        Ok(match problem {
            Problem::ThreeCol => Instance::ThreeCol(self.graph("circuit")?),
            Problem::Hamiltonian => Instance::Hamiltonian(self.graph("circuit")?),
            Problem::SetPacking => {
                Instance::SetPacking(SetFamilyInstance::new(self.circuit("circuit")?, self.number("k")?)?)
            }
            Problem::SubsetSum => Instance::SubsetSum(SubsetSumInstance::new(
                self.circuit("circuit")?,
                self.circuit("circuit2")?,
            )?),
            Problem::IndependentSet => Instance::IndependentSet(self.graph("circuit")?, self.number("k")?),
            Problem::SubgraphIso => Instance::SubgraphIso(self.graph("circuit")?, self.graph("circuit2")?),
            Problem::VertexCover => Instance::VertexCover(self.graph("circuit")?, self.number("k")?),
            Problem::DominatingSet => Instance::DominatingSet(self.graph("circuit")?, self.number("k")?),
            Problem::Sat => Instance::Sat(SuccinctSat::new(self.circuit("circuit")?, None, None)?),
            Problem::Ntm => {
                let (path, text) = self.file("circuit")?;
                let machine = parse_ntm(&text).map_err(|e| Failure::at(&path, e))?;
                let t = self.number("t")?;
                let word = self.entries.get("word").cloned().unwrap_or_default();
                Instance::Ntm(NtmInstance {
                    machine,
                    word,
                    t: usize::try_from(t).map_err(|_| Error::Capacity(format!("t = {t}")))?,
                })
            }
        })
    }
}

pub fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}
