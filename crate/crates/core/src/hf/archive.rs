use super::solver::StepOutcome;
use crate::behavior::MaterialState;
use crate::csvio::{read_table, write_table};
use crate::error::{Error, Result};
use crate::tensor::SymTensor;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

/// A (loading label, time step) pair.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Variability {
    pub label: String,
    pub time_index: usize,
}

impl Variability {
    pub fn new(label: &str, time_index: usize) -> Self {
        Variability {
            label: label.to_owned(),
            time_index,
        }
    }
}

impl std::fmt::Display for Variability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{t={}, '{}'}}", self.time_index, self.label)
    }
}

/// HF solution at one variability: displacement, stress and state at every
/// integration point.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub u: Vec<f64>,
    pub stresses: Vec<SymTensor>,
    pub states: Vec<MaterialState>,
    pub iterations: usize,
}

impl Snapshot {
    pub fn from_outcome(time: f64, out: StepOutcome) -> Self {
        Snapshot {
            time,
            u: out.u,
            stresses: out.stresses,
            states: out.states,
            iterations: out.iterations,
        }
    }

    pub fn p(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.p).collect()
    }

    /// Stress component `c` (Voigt order) at every integration point.
    pub fn stress_component(&self, c: usize) -> Vec<f64> {
        self.stresses.iter().map(|s| s.0[c]).collect()
    }
}

#[derive(Serialize, Deserialize)]
struct ManifestEntry {
    label: String,
    time_index: usize,
    time: f64,
    iterations: usize,
    prefix: String,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    dofs: usize,
    points: usize,
    entries: Vec<ManifestEntry>,
}

const MANIFEST: &str = "manifest.json";
const STATE_HEADER: [&str; 13] = [
    "epsp11", "epsp22", "epsp33", "epsp12", "epsp23", "epsp31", "alpha11", "alpha22", "alpha33", "alpha12",
    "alpha23", "alpha31", "p",
];

/// Snapshots keyed by variability; the key set is the offline set.
#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotArchive {
    dofs: usize,
    points: usize,
    entries: BTreeMap<Variability, Snapshot>,
}

impl SnapshotArchive {
    pub fn new(dofs: usize, points: usize) -> Self {
        SnapshotArchive {
            dofs,
            points,
            entries: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, key: Variability, snap: Snapshot) -> Result<()> {
        if snap.u.len() != self.dofs || snap.stresses.len() != self.points || snap.states.len() != self.points {
            return Err(Error::Dimension(format!("snapshot {key} does not match the archive mesh")));
        }
        self.entries.insert(key, snap);
        Ok(())
    }

    /// Moves every snapshot of `other` into this archive.
    pub fn merge(&mut self, other: SnapshotArchive) -> Result<()> {
        for (k, s) in other.entries {
            self.insert(k, s)?;
        }
        Ok(())
    }

    pub fn get(&self, key: &Variability) -> Option<&Snapshot> {
        self.entries.get(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &Variability> {
        self.entries.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Variability, &Snapshot)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dofs(&self) -> usize {
        self.dofs
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Snapshots of one loading, in time order.
    pub fn trajectory(&self, label: &str) -> Vec<&Snapshot> {
        self.entries
            .iter()
            .filter(|(k, _)| k.label == label)
            .map(|(_, s)| s)
            .collect()
    }

    pub fn labels(&self) -> Vec<String> {
        let mut l: Vec<String> = self.entries.keys().map(|k| k.label.clone()).collect();
        l.dedup();
        l
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut manifest = Manifest {
            dofs: self.dofs,
            points: self.points,
            entries: Vec::new(),
        };
        for (i, (key, snap)) in self.entries.iter().enumerate() {
            let prefix = format!("s{i:05}");
            write_table(&dir.join(format!("{prefix}_u.csv")), &["ux", "uy", "uz"], snap.u.chunks(3))?;
            write_table(
                &dir.join(format!("{prefix}_sigma.csv")),
                &["s11", "s22", "s33", "s12", "s23", "s31"],
                snap.stresses.iter().map(|s| s.0),
            )?;
            write_table(
                &dir.join(format!("{prefix}_state.csv")),
                &STATE_HEADER,
                snap.states.iter().map(|s| s.to_row()),
            )?;
            manifest.entries.push(ManifestEntry {
                label: key.label.clone(),
                time_index: key.time_index,
                time: snap.time,
                iterations: snap.iterations,
                prefix,
            });
        }
        std::fs::write(dir.join(MANIFEST), serde_json::to_string_pretty(&manifest)?)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let manifest: Manifest = serde_json::from_str(&std::fs::read_to_string(dir.join(MANIFEST))?)?;
        let mut archive = SnapshotArchive::new(manifest.dofs, manifest.points);
        for e in manifest.entries {
            let (_, u) = read_table(&dir.join(format!("{}_u.csv", e.prefix)))?;
            let (_, sigma) = read_table(&dir.join(format!("{}_sigma.csv", e.prefix)))?;
            let (_, state) = read_table(&dir.join(format!("{}_state.csv", e.prefix)))?;
            let fixed = |rows: Vec<Vec<f64>>, width: usize, what: &str| -> Result<Vec<Vec<f64>>> {
                if rows.iter().any(|r| r.len() != width) {
                    return Err(Error::Parse {
                        file: format!("{}_{what}.csv", e.prefix),
                        message: format!("expected {width} columns"),
                    });
                }
                Ok(rows)
            };
            let snap = Snapshot {
                time: e.time,
                u: fixed(u, 3, "u")?.concat(),
                stresses: fixed(sigma, 6, "sigma")?
                    .iter()
                    .map(|r| SymTensor([r[0], r[1], r[2], r[3], r[4], r[5]]))
                    .collect(),
                states: fixed(state, 13, "state")?.iter().map(|r| MaterialState::from_row(r)).collect(),
                iterations: e.iterations,
            };
            archive.insert(Variability::new(&e.label, e.time_index), snap)?;
        }
        Ok(archive)
    }
}
