//! History-set files, reports and tables.
//!
//! A history set is stored as JSON:
//!
//! ```json
//! {
//!   "dimension": 2,
//!   "initial_state": { "type": "pure", "data": [[1, 0], [0, 0]] },
//!   "histories": { "type": "chain", "decompositions": [[P0, P1], [Q0, Q1]] },
//!   "labels": ["..."],
//!   "homogeneous": true
//! }
//! ```
//!
//! Complex numbers are `[re, im]` pairs, matrices are row-major arrays of
//! rows. `histories` may instead be `{"type": "operators", "ops": [C0, …]}`.
//! Chains accept an optional `unitaries` list (one evolution operator per
//! step) that is folded into the projectors on load.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::histories::{fold_time_evolution, ClassOperator, HistorySet, InitialState};
use crate::linalg::{c, ensure_square, ComplexMatrix, ComplexVector, DensityMatrix, Projector, StateKind};

pub type ComplexPair = [f64; 2];
pub type MatrixData = Vec<Vec<ComplexPair>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateData {
    Vector(Vec<ComplexPair>),
    Matrix(MatrixData),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialStateFile {
    #[serde(rename = "type")]
    pub kind: StateKind,
    pub data: StateData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum HistoriesFile {
    Operators {
        ops: Vec<MatrixData>,
    },
    Chain {
        decompositions: Vec<Vec<MatrixData>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        unitaries: Option<Vec<MatrixData>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistorySetFile {
    pub dimension: usize,
    pub initial_state: InitialStateFile,
    pub histories: HistoriesFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default)]
    pub homogeneous: bool,
}

pub fn matrix_to_data(m: &ComplexMatrix) -> MatrixData {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn vector_to_data(v: &ComplexVector) -> Vec<ComplexPair> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

/// Square matrix from row data; ragged or non-square input is an error.
pub fn matrix_from_data(data: &MatrixData, context: &str) -> Result<ComplexMatrix> {
    let rows = data.len();
    let cols = data.first().map_or(0, Vec::len);
    if let Some(bad) = data.iter().position(|r| r.len() != cols) {
        return Err(Error::Input(format!(
            "{context}: row {bad} has {} entries, row 0 has {cols}",
            data[bad].len()
        )));
    }
    let m = ComplexMatrix::from_fn(rows, cols, |i, j| c(data[i][j][0], data[i][j][1]));
    ensure_square(&m).map_err(|e| Error::Input(format!("{context}: {e}")))?;
    Ok(m)
}

fn expect_dim(m: &ComplexMatrix, d: usize, context: &str) -> Result<()> {
    if m.nrows() != d {
        return Err(Error::DimensionMismatch {
            context: context.to_string(),
            expected: d,
            found: m.nrows(),
        });
    }
    Ok(())
}

impl HistorySetFile {
    pub fn from_set(set: &HistorySet) -> Self {
        let initial_state = match set.initial() {
            InitialState::Pure(v) => InitialStateFile {
                kind: StateKind::Pure,
                data: StateData::Vector(vector_to_data(v)),
            },
            InitialState::Mixed(rho) => InitialStateFile {
                kind: StateKind::Mixed,
                data: StateData::Matrix(matrix_to_data(rho.matrix())),
            },
        };
        let histories = match set.decompositions() {
            Some(decomps) => HistoriesFile::Chain {
                decompositions: decomps
                    .iter()
                    .map(|step| step.iter().map(|p| matrix_to_data(p.matrix())).collect())
                    .collect(),
                unitaries: None,
            },
            None => HistoriesFile::Operators {
                ops: set.operators().iter().map(|op| matrix_to_data(op.matrix())).collect(),
            },
        };
        HistorySetFile {
            dimension: set.dim(),
            initial_state,
            histories,
            labels: Some(set.labels().to_vec()),
            homogeneous: set.is_homogeneous(),
        }
    }

    pub fn to_set(&self) -> Result<HistorySet> {
        let d = self.dimension;
        if d == 0 {
            return Err(Error::Input("dimension: must be at least 1".into()));
        }
        let initial = match (&self.initial_state.kind, &self.initial_state.data) {
            (StateKind::Pure, StateData::Vector(v)) => {
                if v.len() != d {
                    return Err(Error::DimensionMismatch {
                        context: "initial_state.data".into(),
                        expected: d,
                        found: v.len(),
                    });
                }
                InitialState::Pure(ComplexVector::from_iterator(d, v.iter().map(|z| c(z[0], z[1]))))
            }
            (StateKind::Mixed, StateData::Matrix(m)) => {
                let m = matrix_from_data(m, "initial_state.data")?;
                expect_dim(&m, d, "initial_state.data")?;
                InitialState::Mixed(DensityMatrix::new(m)?)
            }
            (StateKind::Pure, StateData::Matrix(_)) => {
                return Err(Error::Input("initial_state.data: a pure state is a list of [re, im] pairs".into()))
            }
            (StateKind::Mixed, StateData::Vector(_)) => {
                return Err(Error::Input("initial_state.data: a mixed state is a matrix".into()))
            }
        };
        let set = match &self.histories {
            HistoriesFile::Operators { ops } => {
                let ops = ops
                    .iter()
                    .enumerate()
                    .map(|(i, m)| {
                        let context = format!("histories.ops[{i}]");
                        let m = matrix_from_data(m, &context)?;
                        expect_dim(&m, d, &context)?;
                        Ok(ClassOperator::raw(m))
                    })
                    .collect::<Result<Vec<_>>>()?;
                HistorySet::new(initial, ops, self.labels.clone(), self.homogeneous)?
            }
            HistoriesFile::Chain {
                decompositions,
                unitaries,
            } => {
                let mut decomps = Vec::with_capacity(decompositions.len());
                for (k, step) in decompositions.iter().enumerate() {
                    let mut ps = Vec::with_capacity(step.len());
                    for (j, m) in step.iter().enumerate() {
                        let context = format!("histories.decompositions[{k}][{j}]");
                        let m = matrix_from_data(m, &context)?;
                        expect_dim(&m, d, &context)?;
                        ps.push(Projector::new(m).map_err(|e| Error::Input(format!("{context}: {e}")))?);
                    }
                    decomps.push(ps);
                }
                if let Some(us) = unitaries {
                    let us = us
                        .iter()
                        .enumerate()
                        .map(|(k, m)| matrix_from_data(m, &format!("histories.unitaries[{k}]")))
                        .collect::<Result<Vec<_>>>()?;
                    decomps = fold_time_evolution(&decomps, &us)?;
                }
                let set = HistorySet::from_chain(initial, decomps)?;
                match &self.labels {
                    Some(l) => set.with_labels(l.clone())?,
                    None => set,
                }
            }
        };
        Ok(set)
    }
}

pub fn parse_history_set(json: &str) -> Result<HistorySet> {
    let file: HistorySetFile = serde_json::from_str(json)?;
    file.to_set()
}

pub fn read_history_set(path: &Path) -> Result<HistorySet> {
    parse_history_set(&fs::read_to_string(path)?)
}

pub fn history_set_json(set: &HistorySet) -> Result<String> {
    Ok(serde_json::to_string_pretty(&HistorySetFile::from_set(set))?)
}

/// Writes `contents` to a temporary file next to `path`, then renames it.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn write_history_set(path: &Path, set: &HistorySet) -> Result<()> {
    write_atomic(path, history_set_json(set)?.as_bytes())
}

/// 17 significant digits, `.` decimal point.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// CSV text from a header and string rows.
pub fn csv_string(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| Error::Input(e.to_string()))?;
    for r in rows {
        w.write_record(r).map_err(|e| Error::Input(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Input(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Input(e.to_string()))
}
