//! The JSON workspace schema: one module description plus optional named
//! refinements and deformation families. All rationals travel as exact
//! strings, matrices follow the column-action convention, and subspace
//! generators are row vectors in the standard basis.

use crate::deform::{FirstOrderCharacter, FirstOrderFamily};
use crate::matrix::Matrix;
use crate::phinmod::{FilteredPhiNModule, Filtration};
use crate::rat::Rat;
use crate::subspace::{Flag, Subspace};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModuleFile {
    pub p: u64,
    pub dimension: usize,
    pub phi: Vec<Vec<Rat>>,
    pub monodromy: Vec<Vec<Rat>>,
    pub filtration: Vec<FiltrationStep>,
    /// Extra stable-subspace candidates for the non-certifying
    /// admissibility check, each a list of generator rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates: Option<Vec<Vec<Vec<Rat>>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub refinements: Vec<NamedFlag>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub families: BTreeMap<String, FamilyFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FiltrationStep {
    pub jump: i64,
    pub generators: Vec<Vec<Rat>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NamedFlag {
    pub name: String,
    pub flag: Vec<Vec<Rat>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilyFile {
    pub characters: Vec<CharacterEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CharacterEntry {
    pub eps_p: Rat,
    pub eps_w: Rat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_delta_p: Option<Rat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_weight: Option<Rat>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IoError {
    #[error("json: {0}")]
    Json(String),
    #[error("{path}: {message}")]
    Shape { path: String, message: String },
    #[error("refinement {0:?} not found")]
    UnknownRefinement(String),
    #[error("family {0:?} not found")]
    UnknownFamily(String),
}

fn shape(path: impl Into<String>, message: impl Into<String>) -> IoError {
    IoError::Shape {
        path: path.into(),
        message: message.into(),
    }
}

/// Parses a workspace file, reporting the JSON path of the offending field
/// on failure.
pub fn parse_module_file(json: &str) -> Result<ModuleFile, IoError> {
    let de = &mut serde_json::Deserializer::from_str(json);
    serde_path_to_error::deserialize(de).map_err(|e| IoError::Json(e.to_string()))
}

fn matrix_from(rows: &[Vec<Rat>], n: usize, path: &str) -> Result<Matrix, IoError> {
    if rows.len() != n {
        return Err(shape(
            path,
            format!("expected {} rows, got {}", n, rows.len()),
        ));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(shape(
                format!("{}[{}]", path, i),
                format!("expected {} entries, got {}", n, row.len()),
            ));
        }
    }
    Ok(Matrix::from_rows(n, rows))
}

impl ModuleFile {
    pub fn to_module(&self) -> Result<FilteredPhiNModule, IoError> {
        let n = self.dimension;
        let phi = matrix_from(&self.phi, n, "phi")?;
        let monodromy = matrix_from(&self.monodromy, n, "monodromy")?;
        let mut entries = Vec::new();
        for (k, step) in self.filtration.iter().enumerate() {
            for (g, row) in step.generators.iter().enumerate() {
                if row.len() != n {
                    return Err(shape(
                        format!("filtration[{}].generators[{}]", k, g),
                        format!("expected {} entries, got {}", n, row.len()),
                    ));
                }
            }
            let space = Subspace::from_rows(n, &step.generators);
            if space.is_zero() {
                // The zero tail of a filtration is implicit.
                continue;
            }
            entries.push((step.jump, space));
        }
        Ok(FilteredPhiNModule::new(
            self.p,
            n,
            phi,
            monodromy,
            Filtration::new(entries),
        ))
    }

    pub fn candidate_subspaces(&self) -> Result<Vec<Subspace>, IoError> {
        let n = self.dimension;
        let mut out = Vec::new();
        if let Some(cands) = &self.candidates {
            for (k, rows) in cands.iter().enumerate() {
                for (g, row) in rows.iter().enumerate() {
                    if row.len() != n {
                        return Err(shape(
                            format!("candidates[{}][{}]", k, g),
                            format!("expected {} entries, got {}", n, row.len()),
                        ));
                    }
                }
                out.push(Subspace::from_rows(n, rows));
            }
        }
        Ok(out)
    }

    pub fn flag(&self, name: &str) -> Result<Flag, IoError> {
        let named = self
            .refinements
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| IoError::UnknownRefinement(name.to_string()))?;
        Flag::new(self.dimension, named.flag.clone())
            .map_err(|e| shape(format!("refinements[{:?}].flag", name), e.to_string()))
    }

    pub fn family(&self, name: &str) -> Result<FirstOrderFamily, IoError> {
        let fam = self
            .families
            .get(name)
            .ok_or_else(|| IoError::UnknownFamily(name.to_string()))?;
        Ok(FirstOrderFamily {
            characters: fam
                .characters
                .iter()
                .map(|c| FirstOrderCharacter {
                    eps_p: c.eps_p.clone(),
                    eps_w: c.eps_w.clone(),
                    base_delta_p: c.base_delta_p.clone(),
                    base_weight: c.base_weight.clone(),
                })
                .collect(),
        })
    }

    /// Serializes a module (plus optional refinements) back into the file
    /// schema; inverse of `to_module` up to canonical form.
    pub fn from_module(module: &FilteredPhiNModule, refinements: Vec<NamedFlag>) -> ModuleFile {
        let n = module.dim();
        ModuleFile {
            p: module.p(),
            dimension: n,
            phi: module.phi().row_vecs(),
            monodromy: module.monodromy().row_vecs(),
            filtration: module
                .filtration()
                .entries()
                .iter()
                .map(|(jump, space)| FiltrationStep {
                    jump: *jump,
                    generators: space.basis_rows(),
                })
                .collect(),
            candidates: None,
            refinements,
            families: BTreeMap::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }
}
