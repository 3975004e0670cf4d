//! JSON file formats.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use jm_core::povm::{Assemblage, BlochObservable, Hermitian2, Tolerances};
use jm_core::steering::StateAssemblage;
use jm_core::Vec3;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableJson {
    pub bias: f64,
    pub bloch: [f64; 3],
}

/// `{"observables": [{"bias": b, "bloch": [x, y, z]}, ..]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssemblageFile {
    pub observables: Vec<ObservableJson>,
}

impl AssemblageFile {
    pub fn from_assemblage(a: &Assemblage) -> Self {
        AssemblageFile {
            observables: a
                .observables()
                .iter()
                .map(|o| ObservableJson {
                    bias: o.bias,
                    bloch: [o.bloch.x, o.bloch.y, o.bloch.z],
                })
                .collect(),
        }
    }

    pub fn to_assemblage(&self, tol: Tolerances) -> Result<Assemblage, CliError> {
        if self.observables.is_empty() {
            return Err(CliError::input("assemblage has no observables"));
        }
        let obs = self
            .observables
            .iter()
            .map(|o| BlochObservable::new(o.bias, Vec3::from(o.bloch)))
            .collect();
        Assemblage::new(obs, tol.pos).map_err(CliError::from_core)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateInputJson {
    pub plus: [f64; 4],
    pub minus: [f64; 4],
}

/// `{"inputs": [{"plus": [c0, cx, cy, cz], "minus": [..]}, ..]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub inputs: Vec<StateInputJson>,
}

impl StateFile {
    pub fn from_states(sa: &StateAssemblage) -> Self {
        StateFile {
            inputs: sa
                .members()
                .iter()
                .map(|p| StateInputJson {
                    plus: p[0].coords(),
                    minus: p[1].coords(),
                })
                .collect(),
        }
    }

    pub fn to_states(&self, tol: Tolerances) -> Result<StateAssemblage, CliError> {
        let h = |c: &[f64; 4]| Hermitian2::new(c[0], c[1], c[2], c[3]);
        let members = self
            .inputs
            .iter()
            .map(|i| [h(&i.plus), h(&i.minus)])
            .collect();
        StateAssemblage::new(members, tol).map_err(CliError::from_core)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyJson {
    pub id: String,
    pub directions: Vec<[f64; 3]>,
}

/// Either `{"families": [{"id": .., "directions": [..]}, ..]}` or a single
/// unnamed family `{"directions": [..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DirectionsFile {
    Families { families: Vec<FamilyJson> },
    Single { directions: Vec<[f64; 3]> },
}

impl DirectionsFile {
    pub fn families(self) -> Vec<FamilyJson> {
        match self {
            DirectionsFile::Families { families } => families,
            DirectionsFile::Single { directions } => vec![FamilyJson {
                id: "family0".into(),
                directions,
            }],
        }
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("cannot parse {}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text)
        .map_err(|e| CliError::output(format!("cannot write {}: {e}", path.display())))
}
