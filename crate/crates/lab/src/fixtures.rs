//! Fixture resolution: manifest lookups with hash checks, or explicit files.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};
use ucc_ordering::{parse_fcidump, MolecularIntegrals};

use crate::config::FixtureSpec;
use crate::error::{LabError, Result};

/// Grid points closer than this are the same geometry.
const R_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Deserialize)]
pub struct Manifest {
    pub molecules: Vec<ManifestMolecule>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ManifestMolecule {
    pub molecule: String,
    pub n_spatial: usize,
    pub n_electrons: usize,
    pub dissociation_reference: f64,
    pub points: Vec<ManifestPoint>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ManifestPoint {
    pub r_angstrom: f64,
    pub file: PathBuf,
    pub sha256: String,
    pub fci_energy: f64,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Fixture(format!("cannot read manifest {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| LabError::Fixture(format!("manifest {}: {e}", path.display())))
    }

    pub fn molecule(&self, name: &str) -> Result<&ManifestMolecule> {
        self.molecules
            .iter()
            .find(|m| m.molecule == name)
            .ok_or_else(|| LabError::Fixture(format!("molecule {name:?} not in manifest")))
    }
}

/// One geometry ready for computation.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub r: f64,
    pub path: PathBuf,
    pub sha256: String,
    pub integrals: MolecularIntegrals,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn read_fixture(path: &Path, r: f64) -> Result<Fixture> {
    let bytes = std::fs::read(path).map_err(|e| LabError::Fixture(format!("cannot read {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| LabError::Fixture(format!("{} is not UTF-8 text", path.display())))?;
    let integrals =
        parse_fcidump(&text).map_err(|e| LabError::Fixture(format!("{}: {e}", path.display())))?;
    Ok(Fixture {
        r,
        path: path.to_path_buf(),
        sha256: sha256_hex(&bytes),
        integrals,
    })
}

/// Bond length from a `..._r<value>.fcidump` file name.
pub fn r_from_filename(path: &Path) -> Option<f64> {
    let stem = path.file_stem()?.to_str()?;
    let (_, tail) = stem.rsplit_once("_r")?;
    tail.parse().ok()
}

/// Resolves the fixture spec to geometries sorted by R.
///
/// Requested R values absent from the manifest produce one error naming
/// every gap. Hash mismatches against the manifest are fixture errors.
pub fn resolve(spec: &FixtureSpec) -> Result<Vec<Fixture>> {
    let mut out = match (&spec.manifest, &spec.molecule) {
        (Some(manifest_path), Some(name)) => {
            let manifest = Manifest::load(manifest_path)?;
            let mol = manifest.molecule(name)?;
            let base = manifest_path.parent().unwrap_or(Path::new("."));
            let selected: Vec<&ManifestPoint> = match &spec.r {
                None => mol.points.iter().collect(),
                Some(rs) => {
                    let found: Vec<Option<&ManifestPoint>> = rs
                        .iter()
                        .map(|&r| mol.points.iter().find(|p| (p.r_angstrom - r).abs() < R_TOL))
                        .collect();
                    let gaps: Vec<String> = rs
                        .iter()
                        .zip(&found)
                        .filter(|(_, f)| f.is_none())
                        .map(|(r, _)| format!("{r}"))
                        .collect();
                    if !gaps.is_empty() {
                        return Err(LabError::Fixture(format!(
                            "no {name} fixture at R = {} Å",
                            gaps.join(", ")
                        )));
                    }
                    found.into_iter().flatten().collect()
                }
            };
            selected
                .into_iter()
                .map(|p| {
                    let f = read_fixture(&base.join(&p.file), p.r_angstrom)?;
                    if f.sha256 != p.sha256 {
                        return Err(LabError::Fixture(format!(
                            "{} does not match its manifest hash",
                            f.path.display()
                        )));
                    }
                    Ok(f)
                })
                .collect::<Result<Vec<_>>>()?
        }
        _ => spec
            .files
            .iter()
            .map(|path| {
                let r = r_from_filename(path).ok_or_else(|| {
                    LabError::Fixture(format!("cannot read a bond length from {}", path.display()))
                })?;
                read_fixture(path, r)
            })
            .collect::<Result<Vec<_>>>()?,
    };
    out.sort_by(|a, b| a.r.total_cmp(&b.r));
    if out.is_empty() {
        return Err(LabError::Fixture("no fixtures selected".into()));
    }
    Ok(out)
}
