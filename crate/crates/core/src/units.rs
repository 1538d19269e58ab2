//! Physical constants used for reporting.

/// kcal/mol per Hartree.
pub const HARTREE_TO_KCAL_PER_MOL: f64 = 627.509474;

/// Ångström per bohr.
pub const BOHR_TO_ANGSTROM: f64 = 0.52917721;

/// One kcal/mol expressed in Hartree.
pub const CHEMICAL_ACCURACY: f64 = 1.0 / HARTREE_TO_KCAL_PER_MOL;

pub fn to_kcal(hartree: f64) -> f64 {
    hartree * HARTREE_TO_KCAL_PER_MOL
}
