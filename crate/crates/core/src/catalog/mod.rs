//! Catalog of planar realizations and the delay systems invariant under them.
//!
//! Realizations are static data instantiated at concrete parameter values.
//! Families carry their delay systems, closed-form invariants and admissible
//! sampling boxes.

mod algebras;
pub(crate) mod families;
pub(crate) mod params;

pub use algebras::AlgebraRealization;
pub use families::{Invariant, InvariantFamily, DEFAULT_MAX_DELAY};
pub use params::{ParamValue, Params};

use crate::error::Result;
use crate::system::DODSystem;
use serde::Serialize;

pub const CATALOG_SCHEMA: &str = "dods-catalog/1";

/// Every realization at default parameters, in table order.
pub fn list_algebras() -> Vec<AlgebraRealization> {
    algebras::REALIZATIONS
        .iter()
        .map(|d| algebras::build(d, &Params::new()).expect("catalog defaults are valid"))
        .collect()
}

pub fn algebra(id: &str, params: &Params) -> Result<AlgebraRealization> {
    algebras::build(algebras::find(id)?, params)
}

pub fn algebra_ids() -> Vec<&'static str> {
    algebras::REALIZATIONS.iter().map(|d| d.id).collect()
}

pub fn family_ids() -> Vec<&'static str> {
    families::FAMILIES.iter().map(|d| d.id).collect()
}

/// Family with its system validated on the documented sampling box.
pub fn family(id: &str, params: &Params) -> Result<InvariantFamily> {
    families::build(families::find(id)?, params, DEFAULT_MAX_DELAY, true)
}

/// As [`family`], with a custom bracket length for implicit delay relations.
pub fn family_with_max_delay(id: &str, params: &Params, max_delay: f64) -> Result<InvariantFamily> {
    families::build(families::find(id)?, params, max_delay, true)
}

pub fn invariant_family(id: &str, params: &Params) -> Result<DODSystem> {
    Ok(family(id, params)?.system)
}

/// Invariants of a family at default parameters.
pub fn elementary_invariants(id: &str) -> Result<Vec<Invariant>> {
    Ok(families::build(families::find(id)?, &Params::new(), DEFAULT_MAX_DELAY, false)?.invariants)
}

/// All families at default parameters.
pub fn default_families() -> Vec<InvariantFamily> {
    families::FAMILIES
        .iter()
        .map(|d| families::build(d, &Params::new(), DEFAULT_MAX_DELAY, false).expect("catalog defaults are valid"))
        .collect()
}

#[derive(Serialize)]
struct FamilyEntry<'a> {
    id: &'a str,
    algebra: &'a str,
    form: &'a str,
    delay_kind: &'static str,
    rhs: String,
    delay: String,
    params: &'a Params,
    parameter_ranges: &'a [(String, String)],
    invariants: Vec<(&'a str, String)>,
    domain: (f64, f64),
    sample_box: crate::system::SampleBox,
    constraints: &'a [String],
}

#[derive(Serialize)]
struct CatalogExport<'a> {
    schema: &'static str,
    algebras: &'a [AlgebraRealization],
    families: Vec<FamilyEntry<'a>>,
}

/// Catalog document for the given realizations and families.
pub fn export_json(algebras: &[AlgebraRealization], families: &[InvariantFamily]) -> serde_json::Value {
    use crate::system::DelayRelation;
    let entries = families
        .iter()
        .map(|f| {
            let (kind, delay) = match &f.system.delay {
                DelayRelation::Explicit { g } => ("explicit", format!("x_ = {g}")),
                DelayRelation::Implicit { residual, .. } => ("implicit", format!("{residual} = 0")),
            };
            FamilyEntry {
                id: &f.id,
                algebra: &f.algebra.id,
                form: &f.form,
                delay_kind: kind,
                rhs: f.system.f.to_string(),
                delay,
                params: &f.params,
                parameter_ranges: &f.parameter_ranges,
                invariants: f.invariants.iter().map(|i| (i.label.as_str(), i.expr.to_string())).collect(),
                domain: f.system.domain,
                sample_box: f.solution_domain,
                constraints: &f.constraints,
            }
        })
        .collect();
    serde_json::to_value(CatalogExport { schema: CATALOG_SCHEMA, algebras, families: entries })
        .expect("catalog serializes")
}
