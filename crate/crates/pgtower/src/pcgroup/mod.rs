//! Finite p-groups given by consistent power-commutator presentations.

pub mod abelian;
pub mod fingerprint;
pub mod iso;
pub mod presentation;
pub mod series;
pub mod standard;
pub mod subgroup;

pub use fingerprint::{fingerprint, invariants, invariants_with_pattern, Fingerprint, Invariants};
pub use abelian::{abelian_invariants, AbelianType, Abelianization, TypeMultiset};
pub use presentation::{Definition, Element, PcPresentation, Word, DEFAULT_GUARD};
pub use series::{
    center, derived_series, derived_subgroup, layer, lower_central_series, p_central_series, series, SeriesData,
};
pub use standard::{ensure_standard, standardize};
pub use subgroup::{quotient, Factor, Subgroup};
