//! Flow representation, vector-field extraction, formal series and verification
//! of the translation equation, boundary condition and PDE system.

pub mod catalog;
pub mod flow;
pub mod series;
pub mod verify;

pub use catalog::{catalog, catalog_list, rational_catalog, Catalog, CatalogEntry, QuadMember};
pub use flow::{coords_for, FlowMap, VectorField};
pub use series::PSeries;
pub use verify::{
    level0_detect, series_flow, shift_rational, time_shift, time_shift_series, vector_field, verify_boundary,
    verify_pde, verify_pde_with, verify_translation, Discrepancy, SeriesFlow, ShiftEvaluator, VerificationReport,
    VerifyMode,
};
