//! Scale-localized averaging and vorticity-cascade diagnostics on gridded
//! fields.
//!
//! The crate builds smooth compactly supported cutoffs, covers a ball with
//! controlled overlap, forms windowed local averages over space-time, and
//! uses those pieces to probe energy flux across scales in vorticity data.

pub mod cascade;
pub mod covers;
pub mod cutoffs;
pub mod ensemble;
pub mod error;
pub mod fields;
pub mod numeric;

pub use cascade::{
    AssumptionReport, CascadeVerdict, CoherenceReport, FluxCurve, LocalityTable,
    VorticityDiagnostics,
};
pub use covers::{validate_cover, Cover, CoverValidityReport};
pub use ensemble::EnsembleConfig;
pub use error::{Error, Result};
pub use fields::{
    Grid, ScalarField, ScalarSeries, VectorField, VectorSeries,
};
