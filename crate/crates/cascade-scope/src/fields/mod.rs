//! Gridded scalar and vector fields with generators, calculus, and I/O.

pub mod calculus;
pub mod field;
pub mod generators;
pub mod grid;
pub mod io;
pub mod series;
pub mod spectral;

pub use calculus::{
    curl, derivative_axis, divergence, gradient, gradient_norm, jacobian, laplacian,
    laplacian_vector, Scheme,
};
pub use field::{HasGrid, ScalarField, VectorField};
pub use generators::{sample_analytic, FlowPart, Generator, Sampled};
pub use grid::{Grid, MAX_DIM};
pub use io::{read_field, write_scalar, write_vector, FieldFileHeader, LoadedField, StoredField};
pub use series::{FieldSeries, ScalarSeries, VectorSeries};
pub use spectral::velocity_from_vorticity;
