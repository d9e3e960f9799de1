//! Lower bounds for the first non-trivial Neumann eigenvalue of the planar
//! p-Laplacian on quasiconformal images of the unit disc, together with a
//! piecewise-linear finite-element eigensolver used to check them.
//!
//! The crate is organised bottom-up:
//!
//! * [`maps`]: the catalog of quasiconformal maps of the disc,
//! * [`discquad`]: polar quadrature on the disc (Jacobian norms, areas),
//! * [`bounds`]: the spectral bounds for β-regular and ∞-regular domains,
//! * [`logvalue`] and [`quasidisc`]: the quasidisc constants in log space,
//! * [`mesh`] and [`eigsolver`]: the numerical eigenvalue oracle,
//! * [`verify`]: composition of a bound with the oracle,
//! * [`plot`]: SVG output.

pub mod bounds;
pub mod discquad;
pub mod eigsolver;
mod error;
pub mod logvalue;
pub mod maps;
pub mod mesh;
pub mod optim;
pub mod plot;
pub mod quasidisc;
pub mod verify;

pub use error::{Error, Result};
pub use logvalue::LogValue;
pub use maps::{MapDescriptor, MapKind, ShearProfile};
