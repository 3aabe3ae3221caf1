//! Desk-scale computations for the circle-method analysis of discrete
//! k-spherical averages over the diagonal form `|x_1|^k + ... + |x_d|^k`.
//!
//! The crate is organised by the object being computed:
//!
//! * [`exponents`]: closed-form dimension thresholds and decay exponents,
//!   evaluated in exact rationals.
//! * [`lattice`]: representation counts `R(λ)`, solution enumeration and the
//!   discrete averaging / maximal operators.
//! * [`expsum`]: Weyl sums, complete Gauss sums and the exact mean-value
//!   identities behind the minor-arc reduction.
//! * [`arcs`]: the Farey dissection into major and minor arcs.
//! * [`oscillatory`]: `v_N`, `J_λ` and the Fourier transform of the
//!   continuous surface measure.
//! * [`multiplier`]: the exact multiplier `Â_λ`, its main-term approximation,
//!   the error field and the singular series.
//! * [`harness`]: the experiment CLI (config echo, cache files, CSV/JSON).

// `!(x >= lo)` is used on purpose so that NaN is rejected with the rest.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arcs;
pub mod error;
pub mod exponents;
pub mod expsum;
pub mod harness;
pub mod lattice;
pub mod multiplier;
pub mod oscillatory;
pub mod params;
pub mod phase;
pub mod stats;

pub use error::{Error, Result};
pub use params::FormParams;

/// Library version string embedded in every output file.
pub const VERSION: &str = concat!("circle-lab ", env!("CARGO_PKG_VERSION"));
