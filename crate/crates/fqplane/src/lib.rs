//! Distance configurations over the plane GF(q)².
//!
//! The distance between x, y ∈ GF(q)² is the field value
//! ‖x − y‖ = (x₁ − y₁)² + (x₂ − y₂)². It is not a metric, but it is invariant
//! under the orthogonal group O₂(GF(q)) and additive translations, which is
//! enough to set up a useful rigidity theory: spheres partition the plane,
//! point sets have distance-configuration counts ν_G(t) for small graphs G,
//! and the counts interpolate through incidence sums Ψ(a,b) driven by the
//! tables λ_θ(w) = |{(u,v) ∈ E²: u − θv = w}|.
//!
//! The crate provides, in layers:
//!
//! * [`field`]: exact arithmetic in GF(p^n) for odd p, q ≤ 2³¹, with elements
//!   as canonical integer codes;
//! * [`geometry`]: the plane, its sphere partition, and the enumerated
//!   orthogonal group, for fields where −1 is a non-square (q ≡ 3 mod 4);
//! * [`spectral`]: the dense discrete Fourier transform on GF(q)² with the
//!   canonical additive character, plus sphere-restricted norm identities;
//! * [`configs`]: exact counting kernels: ν_G tables, support sets Δ_G,
//!   λ/α incidence tables, the interpolation sums Ψ(a,b), a cut-vertex
//!   factorization for the bow-tie, and the moment bound used to control
//!   near-constant weight tables;
//! * [`experiments`]: seeded, reproducible samplers, sweep drivers with CSV
//!   output, and an invariant battery (`verify_suite`);
//! * [`cli`]: the `fqplane` command-line front end.
//!
//! Counting is exact (checked u64/u128); Fourier work is `Complex<f64>` with
//! pairwise-tree summation so results are bit-stable across platforms and
//! thread counts.

pub mod cli;
pub mod configs;
pub mod error;
pub mod experiments;
pub mod field;
pub mod geometry;
pub mod spectral;

pub use error::{Error, Result};
pub use field::{Field, Scalar};
pub use geometry::{OrthMatrix, Plane, Point};
