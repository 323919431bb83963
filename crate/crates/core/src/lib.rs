//! Exact truncated p-adic arithmetic for anticyclotomic Iwasawa theory.
//!
//! The crate provides the machinery needed to verify, at finite precision,
//! the operator identities relating anticyclotomic p-adic L-values of
//! congruent modular forms:
//!
//! - [`padic`]: truncated arithmetic in Z_p and finite extensions O, with
//!   Hensel square roots, p-adic binomial coefficients and the Legendre lift;
//! - [`cyclo`]: p-power cyclotomic overrings O[x]/Φ_{p^n}(x);
//! - [`iwasawa`]: the Iwasawa algebra Λ = O[[T]] under γ₀ ↦ 1+T, with
//!   μ/λ-invariants, Weierstrass preparation and Euler factors;
//! - [`mahler`]: the measure ↔ power-series dictionary on Z_p (moments,
//!   θ = t d/dt and its negative powers, p-depletion, character twists,
//!   evaluation at roots of unity, Gauss sums);
//! - [`qexp`]: q-expansion streams with V_ℓ, ℓ-stabilization and
//!   ϖ^m-congruence checking;
//! - [`classgroup`]: binary quadratic forms, Gauss composition, class-group
//!   enumeration and Frobenius exponents via p-Sylow discrete logs;
//! - [`model`]: the mock CM evaluation engine computing finite-sum L-values
//!   and the verification routines for the factorization and congruence
//!   identities;
//! - [`fixtures`]: JSON fixture schemas and validation;
//! - [`synth`]: seeded synthetic fixture generators used by the test suites
//!   and the CLI.

pub mod classgroup;
pub mod cyclo;
pub mod error;
pub mod fixtures;
pub mod iwasawa;
pub mod mahler;
pub mod model;
pub mod padic;
pub mod qexp;
pub mod series;
pub mod synth;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
