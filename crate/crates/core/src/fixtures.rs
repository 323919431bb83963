//! JSON fixture schemas: ring descriptors, q-expansion form files, model
//! fixture specifications, and Frobenius-exponent requests. Every schema
//! carries a `schema_version` field; loaders re-validate all type
//! invariants before any computation touches the data, reporting
//! field-level diagnostics via `SchemaError` / `InvariantViolation`.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;
use crate::model::FormFamily;
use crate::padic::{PadicRing, Ring};
use crate::qexp::QExpansion;
use crate::mahler::Measure;
use crate::synth::{cyclic_fixture, ModelFixture};

/// Current schema version accepted by all loaders.
pub const SCHEMA_VERSION: u32 = 1;

fn check_version(field: &str, v: u32) -> Result<()> {
    if v != SCHEMA_VERSION {
        return Err(Error::SchemaError(format!(
            "{field}: unsupported schema_version {v} (expected {SCHEMA_VERSION})"
        )));
    }
    Ok(())
}

/// Serialized description of a truncated p-adic ring O = Z_p[x]/(g) mod
/// p^M. An empty `poly` denotes the base ring Z_p itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingDescriptor {
    pub p: u64,
    pub precision: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub poly: Vec<u64>,
    #[serde(default = "one_u32")]
    pub ramification: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub uniformizer: Vec<u64>,
}

fn one_u32() -> u32 {
    1
}

impl RingDescriptor {
    pub fn from_ring(ring: &Ring) -> RingDescriptor {
        let poly = if ring.degree() == 1 {
            Vec::new()
        } else {
            ring.defining_poly().to_vec()
        };
        let uniformizer = if ring.ramification() == 1 {
            Vec::new()
        } else {
            ring.uniformizer_coeffs().to_vec()
        };
        RingDescriptor {
            p: ring.p(),
            precision: ring.precision(),
            poly,
            ramification: ring.ramification(),
            uniformizer,
        }
    }

    pub fn to_ring(&self) -> Result<Ring> {
        if self.poly.is_empty() {
            if self.ramification != 1 {
                return Err(Error::SchemaError(
                    "ring: ramification > 1 requires a defining poly".into(),
                ));
            }
            return PadicRing::zp(self.p, self.precision);
        }
        PadicRing::new(
            self.p,
            self.precision,
            self.poly.clone(),
            self.ramification,
            self.uniformizer.clone(),
        )
    }
}

/// A stored q-expansion: coefficients a_0..a_bound in ring coordinates.
/// The redundant top-level `p`/`precision` must agree with the ring
/// descriptor; a mismatch is an `InvariantViolation`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormFile {
    pub schema_version: u32,
    pub p: u64,
    pub precision: u32,
    pub ring: RingDescriptor,
    pub level: u64,
    pub weight: u32,
    pub eigenform: bool,
    pub bound: usize,
    pub coefficients: Vec<Vec<u64>>,
}

impl FormFile {
    pub fn from_qexp(f: &QExpansion) -> FormFile {
        FormFile {
            schema_version: SCHEMA_VERSION,
            p: f.ring().p(),
            precision: f.ring().precision(),
            ring: RingDescriptor::from_ring(f.ring()),
            level: f.level,
            weight: f.weight,
            eigenform: f.eigenform,
            bound: f.bound,
            coefficients: f.coeffs().iter().map(|c| c.coeffs().to_vec()).collect(),
        }
    }

    /// Adapter for LMFDB-style integer coefficient lists a_1, a_2, ….
    pub fn from_lmfdb(
        ring: &Ring,
        weight: u32,
        level: u64,
        a: &[i64],
        eigenform: bool,
    ) -> Result<FormFile> {
        let f = QExpansion::from_integer_coeffs(ring, weight, level, a, eigenform)?;
        Ok(FormFile::from_qexp(&f))
    }

    pub fn to_qexp(&self) -> Result<QExpansion> {
        check_version("form", self.schema_version)?;
        if self.p != self.ring.p || self.precision != self.ring.precision {
            return Err(Error::InvariantViolation(format!(
                "form: top-level (p, precision) = ({}, {}) disagrees with ring descriptor ({}, {})",
                self.p, self.precision, self.ring.p, self.ring.precision
            )));
        }
        if self.coefficients.len() != self.bound + 1 {
            return Err(Error::SchemaError(format!(
                "form: {} coefficient rows but bound = {}",
                self.coefficients.len(),
                self.bound
            )));
        }
        let ring = self.ring.to_ring()?;
        let coeffs = self
            .coefficients
            .iter()
            .map(|c| ring.from_coeffs(c))
            .collect::<Vec<_>>();
        QExpansion::new(&ring, self.weight, self.level, coeffs, self.eigenform)
    }
}

/// Specification of a deterministic cyclic model fixture: a coherent
/// (context, family, characters) triple generated from a seed. An
/// optional `dirac` entry replaces every class expansion by δ_u; an
/// optional `family_ring` must match the context ring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema_version: u32,
    pub ring: RingDescriptor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family_ring: Option<RingDescriptor>,
    pub class_count: u64,
    pub shift: u64,
    pub depth: u32,
    pub r: u32,
    pub window: usize,
    pub divides_level: bool,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dirac: Option<i64>,
}

impl ModelFile {
    pub fn build(&self) -> Result<ModelFixture> {
        check_version("model", self.schema_version)?;
        if let Some(fr) = &self.family_ring {
            if fr != &self.ring {
                return Err(Error::InvariantViolation(
                    "model: family and context ring descriptors disagree".into(),
                ));
            }
        }
        let ring = self.ring.to_ring()?;
        let mut fx = cyclic_fixture(
            &ring,
            self.class_count,
            self.shift,
            self.depth,
            self.r,
            self.window,
            self.divides_level,
            self.seed,
        )?;
        if let Some(u) = self.dirac {
            let measures = (0..self.class_count)
                .map(|_| Measure::dirac(&ring, u, self.window))
                .collect();
            fx.family = FormFamily::new(self.r, fx.family.level_tag, measures)?;
        }
        Ok(fx)
    }
}

/// A Frobenius-exponent request: the discriminant tower level Δ_n is
/// redundant and, when supplied, must equal −D_K p^{2n}.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrobRequest {
    pub schema_version: u32,
    pub d_k: u64,
    pub p: u64,
    pub ell: u64,
    pub n: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_n: Option<i64>,
}

impl FrobRequest {
    pub fn validate(&self) -> Result<()> {
        check_version("frobenius", self.schema_version)?;
        if let Some(d) = self.delta_n {
            let expected = -(self.d_k as i64) * (self.p as i64).pow(2 * self.n);
            if d != expected {
                return Err(Error::SchemaError(format!(
                    "frobenius: delta_n = {d} inconsistent with (D_K, p, n) = ({}, {}, {}); expected {expected}",
                    self.d_k, self.p, self.n
                )));
            }
        }
        Ok(())
    }
}

/// Parse a JSON fixture from disk.
pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::SchemaError(format!("{}: {e}", path.display())))
}

/// Serialize a fixture with stable (declaration-order) keys.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}
