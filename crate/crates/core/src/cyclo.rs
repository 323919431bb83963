//! p-power cyclotomic overrings O[x]/Φ_{p^n}(x).
//!
//! The generator x is an exact p^n-th root of unity ζ_{p^n}; the element
//! x − 1 is a uniformizer with (x − 1)^{φ(p^n)} = p · unit, so the total
//! ramification over the base uniformizer p is φ(p^n). Base rings must be
//! unramified (e = 1); this covers every fixture the evaluation engine
//! needs (𝒲 unramified in the source setting).

use crate::error::Error;
use crate::padic::{PadicElem, Ring, Valuation};
use crate::Result;
use std::sync::Arc;

/// The ring O[x]/Φ_{p^n}(x) over an unramified base O, at the base's
/// absolute precision p^M.
#[derive(Debug)]
pub struct CycloExt {
    base: Ring,
    level: u32,
    /// φ(p^level) (1 when level = 0).
    phi: usize,
}

pub type CycloRing = Arc<CycloExt>;

impl PartialEq for CycloExt {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base && self.level == other.level
    }
}
impl Eq for CycloExt {}

impl CycloExt {
    pub fn new(base: &Ring, level: u32) -> Result<CycloRing> {
        if base.ramification() != 1 {
            return Err(Error::BadRing(
                "cyclotomic overrings require an unramified base".into(),
            ));
        }
        let p = base.p();
        let phi = if level == 0 {
            1
        } else {
            ((p - 1) * p.pow(level - 1)) as usize
        };
        Ok(Arc::new(CycloExt {
            base: base.clone(),
            level,
            phi,
        }))
    }

    pub fn base(&self) -> &Ring {
        &self.base
    }
    pub fn level(&self) -> u32 {
        self.level
    }
    pub fn phi(&self) -> usize {
        self.phi
    }
    pub fn p(&self) -> u64 {
        self.base.p()
    }
    pub fn precision(&self) -> u32 {
        self.base.precision()
    }
    /// p^level, the order of the root of unity x.
    pub fn root_order(&self) -> u64 {
        self.base.p().pow(self.level)
    }
    /// Maximum finite (x−1)-adic valuation: φ(p^n)·M (for level ≥ 1).
    pub fn max_valuation(&self) -> u32 {
        self.phi as u32 * self.base.precision()
    }

    /// Φ_{p^n}(x) = Σ_{j<p} x^{j p^{n-1}} as base coefficients (level ≥ 1),
    /// monic of degree φ.
    fn modulus(&self) -> Vec<PadicElem> {
        let p = self.p() as usize;
        let step = if self.level >= 1 {
            self.p().pow(self.level - 1) as usize
        } else {
            1
        };
        let mut m = vec![self.base.zero(); self.phi + 1];
        if self.level == 0 {
            // x - 1
            m[0] = self.base.from_i64(-1);
            m[1] = self.base.one();
        } else {
            for j in 0..p {
                m[j * step] = self.base.one();
            }
        }
        m
    }

    pub fn zero(self: &CycloRing) -> CycloElem {
        CycloElem {
            ring: self.clone(),
            c: vec![self.base.zero(); self.phi],
        }
    }
    pub fn one(self: &CycloRing) -> CycloElem {
        let mut z = self.zero();
        z.c[0] = self.base.one();
        z
    }
    pub fn from_base(self: &CycloRing, x: &PadicElem) -> CycloElem {
        assert!(x.ring() == &self.base, "base ring mismatch");
        let mut z = self.zero();
        z.c[0] = x.clone();
        z
    }
    pub fn from_u64(self: &CycloRing, v: u64) -> CycloElem {
        self.from_base(&self.base.from_u64(v))
    }
    pub fn from_i64(self: &CycloRing, v: i64) -> CycloElem {
        self.from_base(&self.base.from_i64(v))
    }

    /// ζ_{p^n}^j, reduced mod Φ.
    pub fn zeta_pow(self: &CycloRing, j: i64) -> CycloElem {
        let order = self.root_order() as i64;
        let j = j.rem_euclid(order) as usize;
        let mut poly = vec![self.base.zero(); j + 1];
        poly[j] = self.base.one();
        self.reduce(poly)
    }

    /// Reduce a polynomial in x to canonical degree < φ form: first take
    /// exponents mod p^n (x has exact order p^n), then divide by Φ.
    fn reduce(self: &CycloRing, poly: Vec<PadicElem>) -> CycloElem {
        let order = self.root_order() as usize;
        let mut folded = vec![self.base.zero(); order.min(poly.len()).max(self.phi)];
        if poly.len() > order {
            let mut f = vec![self.base.zero(); order];
            for (i, c) in poly.into_iter().enumerate() {
                f[i % order] = f[i % order].add(&c);
            }
            folded = f;
        } else {
            for (i, c) in poly.into_iter().enumerate() {
                folded[i] = c;
            }
        }
        // Long division by the monic modulus.
        let modulus = self.modulus();
        while folded.len() > self.phi {
            let k = folded.len() - 1;
            let lead = folded[k].clone();
            if !lead.is_zero() {
                for (i, mc) in modulus.iter().enumerate() {
                    folded[k - self.phi + i] = folded[k - self.phi + i].sub(&mc.mul(&lead));
                }
            }
            folded.pop();
        }
        folded.resize(self.phi, self.base.zero());
        CycloElem {
            ring: self.clone(),
            c: folded,
        }
    }

    /// Embed an element of a lower-level cyclotomic ring over the same base:
    /// x_a ↦ x_b^{p^{b−a}}.
    pub fn embed(self: &CycloRing, x: &CycloElem) -> Result<CycloElem> {
        let src = &x.ring;
        if src.base != self.base || src.level > self.level {
            return Err(Error::RingMismatch);
        }
        let step = self.base.p().pow(self.level - src.level) as usize;
        let mut poly = vec![self.base.zero(); (src.phi - 1) * step + 1];
        for (i, c) in x.c.iter().enumerate() {
            poly[i * step] = c.clone();
        }
        Ok(self.reduce(poly))
    }

    /// The same ring over the base at lower precision.
    pub fn with_precision(self: &CycloRing, m: u32) -> Result<CycloRing> {
        CycloExt::new(&self.base.with_precision(m)?, self.level)
    }
}

/// Element of a [`CycloExt`]: canonical vector of φ base coefficients.
#[derive(Clone)]
pub struct CycloElem {
    ring: CycloRing,
    c: Vec<PadicElem>,
}

impl PartialEq for CycloElem {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring && self.c == other.c
    }
}
impl Eq for CycloElem {}

impl std::fmt::Debug for CycloElem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Cyclo[lvl {}]{:?}", self.ring.level, self.c)
    }
}

impl CycloElem {
    pub fn ring(&self) -> &CycloRing {
        &self.ring
    }
    pub fn coeffs(&self) -> &[PadicElem] {
        &self.c
    }
    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    fn assert_ring(&self, other: &CycloElem) {
        assert!(self.ring == other.ring, "cyclotomic ring mismatch");
    }

    pub fn add(&self, other: &CycloElem) -> CycloElem {
        self.assert_ring(other);
        CycloElem {
            ring: self.ring.clone(),
            c: self.c.iter().zip(&other.c).map(|(a, b)| a.add(b)).collect(),
        }
    }
    pub fn sub(&self, other: &CycloElem) -> CycloElem {
        self.assert_ring(other);
        CycloElem {
            ring: self.ring.clone(),
            c: self.c.iter().zip(&other.c).map(|(a, b)| a.sub(b)).collect(),
        }
    }
    pub fn neg(&self) -> CycloElem {
        CycloElem {
            ring: self.ring.clone(),
            c: self.c.iter().map(|a| a.neg()).collect(),
        }
    }
    pub fn mul(&self, other: &CycloElem) -> CycloElem {
        self.assert_ring(other);
        let phi = self.ring.phi;
        let mut prod = vec![self.ring.base.zero(); 2 * phi - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.c.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                prod[i + j] = prod[i + j].add(&a.mul(b));
            }
        }
        self.ring.reduce(prod)
    }
    pub fn scalar_mul(&self, k: u64) -> CycloElem {
        CycloElem {
            ring: self.ring.clone(),
            c: self.c.iter().map(|a| a.scalar_mul(k)).collect(),
        }
    }
    pub fn base_mul(&self, k: &PadicElem) -> CycloElem {
        CycloElem {
            ring: self.ring.clone(),
            c: self.c.iter().map(|a| a.mul(k)).collect(),
        }
    }
    pub fn pow(&self, mut e: u64) -> CycloElem {
        let mut acc = self.ring.one();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// True iff the element lies in the base ring (all non-constant
    /// coordinates vanish).
    pub fn is_base(&self) -> bool {
        self.c.iter().skip(1).all(|x| x.is_zero())
    }
    pub fn to_base(&self) -> Result<PadicElem> {
        if !self.is_base() {
            return Err(Error::PrecisionExhausted(
                "element does not descend to the base ring".into(),
            ));
        }
        Ok(self.c[0].clone())
    }

    /// Multiplicative inverse of a unit: residue inversion by extended
    /// Euclid over the residue field, then Newton lifting.
    pub fn inv(&self) -> Result<CycloElem> {
        let ring = &self.ring;
        if ring.level == 0 {
            return Ok(ring.from_base(&self.c[0].inv()?));
        }
        // Inverse mod (p, Φ): extended Euclid over the base residue field.
        let inv0 = self.inverse_mod_p()?;
        let mut z = inv0;
        let two = ring.from_u64(2);
        let mut prec = 1u32;
        while prec < ring.precision() {
            z = z.mul(&two.sub(&self.mul(&z)));
            prec *= 2;
        }
        if self.mul(&z) != ring.one() {
            return Err(Error::NotUnit);
        }
        Ok(z)
    }

    fn inverse_mod_p(&self) -> Result<CycloElem> {
        let ring = &self.ring;
        // Extended Euclid for self against Φ over the residue field of the
        // (unramified) base; base-element inversion provides coefficient
        // division.
        type Poly = Vec<PadicElem>;
        let base = &ring.base;
        let trim = |mut v: Poly| -> Poly {
            while v.len() > 1 && v.last().unwrap().residue().iter().all(|&x| x == 0) {
                v.pop();
            }
            v
        };
        let res_zero = |v: &Poly| -> bool {
            v.iter().all(|c| c.residue().iter().all(|&x| x == 0))
        };
        let mut r0: Poly = trim(ring.modulus());
        let mut r1: Poly = trim(self.c.clone());
        let mut s0: Poly = vec![base.zero()];
        let mut s1: Poly = vec![base.one()];
        while !res_zero(&r1) {
            let lead = r1.last().unwrap();
            let lead_inv = lead.inv().map_err(|_| Error::NotUnit)?;
            let mut rem = r0.clone();
            let mut q: Poly = vec![base.zero(); r0.len().saturating_sub(r1.len()) + 1];
            for shift in (0..q.len()).rev() {
                if shift + r1.len() - 1 >= rem.len() {
                    continue;
                }
                let coef = rem[shift + r1.len() - 1].mul(&lead_inv);
                if coef.residue().iter().all(|&x| x == 0) {
                    continue;
                }
                q[shift] = coef.clone();
                for (i, dc) in r1.iter().enumerate() {
                    rem[shift + i] = rem[shift + i].sub(&dc.mul(&coef));
                }
            }
            // Reduce everything mod p to keep residues canonical.
            let modp = |v: Poly| -> Poly {
                v.into_iter()
                    .map(|c| base.from_coeffs(&c.residue()))
                    .collect()
            };
            let rem = trim(modp(rem));
            let mut s2 = s0.clone();
            s2.resize(s2.len().max(q.len() + s1.len() - 1), base.zero());
            for (i, qc) in q.iter().enumerate() {
                for (j, sc) in s1.iter().enumerate() {
                    s2[i + j] = s2[i + j].sub(&qc.mul(sc));
                }
            }
            r0 = r1;
            r1 = rem;
            s0 = s1;
            s1 = trim(modp(s2));
        }
        if r0.len() != 1 {
            return Err(Error::NotUnit);
        }
        let c = r0[0].inv().map_err(|_| Error::NotUnit)?;
        let mut poly = vec![base.zero(); ring.phi];
        for (i, sc) in s0.iter().enumerate() {
            if i < ring.phi {
                poly[i] = sc.mul(&c);
            }
        }
        Ok(CycloElem {
            ring: ring.clone(),
            c: poly,
        })
    }

    /// (x−1)-adic valuation (level ≥ 1; falls back to eM-scaled base
    /// valuation at level 0).
    pub fn valuation(&self) -> Valuation {
        let ring = &self.ring;
        if ring.level == 0 {
            return self.c[0].valuation();
        }
        if self.is_zero() {
            return Valuation::Saturated;
        }
        let w = ring.zeta_pow(1).sub(&ring.one());
        let max = ring.max_valuation();
        let mut x = self.clone();
        let mut count = 0u32;
        while !x.is_zero() {
            x = x.mul(&w);
            count += 1;
            if count > max {
                return Valuation::Finite(0);
            }
        }
        Valuation::Finite(max - count)
    }

    /// Exact division by p^k, landing over the base at precision M − k.
    pub fn try_div_by_p(&self, k: u32) -> Result<CycloElem> {
        let target = self.ring.with_precision(self.ring.precision().checked_sub(k).filter(|&m| m >= 1).ok_or_else(|| {
            Error::PrecisionExhausted(format!(
                "cannot divide by p^{k} at precision {}",
                self.ring.precision()
            ))
        })?)?;
        let mut c = Vec::with_capacity(self.c.len());
        for a in &self.c {
            c.push(target.base().from_coeffs(a.try_div_by_p(k)?.coeffs()));
        }
        Ok(CycloElem { ring: target, c })
    }

    /// Reduce to the same ring at lower precision.
    pub fn reduce_precision(&self, m: u32) -> Result<CycloElem> {
        let target = self.ring.with_precision(m)?;
        let c = self
            .c
            .iter()
            .map(|a| -> Result<PadicElem> { a.reduce_precision(m) })
            .collect::<Result<Vec<_>>>()?;
        Ok(CycloElem { ring: target, c })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PadicRing;

    #[test]
    fn root_of_unity_order() {
        let zp = PadicRing::zp(5, 3).unwrap();
        let c = CycloExt::new(&zp, 2).unwrap();
        let z = c.zeta_pow(1);
        assert_eq!(z.pow(25), c.one());
        assert!(z.pow(5) != c.one());
        // reduction rule on Φ_p: Σ_{k<p} x^k = 0 at level 1
        let c1 = CycloExt::new(&zp, 1).unwrap();
        let mut s = c1.zero();
        for k in 0..5 {
            s = s.add(&c1.zeta_pow(k));
        }
        assert!(s.is_zero());
    }

    #[test]
    fn geometric_sum_killed_by_x_minus_1() {
        for n in 1..=2u32 {
            let zp = PadicRing::zp(3, 4).unwrap();
            let c = CycloExt::new(&zp, n).unwrap();
            let mut s = c.zero();
            for k in 0..3i64.pow(n) {
                s = s.add(&c.zeta_pow(k));
            }
            let w = c.zeta_pow(1).sub(&c.one());
            assert!(w.mul(&s).is_zero());
        }
    }

    #[test]
    fn x_minus_1_valuation() {
        // v(x−1) = 1 in (x−1)-units; v(p) = φ(p^n)
        let zp = PadicRing::zp(3, 3).unwrap();
        let c = CycloExt::new(&zp, 2).unwrap();
        let w = c.zeta_pow(1).sub(&c.one());
        assert_eq!(w.valuation(), Valuation::Finite(1));
        assert_eq!(c.from_u64(3).valuation(), Valuation::Finite(6));
        assert_eq!(c.one().valuation(), Valuation::Finite(0));
        assert!(c.zero().valuation().is_saturated());
    }

    #[test]
    fn inverse_in_cyclotomic_ring() {
        let zp = PadicRing::zp(5, 3).unwrap();
        let c = CycloExt::new(&zp, 1).unwrap();
        let z = c.zeta_pow(1);
        let a = z.add(&c.from_u64(2)); // unit: 2 + ζ has nonzero norm mod 5
        let ai = a.inv().unwrap();
        assert_eq!(a.mul(&ai), c.one());
        // ζ itself: inverse is ζ^{p-1}... ζ^{p^n - 1}
        assert_eq!(z.inv().unwrap(), c.zeta_pow(-1));
    }

    #[test]
    fn embed_levels() {
        let zp = PadicRing::zp(3, 3).unwrap();
        let c1 = CycloExt::new(&zp, 1).unwrap();
        let c2 = CycloExt::new(&zp, 2).unwrap();
        let z1 = c1.zeta_pow(1);
        let e = c2.embed(&z1).unwrap();
        assert_eq!(e, c2.zeta_pow(3));
        assert_eq!(e.pow(3), c2.one());
    }

    #[test]
    fn level_zero_is_base() {
        let zp = PadicRing::zp(7, 2).unwrap();
        let c0 = CycloExt::new(&zp, 0).unwrap();
        assert_eq!(c0.root_order(), 1);
        let x = c0.from_u64(12);
        assert_eq!(x.mul(&x), c0.from_u64(144));
        assert!(x.is_base());
    }
}
