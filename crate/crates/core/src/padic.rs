//! Truncated exact arithmetic in Z_p and finite extensions O = Z_p[x]/(g).
//!
//! Elements are known modulo p^M where M is the absolute precision of the
//! ring; every element is stored in canonical form with coefficients in
//! [0, p^M). Valuations are ϖ-adic (v_ϖ(p) = e), and "infinite" valuation
//! means saturated: ≥ eM, i.e. the element vanishes at the working
//! precision.

use crate::error::Error;
use crate::Result;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// ϖ-adic valuation of a truncated element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Valuation {
    Finite(u32),
    /// The element vanishes mod p^M; its valuation is ≥ eM.
    Saturated,
}

impl Valuation {
    pub fn finite(&self) -> Option<u32> {
        match self {
            Valuation::Finite(v) => Some(*v),
            Valuation::Saturated => None,
        }
    }
    pub fn is_saturated(&self) -> bool {
        matches!(self, Valuation::Saturated)
    }
}

/// A truncated local ring O = Z_p[x]/(g), elements known mod p^M.
///
/// `g` is monic of degree d ≥ 1 (d = 1 means Z_p itself), `e` is the
/// ramification index and `uniformizer` a designated element of ϖ-adic
/// valuation 1. All coefficient arithmetic is done in u64 with u128
/// intermediates, which bounds p^M < 2^62.
#[derive(Debug)]
pub struct PadicRing {
    p: u64,
    m: u32,
    pm: u64,
    /// Monic defining polynomial, length d+1, coefficients mod p^M.
    g: Vec<u64>,
    d: usize,
    e: u32,
    uniformizer: Vec<u64>,
}

pub type Ring = Arc<PadicRing>;

impl PartialEq for PadicRing {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p
            && self.m == other.m
            && self.g == other.g
            && self.e == other.e
            && self.uniformizer == other.uniformizer
    }
}
impl Eq for PadicRing {}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut i = 2u64;
    while i * i <= n {
        if n % i == 0 {
            return false;
        }
        i += 1;
    }
    true
}

pub(crate) fn pow_u64(base: u64, exp: u32, modulus: u64) -> u64 {
    let mut acc: u128 = 1;
    let mut b: u128 = (base % modulus) as u128;
    let mut e = exp;
    let m = modulus as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc as u64
}

/// p-adic valuation of a plain integer, capped at `cap`.
pub fn vp_u64(mut n: u64, p: u64, cap: u32) -> Valuation {
    if n == 0 {
        return Valuation::Saturated;
    }
    let mut v = 0;
    while n % p == 0 && v < cap {
        n /= p;
        v += 1;
    }
    if v >= cap && n % p == 0 {
        Valuation::Saturated
    } else {
        Valuation::Finite(v)
    }
}

/// v_p(n!) = Σ floor(n/p^i).
pub fn vp_factorial(n: u64, p: u64) -> u32 {
    let mut v = 0u64;
    let mut q = n / p;
    while q > 0 {
        v += q;
        q /= p;
    }
    v as u32
}

impl PadicRing {
    /// The base ring Z_p at absolute precision p^M.
    pub fn zp(p: u64, m: u32) -> Result<Ring> {
        Self::new(p, m, vec![0, 1], 1, vec![p])
    }

    /// A finite extension Z_p[x]/(g) with designated uniformizer.
    ///
    /// `g` must be monic of degree d with e | d; the uniformizer must have
    /// ϖ-adic valuation exactly 1 (checked).
    pub fn new(p: u64, m: u32, g: Vec<u64>, e: u32, uniformizer: Vec<u64>) -> Result<Ring> {
        if !is_prime(p) || p == 2 {
            return Err(Error::BadRing(format!("p = {p} must be an odd prime")));
        }
        if m < 1 {
            return Err(Error::BadRing("M must be ≥ 1".into()));
        }
        let pm = {
            let mut acc: u128 = 1;
            for _ in 0..m {
                acc *= p as u128;
                if acc >= 1u128 << 62 {
                    return Err(Error::BadRing(format!("p^M = {p}^{m} exceeds 2^62")));
                }
            }
            acc as u64
        };
        let d = g.len().checked_sub(1).filter(|d| *d >= 1).ok_or_else(|| {
            Error::BadRing("defining polynomial must have degree ≥ 1".into())
        })?;
        if g[d] != 1 {
            return Err(Error::BadRing("defining polynomial must be monic".into()));
        }
        if e == 0 || d % (e as usize) != 0 {
            return Err(Error::BadRing("e must divide d".into()));
        }
        let mut g = g;
        for c in g.iter_mut() {
            *c %= pm;
        }
        let mut unif = uniformizer;
        unif.resize(d, 0);
        for c in unif.iter_mut() {
            *c %= pm;
        }
        let ring = Arc::new(PadicRing {
            p,
            m,
            pm,
            g,
            d,
            e,
            uniformizer: unif,
        });
        // v_ϖ(ϖ) = 1: ϖ^e ∈ pR with ϖ^e/p a unit. Checkable only for M ≥ 2
        // (at M = 1 the canonical ϖ = p of Z_p is itself ≡ 0).
        if m >= 2 {
            let we = ring.uniformizer().pow(ring.e as u64);
            let u = we
                .try_div_by_p(1)
                .map_err(|_| Error::BadRing("ϖ^e is not divisible by p".into()))?;
            if u.inv().is_err() {
                return Err(Error::BadRing("ϖ^e / p is not a unit".into()));
            }
        }
        Ok(ring)
    }

    /// The same ring descriptor at lower absolute precision.
    pub fn with_precision(self: &Ring, m: u32) -> Result<Ring> {
        PadicRing::new(self.p, m, self.g.clone(), self.e, self.uniformizer.clone())
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn precision(&self) -> u32 {
        self.m
    }
    pub fn modulus(&self) -> u64 {
        self.pm
    }
    pub fn degree(&self) -> usize {
        self.d
    }
    pub fn ramification(&self) -> u32 {
        self.e
    }
    pub fn defining_poly(&self) -> &[u64] {
        &self.g
    }
    pub fn uniformizer_coeffs(&self) -> &[u64] {
        &self.uniformizer
    }
    /// Maximum finite ϖ-adic valuation: eM.
    pub fn max_valuation(&self) -> u32 {
        self.e * self.m
    }

    pub fn zero(self: &Ring) -> PadicElem {
        PadicElem {
            ring: self.clone(),
            c: vec![0; self.d],
        }
    }
    pub fn one(self: &Ring) -> PadicElem {
        self.from_u64(1)
    }
    pub fn from_u64(self: &Ring, v: u64) -> PadicElem {
        let mut c = vec![0; self.d];
        c[0] = v % self.pm;
        PadicElem {
            ring: self.clone(),
            c,
        }
    }
    pub fn from_i64(self: &Ring, v: i64) -> PadicElem {
        if v >= 0 {
            self.from_u64(v as u64)
        } else {
            self.from_u64(self.pm - ((v.unsigned_abs()) % self.pm) % self.pm)
        }
    }
    pub fn from_coeffs(self: &Ring, coeffs: &[u64]) -> PadicElem {
        let mut c: Vec<u64> = coeffs.iter().map(|x| x % self.pm).collect();
        c.resize(self.d, 0);
        PadicElem {
            ring: self.clone(),
            c,
        }
    }
    pub fn uniformizer(self: &Ring) -> PadicElem {
        PadicElem {
            ring: self.clone(),
            c: self.uniformizer.clone(),
        }
    }

    pub fn random<R: rand::Rng>(self: &Ring, rng: &mut R) -> PadicElem {
        let c = (0..self.d).map(|_| rng.gen_range(0..self.pm)).collect();
        PadicElem {
            ring: self.clone(),
            c,
        }
    }

    /// A random unit (nonzero residue).
    pub fn random_unit<R: rand::Rng>(self: &Ring, rng: &mut R) -> PadicElem {
        loop {
            let x = self.random(rng);
            if x.inv().is_ok() {
                return x;
            }
        }
    }

    fn add_c(&self, a: u64, b: u64) -> u64 {
        let s = a as u128 + b as u128;
        (s % self.pm as u128) as u64
    }
    fn sub_c(&self, a: u64, b: u64) -> u64 {
        (a + self.pm - b % self.pm) % self.pm
    }
    fn mul_c(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.pm as u128) as u64
    }

    /// Reduce a polynomial (any length) modulo the monic defining poly g.
    fn reduce_poly(&self, mut poly: Vec<u64>) -> Vec<u64> {
        while poly.len() > self.d {
            let k = poly.len() - 1;
            let lead = poly[k];
            if lead != 0 {
                // poly -= lead * x^{k-d} * g
                for i in 0..=self.d {
                    let t = self.mul_c(lead, self.g[i]);
                    poly[k - self.d + i] = self.sub_c(poly[k - self.d + i], t);
                }
            }
            poly.pop();
        }
        poly.resize(self.d, 0);
        poly
    }
}

/// An element of a [`PadicRing`], canonical coefficient vector of length d.
#[derive(Clone)]
pub struct PadicElem {
    ring: Ring,
    c: Vec<u64>,
}

impl PartialEq for PadicElem {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring && self.c == other.c
    }
}
impl Eq for PadicElem {}

impl std::fmt::Debug for PadicElem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.ring.d == 1 {
            write!(f, "{} (mod {}^{})", self.c[0], self.ring.p, self.ring.m)
        } else {
            write!(f, "{:?} (mod {}^{})", self.c, self.ring.p, self.ring.m)
        }
    }
}

impl PadicElem {
    pub fn ring(&self) -> &Ring {
        &self.ring
    }
    pub fn coeffs(&self) -> &[u64] {
        &self.c
    }
    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0)
    }

    fn assert_ring(&self, other: &PadicElem) {
        assert!(
            self.ring == other.ring,
            "ring mismatch in p-adic arithmetic"
        );
    }

    pub fn add(&self, other: &PadicElem) -> PadicElem {
        self.assert_ring(other);
        let c = self
            .c
            .iter()
            .zip(&other.c)
            .map(|(&a, &b)| self.ring.add_c(a, b))
            .collect();
        PadicElem {
            ring: self.ring.clone(),
            c,
        }
    }
    pub fn sub(&self, other: &PadicElem) -> PadicElem {
        self.assert_ring(other);
        let c = self
            .c
            .iter()
            .zip(&other.c)
            .map(|(&a, &b)| self.ring.sub_c(a, b))
            .collect();
        PadicElem {
            ring: self.ring.clone(),
            c,
        }
    }
    pub fn neg(&self) -> PadicElem {
        let c = self.c.iter().map(|&a| self.ring.sub_c(0, a)).collect();
        PadicElem {
            ring: self.ring.clone(),
            c,
        }
    }
    pub fn mul(&self, other: &PadicElem) -> PadicElem {
        self.assert_ring(other);
        let d = self.ring.d;
        let mut prod = vec![0u64; 2 * d - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.c.iter().enumerate() {
                if b == 0 {
                    continue;
                }
                let t = self.ring.mul_c(a, b);
                prod[i + j] = self.ring.add_c(prod[i + j], t);
            }
        }
        let c = self.ring.reduce_poly(prod);
        PadicElem {
            ring: self.ring.clone(),
            c,
        }
    }
    pub fn scalar_mul(&self, k: u64) -> PadicElem {
        let c = self.c.iter().map(|&a| self.ring.mul_c(a, k)).collect();
        PadicElem {
            ring: self.ring.clone(),
            c,
        }
    }
    pub fn pow(&self, mut e: u64) -> PadicElem {
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

    /// Residue mod p: the coefficient vector reduced mod p.
    pub fn residue(&self) -> Vec<u64> {
        self.c.iter().map(|&a| a % self.ring.p).collect()
    }

    /// Multiplicative inverse of a unit, via inversion mod p and Newton
    /// lifting. Errors with `NotUnit` if the element is not invertible.
    pub fn inv(&self) -> Result<PadicElem> {
        let ring = &self.ring;
        // Inverse mod p by extended Euclid in F_p[x] against g mod p.
        let inv_mod_p = poly_ext_gcd_inverse(&self.residue(), &ring.g, ring.p)
            .ok_or(Error::NotUnit)?;
        let mut z = ring.from_coeffs(&inv_mod_p);
        // Newton: z ← z(2 - a z), doubling p-adic accuracy each step.
        let two = ring.from_u64(2);
        let mut prec = 1u32;
        while prec < ring.m {
            z = z.mul(&two.sub(&self.mul(&z)));
            prec *= 2;
        }
        debug_assert!(self.mul(&z) == ring.one(), "Newton inversion failed");
        Ok(z)
    }

    /// ϖ-adic valuation within [0, eM] ∪ {saturated}.
    pub fn valuation(&self) -> Valuation {
        if self.is_zero() {
            return Valuation::Saturated;
        }
        let ring = &self.ring;
        let w = ring.uniformizer();
        let max = ring.max_valuation();
        // v(x) = eM - (number of ϖ-multiplications until x vanishes).
        let mut x = self.clone();
        let mut count = 0u32;
        while !x.is_zero() {
            x = x.mul(&w);
            count += 1;
            if count > max {
                // Cannot happen for a genuine uniformizer; guard anyway.
                return Valuation::Finite(0);
            }
        }
        Valuation::Finite(max - count)
    }

    /// Exact division by p^k, landing in the ring at precision M - k.
    pub fn try_div_by_p(&self, k: u32) -> Result<PadicElem> {
        let ring = &self.ring;
        if k == 0 {
            return Ok(self.clone());
        }
        if ring.m <= k {
            return Err(Error::PrecisionExhausted(format!(
                "cannot divide by p^{k} at precision M = {}",
                ring.m
            )));
        }
        let pk = pow_u64(ring.p, k, u64::MAX);
        let mut c = Vec::with_capacity(ring.d);
        for &a in &self.c {
            if a % pk != 0 {
                return Err(Error::PrecisionExhausted(format!(
                    "coefficient {a} not divisible by p^{k}"
                )));
            }
            c.push(a / pk);
        }
        let target = ring.with_precision(ring.m - k)?;
        Ok(target.from_coeffs(&c))
    }

    /// Exact division by ϖ^k, landing in the ring at precision M - ⌈k/e⌉.
    pub fn div_by_uniformizer(&self, k: u32) -> Result<PadicElem> {
        let ring = &self.ring;
        if k == 0 {
            return Ok(self.clone());
        }
        let e = ring.e;
        let kp = k.div_ceil(e); // p-precision loss
        // x / ϖ^k = (x · ϖ^{e·kp − k} / p^{kp}) · u^{−kp} with u = ϖ^e / p;
        // u is only needed at the output precision M − kp ≤ M − 1.
        let z = self
            .mul(&ring.uniformizer().pow((e * kp - k) as u64))
            .try_div_by_p(kp)?;
        let u = ring.uniformizer().pow(e as u64).try_div_by_p(1)?;
        let u = u.reduce_precision(ring.m - kp)?;
        Ok(z.mul(&u.inv()?.pow(kp as u64)))
    }

    /// Move to a ring of the same descriptor at precision m' ≤ M.
    pub fn reduce_precision(&self, m: u32) -> Result<PadicElem> {
        let target = self.ring.with_precision(m)?;
        Ok(target.from_coeffs(&self.c))
    }

    /// Teichmüller lift of the residue of a unit: ω(x) = lim x^{p^n}.
    pub fn teichmuller(&self) -> Result<PadicElem> {
        self.inv()?; // unit check
        let ring = &self.ring;
        // x^{p^m} stabilizes mod p^M for m ≥ M - 1 (residue field F_{p^d}:
        // iterate x ↦ x^{p^d} enough times; using q = p^d covers extensions).
        let mut x = self.clone();
        let q_exp = ring.d as u32;
        for _ in 0..ring.m {
            for _ in 0..q_exp {
                x = x.pow(ring.p);
            }
        }
        Ok(x)
    }
}

/// Inverse of `a` in F_p[x]/(g) via extended Euclid, or None if not coprime.
fn poly_ext_gcd_inverse(a: &[u64], g: &[u64], p: u64) -> Option<Vec<u64>> {
    // Polynomials over F_p as Vec<u64>, lowest degree first, trimmed.
    fn trim(mut v: Vec<u64>) -> Vec<u64> {
        while v.len() > 1 && *v.last().unwrap() == 0 {
            v.pop();
        }
        v
    }
    fn is_zero(v: &[u64]) -> bool {
        v.len() == 1 && v[0] == 0
    }
    let mulmod = |a: u64, b: u64| (a as u128 * b as u128 % p as u128) as u64;
    let inv_c = |c: u64| pow_u64(c, (p - 2) as u32, p);
    // (quotient, remainder) of num / den with den nonzero.
    let divmod = |num: &[u64], den: &[u64]| -> (Vec<u64>, Vec<u64>) {
        let mut rem = num.to_vec();
        if num.len() < den.len() {
            return (vec![0], trim(rem));
        }
        let mut q = vec![0u64; num.len() - den.len() + 1];
        let lead_inv = inv_c(*den.last().unwrap());
        for shift in (0..q.len()).rev() {
            let top = rem[shift + den.len() - 1];
            if top == 0 {
                continue;
            }
            let coef = mulmod(top, lead_inv);
            q[shift] = coef;
            for (i, &dc) in den.iter().enumerate() {
                rem[shift + i] = (rem[shift + i] + p - mulmod(dc, coef)) % p;
            }
        }
        (trim(q), trim(rem))
    };
    let mut r0 = trim(g.iter().map(|&x| x % p).collect());
    let mut r1 = trim(a.iter().map(|&x| x % p).collect());
    let mut s0: Vec<u64> = vec![0];
    let mut s1: Vec<u64> = vec![1];
    while !is_zero(&r1) {
        let (q, rem) = divmod(&r0, &r1);
        // s2 = s0 - q s1
        let mut s2 = s0.clone();
        s2.resize(s2.len().max(q.len() + s1.len() - 1), 0);
        for (i, &qc) in q.iter().enumerate() {
            for (j, &sc) in s1.iter().enumerate() {
                s2[i + j] = (s2[i + j] + p - mulmod(qc, sc)) % p;
            }
        }
        r0 = r1;
        r1 = rem;
        s0 = s1;
        s1 = trim(s2);
    }
    // gcd = r0; invertible iff gcd is a nonzero constant
    if r0.len() != 1 || r0[0] == 0 {
        return None;
    }
    let c = inv_c(r0[0]);
    Some(s0.iter().map(|&x| mulmod(x, c)).collect())
}

/// A Z_p integer carried at explicit working precision: canonical
/// representative in [0, p^prec). Used where operations need more p-digits
/// than the ambient ring stores (binomial numerators, group-like exponents).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZpInt {
    pub p: u64,
    /// Known mod p^prec.
    pub prec: u32,
    /// Canonical representative in [0, p^prec).
    pub rep: BigUint,
}

impl ZpInt {
    pub fn new(p: u64, prec: u32, rep: BigUint) -> ZpInt {
        let modulus = BigUint::from(p).pow(prec);
        ZpInt {
            p,
            prec,
            rep: rep % modulus,
        }
    }
    pub fn from_i64(p: u64, prec: u32, v: i64) -> ZpInt {
        let modulus = BigUint::from(p).pow(prec);
        let rep = if v >= 0 {
            BigUint::from(v as u64) % &modulus
        } else {
            let r = BigUint::from(v.unsigned_abs()) % &modulus;
            (&modulus - r) % &modulus
        };
        ZpInt { p, prec, rep }
    }
    pub fn add(&self, other: &ZpInt) -> ZpInt {
        assert_eq!(self.p, other.p);
        let prec = self.prec.min(other.prec);
        ZpInt::new(self.p, prec, &self.rep + &other.rep)
    }
    pub fn mul(&self, other: &ZpInt) -> ZpInt {
        assert_eq!(self.p, other.p);
        let prec = self.prec.min(other.prec);
        ZpInt::new(self.p, prec, &self.rep * &other.rep)
    }
    pub fn is_unit(&self) -> bool {
        (&self.rep % self.p) != BigUint::zero()
    }
    /// Value mod p^m as u64 (requires prec ≥ m and p^m < 2^63).
    pub fn value_mod(&self, m: u32) -> u64 {
        let modulus = BigUint::from(self.p).pow(m);
        (&self.rep % modulus).to_u64().expect("p^m fits u64")
    }
}

/// The p-adic binomial coefficient binom(a, n) mod p^M.
///
/// The working-precision rule: `a` must be known mod p^{M + v_p(n!)}.
pub fn binom_padic(a: &ZpInt, n: u64, target_m: u32) -> Result<ZpInt> {
    let p = a.p;
    let need = target_m + vp_factorial(n, p);
    if a.prec < need {
        return Err(Error::PrecisionExhausted(format!(
            "binom(a, {n}) mod p^{target_m} needs a mod p^{need}, have p^{}",
            a.prec
        )));
    }
    // Exact integer binomial of the canonical representative; its residue
    // mod p^target_m is independent of the choice of representative.
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..n {
        let term = if a.rep >= BigUint::from(i) {
            &a.rep - BigUint::from(i)
        } else {
            // representative smaller than i: binomial of a nonneg int < n
            BigUint::zero()
        };
        if term.is_zero() {
            return Ok(ZpInt::new(p, target_m, BigUint::zero()));
        }
        num *= term;
        den *= BigUint::from(i + 1);
    }
    let q = num / den;
    Ok(ZpInt::new(p, target_m, q))
}

/// Lift of the Legendre symbol to Z_p^×: +1 iff the residue is a square.
pub fn legendre_lift(x: &PadicElem) -> Result<i8> {
    let ring = x.ring();
    if ring.degree() != 1 {
        return Err(Error::BadRing("legendre_lift is defined on Z_p".into()));
    }
    let r = x.coeffs()[0] % ring.p();
    if r == 0 {
        return Err(Error::NotUnit);
    }
    Ok(legendre_u64(r, ring.p()))
}

/// Legendre symbol (a/p) for p an odd prime, a coprime to p.
pub fn legendre_u64(a: u64, p: u64) -> i8 {
    match pow_u64(a % p, ((p - 1) / 2) as u32, p) {
        0 => 0,
        1 => 1,
        _ => -1,
    }
}

/// Square root of a unit by Hensel lifting from a brute-force residue root.
///
/// Of the two roots, returns the one whose residue vector is
/// lexicographically smaller (deterministic tie-break).
pub fn hensel_sqrt(a: &PadicElem) -> Result<PadicElem> {
    let ring = a.ring();
    if a.valuation() != Valuation::Finite(0) {
        return Err(Error::NotUnit);
    }
    let p = ring.p();
    let d = ring.degree();
    // Find a residue root y with y² ≡ a (mod p) by exhaustive scan of the
    // residue ring (desk scale: p^d small).
    let total: u64 = pow_u64(p, d as u32, u64::MAX);
    let mut root_mod_p: Option<Vec<u64>> = None;
    'outer: for idx in 0..total {
        let mut coeffs = Vec::with_capacity(d);
        let mut t = idx;
        for _ in 0..d {
            coeffs.push(t % p);
            t /= p;
        }
        let y = ring.from_coeffs(&coeffs);
        if y.mul(&y).residue() == a.residue() {
            // require y to be a unit so that 2y is invertible
            if y.inv().is_ok() {
                root_mod_p = Some(coeffs);
                break 'outer;
            }
        }
    }
    let coeffs = root_mod_p.ok_or(Error::NonResidue)?;
    let mut x = ring.from_coeffs(&coeffs);
    // Newton: x ← (x + a/x) / 2; converges quadratically for p odd.
    let inv2 = ring.from_u64(2).inv()?;
    for _ in 0..ring.precision() {
        let xin = x.inv()?;
        x = x.add(&a.mul(&xin)).mul(&inv2);
    }
    if x.mul(&x) != *a {
        return Err(Error::NonResidue);
    }
    let other = x.neg();
    // Tie-break on residue vectors, then full canonical vectors.
    let pick_other = match other.residue().cmp(&x.residue()) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => other.coeffs() < x.coeffs(),
    };
    Ok(if pick_other { other } else { x })
}

/// Inverse of a unit of Z_p at the element's own working precision,
/// via a^{φ(p^prec) − 1} mod p^prec.
pub fn zp_inverse(a: &ZpInt) -> Result<ZpInt> {
    if !a.is_unit() {
        return Err(Error::NotUnit);
    }
    let modulus = BigUint::from(a.p).pow(a.prec);
    let phi = BigUint::from(a.p - 1) * BigUint::from(a.p).pow(a.prec - 1);
    let inv = a.rep.modpow(&(phi - BigUint::one()), &modulus);
    Ok(ZpInt::new(a.p, a.prec, inv))
}

/// Square root of an integer unit in Z_p at arbitrary working precision
/// (p odd), by Newton lifting from a brute-force residue root. Returns
/// the root with the smaller canonical representative mod p.
pub fn zp_sqrt_i64(p: u64, prec: u32, v: i64) -> Result<ZpInt> {
    assert!(p >= 3, "p must be odd");
    let a = ZpInt::from_i64(p, prec, v);
    if !a.is_unit() {
        return Err(Error::NotUnit);
    }
    let a0 = a.value_mod(1);
    let r0 = (1..p)
        .find(|&y| y * y % p == a0)
        .ok_or(Error::NonResidue)?;
    let modulus = BigUint::from(p).pow(prec);
    let mut x = BigUint::from(r0);
    // x ← x − (x² − a)/(2x); each step doubles the number of good digits.
    let mut good = 1u32;
    while good < prec {
        let inv2x = zp_inverse(&ZpInt::new(p, prec, BigUint::from(2u32) * &x))?;
        let x2 = (&x * &x) % &modulus;
        let diff = (x2 + &modulus - &a.rep) % &modulus;
        x = (&x + (&modulus - diff * inv2x.rep % &modulus)) % &modulus;
        good *= 2;
    }
    debug_assert_eq!((&x * &x) % &modulus, a.rep);
    let r = ZpInt::new(p, prec, x);
    let neg = ZpInt::new(p, prec, &modulus - &r.rep);
    Ok(if neg.value_mod(1) < r.value_mod(1) { neg } else { r })
}
