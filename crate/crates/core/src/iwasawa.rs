//! Truncated arithmetic in the Iwasawa algebra Λ = O[[T]] with γ₀ = 1 + T.
//!
//! Elements live in O[[T]]/T^N with coefficients carried mod p^M; all
//! ring operations are exact at that bi-truncation. The module provides
//! the μ/λ invariant report (flag-based: finite precision can certify
//! μ = v but never μ > 0 from an all-saturated window), Weierstrass
//! preparation by defect iteration, group-like elements (1+T)^a, unit
//! twists T ↦ u(1+T) − 1, and the anticyclotomic Euler factors
//! 1 − a_ℓ ℓ^{−r} γ_v (+ ℓ^{−1} γ_v² when ℓ is prime to the level).

use crate::error::Error;
use crate::padic::{binom_padic, vp_factorial, PadicElem, Ring, Valuation, ZpInt};
use crate::Result;
use serde::{Deserialize, Serialize};

/// Element of O[[T]]/T^N. The `prec_p` field records the effective
/// p-adic precision of the coefficients, which can be coarser than the
/// ring's own modulus when an input (e.g. a Frobenius exponent known
/// only mod p^k) limited it.
#[derive(Clone)]
pub struct IwasawaSeries {
    ring: Ring,
    c: Vec<PadicElem>,
    prec_p: u32,
}

impl PartialEq for IwasawaSeries {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring && self.c == other.c
    }
}
impl Eq for IwasawaSeries {}

impl std::fmt::Debug for IwasawaSeries {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let v: Vec<_> = self.c.iter().map(|x| x.coeffs().to_vec()).collect();
        write!(f, "Λ{:?} (mod p^{})", v, self.prec_p)
    }
}

impl IwasawaSeries {
    pub fn new(ring: &Ring, coeffs: Vec<PadicElem>) -> IwasawaSeries {
        assert!(!coeffs.is_empty(), "T-precision must be at least 1");
        for c in &coeffs {
            assert!(c.ring() == ring, "coefficient ring mismatch");
        }
        IwasawaSeries {
            ring: ring.clone(),
            prec_p: ring.precision(),
            c: coeffs,
        }
    }

    pub fn zero(ring: &Ring, n: usize) -> IwasawaSeries {
        Self::new(ring, vec![ring.zero(); n])
    }
    pub fn one(ring: &Ring, n: usize) -> IwasawaSeries {
        let mut s = Self::zero(ring, n);
        s.c[0] = ring.one();
        s
    }
    pub fn from_u64_coeffs(ring: &Ring, coeffs: &[u64], n: usize) -> IwasawaSeries {
        let mut c = vec![ring.zero(); n];
        for (i, &v) in coeffs.iter().enumerate().take(n) {
            c[i] = ring.from_u64(v);
        }
        Self::new(ring, c)
    }
    /// γ₀ = 1 + T.
    pub fn gamma0(ring: &Ring, n: usize) -> IwasawaSeries {
        let mut s = Self::one(ring, n);
        if n > 1 {
            s.c[1] = ring.one();
        }
        s
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }
    pub fn coeffs(&self) -> &[PadicElem] {
        &self.c
    }
    pub fn t_precision(&self) -> usize {
        self.c.len()
    }
    pub fn p_precision(&self) -> u32 {
        self.prec_p
    }
    pub fn with_p_precision(mut self, prec: u32) -> IwasawaSeries {
        self.prec_p = prec.min(self.ring.precision());
        self
    }
    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }
    pub fn constant_term(&self) -> &PadicElem {
        &self.c[0]
    }

    fn assert_compatible(&self, other: &IwasawaSeries) {
        assert!(self.ring == other.ring, "Iwasawa ring mismatch");
        assert!(
            self.c.len() == other.c.len(),
            "T-precision mismatch: {} vs {}",
            self.c.len(),
            other.c.len()
        );
    }
    fn merged_prec(&self, other: &IwasawaSeries) -> u32 {
        self.prec_p.min(other.prec_p)
    }

    pub fn add(&self, other: &IwasawaSeries) -> IwasawaSeries {
        self.assert_compatible(other);
        IwasawaSeries {
            ring: self.ring.clone(),
            c: self.c.iter().zip(&other.c).map(|(a, b)| a.add(b)).collect(),
            prec_p: self.merged_prec(other),
        }
    }
    pub fn sub(&self, other: &IwasawaSeries) -> IwasawaSeries {
        self.assert_compatible(other);
        IwasawaSeries {
            ring: self.ring.clone(),
            c: self.c.iter().zip(&other.c).map(|(a, b)| a.sub(b)).collect(),
            prec_p: self.merged_prec(other),
        }
    }
    pub fn neg(&self) -> IwasawaSeries {
        IwasawaSeries {
            ring: self.ring.clone(),
            c: self.c.iter().map(|a| a.neg()).collect(),
            prec_p: self.prec_p,
        }
    }
    pub fn mul(&self, other: &IwasawaSeries) -> IwasawaSeries {
        self.assert_compatible(other);
        let n = self.c.len();
        let mut c = vec![self.ring.zero(); n];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.c.iter().enumerate().take(n - i) {
                c[i + j] = c[i + j].add(&a.mul(b));
            }
        }
        IwasawaSeries {
            ring: self.ring.clone(),
            c,
            prec_p: self.merged_prec(other),
        }
    }
    pub fn scale(&self, k: &PadicElem) -> IwasawaSeries {
        IwasawaSeries {
            ring: self.ring.clone(),
            c: self.c.iter().map(|a| a.mul(k)).collect(),
            prec_p: self.prec_p,
        }
    }
    pub fn pow(&self, mut e: u64) -> IwasawaSeries {
        let mut acc = Self::one(&self.ring, self.c.len()).with_p_precision(self.prec_p);
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

    /// Multiplicative inverse of a series with unit constant term, by
    /// Newton iteration doubling the T-accuracy each round.
    pub fn inv(&self) -> Result<IwasawaSeries> {
        let n = self.c.len();
        let mut v = Self::zero(&self.ring, n);
        v.c[0] = self.c[0].inv()?;
        let two = Self::from_u64_coeffs(&self.ring, &[2], n);
        let mut acc = 1usize;
        while acc < n {
            v = v.mul(&two.sub(&self.mul(&v)));
            acc *= 2;
        }
        Ok(v.with_p_precision(self.prec_p))
    }

    /// Evaluate at a point of O (e.g. a character value minus one).
    pub fn eval(&self, x: &PadicElem) -> PadicElem {
        let mut acc = self.ring.zero();
        for a in self.c.iter().rev() {
            acc = acc.mul(x).add(a);
        }
        acc
    }

    /// Drop p-adic precision, moving every coefficient to the ring at
    /// precision `m`.
    pub fn reduce_precision(&self, m: u32) -> Result<IwasawaSeries> {
        let ring = self.ring.with_precision(m)?;
        let c = self
            .c
            .iter()
            .map(|a| a.reduce_precision(m))
            .collect::<Result<Vec<_>>>()?;
        Ok(IwasawaSeries {
            ring,
            prec_p: self.prec_p.min(m),
            c,
        })
    }

    /// Exact division by ϖ^k, landing over the ring at M − ⌈k/e⌉.
    pub fn div_by_uniformizer(&self, k: u32) -> Result<IwasawaSeries> {
        if k == 0 {
            return Ok(self.clone());
        }
        let c = self
            .c
            .iter()
            .map(|a| a.div_by_uniformizer(k))
            .collect::<Result<Vec<_>>>()?;
        let ring = c[0].ring().clone();
        let prec = ring.precision();
        Ok(IwasawaSeries {
            ring,
            c,
            prec_p: prec,
        })
    }
}

/// μ/λ report with explicit decidability flags. A window whose
/// coefficients all saturate cannot distinguish 0 from a high power of
/// ϖ, so it yields undecidable rather than a value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub mu: Option<u32>,
    pub lambda: Option<u32>,
    pub mu_decided: bool,
    pub lambda_decided: bool,
    /// T-truncation the scan covered.
    pub t_precision: usize,
    /// Effective p-adic precision of the scanned coefficients.
    pub p_precision: u32,
}

pub fn mu_lambda(f: &IwasawaSeries) -> InvariantReport {
    let mut mu: Option<u32> = None;
    let mut lambda: Option<u32> = None;
    for (i, a) in f.coeffs().iter().enumerate() {
        if let Valuation::Finite(v) = a.valuation() {
            if mu.map_or(true, |m| v < m) {
                mu = Some(v);
                lambda = Some(i as u32);
            }
        }
    }
    InvariantReport {
        mu,
        lambda,
        mu_decided: mu.is_some(),
        lambda_decided: lambda.is_some(),
        t_precision: f.t_precision(),
        p_precision: f.p_precision(),
    }
}

/// Weierstrass preparation F = ϖ^μ · P · U mod (p^{M′}, T^N) with P
/// monic of degree λ, non-leading coefficients of positive ϖ-valuation,
/// and U a unit series; M′ = M − ⌈μ/e⌉.
///
/// Computed by defect iteration: starting from the tail unit
/// U₀ = Σ_{i≥λ} f_i T^{i−λ}, each round multiplies U by the degree-≥λ
/// part of F·U^{−1} shifted down by T^λ; the defect from 1 gains a
/// factor of ϖ per round, so e·M′ rounds suffice.
pub fn weierstrass_prep(f: &IwasawaSeries) -> Result<(u32, IwasawaSeries, IwasawaSeries)> {
    let rep = mu_lambda(f);
    let (mu, lambda) = match (rep.mu, rep.lambda) {
        (Some(m), Some(l)) => (m, l as usize),
        _ => {
            return Err(Error::Undecidable(
                "all coefficients saturate; μ/λ not determined".into(),
            ))
        }
    };
    let e = f.ring().ramification();
    let g = f.div_by_uniformizer(mu)?;
    let ring = g.ring().clone();
    let n = g.t_precision();
    let m_prime = ring.precision();

    // Tail unit seed.
    let mut u = IwasawaSeries::zero(&ring, n);
    for i in lambda..n {
        u.c[i - lambda] = g.c[i].clone();
    }
    let mut p_out = g.clone();
    for _ in 0..=(e * m_prime + 1) {
        let elem = g.mul(&u.inv()?);
        // h = 1 + (defect above degree λ, shifted down).
        let mut h = IwasawaSeries::zero(&ring, n);
        for i in lambda..n {
            h.c[i - lambda] = elem.c[i].clone();
        }
        p_out = elem;
        let mut one_series = IwasawaSeries::one(&ring, n);
        one_series.prec_p = h.prec_p;
        if h == one_series {
            break;
        }
        u = u.mul(&h);
    }
    // p_out should now be distinguished of degree λ.
    let mut ok = p_out.c[lambda] == ring.one();
    for c in p_out.c.iter().skip(lambda + 1) {
        ok &= c.is_zero();
    }
    for c in p_out.c.iter().take(lambda) {
        ok &= match c.valuation() {
            Valuation::Finite(v) => v >= 1,
            Valuation::Saturated => true,
        };
    }
    if !ok || g != p_out.mul(&u) {
        return Err(Error::Undecidable(
            "Weierstrass defect iteration did not converge".into(),
        ));
    }
    Ok((mu, p_out, u))
}

/// (1+T)^a = Σ_n binom(a, n) T^n truncated at N. The exponent must be
/// carried with enough working precision to absorb the v_p(n!) loss in
/// the binomial coefficients: a.prec ≥ M + v_p((N−1)!).
pub fn grouplike_pow(ring: &Ring, a: &ZpInt, n: usize) -> Result<IwasawaSeries> {
    assert_eq!(a.p, ring.p(), "exponent prime mismatch");
    let m = ring.precision();
    let mut c = Vec::with_capacity(n);
    for k in 0..n as u64 {
        let b = binom_padic(a, k, m)?;
        c.push(ring.from_u64(b.value_mod(m)));
    }
    Ok(IwasawaSeries::new(ring, c))
}

/// Convenience wrapper for small integer exponents, with the working
/// slack chosen automatically.
pub fn grouplike_pow_i64(ring: &Ring, a: i64, n: usize) -> Result<IwasawaSeries> {
    let slack = vp_factorial(n.saturating_sub(1) as u64, ring.p());
    let z = ZpInt::from_i64(ring.p(), ring.precision() + slack, a);
    grouplike_pow(ring, &z, n)
}

/// Character twist: T ↦ u(1+T) − 1 for a unit u of O, i.e. γ₀ ↦ u·γ₀.
pub fn twist_series(f: &IwasawaSeries, u: &PadicElem) -> Result<IwasawaSeries> {
    u.inv().map_err(|_| Error::NotUnit)?;
    let ring = f.ring().clone();
    let n = f.t_precision();
    // Horner with the linear polynomial (u − 1) + u·T.
    let u1 = u.sub(&ring.one());
    let mut acc = IwasawaSeries::zero(&ring, n);
    for a in f.coeffs().iter().rev() {
        // acc ← acc·((u−1) + uT) + a
        let mut next = vec![ring.zero(); n];
        for (i, ac) in acc.c.iter().enumerate() {
            next[i] = next[i].add(&ac.mul(&u1));
            if i + 1 < n {
                next[i + 1] = next[i + 1].add(&ac.mul(u));
            }
        }
        next[0] = next[0].add(a);
        acc = IwasawaSeries::new(&ring, next);
    }
    Ok(acc.with_p_precision(f.p_precision()))
}

/// Anticyclotomic Euler factor at a split prime above ℓ.
#[derive(Debug, Clone)]
pub struct EulerFactor {
    pub series: IwasawaSeries,
    pub ell: u64,
    pub a_ell: PadicElem,
    pub r: u32,
    /// Frobenius exponent: γ_v = γ₀^{a_v}, known mod p^k.
    pub a_v: ZpInt,
    /// True when ℓ divides the level (one-term case).
    pub divides_level: bool,
    /// Effective p-adic precision of the coefficients.
    pub effective_precision: u32,
}

/// Build 1 − a_ℓ ℓ^{−r} γ_v (+ ℓ^{−1} γ_v² when ℓ does not divide the
/// level), with γ_v = (1+T)^{a_v}. The output precision is the coarser
/// of the ring's p^M and what the exponent's precision supports after
/// the binomial losses.
pub fn euler_factor(
    ell: u64,
    a_ell: &PadicElem,
    r: u32,
    a_v: &ZpInt,
    divides_level: bool,
    n: usize,
) -> Result<EulerFactor> {
    let ring = a_ell.ring().clone();
    let p = ring.p();
    if ell % p == 0 {
        return Err(Error::BadPrime);
    }
    let slack = vp_factorial(n.saturating_sub(1) as u64, p);
    let usable = a_v.prec.saturating_sub(slack);
    if usable == 0 {
        return Err(Error::PrecisionExhausted(format!(
            "Frobenius exponent known mod p^{} cannot support T-precision {}",
            a_v.prec, n
        )));
    }
    let m_eff = ring.precision().min(usable);
    let work = ring.with_precision(m_eff)?;
    let a_ell = a_ell.reduce_precision(m_eff)?;

    let ell_inv = work.from_u64(ell % work_mod(&work)).inv()?;
    let ell_neg_r = ell_inv.pow(r as u64);
    let gamma_v = grouplike_pow(&work, a_v, n)?;
    let one = IwasawaSeries::one(&work, n);
    let mut series = one.sub(&gamma_v.scale(&a_ell.mul(&ell_neg_r)));
    if !divides_level {
        series = series.add(&gamma_v.mul(&gamma_v).scale(&ell_inv));
    }
    Ok(EulerFactor {
        series: series.with_p_precision(m_eff),
        ell,
        a_ell,
        r,
        a_v: a_v.clone(),
        divides_level,
        effective_precision: m_eff,
    })
}

fn work_mod(ring: &Ring) -> u64 {
    ring.modulus()
}

/// μ/λ of an Euler factor. Euler factors always have μ = 0, but the
/// first unit coefficient sits near T^{p^{v_p(a_v)}} and can fall past
/// the truncation window; a positive window minimum is then only a
/// lower bound, not a certificate. The report is marked undecided in
/// that case — a decided report always carries μ = 0.
pub fn euler_mu_lambda(e: &EulerFactor) -> InvariantReport {
    let rep = mu_lambda(&e.series);
    if rep.mu == Some(0) {
        return rep;
    }
    InvariantReport {
        mu: None,
        lambda: None,
        mu_decided: false,
        lambda_decided: false,
        ..rep
    }
}
