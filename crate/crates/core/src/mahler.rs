//! The measure ↔ power-series dictionary on Z_p.
//!
//! A measure μ on Z_p with values in O corresponds to the series
//! Φ(t) = Σ_n (∫ binom(x, n) dμ) (t−1)^n; we store the coefficients in
//! the variable s = t − 1. Under this dictionary the Dirac measure δ_u
//! is t^u = (1+s)^u, the operator θ = t·d/dt acts as s^n ↦ n s^{n−1} +
//! n s^n, and restriction to Z_p^× ("depletion") is
//! Φ^♭(t) = Φ(t) − p^{−1} Σ_{ζ^p=1} Φ(ζt), computed by an exact trace
//! in a cyclotomic overring before the single division by p.
//!
//! Negative θ-powers only make sense on depleted measures and are taken
//! as θ^{−r} := θ^{−r + (p−1)p^m} for m = M − 1 + ⌈log_p N⌉; the matrix
//! of that power on the truncation window is cached per (p, M, N, r, m).
//!
//! Every operation records its precision cost: depletion loses one
//! p-digit, twisting by a character mod p^n loses n, and evaluation at
//! a p^n-th root of unity is guaranteed to min(M, ⌈N/φ(p^n)⌉) absolute
//! digits (exact when the measure is a polynomial of degree < N).

use crate::cyclo::{CycloElem, CycloExt, CycloRing};
use crate::error::Error;
use crate::padic::{binom_padic, vp_factorial, PadicElem, Ring, ZpInt};
use crate::series::Coeff;
use crate::Result;
use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// A measure on Z_p as a truncated Mahler series in s = t − 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Measure<E: Coeff> {
    c: Vec<E>,
    depleted: bool,
}

impl<E: Coeff> Measure<E> {
    pub fn from_coeffs(c: Vec<E>, depleted: bool) -> Measure<E> {
        assert!(!c.is_empty(), "a measure needs at least one coefficient");
        Measure { c, depleted }
    }
    pub fn coeffs(&self) -> &[E] {
        &self.c
    }
    pub fn t_precision(&self) -> usize {
        self.c.len()
    }
    pub fn is_depleted(&self) -> bool {
        self.depleted
    }
    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }
    /// Φ(1) = total mass ∫ dμ (the constant term).
    pub fn constant_term(&self) -> &E {
        &self.c[0]
    }
    pub fn p(&self) -> u64 {
        self.c[0].prime()
    }
    pub fn precision(&self) -> u32 {
        self.c[0].precision()
    }

    pub fn add(&self, other: &Measure<E>) -> Measure<E> {
        assert_eq!(self.c.len(), other.c.len(), "truncation mismatch");
        Measure {
            c: self.c.iter().zip(&other.c).map(|(a, b)| a.add(b)).collect(),
            depleted: self.depleted && other.depleted,
        }
    }
    pub fn sub(&self, other: &Measure<E>) -> Measure<E> {
        assert_eq!(self.c.len(), other.c.len(), "truncation mismatch");
        Measure {
            c: self.c.iter().zip(&other.c).map(|(a, b)| a.sub(b)).collect(),
            depleted: self.depleted && other.depleted,
        }
    }
    pub fn scale(&self, k: &E) -> Measure<E> {
        Measure {
            c: self.c.iter().map(|a| a.mul(k)).collect(),
            depleted: self.depleted,
        }
    }
    pub fn reduce_precision(&self, m: u32) -> Result<Measure<E>> {
        Ok(Measure {
            c: self
                .c
                .iter()
                .map(|a| a.reduce_precision(m))
                .collect::<Result<Vec<_>>>()?,
            depleted: self.depleted,
        })
    }

    /// θ = t·d/dt: s^n ↦ n s^{n−1} + n s^n. Exact on polynomial measures
    /// of degree < N; for genuine truncations the top coefficient would
    /// also see the dropped s^N term.
    pub fn theta(&self) -> Measure<E> {
        let n = self.c.len();
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let mut v = self.c[k].scalar_mul(k as u64);
            if k + 1 < n {
                v = v.add(&self.c[k + 1].scalar_mul(k as u64 + 1));
            }
            out.push(v);
        }
        Measure {
            c: out,
            depleted: self.depleted,
        }
    }

    /// k-th moment ∫ x^k dμ = (θ^k Φ)(1).
    pub fn moment(&self, k: u32) -> E {
        let mut m = self.clone();
        for _ in 0..k {
            m = m.theta();
        }
        m.c[0].clone()
    }

    /// θ^{−r} on a depleted measure, via θ^{(p−1)p^m − r} with the
    /// default stopping exponent m = M − 1 + ⌈log_p N⌉.
    pub fn theta_neg(&self, r: u32) -> Result<Measure<E>> {
        let p = self.p();
        let n = self.c.len();
        let mut m = self.precision().saturating_sub(1);
        let mut cover = 1u64;
        while cover < n as u64 {
            cover *= p;
            m += 1;
        }
        self.theta_neg_with_m(r, m)
    }

    /// θ^{−r} with an explicit stopping exponent; exposed so stability
    /// under m ↦ m+1 can be asserted.
    pub fn theta_neg_with_m(&self, r: u32, m: u32) -> Result<Measure<E>> {
        if !self.depleted {
            return Err(Error::NotDepleted);
        }
        let p = self.p();
        let prec = self.precision();
        let n = self.c.len();
        let mat = theta_power_matrix(p, prec, n, r, m);
        let zero = self.c[0].zero_like();
        let mut out = vec![zero; n];
        for row in 0..n {
            let mut acc = self.c[0].zero_like();
            for (col, c) in self.c.iter().enumerate() {
                let a = mat[row * n + col];
                if a != 0 && !c.is_zero() {
                    acc = acc.add(&c.scalar_mul(a));
                }
            }
            out[row] = acc;
        }
        Ok(Measure {
            c: out,
            depleted: true,
        })
    }

    /// Pushforward by x ↦ αx for a unit α of Z_p: Φ((1+s)^α − 1).
    pub fn subst_pow(&self, alpha: &ZpInt) -> Result<Measure<E>> {
        if !alpha.is_unit() {
            return Err(Error::NotUnit);
        }
        let p = self.p();
        assert_eq!(alpha.p, p, "substitution exponent prime mismatch");
        let prec = self.precision();
        let n = self.c.len();
        // g = (1+s)^α − 1 as scalar coefficients mod p^M.
        let mut g = vec![0u64; n];
        for (k, gk) in g.iter_mut().enumerate().skip(1) {
            *gk = binom_padic(alpha, k as u64, prec)?.value_mod(prec);
        }
        // Horner: acc ← acc·g + c_k, highest coefficient first.
        let zero = self.c[0].zero_like();
        let mut acc = vec![zero.clone(); n];
        for ck in self.c.iter().rev() {
            let mut next = vec![zero.clone(); n];
            for (i, a) in acc.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for (j, &gj) in g.iter().enumerate().take(n - i) {
                    if gj != 0 {
                        next[i + j] = next[i + j].add(&a.scalar_mul(gj));
                    }
                }
            }
            next[0] = next[0].add(ck);
            acc = next;
        }
        Ok(Measure {
            c: acc,
            depleted: self.depleted,
        })
    }
}

static THETA_CACHE: Lazy<Mutex<HashMap<(u64, u32, usize, u32, u32), Arc<Vec<u64>>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Matrix of θ^{(p−1)p^m − r} on O[s]/s^N mod p^M (row-major N×N).
fn theta_power_matrix(p: u64, prec: u32, n: usize, r: u32, m: u32) -> Arc<Vec<u64>> {
    let key = (p, prec, n, r, m);
    if let Some(a) = THETA_CACHE.lock().unwrap().get(&key) {
        return a.clone();
    }
    let pm: u64 = p.pow(prec);
    // θ itself: column j contributes j to rows j−1 and j.
    let mut theta = vec![0u64; n * n];
    for j in 1..n {
        theta[(j - 1) * n + j] = j as u64 % pm;
        theta[j * n + j] = j as u64 % pm;
    }
    let mut exp: u128 = (p as u128 - 1) * (p as u128).pow(m);
    exp -= r as u128;
    let mul = |a: &[u64], b: &[u64]| -> Vec<u64> {
        let mut c = vec![0u64; n * n];
        for i in 0..n {
            for k in 0..n {
                let a_ik = a[i * n + k];
                if a_ik == 0 {
                    continue;
                }
                for j in 0..n {
                    let b_kj = b[k * n + j];
                    if b_kj != 0 {
                        let v = (a_ik as u128 * b_kj as u128 + c[i * n + j] as u128)
                            % pm as u128;
                        c[i * n + j] = v as u64;
                    }
                }
            }
        }
        c
    };
    let mut acc = vec![0u64; n * n];
    for i in 0..n {
        acc[i * n + i] = 1;
    }
    let mut base = theta;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul(&acc, &base);
        }
        base = mul(&base, &base);
        exp >>= 1;
    }
    let arc = Arc::new(acc);
    THETA_CACHE.lock().unwrap().insert(key, arc.clone());
    arc
}

impl Measure<PadicElem> {
    pub fn ring(&self) -> &Ring {
        self.c[0].ring()
    }

    pub fn zero(ring: &Ring, n: usize) -> Measure<PadicElem> {
        Measure::from_coeffs(vec![ring.zero(); n], false)
    }

    /// Dirac measure δ_u as the series t^u = (1+s)^u.
    pub fn dirac(ring: &Ring, u: i64, n: usize) -> Measure<PadicElem> {
        let p = ring.p();
        let prec = ring.precision() + vp_factorial(n.saturating_sub(1) as u64, p);
        let a = ZpInt::from_i64(p, prec, u);
        let c = (0..n as u64)
            .map(|k| {
                ring.from_u64(
                    binom_padic(&a, k, ring.precision())
                        .expect("dirac slack suffices")
                        .value_mod(ring.precision()),
                )
            })
            .collect();
        Measure::from_coeffs(c, u.rem_euclid(p as i64) != 0)
    }

    /// Φ(ζ^j t) in a cyclotomic overring: s ↦ (ζ^j − 1) + ζ^j s.
    fn subst_root(&self, cring: &CycloRing, j: i64) -> Vec<CycloElem> {
        let n = self.c.len();
        let z = cring.zeta_pow(j);
        let a = z.sub(&cring.one());
        let mut acc = vec![cring.zero(); n];
        for ck in self.c.iter().rev() {
            let mut next = vec![cring.zero(); n];
            for (i, v) in acc.iter().enumerate() {
                if v.is_zero() {
                    continue;
                }
                next[i] = next[i].add(&v.mul(&a));
                if i + 1 < n {
                    next[i + 1] = next[i + 1].add(&v.mul(&z));
                }
            }
            next[0] = next[0].add(&cring.from_base(ck));
            acc = next;
        }
        acc
    }

    /// Restriction to Z_p^×: Φ^♭ = Φ − p^{−1} Σ_{j<p} Φ(ζ_p^j t). The
    /// root-of-unity trace is exact in O[ζ_p] and descends to O before
    /// the single division by p, so exactly one digit is lost.
    pub fn deplete(&self) -> Result<Measure<PadicElem>> {
        let ring = self.ring();
        let m = ring.precision();
        if m < 2 {
            return Err(Error::PrecisionExhausted(
                "depletion needs precision at least 2".into(),
            ));
        }
        let p = ring.p();
        let cring = CycloExt::new(ring, 1)?;
        let n = self.c.len();
        let mut total = vec![cring.zero(); n];
        for j in 0..p as i64 {
            for (t, v) in total.iter_mut().zip(self.subst_root(&cring, j)) {
                *t = t.add(&v);
            }
        }
        let mut out = Vec::with_capacity(n);
        for (a, t) in self.c.iter().zip(total) {
            let avg = t.to_base()?.try_div_by_p(1)?;
            out.push(a.reduce_precision(m - 1)?.sub(&avg));
        }
        Ok(Measure {
            c: out,
            depleted: true,
        })
    }

    /// Twist by a character of (Z/p^n)^×:
    /// Φ ⊗ φ = Σ_u φ(u)·restrict_{u+p^nZ_p}(Φ)
    ///       = p^{−n} Σ_j (Σ_u φ(u) ζ^{−uj}) Φ(ζ^j t),
    /// with coefficients in O[ζ_{p^n}] and n digits of precision spent
    /// on the averaging.
    pub fn twist(&self, chi: &CharTable) -> Result<Measure<CycloElem>> {
        let ring = self.ring();
        assert!(chi.ring().base() == ring, "character over a different ring");
        let n_lvl = chi.n;
        let cring = chi.ring().clone();
        if n_lvl == 0 {
            let c = self.c.iter().map(|a| cring.from_base(a)).collect();
            return Ok(Measure {
                c,
                depleted: self.depleted,
            });
        }
        let m = ring.precision();
        if m <= n_lvl {
            return Err(Error::PrecisionExhausted(format!(
                "twist mod p^{n_lvl} needs precision > {n_lvl}, have {m}"
            )));
        }
        let pn = chi.modulus();
        // w_j = Σ_u φ(u) ζ^{−uj}
        let mut weights = Vec::with_capacity(pn as usize);
        for j in 0..pn as i64 {
            let mut w = cring.zero();
            for (u, v) in chi.entries() {
                w = w.add(&v.mul(&cring.zeta_pow(-(u as i64) * j)));
            }
            weights.push(w);
        }
        let nc = self.c.len();
        let mut total = vec![cring.zero(); nc];
        for (j, w) in weights.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            for (t, v) in total.iter_mut().zip(self.subst_root(&cring, j as i64)) {
                *t = t.add(&v.mul(w));
            }
        }
        let c = total
            .into_iter()
            .map(|t| t.try_div_by_p(n_lvl))
            .collect::<Result<Vec<_>>>()?;
        Ok(Measure { c, depleted: true })
    }

    /// Σ_{k<N} c_k (ζ_{p^n}^j − 1)^k together with the guaranteed
    /// absolute precision min(M, ⌈N/φ(p^n)⌉) — the discarded tail has
    /// (x−1)-valuation ≥ N, i.e. ≥ N/φ(p^n) in p-units. Exact for
    /// polynomial measures.
    pub fn eval_root(&self, j: i64, n: u32) -> Result<(CycloElem, u32)> {
        assert!(n >= 1, "evaluation level must be positive");
        let ring = self.ring();
        let cring = CycloExt::new(ring, n)?;
        let w = cring.zeta_pow(j).sub(&cring.one());
        let mut acc = cring.zero();
        for ck in self.c.iter().rev() {
            acc = acc.mul(&w).add(&cring.from_base(ck));
        }
        let nn = self.c.len() as u32;
        let guaranteed = ring
            .precision()
            .min(nn.div_ceil(cring.phi() as u32));
        Ok((acc, guaranteed))
    }
}

impl Measure<CycloElem> {
    pub fn cyclo_ring(&self) -> &CycloRing {
        self.c[0].ring()
    }
    /// Back to base-ring coefficients when they all descend.
    pub fn descend(&self) -> Result<Measure<PadicElem>> {
        Ok(Measure {
            c: self
                .c
                .iter()
                .map(|a| a.to_base())
                .collect::<Result<Vec<_>>>()?,
            depleted: self.depleted,
        })
    }
}

/// A character of (Z/p^n)^× tabulated on every unit residue, with
/// values in O[ζ_{p^n}] (Teichmüller-part values land in O ⊂ O[ζ]).
#[derive(Debug, Clone)]
pub struct CharTable {
    /// Conductor exponent bound: the character is defined mod p^n.
    pub n: u32,
    ring: CycloRing,
    /// values[u] for 0 ≤ u < p^n; None exactly when p | u.
    values: Vec<Option<CycloElem>>,
}

impl CharTable {
    fn build(
        base: &Ring,
        n: u32,
        f: impl Fn(&CycloRing, u64) -> CycloElem,
    ) -> Result<CharTable> {
        let ring = CycloExt::new(base, n)?;
        let pn = base.p().pow(n);
        let mut values = Vec::with_capacity(pn as usize);
        for u in 0..pn {
            if n > 0 && u % base.p() == 0 {
                values.push(None);
            } else {
                values.push(Some(f(&ring, u.max(1))));
            }
        }
        Ok(CharTable { n, ring, values })
    }

    pub fn trivial(base: &Ring, n: u32) -> Result<CharTable> {
        Self::build(base, n, |r, _| r.one())
    }

    /// u ↦ ω(u)^c for the Teichmüller character ω; defined mod p.
    pub fn teichmuller_power(base: &Ring, c: u32) -> Result<CharTable> {
        Self::build(base, 1, |r, u| {
            let w = r
                .base()
                .from_u64(u)
                .teichmuller()
                .expect("unit residue has a Teichmüller lift");
            r.from_base(&w.pow(c as u64))
        })
    }

    /// The quadratic residue character mod p, with values ±1.
    pub fn legendre(base: &Ring) -> Result<CharTable> {
        Self::teichmuller_power(base, (base.p() as u32 - 1) / 2)
    }

    /// The p-power-order character u ↦ ζ_{p^{n−1}}^{c·i(u)}, where the
    /// 1-unit part of u is (1+p)^{i(u)} mod p^n. These are exactly the
    /// wild characters that cut out the anticyclotomic tower levels.
    pub fn one_unit_exponent(base: &Ring, n: u32, c: i64) -> Result<CharTable> {
        assert!(n >= 1);
        let p = base.p();
        let pn = p.pow(n);
        let ring = CycloExt::new(base, n)?;
        // Teichmüller lift mod p^n of each residue class: exponent E with
        // E ≡ 0 mod p^{n−1} and E ≡ 1 mod p−1.
        let pn1 = p.pow(n - 1);
        let inv = mod_inverse(pn1 % (p - 1), p - 1);
        let teich_exp = pn1 as u128 * inv as u128;
        let mut values = vec![None; pn as usize];
        for i in 0..pn1 {
            let x = pow_mod(1 + p, i, pn);
            let zv = ring.zeta_pow((p as i64) * (c * i as i64));
            for t in 1..p {
                let w = pow_mod_u128(t, teich_exp, pn);
                let u = (x as u128 * w as u128 % pn as u128) as u64;
                values[u as usize] = Some(zv.clone());
            }
        }
        Ok(CharTable { n, ring, values })
    }

    pub fn ring(&self) -> &CycloRing {
        &self.ring
    }
    pub fn modulus(&self) -> u64 {
        self.ring.p().pow(self.n)
    }
    pub fn value(&self, u: u64) -> Result<&CycloElem> {
        let pn = self.modulus();
        self.values[(u % pn) as usize].as_ref().ok_or_else(|| {
            Error::IncompleteCharacterTable(format!("no value at non-unit residue {u}"))
        })
    }
    /// Iterate (u, φ(u)) over unit residues.
    pub fn entries(&self) -> impl Iterator<Item = (u64, &CycloElem)> {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(u, v)| v.as_ref().map(|x| (u as u64, x)))
    }

    /// φ^{−1}, by permuting the table: φ^{−1}(u) = φ(u^{−1} mod p^n).
    pub fn inverse(&self) -> CharTable {
        let pn = self.modulus();
        let mut values = vec![None; self.values.len()];
        for (u, v) in self.entries() {
            let ui = if self.n == 0 {
                u
            } else {
                mod_inverse(u % pn, pn)
            };
            values[(ui % pn.max(1)) as usize] = Some(v.clone());
        }
        CharTable {
            n: self.n,
            ring: self.ring.clone(),
            values,
        }
    }

    /// The same table over a reduced-precision coefficient ring.
    pub fn with_precision(&self, m: u32) -> Result<CharTable> {
        if m == self.ring.precision() {
            return Ok(self.clone());
        }
        let ring = self.ring.with_precision(m)?;
        let values = self
            .values
            .iter()
            .map(|v| {
                v.as_ref()
                    .map(|x| x.reduce_precision(m))
                    .transpose()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CharTable {
            n: self.n,
            ring,
            values,
        })
    }

    /// Multiply by the quadratic residue character mod p (values ±1).
    /// A conductor-0 table twists to the Legendre table itself.
    pub fn twist_quadratic(&self) -> Result<CharTable> {
        if self.n == 0 {
            return CharTable::legendre(self.ring.base());
        }
        let p = self.ring.p();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(u, v)| {
                v.as_ref().map(|x| {
                    if crate::padic::legendre_u64(u as u64 % p, p) == 1 {
                        x.clone()
                    } else {
                        x.neg()
                    }
                })
            })
            .collect();
        Ok(CharTable {
            n: self.n,
            ring: self.ring.clone(),
            values,
        })
    }

    /// Pointwise product of two characters tabulated mod the same p^n.
    pub fn product(&self, other: &CharTable) -> Result<CharTable> {
        if self.n != other.n || !(*self.ring == *other.ring) {
            return Err(Error::RingMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| match (a, b) {
                (Some(x), Some(y)) => Some(x.mul(y)),
                _ => None,
            })
            .collect();
        Ok(CharTable {
            n: self.n,
            ring: self.ring.clone(),
            values,
        })
    }
}

/// 𝔤(φ) = Σ_u φ(u) ζ_{p^n}^u (empty-conductor convention: 1 for n = 0).
pub fn gauss_sum(chi: &CharTable) -> CycloElem {
    if chi.n == 0 {
        return chi.ring.one();
    }
    let mut acc = chi.ring.zero();
    for (u, v) in chi.entries() {
        acc = acc.add(&v.mul(&chi.ring.zeta_pow(u as i64)));
    }
    acc
}

fn pow_mod(b: u64, e: u64, m: u64) -> u64 {
    pow_mod_u128(b, e as u128, m)
}

fn pow_mod_u128(b: u64, mut e: u128, m: u64) -> u64 {
    let mut acc: u128 = 1;
    let mut bb = b as u128 % m as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * bb % m as u128;
        }
        bb = bb * bb % m as u128;
        e >>= 1;
    }
    acc as u64
}

fn mod_inverse(a: u64, m: u64) -> u64 {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    assert_eq!(r0, 1, "element not invertible");
    s0.rem_euclid(m as i128) as u64
}
