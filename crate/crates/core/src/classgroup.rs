//! Class groups Pic(O_c) of orders in imaginary quadratic fields,
//! realized by primitive positive-definite binary quadratic forms:
//! reduction, Gauss composition (through the form ↔ ideal dictionary and
//! a Hermite normal form of the product module), enumeration of all
//! reduced forms of a discriminant, prime forms above split primes, and
//! Frobenius exponents a_v with γ_v = γ₀^{a_v} obtained by discrete
//! logarithm in a cyclic p-Sylow subgroup.

use crate::error::Error;
use crate::Result;
use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Primitive positive-definite binary quadratic form ax² + bxy + cy².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl QuadForm {
    pub fn new(a: i64, b: i64, c: i64) -> Result<QuadForm> {
        let f = QuadForm { a, b, c };
        if a <= 0 || f.discriminant() >= 0 {
            return Err(Error::NotPositiveDefinite);
        }
        if gcd3(a, b, c) != 1 {
            return Err(Error::NotPrimitive);
        }
        Ok(f)
    }
    pub fn discriminant(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }
    pub fn is_reduced(&self) -> bool {
        let (a, b, c) = (self.a, self.b, self.c);
        b.abs() <= a && a <= c && (b >= 0 || (b.abs() < a && a < c))
    }
    /// Class inverse: the reduced representative of (a, −b, c).
    pub fn inverse(&self) -> QuadForm {
        reduce_form(&QuadForm {
            a: self.a,
            b: -self.b,
            c: self.c,
        })
        .expect("inverse of a valid form is valid")
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
fn gcd3(a: i64, b: i64, c: i64) -> i64 {
    gcd(gcd(a, b), c)
}

/// The principal (identity) form of a discriminant.
pub fn principal_form(delta: i64) -> QuadForm {
    let b = (delta & 1).abs();
    QuadForm {
        a: 1,
        b,
        c: (b * b - delta) / 4,
    }
}

/// Classical reduction to the unique reduced SL₂(Z)-representative.
pub fn reduce_form(f: &QuadForm) -> Result<QuadForm> {
    if f.a <= 0 || f.discriminant() >= 0 {
        return Err(Error::NotPositiveDefinite);
    }
    if gcd3(f.a, f.b, f.c) != 1 {
        return Err(Error::NotPrimitive);
    }
    let (mut a, mut b, mut c) = (f.a as i128, f.b as i128, f.c as i128);
    loop {
        // Normalize b into (−a, a].
        if b > a || b <= -a {
            let two_a = 2 * a;
            let mut r = b.rem_euclid(two_a);
            if r > a {
                r -= two_a;
            }
            let q = (b - r) / two_a;
            c += q * q * a - q * b;
            b = r;
        }
        if a > c {
            (a, b, c) = (c, -b, a);
        } else {
            break;
        }
    }
    if a == c && b < 0 {
        b = -b;
    }
    Ok(QuadForm {
        a: a as i64,
        b: b as i64,
        c: c as i64,
    })
}

/// Gauss composition via the ideal dictionary: the form (a, b, c)
/// corresponds to the module [a, t + w] with t = −(b + Δ)/2 and
/// w = (Δ + √Δ)/2 (so w² = Δw − (Δ² − Δ)/4). The product module's
/// Hermite normal form is converted back to a reduced form.
pub fn compose(f: &QuadForm, g: &QuadForm) -> Result<QuadForm> {
    let delta = f.discriminant();
    if g.discriminant() != delta {
        return Err(Error::DiscriminantMismatch);
    }
    let d = delta as i128;
    let w2_const = (d * d - d) / 4; // w² = Δ·w − w2_const
    let t1 = -((f.b as i128 + d) / 2);
    let t2 = -((g.b as i128 + d) / 2);
    let (a1, a2) = (f.a as i128, g.a as i128);
    // Generators of the product module in coordinates (x, y) ↦ x + y·w.
    let gens: [(i128, i128); 4] = [
        (a1 * a2, 0),
        (a1 * t2, a1),
        (a2 * t1, a2),
        (t1 * t2 - w2_const, t1 + t2 + d),
    ];
    // HNF: combine to a single generator with minimal positive y, then
    // reduce the rest to y = 0.
    let (mut vx, mut vy) = (0i128, 0i128);
    let mut xs: Vec<i128> = Vec::new();
    for &(x, y) in &gens {
        if y == 0 {
            xs.push(x);
        } else if vy == 0 {
            (vx, vy) = (x, y);
        } else {
            // Bezout combine (vx, vy) and (x, y) to gcd in y; the
            // eliminated combination has y = 0.
            let (gcd_y, u, v) = ext_gcd(vy, y);
            xs.push((y / gcd_y) * vx - (vy / gcd_y) * x);
            (vx, vy) = (u * vx + v * x, gcd_y);
        }
    }
    if vy < 0 {
        (vx, vy) = (-vx, -vy);
    }
    let mut m = 0i128;
    for x in xs {
        m = gcd128(m, x);
    }
    assert!(m != 0 && vy != 0, "degenerate product module");
    // Module = [m, vx + vy·w]; closure under multiplication by w forces
    // vy | m and vy | vx, and the class is the primitive part
    // [m/vy, vx/vy + w].
    assert_eq!(m % vy, 0, "HNF content must divide the norm");
    assert_eq!(vx % vy, 0, "module not closed under multiplication");
    let a = m / vy;
    let t = (vx / vy).rem_euclid(a);
    let b = (-2 * t - d).rem_euclid(2 * a);
    let b = if b > a { b - 2 * a } else { b };
    assert_eq!((b * b - d).rem_euclid(4 * a), 0, "discriminant drift");
    let c = (b * b - d) / (4 * a);
    reduce_form(&QuadForm {
        a: a as i64,
        b: b as i64,
        c: c as i64,
    })
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

fn gcd128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Binary-exponentiation power of a form class.
pub fn form_pow(f: &QuadForm, mut e: u64) -> Result<QuadForm> {
    let mut acc = principal_form(f.discriminant());
    let mut base = reduce_form(f)?;
    while e > 0 {
        if e & 1 == 1 {
            acc = compose(&acc, &base)?;
        }
        base = compose(&base, &base)?;
        e >>= 1;
    }
    Ok(acc)
}

/// Complete data for Pic(O) of one discriminant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassGroupData {
    pub delta: i64,
    pub forms: Vec<QuadForm>,
    pub h: u64,
    /// p used for the Sylow decomposition (0 when none was requested).
    pub p: u64,
    /// Order p^k of the p-Sylow subgroup.
    pub sylow_order: u64,
    pub sylow_k: u32,
    /// Generator of the p-Sylow when it is cyclic; chosen as the Sylow
    /// projection of the prime form above the smallest split prime that
    /// generates, so towers Δ = −D_K p^{2n} get compatible generators at
    /// every level. None when the Sylow is not cyclic.
    pub generator: Option<QuadForm>,
    /// The auxiliary prime whose prime form produced the generator.
    pub generator_prime: Option<u64>,
}

static ENUM_CACHE: Lazy<Mutex<HashMap<(i64, u64), Arc<ClassGroupData>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Enumerate all reduced primitive forms of discriminant Δ and, when a
/// prime p is supplied, locate a cyclic p-Sylow generator.
pub fn enumerate(delta: i64, p: u64) -> Result<Arc<ClassGroupData>> {
    if delta >= 0 || (delta.rem_euclid(4)) > 1 {
        return Err(Error::BadDiscriminant(delta));
    }
    if let Some(d) = ENUM_CACHE.lock().unwrap().get(&(delta, p)) {
        return Ok(d.clone());
    }
    let mut forms = Vec::new();
    let bound = {
        let mut a = 1i64;
        while 3 * a * a <= -delta {
            a += 1;
        }
        a
    };
    for a in 1..=bound {
        for b in (-a + 1)..=a {
            if (b - delta).rem_euclid(2) != 0 {
                continue;
            }
            let num = b * b - delta;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || gcd3(a, b, c) != 1 {
                continue;
            }
            if b < 0 && (a == c || b.abs() == a) {
                continue;
            }
            forms.push(QuadForm { a, b, c });
        }
    }
    let h = forms.len() as u64;
    let mut data = ClassGroupData {
        delta,
        forms,
        h,
        p,
        sylow_order: 1,
        sylow_k: 0,
        generator: None,
        generator_prime: None,
    };
    if p > 1 {
        let mut pk = 1u64;
        let mut k = 0u32;
        let mut h_prime = h;
        while h_prime % p == 0 {
            h_prime /= p;
            pk *= p;
            k += 1;
        }
        data.sylow_order = pk;
        data.sylow_k = k;
        if k > 0 {
            // Smallest split prime whose Sylow projection has full order.
            let mut ell = 2u64;
            while ell < 2000 {
                if is_prime_u64(ell)
                    && delta % ell as i64 != 0
                    && kronecker_prime(delta, ell) == 1
                {
                    if let Ok(pf) = prime_form(ell, delta) {
                        let g = form_pow(&pf, h_prime)?;
                        if p_order(&g, p, k)? == pk {
                            data.generator = Some(g);
                            data.generator_prime = Some(ell);
                            break;
                        }
                    }
                }
                ell += 1;
            }
            if data.generator.is_none() {
                // Fall back to a full scan so cyclic groups whose
                // generators avoid small primes are still handled.
                for f in &data.forms {
                    let g = form_pow(f, h_prime)?;
                    if p_order(&g, p, k)? == pk {
                        data.generator = Some(g);
                        break;
                    }
                }
            }
        } else {
            data.generator = Some(principal_form(delta));
        }
    }
    let arc = Arc::new(data);
    ENUM_CACHE
        .lock()
        .unwrap()
        .insert((delta, p), arc.clone());
    Ok(arc)
}

/// Order of g inside a p-group of exponent at most p^k.
fn p_order(g: &QuadForm, p: u64, k: u32) -> Result<u64> {
    let id = principal_form(g.discriminant());
    let mut x = *g;
    let mut ord = 1u64;
    for _ in 0..=k {
        if x == id {
            return Ok(ord);
        }
        x = form_pow(&x, p)?;
        ord *= p;
    }
    Err(Error::InvariantViolation(format!(
        "form order exceeds the p-Sylow bound p^{k}"
    )))
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Kronecker symbol (Δ | ℓ) for prime ℓ.
pub fn kronecker_prime(delta: i64, ell: u64) -> i8 {
    if ell == 2 {
        return match delta.rem_euclid(8) {
            1 => 1,
            5 => -1,
            _ => 0,
        };
    }
    let a = delta.rem_euclid(ell as i64) as u64;
    crate::padic::legendre_u64(a, ell)
}

/// The form (ℓ, b, (b²−Δ)/4ℓ) of the prime v above a split ℓ, with the
/// orientation pinned by 0 < b ≤ ℓ and b ≡ Δ (mod 2); replacing b by
/// 2ℓ − b picks the conjugate v̄ instead.
pub fn prime_form(ell: u64, delta: i64) -> Result<QuadForm> {
    if kronecker_prime(delta, ell) != 1 {
        return Err(Error::NotSplit(ell, delta));
    }
    let l = ell as i64;
    for b in 1..=l {
        if (b - delta).rem_euclid(2) != 0 {
            continue;
        }
        let num = b * b - delta;
        if num % (4 * l) == 0 {
            return Ok(QuadForm {
                a: l,
                b,
                c: num / (4 * l),
            });
        }
    }
    Err(Error::NotSplit(ell, delta))
}

/// Frobenius exponent a_v mod p^k at level n: γ_v = γ₀^{a_v} in the
/// cyclic p-Sylow of Pic(O_{p^n}), Δ_n = −D_K p^{2n}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrobExponent {
    pub a_v: u64,
    /// a_v is only meaningful mod p^k.
    pub k: u32,
    pub n: u32,
}

pub fn frobenius_exponent(d_k: u64, p: u64, ell: u64, n: u32) -> Result<FrobExponent> {
    assert!(n >= 1, "conductor level must be positive");
    let delta_k = -(d_k as i64);
    if kronecker_prime(delta_k, p) != 1 {
        return Err(Error::NotSplit(p, delta_k));
    }
    let base = enumerate(delta_k, p)?;
    if base.h % p == 0 {
        return Err(Error::ClassNumberDivisible);
    }
    let delta_n = delta_k * (p as i64).pow(2 * n);
    let data = enumerate(delta_n, p)?;
    let g0 = data.generator.ok_or(Error::SylowNotCyclic)?;
    let h_prime = data.h / data.sylow_order;
    let q = form_pow(&prime_form(ell, delta_n)?, h_prime)?;
    let a_v = sylow_dlog(&q, &g0, p, data.sylow_k)?;
    Ok(FrobExponent {
        a_v,
        k: data.sylow_k,
        n,
    })
}

/// Pohlig–Hellman discrete log in a cyclic group of order p^k.
pub fn sylow_dlog(q: &QuadForm, g0: &QuadForm, p: u64, k: u32) -> Result<u64> {
    if k == 0 {
        return Ok(0);
    }
    let pk = p.pow(k);
    let gamma = form_pow(g0, pk / p)?; // order p
    let g0_inv = g0.inverse();
    let mut x = 0u64;
    for i in 0..k {
        let partial = compose(q, &form_pow(&g0_inv, x)?)?;
        let probe = form_pow(&partial, p.pow(k - 1 - i))?;
        // probe = gamma^{x_i}: brute force the digit
        let mut digit = None;
        let mut acc = principal_form(q.discriminant());
        for d in 0..p {
            if acc == probe {
                digit = Some(d);
                break;
            }
            acc = compose(&acc, &gamma)?;
        }
        let d = digit.ok_or(Error::SylowNotCyclic)?;
        x += d * p.pow(i);
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_examples() {
        let f = QuadForm::new(1, 1, 6).unwrap();
        assert_eq!(reduce_form(&f).unwrap(), f);
        assert!(f.is_reduced());
        let g = QuadForm::new(6, 1, 1).unwrap();
        assert_eq!(reduce_form(&g).unwrap(), f);
        let id4 = QuadForm::new(1, 0, 1).unwrap();
        assert_eq!(reduce_form(&id4).unwrap(), id4);
        // idempotent on random-ish unreduced forms
        let h = QuadForm::new(13, 27, 15).unwrap(); // Δ = 729 − 780 = −51
        let r = reduce_form(&h).unwrap();
        assert!(r.is_reduced());
        assert_eq!(reduce_form(&r).unwrap(), r);
        assert_eq!(r.discriminant(), h.discriminant());
        // error paths
        assert_eq!(
            reduce_form(&QuadForm { a: 2, b: 2, c: 4 }).unwrap_err(),
            Error::NotPrimitive
        );
        assert_eq!(
            reduce_form(&QuadForm { a: -1, b: 0, c: 1 }).unwrap_err(),
            Error::NotPositiveDefinite
        );
    }

    #[test]
    fn composition_delta_23() {
        let e = principal_form(-23);
        assert_eq!(e, QuadForm { a: 1, b: 1, c: 6 });
        let f = QuadForm::new(2, 1, 3).unwrap();
        assert_eq!(compose(&f, &e).unwrap(), f);
        assert_eq!(compose(&f, &f.inverse()).unwrap(), e);
        assert_eq!(compose(&f, &f).unwrap(), QuadForm { a: 2, b: -1, c: 3 });
        // mismatch is rejected
        assert_eq!(
            compose(&f, &QuadForm::new(1, 0, 1).unwrap()).unwrap_err(),
            Error::DiscriminantMismatch
        );
    }

    #[test]
    fn group_axioms() {
        for delta in [-23i64, -47, -71, -891] {
            let data = enumerate(delta, 0).unwrap();
            let id = principal_form(delta);
            assert!(data.forms.contains(&id));
            for f in &data.forms {
                assert!(f.is_reduced());
                assert_eq!(compose(f, &id).unwrap(), *f);
                assert_eq!(compose(f, &f.inverse()).unwrap(), id);
                for g in &data.forms {
                    let fg = compose(f, g).unwrap();
                    assert!(data.forms.contains(&fg));
                    assert_eq!(fg, compose(g, f).unwrap());
                    for k in &data.forms {
                        assert_eq!(
                            compose(&fg, k).unwrap(),
                            compose(f, &compose(g, k).unwrap()).unwrap()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(enumerate(-23, 0).unwrap().h, 3);
        assert_eq!(enumerate(-4, 0).unwrap().h, 1);
        let d = enumerate(-891, 3).unwrap();
        assert_eq!(d.h, 6);
        assert_eq!(d.sylow_order, 3);
        assert!(d.generator.is_some());
        assert_eq!(enumerate(-5, 0).unwrap_err(), Error::BadDiscriminant(-5));
        assert_eq!(enumerate(8, 0).unwrap_err(), Error::BadDiscriminant(8));
    }

    #[test]
    fn order_formula_on_grid() {
        // h(O_{p^n}) = h_K · p^n · (1 − (Δ_K|p)/p) for D_K > 4, p ∤ h_K
        for (d_k, h_k) in [(11u64, 1u64), (23, 3), (7, 1)] {
            assert_eq!(enumerate(-(d_k as i64), 0).unwrap().h, h_k);
            for p in [3u64, 5] {
                for n in 1..=2u32 {
                    let delta = -(d_k as i64) * (p as i64).pow(2 * n);
                    let kron = kronecker_prime(-(d_k as i64), p) as i64;
                    let expect =
                        h_k as i64 * (p as i64).pow(n - 1) * (p as i64 - kron);
                    assert_eq!(
                        enumerate(delta, 0).unwrap().h as i64,
                        expect,
                        "D_K={d_k} p={p} n={n}"
                    );
                }
            }
        }
    }

    #[test]
    fn prime_form_examples() {
        assert_eq!(prime_form(2, -23).unwrap(), QuadForm { a: 2, b: 1, c: 3 });
        assert_eq!(prime_form(3, -23).unwrap(), QuadForm { a: 3, b: 1, c: 2 });
        assert_eq!(prime_form(5, -23).unwrap_err(), Error::NotSplit(5, -23));
        // v·v̄ is principal
        for (ell, delta) in [(2u64, -23i64), (3, -23), (5, -99), (23, -891)] {
            let v = prime_form(ell, delta).unwrap();
            let vbar = QuadForm { a: v.a, b: -v.b, c: v.c };
            assert_eq!(
                compose(&v, &vbar).unwrap(),
                principal_form(delta),
                "ell={ell} delta={delta}"
            );
        }
    }

    #[test]
    fn frobenius_pipeline() {
        // D_K = 11, p = 3, n = 2: Δ = −891, h = 6, Sylow order 3
        for ell in [5u64, 23] {
            let fe = frobenius_exponent(11, 3, ell, 2).unwrap();
            assert_eq!(fe.k, 1);
            // cross-check the dlog: g₀^{a_v} equals the Sylow projection
            let data = enumerate(-891, 3).unwrap();
            let g0 = data.generator.unwrap();
            let q = form_pow(&prime_form(ell, -891).unwrap(), data.h / 3).unwrap();
            assert_eq!(form_pow(&g0, fe.a_v).unwrap(), q);
        }
        // the generator's own prime has dlog 1
        let data = enumerate(-891, 3).unwrap();
        let ell0 = data.generator_prime.unwrap();
        assert_eq!(frobenius_exponent(11, 3, ell0, 2).unwrap().a_v, 1);
        // p | h_K refused
        assert_eq!(
            frobenius_exponent(23, 3, 2, 1).unwrap_err(),
            Error::ClassNumberDivisible
        );
        // p inert in K refused
        assert!(frobenius_exponent(7, 5, 2, 1).is_err());
    }

    #[test]
    fn frobenius_additivity_and_tower() {
        let (d_k, p) = (11u64, 3u64);
        let delta2 = -891i64;
        let data = enumerate(delta2, p).unwrap();
        let h_prime = data.h / data.sylow_order;
        let g0 = data.generator.unwrap();
        for (l1, l2) in [(5u64, 23u64), (5, 31), (23, 31)] {
            let a1 = frobenius_exponent(d_k, p, l1, 2).unwrap();
            let a2 = frobenius_exponent(d_k, p, l2, 2).unwrap();
            let q = form_pow(
                &compose(
                    &prime_form(l1, delta2).unwrap(),
                    &prime_form(l2, delta2).unwrap(),
                )
                .unwrap(),
                h_prime,
            )
            .unwrap();
            let combined = sylow_dlog(&q, &g0, p, data.sylow_k).unwrap();
            assert_eq!(combined, (a1.a_v + a2.a_v) % data.sylow_order);
        }
        // norm compatibility between levels 1 and 2 (k(1) = 0 at p=3,
        // D_K=11 — use D_K=7, p=5? pick a tower with k(1) ≥ 1):
        // D_K = 11, p = 3: h(−99) = 2 has trivial 3-part, so level 1
        // carries no information and compatibility is vacuous. Use
        // D_K = 23, p = 5? h_K = 3: h(−575) = 18, 5-part trivial too.
        // Exercise the vacuous case explicitly:
        let fe1 = frobenius_exponent(11, 3, 5, 1).unwrap();
        assert_eq!(fe1.k, 0);
        assert_eq!(fe1.a_v, 0);
        let fe2 = frobenius_exponent(11, 3, 5, 2).unwrap();
        assert_eq!(fe2.a_v % 3u64.pow(fe1.k), fe1.a_v);
    }
}
