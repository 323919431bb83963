//! Seeded synthetic data: deterministic generators for eigenform
//! q-expansions and related fixtures used by tests and the CLI demo
//! paths. All randomness flows through ChaCha with an explicit seed so
//! every artifact is reproducible.

use crate::error::Error;
use crate::mahler::{CharTable, Measure};
use crate::model::{CMContext, CharacterModel, EllData, FormFamily};
use crate::padic::{vp_factorial, PadicElem, Ring, ZpInt};
use crate::qexp::{pow_mod_u64, QExpansion};
use crate::Result;
use num_bigint::BigUint;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// Build a normalized "eigenform" of weight 2r and level N out to the
/// given bound: prime coefficients a_ℓ are drawn uniformly from small
/// integers and all other coefficients are forced by multiplicativity
/// and the ℓ-power recurrence, so the Hecke relations hold by
/// construction.
pub fn synthetic_eigenform(
    ring: &Ring,
    weight: u32,
    level: u64,
    bound: usize,
    seed: u64,
) -> Result<QExpansion> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pm = ring.modulus();
    let mut coeffs = vec![ring.zero(); bound + 1];
    if bound >= 1 {
        coeffs[1] = ring.one();
    }
    for n in 2..=bound {
        let ell = smallest_prime_factor(n as u64) as usize;
        if n == ell {
            coeffs[n] = ring.from_i64(rng.gen_range(-9..=9));
            continue;
        }
        let mut q = ell;
        while n % (q * ell) == 0 {
            q *= ell;
        }
        let m = n / q;
        coeffs[n] = if m > 1 {
            coeffs[q].mul(&coeffs[m])
        } else if level % ell as u64 == 0 {
            coeffs[ell].mul(&coeffs[q / ell])
        } else {
            let lpow = ring.from_u64(pow_mod_u64(ell as u64, weight as u64 - 1, pm));
            coeffs[ell]
                .mul(&coeffs[q / ell])
                .sub(&lpow.mul(&coeffs[q / (ell * ell)]))
        };
    }
    QExpansion::new(ring, weight, level, coeffs, true)
}

fn smallest_prime_factor(n: u64) -> u64 {
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return d;
        }
        d += 1;
    }
    n
}

/// A complete coherent CM fixture over a cyclic class-group model Z/h:
/// context, a random form family, and the full level-k wild character
/// family χ_0..χ_{p^k−1} with χ_j(γ₀) = ζ_{p^k}^j.
#[derive(Debug, Clone)]
pub struct ModelFixture {
    pub context: CMContext,
    pub family: FormFamily,
    pub characters: Vec<CharacterModel>,
    /// Key of the distinguished split prime in `context.primes`.
    pub ell: u64,
    /// Synthetic Hecke eigenvalue at ℓ.
    pub a_ell: PadicElem,
    pub k: u32,
    /// ρ_j(v̄) = ζ_{p^k}^{j·vbar_exponent}.
    pub vbar_exponent: u64,
}

/// Build a coherent fixture on the cyclic model Z/h. The split prime v̄
/// acts by the label shift i ↦ i − shift; its norm is ℓ = w^shift for a
/// unit w of exact multiplicative order h, so the coherence relations
/// N(π 𝔞_i)·ℓ ≡ N(𝔞_i) and ρ([π 𝔞_i]) = ρ(v̄)^{−1} ρ([𝔞_i]) hold at full
/// working precision by construction. Requires h = p^c·h₂ with h₂ ∣ p−1,
/// k ≥ c, and M ≥ k + 3.
#[allow(clippy::too_many_arguments)]
pub fn cyclic_fixture(
    ring: &Ring,
    h: u64,
    shift: u64,
    k: u32,
    r: u32,
    window: usize,
    divides_level: bool,
    seed: u64,
) -> Result<ModelFixture> {
    let p = ring.p();
    let m = ring.precision();
    let mut c = 0u32;
    let mut h2 = h;
    while h2 % p == 0 {
        h2 /= p;
        c += 1;
    }
    if (p - 1) % h2 != 0 {
        return Err(Error::BadRing(format!(
            "cyclic model order {h} needs h = p^c·h₂ with h₂ | p−1"
        )));
    }
    if k < c || m < k + 3 {
        return Err(Error::PrecisionExhausted(format!(
            "fixture needs k ≥ {c} and M ≥ k + 3, have k = {k}, M = {m}"
        )));
    }
    let work = m + vp_factorial(window as u64, p) + k + 2;
    let modulus = BigUint::from(p).pow(work);
    // w_p: 1-unit of exact order p^c
    let w_p = if c == 0 {
        BigUint::from(1u32)
    } else {
        BigUint::from(1 + p).modpow(&BigUint::from(p).pow(work - 1 - c), &modulus)
    };
    // w_t: Teichmüller-type unit of exact order h₂
    let w_t = if h2 == 1 {
        BigUint::from(1u32)
    } else {
        let g0 = primitive_root(p);
        let t0 = pow_mod_u64(g0, (p - 1) / h2, p);
        // lift exponent E ≡ 0 mod p^{work−1}, E ≡ 1 mod p−1
        let pw = BigUint::from(p).pow(work - 1);
        let inv = mod_inverse_u64(
            (&pw % BigUint::from(p - 1)).try_into().unwrap(),
            p - 1,
        );
        BigUint::from(t0).modpow(&(pw * BigUint::from(inv)), &modulus)
    };
    let w = (w_p * w_t) % &modulus;
    let norms: Vec<ZpInt> = (0..h)
        .map(|i| ZpInt::new(p, work, w.modpow(&BigUint::from(i), &modulus)))
        .collect();
    let ell_value = ZpInt::new(p, work, w.modpow(&BigUint::from(shift % h), &modulus));
    let perm: Vec<usize> = (0..h as usize)
        .map(|i| ((i as u64 + h - shift % h) % h) as usize)
        .collect();
    let ell_id = 2u64;
    let mut primes = BTreeMap::new();
    primes.insert(
        ell_id,
        EllData {
            value: ell_value,
            perm,
            divides_level,
        },
    );
    // any split negative discriminant works; search the smallest
    let d_k = (3..)
        .find(|&d| crate::padic::legendre_u64((2 * p - d % p) % p, p) == 1)
        .unwrap();
    let context = CMContext::new(ring, d_k, norms, primes)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let measures = (0..h)
        .map(|_| {
            let coeffs = (0..window).map(|_| ring.random(&mut rng)).collect();
            Measure::from_coeffs(coeffs, false)
        })
        .collect();
    let family = FormFamily::new(r, 1, measures)?;
    let a_ell = ring.random(&mut rng);

    let pk = p.pow(k);
    let pc = p.pow(c);
    let vbar_exponent = (shift % pc as u64) * (pk / pc);
    let mut characters = Vec::with_capacity(pk as usize);
    for j in 0..pk {
        let local = CharTable::one_unit_exponent(ring, k + 1, j as i64)?;
        let cring = local.ring().clone();
        // ζ_{p^k}^e = ζ_{p^{k+1}}^{p·e}
        let class_values = (0..h)
            .map(|i| cring.zeta_pow((p * (j * (pk / pc) * (i % pc as u64) % pk)) as i64))
            .collect();
        let mut vbar = BTreeMap::new();
        vbar.insert(
            ell_id,
            cring.zeta_pow((p * (j * vbar_exponent % pk)) as i64),
        );
        characters.push(CharacterModel {
            label: format!("chi_{j}"),
            local,
            class_values,
            vbar,
        });
    }
    Ok(ModelFixture {
        context,
        family,
        characters,
        ell: ell_id,
        a_ell,
        k,
        vbar_exponent,
    })
}

fn primitive_root(p: u64) -> u64 {
    let mut factors = Vec::new();
    let mut n = p - 1;
    let mut q = 2;
    while q * q <= n {
        if n % q == 0 {
            factors.push(q);
            while n % q == 0 {
                n /= q;
            }
        }
        q += 1;
    }
    if n > 1 {
        factors.push(n);
    }
    (2..p)
        .find(|&g| factors.iter().all(|&q| pow_mod_u64(g, (p - 1) / q, p) != 1))
        .expect("every odd prime has a primitive root")
}

fn mod_inverse_u64(a: u64, m: u64) -> u64 {
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (m as i128, (a % m) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    assert_eq!(r, 1, "not invertible");
    (t.rem_euclid(m as i128)) as u64
}

/// λ-budget of the stabilization on a cyclic fixture: interpolate the
/// truncated L-values of the family and of its ℓ-stabilization over the
/// depth-k character window and compare Σλ(𝒫) + λ(ℒ-trunc) across the
/// two sides. Returns (corrected budget of side 1, budget of side 2).
pub fn stabilization_lambda_budget(fx: &ModelFixture) -> Result<(u32, u32)> {
    use crate::iwasawa::{grouplike_pow_i64, mu_lambda, IwasawaSeries};
    use crate::model::{
        interpolate_truncation, l_value, lambda_budget, stabilized_family, unit_pow_neg,
    };

    let stab = stabilized_family(&fx.family, fx.ell, &fx.a_ell, &fx.context)?;
    let l1 = fx
        .characters
        .iter()
        .map(|rho| l_value(&fx.family, &fx.context, rho))
        .collect::<Result<Vec<_>>>()?;
    let l2 = fx
        .characters
        .iter()
        .map(|rho| l_value(&stab, &fx.context, rho))
        .collect::<Result<Vec<_>>>()?;
    let (_, rep1) = interpolate_truncation(&l1, fx.k)?;
    let (s2, rep2) = interpolate_truncation(&l2, fx.k)?;
    let sring = s2.ring().clone();
    let n = s2.t_precision();
    let data = fx
        .context
        .primes
        .get(&fx.ell)
        .ok_or(Error::MissingPermutation(fx.ell))?;
    let b = fx.vbar_exponent as i64;
    let a_red = fx.a_ell.reduce_precision(sring.precision())?;
    let lr = unit_pow_neg(&data.value, fx.family.r, &sring);
    let mut p_series = IwasawaSeries::one(&sring, n)
        .sub(&grouplike_pow_i64(&sring, b, n)?.scale(&a_red.mul(&lr)));
    if !data.divides_level {
        let linv = unit_pow_neg(&data.value, 1, &sring);
        p_series = p_series.add(&grouplike_pow_i64(&sring, 2 * b, n)?.scale(&linv));
    }
    let lhs = lambda_budget(&[mu_lambda(&p_series)], &rep1)?;
    let rhs = lambda_budget(&[], &rep2)?;
    Ok((lhs, rhs))
}
