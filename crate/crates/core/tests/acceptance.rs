//! End-to-end acceptance gate. Each numbered criterion prints exactly one
//! PASS/FAIL line; the test fails if any criterion fails. Everything runs
//! on a desk grid: p ∈ {3, 5, 7}, p-precision ≤ 6, t-windows ≤ 64, class
//! numbers ≤ 6, |Δ| ≤ 1000.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use anticyclo::classgroup::{compose, enumerate, frobenius_exponent, principal_form, reduce_form};
use anticyclo::fixtures::{to_canonical_json, FormFile, FrobRequest, ModelFile, RingDescriptor, SCHEMA_VERSION};
use anticyclo::iwasawa::{
    euler_factor, euler_mu_lambda, grouplike_pow_i64, mu_lambda, weierstrass_prep, IwasawaSeries,
};
use anticyclo::mahler::{gauss_sum, CharTable, Measure};
use anticyclo::model::{
    l_value, quad_twist_value, verify_congruence, verify_stabilization, CharacterModel,
    EulerCorrection, FormFamily, WeightRelation,
};
use anticyclo::padic::{PadicRing, Ring, Valuation, ZpInt};
use anticyclo::synth::{cyclic_fixture, stabilization_lambda_budget, ModelFixture};
use anticyclo::Error;

fn zp(p: u64, m: u32) -> Ring {
    PadicRing::zp(p, m).unwrap()
}

/// Trivial character model plus its quadratic twist, used to pad the
/// per-fixture character count.
fn extra_characters(fx: &ModelFixture) -> Result<Vec<CharacterModel>, String> {
    let ring = fx.family.ring();
    let local = CharTable::trivial(ring, 0).map_err(|e| e.to_string())?;
    let cring = local.ring().clone();
    let mut vbar = BTreeMap::new();
    vbar.insert(fx.ell, cring.one());
    let trivial = CharacterModel {
        label: "triv".into(),
        local,
        class_values: vec![cring.one(); fx.family.class_count()],
        vbar,
    };
    let twisted = quad_twist_value(&trivial, &fx.context).map_err(|e| e.to_string())?;
    Ok(vec![trivial, twisted])
}

/// Criterion 1: on ≥ 100 randomized families with ≥ 5 characters each,
/// the V-identity and the stabilized identity hold with saturated
/// residuals.
fn c1_stabilization_identities() -> Result<(), String> {
    let mut families = 0usize;
    let mut run = |fx: ModelFixture, min_chars: usize| -> Result<(), String> {
        let mut rhos = fx.characters.clone();
        if rhos.len() < min_chars {
            rhos.extend(extra_characters(&fx)?);
        }
        if rhos.len() < min_chars {
            return Err(format!("only {} characters available", rhos.len()));
        }
        let rep = verify_stabilization(&fx.family, fx.ell, &fx.a_ell, &fx.context, &rhos)
            .map_err(|e| e.to_string())?;
        for c in &rep.checks {
            if !c.pass {
                return Err(format!(
                    "{} residual not saturated for {} (achieved {:?})",
                    c.identity, c.character, c.achieved_valuation
                ));
            }
        }
        families += 1;
        Ok(())
    };
    for i in 0..78u64 {
        let h = 1 + (i % 3);
        let fx = cyclic_fixture(
            &zp(3, 5),
            h,
            if h > 1 { 1 } else { 0 },
            1,
            1 + (i % 2) as u32,
            6,
            i % 2 == 1,
            1000 + i,
        )
        .map_err(|e| e.to_string())?;
        run(fx, 5)?;
    }
    for i in 0..18u64 {
        let h = if i % 3 == 2 { 5 } else { 1 };
        let fx = cyclic_fixture(
            &zp(5, 4),
            h,
            if h > 1 { 2 } else { 0 },
            1,
            1 + (i % 2) as u32,
            6,
            i % 2 == 1,
            2000 + i,
        )
        .map_err(|e| e.to_string())?;
        run(fx, 5)?;
    }
    for i in 0..5u64 {
        let fx = cyclic_fixture(&zp(7, 4), 1, 0, 1, 1, 6, i % 2 == 1, 3000 + i)
            .map_err(|e| e.to_string())?;
        run(fx, 5)?;
    }
    if families < 100 {
        return Err(format!("only {families} families verified"));
    }
    Ok(())
}

/// ϖ^e perturbation of every class expansion with unit multipliers drawn
/// from rng.
fn perturb(family: &FormFamily, e: u32, rng: &mut ChaCha8Rng) -> FormFamily {
    let ring = family.ring().clone();
    let step = ring.p().pow(e.min(ring.precision()));
    let measures = family
        .measures()
        .iter()
        .map(|meas| {
            let c = meas
                .coeffs()
                .iter()
                .map(|x| {
                    let mult = rng.gen_range(1..ring.p().pow(2));
                    x.add(&ring.from_u64(step.wrapping_mul(mult)))
                })
                .collect();
            Measure::from_coeffs(c, false)
        })
        .collect();
    FormFamily::new(family.r, family.level_tag, measures).unwrap()
}

/// Criterion 2: congruence propagation at m ∈ {1, 2, 3} on 50 pairs each,
/// plus negative controls at m + 1.
fn c2_congruence_propagation() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for m in 1..=3u32 {
        let mut control_failures = 0usize;
        for i in 0..50u64 {
            let h = 1 + 2 * (i % 2);
            let fx = cyclic_fixture(
                &zp(3, 6),
                h,
                if h > 1 { 1 } else { 0 },
                1,
                1,
                6,
                i % 2 == 1,
                4000 + 100 * m as u64 + i,
            )
            .map_err(|e| e.to_string())?;
            let f2 = perturb(&fx.family, m, &mut rng);
            let euler = [EulerCorrection {
                ell: fx.ell,
                a1: fx.a_ell.clone(),
                a2: fx.a_ell.clone(),
            }];
            let rep = verify_congruence(&fx.family, &f2, m, &fx.context, &fx.characters, &euler)
                .map_err(|e| format!("m = {m}, pair {i}: {e}"))?;
            if !rep.pass() {
                return Err(format!("m = {m}, pair {i}: required valuation missed"));
            }
            // negative control: the same perturbation tested at m + 1
            match verify_congruence(&fx.family, &f2, m + 1, &fx.context, &fx.characters, &euler)
            {
                Err(Error::NotCongruentInputs) => control_failures += 1,
                Err(e) => return Err(format!("control m = {}: {e}", m + 1)),
                Ok(rep) if !rep.pass() => control_failures += 1,
                Ok(_) => {}
            }
        }
        if control_failures < 45 {
            return Err(format!(
                "m = {m}: only {control_failures}/50 negative controls failed"
            ));
        }
    }
    Ok(())
}

/// Criterion 3: with r₂ = r₁ + (p−1)/2, untwisted comparisons fail and
/// ψ-twisted comparisons pass, for all three p.
fn c3_legendre_case() -> Result<(), String> {
    for p in [3u64, 5, 7] {
        let m = if p == 3 { 6 } else { 4 };
        let fx = cyclic_fixture(&zp(p, m), 1, 0, 1, 1, 6, false, 5000 + p)
            .map_err(|e| e.to_string())?;
        let f2 = FormFamily::new(
            fx.family.r + (p as u32 - 1) / 2,
            fx.family.level_tag,
            fx.family.measures().to_vec(),
        )
        .map_err(|e| e.to_string())?;
        let rho = &fx.characters[1];
        let v1 = l_value(&fx.family, &fx.context, rho).map_err(|e| e.to_string())?;
        let v2 = l_value(&f2, &fx.context, rho).map_err(|e| e.to_string())?;
        let phi = v1.ring().phi() as u32;
        match v1.sub(&v2).valuation() {
            Valuation::Saturated => return Err(format!("p = {p}: untwisted values agree")),
            Valuation::Finite(v) if v >= phi => {
                return Err(format!("p = {p}: untwisted difference has a p-unit"))
            }
            Valuation::Finite(_) => {}
        }
        let rep = verify_congruence(&fx.family, &f2, 1, &fx.context, &fx.characters, &[])
            .map_err(|e| format!("p = {p}: {e}"))?;
        if rep.weight_relation != WeightRelation::LegendreTwist {
            return Err(format!("p = {p}: weight relation not Legendre"));
        }
        if !rep.pass() {
            return Err(format!("p = {p}: twisted comparison failed"));
        }
    }
    Ok(())
}

/// Criterion 4: 1000 random Euler factors per p have μ = 0 whenever
/// decidable, with λ matching a first-unit-coefficient scan.
fn c4_euler_mu_zero() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let small_primes = [2u64, 3, 5, 7, 11, 13, 17, 19, 23];
    for p in [3u64, 5, 7] {
        let ring = zp(p, 4);
        let mut decided = 0usize;
        for i in 0..1000 {
            let ell = loop {
                let l = small_primes[rng.gen_range(0..small_primes.len())];
                if l != p {
                    break l;
                }
            };
            let a_ell = ring.random(&mut rng);
            let r = rng.gen_range(1..=3u32);
            let a_v = ZpInt::from_i64(p, 4, rng.gen_range(0..p.pow(3)) as i64);
            let divides = rng.gen_bool(0.5);
            let e = euler_factor(ell, &a_ell, r, &a_v, divides, 8)
                .map_err(|err| format!("p = {p}, draw {i}: {err}"))?;
            let rep = euler_mu_lambda(&e);
            if !(rep.mu_decided && rep.lambda_decided) {
                continue;
            }
            decided += 1;
            if rep.mu != Some(0) {
                return Err(format!("p = {p}, draw {i}: μ = {:?}", rep.mu));
            }
            let scan = e
                .series
                .coeffs()
                .iter()
                .position(|c| c.valuation() == Valuation::Finite(0))
                .map(|k| k as u32);
            if rep.lambda != scan {
                return Err(format!(
                    "p = {p}, draw {i}: λ = {:?} but unit scan gives {:?}",
                    rep.lambda, scan
                ));
            }
        }
        if decided < 900 {
            return Err(format!("p = {p}: only {decided}/1000 draws decidable"));
        }
    }
    Ok(())
}

/// Criterion 5: θ^r ∘ θ^{−r} is the identity on 200 random depleted
/// measures, and θ^{−r} is stable under m ↦ m + 1.
fn c5_theta_inverse() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut count = 0usize;
    while count < 200 {
        let p = [3u64, 5, 7][count % 3];
        let ring = zp(p, 3);
        let raw: Vec<_> = (0..6).map(|_| ring.random(&mut rng)).collect();
        let dep = match Measure::from_coeffs(raw, false).deplete() {
            Ok(d) => d,
            Err(e) => return Err(e.to_string()),
        };
        let r = 1 + (count % 2) as u32;
        let inv = dep.theta_neg(r).map_err(|e| e.to_string())?;
        let mut back = inv.clone();
        for _ in 0..r {
            back = back.theta();
        }
        if back != dep {
            return Err(format!("p = {p}, r = {r}: θ^r∘θ^{{−r}} is not the identity"));
        }
        // stability of the limit under a longer stopping exponent
        let m0 = 2 + 2; // precision − 1 + ⌈log_p 6⌉ ≤ 4 for all three p
        let a = dep.theta_neg_with_m(r, m0).map_err(|e| e.to_string())?;
        let b = dep.theta_neg_with_m(r, m0 + 1).map_err(|e| e.to_string())?;
        if a != b {
            return Err(format!("p = {p}, r = {r}: θ^{{−r}} unstable at m = {m0}"));
        }
        count += 1;
    }
    Ok(())
}

/// Criterion 6: moments match brute-force sums, depletion is idempotent,
/// and twisting agrees with the Gauss-sum evaluation formula.
fn c6_mahler_dictionary() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    for i in 0..200usize {
        let p = [3u64, 5, 7][i % 3];
        let ring = zp(p, 4);
        let support: Vec<(u64, u64)> = (0..3)
            .map(|_| (rng.gen_range(0..12u64), rng.gen_range(0..ring.modulus())))
            .collect();
        let mut meas = Measure::zero(&ring, 8);
        for &(u, c) in &support {
            meas = meas.add(&Measure::dirac(&ring, u as i64, 8).scale(&ring.from_u64(c)));
        }
        for k in 0..=6u32 {
            let mut brute = ring.zero();
            for &(u, c) in &support {
                brute = brute.add(&ring.from_u64(c).scalar_mul(pow_u64(u, k, ring.modulus())));
            }
            if meas.moment(k) != brute {
                return Err(format!("p = {p}, fixture {i}: moment {k} mismatch"));
            }
        }
        let d1 = meas.deplete().map_err(|e| e.to_string())?;
        let d2 = d1.deplete().map_err(|e| e.to_string())?;
        if d2 != d1.reduce_precision(d1.precision() - 1).map_err(|e| e.to_string())? {
            return Err(format!("p = {p}, fixture {i}: depletion not idempotent"));
        }
    }
    // (Φ⊗φ)(1) = p^{−n} 𝔤(φ) Σ_u φ^{−1}(u) Φ(ζ^{−u}), 50 fixtures per (p, n)
    for p in [3u64, 5, 7] {
        let ring = zp(p, 4);
        for n in 1..=2u32 {
            for i in 0..50u64 {
                let phi_meas = Measure::dirac(&ring, rng.gen_range(1..12i64), 8)
                    .scale(&ring.from_u64(rng.gen_range(1..ring.modulus())))
                    .add(
                        &Measure::dirac(&ring, rng.gen_range(1..12i64), 8)
                            .scale(&ring.from_u64(rng.gen_range(1..ring.modulus()))),
                    )
                    .deplete()
                    .map_err(|e| e.to_string())?;
                let chi = if n == 1 {
                    if i % 2 == 0 {
                        CharTable::legendre(phi_meas.ring())
                    } else {
                        // exponents 0 and p − 1 are imprimitive mod p
                        CharTable::teichmuller_power(
                            phi_meas.ring(),
                            1 + (i as u32 % (p as u32 - 2).max(1)),
                        )
                    }
                } else {
                    CharTable::one_unit_exponent(
                        phi_meas.ring(),
                        2,
                        1 + (i as i64 % (p as i64 - 1)),
                    )
                }
                .map_err(|e| e.to_string())?;
                let lhs = phi_meas
                    .twist(&chi)
                    .map_err(|e| e.to_string())?
                    .constant_term()
                    .clone();
                let g = gauss_sum(&chi);
                let mut sum = chi.ring().zero();
                for (u, v) in chi.inverse().entries() {
                    let (ev, _) = phi_meas
                        .eval_root(-(u as i64), chi.n)
                        .map_err(|e| e.to_string())?;
                    sum = sum.add(&v.mul(&ev));
                }
                let rhs = g.mul(&sum).try_div_by_p(chi.n).map_err(|e| e.to_string())?;
                if lhs != rhs {
                    return Err(format!(
                        "p = {p}, n = {n}, fixture {i}: twist disagrees with evaluation formula"
                    ));
                }
            }
        }
    }
    Ok(())
}

fn pow_u64(mut b: u64, mut e: u32, m: u64) -> u64 {
    let mut acc = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = (acc as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        e >>= 1;
    }
    acc
}

/// Criterion 7: class-group axioms and counts, plus Frobenius-exponent
/// norm compatibility across tower levels.
fn c7_class_groups() -> Result<(), String> {
    for (delta, expect_h) in [(-23i64, Some(3u64)), (-47, None), (-71, None), (-891, Some(6))] {
        let data = enumerate(delta, 0).map_err(|e| e.to_string())?;
        if let Some(h) = expect_h {
            if data.h != h {
                return Err(format!("h({delta}) = {} ≠ {h}", data.h));
            }
        }
        let canon = |f: &anticyclo::classgroup::QuadForm| reduce_form(f).unwrap();
        let id = canon(&principal_form(delta));
        let in_table = |f: &anticyclo::classgroup::QuadForm| data.forms.contains(f);
        if !in_table(&id) {
            return Err(format!("Δ = {delta}: identity missing"));
        }
        for f in &data.forms {
            if !in_table(&canon(&f.inverse())) {
                return Err(format!("Δ = {delta}: inverse of {f:?} missing"));
            }
            if canon(&compose(f, &f.inverse()).unwrap()) != id {
                return Err(format!("Δ = {delta}: {f:?} · {f:?}⁻¹ ≠ 1"));
            }
            for g in &data.forms {
                let fg = canon(&compose(f, g).unwrap());
                if !in_table(&fg) {
                    return Err(format!("Δ = {delta}: not closed"));
                }
                if fg != canon(&compose(g, f).unwrap()) {
                    return Err(format!("Δ = {delta}: not commutative"));
                }
                for k in &data.forms {
                    let lhs = canon(&compose(&fg, k).unwrap());
                    let rhs = canon(&compose(f, &canon(&compose(g, k).unwrap())).unwrap());
                    if lhs != rhs {
                        return Err(format!("Δ = {delta}: not associative"));
                    }
                }
            }
        }
    }
    for ell in [5u64, 23] {
        let lo = frobenius_exponent(11, 3, ell, 1).map_err(|e| e.to_string())?;
        let hi = frobenius_exponent(11, 3, ell, 2).map_err(|e| e.to_string())?;
        if hi.k < lo.k {
            return Err(format!("ℓ = {ell}: precision drops up the tower"));
        }
        if hi.a_v % 3u64.pow(lo.k) != lo.a_v {
            return Err(format!(
                "ℓ = {ell}: a_v = {} at n = 2 does not reduce to {} at n = 1",
                hi.a_v, lo.a_v
            ));
        }
    }
    Ok(())
}

/// Criterion 8: Weierstrass round trips, μ/λ additivity, and the
/// grouplike homomorphism property on random data.
fn c8_iwasawa_algebra() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let mut round_trips = 0usize;
    let mut attempts = 0usize;
    while round_trips < 200 {
        attempts += 1;
        if attempts > 1000 {
            return Err("too many undecidable draws for the round trip".into());
        }
        let p = [3u64, 5, 7][attempts % 3];
        let ring = zp(p, 3);
        let coeffs: Vec<_> = (0..6).map(|_| ring.random(&mut rng)).collect();
        let f = IwasawaSeries::new(&ring, coeffs);
        let rep = mu_lambda(&f);
        if !(rep.mu_decided && rep.lambda_decided) {
            continue;
        }
        let (mu, pp, uu) = weierstrass_prep(&f).map_err(|e| e.to_string())?;
        if Some(mu) != rep.mu {
            return Err(format!("p = {p}: prep μ = {mu} ≠ {:?}", rep.mu));
        }
        let lhs = f.div_by_uniformizer(mu).map_err(|e| e.to_string())?;
        if lhs != pp.mul(&uu) {
            return Err(format!("p = {p}: Weierstrass round trip failed"));
        }
        round_trips += 1;
    }
    let mut products = 0usize;
    attempts = 0;
    while products < 200 {
        attempts += 1;
        if attempts > 2000 {
            return Err("too many undecidable draws for additivity".into());
        }
        let p = [3u64, 5, 7][attempts % 3];
        let ring = zp(p, 5);
        // λ ≤ 3 for each factor, so λ(fg) ≤ 6 fits inside the window of 10
        let gen = |rng: &mut ChaCha8Rng| {
            let mut c: Vec<_> = (0..4).map(|_| ring.random(rng)).collect();
            c.resize(10, ring.zero());
            IwasawaSeries::new(&ring, c)
        };
        let f = gen(&mut rng);
        let g = gen(&mut rng);
        let (rf, rg, rfg) = (mu_lambda(&f), mu_lambda(&g), mu_lambda(&f.mul(&g)));
        let all = [&rf, &rg, &rfg];
        if all.iter().any(|r| !(r.mu_decided && r.lambda_decided)) {
            continue;
        }
        if rfg.mu != Some(rf.mu.unwrap() + rg.mu.unwrap())
            || rfg.lambda != Some(rf.lambda.unwrap() + rg.lambda.unwrap())
        {
            return Err(format!("p = {p}: μ/λ not additive on a product"));
        }
        products += 1;
    }
    for i in 0..200u64 {
        let p = [3u64, 5, 7][(i % 3) as usize];
        let ring = zp(p, 3);
        let a = rng.gen_range(-200i64..200);
        let b = rng.gen_range(-200i64..200);
        let lhs = grouplike_pow_i64(&ring, a + b, 6).map_err(|e| e.to_string())?;
        let rhs = grouplike_pow_i64(&ring, a, 6)
            .map_err(|e| e.to_string())?
            .mul(&grouplike_pow_i64(&ring, b, 6).map_err(|e| e.to_string())?);
        if lhs != rhs {
            return Err(format!("p = {p}: (1+T)^{{a+b}} ≠ (1+T)^a (1+T)^b"));
        }
    }
    Ok(())
}

/// Criterion 9: the λ-budget equality on ≥ 10 fixture pairs spanning both
/// level cases.
fn c9_lambda_budget() -> Result<(), String> {
    let mut pairs = 0usize;
    let mut seen_divides = [false, false];
    let mut seed = 9000u64;
    while pairs < 12 {
        seed += 1;
        if seed > 9060 {
            return Err(format!("only {pairs} decidable budget pairs found"));
        }
        let h = 1 + 2 * (seed % 2);
        let divides = seed % 4 < 2;
        let fx = match cyclic_fixture(
            &zp(3, 6),
            h,
            if h > 1 { 1 } else { 0 },
            1,
            1,
            6,
            divides,
            seed,
        ) {
            Ok(fx) => fx,
            Err(e) => return Err(e.to_string()),
        };
        let (lhs, rhs) = match stabilization_lambda_budget(&fx) {
            Ok(v) => v,
            Err(Error::Undecidable(_)) => continue,
            Err(e) => return Err(e.to_string()),
        };
        if lhs != rhs {
            return Err(format!(
                "seed {seed}: Σλ(𝒫) + λ(ℒ₁) = {lhs} ≠ {rhs} = λ(ℒ₂)"
            ));
        }
        seen_divides[divides as usize] = true;
        pairs += 1;
    }
    if !(seen_divides[0] && seen_divides[1]) {
        return Err("budget pairs did not span both level cases".into());
    }
    Ok(())
}

/// Criterion 10: CLI determinism and the exit-code contract.
fn c10_cli_contract() -> Result<(), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let model_path = dir.path().join("model.json");
    let model = ModelFile {
        schema_version: SCHEMA_VERSION,
        ring: RingDescriptor {
            p: 3,
            precision: 5,
            poly: vec![],
            ramification: 1,
            uniformizer: vec![],
        },
        family_ring: None,
        class_count: 1,
        shift: 0,
        depth: 1,
        r: 1,
        window: 6,
        divides_level: false,
        seed: 11,
        dirac: Some(1),
    };
    std::fs::write(&model_path, to_canonical_json(&model).unwrap()).map_err(|e| e.to_string())?;
    let form_path = dir.path().join("form.json");
    let form = FormFile::from_lmfdb(
        &zp(5, 4),
        2,
        11,
        &[1, -2, -1, 2, 1, 2, -2, 0, -2, -2, 1, -2, 4, 4, -1, -4, -2, 4, 0, 2],
        true,
    )
    .map_err(|e| e.to_string())?;
    std::fs::write(&form_path, to_canonical_json(&form).unwrap()).map_err(|e| e.to_string())?;
    let bad_req_path = dir.path().join("frob.json");
    let bad_req = FrobRequest {
        schema_version: SCHEMA_VERSION,
        d_k: 11,
        p: 3,
        ell: 5,
        n: 1,
        delta_n: Some(-33),
    };
    std::fs::write(&bad_req_path, to_canonical_json(&bad_req).unwrap())
        .map_err(|e| e.to_string())?;

    let model_s = model_path.to_str().unwrap();
    let form_s = form_path.to_str().unwrap();
    let bad_req_s = bad_req_path.to_str().unwrap();
    let matrix: Vec<(Vec<&str>, i32)> = vec![
        (vec!["heegner", "validate", "--level", "1", "--weight", "2", "--d-k", "7", "--p", "11"], 0),
        (vec!["heegner", "validate", "--level", "1", "--weight", "2", "--d-k", "7", "--p", "5"], 1),
        (vec!["iwasawa", "invariants", "--p", "3", "--coeffs", "3,0,1"], 0),
        (vec!["classgroup", "enumerate", "--delta", "-23"], 0),
        (vec!["classgroup", "frobenius", "--d-k", "11", "--p", "3", "--ell", "5", "--n", "2"], 0),
        (vec!["classgroup", "frobenius", "--request", bad_req_s], 2),
        (vec!["euler-factor", "--p", "5", "--ell", "7", "--a-ell", "2", "--r", "1", "--a-v", "3"], 0),
        (vec!["forms", "stabilize", form_s, "--ell", "3"], 0),
        (vec!["forms", "check-congruence", form_s, form_s, "--modulus", "2"], 0),
        (vec!["forms", "check-congruence", "/nonexistent.json", form_s, "--modulus", "2"], 2),
        (vec!["lvalue", "eval", model_s], 0),
        (vec!["verify", "stabilization", model_s], 0),
        (vec!["verify", "congruence", model_s, "--modulus", "2"], 0),
        (vec!["verify", "lambda-budget", model_s], 0),
    ];
    let bin = env!("CARGO_BIN_EXE_anticyclo");
    for (args, expected) in &matrix {
        let run = || {
            Command::new(bin)
                .args(args.iter())
                .arg("--format")
                .arg("record")
                .output()
                .map_err(|e| e.to_string())
        };
        let first = run()?;
        let second = run()?;
        let code = first.status.code().unwrap_or(-1);
        if code != *expected {
            return Err(format!(
                "{args:?}: exit {code} ≠ {expected}; stderr: {}",
                String::from_utf8_lossy(&first.stderr)
            ));
        }
        if first.stdout != second.stdout || second.status.code() != Some(code) {
            return Err(format!("{args:?}: report not byte-identical across runs"));
        }
        if code == 0 && first.stdout.is_empty() {
            return Err(format!("{args:?}: empty report"));
        }
    }
    Ok(())
}

#[test]
fn acceptance() {
    let criteria: Vec<(&str, fn() -> Result<(), String>)> = vec![
        ("euler-factor factorization of stabilized L-values", c1_stabilization_identities),
        ("congruence propagation with negative controls", c2_congruence_propagation),
        ("mixed-weight Legendre twist case", c3_legendre_case),
        ("Euler factors have mu = 0 and scanned lambda", c4_euler_mu_zero),
        ("theta inverse limit identity and stability", c5_theta_inverse),
        ("Mahler dictionary: moments, depletion, twists", c6_mahler_dictionary),
        ("class-group axioms, counts, Frobenius towers", c7_class_groups),
        ("Iwasawa algebra: Weierstrass, additivity, grouplikes", c8_iwasawa_algebra),
        ("lambda-budget equality across stabilization", c9_lambda_budget),
        ("CLI determinism and exit-code contract", c10_cli_contract),
    ];
    let mut failures = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let result = f();
        let elapsed = t.elapsed();
        match &result {
            Ok(()) => println!("criterion {:2} ({name}): PASS [{elapsed:.1?}]", i + 1),
            Err(msg) => {
                println!("criterion {:2} ({name}): FAIL [{elapsed:.1?}] — {msg}", i + 1);
                failures.push(format!("{}: {msg}", i + 1));
            }
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
