//! Finite CM evaluation engine: anticyclotomic L-values as finite sums
//! ℒ(ρ) = Σ_i N(𝔞_i)^{−r} ρ([𝔞_i]) ∫ ρ_p(x) x^{−r} df̂_𝔞ᵢ^♭, the V_ℓ
//! action on form families, ℓ-stabilization, the quadratic value-level
//! twist, and the verification suites for the stabilization identity
//! ℒ(V_ℓ^*f)(ρ) = ρ(v̄) ℓ^{−r} ℒ(f)(ρ), the Euler-corrected congruence,
//! and finite-layer μ/λ extraction by character interpolation.
//!
//! Class-group data is finite and fixture-supplied: labels 𝔞₁..𝔞_h with
//! unit norms, exponents α_i = N(𝔞_i)^{−1}√(−D_K)^{−1}, and for each
//! split prime the permutation π_ℓ realizing 𝔞 ↦ v̄^{−1}𝔞. Exactness of
//! the identities rests on the coherence constraints
//! N(π_ℓ 𝔞) ≡ ℓ^{−1} N(𝔞) and ρ([π_ℓ 𝔞]) = ρ(v̄)^{−1} ρ([𝔞]), enforced
//! at the stored working precision.

use crate::cyclo::CycloElem;
use crate::error::Error;
use crate::iwasawa::{mu_lambda, InvariantReport, IwasawaSeries};
use crate::mahler::{CharTable, Measure};
use crate::padic::{
    legendre_u64, zp_inverse, zp_sqrt_i64, PadicElem, Ring, Valuation, ZpInt,
};
use crate::Result;
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Data attached to one split prime ℓ: its norm value as a Z_p unit,
/// the label permutation π_ℓ, and whether ℓ divides the level.
#[derive(Debug, Clone)]
pub struct EllData {
    pub value: ZpInt,
    pub perm: Vec<usize>,
    pub divides_level: bool,
}

/// Class labels, norms, and the substitution exponents
/// α_i = N(𝔞_i)^{−1} s^{−1} with s = √(−D_K) in Z_p.
#[derive(Debug, Clone)]
pub struct CMContext {
    ring: Ring,
    pub d_k: u64,
    norms: Vec<ZpInt>,
    s: ZpInt,
    alphas: Vec<ZpInt>,
    pub primes: BTreeMap<u64, EllData>,
}

impl CMContext {
    /// Validates unit norms, bijective permutations, and the norm
    /// coherence N(π_ℓ 𝔞_i) · ℓ ≡ N(𝔞_i) at the common working
    /// precision of the supplied data.
    pub fn new(
        ring: &Ring,
        d_k: u64,
        norms: Vec<ZpInt>,
        primes: BTreeMap<u64, EllData>,
    ) -> Result<CMContext> {
        if ring.degree() != 1 || ring.ramification() != 1 {
            return Err(Error::BadRing(
                "the CM model works over an unramified Z_p base".into(),
            ));
        }
        let p = ring.p();
        if norms.is_empty() {
            return Err(Error::ModelMismatch("need at least one class label".into()));
        }
        let h = norms.len();
        let mut work = u32::MAX;
        for n in &norms {
            if n.p != p {
                return Err(Error::ModelMismatch("norm prime mismatch".into()));
            }
            if !n.is_unit() {
                return Err(Error::ModelMismatch("class norms must be p-units".into()));
            }
            work = work.min(n.prec);
        }
        for d in primes.values() {
            if d.value.p != p || !d.value.is_unit() {
                return Err(Error::ModelMismatch("ℓ-norm must be a p-unit".into()));
            }
            work = work.min(d.value.prec);
        }
        if work < ring.precision() {
            return Err(Error::PrecisionExhausted(format!(
                "context data known mod p^{work}, ring needs p^{}",
                ring.precision()
            )));
        }
        let s = zp_sqrt_i64(p, work, -(d_k as i64))?;
        let alphas = norms
            .iter()
            .map(|n| zp_inverse(&n.mul(&s)))
            .collect::<Result<Vec<_>>>()?;
        for (ell, d) in &primes {
            let mut seen = vec![false; h];
            if d.perm.len() != h {
                return Err(Error::MissingPermutation(*ell));
            }
            for &j in &d.perm {
                if j >= h || seen[j] {
                    return Err(Error::ModelMismatch(format!(
                        "π_{ell} is not a bijection on the labels"
                    )));
                }
                seen[j] = true;
            }
        }
        Ok(CMContext {
            ring: ring.clone(),
            d_k,
            norms,
            s,
            alphas,
            primes,
        })
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }
    pub fn class_count(&self) -> usize {
        self.norms.len()
    }

    /// Norm coherence N(π_ℓ 𝔞_i)·ℓ ≡ N(𝔞_i) at the stored working
    /// precision. Identities verified against this prime are exact only
    /// when this holds, so the verification routines demand it; a bare
    /// V_ℓ relabeling does not.
    pub fn check_coherence(&self, ell: u64) -> Result<()> {
        let d = self
            .primes
            .get(&ell)
            .ok_or(Error::MissingPermutation(ell))?;
        let work = self.norms.iter().map(|n| n.prec).min().unwrap().min(d.value.prec);
        let modulus = BigUint::from(self.ring.p()).pow(work);
        for i in 0..self.class_count() {
            let lhs = (&self.norms[d.perm[i]].rep * &d.value.rep) % &modulus;
            if lhs != &self.norms[i].rep % &modulus {
                return Err(Error::ModelMismatch(format!(
                    "norm coherence N(π 𝔞_{i})·ℓ ≡ N(𝔞_{i}) fails for ℓ-id {ell}"
                )));
            }
        }
        Ok(())
    }
    pub fn sqrt_disc(&self) -> &ZpInt {
        &self.s
    }
    pub fn alpha(&self, i: usize) -> &ZpInt {
        &self.alphas[i]
    }
    pub fn norm(&self, i: usize) -> &ZpInt {
        &self.norms[i]
    }

    /// N(𝔞_i)^{−r} reduced into a ring at precision m.
    fn norm_pow_neg(&self, i: usize, r: u32, ring: &Ring) -> PadicElem {
        unit_pow_neg(&self.norms[i], r, ring)
    }
}

/// u^{−r} mod p^M as an element of the given Z_p ring.
pub(crate) fn unit_pow_neg(u: &ZpInt, r: u32, ring: &Ring) -> PadicElem {
    let m = ring.precision();
    let modulus = BigUint::from(u.p).pow(m);
    let inv = zp_inverse(&ZpInt::new(u.p, m, u.rep.clone())).expect("unit");
    let v = inv.rep.modpow(&BigUint::from(r), &modulus);
    ring.from_u64((v % BigUint::from(u.p.pow(m))).try_into().unwrap())
}

/// u^{e} mod p^M as u64 (p^M < 2^62 by the ring invariant).
fn unit_pow(u: &ZpInt, e: u64, m: u32) -> u64 {
    let modulus = BigUint::from(u.p).pow(m);
    let v = u.rep.modpow(&BigUint::from(e), &modulus);
    v.try_into().unwrap()
}

/// One Serre–Tate expansion measure per class label, plus the weight
/// parameter r and a formal level tag that V_ℓ multiplies by ℓ.
#[derive(Debug, Clone)]
pub struct FormFamily {
    pub r: u32,
    pub level_tag: u64,
    measures: Vec<Measure<PadicElem>>,
}

impl FormFamily {
    pub fn new(r: u32, level_tag: u64, measures: Vec<Measure<PadicElem>>) -> Result<FormFamily> {
        if measures.is_empty() {
            return Err(Error::ModelMismatch("empty form family".into()));
        }
        let w = measures[0].t_precision();
        let m = measures[0].precision();
        let d = measures[0].is_depleted();
        for meas in &measures {
            if meas.t_precision() != w || meas.precision() != m || meas.is_depleted() != d {
                return Err(Error::ModelMismatch(
                    "family measures must share window, precision, and depletion status".into(),
                ));
            }
        }
        Ok(FormFamily {
            r,
            level_tag,
            measures,
        })
    }

    pub fn measures(&self) -> &[Measure<PadicElem>] {
        &self.measures
    }
    pub fn class_count(&self) -> usize {
        self.measures.len()
    }
    pub fn window(&self) -> usize {
        self.measures[0].t_precision()
    }
    pub fn ring(&self) -> &Ring {
        self.measures[0].ring()
    }
}

/// A locally algebraic character in the finite model: local component
/// ρ_p tabulated mod p^n, one root-of-unity value per class label, and
/// the value ρ(v̄) for each split prime of interest.
#[derive(Debug, Clone)]
pub struct CharacterModel {
    pub label: String,
    pub local: CharTable,
    pub class_values: Vec<CycloElem>,
    pub vbar: BTreeMap<u64, CycloElem>,
}

impl CharacterModel {
    pub fn n(&self) -> u32 {
        self.local.n
    }

    /// Checks the value coherence ρ([π_ℓ 𝔞]) = ρ(v̄)^{−1} ρ([𝔞]) for
    /// every split prime the model carries a v̄-value for.
    pub fn validate(&self, ctx: &CMContext) -> Result<()> {
        if self.class_values.len() != ctx.class_count() {
            return Err(Error::ModelMismatch(format!(
                "character {} has {} class values, context has {} labels",
                self.label,
                self.class_values.len(),
                ctx.class_count()
            )));
        }
        let cring = self.local.ring();
        for v in &self.class_values {
            if !(*v.ring() == *cring) {
                return Err(Error::RingMismatch);
            }
        }
        for (ell, vb) in &self.vbar {
            let data = ctx
                .primes
                .get(ell)
                .ok_or(Error::MissingPermutation(*ell))?;
            if !(*vb.ring() == *cring) {
                return Err(Error::RingMismatch);
            }
            for i in 0..ctx.class_count() {
                let lhs = self.class_values[data.perm[i]].mul(vb);
                if lhs != self.class_values[i] {
                    return Err(Error::ModelMismatch(format!(
                        "value coherence ρ([π 𝔞_{i}]) ρ(v̄) = ρ([𝔞_{i}]) fails for {} at ℓ-id {ell}",
                        self.label
                    )));
                }
            }
        }
        Ok(())
    }
}

/// ℒ(F)(ρ) = Σ_i N(𝔞_i)^{−r} ρ([𝔞_i]) · c_i, where c_i is the constant
/// term of ((f_i ∘ x↦α_i x)^♭ · x^{−r}) ⊗ ρ_p. Costs 1 + n digits of
/// precision (depletion + twist averaging).
pub fn l_value(family: &FormFamily, ctx: &CMContext, rho: &CharacterModel) -> Result<CycloElem> {
    if family.class_count() != ctx.class_count() {
        return Err(Error::ModelMismatch(
            "family and context label counts differ".into(),
        ));
    }
    rho.validate(ctx)?;
    let ring = family.ring();
    let m = ring.precision();
    let n = rho.n();
    if m < n + 2 {
        return Err(Error::PrecisionExhausted(format!(
            "l_value needs M ≥ n + 2 = {}, have {m}",
            n + 2
        )));
    }
    let chi = rho.local.with_precision(m - 1)?;
    let mut acc: Option<CycloElem> = None;
    for i in 0..family.class_count() {
        let chain = family.measures()[i]
            .subst_pow(ctx.alpha(i))?
            .deplete()?
            .theta_neg(family.r)?
            .twist(&chi)?;
        let v = chain.constant_term().clone();
        let out_ring = v.ring().clone();
        let base = out_ring.base().clone();
        let scalar = ctx.norm_pow_neg(i, family.r, &base);
        let cls = self::reduce_cyclo(&rho.class_values[i], out_ring.precision())?;
        let term = v.mul(&cls).base_mul(&scalar);
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term),
        });
    }
    Ok(acc.expect("nonempty family"))
}

fn reduce_cyclo(x: &CycloElem, m: u32) -> Result<CycloElem> {
    if x.ring().precision() == m {
        Ok(x.clone())
    } else {
        x.reduce_precision(m)
    }
}

/// (V_ℓ^* F)_𝔞 := f̂_{π_ℓ(𝔞)}(t^ℓ): relabel along π_ℓ and push forward
/// by x ↦ ℓx.
pub fn v_action(family: &FormFamily, ell: u64, ctx: &CMContext) -> Result<FormFamily> {
    let data = ctx
        .primes
        .get(&ell)
        .ok_or(Error::MissingPermutation(ell))?;
    let mut measures = Vec::with_capacity(family.class_count());
    for i in 0..family.class_count() {
        measures.push(family.measures()[data.perm[i]].subst_pow(&data.value)?);
    }
    FormFamily::new(family.r, family.level_tag.saturating_mul(ell), measures)
}

/// F − a_ℓ V_ℓ^* F (+ ℓ^{2r−1} V_ℓ^* V_ℓ^* F when ℓ ∤ N).
pub fn stabilized_family(
    family: &FormFamily,
    ell: u64,
    a_ell: &PadicElem,
    ctx: &CMContext,
) -> Result<FormFamily> {
    let data = ctx
        .primes
        .get(&ell)
        .ok_or(Error::MissingPermutation(ell))?;
    let divides = data.divides_level;
    let vf = v_action(family, ell, ctx)?;
    let mut measures = Vec::with_capacity(family.class_count());
    if divides {
        for (f, v) in family.measures().iter().zip(vf.measures()) {
            measures.push(f.sub(&v.scale(a_ell)));
        }
    } else {
        let m = family.ring().precision();
        let lpow = family
            .ring()
            .from_u64(unit_pow(&data.value, 2 * family.r as u64 - 1, m));
        let v2f = v_action(&vf, ell, ctx)?;
        for ((f, v), v2) in family.measures().iter().zip(vf.measures()).zip(v2f.measures()) {
            measures.push(f.sub(&v.scale(a_ell)).add(&v2.scale(&lpow)));
        }
    }
    FormFamily::new(family.r, vf.level_tag, measures)
}

/// One verified identity instance, machine-readable. Valuations are in
/// p-units of the value ring; `None` means saturated (exact at the
/// tracked precision).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub identity: String,
    pub character: String,
    pub required_valuation: Option<u32>,
    pub achieved_valuation: Option<u32>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilizationReport {
    pub checks: Vec<IdentityCheck>,
}

impl StabilizationReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Valuation of a cyclotomic element converted to p-units (floor), with
/// `None` for saturated.
fn p_unit_valuation(x: &CycloElem) -> Option<u32> {
    match x.valuation() {
        Valuation::Saturated => None,
        Valuation::Finite(v) => Some(v / x.ring().phi() as u32),
    }
}

fn exactness_check(identity: &str, character: &str, diff: &CycloElem) -> IdentityCheck {
    let achieved = p_unit_valuation(diff);
    IdentityCheck {
        identity: identity.to_string(),
        character: character.to_string(),
        required_valuation: None,
        achieved_valuation: achieved,
        pass: achieved.is_none(),
    }
}

/// The Euler factor of v̄ at value level:
/// 1 − a_ℓ ℓ^{−r} ρ(v̄) (+ ℓ^{−1} ρ(v̄)² when ℓ ∤ N), in the ring of ρ(v̄).
fn euler_value_factor(
    a_ell: &PadicElem,
    r: u32,
    ell_value: &ZpInt,
    divides: bool,
    vbar: &CycloElem,
) -> Result<CycloElem> {
    let cring = vbar.ring().clone();
    let base = cring.base().clone();
    let m = base.precision();
    let lr = unit_pow(&zp_inverse(ell_value)?, r as u64, m);
    let a = a_ell.reduce_precision(m)?;
    let mut f = cring.one().sub(&vbar.scalar_mul(lr).base_mul(&a));
    if !divides {
        let linv = unit_pow(&zp_inverse(ell_value)?, 1, m);
        f = f.add(&vbar.mul(vbar).scalar_mul(linv));
    }
    Ok(f)
}

/// Verify, per character, the V-identity
/// ℒ(V_ℓ^* F)(ρ) = ρ(v̄) ℓ^{−r} ℒ(F)(ρ) and the stabilization identity
/// ℒ(F^{(ℓ)})(ρ) = (1 − a_ℓ ℓ^{−r} ρ(v̄) [+ ℓ^{−1} ρ(v̄)²]) ℒ(F)(ρ).
/// Both must be exact at the tracked precision (residual saturated).
pub fn verify_stabilization(
    family: &FormFamily,
    ell: u64,
    a_ell: &PadicElem,
    ctx: &CMContext,
    rhos: &[CharacterModel],
) -> Result<StabilizationReport> {
    ctx.check_coherence(ell)?;
    let data = ctx
        .primes
        .get(&ell)
        .ok_or(Error::MissingPermutation(ell))?
        .clone();
    let vf = v_action(family, ell, ctx)?;
    let stab = stabilized_family(family, ell, a_ell, ctx)?;
    let mut checks = Vec::new();
    for rho in rhos {
        let vbar_full = rho.vbar.get(&ell).ok_or_else(|| {
            Error::ModelMismatch(format!("character {} has no ρ(v̄) for ℓ-id {ell}", rho.label))
        })?;
        let l0 = l_value(family, ctx, rho)?;
        let lv = l_value(&vf, ctx, rho)?;
        let ls = l_value(&stab, ctx, rho)?;
        let mv = l0.ring().precision();
        let vbar = reduce_cyclo(vbar_full, mv)?;
        let lr = unit_pow(&zp_inverse(&data.value)?, family.r as u64, mv);
        let expected_v = l0.mul(&vbar).scalar_mul(lr);
        checks.push(exactness_check(
            "v-action",
            &rho.label,
            &lv.sub(&expected_v),
        ));
        let factor = euler_value_factor(a_ell, family.r, &data.value, data.divides_level, &vbar)?;
        checks.push(exactness_check(
            "stabilization",
            &rho.label,
            &ls.sub(&factor.mul(&l0)),
        ));
    }
    Ok(StabilizationReport { checks })
}

/// Twist by ψ = (·|p): local component multiplied by the Legendre
/// character, class values by (N(𝔞_i)|p), and v̄-values by (ℓ|p).
pub fn quad_twist_value(rho: &CharacterModel, ctx: &CMContext) -> Result<CharacterModel> {
    let local = rho.local.twist_quadratic()?;
    let cring = local.ring().clone();
    let p = cring.p();
    let lift = |x: &CycloElem| -> Result<CycloElem> {
        if x.ring().level() == cring.level() {
            Ok(x.clone())
        } else {
            cring.embed(x)
        }
    };
    let sign_apply = |x: CycloElem, s: i8| if s == 1 { x } else { x.neg() };
    let mut class_values = Vec::with_capacity(rho.class_values.len());
    for (i, v) in rho.class_values.iter().enumerate() {
        let s = legendre_u64(ctx.norm(i).value_mod(1), p);
        class_values.push(sign_apply(lift(v)?, s));
    }
    let mut vbar = BTreeMap::new();
    for (ell, v) in &rho.vbar {
        let data = ctx
            .primes
            .get(ell)
            .ok_or(Error::MissingPermutation(*ell))?;
        let s = legendre_u64(data.value.value_mod(1), p);
        vbar.insert(*ell, sign_apply(lift(v)?, s));
    }
    Ok(CharacterModel {
        label: format!("{}*psi", rho.label),
        local,
        class_values,
        vbar,
    })
}

/// Weight relation of r₁, r₂ mod φ(p^{m′}).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightRelation {
    Equal,
    LegendreTwist,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CongruenceValueReport {
    pub m: u32,
    pub weight_relation: WeightRelation,
    pub checks: Vec<IdentityCheck>,
}

impl CongruenceValueReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Euler-correction data for one split prime shared by the two sides.
#[derive(Debug, Clone)]
pub struct EulerCorrection {
    pub ell: u64,
    pub a1: PadicElem,
    pub a2: PadicElem,
}

/// Bring two cyclotomic values into a common ring: embed the lower
/// level into the higher, then reduce both to the minimum precision.
fn align(a: &CycloElem, b: &CycloElem) -> Result<(CycloElem, CycloElem)> {
    let m = a.ring().precision().min(b.ring().precision());
    let (mut x, mut y) = (reduce_cyclo(a, m)?, reduce_cyclo(b, m)?);
    if x.ring().level() < y.ring().level() {
        x = y.ring().embed(&x)?;
    } else if y.ring().level() < x.ring().level() {
        y = x.ring().embed(&y)?;
    }
    Ok((x, y))
}

/// Euler-corrected value congruence: for each listed character, check
/// v(∏𝒫_v̄(F₁)·ℒ(F₁)(ρ) − ∏𝒫_v̄(F₂)·ℒ(F₂)(ρ′)) ≥ m − (n + 1), where
/// ρ′ = ρ in the equal-weight case and ψρ in the Legendre case, and
/// n + 1 is the documented evaluation loss (twist + depletion).
/// Fails with NotCongruentInputs when the family measures themselves
/// are not congruent mod ϖ^m or the weights are incompatible.
pub fn verify_congruence(
    f1: &FormFamily,
    f2: &FormFamily,
    m: u32,
    ctx: &CMContext,
    rhos: &[CharacterModel],
    euler: &[EulerCorrection],
) -> Result<CongruenceValueReport> {
    if f1.class_count() != f2.class_count() || f1.window() != f2.window() {
        return Err(Error::ModelMismatch(
            "families have different shapes".into(),
        ));
    }
    for (a, b) in f1.measures().iter().zip(f2.measures()) {
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            let ok = match x.sub(y).valuation() {
                Valuation::Saturated => true,
                Valuation::Finite(v) => v >= m,
            };
            if !ok {
                return Err(Error::NotCongruentInputs);
            }
        }
    }
    let p = ctx.ring().p();
    // base is Z_p (e = 1), so the ϖ-exponent m is already a p-exponent
    let phi = (p - 1) * p.pow(m - 1);
    let diff_r = (f1.r as i64 - f2.r as i64).rem_euclid(phi as i64) as u64;
    let relation = if diff_r == 0 {
        WeightRelation::Equal
    } else if 2 * diff_r % phi == 0 {
        WeightRelation::LegendreTwist
    } else {
        return Err(Error::NotCongruentInputs);
    };
    for corr in euler {
        ctx.check_coherence(corr.ell)?;
    }
    let mut checks = Vec::new();
    for rho in rhos {
        let rho2 = match relation {
            WeightRelation::Equal => rho.clone(),
            WeightRelation::LegendreTwist => quad_twist_value(rho, ctx)?,
        };
        let mut v1 = l_value(f1, ctx, rho)?;
        let mut v2 = l_value(f2, ctx, &rho2)?;
        for corr in euler {
            let data = ctx
                .primes
                .get(&corr.ell)
                .ok_or(Error::MissingPermutation(corr.ell))?;
            let vb1 = reduce_cyclo(
                rho.vbar
                    .get(&corr.ell)
                    .ok_or_else(|| Error::ModelMismatch("missing ρ(v̄)".into()))?,
                v1.ring().precision(),
            )?;
            let vb2 = reduce_cyclo(
                rho2.vbar
                    .get(&corr.ell)
                    .ok_or_else(|| Error::ModelMismatch("missing twisted ρ(v̄)".into()))?,
                v2.ring().precision(),
            )?;
            v1 = v1.mul(&euler_value_factor(&corr.a1, f1.r, &data.value, data.divides_level, &vb1)?);
            v2 = v2.mul(&euler_value_factor(&corr.a2, f2.r, &data.value, data.divides_level, &vb2)?);
        }
        let (x, y) = align(&v1, &v2)?;
        let loss = rho.n().max(rho2.n()) + 1;
        let required = m.saturating_sub(loss);
        let achieved = p_unit_valuation(&x.sub(&y));
        let pass = achieved.map_or(true, |v| v >= required);
        checks.push(IdentityCheck {
            identity: "euler-corrected congruence".into(),
            character: rho.label.clone(),
            required_valuation: Some(required),
            achieved_valuation: achieved,
            pass,
        });
    }
    Ok(CongruenceValueReport {
        m,
        weight_relation: relation,
        checks,
    })
}

/// Finite Fourier inversion on the cyclic quotient of order p^k:
/// given the values L_j at the p^k characters with χ_j(γ₀) = ζ_{p^k}^j
/// (indexed by j, all in one cyclotomic ring of level ≥ k), recover the
/// unique element Σ_g c_g (1+T)^g of O⟦T⟧/((1+T)^{p^k} − 1) with those
/// evaluations via c_g = p^{−k} Σ_j ζ^{−jg} L_j, descend the
/// coefficients to O (k digits are spent on the division), and report
/// its window μ/λ invariants.
pub fn interpolate_truncation(
    values: &[CycloElem],
    k: u32,
) -> Result<(IwasawaSeries, InvariantReport)> {
    if values.is_empty() {
        return Err(Error::IncompleteCharacterTable("no values supplied".into()));
    }
    let cring = values[0].ring().clone();
    let p = cring.p();
    let pk = p.pow(k);
    if values.len() as u64 != pk {
        return Err(Error::IncompleteCharacterTable(format!(
            "need all {pk} character values, got {}",
            values.len()
        )));
    }
    for v in values {
        if !(*v.ring() == cring) {
            return Err(Error::RingMismatch);
        }
    }
    if (cring.level() as u32) < k {
        return Err(Error::IncompleteCharacterTable(format!(
            "values must live at cyclotomic level ≥ {k}"
        )));
    }
    // ζ_{p^k} = ζ_{p^lvl}^{p^{lvl−k}}
    let scale = p.pow(cring.level() - k) as i64;
    let mut gamma_coeffs = Vec::with_capacity(pk as usize);
    for g in 0..pk {
        let mut sum = cring.zero();
        for (j, v) in values.iter().enumerate() {
            let e = -((j as u64 * g % pk) as i64) * scale;
            sum = sum.add(&v.mul(&cring.zeta_pow(e)));
        }
        let c = sum.try_div_by_p(k)?;
        gamma_coeffs.push(c.to_base()?);
    }
    // convert from the grouplike basis (1+T)^g to powers of T
    let ring = gamma_coeffs[0].ring().clone();
    let n = pk as usize;
    let mut coeffs = vec![ring.zero(); n];
    let pm = BigUint::from(ring.modulus());
    for (g, cg) in gamma_coeffs.iter().enumerate() {
        // (1+T)^g truncated at T^{p^k}: exact binomial coefficients of
        // a nonnegative integer exponent g < p^k, reduced mod p^M
        let mut b = BigUint::from(1u32);
        for t in 0..=g.min(n - 1) {
            if t > 0 {
                b = b * BigUint::from((g - t + 1) as u64) / BigUint::from(t as u64);
            }
            let bm: u64 = (&b % &pm).try_into().unwrap();
            coeffs[t] = coeffs[t].add(&cg.scalar_mul(bm));
        }
    }
    let series = IwasawaSeries::new(&ring, coeffs);
    let report = mu_lambda(&series);
    Ok((series, report))
}

/// Σλ over Euler factors plus λ of the truncated L-series, per side;
/// requires every input decided with μ = 0.
pub fn lambda_budget(eulers: &[InvariantReport], trunc: &InvariantReport) -> Result<u32> {
    let mut total = 0u32;
    for rep in eulers.iter().chain(std::iter::once(trunc)) {
        if !rep.mu_decided || !rep.lambda_decided {
            return Err(Error::Undecidable(
                "λ-budget needs decided invariants on every factor".into(),
            ));
        }
        if rep.mu != Some(0) {
            return Err(Error::Undecidable(
                "λ-budget is defined only when μ = 0".into(),
            ));
        }
        total += rep.lambda.expect("decided λ");
    }
    Ok(total)
}
