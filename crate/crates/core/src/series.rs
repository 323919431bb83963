//! A small coefficient-ring abstraction so truncated series and measures
//! can carry either base-ring elements or cyclotomic-extension elements.

use crate::cyclo::CycloElem;
use crate::padic::PadicElem;
use crate::Result;

/// Ring element usable as a series coefficient. The `*_like` constructors
/// produce constants in the same ring as `self`, which lets generic code
/// avoid threading ring handles.
pub trait Coeff: Clone + PartialEq + std::fmt::Debug {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn scalar_mul(&self, k: u64) -> Self;
    fn is_zero(&self) -> bool;
    /// Exact division by p^k, landing at precision M − k.
    fn try_div_by_p(&self, k: u32) -> Result<Self>;
    fn reduce_precision(&self, m: u32) -> Result<Self>;
    fn precision(&self) -> u32;
    fn prime(&self) -> u64;
}

impl Coeff for PadicElem {
    fn zero_like(&self) -> Self {
        self.ring().zero()
    }
    fn one_like(&self) -> Self {
        self.ring().one()
    }
    fn add(&self, other: &Self) -> Self {
        PadicElem::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        PadicElem::sub(self, other)
    }
    fn neg(&self) -> Self {
        PadicElem::neg(self)
    }
    fn mul(&self, other: &Self) -> Self {
        PadicElem::mul(self, other)
    }
    fn scalar_mul(&self, k: u64) -> Self {
        PadicElem::scalar_mul(self, k)
    }
    fn is_zero(&self) -> bool {
        PadicElem::is_zero(self)
    }
    fn try_div_by_p(&self, k: u32) -> Result<Self> {
        PadicElem::try_div_by_p(self, k)
    }
    fn reduce_precision(&self, m: u32) -> Result<Self> {
        PadicElem::reduce_precision(self, m)
    }
    fn precision(&self) -> u32 {
        self.ring().precision()
    }
    fn prime(&self) -> u64 {
        self.ring().p()
    }
}

impl Coeff for CycloElem {
    fn zero_like(&self) -> Self {
        self.ring().zero()
    }
    fn one_like(&self) -> Self {
        self.ring().one()
    }
    fn add(&self, other: &Self) -> Self {
        CycloElem::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        CycloElem::sub(self, other)
    }
    fn neg(&self) -> Self {
        CycloElem::neg(self)
    }
    fn mul(&self, other: &Self) -> Self {
        CycloElem::mul(self, other)
    }
    fn scalar_mul(&self, k: u64) -> Self {
        CycloElem::scalar_mul(self, k)
    }
    fn is_zero(&self) -> bool {
        CycloElem::is_zero(self)
    }
    fn try_div_by_p(&self, k: u32) -> Result<Self> {
        CycloElem::try_div_by_p(self, k)
    }
    fn reduce_precision(&self, m: u32) -> Result<Self> {
        CycloElem::reduce_precision(self, m)
    }
    fn precision(&self) -> u32 {
        self.ring().precision()
    }
    fn prime(&self) -> u64 {
        self.ring().p()
    }
}
