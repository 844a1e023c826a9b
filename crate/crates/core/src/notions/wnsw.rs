//! Exact comparison of weighted Nash social welfare `∏ v_i^{b_i}`.

use std::cmp::Ordering;

use num::{BigInt, One, ToPrimitive, Zero};

use crate::error::Result;
use crate::model::{Allocation, Entitlements, IndivisibleInstance, Limits};
use crate::rational::{lcm_denominators, Rational};

use super::{enumerate_acceptable, AcceptableSet, Notion};

/// Ordering key: agents with positive value first, then the product over those
/// agents of `v_i^{b_i L}`, where `L` is the common denominator of the entitlements.
///
/// Raising the weighted product to the integer power `L` preserves order and keeps
/// everything rational. A full-support key ranks above every key with a zero factor.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WnswKey {
    pub support: usize,
    pub product: Rational,
}

impl WnswKey {
    pub fn is_positive(&self, n: usize) -> bool {
        self.support == n
    }

    /// `product^(1/L)` in floating point, i.e. the weighted product itself when the support is full.
    pub fn approx(&self, b: &Entitlements) -> f64 {
        let l = lcm_denominators(b.as_slice());
        let l = l.to_f64().unwrap_or(f64::INFINITY);
        (ln_rational(&self.product) / l).exp()
    }
}

fn ln_rational(x: &Rational) -> f64 {
    let ln_int = |v: &BigInt| -> f64 {
        let bits = v.bits();
        if bits < 1000 {
            v.to_f64().unwrap_or(f64::INFINITY).ln()
        } else {
            let shift = bits - 64;
            (v >> shift).to_f64().unwrap_or(f64::INFINITY).ln() + shift as f64 * std::f64::consts::LN_2
        }
    };
    ln_int(x.numer()) - ln_int(x.denom())
}

pub(crate) fn key_from_values(values: &[&Rational], b: &Entitlements) -> WnswKey {
    let l = lcm_denominators(b.as_slice());
    let mut support = 0;
    let mut product = Rational::one();
    for (v, bi) in values.iter().zip(b.as_slice()) {
        if v.is_zero() {
            continue;
        }
        support += 1;
        let exp = (bi * Rational::from_integer(l.clone())).to_integer();
        let exp = exp.to_u32().expect("exponent fits in u32");
        product *= num::pow::pow((*v).clone(), exp as usize);
    }
    WnswKey { support, product }
}

pub(crate) fn support_mask(values: &[&Rational]) -> u64 {
    values.iter().enumerate().filter(|(_, v)| !v.is_zero()).fold(0, |acc, (i, _)| acc | 1 << i)
}

pub fn wnsw_key(instance: &IndivisibleInstance, a: &Allocation) -> WnswKey {
    let values = instance.value_profile(a);
    let refs: Vec<&Rational> = values.iter().collect();
    key_from_values(&refs, &instance.entitlements)
}

pub fn wnsw_compare(instance: &IndivisibleInstance, a: &Allocation, b: &Allocation) -> Ordering {
    wnsw_key(instance, a).cmp(&wnsw_key(instance, b))
}

/// Allocations accepted by MWNSW.
///
/// With full support these are the maximizers of the weighted product. Otherwise
/// every maximum-size set of agents that some allocation serves positively is
/// eligible, and the accepted allocations maximize the product over their own set.
pub fn mwnsw_set(instance: &IndivisibleInstance, limits: &Limits) -> Result<AcceptableSet> {
    enumerate_acceptable(Notion::Mwnsw, instance, limits)
}
