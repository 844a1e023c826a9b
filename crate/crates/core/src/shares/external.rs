//! A 36-item instance with one shared additive valuation where MMS⁻ cannot be met.
//!
//! Items are coordinate triples `(c1, c2, c3)` with `c1 ∈ 1..=2`, `c2 ∈ 1..=3`,
//! `c3 ∈ 1..=6`, indexed lexicographically. Agent `i`'s intended MMS partition
//! groups items by coordinate `i`.

use crate::error::{Error, Result};
use crate::model::{Bundle, Entitlements, IndivisibleInstance, IndivisibleValuation};
use crate::rational::{int, rat, Rational};
use num::{BigInt, One, Signed, ToPrimitive, Zero};

use super::{Certificate, ShareReport};

pub const ITEMS: usize = 36;
const DIMS: [u8; 3] = [2, 3, 6];
/// Items whose perturbation is solved for rather than chosen, in solving order.
const CORRECTING: [[u8; 3]; 9] =
    [[1, 1, 6], [1, 2, 6], [2, 3, 1], [2, 3, 2], [2, 3, 3], [2, 3, 4], [2, 3, 5], [1, 3, 6], [2, 3, 6]];

pub fn label(e: usize) -> [u8; 3] {
    [(e / 18) as u8 + 1, (e / 6 % 3) as u8 + 1, (e % 6) as u8 + 1]
}

pub fn index(l: [u8; 3]) -> usize {
    (l[0] as usize - 1) * 18 + (l[1] as usize - 1) * 6 + (l[2] as usize - 1)
}

/// The bundles of agent `agent` (0-based) grouped by that coordinate.
pub fn intended_partition(agent: usize) -> Vec<Bundle> {
    (1..=DIMS[agent])
        .map(|c| Bundle((0..ITEMS).filter(|&e| label(e)[agent] == c).fold(0u64, |acc, e| acc | 1 << e)))
        .collect()
}

#[derive(Debug, Clone)]
pub struct ExternalConstruction {
    pub q: u32,
    pub epsilon: Rational,
    /// `K = q^36`.
    pub scale: BigInt,
    /// Integer perturbation `p_e`; item value is `1 + p_e / K + epsilon * w_e`.
    pub perturbation: Vec<BigInt>,
    /// Multiplier of epsilon per item: -1 on 231..235, +5 on 236.
    pub epsilon_weight: Vec<i64>,
}

impl ExternalConstruction {
    /// `epsilon = 0` gives the instance before the final adjustment.
    pub fn new(q: u32, epsilon: Rational) -> Result<Self> {
        if q < 2 {
            return Err(Error::Argument(format!("q must be at least 2, got {q}")));
        }
        let scale = BigInt::from(q).pow(36);
        let cap = Rational::new(BigInt::one(), BigInt::from(6) * &scale);
        if epsilon.is_negative() || epsilon >= cap {
            return Err(Error::Argument(format!("epsilon must lie in [0, 1/(6 q^36)), got {epsilon}")));
        }
        let mut p: Vec<Option<BigInt>> = vec![None; ITEMS];
        let correcting: Vec<usize> = CORRECTING.iter().map(|&l| index(l)).collect();
        let mut power = BigInt::one();
        for (e, slot) in p.iter_mut().enumerate() {
            if !correcting.contains(&e) {
                *slot = Some(power.clone());
                power *= q;
            }
        }
        // Each correcting item zeroes one intended bundle in which it is the last unknown.
        let targets: [(usize, u8); 9] = [(1, 1), (1, 2), (2, 1), (2, 2), (2, 3), (2, 4), (2, 5), (0, 1), (2, 6)];
        for (&e, &(coord, c)) in correcting.iter().zip(&targets) {
            debug_assert_eq!(label(e)[coord], c);
            let mut sum = BigInt::zero();
            for f in (0..ITEMS).filter(|&f| f != e && label(f)[coord] == c) {
                sum += p[f].as_ref().expect("solved before use");
            }
            p[e] = Some(-sum);
        }
        let perturbation: Vec<BigInt> = p.into_iter().map(|x| x.expect("all solved")).collect();
        let mut epsilon_weight = vec![0i64; ITEMS];
        for c3 in 1..=5 {
            epsilon_weight[index([2, 3, c3])] = -1;
        }
        epsilon_weight[index([2, 3, 6])] = 5;
        Ok(ExternalConstruction { q, epsilon, scale, perturbation, epsilon_weight })
    }

    pub fn item_values(&self) -> Vec<Rational> {
        self.perturbation
            .iter()
            .zip(&self.epsilon_weight)
            .map(|(p, &w)| int(1) + Rational::new(p.clone(), self.scale.clone()) + &self.epsilon * int(w))
            .collect()
    }

    pub fn valuation(&self) -> IndivisibleValuation {
        IndivisibleValuation::additive(self.item_values()).expect("values are positive")
    }

    pub fn instance(&self) -> IndivisibleInstance {
        let b = Entitlements::new(vec![rat(1, 2), rat(1, 3), rat(1, 6)]).expect("sums to one");
        IndivisibleInstance::new(ITEMS, vec![self.valuation(); 3], b).expect("well formed")
    }

    /// Exact MMS into six bundles of the shared valuation.
    ///
    /// A bundle of at most five items is worth less than `6 - epsilon`, so a
    /// partition beating that threshold uses six items per bundle. Each bundle's
    /// integer perturbation must then be nonnegative, and they sum to zero, so
    /// every bundle has perturbation exactly zero. The search enumerates all
    /// zero-perturbation 6-sets and takes the best exact cover by them.
    pub fn mms_six(&self) -> Result<ShareReport> {
        let abs_total: BigInt = self.perturbation.iter().map(|p| p.abs()).sum();
        let slack = Rational::new(abs_total.clone(), self.scale.clone()) + &self.epsilon * int(7);
        if slack >= int(1) {
            return Err(Error::Numeric("perturbations too large for the size argument".into()));
        }
        if abs_total.bits() > 120 || !self.perturbation.iter().sum::<BigInt>().is_zero() {
            return Err(Error::Numeric("perturbations exceed the exact search range".into()));
        }
        let p: Vec<i128> = self.perturbation.iter().map(|x| x.to_i128().expect("checked")).collect();

        let mut zero_sets: Vec<u64> = Vec::new();
        fn rec(start: usize, left: usize, mask: u64, sum: i128, p: &[i128], out: &mut Vec<u64>) {
            if left == 0 {
                if sum == 0 {
                    out.push(mask);
                }
                return;
            }
            for e in start..=p.len() - left {
                rec(e + 1, left - 1, mask | 1 << e, sum + p[e], p, out);
            }
        }
        rec(0, 6, 0, 0, &p, &mut zero_sets);

        let weight = |s: u64| -> i64 { Bundle(s).items().map(|e| self.epsilon_weight[e]).sum() };
        let mut best: Option<(i64, Vec<u64>)> = None;
        fn cover(
            used: u64,
            chosen: &mut Vec<u64>,
            floor: i64,
            sets: &[u64],
            weight: &dyn Fn(u64) -> i64,
            best: &mut Option<(i64, Vec<u64>)>,
        ) {
            if used == (1u64 << ITEMS) - 1 {
                if best.as_ref().map_or(true, |(b, _)| floor > *b) {
                    *best = Some((floor, chosen.clone()));
                }
                return;
            }
            let first = (!used).trailing_zeros();
            for &s in sets.iter().filter(|&&s| s >> first & 1 == 1 && s & used == 0) {
                let f = floor.min(weight(s));
                if best.as_ref().map_or(false, |(b, _)| f <= *b) {
                    continue;
                }
                chosen.push(s);
                cover(used | s, chosen, f, sets, weight, best);
                chosen.pop();
            }
        }
        cover(0, &mut Vec::new(), i64::MAX, &zero_sets, &weight, &mut best);
        let (w, sets) = best.ok_or_else(|| Error::Numeric("no zero-perturbation cover exists".into()))?;
        Ok(ShareReport {
            value: int(6) + &self.epsilon * int(w),
            certificate: Certificate::Partition(sets.into_iter().map(Bundle).collect()),
        })
    }
}

/// The final instance after the epsilon adjustment.
pub fn appendix_b_instance(q: u32, epsilon: &Rational) -> Result<IndivisibleInstance> {
    if !epsilon.is_positive() {
        return Err(Error::Argument(format!("epsilon must be positive, got {epsilon}")));
    }
    Ok(ExternalConstruction::new(q, epsilon.clone())?.instance())
}
