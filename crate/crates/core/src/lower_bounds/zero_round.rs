use super::LowerBoundError;
use crate::constants::ZERO_ROUND_MAX_DELTA;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

/// A zero-round orientation algorithm: `q[i]` is the probability that an edge of input
/// color `i + 1` points at its label-1 endpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroRoundAlg {
    pub q: Vec<BigRational>,
}

impl ZeroRoundAlg {
    pub fn new(q: Vec<BigRational>) -> Result<Self, LowerBoundError> {
        if let Some(x) = q.iter().find(|x| **x < BigRational::zero() || **x > BigRational::one()) {
            return Err(LowerBoundError::InvalidAlgorithm(format!("q = {x} outside [0, 1]")));
        }
        Ok(ZeroRoundAlg { q })
    }

    /// Exact values of the given doubles.
    pub fn from_f64(q: &[f64]) -> Result<Self, LowerBoundError> {
        let q = q
            .iter()
            .map(|&x| BigRational::from_float(x).ok_or_else(|| LowerBoundError::InvalidAlgorithm(format!("{x} is not finite"))))
            .collect::<Result<_, _>>()?;
        Self::new(q)
    }

    /// `q[i] = numerators[i] / denominator`.
    pub fn from_grid(numerators: &[u64], denominator: u64) -> Result<Self, LowerBoundError> {
        if denominator == 0 {
            return Err(LowerBoundError::InvalidAlgorithm("zero denominator".into()));
        }
        Self::new(numerators.iter().map(|&a| BigRational::new(a.into(), denominator.into())).collect())
    }
}

fn check(delta: usize, alg: &ZeroRoundAlg) -> Result<(), LowerBoundError> {
    if !(2..=ZERO_ROUND_MAX_DELTA).contains(&delta) {
        return Err(LowerBoundError::DeltaOutOfRange { delta, min: 2, max: ZERO_ROUND_MAX_DELTA });
    }
    if alg.q.len() != 2 * delta - 1 {
        return Err(LowerBoundError::InvalidAlgorithm(format!("{} entries, need {}", alg.q.len(), 2 * delta - 1)));
    }
    Ok(())
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

// k-th elementary symmetric polynomial
fn elementary<T: Clone + Zero + One + std::ops::Mul<Output = T>>(xs: &[T], k: usize) -> T {
    let mut e = vec![T::zero(); k + 1];
    e[0] = T::one();
    for x in xs {
        for j in (1..=k).rev() {
            e[j] = e[j].clone() + e[j - 1].clone() * x.clone();
        }
    }
    e[k].clone()
}

/// Probability that a label-`label` vertex of the randomly colored `Δ`-regular tree is
/// a sink. Its `Δ` edge colors form a uniform `Δ`-subset of `1..=2Δ−1`, so the answer
/// is the mean over subsets of `Π q_i` (label 1) or `Π (1 − q_i)` (label 0).
pub fn zero_round_sink_probability(delta: usize, alg: &ZeroRoundAlg, label: u32) -> Result<BigRational, LowerBoundError> {
    check(delta, alg)?;
    let xs: Vec<BigRational> = match label {
        1 => alg.q.clone(),
        0 => alg.q.iter().map(|x| BigRational::one() - x).collect(),
        _ => return Err(LowerBoundError::InvalidAlgorithm(format!("label {label} is not 0 or 1"))),
    };
    Ok(elementary(&xs, delta) / BigRational::from_integer(binomial(2 * delta - 1, delta)))
}

pub fn worst_label_failure(delta: usize, alg: &ZeroRoundAlg) -> Result<BigRational, LowerBoundError> {
    let a = zero_round_sink_probability(delta, alg, 0)?;
    let b = zero_round_sink_probability(delta, alg, 1)?;
    Ok(a.max(b))
}

/// `1 / (C(2Δ−1, Δ) · 2^Δ)`.
pub fn zero_round_floor(delta: usize) -> BigRational {
    BigRational::new(BigInt::one(), binomial(2 * delta - 1, delta) << delta)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GridMinimum {
    /// `min_q worst_label_failure`, as a decimal string of the exact fraction.
    pub value: String,
    /// A minimizing grid point, as numerators over `steps`.
    pub argmin: Vec<u64>,
    pub steps: u64,
    /// Points evaluated.
    pub evaluated: u64,
    #[serde(skip)]
    pub exact: BigRational,
}

// numerator of the worst label failure at grid point `a`, over C·steps^Δ
fn grid_score(a: &[u64], steps: u64, delta: usize) -> u128 {
    let ones: Vec<u128> = a.iter().map(|&x| x as u128).collect();
    let zeros: Vec<u128> = a.iter().map(|&x| (steps - x) as u128).collect();
    elementary(&ones, delta).max(elementary(&zeros, delta))
}

fn finish(best: (u128, Vec<u64>), steps: u64, delta: usize, evaluated: u64) -> GridMinimum {
    let den = BigInt::from(steps).pow(delta as u32) * binomial(2 * delta - 1, delta);
    let exact = BigRational::new(BigInt::from(best.0), den);
    GridMinimum { value: exact.to_string(), argmin: best.1, steps, evaluated, exact }
}

fn check_grid(delta: usize, steps: u64) -> Result<(), LowerBoundError> {
    check(delta, &ZeroRoundAlg { q: vec![BigRational::zero(); 2 * delta - 1] })?;
    // C(27,14)·steps^14 must fit in u128
    if steps == 0 || (steps as f64).powi(delta as i32) * 2e7 > 1e38 {
        return Err(LowerBoundError::InvalidAlgorithm(format!("grid with {steps} steps is out of range")));
    }
    Ok(())
}

/// Minimum of [`worst_label_failure`] over `q ∈ {0, 1/steps, …, 1}^{2Δ−1}`. The
/// objective is symmetric in the coordinates, so only sorted points are visited.
pub fn grid_minimum(delta: usize, steps: u64) -> Result<GridMinimum, LowerBoundError> {
    check_grid(delta, steps)?;
    let len = 2 * delta - 1;
    let mut a = vec![0u64; len];
    let mut best = (u128::MAX, a.clone());
    let mut evaluated = 0;
    loop {
        evaluated += 1;
        let s = grid_score(&a, steps, delta);
        if s < best.0 {
            best = (s, a.clone());
        }
        // next nondecreasing sequence
        let Some(i) = (0..len).rev().find(|&i| a[i] < steps) else {
            break;
        };
        let v = a[i] + 1;
        for x in &mut a[i..] {
            *x = v;
        }
    }
    Ok(finish(best, steps, delta, evaluated))
}

/// [`grid_minimum`] over every grid point, without the symmetry reduction.
pub fn grid_minimum_full(delta: usize, steps: u64) -> Result<GridMinimum, LowerBoundError> {
    check_grid(delta, steps)?;
    let len = 2 * delta - 1;
    let mut a = vec![0u64; len];
    let mut best = (u128::MAX, a.clone());
    let mut evaluated = 0;
    loop {
        evaluated += 1;
        let s = grid_score(&a, steps, delta);
        if s < best.0 {
            best = (s, a.clone());
        }
        let Some(i) = (0..len).rev().find(|&i| a[i] < steps) else {
            break;
        };
        a[i] += 1;
        for x in &mut a[i + 1..] {
            *x = 0;
        }
    }
    Ok(finish(best, steps, delta, evaluated))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    // mean over explicit Δ-subsets
    fn by_subsets(delta: usize, q: &[BigRational], label: u32) -> BigRational {
        let len = q.len();
        let (mut sum, mut count) = (BigRational::zero(), 0i64);
        for mask in 0u32..1 << len {
            if mask.count_ones() as usize != delta {
                continue;
            }
            count += 1;
            let mut p = BigRational::one();
            for (i, x) in q.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    p *= if label == 1 { x.clone() } else { BigRational::one() - x };
                }
            }
            sum += p;
        }
        sum / BigRational::from_integer(count.into())
    }

    #[test]
    fn examples() {
        let alg = |v: BigRational| ZeroRoundAlg::new(vec![v; 3]).unwrap();
        assert_eq!(zero_round_sink_probability(2, &alg(r(1, 1)), 1).unwrap(), r(1, 1));
        assert_eq!(zero_round_sink_probability(2, &alg(r(0, 1)), 1).unwrap(), r(0, 1));
        assert_eq!(zero_round_sink_probability(2, &alg(r(1, 2)), 1).unwrap(), r(1, 4));
        assert_eq!(worst_label_failure(2, &alg(r(1, 2))).unwrap(), r(1, 4));
        assert_eq!(zero_round_floor(2), r(1, 12));
        assert_eq!(binomial(27, 14), BigInt::from(20_058_300));
    }

    #[test]
    fn rejects_bad_input() {
        let q = ZeroRoundAlg::new(vec![r(1, 2); 3]).unwrap();
        assert!(zero_round_sink_probability(3, &q, 1).is_err());
        assert!(zero_round_sink_probability(2, &q, 2).is_err());
        assert!(ZeroRoundAlg::new(vec![r(3, 2)]).is_err());
        assert!(ZeroRoundAlg::from_f64(&[f64::NAN]).is_err());
        let big = ZeroRoundAlg::new(vec![r(1, 2); 29]).unwrap();
        assert!(matches!(zero_round_sink_probability(15, &big, 1), Err(LowerBoundError::DeltaOutOfRange { .. })));
        let ok = ZeroRoundAlg::new(vec![r(1, 2); 27]).unwrap();
        assert_eq!(zero_round_sink_probability(14, &ok, 0).unwrap(), r(1, 1 << 14));
    }

    #[test]
    fn coarse_grid_at_delta_two() {
        let g = grid_minimum(2, 10).unwrap();
        assert!(g.exact >= zero_round_floor(2));
        let full = grid_minimum_full(2, 10).unwrap();
        assert_eq!(full.exact, g.exact);
        assert_eq!(full.evaluated, 11u64.pow(3));
    }

    #[test]
    fn symmetric_grid_matches_full_grid() {
        for (delta, steps) in [(2, 20), (3, 8)] {
            let a = grid_minimum(delta, steps).unwrap();
            let b = grid_minimum_full(delta, steps).unwrap();
            assert_eq!(a.exact, b.exact, "Δ = {delta}");
            assert!(a.evaluated < b.evaluated);
        }
    }

    fn arb_q(len: usize) -> impl Strategy<Value = Vec<BigRational>> {
        prop::collection::vec((0i64..=16).prop_map(|a| r(a, 16)), len)
    }

    proptest! {
        #[test]
        fn matches_subset_enumeration(delta in 2usize..=4, seed in any::<u64>()) {
            let len = 2 * delta - 1;
            let q: Vec<BigRational> = (0..len).map(|i| r(((seed >> (4 * i)) & 15) as i64, 15)).collect();
            let alg = ZeroRoundAlg::new(q.clone()).unwrap();
            for label in 0..2 {
                prop_assert_eq!(zero_round_sink_probability(delta, &alg, label).unwrap(), by_subsets(delta, &q, label));
            }
        }

        #[test]
        fn multilinear_in_each_coordinate(q in arb_q(5), i in 0usize..5, a in 0i64..=8, b in 0i64..=8) {
            // f(q_i = (x+y)/2) = (f(q_i = x) + f(q_i = y)) / 2
            let at = |x: BigRational| {
                let mut q = q.clone();
                q[i] = x;
                zero_round_sink_probability(3, &ZeroRoundAlg::new(q).unwrap(), 1).unwrap()
            };
            let (x, y) = (r(a, 8), r(b, 8));
            let mid = (x.clone() + y.clone()) / BigRational::from_integer(2.into());
            prop_assert_eq!(at(mid) * BigRational::from_integer(2.into()), at(x) + at(y));
        }

        #[test]
        fn symmetric_under_color_permutations(q in arb_q(7), shift in 0usize..7) {
            let mut p = q.clone();
            p.rotate_left(shift);
            p.swap(0, 6 - shift.min(6));
            for label in 0..2 {
                prop_assert_eq!(
                    zero_round_sink_probability(4, &ZeroRoundAlg::new(q.clone()).unwrap(), label).unwrap(),
                    zero_round_sink_probability(4, &ZeroRoundAlg::new(p.clone()).unwrap(), label).unwrap()
                );
            }
        }

        #[test]
        fn at_least_the_best_single_subset(q in arb_q(7)) {
            let delta = 4;
            let top = |mut xs: Vec<BigRational>| {
                xs.sort();
                xs.iter().rev().take(delta).fold(BigRational::one(), |acc, x| acc * x)
            };
            let c = BigRational::from_integer(binomial(7, 4));
            let ones = top(q.clone()) / c.clone();
            let zeros = top(q.iter().map(|x| BigRational::one() - x).collect()) / c;
            let w = worst_label_failure(delta, &ZeroRoundAlg::new(q).unwrap()).unwrap();
            prop_assert!(w >= ones.max(zeros));
        }
    }
}
