//! Certified tails of `Σ k^{-s}`.

use crate::scalar::Scalar;

/// Terms summed directly before switching to Euler–Maclaurin.
const DIRECT_TERMS: u64 = 64;

/// Two-sided bracket `(lo, hi)` of `Σ_{k > start} k^{-s}` for `s > 1`.
///
/// For `f(t) = t^{-s}` every derivative has constant sign, so successive
/// Euler–Maclaurin truncations alternately over- and under-estimate the sum;
/// the truncations after the `B_4` and `B_6` corrections bracket it.
pub fn power_tail<T: Scalar>(s: T, start: u64) -> (T, T) {
    debug_assert!(s > T::one());
    let base = start.max(DIRECT_TERMS);
    let mut direct = T::zero();
    for k in (start + 1)..=base {
        direct = direct + T::from_u64(k).unwrap().powf(-s);
    }
    let n = T::from_u64(base).unwrap();
    let f = n.powf(-s);
    // Σ_{k >= n} f(k) ≈ ∫_n^∞ f + f(n)/2 - Σ_j B_{2j}/(2j)! f^(2j-1)(n)
    let rising = |j: i32| (0..j).fold(T::one(), |acc, i| acc * (s + T::from_i32(i).unwrap()));
    let integral = n.powf(T::one() - s) / (s - T::one());
    let b2 = rising(1) * n.powf(-s - T::one()) / T::lit(12.0);
    let b4 = rising(3) * n.powf(-s - T::lit(3.0)) / T::lit(720.0);
    let b6 = rising(5) * n.powf(-s - T::lit(5.0)) / T::lit(30240.0);
    let lower = integral + f / T::lit(2.0) + b2 - b4 - f;
    let upper = lower + b6;
    (direct + lower, direct + upper)
}

/// `ζ(s)` to within the Euler–Maclaurin bracket width (midpoint).
pub fn zeta<T: Scalar>(s: T) -> T {
    let (lo, hi) = power_tail(s, 0);
    (lo + hi) / T::lit(2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zeta_two_and_four() {
        assert!((zeta(2.0f64) - PI * PI / 6.0).abs() < 1e-14);
        assert!((zeta(4.0f64) - PI.powi(4) / 90.0).abs() < 1e-14);
    }

    #[test]
    fn bracket_contains_partial_sum_oracle() {
        // Oracle: long direct partial sums plus the crude integral tail
        // bounds ∫_{N+1}^∞ <= Σ_{k>N} <= ∫_N^∞.
        for &s in &[1.5f64, 2.0, 3.0, 4.0] {
            for &start in &[0u64, 3, 10, 40, 200] {
                let big = 2_000_000u64;
                let partial: f64 = ((start + 1)..=big).rev().map(|k| (k as f64).powf(-s)).sum();
                let lo_oracle = partial + ((big + 1) as f64).powf(1.0 - s) / (s - 1.0);
                let hi_oracle = partial + (big as f64).powf(1.0 - s) / (s - 1.0);
                let (lo, hi) = power_tail(s, start);
                assert!(lo <= hi);
                assert!(hi >= lo_oracle - 1e-12, "s={s} start={start}");
                assert!(lo <= hi_oracle + 1e-12, "s={s} start={start}");
            }
        }
    }

    #[test]
    fn bracket_is_tight() {
        let (lo, hi) = power_tail(2.0f64, 0);
        assert!(hi - lo < 1e-13);
        let (lo, hi) = power_tail(2.0f64, 100);
        assert!(hi - lo < 1e-15);
        assert!(((lo + hi) / 2.0 - (PI * PI / 6.0 - (1..=100).map(|k| 1.0 / (k * k) as f64).sum::<f64>())).abs() < 1e-13);
    }
}
