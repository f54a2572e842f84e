//! Exact weighted kernel sums. This is the slow trusted reference every sketch
//! estimate is compared against, and the forward pass of distillation.

use crate::error::{check_dim, Result};
use crate::lsh::KernelConfig;
use crate::sketch::WeightedPoint;

/// `sum_j alpha_j * K(q, x_j)` with `K` the row kernel of `kernel`.
pub fn exact_weighted_kde(q: &[f64], points: &[WeightedPoint], kernel: &KernelConfig) -> Result<f64> {
    weighted_sum(q, points, kernel, |k| k)
}

/// `sum_j alpha_j * sqrt(K(q, x_j))`, the scale in the median-of-means error bound.
pub fn exact_root_kde(q: &[f64], points: &[WeightedPoint], kernel: &KernelConfig) -> Result<f64> {
    weighted_sum(q, points, kernel, libm::sqrt)
}

/// `sum_j |alpha_j| * sqrt(K(q, x_j))`. Bounds the row standard deviation for
/// signed weights, where [`exact_root_kde`] can cancel.
pub fn exact_abs_root_kde(q: &[f64], points: &[WeightedPoint], kernel: &KernelConfig) -> Result<f64> {
    kernel.validate()?;
    let mut acc = 0.0;
    for p in points {
        check_dim(q.len(), p.x.len())?;
        acc += p.alpha.abs() * libm::sqrt(kernel.evaluate(&p.x, q));
    }
    Ok(acc)
}

fn weighted_sum(
    q: &[f64],
    points: &[WeightedPoint],
    kernel: &KernelConfig,
    transform: impl Fn(f64) -> f64,
) -> Result<f64> {
    kernel.validate()?;
    let mut acc = 0.0;
    for p in points {
        check_dim(q.len(), p.x.len())?;
        acc += p.alpha * transform(kernel.evaluate(&p.x, q));
    }
    Ok(acc)
}

/// Median-of-means error bound `6 * scale / sqrt(L) * sqrt(ln(1/delta))`, where
/// `scale` bounds the per-row standard deviation (see [`exact_root_kde`]).
pub fn mom_error_bound(scale: f64, rows: usize, delta: f64) -> f64 {
    6.0 * scale / libm::sqrt(rows as f64) * libm::sqrt(libm::log(1.0 / delta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lsh::LshFamilyConfig;
    use alloc::vec;
    use alloc::vec::Vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn l2(dim: usize) -> KernelConfig {
        KernelConfig::new(LshFamilyConfig::l2(dim, 1.5), 2)
    }

    #[test]
    fn empty_set_is_zero() {
        assert_eq!(exact_weighted_kde(&[1.0, 2.0], &[], &l2(2)).unwrap(), 0.0);
    }

    #[test]
    fn single_point_at_zero_distance() {
        let pts = [WeightedPoint::new(vec![0.3, -0.7], 4.2)];
        assert_eq!(exact_weighted_kde(&[0.3, -0.7], &pts, &l2(2)).unwrap(), 4.2);
        assert_eq!(exact_root_kde(&[0.3, -0.7], &pts, &l2(2)).unwrap(), 4.2);
    }

    #[test]
    fn dimension_mismatch() {
        let pts = [WeightedPoint::new(vec![0.3, -0.7], 1.0)];
        assert!(exact_weighted_kde(&[0.3], &pts, &l2(2)).is_err());
    }

    /// Naive re-implementation written directly from the closed form, independent
    /// of `KernelConfig::evaluate`.
    fn naive(q: &[f64], pts: &[WeightedPoint], r: f64, k: i32, root: bool) -> f64 {
        let mut total = 0.0;
        for p in pts {
            let mut d2 = 0.0;
            for i in 0..q.len() {
                d2 += (q[i] - p.x[i]).powi(2);
            }
            let c = d2.sqrt();
            let base = if c == 0.0 {
                1.0
            } else {
                let s = r / c;
                let phi = 0.5 * libm::erfc(s / core::f64::consts::SQRT_2);
                1.0 - 2.0 * phi
                    - 2.0 * c / ((2.0 * core::f64::consts::PI).sqrt() * r) * (1.0 - (-s * s / 2.0).exp())
            };
            let kv = base.powi(k);
            total += p.alpha * if root { kv.sqrt() } else { kv };
        }
        total
    }

    #[test]
    fn matches_naive_recomputation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts: Vec<WeightedPoint> = (0..10)
            .map(|_| {
                WeightedPoint::new(
                    (0..4).map(|_| rng.random_range(-2.0..2.0)).collect(),
                    rng.random_range(-1.0..3.0),
                )
            })
            .collect();
        let kernel = KernelConfig::new(LshFamilyConfig::l2(4, 1.5), 2);
        for _ in 0..5 {
            let q: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
            let a = exact_weighted_kde(&q, &pts, &kernel).unwrap();
            assert!((a - naive(&q, &pts, 1.5, 2, false)).abs() < 1e-12);
            let b = exact_root_kde(&q, &pts, &kernel).unwrap();
            assert!((b - naive(&q, &pts, 1.5, 2, true)).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_in_query_and_point() {
        let kernel = l2(3);
        let (a, b) = (vec![0.1, 0.5, -1.0], vec![1.0, -0.2, 0.3]);
        let f1 = exact_weighted_kde(&a, &[WeightedPoint::new(b.clone(), 1.7)], &kernel).unwrap();
        let f2 = exact_weighted_kde(&b, &[WeightedPoint::new(a, 1.7)], &kernel).unwrap();
        assert_eq!(f1, f2);
    }

    #[test]
    fn bound_scales_as_inverse_sqrt_rows() {
        let b1 = mom_error_bound(2.0, 100, 0.05);
        let b2 = mom_error_bound(2.0, 400, 0.05);
        assert!((b1 / b2 - 2.0).abs() < 1e-12);
    }
}
