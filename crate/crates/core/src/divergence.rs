//! Divergences between probability vectors of equal length.

use alloc::vec::Vec;

use core::f64::consts::LN_2;

/// Default additive smoothing for [`kl_smoothed`].
pub const KL_EPSILON: f64 = 1e-12;

fn xlogy_ratio(p: f64, q: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p * libm::log(p / q)
    }
}

/// Jensen-Shannon divergence in nats, `½KL(p‖m) + ½KL(q‖m)` with `m = (p+q)/2`.
/// `0·log 0` is taken as 0, so the value lies in `[0, ln 2]`.
pub fn js_divergence(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "distributions must have equal length");
    let mut acc = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        let m = 0.5 * (a + b);
        acc += 0.5 * xlogy_ratio(a, m) + 0.5 * xlogy_ratio(b, m);
    }
    acc.max(0.0)
}

/// Jensen-Shannon distance `sqrt(JS / ln 2)`, clamped to `[0, 1]`.
pub fn js_distance(p: &[f64], q: &[f64]) -> f64 {
    libm::sqrt(js_divergence(p, q) / LN_2).clamp(0.0, 1.0)
}

/// `KL(p‖q)` in nats. Infinite when `q` vanishes where `p` does not.
pub fn kl(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "distributions must have equal length");
    let mut acc = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            acc += a * libm::log(a / b);
        }
    }
    acc.max(0.0)
}

/// `KL(p‖q̃)` where `q̃` is `q + eps` renormalized.
pub fn kl_smoothed(p: &[f64], q: &[f64], eps: f64) -> f64 {
    let total: f64 = q.iter().sum::<f64>() + eps * q.len() as f64;
    let smoothed: Vec<f64> = q.iter().map(|&x| (x + eps) / total).collect();
    kl(p, &smoothed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_is_zero() {
        let p = [0.25, 0.25, 0.5, 0.0];
        assert_eq!(js_distance(&p, &p), 0.0);
        assert_eq!(kl(&p, &p), 0.0);
    }

    #[test]
    fn disjoint_saturates() {
        assert!((js_divergence(&[0.0, 1.0], &[1.0, 0.0]) - LN_2).abs() < 1e-15);
        assert!((js_distance(&[0.0, 1.0], &[1.0, 0.0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn half_versus_point_mass() {
        let p = [0.5, 0.5];
        let q = [1.0, 0.0];
        let m = [0.75, 0.25];
        let direct = 0.5 * (0.5 * (0.5f64 / m[0]).ln() + 0.5 * (0.5f64 / m[1]).ln())
            + 0.5 * (1.0f64 / m[0]).ln();
        assert!((js_divergence(&p, &q) - direct).abs() < 1e-15);
        assert!((js_divergence(&p, &q) - 0.215762).abs() < 1e-6);
        assert!((js_distance(&p, &q) - 0.557923).abs() < 1e-6);
    }

    #[test]
    fn kl_handles_zeros() {
        assert_eq!(kl(&[1.0, 0.0], &[0.0, 1.0]), f64::INFINITY);
        let s = kl_smoothed(&[1.0, 0.0], &[0.0, 1.0], KL_EPSILON);
        assert!(s.is_finite() && s > 20.0);
        assert!(kl_smoothed(&[0.5, 0.5], &[0.5, 0.5], KL_EPSILON) < 1e-11);
    }
}
