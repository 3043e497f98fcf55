//! Closed-form decision functions of `b(t)`.

/// Logistic function, evaluated without overflow for any sign of `x`.
pub fn sigma(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `σ(m − b)`; the boundary sits at the triple mean `m`.
pub fn f1_kan(b: f64, m: f64) -> f64 {
    sigma(-b + m)
}

pub const F2_SLOPE: f64 = -0.08550718;
pub const F2_INTERCEPT: f64 = 7.27970193;

/// Logistic rule with the published n = 14 coefficients.
pub fn f2_logistic(b: f64) -> f64 {
    sigma(F2_SLOPE * b + F2_INTERCEPT)
}

/// `-intercept / slope` of [`f2_logistic`].
pub fn f2_boundary() -> f64 {
    -F2_INTERCEPT / F2_SLOPE
}

/// `[cos(√cos(sin(ln b²)²) + cos(ln b))]³`. Not a probability.
/// Returns `None` for `b ≤ 0`.
pub fn f3_symbolic(b: f64) -> Option<f64> {
    if b <= 0.0 || b.is_nan() {
        return None;
    }
    let inner = (b * b).ln().sin();
    let root = (inner * inner).cos().sqrt();
    Some((root + b.ln().cos()).cos().powi(3))
}

/// Weights of the fixed seven-unit ReLU network, as `(α, β, γ)` per unit.
pub const SNN_UNITS: [(f64, f64, f64); 7] = [
    (0.0, -1.1845468, -0.591498),
    (0.0, -2.146678, -0.35002795),
    (0.0, -0.7272987, -0.27688783),
    (-2.4159462, 0.26937068, -0.52213764),
    (-2.8786569, 0.32904944, -0.24775109),
    (2.3823507, 0.8263043, 0.27229485),
    (-3.1325226, 0.12642458, -0.6243779),
];
pub const SNN_BIAS: f64 = 2.1719017;

/// Pre-sigmoid output `γ₀ + Σ γᵢ max(0, αᵢ + βᵢ b)`.
pub fn snn_logit(b: f64) -> f64 {
    SNN_BIAS
        + SNN_UNITS
            .iter()
            .map(|&(alpha, beta, gamma)| gamma * (alpha + beta * b).max(0.0))
            .sum::<f64>()
}

pub fn fixed_snn(b: f64) -> f64 {
    sigma(snn_logit(b))
}

/// Largest `x` in `[lo, hi]` where `f(x) - level` changes sign, located by a
/// grid scan followed by bisection.
pub fn locate_crossing(f: impl Fn(f64) -> f64, level: f64, lo: f64, hi: f64) -> Option<f64> {
    const STEPS: usize = 30_000;
    let step = (hi - lo) / STEPS as f64;
    let above = |x: f64| f(x) >= level;
    let mut found = None;
    let mut prev = lo;
    for s in 1..=STEPS {
        let x = lo + step * s as f64;
        if above(prev) != above(x) {
            found = Some((prev, x));
        }
        prev = x;
    }
    let (mut a, mut b) = found?;
    let side = above(a);
    for _ in 0..100 {
        let mid = 0.5 * (a + b);
        if above(mid) == side {
            a = mid;
        } else {
            b = mid;
        }
    }
    Some(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_cases() {
        assert_eq!(sigma(0.0), 0.5);
        assert_eq!(sigma(1000.0), 1.0);
        assert_eq!(sigma(-1000.0), 0.0);
        for x in [-30.0, -2.5, -0.1, 0.3, 4.0, 17.0] {
            assert!((sigma(-x) - (1.0 - sigma(x))).abs() < 1e-15);
        }
    }

    #[test]
    fn f1_boundary() {
        assert_eq!(f1_kan(72.07, 72.07), 0.5);
        assert!(f1_kan(0.0, 72.07) > 0.999_999);
    }

    #[test]
    fn f2_values() {
        assert!((f2_boundary() - 85.135_563).abs() < 1e-6);
        assert!((f2_boundary() - 85.14).abs() < 0.01);
        assert!((f2_logistic(0.0) - 0.99931).abs() < 1e-5);
        assert!((f2_logistic(f2_boundary()) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn f3_values() {
        let v = f3_symbolic(1.0).unwrap();
        assert!((v - 2f64.cos().powi(3)).abs() < 1e-15);
        assert!((v + 0.0721).abs() < 1e-4);
        assert!(f3_symbolic(0.0).is_none());
        assert!(f3_symbolic(-3.0).is_none());
        let edge = locate_crossing(|b| f3_symbolic(b).unwrap(), 0.5, 1.0, 300.0).unwrap();
        assert!((edge - 80.0).abs() < 2.0, "{edge}");
        for i in 1..3000 {
            let v = f3_symbolic(i as f64 * 0.1).unwrap();
            assert!((-1.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn snn_values() {
        // only unit 6 is active at b = 0
        let expected = sigma(2.1719017 + 0.27229485 * 2.3823507);
        assert_eq!(fixed_snn(0.0), expected);
        assert!((fixed_snn(0.0) - 0.9438).abs() < 1e-4);
        for i in 0..3000 {
            let b = i as f64 * 0.1;
            for &(alpha, beta, _) in &SNN_UNITS[..3] {
                assert_eq!((alpha + beta * b).max(0.0), 0.0);
            }
        }
    }

    #[test]
    fn threshold_rules_are_monotone() {
        let grid: Vec<f64> = (0..=3000).map(|i| i as f64 * 0.1).collect();
        for w in grid.windows(2) {
            assert!(f1_kan(w[1], 72.0) <= f1_kan(w[0], 72.0));
            assert!(f2_logistic(w[1]) <= f2_logistic(w[0]));
        }
    }
}
