//! Normalized orthogonal polynomials and dimension constants.
//!
//! Every polynomial here is normalized to take the value 1 at the identity
//! point (`x = 1` or `z = 1`), which is the normalization of a spherical
//! function. Evaluation uses forward three-term recurrences written directly
//! for the normalized polynomials, so no Pochhammer factor is ever formed and
//! high degrees do not overflow.

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::tolerance::BOUNDARY;

fn check_unit_interval(x: f64) -> Result<f64> {
    if !x.is_finite() || x.abs() > 1.0 + BOUNDARY {
        return Err(Error::Domain(format!("x = {x} lies outside [-1, 1]")));
    }
    Ok(x.clamp(-1.0, 1.0))
}

/// Normalized Gegenbauer polynomial `c_n(d, x) = C_n^λ(x) / C_n^λ(1)` with
/// `λ = (d - 1) / 2`.
///
/// For `d = 1` the Gegenbauer family degenerates; the Chebyshev limit
/// `cos(n arccos x)` is returned, which is what the recurrence reduces to.
pub fn gegenbauer_norm(n: u32, d: u32, x: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::Parameter("sphere dimension d must be >= 1".into()));
    }
    let x = check_unit_interval(x)?;
    if n == 0 || x == 1.0 {
        return Ok(1.0);
    }
    let two_lambda = f64::from(d - 1);
    let mut prev = 1.0;
    let mut cur = x;
    for k in 1..n {
        let k = f64::from(k);
        // c_{k+1} = [(2k + 2λ) x c_k - k c_{k-1}] / (k + 2λ)
        let next = ((2.0 * k + two_lambda) * x * cur - k * prev) / (k + two_lambda);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Normalized Jacobi polynomial `R_k^(α,β)(x) = P_k^(α,β)(x) / P_k^(α,β)(1)`.
pub fn jacobi_norm(k: u32, alpha: f64, beta: f64, x: f64) -> Result<f64> {
    if !(alpha > -1.0) || !(beta > -1.0) {
        return Err(Error::Parameter(format!(
            "Jacobi exponents must exceed -1 (alpha = {alpha}, beta = {beta})"
        )));
    }
    let x = check_unit_interval(x)?;
    if k == 0 || x == 1.0 {
        return Ok(1.0);
    }
    let (a, b) = (alpha, beta);
    let ab = a + b;
    let mut prev = 1.0;
    let mut cur = ((a + 1.0) + 0.5 * (ab + 2.0) * (x - 1.0)) / (a + 1.0);
    for n in 2..=k {
        let n = f64::from(n);
        let s = 2.0 * n + ab;
        let denom = 2.0 * n * (n + ab) * (s - 2.0);
        let lin = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b);
        let back = 2.0 * (n + a - 1.0) * (n + b - 1.0) * s;
        let r1 = n / (n + a);
        let r2 = r1 * (n - 1.0) / (n + a - 1.0);
        let next = (lin * r1 * cur - back * r2 * prev) / denom;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Disc polynomial `R^α_{m,n}(z) = r^|m-n| e^{i(m-n)θ} R_{min(m,n)}^(α,|m-n|)(2r² - 1)`
/// for `z = r e^{iθ}` in the closed unit disc.
pub fn disc_polynomial(m: u32, n: u32, alpha: f64, z: Complex64) -> Result<Complex64> {
    let r2 = z.norm_sqr();
    if !r2.is_finite() || r2.sqrt() > 1.0 + BOUNDARY {
        return Err(Error::Domain(format!("|z| = {} exceeds 1", r2.sqrt())));
    }
    if !(alpha > -1.0) {
        return Err(Error::Parameter(format!("alpha = {alpha} must exceed -1")));
    }
    // r^k e^{ikθ} is z^k for k >= 0 and conj(z)^|k| otherwise.
    let angular = if m >= n {
        z.powu(m - n)
    } else {
        z.conj().powu(n - m)
    };
    let k = m.abs_diff(n);
    let x = (2.0 * r2 - 1.0).min(1.0);
    let radial = jacobi_norm(m.min(n), alpha, f64::from(k), x)?;
    Ok(angular * radial)
}

fn to_u64(value: BigUint, what: &str) -> Result<u64> {
    value
        .to_u64()
        .ok_or_else(|| Error::Overflow(format!("{what} does not fit in 64 bits")))
}

/// Dimension `N_n(d)` of the space of degree-`n` spherical harmonics on `S^d`,
/// i.e. `(d)_{n-1} (2n + d - 1) / n!` for `n >= 1` and `1` for `n = 0`.
pub fn dimension_real(n: u32, d: u32) -> Result<u64> {
    if d == 0 {
        return Err(Error::Parameter("sphere dimension d must be >= 1".into()));
    }
    if n == 0 {
        return Ok(1);
    }
    let mut num = BigUint::from(2 * u64::from(n) + u64::from(d) - 1);
    for j in 0..u64::from(n) - 1 {
        num *= u64::from(d) + j;
    }
    let mut den = BigUint::one();
    for j in 2..=u64::from(n) {
        den *= j;
    }
    to_u64(num / den, &format!("N_{n}({d})"))
}

fn binomial(n: u64, k: u64) -> BigUint {
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for j in 0..k {
        acc *= n - j;
        acc /= j + 1;
    }
    acc
}

/// Dimension `N(q; m, n)` attached to the disc polynomial `R^{q-2}_{m,n}`.
pub fn dimension_complex(q: u32, m: u32, n: u32) -> Result<u64> {
    if q < 2 {
        return Err(Error::Parameter(format!("complex dimension q = {q} must be >= 2")));
    }
    let (q, m, n) = (u64::from(q), u64::from(m), u64::from(n));
    let num = BigUint::from(m + n + q - 1) * binomial(m + q - 2, q - 2) * binomial(n + q - 2, q - 2);
    let den = BigUint::from(q - 1);
    debug_assert!((&num % &den) == BigUint::ZERO);
    to_u64(num / den, &format!("N({q};{m},{n})"))
}

/// `Γ(k / 2)` for a positive integer `k`, by exact recurrence from `Γ(1)` or
/// `Γ(1/2)`.
pub(crate) fn gamma_half(k: u32) -> f64 {
    assert!(k > 0, "gamma_half needs a positive argument");
    let (mut value, mut x) = if k.is_multiple_of(2) { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    while 2.0 * x < f64::from(k) {
        value *= x;
        x += 1.0;
    }
    value
}

/// Gamma function, exact-recurrence path for integer and half-integer
/// arguments up to 170 and Lanczos approximation otherwise.
pub(crate) fn gamma(x: f64) -> f64 {
    let twice = 2.0 * x;
    if twice.fract() == 0.0 && x > 0.0 && x <= 170.0 {
        gamma_half(twice as u32)
    } else {
        statrs::function::gamma::gamma(x)
    }
}

/// Surface area `σ_d = 2 π^{(d+1)/2} / Γ((d+1)/2)` of the unit sphere `S^d`.
pub fn sphere_surface(d: u32) -> f64 {
    2.0 * PI.powf(f64::from(d + 1) / 2.0) / gamma_half(d + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn gegenbauer_examples() {
        assert_eq!(gegenbauer_norm(0, 3, 0.7).unwrap(), 1.0);
        close(gegenbauer_norm(1, 5, 0.25).unwrap(), 0.25, 1e-15);
        close(gegenbauer_norm(2, 2, 0.5).unwrap(), -0.125, 1e-15);
    }

    #[test]
    fn gegenbauer_errors() {
        assert!(matches!(gegenbauer_norm(2, 3, 1.1), Err(Error::Domain(_))));
        assert!(matches!(gegenbauer_norm(2, 0, 0.1), Err(Error::Parameter(_))));
        assert!(gegenbauer_norm(2, 3, 1.0 + 1e-13).is_ok());
    }

    #[test]
    fn gegenbauer_is_one_at_one() {
        for d in 1..12 {
            for n in 0..200 {
                assert_eq!(gegenbauer_norm(n, d, 1.0).unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn circle_case_is_chebyshev() {
        for n in 0..40 {
            for &x in &[-1.0, -0.3, 0.0, 0.45, 0.99] {
                let expected = (f64::from(n) * f64::acos(x)).cos();
                close(gegenbauer_norm(n, 1, x).unwrap(), expected, 1e-12);
            }
        }
    }

    // Explicit normalized Gegenbauer polynomials of degree <= 3, from
    // C_2 = 2λ(λ+1)x² - λ and C_3 = (4/3)λ(λ+1)(λ+2)x³ - 2λ(λ+1)x.
    fn gegenbauer_closed(n: u32, d: u32, x: f64) -> f64 {
        let l = f64::from(d - 1) / 2.0;
        match n {
            0 => 1.0,
            1 => x,
            2 => ((2.0 * l + 2.0) * x * x - 1.0) / (2.0 * l + 1.0),
            3 => ((2.0 * l + 4.0) * x * x * x - 3.0 * x) / (2.0 * l + 1.0),
            _ => unreachable!(),
        }
    }

    #[test]
    fn gegenbauer_matches_closed_forms() {
        for d in 2..12 {
            for n in 0..=3 {
                for i in 0..=40 {
                    let x = -1.0 + f64::from(i) / 20.0;
                    close(gegenbauer_norm(n, d, x).unwrap(), gegenbauer_closed(n, d, x), 1e-12);
                }
            }
        }
    }

    #[test]
    fn gegenbauer_high_degree_bounded() {
        for d in [2, 3, 7, 20] {
            for i in 0..=100 {
                let x = -1.0 + f64::from(i) / 50.0;
                let v = gegenbauer_norm(400, d, x).unwrap();
                assert!(v.is_finite() && v.abs() <= 1.0 + 1e-12, "d={d} x={x} v={v}");
            }
        }
    }

    #[test]
    fn jacobi_examples() {
        assert_eq!(jacobi_norm(0, 1.5, 0.0, -0.3).unwrap(), 1.0);
        close(jacobi_norm(1, 0.0, 0.0, 0.5).unwrap(), 0.5, 1e-15);
        close(jacobi_norm(2, 0.0, 0.0, 0.5).unwrap(), -0.125, 1e-15);
        assert!(matches!(jacobi_norm(2, -1.0, 0.0, 0.5), Err(Error::Parameter(_))));
        assert!(matches!(jacobi_norm(2, 0.0, -1.5, 0.5), Err(Error::Parameter(_))));
        assert!(matches!(jacobi_norm(2, 0.0, 0.0, -1.5), Err(Error::Domain(_))));
    }

    // P_2^(a,b) from the explicit sum formula
    // P_n(x) = Σ_s C(n+a, n-s) C(n+b, s) ((x-1)/2)^s ((x+1)/2)^(n-s).
    fn jacobi_sum(n: u32, a: f64, b: f64, x: f64) -> f64 {
        fn gbinom(top: f64, k: u32) -> f64 {
            (0..k).fold(1.0, |acc, j| acc * (top - f64::from(j)) / f64::from(j + 1))
        }
        (0..=n)
            .map(|s| {
                gbinom(f64::from(n) + a, n - s)
                    * gbinom(f64::from(n) + b, s)
                    * ((x - 1.0) / 2.0).powi(s as i32)
                    * ((x + 1.0) / 2.0).powi((n - s) as i32)
            })
            .sum()
    }

    #[test]
    fn jacobi_matches_explicit_sum() {
        for &(a, b) in &[(0.0, 0.0), (0.5, -0.5), (2.0, 3.0), (-0.7, 1.2), (1.0, -0.5)] {
            for n in 0..=6 {
                let at_one = jacobi_sum(n, a, b, 1.0);
                for i in 0..=20 {
                    let x = -1.0 + f64::from(i) / 10.0;
                    close(jacobi_norm(n, a, b, x).unwrap(), jacobi_sum(n, a, b, x) / at_one, 1e-12);
                }
            }
        }
    }

    #[test]
    fn gegenbauer_is_symmetric_jacobi() {
        // c_n(d, x) = R_n^(λ-1/2, λ-1/2)(x)
        for d in 1..8 {
            let a = f64::from(d) / 2.0 - 1.0;
            for n in 0..15 {
                close(gegenbauer_norm(n, d, 0.31).unwrap(), jacobi_norm(n, a, a, 0.31).unwrap(), 1e-12);
            }
        }
    }

    #[test]
    fn disc_examples() {
        close((disc_polynomial(3, 1, 0.0, Complex64::new(1.0, 0.0)).unwrap() - 1.0).norm(), 0.0, 1e-15);
        let v = disc_polynomial(2, 0, 1.0, Complex64::new(0.0, 0.5)).unwrap();
        close((v - Complex64::new(-0.25, 0.0)).norm(), 0.0, 1e-15);
        let z = Complex64::from_polar(0.6, PI / 3.0);
        let v = disc_polynomial(1, 1, 0.0, z).unwrap();
        close((v - Complex64::new(-0.28, 0.0)).norm(), 0.0, 1e-14);
        assert!(matches!(
            disc_polynomial(1, 1, 0.0, Complex64::new(1.0, 1e-3)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn dimension_examples() {
        assert_eq!(dimension_real(0, 7).unwrap(), 1);
        assert_eq!(dimension_real(1, 2).unwrap(), 3);
        assert_eq!(dimension_real(2, 2).unwrap(), 5);
        assert_eq!(dimension_real(5, 1).unwrap(), 2);
        assert_eq!(dimension_complex(2, 0, 0).unwrap(), 1);
        assert_eq!(dimension_complex(2, 3, 2).unwrap(), 6);
        // (m+n+q-1)/(q-1) · C(2,1) · C(2,1) = (4/2)·2·2
        assert_eq!(dimension_complex(3, 1, 1).unwrap(), 8);
        assert!(matches!(dimension_complex(1, 0, 0), Err(Error::Parameter(_))));
        assert!(matches!(dimension_real(3, 0), Err(Error::Parameter(_))));
    }

    #[test]
    fn dimension_real_alternative_form() {
        fn fact(k: u64) -> BigUint {
            (1..=k).fold(BigUint::one(), |acc, j| acc * j)
        }
        for n in 0..=30u64 {
            for d in 1..=10u64 {
                // (2n+d-1)(n+d-2)! / (n! (d-1)!), with N_0 = 1
                let expected = if n == 0 {
                    BigUint::one()
                } else {
                    BigUint::from(2 * n + d - 1) * fact(n + d - 2) / (fact(n) * fact(d - 1))
                };
                assert_eq!(
                    BigUint::from(dimension_real(n as u32, d as u32).unwrap()),
                    expected,
                    "n={n} d={d}"
                );
            }
        }
    }

    #[test]
    fn dimension_overflow_is_reported() {
        assert!(matches!(dimension_real(200, 200), Err(Error::Overflow(_))));
        assert!(matches!(dimension_complex(60, 200, 200), Err(Error::Overflow(_))));
    }

    #[test]
    fn surface_examples() {
        close(sphere_surface(1), 2.0 * PI, 1e-14);
        close(sphere_surface(2), 4.0 * PI, 1e-14);
        close(sphere_surface(3), 2.0 * PI * PI, 1e-13);
        close(sphere_surface(0), 2.0, 1e-15);
    }

    #[test]
    fn gamma_paths_agree() {
        for k in 1..40 {
            let x = f64::from(k) / 2.0;
            let lanczos = statrs::function::gamma::gamma(x);
            assert!((gamma(x) - lanczos).abs() <= 1e-12 * lanczos);
        }
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn gegenbauer_parity_and_bound(n in 0u32..60, d in 1u32..15, x in -1.0f64..=1.0) {
                let v = gegenbauer_norm(n, d, x).unwrap();
                let w = gegenbauer_norm(n, d, -x).unwrap();
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                prop_assert!(v.abs() <= 1.0 + 1e-12);
                prop_assert!((w - sign * v).abs() <= 1e-12);
            }

            #[test]
            fn disc_symmetries(m in 0u32..12, n in 0u32..12, q in 2u32..6,
                               r in 0.0f64..=1.0, theta in 0.0f64..6.3) {
                let alpha = f64::from(q - 2);
                let z = Complex64::from_polar(r, theta);
                let v = disc_polynomial(m, n, alpha, z).unwrap();
                prop_assert!(v.norm() <= 1.0 + 1e-12);
                let c = disc_polynomial(m, n, alpha, z.conj()).unwrap();
                prop_assert!((c - v.conj()).norm() <= 1e-12);
                let x = Complex64::new(r, 0.0);
                let a = disc_polynomial(m, n, alpha, x).unwrap();
                let b = disc_polynomial(n, m, alpha, x).unwrap();
                prop_assert!((a - b).norm() <= 1e-12);
            }
        }
    }
}
