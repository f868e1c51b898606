//! Bessel functions needed by the radial Fourier transforms and the radial
//! Dirichlet reference solution.

use std::f64::consts::{FRAC_PI_4, PI};

/// Modified Bessel function I₀(x) = Σ (x/2)^{2m} / (m!)², summed until the
/// terms stop contributing. Accurate to a few ulps for |x| ≲ 50.
pub fn bessel_i0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut m = 1.0;
    loop {
        term *= q / (m * m);
        sum += term;
        if term < f64::EPSILON * sum {
            break;
        }
        m += 1.0;
    }
    sum
}

/// Bessel function of the first kind J₀(x).
///
/// Power series below |x| = 12, Hankel's asymptotic expansion (truncated at
/// its smallest term) above. Absolute error below 1e-10 everywhere.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x < 12.0 {
        let q = -0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut m = 1.0;
        while m < 200.0 {
            term *= q / (m * m);
            sum += term;
            if term.abs() < 1e-17 {
                break;
            }
            m += 1.0;
        }
        return sum;
    }
    // P ~ Σ (-1)^k a_{2k}/x^{2k}, Q ~ Σ (-1)^k a_{2k+1}/x^{2k+1},
    // a_k = Π_{j=1..k} (-(2j-1)²) / (k! 8^k) for ν = 0
    let mut p = 0.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut prev = f64::INFINITY;
    for k in 0..60 {
        if k > 0 {
            let j = (2 * k - 1) as f64;
            a *= -(j * j) / (k as f64 * 8.0 * x);
        }
        if a.abs() > prev {
            break;
        }
        prev = a.abs();
        match k % 4 {
            0 => p += a,
            1 => q += a,
            2 => p -= a,
            _ => q -= a,
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}
