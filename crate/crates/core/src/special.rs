//! Gamma-function helpers used throughout the crate.
//!
//! Everything is routed through `ln_gamma` so that large arguments (Gamma of
//! order `3n/4` for chaos order `n`) never overflow.

use std::f64::consts::PI;

/// Lanczos coefficients, g = 7, 9 terms.
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the Gamma function for `x > 0`.
///
/// Relative accuracy is about 1e-13, which is far below every tolerance in
/// the test suite.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma requires a positive argument, got {x}");
    if x < 0.5 {
        // reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + 7.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Gamma function for `x > 0`; overflows to `inf` past x ~ 171.6.
pub fn gamma(x: f64) -> f64 {
    ln_gamma(x).exp()
}

/// Exact factorials up to 20! fit in f64 without rounding.
const FACTORIALS: [f64; 21] = [
    1.0,
    1.0,
    2.0,
    6.0,
    24.0,
    120.0,
    720.0,
    5040.0,
    40320.0,
    362880.0,
    3628800.0,
    39916800.0,
    479001600.0,
    6227020800.0,
    87178291200.0,
    1307674368000.0,
    20922789888000.0,
    355687428096000.0,
    6402373705728000.0,
    121645100408832000.0,
    2432902008176640000.0,
];

/// n! as f64, exact for n <= 20, via ln_gamma above that.
pub fn factorial(n: u32) -> f64 {
    if (n as usize) < FACTORIALS.len() {
        FACTORIALS[n as usize]
    } else {
        ln_gamma(n as f64 + 1.0).exp()
    }
}

/// ln(n!)
pub fn ln_factorial(n: u32) -> f64 {
    if (n as usize) < FACTORIALS.len() {
        FACTORIALS[n as usize].ln()
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// binomial(n, k) as f64
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}
