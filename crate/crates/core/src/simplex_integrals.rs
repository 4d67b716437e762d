//! Closed-form integrals over the ordered time simplex with algebraic
//! endpoint singularities, the factorial-decay bounds they produce, and the
//! truncation-tail estimates derived from those bounds.
//!
//! `I_1(t; a, b) = int_0^t (t-s)^{-a} s^{-b} ds` and for `n >= 2`
//! `I_n(t; a, b)` integrates `(t - s_n)^{-a} prod (s_k - s_{k-1})^{-1/4}
//! s_1^{-b}` over `0 < s_1 < ... < s_n < t`. Everything evaluates through
//! log-Gamma so large depths cannot overflow.

use crate::special::{ln_factorial, ln_gamma};
use crate::Error;
use serde::{Deserialize, Serialize};

/// Validated parameters for a simplex integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimplexIntegralSpec {
    pub n: u32,
    pub alpha: f64,
    pub beta: f64,
    pub t: f64,
}

impl SimplexIntegralSpec {
    pub fn new(n: u32, alpha: f64, beta: f64, t: f64) -> Result<Self, Error> {
        if n < 1 {
            return Err(Error::ParameterOutOfRange {
                parameter: "n",
                value: n as f64,
                bound: "n >= 1",
            });
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::ParameterOutOfRange {
                parameter: "alpha",
                value: alpha,
                bound: "alpha in (0, 1)",
            });
        }
        if !(0.0..1.0).contains(&beta) {
            return Err(Error::ParameterOutOfRange {
                parameter: "beta",
                value: beta,
                bound: "beta in [0, 1)",
            });
        }
        if t <= 0.0 {
            return Err(Error::ParameterOutOfRange {
                parameter: "t",
                value: t,
                bound: "t > 0",
            });
        }
        Ok(SimplexIntegralSpec { n, alpha, beta, t })
    }
}

/// `ln I_n(t; alpha, beta)` by the Gamma-function closed form.
pub fn ln_simplex_integral(spec: &SimplexIntegralSpec) -> f64 {
    let n = spec.n as f64;
    let (a, b, t) = (spec.alpha, spec.beta, spec.t);
    (n - 1.0) * ln_gamma(0.75) + ln_gamma(1.0 - a) + ln_gamma(1.0 - b)
        - ln_gamma((3.0 * n + 5.0 - 4.0 * a - 4.0 * b) / 4.0)
        + (3.0 * n + 1.0 - 4.0 * a - 4.0 * b) / 4.0 * t.ln()
}

/// `I_n(t; alpha, beta)` by the closed form.
pub fn simplex_integral(spec: &SimplexIntegralSpec) -> f64 {
    ln_simplex_integral(spec).exp()
}

/// One row of the factorial-decay table.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FactorialDecayRow {
    pub n: u32,
    pub integral: f64,
    /// `n! I_n^2`
    pub weighted_square: f64,
    /// the smallest constant C making `n! I_n^2 <= C^n n^{-n/2}` at this n
    pub c_required: f64,
}

/// `n! I_n^2(t; a, b)` against the envelope `C^n n^{-n/2}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactorialDecayReport {
    pub alpha: f64,
    pub beta: f64,
    pub t: f64,
    pub rows: Vec<FactorialDecayRow>,
    /// smallest C making the bound hold for every depth up to the cap
    pub c_min: f64,
}

pub fn factorial_decay_bound(
    n: u32,
    alpha: f64,
    beta: f64,
    t: f64,
) -> Result<FactorialDecayReport, Error> {
    let mut rows = Vec::with_capacity(n as usize);
    let mut c_min = 0.0f64;
    for m in 1..=n {
        let spec = SimplexIntegralSpec::new(m, alpha, beta, t)?;
        let ln_i = ln_simplex_integral(&spec);
        let ln_weighted = ln_factorial(m) + 2.0 * ln_i;
        let mf = m as f64;
        let c_required = ((ln_weighted + 0.5 * mf * mf.ln()) / mf).exp();
        c_min = c_min.max(c_required);
        rows.push(FactorialDecayRow {
            n: m,
            integral: ln_i.exp(),
            weighted_square: ln_weighted.exp(),
            c_required,
        });
    }
    Ok(FactorialDecayReport {
        alpha,
        beta,
        t,
        rows,
        c_min,
    })
}

/// The constant of the per-order variance bound
/// `sum_{|alpha|=n} ||u_alpha(t)||^2 <= C(t)^n n^{-n/2} ||u_0||^2`:
/// `C(t) = (4/3)^{3/2} e^{1/2} Gamma(3/4)^2 (1 + sqrt(t))^2 t^{3/2}`.
pub fn stirling_constant(t: f64) -> f64 {
    assert!(t > 0.0);
    (4.0f64 / 3.0).powf(1.5)
        * 0.5f64.exp()
        * (2.0 * ln_gamma(0.75)).exp()
        * (1.0 + t.sqrt()).powi(2)
        * t.powf(1.5)
}

/// Envelope value `C(t)^n n^{-n/2}` for `n >= 1` (1 for `n = 0`).
pub fn stirling_envelope(t: f64, n: u32) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let nf = n as f64;
    (nf * stirling_constant(t).ln() - 0.5 * nf * nf.ln()).exp()
}

/// Conservative bound on the variance mass above the truncation order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailEstimate {
    pub order_cap: u32,
    pub c_t: f64,
    /// `||u_0||^2 sum_{n > N} C(t)^n n^{-n/2}`; infinite when the envelope
    /// is not summable in f64 range (large t makes the paper constant
    /// vacuous at small orders)
    pub tail: f64,
    /// whether C(t) < 1, in which case the geometric bound
    /// `C^{N+1}/(1-C) ||u_0||^2` also applies
    pub contractive: bool,
    /// ratio of the last computed order variance to its envelope value
    pub envelope_slack: f64,
}

/// `sum_{n >= from} c^n n^{-n/2}`, saturating to infinity when a term
/// leaves f64 range (large c makes the paper envelope vacuous at small
/// orders, which is reported honestly rather than clamped).
pub fn envelope_tail(c: f64, from: u32) -> f64 {
    let ln_c = c.ln();
    let mut tail = 0.0f64;
    let mut n = from.max(1) as f64;
    // terms grow until n ~ c^2/e, then decay super-exponentially
    let turnover = (c * c / 1.0f64.exp()).max(n);
    loop {
        let ln_term = n * ln_c - 0.5 * n * n.ln();
        if ln_term > 700.0 {
            return f64::INFINITY;
        }
        let term = ln_term.exp();
        tail += term;
        if n > turnover && term < 1e-18 * tail.max(1e-300) {
            return tail;
        }
        n += 1.0;
    }
}

/// Tail estimate `sum_{n > N} C(t)^n n^{-n/2} ||u_0||^2` from the computed
/// order variances `v[0..=N]`. Requires at least orders 0..2.
pub fn truncation_tail_estimate(
    order_variances: &[f64],
    t: f64,
    u0_norm_sq: f64,
) -> Result<TailEstimate, Error> {
    if order_variances.len() < 3 {
        return Err(Error::TailNeedsTwoOrders);
    }
    let order_cap = (order_variances.len() - 1) as u32;
    let c_t = stirling_constant(t);
    let tail = envelope_tail(c_t, order_cap + 1);
    let last = order_variances[order_cap as usize];
    let envelope = stirling_envelope(t, order_cap) * u0_norm_sq;
    Ok(TailEstimate {
        order_cap,
        c_t,
        tail: tail * u0_norm_sq,
        contractive: c_t < 1.0,
        envelope_slack: if envelope > 0.0 { last / envelope } else { f64::NAN },
    })
}
