//! Independent verification routes. Everything in this module deliberately
//! avoids the production code paths it checks: the simplex oracle integrates
//! over the time simplex by endpoint-weighted quadrature instead of the
//! Gamma closed form, the propagator oracle evaluates the iterated-integral
//! solution formula by pointwise kernel quadrature instead of the
//! exponential-polynomial recursion, and the kernel oracle sums Gaussian
//! images instead of the spectral series.

use crate::chaos_index::MultiIndex;
use crate::quad::{adaptive_simpson, composite_0_pi, gauss_jacobi_0_t, Rule};
use crate::spectral_basis::{CosineBasis, SpectralFunction};
use std::f64::consts::PI;

/// Nested quadrature for the simplex integral `I_n(t; alpha, beta)`.
///
/// Each level integrates `int_0^S (S - r)^{-mu} G(r) dr` with the upper
/// endpoint singularity folded into a Gauss-Jacobi weight and the lower
/// endpoint handled by the substitution `r = S u^4`, which turns the
/// quarter-grid algebraic behaviour of `G` at zero into polynomial
/// behaviour. Cost is `nodes^n` integrand evaluations.
pub fn simplex_quadrature(n: u32, t: f64, alpha: f64, beta: f64, nodes: usize) -> f64 {
    assert!(n >= 1);
    // rule for int_0^1 (1-u)^{-mu} g(u) du
    let top = gauss_jacobi_0_t(nodes, alpha, 0.0, 1.0);
    let mid = gauss_jacobi_0_t(nodes, 0.25, 0.0, 1.0);

    // (1 - u^4)^{-mu} = (1-u)^{-mu} * [(1+u)(1+u^2)]^{-mu}
    let smooth = |u: f64, mu: f64| ((1.0 + u) * (1.0 + u * u)).powf(-mu);

    fn level(j: u32, s: f64, beta: f64, mid: &Rule, smooth: &dyn Fn(f64, f64) -> f64) -> f64 {
        if j == 1 {
            4.0 * s.powf(0.75 - beta)
                * mid.integrate(|u| smooth(u, 0.25) * u.powf(3.0 - 4.0 * beta))
        } else {
            4.0 * s.powf(0.75)
                * mid.integrate(|u| {
                    smooth(u, 0.25) * u.powi(3) * level(j - 1, s * u.powi(4), beta, mid, smooth)
                })
        }
    }

    if n == 1 {
        4.0 * t.powf(1.0 - alpha - beta)
            * top.integrate(|u| smooth(u, alpha) * u.powf(3.0 - 4.0 * beta))
    } else {
        4.0 * t.powf(1.0 - alpha)
            * top.integrate(|u| {
                smooth(u, alpha) * u.powi(3) * level(n - 1, t * u.powi(4), beta, &mid, &smooth)
            })
    }
}

/// `int_0^t (t-s)^{-mu} f(s) ds` for `f` with quarter-grid algebraic
/// behaviour at zero: Gauss-Jacobi weight at the upper endpoint, `s = t u^4`
/// substitution at the lower one.
pub fn singular_upper_integral(mu: f64, t: f64, nodes: usize, f: impl Fn(f64) -> f64) -> f64 {
    let rule = gauss_jacobi_0_t(nodes, mu, 0.0, 1.0);
    4.0 * t.powf(1.0 - mu)
        * rule.integrate(|u| {
            ((1.0 + u) * (1.0 + u * u)).powf(-mu) * u.powi(3) * f(t * u.powi(4))
        })
}

/// Method-of-images evaluation of the Neumann heat kernel on `(0, pi)`:
/// reflected Gaussians instead of the cosine series.
pub fn kernel_image_sum(t: f64, x: f64, y: f64, images: i64) -> f64 {
    assert!(t > 0.0);
    let g = |z: f64| (-z * z / (4.0 * t)).exp() / (4.0 * PI * t).sqrt();
    let mut total = 0.0;
    for n in -images..=images {
        let shift = 2.0 * PI * n as f64;
        total += g(x - y + shift) + g(x + y + shift);
    }
    total
}

/// Direct numerical evaluation of the iterated-integral chaos solution:
///
/// `u_alpha(t,x) = (1/sqrt(alpha!)) sum_{sigma} int_simplex
///   (Phi_{t-s_n} M_{k_sigma(n)} ... M_{k_sigma(1)} Phi_{s_1} u_0)(x) ds`
///
/// with the semigroup applied through the truncated kernel by composite
/// Gauss-Legendre quadrature in space and nested adaptive Simpson over the
/// time simplex. Supports chaos orders 1 and 2, which is what the oracle
/// comparisons use.
pub struct IteratedIntegralOracle {
    kernel_terms: usize,
    space_rule: Rule,
    /// basis values m_k(node), k-major
    mode_table: Vec<f64>,
    time_tol: f64,
}

impl IteratedIntegralOracle {
    pub fn new(kernel_terms: usize) -> Self {
        let space_rule = composite_0_pi(16, 8);
        let mode_table = (1..=kernel_terms)
            .flat_map(|k| {
                space_rule
                    .nodes
                    .iter()
                    .map(move |&y| CosineBasis::eval(k, y))
                    .collect::<Vec<_>>()
            })
            .collect();
        IteratedIntegralOracle {
            kernel_terms,
            space_rule,
            mode_table,
            time_tol: 1e-8,
        }
    }

    /// Apply the truncated kernel
    /// `p(tau, y, z) = sum_k e^{-(k-1)^2 tau} m_k(y) m_k(z)` to grid values
    /// by quadrature. The kernel factorizes over modes, so the quadrature
    /// sum `sum_j w_j p(tau, y_i, z_j) v_j` is evaluated as analysis,
    /// exponential decay, and synthesis; the composite rule integrates the
    /// band-limited products exactly, so this is the same number the dense
    /// kernel matrix would give. At tau = 0 it is the projection onto the
    /// first `kernel_terms` modes, which is exactly the truncation the
    /// spectral solver applies after each multiplication.
    fn apply_kernel(&self, tau: f64, values: &[f64]) -> Vec<f64> {
        let q = self.space_rule.nodes.len();
        let mut out = vec![0.0; q];
        for k in 0..self.kernel_terms {
            let row = &self.mode_table[k * q..(k + 1) * q];
            let coeff: f64 = self
                .space_rule
                .weights
                .iter()
                .zip(row)
                .zip(values)
                .map(|((&w, &m), &v)| w * m * v)
                .sum();
            let decayed = coeff * (-((k * k) as f64) * tau).exp();
            for (o, &m) in out.iter_mut().zip(row) {
                *o += decayed * m;
            }
        }
        out
    }

    /// Same, evaluated at a single observation point.
    fn apply_kernel_at(&self, tau: f64, values: &[f64], x: f64) -> f64 {
        let q = self.space_rule.nodes.len();
        let mut total = 0.0;
        for k in 0..self.kernel_terms {
            let row = &self.mode_table[k * q..(k + 1) * q];
            let coeff: f64 = self
                .space_rule
                .weights
                .iter()
                .zip(row)
                .zip(values)
                .map(|((&w, &m), &v)| w * m * v)
                .sum();
            total += coeff * (-((k * k) as f64) * tau).exp() * CosineBasis::eval(k + 1, x);
        }
        total
    }

    fn multiply(&self, j: u32, values: &[f64]) -> Vec<f64> {
        self.space_rule
            .nodes
            .iter()
            .zip(values)
            .map(|(&y, &v)| CosineBasis::eval(j as usize, y) * v)
            .collect()
    }

    /// The simplex integral of one operator chain
    /// `Phi_{t-s_n} M_{sigma(n)} ... M_{sigma(1)} Phi_{s_1} u0` evaluated at
    /// `x`; the chain order matters, only the permutation sum is canonical.
    pub fn chain_value(&self, sigma: &[u32], t: f64, x: f64, u0: &SpectralFunction) -> f64 {
        let u0_grid: Vec<f64> = self.space_rule.nodes.iter().map(|&z| u0.eval(z)).collect();
        match *sigma {
            [j] => {
                let mut f = |s: f64| {
                    let flowed = self.apply_kernel(s, &u0_grid);
                    let forced = self.multiply(j, &flowed);
                    self.apply_kernel_at(t - s, &forced, x)
                };
                adaptive_simpson(&mut f, 0.0, t, self.time_tol)
            }
            [j1, j2] => {
                let mut outer = |s2: f64| {
                    let mut inner = |s1: f64| {
                        let flowed = self.apply_kernel(s1, &u0_grid);
                        let f1 = self.multiply(j1, &flowed);
                        let flowed2 = self.apply_kernel(s2 - s1, &f1);
                        let f2 = self.multiply(j2, &flowed2);
                        self.apply_kernel_at(t - s2, &f2, x)
                    };
                    adaptive_simpson(&mut inner, 0.0, s2, self.time_tol)
                };
                adaptive_simpson(&mut outer, 0.0, t, self.time_tol * 10.0)
            }
            _ => panic!("oracle implemented for chaos orders 1 and 2"),
        }
    }

    /// `u_alpha(t, x)` for `|alpha| in {1, 2}` with initial data `u0`.
    pub fn u_alpha(&self, alpha: &MultiIndex, t: f64, x: f64, u0: &SpectralFunction) -> f64 {
        let char_set = alpha
            .characteristic_set()
            .expect("oracle needs order >= 1")
            .indices()
            .to_vec();
        let mut total = match char_set[..] {
            [j] => self.chain_value(&[j], t, x, u0),
            [j1, j2] => {
                self.chain_value(&[j1, j2], t, x, u0) + self.chain_value(&[j2, j1], t, x, u0)
            }
            _ => panic!("oracle implemented for chaos orders 1 and 2"),
        };
        total /= alpha.factorial().sqrt();
        total
    }
}
