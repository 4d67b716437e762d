//! Quadrature rules: Gauss-Legendre, Gauss-Jacobi, composite rules on
//! `[0, pi]`, and adaptive Simpson.
//!
//! Gauss-Jacobi handles the algebraic endpoint singularities of the simplex
//! integrals; the composite Gauss-Legendre rule (64 nodes per pi/8 panel) is
//! the validation rule for spectral identities, exact to machine precision
//! for the trigonometric polynomials that show up there.

use crate::special::ln_gamma;
use std::f64::consts::PI;

/// A fixed quadrature rule: integral of f over the rule's interval is
/// `sum_i w_i f(x_i)`.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Affine map of a rule on [-1, 1] to [a, b].
    pub fn mapped_to(&self, a: f64, b: f64) -> Rule {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        Rule {
            nodes: self.nodes.iter().map(|&x| mid + half * x).collect(),
            weights: self.weights.iter().map(|&w| w * half).collect(),
        }
    }
}

/// Gauss-Legendre rule with `n` nodes on [-1, 1].
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess, then Newton.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_deriv(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_deriv(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        let (_, d) = legendre_with_deriv(n, 0.0);
        nodes[n / 2] = 0.0;
        weights[n / 2] = 2.0 / (d * d);
    }
    Rule { nodes, weights }
}

fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss-Legendre rule on [0, pi]: `nodes_per_panel` nodes on each
/// of `panels` equal panels. Defaults used by the validation suite are
/// 64 nodes per pi/8 panel.
pub fn composite_0_pi(nodes_per_panel: usize, panels: usize) -> Rule {
    let base = gauss_legendre(nodes_per_panel);
    let mut nodes = Vec::with_capacity(nodes_per_panel * panels);
    let mut weights = Vec::with_capacity(nodes_per_panel * panels);
    for p in 0..panels {
        let a = PI * p as f64 / panels as f64;
        let b = PI * (p + 1) as f64 / panels as f64;
        let mapped = base.mapped_to(a, b);
        nodes.extend(mapped.nodes);
        weights.extend(mapped.weights);
    }
    Rule { nodes, weights }
}

/// Default validation rule on [0, pi].
pub fn validation_rule() -> Rule {
    composite_0_pi(64, 8)
}

/// Gauss-Jacobi rule with `n` nodes for the weight `(1-x)^a (1+x)^b` on
/// [-1, 1]: `sum w_i f(x_i) ~ int (1-x)^a (1+x)^b f(x) dx`.
///
/// Requires `a, b > -1`. Nodes are computed by interlacing bisection on the
/// orthonormal Jacobi recurrence, weights by the Christoffel formula
/// `w_i = 1 / sum_j p_j(x_i)^2`.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> Rule {
    assert!(n >= 1);
    assert!(a > -1.0 && b > -1.0, "Jacobi weight exponents must be > -1");

    // mu0 = int (1-x)^a (1+x)^b dx = 2^(a+b+1) B(a+1, b+1)
    let mu0 = (2f64.ln() * (a + b + 1.0) + ln_gamma(a + 1.0) + ln_gamma(b + 1.0)
        - ln_gamma(a + b + 2.0))
        .exp();

    // Monic three-term recurrence coefficients.
    let alpha = |k: usize| -> f64 {
        if k == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            let s = 2.0 * k as f64 + a + b;
            (b * b - a * a) / (s * (s + 2.0))
        }
    };
    let beta = |k: usize| -> f64 {
        // k >= 1; the k = 1 case is the cancelled limit (valid at a+b = -1).
        if k == 1 {
            4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b).powi(2) * (3.0 + a + b))
        } else {
            let kf = k as f64;
            let s = 2.0 * kf + a + b;
            4.0 * kf * (kf + a) * (kf + b) * (kf + a + b)
                / (s * s * (s + 1.0) * (s - 1.0))
        }
    };

    let sqrt_beta: Vec<f64> = (1..=n).map(|k| beta(k).sqrt()).collect();

    // Orthonormal polynomial values p_0..p_deg at x.
    let eval_all = |x: f64, deg: usize, out: &mut Vec<f64>| {
        out.clear();
        out.push(1.0 / mu0.sqrt());
        if deg >= 1 {
            out.push((x - alpha(0)) * out[0] / sqrt_beta[0]);
        }
        for k in 1..deg {
            let next =
                ((x - alpha(k)) * out[k] - sqrt_beta[k - 1] * out[k - 1]) / sqrt_beta[k];
            out.push(next);
        }
    };
    let eval_n = |x: f64| -> f64 {
        let mut buf = Vec::with_capacity(n + 1);
        eval_all(x, n, &mut buf);
        buf[n]
    };

    // Roots by interlacing: roots of p_{k+1} are separated by roots of p_k.
    let mut roots = vec![alpha(0)];
    for deg in 2..=n {
        let mut next = Vec::with_capacity(deg);
        let mut bounds = Vec::with_capacity(deg + 1);
        bounds.push(-1.0);
        bounds.extend(&roots);
        bounds.push(1.0);
        let eval_deg = |x: f64| -> f64 {
            let mut buf = Vec::with_capacity(deg + 1);
            eval_all(x, deg, &mut buf);
            buf[deg]
        };
        for w in bounds.windows(2) {
            let (mut lo, mut hi) = (w[0], w[1]);
            let flo = eval_deg(lo);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let fm = eval_deg(mid);
                if (fm > 0.0) == (flo > 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-16 {
                    break;
                }
            }
            next.push(0.5 * (lo + hi));
        }
        roots = next;
    }
    debug_assert_eq!(roots.len(), n);
    let _ = eval_n;

    let mut buf = Vec::with_capacity(n + 1);
    let weights = roots
        .iter()
        .map(|&x| {
            eval_all(x, n, &mut buf);
            let s: f64 = buf[..n].iter().map(|p| p * p).sum();
            1.0 / s
        })
        .collect();

    Rule {
        nodes: roots,
        weights,
    }
}

/// Gauss-Jacobi rule mapped to [0, t] for integrands of the form
/// `(t-s)^(-mu) * s^(-nu) * f(s)` with smooth `f`:
/// returns a rule such that `sum w_i g(x_i)` approximates
/// `int_0^t (t-s)^(-mu) s^(-nu) g(s) ds` where the singular factors are
/// folded into the weights.
pub fn gauss_jacobi_0_t(n: usize, mu: f64, nu: f64, t: f64) -> Rule {
    // s = t(1+x)/2: (t-s) = t(1-x)/2, ds = t/2 dx
    let base = gauss_jacobi(n, -mu, -nu);
    let scale = (t / 2.0).powf(1.0 - mu - nu);
    Rule {
        nodes: base.nodes.iter().map(|&x| t * (1.0 + x) / 2.0).collect(),
        weights: base.weights.iter().map(|&w| w * scale).collect(),
    }
}

/// Adaptive Simpson quadrature of `f` over [a, b] to absolute tolerance
/// `tol`.
pub fn adaptive_simpson(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &mut impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let err = left + right - whole;
    if depth == 0 || err.abs() <= 15.0 * tol {
        left + right + err / 15.0
    } else {
        simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
}

/// Beta function via ln_gamma.
pub fn beta_fn(p: f64, q: f64) -> f64 {
    (ln_gamma(p) + ln_gamma(q) - ln_gamma(p + q)).exp()
}
