//! The lower-triangular propagator system for the chaos coefficients,
//! solved exactly in the cosine basis with an exponential-polynomial time
//! representation, plus the fundamental-solution mode and the deterministic
//! positivity certificate.
//!
//! The coefficient of mode `k` for multi-index `alpha` obeys
//! `d u_{alpha,k}/dt = -(k-1)^2 u_{alpha,k} + sum_j sqrt(alpha_j) sum_l
//! T[j,l,k] u_{alpha-(j),l}`, so each order is a Duhamel integral of the
//! previous one. All decay rates are integers `(k-1)^2`, which makes the
//! resonant branch of the Duhamel integral an exact equality test.

use crate::chaos_index::{enumerate_multiindices, MultiIndex};
use crate::linalg::{symmetric_eigen, SymmetricMatrix};
use crate::simplex_integrals::{stirling_constant, stirling_envelope};
use crate::special::binomial;
use crate::spectral_basis::{triple_product, CosineBasis, SpectralFunction};
use crate::Error;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// An exact exponential polynomial `t -> sum c t^m e^{-lambda t}` with
/// integer decay rates, closed under addition, scaling, and Duhamel
/// integration against `e^{-mu (t-s)}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExpPoly {
    /// (rate, degree) -> coefficient; keys unique by construction.
    terms: BTreeMap<(u64, u32), f64>,
}

impl ExpPoly {
    pub fn zero() -> Self {
        ExpPoly::default()
    }

    pub fn constant(c: f64) -> Self {
        ExpPoly::term(c, 0, 0)
    }

    /// `c t^degree e^{-rate t}`
    pub fn term(c: f64, degree: u32, rate: u64) -> Self {
        let mut terms = BTreeMap::new();
        if c != 0.0 {
            terms.insert((rate, degree), c);
        }
        ExpPoly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u32, f64)> + '_ {
        self.terms.iter().map(|(&(r, d), &c)| (r, d, c))
    }

    pub fn add_scaled(&mut self, other: &ExpPoly, factor: f64) {
        if factor == 0.0 {
            return;
        }
        for (&key, &c) in &other.terms {
            let entry = self.terms.entry(key).or_insert(0.0);
            *entry += factor * c;
            if *entry == 0.0 {
                self.terms.remove(&key);
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        if factor == 0.0 {
            self.terms.clear();
        } else {
            for c in self.terms.values_mut() {
                *c *= factor;
            }
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut total = 0.0;
        let mut cur_rate = u64::MAX;
        let mut decay = 0.0;
        for (&(rate, degree), &c) in &self.terms {
            if rate != cur_rate {
                cur_rate = rate;
                decay = (-(rate as f64) * t).exp();
            }
            total += c * t.powi(degree as i32) * decay;
        }
        total
    }

    /// Value at t = 0: only degree-0 terms survive.
    pub fn at_zero(&self) -> f64 {
        self.terms
            .iter()
            .filter(|(&(_, d), _)| d == 0)
            .map(|(_, &c)| c)
            .sum()
    }

    /// Exact Duhamel integral `t -> int_0^t e^{-mu (t-s)} g(s) ds`.
    ///
    /// The resonant branch (`rate == mu`) raises the polynomial degree; the
    /// non-resonant branch splits into the forcing rate and the homogeneous
    /// rate `mu`.
    pub fn duhamel(&self, mu: u64) -> ExpPoly {
        let mut out = ExpPoly::zero();
        for (&(rate, degree), &c) in &self.terms {
            if rate == mu {
                let entry = out.terms.entry((mu, degree + 1)).or_insert(0.0);
                *entry += c / (degree + 1) as f64;
            } else {
                let delta = mu as f64 - rate as f64;
                // int_0^t s^m e^{delta s} ds, multiplied by e^{-mu t}
                let m = degree;
                let mut falling = 1.0; // m! / (m-i)!
                let mut sign = 1.0;
                for i in 0..=m {
                    if i > 0 {
                        falling *= (m - i + 1) as f64;
                        sign = -sign;
                    }
                    let coeff = c * sign * falling / delta.powi(i as i32 + 1);
                    let entry = out.terms.entry((rate, m - i)).or_insert(0.0);
                    *entry += coeff;
                }
                let boundary = c * (-1.0f64).powi(m as i32 + 1) * falling / delta.powi(m as i32 + 1);
                let entry = out.terms.entry((mu, 0)).or_insert(0.0);
                *entry += boundary;
            }
        }
        out.terms.retain(|_, c| *c != 0.0);
        // A Duhamel integral vanishes at t = 0 identically; accumulated
        // rounding across degree-0 terms leaves an ulp-level residue, which
        // this loop pushes down to the summation granularity by correcting
        // the smallest degree-0 coefficient (where the adjustment is
        // representable).
        for _ in 0..4 {
            let residue = out.at_zero();
            if residue == 0.0 {
                break;
            }
            let target = out
                .terms
                .iter()
                .filter(|(&(_, d), _)| d == 0)
                .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .map(|(&key, _)| key)
                .unwrap_or((mu, 0));
            let entry = out.terms.entry(target).or_insert(0.0);
            *entry -= residue;
        }
        out.terms.retain(|_, c| *c != 0.0);
        out
    }

    /// Drop terms with coefficients below `rel_threshold` times the largest
    /// coefficient magnitude; returns the absolute mass removed.
    pub fn prune(&mut self, rel_threshold: f64) -> f64 {
        let max = self
            .terms
            .values()
            .fold(0.0f64, |acc, c| acc.max(c.abs()));
        if max == 0.0 {
            return 0.0;
        }
        let cut = rel_threshold * max;
        let mut removed = 0.0;
        self.terms.retain(|_, c| {
            if c.abs() < cut {
                removed += c.abs();
                false
            } else {
                true
            }
        });
        removed
    }
}

/// Solver knobs.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Refuse solves that would allocate more than this many `(alpha, k)`
    /// coefficient slots.
    pub budget: usize,
    /// Relative pruning threshold for exponential-polynomial terms.
    pub prune_rel: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            budget: 2_000_000,
            prune_rel: 1e-14,
        }
    }
}

/// A truncated chaos expansion of the solution: one exponential-polynomial
/// spectral coefficient per stored multi-index and cosine mode.
#[derive(Debug, Clone)]
pub struct ChaosField {
    order_cap: u32,
    modes: usize,
    noise_modes: usize,
    u0: SpectralFunction,
    coeffs: BTreeMap<MultiIndex, Vec<ExpPoly>>,
    pruned_mass: f64,
}

impl ChaosField {
    pub fn order_cap(&self) -> u32 {
        self.order_cap
    }

    /// Spectral truncation K.
    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Noise-mode truncation M.
    pub fn noise_modes(&self) -> usize {
        self.noise_modes
    }

    pub fn u0(&self) -> &SpectralFunction {
        &self.u0
    }

    pub fn pruned_mass(&self) -> f64 {
        self.pruned_mass
    }

    /// Stored multi-indices in canonical order.
    pub fn alphas(&self) -> impl Iterator<Item = &MultiIndex> {
        self.coeffs.keys()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coefficient(&self, alpha: &MultiIndex) -> Option<&[ExpPoly]> {
        self.coeffs.get(alpha).map(|v| v.as_slice())
    }

    fn require(&self, alpha: &MultiIndex) -> Result<&[ExpPoly], Error> {
        self.coefficient(alpha).ok_or_else(|| Error::OutsideTruncation {
            alpha: alpha.to_string(),
            order_cap: self.order_cap,
            noise_modes: self.noise_modes,
        })
    }

    /// The spectral profile of `u_alpha(t, .)`.
    pub fn coefficient_profile(&self, alpha: &MultiIndex, t: f64) -> Result<SpectralFunction, Error> {
        let polys = self.require(alpha)?;
        Ok(SpectralFunction::new(
            polys.iter().map(|p| p.eval(t)).collect(),
        ))
    }

    /// `u_alpha(t, x) = sum_k u_{alpha,k}(t) m_k(x)`.
    pub fn eval_coefficient(&self, alpha: &MultiIndex, t: f64, x: f64) -> Result<f64, Error> {
        let polys = self.require(alpha)?;
        Ok(polys
            .iter()
            .enumerate()
            .map(|(i, p)| p.eval(t) * CosineBasis::eval(i + 1, x))
            .sum())
    }

    /// Spatial derivative of the coefficient (spectral differentiation).
    pub fn eval_coefficient_dx(&self, alpha: &MultiIndex, t: f64, x: f64) -> Result<f64, Error> {
        let polys = self.require(alpha)?;
        Ok(polys
            .iter()
            .enumerate()
            .map(|(i, p)| p.eval(t) * CosineBasis::eval_dx(i + 1, x))
            .sum())
    }

    /// `sum_{|alpha| = n} ||u_alpha(t, .)||_0^2`
    pub fn order_variance(&self, n: u32, t: f64) -> f64 {
        self.coeffs
            .iter()
            .filter(|(alpha, _)| alpha.order() == n)
            .map(|(_, polys)| polys.iter().map(|p| p.eval(t).powi(2)).sum::<f64>())
            .sum()
    }

    /// Per-order variances `v_0..v_N` at time t.
    pub fn order_variances(&self, t: f64) -> Vec<f64> {
        (0..=self.order_cap).map(|n| self.order_variance(n, t)).collect()
    }

    /// Coefficient export CSV: one row per exponential-polynomial term.
    pub fn coefficients_csv(&self) -> String {
        let mut out = String::from("alpha_canonical_text,k,term_lambda,term_degree,term_coeff\n");
        for (alpha, polys) in &self.coeffs {
            for (k, poly) in polys.iter().enumerate() {
                for (rate, degree, c) in poly.iter() {
                    out.push_str(&format!(
                        "{},{},{},{},{:.16e}\n",
                        alpha,
                        k + 1,
                        rate,
                        degree,
                        c
                    ));
                }
            }
        }
        out
    }

    /// JSON sidecar with the truncation parameters and Stirling-bound
    /// diagnostics at the given times.
    pub fn metadata_json(&self, u0_label: &str, times: &[f64]) -> serde_json::Value {
        let u0_norm_sq = self.u0.norm0_sq();
        let stirling: Vec<serde_json::Value> = times
            .iter()
            .map(|&t| {
                let rows: Vec<serde_json::Value> = (0..=self.order_cap)
                    .map(|n| {
                        let v = self.order_variance(n, t);
                        let bound = stirling_envelope(t, n) * u0_norm_sq;
                        serde_json::json!({
                            "order": n,
                            "variance": v,
                            "bound": bound,
                            "ratio": if bound > 0.0 { v / bound } else { f64::NAN },
                        })
                    })
                    .collect();
                serde_json::json!({ "t": t, "c_t": stirling_constant(t), "orders": rows })
            })
            .collect();
        serde_json::json!({
            "order_cap": self.order_cap,
            "wavenumber_cap": self.modes,
            "noise_modes": self.noise_modes,
            "u0": u0_label,
            "u0_norm_sq": u0_norm_sq,
            "pruned_mass": self.pruned_mass,
            "stirling": stirling,
        })
    }
}

/// Up to two spectral modes are coupled to `(j, k)` by the triple-product
/// selection rule; returns `(l, T[j,l,k])` pairs with `l <= max_l`.
fn coupled_modes(j: usize, k: usize, max_l: usize) -> Vec<(usize, f64)> {
    let mut out = Vec::with_capacity(2);
    let push = |out: &mut Vec<(usize, f64)>, l: usize| {
        if l >= 1 && l <= max_l {
            let t = triple_product(j, l, k);
            if t != 0.0 {
                out.push((l, t));
            }
        }
    };
    if j == 1 {
        push(&mut out, k);
    } else if k == 1 {
        push(&mut out, j);
    } else {
        let (a, c) = (j - 1, k - 1);
        push(&mut out, a + c + 1);
        let diff = a.abs_diff(c);
        push(&mut out, diff + 1); // diff = 0 hits the constant mode l = 1
    }
    out
}

/// Solve the propagator system exactly for all multi-indices with order up
/// to `order_cap` and support in the first `noise_modes` basis elements,
/// keeping `modes` spectral coefficients per index.
pub fn solve_propagator(
    u0: &SpectralFunction,
    order_cap: u32,
    modes: usize,
    noise_modes: usize,
    opts: &SolveOptions,
) -> Result<ChaosField, Error> {
    assert!(modes >= 1 && noise_modes >= 1);
    if u0.modes() > modes {
        return Err(Error::ParameterOutOfRange {
            parameter: "u0 modes",
            value: u0.modes() as f64,
            bound: "u0 band limit <= wavenumber cap",
        });
    }
    let mut index_count = 0usize;
    for n in 0..=order_cap {
        index_count += binomial((n + noise_modes as u32 - 1) as u64, n as u64) as usize;
    }
    let slots = index_count * modes;
    if slots > opts.budget {
        return Err(Error::BudgetExceeded {
            count: slots,
            cap: opts.budget,
        });
    }

    let mut padded = u0.coeffs.clone();
    padded.resize(modes, 0.0);
    let u0 = SpectralFunction::new(padded);

    let mut coeffs: BTreeMap<MultiIndex, Vec<ExpPoly>> = BTreeMap::new();
    let zero_order: Vec<ExpPoly> = (0..modes)
        .map(|i| ExpPoly::term(u0.coeffs[i], 0, (CosineBasis::eigenvalue(i + 1)) as u64))
        .collect();
    coeffs.insert(MultiIndex::zero(), zero_order);

    let mut pruned_total = 0.0;
    for n in 1..=order_cap {
        let alphas = enumerate_multiindices(n, noise_modes as u32);
        let solved: Vec<(MultiIndex, Vec<ExpPoly>, f64)> = alphas
            .into_par_iter()
            .map(|alpha| {
                let mut polys = Vec::with_capacity(modes);
                let mut pruned = 0.0;
                for k in 1..=modes {
                    let mut forcing = ExpPoly::zero();
                    for (j, mult) in alpha.entries() {
                        let lower = &coeffs[&alpha.decrement(j).expect("support entry")];
                        let weight = (mult as f64).sqrt();
                        for (l, t_jlk) in coupled_modes(j as usize, k, modes) {
                            forcing.add_scaled(&lower[l - 1], weight * t_jlk);
                        }
                    }
                    let mut poly = forcing.duhamel(CosineBasis::eigenvalue(k) as u64);
                    pruned += poly.prune(opts.prune_rel);
                    polys.push(poly);
                }
                (alpha, polys, pruned)
            })
            .collect();
        for (alpha, polys, pruned) in solved {
            pruned_total += pruned;
            coeffs.insert(alpha, polys);
        }
    }

    Ok(ChaosField {
        order_cap,
        modes,
        noise_modes,
        u0,
        coeffs,
        pruned_mass: pruned_total,
    })
}

/// One row of the Stirling-bound diagnostic.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StirlingRow {
    pub order: u32,
    pub t: f64,
    pub variance: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// Check every computed order variance against the factorial-decay envelope
/// `C(t)^n n^{-n/2} ||u_0||^2`.
pub fn stirling_check(field: &ChaosField, t: f64) -> Vec<StirlingRow> {
    let u0_norm_sq = field.u0().norm0_sq();
    (0..=field.order_cap())
        .map(|n| {
            let variance = field.order_variance(n, t);
            let bound = stirling_envelope(t, n) * u0_norm_sq;
            StirlingRow {
                order: n,
                t,
                variance,
                bound,
                ratio: if bound > 0.0 { variance / bound } else { f64::NAN },
            }
        })
        .collect()
}

/// The fundamental chaos solution: the chaos field solved from the exact
/// cosine coefficients of a point source at `y`.
#[derive(Debug, Clone)]
pub struct FundamentalField {
    pub field: ChaosField,
    pub source: f64,
}

impl FundamentalField {
    /// `P_alpha(t, x, y)` where `y` is the source point.
    pub fn eval(&self, alpha: &MultiIndex, t: f64, x: f64) -> Result<f64, Error> {
        self.field.eval_coefficient(alpha, t, x)
    }
}

/// Solve with delta initial data at `y`, represented exactly by its cosine
/// coefficients `m_k(y)`.
pub fn solve_fundamental(
    y: f64,
    order_cap: u32,
    modes: usize,
    noise_modes: usize,
    opts: &SolveOptions,
) -> Result<FundamentalField, Error> {
    assert!((0.0..=PI).contains(&y), "source point must lie in [0, pi]");
    let delta = SpectralFunction::new((1..=modes).map(|k| CosineBasis::eval(k, y)).collect());
    let field = solve_propagator(&delta, order_cap, modes, noise_modes, opts)?;
    Ok(FundamentalField { field, source: y })
}

/// Evaluate the chaos reconstruction
/// `V_N(t,x) = sum_{|alpha| <= N} h^alpha u_alpha(t,x) / sqrt(alpha!)`.
pub fn chaos_reconstruction(
    field: &ChaosField,
    h: &SpectralFunction,
    order_cap: u32,
    t: f64,
    x: f64,
) -> Result<f64, Error> {
    let mut total = 0.0;
    for alpha in field.alphas() {
        if alpha.order() > order_cap {
            continue;
        }
        let mut weight = 1.0;
        for (j, m) in alpha.entries() {
            let hj = h.coeffs.get(j as usize - 1).copied().unwrap_or(0.0);
            weight *= hj.powi(m as i32);
        }
        if weight == 0.0 {
            continue;
        }
        total += weight * field.eval_coefficient(alpha, t, x)? / alpha.factorial().sqrt();
    }
    Ok(total)
}

/// Options for the deterministic positivity certificate.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PositivityOptions {
    pub order_cap: u32,
    pub modes: usize,
    pub time_grid: usize,
    pub space_grid: usize,
    pub solve: SolveOptions,
}

impl Default for PositivityOptions {
    fn default() -> Self {
        PositivityOptions {
            order_cap: 4,
            modes: 32,
            time_grid: 21,
            space_grid: 33,
            solve: SolveOptions::default(),
        }
    }
}

/// Result of the positivity certificate: the deterministic solve of
/// `V_t = V_xx + h V` with its grid minimum, and the gap between the chaos
/// reconstruction of `V` and the reference solve, per truncation order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PositivityReport {
    pub horizon: f64,
    pub min_value: f64,
    pub min_t: f64,
    pub min_x: f64,
    /// `max |V_N - V_ref|` over the grid for N = 0..=order_cap
    pub reconstruction_gaps: Vec<f64>,
    pub order_cap: u32,
    pub modes: usize,
}

/// Solve `V_t = V_xx + h(x) V`, `V(0) = u0`, with Neumann conditions, by a
/// symmetric Galerkin eigendecomposition, check `V >= 0` on a grid, and
/// compare the chaos reconstruction of `V` against the solve.
pub fn positivity_certificate(
    u0: &SpectralFunction,
    h: &SpectralFunction,
    horizon: f64,
    opts: &PositivityOptions,
) -> Result<PositivityReport, Error> {
    assert!(horizon > 0.0);
    let grid_min = u0.grid_min(257);
    if grid_min < -1e-12 {
        return Err(Error::NegativeInitialData(grid_min));
    }
    let modes = opts.modes;
    if u0.modes() > modes || h.modes() > modes {
        return Err(Error::ParameterOutOfRange {
            parameter: "band limit",
            value: u0.modes().max(h.modes()) as f64,
            bound: "u0 and h band limits <= Galerkin modes",
        });
    }

    // Galerkin generator: A = -diag(lambda) + H, H[k,l] = sum_j h_j T[j,l,k].
    let mut a = SymmetricMatrix::zeros(modes);
    for k in 1..=modes {
        for l in k..=modes {
            let mut v = 0.0;
            for (j, &hj) in h.coeffs.iter().enumerate() {
                if hj != 0.0 {
                    v += hj * triple_product(j + 1, l, k);
                }
            }
            if l == k {
                v -= CosineBasis::eigenvalue(k);
            }
            a.set(k - 1, l - 1, v);
        }
    }
    let eigen = symmetric_eigen(&a);

    let mut u0_padded = u0.coeffs.clone();
    u0_padded.resize(modes, 0.0);

    let field = solve_propagator(
        &SpectralFunction::new(u0_padded.clone()),
        opts.order_cap,
        modes,
        h.modes(),
        &opts.solve,
    )?;

    let mut min_value = f64::INFINITY;
    let (mut min_t, mut min_x) = (0.0, 0.0);
    let mut gaps = vec![0.0f64; opts.order_cap as usize + 1];
    for ti in 0..opts.time_grid {
        let t = horizon * ti as f64 / (opts.time_grid - 1) as f64;
        let coeffs_t = eigen.apply_exp(t, &u0_padded);
        let v_t = SpectralFunction::new(coeffs_t);
        for xi in 0..opts.space_grid {
            let x = PI * xi as f64 / (opts.space_grid - 1) as f64;
            let v_ref = v_t.eval(x);
            if v_ref < min_value {
                min_value = v_ref;
                min_t = t;
                min_x = x;
            }
            for (n, gap) in gaps.iter_mut().enumerate() {
                let v_n = chaos_reconstruction(&field, h, n as u32, t, x)?;
                *gap = gap.max((v_n - v_ref).abs());
            }
        }
    }

    Ok(PositivityReport {
        horizon,
        min_value,
        min_t,
        min_x,
        reconstruction_gaps: gaps,
        order_cap: opts.order_cap,
        modes,
    })
}
