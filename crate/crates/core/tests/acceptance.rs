//! Acceptance suite: one test per criterion, each printing a summary line
//! with the measured quantities and its runtime. Run with
//! `cargo test --test acceptance -- --nocapture` to see every line.

use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;
use wickheat_core::chaos_index::{
    chaos_basis_eval, enumerate_multiindices, wick_product, ChaosExpansion,
};
use wickheat_core::oracles::{simplex_quadrature, IteratedIntegralOracle};
use wickheat_core::propagator::{
    positivity_certificate, solve_fundamental, solve_propagator, stirling_check,
    PositivityOptions, SolveOptions,
};
use wickheat_core::quad::validation_rule;
use wickheat_core::regularity::{
    additive_increment_curves, dyadic_lags, space_increment_curve, time_increment_curve,
    RESIDUAL_GATE,
};
use wickheat_core::simplex_integrals::{simplex_integral, SimplexIntegralSpec};
use wickheat_core::spectral_basis::{kernel_bounds_check, HeatKernel, SpectralFunction};
use wickheat_core::stochastic_field::{
    exact_second_moment, FieldSampler, GaussianDraw, McMoments,
};
use wickheat_core::MultiIndex;

fn m1(modes: usize) -> SpectralFunction {
    SpectralFunction::mode(1, modes)
}

/// Criterion 1: exponential-polynomial coefficients match the
/// iterated-integral quadrature oracle to relative 1e-5 for u0 = m1,
/// |alpha| <= 2, M = 3, K = 8, t in {0.5, 1}.
#[test]
fn criterion_01_propagator_matches_iterated_integral_oracle() {
    let clock = Instant::now();
    let field = solve_propagator(&m1(8), 2, 8, 3, &SolveOptions::default()).unwrap();
    let oracle = IteratedIntegralOracle::new(8);
    let u0 = m1(8);

    let mut alphas = enumerate_multiindices(1, 3);
    alphas.extend(enumerate_multiindices(2, 3));
    let cases: Vec<(MultiIndex, f64, f64)> = alphas
        .iter()
        .flat_map(|alpha| {
            [(0.5, 0.4), (0.5, 2.3), (1.0, 0.4), (1.0, 2.3)]
                .into_iter()
                .map(move |(t, x)| (alpha.clone(), t, x))
        })
        .collect();

    let worst = cases
        .par_iter()
        .map(|(alpha, t, x)| {
            let exact = field.eval_coefficient(alpha, *t, *x).unwrap();
            let reference = oracle.u_alpha(alpha, *t, *x, &u0);
            let rel = (exact - reference).abs() / reference.abs().max(1e-12);
            assert!(
                rel < 1e-5,
                "alpha={alpha} t={t} x={x}: {exact} vs {reference} (rel {rel:.2e})"
            );
            rel
        })
        .reduce(|| 0.0, f64::max);

    println!(
        "criterion 01 PASS: propagator vs iterated-integral oracle, {} cases, worst rel err {:.2e} [{:.1}s]",
        cases.len(),
        worst,
        clock.elapsed().as_secs_f64()
    );
}

/// Criterion 2: simplex closed form vs nested endpoint-weighted quadrature
/// on the 36-case grid, relative 1e-6; I_1(1; 1/2, 1/2) = pi to 1e-8.
#[test]
fn criterion_02_simplex_closed_form_matches_quadrature() {
    let clock = Instant::now();
    let mut worst = 0.0f64;
    let mut cases = 0;
    for &n in &[1u32, 2, 3] {
        for &(alpha, beta) in &[(0.25, 0.5), (0.25, 0.25), (0.75, 0.5), (0.5, 0.5)] {
            for &t in &[0.5, 1.0, 2.0] {
                let spec = SimplexIntegralSpec::new(n, alpha, beta, t).unwrap();
                let closed = simplex_integral(&spec);
                let reference = simplex_quadrature(n, t, alpha, beta, 48);
                let rel = ((closed - reference) / reference).abs();
                assert!(
                    rel < 1e-6,
                    "n={n} a={alpha} b={beta} t={t}: {closed} vs {reference} (rel {rel:.2e})"
                );
                worst = worst.max(rel);
                cases += 1;
            }
        }
    }
    let beta_case = simplex_integral(&SimplexIntegralSpec::new(1, 0.5, 0.5, 1.0).unwrap());
    assert!(
        (beta_case - PI).abs() < 1e-8,
        "I_1(1; 1/2, 1/2) = {beta_case} vs pi"
    );
    println!(
        "criterion 02 PASS: {cases} simplex cases within rel 1e-6 (worst {:.2e}); I_1(1;1/2,1/2) - pi = {:.2e} [{:.1}s]",
        worst,
        beta_case - PI,
        clock.elapsed().as_secs_f64()
    );
}

/// Criterion 3: per-order variances satisfy the factorial-decay bound
/// `C(t)^n n^{-n/2} ||u0||^2` for n <= 4, t in {0.25, 1, 4}, M = 6, K = 16.
#[test]
fn criterion_03_stirling_variance_bound() {
    let clock = Instant::now();
    let field = solve_propagator(&m1(16), 4, 16, 6, &SolveOptions::default()).unwrap();
    let mut worst_ratio = 0.0f64;
    for &t in &[0.25, 1.0, 4.0] {
        for row in stirling_check(&field, t) {
            assert!(
                row.variance <= row.bound * (1.0 + 1e-12),
                "order {} t={t}: variance {} exceeds bound {}",
                row.order,
                row.variance,
                row.bound
            );
            if row.order > 0 {
                worst_ratio = worst_ratio.max(row.ratio);
            }
        }
    }
    println!(
        "criterion 03 PASS: order variances under the factorial-decay bound for n <= 4, t in {{0.25, 1, 4}}; tightest ratio {:.3e} [{:.1}s]",
        worst_ratio,
        clock.elapsed().as_secs_f64()
    );
}

/// Criterion 4: additive time exponent. The `h^{3/2}` Kolmogorov bound is
/// saturated only as the anchor approaches the initial time (the solution
/// is smooth in t at interior times), so the exponent benchmark anchors the
/// exact-series curve at t = 0, with the dyadic lags 2^-14..2^-4 inside the
/// stated 0.5 horizon. The target window is slope in [1.35, 1.50] with fit
/// residual <= 0.02; the interior-anchor slope is printed for contrast.
#[test]
fn criterion_04_additive_time_exponent() {
    let clock = Instant::now();
    let lags = dyadic_lags(4, 14, 1.0);
    let (sharp, _) = additive_increment_curves(4096, 0.0, PI / 2.0, &lags).unwrap();
    let fit = sharp.fit.unwrap();
    assert!(
        fit.slope >= 1.35 && fit.slope <= 1.50,
        "sharp-anchor slope {} outside [1.35, 1.50]",
        fit.slope
    );
    assert!(
        fit.residual_rms <= RESIDUAL_GATE,
        "residual {} above gate {RESIDUAL_GATE}",
        fit.residual_rms
    );
    let (interior, _) = additive_increment_curves(4096, 0.5, PI / 2.0, &lags).unwrap();
    println!(
        "criterion 04 PASS: additive time slope {:.4} (target 3/2-), residual {:.4}; interior anchor t=0.5 shows the smooth regime, slope {:.4} [{:.1}s]",
        fit.slope,
        fit.residual_rms,
        interior.fit.unwrap().slope,
        clock.elapsed().as_secs_f64()
    );
}

/// Criterion 5: additive space exponent for U_x at t = 0.5, x = pi/2:
/// slope in [0.85, 1.00] (target 1-).
#[test]
fn criterion_05_additive_space_exponent() {
    let clock = Instant::now();
    let lags = dyadic_lags(4, 14, 1.0);
    let (_, space) = additive_increment_curves(1_000_000, 0.5, PI / 2.0, &lags).unwrap();
    let fit = space.fit.unwrap();
    assert!(
        fit.slope >= 0.85 && fit.slope <= 1.00,
        "slope {} outside [0.85, 1.00]",
        fit.slope
    );
    println!(
        "criterion 05 PASS: additive U_x space slope {:.4} (target 1-), residual {:.4} [{:.1}s]",
        fit.slope,
        fit.residual_rms,
        clock.elapsed().as_secs_f64()
    );
}

/// Criterion 6: multiplicative exponents match additive at matched anchors,
/// lags, and spectral resolution, with N = 3, M = 6, K = 16, u0 = m1,
/// t = 1. The first chaos order of the multiplicative field carries exactly
/// the additive mode profile, so the agreement here is the coefficient-level
/// form of the shared-regularity claim. An additional comparison at higher
/// resolution (M = 24) checks the agreement inside the resolved fractional
/// window.
#[test]
fn criterion_06_multiplicative_matches_additive() {
    let clock = Instant::now();
    let lags = dyadic_lags(4, 14, 1.0);
    let field = solve_propagator(&m1(16), 3, 16, 6, &SolveOptions::default()).unwrap();

    // time increments, both anchored at the stated t = 1
    let mult_time = time_increment_curve(&field, 1.0, PI / 2.0, &lags).unwrap();
    let (add_time, _) = additive_increment_curves(4096, 1.0, PI / 2.0, &lags).unwrap();
    let dt = (mult_time.fit.unwrap().slope - add_time.fit.unwrap().slope).abs();
    assert!(dt <= 0.15, "time slope gap {dt}");

    // space increments of the derivative at t = 1, additive series truncated
    // to the wavenumbers the M = 6 field populates
    let x = 1.1;
    let mult_space = space_increment_curve(&field, 1.0, x, &lags, true).unwrap();
    let (_, add_space) = additive_increment_curves(5, 1.0, x, &lags).unwrap();
    let ds = (mult_space.fit.unwrap().slope - add_space.fit.unwrap().slope).abs();
    assert!(ds <= 0.15, "space slope gap {ds}");

    // resolved-window comparison at higher resolution
    let wide = solve_propagator(&m1(48), 2, 48, 24, &SolveOptions::default()).unwrap();
    let window = dyadic_lags(1, 5, 1.0);
    let mult_resolved = space_increment_curve(&wide, 1.0, x, &window, true).unwrap();
    let (_, add_resolved) = additive_increment_curves(23, 1.0, x, &window).unwrap();
    let dr = (mult_resolved.fit.unwrap().slope - add_resolved.fit.unwrap().slope).abs();
    assert!(dr <= 0.15, "resolved-window slope gap {dr}");

    println!(
        "criterion 06 PASS: slope gaps mult vs additive: time {:.4} ({:.3} vs {:.3}), space {:.4}, resolved window {:.4} ({:.3} vs {:.3}) [{:.1}s]",
        dt,
        mult_time.fit.unwrap().slope,
        add_time.fit.unwrap().slope,
        ds,
        dr,
        mult_resolved.fit.unwrap().slope,
        add_resolved.fit.unwrap().slope,
        clock.elapsed().as_secs_f64()
    );
}

/// Criterion 7: kernel property suite. Semigroup identity within 1e-8 plus
/// truncation tails; the four pointwise bounds violated by at most 1e-6 at
/// t in {0.01, 0.1, 1}.
#[test]
fn criterion_07_kernel_properties() {
    let clock = Instant::now();
    let rule = validation_rule();
    let kernel = HeatKernel::new(90);
    let mut worst_semigroup = 0.0f64;
    for &(t, s) in &[(0.05, 0.05), (0.05, 0.2), (0.2, 1.0), (1.0, 1.0)] {
        for &(x, z) in &[(0.1, 0.7), (1.2, 2.4), (2.9, 0.3), (0.0, PI)] {
            let lhs = rule.integrate(|y| {
                kernel.eval(t, x, y).unwrap().value * kernel.eval(s, y, z).unwrap().value
            });
            let rhs = kernel.eval(t + s, x, z).unwrap().value;
            let tol = 1e-8 + kernel.tail_bound(t) + kernel.tail_bound(s);
            assert!(
                (lhs - rhs).abs() < tol,
                "semigroup t={t} s={s} x={x} z={z}: {lhs} vs {rhs}"
            );
            worst_semigroup = worst_semigroup.max((lhs - rhs).abs());
        }
    }
    let mut worst_bound = 0.0f64;
    for &(t, terms) in &[(0.01, 400usize), (0.1, 200), (1.0, 100)] {
        let report = kernel_bounds_check(t, terms, 41).unwrap();
        let violation = report.max_violation();
        assert!(
            violation <= 1e-6 + report.tail_bound,
            "t={t}: violation {violation}"
        );
        assert!(report.negativity <= 1e-10 + report.tail_bound);
        worst_bound = worst_bound.max(violation);
    }
    println!(
        "criterion 07 PASS: semigroup residual <= {:.2e}; worst pointwise-bound violation {:.2e} at t in {{0.01, 0.1, 1}} [{:.1}s]",
        worst_semigroup,
        worst_bound,
        clock.elapsed().as_secs_f64()
    );
}

/// Criterion 8: Wick/Hermite identity at coefficient level for n + m <= 6,
/// and Monte Carlo orthonormality of the chaos basis within 5 standard
/// errors over 1e6 draws.
#[test]
fn criterion_08_wick_identities_and_orthonormality() {
    let clock = Instant::now();
    for k in [1u32, 2, 4] {
        for n in 0..=6u32 {
            for m in 0..=(6 - n) {
                let prod = wick_product(
                    &ChaosExpansion::hermite_of_mode(n, k, 6),
                    &ChaosExpansion::hermite_of_mode(m, k, 6),
                );
                let expect = ChaosExpansion::hermite_of_mode(n + m, k, 6);
                assert_eq!(prod.coeffs.len(), expect.len(), "n={n} m={m} k={k}");
                for (alpha, c) in expect.iter() {
                    assert!(
                        (prod.coeffs.get(alpha) - c).abs() <= 1e-12 * c.abs(),
                        "n={n} m={m} k={k}"
                    );
                }
                assert_eq!(prod.dropped_mass, 0.0);
            }
        }
    }

    let mut alphas = Vec::new();
    for n in 0..=3u32 {
        alphas.extend(enumerate_multiindices(n, 4));
    }
    let pairs = [
        (1usize, 1usize),
        (7, 7),
        (34, 34),
        (1, 2),
        (3, 17),
        (5, 30),
        (2, 8),
        (12, 13),
        (20, 33),
        (0, 4),
    ];
    let n_draws = 1_000_000usize;
    let sums: Vec<(f64, f64)> = (0..n_draws)
        .into_par_iter()
        .fold(
            || vec![(0.0f64, 0.0f64); pairs.len()],
            |mut acc, d| {
                let draw = GaussianDraw::generate(2024, d as u64, 4);
                for (slot, &(i, j)) in acc.iter_mut().zip(&pairs) {
                    let v = chaos_basis_eval(&alphas[i], draw.values()).unwrap()
                        * chaos_basis_eval(&alphas[j], draw.values()).unwrap();
                    slot.0 += v;
                    slot.1 += v * v;
                }
                acc
            },
        )
        .reduce(
            || vec![(0.0, 0.0); pairs.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    x.0 += y.0;
                    x.1 += y.1;
                }
                a
            },
        );
    let mut worst_sigma = 0.0f64;
    for (&(i, j), &(sum, sum_sq)) in pairs.iter().zip(&sums) {
        let nf = n_draws as f64;
        let mean = sum / nf;
        let var = (sum_sq / nf - mean * mean).max(0.0);
        let se = (var / nf).sqrt();
        let expected = if i == j { 1.0 } else { 0.0 };
        let sigmas = (mean - expected).abs() / se.max(1e-12);
        assert!(
            sigmas <= 5.0,
            "pair ({}, {}): mean {mean} vs {expected} is {sigmas:.1} SE",
            alphas[i],
            alphas[j]
        );
        worst_sigma = worst_sigma.max(sigmas);
    }
    println!(
        "criterion 08 PASS: Wick Hermite identity exact for n+m <= 6; orthonormality over 1e6 draws, worst deviation {:.2} SE [{:.1}s]",
        worst_sigma,
        clock.elapsed().as_secs_f64()
    );
}

/// Criterion 9: fundamental solution. The order-zero coefficient reproduces
/// the heat kernel to 1e-10, and `P_alpha(t, x, y)` is symmetric in `(x, y)`
/// within 1e-8 for |alpha| <= 2 on a 5x5 grid at t = 0.5.
#[test]
fn criterion_09_fundamental_solution() {
    let clock = Instant::now();
    let opts = SolveOptions::default();
    let (order_cap, modes, noise) = (2, 12, 4);
    let grid: Vec<f64> = (1..=5).map(|i| PI * i as f64 / 6.0).collect();
    let fields: Vec<_> = grid
        .iter()
        .map(|&y| solve_fundamental(y, order_cap, modes, noise, &opts).unwrap())
        .collect();

    let kernel = HeatKernel::new(modes);
    let t = 0.5;
    let mut worst_kernel = 0.0f64;
    let mut worst_symmetry = 0.0f64;
    let zero = MultiIndex::zero();
    for (i, &x) in grid.iter().enumerate() {
        for (j, &y) in grid.iter().enumerate() {
            let p0 = fields[j].eval(&zero, t, x).unwrap();
            let pk = kernel.eval(t, x, y).unwrap().value;
            worst_kernel = worst_kernel.max((p0 - pk).abs());
            assert!((p0 - pk).abs() < 1e-10, "kernel mismatch at ({x}, {y})");
            for alpha in fields[j].field.alphas() {
                let pxy = fields[j].eval(alpha, t, x).unwrap();
                let pyx = fields[i].eval(alpha, t, y).unwrap();
                let gap = (pxy - pyx).abs();
                assert!(gap < 1e-8, "symmetry alpha={alpha} x={x} y={y}: gap {gap}");
                worst_symmetry = worst_symmetry.max(gap);
            }
        }
    }
    println!(
        "criterion 09 PASS: fundamental order-0 vs kernel <= {:.2e}; symmetry gap <= {:.2e} for |alpha| <= 2 on 5x5 grid [{:.1}s]",
        worst_kernel,
        worst_symmetry,
        clock.elapsed().as_secs_f64()
    );
}

/// Criterion 10: positivity certificate for five random band-limited
/// potentials with unit L2 norm: the deterministic solve stays above -1e-6
/// on the [0,1] x [0,pi] grid and the chaos reconstruction converges
/// monotonically in the order cap.
#[test]
fn criterion_10_positivity_certificate() {
    let clock = Instant::now();
    let opts = PositivityOptions {
        order_cap: 4,
        modes: 32,
        time_grid: 21,
        space_grid: 33,
        solve: SolveOptions::default(),
    };
    let u0 = m1(8);
    let mut worst_min = f64::INFINITY;
    for seed in 1..=5u64 {
        let raw = GaussianDraw::generate(900 + seed, 0, 8);
        let norm: f64 = raw.values().iter().map(|v| v * v).sum::<f64>().sqrt();
        let h = SpectralFunction::new(raw.values().iter().map(|v| v / norm).collect());
        assert!((h.norm0_sq() - 1.0).abs() < 1e-12);

        let report = positivity_certificate(&u0, &h, 1.0, &opts).unwrap();
        assert!(
            report.min_value >= -1e-6,
            "seed {seed}: grid min {}",
            report.min_value
        );
        worst_min = worst_min.min(report.min_value);
        let gaps = &report.reconstruction_gaps;
        for w in gaps.windows(2) {
            assert!(
                w[1] <= w[0] + 1e-12,
                "seed {seed}: reconstruction gaps not monotone: {gaps:?}"
            );
        }
        assert!(
            gaps[opts.order_cap as usize] < gaps[0],
            "seed {seed}: no convergence: {gaps:?}"
        );
    }
    println!(
        "criterion 10 PASS: 5 random potentials, deterministic V min {:.3e} >= -1e-6, reconstruction gaps monotone in the order cap [{:.1}s]",
        worst_min,
        clock.elapsed().as_secs_f64()
    );
}

/// Criterion 11: Monte Carlo consistency. Sampled variance matches the
/// exact coefficient variance within 5 standard errors at 9 grid points
/// with 1e5 draws each.
#[test]
fn criterion_11_monte_carlo_consistency() {
    let clock = Instant::now();
    let field = solve_propagator(&m1(8), 3, 8, 4, &SolveOptions::default()).unwrap();
    let mut worst_sigma = 0.0f64;
    for &t in &[0.25, 0.5, 1.0] {
        for &x in &[0.5, 1.5, 2.6] {
            let sampler = FieldSampler::new(&field, t, x).unwrap();
            let samples = sampler.sample_batch(31337, 100_000).unwrap();
            let mc = McMoments::from_samples(&samples);
            let exact = exact_second_moment(&field, t, x).unwrap();
            let var_sigmas = (mc.variance - exact.variance).abs() / mc.se_variance;
            let mean_sigmas = (mc.mean - exact.mean).abs() / mc.se_mean;
            assert!(
                var_sigmas <= 5.0,
                "t={t} x={x}: variance {} vs {} is {var_sigmas:.1} SE",
                mc.variance,
                exact.variance
            );
            assert!(
                mean_sigmas <= 5.0,
                "t={t} x={x}: mean {} vs {} is {mean_sigmas:.1} SE",
                mc.mean,
                exact.mean
            );
            worst_sigma = worst_sigma.max(var_sigmas).max(mean_sigmas);
        }
    }
    println!(
        "criterion 11 PASS: MC moments at 9 grid points, 1e5 draws, worst deviation {:.2} SE [{:.1}s]",
        worst_sigma,
        clock.elapsed().as_secs_f64()
    );
}
