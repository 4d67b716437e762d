//! One function per subcommand. Each returns the output files as
//! `(name, bytes)` pairs plus any failed gates (checked only in `--check`
//! mode); the caller writes the files and the manifest.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde_json::json;
use wickheat_core::oracles::simplex_quadrature;
use wickheat_core::propagator::{
    positivity_certificate, solve_fundamental, solve_propagator, stirling_check, ChaosField,
    PositivityOptions, SolveOptions,
};
use wickheat_core::regularity::{
    additive_increment_curves, dyadic_lags, kolmogorov_exponent, space_increment_curve,
    time_increment_curve, IncrementCurve, RESIDUAL_GATE,
};
use wickheat_core::simplex_integrals::{factorial_decay_bound, simplex_integral, SimplexIntegralSpec};
use wickheat_core::spectral_basis::{HeatKernel, SpectralFunction};
use wickheat_core::stochastic_field::{
    exact_second_moment, FieldSampler, GaussianDraw, McMoments,
};
use wickheat_core::{Error, MultiIndex};

use crate::config::RunConfig;

pub struct RunOutput {
    pub files: Vec<(String, Vec<u8>)>,
    pub failed_gates: Vec<String>,
    pub summary: Vec<String>,
}

pub enum RunError {
    Config(String),
    Budget(String),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::BudgetExceeded { .. } => RunError::Budget(e.to_string()),
            other => RunError::Config(other.to_string()),
        }
    }
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn solve_field(config: &RunConfig) -> Result<(ChaosField, SpectralFunction), RunError> {
    let u0 = config
        .initial_data
        .build(config.wavenumber_cap)
        .map_err(RunError::Config)?;
    let opts = SolveOptions {
        budget: config.budget,
        ..SolveOptions::default()
    };
    let field = solve_propagator(
        &u0,
        config.order_cap,
        config.wavenumber_cap,
        config.noise_modes,
        &opts,
    )?;
    Ok((field, u0))
}

/// `solve`: propagator coefficients, per-order variance table with the
/// factorial-decay bound, and the JSON sidecar.
pub fn run_solve(config: &RunConfig) -> Result<RunOutput, RunError> {
    let (field, _) = solve_field(config)?;
    let mut failed = Vec::new();
    let mut variances = String::from("t,order,variance,bound,ratio\n");
    for &t in &config.times {
        for row in stirling_check(&field, t) {
            let _ = writeln!(
                variances,
                "{},{},{},{},{}",
                fmt17(t),
                row.order,
                fmt17(row.variance),
                fmt17(row.bound),
                fmt17(row.ratio)
            );
            if row.variance > row.bound * (1.0 + 1e-12) {
                failed.push(format!(
                    "stirling bound violated at t={t} order {}: {} > {}",
                    row.order, row.variance, row.bound
                ));
            }
        }
    }
    let metadata = field.metadata_json(&config.initial_data.label(), &config.times);
    let summary = vec![format!(
        "solved chaos field: {} multi-indices x {} modes, pruned mass {:.3e}",
        field.len(),
        field.modes(),
        field.pruned_mass()
    )];
    Ok(RunOutput {
        files: vec![
            ("coefficients.csv".into(), field.coefficients_csv().into_bytes()),
            ("variances.csv".into(), variances.into_bytes()),
            (
                "metadata.json".into(),
                pretty_json(&metadata),
            ),
        ],
        failed_gates: failed,
        summary,
    })
}

/// `sample`: Monte Carlo fields and moment checks against the exact
/// coefficient moments.
pub fn run_sample(config: &RunConfig) -> Result<RunOutput, RunError> {
    let (field, _) = solve_field(config)?;
    let mut failed = Vec::new();
    let mut moments = Vec::new();
    let mut fields_csv = String::from("t,x");
    for r in 0..config.realizations {
        let _ = write!(fields_csv, ",r{r}");
    }
    fields_csv.push('\n');
    for &t in &config.times {
        for &x in &config.points {
            let sampler = FieldSampler::new(&field, t, x)?;
            let samples = sampler.sample_batch(config.seed, config.draws)?;
            let mc = McMoments::from_samples(&samples);
            let exact = exact_second_moment(&field, t, x)?;
            let mean_sigmas = (mc.mean - exact.mean).abs() / mc.se_mean.max(1e-300);
            let var_sigmas =
                (mc.variance - exact.variance).abs() / mc.se_variance.max(1e-300);
            if mean_sigmas > 5.0 || var_sigmas > 5.0 {
                failed.push(format!(
                    "moments at t={t} x={x}: mean {mean_sigmas:.1} SE, variance {var_sigmas:.1} SE"
                ));
            }
            moments.push(json!({
                "t": t,
                "x": x,
                "draws": config.draws,
                "seed": config.seed,
                "exact_mean": exact.mean,
                "exact_variance": exact.variance,
                "tail_bound": if exact.tail_bound.is_finite() { json!(exact.tail_bound) } else { json!(null) },
                "mc_mean": mc.mean,
                "mc_variance": mc.variance,
                "se_mean": mc.se_mean,
                "se_variance": mc.se_variance,
                "mean_sigmas": mean_sigmas,
                "variance_sigmas": var_sigmas,
            }));
            let _ = write!(fields_csv, "{},{}", fmt17(t), fmt17(x));
            for r in 0..config.realizations {
                let value = samples[r.min(samples.len() - 1)];
                let _ = write!(fields_csv, ",{}", fmt17(value));
            }
            fields_csv.push('\n');
        }
    }
    let worst: f64 = moments
        .iter()
        .map(|m| m["variance_sigmas"].as_f64().unwrap())
        .fold(0.0, f64::max);
    let summary = vec![format!(
        "sampled {} draws at {} grid points; worst variance deviation {:.2} SE",
        config.draws,
        moments.len(),
        worst
    )];
    Ok(RunOutput {
        files: vec![
            ("moments.json".into(), pretty_json(&json!(moments))),
            ("fields.csv".into(), fields_csv.into_bytes()),
        ],
        failed_gates: failed,
        summary,
    })
}

fn curve_fit_json(curve: &IncrementCurve) -> serde_json::Value {
    match curve.fit {
        Some(fit) => {
            let exponent = kolmogorov_exponent(curve, 8.0).ok();
            json!({
                "anchor_t": curve.anchor_t,
                "anchor_x": curve.anchor_x,
                "slope": fit.slope,
                "residual_rms_log10": fit.residual_rms,
                "residual_gate": RESIDUAL_GATE,
                "holder_exponent_limit": exponent.map(|e| e.exponent_limit),
                "holder_exponent_at_q8": exponent.map(|e| e.exponent_at_q),
                "differentiable_regime": exponent.map(|e| e.differentiable_regime),
            })
        }
        None => json!({
            "anchor_t": curve.anchor_t,
            "anchor_x": curve.anchor_x,
            "slope": null,
            "note": "degenerate curve (vanishing increments)",
        }),
    }
}

/// `additive`: exact-series benchmark curves. The time curve is anchored at
/// the initial time, where the Kolmogorov bound is sharp; space curves of
/// the derivative are produced at each configured time.
pub fn run_additive(config: &RunConfig) -> Result<RunOutput, RunError> {
    let x = config.points[config.points.len() / 2];
    let lags = dyadic_lags(config.lag_lo, config.lag_hi, 1.0);
    let (time_curve, _) = additive_increment_curves(config.additive_modes, 0.0, x, &lags)?;
    let mut files = vec![("additive_time.csv".into(), time_curve.to_csv().into_bytes())];
    let mut failed = Vec::new();
    let mut summary = Vec::new();

    if let Some(fit) = time_curve.fit {
        if !(1.35..=1.50).contains(&fit.slope) {
            failed.push(format!("additive time slope {} outside [1.35, 1.50]", fit.slope));
        }
        if fit.residual_rms > RESIDUAL_GATE {
            failed.push(format!("additive time residual {} above gate", fit.residual_rms));
        }
        summary.push(format!("additive time slope {:.4} (target 3/2-)", fit.slope));
    } else {
        failed.push("additive time curve degenerate".into());
    }

    let mut space_fits = Vec::new();
    for (i, &t) in config.times.iter().enumerate() {
        let (_, space) = additive_increment_curves(config.additive_modes, t, x, &lags)?;
        if let Some(fit) = space.fit {
            summary.push(format!("additive U_x space slope {:.4} at t={t}", fit.slope));
            if !(0.85..=1.00).contains(&fit.slope) {
                failed.push(format!(
                    "additive space slope {} at t={t} outside [0.85, 1.00]",
                    fit.slope
                ));
            }
        }
        space_fits.push(curve_fit_json(&space));
        files.push((format!("additive_space_{i}.csv"), space.to_csv().into_bytes()));
    }
    let fits = json!({
        "modes": config.additive_modes,
        "lags": lags,
        "time": curve_fit_json(&time_curve),
        "space": space_fits,
    });
    files.push(("additive_fits.json".into(), pretty_json(&fits)));
    Ok(RunOutput {
        files,
        failed_gates: failed,
        summary,
    })
}

/// `regularity`: increment curves and exponent fits for the multiplicative
/// model, the additive benchmark, or both (with matched-resolution slope
/// comparisons).
pub fn run_regularity(config: &RunConfig, model: Model) -> Result<RunOutput, RunError> {
    let mut files = Vec::new();
    let mut failed = Vec::new();
    let mut summary = Vec::new();
    let x = config.points[config.points.len() / 2];
    let lags = dyadic_lags(config.lag_lo, config.lag_hi, 1.0);

    let mut fits = serde_json::Map::new();

    let mult = if matches!(model, Model::Multiplicative | Model::Both) {
        let (field, _) = solve_field(config)?;
        let time_curve = time_increment_curve(&field, 0.0, x, &lags)?;
        files.push((
            "multiplicative_time.csv".into(),
            time_curve.to_csv().into_bytes(),
        ));
        let mut space_fits = Vec::new();
        let mut space_curves = Vec::new();
        for (i, &t) in config.times.iter().enumerate() {
            let space = space_increment_curve(&field, t, x, &lags, true)?;
            files.push((
                format!("multiplicative_space_{i}.csv"),
                space.to_csv().into_bytes(),
            ));
            space_fits.push(curve_fit_json(&space));
            space_curves.push(space);
        }
        if let Some(fit) = time_curve.fit {
            summary.push(format!("multiplicative time slope {:.4}", fit.slope));
        }
        fits.insert(
            "multiplicative".into(),
            json!({
                "time": curve_fit_json(&time_curve),
                "space": space_fits,
            }),
        );
        Some((time_curve, space_curves))
    } else {
        None
    };

    let additive = if matches!(model, Model::Additive | Model::Both) {
        let (time_curve, _) = additive_increment_curves(config.additive_modes, 0.0, x, &lags)?;
        files.push(("additive_time.csv".into(), time_curve.to_csv().into_bytes()));
        if let Some(fit) = time_curve.fit {
            summary.push(format!("additive time slope {:.4}", fit.slope));
            if !(1.35..=1.50).contains(&fit.slope) {
                failed.push(format!("additive time slope {} outside [1.35, 1.50]", fit.slope));
            }
            if fit.residual_rms > RESIDUAL_GATE {
                failed.push(format!("additive time residual {} above gate", fit.residual_rms));
            }
        }
        let mut space_fits = Vec::new();
        let mut space_curves = Vec::new();
        for (i, &t) in config.times.iter().enumerate() {
            let (_, space) = additive_increment_curves(config.additive_modes, t, x, &lags)?;
            files.push((format!("additive_space_{i}.csv"), space.to_csv().into_bytes()));
            space_fits.push(curve_fit_json(&space));
            space_curves.push(space);
        }
        fits.insert(
            "additive".into(),
            json!({
                "time": curve_fit_json(&time_curve),
                "space": space_fits,
            }),
        );
        Some((time_curve, space_curves))
    } else {
        None
    };

    if let (Some((mult_time, mult_space)), Some((_, _))) = (&mult, &additive) {
        // matched-resolution comparison: the order-one chaos coefficients
        // populate wavenumbers up to noise_modes - 1, so the additive series
        // is truncated to the same modes
        let matched = (config.noise_modes - 1).max(1);
        let (add_time, _) = additive_increment_curves(matched, 0.0, x, &lags)?;
        let mut gaps = serde_json::Map::new();
        if let (Some(mf), Some(af)) = (mult_time.fit, add_time.fit) {
            let gap = (mf.slope - af.slope).abs();
            gaps.insert("time_slope_gap".into(), json!(gap));
            summary.push(format!(
                "time slope gap (matched truncation {matched}): {gap:.4}"
            ));
            if gap > 0.15 {
                failed.push(format!("time slope gap {gap} above 0.15"));
            }
        }
        for (i, &t) in config.times.iter().enumerate() {
            let (_, add_space) = additive_increment_curves(matched, t, x, &lags)?;
            if let (Some(mf), Some(af)) = (mult_space[i].fit, add_space.fit) {
                let gap = (mf.slope - af.slope).abs();
                gaps.insert(format!("space_slope_gap_t{i}"), json!(gap));
                if gap > 0.15 {
                    failed.push(format!("space slope gap {gap} at t={t} above 0.15"));
                }
            }
        }
        fits.insert("matched_comparison".into(), json!(gaps));
    }

    files.push((
        "regularity_fits.json".into(),
        pretty_json(&serde_json::Value::Object(fits)),
    ));
    Ok(RunOutput {
        files,
        failed_gates: failed,
        summary,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Additive,
    Multiplicative,
    Both,
}

/// `fundamental`: coefficients of the fundamental chaos solution plus the
/// kernel-identity and symmetry report.
pub fn run_fundamental(config: &RunConfig) -> Result<RunOutput, RunError> {
    let opts = SolveOptions {
        budget: config.budget,
        ..SolveOptions::default()
    };
    let fund = solve_fundamental(
        config.source,
        config.order_cap,
        config.wavenumber_cap,
        config.noise_modes,
        &opts,
    )?;
    let kernel = HeatKernel::new(config.wavenumber_cap);
    let mut kernel_gap = 0.0f64;
    let zero = MultiIndex::zero();
    for &t in &config.times {
        for &x in &config.points {
            let p0 = fund.eval(&zero, t, x)?;
            let pk = kernel.eval(t, x, config.source)?.value;
            kernel_gap = kernel_gap.max((p0 - pk).abs());
        }
    }
    // symmetry across the configured points used as sources
    let sources: Vec<_> = config
        .points
        .iter()
        .map(|&y| solve_fundamental(y, config.order_cap, config.wavenumber_cap, config.noise_modes, &opts))
        .collect::<Result<_, _>>()?;
    let mut symmetry_gap = 0.0f64;
    let t = config.times[config.times.len() / 2];
    for (i, &x) in config.points.iter().enumerate() {
        for (j, &y) in config.points.iter().enumerate() {
            for alpha in sources[j].field.alphas() {
                let pxy = sources[j].eval(alpha, t, x)?;
                let pyx = sources[i].eval(alpha, t, y)?;
                symmetry_gap = symmetry_gap.max((pxy - pyx).abs());
            }
        }
    }
    let mut failed = Vec::new();
    if kernel_gap > 1e-10 {
        failed.push(format!("order-0 kernel identity gap {kernel_gap:.2e} above 1e-10"));
    }
    if symmetry_gap > 1e-8 {
        failed.push(format!("symmetry gap {symmetry_gap:.2e} above 1e-8"));
    }
    let report = json!({
        "source": config.source,
        "kernel_identity_gap": kernel_gap,
        "symmetry_gap": symmetry_gap,
        "symmetry_time": t,
        "symmetry_points": config.points,
    });
    Ok(RunOutput {
        files: vec![
            (
                "fundamental_coefficients.csv".into(),
                fund.field.coefficients_csv().into_bytes(),
            ),
            ("fundamental_report.json".into(), pretty_json(&report)),
        ],
        failed_gates: failed,
        summary: vec![format!(
            "fundamental solution at y={:.4}: kernel gap {:.2e}, symmetry gap {:.2e}",
            config.source, kernel_gap, symmetry_gap
        )],
    })
}

/// `integrals`: the `(n, I_n, n! I_n^2, envelope)` table, cross-checked
/// against nested quadrature for shallow depths in `--check` mode.
pub fn run_integrals(config: &RunConfig) -> Result<RunOutput, RunError> {
    let mut csv = String::from("t,n,integral,weighted_square,c_required\n");
    let mut per_time = Vec::new();
    let mut failed = Vec::new();
    for &t in &config.times {
        if t <= 0.0 {
            return Err(RunError::Config(
                "times: simplex integrals need strictly positive times".into(),
            ));
        }
        let report = factorial_decay_bound(config.depth, config.alpha, config.beta, t)?;
        for row in &report.rows {
            let _ = writeln!(
                csv,
                "{},{},{},{},{}",
                fmt17(t),
                row.n,
                fmt17(row.integral),
                fmt17(row.weighted_square),
                fmt17(row.c_required)
            );
        }
        for n in 1..=config.depth.min(3) {
            let spec = SimplexIntegralSpec::new(n, config.alpha, config.beta, t)?;
            let closed = simplex_integral(&spec);
            let oracle = simplex_quadrature(n, t, config.alpha, config.beta, 48);
            let rel = ((closed - oracle) / oracle).abs();
            if rel > 1e-6 {
                failed.push(format!(
                    "simplex n={n} t={t}: closed form vs quadrature rel {rel:.2e}"
                ));
            }
        }
        per_time.push(json!({ "t": t, "c_min": report.c_min }));
    }
    let report = json!({
        "alpha": config.alpha,
        "beta": config.beta,
        "depth": config.depth,
        "per_time": per_time,
    });
    Ok(RunOutput {
        files: vec![
            ("integrals.csv".into(), csv.into_bytes()),
            ("integrals.json".into(), pretty_json(&report)),
        ],
        failed_gates: failed,
        summary: vec![format!(
            "simplex integrals to depth {} at alpha={}, beta={}",
            config.depth, config.alpha, config.beta
        )],
    })
}

/// `certify`: deterministic positivity certificates for random band-limited
/// potentials.
pub fn run_certify(config: &RunConfig) -> Result<RunOutput, RunError> {
    let u0 = config
        .initial_data
        .build(config.wavenumber_cap)
        .map_err(RunError::Config)?;
    let opts = PositivityOptions {
        order_cap: config.order_cap,
        modes: config.wavenumber_cap.max(2 * config.potential_modes),
        time_grid: 21,
        space_grid: 33,
        solve: SolveOptions {
            budget: config.budget,
            ..SolveOptions::default()
        },
    };
    let mut failed = Vec::new();
    let mut reports = Vec::new();
    let mut potentials_csv = String::from("potential,k,coeff\n");
    for p in 0..config.potentials {
        let raw = GaussianDraw::generate(config.seed, p as u64, config.potential_modes);
        let norm: f64 = raw.values().iter().map(|v| v * v).sum::<f64>().sqrt();
        let h = SpectralFunction::new(raw.values().iter().map(|v| v / norm).collect());
        for (k, c) in h.coeffs.iter().enumerate() {
            let _ = writeln!(potentials_csv, "{},{},{}", p, k + 1, fmt17(*c));
        }
        let report = positivity_certificate(&u0, &h, config.horizon, &opts)?;
        if report.min_value < -1e-6 {
            failed.push(format!(
                "potential {p}: grid minimum {} below -1e-6",
                report.min_value
            ));
        }
        let gaps = &report.reconstruction_gaps;
        if gaps.windows(2).any(|w| w[1] > w[0] + 1e-12) {
            failed.push(format!("potential {p}: reconstruction gaps not monotone"));
        }
        reports.push(json!({
            "potential": p,
            "seed": config.seed,
            "min_value": report.min_value,
            "min_t": report.min_t,
            "min_x": report.min_x,
            "reconstruction_gaps": gaps,
        }));
    }
    let min_overall = reports
        .iter()
        .map(|r| r["min_value"].as_f64().unwrap())
        .fold(f64::INFINITY, f64::min);
    Ok(RunOutput {
        files: vec![
            ("certificate.json".into(), pretty_json(&json!(reports))),
            ("potentials.csv".into(), potentials_csv.into_bytes()),
        ],
        failed_gates: failed,
        summary: vec![format!(
            "{} potentials certified on [0, {}] x [0, pi]; overall grid minimum {:.4e}",
            config.potentials, config.horizon, min_overall
        )],
    })
}

fn pretty_json(value: &serde_json::Value) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(value).expect("json serializes");
    text.push('\n');
    text.into_bytes()
}

/// Shared sanity check used by `main`: points must stay strictly inside the
/// interval when used as increment anchors.
pub fn check_anchor_points(config: &RunConfig) -> Result<(), RunError> {
    let x = config.points[config.points.len() / 2];
    let max_lag = 2f64.powi(-(config.lag_lo as i32));
    if x + max_lag >= PI {
        return Err(RunError::Config(format!(
            "points: anchor {x} plus largest lag {max_lag} leaves (0, pi)"
        )));
    }
    Ok(())
}
