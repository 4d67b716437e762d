//! Cosine eigenbasis on `(0, pi)` with Neumann boundary conditions, spectral
//! functions and Sobolev norms, the heat kernel with its pointwise bounds,
//! the smoothing kernel `R_gamma`, and the triple-product table realizing
//! multiplication by basis elements.
//!
//! Basis indexing is 1-based: `m_1 = 1/sqrt(pi)` is the constant mode and
//! `m_k` has wavenumber `k - 1`, so the heat eigenvalue of mode `k` is
//! `(k-1)^2`.

use crate::quad::Rule;
use crate::Error;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::{Read, Write};

/// Default floor below which kernel evaluations are refused: the truncation
/// needed for accuracy grows like `t^{-1/2}`, so very small times silently
/// lose accuracy instead of failing loudly.
pub const DEFAULT_MIN_KERNEL_TIME: f64 = 1e-4;

/// The Fourier cosine basis truncated at `max_mode` modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosineBasis {
    pub max_mode: usize,
}

impl CosineBasis {
    pub fn new(max_mode: usize) -> Self {
        assert!(max_mode >= 1);
        CosineBasis { max_mode }
    }

    /// `m_k(x)` for 1-based `k`.
    pub fn eval(k: usize, x: f64) -> f64 {
        debug_assert!(k >= 1);
        if k == 1 {
            1.0 / PI.sqrt()
        } else {
            (2.0 / PI).sqrt() * (((k - 1) as f64) * x).cos()
        }
    }

    /// `d m_k / dx`.
    pub fn eval_dx(k: usize, x: f64) -> f64 {
        debug_assert!(k >= 1);
        if k == 1 {
            0.0
        } else {
            let w = (k - 1) as f64;
            -w * (2.0 / PI).sqrt() * (w * x).sin()
        }
    }

    /// Heat eigenvalue `(k-1)^2` of mode `k`.
    pub fn eigenvalue(k: usize) -> f64 {
        let w = (k - 1) as f64;
        w * w
    }
}

/// A function on `(0, pi)` represented by its cosine coefficients
/// `(f_1, ..., f_K)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralFunction {
    pub coeffs: Vec<f64>,
}

impl SpectralFunction {
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty());
        SpectralFunction { coeffs }
    }

    pub fn zeros(modes: usize) -> Self {
        SpectralFunction {
            coeffs: vec![0.0; modes],
        }
    }

    /// The constant function 1 (coefficient `sqrt(pi)` on the constant mode).
    pub fn one(modes: usize) -> Self {
        let mut f = Self::zeros(modes);
        f.coeffs[0] = PI.sqrt();
        f
    }

    /// The basis element `m_k`.
    pub fn mode(k: usize, modes: usize) -> Self {
        assert!(k >= 1 && k <= modes);
        let mut f = Self::zeros(modes);
        f.coeffs[k - 1] = 1.0;
        f
    }

    pub fn modes(&self) -> usize {
        self.coeffs.len()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| c * CosineBasis::eval(i + 1, x))
            .sum()
    }

    pub fn eval_dx(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| c * CosineBasis::eval_dx(i + 1, x))
            .sum()
    }

    /// `||f||_0^2 = sum f_k^2` (Parseval).
    pub fn norm0_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// Sobolev norm `||f||_gamma^2 = sum (1 + (k-1)^2)^gamma f_k^2`.
    pub fn sobolev_norm_sq(&self, gamma: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| (1.0 + CosineBasis::eigenvalue(i + 1)).powf(gamma) * c * c)
            .sum()
    }

    /// `Lambda^gamma f`: coefficient-wise multiplication by
    /// `(1 + (k-1)^2)^{gamma/2}`.
    pub fn lambda_pow(&self, gamma: f64) -> SpectralFunction {
        SpectralFunction {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| (1.0 + CosineBasis::eigenvalue(i + 1)).powf(gamma / 2.0) * c)
                .collect(),
        }
    }

    /// Minimum of the partial sum over a uniform grid (used to validate
    /// non-negative initial data).
    pub fn grid_min(&self, grid_points: usize) -> f64 {
        (0..grid_points)
            .map(|i| self.eval(PI * i as f64 / (grid_points - 1) as f64))
            .fold(f64::INFINITY, f64::min)
    }

    /// CSV rows "k,coeff", 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,coeff\n");
        for (i, c) in self.coeffs.iter().enumerate() {
            out.push_str(&format!("{},{:.16e}\n", i + 1, c));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, Error> {
        let mut coeffs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if lineno == 0 && line.trim() == "k,coeff" {
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let (k, c) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("line {}: expected k,coeff", lineno + 1)))?;
            let k: usize = k
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad index", lineno + 1)))?;
            let c: f64 = c
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad coefficient", lineno + 1)))?;
            if k != coeffs.len() + 1 {
                return Err(Error::Parse(format!(
                    "line {}: index {} out of sequence",
                    lineno + 1,
                    k
                )));
            }
            coeffs.push(c);
        }
        if coeffs.is_empty() {
            return Err(Error::Parse("empty spectral function".into()));
        }
        Ok(SpectralFunction { coeffs })
    }
}

/// A heat-kernel evaluation: the truncated spectral sum plus a rigorous bound
/// on the dropped tail `(2/pi) sum_{w >= K} e^{-w^2 t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub value: f64,
    pub tail_bound: f64,
}

/// The Neumann heat kernel on `(0, pi)`:
/// `p(t,x,y) = 1/pi + (2/pi) sum_{w>=1} e^{-w^2 t} cos(wx) cos(wy)`,
/// truncated to `terms` basis modes (wavenumbers `0..terms-1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatKernel {
    pub terms: usize,
    pub min_time: f64,
}

impl HeatKernel {
    pub fn new(terms: usize) -> Self {
        assert!(terms >= 1);
        HeatKernel {
            terms,
            min_time: DEFAULT_MIN_KERNEL_TIME,
        }
    }

    pub fn with_min_time(terms: usize, min_time: f64) -> Self {
        assert!(terms >= 1);
        HeatKernel { terms, min_time }
    }

    fn check_time(&self, t: f64) -> Result<(), Error> {
        if t <= 0.0 {
            return Err(Error::NonPositiveTime(t));
        }
        if t < self.min_time {
            return Err(Error::TimeBelowResolution {
                t,
                min_time: self.min_time,
            });
        }
        Ok(())
    }

    pub fn eval(&self, t: f64, x: f64, y: f64) -> Result<KernelValue, Error> {
        self.check_time(t)?;
        let mut value = 1.0 / PI;
        for w in 1..self.terms {
            let wf = w as f64;
            value += 2.0 / PI * (-wf * wf * t).exp() * ((wf * x).cos() * (wf * y).cos());
        }
        Ok(KernelValue {
            value,
            tail_bound: self.tail_bound(t),
        })
    }

    /// `(2/pi) sum_{w >= K} e^{-w^2 t} <= (2/pi) e^{-K^2 t} (1 + 1/(2Kt))`
    /// by integral comparison.
    pub fn tail_bound(&self, t: f64) -> f64 {
        let k = self.terms as f64;
        2.0 / PI * (-k * k * t).exp() * (1.0 + 1.0 / (2.0 * k * t))
    }

    pub fn eval_dx(&self, t: f64, x: f64, y: f64) -> Result<f64, Error> {
        self.check_time(t)?;
        let mut value = 0.0;
        for w in 1..self.terms {
            let wf = w as f64;
            value -= 2.0 / PI * wf * (-wf * wf * t).exp() * (wf * x).sin() * (wf * y).cos();
        }
        Ok(value)
    }

    pub fn eval_dxx(&self, t: f64, x: f64, y: f64) -> Result<f64, Error> {
        self.check_time(t)?;
        let mut value = 0.0;
        for w in 1..self.terms {
            let wf = w as f64;
            value -=
                2.0 / PI * wf * wf * (-wf * wf * t).exp() * ((wf * x).cos() * (wf * y).cos());
        }
        Ok(value)
    }

    /// Time derivative; equals `eval_dxx` for the heat semigroup.
    pub fn eval_dt(&self, t: f64, x: f64, y: f64) -> Result<f64, Error> {
        self.eval_dxx(t, x, y)
    }

    /// Apply the semigroup to spectral data: coefficients decay as
    /// `e^{-(k-1)^2 t}`.
    pub fn apply(&self, t: f64, f: &SpectralFunction) -> SpectralFunction {
        SpectralFunction {
            coeffs: f
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| (-CosineBasis::eigenvalue(i + 1) * t).exp() * c)
                .collect(),
        }
    }
}

/// Convenience wrapper matching the operation signature
/// `heat_kernel(t, x, y, K)`.
pub fn heat_kernel(t: f64, x: f64, y: f64, terms: usize) -> Result<KernelValue, Error> {
    HeatKernel::new(terms).eval(t, x, y)
}

/// Grid-sampled violations of the four pointwise kernel bounds
/// `0 <= p <= (sqrt(t)+1)/sqrt(t)`, `|p_x| <= 4/t`,
/// `|p_xx| <= 27/t^{3/2}`, `|p_t| <= 27/t^{3/2}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelBoundsReport {
    pub t: f64,
    pub terms: usize,
    pub grid: usize,
    pub tail_bound: f64,
    pub negativity: f64,
    pub upper: f64,
    pub gradient: f64,
    pub second_derivative: f64,
    pub time_derivative: f64,
}

impl KernelBoundsReport {
    pub fn max_violation(&self) -> f64 {
        self.negativity
            .max(self.upper)
            .max(self.gradient)
            .max(self.second_derivative)
            .max(self.time_derivative)
    }
}

pub fn kernel_bounds_check(t: f64, terms: usize, grid: usize) -> Result<KernelBoundsReport, Error> {
    let kernel = HeatKernel::new(terms);
    let upper_bound = (t.sqrt() + 1.0) / t.sqrt();
    let grad_bound = 4.0 / t;
    let second_bound = 27.0 / t.powf(1.5);
    let mut report = KernelBoundsReport {
        t,
        terms,
        grid,
        tail_bound: kernel.tail_bound(t),
        negativity: 0.0,
        upper: 0.0,
        gradient: 0.0,
        second_derivative: 0.0,
        time_derivative: 0.0,
    };
    for i in 0..grid {
        let x = PI * i as f64 / (grid - 1) as f64;
        for j in 0..grid {
            let y = PI * j as f64 / (grid - 1) as f64;
            let p = kernel.eval(t, x, y)?.value;
            let px = kernel.eval_dx(t, x, y)?;
            let pxx = kernel.eval_dxx(t, x, y)?;
            report.negativity = report.negativity.max(-p);
            report.upper = report.upper.max(p - upper_bound);
            report.gradient = report.gradient.max(px.abs() - grad_bound);
            report.second_derivative = report.second_derivative.max(pxx.abs() - second_bound);
            report.time_derivative = report.time_derivative.max(pxx.abs() - second_bound);
        }
    }
    Ok(report)
}

/// The kernel of `Lambda^{-gamma}`:
/// `R_gamma(x,y) = sum_k (1+(k-1)^2)^{-gamma/2} m_k(x) m_k(y)`, truncated.
/// Square-integrable only for `gamma > 1/2`.
pub fn r_gamma_kernel(gamma: f64, x: f64, y: f64, terms: usize) -> Result<f64, Error> {
    if gamma <= 0.5 {
        return Err(Error::KernelNotSquareIntegrable(gamma));
    }
    let mut value = 0.0;
    for k in 1..=terms {
        value += (1.0 + CosineBasis::eigenvalue(k)).powf(-gamma / 2.0)
            * (CosineBasis::eval(k, x) * CosineBasis::eval(k, y));
    }
    Ok(value)
}

/// Upper bound `C_gamma = (2/pi) sum_{k>=0} (1+k^2)^{-gamma}` on
/// `int_0^pi R_gamma^2(x, y) dx`, computed with `terms` explicit terms plus
/// an integral tail bound.
pub fn c_gamma_bound(gamma: f64, terms: usize) -> Result<f64, Error> {
    if gamma <= 0.5 {
        return Err(Error::KernelNotSquareIntegrable(gamma));
    }
    let partial: f64 = (0..=terms).map(|k| (1.0 + (k * k) as f64).powf(-gamma)).sum();
    // tail: sum_{k > K} (1+k^2)^{-gamma} <= int_K^inf x^{-2 gamma} dx
    let kf = terms as f64;
    let tail = kf.powf(1.0 - 2.0 * gamma) / (2.0 * gamma - 1.0);
    Ok(2.0 / PI * (partial + tail))
}

/// Closed-form triple product `T[j,l,k] = int_0^pi m_j m_l m_k dx`.
///
/// With wavenumbers `a = j-1, b = l-1, c = k-1`: entries involving the
/// constant mode reduce to `delta / sqrt(pi)`; otherwise the product-to-sum
/// identity leaves `1/sqrt(2 pi)` exactly when one of the triangle equalities
/// `a+b=c`, `b+c=a`, `c+a=b` holds.
pub fn triple_product(j: usize, l: usize, k: usize) -> f64 {
    debug_assert!(j >= 1 && l >= 1 && k >= 1);
    let (a, b, c) = (j - 1, l - 1, k - 1);
    let inv_sqrt_pi = 1.0 / PI.sqrt();
    if a == 0 {
        return if b == c { inv_sqrt_pi } else { 0.0 };
    }
    if b == 0 {
        return if a == c { inv_sqrt_pi } else { 0.0 };
    }
    if c == 0 {
        return if a == b { inv_sqrt_pi } else { 0.0 };
    }
    if a + b == c || b + c == a || c + a == b {
        1.0 / (2.0 * PI).sqrt()
    } else {
        0.0
    }
}

/// Dense table of triple products for indices `1..=modes`.
#[derive(Debug, Clone, PartialEq)]
pub struct TripleProductTable {
    modes: usize,
    values: Vec<f64>,
}

const TRIPLE_TABLE_MAGIC: &[u8; 4] = b"WHTP";
const TRIPLE_TABLE_VERSION: u32 = 1;

impl TripleProductTable {
    pub fn build(modes: usize) -> Self {
        assert!(modes >= 1);
        let mut values = vec![0.0; modes * modes * modes];
        for j in 1..=modes {
            for l in 1..=modes {
                for k in 1..=modes {
                    values[(j - 1) * modes * modes + (l - 1) * modes + (k - 1)] =
                        triple_product(j, l, k);
                }
            }
        }
        TripleProductTable { modes, values }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn get(&self, j: usize, l: usize, k: usize) -> f64 {
        debug_assert!(j >= 1 && j <= self.modes);
        debug_assert!(l >= 1 && l <= self.modes);
        debug_assert!(k >= 1 && k <= self.modes);
        self.values[(j - 1) * self.modes * self.modes + (l - 1) * self.modes + (k - 1)]
    }

    /// Binary cache with a header recording the truncation and format
    /// version.
    pub fn save(&self, w: &mut impl Write) -> std::io::Result<()> {
        w.write_all(TRIPLE_TABLE_MAGIC)?;
        w.write_all(&TRIPLE_TABLE_VERSION.to_le_bytes())?;
        w.write_all(&(self.modes as u32).to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn load(r: &mut impl Read) -> Result<Self, Error> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(Error::Io)?;
        if &magic != TRIPLE_TABLE_MAGIC {
            return Err(Error::Parse("bad triple-product table magic".into()));
        }
        let mut buf4 = [0u8; 4];
        r.read_exact(&mut buf4).map_err(Error::Io)?;
        if u32::from_le_bytes(buf4) != TRIPLE_TABLE_VERSION {
            return Err(Error::Parse("unsupported triple-product table version".into()));
        }
        r.read_exact(&mut buf4).map_err(Error::Io)?;
        let modes = u32::from_le_bytes(buf4) as usize;
        let mut values = vec![0.0f64; modes * modes * modes];
        let mut buf8 = [0u8; 8];
        for v in values.iter_mut() {
            r.read_exact(&mut buf8).map_err(Error::Io)?;
            *v = f64::from_le_bytes(buf8);
        }
        Ok(TripleProductTable { modes, values })
    }
}

/// Quadrature route for the triple product, used to validate the closed
/// form.
pub fn triple_product_quadrature(j: usize, l: usize, k: usize, rule: &Rule) -> f64 {
    rule.integrate(|x| CosineBasis::eval(j, x) * CosineBasis::eval(l, x) * CosineBasis::eval(k, x))
}
