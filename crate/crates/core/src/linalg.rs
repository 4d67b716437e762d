//! Minimal dense symmetric linear algebra: a cyclic Jacobi eigensolver,
//! enough for the Galerkin matrices of the deterministic positivity solve
//! (dimension up to a few hundred).

#![allow(clippy::needless_range_loop)]

/// Dense symmetric matrix in row-major order.
#[derive(Debug, Clone)]
pub struct SymmetricMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        SymmetricMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }
}

/// Eigendecomposition `A = Q diag(values) Q^T` with orthonormal columns of
/// `Q` stored row-major (`vectors[i*n + j]` is component `i` of eigenvector
/// `j`).
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub n: usize,
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
}

impl EigenDecomposition {
    /// `exp(t A) v = Q exp(t D) Q^T v`
    pub fn apply_exp(&self, t: f64, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        debug_assert_eq!(v.len(), n);
        let mut coords = vec![0.0; n];
        for j in 0..n {
            let mut s = 0.0;
            for i in 0..n {
                s += self.vectors[i * n + j] * v[i];
            }
            coords[j] = s * (t * self.values[j]).exp();
        }
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                s += self.vectors[i * n + j] * coords[j];
            }
            out[i] = s;
        }
        out
    }
}

/// Cyclic Jacobi rotations until off-diagonal mass is negligible.
pub fn symmetric_eigen(a: &SymmetricMatrix) -> EigenDecomposition {
    let n = a.n;
    let mut m = a.data.clone();
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        q[i * n + i] = 1.0;
    }
    let off = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += m[i * n + j] * m[i * n + j];
            }
        }
        s
    };
    let scale: f64 = m.iter().map(|x| x * x).sum::<f64>().max(1e-300);
    for _sweep in 0..100 {
        if off(&m) <= 1e-28 * scale {
            break;
        }
        for p in 0..n {
            for r in (p + 1)..n {
                let apr = m[p * n + r];
                if apr.abs() < 1e-300 {
                    continue;
                }
                let app = m[p * n + p];
                let arr = m[r * n + r];
                let theta = (arr - app) / (2.0 * apr);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkr = m[k * n + r];
                    m[k * n + p] = c * mkp - s * mkr;
                    m[k * n + r] = s * mkp + c * mkr;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mrk = m[r * n + k];
                    m[p * n + k] = c * mpk - s * mrk;
                    m[r * n + k] = s * mpk + c * mrk;
                }
                for k in 0..n {
                    let qkp = q[k * n + p];
                    let qkr = q[k * n + r];
                    q[k * n + p] = c * qkp - s * qkr;
                    q[k * n + r] = s * qkp + c * qkr;
                }
            }
        }
    }
    let values = (0..n).map(|i| m[i * n + i]).collect();
    EigenDecomposition {
        n,
        values,
        vectors: q,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_of_diagonal_matrix() {
        let mut a = SymmetricMatrix::zeros(3);
        a.set(0, 0, 2.0);
        a.set(1, 1, -1.0);
        a.set(2, 2, 5.0);
        let e = symmetric_eigen(&a);
        let mut vals = e.values.clone();
        vals.sort_by(f64::total_cmp);
        assert!((vals[0] + 1.0).abs() < 1e-12);
        assert!((vals[1] - 2.0).abs() < 1e-12);
        assert!((vals[2] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn eigen_reconstructs_matrix_and_is_orthogonal() {
        let n = 12;
        let mut a = SymmetricMatrix::zeros(n);
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for i in 0..n {
            for j in i..n {
                a.set(i, j, next());
            }
        }
        let e = symmetric_eigen(&a);
        // Q^T Q = I
        for c1 in 0..n {
            for c2 in 0..n {
                let dot: f64 = (0..n)
                    .map(|i| e.vectors[i * n + c1] * e.vectors[i * n + c2])
                    .sum();
                let expected = if c1 == c2 { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-11);
            }
        }
        // Q D Q^T = A
        for i in 0..n {
            for j in 0..n {
                let rec: f64 = (0..n)
                    .map(|c| e.vectors[i * n + c] * e.values[c] * e.vectors[j * n + c])
                    .sum();
                assert!((rec - a.get(i, j)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn apply_exp_matches_series_for_small_matrix() {
        let mut a = SymmetricMatrix::zeros(2);
        a.set(0, 0, -1.0);
        a.set(0, 1, 0.5);
        a.set(1, 1, -2.0);
        let e = symmetric_eigen(&a);
        let v = vec![1.0, -1.0];
        let got = e.apply_exp(0.3, &v);
        // Taylor series reference
        let mut term = v.clone();
        let mut sum = v.clone();
        for k in 1..60 {
            let next = vec![
                (a.get(0, 0) * term[0] + a.get(0, 1) * term[1]) * 0.3 / k as f64,
                (a.get(1, 0) * term[0] + a.get(1, 1) * term[1]) * 0.3 / k as f64,
            ];
            sum[0] += next[0];
            sum[1] += next[1];
            term = next;
        }
        assert!((got[0] - sum[0]).abs() < 1e-12);
        assert!((got[1] - sum[1]).abs() < 1e-12);
    }
}
