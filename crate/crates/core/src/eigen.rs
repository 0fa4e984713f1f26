//! Cyclic Jacobi eigensolver for dense symmetric matrices.

use crate::error::{Error, Result};

/// Row-major dense square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: f64) {
        self.data[i * self.n + j] = x;
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn off_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    s += self.get(i, j).powi(2);
                }
            }
        }
        s.sqrt()
    }
}

/// Eigenpairs sorted by ascending eigenvalue; `vectors[k]` pairs with
/// `values[k]`.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub sweeps: usize,
}

pub const MAX_SWEEPS: usize = 60;

/// Cyclic-by-row Jacobi until off(A) ≤ tol·‖A‖_F.
pub fn jacobi(mut a: SymMatrix, tol: f64) -> Result<Eigen> {
    let n = a.n;
    // columns of V stored as rows for cache-friendly rotation
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let target = tol * a.frobenius();
    let mut sweeps = 0;
    while a.off_norm() > target {
        if sweeps == MAX_SWEEPS {
            return Err(Error::EigenFailure { sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                let (rp, rq) = (p * n, q * n);
                for k in 0..n {
                    let vp = v[rp + k];
                    let vq = v[rq + k];
                    v[rp + k] = c * vp - s * vq;
                    v[rq + k] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).total_cmp(&a.get(j, j)));
    Ok(Eigen {
        values: order.iter().map(|&i| a.get(i, i)).collect(),
        vectors: order.iter().map(|&i| v[i * n..(i + 1) * n].to_vec()).collect(),
        sweeps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_by_two() {
        let mut m = SymMatrix::zeros(2);
        m.data = vec![2.0, 1.0, 1.0, 2.0];
        let e = jacobi(m, 1e-14).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14 && (e.values[1] - 3.0).abs() < 1e-14);
        let v = &e.vectors[0];
        assert!((v[0] + v[1]).abs() < 1e-14);
    }

    #[test]
    fn second_difference_spectrum() {
        // periodic second difference: eigenvalues 2 − 2cos(2πk/n)
        let n = 24;
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            m.set(i, i, 2.0);
            m.set(i, (i + 1) % n, -1.0);
            m.set((i + 1) % n, i, -1.0);
        }
        let e = jacobi(m, 1e-13).unwrap();
        let mut exact: Vec<f64> = (0..n)
            .map(|k| 2.0 - 2.0 * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos())
            .collect();
        exact.sort_by(f64::total_cmp);
        for (a, b) in e.values.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn eigenpairs_reconstruct(entries in proptest::collection::vec(-5.0f64..5.0, 36)) {
            let n = 6;
            let mut m = SymMatrix::zeros(n);
            for i in 0..n {
                for j in 0..=i {
                    let x = entries[i * n + j];
                    m.set(i, j, x);
                    m.set(j, i, x);
                }
            }
            let e = jacobi(m.clone(), 1e-14).unwrap();
            prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
            let trace: f64 = (0..n).map(|i| m.get(i, i)).sum();
            prop_assert!((trace - e.values.iter().sum::<f64>()).abs() < 1e-10);
            for (lam, v) in e.values.iter().zip(&e.vectors) {
                for i in 0..n {
                    let mv: f64 = (0..n).map(|j| m.get(i, j) * v[j]).sum();
                    prop_assert!((mv - lam * v[i]).abs() < 1e-10);
                }
            }
        }
    }
}
