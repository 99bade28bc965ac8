//! Eigendecomposition of symmetric weight matrices.
//!
//! The solver is the cyclic-sweep Jacobi method: each sweep visits every
//! upper-triangular pair `(p, q)` in row order and applies the plane
//! rotation that annihilates `a[p][q]`. Iteration stops when the Frobenius
//! norm of the off-diagonal part drops below [`OFF_DIAGONAL_TOL`].

use num_complex::Complex64;

use crate::dynamics::build_augmented;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::net::WeightedAdjacency;

pub const OFF_DIAGONAL_TOL: f64 = 1e-14;
pub const MAX_SWEEPS: usize = 100;

/// Eigenvalues below `1 - DOMINANT_GAP` count as non-dominant.
pub const DOMINANT_GAP: f64 = 1e-10;

/// Real spectrum of a symmetric matrix, eigenvalues sorted descending with
/// orthonormal eigenvectors aligned to them.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
}

impl Spectrum {
    /// Spectrum of `diag(values)`: the values sorted descending with the
    /// matching standard basis vectors. Handy when only eigenvalues matter.
    pub fn from_eigenvalues(values: &[f64]) -> Self {
        let mut idx: Vec<usize> = (0..values.len()).collect();
        idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
        let n = values.len();
        let eigenvalues = idx.iter().map(|&i| values[i]).collect();
        let eigenvectors =
            idx.iter().map(|&i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        Spectrum { eigenvalues, eigenvectors }
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn dominant(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn second(&self) -> f64 {
        self.eigenvalues[1]
    }

    pub fn smallest(&self) -> f64 {
        *self.eigenvalues.last().expect("empty spectrum")
    }

    /// Dominant left eigenvector normalised to unit sum. For a symmetric
    /// matrix left and right eigenvectors coincide.
    pub fn dominant_weights(&self) -> Vec<f64> {
        let v = &self.eigenvectors[0];
        let s: f64 = v.iter().sum();
        v.iter().map(|x| x / s).collect()
    }
}

/// Full eigendecomposition of a symmetric weight matrix.
pub fn eigendecompose_symmetric(a: &WeightedAdjacency) -> Result<Spectrum> {
    if let Some((i, j)) = a.asymmetry() {
        return Err(Error::NotSymmetric(i, j));
    }
    jacobi_eigen(a.weights())
}

fn off_diagonal_norm(m: &Matrix) -> f64 {
    let n = m.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[(i, j)] * m[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi on an arbitrary symmetric matrix (only the upper triangle
/// is trusted).
pub fn jacobi_eigen(m: &Matrix) -> Result<Spectrum> {
    let n = m.rows();
    assert_eq!(n, m.cols());
    let mut a = Matrix::from_fn(n, n, |i, j| if i <= j { m[(i, j)] } else { m[(j, i)] });
    let mut v = Matrix::identity(n);

    let mut sweeps = 0;
    let mut off = off_diagonal_norm(&a);
    while off >= OFF_DIAGONAL_TOL {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, residual: off });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        sweeps += 1;
        off = off_diagonal_norm(&a);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(y, y)].total_cmp(&a[(x, x)]));
    let eigenvalues = order.iter().map(|&k| a[(k, k)]).collect();
    let eigenvectors = order
        .iter()
        .map(|&k| {
            let mut col: Vec<f64> = (0..n).map(|i| v[(i, k)]).collect();
            // sign convention: first non-negligible component positive
            if let Some(&first) = col.iter().find(|x| x.abs() > 1e-12) {
                if first < 0.0 {
                    col.iter_mut().for_each(|x| *x = -*x);
                }
            }
            col
        })
        .collect();
    Ok(Spectrum { eigenvalues, eigenvectors })
}

/// One Jacobi rotation zeroing `a[p][q]`, accumulated into `v`.
fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let n = a.rows();
    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / t.hypot(1.0);
    let s = t * c;

    a[(p, p)] -= t * apq;
    a[(q, q)] += t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for r in 0..n {
        if r != p && r != q {
            let arp = a[(r, p)];
            let arq = a[(r, q)];
            let new_rp = c * arp - s * arq;
            let new_rq = s * arp + c * arq;
            a[(r, p)] = new_rp;
            a[(p, r)] = new_rp;
            a[(r, q)] = new_rq;
            a[(q, r)] = new_rq;
        }
    }
    for r in 0..n {
        let vrp = v[(r, p)];
        let vrq = v[(r, q)];
        v[(r, p)] = c * vrp - s * vrq;
        v[(r, q)] = s * vrp + c * vrq;
    }
}

/// Essential spectral radius: the largest modulus among the eigenvalues
/// other than the dominant one, or 0 when every eigenvalue equals 1.
pub fn rho_ess(spec: &Spectrum) -> Result<f64> {
    if spec.eigenvalues.iter().all(|&l| (l - 1.0).abs() <= DOMINANT_GAP) {
        return Ok(0.0);
    }
    if spec.n() >= 2 && spec.second() > 1.0 - DOMINANT_GAP {
        return Err(Error::DominantNotSimple(spec.second()));
    }
    let r = spec.eigenvalues[1..].iter().map(|l| l.abs()).fold(0.0, f64::max);
    // eigenvalues of a stochastic matrix lie in [-1, 1]; clip rounding
    Ok(r.min(1.0))
}

/// `|| A_hat v_hat - lambda_hat v_hat ||_inf` with `v_hat = [lambda_hat v; v]`
/// and `A_hat` the explicit `2n x 2n` memory-of-local-averages matrix.
pub fn verify_augmented_eigenpair(
    a: &WeightedAdjacency,
    gamma: f64,
    lambda_hat: Complex64,
    v: &[f64],
) -> f64 {
    let n = a.n();
    assert_eq!(v.len(), n);
    let big = build_augmented(a, gamma);
    let m = big.matrix();
    let v_hat: Vec<Complex64> = v
        .iter()
        .map(|&x| lambda_hat * x)
        .chain(v.iter().map(|&x| Complex64::new(x, 0.0)))
        .collect();
    (0..2 * n)
        .map(|i| {
            let row: Complex64 = m.row(i).iter().zip(&v_hat).map(|(&w, z)| z * w).sum();
            (row - lambda_hat * v_hat[i]).norm()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{make_complete, make_ring, validate};
    use approx::assert_abs_diff_eq;

    fn check_invariants(a: &WeightedAdjacency, s: &Spectrum) {
        let n = a.n();
        for (l, v) in s.eigenvalues.iter().zip(&s.eigenvectors) {
            let av = a.weights().mul_vec(v);
            let res = av.iter().zip(v).map(|(x, y)| (x - l * y).abs()).fold(0.0, f64::max);
            assert!(res <= 1e-10, "residual {res}");
        }
        for i in 0..n {
            for j in 0..n {
                let d: f64 =
                    s.eigenvectors[i].iter().zip(&s.eigenvectors[j]).map(|(x, y)| x * y).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((d - want).abs() <= 1e-10);
            }
        }
        assert!(s.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        assert!(s.smallest() >= -1.0 - 1e-10);
    }

    #[test]
    fn pure_ring_spectrum() {
        let a = make_ring(4, 0.0).unwrap();
        let s = eigendecompose_symmetric(&a).unwrap();
        for (got, want) in s.eigenvalues.iter().zip([1.0, 0.0, 0.0, -1.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        check_invariants(&a, &s);
    }

    #[test]
    fn self_loop_ring_spectrum() {
        let a = make_ring(4, 0.1).unwrap();
        let s = eigendecompose_symmetric(&a).unwrap();
        for (got, want) in s.eigenvalues.iter().zip([1.0, 0.1, 0.1, -0.8]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        check_invariants(&a, &s);
        // circulant formula eps + (1 - eps) cos(2 pi k / n) for larger rings
        for n in 3..=9 {
            let a = make_ring(n, 0.1).unwrap();
            let s = eigendecompose_symmetric(&a).unwrap();
            let mut want: Vec<f64> = (0..n)
                .map(|k| 0.1 + 0.9 * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos())
                .collect();
            want.sort_by(|x, y| y.total_cmp(x));
            for (g, w) in s.eigenvalues.iter().zip(&want) {
                assert_abs_diff_eq!(*g, *w, epsilon = 1e-12);
            }
            check_invariants(&a, &s);
        }
    }

    #[test]
    fn identity_spectrum() {
        let rows: Vec<Vec<f64>> =
            (0..3).map(|i| (0..3).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        let s = eigendecompose_symmetric(&validate(&rows).unwrap()).unwrap();
        assert_eq!(s.eigenvalues, vec![1.0, 1.0, 1.0]);
        assert_eq!(rho_ess(&s).unwrap(), 0.0);
    }

    #[test]
    fn rejects_asymmetric() {
        let a = validate(&[vec![0.5, 0.5], vec![0.2, 0.8]]).unwrap();
        assert_eq!(eigendecompose_symmetric(&a).unwrap_err(), Error::NotSymmetric(0, 1));
    }

    #[test]
    fn deterministic_and_sign_convention() {
        let a = make_ring(6, 0.3).unwrap();
        let s1 = eigendecompose_symmetric(&a).unwrap();
        let s2 = eigendecompose_symmetric(&a).unwrap();
        assert_eq!(s1, s2);
        for v in &s1.eigenvectors {
            let first = v.iter().find(|x| x.abs() > 1e-12).unwrap();
            assert!(*first > 0.0);
        }
    }

    #[test]
    fn rho_ess_examples() {
        assert_abs_diff_eq!(
            rho_ess(&Spectrum::from_eigenvalues(&[1.0, 0.0, 0.0, -1.0])).unwrap(),
            1.0
        );
        assert_eq!(rho_ess(&Spectrum::from_eigenvalues(&[1.0, 1.0, 1.0])).unwrap(), 0.0);
        assert_abs_diff_eq!(
            rho_ess(&Spectrum::from_eigenvalues(&[1.0, 0.1, 0.1, -0.8])).unwrap(),
            0.8,
            epsilon = 1e-15
        );
        assert!(matches!(
            rho_ess(&Spectrum::from_eigenvalues(&[1.0, 1.0, 0.2])),
            Err(Error::DominantNotSimple(_))
        ));
        let s = eigendecompose_symmetric(&make_complete(3).unwrap()).unwrap();
        assert!(rho_ess(&s).unwrap() < 1e-14);
    }

    #[test]
    fn from_eigenvalues_sorts() {
        let s = Spectrum::from_eigenvalues(&[-0.8, 1.0, 0.1]);
        assert_eq!(s.eigenvalues, vec![1.0, 0.1, -0.8]);
        assert_eq!(s.eigenvectors[0], vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn augmented_eigenpair_examples() {
        let a = make_ring(4, 0.0).unwrap();
        let s = eigendecompose_symmetric(&a).unwrap();
        let v1 = &s.eigenvectors[0];
        assert!(verify_augmented_eigenpair(&a, 0.5, Complex64::new(1.0, 0.0), v1) <= 1e-12);
        assert!(verify_augmented_eigenpair(&a, 0.5, Complex64::new(-0.5, 0.0), v1) <= 1e-9);

        // lambda = -1, gamma = 0.5: root of z^2 + 0.5 z + 0.5
        let vn = &s.eigenvectors[3];
        let z = Complex64::new(-0.25, 1.75f64.sqrt() / 2.0);
        assert!((z * z + 0.5 * z + 0.5).norm() < 1e-15);
        assert!(verify_augmented_eigenpair(&a, 0.5, z, vn) <= 1e-9);
        assert!(verify_augmented_eigenpair(&a, 0.5, z.conj(), vn) <= 1e-9);
        // a wrong eigenvalue gives a visibly large residual
        assert!(verify_augmented_eigenpair(&a, 0.5, Complex64::new(0.3, 0.0), vn) > 1e-3);
    }
}
