use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-10;
const MAX_DIM: usize = 4096;
/// Magnitude below which an eigenvector entry is skipped when fixing signs.
const SIGN_TOL: f64 = 1e-12;

/// Eigenpairs of a symmetric matrix, sorted by descending eigenvalue.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Column `i` pairs with `eigenvalues[i]`.
    pub eigenvectors: DMatrix<f64>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, i: usize) -> Vec<f64> {
        self.eigenvectors.column(i).iter().copied().collect()
    }
}

/// Full eigendecomposition of a symmetric (PSD) matrix.
///
/// Output is deterministic: eigenpairs are sorted by descending eigenvalue and
/// each eigenvector is flipped so its first non-negligible entry is positive.
pub fn symmetric_eig(c: &DMatrix<f64>) -> Result<SpectralDecomposition> {
    let n = c.nrows();
    if n != c.ncols() {
        return Err(Error::Contract(format!("symmetric_eig: matrix is {}x{}", n, c.ncols())));
    }
    if n == 0 || n > MAX_DIM {
        return Err(Error::Contract(format!("symmetric_eig: unsupported dimension {n}")));
    }
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::Contract("symmetric_eig: non-finite entry".into()));
    }
    let scale = c.amax().max(f64::MIN_POSITIVE);
    for i in 0..n {
        for j in (i + 1)..n {
            if (c[(i, j)] - c[(j, i)]).abs() > SYMMETRY_TOL * scale {
                return Err(Error::Contract(format!(
                    "symmetric_eig: asymmetric at ({i}, {j}): {} vs {}",
                    c[(i, j)],
                    c[(j, i)]
                )));
            }
        }
    }

    let eig = SymmetricEigen::new(c.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let mut eigenvectors = DMatrix::zeros(n, n);
    let mut eigenvalues = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvalues.push(eig.eigenvalues[src]);
        let col = eig.eigenvectors.column(src);
        let flip = col
            .iter()
            .find(|v| v.abs() > SIGN_TOL)
            .is_some_and(|&v| v < 0.0);
        let sign = if flip { -1.0 } else { 1.0 };
        for r in 0..n {
            eigenvectors[(r, dst)] = sign * col[r];
        }
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity() {
        let sd = symmetric_eig(&DMatrix::identity(3, 3)).unwrap();
        for &l in &sd.eigenvalues {
            assert!((l - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn two_by_two() {
        let c = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let sd = symmetric_eig(&c).unwrap();
        assert!((sd.eigenvalues[0] - 3.0).abs() < 1e-12);
        assert!((sd.eigenvalues[1] - 1.0).abs() < 1e-12);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = sd.eigenvector(0);
        let v1 = sd.eigenvector(1);
        assert!((v0[0] - h).abs() < 1e-12 && (v0[1] - h).abs() < 1e-12);
        assert!((v1[0] - h).abs() < 1e-12 && (v1[1] + h).abs() < 1e-12);
    }

    #[test]
    fn rejects_asymmetric() {
        let c = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.5, 2.0]);
        assert!(matches!(symmetric_eig(&c), Err(Error::Contract(_))));
    }

    #[test]
    fn random_residuals_and_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 20;
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let c = &a * a.transpose();
        let sd = symmetric_eig(&c).unwrap();
        for i in 0..n {
            let v = sd.eigenvectors.column(i);
            let resid = &c * v - v * sd.eigenvalues[i];
            assert!(resid.amax() <= 1e-8, "pair {i}");
        }
        let v = &sd.eigenvectors;
        assert!((v.transpose() * v - DMatrix::identity(n, n)).amax() <= 1e-8);
        let lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(sd.eigenvalues.clone()));
        let recon = v * lambda * v.transpose();
        assert!((&c - recon).amax() <= 1e-8 * (1.0 + c.amax()));
        let trace: f64 = c.diagonal().sum();
        let total: f64 = sd.eigenvalues.iter().sum();
        assert!((trace - total).abs() <= 1e-8 * trace.abs());
        assert!(sd.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn deterministic_signs() {
        let c = DMatrix::from_row_slice(3, 3, &[4.0, -2.0, 0.0, -2.0, 3.0, 1.0, 0.0, 1.0, 2.0]);
        let a = symmetric_eig(&c).unwrap();
        let b = symmetric_eig(&c).unwrap();
        assert_eq!(a.eigenvectors, b.eigenvectors);
        for i in 0..3 {
            let first = a.eigenvector(i).into_iter().find(|v| v.abs() > 1e-12).unwrap();
            assert!(first > 0.0);
        }
    }
}
