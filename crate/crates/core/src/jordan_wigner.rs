//! Covariance matrices of fermionic coherent states `exp(½ Σ c_j† G_jk c_k†)|0⟩`
//! and of the spin-chain pair state.
//!
//! Two blocks of `n` sites: Alice holds sites `1..n`, Bob `n+1..2n`, and site
//! `n+1−ν` is paired with site `n+ν`. After the Jordan-Wigner transformation
//! the pair state is the coherent state with `G = iσ_y ⊗ ℍ_n`, `ℍ_n` the
//! reversed identity.

use nalgebra::DMatrix;

use crate::linalg::{c, identity};
use crate::selfdual::{BasisProjection, CovarianceMatrix, Sign, SystemShape};
use crate::{CMatrix, Error, Result};

/// Two blocks of `n` spins each.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairBlockSpec {
    n: usize,
}

impl PairBlockSpec {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidShape("block size must be positive".into()));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Zero-based site pairs `(n−ν, n−1+ν)` for `ν = 1..n`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..=self.n).map(move |nu| (self.n - nu, self.n + nu - 1))
    }
}

/// Real antisymmetric `2n × 2n` generator.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    matrix: DMatrix<f64>,
}

impl GeneratorMatrix {
    pub fn new(matrix: DMatrix<f64>, eps: f64) -> Result<Self> {
        let (r, cols) = matrix.shape();
        if r != cols || r == 0 || r % 2 == 1 {
            return Err(Error::InvalidInput(format!(
                "generator must be 2n x 2n, got {r}x{cols}"
            )));
        }
        let asym = (&matrix + matrix.transpose()).amax();
        if asym > eps {
            return Err(Error::InvalidInput(format!(
                "generator is not antisymmetric (deviation {asym:e})"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Number of modes per party.
    pub fn n(&self) -> usize {
        self.matrix.nrows() / 2
    }
}

/// The reversed identity `(ℍ_n)_{jk} = δ_{j+k, n+1}`.
pub fn hankel(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |j, k| if j + k + 1 == n { 1.0 } else { 0.0 })
}

/// `G = iσ_y ⊗ ℍ_n = [[0, ℍ_n], [−ℍ_n, 0]]`.
pub fn chi_generator(n: usize) -> Result<GeneratorMatrix> {
    PairBlockSpec::new(n)?;
    let h = hankel(n);
    let mut g = DMatrix::zeros(2 * n, 2 * n);
    g.view_mut((0, n), (n, n)).copy_from(&h);
    g.view_mut((n, 0), (n, n)).copy_from(&(-h));
    Ok(GeneratorMatrix { matrix: g })
}

/// Covariance of the coherent state generated by `G`, assembled from
/// `⟨c_j† c_k†⟩ = (T − Tᵀ)/4 = −⟨c_j c_k⟩` and
/// `⟨c_j† c_k⟩ = (2 − T − Tᵀ)/4` with `T = (1 + G)(1 − G)⁻¹`.
pub fn coherent_covariance(g: &GeneratorMatrix) -> Result<BasisProjection> {
    let n = g.n();
    let modes = 2 * n;
    let shape = SystemShape::symmetric(n)?;
    let one = DMatrix::<f64>::identity(modes, modes);
    let inverse = (&one - &g.matrix)
        .try_inverse()
        .ok_or(Error::SingularGenerator)?;
    let t = (&one + &g.matrix) * inverse;
    let tt = t.transpose();
    let pair = (&t - &tt) / 4.0;
    let number = (one * 2.0 - &t - &tt) / 4.0;

    let mut s = CMatrix::zeros(shape.dim(), shape.dim());
    for j in 0..modes {
        for k in 0..modes {
            let (jp, jm) = (shape.index(j, Sign::Plus), shape.index(j, Sign::Minus));
            let (kp, km) = (shape.index(k, Sign::Plus), shape.index(k, Sign::Minus));
            let delta = if j == k { 1.0 } else { 0.0 };
            s[(jp, kp)] = c(number[(j, k)], 0.0);
            s[(jp, km)] = c(pair[(j, k)], 0.0);
            s[(jm, kp)] = c(-pair[(j, k)], 0.0);
            s[(jm, km)] = c(delta - number[(k, j)], 0.0);
        }
    }
    Ok(BasisProjection::new_unchecked(
        CovarianceMatrix::new_unchecked(shape, s),
    ))
}

/// The pair-state covariance
/// `½ [[1, ·, ·, ℍ], [·, 1, −ℍ, ·], [·, −ℍ, 1, ·], [ℍ, ·, ·, 1]]`.
pub fn chi_covariance(n: usize) -> Result<BasisProjection> {
    let shape = SystemShape::symmetric(n)?;
    let h = hankel(n).map(|x| c(0.5 * x, 0.0));
    let mut s = identity(4 * n).scale(0.5);
    s.view_mut((0, 3 * n), (n, n)).copy_from(&h);
    s.view_mut((n, 2 * n), (n, n)).copy_from(&(-&h));
    s.view_mut((2 * n, n), (n, n)).copy_from(&(-&h));
    s.view_mut((3 * n, 0), (n, n)).copy_from(&h);
    Ok(BasisProjection::new_unchecked(
        CovarianceMatrix::new_unchecked(shape, s),
    ))
}
