//! The entangling one-particle Hamiltonian and its Bogolubov flow.

use crate::linalg::{identity, max_abs_diff, I, ONE};
use crate::selfdual::{
    BasisProjection, BogolubovTransform, CovarianceMatrix, Locality, SystemShape,
};
use crate::{CMatrix, Error, Result};

/// `H` in `n`-blocks: rows `(0,0,0,1)`, `(0,0,−1,0)`, `(0,−1,0,0)`,
/// `(1,0,0,0)`. A Hermitian reflection anticommuting with `Γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntanglerHamiltonian {
    shape: SystemShape,
    matrix: CMatrix,
}

pub fn build_entangler(n: usize) -> Result<EntanglerHamiltonian> {
    let shape = SystemShape::symmetric(n)?;
    let mut h = CMatrix::zeros(4 * n, 4 * n);
    for j in 0..n {
        h[(j, 3 * n + j)] = ONE;
        h[(n + j, 2 * n + j)] = -ONE;
        h[(2 * n + j, n + j)] = -ONE;
        h[(3 * n + j, j)] = ONE;
    }
    Ok(EntanglerHamiltonian { shape, matrix: h })
}

impl EntanglerHamiltonian {
    pub fn shape(&self) -> SystemShape {
        self.shape
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `exp(itH) = cos(t)·1 + i sin(t)·H`, using `H² = 1`.
    pub fn evolution_unitary(&self, t: f64) -> BogolubovTransform {
        let d = self.shape.dim();
        let m = identity(d).scale(t.cos()) + self.matrix.map(|z| z * I * t.sin());
        BogolubovTransform::from_parts_unchecked(self.shape, m, Locality::Global)
    }
}

pub fn evolution_unitary(h: &EntanglerHamiltonian, t: f64) -> BogolubovTransform {
    h.evolution_unitary(t)
}

/// `E_t = exp(−itH) E₀ exp(itH)` in closed form,
/// `cos²t E₀ + sin²t (1 − E₀) + i sin t cos t [E₀, H]`.
///
/// Requires `H E₀ H = 1 − E₀`, which the product state satisfies.
pub fn evolve(e0: &BasisProjection, t: f64, eps: f64) -> Result<BasisProjection> {
    let shape = e0.shape();
    if !shape.is_symmetric() {
        return Err(Error::UnsupportedShape(format!(
            "the entangler needs n_alice = n_bob, got {shape}"
        )));
    }
    let h = build_entangler(shape.n_alice())?;
    let hm = h.matrix();
    let e = e0.matrix();
    let one = identity(shape.dim());
    let complement = &one - e;
    let deviation = max_abs_diff(&(hm * e * hm), &complement);
    if deviation > eps {
        return Err(Error::IncompatibleInitialState { deviation });
    }
    let (s, c) = t.sin_cos();
    let commutator = e * hm - hm * e;
    let et = e.scale(c * c) + complement.scale(s * s) + commutator.map(|z| z * I * (s * c));
    Ok(BasisProjection::new_unchecked(
        CovarianceMatrix::new_unchecked(shape, et),
    ))
}
