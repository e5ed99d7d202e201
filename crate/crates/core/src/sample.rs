//! Random states, transformations and fields for tests and benchmarks.
//!
//! Γ-commuting unitaries are drawn as Haar unitaries (QR of a complex
//! Gaussian matrix with the phase of `R`'s diagonal absorbed), averaged with
//! their Γ-conjugate and re-unitarized by polar decomposition. The polar
//! factor of a Γ-invariant matrix is Γ-invariant, so the result stays in the
//! Bogolubov group.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::cert::standard_state;
use crate::jordan_wigner::GeneratorMatrix;
use crate::linalg::{c, polar_unitary};
use crate::selfdual::{
    build_conjugation, product_state, BasisProjection, BogolubovTransform, CovarianceMatrix,
    Locality, Party, SystemShape,
};
use crate::wick::FieldVector;
use crate::{CMatrix, CVector};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn gaussian_vector<R: Rng + ?Sized>(len: usize, rng: &mut R) -> CVector {
    CVector::from_fn(len, |_, _| gaussian(rng))
}

/// Haar-distributed `d × d` unitary.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let qr = gaussian_matrix(d, d, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let z = r[(j, j)];
        let phase = if z.norm() > 0.0 {
            z / z.norm()
        } else {
            c(1.0, 0.0)
        };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random unitary commuting with `Γ` for `shape`, not block-diagonal.
pub fn random_gamma_unitary<R: Rng + ?Sized>(shape: SystemShape, rng: &mut R) -> CMatrix {
    let conj = build_conjugation(shape);
    loop {
        let v = haar_unitary(shape.dim(), rng);
        let sym = (&v + conj.conjugate(&v)).scale(0.5);
        // Averaging can in principle land near a singular matrix; redraw.
        let smallest = sym.singular_values().min();
        if smallest > 1e-3 {
            // The SVD polar factor is Γ-invariant only to ~1e-10; alternate
            // symmetrization with Newton steps X ← (X + X^{−†})/2, which keep
            // Γ-invariance and converge quadratically to the unitary factor.
            let mut x = polar_unitary(&sym);
            for _ in 0..3 {
                x = (&x + conj.conjugate(&x)).scale(0.5);
                let inv_adj = x.clone().try_inverse().expect("near-unitary").adjoint();
                x = (&x + inv_adj).scale(0.5);
            }
            return x;
        }
    }
}

pub fn random_bogolubov<R: Rng + ?Sized>(shape: SystemShape, rng: &mut R) -> BogolubovTransform {
    let m = random_gamma_unitary(shape, rng);
    BogolubovTransform::from_parts_unchecked(shape, m, Locality::Global)
}

/// `V_A ⊕ V_B` with independent Γ-commuting blocks.
pub fn random_local_transform<R: Rng + ?Sized>(
    shape: SystemShape,
    rng: &mut R,
) -> BogolubovTransform {
    let a = shape.party_shape(Party::Alice).expect("n_alice >= 1");
    let v_a = random_gamma_unitary(a, rng);
    let v_b = match shape.party_shape(Party::Bob) {
        Ok(b) => random_gamma_unitary(b, rng),
        Err(_) => CMatrix::zeros(0, 0),
    };
    let d = shape.dim();
    let mut m = CMatrix::zeros(d, d);
    let (ra, rb) = (shape.range(Party::Alice), shape.range(Party::Bob));
    m.view_mut((ra.start, ra.start), (ra.len(), ra.len()))
        .copy_from(&v_a);
    m.view_mut((rb.start, rb.start), (rb.len(), rb.len()))
        .copy_from(&v_b);
    BogolubovTransform::from_parts_unchecked(shape, m, Locality::Local)
}

pub fn random_field<R: Rng + ?Sized>(shape: SystemShape, rng: &mut R) -> FieldVector {
    FieldVector::new(shape, gaussian_vector(shape.dim(), rng)).expect("length matches shape")
}

pub fn random_fields<R: Rng + ?Sized>(
    shape: SystemShape,
    count: usize,
    rng: &mut R,
) -> Vec<FieldVector> {
    (0..count).map(|_| random_field(shape, rng)).collect()
}

/// `V E V†` for a random Γ-commuting `V`.
pub fn random_basis_projection<R: Rng + ?Sized>(
    shape: SystemShape,
    rng: &mut R,
) -> BasisProjection {
    random_bogolubov(shape, rng)
        .apply_projection(&product_state(shape))
        .expect("shapes agree")
}

/// `V P_st V†` for a random local `V`.
pub fn random_certified_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> BasisProjection {
    let shape = SystemShape::symmetric(n).expect("n >= 1");
    random_local_transform(shape, rng)
        .apply_projection(&standard_state(n).expect("n >= 1"))
        .expect("shapes agree")
}

/// Convex combination of `terms` random basis projections; generically mixed.
pub fn random_covariance<R: Rng + ?Sized>(
    shape: SystemShape,
    terms: usize,
    rng: &mut R,
) -> CovarianceMatrix {
    let weights: Vec<f64> = (0..terms.max(1))
        .map(|_| rng.gen_range(0.05..1.0))
        .collect();
    let total: f64 = weights.iter().sum();
    let mut s = CMatrix::zeros(shape.dim(), shape.dim());
    for w in weights {
        s += random_basis_projection(shape, rng)
            .matrix()
            .scale(w / total);
    }
    CovarianceMatrix::new_unchecked(shape, s)
}

/// Random real antisymmetric `2n × 2n` generator with entries of size `scale`.
pub fn random_generator<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> GeneratorMatrix {
    let d = 2 * n;
    let a = DMatrix::<f64>::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal) * scale);
    GeneratorMatrix::new(&a - a.transpose(), 0.0).expect("antisymmetric by construction")
}
