//! Certification of maximally entangled pure quasifree states.
//!
//! For `n_alice = n_bob = n` a basis projection `P` is maximally entangled
//! exactly when `P = ½ [[1, U], [U†, 1]]` with `U` unitary and
//! `Γ_A U = −U Γ_B`. Any such state is brought to the standard state
//! `P_st = ½ [[1, i·1], [−i·1, 1]]` by a local Bogolubov transformation.

use serde::Serialize;

use crate::linalg::{identity, max_abs_diff, I};
use crate::selfdual::{
    build_conjugation, BasisProjection, BogolubovTransform, CovarianceMatrix, Locality, Party,
    SystemShape,
};
use crate::{CMatrix, Error, Result};

/// A unitary `U: K_B → K_A` anticommuting with the conjugation.
#[derive(Debug, Clone, PartialEq)]
pub struct AnticommutingUnitary {
    n: usize,
    matrix: CMatrix,
}

/// `|Γ_A U + U Γ_B|_max`, written on matrices as `|Π conj(U) + U Π|_max`.
fn anticommutation_defect(n: usize, u: &CMatrix) -> f64 {
    let local = SystemShape::single(n).expect("n >= 1");
    let pi = build_conjugation(local).permutation();
    let lhs = &pi * u.map(|z| z.conj());
    let rhs = u * &pi;
    crate::linalg::max_abs(&(lhs + rhs))
}

fn unitarity_defect(u: &CMatrix) -> f64 {
    let id = identity(u.nrows());
    max_abs_diff(&(u.adjoint() * u), &id).max(max_abs_diff(&(u * u.adjoint()), &id))
}

impl AnticommutingUnitary {
    pub fn new(matrix: CMatrix, eps: f64) -> Result<Self> {
        let (r, c) = matrix.shape();
        if r != c || r == 0 || r % 2 == 1 {
            return Err(Error::InvalidInput(format!(
                "U_AB must be 2n x 2n, got {r}x{c}"
            )));
        }
        let n = r / 2;
        let unitarity = unitarity_defect(&matrix);
        let anticommutation = anticommutation_defect(n, &matrix);
        if unitarity > eps || anticommutation > eps {
            return Err(Error::InvalidInput(format!(
                "U_AB fails its invariants: unitarity {unitarity:e}, anticommutation {anticommutation:e}"
            )));
        }
        Ok(Self { n, matrix })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    MaximallyEntangled,
    NotMaximallyEntangled,
}

/// Measured deviations, always all five, in the order they are checked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Deviations {
    /// `|P² − P|_max`.
    pub purity: f64,
    /// `|P_AA − ½|_max`.
    #[serde(rename = "diag_A")]
    pub diag_a: f64,
    /// `|P_BB − ½|_max`.
    #[serde(rename = "diag_B")]
    pub diag_b: f64,
    /// Unitarity defect of `U = 2 P_AB`.
    pub unitarity: f64,
    /// `|Γ_A U + U Γ_B|` in matrix form.
    pub anticommutation: f64,
}

impl Deviations {
    pub fn max(&self) -> f64 {
        [
            self.purity,
            self.diag_a,
            self.diag_b,
            self.unitarity,
            self.anticommutation,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub verdict: Verdict,
    pub deviations: Deviations,
    /// `U_AB = 2 P_AB`, present only for a positive verdict.
    pub witness: Option<AnticommutingUnitary>,
}

impl Certificate {
    pub fn is_maximal(&self) -> bool {
        self.verdict == Verdict::MaximallyEntangled
    }
}

/// Certify a covariance matrix against the block criterion.
pub fn certify(p: &CovarianceMatrix, eps: f64) -> Result<Certificate> {
    let shape = p.shape();
    if !shape.is_symmetric() {
        return Err(Error::UnsupportedShape(format!(
            "certification needs n_alice = n_bob, got {shape}"
        )));
    }
    let n = shape.n_alice();
    let half = identity(2 * n).scale(0.5);

    let purity = p.is_basis_projection(eps).deviation;
    let diag_a = max_abs_diff(&p.block(Party::Alice, Party::Alice), &half);
    let diag_b = max_abs_diff(&p.block(Party::Bob, Party::Bob), &half);
    let u = p.block(Party::Alice, Party::Bob).scale(2.0);
    let unitarity = unitarity_defect(&u);
    let anticommutation = anticommutation_defect(n, &u);

    let deviations = Deviations {
        purity,
        diag_a,
        diag_b,
        unitarity,
        anticommutation,
    };
    let positive = deviations.max() <= eps;
    Ok(Certificate {
        verdict: if positive {
            Verdict::MaximallyEntangled
        } else {
            Verdict::NotMaximallyEntangled
        },
        deviations,
        witness: positive.then_some(AnticommutingUnitary { n, matrix: u }),
    })
}

/// `½ [[1, U], [U†, 1]]`.
fn block_projection(n: usize, u: &CMatrix) -> BasisProjection {
    let shape = SystemShape::symmetric(n).expect("n >= 1");
    let d = 4 * n;
    let mut m = identity(d).scale(0.5);
    m.view_mut((0, 2 * n), (2 * n, 2 * n))
        .copy_from(&u.scale(0.5));
    m.view_mut((2 * n, 0), (2 * n, 2 * n))
        .copy_from(&u.adjoint().scale(0.5));
    BasisProjection::new_unchecked(CovarianceMatrix::new_unchecked(shape, m))
}

/// The standard maximally entangled state `P_st` (witness `U = i·1`).
pub fn standard_state(n: usize) -> Result<BasisProjection> {
    if n == 0 {
        return Err(Error::InvalidShape("mode count must be positive".into()));
    }
    Ok(block_projection(n, &identity(2 * n).map(|z| z * I)))
}

pub fn from_unitary(u: &AnticommutingUnitary) -> BasisProjection {
    block_projection(u.n, &u.matrix)
}

/// Local transformation `W = diag(−i U, 1)` with `W P_st W† = P`.
///
/// `U = 2 P_AB` maps Bob's space to Alice's; the identification
/// `K_A ≅ K_B` for equal mode counts lets `−iU` act as Alice's block.
pub fn normal_form(p: &CovarianceMatrix, eps: f64) -> Result<BogolubovTransform> {
    let cert = certify(p, eps)?;
    let Some(witness) = cert.witness else {
        return Err(Error::NotMaximal);
    };
    let n = witness.n;
    let shape = p.shape();
    let mut w = identity(4 * n);
    w.view_mut((0, 0), (2 * n, 2 * n))
        .copy_from(&witness.matrix.map(|z| -I * z));
    Ok(BogolubovTransform::from_parts_unchecked(
        shape,
        w,
        Locality::Local,
    ))
}
