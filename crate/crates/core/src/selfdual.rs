//! One-particle space layout, the conjugation `Γ`, covariance matrices and
//! Bogolubov transformations.
//!
//! The one-particle space of a bipartite system with `n` Alice modes and `m`
//! Bob modes is `K = C^n ⊕ C^n ⊕ C^m ⊕ C^m`, ordered `(A+, A−, B+, B−)`. The
//! `+` coefficient of mode `j` multiplies the annihilator `c_j` in `B(f)`, the
//! `−` coefficient multiplies the creator `c_j†`. A single-party space is the
//! same layout with `m = 0`.

use std::fmt;
use std::ops::{Deref, Range};

use serde::Serialize;

use crate::linalg::{block, hermitian_eigenvalues, identity, max_abs_diff};
use crate::{CMatrix, CVector, Error, Result};

/// Which coefficient of a mode a one-particle basis vector carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    /// Coefficient of the annihilator `c_j`.
    Plus,
    /// Coefficient of the creator `c_j†`.
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Party {
    Alice,
    Bob,
}

/// Mode counts of a bipartite system.
///
/// Fermion modes are numbered globally from `0`: Alice owns `0..n_alice`,
/// Bob owns `n_alice..n_alice + n_bob`. A single-party system has
/// `n_bob = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SystemShape {
    n_alice: usize,
    n_bob: usize,
}

impl SystemShape {
    pub fn new(n_alice: usize, n_bob: usize) -> Result<Self> {
        if n_alice == 0 {
            return Err(Error::InvalidShape("n_alice must be positive".into()));
        }
        Ok(Self { n_alice, n_bob })
    }

    /// Alice and Bob with `n` modes each.
    pub fn symmetric(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidShape("mode count must be positive".into()));
        }
        Self::new(n, n)
    }

    /// A single party with `n` modes (`n_bob = 0`).
    pub fn single(n: usize) -> Result<Self> {
        Self::new(n, 0)
    }

    pub fn n_alice(&self) -> usize {
        self.n_alice
    }

    pub fn n_bob(&self) -> usize {
        self.n_bob
    }

    /// Total number of fermion modes.
    pub fn modes(&self) -> usize {
        self.n_alice + self.n_bob
    }

    /// One-particle dimension `D = 2 n_alice + 2 n_bob`.
    pub fn dim(&self) -> usize {
        2 * self.modes()
    }

    pub fn is_symmetric(&self) -> bool {
        self.n_alice == self.n_bob
    }

    /// Index range of a party's one-particle space.
    pub fn range(&self, party: Party) -> Range<usize> {
        match party {
            Party::Alice => 0..2 * self.n_alice,
            Party::Bob => 2 * self.n_alice..self.dim(),
        }
    }

    /// Shape of one party on its own.
    pub fn party_shape(&self, party: Party) -> Result<SystemShape> {
        match party {
            Party::Alice => Self::single(self.n_alice),
            Party::Bob => Self::single(self.n_bob),
        }
    }

    /// One-particle index of `(mode, sign)`.
    pub fn index(&self, mode: usize, sign: Sign) -> usize {
        assert!(mode < self.modes(), "mode {mode} out of range");
        let (offset, local, n) = if mode < self.n_alice {
            (0, mode, self.n_alice)
        } else {
            (2 * self.n_alice, mode - self.n_alice, self.n_bob)
        };
        match sign {
            Sign::Plus => offset + local,
            Sign::Minus => offset + n + local,
        }
    }

    /// Inverse of [`SystemShape::index`].
    pub fn mode_of(&self, index: usize) -> (usize, Sign) {
        assert!(index < self.dim(), "index {index} out of range");
        let (offset, n, base) = if index < 2 * self.n_alice {
            (0, self.n_alice, 0)
        } else {
            (2 * self.n_alice, self.n_bob, self.n_alice)
        };
        let local = index - offset;
        if local < n {
            (base + local, Sign::Plus)
        } else {
            (base + local - n, Sign::Minus)
        }
    }

    /// Index carrying the opposite sign of the same mode.
    pub fn partner(&self, index: usize) -> usize {
        let (mode, sign) = self.mode_of(index);
        self.index(mode, sign.flip())
    }

    /// Orthogonal projection `Q_A` or `Q_B` onto a party's one-particle space.
    pub fn projection(&self, party: Party) -> CMatrix {
        let mut q = CMatrix::zeros(self.dim(), self.dim());
        for i in self.range(party) {
            q[(i, i)] = crate::linalg::ONE;
        }
        q
    }

    pub(crate) fn check_dim(&self, rows: usize, cols: usize) -> Result<()> {
        let d = self.dim();
        if rows != d || cols != d {
            return Err(Error::ShapeMismatch {
                expected: format!("{d}x{d}"),
                found: format!("{rows}x{cols}"),
            });
        }
        Ok(())
    }

    pub(crate) fn check_same(&self, other: &SystemShape) -> Result<()> {
        if self != other {
            return Err(Error::ShapeMismatch {
                expected: self.to_string(),
                found: other.to_string(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for SystemShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.n_alice, self.n_bob)
    }
}

/// The antiunitary conjugation `Γ`: swap the `+` and `−` coefficients of
/// every mode, then conjugate entrywise.
///
/// Never materialized as a matrix; `Γ` is not linear.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Conjugation {
    shape: SystemShape,
}

pub fn build_conjugation(shape: SystemShape) -> Conjugation {
    Conjugation { shape }
}

impl Conjugation {
    pub fn shape(&self) -> SystemShape {
        self.shape
    }

    pub fn apply(&self, f: &CVector) -> CVector {
        assert_eq!(f.len(), self.shape.dim());
        CVector::from_fn(f.len(), |i, _| f[self.shape.partner(i)].conj())
    }

    /// The symmetric bilinear form `⟨Γf, g⟩ = Σ_i f_{π(i)} g_i`.
    pub fn bilinear(&self, f: &CVector, g: &CVector) -> num_complex::Complex64 {
        assert_eq!(f.len(), self.shape.dim());
        assert_eq!(g.len(), self.shape.dim());
        (0..f.len()).map(|i| f[self.shape.partner(i)] * g[i]).sum()
    }

    /// The linear operator `Γ M Γ`, i.e. `Π conj(M) Π` with `Π` the sign swap.
    pub fn conjugate(&self, m: &CMatrix) -> CMatrix {
        let d = self.shape.dim();
        assert_eq!(m.shape(), (d, d));
        CMatrix::from_fn(d, d, |i, j| {
            m[(self.shape.partner(i), self.shape.partner(j))].conj()
        })
    }

    /// The real permutation `Π` underlying `Γ = Π ∘ conj`.
    pub fn permutation(&self) -> CMatrix {
        let d = self.shape.dim();
        CMatrix::from_fn(d, d, |i, j| {
            if self.shape.partner(i) == j {
                crate::linalg::ONE
            } else {
                crate::linalg::ZERO
            }
        })
    }

    /// `|Γ M Γ − M|_max`; zero iff `M` commutes with `Γ`.
    pub fn commutation_defect(&self, m: &CMatrix) -> f64 {
        max_abs_diff(&self.conjugate(m), m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Invariant {
    Hermiticity,
    Spectrum,
    GammaConstraint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub invariant: Invariant,
    pub magnitude: f64,
}

/// Outcome of checking the covariance invariants. All three deviations are
/// always measured; `violations` lists those above tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    /// `|S − S†|_max`.
    pub hermiticity: f64,
    /// Distance of the spectrum of `(S + S†)/2` outside `[0, 1]`.
    pub spectrum: f64,
    /// `|S + ΓSΓ − 1|_max`.
    pub gamma_constraint: f64,
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.valid {
            return write!(f, "valid");
        }
        let parts: Vec<String> = self
            .violations
            .iter()
            .map(|v| format!("{:?} {:e}", v.invariant, v.magnitude))
            .collect();
        write!(f, "{}", parts.join(", "))
    }
}

/// Check `S = S†`, `0 ≤ S ≤ 1` and `S + ΓSΓ = 1` within `eps`.
pub fn validate_covariance(
    shape: SystemShape,
    matrix: &CMatrix,
    eps: f64,
) -> Result<ValidationReport> {
    shape.check_dim(matrix.nrows(), matrix.ncols())?;
    let hermiticity = max_abs_diff(matrix, &matrix.adjoint());

    let eigs = hermitian_eigenvalues(matrix);
    let spectrum = match (eigs.first(), eigs.last()) {
        (Some(&lo), Some(&hi)) => (-lo).max(hi - 1.0).max(0.0),
        _ => 0.0,
    };

    let gamma = build_conjugation(shape);
    let sum = matrix + gamma.conjugate(matrix);
    let gamma_constraint = max_abs_diff(&sum, &identity(shape.dim()));

    let mut violations = Vec::new();
    for (invariant, magnitude) in [
        (Invariant::Hermiticity, hermiticity),
        (Invariant::Spectrum, spectrum),
        (Invariant::GammaConstraint, gamma_constraint),
    ] {
        if magnitude > eps {
            violations.push(Violation {
                invariant,
                magnitude,
            });
        }
    }
    Ok(ValidationReport {
        valid: violations.is_empty(),
        hermiticity,
        spectrum,
        gamma_constraint,
        violations,
    })
}

/// Covariance matrix of a quasifree state.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    shape: SystemShape,
    matrix: CMatrix,
}

impl CovarianceMatrix {
    /// Validated constructor.
    pub fn new(shape: SystemShape, matrix: CMatrix, eps: f64) -> Result<Self> {
        let report = validate_covariance(shape, &matrix, eps)?;
        if !report.valid {
            return Err(Error::InvalidCovariance(report.to_string()));
        }
        Ok(Self { shape, matrix })
    }

    /// Wrap a matrix without checking the invariants (dimensions still must
    /// match).
    pub fn new_unchecked(shape: SystemShape, matrix: CMatrix) -> Self {
        assert_eq!(matrix.shape(), (shape.dim(), shape.dim()));
        Self { shape, matrix }
    }

    /// `S = ½·1`, the tracial state.
    pub fn half_identity(shape: SystemShape) -> Self {
        Self {
            shape,
            matrix: identity(shape.dim()).scale(0.5),
        }
    }

    pub fn shape(&self) -> SystemShape {
        self.shape
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn validate(&self, eps: f64) -> ValidationReport {
        validate_covariance(self.shape, &self.matrix, eps)
            .expect("dimensions checked on construction")
    }

    pub fn is_basis_projection(&self, eps: f64) -> ProjectionCheck {
        let deviation = max_abs_diff(&(&self.matrix * &self.matrix), &self.matrix);
        ProjectionCheck {
            is_projection: deviation <= eps,
            deviation,
        }
    }

    /// The block `S_XY` between two parties' one-particle spaces.
    pub fn block(&self, row: Party, col: Party) -> CMatrix {
        let r = self.shape.range(row);
        let c = self.shape.range(col);
        block(&self.matrix, r.start, c.start, r.len(), c.len())
    }

    /// Restriction to one party: the diagonal block `S_AA` or `S_BB` as a
    /// single-party covariance.
    pub fn reduce(&self, party: Party) -> Result<CovarianceMatrix> {
        let shape = self.shape.party_shape(party)?;
        Ok(Self {
            shape,
            matrix: self.block(party, party),
        })
    }

    /// `|S − other|_max`, shapes must agree.
    pub fn distance(&self, other: &CovarianceMatrix) -> f64 {
        assert_eq!(self.shape, other.shape);
        max_abs_diff(&self.matrix, &other.matrix)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionCheck {
    pub is_projection: bool,
    /// `|P² − P|_max`.
    pub deviation: f64,
}

/// A covariance matrix that is idempotent, i.e. the covariance of a pure
/// quasifree state.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisProjection(CovarianceMatrix);

impl BasisProjection {
    pub fn new(cov: CovarianceMatrix, eps: f64) -> Result<Self> {
        let check = cov.is_basis_projection(eps);
        if !check.is_projection {
            return Err(Error::NotProjection {
                deviation: check.deviation,
            });
        }
        Ok(Self(cov))
    }

    pub(crate) fn new_unchecked(cov: CovarianceMatrix) -> Self {
        Self(cov)
    }

    pub fn covariance(&self) -> &CovarianceMatrix {
        &self.0
    }

    pub fn into_covariance(self) -> CovarianceMatrix {
        self.0
    }
}

impl Deref for BasisProjection {
    type Target = CovarianceMatrix;

    fn deref(&self) -> &CovarianceMatrix {
        &self.0
    }
}

/// The product basis projection `E = diag(1_n, 0, 1_m, 0)`: every mode occupied.
pub fn product_state(shape: SystemShape) -> BasisProjection {
    let mut m = CMatrix::zeros(shape.dim(), shape.dim());
    for mode in 0..shape.modes() {
        let i = shape.index(mode, Sign::Plus);
        m[(i, i)] = crate::linalg::ONE;
    }
    BasisProjection(CovarianceMatrix { shape, matrix: m })
}

/// The Fock vacuum's basis projection: `⟨c_j c_j†⟩ = 1`.
pub fn vacuum_state(shape: SystemShape) -> BasisProjection {
    let mut m = CMatrix::zeros(shape.dim(), shape.dim());
    for mode in 0..shape.modes() {
        let i = shape.index(mode, Sign::Minus);
        m[(i, i)] = crate::linalg::ONE;
    }
    BasisProjection(CovarianceMatrix { shape, matrix: m })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Locality {
    Global,
    Local,
}

/// A unitary on the one-particle space commuting with `Γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BogolubovTransform {
    shape: SystemShape,
    matrix: CMatrix,
    locality: Locality,
}

fn transform_defects(shape: SystemShape, matrix: &CMatrix) -> (f64, f64) {
    let unitarity = max_abs_diff(&(matrix.adjoint() * matrix), &identity(shape.dim()));
    let commutation = build_conjugation(shape).commutation_defect(matrix);
    (unitarity, commutation)
}

impl BogolubovTransform {
    /// Global transformation; fails unless `V` is unitary and `ΓV = VΓ`
    /// within `eps`.
    pub fn new(shape: SystemShape, matrix: CMatrix, eps: f64) -> Result<Self> {
        shape.check_dim(matrix.nrows(), matrix.ncols())?;
        let (unitarity, commutation) = transform_defects(shape, &matrix);
        if unitarity > eps || commutation > eps {
            return Err(Error::InvalidTransform {
                unitarity,
                commutation,
            });
        }
        Ok(Self {
            shape,
            matrix,
            locality: Locality::Global,
        })
    }

    pub fn identity(shape: SystemShape) -> Self {
        Self {
            shape,
            matrix: identity(shape.dim()),
            locality: Locality::Local,
        }
    }

    /// Block-diagonal `V_A ⊕ V_B`; each block must be a local Bogolubov
    /// transformation of its party.
    pub fn local(shape: SystemShape, v_a: &CMatrix, v_b: &CMatrix, eps: f64) -> Result<Self> {
        let a = shape.party_shape(Party::Alice)?;
        a.check_dim(v_a.nrows(), v_a.ncols())?;
        let (ua, ca) = transform_defects(a, v_a);
        let (ub, cb) = if shape.n_bob() == 0 {
            if !v_b.is_empty() {
                return Err(Error::ShapeMismatch {
                    expected: "0x0".into(),
                    found: format!("{}x{}", v_b.nrows(), v_b.ncols()),
                });
            }
            (0.0, 0.0)
        } else {
            let b = shape.party_shape(Party::Bob)?;
            b.check_dim(v_b.nrows(), v_b.ncols())?;
            transform_defects(b, v_b)
        };
        let (unitarity, commutation) = (ua.max(ub), ca.max(cb));
        if unitarity > eps || commutation > eps {
            return Err(Error::InvalidTransform {
                unitarity,
                commutation,
            });
        }
        let d = shape.dim();
        let na = v_a.nrows();
        let mut m = CMatrix::zeros(d, d);
        m.view_mut((0, 0), (na, na)).copy_from(v_a);
        m.view_mut((na, na), (d - na, d - na)).copy_from(v_b);
        Ok(Self {
            shape,
            matrix: m,
            locality: Locality::Local,
        })
    }

    pub fn shape(&self) -> SystemShape {
        self.shape
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn locality(&self) -> Locality {
        self.locality
    }

    /// `(V_A, V_B)` for a local transformation.
    pub fn local_blocks(&self) -> Option<(CMatrix, CMatrix)> {
        if self.locality != Locality::Local {
            return None;
        }
        let a = self.shape.range(Party::Alice);
        let b = self.shape.range(Party::Bob);
        Some((
            block(&self.matrix, a.start, a.start, a.len(), a.len()),
            block(&self.matrix, b.start, b.start, b.len(), b.len()),
        ))
    }

    /// `V S V†`.
    pub fn apply(&self, s: &CovarianceMatrix) -> Result<CovarianceMatrix> {
        self.shape.check_same(&s.shape)?;
        let m = &self.matrix * s.matrix() * self.matrix.adjoint();
        Ok(CovarianceMatrix::new_unchecked(s.shape, m))
    }

    /// `V P V†`, which is again a basis projection.
    pub fn apply_projection(&self, p: &BasisProjection) -> Result<BasisProjection> {
        Ok(BasisProjection(self.apply(p)?))
    }

    /// Operator product `self · other` (apply `other` first).
    pub fn compose(&self, other: &BogolubovTransform) -> Result<BogolubovTransform> {
        self.shape.check_same(&other.shape)?;
        let locality = if self.locality == Locality::Local && other.locality == Locality::Local {
            Locality::Local
        } else {
            Locality::Global
        };
        Ok(Self {
            shape: self.shape,
            matrix: &self.matrix * &other.matrix,
            locality,
        })
    }

    /// `|V†V − 1|_max` and `|ΓVΓ − V|_max`.
    pub fn defects(&self) -> (f64, f64) {
        transform_defects(self.shape, &self.matrix)
    }

    pub(crate) fn from_parts_unchecked(
        shape: SystemShape,
        matrix: CMatrix,
        locality: Locality,
    ) -> Self {
        Self {
            shape,
            matrix,
            locality,
        }
    }
}

pub fn apply_bogolubov(v: &BogolubovTransform, s: &CovarianceMatrix) -> Result<CovarianceMatrix> {
    v.apply(s)
}

pub fn make_local(
    shape: SystemShape,
    v_a: &CMatrix,
    v_b: &CMatrix,
    eps: f64,
) -> Result<BogolubovTransform> {
    BogolubovTransform::local(shape, v_a, v_b, eps)
}
