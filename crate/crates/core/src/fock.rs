//! Dense Fock-space representation used as ground truth.
//!
//! Occupation basis vectors `|q_1 … q_M⟩ = (c_1†)^{q_1} ⋯ (c_M†)^{q_M} |0⟩`
//! are indexed by the binary number `q_1 … q_M` with mode 1 as the most
//! significant bit. Creation and annihilation carry the sign
//! `(−1)^{#occupied modes before j}`, so for a bipartite system with Alice's
//! modes first the Fock space is `H ⊗ H` with `c_{a_j} = c_j ⊗ 1` and
//! `c_{b_j} = θ ⊗ c_j`, `θ` the parity of Alice's particle number.
//!
//! Everything here is exponential in the number of modes; the cap keeps
//! matrices at most `4096 × 4096`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::jordan_wigner::{GeneratorMatrix, PairBlockSpec};
use crate::linalg::{
    c, entropy_bits, hermitian_eigenvalues, identity, max_abs, max_abs_diff, ONE, ZERO,
};
use crate::sample;
use crate::selfdual::{build_conjugation, CovarianceMatrix, Party, Sign, SystemShape};
use crate::wick::FieldVector;
use crate::{CMatrix, CVector, Error, Result};

/// Default per-party mode cap.
pub const DEFAULT_PARTY_CAP: usize = 6;
/// Largest number of modes of a dense Fock space.
pub const MAX_MODES: usize = 2 * DEFAULT_PARTY_CAP;

/// Amplitudes below this are treated as null when building vacua.
const NULL_EIGENVALUE: f64 = 1e-10;
/// Covariance eigenvalues this close to 0 or 1 are purified as exactly 0 or 1.
const SPECTRUM_SNAP: f64 = 1e-12;

/// Fock space of `modes` fermion modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockSpace {
    modes: usize,
}

impl FockSpace {
    pub fn new(modes: usize) -> Result<Self> {
        if modes > MAX_MODES {
            return Err(Error::SizeCap {
                requested: modes,
                cap: MAX_MODES,
            });
        }
        Ok(Self { modes })
    }

    pub fn for_shape(shape: SystemShape) -> Result<Self> {
        Self::new(shape.modes())
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        1 << self.modes
    }

    fn bit(&self, mode: usize) -> usize {
        1 << (self.modes - 1 - mode)
    }

    /// `(−1)^{number of occupied modes before mode}`.
    fn string_sign(&self, mode: usize, state: usize) -> f64 {
        let before = state >> (self.modes - mode);
        if before.count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// Action of `c_mode` (or `c_mode†`) on a basis state.
    fn ladder(&self, mode: usize, create: bool, state: usize) -> Option<(f64, usize)> {
        let b = self.bit(mode);
        let occupied = state & b != 0;
        if occupied == create {
            return None;
        }
        Some((self.string_sign(mode, state), state ^ b))
    }

    /// Parity `(−1)^N` of a basis state.
    pub fn parity(state: usize) -> f64 {
        if state.count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    pub fn vacuum(&self) -> CVector {
        let mut v = CVector::zeros(self.dim());
        v[0] = ONE;
        v
    }

    fn apply_ladder(&self, mode: usize, create: bool, v: &CVector) -> CVector {
        let mut out = CVector::zeros(self.dim());
        for (state, &amp) in v.iter().enumerate() {
            if amp == ZERO {
                continue;
            }
            if let Some((sign, target)) = self.ladder(mode, create, state) {
                out[target] += amp * sign;
            }
        }
        out
    }

    pub fn annihilate(&self, mode: usize, v: &CVector) -> CVector {
        self.apply_ladder(mode, false, v)
    }

    pub fn create(&self, mode: usize, v: &CVector) -> CVector {
        self.apply_ladder(mode, true, v)
    }

    fn check_field(&self, f: &FieldVector) -> Result<()> {
        if f.shape().modes() != self.modes {
            return Err(Error::ShapeMismatch {
                expected: format!("{} modes", self.modes),
                found: format!("{} modes", f.shape().modes()),
            });
        }
        Ok(())
    }

    /// `B(f) v` without forming the matrix.
    pub fn apply_field(&self, f: &FieldVector, v: &CVector) -> Result<CVector> {
        self.check_field(f)?;
        let shape = f.shape();
        let mut out = CVector::zeros(self.dim());
        for (idx, &coef) in f.coefficients().iter().enumerate() {
            if coef == ZERO {
                continue;
            }
            let (mode, sign) = shape.mode_of(idx);
            let create = sign == Sign::Minus;
            for (state, &amp) in v.iter().enumerate() {
                if amp == ZERO {
                    continue;
                }
                if let Some((s, target)) = self.ladder(mode, create, state) {
                    out[target] += coef * amp * s;
                }
            }
        }
        Ok(out)
    }

    pub fn ladder_matrix(&self, mode: usize, create: bool) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim(), self.dim());
        for state in 0..self.dim() {
            if let Some((s, target)) = self.ladder(mode, create, state) {
                m[(target, state)] = c(s, 0.0);
            }
        }
        m
    }

    /// Dense `B(f)`.
    pub fn field_operator(&self, f: &FieldVector) -> Result<CMatrix> {
        self.check_field(f)?;
        let mut m = CMatrix::zeros(self.dim(), self.dim());
        let shape = f.shape();
        for (idx, &coef) in f.coefficients().iter().enumerate() {
            if coef == ZERO {
                continue;
            }
            let (mode, sign) = shape.mode_of(idx);
            for state in 0..self.dim() {
                if let Some((s, target)) = self.ladder(mode, sign == Sign::Minus, state) {
                    m[(target, state)] += coef * s;
                }
            }
        }
        Ok(m)
    }

    /// Total parity `Θ = (−1)^N`.
    pub fn parity_operator(&self) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_fn(self.dim(), |s, _| {
            c(Self::parity(s), 0.0)
        }))
    }

    /// Parity of the first `n` modes, `Θ_A = θ ⊗ 1`.
    pub fn leading_parity_operator(&self, n: usize) -> CMatrix {
        let shift = self.modes - n;
        CMatrix::from_diagonal(&CVector::from_fn(self.dim(), |s, _| {
            c(Self::parity(s >> shift), 0.0)
        }))
    }
}

/// A dense operator on a Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    pub modes: usize,
    pub matrix: CMatrix,
}

/// A dense Fock-space vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseVector {
    pub modes: usize,
    pub amplitudes: CVector,
}

impl DenseVector {
    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn normalized(&self) -> DenseVector {
        DenseVector {
            modes: self.modes,
            amplitudes: self.amplitudes.unscale(self.norm()),
        }
    }

    pub fn projector(&self) -> DenseOperator {
        let v = self.normalized().amplitudes;
        DenseOperator {
            modes: self.modes,
            matrix: &v * v.adjoint(),
        }
    }

    /// Multiply by a phase so the largest-magnitude amplitude is real positive.
    pub fn with_canonical_phase(mut self) -> DenseVector {
        let pivot = self
            .amplitudes
            .iter()
            .copied()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap_or(ONE);
        if pivot.norm() > 0.0 {
            let phase = pivot.conj() / pivot.norm();
            self.amplitudes *= phase;
        }
        self
    }
}

/// `(c_j, c_j†)` for every mode.
pub fn build_field_operators(modes: usize) -> Result<Vec<(CMatrix, CMatrix)>> {
    let space = FockSpace::new(modes)?;
    Ok((0..modes)
        .map(|j| (space.ladder_matrix(j, false), space.ladder_matrix(j, true)))
        .collect())
}

/// Kernel of a Hermitian matrix: orthonormal eigenvectors with eigenvalue
/// below `threshold`.
fn kernel_basis(m: &CMatrix, threshold: f64) -> Vec<CVector> {
    let h = (m + m.adjoint()).scale(0.5);
    let eig = h.symmetric_eigen();
    eig.eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| l < threshold)
        .map(|(i, _)| eig.eigenvectors.column(i).into_owned())
        .collect()
}

/// Deterministic vector with generic overlaps.
fn generic_vector(dim: usize) -> CVector {
    CVector::from_fn(dim, |i, _| {
        let x = i as f64 + 1.0;
        c((0.7 * x).sin() + 1.1, (1.3 * x + 0.4).cos())
    })
}

/// The Fock vector `Ω` with `B(f)Ω = 0` for all `f ∈ ker P`.
///
/// `ker P` is spanned by `M` orthonormal vectors whose fields mutually
/// anticommute and square to zero, so their product maps a generic vector
/// onto the one-dimensional common kernel.
pub fn vacuum_of_projection(p: &CovarianceMatrix, eps: f64) -> Result<DenseVector> {
    let shape = p.shape();
    let space = FockSpace::for_shape(shape)?;
    let check = p.is_basis_projection(eps);
    if !check.is_projection {
        return Err(Error::Degenerate(format!(
            "covariance is not idempotent (|P² − P| = {:e})",
            check.deviation
        )));
    }
    let kernel = kernel_basis(p.matrix(), 0.5);
    if kernel.len() != shape.modes() {
        return Err(Error::Degenerate(format!(
            "ker P has dimension {}, expected {}",
            kernel.len(),
            shape.modes()
        )));
    }
    let annihilators: Vec<FieldVector> = kernel
        .into_iter()
        .map(|f| FieldVector::new(shape, f))
        .collect::<Result<_>>()?;

    let mut omega = generic_vector(space.dim());
    for a in &annihilators {
        omega = space.apply_field(a, &omega)?;
        let norm = omega.norm();
        if norm < 1e-300 {
            return Err(Error::Degenerate("annihilator product vanished".into()));
        }
        omega.unscale_mut(norm);
    }
    // Quasifree vacua have definite parity; drop the roundoff-level
    // component of the other sector so odd moments vanish exactly.
    let even_weight: f64 = (0..omega.len())
        .filter(|&s| FockSpace::parity(s) > 0.0)
        .map(|s| omega[s].norm_sqr())
        .sum();
    let keep = if even_weight >= 0.5 { 1.0 } else { -1.0 };
    let stray = if keep > 0.0 {
        1.0 - even_weight
    } else {
        even_weight
    };
    if stray.max(0.0).sqrt() > NULL_EIGENVALUE.sqrt() {
        return Err(Error::Degenerate(format!(
            "vacuum has mixed parity (minority weight {stray:e})"
        )));
    }
    for s in 0..omega.len() {
        if FockSpace::parity(s) != keep {
            omega[s] = Complex64::new(0.0, 0.0);
        }
    }
    let norm = omega.norm();
    omega.unscale_mut(norm);
    let omega = DenseVector {
        modes: space.modes(),
        amplitudes: omega,
    }
    .with_canonical_phase();

    let residual = annihilators
        .iter()
        .map(|a| space.apply_field(a, &omega.amplitudes).map(|v| v.norm()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    if residual > NULL_EIGENVALUE.sqrt() {
        return Err(Error::Degenerate(format!(
            "common kernel residual {residual:e}"
        )));
    }
    Ok(omega)
}

/// `S_ij = ⟨B(e_i)ψ, B(e_j)ψ⟩ = ⟨ψ|B(Γe_i) B(e_j)|ψ⟩` of a normalized copy of `ψ`.
pub fn covariance_from_vector(shape: SystemShape, psi: &DenseVector) -> Result<CovarianceMatrix> {
    let space = FockSpace::for_shape(shape)?;
    if psi.modes != space.modes() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} modes", space.modes()),
            found: format!("{} modes", psi.modes),
        });
    }
    let psi = psi.normalized();
    let d = shape.dim();
    let images: Vec<CVector> = (0..d)
        .map(|i| space.apply_field(&FieldVector::basis(shape, i), &psi.amplitudes))
        .collect::<Result<_>>()?;
    let s = CMatrix::from_fn(d, d, |i, j| images[i].dotc(&images[j]));
    Ok(CovarianceMatrix::new_unchecked(shape, s))
}

/// `S_ij = tr(ρ B(Γe_i) B(e_j))`.
pub fn covariance_from_density(
    shape: SystemShape,
    rho: &DenseOperator,
) -> Result<CovarianceMatrix> {
    let space = FockSpace::for_shape(shape)?;
    if rho.modes != space.modes() || rho.matrix.nrows() != space.dim() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} modes", space.modes()),
            found: format!("{} modes", rho.modes),
        });
    }
    let d = shape.dim();
    let dim = space.dim();
    let mode_ops: Vec<(usize, bool)> = (0..d)
        .map(|i| {
            let (mode, sign) = shape.mode_of(i);
            (mode, sign == Sign::Minus)
        })
        .collect();
    // tr(ρ X) = Σ_l (ρ X)_{ll}; X = B(Γe_i) B(e_j) maps basis states to
    // signed basis states.
    let mut s = CMatrix::zeros(d, d);
    for i in 0..d {
        let (mi, ci) = mode_ops[shape.partner(i)];
        for j in 0..d {
            let (mj, cj) = mode_ops[j];
            let mut acc = ZERO;
            for l in 0..dim {
                let Some((s1, k)) = space.ladder(mj, cj, l) else {
                    continue;
                };
                let Some((s2, m)) = space.ladder(mi, ci, k) else {
                    continue;
                };
                acc += rho.matrix[(l, m)] * (s1 * s2);
            }
            s[(i, j)] = acc;
        }
    }
    Ok(CovarianceMatrix::new_unchecked(shape, s))
}

/// Reorder a bipartite covariance into the single-party layout of the same
/// modes: all `+` coefficients, then all `−` coefficients.
fn to_single_layout(s: &CovarianceMatrix) -> Result<(SystemShape, CMatrix)> {
    let shape = s.shape();
    let single = SystemShape::single(shape.modes())?;
    let d = shape.dim();
    let map: Vec<usize> = (0..d)
        .map(|i| {
            let (mode, sign) = shape.mode_of(i);
            single.index(mode, sign)
        })
        .collect();
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            m[(map[i], map[j])] = s.matrix()[(i, j)];
        }
    }
    Ok((single, m))
}

/// Density operator of the quasifree state with covariance `S`.
///
/// Pure states are the projector onto [`vacuum_of_projection`]. Mixed states
/// are purified to `P = [[S, i R], [−i R, 1 − S]]`, `R = √(S(1 − S))`, on
/// twice the modes, and the auxiliary modes (placed last) are traced out.
pub fn density_from_covariance(s: &CovarianceMatrix, eps: f64) -> Result<DenseOperator> {
    let report = s.validate(eps);
    if !report.valid {
        return Err(Error::InvalidCovariance(report.to_string()));
    }
    if s.is_basis_projection(eps).is_projection {
        return Ok(vacuum_of_projection(s, eps)?.projector());
    }
    let modes = s.shape().modes();
    FockSpace::new(2 * modes)?;
    let (_, single) = to_single_layout(s)?;
    let d = single.nrows();
    let herm = (&single + single.adjoint()).scale(0.5);
    let eig = herm.symmetric_eigen();
    // Eigenvalues 0 and 1 are common (e.g. mixtures of pure states of
    // opposite parity); rounding them by 1e-16 would put 1e-8 into √(λ(1−λ)).
    let snapped: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&l| {
            if l < SPECTRUM_SNAP {
                0.0
            } else if l > 1.0 - SPECTRUM_SNAP {
                1.0
            } else {
                l
            }
        })
        .collect();
    let spectral = |f: &dyn Fn(f64) -> f64| {
        let diag = CVector::from_fn(d, |i, _| c(f(snapped[i]), 0.0));
        &eig.eigenvectors * CMatrix::from_diagonal(&diag) * eig.eigenvectors.adjoint()
    };
    let herm = spectral(&|l| l);
    let r = spectral(&|l| (l * (1.0 - l)).sqrt());

    let doubled = SystemShape::symmetric(modes)?;
    let mut p = CMatrix::zeros(2 * d, 2 * d);
    p.view_mut((0, 0), (d, d)).copy_from(&herm);
    p.view_mut((0, d), (d, d))
        .copy_from(&r.map(|z| z * crate::linalg::I));
    p.view_mut((d, 0), (d, d))
        .copy_from(&r.map(|z| -z * crate::linalg::I));
    p.view_mut((d, d), (d, d)).copy_from(&(identity(d) - &herm));
    // Purification is exact up to the eigensolver's rounding.
    let p = CovarianceMatrix::new_unchecked(doubled, p);
    let omega = vacuum_of_projection(&p, eps.max(1e-9))?;

    let sys = 1usize << modes;
    let aux = 1usize << modes;
    let mut rho = CMatrix::zeros(sys, sys);
    for a in 0..sys {
        for b in 0..sys {
            let mut acc = ZERO;
            for k in 0..aux {
                acc += omega.amplitudes[a * aux + k] * omega.amplitudes[b * aux + k].conj();
            }
            rho[(a, b)] = acc;
        }
    }
    Ok(DenseOperator { modes, matrix: rho })
}

/// `⟨ψ| B(f_1) ⋯ B(f_k) |ψ⟩` for a normalized copy of `ψ`.
pub fn vector_expectation(psi: &DenseVector, fields: &[FieldVector]) -> Result<Complex64> {
    let space = FockSpace::new(psi.modes)?;
    let psi = psi.normalized();
    let mut v = psi.amplitudes.clone();
    for f in fields.iter().rev() {
        v = space.apply_field(f, &v)?;
    }
    Ok(psi.amplitudes.dotc(&v))
}

/// `tr(ρ B(f_1) ⋯ B(f_k))`.
pub fn density_expectation(rho: &DenseOperator, fields: &[FieldVector]) -> Result<Complex64> {
    let space = FockSpace::new(rho.modes)?;
    let mut acc = ZERO;
    for l in 0..space.dim() {
        let mut v = CVector::zeros(space.dim());
        v[l] = ONE;
        for f in fields.iter().rev() {
            v = space.apply_field(f, &v)?;
        }
        acc += (rho.matrix.row(l) * &v)[(0, 0)];
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ParityLabel {
    #[serde(rename = "++")]
    PlusPlus,
    #[serde(rename = "+-")]
    PlusMinus,
    #[serde(rename = "-+")]
    MinusPlus,
    #[serde(rename = "--")]
    MinusMinus,
}

impl ParityLabel {
    pub const ALL: [ParityLabel; 4] = [
        ParityLabel::PlusPlus,
        ParityLabel::PlusMinus,
        ParityLabel::MinusPlus,
        ParityLabel::MinusMinus,
    ];

    fn parities(self) -> (u32, u32) {
        match self {
            ParityLabel::PlusPlus => (0, 0),
            ParityLabel::PlusMinus => (0, 1),
            ParityLabel::MinusPlus => (1, 0),
            ParityLabel::MinusMinus => (1, 1),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ParityLabel::PlusPlus => "++",
            ParityLabel::PlusMinus => "+-",
            ParityLabel::MinusPlus => "-+",
            ParityLabel::MinusMinus => "--",
        }
    }
}

/// One term `p_ab σ_ab` of the even-even restriction.
#[derive(Debug, Clone, PartialEq)]
pub struct ParityBlock {
    pub label: ParityLabel,
    pub weight: f64,
    /// `σ_ab` on `H_a ⊗ H_b`, Alice's index slow; zero when the weight vanishes.
    pub state: CMatrix,
    /// `dim H_a`, `dim H_b`.
    pub factor_dims: (usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParityBlockDecomposition {
    pub blocks: Vec<ParityBlock>,
}

impl ParityBlockDecomposition {
    pub fn weight(&self, label: ParityLabel) -> f64 {
        self.blocks
            .iter()
            .find(|b| b.label == label)
            .map_or(0.0, |b| b.weight)
    }

    /// `min(p_{+−} + p_{−+}, p_{++} + p_{−−})`: zero iff the state has a
    /// definite total parity.
    pub fn dichotomy_defect(&self) -> f64 {
        let same = self.weight(ParityLabel::PlusPlus) + self.weight(ParityLabel::MinusMinus);
        let mixed = self.weight(ParityLabel::PlusMinus) + self.weight(ParityLabel::MinusPlus);
        same.min(mixed)
    }
}

fn check_density(shape: SystemShape, rho: &DenseOperator) -> Result<FockSpace> {
    let space = FockSpace::for_shape(shape)?;
    if rho.modes != space.modes() || rho.matrix.shape() != (space.dim(), space.dim()) {
        return Err(Error::ShapeMismatch {
            expected: format!("{} modes", space.modes()),
            found: format!("{} modes", rho.modes),
        });
    }
    Ok(space)
}

/// Project `ρ` onto the simultaneous eigenspaces of `Θ_A` and `Θ_B`.
pub fn parity_blocks(shape: SystemShape, rho: &DenseOperator) -> Result<ParityBlockDecomposition> {
    check_density(shape, rho)?;
    let (na, nb) = (shape.n_alice(), shape.n_bob());
    let bob_dim = 1usize << nb;
    let sector = |bits: usize, parity: u32| -> Vec<usize> {
        (0..1usize << bits)
            .filter(|s| s.count_ones() % 2 == parity)
            .collect()
    };
    let mut blocks = Vec::with_capacity(4);
    for label in ParityLabel::ALL {
        let (pa, pb) = label.parities();
        let alice = sector(na, pa);
        let bob = sector(nb, pb);
        let idx: Vec<usize> = alice
            .iter()
            .flat_map(|&a| bob.iter().map(move |&b| a * bob_dim + b))
            .collect();
        let mut block = CMatrix::from_fn(idx.len(), idx.len(), |i, j| rho.matrix[(idx[i], idx[j])]);
        let weight = (0..idx.len()).map(|i| block[(i, i)].re).sum::<f64>();
        if weight > 0.0 {
            block.unscale_mut(weight);
        }
        blocks.push(ParityBlock {
            label,
            weight,
            state: block,
            factor_dims: (alice.len(), bob.len()),
        });
    }
    Ok(ParityBlockDecomposition { blocks })
}

/// Partial trace of an operator on `C^da ⊗ C^db` over the second factor.
pub fn trace_out_second(m: &CMatrix, da: usize, db: usize) -> CMatrix {
    CMatrix::from_fn(da, da, |a, b| {
        (0..db).map(|k| m[(a * db + k, b * db + k)]).sum()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockReport {
    pub label: ParityLabel,
    pub weight: f64,
    /// `|σ² − σ|_max`.
    pub purity_deviation: f64,
    /// `|tr_B σ − 1/d|_max`.
    pub reduced_deviation: f64,
    pub entropy_bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Def1Report {
    pub holds: bool,
    /// One mode per party: every block is one-dimensional, so the check is
    /// trivially satisfied with zero entanglement.
    pub degenerate: bool,
    pub dichotomy_defect: f64,
    pub blocks: Vec<BlockReport>,
}

/// Every occupied parity block must be a maximally entangled pure state of
/// `H_a ⊗ H_b`.
pub fn check_def1(shape: SystemShape, rho: &DenseOperator, eps: f64) -> Result<Def1Report> {
    if !shape.is_symmetric() {
        return Err(Error::UnsupportedShape(format!(
            "parity blocks need n_alice = n_bob, got {shape}"
        )));
    }
    let decomposition = parity_blocks(shape, rho)?;
    let mut holds = true;
    let mut blocks = Vec::new();
    for b in &decomposition.blocks {
        if b.weight <= eps {
            continue;
        }
        let (da, db) = b.factor_dims;
        let purity_deviation = max_abs_diff(&(&b.state * &b.state), &b.state);
        let reduced = trace_out_second(&b.state, da, db);
        let reduced_deviation = max_abs_diff(&reduced, &identity(da).unscale(da as f64));
        let entropy = entropy_bits(&reduced);
        holds &= purity_deviation <= eps && reduced_deviation <= eps;
        blocks.push(BlockReport {
            label: b.label,
            weight: b.weight,
            purity_deviation,
            reduced_deviation,
            entropy_bits: entropy,
        });
    }
    Ok(Def1Report {
        holds,
        degenerate: shape.n_alice() == 1,
        dichotomy_defect: decomposition.dichotomy_defect(),
        blocks,
    })
}

/// Entanglement of formation of the even-even restriction,
/// `Σ p_ab S(tr_B σ_ab)` in bits, valid when every occupied block is pure.
pub fn eof_even_even(shape: SystemShape, rho: &DenseOperator, eps: f64) -> Result<f64> {
    if !shape.is_symmetric() {
        return Err(Error::UnsupportedShape(format!(
            "parity blocks need n_alice = n_bob, got {shape}"
        )));
    }
    let decomposition = parity_blocks(shape, rho)?;
    let mut total = 0.0;
    for b in &decomposition.blocks {
        if b.weight <= eps {
            continue;
        }
        let deviation = max_abs_diff(&(&b.state * &b.state), &b.state);
        if deviation > eps {
            return Err(Error::UnsupportedMixture {
                block: b.label.as_str().into(),
                deviation,
            });
        }
        let (da, db) = b.factor_dims;
        total += b.weight * entropy_bits(&trace_out_second(&b.state, da, db));
    }
    Ok(total)
}

/// Restrict a field vector to one party's modes, as a single-party field.
fn restrict(f: &FieldVector, party: Party) -> Result<FieldVector> {
    let shape = f.shape();
    let local = shape.party_shape(party)?;
    let range = shape.range(party);
    FieldVector::new(
        local,
        f.coefficients().rows(range.start, range.len()).into_owned(),
    )
}

/// `|B(f) − (B(Q_A f) ⊗ 1 + Θ_A ⊗ B(Q_B f))|_max`, the left side built on all
/// modes, the right side from single-party operators.
pub fn untwist_deviation(f: &FieldVector) -> Result<f64> {
    let shape = f.shape();
    if shape.n_bob() == 0 {
        return Err(Error::UnsupportedShape(
            "untwisting needs two parties".into(),
        ));
    }
    let full = FockSpace::for_shape(shape)?;
    let a_space = FockSpace::new(shape.n_alice())?;
    let b_space = FockSpace::new(shape.n_bob())?;
    let lhs = full.field_operator(f)?;
    let fa = restrict(f, Party::Alice)?;
    let fb = restrict(f, Party::Bob)?;
    let theta = a_space.parity_operator();
    let rhs = a_space
        .field_operator(&fa)?
        .kronecker(&identity(b_space.dim()))
        + theta.kronecker(&b_space.field_operator(&fb)?);
    Ok(max_abs_diff(&lhs, &rhs))
}

pub fn untwist_check(f: &FieldVector, eps: f64) -> Result<bool> {
    Ok(untwist_deviation(f)? <= eps)
}

fn embed(f: &FieldVector, shape: SystemShape, party: Party) -> Result<FieldVector> {
    let range = shape.range(party);
    let mut v = CVector::zeros(shape.dim());
    v.rows_mut(range.start, range.len())
        .copy_from(f.coefficients());
    FieldVector::new(shape, v)
}

fn product(space: &FockSpace, fields: &[FieldVector]) -> Result<CMatrix> {
    let mut m = identity(space.dim());
    for f in fields {
        m *= space.field_operator(f)?;
    }
    Ok(m)
}

/// For an Alice monomial `A` and a Bob monomial `B` of parity `(−1)^{len}`:
/// `|A B − A ⊗ B|` for even `B`, `|A B − A Θ_A ⊗ B|` for odd `B`, with the
/// products on the left taken in the full Fock space.
pub fn monomial_untwist_deviation(
    shape: SystemShape,
    alice: &[FieldVector],
    bob: &[FieldVector],
) -> Result<f64> {
    let a_shape = shape.party_shape(Party::Alice)?;
    let b_shape = shape.party_shape(Party::Bob)?;
    for f in alice {
        a_shape.check_same(&f.shape())?;
    }
    for f in bob {
        b_shape.check_same(&f.shape())?;
    }
    let full = FockSpace::for_shape(shape)?;
    let a_space = FockSpace::new(shape.n_alice())?;
    let b_space = FockSpace::new(shape.n_bob())?;

    let alice_full: Vec<FieldVector> = alice
        .iter()
        .map(|f| embed(f, shape, Party::Alice))
        .collect::<Result<_>>()?;
    let bob_full: Vec<FieldVector> = bob
        .iter()
        .map(|f| embed(f, shape, Party::Bob))
        .collect::<Result<_>>()?;
    let lhs = product(&full, &alice_full)? * product(&full, &bob_full)?;

    let mut a = product(&a_space, alice)?;
    if bob.len() % 2 == 1 {
        a *= a_space.parity_operator();
    }
    let rhs = a.kronecker(&product(&b_space, bob)?);
    Ok(max_abs_diff(&lhs, &rhs))
}

/// `Θ_A X Θ_A` on the full Fock space of `shape`.
pub fn alice_parity_conjugate(shape: SystemShape, x: &CMatrix) -> Result<CMatrix> {
    let space = FockSpace::for_shape(shape)?;
    let theta = space.leading_parity_operator(shape.n_alice());
    Ok(&theta * x * &theta)
}

/// Dense product `B(f_1) ⋯ B(f_k)` on the full Fock space of the fields' shape.
pub fn field_monomial(fields: &[FieldVector]) -> Result<CMatrix> {
    let Some(first) = fields.first() else {
        return Err(Error::InvalidInput("empty monomial".into()));
    };
    let space = FockSpace::for_shape(first.shape())?;
    product(&space, fields)
}

/// Second-quantized entangler
/// `𝐇 = Σ_j B(e⁻_{Aj})† B(e⁺_{Bj}) + B(e⁺_{Bj})† B(e⁻_{Aj})`.
pub fn second_quantized_entangler(n: usize) -> Result<DenseOperator> {
    let shape = SystemShape::symmetric(n)?;
    let space = FockSpace::for_shape(shape)?;
    let mut h = CMatrix::zeros(space.dim(), space.dim());
    for j in 0..n {
        let a_minus =
            space.field_operator(&FieldVector::basis(shape, shape.index(j, Sign::Minus)))?;
        let b_plus =
            space.field_operator(&FieldVector::basis(shape, shape.index(n + j, Sign::Plus)))?;
        h += a_minus.adjoint() * &b_plus + b_plus.adjoint() * &a_minus;
    }
    Ok(DenseOperator {
        modes: space.modes(),
        matrix: h,
    })
}

/// `|[𝐇, B(f)] − B(H f)|_max` for the entangler.
pub fn heisenberg_deviation(f: &FieldVector) -> Result<f64> {
    let shape = f.shape();
    if !shape.is_symmetric() {
        return Err(Error::UnsupportedShape(format!(
            "the entangler needs n_alice = n_bob, got {shape}"
        )));
    }
    let n = shape.n_alice();
    let space = FockSpace::for_shape(shape)?;
    let big_h = second_quantized_entangler(n)?.matrix;
    let b = space.field_operator(f)?;
    let lhs = &big_h * &b - &b * &big_h;
    let h = crate::dynamics::build_entangler(n)?;
    let hf = FieldVector::new(shape, h.matrix() * f.coefficients())?;
    Ok(max_abs_diff(&lhs, &space.field_operator(&hf)?))
}

/// `exp(−i t 𝐇) ψ` for Hermitian `𝐇`, by eigendecomposition.
pub fn time_evolve(h: &DenseOperator, t: f64, psi: &DenseVector) -> DenseVector {
    let eig = ((&h.matrix + h.matrix.adjoint()).scale(0.5)).symmetric_eigen();
    let phases = CVector::from_fn(eig.eigenvalues.len(), |i, _| {
        Complex64::from_polar(1.0, -t * eig.eigenvalues[i])
    });
    let u = &eig.eigenvectors * CMatrix::from_diagonal(&phases) * eig.eigenvectors.adjoint();
    DenseVector {
        modes: psi.modes,
        amplitudes: u * &psi.amplitudes,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceLemmaReport {
    /// `(p, max |tr(T B(f₁)B(f₂)) − ½⟨Γf₁, f₂⟩|)` for each tested `p`.
    pub two_point: Vec<(f64, f64)>,
    /// `max_{ij} |tr(Θ c_i† c_j)|`.
    pub parity_number: f64,
    /// `|ρ_{½·1} − 2^{−M}·1|_max` for the oracle density of covariance `½·1`.
    pub half_density: f64,
    /// `max |[𝐇, B(f)] − B(Hf)|`.
    pub heisenberg: f64,
    pub holds: bool,
}

/// Trace lemmas on `n + n` modes: even-part traces `T = 2^{−M+1}(p E₊ + (1−p) E₋)`
/// share the two-point function of `½·1`, and the quasifree state of `½·1`
/// is the normalized trace.
pub fn trace_lemma_checks<R: Rng + ?Sized>(
    n: usize,
    samples: usize,
    rng: &mut R,
    eps: f64,
) -> Result<TraceLemmaReport> {
    let shape = SystemShape::symmetric(n)?;
    let space = FockSpace::for_shape(shape)?;
    let modes = space.modes();
    let dim = space.dim();
    let conj = build_conjugation(shape);

    let fields: Vec<(FieldVector, FieldVector)> = (0..samples)
        .map(|_| {
            (
                sample::random_field(shape, rng),
                sample::random_field(shape, rng),
            )
        })
        .collect();

    let mut two_point = Vec::new();
    for p in [0.0, 0.25, 0.5, 1.0] {
        let weights = CVector::from_fn(dim, |s, _| {
            let w = if FockSpace::parity(s) > 0.0 {
                p
            } else {
                1.0 - p
            };
            c(w * 2f64.powi(1 - modes as i32), 0.0)
        });
        let t = DenseOperator {
            modes,
            matrix: CMatrix::from_diagonal(&weights),
        };
        let mut worst: f64 = 0.0;
        for (f1, f2) in &fields {
            let lhs = density_expectation(&t, &[f1.clone(), f2.clone()])?;
            let rhs = conj.bilinear(f1.coefficients(), f2.coefficients()) * 0.5;
            worst = worst.max((lhs - rhs).norm());
        }
        two_point.push((p, worst));
    }

    let theta = space.parity_operator();
    let mut parity_number: f64 = 0.0;
    for i in 0..modes {
        for j in 0..modes {
            let m = &theta * space.ladder_matrix(i, true) * space.ladder_matrix(j, false);
            parity_number = parity_number.max(m.trace().norm());
        }
    }

    let rho = density_from_covariance(&CovarianceMatrix::half_identity(shape), eps)?;
    let half_density = max_abs_diff(&rho.matrix, &identity(dim).unscale(dim as f64));

    let mut heisenberg: f64 = 0.0;
    for (f1, _) in &fields {
        heisenberg = heisenberg.max(heisenberg_deviation(f1)?);
    }

    let holds = two_point.iter().all(|&(_, d)| d <= eps)
        && parity_number <= eps
        && half_density <= eps
        && heisenberg <= eps;
    Ok(TraceLemmaReport {
        two_point,
        parity_number,
        half_density,
        heisenberg,
        holds,
    })
}

/// `σ⁺_site` on a spin chain (no Jordan-Wigner string); `|↓⟩ ↔ 0`, `|↑⟩ ↔ 1`.
pub fn spin_raise(space: &FockSpace, site: usize, v: &CVector) -> CVector {
    let mut out = CVector::zeros(space.dim());
    let b = space.bit(site);
    for (state, &amp) in v.iter().enumerate() {
        if state & b == 0 {
            out[state | b] += amp;
        }
    }
    out
}

/// The spin-chain pair state `Π_ν (1 + σ⁺_{n+1−ν} σ⁺_{n+ν}) |↓ ⋯ ↓⟩`,
/// normalized, read as a Fock vector through the Jordan-Wigner identification.
pub fn chi_spin_state(n: usize) -> Result<DenseVector> {
    let spec = PairBlockSpec::new(n)?;
    let space = FockSpace::new(2 * n)?;
    let mut v = space.vacuum();
    for (a, b) in spec.pairs() {
        let raised = spin_raise(&space, a, &spin_raise(&space, b, &v));
        v += raised;
    }
    Ok(DenseVector {
        modes: 2 * n,
        amplitudes: v,
    }
    .normalized())
}

/// The string-free fermionic form `Π_ν (1 + c†_{n+1−ν} c†_{n+ν}) |0⟩`, normalized.
pub fn chi_fermion_state(n: usize) -> Result<DenseVector> {
    let spec = PairBlockSpec::new(n)?;
    let space = FockSpace::new(2 * n)?;
    let mut v = space.vacuum();
    for (a, b) in spec.pairs() {
        let pair = space.create(a, &space.create(b, &v));
        v += pair;
    }
    Ok(DenseVector {
        modes: 2 * n,
        amplitudes: v,
    }
    .normalized())
}

/// `exp(½ Σ_jk G_jk c_j† c_k†) |0⟩`, unnormalized; the series terminates
/// because the exponent is nilpotent.
pub fn coherent_state(g: &GeneratorMatrix) -> Result<DenseVector> {
    let modes = g.matrix().nrows();
    let space = FockSpace::new(modes)?;
    let gm: &DMatrix<f64> = g.matrix();
    let apply_x = |v: &CVector| -> CVector {
        let mut out = CVector::zeros(space.dim());
        for j in 0..modes {
            for k in 0..modes {
                let w = gm[(j, k)];
                if w == 0.0 {
                    continue;
                }
                out += space.create(j, &space.create(k, v)) * c(0.5 * w, 0.0);
            }
        }
        out
    };
    let mut sum = space.vacuum();
    let mut term = space.vacuum();
    for order in 1..=modes / 2 {
        term = apply_x(&term).unscale(order as f64);
        sum += &term;
    }
    Ok(DenseVector {
        modes,
        amplitudes: sum,
    })
}

/// Largest eigenvalue deviation from a rank-one projector, for reports.
pub fn rank_one_defect(rho: &CMatrix) -> f64 {
    let eigs = hermitian_eigenvalues(rho);
    let top = eigs.last().copied().unwrap_or(0.0);
    (1.0 - top).abs().max(max_abs(&(rho * rho - rho)))
}
