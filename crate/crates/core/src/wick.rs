//! Correlation functions of quasifree states.
//!
//! Every `2k`-point function `tr(ρ_S B(f_1)⋯B(f_2k))` is a signed sum over
//! the perfect matchings of `{1, …, 2k}` of products of two-point functions
//! `⟨Γf_i, S f_j⟩` with `i < j`. Odd products vanish.

use num_complex::Complex64;

use crate::selfdual::{build_conjugation, CovarianceMatrix, SystemShape};
use crate::{CVector, Error, Result};

/// Largest number of fields expanded by default (10395 pairings).
pub const DEFAULT_FIELD_CAP: usize = 12;

/// Coefficient vector `f` of a field operator `B(f)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldVector {
    shape: SystemShape,
    coefficients: CVector,
}

impl FieldVector {
    pub fn new(shape: SystemShape, coefficients: CVector) -> Result<Self> {
        if coefficients.len() != shape.dim() {
            return Err(Error::ShapeMismatch {
                expected: format!("field of length {}", shape.dim()),
                found: format!("length {}", coefficients.len()),
            });
        }
        Ok(Self {
            shape,
            coefficients,
        })
    }

    /// Canonical basis vector `e_i`.
    pub fn basis(shape: SystemShape, index: usize) -> Self {
        let mut v = CVector::zeros(shape.dim());
        v[index] = Complex64::new(1.0, 0.0);
        Self {
            shape,
            coefficients: v,
        }
    }

    pub fn shape(&self) -> SystemShape {
        self.shape
    }

    pub fn coefficients(&self) -> &CVector {
        &self.coefficients
    }

    /// `Γf`, the field vector of `B(f)†`.
    pub fn conjugated(&self) -> FieldVector {
        Self {
            shape: self.shape,
            coefficients: build_conjugation(self.shape).apply(&self.coefficients),
        }
    }

    pub fn scaled(&self, z: Complex64) -> FieldVector {
        Self {
            shape: self.shape,
            coefficients: self.coefficients.map(|x| x * z),
        }
    }

    pub fn plus(&self, other: &FieldVector) -> Result<FieldVector> {
        self.shape.check_same(&other.shape)?;
        Ok(Self {
            shape: self.shape,
            coefficients: &self.coefficients + &other.coefficients,
        })
    }
}

/// `tr(ρ_S B(f) B(g)) = ⟨Γf, S g⟩`.
pub fn two_point(s: &CovarianceMatrix, f: &FieldVector, g: &FieldVector) -> Result<Complex64> {
    s.shape().check_same(&f.shape)?;
    s.shape().check_same(&g.shape)?;
    let sg = s.matrix() * &g.coefficients;
    Ok(build_conjugation(s.shape()).bilinear(&f.coefficients, &sg))
}

/// A perfect matching of `{0, …, 2k−1}` written as the permutation
/// `(q(0), q(1), …, q(2k−1))` with pairs `(q(2i), q(2i+1))`, first entries
/// increasing from pair to pair and each pair increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pairing {
    order: Vec<usize>,
    sign: i8,
}

impl Pairing {
    /// Zero-based permutation entries.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Sign of the permutation, `±1`.
    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.order.chunks_exact(2).map(|p| (p[0], p[1]))
    }
}

/// Parity of a permutation from its cycle decomposition: a cycle of length
/// `ℓ` is `ℓ − 1` transpositions.
fn permutation_sign(order: &[usize]) -> i8 {
    let mut seen = vec![false; order.len()];
    let mut transpositions = 0;
    for start in 0..order.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut j = start;
        while !seen[j] {
            seen[j] = true;
            j = order[j];
            len += 1;
        }
        transpositions += len - 1;
    }
    if transpositions % 2 == 0 {
        1
    } else {
        -1
    }
}

fn extend_pairings(remaining: &mut Vec<usize>, prefix: &mut Vec<usize>, out: &mut Vec<Pairing>) {
    if remaining.is_empty() {
        out.push(Pairing {
            sign: permutation_sign(prefix),
            order: prefix.clone(),
        });
        return;
    }
    let first = remaining.remove(0);
    for pos in 0..remaining.len() {
        let second = remaining.remove(pos);
        prefix.push(first);
        prefix.push(second);
        extend_pairings(remaining, prefix, out);
        prefix.truncate(prefix.len() - 2);
        remaining.insert(pos, second);
    }
    remaining.insert(0, first);
}

/// All `(2k−1)!!` pairings of `2k` points with their signs, in a fixed
/// deterministic order.
pub fn enumerate_pairings_capped(k: usize, field_cap: usize) -> Result<Vec<Pairing>> {
    if 2 * k > field_cap {
        return Err(Error::SizeCap {
            requested: 2 * k,
            cap: field_cap,
        });
    }
    let mut out = Vec::new();
    let mut remaining: Vec<usize> = (0..2 * k).collect();
    extend_pairings(&mut remaining, &mut Vec::with_capacity(2 * k), &mut out);
    Ok(out)
}

pub fn enumerate_pairings(k: usize) -> Result<Vec<Pairing>> {
    enumerate_pairings_capped(k, DEFAULT_FIELD_CAP)
}

/// `tr(ρ_S B(f_1) ⋯ B(f_n))` by the pairing expansion.
pub fn wick_expectation(s: &CovarianceMatrix, fields: &[FieldVector]) -> Result<Complex64> {
    wick_expectation_capped(s, fields, DEFAULT_FIELD_CAP)
}

pub fn wick_expectation_capped(
    s: &CovarianceMatrix,
    fields: &[FieldVector],
    field_cap: usize,
) -> Result<Complex64> {
    for f in fields {
        s.shape().check_same(&f.shape)?;
    }
    if fields.len() > field_cap {
        return Err(Error::SizeCap {
            requested: fields.len(),
            cap: field_cap,
        });
    }
    if fields.len() % 2 == 1 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let n = fields.len();
    let mut kernel = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in i + 1..n {
            kernel[i * n + j] = two_point(s, &fields[i], &fields[j])?;
        }
    }
    let pairings = enumerate_pairings_capped(n / 2, field_cap)?;
    let total = pairings
        .iter()
        .map(|q| {
            let product: Complex64 = q.pairs().map(|(a, b)| kernel[a * n + b]).product();
            product * f64::from(q.sign)
        })
        .sum();
    Ok(total)
}

/// Whether the tracial state `½·1` gives the same value for `fields` and for
/// the cyclic shift `(f_n, f_1, …, f_{n−1})`.
pub fn cyclic_trace_check(fields: &[FieldVector], eps: f64) -> Result<bool> {
    let Some(first) = fields.first() else {
        return Ok(true);
    };
    if fields.len() % 2 == 1 {
        return Err(Error::InvalidInput(
            "cyclic trace check needs an even number of fields".into(),
        ));
    }
    let half = CovarianceMatrix::half_identity(first.shape);
    let lhs = wick_expectation(&half, fields)?;
    let mut shifted = Vec::with_capacity(fields.len());
    shifted.push(fields[fields.len() - 1].clone());
    shifted.extend_from_slice(&fields[..fields.len() - 1]);
    let rhs = wick_expectation(&half, &shifted)?;
    Ok((lhs - rhs).norm() <= eps * (1.0 + lhs.norm()))
}
