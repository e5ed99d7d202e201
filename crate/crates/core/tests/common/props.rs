//! Seed-driven invariant checks shared by the property suite and the
//! acceptance runner. Each check draws everything it needs from one seed.

use fermigauss::cert::{certify, from_unitary, normal_form, standard_state, AnticommutingUnitary};
use fermigauss::dynamics::{build_entangler, evolve};
use fermigauss::fock::{self, FockSpace};
use fermigauss::jordan_wigner::coherent_covariance;
use fermigauss::linalg::{c, hermitian_eigenvalues, identity, max_abs_diff, I};
use fermigauss::sample;
use fermigauss::selfdual::{build_conjugation, product_state, Party, Sign, SystemShape};
use fermigauss::wick::{
    cyclic_trace_check, enumerate_pairings, two_point, wick_expectation, FieldVector,
};
use fermigauss::{CVector, Complex64};
use rand::Rng;

use super::{close, expm_minus_i, rng};

pub type Check = fn(u64) -> Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_shape<R: Rng>(rng: &mut R, max: usize) -> SystemShape {
    SystemShape::new(rng.gen_range(1..=max), rng.gen_range(1..=max)).unwrap()
}

fn spectrum_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn complex_close(a: Complex64, b: Complex64, tol: f64, what: &str) -> Result<(), String> {
    let scale = 1.0 + a.norm().max(b.norm());
    ensure((a - b).norm() <= tol * scale, || {
        format!("{what}: {a} vs {b}")
    })
}

// ---- covariance matrices and Bogolubov transformations

pub fn spectrum_is_symmetric(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let shape = random_shape(&mut rng, 3);
    let s = sample::random_covariance(shape, rng.gen_range(1..=3), &mut rng);
    let eigs = hermitian_eigenvalues(s.matrix());
    let complement = hermitian_eigenvalues(&(identity(shape.dim()) - s.matrix()));
    let gap = spectrum_gap(&eigs, &complement);
    ensure(gap < 1e-9, || {
        format!("spectra of S and 1 − S differ by {gap:e}")
    })
}

pub fn projection_trace_is_half_dim(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let shape = random_shape(&mut rng, 3);
    let p = sample::random_basis_projection(shape, &mut rng);
    let tr = p.matrix().trace();
    complex_close(tr, c(shape.dim() as f64 / 2.0, 0.0), 1e-9, "trace")
}

pub fn bogolubov_preserves_state_data(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let shape = random_shape(&mut rng, 3);
    let s = if rng.gen_bool(0.5) {
        sample::random_basis_projection(shape, &mut rng).into_covariance()
    } else {
        sample::random_covariance(shape, 2, &mut rng)
    };
    let v = sample::random_bogolubov(shape, &mut rng);
    let t = v.apply(&s).map_err(|e| e.to_string())?;
    ensure(t.validate(1e-9).valid, || {
        format!("VSV† invalid: {}", t.validate(1e-9))
    })?;
    // Unitarily invariant (Frobenius) norm; the max-entry norm is not.
    let purity = |m: &fermigauss::CMatrix| (m * m - m).norm();
    let (before, after) = (purity(s.matrix()), purity(t.matrix()));
    ensure((before - after).abs() < 1e-9, || {
        format!("purity {before:e} -> {after:e}")
    })?;
    let gap = spectrum_gap(
        &hermitian_eigenvalues(s.matrix()),
        &hermitian_eigenvalues(t.matrix()),
    );
    ensure(gap < 1e-9, || format!("spectrum moved by {gap:e}"))
}

pub fn local_transform_reduces_blockwise(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let shape = random_shape(&mut rng, 3);
    let s = sample::random_covariance(shape, 2, &mut rng);
    let v = sample::random_local_transform(shape, &mut rng);
    let (v_a, _) = v.local_blocks().ok_or("transform not local")?;
    let reduced = v.apply(&s).unwrap().reduce(Party::Alice).unwrap();
    let expected = &v_a * s.reduce(Party::Alice).unwrap().matrix() * v_a.adjoint();
    close(reduced.matrix(), &expected, 1e-9)?;
    let r = s.reduce(Party::Bob).unwrap();
    ensure(r.validate(1e-9).valid, || {
        format!("reduced state invalid: {}", r.validate(1e-9))
    })
}

pub fn conjugation_is_isometric_involution(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let shape = random_shape(&mut rng, 3);
    let conj = build_conjugation(shape);
    let f = sample::gaussian_vector(shape.dim(), &mut rng);
    let g = sample::gaussian_vector(shape.dim(), &mut rng);
    let gf = conj.apply(&f);
    ensure((gf.norm() - f.norm()).abs() < 1e-12, || {
        "norm not preserved".into()
    })?;
    ensure((conj.apply(&gf) - &f).norm() < 1e-15, || "Γ² ≠ 1".into())?;
    complex_close(
        conj.bilinear(&f, &g),
        conj.bilinear(&g, &f),
        1e-12,
        "bilinear symmetry",
    )
}

// ---- correlation functions

pub fn wick_swap_follows_car(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let shape = random_shape(&mut rng, 2);
    let s = sample::random_covariance(shape, 2, &mut rng);
    let len = if rng.gen_bool(0.5) { 4 } else { 6 };
    let fields = sample::random_fields(shape, len, &mut rng);
    let i = rng.gen_range(0..len - 1);
    let original = wick_expectation(&s, &fields).unwrap();
    let mut swapped = fields.clone();
    swapped.swap(i, i + 1);
    let mut removed = fields.clone();
    removed.drain(i..i + 2);
    let anticommutator =
        build_conjugation(shape).bilinear(fields[i].coefficients(), fields[i + 1].coefficients());
    let expected = -original + anticommutator * wick_expectation(&s, &removed).unwrap();
    complex_close(
        wick_expectation(&s, &swapped).unwrap(),
        expected,
        1e-10,
        "swap",
    )
}

pub fn pairing_count_is_double_factorial(seed: u64) -> Result<(), String> {
    let k = (seed % 6) as usize + 1;
    let expected: usize = (1..2 * k).step_by(2).product();
    let got = enumerate_pairings(k).unwrap().len();
    ensure(got == expected, || {
        format!("k = {k}: {got} pairings, expected {expected}")
    })
}

pub fn wick_is_multilinear(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let shape = random_shape(&mut rng, 2);
    let s = sample::random_covariance(shape, 2, &mut rng);
    let len = 2 * rng.gen_range(1..=3);
    let fields = sample::random_fields(shape, len, &mut rng);
    let other = sample::random_field(shape, &mut rng);
    let (a, b) = (
        sample::gaussian_vector(1, &mut rng)[0],
        sample::gaussian_vector(1, &mut rng)[0],
    );
    let pos = rng.gen_range(0..len);
    let mut mixed = fields.clone();
    mixed[pos] = fields[pos].scaled(a).plus(&other.scaled(b)).unwrap();
    let mut replaced = fields.clone();
    replaced[pos] = other;
    let lhs = wick_expectation(&s, &mixed).unwrap();
    let rhs =
        a * wick_expectation(&s, &fields).unwrap() + b * wick_expectation(&s, &replaced).unwrap();
    complex_close(lhs, rhs, 1e-10, "linearity")
}

pub fn kernel_fields_annihilate(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let shape = random_shape(&mut rng, 3);
    let v = sample::random_bogolubov(shape, &mut rng);
    let p = v.apply_projection(&product_state(shape)).unwrap();
    // ker E is spanned by the − vectors, so V maps them onto ker P.
    let mut k = CVector::zeros(shape.dim());
    for mode in 0..shape.modes() {
        k[shape.index(mode, Sign::Minus)] = sample::gaussian_vector(1, &mut rng)[0];
    }
    let f = FieldVector::new(shape, v.matrix() * k).unwrap();
    let z = wick_expectation(&p, &[f.conjugated(), f.clone()]).unwrap();
    ensure(
        z.norm() < 1e-10 * (1.0 + f.coefficients().norm_squared()),
        || format!("⟨B(f)†B(f)⟩ = {z}"),
    )
}

pub fn half_identity_is_cyclic(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let shape = random_shape(&mut rng, 2);
    let len = if rng.gen_bool(0.5) { 4 } else { 6 };
    let fields = sample::random_fields(shape, len, &mut rng);
    let f = &fields[0];
    let g = &fields[1];
    let half = fermigauss::selfdual::CovarianceMatrix::half_identity(shape);
    complex_close(
        two_point(&half, f, g).unwrap(),
        build_conjugation(shape).bilinear(f.coefficients(), g.coefficients()) * 0.5,
        1e-12,
        "tracial two-point",
    )?;
    ensure(cyclic_trace_check(&fields, 1e-10).unwrap(), || {
        "cyclic shift changed the trace".into()
    })
}

// ---- certification

pub fn verdict_is_locally_invariant(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let n = rng.gen_range(1..=3);
    let shape = SystemShape::symmetric(n).unwrap();
    let p = if rng.gen_bool(0.5) {
        sample::random_certified_state(n, &mut rng)
    } else {
        sample::random_basis_projection(shape, &mut rng)
    };
    let eps = 1e-9;
    let v = sample::random_local_transform(shape, &mut rng);
    let moved = v.apply(&p).unwrap();
    let before = certify(&p, eps).unwrap().verdict;
    let after = certify(&moved, 10.0 * eps).unwrap().verdict;
    ensure(before == after, || format!("{before:?} became {after:?}"))
}

pub fn witness_round_trip(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let n = rng.gen_range(1..=3);
    let v_a = sample::random_gamma_unitary(SystemShape::single(n).unwrap(), &mut rng);
    let u = AnticommutingUnitary::new(v_a.map(|z| z * I), 1e-10).map_err(|e| e.to_string())?;
    let cert = certify(&from_unitary(&u), 1e-9).unwrap();
    let witness = cert.witness.ok_or("from_unitary state not certified")?;
    close(witness.matrix(), u.matrix(), 1e-9)
}

pub fn certified_reductions_are_tracial(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let n = rng.gen_range(1..=3);
    let p = sample::random_certified_state(n, &mut rng);
    let half = identity(2 * n).scale(0.5);
    close(p.reduce(Party::Alice).unwrap().matrix(), &half, 1e-9)?;
    close(p.reduce(Party::Bob).unwrap().matrix(), &half, 1e-9)
}

pub fn normal_form_round_trip(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let n = rng.gen_range(1..=3);
    let eps = 1e-9;
    let p = sample::random_certified_state(n, &mut rng);
    let w = normal_form(&p, eps).map_err(|e| e.to_string())?;
    let back = w.apply(&standard_state(n).unwrap()).unwrap();
    close(back.matrix(), p.matrix(), 10.0 * eps)
}

// ---- entangling dynamics

pub fn evolution_diagonal_blocks(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let n = rng.gen_range(1..=3);
    let t = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
    let e = product_state(SystemShape::symmetric(n).unwrap());
    let et = evolve(&e, t, 1e-12).unwrap();
    let purity = et.is_basis_projection(1e-9);
    ensure(purity.is_projection, || {
        format!("E_t not idempotent: {:e}", purity.deviation)
    })?;
    let cert = certify(&et, 1e-9).unwrap();
    let expected = (t.cos().powi(2) - 0.5).abs();
    ensure((cert.deviations.diag_a - expected).abs() < 1e-12, || {
        format!(
            "diag_A {} vs |cos²t − ½| = {expected}",
            cert.deviations.diag_a
        )
    })
}

pub fn closed_form_matches_conjugation(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let n = rng.gen_range(1..=4);
    let t = rng.gen_range(-10.0..10.0);
    let h = build_entangler(n).unwrap();
    let e = product_state(h.shape());
    let u = expm_minus_i(h.matrix(), t);
    let direct = &u * e.matrix() * u.adjoint();
    close(evolve(&e, t, 1e-12).unwrap().matrix(), &direct, 1e-10)?;
    close(
        h.evolution_unitary(t).matrix(),
        &expm_minus_i(h.matrix(), -t),
        1e-10,
    )
}

pub fn evolution_group_law(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let h = build_entangler(rng.gen_range(1..=3)).unwrap();
    let (t, s) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
    let product = h
        .evolution_unitary(t)
        .compose(&h.evolution_unitary(s))
        .unwrap();
    close(product.matrix(), h.evolution_unitary(t + s).matrix(), 1e-12)
}

pub fn heisenberg_equation(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let shape = SystemShape::symmetric(rng.gen_range(1..=3)).unwrap();
    let f = sample::random_field(shape, &mut rng);
    let d = fock::heisenberg_deviation(&f).unwrap();
    ensure(d < 1e-12, || format!("[𝐇, B(f)] − B(Hf) = {d:e}"))
}

// ---- coherent states

pub fn coherent_covariance_is_pure(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let g = sample::random_generator(rng.gen_range(1..=4), rng.gen_range(0.1..2.0), &mut rng);
    let p = coherent_covariance(&g).unwrap();
    let report = p.validate(1e-9);
    ensure(report.valid, || format!("invalid: {report}"))?;
    let purity = p.is_basis_projection(1e-9);
    ensure(purity.is_projection, || {
        format!("not idempotent: {:e}", purity.deviation)
    })
}

pub fn coherent_covariance_matches_oracle(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let n = rng.gen_range(1..=4);
    let g = sample::random_generator(n, rng.gen_range(0.1..1.5), &mut rng);
    let psi = fock::coherent_state(&g).unwrap();
    let norm = psi.norm();
    ensure(norm.is_finite() && norm >= 1.0, || {
        format!("coherent norm {norm}")
    })?;
    let oracle = fock::covariance_from_vector(SystemShape::symmetric(n).unwrap(), &psi).unwrap();
    close(
        coherent_covariance(&g).unwrap().matrix(),
        oracle.matrix(),
        1e-9,
    )
}

// ---- dense Fock oracle

pub fn car_relations_are_exact(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let shape = random_shape(&mut rng, 2);
    let space = FockSpace::for_shape(shape).unwrap();
    let f = sample::random_field(shape, &mut rng);
    let g = sample::random_field(shape, &mut rng);
    let bf = space.field_operator(&f).unwrap();
    let bg = space.field_operator(&g).unwrap();
    let anti = &bf * &bg + &bg * &bf;
    let expected = identity(space.dim())
        * build_conjugation(shape).bilinear(f.coefficients(), g.coefficients());
    close(&anti, &expected, 1e-12)?;
    close(
        &bf.adjoint(),
        &space.field_operator(&f.conjugated()).unwrap(),
        0.0,
    )
}

pub fn vacuum_round_trip(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let shape = random_shape(&mut rng, 3);
    let p = sample::random_basis_projection(shape, &mut rng);
    let omega = fock::vacuum_of_projection(&p, 1e-9).map_err(|e| e.to_string())?;
    let back = fock::covariance_from_density(shape, &omega.projector()).unwrap();
    close(back.matrix(), p.matrix(), 1e-9)
}

pub fn quasifree_states_are_even(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let shape = random_shape(&mut rng, 2);
    let space = FockSpace::for_shape(shape).unwrap();
    let p = sample::random_basis_projection(shape, &mut rng);
    let omega = fock::vacuum_of_projection(&p, 1e-9).unwrap();
    let theta_omega = space.parity_operator() * &omega.amplitudes;
    let even = (&theta_omega - &omega.amplitudes).norm();
    let odd = (&theta_omega + &omega.amplitudes).norm();
    ensure(even.min(odd) < 1e-10, || {
        format!("Ω not a parity eigenvector ({even:e}, {odd:e})")
    })?;
    let f = sample::random_field(shape, &mut rng);
    let z = fock::density_expectation(&omega.projector(), &[f]).unwrap();
    ensure(z.norm() < 1e-12, || format!("odd expectation {z}"))
}

pub fn even_part_is_fixpoint_algebra(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let shape = SystemShape::symmetric(2).unwrap();
    let alice = shape.party_shape(Party::Alice).unwrap();
    let len = rng.gen_range(1..=4);
    let fields: Vec<FieldVector> = (0..len)
        .map(|_| {
            let local = sample::random_field(alice, &mut rng);
            let mut v = CVector::zeros(shape.dim());
            v.rows_mut(0, alice.dim()).copy_from(local.coefficients());
            FieldVector::new(shape, v).unwrap()
        })
        .collect();
    let a = fock::field_monomial(&fields).unwrap();
    let theta = FockSpace::for_shape(shape)
        .unwrap()
        .leading_parity_operator(2);
    let fixed = max_abs_diff(&fock::alice_parity_conjugate(shape, &a).unwrap(), &a);
    let commutes = max_abs_diff(&(&theta * &a), &(&a * &theta));
    let scale = fermigauss::linalg::max_abs(&a);
    ensure(scale > 1e-9, || "monomial vanished".into())?;
    let (fixed, commutes) = (fixed < 1e-12 * scale, commutes < 1e-12 * scale);
    ensure(fixed == commutes && fixed == (len % 2 == 0), || {
        format!("length {len}: fixpoint {fixed}, commutes {commutes}")
    })
}

pub fn wick_matches_dense_trace(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let shape = SystemShape::symmetric(rng.gen_range(1..=2)).unwrap();
    let s = sample::random_covariance(shape, 2, &mut rng);
    let rho = fock::density_from_covariance(&s, 1e-9).map_err(|e| e.to_string())?;
    let len = rng.gen_range(1..=6);
    let fields = sample::random_fields(shape, len, &mut rng);
    complex_close(
        wick_expectation(&s, &fields).unwrap(),
        fock::density_expectation(&rho, &fields).unwrap(),
        1e-8,
        "Wick vs dense trace",
    )
}

pub fn parity_weights_sum_to_one(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let shape = SystemShape::symmetric(2).unwrap();
    let s = sample::random_covariance(shape, 3, &mut rng);
    let rho = fock::density_from_covariance(&s, 1e-9).unwrap();
    let blocks = fock::parity_blocks(shape, &rho).unwrap();
    let total: f64 = blocks.blocks.iter().map(|b| b.weight).sum();
    ensure((total - 1.0).abs() < 1e-10, || format!("Σ p_ab = {total}"))
}

pub fn untwisting_is_exact(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let shape = random_shape(&mut rng, 2);
    let f = sample::random_field(shape, &mut rng);
    let d = fock::untwist_deviation(&f).unwrap();
    ensure(d < 1e-12, || format!("field untwisting off by {d:e}"))?;
    let a_shape = shape.party_shape(Party::Alice).unwrap();
    let b_shape = shape.party_shape(Party::Bob).unwrap();
    let alice = sample::random_fields(a_shape, rng.gen_range(1..=3), &mut rng);
    let bob = sample::random_fields(b_shape, rng.gen_range(1..=3), &mut rng);
    let d = fock::monomial_untwist_deviation(shape, &alice, &bob).unwrap();
    ensure(d < 1e-12, || format!("monomial untwisting off by {d:e}"))
}

/// Every check, by name.
pub const ALL: &[(&str, Check)] = &[
    ("spectrum_is_symmetric", spectrum_is_symmetric),
    ("projection_trace_is_half_dim", projection_trace_is_half_dim),
    (
        "bogolubov_preserves_state_data",
        bogolubov_preserves_state_data,
    ),
    (
        "local_transform_reduces_blockwise",
        local_transform_reduces_blockwise,
    ),
    (
        "conjugation_is_isometric_involution",
        conjugation_is_isometric_involution,
    ),
    ("wick_swap_follows_car", wick_swap_follows_car),
    (
        "pairing_count_is_double_factorial",
        pairing_count_is_double_factorial,
    ),
    ("wick_is_multilinear", wick_is_multilinear),
    ("kernel_fields_annihilate", kernel_fields_annihilate),
    ("half_identity_is_cyclic", half_identity_is_cyclic),
    ("verdict_is_locally_invariant", verdict_is_locally_invariant),
    ("witness_round_trip", witness_round_trip),
    (
        "certified_reductions_are_tracial",
        certified_reductions_are_tracial,
    ),
    ("normal_form_round_trip", normal_form_round_trip),
    ("evolution_diagonal_blocks", evolution_diagonal_blocks),
    (
        "closed_form_matches_conjugation",
        closed_form_matches_conjugation,
    ),
    ("evolution_group_law", evolution_group_law),
    ("heisenberg_equation", heisenberg_equation),
    ("coherent_covariance_is_pure", coherent_covariance_is_pure),
    (
        "coherent_covariance_matches_oracle",
        coherent_covariance_matches_oracle,
    ),
    ("car_relations_are_exact", car_relations_are_exact),
    ("vacuum_round_trip", vacuum_round_trip),
    ("quasifree_states_are_even", quasifree_states_are_even),
    (
        "even_part_is_fixpoint_algebra",
        even_part_is_fixpoint_algebra,
    ),
    ("wick_matches_dense_trace", wick_matches_dense_trace),
    ("parity_weights_sum_to_one", parity_weights_sum_to_one),
    ("untwisting_is_exact", untwisting_is_exact),
];
