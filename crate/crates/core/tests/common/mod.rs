#![allow(dead_code)]

pub mod props;

use fermigauss::linalg::max_abs_diff;
use fermigauss::CMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `exp(−i t H)` through the general-purpose matrix exponential.
pub fn expm_minus_i(h: &CMatrix, t: f64) -> CMatrix {
    h.map(|z| z * fermigauss::Complex64::new(0.0, -t)).exp()
}

pub fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> Result<(), String> {
    let d = max_abs_diff(a, b);
    if d <= tol {
        Ok(())
    } else {
        Err(format!("max deviation {d:e} exceeds {tol:e}"))
    }
}
