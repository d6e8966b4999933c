//! Matrix exponential by scaling and squaring with a degree-13 Padé
//! approximant (Higham 2005). nalgebra's own `exp` needs `std`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
#[allow(unused_imports)] // inherent float methods shadow these when std is linked
use num_traits::Float;

const B: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];
const THETA_13: f64 = 5.371_920_351_148_152;

fn norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter().map(|c| c.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

#[cfg(test)]
fn expm(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (r, squarings) = scaled_pade(a)?;
    let mut r = r;
    for _ in 0..squarings {
        r = &r * &r;
    }
    Ok(r)
}

/// exp(A) for a generator A (non-negative off-diagonals, zero column sums).
///
/// The result is column-stochastic. Plain squaring lets the column sums
/// drift by ~2^s·ε; here every diagonal entry is instead recomputed from the
/// non-negative off-diagonal entries of its column after each squaring, which
/// keeps the sums at one to rounding and avoids cancellation on the diagonal.
pub(crate) fn expm_generator(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (mut r, squarings) = scaled_pade(a)?;
    restore_diagonal(&mut r);
    for _ in 0..squarings {
        r = &r * &r;
        restore_diagonal(&mut r);
    }
    Ok(r)
}

fn restore_diagonal(r: &mut DMatrix<f64>) {
    for j in 0..r.ncols() {
        let off: f64 = (0..r.nrows()).filter(|&i| i != j).map(|i| r[(i, j)]).sum();
        r[(j, j)] = 1.0 - off;
    }
}

fn scaled_pade(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, i32)> {
    let n = a.nrows();
    let norm = norm1(a);
    let squarings = if norm > THETA_13 { (norm / THETA_13).log2().ceil() as i32 } else { 0 };
    let a = a * 2f64.powi(-squarings);
    let id = DMatrix::<f64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * B[13] + &a4 * B[11] + &a2 * B[9]) + &a6 * B[7] + &a4 * B[5] + &a2 * B[3] + &id * B[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * B[12] + &a4 * B[10] + &a2 * B[8]) + &a6 * B[6] + &a4 * B[4] + &a2 * B[2] + &id * B[0];
    let r = (&v - &u).lu().solve(&(&v + &u)).ok_or(Error::NoConvergence("singular Padé denominator"))?;
    Ok((r, squarings))
}
