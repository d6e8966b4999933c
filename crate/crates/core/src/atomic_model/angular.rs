//! Angular-momentum coupling coefficients.
//!
//! All angular momenta are passed as *twice* their value so half-integers
//! stay exact (`tj = 3` means j = 3/2).

#[allow(unused_imports)] // inherent float methods shadow these when std is linked
use num_traits::Float;

fn factorial(n: i32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

fn triangle(ta: i32, tb: i32, tc: i32) -> bool {
    tc >= (ta - tb).abs() && tc <= ta + tb && (ta + tb + tc) % 2 == 0
}

/// Wigner 3j symbol (j1 j2 j3; m1 m2 m3) from the Racah formula.
pub fn wigner_3j(tj1: i32, tj2: i32, tj3: i32, tm1: i32, tm2: i32, tm3: i32) -> f64 {
    if tm1 + tm2 + tm3 != 0 || !triangle(tj1, tj2, tj3) {
        return 0.0;
    }
    if tm1.abs() > tj1 || tm2.abs() > tj2 || tm3.abs() > tj3 {
        return 0.0;
    }
    if (tj1 + tm1) % 2 != 0 || (tj2 + tm2) % 2 != 0 || (tj3 + tm3) % 2 != 0 {
        return 0.0;
    }
    // Integer arguments of the Racah sum, in units of one (not two).
    let a = (tj1 + tj2 - tj3) / 2;
    let b = (tj1 - tm1) / 2;
    let c = (tj2 + tm2) / 2;
    let d = (tj3 - tj2 + tm1) / 2;
    let e = (tj3 - tj1 - tm2) / 2;
    let kmin = 0.max(-d).max(-e);
    let kmax = a.min(b).min(c);
    let mut sum = 0.0;
    for k in kmin..=kmax {
        let term =
            factorial(k) * factorial(a - k) * factorial(b - k) * factorial(c - k) * factorial(d + k) * factorial(e + k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign / term;
    }
    let delta = factorial((tj1 + tj2 - tj3) / 2) * factorial((tj1 - tj2 + tj3) / 2) * factorial((-tj1 + tj2 + tj3) / 2)
        / factorial((tj1 + tj2 + tj3) / 2 + 1);
    let norm = factorial((tj1 + tm1) / 2)
        * factorial((tj1 - tm1) / 2)
        * factorial((tj2 + tm2) / 2)
        * factorial((tj2 - tm2) / 2)
        * factorial((tj3 + tm3) / 2)
        * factorial((tj3 - tm3) / 2);
    let phase_exp = (tj1 - tj2 - tm3) / 2;
    let phase = if phase_exp.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    phase * (delta * norm).sqrt() * sum
}

/// Clebsch–Gordan coefficient ⟨j1 m1; j2 m2 | J M⟩.
pub fn clebsch_gordan(tj1: i32, tm1: i32, tj2: i32, tm2: i32, tj: i32, tm: i32) -> f64 {
    let phase_exp = (tj1 - tj2 + tm) / 2;
    let phase = if phase_exp.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    phase * ((tj + 1) as f64).sqrt() * wigner_3j(tj1, tj2, tj, tm1, tm2, -tm)
}
