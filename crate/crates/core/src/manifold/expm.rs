//! Matrix exponential by scaling and squaring with a degree-13 Padé approximant
//! (Higham, "The Scaling and Squaring Method for the Matrix Exponential
//! Revisited", 2005).

use crate::{C64, CMatrix};

const PADE_13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// 1-norm threshold below which Padé(13) is accurate to double precision.
const THETA_13: f64 = 5.371920351148152;

fn one_norm(a: &CMatrix) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `exp(A)` for a square complex matrix.
pub fn expm(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm requires a square matrix");
    match n {
        0 => return CMatrix::zeros(0, 0),
        1 => return CMatrix::from_element(1, 1, a[(0, 0)].exp()),
        _ => {}
    }

    let norm = one_norm(a);
    let squarings = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scaled = a * real(0.5f64.powi(squarings));

    let b = &PADE_13;
    let eye = CMatrix::identity(n, n);
    let a2 = &scaled * &scaled;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let u_inner = &a6 * real(b[13]) + &a4 * real(b[11]) + &a2 * real(b[9]);
    let u_outer = &a6 * u_inner + &a6 * real(b[7]) + &a4 * real(b[5]) + &a2 * real(b[3]) + &eye * real(b[1]);
    let u = &scaled * u_outer;

    let v_inner = &a6 * real(b[12]) + &a4 * real(b[10]) + &a2 * real(b[8]);
    let v = &a6 * v_inner + &a6 * real(b[6]) + &a4 * real(b[4]) + &a2 * real(b[2]) + &eye * real(b[0]);

    let numerator = &v + &u;
    let denominator = v - u;
    let mut result = denominator
        .lu()
        .solve(&numerator)
        .expect("Padé denominator is nonsingular for scaled arguments");
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Closed-form exponential of a skew-Hermitian matrix of order 1 or 2.
///
/// Writes `S = iH` with `H` Hermitian; `H − c I` squares to `r² I`, so
/// `exp(S) = e^{ic} (cos r · I + i sin r / r · (H − cI))`.
pub fn expm_skew_small(s: &CMatrix) -> CMatrix {
    match s.nrows() {
        1 => CMatrix::from_element(1, 1, s[(0, 0)].exp()),
        2 => {
            let i = C64::new(0.0, 1.0);
            let h = s.map(|z| -i * z);
            let c = 0.5 * (h[(0, 0)].re + h[(1, 1)].re);
            let d = 0.5 * (h[(0, 0)].re - h[(1, 1)].re);
            let off = 0.5 * (h[(0, 1)] + h[(1, 0)].conj());
            let r = (d * d + off.norm_sqr()).sqrt();
            let sinc = if r < 1e-8 { 1.0 - r * r / 6.0 } else { r.sin() / r };
            let traceless = CMatrix::from_row_slice(2, 2, &[real(d), off, off.conj(), real(-d)]);
            let out = CMatrix::identity(2, 2) * real(r.cos()) + traceless * (i * sinc);
            out * C64::from_polar(1.0, c)
        }
        _ => expm(s),
    }
}
