// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Dense matrix exponential by scaling and squaring with a [13/13] Padé
//! approximant (Higham 2005).
//!
//! This is deliberately independent of the circuit compiler so it can serve
//! as a reference for `S(t) = exp(Ω H t)`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Real;

const PADE13: [f64; 14] = [
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

const THETA13: f64 = 5.371920351148152;

fn norm1<T: Real>(a: &DMatrix<T>) -> T {
    (0..a.ncols())
        .map(|c| a.column(c).iter().fold(T::zero(), |s, &x| s + x.abs()))
        .fold(T::zero(), |m, x| m.max(x))
}

/// Computes `exp(a)` for a square real matrix.
pub fn expm<T: Real>(a: &DMatrix<T>) -> Result<DMatrix<T>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::InvalidDimension(format!("expm of a {}x{} matrix", n, a.ncols())));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("non-finite matrix entry".into()));
    }
    if n == 0 {
        return Ok(a.clone());
    }
    let norm = norm1(a).as_f64();
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let scale = T::lit(0.5f64.powi(s));
    let a = a * scale;

    let b: Vec<T> = PADE13.iter().map(|&c| T::lit(c)).collect();
    let id = DMatrix::<T>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9]) + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &id * b[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]) + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &id * b[0];

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .ok_or_else(|| Error::InvalidParameter("singular Padé denominator".into()))?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_and_diagonal() {
        let z = DMatrix::<f64>::zeros(3, 3);
        assert_abs_diff_eq!(expm(&z).unwrap(), DMatrix::identity(3, 3), epsilon = 1e-15);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -2.0, 10.0]));
        let e = expm(&d).unwrap();
        assert_abs_diff_eq!(e[(0, 0)], 1f64.exp(), epsilon = 1e-13);
        assert_abs_diff_eq!(e[(1, 1)], (-2f64).exp(), epsilon = 1e-15);
        assert!((e[(2, 2)] / 10f64.exp() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn rotation_generator() {
        for &t in &[0.1f64, 1.0, 7.5, 40.0] {
            let a = DMatrix::from_row_slice(2, 2, &[0.0, t, -t, 0.0]);
            let e = expm(&a).unwrap();
            let expected = DMatrix::from_row_slice(2, 2, &[t.cos(), t.sin(), -t.sin(), t.cos()]);
            assert_abs_diff_eq!(e, expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn nilpotent() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 3.0, 0.0, 0.0]);
        let e = expm(&a).unwrap();
        assert_abs_diff_eq!(e, DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 0.0, 1.0]), epsilon = 1e-15);
    }

    #[test]
    fn commuting_sum() {
        let a = DMatrix::from_row_slice(2, 2, &[0.3, 1.0, 1.0, 0.3]);
        let e2 = expm(&(&a * 2.0)).unwrap();
        let e = expm(&a).unwrap();
        assert_abs_diff_eq!(e2, &e * &e, epsilon = 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(expm(&DMatrix::<f64>::zeros(2, 3)).is_err());
        assert!(expm(&DMatrix::from_element(2, 2, f64::NAN)).is_err());
    }
}
