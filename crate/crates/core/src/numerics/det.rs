use nalgebra::{ComplexField, DMatrix};

/// Determinant by Gaussian elimination with partial pivoting.
///
/// Works for real and complex entries. A singular matrix gives exactly zero.
pub fn determinant<T>(m: &DMatrix<T>) -> T
where
    T: ComplexField<RealField = f64> + Copy,
{
    assert!(m.is_square(), "determinant of a non-square matrix");
    let n = m.nrows();
    let mut a = m.clone();
    let mut det = T::one();
    for col in 0..n {
        let mut pivot = col;
        let mut best = a[(col, col)].modulus();
        for row in col + 1..n {
            let v = a[(row, col)].modulus();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if best == 0.0 {
            return T::zero();
        }
        if pivot != col {
            a.swap_rows(pivot, col);
            det = -det;
        }
        let p = a[(col, col)];
        det *= p;
        for row in col + 1..n {
            let factor = a[(row, col)] / p;
            if factor == T::zero() {
                continue;
            }
            for k in col + 1..n {
                let upd = a[(col, k)] * factor;
                a[(row, k)] -= upd;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn identity_and_repeated_rows() {
        assert_eq!(determinant(&DMatrix::<f64>::identity(5, 5)), 1.0);
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 1.0, 2.0, 3.0, 4.0, 5.0, 7.0]);
        assert_eq!(determinant(&m), 0.0);
        assert_eq!(determinant(&DMatrix::<f64>::zeros(0, 0)), 1.0);
    }

    #[test]
    fn pivot_sign() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(determinant(&m), -1.0);
    }

    #[test]
    fn complex_two_by_two() {
        let i = Complex64::i();
        let m = DMatrix::from_row_slice(2, 2, &[1.0 + i, 2.0 * i, Complex64::from(3.0), 1.0 - i]);
        let expected = (1.0 + i) * (1.0 - i) - 2.0 * i * 3.0;
        assert!((determinant(&m) - expected).norm() < 1e-14);
    }
}
