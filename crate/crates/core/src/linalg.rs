//! Small dense linear-algebra helpers on fixed-size arrays.

use nalgebra::{Complex, DMatrix, DVector, SMatrix};

use crate::error::{Error, Result};

/// Central-difference Jacobian with step `1e-6 * max(1, |x_j|)`.
pub fn jacobian<const N: usize, F>(mut f: F, x: &[f64; N]) -> SMatrix<f64, N, N>
where
    F: FnMut(&[f64; N]) -> [f64; N],
{
    let mut j = SMatrix::<f64, N, N>::zeros();
    for col in 0..N {
        let h = 1e-6 * x[col].abs().max(1.0);
        let mut xp = *x;
        let mut xm = *x;
        xp[col] += h;
        xm[col] -= h;
        let fp = f(&xp);
        let fm = f(&xm);
        for row in 0..N {
            j[(row, col)] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    j
}

/// Eigenvalues of a real square matrix, sorted by decreasing real part.
pub fn eigenvalues<const N: usize>(m: &SMatrix<f64, N, N>) -> Result<[Complex<f64>; N]> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix entry"));
    }
    let ev = DMatrix::from_fn(N, N, |r, c| m[(r, c)]).complex_eigenvalues();
    let mut out = [Complex::new(0.0, 0.0); N];
    for (slot, z) in out.iter_mut().zip(ev.iter()) {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::Numeric("eigenvalue solver returned non-finite values"));
        }
        *slot = *z;
    }
    out.sort_by(|a: &Complex<f64>, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    Ok(out)
}

/// Solve `a x = b` by LU with partial pivoting.
pub fn solve<const N: usize>(a: SMatrix<f64, N, N>, b: &[f64; N]) -> Result<[f64; N]> {
    let rhs = DVector::from_column_slice(b);
    let x = DMatrix::from_fn(N, N, |r, c| a[(r, c)]).lu().solve(&rhs).ok_or(Error::Numeric("singular Jacobian"))?;
    let mut out = [0.0; N];
    out.copy_from_slice(x.as_slice());
    Ok(out)
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_field_spectrum_is_its_diagonal() {
        let d = [-3.0, 0.5, -1.0, 2.0];
        let j = jacobian(|x: &[f64; 4]| core::array::from_fn(|i| d[i] * x[i]), &[0.3, -0.1, 2.0, 1.0]);
        let ev = eigenvalues(&j).unwrap();
        let re: [f64; 4] = core::array::from_fn(|i| ev[i].re);
        for (a, b) in re.iter().zip([2.0, 0.5, -1.0, -3.0]) {
            assert!((a - b).abs() < 1e-8);
        }
        assert!(ev.iter().all(|z| z.im.abs() < 1e-12));
    }

    #[test]
    fn rotation_has_imaginary_pair() {
        let m = SMatrix::<f64, 2, 2>::new(0.0, -2.0, 2.0, 0.0);
        let ev = eigenvalues(&m).unwrap();
        assert!(ev.iter().all(|z| z.re.abs() < 1e-14 && (z.im.abs() - 2.0).abs() < 1e-14));
    }

    #[test]
    fn linear_solve() {
        let a = SMatrix::<f64, 2, 2>::new(2.0, 1.0, 1.0, 3.0);
        let x = solve(a, &[3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-15 && (x[1] - 1.4).abs() < 1e-15);
    }
}
