//! Thin wrappers over the system LAPACK (zggev/zgeev/zgesvd).
//!
//! nalgebra's dense matrices are column-major, so buffers pass straight
//! through; num_complex::Complex64 is repr(C) and layout-compatible with
//! LAPACK's double complex.

use crate::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

unsafe extern "C" {
    fn zggev_(
        jobvl: *const u8,
        jobvr: *const u8,
        n: *const i32,
        a: *mut Complex64,
        lda: *const i32,
        b: *mut Complex64,
        ldb: *const i32,
        alpha: *mut Complex64,
        beta: *mut Complex64,
        vl: *mut Complex64,
        ldvl: *const i32,
        vr: *mut Complex64,
        ldvr: *const i32,
        work: *mut Complex64,
        lwork: *const i32,
        rwork: *mut f64,
        info: *mut i32,
    );
    fn zgeev_(
        jobvl: *const u8,
        jobvr: *const u8,
        n: *const i32,
        a: *mut Complex64,
        lda: *const i32,
        w: *mut Complex64,
        vl: *mut Complex64,
        ldvl: *const i32,
        vr: *mut Complex64,
        ldvr: *const i32,
        work: *mut Complex64,
        lwork: *const i32,
        rwork: *mut f64,
        info: *mut i32,
    );
    fn zgesvd_(
        jobu: *const u8,
        jobvt: *const u8,
        m: *const i32,
        n: *const i32,
        a: *mut Complex64,
        lda: *const i32,
        s: *mut f64,
        u: *mut Complex64,
        ldu: *const i32,
        vt: *mut Complex64,
        ldvt: *const i32,
        work: *mut Complex64,
        lwork: *const i32,
        rwork: *mut f64,
        info: *mut i32,
    );
}

/// Generalized eigenproblem P v = ω Q v: returns (α_k, β_k, right vectors),
/// eigenvalues ω_k = α_k/β_k where β_k ≠ 0.
pub(crate) fn zggev(
    p: &DMatrix<Complex64>,
    q: &DMatrix<Complex64>,
) -> Result<(Vec<Complex64>, Vec<Complex64>, DMatrix<Complex64>)> {
    let n = p.nrows();
    if n == 0 || p.ncols() != n || q.nrows() != n || q.ncols() != n {
        return Err(Error::Eig(format!("pencil must be square, got {}x{}", p.nrows(), p.ncols())));
    }
    let ni = n as i32;
    let mut a = p.clone();
    let mut b = q.clone();
    let mut alpha = vec![Complex64::default(); n];
    let mut beta = vec![Complex64::default(); n];
    let mut vr = DMatrix::<Complex64>::zeros(n, n);
    let mut rwork = vec![0.0f64; 8 * n];
    let mut info = 0i32;
    let mut vl = [Complex64::default(); 1];
    // Workspace query, then the real call.
    let mut work_len = [Complex64::default(); 1];
    let query = -1i32;
    unsafe {
        zggev_(
            b"N".as_ptr(), b"V".as_ptr(), &ni,
            a.as_mut_slice().as_mut_ptr(), &ni,
            b.as_mut_slice().as_mut_ptr(), &ni,
            alpha.as_mut_ptr(), beta.as_mut_ptr(),
            vl.as_mut_ptr(), &1, vr.as_mut_slice().as_mut_ptr(), &ni,
            work_len.as_mut_ptr(), &query, rwork.as_mut_ptr(), &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Eig(format!("zggev workspace query failed: info={info}")));
    }
    let lwork = work_len[0].re as i32;
    let mut work = vec![Complex64::default(); lwork.max(1) as usize];
    unsafe {
        zggev_(
            b"N".as_ptr(), b"V".as_ptr(), &ni,
            a.as_mut_slice().as_mut_ptr(), &ni,
            b.as_mut_slice().as_mut_ptr(), &ni,
            alpha.as_mut_ptr(), beta.as_mut_ptr(),
            vl.as_mut_ptr(), &1, vr.as_mut_slice().as_mut_ptr(), &ni,
            work.as_mut_ptr(), &lwork, rwork.as_mut_ptr(), &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Eig(format!("zggev failed: info={info}")));
    }
    Ok((alpha, beta, vr))
}

/// Standard eigenproblem A v = λ v with right eigenvectors.
pub(crate) fn zgeev(m: &DMatrix<Complex64>) -> Result<(Vec<Complex64>, DMatrix<Complex64>)> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return Err(Error::Eig(format!("matrix must be square, got {}x{}", m.nrows(), m.ncols())));
    }
    let ni = n as i32;
    let mut a = m.clone();
    let mut w = vec![Complex64::default(); n];
    let mut vr = DMatrix::<Complex64>::zeros(n, n);
    let mut rwork = vec![0.0f64; 2 * n];
    let mut info = 0i32;
    let mut vl = [Complex64::default(); 1];
    let mut work_len = [Complex64::default(); 1];
    let query = -1i32;
    unsafe {
        zgeev_(
            b"N".as_ptr(), b"V".as_ptr(), &ni,
            a.as_mut_slice().as_mut_ptr(), &ni,
            w.as_mut_ptr(),
            vl.as_mut_ptr(), &1, vr.as_mut_slice().as_mut_ptr(), &ni,
            work_len.as_mut_ptr(), &query, rwork.as_mut_ptr(), &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Eig(format!("zgeev workspace query failed: info={info}")));
    }
    let lwork = work_len[0].re as i32;
    let mut work = vec![Complex64::default(); lwork.max(1) as usize];
    unsafe {
        zgeev_(
            b"N".as_ptr(), b"V".as_ptr(), &ni,
            a.as_mut_slice().as_mut_ptr(), &ni,
            w.as_mut_ptr(),
            vl.as_mut_ptr(), &1, vr.as_mut_slice().as_mut_ptr(), &ni,
            work.as_mut_ptr(), &lwork, rwork.as_mut_ptr(), &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Eig(format!("zgeev failed: info={info}")));
    }
    Ok((w, vr))
}

/// Singular values of a square matrix, descending.
pub(crate) fn singular_values(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return Err(Error::Eig(format!("matrix must be square, got {}x{}", m.nrows(), m.ncols())));
    }
    let ni = n as i32;
    let mut a = m.clone();
    let mut s = vec![0.0f64; n];
    let mut rwork = vec![0.0f64; 5 * n];
    let mut info = 0i32;
    let mut u = [Complex64::default(); 1];
    let mut vt = [Complex64::default(); 1];
    let mut work_len = [Complex64::default(); 1];
    let query = -1i32;
    unsafe {
        zgesvd_(
            b"N".as_ptr(), b"N".as_ptr(), &ni, &ni,
            a.as_mut_slice().as_mut_ptr(), &ni,
            s.as_mut_ptr(),
            u.as_mut_ptr(), &1, vt.as_mut_ptr(), &1,
            work_len.as_mut_ptr(), &query, rwork.as_mut_ptr(), &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Eig(format!("zgesvd workspace query failed: info={info}")));
    }
    let lwork = work_len[0].re as i32;
    let mut work = vec![Complex64::default(); lwork.max(1) as usize];
    unsafe {
        zgesvd_(
            b"N".as_ptr(), b"N".as_ptr(), &ni, &ni,
            a.as_mut_slice().as_mut_ptr(), &ni,
            s.as_mut_ptr(),
            u.as_mut_ptr(), &1, vt.as_mut_ptr(), &1,
            work.as_mut_ptr(), &lwork, rwork.as_mut_ptr(), &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Eig(format!("zgesvd failed: info={info}")));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn generalized_diagonal_pencil() {
        // P = diag(2, 6), Q = diag(2, 3) -> eigenvalues 1 and 2.
        let p = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(2.0, 0.0), c(6.0, 0.0)]));
        let q = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(2.0, 0.0), c(3.0, 0.0)]));
        let (alpha, beta, _) = zggev(&p, &q).unwrap();
        let mut ev: Vec<f64> = alpha.iter().zip(&beta).map(|(a, b)| (a / b).re).collect();
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] - 1.0).abs() < 1e-13);
        assert!((ev[1] - 2.0).abs() < 1e-13);
    }

    #[test]
    fn standard_eigen_rotation() {
        // [[0, -1], [1, 0]] has eigenvalues ±i.
        let m = DMatrix::from_column_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)]);
        let (w, vr) = zgeev(&m).unwrap();
        let mut ims: Vec<f64> = w.iter().map(|z| z.im).collect();
        ims.sort_by(f64::total_cmp);
        assert!((ims[0] + 1.0).abs() < 1e-14);
        assert!((ims[1] - 1.0).abs() < 1e-14);
        // Residual of the returned eigenpair.
        for k in 0..2 {
            let v = vr.column(k).into_owned();
            let r = &m * &v - v.clone() * w[k];
            assert!(r.norm() < 1e-14);
        }
    }

    #[test]
    fn singular_values_of_scaled_unitary() {
        let s = 1.0 / 2f64.sqrt();
        let m = DMatrix::from_column_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(-s, 0.0), c(s, 0.0)]) * c(3.0, 0.0);
        let sv = singular_values(&m).unwrap();
        assert!((sv[0] - 3.0).abs() < 1e-13);
        assert!((sv[1] - 3.0).abs() < 1e-13);
    }

    #[test]
    fn infinite_mode_shows_as_zero_beta() {
        // Q singular in one direction: one finite eigenvalue, one infinite.
        let p = DMatrix::from_column_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let q = DMatrix::from_column_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let (alpha, beta, _) = zggev(&p, &q).unwrap();
        let finite: Vec<_> = alpha
            .iter()
            .zip(&beta)
            .filter(|(_, b)| b.norm() > 1e-12)
            .map(|(a, b)| a / b)
            .collect();
        assert_eq!(finite.len(), 1);
        assert!((finite[0] - c(1.0, 0.0)).norm() < 1e-13);
    }
}
