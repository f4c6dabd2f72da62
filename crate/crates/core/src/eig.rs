//! Spectrum computation: dense QZ solves, shift-invert refinement, and
//! pseudospectral conditioning diagnostics.

use crate::assembly::{Pencil, Recovery};
use crate::linalg;
use crate::{Error, Result, Tolerances};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Anything shaped like a generalized pencil P x = ω Q x with a recovery map.
pub trait PencilLike {
    fn p(&self) -> &DMatrix<Complex64>;
    fn q(&self) -> &DMatrix<Complex64>;
    fn recovery(&self) -> &Recovery;
}

impl PencilLike for Pencil {
    fn p(&self) -> &DMatrix<Complex64> {
        &self.p
    }
    fn q(&self) -> &DMatrix<Complex64> {
        &self.q
    }
    fn recovery(&self) -> &Recovery {
        &self.recovery
    }
}

/// One converged eigenpair with recovered nodal eigenfunctions.
#[derive(Clone, Debug)]
pub struct Mode {
    pub omega: Complex64,
    pub reduced: DVector<Complex64>,
    /// Fourth-order variable on all nodes (φ, or ψ₁ in the doubly-zero case).
    pub phi: DVector<Complex64>,
    /// Second-order variable on all nodes (Ω, or ψ₂).
    pub omega_var: DVector<Complex64>,
    /// ‖P v − ω Q v‖₂ / (‖P‖_F ‖v‖₂).
    pub residual: f64,
}

/// Finite spectrum of a pencil, sorted least-decaying first (Im ω descending).
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub modes: Vec<Mode>,
    /// Order of the solved pencil.
    pub size: usize,
}

impl Spectrum {
    pub fn omegas(&self) -> Vec<Complex64> {
        self.modes.iter().map(|m| m.omega).collect()
    }
}

/// Full dense solve via LAPACK's QZ; spurious infinite directions (|β| below
/// the floor) are discarded before sorting.
pub fn solve_qz(pencil: &impl PencilLike) -> Result<Spectrum> {
    solve_qz_with(pencil, &Tolerances::default())
}

pub fn solve_qz_with(pencil: &impl PencilLike, tol: &Tolerances) -> Result<Spectrum> {
    let p = pencil.p();
    let q = pencil.q();
    let (alpha, beta, vr) = linalg::zggev(p, q)?;
    let qnorm = q.norm();
    let pnorm = p.norm();
    let mut modes = Vec::new();
    for (k, (a, b)) in alpha.iter().zip(&beta).enumerate() {
        if b.norm() <= tol.beta_floor * qnorm {
            continue;
        }
        let omega = a / b;
        if !omega.re.is_finite() || !omega.im.is_finite() {
            continue;
        }
        let v = vr.column(k).into_owned();
        let resid = (p * &v - (q * &v) * omega).norm() / (pnorm * v.norm());
        let (phi, omega_var) = pencil.recovery().recover(&v);
        modes.push(Mode { omega, reduced: v, phi, omega_var, residual: resid });
    }
    modes.sort_by(|x, y| {
        y.omega.im.total_cmp(&x.omega.im).then(x.omega.re.total_cmp(&y.omega.re))
    });
    Ok(Spectrum { modes, size: p.nrows() })
}

/// First k modes of the sorted spectrum.
pub fn least_decaying(spectrum: &Spectrum, k: usize) -> Result<&[Mode]> {
    if k > spectrum.modes.len() {
        return Err(Error::Eig(format!(
            "asked for {k} modes but only {} are finite",
            spectrum.modes.len()
        )));
    }
    Ok(&spectrum.modes[..k])
}

/// Shift-invert Arnoldi refinement of the eigenvalue nearest `shift`.
/// Returns the refined eigenvalue and its reduced eigenvector.
pub fn refine_mode(pencil: &impl PencilLike, shift: Complex64) -> Result<(Complex64, DVector<Complex64>)> {
    refine_mode_with(pencil, shift, &Tolerances::default())
}

pub fn refine_mode_with(
    pencil: &impl PencilLike,
    shift: Complex64,
    tol: &Tolerances,
) -> Result<(Complex64, DVector<Complex64>)> {
    let p = pencil.p();
    let q = pencil.q();
    let n = p.nrows();
    let pnorm = p.norm();
    // Factor P − σQ, nudging σ off an exact eigenvalue if needed.
    let mut sigma = shift;
    let mut lu = (p - q * Complex64::from(sigma)).lu();
    if !lu_is_usable(&lu, n) {
        sigma += Complex64::new(1e-8 * (1.0 + shift.norm()), 1e-8 * (1.0 + shift.norm()));
        lu = (p - q * Complex64::from(sigma)).lu();
        if !lu_is_usable(&lu, n) {
            return Err(Error::Eig("shifted pencil is singular; move the shift".into()));
        }
    }

    let subspace = 30usize.min(n);
    let mut start = DVector::<Complex64>::from_element(n, Complex64::new(1.0, 0.0));
    start /= Complex64::from(start.norm());
    let mut spent = 0usize;

    loop {
        let mut v: Vec<DVector<Complex64>> = vec![start.clone()];
        let mut h = DMatrix::<Complex64>::zeros(subspace + 1, subspace);
        let mut m = 0usize;
        for jj in 0..subspace {
            if spent >= tol.refine_max_iter {
                break;
            }
            let rhs = q * &v[jj];
            let mut w = lu
                .solve(&rhs)
                .ok_or_else(|| Error::Eig("shift-invert solve failed".into()))?;
            spent += 1;
            // Modified Gram–Schmidt with one re-orthogonalization pass.
            for _ in 0..2 {
                for (i, vi) in v.iter().enumerate() {
                    let c = vi.dotc(&w);
                    h[(i, jj)] += c;
                    w -= vi * c;
                }
            }
            let nw = w.norm();
            h[(jj + 1, jj)] = Complex64::from(nw);
            m = jj + 1;
            if nw < 1e-14 {
                break;
            }
            v.push(w / Complex64::from(nw));
        }
        if m == 0 {
            return Err(Error::Eig("refinement budget exhausted before one step".into()));
        }
        // Ritz pairs of the leading m×m block; largest |θ| is nearest σ.
        let hm = h.view((0, 0), (m, m)).into_owned();
        let (theta, svecs) = linalg::zgeev(&hm)?;
        let (best, _) = theta
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .expect("m >= 1");
        let s = svecs.column(best).into_owned();
        let mut x = DVector::<Complex64>::zeros(n);
        for (i, vi) in v.iter().take(m).enumerate() {
            x += vi * s[i];
        }
        let xn = x.norm();
        if xn == 0.0 {
            return Err(Error::Eig("refinement produced a null Ritz vector".into()));
        }
        x /= Complex64::from(xn);
        let omega = sigma + theta[best].inv();
        let resid = (p * &x - (q * &x) * omega).norm() / pnorm;
        if resid <= tol.refine_tol {
            return Ok((omega, x));
        }
        if spent >= tol.refine_max_iter {
            return Err(Error::Eig(format!(
                "refinement stalled at residual {resid:.3e} after {spent} products"
            )));
        }
        start = x;
    }
}

fn lu_is_usable(lu: &nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>, n: usize) -> bool {
    // nalgebra's LU has no explicit singular flag; probe the diagonal of U.
    let u = lu.u();
    (0..n).all(|i| u[(i, i)].norm() > 1e-300)
}

/// 2-norm condition number of (Q⁻¹P − ωI): large values flag eigenvalues
/// whose location is sensitive — the classic spectral instability of this
/// flow's non-normal operator.
pub fn condition_diagnostic(pencil: &impl PencilLike, omega: Complex64) -> Result<f64> {
    let q = pencil.q();
    let n = q.nrows();
    let l = q
        .clone()
        .lu()
        .solve(pencil.p())
        .ok_or_else(|| Error::Eig("ω-side matrix is singular; conditioning undefined".into()))?;
    let shifted = &l - DMatrix::<Complex64>::identity(n, n) * Complex64::from(omega);
    let sv = linalg::singular_values(&shifted)?;
    let smin = sv[n - 1];
    if smin == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(sv[0] / smin)
}
