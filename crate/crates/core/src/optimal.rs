//! Inviscid transient growth of axially uniform (α = 0) perturbations.
//!
//! Without viscosity the streamfunction variable φ is frozen in time while Ω
//! picks up a secular term from the mean shear, so cross-flow vortices feed
//! algebraically growing streamwise streaks.  The largest possible energy
//! amplification over a horizon t is the top eigenvalue of a small
//! generalized problem in the initial state (φ₀, Ω₀); its eigenvector is the
//! optimal vortex pattern.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::assembly::{
    block_recovery, re, reduce, reduction_map, ModeCase, Pencil, Rows, Side,
};
use crate::eig::solve_qz;
use crate::fields;
use crate::grid::{barycentric_eval, CollocationGrid, GridSpec, Mapping};
use crate::{Error, Result};

/// Carry an initial state to time t: φ(t) = φ₀, Ω(t) = Ω₀ + 2intφ₀ (the
/// secular term, with mean shear U_y = −1 already substituted).
pub fn evolve_state(
    phi0: &DVector<Complex64>,
    omega0: &DVector<Complex64>,
    n: i32,
    t: f64,
) -> (DVector<Complex64>, DVector<Complex64>) {
    let s = Complex64::i() * 2.0 * (n as f64) * t;
    (phi0.clone(), omega0 + phi0 * s)
}

/// Stationarity conditions for the energy-gain quotient at horizon t, as a
/// pencil in the gain g.
///
/// Unknowns are φ₀ (wall value eliminated by no-penetration) and Ω₀ on all
/// nodes.  The fourth-order block is collocated at every node but the wall —
/// at the axis its y-weighted terms drop, leaving exactly the regularity
/// condition the solution needs there — and the algebraic Ω₀ block at every
/// node.  At t = 0 the two sides coincide, so the whole spectrum sits at
/// g = 1.
pub fn build_growth_pencil(n: i32, t: f64, grid: &CollocationGrid) -> Result<Pencil> {
    if n == 0 {
        return Err(Error::Assembly("growth problem needs n != 0".into()));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Params(format!("horizon must be finite and >= 0, got {t}")));
    }
    let n_deg = grid.n_poly();
    let n1 = grid.len();
    let ell = n.unsigned_abs() as i32 - 1;
    let (nf, lf) = (n as f64, ell as f64);
    let nt = nf * t;
    let i = Complex64::i();
    let size = 2 * n_deg + 1;
    let mut rows = Rows::new(size, n1);

    for (row, j) in (1..=n_deg).enumerate() {
        let y = grid.y[j];
        rows.add(Side::P, row, 0, grid, 0, j, re(2.0 * nt * nt));
        rows.add(Side::P, row, 0, grid, 1, j, re(-2.0 * (lf + 2.0)));
        rows.add(Side::P, row, 0, grid, 2, j, re(-2.0 * y));
        rows.add(Side::P, row, 1, grid, 0, j, -i * nt);
        rows.add(Side::Q, row, 0, grid, 1, j, re(-2.0 * (lf + 2.0)));
        rows.add(Side::Q, row, 0, grid, 2, j, re(-2.0 * y));
    }
    for j in 0..n1 {
        let row = n_deg + j;
        rows.add(Side::P, row, 0, grid, 0, j, i * 2.0 * nt);
        rows.add(Side::P, row, 1, grid, 0, j, re(1.0));
        rows.add(Side::Q, row, 1, grid, 0, j, re(1.0));
    }

    let mut wall = DVector::<f64>::zeros(n1);
    wall[0] = 1.0;
    let r_phi = reduction_map(n1, &[wall], &[0])?;
    let r_om = DMatrix::<f64>::identity(n1, n1);
    let recovery = block_recovery(r_phi, r_om, n1);
    reduce(rows, recovery, ModeCase::General, size, grid)
}

/// Optimal-growth solve at one horizon.
#[derive(Clone, Debug)]
pub struct GrowthResult {
    /// Real amplification factors, largest first.
    pub gains: Vec<f64>,
    /// Discarded complex-conjugate directions (see `optimal_growth`).
    pub dropped_complex: usize,
    /// Peak amplification G(t) = max gain.
    pub g_max: f64,
    /// Optimal initial state, scaled to unit energy.
    pub phi0: DVector<Complex64>,
    pub omega0: DVector<Complex64>,
    /// The same state carried to time t; its energy is G(t).
    pub phi_t: DVector<Complex64>,
    pub omega_t: DVector<Complex64>,
}

/// Solve the gain pencil, pick the largest amplification, and return the
/// optimal state at times 0 and t with E(0) = 1.
///
/// The physical gain spectrum is real (the reduced operator is self-adjoint
/// and positive) and comes in reciprocal pairs around g = 1.  Collocation is
/// not symmetric, though, so a few unresolved directions surface as
/// complex-conjugate pairs that wander toward g = 1 as the grid is refined
/// while the converged gains hold still; those artifacts are dropped and
/// counted in `dropped_complex`.  A spectrum that is not predominantly real,
/// or whose largest member is complex, signals an assembly defect and comes
/// back as an error rather than data.
pub fn optimal_growth(n: i32, t: f64, grid: &CollocationGrid) -> Result<GrowthResult> {
    let pencil = build_growth_pencil(n, t, grid)?;
    let spectrum = solve_qz(&pencil)?;
    if spectrum.modes.is_empty() {
        return Err(Error::Eig("gain pencil produced no finite eigenvalues".into()));
    }
    let is_real = |z: Complex64| z.im.abs() <= 1e-8 * z.norm().max(1.0);
    let dropped_complex = spectrum.modes.iter().filter(|m| !is_real(m.omega)).count();
    let mut gains: Vec<f64> = spectrum
        .modes
        .iter()
        .filter(|m| is_real(m.omega))
        .map(|m| m.omega.re)
        .collect();
    gains.sort_by(|a, b| b.partial_cmp(a).expect("gains are finite"));
    let best = spectrum
        .modes
        .iter()
        .filter(|m| is_real(m.omega))
        .max_by(|a, b| a.omega.re.partial_cmp(&b.omega.re).expect("gains are finite"))
        .ok_or_else(|| Error::Eig("no real gain in the spectrum".into()))?;
    // Artifacts cluster around g = 1, far below the top gain; one reaching
    // the upper half of the gain range means the answer itself is unconverged.
    let worst_artifact = spectrum
        .modes
        .iter()
        .filter(|m| !is_real(m.omega))
        .map(|m| m.omega.re)
        .fold(0.0_f64, f64::max);
    if worst_artifact > 0.5 * (1.0 + best.omega.re) {
        return Err(Error::Eig(format!(
            "complex direction at Re g = {worst_artifact:.3e} rivals the top gain {:.3e}; refine the grid",
            best.omega.re
        )));
    }
    let g_max = best.omega.re;
    if g_max <= 0.0 {
        return Err(Error::Eig(format!("no positive amplification found (max gain {g_max:.3e})")));
    }
    let e0 = fields::energy(&best.phi, &best.omega_var, grid, n)?;
    if !(e0.is_finite() && e0 > 0.0) {
        return Err(Error::Eig("optimal state has degenerate energy".into()));
    }
    let scale = re(1.0 / e0.sqrt());
    let phi0 = &best.phi * scale;
    let omega0 = &best.omega_var * scale;
    let (phi_t, omega_t) = evolve_state(&phi0, &omega0, n, t);
    Ok(GrowthResult { gains, dropped_complex, g_max, phi0, omega0, phi_t, omega_t })
}

fn integrate_complex(grid: &CollocationGrid, f: &[Complex64]) -> Complex64 {
    let rp: Vec<f64> = f.iter().map(|z| z.re).collect();
    let ip: Vec<f64> = f.iter().map(|z| z.im).collect();
    Complex64::new(grid.integrate(&rp), grid.integrate(&ip))
}

fn cumulative_complex(grid: &CollocationGrid, f: &[Complex64]) -> Vec<Complex64> {
    let rp: Vec<f64> = f.iter().map(|z| z.re).collect();
    let ip: Vec<f64> = f.iter().map(|z| z.im).collect();
    let cr = grid.cumulative_integral(&rp);
    let ci = grid.cumulative_integral(&ip);
    cr.into_iter().zip(ci).map(|(a, b)| Complex64::new(a, b)).collect()
}

/// Invert (ℓ+2)𝒟φ₀ + y𝒟²φ₀ = C for the initial streamfunction variable:
///
///   φ₀(y) = −∫_y¹ ȳ^{−(ℓ+2)} ∫₀^{ȳ} C(ỹ) ỹ^{ℓ+1} dỹ dȳ,
///
/// which vanishes at the wall and stays finite at the axis.  The inner
/// integral is evaluated as ∫₀¹ C(sȳ)s^{ℓ+1} ds on an auxiliary grid — the
/// substitution ỹ = sȳ removes the 0/0 the prefactor would otherwise meet at
/// the axis, where the limit is C(0)/(ℓ+2).
pub fn phi0_from_c(
    c: &DVector<Complex64>,
    n: i32,
    grid: &CollocationGrid,
) -> Result<DVector<Complex64>> {
    if n == 0 {
        return Err(Error::Params("forcing inversion needs n != 0".into()));
    }
    if c.len() != grid.len() {
        return Err(Error::Params("forcing samples do not match the grid".into()));
    }
    let ell = n.unsigned_abs() as i32 - 1;
    let aux = CollocationGrid::build(GridSpec::new(grid.n_poly().max(32), Mapping::Linear)?)?;
    let mut h = vec![Complex64::ZERO; grid.len()];
    let mut samples = vec![Complex64::ZERO; aux.len()];
    for (j, hj) in h.iter_mut().enumerate() {
        let yj = grid.y[j];
        for (k, s) in aux.y.iter().enumerate() {
            let xi = grid.spec.mapping.xi_of_y(s * yj);
            samples[k] = barycentric_eval(&grid.xi, c.as_slice(), xi) * s.powi(ell + 1);
        }
        *hj = integrate_complex(&aux, &samples);
        if !hj.is_finite() {
            return Err(Error::Series(format!("forcing inversion diverged at y = {yj}")));
        }
    }
    let cum = cumulative_complex(grid, &h);
    let at_wall = cum[0];
    Ok(DVector::from_fn(grid.len(), |j, _| cum[j] - at_wall))
}

/// Real velocity fields on a polar raster, for plotting cross-sections.
#[derive(Clone, Debug)]
pub struct PolarPattern {
    /// Radial positions, wall first.
    pub r: Vec<f64>,
    /// Azimuthal angles, uniform on [0, 2π).
    pub theta: Vec<f64>,
    /// Re(u′ e^{inθ}) indexed (radial node, angle); likewise v, w.
    pub u: DMatrix<f64>,
    pub v: DMatrix<f64>,
    pub w: DMatrix<f64>,
}

/// Sample the physical fields of an axially uniform state on a polar raster.
pub fn pattern_fields(
    phi: &DVector<Complex64>,
    omega_var: &DVector<Complex64>,
    grid: &CollocationGrid,
    n: i32,
    n_theta: usize,
) -> Result<PolarPattern> {
    if n_theta == 0 {
        return Err(Error::Params("need at least one angular sample".into()));
    }
    let p = fields::reconstruct(phi, omega_var, grid, 0.0, n)?;
    let theta: Vec<f64> =
        (0..n_theta).map(|k| 2.0 * std::f64::consts::PI * k as f64 / n_theta as f64).collect();
    let sample = |comp: &DVector<Complex64>| {
        DMatrix::from_fn(grid.len(), n_theta, |j, k| {
            (comp[j] * Complex64::from_polar(1.0, n as f64 * theta[k])).re
        })
    };
    let (u, v, w) = (sample(&p.u), sample(&p.v), sample(&p.w));
    Ok(PolarPattern { r: p.r.clone(), theta, u, v, w })
}
