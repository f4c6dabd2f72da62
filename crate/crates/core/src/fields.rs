//! Physical velocity components reconstructed from the working variables,
//! and the perturbation kinetic energy they carry.
//!
//! All radial derivatives are taken in y = r² (d/dr = 2√y·d/dy), so the one
//! collocation grid serves every case; the centre node needs no special
//! handling because each component carries an explicit power of r that is
//! exact at r = 0.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::assembly::ModeCase;
use crate::grid::CollocationGrid;
use crate::{Error, Result};

/// Complex velocity amplitudes (u′, v′, w′) sampled on the nodes r = √y.
///
/// The physical perturbation is the real part of each component times
/// exp(i(αx + nθ − ωt)).
#[derive(Clone, Debug)]
pub struct VelocityProfile {
    /// Radial positions √y, wall first, axis last.
    pub r: Vec<f64>,
    /// Axial component.
    pub u: DVector<Complex64>,
    /// Radial component.
    pub v: DVector<Complex64>,
    /// Azimuthal component.
    pub w: DVector<Complex64>,
    pub case: ModeCase,
    pub alpha: f64,
    pub n: i32,
}

impl VelocityProfile {
    /// Kinetic energy ½∫₀¹ (|u′|² + |v′|² + |w′|²) dy by grid quadrature.
    pub fn energy(&self, grid: &CollocationGrid) -> f64 {
        assert_eq!(self.u.len(), grid.len(), "profile and grid node counts differ");
        let sq: Vec<f64> = (0..grid.len())
            .map(|j| self.u[j].norm_sqr() + self.v[j].norm_sqr() + self.w[j].norm_sqr())
            .collect();
        0.5 * grid.integrate(&sq)
    }
}

/// D¹ applied to a complex nodal vector.
fn dy(grid: &CollocationGrid, f: &DVector<Complex64>) -> DVector<Complex64> {
    let d1 = &grid.d[0];
    DVector::from_fn(f.len(), |i, _| (0..f.len()).map(|k| d1[(i, k)] * f[k]).sum())
}

/// Build the velocity components for the case selected by (α, n).
///
/// n ≠ 0: v′ = r^ℓφ with ℓ = |n| − 1, and u′, w′ follow from continuity and
/// the azimuthal vorticity with denominators d = n² + α²y (never zero).
/// n = 0, α ≠ 0: u′ = (i/α)(2φ + 2y𝒟φ), v′ = rφ, w′ = (i/α)rΩ.
/// α = n = 0: the working variables are the axial and azimuthal velocities
/// themselves, u′ = ψ₁ and w′ = rψ₂, with v′ = 0.
pub fn reconstruct(
    phi: &DVector<Complex64>,
    omega_var: &DVector<Complex64>,
    grid: &CollocationGrid,
    alpha: f64,
    n: i32,
) -> Result<VelocityProfile> {
    let n1 = grid.len();
    if phi.len() != n1 || omega_var.len() != n1 {
        return Err(Error::Params(format!(
            "node vectors of length {}/{} on a grid of {} nodes",
            phi.len(),
            omega_var.len(),
            n1
        )));
    }
    let case = ModeCase::classify(alpha, n);
    let r: Vec<f64> = grid.y.iter().map(|&y| y.sqrt()).collect();
    let i = Complex64::i();

    let (u, v, w) = match case {
        ModeCase::General => {
            let ell = n.unsigned_abs() as i32 - 1;
            let (nf, lf) = (n as f64, ell as f64);
            let dphi = dy(grid, phi);
            let mut u = DVector::zeros(n1);
            let mut v = DVector::zeros(n1);
            let mut w = DVector::zeros(n1);
            for j in 0..n1 {
                let y = grid.y[j];
                let d = nf * nf + alpha * alpha * y;
                let rl = r[j].powi(ell);
                v[j] = rl * phi[j];
                u[j] = i * rl * r[j] / d
                    * (alpha * (lf + 1.0) * phi[j] + 2.0 * alpha * y * dphi[j] - nf * omega_var[j]);
                w[j] = i * rl / d
                    * (nf * (lf + 1.0) * phi[j] + 2.0 * nf * y * dphi[j] + alpha * y * omega_var[j]);
            }
            (u, v, w)
        }
        ModeCase::AxisymmetricFinite => {
            let dphi = dy(grid, phi);
            let u = DVector::from_fn(n1, |j, _| {
                i / alpha * (2.0 * phi[j] + 2.0 * grid.y[j] * dphi[j])
            });
            let v = DVector::from_fn(n1, |j, _| r[j] * phi[j]);
            let w = DVector::from_fn(n1, |j, _| i / alpha * r[j] * omega_var[j]);
            (u, v, w)
        }
        ModeCase::AxisymmetricZero => {
            let u = phi.clone();
            let v = DVector::zeros(n1);
            let w = DVector::from_fn(n1, |j, _| r[j] * omega_var[j]);
            (u, v, w)
        }
    };

    Ok(VelocityProfile { r, u, v, w, case, alpha, n })
}

/// Kinetic energy of an azimuthal (n ≠ 0) perturbation straight from the
/// working variables:
///
///   E = (1/2n²) ∫₀¹ [ y^{ℓ+1}|Ω|² + 2n² y^ℓ|φ|² + 4 y^{ℓ+2}|𝒟φ|²
///                     + 2(ℓ+1) y^{ℓ+1} (φ*𝒟φ + φ𝒟φ*) ] dy.
///
/// This expands the α = 0 velocity components termwise, so it matches
/// `VelocityProfile::energy` of the reconstructed axially uniform field to
/// rounding.  For α ≠ 0 use the velocity form.
pub fn energy(
    phi: &DVector<Complex64>,
    omega_var: &DVector<Complex64>,
    grid: &CollocationGrid,
    n: i32,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::Params("working-variable energy form needs n != 0".into()));
    }
    let n1 = grid.len();
    if phi.len() != n1 || omega_var.len() != n1 {
        return Err(Error::Params("node vectors do not match the grid".into()));
    }
    let ell = n.unsigned_abs() as i32 - 1;
    let (nsq, lf) = ((n as f64) * (n as f64), ell as f64);
    let dphi = dy(grid, phi);
    let integrand: Vec<f64> = (0..n1)
        .map(|j| {
            let y = grid.y[j];
            let yl = y.powi(ell);
            yl * y * omega_var[j].norm_sqr()
                + 2.0 * nsq * yl * phi[j].norm_sqr()
                + 4.0 * yl * y * y * dphi[j].norm_sqr()
                + 4.0 * (lf + 1.0) * yl * y * (phi[j].conj() * dphi[j]).re
        })
        .collect();
    Ok(grid.integrate(&integrand) / (2.0 * nsq))
}

/// Worst interior divergence of a reconstructed field, relative to its peak
/// component magnitude.
///
/// Checks iαu′ + v′/r + dv′/dr + (in/r)w′ at every node with 0 < y < 1; a
/// clean eigenmode comes out near rounding level, so a large value flags an
/// inconsistent (φ, Ω) pair or an under-resolved mode.
pub fn continuity_defect(p: &VelocityProfile, grid: &CollocationGrid) -> f64 {
    assert_eq!(p.u.len(), grid.len(), "profile and grid node counts differ");
    let dv = dy(grid, &p.v);
    let i = Complex64::i();
    let peak = (0..grid.len())
        .map(|j| p.u[j].norm().max(p.v[j].norm()).max(p.w[j].norm()))
        .fold(0.0_f64, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0_f64;
    for j in 0..grid.len() {
        let y = grid.y[j];
        if y <= 0.0 || y >= 1.0 {
            continue;
        }
        let r = p.r[j];
        let res = i * p.alpha * p.u[j]
            + p.v[j] / r
            + 2.0 * r * dv[j]
            + i * (p.n as f64) / r * p.w[j];
        worst = worst.max(res.norm());
    }
    worst / peak
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::assemble;
    use crate::eig::solve_qz;
    use crate::grid::{GridSpec, Mapping};
    use crate::FlowParams;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(n_poly: usize) -> CollocationGrid {
        CollocationGrid::build(GridSpec::new(n_poly, Mapping::Linear).unwrap()).unwrap()
    }

    /// Smooth low-order complex polynomial sampled on the nodes.
    fn smooth(grid: &CollocationGrid, rng: &mut ChaCha8Rng) -> DVector<Complex64> {
        let coeffs: Vec<Complex64> = (0..7)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        DVector::from_fn(grid.len(), |j, _| {
            let y = grid.y[j];
            coeffs.iter().rev().fold(Complex64::ZERO, |acc, &c| acc * y + c)
        })
    }

    #[test]
    fn constant_phi_axisymmetric_gives_uniform_axial_velocity() {
        let g = grid(16);
        let c = Complex64::new(0.7, 0.3);
        let phi = DVector::from_element(g.len(), c);
        let om = DVector::zeros(g.len());
        let p = reconstruct(&phi, &om, &g, 1.5, 0).unwrap();
        let expect = Complex64::i() * 2.0 * c / 1.5;
        for j in 0..g.len() {
            assert!((p.u[j] - expect).norm() < 1e-12);
            assert!((p.v[j] - p.r[j] * c).norm() < 1e-14);
            assert_eq!(p.w[j], Complex64::ZERO);
        }
    }

    #[test]
    fn zero_case_passes_working_variables_through() {
        let g = grid(12);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let psi1 = smooth(&g, &mut rng);
        let psi2 = smooth(&g, &mut rng);
        let p = reconstruct(&psi1, &psi2, &g, 0.0, 0).unwrap();
        assert_eq!(p.case, ModeCase::AxisymmetricZero);
        for j in 0..g.len() {
            assert_eq!(p.u[j], psi1[j]);
            assert_eq!(p.v[j], Complex64::ZERO);
            assert!((p.w[j] - p.r[j] * psi2[j]).norm() < 1e-15);
        }
    }

    #[test]
    fn radial_component_scales_like_r_to_ell() {
        let g = grid(24);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let phi = smooth(&g, &mut rng);
        let om = smooth(&g, &mut rng);
        let p = reconstruct(&phi, &om, &g, 1.0, 2).unwrap();
        let axis = g.len() - 1;
        assert_eq!(p.v[axis], Complex64::ZERO);
        let inner = axis - 1;
        assert!((p.v[inner] / p.r[inner] - phi[inner]).norm() < 1e-12);
        assert_eq!(p.u[axis], Complex64::ZERO);
        assert_eq!(p.w[axis], Complex64::ZERO);
    }

    #[test]
    fn single_azimuthal_mode_keeps_finite_centre_swirl() {
        let g = grid(20);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let phi = smooth(&g, &mut rng);
        let om = smooth(&g, &mut rng);
        let p = reconstruct(&phi, &om, &g, 0.7, 1).unwrap();
        let axis = g.len() - 1;
        assert!((p.v[axis] - phi[axis]).norm() < 1e-14);
        assert!((p.w[axis] - Complex64::i() * phi[axis]).norm() < 1e-14);
        assert_eq!(p.u[axis], Complex64::ZERO);
    }

    #[test]
    fn eigenmode_satisfies_continuity() {
        let params = FlowParams::new(1.0, 1, 3000.0, 47).unwrap();
        let g = CollocationGrid::build(GridSpec::new(47, params.resolve_mapping()).unwrap()).unwrap();
        let pencil = assemble(&params, &g).unwrap();
        let spectrum = solve_qz(&pencil).unwrap();
        let mode = &spectrum.modes[0];
        let p = reconstruct(&mode.phi, &mode.omega_var, &g, 1.0, 1).unwrap();
        assert!(continuity_defect(&p, &g) < 1e-8);
    }

    #[test]
    fn no_slip_eigenmode_vanishes_at_wall() {
        let params = FlowParams::new(1.0, 1, 3000.0, 47).unwrap();
        let g = CollocationGrid::build(GridSpec::new(47, params.resolve_mapping()).unwrap()).unwrap();
        let pencil = assemble(&params, &g).unwrap();
        let spectrum = solve_qz(&pencil).unwrap();
        for mode in spectrum.modes.iter().take(5) {
            let p = reconstruct(&mode.phi, &mode.omega_var, &g, 1.0, 1).unwrap();
            let scale = (0..g.len())
                .map(|j| p.u[j].norm().max(p.v[j].norm()).max(p.w[j].norm()))
                .fold(0.0_f64, f64::max);
            assert!(p.u[0].norm() < 1e-10 * scale);
            assert!(p.v[0].norm() < 1e-10 * scale);
            assert!(p.w[0].norm() < 1e-10 * scale);
        }
    }

    #[test]
    fn zero_state_has_zero_energy() {
        let g = grid(16);
        let z = DVector::zeros(g.len());
        assert_eq!(energy(&z, &z, &g, 1).unwrap(), 0.0);
        let p = reconstruct(&z, &z, &g, 0.0, 1).unwrap();
        assert_eq!(p.energy(&g), 0.0);
    }

    #[test]
    fn energy_form_rejects_axisymmetric_input() {
        let g = grid(8);
        let z = DVector::zeros(g.len());
        assert!(energy(&z, &z, &g, 0).is_err());
    }

    #[test]
    fn linear_phi_energy_matches_velocity_quadrature() {
        let g = grid(24);
        let phi = DVector::from_fn(g.len(), |j, _| Complex64::new(1.0 - g.y[j], 0.0));
        let om = DVector::zeros(g.len());
        let e_wv = energy(&phi, &om, &g, 1).unwrap();
        let p = reconstruct(&phi, &om, &g, 0.0, 1).unwrap();
        let e_vel = p.energy(&g);
        assert!((e_wv - e_vel).abs() < 1e-10 * e_vel);
        // Exact value for φ = 1 − y, Ω = 0, n = 1: ½∫(1−y)² + (1−3y)² dy = 2/3.
        assert!((e_vel - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn energy_forms_agree_for_axially_uniform_states() {
        let g = grid(32);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for n in [1, 2, 4] {
            for _ in 0..3 {
                let phi = smooth(&g, &mut rng);
                let om = smooth(&g, &mut rng);
                let e_wv = energy(&phi, &om, &g, n).unwrap();
                let p = reconstruct(&phi, &om, &g, 0.0, n).unwrap();
                let e_vel = p.energy(&g);
                assert!(e_wv > 0.0);
                assert!(
                    (e_wv - e_vel).abs() < 1e-8 * e_vel,
                    "n = {n}: {e_wv} vs {e_vel}"
                );
            }
        }
    }

    #[test]
    fn doubling_the_state_quadruples_the_energy() {
        let g = grid(20);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let phi = smooth(&g, &mut rng);
        let om = smooth(&g, &mut rng);
        let e1 = energy(&phi, &om, &g, 2).unwrap();
        let two = Complex64::new(2.0, 0.0);
        let e2 = energy(&(&phi * two), &(&om * two), &g, 2).unwrap();
        assert!((e2 - 4.0 * e1).abs() < 1e-12 * e2);
    }

    #[test]
    fn rejects_mismatched_lengths() {
        let g = grid(10);
        let short = DVector::zeros(3);
        let full = DVector::zeros(g.len());
        assert!(reconstruct(&short, &full, &g, 1.0, 1).is_err());
        assert!(energy(&full, &short, &g, 1).is_err());
    }
}
