//! Independent reference solver in the classical radial variables.
//!
//! The same physics, discretized a second way: unknowns φ̄ = −i r v′ and
//! Ω̄ = (αrw′ − nu′)/d collocated straight in r, no squared-radius change of
//! variable.  Near the axis φ̄ carries the factor r^{|n|}, so for large n the
//! eigenfunctions are flat over a sizeable fraction of the radius and the
//! discrete operator sits much farther from singularity at its own
//! eigenvalues.  That makes this solver a disagreement detector: where the
//! two formulations drift apart, eigenvalue distortion has set in on one
//! side, and the conditioning numbers say which.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::assembly::{
    block_recovery, re, reduce, reduction_map, ModeCase, Pencil, Recovery, Rows, Side,
};
use crate::eig::{PencilLike, Spectrum};
use crate::grid::{CollocationGrid, GridSpec, Mapping};
use crate::{Error, FlowParams, Result};

/// Plain Chebyshev–Gauss–Lobatto grid whose mapped coordinate is read as the
/// radius r itself (wall r = 1 first, axis r = 0 last).  All derivative and
/// quadrature operators then act in r.
pub fn radial_grid(n_poly: usize) -> Result<CollocationGrid> {
    CollocationGrid::build(GridSpec::new(n_poly, Mapping::Linear)?)
}

/// Generalized pencil of the radial system; recovered modes carry (φ̄, Ω̄)
/// on the r nodes.
#[derive(Clone, Debug)]
pub struct BdPencil(Pencil);

impl BdPencil {
    pub fn size(&self) -> usize {
        self.0.size
    }

    pub fn grid(&self) -> &CollocationGrid {
        &self.0.grid
    }
}

impl PencilLike for BdPencil {
    fn p(&self) -> &DMatrix<Complex64> {
        &self.0.p
    }
    fn q(&self) -> &DMatrix<Complex64> {
        &self.0.q
    }
    fn recovery(&self) -> &Recovery {
        &self.0.recovery
    }
}

/// Second-order radial operators at one node, as coefficient triples
/// (value, D, D²): T = D² + pD + q with p = 1/r − 2α²r/d, q = −d/r², and
/// S = D² + (1/r + d′/d)D − d/r².  T² is composed analytically up to D⁴ so
/// the fourth-order block needs no matrix product.
struct NodeOps {
    t: [f64; 3],
    s: [f64; 3],
    t2: [f64; 5],
}

fn node_ops(alpha: f64, nf: f64, r: f64) -> NodeOps {
    let a2 = alpha * alpha;
    let d = nf * nf + a2 * r * r;
    let p = 1.0 / r - 2.0 * a2 * r / d;
    let q = -d / (r * r);
    let dp = -1.0 / (r * r) - 2.0 * a2 * (nf * nf - a2 * r * r) / (d * d);
    let dpp = 2.0 / (r * r * r)
        + 4.0 * a2 * a2 * r * (3.0 * nf * nf - a2 * r * r) / (d * d * d);
    let dq = 2.0 * nf * nf / (r * r * r);
    let dqq = -6.0 * nf * nf / (r * r * r * r);
    NodeOps {
        t: [q, p, 1.0],
        s: [q, 1.0 / r + 2.0 * a2 * r / d, 1.0],
        t2: [
            dqq + p * dq + q * q,
            dpp + 2.0 * dq + p * dp + 2.0 * p * q,
            2.0 * dp + 2.0 * q + p * p,
            2.0 * p,
            1.0,
        ],
    }
}

/// Collocate the radial system as P x = ω Q x.
///
/// Rows are the fourth-order φ̄ equation at j = 2..N−2 and the second-order
/// Ω̄ equation at j = 1..N−1.  Clamped conditions at both ends — φ̄, Dφ̄, Ω̄
/// at the wall; at the axis Dφ̄ = 0 is replaced by D²φ̄ = 0 when |n| = 1,
/// since there φ̄ ~ r·(analytic in r²) is odd — are eliminated, leaving a
/// square pencil of order 2N−4.
pub fn assemble_bd(params: &FlowParams, grid: &CollocationGrid) -> Result<BdPencil> {
    if params.n == 0 || params.alpha == 0.0 {
        return Err(Error::Assembly("radial reference system needs n != 0 and alpha != 0".into()));
    }
    let n_deg = grid.n_poly();
    let n1 = grid.len();
    if n_deg < 8 {
        return Err(Error::Assembly("radial reference system needs a degree >= 8 grid".into()));
    }
    let (al, nf) = (params.alpha, params.n as f64);
    let iu = Complex64::new(0.0, 1.0 / params.re);
    let size = 2 * n_deg - 4;
    let mut rows = Rows::new(size, n1);

    for (row, j) in (2..=n_deg - 2).enumerate() {
        let r = grid.y[j];
        let ops = node_ops(al, nf, r);
        let u = 1.0 - r * r;
        let d = nf * nf + al * al * r * r;
        for (k, &c) in ops.t.iter().enumerate() {
            rows.add(Side::Q, row, 0, grid, k, j, re(c));
            rows.add(Side::P, row, 0, grid, k, j, re(al * u * c));
            rows.add(Side::P, row, 1, grid, k, j, -iu * 2.0 * al * nf * c);
        }
        rows.add(Side::P, row, 0, grid, 0, j, re(4.0 * al * nf * nf / d));
        for (k, &c) in ops.t2.iter().enumerate() {
            rows.add(Side::P, row, 0, grid, k, j, iu * c);
        }
    }
    for (k2, j) in (1..=n_deg - 1).enumerate() {
        let row = n_deg - 3 + k2;
        let r = grid.y[j];
        let ops = node_ops(al, nf, r);
        let u = 1.0 - r * r;
        let d = nf * nf + al * al * r * r;
        rows.add(Side::Q, row, 1, grid, 0, j, re(1.0));
        rows.add(Side::P, row, 1, grid, 0, j, re(al * u));
        for (k, &c) in ops.s.iter().enumerate() {
            rows.add(Side::P, row, 1, grid, k, j, iu * c);
        }
        rows.add(Side::P, row, 0, grid, 0, j, re(2.0 * nf / d));
        for (k, &c) in ops.t.iter().enumerate() {
            rows.add(Side::P, row, 0, grid, k, j, iu * 2.0 * al * nf / (d * d) * c);
        }
    }

    let e = |idx: usize| {
        let mut v = DVector::<f64>::zeros(n1);
        v[idx] = 1.0;
        v
    };
    let d_row = |order: usize, j: usize| {
        DVector::<f64>::from_fn(n1, |k, _| grid.d[order - 1][(j, k)])
    };
    let axis_deriv = if params.n.abs() == 1 { d_row(2, n_deg) } else { d_row(1, n_deg) };
    let phi_constraints = [e(0), d_row(1, 0), e(n_deg), axis_deriv];
    let r_phi = reduction_map(n1, &phi_constraints, &[0, 1, n_deg, n_deg - 1])?;
    let om_constraints = [e(0), e(n_deg)];
    let r_om = reduction_map(n1, &om_constraints, &[0, n_deg])?;
    let recovery = block_recovery(r_phi, r_om, n1);
    Ok(BdPencil(reduce(rows, recovery, ModeCase::General, size, grid)?))
}

/// Axis-aligned rectangle in the complex frequency plane.
#[derive(Clone, Copy, Debug)]
pub struct Region {
    /// (min, max) of Re ω.
    pub re: (f64, f64),
    /// (min, max) of Im ω.
    pub im: (f64, f64),
}

impl Region {
    pub fn contains(&self, z: Complex64) -> bool {
        self.re.0 <= z.re && z.re <= self.re.1 && self.im.0 <= z.im && z.im <= self.im.1
    }
}

/// One eigenvalue of the first spectrum matched to its nearest neighbour in
/// the second.
#[derive(Clone, Copy, Debug)]
pub struct MatchedPair {
    pub present: Complex64,
    pub reference: Complex64,
    pub deviation: f64,
}

#[derive(Clone, Debug)]
pub struct ComparisonReport {
    /// Matches for every first-spectrum eigenvalue inside the region.
    pub pairs: Vec<MatchedPair>,
    /// Largest matched deviation; 0 when nothing falls in the region.
    pub max_deviation: f64,
    /// First-spectrum eigenvalues inside the region.
    pub present_count: usize,
    /// Second-spectrum eigenvalues inside the region.
    pub reference_count: usize,
}

/// Nearest-neighbour comparison of two spectra over a rectangle.
///
/// Each first-spectrum eigenvalue inside the region is paired with the
/// closest second-spectrum eigenvalue anywhere in the plane, so a partner
/// sitting just outside the window still counts as agreement.
pub fn compare_spectra(
    present: &Spectrum,
    reference: &Spectrum,
    region: &Region,
) -> Result<ComparisonReport> {
    if !(region.re.0 < region.re.1 && region.im.0 < region.im.1) {
        return Err(Error::Params(format!(
            "degenerate comparison region {:?}/{:?}",
            region.re, region.im
        )));
    }
    if reference.modes.is_empty() {
        return Err(Error::Params("reference spectrum is empty".into()));
    }
    let mut pairs = Vec::new();
    for m in &present.modes {
        if !region.contains(m.omega) {
            continue;
        }
        let nearest = reference
            .modes
            .iter()
            .map(|r| r.omega)
            .min_by(|a, b| {
                (a - m.omega).norm().partial_cmp(&(b - m.omega).norm()).expect("finite")
            })
            .expect("nonempty reference");
        pairs.push(MatchedPair {
            present: m.omega,
            reference: nearest,
            deviation: (nearest - m.omega).norm(),
        });
    }
    let max_deviation = pairs.iter().map(|p| p.deviation).fold(0.0_f64, f64::max);
    let reference_count = reference.modes.iter().filter(|m| region.contains(m.omega)).count();
    Ok(ComparisonReport { max_deviation, present_count: pairs.len(), reference_count, pairs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::assemble;
    use crate::eig::solve_qz;
    use crate::grid::barycentric_eval;

    fn present_spectrum(alpha: f64, n: i32, r_e: f64, n_poly: usize) -> (Spectrum, CollocationGrid) {
        let params = FlowParams::new(alpha, n, r_e, n_poly).unwrap();
        let grid =
            CollocationGrid::build(GridSpec::new(n_poly, params.resolve_mapping()).unwrap())
                .unwrap();
        let pencil = assemble(&params, &grid).unwrap();
        (solve_qz(&pencil).unwrap(), grid)
    }

    fn bd_spectrum(alpha: f64, n: i32, r_e: f64, n_poly: usize) -> (Spectrum, CollocationGrid) {
        let params = FlowParams::new(alpha, n, r_e, n_poly).unwrap();
        let grid = radial_grid(n_poly).unwrap();
        let pencil = assemble_bd(&params, &grid).unwrap();
        (solve_qz(&pencil).unwrap(), grid)
    }

    #[test]
    fn rejects_axisymmetric_and_axially_uniform_input() {
        let grid = radial_grid(16).unwrap();
        let p0 = FlowParams::new(1.0, 0, 1000.0, 16).unwrap();
        assert!(assemble_bd(&p0, &grid).is_err());
        let pa = FlowParams::new(0.0, 1, 1000.0, 16).unwrap();
        assert!(assemble_bd(&pa, &grid).is_err());
    }

    #[test]
    fn pencil_is_square_of_expected_order() {
        let grid = radial_grid(32).unwrap();
        let params = FlowParams::new(1.0, 1, 3000.0, 32).unwrap();
        let pencil = assemble_bd(&params, &grid).unwrap();
        assert_eq!(pencil.size(), 60);
        assert_eq!(pencil.p().nrows(), 60);
        assert_eq!(pencil.q().ncols(), 60);
    }

    #[test]
    fn least_decaying_mode_matches_analytic_formulation() {
        let (spectrum, _) = bd_spectrum(1.0, 1, 3000.0, 60);
        let expect = Complex64::new(0.9114655676232, -0.041275644694);
        let omega = spectrum.modes[0].omega;
        assert!(
            (omega - expect).norm() < 1e-8,
            "radial solver gave {omega}, expected {expect}"
        );
    }

    #[test]
    fn five_least_decaying_modes_agree_across_formulations() {
        let (present, _) = present_spectrum(1.0, 1, 3000.0, 47);
        let (bd, _) = bd_spectrum(1.0, 1, 3000.0, 60);
        for m in present.modes.iter().take(5) {
            let nearest = bd
                .modes
                .iter()
                .map(|x| (x.omega - m.omega).norm())
                .fold(f64::MAX, f64::min);
            assert!(nearest < 1e-8, "mode {} off by {nearest:.2e}", m.omega);
        }
    }

    #[test]
    fn eigenvector_is_radial_power_times_analytic_unknown() {
        let (present, pgrid) = present_spectrum(1.0, 1, 3000.0, 47);
        let (bd, rgrid) = bd_spectrum(1.0, 1, 3000.0, 60);
        let target = present.modes[0].omega;
        let bmode = bd
            .modes
            .iter()
            .min_by(|a, b| {
                (a.omega - target).norm().partial_cmp(&(b.omega - target).norm()).unwrap()
            })
            .unwrap();
        // φ̄(r) should equal −i r^{|n|} φ(y = r²) up to one complex scale.
        let predicted: Vec<Complex64> = (0..rgrid.len())
            .map(|j| {
                let r = rgrid.y[j];
                let xi = pgrid.spec.mapping.xi_of_y(r * r);
                let phi = barycentric_eval(&pgrid.xi, present.modes[0].phi.as_slice(), xi);
                -Complex64::i() * r * phi
            })
            .collect();
        let jstar = (0..rgrid.len())
            .max_by(|&a, &b| bmode.phi[a].norm().partial_cmp(&bmode.phi[b].norm()).unwrap())
            .unwrap();
        let scale = bmode.phi[jstar] / predicted[jstar];
        let peak = (0..rgrid.len()).map(|j| bmode.phi[j].norm()).fold(0.0_f64, f64::max);
        for j in 0..rgrid.len() {
            let diff = (bmode.phi[j] - scale * predicted[j]).norm();
            assert!(diff < 1e-6 * peak, "node {j}: residual {:.2e}", diff / peak);
        }
    }

    #[test]
    fn identical_spectra_report_zero_deviation() {
        let (bd, _) = bd_spectrum(1.0, 1, 2000.0, 32);
        let region = Region { re: (-10.0, 10.0), im: (-10.0, 10.0) };
        let report = compare_spectra(&bd, &bd, &region).unwrap();
        assert!(report.present_count > 0);
        assert_eq!(report.present_count, report.reference_count);
        assert_eq!(report.max_deviation, 0.0);
    }

    #[test]
    fn degenerate_region_is_rejected() {
        let (bd, _) = bd_spectrum(1.0, 1, 2000.0, 32);
        let region = Region { re: (1.0, 1.0), im: (-1.0, 0.0) };
        assert!(compare_spectra(&bd, &bd, &region).is_err());
    }

    #[test]
    fn agreement_regime_has_tiny_matched_deviation() {
        let (present, _) = present_spectrum(1.0, 1, 3000.0, 47);
        let (bd, _) = bd_spectrum(1.0, 1, 3000.0, 60);
        let region = Region { re: (0.0, 1.0), im: (-0.12, 0.0) };
        let report = compare_spectra(&present, &bd, &region).unwrap();
        assert!(report.present_count >= 3, "only {} modes in window", report.present_count);
        assert!(
            report.max_deviation < 1e-8,
            "deviation {:.2e} in the converged regime",
            report.max_deviation
        );
    }
}
