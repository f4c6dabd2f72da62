//! Discrete pencils P x = ω Q x for the three wavenumber cases.
//!
//! Unknowns are nodal values of the analytic pair (φ, Ω) — or (ψ₁, ψ₂) when
//! both wavenumbers vanish.  Wall conditions are eliminated: the wall value
//! and wall slope of φ and the wall value of Ω are expressed through the
//! interior unknowns, so the pencil never carries boundary rows.
//!
//! Axis treatment: the axis node sits at y = 0 exactly, so every y-multiplied
//! operator coefficient drops out of a governing row collocated there — the
//! row *is* the first regularity condition.  The third condition (the
//! y-derivative of the fourth-order equation at the axis) is appended as its
//! own row.  To keep each diagonal block square when the two equations
//! decouple, the fourth-order equation gives up its two wall-adjacent
//! collocation rows and the second-order equation none.

use crate::coeffs::{CoeffSet, WaveNumbers};
use crate::grid::CollocationGrid;
use crate::{Error, FlowParams, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Which reduced system a wavenumber pair selects.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeCase {
    /// n ≠ 0: coupled fourth/second-order system in (φ, Ω).
    General,
    /// n = 0, α ≠ 0: decoupled fourth- and second-order equations in (φ, Ω).
    AxisymmetricFinite,
    /// n = 0, α = 0: diffusion pair in (ψ₁, ψ₂).
    AxisymmetricZero,
}

impl ModeCase {
    pub fn classify(alpha: f64, n: i32) -> ModeCase {
        if n != 0 {
            ModeCase::General
        } else if alpha != 0.0 {
            ModeCase::AxisymmetricFinite
        } else {
            ModeCase::AxisymmetricZero
        }
    }
}

/// Linear map from reduced unknowns back to the two full node vectors.
#[derive(Clone, Debug)]
pub struct Recovery {
    /// (len_a + len_b) × size; rows ordered [variable A nodes, variable B nodes].
    map: DMatrix<f64>,
    pub len_a: usize,
}

impl Recovery {
    fn new(map: DMatrix<f64>, len_a: usize) -> Recovery {
        Recovery { map, len_a }
    }

    /// Full matrix, promoted to complex for pencil reduction.
    fn complex(&self) -> DMatrix<Complex64> {
        self.map.map(|x| Complex64::new(x, 0.0))
    }

    /// Expand a reduced vector into (A-variable nodes, B-variable nodes).
    pub fn recover(&self, reduced: &DVector<Complex64>) -> (DVector<Complex64>, DVector<Complex64>) {
        let full = self.complex() * reduced;
        let a = DVector::from_fn(self.len_a, |i, _| full[i]);
        let b = DVector::from_fn(full.len() - self.len_a, |i, _| full[self.len_a + i]);
        (a, b)
    }
}

/// Generalized eigenvalue pencil with its recovery map and provenance.
#[derive(Clone, Debug)]
pub struct Pencil {
    pub p: DMatrix<Complex64>,
    pub q: DMatrix<Complex64>,
    pub size: usize,
    pub recovery: Recovery,
    pub case: ModeCase,
    pub grid: CollocationGrid,
}

/// Wall condition rows over full node vectors; replace to model boundaries
/// other than the clamped no-slip wall.
#[derive(Clone, Debug)]
pub struct WallRows {
    /// Row asserting the wall value of the fourth-order variable.
    pub phi_value: DVector<f64>,
    /// Row asserting its wall slope.
    pub phi_slope: DVector<f64>,
    /// Row asserting the wall value of the second-order variable.
    pub omega_value: DVector<f64>,
}

impl WallRows {
    /// No-slip wall: φ(1) = 𝒟φ(1) = Ω(1) = 0.
    pub fn clamped(grid: &CollocationGrid) -> WallRows {
        let n1 = grid.len();
        let mut value = DVector::zeros(n1);
        value[0] = 1.0;
        let slope = DVector::from_fn(n1, |k, _| grid.d[0][(0, k)]);
        WallRows { phi_value: value.clone(), phi_slope: slope, omega_value: value }
    }
}

/// Solve the given homogeneous constraint rows for the `solved` node indices,
/// returning the (n_nodes × n_kept) expansion matrix whose range satisfies
/// every constraint.
pub(crate) fn reduction_map(n_nodes: usize, constraints: &[DVector<f64>], solved: &[usize]) -> Result<DMatrix<f64>> {
    let m = constraints.len();
    assert_eq!(m, solved.len(), "one solved index per constraint");
    let kept: Vec<usize> = (0..n_nodes).filter(|k| !solved.contains(k)).collect();
    let mut a = DMatrix::<f64>::zeros(m, m);
    let mut c = DMatrix::<f64>::zeros(m, kept.len());
    for (i, row) in constraints.iter().enumerate() {
        for (j, &s) in solved.iter().enumerate() {
            a[(i, j)] = row[s];
        }
        for (j, &k) in kept.iter().enumerate() {
            c[(i, j)] = -row[k];
        }
    }
    let x = a
        .lu()
        .solve(&c)
        .ok_or_else(|| Error::Assembly("wall condition rows are singular in the solved unknowns".into()))?;
    let mut r = DMatrix::<f64>::zeros(n_nodes, kept.len());
    for (j, &k) in kept.iter().enumerate() {
        r[(k, j)] = 1.0;
    }
    for (i, &s) in solved.iter().enumerate() {
        for j in 0..kept.len() {
            r[(s, j)] = x[(i, j)];
        }
    }
    Ok(r)
}

/// Term accumulator: adds c·D^order[j, :] (D⁰ = identity) into a row's block.
pub(crate) struct Rows {
    p: DMatrix<Complex64>,
    q: DMatrix<Complex64>,
    n1: usize,
}

#[derive(Clone, Copy)]
pub(crate) enum Side {
    P,
    Q,
}

impl Rows {
    pub(crate) fn new(n_rows: usize, n1: usize) -> Rows {
        Rows { p: DMatrix::zeros(n_rows, 2 * n1), q: DMatrix::zeros(n_rows, 2 * n1), n1 }
    }

    pub(crate) fn add(&mut self, side: Side, row: usize, block: usize, grid: &CollocationGrid, order: usize, j: usize, c: Complex64) {
        if c == Complex64::ZERO {
            return;
        }
        let mat = match side {
            Side::P => &mut self.p,
            Side::Q => &mut self.q,
        };
        let off = block * self.n1;
        if order == 0 {
            mat[(row, off + j)] += c;
        } else {
            let d = &grid.d[order - 1];
            for k in 0..self.n1 {
                mat[(row, off + k)] += c * d[(j, k)];
            }
        }
    }
}

pub(crate) fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Assemble the pencil for any wavenumber pair with clamped wall conditions.
pub fn assemble(params: &FlowParams, grid: &CollocationGrid) -> Result<Pencil> {
    let walls = WallRows::clamped(grid);
    match ModeCase::classify(params.alpha, params.n) {
        ModeCase::General => assemble_general(params, grid, &walls),
        ModeCase::AxisymmetricFinite => assemble_axisym(params, grid, &walls),
        ModeCase::AxisymmetricZero => assemble_zero(params, grid),
    }
}

/// Coupled case, n ≠ 0.  2N−1 unknowns: φ at nodes 2..N, Ω at nodes 1..N.
///
/// Row budget: three axis rows (both governing equations collocated at y = 0
/// plus the derivative condition) mean the interior gives up two rows.  Both
/// come from the fourth-order equation, which keeps the system square at
/// α = 0 where it decouples from the second-order block — and measures
/// slightly better on wall-mode accuracy than shorting the second-order
/// block instead.
pub fn assemble_general(params: &FlowParams, grid: &CollocationGrid, walls: &WallRows) -> Result<Pencil> {
    if params.n == 0 {
        return Err(Error::Assembly("coupled assembly needs n != 0".into()));
    }
    let n_deg = grid.n_poly();
    let n1 = grid.len();
    let wn = WaveNumbers::new(params.alpha, params.n)?;
    let cs = CoeffSet::new(wn)?;
    let (al, nf, lf) = (params.alpha, params.n as f64, wn.ell as f64);
    let iu = Complex64::new(0.0, 1.0 / params.re);
    let size = 2 * n_deg - 1;
    let mut rows = Rows::new(size, n1);
    let mut r = 0usize;

    // Fourth-order equation: interior nodes 3..N−1, then the axis node.
    let mut phi_nodes: Vec<usize> = (3..n_deg).collect();
    phi_nodes.push(n_deg);
    for &j in &phi_nodes {
        let y = grid.y[j];
        let u = 1.0 - y;
        let d = wn.d(y);
        let d2 = wn.d2(y);
        let g = |i: usize| cs.eval_g(i, y);
        // ω-side: [−α²g₁ + g₂𝒟 + 4yd³𝒟²]φ − 2αnd²Ω
        let q_phi = [re(-al * al * g(1)), re(g(2)), re(4.0 * y * d.powi(3))];
        let q_om0 = re(-2.0 * al * nf * d * d);
        for (k, &c) in q_phi.iter().enumerate() {
            rows.add(Side::Q, r, 0, grid, k, j, c);
        }
        rows.add(Side::Q, r, 1, grid, 0, j, q_om0);
        // Advection αU·(ω-side) + shear 8αd²n² (U_y = −1 folded in).
        for (k, &c) in q_phi.iter().enumerate() {
            rows.add(Side::P, r, 0, grid, k, j, re(al * u) * c);
        }
        rows.add(Side::P, r, 1, grid, 0, j, re(al * u) * q_om0);
        rows.add(Side::P, r, 0, grid, 0, j, re(8.0 * al * d * d * nf * nf));
        // Viscous terms.
        rows.add(Side::P, r, 0, grid, 0, j, iu * re(al.powi(4) * g(3)));
        rows.add(Side::P, r, 0, grid, 1, j, iu * re(-8.0 * al * al * g(4)));
        rows.add(Side::P, r, 0, grid, 2, j, iu * re(g(5)));
        rows.add(Side::P, r, 0, grid, 3, j, iu * re(8.0 * y * (g(2) + 4.0 * d.powi(3))));
        rows.add(Side::P, r, 0, grid, 4, j, iu * re(16.0 * y * y * d.powi(3)));
        rows.add(Side::P, r, 1, grid, 0, j, iu * re(-8.0 * al.powi(3) * nf * d2));
        rows.add(Side::P, r, 1, grid, 1, j, iu * re(-8.0 * al.powi(3) * nf * 2.0 * d * y));
        r += 1;
    }

    // Axis derivative of the fourth-order equation (third regularity row).
    {
        let j = n_deg;
        let g = |i: usize| cs.eval_g(i, 0.0);
        let q_phi = [re(-al.powi(4) * g(8)), re(al * al * g(9)), re(g(10))];
        let q_om = [re(-4.0 * al.powi(3) * nf.powi(3)), re(-2.0 * al * nf.powi(5))];
        for (k, &c) in q_phi.iter().enumerate() {
            rows.add(Side::Q, r, 0, grid, k, j, c);
            rows.add(Side::P, r, 0, grid, k, j, re(al) * c);
        }
        for (k, &c) in q_om.iter().enumerate() {
            rows.add(Side::Q, r, 1, grid, k, j, c);
            rows.add(Side::P, r, 1, grid, k, j, re(al) * c);
        }
        rows.add(Side::P, r, 0, grid, 0, j, re(al.powi(3) * g(11)));
        rows.add(Side::P, r, 0, grid, 1, j, re(-4.0 * al * nf.powi(6) * lf));
        rows.add(Side::P, r, 1, grid, 0, j, re(2.0 * al * al * nf.powi(5)));
        rows.add(Side::P, r, 0, grid, 0, j, iu * re(al.powi(6) * g(12)));
        rows.add(Side::P, r, 0, grid, 1, j, iu * re(al.powi(4) * g(13)));
        rows.add(Side::P, r, 0, grid, 2, j, iu * re(-al * al * g(14)));
        rows.add(Side::P, r, 0, grid, 3, j, iu * re(g(15)));
        rows.add(Side::P, r, 1, grid, 0, j, iu * re(-8.0 * al.powi(5) * nf * (lf - 1.0)));
        rows.add(Side::P, r, 1, grid, 1, j, iu * re(-8.0 * al.powi(3) * nf.powi(3) * (lf + 3.0)));
        r += 1;
    }

    // Second-order equation: every non-wall node.
    for j in 1..=n_deg {
        let y = grid.y[j];
        let u = 1.0 - y;
        let d = wn.d(y);
        let d2 = wn.d2(y);
        let g = |i: usize| cs.eval_g(i, y);
        rows.add(Side::Q, r, 1, grid, 0, j, re(d * d));
        // Shear coupling 2nd²U_y with U_y = −1, advection, viscous pieces.
        rows.add(Side::P, r, 0, grid, 0, j, re(-2.0 * nf * d * d) + iu * re(2.0 * al.powi(3) * nf * g(6)));
        rows.add(Side::P, r, 0, grid, 1, j, iu * re(-4.0 * al * nf * (d2 + (lf + 3.0) * d)));
        rows.add(Side::P, r, 0, grid, 2, j, iu * re(-8.0 * al * nf * y * d));
        rows.add(Side::P, r, 1, grid, 0, j, re(al * u * d * d) + iu * re(-al * al * g(7)));
        rows.add(Side::P, r, 1, grid, 1, j, iu * re(4.0 * d * ((lf + 1.0) * d + nf * nf)));
        rows.add(Side::P, r, 1, grid, 2, j, iu * re(4.0 * y * d * d));
        r += 1;
    }
    debug_assert_eq!(r, size);

    finish(rows, grid, walls, ModeCase::General, size)
}

/// Decoupled case, n = 0 and α ≠ 0.  Same unknown layout as the coupled case.
pub fn assemble_axisym(params: &FlowParams, grid: &CollocationGrid, walls: &WallRows) -> Result<Pencil> {
    if params.n != 0 || params.alpha == 0.0 {
        return Err(Error::Assembly("axisymmetric assembly needs n = 0, alpha != 0".into()));
    }
    let n_deg = grid.n_poly();
    let n1 = grid.len();
    let al = params.alpha;
    let iu = Complex64::new(0.0, 1.0 / params.re);
    let size = 2 * n_deg - 1;
    let mut rows = Rows::new(size, n1);
    let mut r = 0usize;

    let mut phi_nodes: Vec<usize> = (3..n_deg).collect();
    phi_nodes.push(n_deg);
    for &j in &phi_nodes {
        let y = grid.y[j];
        let u = 1.0 - y;
        // (ω − αU)(8𝒟 + 4y𝒟² − α²)φ = iRe⁻¹(16y²𝒟⁴ + 96y𝒟³ + (96 − 8α²y)𝒟² − 16α²𝒟 + α⁴)φ
        let q_phi = [re(-al * al), re(8.0), re(4.0 * y)];
        for (k, &c) in q_phi.iter().enumerate() {
            rows.add(Side::Q, r, 0, grid, k, j, c);
            rows.add(Side::P, r, 0, grid, k, j, re(al * u) * c);
        }
        rows.add(Side::P, r, 0, grid, 0, j, iu * re(al.powi(4)));
        rows.add(Side::P, r, 0, grid, 1, j, iu * re(-16.0 * al * al));
        rows.add(Side::P, r, 0, grid, 2, j, iu * re(96.0 - 8.0 * al * al * y));
        rows.add(Side::P, r, 0, grid, 3, j, iu * re(96.0 * y));
        rows.add(Side::P, r, 0, grid, 4, j, iu * re(16.0 * y * y));
        r += 1;
    }

    // Axis derivative of the fourth-order equation:
    // (ω − α)(12𝒟² − α²𝒟)φ = α(α² − 8𝒟)φ + iRe⁻¹(192𝒟³ − 24α²𝒟² + α⁴𝒟)φ
    {
        let j = n_deg;
        let q_phi = [re(0.0), re(-al * al), re(12.0)];
        for (k, &c) in q_phi.iter().enumerate() {
            rows.add(Side::Q, r, 0, grid, k, j, c);
            rows.add(Side::P, r, 0, grid, k, j, re(al) * c);
        }
        rows.add(Side::P, r, 0, grid, 0, j, re(al.powi(3)));
        rows.add(Side::P, r, 0, grid, 1, j, re(-8.0 * al));
        rows.add(Side::P, r, 0, grid, 1, j, iu * re(al.powi(4)));
        rows.add(Side::P, r, 0, grid, 2, j, iu * re(-24.0 * al * al));
        rows.add(Side::P, r, 0, grid, 3, j, iu * re(192.0));
        r += 1;
    }

    // (ω − αU)Ω = iRe⁻¹(4y𝒟² + 8𝒟 − α²)Ω at every non-wall node.
    for j in 1..=n_deg {
        let y = grid.y[j];
        let u = 1.0 - y;
        rows.add(Side::Q, r, 1, grid, 0, j, re(1.0));
        rows.add(Side::P, r, 1, grid, 0, j, re(al * u) + iu * re(-al * al));
        rows.add(Side::P, r, 1, grid, 1, j, iu * re(8.0));
        rows.add(Side::P, r, 1, grid, 2, j, iu * re(4.0 * y));
        r += 1;
    }
    debug_assert_eq!(r, size);

    finish(rows, grid, walls, ModeCase::AxisymmetricFinite, size)
}

/// Doubly-zero case.  2N unknowns: ψ₁ and ψ₂ at nodes 1..N; only the wall
/// values are constrained (ψ₁(1) = ψ₂(1) = 0).
pub fn assemble_zero(params: &FlowParams, grid: &CollocationGrid) -> Result<Pencil> {
    if params.n != 0 || params.alpha != 0.0 {
        return Err(Error::Assembly("zero-wavenumber assembly needs alpha = n = 0".into()));
    }
    let n_deg = grid.n_poly();
    let n1 = grid.len();
    let iu = Complex64::new(0.0, 4.0 / params.re);
    let size = 2 * n_deg;
    let mut rows = Rows::new(size, n1);
    let mut r = 0usize;
    // ωψ = 4iRe⁻¹(y𝒟² + c𝒟)ψ with c = 1 for ψ₁, c = 2 for ψ₂.
    for (block, c1) in [(0usize, 1.0), (1usize, 2.0)] {
        for j in 1..=n_deg {
            let y = grid.y[j];
            rows.add(Side::Q, r, block, grid, 0, j, re(1.0));
            rows.add(Side::P, r, block, grid, 1, j, iu * re(c1));
            rows.add(Side::P, r, block, grid, 2, j, iu * re(y));
            r += 1;
        }
    }
    debug_assert_eq!(r, size);

    let n_nodes = grid.len();
    let mut value = DVector::zeros(n_nodes);
    value[0] = 1.0;
    let r_a = reduction_map(n_nodes, &[value.clone()], &[0])?;
    let r_b = r_a.clone();
    let recovery = block_recovery(r_a, r_b, n_nodes);
    reduce(rows, recovery, ModeCase::AxisymmetricZero, size, grid)
}

/// Shared tail for the two (φ, Ω) cases: build recovery from the wall rows,
/// reduce, and package.
fn finish(
    rows: Rows,
    grid: &CollocationGrid,
    walls: &WallRows,
    case: ModeCase,
    size: usize,
) -> Result<Pencil> {
    let n_nodes = grid.len();
    let r_phi = reduction_map(n_nodes, &[walls.phi_value.clone(), walls.phi_slope.clone()], &[0, 1])?;
    let r_om = reduction_map(n_nodes, &[walls.omega_value.clone()], &[0])?;
    let recovery = block_recovery(r_phi, r_om, n_nodes);
    reduce(rows, recovery, case, size, grid)
}

pub(crate) fn block_recovery(r_a: DMatrix<f64>, r_b: DMatrix<f64>, n_nodes: usize) -> Recovery {
    let size = r_a.ncols() + r_b.ncols();
    let mut map = DMatrix::<f64>::zeros(2 * n_nodes, size);
    map.view_mut((0, 0), (n_nodes, r_a.ncols())).copy_from(&r_a);
    map.view_mut((n_nodes, r_a.ncols()), (n_nodes, r_b.ncols())).copy_from(&r_b);
    Recovery::new(map, n_nodes)
}

pub(crate) fn reduce(rows: Rows, mut recovery: Recovery, case: ModeCase, size: usize, grid: &CollocationGrid) -> Result<Pencil> {
    let rc = recovery.complex();
    let mut p = &rows.p * &rc;
    let mut q = &rows.q * &rc;
    debug_assert_eq!(p.nrows(), size);
    debug_assert_eq!(p.ncols(), size);
    let col_scale = equilibrate(&mut p, &mut q);
    for (j, &s) in col_scale.iter().enumerate() {
        for i in 0..recovery.map.nrows() {
            recovery.map[(i, j)] *= s;
        }
    }
    Ok(Pencil { p, q, size, recovery, case, grid: grid.clone() })
}

/// Ruiz equilibration of the pencil: alternately scale rows and columns of
/// the stacked pair toward unit ∞-norm.  Diagonal scalings leave the
/// eigenvalues untouched, but without them the fourth-derivative rows (norms
/// ~ n⁶N⁸) swamp the backward error of the small rows and columns in the QZ
/// sweep, costing digits that grow with n and N.  Returns the accumulated
/// column scale, which the recovery map must absorb.
pub(crate) fn equilibrate(p: &mut DMatrix<Complex64>, q: &mut DMatrix<Complex64>) -> Vec<f64> {
    let (nr, nc) = (p.nrows(), p.ncols());
    let mut col = vec![1.0f64; nc];
    for _ in 0..6 {
        for i in 0..nr {
            let mut peak = 0.0f64;
            for j in 0..nc {
                peak = peak.max(p[(i, j)].norm()).max(q[(i, j)].norm());
            }
            if peak > 0.0 {
                let s = Complex64::from(1.0 / peak.sqrt());
                for j in 0..nc {
                    p[(i, j)] *= s;
                    q[(i, j)] *= s;
                }
            }
        }
        for j in 0..nc {
            let mut peak = 0.0f64;
            for i in 0..nr {
                peak = peak.max(p[(i, j)].norm()).max(q[(i, j)].norm());
            }
            if peak > 0.0 {
                let s = 1.0 / peak.sqrt();
                col[j] *= s;
                let sc = Complex64::from(s);
                for i in 0..nr {
                    p[(i, j)] *= sc;
                    q[(i, j)] *= sc;
                }
            }
        }
    }
    col
}
