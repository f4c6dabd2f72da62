//! Closed-form machinery for the doubly-zero wavenumber modes: series
//! solutions of the two diffusion blocks, their truncated characteristic
//! polynomials, and the orthogonal-mode energy law.
//!
//! Both eigenfunction families are entire functions of λy with coefficients
//! 1/(k!)² (axial family) and 1/(k!(k+1)!) (azimuthal family); the wall
//! condition ψ(1) = 0 truncated at `kmax` terms is a real polynomial in λ
//! whose roots are the decay rates.  Everything here is independent of the
//! collocation solver, which makes the two paths cross-checkable.

use crate::grid::CollocationGrid;
use crate::linalg;
use crate::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Which diffusion block a mode belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StokesKind {
    /// Axial velocity block; series coefficients 1/(k!)².
    Psi1,
    /// Azimuthal block; series coefficients 1/(k!(k+1)!).
    Psi2,
}

impl StokesKind {
    /// Divisor taking the k-th series coefficient to the (k+1)-th.
    fn step(self, k: usize) -> f64 {
        match self {
            StokesKind::Psi1 => ((k + 1) * (k + 1)) as f64,
            StokesKind::Psi2 => ((k + 1) * (k + 2)) as f64,
        }
    }

    /// Inner-product weight at y: 1 for the axial block, y for the azimuthal.
    fn weight(self, y: f64) -> f64 {
        match self {
            StokesKind::Psi1 => 1.0,
            StokesKind::Psi2 => y,
        }
    }
}

/// One decaying mode: its rate λ (< 0), truncation order, and the scale that
/// makes (ψ, ψ) = 1 under the block's weighted inner product.
#[derive(Clone, Debug)]
pub struct StokesMode {
    pub kind: StokesKind,
    /// Decay rate; the temporal frequency is ω = 4iλ/Re.
    pub lambda: f64,
    pub kmax: usize,
    /// Multiplies the raw unit-leading-coefficient series.
    pub norm: f64,
}

fn check_kmax(kmax: usize) -> Result<()> {
    if !(2..=90).contains(&kmax) {
        return Err(Error::Params(format!("kmax = {kmax} outside the usable range 2..=90")));
    }
    Ok(())
}

/// Series coefficients c_0..c_kmax (c_0 = 1) by stable recurrence; explicit
/// factorials would overflow long before k = 90.
fn series_coeffs(kind: StokesKind, kmax: usize) -> Vec<f64> {
    let mut c = Vec::with_capacity(kmax + 1);
    c.push(1.0);
    for k in 0..kmax {
        let last = *c.last().unwrap();
        c.push(last / kind.step(k));
    }
    c
}

/// Real roots λ of the degree-kmax truncation of ψ(1) = 0, ascending in |λ|.
///
/// Two sources feed the root list.  A companion-matrix solve of the reversed
/// polynomial in μ = 1/λ (monic for free since c₀ = 1) delivers multiple
/// roots of degenerate truncations, but its unstructured backward error
/// drowns every root past the first once the coefficients span hundreds of
/// orders — the eigenvalues collapse into a noise annulus.  A sign-change
/// scan over λ ∈ [−160, 0) with bisection recovers all simple roots in the
/// physically resolved range regardless of degree.  Candidates from both are
/// polished by one Newton step, vetted against the cancellation floor of the
/// evaluated series, merged, and sorted.
pub fn char_roots(kind: StokesKind, kmax: usize) -> Result<Vec<f64>> {
    check_kmax(kmax)?;
    let c = series_coeffs(kind, kmax);

    let mut roots: Vec<f64> = Vec::new();
    let k = kmax;
    let mut comp = DMatrix::<Complex64>::zeros(k, k);
    for i in 1..k {
        comp[(i, i - 1)] = Complex64::ONE;
    }
    for i in 0..k {
        comp[(0, i)] = Complex64::from(-c[i + 1]);
    }
    let (mu, _) = linalg::zgeev(&comp)?;
    for m in mu {
        if m.norm() == 0.0 {
            continue;
        }
        let lam = 1.0 / m;
        if lam.im.abs() >= 1e-8 * lam.norm() || !lam.re.is_finite() {
            continue;
        }
        let lam = polish(&c, lam.re);
        if residual_ok(&c, lam) {
            roots.push(lam);
        }
    }

    // The scan step sits well under the tightest root gap (≈ 6 for the axial
    // family); scanned roots supersede nearby companion values.
    let eval = |x: f64| horner(&c, x).0;
    let step = 1.0;
    let mut prev = eval(0.0);
    let mut x_prev = 0.0f64;
    let mut x = -step;
    while x >= -160.0 {
        let here = eval(x);
        if prev.signum() != here.signum() && prev != 0.0 {
            let (mut lo, mut hi) = (x, x_prev);
            let mut flo = here;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let fm = eval(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            let lam = polish(&c, 0.5 * (lo + hi));
            if residual_ok(&c, lam) {
                roots.retain(|&r| (r - lam).abs() > 1e-5 * lam.abs());
                roots.push(lam);
            }
        }
        prev = here;
        x_prev = x;
        x -= step;
    }

    roots.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    Ok(roots)
}

/// Truncated series and its slope at λ by Horner's rule.
fn horner(c: &[f64], lam: f64) -> (f64, f64) {
    let mut p = 0.0f64;
    let mut dp = 0.0f64;
    for &ck in c.iter().rev() {
        dp = dp * lam + p;
        p = p * lam + ck;
    }
    (p, dp)
}

/// One Newton step; a vanishing slope (double root) or non-finite correction
/// leaves the input untouched.
fn polish(c: &[f64], lam: f64) -> f64 {
    let (p, dp) = horner(c, lam);
    let step = p / dp;
    if step.is_finite() {
        lam - step
    } else {
        lam
    }
}

/// A genuine root leaves |p| at the round-off floor of the alternating sum,
/// measured against Σ|c_k||λ|^k; spurious companion values sit orders above.
fn residual_ok(c: &[f64], lam: f64) -> bool {
    let scale: f64 = c.iter().rev().fold(0.0, |acc, &ck| acc * lam.abs() + ck);
    horner(c, lam).0.abs() < 1e-10 * scale
}

/// Partial sums of the mode's series at the given nodes.  Terms are generated
/// forward from t_0 = 1 via t_{k+1} = t_k·λy/step(k); the truncation must
/// leave the last term below 1e−16 of the largest partial sum seen.
pub fn eigenfunction(mode: &StokesMode, nodes: &[f64]) -> Result<Vec<f64>> {
    if mode.kmax < 40 {
        return Err(Error::Params(format!("kmax = {} too small for trusted series sums", mode.kmax)));
    }
    let mut out = Vec::with_capacity(nodes.len());
    for &y in nodes {
        let x = mode.lambda * y;
        let mut term = 1.0f64;
        let mut sum = 1.0f64;
        let mut peak = 1.0f64;
        for k in 0..mode.kmax {
            term *= x / mode.kind.step(k);
            sum += term;
            peak = peak.max(sum.abs());
        }
        if term.abs() >= 1e-16 * peak {
            return Err(Error::Series(format!(
                "series tail {:.2e} not negligible against peak {:.2e} at y = {y} (λ = {})",
                term.abs(),
                peak,
                mode.lambda
            )));
        }
        out.push(mode.norm * sum);
    }
    Ok(out)
}

/// The `count` least-decaying modes of a block, each normalized to unit
/// weighted norm by quadrature on the given grid.
pub fn modes(kind: StokesKind, kmax: usize, count: usize, grid: &CollocationGrid) -> Result<Vec<StokesMode>> {
    let roots = char_roots(kind, kmax)?;
    if roots.len() < count {
        return Err(Error::Series(format!(
            "only {} usable real roots at kmax = {kmax}, need {count}",
            roots.len()
        )));
    }
    let mut out = Vec::with_capacity(count);
    for &lambda in roots.iter().take(count) {
        let mut mode = StokesMode { kind, lambda, kmax, norm: 1.0 };
        let psi = eigenfunction(&mode, &grid.y)?;
        let wsq: Vec<f64> = grid.y.iter().zip(&psi).map(|(&y, &p)| kind.weight(y) * p * p).collect();
        mode.norm = 1.0 / grid.integrate(&wsq).sqrt();
        out.push(mode);
    }
    Ok(out)
}

/// Weighted inner products (ψ_j, ψ_k) by grid quadrature.  Normalized modes
/// of one block give the identity.
pub fn gram_matrix(modes: &[StokesMode], grid: &CollocationGrid) -> Result<DMatrix<f64>> {
    if modes.is_empty() {
        return Err(Error::Params("gram matrix needs at least one mode".into()));
    }
    let kind = modes[0].kind;
    if modes.iter().any(|m| m.kind != kind) {
        return Err(Error::Params("gram matrix mixes the two mode families".into()));
    }
    let psi: Vec<Vec<f64>> = modes.iter().map(|m| eigenfunction(m, &grid.y)).collect::<Result<_>>()?;
    let m = modes.len();
    let mut g = DMatrix::<f64>::zeros(m, m);
    for j in 0..m {
        for k in j..m {
            let prod: Vec<f64> =
                grid.y.iter().enumerate().map(|(i, &y)| kind.weight(y) * psi[j][i] * psi[k][i]).collect();
            let v = grid.integrate(&prod);
            g[(j, k)] = v;
            g[(k, j)] = v;
        }
    }
    Ok(g)
}

/// Energy of a superposition of normalized modes from both blocks:
/// E(t) = ½ Σ |a|² e^{2 (4λ/Re) t}, strictly decaying since every λ < 0.
pub fn energy_evolution(
    a1: &[f64],
    modes1: &[StokesMode],
    a2: &[f64],
    modes2: &[StokesMode],
    re: f64,
    t: f64,
) -> f64 {
    let sum = |a: &[f64], ms: &[StokesMode]| -> f64 {
        a.iter().zip(ms).map(|(&c, m)| c * c * (2.0 * (4.0 * m.lambda / re) * t).exp()).sum()
    };
    0.5 * (sum(a1, modes1) + sum(a2, modes2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridSpec, Mapping};

    // First zeros of the two relevant Bessel functions, frozen from an
    // independent multi-precision bisection.
    const J0_ZEROS: [f64; 7] = [
        2.4048255576957727686,
        5.5200781102863106496,
        8.653727912911012217,
        11.791534439014281614,
        14.930917708487785948,
        18.071063967910922543,
        21.211636629879258959,
    ];
    const J1_ZEROS: [f64; 7] = [
        3.8317059702075123156,
        7.0155866698156187535,
        10.173468135062722077,
        13.323691936314223032,
        16.470630050877632813,
        19.615858510468242021,
        22.760084380592771898,
    ];

    fn grid47() -> CollocationGrid {
        CollocationGrid::build(GridSpec::new(47, Mapping::Linear).unwrap()).unwrap()
    }

    #[test]
    fn series_coeffs_match_factorials_at_small_k() {
        let c1 = series_coeffs(StokesKind::Psi1, 5);
        let c2 = series_coeffs(StokesKind::Psi2, 5);
        for k in 0..=5usize {
            let f: f64 = (1..=k).map(|i| i as f64).product();
            let f1: f64 = (1..=k + 1).map(|i| i as f64).product();
            assert!((c1[k] - 1.0 / (f * f)).abs() < 1e-15 * c1[k]);
            assert!((c2[k] - 1.0 / (f * f1)).abs() < 1e-15 * c2[k]);
        }
    }

    #[test]
    fn double_root_of_the_quadratic_truncation() {
        // 1 + λ + λ²/4 has the double root −2; the slope vanishes there, so
        // the polish step must leave the companion value alone.
        let roots = char_roots(StokesKind::Psi1, 2).unwrap();
        assert_eq!(roots.len(), 2);
        for r in roots {
            assert!((r + 2.0).abs() < 1e-6, "root {r}");
        }
    }

    #[test]
    fn axial_roots_are_squared_bessel_zeros() {
        let roots = char_roots(StokesKind::Psi1, 90).unwrap();
        assert!((4.0 * roots[0] + J0_ZEROS[0] * J0_ZEROS[0]).abs() < 1e-12);
        for m in 0..3 {
            assert!((4.0 * roots[m] + J0_ZEROS[m] * J0_ZEROS[m]).abs() < 1e-9);
        }
    }

    #[test]
    fn azimuthal_roots_are_squared_bessel_zeros() {
        let roots = char_roots(StokesKind::Psi2, 90).unwrap();
        for m in 0..3 {
            assert!((4.0 * roots[m] + J1_ZEROS[m] * J1_ZEROS[m]).abs() < 1e-9);
        }
    }

    #[test]
    fn all_roots_negative_and_sorted() {
        for kind in [StokesKind::Psi1, StokesKind::Psi2] {
            let roots = char_roots(kind, 90).unwrap();
            assert!(roots.len() >= 7);
            for w in roots.windows(2) {
                assert!(w[0] < 0.0 && w[1] <= w[0]);
            }
        }
    }

    #[test]
    fn series_value_at_centre_is_the_norm() {
        let grid = grid47();
        let ms = modes(StokesKind::Psi1, 90, 1, &grid).unwrap();
        let v = eigenfunction(&ms[0], &[0.0]).unwrap();
        assert!((v[0] - ms[0].norm).abs() < 1e-15 * ms[0].norm.abs());
    }

    #[test]
    fn wall_value_vanishes_for_a_true_root() {
        let grid = grid47();
        for kind in [StokesKind::Psi1, StokesKind::Psi2] {
            let ms = modes(kind, 90, 3, &grid).unwrap();
            for m in &ms {
                let v = eigenfunction(m, &[1.0]).unwrap();
                assert!(v[0].abs() < 1e-12, "wall residue {:.2e}", v[0].abs());
            }
        }
    }

    #[test]
    fn tail_guard_trips_on_under_truncation() {
        let mode = StokesMode { kind: StokesKind::Psi1, lambda: -2000.0, kmax: 40, norm: 1.0 };
        assert!(matches!(eigenfunction(&mode, &[1.0]), Err(Error::Series(_))));
    }

    #[test]
    fn gram_matrices_are_identity() {
        let grid = grid47();
        for kind in [StokesKind::Psi1, StokesKind::Psi2] {
            let ms = modes(kind, 90, 5, &grid).unwrap();
            let g = gram_matrix(&ms, &grid).unwrap();
            for j in 0..5 {
                for k in 0..5 {
                    let want = if j == k { 1.0 } else { 0.0 };
                    assert!((g[(j, k)] - want).abs() < 1e-10, "G[{j},{k}] = {}", g[(j, k)]);
                }
            }
        }
    }

    #[test]
    fn gram_single_mode_is_one() {
        let grid = grid47();
        let ms = modes(StokesKind::Psi2, 90, 1, &grid).unwrap();
        let g = gram_matrix(&ms, &grid).unwrap();
        assert_eq!(g.nrows(), 1);
        assert!((g[(0, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixed_families_rejected() {
        let grid = grid47();
        let mut ms = modes(StokesKind::Psi1, 90, 2, &grid).unwrap();
        ms.extend(modes(StokesKind::Psi2, 90, 1, &grid).unwrap());
        assert!(gram_matrix(&ms, &grid).is_err());
    }

    #[test]
    fn energy_at_zero_counts_modes() {
        let grid = grid47();
        let m1 = modes(StokesKind::Psi1, 90, 3, &grid).unwrap();
        let m2 = modes(StokesKind::Psi2, 90, 2, &grid).unwrap();
        let e = energy_evolution(&[1.0; 3], &m1, &[1.0; 2], &m2, 3000.0, 0.0);
        assert!((e - 2.5).abs() < 1e-14);
    }

    #[test]
    fn energy_decays_monotonically() {
        let grid = grid47();
        let m1 = modes(StokesKind::Psi1, 90, 4, &grid).unwrap();
        let m2 = modes(StokesKind::Psi2, 90, 4, &grid).unwrap();
        let a = [0.3, 1.1, 0.0, 0.7];
        let mut last = f64::INFINITY;
        for i in 0..=100 {
            let e = energy_evolution(&a, &m1, &a, &m2, 3000.0, 2.0 * i as f64);
            assert!(e < last && e > 0.0);
            last = e;
        }
    }

    #[test]
    fn single_mode_energy_ratio_is_a_pure_exponential() {
        let grid = grid47();
        let m1 = modes(StokesKind::Psi1, 90, 1, &grid).unwrap();
        let e0 = energy_evolution(&[1.0], &m1, &[], &[], 3000.0, 0.0);
        let e100 = energy_evolution(&[1.0], &m1, &[], &[], 3000.0, 100.0);
        // Decay rate −j₀,₁²/3000 integrated over t = 100, frozen externally.
        let expect = 0.68007939459979623;
        assert!((e100 / e0 - expect).abs() < 1e-12);
    }

    #[test]
    fn collocation_eigenvector_matches_the_series() {
        use crate::assembly::assemble;
        use crate::eig::solve_qz;
        use crate::FlowParams;
        let grid = grid47();
        let params = FlowParams::new(0.0, 0, 3000.0, 47).unwrap();
        let spec = solve_qz(&assemble(&params, &grid).unwrap()).unwrap();
        let ms = modes(StokesKind::Psi1, 90, 1, &grid).unwrap();
        let target = Complex64::new(0.0, 4.0 * ms[0].lambda / 3000.0);
        let mode = spec
            .modes
            .iter()
            .min_by(|a, b| (a.omega - target).norm().total_cmp(&(b.omega - target).norm()))
            .unwrap();
        assert!((mode.omega - target).norm() < 1e-12);
        let series = eigenfunction(&ms[0], &grid.y).unwrap();
        // Scale the collocation vector to the series at its largest node.
        let top = (0..grid.len()).max_by(|&a, &b| mode.phi[a].norm().total_cmp(&mode.phi[b].norm())).unwrap();
        let scale = Complex64::from(series[top]) / mode.phi[top];
        let worst = (0..grid.len())
            .map(|j| (Complex64::from(series[j]) - scale * mode.phi[j]).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-9, "node deviation {worst:.2e}");
    }
}
