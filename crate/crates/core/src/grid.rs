//! Chebyshev–Gauss–Lobatto collocation in the squared radius y = r².
//!
//! Nodes ξ_j = cos(πj/N) descend from ξ = 1 (wall, y = 1) to ξ = −1 (axis,
//! y = 0).  Two maps take ξ to y: the affine y = (1+ξ)/2, and the clustering
//! map y = (e^{a(1+ξ)/2} − 1)/(e^a − 1) which crowds nodes toward the axis for
//! short-wavelength or high-Re runs.  Differentiation matrices act in y up to
//! fourth order; the quadrature weights integrate over y on [0, 1].

use crate::{Error, Result};
use nalgebra::DMatrix;

/// Radial coordinate map ξ ∈ [−1, 1] → y ∈ [0, 1].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mapping {
    /// y = (1 + ξ)/2.
    Linear,
    /// y = (e^{a(1+ξ)/2} − 1)/(e^a − 1), a > 0; larger a packs nodes near y = 0.
    Stretched { a: f64 },
}

impl Mapping {
    /// Default selection: affine for moderate parameters, exponential with
    /// a = 2 (low azimuthal orders) or a = 3 (high) otherwise.
    pub fn auto(alpha: f64, n: i32, re: f64) -> Mapping {
        if alpha <= 3.0 && re <= 6000.0 {
            Mapping::Linear
        } else if n.abs() <= 5 {
            Mapping::Stretched { a: 2.0 }
        } else {
            Mapping::Stretched { a: 3.0 }
        }
    }

    pub fn y_of_xi(&self, xi: f64) -> f64 {
        match *self {
            Mapping::Linear => 0.5 * (1.0 + xi),
            Mapping::Stretched { a } => ((0.5 * a * (1.0 + xi)).exp() - 1.0) / (a.exp() - 1.0),
        }
    }

    pub fn xi_of_y(&self, y: f64) -> f64 {
        match *self {
            Mapping::Linear => 2.0 * y - 1.0,
            Mapping::Stretched { a } => (2.0 / a) * ((a.exp() - 1.0) * y + 1.0).ln() - 1.0,
        }
    }

    pub fn dy_dxi(&self, xi: f64) -> f64 {
        match *self {
            Mapping::Linear => 0.5,
            Mapping::Stretched { a } => 0.5 * a * (0.5 * a * (1.0 + xi)).exp() / (a.exp() - 1.0),
        }
    }

    /// d^kξ/dy^k for k = 1..4 at a node, computed from ξ to avoid cancellation:
    /// with c = e^a − 1 and E = e^{a(1+ξ)/2} = 1 + c·y,
    /// d^kξ/dy^k = (2/a)(−1)^{k−1}(k−1)!·(c/E)^k.
    fn xi_derivs(&self, xi: f64) -> [f64; 4] {
        match *self {
            Mapping::Linear => [2.0, 0.0, 0.0, 0.0],
            Mapping::Stretched { a } => {
                let c = a.exp() - 1.0;
                let r = c / (0.5 * a * (1.0 + xi)).exp();
                let s = 2.0 / a;
                [s * r, -s * r * r, 2.0 * s * r * r * r, -6.0 * s * r * r * r * r]
            }
        }
    }
}

/// Grid request: polynomial degree plus coordinate map.
#[derive(Clone, Copy, Debug)]
pub struct GridSpec {
    pub n_poly: usize,
    pub mapping: Mapping,
}

impl GridSpec {
    pub fn new(n_poly: usize, mapping: Mapping) -> Result<Self> {
        if n_poly < 8 {
            return Err(Error::Grid(format!("polynomial degree must be >= 8, got {n_poly}")));
        }
        if let Mapping::Stretched { a } = mapping {
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::Grid(format!("stretch parameter must be > 0, got {a}")));
            }
        }
        Ok(GridSpec { n_poly, mapping })
    }
}

/// Built collocation grid with differentiation and quadrature operators in y.
#[derive(Clone, Debug)]
pub struct CollocationGrid {
    pub spec: GridSpec,
    /// ξ_j = cos(πj/N), descending.
    pub xi: Vec<f64>,
    /// Mapped nodes; y[0] = 1 (wall), y[N] = 0 (axis), both exact.
    pub y: Vec<f64>,
    /// d[k−1] is the k-th y-derivative matrix, k = 1..4.
    pub d: [DMatrix<f64>; 4],
    /// Clenshaw–Curtis weights for ∫₀¹ f(y) dy ≈ Σ w_j f(y_j).
    pub w: Vec<f64>,
}

/// Gauss–Lobatto nodes cos(πj/N), j = 0..N, with exact ±symmetry.
pub fn gauss_lobatto(n_poly: usize) -> Result<Vec<f64>> {
    if n_poly < 1 {
        return Err(Error::Grid("need at least two nodes".into()));
    }
    let n = n_poly;
    let mut xi = vec![0.0; n + 1];
    for (j, x) in xi.iter_mut().enumerate() {
        *x = (std::f64::consts::PI * j as f64 / n as f64).cos();
    }
    // Enforce the analytic symmetry ξ_j = −ξ_{N−j} exactly.
    for j in 0..=n / 2 {
        xi[n - j] = -xi[j];
    }
    if n % 2 == 0 {
        xi[n / 2] = 0.0;
    }
    Ok(xi)
}

/// Nodes of a grid spec: (ξ, y) with exact endpoint values.
pub fn map_nodes(spec: &GridSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    let xi = gauss_lobatto(spec.n_poly)?;
    let mut y: Vec<f64> = xi.iter().map(|&x| spec.mapping.y_of_xi(x)).collect();
    // The axis node must be exactly 0: collocation rows evaluated there drop
    // every y-multiplied term identically, which is what regularises them.
    let n = spec.n_poly;
    y[0] = 1.0;
    y[n] = 0.0;
    Ok((xi, y))
}

/// Barycentric weights of the Gauss–Lobatto nodes (up to common scale):
/// (−1)^j, halved at both endpoints.
fn bary_weights(n_poly: usize) -> Vec<f64> {
    let n = n_poly;
    (0..=n)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n {
                0.5 * sign
            } else {
                sign
            }
        })
        .collect()
}

/// Differentiation matrices in ξ of orders 1..max_order via the barycentric
/// recursion D^{(m)}_{ij} = m·[(w_j/w_i)·D^{(m−1)}_{ii} − D^{(m−1)}_{ij}]/(ξ_i−ξ_j),
/// diagonals by the negative-sum trick.
fn xi_diff_matrices(xi: &[f64], max_order: usize) -> Vec<DMatrix<f64>> {
    let n1 = xi.len();
    let wb = bary_weights(n1 - 1);
    let mut out: Vec<DMatrix<f64>> = Vec::with_capacity(max_order);
    let mut prev = DMatrix::<f64>::identity(n1, n1);
    for m in 1..=max_order {
        let mut d = DMatrix::<f64>::zeros(n1, n1);
        for i in 0..n1 {
            let mut diag = 0.0;
            for j in 0..n1 {
                if i == j {
                    continue;
                }
                let v = m as f64 * ((wb[j] / wb[i]) * prev[(i, i)] - prev[(i, j)]) / (xi[i] - xi[j]);
                d[(i, j)] = v;
                diag -= v;
            }
            d[(i, i)] = diag;
        }
        out.push(d.clone());
        prev = d;
    }
    out
}

/// Differentiation matrices with respect to y, orders 1..4, by the chain rule:
/// D_y = ξ_y D_ξ, and for higher orders the Faà di Bruno expansion with the
/// node-wise derivatives of ξ(y).
pub fn diff_matrices(spec: &GridSpec, xi: &[f64]) -> [DMatrix<f64>; 4] {
    let n1 = xi.len();
    let dxi = xi_diff_matrices(xi, 4);
    let mut d = [
        DMatrix::<f64>::zeros(n1, n1),
        DMatrix::<f64>::zeros(n1, n1),
        DMatrix::<f64>::zeros(n1, n1),
        DMatrix::<f64>::zeros(n1, n1),
    ];
    for i in 0..n1 {
        let [x1, x2, x3, x4] = spec.mapping.xi_derivs(xi[i]);
        for j in 0..n1 {
            let (a1, a2, a3, a4) = (dxi[0][(i, j)], dxi[1][(i, j)], dxi[2][(i, j)], dxi[3][(i, j)]);
            d[0][(i, j)] = x1 * a1;
            d[1][(i, j)] = x1 * x1 * a2 + x2 * a1;
            d[2][(i, j)] = x1.powi(3) * a3 + 3.0 * x1 * x2 * a2 + x3 * a1;
            d[3][(i, j)] = x1.powi(4) * a4
                + 6.0 * x1 * x1 * x2 * a3
                + (4.0 * x1 * x3 + 3.0 * x2 * x2) * a2
                + x4 * a1;
        }
    }
    d
}

/// Clenshaw–Curtis weights on ξ ∈ [−1, 1] (they sum to 2).
fn clenshaw_curtis_xi(n_poly: usize) -> Vec<f64> {
    let n = n_poly;
    let mut w = vec![0.0; n + 1];
    let theta: Vec<f64> = (0..=n).map(|j| std::f64::consts::PI * j as f64 / n as f64).collect();
    if n % 2 == 0 {
        let end = 1.0 / (n * n - 1) as f64;
        w[0] = end;
        w[n] = end;
        for j in 1..n {
            let mut v = 1.0;
            for k in 1..n / 2 {
                v -= 2.0 * (2.0 * k as f64 * theta[j]).cos() / (4 * k * k - 1) as f64;
            }
            v -= (n as f64 * theta[j]).cos() / (n * n - 1) as f64;
            w[j] = 2.0 * v / n as f64;
        }
    } else {
        let end = 1.0 / (n * n) as f64;
        w[0] = end;
        w[n] = end;
        for j in 1..n {
            let mut v = 1.0;
            for k in 1..=(n - 1) / 2 {
                v -= 2.0 * (2.0 * k as f64 * theta[j]).cos() / (4 * k * k - 1) as f64;
            }
            w[j] = 2.0 * v / n as f64;
        }
    }
    w
}

/// Quadrature weights for ∫₀¹ f dy: Clenshaw–Curtis in ξ times dy/dξ.
pub fn quadrature_weights(spec: &GridSpec, xi: &[f64]) -> Vec<f64> {
    let wxi = clenshaw_curtis_xi(spec.n_poly);
    xi.iter().zip(wxi).map(|(&x, w)| w * spec.mapping.dy_dxi(x)).collect()
}

impl CollocationGrid {
    pub fn build(spec: GridSpec) -> Result<CollocationGrid> {
        let (xi, y) = map_nodes(&spec)?;
        let d = diff_matrices(&spec, &xi);
        let w = quadrature_weights(&spec, &xi);
        Ok(CollocationGrid { spec, xi, y, d, w })
    }

    pub fn n_poly(&self) -> usize {
        self.spec.n_poly
    }

    /// Number of nodes, N + 1.
    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// ∫₀¹ f dy for nodal samples.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.w.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    /// Cumulative integral F(y_j) = ∫₀^{y_j} f dy, exact for polynomial data,
    /// via the Chebyshev antiderivative of f(y(ξ))·y′(ξ).
    pub fn cumulative_integral(&self, f: &[f64]) -> Vec<f64> {
        let n = self.n_poly();
        let samples: Vec<f64> =
            self.xi.iter().zip(f).map(|(&x, &v)| v * self.spec.mapping.dy_dxi(x)).collect();
        let a = cheb_coeffs(&samples);
        // Antiderivative coefficients: B_k = (a_{k−1} − a_{k+1})/(2k), with the
        // k = 1 term seeing 2a₀ because the plain (unprimed) T₀ convention is
        // used throughout.
        let mut b = vec![0.0; n + 2];
        for k in 1..=n + 1 {
            let lo = if k == 1 { 2.0 * a[0] } else { a[k - 1] };
            let hi = if k + 1 <= n { a[k + 1] } else { 0.0 };
            b[k] = (lo - hi) / (2.0 * k as f64);
        }
        // Fix B_0 so the antiderivative vanishes at ξ = −1 (the axis).
        let mut at_axis = 0.0;
        for (k, bk) in b.iter().enumerate().skip(1) {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            at_axis += sign * bk;
        }
        b[0] = -at_axis;
        // Evaluate Σ B_k T_k(ξ_j) = Σ B_k cos(kθ_j).
        (0..=n)
            .map(|j| {
                let theta = std::f64::consts::PI * j as f64 / n as f64;
                b.iter().enumerate().map(|(k, bk)| bk * (k as f64 * theta).cos()).sum()
            })
            .collect()
    }
}

/// Chebyshev coefficients of the degree-N interpolant of nodal samples
/// (samples ordered by descending ξ): a_k = (2/(N c̄_k)) Σ″ f_j cos(πkj/N).
fn cheb_coeffs(samples: &[f64]) -> Vec<f64> {
    let n = samples.len() - 1;
    let mut a = vec![0.0; n + 1];
    for (k, ak) in a.iter_mut().enumerate() {
        let mut s = 0.0;
        for (j, &f) in samples.iter().enumerate() {
            let c = (std::f64::consts::PI * (k * j) as f64 / n as f64).cos();
            let scale = if j == 0 || j == n { 0.5 } else { 1.0 };
            s += scale * f * c;
        }
        let ck = if k == 0 || k == n { 2.0 } else { 1.0 };
        *ak = 2.0 * s / (ck * n as f64);
    }
    a
}

/// Barycentric evaluation of the interpolant through (ξ_j, v_j) at ξ = x.
/// Exact (returns the sample) when x coincides with a node.
pub fn barycentric_eval<T>(xi: &[f64], values: &[T], x: f64) -> T
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T> + std::ops::Div<f64, Output = T>,
{
    let wb = bary_weights(xi.len() - 1);
    let mut num = values[0] * 0.0;
    let mut den = 0.0;
    for ((&xj, &vj), &wj) in xi.iter().zip(values).zip(&wb) {
        let dx = x - xj;
        if dx.abs() < 1e-300 {
            return vj;
        }
        let c = wj / dx;
        num = num + vj * c;
        den += c;
    }
    num / den
}
