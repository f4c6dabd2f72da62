//! Radial coefficient families of the y-form operators.
//!
//! Every variable coefficient in the coupled (φ, Ω) system is a short
//! polynomial in z = α²y whose integer coefficients depend only on n² and
//! ℓ = |n| − 1.  They are tabulated once per wavenumber pair and evaluated by
//! Horner's rule, so assembly never recomputes the ℓ-arithmetic per node.

use crate::{Error, Result};

/// Wavenumber pair (α, n) with the derived radial order ℓ = |n| − 1.
#[derive(Clone, Copy, Debug)]
pub struct WaveNumbers {
    pub alpha: f64,
    pub n: i32,
    /// |n| − 1; meaningful only when n ≠ 0 (the coupled system).
    pub ell: i32,
}

impl WaveNumbers {
    pub fn new(alpha: f64, n: i32) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::Params(format!("alpha must be finite and >= 0, got {alpha}")));
        }
        Ok(WaveNumbers { alpha, n, ell: n.abs() - 1 })
    }

    /// d = n² + α²y.
    pub fn d(&self, y: f64) -> f64 {
        (self.n * self.n) as f64 + self.alpha * self.alpha * y
    }

    /// d₂ = (ℓ+1)d − 2α²y.
    pub fn d2(&self, y: f64) -> f64 {
        (self.ell + 1) as f64 * self.d(y) - 2.0 * self.alpha * self.alpha * y
    }
}

/// (d, d₂) at a node; requires n ≠ 0 or α ≠ 0 so that d > 0 away from misuse.
pub fn eval_d_family(wn: &WaveNumbers, y: f64) -> (f64, f64) {
    (wn.d(y), wn.d2(y))
}

/// The fifteen g-coefficients for one (α, n): g₁..g₇ are polynomials in
/// z = α²y of degree ≤ 4, g₈..g₁₅ are constants (axis values used by the
/// derivative-regularity condition).
#[derive(Clone, Debug)]
pub struct CoeffSet {
    pub wn: WaveNumbers,
    /// poly[i] holds the z-coefficients of g_{i+1}, low order first.
    poly: [[f64; 5]; 7],
    /// scalars[i] = g_{i+8}.
    scalars: [f64; 8],
}

impl CoeffSet {
    pub fn new(wn: WaveNumbers) -> Result<Self> {
        if wn.n == 0 {
            return Err(Error::Params("coefficient family is defined for n != 0".into()));
        }
        let l = wn.ell as i64;
        let n2 = (wn.n as i64).pow(2);
        let n4 = n2 * n2;
        let n6 = n4 * n2;
        let f = |v: i64| v as f64;

        let g1 = [f(n6 + 2 * (l + 1) * n4), f(n2 * (3 * n2 + 4 * (l + 1))), f(3 * n2 + 2 * (l + 1)), 1.0, 0.0];
        let g2 = [f(4 * (l + 2) * n6), f(4 * n4 * (3 * l + 5)), f(4 * n2 * (3 * l + 4)), f(4 * (l + 1)), 0.0];
        let g3 = [
            f(n2 * (l.pow(4) + 8 * l.pow(3) + 26 * l * l + 32 * l + 13)),
            f(3 * l.pow(4) + 20 * l.pow(3) + 50 * l * l + 36 * l + 3),
            f(3 * l * l + 10 * l + 7),
            1.0,
            0.0,
        ];
        let g4 = [
            f(n4 * (l.pow(3) + 6 * l * l + 11 * l + 6)),
            f(n2 * (3 * l.pow(3) + 15 * l * l + 21 * l + 5)),
            f(3 * l.pow(3) + 12 * l * l + 13 * l + 4),
            f(l + 1),
            0.0,
        ];
        let g5 = [
            f(8 * n6 * (2 * l * l + 10 * l + 12)),
            f(8 * n4 * (5 * l * l + 22 * l + 21)),
            f(8 * n2 * (3 * l * l + 12 * l + 9)),
            f(-8 * n2),
            -8.0,
        ];
        let g6 = [f(n2 + 2 * (l + 1)), 1.0, 0.0, 0.0, 0.0];
        let g7 = [f(n2 * (l * l + 4 * l + 7)), f(2 * (l * l + 3 * l + 2)), 1.0, 0.0, 0.0];

        let scalars = [
            f(n2 * (3 * n2 + 4 * (l + 1))),                       // g8
            f(n4 * (2 * (5 * l + 9) - n2)),                       // g9
            f(4 * n6 * (l + 3)),                                  // g10
            f(n4 * (n2 + 2 * l + 18)),                            // g11
            f(3 * l.pow(4) + 20 * l.pow(3) + 50 * l * l + 36 * l + 3), // g12
            f(n2 * (l.pow(4) - 16 * l.pow(3) - 94 * l * l - 136 * l - 27)), // g13
            f(8 * n4 * (l.pow(3) + l * l - 11 * l - 15)),         // g14
            f(16 * n6 * (l * l + 7 * l + 12)),                    // g15
        ];

        Ok(CoeffSet { wn, poly: [g1, g2, g3, g4, g5, g6, g7], scalars })
    }

    /// g_idx at radial position y, idx ∈ 1..=15.
    pub fn eval_g(&self, idx: usize, y: f64) -> f64 {
        assert!((1..=15).contains(&idx), "g-index out of range: {idx}");
        if idx >= 8 {
            return self.scalars[idx - 8];
        }
        let z = self.wn.alpha * self.wn.alpha * y;
        self.poly[idx - 1].iter().rev().fold(0.0, |acc, &c| acc * z + c)
    }
}

/// Convenience wrapper building nothing: evaluates g_idx for a wavenumber pair.
pub fn eval_g(set: &CoeffSet, idx: usize, y: f64) -> f64 {
    set.eval_g(idx, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(alpha: f64, n: i32) -> CoeffSet {
        CoeffSet::new(WaveNumbers::new(alpha, n).unwrap()).unwrap()
    }

    /// Direct transcription of the defining formulas, powers and all.
    fn naive_g(alpha: f64, n: i32, idx: usize, y: f64) -> f64 {
        let l = (n.abs() - 1) as f64;
        let n2 = (n * n) as f64;
        let (n4, n6) = (n2 * n2, n2 * n2 * n2);
        let a2y = alpha * alpha * y;
        let (a4y2, a6y3, a8y4) = (a2y * a2y, a2y.powi(3), a2y.powi(4));
        match idx {
            1 => n6 + 2.0 * (l + 1.0) * n4 + n2 * (3.0 * n2 + 4.0 * (l + 1.0)) * a2y
                + (3.0 * n2 + 2.0 * (l + 1.0)) * a4y2 + a6y3,
            2 => 4.0 * (l + 2.0) * n6 + 4.0 * n4 * (3.0 * l + 5.0) * a2y
                + 4.0 * n2 * (3.0 * l + 4.0) * a4y2 + 4.0 * (l + 1.0) * a6y3,
            3 => n2 * (l.powi(4) + 8.0 * l.powi(3) + 26.0 * l * l + 32.0 * l + 13.0)
                + (3.0 * l.powi(4) + 20.0 * l.powi(3) + 50.0 * l * l + 36.0 * l + 3.0) * a2y
                + (3.0 * l * l + 10.0 * l + 7.0) * a4y2 + a6y3,
            4 => n4 * (l.powi(3) + 6.0 * l * l + 11.0 * l + 6.0)
                + n2 * (3.0 * l.powi(3) + 15.0 * l * l + 21.0 * l + 5.0) * a2y
                + (3.0 * l.powi(3) + 12.0 * l * l + 13.0 * l + 4.0) * a4y2 + (l + 1.0) * a6y3,
            5 => 8.0 * (n6 * (2.0 * l * l + 10.0 * l + 12.0)
                + n4 * (5.0 * l * l + 22.0 * l + 21.0) * a2y
                + n2 * (3.0 * l * l + 12.0 * l + 9.0) * a4y2
                - n2 * a6y3 - a8y4),
            6 => n2 + 2.0 * (l + 1.0) + a2y,
            7 => n2 * (l * l + 4.0 * l + 7.0) + 2.0 * (l * l + 3.0 * l + 2.0) * a2y + a4y2,
            8 => n2 * (3.0 * n2 + 4.0 * (l + 1.0)),
            9 => n4 * (2.0 * (5.0 * l + 9.0) - n2),
            10 => 4.0 * n6 * (l + 3.0),
            11 => n4 * (n2 + 2.0 * l + 18.0),
            12 => 3.0 * l.powi(4) + 20.0 * l.powi(3) + 50.0 * l * l + 36.0 * l + 3.0,
            13 => n2 * (l.powi(4) - 16.0 * l.powi(3) - 94.0 * l * l - 136.0 * l - 27.0),
            14 => 8.0 * n4 * (l.powi(3) + l * l - 11.0 * l - 15.0),
            15 => 16.0 * n6 * (l * l + 7.0 * l + 12.0),
            _ => unreachable!(),
        }
    }

    #[test]
    fn ell_follows_azimuthal_order() {
        assert_eq!(WaveNumbers::new(1.0, 1).unwrap().ell, 0);
        assert_eq!(WaveNumbers::new(1.0, -3).unwrap().ell, 2);
        assert_eq!(WaveNumbers::new(0.5, 7).unwrap().ell, 6);
    }

    #[test]
    fn rejects_bad_alpha() {
        assert!(WaveNumbers::new(-1.0, 1).is_err());
        assert!(WaveNumbers::new(f64::NAN, 1).is_err());
        assert!(CoeffSet::new(WaveNumbers::new(1.0, 0).unwrap()).is_err());
    }

    #[test]
    fn hand_checked_values() {
        assert_eq!(set(1.0, 1).eval_g(6, 0.0), 3.0);
        assert_eq!(set(0.0, 1).eval_g(7, 0.33), 7.0);
        assert_eq!(set(2.0, 1).eval_g(10, 0.5), 12.0);
        assert_eq!(set(0.0, 2).eval_g(1, 1.0), 128.0);
        // d-family: d = n² + α²y, d₂ = (ℓ+1)d − 2α²y
        let wn = WaveNumbers::new(2.0, 3).unwrap();
        let (d, d2) = eval_d_family(&wn, 0.25);
        assert_eq!(d, 10.0);
        assert_eq!(d2, 28.0);
    }

    #[test]
    fn axis_values_match_polynomials() {
        // g8, g9, g10 are the axis values driving the derivative-regularity
        // condition; they tie back to g1, g2 through the formulas' structure.
        for n in [1, 2, 5, -4] {
            let s = set(1.3, n);
            assert_eq!(s.eval_g(8, 0.0), naive_g(1.3, n, 8, 0.0));
            assert_eq!(s.eval_g(10, 0.0), naive_g(1.3, n, 10, 0.0));
        }
    }

    #[test]
    fn low_wavenumber_g5_positive_at_axis() {
        // 8n⁶·2(ℓ+2)(ℓ+3) > 0: the leading fourth-derivative weight never
        // degenerates at α = 0.
        for n in 1..=12 {
            assert!(set(0.0, n).eval_g(5, 0.7) > 0.0);
        }
    }

    proptest! {
        #[test]
        fn horner_matches_naive(
            alpha in 0.0f64..5.0,
            y in 0.0f64..1.0,
            n in prop::sample::select(vec![1i32, 2, 3, 5, 8, 12, -1, -6]),
            idx in 1usize..=15,
        ) {
            let h = set(alpha, n).eval_g(idx, y);
            let e = naive_g(alpha, n, idx, y);
            let scale = 1.0 + e.abs();
            prop_assert!((h - e).abs() <= 1e-12 * scale, "g{idx}: {h} vs {e}");
        }

        #[test]
        fn sign_of_azimuthal_order_is_immaterial(
            alpha in 0.0f64..5.0,
            y in 0.0f64..1.0,
            n in 1i32..12,
            idx in 1usize..=15,
        ) {
            prop_assert_eq!(set(alpha, n).eval_g(idx, y), set(alpha, -n).eval_g(idx, y));
        }

        #[test]
        fn d_dominates_azimuthal_square(alpha in 0.0f64..5.0, y in 0.0f64..1.0, n in 1i32..12) {
            let wn = WaveNumbers::new(alpha, n).unwrap();
            prop_assert!(wn.d(y) >= (n * n) as f64);
        }
    }
}
