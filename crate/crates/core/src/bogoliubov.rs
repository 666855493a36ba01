//! Rotation coefficients of the degenerate two-mode Fock subspaces.
//!
//! Mixing the two cavity modes by an angle theta acts on the N-excitation
//! subspace |m, N-m> as a real orthogonal matrix
//!
//! ```text
//! B[m][n](theta) = sum_l  Bbar(N, m, n, l) cos(theta)^(N-m-n+2l) sin(theta)^(m+n-2l)
//! ```
//!
//! with scalar weights built from factorial ratios. Literal factorials
//! overflow f64 at N = 21, so the weights are evaluated as
//! sign * exp(log-gamma combination) with the sign tracked separately. The
//! per-subspace builder is the streaming unit: anything that only needs one
//! N at a time can construct [`BbarSubspace`] on demand instead of holding
//! the full table (the table is O(N_max^4) scalars, fine at desk scale but
//! worth streaming past N_max ~ 80).

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::TwoFloat;

/// ln(k!) for k = 0..=n_max as compensated two-float values.
///
/// Small factorials are exact in f64 so their logs start correctly rounded;
/// the rest accumulates ln(k) with a compensated sum. Keeping the low parts
/// lets the eight-term combination in the rotation weights cancel to about
/// 1e-15 in the log, which the orthogonality bound at N = 30 needs.
pub(crate) fn ln_factorials(n_max: usize) -> Vec<TwoFloat> {
    let mut t = Vec::with_capacity(n_max + 1);
    let mut fact = 1.0f64;
    let mut acc = TwoFloat::default();
    t.push(acc);
    for k in 1..=n_max {
        if k <= 18 {
            // k! <= 18! is exactly representable.
            fact *= k as f64;
            acc = TwoFloat::from_f64(fact.ln());
        } else {
            acc = acc.add_f64((k as f64).ln());
        }
        t.push(acc);
    }
    t
}

#[inline]
fn check_indices(n_exc: usize, m: usize, n: usize, l: usize) -> Result<()> {
    if m > n_exc || n > n_exc {
        return Err(Error::InvalidIndex(format!(
            "bbar: m = {m}, n = {n} outside 0..={n_exc}"
        )));
    }
    let l_min = (m + n).saturating_sub(n_exc);
    let l_max = m.min(n);
    if l < l_min || l > l_max {
        return Err(Error::InvalidIndex(format!(
            "bbar: l = {l} outside {l_min}..={l_max} for (N, m, n) = ({n_exc}, {m}, {n})"
        )));
    }
    Ok(())
}

fn bbar_from_lnfact(lnf: &[TwoFloat], n_exc: usize, m: usize, n: usize, l: usize) -> f64 {
    let sign = if (m - l) % 2 == 0 { 1.0 } else { -1.0 };
    let log = lnf[m]
        .add(lnf[n])
        .add(lnf[n_exc - m])
        .add(lnf[n_exc - n])
        .half()
        .add(lnf[l].neg())
        .add(lnf[m - l].neg())
        .add(lnf[n - l].neg())
        .add(lnf[n_exc + l - m - n].neg());
    sign * log.exp()
}

/// Scalar weight Bbar(N, m, n, l); exact up to log-gamma rounding.
pub fn bbar(n_exc: usize, m: usize, n: usize, l: usize) -> Result<f64> {
    check_indices(n_exc, m, n, l)?;
    let lnf = ln_factorials(n_exc);
    Ok(bbar_from_lnfact(&lnf, n_exc, m, n, l))
}

/// All Bbar weights of one excitation subspace, stored ragged over the valid
/// l window of each (m, n).
#[derive(Debug, Clone)]
pub struct BbarSubspace {
    n_exc: usize,
    offsets: Vec<u32>,
    values: Vec<f64>,
}

impl BbarSubspace {
    pub fn build(n_exc: usize) -> Self {
        let lnf = ln_factorials(n_exc);
        let side = n_exc + 1;
        let mut offsets = Vec::with_capacity(side * side + 1);
        let mut values = Vec::new();
        offsets.push(0);
        for m in 0..side {
            for n in 0..side {
                let l_min = (m + n).saturating_sub(n_exc);
                let l_max = m.min(n);
                for l in l_min..=l_max {
                    values.push(bbar_from_lnfact(&lnf, n_exc, m, n, l));
                }
                offsets.push(values.len() as u32);
            }
        }
        Self {
            n_exc,
            offsets,
            values,
        }
    }

    pub fn n_excitation(&self) -> usize {
        self.n_exc
    }

    #[inline]
    pub fn l_min(&self, m: usize, n: usize) -> usize {
        (m + n).saturating_sub(self.n_exc)
    }

    #[inline]
    pub fn get(&self, m: usize, n: usize, l: usize) -> Result<f64> {
        check_indices(self.n_exc, m, n, l)?;
        Ok(self.get_unchecked(m, n, l))
    }

    #[inline]
    pub(crate) fn get_unchecked(&self, m: usize, n: usize, l: usize) -> f64 {
        let cell = m * (self.n_exc + 1) + n;
        let base = self.offsets[cell] as usize;
        self.values[base + (l - self.l_min(m, n))]
    }
}

/// Immutable cache of every subspace up to `n_total_max`, built in parallel.
#[derive(Debug)]
pub struct BbarTable {
    subspaces: Vec<BbarSubspace>,
}

impl BbarTable {
    pub fn build(n_total_max: usize) -> Self {
        let subspaces = (0..=n_total_max)
            .into_par_iter()
            .map(BbarSubspace::build)
            .collect();
        Self { subspaces }
    }

    pub fn n_total_max(&self) -> usize {
        self.subspaces.len() - 1
    }

    pub fn subspace(&self, n_exc: usize) -> &BbarSubspace {
        &self.subspaces[n_exc]
    }
}

/// Rotation matrix of the N-excitation subspace at mixing angle theta.
#[derive(Debug, Clone)]
pub struct BMatrix {
    pub n_excitation: usize,
    pub theta: f64,
    pub entries: Array2<f64>,
}

/// Assemble B(N, theta) from a prebuilt subspace.
///
/// Trig powers come from prefix tables so 0^0 = 1 exactly and surviving
/// terms stay exact at theta = 0 or theta = pi/2.
pub fn b_matrix_from(sub: &BbarSubspace, theta: f64) -> BMatrix {
    let n_exc = sub.n_excitation();
    let side = n_exc + 1;
    let (s, c) = theta.sin_cos();
    let mut cos_pow = vec![1.0; side + 1];
    let mut sin_pow = vec![1.0; side + 1];
    for k in 1..=side {
        cos_pow[k] = cos_pow[k - 1] * c;
        sin_pow[k] = sin_pow[k - 1] * s;
    }
    let mut entries = Array2::zeros((side, side));
    for m in 0..side {
        for n in 0..side {
            let l_min = sub.l_min(m, n);
            let l_max = m.min(n);
            let mut acc = 0.0;
            for l in l_min..=l_max {
                acc += sub.get_unchecked(m, n, l)
                    * cos_pow[n_exc + 2 * l - m - n]
                    * sin_pow[m + n - 2 * l];
            }
            entries[(m, n)] = acc;
        }
    }
    BMatrix {
        n_excitation: n_exc,
        theta,
        entries,
    }
}

/// Rotation matrix of the N-excitation subspace, building its own weights.
pub fn b_matrix(n_exc: usize, theta: f64) -> BMatrix {
    b_matrix_from(&BbarSubspace::build(n_exc), theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bbar_corner_values() {
        for n_exc in [0, 1, 2, 7, 19, 33] {
            assert!((bbar(n_exc, 0, 0, 0).unwrap() - 1.0).abs() < 1e-14);
        }
        assert!((bbar(2, 1, 1, 0).unwrap() + 1.0).abs() < 1e-14);
        // Hand expansion for N = 1.
        assert!((bbar(1, 0, 1, 0).unwrap() - 1.0).abs() < 1e-14);
        assert!((bbar(1, 1, 0, 0).unwrap() + 1.0).abs() < 1e-14);
        assert!((bbar(1, 1, 1, 1).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn bbar_rejects_bad_indices() {
        assert!(bbar(3, 4, 0, 0).is_err());
        assert!(bbar(3, 1, 1, 2).is_err());
        assert!(bbar(4, 3, 3, 1).is_err()); // l below max(0, m+n-N) = 2
    }

    /// Exact-rational oracle: Bbar^2 is a ratio of factorial products, which
    /// big integers evaluate exactly.
    fn bbar_bigint(n_exc: u64, m: u64, n: u64, l: u64) -> f64 {
        use num_bigint::BigUint;
        use num_traits::ToPrimitive;
        let fact = |k: u64| -> BigUint {
            (1..=k.max(1)).product::<BigUint>().max(BigUint::from(1u32))
        };
        let num = fact(m) * fact(n) * fact(n_exc - m) * fact(n_exc - n);
        let den = fact(l) * fact(m - l) * fact(n - l) * fact(n_exc + l - m - n);
        let den2 = &den * &den;
        let ratio = num.to_f64().unwrap() / den2.to_f64().unwrap();
        let sign = if (m - l) % 2 == 0 { 1.0 } else { -1.0 };
        sign * ratio.sqrt()
    }

    #[test]
    fn bbar_matches_exact_rational_oracle() {
        let cases = [
            (30u64, 15u64, 15u64, 10u64),
            (30, 20, 14, 8),
            (24, 12, 12, 3),
            (40, 19, 25, 11),
            (12, 6, 6, 1),
        ];
        for (n_exc, m, n, l) in cases {
            let got = bbar(n_exc as usize, m as usize, n as usize, l as usize).unwrap();
            let exact = bbar_bigint(n_exc, m, n, l);
            assert!(
                (got - exact).abs() <= 1e-10 * exact.abs(),
                "({n_exc},{m},{n},{l}): {got} vs {exact}"
            );
        }
    }

    #[test]
    fn n1_matrix_closed_form() {
        let theta = 0.437;
        let b = b_matrix(1, theta);
        let (s, c) = theta.sin_cos();
        assert!((b.entries[(0, 0)] - c).abs() < 1e-15);
        assert!((b.entries[(0, 1)] - s).abs() < 1e-15);
        assert!((b.entries[(1, 0)] + s).abs() < 1e-15);
        assert!((b.entries[(1, 1)] - c).abs() < 1e-15);
    }

    #[test]
    fn theta_zero_is_identity() {
        // Off-diagonals vanish exactly (0^positive = 0); the diagonal is 1
        // up to log-gamma rounding.
        for n_exc in [0usize, 1, 3, 9, 24] {
            let b = b_matrix(n_exc, 0.0);
            for m in 0..=n_exc {
                for n in 0..=n_exc {
                    if m == n {
                        assert!((b.entries[(m, n)] - 1.0).abs() < 2e-13, "N = {n_exc}");
                    } else {
                        assert_eq!(b.entries[(m, n)], 0.0, "N = {n_exc}");
                    }
                }
            }
        }
    }

    #[test]
    fn half_pi_is_signed_antidiagonal() {
        let n_exc = 9;
        let b = b_matrix(n_exc, std::f64::consts::FRAC_PI_2);
        for m in 0..=n_exc {
            for n in 0..=n_exc {
                let v = b.entries[(m, n)];
                if n == n_exc - m {
                    assert!((v.abs() - 1.0).abs() < 1e-12, "({m},{n}) = {v}");
                } else {
                    assert!(v.abs() < 1e-13, "({m},{n}) = {v}");
                }
            }
        }
    }

    #[test]
    fn orthogonality_up_to_n30() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x0b0);
        let table = BbarTable::build(30);
        for n_exc in 0..=30usize {
            for _ in 0..20 {
                let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let b = b_matrix_from(table.subspace(n_exc), theta);
                let side = n_exc + 1;
                let mut worst = 0.0f64;
                for i in 0..side {
                    for j in 0..side {
                        let dot: f64 = (0..side)
                            .map(|k| b.entries[(k, i)] * b.entries[(k, j)])
                            .sum();
                        let expect = if i == j { 1.0 } else { 0.0 };
                        worst = worst.max((dot - expect).abs());
                    }
                }
                assert!(worst < 1e-11, "N = {n_exc}, theta = {theta}: {worst}");
            }
        }
    }

    #[test]
    fn composition_adds_angles() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x0b1);
        for n_exc in [1usize, 4, 11, 20] {
            let sub = BbarSubspace::build(n_exc);
            for _ in 0..5 {
                let t1: f64 = rng.gen_range(-2.0..2.0);
                let t2: f64 = rng.gen_range(-2.0..2.0);
                let b1 = b_matrix_from(&sub, t1);
                let b2 = b_matrix_from(&sub, t2);
                let b12 = b_matrix_from(&sub, t1 + t2);
                let side = n_exc + 1;
                for i in 0..side {
                    for j in 0..side {
                        let prod: f64 = (0..side)
                            .map(|k| b1.entries[(i, k)] * b2.entries[(k, j)])
                            .sum();
                        assert!(
                            (prod - b12.entries[(i, j)]).abs() < 1e-10,
                            "N = {n_exc} ({i},{j})"
                        );
                    }
                }
            }
        }
    }
}
