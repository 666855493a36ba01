//! Initial quantum states: single-mode Fock expansions, their two-mode
//! product, and the internal state of the atom.
//!
//! Coefficients are always produced by recurrences rather than factorial
//! formulas, then renormalized over the truncated window; the probability
//! captured by the window before renormalization is kept as metadata so
//! downstream normalization checks can account for it.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// How a mode coefficient vector was produced.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    Fock { n: usize },
    Coherent { alpha: C64 },
    SqueezedCoherent { alpha: C64, r: f64, phi_sq: f64 },
    /// Loaded or assembled directly; no generator metadata.
    Raw,
}

/// Fock-basis expansion of one cavity mode, normalized over its window.
#[derive(Debug, Clone)]
pub struct ModeCoeffs {
    amps: Vec<C64>,
    captured_weight: f64,
    generator: Generator,
}

impl ModeCoeffs {
    /// Photon-number amplitudes, unit-normalized over the window.
    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    /// Probability the window captured before renormalization.
    pub fn captured_weight(&self) -> f64 {
        self.captured_weight
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    /// Mean photon number of the normalized window.
    pub fn mean_photon(&self) -> f64 {
        mean_photon(self)
    }

    fn from_raw(
        mut amps: Vec<C64>,
        eps_trunc: f64,
        generator: Generator,
    ) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidParam("empty amplitude vector".into()));
        }
        if amps.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFiniteOverflow);
        }
        let captured: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
        if captured < 1.0 - eps_trunc {
            return Err(Error::CutoffTooSmall {
                captured,
                eps: eps_trunc,
            });
        }
        let scale = captured.sqrt().recip();
        for c in &mut amps {
            *c *= scale;
        }
        Ok(Self {
            amps,
            captured_weight: captured,
            generator,
        })
    }

    /// Wrap an externally supplied coefficient vector (no generator).
    ///
    /// The vector must already be normalized to within `eps_trunc`.
    pub fn from_vec(amps: Vec<C64>, eps_trunc: f64) -> Result<Self> {
        Self::from_raw(amps, eps_trunc, Generator::Raw)
    }
}

/// Number state |n> on a window of size `n_max + 1`.
pub fn fock_coeffs(n: usize, n_max: usize) -> Result<ModeCoeffs> {
    if n > n_max {
        return Err(Error::CutoffTooSmall {
            captured: 0.0,
            eps: 0.0,
        });
    }
    let mut amps = vec![C64::new(0.0, 0.0); n_max + 1];
    amps[n] = C64::new(1.0, 0.0);
    Ok(ModeCoeffs {
        amps,
        captured_weight: 1.0,
        generator: Generator::Fock { n },
    })
}

/// Coherent-state expansion on `0..=n_max`.
///
/// Built from c_0 = exp(-|alpha|^2/2) with c_{n+1} = c_n * alpha/sqrt(n+1),
/// which stays finite where the explicit factorial form overflows.
pub fn coherent_coeffs(alpha: C64, n_max: usize, eps_trunc: f64) -> Result<ModeCoeffs> {
    let mut amps = Vec::with_capacity(n_max + 1);
    let mut c = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    amps.push(c);
    for n in 0..n_max {
        c *= alpha / ((n + 1) as f64).sqrt();
        amps.push(c);
    }
    ModeCoeffs::from_raw(amps, eps_trunc, Generator::Coherent { alpha })
}

/// Squeezed coherent state: squeeze applied after displacement.
///
/// The coefficients solve the eigenvalue recurrence
///
/// ```text
/// cosh(r) sqrt(n+1) c_{n+1} + e^{i phi} sinh(r) sqrt(n) c_{n-1} - alpha c_n = 0
/// ```
///
/// seeded at n = 0 and renormalized over the window. The overall phase is
/// restored from the closed-form vacuum overlap so the vector matches the
/// operator-built state elementwise, not just up to a global phase. The mean
/// photon number of the result is |alpha cosh r - e^{i phi} alpha* sinh r|^2
/// + sinh^2 r.
pub fn squeezed_coherent_coeffs(
    alpha: C64,
    r: f64,
    phi_sq: f64,
    n_max: usize,
    eps_trunc: f64,
) -> Result<ModeCoeffs> {
    if r < 0.0 || !r.is_finite() {
        return Err(Error::InvalidParam(format!("squeeze factor r must be >= 0, got {r}")));
    }
    let ch = r.cosh();
    let sh = r.sinh();
    let phase = C64::new(0.0, phi_sq).exp();

    // Seed with 1 and rescale when the running pair grows too large; the
    // window is renormalized afterwards so only the shape matters here.
    let mut amps = Vec::with_capacity(n_max + 1);
    let mut prev = C64::new(0.0, 0.0);
    let mut cur = C64::new(1.0, 0.0);
    amps.push(cur);
    for n in 0..n_max {
        let next = (alpha * cur - phase * sh * (n as f64).sqrt() * prev)
            / (ch * ((n + 1) as f64).sqrt());
        if !next.re.is_finite() || !next.im.is_finite() {
            return Err(Error::NonFiniteOverflow);
        }
        prev = cur;
        cur = next;
        amps.push(cur);
        if cur.norm_sqr() > 1e200 {
            let s = cur.norm().recip();
            prev *= s;
            cur *= s;
            for c in &mut amps {
                *c *= s;
            }
        }
    }

    // Renormalize, then align the global phase with <0|S D|0>:
    // arg c_0 = Im(e^{-i phi} alpha^2 tanh(r) / 2).
    let weight: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
    if weight <= 0.0 || !weight.is_finite() {
        return Err(Error::NonFiniteOverflow);
    }
    // The seed fixed c_0 real positive; captured weight is measured against
    // the true tail, which the recurrence preserves relative to c_0. Rebuild
    // the true c_0 modulus from the closed form to report captured weight.
    let z = 0.5 * (C64::new(0.0, -phi_sq).exp() * alpha * alpha * C64::from(r.tanh()));
    let c0_exact_mod = (1.0 / ch).sqrt() * (-0.5 * alpha.norm_sqr() + z.re).exp();
    let c0_rel = amps[0].norm() / weight.sqrt();
    let captured = if c0_rel > 0.0 {
        (c0_exact_mod / c0_rel).powi(2)
    } else {
        // c_0 of a squeezed coherent state never vanishes, so reaching this
        // means the window normalization already swamped the seed; treat the
        // window as complete.
        1.0
    };
    if captured < 1.0 - eps_trunc {
        return Err(Error::CutoffTooSmall {
            captured,
            eps: eps_trunc,
        });
    }
    let rot = C64::new(0.0, z.im).exp() / weight.sqrt();
    for c in &mut amps {
        *c *= rot;
    }
    Ok(ModeCoeffs {
        amps,
        captured_weight: captured.min(1.0),
        generator: Generator::SqueezedCoherent { alpha, r, phi_sq },
    })
}

/// Mean photon number of a normalized coefficient vector.
pub fn mean_photon(m: &ModeCoeffs) -> f64 {
    m.amps
        .iter()
        .enumerate()
        .map(|(n, c)| n as f64 * c.norm_sqr())
        .sum()
}

/// Smallest total-excitation cutoff capturing `1 - eps_trunc` of the product
/// state's probability, accumulated over anti-diagonals.
pub fn choose_total_cutoff(a: &ModeCoeffs, b: &ModeCoeffs, eps_trunc: f64) -> Result<usize> {
    let window_product = a.captured_weight * b.captured_weight;
    if window_product < 1.0 - eps_trunc {
        return Err(Error::UnreachableTolerance {
            captured: window_product,
            eps: eps_trunc,
        });
    }
    let pa: Vec<f64> = a.amps.iter().map(|c| c.norm_sqr()).collect();
    let pb: Vec<f64> = b.amps.iter().map(|c| c.norm_sqr()).collect();
    let full = pa.len() + pb.len() - 2;
    let mut cum = 0.0;
    for n_total in 0..=full {
        let lo = n_total.saturating_sub(pb.len() - 1);
        let hi = n_total.min(pa.len() - 1);
        for m in lo..=hi {
            cum += pa[m] * pb[n_total - m];
        }
        if cum >= 1.0 - eps_trunc {
            return Ok(n_total);
        }
    }
    // Unit-normalized inputs sum to 1 over the full rectangle, so rounding is
    // the only way to get here.
    Ok(full)
}

/// Joint field state of the two cavity modes on the triangle m + n <= N_max.
#[derive(Debug, Clone)]
pub struct TwoModeFockState {
    /// Dense (N_max+1) x (N_max+1) coefficient matrix; entries outside the
    /// triangle are zero.
    coeffs: Array2<C64>,
    n_total_max: usize,
    captured_weight: f64,
}

impl TwoModeFockState {
    /// C[m][n] with m photons in mode a (x axis) and n in mode b (y axis).
    pub fn coeff(&self, m: usize, n: usize) -> C64 {
        self.coeffs[(m, n)]
    }

    pub fn coeffs(&self) -> &Array2<C64> {
        &self.coeffs
    }

    pub fn n_total_max(&self) -> usize {
        self.n_total_max
    }

    /// Probability mass kept by the triangle truncation (the coefficient
    /// matrix is deliberately not renormalized, so the distribution built
    /// from it integrates to this weight).
    pub fn captured_weight(&self) -> f64 {
        self.captured_weight
    }

    /// Probability of each total-excitation diagonal.
    pub fn diagonal_mass(&self, n_total: usize) -> f64 {
        (0..=n_total.min(self.n_total_max))
            .map(|m| self.coeffs[(m, n_total - m)].norm_sqr())
            .sum()
    }

    /// Wrap a raw coefficient matrix (no generator); `n_total_max` becomes
    /// the largest populated anti-diagonal and the mass is kept as-is.
    pub fn from_matrix(coeffs: Array2<C64>) -> Result<Self> {
        if coeffs.nrows() == 0 || coeffs.ncols() == 0 {
            return Err(Error::InvalidParam("empty coefficient matrix".into()));
        }
        let mut n_total_max = 0;
        let mut mass = 0.0;
        for ((m, n), c) in coeffs.indexed_iter() {
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::NonFiniteOverflow);
            }
            let p = c.norm_sqr();
            if p > 0.0 {
                n_total_max = n_total_max.max(m + n);
                mass += p;
            }
        }
        if mass <= 0.0 {
            return Err(Error::InvalidParam("zero-norm coefficient matrix".into()));
        }
        let side = n_total_max + 1;
        let mut dense = Array2::zeros((side, side));
        for ((m, n), c) in coeffs.indexed_iter() {
            if m + n <= n_total_max {
                dense[(m, n)] = *c;
            }
        }
        Ok(Self {
            coeffs: dense,
            n_total_max,
            captured_weight: mass,
        })
    }
}

/// Product state of two modes restricted to the total-excitation triangle
/// chosen by [`choose_total_cutoff`].
pub fn product_state(a: &ModeCoeffs, b: &ModeCoeffs, eps_trunc: f64) -> Result<TwoModeFockState> {
    let n_total_max = choose_total_cutoff(a, b, eps_trunc)?;
    let side = n_total_max + 1;
    let mut coeffs = Array2::zeros((side, side));
    let mut kept = 0.0;
    for m in 0..side.min(a.amps.len()) {
        for n in 0..(side - m).min(b.amps.len()) {
            let c = a.amps[m] * b.amps[n];
            kept += c.norm_sqr();
            coeffs[(m, n)] = c;
        }
    }
    Ok(TwoModeFockState {
        coeffs,
        n_total_max,
        captured_weight: kept,
    })
}

/// Internal state of the atom entering the cavities.
#[derive(Debug, Clone, Copy)]
pub struct AtomPrep {
    pub c_g: C64,
    pub c_e: C64,
}

impl AtomPrep {
    /// (|g> + e^{i kappa} |e>) / sqrt(2).
    pub fn from_kappa(kappa: f64) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            c_g: C64::new(s, 0.0),
            c_e: C64::new(0.0, kappa).exp() * s,
        }
    }

    pub fn ground() -> Self {
        Self {
            c_g: C64::new(1.0, 0.0),
            c_e: C64::new(0.0, 0.0),
        }
    }

    /// Normalize explicit amplitudes; errors on a zero vector.
    pub fn from_amplitudes(c_g: C64, c_e: C64) -> Result<Self> {
        let norm = (c_g.norm_sqr() + c_e.norm_sqr()).sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidParam("atom amplitudes have zero or non-finite norm".into()));
        }
        Ok(Self {
            c_g: c_g / norm,
            c_e: c_e / norm,
        })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c_g.norm_sqr() + self.c_e.norm_sqr()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;

    const I: C64 = C64::new(0.0, 1.0);

    #[test]
    fn vacuum_coherent_is_fock_zero() {
        let m = coherent_coeffs(C64::new(0.0, 0.0), 5, 1e-6).unwrap();
        assert_eq!(m.len(), 6);
        assert!((m.amplitudes()[0] - C64::new(1.0, 0.0)).norm() < 1e-15);
        for c in &m.amplitudes()[1..] {
            assert_eq!(c.norm(), 0.0);
        }
        assert!((m.captured_weight() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn coherent_matches_closed_form() {
        // |c_n| = e^{-1/2} / sqrt(n!)
        let m = coherent_coeffs(I, 20, 1e-6).unwrap();
        let mut fact = 1.0;
        for (n, c) in m.amplitudes().iter().enumerate() {
            if n > 0 {
                fact *= n as f64;
            }
            let expect = (-0.5f64).exp() / fact.sqrt();
            assert!(
                (c.norm() - expect).abs() <= 1e-12 * expect.max(1e-300),
                "n = {n}"
            );
        }
    }

    #[test]
    fn coherent_mean_photon_matches_displacement_oracle() {
        let alpha = C64::new(0.0, 1.5);
        let m = coherent_coeffs(alpha, 30, 1e-6).unwrap();
        assert!((mean_photon(&m) - 2.25).abs() < 1e-8);
        let d = oracle::displacement_operator_oracle(alpha, 30).unwrap();
        for (a, b) in m.amplitudes().iter().zip(d.amplitudes()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn coherent_cutoff_too_small_signals() {
        match coherent_coeffs(C64::new(3.0, 0.0), 5, 1e-6) {
            Err(Error::CutoffTooSmall { captured, .. }) => assert!(captured < 1.0 - 1e-6),
            other => panic!("expected CutoffTooSmall, got {other:?}"),
        }
    }

    #[test]
    fn squeezed_r_zero_is_coherent() {
        let alpha = C64::new(0.7, -1.1);
        let s = squeezed_coherent_coeffs(alpha, 0.0, std::f64::consts::PI, 25, 1e-6).unwrap();
        let c = coherent_coeffs(alpha, 25, 1e-6).unwrap();
        for (x, y) in s.amplitudes().iter().zip(c.amplitudes()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn squeezed_vacuum_has_even_parity() {
        let s = squeezed_coherent_coeffs(C64::new(0.0, 0.0), 0.5, std::f64::consts::PI, 30, 1e-6)
            .unwrap();
        for (n, c) in s.amplitudes().iter().enumerate() {
            if n % 2 == 1 {
                assert_eq!(c.norm(), 0.0, "odd n = {n} must vanish");
            }
        }
        assert!(s.amplitudes()[2].norm() > 0.0);
    }

    #[test]
    fn squeezed_mean_photon_closed_form() {
        // Protocol-scale anchor: alpha = 9.06i, r = 1, phi = pi.
        let s = squeezed_coherent_coeffs(C64::new(0.0, 9.06), 1.0, std::f64::consts::PI, 120, 1e-6)
            .unwrap();
        let expect = (9.06 * (-1.0f64).exp()).powi(2) + 1.0f64.sinh().powi(2);
        assert!((expect - 12.4899).abs() < 1e-3);
        assert!((mean_photon(&s) - expect).abs() < 1e-8);

        let s = squeezed_coherent_coeffs(C64::new(0.0, 5.77), 0.5, std::f64::consts::PI, 80, 1e-6)
            .unwrap();
        let expect = (5.77 * (-0.5f64).exp()).powi(2) + 0.5f64.sinh().powi(2);
        assert!((expect - 12.52).abs() < 5e-3);
        assert!((mean_photon(&s) - expect).abs() < 1e-8);
    }

    #[test]
    fn squeezed_mean_photon_general_formula() {
        let alpha = C64::new(1.3, -0.4);
        let (r, phi) = (0.8, 1.1);
        let s = squeezed_coherent_coeffs(alpha, r, phi, 140, 1e-8).unwrap();
        let expect = (alpha * r.cosh() - C64::new(0.0, phi).exp() * alpha.conj() * r.sinh())
            .norm_sqr()
            + r.sinh().powi(2);
        assert!((mean_photon(&s) - expect).abs() < 1e-8);
    }

    #[test]
    fn mean_photon_examples() {
        let v = fock_coeffs(0, 4).unwrap();
        assert_eq!(mean_photon(&v), 0.0);
        let c = coherent_coeffs(C64::new(0.0, 3.54), 60, 1e-6).unwrap();
        assert!((mean_photon(&c) - 12.53).abs() < 0.01);
    }

    #[test]
    fn product_of_vacua_is_single_entry() {
        let v = fock_coeffs(0, 0).unwrap();
        let s = product_state(&v, &v, 1e-6).unwrap();
        assert_eq!(s.n_total_max(), 0);
        assert!((s.coeff(0, 0) - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((s.captured_weight() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn product_state_captures_weight() {
        let a = coherent_coeffs(C64::new(0.0, 1.5), 25, 1e-7).unwrap();
        let b = coherent_coeffs(C64::new(1.5, 0.0), 25, 1e-7).unwrap();
        let s = product_state(&a, &b, 1e-6).unwrap();
        assert!(s.captured_weight() >= 1.0 - 1e-6);
        assert!(s.captured_weight() <= 1.0 + 1e-12);
    }

    #[test]
    fn swapping_modes_transposes_coefficients() {
        let a = coherent_coeffs(C64::new(0.4, 0.3), 12, 1e-6).unwrap();
        let b = squeezed_coherent_coeffs(C64::new(0.0, 0.8), 0.4, std::f64::consts::PI, 25, 1e-6)
            .unwrap();
        let ab = product_state(&a, &b, 1e-6).unwrap();
        let ba = product_state(&b, &a, 1e-6).unwrap();
        assert_eq!(ab.n_total_max(), ba.n_total_max());
        for m in 0..=ab.n_total_max() {
            for n in 0..=(ab.n_total_max() - m) {
                assert!((ab.coeff(m, n) - ba.coeff(n, m)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn cutoff_vacuum_pair_is_zero() {
        let v = fock_coeffs(0, 3).unwrap();
        assert_eq!(choose_total_cutoff(&v, &v, 1e-9).unwrap(), 0);
    }

    #[test]
    fn cutoff_matches_poisson_tail_oracle() {
        // Independent tail accumulation for |alpha| = 1 against vacuum.
        let a = coherent_coeffs(I, 20, 1e-6).unwrap();
        let v = fock_coeffs(0, 0).unwrap();
        let got = choose_total_cutoff(&a, &v, 1e-6).unwrap();

        let probs: Vec<f64> = a.amplitudes().iter().map(|c| c.norm_sqr()).collect();
        let mut cum = 0.0;
        let mut expect = probs.len() - 1;
        for (n, p) in probs.iter().enumerate() {
            cum += p;
            if cum >= 1.0 - 1e-6 {
                expect = n;
                break;
            }
        }
        assert_eq!(got, expect);
        // Direct Poisson(1) tail sums put the crossing at 9.
        assert_eq!(got, 9);
    }

    #[test]
    fn cutoff_for_figure_scale_pair() {
        let alpha = C64::new(0.0, 3.54);
        let a = coherent_coeffs(alpha, 60, 1e-6).unwrap();
        let got = choose_total_cutoff(&a, &a, 1e-4).unwrap();

        // Brute-force anti-diagonal accumulation, written independently.
        let p: Vec<f64> = a.amplitudes().iter().map(|c| c.norm_sqr()).collect();
        let mut cum = 0.0;
        let mut expect = 2 * (p.len() - 1);
        'outer: for n_total in 0..=2 * (p.len() - 1) {
            for m in 0..=n_total {
                if m < p.len() && n_total - m < p.len() {
                    cum += p[m] * p[n_total - m];
                }
            }
            if cum >= 1.0 - 1e-4 {
                expect = n_total;
                break 'outer;
            }
        }
        assert_eq!(got, expect);
        // Mean of the total distribution is ~25; the cutoff sits within the
        // mean + 5 sqrt(mean) band.
        let mean = 2.0 * 3.54f64.powi(2);
        assert!((got as f64) > mean && (got as f64) < mean + 5.0 * mean.sqrt());
    }

    #[test]
    fn unreachable_tolerance_detected() {
        // Windows that themselves lose ~1e-4 cannot reach 1e-6.
        let raw: Vec<C64> = (0..4)
            .map(|n| C64::new((0.9999f64).sqrt() * [0.6, 0.5, 0.4, 0.486f64][n], 0.0))
            .collect();
        let a = ModeCoeffs {
            amps: raw,
            captured_weight: 0.9999,
            generator: Generator::Raw,
        };
        match choose_total_cutoff(&a, &a, 1e-6) {
            Err(Error::UnreachableTolerance { .. }) => {}
            other => panic!("expected UnreachableTolerance, got {other:?}"),
        }
    }

    #[test]
    fn squeezed_recurrence_overflow_is_reported() {
        match squeezed_coherent_coeffs(C64::new(1e200, 0.0), 0.3, std::f64::consts::PI, 40, 1e-6)
        {
            Err(Error::NonFiniteOverflow) => {}
            other => panic!("expected NonFiniteOverflow, got {other:?}"),
        }
    }

    #[test]
    fn atom_prep_normalizes() {
        let a = AtomPrep::from_kappa(std::f64::consts::FRAC_PI_3);
        assert!((a.norm_sqr() - 1.0).abs() < 1e-12);
        let b = AtomPrep::from_amplitudes(C64::new(3.0, 0.0), C64::new(0.0, 4.0)).unwrap();
        assert!((b.norm_sqr() - 1.0).abs() < 1e-12);
        assert!(AtomPrep::from_amplitudes(C64::new(0.0, 0.0), C64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn raw_matrix_roundtrip() {
        let mut m = Array2::zeros((3, 3));
        m[(1, 1)] = C64::new(1.0, 0.0);
        let s = TwoModeFockState::from_matrix(m).unwrap();
        assert_eq!(s.n_total_max(), 2);
        assert!((s.captured_weight() - 1.0).abs() < 1e-12);
        assert_eq!(s.diagonal_mass(2), 1.0);
        assert_eq!(s.diagonal_mass(1), 0.0);
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        /// Coherent recurrence equals the closed form within 1e-12 relative.
        #[test]
        fn coherent_recurrence_vs_closed_form(
            re in -4.2f64..4.2,
            im in -4.2f64..4.2,
        ) {
            let alpha = C64::new(re, im);
            prop_assume!(alpha.norm() <= 6.0);
            let n_max = 30usize;
            // Window may legitimately be too small for large |alpha|; only
            // the coefficient values are under test here.
            let m = match coherent_coeffs(alpha, 64, 1e-4) {
                Ok(m) => m,
                Err(_) => return Ok(()),
            };
            let renorm = m.captured_weight().sqrt();
            let mut fact = 1.0f64;
            let mut apow = C64::new(1.0, 0.0);
            for n in 0..=n_max {
                if n > 0 {
                    fact *= n as f64;
                    apow *= alpha;
                }
                let closed = apow * (-0.5 * alpha.norm_sqr()).exp() / fact.sqrt();
                let got = m.amplitudes()[n] * renorm;
                let tol = 1e-12 * closed.norm().max(1e-280);
                prop_assert!((got - closed).norm() <= tol);
            }
        }

        /// Constructed states are normalized over their window.
        #[test]
        fn windows_are_normalized(
            im in 0.1f64..3.0,
            r in 0.0f64..1.2,
        ) {
            let s = squeezed_coherent_coeffs(
                C64::new(0.0, im), r, std::f64::consts::PI, 90, 1e-6,
            ).unwrap();
            let total: f64 = s.amplitudes().iter().map(|c| c.norm_sqr()).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!(s.captured_weight() <= 1.0 + 1e-12);
            prop_assert!(s.captured_weight() >= 1.0 - 1e-6);
        }

        /// Purely imaginary displacement with phi = pi: closed-form mean.
        #[test]
        fn squeezed_mean_photon_imaginary_axis(
            im in 0.2f64..4.0,
            r in 0.0f64..1.3,
        ) {
            // Windows must outlast the tanh(r)^n tail for an n-weighted sum
            // to settle at 1e-8.
            let s = squeezed_coherent_coeffs(
                C64::new(0.0, im), r, std::f64::consts::PI, 220, 1e-8,
            ).unwrap();
            let expect = im * im * (-2.0 * r).exp() + r.sinh().powi(2);
            prop_assert!((mean_photon(&s) - expect).abs() < 1e-8);
        }
    }
}
