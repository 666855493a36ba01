//! Independent brute-force references.
//!
//! Everything here recomputes a kernel or state-preparation quantity from
//! its definition with no shared shortcuts: direct 2D quadrature of the
//! position-to-momentum integral, dense operator exponentials on truncated
//! Fock windows, and a full position-space evolution + FFT realization of
//! the momentum distribution. The equivalence suites treat these as ground
//! truth. Clarity over speed throughout; none of this runs in production
//! paths.

mod evolution;
mod expm;

pub use evolution::{evolution_fft_oracle, CartesianMap, CartesianSpec};
pub use expm::{expm, expm_real};

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::bogoliubov::{b_matrix_from, BbarSubspace};
use crate::error::{Error, Result};
use crate::kernel::AtomLabel;
use crate::numeric::cis;
use crate::params::SimParams;
use crate::states::ModeCoeffs;

/// 12-point Gauss-Legendre nodes (positive half) and weights on [-1, 1].
const GL12_X: [f64; 6] = [
    0.125_233_408_511_468_9,
    0.367_831_498_998_180_2,
    0.587_317_954_286_617_5,
    0.769_902_674_194_304_7,
    0.904_117_256_370_474_9,
    0.981_560_634_246_719_2,
];
const GL12_W: [f64; 6] = [
    0.249_147_045_813_402_8,
    0.233_492_536_538_354_8,
    0.203_167_426_723_065_9,
    0.160_078_328_543_346_2,
    0.106_939_325_995_318_4,
    0.047_175_336_386_511_8,
];

/// Node budget for the direct 2D quadrature of the defining integral.
///
/// The radial rule is composite 12-point Gauss-Legendre on [0, rho_max], so
/// the exponential pinhole weight is integrated exactly to quadrature order
/// and only the oscillatory phase is actually resolved; the angular rule is
/// the periodic midpoint rule, which converges spectrally for the smooth
/// periodic integrand.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    /// Total radial nodes (rounded up to full 12-node panels).
    pub n_radial: usize,
    /// Angular nodes over one period.
    pub n_angular: usize,
    /// Radial cutoff in units of k r.
    pub rho_max: f64,
    /// Absolute convergence requirement checked by node doubling.
    pub convergence_tol: f64,
}

impl QuadratureSpec {
    pub fn for_params(params: &SimParams) -> Self {
        Self {
            // rho_max = 56 k dr puts the integrand weight near 1e-12.
            rho_max: 56.0 * params.k_delta_r,
            n_radial: 768,
            n_angular: 384,
            convergence_tol: 1e-8,
        }
    }

    fn validate(&self, params: &SimParams) -> Result<()> {
        if self.n_radial < 64 || self.n_angular < 64 {
            return Err(Error::InvalidParam(format!(
                "quadrature node counts must be >= 64, got {} x {}",
                self.n_radial, self.n_angular
            )));
        }
        if self.rho_max < 20.0 * params.k_delta_r {
            return Err(Error::InvalidParam(format!(
                "rho_max = {:.3} leaves pinhole tail above 1e-9 (need >= {:.3})",
                self.rho_max,
                20.0 * params.k_delta_r
            )));
        }
        Ok(())
    }
}

/// One quadrature pass over every valid (m, n) of the (label, N) block.
fn quad_pass(
    label: AtomLabel,
    n_exc: usize,
    p: f64,
    phi: f64,
    params: &SimParams,
    n_radial: usize,
    n_angular: usize,
    rho_max: f64,
) -> Array2<C64> {
    let d = label.delta();
    let sub = BbarSubspace::build(n_exc - d);
    let side = n_exc + 1;
    let decay = params.radial_decay();

    let n_panels = n_radial.div_ceil(12);
    let h = rho_max / n_panels as f64;
    let mut rho_nodes = Vec::with_capacity(n_panels * 12);
    for panel in 0..n_panels {
        let mid = (panel as f64 + 0.5) * h;
        for k in 0..6 {
            rho_nodes.push((mid - 0.5 * h * GL12_X[k], 0.5 * h * GL12_W[k]));
            rho_nodes.push((mid + 0.5 * h * GL12_X[k], 0.5 * h * GL12_W[k]));
        }
    }

    // e^{i rho sqrt(n) lambda} per radial node and per second index.
    let kick: Vec<Vec<C64>> = rho_nodes
        .iter()
        .map(|&(rho, w)| {
            (0..side)
                .map(|n| cis(rho * (n as f64).sqrt() * params.lambda) * (w * rho * (-decay * rho).exp()))
                .collect()
        })
        .collect();

    let d_theta = std::f64::consts::TAU / n_angular as f64;
    let mut out = Array2::from_elem((side, side), C64::new(0.0, 0.0));
    for j in 0..n_angular {
        let theta = (j as f64 + 0.5) * d_theta;
        let b = b_matrix_from(&sub, theta).entries;
        let cos_rel = (theta - phi).cos();
        for (i, &(rho, _)) in rho_nodes.iter().enumerate() {
            let swing = cis(-rho * p * cos_rel);
            for n in d..=n_exc {
                let z = swing * kick[i][n];
                for m in d..=n_exc {
                    out[(m, n)] += z * b[(m - d, n - d)];
                }
            }
        }
    }
    let norm = decay * d_theta / (std::f64::consts::PI * std::f64::consts::TAU.sqrt());
    out.mapv_inplace(|x| x * norm);
    out
}

/// Direct 2D quadrature of every amplitude in the (label, N) block at one
/// sample point, with a node-doubling convergence check.
pub fn f_quadrature_matrix(
    label: AtomLabel,
    n_exc: usize,
    p: f64,
    phi: f64,
    params: &SimParams,
    spec: &QuadratureSpec,
) -> Result<Array2<C64>> {
    if n_exc < label.delta() {
        return Err(Error::InvalidIndex(format!(
            "F[{}]: N = {n_exc} below branch minimum",
            label.tag()
        )));
    }
    spec.validate(params)?;
    let coarse = quad_pass(
        label, n_exc, p, phi, params, spec.n_radial, spec.n_angular, spec.rho_max,
    );
    let fine = quad_pass(
        label,
        n_exc,
        p,
        phi,
        params,
        spec.n_radial * 2,
        spec.n_angular * 2,
        spec.rho_max,
    );
    let mut delta = 0.0f64;
    for (a, b) in coarse.iter().zip(fine.iter()) {
        delta = delta.max((a - b).norm());
    }
    if delta > spec.convergence_tol {
        return Err(Error::NotConverged {
            delta,
            tol: spec.convergence_tol,
        });
    }
    Ok(fine)
}

/// Direct quadrature of a single amplitude.
pub fn f_quadrature(
    label: AtomLabel,
    n_exc: usize,
    m: usize,
    n: usize,
    p: f64,
    phi: f64,
    params: &SimParams,
    spec: &QuadratureSpec,
) -> Result<C64> {
    let d = label.delta();
    if m < d || m > n_exc || n < d || n > n_exc {
        return Err(Error::InvalidIndex(format!(
            "F[{}]: (m, n) = ({m}, {n}) outside {d}..={n_exc}",
            label.tag()
        )));
    }
    Ok(f_quadrature_matrix(label, n_exc, p, phi, params, spec)?[(m, n)])
}

/// Mode-mixing rotation on the N-excitation subspace, built as the dense
/// exponential of the antisymmetric ladder-operator generator. Budgeted for
/// small N only.
pub fn beam_splitter_oracle(n_exc: usize, theta: f64) -> Result<Array2<f64>> {
    if n_exc > 32 {
        return Err(Error::InvalidParam(format!(
            "beam splitter oracle budgeted for N <= 32, got {n_exc}"
        )));
    }
    let side = n_exc + 1;
    let mut gen = Array2::zeros((side, side));
    for m in 0..side {
        if m + 1 < side {
            gen[(m, m + 1)] = ((m + 1) as f64 * (n_exc - m) as f64).sqrt();
        }
        if m >= 1 {
            gen[(m, m - 1)] = -(m as f64 * (n_exc - m + 1) as f64).sqrt();
        }
    }
    gen.mapv_inplace(|x| x * theta);
    Ok(expm_real(&gen))
}

fn matvec(a: &Array2<C64>, v: &[C64]) -> Vec<C64> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)] * v[j]).sum())
        .collect()
}

fn coherent_closed_form(alpha: C64, dim: usize) -> Vec<C64> {
    let mut v = Vec::with_capacity(dim);
    let mut c = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    v.push(c);
    for n in 1..dim {
        c *= alpha / (n as f64).sqrt();
        v.push(c);
    }
    v
}

fn window_leak_check(v: &[C64]) -> Result<()> {
    let top = (v.len() / 10).max(2);
    let leak: f64 = v[v.len() - top..].iter().map(|c| c.norm_sqr()).sum();
    if leak > 1e-10 {
        return Err(Error::TruncationLeak { leak });
    }
    Ok(())
}

/// Squeezed coherent state built by applying the dense truncated squeeze
/// exponential to the closed-form coherent vector.
pub fn squeeze_operator_oracle(
    alpha: C64,
    r: f64,
    phi_sq: f64,
    n_max: usize,
) -> Result<ModeCoeffs> {
    let dim = n_max + 1;
    let xi = C64::new(0.0, phi_sq).exp() * r;
    let mut m = Array2::from_elem((dim, dim), C64::new(0.0, 0.0));
    for n in 0..dim {
        if n + 2 < dim {
            m[(n, n + 2)] = 0.5 * xi.conj() * ((n + 1) as f64 * (n + 2) as f64).sqrt();
        }
        if n >= 2 {
            m[(n, n - 2)] = -0.5 * xi * ((n - 1) as f64 * n as f64).sqrt();
        }
    }
    let s = expm(&m);
    let out = matvec(&s, &coherent_closed_form(alpha, dim));
    window_leak_check(&out)?;
    ModeCoeffs::from_vec(out, 1e-8)
}

/// Coherent state built by applying the dense displacement exponential to
/// the vacuum.
pub fn displacement_operator_oracle(alpha: C64, n_max: usize) -> Result<ModeCoeffs> {
    let dim = n_max + 1;
    let mut m = Array2::from_elem((dim, dim), C64::new(0.0, 0.0));
    for n in 0..dim {
        if n >= 1 {
            m[(n, n - 1)] = alpha * (n as f64).sqrt();
        }
        if n + 1 < dim {
            m[(n, n + 1)] = -alpha.conj() * ((n + 1) as f64).sqrt();
        }
    }
    let dmat = expm(&m);
    let mut vac = vec![C64::new(0.0, 0.0); dim];
    vac[0] = C64::new(1.0, 0.0);
    let out = matvec(&dmat, &vac);
    window_leak_check(&out)?;
    ModeCoeffs::from_vec(out, 1e-8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bogoliubov::b_matrix;
    use crate::kernel::{f_transform, ATensor};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params() -> SimParams {
        SimParams::new(4.0, std::f64::consts::TAU / 10.0, 1e-6).unwrap()
    }

    #[test]
    fn beam_splitter_identity_and_n1() {
        let id = beam_splitter_oracle(4, 0.0).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((id[(i, j)] - expect).abs() < 1e-14);
            }
        }
        let b = beam_splitter_oracle(1, 0.3).unwrap();
        assert!((b[(0, 0)] - 0.3f64.cos()).abs() < 1e-13);
        assert!((b[(0, 1)] - 0.3f64.sin()).abs() < 1e-13);
        assert!((b[(1, 0)] + 0.3f64.sin()).abs() < 1e-13);
        assert!((b[(1, 1)] - 0.3f64.cos()).abs() < 1e-13);
    }

    #[test]
    fn beam_splitter_matches_b_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xb5);
        for n_exc in [2usize, 4, 6, 12] {
            let theta: f64 = rng.gen_range(-2.5..2.5);
            let analytic = b_matrix(n_exc, theta);
            let dense = beam_splitter_oracle(n_exc, theta).unwrap();
            for m in 0..=n_exc {
                for n in 0..=n_exc {
                    assert!(
                        (analytic.entries[(m, n)] - dense[(m, n)]).abs() < 1e-10,
                        "N = {n_exc}, ({m},{n})"
                    );
                }
            }
        }
    }

    #[test]
    fn squeeze_oracle_r_zero_returns_coherent() {
        let alpha = C64::new(0.8, -0.6);
        let out = squeeze_operator_oracle(alpha, 0.0, std::f64::consts::PI, 30).unwrap();
        let coh = coherent_closed_form(alpha, 31);
        for (a, b) in out.amplitudes().iter().zip(&coh) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn squeeze_oracle_vacuum_even_parity() {
        let out = squeeze_operator_oracle(C64::new(0.0, 0.0), 0.5, std::f64::consts::PI, 40)
            .unwrap();
        for (n, c) in out.amplitudes().iter().enumerate() {
            if n % 2 == 1 {
                assert!(c.norm() < 1e-14);
            }
        }
    }

    #[test]
    fn squeeze_oracle_matches_recurrence() {
        let alpha = C64::new(0.0, 2.0);
        let got = crate::states::squeezed_coherent_coeffs(
            alpha,
            1.0,
            std::f64::consts::PI,
            120,
            1e-6,
        )
        .unwrap();
        let oracle = squeeze_operator_oracle(alpha, 1.0, std::f64::consts::PI, 120).unwrap();
        for (n, (a, b)) in got
            .amplitudes()
            .iter()
            .zip(oracle.amplitudes())
            .enumerate()
        {
            assert!((a - b).norm() < 1e-8, "n = {n}: {a} vs {b}");
        }
    }

    #[test]
    fn squeeze_oracle_flags_short_window() {
        match squeeze_operator_oracle(C64::new(0.0, 3.0), 1.2, std::f64::consts::PI, 12) {
            Err(Error::TruncationLeak { .. }) => {}
            other => panic!("expected TruncationLeak, got {other:?}"),
        }
    }

    #[test]
    fn quadrature_vacuum_matches_hankel_form() {
        let prm = params();
        let spec = QuadratureSpec::for_params(&prm);
        let a = prm.radial_decay();
        for p in [0.0, 0.8, 3.0, 9.0] {
            let got = f_quadrature(AtomLabel::Ground, 0, 0, 0, p, 1.1, &prm, &spec).unwrap();
            let expect = a
                / (std::f64::consts::TAU.sqrt()
                    * prm.k_delta_r
                    * (a * a + p * p).powf(1.5));
            assert!(
                (got - C64::new(expect, 0.0)).norm() < 1e-8,
                "p = {p}: {got} vs {expect}"
            );
            assert!(got.re > 0.0);
        }
    }

    #[test]
    fn quadrature_agrees_with_analytic_small_sample() {
        let prm = params();
        let spec = QuadratureSpec::for_params(&prm);
        let mut rng = ChaCha8Rng::seed_from_u64(0x9a);
        for n_exc in 0..=3usize {
            for label in [AtomLabel::Ground, AtomLabel::Excited] {
                let d = label.delta();
                if n_exc < d {
                    continue;
                }
                let p: f64 = rng.gen_range(0.0..3.0 * prm.lambda);
                let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let numeric = f_quadrature_matrix(label, n_exc, p, phi, &prm, &spec).unwrap();
                let sub = BbarSubspace::build(n_exc - d);
                let tensor = ATensor::build(label, n_exc, &sub).unwrap();
                for m in d..=n_exc {
                    for n in d..=n_exc {
                        let analytic = f_transform(&tensor, m, n, p, phi, &prm).unwrap();
                        let scale = numeric[(m, n)].norm().max(1e-8);
                        assert!(
                            (analytic - numeric[(m, n)]).norm() <= 1e-6 * scale,
                            "{} N={n_exc} ({m},{n}) p={p:.3} phi={phi:.3}: {analytic} vs {}",
                            label.tag(),
                            numeric[(m, n)]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn quadrature_rejects_thin_budget() {
        let prm = params();
        let spec = QuadratureSpec {
            n_radial: 32,
            n_angular: 384,
            rho_max: 56.0 * prm.k_delta_r,
            convergence_tol: 1e-8,
        };
        assert!(f_quadrature(AtomLabel::Ground, 0, 0, 0, 1.0, 0.0, &prm, &spec).is_err());
    }
}
