//! Assembly of the 2D momentum distribution on a polar grid.
//!
//! The distribution is the trace over the atom's final internal state and
//! the final two-mode Fock state of the squared momentum amplitudes. Within
//! one total-excitation sector the propagator splits into a dark branch and
//! dressed pairs with opposite radial kicks, so the amplitude reaching a
//! fixed final basis state is a sum of terms
//!
//! ```text
//! (rotation profile of the final state) x (rotation profile contracted
//! with the field coefficients) x {cos, sin}(sqrt(n) lambda k r)
//! ```
//!
//! Every angular profile is a finite trig polynomial whose harmonics come
//! from the same regrouped tensors as the analytic amplitudes, products of
//! two profiles are harmonic convolutions, and the cos/sin radial factors
//! are the real and imaginary parts of the cached momentum factors S. Each
//! radius therefore pairs precomputed harmonic vectors with one S table,
//! and each azimuth sample costs one rotor pass per final state.
//!
//! Everything grid-independent is contracted once per sector; radii are
//! independent work units computed in a fixed order with compensated
//! accumulation, so output is bitwise identical for any worker count.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::bogoliubov::BbarSubspace;
use crate::error::{Error, Result};
use crate::grid::{GridMeta, GridSpec, MomentumGrid};
use crate::kernel::{gamma, upsilon, ATensor, AtomLabel};
use crate::numeric::{cis, i_pow};
use crate::params::SimParams;
use crate::states::{AtomPrep, TwoModeFockState};

/// Momentum factors for one radius: splus[n][w] is S(+w, n, p); negative
/// harmonics follow from the piecewise sign.
struct SCache {
    splus: Vec<Vec<C64>>,
}

impl SCache {
    fn build(p: f64, n_max: usize, w_max: usize, params: &SimParams) -> Self {
        let pref = 1.0 / (std::f64::consts::TAU.sqrt() * params.k_delta_r);
        let splus = (0..=n_max)
            .map(|n| {
                let g = gamma(n, params);
                let d = -(g * g + p * p).sqrt();
                let d3 = d * d * d;
                let base = C64::from(p) / (g + d);
                let mut qpow = C64::new(1.0, 0.0);
                (0..=w_max)
                    .map(|w| {
                        let v = (w as f64 * d + g) / d3 * qpow * pref;
                        qpow *= base;
                        v
                    })
                    .collect()
            })
            .collect();
        Self { splus }
    }

    #[inline]
    fn get(&self, w: i64, n: usize) -> C64 {
        let s = self.splus[n][w.unsigned_abs() as usize];
        if upsilon(w) == 1 {
            -s
        } else {
            s
        }
    }
}

/// Harmonic convolution: out[k] = sum_{k1 + k2 = k} a[k1] b[k2].
fn convolve(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (k1, &x) in a.iter().enumerate() {
        if x == C64::new(0.0, 0.0) {
            continue;
        }
        for (k2, &y) in b.iter().enumerate() {
            out[k1 + k2] += x * y;
        }
    }
    out
}

/// Grid-independent harmonic tables of one excitation sector.
///
/// Channel naming: first letter is the final internal state, second the
/// entering one. Each table row holds the convolution of the final-state
/// rotation profile with the contracted field profile for one bright-mode
/// occupation n; the `w0` fields give the harmonic of index 0 in each row.
struct SectorTables {
    /// gg[mu * (N+1) + n], len 2N+1, harmonics w = 2k - 2N.
    gg: Option<Vec<Vec<C64>>>,
    /// ge[mu * N + (n-1)], len 2N, harmonics w = 2k - 2N + 1.
    ge: Option<Vec<Vec<C64>>>,
    /// eg[mu * N + (n-1)], len 2N, harmonics w = 2k - 2N + 1.
    eg: Option<Vec<Vec<C64>>>,
    /// ee[mu * N + (n-1)], len 2N.max(1) - 1, harmonics w = 2k - 2N + 2.
    ee: Option<Vec<Vec<C64>>>,
}

fn build_sector(
    field: &TwoModeFockState,
    atom: &AtomPrep,
    n_exc: usize,
    n_c: usize,
) -> Result<Option<SectorTables>> {
    let has_g = n_exc <= n_c && field.diagonal_mass(n_exc) > 0.0;
    let has_e =
        atom.c_e.norm_sqr() > 0.0 && n_exc >= 1 && field.diagonal_mass(n_exc - 1) > 0.0;
    if !has_g && !has_e {
        return Ok(None);
    }
    let span = n_exc + 1;
    let a_g = ATensor::build(AtomLabel::Ground, n_exc, &BbarSubspace::build(n_exc))?;
    let a_e = if n_exc >= 1 {
        Some(ATensor::build(
            AtomLabel::Excited,
            n_exc,
            &BbarSubspace::build(n_exc - 1),
        )?)
    } else {
        None
    };

    // Contracted field profiles: pg[n] are the harmonics of the entering
    // ground-branch profile (grid v = 2 iv - N), pe[n-1] the excited-branch
    // ones (v = 2 iv - N, physical harmonic v + 1).
    let zero = C64::new(0.0, 0.0);
    let pg = has_g.then(|| {
        let mut pg = vec![vec![zero; span]; span];
        for n in 0..span {
            for m in 0..span {
                let c = field.coeff(m, n_exc - m);
                if c == zero {
                    continue;
                }
                for (iv, &a) in a_g.coeffs(m, n).iter().enumerate() {
                    pg[n][iv] += c * a;
                }
            }
        }
        pg
    });
    let pe = if has_e {
        let a_e = a_e.as_ref().unwrap();
        let mut pe = vec![vec![zero; n_exc]; n_exc];
        for n in 1..span {
            for m in 1..span {
                let c = field.coeff(m - 1, n_exc - m);
                if c == zero {
                    continue;
                }
                for (iv, &a) in a_e.coeffs(m, n).iter().enumerate() {
                    pe[n - 1][iv] += c * a;
                }
            }
        }
        Some(pe)
    } else {
        None
    };

    // Final-state profiles are single rows of the same tensors:
    // ground (mu, N - mu) uses the harmonics of its own rotation profile,
    // excited (mu, N - 1 - mu) those of the reduced-subspace profile.
    let gg = pg.as_ref().map(|pg| {
        (0..span)
            .into_par_iter()
            .flat_map_iter(|mu| {
                let mut rows = Vec::with_capacity(span);
                for n in 0..span {
                    rows.push(convolve(a_g.coeffs(mu, n), &pg[n]));
                }
                rows
            })
            .collect()
    });
    let ge = pe.as_ref().map(|pe| {
        (0..span)
            .into_par_iter()
            .flat_map_iter(|mu| {
                let mut rows = Vec::with_capacity(n_exc);
                for n in 1..span {
                    rows.push(convolve(a_g.coeffs(mu, n), &pe[n - 1]));
                }
                rows
            })
            .collect()
    });
    let eg = match (&a_e, &pg) {
        (Some(a_e), Some(pg)) => Some(
            (0..n_exc)
                .into_par_iter()
                .flat_map_iter(|mu| {
                    let mut rows = Vec::with_capacity(n_exc);
                    for n in 1..span {
                        rows.push(convolve(a_e.coeffs(mu + 1, n), &pg[n]));
                    }
                    rows
                })
                .collect(),
        ),
        _ => None,
    };
    let ee = match (&a_e, &pe) {
        (Some(a_e), Some(pe)) => Some(
            (0..n_exc)
                .into_par_iter()
                .flat_map_iter(|mu| {
                    let mut rows = Vec::with_capacity(n_exc);
                    for n in 1..span {
                        rows.push(convolve(a_e.coeffs(mu + 1, n), &pe[n - 1]));
                    }
                    rows
                })
                .collect(),
        ),
        _ => None,
    };

    Ok(Some(SectorTables { gg, ge, eg, ee }))
}

/// Predicted term count of the azimuthal evaluation, the quantity capped by
/// the budget: sum over sectors of (N+1)^2 (2N+1) per radius.
pub fn predicted_terms(n_radial: usize, n_top: usize) -> u64 {
    let per_ring: u64 = (0..=n_top as u64)
        .map(|n| (n + 1) * (n + 1) * (2 * n + 1))
        .sum();
    per_ring.saturating_mul(n_radial as u64)
}

/// Evaluate the momentum distribution of the prepared field and atom on a
/// polar grid.
pub fn momentum_distribution(
    field: &TwoModeFockState,
    atom: &AtomPrep,
    params: &SimParams,
    spec: &GridSpec,
) -> Result<MomentumGrid> {
    spec.validate()?;
    let n_c = params
        .n_total_max
        .map_or(field.n_total_max(), |cap| cap.min(field.n_total_max()));
    let include_e = atom.c_e.norm_sqr() > 0.0;
    let n_top = if include_e { n_c + 1 } else { n_c };

    let predicted = predicted_terms(spec.n_radial, n_top);
    let cap = params.term_budget();
    if predicted > cap {
        return Err(Error::BudgetExceeded { predicted, cap });
    }

    let p_max = spec.resolve_p_max(n_top, params);
    let (p_axis, phi_axis) = spec.axes(p_max);
    let n_phi = phi_axis.len();

    // Azimuthal rotor table with i^w folded in: tab[w + w_max][j] =
    // i^w e^{i w phi_j}, exact per entry.
    let w_max = 2 * n_top as i64;
    let tab: Vec<Vec<C64>> = (-w_max..=w_max)
        .map(|w| {
            let ipw = i_pow(w);
            phi_axis
                .iter()
                .map(|&phi| ipw * cis(w as f64 * phi))
                .collect()
        })
        .collect();

    let mut w_values = vec![0.0f64; p_axis.len() * n_phi];
    let mut w_carry = vec![0.0f64; p_axis.len() * n_phi];

    for n_exc in 0..=n_top {
        let Some(tables) = build_sector(field, atom, n_exc, n_c)? else {
            continue;
        };
        let span = n_exc + 1;
        let two_n = 2 * n_exc as i64;
        w_values
            .par_chunks_mut(n_phi)
            .zip(w_carry.par_chunks_mut(n_phi))
            .enumerate()
            .for_each(|(i, (row, carry))| {
                let p = p_axis[i];
                let s_cache = SCache::build(p, n_exc, 2 * n_exc + 2, params);
                // Per-n radial factors on the sector's harmonic grids.
                let mut h = vec![C64::new(0.0, 0.0); 4 * n_exc + 1];
                let mut full = vec![C64::new(0.0, 0.0); n_phi];
                let add_state = |h: &[C64], row: &mut [f64], carry: &mut [f64], full: &mut [C64]| {
                    full.fill(C64::new(0.0, 0.0));
                    for (k, &coeff) in h.iter().enumerate() {
                        if coeff == C64::new(0.0, 0.0) {
                            continue;
                        }
                        let w = k as i64 - two_n;
                        let tab_row = &tab[(w + w_max) as usize];
                        for (t, r) in full.iter_mut().zip(tab_row) {
                            *t += coeff * r;
                        }
                    }
                    for ((cell, c), t) in row.iter_mut().zip(carry.iter_mut()).zip(full.iter()) {
                        // Kahan step with persistent carry.
                        let y = t.norm_sqr() - *c;
                        let s = *cell + y;
                        *c = (s - *cell) - y;
                        *cell = s;
                    }
                };

                // Ground final states (mu, N - mu).
                if tables.gg.is_some() || tables.ge.is_some() {
                    for mu in 0..span {
                        h.fill(C64::new(0.0, 0.0));
                        if let Some(gg) = &tables.gg {
                            for n in 0..span {
                                let rowc = &gg[mu * span + n];
                                for (k, &c) in rowc.iter().enumerate() {
                                    if c == C64::new(0.0, 0.0) {
                                        continue;
                                    }
                                    let w = 2 * k as i64 - two_n;
                                    let s = s_cache.get(w, n).re;
                                    h[2 * k] += atom.c_g * c * s;
                                }
                            }
                        }
                        if let Some(ge) = &tables.ge {
                            for n in 1..span {
                                let rowc = &ge[mu * n_exc + (n - 1)];
                                for (k, &c) in rowc.iter().enumerate() {
                                    if c == C64::new(0.0, 0.0) {
                                        continue;
                                    }
                                    let w = 2 * k as i64 - two_n + 1;
                                    let s = s_cache.get(w, n).im;
                                    h[2 * k + 1] += atom.c_e * c * C64::new(0.0, s);
                                }
                            }
                        }
                        add_state(&h, row, carry, &mut full);
                    }
                }

                // Excited final states (mu, N - 1 - mu).
                if tables.eg.is_some() || tables.ee.is_some() {
                    for mu in 0..n_exc {
                        h.fill(C64::new(0.0, 0.0));
                        if let Some(eg) = &tables.eg {
                            for n in 1..span {
                                let rowc = &eg[mu * n_exc + (n - 1)];
                                for (k, &c) in rowc.iter().enumerate() {
                                    if c == C64::new(0.0, 0.0) {
                                        continue;
                                    }
                                    let w = 2 * k as i64 - two_n + 1;
                                    let s = s_cache.get(w, n).im;
                                    h[2 * k + 1] += atom.c_g * c * C64::new(0.0, s);
                                }
                            }
                        }
                        if let Some(ee) = &tables.ee {
                            for n in 1..span {
                                let rowc = &ee[mu * n_exc + (n - 1)];
                                for (k, &c) in rowc.iter().enumerate() {
                                    if c == C64::new(0.0, 0.0) {
                                        continue;
                                    }
                                    let w = 2 * k as i64 - two_n + 2;
                                    let s = s_cache.get(w, n).re;
                                    h[2 * k + 2] += atom.c_e * c * s;
                                }
                            }
                        }
                        add_state(&h, row, carry, &mut full);
                    }
                }
            });
    }

    let kept_mass: f64 = (0..=n_c).map(|n| field.diagonal_mass(n)).sum();
    let mut grid = MomentumGrid {
        p: p_axis,
        phi: phi_axis,
        w: w_values,
        meta: GridMeta {
            lambda: params.lambda,
            k_delta_r: params.k_delta_r,
            eps_trunc: params.eps_trunc,
            n_total_max: n_c,
            captured_weight: kept_mass,
            integral: 0.0,
            field_desc: String::new(),
            atom_desc: String::new(),
        },
    };
    grid.meta.integral = grid.total();
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{coherent_coeffs, fock_coeffs, product_state};

    fn params(lambda: f64) -> SimParams {
        SimParams::new(lambda, std::f64::consts::TAU / 10.0, 1e-6).unwrap()
    }

    fn vacuum_field() -> TwoModeFockState {
        let v = fock_coeffs(0, 0).unwrap();
        product_state(&v, &v, 1e-9).unwrap()
    }

    #[test]
    fn vacuum_is_central_pinhole_peak_with_unit_mass() {
        let prm = params(2.0);
        let spec = GridSpec::with_p_max(600, 64, 24.0);
        let grid = momentum_distribution(&vacuum_field(), &AtomPrep::ground(), &prm, &spec)
            .unwrap();
        // Pointwise closed form |F|^2 = (2a^2/sqrt(2pi))^2 / (a^2+p^2)^3.
        let a = prm.radial_decay();
        for (i, &p) in grid.p.iter().enumerate().step_by(37) {
            let expect = (2.0 * a * a / std::f64::consts::TAU.sqrt()).powi(2)
                / (a * a + p * p).powi(3);
            for j in [0usize, 17, 40] {
                let got = grid.value(i, j);
                assert!(
                    (got - expect).abs() <= 1e-12 * expect.max(1e-30) + 1e-300,
                    "p = {p}, j = {j}: {got} vs {expect}"
                );
            }
        }
        // Closed-form normalization: integral is exactly 1 up to grid error.
        assert!((grid.total() - 1.0).abs() < 1e-3, "total = {}", grid.total());
        assert!((grid.meta.integral - grid.total()).abs() < 1e-15);
    }

    #[test]
    fn values_are_finite_and_nonnegative() {
        let prm = params(3.0);
        let a = coherent_coeffs(C64::new(0.0, 0.9), 8, 1e-6).unwrap();
        let b = coherent_coeffs(C64::new(0.9, 0.0), 8, 1e-6).unwrap();
        let field = product_state(&a, &b, 1e-6).unwrap();
        let atom = AtomPrep::from_kappa(std::f64::consts::FRAC_PI_2);
        let spec = GridSpec::with_p_max(80, 64, 9.0);
        let grid = momentum_distribution(&field, &atom, &prm, &spec).unwrap();
        for &w in &grid.w {
            assert!(w.is_finite() && w >= 0.0);
        }
    }

    #[test]
    fn symmetric_field_mirrors_about_quarter_pi() {
        let prm = params(2.5);
        let a = coherent_coeffs(C64::new(0.0, 0.9), 9, 1e-6).unwrap();
        let field = product_state(&a, &a, 1e-6).unwrap();
        let atom = AtomPrep::from_kappa(1.1);
        let spec = GridSpec::with_p_max(60, 64, 8.0);
        let grid = momentum_distribution(&field, &atom, &prm, &spec).unwrap();
        // phi_j = 2 pi j / 64; reflection phi -> pi/2 - phi maps j -> 16 - j.
        for i in (0..grid.p.len()).step_by(7) {
            for j in 0..64usize {
                let jr = (16 + 64 - j) % 64;
                let (w1, w2) = (grid.value(i, j), grid.value(i, jr));
                assert!(
                    (w1 - w2).abs() < 1e-10,
                    "i = {i}, j = {j}: {w1} vs {w2}"
                );
            }
        }
    }

    #[test]
    fn fock_product_rings_sit_on_root_n_radii() {
        let prm = params(4.0);
        let one = fock_coeffs(1, 1).unwrap();
        let field = product_state(&one, &one, 1e-9).unwrap();
        let spec = GridSpec::with_p_max(480, 64, 8.2);
        let grid = momentum_distribution(&field, &AtomPrep::ground(), &prm, &spec).unwrap();
        let marginal = grid.radial_marginal();
        let floor = 1e-6 * marginal.iter().cloned().fold(0.0, f64::max);
        // Local maxima away from the central cluster must sit near
        // sqrt(1) * lambda or sqrt(2) * lambda (n' <= m + n = 2).
        let mut found = Vec::new();
        for i in 1..marginal.len() - 1 {
            if grid.p[i] > 0.5 * prm.lambda
                && marginal[i] > floor
                && marginal[i] > marginal[i - 1]
                && marginal[i] >= marginal[i + 1]
            {
                found.push(grid.p[i]);
            }
        }
        assert!(!found.is_empty());
        for p in found {
            let ok = [1.0f64, 2.0]
                .iter()
                .any(|n| (p - n.sqrt() * prm.lambda).abs() < 0.07 * n.sqrt() * prm.lambda);
            assert!(ok, "spurious radial maximum at p = {p}");
        }
    }

    #[test]
    fn cutoff_convergence_after_captured_weight_settles() {
        let prm = params(2.0);
        let a = coherent_coeffs(C64::new(0.0, 0.8), 12, 1e-7).unwrap();
        let field = product_state(&a, &a, 1e-6).unwrap();
        let atom = AtomPrep::from_kappa(std::f64::consts::FRAC_PI_2);
        let spec = GridSpec::with_p_max(50, 48, 7.0);
        let base = momentum_distribution(&field, &atom, &prm, &spec).unwrap();

        let mut more = prm.clone();
        more.n_total_max = Some(field.n_total_max() + 5);
        let a_wide = coherent_coeffs(C64::new(0.0, 0.8), 20, 1e-9).unwrap();
        let field_wide = product_state(&a_wide, &a_wide, 1e-9).unwrap();
        let wide = momentum_distribution(&field_wide, &atom, &more, &spec).unwrap();

        let mut linf = 0.0f64;
        for (x, y) in base.w.iter().zip(&wide.w) {
            linf = linf.max((x - y).abs());
        }
        assert!(linf < 1e-3, "L_inf = {linf}");
    }

    #[test]
    fn budget_cap_trips() {
        let mut prm = params(2.0);
        prm.term_budget = Some(10);
        let spec = GridSpec::with_p_max(50, 48, 7.0);
        match momentum_distribution(&vacuum_field(), &AtomPrep::ground(), &prm, &spec) {
            Err(Error::BudgetExceeded { .. }) => {}
            other => panic!("expected BudgetExceeded, got {other:?}"),
        }
    }

    #[test]
    fn integral_matches_captured_weight() {
        let prm = params(2.0);
        let a = coherent_coeffs(C64::new(0.0, 0.8), 12, 1e-7).unwrap();
        let field = product_state(&a, &a, 1e-6).unwrap();
        let atom = AtomPrep::from_kappa(std::f64::consts::FRAC_PI_2);
        // Deflected harmonics have algebraic momentum tails, so hitting the
        // 1e-3 band needs a generous extent.
        let spec = GridSpec::with_p_max(900, 128, 50.0);
        let grid = momentum_distribution(&field, &atom, &prm, &spec).unwrap();
        assert!(
            (grid.total() - field.captured_weight()).abs() < 1e-3,
            "total = {}, captured = {}",
            grid.total(),
            field.captured_weight()
        );
    }
}
