//! Targeting protocol: forward map from field parameters to the expected
//! deflection, its closed-form inverse (field planning), peak diagnostics on
//! computed distributions, and the physical screen mapping.
//!
//! Confining both mode amplitudes to the momentum quadrature (phases
//! +-pi/2) ties the deposition spot to the mean photon numbers:
//!
//! ```text
//! p_bar   ~ lambda sqrt(mean_a + mean_b)
//! phi_bar ~ sign_a sign_b atan(sqrt(mean_b / mean_a)) + pi [sign_a = -1]
//! ```
//!
//! The map is approximate (the quantum rings are discrete) but inverts
//! analytically, so planning a spot needs no numerical search. Squeezing in
//! the same quadrature (phase pi) sharpens the spot at a fixed target; the
//! planner only has to raise |alpha| to pay for the sinh^2 noise photons.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::grid::MomentumGrid;

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Requested deposition spot in scaled-momentum polar coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LithTarget {
    pub p_bar: f64,
    /// Azimuth in [0, 2 pi).
    pub phi_bar: f64,
}

impl LithTarget {
    pub fn new(p_bar: f64, phi_bar: f64) -> Result<Self> {
        if !(p_bar > 0.0) || !p_bar.is_finite() {
            return Err(Error::InvalidParam(format!("target radius must be > 0, got {p_bar}")));
        }
        Ok(Self {
            p_bar,
            phi_bar: phi_bar.rem_euclid(std::f64::consts::TAU),
        })
    }
}

/// Planned cavity fields: momentum-quadrature amplitudes with signs, plus
/// squeeze factors (squeeze phase fixed to pi, the protocol quadrature).
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPlan {
    pub alpha_mod: f64,
    pub beta_mod: f64,
    pub sign_a: i8,
    pub sign_b: i8,
    pub r_a: f64,
    pub r_b: f64,
    /// Planned mean photon numbers.
    pub mean_a: f64,
    pub mean_b: f64,
}

impl FieldPlan {
    /// Complex amplitude of mode a: sign_a * i * |alpha|.
    pub fn alpha(&self) -> C64 {
        C64::new(0.0, self.sign_a as f64 * self.alpha_mod)
    }

    pub fn beta(&self) -> C64 {
        C64::new(0.0, self.sign_b as f64 * self.beta_mod)
    }

    /// Quadrature phase of mode a, +-pi/2.
    pub fn phase_a(&self) -> f64 {
        self.sign_a as f64 * std::f64::consts::FRAC_PI_2
    }

    pub fn phase_b(&self) -> f64 {
        self.sign_b as f64 * std::f64::consts::FRAC_PI_2
    }
}

/// Forward map: expected deflection from mean photon numbers and quadrature
/// signs. `mean_a = 0` lands on the +-pi/2 axis; only a doubly empty field
/// is rejected.
pub fn predict_deflection(
    mean_a: f64,
    mean_b: f64,
    sign_a: i8,
    sign_b: i8,
    lambda: f64,
) -> Result<(f64, f64)> {
    if mean_a < 0.0 || mean_b < 0.0 {
        return Err(Error::InvalidParam("mean photon numbers must be >= 0".into()));
    }
    if mean_a + mean_b == 0.0 {
        return Err(Error::DegenerateTarget);
    }
    let p_bar = lambda * (mean_a + mean_b).sqrt();
    let base = (mean_b / mean_a).sqrt().atan();
    let mut phi = (sign_a as f64) * (sign_b as f64) * base;
    if sign_a < 0 {
        phi += std::f64::consts::PI;
    }
    Ok((p_bar, phi.rem_euclid(std::f64::consts::TAU)))
}

/// Inverse map: field plan hitting the target at the given squeeze factors.
pub fn plan_fields(target: &LithTarget, lambda: f64, r_a: f64, r_b: f64) -> Result<FieldPlan> {
    if r_a < 0.0 || r_b < 0.0 {
        return Err(Error::InvalidParam("squeeze factors must be >= 0".into()));
    }
    let ratio = target.p_bar / lambda;
    let (sin, cos) = target.phi_bar.sin_cos();
    let mean_a = (ratio * cos).powi(2);
    let mean_b = (ratio * sin).powi(2);
    let floor_a = r_a.sinh().powi(2);
    let floor_b = r_b.sinh().powi(2);
    if mean_a < floor_a {
        return Err(Error::InfeasibleSqueeze {
            required: mean_a,
            floor: floor_a,
        });
    }
    if mean_b < floor_b {
        return Err(Error::InfeasibleSqueeze {
            required: mean_b,
            floor: floor_b,
        });
    }
    // Quadrant of the target fixes the quadrature signs.
    let sign_a: i8 = if cos >= 0.0 { 1 } else { -1 };
    let sign_b: i8 = if sin >= 0.0 { 1 } else { -1 };
    // Imaginary-axis displacement with squeeze phase pi:
    // mean = |alpha|^2 e^{-2r} + sinh^2 r.
    let alpha_mod = r_a.exp() * (mean_a - floor_a).sqrt();
    let beta_mod = r_b.exp() * (mean_b - floor_b).sqrt();
    Ok(FieldPlan {
        alpha_mod,
        beta_mod,
        sign_a,
        sign_b,
        r_a,
        r_b,
        mean_a,
        mean_b,
    })
}

/// Located maximum of a grid beyond an exclusion radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub p: f64,
    pub phi: f64,
    pub value: f64,
    pub i_radial: usize,
    pub j_azimuthal: usize,
}

/// Default exclusion radius: half a ring spacing keeps the undeflected
/// central cluster out of the search.
pub fn default_exclusion_radius(lambda: f64) -> f64 {
    0.5 * lambda
}

fn parabolic_offset(lm: f64, l0: f64, lp: f64) -> (f64, f64) {
    let denom = lm - 2.0 * l0 + lp;
    if denom >= 0.0 || !denom.is_finite() {
        return (0.0, l0);
    }
    let delta = (0.5 * (lm - lp) / denom).clamp(-0.5, 0.5);
    let refined = l0 - 0.25 * (lm - lp) * delta;
    (delta, refined)
}

/// Argmax of W over p > p_min, refined by separable quadratic interpolation
/// on the 3x3 neighborhood (in log W when the whole neighborhood is
/// positive). Ties break toward smaller radius, then smaller azimuth.
pub fn locate_peak(grid: &MomentumGrid, p_min: f64) -> Result<Peak> {
    let i_start = grid.p.iter().position(|&p| p > p_min).ok_or(Error::EmptyRegion {
        p_min,
        p_max: grid.p_max(),
    })?;
    let (n_p, n_phi) = (grid.p.len(), grid.phi.len());
    let mut best = (i_start, 0usize, f64::NEG_INFINITY);
    for i in i_start..n_p {
        for j in 0..n_phi {
            let w = grid.value(i, j);
            if w > best.2 {
                best = (i, j, w);
            }
        }
    }
    let (i0, j0, w0) = best;

    // 3x3 neighborhood (azimuth wraps; radius clamps at the borders).
    let jm = (j0 + n_phi - 1) % n_phi;
    let jp = (j0 + 1) % n_phi;
    let mut neighborhood_positive = true;
    for di in -1i64..=1 {
        let i = (i0 as i64 + di).clamp(0, n_p as i64 - 1) as usize;
        for j in [jm, j0, jp] {
            if grid.value(i, j) <= 0.0 {
                neighborhood_positive = false;
            }
        }
    }
    let lift = |w: f64| if neighborhood_positive { w.ln() } else { w };
    let unlift = |l: f64| if neighborhood_positive { l.exp() } else { l };

    let (dp_cells, l_rad) = if i0 > 0 && i0 + 1 < n_p {
        parabolic_offset(
            lift(grid.value(i0 - 1, j0)),
            lift(w0),
            lift(grid.value(i0 + 1, j0)),
        )
    } else {
        (0.0, lift(w0))
    };
    let (dphi_cells, l_azi) = parabolic_offset(lift(grid.value(i0, jm)), lift(w0), lift(grid.value(i0, jp)));

    let dp = grid.p[1] - grid.p[0];
    let dphi = std::f64::consts::TAU / n_phi as f64;
    Ok(Peak {
        p: grid.p[i0] + dp_cells * dp,
        phi: (grid.phi[j0] + dphi_cells * dphi).rem_euclid(std::f64::consts::TAU),
        value: unlift(l_rad.max(l_azi)),
        i_radial: i0,
        j_azimuthal: j0,
    })
}

/// Full widths at half maximum through a located peak; an axis reports
/// `None` when W never falls below half maximum inside the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakWidth {
    pub radial_fwhm: Option<f64>,
    pub azimuthal_fwhm: Option<f64>,
}

fn crossing(x0: f64, x1: f64, w0: f64, w1: f64, half: f64) -> f64 {
    if (w1 - w0).abs() < f64::MIN_POSITIVE {
        return x1;
    }
    x0 + (x1 - x0) * (w0 - half) / (w0 - w1)
}

/// FWHM along the radial cut through the peak azimuth and the azimuthal cut
/// at the peak radius.
pub fn peak_width(grid: &MomentumGrid, peak: &Peak) -> PeakWidth {
    let half = 0.5 * grid.value(peak.i_radial, peak.j_azimuthal);
    let (i0, j0) = (peak.i_radial, peak.j_azimuthal);
    let (n_p, n_phi) = (grid.p.len(), grid.phi.len());

    let radial = {
        let mut lo = None;
        for i in (0..i0).rev() {
            if grid.value(i, j0) < half {
                lo = Some(crossing(
                    grid.p[i + 1],
                    grid.p[i],
                    grid.value(i + 1, j0),
                    grid.value(i, j0),
                    half,
                ));
                break;
            }
        }
        let mut hi = None;
        for i in i0 + 1..n_p {
            if grid.value(i, j0) < half {
                hi = Some(crossing(
                    grid.p[i - 1],
                    grid.p[i],
                    grid.value(i - 1, j0),
                    grid.value(i, j0),
                    half,
                ));
                break;
            }
        }
        match (lo, hi) {
            (Some(a), Some(b)) => Some(b - a),
            _ => None,
        }
    };

    let dphi = std::f64::consts::TAU / n_phi as f64;
    let azimuthal = {
        let mut lo = None;
        for step in 1..n_phi {
            let j = (j0 + n_phi - step) % n_phi;
            if grid.value(i0, j) < half {
                let prev = (j0 + n_phi - step + 1) % n_phi;
                lo = Some(crossing(
                    -((step - 1) as f64) * dphi,
                    -(step as f64) * dphi,
                    grid.value(i0, prev),
                    grid.value(i0, j),
                    half,
                ));
                break;
            }
        }
        let mut hi = None;
        for step in 1..n_phi {
            let j = (j0 + step) % n_phi;
            if grid.value(i0, j) < half {
                let prev = (j0 + step - 1) % n_phi;
                hi = Some(crossing(
                    (step - 1) as f64 * dphi,
                    step as f64 * dphi,
                    grid.value(i0, prev),
                    grid.value(i0, j),
                    half,
                ));
                break;
            }
        }
        match (lo, hi) {
            (Some(a), Some(b)) => Some(b - a),
            _ => None,
        }
    };

    PeakWidth {
        radial_fwhm: radial,
        azimuthal_fwhm: azimuthal,
    }
}

/// Cavity-to-screen geometry in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScreenGeometry {
    /// Cavity-to-screen distance, m.
    pub distance: f64,
    /// Longitudinal velocity, m/s.
    pub velocity: f64,
    /// Atomic mass, kg.
    pub mass: f64,
    /// Mode wavenumber, 1/m.
    pub wavenumber: f64,
}

impl ScreenGeometry {
    pub fn new(distance: f64, velocity: f64, mass: f64, wavenumber: f64) -> Result<Self> {
        for (name, v) in [
            ("distance", distance),
            ("velocity", velocity),
            ("mass", mass),
            ("wavenumber", wavenumber),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParam(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(Self {
            distance,
            velocity,
            mass,
            wavenumber,
        })
    }
}

/// Transverse screen displacement (meters) of a scaled momentum p.
pub fn screen_map(p: f64, geom: &ScreenGeometry) -> f64 {
    p * HBAR * geom.wavenumber * geom.distance / (geom.mass * geom.velocity)
}
