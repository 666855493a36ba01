//! Shared fixtures for the criterion benches.

use num_complex::Complex64 as C64;

use osg_core::states::{coherent_coeffs, product_state, AtomPrep, TwoModeFockState};
use osg_core::SimParams;

pub fn bench_params(lambda: f64) -> SimParams {
    SimParams::new(lambda, std::f64::consts::TAU / 10.0, 1e-6).expect("valid params")
}

pub fn coherent_pair(modulus: f64) -> TwoModeFockState {
    let a = coherent_coeffs(C64::new(0.0, modulus), 48, 1e-7).expect("window");
    product_state(&a, &a, 1e-6).expect("product")
}

pub fn protocol_atom() -> AtomPrep {
    AtomPrep::from_kappa(std::f64::consts::FRAC_PI_2)
}

// num-complex is pulled through the public fixtures.
pub use num_complex;
