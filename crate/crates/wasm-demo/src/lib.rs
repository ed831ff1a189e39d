//! Browser demo: three interactive views over `tempora`.
//!
//! Each operation is a plain Rust function returning a flat `Vec<f64>` so it
//! can be tested natively; the `#[wasm_bindgen]` wrappers only convert errors.

use tempora::contspec::{make_packet, weak_weyl_residual};
use tempora::spectra::{rabi_bound_check, rabi_hamiltonian};
use tempora::timeop::osc_timeop_spectrum;
use wasm_bindgen::prelude::*;

/// Largest Toeplitz truncation the page may request.
pub const MAX_TOEPLITZ: usize = 400;
/// Largest Fock cutoff the page may request.
pub const MAX_CUTOFF: usize = 300;

/// Sorted eigenvalues of the `n × n` oscillator time-operator truncation.
pub fn toeplitz_eigenvalues(omega: f64, n: usize) -> Result<Vec<f64>, String> {
    if n > MAX_TOEPLITZ {
        return Err(format!("n = {n} exceeds the demo limit {MAX_TOEPLITZ}"));
    }
    osc_timeop_spectrum(omega, n).map(|s| s.eigenvalues).map_err(|e| e.to_string())
}

/// Rows `(t, residual at N, residual at 2N)` of the weak Weyl relation, flattened.
pub fn weyl_curve(n: usize, k0: f64, sigma: f64, tmax: f64, steps: usize) -> Result<Vec<f64>, String> {
    let err = |e: tempora::Error| e.to_string();
    let coarse = make_packet(50.0, n, 1.0, 0.0, k0, sigma).map_err(err)?;
    let fine = make_packet(50.0, 2 * n, 1.0, 0.0, k0, sigma).map_err(err)?;
    let steps = steps.max(1);
    let mut out = Vec::with_capacity(3 * (steps + 1));
    for i in 0..=steps {
        let t = tmax * i as f64 / steps as f64;
        out.push(t);
        out.push(weak_weyl_residual(&coarse, t).map_err(err)?);
        out.push(weak_weyl_residual(&fine, t).map_err(err)?);
    }
    Ok(out)
}

/// Rows `(n, ν'_2n, lower, upper, inside)` for the lowest `count` even levels, flattened.
pub fn rabi_levels(mu: f64, omega: f64, g: f64, cutoff: usize, count: usize) -> Result<Vec<f64>, String> {
    if cutoff > MAX_CUTOFF {
        return Err(format!("cutoff = {cutoff} exceeds the demo limit {MAX_CUTOFF}"));
    }
    let eig = rabi_hamiltonian(mu, omega, g, cutoff).map_err(|e| e.to_string())?.eigenvalues();
    let inside = rabi_bound_check(&eig, mu, omega, g, count).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(5 * count);
    for (n, ok) in inside.iter().enumerate() {
        let nu = omega * n as f64 - g * g / omega;
        out.extend([n as f64, eig[2 * n], nu - mu, nu + mu, if *ok { 1.0 } else { 0.0 }]);
    }
    Ok(out)
}

#[wasm_bindgen(js_name = toeplitzEigenvalues)]
pub fn toeplitz_eigenvalues_js(omega: f64, n: usize) -> Result<Vec<f64>, JsError> {
    toeplitz_eigenvalues(omega, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = weylCurve)]
pub fn weyl_curve_js(n: usize, k0: f64, sigma: f64, tmax: f64, steps: usize) -> Result<Vec<f64>, JsError> {
    weyl_curve(n, k0, sigma, tmax, steps).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = rabiLevels)]
pub fn rabi_levels_js(mu: f64, omega: f64, g: f64, cutoff: usize, count: usize) -> Result<Vec<f64>, JsError> {
    rabi_levels(mu, omega, g, cutoff, count).map_err(|e| JsError::new(&e))
}
