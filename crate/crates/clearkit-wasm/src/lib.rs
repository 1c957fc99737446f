//! WebAssembly bindings for the browser demo in `www/`.
//!
//! The real work lives in [`api`] as JSON-in/JSON-out functions that build and
//! test on any target. Only the thin `#[wasm_bindgen]` wrappers below are
//! wasm-specific: they rethrow library errors as JS exceptions, which the page
//! catches and displays. Build with `./build-web.sh` (wasm-pack) from the
//! crate root.

pub mod api;

#[cfg(target_arch = "wasm32")]
mod bindings {
    use wasm_bindgen::prelude::*;

    fn to_js<T>(result: clearkit::Result<T>) -> Result<T, JsError> {
        result.map_err(|e| JsError::new(&e.to_string()))
    }

    /// The built-in demo device as pretty-printed config JSON.
    #[wasm_bindgen]
    pub fn demo_device_json() -> String {
        super::api::demo_device_json()
    }

    /// Solve and simulate a CLEAR pulse; see [`super::api::design_and_simulate`].
    #[wasm_bindgen]
    pub fn design_and_simulate(
        device_json: &str,
        p_norm: f64,
        t_up_ns: f64,
        t_flat_ns: f64,
        t_dn_ns: f64,
        kerr_on: bool,
    ) -> Result<String, JsError> {
        to_js(super::api::design_and_simulate(
            device_json,
            p_norm,
            t_up_ns,
            t_flat_ns,
            t_dn_ns,
            kerr_on,
        ))
    }

    /// Synthesize and fit one Ramsey trace; see [`super::api::ramsey_probe`].
    #[wasm_bindgen]
    pub fn ramsey_probe(
        device_json: &str,
        n0: f64,
        phi0: f64,
        noise_sigma: f64,
        seed: u64,
    ) -> Result<String, JsError> {
        to_js(super::api::ramsey_probe(
            device_json,
            n0,
            phi0,
            noise_sigma,
            seed,
        ))
    }

    /// Tune the ring-down amplitudes on the noisy Kerr emulator; see
    /// [`super::api::tune_ringdown`].
    #[wasm_bindgen]
    pub fn tune_ringdown(
        device_json: &str,
        p_norm: f64,
        t_dn_ns: f64,
        budget: u32,
        noise_sigma: f64,
        seed: u64,
    ) -> Result<String, JsError> {
        to_js(super::api::tune_ringdown(
            device_json,
            p_norm,
            t_dn_ns,
            budget,
            noise_sigma,
            seed,
        ))
    }
}
