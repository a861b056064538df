//! Browser bindings for the bundled example loop. Every export returns a JSON
//! string; `www/index.html` draws it on canvases.

use ncs_core::config::RunConfig;
use ncs_core::criterion::bode_margin_data;
use ncs_core::netsim::{simulate, DelaySource, P3Policy};
use ncs_core::uncertainty::{default_t_max, optimize, Protocol};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn parse_protocol(s: &str) -> Result<Protocol, String> {
    s.parse().map_err(|e: ncs_core::Error| e.to_string())
}

#[derive(Serialize)]
struct Curve {
    span: u32,
    tau_a_star: u32,
    alpha_star: f64,
    product: f64,
    stable: bool,
    omegas: Vec<f64>,
    magnitudes: Vec<f64>,
}

/// Scaled magnitude curves for each span; decimated to `points` samples plus the peak.
pub fn bode_json(protocol: &str, spans: &[u32], points: usize) -> Result<String, String> {
    let protocol = parse_protocol(protocol)?;
    let cfg = RunConfig::example();
    let (plant, spec) = (
        cfg.plant().map_err(|e| e.to_string())?,
        cfg.controller_spec().map_err(|e| e.to_string())?,
    );
    let curves = bode_margin_data(&plant, &spec, 0, protocol, spans, &Default::default())
        .map_err(|e| e.to_string())?;
    let out: Vec<Curve> = curves
        .into_iter()
        .map(|c| {
            let step = c.omegas.len().div_ceil(points.max(2));
            let peak_at = c.report.omega_peak;
            let (omegas, magnitudes) = c
                .omegas
                .iter()
                .zip(&c.magnitudes)
                .enumerate()
                .filter(|(i, (w, _))| i % step == 0 || **w == peak_at)
                .map(|(_, (w, m))| (*w, *m))
                .unzip();
            Curve {
                span: c.tau_hat_n,
                tau_a_star: c.report.tau_a_star,
                alpha_star: c.report.alpha_star,
                product: c.report.product,
                stable: c.report.verdict,
                omegas,
                magnitudes,
            }
        })
        .collect();
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

/// Gain per family and truncation for every acausal shift of one span.
pub fn gains_json(protocol: &str, span: u32) -> Result<String, String> {
    let protocol = parse_protocol(protocol)?;
    let r = optimize(protocol, span, default_t_max(span)).map_err(|e| e.to_string())?;
    serde_json::to_string(&r).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Trace {
    y: Vec<f64>,
    u: Vec<f64>,
    n: Vec<f64>,
    delays: Vec<i64>,
    diverged: bool,
    divergence_instant: Option<usize>,
}

/// Closed loop of the example with uniform random delays in `[0, span]`,
/// designed with the shift the analysis picks for that span.
pub fn simulate_json(
    protocol: &str,
    span: u32,
    horizon: usize,
    seed: u64,
    newest: bool,
) -> Result<String, String> {
    let mut cfg = RunConfig::example();
    cfg.network.protocol = parse_protocol(protocol)?;
    cfg.network.tau_hi = cfg.network.tau_lo + span;
    let mut sim = cfg.sim_config().map_err(|e| e.to_string())?;
    sim.horizon = horizon.clamp(1, 20_000);
    sim.delays = DelaySource::Uniform { seed };
    sim.p3_policy = if newest {
        P3Policy::Newest
    } else {
        P3Policy::Oldest
    };
    let t = simulate(&sim).map_err(|e| e.to_string())?;
    let out = Trace {
        delays: t.packets.iter().map(|p| p.delay).collect(),
        y: t.y,
        u: t.u,
        n: t.n,
        diverged: t.diverged,
        divergence_instant: t.divergence_instant,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn bode_curves(protocol: &str, spans: Vec<u32>, points: usize) -> Result<String, JsError> {
    bode_json(protocol, &spans, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn gain_curves(protocol: &str, span: u32) -> Result<String, JsError> {
    gains_json(protocol, span).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn sim_trace(
    protocol: &str,
    span: u32,
    horizon: usize,
    seed: u32,
    newest: bool,
) -> Result<String, JsError> {
    simulate_json(protocol, span, horizon, seed.into(), newest).map_err(|e| JsError::new(&e))
}
