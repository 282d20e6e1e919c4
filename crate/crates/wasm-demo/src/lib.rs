//! Browser bindings: three operations on the reinforced circle driven by a
//! rotation, each returning a JSON document for the page to plot.

use serde::Serialize;
use wasm_bindgen::prelude::*;
use wavechain::merging::{certify_stability, merging_time};
use wavechain::models::{circle_system, tilde_pi_closed_form_shift_minus1};
use wavechain::sim::empirical_wave_profile;
use wavechain::{Metric, MergingTime, Result};

/// Keeps the page responsive; the library itself has no such cap.
const MAX_POINTS: usize = 201;
const MAX_SAMPLES: u64 = 2_000_000;

#[derive(Serialize)]
struct Profile {
    exact: Vec<f64>,
    /// Only for the backward shift, where a closed form exists.
    closed_form: Option<Vec<f64>>,
    c: f64,
    argmax: usize,
    argmin: usize,
}

#[derive(Serialize)]
struct Trace {
    distances: Vec<Option<f64>>,
    merging_time: Option<u64>,
    reason: Option<String>,
}

#[derive(Serialize)]
struct Simulated {
    empirical: Vec<f64>,
    exact: Vec<f64>,
    tv: f64,
}

fn check_size(n: usize) -> Result<()> {
    if n > MAX_POINTS {
        return Err(wavechain::Error::InvalidArgument(format!("at most {MAX_POINTS} points in the demo")));
    }
    Ok(())
}

pub fn profile_json(n: usize, eps: f64, shift: i32) -> Result<String> {
    check_size(n)?;
    let s = circle_system(n, eps, shift as i64)?;
    let pi = s.require_wave_measure()?;
    let c = certify_stability(&s, pi, None)?.c;
    let closed_form = if shift == -1 {
        Some(tilde_pi_closed_form_shift_minus1(n, eps)?.into_weights())
    } else {
        None
    };
    Ok(serde_json::to_string(&Profile {
        exact: pi.weights().to_vec(),
        closed_form,
        c,
        argmax: pi.argmax(),
        argmin: pi.argmin(),
    })
    .expect("serializes"))
}

pub fn trace_json(n: usize, eps: f64, shift: i32, threshold: f64, max_steps: u32) -> Result<String> {
    check_size(n)?;
    let s = circle_system(n, eps, shift as i64)?;
    let r = merging_time(&s, threshold, max_steps as u64, Metric::RelativeSup)?;
    let distances = r.trace.iter().map(|(_, d)| d.is_finite().then(|| d.value())).collect();
    Ok(serde_json::to_string(&Trace {
        distances,
        merging_time: match r.merging_time {
            MergingTime::Steps(t) => Some(t),
            MergingTime::Unbounded => None,
        },
        reason: r.reason,
    })
    .expect("serializes"))
}

pub fn simulate_json(n: usize, eps: f64, shift: i32, samples: u32, seed: u32) -> Result<String> {
    check_size(n)?;
    let samples = (samples as u64).min(MAX_SAMPLES);
    let s = circle_system(n, eps, shift as i64)?;
    let pi = s.require_wave_measure()?.weights().to_vec();
    let emp = empirical_wave_profile(&s, 20 * n as u64, s.order(), samples, seed as u64)?.into_weights();
    let tv = 0.5 * emp.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum::<f64>();
    Ok(serde_json::to_string(&Simulated {
        empirical: emp,
        exact: pi,
        tv,
    })
    .expect("serializes"))
}

fn js(r: Result<String>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

/// Invariant measure of the reduced kernel and the stability constant `c`.
#[wasm_bindgen]
pub fn wave_profile(n: usize, eps: f64, shift: i32) -> std::result::Result<String, JsError> {
    js(profile_json(n, eps, shift))
}

/// Relative-sup pairwise merging measure per step, up to the threshold.
#[wasm_bindgen]
pub fn merging_trace(n: usize, eps: f64, shift: i32, threshold: f64, max_steps: u32) -> std::result::Result<String, JsError> {
    js(trace_json(n, eps, shift, threshold, max_steps))
}

/// Occupation histogram of `g^n X_n` next to the exact measure.
#[wasm_bindgen]
pub fn simulated_profile(n: usize, eps: f64, shift: i32, samples: u32, seed: u32) -> std::result::Result<String, JsError> {
    js(simulate_json(n, eps, shift, samples, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn profile_matches_its_closed_form() {
        let v: Value = serde_json::from_str(&profile_json(5, 1.0, -1).unwrap()).unwrap();
        assert!((v["exact"][0].as_f64().unwrap() - 2.0 / 7.0).abs() < 1e-12);
        let (exact, closed) = (v["exact"].as_array().unwrap(), v["closed_form"].as_array().unwrap());
        for (a, b) in exact.iter().zip(closed) {
            assert!((a.as_f64().unwrap() - b.as_f64().unwrap()).abs() < 1e-12);
        }
        assert!((v["c"].as_f64().unwrap() - 2.0).abs() < 1e-12);
        let v: Value = serde_json::from_str(&profile_json(7, 1.0, 2).unwrap()).unwrap();
        assert!(v["closed_form"].is_null());
    }

    #[test]
    fn trace_stops_at_the_threshold() {
        let v: Value = serde_json::from_str(&trace_json(7, 1.0, -1, 0.1, 10_000).unwrap()).unwrap();
        let t = v["merging_time"].as_u64().unwrap();
        let d = v["distances"].as_array().unwrap();
        assert_eq!(d.len() as u64, t + 1);
        assert!(d[0].is_null());
        assert!(d.last().unwrap().as_f64().unwrap() < 0.1);
    }

    #[test]
    fn simulation_is_close_and_inputs_are_checked() {
        let v: Value = serde_json::from_str(&simulate_json(9, 1.0, -1, 100_000, 3).unwrap()).unwrap();
        assert!(v["tv"].as_f64().unwrap() < 0.03);
        assert!(profile_json(4, 1.0, -1).is_err());
        assert!(profile_json(MAX_POINTS + 2, 1.0, -1).is_err());
    }
}
