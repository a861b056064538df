use ncs_web::{bode_json, gains_json, simulate_json};
use serde_json::Value;

#[test]
fn bode_peaks_match_products() {
    let v: Value = serde_json::from_str(&bode_json("p3", &[3, 4], 200).unwrap()).unwrap();
    let curves = v.as_array().unwrap();
    assert_eq!(curves.len(), 2);
    for c in curves {
        let peak = c["magnitudes"]
            .as_array()
            .unwrap()
            .iter()
            .map(|m| m.as_f64().unwrap())
            .fold(0.0, f64::max);
        assert_eq!(peak, c["product"].as_f64().unwrap());
        assert!(c["omegas"].as_array().unwrap().len() <= 202);
    }
    assert_eq!(curves[0]["stable"], true);
    assert_eq!(curves[1]["stable"], false);
}

#[test]
fn gains_cover_every_shift() {
    let v: Value = serde_json::from_str(&gains_json("p3", 4).unwrap()).unwrap();
    assert_eq!(v["shifts"].as_array().unwrap().len(), 5);
    assert_eq!(v["tau_a_star"], 3);
}

#[test]
fn trace_lengths_and_errors() {
    let v: Value = serde_json::from_str(&simulate_json("p1", 3, 250, 7, false).unwrap()).unwrap();
    assert_eq!(v["y"].as_array().unwrap().len(), 250);
    assert_eq!(v["diverged"], false);
    assert!(simulate_json("p2", 3, 10, 0, false).is_err());
}
