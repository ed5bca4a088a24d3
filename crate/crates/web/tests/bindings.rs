use serde_json::Value;
use vqscale::fitlab;
use vqscale_web::{landscape_json, projection_json, resilience_json};

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn noiseless_landscape_has_zero_error() {
    let v = parse(landscape_json("benqo", 5, 1, "none", 2, 41).unwrap());
    assert_eq!(v["thetas"].as_array().unwrap().len(), 41);
    assert_eq!(v["exact"], v["noisy"]);
    assert_eq!(v["rae"].as_f64(), Some(0.0));
}

#[test]
fn gaussian_landscape_is_reproducible() {
    let a = landscape_json("vqe2l", 4, 7, "gaussian:0.05", 0, 30).unwrap();
    assert_eq!(a, landscape_json("vqe2l", 4, 7, "gaussian:0.05", 0, 30).unwrap());
    let v = parse(a);
    let rae = v["rae"].as_f64().unwrap();
    assert!(rae > 0.0 && rae < 1.0, "{rae}");
}

#[test]
fn landscape_rejects_bad_input() {
    assert!(landscape_json("qaoa", 3, 0, "none", 0, 10).is_err());
    assert!(landscape_json("benqo", 20, 0, "none", 0, 10).is_err());
    assert!(landscape_json("benqo", 4, 0, "none", 4, 10).is_err());
    assert!(landscape_json("benqo", 4, 0, "gaussian:-1", 0, 10).is_err());
    assert!(landscape_json("nope", 4, 0, "none", 0, 10).is_err());
    assert!(landscape_json("benqo", 4, 0, "shots:64", 0, 1).is_err());
}

#[test]
fn resilience_recovers_known_curve() {
    let sig = fitlab::logspace(1e-3, 1e1, 16);
    let p: Vec<f64> = sig.iter().map(|&s| fitlab::tanh_curve(s, 0.9, 0.05, 1.5, -3.0)).collect();
    let v = parse(resilience_json(&sig, &p, 0).unwrap());
    let s_star = v["profile"]["sigma_star"].as_f64().unwrap();
    assert!((s_star - (-2.0f64).exp()).abs() < 1e-6, "{s_star}");
    assert_eq!(v["curve"].as_array().unwrap().len(), 120);
    assert!(resilience_json(&sig, &p, 100).is_ok());
    assert!(resilience_json(&sig[..3], &p[..3], 0).is_err());
}

#[test]
fn projection_matches_core() {
    let v = parse(projection_json("pl", 100, 4.0, 0.04).unwrap());
    assert_eq!(v["window_opens"].as_u64(), Some(25));
    assert_eq!(v["rows"].as_array().unwrap().len(), 98);
    assert!(projection_json("pl", 2, 4.0, 0.04).is_err());
    assert!(projection_json("pl", 50, 0.0, 0.04).is_err());
    assert!(projection_json("cubic", 50, 4.0, 0.04).is_err());
}
