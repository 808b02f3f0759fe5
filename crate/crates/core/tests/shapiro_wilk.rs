use serde::Deserialize;
use ucm_core::stats::shapiro_wilk;

#[derive(Deserialize)]
struct Case {
    sample: Vec<f64>,
    w: f64,
    p: f64,
}

// reference W and p were computed with scipy.stats.shapiro
const REFERENCE: &str = include_str!("fixtures/shapiro_wilk_reference.json");

#[test]
fn matches_reference_implementation() {
    let cases: Vec<Case> = serde_json::from_str(REFERENCE).unwrap();
    assert!(cases.len() >= 20);
    for c in &cases {
        let r = shapiro_wilk(&c.sample).unwrap();
        assert!((r.w - c.w).abs() <= 1e-3, "n={} w={} ref={}", c.sample.len(), r.w, c.w);
        assert!((r.p - c.p).abs() <= 1e-3, "n={} p={} ref={}", c.sample.len(), r.p, c.p);
    }
}

#[test]
fn paired_differences_reference() {
    let d = [9.4, 12.85, 6.82, 7.3, 15.9];
    let r = shapiro_wilk(&d).unwrap();
    assert!((r.w - 0.9114801789040096).abs() <= 1e-6, "{}", r.w);
    assert!((r.p - 0.47653634480692886).abs() <= 1e-4, "{}", r.p);
}
