use pathpair_web::{oracle_torus, route_torus, sweep_blownup};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn torus_routes_two_pairs() {
    for seed in 0..5 {
        let v = parse(route_torus(9, seed));
        assert_eq!(v["ok"], true, "{v}");
        assert_eq!(v["routes"].as_array().unwrap().len(), 2);
    }
}

#[test]
fn torus_too_small_reports_an_error() {
    let v = parse(route_torus(2, 0));
    assert_eq!(v["ok"], false);
    assert!(v["error"].as_str().is_some());
}

#[test]
fn oracle_on_small_torus() {
    let v = parse(oracle_torus(4, "[[0,5],[1,4]]"));
    assert_eq!(v["verdict"], "feasible");
    assert_eq!(v["ok"], true);
    let bad = parse(oracle_torus(4, "[[0,0]]"));
    assert_eq!(bad["ok"], false);
    let range = parse(oracle_torus(4, "[[0,99]]"));
    assert_eq!(range["ok"], false);
}

#[test]
fn sweep_on_blown_up_path() {
    let v = parse(sweep_blownup(8, 4, 7));
    assert_eq!(v["ok"], true);
    assert_eq!(v["routes"].as_array().unwrap().len(), 16);
    assert_eq!(parse(sweep_blownup(3, 3, 0))["ok"], false);
}
