use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_pathpair"));
    c.arg("--quiet");
    c
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pathpair-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn gen_star() {
    let out = run(bin().args(["gen", "star", "--n", "4"]));
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["n"], 5);
    assert_eq!(v["edges"].as_array().unwrap().len(), 4);
}

#[test]
fn gen_blownup_counts() {
    let out = run(bin().args(["gen", "blownup", "--k", "8", "--m", "4"]));
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["n"], 32);
    assert_eq!(v["edges"].as_array().unwrap().len(), 160);
}

#[test]
fn gen_bad_parameters_exit_two() {
    assert_eq!(code(&run(bin().args(["gen", "cycle", "--n", "2"]))), 2);
    assert_eq!(code(&run(bin().args(["gen", "star"]))), 2);
    assert_eq!(code(&run(bin().args(["gen", "nosuchfamily"]))), 2);
}

#[test]
fn cut_example_passes_cut_but_oracle_refutes_it() {
    let dir = scratch("cutexample");
    let g = dir.join("g.json");
    let out = run(bin().args(["gen", "cutexample", "--k", "6", "--variant", "matched", "--out"]).arg(&g));
    assert_eq!(code(&out), 0);
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&g).unwrap()).unwrap();
    assert_eq!(doc["claim"], "infeasible");
    assert_eq!(doc["pairing"]["pairs"].as_array().unwrap().len(), 6);

    let cut = run(bin().args(["cut", "--full", "--graph"]).arg(&g));
    assert_eq!(code(&cut), 0);
    assert_eq!(json(&cut)["status"], "satisfied");

    let oracle = run(bin().arg("oracle").arg("--graph").arg(&g).arg("--pairs").arg(&g));
    assert_eq!(code(&oracle), 1);
    assert_eq!(json(&oracle)["verdict"], "infeasible");
}

#[test]
fn oracle_refutes_c4_crossing_pairs() {
    let dir = scratch("c4");
    let g = dir.join("c4.json");
    let p = dir.join("p.json");
    run(bin().args(["gen", "cycle", "--n", "4", "--out"]).arg(&g));
    std::fs::write(&p, r#"{"pairs":[[0,2],[1,3]]}"#).unwrap();
    let out = run(bin().arg("oracle").arg("--graph").arg(&g).arg("--pairs").arg(&p));
    assert_eq!(code(&out), 1);
    let v = json(&out);
    assert_eq!(v["counter"]["pairs"], serde_json::json!([[0, 2], [1, 3]]));
    assert_eq!(v["exhaustive"], true);

    std::fs::write(&p, r#"{"pairs":[[0,1],[2,3]]}"#).unwrap();
    let ok = run(bin().arg("oracle").arg("--graph").arg(&g).arg("--pairs").arg(&p));
    assert_eq!(code(&ok), 0);
}

#[test]
fn budget_exhaustion_exits_three_and_flag_beats_env() {
    let dir = scratch("budget");
    let g = dir.join("q3.json");
    run(bin().args(["gen", "hypercube", "--d", "3", "--out"]).arg(&g));
    let starved = run(bin().env("PATHPAIR_BUDGET", "1").arg("oracle").arg("--graph").arg(&g).args(["--k", "4"]));
    assert_eq!(code(&starved), 3);
    let flagged = run(bin()
        .env("PATHPAIR_BUDGET", "1")
        .arg("oracle")
        .arg("--graph")
        .arg(&g)
        .args(["--k", "2", "--budget", "10000000"]));
    assert_eq!(code(&flagged), 0);
}

#[test]
fn malformed_json_reports_position() {
    let dir = scratch("malformed");
    let g = dir.join("g.json");
    std::fs::write(&g, "{\"n\": 3,\n \"edges\": [[0,1],]\n}").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_pathpair"))
        .args(["cut", "--k", "1", "--graph"])
        .arg(&g)
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    let line = String::from_utf8(out.stderr).unwrap();
    let log: serde_json::Value = serde_json::from_str(line.lines().last().unwrap()).unwrap();
    assert_eq!(log["event"], "malformed_json");
    assert!(log["message"].as_str().unwrap().contains("line 2, column"));
}

#[test]
fn random_pairs_are_seeded() {
    let a = run(bin().args(["pairs", "--n", "16", "--k", "4", "--seed", "9"]));
    let b = run(bin().args(["pairs", "--n", "16", "--k", "4", "--seed", "9"]));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    let mut terminals: Vec<u64> = v["pairs"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|p| p.as_array().unwrap().iter().map(|x| x.as_u64().unwrap()))
        .collect();
    terminals.sort_unstable();
    terminals.dedup();
    assert_eq!(terminals.len(), 8);

    let full = json(&run(bin().args(["pairs", "--n", "144", "--full"])));
    assert_eq!(full["pairs"].as_array().unwrap().len(), 72);
    assert_eq!(code(&run(bin().args(["pairs", "--n", "16", "--k", "9"]))), 2);
}

#[test]
fn thm1_on_c9_routes_then_verifies() {
    let dir = scratch("thm1");
    let c9 = dir.join("c9.json");
    let prod = dir.join("prod.json");
    let pairs = dir.join("pairs.json");
    let paths = dir.join("paths.json");
    run(bin().args(["gen", "cycle", "--n", "9", "--out"]).arg(&c9));
    run(bin().arg("product").arg("--g").arg(&c9).arg("--h").arg(&c9).arg("--out").arg(&prod));
    run(bin().args(["pairs", "--n", "81", "--k", "2", "--seed", "3", "--out"]).arg(&pairs));
    let out = run(bin()
        .args(["route", "--method", "thm1", "--graph-g"])
        .arg(&c9)
        .arg("--graph-h")
        .arg(&c9)
        .arg("--pairs")
        .arg(&pairs)
        .arg("--out")
        .arg(&paths));
    assert_eq!(code(&out), 0);
    let v = run(bin()
        .arg("verify")
        .arg("--graph")
        .arg(&prod)
        .arg("--pairs")
        .arg(&pairs)
        .arg("--paths")
        .arg(&paths));
    assert_eq!(code(&v), 0);
    assert_eq!(json(&v)["ok"], true);
}

#[test]
fn verify_rejects_a_tampered_system() {
    let dir = scratch("tamper");
    let g = dir.join("c5.json");
    let p = dir.join("p.json");
    let s = dir.join("s.json");
    run(bin().args(["gen", "cycle", "--n", "5", "--out"]).arg(&g));
    std::fs::write(&p, r#"{"pairs":[[0,2],[1,3]]}"#).unwrap();
    std::fs::write(&s, r#"{"routes":[[0,1,2],[1,2,3]]}"#).unwrap();
    let out = run(bin().arg("verify").arg("--graph").arg(&g).arg("--pairs").arg(&p).arg("--paths").arg(&s));
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["failures"][0]["kind"], "duplicated_edge");
}

#[test]
fn kmm_delta_gzip_round_trip_and_manifest_determinism() {
    let dir = scratch("kmm");
    let graph = dir.join("g.json");
    let pairs = dir.join("p.json");
    run(bin().args(["gen", "kmm", "--m", "8", "--out"]).arg(&graph));
    run(bin().arg("pairs").arg("--graph").arg(&graph).args(["--full", "--seed", "4", "--out"]).arg(&pairs));
    let mut manifests = Vec::new();
    for i in 0..2 {
        let paths = dir.join(format!("paths{i}.gz"));
        let manifest = dir.join(format!("manifest{i}.json"));
        let out = run(bin()
            .args(["route", "--method", "kmm", "--m", "8", "--explore", "--seed", "4", "--full"])
            .args(["--encoding", "delta", "--gzip", "--out"])
            .arg(&paths)
            .arg("--manifest-out")
            .arg(&manifest));
        assert_eq!(code(&out), 0);
        let v = run(bin()
            .arg("verify")
            .arg("--graph")
            .arg(&graph)
            .arg("--pairs")
            .arg(&pairs)
            .arg("--paths")
            .arg(&paths));
        assert_eq!(code(&v), 0);
        manifests.push(std::fs::read(&manifest).unwrap());
    }
    assert_eq!(manifests[0], manifests[1]);
}

#[test]
fn kmm_strict_below_threshold_is_a_usage_error() {
    assert_eq!(code(&run(bin().args(["route", "--method", "kmm", "--m", "8"]))), 2);
}

#[test]
fn sweep_and_thm2_routes() {
    let dir = scratch("sweep");
    let b = dir.join("b.json");
    run(bin().args(["gen", "blownup", "--k", "8", "--m", "4", "--out"]).arg(&b));
    let out = run(bin().args(["route", "--method", "sweep", "--full", "--seed", "1", "--graph"]).arg(&b));
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["routes"].as_array().unwrap().len(), 16);

    let k = dir.join("k16.json");
    run(bin().args(["gen", "complete", "--n", "16", "--out"]).arg(&k));
    let out = run(bin()
        .args(["route", "--method", "thm2", "--a", "2", "--b", "2", "--k", "4", "--graph-g"])
        .arg(&k)
        .arg("--graph-h")
        .arg(&k));
    assert_eq!(code(&out), 0);
}

#[test]
fn cut_grid_and_sets() {
    let out = run(bin().args(["cut", "--grid-d", "2"]));
    assert_eq!(code(&out), 1);
    let v = json(&out);
    assert_eq!(v["violator"]["size"], 20);
    assert_eq!(v["violator"]["boundary"], 18);

    let dir = scratch("cutset");
    let g = dir.join("star.json");
    run(bin().args(["gen", "star", "--n", "4", "--out"]).arg(&g));
    let out = run(bin().args(["cut", "--set", "0,1,2", "--graph"]).arg(&g));
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["pp_upper_bound"], 2);
}

#[test]
fn bench_reports_every_seed() {
    let out = run(bin().args(["bench", "--method", "sweep", "--m", "3", "--seeds", "4", "--jobs", "2"]));
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["instances"].as_array().unwrap().len(), 4);
    assert_eq!(v["all_ok"], true);
}
