use wpl_core::harness::{read_json, run_scenario, write_csv, write_json, write_roots_csv, ScenarioConfig, ScenarioName, CSV_COLUMNS, ROOT_COLUMNS};

fn quartic() -> ScenarioConfig {
    let mut c = ScenarioConfig::preset(ScenarioName::QuarticTwoCut);
    c.n = vec![10, 20];
    c
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    write_json(&run_scenario(&quartic()).unwrap(), &a).unwrap();
    write_json(&run_scenario(&quartic()).unwrap(), &b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn json_round_trip_keeps_checks() {
    let bundle = run_scenario(&quartic()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    write_json(&bundle, &path).unwrap();
    let back = read_json(&path).unwrap();
    assert_eq!(back, bundle);
    assert_eq!(back.recompute_checks(), bundle.checks);
}

#[test]
fn csv_has_one_row_per_cell() {
    let bundle = run_scenario(&quartic()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    write_csv(&bundle, &path).unwrap();
    let mut rd = csv::Reader::from_path(&path).unwrap();
    let header: Vec<String> = rd.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, CSV_COLUMNS);
    let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), bundle.cells.len());
    for r in &rows {
        assert_eq!(&r[0], "quartic_two_cut");
        assert_eq!(r.len(), CSV_COLUMNS.len());
    }

    let roots = dir.path().join("roots.csv");
    write_roots_csv(&bundle, &roots).unwrap();
    let mut rd = csv::Reader::from_path(&roots).unwrap();
    assert_eq!(rd.headers().unwrap().len(), ROOT_COLUMNS.len());
    assert_eq!(rd.records().count(), 10 + 20);
}

#[test]
fn empty_ladder_gives_header_only_csv() {
    let mut cfg = quartic();
    cfg.n.clear();
    cfg.equilibrium_n = 10;
    let bundle = run_scenario(&cfg).unwrap();
    assert!(bundle.cells.is_empty());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    write_csv(&bundle, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert_eq!(text.trim_end(), CSV_COLUMNS.join(","));
}
