use std::process::Command as Process;

use choquard_core::cli::{deterministic_part, parse_config, run, write_outputs, Command, Status, SCHEMA_VERSION};
use choquard_core::radial::Mapping;
use choquard_core::system::Normalization;

fn bin() -> Process {
    Process::new(env!("CARGO_BIN_EXE_choquard"))
}

#[test]
fn documented_invocations_parse() {
    let cfg = parse_config(["choquard", "constants", "--N", "3", "--mu", "2"]).unwrap();
    assert_eq!(cfg.command, Command::Constants);
    assert_eq!(cfg.grid.size, 1024);
    assert_eq!(cfg.grid.mapping, Mapping::Log);

    let cfg = parse_config([
        "choquard", "moving-plane", "--N", "3", "--mu", "2", "--lambdas", "0.1,0.5,1,2,5", "--mapping", "algebraic",
    ])
    .unwrap();
    assert_eq!(cfg.lambdas, vec![0.1, 0.5, 1.0, 2.0, 5.0]);
    assert_eq!(cfg.grid.mapping, Mapping::Algebraic);

    let cfg = parse_config(["choquard", "sweep", "--task", "spectrum", "--mu-values", "2.9,2.99", "--workers", "2"]).unwrap();
    assert_eq!(cfg.task, Command::Spectrum);
    assert_eq!(cfg.mu_values, vec![2.9, 2.99]);
    assert_eq!(cfg.workers, Some(2));

    let cfg = parse_config(["choquard", "solve", "--normalization", "green"]).unwrap();
    assert_eq!(cfg.normalization, Normalization::Green);
}

#[test]
fn invalid_invocations_are_rejected() {
    for args in [
        vec!["choquard", "constants", "--mu", "0"],
        vec!["choquard", "constants", "--N", "2"],
        vec!["choquard", "constants", "--grid-size", "4"],
        vec!["choquard", "sweep", "--task", "sweep"],
        vec!["choquard", "spectrum", "--workers", "0"],
        vec!["choquard", "teleport"],
    ] {
        assert!(parse_config(args.clone()).is_err(), "{args:?} accepted");
    }
}

#[test]
fn flags_override_configuration_files() {
    let dir = tempfile::tempdir().unwrap();
    let toml_path = dir.path().join("run.toml");
    std::fs::write(&toml_path, "N = 3\nmu = 2.5\ngrid_size = 512\nell_max = 4\nmapping = \"algebraic\"\n").unwrap();
    let toml = toml_path.to_str().unwrap();
    let cfg = parse_config(["choquard", "spectrum", "--config", toml]).unwrap();
    assert_eq!(cfg.params.mu(), 2.5);
    assert_eq!(cfg.grid.size, 512);
    assert_eq!(cfg.grid.mapping, Mapping::Algebraic);
    let cfg = parse_config(["choquard", "spectrum", "--config", toml, "--mu", "2.99"]).unwrap();
    assert_eq!(cfg.params.mu(), 2.99);
    assert_eq!(cfg.ell_max, 4);

    let json_path = dir.path().join("run.json");
    std::fs::write(&json_path, r#"{"N": 4, "mu": 3.0, "seed": 17}"#).unwrap();
    let cfg = parse_config(["choquard", "constants", "--config", json_path.to_str().unwrap()]).unwrap();
    assert_eq!((cfg.params.dim(), cfg.params.mu(), cfg.seed), (4, 3.0, 17));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "mu = 2.0\ngird_size = 64\n").unwrap();
    assert!(parse_config(["choquard", "constants", "--config", bad.to_str().unwrap()]).is_err());
}

#[test]
fn records_are_reproducible_and_self_describing() {
    let cfg = parse_config(["choquard", "hls-check", "--grid-size", "256", "--samples", "5", "--seed", "3"]).unwrap();
    let a = run(&cfg).unwrap();
    let b = run(&cfg).unwrap();
    assert_eq!(deterministic_part(&a.record), deterministic_part(&b.record));
    assert_eq!(a.record["schema"], SCHEMA_VERSION);
    assert_eq!(a.record["library_version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(a.record["command"], "hls-check");
    assert_eq!(a.record["config"]["seed"], 3);
    assert!(a.record["timing"]["elapsed_seconds"].is_number());

    let other = parse_config(["choquard", "hls-check", "--grid-size", "256", "--samples", "5", "--seed", "4"]).unwrap();
    assert_ne!(deterministic_part(&run(&other).unwrap().record)["result"], deterministic_part(&a.record)["result"]);
}

#[test]
fn outputs_include_a_csv_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("hls.json");
    let cfg = parse_config([
        "choquard", "hls-check", "--grid-size", "256", "--samples", "4", "--output", out.to_str().unwrap(),
    ])
    .unwrap();
    let outcome = run(&cfg).unwrap();
    assert_eq!(outcome.status, Status::Ok);
    let written = write_outputs(&cfg, &outcome).unwrap();
    assert_eq!(written.len(), 2);
    let record: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(record["status"], "ok");
    let table = std::fs::read_to_string(dir.path().join("hls.csv")).unwrap();
    assert!(table.lines().next().unwrap().starts_with("index"));
    assert_eq!(table.lines().count(), 6);
    assert!(table.lines().last().unwrap().starts_with("extremal"));
}

#[test]
fn binary_exit_codes() {
    let ok = bin().args(["constants", "--N", "3", "--mu", "2"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("0.370"));

    let ok = bin().args(["bubble-check", "--grid-size", "512"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));

    let bad = bin().args(["constants", "--N", "3", "--mu", "3.5"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("mu"));
}
