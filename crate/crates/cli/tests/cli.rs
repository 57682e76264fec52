use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use catalyst_core::regprog::{program_to_text, threshold_program};
use serde_json::Value;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_catalyst-qlab");

fn qlab(args: &[&str]) -> Output {
    qlab_env(args, &[])
}

fn qlab_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn report(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stderr(o)))
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Majority of three, counted directly.
fn majority(bits: &str) -> bool {
    bits.chars().filter(|&c| c == '1').count() >= 2
}

fn assert_schema_valid(v: &Value) {
    let schema: Value = serde_json::from_str(include_str!("../schema/report.schema.json")).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");
}

#[test]
fn identity_circuit_passes_every_set() {
    let dir = TempDir::new().unwrap();
    let c = write(dir.path(), "id.txt", "WORK 1\nCAT 2\nOUTPUT 0\n");
    for set in ["pauliprod", "epr", "random", "pure"] {
        let o = qlab(&["verify-catalytic", s(&c), "--set", set, "--trials", "10"]);
        assert_eq!(code(&o), 0, "{set}: {}", stderr(&o));
        let r = report(&o);
        assert_schema_valid(&r);
        assert_eq!(r["schema"], "catalyst-qlab/1");
        assert_eq!(r["results"][0]["passed"], true);
        assert_eq!(r["aggregate"]["passed"], true);
    }
}

#[test]
fn swap_fails_verification() {
    let dir = TempDir::new().unwrap();
    let c = write(dir.path(), "swap.txt", "WORK 1\nCAT 1\nOUTPUT 0\nGATE SWAP 0 1\n");
    let o = qlab(&["verify-catalytic", s(&c)]);
    assert_eq!(code(&o), 1);
    let r = report(&o);
    assert_schema_valid(&r);
    assert_eq!(r["aggregate"]["passed"], false);
    assert!(r["results"][0]["max_reset_deviation"].as_f64().unwrap() > 0.1);
}

#[test]
fn malformed_file_reports_the_line() {
    let dir = TempDir::new().unwrap();
    let c = write(dir.path(), "bad.txt", "WORK 1\nCAT 1\n# fine so far\nGATE FROB 0\n");
    let o = qlab(&["verify-catalytic", s(&c)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());

    let p = write(dir.path(), "bad.prog", "MODULUS 4\nREGISTERS 1\nINPUTS 1\n");
    let o = qlab(&["compile", s(&p), "--input", "1"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("bad.prog"), "{}", stderr(&o));

    assert_eq!(code(&qlab(&["verify-catalytic", "/nonexistent/circuit.txt"])), 2);
    assert_eq!(code(&qlab(&["no-such-command"])), 2);
}

#[test]
fn budget_overflow_exits_with_three() {
    let dir = TempDir::new().unwrap();
    let wide = write(dir.path(), "wide.txt", "WORK 1\nCAT 6\nOUTPUT 0\n");
    let o = qlab(&["verify-catalytic", s(&wide)]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("verify_epr"));

    // The default caps come from the environment.
    let narrow = write(dir.path(), "narrow.txt", "WORK 1\nCAT 2\nOUTPUT 0\n");
    assert_eq!(code(&qlab(&["verify-catalytic", s(&narrow)])), 0);
    let o = qlab_env(&["verify-catalytic", s(&narrow)], &[("QLAB_MAX_PAULIPROD_CAT", "1")]);
    assert_eq!(code(&o), 3);

    let o = qlab_env(&["census", "bit-scan-walker", "--tape", "10"], &[("QLAB_MAX_CENSUS_CAT", "8")]);
    assert_eq!(code(&o), 3);
}

#[test]
fn maj3_pipeline_end_to_end() {
    for row in 0..8 {
        let bits = format!("{row:03b}");
        let o = qlab(&["run-dqc1", &format!("pipeline:maj3:{bits}:1"), "--q-bound", "4"]);
        assert_eq!(code(&o), 0, "{bits}: {}", stderr(&o));
        let r = report(&o);
        assert_schema_valid(&r);
        let item = &r["results"][0];
        let want = majority(&bits);
        assert_eq!(item["pipeline"]["expected"], want);
        assert_eq!(item["p1"].as_f64().unwrap(), if want { 1.0 } else { 0.0 }, "{bits}");
        assert_eq!(item["verdict"], if want { "yes" } else { "no" });
        assert_eq!(item["pipeline"]["census"]["wrong"], 0);
    }
}

#[test]
fn truncated_pipeline_keeps_the_census_bound() {
    // l = 4 cycles of 38 steps; stop one step into the second cycle.
    let o = qlab(&["run-dqc1", "pipeline:maj3:011:4:39", "--q-bound", "10"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let p = report(&o)["results"][0]["pipeline"].clone();
    assert_eq!(p["cycle_length"], 38);
    let success = p["census"]["success"].as_f64().unwrap();
    assert!(success >= 0.6, "{success}");
    assert_eq!(p["census_verdict"], "yes");
}

#[test]
fn pipeline_target_errors() {
    for bad in ["pipeline:maj3:11:1", "pipeline:maj3:110", "pipeline:nope:1:1", "pipeline:maj3:110:x", "pipeline:maj3:110:1:100000"] {
        let o = qlab(&["run-dqc1", bad]);
        assert_eq!(code(&o), 2, "{bad}: {}", stderr(&o));
    }
    let o = qlab(&["run-dqc1", "pipeline:and2:11:1", "--q-bound", "-1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn compile_writes_a_circuit_that_round_trips() {
    let dir = TempDir::new().unwrap();
    let prog = write(dir.path(), "maj3.prog", &program_to_text(&threshold_program(3, 2, 5).unwrap()));
    for bits in ["011", "100"] {
        let out = dir.path().join(format!("maj3_{bits}.circ"));
        let o = qlab(&["compile", s(&prog), "--input", bits, "--out", s(&out), "--check"]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let r = report(&o);
        assert_schema_valid(&r);
        let item = &r["results"][0];
        assert_eq!((item["work_qubits"].as_u64(), item["catalytic_qubits"].as_u64()), (Some(6), Some(9)));
        assert_eq!(item["check"]["passed"], true);
        assert!(out.is_file());
        for side in item["side_files"].as_array().unwrap() {
            assert!(Path::new(side.as_str().unwrap()).is_file());
        }

        let o = qlab(&["verify-catalytic", s(&out), "--set", "epr"]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let o = qlab(&["run-dqc1", s(&out)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let p1 = report(&o)["results"][0]["p1"].as_f64().unwrap();
        assert_eq!(p1, if majority(bits) { 1.0 } else { 0.0 });
    }
    let o = qlab(&["compile", s(&prog), "--input", "01"]);
    assert_eq!(code(&o), 2);
    let o = qlab(&["compile", s(&prog), "--input", "011", "--backend", "toffoli", "--cycles", "2", "--truncate", "5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(report(&o)["results"][0]["stream_length"], 5);
}

#[test]
fn reports_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let c = write(dir.path(), "h.txt", "WORK 1\nCAT 2\nOUTPUT 0\nGATE CNOT 1 2\nGATE H 0\nGATE CNOT 1 2\n");
    let runs: Vec<Vec<&str>> = vec![
        vec!["verify-catalytic", s(&c), "--set", "random", "--seed", "9", "--trials", "20"],
        vec!["run-dqc1", s(&c), "--shots", "5000", "--seed", "3"],
        vec!["census", "--tape", "6"],
    ];
    for args in runs {
        let a = qlab(&args);
        let b = qlab(&args);
        assert_eq!(code(&a), 0, "{args:?}: {}", stderr(&a));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        let r = report(&a);
        assert_schema_valid(&r);
        assert_eq!(r["elapsed_ms"], 0);
    }
}

#[test]
fn sampled_run_reports_shots_and_error() {
    let dir = TempDir::new().unwrap();
    let c = write(dir.path(), "h.txt", "WORK 1\nCAT 1\nOUTPUT 0\nGATE H 0\n");
    let o = qlab(&["run-dqc1", s(&c), "--shots", "100000", "--seed", "5"]);
    let item = report(&o)["results"][0].clone();
    assert_eq!(item["method"], "sampled");
    assert_eq!(item["shots"], 100_000);
    let p1 = item["p1"].as_f64().unwrap();
    let se = item["standard_error"].as_f64().unwrap();
    assert!((p1 - 0.5).abs() <= 5.0 * se, "{p1} {se}");
    let seeded = report(&qlab(&["run-dqc1", s(&c), "--shots", "1000", "--seed", "6"]));
    assert_eq!(seeded["seed"], 6);
    assert_eq!(code(&qlab(&["run-dqc1", s(&c), "--shots", "0"])), 2);
    assert_eq!(code(&qlab(&["run-dqc1", s(&c), "--shots", "10", "--exact"])), 2);
}

#[test]
fn measurement_is_rejected_by_run_dqc1() {
    let dir = TempDir::new().unwrap();
    let c = write(dir.path(), "m.txt", "WORK 1\nCAT 1\nOUTPUT 0\nGATE H 0\nMEASURE 0\n");
    let o = qlab(&["run-dqc1", s(&c)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("step 1"), "{}", stderr(&o));
}

#[test]
fn census_runs_the_builtins() {
    let o = qlab(&["census", "--clean", "4", "--tape", "10"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = report(&o);
    assert_schema_valid(&r);
    let results = r["results"].as_array().unwrap();
    assert_eq!(results.len(), 3);
    for item in results {
        assert!(item["sum"].as_u64().unwrap() <= item["configurations"].as_u64().unwrap());
        assert_eq!(item["disjoint"], true);
        let total: u64 = item["time_histogram"].as_array().unwrap().iter().map(|p| p[1].as_u64().unwrap()).sum();
        assert_eq!(total, 1 << 10);
    }
    assert_eq!(results[0]["sum"], 0);
    assert_eq!(code(&qlab(&["census", "turing-machine"])), 2);
}

#[test]
fn csv_columns_follow_the_documented_order() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("census.csv");
    let o = qlab(&["census", "modular-counter", "--clean", "2", "--tape", "4", "--csv", s(&out)]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "automaton,clean_bits,catalytic_bits,configurations,sum,mean,max,mean_bound,distinct_configurations,disjoint,restored,passed"
    );
    // Every run takes 2^(s+1) = 8 steps.
    assert_eq!(lines.next().unwrap(), "modular-counter,2,4,192,128,8,8,12,144,true,true,true");

    let c = write(dir.path(), "id.txt", "WORK 1\nCAT 1\nOUTPUT 0\n");
    let csv = dir.path().join("v.csv");
    qlab(&["verify-catalytic", s(&c), "--csv", s(&csv)]);
    let header = fs::read_to_string(&csv).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, "circuit,set,passed,max_reset_deviation,max_output_deviation,states_tested,tolerance");
}

#[test]
fn config_file_supplies_flags() {
    let dir = TempDir::new().unwrap();
    let c = write(dir.path(), "id.txt", "WORK 1\nCAT 1\nOUTPUT 0\n");
    let cfg = write(dir.path(), "lab.conf", "# shared\ntrials = 7\nshots = 50\n\n[verify-catalytic]\nset = random\nseed = 4\n");
    let r = report(&qlab(&["verify-catalytic", s(&c), "--config", s(&cfg)]));
    assert_eq!(r["config"]["set"], "density");
    assert_eq!(r["config"]["trials"], 7);
    assert_eq!(r["seed"], 4);
    assert_eq!(r["results"][0]["states_tested"], 7);

    // Command-line flags win.
    let r = report(&qlab(&["verify-catalytic", s(&c), "--config", s(&cfg), "--set", "epr", "--seed=8"]));
    assert_eq!((r["config"]["set"].as_str(), r["seed"].as_u64()), (Some("epr"), Some(8)));

    // Shared keys reach other subcommands.
    let r = report(&qlab(&["run-dqc1", s(&c), "--config", s(&cfg)]));
    assert_eq!(r["results"][0]["shots"], 50);

    let typo = write(dir.path(), "typo.conf", "trails = 7\n");
    let o = qlab(&["verify-catalytic", s(&c), "--config", s(&typo)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 1"), "{}", stderr(&o));
    let section = write(dir.path(), "sec.conf", "[verify]\nset = epr\n");
    assert_eq!(code(&qlab(&["verify-catalytic", s(&c), "--config", s(&section)])), 2);
    let flag = write(dir.path(), "flag.conf", "timing = true\n");
    let r = report(&qlab(&["census", "immediate-halt", "--tape", "3", "--config", s(&flag)]));
    assert!(r["elapsed_ms"].is_u64());
}

#[test]
fn schema_subcommand_prints_the_published_schema() {
    let o = qlab(&["schema"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), include_str!("../schema/report.schema.json"));
}

#[test]
fn report_flag_writes_a_file() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("r.json");
    let o = qlab(&["census", "immediate-halt", "--tape", "2", "--report", s(&out)]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let r: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_schema_valid(&r);
}
