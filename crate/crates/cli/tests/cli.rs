use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rdfshard(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rdfshard"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], cwd: &Path) -> String {
    let out = rdfshard(args, cwd);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

const SMALL: &str = "k = 4\nm = 3\n[generator]\nseed = 2\nsensors = 5\nobservations_per_sensor = 15\n";

#[test]
fn staged_commands_chain() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["generate", "--sensors", "5", "--observations", "10", "--out", "data.nt"], d);
    let text = ok(&["partition", "--input", "data.nt", "--k", "4", "--out", "fragments.json"], d);
    assert!(text.contains("orphan triples"));
    ok(&["allocate", "--input", "fragments.json", "--nodes", "2", "--out", "plan.json"], d);
    let text = ok(
        &[
            "replicate",
            "--input",
            "data.nt",
            "--plan",
            "plan.json",
            "--threshold",
            "0.65",
            "--centrality-report",
            "centrality.csv",
        ],
        d,
    );
    assert!(text.contains("threshold: 0.650000"));
    let csv = fs::read_to_string(d.join("centrality.csv")).unwrap();
    assert!(csv.starts_with("predicate,distinct_subjects,edge_count,centrality\n"));
    let plan = fs::read_to_string(d.join("plan.json")).unwrap();
    assert!(plan.contains("\"replicas\""));
    let text = ok(
        &[
            "evaluate",
            "--input",
            "data.nt",
            "--plan",
            "plan.json",
            "--compare-round-robin",
            "--out",
            "inc.csv",
        ],
        d,
    );
    assert!(text.contains("answered locally"));
    assert!(text.contains("round-robin placement"));
    let inc = fs::read_to_string(d.join("inc.csv")).unwrap();
    assert_eq!(inc.lines().count(), 13);
}

#[test]
fn pipeline_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("run.toml"), SMALL).unwrap();
    ok(&["pipeline", "--config", "run.toml", "--threshold", "0.65", "--out", "out"], d);
    for name in ["triples.nt", "plan.json", "centrality.csv", "workload.json", "inc.csv", "report.json"] {
        assert!(d.join("out").join(name).is_file(), "{name} missing");
    }
    let report = fs::read_to_string(d.join("out/report.json")).unwrap();
    for key in ["\"aet\"", "\"fragment_sizes\"", "\"node_loads\"", "\"replication_level\"", "\"inc\""] {
        assert!(report.contains(key), "{key} missing from report");
    }
    // staged commands accept the pipeline's own artifacts
    ok(&["evaluate", "--input", "out/triples.nt", "--plan", "out/plan.json", "--workload", "out/workload.json"], d);
}

#[test]
fn repeated_pipeline_runs_write_identical_plans() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("run.toml"), SMALL).unwrap();
    ok(&["pipeline", "--config", "run.toml", "--out", "a"], d);
    ok(&["pipeline", "--config", "run.toml", "--out", "b"], d);
    for name in ["plan.json", "triples.nt", "centrality.csv", "workload.json", "inc.csv"] {
        let a = fs::read(d.join("a").join(name)).unwrap();
        let b = fs::read(d.join("b").join(name)).unwrap();
        assert!(a == b, "{name} differs between runs");
    }
}

#[test]
fn single_fragment_single_node_is_fully_local() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("run.toml"), SMALL).unwrap();
    ok(&["pipeline", "--config", "run.toml", "--k", "1", "--nodes", "1", "--out", "o"], d);
    let report = fs::read_to_string(d.join("o/report.json")).unwrap();
    assert!(report.contains("\"fraction_local\": 1.0"), "{report}");
}

#[test]
fn scale_with_one_scale_gives_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("run.toml"), SMALL).unwrap();
    let text = ok(&["scale", "--config", "run.toml", "--scales", "1", "--repeats", "1"], d);
    assert_eq!(text.lines().count(), 2);
    assert!(text.starts_with("scale,triples,"));
}

#[test]
fn invalid_input_exits_nonzero_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = rdfshard(&["pipeline", "--k", "0", "--out", "o"], d);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));

    let out = rdfshard(&["pipeline", "--threshold", "1.5", "--out", "o"], d);
    assert!(!out.status.success());

    let out = rdfshard(&["partition", "--input", "missing.nt", "--k", "2", "--out", "f.json"], d);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.nt"));
}

#[test]
fn csv_input_through_config() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("people.csv"),
        "id,name,city,friend\np1,Ann,Oslo,http://ex.org/p2\np2,Bob,Oslo,http://ex.org/p3\np3,Cy,Rome,http://ex.org/p1\np4,Di,Rome,http://ex.org/p1\n",
    )
    .unwrap();
    fs::write(
        d.join("run.toml"),
        r#"input = "people.csv"
k = 2
m = 2
threshold = 0.9

[csv_mapping]
subject_column = "id"
subject_prefix = "http://ex.org/"
columns = [
  { predicate = "http://ex.org/name", column = "name" },
  { predicate = "http://ex.org/city", column = "city" },
  { predicate = "http://ex.org/knows", column = "friend", resource = true },
]
"#,
    )
    .unwrap();
    ok(&["pipeline", "--config", "run.toml", "--out", "o"], d);
    let triples = fs::read_to_string(d.join("o/triples.nt")).unwrap();
    assert_eq!(triples.lines().count(), 12);
}
