use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_facetalk"))
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(name)
}

fn scratch(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("facetalk-cli-{}-{name}", std::process::id()))
}

#[test]
fn replay_prints_the_annotated_transcript_and_writes_a_log() {
    let log = scratch("golden.jsonl");
    let out = bin()
        .arg("--replay")
        .arg(data("golden_dialogue.txt"))
        .arg("--log")
        .arg(&log)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("U1: Hello.\nS1: [Attend and BOSStory] Hi."));
    assert!(text.contains("S13: [SpeakerNo and Emphasizer] No, it isn't."));
    assert!(text.trim_end().ends_with("Smooth"));

    let scored = bin().arg("score").arg(&log).output().unwrap();
    assert!(String::from_utf8(scored.stdout).unwrap().contains("topics 7"));
    std::fs::remove_file(log).ok();
}

#[test]
fn shipped_logs_score_as_expected() {
    for (file, class) in [("logs/smooth.jsonl", "Smooth"), ("logs/dull.jsonl", "Dull")] {
        let out = bin().arg("score").arg(data(file)).output().unwrap();
        assert!(String::from_utf8(out.stdout).unwrap().trim_end().ends_with(class), "{file}");
    }
}

#[test]
fn render_writes_a_full_vertex_frame() {
    let out_file = scratch("smile.json");
    let out = bin().args(["render", "smile", "--at-ms", "2000", "--out"]).arg(&out_file).output().unwrap();
    assert!(out.status.success());
    let frame: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out_file).unwrap()).unwrap();
    assert_eq!(frame["tMs"], 2000);
    assert_eq!(frame["params"].as_array().unwrap().len(), 26);
    let mesh: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(data("face_mesh.json")).unwrap()).unwrap();
    assert_eq!(frame["vertices"].as_array().unwrap().len(), mesh["vertices"].as_array().unwrap().len());
    std::fs::remove_file(out_file).ok();
}

#[test]
fn bad_input_is_reported_not_panicked() {
    let out = bin().args(["render", "grin", "--out", "/dev/null"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("unknown display `grin`"));

    let out = bin().args(["--replay", "/nonexistent/script.txt"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    let out = bin().args(["--epsilon=-1", "score"]).arg(data("logs/dull.jsonl")).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn export_mesh_matches_the_shipped_file() {
    let out_file = scratch("mesh.json");
    assert!(bin().arg("export-mesh").arg("--out").arg(&out_file).status().unwrap().success());
    assert_eq!(
        std::fs::read_to_string(&out_file).unwrap(),
        std::fs::read_to_string(data("face_mesh.json")).unwrap()
    );
    std::fs::remove_file(out_file).ok();
}
