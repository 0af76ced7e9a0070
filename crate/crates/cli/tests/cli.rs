use std::path::Path;
use std::process::{Command, Output};

fn cogjam(args: &[&str], config: Option<&Path>, out: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cogjam"));
    cmd.args(args).arg("--out").arg(out).arg("--no-plots");
    if let Some(c) = config {
        cmd.arg("--config").arg(c);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("c.toml");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn unknown_key_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "[sim]\nhorizn = 10\n");
    let out = cogjam(&["figure9"], Some(&config), &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("config error"));
}

#[test]
fn invalid_channel_row_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "[channels]\nset = \"explicit\"\nrows = [{ p11 = 0.9, p10 = 0.3, p01 = 0.2, p00 = 0.8 }]\n",
    );
    let out = cogjam(&["figure7"], Some(&config), &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_config_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = cogjam(&["figure3"], Some(&dir.path().join("absent.toml")), &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zero_replications_override_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = cogjam(&["figure56", "--replications", "0"], None, &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn runtime_error_exits_with_one() {
    // The validation closed forms need p11 > p01; a negatively correlated channel is rejected at run time.
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "[channels]\nset = \"explicit\"\nrows = [{ p11 = 0.3, p10 = 0.7, p01 = 0.6, p00 = 0.4 }]\n",
    );
    let out = cogjam(&["validate"], Some(&config), &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("positively correlated"));
}

#[test]
fn validate_passes_with_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = cogjam(&["validate"], None, &dir.path().join("o"));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.lines().any(|l| l.starts_with("PASS")));
    assert!(!stdout.lines().any(|l| l.starts_with("FAIL")));
    assert!(dir.path().join("o").join("validate.csv").exists());
}

#[test]
fn csv_carries_metadata_and_header() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("o");
    let out = cogjam(&["figure9", "--seed", "42"], None, &out_dir);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(out_dir.join("figure9.csv")).unwrap();
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    let meta: Vec<&str> = lines.iter().copied().take_while(|l| l.starts_with('#')).collect();
    assert!(meta.iter().any(|l| l.starts_with("# tool: cogjam ")));
    assert!(meta.contains(&"# seed: 42"));
    let sha = meta.iter().find_map(|l| l.strip_prefix("# config_sha256: ")).unwrap();
    assert_eq!(sha.len(), 64);
    assert_eq!(lines[meta.len()], "alpha,theta0,theta1,asn,cost");
    let first_row: Vec<&str> = lines[meta.len() + 1].split(',').collect();
    assert_eq!(first_row.len(), 5);
}

#[test]
fn same_seed_gives_identical_files_and_other_seed_differs() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "[sim]\nhorizon = 3000\nwarmup = 300\nreplications = 3\n\n[sweep]\nalpha = [0.2, 0.6]\n");
    let run = |name: &str, seed: &str| {
        let out_dir = dir.path().join(name);
        let out = cogjam(&["figure7", "--seed", seed], Some(&config), &out_dir);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read_to_string(out_dir.join("figure7.csv")).unwrap()
    };
    let a = run("a", "9");
    assert_eq!(a, run("b", "9"));
    assert_ne!(a, run("c", "10"));
}

#[test]
fn plots_are_written_unless_disabled() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("o");
    let status = Command::new(env!("CARGO_BIN_EXE_cogjam")).args(["figure9", "--out"]).arg(&out_dir).output().unwrap().status;
    assert!(status.success());
    let svgs = std::fs::read_dir(&out_dir).unwrap().filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "svg")).count();
    assert!(svgs >= 1);
}
