use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn nibe(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nibe"))
        .current_dir(dir)
        .env_remove("NIBE_BACKEND")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = nibe(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

struct World {
    dir: TempDir,
}

impl World {
    fn curve(n: &str, ell: &str) -> Self {
        let dir = TempDir::new().unwrap();
        ok(
            dir.path(),
            &["setup", "--n", n, "--ell", ell, "--params-out", "p.bin", "--master-out", "m.bin"],
        );
        World { dir }
    }

    fn path(&self) -> &Path {
        self.dir.path()
    }

    fn file(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn keygen(&self, id: &str, out: &str) {
        ok(
            self.path(),
            &["keygen", "--params", "p.bin", "--master", "m.bin", "--identity", id, "--key-out", out],
        );
    }
}

#[test]
fn round_trip_is_byte_exact() {
    let w = World::curve("4", "32");
    w.keygen("alice", "alice.key");
    let payload: Vec<u8> = (0..5000u32).map(|i| (i * 31 % 251) as u8).collect();
    fs::write(w.file("in.bin"), &payload).unwrap();
    ok(w.path(), &["encrypt", "--params", "p.bin", "--to", "alice", "--in", "in.bin", "--out", "c.bin"]);
    ok(w.path(), &["decrypt", "--params", "p.bin", "--key", "alice.key", "--in", "c.bin", "--out", "out.bin"]);
    assert_eq!(fs::read(w.file("out.bin")).unwrap(), payload);
}

#[test]
fn empty_payload_round_trips() {
    let w = World::curve("2", "32");
    w.keygen("alice", "alice.key");
    fs::write(w.file("empty"), b"").unwrap();
    ok(w.path(), &["encrypt", "--params", "p.bin", "--to", "alice", "--in", "empty", "--out", "c.bin"]);
    ok(w.path(), &["decrypt", "--params", "p.bin", "--key", "alice.key", "--in", "c.bin", "--out", "out"]);
    assert_eq!(fs::read(w.file("out")).unwrap(), b"");
}

#[test]
fn wrong_identity_is_a_tag_mismatch() {
    let w = World::curve("2", "32");
    w.keygen("alice", "alice.key");
    w.keygen("mallory", "mallory.key");
    fs::write(w.file("in"), b"for alice only").unwrap();
    ok(w.path(), &["encrypt", "--params", "p.bin", "--to", "alice", "--in", "in", "--out", "c.bin"]);
    let out = nibe(w.path(), &["decrypt", "--params", "p.bin", "--key", "mallory.key", "--in", "c.bin", "--out", "leak"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("tag-mismatch"));
    assert!(!w.file("leak").exists());
}

#[test]
fn keys_are_randomized() {
    let w = World::curve("2", "32");
    w.keygen("alice", "k1");
    w.keygen("alice", "k2");
    assert_ne!(fs::read(w.file("k1")).unwrap(), fs::read(w.file("k2")).unwrap());
    fs::write(w.file("in"), b"x").unwrap();
    ok(w.path(), &["encrypt", "--params", "p.bin", "--to", "alice", "--in", "in", "--out", "c.bin"]);
    for k in ["k1", "k2"] {
        ok(w.path(), &["decrypt", "--params", "p.bin", "--key", k, "--in", "c.bin", "--out", "o"]);
        assert_eq!(fs::read(w.file("o")).unwrap(), b"x");
    }
}

#[test]
fn corrupted_master_writes_no_key() {
    let w = World::curve("2", "32");
    let mut m = fs::read(w.file("m.bin")).unwrap();
    let mid = m.len() / 2;
    m[mid] ^= 0x10;
    fs::write(w.file("bad.bin"), &m).unwrap();
    let out = nibe(
        w.path(),
        &["keygen", "--params", "p.bin", "--master", "bad.bin", "--identity", "a", "--key-out", "k"],
    );
    assert_eq!(code(&out), 2);
    assert!(!w.file("k").exists());

    // A valid master from different parameters is caught by the pairing check.
    ok(w.path(), &["setup", "--n", "2", "--ell", "32", "--params-out", "p2", "--master-out", "m2"]);
    let out = nibe(w.path(), &["keygen", "--params", "p.bin", "--master", "m2", "--identity", "a", "--key-out", "k"]);
    assert_eq!(code(&out), 2);
    assert!(!w.file("k").exists());
}

#[test]
fn setup_shapes_and_validation() {
    let w = World::curve("5", "32");
    assert_eq!(fs::read(w.file("p.bin")).unwrap().len(), 11 + 9 * 144 + 576);
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        let mode = fs::metadata(w.file("m.bin")).unwrap().permissions().mode();
        assert_eq!(mode & 0o777, 0o600);
    }

    let out = nibe(w.path(), &["setup", "--n", "0", "--params-out", "x", "--master-out", "y"]);
    assert_eq!(code(&out), 2);
    assert!(!w.file("x").exists() && !w.file("y").exists());

    // 9 blocks of 32 bits need 288 digest bits.
    let out = nibe(w.path(), &["setup", "--n", "9", "--ell", "32", "--params-out", "x", "--master-out", "y"]);
    assert_eq!(code(&out), 2);

    let out = nibe(w.path(), &["setup", "--oracle", "--params-out", "x", "--master-out", "y"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn toy_backend_needs_the_flag_everywhere() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let setup = ["setup", "--backend", "toy", "--n", "4", "--ell", "4", "--params-out", "p", "--master-out", "m"];
    assert_eq!(code(&nibe(d, &setup)), 2);
    let mut flagged = setup.to_vec();
    flagged.extend(["--insecure-toy", "--oracle"]);
    ok(d, &flagged);
    assert_eq!(fs::read(d.join("p")).unwrap()[5], 0x01);

    let keygen = ["keygen", "--params", "p", "--master", "m", "--identity", "a", "--key-out", "k"];
    assert_eq!(code(&nibe(d, &keygen)), 2);
    ok(d, &[&keygen[..], &["--insecure-toy"]].concat());

    fs::write(d.join("in"), b"toy payload").unwrap();
    let enc = ["encrypt", "--params", "p", "--to", "a", "--in", "in", "--out", "c"];
    assert_eq!(code(&nibe(d, &enc)), 2);
    ok(d, &[&enc[..], &["--insecure-toy"]].concat());
    let dec = ["decrypt", "--params", "p", "--key", "k", "--in", "c", "--out", "o"];
    assert_eq!(code(&nibe(d, &dec)), 2);
    ok(d, &[&dec[..], &["--insecure-toy"]].concat());
    assert_eq!(fs::read(d.join("o")).unwrap(), b"toy payload");
}

#[test]
fn backend_from_environment() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_nibe"))
        .current_dir(dir.path())
        .env("NIBE_BACKEND", "toy")
        .args(["setup", "--n", "2", "--ell", "4", "--params-out", "p", "--master-out", "m", "--insecure-toy"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(fs::read(dir.path().join("p")).unwrap()[5], 0x01);

    // The flag overrides the environment.
    let out = Command::new(env!("CARGO_BIN_EXE_nibe"))
        .current_dir(dir.path())
        .env("NIBE_BACKEND", "toy")
        .args(["setup", "--backend", "curve", "--n", "2", "--ell", "4", "--params-out", "p", "--master-out", "m"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(fs::read(dir.path().join("p")).unwrap()[5], 0x02);
}

#[test]
fn mismatched_files_are_format_errors() {
    let a = World::curve("2", "32");
    ok(a.path(), &["setup", "--n", "3", "--ell", "32", "--params-out", "p3", "--master-out", "m3"]);
    a.keygen("alice", "k");
    fs::write(a.file("in"), b"x").unwrap();
    ok(a.path(), &["encrypt", "--params", "p.bin", "--to", "alice", "--in", "in", "--out", "c"]);
    let out = nibe(a.path(), &["decrypt", "--params", "p3", "--key", "k", "--in", "c", "--out", "o"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("header-mismatch"));

    // Params passed where an envelope is expected.
    let out = nibe(a.path(), &["decrypt", "--params", "p.bin", "--key", "k", "--in", "p.bin", "--out", "o"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad-magic"));
    assert!(!a.file("o").exists());
}

#[test]
fn analyze_is_deterministic_under_seed() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    for (mode, extra) in [
        ("abort-bound", vec!["--q", "2", "--ell", "2", "--n", "2"]),
        ("reduction", vec!["--q", "1", "--ell", "1", "--n", "1", "--trials", "2000"]),
        ("lemma1", vec!["--q", "2", "--ell", "2", "--n", "1"]),
        ("sizes", vec!["--n", "5", "--ell", "32"]),
    ] {
        let mut args = vec!["analyze", "--mode", mode, "--seed", "11", "--report-out", "r1"];
        args.extend(&extra);
        ok(d, &args);
        args[6] = "r2";
        ok(d, &args);
        let r1 = fs::read(d.join("r1")).unwrap();
        assert_eq!(r1, fs::read(d.join("r2")).unwrap(), "{mode}");
        let text = String::from_utf8(r1).unwrap();
        assert!(text.lines().all(|l| l.contains('=')), "{mode}: {text}");
    }

    let out = ok(d, &["analyze", "--mode", "abort-bound", "--q", "2", "--ell", "2", "--n", "2"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("lambda=1/64\n"));

    let out = nibe(d, &["analyze", "--mode", "abort-bound", "--q", "4", "--ell", "8", "--n", "4", "--exact"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("10000000"));
}

#[test]
fn transcripts_parse_back() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(
        d,
        &["analyze", "--mode", "reduction", "--trials", "500", "--seed", "3", "--transcript-out", "t.txt", "--report-out", "r"],
    );
    let text = fs::read_to_string(d.join("t.txt")).unwrap();
    let records: Vec<_> = text
        .lines()
        .map(|l| nibe_core::reduction::GameRecord::parse_line(l).unwrap())
        .collect();
    assert_eq!(records.len(), 500);
}
