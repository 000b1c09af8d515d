use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const P: &str = "32*x1^8 + 118*x1^6*x2^2 + 40*x1^6*x3^2 + 25*x1^4*x2^4 - 43*x1^4*x2^2*x3^2 \
    - 35*x1^4*x3^4 + 3*x1^2*x2^4*x3^2 - 16*x1^2*x2^2*x3^4 + 24*x1^2*x3^6 + 16*x2^8 \
    + 44*x2^6*x3^2 + 70*x2^4*x3^4 + 60*x2^2*x3^6 + 30*x3^8";

fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_soscert"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn check_sos_verdicts_and_certificates() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    write(d, "motzkin.txt", "x1^4*x2^2 + x1^2*x2^4 - 3*x1^2*x2^2 + 1");
    write(d, "sq.txt", "x1^2 + x2^2");
    write(d, "p.txt", P);

    let o = run(&["check-sos", "motzkin.txt"], d);
    assert_eq!(code(&o), 10, "{}", stdout(&o));
    assert_eq!(code(&run(&["verify", "motzkin.txt.cert.json"], d)), 0);

    let o = run(&["check-sos", "sq.txt", "--out", "sq.cert.json", "--json", "sq.report.json"], d);
    assert_eq!(code(&o), 0);
    assert_eq!(code(&run(&["verify", "sq.cert.json"], d)), 0);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("sq.report.json")).unwrap()).unwrap();
    assert_eq!(report["verdict"], "sos");

    let o = run(&["check-sos", "p.txt"], d);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert_eq!(code(&run(&["verify", "p.txt.cert.json"], d)), 0);
}

#[test]
fn check_sos_with_multiplier() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    write(d, "mh.txt", "x1^4*x2^2 + x1^2*x2^4 - 3*x1^2*x2^2*x3^2 + x3^6");
    assert_eq!(code(&run(&["check-sos", "mh.txt"], d)), 10);
    assert_eq!(code(&run(&["check-sos", "mh.txt", "--r", "1", "--out", "mh1.json"], d)), 0);
    assert_eq!(code(&run(&["verify", "mh1.json"], d)), 0);
}

#[test]
fn input_errors_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    write(d, "bad.txt", "x1^2 +");
    assert_eq!(code(&run(&["check-sos", "bad.txt"], d)), 1);
    assert_eq!(code(&run(&["check-sos", "missing.txt"], d)), 1);
    assert_eq!(code(&run(&["no-such-command"], d)), 1);
    write(d, "junk.json", "{\"hello\": 1}");
    assert_eq!(code(&run(&["verify", "junk.json"], d)), 1);
}

#[test]
fn check_sos_convex_classes() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    write(d, "p.txt", P);
    write(d, "quartic.txt", "x1^4");
    // p(1, x2, x3) with the variable names kept.
    write(
        d,
        "pbar.txt",
        "vars: x2 x3\n32 + 118*x2^2 + 40*x3^2 + 25*x2^4 - 43*x2^2*x3^2 - 35*x3^4 + 3*x2^4*x3^2 \
         - 16*x2^2*x3^4 + 24*x3^6 + 16*x2^8 + 44*x2^6*x3^2 + 70*x2^4*x3^4 + 60*x2^2*x3^6 + 30*x3^8",
    );
    let o = run(&["check-sos-convex", "p.txt", "--out", "certs"], d);
    assert_eq!(code(&o), 10, "{}", stdout(&o));
    assert!(stdout(&o).contains("class: convex-not-sos-convex"));
    for f in ["p.txt.convexity.cert.json", "p.txt.separation.json"] {
        assert_eq!(code(&run(&["verify", &format!("certs/{f}")], d)), 0, "{f}");
    }
    assert_eq!(code(&run(&["check-sos-convex", "quartic.txt"], d)), 0);
    assert_eq!(code(&run(&["check-sos-convex", "pbar.txt"], d)), 0);
}

#[test]
fn verify_shipped_and_tampered_fixtures() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let appendix = fixtures_dir().join("appendix_certificate.json");
    let o = run(&["verify", appendix.to_str().unwrap()], d);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("result: PASS"));

    let sep = fixtures_dir().join("h11_separation.json");
    let o = run(&["verify", sep.to_str().unwrap()], d);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("-2237/250"));

    let text = fs::read_to_string(&appendix).unwrap();
    let tampered = text.replacen("\"coeff\": \"1792\"", "\"coeff\": \"1793\"", 1);
    assert_ne!(tampered, text);
    write(d, "tampered.json", &tampered);
    let o = run(&["verify", "tampered.json"], d);
    assert_eq!(code(&o), 10);
    assert!(stdout(&o).contains("coefficient of x1^8*x4^2 is 1793"), "{}", stdout(&o));
}

#[test]
fn search_bundles_and_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let o = run(&["search", "--out", "default"], d);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    for f in ["polynomial.txt", "certificate.json", "separation.json", "transcript.txt", "candidate.json"] {
        assert!(d.join("default").join(f).exists(), "{f}");
    }
    assert_eq!(code(&run(&["verify", "default/certificate.json"], d)), 0);
    assert_eq!(code(&run(&["verify", "default/separation.json"], d)), 0);
    // The written polynomial re-classifies through the ordinary command.
    assert_eq!(code(&run(&["check-sos-convex", "default/polynomial.txt"], d)), 10);

    let zeros = vec!["0.0"; 28].join(", ");
    write(d, "zero.json", &format!("{{\"dual_mu\": [{zeros}]}}"));
    assert_eq!(code(&run(&["search", "zero.json", "--out", "zero"], d)), 12);

    write(d, "psd.json", "{\"mode\": \"psd_not_sos\", \"degree\": 6}");
    let o = run(&["search", "psd.json", "--out", "psd"], d);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert_eq!(code(&run(&["verify", "psd/separation.json"], d)), 0);
    assert_eq!(code(&run(&["check-sos", "psd/polynomial.txt"], d)), 10);
    assert_eq!(code(&run(&["check-sos", "psd/polynomial.txt", "--r", "1"], d)), 0);

    write(d, "bad.json", "{\"degree\": 7}");
    assert_eq!(code(&run(&["search", "bad.json"], d)), 1);
}

#[test]
fn reproduce_transcript_and_failures() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let o = run(&["reproduce-paper"], d);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let out = stdout(&o);
    for k in 1..=11 {
        assert!(out.contains(&format!("[{k:>2}/11] PASS")), "{out}");
    }
    assert!(out.contains("11/11 checks passed"));

    let o = run(&["reproduce-paper", "--tol", "1e-12"], d);
    assert_eq!(code(&o), 0, "{}", stdout(&o));

    fs::create_dir(d.join("fx")).unwrap();
    fs::copy(fixtures_dir().join("h11_separation.json"), d.join("fx/h11_separation.json")).unwrap();
    let o = run(&["reproduce-paper", "--fixtures", "fx"], d);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("appendix_certificate.json"));
}

#[test]
fn project_and_hessian() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    write(d, "mh.txt", "x1^4*x2^2 + x1^2*x2^4 - 3*x1^2*x2^2*x3^2 + x3^6");
    let o = run(&["project", "mh.txt", "--out", "proj.txt", "--json", "proj.json"], d);
    assert_eq!(code(&o), 0);
    assert!(d.join("proj.txt").exists());
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("proj.json")).unwrap()).unwrap();
    assert!(report["distance"].as_f64().unwrap() > 0.0);
    // The rounded projection is SOS.
    assert_eq!(code(&run(&["check-sos", "proj.txt"], d)), 0);

    write(d, "q.txt", "x1^3*x2");
    let o = run(&["hessian", "q.txt"], d);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "[6*x1*x2, 3*x1^2]\n[3*x1^2, 0]\n");
}

#[test]
fn identical_inputs_identical_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    write(d, "p.txt", P);
    let a = run(&["check-sos-convex", "p.txt"], d);
    let b = run(&["check-sos-convex", "p.txt"], d);
    assert_eq!(code(&a), code(&b));
    assert_eq!(a.stdout, b.stdout);
}
