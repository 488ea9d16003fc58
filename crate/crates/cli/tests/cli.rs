use std::path::PathBuf;
use std::process::{Command, Output};

use sca_core::rational::{format_rational, parse_rational};
use sca_core::symbolic::{is_injective, is_noisy, is_preinjective, is_surjective};
use sca_core::{corpus, cylinder_prob, pushforward_distribution, Budget, Word};
use serde_json::Value;

fn corpus_file(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(format!("{name}.json"))
        .display()
        .to_string()
}

fn sca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sca")).args(args).env_remove("SCA_SEED").output().unwrap()
}

/// Runs and returns (exit code, parsed result document).
fn run(args: &[&str]) -> (i32, Value) {
    let out = sca(args);
    let doc: Value = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{args:?}: {e}: {}", String::from_utf8_lossy(&out.stdout)));
    (out.status.code().unwrap(), doc)
}

fn check_schema(doc: &Value) {
    let obj = doc.as_object().unwrap();
    let mut keys: Vec<&str> = obj.keys().map(String::as_str).collect();
    keys.sort();
    assert_eq!(keys, ["command", "payload", "status", "timing_ms"]);
    assert!(["true", "false", "error", "resource-exhausted"].contains(&doc["status"].as_str().unwrap()));
    assert!(doc["timing_ms"].as_f64().unwrap() >= 0.0);
}

#[test]
fn prob_of_parity() {
    let f = corpus_file("parity");
    let (code, doc) = run(&["prob", "--sca", &f, "--window", "#00#", "--target", "00", "--t", "1"]);
    check_schema(&doc);
    assert_eq!(code, 0);
    assert_eq!(doc["status"], "true");
    assert_eq!(doc["payload"]["value"], "1/2");
}

#[test]
fn equal_on_blank_noise_pair() {
    let (a, b) = (corpus_file("blank_noise"), corpus_file("xor_noise"));
    for t in ["1", "2", "3"] {
        let (code, doc) = run(&["equal", "--a", &a, "--b", &b, "--t", t]);
        check_schema(&doc);
        assert_eq!((code, doc["status"].as_str().unwrap()), (0, "true"), "t = {t}");
    }
    let (code, doc) = run(&["equal", "--a", &a, "--b", &corpus_file("biased_noise")]);
    assert_eq!((code, doc["status"].as_str().unwrap()), (1, "false"));
    assert_eq!(doc["payload"]["precheck"], "Incompatible");
    let (code, doc) = run(&["equal", "--a", &corpus_file("identity"), "--b", &corpus_file("xor_ca")]);
    assert_eq!(code, 1);
    assert!(doc["payload"]["witness"].is_string());
}

#[test]
fn noisy_identity_has_witness() {
    let (code, doc) = run(&["noisy", "--sca", &corpus_file("identity")]);
    assert_eq!(code, 1);
    assert_eq!(doc["status"], "false");
    let w = &doc["payload"]["witness"];
    assert_eq!(w["kind"], "pair_word");
    assert_eq!((w["input"].as_str(), w["output"].as_str()), (Some("0"), Some("1")));
}

#[test]
fn exit_codes() {
    let out = sca(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    let (code, doc) = run(&["prob", "--sca", "/nonexistent.json", "--window", "0", "--target", "0"]);
    assert_eq!((code, doc["status"].as_str().unwrap()), (2, "error"));
    check_schema(&doc);
    let (code, doc) = run(&["prob", "--sca", &corpus_file("identity"), "--window", "0x", "--target", "0"]);
    assert_eq!((code, doc["status"].as_str().unwrap()), (2, "error"));
    let (code, doc) = run(&["surjective", "--sca", &corpus_file("parity"), "--max-states", "3"]);
    assert_eq!((code, doc["status"].as_str().unwrap()), (3, "resource-exhausted"));
    check_schema(&doc);
}

#[test]
fn verdicts_match_library() {
    let b = Budget::default();
    for (name, a) in corpus::named() {
        if a.ell() > 5 {
            continue;
        }
        let f = corpus_file(name);
        let expected = [
            ("noisy", is_noisy(&a, &b).unwrap().answer),
            ("surjective", is_surjective(&a, &b).unwrap().answer),
            ("injective", is_injective(&a, &b).unwrap().answer),
            ("preinjective", is_preinjective(&a, &b).unwrap().answer),
        ];
        for (cmd, answer) in expected {
            let (code, doc) = run(&[cmd, "--sca", &f]);
            assert_eq!(doc["payload"]["answer"].as_bool(), Some(answer), "{cmd} {name}");
            assert_eq!(code, if answer { 0 } else { 1 }, "{cmd} {name}");
        }
    }
}

#[test]
fn distribution_matches_library_and_round_trips() {
    let b = Budget::default();
    let a = corpus::parity();
    for window in ["#01#", "0110", "#1#0#"] {
        let u = a.states().parse_word(window).unwrap();
        let d = pushforward_distribution(&a, &Word::at_origin(u.clone()), 1, &b).unwrap();
        let (code, doc) = run(&["distribution", "--sca", &corpus_file("parity"), "--window", window]);
        assert_eq!(code, 0);
        let support = doc["payload"]["support"].as_object().unwrap();
        assert_eq!(support.len(), d.support.len());
        for (w, p) in support {
            let v = a.states().parse_word(w).unwrap();
            let exact = parse_rational(p.as_str().unwrap()).unwrap();
            assert_eq!(exact, d.prob(&v));
            assert_eq!(format_rational(&exact), p.as_str().unwrap());
            assert_eq!(exact, cylinder_prob(&a, &u, &v, 1, &b).unwrap());
        }
    }
}

fn text_rows(out: &Output, path: &str) -> Vec<String> {
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    std::fs::read_to_string(path).unwrap().lines().map(str::to_string).collect()
}

#[test]
fn identity_diagram_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("id.txt").display().to_string();
    let out = sca(&["simulate", "--sca", &corpus_file("identity"), "--config", "01", "--steps", "2", "--output", &path]);
    assert_eq!(text_rows(&out, &path), ["01", "01", "01"]);
}

#[test]
fn parity_diagram_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let f = corpus_file("parity");
    for style in ["text", "pgm"] {
        let mut renders = Vec::new();
        for i in 0..2 {
            let path = dir.path().join(format!("{style}{i}")).display().to_string();
            let args = ["simulate", "--sca", &f, "--config", "#0110#10", "--steps", "12", "--seed", "7"];
            let out = sca(&[&args[..], &["--style", style, "--output", &path]].concat());
            assert_eq!(out.status.code(), Some(0));
            renders.push(std::fs::read(&path).unwrap());
        }
        assert_eq!(renders[0], renders[1], "{style}");
    }
    // SCA_SEED supplies the default seed
    let with_flag = sca(&["simulate", "--sca", &f, "--config", "#01", "--steps", "4", "--seed", "7"]);
    let with_env = Command::new(env!("CARGO_BIN_EXE_sca"))
        .args(["simulate", "--sca", &f, "--config", "#01", "--steps", "4"])
        .env("SCA_SEED", "7")
        .output()
        .unwrap();
    let rows = |o: &Output| serde_json::from_slice::<Value>(&o.stdout).unwrap()["payload"]["rows"].clone();
    assert_eq!(rows(&with_flag), rows(&with_env));
}

#[test]
fn pgm_layout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.pgm").display().to_string();
    let out = sca(&[
        "simulate", "--sca", &corpus_file("identity"), "--config", "0110", "--steps", "1", "--style", "pgm", "--output",
        &path,
    ]);
    assert_eq!(out.status.code(), Some(0));
    let bytes = std::fs::read(&path).unwrap();
    let header = b"P5\n4 2\n255\n";
    assert_eq!(&bytes[..header.len()], header);
    assert_eq!(&bytes[header.len()..], [0, 255, 255, 0, 0, 255, 255, 0]);
    let (code, _) = run(&["simulate", "--sca", &corpus_file("identity"), "--config", "01", "--style", "pgm"]);
    assert_eq!(code, 2);
}

#[test]
fn particle_counts_are_conserved_on_sampled_paths() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.txt").display().to_string();
    for seed in ["1", "7", "42"] {
        let out = sca(&[
            "simulate", "--sca", &corpus_file("particle"), "--config", "110010001011000100", "--steps", "30", "--seed",
            seed, "--output", &path,
        ]);
        let rows = text_rows(&out, &path);
        assert_eq!(rows.len(), 31);
        let counts: Vec<usize> = rows.iter().map(|r| r.matches('1').count()).collect();
        assert!(counts.iter().all(|&c| c == counts[0]), "seed {seed}: {counts:?}");
    }
}

#[test]
fn ppt_commands() {
    let f = corpus_file("ppt_loop");
    let (code, doc) = run(&["ppt-cfca", "--sca", &f, "--x", "x", "--y", "y", "--z", "z", "--threshold", "exp:1,1/3"]);
    assert_eq!(code, 0);
    let w = &doc["payload"]["witness"];
    assert!(parse_rational(w["probability"].as_str().unwrap()).unwrap()
        > parse_rational(w["threshold"].as_str().unwrap()).unwrap());
    assert!(w["window"].is_string());
    let u = corpus_file("ppt_uniform");
    let (code, _) = run(&["ppt-cfca", "--sca", &u, "--x", "x", "--y", "y", "--z", "z", "--threshold", "exp:1,3/4"]);
    assert_eq!(code, 1);
    let (code, _) = run(&["ppt-cfca", "--sca", &f, "--x", "x", "--y", "y", "--z", "z", "--threshold", "exp:1,2"]);
    assert_eq!(code, 2);
}

#[test]
fn pfa_commands() {
    let f = corpus_file("pfa_half");
    let (code, doc) = run(&["pfa-prob", "--pfa", &f, "--word", "aa"]);
    assert_eq!((code, doc["payload"]["value"].as_str()), (0, Some("1/4")));
    let (code, doc) = run(&["encode-pfa", "--pfa", &f]);
    assert_eq!(code, 0);
    let text = serde_json::to_string(&doc["payload"]["sca"]).unwrap();
    let enc = sca_core::parse_sca(&text, &Budget::default()).unwrap();
    let lib = sca_core::ppt_pfa::encode_pfa(&corpus::pfa_half(), &Budget::default()).unwrap();
    assert_eq!(enc, lib);
}

#[test]
fn simulation_commands() {
    let p = corpus_file("parity");
    let (code, doc) = run(&["rescale", "--sca", &p, "--params", "2,1,0"]);
    assert_eq!(code, 0);
    assert_eq!(doc["payload"]["sca"]["states"].as_array().unwrap().len(), 9);

    let (code, doc) = run(&["cfca-host", "--sca", &p]);
    assert_eq!(code, 0);
    let dir = tempfile::tempdir().unwrap();
    let host = dir.path().join("host.json");
    std::fs::write(&host, serde_json::to_string(&doc["payload"]["sca"]).unwrap()).unwrap();
    let host = host.display().to_string();
    let (code, _) = run(&["simulates", "--a", &p, "--b", &host, "--pb", "1,2,0", "--inject", "--mode", "s"]);
    assert_eq!(code, 0);
    let (code, doc) = run(&["simulates", "--a", &p, "--b", &host, "--pb", "1,1,0", "--inject", "--mode", "s"]);
    assert_eq!(code, 1);
    assert!(doc["payload"]["trim_error"].is_string());

    let (code, doc) = run(&["project", "--sca", &host, "--map", "0=#"]);
    assert_eq!(code, 1);
    assert!(doc["payload"]["witness"].is_object());
    let (code, _) = run(&["restrict", "--sca", &corpus_file("identity"), "--states", "0"]);
    assert_eq!(code, 0);
    let (code, doc) = run(&["restrict", "--sca", &corpus_file("blank_noise"), "--states", "0"]);
    assert_eq!(code, 1);
    assert!(doc["payload"]["witness"]["output"].is_string());

    let (code, doc) = run(&["search-sim", "--a", &corpus_file("xor_noise"), "--b", &corpus_file("blank_noise")]);
    assert_eq!(code, 0);
    assert_eq!(doc["payload"]["outcome"]["result"], "found");
}

#[test]
fn coupling_gadget_conserve() {
    let (a, b) = (corpus_file("blank_noise"), corpus_file("xor_noise"));
    for w in ["0", "1"] {
        let (code, doc) = run(&["coupling", "--a", &a, "--b", &b, "--window", w]);
        assert_eq!(code, 0);
        assert_eq!(doc["payload"]["equal_output_mass"], "1/1");
        assert_eq!(doc["payload"]["entries"].as_array().unwrap().len(), 2);
    }
    let (code, doc) = run(&["coupling", "--a", &a, "--b", &corpus_file("biased_noise"), "--window", "0"]);
    assert_eq!(code, 1);
    assert_eq!(doc["payload"]["result"], "infeasible");

    let (code, _) = run(&["gadget", "--kind", "surjectivity-lift", "--sca", &corpus_file("xor_ca")]);
    assert_eq!(code, 0);
    let (code, _) = run(&["gadget", "--kind", "square-noise", "--sca", &corpus_file("blank_noise")]);
    assert_eq!(code, 2);

    let (code, _) = run(&["conserve", "--sca", &corpus_file("particle"), "--support", "3"]);
    assert_eq!(code, 0);
    let (code, doc) = run(&["conserve", "--sca", &corpus_file("fig1_cfca"), "--t", "1"]);
    assert_eq!(code, 1);
    assert!(doc["payload"]["witness"]["window"].is_string());
}

#[test]
fn small_commands() {
    let (code, _) = run(&["deterministic", "--sca", &corpus_file("xor_ca")]);
    assert_eq!(code, 0);
    let (code, _) = run(&["deterministic", "--sca", &corpus_file("parity")]);
    assert_eq!(code, 1);
    let (code, doc) = run(&["cfca", "--sca", &corpus_file("biased_noise")]);
    assert_eq!(code, 0);
    assert!(doc["payload"]["local_distribution"].is_object());
    let (code, _) = run(&["cfca", "--sca", &corpus_file("parity")]);
    assert_eq!(code, 1);
    let (code, doc) = run(&["nd-equal", "--a", &corpus_file("blank_noise"), "--b", &corpus_file("biased_noise")]);
    assert_eq!((code, doc["payload"]["answer"].as_bool()), (0, Some(true)));
    let (code, doc) = run(&["corpus", "--name", "parity"]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(corpus_file("parity")).unwrap();
    assert_eq!(doc["payload"]["sca"], serde_json::from_str::<Value>(&text).unwrap());
}
