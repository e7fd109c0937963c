mod common;

use std::fs;
use std::process::{Command, Output};

use common::fixture;

fn cdwsd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cdwsd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = cdwsd(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn instruments() -> (String, String) {
    (
        fixture("instruments.tif").display().to_string(),
        fixture("instruments.sem").display().to_string(),
    )
}

#[test]
fn worked_example_line() {
    let (tif, sem) = instruments();
    let text = stdout(&["disambiguate", "--taxonomy", &tif, "--input", &sem, "--window", "3"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 8);
    assert_eq!(lines[0], "0\tguitar\tfull\tnoun.artifact.0\tmonosemous\t-");
    assert_eq!(lines[1], "1\tbass\tfull\tnoun.artifact.0\tcd\t1.043428");
}

#[test]
fn stats_table() {
    let text = stdout(&[
        "stats",
        "--taxonomy",
        &fixture("jury.tif").display().to_string(),
        "--input",
        &fixture("jury.sem").display().to_string(),
    ]);
    assert_eq!(
        text,
        "text\twords\tnouns\tnouns_in_taxonomy\tmonosemous\njury\t22\t11\t5\t3 (60%)\n"
    );
}

#[test]
fn evaluate_report() {
    let (tif, sem) = instruments();
    let text = stdout(&["evaluate", "--taxonomy", &tif, "--input", &sem, "--level", "sense"]);
    assert!(text.starts_with("level: sense\npopulation: all\ntotal: 8\n"), "{text}");
    assert!(text.ends_with("method\tcover\tprec\trecall\ncd\t100.0\t75.0\t75.0\n"), "{text}");
}

#[test]
fn scoring_a_saved_assignment_file_matches_direct_evaluation() {
    let (tif, sem) = instruments();
    let dir = tempfile::tempdir().unwrap();
    let saved = dir.path().join("cd.tsv");
    let common = ["--taxonomy", &tif, "--input", &sem, "--fallback", "random", "--seed", "4"];
    let mut args = vec!["disambiguate"];
    args.extend(common);
    args.extend(["--out", saved.to_str().unwrap()]);
    assert!(cdwsd(&args).status.success());

    let direct = {
        let mut a = vec!["evaluate"];
        a.extend(common);
        stdout(&a)
    };
    let replayed = stdout(&["evaluate", "--taxonomy", &tif, "--input", &sem, "--assignments", saved.to_str().unwrap()]);
    let counts = |s: &str| s.lines().take(9).map(String::from).collect::<Vec<_>>();
    assert_eq!(counts(&direct), counts(&replayed));
}

#[test]
fn sweep_rows() {
    let (tif, sem) = instruments();
    let text = stdout(&["sweep", "--taxonomy", &tif, "--input", &sem, "--windows", "1,3"]);
    assert_eq!(
        text,
        "window\tcoverage\tprecision\trecall\ttotal\tanswered\tcorrect\n\
         1\t62.5\t100.0\t62.5\t8\t5\t5\n\
         3\t100.0\t87.5\t87.5\t8\t8\t7\n"
    );
}

#[test]
fn baselines_run() {
    let (tif, sem) = instruments();
    for baseline in ["random", "sussna"] {
        let text = stdout(&["disambiguate", "--taxonomy", &tif, "--input", &sem, "--baseline", baseline]);
        assert_eq!(text.lines().count(), 8, "{baseline}");
    }
    for baseline in ["mfs", "yarowsky"] {
        let text = stdout(&["evaluate", "--taxonomy", &tif, "--input", &sem, "--baseline", baseline, "--train", &sem]);
        assert!(text.contains(&format!("\n{baseline}\t")), "{text}");
    }
}

#[test]
fn multiple_inputs_get_document_headers() {
    let (tif, sem) = instruments();
    let text = stdout(&["disambiguate", "--taxonomy", &tif, "--input", &sem, &sem]);
    assert_eq!(text.lines().filter(|l| *l == "# instruments").count(), 2);
}

#[test]
fn plain_input() {
    let (tif, _) = instruments();
    let dir = tempfile::tempdir().unwrap();
    let plain = dir.path().join("words.txt");
    fs::write(&plain, "guitar bass\n\nkazoo drum\n").unwrap();
    let text = stdout(&["disambiguate", "--taxonomy", &tif, "--input", plain.to_str().unwrap(), "--format", "plain"]);
    let lemmas: Vec<&str> = text.lines().map(|l| l.split('\t').nth(1).unwrap()).collect();
    assert_eq!(lemmas, ["guitar", "bass", "drum"]);
}

#[test]
fn exit_codes() {
    let (tif, sem) = instruments();
    let dir = tempfile::tempdir().unwrap();
    let plain = dir.path().join("words.txt");
    fs::write(&plain, "guitar bass\n").unwrap();
    let broken = dir.path().join("broken.sem");
    fs::write(&broken, "<s>\n<wd>jury</sn>\n</s>\n").unwrap();
    let (plain, broken) = (plain.to_str().unwrap(), broken.to_str().unwrap());

    let cases: [(&[&str], i32); 8] = [
        (&["disambiguate", "--taxonomy", "/nonexistent.tif", "--input", &sem], 1),
        (&["disambiguate", "--taxonomy", &tif, "--input", broken], 1),
        (&["disambiguate", "--taxonomy", &sem, "--input", &sem], 1),
        (&["disambiguate", "--taxonomy", &tif, "--input", &sem, "--window", "0"], 2),
        (&["disambiguate", "--taxonomy", &tif, "--input", &sem, "--exponent", "0"], 2),
        (&["evaluate", "--taxonomy", &tif, "--input", plain, "--format", "plain"], 2),
        (&["evaluate", "--taxonomy", &tif, "--input", &sem, "--baseline", "mfs"], 2),
        (&["sweep", "--taxonomy", &tif, "--input", &sem, "--windows", "3,0"], 2),
    ];
    for (args, code) in cases {
        let out = cdwsd(args);
        assert_eq!(out.status.code(), Some(code), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.is_empty());
    }
    assert_eq!(cdwsd(&["frobnicate"]).status.code(), Some(2));
}
