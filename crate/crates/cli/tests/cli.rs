use std::path::PathBuf;
use std::process::Command;

use pargraph_cli::app::execute;
use pargraph_cli::syntax::parse;
use pargraph_core::isomorphic;
use serde_json::Value;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn pargraph(args: &[&str]) -> pargraph_cli::app::Execution {
    execute(std::iter::once("pargraph").chain(args.iter().copied()))
}

fn json(args: &[&str]) -> Value {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let run = pargraph(&full);
    serde_json::from_str(&run.stdout).unwrap_or_else(|e| panic!("{e}: {run:?}"))
}

#[test]
fn parse_prints_a_fixed_point() {
    for name in ["ex1.pgr", "conflict.pgr", "triangle.pgr", "par.pgr"] {
        let path = fixture(name);
        let run = pargraph(&["parse", &path]);
        assert_eq!(run.code, 0, "{name}: {}", run.stderr);
        let src = std::fs::read_to_string(&path).unwrap();
        assert_eq!(parse(&run.stdout).unwrap(), parse(&src).unwrap());
    }
}

#[test]
fn match_lists_both_matchings_of_the_example() {
    let run = pargraph(&["match", &fixture("ex1.pgr"), "--graph", "G"]);
    assert_eq!(run.code, 0);
    assert_eq!(run.stdout.lines().count(), 2);
    assert!(run.stdout.starts_with("r1 {⟨x,1⟩, ⟨y,2⟩, ⟨z,3⟩"));

    let ms = json(&["match", &fixture("ex1.pgr"), "--graph", "G", "--rule", "r1"]);
    assert_eq!(ms[0]["key"], "r1[x=1,y=2,z=3;f=4,g=5;u=b,v=a]");
    assert_eq!(ms[1]["subst"]["v"], "s(b)");
}

#[test]
fn regularity_sets_the_exit_code() {
    let run = pargraph(&["check-regular", &fixture("conflict.pgr"), "--graph", "G"]);
    assert_eq!(run.code, 1);
    assert!(run
        .stdout
        .starts_with("not regular: r1[x=1,y=3,z=2;f=5,g=4;u=b,v=a]"));

    let run = pargraph(&["check-regular", &fixture("triangle.pgr"), "--graph", "T"]);
    assert_eq!(
        (run.code, run.stdout.as_str()),
        (0, "regular: 6 matchings\n")
    );
}

#[test]
fn modulo_aut_steps_agree_up_to_isomorphism() {
    let path = fixture("triangle.pgr");
    let canonical = pargraph(&[
        "step",
        &path,
        "--graph",
        "T",
        "--mode",
        "max",
        "--modulo-aut",
        "--normalize-fresh",
    ]);
    assert_eq!(canonical.code, 0);
    assert!(canonical
        .stdout
        .starts_with("// step 1: 1 matching, regular\n"));
    let first = parse(&canonical.stdout).unwrap();
    let first = first.graph("T").unwrap();
    assert_eq!((first.vertex_count(), first.arrow_count()), (4, 9));
    for seed in ["0", "1", "7"] {
        let args = [
            "step",
            &path,
            "--graph",
            "T",
            "--mode",
            "max",
            "--modulo-aut",
            "--seed",
            seed,
            "--normalize-fresh",
        ];
        let other = parse(&pargraph(&args).stdout).unwrap();
        assert!(isomorphic(first, other.graph("T").unwrap()));
    }

    let full = json(&["step", &path, "--graph", "T", "--mode", "max"]);
    assert_eq!(full["steps"][0]["matchings"], 6);
    assert_eq!(full["graph"]["nodes"].as_array().unwrap().len(), 9);
}

#[test]
fn conflicting_step_differs_between_modes() {
    let path = fixture("conflict.pgr");
    let min = json(&[
        "step",
        &path,
        "--graph",
        "G",
        "--mode",
        "min",
        "--normalize-fresh",
    ]);
    let max = json(&[
        "step",
        &path,
        "--graph",
        "G",
        "--mode",
        "max",
        "--normalize-fresh",
    ]);
    assert_eq!(min["steps"][0]["regular"], false);
    assert_eq!(min["graph"]["nodes"].as_array().unwrap().len(), 3);
    assert_eq!(max["graph"]["nodes"].as_array().unwrap().len(), 5);
}

#[test]
fn aut_and_iso() {
    let g = json(&["aut", &fixture("triangle.pgr"), "--rule", "tri"]);
    assert_eq!(g["order"], 6);
    assert_eq!(g["elements"].as_array().unwrap().len(), 6);
    let run = pargraph(&["aut", &fixture("par.pgr"), "--graph", "H"]);
    assert!(run.stdout.starts_with("order 2\n"));

    assert_eq!(pargraph(&["iso", &fixture("par.pgr"), "H", "H"]).code, 0);
    let run = pargraph(&["iso", &fixture("par.pgr"), "H", "G"]);
    assert_eq!((run.code, run.stdout.as_str()), (1, "not isomorphic\n"));
}

#[test]
fn life_blinker_oscillates() {
    let out = json(&[
        "life",
        "--pattern",
        "blinker",
        "--steps",
        "2",
        "--mode",
        "auto-max",
    ]);
    let frames = out["frames"].as_array().unwrap();
    assert_eq!(frames.len(), 3);
    assert_eq!(frames[0], frames[2]);
    assert_ne!(frames[0], frames[1]);
    assert_eq!(frames[1][2], ".###.");

    let run = pargraph(&[
        "life",
        "--width",
        "4",
        "--height",
        "4",
        "--cells",
        "0,0;0,1 1,0;1,1",
        "--steps",
        "1",
    ]);
    assert_eq!(run.code, 0);
    assert!(run
        .stdout
        .ends_with("step 1 (population 4)\n##..\n##..\n....\n....\n\n"));
}

#[test]
fn input_errors_exit_with_two() {
    let missing = pargraph(&["parse", "no/such/file.pgr"]);
    assert_eq!(missing.code, 2);
    assert!(missing
        .stderr
        .starts_with("error: cannot read no/such/file.pgr"));

    let dir = std::env::temp_dir().join(format!("pargraph-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.pgr");
    std::fs::write(&bad, "graph G {\n  node x@1;\n}\n").unwrap();
    let run = pargraph(&["parse", bad.to_str().unwrap()]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("bad.pgr:2:9:"), "{}", run.stderr);

    let ex1 = fixture("ex1.pgr");
    assert_eq!(pargraph(&["match", &ex1, "--graph", "nope"]).code, 2);
    assert_eq!(
        pargraph(&["match", &ex1, "--graph", "G", "--rule", "nope"]).code,
        2
    );
    assert_eq!(pargraph(&["life", "--cells", "1;2"]).code, 2);
    assert_eq!(pargraph(&["life", "--width", "2"]).code, 2);
    assert_eq!(pargraph(&["life", "--cells", "9,9"]).code, 2);
    assert_eq!(
        pargraph(&["step", &ex1, "--graph", "G", "--seed", "3"]).code,
        2
    );
    assert_eq!(pargraph(&["aut", &ex1]).code, 2);
    assert_eq!(pargraph(&["--help"]).code, 0);
}

#[test]
fn binary_forwards_output_and_exit_code() {
    let out = Command::new(env!("CARGO_BIN_EXE_pargraph"))
        .args(["check-regular", &fixture("conflict.pgr"), "--graph", "G"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .starts_with("not regular"));
}
