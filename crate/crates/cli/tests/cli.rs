use std::path::PathBuf;
use std::process::{Command, Output};

use effects_core::sexp::read_one;

fn data(file: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(file)
        .display()
        .to_string()
}

fn effects(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_effects"))
        .args(args)
        .env_remove("EFFECTS_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn line<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines().find_map(|l| l.strip_prefix(key).map(str::trim))
}

fn without_time(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with("time ")).collect::<Vec<_>>().join("\n")
}

#[test]
fn eval_prints_the_value() {
    let o = effects(&["eval", "-e", "((lambda (x) x) nil)"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(line(&stdout(&o), "VALUE"), Some("nil"));
    let o = effects(&["eval", "-e", "(get nil)"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("STUCK"));
    let o = effects(&["eval", "--max-steps", "50", "-e", "(app (lambda (x) (app x x)) (lambda (x) (app x x)))"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("TIMEOUT"));
}

#[test]
fn equiv_witness_replays_under_eval() {
    let o = effects(&["equiv", "--method", "ciu", "(eq (mk x) (mk x))", "t"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert_eq!(line(&out, "verdict"), Some("FAILS"));
    let witness = read_one(line(&out, "witness").expect("witness line")).unwrap();
    let programs: Vec<String> = witness
        .as_list()
        .unwrap()
        .iter()
        .filter(|s| s.head() == Some("program"))
        .map(|s| s.as_list().unwrap()[1].to_string())
        .collect();
    assert_eq!(programs.len(), 2);
    let codes: Vec<Option<i32>> = programs
        .iter()
        .map(|p| effects(&["eval", "-e", p]).status.code())
        .collect();
    assert!(codes.contains(&Some(0)) && codes.contains(&Some(1)), "{codes:?}");
}

#[test]
fn law_reports_moggi_ii() {
    let o = effects(&["law", "--name", "moggi-ii", "--cases", "40", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(line(&out, "verdict"), Some("HOLDS"));
    assert!(line(&out, "counts").unwrap().contains("instances 40"));
    let o = effects(&["law", "--name", "eta-general"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("witness"));
}

#[test]
fn usage_errors_exit_3() {
    for args in [vec!["bogus"], vec!["eval", "--max-steps", "x", "-e", "nil"], vec!["eval", "-e", "(lambda"]] {
        assert_eq!(effects(&args).status.code(), Some(3), "{args:?}");
    }
    assert_eq!(effects(&["equiv", "--method", "nope", "nil", "nil"]).status.code(), Some(3));
}

#[test]
fn scripted_ticker_replies_five() {
    let script = data("ticker-5.script");
    let cfg = data("ticker.cfg");
    let o = effects(&["actor", "run", "--scheduler", "script", &script, &cfg]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l == "trace out (k 5)"), "{out}");
    assert_eq!(line(&out, "audit interface"), Some("ok"));
    assert_eq!(line(&out, "audit privacy"), Some("ok"));
}

#[test]
fn observing_the_race() {
    let o = effects(&["actor", "observe", "--samples", "32", &data("race.cfg")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(line(&stdout(&o), "observed"), Some("SOME"));
}

#[test]
fn asserting_a_formula_file() {
    let o = effects(&["assert", "--cells", "1", &data("mk.vt")]);
    assert_eq!(line(&stdout(&o), "overall"), Some("HOLDS"), "{}", stdout(&o));
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn reports_are_reproducible() {
    let ticker = data("ticker-request.cfg");
    let runs: [Vec<&str>; 3] = [
        vec!["law", "--name", "moggi-i", "--cases", "30", "--seed", "3"],
        vec!["equiv", "--method", "strong-iso", "(seq (mk x) (mk u))", "(mk u)"],
        vec!["actor", "run", "--scheduler", "random", "--seed", "9", &ticker],
    ];
    for args in &runs {
        let a = without_time(&stdout(&effects(args)));
        let b = without_time(&stdout(&effects(args)));
        assert!(!a.is_empty());
        assert_eq!(a, b, "{args:?}");
    }
}
