use std::io::Write;
use std::process::{Command, Output};

use tempfile::NamedTempFile;
use unitrace::CompiledSystem;

const XAY: &str = "module left
p : [0..1] init 0;
p=0 -> true;
[alpha] p=0 -> p'=1;
p=1 -> true;
endmodule
module right
q : [0..1] init 0;
q=0 -> true;
[alpha] q=0 -> q'=1;
q=1 -> true;
endmodule
";

const FREE: &str = "module a
x : [0..2] init 0;
x<2 -> (x'=x+1) + (x'=0);
x=2 -> x'=0;
endmodule
module b
y : [0..1] init 0;
y=0 -> y'=1;
y=1 -> (y'=0) + true;
endmodule
";

const PLANTED: &str = "module m
x : [0..3] init 0;
x<3 -> (x'=x+1) + (x'=0);
x=3 -> (x'=0) + (x'=0);
endmodule
";

fn source(text: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn unitrace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unitrace"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn body(o: &Output) -> Vec<String> {
    stdout(o)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(String::from)
        .collect()
}

#[test]
fn count_on_the_sync_example() {
    let f = source(XAY);
    let o = unitrace(&[
        "count",
        f.path().to_str().unwrap(),
        "--length",
        "2",
        "--sync",
        "alpha",
        "--format",
        "kv",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(body(&o).contains(&"count=8".to_string()), "{}", stdout(&o));
    assert!(stdout(&o).contains("# sync=alpha"));
}

#[test]
fn sample_is_reproducible_and_echoes_its_configuration() {
    let f = source(FREE);
    let args = [
        "sample",
        f.path().to_str().unwrap(),
        "--length",
        "5",
        "--count",
        "3",
        "--seed",
        "7",
    ];
    let a = unitrace(&args);
    let b = unitrace(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let out = stdout(&a);
    for key in [
        "# command=sample",
        "# length=5",
        "# count=3",
        "# seed=7",
        "# resolved_mode=exact",
    ] {
        assert!(out.contains(key), "{key} missing in\n{out}");
    }
    assert_eq!(body(&a).len(), 3);
}

#[test]
fn fresh_seed_is_recorded_and_replays() {
    let f = source(FREE);
    let path = f.path().to_str().unwrap();
    let first = unitrace(&["sample", path, "-n", "6", "-m", "4"]);
    let seed = stdout(&first)
        .lines()
        .find_map(|l| l.strip_prefix("# seed="))
        .unwrap()
        .to_string();
    let again = unitrace(&["sample", path, "-n", "6", "-m", "4", "--seed", &seed]);
    assert_eq!(body(&first), body(&again));
}

#[test]
fn sampled_traces_revalidate_against_the_source() {
    for (text, sync) in [(FREE, None), (XAY, Some("alpha"))] {
        let f = source(text);
        let mut args = vec![
            "sample",
            f.path().to_str().unwrap(),
            "-n",
            "8",
            "-m",
            "50",
            "--seed",
            "1",
        ];
        if let Some(s) = sync {
            args.extend(["--sync", s]);
        }
        let o = unitrace(&args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let c = CompiledSystem::from_source(text, sync).unwrap();
        for line in body(&o) {
            let letters = c.parse_trace(&line).unwrap();
            assert_eq!(letters.len(), 8);
            assert!(c.conforms(&c.replay(&letters).unwrap()).unwrap(), "{line}");
        }
    }
}

#[test]
fn estimate_reports_the_sample_size() {
    let f = source(PLANTED);
    let args = [
        "estimate",
        f.path().to_str().unwrap(),
        "--detect",
        "x=3",
        "--epsilon",
        "0.1",
        "--delta",
        "0.05",
        "--depth",
        "3",
        "--seed",
        "2",
        "--iterate",
        "1,3",
    ];
    let o = unitrace(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(body(&o)[0], "N=185");
    assert!(stdout(&o).contains("# seed=2"));
    assert_eq!(o.stdout, unitrace(&args).stdout);
}

#[test]
fn validate_passes_on_an_honest_sampler() {
    let f = source(FREE);
    let o = unitrace(&[
        "validate",
        f.path().to_str().unwrap(),
        "-n",
        "4",
        "--seed",
        "3",
        "--format",
        "kv",
    ]);
    assert!(
        o.status.success(),
        "{}{}",
        stdout(&o),
        String::from_utf8_lossy(&o.stderr)
    );
    let lines = body(&o);
    assert!(lines.contains(&"illegal=0".to_string()));
    assert!(lines.contains(&"verdict=pass".to_string()));
}

#[test]
fn flatten_and_product_emit_automata() {
    let f = source(XAY);
    let path = f.path().to_str().unwrap();
    let o = unitrace(&["flatten", path, "--sync", "alpha"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.matches("states 2").count(), 2);
    assert!(out.contains("letter 0 * alpha"));
    let o = unitrace(&["product", path, "--sync", "alpha"]);
    assert!(o.status.success());
    // both modules leave state 0 together, so only two product states
    assert!(stdout(&o).contains("states 2\ninitial 0"));
    let free = source(FREE);
    let o = unitrace(&["product", free.path().to_str().unwrap()]);
    assert!(stdout(&o).contains("states 6\n"));
}

#[test]
fn output_file() {
    let f = source(FREE);
    let out = NamedTempFile::new().unwrap();
    let o = unitrace(&[
        "flatten",
        f.path().to_str().unwrap(),
        "-o",
        out.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert!(std::fs::read_to_string(out.path())
        .unwrap()
        .contains("# module a"));
}

#[test]
fn errors_have_distinct_exit_codes() {
    let code = |o: Output| o.status.code().unwrap();
    assert_eq!(code(unitrace(&["sample", "--bogus"])), 2);
    let xay = source(XAY);
    let path = xay.path().to_str().unwrap();
    assert_eq!(
        code(unitrace(&[
            "count", path, "-n", "2", "--sync", "alpha", "--sync", "beta"
        ])),
        2
    );
    assert_eq!(
        code(unitrace(&["count", "/nonexistent/system.rm", "-n", "2"])),
        3
    );
    let broken = source("module a x : [0..1] init 0; x=0 -> ; endmodule");
    assert_eq!(
        code(unitrace(&[
            "count",
            broken.path().to_str().unwrap(),
            "-n",
            "2"
        ])),
        4
    );
    assert_eq!(code(unitrace(&["count", path, "-n", "2"])), 5);
    let dead = source("module a x : [0..1] init 0; x=0 -> x'=1; endmodule");
    assert_eq!(
        code(unitrace(&[
            "sample",
            dead.path().to_str().unwrap(),
            "-n",
            "3"
        ])),
        6
    );
    let out = "/nonexistent/dir/out.txt";
    assert_eq!(
        code(unitrace(&["flatten", path, "--sync", "alpha", "-o", out])),
        7
    );
}

#[test]
fn help_documents_exit_codes() {
    let o = unitrace(&["--help"]);
    assert!(stdout(&o).contains("Exit codes:"));
}
