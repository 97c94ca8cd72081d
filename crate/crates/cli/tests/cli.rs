use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

use recsolve::exprcore::{Bindings, Rat};
use recsolve::recmodel::{parse, parse_initial_conditions, Problem};
use recsolve::verify::iterate_oracle;

const REGRESSION: &[(&str, &str)] = &[
    ("x(n)=5*x(n-1)-6*x(n-2)+n^2", "x(0)=0;x(1)=1"),
    ("x(n)=n*x(n-1)+2", "x(0)=0"),
    ("x(n)=3*x(n-1)^2", "x(0)=c"),
    ("x(n)=n/2+n*sum(x,k,0,n-1)", ""),
    ("x(m,n)=a+x(m-1,n+1)", "x(0,n)=9"),
    ("x(n)=7*x(n/2)+(9/2)*n^2", "x(1)=1"),
    ("x(n)=2*x(n/2)+n-1", ""),
    ("x(n)=x(n-1)+x(n-3)+2^n+n-1", "x(0)=0;x(1)=0;x(2)=0"),
    ("x(n)=x(n-1)+y(n-1)+2^n; y(n)=z(n-1)+n-1; z(n)=x(n-1)+1", "x(0)=0;y(0)=0;z(0)=0"),
    ("x(n)=4*x(n-2)+1", "x(0)=0;x(1)=1"),
    ("x(n)=x(n-1)^2+1", ""),
];

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_recsolve")).args(args).output().expect("binary runs")
}

fn solve(text: &str, ics: &str, extra: &[&str]) -> Output {
    let mut args = vec!["solve", text];
    if !ics.is_empty() {
        args.extend(["--init", ics]);
    }
    args.extend(extra);
    run(&args)
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn exit_codes() {
    let ok = solve("x(n)=5*x(n-1)-6*x(n-2)+n^2", "x(0)=0;x(1)=1", &["--verify", "50"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("x(n) = "));

    let unsolved = solve("x(n)=x(n-1)^2+1", "", &[]);
    assert_eq!(unsolved.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unsolved.stdout).contains("reason: NotPowerProduct"));

    let bad = solve("x(n)=x(n-1)+", "", &[]);
    assert_eq!(bad.status.code(), Some(1));
    let err = String::from_utf8_lossy(&bad.stderr);
    assert!(err.contains('^'), "{err}");

    // a missing argument is a usage error
    assert_ne!(run(&["solve"]).status.code(), Some(0));
}

#[test]
fn strassen_bounds_json() {
    let out = solve("x(n)=7*x(n/2)+(9/2)*n^2", "x(1)=1", &["--mode", "bounds", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["status"], "bounds");
    assert!(v["lower"].is_string() && v["upper"].is_string());
}

#[test]
fn json_schema() {
    for (text, ics) in REGRESSION {
        let out = solve(text, ics, &["--format", "json"]);
        let v = json(&out);
        assert!(v["classification"].is_string(), "{text}");
        let status = v["status"].as_str().unwrap();
        assert!(["exact", "bounds", "unsolved"].contains(&status), "{text}");
        match status {
            "exact" => assert!(v["closed_form"].is_string() || v["branches"].is_array(), "{text}"),
            "bounds" => assert!(v["lower"].is_string() && v["upper"].is_string(), "{text}"),
            _ => assert!(v["reason"].is_string(), "{text}"),
        }
        assert!(v["domain"].is_string(), "{text}");
        assert!(v["assumptions"].as_array().unwrap().iter().all(Value::is_string), "{text}");
        assert!(v["verification"]["checked_up_to"].is_i64(), "{text}");
        assert!(v["verification"]["ok"].is_boolean(), "{text}");
        let expected = match status {
            "unsolved" => 2,
            _ if v["verification"]["ok"] == true => 0,
            _ => 3,
        };
        assert_eq!(out.status.code(), Some(expected), "{text}");
    }
}

#[test]
fn output_is_deterministic() {
    for (text, ics) in REGRESSION {
        for format in ["text", "json"] {
            let a = solve(text, ics, &["--format", format, "--table", "8"]);
            let b = solve(text, ics, &["--format", format, "--table", "8"]);
            assert_eq!(a.stdout, b.stdout, "{text}");
            assert_eq!(a.status.code(), b.status.code(), "{text}");
        }
    }
}

#[test]
fn table_matches_oracle() {
    for (text, ics) in [REGRESSION[0], REGRESSION[1], REGRESSION[7]] {
        let v = json(&solve(text, ics, &["--format", "json", "--table", "20"]));
        let Problem::Single(s) = parse(text).unwrap().with_initial_conditions(&parse_initial_conditions(ics).unwrap())
        else {
            panic!()
        };
        let oracle = iterate_oracle(&s, &Bindings::new(), 20).unwrap();
        let rows = v["table"].as_array().unwrap();
        assert_eq!(rows.len(), oracle.points.len());
        for (row, (idx, val)) in rows.iter().zip(&oracle.points) {
            assert_eq!(row[0].as_str().unwrap().parse::<Rat>().unwrap(), idx[0]);
            assert_eq!(&row[1].as_str().unwrap().parse::<Rat>().unwrap(), val, "{text}");
        }
    }
}

#[test]
fn table_text_rows() {
    let out = solve("x(n)=n*x(n-1)+2", "x(0)=0", &["--table", "5"]);
    let text = String::from_utf8_lossy(&out.stdout);
    let rows: Vec<&str> = text.lines().skip_while(|l| *l != "n,value").skip(1).collect();
    assert_eq!(rows, ["0,0", "1,2", "2,6", "3,20", "4,82", "5,412"]);
}

#[test]
fn batch_mode() {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("batch.txt");
    std::fs::write(
        &path,
        "# fibonacci\nx(n)=x(n-1)+x(n-2)\ninit: x(0)=0;x(1)=1\n\nx(n)=7*x(n/2)+(9/2)*n^2\ninit: x(1)=1\nmode: bounds\n\nx(n)=x(n-1)^2+1\n",
    )
    .unwrap();
    let out = run(&["batch", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(out.status.code(), Some(2));
    let lines: Vec<Value> =
        String::from_utf8_lossy(&out.stdout).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let status: Vec<&str> = lines.iter().map(|v| v["status"].as_str().unwrap()).collect();
    assert_eq!(status, ["exact", "bounds", "unsolved"]);
}
