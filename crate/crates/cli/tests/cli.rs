use std::path::{Path, PathBuf};
use std::process::Command;

use clap::Parser;
use proptest::prelude::*;
use recur_cli::config::{config_hash, validate, Experiment, NormMethod, SignalSource, WindowSource};
use recur_cli::{emit_config, invoke, parse_config, Cli, ExperimentConfig};
use recur_core::combinatorics::{count_aps_brute, IntegerWindowSet};
use recur_core::seminorms::{gowers_norm, ComplexSignal};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn fixtures() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(fixture(""))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    v.sort();
    v
}

fn cli(args: &[&str]) -> Cli {
    Cli::try_parse_from(std::iter::once("recur").chain(args.iter().copied())).unwrap()
}

fn run_bytes(args: &[&str]) -> Vec<u8> {
    invoke(&cli(args)).unwrap().bytes
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_recur"))
}

#[test]
fn golden_counterexample_config_parses_to_documented_record() {
    let text = std::fs::read_to_string(fixture("counterexample_l16.toml")).unwrap();
    let c = parse_config(&text).unwrap();
    assert_eq!(
        c,
        ExperimentConfig {
            version: 1,
            seed: 0,
            grid: 4096,
            require_pass: true,
            experiment: Experiment::Counterexample { l: 16, n_checked: 64 },
        }
    );
}

#[test]
fn golden_counterexample_report() {
    let path = fixture("counterexample_l16.toml");
    let got = run_bytes(&["run", path.to_str().unwrap(), "--format", "json"]);
    let want = std::fs::read(fixture("counterexample_l16.json")).unwrap();
    assert_eq!(String::from_utf8(got.clone()).unwrap(), String::from_utf8(want).unwrap());

    let v: serde_json::Value = serde_json::from_slice(&got).unwrap();
    let r = &v["outputs"]["report"];
    let q = |f: &str| (r[f]["num"].as_u64().unwrap() as u128, r[f]["den"].as_u64().unwrap() as u128);
    let (mb_n, mb_d) = q("m_b");
    let (b_n, b_d) = q("bound");
    let (s_n, s_d) = q("sup_intersection");
    // bound = m(B) / (4L), sup <= bound, both as exact fractions
    assert_eq!(b_n * mb_d * 64, mb_n * b_d);
    assert!(s_n * b_d <= b_n * s_d);
    assert_eq!(r["within_bound"], true);
    assert_eq!(v["pass"], true);
}

#[test]
fn every_fixture_round_trips_through_canonical_form() {
    for path in fixtures() {
        let text = std::fs::read_to_string(&path).unwrap();
        let c = parse_config(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let emitted = emit_config(&c).unwrap();
        let again = parse_config(&emitted).unwrap_or_else(|e| panic!("{}: {e}\n{emitted}", path.display()));
        assert_eq!(again, c, "{}", path.display());
        assert_eq!(config_hash(&again), config_hash(&c));
    }
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    for path in fixtures() {
        let p = path.to_str().unwrap();
        for format in ["csv", "json"] {
            let one = run_bytes(&["run", p, "--format", format, "--threads", "1"]);
            let again = run_bytes(&["run", p, "--format", format, "--threads", "1"]);
            let many = run_bytes(&["run", p, "--format", format, "--threads", "4"]);
            assert_eq!(one, again, "{p}");
            assert_eq!(one, many, "{p}");
        }
    }
}

#[test]
fn subcommand_and_config_agree() {
    let path = fixture("gowers.toml");
    let from_config = run_bytes(&["run", path.to_str().unwrap()]);
    let from_flags = run_bytes(&["gowers", "--random", "48", "-k", "3", "--seed", "7"]);
    assert_eq!(from_config, from_flags);
}

#[test]
fn print_config_emits_parseable_canonical_form() {
    let text = String::from_utf8(run_bytes(&["--print-config", "behrend", "-l", "64"])).unwrap();
    let c = parse_config(&text).unwrap();
    assert_eq!(c.experiment, Experiment::Behrend { l: 64 });
}

#[test]
fn behrend_csv_schema() {
    let text = String::from_utf8(run_bytes(&["behrend", "-l", "64"])).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("member"));
    let body: Vec<&str> = lines.collect();
    let (summary, members) = body.split_last().unwrap();
    assert!(summary.starts_with("# size="), "{summary}");
    assert!(summary.contains("has_3ap=false"));
    let members: Vec<u64> = members.iter().map(|m| m.parse().unwrap()).collect();
    let e = IntegerWindowSet::from_members(64, &members).unwrap();
    assert_eq!(count_aps_brute(&e, 3).unwrap().total, 0);
    assert!(summary.contains(&format!("size={}", members.len())));
}

#[test]
fn signal_csv_input_matches_library() {
    let dir = std::env::temp_dir().join(format!("recur-cli-signal-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("signal.csv");
    let values: Vec<(f64, f64)> = (0..24).map(|i| ((i as f64 * 0.7).sin() * 0.9, (i as f64 * 0.3).cos() * 0.4)).collect();
    let mut text = String::from("index,re,im\n");
    for (i, (re, im)) in values.iter().enumerate() {
        text.push_str(&format!("{i},{re:.17e},{im:.17e}\n"));
    }
    std::fs::write(&path, text).unwrap();
    let out = String::from_utf8(run_bytes(&["gowers", "--signal", path.to_str().unwrap(), "-k", "2"])).unwrap();
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    let f = ComplexSignal::new(values.iter().map(|&(re, im)| num_complex::Complex64::new(re, im)).collect()).unwrap();
    assert_eq!(row[2], format!("{:.16e}", gowers_norm(&f, 2).unwrap().value));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn window_text_forms_agree() {
    let rle = fixture("window.rle");
    let from_rle = run_bytes(&["apcount", "--set-file", rle.to_str().unwrap()]);
    let from_members = run_bytes(&["apcount", "--members", "1,2,6,8,9,10,11,12,13,14,15", "--window", "16"]);
    assert_eq!(from_rle, from_members);
}

#[test]
fn exit_codes() {
    let ok = bin().args(["behrend", "-l", "100", "--require-pass"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));

    let qc5 = fixture("qc5.toml");
    let soft = bin().args(["run", qc5.to_str().unwrap()]).output().unwrap();
    assert_eq!(soft.status.code(), Some(0));
    let hard = bin().args(["run", qc5.to_str().unwrap(), "--require-pass"]).output().unwrap();
    assert_eq!(hard.status.code(), Some(2));
    assert!(!hard.stdout.is_empty(), "report is still written on check failure");

    let bad = bin().args(["gowers", "--random", "128", "-k", "5"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("gowers guard"));

    let missing = bin().args(["run", "/nonexistent/config.toml"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn out_flag_writes_the_same_bytes() {
    let dir = std::env::temp_dir().join(format!("recur-cli-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("behrend.csv");
    let status = bin().args(["behrend", "-l", "81", "--out", path.to_str().unwrap()]).status().unwrap();
    assert!(status.success());
    let stdout = bin().args(["behrend", "-l", "81"]).output().unwrap().stdout;
    assert_eq!(std::fs::read(&path).unwrap(), stdout);
    std::fs::remove_dir_all(dir).unwrap();
}

fn experiments() -> impl Strategy<Value = Experiment> {
    prop_oneof![
        (1u64..10_000).prop_map(|l| Experiment::Behrend { l }),
        (1u64..64, 1u64..200).prop_map(|(l, n_checked)| Experiment::Counterexample { l, n_checked }),
        (1usize..64, 1usize..=3, any::<bool>()).prop_map(|(n, k, cube)| Experiment::Gowers {
            signal: SignalSource::Random(n),
            k,
            method: if cube { NormMethod::CubeSum } else { NormMethod::Recursive },
        }),
        (1u64..500, prop::collection::vec(0u64..500, 0..20), 3usize..6).prop_map(|(window, members, k)| {
            Experiment::Apcount {
                set: WindowSource::Members { window, members: members.into_iter().filter(|&m| m < window).collect() },
                k,
            }
        }),
        (1u64..500, 0.0f64..=1.0).prop_map(|(window, density)| Experiment::Qc5 {
            set: WindowSource::Random { window, density },
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parse_emit_parse_is_identity(
        seed in 0u64..i64::MAX as u64,
        grid in 1u64..100_000,
        require_pass in any::<bool>(),
        experiment in experiments(),
    ) {
        let c = ExperimentConfig { version: 1, seed, grid, require_pass, experiment };
        prop_assume!(validate(&c).is_empty());
        let text = emit_config(&c).unwrap();
        let parsed = parse_config(&text).unwrap();
        prop_assert_eq!(&parsed, &c);
        prop_assert_eq!(parse_config(&emit_config(&parsed).unwrap()).unwrap(), parsed);
    }
}
