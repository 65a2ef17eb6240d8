use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use se2n_core::lift::{lift, project_max, Calibration};
use se2n_core::pnm::{read_image, read_mask};
use se2n_core::synth::psnr;
use se2n_core::DiffusionParams;

fn se2n(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_se2n")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

/// Writes a 32x32 synthetic original, mask and corrupted image.
fn synth(dir: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let o = se2n(&[
        "synth",
        "--size",
        "32",
        "--seed",
        "7",
        "--output",
        &p(dir, "orig.pgm"),
        "--mask",
        &p(dir, "mask.pgm"),
        "--corrupted",
        &p(dir, "bad.pgm"),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    (dir.join("orig.pgm"), dir.join("mask.pgm"), dir.join("bad.pgm"))
}

#[test]
fn zero_time_plain_run_is_lift_then_project() {
    let dir = tempfile::tempdir().unwrap();
    let (_, mask, bad) = synth(dir.path());
    let out = p(dir.path(), "out.pgm");
    let o = se2n(&[
        "inpaint",
        "--input",
        bad.to_str().unwrap(),
        "--mask",
        mask.to_str().unwrap(),
        "--output",
        &out,
        "--mode",
        "plain",
        "--epsilon",
        "0",
        "--time",
        "0",
        "--steps",
        "1",
        "--angles",
        "8",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let img = read_image(&bad, Some(read_mask(&mask).unwrap())).unwrap();
    let params = DiffusionParams::new(32, 8, 0.3, 0.0);
    let expected = project_max(&lift(&img, &params).unwrap(), Calibration::from_image(&img).as_ref()).unwrap();
    let written = read_image(&out, None).unwrap();
    assert_eq!(written.to_raw(), expected.to_raw());
}

#[test]
fn inpainting_improves_psnr_and_logs_every_interval() {
    let dir = tempfile::tempdir().unwrap();
    let (orig, mask, bad) = synth(dir.path());
    let out = p(dir.path(), "out.pgm");
    let csv = p(dir.path(), "diag.csv");
    let o = se2n(&[
        "inpaint",
        "--preset",
        "fig3-down",
        "--angles",
        "12",
        "--steps",
        "40",
        "--input",
        bad.to_str().unwrap(),
        "--mask",
        mask.to_str().unwrap(),
        "--output",
        &out,
        "--diagnostics",
        &csv,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let original = read_image(&orig, None).unwrap();
    let before = psnr(&read_image(&bad, None).unwrap(), &original).unwrap();
    let after = psnr(&read_image(&out, None).unwrap(), &original).unwrap();
    assert!(after > before, "{after} <= {before}");
    let log = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(log.lines().next(), Some("i,good,mass,max,mass_drift,imag_residual,wall_seconds"));
    assert_eq!(log.lines().count(), 41);
}

fn untimed(csv: &str) -> String {
    csv.lines().map(|l| l.rsplit_once(',').unwrap().0).collect::<Vec<_>>().join("\n")
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let (_, mask, bad) = synth(dir.path());
    let mut results = Vec::new();
    for threads in ["1", "8"] {
        let out = p(dir.path(), &format!("out{threads}.pgm"));
        let csv = p(dir.path(), &format!("diag{threads}.csv"));
        let o = se2n(&[
            "inpaint",
            "--angles",
            "12",
            "--steps",
            "20",
            "--threads",
            threads,
            "--input",
            bad.to_str().unwrap(),
            "--mask",
            mask.to_str().unwrap(),
            "--output",
            &out,
            "--diagnostics",
            &csv,
        ]);
        assert!(o.status.success());
        results.push((std::fs::read(&out).unwrap(), untimed(&std::fs::read_to_string(&csv).unwrap())));
    }
    assert_eq!(results[0], results[1]);
}

#[test]
fn preset_and_dump_config_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let dump = stdout(&se2n(&["inpaint", "--preset", "fig3-down", "--tau", "0.0125", "--dump-config"]));
    for line in
        ["alpha=0.3", "time=4", "steps=160", "epsilon=0.5", "angles=30", "size=256", "mode=dynamic", "tau=0.0125"]
    {
        assert!(dump.lines().any(|l| l == line), "missing {line} in\n{dump}");
    }
    let cfg = p(dir.path(), "run.cfg");
    std::fs::write(&cfg, &dump).unwrap();
    let again = stdout(&se2n(&["inpaint", "--config", &cfg, "--dump-config"]));
    assert_eq!(again, dump);
    // flags override the file
    let over = stdout(&se2n(&["inpaint", "--config", &cfg, "--alpha", "0.5", "--dump-config"]));
    assert!(over.lines().any(|l| l == "alpha=0.5"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (_, _, bad) = synth(dir.path());
    let out = p(dir.path(), "x.pgm");
    let missing = se2n(&["inpaint", "--input", &p(dir.path(), "absent.pgm"), "--output", &out]);
    assert_eq!(missing.status.code(), Some(2));
    let no_config = se2n(&["inpaint", "--config", &p(dir.path(), "absent.cfg"), "--output", &out]);
    assert_eq!(no_config.status.code(), Some(2));
    let bad_eps = se2n(&["inpaint", "--input", bad.to_str().unwrap(), "--output", &out, "--epsilon", "2"]);
    assert_eq!(bad_eps.status.code(), Some(3));
    let bad_suite = se2n(&["verify", "--suite", "nonsense"]);
    assert_eq!(bad_suite.status.code(), Some(3));
}

#[test]
fn verify_filters_suites_and_reports_status() {
    let o = se2n(&["verify", "--suite", "decoupling"]);
    let table = stdout(&o);
    assert_eq!(table.lines().count(), 1);
    assert!(table.starts_with("PASS  decoupling"));
    assert_eq!(o.status.code(), Some(0));

    let o = se2n(&["verify", "--suite", "orbit,restoration,cn-order,angular-limit"]);
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("PASS")).count(), 4);
    assert!(o.status.success());

    // the exit code follows the table
    let o = se2n(&["verify", "--suite", "mass,inpaint"]);
    let any_fail = stdout(&o).lines().any(|l| l.starts_with("FAIL"));
    assert_eq!(o.status.code(), Some(if any_fail { 1 } else { 0 }));
}

#[test]
fn kernel_identity_sweep_over_n() {
    let o = se2n(&["verify", "--suite", "kernel-identity", "--N", "3,4"]);
    let table = stdout(&o);
    assert!(table.contains("N [3, 4]"), "{table}");
    assert!(o.status.success());
}

fn kernel_gap(extra: &[&str]) -> f64 {
    let mut args = vec!["kernel", "--angles", "4", "--grid", "9"];
    args.extend_from_slice(extra);
    let o = se2n(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = stdout(&o);
    assert!(csv.starts_with("x,y,r,value,imag_residual,direct_value,direct_imag_residual,difference\n"));
    assert_eq!(csv.lines().count(), 1 + 81 * 4);
    csv.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap().abs()).fold(0.0, f64::max)
}

#[test]
fn kernel_tables() {
    assert!(kernel_gap(&["--beta", "1", "--time", "0.5"]) <= 1e-6);
    assert!(kernel_gap(&["--beta", "1", "--time", "0", "--n-lambda", "40", "--n-nu", "16"]) <= 1e-9);
}

#[test]
fn lift_and_project_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let (_, mask, bad) = synth(dir.path());
    let stack = p(dir.path(), "s.se2n");
    let o = se2n(&[
        "lift",
        "--input",
        bad.to_str().unwrap(),
        "--mask",
        mask.to_str().unwrap(),
        "--angles",
        "6",
        "--output",
        &stack,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let bytes = std::fs::read(&stack).unwrap();
    assert_eq!(&bytes[..4], b"SE2N");
    assert_eq!(bytes.len(), 16 + 32 * 32 * 6 * 8);
    let img = p(dir.path(), "proj.pgm");
    assert!(se2n(&["project", "--input", &stack, "--output", &img]).status.success());
    let img = read_image(&img, None).unwrap();
    let lifted = se2n_core::stackio::read_stack(&stack).unwrap();
    assert_eq!(img.to_raw(), project_max(&lifted, None).unwrap().to_raw());
}
