use std::fs;
use std::process::Command;

fn mlse(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_mlse")).args(args).output().unwrap()
}

#[test]
fn ber_writes_csv_and_plot_script() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ber.csv");
    let o = mlse(&[
        "ber", "--variant", "l2s", "--symbols", "5000", "--sigma", "0.3", "--sigma", "0.5", "--seed", "4",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "variant,num_states,alpha,O,R,N,sigma,seed,symbols,bit_errors,bits,ber,symbol_errors"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("l2s,4,0.55,8,16,32,0.3,4,5000,"));
    assert!(fs::read_to_string(dir.path().join("ber.csv.plot.py")).unwrap().contains("matplotlib"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("o.csv");
    fs::write(&cfg, "# small run\nvariant = 1s\nframe_symbols = 2000\nnoise_sigmas = 0.0\nalpha = 0.4\n").unwrap();
    let o = mlse(&["ber", "--config", cfg.to_str().unwrap(), "--alpha", "0.6", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let csv = fs::read_to_string(&out).unwrap();
    let row = csv.lines().nth(1).unwrap();
    assert!(row.starts_with("1s,4,0.6,"), "{row}");
    // alpha mismatched to the channel still decodes a noiseless frame here
    assert!(row.contains(",2000,"));
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, workers: &str| {
        let p = dir.path().join(name);
        let o = mlse(&[
            "ber", "--workers", workers, "--symbols", "20000", "--sigma", "0.4", "--seed", "9", "--out",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        fs::read(p).unwrap()
    };
    assert_eq!(run("a.csv", "1"), run("b.csv", "3"));
}

#[test]
fn equiv_reports_mismatches() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eq.csv");
    let o = mlse(&[
        "equiv", "--variant", "1s-simplified", "--states", "4", "--reference", "1s", "--symbols", "20000",
        "--sigma", "0.5", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("0 mismatches over 20000 symbols"), "{stdout}");
    assert!(dir.path().join("eq.csv.ties.csv").exists());
}

#[test]
fn complexity_table() {
    let o = mlse(&["complexity", "--n", "32", "--variant", "l2s", "--variant", "l2s-simplified", "--instrument"]);
    assert!(o.status.success());
    let s = String::from_utf8_lossy(&o.stdout);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines[0], "variant,N,var_mult,const_mult,adders,comparators,latency");
    assert_eq!(lines[1], "l2s,32,512,1,2512,1503,7");
    assert_eq!(lines[2], "l2s/instrumented,32,512,1,2512,1503,7");
    assert_eq!(lines[3], "l2s-simplified,32,33,52,935,127,7");
    assert_eq!(lines[4], "l2s-simplified/instrumented,32,33,52,935,127,7");
}

#[test]
fn overlap_sweep_emits_mismatch_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sw.csv");
    let o = mlse(&[
        "sweep", "--param", "overlap", "--values", "0,4,8", "--variant", "1s", "--symbols", "20000", "--sigma",
        "0.45", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let m = fs::read_to_string(dir.path().join("sw.csv.mismatch.csv")).unwrap();
    assert_eq!(m.lines().next().unwrap(), "O,symbols,mismatches,mismatch_rate");
    assert_eq!(m.lines().count(), 4);
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 4);
}

#[test]
fn invalid_input_exits_nonzero_with_field_name() {
    for (args, field) in [
        (vec!["ber", "--states", "5"], "num_states"),
        (vec!["ber", "--sigma", "-1"], "noise_sigmas"),
        (vec!["ber", "--data-len", "0"], "data_len"),
        (vec!["complexity", "--n", "12", "--variant", "l2s"], "12"),
    ] {
        let o = mlse(&args);
        assert!(!o.status.success(), "{args:?}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert_eq!(err.lines().count(), 1, "{err}");
        assert!(err.contains(field), "{err}");
    }
}
