use std::path::Path;
use std::process::{Command, Output};

use vdm::io::Checkpoint;

fn vdm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vdm")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn list_has_one_row_per_family() {
    let o = vdm(&["list"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 11);
    assert!(rows.contains(&"gan\t-0.693147\t(-inf, 0)\t-"));
    assert!(rows.contains(&"kl\t1.000000\t(-inf, inf)\t-"));
}

#[test]
fn curves_examples() {
    let o = vdm(&["curves", "--divergence", "gan", "--vmin", "-1", "--vmax", "1", "--points", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mid: Vec<f64> = text.lines().nth(2).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(mid[0], 0.0);
    assert!((mid[1] + 2f64.ln()).abs() < 1e-15);
    assert!((mid[2] + 2f64.ln()).abs() < 1e-15);

    let o = vdm(&["curves", "--divergence", "pearson-chi2"]);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1001);
    let neg: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert!(neg.windows(2).any(|w| w[1] > w[0]));
}

#[test]
fn saddle_demo_stays_under_the_envelope() {
    let o = vdm(&["saddle-demo", "--seed", "7", "--steps", "100"]);
    assert!(o.status.success());
    for line in stdout(&o).lines().skip(1) {
        let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(f[1] <= f[2] * (1.0 + 1e-9));
    }
}

#[test]
fn verify_saddle_passes() {
    let o = vdm(&["verify", "saddle"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("saddle: ok"));
}

#[test]
fn configuration_errors_exit_2() {
    for args in [
        vec!["gmm", "--divergence", "bogus"],
        vec!["gmm", "--mixture", "/no/such/file.json"],
        vec!["gmm", "--batch", "0", "--steps", "5"],
        vec!["curves", "--vmin", "2", "--vmax", "1"],
        vec!["verify", "nonsense"],
        vec!["frobnicate"],
        vec!["gmm", "--divergence", "alpha", "--alpha", "1"],
    ] {
        let o = vdm(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn divergence_guard_exits_nonzero() {
    let o = vdm(&["gmm", "--divergence", "pearson-chi2", "--eta", "10000", "--steps", "200"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn mixture_file_and_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let mix = dir.path().join("m.json");
    std::fs::write(&mix, r#"{"weights":[1.0],"means":[2.0],"variances":[2.25]}"#).unwrap();
    let ck = dir.path().join("ck.json");
    let trace = dir.path().join("trace.csv");
    let o = vdm(&[
        "gmm",
        "--divergence",
        "kl",
        "--steps",
        "20",
        "--mixture",
        mix.to_str().unwrap(),
        "--out",
        trace.to_str().unwrap(),
        "--checkpoint",
        ck.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("D_f(P||Q)"));
    let text = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(text.lines().next().unwrap(), "step,F,mu,sigma,grad_w_norm,grad_t_norm,tpr,tnr");
    assert_eq!(text.lines().count(), 21);
    let (net, gen) = Checkpoint::load(Path::new(&ck)).unwrap().models().unwrap();
    assert_eq!(net.dims(), &[1, 64, 64, 1]);
    assert!(gen.sigma() > 0.0);
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, args: &[&str]| {
        let path = dir.path().join(name);
        let mut all: Vec<&str> = args.to_vec();
        all.extend(["--out", path.to_str().unwrap()]);
        assert!(vdm(&all).status.success());
        std::fs::read(path).unwrap()
    };
    let gmm = ["gmm", "--divergence", "jensen-shannon", "--seed", "5", "--steps", "50"];
    assert_eq!(run("a.csv", &gmm), run("b.csv", &gmm));
    let other = ["gmm", "--divergence", "jensen-shannon", "--seed", "6", "--steps", "50"];
    assert_ne!(run("a.csv", &gmm), run("c.csv", &other));
    let saddle = ["saddle-demo", "--seed", "3", "--dim-theta", "4", "--dim-omega", "1"];
    assert_eq!(run("d.csv", &saddle), run("e.csv", &saddle));
    let matrix = ["gmm-matrix", "--seed", "2", "--steps", "20", "--refit-steps", "20", "--batch", "64"];
    let m = run("f.csv", &matrix);
    assert_eq!(m, run("g.csv", &matrix));
    let text = String::from_utf8(m).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "train\\test,kl,reverse-kl,jensen-shannon,jeffrey,pearson-chi2"
    );
    assert_eq!(text.lines().count(), 6);
    assert!(text.lines().skip(1).all(|l| l.split(',').count() == 6));
}
