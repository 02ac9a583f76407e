//! Acceptance checks. Each test prints one `[PASS]` or `[FAIL]` line naming
//! its criterion, then asserts. Run with
//! `cargo test -p verdict --test acceptance -- --nocapture --test-threads=1`.

mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::{
    brute_force_ward_heights, solve_dual, DECADE_COUNTS, FIRST_WORD_RULING_COUNTS, FULL_RULING_COUNTS, LAW_AREA_COUNTS,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use verdict::corpus::{generate_synthetic, SynthSpec, SynthTarget};
use verdict::eval::{audit_task, expected_dummy_accuracy, run_experiment, stratified_kfold, ExperimentConfig, Task};
use verdict::features::{FeatureMode, SparseMatrix};
use verdict::labels::{bin_temporal, ward_cluster, TemporalScheme};
use verdict::masking::{anova_f_scores, RankedFeature, VariantMap};
use verdict::svm::{dual_objective, train_binary, SvmConfig};

fn report(id: &str, what: &str, ok: bool, detail: String, elapsed: Duration) {
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("[{tag}] {id} {what}: {detail} ({:.2?})", elapsed);
}

fn single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().expect("pool").install(f)
}

fn baseline_check(id: &str, what: &str, counts: &[(&str, u64)], target: f64) {
    let start = Instant::now();
    let p = expected_dummy_accuracy(counts.iter().map(|&(_, n)| n));
    let ok = (p - target).abs() <= 0.0005;
    report(
        id,
        what,
        ok,
        format!("expected accuracy {:.4}% vs {:.1}% +/- 0.05pp", 100.0 * p, 100.0 * target),
        start.elapsed(),
    );
    assert!(ok);
}

#[test]
fn c1a_baseline_law_area() {
    baseline_check("C1a", "law-area baseline", &LAW_AREA_COUNTS, 0.177);
}

#[test]
fn c1b_baseline_first_word_ruling() {
    baseline_check("C1b", "first-word ruling baseline", &FIRST_WORD_RULING_COUNTS, 0.477);
}

#[test]
fn c1c_baseline_full_ruling() {
    baseline_check("C1c", "full ruling baseline", &FULL_RULING_COUNTS, 0.406);
}

#[test]
fn c2_synthetic_headline() {
    let start = Instant::now();
    let spec = SynthSpec { docs_per_class: 400, signal_ratio: 0.3, ..SynthSpec::with_classes(SynthTarget::LawArea, 5) };
    let docs = generate_synthetic(&spec, 11).unwrap();
    let config = ExperimentConfig { task: Task::LawArea, ..ExperimentConfig::default() };
    let r = single_threaded(|| run_experiment(&docs, &config)).unwrap();
    let elapsed = start.elapsed();
    let (f1, dummy) = (r.svm.weighted_f1(), r.baseline.accuracy());
    let ok = f1 >= 0.95 && (dummy - 0.20).abs() <= 0.02 && elapsed <= Duration::from_secs(60);
    report("C2", "synthetic 5-class cv", ok, format!("SVM weighted F1 {f1:.4}, baseline accuracy {dummy:.4}"), elapsed);
    assert!(ok);
}

#[test]
fn c3_masking_efficacy() {
    let start = Instant::now();
    let leak_variants: BTreeMap<String, Vec<String>> =
        [("cassation", "casse"), ("rejet", "rejete")].iter().map(|&(w, v)| (w.into(), vec![v.into()])).collect();
    let variants: VariantMap = leak_variants.iter().map(|(w, vs)| (w.clone(), vs.iter().cloned().collect())).collect();
    let spec = SynthSpec {
        classes: vec!["cassation".into(), "rejet".into()],
        docs_per_class: 2000,
        signal_ratio: 0.0,
        leak: true,
        leak_variants,
        ..SynthSpec::default()
    };
    let docs = generate_synthetic(&spec, 2024).unwrap();
    let masked = ExperimentConfig { task: Task::RulingMultiWord, variants, ..ExperimentConfig::default() };
    let open = ExperimentConfig { masking: false, ..masked.clone() };

    let on = run_experiment(&docs, &masked).unwrap();
    let on_audit = audit_task(&docs, &masked, 20).unwrap();
    let off = run_experiment(&docs, &open).unwrap();
    let off_audit = audit_task(&docs, &open, 20).unwrap();
    let elapsed = start.elapsed();

    let sum_p2 = on.expected_dummy_accuracy;
    let (f1_on, f1_off) = (on.svm.weighted_f1(), off.svm.weighted_f1());
    let leak_ranked =
        off_audit.top_features.iter().any(|f| ["cassation", "casse", "rejet", "rejete"].contains(&f.ngram.as_str()));
    let ok = (f1_on - sum_p2).abs() <= 0.02
        && on_audit.violations.is_empty()
        && f1_off >= 0.99
        && leak_ranked
        && elapsed <= Duration::from_secs(30);
    report(
        "C3",
        "masking efficacy",
        ok,
        format!(
            "masked F1 {f1_on:.4} vs sum p^2 {sum_p2:.4}, {} violations; unmasked F1 {f1_off:.4}, leak in top 20: {leak_ranked}",
            on_audit.violations.len()
        ),
        elapsed,
    );
    assert!(ok);
}

#[test]
fn c4_svm_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst_gap, mut compared, mut disagreements) = (0.0f64, 0usize, 0usize);
    for _ in 0..200 {
        let n = rng.gen_range(2..=20);
        let d = rng.gen_range(1..=5);
        let c = [0.01, 0.1, 1.0][rng.gen_range(0..3)];
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let y: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
        let cfg = SvmConfig { c, ..SvmConfig::default() };
        let ours = train_binary(&SparseMatrix::from_dense(&rows).unwrap(), &y, &cfg).unwrap();
        let oracle = solve_dual(&rows, &y, c, true, cfg.use_bias, 1e-10);
        worst_gap =
            worst_gap.max((dual_objective(&ours.weights, &ours.alpha, &cfg) - oracle.dual_value(c, true)).abs());
        for row in &rows {
            let reference = oracle.decision(row);
            if reference.abs() > 1e-6 {
                let mine: f64 = row.iter().zip(&ours.weights).map(|(a, b)| a * b).sum::<f64>() + ours.weights[d];
                compared += 1;
                disagreements += usize::from(mine.signum() != reference.signum());
            }
        }
    }
    let two_point = train_binary(
        &SparseMatrix::from_dense(&[vec![1.0], vec![-1.0]]).unwrap(),
        &[1.0, -1.0],
        &SvmConfig { c: 0.1, use_bias: false, ..SvmConfig::default() },
    )
    .unwrap();
    let w = two_point.weights[0];
    let elapsed = start.elapsed();
    let ok =
        worst_gap <= 1e-6 && disagreements == 0 && (w - 2.0 / 7.0).abs() <= 1e-6 && elapsed <= Duration::from_secs(10);
    report(
        "C4",
        "SVM dual oracle",
        ok,
        format!("worst dual gap {worst_gap:.2e}, {disagreements}/{compared} sign disagreements, 2-point w {w:.8}"),
        elapsed,
    );
    assert!(ok);
}

#[test]
fn c5_ward_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.gen_range(2..=8);
        let d = rng.gen_range(1..=4);
        let points: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.gen_range(-10.0..10.0)).collect()).collect();
        let labels = (0..n).map(|i| format!("p{i}")).collect();
        let ours = ward_cluster(&points, labels).unwrap();
        for (m, h) in ours.merges.iter().zip(brute_force_ward_heights(&points)) {
            worst = worst.max((m.height - h).abs());
        }
    }
    let hand = ward_cluster(&[vec![0.0], vec![10.0], vec![11.0]], vec!["a".into(), "b".into(), "c".into()]).unwrap();
    let heights: Vec<f64> = hand.merges.iter().map(|m| m.height).collect();
    let hand_ok = (heights[0] - 1.0).abs() <= 1e-9 && (heights[1] - 147f64.sqrt()).abs() <= 1e-9;
    let elapsed = start.elapsed();
    let ok = worst <= 1e-9 && hand_ok && elapsed <= Duration::from_secs(5);
    report("C5", "Ward oracle", ok, format!("worst height error {worst:.2e}, hand case {heights:?}"), elapsed);
    assert!(ok);
}

#[test]
fn c6_anova() {
    let start = Instant::now();
    let x =
        SparseMatrix::from_dense(&[vec![1.0, 5.0, 1.0], vec![2.0, 5.0, 1.0], vec![3.0, 5.0, 2.0], vec![4.0, 5.0, 2.0]])
            .unwrap();
    let f = anova_f_scores(&x, &["A", "A", "B", "B"]).unwrap();
    let sentinel = serde_json::to_string(&RankedFeature { ngram: "sep".into(), f_score: f[2] }).unwrap();
    let ok = (f[0] - 8.0).abs() <= 1e-9 && f[1] == 0.0 && f[2] == f64::INFINITY && sentinel == r#"["sep","Infinity"]"#;
    report(
        "C6",
        "ANOVA F",
        ok,
        format!("hand {} constant {} separating {} -> {sentinel}", f[0], f[1], f[2]),
        start.elapsed(),
    );
    assert!(ok);
}

#[test]
fn c7_stratified_folds() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut balanced = true;
    for trial in 0..50 {
        let y: Vec<String> = (0..rng.gen_range(30..300)).map(|_| format!("c{}", rng.gen_range(0..6))).collect();
        let folds = stratified_kfold(&y, 10, trial).unwrap();
        let mut per: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (label, &f) in y.iter().zip(&folds.fold_of) {
            per.entry(label).or_insert_with(|| vec![0; 10])[f] += 1;
        }
        balanced &= per.values().all(|c| c.iter().max().unwrap() - c.iter().min().unwrap() <= 1);
    }
    let y: Vec<&str> = std::iter::repeat_n("A", 20).chain(std::iter::repeat_n("B", 10)).collect();
    let folds = stratified_kfold(&y, 10, 0).unwrap();
    let exact = (0..10).all(|f| {
        let (_, test) = folds.split(f);
        let a = test.iter().filter(|&&i| y[i] == "A").count();
        (a, test.len() - a) == (2, 1)
    });
    let small = stratified_kfold(&["A", "A", "A", "B", "B", "B", "B", "B", "B", "B", "B", "B", "B"], 10, 0).unwrap();
    let warned = small.warnings.iter().any(|w| w.contains('A'));
    let ok = balanced && exact && warned;
    report(
        "C7",
        "stratified 10-fold",
        ok,
        format!("balanced {balanced}, 20A+10B exact {exact}, small-class warning {warned}"),
        start.elapsed(),
    );
    assert!(ok);
}

#[test]
fn c8_temporal_binning() {
    let start = Instant::now();
    let total: usize = DECADE_COUNTS.iter().map(|&(_, n)| n).sum();
    let bin_counts = |scheme: &TemporalScheme| {
        let mut m: BTreeMap<String, usize> = BTreeMap::new();
        for &(decade, n) in &DECADE_COUNTS {
            *m.entry(bin_temporal(decade, scheme).label).or_default() += n;
        }
        m
    };
    let seven = bin_counts(&TemporalScheme::seven_class());
    let fourteen_scheme = TemporalScheme::fourteen_class();
    let fourteen = bin_counts(&fourteen_scheme);
    let pre = seven.get("PRE_1960").copied().unwrap_or(0);
    let conserved =
        fourteen.values().sum::<usize>() == total && fourteen.keys().all(|k| fourteen_scheme.labels().any(|l| l == k));
    let ok = pre == 201 && seven.values().sum::<usize>() == total && conserved;
    report(
        "C8",
        "temporal binning",
        ok,
        format!("PRE_1960 = {pre}, 14-class total {} of {total}", fourteen.values().sum::<usize>()),
        start.elapsed(),
    );
    assert!(ok);
}

fn verdict(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_verdict")).args(args).output().expect("run verdict")
}

fn cv_report(corpus: &Path, out: &Path, jobs: &str) -> Vec<u8> {
    let o = verdict(&[
        "cv",
        "--corpus",
        corpus.to_str().unwrap(),
        "--task",
        "ruling-multi",
        "--min-support",
        "20",
        "--seed",
        "9",
        "--jobs",
        jobs,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::read(out.join("report.json")).unwrap()
}

#[test]
fn c9_end_to_end_determinism() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let synth = dir.path().join("synth");
    let o = verdict(&[
        "synth",
        "--classes",
        "3",
        "--docs-per-class",
        "60",
        "--seed",
        "3",
        "--out",
        synth.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let corpus = synth.join("corpus.jsonl");
    let first = cv_report(&corpus, &dir.path().join("a"), "2");
    let second = cv_report(&corpus, &dir.path().join("b"), "2");
    let serial = cv_report(&corpus, &dir.path().join("c"), "1");
    let wide = cv_report(&corpus, &dir.path().join("d"), "4");
    let ok = first == second && first == serial && first == wide;
    report(
        "C9",
        "cv determinism",
        ok,
        format!("report.json identical across repeats and thread counts: {ok}"),
        start.elapsed(),
    );
    assert!(ok);
}

#[test]
fn c10_ttr_beats_baseline() {
    let start = Instant::now();
    let spec = SynthSpec {
        docs_per_class: 300,
        signal_ratio: 0.0,
        richness_regimes: true,
        doc_len: (80, 80),
        ..SynthSpec::with_classes(SynthTarget::Ruling, 4)
    };
    let docs = generate_synthetic(&spec, 10).unwrap();
    let config =
        ExperimentConfig { task: Task::RulingMultiWord, features: FeatureMode::TtrOnly, ..ExperimentConfig::default() };
    let r = run_experiment(&docs, &config).unwrap();
    let (f1, expected) = (r.svm.weighted_f1(), r.expected_dummy_accuracy);
    let ok = f1 >= expected + 0.05;
    report(
        "C10",
        "TTR-only features",
        ok,
        format!("SVM weighted F1 {f1:.4} vs expected baseline {expected:.4}"),
        start.elapsed(),
    );
    assert!(ok);
}
