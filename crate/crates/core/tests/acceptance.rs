//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line to stderr
//! (written directly, so it shows up even when test output is captured).
//! Oracles here are computed from first principles, not through the
//! library's own helpers.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tvreview::classify::{
    lr_gradient, lr_objective, nb_log_odds, primal_objective, train_lr_traced, train_nb, train_svm, LrParams,
    SvmParams,
};
use tvreview::evaluate::{
    cross_series_experiment, feature_size_sweep, generate_synthetic, ExperimentConfig, Pipeline, SyntheticSpec,
};
use tvreview::feature_select::{argsort_desc, chi_square, drc, ChiSquareMode, ContingencyTable};
use tvreview::preprocess::{
    BinaryVector, DictionarySegmenter, KnowledgeBase, PersonEntry, Preprocessor, StopList, BASIC_CHINESE,
    FORUM_WORDS,
};
use tvreview::topic_model::{fit_lda_checked, LdaConfig};
use tvreview::Category;

fn verdict(id: u32, name: &str, ok: bool, detail: &str) {
    let status = if ok { "PASS" } else { "FAIL" };
    let line = format!("{status} criterion {id:>2} {name}: {detail}\n");
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(ok, "criterion {id} ({name}) failed: {detail}");
}

fn within(elapsed: Duration, limit_secs: f64) -> bool {
    elapsed.as_secs_f64() < limit_secs
}

// ---------------------------------------------------------------- 1

/// Pearson's statistic summed over the four cells, each `(O - E)^2 / E`
/// with `E = row * col / N`, evaluated from exact integer numerators.
fn pearson_2x2(t: &ContingencyTable) -> f64 {
    let cells = [[t.a, t.b], [t.c, t.d]];
    let rows = [t.a + t.b, t.c + t.d];
    let cols = [t.a + t.c, t.b + t.d];
    let n = (t.a + t.b + t.c + t.d) as i128;
    let mut total = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let expected_num = rows[i] as i128 * cols[j] as i128;
            // (O - E) = (O N - r c) / N, so (O - E)^2 / E = (O N - r c)^2 / (N r c)
            let diff = cells[i][j] as i128 * n - expected_num;
            total += (diff as f64) * (diff as f64) / (n as f64 * expected_num as f64);
        }
    }
    total
}

#[test]
fn criterion_01_chi_square_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    let mut compared = 0;
    let mut bad_degenerate = 0;
    let mut drawn = 0;
    while compared < 1000 {
        // mostly large counts, some small ones to hit near-degenerate tables
        let cap = if drawn % 5 == 0 { 12 } else { 1_000_000 };
        drawn += 1;
        let t = ContingencyTable::new(
            rng.gen_range(0..=cap),
            rng.gen_range(0..=cap),
            rng.gen_range(0..=cap),
            rng.gen_range(0..=cap),
        );
        let got = chi_square(&t, ChiSquareMode::Standard).value;
        let margins = [t.a + t.b, t.c + t.d, t.a + t.c, t.b + t.d];
        if margins.contains(&0) {
            bad_degenerate += (got != 0.0) as usize;
            continue;
        }
        let want = pearson_2x2(&t);
        let rel = if want == 0.0 { got.abs() } else { (got - want).abs() / want };
        worst = worst.max(rel);
        compared += 1;
    }
    let mut independence_nonzero = 0;
    for _ in 0..200 {
        let (x, y, u, v) = (
            rng.gen_range(1..=1000u64),
            rng.gen_range(1..=1000u64),
            rng.gen_range(1..=1000u64),
            rng.gen_range(1..=1000u64),
        );
        let t = ContingencyTable::new(x * u, x * v, y * u, y * v);
        independence_nonzero += (chi_square(&t, ChiSquareMode::Standard).value != 0.0) as usize;
    }
    let elapsed = start.elapsed();
    let ok = worst <= 1e-9 && independence_nonzero == 0 && bad_degenerate == 0 && within(elapsed, 1.0);
    verdict(
        1,
        "chi-square matches a generic 2x2 computation",
        ok,
        &format!(
            "{compared} tables, max rel err {worst:.2e}, independence nonzero {independence_nonzero}, \
             degenerate nonzero {bad_degenerate}, {:.3}s",
            elapsed.as_secs_f64()
        ),
    );
}

// ---------------------------------------------------------------- 2

#[test]
fn criterion_02_drc_rank_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut mismatches = 0;
    let mut ties_seen = 0;
    for _ in 0..500 {
        let docs = rng.gen_range(50..=2000u64);
        let relevant = rng.gen_range(1..docs);
        let words = rng.gen_range(2..=80);
        // small ranges sometimes, so equal keys actually occur
        let narrow = rng.gen_bool(0.5);
        let tables: Vec<ContingencyTable> = (0..words)
            .map(|_| {
                let a_max = if narrow { relevant.min(4) } else { relevant };
                let b_max = if narrow { (docs - relevant).min(6) } else { docs - relevant };
                let a = rng.gen_range(0..=a_max);
                let b = rng.gen_range(0..=b_max);
                ContingencyTable::new(a, b, relevant - a, docs - relevant - b)
            })
            .collect();
        let scores: Vec<f64> = tables.iter().map(drc).collect();
        let got = argsort_desc(&scores);

        // exact order of A^2 / sqrt(A+B): compare A^4 (A'+B') with A'^4 (A+B)
        let key = |t: &ContingencyTable| {
            let df = t.a + t.b;
            if df == 0 {
                (0u128, 1u128)
            } else {
                ((t.a as u128).pow(4), df as u128)
            }
        };
        let mut want: Vec<usize> = (0..tables.len()).collect();
        want.sort_by(|&i, &j| {
            let (pi, qi) = key(&tables[i]);
            let (pj, qj) = key(&tables[j]);
            (pj * qi).cmp(&(pi * qj)).then(i.cmp(&j))
        });
        for w in want.windows(2) {
            let (pi, qi) = key(&tables[w[0]]);
            let (pj, qj) = key(&tables[w[1]]);
            ties_seen += (pi * qj == pj * qi) as usize;
        }
        mismatches += (got != want) as usize;
    }
    let elapsed = start.elapsed();
    let ok = mismatches == 0 && within(elapsed, 1.0);
    verdict(
        2,
        "DRC ranks like A^2/sqrt(A+B)",
        ok,
        &format!(
            "500 word sets, {mismatches} order mismatches, {ties_seen} tied neighbours, {:.3}s",
            elapsed.as_secs_f64()
        ),
    );
}

// ---------------------------------------------------------------- 3

fn bv(ix: &[usize]) -> BinaryVector {
    BinaryVector::from_indices(ix.iter().copied())
}

#[test]
fn criterion_03_naive_bayes_exactness() {
    // hand-count example
    let hand_rows = [bv(&[0]), bv(&[0, 1]), bv(&[1]), bv(&[])];
    let hand = train_nb(&hand_rows, 2, &[true, true, false, false], 1.0).unwrap();
    let hand_ok = hand.params().cond_pos[0] == 0.75 && hand.params().cond_neg[0] == 0.25;

    // a 4-feature model fitted on random data, checked on every input
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let dim = 4;
    let n = 23;
    let rows: Vec<Vec<bool>> = (0..n).map(|_| (0..dim).map(|_| rng.gen_bool(0.4)).collect()).collect();
    let labels: Vec<bool> = (0..n).map(|k| k % 3 == 0 || rng.gen_bool(0.2)).collect();
    let sparse: Vec<BinaryVector> = rows
        .iter()
        .map(|r| BinaryVector::from_indices((0..dim).filter(|&j| r[j])))
        .collect();
    let l = 0.5;
    let model = train_nb(&sparse, dim, &labels, l).unwrap();

    let n_pos = labels.iter().filter(|y| **y).count();
    let n_neg = n - n_pos;
    let cond = |j: usize, side: bool| {
        let total = if side { n_pos } else { n_neg };
        let hits = rows.iter().zip(&labels).filter(|(r, y)| **y == side && r[j]).count();
        (hits as f64 + l) / (total as f64 + 2.0 * l)
    };
    let mut worst = 0.0f64;
    for mask in 0..(1usize << dim) {
        let x: Vec<bool> = (0..dim).map(|j| mask >> j & 1 == 1).collect();
        let joint = |side: bool| {
            let prior = if side { n_pos } else { n_neg } as f64 / n as f64;
            (0..dim).fold(prior, |p, j| p * if x[j] { cond(j, side) } else { 1.0 - cond(j, side) })
        };
        let want = joint(true).ln() - joint(false).ln();
        let got = nb_log_odds(&model, &BinaryVector::from_indices((0..dim).filter(|&j| x[j]))).unwrap();
        worst = worst.max((got - want).abs());
    }
    let ok = hand_ok && worst <= 1e-12;
    verdict(
        3,
        "naive Bayes log-odds equal Bayes-rule enumeration",
        ok,
        &format!(
            "hand example {:.2}/{:.2}, 16 inputs max abs err {worst:.2e}",
            hand.params().cond_pos[0],
            hand.params().cond_neg[0]
        ),
    );
}

// ---------------------------------------------------------------- 4

#[test]
fn criterion_04_logistic_gradient_and_ascent() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let (n, d, h, lambda) = (30, 5, 1e-5, 0.1);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let labels: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        let w: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = rng.gen_range(-1.0..1.0);
        let (g, gb) = lr_gradient(&w, b, &rows, &labels, lambda);
        let f = |w: &[f64], b: f64| lr_objective(w, b, &rows, &labels, lambda);
        let rel = |analytic: f64, numeric: f64| {
            (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
        };
        for j in 0..d {
            let (mut up, mut down) = (w.clone(), w.clone());
            up[j] += h;
            down[j] -= h;
            worst = worst.max(rel(g[j], (f(&up, b) - f(&down, b)) / (2.0 * h)));
        }
        worst = worst.max(rel(gb, (f(&w, b + h) - f(&w, b - h)) / (2.0 * h)));
    }

    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
    let labels: Vec<bool> = rows.iter().map(|r| r[0] - r[1] + rng.gen_range(-1.0..1.0) > 0.0).collect();
    let params = LrParams {
        eta: 1e-3,
        lambda,
        epochs: 200,
    };
    let (_, trace) = train_lr_traced(&rows, d, &labels, params).unwrap();
    let drops = trace.windows(2).filter(|p| p[1] < p[0]).count();
    let ok = worst <= 1e-5 && drops == 0 && trace.len() == 201;
    verdict(
        4,
        "logistic regression gradient and monotone ascent",
        ok,
        &format!("max rel err {worst:.2e}, {drops} decreasing steps of 200"),
    );
}

// ---------------------------------------------------------------- 5

#[test]
fn criterion_05_svm_optimization() {
    let start = Instant::now();
    let two = vec![vec![1.0], vec![-1.0]];
    let fit = train_svm(
        &two,
        1,
        &[true, false],
        SvmParams {
            c: 100.0,
            epochs: 2000,
            seed: 42,
        },
    )
    .unwrap();
    let w = fit.weights[0];
    let two_ok = (0.9..=1.1).contains(&w.abs()) && fit.predict(&two[0]).unwrap() && !fit.predict(&two[1]).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let (n, d, c) = (40, 10, 10.0);
    let mut errors = 0;
    let mut worse_than_zero = 0;
    for set in 0..20 {
        let mut dir: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        dir.iter_mut().for_each(|x| *x /= norm);
        let offset = rng.gen_range(-0.5..0.5);
        let mut rows = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        while rows.len() < n {
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let s = x.iter().zip(&dir).map(|(a, b)| a * b).sum::<f64>() + offset;
            if s.abs() >= 0.5 {
                labels.push(s > 0.0);
                rows.push(x);
            }
        }
        if labels.iter().all(|y| *y) || labels.iter().all(|y| !*y) {
            labels[0] = !labels[0];
            rows[0] = rows[0].iter().map(|v| -v).collect();
        }
        let m = train_svm(
            &rows,
            d,
            &labels,
            SvmParams {
                c,
                epochs: 300,
                seed: set,
            },
        )
        .unwrap();
        errors += rows
            .iter()
            .zip(&labels)
            .filter(|(x, y)| m.predict(*x).unwrap() != **y)
            .count();
        let obj = primal_objective(&m.weights, m.bias, &rows, &labels, c);
        let zero = primal_objective(&vec![0.0; d], 0.0, &rows, &labels, c);
        worse_than_zero += (obj > zero) as usize;
    }
    let elapsed = start.elapsed();
    let ok = two_ok && errors == 0 && worse_than_zero == 0 && within(elapsed, 10.0);
    verdict(
        5,
        "SVM two-point fixture and separable sets",
        ok,
        &format!(
            "two-point w = {w:.4}, 20 sets: {errors} training errors, {worse_than_zero} above zero model, {:.2}s",
            elapsed.as_secs_f64()
        ),
    );
}

// ---------------------------------------------------------------- 6

#[test]
fn criterion_06_lda_recovery() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let words_per_topic = 50;
    // uneven but known word weights inside each topic
    let truth: Vec<Vec<f64>> = (0..2)
        .map(|_| {
            let raw: Vec<f64> = (0..words_per_topic).map(|_| rng.gen_range(0.2..1.0)).collect();
            let s: f64 = raw.iter().sum();
            raw.into_iter().map(|x| x / s).collect()
        })
        .collect();
    let word = |topic: usize, i: usize| format!("t{topic}w{i:02}");
    let draw = |rng: &mut ChaCha8Rng, weights: &[f64]| {
        let mut u = rng.gen_range(0.0..1.0);
        for (i, w) in weights.iter().enumerate() {
            if u < *w {
                return i;
            }
            u -= w;
        }
        weights.len() - 1
    };
    let docs: Vec<(String, Vec<String>)> = (0..200)
        .map(|k| {
            let share: f64 = rng.gen_range(0.0..1.0);
            let tokens = (0..50)
                .map(|_| {
                    let topic = if rng.gen_bool(share) { 0 } else { 1 };
                    word(topic, draw(&mut rng, &truth[topic]))
                })
                .collect();
            (format!("d{k:03}"), tokens)
        })
        .collect();

    let cfg = LdaConfig {
        iterations: 1000,
        ..LdaConfig::new(2, 42)
    };
    let mut sweeps = 0;
    let mut broken = 0;
    let model = fit_lda_checked(&docs, &cfg, |state| {
        sweeps += 1;
        broken += (!state.counts_consistent() || state.token_count() != 200 * 50) as usize;
    })
    .unwrap();

    let dense_truth: Vec<Vec<f64>> = (0..2)
        .map(|t| {
            model
                .vocab
                .terms()
                .iter()
                .map(|term| {
                    (0..words_per_topic)
                        .find(|&i| *term == word(t, i))
                        .map_or(0.0, |i| truth[t][i])
                })
                .collect()
        })
        .collect();
    let cosine = |x: &[f64], y: &[f64]| {
        let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
        let nx = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        let ny = y.iter().map(|a| a * a).sum::<f64>().sqrt();
        dot / (nx * ny)
    };
    // greedy matching: best pair first, then the remaining pair
    let sims: Vec<Vec<f64>> = (0..2)
        .map(|k| (0..2).map(|t| cosine(&model.topic_word[k], &dense_truth[t])).collect())
        .collect();
    let (mut bk, mut bt) = (0, 0);
    for k in 0..2 {
        for t in 0..2 {
            if sims[k][t] > sims[bk][bt] {
                (bk, bt) = (k, t);
            }
        }
    }
    let matched = [sims[bk][bt], sims[1 - bk][1 - bt]];
    let elapsed = start.elapsed();
    let ok = matched.iter().all(|s| *s >= 0.8) && broken == 0 && sweeps == 1000 && within(elapsed, 30.0);
    verdict(
        6,
        "LDA recovers two planted topics",
        ok,
        &format!(
            "matched cosines {:.4} / {:.4}, {broken} of {sweeps} sweeps broke conservation, {:.2}s",
            matched[0],
            matched[1],
            elapsed.as_secs_f64()
        ),
    );
}

// ---------------------------------------------------------------- 7

#[test]
fn criterion_07_surrogate_ablation() {
    let start = Instant::now();
    let pipeline = Pipeline::whitespace();
    let cfg = ExperimentConfig::default();

    let (corpus, kbs) = generate_synthetic(&SyntheticSpec::standard(3, 200, 42)).unwrap();
    let table = cross_series_experiment(&corpus, &kbs, &pipeline, &cfg).unwrap();
    let gains: Vec<f64> = Category::ALL[..5]
        .iter()
        .map(|&c| table.mean_accuracy(c, true) - table.mean_accuracy(c, false))
        .collect();

    let (plain, plain_kbs) =
        generate_synthetic(&SyntheticSpec::standard(3, 200, 42).with_mention_rate(0.0)).unwrap();
    let flat = cross_series_experiment(&plain, &plain_kbs, &pipeline, &cfg).unwrap();
    let mut by_key: BTreeMap<(usize, String, String), [Option<f64>; 2]> = BTreeMap::new();
    for m in &flat.per_method {
        let slot = by_key
            .entry((m.category.index(), m.rotation.clone(), m.method.to_string()))
            .or_default();
        slot[m.surrogate as usize] = Some(m.accuracy);
    }
    let differing = by_key
        .values()
        .filter(|[off, on]| off.is_none() || on.is_none() || off.unwrap().to_bits() != on.unwrap().to_bits())
        .count();
    let identical = differing == 0 && by_key.len() == Category::COUNT * 3 * 3;

    let elapsed = start.elapsed();
    let ok = gains.iter().all(|g| *g >= 0.02) && identical && within(elapsed, 120.0);
    let shown: Vec<String> = gains.iter().map(|g| format!("{g:+.4}")).collect();
    verdict(
        7,
        "surrogate tags help name-heavy categories",
        ok,
        &format!(
            "gains [{}], mention rate 0: {differing} of {} cells differ, {:.1}s",
            shown.join(", "),
            by_key.len(),
            elapsed.as_secs_f64()
        ),
    );
}

// ---------------------------------------------------------------- 8

#[test]
fn criterion_08_feature_size_sweep() {
    let pipeline = Pipeline::whitespace();
    let cfg = ExperimentConfig::default();
    let sizes = cfg.sizes.clone();

    let (corpus, kbs) = generate_synthetic(&SyntheticSpec::standard(3, 200, 42)).unwrap();
    let grid = feature_size_sweep(&corpus, &kbs, &pipeline, &cfg).unwrap();
    let csv = grid.to_csv();
    let complete = csv.lines().count() == 1 + Category::COUNT * sizes.len()
        && Category::ALL
            .iter()
            .all(|&c| sizes.iter().all(|&s| grid.cell(c, s).is_some()));

    // 50 informative words: 6 per category, plus one more for the first two
    let mut spec = SyntheticSpec::standard(3, 300, 42).with_mention_rate(0.0);
    spec.planted_rate = 0.3;
    for c in 0..2 {
        let extra = spec.noise.pop().unwrap();
        spec.planted[c].push(extra);
    }
    let informative: usize = spec.planted.iter().map(Vec::len).sum();
    let (planted, planted_kbs) = generate_synthetic(&spec).unwrap();
    let sweep = feature_size_sweep(&planted, &planted_kbs, &pipeline, &cfg).unwrap();
    let (small, large) = (sizes[0], *sizes.last().unwrap());
    let gaps: Vec<f64> = Category::ALL
        .iter()
        .map(|&c| (sweep.cell(c, small).unwrap().test_acc - sweep.cell(c, large).unwrap().test_acc).abs())
        .collect();
    let worst = gaps.iter().cloned().fold(0.0, f64::max);
    let ok = complete && informative == 50 && worst <= 0.02;
    verdict(
        8,
        "feature-size sweep grid and planted plateau",
        ok,
        &format!(
            "grid complete: {complete}, {informative} informative words, max |acc@{small} - acc@{large}| = {worst:.4} \
             (V = {})",
            sweep.vocabulary_size
        ),
    );
}

// ---------------------------------------------------------------- 9

fn run_cli(args: &[&str], out: &Path) {
    let status = Command::new(env!("CARGO_BIN_EXE_tvreview"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .args(["--seed", "7", "--quiet"])
        .status()
        .expect("spawn tvreview");
    assert!(status.success(), "tvreview {args:?} exited with {status}");
}

fn files_under(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn comparable(path: &Path, bytes: Vec<u8>) -> Vec<u8> {
    if path.file_name().is_some_and(|n| n == "run_manifest.json") {
        let mut v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        v.as_object_mut().unwrap().remove("timestamp");
        return serde_json::to_vec(&v).unwrap();
    }
    bytes
}

#[test]
fn criterion_09_cli_determinism() {
    let start = Instant::now();
    let work = tempfile::tempdir().unwrap();
    let root = work.path();
    let p = |s: &str| root.join(s).display().to_string();

    // the first synth run supplies the inputs of every later command
    let synth = ["synth", "--series", "3", "--reviews", "40"];
    run_cli(&synth, &root.join("a/synth"));
    run_cli(&synth, &root.join("b/synth"));
    let corpus = p("a/synth/corpus.jsonl");
    let kb_dir = p("a/synth/kb");
    run_cli(&["preprocess", "--corpus", &corpus, "--kb-dir", &kb_dir], &root.join("shared/pre"));
    run_cli(&["train", "--tokens", &p("shared/pre/tokens.jsonl"), "--method", "lr"], &root.join("shared/train"));
    let tokens = p("shared/pre/tokens.jsonl");
    let model = p("shared/train/model");

    let commands: Vec<(&str, Vec<&str>)> = vec![
        ("ingest", vec!["ingest", "--corpus", &corpus]),
        ("preprocess", vec!["preprocess", "--corpus", &corpus, "--kb-dir", &kb_dir]),
        (
            "preprocess-ws",
            vec!["preprocess", "--corpus", &corpus, "--kb-dir", &kb_dir, "--segmenter", "whitespace"],
        ),
        ("lda", vec!["lda", "--tokens", &tokens, "--topics", "4", "--iterations", "40"]),
        ("train-nb", vec!["train", "--tokens", &tokens, "--method", "nb"]),
        ("train-lr", vec!["train", "--tokens", &tokens, "--method", "lr"]),
        ("train-svm", vec!["train", "--tokens", &tokens, "--method", "svm"]),
        ("evaluate", vec!["evaluate", "--model", &model, "--tokens", &tokens]),
        ("sweep", vec!["sweep", "--corpus", &corpus, "--kb-dir", &kb_dir, "--sizes", "20,200"]),
        ("cross-series", vec!["cross-series", "--corpus", &corpus, "--kb-dir", &kb_dir]),
    ];
    for (name, args) in &commands {
        run_cli(args, &root.join("a").join(name));
        run_cli(args, &root.join("b").join(name));
    }

    let mut differing = Vec::new();
    let mut compared = 0;
    for name in std::iter::once("synth").chain(commands.iter().map(|(n, _)| *n)) {
        let (left, right) = (root.join("a").join(name), root.join("b").join(name));
        let files = files_under(&left);
        if files.is_empty() || files != files_under(&right) {
            differing.push(format!("{name}: file sets differ"));
            continue;
        }
        for f in files {
            let a = comparable(&f, std::fs::read(left.join(&f)).unwrap());
            let b = comparable(&f, std::fs::read(right.join(&f)).unwrap());
            compared += 1;
            if a != b {
                differing.push(format!("{name}/{}", f.display()));
            }
        }
    }
    let elapsed = start.elapsed();
    let ok = differing.is_empty();
    verdict(
        9,
        "every CLI command is byte-for-byte repeatable",
        ok,
        &format!(
            "{} commands, {compared} files compared, differing: {differing:?}, {:.1}s",
            commands.len() + 1,
            elapsed.as_secs_f64()
        ),
    );
}

// ---------------------------------------------------------------- 10

fn fuzz_knowledge_base() -> KnowledgeBase {
    KnowledgeBase {
        series: "fz".into(),
        roles: vec![
            PersonEntry::new("王小", 1),
            PersonEntry::new("王小明", 2).with_alias("小明"),
            PersonEntry::new("李雷", 3).with_alias("雷子"),
            PersonEntry::new("韩梅梅", 4),
        ],
        actors: vec![
            PersonEntry::new("张三丰", 1).with_alias("三丰"),
            PersonEntry::new("Kim", 2),
            PersonEntry::new("赵六", 3),
        ],
    }
    .validated()
    .unwrap()
}

#[test]
fn criterion_10_preprocessing_contracts() {
    let kb = fuzz_knowledge_base();
    let map = tvreview::preprocess::build_surrogate_map(&kb).unwrap();
    let surfaces: Vec<String> = kb.surfaces().map(str::to_string).collect();
    let stop = StopList::builtin();
    let stop_words: Vec<&str> = BASIC_CHINESE.iter().chain(FORUM_WORDS.iter()).copied().collect();
    let filler = ["的", "剧", "情", "好", "看", "王", "小", "李", "明", "梅", "三", "这", "部", "演", "技"];
    let punct = ["，", "。", "！", " ", "  ", "...", "?", "\n"];
    let ascii = ["ok", "Ki", "m", "role", "ep3", "2024"];
    let dict = DictionarySegmenter::new(
        stop_words
            .iter()
            .map(|s| s.to_string())
            .chain(["剧情", "好看", "演技", "这部"].map(String::from)),
    );
    let pre = Preprocessor::new(Arc::new(dict), stop.clone())
        .with_knowledge_bases([&kb])
        .unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let (mut leftovers, mut not_idempotent, mut stop_hits, mut tokens_seen) = (0, 0, 0, 0);
    for _ in 0..1000 {
        let pieces = rng.gen_range(0..40);
        let text: String = (0..pieces)
            .map(|_| match rng.gen_range(0..10) {
                0..=2 => surfaces.choose(&mut rng).unwrap().to_string(),
                3..=5 => filler.choose(&mut rng).unwrap().to_string(),
                6 => stop_words.choose(&mut rng).unwrap().to_string(),
                7 => punct.choose(&mut rng).unwrap().to_string(),
                8 => ascii.choose(&mut rng).unwrap().to_string(),
                _ => char::from_u32(rng.gen_range(0x4e00..0x9fa5)).unwrap().to_string(),
            })
            .collect();
        let once = map.substitute(&text);
        leftovers += surfaces.iter().filter(|s| once.contains(s.as_str())).count();
        not_idempotent += (map.substitute(&once) != once) as usize;
        let tokens = pre.process("fz", &text).unwrap();
        tokens_seen += tokens.len();
        stop_hits += tokens.iter().filter(|t| stop.contains(t)).count();
    }
    let ok = leftovers == 0 && not_idempotent == 0 && stop_hits == 0 && tokens_seen > 0;
    verdict(
        10,
        "substitution, idempotence and stop-word removal",
        ok,
        &format!(
            "1000 reviews: {leftovers} surviving surfaces, {not_idempotent} non-idempotent, \
             {stop_hits} stop words among {tokens_seen} tokens"
        ),
    );
}
