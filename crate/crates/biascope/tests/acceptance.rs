//! Acceptance gate: ten end-to-end checks covering the toolkit's numeric
//! contracts, from hand-checkable oracles through statistical calibration to
//! CLI determinism. Each check prints one `[PASS]` line with its runtime and
//! enforces its own wall-clock budget.
//!
//! Run with `cargo test --test acceptance -- --test-threads=1 --nocapture`
//! to see the per-criterion lines and keep the timings honest on a shared
//! machine (they pass under the default runner too).

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use biascope::assoc::{
    lexicon_assoc, load_specs, load_word_sets, parse_lexicon, pmi, pmi_plane, weat_effect_size,
    weat_p_value, weat_statistic, weat_test, weat_word_assoc, CoocTable,
};
use biascope::defaults;
use biascope::embed::{train_sgns, EmbeddingModel, TrainConfig};
use biascope::entities::{classify_entity, EntityRecord, Gender, KeywordSets, Race};
use biascope::stability::{run_stability_suite, stability_jaccard, GridPoint};
use biascope::synth::{
    gaussian_cloud_model, noisy_benchmark, planted_bias_corpus, random_weat_instance,
};
use biascope::tokenize::{
    bpe_streams_from_docs, streams_from_docs, train_bpe, train_bpe_until, word_frequencies,
};

/// Wall-clock budget for one criterion; `finish` asserts and prints the line.
struct Budget {
    n: usize,
    label: &'static str,
    limit: Duration,
    started: Instant,
}

impl Budget {
    fn start(n: usize, label: &'static str, limit_secs: u64) -> Self {
        Budget { n, label, limit: Duration::from_secs(limit_secs), started: Instant::now() }
    }

    fn finish(self) {
        let elapsed = self.started.elapsed();
        assert!(
            elapsed <= self.limit,
            "criterion {} ({}) overran its {}s budget: took {:.1}s",
            self.n,
            self.label,
            self.limit.as_secs(),
            elapsed.as_secs_f64()
        );
        println!(
            "[PASS] criterion {:02} ({}): {:.1}s",
            self.n,
            self.label,
            elapsed.as_secs_f64()
        );
    }
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/fixtures").join(name)
}

// ------------------------------------------------------------------ 1

/// The two-dimensional hand fixture: X={(1,0)}, Y={(0,1)}, A={(1,0)},
/// B={(0,1)}. s(x) = 1−0 = 1, s(y) = 0−1 = −1, so the statistic is 2 and,
/// with the population standard deviation of {1,−1} being 1, the effect
/// size is 2 as well.
#[test]
fn criterion_01_hand_oracle() {
    let budget = Budget::start(1, "two-dimensional hand oracle", 1);

    let model = EmbeddingModel::load(fixture("hand_model.txt")).expect("fixture model");
    let sets = load_word_sets(fixture("hand_sets.json")).expect("fixture sets");
    let specs = load_specs(fixture("hand_tests.json")).expect("fixture tests");
    let result = weat_test(&model, &sets, &specs[0], 100, 1).expect("test runs");

    assert!((result.statistic - 2.0).abs() < 1e-9, "statistic {}", result.statistic);
    let effect = result.effect_size.expect("nonzero spread");
    assert!((effect - 2.0).abs() < 1e-9, "effect size {effect}");

    budget.finish();
}

// ------------------------------------------------------------------ 2

/// Algebraic invariances on 1,000 randomized instances: swapping targets or
/// attributes negates both the statistic and the effect size, scaling every
/// vector by 3.7 changes neither, and identical attribute sets score zero
/// for every word.
#[test]
fn criterion_02_association_invariances() {
    let budget = Budget::start(2, "association-test invariances", 30);

    for seed in 0..1_000u64 {
        let (model, sets, _spec) = random_weat_instance(seed);
        let x = &sets["xs"];
        let y = &sets["ys"];
        let a = &sets["as"];
        let b = &sets["bs"];

        let s = weat_statistic(&model, x, y, a, b).expect("statistic");
        let d = weat_effect_size(&model, x, y, a, b).expect("effect").expect("spread");

        let s_xy = weat_statistic(&model, y, x, a, b).expect("statistic");
        let d_xy = weat_effect_size(&model, y, x, a, b).expect("effect").expect("spread");
        assert!((s + s_xy).abs() < 1e-9, "seed {seed}: target swap: {s} vs {s_xy}");
        assert!((d + d_xy).abs() < 1e-9, "seed {seed}: target swap: {d} vs {d_xy}");

        let s_ab = weat_statistic(&model, x, y, b, a).expect("statistic");
        let d_ab = weat_effect_size(&model, x, y, b, a).expect("effect").expect("spread");
        assert!((s + s_ab).abs() < 1e-9, "seed {seed}: attribute swap: {s} vs {s_ab}");
        assert!((d + d_ab).abs() < 1e-9, "seed {seed}: attribute swap: {d} vs {d_ab}");

        let tokens = model.tokens().to_vec();
        let mut scaled = Vec::with_capacity(tokens.len() * model.dim());
        for t in &tokens {
            scaled.extend(model.vector(t).expect("token").iter().map(|v| v * 3.7));
        }
        let scaled_model =
            EmbeddingModel::new(tokens, model.dim(), scaled).expect("well-formed");
        let s_sc = weat_statistic(&scaled_model, x, y, a, b).expect("statistic");
        let d_sc =
            weat_effect_size(&scaled_model, x, y, a, b).expect("effect").expect("spread");
        assert!((s - s_sc).abs() < 1e-9, "seed {seed}: scale: {s} vs {s_sc}");
        assert!((d - d_sc).abs() < 1e-9, "seed {seed}: scale: {d} vs {d_sc}");

        for w in x.iter().chain(y) {
            let same = weat_word_assoc(&model, w, a, a).expect("assoc");
            assert!(same.abs() < 1e-9, "seed {seed}: identical attributes gave {same}");
        }
    }

    budget.finish();
}

// ------------------------------------------------------------------ 3

/// Embeddings trained on a corpus with a planted X↔A / Y↔B co-occurrence
/// structure must recover it: effect size > 0.8 and permutation p < 0.05
/// for at least 9 of 10 training seeds.
#[test]
fn criterion_03_planted_bias_recovery() {
    let budget = Budget::start(3, "planted-bias recovery", 300);

    let corpus = planted_bias_corpus(4_000, 500, 1);
    let streams = streams_from_docs(&corpus.docs, true);

    let mut hits = 0;
    let mut outcomes = Vec::new();
    for seed in 1..=10u64 {
        let config = TrainConfig { dim: 100, epochs: 2, seed, ..TrainConfig::default() };
        let model = train_sgns(&streams, &config).expect("training succeeds");
        let r = weat_test(&model, &corpus.sets, &corpus.spec, 10_000, seed).expect("test runs");
        let effect = r.effect_size.expect("nonzero spread");
        if effect > 0.8 && r.p_value < 0.05 {
            hits += 1;
        }
        outcomes.push((seed, effect, r.p_value));
    }
    assert!(hits >= 9, "recovered in {hits}/10 seeds: {outcomes:?}");

    budget.finish();
}

// ------------------------------------------------------------------ 4

/// The tokenizer trade-off on the synthetic-noise benchmark: the sub-word
/// arm covers at least as many misspelt forms as the word arm, the word arm
/// ranks the correction in the top-5 at least as often as the sub-word arm,
/// the sub-word arm's seed-stability is no worse, and identical models have
/// neighborhood overlap exactly 1.
#[test]
fn criterion_04_stability_tradeoff_direction() {
    let budget = Budget::start(4, "tokenizer stability trade-off", 300);

    let corpus = noisy_benchmark(1);
    let frac = corpus.misspelt_fraction();
    assert!((0.08..=0.12).contains(&frac), "damage rate {frac}");

    let grid = vec![
        GridPoint { tokenizer: "word".into(), dim: 50, min_count: 20 },
        GridPoint { tokenizer: "bpe".into(), dim: 50, min_count: 20 },
    ];
    let mut streams = BTreeMap::new();
    streams.insert("word".to_string(), streams_from_docs(&corpus.docs, true));
    let freqs = word_frequencies(&corpus.docs);
    let bpe = train_bpe_until(&freqs, 10_000, 20);
    streams.insert("bpe".to_string(), bpe_streams_from_docs(&corpus.docs, &bpe));

    let base = TrainConfig { dim: 50, epochs: 12, seed: 1, ..TrainConfig::default() };
    let reports = run_stability_suite(&streams, &base, &grid, 5, &corpus.pairs).expect("suite");
    let word = reports.iter().find(|r| r.tokenizer == "word").expect("word arm");
    let sub = reports.iter().find(|r| r.tokenizer == "bpe").expect("bpe arm");

    assert!(
        sub.misspelling_coverage >= word.misspelling_coverage,
        "coverage: bpe {} < word {}",
        sub.misspelling_coverage,
        word.misspelling_coverage
    );
    assert!(
        word.misspelling_top_k_rate >= sub.misspelling_top_k_rate,
        "top-5 rate: word {} < bpe {}",
        word.misspelling_top_k_rate,
        sub.misspelling_top_k_rate
    );
    // The benchmark is built so the arms genuinely separate, not just tie.
    assert!(sub.misspelling_coverage > word.misspelling_coverage);
    assert!(word.misspelling_top_k_rate > sub.misspelling_top_k_rate);
    // Sub-word vocabularies also smooth seed-to-seed neighborhood churn.
    assert!(
        sub.mean_jaccard_top_k >= word.mean_jaccard_top_k,
        "jaccard: bpe {} < word {}",
        sub.mean_jaccard_top_k,
        word.mean_jaccard_top_k
    );

    let m = gaussian_cloud_model(30, 8, 5);
    let identical = stability_jaccard(&[m.clone(), m], 10).expect("jaccard");
    assert_eq!(identical, 1.0, "identical models must overlap exactly");

    budget.finish();
}

// ------------------------------------------------------------------ 5

fn brute_pmi(cells: &BTreeMap<(String, String), u64>, group: &str, word: &str) -> f64 {
    let total: u64 = cells.values().sum();
    let joint = cells[&(group.to_string(), word.to_string())];
    let row: u64 = cells.iter().filter(|((g, _), _)| g == group).map(|(_, &c)| c).sum();
    let col: u64 = cells.iter().filter(|((_, w), _)| w == word).map(|(_, &c)| c).sum();
    ((joint as f64 * total as f64) / (row as f64 * col as f64)).ln()
}

/// PMI against a from-scratch recomputation on 100 random tables, plus the
/// hand table {(female,pretty):8, (male,pretty):2, (female,brave):2,
/// (male,brave):8} where PMI(female,pretty) = ln 1.6 and the gender-axis
/// difference for "pretty" is ln 4.
#[test]
fn criterion_05_pmi_oracle() {
    let budget = Budget::start(5, "pmi oracle", 5);

    let mut hand = CoocTable::new();
    hand.add("female", "pretty", 8);
    hand.add("male", "pretty", 2);
    hand.add("female", "brave", 2);
    hand.add("male", "brave", 8);
    let p = pmi(&hand, "female", "pretty").expect("defined");
    assert!((p - 1.6f64.ln()).abs() < 1e-12, "pmi {p}");
    let axis = p - pmi(&hand, "male", "pretty").expect("defined");
    assert!((axis - 4.0f64.ln()).abs() < 1e-12, "axis {axis}");

    let groups = ["female", "male", "non_white", "white"];
    let mut rng = ChaCha8Rng::seed_from_u64(0x9101);
    for case in 0..100 {
        let n_words = rng.random_range(3..=8);
        let words: Vec<String> = (0..n_words).map(|i| format!("w{i}")).collect();
        let min_count: u64 = rng.random_range(1..=10);

        let mut cells: BTreeMap<(String, String), u64> = BTreeMap::new();
        let mut table = CoocTable::new();
        for g in groups {
            for w in &words {
                // Sparse sometimes-zero counts exercise the skip paths.
                let c = if rng.random::<f64>() < 0.25 { 0 } else { rng.random_range(1..=30u64) };
                if c > 0 {
                    cells.insert((g.to_string(), w.clone()), c);
                    table.add(g, w, c);
                }
            }
            // Every group needs some mass for the plane to be defined.
            if table.group_total(g) == 0 {
                cells.insert((g.to_string(), "pad".to_string()), 1);
                table.add(g, "pad", 1);
            }
        }

        for ((g, w), _) in cells.iter() {
            let got = pmi(&table, g, w).expect("positive joint count");
            let want = brute_pmi(&cells, g, w);
            assert!((got - want).abs() < 1e-12, "case {case}: pmi({g},{w}) {got} vs {want}");
        }

        let (points, skipped) = pmi_plane(&table, min_count).expect("four groups present");
        let mut seen = BTreeSet::new();
        for pt in &points {
            seen.insert(pt.word.clone());
            let counts: Vec<u64> = groups
                .iter()
                .map(|g| cells.get(&(g.to_string(), pt.word.clone())).copied().unwrap_or(0))
                .collect();
            assert!(counts.iter().all(|&c| c > 0), "case {case}: {} charted with a zero", pt.word);
            assert!(counts.iter().sum::<u64>() >= min_count, "case {case}: below floor");
            assert_eq!(
                (pt.count_female, pt.count_male, pt.count_non_white, pt.count_white),
                (counts[0], counts[1], counts[2], counts[3])
            );
            let gender = brute_pmi(&cells, "female", &pt.word) - brute_pmi(&cells, "male", &pt.word);
            let race =
                brute_pmi(&cells, "non_white", &pt.word) - brute_pmi(&cells, "white", &pt.word);
            assert!((pt.gender_axis - gender).abs() < 1e-12, "case {case}: gender axis");
            assert!((pt.race_axis - race).abs() < 1e-12, "case {case}: race axis");
        }
        // Nothing eligible may go missing: charted ∪ skipped = all words.
        for w in table.words() {
            let eligible = groups.iter().all(|g| table.count(g, w) > 0)
                && groups.iter().map(|g| table.count(g, w)).sum::<u64>() >= min_count;
            assert_eq!(seen.contains(w), eligible, "case {case}: word {w}");
            assert_eq!(
                skipped.iter().any(|s| s.word == w),
                !eligible,
                "case {case}: skip list for {w}"
            );
        }
    }

    budget.finish();
}

// ------------------------------------------------------------------ 6

/// Lexicon scoring equals the hand value 19/30 on a two-word fixture and
/// stays within the covered weights' range on 1,000 fuzz cases.
#[test]
fn criterion_06_lexicon_oracle() {
    let budget = Budget::start(6, "lexicon oracle", 5);

    let lex = parse_lexicon("good\t0.9\nbad\t0.1\n", "inline", "hand").expect("parses");
    let mut counts = BTreeMap::new();
    counts.insert("good".to_string(), 2u64);
    counts.insert("bad".to_string(), 1u64);
    let v = lexicon_assoc(&lex, &counts).expect("covered");
    assert!((v - 19.0 / 30.0).abs() < 1e-12, "hand value {v}");

    let mut rng = ChaCha8Rng::seed_from_u64(0x6106);
    for case in 0..1_000 {
        let n_lex = rng.random_range(3..=10);
        let mut tsv = String::new();
        let mut weights = BTreeMap::new();
        for i in 0..n_lex {
            let w: f64 = rng.random_range(-2.0..=2.0);
            weights.insert(format!("lex{i}"), w);
            tsv.push_str(&format!("lex{i}\t{w}\n"));
        }
        let lex = parse_lexicon(&tsv, "inline", "fuzz").expect("parses");

        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        for i in 0..rng.random_range(1..=12) {
            // Some words fall outside the lexicon, some counts are zero.
            let word = if rng.random::<bool>() {
                format!("lex{}", rng.random_range(0..n_lex))
            } else {
                format!("other{i}")
            };
            *counts.entry(word).or_insert(0) += rng.random_range(0..=20u64);
        }

        let covered: Vec<f64> = counts
            .iter()
            .filter(|(w, &c)| c > 0 && weights.contains_key(*w))
            .map(|(w, _)| weights[w])
            .collect();
        match lexicon_assoc(&lex, &counts) {
            Ok(v) => {
                let lo = covered.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = covered.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                assert!(!covered.is_empty(), "case {case}: value {v} with no coverage");
                assert!(
                    (lo - 1e-12..=hi + 1e-12).contains(&v),
                    "case {case}: {v} outside [{lo}, {hi}]"
                );
            }
            Err(e) => {
                assert!(covered.is_empty(), "case {case}: spurious error {e}");
            }
        }
    }

    budget.finish();
}

// ------------------------------------------------------------------ 7

fn entity(id: &str, references: &[&str]) -> EntityRecord {
    EntityRecord {
        id: id.to_string(),
        references: references.iter().map(|s| s.to_string()).collect(),
        descriptors: Vec::new(),
    }
}

/// The three worked classification examples, then race/gender partitions
/// over 10,000 fuzzed entities checked against an independent membership
/// recomputation.
#[test]
fn criterion_07_entity_classification() {
    let budget = Budget::start(7, "entity classification", 10);

    let sets = defaults::classify_keywords();
    let kw = KeywordSets::from_word_sets(sets).expect("required sets present");

    // Female keyword, no race marker: white female with intersection group.
    let c = classify_entity(&entity("e1", &["she", "Mary"]), &kw);
    assert_eq!(c.gender, Some(Gender::Female));
    assert_eq!(c.race, Race::White);
    assert_eq!(c.groups(), vec!["white", "female", "white_female"]);

    // Race marker but no gender keyword ("Dick" is a name, not a keyword):
    // non-white with unclassified gender, so no intersection group.
    let c = classify_entity(&entity("e2", &["negro", "Dick"]), &kw);
    assert_eq!(c.gender, None);
    assert_eq!(c.race, Race::NonWhite);
    assert_eq!(c.groups(), vec!["non_white"]);

    // Both gender sets matched: the conflict stays unclassified.
    let c = classify_entity(&entity("e3", &["he", "her"]), &kw);
    assert_eq!(c.gender, None);
    assert_eq!(c.race, Race::White);
    assert_eq!(c.groups(), vec!["white"]);

    let female_pool = &sets["female"];
    let male_pool = &sets["male"];
    let non_white_pool = &sets["non_white"];
    let noise = ["harbour", "anchor", "street", "ship", "cargo", "morning"];
    for w in noise {
        assert!(
            !female_pool.contains(&w.to_string())
                && !male_pool.contains(&w.to_string())
                && !non_white_pool.contains(&w.to_string()),
            "noise word {w} collides with a keyword list"
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x7107);
    for case in 0..10_000 {
        let n_refs = rng.random_range(1..=4);
        let mut references = Vec::with_capacity(n_refs);
        for _ in 0..n_refs {
            let n_tokens = rng.random_range(1..=3);
            let tokens: Vec<String> = (0..n_tokens)
                .map(|_| {
                    let pick: f64 = rng.random();
                    let w = if pick < 0.2 {
                        female_pool[rng.random_range(0..female_pool.len())].clone()
                    } else if pick < 0.4 {
                        male_pool[rng.random_range(0..male_pool.len())].clone()
                    } else if pick < 0.55 {
                        non_white_pool[rng.random_range(0..non_white_pool.len())].clone()
                    } else {
                        noise[rng.random_range(0..noise.len())].to_string()
                    };
                    // Case must not matter.
                    if rng.random::<bool>() { w.to_uppercase() } else { w }
                })
                .collect();
            references.push(tokens.join(" "));
        }
        let record = entity(&format!("fuzz{case}"), &[]);
        let record = EntityRecord { references: references.clone(), ..record };

        // Independent membership recomputation from raw set lookups.
        let mut f = false;
        let mut m = false;
        let mut nw = false;
        for r in &references {
            for t in r.split(' ') {
                let t = t.to_lowercase();
                f |= female_pool.contains(&t);
                m |= male_pool.contains(&t);
                nw |= non_white_pool.contains(&t);
            }
        }

        let c = classify_entity(&record, &kw);
        let expected_gender = match (f, m) {
            (true, false) => Some(Gender::Female),
            (false, true) => Some(Gender::Male),
            _ => None,
        };
        assert_eq!(c.gender, expected_gender, "case {case}: {references:?}");
        assert_eq!(c.race, if nw { Race::NonWhite } else { Race::White }, "case {case}");

        // Race partition: exactly one race group, always first.
        let groups = c.groups();
        let races: Vec<_> =
            groups.iter().filter(|g| **g == "white" || **g == "non_white").collect();
        assert_eq!(races.len(), 1, "case {case}: {groups:?}");
        // Gender tri-partition: a gender group plus intersection iff classified.
        match c.gender {
            None => assert_eq!(groups.len(), 1, "case {case}: {groups:?}"),
            Some(g) => {
                let gender_name = if g == Gender::Female { "female" } else { "male" };
                let race_name = if nw { "non_white" } else { "white" };
                assert_eq!(
                    groups,
                    vec![race_name, gender_name, &format!("{race_name}_{gender_name}")[..]],
                    "case {case}"
                );
            }
        }
    }

    budget.finish();
}

// ------------------------------------------------------------------ 8

/// The classic byte-pair walkthrough on "aaabdaaabac" (merge "aa", then
/// "ab", then "aa"+"ab") and segmentation round-trips on 1,000 corpus words.
#[test]
fn criterion_08_bpe_walkthrough_and_round_trip() {
    let budget = Budget::start(8, "bpe walkthrough and round-trip", 5);

    let mut freqs = BTreeMap::new();
    freqs.insert("aaabdaaabac".to_string(), 1u64);
    let model = train_bpe(&freqs, 100);
    let expected = [
        ("a".to_string(), "a".to_string()),
        ("a".to_string(), "b".to_string()),
        ("aa".to_string(), "ab".to_string()),
    ];
    assert_eq!(model.merges(), &expected[..], "merge sequence");
    assert_eq!(model.segment("aaabdaaabac"), vec!["aaab", "d", "aaab", "a", "c"]);

    let corpus = noisy_benchmark(7);
    let freqs = word_frequencies(&corpus.docs);
    let model = train_bpe(&freqs, 500);
    let words: Vec<&String> = freqs.keys().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x8108);
    for _ in 0..1_000 {
        let word = words[rng.random_range(0..words.len())];
        let pieces = model.segment(word);
        assert!(!pieces.is_empty());
        assert_eq!(&pieces.concat(), word, "round trip of {word:?}");
    }

    budget.finish();
}

// ------------------------------------------------------------------ 9

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_biascope"))
}

fn run_cli(args: &[String]) {
    let out = bin().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "command {:?} failed:\n{}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Every file under `dir`, as relative path → bytes.
fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in fs::read_dir(dir).expect("readable dir") {
            let path = entry.expect("entry").path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).expect("under root").display().to_string();
                out.insert(rel, fs::read(&path).expect("readable file"));
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

/// Rerunning every CLI command with identical inputs, seeds, and
/// `--threads 1` reproduces every output file byte for byte.
#[test]
fn criterion_09_cli_determinism() {
    let budget = Budget::start(9, "cli determinism", 120);

    let dir = tempfile::tempdir().expect("tempdir");
    let root = dir.path();
    let p = |name: &str| root.join(name).display().to_string();
    let fx = |name: &str| fixture(name).display().to_string();

    // Per-period vector directory for the temporal mode.
    let vdir = root.join("vdir");
    fs::create_dir_all(&vdir).expect("vdir");
    fs::copy(fixture("hand_model.txt"), vdir.join("early.txt")).expect("copy");
    fs::copy(fixture("hand_model.txt"), vdir.join("late.txt")).expect("copy");
    fs::write(
        root.join("grid.json"),
        r#"[{"tokenizer":"word","dim":8,"min_count":1},{"tokenizer":"bpe","dim":8,"min_count":1}]"#,
    )
    .expect("grid");
    fs::write(root.join("pairs.tsv"), "weduesday\twednesday\n").expect("pairs");

    let s = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<String>>();
    let commands: Vec<Vec<String>> = vec![
        s(&["clean", "--threads", "1", "--in", &fx("sample_corpus.jsonl"), "--out", &p("clean.jsonl")]),
        s(&["split", "--threads", "1", "--in", &p("clean.jsonl"), "--out-dir", &p("periods")]),
        s(&["train", "--threads", "1", "--in", &p("clean.jsonl"), "--out", &p("vec_word.txt"),
            "--min-count", "1", "--dim", "8", "--epochs", "2", "--seed", "3"]),
        s(&["train", "--threads", "1", "--in", &p("clean.jsonl"), "--out", &p("vec_bpe.txt"),
            "--tokenizer", "bpe", "--min-count", "1", "--dim", "8", "--epochs", "2",
            "--bpe-vocab", "120", "--seed", "3"]),
        s(&["stability", "--threads", "1", "--in", &p("clean.jsonl"), "--grid", &p("grid.json"),
            "--pairs", &p("pairs.tsv"), "--runs", "2", "--epochs", "2", "--bpe-vocab", "120",
            "--out", &p("stability.csv")]),
        s(&["weat", "--threads", "1", "--vectors", &fx("hand_model.txt"),
            "--sets", &fx("hand_sets.json"), "--tests", &fx("hand_tests.json"),
            "--permutations", "200", "--out", &p("weat.csv")]),
        s(&["weat", "--threads", "1", "--vectors-dir", &vdir.display().to_string(),
            "--sets", &fx("hand_sets.json"), "--tests", &fx("hand_tests.json"),
            "--permutations", "200", "--out", &p("weat_temporal.csv")]),
        s(&["pmi", "--threads", "1", "--entities", &fx("sample_entities.jsonl"),
            "--min-word-count", "1", "--out", &p("pmi.csv")]),
        s(&["lexicon", "--threads", "1", "--entities", &fx("sample_entities.jsonl"),
            "--lexicon", &fx("sample_lexicon.tsv"), "--out", &p("lexicon.csv")]),
    ];

    for args in &commands {
        run_cli(args);
    }
    let first = snapshot(root);
    assert!(first.len() >= 20, "expected many outputs, saw {}", first.len());

    for args in &commands {
        run_cli(args);
    }
    let second = snapshot(root);

    assert_eq!(
        first.keys().collect::<Vec<_>>(),
        second.keys().collect::<Vec<_>>(),
        "file sets differ between runs"
    );
    for (name, bytes) in &first {
        assert_eq!(bytes, &second[name], "{name} changed between identical reruns");
    }

    budget.finish();
}

// ------------------------------------------------------------------ 10

/// With targets drawn from one isotropic cloud there is no signal, so
/// permutation p-values must be uniform: Kolmogorov–Smirnov over 200
/// trials at α = 0.001 (critical value √(−ln(α/2)/(2n)) ≈ 0.13785).
#[test]
fn criterion_10_permutation_calibration() {
    let budget = Budget::start(10, "permutation-test calibration", 120);

    let n_trials = 200;
    let mut pvals = Vec::with_capacity(n_trials);
    for t in 0..n_trials as u64 {
        let model = gaussian_cloud_model(32, 10, 1_000 + t);
        let tok = model.tokens();
        let x = tok[0..8].to_vec();
        let y = tok[8..16].to_vec();
        let a = tok[16..24].to_vec();
        let b = tok[24..32].to_vec();
        pvals.push(weat_p_value(&model, &x, &y, &a, &b, 500, 7 + t).expect("p-value"));
    }

    pvals.sort_by(f64::total_cmp);
    let n = pvals.len() as f64;
    let mut d: f64 = 0.0;
    for (i, p) in pvals.iter().enumerate() {
        d = d.max((i as f64 + 1.0) / n - p).max(p - i as f64 / n);
    }
    assert!(d < 0.13785, "KS statistic {d} fails uniformity at α = 0.001");

    budget.finish();
}
