//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use gtr_cli::checks;
use gtr_engine::ranking::{
    greedy_repair_graph, repair_with_restarts, RepairConfig, Scorer, ScorerOptions, Termination,
};
use gtr_graph::count_violations;
use serde_json::Value;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Box<dyn Fn() -> Outcome>);
/// Rule, match substrings, (repair, impair) per weak constraint.
type TableRow = (&'static str, &'static [&'static str], [(u64, u64); 2]);

fn assets() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../assets")
}

fn gtr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gtr")).args(args).output().expect("binary runs")
}

fn gtr_json(args: &[&str]) -> Result<Value, String> {
    let out = gtr(args);
    if !out.status.success() {
        return Err(format!("gtr {args:?} exited {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)));
    }
    serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())
}

fn path(name: &str) -> String {
    assets().join(name).display().to_string()
}

fn within(t: Instant, limit: Duration) -> Result<Duration, String> {
    let d = t.elapsed();
    if d < limit {
        Ok(d)
    } else {
        Err(format!("took {d:.2?}, limit {limit:?}"))
    }
}

fn running_example_counts() -> Outcome {
    let t = Instant::now();
    let rows = gtr_json(&["violations", &path("fig1.json"), &path("base-constraints.json"), "--json"])?;
    let d = within(t, Duration::from_secs(1))?;
    let nv = |name: &str| {
        rows.as_array().and_then(|r| r.iter().find(|x| x["constraint"] == name)).map(|x| x["violations"].clone())
    };
    let (w1, w2) = (nv("w1"), nv("w2"));
    if w1 == Some(4.into()) && w2 == Some(2.into()) {
        Ok(format!("nv(w1)=4, nv(w2)=2 in {d:.2?}"))
    } else {
        Err(format!("nv(w1)={w1:?}, nv(w2)={w2:?}"))
    }
}

fn table_reproduction() -> Outcome {
    let t = Instant::now();
    let rows = gtr_json(&["rank", &path("fig1.json"), &path("rules.json"), &path("base-constraints.json"), "--json"])?;
    let d = within(t, Duration::from_secs(1))?;
    let rows = rows.as_array().ok_or("rank output is not a list")?;
    let expected: [TableRow; 4] = [
        ("moveMethod", &["m->checkout", "c1->Cart", "c2->Session"], [(4, 0), (1, 0)]),
        ("moveAttribute", &["a->username", "c1->Session", "c2->Cart"], [(2, 0), (2, 1)]),
        ("moveMethod", &["m->print", "c1->Cart", "c2->Session"], [(2, 0), (1, 1)]),
        ("moveMethod", &["m->addItem", "c1->Cart", "c2->Session"], [(2, 2), (0, 1)]),
    ];
    for (rule, needles, counts) in expected {
        let hits: Vec<&Value> = rows
            .iter()
            .filter(|r| r["rule"] == rule && needles.iter().all(|n| r["match"].as_str().unwrap_or("").contains(n)))
            .collect();
        let [row] = hits.as_slice() else {
            return Err(format!("{rule} {needles:?}: {} rows", hits.len()));
        };
        let got: Vec<(u64, u64)> = row["perConstraint"]
            .as_array()
            .ok_or("perConstraint missing")?
            .iter()
            .map(|s| (s["repair"].as_u64().unwrap_or(u64::MAX), s["impair"].as_u64().unwrap_or(u64::MAX)))
            .collect();
        if got != counts {
            return Err(format!("{rule} {needles:?}: {got:?}, expected {counts:?}"));
        }
    }
    let top = &rows[0];
    let first = top["rule"] == "moveMethod"
        && ["m->checkout", "c2->Session"].iter().all(|n| top["match"].as_str().unwrap_or("").contains(n));
    if !first {
        return Err(format!("first row is {} {}", top["rule"], top["match"]));
    }
    Ok(format!("16 counts exact, checkout first (gain {}) in {d:.2?}", top["gain"]))
}

fn ac_shapes() -> Outcome {
    let cs = gtr_cra::constraints(gtr_cra::Variant::Base);
    let scorer: Scorer = Scorer::new(&gtr_cra::rules(), &cs, &BTreeMap::new(), ScorerOptions::default());
    let bundle = |rule: &str, c: &str| {
        let r = scorer.rules.iter().position(|x| x.name == rule).expect("rule");
        let k = scorer.weak.iter().position(|x| x.name == c).expect("constraint");
        &scorer.bundles[r][k]
    };
    let mut sizes = Vec::new();
    for (rule, c, want) in
        [("moveAttribute", "w1", 1), ("moveAttribute", "w2", 2), ("moveMethod", "w1", 1), ("moveMethod", "w2", 2)]
    {
        // as derived; the w2 sets each hold one half of a mutual pair
        let n = bundle(rule, c).repair_all.len();
        if n != want {
            return Err(format!("|repair({rule},{c})| = {n}, expected {want}"));
        }
        sizes.push(n);
    }
    for rule in ["moveAttribute", "moveMethod"] {
        let b = bundle(rule, "w2");
        let weight =
            |acs: &[gtr_engine::repair_ac::ApplicationCondition]| acs.iter().map(|a| a.multiplicity).sum::<usize>();
        let cancelled = weight(&b.repair_all) - weight(&b.repair);
        if cancelled != 1 || weight(&b.impairment_all) - weight(&b.impairment) != 1 {
            return Err(format!("{rule}/w2: {cancelled} pairs cancelled, expected 1"));
        }
    }
    let golden = std::fs::read_to_string(assets().join("golden/bundles-base.json")).map_err(|e| e.to_string())?;
    if golden != gtr_cli::assets::bundle_file(gtr_cra::Variant::Base) {
        return Err("derived bundles differ from assets/golden/bundles-base.json".into());
    }
    Ok(format!("repair set sizes {sizes:?}, one mutual pair cancelled per w2 set, golden file equal"))
}

fn suite(names: &[&str], cases: usize, limit: Duration) -> Outcome {
    let t = Instant::now();
    let mut parts = Vec::new();
    for name in names {
        let (_, run) = checks::SUITES.iter().find(|(n, _)| n == name).expect("suite");
        let r = run(cases, 0);
        if let Some(f) = r.failures.first() {
            return Err(format!("{name}: {} failures, first at seed {}: {}", r.failures.len(), f.seed, f.detail));
        }
        parts.push(format!("{name} {} cases / {} checks", r.cases, r.checks));
    }
    let d = within(t, limit)?;
    Ok(format!("{}, zero failures in {d:.2?}", parts.join(", ")))
}

fn greedy_terminates() -> Outcome {
    let model = gtr_cra::generate_synthetic(25, 7).map_err(|e| e.to_string())?;
    let cs = gtr_cra::constraints(gtr_cra::Variant::Base);
    let scorer: Scorer = Scorer::new(&gtr_cra::rules(), &cs, &BTreeMap::new(), ScorerOptions::default());
    let (trace, last) =
        greedy_repair_graph(&model.graph, &scorer, &RepairConfig::default(), 7).map_err(|e| e.to_string())?;
    if trace.termination != Termination::NoImprovingMove {
        return Err(format!("stopped with {:?}", trace.termination));
    }
    if let Some(best) = scorer.rank_all(&last).first().filter(|r| r.delta < 0.0) {
        return Err(format!("{} {} still has delta {}", best.rule, best.signature, best.delta));
    }
    if !trace.identity_holds() {
        return Err("final != initial + sum of step deltas".into());
    }
    for c in &scorer.weak {
        if count_violations(&last, c) != trace.final_counts[&c.name] {
            return Err(format!("recounted {} differs from the trace", c.name));
        }
    }
    Ok(format!(
        "{} steps, weighted {} -> {}, no negative-delta match left, trace identity holds",
        trace.steps.len(),
        trace.initial_weighted,
        trace.final_weighted
    ))
}

fn small_instances_optimal() -> Outcome {
    let t = Instant::now();
    let cs = gtr_cra::constraints(gtr_cra::Variant::Extended);
    let scorer: Scorer = Scorer::new(&gtr_cra::rules(), &cs, &BTreeMap::new(), ScorerOptions::default());
    let mut hits = 0;
    let mut misses = Vec::new();
    for seed in 0..10 {
        let model = gtr_cra::generate_feature_model(9, seed);
        let g = model.to_graph().map_err(|e| e.to_string())?;
        let config = RepairConfig { restarts: 50, impair_budget: 3, top_k: 5, seed, ..Default::default() };
        let report = repair_with_restarts(&g, &scorer, &config).map_err(|e| e.to_string())?;
        let optimum =
            gtr_oracle::cra_optimal_assignment(&model, gtr_oracle::DEFAULT_BOUND).map_err(|e| e.to_string())?;
        if report.best.final_weighted == optimum.min_violations as f64 {
            hits += 1;
        } else {
            misses.push(format!("seed {seed}: {} vs {}", report.best.final_weighted, optimum.min_violations));
        }
    }
    let d = within(t, Duration::from_secs(300))?;
    if hits >= 9 {
        Ok(format!("{hits}/10 seeds reach the exhaustive minimum in {d:.2?}"))
    } else {
        Err(format!("{hits}/10 seeds optimal; {}", misses.join("; ")))
    }
}

/// Runs `args` twice; `outputs` are files the command writes.
fn same_twice(args: &[&str], outputs: &[&Path]) -> Result<(), String> {
    let mut seen = Vec::new();
    for _ in 0..2 {
        let out = gtr(args);
        if !out.status.success() {
            return Err(format!("gtr {args:?} exited {:?}", out.status.code()));
        }
        let mut bytes = out.stdout;
        for p in outputs {
            bytes.extend(std::fs::read(p).map_err(|e| format!("{}: {e}", p.display()))?);
        }
        seen.push(bytes);
    }
    if seen[0] == seen[1] {
        Ok(())
    } else {
        Err(format!("gtr {args:?} differs between runs"))
    }
}

fn deterministic_cli() -> Outcome {
    let dir = std::env::temp_dir().join(format!("gtr-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let tmp = |n: &str| dir.join(n).display().to_string();
    let (fig, rules, base, ext) =
        (path("fig1.json"), path("rules.json"), path("base-constraints.json"), path("extended-constraints.json"));
    let (features, synthetic, imported, report) =
        (tmp("features.json"), tmp("synthetic.json"), tmp("imported.json"), tmp("report.json"));
    gtr(&["gen-features", "--features", "7", "--seed", "3", "-o", &features]);
    let runs: Vec<(Vec<&str>, Vec<&str>)> = vec![
        (vec!["validate", &fig], vec![]),
        (vec!["violations", &fig, &ext], vec![]),
        (vec!["violations", &fig, &base, "--json"], vec![]),
        (vec!["derive-ac", &rules, &ext, "--explain"], vec![]),
        (vec!["derive-ac", &rules, &base, "--no-cancel"], vec![]),
        (vec!["rank", &fig, &rules, &base], vec![]),
        (vec!["rank", &fig, &rules, &ext, "--json", "--top", "5"], vec![]),
        (vec!["repair", &fig, &rules, &ext, "--restarts", "4", "--budget", "2", "--seed", "5"], vec![]),
        (vec!["repair", &fig, &rules, &base, "--seed", "1", "-o", &report], vec![&report]),
        (vec!["oracle", "--cases", "20", "--seed", "11"], vec![]),
        (vec!["gen-cra", "--classes", "4", "--seed", "2", "-o", &synthetic], vec![&synthetic]),
        (vec!["gen-features", "--features", "9", "--seed", "4"], vec![]),
        (vec!["import-features", &features, "-o", &imported], vec![&imported]),
        (vec!["bench", "--sizes", "3,4", "--steps", "3", "--restarts", "2", "--budget", "1", "--seed", "9"], vec![]),
    ];
    let mut commands = std::collections::BTreeSet::new();
    for (args, files) in &runs {
        let files: Vec<&Path> = files.iter().map(Path::new).collect();
        same_twice(args, &files)?;
        commands.insert(args[0]);
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("{} invocations over {} subcommands byte-identical", runs.len(), commands.len()))
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("running-example counts", Box::new(running_example_counts)),
        ("ranking table reproduction", Box::new(table_reproduction)),
        ("application condition shapes", Box::new(ac_shapes)),
        ("change prediction theorem", Box::new(|| suite(&["theorem"], 1000, Duration::from_secs(60)))),
        ("shift and left correctness", Box::new(|| suite(&["shift", "left"], 1000, Duration::from_secs(600)))),
        ("overlap class uniqueness", Box::new(|| suite(&["overlap"], 1000, Duration::from_secs(600)))),
        ("direct sustaining/improving", Box::new(|| suite(&["direct"], 1000, Duration::from_secs(600)))),
        ("greedy termination", Box::new(greedy_terminates)),
        ("small-instance optimality", Box::new(small_instances_optimal)),
        ("cli determinism", Box::new(deterministic_cli)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("acceptance {:>2} PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("acceptance {:>2} FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
