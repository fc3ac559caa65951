//! Acceptance run: one line per criterion with its measured time and limit.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use hochschild::cli::document::ResultDocument;
use hochschild::cli::{cmd_bv, cmd_compute, cmd_oracle, dims, verify, Format, JobArgs, JobConfig};
use hochschild::fp_linalg::PrimeField;
use hochschild::moore_ss::{collapse_certificate, BigradedRing, ResolutionStatus, RingClass, RingWindow};

fn presentation_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../presentations").join(format!("{name}.json"))
}

fn config(command: &str, name: &str, max_p: Option<usize>, q: Option<(i32, i32)>, bar_length: Option<usize>) -> JobConfig {
    let args = JobArgs {
        input: Some(presentation_path(name)),
        max_p,
        q_min: q.map(|q| q.0),
        q_max: q.map(|q| q.1),
        format: Format::Json,
        seed: 0,
        max_bar_length: bar_length,
        oracle_cell_limit: 2_000_000,
        corrupt_zeta: false,
    };
    JobConfig::from_args(command, &args).expect("corpus file loads")
}

/// Cells of `K[x_1..x_n] ⊗ ∧(u_1*..u_n*)`, `u_i*` in bidegree `(1, −deg)`.
fn polynomial_expectation(n: usize, deg: i32, max_p: usize, q_min: i32, q_max: i32) -> BTreeMap<(i32, i32), usize> {
    let mut out = BTreeMap::new();
    for p in 0..=max_p as i32 {
        for q in q_min..=q_max {
            out.insert((p, q), 0);
        }
    }
    // Number of exponent vectors of weight a in n variables is C(a + n − 1, n − 1).
    let count = |a: i32| -> usize {
        let mut c = 1usize;
        for i in 0..(n - 1) {
            c = c * (a as usize + 1 + i) / (i + 1);
        }
        c
    };
    for s in 0..=n.min(max_p) {
        let choose = (0..s).fold(1usize, |acc, i| acc * (n - i) / (i + 1));
        for a in 0..=(q_max / deg + s as i32 + 1) {
            let q = deg * a - deg * s as i32;
            if let Some(v) = out.get_mut(&(s as i32, q)) {
                *v += choose * count(a);
            }
        }
    }
    out
}

/// `∧(y_1, y_2) ⊗ K[ν_1*, ν_2*]` with `|y| = (0, n)`, `|ν*| = (1, −n)`: classes keyed by `(S, α)`.
type FreeClass = (u8, [u32; 2]);

fn free_exterior_classes(n: i32, max_p: usize, q_min: i32, q_max: i32) -> BTreeSet<FreeClass> {
    let mut out = BTreeSet::new();
    for s in 0u8..4 {
        for a in 0..=max_p as u32 {
            for b in 0..=(max_p as u32 - a) {
                let q = n * s.count_ones() as i32 - n * (a + b) as i32;
                if (q_min..=q_max).contains(&q) {
                    out.insert((s, [a, b]));
                }
            }
        }
    }
    out
}

fn parse_label(label: &str) -> FreeClass {
    let mut s = 0u8;
    let mut e = [0u32; 2];
    if label == "1" {
        return (s, e);
    }
    for part in label.split('.') {
        match part {
            "y1" => s |= 1,
            "y2" => s |= 2,
            _ => {
                let (base, pow) = part.split_once('^').map_or((part, 1), |(b, k)| (b, k.parse().unwrap()));
                match base {
                    "nu1*" => e[0] += pow,
                    "nu2*" => e[1] += pow,
                    other => panic!("unexpected factor {other}"),
                }
            }
        }
    }
    (s, e)
}

fn class_dims(classes: &BTreeSet<FreeClass>, n: i32) -> BTreeMap<(i32, i32), usize> {
    let mut out = BTreeMap::new();
    for (s, e) in classes {
        let p = (e[0] + e[1]) as i32;
        *out.entry((p, n * s.count_ones() as i32 - n * p)).or_insert(0) += 1;
    }
    out
}

struct Line {
    id: usize,
    name: &'static str,
    passed: bool,
    elapsed: Duration,
    limit: Duration,
    detail: String,
}

fn criterion(id: usize, name: &'static str, limit_s: u64, body: impl FnOnce() -> Result<String, String>) -> Line {
    let start = Instant::now();
    let outcome = body();
    let elapsed = start.elapsed();
    let limit = Duration::from_secs(limit_s);
    let (ok, detail) = match outcome {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    let passed = ok && elapsed <= limit;
    let detail = if ok && elapsed > limit { format!("{detail}; over time limit") } else { detail };
    Line { id, name, passed, elapsed, limit, detail }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn bv_entry<'a>(doc: &'a ResultDocument, label: &str) -> Result<&'a hochschild::cli::document::BvEntry, String> {
    doc.bv_table.iter().find(|e| e.class == label).ok_or_else(|| format!("no BV entry for {label}"))
}

fn criterion_1() -> Result<String, String> {
    let cases = [
        ("polynomial_1gen_deg2_char2", 1, 2),
        ("polynomial_1gen_deg2_char3", 1, 2),
        ("polynomial_1gen_deg4_char5", 1, 4),
        ("polynomial_2gen_deg2_char2", 2, 2),
        ("polynomial_2gen_deg4_char3", 2, 4),
    ];
    let mut worst = Duration::ZERO;
    for (name, n, deg) in cases {
        let start = Instant::now();
        let cfg = config("compute", name, Some(4), Some((-24, 24)), None);
        let (doc, _) = cmd_compute(&cfg).map_err(|e| format!("{name}: {}", e.message()))?;
        let elapsed = start.elapsed();
        worst = worst.max(elapsed);
        check(elapsed < Duration::from_secs(10), || format!("{name}: {elapsed:?} exceeds 10 s"))?;
        let got = dims(&doc.hh_table);
        let want = polynomial_expectation(n, deg, 4, -24, 24);
        if got != want {
            let bad = want.iter().find(|(k, v)| got.get(k) != Some(v)).map(|(k, v)| format!("{k:?}: want {v}, got {:?}", got.get(k)));
            return Err(format!("{name}: {}", bad.unwrap_or_else(|| "extra cells".into())));
        }
    }
    Ok(format!("5 cases, exact, slowest {:.2} s (limit 10 s each)", worst.as_secs_f64()))
}

fn criterion_2() -> Result<String, String> {
    let cfg = config("compute", "exterior_2gen_deg5_char2", Some(5), Some((-24, 24)), None);
    let (doc, _) = cmd_compute(&cfg).map_err(|e| e.message().to_string())?;
    let want_classes = free_exterior_classes(5, 5, -24, 24);
    let mut want = class_dims(&want_classes, 5);
    for c in &doc.hh_table {
        want.entry((c.p, c.q)).or_insert(0);
    }
    check(dims(&doc.hh_table) == want, || "cell dimensions differ".into())?;
    let mut products = 0;
    for e in &doc.product_table {
        let (s, a) = parse_label(&e.left);
        let (t, b) = parse_label(&e.right);
        let expected: Vec<(String, u32)> = if s & t != 0 {
            Vec::new()
        } else {
            let key = (s | t, [a[0] + b[0], a[1] + b[1]]);
            vec![(label_of(key), 1)]
        };
        check(e.product == expected, || format!("{} · {} = {:?}, expected {:?}", e.left, e.right, e.product, expected))?;
        products += 1;
    }
    // Every pair whose product lands in the window must be tabulated.
    let n_classes = want_classes.len();
    let in_window = |x: &FreeClass, y: &FreeClass| {
        let p = x.1[0] + x.1[1] + y.1[0] + y.1[1];
        let q = 5 * (x.0.count_ones() + y.0.count_ones()) as i32 - 5 * p as i32;
        p <= 5 && (-24..=24).contains(&q)
    };
    let v: Vec<&FreeClass> = want_classes.iter().collect();
    let expected_pairs = (0..v.len()).flat_map(|i| (i..v.len()).map(move |j| (i, j))).filter(|&(i, j)| in_window(v[i], v[j])).count();
    check(products == expected_pairs, || format!("{products} products tabulated, {expected_pairs} expected"))?;
    Ok(format!("{n_classes} classes, {products} products, exact (limit 10 s)"))
}

fn label_of((s, e): FreeClass) -> String {
    let mut parts = Vec::new();
    if s & 1 != 0 {
        parts.push("y1".to_string());
    }
    if s & 2 != 0 {
        parts.push("y2".to_string());
    }
    for (i, &k) in e.iter().enumerate() {
        match k {
            0 => {}
            1 => parts.push(format!("nu{}*", i + 1)),
            k => parts.push(format!("nu{}*^{k}", i + 1)),
        }
    }
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join(".")
    }
}

fn criterion_3() -> Result<String, String> {
    let runs = [
        ("exterior_2gen_deg5_char2", Some(4), 5),
        ("exterior_1gen_deg3_char3", Some(5), 6),
        ("truncated_x2_deg4_char2", Some(4), 5),
    ];
    let mut compared = 0;
    for (name, max_p, length) in runs {
        let cfg = config("oracle", name, max_p, None, Some(length));
        let (doc, code) = cmd_oracle(&cfg).map_err(|e| format!("{name}: {}", e.message()))?;
        let report = doc.oracle_report.expect("oracle report");
        if let Some(bad) = report.cells.iter().find(|c| !c.agree) {
            return Err(format!("{name}: cell ({}, {}) koszul-tate {} vs bar {}", bad.p, bad.q, bad.koszul_tate_dim, bad.bar_dim));
        }
        check(code == 0 && report.edge_cells_excluded.is_empty(), || format!("{name}: exit {code}, {} edge cells", report.edge_cells_excluded.len()))?;
        compared += report.cells.len();
    }
    Ok(format!("{compared} cells agree, exact (limit 120 s total)"))
}

fn criterion_4() -> Result<String, String> {
    let cfg = config("bv", "exterior_2gen_deg5_char2", Some(4), None, None);
    let (doc, code) = cmd_bv(&cfg).map_err(|e| e.message().to_string())?;
    check(code == 0, || format!("bv exit {code}"))?;
    let one = vec![("1".to_string(), 1u32)];
    let mut checked = 0;
    for i in 1..=2 {
        for j in 1..=2 {
            let e = bv_entry(&doc, &format!("y{i}.nu{j}*"))?;
            let want = if i == j { one.clone() } else { Vec::new() };
            check(e.delta == want && e.status == ResolutionStatus::Determined, || format!("Δ(y{i}.nu{j}*) = {:?} [{:?}]", e.delta, e.status))?;
            checked += 1;
        }
    }
    for label in ["nu1*", "nu2*", "nu1*^2", "nu1*.nu2*", "nu2*^2", "y1", "y2", "y1.y2"] {
        let e = bv_entry(&doc, label)?;
        check(e.delta.is_empty() && e.status == ResolutionStatus::Determined, || format!("Δ({label}) = {:?} [{:?}]", e.delta, e.status))?;
        checked += 1;
    }
    for y in ["y1", "y2"] {
        let e = doc
            .extension_report
            .iter()
            .find(|e| e.operation == "product" && e.operands == [y, y])
            .ok_or_else(|| format!("no product entry for {y}²"))?;
        check(e.value.is_empty() && e.status == ResolutionStatus::Determined, || format!("{y}² = {:?} [{:?}]", e.value, e.status))?;
        checked += 1;
    }
    let cfg = config("bv", "exterior_2gen_deg3_char2", Some(4), None, None);
    let (doc, _) = cmd_bv(&cfg).map_err(|e| e.message().to_string())?;
    let basis: BTreeSet<String> = (0..=3u32).map(|l| label_of((3, [l, 3 - l]))).collect();
    for i in 1..=2 {
        for j in 1..=2 {
            let e = bv_entry(&doc, &format!("y{j}.nu{i}*"))?;
            let amb: BTreeSet<String> = e.ambiguity.iter().cloned().collect();
            check(e.status == ResolutionStatus::Ambiguous && amb == basis, || format!("Δ(y{j}.nu{i}*): [{:?}] {:?}", e.status, e.ambiguity))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} entries exact (limit 60 s)"))
}

fn criterion_5() -> Result<String, String> {
    let mut compared = 0;
    for (name, n) in [("exterior_2gen_deg5_char2", 5), ("exterior_2gen_deg3_char2", 3)] {
        let cfg = config("bv", name, Some(4), None, None);
        let (doc, _) = cmd_bv(&cfg).map_err(|e| e.message().to_string())?;
        for e in &doc.bv_table {
            if e.cell.0 + e.cell.1 < -2 * n + 2 {
                continue;
            }
            let graded = e.graded_delta.as_ref().ok_or("no solver value")?;
            check(&e.delta == graded, || format!("{name}: Δ({}) bar {:?} vs solver {:?}", e.class, e.delta, graded))?;
            compared += 1;
        }
    }
    Ok(format!("{compared} classes agree, exact"))
}

fn criterion_6() -> Result<String, String> {
    let corpus = verify::default_corpus();
    let results = verify::run_all(&corpus, 0, false);
    let failed: Vec<String> = results.iter().filter(|r| !r.passed).map(|r| format!("{}: {}", r.name, r.witness.clone().unwrap_or_default())).collect();
    check(failed.is_empty(), || failed.join("; "))?;
    let summary: Vec<String> = results.iter().map(|r| format!("{}={}", r.name, r.checked)).collect();
    Ok(format!("{} suites pass ({}) (limit 300 s)", results.len(), summary.join(", ")))
}

fn criterion_7() -> Result<String, String> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../presentations");
    let mut names: Vec<String> = std::fs::read_dir(&dir)
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.starts_with("exterior_"))
        .map(|n| n.trim_end_matches(".json").to_string())
        .collect();
    names.sort();
    for name in &names {
        let cfg = config("compute", name, None, None, None);
        let (doc, _) = cmd_compute(&cfg).map_err(|e| e.message().to_string())?;
        let cert = doc.certificate.ok_or("no certificate")?;
        check(cert.collapsed && cert.verdict == "collapse forced by bidegree", || format!("{name}: {}", cert.verdict))?;
    }
    let f = PrimeField::new(2).unwrap();
    let w = RingWindow { max_p: 4, q_min: -4, q_max: 4 };
    let counter = BigradedRing::from_table(
        f,
        w,
        vec![RingClass { label: "1".into(), p: 0, q: 0 }, RingClass { label: "z".into(), p: 2, q: -1 }],
        HashMap::new(),
    );
    let report = collapse_certificate(&counter);
    check(!report.collapsed, || "counterexample certified".into())?;
    Ok(format!("{} exterior inputs certified, counterexample declined ({})", names.len(), report.verdict))
}

fn main() {
    let lines = vec![
        criterion(1, "polynomial rings: HH = K[x] ⊗ ∧(u*)", 50, criterion_1),
        criterion(2, "∧(y1,y2) deg 5 char 2: dims and products", 10, criterion_2),
        criterion(3, "bar oracle agrees with Koszul–Tate", 120, criterion_3),
        criterion(4, "BV table, deg 5 determined and deg 3 ambiguous", 60, criterion_4),
        criterion(5, "bar-side Δ equals solver Δ", 60, criterion_5),
        criterion(6, "invariant suites", 300, criterion_6),
        criterion(7, "collapse certificates", 60, criterion_7),
    ];
    let mut all = true;
    for l in &lines {
        all &= l.passed;
        println!(
            "criterion {} {:<48} {}  {:>8.3} s / {:>4} s  {}",
            l.id,
            l.name,
            if l.passed { "PASS" } else { "FAIL" },
            l.elapsed.as_secs_f64(),
            l.limit.as_secs(),
            l.detail
        );
    }
    if !all {
        std::process::exit(1);
    }
}
