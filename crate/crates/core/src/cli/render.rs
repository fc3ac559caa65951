//! Plain-text rendering of result documents.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::document::ResultDocument;
use crate::moore_ss::LabeledElement;

pub fn element(e: &LabeledElement) -> String {
    if e.is_empty() {
        return "0".into();
    }
    e.iter().map(|(l, c)| if *c == 1 { l.clone() } else { format!("{c}*{l}") }).collect::<Vec<_>>().join(" + ")
}

/// Dimensions on a grid: one row per `q` (descending), one column per `p`.
fn grid(out: &mut String, dims: &BTreeMap<(i32, i32), usize>) {
    let Some(max_p) = dims.keys().map(|k| k.0).max() else { return };
    let qs: Vec<i32> = {
        let mut v: Vec<i32> = dims.keys().map(|k| k.1).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let _ = write!(out, "{:>6} |", "q\\p");
    for p in 0..=max_p {
        let _ = write!(out, "{p:>5}");
    }
    out.push('\n');
    let _ = writeln!(out, "{}", "-".repeat(8 + 5 * (max_p as usize + 1)));
    for &q in qs.iter().rev() {
        let _ = write!(out, "{q:>6} |");
        for p in 0..=max_p {
            match dims.get(&(p, q)) {
                Some(0) | None => {
                    let _ = write!(out, "{:>5}", ".");
                }
                Some(d) => {
                    let _ = write!(out, "{d:>5}");
                }
            }
        }
        out.push('\n');
    }
}

pub fn text(doc: &ResultDocument) -> String {
    let m = &doc.metadata;
    let mut out = String::new();
    let _ = writeln!(out, "{} {} · {}", m.tool, m.version, m.command);
    let _ = writeln!(out, "presentation {}", m.presentation_hash);
    let _ = writeln!(out, "window P ≤ {}, {} ≤ q ≤ {}, seed {}", m.window.max_filtration, m.window.q_min, m.window.q_max, m.seed);
    let _ = writeln!(out, "diagonal: {}", m.choices.diagonal_convention);
    let _ = writeln!(out, "zeta: {}", m.choices.zeta_construction);
    let _ = writeln!(out, "lifting depth: {}", m.choices.lifting_depth);
    if let Some(fc) = &m.choices.fundamental_class {
        let _ = writeln!(out, "fundamental class: {fc}");
    }
    for n in &m.notes {
        let _ = writeln!(out, "note: {n}");
    }
    if !doc.hh_table.is_empty() {
        out.push_str("\nHH dimensions\n");
        let dims = doc.hh_table.iter().map(|c| ((c.p, c.q), c.dim)).collect();
        grid(&mut out, &dims);
        out.push_str("\nbasis\n");
        for c in doc.hh_table.iter().filter(|c| c.dim > 0) {
            let _ = writeln!(out, "  ({:>2},{:>4})  {}", c.p, c.q, c.basis.join("  "));
        }
    }
    if !doc.product_table.is_empty() {
        out.push_str("\nproducts\n");
        for e in &doc.product_table {
            let _ = writeln!(out, "  {} · {} = {}", e.left, e.right, element(&e.product));
        }
    }
    if !doc.bv_table.is_empty() {
        out.push_str("\nBV operator\n");
        for e in &doc.bv_table {
            let _ = write!(out, "  Δ({}) = {}  [{:?}]", e.class, element(&e.delta), e.status);
            if !e.ambiguity.is_empty() {
                let _ = write!(out, " up to {{{}}}", e.ambiguity.join(", "));
            }
            out.push('\n');
        }
    }
    if !doc.extension_report.is_empty() {
        out.push_str("\nextensions\n");
        for e in doc.extension_report.iter().filter(|e| e.operation == "product") {
            let _ = writeln!(out, "  {} = {}  [{:?}]", e.operands.join(" · "), element(&e.value), e.status);
        }
    }
    if let Some(s) = &doc.bv_sweep {
        let _ = writeln!(
            out,
            "\nBV checks: {} triples, {} identity failures, {} Δ² failures, {} θ rank failures",
            s.triples_checked,
            s.identity_failures.len(),
            s.delta_squared_failures.len(),
            s.theta_rank_failures.len()
        );
    }
    if let Some(o) = &doc.oracle_report {
        let _ = writeln!(out, "\noracle (bar length {}, largest cell ≈ {}): {}", o.bar_length, o.estimated_largest_cell, if o.agree { "agree" } else { "MISMATCH" });
        for c in o.cells.iter().filter(|c| !c.agree) {
            let _ = writeln!(out, "  ({}, {}): koszul-tate {} vs bar {}", c.p, c.q, c.koszul_tate_dim, c.bar_dim);
        }
        if let Some(n) = &o.note {
            let _ = writeln!(out, "  {n}");
        }
    }
    if let Some(c) = &doc.certificate {
        let _ = writeln!(out, "\ncollapse: {} ({})", c.collapsed, c.verdict);
    }
    if !doc.invariants.is_empty() {
        out.push_str("\ninvariants\n");
        for r in &doc.invariants {
            let _ = write!(out, "  {:<40} {:>4}  {:>8} checked", r.name, if r.passed { "ok" } else { "FAIL" }, r.checked);
            if let Some(w) = &r.witness {
                let _ = write!(out, "  witness: {w}");
            }
            out.push('\n');
        }
    }
    out
}
