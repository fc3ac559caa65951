//! Invariant suites run by `verify`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::document::InvariantResult;
use crate::bar_hochschild::{words, BarComplex, Coefficients, DegreeWindow, HochschildChain, HochschildCochain};
use crate::bv::BvEngine;
use crate::fp_linalg::{cohomology_cell, rank_kernel_image, SparseMatrix};
use crate::graded_algebra::{
    exterior_algebra, polynomial_algebra, presentation, telescoping_zeta, tensor_add, validate_regular_sequence, verify_zeta,
    AlgebraPresentation, GenKind,
};
use crate::koszul_tate::{build_resolution, ChainMapXi, KTResolution};

/// A named presentation used by the suites.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: String,
    pub pres: AlgebraPresentation,
}

fn entry(name: &str, pres: AlgebraPresentation) -> CorpusEntry {
    CorpusEntry { name: name.into(), pres }
}

pub fn default_corpus() -> Vec<CorpusEntry> {
    let truncated = |p: u64, deg: u32, power: u32| {
        let rel = format!("x^{power}");
        presentation(p, &[("x", deg, GenKind::Polynomial)], &[rel.as_str()]).expect("valid truncated polynomial ring")
    };
    vec![
        entry("ext2_deg5_char2", exterior_algebra(2, 2, 5).unwrap()),
        entry("ext2_deg3_char2", exterior_algebra(2, 2, 3).unwrap()),
        entry("ext1_deg3_char3", exterior_algebra(3, 1, 3).unwrap()),
        entry("ext2_deg3_char3", exterior_algebra(3, 2, 3).unwrap()),
        entry("trunc_x2_deg4_char2", truncated(2, 4, 2)),
        entry("trunc_x3_deg2_char3", truncated(3, 2, 3)),
        entry("poly1_deg2_char2", polynomial_algebra(2, 1, 2).unwrap()),
        entry("poly2_deg4_char3", polynomial_algebra(3, 2, 4).unwrap()),
    ]
}

fn result(name: &str, checked: usize, witness: Option<String>) -> InvariantResult {
    InvariantResult { name: name.into(), passed: witness.is_none(), checked, witness }
}

fn bar_for(pres: &AlgebraPresentation) -> (BarComplex, Option<i32>) {
    match pres.top_degree() {
        Some(top) => (BarComplex::for_presentation(pres, top), None),
        None => (BarComplex::for_presentation(pres, 16), Some(16)),
    }
}

/// `d_B ∘ d_B = 0` on bar cochains with both coefficient systems, `p ≤ 3`.
pub fn bar_differential_squares(corpus: &[CorpusEntry]) -> InvariantResult {
    let mut checked = 0;
    for c in corpus {
        let (bar, cap) = bar_for(&c.pres);
        let f = *bar.field();
        let top = c.pres.top_degree().unwrap_or(16);
        let coeffs: &[Coefficients] = if cap.is_none() { &[Coefficients::Algebra, Coefficients::Dual] } else { &[Coefficients::Algebra] };
        for &co in coeffs {
            for q in -3 * top..=top {
                let cells: Vec<_> = (0..=4).map(|p| bar.cochain_cell(co, p, q, cap)).collect();
                for p in 0..3 {
                    let d1 = bar.differential_matrix(&cells[p], &cells[p + 1]);
                    let d2 = bar.differential_matrix(&cells[p + 1], &cells[p + 2]);
                    checked += cells[p].dim();
                    let dd = d2.compose(&d1, &f).expect("composable");
                    if !dd.entries().is_empty() {
                        return result("bar_differential_squares_to_zero", checked, Some(format!("{} {co:?} cell ({p}, {q})", c.name)));
                    }
                }
            }
        }
    }
    result("bar_differential_squares_to_zero", checked, None)
}

fn resolution(c: &CorpusEntry) -> KTResolution {
    build_resolution(&c.pres, c.pres.top_degree().unwrap_or(24)).expect("corpus resolutions build")
}

/// `d ∘ d = 0` on the Koszul–Tate generators' monomials.
pub fn kt_differential_squares(corpus: &[CorpusEntry]) -> InvariantResult {
    let mut checked = 0;
    for c in corpus {
        let res = resolution(c);
        for len in 1..=7 {
            for e in res.emons(len, 64) {
                checked += 1;
                if !res.differential(&res.kt_differential(&e)).is_empty() {
                    return result("koszul_tate_differential_squares_to_zero", checked, Some(format!("{}: {e:?}", c.name)));
                }
            }
        }
    }
    result("koszul_tate_differential_squares_to_zero", checked, None)
}

/// Homology of the resolution vanishes in positive length.
pub fn kt_exactness(corpus: &[CorpusEntry]) -> InvariantResult {
    let mut checked = 0;
    for c in corpus.iter().filter(|c| c.pres.is_finite()) {
        let res = resolution(c);
        let report = res.exactness_check(4, 12).expect("exactness check runs");
        checked += report.cells.len();
        if !report.passed {
            let bad = report.cells.iter().find(|c| c.2 != c.3);
            return result("koszul_tate_resolution_is_exact", checked, Some(format!("{}: {bad:?}", c.name)));
        }
    }
    result("koszul_tate_resolution_is_exact", checked, None)
}

/// `∂D = Dd` for the diagonal on every monomial of length ≤ 7.
pub fn diagonal_chain_map(corpus: &[CorpusEntry]) -> InvariantResult {
    let mut checked = 0;
    for c in corpus {
        let res = resolution(c);
        for len in 1..=7 {
            for e in res.emons(len, 64) {
                checked += 1;
                match res.diagonal_defect(&e) {
                    Ok(d) if d.is_empty() => {}
                    Ok(d) => return result("diagonal_is_a_chain_map", checked, Some(format!("{}: {e:?} defect {d:?}", c.name))),
                    Err(err) => return result("diagonal_is_a_chain_map", checked, Some(format!("{}: {e:?}: {err}", c.name))),
                }
            }
        }
    }
    result("diagonal_is_a_chain_map", checked, None)
}

/// `bB + Bb = 0` on Hochschild chains of length ≤ 3.
pub fn connes_anticommutes(corpus: &[CorpusEntry]) -> InvariantResult {
    let mut checked = 0;
    for c in corpus.iter().filter(|c| c.pres.is_finite()) {
        let (bar, _) = bar_for(&c.pres);
        let f = *bar.field();
        let top = c.pres.top_degree().unwrap();
        for k in 0..=3usize {
            for s in 0..=(k as i32 + 1) * top {
                for (a0, w) in bar.chain_cell(k, s).basis {
                    checked += 1;
                    let x = HochschildChain::single(a0, w.clone(), 1);
                    let lhs = bar.hochschild_boundary(&bar.connes_boundary(&x)).add(&bar.connes_boundary(&bar.hochschild_boundary(&x)), &f);
                    if !lhs.is_zero() {
                        return result("connes_anticommutes_with_b", checked, Some(format!("{}: a0={a0} word={w:?}", c.name)));
                    }
                }
            }
        }
    }
    result("connes_anticommutes_with_b", checked, None)
}

/// The comparison map `ξ` commutes with the differentials through bar length 4.
pub fn xi_chain_map(corpus: &[CorpusEntry]) -> InvariantResult {
    let mut checked = 0;
    for c in corpus.iter().filter(|c| c.pres.is_finite()) {
        let res = resolution(c);
        let xi = ChainMapXi::new(&res, 4);
        for len in 1..=4 {
            for w in words(res.tables(), len, 0, 64) {
                checked += 1;
                match xi.defect(&w) {
                    Ok(d) if d.is_empty() => {}
                    Ok(_) => return result("xi_is_a_chain_map", checked, Some(format!("{}: word {w:?}", c.name))),
                    Err(e) => return result("xi_is_a_chain_map", checked, Some(format!("{}: word {w:?}: {e}", c.name))),
                }
            }
        }
    }
    result("xi_is_a_chain_map", checked, None)
}

/// Seven-term relation on generator triples, `Δ² = 0`, and `θ` bijective per cell.
pub fn bv_suite(corpus: &[CorpusEntry]) -> Vec<InvariantResult> {
    let mut triples = 0;
    let mut classes = 0;
    let mut cells = 0;
    let mut identity = None;
    let mut square = None;
    let mut theta = None;
    for c in corpus.iter().filter(|c| c.pres.is_finite()) {
        let top = c.pres.top_degree().unwrap();
        let window = DegreeWindow { max_p: 3, q_min: -(4 * top).max(12), q_max: (2 * top).max(12) };
        let engine = match BvEngine::new(&c.pres, window, 3) {
            Ok(e) => e,
            Err(e) => {
                identity.get_or_insert(format!("{}: {e}", c.name));
                continue;
            }
        };
        let gens = engine.generator_labels();
        let refs: Vec<&str> = gens.iter().map(String::as_str).collect();
        match engine.check_bv_identities(&refs) {
            Ok(checks) => {
                triples += checks.len();
                if let Some(bad) = checks.iter().find(|k| !k.holds) {
                    identity.get_or_insert(format!("{}: {:?} residual {:?}", c.name, bad.triple, bad.residual));
                }
            }
            Err(e) => {
                identity.get_or_insert(format!("{}: {e}", c.name));
            }
        }
        classes += engine.ring.classes().len();
        match engine.delta_squared_failures() {
            Ok(f) if f.is_empty() => {}
            Ok(f) => {
                square.get_or_insert(format!("{}: {}", c.name, f.join(", ")));
            }
            Err(e) => {
                square.get_or_insert(format!("{}: {e}", c.name));
            }
        }
        for &(p, q) in engine.ring.cells().keys() {
            cells += 1;
            if !matches!(engine.theta_is_bijective(p, q), Ok(true)) {
                theta.get_or_insert(format!("{}: cell ({p}, {q})", c.name));
            }
        }
    }
    vec![
        result("bv_seven_term_relation", triples, identity),
        result("bv_delta_squares_to_zero", classes, square),
        result("theta_is_bijective", cells, theta),
    ]
}

/// A random presentation `K[x_1..x_m]/(ρ_1..ρ_m)` with `ρ_i = x_i^{a_i} + (terms in later variables)`.
/// Distinct pure-power leading terms make the sequence regular.
pub fn random_regular_sequence(rng: &mut ChaCha8Rng) -> AlgebraPresentation {
    let p = *[2u64, 3, 5].choose(rng).unwrap();
    let m = rng.gen_range(1..=3usize);
    let degs: Vec<u32> = (0..m).map(|_| if p == 2 { rng.gen_range(1..=3) } else { 2 * rng.gen_range(1..=2) }).collect();
    let names: Vec<String> = (1..=m).map(|i| format!("x{i}")).collect();
    let mut rels = Vec::new();
    for i in 0..m {
        let a = rng.gen_range(2..=4u32);
        let total = a * degs[i];
        let mut terms = vec![format!("{}^{a}", names[i])];
        for mono in monomials_of_degree(&degs[i + 1..], total) {
            if mono.iter().sum::<u32>() > 1 && rng.gen_bool(0.5) {
                let c = rng.gen_range(1..p);
                let factors: Vec<String> =
                    mono.iter().enumerate().filter(|(_, &e)| e > 0).map(|(j, &e)| format!("{}^{e}", names[i + 1 + j])).collect();
                terms.push(format!("{c}*{}", factors.join("*")));
            }
        }
        rels.push(terms.join(" + "));
    }
    let gens: Vec<(&str, u32, GenKind)> = names.iter().zip(&degs).map(|(n, &d)| (n.as_str(), d, GenKind::Polynomial)).collect();
    let rels: Vec<&str> = rels.iter().map(String::as_str).collect();
    presentation(p, &gens, &rels).expect("random presentation parses")
}

fn monomials_of_degree(degs: &[u32], total: u32) -> Vec<Vec<u32>> {
    if degs.is_empty() {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for e in 0..=total / degs[0] {
        for mut rest in monomials_of_degree(&degs[1..], total - e * degs[0]) {
            rest.insert(0, e);
            out.push(rest);
        }
    }
    out
}

/// ζ satisfies `Σ_j (x_j⊗1 − 1⊗x_j) ζ_j = ρ⊗1 − 1⊗ρ` for random regular sequences.
pub fn zeta_suite(seed: u64, count: usize, corrupt: bool) -> InvariantResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    for k in 0..count {
        let pres = random_regular_sequence(&mut rng);
        let top = pres.top_degree().unwrap_or(0);
        let report = validate_regular_sequence(&pres, top + 1);
        if !report.passed {
            return result("zeta_dual_conditions", checked, Some(format!("sample {k}: sequence not regular ({})", describe(&pres))));
        }
        for (i, rho) in pres.relations.iter().enumerate() {
            checked += 1;
            let mut z = telescoping_zeta(&pres, rho);
            if corrupt && !z.is_empty() {
                let n = pres.n_polynomial();
                tensor_add(&mut z[0], (vec![0; n], vec![0; n]), 1, &pres.field);
            }
            if let Err(e) = verify_zeta(&pres, i, rho, &z) {
                return result("zeta_dual_conditions", checked, Some(format!("sample {k} ({}): {e}", describe(&pres))));
            }
        }
    }
    result("zeta_dual_conditions", checked, None)
}

fn describe(pres: &AlgebraPresentation) -> String {
    let rels: Vec<String> = pres.relations.iter().map(|r| pres.polynomial_name(r)).collect();
    format!("char {}, relations [{}]", pres.field.characteristic(), rels.join(", "))
}

/// `f ⌣ g − (−1)^{|f||g|} g ⌣ f` is a coboundary for random bar cocycles.
pub fn cup_commutativity_suite(corpus: &[CorpusEntry], seed: u64, pairs: usize) -> InvariantResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let finite: Vec<&CorpusEntry> = corpus.iter().filter(|c| c.pres.is_finite()).collect();
    let bars: Vec<BarComplex> = finite.iter().map(|c| bar_for(&c.pres).0).collect();
    // Cells with nonzero cocycle space: (corpus index, p, q, kernel basis).
    let mut pool: Vec<(usize, usize, i32, Vec<Vec<u32>>)> = Vec::new();
    for (ci, bar) in bars.iter().enumerate() {
        let top = finite[ci].pres.top_degree().unwrap();
        let f = *bar.field();
        for p in 0..=2usize {
            for q in (-(p as i32) * top)..=top {
                let cell = bar.cochain_cell(Coefficients::Algebra, p, q, None);
                let next = bar.cochain_cell(Coefficients::Algebra, p + 1, q, None);
                let kernel = rank_kernel_image(&bar.differential_matrix(&cell, &next), &f).kernel;
                if !kernel.is_empty() {
                    pool.push((ci, p, q, kernel));
                }
            }
        }
    }
    let mut checked = 0;
    let mut attempts = 0;
    while checked < pairs && attempts < 100 * pairs {
        attempts += 1;
        let ci = rng.gen_range(0..bars.len());
        let cells: Vec<&(usize, usize, i32, Vec<Vec<u32>>)> = pool.iter().filter(|e| e.0 == ci).collect();
        if cells.is_empty() {
            continue;
        }
        let a = cells[rng.gen_range(0..cells.len())];
        let b = cells[rng.gen_range(0..cells.len())];
        if a.1 + b.1 > 3 {
            continue;
        }
        let bar = &bars[ci];
        let f = *bar.field();
        let random_cocycle = |rng: &mut ChaCha8Rng, e: &(usize, usize, i32, Vec<Vec<u32>>)| -> HochschildCochain {
            let cell = bar.cochain_cell(Coefficients::Algebra, e.1, e.2, None);
            let mut v = vec![0u32; cell.dim()];
            for k in &e.3 {
                let c = rng.gen_range(0..f.characteristic());
                for (x, &y) in v.iter_mut().zip(k) {
                    *x = f.add(*x, f.mul(c, y));
                }
            }
            cell.from_vector(&v)
        };
        let x = random_cocycle(&mut rng, a);
        let y = random_cocycle(&mut rng, b);
        checked += 1;
        let xy = bar.cup(&x, &y).expect("cup of A-valued cochains");
        let yx = bar.cup(&y, &x).expect("cup of A-valued cochains");
        let s = f.sign(x.total_degree() as i64 * y.total_degree() as i64);
        let diff = xy.add(&yx.scale(f.neg(s), &f), &f).expect("same cell");
        let (p, q) = (a.1 + b.1, a.2 + b.2);
        let cell = bar.cochain_cell(Coefficients::Algebra, p, q, None);
        let d_in = if p == 0 {
            SparseMatrix::zero(cell.dim(), 0)
        } else {
            bar.differential_matrix(&bar.cochain_cell(Coefficients::Algebra, p - 1, q, None), &cell)
        };
        let h = cohomology_cell(&d_in, &SparseMatrix::zero(0, cell.dim()), &f).expect("shapes agree");
        if !h.is_boundary(&cell.to_vector(&diff), &f) {
            return result(
                "cup_commutative_modulo_coboundaries",
                checked,
                Some(format!("{}: cocycles in ({}, {}) and ({}, {})", finite[ci].name, a.1, a.2, b.1, b.2)),
            );
        }
    }
    result("cup_commutative_modulo_coboundaries", checked, None)
}

/// Every suite with the default sizes.
pub fn run_all(corpus: &[CorpusEntry], seed: u64, corrupt_zeta: bool) -> Vec<InvariantResult> {
    let mut out = vec![
        bar_differential_squares(corpus),
        kt_differential_squares(corpus),
        kt_exactness(corpus),
        connes_anticommutes(corpus),
        diagonal_chain_map(corpus),
        xi_chain_map(corpus),
    ];
    out.extend(bv_suite(corpus));
    out.push(zeta_suite(seed, 20, corrupt_zeta));
    out.push(cup_commutativity_suite(corpus, seed, 100));
    out
}
