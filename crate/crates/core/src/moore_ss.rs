//! Filtration bookkeeping for the Moore spectral sequence: the associated
//! bigraded ring, collapse-by-bidegree certificates and the extension solver.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::fp_linalg::PrimeField;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SsError {
    #[error("unknown class {0}")]
    UnknownClass(String),
    #[error("unbounded search: generator {0} makes the monomials of a fixed total degree infinite")]
    Unbounded(String),
    #[error("product {0} * {1} lies outside the computed window")]
    OutsideWindow(String, String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RingClass {
    pub label: String,
    pub p: i32,
    pub q: i32,
}

impl RingClass {
    pub fn total_degree(&self) -> i32 {
        self.p + self.q
    }
}

/// A generator of a free graded-commutative bigraded algebra.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RingGenerator {
    pub name: String,
    pub p: i32,
    pub q: i32,
    pub exterior: bool,
}

impl RingGenerator {
    pub fn total_degree(&self) -> i32 {
        self.p + self.q
    }
}

/// A linear combination of named classes.
pub type LabeledElement = Vec<(String, u32)>;

/// The window over which a ring's cells are listed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RingWindow {
    pub max_p: i32,
    pub q_min: i32,
    pub q_max: i32,
}

impl RingWindow {
    pub fn contains(&self, p: i32, q: i32) -> bool {
        (0..=self.max_p).contains(&p) && (self.q_min..=self.q_max).contains(&q)
    }
}

/// A bigraded ring, either free on generators or given by an explicit table.
#[derive(Debug, Clone)]
pub struct BigradedRing {
    field: PrimeField,
    window: RingWindow,
    classes: Vec<RingClass>,
    index: HashMap<String, usize>,
    generators: Vec<RingGenerator>,
    exponents: Vec<Vec<u32>>,
    table: HashMap<(usize, usize), Vec<(usize, u32)>>,
}

fn monomial_label(gens: &[RingGenerator], exps: &[u32]) -> String {
    let parts: Vec<String> = gens
        .iter()
        .zip(exps)
        .filter(|(_, &e)| e > 0)
        .map(|(g, &e)| if e == 1 { g.name.clone() } else { format!("{}^{e}", g.name) })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join(".")
    }
}

fn bidegree(gens: &[RingGenerator], exps: &[u32]) -> (i32, i32) {
    gens.iter().zip(exps).fold((0, 0), |(p, q), (g, &e)| (p + g.p * e as i32, q + g.q * e as i32))
}

impl BigradedRing {
    /// The free graded-commutative algebra on `gens`, listed through `window`.
    pub fn from_generators(field: PrimeField, gens: Vec<RingGenerator>, window: RingWindow) -> Result<Self, SsError> {
        let mut bounds = Vec::with_capacity(gens.len());
        // Exponents of generators in positive filtration are capped by the window.
        let (mut lo, mut hi) = (0i32, 0i32);
        for g in &gens {
            if g.p > 0 {
                let cap = if g.exterior { 1 } else { (window.max_p / g.p) as u32 };
                lo += (g.q * cap as i32).min(0);
                hi += (g.q * cap as i32).max(0);
            }
        }
        for g in &gens {
            let cap = if g.exterior {
                1
            } else if g.p > 0 {
                (window.max_p / g.p) as u32
            } else if g.q > 0 {
                ((window.q_max - lo).max(0) / g.q) as u32
            } else if g.q < 0 {
                ((hi - window.q_min).max(0) / -g.q) as u32
            } else {
                return Err(SsError::Unbounded(g.name.clone()));
            };
            bounds.push(cap);
        }
        let mut exponents = Vec::new();
        let mut cur = vec![0u32; gens.len()];
        fn rec(i: usize, bounds: &[u32], cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            if i == bounds.len() {
                out.push(cur.clone());
                return;
            }
            for e in 0..=bounds[i] {
                cur[i] = e;
                rec(i + 1, bounds, cur, out);
            }
            cur[i] = 0;
        }
        rec(0, &bounds, &mut cur, &mut exponents);
        exponents.retain(|e| {
            let (p, q) = bidegree(&gens, e);
            window.contains(p, q)
        });
        exponents.sort_by_key(|e| {
            let (p, q) = bidegree(&gens, e);
            (p, q, std::cmp::Reverse(e.clone()))
        });
        let classes: Vec<RingClass> = exponents
            .iter()
            .map(|e| {
                let (p, q) = bidegree(&gens, e);
                RingClass { label: monomial_label(&gens, e), p, q }
            })
            .collect();
        let index = classes.iter().enumerate().map(|(i, c)| (c.label.clone(), i)).collect();
        Ok(BigradedRing { field, window, classes, index, generators: gens, exponents, table: HashMap::new() })
    }

    /// A ring given by its classes and the products of pairs of classes.
    pub fn from_table(
        field: PrimeField,
        window: RingWindow,
        classes: Vec<RingClass>,
        table: HashMap<(usize, usize), Vec<(usize, u32)>>,
    ) -> Self {
        let index = classes.iter().enumerate().map(|(i, c)| (c.label.clone(), i)).collect();
        BigradedRing { field, window, classes, index, generators: Vec::new(), exponents: Vec::new(), table }
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn window(&self) -> RingWindow {
        self.window
    }

    pub fn classes(&self) -> &[RingClass] {
        &self.classes
    }

    pub fn generators(&self) -> &[RingGenerator] {
        &self.generators
    }

    pub fn is_free(&self) -> bool {
        !self.exponents.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn class(&self, label: &str) -> Result<&RingClass, SsError> {
        self.index_of(label).map(|i| &self.classes[i]).ok_or_else(|| SsError::UnknownClass(label.into()))
    }

    pub fn cell(&self, p: i32, q: i32) -> Vec<usize> {
        (0..self.classes.len()).filter(|&i| self.classes[i].p == p && self.classes[i].q == q).collect()
    }

    pub fn dim(&self, p: i32, q: i32) -> usize {
        self.cell(p, q).len()
    }

    /// Cells with at least one class, with their dimensions.
    pub fn cells(&self) -> BTreeMap<(i32, i32), usize> {
        let mut out = BTreeMap::new();
        for c in &self.classes {
            *out.entry((c.p, c.q)).or_insert(0) += 1;
        }
        out
    }

    fn monomial_product(&self, a: &[u32], b: &[u32]) -> Option<(Vec<u32>, u32)> {
        let f = &self.field;
        let mut parity = 0i64;
        for (i, g) in self.generators.iter().enumerate() {
            for j in i + 1..self.generators.len() {
                parity += (b[i] * a[j]) as i64 * (g.total_degree() * self.generators[j].total_degree()) as i64;
            }
        }
        let mut exps = Vec::with_capacity(a.len());
        for (i, g) in self.generators.iter().enumerate() {
            let e = a[i] + b[i];
            if g.exterior && e > 1 {
                return None;
            }
            exps.push(e);
        }
        Some((exps, f.sign(parity)))
    }

    /// Product of two classes; `None` when it leaves the listed window.
    pub fn product(&self, i: usize, j: usize) -> Option<Vec<(usize, u32)>> {
        if !self.is_free() {
            return self.table.get(&(i, j)).cloned();
        }
        let (a, b) = (&self.classes[i], &self.classes[j]);
        if !self.window.contains(a.p + b.p, a.q + b.q) {
            return None;
        }
        match self.monomial_product(&self.exponents[i], &self.exponents[j]) {
            None => Some(Vec::new()),
            Some((e, c)) => {
                let k = self.index_of(&monomial_label(&self.generators, &e))?;
                Some(vec![(k, c)])
            }
        }
    }

    pub fn product_of_labels(&self, a: &str, b: &str) -> Result<LabeledElement, SsError> {
        let i = self.index_of(a).ok_or_else(|| SsError::UnknownClass(a.into()))?;
        let j = self.index_of(b).ok_or_else(|| SsError::UnknownClass(b.into()))?;
        let prod = self.product(i, j).ok_or_else(|| SsError::OutsideWindow(a.into(), b.into()))?;
        Ok(prod.into_iter().map(|(k, c)| (self.classes[k].label.clone(), c)).collect())
    }

    /// Monomials of the free model with the given total degree, filtration at
    /// least `min_filtration`, independent of the listing window.
    fn free_monomials_of_total_degree(&self, total: i32, min_filtration: i32) -> Result<Vec<RingClass>, SsError> {
        let gens = &self.generators;
        let mut pos_cap: Option<i32> = Some(0);
        let mut neg_cap: Option<i32> = Some(0);
        for g in gens {
            let d = g.total_degree();
            if d == 0 && !g.exterior {
                return Err(SsError::Unbounded(g.name.clone()));
            }
            if d > 0 {
                pos_cap = if g.exterior { pos_cap.map(|c| c + d) } else { None };
            } else if d < 0 {
                neg_cap = if g.exterior { neg_cap.map(|c| c - d) } else { None };
            }
        }
        // With polynomial generators on both sides a fixed total degree has
        // infinitely many monomials.
        let (pos_cap, neg_cap) = match (pos_cap, neg_cap) {
            (None, None) => {
                let g = gens.iter().find(|g| !g.exterior && g.total_degree() < 0).expect("negative generator");
                return Err(SsError::Unbounded(g.name.clone()));
            }
            (Some(p), None) => (p, p - total),
            (None, Some(n)) => (total + n, n),
            (Some(p), Some(n)) => (p, n),
        };
        let bounds: Vec<u32> = gens
            .iter()
            .map(|g| {
                let d = g.total_degree();
                if g.exterior {
                    1
                } else if d > 0 {
                    (pos_cap.max(0) / d) as u32
                } else {
                    (neg_cap.max(0) / -d) as u32
                }
            })
            .collect();
        let mut out = Vec::new();
        let mut cur = vec![0u32; gens.len()];
        fn rec(i: usize, bounds: &[u32], cur: &mut Vec<u32>, f: &mut dyn FnMut(&[u32])) {
            if i == bounds.len() {
                f(cur);
                return;
            }
            for e in 0..=bounds[i] {
                cur[i] = e;
                rec(i + 1, bounds, cur, f);
            }
            cur[i] = 0;
        }
        rec(0, &bounds, &mut cur, &mut |e| {
            let (p, q) = bidegree(gens, e);
            if p + q == total && p >= min_filtration {
                out.push(RingClass { label: monomial_label(gens, e), p, q });
            }
        });
        out.sort_by(|a, b| (a.p, &a.label).cmp(&(b.p, &b.label)));
        Ok(out)
    }
}

/// A potentially nonzero `d_r` found by the bidegree scan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PotentialDifferential {
    pub r: i32,
    pub source: (i32, i32),
    pub target: (i32, i32),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CollapseReport {
    pub collapsed: bool,
    pub verdict: String,
    pub window: RingWindow,
    pub potential_differentials: Vec<PotentialDifferential>,
}

/// Checks every `d_r: E_r^{p,q} → E_r^{p+r,q+1−r}`, `r ≥ 2`, whose target lies in the window.
pub fn collapse_certificate(ring: &BigradedRing) -> CollapseReport {
    let cells = ring.cells();
    let w = ring.window();
    let mut potential = Vec::new();
    for &(p, q) in cells.keys() {
        for r in 2..=(w.max_p - p) {
            let target = (p + r, q + 1 - r);
            if cells.contains_key(&target) {
                potential.push(PotentialDifferential { r, source: (p, q), target });
            }
        }
    }
    let collapsed = potential.is_empty();
    let verdict = if collapsed {
        "collapse forced by bidegree".to_string()
    } else {
        format!("{} differential(s) not excluded by bidegree", potential.len())
    };
    CollapseReport { collapsed, verdict, window: w, potential_differentials: potential }
}

/// Classes of the given total degree in filtration at least `min_filtration`.
/// For free rings the search covers every filtration; for tables it covers
/// the listed window.
pub fn ambiguity_basis(ring: &BigradedRing, total_degree: i32, min_filtration: i32) -> Result<Vec<RingClass>, SsError> {
    if ring.is_free() {
        return ring.free_monomials_of_total_degree(total_degree, min_filtration);
    }
    let mut out: Vec<RingClass> = ring
        .classes()
        .iter()
        .filter(|c| c.total_degree() == total_degree && c.p >= min_filtration)
        .cloned()
        .collect();
    out.sort_by(|a, b| (a.p, &a.label).cmp(&(b.p, &b.label)));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ResolutionStatus {
    Determined,
    Ambiguous,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtensionResolution {
    pub status: ResolutionStatus,
    /// The associated graded value, exact when the status is determined.
    pub value: LabeledElement,
    /// Filtration in which the graded value lives.
    pub filtration: i32,
    pub ambiguity: Vec<String>,
}

fn resolution(value: LabeledElement, filtration: i32, ambiguity: Vec<RingClass>) -> ExtensionResolution {
    let status = if ambiguity.is_empty() { ResolutionStatus::Determined } else { ResolutionStatus::Ambiguous };
    ExtensionResolution { status, value, filtration, ambiguity: ambiguity.into_iter().map(|c| c.label).collect() }
}

/// The true product is the graded product plus something of strictly higher filtration.
pub fn resolve_product_extension(ring: &BigradedRing, a: &str, b: &str) -> Result<ExtensionResolution, SsError> {
    let ca = ring.class(a)?.clone();
    let cb = ring.class(b)?.clone();
    let value = ring.product_of_labels(a, b)?;
    let p0 = ca.p + cb.p;
    let amb = ambiguity_basis(ring, ca.total_degree() + cb.total_degree(), p0 + 1)?;
    Ok(resolution(value, p0, amb))
}

/// `Δ` has bidegree `(−1, 0)`: the true value is `Δ_gr(a)` plus classes of
/// total degree `|a| − 1` in filtration above `p(a) − 1`.
pub fn resolve_bv_extension(
    ring: &BigradedRing,
    delta_gr: &BTreeMap<String, LabeledElement>,
    a: &str,
) -> Result<ExtensionResolution, SsError> {
    let ca = ring.class(a)?.clone();
    let value = delta_gr.get(a).cloned().ok_or_else(|| SsError::UnknownClass(format!("Δ({a})")))?;
    let base = ca.p - 1;
    let amb = ambiguity_basis(ring, ca.total_degree() - 1, base + 1)?;
    Ok(resolution(value, base, amb))
}
