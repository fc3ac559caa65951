//! Normalized bar complex, Hochschild cochains with coefficients in `A` or
//! `A^∨`, and Hochschild chains with the Connes operator and shuffle product.
//!
//! Basis elements of `A` are numbered globally by [`BasisTables`]; id 0 is the
//! unit. A bar word is a list of ids of the augmentation ideal. A cochain is a
//! sparse map from `(word, value id)` to coefficients; for `A^∨` coefficients
//! the value id `v` stands for the dual functional `v*`, of degree `-|v|`.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::fp_linalg::{
    cohomology_cell, independent_columns, LinalgError, PrimeField, SparseMatrix, SubquotientBasis,
};
use crate::graded_algebra::{AlgebraPresentation, GradedAlgebra, Monomial};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BarError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("cochains of different shapes cannot be combined: {0}")]
    Shape(String),
}

/// Global numbering of a monomial basis of `A` with a cached product table.
#[derive(Debug, Clone)]
pub struct BasisTables {
    alg: GradedAlgebra,
    elements: Vec<Monomial>,
    degrees: Vec<i32>,
    ids: HashMap<Monomial, u32>,
    by_degree: Vec<Vec<u32>>,
    products: Vec<Vec<(u32, u32)>>,
    n: usize,
}

impl BasisTables {
    pub fn new(alg: GradedAlgebra) -> Self {
        let mut elements = Vec::new();
        let mut degrees = Vec::new();
        let mut by_degree = Vec::new();
        for d in 0..=alg.bound() {
            let mut ids = Vec::new();
            for m in alg.basis(d) {
                ids.push(elements.len() as u32);
                elements.push(m.clone());
                degrees.push(d);
            }
            by_degree.push(ids);
        }
        let ids = elements.iter().enumerate().map(|(i, m)| (m.clone(), i as u32)).collect();
        let n = elements.len();
        let mut t = BasisTables { alg, elements, degrees, ids, by_degree, products: Vec::new(), n };
        let mut products = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                let d = t.degrees[a] + t.degrees[b];
                let entry = if d > t.alg.bound() {
                    Vec::new()
                } else {
                    let local = t.alg.mul_basis(&t.elements[a], &t.elements[b]).expect("product within bound");
                    local.into_iter().map(|(i, c)| (t.by_degree[d as usize][i], c)).collect()
                };
                products.push(entry);
            }
        }
        t.products = products;
        t
    }

    pub fn algebra(&self) -> &GradedAlgebra {
        &self.alg
    }

    pub fn field(&self) -> &PrimeField {
        self.alg.field()
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn degree(&self, id: u32) -> i32 {
        self.degrees[id as usize]
    }

    pub fn monomial(&self, id: u32) -> &Monomial {
        &self.elements[id as usize]
    }

    pub fn id(&self, m: &Monomial) -> Option<u32> {
        self.ids.get(m).copied()
    }

    pub fn of_degree(&self, d: i32) -> &[u32] {
        if d < 0 || d as usize >= self.by_degree.len() {
            return &[];
        }
        &self.by_degree[d as usize]
    }

    /// Largest degree covered by the tables.
    pub fn bound(&self) -> i32 {
        self.alg.bound()
    }

    /// Whether products leaving the tables are genuinely zero.
    pub fn is_complete(&self) -> bool {
        self.alg.is_complete()
    }

    pub fn min_positive_degree(&self) -> Option<i32> {
        (1..self.by_degree.len()).find(|&d| !self.by_degree[d].is_empty()).map(|d| d as i32)
    }

    /// Product in the global basis. For incomplete tables the caller must keep
    /// the sum of degrees within [`BasisTables::bound`].
    pub fn mul(&self, a: u32, b: u32) -> &[(u32, u32)] {
        debug_assert!(
            self.is_complete() || self.degree(a) + self.degree(b) <= self.bound(),
            "product beyond the table bound"
        );
        &self.products[a as usize * self.n + b as usize]
    }

    pub fn label(&self, id: u32) -> String {
        self.alg.presentation().monomial_name(&self.elements[id as usize])
    }
}

/// Which bimodule the cochains take values in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Coefficients {
    Algebra,
    Dual,
}

impl BasisTables {
    /// Degree of a coefficient basis element.
    pub fn value_degree(&self, coeffs: Coefficients, v: u32) -> i32 {
        match coeffs {
            Coefficients::Algebra => self.degree(v),
            Coefficients::Dual => -self.degree(v),
        }
    }

    /// Basis of the coefficient module in a given degree.
    pub fn values_of_degree(&self, coeffs: Coefficients, d: i32) -> &[u32] {
        match coeffs {
            Coefficients::Algebra => self.of_degree(d),
            Coefficients::Dual => self.of_degree(-d),
        }
    }

    /// `a · v` for `v` in the coefficient module. On `A^∨`:
    /// `⟨a·α; h⟩ = (−1)^{|a|} ⟨α; h a⟩`.
    pub fn left_act(&self, coeffs: Coefficients, a: u32, v: u32) -> Vec<(u32, u32)> {
        match coeffs {
            Coefficients::Algebra => self.mul(a, v).to_vec(),
            Coefficients::Dual => {
                let f = self.field();
                let s = f.sign(self.degree(a) as i64);
                let mut out = Vec::new();
                for &h in self.of_degree(self.degree(v) - self.degree(a)) {
                    if let Some(&(_, c)) = self.mul(h, a).iter().find(|&&(m, _)| m == v) {
                        out.push((h, f.mul(s, c)));
                    }
                }
                out
            }
        }
    }

    /// `v · b`. On `A^∨`: `⟨α·b; h⟩ = ⟨α; b h⟩`.
    pub fn right_act(&self, coeffs: Coefficients, v: u32, b: u32) -> Vec<(u32, u32)> {
        match coeffs {
            Coefficients::Algebra => self.mul(v, b).to_vec(),
            Coefficients::Dual => {
                let mut out = Vec::new();
                for &h in self.of_degree(self.degree(v) - self.degree(b)) {
                    if let Some(&(_, c)) = self.mul(b, h).iter().find(|&&(m, _)| m == v) {
                        out.push((h, c));
                    }
                }
                out
            }
        }
    }
}

/// Sum of entry degrees of a word.
pub fn word_weight(t: &BasisTables, word: &[u32]) -> i32 {
    word.iter().map(|&a| t.degree(a)).sum()
}

/// Bar degree `Σ(|a_i| − 1)` of a word.
pub fn word_degree(t: &BasisTables, word: &[u32]) -> i32 {
    word_weight(t, word) - word.len() as i32
}

/// Words of length `len` with weight in `[lo, hi]`, lexicographic in ids.
pub fn words(t: &BasisTables, len: usize, lo: i32, hi: i32) -> Vec<Vec<u32>> {
    fn rec(t: &BasisTables, len: usize, lo: i32, hi: i32, min_deg: i32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        let w = word_weight(t, cur);
        if cur.len() == len {
            if w >= lo && w <= hi {
                out.push(cur.clone());
            }
            return;
        }
        let left = (len - cur.len() - 1) as i32 * min_deg;
        for a in 1..t.len() as u32 {
            if w + t.degree(a) + left > hi {
                continue;
            }
            cur.push(a);
            rec(t, len, lo, hi, min_deg, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    let Some(min_deg) = t.min_positive_degree() else {
        if len == 0 && lo <= 0 && 0 <= hi {
            out.push(Vec::new());
        }
        return out;
    };
    if hi < lo {
        return out;
    }
    rec(t, len, lo, hi, min_deg, &mut Vec::new(), &mut out);
    out
}

/// An element `a[a_1|…|a_k]b` of the two-sided bar construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BarWord {
    pub left: u32,
    pub word: Vec<u32>,
    pub right: u32,
}

pub type BarChain = BTreeMap<BarWord, u32>;

fn add_to<K: Ord>(map: &mut BTreeMap<K, u32>, k: K, c: u32, f: &PrimeField) {
    if c == 0 {
        return;
    }
    match map.entry(k) {
        std::collections::btree_map::Entry::Occupied(mut e) => {
            let v = f.add(*e.get(), c);
            if v == 0 {
                e.remove();
            } else {
                *e.get_mut() = v;
            }
        }
        std::collections::btree_map::Entry::Vacant(e) => {
            e.insert(c);
        }
    }
}

/// A face of `d(1[a_1|…|a_k]1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Face {
    Left(u32, Vec<u32>),
    Inner(Vec<u32>),
    Right(Vec<u32>, u32),
}

/// `d(1[w]1)` as signed faces, with inner products expanded in the basis.
pub fn faces(t: &BasisTables, word: &[u32]) -> Vec<(u32, Face)> {
    let f = t.field();
    let k = word.len();
    let mut out = Vec::new();
    if k == 0 {
        return out;
    }
    out.push((1, Face::Left(word[0], word[1..].to_vec())));
    let mut eps = 0i64;
    for i in 1..k {
        eps += (t.degree(word[i - 1]) - 1) as i64;
        for &(c, coef) in t.mul(word[i - 1], word[i]) {
            if c == 0 {
                continue;
            }
            let mut w = Vec::with_capacity(k - 1);
            w.extend_from_slice(&word[..i - 1]);
            w.push(c);
            w.extend_from_slice(&word[i + 1..]);
            out.push((f.mul(f.sign(eps), coef), Face::Inner(w)));
        }
    }
    out.push((f.neg(f.sign(eps)), Face::Right(word[..k - 1].to_vec(), word[k - 1])));
    out
}

/// The bar differential on `a[a_1|…|a_k]b` (coefficients have zero differential).
pub fn bar_differential(t: &BasisTables, x: &BarWord) -> BarChain {
    let f = t.field();
    let a_deg = t.degree(x.left) as i64;
    let mut out = BarChain::new();
    for (s, face) in faces(t, &x.word) {
        match face {
            Face::Left(a1, rest) => {
                let s = f.mul(s, f.sign(a_deg));
                for &(m, c) in t.mul(x.left, a1) {
                    add_to(&mut out, BarWord { left: m, word: rest.clone(), right: x.right }, f.mul(s, c), f);
                }
            }
            Face::Inner(w) => {
                let s = f.mul(s, f.sign(a_deg));
                add_to(&mut out, BarWord { left: x.left, word: w, right: x.right }, s, f);
            }
            Face::Right(w, ak) => {
                let s = f.mul(s, f.sign(a_deg));
                for &(m, c) in t.mul(ak, x.right) {
                    add_to(&mut out, BarWord { left: x.left, word: w.clone(), right: m }, f.mul(s, c), f);
                }
            }
        }
    }
    out
}

pub fn bar_differential_chain(t: &BasisTables, x: &BarChain) -> BarChain {
    let f = t.field();
    let mut out = BarChain::new();
    for (w, &c) in x {
        for (w2, c2) in bar_differential(t, w) {
            add_to(&mut out, w2, f.mul(c, c2), f);
        }
    }
    out
}

/// One `(p, q)` cell of the cochain complex: maps from length-`p` words to the
/// coefficient module raising total degree by `p + q`.
#[derive(Debug, Clone)]
pub struct CochainCell {
    pub p: usize,
    pub q: i32,
    pub coeffs: Coefficients,
    pub basis: Vec<(Vec<u32>, u32)>,
    index: HashMap<(Vec<u32>, u32), usize>,
}

impl CochainCell {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn index_of(&self, word: &[u32], value: u32) -> Option<usize> {
        self.index.get(&(word.to_vec(), value)).copied()
    }

    pub fn to_vector(&self, c: &HochschildCochain) -> Vec<u32> {
        let mut v = vec![0; self.dim()];
        for ((w, val), &x) in &c.values {
            if let Some(i) = self.index_of(w, *val) {
                v[i] = x;
            }
        }
        v
    }

    pub fn from_vector(&self, v: &[u32]) -> HochschildCochain {
        let mut values = BTreeMap::new();
        for (i, &x) in v.iter().enumerate() {
            if x != 0 {
                values.insert(self.basis[i].clone(), x);
            }
        }
        HochschildCochain { p: self.p, q: self.q, coeffs: self.coeffs, values }
    }
}

/// A homogeneous Hochschild cochain, stored by its values on basis words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HochschildCochain {
    pub p: usize,
    pub q: i32,
    pub coeffs: Coefficients,
    pub values: BTreeMap<(Vec<u32>, u32), u32>,
}

impl HochschildCochain {
    pub fn zero(p: usize, q: i32, coeffs: Coefficients) -> Self {
        HochschildCochain { p, q, coeffs, values: BTreeMap::new() }
    }

    pub fn total_degree(&self) -> i32 {
        self.p as i32 + self.q
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn add_term(&mut self, word: Vec<u32>, value: u32, c: u32, f: &PrimeField) {
        add_to(&mut self.values, (word, value), c, f);
    }

    pub fn add(&self, other: &HochschildCochain, f: &PrimeField) -> Result<HochschildCochain, BarError> {
        if (self.p, self.q, self.coeffs) != (other.p, other.q, other.coeffs) {
            return Err(BarError::Shape(format!(
                "({}, {}) vs ({}, {})",
                self.p, self.q, other.p, other.q
            )));
        }
        let mut out = self.clone();
        for (k, &c) in &other.values {
            add_to(&mut out.values, k.clone(), c, f);
        }
        Ok(out)
    }

    pub fn scale(&self, s: u32, f: &PrimeField) -> HochschildCochain {
        let mut out = HochschildCochain::zero(self.p, self.q, self.coeffs);
        for (k, &c) in &self.values {
            add_to(&mut out.values, k.clone(), f.mul(s, c), f);
        }
        out
    }
}

/// The bar construction over a fixed set of basis tables.
#[derive(Debug, Clone)]
pub struct BarComplex {
    tables: BasisTables,
}

impl BarComplex {
    pub fn new(alg: GradedAlgebra) -> Self {
        BarComplex { tables: BasisTables::new(alg) }
    }

    /// Tables through `bound`, clipped at the top degree for finite `A`.
    pub fn for_presentation(pres: &AlgebraPresentation, bound: i32) -> Self {
        BarComplex::new(GradedAlgebra::new(pres, bound))
    }

    pub fn tables(&self) -> &BasisTables {
        &self.tables
    }

    pub fn field(&self) -> &PrimeField {
        self.tables.field()
    }

    /// Weight range of words carrying nonzero cochains in cell `(p, q)`.
    fn weight_range(&self, coeffs: Coefficients, p: usize, q: i32, cap: Option<i32>) -> (i32, i32) {
        let t = &self.tables;
        let min_w = p as i32 * t.min_positive_degree().unwrap_or(1);
        let top = t.bound();
        let (lo, hi) = match coeffs {
            Coefficients::Algebra => ((-q).max(min_w), top - q),
            Coefficients::Dual => ((-q - top).max(min_w), -q),
        };
        match cap {
            Some(c) => (lo, hi.min(c)),
            None => (lo, hi),
        }
    }

    pub fn cochain_cell(&self, coeffs: Coefficients, p: usize, q: i32, cap: Option<i32>) -> CochainCell {
        let t = &self.tables;
        let (lo, hi) = self.weight_range(coeffs, p, q, cap);
        let mut basis = Vec::new();
        if t.min_positive_degree().is_some() || p == 0 {
            for w in words(t, p, lo, hi) {
                let vd = word_weight(t, &w) + q;
                for &v in t.values_of_degree(coeffs, vd) {
                    basis.push((w.clone(), v));
                }
            }
        }
        let index = basis.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        CochainCell { p, q, coeffs, basis, index }
    }

    /// Matrix of `∂f = −(−1)^{|f|} f ∘ d_B` from `src` to `tgt`; rows outside
    /// `tgt` are dropped, sources outside `src` count as zero.
    pub fn differential_matrix(&self, src: &CochainCell, tgt: &CochainCell) -> SparseMatrix {
        let t = &self.tables;
        let f = t.field();
        assert_eq!(src.p + 1, tgt.p);
        assert_eq!(src.q, tgt.q);
        let coeffs = src.coeffs;
        let fdeg = (src.p as i32 + src.q) as i64;
        let pre = f.neg(f.sign(fdeg));
        let mut by_word: BTreeMap<&[u32], Vec<(usize, u32)>> = BTreeMap::new();
        for (i, (w, v)) in src.basis.iter().enumerate() {
            by_word.entry(w.as_slice()).or_default().push((i, *v));
        }
        let mut target_words: Vec<&Vec<u32>> = tgt.basis.iter().map(|(w, _)| w).collect();
        target_words.dedup();
        let mut triplets = Vec::new();
        for w in target_words {
            for (s, face) in faces(t, w) {
                let s = f.mul(s, pre);
                match face {
                    Face::Left(a1, rest) => {
                        let s = f.mul(s, f.sign(fdeg * t.degree(a1) as i64));
                        for &(col, v) in by_word.get(rest.as_slice()).into_iter().flatten() {
                            for (v2, c) in t.left_act(coeffs, a1, v) {
                                if let Some(row) = tgt.index_of(w, v2) {
                                    triplets.push((row, col, f.mul(s, c)));
                                }
                            }
                        }
                    }
                    Face::Inner(w2) => {
                        for &(col, v) in by_word.get(w2.as_slice()).into_iter().flatten() {
                            if let Some(row) = tgt.index_of(w, v) {
                                triplets.push((row, col, s));
                            }
                        }
                    }
                    Face::Right(w2, ak) => {
                        for &(col, v) in by_word.get(w2.as_slice()).into_iter().flatten() {
                            for (v2, c) in t.right_act(coeffs, v, ak) {
                                if let Some(row) = tgt.index_of(w, v2) {
                                    triplets.push((row, col, f.mul(s, c)));
                                }
                            }
                        }
                    }
                }
            }
        }
        SparseMatrix::from_triplets_summed(tgt.dim(), src.dim(), triplets, f)
    }

    /// `∂f` for a cochain supported on a finite algebra's full cell.
    pub fn cochain_differential(&self, c: &HochschildCochain) -> HochschildCochain {
        let src = self.cochain_cell(c.coeffs, c.p, c.q, None);
        let tgt = self.cochain_cell(c.coeffs, c.p + 1, c.q, None);
        let m = self.differential_matrix(&src, &tgt);
        tgt.from_vector(&m.apply(&src.to_vector(c), self.field()))
    }

    /// Front–back cup product
    /// `(f⌣g)[a_1|…|a_{p+p'}] = (−1)^{|g|(Σ_{i≤p}|a_i| − p)} f[a_1|…|a_p]·g[a_{p+1}|…]`.
    /// `f` takes values in `A`; the product lands in the coefficients of `g`.
    pub fn cup(&self, fc: &HochschildCochain, g: &HochschildCochain) -> Result<HochschildCochain, BarError> {
        if fc.coeffs != Coefficients::Algebra {
            return Err(BarError::Shape("the left factor must take values in A".into()));
        }
        let t = &self.tables;
        let f = t.field();
        let gdeg = g.total_degree() as i64;
        let mut out = HochschildCochain::zero(fc.p + g.p, fc.q + g.q, g.coeffs);
        for ((w1, v1), &c1) in &fc.values {
            let s = f.sign(gdeg * word_degree(t, w1) as i64);
            for ((w2, v2), &c2) in &g.values {
                let mut w = w1.clone();
                w.extend_from_slice(w2);
                for (v, c) in t.left_act(g.coeffs, *v1, *v2) {
                    out.add_term(w.clone(), v, f.mul(f.mul(s, c), f.mul(c1, c2)), f);
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DegreeWindow {
    pub max_p: usize,
    pub q_min: i32,
    pub q_max: i32,
}

/// Homology of one `(p, q)` cell with representative cocycles.
#[derive(Debug, Clone)]
pub struct HomologyCell {
    pub p: usize,
    pub q: i32,
    pub dim: usize,
    /// Set when the value could not be certified by the weight-stabilization test.
    pub edge: bool,
    pub representatives: Vec<HochschildCochain>,
    pub homology: Option<SubquotientBasis>,
    pub cell: Option<CochainCell>,
}

#[derive(Debug, Clone, Default)]
pub struct BigradedVectorSpace {
    pub cells: BTreeMap<(usize, i32), HomologyCell>,
}

impl BigradedVectorSpace {
    pub fn dim(&self, p: usize, q: i32) -> usize {
        self.cells.get(&(p, q)).map_or(0, |c| c.dim)
    }
}

/// Hochschild cohomology of `A` with coefficients in `A` or `A^∨`, cell by cell.
///
/// For finite `A` each cell is the exact homology of a finite complex. For
/// infinite `A` the cochain spaces are products over word weights; cells are
/// computed as stable images `im(H(C_{≤W'}) → H(C_{≤W}))` for growing `W`,
/// accepting a value once it repeats, and flagged as edge cells otherwise.
pub fn compute_hh_window(
    pres: &AlgebraPresentation,
    coeffs: Coefficients,
    window: DegreeWindow,
) -> Result<BigradedVectorSpace, BarError> {
    if window.q_min > window.q_max {
        return Err(BarError::WindowTooSmall(format!("q range [{}, {}] is empty", window.q_min, window.q_max)));
    }
    if pres.is_finite() {
        let bar = BarComplex::for_presentation(pres, pres.top_degree().unwrap());
        return finite_window(&bar, coeffs, window);
    }
    if coeffs == Coefficients::Dual {
        return Err(BarError::WindowTooSmall("A^∨ coefficients need a finite-dimensional algebra".into()));
    }
    infinite_window(pres, window)
}

pub fn finite_window(
    bar: &BarComplex,
    coeffs: Coefficients,
    window: DegreeWindow,
) -> Result<BigradedVectorSpace, BarError> {
    let f = *bar.field();
    let mut out = BigradedVectorSpace::default();
    for q in window.q_min..=window.q_max {
        let cells: Vec<CochainCell> = (0..=window.max_p + 1).map(|p| bar.cochain_cell(coeffs, p, q, None)).collect();
        let diffs: Vec<SparseMatrix> =
            (0..=window.max_p).map(|p| bar.differential_matrix(&cells[p], &cells[p + 1])).collect();
        for p in 0..=window.max_p {
            let d_in = if p == 0 { SparseMatrix::zero(cells[0].dim(), 0) } else { diffs[p - 1].clone() };
            let h = cohomology_cell(&d_in, &diffs[p], &f)?;
            let representatives = h.representatives.iter().map(|v| cells[p].from_vector(v)).collect();
            out.cells.insert(
                (p, q),
                HomologyCell {
                    p,
                    q,
                    dim: h.dim(),
                    edge: false,
                    representatives,
                    homology: Some(h),
                    cell: Some(cells[p].clone()),
                },
            );
        }
    }
    Ok(out)
}

fn infinite_window(pres: &AlgebraPresentation, window: DegreeWindow) -> Result<BigradedVectorSpace, BarError> {
    let g = pres.max_generator_degree().max(1);
    let rounds = 6;
    let slack = 2 * g;
    let base_max = (-window.q_min).max(0) + (window.max_p as i32 + 1) * g;
    let cap_max = base_max + rounds * g + slack;
    let bar = BarComplex::for_presentation(pres, cap_max + window.q_max.max(0) + 2 * g);
    let f = *bar.field();
    let mut out = BigradedVectorSpace::default();
    for q in window.q_min..=window.q_max {
        for p in 0..=window.max_p {
            let base = (-q).max(0) + p as i32 * g;
            let mut history: Vec<usize> = Vec::new();
            let mut result = None;
            for r in 0..=rounds {
                let w1 = base + r * g;
                let w2 = w1 + slack;
                let d = stable_dim(&bar, p, q, w1, w2, &f);
                history.push(d);
                let n = history.len();
                if n >= 3 && history[n - 1] == history[n - 2] && history[n - 2] == history[n - 3] {
                    result = Some(d);
                    break;
                }
            }
            let (dim, edge) = match result {
                Some(d) => (d, false),
                None => (*history.last().unwrap(), true),
            };
            out.cells.insert((p, q), HomologyCell { p, q, dim, edge, representatives: Vec::new(), homology: None, cell: None });
        }
    }
    Ok(out)
}

/// `dim im(H^{p}(C_{≤w2}) → H^{p}(C_{≤w1}))` for the weight-truncated complexes.
fn stable_dim(bar: &BarComplex, p: usize, q: i32, w1: i32, w2: i32, f: &PrimeField) -> usize {
    let co = Coefficients::Algebra;
    let mid2 = bar.cochain_cell(co, p, q, Some(w2));
    let next2 = bar.cochain_cell(co, p + 1, q, Some(w2));
    let d_out = bar.differential_matrix(&mid2, &next2);
    let kernel = crate::fp_linalg::rank_kernel_image(&d_out, f).kernel;
    let mid1 = bar.cochain_cell(co, p, q, Some(w1));
    let restricted: Vec<Vec<u32>> = kernel
        .iter()
        .map(|z| {
            let mut v = vec![0; mid1.dim()];
            for (i, &x) in z.iter().enumerate() {
                if x != 0 {
                    let (w, val) = &mid2.basis[i];
                    if let Some(j) = mid1.index_of(w, *val) {
                        v[j] = x;
                    }
                }
            }
            v
        })
        .collect();
    let image: Vec<Vec<u32>> = if p == 0 {
        Vec::new()
    } else {
        let prev1 = bar.cochain_cell(co, p - 1, q, Some(w1));
        let d_in = bar.differential_matrix(&prev1, &mid1);
        let r = crate::fp_linalg::rank_kernel_image(&d_in, f);
        r.image
    };
    let b = image.len();
    let mut cols = image;
    cols.extend(restricted);
    let total = independent_columns(mid1.dim(), &cols, f).len();
    total - b
}

/// A Hochschild chain `Σ c · a_0[a_1|…|a_k]`, keyed by `(a_0, word)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HochschildChain {
    pub terms: BTreeMap<(u32, Vec<u32>), u32>,
}

impl HochschildChain {
    pub fn zero() -> Self {
        HochschildChain::default()
    }

    pub fn single(a0: u32, word: Vec<u32>, c: u32) -> Self {
        let mut out = HochschildChain::zero();
        if c != 0 {
            out.terms.insert((a0, word), c);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, a0: u32, word: Vec<u32>, c: u32, f: &PrimeField) {
        add_to(&mut self.terms, (a0, word), c, f);
    }

    pub fn add(&self, other: &HochschildChain, f: &PrimeField) -> HochschildChain {
        let mut out = self.clone();
        for ((a, w), &c) in &other.terms {
            out.add_term(*a, w.clone(), c, f);
        }
        out
    }

    pub fn scale(&self, s: u32, f: &PrimeField) -> HochschildChain {
        let mut out = HochschildChain::zero();
        for ((a, w), &c) in &self.terms {
            out.add_term(*a, w.clone(), f.mul(s, c), f);
        }
        out
    }
}

/// Chains of bar length `k` and internal degree `s = |a_0| + Σ|a_i|`.
#[derive(Debug, Clone)]
pub struct ChainCell {
    pub k: usize,
    pub s: i32,
    pub basis: Vec<(u32, Vec<u32>)>,
    index: HashMap<(u32, Vec<u32>), usize>,
}

impl ChainCell {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn index_of(&self, a0: u32, word: &[u32]) -> Option<usize> {
        self.index.get(&(a0, word.to_vec())).copied()
    }

    pub fn to_vector(&self, c: &HochschildChain) -> Vec<u32> {
        let mut v = vec![0; self.dim()];
        for ((a, w), &x) in &c.terms {
            if let Some(i) = self.index_of(*a, w) {
                v[i] = x;
            }
        }
        v
    }

    pub fn from_vector(&self, v: &[u32]) -> HochschildChain {
        let mut out = HochschildChain::zero();
        for (i, &x) in v.iter().enumerate() {
            if x != 0 {
                let (a, w) = &self.basis[i];
                out.terms.insert((*a, w.clone()), x);
            }
        }
        out
    }
}

impl BarComplex {
    pub fn chain_cell(&self, k: usize, s: i32) -> ChainCell {
        let t = &self.tables;
        let mut basis = Vec::new();
        if k == 0 || t.min_positive_degree().is_some() {
            let lo = k as i32 * t.min_positive_degree().unwrap_or(1);
            for w in words(t, k, lo, s) {
                for &a0 in t.of_degree(s - word_weight(t, &w)) {
                    basis.push((a0, w.clone()));
                }
            }
        }
        basis.sort();
        let index = basis.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        ChainCell { k, s, basis, index }
    }

    /// Hochschild boundary on `A ⊗ T(sĀ)`: the bar differential pushed through
    /// `m ⊗ a x b ↦ ±(b m a) x`, with overall sign `(−1)^{|a_0|}`.
    pub fn hochschild_boundary(&self, c: &HochschildChain) -> HochschildChain {
        let t = &self.tables;
        let f = t.field();
        let mut out = HochschildChain::zero();
        for ((a0, w), &coef) in &c.terms {
            let d0 = t.degree(*a0) as i64;
            let pre = f.mul(coef, f.sign(d0));
            for (s, face) in faces(t, w) {
                let s = f.mul(s, pre);
                match face {
                    Face::Left(a1, rest) => {
                        for &(m, c2) in t.mul(*a0, a1) {
                            out.add_term(m, rest.clone(), f.mul(s, c2), f);
                        }
                    }
                    Face::Inner(w2) => out.add_term(*a0, w2, s, f),
                    Face::Right(w2, ak) => {
                        let dk = t.degree(ak) as i64;
                        let sign = f.sign(dk * word_degree(t, &w2) as i64 + dk * d0);
                        for &(m, c2) in t.mul(ak, *a0) {
                            out.add_term(m, w2.clone(), f.mul(f.mul(s, sign), c2), f);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn boundary_matrix(&self, src: &ChainCell, tgt: &ChainCell) -> SparseMatrix {
        let f = self.field();
        let mut triplets = Vec::new();
        for (col, (a0, w)) in src.basis.iter().enumerate() {
            let img = self.hochschild_boundary(&HochschildChain::single(*a0, w.clone(), 1));
            for ((a, w2), c) in img.terms {
                let row = tgt.index_of(a, &w2).expect("boundary stays in the target cell");
                triplets.push((row, col, c));
            }
        }
        SparseMatrix::from_triplets_summed(tgt.dim(), src.dim(), triplets, f)
    }

    /// Connes operator
    /// `B(a_0[a_1|…|a_k]) = Σ_i ± 1[a_i|…|a_k|a_0|…|a_{i−1}]`, the sign being the
    /// Koszul sign of the cyclic rotation of the suspended entries.
    pub fn connes_boundary(&self, c: &HochschildChain) -> HochschildChain {
        let t = &self.tables;
        let f = t.field();
        let mut out = HochschildChain::zero();
        for ((a0, w), &coef) in &c.terms {
            if *a0 == 0 {
                continue;
            }
            let mut entries = Vec::with_capacity(w.len() + 1);
            entries.push(*a0);
            entries.extend_from_slice(w);
            let sdeg: Vec<i64> = entries.iter().map(|&a| (t.degree(a) - 1) as i64).collect();
            let total: i64 = sdeg.iter().sum();
            let mut before = 0i64;
            for i in 0..entries.len() {
                let mut rotated = entries[i..].to_vec();
                rotated.extend_from_slice(&entries[..i]);
                out.add_term(0, rotated, f.mul(coef, f.sign(before * (total - before))), f);
                before += sdeg[i];
            }
        }
        out
    }

    /// Shuffle product
    /// `a_0[a_1|…|a_p] ∗ b_0[b_1|…|b_q] = (−1)^{|b_0|·Σ|sa_i|} a_0 b_0 Σ_σ ±[σ(a, b)]`.
    pub fn shuffle_product(&self, x: &HochschildChain, y: &HochschildChain) -> HochschildChain {
        let t = &self.tables;
        let f = t.field();
        let mut out = HochschildChain::zero();
        for ((a0, aw), &ca) in &x.terms {
            for ((b0, bw), &cb) in &y.terms {
                let pre = f.mul(f.mul(ca, cb), f.sign(t.degree(*b0) as i64 * word_degree(t, aw) as i64));
                let prods = t.mul(*a0, *b0);
                if prods.is_empty() {
                    continue;
                }
                for (word, sign) in shuffles(t, aw, bw) {
                    for &(m, c) in prods {
                        out.add_term(m, word.clone(), f.mul(f.mul(pre, c), sign), f);
                    }
                }
            }
        }
        out
    }
}

/// All shuffles of two words with their Koszul signs in suspended degrees.
fn shuffles(t: &BasisTables, a: &[u32], b: &[u32]) -> Vec<(Vec<u32>, u32)> {
    let f = t.field();
    let mut out = Vec::new();
    fn rec(
        t: &BasisTables,
        a: &[u32],
        b: &[u32],
        i: usize,
        j: usize,
        cur: &mut Vec<u32>,
        parity: i64,
        out: &mut Vec<(Vec<u32>, i64)>,
    ) {
        if i == a.len() && j == b.len() {
            out.push((cur.clone(), parity));
            return;
        }
        if i < a.len() {
            cur.push(a[i]);
            rec(t, a, b, i + 1, j, cur, parity, out);
            cur.pop();
        }
        if j < b.len() {
            // b_j jumps over the remaining a's.
            let rest: i64 = a[i..].iter().map(|&x| (t.degree(x) - 1) as i64).sum();
            cur.push(b[j]);
            rec(t, a, b, i, j + 1, cur, parity + rest * (t.degree(b[j]) - 1) as i64, out);
            cur.pop();
        }
    }
    let mut raw = Vec::new();
    rec(t, a, b, 0, 0, &mut Vec::new(), 0, &mut raw);
    for (w, par) in raw {
        out.push((w, f.sign(par)));
    }
    out
}

/// Homology of one chain cell `(k, s)`.
#[derive(Debug, Clone)]
pub struct ChainHomologyCell {
    pub k: usize,
    pub s: i32,
    pub cell: ChainCell,
    pub homology: SubquotientBasis,
}

impl ChainHomologyCell {
    pub fn dim(&self) -> usize {
        self.homology.dim()
    }
}

/// `HH_*(A; A)` on the cells `k ≤ max_k`, `s ∈ [s_min, s_max]` of a finite algebra.
pub fn compute_hochschild_homology_window(
    bar: &BarComplex,
    max_k: usize,
    s_min: i32,
    s_max: i32,
) -> Result<BTreeMap<(usize, i32), ChainHomologyCell>, BarError> {
    if s_min > s_max {
        return Err(BarError::WindowTooSmall(format!("s range [{s_min}, {s_max}] is empty")));
    }
    let f = *bar.field();
    let mut out = BTreeMap::new();
    for s in s_min..=s_max {
        let cells: Vec<ChainCell> = (0..=max_k + 1).map(|k| bar.chain_cell(k, s)).collect();
        for k in 0..=max_k {
            let d_in = bar.boundary_matrix(&cells[k + 1], &cells[k]);
            let d_out = if k == 0 {
                SparseMatrix::zero(0, cells[0].dim())
            } else {
                bar.boundary_matrix(&cells[k], &cells[k - 1])
            };
            let homology = cohomology_cell(&d_in, &d_out, &f)?;
            out.insert((k, s), ChainHomologyCell { k, s, cell: cells[k].clone(), homology });
        }
    }
    Ok(out)
}

/// A linear functional on one chain cell, stored by its values on basis chains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainFunctional {
    pub k: usize,
    pub s: i32,
    pub values: BTreeMap<(u32, Vec<u32>), u32>,
}

impl ChainFunctional {
    pub fn evaluate(&self, c: &HochschildChain, f: &PrimeField) -> u32 {
        let mut acc = 0;
        for (k, &x) in &c.terms {
            if let Some(&v) = self.values.get(k) {
                acc = f.add(acc, f.mul(v, x));
            }
        }
        acc
    }
}

impl BarComplex {
    /// `ι(F)(α)(a) = (−1)^{|a||α|} F(a ⊗ α)`, turning a functional on chains of
    /// cell `(k, s)` into a cochain with `A^∨` values in cell `(k, −s)`.
    pub fn iota(&self, fun: &ChainFunctional) -> HochschildCochain {
        let t = &self.tables;
        let f = t.field();
        let mut out = HochschildCochain::zero(fun.k, -fun.s, Coefficients::Dual);
        for ((a0, w), &c) in &fun.values {
            let sign = f.sign(t.degree(*a0) as i64 * word_degree(t, w) as i64);
            out.add_term(w.clone(), *a0, f.mul(c, sign), f);
        }
        out
    }

    pub fn iota_inverse(&self, g: &HochschildCochain) -> ChainFunctional {
        let t = &self.tables;
        let f = t.field();
        assert_eq!(g.coeffs, Coefficients::Dual, "ι is defined on A^∨-valued cochains");
        let mut values = BTreeMap::new();
        for ((w, a0), &c) in &g.values {
            let sign = f.sign(t.degree(*a0) as i64 * word_degree(t, w) as i64);
            add_to(&mut values, (*a0, w.clone()), f.mul(c, sign), f);
        }
        ChainFunctional { k: g.p, s: -g.q, values }
    }

    /// `F ↦ F ∘ B`, from functionals on `(k, s)` to functionals on `(k − 1, s)`.
    pub fn connes_dual(&self, fun: &ChainFunctional) -> ChainFunctional {
        let f = self.field();
        let mut values = BTreeMap::new();
        if fun.k == 0 {
            return ChainFunctional { k: 0, s: fun.s, values };
        }
        let src = self.chain_cell(fun.k - 1, fun.s);
        for (a0, w) in &src.basis {
            let img = self.connes_boundary(&HochschildChain::single(*a0, w.clone(), 1));
            let v = fun.evaluate(&img, f);
            if v != 0 {
                values.insert((*a0, w.clone()), v);
            }
        }
        ChainFunctional { k: fun.k - 1, s: fun.s, values }
    }

    /// `F ↦ −(−1)^{|F|} F ∘ b`, the differential dual to the Hochschild boundary,
    /// where `|F| = −s + k` is the total degree of the matching cochain.
    pub fn dual_boundary(&self, fun: &ChainFunctional) -> ChainFunctional {
        let f = self.field();
        let src = self.chain_cell(fun.k + 1, fun.s);
        let pre = f.neg(f.sign((fun.k as i32 - fun.s) as i64));
        let mut values = BTreeMap::new();
        for (a0, w) in &src.basis {
            let img = self.hochschild_boundary(&HochschildChain::single(*a0, w.clone(), 1));
            let v = f.mul(pre, fun.evaluate(&img, f));
            if v != 0 {
                values.insert((*a0, w.clone()), v);
            }
        }
        ChainFunctional { k: fun.k + 1, s: fun.s, values }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded_algebra::{exterior_algebra, polynomial_algebra, presentation, GenKind};

    fn finite_bar(pres: &AlgebraPresentation) -> BarComplex {
        BarComplex::for_presentation(pres, pres.top_degree().unwrap())
    }

    fn ext2(p: u64, n: u32) -> BarComplex {
        finite_bar(&exterior_algebra(p, 2, n).unwrap())
    }

    #[test]
    fn bar_differential_of_a_generator() {
        let bar = finite_bar(&exterior_algebra(2, 1, 3).unwrap());
        let t = bar.tables();
        let y = t.of_degree(3)[0];
        let d = bar_differential(t, &BarWord { left: 0, word: vec![y], right: 0 });
        let expected: BarChain = [
            (BarWord { left: y, word: vec![], right: 0 }, 1),
            (BarWord { left: 0, word: vec![], right: y }, 1),
        ]
        .into_iter()
        .collect();
        assert_eq!(d, expected);
        assert!(bar_differential(t, &BarWord { left: 0, word: vec![], right: 0 }).is_empty());
    }

    #[test]
    fn bar_differential_squares_to_zero() {
        for p in [2, 3] {
            let bar = ext2(p, 3);
            let t = bar.tables();
            for len in 0..=3 {
                for w in words(t, len, 0, 100) {
                    for a in 0..t.len() as u32 {
                        for b in 0..t.len() as u32 {
                            let x: BarChain = [(BarWord { left: a, word: w.clone(), right: b }, 1)].into_iter().collect();
                            let dd = bar_differential_chain(t, &bar_differential_chain(t, &x));
                            assert!(dd.is_empty(), "p={p} word {w:?}");
                        }
                    }
                }
            }
        }
    }

    fn check_cochain_square(bar: &BarComplex, coeffs: Coefficients, max_p: usize, qs: std::ops::RangeInclusive<i32>) {
        let f = bar.field();
        for q in qs {
            let cells: Vec<CochainCell> = (0..=max_p + 2).map(|p| bar.cochain_cell(coeffs, p, q, None)).collect();
            for p in 0..=max_p {
                let d1 = bar.differential_matrix(&cells[p], &cells[p + 1]);
                let d2 = bar.differential_matrix(&cells[p + 1], &cells[p + 2]);
                assert!(d2.compose(&d1, f).unwrap().entries().is_empty(), "∂² ≠ 0 at ({p}, {q}) {coeffs:?}");
            }
        }
    }

    #[test]
    fn cochain_differential_squares_to_zero() {
        check_cochain_square(&ext2(2, 5), Coefficients::Algebra, 3, -20..=10);
        check_cochain_square(&ext2(3, 3), Coefficients::Algebra, 3, -12..=6);
        check_cochain_square(&ext2(3, 3), Coefficients::Dual, 3, -18..=0);
        let trunc = presentation(3, &[("x", 2, GenKind::Polynomial)], &["x^3"]).unwrap();
        check_cochain_square(&finite_bar(&trunc), Coefficients::Algebra, 3, -12..=4);
        check_cochain_square(&finite_bar(&trunc), Coefficients::Dual, 3, -16..=0);
    }

    #[test]
    fn exterior_one_generator_cells() {
        let pres = exterior_algebra(2, 1, 3).unwrap();
        let hh = compute_hh_window(&pres, Coefficients::Algebra, DegreeWindow { max_p: 4, q_min: -15, q_max: 5 }).unwrap();
        for p in 0..=4usize {
            for q in -15..=5 {
                let expected = usize::from(q == -3 * p as i32 || q == -3 * p as i32 + 3);
                assert_eq!(hh.dim(p, q), expected, "cell ({p}, {q})");
            }
        }
        let cell = &hh.cells[&(1, -3)];
        let bar = finite_bar(&pres);
        let y = bar.tables().of_degree(3)[0];
        let rep = &cell.representatives[0];
        assert_eq!(rep.values.get(&(vec![y], 0)), Some(&1));
    }

    #[test]
    fn polynomial_oracle_single_variable() {
        for p in [2u64, 3] {
            let pres = polynomial_algebra(p, 1, 2).unwrap();
            let hh =
                compute_hh_window(&pres, Coefficients::Algebra, DegreeWindow { max_p: 3, q_min: -12, q_max: 12 }).unwrap();
            for pp in 0..=3usize {
                for q in -12..=12 {
                    let expected = match pp {
                        0 => usize::from(q >= 0 && q % 2 == 0),
                        1 => usize::from(q >= -2 && q % 2 == 0),
                        _ => 0,
                    };
                    let cell = &hh.cells[&(pp, q)];
                    assert_eq!(cell.dim, expected, "p={p} cell ({pp}, {q})");
                    assert!(!cell.edge);
                }
            }
        }
    }

    #[test]
    fn cup_is_a_chain_map_and_associative() {
        let bar = ext2(3, 3);
        let f = *bar.field();
        let cells: Vec<CochainCell> = (0..=2)
            .flat_map(|p| (-6..=6).map(move |q| (p, q)))
            .map(|(p, q)| bar.cochain_cell(Coefficients::Algebra, p, q, None))
            .filter(|c| c.dim() > 0)
            .collect();
        let elems: Vec<HochschildCochain> =
            cells.iter().flat_map(|c| (0..c.dim()).map(move |i| { let mut v = vec![0; c.dim()]; v[i] = 1; c.from_vector(&v) })).collect();
        for a in elems.iter().step_by(3) {
            for b in elems.iter().step_by(2) {
                let ab = bar.cup(a, b).unwrap();
                let lhs = bar.cochain_differential(&ab);
                let rhs = bar
                    .cup(&bar.cochain_differential(a), b)
                    .unwrap()
                    .add(&bar.cup(a, &bar.cochain_differential(b)).unwrap().scale(f.sign(a.total_degree() as i64), &f), &f)
                    .unwrap();
                assert_eq!(lhs, rhs, "Leibniz fails for {a:?} ⌣ {b:?}");
            }
        }
        for a in elems.iter().step_by(5) {
            for b in elems.iter().step_by(4) {
                for c in elems.iter().step_by(7) {
                    let l = bar.cup(&bar.cup(a, b).unwrap(), c).unwrap();
                    let r = bar.cup(a, &bar.cup(b, c).unwrap()).unwrap();
                    assert_eq!(l, r);
                }
            }
        }
    }

    #[test]
    fn dual_coefficients_are_a_bimodule_and_cup_is_leibniz() {
        let bar = ext2(3, 3);
        let f = *bar.field();
        let t = bar.tables();
        // (a·α)·b = a·(α·b) and (ab)·α = a·(b·α)
        for a in 0..t.len() as u32 {
            for b in 0..t.len() as u32 {
                for v in 0..t.len() as u32 {
                    let mut l1 = BTreeMap::new();
                    for (x, c) in t.left_act(Coefficients::Dual, a, v) {
                        for (y, c2) in t.right_act(Coefficients::Dual, x, b) {
                            add_to(&mut l1, y, f.mul(c, c2), &f);
                        }
                    }
                    let mut r1 = BTreeMap::new();
                    for (x, c) in t.right_act(Coefficients::Dual, v, b) {
                        for (y, c2) in t.left_act(Coefficients::Dual, a, x) {
                            add_to(&mut r1, y, f.mul(c, c2), &f);
                        }
                    }
                    assert_eq!(l1, r1);
                    let mut l2 = BTreeMap::new();
                    for &(ab, c) in t.mul(a, b) {
                        for (y, c2) in t.left_act(Coefficients::Dual, ab, v) {
                            add_to(&mut l2, y, f.mul(c, c2), &f);
                        }
                    }
                    let mut r2 = BTreeMap::new();
                    for (x, c) in t.left_act(Coefficients::Dual, b, v) {
                        for (y, c2) in t.left_act(Coefficients::Dual, a, x) {
                            add_to(&mut r2, y, f.mul(c, c2), &f);
                        }
                    }
                    assert_eq!(l2, r2);
                }
            }
        }
        let a_cells: Vec<CochainCell> =
            (0..=2).flat_map(|p| (-6..=6).map(move |q| (p, q))).map(|(p, q)| bar.cochain_cell(Coefficients::Algebra, p, q, None)).collect();
        let d_cells: Vec<CochainCell> =
            (0..=1).flat_map(|p| (-12..=0).map(move |q| (p, q))).map(|(p, q)| bar.cochain_cell(Coefficients::Dual, p, q, None)).collect();
        let unit = |c: &CochainCell, i: usize| {
            let mut v = vec![0; c.dim()];
            v[i] = 1;
            c.from_vector(&v)
        };
        for ca in &a_cells {
            for i in 0..ca.dim() {
                let a = unit(ca, i);
                for cd in &d_cells {
                    for j in (0..cd.dim()).step_by(2) {
                        let g = unit(cd, j);
                        let lhs = bar.cochain_differential(&bar.cup(&a, &g).unwrap());
                        let rhs = bar
                            .cup(&bar.cochain_differential(&a), &g)
                            .unwrap()
                            .add(&bar.cup(&a, &bar.cochain_differential(&g)).unwrap().scale(f.sign(a.total_degree() as i64), &f), &f)
                            .unwrap();
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    fn all_chains(bar: &BarComplex, max_k: usize, s_range: std::ops::RangeInclusive<i32>) -> Vec<HochschildChain> {
        let mut out = Vec::new();
        for k in 0..=max_k {
            for s in s_range.clone() {
                for (a0, w) in bar.chain_cell(k, s).basis {
                    out.push(HochschildChain::single(a0, w, 1));
                }
            }
        }
        out
    }

    #[test]
    fn hochschild_boundary_and_connes_relations() {
        for (p, n) in [(2u64, 3u32), (3, 3), (5, 3)] {
            let bar = ext2(p, n);
            let f = *bar.field();
            for c in all_chains(&bar, 3, 0..=18) {
                assert!(bar.hochschild_boundary(&bar.hochschild_boundary(&c)).is_zero(), "b² on {c:?}");
                assert!(bar.connes_boundary(&bar.connes_boundary(&c)).is_zero(), "B² on {c:?}");
                let bb = bar.hochschild_boundary(&bar.connes_boundary(&c));
                let bb2 = bar.connes_boundary(&bar.hochschild_boundary(&c));
                assert!(bb.add(&bb2, &f).is_zero(), "bB + Bb on {c:?} (p = {p})");
            }
        }
        let trunc = presentation(3, &[("x", 2, GenKind::Polynomial)], &["x^3"]).unwrap();
        let bar = finite_bar(&trunc);
        let f = *bar.field();
        for c in all_chains(&bar, 3, 0..=12) {
            assert!(bar.hochschild_boundary(&bar.hochschild_boundary(&c)).is_zero());
            let bb = bar.hochschild_boundary(&bar.connes_boundary(&c));
            let bb2 = bar.connes_boundary(&bar.hochschild_boundary(&c));
            assert!(bb.add(&bb2, &f).is_zero(), "bB + Bb on {c:?}");
        }
    }

    #[test]
    fn connes_examples() {
        let bar = finite_bar(&exterior_algebra(2, 1, 3).unwrap());
        let y = bar.tables().of_degree(3)[0];
        assert_eq!(bar.connes_boundary(&HochschildChain::single(y, vec![], 1)), HochschildChain::single(0, vec![y], 1));
        assert!(bar.connes_boundary(&HochschildChain::single(0, vec![y], 1)).is_zero());
    }

    #[test]
    fn shuffle_examples() {
        let bar = ext2(2, 3);
        let t = bar.tables();
        let (y1, y2) = (t.of_degree(3)[0], t.of_degree(3)[1]);
        let a = HochschildChain::single(y1, vec![], 1);
        let b = HochschildChain::single(0, vec![y2], 1);
        assert_eq!(bar.shuffle_product(&a, &b), HochschildChain::single(y1, vec![y2], 1));
        let c = HochschildChain::single(0, vec![y1], 1);
        let mut expected = HochschildChain::single(0, vec![y1, y2], 1);
        expected.add_term(0, vec![y2, y1], 1, bar.field());
        assert_eq!(bar.shuffle_product(&c, &b), expected);
    }

    #[test]
    fn shuffle_is_associative_and_commutative() {
        let bar = ext2(3, 3);
        let f = *bar.field();
        let t = bar.tables();
        let chains = all_chains(&bar, 2, 0..=9);
        let total = |c: &HochschildChain| -> i64 {
            let ((a0, w), _) = c.terms.iter().next().unwrap();
            (t.degree(*a0) + word_degree(t, w)) as i64
        };
        for x in chains.iter().step_by(2) {
            for y in chains.iter().step_by(3) {
                let xy = bar.shuffle_product(x, y);
                let yx = bar.shuffle_product(y, x);
                assert_eq!(xy, yx.scale(f.sign(total(x) * total(y)), &f));
                for z in chains.iter().step_by(11) {
                    assert_eq!(bar.shuffle_product(&xy, z), bar.shuffle_product(x, &bar.shuffle_product(y, z)));
                }
            }
        }
    }

    #[test]
    fn iota_is_a_chain_isomorphism() {
        for p in [2u64, 3] {
            let bar = ext2(p, 3);
            for k in 0..=2usize {
                for s in 0..=12 {
                    for (a0, w) in bar.chain_cell(k, s).basis {
                        let mut values = BTreeMap::new();
                        values.insert((a0, w), 1);
                        let fun = ChainFunctional { k, s, values };
                        let g = bar.iota(&fun);
                        assert_eq!(bar.iota_inverse(&g), fun);
                        let lhs = bar.iota(&bar.dual_boundary(&fun));
                        let rhs = bar.cochain_differential(&g);
                        assert_eq!(lhs, rhs, "p={p} k={k} s={s}");
                    }
                }
            }
        }
    }

    #[test]
    fn chain_homology_matches_dual_cohomology() {
        for (p, l, n) in [(2u64, 1usize, 3u32), (2, 2, 3), (3, 1, 3)] {
            let pres = exterior_algebra(p, l, n).unwrap();
            let bar = finite_bar(&pres);
            let hom = compute_hochschild_homology_window(&bar, 3, 0, 15).unwrap();
            let co = compute_hh_window(&pres, Coefficients::Dual, DegreeWindow { max_p: 3, q_min: -15, q_max: 0 }).unwrap();
            for ((k, s), cell) in &hom {
                assert_eq!(cell.dim(), co.dim(*k, -s), "({k}, {s})");
            }
            assert_eq!(hom[&(0, 0)].dim(), 1);
        }
    }

    #[test]
    fn connes_is_a_derivation_on_homology() {
        let bar = ext2(2, 3);
        let f = *bar.field();
        let t = bar.tables();
        let hom = compute_hochschild_homology_window(&bar, 3, 0, 12).unwrap();
        let reps: Vec<HochschildChain> = hom
            .values()
            .filter(|c| c.k <= 1)
            .flat_map(|c| c.homology.representatives.iter().map(|v| c.cell.from_vector(v)).collect::<Vec<_>>())
            .collect();
        for x in &reps {
            for y in &reps {
                let xy = bar.shuffle_product(x, y);
                if xy.is_zero() {
                    continue;
                }
                let ((a0, w), _) = x.terms.iter().next().unwrap();
                let sx = f.sign((t.degree(*a0) + word_degree(t, w)) as i64);
                let lhs = bar.connes_boundary(&xy);
                let rhs = bar
                    .shuffle_product(&bar.connes_boundary(x), y)
                    .add(&bar.shuffle_product(x, &bar.connes_boundary(y)).scale(sx, &f), &f);
                let diff = lhs.add(&rhs.scale(f.neg(1), &f), &f);
                let Some((a0, w)) = diff.terms.keys().next() else { continue };
                let (k, s) = (w.len(), t.degree(*a0) + word_weight(t, w));
                if let Some(cell) = hom.get(&(k, s)) {
                    assert!(cell.homology.is_boundary(&cell.cell.to_vector(&diff), &f), "derivation fails on {x:?}, {y:?}");
                }
            }
        }
    }
}
