//! The Koszul–Tate resolution `F = Λ⊗Λ⊗Γ[ν]⊗∧(u)⊗Γ[w]` of a graded complete
//! intersection, its diagonal, the Hom complex `A⊗E^∨`, and the comparison
//! map from the bar resolution.
//!
//! Elements of `F`, `F⊗_ΛF`, `F⊗_ΛF⊗_ΛF` all live in one model: a tensor
//! product of `k` copies of `Λ` followed by `k − 1` copies of `E`, multiplied
//! slotwise with Koszul signs. E-slot `s` is flanked by Λ-slots `s` and `s+1`,
//! which is how `⊗_Λ` glues neighbouring factors.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::bar_hochschild::{faces, words, BasisTables, Coefficients, DegreeWindow, Face, HochschildChain, HochschildCochain};
use crate::fp_linalg::{cohomology_cell, solve, LinalgError, PrimeField, SparseMatrix, SubquotientBasis};
use crate::moore_ss::{BigradedRing, RingClass, RingWindow};
use crate::graded_algebra::{
    telescoping_zeta, verify_zeta, AlgebraError, AlgebraPresentation, GradedAlgebra, Monomial,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KtError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("input is not a cycle")]
    NotACycle,
}

/// A monomial `Π γ_{a_i}(ν_i) · Π u_j · Π γ_{c_i}(w_i)` in canonical order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EMon {
    pub nu: Vec<u32>,
    pub u: u64,
    pub w: Vec<u32>,
}

impl EMon {
    pub fn one(l: usize, m: usize) -> Self {
        EMon { nu: vec![0; l], u: 0, w: vec![0; m] }
    }

    pub fn is_one(&self) -> bool {
        self.u == 0 && self.nu.iter().all(|&a| a == 0) && self.w.iter().all(|&c| c == 0)
    }

    /// Homological weight `Σν + |u| + 2Σw`; the filtration degree is its negative.
    pub fn length(&self) -> u32 {
        self.nu.iter().sum::<u32>() + self.u.count_ones() + 2 * self.w.iter().sum::<u32>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KtGeneratorKind {
    DividedPower,
    Exterior,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KtGenerator {
    pub name: String,
    pub kind: KtGeneratorKind,
    pub bidegree: (i32, i32),
}

/// Slot-model monomial: `lam.len()` Λ-slots and `e.len()` E-slots.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TMon {
    pub lam: Vec<u32>,
    pub e: Vec<EMon>,
}

pub type Elem = BTreeMap<TMon, u32>;

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

pub fn elem_add(a: &Elem, b: &Elem, scale: u32, f: &PrimeField) -> Elem {
    let mut out = a.clone();
    for (k, &c) in b {
        add_to(&mut out, k.clone(), f.mul(scale, c), f);
    }
    out
}

/// The resolution data for one presentation, with `Λ = A`.
#[derive(Debug)]
pub struct KTResolution {
    pres: AlgebraPresentation,
    tables: BasisTables,
    /// `ζ_{ij}` as elements of `Λ⊗Λ`, indexed by relation then polynomial generator.
    zeta: Vec<Vec<Vec<(u32, u32, u32)>>>,
    generators: Vec<KtGenerator>,
    diag_cache: RefCell<HashMap<Vec<u32>, Elem>>,
}

impl KTResolution {
    pub fn pres(&self) -> &AlgebraPresentation {
        &self.pres
    }

    pub fn tables(&self) -> &BasisTables {
        &self.tables
    }

    pub fn field(&self) -> &PrimeField {
        self.tables.field()
    }

    pub fn generators(&self) -> &[KtGenerator] {
        &self.generators
    }

    pub fn n_nu(&self) -> usize {
        self.pres.n_exterior()
    }

    pub fn n_u(&self) -> usize {
        self.pres.n_polynomial()
    }

    pub fn n_w(&self) -> usize {
        self.pres.relations.len()
    }

    pub fn one(&self) -> EMon {
        EMon::one(self.n_nu(), self.n_w())
    }

    pub fn internal_degree(&self, e: &EMon) -> i32 {
        let p = &self.pres;
        let mut d = 0;
        for (i, &a) in e.nu.iter().enumerate() {
            d += a as i32 * p.exterior_degree(i);
        }
        for j in 0..self.n_u() {
            if e.u >> j & 1 == 1 {
                d += p.polynomial_degree(j);
            }
        }
        for (i, &c) in e.w.iter().enumerate() {
            d += c as i32 * p.relation_degree(i);
        }
        d
    }

    /// Total degree `internal − length`.
    pub fn total_degree(&self, e: &EMon) -> i32 {
        self.internal_degree(e) - e.length() as i32
    }

    fn u_degree(&self, j: usize) -> i64 {
        (self.pres.polynomial_degree(j) - 1) as i64
    }

    /// Product in `E`: divided powers with binomial coefficients, Koszul sign on `u`.
    pub fn emon_mul(&self, a: &EMon, b: &EMon) -> Option<(EMon, u32)> {
        let f = self.field();
        if a.u & b.u != 0 {
            return None;
        }
        let mut c = 1u32;
        let mut nu = a.nu.clone();
        for (i, &x) in b.nu.iter().enumerate() {
            c = f.mul(c, f.binomial((nu[i] + x) as u64, x as u64));
            nu[i] += x;
        }
        let mut w = a.w.clone();
        for (i, &x) in b.w.iter().enumerate() {
            c = f.mul(c, f.binomial((w[i] + x) as u64, x as u64));
            w[i] += x;
        }
        if c == 0 {
            return None;
        }
        // b's factors move left past a's later ones. ν and w have even total
        // degree away from characteristic 2, so only u crossing u can sign.
        let mut parity = 0i64;
        for j in 0..self.n_u() {
            if b.u >> j & 1 == 1 {
                for k in j + 1..self.n_u() {
                    if a.u >> k & 1 == 1 {
                        parity += self.u_degree(j) * self.u_degree(k);
                    }
                }
            }
        }
        Some((EMon { nu, u: a.u | b.u, w }, f.mul(c, f.sign(parity))))
    }

    fn lam_parity(&self, id: u32) -> i64 {
        self.tables.degree(id) as i64
    }

    fn e_parity(&self, e: &EMon) -> i64 {
        self.total_degree(e) as i64
    }

    fn tmon_unit(&self, k: usize) -> TMon {
        TMon { lam: vec![0; k], e: vec![self.one(); k - 1] }
    }

    /// Product of two slot monomials of the same shape.
    pub fn tmon_mul(&self, x: &TMon, y: &TMon) -> Elem {
        let f = self.field();
        let k = x.lam.len();
        // Slot parities in order: Λ-slots then E-slots.
        let xp: Vec<i64> = x.lam.iter().map(|&l| self.lam_parity(l)).chain(x.e.iter().map(|e| self.e_parity(e))).collect();
        let yp: Vec<i64> = y.lam.iter().map(|&l| self.lam_parity(l)).chain(y.e.iter().map(|e| self.e_parity(e))).collect();
        let mut parity = 0i64;
        let mut later = 0i64;
        for i in (0..xp.len()).rev() {
            parity += yp[i] * later;
            later += xp[i];
        }
        let mut coeff = f.sign(parity);
        let mut e = Vec::with_capacity(x.e.len());
        for (a, b) in x.e.iter().zip(&y.e) {
            match self.emon_mul(a, b) {
                Some((m, c)) => {
                    coeff = f.mul(coeff, c);
                    e.push(m);
                }
                None => return Elem::new(),
            }
        }
        let mut partial: Vec<(Vec<u32>, u32)> = vec![(Vec::with_capacity(k), coeff)];
        for (&a, &b) in x.lam.iter().zip(&y.lam) {
            let prods = self.tables.mul(a, b);
            let mut next = Vec::new();
            for (lam, c) in &partial {
                for &(m, c2) in prods {
                    let mut l = lam.clone();
                    l.push(m);
                    next.push((l, f.mul(*c, c2)));
                }
            }
            partial = next;
            if partial.is_empty() {
                return Elem::new();
            }
        }
        let mut out = Elem::new();
        for (lam, c) in partial {
            add_to(&mut out, TMon { lam, e: e.clone() }, c, f);
        }
        out
    }

    pub fn mul(&self, x: &Elem, y: &Elem) -> Elem {
        let f = self.field();
        let mut out = Elem::new();
        for (a, &ca) in x {
            for (b, &cb) in y {
                for (m, c) in self.tmon_mul(a, b) {
                    add_to(&mut out, m, f.mul(c, f.mul(ca, cb)), f);
                }
            }
        }
        out
    }

    fn single(&self, t: TMon) -> Elem {
        let mut e = Elem::new();
        e.insert(t, 1);
        e
    }

    /// `λ` in Λ-slot `slot` of a shape with `k` Λ-slots.
    pub fn lam_at(&self, k: usize, slot: usize, lam: u32) -> TMon {
        let mut t = self.tmon_unit(k);
        t.lam[slot] = lam;
        t
    }

    /// `e` in E-slot `slot` of a shape with `k` Λ-slots.
    pub fn e_at(&self, k: usize, slot: usize, e: EMon) -> TMon {
        let mut t = self.tmon_unit(k);
        t.e[slot] = e;
        t
    }

    /// Place an element of shape `k'` into shape `k` along a monotone map of
    /// Λ-slots; E-slot `s` goes to `e_map[s]`.
    pub fn embed(&self, x: &Elem, k: usize, lam_map: &[usize], e_map: &[usize]) -> Elem {
        let mut out = Elem::new();
        let f = self.field();
        for (t, &c) in x {
            let mut y = self.tmon_unit(k);
            for (i, &l) in t.lam.iter().enumerate() {
                y.lam[lam_map[i]] = l;
            }
            for (s, e) in t.e.iter().enumerate() {
                y.e[e_map[s]] = e.clone();
            }
            add_to(&mut out, y, c, f);
        }
        out
    }

    fn generator_factors(&self, e: &EMon) -> Vec<EMon> {
        let mut out = Vec::new();
        for (i, &a) in e.nu.iter().enumerate() {
            if a > 0 {
                let mut g = self.one();
                g.nu[i] = a;
                out.push(g);
            }
        }
        for j in 0..self.n_u() {
            if e.u >> j & 1 == 1 {
                let mut g = self.one();
                g.u = 1 << j;
                out.push(g);
            }
        }
        for (i, &c) in e.w.iter().enumerate() {
            if c > 0 {
                let mut g = self.one();
                g.w[i] = c;
                out.push(g);
            }
        }
        out
    }

    /// Differential of a single generator power, as an element of `F` (shape 2).
    fn d_generator(&self, g: &EMon) -> Elem {
        let f = *self.field();
        let mut out = Elem::new();
        if let Some(i) = g.nu.iter().position(|&a| a > 0) {
            let y = self.tables.id(&self.pres.y(i)).expect("generator in tables");
            let mut rest = g.clone();
            rest.nu[i] -= 1;
            let mut dnu = Elem::new();
            dnu.insert(self.lam_at(2, 0, y), 1);
            add_to(&mut dnu, self.lam_at(2, 1, y), f.neg(1), &f);
            return self.mul(&dnu, &self.single(self.e_at(2, 0, rest)));
        }
        if g.u != 0 {
            let j = g.u.trailing_zeros() as usize;
            let x = self.tables.id(&self.pres.x(j)).expect("generator in tables");
            out.insert(self.lam_at(2, 0, x), 1);
            add_to(&mut out, self.lam_at(2, 1, x), f.neg(1), &f);
            return out;
        }
        if let Some(i) = g.w.iter().position(|&c| c > 0) {
            let mut rest = g.clone();
            rest.w[i] -= 1;
            let tail = self.single(self.e_at(2, 0, rest));
            for (j, terms) in self.zeta[i].iter().enumerate() {
                let mut z = Elem::new();
                for &(l, r, c) in terms {
                    let mut t = self.tmon_unit(2);
                    t.lam = vec![l, r];
                    add_to(&mut z, t, c, &f);
                }
                let mut u = self.one();
                u.u = 1 << j;
                let term = self.mul(&self.mul(&z, &self.single(self.e_at(2, 0, u))), &tail);
                out = elem_add(&out, &term, 1, &f);
            }
            return out;
        }
        out
    }

    /// `d` on an E-monomial of `F`, extended as a derivation.
    pub fn kt_differential(&self, e: &EMon) -> Elem {
        let f = *self.field();
        let factors = self.generator_factors(e);
        let mut out = Elem::new();
        let mut parity = 0i64;
        for t in 0..factors.len() {
            let mut acc = self.single(self.tmon_unit(2));
            for g in &factors[..t] {
                acc = self.mul(&acc, &self.single(self.e_at(2, 0, g.clone())));
            }
            acc = self.mul(&acc, &self.d_generator(&factors[t]));
            for g in &factors[t + 1..] {
                acc = self.mul(&acc, &self.single(self.e_at(2, 0, g.clone())));
            }
            out = elem_add(&out, &acc, f.sign(parity), &f);
            parity += self.e_parity(&factors[t]);
        }
        out
    }

    /// The differential on any slot shape: a derivation acting on every E-slot.
    pub fn differential(&self, x: &Elem) -> Elem {
        let f = *self.field();
        let mut out = Elem::new();
        for (t, &c) in x {
            let k = t.lam.len();
            let mut lam_part = self.tmon_unit(k);
            lam_part.lam = t.lam.clone();
            let mut parity: i64 = t.lam.iter().map(|&l| self.lam_parity(l)).sum();
            for s in 0..t.e.len() {
                if t.e[s].is_one() {
                    continue;
                }
                let mut before = lam_part.clone();
                for r in 0..s {
                    before.e[r] = t.e[r].clone();
                }
                let mut after = self.tmon_unit(k);
                for r in s + 1..t.e.len() {
                    after.e[r] = t.e[r].clone();
                }
                let de = self.embed(&self.kt_differential(&t.e[s]), k, &[s, s + 1], &[s]);
                let term = self.mul(&self.mul(&self.single(before), &de), &self.single(after));
                out = elem_add(&out, &term, f.mul(c, f.sign(parity)), &f);
                parity += self.e_parity(&t.e[s]);
            }
        }
        out
    }
}

/// Resolution for `Λ` with basis tables through `bound` (clipped for finite `Λ`).
pub fn build_resolution(pres: &AlgebraPresentation, bound: i32) -> Result<KTResolution, KtError> {
    build_resolution_with(pres, bound, false)
}

/// As [`build_resolution`]; `corrupt_zeta` perturbs ζ before verification so
/// that the check can be exercised.
pub fn build_resolution_with(
    pres: &AlgebraPresentation,
    bound: i32,
    corrupt_zeta: bool,
) -> Result<KTResolution, KtError> {
    let max_rel = (0..pres.relations.len()).map(|i| pres.relation_degree(i)).max().unwrap_or(0);
    let bound = bound.max(max_rel).max(pres.max_generator_degree());
    let tables = BasisTables::new(GradedAlgebra::new(pres, bound));
    let f = pres.field;
    let mut zeta = Vec::new();
    for (i, rho) in pres.relations.iter().enumerate() {
        let mut z = telescoping_zeta(pres, rho);
        if corrupt_zeta && !z.is_empty() {
            let n = pres.n_polynomial();
            crate::graded_algebra::tensor_add(&mut z[0], (vec![0; n], vec![0; n]), 1, &f);
        }
        verify_zeta(pres, i, rho, &z)?;
        let mut per_gen = Vec::new();
        for zj in &z {
            let mut terms: BTreeMap<(u32, u32), u32> = BTreeMap::new();
            for ((l, r), &c) in zj {
                let lm = Monomial { mask: 0, exps: l.clone() };
                let rm = Monomial { mask: 0, exps: r.clone() };
                let alg = tables.algebra();
                let ld = pres.degree(&lm);
                let rd = pres.degree(&rm);
                for (li, lc) in alg.reduce_monomial(&lm)? {
                    for (ri, rc) in alg.reduce_monomial(&rm)? {
                        let lid = tables.of_degree(ld)[li];
                        let rid = tables.of_degree(rd)[ri];
                        add_to(&mut terms, (lid, rid), f.mul(c, f.mul(lc, rc)), &f);
                    }
                }
            }
            per_gen.push(terms.into_iter().map(|((l, r), c)| (l, r, c)).collect());
        }
        zeta.push(per_gen);
    }
    let mut generators = Vec::new();
    for i in 0..pres.n_exterior() {
        generators.push(KtGenerator {
            name: format!("nu{}", i + 1),
            kind: KtGeneratorKind::DividedPower,
            bidegree: (-1, pres.exterior_degree(i)),
        });
    }
    for j in 0..pres.n_polynomial() {
        generators.push(KtGenerator {
            name: format!("u{}", j + 1),
            kind: KtGeneratorKind::Exterior,
            bidegree: (-1, pres.polynomial_degree(j)),
        });
    }
    for i in 0..pres.relations.len() {
        generators.push(KtGenerator {
            name: format!("w{}", i + 1),
            kind: KtGeneratorKind::DividedPower,
            bidegree: (-2, pres.relation_degree(i)),
        });
    }
    Ok(KTResolution { pres: pres.clone(), tables, zeta, generators, diag_cache: RefCell::new(HashMap::new()) })
}

/// Name of a monomial of `Λ` with factors joined by `.`.
pub fn lambda_label(pres: &AlgebraPresentation, m: &Monomial) -> Vec<String> {
    let mut parts = Vec::new();
    for i in 0..pres.n_exterior() {
        if m.mask >> i & 1 == 1 {
            parts.push(pres.exterior_generator(i).name.clone());
        }
    }
    for (j, &e) in m.exps.iter().enumerate() {
        let name = &pres.polynomial_generator(j).name;
        match e {
            0 => {}
            1 => parts.push(name.clone()),
            _ => parts.push(format!("{name}^{e}")),
        }
    }
    parts
}

/// Name of the dual basis element `e*`, written as a monomial in `ν*`, `u*`, `w*`.
pub fn dual_label(e: &EMon, n_u: usize) -> Vec<String> {
    let mut parts = Vec::new();
    let power = |name: String, k: u32| if k == 1 { format!("{name}*") } else { format!("{name}*^{k}") };
    for (i, &a) in e.nu.iter().enumerate() {
        if a > 0 {
            parts.push(power(format!("nu{}", i + 1), a));
        }
    }
    for j in 0..n_u {
        if e.u >> j & 1 == 1 {
            parts.push(format!("u{}*", j + 1));
        }
    }
    for (i, &c) in e.w.iter().enumerate() {
        if c > 0 {
            parts.push(power(format!("w{}", i + 1), c));
        }
    }
    parts
}

/// Exactness of `F` through a window: homology in each length and internal degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactnessReport {
    pub passed: bool,
    /// `(length, internal degree, homology dimension, expected)` for every checked cell.
    pub cells: Vec<(u32, i32, usize, usize)>,
}

impl KTResolution {
    /// E-monomials of the given length with internal degree at most `max_internal`.
    pub fn emons(&self, length: u32, max_internal: i32) -> Vec<EMon> {
        let l = self.n_nu();
        let n = self.n_u();
        let m = self.n_w();
        let mut out = Vec::new();
        let mut cur = self.one();
        #[allow(clippy::too_many_arguments)]
        fn rec(res: &KTResolution, slot: usize, left: u32, cur: &mut EMon, out: &mut Vec<EMon>, max: i32, l: usize, n: usize, m: usize) {
            if res.internal_degree(cur) > max {
                return;
            }
            if slot == l + n + m {
                if left == 0 {
                    out.push(cur.clone());
                }
                return;
            }
            if slot < l {
                for a in 0..=left {
                    cur.nu[slot] = a;
                    rec(res, slot + 1, left - a, cur, out, max, l, n, m);
                }
                cur.nu[slot] = 0;
            } else if slot < l + n {
                let j = slot - l;
                rec(res, slot + 1, left, cur, out, max, l, n, m);
                if left >= 1 {
                    cur.u |= 1 << j;
                    rec(res, slot + 1, left - 1, cur, out, max, l, n, m);
                    cur.u &= !(1 << j);
                }
            } else {
                let i = slot - l - n;
                for c in 0..=left / 2 {
                    cur.w[i] = c;
                    rec(res, slot + 1, left - 2 * c, cur, out, max, l, n, m);
                }
                cur.w[i] = 0;
            }
        }
        rec(self, 0, length, &mut cur, &mut out, max_internal, l, n, m);
        out.sort();
        out
    }

    /// Slot monomials of shape `k` with total E-length `length` and internal degree `internal`.
    pub fn slot_basis(&self, k: usize, length: u32, internal: i32) -> Vec<TMon> {
        let mut by_len: Vec<Vec<EMon>> = Vec::new();
        for len in 0..=length {
            by_len.push(self.emons(len, internal));
        }
        let mut out = Vec::new();
        let mut es: Vec<EMon> = Vec::new();
        self.slot_rec_e(k, length, internal, &by_len, &mut es, &mut out);
        out.sort();
        out
    }

    fn slot_rec_e(&self, k: usize, left: u32, internal: i32, by_len: &[Vec<EMon>], es: &mut Vec<EMon>, out: &mut Vec<TMon>) {
        if es.len() == k - 1 {
            if left != 0 {
                return;
            }
            let used: i32 = es.iter().map(|e| self.internal_degree(e)).sum();
            let mut lam = Vec::new();
            self.slot_rec_lam(k, internal - used, &mut lam, es, out);
            return;
        }
        for len in 0..=left {
            for e in &by_len[len as usize] {
                es.push(e.clone());
                let used: i32 = es.iter().map(|e| self.internal_degree(e)).sum();
                if used <= internal {
                    self.slot_rec_e(k, left - len, internal, by_len, es, out);
                }
                es.pop();
            }
        }
    }

    fn slot_rec_lam(&self, k: usize, left: i32, lam: &mut Vec<u32>, es: &[EMon], out: &mut Vec<TMon>) {
        if left < 0 {
            return;
        }
        if lam.len() == k - 1 {
            for &id in self.tables.of_degree(left) {
                let mut l = lam.clone();
                l.push(id);
                out.push(TMon { lam: l, e: es.to_vec() });
            }
            return;
        }
        for d in 0..=left {
            for &id in self.tables.of_degree(d) {
                lam.push(id);
                self.slot_rec_lam(k, left - d, lam, es, out);
                lam.pop();
            }
        }
    }

    /// Matrix of `d` from `src` to the span of `tgt`; entries outside `tgt` are reported.
    fn d_matrix(&self, src: &[TMon], tgt: &[TMon]) -> Result<SparseMatrix, KtError> {
        let index: HashMap<&TMon, usize> = tgt.iter().enumerate().map(|(i, t)| (t, i)).collect();
        let mut trip = Vec::new();
        for (c, t) in src.iter().enumerate() {
            for (m, v) in self.differential(&self.single(t.clone())) {
                let r = *index.get(&m).ok_or_else(|| KtError::WindowTooSmall(format!("{m:?} outside target basis")))?;
                trip.push((r, c, v));
            }
        }
        Ok(SparseMatrix::from_triplets_summed(tgt.len(), src.len(), trip, self.field()))
    }

    /// Solve `d(x) = rhs` in shape `k`, where `rhs` has length `length − 1`.
    fn solve_boundary(&self, k: usize, length: u32, internal: i32, rhs: &Elem) -> Result<Elem, KtError> {
        if rhs.is_empty() {
            return Ok(Elem::new());
        }
        let src = self.slot_basis(k, length, internal);
        let tgt = self.slot_basis(k, length - 1, internal);
        let m = self.d_matrix(&src, &tgt)?;
        let index: HashMap<&TMon, usize> = tgt.iter().enumerate().map(|(i, t)| (t, i)).collect();
        let mut b = vec![0u32; tgt.len()];
        for (t, &c) in rhs {
            let r = *index.get(t).ok_or_else(|| KtError::WindowTooSmall(format!("{t:?} outside basis")))?;
            b[r] = c;
        }
        let x = solve(&m, &b, self.field()).ok_or(KtError::NotACycle)?;
        Ok(src.into_iter().zip(x).filter(|(_, c)| *c != 0).collect())
    }

    /// Homology of `F` in lengths `0..=max_length` and internal degrees `0..=max_internal`.
    pub fn exactness_check(&self, max_length: u32, max_internal: i32) -> Result<ExactnessReport, KtError> {
        let f = self.field();
        let mut cells = Vec::new();
        let mut passed = true;
        for internal in 0..=max_internal {
            let bases: Vec<Vec<TMon>> = (0..=max_length + 1).map(|len| self.slot_basis(2, len, internal)).collect();
            for len in 0..=max_length {
                let d_out = if len == 0 {
                    SparseMatrix::zero(0, bases[0].len())
                } else {
                    self.d_matrix(&bases[len as usize], &bases[len as usize - 1])?
                };
                let d_in = self.d_matrix(&bases[len as usize + 1], &bases[len as usize])?;
                let h = cohomology_cell(&d_in, &d_out, f)?.dim();
                let expected = if len == 0 { self.tables.of_degree(internal).len() } else { 0 };
                passed &= h == expected;
                cells.push((len, internal, h, expected));
            }
        }
        Ok(ExactnessReport { passed, cells })
    }

    fn d0_generator_power(&self, g: &EMon) -> Elem {
        // Σ_{s+t=a} γ_s ⊗ γ_t on a single divided-power generator, or u⊗1 + 1⊗u.
        let mut out = Elem::new();
        let f = self.field();
        if g.u != 0 {
            let mut t = self.tmon_unit(3);
            t.e[0] = g.clone();
            add_to(&mut out, t.clone(), 1, f);
            t.e.swap(0, 1);
            add_to(&mut out, t, 1, f);
            return out;
        }
        let (is_nu, i, a) = match g.nu.iter().position(|&a| a > 0) {
            Some(i) => (true, i, g.nu[i]),
            None => {
                let i = g.w.iter().position(|&c| c > 0).expect("nontrivial generator");
                (false, i, g.w[i])
            }
        };
        for s in 0..=a {
            let mut t = self.tmon_unit(3);
            if is_nu {
                t.e[0].nu[i] = s;
                t.e[1].nu[i] = a - s;
            } else {
                t.e[0].w[i] = s;
                t.e[1].w[i] = a - s;
            }
            add_to(&mut out, t, 1, f);
        }
        out
    }

    /// The diagonal `D: F → F⊗_ΛF` on an E-monomial. Multiplicative on the
    /// ν and u part; on each w-monomial the divided-power coproduct is
    /// corrected by a linear solve so that `∂D = Dd`.
    pub fn diagonal(&self, e: &EMon) -> Result<Elem, KtError> {
        let mut acc = self.single(self.tmon_unit(3));
        let mut w_part = self.one();
        w_part.w = e.w.clone();
        for g in self.generator_factors(e) {
            if g.w.iter().any(|&c| c > 0) {
                continue;
            }
            acc = self.mul(&acc, &self.d0_generator_power(&g));
        }
        if !w_part.is_one() {
            acc = self.mul(&acc, &self.w_diagonal(&w_part)?);
        }
        Ok(acc)
    }

    fn w_diagonal(&self, w_part: &EMon) -> Result<Elem, KtError> {
        if let Some(x) = self.diag_cache.borrow().get(&w_part.w) {
            return Ok(x.clone());
        }
        let f = *self.field();
        let mut x0 = self.single(self.tmon_unit(3));
        for g in self.generator_factors(w_part) {
            x0 = self.mul(&x0, &self.d0_generator_power(&g));
        }
        let rhs = self.diagonal_of_f(&self.kt_differential(w_part))?;
        let residual = elem_add(&rhs, &self.differential(&x0), f.neg(1), &f);
        let correction = self
            .solve_boundary(3, w_part.length(), self.internal_degree(w_part), &residual)
            .map_err(|_| KtError::Unsupported(format!("no diagonal correction for w-exponents {:?}", w_part.w)))?;
        let x = elem_add(&x0, &correction, 1, &f);
        self.diag_cache.borrow_mut().insert(w_part.w.clone(), x.clone());
        Ok(x)
    }

    /// `D` on an element of `F`, using Λ^e-linearity.
    pub fn diagonal_of_f(&self, x: &Elem) -> Result<Elem, KtError> {
        let f = *self.field();
        let mut out = Elem::new();
        for (t, &c) in x {
            let mut outer = self.tmon_unit(3);
            outer.lam[0] = t.lam[0];
            outer.lam[2] = t.lam[1];
            let term = self.mul(&self.single(outer), &self.diagonal(&t.e[0])?);
            out = elem_add(&out, &term, c, &f);
        }
        Ok(out)
    }

    /// `∂D(e) − D(d e)`; zero when the diagonal is a chain map at `e`.
    pub fn diagonal_defect(&self, e: &EMon) -> Result<Elem, KtError> {
        let f = *self.field();
        let lhs = self.differential(&self.diagonal(e)?);
        let rhs = self.diagonal_of_f(&self.kt_differential(e))?;
        Ok(elem_add(&lhs, &rhs, f.neg(1), &f))
    }

    /// Apply `D` to one E-slot of a shape-3 element, producing shape 4.
    fn diagonal_on_slot(&self, x: &Elem, slot: usize) -> Result<Elem, KtError> {
        let f = *self.field();
        let mut out = Elem::new();
        for (t, &c) in x {
            // Λ-slots: slot `slot` and `slot+1` flank the expanded factor.
            let lam_map: Vec<usize> = (0..3).map(|i| if i <= slot { i } else { i + 1 }).collect();
            let e_map: Vec<usize> = (0..2).map(|s| if s < slot { s } else { s + 1 }).collect();
            let mut base = self.tmon_unit(3);
            base.lam = t.lam.clone();
            let mut e_before = self.tmon_unit(4);
            let mut e_after = self.tmon_unit(4);
            for s in 0..2 {
                if s < slot {
                    e_before.e[e_map[s]] = t.e[s].clone();
                } else if s > slot {
                    e_after.e[e_map[s]] = t.e[s].clone();
                }
            }
            let lam = self.embed(&self.single(base), 4, &lam_map, &e_map);
            let d = self.embed(&self.diagonal(&t.e[slot])?, 4, &[slot, slot + 1, slot + 2], &[slot, slot + 1]);
            let term = self.mul(&self.mul(&self.mul(&lam, &self.single(e_before)), &d), &self.single(e_after));
            out = elem_add(&out, &term, c, &f);
        }
        Ok(out)
    }

    /// `(D⊗1)D(e) − (1⊗D)D(e)`.
    pub fn coassociativity_defect(&self, e: &EMon) -> Result<Elem, KtError> {
        let f = *self.field();
        let d = self.diagonal(e)?;
        let left = self.diagonal_on_slot(&d, 0)?;
        let right = self.diagonal_on_slot(&d, 1)?;
        Ok(elem_add(&left, &right, f.neg(1), &f))
    }
}

/// An element of `A⊗E^∨`: `Σ c · a⊗e*`, stored as `(e, a) → c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KtCochain {
    pub p: usize,
    pub q: i32,
    pub values: BTreeMap<(EMon, u32), u32>,
}

impl KtCochain {
    pub fn zero(p: usize, q: i32) -> Self {
        KtCochain { p, q, values: BTreeMap::new() }
    }

    pub fn basis(p: usize, q: i32, e: EMon, a: u32) -> Self {
        let mut values = BTreeMap::new();
        values.insert((e, a), 1);
        KtCochain { p, q, values }
    }

    pub fn total_degree(&self) -> i32 {
        self.p as i32 + self.q
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// The value on `e` as an element of `A`.
    pub fn at(&self, e: &EMon) -> Vec<(u32, u32)> {
        self.values.range((e.clone(), 0)..=(e.clone(), u32::MAX)).map(|((_, a), &c)| (*a, c)).collect()
    }
}

/// One cell of the Hom complex `A⊗E^∨`.
#[derive(Debug, Clone)]
pub struct KtCell {
    pub p: usize,
    pub q: i32,
    pub basis: Vec<(EMon, u32)>,
    index: HashMap<(EMon, u32), usize>,
}

impl KtCell {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn to_vector(&self, c: &KtCochain) -> Vec<u32> {
        let mut v = vec![0; self.dim()];
        for (k, &x) in &c.values {
            if let Some(&i) = self.index.get(k) {
                v[i] = x;
            }
        }
        v
    }

    pub fn from_vector(&self, v: &[u32]) -> KtCochain {
        let values = v.iter().enumerate().filter(|(_, &x)| x != 0).map(|(i, &x)| (self.basis[i].clone(), x)).collect();
        KtCochain { p: self.p, q: self.q, values }
    }
}

fn a_mul(t: &BasisTables, x: &[(u32, u32)], y: &[(u32, u32)]) -> Vec<(u32, u32)> {
    let f = t.field();
    let mut out = BTreeMap::new();
    for &(a, ca) in x {
        for &(b, cb) in y {
            for &(m, c) in t.mul(a, b) {
                add_to(&mut out, m, f.mul(c, f.mul(ca, cb)), f);
            }
        }
    }
    out.into_iter().collect()
}

impl KTResolution {
    fn require_degree(&self, d: i32) -> Result<(), KtError> {
        if d > self.tables.bound() && !self.tables.is_complete() {
            return Err(KtError::WindowTooSmall(format!("degree {d} beyond table bound {}", self.tables.bound())));
        }
        Ok(())
    }

    pub fn kt_cell(&self, p: usize, q: i32) -> Result<KtCell, KtError> {
        let complete = self.tables.is_complete();
        let cap = if complete { self.tables.bound() - q } else { i32::MAX / 4 };
        let mut basis = Vec::new();
        for e in self.emons(p as u32, cap) {
            let d = q + self.internal_degree(&e);
            if !complete {
                self.require_degree(d)?;
            }
            for &a in self.tables.of_degree(d) {
                basis.push((e.clone(), a));
            }
        }
        let index = basis.iter().cloned().enumerate().map(|(i, b)| (b, i)).collect();
        Ok(KtCell { p, q, basis, index })
    }

    /// `F(x)` for `x ∈ F`, using `F(λ'⊗λ''⊗e) = (−1)^{|F|(|λ'|+|λ''|)} λ'λ''F(e)`.
    pub fn evaluate(&self, c: &KtCochain, x: &Elem) -> Vec<(u32, u32)> {
        let f = self.field();
        let deg = c.total_degree() as i64;
        let mut out = BTreeMap::new();
        for (t, &k) in x {
            let val = c.at(&t.e[0]);
            if val.is_empty() {
                continue;
            }
            let s = f.mul(k, f.sign(deg * (self.lam_parity(t.lam[0]) + self.lam_parity(t.lam[1]))));
            let v = a_mul(&self.tables, &a_mul(&self.tables, &[(t.lam[0], s)], &[(t.lam[1], 1)]), &val);
            for (a, cv) in v {
                add_to(&mut out, a, cv, f);
            }
        }
        out.into_iter().collect()
    }

    /// `∂F = −(−1)^{|F|} F∘d`.
    pub fn cochain_differential(&self, c: &KtCochain) -> Result<KtCochain, KtError> {
        let f = *self.field();
        let p = c.p + 1;
        let mut out = KtCochain::zero(p, c.q);
        let s = f.neg(f.sign(c.total_degree() as i64));
        let tgt = self.kt_cell(p, c.q)?;
        let mut seen = std::collections::BTreeSet::new();
        for (e, _) in &tgt.basis {
            if !seen.insert(e.clone()) {
                continue;
            }
            for (a, v) in self.evaluate(c, &self.kt_differential(e)) {
                add_to(&mut out.values, (e.clone(), a), f.mul(s, v), &f);
            }
        }
        Ok(out)
    }

    pub fn differential_matrix(&self, src: &KtCell, tgt: &KtCell) -> Result<SparseMatrix, KtError> {
        let mut cols = Vec::with_capacity(src.dim());
        for (e, a) in &src.basis {
            let img = self.cochain_differential(&KtCochain::basis(src.p, src.q, e.clone(), *a))?;
            cols.push(tgt.to_vector(&img));
        }
        let f = self.field();
        let trip = cols.iter().enumerate().flat_map(|(c, col)| {
            col.iter().enumerate().filter(|(_, &v)| v != 0).map(move |(r, &v)| (r, c, v))
        });
        Ok(SparseMatrix::from_triplets_summed(tgt.dim(), src.dim(), trip.collect::<Vec<_>>(), f))
    }

    /// `(F⌣G)(e) = μ (F⊗G) D(e)` with `(F⊗G)(x⊗y) = (−1)^{|G||x|} F(x)G(y)`.
    pub fn cup(&self, fc: &KtCochain, g: &KtCochain) -> Result<KtCochain, KtError> {
        let f = *self.field();
        let p = fc.p + g.p;
        let q = fc.q + g.q;
        let mut out = KtCochain::zero(p, q);
        if fc.is_zero() || g.is_zero() {
            return Ok(out);
        }
        let df = fc.total_degree() as i64;
        let dg = g.total_degree() as i64;
        let cell = self.kt_cell(p, q)?;
        let mut seen = std::collections::BTreeSet::new();
        for (e, _) in &cell.basis {
            if !seen.insert(e.clone()) {
                continue;
            }
            for (t, &c) in &self.diagonal(e)? {
                if t.e[0].length() as usize != fc.p {
                    continue;
                }
                let fv = fc.at(&t.e[0]);
                let gv = g.at(&t.e[1]);
                if fv.is_empty() || gv.is_empty() {
                    continue;
                }
                let (l0, l1, l2) = (self.lam_parity(t.lam[0]), self.lam_parity(t.lam[1]), self.lam_parity(t.lam[2]));
                let e1 = self.e_parity(&t.e[0]);
                let parity = e1 * l2 + dg * (l0 + l1 + e1) + df * (l0 + l1) + dg * l2;
                let s = f.mul(c, f.sign(parity));
                let left = a_mul(&self.tables, &a_mul(&self.tables, &[(t.lam[0], s)], &[(t.lam[1], 1)]), &fv);
                let right = a_mul(&self.tables, &[(t.lam[2], 1)], &gv);
                for (a, v) in a_mul(&self.tables, &left, &right) {
                    add_to(&mut out.values, (e.clone(), a), v, &f);
                }
            }
        }
        Ok(out)
    }

    /// Sign relating `e*` to the product of its generator duals:
    /// `u_{j_1}*⋯u_{j_r}* = (−1)^{r(r−1)/2} (u_{j_1}⋯u_{j_r})*` for odd `u`.
    pub fn dual_monomial_sign(&self, e: &EMon) -> u32 {
        let odd = (0..self.n_u()).filter(|&j| e.u >> j & 1 == 1 && self.u_degree(j) % 2 != 0).count() as i64;
        self.field().sign(odd * (odd - 1) / 2)
    }

    /// Label of a basis cochain `a⊗e*`.
    pub fn basis_label(&self, e: &EMon, a: u32) -> String {
        let mut parts = lambda_label(&self.pres, self.tables.monomial(a));
        parts.extend(dual_label(e, self.n_u()));
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join(".")
        }
    }

    pub fn cochain_label(&self, c: &KtCochain) -> String {
        if c.is_zero() {
            return "0".to_string();
        }
        c.values
            .iter()
            .map(|((e, a), &k)| {
                let l = self.basis_label(e, *a);
                if k == 1 { l } else { format!("{k}*{l}") }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// Cohomology of one cell of `A⊗E^∨` with named classes.
#[derive(Debug, Clone)]
pub struct KtHomologyCell {
    pub cell: KtCell,
    pub homology: SubquotientBasis,
    pub labels: Vec<String>,
}

impl KtHomologyCell {
    pub fn dim(&self) -> usize {
        self.homology.dim()
    }

    pub fn class(&self, i: usize) -> KtCochain {
        self.cell.from_vector(&self.homology.representatives[i])
    }
}

#[derive(Debug, Clone)]
pub struct KtHomology {
    pub cells: BTreeMap<(usize, i32), KtHomologyCell>,
}

impl KtHomology {
    pub fn dim(&self, p: usize, q: i32) -> usize {
        self.cells.get(&(p, q)).map_or(0, |c| c.dim())
    }

    /// Coordinates of a cocycle in the class basis of its cell.
    pub fn classify(&self, c: &KtCochain, f: &PrimeField) -> Option<Vec<u32>> {
        let cell = self.cells.get(&(c.p, c.q))?;
        cell.homology.classify(&cell.cell.to_vector(c), f)
    }
}

impl KtHomology {
    /// Classes in cell order, as `(p, q, index within the cell)`.
    pub fn class_positions(&self) -> Vec<(usize, i32, usize)> {
        self.cells.iter().flat_map(|(&(p, q), c)| (0..c.dim()).map(move |i| (p, q, i))).collect()
    }

    /// The bigraded ring of named classes; products are computed by cup
    /// through the diagonal when `with_products` is set.
    pub fn ring(&self, res: &KTResolution, window: DegreeWindow, with_products: bool) -> Result<BigradedRing, KtError> {
        let f = *res.field();
        let positions = self.class_positions();
        let classes: Vec<RingClass> = positions
            .iter()
            .map(|&(p, q, i)| RingClass { label: self.cells[&(p, q)].labels[i].clone(), p: p as i32, q })
            .collect();
        let global: HashMap<(usize, i32, usize), usize> = positions.iter().enumerate().map(|(g, &k)| (k, g)).collect();
        let mut table = HashMap::new();
        if with_products {
            let reps: Vec<KtCochain> = positions.iter().map(|&(p, q, i)| self.cells[&(p, q)].class(i)).collect();
            for (a, ra) in reps.iter().enumerate() {
                for (b, rb) in reps.iter().enumerate() {
                    let (p, q) = (ra.p + rb.p, ra.q + rb.q);
                    if p > window.max_p || q < window.q_min || q > window.q_max {
                        continue;
                    }
                    let prod = res.cup(ra, rb)?;
                    let entry = match self.cells.get(&(p, q)) {
                        None if prod.is_zero() => Vec::new(),
                        None => return Err(KtError::NotACycle),
                        Some(cell) => {
                            let coords = cell.homology.classify(&cell.cell.to_vector(&prod), &f).ok_or(KtError::NotACycle)?;
                            coords.iter().enumerate().filter(|(_, &c)| c != 0).map(|(i, &c)| (global[&(p, q, i)], c)).collect()
                        }
                    };
                    table.insert((a, b), entry);
                }
            }
        }
        let w = RingWindow { max_p: window.max_p as i32, q_min: window.q_min, q_max: window.q_max };
        Ok(BigradedRing::from_table(f, w, classes, table))
    }
}

/// Upper bound for the internal degree of an E-monomial of length at most `max_length`.
fn max_internal(p: &AlgebraPresentation, max_length: u32) -> i32 {
    let u_sum: i32 = (0..p.n_polynomial()).map(|j| p.polynomial_degree(j)).sum();
    let per_unit = (0..p.n_exterior())
        .map(|i| p.exterior_degree(i))
        .chain((0..p.relations.len()).map(|i| (p.relation_degree(i) + 1) / 2))
        .max()
        .unwrap_or(0);
    per_unit * max_length as i32 + u_sum
}

/// Table bound needed for the Hom complex through `window`.
pub fn kt_bound(pres: &AlgebraPresentation, window: DegreeWindow) -> i32 {
    match pres.top_degree() {
        Some(t) => t,
        None => window.q_max.max(0) + max_internal(pres, window.max_p as u32 + 1),
    }
}

/// Hochschild cohomology `HH(Λ;Λ)` from the Koszul–Tate Hom complex.
pub fn hh_via_kt(pres: &AlgebraPresentation, window: DegreeWindow) -> Result<(KTResolution, KtHomology), KtError> {
    let res = build_resolution(pres, kt_bound(pres, window))?;
    let homology = kt_homology(&res, window)?;
    Ok((res, homology))
}

pub fn kt_homology(res: &KTResolution, window: DegreeWindow) -> Result<KtHomology, KtError> {
    let f = *res.field();
    let mut cells = BTreeMap::new();
    for q in window.q_min..=window.q_max {
        let mut prev: Option<KtCell> = None;
        let mut cur = res.kt_cell(0, q)?;
        for p in 0..=window.max_p {
            let next = res.kt_cell(p + 1, q)?;
            let d_out = res.differential_matrix(&cur, &next)?;
            let d_in = match &prev {
                Some(pc) => res.differential_matrix(pc, &cur)?,
                None => SparseMatrix::zero(cur.dim(), 0),
            };
            let mut homology = cohomology_cell(&d_in, &d_out, &f)?;
            let labels = if d_in.entries().is_empty() && d_out.entries().is_empty() {
                // Every basis cochain is a class; sign it so that the label
                // `u1*.u2*` names the cup product of the generator duals.
                homology.representatives = cur
                    .basis
                    .iter()
                    .enumerate()
                    .map(|(i, (e, _))| {
                        let mut v = vec![0; cur.dim()];
                        v[i] = res.dual_monomial_sign(e);
                        v
                    })
                    .collect();
                cur.basis.iter().map(|(e, a)| res.basis_label(e, *a)).collect()
            } else {
                homology.representatives.iter().map(|v| res.cochain_label(&cur.from_vector(v))).collect()
            };
            if cur.dim() > 0 {
                cells.insert((p, q), KtHomologyCell { cell: cur.clone(), homology, labels });
            }
            prev = Some(cur);
            cur = next;
        }
    }
    Ok(KtHomology { cells })
}

/// The comparison map `ξ` from the normalized bar resolution to `F`, lifted
/// length by length by solving `d ξ(w) = ξ(d_B w)`.
#[derive(Debug)]
pub struct ChainMapXi<'a> {
    res: &'a KTResolution,
    depth: usize,
    cache: RefCell<HashMap<Vec<u32>, Elem>>,
}

impl<'a> ChainMapXi<'a> {
    pub fn new(res: &'a KTResolution, depth: usize) -> Self {
        ChainMapXi { res, depth, cache: RefCell::new(HashMap::new()) }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// `ξ(1[w]1)` as an element of `F`.
    pub fn word(&self, w: &[u32]) -> Result<Elem, KtError> {
        let res = self.res;
        if w.is_empty() {
            return Ok(res.single(res.tmon_unit(2)));
        }
        if w.len() > self.depth {
            return Err(KtError::WindowTooSmall(format!("bar length {} beyond lifting depth {}", w.len(), self.depth)));
        }
        if let Some(x) = self.cache.borrow().get(w) {
            return Ok(x.clone());
        }
        let rhs = self.image_of_boundary(w)?;
        let t = res.tables();
        let internal: i32 = w.iter().map(|&a| t.degree(a)).sum();
        let x = res
            .solve_boundary(2, w.len() as u32, internal, &rhs)
            .map_err(|e| match e {
                KtError::NotACycle => KtError::WindowTooSmall(format!("no lift for bar word {w:?}")),
                other => other,
            })?;
        self.cache.borrow_mut().insert(w.to_vec(), x.clone());
        Ok(x)
    }

    /// `ξ(d_B(1[w]1))`.
    pub fn image_of_boundary(&self, w: &[u32]) -> Result<Elem, KtError> {
        let res = self.res;
        let f = *res.field();
        let mut out = Elem::new();
        for (c, face) in faces(res.tables(), w) {
            let term = match face {
                Face::Left(a, rest) => res.mul(&res.single(res.lam_at(2, 0, a)), &self.word(&rest)?),
                Face::Inner(v) => self.word(&v)?,
                Face::Right(v, a) => res.mul(&self.word(&v)?, &res.single(res.lam_at(2, 1, a))),
            };
            out = elem_add(&out, &term, c, &f);
        }
        Ok(out)
    }

    /// `ξ(a[w]b) = a·ξ(1[w]1)·b`.
    pub fn bar_word(&self, a: u32, w: &[u32], b: u32) -> Result<Elem, KtError> {
        let res = self.res;
        let x = res.mul(&res.single(res.lam_at(2, 0, a)), &self.word(w)?);
        Ok(res.mul(&x, &res.single(res.lam_at(2, 1, b))))
    }

    /// `d ξ(w) − ξ(d_B w)`; zero for a chain map.
    pub fn defect(&self, w: &[u32]) -> Result<Elem, KtError> {
        let f = *self.res.field();
        let lhs = self.res.differential(&self.word(w)?);
        Ok(elem_add(&lhs, &self.image_of_boundary(w)?, f.neg(1), &f))
    }

    /// The bar cochain `G∘ξ` in cell `(G.p, G.q)`.
    pub fn pullback(&self, g: &KtCochain) -> Result<HochschildCochain, KtError> {
        let res = self.res;
        let t = res.tables();
        let f = *res.field();
        let mut out = HochschildCochain::zero(g.p, g.q, Coefficients::Algebra);
        let top = t.bound();
        for w in words(t, g.p, -g.q, top - g.q) {
            for (v, c) in res.evaluate(g, &self.word(&w)?) {
                out.add_term(w.clone(), v, c, &f);
            }
        }
        Ok(out)
    }

    /// `φ(a_0[w]) = a_0 ⊗_{Λ^e} ξ(1[w]1)` in `A⊗E`, keyed by `(a, e)`.
    pub fn phi(&self, c: &HochschildChain) -> Result<BTreeMap<(u32, EMon), u32>, KtError> {
        let res = self.res;
        let t = res.tables();
        let f = *res.field();
        let mut out = BTreeMap::new();
        for ((a0, w), &k) in &c.terms {
            for (m, &c2) in &self.word(w)? {
                let (l1, l2) = (m.lam[0], m.lam[1]);
                let s = f.sign(res.lam_parity(l2) * (res.lam_parity(*a0) + res.lam_parity(l1)));
                let v = a_mul(t, &a_mul(t, &[(l2, 1)], &[(*a0, 1)]), &[(l1, 1)]);
                for (a, cv) in v {
                    add_to(&mut out, (a, m.e[0].clone()), f.mul(cv, f.mul(s, f.mul(k, c2))), &f);
                }
            }
        }
        Ok(out)
    }
}
