//! Poincaré duality data and the BV operator `Δ = θ⁻¹ ∘ ι ∘ B^∨ ∘ ι⁻¹ ∘ θ` on
//! `HH(A;A)` of a Poincaré duality algebra, with `θ = − ⌣ ω^∨`.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::bar_hochschild::{finite_window, BarComplex, BarError, BigradedVectorSpace, Coefficients, DegreeWindow, HochschildCochain};
use crate::fp_linalg::{independent_columns, solve, PrimeField, SparseMatrix};
use crate::graded_algebra::{AlgebraPresentation, Monomial};
use crate::koszul_tate::{hh_via_kt, lambda_label, ChainMapXi, EMon, KTResolution, KtError, KtHomology};
use crate::moore_ss::{BigradedRing, LabeledElement, RingClass, SsError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BvError {
    #[error("not a Poincaré duality algebra: {0}")]
    NotPoincare(String),
    #[error("pairing is degenerate in degree {0}")]
    Degenerate(i32),
    #[error(transparent)]
    Bar(#[from] BarError),
    #[error(transparent)]
    Kt(#[from] KtError),
    #[error(transparent)]
    Ss(#[from] SsError),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("window too small: {0}")]
    WindowTooSmall(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PoincareDualityData {
    pub dimension: i32,
    pub omega: u32,
    pub omega_label: String,
}

impl PoincareDualityData {
    /// `ω^∨` as a length-zero cochain with `A^∨` values.
    pub fn omega_dual(&self) -> HochschildCochain {
        let mut c = HochschildCochain::zero(0, -self.dimension, Coefficients::Dual);
        c.values.insert((Vec::new(), self.omega), 1);
        c
    }

    /// `⟨a, b⟩`, the coefficient of `ω` in `ab`.
    pub fn pairing(&self, bar: &BarComplex, a: u32, b: u32) -> u32 {
        bar.tables().mul(a, b).iter().find(|&&(m, _)| m == self.omega).map_or(0, |&(_, c)| c)
    }
}

fn label_of(pres: &AlgebraPresentation, m: &Monomial) -> String {
    let parts = lambda_label(pres, m);
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join(".")
    }
}

/// Fundamental class and a nondegeneracy check of the top-degree pairing.
pub fn build_pd(bar: &BarComplex) -> Result<PoincareDualityData, BvError> {
    let t = bar.tables();
    let pres = t.algebra().presentation();
    let d = pres.top_degree().ok_or_else(|| BvError::NotPoincare("the algebra is infinite-dimensional".into()))?;
    let top = t.of_degree(d);
    if top.len() != 1 {
        return Err(BvError::NotPoincare(format!("top degree {d} has dimension {}", top.len())));
    }
    let pd = PoincareDualityData { dimension: d, omega: top[0], omega_label: label_of(pres, t.monomial(top[0])) };
    let f = t.field();
    for k in 0..=d {
        let rows = t.of_degree(k);
        let cols = t.of_degree(d - k);
        if rows.len() != cols.len() {
            return Err(BvError::Degenerate(k));
        }
        let dense: Vec<Vec<u32>> = rows.iter().map(|&a| cols.iter().map(|&b| pd.pairing(bar, a, b)).collect()).collect();
        let m = SparseMatrix::from_dense(&dense, f);
        if crate::fp_linalg::rank(&m, f) != rows.len() {
            return Err(BvError::Degenerate(k));
        }
    }
    Ok(pd)
}

/// `θ(f) = f ⌣ ω^∨`.
pub fn cap_theta(bar: &BarComplex, pd: &PoincareDualityData, f: &HochschildCochain) -> Result<HochschildCochain, BvError> {
    Ok(bar.cup(f, &pd.omega_dual())?)
}

/// `ι ∘ B^∨ ∘ ι⁻¹ ∘ θ` at cochain level: an `A^∨`-valued cocycle one length lower.
pub fn dual_connes_of_theta(bar: &BarComplex, pd: &PoincareDualityData, f: &HochschildCochain) -> Result<HochschildCochain, BvError> {
    let theta = cap_theta(bar, pd, f)?;
    let functional = bar.iota_inverse(&theta);
    Ok(bar.iota(&bar.connes_dual(&functional)))
}

/// Result of checking the seven-term relation on one triple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BvIdentityCheck {
    pub triple: [String; 3],
    pub holds: bool,
    pub residual: LabeledElement,
}

type Vector = BTreeMap<usize, u32>;

/// Everything needed to evaluate `Δ` on the named classes of `HH(A;A)`.
#[derive(Debug)]
pub struct BvEngine {
    pub pres: AlgebraPresentation,
    pub window: DegreeWindow,
    pub pd: PoincareDualityData,
    pub ring: BigradedRing,
    res: KTResolution,
    kt: KtHomology,
    bar: BarComplex,
    oracle: BigradedVectorSpace,
    oracle_dual: BigradedVectorSpace,
    /// Bar representative of each ring class.
    bar_reps: Vec<HochschildCochain>,
    /// For each cell, the classes in it (global indices).
    cells: HashMap<(i32, i32), Vec<usize>>,
}

impl BvEngine {
    pub fn new(pres: &AlgebraPresentation, window: DegreeWindow, lifting_depth: usize) -> Result<Self, BvError> {
        let (res, kt) = hh_via_kt(pres, window)?;
        let ring = kt.ring(&res, window, true)?;
        let bar = BarComplex::new(res.tables().algebra().clone());
        let pd = build_pd(&bar)?;
        if window.max_p > lifting_depth {
            return Err(BvError::WindowTooSmall(format!(
                "filtration {} exceeds the lifting depth {lifting_depth}",
                window.max_p
            )));
        }
        let oracle = finite_window(&bar, Coefficients::Algebra, window)?;
        let dual_window = DegreeWindow { max_p: window.max_p, q_min: window.q_min - pd.dimension, q_max: window.q_max - pd.dimension };
        let oracle_dual = finite_window(&bar, Coefficients::Dual, dual_window)?;
        let xi = ChainMapXi::new(&res, lifting_depth);
        let mut bar_reps = Vec::new();
        for (p, q, i) in kt.class_positions() {
            bar_reps.push(xi.pullback(&kt.cells[&(p, q)].class(i))?);
        }
        let mut cells: HashMap<(i32, i32), Vec<usize>> = HashMap::new();
        for (g, c) in ring.classes().iter().enumerate() {
            cells.entry((c.p, c.q)).or_default().push(g);
        }
        Ok(BvEngine { pres: pres.clone(), window, pd, ring, res, kt, bar, oracle, oracle_dual, bar_reps, cells })
    }

    pub fn field(&self) -> &PrimeField {
        self.bar.field()
    }

    pub fn bar(&self) -> &BarComplex {
        &self.bar
    }

    pub fn resolution(&self) -> &KTResolution {
        &self.res
    }

    pub fn kt_homology(&self) -> &KtHomology {
        &self.kt
    }

    pub fn bar_representative(&self, class: usize) -> &HochschildCochain {
        &self.bar_reps[class]
    }

    fn coords(&self, space: &BigradedVectorSpace, c: &HochschildCochain) -> Result<Vec<u32>, BvError> {
        let cell = space
            .cells
            .get(&(c.p, c.q))
            .ok_or_else(|| BvError::WindowTooSmall(format!("cell ({}, {}) outside the oracle window", c.p, c.q)))?;
        let (Some(h), Some(basis)) = (&cell.homology, &cell.cell) else {
            return Err(BvError::WindowTooSmall("oracle cell without representatives".into()));
        };
        h.classify(&basis.to_vector(c), self.field())
            .ok_or_else(|| BvError::Unsupported(format!("cochain in ({}, {}) is not a cocycle", c.p, c.q)))
    }

    /// Coordinates of a bar cocycle with `A` values in the named class basis.
    pub fn classify(&self, c: &HochschildCochain) -> Result<Vector, BvError> {
        let f = *self.field();
        let members = self.cells.get(&(c.p as i32, c.q)).cloned().unwrap_or_default();
        let target = self.coords(&self.oracle, c)?;
        let cols: Vec<Vec<u32>> = members.iter().map(|&g| self.coords(&self.oracle, &self.bar_reps[g])).collect::<Result<_, _>>()?;
        let m = SparseMatrix::from_columns(target.len(), &cols);
        let x = solve(&m, &target, &f).ok_or_else(|| BvError::Unsupported("class outside the named basis".into()))?;
        Ok(members.into_iter().zip(x).filter(|(_, c)| *c != 0).collect())
    }

    /// `θ` is bijective on a cell when the images of the named classes are
    /// independent and span the `A^∨` cell.
    pub fn theta_is_bijective(&self, p: i32, q: i32) -> Result<bool, BvError> {
        let members = self.cells.get(&(p, q)).cloned().unwrap_or_default();
        let target_dim = self.oracle_dual.dim(p as usize, q - self.pd.dimension);
        let cols: Vec<Vec<u32>> = members
            .iter()
            .map(|&g| self.coords(&self.oracle_dual, &cap_theta(&self.bar, &self.pd, &self.bar_reps[g])?))
            .collect::<Result<_, _>>()?;
        Ok(independent_columns(target_dim, &cols, self.field()).len() == members.len() && members.len() == target_dim)
    }

    /// `Δ` of a named class, computed through the bar complex.
    pub fn delta(&self, class: usize) -> Result<Vector, BvError> {
        let f = *self.field();
        let c = &self.ring.classes()[class];
        if c.p == 0 {
            return Ok(Vector::new());
        }
        let h = dual_connes_of_theta(&self.bar, &self.pd, &self.bar_reps[class])?;
        let target = self.coords(&self.oracle_dual, &h)?;
        let members = self.cells.get(&(c.p - 1, c.q)).cloned().unwrap_or_default();
        let cols: Vec<Vec<u32>> = members
            .iter()
            .map(|&g| self.coords(&self.oracle_dual, &cap_theta(&self.bar, &self.pd, &self.bar_reps[g])?))
            .collect::<Result<_, _>>()?;
        let m = SparseMatrix::from_columns(target.len(), &cols);
        let x = solve(&m, &target, &f).ok_or_else(|| BvError::Unsupported("θ is not onto this cell".into()))?;
        // θ carries the Koszul sign (−1)^{n(n−1)/2} on a class of total degree n;
        // conjugating by it leaves the factor (−1)^{n−1}.
        let s = f.sign(c.total_degree() as i64 + 1);
        Ok(members.into_iter().zip(x).map(|(g, c)| (g, f.mul(s, c))).filter(|(_, c)| *c != 0).collect())
    }

    pub fn labeled(&self, v: &Vector) -> LabeledElement {
        v.iter().map(|(&i, &c)| (self.ring.classes()[i].label.clone(), c)).collect()
    }

    /// `Δ` on every class of the window.
    pub fn delta_table(&self) -> Result<BTreeMap<String, LabeledElement>, BvError> {
        let mut out = BTreeMap::new();
        for (i, c) in self.ring.classes().iter().enumerate() {
            out.insert(c.label.clone(), self.labeled(&self.delta(i)?));
        }
        Ok(out)
    }

    /// The graded `Δ` from the Koszul–Tate side for exterior algebras in
    /// characteristic 2: Connes' operator acts on `A⊗Γ[ν]` as the derivation
    /// `y_i ↦ ν_i`, and `θ` pairs `a⊗γ_α*` with `b⊗γ_β` by `δ_{αβ}⟨b a, ω*⟩`.
    pub fn graded_delta(&self, class: usize) -> Result<Vector, BvError> {
        let pres = &self.pres;
        if pres.field.characteristic() != 2 || pres.n_polynomial() != 0 {
            return Err(BvError::Unsupported("the Koszul–Tate formula for Δ needs an exterior algebra in characteristic 2".into()));
        }
        let f = *self.field();
        let (p, q, i) = self.kt.class_positions()[class];
        let cell = &self.kt.cells[&(p, q)];
        let rep = cell.class(i);
        let t = self.res.tables();
        let mut out = Vector::new();
        for ((alpha, a), &k) in &rep.values {
            for (t0, &at0) in alpha.nu.iter().enumerate() {
                if at0 == 0 || at0 % 2 == 0 {
                    continue;
                }
                let mut beta: EMon = alpha.clone();
                beta.nu[t0] -= 1;
                // Solve ⟨b c, ω*⟩ = [t0 ∈ b]·⟨(b without y_t0) a, ω*⟩ for c.
                // b has degree d, the solution c has degree |a| − |y_t0|.
                let d = self.pd.dimension - t.degree(*a) + pres.exterior_degree(t0);
                let target_degree = self.pd.dimension - d;
                let bs = t.of_degree(d);
                let cs = t.of_degree(target_degree);
                let rhs: Vec<u32> = bs
                    .iter()
                    .map(|&b| {
                        let m = t.monomial(b);
                        if m.mask >> t0 & 1 == 0 {
                            return 0;
                        }
                        let rest = Monomial { mask: m.mask & !(1 << t0), exps: m.exps.clone() };
                        let r = t.id(&rest).expect("exterior monomial");
                        self.pd.pairing(&self.bar, r, *a)
                    })
                    .collect();
                let dense: Vec<Vec<u32>> = bs.iter().map(|&b| cs.iter().map(|&cc| self.pd.pairing(&self.bar, b, cc)).collect()).collect();
                let m = SparseMatrix::from_dense(&dense, &f);
                let x = solve(&m, &rhs, &f).ok_or_else(|| BvError::Unsupported("pairing equation has no solution".into()))?;
                for (j, &xc) in x.iter().enumerate() {
                    if xc == 0 {
                        continue;
                    }
                    let label = self.res.basis_label(&beta, cs[j]);
                    let g = self
                        .ring
                        .index_of(&label)
                        .ok_or_else(|| BvError::WindowTooSmall(format!("class {label} outside the window")))?;
                    let e = out.entry(g).or_insert(0);
                    *e = f.add(*e, f.mul(k, xc));
                }
            }
        }
        out.retain(|_, v| *v != 0);
        Ok(out)
    }

    pub fn graded_delta_table(&self) -> Result<BTreeMap<String, LabeledElement>, BvError> {
        let mut out = BTreeMap::new();
        for (i, c) in self.ring.classes().iter().enumerate() {
            out.insert(c.label.clone(), self.labeled(&self.graded_delta(i)?));
        }
        Ok(out)
    }

    fn mul(&self, x: &Vector, y: &Vector) -> Option<Vector> {
        let f = self.field();
        let mut out = Vector::new();
        for (&i, &a) in x {
            for (&j, &b) in y {
                for (k, c) in self.ring.product(i, j)? {
                    let e = out.entry(k).or_insert(0);
                    *e = f.add(*e, f.mul(c, f.mul(a, b)));
                }
            }
        }
        out.retain(|_, v| *v != 0);
        Some(out)
    }

    fn apply_delta(&self, x: &Vector, table: &HashMap<usize, Vector>) -> Vector {
        let f = self.field();
        let mut out = Vector::new();
        for (&i, &a) in x {
            for (&j, &b) in &table[&i] {
                let e = out.entry(j).or_insert(0);
                *e = f.add(*e, f.mul(a, b));
            }
        }
        out.retain(|_, v| *v != 0);
        out
    }

    fn delta_map(&self) -> Result<HashMap<usize, Vector>, BvError> {
        (0..self.ring.classes().len()).map(|i| Ok((i, self.delta(i)?))).collect()
    }

    /// `Δ∘Δ` on every class; returns the classes where it fails.
    pub fn delta_squared_failures(&self) -> Result<Vec<String>, BvError> {
        let table = self.delta_map()?;
        Ok((0..self.ring.classes().len())
            .filter(|&i| !self.apply_delta(&table[&i], &table).is_empty())
            .map(|i| self.ring.classes()[i].label.clone())
            .collect())
    }

    /// The seven-term relation on every triple from `labels` whose products stay in the window.
    pub fn check_bv_identities(&self, labels: &[&str]) -> Result<Vec<BvIdentityCheck>, BvError> {
        let table = self.delta_map()?;
        let mut out = Vec::new();
        for a in labels {
            for b in labels {
                for c in labels {
                    if let Some(check) = self.check_bv_identity(a, b, c, &table)? {
                        out.push(check);
                    }
                }
            }
        }
        Ok(out)
    }

    /// `Δ(abc) = Δ(ab)c + (−1)^{|a|} aΔ(bc) + (−1)^{(|a|+1)|b|} bΔ(ac)
    ///  − Δ(a)bc − (−1)^{|a|} aΔ(b)c − (−1)^{|a|+|b|} abΔ(c)`.
    fn check_bv_identity(&self, a: &str, b: &str, c: &str, table: &HashMap<usize, Vector>) -> Result<Option<BvIdentityCheck>, BvError> {
        let f = *self.field();
        let idx = |l: &str| self.ring.index_of(l).ok_or_else(|| BvError::Ss(SsError::UnknownClass(l.into())));
        let (ia, ib, ic) = (idx(a)?, idx(b)?, idx(c)?);
        let deg = |i: usize| self.ring.classes()[i].total_degree() as i64;
        let (da, db) = (deg(ia), deg(ib));
        let unit = |i: usize| -> Vector { [(i, 1)].into_iter().collect() };
        let (va, vb, vc) = (unit(ia), unit(ib), unit(ic));
        let d = |x: &Vector| self.apply_delta(x, table);
        let terms = (|| {
            let ab = self.mul(&va, &vb)?;
            let bc = self.mul(&vb, &vc)?;
            let ac = self.mul(&va, &vc)?;
            let abc = self.mul(&ab, &vc)?;
            let lhs = d(&abc);
            let rhs = [
                (1, self.mul(&d(&ab), &vc)?),
                (f.sign(da), self.mul(&va, &d(&bc))?),
                (f.sign((da + 1) * db), self.mul(&vb, &d(&ac))?),
                (f.neg(1), self.mul(&self.mul(&d(&va), &vb)?, &vc)?),
                (f.neg(f.sign(da)), self.mul(&self.mul(&va, &d(&vb))?, &vc)?),
                (f.neg(f.sign(da + db)), self.mul(&ab, &d(&vc))?),
            ];
            Some((lhs, rhs))
        })();
        let Some((lhs, rhs)) = terms else { return Ok(None) };
        let mut residual = lhs;
        for (s, v) in rhs {
            for (k, c) in v {
                let e = residual.entry(k).or_insert(0);
                *e = f.sub(*e, f.mul(s, c));
            }
        }
        residual.retain(|_, v| *v != 0);
        Ok(Some(BvIdentityCheck {
            triple: [a.to_string(), b.to_string(), c.to_string()],
            holds: residual.is_empty(),
            residual: self.labeled(&residual),
        }))
    }

    /// Names of the generator classes of the ring: `y_i`, `x_j`, `ν_i*`, `u_j*`, `w_i*`.
    pub fn generator_labels(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for g in &self.pres.generators {
            out.push(g.name.clone());
        }
        for i in 0..self.pres.n_exterior() {
            out.push(format!("nu{}*", i + 1));
        }
        for j in 0..self.pres.n_polynomial() {
            out.push(format!("u{}*", j + 1));
        }
        for i in 0..self.pres.relations.len() {
            out.push(format!("w{}*", i + 1));
        }
        out.retain(|l| self.ring.index_of(l).is_some());
        out
    }

    pub fn class_of(&self, label: &str) -> Option<&RingClass> {
        self.ring.index_of(label).map(|i| &self.ring.classes()[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded_algebra::{exterior_algebra, presentation, GenKind};

    fn engine(pres: &AlgebraPresentation, max_p: usize, span: i32) -> BvEngine {
        let w = DegreeWindow { max_p, q_min: -span, q_max: span };
        BvEngine::new(pres, w, max_p.max(4)).unwrap()
    }

    fn el(items: &[(&str, u32)]) -> LabeledElement {
        items.iter().map(|(l, c)| (l.to_string(), *c)).collect()
    }

    #[test]
    fn fundamental_class() {
        let pres = exterior_algebra(2, 2, 5).unwrap();
        let bar = BarComplex::for_presentation(&pres, 10);
        let pd = build_pd(&bar).unwrap();
        assert_eq!((pd.dimension, pd.omega_label.as_str()), (10, "y1.y2"));
        let t = presentation(2, &[("x", 4, GenKind::Polynomial)], &["x^2"]).unwrap();
        let bar = BarComplex::for_presentation(&t, 8);
        assert_eq!(build_pd(&bar).unwrap().dimension, 4);
        let deg = presentation(2, &[("x", 2, GenKind::Polynomial), ("z", 2, GenKind::Polynomial)], &["x^2", "x.z", "z^2"]);
        if let Ok(deg) = deg {
            let bar = BarComplex::for_presentation(&deg, 6);
            assert!(build_pd(&bar).is_err());
        }
    }

    #[test]
    fn theta_of_unit_is_omega_dual() {
        let pres = exterior_algebra(2, 1, 3).unwrap();
        let bar = BarComplex::for_presentation(&pres, 6);
        let pd = build_pd(&bar).unwrap();
        let mut one = HochschildCochain::zero(0, 0, Coefficients::Algebra);
        one.values.insert((Vec::new(), 0), 1);
        assert_eq!(cap_theta(&bar, &pd, &one).unwrap(), pd.omega_dual());
    }

    #[test]
    fn delta_on_one_exterior_generator() {
        let pres = exterior_algebra(2, 1, 3).unwrap();
        let e = engine(&pres, 3, 12);
        let table = e.delta_table().unwrap();
        eprintln!("{table:?}");
        assert_eq!(table["y1.nu1*"], el(&[("1", 1)]));
        assert_eq!(table["nu1*"], el(&[]));
    }

    #[test]
    fn delta_on_two_generators_degree_five() {
        let pres = exterior_algebra(2, 2, 5).unwrap();
        let e = engine(&pres, 3, 20);
        let table = e.delta_table().unwrap();
        for (k, v) in &table {
            eprintln!("Δ({k}) = {v:?}");
        }
        assert_eq!(table["y1.nu1*"], el(&[("1", 1)]));
        assert_eq!(table["y2.nu2*"], el(&[("1", 1)]));
        assert_eq!(table["y1.nu2*"], el(&[]));
        assert_eq!(table["nu1*.nu2*"], el(&[]));
        assert_eq!(table["y1.y2"], el(&[]));
        assert_eq!(e.graded_delta_table().unwrap()["y1.nu1*"], el(&[("1", 1)]));
        for i in 0..e.ring.classes().len() {
            let c = &e.ring.classes()[i];
            if c.p <= 2 {
                assert!(e.theta_is_bijective(c.p, c.q).unwrap());
            }
        }
        assert!(e.delta_squared_failures().unwrap().is_empty());
        let gens = e.generator_labels();
        let refs: Vec<&str> = gens.iter().map(String::as_str).collect();
        assert!(e.check_bv_identities(&refs).unwrap().iter().all(|c| c.holds));
    }

    #[test]
    fn bar_and_graded_routes_agree_in_characteristic_two() {
        for (l, n, max_p) in [(1, 3, 4), (2, 5, 3), (2, 3, 3), (1, 4, 3)] {
            let pres = exterior_algebra(2, l, n).unwrap();
            let e = engine(&pres, max_p, 4 * n as i32);
            assert_eq!(e.delta_table().unwrap(), e.graded_delta_table().unwrap(), "l={l} n={n}");
        }
    }

    #[test]
    fn degree_three_extension_is_ambiguous() {
        use crate::moore_ss::{resolve_bv_extension, ResolutionStatus};
        let pres = exterior_algebra(2, 2, 3).unwrap();
        let e = engine(&pres, 3, 12);
        let gr = e.graded_delta_table().unwrap();
        let r = resolve_bv_extension(&e.ring, &gr, "y2.nu1*").unwrap();
        assert_eq!(r.status, ResolutionStatus::Ambiguous);
        assert_eq!(r.ambiguity, ["y1.y2.nu1*^3", "y1.y2.nu1*^2.nu2*", "y1.y2.nu1*.nu2*^2", "y1.y2.nu2*^3"].map(String::from).to_vec().into_iter().collect::<std::collections::BTreeSet<_>>().into_iter().collect::<Vec<_>>());
        let r = resolve_bv_extension(&e.ring, &gr, "y1.nu1*").unwrap();
        assert_eq!(r.value, el(&[("1", 1)]));
    }

    #[test]
    fn odd_characteristic_identities() {
        let pres = exterior_algebra(3, 1, 3).unwrap();
        let e = engine(&pres, 4, 12);
        let table = e.delta_table().unwrap();
        for (k, v) in &table {
            eprintln!("Δ({k}) = {v:?}");
        }
        assert!(e.graded_delta(0).is_err());
        assert!(e.delta_squared_failures().unwrap().is_empty());
        let gens = e.generator_labels();
        let refs: Vec<&str> = gens.iter().map(String::as_str).collect();
        let checks = e.check_bv_identities(&refs).unwrap();
        assert!(!checks.is_empty());
        assert!(checks.iter().all(|c| c.holds), "{checks:?}");
        let pres = exterior_algebra(3, 2, 3).unwrap();
        let e = engine(&pres, 3, 12);
        let gens = e.generator_labels();
        let refs: Vec<&str> = gens.iter().map(String::as_str).collect();
        let table = e.delta_table().unwrap();
        for (k, v) in &table {
            eprintln!("Δ({k}) = {v:?}");
        }
        let checks = e.check_bv_identities(&refs).unwrap();
        assert!(checks.iter().all(|c| c.holds), "{:?}", checks.iter().filter(|c| !c.holds).collect::<Vec<_>>());
        assert!(e.delta_squared_failures().unwrap().is_empty());
    }

    #[test]
    fn truncated_polynomial_identities() {
        for (p, deg, power, max_p) in [(2, 4, 2, 4), (3, 2, 3, 4), (2, 2, 3, 4), (5, 2, 2, 3)] {
            let rel = format!("x^{power}");
            let pres = presentation(p, &[("x", deg, GenKind::Polynomial)], &[rel.as_str()]).unwrap();
            let e = engine(&pres, max_p, 16);
            let table = e.delta_table().unwrap();
            eprintln!("p={p} deg={deg} power={power}: {table:?}");
            assert!(e.delta_squared_failures().unwrap().is_empty());
            let gens = e.generator_labels();
            let refs: Vec<&str> = gens.iter().map(String::as_str).collect();
            let checks = e.check_bv_identities(&refs).unwrap();
            assert!(checks.iter().all(|c| c.holds), "{:?}", checks.iter().filter(|c| !c.holds).collect::<Vec<_>>());
        }
    }
}
