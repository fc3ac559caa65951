//! Graded complete intersections `∧(y) ⊗ K[x]/(ρ)` over a prime field.
//!
//! A [`Monomial`] stores an exterior mask (bit `i` is the `i`-th exterior
//! generator in declaration order) and an exponent vector over the polynomial
//! generators. [`GradedAlgebra`] holds normal-form tables up to a degree bound
//! and multiplies in that basis.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fp_linalg::{LinalgError, PrimeField};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error(transparent)]
    Field(#[from] LinalgError),
    #[error("generator {name}: degree must be at least 1")]
    ZeroDegree { name: String },
    #[error("generator {name}: a {kind} generator must have {parity} degree when p is odd")]
    Parity { name: String, kind: &'static str, parity: &'static str },
    #[error("duplicate generator name {0}")]
    DuplicateName(String),
    #[error("relation {index}: unknown generator {name}")]
    UnknownGenerator { index: usize, name: String },
    #[error("relation {index}: exterior generator {name} may not appear in a relation")]
    ExteriorInRelation { index: usize, name: String },
    #[error("relation {index}: linear term in {name}; relations must be decomposable")]
    LinearTerm { index: usize, name: String },
    #[error("relation {index}: not homogeneous")]
    Inhomogeneous { index: usize },
    #[error("relation {index}: zero polynomial")]
    ZeroRelation { index: usize },
    #[error("relation {index}: cannot parse {text:?}: {reason}")]
    Syntax { index: usize, text: String, reason: String },
    #[error("{0} is an exterior generator; derivatives are taken in polynomial generators only")]
    ExteriorDerivative(String),
    #[error("degree {degree} exceeds the table bound {bound}")]
    DegreeBound { degree: i32, bound: i32 },
    #[error("operands belong to different presentations")]
    MixedPresentations,
    #[error("zeta verification failed ({condition}) for relation {relation}: residual {witness}")]
    ZetaCheck { relation: usize, condition: &'static str, witness: String },
    #[error("too many exterior generators (limit 63)")]
    TooManyExterior,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenKind {
    Exterior,
    Polynomial,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GradedGenerator {
    pub name: String,
    pub degree: u32,
    pub kind: GenKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial {
    pub mask: u64,
    pub exps: Vec<u32>,
}

impl Monomial {
    pub fn one(n_poly: usize) -> Self {
        Monomial { mask: 0, exps: vec![0; n_poly] }
    }

    pub fn is_one(&self) -> bool {
        self.mask == 0 && self.exps.iter().all(|&e| e == 0)
    }
}

/// A linear combination of monomials with nonzero coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Polynomial {
    pub terms: BTreeMap<Monomial, u32>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn monomial(m: Monomial, c: u32) -> Self {
        let mut p = Polynomial::zero();
        if c != 0 {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: Monomial, c: u32, f: &PrimeField) {
        if c == 0 {
            return;
        }
        let e = self.terms.entry(m.clone()).or_insert(0);
        *e = f.add(*e, c);
        if *e == 0 {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &Polynomial, f: &PrimeField) -> Polynomial {
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), c, f);
        }
        out
    }

    pub fn scale(&self, s: u32, f: &PrimeField) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, &c) in &self.terms {
            out.add_term(m.clone(), f.mul(c, s), f);
        }
        out
    }
}

/// Exponent-vector tensors in `K[x] ⊗ K[x]`, used for ζ.
pub type TensorPoly = BTreeMap<(Vec<u32>, Vec<u32>), u32>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraPresentation {
    pub field: PrimeField,
    pub generators: Vec<GradedGenerator>,
    pub relations: Vec<Polynomial>,
    exterior: Vec<usize>,
    polynomial: Vec<usize>,
}

/// The presentation file as it appears on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresentationDoc {
    pub characteristic: u64,
    pub generators: Vec<GradedGenerator>,
    #[serde(default)]
    pub relations: Vec<String>,
    #[serde(default)]
    pub window: Option<WindowDoc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowDoc {
    pub max_filtration: i32,
    pub q_min: i32,
    pub q_max: i32,
}

impl AlgebraPresentation {
    pub fn new(
        field: PrimeField,
        generators: Vec<GradedGenerator>,
        relations: Vec<Polynomial>,
    ) -> Result<Self, AlgebraError> {
        let odd = field.characteristic() != 2;
        let mut names = std::collections::HashSet::new();
        for g in &generators {
            if g.degree == 0 {
                return Err(AlgebraError::ZeroDegree { name: g.name.clone() });
            }
            if !names.insert(g.name.clone()) {
                return Err(AlgebraError::DuplicateName(g.name.clone()));
            }
            if odd {
                match g.kind {
                    GenKind::Polynomial if g.degree % 2 == 1 => {
                        return Err(AlgebraError::Parity { name: g.name.clone(), kind: "polynomial", parity: "even" })
                    }
                    GenKind::Exterior if g.degree % 2 == 0 => {
                        return Err(AlgebraError::Parity { name: g.name.clone(), kind: "exterior", parity: "odd" })
                    }
                    _ => {}
                }
            }
        }
        let exterior: Vec<usize> = (0..generators.len()).filter(|&i| generators[i].kind == GenKind::Exterior).collect();
        let polynomial: Vec<usize> =
            (0..generators.len()).filter(|&i| generators[i].kind == GenKind::Polynomial).collect();
        if exterior.len() > 63 {
            return Err(AlgebraError::TooManyExterior);
        }
        let pres = AlgebraPresentation { field, generators, relations, exterior, polynomial };
        for (index, rel) in pres.relations.iter().enumerate() {
            if rel.is_zero() {
                return Err(AlgebraError::ZeroRelation { index });
            }
            let mut degs = rel.terms.keys().map(|m| pres.degree(m));
            let d0 = degs.next().unwrap();
            if degs.any(|d| d != d0) {
                return Err(AlgebraError::Inhomogeneous { index });
            }
            for m in rel.terms.keys() {
                if m.mask != 0 {
                    let i = m.mask.trailing_zeros() as usize;
                    return Err(AlgebraError::ExteriorInRelation {
                        index,
                        name: pres.generators[pres.exterior[i]].name.clone(),
                    });
                }
                if m.exps.iter().sum::<u32>() == 1 {
                    let j = m.exps.iter().position(|&e| e == 1).unwrap();
                    return Err(AlgebraError::LinearTerm { index, name: pres.generators[pres.polynomial[j]].name.clone() });
                }
            }
        }
        Ok(pres)
    }

    pub fn n_exterior(&self) -> usize {
        self.exterior.len()
    }

    pub fn n_polynomial(&self) -> usize {
        self.polynomial.len()
    }

    pub fn exterior_generator(&self, i: usize) -> &GradedGenerator {
        &self.generators[self.exterior[i]]
    }

    pub fn polynomial_generator(&self, j: usize) -> &GradedGenerator {
        &self.generators[self.polynomial[j]]
    }

    pub fn exterior_degree(&self, i: usize) -> i32 {
        self.exterior_generator(i).degree as i32
    }

    pub fn polynomial_degree(&self, j: usize) -> i32 {
        self.polynomial_generator(j).degree as i32
    }

    pub fn degree(&self, m: &Monomial) -> i32 {
        let mut d = 0;
        for i in 0..self.exterior.len() {
            if m.mask >> i & 1 == 1 {
                d += self.exterior_degree(i);
            }
        }
        for (j, &e) in m.exps.iter().enumerate() {
            d += e as i32 * self.polynomial_degree(j);
        }
        d
    }

    pub fn poly_degree(&self, exps: &[u32]) -> i32 {
        exps.iter().enumerate().map(|(j, &e)| e as i32 * self.polynomial_degree(j)).sum()
    }

    pub fn relation_degree(&self, i: usize) -> i32 {
        self.degree(self.relations[i].terms.keys().next().unwrap())
    }

    /// Exterior generator as a monomial.
    pub fn y(&self, i: usize) -> Monomial {
        Monomial { mask: 1 << i, exps: vec![0; self.n_polynomial()] }
    }

    /// Polynomial generator as a monomial.
    pub fn x(&self, j: usize) -> Monomial {
        let mut exps = vec![0; self.n_polynomial()];
        exps[j] = 1;
        Monomial { mask: 0, exps }
    }

    pub fn one(&self) -> Monomial {
        Monomial::one(self.n_polynomial())
    }

    /// Finite total dimension requires as many relations as polynomial generators.
    pub fn is_finite(&self) -> bool {
        self.relations.len() == self.polynomial.len()
    }

    /// Degree of the socle for finite presentations.
    pub fn top_degree(&self) -> Option<i32> {
        if !self.is_finite() {
            return None;
        }
        let ext: i32 = (0..self.n_exterior()).map(|i| self.exterior_degree(i)).sum();
        let rel: i32 = (0..self.relations.len()).map(|i| self.relation_degree(i)).sum();
        let gens: i32 = (0..self.n_polynomial()).map(|j| self.polynomial_degree(j)).sum();
        Some(ext + rel - gens)
    }

    pub fn max_generator_degree(&self) -> i32 {
        self.generators.iter().map(|g| g.degree as i32).max().unwrap_or(0)
    }

    pub fn monomial_name(&self, m: &Monomial) -> String {
        let mut parts = Vec::new();
        for i in 0..self.n_exterior() {
            if m.mask >> i & 1 == 1 {
                parts.push(self.exterior_generator(i).name.clone());
            }
        }
        for (j, &e) in m.exps.iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(self.polynomial_generator(j).name.clone()),
                _ => parts.push(format!("{}^{}", self.polynomial_generator(j).name, e)),
            }
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }

    pub fn polynomial_name(&self, p: &Polynomial) -> String {
        if p.is_zero() {
            return "0".into();
        }
        p.terms
            .iter()
            .map(|(m, &c)| if c == 1 { self.monomial_name(m) } else { format!("{}*{}", c, self.monomial_name(m)) })
            .collect::<Vec<_>>()
            .join(" + ")
    }

    /// Sign of `y_S · y_T = ± y_{S ∪ T}`, or `None` when they share a factor.
    pub fn exterior_merge_sign(&self, s: u64, t: u64) -> Option<u32> {
        if s & t != 0 {
            return None;
        }
        let mut parity = 0i64;
        for i in 0..self.n_exterior() {
            if s >> i & 1 == 0 {
                continue;
            }
            for j in 0..i {
                if t >> j & 1 == 1 {
                    parity += (self.exterior_degree(i) * self.exterior_degree(j)) as i64;
                }
            }
        }
        Some(self.field.sign(parity))
    }
}

pub fn parse_presentation(doc: &PresentationDoc) -> Result<AlgebraPresentation, AlgebraError> {
    let field = PrimeField::new(doc.characteristic)?;
    // Validate generators before touching relations so that parity errors surface first.
    let skeleton = AlgebraPresentation::new(field, doc.generators.clone(), Vec::new())?;
    let mut relations = Vec::new();
    for (index, text) in doc.relations.iter().enumerate() {
        relations.push(parse_relation(&skeleton, index, text)?);
    }
    AlgebraPresentation::new(field, doc.generators.clone(), relations)
}

/// Presentation from `(name, degree, kind)` triples and relation strings.
pub fn presentation(
    characteristic: u64,
    generators: &[(&str, u32, GenKind)],
    relations: &[&str],
) -> Result<AlgebraPresentation, AlgebraError> {
    parse_presentation(&PresentationDoc {
        characteristic,
        generators: generators
            .iter()
            .map(|&(n, d, kind)| GradedGenerator { name: n.to_string(), degree: d, kind })
            .collect(),
        relations: relations.iter().map(|r| r.to_string()).collect(),
        window: None,
    })
}

/// `∧(y_1, …, y_l)` with every generator in degree `n`.
pub fn exterior_algebra(characteristic: u64, l: usize, n: u32) -> Result<AlgebraPresentation, AlgebraError> {
    let names: Vec<String> = (1..=l).map(|i| format!("y{i}")).collect();
    let gens: Vec<(&str, u32, GenKind)> = names.iter().map(|s| (s.as_str(), n, GenKind::Exterior)).collect();
    presentation(characteristic, &gens, &[])
}

/// `K[x_1, …, x_m]` with every generator in degree `n`.
pub fn polynomial_algebra(characteristic: u64, m: usize, n: u32) -> Result<AlgebraPresentation, AlgebraError> {
    let names: Vec<String> = if m == 1 { vec!["x".into()] } else { (1..=m).map(|i| format!("x{i}")).collect() };
    let gens: Vec<(&str, u32, GenKind)> = names.iter().map(|s| (s.as_str(), n, GenKind::Polynomial)).collect();
    presentation(characteristic, &gens, &[])
}

pub fn parse_presentation_json(text: &str) -> Result<(AlgebraPresentation, PresentationDoc), String> {
    let doc: PresentationDoc = serde_json::from_str(text).map_err(|e| format!("malformed presentation: {e}"))?;
    let pres = parse_presentation(&doc).map_err(|e| e.to_string())?;
    Ok((pres, doc))
}

fn parse_relation(pres: &AlgebraPresentation, index: usize, text: &str) -> Result<Polynomial, AlgebraError> {
    let f = &pres.field;
    let syntax = |reason: &str| AlgebraError::Syntax { index, text: text.to_string(), reason: reason.to_string() };
    let cleaned: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if cleaned.is_empty() {
        return Err(syntax("empty"));
    }
    let mut terms: Vec<(bool, String)> = Vec::new();
    let mut current = String::new();
    let mut negative = false;
    for (i, ch) in cleaned.chars().enumerate() {
        if (ch == '+' || ch == '-') && i > 0 {
            terms.push((negative, std::mem::take(&mut current)));
            negative = ch == '-';
        } else if (ch == '+' || ch == '-') && i == 0 {
            negative = ch == '-';
        } else {
            current.push(ch);
        }
    }
    terms.push((negative, current));
    let mut out = Polynomial::zero();
    for (neg, term) in terms {
        if term.is_empty() {
            return Err(syntax("empty term"));
        }
        let mut coeff: i64 = 1;
        let mut exps = vec![0u32; pres.n_polynomial()];
        for factor in term.split('*') {
            let (base, power) = match factor.split_once('^') {
                Some((b, e)) => (b, e.parse::<u32>().map_err(|_| syntax("bad exponent"))?),
                None => (factor, 1),
            };
            if base.is_empty() {
                return Err(syntax("empty factor"));
            }
            if let Ok(c) = base.parse::<i64>() {
                coeff = coeff * c.pow(power) % f.characteristic() as i64;
                continue;
            }
            let gi = pres
                .generators
                .iter()
                .position(|g| g.name == base)
                .ok_or_else(|| AlgebraError::UnknownGenerator { index, name: base.to_string() })?;
            if pres.generators[gi].kind == GenKind::Exterior {
                return Err(AlgebraError::ExteriorInRelation { index, name: base.to_string() });
            }
            let j = pres.polynomial.iter().position(|&g| g == gi).unwrap();
            exps[j] += power;
        }
        let c = f.reduce(if neg { -coeff } else { coeff });
        out.add_term(Monomial { mask: 0, exps }, c, f);
    }
    Ok(out)
}

/// All exponent vectors of the given polynomial degree, in increasing lex order.
pub fn exponent_vectors(degrees: &[i32], total: i32) -> Vec<Vec<u32>> {
    fn rec(degrees: &[i32], j: usize, left: i32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if j == degrees.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let mut e = 0;
        while e as i32 * degrees[j] <= left {
            cur.push(e);
            rec(degrees, j + 1, left - e as i32 * degrees[j], cur, out);
            cur.pop();
            e += 1;
        }
    }
    let mut out = Vec::new();
    if total >= 0 {
        rec(degrees, 0, total, &mut Vec::new(), &mut out);
    }
    out
}

#[derive(Debug, Clone)]
struct PolyTable {
    standard: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
    /// Reduction of each non-standard monomial to standard indices.
    rewrite: HashMap<Vec<u32>, Vec<(usize, u32)>>,
}

/// Normal forms of `∧(y) ⊗ K[x]/(ρ)` in every degree up to a bound.
#[derive(Debug, Clone)]
pub struct GradedAlgebra {
    pres: AlgebraPresentation,
    bound: i32,
    poly: Vec<PolyTable>,
    basis: Vec<Vec<Monomial>>,
    index: HashMap<Monomial, usize>,
}

impl GradedAlgebra {
    /// Tables up to `bound`; finite algebras are clipped at their top degree.
    pub fn new(pres: &AlgebraPresentation, bound: i32) -> Self {
        let bound = match pres.top_degree() {
            Some(t) => bound.min(t).max(0),
            None => bound.max(0),
        };
        let pure_powers = pure_power_exponents(pres);
        let pdeg: Vec<i32> = (0..pres.n_polynomial()).map(|j| pres.polynomial_degree(j)).collect();
        let mut poly = Vec::new();
        for d in 0..=bound {
            let table = match &pure_powers {
                Some(caps) => truncated_table(&pdeg, d, caps),
                None => linear_table(pres, &pdeg, d),
            };
            poly.push(table);
        }
        let mut basis: Vec<Vec<Monomial>> = vec![Vec::new(); bound as usize + 1];
        for mask in 0..(1u64 << pres.n_exterior()) {
            let m = Monomial { mask, exps: vec![0; pres.n_polynomial()] };
            let ed = pres.degree(&m);
            for d in ed..=bound {
                for e in &poly[(d - ed) as usize].standard {
                    basis[d as usize].push(Monomial { mask, exps: e.clone() });
                }
            }
        }
        let mut index = HashMap::new();
        for b in basis.iter_mut() {
            b.sort();
            for (i, m) in b.iter().enumerate() {
                index.insert(m.clone(), i);
            }
        }
        GradedAlgebra { pres: pres.clone(), bound, poly, basis, index }
    }

    pub fn presentation(&self) -> &AlgebraPresentation {
        &self.pres
    }

    pub fn field(&self) -> &PrimeField {
        &self.pres.field
    }

    pub fn bound(&self) -> i32 {
        self.bound
    }

    /// Whether every nonzero degree lies within the tables.
    pub fn is_complete(&self) -> bool {
        self.pres.top_degree().is_some_and(|t| t <= self.bound)
    }

    pub fn basis(&self, degree: i32) -> &[Monomial] {
        if degree < 0 || degree > self.bound {
            return &[];
        }
        &self.basis[degree as usize]
    }

    pub fn dim(&self, degree: i32) -> usize {
        self.basis(degree).len()
    }

    pub fn index_of(&self, m: &Monomial) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn degree(&self, m: &Monomial) -> i32 {
        self.pres.degree(m)
    }

    fn check_degree(&self, d: i32) -> Result<bool, AlgebraError> {
        if d <= self.bound {
            return Ok(true);
        }
        if self.pres.top_degree().is_some() {
            return Ok(false);
        }
        Err(AlgebraError::DegreeBound { degree: d, bound: self.bound })
    }

    /// Normal form of an arbitrary monomial as `(basis index, coefficient)` pairs.
    pub fn reduce_monomial(&self, m: &Monomial) -> Result<Vec<(usize, u32)>, AlgebraError> {
        let d = self.degree(m);
        if !self.check_degree(d)? {
            return Ok(Vec::new());
        }
        let pd = self.pres.poly_degree(&m.exps);
        let table = &self.poly[pd as usize];
        let pieces: Vec<(usize, u32)> = match table.index.get(&m.exps) {
            Some(&i) => vec![(i, 1)],
            None => table.rewrite.get(&m.exps).cloned().unwrap_or_default(),
        };
        Ok(pieces
            .into_iter()
            .map(|(i, c)| {
                let mono = Monomial { mask: m.mask, exps: table.standard[i].clone() };
                (self.index[&mono], c)
            })
            .collect())
    }

    /// Product of two basis monomials in the basis of the sum degree.
    pub fn mul_basis(&self, a: &Monomial, b: &Monomial) -> Result<Vec<(usize, u32)>, AlgebraError> {
        let f = &self.pres.field;
        let Some(sign) = self.pres.exterior_merge_sign(a.mask, b.mask) else {
            return Ok(Vec::new());
        };
        let ext_b = self.degree(&Monomial { mask: b.mask, exps: vec![0; b.exps.len()] });
        let poly_a = self.pres.poly_degree(&a.exps);
        let sign = f.mul(sign, f.sign((ext_b * poly_a) as i64));
        let exps: Vec<u32> = a.exps.iter().zip(&b.exps).map(|(x, y)| x + y).collect();
        let prod = Monomial { mask: a.mask | b.mask, exps };
        Ok(self.reduce_monomial(&prod)?.into_iter().map(|(i, c)| (i, f.mul(c, sign))).collect())
    }

    pub fn reduce(&self, p: &Polynomial) -> Result<Polynomial, AlgebraError> {
        let f = &self.pres.field;
        let mut out = Polynomial::zero();
        for (m, &c) in &p.terms {
            let d = self.degree(m);
            for (i, k) in self.reduce_monomial(m)? {
                out.add_term(self.basis(d)[i].clone(), f.mul(c, k), f);
            }
        }
        Ok(out)
    }

    pub fn multiply(&self, a: &Polynomial, b: &Polynomial) -> Result<Polynomial, AlgebraError> {
        let f = &self.pres.field;
        let mut out = Polynomial::zero();
        for (ma, &ca) in &a.terms {
            for (mb, &cb) in &b.terms {
                let d = self.degree(ma) + self.degree(mb);
                for (i, k) in self.mul_basis(ma, mb)? {
                    out.add_term(self.basis(d)[i].clone(), f.mul(f.mul(ca, cb), k), f);
                }
            }
        }
        Ok(out)
    }

    /// Multiply checking that both operands come from this presentation.
    pub fn multiply_checked(
        &self,
        a: (&AlgebraPresentation, &Polynomial),
        b: (&AlgebraPresentation, &Polynomial),
    ) -> Result<Polynomial, AlgebraError> {
        if a.0 != &self.pres || b.0 != &self.pres {
            return Err(AlgebraError::MixedPresentations);
        }
        self.multiply(a.1, b.1)
    }

    pub fn to_vector(&self, degree: i32, p: &Polynomial) -> Vec<u32> {
        let mut v = vec![0; self.dim(degree)];
        for (m, &c) in &p.terms {
            if let Some(i) = self.index_of(m) {
                v[i] = c;
            }
        }
        v
    }

    pub fn from_vector(&self, degree: i32, v: &[u32]) -> Polynomial {
        let mut p = Polynomial::zero();
        for (i, &c) in v.iter().enumerate() {
            p.add_term(self.basis(degree)[i].clone(), c, &self.pres.field);
        }
        p
    }
}

fn pure_power_exponents(pres: &AlgebraPresentation) -> Option<Vec<Option<u32>>> {
    let mut caps = vec![None; pres.n_polynomial()];
    for rel in &pres.relations {
        if rel.terms.len() != 1 {
            return None;
        }
        let m = rel.terms.keys().next().unwrap();
        let nz: Vec<usize> = (0..m.exps.len()).filter(|&j| m.exps[j] > 0).collect();
        if nz.len() != 1 {
            return None;
        }
        let j = nz[0];
        caps[j] = Some(caps[j].map_or(m.exps[j], |c: u32| c.min(m.exps[j])));
    }
    Some(caps)
}

fn truncated_table(pdeg: &[i32], d: i32, caps: &[Option<u32>]) -> PolyTable {
    let standard: Vec<Vec<u32>> = exponent_vectors(pdeg, d)
        .into_iter()
        .filter(|e| e.iter().zip(caps).all(|(&x, c)| c.is_none_or(|c| x < c)))
        .collect();
    let index = standard.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
    PolyTable { standard, index, rewrite: HashMap::new() }
}

/// Quotient of the degree-`d` monomial span by the ideal's graded piece.
/// Columns run from the lex-largest monomial down, so the largest monomials
/// become pivots and the smallest survive as the standard basis.
fn linear_table(pres: &AlgebraPresentation, pdeg: &[i32], d: i32) -> PolyTable {
    let f = &pres.field;
    let mut monos = exponent_vectors(pdeg, d);
    monos.reverse();
    let col: HashMap<Vec<u32>, usize> = monos.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
    let mut rows: Vec<Vec<u32>> = Vec::new();
    for rel in &pres.relations {
        let rd = pres.degree(rel.terms.keys().next().unwrap());
        for mult in exponent_vectors(pdeg, d - rd) {
            let mut row = vec![0u32; monos.len()];
            for (m, &c) in &rel.terms {
                let e: Vec<u32> = m.exps.iter().zip(&mult).map(|(a, b)| a + b).collect();
                let k = col[&e];
                row[k] = f.add(row[k], c);
            }
            rows.push(row);
        }
    }
    let (pivots, reduced) = row_reduce(&rows, monos.len(), f);
    let is_pivot: Vec<bool> = {
        let mut v = vec![false; monos.len()];
        for &p in &pivots {
            v[p] = true;
        }
        v
    };
    let mut standard: Vec<Vec<u32>> = (0..monos.len()).filter(|&c| !is_pivot[c]).map(|c| monos[c].clone()).collect();
    standard.sort();
    let index: HashMap<Vec<u32>, usize> = standard.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
    let mut rewrite = HashMap::new();
    for (row, &p) in reduced.iter().zip(&pivots) {
        let mut combo = Vec::new();
        for (c, &v) in row.iter().enumerate() {
            if c != p && v != 0 {
                combo.push((index[&monos[c]], f.neg(v)));
            }
        }
        combo.sort_unstable();
        rewrite.insert(monos[p].clone(), combo);
    }
    PolyTable { standard, index, rewrite }
}

fn row_reduce(rows: &[Vec<u32>], ncols: usize, f: &PrimeField) -> (Vec<usize>, Vec<Vec<u32>>) {
    let mut a: Vec<Vec<u32>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(pr) = (r..a.len()).find(|&i| a[i][c] != 0) else { continue };
        a.swap(r, pr);
        let inv = f.inv(a[r][c]).unwrap();
        for x in a[r].iter_mut() {
            *x = f.mul(*x, inv);
        }
        let prow = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != r && row[c] != 0 {
                let k = row[c];
                for (x, &y) in row.iter_mut().zip(&prow) {
                    *x = f.sub(*x, f.mul(k, y));
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    (pivots, a)
}

/// Formal partial derivative in the free polynomial ring.
pub fn partial_derivative(
    pres: &AlgebraPresentation,
    rho: &Polynomial,
    generator: usize,
) -> Result<Polynomial, AlgebraError> {
    let g = &pres.generators[generator];
    if g.kind == GenKind::Exterior {
        return Err(AlgebraError::ExteriorDerivative(g.name.clone()));
    }
    let j = pres.polynomial.iter().position(|&i| i == generator).unwrap();
    let f = &pres.field;
    let mut out = Polynomial::zero();
    for (m, &c) in &rho.terms {
        if m.exps[j] == 0 {
            continue;
        }
        let mut e = m.exps.clone();
        e[j] -= 1;
        out.add_term(Monomial { mask: m.mask, exps: e }, f.mul(c, f.reduce(m.exps[j] as i64)), f);
    }
    Ok(out)
}

/// ζ_{ij} for one relation, indexed by polynomial generator.
///
/// Each monomial `x^a ⊗ 1 − 1 ⊗ x^a` is telescoped one variable at a time in
/// declaration order; both defining identities are then checked.
pub fn zeta_coefficients(pres: &AlgebraPresentation, rho: &Polynomial) -> Result<Vec<TensorPoly>, AlgebraError> {
    let zetas = telescoping_zeta(pres, rho);
    let relation = pres.relations.iter().position(|r| r == rho).unwrap_or(usize::MAX);
    verify_zeta(pres, relation, rho, &zetas)?;
    Ok(zetas)
}

pub fn telescoping_zeta(pres: &AlgebraPresentation, rho: &Polynomial) -> Vec<TensorPoly> {
    let f = &pres.field;
    let n = pres.n_polynomial();
    let mut zetas: Vec<TensorPoly> = vec![TensorPoly::new(); n];
    for (m, &c) in &rho.terms {
        let a = &m.exps;
        for j in 0..n {
            for s in 0..a[j] {
                let mut left = vec![0u32; n];
                let mut right = vec![0u32; n];
                left[..j].copy_from_slice(&a[..j]);
                left[j] = s;
                right[j] = a[j] - 1 - s;
                right[j + 1..].copy_from_slice(&a[j + 1..]);
                tensor_add(&mut zetas[j], (left, right), c, f);
            }
        }
    }
    zetas
}

pub fn tensor_add(t: &mut TensorPoly, key: (Vec<u32>, Vec<u32>), c: u32, f: &PrimeField) {
    if c == 0 {
        return;
    }
    let e = t.entry(key.clone()).or_insert(0);
    *e = f.add(*e, c);
    if *e == 0 {
        t.remove(&key);
    }
}

/// Check `ρ⊗1 − 1⊗ρ = Σ ζ_j (x_j⊗1 − 1⊗x_j)` and `φ(ζ_j) = ∂ρ/∂x_j`.
pub fn verify_zeta(
    pres: &AlgebraPresentation,
    relation: usize,
    rho: &Polynomial,
    zetas: &[TensorPoly],
) -> Result<(), AlgebraError> {
    let f = &pres.field;
    let n = pres.n_polynomial();
    let zero = vec![0u32; n];
    let mut residual = TensorPoly::new();
    for (m, &c) in &rho.terms {
        tensor_add(&mut residual, (m.exps.clone(), zero.clone()), c, f);
        tensor_add(&mut residual, (zero.clone(), m.exps.clone()), f.neg(c), f);
    }
    for (j, z) in zetas.iter().enumerate() {
        for ((l, r), &c) in z {
            let mut l2 = l.clone();
            l2[j] += 1;
            let mut r2 = r.clone();
            r2[j] += 1;
            tensor_add(&mut residual, (l2, r.clone()), f.neg(c), f);
            tensor_add(&mut residual, (l.clone(), r2), c, f);
        }
    }
    if !residual.is_empty() {
        return Err(AlgebraError::ZetaCheck {
            relation,
            condition: "telescoping identity",
            witness: format!("{residual:?}"),
        });
    }
    for (j, z) in zetas.iter().enumerate() {
        let mut phi = Polynomial::zero();
        for ((l, r), &c) in z {
            let e: Vec<u32> = l.iter().zip(r).map(|(a, b)| a + b).collect();
            phi.add_term(Monomial { mask: 0, exps: e }, c, f);
        }
        let d = partial_derivative(pres, rho, pres.polynomial[j])?;
        let diff = phi.add(&d.scale(f.neg(1), f), f);
        if !diff.is_zero() {
            return Err(AlgebraError::ZetaCheck {
                relation,
                condition: "multiplication gives the partial derivative",
                witness: pres.polynomial_name(&diff),
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegularityReport {
    pub passed: bool,
    pub checked_through: i32,
    pub first_failing_degree: Option<i32>,
}

/// Hilbert-series test `HS(K[x]/(ρ)) = HS(K[x]) · Π(1 − t^{deg ρ_i})` through `bound`.
pub fn validate_regular_sequence(pres: &AlgebraPresentation, bound: i32) -> RegularityReport {
    let pdeg: Vec<i32> = (0..pres.n_polynomial()).map(|j| pres.polynomial_degree(j)).collect();
    let poly_only = AlgebraPresentation {
        field: pres.field,
        generators: pres.polynomial.iter().map(|&i| pres.generators[i].clone()).collect(),
        relations: pres.relations.clone(),
        exterior: Vec::new(),
        polynomial: (0..pres.n_polynomial()).collect(),
    };
    let mut quotient = vec![0i64; bound.max(0) as usize + 1];
    for d in 0..=bound {
        quotient[d as usize] = linear_table(&poly_only, &pdeg, d).standard.len() as i64;
    }
    let mut series: Vec<i64> = (0..=bound.max(0)).map(|d| exponent_vectors(&pdeg, d).len() as i64).collect();
    for i in 0..pres.relations.len() {
        let rd = pres.relation_degree(i) as usize;
        for d in (rd..series.len()).rev() {
            series[d] -= series[d - rd];
        }
    }
    for d in 0..=bound {
        if series[d as usize] != quotient[d as usize] {
            return RegularityReport { passed: false, checked_through: bound, first_failing_degree: Some(d) };
        }
    }
    RegularityReport { passed: true, checked_through: bound, first_failing_degree: None }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(p: u64, gens: &[(&str, u32, GenKind)], rels: &[&str]) -> PresentationDoc {
        PresentationDoc {
            characteristic: p,
            generators: gens
                .iter()
                .map(|&(n, d, k)| GradedGenerator { name: n.into(), degree: d, kind: k })
                .collect(),
            relations: rels.iter().map(|s| s.to_string()).collect(),
            window: None,
        }
    }

    use GenKind::{Exterior as E, Polynomial as P};

    #[test]
    fn parsing_examples() {
        let a = parse_presentation(&doc(2, &[("y1", 5, E), ("y2", 5, E)], &[])).unwrap();
        assert_eq!(a.n_exterior(), 2);
        let b = parse_presentation(&doc(3, &[("x", 2, P)], &[])).unwrap();
        assert_eq!(b.n_polynomial(), 1);
        let c = parse_presentation(&doc(2, &[("x", 4, P)], &["x^2"])).unwrap();
        assert_eq!(c.relations.len(), 1);
    }

    #[test]
    fn parsing_errors() {
        assert!(matches!(parse_presentation(&doc(4, &[("x", 2, P)], &[])), Err(AlgebraError::Field(_))));
        assert!(matches!(parse_presentation(&doc(3, &[("x", 3, P)], &[])), Err(AlgebraError::Parity { .. })));
        assert!(matches!(parse_presentation(&doc(3, &[("y", 2, E)], &[])), Err(AlgebraError::Parity { .. })));
        assert!(matches!(
            parse_presentation(&doc(2, &[("x", 2, P)], &["x^2 + x"])),
            Err(AlgebraError::Inhomogeneous { .. }) | Err(AlgebraError::LinearTerm { .. })
        ));
        assert!(matches!(
            parse_presentation(&doc(2, &[("x", 2, P), ("z", 4, P)], &["z + x^2"])),
            Err(AlgebraError::LinearTerm { .. })
        ));
        assert!(matches!(
            parse_presentation(&doc(2, &[("x", 2, P)], &["w^2"])),
            Err(AlgebraError::UnknownGenerator { .. })
        ));
    }

    #[test]
    fn bases() {
        let a = parse_presentation(&doc(2, &[("y1", 5, E), ("y2", 5, E)], &[])).unwrap();
        let alg = GradedAlgebra::new(&a, 100);
        assert_eq!(alg.basis(10), &[Monomial { mask: 3, exps: vec![] }]);
        let b = parse_presentation(&doc(2, &[("x", 2, P)], &[])).unwrap();
        let alg = GradedAlgebra::new(&b, 10);
        assert_eq!(alg.basis(6), &[Monomial { mask: 0, exps: vec![3] }]);
        let c = parse_presentation(&doc(2, &[("x", 4, P)], &["x^2"])).unwrap();
        let alg = GradedAlgebra::new(&c, 20);
        assert!(alg.basis(8).is_empty());
        assert_eq!(alg.dim(4), 1);
    }

    #[test]
    fn products() {
        let a = parse_presentation(&doc(3, &[("y1", 3, E), ("y2", 3, E)], &[])).unwrap();
        let alg = GradedAlgebra::new(&a, 10);
        let (y1, y2) = (a.y(0), a.y(1));
        assert_eq!(alg.mul_basis(&y1, &y2).unwrap(), vec![(0, 1)]);
        assert_eq!(alg.mul_basis(&y2, &y1).unwrap(), vec![(0, 2)]);
        assert!(alg.mul_basis(&y1, &y1).unwrap().is_empty());
        let b = parse_presentation(&doc(3, &[("x", 2, P)], &["x^3"])).unwrap();
        let alg = GradedAlgebra::new(&b, 10);
        let x2 = Monomial { mask: 0, exps: vec![2] };
        assert!(alg.mul_basis(&x2, &x2).unwrap().is_empty());
    }

    #[test]
    fn general_relations_reduce() {
        let a = parse_presentation(&doc(3, &[("a", 2, P), ("b", 2, P)], &["a^2 - b^2", "a*b"])).unwrap();
        let alg = GradedAlgebra::new(&a, 20);
        let dims: Vec<usize> = (0..=8).map(|d| alg.dim(d)).collect();
        assert_eq!(dims, vec![1, 0, 2, 0, 1, 0, 0, 0, 0]);
        assert!(validate_regular_sequence(&a, 20).passed);
    }

    #[test]
    fn derivatives() {
        let a = parse_presentation(&doc(2, &[("x", 2, P)], &["x^2"])).unwrap();
        assert!(partial_derivative(&a, &a.relations[0], 0).unwrap().is_zero());
        let b = parse_presentation(&doc(2, &[("x1", 2, P), ("x2", 2, P)], &["x1*x2"])).unwrap();
        let d = partial_derivative(&b, &b.relations[0], 0).unwrap();
        assert_eq!(d, Polynomial::monomial(b.x(1), 1));
        let c = parse_presentation(&doc(3, &[("x", 2, P)], &["x^3"])).unwrap();
        assert!(partial_derivative(&c, &c.relations[0], 0).unwrap().is_zero());
        let e = parse_presentation(&doc(2, &[("y", 3, E)], &[])).unwrap();
        assert!(matches!(partial_derivative(&e, &Polynomial::zero(), 0), Err(AlgebraError::ExteriorDerivative(_))));
    }

    fn tp(entries: &[(&[u32], &[u32], u32)]) -> TensorPoly {
        entries.iter().map(|&(l, r, c)| ((l.to_vec(), r.to_vec()), c)).collect()
    }

    #[test]
    fn zeta_examples() {
        let a = parse_presentation(&doc(2, &[("x1", 2, P), ("x2", 2, P)], &["x1*x2"])).unwrap();
        let z = zeta_coefficients(&a, &a.relations[0]).unwrap();
        assert_eq!(z[0], tp(&[(&[0, 0], &[0, 1], 1)]));
        assert_eq!(z[1], tp(&[(&[1, 0], &[0, 0], 1)]));
        let b = parse_presentation(&doc(2, &[("x", 2, P)], &["x^2"])).unwrap();
        let z = zeta_coefficients(&b, &b.relations[0]).unwrap();
        assert_eq!(z[0], tp(&[(&[0], &[1], 1), (&[1], &[0], 1)]));
        let c = parse_presentation(&doc(3, &[("x", 2, P)], &["x^3"])).unwrap();
        let z = zeta_coefficients(&c, &c.relations[0]).unwrap();
        assert_eq!(z[0], tp(&[(&[0], &[2], 1), (&[1], &[1], 1), (&[2], &[0], 1)]));
    }

    #[test]
    fn corrupted_zeta_is_caught() {
        let b = parse_presentation(&doc(2, &[("x", 2, P)], &["x^2"])).unwrap();
        let mut z = telescoping_zeta(&b, &b.relations[0]);
        tensor_add(&mut z[0], (vec![1], vec![0]), 1, &b.field);
        assert!(matches!(verify_zeta(&b, 0, &b.relations[0], &z), Err(AlgebraError::ZetaCheck { .. })));
    }

    #[test]
    fn regularity() {
        let a = parse_presentation(&doc(2, &[("x1", 2, P), ("x2", 2, P)], &["x1^2", "x2^2"])).unwrap();
        assert!(validate_regular_sequence(&a, 20).passed);
        let b = parse_presentation(&doc(2, &[("x1", 2, P), ("x2", 2, P)], &["x1*x2", "x1^2*x2"])).unwrap();
        let r = validate_regular_sequence(&b, 20);
        assert!(!r.passed);
        assert!(r.first_failing_degree.is_some());
        let c = parse_presentation(&doc(2, &[("x", 2, P)], &[])).unwrap();
        assert!(validate_regular_sequence(&c, 20).passed);
    }
}
