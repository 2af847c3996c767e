//! Graded-commutative ring presentations with Koszul signs.
//!
//! A presentation is a list of generators with integer degrees (possibly
//! negative) plus integer combinations of monomials as relations. Odd
//! exterior generators square to zero; even generators are polynomial unless
//! a unit-coefficient power relation caps them. A generator of nonpositive
//! degree must carry such a cap, otherwise single degrees would contain
//! infinitely many monomials and the constructor refuses the input.
//!
//! Degree components are computed by exact linear algebra: the free group on
//! the monomial basis of a degree modulo the degree slice of the relation
//! ideal, normalized by Smith normal form. No Gröbner machinery is needed
//! because nilpotence caps come from pure monomial relations.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::groups::{bigint_from_json, bigint_to_json, FinAbGroup};
use crate::linalg::{IntMatrix, Subquotient};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RingError {
    #[error("duplicate generator name {0:?}")]
    DuplicateGenerator(String),
    #[error("exterior generator {name:?} must have odd degree, got {degree}")]
    ExteriorEvenDegree { name: String, degree: i64 },
    #[error("relation {index} is not homogeneous")]
    InhomogeneousRelation { index: usize },
    #[error(
        "generator {0:?} of nonpositive degree admits no unit power relation; \
         its degree components would be infinitely generated"
    )]
    DegreewiseInfinite(String),
    #[error("unknown generator {0:?}")]
    UnknownGenerator(String),
    #[error("element is not homogeneous")]
    NotHomogeneous,
    #[error("invalid presentation data: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorKind {
    /// Unbounded powers. Odd polynomial generators model Pontryagin rings
    /// such as the loop space of an even sphere, where the square of an odd
    /// class does not vanish.
    Polynomial,
    /// Squares to zero; requires odd degree.
    Exterior,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingGenerator {
    pub name: String,
    pub degree: i64,
    pub kind: GeneratorKind,
}

/// Integer combination of exponent vectors over the generators of a fixed
/// presentation, kept in sorted normal form with zero coefficients dropped.
#[derive(Clone, PartialEq, Eq)]
pub struct RingElement {
    terms: Vec<(BigInt, Vec<u32>)>,
}

impl RingElement {
    pub fn zero() -> Self {
        RingElement { terms: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(BigInt, Vec<u32>)] {
        &self.terms
    }

    fn from_map(map: BTreeMap<Vec<u32>, BigInt>) -> Self {
        let terms = map.into_iter().filter(|(_, c)| !c.is_zero()).map(|(e, c)| (c, e)).collect();
        RingElement { terms }
    }

    pub fn add(&self, other: &RingElement) -> RingElement {
        let mut map: BTreeMap<Vec<u32>, BigInt> = BTreeMap::new();
        for (c, e) in self.terms.iter().chain(other.terms.iter()) {
            let entry = map.entry(e.clone()).or_insert_with(BigInt::zero);
            *entry += c;
        }
        RingElement::from_map(map)
    }

    pub fn neg(&self) -> RingElement {
        RingElement { terms: self.terms.iter().map(|(c, e)| (-c, e.clone())).collect() }
    }

    pub fn scale(&self, k: &BigInt) -> RingElement {
        if k.is_zero() {
            return RingElement::zero();
        }
        RingElement { terms: self.terms.iter().map(|(c, e)| (c * k, e.clone())).collect() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoefficientTag {
    Integers,
    PrimeField(u64),
}

/// A graded-commutative ring given by generators and relations.
#[derive(Clone)]
pub struct RingPresentation {
    gens: Vec<RingGenerator>,
    /// Relations as given (normalized term lists), for display and JSON.
    relations: Vec<RingElement>,
    /// Relations with cap-divisible terms dropped; used for slice assembly.
    active_relations: Vec<RingElement>,
    tag: CoefficientTag,
    /// Exponent caps: 1 for exterior generators, `k - 1` for a generator
    /// with a unit power relation `g^k`, `None` for free polynomial powers.
    caps: Vec<Option<u32>>,
}

impl PartialEq for RingPresentation {
    fn eq(&self, other: &Self) -> bool {
        self.gens == other.gens && self.relations == other.relations && self.tag == other.tag
    }
}
impl Eq for RingPresentation {}

/// Term syntax for building relations and elements: coefficient times a list
/// of `(generator name, exponent)` pairs.
pub type TermSpec<'a> = (i64, &'a [(&'a str, u32)]);

impl RingPresentation {
    /// Generator-level checks only; relations and the nilpotence check follow.
    fn shell(gens: Vec<RingGenerator>, tag: CoefficientTag) -> Result<Self, RingError> {
        let mut names = std::collections::HashSet::new();
        for g in &gens {
            if !names.insert(g.name.clone()) {
                return Err(RingError::DuplicateGenerator(g.name.clone()));
            }
            if g.kind == GeneratorKind::Exterior && g.degree % 2 == 0 {
                return Err(RingError::ExteriorEvenDegree {
                    name: g.name.clone(),
                    degree: g.degree,
                });
            }
        }
        let caps = gens
            .iter()
            .map(|g| match g.kind {
                GeneratorKind::Exterior => Some(1),
                GeneratorKind::Polynomial => None,
            })
            .collect();
        Ok(RingPresentation {
            gens,
            relations: Vec::new(),
            active_relations: Vec::new(),
            tag,
            caps,
        })
    }

    fn check_degreewise_finite(&self) -> Result<(), RingError> {
        for (g, cap) in self.gens.iter().zip(&self.caps) {
            if g.degree <= 0 && cap.is_none() {
                return Err(RingError::DegreewiseInfinite(g.name.clone()));
            }
        }
        Ok(())
    }

    pub fn new(
        gens: Vec<RingGenerator>,
        relation_specs: &[&[TermSpec<'_>]],
        tag: CoefficientTag,
    ) -> Result<Self, RingError> {
        let mut shell = Self::shell(gens, tag)?;

        // Parse relations against the generator list; drop identically-zero
        // terms (odd generator squared).
        let mut relations = Vec::new();
        for (idx, spec) in relation_specs.iter().enumerate() {
            let mut elem = RingElement::zero();
            for (coeff, mono) in spec.iter() {
                let exps = shell.exponents_from_names(mono)?;
                if shell.term_is_identically_zero(&exps) {
                    continue;
                }
                elem = elem.add(&RingElement { terms: vec![(BigInt::from(*coeff), exps)] });
            }
            if elem.is_zero() {
                continue;
            }
            let degrees: Vec<i64> =
                elem.terms.iter().map(|(_, e)| shell.monomial_degree(e)).collect();
            if degrees.windows(2).any(|w| w[0] != w[1]) {
                return Err(RingError::InhomogeneousRelation { index: idx });
            }
            relations.push(elem);
        }

        shell.install_relations(relations);
        shell.check_degreewise_finite()?;
        Ok(shell)
    }

    pub fn generators(&self) -> &[RingGenerator] {
        &self.gens
    }

    pub fn relations(&self) -> &[RingElement] {
        &self.relations
    }

    pub(crate) fn active_relations(&self) -> &[RingElement] {
        &self.active_relations
    }

    /// Monomial with the given exponent vector, zero if caps annihilate it.
    pub(crate) fn monomial_from_exps(&self, exps: Vec<u32>) -> RingElement {
        if self.term_is_identically_zero(&exps) || self.exceeds_caps(&exps) {
            return RingElement::zero();
        }
        RingElement { terms: vec![(BigInt::one(), exps)] }
    }

    pub fn coefficient_tag(&self) -> CoefficientTag {
        self.tag
    }

    pub fn generator_index(&self, name: &str) -> Result<usize, RingError> {
        self.gens
            .iter()
            .position(|g| g.name == name)
            .ok_or_else(|| RingError::UnknownGenerator(name.to_string()))
    }

    fn exponents_from_names(&self, mono: &[(&str, u32)]) -> Result<Vec<u32>, RingError> {
        let mut exps = vec![0u32; self.gens.len()];
        for (name, e) in mono {
            let i = self.generator_index(name)?;
            exps[i] += e;
        }
        Ok(exps)
    }

    fn term_is_identically_zero(&self, exps: &[u32]) -> bool {
        exps.iter()
            .zip(&self.gens)
            .any(|(&e, g)| g.kind == GeneratorKind::Exterior && e > 1)
    }

    fn exceeds_caps(&self, exps: &[u32]) -> bool {
        exps.iter().zip(&self.caps).any(|(&e, cap)| cap.is_some_and(|c| e > c))
    }

    pub fn monomial_degree(&self, exps: &[u32]) -> i64 {
        exps.iter().zip(&self.gens).map(|(&e, g)| e as i64 * g.degree).sum()
    }

    /// Homogeneous degree of an element, if it has one. The zero element
    /// reports `None`.
    pub fn degree_of(&self, elem: &RingElement) -> Option<i64> {
        let mut deg = None;
        for (_, e) in &elem.terms {
            let d = self.monomial_degree(e);
            match deg {
                None => deg = Some(d),
                Some(cur) if cur != d => return None,
                _ => {}
            }
        }
        deg
    }

    /// Builds a single monomial element, reporting unknown names.
    pub fn monomial(&self, coeff: i64, mono: &[(&str, u32)]) -> Result<RingElement, RingError> {
        let exps = self.exponents_from_names(mono)?;
        if coeff == 0 || self.term_is_identically_zero(&exps) || self.exceeds_caps(&exps) {
            return Ok(RingElement::zero());
        }
        Ok(RingElement { terms: vec![(BigInt::from(coeff), exps)] })
    }

    pub fn element(&self, terms: &[TermSpec<'_>]) -> Result<RingElement, RingError> {
        let mut out = RingElement::zero();
        for (c, m) in terms {
            out = out.add(&self.monomial(*c, m)?);
        }
        Ok(out)
    }

    pub fn one(&self) -> RingElement {
        RingElement { terms: vec![(BigInt::one(), vec![0; self.gens.len()])] }
    }

    fn parity(&self, i: usize) -> u32 {
        self.gens[i].degree.rem_euclid(2) as u32
    }

    /// Koszul sign and merged exponents of a product of two monomials, or
    /// `None` when the product vanishes (odd square or nilpotence cap).
    fn mul_monomials(&self, a: &[u32], b: &[u32]) -> Option<(bool, Vec<u32>)> {
        let n = self.gens.len();
        let mut exps = vec![0u32; n];
        for i in 0..n {
            exps[i] = a[i].checked_add(b[i]).expect("exponent overflow");
        }
        if self.term_is_identically_zero(&exps) || self.exceeds_caps(&exps) {
            return None;
        }
        // Move each factor of b left past the higher-indexed factors of a.
        let mut suffix = vec![0u32; n + 1];
        for i in (0..n).rev() {
            suffix[i] = suffix[i + 1] + a[i] * self.parity(i);
        }
        let mut sign = 0u32;
        for i in 0..n {
            sign += b[i] * self.parity(i) * suffix[i + 1];
        }
        Some((sign % 2 == 1, exps))
    }

    /// Product in the free graded-commutative algebra, with nilpotence caps
    /// applied but no relation reduction.
    pub fn raw_mul(&self, x: &RingElement, y: &RingElement) -> RingElement {
        let mut map: BTreeMap<Vec<u32>, BigInt> = BTreeMap::new();
        for (cx, ex) in &x.terms {
            for (cy, ey) in &y.terms {
                if let Some((neg, exps)) = self.mul_monomials(ex, ey) {
                    let coeff = if neg { -(cx * cy) } else { cx * cy };
                    let entry = map.entry(exps).or_insert_with(BigInt::zero);
                    *entry += coeff;
                }
            }
        }
        RingElement::from_map(map)
    }

    /// The complete finite set of monomials of total degree `n`, in a fixed
    /// deterministic (lexicographic) order.
    pub fn monomials_in_degree(&self, n: i64) -> Vec<Vec<u32>> {
        let count = self.gens.len();
        // Most negative achievable degree of a tail of generators.
        let mut min_tail = vec![0i64; count + 1];
        for i in (0..count).rev() {
            let d = self.gens[i].degree;
            let m = if d < 0 {
                let cap = self.caps[i].expect("negative generator capped") as i64;
                cap * d
            } else {
                0
            };
            min_tail[i] = min_tail[i + 1] + m;
        }
        // Most positive achievable degree of a tail, None = unbounded.
        let mut max_tail: Vec<Option<i64>> = vec![Some(0); count + 1];
        for i in (0..count).rev() {
            let d = self.gens[i].degree;
            let here = if d > 0 { self.caps[i].map(|c| c as i64 * d) } else { Some(0) };
            max_tail[i] = match (here, max_tail[i + 1]) {
                (Some(a), Some(b)) => Some(a + b),
                _ => None,
            };
        }

        let mut out = Vec::new();
        let mut exps = vec![0u32; count];
        self.enumerate(0, 0, n, &min_tail, &max_tail, &mut exps, &mut out);
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn enumerate(
        &self,
        i: usize,
        acc: i64,
        n: i64,
        min_tail: &[i64],
        max_tail: &[Option<i64>],
        exps: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        if i == self.gens.len() {
            if acc == n {
                out.push(exps.clone());
            }
            return;
        }
        let d = self.gens[i].degree;
        let mut upper: Option<i64> = self.caps[i].map(|c| c as i64);
        if d > 0 {
            // budget: acc + e*d + min_tail[i+1] <= n must stay satisfiable
            let budget = (n - acc - min_tail[i + 1]).div_euclid(d).max(-1);
            upper = Some(upper.map_or(budget, |u| u.min(budget)));
        } else if d < 0 {
            // reachability: acc + e*d + max_tail[i+1] >= n when max is finite
            if let Some(mt) = max_tail[i + 1] {
                let room = (acc + mt - n).div_euclid(-d).max(-1);
                upper = Some(upper.map_or(room, |u| u.min(room)));
            }
        }
        let upper = match upper {
            Some(u) if u < 0 => return,
            Some(u) => u,
            // degree-zero generators always carry a cap, positive polynomial
            // generators got a budget above
            None => unreachable!("unbounded enumeration"),
        };
        for e in 0..=upper {
            exps[i] = e as u32;
            self.enumerate(i + 1, acc + e * d, n, min_tail, max_tail, exps, out);
        }
        exps[i] = 0;
    }

    /// Basis monomials, index map, and the subquotient by the degree slice
    /// of the relation ideal.
    pub(crate) fn component_data(&self, n: i64) -> ComponentData {
        let monomials = self.monomials_in_degree(n);
        let index: HashMap<Vec<u32>, usize> =
            monomials.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let m = monomials.len();

        let mut columns: Vec<Vec<BigInt>> = Vec::new();
        for rel in &self.active_relations {
            let Some(rel_deg) = self.degree_of(rel) else { continue };
            for mu in self.monomials_in_degree(n - rel_deg) {
                let factor = RingElement { terms: vec![(BigInt::one(), mu)] };
                let prod = self.raw_mul(&factor, rel);
                if prod.is_zero() {
                    continue;
                }
                let mut col = vec![BigInt::zero(); m];
                for (c, e) in &prod.terms {
                    let idx = index[e];
                    col[idx] += c;
                }
                columns.push(col);
            }
        }
        if let CoefficientTag::PrimeField(p) = self.tag {
            for i in 0..m {
                let mut col = vec![BigInt::zero(); m];
                col[i] = BigInt::from(p);
                columns.push(col);
            }
        }
        let rel_matrix = IntMatrix::from_columns(m, &columns);
        let sq = Subquotient::quotient(m, &rel_matrix);
        ComponentData { monomials, index, sq }
    }

    /// The degree-`n` component as an abelian group in normal form.
    pub fn component(&self, n: i64) -> FinAbGroup {
        self.component_data(n).sq.group().clone()
    }

    /// Product of two homogeneous elements, reduced to the canonical
    /// representative modulo the relations of its degree component.
    pub fn product(&self, x: &RingElement, y: &RingElement) -> Result<RingElement, RingError> {
        if !x.is_zero() && self.degree_of(x).is_none() {
            return Err(RingError::NotHomogeneous);
        }
        if !y.is_zero() && self.degree_of(y).is_none() {
            return Err(RingError::NotHomogeneous);
        }
        Ok(self.reduce(&self.raw_mul(x, y)))
    }

    /// Canonical representative of an element modulo the relation ideal,
    /// computed degreewise.
    pub fn reduce(&self, elem: &RingElement) -> RingElement {
        if elem.is_zero() {
            return RingElement::zero();
        }
        if self.degree_of(elem).is_none() {
            // Reduce each homogeneous piece separately.
            let mut by_degree: BTreeMap<i64, RingElement> = BTreeMap::new();
            for (c, e) in &elem.terms {
                let d = self.monomial_degree(e);
                let piece = RingElement { terms: vec![(c.clone(), e.clone())] };
                by_degree.entry(d).and_modify(|acc| *acc = acc.add(&piece)).or_insert(piece);
            }
            return by_degree
                .values()
                .fold(RingElement::zero(), |acc, p| acc.add(&self.reduce(p)));
        }
        let deg = self.degree_of(elem).unwrap();
        let data = self.component_data(deg);
        let coords = data.coords(elem);
        let projected = data.sq.project(&coords).expect("full quotient always projects");
        let mut rep = RingElement::zero();
        for (j, c) in projected.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let col = data.sq.basis().column(j);
            for (i, v) in col.iter().enumerate() {
                if !v.is_zero() {
                    rep = rep
                        .add(&RingElement { terms: vec![(c * v, data.monomials[i].clone())] });
                }
            }
        }
        rep
    }

    pub fn is_zero_mod_relations(&self, elem: &RingElement) -> bool {
        self.reduce(elem).is_zero()
    }

    /// Tensor product of presentations with disjoint generator names: the
    /// generators of both, relations lifted, no cross relations.
    pub fn tensor_with(&self, other: &RingPresentation) -> Result<RingPresentation, RingError> {
        if self.tag != other.tag {
            return Err(RingError::Invalid("coefficient tags differ".into()));
        }
        let mut gens = self.gens.clone();
        gens.extend(other.gens.iter().cloned());
        let shift = self.gens.len();
        let total = gens.len();
        let lift_left = |e: &[u32]| {
            let mut v = vec![0u32; total];
            v[..shift].copy_from_slice(e);
            v
        };
        let lift_right = |e: &[u32]| {
            let mut v = vec![0u32; total];
            v[shift..].copy_from_slice(e);
            v
        };
        let mut out = RingPresentation::shell(gens, self.tag)?;
        let mut relations = Vec::new();
        for rel in &self.relations {
            relations.push(RingElement {
                terms: rel.terms.iter().map(|(c, e)| (c.clone(), lift_left(e))).collect(),
            });
        }
        for rel in &other.relations {
            relations.push(RingElement {
                terms: rel.terms.iter().map(|(c, e)| (c.clone(), lift_right(e))).collect(),
            });
        }
        out.install_relations(relations);
        out.check_degreewise_finite()?;
        Ok(out)
    }

    /// Replaces the relation set with already-built elements, recomputing
    /// caps and active slices.
    pub(crate) fn install_relations(&mut self, relations: Vec<RingElement>) {
        self.caps = self
            .gens
            .iter()
            .map(|g| match g.kind {
                GeneratorKind::Exterior => Some(1),
                GeneratorKind::Polynomial => None,
            })
            .collect();
        for rel in &relations {
            if rel.terms.len() != 1 {
                continue;
            }
            let (coeff, exps) = &rel.terms[0];
            if !coeff.abs().is_one() {
                continue;
            }
            let support: Vec<usize> =
                exps.iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, _)| i).collect();
            if let [i] = support[..] {
                let cap = exps[i].saturating_sub(1);
                self.caps[i] = Some(self.caps[i].map_or(cap, |c| c.min(cap)));
            }
        }
        self.active_relations = relations
            .iter()
            .map(|rel| RingElement {
                terms: rel
                    .terms
                    .iter()
                    .filter(|(_, e)| !self.exceeds_caps(e))
                    .cloned()
                    .collect(),
            })
            .filter(|rel| !rel.is_zero())
            .collect();
        self.relations = relations;
    }

    /// True when the presentation is a free polynomial ⊗ exterior algebra:
    /// no relations, even generators polynomial, odd generators exterior.
    pub fn is_free_poly_exterior(&self) -> bool {
        self.relations.is_empty()
            && self.gens.iter().all(|g| match g.kind {
                GeneratorKind::Polynomial => g.degree % 2 == 0,
                GeneratorKind::Exterior => g.degree % 2 != 0,
            })
    }

    /// Smallest total degree any monomial can reach.
    pub fn min_degree(&self) -> i64 {
        self.gens
            .iter()
            .zip(&self.caps)
            .map(|(g, cap)| {
                if g.degree < 0 {
                    cap.expect("negative generator capped") as i64 * g.degree
                } else {
                    0
                }
            })
            .sum()
    }

    pub fn display_element(&self, elem: &RingElement) -> String {
        if elem.is_zero() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (c, e) in &elem.terms {
            let mono: Vec<String> = e
                .iter()
                .zip(&self.gens)
                .filter(|(&e, _)| e > 0)
                .map(|(&e, g)| if e == 1 { g.name.clone() } else { format!("{}^{}", g.name, e) })
                .collect();
            let mono_str = if mono.is_empty() { "1".to_string() } else { mono.join(" ") };
            let term = if c.is_one() && !mono.is_empty() {
                mono_str
            } else if (-c).is_one() && !mono.is_empty() {
                format!("-{mono_str}")
            } else if mono.is_empty() {
                c.to_string()
            } else {
                format!("{c} {mono_str}")
            };
            parts.push(term);
        }
        parts.join(" + ").replace("+ -", "- ")
    }

    pub fn to_json(&self) -> Value {
        let gens: Vec<Value> = self
            .gens
            .iter()
            .map(|g| {
                json!({
                    "name": g.name,
                    "degree": g.degree,
                    "kind": match g.kind {
                        GeneratorKind::Polynomial => "polynomial",
                        GeneratorKind::Exterior => "exterior",
                    },
                })
            })
            .collect();
        let rels: Vec<Value> = self
            .relations
            .iter()
            .map(|rel| {
                Value::Array(
                    rel.terms
                        .iter()
                        .map(|(c, e)| {
                            let mono: serde_json::Map<String, Value> = e
                                .iter()
                                .zip(&self.gens)
                                .filter(|(&e, _)| e > 0)
                                .map(|(&e, g)| (g.name.clone(), json!(e)))
                                .collect();
                            json!({ "coeff": bigint_to_json(c), "monomial": mono })
                        })
                        .collect(),
                )
            })
            .collect();
        json!({
            "generators": gens,
            "relations": rels,
            "coefficients": match self.tag {
                CoefficientTag::Integers => json!("Z"),
                CoefficientTag::PrimeField(p) => json!({ "prime": p }),
            },
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, RingError> {
        let obj = v.as_object().ok_or_else(|| RingError::Invalid("expected object".into()))?;
        let gens_json = obj
            .get("generators")
            .and_then(Value::as_array)
            .ok_or_else(|| RingError::Invalid("missing generators".into()))?;
        let mut gens = Vec::new();
        for g in gens_json {
            let name = g["name"]
                .as_str()
                .ok_or_else(|| RingError::Invalid("generator name".into()))?
                .to_string();
            let degree = g["degree"]
                .as_i64()
                .ok_or_else(|| RingError::Invalid("generator degree".into()))?;
            let kind = match g["kind"].as_str() {
                Some("polynomial") | None => GeneratorKind::Polynomial,
                Some("exterior") => GeneratorKind::Exterior,
                Some(other) => return Err(RingError::Invalid(format!("kind {other:?}"))),
            };
            gens.push(RingGenerator { name, degree, kind });
        }
        let mut shell = RingPresentation::shell(gens, CoefficientTag::Integers)?;
        if let Some(Value::Object(c)) = obj.get("coefficients") {
            if let Some(p) = c.get("prime").and_then(Value::as_u64) {
                shell.tag = CoefficientTag::PrimeField(p);
            }
        }
        let mut relations = Vec::new();
        if let Some(Value::Array(rels)) = obj.get("relations") {
            for rel in rels {
                let terms_json = rel
                    .as_array()
                    .ok_or_else(|| RingError::Invalid("relation must be array".into()))?;
                let mut elem = RingElement::zero();
                for t in terms_json {
                    let coeff = bigint_from_json(&t["coeff"])
                        .map_err(|e| RingError::Invalid(e.to_string()))?;
                    let mut exps = vec![0u32; shell.gens.len()];
                    if let Some(mono) = t["monomial"].as_object() {
                        for (name, e) in mono {
                            let i = shell.generator_index(name)?;
                            exps[i] = e
                                .as_u64()
                                .ok_or_else(|| RingError::Invalid("exponent".into()))?
                                as u32;
                        }
                    }
                    if !shell.term_is_identically_zero(&exps) {
                        elem = elem.add(&RingElement { terms: vec![(coeff, exps)] });
                    }
                }
                if !elem.is_zero() {
                    relations.push(elem);
                }
            }
        }
        shell.install_relations(relations);
        shell.check_degreewise_finite()?;
        Ok(shell)
    }
}

impl fmt::Debug for RingPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RingPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = match self.tag {
            CoefficientTag::Integers => "Z".to_string(),
            CoefficientTag::PrimeField(p) => format!("F_{p}"),
        };
        let polys: Vec<&str> = self
            .gens
            .iter()
            .filter(|g| g.kind == GeneratorKind::Polynomial)
            .map(|g| g.name.as_str())
            .collect();
        let exts: Vec<&str> = self
            .gens
            .iter()
            .filter(|g| g.kind == GeneratorKind::Exterior)
            .map(|g| g.name.as_str())
            .collect();
        let mut factors = Vec::new();
        if !exts.is_empty() {
            factors.push(format!("Λ({})", exts.join(", ")));
        }
        if !polys.is_empty() {
            factors.push(format!("{base}[{}]", polys.join(", ")));
        }
        if factors.is_empty() {
            factors.push(base);
        }
        write!(f, "{}", factors.join(" ⊗ "))?;
        if !self.relations.is_empty() {
            let rels: Vec<String> =
                self.relations.iter().map(|r| self.display_element(r)).collect();
            write!(f, " / ({})", rels.join(", "))?;
        }
        Ok(())
    }
}

pub(crate) struct ComponentData {
    pub monomials: Vec<Vec<u32>>,
    pub index: HashMap<Vec<u32>, usize>,
    pub sq: Subquotient,
}

impl ComponentData {
    /// Coordinates of a homogeneous element over the monomial basis.
    /// Panics if some term is not a basis monomial of this degree.
    pub fn coords(&self, elem: &RingElement) -> Vec<BigInt> {
        let mut v = vec![BigInt::zero(); self.monomials.len()];
        for (c, e) in elem.terms() {
            let idx = *self.index.get(e).expect("term does not belong to this degree component");
            v[idx] += c;
        }
        v
    }

    pub fn element_from_coords(&self, coords: &[BigInt]) -> RingElement {
        let mut elem = RingElement::zero();
        for (i, c) in coords.iter().enumerate() {
            if !c.is_zero() {
                elem = elem
                    .add(&RingElement { terms: vec![(c.clone(), self.monomials[i].clone())] });
            }
        }
        elem
    }
}

impl fmt::Debug for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(c, e)| format!("{c}·{e:?}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::FinAbGroup;

    fn gen(name: &str, degree: i64, kind: GeneratorKind) -> RingGenerator {
        RingGenerator { name: name.to_string(), degree, kind }
    }

    /// Λ(a) ⊗ Z[u] with |a| = -3, |u| = 2: the odd-sphere loop ring shape.
    fn odd_sphere_ring() -> RingPresentation {
        RingPresentation::new(
            vec![gen("a", -3, GeneratorKind::Exterior), gen("u", 2, GeneratorKind::Polynomial)],
            &[],
            CoefficientTag::Integers,
        )
        .unwrap()
    }

    /// Λ(b) ⊗ Z[a,v]/(a², ab, 2av) with |b| = -1, |a| = -2, |v| = 2.
    fn even_sphere_ring() -> RingPresentation {
        RingPresentation::new(
            vec![
                gen("b", -1, GeneratorKind::Exterior),
                gen("a", -2, GeneratorKind::Polynomial),
                gen("v", 2, GeneratorKind::Polynomial),
            ],
            &[
                &[(1, &[("a", 2)])],
                &[(1, &[("a", 1), ("b", 1)])],
                &[(2, &[("a", 1), ("v", 1)])],
            ],
            CoefficientTag::Integers,
        )
        .unwrap()
    }

    /// Λ(w) ⊗ Z[c,u]/(c³, wc², 3c²u): the CP² loop ring.
    fn cp2_ring() -> RingPresentation {
        RingPresentation::new(
            vec![
                gen("w", -1, GeneratorKind::Exterior),
                gen("c", -2, GeneratorKind::Polynomial),
                gen("u", 4, GeneratorKind::Polynomial),
            ],
            &[
                &[(1, &[("c", 3)])],
                &[(1, &[("w", 1), ("c", 2)])],
                &[(3, &[("c", 2), ("u", 1)])],
            ],
            CoefficientTag::Integers,
        )
        .unwrap()
    }

    #[test]
    fn monomials_odd_sphere() {
        let p = odd_sphere_ring();
        // degree 0: only 1 (a u^k has degree 2k-3, odd)
        assert_eq!(p.monomials_in_degree(0), vec![vec![0, 0]]);
        // degree -1: a u
        assert_eq!(p.monomials_in_degree(-1), vec![vec![1, 1]]);
        // below the minimum reachable degree: empty
        assert!(p.monomials_in_degree(-4).is_empty());
        assert!(p.monomials_in_degree(-17).is_empty());
    }

    #[test]
    fn nonpositive_generator_needs_cap() {
        let err = RingPresentation::new(
            vec![gen("c", -2, GeneratorKind::Polynomial)],
            &[],
            CoefficientTag::Integers,
        )
        .unwrap_err();
        assert_eq!(err, RingError::DegreewiseInfinite("c".into()));

        // Z[t]/(t²-1): degree-zero generator without a unit power relation
        let err = RingPresentation::new(
            vec![gen("t", 0, GeneratorKind::Polynomial)],
            &[&[(1, &[("t", 2)]), (-1, &[])]],
            CoefficientTag::Integers,
        )
        .unwrap_err();
        assert_eq!(err, RingError::DegreewiseInfinite("t".into()));
    }

    #[test]
    fn component_even_sphere_degree_zero() {
        // basis 1 and a v, with 2 a v = 0: Z + Z/2
        let p = even_sphere_ring();
        assert_eq!(p.component(0), FinAbGroup::new(1, vec![BigInt::from(2)]));
    }

    #[test]
    fn component_cp2_degree_zero() {
        // basis 1 and c²u, with 3 c²u = 0: Z + Z/3
        let p = cp2_ring();
        assert_eq!(p.component(0), FinAbGroup::new(1, vec![BigInt::from(3)]));
    }

    #[test]
    fn component_odd_sphere() {
        let p = odd_sphere_ring();
        assert_eq!(p.component(2), FinAbGroup::free(1)); // u
        assert_eq!(p.component(-3), FinAbGroup::free(1)); // a
        assert_eq!(p.component(-2), FinAbGroup::trivial());
    }

    #[test]
    fn product_relations() {
        let p = cp2_ring();
        let w = p.monomial(1, &[("w", 1)]).unwrap();
        let c = p.monomial(1, &[("c", 1)]).unwrap();
        let c2 = p.monomial(1, &[("c", 2)]).unwrap();
        // odd square vanishes
        assert!(p.product(&w, &w).unwrap().is_zero());
        // c² · c = c³ = 0
        assert!(p.product(&c2, &c).unwrap().is_zero());
        // w c · c = w c² = 0 by the relation
        let wc = p.product(&w, &c).unwrap();
        assert!(p.product(&wc, &c).unwrap().is_zero());
    }

    #[test]
    fn product_free_part_nonzero() {
        let p = odd_sphere_ring();
        let a = p.monomial(1, &[("a", 1)]).unwrap();
        for k in 1..6 {
            let uk = p.monomial(1, &[("u", k)]).unwrap();
            let prod = p.product(&a, &uk).unwrap();
            assert_eq!(prod, p.monomial(1, &[("a", 1), ("u", k)]).unwrap());
        }
    }

    #[test]
    fn koszul_sign_rule() {
        // two odd exterior generators anticommute
        let p = RingPresentation::new(
            vec![gen("x", 3, GeneratorKind::Exterior), gen("y", 5, GeneratorKind::Exterior)],
            &[],
            CoefficientTag::Integers,
        )
        .unwrap();
        let x = p.monomial(1, &[("x", 1)]).unwrap();
        let y = p.monomial(1, &[("y", 1)]).unwrap();
        let xy = p.product(&x, &y).unwrap();
        let yx = p.product(&y, &x).unwrap();
        assert_eq!(yx, xy.neg());
    }

    #[test]
    fn sign_rule_with_negative_degrees() {
        // parity is taken of the (possibly negative) integer degree
        let p = even_sphere_ring();
        let b = p.monomial(1, &[("b", 1)]).unwrap(); // degree -1, odd
        let v = p.monomial(1, &[("v", 1)]).unwrap(); // degree 2, even
        assert_eq!(p.product(&b, &v).unwrap(), p.product(&v, &b).unwrap());
    }

    #[test]
    fn odd_polynomial_generator_squares_nonzero() {
        // Pontryagin ring of the loop space of an even sphere: Z[x], |x| odd
        let p = RingPresentation::new(
            vec![gen("x", 3, GeneratorKind::Polynomial)],
            &[],
            CoefficientTag::Integers,
        )
        .unwrap();
        let x = p.monomial(1, &[("x", 1)]).unwrap();
        let x2 = p.product(&x, &x).unwrap();
        assert_eq!(x2, p.monomial(1, &[("x", 2)]).unwrap());
        assert_eq!(p.component(6), FinAbGroup::free(1));
    }

    #[test]
    fn component_independent_of_generator_order() {
        let p1 = even_sphere_ring();
        let p2 = RingPresentation::new(
            vec![
                gen("v", 2, GeneratorKind::Polynomial),
                gen("a", -2, GeneratorKind::Polynomial),
                gen("b", -1, GeneratorKind::Exterior),
            ],
            &[
                &[(2, &[("a", 1), ("v", 1)])],
                &[(1, &[("a", 1), ("b", 1)])],
                &[(1, &[("a", 2)])],
            ],
            CoefficientTag::Integers,
        )
        .unwrap();
        for n in -6..=10 {
            assert_eq!(p1.component(n), p2.component(n), "degree {n}");
        }
    }

    #[test]
    fn tensor_presentation_components() {
        // rank of a tensor component is the convolution of free ranks
        let left = RingPresentation::new(
            vec![gen("a", -3, GeneratorKind::Exterior)],
            &[],
            CoefficientTag::Integers,
        )
        .unwrap();
        let right = RingPresentation::new(
            vec![gen("u", 2, GeneratorKind::Polynomial)],
            &[],
            CoefficientTag::Integers,
        )
        .unwrap();
        let t = left.tensor_with(&right).unwrap();
        for n in -4..=8 {
            let expect: usize = (-4..=8)
                .map(|k| left.component(k).rank() * right.component(n - k).rank())
                .sum();
            assert_eq!(t.component(n).rank(), expect, "degree {n}");
        }
    }

    #[test]
    fn prime_field_component() {
        let p = RingPresentation::new(
            vec![
                gen("b", -1, GeneratorKind::Exterior),
                gen("a", -2, GeneratorKind::Polynomial),
                gen("v", 2, GeneratorKind::Polynomial),
            ],
            &[
                &[(1, &[("a", 2)])],
                &[(1, &[("a", 1), ("b", 1)])],
                &[(2, &[("a", 1), ("v", 1)])],
            ],
            CoefficientTag::PrimeField(2),
        )
        .unwrap();
        // over F_2 the relation 2av vanishes: degree 0 is F_2{1, av}
        assert_eq!(
            p.component(0),
            FinAbGroup::new(0, vec![BigInt::from(2), BigInt::from(2)])
        );
    }

    #[test]
    fn associativity_on_sampled_monomials() {
        let p = cp2_ring();
        let elems: Vec<RingElement> = vec![
            p.monomial(1, &[("w", 1)]).unwrap(),
            p.monomial(1, &[("c", 1)]).unwrap(),
            p.monomial(1, &[("u", 1)]).unwrap(),
            p.monomial(2, &[("c", 1), ("u", 1)]).unwrap(),
            p.monomial(1, &[("w", 1), ("u", 2)]).unwrap(),
        ];
        for x in &elems {
            for y in &elems {
                for z in &elems {
                    let lhs = p.product(&p.product(x, y).unwrap(), z).unwrap();
                    let rhs = p.product(x, &p.product(y, z).unwrap()).unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn graded_commutativity_sampled() {
        let p = even_sphere_ring();
        let elems = [
            p.monomial(1, &[("b", 1)]).unwrap(),
            p.monomial(1, &[("a", 1)]).unwrap(),
            p.monomial(1, &[("v", 2)]).unwrap(),
            p.monomial(1, &[("b", 1), ("v", 1)]).unwrap(),
        ];
        for x in &elems {
            for y in &elems {
                let dx = p.degree_of(x).unwrap();
                let dy = p.degree_of(y).unwrap();
                let xy = p.product(x, y).unwrap();
                let yx = p.product(y, x).unwrap();
                let expect = if (dx % 2 != 0) && (dy % 2 != 0) { yx.neg() } else { yx };
                assert_eq!(xy, expect);
            }
        }
    }

    #[test]
    fn display_formats() {
        let p = even_sphere_ring();
        let s = p.to_string();
        assert!(s.contains("Λ(b)"), "{s}");
        assert!(s.contains("Z[a, v]"), "{s}");
        assert!(s.contains("a^2"), "{s}");
    }

    #[test]
    fn json_round_trip() {
        let p = cp2_ring();
        let v = p.to_json();
        let q = RingPresentation::from_json(&v).unwrap();
        assert_eq!(p, q);
        for n in -6..=8 {
            assert_eq!(p.component(n), q.component(n));
        }
    }
}
