//! Finitely generated abelian groups in normal form and graded groups over a
//! degree window, with tensor, Tor and universal-coefficient assembly.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::linalg::IntMatrix;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroupError {
    #[error("degree {0} outside the declared window [{1}, {2}]")]
    OutsideWindow(i64, i64, i64),
    #[error("invalid group data: {0}")]
    Invalid(String),
}

/// A finitely generated abelian group `Z^rank ⊕ Z/t1 ⊕ ... ⊕ Z/tk` with
/// `t1 | t2 | ... | tk`, unique per isomorphism class.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FinAbGroup {
    rank: usize,
    torsion: Vec<BigInt>,
}

impl FinAbGroup {
    /// Builds the group, renormalizing the torsion list into a divisibility
    /// chain and dropping trivial factors.
    pub fn new(rank: usize, torsion: Vec<BigInt>) -> Self {
        FinAbGroup { rank, torsion: normalize_torsion(torsion) }
    }

    pub fn trivial() -> Self {
        FinAbGroup { rank: 0, torsion: Vec::new() }
    }

    pub fn free(rank: usize) -> Self {
        FinAbGroup { rank, torsion: Vec::new() }
    }

    pub fn cyclic(n: u64) -> Self {
        Self::new(0, vec![BigInt::from(n)])
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn torsion(&self) -> &[BigInt] {
        &self.torsion
    }

    pub fn is_trivial(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }

    pub fn is_free(&self) -> bool {
        self.torsion.is_empty()
    }

    /// Number of chosen generators: free generators first, then torsion
    /// generators in divisibility order.
    pub fn dim(&self) -> usize {
        self.rank + self.torsion.len()
    }

    /// Per-generator orders, zero marking a free generator.
    pub fn orders(&self) -> Vec<BigInt> {
        let mut o = vec![BigInt::zero(); self.rank];
        o.extend(self.torsion.iter().cloned());
        o
    }

    /// Relation matrix of the normal-form presentation: one column `t_i e_i`
    /// per torsion generator.
    pub fn relation_matrix(&self) -> IntMatrix {
        let dim = self.dim();
        let mut m = IntMatrix::zeros(dim, self.torsion.len());
        for (j, t) in self.torsion.iter().enumerate() {
            m.set(self.rank + j, j, t.clone());
        }
        m
    }

    pub fn direct_sum(&self, other: &FinAbGroup) -> FinAbGroup {
        let mut torsion = self.torsion.clone();
        torsion.extend(other.torsion.iter().cloned());
        FinAbGroup::new(self.rank + other.rank, torsion)
    }

    /// `Z^a ⊗ Z^b`, `Z ⊗ Z/n`, and `Z/m ⊗ Z/n = Z/gcd(m,n)` assembled and
    /// renormalized.
    pub fn tensor(&self, other: &FinAbGroup) -> FinAbGroup {
        let rank = self.rank * other.rank;
        let mut torsion = Vec::new();
        for t in &self.torsion {
            for _ in 0..other.rank {
                torsion.push(t.clone());
            }
        }
        for s in &other.torsion {
            for _ in 0..self.rank {
                torsion.push(s.clone());
            }
        }
        for t in &self.torsion {
            for s in &other.torsion {
                let g = t.gcd(s);
                torsion.push(g);
            }
        }
        FinAbGroup::new(rank, torsion)
    }

    /// `Tor(Z, -) = 0` and `Tor(Z/m, Z/n) = Z/gcd(m,n)`.
    pub fn tor(&self, other: &FinAbGroup) -> FinAbGroup {
        let mut torsion = Vec::new();
        for t in &self.torsion {
            for s in &other.torsion {
                torsion.push(t.gcd(s));
            }
        }
        FinAbGroup::new(0, torsion)
    }

    /// True when every torsion coefficient is a power of two.
    pub fn has_odd_torsion(&self) -> bool {
        let two = BigInt::from(2);
        self.torsion.iter().any(|t| {
            let mut t = t.clone();
            while t.is_even() {
                t = t.div_floor(&two);
            }
            !t.is_one()
        })
    }

    /// Rendering as `{"rank": r, "torsion": [d1, d2, ...]}`.
    pub fn to_json(&self) -> Value {
        json!({
            "rank": self.rank,
            "torsion": self.torsion.iter().map(bigint_to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, GroupError> {
        let obj = v.as_object().ok_or_else(|| GroupError::Invalid("expected object".into()))?;
        let rank = obj
            .get("rank")
            .and_then(Value::as_u64)
            .ok_or_else(|| GroupError::Invalid("missing rank".into()))? as usize;
        let torsion = match obj.get("torsion") {
            None | Some(Value::Null) => Vec::new(),
            Some(Value::Array(items)) => items
                .iter()
                .map(bigint_from_json)
                .collect::<Result<Vec<_>, _>>()?,
            Some(_) => return Err(GroupError::Invalid("torsion must be an array".into())),
        };
        for t in &torsion {
            if *t < BigInt::from(2) {
                return Err(GroupError::Invalid(format!("torsion coefficient {t} below 2")));
            }
        }
        Ok(FinAbGroup::new(rank, torsion))
    }

    /// Short label like `Z^2 + Z/2 + Z/4`, or `0` for the trivial group.
    pub fn label(&self) -> String {
        if self.is_trivial() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        match self.rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        let mut run: Option<(BigInt, usize)> = None;
        let flush = |run: &mut Option<(BigInt, usize)>, parts: &mut Vec<String>| {
            if let Some((t, n)) = run.take() {
                if n == 1 {
                    parts.push(format!("Z/{t}"));
                } else {
                    parts.push(format!("(Z/{t})^{n}"));
                }
            }
        };
        for t in &self.torsion {
            match &mut run {
                Some((cur, n)) if cur == t => *n += 1,
                _ => {
                    flush(&mut run, &mut parts);
                    run = Some((t.clone(), 1));
                }
            }
        }
        flush(&mut run, &mut parts);
        parts.join(" + ")
    }
}

impl fmt::Debug for FinAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

impl fmt::Display for FinAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

pub(crate) fn bigint_to_json(t: &BigInt) -> Value {
    match t.to_string().parse::<i64>() {
        Ok(n) => json!(n),
        Err(_) => json!(t.to_string()),
    }
}

pub(crate) fn bigint_from_json(v: &Value) -> Result<BigInt, GroupError> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(BigInt::from(i))
            } else if let Some(u) = n.as_u64() {
                Ok(BigInt::from(u))
            } else {
                Err(GroupError::Invalid(format!("non-integer number {n}")))
            }
        }
        Value::String(s) => s
            .parse::<BigInt>()
            .map_err(|_| GroupError::Invalid(format!("cannot parse integer {s:?}"))),
        other => Err(GroupError::Invalid(format!("expected integer, got {other}"))),
    }
}

/// Renormalizes a list of cyclic orders into a divisibility chain by pairwise
/// gcd/lcm exchanges; the product is preserved at every step.
fn normalize_torsion(mut torsion: Vec<BigInt>) -> Vec<BigInt> {
    torsion.retain(|t| {
        assert!(!t.is_negative(), "negative torsion coefficient");
        assert!(!t.is_zero(), "zero torsion coefficient; use rank instead");
        !t.is_one()
    });
    let n = torsion.len();
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in i + 1..n {
                if !torsion[j].mod_floor(&torsion[i]).is_zero() {
                    let g = torsion[i].gcd(&torsion[j]);
                    let l = (&torsion[i] * &torsion[j]).div_floor(&g);
                    torsion[i] = g;
                    torsion[j] = l;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    torsion.retain(|t| !t.is_one());
    torsion.sort();
    torsion
}

/// A graded abelian group with finite support inside an explicit degree
/// window; degrees outside the window are implicitly trivial.
#[derive(Clone, PartialEq, Eq)]
pub struct GradedGroup {
    min_degree: i64,
    max_degree: i64,
    parts: BTreeMap<i64, FinAbGroup>,
}

impl GradedGroup {
    pub fn new(min_degree: i64, max_degree: i64) -> Self {
        assert!(min_degree <= max_degree, "empty degree window");
        GradedGroup { min_degree, max_degree, parts: BTreeMap::new() }
    }

    /// The classical first-quadrant window `[0, max_degree]`.
    pub fn nonnegative(max_degree: i64) -> Self {
        Self::new(0, max_degree)
    }

    pub fn min_degree(&self) -> i64 {
        self.min_degree
    }

    pub fn max_degree(&self) -> i64 {
        self.max_degree
    }

    pub fn set(&mut self, degree: i64, group: FinAbGroup) -> Result<(), GroupError> {
        if degree < self.min_degree || degree > self.max_degree {
            return Err(GroupError::OutsideWindow(degree, self.min_degree, self.max_degree));
        }
        if group.is_trivial() {
            self.parts.remove(&degree);
        } else {
            self.parts.insert(degree, group);
        }
        Ok(())
    }

    pub fn get(&self, degree: i64) -> FinAbGroup {
        self.parts.get(&degree).cloned().unwrap_or_else(FinAbGroup::trivial)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &FinAbGroup)> {
        self.parts.iter().map(|(d, g)| (*d, g))
    }

    pub fn is_trivial(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn to_json(&self) -> Value {
        let mut entries = serde_json::Map::new();
        for (d, g) in &self.parts {
            entries.insert(d.to_string(), g.to_json());
        }
        json!({
            "min_degree": self.min_degree,
            "max_degree": self.max_degree,
            "groups": Value::Object(entries),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, GroupError> {
        let obj = v.as_object().ok_or_else(|| GroupError::Invalid("expected object".into()))?;
        let min = obj
            .get("min_degree")
            .and_then(Value::as_i64)
            .ok_or_else(|| GroupError::Invalid("missing min_degree".into()))?;
        let max = obj
            .get("max_degree")
            .and_then(Value::as_i64)
            .ok_or_else(|| GroupError::Invalid("missing max_degree".into()))?;
        let mut g = GradedGroup::new(min, max);
        if let Some(Value::Object(groups)) = obj.get("groups") {
            for (k, v) in groups {
                let d: i64 = k
                    .parse()
                    .map_err(|_| GroupError::Invalid(format!("bad degree key {k:?}")))?;
                g.set(d, FinAbGroup::from_json(v)?)?;
            }
        }
        Ok(g)
    }
}

impl fmt::Debug for GradedGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GradedGroup[{}..={}] {{ ", self.min_degree, self.max_degree)?;
        for (d, g) in &self.parts {
            write!(f, "{d}: {g}, ")?;
        }
        write!(f, "}}")
    }
}

/// Homology with coefficients via the universal coefficient theorem for a
/// trivial coefficient system:
/// `H_p(B; C) = (H_p ⊗ C) ⊕ Tor(H_{p-1}, C)`.
pub fn uct_row(h: &GradedGroup, c: &FinAbGroup) -> GradedGroup {
    let mut out = GradedGroup::new(h.min_degree(), h.max_degree() + 1);
    for p in h.min_degree()..=h.max_degree() + 1 {
        let part = uct_entry(h, c, p);
        out.set(p, part).expect("degree inside window");
    }
    out
}

/// A single degree of [`uct_row`].
pub fn uct_entry(h: &GradedGroup, c: &FinAbGroup, p: i64) -> FinAbGroup {
    h.get(p).tensor(c).direct_sum(&h.get(p - 1).tor(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn g(rank: usize, torsion: &[u64]) -> FinAbGroup {
        FinAbGroup::new(rank, torsion.iter().map(|&t| BigInt::from(t)).collect())
    }

    #[test]
    fn normal_form_is_divisibility_chain() {
        let a = g(0, &[4, 6]);
        assert_eq!(a.torsion(), &[BigInt::from(2), BigInt::from(12)]);
        let b = g(1, &[2, 3]);
        assert_eq!(b.torsion(), &[BigInt::from(6)]);
    }

    #[test]
    fn tensor_unit_and_gcd() {
        let any = g(2, &[3, 9]);
        assert_eq!(FinAbGroup::free(1).tensor(&any), any);
        assert_eq!(g(0, &[2]).tensor(&g(0, &[4])), g(0, &[2]));
        assert_eq!(g(2, &[]).tensor(&g(0, &[3])), g(0, &[3, 3]));
    }

    #[test]
    fn tor_basics() {
        assert_eq!(g(5, &[]).tor(&g(0, &[7])), FinAbGroup::trivial());
        assert_eq!(g(0, &[6]).tor(&g(0, &[4])), g(0, &[2]));
        assert_eq!(g(1, &[2]).tor(&g(0, &[2])), g(0, &[2]));
    }

    #[test]
    fn uct_integral_coefficients_is_identity() {
        let mut h = GradedGroup::nonnegative(3);
        h.set(0, FinAbGroup::free(1)).unwrap();
        h.set(1, g(0, &[2])).unwrap();
        h.set(3, g(2, &[4])).unwrap();
        let out = uct_row(&h, &FinAbGroup::free(1));
        for p in 0..=3 {
            assert_eq!(out.get(p), h.get(p));
        }
        assert_eq!(out.get(4), FinAbGroup::trivial());
    }

    #[test]
    fn uct_sphere_mod_5() {
        // H_*(S^n) with Z/5 coefficients: Z/5 in degrees 0 and n
        let n = 4;
        let mut h = GradedGroup::nonnegative(n);
        h.set(0, FinAbGroup::free(1)).unwrap();
        h.set(n, FinAbGroup::free(1)).unwrap();
        let out = uct_row(&h, &FinAbGroup::cyclic(5));
        assert_eq!(out.get(0), FinAbGroup::cyclic(5));
        assert_eq!(out.get(n), FinAbGroup::cyclic(5));
        assert_eq!(out.get(1), FinAbGroup::trivial());
    }

    #[test]
    fn uct_tor_term_appears() {
        // H_1 = Z/2 with Z/2 coefficients: degree 2 picks up Tor(Z/2, Z/2)
        let mut h = GradedGroup::nonnegative(1);
        h.set(0, FinAbGroup::free(1)).unwrap();
        h.set(1, g(0, &[2])).unwrap();
        let out = uct_row(&h, &FinAbGroup::cyclic(2));
        assert_eq!(out.get(2), g(0, &[2]));
    }

    #[test]
    fn json_round_trip() {
        let a = g(3, &[2, 4]);
        let v = a.to_json();
        assert_eq!(FinAbGroup::from_json(&v).unwrap(), a);
        assert_eq!(v["rank"], json!(3));
        assert_eq!(v["torsion"], json!([2, 4]));
    }

    #[test]
    fn odd_torsion_detection() {
        assert!(!g(1, &[2, 8]).has_odd_torsion());
        assert!(g(0, &[6]).has_odd_torsion());
        assert!(!FinAbGroup::free(2).has_odd_torsion());
    }

    proptest! {
        #[test]
        fn prop_tensor_symmetric(ra in 0usize..3, rb in 0usize..3,
                                 ta in proptest::collection::vec(2u64..30, 0..3),
                                 tb in proptest::collection::vec(2u64..30, 0..3)) {
            let a = g(ra, &ta);
            let b = g(rb, &tb);
            prop_assert_eq!(a.tensor(&b), b.tensor(&a));
            prop_assert_eq!(a.tor(&b), b.tor(&a));
            prop_assert_eq!(a.tensor(&b).rank(), a.rank() * b.rank());
        }

        #[test]
        fn prop_tensor_additive(ra in 0usize..3, rb in 0usize..2, rc in 0usize..2,
                                ta in proptest::collection::vec(2u64..20, 0..2),
                                tb in proptest::collection::vec(2u64..20, 0..2),
                                tc in proptest::collection::vec(2u64..20, 0..2)) {
            let a = g(ra, &ta);
            let b = g(rb, &tb);
            let c = g(rc, &tc);
            prop_assert_eq!(a.tensor(&b.direct_sum(&c)), a.tensor(&b).direct_sum(&a.tensor(&c)));
            prop_assert_eq!(a.tor(&b.direct_sum(&c)), a.tor(&b).direct_sum(&a.tor(&c)));
        }
    }
}
