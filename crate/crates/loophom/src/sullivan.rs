//! Free graded-commutative differential algebras over the rationals:
//! cohomology in a degree window, the minimal models of spheres and of the
//! sphere-bundle total spaces the rational route covers, and the free-loop
//! model with degree-shifted duplicate generators.
//!
//! Over the rationals every odd generator is exterior. The differential is
//! given on generators and extended as a degree +1 derivation; the loop
//! model's differential is `D x = d x`, `D x̄ = -s(d x)`, with `s` the
//! degree -1 derivation sending `x` to `x̄` and `x̄` to zero. `D² = 0` is
//! checked on every construction.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::linalg::{rational_rank, IntMatrix};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SullivanError {
    #[error("generator degrees must be positive, got {name} in degree {degree}")]
    NonPositiveDegree { name: String, degree: i64 },
    #[error("duplicate generator name {0:?}")]
    DuplicateGenerator(String),
    #[error("unknown generator {0:?}")]
    UnknownGenerator(String),
    #[error("differential of {name} is not homogeneous of degree {expected}")]
    InhomogeneousDifferential { name: String, expected: u32 },
    #[error("d² ≠ 0 on generator {0}")]
    SquareNonzero(String),
    #[error("unsupported bundle dimensions: {0}")]
    BundleHypotheses(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SullivanGenerator {
    pub name: String,
    pub degree: u32,
}

/// Sparse differential spec: `(generator, integer coefficient, monomial)`.
pub type DiffSpec<'a> = (&'a str, i64, &'a [(&'a str, u32)]);

/// Polynomial with rational coefficients over the generators of a fixed
/// algebra, in sorted normal form.
#[derive(Clone, PartialEq, Eq)]
pub struct QPoly {
    terms: Vec<(BigRational, Vec<u32>)>,
}

impl QPoly {
    pub fn zero() -> QPoly {
        QPoly { terms: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn from_map(map: BTreeMap<Vec<u32>, BigRational>) -> QPoly {
        QPoly {
            terms: map.into_iter().filter(|(_, c)| !c.is_zero()).map(|(e, c)| (c, e)).collect(),
        }
    }

    fn add(&self, other: &QPoly) -> QPoly {
        let mut map: BTreeMap<Vec<u32>, BigRational> = BTreeMap::new();
        for (c, e) in self.terms.iter().chain(other.terms.iter()) {
            let entry = map.entry(e.clone()).or_insert_with(BigRational::zero);
            *entry += c;
        }
        QPoly::from_map(map)
    }

    fn neg(&self) -> QPoly {
        QPoly { terms: self.terms.iter().map(|(c, e)| (-c.clone(), e.clone())).collect() }
    }

    fn scale(&self, k: &BigRational) -> QPoly {
        if k.is_zero() {
            return QPoly::zero();
        }
        QPoly { terms: self.terms.iter().map(|(c, e)| (c * k, e.clone())).collect() }
    }
}

impl fmt::Debug for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(c, e)| format!("{c}·{e:?}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// A free graded-commutative differential algebra over Q with generator-wise
/// differential.
#[derive(Clone)]
pub struct SullivanAlgebra {
    gens: Vec<SullivanGenerator>,
    diff: Vec<QPoly>,
}

impl SullivanAlgebra {
    /// Builds the algebra, checking that the differential raises degree by
    /// one and squares to zero on every generator.
    pub fn new(
        gens: Vec<SullivanGenerator>,
        diff: Vec<QPoly>,
    ) -> Result<SullivanAlgebra, SullivanError> {
        assert_eq!(gens.len(), diff.len(), "one differential image per generator");
        let mut names = std::collections::HashSet::new();
        for g in &gens {
            if g.degree == 0 {
                return Err(SullivanError::NonPositiveDegree {
                    name: g.name.clone(),
                    degree: g.degree as i64,
                });
            }
            if !names.insert(g.name.clone()) {
                return Err(SullivanError::DuplicateGenerator(g.name.clone()));
            }
        }
        let algebra = SullivanAlgebra { gens, diff };
        for (i, g) in algebra.gens.iter().enumerate() {
            let image = &algebra.diff[i];
            if !image.is_zero() {
                let expected = g.degree + 1;
                if algebra.degree_of(image) != Some(expected as i64) {
                    return Err(SullivanError::InhomogeneousDifferential {
                        name: g.name.clone(),
                        expected,
                    });
                }
            }
            let dd = algebra.apply_differential(image);
            if !dd.is_zero() {
                return Err(SullivanError::SquareNonzero(g.name.clone()));
            }
        }
        Ok(algebra)
    }

    /// Algebra builder from name/degree pairs and sparse differentials given
    /// as `(generator, integer coefficient, monomial)` terms.
    pub fn build(
        gens: &[(&str, u32)],
        diffs: &[DiffSpec<'_>],
    ) -> Result<SullivanAlgebra, SullivanError> {
        let gen_list: Vec<SullivanGenerator> =
            gens.iter().map(|(n, d)| SullivanGenerator { name: n.to_string(), degree: *d }).collect();
        let index = |name: &str| -> Result<usize, SullivanError> {
            gen_list
                .iter()
                .position(|g| g.name == name)
                .ok_or_else(|| SullivanError::UnknownGenerator(name.to_string()))
        };
        let mut images = vec![QPoly::zero(); gen_list.len()];
        for (gname, coeff, mono) in diffs {
            let gi = index(gname)?;
            let mut exps = vec![0u32; gen_list.len()];
            for (m, e) in *mono {
                exps[index(m)?] += e;
            }
            let term = QPoly { terms: vec![(BigRational::from(BigInt::from(*coeff)), exps)] };
            images[gi] = images[gi].add(&term);
        }
        SullivanAlgebra::new(gen_list, images)
    }

    pub fn generators(&self) -> &[SullivanGenerator] {
        &self.gens
    }

    pub fn differential(&self, i: usize) -> &QPoly {
        &self.diff[i]
    }

    fn parity(&self, i: usize) -> u32 {
        self.gens[i].degree % 2
    }

    pub fn monomial_degree(&self, exps: &[u32]) -> i64 {
        exps.iter().zip(&self.gens).map(|(&e, g)| e as i64 * g.degree as i64).sum()
    }

    pub fn degree_of(&self, poly: &QPoly) -> Option<i64> {
        let mut deg = None;
        for (_, e) in &poly.terms {
            let d = self.monomial_degree(e);
            match deg {
                None => deg = Some(d),
                Some(cur) if cur != d => return None,
                _ => {}
            }
        }
        deg
    }

    fn mul_monomials(&self, a: &[u32], b: &[u32]) -> Option<(bool, Vec<u32>)> {
        let n = self.gens.len();
        let mut exps = vec![0u32; n];
        for i in 0..n {
            exps[i] = a[i] + b[i];
            if self.parity(i) == 1 && exps[i] > 1 {
                return None;
            }
        }
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

    pub fn mul(&self, x: &QPoly, y: &QPoly) -> QPoly {
        let mut map: BTreeMap<Vec<u32>, BigRational> = BTreeMap::new();
        for (cx, ex) in &x.terms {
            for (cy, ey) in &y.terms {
                if let Some((neg, exps)) = self.mul_monomials(ex, ey) {
                    let coeff = if neg { -(cx * cy) } else { cx * cy };
                    let entry = map.entry(exps).or_insert_with(BigRational::zero);
                    *entry += coeff;
                }
            }
        }
        QPoly::from_map(map)
    }

    /// Extends generator images as an odd derivation:
    /// `δ(g·m) = δ(g)·m + (-1)^{|g|} g·δ(m)`.
    fn apply_derivation(&self, images: &[QPoly], poly: &QPoly) -> QPoly {
        let mut acc = QPoly::zero();
        for (c, exps) in &poly.terms {
            acc = acc.add(&self.derive_monomial(images, exps).scale(c));
        }
        acc
    }

    fn derive_monomial(&self, images: &[QPoly], exps: &[u32]) -> QPoly {
        let Some(i) = exps.iter().position(|&e| e > 0) else {
            return QPoly::zero();
        };
        let mut rest = exps.to_vec();
        rest[i] -= 1;
        let mut g_exps = vec![0u32; exps.len()];
        g_exps[i] = 1;
        let g = QPoly { terms: vec![(BigRational::one(), g_exps)] };
        let rest_poly = QPoly { terms: vec![(BigRational::one(), rest.clone())] };
        let term1 = self.mul(&images[i], &rest_poly);
        let term2 = self.mul(&g, &self.derive_monomial(images, &rest));
        if self.parity(i) == 1 {
            term1.add(&term2.neg())
        } else {
            term1.add(&term2)
        }
    }

    pub fn apply_differential(&self, poly: &QPoly) -> QPoly {
        self.apply_derivation(&self.diff, poly)
    }

    /// All monomials of a given total degree, lexicographic order.
    pub fn monomials_in_degree(&self, n: i64) -> Vec<Vec<u32>> {
        if n < 0 {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut exps = vec![0u32; self.gens.len()];
        self.enumerate(0, 0, n, &mut exps, &mut out);
        out
    }

    fn enumerate(&self, i: usize, acc: i64, n: i64, exps: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == self.gens.len() {
            if acc == n {
                out.push(exps.clone());
            }
            return;
        }
        let d = self.gens[i].degree as i64;
        let budget = (n - acc).div_euclid(d);
        if budget < 0 {
            return;
        }
        let cap = if self.parity(i) == 1 { budget.min(1) } else { budget };
        for e in 0..=cap {
            exps[i] = e as u32;
            self.enumerate(i + 1, acc + e * d, n, exps, out);
        }
        exps[i] = 0;
    }

    /// Rational Betti numbers `b_0 .. b_maxdeg` of the complex.
    pub fn cohomology(&self, maxdeg: i64) -> Vec<usize> {
        let mut bases: Vec<Vec<Vec<u32>>> = Vec::new();
        for n in 0..=maxdeg + 1 {
            bases.push(self.monomials_in_degree(n));
        }
        let mut ranks = vec![0usize; (maxdeg + 2) as usize];
        for n in 0..=maxdeg {
            ranks[n as usize] =
                self.differential_rank(&bases[n as usize], &bases[(n + 1) as usize]);
        }
        let mut betti = Vec::new();
        for n in 0..=maxdeg {
            let dim = bases[n as usize].len();
            let out_rank = ranks[n as usize];
            let in_rank = if n == 0 { 0 } else { ranks[(n - 1) as usize] };
            betti.push(dim - out_rank - in_rank);
        }
        betti
    }

    fn differential_rank(&self, source: &[Vec<u32>], target: &[Vec<u32>]) -> usize {
        if source.is_empty() || target.is_empty() {
            return 0;
        }
        let index: BTreeMap<&[u32], usize> =
            target.iter().enumerate().map(|(i, m)| (m.as_slice(), i)).collect();
        // clear denominators column by column; scaling preserves rank
        let mut cols: Vec<Vec<BigInt>> = Vec::new();
        for mono in source {
            let image = self.derive_monomial(&self.diff, mono);
            let mut col = vec![BigInt::zero(); target.len()];
            if !image.is_zero() {
                let lcm = image
                    .terms
                    .iter()
                    .fold(BigInt::one(), |acc, (c, _)| num_integer::lcm(acc, c.denom().clone()));
                for (c, e) in &image.terms {
                    let idx = *index.get(e.as_slice()).expect("derivation stays in degree");
                    col[idx] = (c * BigRational::from(lcm.clone())).to_integer();
                }
            }
            cols.push(col);
        }
        rational_rank(&IntMatrix::from_columns(target.len(), &cols))
    }

    /// Tensor product with disjoint generator names.
    pub fn tensor(&self, other: &SullivanAlgebra) -> Result<SullivanAlgebra, SullivanError> {
        let mut gens = self.gens.clone();
        gens.extend(other.gens.iter().cloned());
        let left = self.gens.len();
        let total = gens.len();
        let mut diff = Vec::with_capacity(total);
        for img in &self.diff {
            diff.push(QPoly {
                terms: img
                    .terms
                    .iter()
                    .map(|(c, e)| {
                        let mut v = vec![0u32; total];
                        v[..left].copy_from_slice(e);
                        (c.clone(), v)
                    })
                    .collect(),
            });
        }
        for img in &other.diff {
            diff.push(QPoly {
                terms: img
                    .terms
                    .iter()
                    .map(|(c, e)| {
                        let mut v = vec![0u32; total];
                        v[left..].copy_from_slice(e);
                        (c.clone(), v)
                    })
                    .collect(),
            });
        }
        SullivanAlgebra::new(gens, diff)
    }

    pub fn to_json(&self) -> Value {
        let gens: Vec<Value> = self
            .gens
            .iter()
            .enumerate()
            .map(|(i, g)| {
                json!({
                    "name": g.name,
                    "degree": g.degree,
                    "differential": self.display_poly(&self.diff[i]),
                })
            })
            .collect();
        json!({ "generators": gens })
    }

    pub fn display_poly(&self, poly: &QPoly) -> String {
        if poly.is_zero() {
            return "0".to_string();
        }
        let parts: Vec<String> = poly
            .terms
            .iter()
            .map(|(c, e)| {
                let mono: Vec<String> = e
                    .iter()
                    .zip(&self.gens)
                    .filter(|(&e, _)| e > 0)
                    .map(
                        |(&e, g)| {
                            if e == 1 {
                                g.name.clone()
                            } else {
                                format!("{}^{}", g.name, e)
                            }
                        },
                    )
                    .collect();
                let mono_str = if mono.is_empty() { "1".to_string() } else { mono.join(" ") };
                if c.is_one() && !mono.is_empty() {
                    mono_str
                } else if (-c.clone()).is_one() && !mono.is_empty() {
                    format!("-{mono_str}")
                } else if mono.is_empty() {
                    format!("{c}")
                } else {
                    format!("{c} {mono_str}")
                }
            })
            .collect();
        parts.join(" + ").replace("+ -", "- ")
    }
}

impl fmt::Debug for SullivanAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for SullivanAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.gens.iter().map(|g| g.name.clone()).collect();
        write!(f, "Λ({})", names.join(", "))?;
        let nonzero: Vec<String> = self
            .gens
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.diff[*i].is_zero())
            .map(|(i, g)| format!("d{} = {}", g.name, self.display_poly(&self.diff[i])))
            .collect();
        if !nonzero.is_empty() {
            write!(f, ", {}", nonzero.join(", "))?;
        }
        Ok(())
    }
}

/// Minimal model of a sphere: one exterior generator for odd n; for even n a
/// polynomial generator with a second one killing its square.
pub fn sphere_model(n: u32) -> Result<SullivanAlgebra, SullivanError> {
    if n < 2 {
        return Err(SullivanError::BundleHypotheses(format!("sphere dimension {n} < 2")));
    }
    if n % 2 == 1 {
        SullivanAlgebra::build(&[(&format!("x{n}"), n)], &[])
    } else {
        let x = format!("x{n}");
        let y = format!("y{}", 2 * n - 1);
        SullivanAlgebra::build(&[(&x, n), (&y, 2 * n - 1)], &[(&y, 1, &[(&x, 2)])])
    }
}

/// Minimal model of the total space of a sphere bundle S^k → E → S^n with k
/// odd: for n odd `Λ(x_k) ⊗ Λ(x_n)` with zero differential; for n even the
/// rational dichotomy requires k ≠ n ± 1 and n - 1 not a multiple of k - 1,
/// and the model is `Λ(x_k) ⊗ (Λ(x_n, y_{2n-1}), dy = x_n²)` with the
/// nonzero multiple normalized to one.
pub fn bundle_model(k: u32, n: u32) -> Result<SullivanAlgebra, SullivanError> {
    if k < 2 || k % 2 == 0 {
        return Err(SullivanError::BundleHypotheses(format!(
            "fiber dimension must be odd and > 1, got {k}"
        )));
    }
    if n < 2 {
        return Err(SullivanError::BundleHypotheses(format!("base dimension {n} < 2")));
    }
    let fiber = sphere_model(k)?;
    if n % 2 == 1 {
        return fiber.tensor(&sphere_model(n)?);
    }
    if k == n - 1 || k == n + 1 {
        return Err(SullivanError::BundleHypotheses(format!(
            "k = {k} may not equal n ± 1 for even n = {n}"
        )));
    }
    if (n - 1) % (k - 1) == 0 {
        return Err(SullivanError::BundleHypotheses(format!(
            "n - 1 = {} may not be a multiple of k - 1 = {}",
            n - 1,
            k - 1
        )));
    }
    fiber.tensor(&sphere_model(n)?)
}

/// The free-loop model: generators `V ⊕ V̄` with `|x̄| = |x| - 1`, and the
/// differential `D x = d x`, `D x̄ = -s(d x)` for `s` the degree -1
/// derivation with `s(x) = x̄`, `s(x̄) = 0`. The `D² = 0` check of the
/// constructor must never fail on valid input.
pub fn vigue_sullivan_loop(a: &SullivanAlgebra) -> Result<SullivanAlgebra, SullivanError> {
    let n = a.gens.len();
    let mut gens = a.gens.clone();
    for g in &a.gens {
        gens.push(SullivanGenerator { name: format!("{}_bar", g.name), degree: g.degree - 1 });
    }
    // carrier for computing in the extended algebra before validation
    let carrier = SullivanAlgebra { gens: gens.clone(), diff: vec![QPoly::zero(); 2 * n] };

    let embed = |poly: &QPoly| QPoly {
        terms: poly
            .terms
            .iter()
            .map(|(c, e)| {
                let mut v = vec![0u32; 2 * n];
                v[..n].copy_from_slice(e);
                (c.clone(), v)
            })
            .collect(),
    };

    // s images: originals map to their bars, bars to zero
    let mut s_images = Vec::with_capacity(2 * n);
    for i in 0..n {
        let mut v = vec![0u32; 2 * n];
        v[n + i] = 1;
        s_images.push(QPoly { terms: vec![(BigRational::one(), v)] });
    }
    s_images.extend(std::iter::repeat_with(QPoly::zero).take(n));

    let mut diff = Vec::with_capacity(2 * n);
    for img in &a.diff {
        diff.push(embed(img));
    }
    for img in &a.diff {
        let dx = embed(img);
        diff.push(carrier.apply_derivation(&s_images, &dx).neg());
    }
    SullivanAlgebra::new(gens, diff)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_algebra_is_ground_field() {
        let a = SullivanAlgebra::build(&[], &[]).unwrap();
        assert_eq!(a.cohomology(4), vec![1, 0, 0, 0, 0]);
    }

    #[test]
    fn odd_sphere_betti() {
        let a = sphere_model(3).unwrap();
        assert_eq!(a.cohomology(7), vec![1, 0, 0, 1, 0, 0, 0, 0]);
    }

    #[test]
    fn even_sphere_betti() {
        // Λ(x₂, y₃) with dy = x²: the rational cohomology of S²
        let a = sphere_model(2).unwrap();
        assert_eq!(a.cohomology(8), vec![1, 0, 1, 0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn loop_model_of_odd_sphere() {
        let a = sphere_model(3).unwrap();
        let la = vigue_sullivan_loop(&a).unwrap();
        // Λ(x₃, x̄₂), D = 0: monomials x̄^k (degree 2k) and x x̄^k (2k + 3)
        assert_eq!(la.cohomology(8), vec![1, 0, 1, 1, 1, 1, 1, 1, 1]);
    }

    #[test]
    fn loop_model_of_even_sphere_d_squares_to_zero() {
        let a = sphere_model(2).unwrap();
        let la = vigue_sullivan_loop(&a).unwrap();
        // Dȳ = -s(x²) = -2 x x̄ with the fixed convention
        let ybar = la.gens.iter().position(|g| g.name == "y3_bar").unwrap();
        let img = la.display_poly(la.differential(ybar));
        assert_eq!(img, "-2 x2 x2_bar");
        // H^*(LS²; Q) is one-dimensional in every degree
        assert_eq!(la.cohomology(10), vec![1; 11]);
    }

    #[test]
    fn d_square_check_rejects_bad_input() {
        // d(a₂) = b₃ and d(b₃) = a₂² gives d²(a) = a² ≠ 0
        let err = SullivanAlgebra::build(
            &[("a", 2), ("b", 3)],
            &[("a", 1, &[("b", 1)]), ("b", 1, &[("a", 2)])],
        )
        .unwrap_err();
        assert_eq!(err, SullivanError::SquareNonzero("a".to_string()));
    }

    #[test]
    fn bundle_models() {
        // odd/odd: zero differential
        let e = bundle_model(3, 5).unwrap();
        assert!(e.diff.iter().all(QPoly::is_zero));
        // odd/even satisfying the hypotheses: dy = x²
        let e = bundle_model(3, 8).unwrap();
        let y = e.gens.iter().position(|g| g.name == "y15").unwrap();
        assert!(!e.diff[y].is_zero());
        // k = n - 1 rejected
        assert!(bundle_model(3, 4).is_err());
        // k = n + 1 rejected
        assert!(bundle_model(5, 4).is_err());
        // odd base: dimension hypotheses do not apply
        assert!(bundle_model(3, 7).is_ok());
        // even fiber dimension rejected outright
        assert!(bundle_model(4, 7).is_err());
    }

    #[test]
    fn quasi_isomorphic_models_same_betti() {
        let direct = sphere_model(3).unwrap().tensor(&sphere_model(5).unwrap()).unwrap();
        let staged = bundle_model(3, 5).unwrap();
        assert_eq!(direct.cohomology(16), staged.cohomology(16));
    }

    #[test]
    fn loop_betti_invariant_under_generator_relabeling() {
        let a = SullivanAlgebra::build(&[("p", 3), ("q", 5)], &[]).unwrap();
        let b = SullivanAlgebra::build(&[("x3", 3), ("x5", 5)], &[]).unwrap();
        assert_eq!(
            vigue_sullivan_loop(&a).unwrap().cohomology(14),
            vigue_sullivan_loop(&b).unwrap().cohomology(14)
        );
    }

    #[test]
    fn betti_numbers_connected() {
        for n in 2..=6 {
            let la = vigue_sullivan_loop(&sphere_model(n).unwrap()).unwrap();
            let betti = la.cohomology(12);
            assert_eq!(betti[0], 1);
        }
    }
}
