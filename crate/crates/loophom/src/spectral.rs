//! First-quadrant spectral sequence pages over an explicit window: page
//! turning by exact subquotients, bidegree-shifted morphisms with the
//! homology-induced compatibility check, and multiplicative structure with
//! Leibniz extension of generator differentials.
//!
//! A page stores its entries in normal form with representative lifts back to
//! the coordinates of the previous level and of the initial page, and keeps
//! the projection data needed to push later cycles onto the chosen bases.
//! Differentials are stored only where both endpoints are nontrivial; absent
//! means zero. Convergence inside a window is literal: once the level exceeds
//! every span the window allows, no differential can move anything.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::groups::{bigint_to_json, FinAbGroup};
use crate::linalg::{kernel_mod, IntMatrix, Subquotient};
use crate::rings::{ComponentData, RingElement, RingPresentation};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PageError {
    #[error("d∘d is nonzero at level {level}, source ({p}, {q})")]
    CompositionNonzero { level: u32, p: i64, q: i64 },
    #[error("differential at ({p}, {q}) is not well defined on torsion")]
    NotWellDefined { p: i64, q: i64 },
    #[error("matrix shape mismatch at ({p}, {q}): {detail}")]
    ShapeMismatch { p: i64, q: i64, detail: String },
    #[error("bidegree violation: {0}")]
    BidegreeViolation(String),
    #[error("page is not presented by a bigraded ring")]
    NotRingPresented,
    #[error("product of representatives is not a cycle at ({p}, {q})")]
    ProductNotClosed { p: i64, q: i64 },
    #[error("relation {index} is not bigraded-homogeneous")]
    MixedBigrading { index: usize },
    #[error("ring error: {0}")]
    Ring(#[from] crate::rings::RingError),
}

/// Inclusive bidegree window.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub p_min: i64,
    pub p_max: i64,
    pub q_min: i64,
    pub q_max: i64,
}

impl Window {
    pub fn first_quadrant(p_max: i64, q_max: i64) -> Self {
        Window { p_min: 0, p_max, q_min: 0, q_max }
    }

    pub fn contains(&self, p: i64, q: i64) -> bool {
        p >= self.p_min && p <= self.p_max && q >= self.q_min && q <= self.q_max
    }

    fn shifted(&self, a: i64, b: i64) -> Window {
        Window {
            p_min: self.p_min - a,
            p_max: self.p_max - a,
            q_min: self.q_min - b,
            q_max: self.q_max - b,
        }
    }

    /// Level beyond which no differential fits inside the window.
    pub fn stabilization_level(&self) -> u32 {
        let p_span = (self.p_max - self.p_min).max(0);
        let q_span = (self.q_max - self.q_min).max(0);
        (p_span + q_span + 2) as u32
    }
}

/// How cycle classes at this entry are projected onto the chosen basis.
#[derive(Clone)]
enum EntryProj {
    /// Initial pages: coordinates are their own basis, reduce mod orders.
    Identity,
    Sub(Subquotient),
}

#[derive(Clone)]
pub struct Entry {
    group: FinAbGroup,
    /// Basis representatives in the coordinates of the previous level (or of
    /// the ambient slice, on a freshly built ring page).
    lift_prev: IntMatrix,
    /// Basis representatives composed down to the initial page coordinates.
    lift_base: IntMatrix,
    proj: EntryProj,
}

impl Entry {
    fn base(group: FinAbGroup) -> Entry {
        let dim = group.dim();
        Entry {
            group,
            lift_prev: IntMatrix::identity(dim),
            lift_base: IntMatrix::identity(dim),
            proj: EntryProj::Identity,
        }
    }

    pub fn group(&self) -> &FinAbGroup {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.group.dim()
    }

    pub fn lift_prev(&self) -> &IntMatrix {
        &self.lift_prev
    }

    pub fn lift_base(&self) -> &IntMatrix {
        &self.lift_base
    }

    /// Projects a previous-level cycle onto this entry's coordinates.
    fn project_prev(&self, v: &[BigInt]) -> Option<Vec<BigInt>> {
        match &self.proj {
            EntryProj::Identity => Some(reduce_mod_orders(v, &self.group.orders())),
            EntryProj::Sub(sq) => sq.project(v),
        }
    }

    fn reduce(&self, v: &[BigInt]) -> Vec<BigInt> {
        reduce_mod_orders(v, &self.group.orders())
    }
}

fn reduce_mod_orders(v: &[BigInt], orders: &[BigInt]) -> Vec<BigInt> {
    v.iter()
        .zip(orders)
        .map(|(x, o)| if o.is_zero() { x.clone() } else { x.mod_floor(o) })
        .collect()
}

fn coords_equal_mod(a: &[BigInt], b: &[BigInt], orders: &[BigInt]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).zip(orders).all(|((x, y), o)| {
            if o.is_zero() {
                x == y
            } else {
                (x - y).mod_floor(o).is_zero()
            }
        })
}

/// A bigraded ring presentation: the generators of `ring` each carry a
/// bidegree refining their total degree. Entries of a ring-presented page at
/// key `(p, q)` are the slices of bidegree `(p, q) + offset`.
#[derive(Clone)]
pub struct BigradedRing {
    ring: RingPresentation,
    bidegrees: Vec<(i64, i64)>,
    offset: (i64, i64),
}

impl BigradedRing {
    pub fn new(
        ring: RingPresentation,
        bidegrees: Vec<(i64, i64)>,
    ) -> Result<BigradedRing, PageError> {
        if bidegrees.len() != ring.generators().len() {
            return Err(PageError::BidegreeViolation("one bidegree per generator".into()));
        }
        for (g, (p, q)) in ring.generators().iter().zip(&bidegrees) {
            if p + q != g.degree {
                return Err(PageError::BidegreeViolation(format!(
                    "generator {} has degree {} but bidegree ({p}, {q})",
                    g.name, g.degree
                )));
            }
        }
        let out = BigradedRing { ring, bidegrees, offset: (0, 0) };
        for (index, rel) in out.ring.relations().iter().enumerate() {
            let mut bid = None;
            for (_, e) in rel.terms() {
                let b = out.monomial_bidegree(e);
                match bid {
                    None => bid = Some(b),
                    Some(cur) if cur != b => return Err(PageError::MixedBigrading { index }),
                    _ => {}
                }
            }
        }
        Ok(out)
    }

    pub fn ring(&self) -> &RingPresentation {
        &self.ring
    }

    pub fn monomial_bidegree(&self, exps: &[u32]) -> (i64, i64) {
        let mut p = 0i64;
        let mut q = 0i64;
        for (e, (bp, bq)) in exps.iter().zip(&self.bidegrees) {
            p += *e as i64 * bp;
            q += *e as i64 * bq;
        }
        (p, q)
    }

    pub fn element_bidegree(&self, elem: &RingElement) -> Option<(i64, i64)> {
        let mut bid = None;
        for (_, e) in elem.terms() {
            let b = self.monomial_bidegree(e);
            match bid {
                None => bid = Some(b),
                Some(cur) if cur != b => return None,
                _ => {}
            }
        }
        bid
    }

    /// Monomials and relation subquotient of the bidegree slice addressed by
    /// page key `(p, q)`.
    fn slice(&self, p: i64, q: i64) -> ComponentData {
        let (sp, sq_deg) = (p + self.offset.0, q + self.offset.1);
        let monomials = self.bigraded_monomials(sp, sq_deg);
        let index: std::collections::HashMap<Vec<u32>, usize> =
            monomials.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();

        // Relation slice restricted to this bidegree; relations are bigraded,
        // so every term of a multiple lands in the same bidegree.
        let m = monomials.len();
        let mut columns: Vec<Vec<BigInt>> = Vec::new();
        for rel in self.ring.active_relations() {
            let Some((rp, rq)) = self.element_bidegree(rel) else { continue };
            for mu in self.bigraded_monomials(sp - rp, sq_deg - rq) {
                let factor = self.ring.monomial_from_exps(mu);
                let prod = self.ring.raw_mul(&factor, rel);
                if prod.is_zero() {
                    continue;
                }
                let mut col = vec![BigInt::zero(); m];
                for (c, e) in prod.terms() {
                    let idx = *index.get(e).expect("bigraded relation multiple stays in slice");
                    col[idx] += c;
                }
                if col.iter().any(|c| !c.is_zero()) {
                    columns.push(col);
                }
            }
        }
        let sq = Subquotient::quotient(m, &IntMatrix::from_columns(m, &columns));
        ComponentData { monomials, index, sq }
    }

    fn bigraded_monomials(&self, p: i64, q: i64) -> Vec<Vec<u32>> {
        self.ring
            .monomials_in_degree(p + q)
            .into_iter()
            .filter(|m| self.monomial_bidegree(m) == (p, q))
            .collect()
    }
}

type TableKey = ((i64, i64), (i64, i64));
/// `table[i][j]` = coordinates of a product of basis elements.
type BasisTable = Vec<Vec<Vec<BigInt>>>;

/// Explicit basis-level multiplication tables: for a pair of source keys,
/// the target key and the basis-level table.
#[derive(Clone, Default)]
pub struct ProductTables {
    pub tables: BTreeMap<TableKey, ((i64, i64), BasisTable)>,
}

#[derive(Clone)]
enum PageProduct {
    Ring(BigradedRing),
    Tables(ProductTables),
}

/// One page of a spectral sequence.
#[derive(Clone)]
pub struct Page {
    level: u32,
    window: Window,
    entries: BTreeMap<(i64, i64), Entry>,
    diffs: BTreeMap<(i64, i64), IntMatrix>,
    product: Option<PageProduct>,
}

impl Page {
    /// Page with explicitly given entry groups and no differentials.
    pub fn from_groups(
        level: u32,
        window: Window,
        groups: impl IntoIterator<Item = ((i64, i64), FinAbGroup)>,
    ) -> Page {
        let entries = groups
            .into_iter()
            .filter(|(k, g)| window.contains(k.0, k.1) && !g.is_trivial())
            .map(|(k, g)| (k, Entry::base(g)))
            .collect();
        Page { level, window, entries, diffs: BTreeMap::new(), product: None }
    }

    /// Page whose entries are the bidegree slices of a ring, with the ring
    /// installed as the multiplicative structure.
    pub fn from_bigraded_ring(
        level: u32,
        window: Window,
        ring: BigradedRing,
    ) -> Result<Page, PageError> {
        let mut entries = BTreeMap::new();
        for p in window.p_min..=window.p_max {
            for q in window.q_min..=window.q_max {
                let slice = ring.slice(p, q);
                let group = slice.sq.group().clone();
                if group.is_trivial() {
                    continue;
                }
                let basis = slice.sq.basis().clone();
                entries.insert(
                    (p, q),
                    Entry {
                        group,
                        lift_prev: basis.clone(),
                        lift_base: basis,
                        proj: EntryProj::Sub(slice.sq),
                    },
                );
            }
        }
        Ok(Page {
            level,
            window,
            entries,
            diffs: BTreeMap::new(),
            product: Some(PageProduct::Ring(ring)),
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn entry(&self, p: i64, q: i64) -> Option<&Entry> {
        self.entries.get(&(p, q))
    }

    pub fn group_at(&self, p: i64, q: i64) -> FinAbGroup {
        self.entries.get(&(p, q)).map(|e| e.group.clone()).unwrap_or_else(FinAbGroup::trivial)
    }

    pub fn keys(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.entries.keys().copied()
    }

    pub fn differential(&self, p: i64, q: i64) -> Option<&IntMatrix> {
        self.diffs.get(&(p, q))
    }

    pub fn has_differentials(&self) -> bool {
        !self.diffs.is_empty()
    }

    pub fn has_product(&self) -> bool {
        self.product.is_some()
    }

    pub fn is_ring_presented(&self) -> bool {
        matches!(self.product, Some(PageProduct::Ring(_)))
    }

    /// Target of the outgoing differential from `(p, q)` at this level.
    pub fn diff_target(&self, p: i64, q: i64) -> (i64, i64) {
        (p - self.level as i64, q + self.level as i64 - 1)
    }

    /// Source hitting `(p, q)` at this level.
    pub fn diff_source(&self, p: i64, q: i64) -> (i64, i64) {
        (p + self.level as i64, q - self.level as i64 + 1)
    }

    /// Installs differentials given as matrices on the chosen bases. Shapes
    /// are validated, as is well-definedness on torsion generators.
    pub fn install_differentials(
        &mut self,
        diffs: impl IntoIterator<Item = ((i64, i64), IntMatrix)>,
    ) -> Result<(), PageError> {
        for ((p, q), m) in diffs {
            if m.is_zero() {
                continue;
            }
            let src = self
                .entries
                .get(&(p, q))
                .ok_or(PageError::ShapeMismatch { p, q, detail: "no source entry".into() })?;
            let (tp, tq) = self.diff_target(p, q);
            let tgt = self.entries.get(&(tp, tq)).ok_or(PageError::ShapeMismatch {
                p,
                q,
                detail: "nonzero differential into a trivial entry".into(),
            })?;
            if m.rows() != tgt.dim() || m.cols() != src.dim() {
                return Err(PageError::ShapeMismatch {
                    p,
                    q,
                    detail: format!(
                        "expected {}x{}, got {}x{}",
                        tgt.dim(),
                        src.dim(),
                        m.rows(),
                        m.cols()
                    ),
                });
            }
            // order_j * d(e_j) must vanish in the target group
            let tgt_orders = tgt.group.orders();
            for (j, o) in src.group.orders().iter().enumerate() {
                if o.is_zero() {
                    continue;
                }
                for (i, tgt_order) in tgt_orders.iter().enumerate() {
                    let v = m.at(i, j) * o;
                    let ok = if tgt_order.is_zero() {
                        v.is_zero()
                    } else {
                        v.mod_floor(tgt_order).is_zero()
                    };
                    if !ok {
                        return Err(PageError::NotWellDefined { p, q });
                    }
                }
            }
            self.diffs.insert((p, q), m);
        }
        Ok(())
    }

    fn verify_d_squared(&self) -> Result<(), PageError> {
        for (&(p, q), d1) in &self.diffs {
            let t1 = self.diff_target(p, q);
            if let Some(d2) = self.diffs.get(&t1) {
                let t2 = self.diff_target(t1.0, t1.1);
                let orders =
                    self.entries.get(&t2).map(|e| e.group.orders()).unwrap_or_default();
                let comp = d2.mul(d1);
                for (i, order) in orders.iter().enumerate() {
                    for j in 0..comp.cols() {
                        let ok = if order.is_zero() {
                            comp.at(i, j).is_zero()
                        } else {
                            comp.at(i, j).mod_floor(order).is_zero()
                        };
                        if !ok {
                            return Err(PageError::CompositionNonzero {
                                level: self.level,
                                p,
                                q,
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Basis-level product of `x` at `k1` with `y` at `k2`, as coordinates at
    /// the returned target key. `None` when the product is unavailable (no
    /// product structure, or the target leaves the window).
    pub fn multiply(
        &self,
        k1: (i64, i64),
        x: &[BigInt],
        k2: (i64, i64),
        y: &[BigInt],
    ) -> Option<((i64, i64), Vec<BigInt>)> {
        let product = self.product.as_ref()?;
        match product {
            PageProduct::Ring(ring) => {
                let target = (k1.0 + k2.0 + ring.offset.0, k1.1 + k2.1 + ring.offset.1);
                if !self.window.contains(target.0, target.1) {
                    return None;
                }
                let t_entry = match self.entries.get(&target) {
                    Some(e) => e,
                    None => return Some((target, Vec::new())),
                };
                let s1 = ring.slice(k1.0, k1.1);
                let s2 = ring.slice(k2.0, k2.1);
                let s3 = ring.slice(target.0, target.1);
                let ex = lift_through(&s1, x);
                let ey = lift_through(&s2, y);
                let prod = ring.ring.raw_mul(&ex, &ey);
                let coords = s3.coords(&prod);
                let out = s3.sq.project(&coords).expect("slice quotient always projects");
                Some((target, t_entry.reduce(&out)))
            }
            PageProduct::Tables(tables) => {
                let (target, table) = tables.tables.get(&(k1, k2))?;
                if !self.window.contains(target.0, target.1) {
                    return None;
                }
                let t_entry = match self.entries.get(target) {
                    Some(e) => e,
                    None => return Some((*target, Vec::new())),
                };
                let dim = t_entry.dim();
                let mut acc = vec![BigInt::zero(); dim];
                for (i, xi) in x.iter().enumerate() {
                    if xi.is_zero() {
                        continue;
                    }
                    for (j, yj) in y.iter().enumerate() {
                        if yj.is_zero() {
                            continue;
                        }
                        for (t, v) in table[i][j].iter().enumerate() {
                            acc[t] += xi * yj * v;
                        }
                    }
                }
                Some((*target, t_entry.reduce(&acc)))
            }
        }
    }

    pub(crate) fn basis_vector(dim: usize, i: usize) -> Vec<BigInt> {
        let mut v = vec![BigInt::zero(); dim];
        v[i] = BigInt::one();
        v
    }

    /// Homology of every entry along the level-`r` differentials: the next
    /// page, with representative lifts composed and the induced product
    /// computed on representatives when a product is present.
    pub fn turn_page(&self) -> Result<Page, PageError> {
        self.verify_d_squared()?;
        if self.diffs.is_empty() {
            // Zero differentials: entry-wise isomorphic page.
            let entries = self
                .entries
                .iter()
                .map(|(&k, e)| {
                    let mut ne = e.clone();
                    ne.lift_prev = IntMatrix::identity(e.dim());
                    ne.proj = EntryProj::Identity;
                    (k, ne)
                })
                .collect();
            return Ok(Page {
                level: self.level + 1,
                window: self.window,
                entries,
                diffs: BTreeMap::new(),
                product: self.product.clone(),
            });
        }

        let mut entries: BTreeMap<(i64, i64), Entry> = BTreeMap::new();
        for (&(p, q), entry) in &self.entries {
            let m = entry.dim();
            let rel_m = entry.group.relation_matrix();
            let cycles = match self.diffs.get(&(p, q)) {
                Some(d_out) => {
                    let (tp, tq) = self.diff_target(p, q);
                    let rel_n = self
                        .entries
                        .get(&(tp, tq))
                        .map(|e| e.group.relation_matrix())
                        .unwrap_or_else(|| IntMatrix::zeros(d_out.rows(), 0));
                    kernel_mod(d_out, &rel_n)
                }
                None => IntMatrix::identity(m),
            };
            let src_key = self.diff_source(p, q);
            let d_in =
                self.diffs.get(&src_key).cloned().unwrap_or_else(|| IntMatrix::zeros(m, 0));
            let boundaries = d_in.hconcat(&rel_m);
            let sq = Subquotient::new(m, &cycles, &boundaries).map_err(|_| {
                PageError::CompositionNonzero { level: self.level, p: src_key.0, q: src_key.1 }
            })?;
            if sq.group().is_trivial() {
                continue;
            }
            let lift_prev = sq.basis().clone();
            let lift_base = entry.lift_base.mul(&lift_prev);
            entries.insert(
                (p, q),
                Entry {
                    group: sq.group().clone(),
                    lift_prev,
                    lift_base,
                    proj: EntryProj::Sub(sq),
                },
            );
        }

        // Induced product via lift, multiply, project.
        let product = match &self.product {
            None => None,
            Some(_) => Some(PageProduct::Tables(self.induced_tables(&entries)?)),
        };

        Ok(Page { level: self.level + 1, window: self.window, entries, diffs: BTreeMap::new(), product })
    }

    fn induced_tables(
        &self,
        entries: &BTreeMap<(i64, i64), Entry>,
    ) -> Result<ProductTables, PageError> {
        let mut tables = ProductTables::default();
        let keys: Vec<(i64, i64)> = entries.keys().copied().collect();
        for &k1 in &keys {
            for &k2 in &keys {
                let e1 = &entries[&k1];
                let e2 = &entries[&k2];
                let mut target_key: Option<(i64, i64)> = None;
                let mut table = vec![vec![Vec::new(); e2.dim()]; e1.dim()];
                let mut defined = false;
                for (i, row) in table.iter_mut().enumerate() {
                    for (j, cell) in row.iter_mut().enumerate() {
                        let xi = e1.lift_prev.column(i);
                        let yj = e2.lift_prev.column(j);
                        let Some((t, prod)) = self.multiply(k1, &xi, k2, &yj) else {
                            continue;
                        };
                        defined = true;
                        target_key.get_or_insert(t);
                        if prod.is_empty() || entries.get(&t).is_none() {
                            continue; // target trivial now
                        }
                        let te = &entries[&t];
                        let coords = te
                            .project_prev(&prod)
                            .ok_or(PageError::ProductNotClosed { p: t.0, q: t.1 })?;
                        *cell = coords;
                    }
                }
                let Some(t) = target_key else { continue };
                if !defined || entries.get(&t).is_none() {
                    continue;
                }
                let dim = entries[&t].dim();
                let mut any = false;
                for row in &mut table {
                    for cell in row.iter_mut() {
                        if cell.is_empty() {
                            *cell = vec![BigInt::zero(); dim];
                        } else if cell.iter().any(|c| !c.is_zero()) {
                            any = true;
                        }
                    }
                }
                if any {
                    tables.tables.insert((k1, k2), (t, table));
                }
            }
        }
        Ok(tables)
    }

    /// The shifted page: entry `(p, q)` of the result is entry
    /// `(p + a, q + b)` of the input, differentials reindexed along.
    pub fn shift(&self, a: i64, b: i64) -> Page {
        let entries =
            self.entries.iter().map(|(&(p, q), e)| ((p - a, q - b), e.clone())).collect();
        let diffs = self.diffs.iter().map(|(&(p, q), m)| ((p - a, q - b), m.clone())).collect();
        let product = self.product.as_ref().map(|pr| match pr {
            PageProduct::Ring(ring) => {
                let mut ring = ring.clone();
                ring.offset = (ring.offset.0 + a, ring.offset.1 + b);
                PageProduct::Ring(ring)
            }
            PageProduct::Tables(tables) => {
                let tables = ProductTables {
                    tables: tables
                        .tables
                        .iter()
                        .map(|(&(k1, k2), (t, tab))| {
                            (
                                ((k1.0 - a, k1.1 - b), (k2.0 - a, k2.1 - b)),
                                ((t.0 - a, t.1 - b), tab.clone()),
                            )
                        })
                        .collect(),
                };
                PageProduct::Tables(tables)
            }
        });
        Page { level: self.level, window: self.window.shifted(a, b), entries, diffs, product }
    }

    /// Extends generator differentials to every monomial basis element by
    /// the graded Leibniz rule `d(xy) = d(x)y + (-1)^{|x|} x d(y)` (total
    /// degree sign). The page must be ring-presented; assigned values must
    /// land in the bidegree demanded by the page level.
    pub fn leibniz_extend(&self, gen_diffs: &[(String, RingElement)]) -> Result<Page, PageError> {
        let Some(PageProduct::Ring(ring)) = &self.product else {
            return Err(PageError::NotRingPresented);
        };
        let r = self.level as i64;
        let gens = ring.ring.generators();
        let mut images: Vec<RingElement> = vec![RingElement::zero(); gens.len()];
        for (name, value) in gen_diffs {
            let idx = ring.ring.generator_index(name)?;
            if !value.is_zero() {
                let (gp, gq) = ring.bidegrees[idx];
                let expected = (gp - r, gq + r - 1);
                let got = ring.element_bidegree(value).ok_or_else(|| {
                    PageError::BidegreeViolation(format!(
                        "differential of {name} is not bidegree-homogeneous"
                    ))
                })?;
                if got != expected {
                    return Err(PageError::BidegreeViolation(format!(
                        "differential of {name} lands in {got:?}, expected {expected:?}"
                    )));
                }
            }
            images[idx] = value.clone();
        }

        let mut diffs: BTreeMap<(i64, i64), IntMatrix> = BTreeMap::new();
        for (&(p, q), entry) in &self.entries {
            let (tp, tq) = self.diff_target(p, q);
            if !self.window.contains(tp, tq) {
                // For properly chosen windows the slices out there vanish;
                // the differential has nowhere to go.
                continue;
            }
            let target_slice = ring.slice(tp, tq);
            let target_entry = self.entries.get(&(tp, tq));
            let slice = ring.slice(p, q);
            let mut columns: Vec<Vec<BigInt>> = Vec::new();
            let mut nonzero = false;
            let tgt_dim = target_entry.map(|e| e.dim()).unwrap_or(0);
            for i in 0..entry.dim() {
                let x = lift_through(&slice, &entry.lift_prev.column(i));
                let dx = derive(&ring.ring, &images, &x);
                if dx.is_zero() {
                    columns.push(vec![BigInt::zero(); tgt_dim]);
                    continue;
                }
                let coords = target_slice.coords(&dx);
                let projected = target_slice.sq.project(&coords).expect("slice quotient projects");
                if projected.iter().any(|c| !c.is_zero()) {
                    nonzero = true;
                }
                columns.push(projected);
            }
            if nonzero {
                if tgt_dim == 0 {
                    return Err(PageError::BidegreeViolation(format!(
                        "nonzero differential from ({p}, {q}) into a trivial entry"
                    )));
                }
                diffs.insert((p, q), IntMatrix::from_columns(tgt_dim, &columns));
            }
        }

        let mut page = self.clone();
        page.diffs.clear();
        page.install_differentials(diffs)?;
        Ok(page)
    }

    /// Verifies the derivation identity on all basis pairs within the window.
    pub fn check_leibniz(&self) -> Vec<LeibnizFailure> {
        let mut failures = Vec::new();
        if self.product.is_none() {
            return failures;
        }
        let keys: Vec<(i64, i64)> = self.entries.keys().copied().collect();
        for &k1 in &keys {
            for &k2 in &keys {
                let e1 = &self.entries[&k1];
                let e2 = &self.entries[&k2];
                for i in 0..e1.dim() {
                    for j in 0..e2.dim() {
                        if let Some(fail) = self.leibniz_defect(k1, i, k2, j, e1, e2) {
                            failures.push(fail);
                        }
                    }
                }
            }
        }
        failures
    }

    fn apply_diff(&self, key: (i64, i64), v: &[BigInt]) -> ((i64, i64), Vec<BigInt>) {
        let target = self.diff_target(key.0, key.1);
        match self.diffs.get(&key) {
            Some(m) => (target, m.mul_vec(v)),
            None => {
                let dim = self.entries.get(&target).map_or(0, |e| e.dim());
                (target, vec![BigInt::zero(); dim])
            }
        }
    }

    fn leibniz_defect(
        &self,
        k1: (i64, i64),
        i: usize,
        k2: (i64, i64),
        j: usize,
        e1: &Entry,
        e2: &Entry,
    ) -> Option<LeibnizFailure> {
        let x = Self::basis_vector(e1.dim(), i);
        let y = Self::basis_vector(e2.dim(), j);
        // d(x·y)
        let (txy, xy) = self.multiply(k1, &x, k2, &y)?;
        let (t_lhs, lhs) = self.apply_diff(txy, &pad(&xy, self.entries.get(&txy)));
        // d(x)·y
        let (tdx, dx) = self.apply_diff(k1, &x);
        let term1 = if dx.iter().any(|c| !c.is_zero()) {
            self.multiply(tdx, &dx, k2, &y)?
        } else {
            (t_lhs, Vec::new())
        };
        // (-1)^{|x|} x·d(y)
        let (tdy, dy) = self.apply_diff(k2, &y);
        let term2 = if dy.iter().any(|c| !c.is_zero()) {
            self.multiply(k1, &x, tdy, &dy)?
        } else {
            (t_lhs, Vec::new())
        };
        let sign = (k1.0 + k1.1).rem_euclid(2) == 1;
        let target_entry = self.entries.get(&t_lhs);
        let dim = target_entry.map_or(0, |e| e.dim());
        let mut rhs = vec![BigInt::zero(); dim];
        for (t, term) in [term1, term2].iter().enumerate() {
            if term.1.is_empty() {
                continue;
            }
            debug_assert_eq!(term.0, t_lhs);
            for (a, v) in term.1.iter().enumerate() {
                if t == 1 && sign {
                    rhs[a] -= v;
                } else {
                    rhs[a] += v;
                }
            }
        }
        let lhs = pad(&lhs, target_entry);
        let rhs = match target_entry {
            Some(e) => e.reduce(&rhs),
            None => rhs,
        };
        let orders = target_entry.map(|e| e.group.orders()).unwrap_or_default();
        if coords_equal_mod(&lhs, &rhs, &orders) {
            None
        } else {
            Some(LeibnizFailure {
                level: self.level,
                source_a: k1,
                index_a: i,
                source_b: k2,
                index_b: j,
            })
        }
    }

    /// Text table with p horizontal and q vertical (descending).
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "E^{} page, window p in [{}, {}], q in [{}, {}]",
            self.level, self.window.p_min, self.window.p_max, self.window.q_min, self.window.q_max
        );
        let cells: BTreeMap<(i64, i64), String> =
            self.entries.iter().map(|(&k, e)| (k, e.group.label())).collect();
        let width = cells.values().map(|s| s.chars().count()).max().unwrap_or(1).max(3);
        for q in (self.window.q_min..=self.window.q_max).rev() {
            let row_has =
                (self.window.p_min..=self.window.p_max).any(|p| cells.contains_key(&(p, q)));
            if !row_has && q != self.window.q_min {
                continue;
            }
            let _ = write!(out, "{q:>4} |");
            for p in self.window.p_min..=self.window.p_max {
                let label = cells.get(&(p, q)).map(String::as_str).unwrap_or(".");
                let _ = write!(out, " {label:^width$}");
            }
            let _ = writeln!(out);
        }
        let _ = write!(out, "      ");
        for p in self.window.p_min..=self.window.p_max {
            let _ = write!(out, " {p:^width$}");
        }
        let _ = writeln!(out);
        out
    }

    /// JSON dump: `{"level": r, "entries": {"p,q": group}, "differentials": [...]}`.
    pub fn to_json(&self) -> Value {
        let mut entries = serde_json::Map::new();
        for (&(p, q), e) in &self.entries {
            entries.insert(format!("{p},{q}"), e.group.to_json());
        }
        let diffs: Vec<Value> = self
            .diffs
            .iter()
            .map(|(&(p, q), m)| {
                let (tp, tq) = self.diff_target(p, q);
                let rows: Vec<Value> = (0..m.rows())
                    .map(|i| {
                        Value::Array((0..m.cols()).map(|j| bigint_to_json(m.at(i, j))).collect())
                    })
                    .collect();
                json!({ "from": [p, q], "to": [tp, tq], "matrix": rows })
            })
            .collect();
        json!({
            "level": self.level,
            "window": {
                "p_min": self.window.p_min, "p_max": self.window.p_max,
                "q_min": self.window.q_min, "q_max": self.window.q_max,
            },
            "entries": Value::Object(entries),
            "differentials": diffs,
        })
    }
}

impl std::fmt::Debug for Page {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.render_text())
    }
}

fn pad(v: &[BigInt], entry: Option<&Entry>) -> Vec<BigInt> {
    let dim = entry.map_or(0, |e| e.dim());
    if v.len() == dim {
        v.to_vec()
    } else {
        vec![BigInt::zero(); dim]
    }
}

fn lift_through(slice: &ComponentData, coords: &[BigInt]) -> RingElement {
    // entry coordinates -> ambient slice coordinates -> ring element
    let mut ambient = vec![BigInt::zero(); slice.monomials.len()];
    for (j, c) in coords.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        for (i, v) in slice.sq.basis().column(j).iter().enumerate() {
            if !v.is_zero() {
                ambient[i] += c * v;
            }
        }
    }
    slice.element_from_coords(&ambient)
}

/// Derivation extension of generator images:
/// `d(g·m) = d(g)·m + (-1)^{|g|} g·d(m)`.
fn derive(ring: &RingPresentation, images: &[RingElement], elem: &RingElement) -> RingElement {
    let mut acc = RingElement::zero();
    for (c, exps) in elem.terms() {
        let d_mono = derive_monomial(ring, images, exps);
        acc = acc.add(&d_mono.scale(c));
    }
    acc
}

fn derive_monomial(ring: &RingPresentation, images: &[RingElement], exps: &[u32]) -> RingElement {
    let Some(i) = exps.iter().position(|&e| e > 0) else {
        return RingElement::zero();
    };
    let mut rest = exps.to_vec();
    rest[i] -= 1;
    let mut g_exps = vec![0u32; exps.len()];
    g_exps[i] = 1;
    let g = ring.monomial_from_exps(g_exps);
    let rest_elem = ring.monomial_from_exps(rest.clone());
    let term1 = ring.raw_mul(&images[i], &rest_elem);
    let d_rest = derive_monomial(ring, images, &rest);
    let term2 = ring.raw_mul(&g, &d_rest);
    if ring.generators()[i].degree.rem_euclid(2) == 1 {
        term1.add(&term2.neg())
    } else {
        term1.add(&term2)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeibnizFailure {
    pub level: u32,
    pub source_a: (i64, i64),
    pub index_a: usize,
    pub source_b: (i64, i64),
    pub index_b: usize,
}

/// A sequence of consecutive pages, the last one stable on its window.
#[derive(Clone)]
pub struct SpectralSequence {
    pages: Vec<Page>,
}

impl SpectralSequence {
    pub fn new(pages: Vec<Page>) -> SpectralSequence {
        assert!(!pages.is_empty(), "a spectral sequence needs at least one page");
        for w in pages.windows(2) {
            assert_eq!(w[1].level, w[0].level + 1, "pages must be consecutive");
        }
        SpectralSequence { pages }
    }

    pub fn pages(&self) -> &[Page] {
        &self.pages
    }

    pub fn first_level(&self) -> u32 {
        self.pages[0].level
    }

    pub fn last_level(&self) -> u32 {
        self.pages.last().unwrap().level
    }

    pub fn page(&self, level: u32) -> Option<&Page> {
        let first = self.first_level();
        if level < first {
            return None;
        }
        self.pages.get((level - first) as usize)
    }

    pub fn stable(&self) -> &Page {
        self.pages.last().unwrap()
    }

    /// Direct sum of the stable entries along the anti-diagonal `p + q = k`.
    pub fn degreewise(&self, k: i64) -> FinAbGroup {
        let page = self.stable();
        let mut acc = FinAbGroup::trivial();
        for ((p, q), entry) in &page.entries {
            if p + q == k {
                acc = acc.direct_sum(&entry.group);
            }
        }
        acc
    }

    /// Alternating sum of ranks over the whole window of one page.
    pub fn euler_characteristic(page: &Page) -> i64 {
        let mut chi = 0i64;
        for (&(p, q), e) in &page.entries {
            let sign = if (p + q).rem_euclid(2) == 0 { 1 } else { -1 };
            chi += sign * e.group.rank() as i64;
        }
        chi
    }
}

/// A morphism of spectral sequences of a fixed bidegree, given per level and
/// per bidegree as matrices on the chosen bases. Absent maps are zero.
#[derive(Clone, Default)]
pub struct SsMorphism {
    pub start_level: u32,
    pub bidegree: (i64, i64),
    pub maps: BTreeMap<(u32, i64, i64), IntMatrix>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MorphismDefect {
    /// f ∘ d ≠ d ∘ f at this source.
    Commutation,
    /// The homology-induced map of one level differs from the supplied map
    /// on the next.
    Induced,
    /// A supplied matrix has the wrong shape.
    Shape,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MorphismFailure {
    pub level: u32,
    pub p: i64,
    pub q: i64,
    pub defect: MorphismDefect,
}

/// Checks that the maps commute with the differentials and that each level's
/// maps induce the next level's on homology. An empty report is a valid
/// morphism on the inspected window.
pub fn check_morphism(
    f: &SsMorphism,
    source: &SpectralSequence,
    target: &SpectralSequence,
) -> Vec<MorphismFailure> {
    let mut failures = Vec::new();
    let (a, b) = f.bidegree;
    let lo = f.start_level.max(source.first_level()).max(target.first_level());
    let hi = source.last_level().min(target.last_level());
    for n in lo..=hi {
        let sp = source.page(n).unwrap();
        let tp = target.page(n).unwrap();
        let r = n as i64;

        for (&(lvl, p, q), m) in &f.maps {
            if lvl != n {
                continue;
            }
            let src_dim = sp.entry(p, q).map_or(0, |e| e.dim());
            let dst_dim = tp.entry(p + a, q + b).map_or(0, |e| e.dim());
            if m.cols() != src_dim || m.rows() != dst_dim {
                failures.push(MorphismFailure { level: n, p, q, defect: MorphismDefect::Shape });
            }
        }

        let get_map = |lvl: u32, p: i64, q: i64, rows: usize, cols: usize| -> IntMatrix {
            f.maps
                .get(&(lvl, p, q))
                .filter(|m| m.rows() == rows && m.cols() == cols)
                .cloned()
                .unwrap_or_else(|| IntMatrix::zeros(rows, cols))
        };

        // commutation with d_n on every source entry
        for (p, q) in sp.keys().collect::<Vec<_>>() {
            let src_dim = sp.entry(p, q).map(|e| e.dim()).unwrap_or(0);
            let (dp, dq) = (p - r, q + r - 1);
            let mid_src = sp.entry(dp, dq).map_or(0, |e| e.dim());
            let mid_dst = tp.entry(p + a, q + b).map_or(0, |e| e.dim());
            let final_dim = tp.entry(dp + a, dq + b).map_or(0, |e| e.dim());
            let d_src = sp
                .differential(p, q)
                .cloned()
                .unwrap_or_else(|| IntMatrix::zeros(mid_src, src_dim));
            let d_dst = tp
                .differential(p + a, q + b)
                .cloned()
                .unwrap_or_else(|| IntMatrix::zeros(final_dim, mid_dst));
            let f_here = get_map(n, p, q, mid_dst, src_dim);
            let f_there = get_map(n, dp, dq, final_dim, mid_src);
            let lhs = f_there.mul(&d_src);
            let rhs = d_dst.mul(&f_here);
            let orders = tp.entry(dp + a, dq + b).map(|e| e.group.orders()).unwrap_or_default();
            let equal = (0..lhs.rows()).all(|i| {
                (0..lhs.cols()).all(|j| {
                    let diff = lhs.at(i, j) - rhs.at(i, j);
                    if orders[i].is_zero() {
                        diff.is_zero()
                    } else {
                        diff.mod_floor(&orders[i]).is_zero()
                    }
                })
            });
            if !equal {
                failures.push(MorphismFailure {
                    level: n,
                    p,
                    q,
                    defect: MorphismDefect::Commutation,
                });
            }
        }

        // H(f^n) = f^{n+1}
        if n < hi {
            let sp_next = source.page(n + 1).unwrap();
            let tp_next = target.page(n + 1).unwrap();
            for (p, q) in sp_next.keys().collect::<Vec<_>>() {
                let se = sp_next.entry(p, q).unwrap();
                let src_prev_dim = sp.entry(p, q).map_or(0, |e| e.dim());
                let dst_prev_dim = tp.entry(p + a, q + b).map_or(0, |e| e.dim());
                let f_prev = get_map(n, p, q, dst_prev_dim, src_prev_dim);
                let te_next = tp_next.entry(p + a, q + b);
                let next_dim = te_next.map_or(0, |e| e.dim());
                let f_next = get_map(n + 1, p, q, next_dim, se.dim());
                let mut bad = false;
                for col in 0..se.dim() {
                    let rep = se.lift_prev.column(col);
                    let image = f_prev.mul_vec(&rep);
                    let induced = match te_next {
                        Some(te) => te.project_prev(&image),
                        None => {
                            if image.iter().all(|x| x.is_zero()) {
                                Some(Vec::new())
                            } else {
                                None
                            }
                        }
                    };
                    let supplied: Vec<BigInt> = if f_next.cols() > col {
                        f_next.column(col)
                    } else {
                        Vec::new()
                    };
                    let orders = te_next.map(|e| e.group.orders()).unwrap_or_default();
                    let ok = match induced {
                        Some(ind) => coords_equal_mod(&ind, &supplied, &orders),
                        None => false,
                    };
                    if !ok {
                        bad = true;
                        break;
                    }
                }
                if bad {
                    failures.push(MorphismFailure {
                        level: n + 1,
                        p,
                        q,
                        defect: MorphismDefect::Induced,
                    });
                }
            }
        }
    }
    failures
}

/// A pairing making a page a module over a multiplicative page: for a pair
/// of source keys, the target key and the basis-level table.
#[derive(Clone, Default)]
pub struct ModulePairing {
    pub tables: BTreeMap<TableKey, ((i64, i64), BasisTable)>,
}

impl ModulePairing {
    /// The pairing of a multiplicative page acting on itself by its product.
    pub fn from_self_product(page: &Page) -> ModulePairing {
        let mut tables = BTreeMap::new();
        let keys: Vec<(i64, i64)> = page.entries.keys().copied().collect();
        for &k1 in &keys {
            for &k2 in &keys {
                let e1 = &page.entries[&k1];
                let e2 = &page.entries[&k2];
                let mut target = None;
                let mut table = vec![vec![Vec::new(); e2.dim()]; e1.dim()];
                for (i, row) in table.iter_mut().enumerate() {
                    for (j, cell) in row.iter_mut().enumerate() {
                        let x = Page::basis_vector(e1.dim(), i);
                        let y = Page::basis_vector(e2.dim(), j);
                        if let Some((t, prod)) = page.multiply(k1, &x, k2, &y) {
                            target.get_or_insert(t);
                            *cell = prod;
                        }
                    }
                }
                if let Some(t) = target {
                    let dim = page.entries.get(&t).map_or(0, |e| e.dim());
                    for row in &mut table {
                        for cell in row.iter_mut() {
                            if cell.is_empty() {
                                *cell = vec![BigInt::zero(); dim];
                            }
                        }
                    }
                    tables.insert((k1, k2), (t, table));
                }
            }
        }
        ModulePairing { tables }
    }

    fn act(
        &self,
        module: &Page,
        ke: (i64, i64),
        x: &[BigInt],
        km: (i64, i64),
        m: &[BigInt],
    ) -> Option<((i64, i64), Vec<BigInt>)> {
        let (target, table) = self.tables.get(&(ke, km))?;
        let te = module.entries.get(target);
        let dim = te.map_or(0, |e| e.dim());
        let mut acc = vec![BigInt::zero(); dim];
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, mj) in m.iter().enumerate() {
                if mj.is_zero() {
                    continue;
                }
                if table[i][j].len() == dim {
                    for (t, v) in table[i][j].iter().enumerate() {
                        acc[t] += xi * mj * v;
                    }
                }
            }
        }
        Some((*target, te.map_or(acc.clone(), |e| e.reduce(&acc))))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairingFailure {
    pub ring_key: (i64, i64),
    pub ring_index: usize,
    pub module_key: (i64, i64),
    pub module_index: usize,
    pub associativity: bool,
}

/// Verifies `d(x·m) = d(x)·m + (-1)^{|x|} x·d(m)` and compatibility of the
/// pairing with the ring page's own product, on all basis pairs in window.
pub fn check_module_pairing(
    ring_page: &Page,
    module: &Page,
    pairing: &ModulePairing,
) -> Vec<PairingFailure> {
    let mut failures = Vec::new();
    let ring_keys: Vec<(i64, i64)> = ring_page.entries.keys().copied().collect();
    let mod_keys: Vec<(i64, i64)> = module.entries.keys().copied().collect();

    for &ke in &ring_keys {
        for &km in &mod_keys {
            let ee = &ring_page.entries[&ke];
            let em = &module.entries[&km];
            for i in 0..ee.dim() {
                for j in 0..em.dim() {
                    let x = Page::basis_vector(ee.dim(), i);
                    let m = Page::basis_vector(em.dim(), j);
                    let Some((txm, xm)) = pairing.act(module, ke, &x, km, &m) else { continue };
                    let (t_lhs, lhs) = module.apply_diff(txm, &pad(&xm, module.entries.get(&txm)));
                    let (tdx, dx) = ring_page.apply_diff(ke, &x);
                    let term1 = if dx.iter().any(|c| !c.is_zero()) {
                        match pairing.act(module, tdx, &dx, km, &m) {
                            Some(t) => t,
                            None => continue,
                        }
                    } else {
                        (t_lhs, Vec::new())
                    };
                    let (tdm, dm) = module.apply_diff(km, &m);
                    let term2 = if dm.iter().any(|c| !c.is_zero()) {
                        match pairing.act(module, ke, &x, tdm, &dm) {
                            Some(t) => t,
                            None => continue,
                        }
                    } else {
                        (t_lhs, Vec::new())
                    };
                    let sign = (ke.0 + ke.1).rem_euclid(2) == 1;
                    let te = module.entries.get(&t_lhs);
                    let dim = te.map_or(0, |e| e.dim());
                    let mut rhs = vec![BigInt::zero(); dim];
                    for (t, term) in [term1, term2].iter().enumerate() {
                        if term.1.is_empty() || term.1.len() != dim {
                            continue;
                        }
                        for (a_idx, v) in term.1.iter().enumerate() {
                            if t == 1 && sign {
                                rhs[a_idx] -= v;
                            } else {
                                rhs[a_idx] += v;
                            }
                        }
                    }
                    let lhs = pad(&lhs, te);
                    let rhs = te.map_or(rhs.clone(), |e| e.reduce(&rhs));
                    let orders = te.map(|e| e.group.orders()).unwrap_or_default();
                    if !coords_equal_mod(&lhs, &rhs, &orders) {
                        failures.push(PairingFailure {
                            ring_key: ke,
                            ring_index: i,
                            module_key: km,
                            module_index: j,
                            associativity: false,
                        });
                    }
                }
            }
        }
    }

    // associativity (x·y)·m = x·(y·m) against the ring page's own product
    if ring_page.product.is_some() {
        for &k1 in &ring_keys {
            for &k2 in &ring_keys {
                for &km in &mod_keys {
                    check_associativity(ring_page, module, pairing, k1, k2, km, &mut failures);
                }
            }
        }
    }
    failures
}

fn check_associativity(
    ring_page: &Page,
    module: &Page,
    pairing: &ModulePairing,
    k1: (i64, i64),
    k2: (i64, i64),
    km: (i64, i64),
    failures: &mut Vec<PairingFailure>,
) {
    let e1 = &ring_page.entries[&k1];
    let e2 = &ring_page.entries[&k2];
    let em = &module.entries[&km];
    for i in 0..e1.dim() {
        for j in 0..e2.dim() {
            for l in 0..em.dim() {
                let x = Page::basis_vector(e1.dim(), i);
                let y = Page::basis_vector(e2.dim(), j);
                let m = Page::basis_vector(em.dim(), l);
                let Some((txy, xy)) = ring_page.multiply(k1, &x, k2, &y) else { continue };
                let lhs =
                    pairing.act(module, txy, &pad(&xy, ring_page.entries.get(&txy)), km, &m);
                let rhs = pairing.act(module, k2, &y, km, &m).and_then(|(t, ym)| {
                    pairing.act(module, k1, &x, t, &pad(&ym, module.entries.get(&t)))
                });
                let (Some(lhs), Some(rhs)) = (lhs, rhs) else { continue };
                if lhs.0 != rhs.0 {
                    continue;
                }
                let orders =
                    module.entries.get(&lhs.0).map(|e| e.group.orders()).unwrap_or_default();
                let l_c = pad(&lhs.1, module.entries.get(&lhs.0));
                let r_c = pad(&rhs.1, module.entries.get(&rhs.0));
                if !coords_equal_mod(&l_c, &r_c, &orders) {
                    failures.push(PairingFailure {
                        ring_key: k1,
                        ring_index: i,
                        module_key: km,
                        module_index: l,
                        associativity: true,
                    });
                }
            }
        }
    }
}
