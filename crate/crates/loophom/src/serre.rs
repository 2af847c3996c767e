//! The loop-space spectral sequences of spheres and projective spaces: Serre
//! E² assembly from graded groups, the catalog of loop homology rings, the
//! multiplicative reconstruction from a free stable page, Atiyah-Hirzebruch
//! tensor computations over coefficient ring files, and a bounded search for
//! the generator differentials that the catalog rings force.
//!
//! Loop homology is graded with the dimension shift: for a `d`-manifold the
//! degree-`k` component of the catalog ring is the ordinary homology of the
//! free loop space in degree `k + d`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde_json::{json, Value};
use thiserror::Error;

use crate::groups::{FinAbGroup, GradedGroup, GroupError};
use crate::rings::{
    CoefficientTag, GeneratorKind, RingElement, RingError, RingGenerator, RingPresentation,
};
use crate::spectral::{BigradedRing, Page, PageError, SpectralSequence, Window};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SerreError {
    #[error("unsupported space: {0}")]
    UnsupportedSpace(String),
    #[error("dimension out of range: {0}")]
    DimensionOutOfRange(String),
    #[error("base row is not of polynomial ⊗ exterior form: {0}")]
    NotPolynomialExterior(String),
    #[error("homology has torsion of odd order in degree {degree}")]
    OddTorsion { degree: i64 },
    #[error("coefficient data does not cover degree {degree} (window {window})")]
    CoefficientWindow { degree: i64, window: i64 },
    #[error("invalid coefficient file: {0}")]
    InvalidCoefficients(String),
    #[error("ring error: {0}")]
    Ring(#[from] RingError),
    #[error("page error: {0}")]
    Page(#[from] PageError),
    #[error("group error: {0}")]
    Group(#[from] GroupError),
}

/// The spaces whose free loop spaces the engine knows how to handle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpaceSpec {
    /// S^n, n ≥ 2.
    Sphere(u32),
    /// CP^n, n ≥ 1.
    ComplexProjective(u32),
    /// HP^n, n ≥ 1.
    QuaternionicProjective(u32),
    /// A fibre bundle S^k → E → S^n, handled through the rational route.
    SphereBundle { fiber: u32, base: u32 },
}

impl SpaceSpec {
    pub fn validate(&self) -> Result<(), SerreError> {
        match *self {
            SpaceSpec::Sphere(n) if n >= 2 => Ok(()),
            SpaceSpec::Sphere(n) => {
                Err(SerreError::DimensionOutOfRange(format!("sphere dimension {n} < 2")))
            }
            SpaceSpec::ComplexProjective(n) | SpaceSpec::QuaternionicProjective(n) if n >= 1 => {
                Ok(())
            }
            SpaceSpec::ComplexProjective(n) | SpaceSpec::QuaternionicProjective(n) => Err(
                SerreError::DimensionOutOfRange(format!("projective space index {n} < 1")),
            ),
            SpaceSpec::SphereBundle { fiber, base } => {
                if fiber >= 2 && base >= 2 {
                    Ok(())
                } else {
                    Err(SerreError::DimensionOutOfRange(format!(
                        "sphere bundle ({fiber}, {base}) needs both dimensions ≥ 2"
                    )))
                }
            }
        }
    }

    /// Real dimension of the manifold; the loop grading shift.
    pub fn dimension(&self) -> i64 {
        match *self {
            SpaceSpec::Sphere(n) => n as i64,
            SpaceSpec::ComplexProjective(n) => 2 * n as i64,
            SpaceSpec::QuaternionicProjective(n) => 4 * n as i64,
            SpaceSpec::SphereBundle { fiber, base } => (fiber + base) as i64,
        }
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SpaceSpec::Sphere(n) => write!(f, "S^{n}"),
            SpaceSpec::ComplexProjective(n) => write!(f, "CP^{n}"),
            SpaceSpec::QuaternionicProjective(n) => write!(f, "HP^{n}"),
            SpaceSpec::SphereBundle { fiber, base } => {
                write!(f, "S^{fiber} bundle over S^{base}")
            }
        }
    }
}

fn gen(name: &str, degree: i64, kind: GeneratorKind) -> RingGenerator {
    RingGenerator { name: name.to_string(), degree, kind }
}

/// The loop homology ring of a sphere, in the dimension-shifted grading:
/// `Λ(a) ⊗ Z[u]` for odd n with |a| = -n, |u| = n-1, and
/// `Λ(b) ⊗ Z[a,v]/(a², ab, 2av)` for even n with |b| = -1, |a| = -n,
/// |v| = 2n-2.
pub fn cjy_sphere_ring(n: u32) -> Result<RingPresentation, SerreError> {
    if n < 2 {
        return Err(SerreError::DimensionOutOfRange(format!("sphere dimension {n} < 2")));
    }
    let n = n as i64;
    let ring = if n % 2 == 1 {
        RingPresentation::new(
            vec![
                gen("a", -n, GeneratorKind::Exterior),
                gen("u", n - 1, GeneratorKind::Polynomial),
            ],
            &[],
            CoefficientTag::Integers,
        )?
    } else {
        RingPresentation::new(
            vec![
                gen("b", -1, GeneratorKind::Exterior),
                gen("a", -n, GeneratorKind::Polynomial),
                gen("v", 2 * n - 2, GeneratorKind::Polynomial),
            ],
            &[
                &[(1, &[("a", 2)])],
                &[(1, &[("a", 1), ("b", 1)])],
                &[(2, &[("a", 1), ("v", 1)])],
            ],
            CoefficientTag::Integers,
        )?
    };
    Ok(ring)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProjectiveKind {
    Complex,
    Quaternionic,
}

impl ProjectiveKind {
    /// Real dimension of the ground field.
    pub fn field_dim(&self) -> i64 {
        match self {
            ProjectiveKind::Complex => 2,
            ProjectiveKind::Quaternionic => 4,
        }
    }
}

/// The loop homology ring of a projective space:
/// `Λ(w) ⊗ Z[c,u]/(c^{n+1}, wc^n, (n+1)c^n u)` with |w| = -1, |c| = -d and
/// |u| = d(n+1) - 2 for d the real dimension of the ground field.
pub fn projective_ring(kind: ProjectiveKind, n: u32) -> Result<RingPresentation, SerreError> {
    if n < 1 {
        return Err(SerreError::DimensionOutOfRange(format!("projective space index {n} < 1")));
    }
    let d = kind.field_dim();
    let n_i = n as i64;
    let u_deg = d * (n_i + 1) - 2;
    let ring = RingPresentation::new(
        vec![
            gen("w", -1, GeneratorKind::Exterior),
            gen("c", -d, GeneratorKind::Polynomial),
            gen("u", u_deg, GeneratorKind::Polynomial),
        ],
        &[
            &[(1, &[("c", n + 1)])],
            &[(1, &[("w", 1), ("c", n)])],
            &[(n_i + 1, &[("c", n), ("u", 1)])],
        ],
        CoefficientTag::Integers,
    )?;
    Ok(ring)
}

/// Pontryagin ring of the based loop space: `Z[x]` with |x| = n-1 for a
/// sphere (the square of x survives in every parity), and `Z[y] ⊗ Λ(z)`
/// with |y| = d(n+1)-2, |z| = d-1 for a projective space.
pub fn loop_fiber_ring(spec: SpaceSpec) -> Result<RingPresentation, SerreError> {
    spec.validate()?;
    let ring = match spec {
        SpaceSpec::Sphere(n) => RingPresentation::new(
            vec![gen("x", n as i64 - 1, GeneratorKind::Polynomial)],
            &[],
            CoefficientTag::Integers,
        )?,
        SpaceSpec::ComplexProjective(n) | SpaceSpec::QuaternionicProjective(n) => {
            let d = match spec {
                SpaceSpec::ComplexProjective(_) => 2i64,
                _ => 4,
            };
            let y_deg = d * (n as i64 + 1) - 2;
            let z_kind = if (d - 1) % 2 == 1 {
                GeneratorKind::Exterior
            } else {
                GeneratorKind::Polynomial
            };
            RingPresentation::new(
                vec![gen("y", y_deg, GeneratorKind::Polynomial), gen("z", d - 1, z_kind)],
                &[],
                CoefficientTag::Integers,
            )?
        }
        SpaceSpec::SphereBundle { .. } => {
            return Err(SerreError::UnsupportedSpace(
                "sphere bundles are handled through the rational route".into(),
            ))
        }
    };
    Ok(ring)
}

/// The intersection ring of the base in the dimension-shifted grading.
pub fn base_intersection_ring(spec: SpaceSpec) -> Result<RingPresentation, SerreError> {
    spec.validate()?;
    match spec {
        SpaceSpec::Sphere(n) => {
            let n = n as i64;
            if n % 2 == 1 {
                Ok(RingPresentation::new(
                    vec![gen("s", -n, GeneratorKind::Exterior)],
                    &[],
                    CoefficientTag::Integers,
                )?)
            } else {
                Ok(RingPresentation::new(
                    vec![gen("s", -n, GeneratorKind::Polynomial)],
                    &[&[(1, &[("s", 2)])]],
                    CoefficientTag::Integers,
                )?)
            }
        }
        SpaceSpec::ComplexProjective(n) | SpaceSpec::QuaternionicProjective(n) => {
            let d = match spec {
                SpaceSpec::ComplexProjective(_) => 2i64,
                _ => 4,
            };
            Ok(RingPresentation::new(
                vec![gen("c", -d, GeneratorKind::Polynomial)],
                &[&[(1, &[("c", n + 1)])]],
                CoefficientTag::Integers,
            )?)
        }
        SpaceSpec::SphereBundle { .. } => Err(SerreError::UnsupportedSpace(
            "sphere bundles are handled through the rational route".into(),
        )),
    }
}

/// Ordinary homology of the base as a graded group.
pub fn base_homology(spec: SpaceSpec) -> Result<GradedGroup, SerreError> {
    spec.validate()?;
    match spec {
        SpaceSpec::Sphere(n) => {
            let mut h = GradedGroup::nonnegative(n as i64);
            h.set(0, FinAbGroup::free(1))?;
            h.set(n as i64, FinAbGroup::free(1))?;
            Ok(h)
        }
        SpaceSpec::ComplexProjective(n) | SpaceSpec::QuaternionicProjective(n) => {
            let d = match spec {
                SpaceSpec::ComplexProjective(_) => 2i64,
                _ => 4,
            };
            let mut h = GradedGroup::nonnegative(d * n as i64);
            for k in 0..=n as i64 {
                h.set(d * k, FinAbGroup::free(1))?;
            }
            Ok(h)
        }
        SpaceSpec::SphereBundle { .. } => Err(SerreError::UnsupportedSpace(
            "sphere bundles are handled through the rational route".into(),
        )),
    }
}

/// E² of a fibration with trivial coefficient system: `E²_{p,q}` is the
/// homology of the base with coefficients in the degree-q part of the
/// fiber's homology. No differentials are installed.
pub fn serre_e2_trivial(base: &GradedGroup, fiber: &GradedGroup) -> Page {
    let window = Window {
        p_min: base.min_degree(),
        p_max: base.max_degree() + 1,
        q_min: fiber.min_degree(),
        q_max: fiber.max_degree(),
    };
    let mut groups = Vec::new();
    for q in fiber.min_degree()..=fiber.max_degree() {
        let c = fiber.get(q);
        if c.is_trivial() {
            continue;
        }
        for p in window.p_min..=window.p_max {
            let entry = crate::groups::uct_entry(base, &c, p);
            if !entry.is_trivial() {
                groups.push(((p, q), entry));
            }
        }
    }
    Page::from_groups(2, window, groups)
}

/// A generator differential assignment for [`build_loop_ss`]: at page
/// `level`, the named fiber generator maps to `value`.
#[derive(Clone)]
pub struct GenDiff {
    pub generator: String,
    pub level: u32,
    pub value: RingElement,
}

/// The loop-space spectral sequence of a supported space together with the
/// catalog ring it should converge to.
pub struct LoopSs {
    pub space: SpaceSpec,
    pub seq: SpectralSequence,
    pub catalog: RingPresentation,
    /// Grading shift: catalog degree k is ordinary homology degree k + shift.
    pub shift: i64,
}

impl LoopSs {
    /// Exact degreewise comparison of the stable page against the catalog
    /// ring on total degrees `[-shift, max_degree]`.
    pub fn matches_catalog(&self, max_degree: i64) -> bool {
        (-self.shift..=max_degree).all(|k| self.seq.degreewise(k) == self.catalog.component(k))
    }
}

/// Builds the loop-space spectral sequence in the dimension-shifted grading:
/// base columns at p in [-d, 0], fiber rows upward, multiplicative E² the
/// tensor of the base intersection ring with the fiber Pontryagin ring.
/// Differentials come from `gen_diffs`, extended by the Leibniz rule; pages
/// are turned until the window stabilizes. The window is chosen so that every
/// total degree up to `max_degree` is exact.
pub fn build_loop_ss(
    spec: SpaceSpec,
    gen_diffs: &[GenDiff],
    max_degree: i64,
) -> Result<LoopSs, SerreError> {
    spec.validate()?;
    let d = spec.dimension();
    let base = base_intersection_ring(spec)?;
    let fiber = loop_fiber_ring(spec)?;
    let base_count = base.generators().len();
    let ring = base.tensor_with(&fiber)?;
    let bidegrees: Vec<(i64, i64)> = ring
        .generators()
        .iter()
        .enumerate()
        .map(|(i, g)| if i < base_count { (g.degree, 0) } else { (0, g.degree) })
        .collect();
    let bigraded = BigradedRing::new(ring, bidegrees)?;
    let window = Window { p_min: -d, p_max: 0, q_min: 0, q_max: max_degree + d };
    let e2 = Page::from_bigraded_ring(2, window, bigraded)?;

    let mut by_level: BTreeMap<u32, Vec<(String, RingElement)>> = BTreeMap::new();
    for gd in gen_diffs {
        if gd.level < 2 {
            return Err(SerreError::Page(PageError::BidegreeViolation(format!(
                "differentials start at level 2, got {}",
                gd.level
            ))));
        }
        by_level.entry(gd.level).or_default().push((gd.generator.clone(), gd.value.clone()));
    }
    let last_level = by_level.keys().max().copied().unwrap_or(2);

    let mut pages = Vec::new();
    let mut current = e2;
    for level in 2..=last_level {
        debug_assert_eq!(current.level(), level);
        let with_diffs = match by_level.get(&level) {
            Some(assignments) => current.leibniz_extend(assignments)?,
            None => current,
        };
        let next = with_diffs.turn_page()?;
        pages.push(with_diffs);
        current = next;
    }
    pages.push(current);

    let catalog = match spec {
        SpaceSpec::Sphere(n) => cjy_sphere_ring(n)?,
        SpaceSpec::ComplexProjective(n) => projective_ring(ProjectiveKind::Complex, n)?,
        SpaceSpec::QuaternionicProjective(n) => projective_ring(ProjectiveKind::Quaternionic, n)?,
        SpaceSpec::SphereBundle { .. } => {
            return Err(SerreError::UnsupportedSpace(
                "sphere bundles are handled through the rational route".into(),
            ))
        }
    };
    Ok(LoopSs { space: spec, seq: SpectralSequence::new(pages), catalog, shift: d })
}

/// The standard differential shape for each space, with coefficient λ: for
/// spheres `d_n(x) = λ s x²`, for projective spaces over a ground field of
/// real dimension d `d_{dn}(z) = λ c^n y`.
pub fn standard_gen_diff(spec: SpaceSpec, lambda: i64) -> Result<Vec<GenDiff>, SerreError> {
    spec.validate()?;
    let base = base_intersection_ring(spec)?;
    let fiber = loop_fiber_ring(spec)?;
    let ring = base.tensor_with(&fiber)?;
    match spec {
        SpaceSpec::Sphere(n) => {
            let value = ring.element(&[(lambda, &[("s", 1), ("x", 2)])])?;
            Ok(vec![GenDiff { generator: "x".into(), level: n, value }])
        }
        SpaceSpec::ComplexProjective(n) | SpaceSpec::QuaternionicProjective(n) => {
            let d = match spec {
                SpaceSpec::ComplexProjective(_) => 2u32,
                _ => 4,
            };
            let value = ring.element(&[(lambda, &[("c", n), ("y", 1)])])?;
            Ok(vec![GenDiff { generator: "z".into(), level: d * n, value }])
        }
        SpaceSpec::SphereBundle { .. } => Err(SerreError::UnsupportedSpace(
            "sphere bundles are handled through the rational route".into(),
        )),
    }
}

/// Bounded search over generator-differential coefficients: which λ in
/// `[-bound, bound]` produce a stable page matching the catalog ring
/// degreewise up to `max_degree`.
pub fn search_differentials(
    spec: SpaceSpec,
    bound: i64,
    max_degree: i64,
) -> Result<Vec<i64>, SerreError> {
    let mut matches = Vec::new();
    for lambda in -bound..=bound {
        let diffs = standard_gen_diff(spec, lambda)?;
        let ss = build_loop_ss(spec, &diffs, max_degree)?;
        if ss.matches_catalog(max_degree) {
            matches.push(lambda);
        }
    }
    Ok(matches)
}

/// Whether a reconstruction hypothesis was verified from the data or is
/// carried as an assumption.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HypothesisStatus {
    Confirmed,
    Assumed,
}

#[derive(Clone, Debug)]
pub struct Hypothesis {
    pub name: String,
    pub status: HypothesisStatus,
    pub detail: String,
}

pub type HypothesisReport = Vec<Hypothesis>;

/// Reconstruction of the multiplicative total homology from a free stable
/// page of tensor form: when the base row is a polynomial ⊗ exterior algebra
/// and the stable page is the tensor of base row and fiber column, the total
/// ring is their tensor. Hypotheses checkable from the data are confirmed;
/// extension triviality is confirmed exactly when every component on the
/// window is torsion free, and echoed as an assumption otherwise.
pub fn assemble_from_einf(
    base_row: &RingPresentation,
    fiber_col: &RingPresentation,
    max_degree: i64,
) -> Result<(RingPresentation, HypothesisReport), SerreError> {
    if !base_row.is_free_poly_exterior() {
        return Err(SerreError::NotPolynomialExterior(base_row.to_string()));
    }
    let tensor = base_row.tensor_with(fiber_col)?;
    let mut report = vec![Hypothesis {
        name: "base row polynomial ⊗ exterior".into(),
        status: HypothesisStatus::Confirmed,
        detail: base_row.to_string(),
    }];

    let min_deg = tensor.min_degree();
    let mut all_free = true;
    for k in min_deg..=max_degree {
        if !tensor.component(k).is_free() {
            all_free = false;
        }
    }
    report.push(Hypothesis {
        name: "finitely generated in every bidegree".into(),
        status: HypothesisStatus::Confirmed,
        detail: format!("components computed on degrees [{min_deg}, {max_degree}]"),
    });
    report.push(Hypothesis {
        name: "stable page is base ⊗ fiber".into(),
        status: HypothesisStatus::Assumed,
        detail: "input data".into(),
    });
    report.push(Hypothesis {
        name: "all filtration extensions trivial".into(),
        status: if all_free { HypothesisStatus::Confirmed } else { HypothesisStatus::Assumed },
        detail: if all_free {
            "every component on the window is torsion free".into()
        } else {
            "torsion present; triviality taken as input".into()
        },
    });
    Ok((tensor, report))
}

/// A graded coefficient ring for generalized homology computations, read
/// from a JSON data file: either free generators (a polynomial ⊗ exterior
/// ring over the integers) or an explicit graded table of groups.
#[derive(Clone, Debug)]
pub struct CoefficientRing {
    pub name: String,
    /// The data is complete on degrees `[-window, window]`.
    pub window: i64,
    pub form: CoefficientForm,
}

#[derive(Clone, Debug)]
pub enum CoefficientForm {
    FreeGenerators(RingPresentation),
    GradedTable(BTreeMap<i64, FinAbGroup>),
}

impl CoefficientRing {
    pub fn from_json(v: &Value) -> Result<CoefficientRing, SerreError> {
        let obj =
            v.as_object().ok_or_else(|| SerreError::InvalidCoefficients("expected object".into()))?;
        let name = obj
            .get("name")
            .and_then(Value::as_str)
            .ok_or_else(|| SerreError::InvalidCoefficients("missing name".into()))?
            .to_string();
        let window = obj
            .get("window")
            .and_then(Value::as_i64)
            .ok_or_else(|| SerreError::InvalidCoefficients("missing window".into()))?;
        if let Some(gens) = obj.get("free_generators").and_then(Value::as_array) {
            let mut ring_gens = Vec::new();
            for g in gens {
                let gname = g["name"]
                    .as_str()
                    .ok_or_else(|| SerreError::InvalidCoefficients("generator name".into()))?;
                let degree = g["degree"]
                    .as_i64()
                    .ok_or_else(|| SerreError::InvalidCoefficients("generator degree".into()))?;
                let kind = if degree % 2 == 0 {
                    GeneratorKind::Polynomial
                } else {
                    GeneratorKind::Exterior
                };
                ring_gens.push(gen(gname, degree, kind));
            }
            let ring = RingPresentation::new(ring_gens, &[], CoefficientTag::Integers)?;
            return Ok(CoefficientRing {
                name,
                window,
                form: CoefficientForm::FreeGenerators(ring),
            });
        }
        if let Some(table) = obj.get("graded_table").and_then(Value::as_object) {
            let mut map = BTreeMap::new();
            for (k, gv) in table {
                let degree: i64 = k
                    .parse()
                    .map_err(|_| SerreError::InvalidCoefficients(format!("bad degree key {k:?}")))?;
                let group = FinAbGroup::from_json(gv)?;
                if !group.is_trivial() {
                    map.insert(degree, group);
                }
            }
            if map.get(&0).map_or(true, |g| g.rank() == 0) {
                return Err(SerreError::InvalidCoefficients(
                    "degree-0 part must contain the unit".into(),
                ));
            }
            return Ok(CoefficientRing { name, window, form: CoefficientForm::GradedTable(map) });
        }
        Err(SerreError::InvalidCoefficients("need free_generators or graded_table".into()))
    }

    pub fn from_file(path: &Path) -> Result<CoefficientRing, SerreError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SerreError::InvalidCoefficients(format!("{}: {e}", path.display())))?;
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| SerreError::InvalidCoefficients(format!("{}: {e}", path.display())))?;
        Self::from_json(&v)
    }

    /// The degree-q group. Errors outside the declared window for table
    /// data; free-generator data defines every degree.
    pub fn component(&self, q: i64) -> Result<FinAbGroup, SerreError> {
        match &self.form {
            CoefficientForm::FreeGenerators(ring) => Ok(ring.component(q)),
            CoefficientForm::GradedTable(map) => {
                if q.abs() > self.window {
                    return Err(SerreError::CoefficientWindow { degree: q, window: self.window });
                }
                Ok(map.get(&q).cloned().unwrap_or_else(FinAbGroup::trivial))
            }
        }
    }

    /// Degrees with a possibly nontrivial group, clipped to `[lo, hi]` and
    /// to the declared window.
    fn support(&self, lo: i64, hi: i64) -> Vec<i64> {
        let lo = lo.max(-self.window);
        let hi = hi.min(self.window);
        match &self.form {
            CoefficientForm::FreeGenerators(_) => (lo..=hi).collect(),
            CoefficientForm::GradedTable(map) => {
                map.keys().copied().filter(|&q| q >= lo && q <= hi).collect()
            }
        }
    }

    pub fn to_json(&self) -> Value {
        match &self.form {
            CoefficientForm::FreeGenerators(ring) => {
                let gens: Vec<Value> = ring
                    .generators()
                    .iter()
                    .map(|g| json!({"name": g.name, "degree": g.degree}))
                    .collect();
                json!({"name": self.name, "window": self.window, "free_generators": gens})
            }
            CoefficientForm::GradedTable(map) => {
                let mut table = serde_json::Map::new();
                for (d, g) in map {
                    table.insert(d.to_string(), g.to_json());
                }
                json!({"name": self.name, "window": self.window, "graded_table": table})
            }
        }
    }
}

/// Input homology for [`ahss_tensor`]: either a ring presentation evaluated
/// degreewise or an explicit graded group.
pub enum AhssInput<'a> {
    Ring(&'a RingPresentation),
    Graded(&'a GradedGroup),
}

impl AhssInput<'_> {
    fn min_degree(&self) -> i64 {
        match self {
            AhssInput::Ring(r) => r.min_degree(),
            AhssInput::Graded(g) => g.min_degree(),
        }
    }

    fn component(&self, k: i64) -> FinAbGroup {
        match self {
            AhssInput::Ring(r) => {
                if k < r.min_degree() {
                    FinAbGroup::trivial()
                } else {
                    r.component(k)
                }
            }
            AhssInput::Graded(g) => g.get(k),
        }
    }
}

#[derive(Debug)]
pub struct AhssOutput {
    pub graded: GradedGroup,
    /// Tensor ring presentation, attached exactly when the homology ring is
    /// of free polynomial ⊗ exterior form and the coefficients come as free
    /// generators.
    pub ring: Option<RingPresentation>,
    pub report: HypothesisReport,
}

/// Degeneration-based computation of a generalized homology from ordinary
/// homology: degreewise
/// `h_n = ⊕_{p+q=n} [ (H_p ⊗ h_q) ⊕ Tor(H_{p-1}, h_q) ]`,
/// requiring that the ordinary homology have no odd torsion on the window.
/// For degreewise-free H every Tor term vanishes and this is the plain
/// tensor decomposition.
pub fn ahss_tensor(
    h: AhssInput<'_>,
    coeffs: &CoefficientRing,
    max_degree: i64,
) -> Result<AhssOutput, SerreError> {
    let h_min = h.min_degree();
    // Anything the sum over p + q = n can touch with n ≤ max_degree.
    let p_max = max_degree + coeffs.window;
    let mut h_parts: BTreeMap<i64, FinAbGroup> = BTreeMap::new();
    let mut all_free = true;
    for p in h_min..=p_max {
        let part = h.component(p);
        if part.has_odd_torsion() {
            return Err(SerreError::OddTorsion { degree: p });
        }
        if !part.is_free() {
            all_free = false;
        }
        if !part.is_trivial() {
            h_parts.insert(p, part);
        }
    }

    let result_min = h_min - coeffs.window;
    let mut graded = GradedGroup::new(result_min, max_degree);
    for n in result_min..=max_degree {
        let mut acc = FinAbGroup::trivial();
        for q in coeffs.support(n - p_max, n - h_min + 1) {
            let c = coeffs.component(q)?;
            if c.is_trivial() {
                continue;
            }
            let p = n - q;
            if let Some(hp) = h_parts.get(&p) {
                acc = acc.direct_sum(&hp.tensor(&c));
            }
            if let Some(hp1) = h_parts.get(&(p - 1)) {
                acc = acc.direct_sum(&hp1.tor(&c));
            }
        }
        graded.set(n, acc)?;
    }

    let mut report = vec![Hypothesis {
        name: "ordinary homology has no odd torsion on the window".into(),
        status: HypothesisStatus::Confirmed,
        detail: format!("checked degrees [{h_min}, {p_max}]"),
    }];
    if all_free {
        report.push(Hypothesis {
            name: "ordinary homology degreewise free (plain tensor form)".into(),
            status: HypothesisStatus::Confirmed,
            detail: "every Tor term vanishes".into(),
        });
    }
    report.push(Hypothesis {
        name: "Atiyah-Hirzebruch degeneration at E²".into(),
        status: HypothesisStatus::Assumed,
        detail: "manifold generators / no-odd-torsion criterion".into(),
    });

    let ring = match (&h, &coeffs.form) {
        (AhssInput::Ring(hr), CoefficientForm::FreeGenerators(cr))
            if hr.is_free_poly_exterior() =>
        {
            report.push(Hypothesis {
                name: "multiplicative: homology ring polynomial ⊗ exterior".into(),
                status: HypothesisStatus::Confirmed,
                detail: format!("{hr}"),
            });
            Some(hr.tensor_with(cr)?)
        }
        (AhssInput::Ring(hr), _) if hr.is_free_poly_exterior() => {
            report.push(Hypothesis {
                name: "multiplicative: homology ring polynomial ⊗ exterior".into(),
                status: HypothesisStatus::Confirmed,
                detail: "coefficients in table form; tensor ring not presented".into(),
            });
            None
        }
        _ => {
            report.push(Hypothesis {
                name: "multiplicative structure".into(),
                status: HypothesisStatus::Assumed,
                detail: "additive answer only".into(),
            });
            None
        }
    };

    Ok(AhssOutput { graded, ring, report })
}
