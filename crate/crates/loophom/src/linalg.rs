//! Exact integer linear algebra: arbitrary-precision matrices, Smith normal
//! form with unimodular transforms, fraction-free rank, and the subquotient
//! bookkeeping that turns kernels and images into groups in normal form.
//!
//! Every operation is pure and deterministic. The Smith normal form uses a
//! fixed pivot rule (smallest nonzero absolute value, then lowest row, then
//! lowest column) so chosen bases are reproducible across runs.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::groups::FinAbGroup;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("composition is nonzero at row {row}, column {col}")]
    CompositionNonzero { row: usize, col: usize },
    #[error("column {col} does not lie in the span of the given lattice")]
    NotInLattice { col: usize },
}

/// Dense matrix over the integers, row-major, with exact arithmetic.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn diagonal(entries: &[i64], rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        for (i, &e) in entries.iter().enumerate() {
            m.set(i, i, BigInt::from(e));
        }
        m
    }

    /// Builds a matrix from rows of machine integers. Handy in tests.
    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let data = rows.iter().flatten().map(|&x| BigInt::from(x)).collect();
        IntMatrix { rows: r, cols: c, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> BigInt) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn from_columns(rows: usize, columns: &[Vec<BigInt>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length mismatch");
            for (i, v) in col.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, r: usize, c: usize) -> &BigInt {
        assert!(r < self.rows && c < self.cols, "index out of bounds");
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigInt) {
        assert!(r < self.rows && c < self.cols, "index out of bounds");
        self.data[r * self.cols + c] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn column(&self, c: usize) -> Vec<BigInt> {
        (0..self.rows).map(|r| self.at(r, c).clone()).collect()
    }

    pub fn columns(&self) -> impl Iterator<Item = Vec<BigInt>> + '_ {
        (0..self.cols).map(|c| self.column(c))
    }

    pub fn transpose(&self) -> IntMatrix {
        IntMatrix::from_fn(self.cols, self.rows, |i, j| self.at(j, i).clone())
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.at(k, j);
                    if !b.is_zero() {
                        let cur = out.at(i, j) + a * b;
                        out.set(i, j, cur);
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.at(i, j) * &v[j]).sum())
            .collect()
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hconcat(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.rows, other.rows, "hconcat row mismatch");
        IntMatrix::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols { self.at(i, j).clone() } else { other.at(i, j - self.cols).clone() }
        })
    }

    pub fn select_columns(&self, keep: &[usize]) -> IntMatrix {
        IntMatrix::from_fn(self.rows, keep.len(), |i, j| self.at(i, keep[j]).clone())
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row_a += c * row_b
    fn add_row(&mut self, a: usize, b: usize, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let v = self.at(a, j) + c * self.at(b, j);
            self.set(a, j, v);
        }
    }

    /// col_a += c * col_b
    fn add_col(&mut self, a: usize, b: usize, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let v = self.at(i, a) + c * self.at(i, b);
            self.set(i, a, v);
        }
    }

    fn negate_row(&mut self, a: usize) {
        for j in 0..self.cols {
            let v = -self.at(a, j);
            self.set(a, j, v);
        }
    }

    fn negate_col(&mut self, a: usize) {
        for i in 0..self.rows {
            let v = -self.at(i, a);
            self.set(i, a, v);
        }
    }
}

impl std::fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.at(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Smith normal form `U * A * V = D` with unimodular `U`, `V` and a diagonal
/// `D` whose nonnegative entries form a divisibility chain.
#[derive(Clone, Debug)]
pub struct SnfResult {
    pub d: IntMatrix,
    pub u: IntMatrix,
    pub v: IntMatrix,
}

impl SnfResult {
    pub fn diagonal(&self) -> Vec<BigInt> {
        let n = self.d.rows().min(self.d.cols());
        (0..n).map(|i| self.d.at(i, i).clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|x| !x.is_zero()).count()
    }
}

/// Smith normal form together with the inverse of the row transform,
/// tracked incrementally so no separate matrix inversion is needed.
#[derive(Clone)]
pub(crate) struct SnfFull {
    pub d: IntMatrix,
    pub u: IntMatrix,
    pub u_inv: IntMatrix,
    pub v: IntMatrix,
}

impl SnfFull {
    pub fn diagonal(&self) -> Vec<BigInt> {
        let n = self.d.rows().min(self.d.cols());
        (0..n).map(|i| self.d.at(i, i).clone()).collect()
    }
}

struct SnfWorker {
    b: IntMatrix,
    u: IntMatrix,
    u_inv: IntMatrix,
    v: IntMatrix,
}

impl SnfWorker {
    fn new(a: &IntMatrix) -> Self {
        SnfWorker {
            b: a.clone(),
            u: IntMatrix::identity(a.rows()),
            u_inv: IntMatrix::identity(a.rows()),
            v: IntMatrix::identity(a.cols()),
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        self.b.swap_rows(a, b);
        self.u.swap_rows(a, b);
        self.u_inv.swap_cols(a, b);
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        self.b.swap_cols(a, b);
        self.v.swap_cols(a, b);
    }

    /// row_i += c * row_j, kept consistent on u and u_inv.
    fn add_row(&mut self, i: usize, j: usize, c: &BigInt) {
        self.b.add_row(i, j, c);
        self.u.add_row(i, j, c);
        let neg = -c;
        self.u_inv.add_col(j, i, &neg);
    }

    /// col_j += c * col_i, kept consistent on v.
    fn add_col(&mut self, j: usize, i: usize, c: &BigInt) {
        self.b.add_col(j, i, c);
        self.v.add_col(j, i, c);
    }

    fn negate_row(&mut self, i: usize) {
        self.b.negate_row(i);
        self.u.negate_row(i);
        self.u_inv.negate_col(i);
    }

    /// Pivot rule: smallest nonzero |entry| in the trailing submatrix,
    /// ties broken by lowest row then lowest column index.
    fn find_pivot(&self, k: usize) -> Option<(usize, usize)> {
        let mut best: Option<(BigInt, usize, usize)> = None;
        for i in k..self.b.rows() {
            for j in k..self.b.cols() {
                let v = self.b.at(i, j);
                if v.is_zero() {
                    continue;
                }
                let a = v.abs();
                match &best {
                    Some((cur, _, _)) if *cur <= a => {}
                    _ => best = Some((a, i, j)),
                }
            }
        }
        best.map(|(_, i, j)| (i, j))
    }

    fn run(mut self) -> SnfFull {
        let n = self.b.rows().min(self.b.cols());
        for k in 0..n {
            'step: loop {
                let Some((pi, pj)) = self.find_pivot(k) else { break 'step };
                self.swap_rows(k, pi);
                self.swap_cols(k, pj);

                // Clear column k below and row k to the right with euclidean
                // steps; remainders shrink, so re-picking the pivot terminates.
                let mut dirty = false;
                for i in k + 1..self.b.rows() {
                    if !self.b.at(i, k).is_zero() {
                        let q = div_round(self.b.at(i, k), self.b.at(k, k));
                        let neg = -q;
                        self.add_row(i, k, &neg);
                        if !self.b.at(i, k).is_zero() {
                            dirty = true;
                        }
                    }
                }
                for j in k + 1..self.b.cols() {
                    if !self.b.at(k, j).is_zero() {
                        let q = div_round(self.b.at(k, j), self.b.at(k, k));
                        let neg = -q;
                        self.add_col(j, k, &neg);
                        if !self.b.at(k, j).is_zero() {
                            dirty = true;
                        }
                    }
                }
                if dirty {
                    continue 'step;
                }

                // Divisibility: fold any non-multiple into row k and retry.
                let pivot = self.b.at(k, k).clone();
                let mut fixed = true;
                'divis: for i in k + 1..self.b.rows() {
                    for j in k + 1..self.b.cols() {
                        if !self.b.at(i, j).mod_floor(&pivot).is_zero() {
                            self.add_row(k, i, &BigInt::one());
                            fixed = false;
                            break 'divis;
                        }
                    }
                }
                if fixed {
                    if self.b.at(k, k).is_negative() {
                        self.negate_row(k);
                    }
                    break 'step;
                }
            }
        }
        SnfFull { d: self.b, u: self.u, u_inv: self.u_inv, v: self.v }
    }
}

fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    // Round-to-nearest quotient keeps remainders at most |b|/2.
    let (q, r) = a.div_rem(b);
    let two_r = BigInt::from(2) * r.abs();
    if two_r > b.abs() {
        if (a.is_negative()) ^ (b.is_negative()) { q - 1 } else { q + 1 }
    } else {
        q
    }
}

pub(crate) fn snf_full(a: &IntMatrix) -> SnfFull {
    SnfWorker::new(a).run()
}

/// Smith normal form of an integer matrix. `U * A * V = D`, `D` diagonal with
/// nonnegative entries in a divisibility chain, `U` and `V` unimodular.
/// Deterministic for identical input.
pub fn smith_normal_form(a: &IntMatrix) -> SnfResult {
    let full = snf_full(a);
    SnfResult { d: full.d, u: full.u, v: full.v }
}

/// Rank over the rationals via fraction-free (Bareiss) elimination.
pub fn rational_rank(a: &IntMatrix) -> usize {
    let mut m = a.clone();
    let rows = m.rows();
    let cols = m.cols();
    let mut prev = BigInt::one();
    let mut rank = 0usize;
    let mut row = 0usize;
    for col in 0..cols {
        // find a pivot in this column at or below `row`
        let Some(p) = (row..rows).find(|&i| !m.at(i, col).is_zero()) else { continue };
        m.swap_rows(row, p);
        let pivot = m.at(row, col).clone();
        for i in 0..rows {
            if i == row {
                continue;
            }
            let factor = m.at(i, col).clone();
            for j in 0..cols {
                let v = (&pivot * m.at(i, j) - &factor * m.at(row, j)).div_floor(&prev);
                m.set(i, j, v);
            }
        }
        prev = pivot;
        rank += 1;
        row += 1;
        if row == rows {
            break;
        }
    }
    rank
}

/// Determinant of a square matrix via fraction-free elimination.
pub fn determinant(a: &IntMatrix) -> BigInt {
    assert_eq!(a.rows(), a.cols(), "determinant of non-square matrix");
    let n = a.rows();
    if n == 0 {
        return BigInt::one();
    }
    let mut m = a.clone();
    let mut prev = BigInt::one();
    let mut sign = false;
    for k in 0..n {
        if m.at(k, k).is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !m.at(i, k).is_zero()) else {
                return BigInt::zero();
            };
            m.swap_rows(k, p);
            sign = !sign;
        }
        let pivot = m.at(k, k).clone();
        for i in k + 1..n {
            let factor = m.at(i, k).clone();
            for j in k..n {
                let v = (&pivot * m.at(i, j) - &factor * m.at(k, j)).div_floor(&prev);
                m.set(i, j, v);
            }
        }
        prev = pivot;
    }
    let det = m.at(n - 1, n - 1).clone();
    if sign { -det } else { det }
}

/// Basis of the integer kernel lattice of `a`, as matrix columns.
pub fn kernel_basis(a: &IntMatrix) -> IntMatrix {
    let full = snf_full(a);
    let rank = full.diagonal().iter().filter(|x| !x.is_zero()).count();
    let keep: Vec<usize> = (rank..a.cols()).collect();
    full.v.select_columns(&keep)
}

/// Basis of the column-span lattice of `x`: the nonzero columns of
/// `U^{-1} * D` from the Smith normal form.
pub fn lattice_basis(x: &IntMatrix) -> IntMatrix {
    let full = snf_full(x);
    let diag = full.diagonal();
    let cols: Vec<Vec<BigInt>> = diag
        .iter()
        .enumerate()
        .filter(|(_, d)| !d.is_zero())
        .map(|(i, d)| full.u_inv.column(i).into_iter().map(|v| v * d).collect())
        .collect();
    IntMatrix::from_columns(x.rows(), &cols)
}

/// Solves `basis * c = target` exactly over the integers, if possible.
pub(crate) fn solve_in_lattice(full: &SnfFull, target: &[BigInt]) -> Option<Vec<BigInt>> {
    let d = &full.d;
    let ut = full.u.mul_vec(target);
    let mut y = vec![BigInt::zero(); d.cols()];
    for i in 0..d.rows() {
        let di = if i < d.cols() { d.at(i, i).clone() } else { BigInt::zero() };
        if di.is_zero() {
            if !ut[i].is_zero() {
                return None;
            }
        } else {
            let (q, r) = ut[i].div_rem(&di);
            if !r.is_zero() {
                return None;
            }
            y[i] = q;
        }
    }
    Some(full.v.mul_vec(&y))
}

/// A subquotient `P / S` of an ambient `Z^m`, with a chosen basis in normal
/// form (free generators first, then torsion generators in divisibility
/// order), representative lifts to the ambient coordinates, and enough data
/// to project any element of `P` onto the chosen coordinates.
#[derive(Clone)]
pub struct Subquotient {
    ambient_dim: usize,
    group: FinAbGroup,
    /// Columns are representatives of the chosen generators in ambient coords.
    basis: IntMatrix,
    /// Orders aligned with the basis columns; zero marks a free generator.
    orders: Vec<BigInt>,
    /// SNF of the basis of the sublattice P, for solving membership.
    p_snf: SnfFullBox,
    /// SNF transform of the relation matrix in P-coordinates.
    rel_u: IntMatrix,
    /// Kept U-coordinates, aligned with `basis`/`orders`.
    keep: Vec<usize>,
}

// SnfFull is crate-private; box it behind a clonable wrapper so Subquotient
// can be cloned into pages and shared across threads.
#[derive(Clone)]
struct SnfFullBox(std::sync::Arc<SnfFull>);

impl Subquotient {
    /// Subquotient spanned by the columns of `p_span`, modulo the columns of
    /// `s_span`. Errors if some column of `s_span` is not in the span of
    /// `p_span`.
    pub fn new(
        ambient_dim: usize,
        p_span: &IntMatrix,
        s_span: &IntMatrix,
    ) -> Result<Subquotient, LinalgError> {
        assert_eq!(p_span.rows(), ambient_dim);
        assert_eq!(s_span.rows(), ambient_dim);
        let p_basis = lattice_basis(p_span);
        let k = p_basis.cols();
        let p_snf = snf_full(&p_basis);

        // Express the relators in P-coordinates.
        let mut rel_cols: Vec<Vec<BigInt>> = Vec::with_capacity(s_span.cols());
        for (c, col) in s_span.columns().enumerate() {
            let sol = solve_in_lattice(&p_snf, &col)
                .ok_or(LinalgError::NotInLattice { col: c })?;
            rel_cols.push(sol);
        }
        let rel = IntMatrix::from_columns(k, &rel_cols);
        let rel_snf = snf_full(&rel);
        let diag = rel_snf.diagonal();

        let order_of = |i: usize| -> BigInt {
            if i < diag.len() { diag[i].clone() } else { BigInt::zero() }
        };
        let mut free_idx = Vec::new();
        let mut tors_idx = Vec::new();
        for i in 0..k {
            let o = order_of(i);
            if o.is_zero() {
                free_idx.push(i);
            } else if !o.is_one() {
                tors_idx.push(i);
            }
        }
        let keep: Vec<usize> = free_idx.iter().chain(tors_idx.iter()).copied().collect();
        let orders: Vec<BigInt> = free_idx
            .iter()
            .map(|_| BigInt::zero())
            .chain(tors_idx.iter().map(|&i| order_of(i)))
            .collect();
        let torsion: Vec<BigInt> = tors_idx.iter().map(|&i| order_of(i)).collect();
        let group = FinAbGroup::new(free_idx.len(), torsion);

        // Representatives: columns of p_basis * rel_u^{-1} at the kept indices.
        let reps_all = p_basis.mul(&rel_snf.u_inv);
        let basis = reps_all.select_columns(&keep);

        Ok(Subquotient {
            ambient_dim,
            group,
            basis,
            orders,
            p_snf: SnfFullBox(std::sync::Arc::new(p_snf)),
            rel_u: rel_snf.u,
            keep,
        })
    }

    /// The full ambient `Z^m` modulo the columns of `s_span`.
    pub fn quotient(ambient_dim: usize, s_span: &IntMatrix) -> Subquotient {
        Subquotient::new(ambient_dim, &IntMatrix::identity(ambient_dim), s_span)
            .expect("quotient of the full ambient lattice cannot fail")
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn group(&self) -> &FinAbGroup {
        &self.group
    }

    pub fn basis(&self) -> &IntMatrix {
        &self.basis
    }

    pub fn orders(&self) -> &[BigInt] {
        &self.orders
    }

    pub fn dim(&self) -> usize {
        self.keep.len()
    }

    /// Projects an ambient vector known to lie in `P` onto the chosen
    /// coordinates, reducing torsion coordinates into `[0, order)`. Returns
    /// `None` when the vector is not in `P`.
    pub fn project(&self, ambient: &[BigInt]) -> Option<Vec<BigInt>> {
        assert_eq!(ambient.len(), self.ambient_dim);
        let c = solve_in_lattice(&self.p_snf.0, ambient)?;
        let w = self.rel_u.mul_vec(&c);
        Some(
            self.keep
                .iter()
                .zip(&self.orders)
                .map(|(&i, o)| if o.is_zero() { w[i].clone() } else { w[i].mod_floor(o) })
                .collect(),
        )
    }

    /// Canonical form of arbitrary coordinates with respect to the orders.
    pub fn reduce_coords(&self, coords: &[BigInt]) -> Vec<BigInt> {
        coords
            .iter()
            .zip(&self.orders)
            .map(|(c, o)| if o.is_zero() { c.clone() } else { c.mod_floor(o) })
            .collect()
    }
}

/// Kernel of a map out of `Z^m` taken modulo a relation lattice in the
/// target: the sublattice `{ x : d_out * x ∈ span(rel_target) }`.
pub fn kernel_mod(d_out: &IntMatrix, rel_target: &IntMatrix) -> IntMatrix {
    assert_eq!(d_out.rows(), rel_target.rows());
    let m = d_out.cols();
    if d_out.rows() == 0 || d_out.is_zero() {
        return IntMatrix::identity(m);
    }
    let stacked = d_out.hconcat(rel_target);
    let ker = kernel_basis(&stacked);
    // keep the x-parts; their span is the preimage lattice
    IntMatrix::from_fn(m, ker.cols(), |i, j| ker.at(i, j).clone())
}

/// Homology `ker(d_out) / im(d_in)` of a two-step complex of free modules,
/// with cycle representatives of the chosen generators. Checks
/// `d_out * d_in = 0` first.
pub fn homology_at(
    d_in: &IntMatrix,
    d_out: &IntMatrix,
) -> Result<(FinAbGroup, IntMatrix), LinalgError> {
    let solver = homology_solver(d_in, d_out)?;
    Ok((solver.group().clone(), solver.basis().clone()))
}

/// Like [`homology_at`] but returns the full subquotient, including the
/// projection of arbitrary cycles onto the chosen generators.
pub fn homology_solver(
    d_in: &IntMatrix,
    d_out: &IntMatrix,
) -> Result<Subquotient, LinalgError> {
    if d_in.rows() != d_out.cols() {
        return Err(LinalgError::DimensionMismatch(format!(
            "d_in maps into Z^{} but d_out is defined on Z^{}",
            d_in.rows(),
            d_out.cols()
        )));
    }
    let comp = d_out.mul(d_in);
    for i in 0..comp.rows() {
        for j in 0..comp.cols() {
            if !comp.at(i, j).is_zero() {
                return Err(LinalgError::CompositionNonzero { row: i, col: j });
            }
        }
    }
    let m = d_out.cols();
    let cycles = kernel_basis(d_out);
    Subquotient::new(m, &cycles, d_in)
}
