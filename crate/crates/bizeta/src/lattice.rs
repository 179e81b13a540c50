//! Nilpotent Lie lattices over Z given by structure constants, their derived
//! and central sublattices, and the A- and B-commutator matrices.
//!
//! A lattice is stored as the brackets `[e_i, e_j]` for `i < j` in a fixed
//! ambient basis; antisymmetry is a storage convention, the Jacobi identity
//! and the declared nilpotency class are checked by `validate`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LatticeError {
    #[error("Jacobi identity fails on basis triple ({0}, {1}, {2})")]
    JacobiViolation(usize, usize, usize),
    #[error("declared class {declared} but computed class {computed}")]
    ClassMismatch { declared: u32, computed: u32 },
    #[error("bracket index out of range: {0}")]
    IndexOutOfRange(usize),
    #[error("derived sublattice or centre is not spanned by ambient basis vectors: {0}")]
    NonSaturatedBasis(String),
    #[error("lower central series does not terminate; the bracket is not nilpotent")]
    NotNilpotent,
}

/// A rank-`h` Z-Lie lattice with antisymmetric structure constants and a
/// declared nilpotency class.  Brackets are stored for `i < j` only (0-based
/// internally, 1-based in the JSON interchange format).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LieLattice {
    pub name: String,
    pub h: usize,
    pub class_c: u32,
    /// (i, j) with i < j mapped to the coordinates of [e_i, e_j].
    pub brackets: BTreeMap<(usize, usize), Vec<i64>>,
}

impl LieLattice {
    pub fn new(
        name: &str,
        h: usize,
        class_c: u32,
        brackets: &[((usize, usize), Vec<i64>)],
    ) -> LieLattice {
        LieLattice {
            name: name.to_string(),
            h,
            class_c,
            brackets: brackets.iter().cloned().collect(),
        }
    }

    /// [e_i, e_j] for arbitrary index order, using antisymmetry.
    pub fn bracket_basis(&self, i: usize, j: usize) -> Vec<i64> {
        if i == j {
            return vec![0; self.h];
        }
        let (a, b, sign) = if i < j { (i, j, 1) } else { (j, i, -1) };
        match self.brackets.get(&(a, b)) {
            Some(v) => v.iter().map(|&c| sign * c).collect(),
            None => vec![0; self.h],
        }
    }

    /// Bilinear extension of the bracket to integer vectors.
    pub fn bracket_vec(&self, x: &[i128], y: &[i128]) -> Vec<i128> {
        let mut out = vec![0i128; self.h];
        for (&(i, j), v) in &self.brackets {
            let coeff = x[i] * y[j] - x[j] * y[i];
            if coeff != 0 {
                for (l, &c) in v.iter().enumerate() {
                    out[l] += coeff * c as i128;
                }
            }
        }
        out
    }

    /// Checks index ranges, the Jacobi identity on all basis triples, and the
    /// declared nilpotency class.
    pub fn validate(&self) -> Result<ValidationReport, LatticeError> {
        for (&(i, j), v) in &self.brackets {
            if i >= j || j >= self.h {
                return Err(LatticeError::IndexOutOfRange(j.max(i)));
            }
            if v.len() != self.h {
                return Err(LatticeError::IndexOutOfRange(v.len()));
            }
        }
        for i in 0..self.h {
            for j in i + 1..self.h {
                for k in j + 1..self.h {
                    let mut acc = vec![0i128; self.h];
                    for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
                        let inner = self.bracket_basis(a, b);
                        let inner: Vec<i128> = inner.iter().map(|&x| x as i128).collect();
                        let mut ek = vec![0i128; self.h];
                        ek[c] = 1;
                        let term = self.bracket_vec(&inner, &ek);
                        for l in 0..self.h {
                            acc[l] += term[l];
                        }
                    }
                    if acc.iter().any(|&x| x != 0) {
                        return Err(LatticeError::JacobiViolation(i + 1, j + 1, k + 1));
                    }
                }
            }
        }
        let computed = self.nilpotency_class().ok_or(LatticeError::NotNilpotent)?;
        if computed != self.class_c {
            return Err(LatticeError::ClassMismatch {
                declared: self.class_c,
                computed,
            });
        }
        Ok(ValidationReport {
            name: self.name.clone(),
            rank: self.h,
            class: computed,
        })
    }

    /// Smallest c with vanishing (c+1)-fold brackets, via the lower central
    /// series of rational spans; None if the series does not reach zero.
    pub fn nilpotency_class(&self) -> Option<u32> {
        let mut current: Vec<Vec<i128>> = (0..self.h)
            .map(|i| {
                let mut v = vec![0i128; self.h];
                v[i] = 1;
                v
            })
            .collect();
        let mut class = 1;
        loop {
            let mut next = Vec::new();
            for g in &current {
                for j in 0..self.h {
                    let mut ej = vec![0i128; self.h];
                    ej[j] = 1;
                    let w = self.bracket_vec(g, &ej);
                    if w.iter().any(|&x| x != 0) {
                        next.push(w);
                    }
                }
            }
            if intlin::rank(&next) == 0 {
                return Some(class);
            }
            current = intlin::row_basis(&next);
            class += 1;
            if class > self.h as u32 + 1 {
                return None;
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub name: String,
    pub rank: usize,
    pub class: u32,
}

/// Ranks and bases derived from a validated lattice: `e_basis` generates
/// g modulo its centre, `f_basis` generates the derived sublattice, and the
/// structure constants are taken with respect to these.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeProfile {
    pub lattice: LieLattice,
    pub h: usize,
    pub a: usize,
    pub b: usize,
    pub r: usize,
    pub z: usize,
    /// Ambient indices (0-based) generating g modulo the centre.
    pub e_basis: Vec<usize>,
    /// Ambient indices (0-based) generating the derived sublattice isolator.
    pub f_basis: Vec<usize>,
    /// lambda[i][j][l]: coefficient of f_l in [e_i, e_j], for i, j in [a].
    pub lambda: Vec<Vec<Vec<i64>>>,
    /// Primes dividing |Lambda : M| |iota(Lambda') : Lambda'|, recorded as bad.
    pub bad_index_primes: Vec<u64>,
}

/// Computes the derived span, centre, ranks a, b, r, z, the e/f bases and the
/// structure constants.  The derived sublattice and centre must be spanned by
/// subsets of the ambient basis up to finite index; index primes are recorded
/// rather than refused.
pub fn profile(lattice: &LieLattice) -> Result<LatticeProfile, LatticeError> {
    let h = lattice.h;
    let bracket_rows: Vec<Vec<i128>> = lattice
        .brackets
        .values()
        .map(|v| v.iter().map(|&c| c as i128).collect())
        .collect();
    let b = intlin::rank(&bracket_rows);

    // Support of the derived span must match its rank for a saturated basis.
    let support: BTreeSet<usize> = lattice
        .brackets
        .values()
        .flat_map(|v| {
            v.iter()
                .enumerate()
                .filter(|(_, &c)| c != 0)
                .map(|(l, _)| l)
        })
        .collect();
    if support.len() != b {
        return Err(LatticeError::NonSaturatedBasis(format!(
            "derived span has rank {b} but coordinate support of size {}",
            support.len()
        )));
    }
    let f_basis: Vec<usize> = support.into_iter().collect();

    // Index of the derived lattice inside its isolator, for the bad-prime set.
    let mut bad_index_primes = BTreeSet::new();
    if b > 0 {
        let restricted: Vec<Vec<i128>> = bracket_rows
            .iter()
            .map(|row| f_basis.iter().map(|&l| row[l]).collect())
            .collect();
        let index = intlin::lattice_index(&restricted);
        for p in prime_divisors(index) {
            bad_index_primes.insert(p);
        }
    }

    // Centre: kernel of the adjoint map.  The coordinate-central basis vectors
    // must account for the full kernel rank.
    let adjoint: Vec<Vec<i128>> = (0..h)
        .map(|i| {
            let mut row = Vec::with_capacity(h * h);
            for j in 0..h {
                let v = lattice.bracket_basis(i, j);
                row.extend(v.iter().map(|&c| c as i128));
            }
            row
        })
        .collect();
    let z = h - intlin::rank(&adjoint);
    let central: Vec<usize> = (0..h)
        .filter(|&i| (0..h).all(|j| lattice.bracket_basis(i, j).iter().all(|&c| c == 0)))
        .collect();
    if central.len() != z {
        return Err(LatticeError::NonSaturatedBasis(format!(
            "centre has rank {z} but only {} central basis vectors",
            central.len()
        )));
    }
    let e_basis: Vec<usize> = (0..h).filter(|i| !central.contains(i)).collect();
    let a = e_basis.len();

    // Structure constants over the chosen bases.
    let mut lambda = vec![vec![vec![0i64; b]; a]; a];
    for (bi, &i) in e_basis.iter().enumerate() {
        for (bj, &j) in e_basis.iter().enumerate() {
            let v = lattice.bracket_basis(i, j);
            for (l, &amb) in f_basis.iter().enumerate() {
                lambda[bi][bj][l] = v[amb];
            }
            // anything outside the f-support would contradict the span check
            for (l, &c) in v.iter().enumerate() {
                if c != 0 && !f_basis.contains(&l) {
                    return Err(LatticeError::NonSaturatedBasis(format!(
                        "bracket [e{}, e{}] leaves the derived support",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
    }

    Ok(LatticeProfile {
        lattice: lattice.clone(),
        h,
        a,
        b,
        r: h - b,
        z,
        e_basis,
        f_basis,
        lambda,
        bad_index_primes: bad_index_primes.into_iter().collect(),
    })
}

fn prime_divisors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// A homogeneous linear form with integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinForm {
    pub coeffs: Vec<i64>,
}

impl LinForm {
    pub fn eval(&self, point: &[i64]) -> i64 {
        self.coeffs.iter().zip(point).map(|(&c, &x)| c * x).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
}

/// The A- and B-commutator matrices: A is a x b in variables X_1..X_a with
/// `A_ij = sum_k lambda_ik^j X_k`, B is a x a in Y_1..Y_b with
/// `B_ij = sum_k lambda_ij^k Y_k`.  `u_a` is the generic rank of A and the
/// generic rank of B is `2 u_b`.
#[derive(Debug, Clone)]
pub struct CommutatorMatrices {
    pub a_rows: usize,
    pub b_cols: usize,
    pub a_mat: Vec<Vec<LinForm>>,
    pub b_mat: Vec<Vec<LinForm>>,
    pub u_a: usize,
    pub u_b: usize,
}

pub fn commutator_matrices(profile: &LatticeProfile) -> CommutatorMatrices {
    let (a, b) = (profile.a, profile.b);
    let a_mat: Vec<Vec<LinForm>> = (0..a)
        .map(|i| {
            (0..b)
                .map(|j| LinForm {
                    coeffs: (0..a).map(|k| profile.lambda[i][k][j]).collect(),
                })
                .collect()
        })
        .collect();
    let b_mat: Vec<Vec<LinForm>> = (0..a)
        .map(|i| {
            (0..a)
                .map(|j| LinForm {
                    coeffs: (0..b).map(|k| profile.lambda[i][j][k]).collect(),
                })
                .collect()
        })
        .collect();

    let u_a = generic_rank(&a_mat, a);
    let rank_b = generic_rank(&b_mat, b);
    assert!(rank_b % 2 == 0, "generic rank of the antisymmetric B matrix must be even");
    CommutatorMatrices {
        a_rows: a,
        b_cols: b,
        a_mat,
        b_mat,
        u_a,
        u_b: rank_b / 2,
    }
}

/// Evaluates a matrix of linear forms at an integer point.
pub fn eval_matrix(m: &[Vec<LinForm>], point: &[i64]) -> Vec<Vec<i64>> {
    m.iter()
        .map(|row| row.iter().map(|f| f.eval(point)).collect())
        .collect()
}

/// Generic rank over the rational function field: the sweep over a fixed
/// deterministic point sequence gives a lower bound, the symbolic minor
/// certificate confirms it is the exact generic rank.
fn generic_rank(m: &[Vec<LinForm>], nvars: usize) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    if rows == 0 || cols == 0 || nvars == 0 {
        return 0;
    }
    let sweep_count = (1usize << rows.min(cols).min(10)) * 5;
    let mut swept = 0;
    for t in 0..sweep_count {
        let point = sweep_point(t, nvars);
        let eval = eval_matrix(m, &point);
        let eval128: Vec<Vec<i128>> = eval
            .iter()
            .map(|r| r.iter().map(|&x| x as i128).collect())
            .collect();
        swept = swept.max(intlin::rank(&eval128));
    }
    let symbolic = symbolic_rank(m, nvars);
    assert!(
        swept <= symbolic,
        "sweep rank exceeds symbolic generic rank"
    );
    symbolic
}

/// t-th point of the fixed low-discrepancy sweep: base-5 digits of t shifted
/// into {-2..2}.
fn sweep_point(t: usize, nvars: usize) -> Vec<i64> {
    let mut out = Vec::with_capacity(nvars);
    let mut rem = t;
    for _ in 0..nvars {
        out.push((rem % 5) as i64 - 2);
        rem /= 5;
    }
    out
}

/// Largest r such that some r x r minor is a nonzero polynomial.
fn symbolic_rank(m: &[Vec<LinForm>], nvars: usize) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let max = rows.min(cols);
    for r in (1..=max).rev() {
        for row_set in subsets(rows, r) {
            for col_set in subsets(cols, r) {
                if !minor_det(m, &row_set, &col_set, nvars).is_zero() {
                    return r;
                }
            }
        }
    }
    0
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(start: usize, n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            current.push(i);
            rec(i + 1, n, k, current, out);
            current.pop();
        }
    }
    rec(0, n, k, &mut current, &mut out);
    out
}

fn minor_det(m: &[Vec<LinForm>], rows: &[usize], cols: &[usize], nvars: usize) -> poly::MultiPoly {
    let forms: Vec<Vec<poly::MultiPoly>> = rows
        .iter()
        .map(|&i| {
            cols.iter()
                .map(|&j| poly::MultiPoly::from_linform(&m[i][j], nvars))
                .collect()
        })
        .collect();
    poly::det(&forms)
}

/// Sparse multivariate polynomials over Z, just enough for minor certificates.
mod poly {
    use std::collections::BTreeMap;

    #[derive(Debug, Clone, PartialEq, Eq)]
    pub struct MultiPoly {
        pub terms: BTreeMap<Vec<u16>, i128>,
        pub nvars: usize,
    }

    impl MultiPoly {
        pub fn zero(nvars: usize) -> MultiPoly {
            MultiPoly {
                terms: BTreeMap::new(),
                nvars,
            }
        }

        pub fn from_linform(f: &super::LinForm, nvars: usize) -> MultiPoly {
            let mut terms = BTreeMap::new();
            for (k, &c) in f.coeffs.iter().enumerate() {
                if c != 0 {
                    let mut exp = vec![0u16; nvars];
                    exp[k] = 1;
                    terms.insert(exp, c as i128);
                }
            }
            MultiPoly { terms, nvars }
        }

        pub fn is_zero(&self) -> bool {
            self.terms.is_empty()
        }

        pub fn add_assign(&mut self, other: &MultiPoly) {
            for (exp, &c) in &other.terms {
                let entry = self.terms.entry(exp.clone()).or_insert(0);
                *entry += c;
                if *entry == 0 {
                    self.terms.remove(exp);
                }
            }
        }

        pub fn sub_assign(&mut self, other: &MultiPoly) {
            for (exp, &c) in &other.terms {
                let entry = self.terms.entry(exp.clone()).or_insert(0);
                *entry -= c;
                if *entry == 0 {
                    self.terms.remove(exp);
                }
            }
        }

        pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
            let mut out = MultiPoly::zero(self.nvars);
            for (ea, &ca) in &self.terms {
                for (eb, &cb) in &other.terms {
                    let exp: Vec<u16> = ea.iter().zip(eb).map(|(&x, &y)| x + y).collect();
                    let entry = out.terms.entry(exp.clone()).or_insert(0);
                    *entry += ca * cb;
                    if *entry == 0 {
                        out.terms.remove(&exp);
                    }
                }
            }
            out
        }
    }

    /// Determinant by Laplace expansion along the first row.
    pub fn det(m: &[Vec<MultiPoly>]) -> MultiPoly {
        let n = m.len();
        let nvars = m[0][0].nvars;
        if n == 1 {
            return m[0][0].clone();
        }
        let mut acc = MultiPoly::zero(nvars);
        for j in 0..n {
            if m[0][j].is_zero() {
                continue;
            }
            let minor: Vec<Vec<MultiPoly>> = (1..n)
                .map(|i| {
                    (0..n)
                        .filter(|&c| c != j)
                        .map(|c| m[i][c].clone())
                        .collect()
                })
                .collect();
            let term = m[0][j].mul(&det(&minor));
            if j % 2 == 0 {
                acc.add_assign(&term);
            } else {
                acc.sub_assign(&term);
            }
        }
        acc
    }
}

/// Fraction-free integer linear algebra on small matrices.
pub(crate) mod intlin {
    /// Rank over Q via fraction-free Gaussian elimination.
    pub fn rank(rows: &[Vec<i128>]) -> usize {
        let mut m: Vec<Vec<i128>> = rows.to_vec();
        let nrows = m.len();
        if nrows == 0 {
            return 0;
        }
        let ncols = m[0].len();
        let mut rank = 0;
        let mut col = 0;
        while rank < nrows && col < ncols {
            let pivot = (rank..nrows).find(|&i| m[i][col] != 0);
            let Some(p) = pivot else {
                col += 1;
                continue;
            };
            m.swap(rank, p);
            for i in rank + 1..nrows {
                if m[i][col] == 0 {
                    continue;
                }
                let (a, b) = (m[rank][col], m[i][col]);
                let g = gcd(a.abs(), b.abs()).max(1);
                let (fa, fb) = (b / g, a / g);
                for c in col..ncols {
                    m[i][c] = m[i][c] * fb - m[rank][c] * fa;
                }
            }
            rank += 1;
            col += 1;
        }
        rank
    }

    /// A basis of the rational row space, as reduced integer rows.
    pub fn row_basis(rows: &[Vec<i128>]) -> Vec<Vec<i128>> {
        let mut m: Vec<Vec<i128>> = rows.to_vec();
        let nrows = m.len();
        if nrows == 0 {
            return Vec::new();
        }
        let ncols = m[0].len();
        let mut out = Vec::new();
        let mut row = 0;
        for col in 0..ncols {
            let pivot = (row..nrows).find(|&i| m[i][col] != 0);
            let Some(p) = pivot else { continue };
            m.swap(row, p);
            for i in row + 1..nrows {
                if m[i][col] == 0 {
                    continue;
                }
                let (a, b) = (m[row][col], m[i][col]);
                let g = gcd(a.abs(), b.abs()).max(1);
                let (fa, fb) = (b / g, a / g);
                for c in 0..ncols {
                    m[i][c] = m[i][c] * fb - m[row][c] * fa;
                }
            }
            let mut v = m[row].clone();
            let g = v.iter().fold(0i128, |acc, &x| gcd(acc, x.abs()));
            if g > 1 {
                for x in v.iter_mut() {
                    *x /= g;
                }
            }
            out.push(v);
            row += 1;
            if row == nrows {
                break;
            }
        }
        out
    }

    /// Index of the row lattice inside Z^cols; rows must have full column
    /// rank.  Computed as the product of Hermite normal form pivots.
    pub fn lattice_index(rows: &[Vec<i128>]) -> u64 {
        let mut m: Vec<Vec<i128>> = rows.to_vec();
        let ncols = m.first().map_or(0, |r| r.len());
        let mut index: i128 = 1;
        let mut top = 0;
        for col in 0..ncols {
            // Euclidean reduction in this column below `top`.
            loop {
                let mut nonzero: Vec<usize> =
                    (top..m.len()).filter(|&i| m[i][col] != 0).collect();
                if nonzero.is_empty() {
                    panic!("lattice_index requires full column rank");
                }
                nonzero.sort_by_key(|&i| m[i][col].abs());
                let pivot = nonzero[0];
                m.swap(top, pivot);
                let mut done = true;
                for i in top + 1..m.len() {
                    if m[i][col] != 0 {
                        let q = m[i][col] / m[top][col];
                        for c in 0..ncols {
                            m[i][c] -= q * m[top][c];
                        }
                        if m[i][col] != 0 {
                            done = false;
                        }
                    }
                }
                if done {
                    break;
                }
            }
            index *= m[top][col].abs();
            top += 1;
        }
        index as u64
    }

    pub fn gcd(a: i128, b: i128) -> i128 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
}

// ---------------------------------------------------------------------------
// JSON interchange: {name, rank, class, brackets:[{i, j, terms:[{l, coeff}]}]}
// with 1-based indices.
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct BracketTermJson {
    l: usize,
    coeff: i64,
}

#[derive(Serialize, Deserialize)]
struct BracketJson {
    i: usize,
    j: usize,
    terms: Vec<BracketTermJson>,
}

#[derive(Serialize, Deserialize)]
struct LatticeJson {
    name: String,
    rank: usize,
    class: u32,
    brackets: Vec<BracketJson>,
}

impl LieLattice {
    pub fn to_json(&self) -> serde_json::Value {
        let brackets = self
            .brackets
            .iter()
            .map(|(&(i, j), v)| BracketJson {
                i: i + 1,
                j: j + 1,
                terms: v
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c != 0)
                    .map(|(l, &coeff)| BracketTermJson { l: l + 1, coeff })
                    .collect(),
            })
            .collect::<Vec<_>>();
        serde_json::to_value(LatticeJson {
            name: self.name.clone(),
            rank: self.h,
            class: self.class_c,
            brackets,
        })
        .unwrap()
    }

    pub fn from_json(value: &serde_json::Value) -> Result<LieLattice, String> {
        let parsed: LatticeJson =
            serde_json::from_value(value.clone()).map_err(|e| e.to_string())?;
        let mut brackets = BTreeMap::new();
        for b in parsed.brackets {
            if b.i == 0 || b.j == 0 || b.i > parsed.rank || b.j > parsed.rank {
                return Err(format!("bracket index out of range: ({}, {})", b.i, b.j));
            }
            if b.i >= b.j {
                return Err(format!(
                    "brackets must be stored with i < j, got ({}, {})",
                    b.i, b.j
                ));
            }
            let mut v = vec![0i64; parsed.rank];
            for t in b.terms {
                if t.l == 0 || t.l > parsed.rank {
                    return Err(format!("bracket term index out of range: {}", t.l));
                }
                v[t.l - 1] = t.coeff;
            }
            brackets.insert((b.i - 1, b.j - 1), v);
        }
        Ok(LieLattice {
            name: parsed.name,
            h: parsed.rank,
            class_c: parsed.class,
            brackets,
        })
    }
}

// ---------------------------------------------------------------------------
// Corpus lattices used throughout the test and acceptance suites.
// ---------------------------------------------------------------------------

pub mod corpus {
    use super::LieLattice;

    /// Heisenberg: h = 3, [e1, e2] = e3, class 2.
    pub fn heisenberg() -> LieLattice {
        LieLattice::new(
            "heisenberg",
            3,
            2,
            &[((0, 1), vec![0, 0, 1])],
        )
    }

    /// Abelian Z^n, class 1.
    pub fn abelian(n: usize) -> LieLattice {
        LieLattice::new(&format!("abelian_z{n}"), n, 1, &[])
    }

    /// Heisenberg + Z: h = 4, [e1, e2] = e3, e4 central.
    pub fn heisenberg_plus_z() -> LieLattice {
        LieLattice::new(
            "heisenberg_plus_z",
            4,
            2,
            &[((0, 1), vec![0, 0, 1, 0])],
        )
    }

    /// Free class-2 on 3 generators: h = 6, e4 = [e1,e2], e5 = [e1,e3],
    /// e6 = [e2,e3].
    pub fn free_class2_rank3() -> LieLattice {
        LieLattice::new(
            "free_class2_rank3",
            6,
            2,
            &[
                ((0, 1), vec![0, 0, 0, 1, 0, 0]),
                ((0, 2), vec![0, 0, 0, 0, 1, 0]),
                ((1, 2), vec![0, 0, 0, 0, 0, 1]),
            ],
        )
    }

    /// Free class-3 on 2 generators: h = 5 with e3 = [e1,e2],
    /// e4 = [e1,e3], e5 = [e2,e3].
    pub fn free_class3_rank2() -> LieLattice {
        LieLattice::new(
            "free_class3_rank2",
            5,
            3,
            &[
                ((0, 1), vec![0, 0, 1, 0, 0]),
                ((0, 2), vec![0, 0, 0, 1, 0]),
                ((1, 2), vec![0, 0, 0, 0, 1]),
            ],
        )
    }

    pub fn all_class2() -> Vec<LieLattice> {
        vec![
            abelian(2),
            heisenberg(),
            heisenberg_plus_z(),
            free_class2_rank3(),
        ]
    }

    pub fn by_name(name: &str) -> Option<LieLattice> {
        match name {
            "heisenberg" => Some(heisenberg()),
            "abelian_z2" => Some(abelian(2)),
            "heisenberg_plus_z" => Some(heisenberg_plus_z()),
            "free_class2_rank3" => Some(free_class2_rank3()),
            "free_class3_rank2" => Some(free_class3_rank2()),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heisenberg_validates_class_2() {
        let l = corpus::heisenberg();
        let report = l.validate().unwrap();
        assert_eq!(report.class, 2);
    }

    #[test]
    fn abelian_validates_class_1() {
        let l = corpus::abelian(2);
        assert_eq!(l.validate().unwrap().class, 1);
    }

    #[test]
    fn broken_heisenberg_rejected() {
        // adding [e1, e3] = e2 to Heisenberg: Jacobi still holds on the only
        // triple (all three summands vanish by antisymmetry), but the lower
        // central series stabilizes at span{e2, e3}, so the bracket is not
        // nilpotent and validation must reject it.
        let l = LieLattice::new(
            "broken",
            3,
            2,
            &[((0, 1), vec![0, 0, 1]), ((0, 2), vec![0, 1, 0])],
        );
        assert_eq!(l.validate().unwrap_err(), LatticeError::NotNilpotent);
    }

    #[test]
    fn jacobi_violation_reported_with_witness() {
        // h = 4: [e1,e2] = e3, [e1,e3] = e4, [e2,e3] = 0 makes the Jacobi sum
        // on (e1, e2, e3) equal [e3,e3] + 0 + [-e4... check a genuinely broken
        // bracket: [e1,e2] = e3, [e3,e4] = e1 leaves Jacobi(1,3,4) = [[e1,e3],e4]
        // + [[e3,e4],e1] + [[e4,e1],e3] = 0 + [e1,e1]... use [e2,e4] = e2.
        let l = LieLattice::new(
            "jacobi_broken",
            4,
            2,
            &[((0, 1), vec![0, 0, 1, 0]), ((1, 3), vec![0, 1, 0, 0])],
        );
        // Jacobi(e1, e2, e4): [[e1,e2],e4] + [[e2,e4],e1] + [[e4,e1],e2]
        //   = [e3,e4] + [e2,e1] + 0 = 0 - e3 + 0 != 0.
        assert_eq!(l.validate().unwrap_err(), LatticeError::JacobiViolation(1, 2, 4));
    }

    #[test]
    fn class_mismatch_detected() {
        let mut l = corpus::heisenberg();
        l.class_c = 3;
        assert!(matches!(
            l.validate().unwrap_err(),
            LatticeError::ClassMismatch { declared: 3, computed: 2 }
        ));
    }

    #[test]
    fn heisenberg_profile() {
        let p = profile(&corpus::heisenberg()).unwrap();
        assert_eq!((p.h, p.a, p.b, p.r, p.z), (3, 2, 1, 2, 1));
        assert_eq!(p.e_basis, vec![0, 1]);
        assert_eq!(p.f_basis, vec![2]);
    }

    #[test]
    fn abelian_profile() {
        let p = profile(&corpus::abelian(2)).unwrap();
        assert_eq!((p.h, p.a, p.b, p.r, p.z), (2, 0, 0, 2, 2));
    }

    #[test]
    fn free_class2_profile() {
        let p = profile(&corpus::free_class2_rank3()).unwrap();
        assert_eq!((p.h, p.a, p.b, p.r, p.z), (6, 3, 3, 3, 3));
    }

    #[test]
    fn profile_rank_identities() {
        for l in corpus::all_class2() {
            let p = profile(&l).unwrap();
            assert_eq!(p.a + p.z, p.h);
            assert_eq!(p.b + p.r, p.h);
        }
    }

    #[test]
    fn heisenberg_commutator_matrices() {
        let p = profile(&corpus::heisenberg()).unwrap();
        let cm = commutator_matrices(&p);
        // A(X) = column (X2, -X1)
        assert_eq!(cm.a_mat[0][0].coeffs, vec![0, 1]);
        assert_eq!(cm.a_mat[1][0].coeffs, vec![-1, 0]);
        // B(Y) = [[0, Y1], [-Y1, 0]]
        assert_eq!(cm.b_mat[0][1].coeffs, vec![1]);
        assert_eq!(cm.b_mat[1][0].coeffs, vec![-1]);
        assert!(cm.b_mat[0][0].is_zero());
        assert_eq!((cm.u_a, cm.u_b), (1, 1));
    }

    #[test]
    fn abelian_commutator_matrices_empty() {
        let p = profile(&corpus::abelian(2)).unwrap();
        let cm = commutator_matrices(&p);
        assert_eq!((cm.u_a, cm.u_b), (0, 0));
        assert!(cm.a_mat.is_empty());
        assert!(cm.b_mat.is_empty());
    }

    #[test]
    fn free_class2_b_matrix() {
        let p = profile(&corpus::free_class2_rank3()).unwrap();
        let cm = commutator_matrices(&p);
        // 3x3 antisymmetric with +-Y1, +-Y2, +-Y3 off-diagonal; u_B = 1.
        assert_eq!(cm.b_mat[0][1].coeffs, vec![1, 0, 0]);
        assert_eq!(cm.b_mat[0][2].coeffs, vec![0, 1, 0]);
        assert_eq!(cm.b_mat[1][2].coeffs, vec![0, 0, 1]);
        assert_eq!(cm.u_b, 1);
        assert_eq!(cm.u_a, 2);
    }

    #[test]
    fn b_antisymmetric_and_even_rank_random() {
        let mut seed = 7u64;
        for l in corpus::all_class2() {
            let p = profile(&l).unwrap();
            let cm = commutator_matrices(&p);
            for _ in 0..100 {
                let y: Vec<i64> = (0..p.b)
                    .map(|_| {
                        seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
                        ((seed >> 33) % 41) as i64 - 20
                    })
                    .collect();
                let by = eval_matrix(&cm.b_mat, &y);
                for i in 0..p.a {
                    for j in 0..p.a {
                        assert_eq!(by[i][j], -by[j][i]);
                    }
                }
                let rows: Vec<Vec<i128>> = by
                    .iter()
                    .map(|r| r.iter().map(|&x| x as i128).collect())
                    .collect();
                assert_eq!(intlin::rank(&rows) % 2, 0);
            }
        }
    }

    #[test]
    fn evaluation_homomorphism() {
        // symbolic-then-evaluate equals entrywise evaluation by construction;
        // exercise it against a direct bracket computation.
        let p = profile(&corpus::heisenberg()).unwrap();
        let cm = commutator_matrices(&p);
        for x1 in -2..3i64 {
            for x2 in -2..3i64 {
                let a = eval_matrix(&cm.a_mat, &[x1, x2]);
                // row i of A(x) is [e_i, x] in f-coordinates
                assert_eq!(a[0][0], x2);
                assert_eq!(a[1][0], -x1);
            }
        }
    }

    #[test]
    fn lattice_json_round_trip_bit_exact() {
        for l in corpus::all_class2() {
            let json = l.to_json();
            let text = serde_json::to_string(&json).unwrap();
            let back = LieLattice::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
            assert_eq!(back, l);
            assert_eq!(serde_json::to_string(&back.to_json()).unwrap(), text);
        }
    }

    #[test]
    fn derived_index_primes_recorded() {
        // [e1, e2] = 2 e3: isolator index 2, recorded not refused.
        let l = LieLattice::new("doubled", 3, 2, &[((0, 1), vec![0, 0, 2])]);
        let p = profile(&l).unwrap();
        assert_eq!(p.bad_index_primes, vec![2]);
    }
}
