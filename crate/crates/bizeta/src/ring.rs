//! Exact arithmetic in the finite local rings `GR(p^N, f)`, the unramified
//! degree-`f` extensions of `Z/p^N`, together with Smith normal form and
//! elementary divisor types of matrices over them.
//!
//! Elements are polynomials of degree `< f` over `Z/p^N`, reduced modulo a
//! fixed monic polynomial that is irreducible mod `p`.  The maximal ideal is
//! `(p)` and every element has a valuation in `{0..N}`, with `val(0) = N`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RingError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("invalid ring parameters: {0}")]
    BadParameters(String),
    #[error("element is not a unit (valuation {0} > 0)")]
    NotAUnit(u32),
}

/// Descriptor of the Galois ring `GR(p^N, f)`.
///
/// Immutable after construction; cheap to clone and safe to share.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaloisRing {
    p: u64,
    level: u32,
    f: u32,
    /// p^N, the coefficient modulus.
    pn: u64,
    /// Non-leading coefficients of the monic modulus, low to high (length f).
    modulus: Vec<u64>,
}

/// An element of a Galois ring: coefficient vector of length `f`, low to high,
/// each coefficient in `[0, p^N)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Elem(pub Vec<u64>);

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn pow_u64(base: u64, exp: u32) -> u64 {
    base.checked_pow(exp).expect("ring size overflows u64")
}

impl GaloisRing {
    /// Builds `GR(p^N, f)` with the deterministic modulus choice: the first
    /// monic polynomial, in ascending order of its coefficient vector read as
    /// a base-`p` integer (low coefficient least significant), that is
    /// irreducible mod `p`.
    pub fn make(p: u64, level: u32, f: u32) -> Result<GaloisRing, RingError> {
        if !is_prime(p) {
            return Err(RingError::NotPrime(p));
        }
        if level < 1 || f < 1 {
            return Err(RingError::BadParameters(format!(
                "need N >= 1 and f >= 1, got N={level}, f={f}"
            )));
        }
        let pn = pow_u64(p, level);
        pow_u64(pn, f); // size must fit in u64
        let modulus = if f == 1 {
            vec![0]
        } else {
            first_irreducible(p, f)
                .ok_or_else(|| RingError::BadParameters(format!("no irreducible of degree {f} mod {p}")))?
                .iter()
                .map(|&c| c % pn)
                .collect()
        };
        Ok(GaloisRing { p, level, f, pn, modulus })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// The level N of the ring o/p^N.
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn inertia_degree(&self) -> u32 {
        self.f
    }

    /// Residue field size q = p^f.
    pub fn residue_size(&self) -> u64 {
        pow_u64(self.p, self.f)
    }

    /// Total ring size p^{Nf}.
    pub fn size(&self) -> u64 {
        pow_u64(self.pn, self.f)
    }

    pub fn unit_count(&self) -> u64 {
        self.size() - self.size() / self.residue_size()
    }

    pub fn zero(&self) -> Elem {
        Elem(vec![0; self.f as usize])
    }

    pub fn one(&self) -> Elem {
        self.from_int(1)
    }

    pub fn from_int(&self, n: i64) -> Elem {
        let mut e = self.zero();
        e.0[0] = n.rem_euclid(self.pn as i64) as u64;
        e
    }

    /// The generator t of the ring over Z/p^N (for f = 1 this is just 1).
    pub fn gen(&self) -> Elem {
        let mut e = self.zero();
        if self.f > 1 {
            e.0[1] = 1;
        } else {
            e.0[0] = 1;
        }
        e
    }

    pub fn from_coeffs(&self, coeffs: &[i64]) -> Elem {
        let mut e = self.zero();
        for (i, &c) in coeffs.iter().enumerate().take(self.f as usize) {
            e.0[i] = c.rem_euclid(self.pn as i64) as u64;
        }
        e
    }

    pub fn is_zero(&self, a: &Elem) -> bool {
        a.0.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &Elem, b: &Elem) -> Elem {
        Elem(
            a.0.iter()
                .zip(&b.0)
                .map(|(&x, &y)| (x + y) % self.pn)
                .collect(),
        )
    }

    pub fn sub(&self, a: &Elem, b: &Elem) -> Elem {
        Elem(
            a.0.iter()
                .zip(&b.0)
                .map(|(&x, &y)| (x + self.pn - y) % self.pn)
                .collect(),
        )
    }

    pub fn neg(&self, a: &Elem) -> Elem {
        Elem(a.0.iter().map(|&x| (self.pn - x) % self.pn).collect())
    }

    pub fn scalar_mul(&self, k: u64, a: &Elem) -> Elem {
        let k = k % self.pn;
        Elem(a.0.iter().map(|&x| x * k % self.pn).collect())
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        let f = self.f as usize;
        if f == 1 {
            return Elem(vec![a.0[0] * b.0[0] % self.pn]);
        }
        // Schoolbook product, then reduction by the monic modulus.
        let mut prod = vec![0u64; 2 * f - 1];
        for i in 0..f {
            if a.0[i] == 0 {
                continue;
            }
            for j in 0..f {
                prod[i + j] = (prod[i + j] + a.0[i] * b.0[j]) % self.pn;
            }
        }
        for k in (f..2 * f - 1).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            prod[k] = 0;
            // t^f = -modulus[0..f] (low coefficients), so t^k folds down.
            for (i, &m) in self.modulus.iter().enumerate() {
                let sub = c * m % self.pn;
                let idx = k - f + i;
                prod[idx] = (prod[idx] + self.pn - sub) % self.pn;
            }
        }
        prod.truncate(f);
        Elem(prod)
    }

    /// Largest k with x in (p^k); val(0) = N by convention.
    pub fn val(&self, a: &Elem) -> u32 {
        let mut best = self.level;
        for &c in &a.0 {
            if c == 0 {
                continue;
            }
            let mut v = 0;
            let mut c = c;
            while c % self.p == 0 {
                c /= self.p;
                v += 1;
            }
            best = best.min(v);
        }
        best
    }

    pub fn is_unit(&self, a: &Elem) -> bool {
        self.val(a) == 0
    }

    /// Exact division by p^k (requires val(a) >= k).
    pub fn shift_down(&self, a: &Elem, k: u32) -> Elem {
        let pk = pow_u64(self.p, k);
        Elem(
            a.0.iter()
                .map(|&c| {
                    debug_assert!(c % pk == 0, "shift_down on element of valuation < {k}");
                    c / pk
                })
                .collect(),
        )
    }

    /// Inverse of a unit: field inverse mod p, lifted to p^N by Newton steps.
    pub fn inv(&self, a: &Elem) -> Result<Elem, RingError> {
        let v = self.val(a);
        if v > 0 {
            return Err(RingError::NotAUnit(v));
        }
        let mut x = self.field_inverse(a);
        // x is an inverse mod p; each step doubles the precision.
        let mut prec = 1u32;
        while prec < self.level {
            let two = self.from_int(2);
            let ax = self.mul(a, &x);
            x = self.mul(&x, &self.sub(&two, &ax));
            prec *= 2;
        }
        debug_assert_eq!(self.mul(a, &x), self.one());
        Ok(x)
    }

    /// Inverse of the mod-p reduction, computed in F_p[t]/(modulus mod p).
    fn field_inverse(&self, a: &Elem) -> Elem {
        let p = self.p;
        let f = self.f as usize;
        if f == 1 {
            let r = a.0[0] % p;
            let inv = mod_inverse(r, p);
            return self.from_int(inv as i64);
        }
        // Extended Euclid in F_p[t] against the modulus.
        let mut modp: Vec<u64> = self.modulus.iter().map(|&c| c % p).collect();
        modp.push(1);
        let apoly: Vec<u64> = a.0.iter().map(|&c| c % p).collect();
        let inv = poly_inverse_mod(&apoly, &modp, p);
        self.from_coeffs(&inv.iter().map(|&c| c as i64).collect::<Vec<_>>())
    }

    pub fn elem_index(&self, a: &Elem) -> u64 {
        let mut idx = 0;
        for &c in a.0.iter().rev() {
            idx = idx * self.pn + c;
        }
        idx
    }

    pub fn elem_from_index(&self, mut idx: u64) -> Elem {
        let mut e = self.zero();
        for c in e.0.iter_mut() {
            *c = idx % self.pn;
            idx /= self.pn;
        }
        e
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> + '_ {
        (0..self.size()).map(move |i| self.elem_from_index(i))
    }

    pub fn descriptor(&self) -> RingDescriptor {
        RingDescriptor {
            p: self.p,
            n: self.level,
            f: self.f,
        }
    }
}

/// Serializable (p, N, f) triple used in matrix and series JSON schemas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingDescriptor {
    pub p: u64,
    #[serde(rename = "N")]
    pub n: u32,
    pub f: u32,
}

impl RingDescriptor {
    pub fn build(&self) -> Result<GaloisRing, RingError> {
        GaloisRing::make(self.p, self.n, self.f)
    }
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    // Fermat; p is prime and a nonzero mod p.
    let mut result = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    result
}

// --- dense polynomial helpers over F_p, used only for modulus selection and
// --- field inversion; degrees here are tiny.

/// Inverse of `a` in F_p[t]/(m) via extended Euclid; `a` must be a unit.
fn poly_inverse_mod(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    // Maintain r = s * a mod m through the Euclidean remainder sequence.
    let mut r0: Vec<u64> = m.to_vec();
    let mut r1: Vec<u64> = poly_rem(a, m, p);
    let mut s0: Vec<u64> = vec![0];
    let mut s1: Vec<u64> = vec![1];
    poly_trim(&mut r1);
    while !(r1.len() == 1 && r1[0] == 0) {
        let (q, r) = poly_divmod(&r0, &r1, p);
        let qs1 = poly_mul(&q, &s1, p);
        let s = poly_sub(&s0, &qs1, p);
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s;
    }
    // r0 is a nonzero constant gcd; normalize.
    assert_eq!(r0.len(), 1, "element is not invertible mod p");
    let c_inv = mod_inverse(r0[0], p);
    let scaled: Vec<u64> = s0.iter().map(|&c| c * c_inv % p).collect();
    poly_rem(&scaled, m, p)
}

fn poly_divmod(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
    let mut r: Vec<u64> = a.iter().map(|&c| c % p).collect();
    poly_trim(&mut r);
    let mut b = b.to_vec();
    poly_trim(&mut b);
    let db = b.len() - 1;
    if r.len() < b.len() || (r.len() == 1 && r[0] == 0) {
        return (vec![0], r);
    }
    let mut q = vec![0u64; r.len() - db];
    let lead_inv = mod_inverse(b[db], p);
    while r.len() >= b.len() && !(r.len() == 1 && r[0] == 0) {
        let dr = r.len() - 1;
        let c = r[dr] * lead_inv % p;
        q[dr - db] = c;
        for i in 0..=db {
            let idx = dr - db + i;
            r[idx] = (r[idx] + p - c * b[i] % p) % p;
        }
        // leading term cancels by construction
        r.pop();
        poly_trim(&mut r);
        if r.is_empty() {
            r = vec![0];
        }
    }
    poly_trim(&mut q);
    (q, r)
}

fn poly_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    poly_trim(&mut prod);
    prod
}

fn poly_sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut out = vec![0u64; n];
    for i in 0..n {
        let x = a.get(i).copied().unwrap_or(0) % p;
        let y = b.get(i).copied().unwrap_or(0) % p;
        out[i] = (x + p - y) % p;
    }
    poly_trim(&mut out);
    out
}

fn poly_trim(a: &mut Vec<u64>) {
    while a.len() > 1 && *a.last().unwrap() == 0 {
        a.pop();
    }
}

fn poly_rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut r: Vec<u64> = a.iter().map(|&c| c % p).collect();
    poly_trim(&mut r);
    let dm = m.len() - 1;
    let lead_inv = mod_inverse(m[dm], p);
    while r.len() > dm {
        let dr = r.len() - 1;
        let c = r[dr] * lead_inv % p;
        for i in 0..=dm {
            let idx = dr - dm + i;
            r[idx] = (r[idx] + p - c * m[i] % p) % p;
        }
        poly_trim(&mut r);
        if r.iter().all(|&x| x == 0) {
            return vec![0];
        }
    }
    r
}

fn poly_mul_mod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    poly_rem(&prod, m, p)
}

fn poly_pow_mod(base: &[u64], mut e: u64, m: &[u64], p: u64) -> Vec<u64> {
    let mut result = vec![1u64];
    let mut b = base.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            result = poly_mul_mod(&result, &b, m, p);
        }
        b = poly_mul_mod(&b, &b, m, p);
        e >>= 1;
    }
    result
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    poly_trim(&mut a);
    poly_trim(&mut b);
    while !(b.len() == 1 && b[0] == 0) {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

fn poly_is_zero(a: &[u64]) -> bool {
    a.iter().all(|&c| c == 0)
}

/// Irreducibility over F_p via the Rabin test: t^{p^f} = t mod (m) and
/// gcd(t^{p^{f/l}} - t, m) = 1 for each prime divisor l of f.
fn is_irreducible(m: &[u64], p: u64, f: u32) -> bool {
    let t = vec![0u64, 1];
    let tq = poly_pow_mod(&t, pow_u64(p, f), m, p);
    let mut diff = tq.clone();
    if diff.len() < 2 {
        diff.resize(2, 0);
    }
    diff[1] = (diff[1] + p - 1) % p;
    if !poly_is_zero(&poly_rem(&diff, m, p)) {
        return false;
    }
    let mut l = 2;
    let mut rest = f;
    let mut prime_divisors = Vec::new();
    while l <= rest {
        if rest % l == 0 {
            prime_divisors.push(l);
            while rest % l == 0 {
                rest /= l;
            }
        }
        l += 1;
    }
    for l in prime_divisors {
        let td = poly_pow_mod(&t, pow_u64(p, f / l), m, p);
        let mut diff = td;
        if diff.len() < 2 {
            diff.resize(2, 0);
        }
        diff[1] = (diff[1] + p - 1) % p;
        if poly_gcd(&diff, m, p).len() > 1 {
            return false;
        }
    }
    true
}

/// First monic irreducible of degree f mod p, low coefficients enumerated as a
/// base-p counter.  Returns the non-leading coefficients (length f).
fn first_irreducible(p: u64, f: u32) -> Option<Vec<u64>> {
    let count = pow_u64(p, f);
    for n in 0..count {
        let mut coeffs = Vec::with_capacity(f as usize + 1);
        let mut n = n;
        for _ in 0..f {
            coeffs.push(n % p);
            n /= p;
        }
        coeffs.push(1);
        if is_irreducible(&coeffs, p, f) {
            coeffs.pop();
            return Some(coeffs);
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Matrices and Smith normal form
// ---------------------------------------------------------------------------

/// A dense matrix over a Galois ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingMatrix {
    pub ring: GaloisRing,
    pub rows: usize,
    pub cols: usize,
    entries: Vec<Elem>,
}

impl RingMatrix {
    pub fn zero(ring: &GaloisRing, rows: usize, cols: usize) -> RingMatrix {
        RingMatrix {
            ring: ring.clone(),
            rows,
            cols,
            entries: vec![ring.zero(); rows * cols],
        }
    }

    pub fn identity(ring: &GaloisRing, n: usize) -> RingMatrix {
        let mut m = RingMatrix::zero(ring, n, n);
        for i in 0..n {
            *m.at_mut(i, i) = ring.one();
        }
        m
    }

    pub fn from_fn(
        ring: &GaloisRing,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Elem,
    ) -> RingMatrix {
        let mut m = RingMatrix::zero(ring, rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                *m.at_mut(i, j) = f(i, j);
            }
        }
        m
    }

    pub fn at(&self, i: usize, j: usize) -> &Elem {
        &self.entries[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut Elem {
        &mut self.entries[i * self.cols + j]
    }

    pub fn matmul(&self, other: &RingMatrix) -> RingMatrix {
        assert_eq!(self.cols, other.rows);
        let ring = &self.ring;
        RingMatrix::from_fn(ring, self.rows, other.cols, |i, j| {
            let mut acc = ring.zero();
            for k in 0..self.cols {
                acc = ring.add(&acc, &ring.mul(self.at(i, k), other.at(k, j)));
            }
            acc
        })
    }

    /// M . x for a column vector x of length `cols`.
    pub fn mul_vec(&self, x: &[Elem]) -> Vec<Elem> {
        assert_eq!(x.len(), self.cols);
        let ring = &self.ring;
        (0..self.rows)
            .map(|i| {
                let mut acc = ring.zero();
                for j in 0..self.cols {
                    acc = ring.add(&acc, &ring.mul(self.at(i, j), &x[j]));
                }
                acc
            })
            .collect()
    }

    pub fn transpose(&self) -> RingMatrix {
        RingMatrix::from_fn(&self.ring, self.cols, self.rows, |i, j| self.at(j, i).clone())
    }

    /// Laplace expansion; only used on small matrices (certificates, tests).
    pub fn det(&self) -> Elem {
        assert_eq!(self.rows, self.cols);
        let ring = &self.ring;
        match self.rows {
            0 => ring.one(),
            1 => self.at(0, 0).clone(),
            n => {
                let mut acc = ring.zero();
                for j in 0..n {
                    if ring.is_zero(self.at(0, j)) {
                        continue;
                    }
                    let minor = RingMatrix::from_fn(ring, n - 1, n - 1, |r, c| {
                        self.at(r + 1, if c < j { c } else { c + 1 }).clone()
                    });
                    let term = ring.mul(self.at(0, j), &minor.det());
                    acc = if j % 2 == 0 {
                        ring.add(&acc, &term)
                    } else {
                        ring.sub(&acc, &term)
                    };
                }
                acc
            }
        }
    }
}

/// Multiset of elementary divisor valuations, one slot per column of the
/// source matrix, sorted ascending and saturating at the ring level N.
/// Columns beyond the diagonal (and zero diagonal entries) sit at N.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ElementaryDivisorType {
    pub vals: Vec<u32>,
}

impl ElementaryDivisorType {
    /// Number of slots at the ceiling N, i.e. divisors indistinguishable from 0.
    pub fn rank_deficiency(&self, level: u32) -> usize {
        self.vals.iter().filter(|&&v| v == level).count()
    }

    /// |image of M: R^cols -> R^rows| = q^{sum_k (N - m_k)}.
    pub fn image_size(&self, ring: &GaloisRing) -> u64 {
        let exp: u32 = self.vals.iter().map(|&v| ring.level() - v).sum();
        pow_u64(ring.residue_size(), exp)
    }
}

/// Smith normal form together with its transform certificate:
/// `u * m * v` reproduces the diagonal matrix exactly.
#[derive(Debug, Clone)]
pub struct SnfResult {
    pub divisors: ElementaryDivisorType,
    pub diagonal: RingMatrix,
    pub u: RingMatrix,
    pub v: RingMatrix,
}

/// Smith normal form over GR(p^N, f).  Pivoting rule: minimal-valuation entry,
/// ties broken in row-major order.
pub fn smith_normal_form(m: &RingMatrix) -> SnfResult {
    let ring = m.ring.clone();
    let level = ring.level();
    let mut work = m.clone();
    let mut u = RingMatrix::identity(&ring, m.rows);
    let mut v = RingMatrix::identity(&ring, m.cols);
    let steps = m.rows.min(m.cols);
    let mut vals = Vec::new();

    for t in 0..steps {
        // Minimal-valuation pivot in the remaining submatrix.
        let mut best: Option<(u32, usize, usize)> = None;
        for i in t..m.rows {
            for j in t..m.cols {
                let val = ring.val(work.at(i, j));
                if best.map_or(true, |(bv, _, _)| val < bv) {
                    best = Some((val, i, j));
                }
            }
        }
        let (pv, pi, pj) = best.unwrap();
        if pv == level {
            break; // all remaining entries are zero
        }
        swap_rows(&mut work, t, pi);
        swap_rows(&mut u, t, pi);
        swap_cols(&mut work, t, pj);
        swap_cols(&mut v, t, pj);

        // Normalize the pivot to exactly p^pv.
        let unit = ring.shift_down(work.at(t, t), pv);
        let unit_inv = ring.inv(&unit).expect("pivot cofactor is a unit");
        scale_row(&mut work, t, &unit_inv, &ring);
        scale_row(&mut u, t, &unit_inv, &ring);

        for i in t + 1..m.rows {
            if ring.is_zero(work.at(i, t)) {
                continue;
            }
            let w = ring.shift_down(work.at(i, t), pv);
            sub_scaled_row(&mut work, i, t, &w, &ring);
            sub_scaled_row(&mut u, i, t, &w, &ring);
        }
        for j in t + 1..m.cols {
            if ring.is_zero(work.at(t, j)) {
                continue;
            }
            let w = ring.shift_down(work.at(t, j), pv);
            sub_scaled_col(&mut work, j, t, &w, &ring);
            sub_scaled_col(&mut v, j, t, &w, &ring);
        }
        vals.push(pv);
    }

    vals.resize(m.cols, level);
    vals.sort_unstable();
    let mut diagonal = RingMatrix::zero(&ring, m.rows, m.cols);
    for t in 0..steps {
        *diagonal.at_mut(t, t) = work.at(t, t).clone();
    }
    SnfResult {
        divisors: ElementaryDivisorType { vals },
        diagonal,
        u,
        v,
    }
}

fn swap_rows(m: &mut RingMatrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    for j in 0..m.cols {
        let x = m.at(a, j).clone();
        *m.at_mut(a, j) = m.at(b, j).clone();
        *m.at_mut(b, j) = x;
    }
}

fn swap_cols(m: &mut RingMatrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    for i in 0..m.rows {
        let x = m.at(i, a).clone();
        *m.at_mut(i, a) = m.at(i, b).clone();
        *m.at_mut(i, b) = x;
    }
}

fn scale_row(m: &mut RingMatrix, r: usize, k: &Elem, ring: &GaloisRing) {
    for j in 0..m.cols {
        *m.at_mut(r, j) = ring.mul(m.at(r, j), k);
    }
}

/// row_i -= w * p^v-normalized pivot row: here simply row_i -= w * row_t.
fn sub_scaled_row(m: &mut RingMatrix, i: usize, t: usize, w: &Elem, ring: &GaloisRing) {
    for j in 0..m.cols {
        let delta = ring.mul(w, m.at(t, j));
        *m.at_mut(i, j) = ring.sub(m.at(i, j), &delta);
    }
}

fn sub_scaled_col(m: &mut RingMatrix, j: usize, t: usize, w: &Elem, ring: &GaloisRing) {
    for i in 0..m.rows {
        let delta = ring.mul(w, m.at(i, t));
        *m.at_mut(i, j) = ring.sub(m.at(i, j), &delta);
    }
}

// --- JSON schema {ring:{p,N,f}, entries:[[...]]} -------------------------

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    ring: RingDescriptor,
    entries: Vec<Vec<serde_json::Value>>,
}

impl RingMatrix {
    pub fn to_json(&self) -> serde_json::Value {
        let entries = (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| {
                        let e = self.at(i, j);
                        if self.ring.inertia_degree() == 1 {
                            serde_json::json!(e.0[0])
                        } else {
                            serde_json::json!(e.0)
                        }
                    })
                    .collect()
            })
            .collect::<Vec<Vec<_>>>();
        serde_json::json!({ "ring": self.ring.descriptor(), "entries": entries })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<RingMatrix, String> {
        let parsed: MatrixJson =
            serde_json::from_value(value.clone()).map_err(|e| e.to_string())?;
        let ring = parsed.ring.build().map_err(|e| e.to_string())?;
        let rows = parsed.entries.len();
        let cols = parsed.entries.first().map_or(0, |r| r.len());
        let mut m = RingMatrix::zero(&ring, rows, cols);
        for (i, row) in parsed.entries.iter().enumerate() {
            if row.len() != cols {
                return Err("ragged matrix".into());
            }
            for (j, cell) in row.iter().enumerate() {
                let elem = match cell {
                    serde_json::Value::Number(n) => {
                        ring.from_int(n.as_i64().ok_or("non-integer entry")?)
                    }
                    serde_json::Value::Array(arr) => {
                        let coeffs: Vec<i64> = arr
                            .iter()
                            .map(|v| v.as_i64().ok_or("non-integer coefficient"))
                            .collect::<Result<_, _>>()?;
                        ring.from_coeffs(&coeffs)
                    }
                    _ => return Err("matrix entry must be integer or coefficient array".into()),
                };
                *m.at_mut(i, j) = elem;
            }
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_prime_fields() {
        let r = GaloisRing::make(3, 1, 1).unwrap();
        assert_eq!(r.size(), 3);
        assert_eq!(r.residue_size(), 3);
        let r = GaloisRing::make(3, 2, 1).unwrap();
        assert_eq!(r.size(), 9);
        assert_eq!(r.unit_count(), 6);
    }

    #[test]
    fn not_prime_rejected() {
        assert_eq!(GaloisRing::make(4, 1, 1).unwrap_err(), RingError::NotPrime(4));
    }

    #[test]
    fn f9_modulus_is_t2_plus_1() {
        // t^2 + 1 is the first irreducible mod 3; t*t = -1 = 2.
        let r = GaloisRing::make(3, 1, 2).unwrap();
        let t = r.gen();
        assert_eq!(r.mul(&t, &t), r.from_int(2));
        assert_eq!(r.size(), 9);
    }

    #[test]
    fn valuations() {
        let r = GaloisRing::make(3, 3, 1).unwrap();
        assert_eq!(r.val(&r.from_int(6)), 1);
        assert_eq!(r.val(&r.zero()), 3);
        let gr = GaloisRing::make(3, 2, 2).unwrap();
        let three_t = gr.scalar_mul(3, &gr.gen());
        assert_eq!(gr.val(&three_t), 1);
    }

    #[test]
    fn unit_inverse_round_trip() {
        for (p, n, f) in [(3, 2, 1), (5, 2, 1), (3, 2, 2), (7, 1, 2)] {
            let r = GaloisRing::make(p, n, f).unwrap();
            for e in r.elements() {
                if r.is_unit(&e) {
                    let inv = r.inv(&e).unwrap();
                    assert_eq!(r.mul(&e, &inv), r.one());
                }
            }
        }
    }

    #[test]
    fn snf_examples_from_contract() {
        // [[p,0],[0,1]] over Z/p^2 -> type (0,1)
        let r = GaloisRing::make(3, 2, 1).unwrap();
        let m = RingMatrix::from_fn(&r, 2, 2, |i, j| match (i, j) {
            (0, 0) => r.from_int(3),
            (1, 1) => r.from_int(1),
            _ => r.zero(),
        });
        let snf = smith_normal_form(&m);
        assert_eq!(snf.divisors.vals, vec![0, 1]);

        // [[0,3],[-3,0]] over Z/27 -> type (1,1)
        let r = GaloisRing::make(3, 3, 1).unwrap();
        let m = RingMatrix::from_fn(&r, 2, 2, |i, j| match (i, j) {
            (0, 1) => r.from_int(3),
            (1, 0) => r.from_int(-3),
            _ => r.zero(),
        });
        let snf = smith_normal_form(&m);
        assert_eq!(snf.divisors.vals, vec![1, 1]);
        let umv = snf.u.matmul(&m).matmul(&snf.v);
        assert_eq!(umv, snf.diagonal);

        // zero matrix with two columns over Z/9 -> all divisors at ceiling N
        let r = GaloisRing::make(3, 2, 1).unwrap();
        let m = RingMatrix::zero(&r, 1, 2);
        let snf = smith_normal_form(&m);
        assert_eq!(snf.divisors.vals, vec![2, 2]);
    }

    fn lcg_elems(r: &GaloisRing, seed: &mut u64, count: usize) -> Vec<Elem> {
        (0..count)
            .map(|_| {
                *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                r.elem_from_index((*seed >> 16) % r.size())
            })
            .collect()
    }

    #[test]
    fn snf_certificate_random_matrices() {
        let mut seed = 0x5eed;
        for (p, n, f) in [(3u64, 1u32, 1u32), (3, 2, 1), (5, 2, 1), (3, 1, 2), (3, 2, 2)] {
            let r = GaloisRing::make(p, n, f).unwrap();
            for trial in 0..500 {
                let rows = 1 + trial % 4;
                let cols = 1 + (trial / 4) % 4;
                let entries = lcg_elems(&r, &mut seed, rows * cols);
                let mut k = 0;
                let m = RingMatrix::from_fn(&r, rows, cols, |_, _| {
                    let e = entries[k].clone();
                    k += 1;
                    e
                });
                let snf = smith_normal_form(&m);
                assert_eq!(snf.u.matmul(&m).matmul(&snf.v), snf.diagonal);
                assert!(r.is_unit(&snf.u.det()), "det(U) must be a unit");
                assert!(r.is_unit(&snf.v.det()), "det(V) must be a unit");
                // diagonal is p^{m_k} with sorted valuations
                let mut diag_vals: Vec<u32> = (0..rows.min(cols))
                    .map(|t| r.val(snf.diagonal.at(t, t)))
                    .collect();
                diag_vals.resize(cols, r.level());
                diag_vals.sort_unstable();
                assert_eq!(diag_vals, snf.divisors.vals);
            }
        }
    }

    #[test]
    fn image_size_law_by_enumeration() {
        // |image| = q^{sum (N - m_k)}, cross-checked by direct enumeration
        // for rings with at most 81 elements.
        let mut seed = 0xab1e;
        for (p, n, f) in [(3u64, 1u32, 1u32), (3, 2, 1), (2, 2, 1), (3, 1, 2), (2, 3, 1)] {
            let r = GaloisRing::make(p, n, f).unwrap();
            assert!(r.size() <= 81);
            for trial in 0..20 {
                let rows = 1 + trial % 3;
                let cols = 1 + (trial / 3) % 2;
                let entries = lcg_elems(&r, &mut seed, rows * cols);
                let mut k = 0;
                let m = RingMatrix::from_fn(&r, rows, cols, |_, _| {
                    let e = entries[k].clone();
                    k += 1;
                    e
                });
                let snf = smith_normal_form(&m);
                let mut image = std::collections::HashSet::new();
                let total = pow_u64(r.size(), cols as u32);
                for idx in 0..total {
                    let mut x = Vec::with_capacity(cols);
                    let mut rem = idx;
                    for _ in 0..cols {
                        x.push(r.elem_from_index(rem % r.size()));
                        rem /= r.size();
                    }
                    image.insert(m.mul_vec(&x));
                }
                assert_eq!(image.len() as u64, snf.divisors.image_size(&r));
            }
        }
    }

    #[test]
    fn snf_invariant_under_unimodular_multiplication() {
        let r = GaloisRing::make(3, 2, 1).unwrap();
        let mut seed = 0xfeed;
        let base_entries = lcg_elems(&r, &mut seed, 9);
        let mut k = 0;
        let m = RingMatrix::from_fn(&r, 3, 3, |_, _| {
            let e = base_entries[k].clone();
            k += 1;
            e
        });
        let base_type = smith_normal_form(&m).divisors;
        let mut trials = 0;
        while trials < 100 {
            let entries = lcg_elems(&r, &mut seed, 9);
            let mut k = 0;
            let g = RingMatrix::from_fn(&r, 3, 3, |_, _| {
                let e = entries[k].clone();
                k += 1;
                e
            });
            if !r.is_unit(&g.det()) {
                continue;
            }
            trials += 1;
            assert_eq!(smith_normal_form(&g.matmul(&m)).divisors, base_type);
            assert_eq!(smith_normal_form(&m.matmul(&g)).divisors, base_type);
        }
    }

    #[test]
    fn matrix_json_round_trip() {
        let r = GaloisRing::make(3, 2, 2).unwrap();
        let m = RingMatrix::from_fn(&r, 2, 3, |i, j| r.from_coeffs(&[i as i64, j as i64]));
        let json = m.to_json();
        let back = RingMatrix::from_json(&json).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_json(), json);
    }
}
