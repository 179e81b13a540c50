//! Finite congruence quotients G(o/p^N) built from a Lie lattice by the
//! truncated Campbell-Baker-Hausdorff product, and the two brute-force
//! oracles on them: conjugacy-class enumeration and Dixon-Schneider
//! character degrees.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::lattice::LatticeProfile;
use crate::ring::{pow_u64, Elem, GaloisRing};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QuotientError {
    #[error("inadmissible prime p = {p} for class c = {c} (need p > c)")]
    InadmissiblePrime { p: u64, c: u32 },
    #[error("group order {order} exceeds the configured bound {bound}")]
    SizeBound { order: u64, bound: u64 },
    #[error("BCH truncation only implemented for class <= 3, got {0}")]
    ClassTooHigh(u32),
    #[error("no suitable splitting prime found below {0} for Dixon's algorithm")]
    NoSuitablePrime(u64),
}

/// Enumeration bounds; `BIZETA_MAX_GROUP_ORDER` overrides the group bound at
/// the CLI layer.
#[derive(Debug, Clone, Copy)]
pub struct Bounds {
    pub max_group_order: u64,
    pub max_dixon_order: u64,
}

impl Default for Bounds {
    fn default() -> Bounds {
        Bounds {
            max_group_order: 59049, // 3^10
            max_dixon_order: 2187,  // 3^7
        }
    }
}

/// The group (Lambda(R), *) for R = GR(p^N, f), with BCH multiplication
/// truncated at the nilpotency class (implemented for c <= 3, p > c).
#[derive(Debug, Clone)]
pub struct FiniteQuotientGroup {
    pub profile: LatticeProfile,
    pub ring: GaloisRing,
    order: u64,
    h: usize,
    inv2: u64,
    inv12: u64,
}

pub type GroupElem = Vec<Elem>;

pub fn build_group(
    profile: &LatticeProfile,
    ring: &GaloisRing,
    bounds: &Bounds,
) -> Result<FiniteQuotientGroup, QuotientError> {
    let c = profile.lattice.class_c;
    if c > 3 {
        return Err(QuotientError::ClassTooHigh(c));
    }
    if ring.p() <= c as u64 {
        return Err(QuotientError::InadmissiblePrime { p: ring.p(), c });
    }
    let h = profile.h;
    let order = (0..h).try_fold(1u64, |acc, _| acc.checked_mul(ring.size()));
    let order = order.ok_or(QuotientError::SizeBound {
        order: u64::MAX,
        bound: bounds.max_group_order,
    })?;
    if order > bounds.max_group_order {
        return Err(QuotientError::SizeBound {
            order,
            bound: bounds.max_group_order,
        });
    }
    let pn = pow_u64(ring.p(), ring.level());
    Ok(FiniteQuotientGroup {
        profile: profile.clone(),
        ring: ring.clone(),
        order,
        h,
        inv2: scalar_inverse(2 % pn, pn),
        inv12: if c >= 3 { scalar_inverse(12 % pn, pn) } else { 0 },
    })
}

fn scalar_inverse(a: u64, m: u64) -> u64 {
    // extended Euclid; a coprime to m by the p > c precondition
    let (mut r0, mut r1) = (m as i128, a as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    assert_eq!(r0, 1, "scalar not invertible");
    s0.rem_euclid(m as i128) as u64
}

impl FiniteQuotientGroup {
    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn rank(&self) -> usize {
        self.h
    }

    pub fn identity(&self) -> GroupElem {
        vec![self.ring.zero(); self.h]
    }

    /// Ring-bilinear extension of the lattice bracket.
    pub fn bracket(&self, x: &GroupElem, y: &GroupElem) -> GroupElem {
        let ring = &self.ring;
        let mut out = self.identity();
        for (&(i, j), v) in &self.profile.lattice.brackets {
            // coefficient x_i y_j - x_j y_i
            let c = ring.sub(&ring.mul(&x[i], &y[j]), &ring.mul(&x[j], &y[i]));
            if ring.is_zero(&c) {
                continue;
            }
            for (l, &coeff) in v.iter().enumerate() {
                if coeff != 0 {
                    let pn = pow_u64(ring.p(), ring.level());
                    let scaled = ring.scalar_mul(coeff.rem_euclid(pn as i64) as u64, &c);
                    out[l] = ring.add(&out[l], &scaled);
                }
            }
        }
        out
    }

    /// x * y = x + y + [x,y]/2 + ([x,[x,y]] + [y,[y,x]])/12, truncated at the
    /// lattice class.
    pub fn mul(&self, x: &GroupElem, y: &GroupElem) -> GroupElem {
        let ring = &self.ring;
        let mut z: GroupElem = (0..self.h).map(|i| ring.add(&x[i], &y[i])).collect();
        let c = self.profile.lattice.class_c;
        if c >= 2 {
            let w = self.bracket(x, y);
            for i in 0..self.h {
                z[i] = ring.add(&z[i], &ring.scalar_mul(self.inv2, &w[i]));
            }
            if c >= 3 {
                let xxy = self.bracket(x, &w);
                let yx = self.bracket(y, x);
                let yyx = self.bracket(y, &yx);
                for i in 0..self.h {
                    let t = ring.add(&xxy[i], &yyx[i]);
                    z[i] = ring.add(&z[i], &ring.scalar_mul(self.inv12, &t));
                }
            }
        }
        z
    }

    /// BCH(x, -x) = 0, so the inverse is the additive negative.
    pub fn inv(&self, x: &GroupElem) -> GroupElem {
        x.iter().map(|e| self.ring.neg(e)).collect()
    }

    pub fn conjugate(&self, g: &GroupElem, by: &GroupElem) -> GroupElem {
        self.mul(&self.mul(by, g), &self.inv(by))
    }

    pub fn elem_index(&self, x: &GroupElem) -> usize {
        let size = self.ring.size();
        let mut idx: u64 = 0;
        for e in x.iter().rev() {
            idx = idx * size + self.ring.elem_index(e);
        }
        idx as usize
    }

    pub fn elem_from_index(&self, mut idx: usize) -> GroupElem {
        let size = self.ring.size() as usize;
        (0..self.h)
            .map(|_| {
                let e = self.ring.elem_from_index((idx % size) as u64);
                idx /= size;
                e
            })
            .collect()
    }

    /// Generators t^j e_i of the group, enough to reach every element.
    pub fn generators(&self) -> Vec<GroupElem> {
        let mut gens = Vec::new();
        for i in 0..self.h {
            let mut t_power = self.ring.one();
            for _ in 0..self.ring.inertia_degree() {
                let mut g = self.identity();
                g[i] = t_power.clone();
                gens.push(g);
                t_power = self.ring.mul(&t_power, &self.ring.gen());
            }
        }
        gens
    }

    pub fn element_order(&self, x: &GroupElem) -> u64 {
        let id = self.identity();
        let mut acc = x.clone();
        let mut n = 1;
        while acc != id {
            acc = self.mul(&acc, x);
            n += 1;
        }
        n
    }

    pub fn exponent(&self, class_reps: &[GroupElem]) -> u64 {
        class_reps
            .iter()
            .map(|r| self.element_order(r))
            .fold(1, num_integer::lcm)
    }
}

/// Conjugacy class sizes with multiplicities, plus the class count k.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassData {
    /// class size n -> number of classes of that size
    pub sizes: BTreeMap<u64, u64>,
    pub k: u64,
}

impl ClassData {
    pub fn from_counts(sizes: BTreeMap<u64, u64>) -> ClassData {
        let k = sizes.values().sum();
        ClassData { sizes, k }
    }

    pub fn total_elements(&self) -> u64 {
        self.sizes.iter().map(|(&n, &c)| n * c).sum()
    }
}

/// Number of irreducible complex characters by degree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegreeData {
    /// degree n -> number of irreducible characters of that degree
    pub degrees: BTreeMap<u64, u64>,
}

impl DegreeData {
    pub fn k(&self) -> u64 {
        self.degrees.values().sum()
    }

    pub fn sum_of_squares(&self) -> u64 {
        self.degrees.iter().map(|(&n, &r)| n * n * r).sum()
    }
}

/// Full class partition: representative index and class id per element.
pub struct ClassPartition {
    pub class_of: Vec<u32>,
    pub reps: Vec<usize>,
    pub members: Vec<Vec<usize>>,
}

/// Exact conjugacy partition.  Uses the class-2 shortcut (the class of g is
/// g + [g, Lambda(R)]) when the lattice has class 2, generic conjugation
/// orbits otherwise; representatives are minimal element indices, so the
/// result is independent of scheduling.
pub fn class_partition(g: &FiniteQuotientGroup) -> ClassPartition {
    if g.profile.lattice.class_c <= 2 {
        class_partition_additive(g)
    } else {
        class_partition_generic(g)
    }
}

fn class_partition_additive(g: &FiniteQuotientGroup) -> ClassPartition {
    let order = g.order() as usize;
    let mut class_of = vec![u32::MAX; order];
    let mut reps = Vec::new();
    let mut members = Vec::new();
    let gens = g.generators();
    for idx in 0..order {
        if class_of[idx] != u32::MAX {
            continue;
        }
        let rep = g.elem_from_index(idx);
        // additive span of the bracket image [rep, gens]
        let deltas: Vec<GroupElem> = gens.iter().map(|x| g.bracket(&rep, x)).collect();
        let zero = g.identity();
        let mut span = vec![g.elem_index(&zero)];
        let mut seen = vec![false; 0];
        let mut seen_set = std::collections::HashSet::new();
        seen_set.insert(span[0]);
        let mut queue = vec![zero];
        while let Some(v) = queue.pop() {
            for d in &deltas {
                let w: GroupElem = (0..g.rank()).map(|i| g.ring.add(&v[i], &d[i])).collect();
                let widx = g.elem_index(&w);
                if seen_set.insert(widx) {
                    span.push(widx);
                    queue.push(w);
                }
            }
        }
        seen.clear();
        let cid = reps.len() as u32;
        let mut mem = Vec::with_capacity(span.len());
        for &soff in &span {
            let shift = g.elem_from_index(soff);
            let elem: GroupElem = (0..g.rank())
                .map(|i| g.ring.add(&rep[i], &shift[i]))
                .collect();
            let eidx = g.elem_index(&elem);
            debug_assert_eq!(class_of[eidx], u32::MAX);
            class_of[eidx] = cid;
            mem.push(eidx);
        }
        mem.sort_unstable();
        reps.push(idx);
        members.push(mem);
    }
    ClassPartition {
        class_of,
        reps,
        members,
    }
}

fn class_partition_generic(g: &FiniteQuotientGroup) -> ClassPartition {
    let order = g.order() as usize;
    let mut class_of = vec![u32::MAX; order];
    let mut reps = Vec::new();
    let mut members = Vec::new();
    let gens = g.generators();
    for idx in 0..order {
        if class_of[idx] != u32::MAX {
            continue;
        }
        let cid = reps.len() as u32;
        let mut mem = vec![idx];
        class_of[idx] = cid;
        let mut queue = vec![g.elem_from_index(idx)];
        while let Some(v) = queue.pop() {
            for x in &gens {
                let w = g.conjugate(&v, x);
                let widx = g.elem_index(&w);
                if class_of[widx] == u32::MAX {
                    class_of[widx] = cid;
                    mem.push(widx);
                    queue.push(w);
                }
            }
        }
        mem.sort_unstable();
        reps.push(idx);
        members.push(mem);
    }
    ClassPartition {
        class_of,
        reps,
        members,
    }
}

pub fn conjugacy_classes(g: &FiniteQuotientGroup) -> ClassData {
    let part = class_partition(g);
    let mut sizes = BTreeMap::new();
    for mem in &part.members {
        *sizes.entry(mem.len() as u64).or_insert(0) += 1;
    }
    let data = ClassData::from_counts(sizes);
    assert_eq!(data.total_elements(), g.order(), "class sizes must sum to |G|");
    data
}

/// Dixon-Schneider character degrees: class-algebra constants, simultaneous
/// eigenvectors over F_l with l = 1 mod exp(G) and l > 2 sqrt(|G|), degrees
/// from the second orthogonality normalization.  Returns degree counts only.
pub fn character_degrees(
    g: &FiniteQuotientGroup,
    bounds: &Bounds,
) -> Result<DegreeData, QuotientError> {
    if g.order() > bounds.max_dixon_order {
        return Err(QuotientError::SizeBound {
            order: g.order(),
            bound: bounds.max_dixon_order,
        });
    }
    let part = class_partition(g);
    let k = part.reps.len();
    let rep_elems: Vec<GroupElem> = part.reps.iter().map(|&i| g.elem_from_index(i)).collect();
    let exponent = g.exponent(&rep_elems);
    let ell = find_splitting_prime(exponent, g.order(), 1_000_000)?;

    // class of the inverse of each class representative
    let inv_class: Vec<usize> = rep_elems
        .iter()
        .map(|r| part.class_of[g.elem_index(&g.inv(r))] as usize)
        .collect();

    // class matrices (M_i)_{jk} = #{x in C_i : x^{-1} z_k in C_j}
    let mut matrices: Vec<Vec<Vec<u64>>> = Vec::with_capacity(k);
    for i in 0..k {
        let mut m = vec![vec![0u64; k]; k];
        for (kk, z) in rep_elems.iter().enumerate() {
            for &xidx in &part.members[i] {
                let x = g.elem_from_index(xidx);
                let y = g.mul(&g.inv(&x), z);
                let j = part.class_of[g.elem_index(&y)] as usize;
                m[j][kk] = (m[j][kk] + 1) % ell;
            }
        }
        matrices.push(m);
    }

    // split F_l^k into common eigenspaces
    let mut spaces: Vec<Vec<Vec<u64>>> = vec![modlin::identity(k)];
    for m in matrices.iter().skip(1) {
        if spaces.iter().all(|s| s.len() == 1) {
            break;
        }
        let mut next = Vec::new();
        for space in &spaces {
            if space.len() == 1 {
                next.push(space.clone());
                continue;
            }
            next.extend(modlin::split_by_eigenspaces(m, space, ell));
        }
        spaces = next;
    }
    if spaces.len() != k {
        // the class matrices always separate the characters; reaching this
        // indicates an arithmetic failure
        return Err(QuotientError::NoSuitablePrime(ell));
    }

    // degrees: d^2 = |G| / sum_i w_i w_{i*} / |C_i|  (mod l)
    let mut degrees: BTreeMap<u64, u64> = BTreeMap::new();
    let order_mod = g.order() % ell;
    for space in &spaces {
        let v = &space[0];
        let omegas: Vec<u64> = (0..k)
            .map(|i| modlin::eigenvalue_on(&matrices[i], v, ell))
            .collect();
        let mut denom = 0u64;
        for i in 0..k {
            let csize = part.members[i].len() as u64 % ell;
            let term = omegas[i] * omegas[inv_class[i]] % ell;
            denom = (denom + term * modlin::inv(csize, ell)) % ell;
        }
        let d_sq = order_mod * modlin::inv(denom, ell) % ell;
        let d = sqrt_mod(d_sq, ell).expect("degree square must be a QR");
        let d = d.min(ell - d); // the degree is the representative below l/2
        *degrees.entry(d).or_insert(0) += 1;
    }
    let data = DegreeData { degrees };
    assert_eq!(data.k(), k as u64, "character count must equal class count");
    assert_eq!(
        data.sum_of_squares(),
        g.order(),
        "degree squares must sum to |G|"
    );
    Ok(data)
}

fn find_splitting_prime(exponent: u64, order: u64, limit: u64) -> Result<u64, QuotientError> {
    let min = 2.0 * (order as f64).sqrt();
    let mut ell = exponent + 1;
    while ell <= limit {
        if (ell as f64) > min && (ell - 1) % exponent == 0 && is_prime_u64(ell) {
            return Ok(ell);
        }
        ell += exponent.max(1);
        if (ell - 1) % exponent != 0 {
            ell = ((ell - 1) / exponent + 1) * exponent + 1;
        }
    }
    Err(QuotientError::NoSuitablePrime(limit))
}

fn is_prime_u64(n: u64) -> bool {
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

fn sqrt_mod(a: u64, p: u64) -> Option<u64> {
    // p is small (a few hundred); brute force is fine
    (0..p).find(|&x| x * x % p == a)
}

/// Linear algebra mod a small prime, used only by the Dixon oracle.
mod modlin {
    pub fn inv(a: u64, p: u64) -> u64 {
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

    pub fn identity(n: usize) -> Vec<Vec<u64>> {
        (0..n)
            .map(|i| {
                let mut row = vec![0u64; n];
                row[i] = 1;
                row
            })
            .collect()
    }

    pub fn matvec(m: &[Vec<u64>], v: &[u64], p: u64) -> Vec<u64> {
        m.iter()
            .map(|row| row.iter().zip(v).map(|(&a, &b)| a * b % p).sum::<u64>() % p)
            .collect()
    }

    /// Reduced row echelon form in place; returns pivot columns.
    pub fn rref(m: &mut Vec<Vec<u64>>, p: u64) -> Vec<usize> {
        let rows = m.len();
        if rows == 0 {
            return Vec::new();
        }
        let cols = m[0].len();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            let Some(pr) = (r..rows).find(|&i| m[i][c] != 0) else {
                continue;
            };
            m.swap(r, pr);
            let piv_inv = inv(m[r][c], p);
            for x in m[r].iter_mut() {
                *x = *x * piv_inv % p;
            }
            for i in 0..rows {
                if i != r && m[i][c] != 0 {
                    let f = m[i][c];
                    for j in 0..cols {
                        m[i][j] = (m[i][j] + p - f * m[r][j] % p) % p;
                    }
                }
            }
            pivots.push(c);
            r += 1;
            if r == rows {
                break;
            }
        }
        m.truncate(r);
        pivots
    }

    /// Basis of the nullspace of m (rows x cols), as row vectors.
    pub fn nullspace(m: &[Vec<u64>], p: u64) -> Vec<Vec<u64>> {
        let cols = m.first().map_or(0, |r| r.len());
        let mut work = m.to_vec();
        let pivots = rref(&mut work, p);
        let mut basis = Vec::new();
        let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
        for free in (0..cols).filter(|c| !pivot_set.contains(c)) {
            let mut v = vec![0u64; cols];
            v[free] = 1;
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = (p - work[r][free]) % p;
            }
            basis.push(v);
        }
        basis
    }

    /// Coordinates of v in the row space of the RREF basis.
    fn coords_in_basis(basis: &[Vec<u64>], pivots: &[usize], v: &[u64], p: u64) -> Vec<u64> {
        // basis is in RREF: coordinate along row r is v[pivots[r]] after
        // sequentially subtracting previous rows; with full RREF it is direct.
        let mut coords = Vec::with_capacity(basis.len());
        let mut rem = v.to_vec();
        for (r, &pc) in pivots.iter().enumerate() {
            let c = rem[pc] % p;
            coords.push(c);
            if c != 0 {
                for j in 0..rem.len() {
                    rem[j] = (rem[j] + p - c * basis[r][j] % p) % p;
                }
            }
        }
        debug_assert!(rem.iter().all(|&x| x == 0), "vector outside subspace");
        coords
    }

    /// Splits an M-invariant subspace (rows spanning it) into the eigenspaces
    /// of M restricted to it.
    pub fn split_by_eigenspaces(
        m: &[Vec<u64>],
        space: &[Vec<u64>],
        p: u64,
    ) -> Vec<Vec<Vec<u64>>> {
        let mut basis = space.to_vec();
        let pivots = rref(&mut basis, p);
        let d = basis.len();
        // restricted action matrix: column j = coords of M b_j
        let mut action = vec![vec![0u64; d]; d];
        for (j, b) in basis.iter().enumerate() {
            let mb = matvec(m, b, p);
            let coords = coords_in_basis(&basis, &pivots, &mb, p);
            for i in 0..d {
                action[i][j] = coords[i];
            }
        }
        let mut out = Vec::new();
        let mut found = 0;
        for lambda in 0..p {
            if found == d {
                break;
            }
            let shifted: Vec<Vec<u64>> = (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| {
                            if i == j {
                                (action[i][j] + p - lambda % p) % p
                            } else {
                                action[i][j]
                            }
                        })
                        .collect()
                })
                .collect();
            let kernel = nullspace(&shifted, p);
            if kernel.is_empty() {
                continue;
            }
            found += kernel.len();
            // lift kernel coordinates back to ambient vectors
            let lifted: Vec<Vec<u64>> = kernel
                .iter()
                .map(|coef| {
                    let n = basis[0].len();
                    let mut v = vec![0u64; n];
                    for (r, &c) in coef.iter().enumerate() {
                        for j in 0..n {
                            v[j] = (v[j] + c * basis[r][j]) % p;
                        }
                    }
                    v
                })
                .collect();
            out.push(lifted);
        }
        debug_assert_eq!(found, d, "restricted class matrix must be diagonalizable");
        out
    }

    /// Eigenvalue of m on the (eigen)vector v.
    pub fn eigenvalue_on(m: &[Vec<u64>], v: &[u64], p: u64) -> u64 {
        let mv = matvec(m, v, p);
        let j = v.iter().position(|&x| x != 0).expect("zero eigenvector");
        mv[j] * inv(v[j], p) % p
    }
}

/// Admissibility of a rational prime for the quotient pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Admissibility {
    Admissible,
    /// p <= c, so the BCH denominators are not invertible.
    ExcludedSmallPrime,
    /// (p, c) = (2, 3), excluded by the commutator-matrix description.
    ExcludedClassPair,
    /// p divides the basis saturation index.
    ExcludedIndexPrime,
}

pub fn admissible_primes(profile: &LatticeProfile, up_to: u64) -> Vec<(u64, Admissibility)> {
    let c = profile.lattice.class_c;
    (2..=up_to)
        .filter(|&p| is_prime_u64(p))
        .map(|p| {
            let verdict = if p == 2 && c == 3 {
                Admissibility::ExcludedClassPair
            } else if p <= c as u64 {
                Admissibility::ExcludedSmallPrime
            } else if profile.bad_index_primes.contains(&p) {
                Admissibility::ExcludedIndexPrime
            } else {
                Admissibility::Admissible
            };
            (p, verdict)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{corpus, profile, LieLattice};
    use crate::ring::GaloisRing;

    fn group(l: &LieLattice, p: u64, n: u32, f: u32) -> FiniteQuotientGroup {
        let prof = profile(l).unwrap();
        let ring = GaloisRing::make(p, n, f).unwrap();
        build_group(&prof, &ring, &Bounds::default()).unwrap()
    }

    #[test]
    fn heisenberg_mod_3_order_and_exponent() {
        let g = group(&corpus::heisenberg(), 3, 1, 1);
        assert_eq!(g.order(), 27);
        // every nonidentity element has order 3
        for idx in 1..27 {
            let x = g.elem_from_index(idx);
            assert_eq!(g.element_order(&x), 3);
        }
    }

    #[test]
    fn abelian_mod_5_commutes() {
        let g = group(&corpus::abelian(2), 5, 1, 1);
        assert_eq!(g.order(), 25);
        for i in 0..25 {
            for j in 0..25 {
                let x = g.elem_from_index(i);
                let y = g.elem_from_index(j);
                assert_eq!(g.mul(&x, &y), g.mul(&y, &x));
            }
        }
    }

    #[test]
    fn heisenberg_f9_centre_order_9() {
        let g = group(&corpus::heisenberg(), 3, 1, 2);
        assert_eq!(g.order(), 729);
        let mut centre = 0;
        let gens = g.generators();
        for idx in 0..g.order() as usize {
            let x = g.elem_from_index(idx);
            if gens.iter().all(|y| g.mul(&x, y) == g.mul(y, &x)) {
                centre += 1;
            }
        }
        assert_eq!(centre, 9);
    }

    #[test]
    fn inadmissible_prime_refused() {
        let prof = profile(&corpus::heisenberg()).unwrap();
        let ring = GaloisRing::make(2, 1, 1).unwrap();
        assert_eq!(
            build_group(&prof, &ring, &Bounds::default()).unwrap_err(),
            QuotientError::InadmissiblePrime { p: 2, c: 2 }
        );
    }

    #[test]
    fn size_bound_refused() {
        let prof = profile(&corpus::free_class2_rank3()).unwrap();
        let ring = GaloisRing::make(7, 1, 1).unwrap();
        let err = build_group(&prof, &ring, &Bounds::default()).unwrap_err();
        assert!(matches!(err, QuotientError::SizeBound { order: 117649, .. }));
    }

    #[test]
    fn associativity_exhaustive_small() {
        for g in [
            group(&corpus::heisenberg(), 3, 1, 1),
            group(&corpus::free_class3_rank2(), 5, 1, 1),
        ] {
            let n = g.order() as usize;
            if n <= 729 {
                for i in 0..n.min(27) {
                    for j in 0..n.min(27) {
                        for k in 0..n.min(27) {
                            let (x, y, z) = (
                                g.elem_from_index(i),
                                g.elem_from_index(j),
                                g.elem_from_index(k),
                            );
                            assert_eq!(g.mul(&g.mul(&x, &y), &z), g.mul(&x, &g.mul(&y, &z)));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn associativity_random_triples() {
        let g = group(&corpus::heisenberg(), 3, 2, 1); // order 729
        let mut seed = 99u64;
        for _ in 0..100_000 {
            let mut next = || {
                seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
                ((seed >> 20) % g.order()) as usize
            };
            let (x, y, z) = (
                g.elem_from_index(next()),
                g.elem_from_index(next()),
                g.elem_from_index(next()),
            );
            assert_eq!(g.mul(&g.mul(&x, &y), &z), g.mul(&x, &g.mul(&y, &z)));
        }
    }

    #[test]
    fn heisenberg_class_data() {
        let g = group(&corpus::heisenberg(), 3, 1, 1);
        let cd = conjugacy_classes(&g);
        assert_eq!(cd.k, 11);
        assert_eq!(cd.sizes.get(&1), Some(&3));
        assert_eq!(cd.sizes.get(&3), Some(&8));

        let g = group(&corpus::heisenberg(), 3, 2, 1);
        let cd = conjugacy_classes(&g);
        assert_eq!(cd.k, 105);
        assert_eq!(cd.sizes.get(&1), Some(&9));
        assert_eq!(cd.sizes.get(&3), Some(&24));
        assert_eq!(cd.sizes.get(&9), Some(&72));

        let g = group(&corpus::heisenberg(), 3, 1, 2);
        let cd = conjugacy_classes(&g);
        assert_eq!(cd.k, 89);
        assert_eq!(cd.sizes.get(&1), Some(&9));
        assert_eq!(cd.sizes.get(&9), Some(&80));
    }

    #[test]
    fn class2_shortcut_agrees_with_generic() {
        for (l, p, n, f) in [
            (corpus::heisenberg(), 3, 1, 1),
            (corpus::heisenberg(), 3, 2, 1),
            (corpus::heisenberg_plus_z(), 5, 1, 1),
            (corpus::free_class2_rank3(), 3, 1, 1),
        ] {
            let g = group(&l, p, n, f);
            let fast = class_partition_additive(&g);
            let slow = class_partition_generic(&g);
            assert_eq!(fast.reps, slow.reps);
            assert_eq!(fast.members, slow.members);
        }
    }

    #[test]
    fn class_sums_match_order() {
        for (l, p, n, f) in [
            (corpus::heisenberg(), 5, 1, 1),
            (corpus::free_class3_rank2(), 5, 1, 1),
            (corpus::heisenberg_plus_z(), 3, 2, 1),
        ] {
            let g = group(&l, p, n, f);
            let cd = conjugacy_classes(&g);
            assert_eq!(cd.total_elements(), g.order());
        }
    }

    #[test]
    fn dixon_abelian() {
        let g = group(&corpus::abelian(2), 5, 1, 1);
        let dd = character_degrees(&g, &Bounds::default()).unwrap();
        assert_eq!(dd.degrees.get(&1), Some(&25));
        assert_eq!(dd.k(), 25);
    }

    #[test]
    fn dixon_heisenberg_examples() {
        let g = group(&corpus::heisenberg(), 3, 1, 1);
        let dd = character_degrees(&g, &Bounds::default()).unwrap();
        assert_eq!(dd.degrees.get(&1), Some(&9));
        assert_eq!(dd.degrees.get(&3), Some(&2));

        let g = group(&corpus::heisenberg(), 3, 2, 1);
        let dd = character_degrees(&g, &Bounds::default()).unwrap();
        assert_eq!(dd.degrees.get(&1), Some(&81));
        assert_eq!(dd.degrees.get(&3), Some(&18));
        assert_eq!(dd.degrees.get(&9), Some(&6));
        assert_eq!(dd.k(), 105);
        assert_eq!(dd.sum_of_squares(), 729);
    }

    #[test]
    fn admissible_prime_examples() {
        let heis = profile(&corpus::heisenberg()).unwrap();
        let verdicts = admissible_primes(&heis, 10);
        let admissible: Vec<u64> = verdicts
            .iter()
            .filter(|(_, v)| *v == Admissibility::Admissible)
            .map(|&(p, _)| p)
            .collect();
        assert_eq!(admissible, vec![3, 5, 7]);
        assert_eq!(verdicts[0], (2, Admissibility::ExcludedSmallPrime));

        let ab = profile(&corpus::abelian(2)).unwrap();
        let admissible: Vec<u64> = admissible_primes(&ab, 5)
            .into_iter()
            .filter(|(_, v)| *v == Admissibility::Admissible)
            .map(|(p, _)| p)
            .collect();
        assert_eq!(admissible, vec![2, 3, 5]);

        let c3 = profile(&corpus::free_class3_rank2()).unwrap();
        let verdicts = admissible_primes(&c3, 10);
        let admissible: Vec<u64> = verdicts
            .iter()
            .filter(|(_, v)| *v == Admissibility::Admissible)
            .map(|&(p, _)| p)
            .collect();
        assert_eq!(admissible, vec![5, 7]);
        assert_eq!(verdicts[0], (2, Admissibility::ExcludedClassPair));
        assert_eq!(verdicts[1], (3, Admissibility::ExcludedSmallPrime));
    }
}
