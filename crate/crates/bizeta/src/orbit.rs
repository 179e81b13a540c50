//! Orbit-linear route for class-2 lattices: sweep the commutator matrices
//! A and B over all ring points, collect elementary-divisor statistics via
//! Smith normal forms, and aggregate them into conjugacy-class and character
//! degree data without ever building the group.

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::lattice::{commutator_matrices, LatticeProfile, LinForm};
use crate::quotient::{Bounds, ClassData, DegreeData};
use crate::ring::{pow_u64, smith_normal_form, Elem, ElementaryDivisorType, GaloisRing, RingMatrix};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OrbitError {
    #[error("orbit-linear route requires class <= 2, got {0}")]
    ClassTooHigh(u32),
    #[error("point sweep of size {size} exceeds the configured bound {bound}")]
    SizeBound { size: u64, bound: u64 },
    #[error("image of the antisymmetric matrix has non-square size {0}")]
    NonSquareImage(u64),
    #[error("aggregation failed: count {count} times q^{{e}} not divisible by {by}")]
    InconsistentAggregation { count: u64, by: u64 },
}

/// Evaluates a matrix of integer linear forms at a ring point.
pub fn ring_eval_matrix(forms: &[Vec<LinForm>], point: &[Elem], ring: &GaloisRing) -> RingMatrix {
    let rows = forms.len();
    let cols = forms.first().map_or(0, |r| r.len());
    RingMatrix::from_fn(ring, rows, cols, |i, j| {
        let mut acc = ring.zero();
        for (k, &c) in forms[i][j].coeffs.iter().enumerate() {
            if c != 0 {
                let scaled = ring.mul(&ring.from_int(c), &point[k]);
                acc = ring.add(&acc, &scaled);
            }
        }
        acc
    })
}

/// Histogram of elementary divisor types of `forms` over all of R^nvars.
/// The sweep is parallel; counts merge commutatively so the result does not
/// depend on scheduling.
pub fn divisor_distribution(
    forms: &[Vec<LinForm>],
    nvars: usize,
    ring: &GaloisRing,
    bounds: &Bounds,
) -> Result<BTreeMap<ElementaryDivisorType, u64>, OrbitError> {
    let total = (0..nvars).try_fold(1u64, |acc, _| acc.checked_mul(ring.size()));
    let total = total.filter(|&t| t <= bounds.max_group_order).ok_or(
        OrbitError::SizeBound {
            size: total.unwrap_or(u64::MAX),
            bound: bounds.max_group_order,
        },
    )?;
    let point_at = |mut idx: u64| -> Vec<Elem> {
        (0..nvars)
            .map(|_| {
                let e = ring.elem_from_index(idx % ring.size());
                idx /= ring.size();
                e
            })
            .collect()
    };
    let counts = (0..total)
        .into_par_iter()
        .fold(BTreeMap::new, |mut acc: BTreeMap<ElementaryDivisorType, u64>, idx| {
            let m = ring_eval_matrix(forms, &point_at(idx), ring);
            let snf = smith_normal_form(&m);
            *acc.entry(snf.divisors).or_insert(0) += 1;
            acc
        })
        .reduce(BTreeMap::new, |mut lhs, rhs| {
            for (k, v) in rhs {
                *lhs.entry(k).or_insert(0) += v;
            }
            lhs
        });
    Ok(counts)
}

fn exact_div(num: u64, den: u64) -> Result<u64, OrbitError> {
    if num % den != 0 {
        return Err(OrbitError::InconsistentAggregation {
            count: num,
            by: den,
        });
    }
    Ok(num / den)
}

/// Conjugacy-class data from the A matrix: a point x with image size n
/// accounts for q^{zN} group elements spread over classes of size n, so
/// `c_n = #{x : |im A(x)| = n} * q^{zN} / n`.
pub fn cc_zeta_from_a(
    profile: &LatticeProfile,
    ring: &GaloisRing,
    bounds: &Bounds,
) -> Result<ClassData, OrbitError> {
    let c = profile.lattice.class_c;
    if c > 2 {
        return Err(OrbitError::ClassTooHigh(c));
    }
    let cm = commutator_matrices(profile);
    let hist = divisor_distribution(&cm.a_mat, profile.a, ring, bounds)?;
    let centre_weight = pow_u64(ring.size(), profile.z as u32);
    let mut sizes: BTreeMap<u64, u64> = BTreeMap::new();
    for (divisors, count) in hist {
        let n = divisors.image_size(ring);
        let classes = exact_div(count.checked_mul(centre_weight).unwrap(), n)?;
        *sizes.entry(n).or_insert(0) += classes;
    }
    Ok(ClassData::from_counts(sizes))
}

/// Character degree data from the B matrix: a point y with image size d^2
/// contributes q^{rN} / d^2 characters of degree d (Kirillov orbit count),
/// so `r_d = #{y : |im B(y)| = d^2} * q^{rN} / d^2`.
pub fn irr_zeta_from_b(
    profile: &LatticeProfile,
    ring: &GaloisRing,
    bounds: &Bounds,
) -> Result<DegreeData, OrbitError> {
    let c = profile.lattice.class_c;
    if c > 2 {
        return Err(OrbitError::ClassTooHigh(c));
    }
    let cm = commutator_matrices(profile);
    let hist = divisor_distribution(&cm.b_mat, profile.b, ring, bounds)?;
    let ab_weight = pow_u64(ring.size(), profile.r as u32);
    let mut degrees: BTreeMap<u64, u64> = BTreeMap::new();
    for (divisors, count) in hist {
        let sq = divisors.image_size(ring);
        let d = integer_sqrt(sq);
        if d * d != sq {
            return Err(OrbitError::NonSquareImage(sq));
        }
        let chars = exact_div(count.checked_mul(ab_weight).unwrap(), sq.max(1))?;
        *degrees.entry(d).or_insert(0) += chars;
    }
    Ok(DegreeData { degrees })
}

fn integer_sqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{corpus, profile};
    use crate::quotient::{build_group, character_degrees, conjugacy_classes};

    fn setup(l: &crate::lattice::LieLattice, p: u64, n: u32, f: u32) -> (LatticeProfile, GaloisRing) {
        (profile(l).unwrap(), GaloisRing::make(p, n, f).unwrap())
    }

    #[test]
    fn heisenberg_cc_matches_frozen_values() {
        let bounds = Bounds::default();
        let (prof, ring) = setup(&corpus::heisenberg(), 3, 1, 1);
        let cd = cc_zeta_from_a(&prof, &ring, &bounds).unwrap();
        assert_eq!(cd.k, 11);
        assert_eq!(cd.sizes.get(&1), Some(&3));
        assert_eq!(cd.sizes.get(&3), Some(&8));

        let (prof, ring) = setup(&corpus::heisenberg(), 3, 2, 1);
        let cd = cc_zeta_from_a(&prof, &ring, &bounds).unwrap();
        assert_eq!(cd.k, 105);
        assert_eq!(cd.sizes.get(&9), Some(&72));

        let (prof, ring) = setup(&corpus::heisenberg(), 3, 1, 2);
        let cd = cc_zeta_from_a(&prof, &ring, &bounds).unwrap();
        assert_eq!(cd.k, 89);
        assert_eq!(cd.sizes.get(&9), Some(&80));
    }

    #[test]
    fn heisenberg_irr_matches_frozen_values() {
        let bounds = Bounds::default();
        let (prof, ring) = setup(&corpus::heisenberg(), 3, 1, 1);
        let dd = irr_zeta_from_b(&prof, &ring, &bounds).unwrap();
        assert_eq!(dd.degrees.get(&1), Some(&9));
        assert_eq!(dd.degrees.get(&3), Some(&2));

        let (prof, ring) = setup(&corpus::heisenberg(), 3, 2, 1);
        let dd = irr_zeta_from_b(&prof, &ring, &bounds).unwrap();
        assert_eq!(dd.degrees.get(&1), Some(&81));
        assert_eq!(dd.degrees.get(&3), Some(&18));
        assert_eq!(dd.degrees.get(&9), Some(&6));

        let (prof, ring) = setup(&corpus::heisenberg(), 3, 1, 2);
        let dd = irr_zeta_from_b(&prof, &ring, &bounds).unwrap();
        assert_eq!(dd.degrees.get(&1), Some(&81));
        assert_eq!(dd.degrees.get(&9), Some(&8));
        assert_eq!(dd.k(), 89);
        assert_eq!(dd.sum_of_squares(), 729);
    }

    #[test]
    fn routes_agree_with_brute_force() {
        let bounds = Bounds::default();
        for (l, p, n, f) in [
            (corpus::heisenberg(), 3, 1, 1),
            (corpus::heisenberg(), 3, 2, 1),
            (corpus::heisenberg(), 3, 1, 2),
            (corpus::heisenberg(), 5, 1, 1),
            (corpus::heisenberg_plus_z(), 3, 1, 1),
            (corpus::heisenberg_plus_z(), 5, 1, 1),
            (corpus::free_class2_rank3(), 3, 1, 1),
            (corpus::abelian(2), 5, 1, 1),
        ] {
            let (prof, ring) = setup(&l, p, n, f);
            let g = build_group(&prof, &ring, &bounds).unwrap();
            let cd_fast = cc_zeta_from_a(&prof, &ring, &bounds).unwrap();
            let cd_slow = conjugacy_classes(&g);
            assert_eq!(cd_fast, cd_slow, "cc mismatch for {} p={p} N={n} f={f}", l.name);
            let dd_fast = irr_zeta_from_b(&prof, &ring, &bounds).unwrap();
            if g.order() <= bounds.max_dixon_order {
                let dd_slow = character_degrees(&g, &bounds).unwrap();
                assert_eq!(dd_fast, dd_slow, "irr mismatch for {} p={p} N={n} f={f}", l.name);
            }
            // moment identities hold in any case
            let order = pow_u64(ring.size(), prof.h as u32);
            assert_eq!(cd_fast.total_elements(), order);
            assert_eq!(dd_fast.sum_of_squares(), order);
            assert_eq!(dd_fast.k(), cd_fast.k);
        }
    }

    #[test]
    fn class_three_refused() {
        let (prof, ring) = setup(&corpus::free_class3_rank2(), 5, 1, 1);
        let bounds = Bounds::default();
        assert_eq!(
            cc_zeta_from_a(&prof, &ring, &bounds).unwrap_err(),
            OrbitError::ClassTooHigh(3)
        );
        assert_eq!(
            irr_zeta_from_b(&prof, &ring, &bounds).unwrap_err(),
            OrbitError::ClassTooHigh(3)
        );
    }

    #[test]
    fn sweep_bound_refused() {
        let (prof, ring) = setup(&corpus::free_class2_rank3(), 7, 2, 1);
        let bounds = Bounds::default();
        // the B sweep is small, the A sweep over R^6 is not
        assert!(matches!(
            cc_zeta_from_a(&prof, &ring, &bounds),
            Err(OrbitError::SizeBound { .. })
        ));
    }

    #[test]
    fn distribution_sums_to_sweep_size() {
        let (prof, ring) = setup(&corpus::heisenberg_plus_z(), 3, 2, 1);
        let cm = commutator_matrices(&prof);
        let hist = divisor_distribution(&cm.a_mat, prof.a, &ring, &Bounds::default()).unwrap();
        let total: u64 = hist.values().sum();
        assert_eq!(total, 81); // |R|^a = 9^2
    }
}
