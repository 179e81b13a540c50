//! Bivariate Dirichlet polynomials: truncated local zeta factors, the class
//! number specialization, finite Euler assembly over the rational primes, and
//! exact polynomial-in-q fitting of coefficient laws across primes.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde_json::json;
use thiserror::Error;

use crate::lattice::LatticeProfile;
use crate::orbit::{cc_zeta_from_a, irr_zeta_from_b, OrbitError};
use crate::quotient::{
    admissible_primes, build_group, character_degrees, conjugacy_classes, Admissibility, Bounds,
    QuotientError,
};
use crate::ring::{pow_u64, GaloisRing};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SeriesError {
    #[error(transparent)]
    Quotient(#[from] QuotientError),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error("ring construction failed: {0}")]
    Ring(String),
    #[error("value {n} is not a power of the residue size q = {q}")]
    NotQPower { n: u64, q: u64 },
    #[error("oracle mismatch at p = {p}, N = {level}: brute and linear routes disagree")]
    OracleMismatch { p: u64, level: u32 },
    #[error("need at least {need} primes for fitting, got {got}")]
    NeedMorePrimes { need: usize, got: usize },
    #[error("interpolated law fails at holdout prime {holdout} for key {key:?}")]
    InterpolationInconsistent { holdout: u64, key: (u64, u64) },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZetaKind {
    /// conjugacy-class zeta: counts classes by size
    Cc,
    /// representation zeta: counts irreducible characters by degree
    Irr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Brute,
    Linear,
    /// run both routes and fail loudly on disagreement
    Both,
}

/// Base of a bivariate Dirichlet polynomial: a fixed residue size q for local
/// factors, or global terms indexed by (degree, norm) pairs of integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeriesBase {
    Prime(u64),
    Global,
}

/// Local: coefficient of q^{-j s1} q^{-m s2} at key (j, m).
/// Global: coefficient of d^{-s1} n^{-s2} at key (d, n).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BivariateDirichletPolynomial {
    pub base: SeriesBase,
    pub terms: BTreeMap<(u64, u64), BigUint>,
}

impl BivariateDirichletPolynomial {
    pub fn one(base: SeriesBase) -> BivariateDirichletPolynomial {
        let mut terms = BTreeMap::new();
        let key = match base {
            SeriesBase::Prime(_) => (0, 0),
            SeriesBase::Global => (1, 1),
        };
        terms.insert(key, BigUint::one());
        BivariateDirichletPolynomial { base, terms }
    }

    /// Global product; keys multiply componentwise.
    pub fn mul_global(&self, other: &BivariateDirichletPolynomial) -> BivariateDirichletPolynomial {
        assert_eq!(self.base, SeriesBase::Global);
        assert_eq!(other.base, SeriesBase::Global);
        let mut terms: BTreeMap<(u64, u64), BigUint> = BTreeMap::new();
        for ((d1, n1), c1) in &self.terms {
            for ((d2, n2), c2) in &other.terms {
                *terms
                    .entry((d1 * d2, n1 * n2))
                    .or_insert_with(BigUint::zero) += c1 * c2;
            }
        }
        BivariateDirichletPolynomial {
            base: SeriesBase::Global,
            terms,
        }
    }

    /// Reinterprets a local factor at prime p over the global index set.
    pub fn globalize(&self, p: u64) -> BivariateDirichletPolynomial {
        assert!(matches!(self.base, SeriesBase::Prime(_)));
        let terms = self
            .terms
            .iter()
            .map(|(&(j, m), c)| ((pow_u64(p, j as u32), pow_u64(p, m as u32)), c.clone()))
            .collect();
        BivariateDirichletPolynomial {
            base: SeriesBase::Global,
            terms,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self.base {
            SeriesBase::Prime(q) => json!({
                "base_q": q,
                "terms": self.terms.iter().map(|(&(j, m), c)| json!({
                    "j": j, "m": m, "coeff": c.to_string(),
                })).collect::<Vec<_>>(),
            }),
            SeriesBase::Global => json!({
                "base_q": "global",
                "terms": self.terms.iter().map(|(&(d, n), c)| json!({
                    "degree": d, "norm": n, "coeff": c.to_string(),
                })).collect::<Vec<_>>(),
            }),
        }
    }

    /// Aligned text rendering, one term per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (&(x, y), c) in &self.terms {
            match self.base {
                SeriesBase::Prime(q) => {
                    out.push_str(&format!(
                        "{:>12}  * {}^(-{}*s1) * {}^(-{}*s2)\n",
                        c.to_string(),
                        q,
                        x,
                        q,
                        y
                    ));
                }
                SeriesBase::Global => {
                    out.push_str(&format!(
                        "{:>12}  * {}^(-s1) * {}^(-s2)\n",
                        c.to_string(),
                        x,
                        y
                    ));
                }
            }
        }
        out
    }
}

fn log_base(n: u64, q: u64) -> Result<u64, SeriesError> {
    let mut j = 0;
    let mut acc = 1u64;
    while acc < n {
        acc *= q;
        j += 1;
    }
    if acc == n {
        Ok(j)
    } else {
        Err(SeriesError::NotQPower { n, q })
    }
}

fn check_admissible(profile: &LatticeProfile, p: u64) -> Result<(), SeriesError> {
    let verdicts = admissible_primes(profile, p);
    match verdicts.iter().find(|&&(q, _)| q == p) {
        Some((_, Admissibility::Admissible)) => Ok(()),
        _ => Err(SeriesError::Quotient(QuotientError::InadmissiblePrime {
            p,
            c: profile.lattice.class_c,
        })),
    }
}

/// Size-by-count data at one level as exponent pairs (j, count).
fn level_terms(
    profile: &LatticeProfile,
    p: u64,
    f: u32,
    level: u32,
    kind: ZetaKind,
    method: Method,
    bounds: &Bounds,
) -> Result<BTreeMap<u64, u64>, SeriesError> {
    let ring = GaloisRing::make(p, level, f).map_err(|e| SeriesError::Ring(e.to_string()))?;
    let q = ring.residue_size();
    let brute = |kind| -> Result<BTreeMap<u64, u64>, SeriesError> {
        let g = build_group(profile, &ring, bounds)?;
        let counts: BTreeMap<u64, u64> = match kind {
            ZetaKind::Cc => conjugacy_classes(&g).sizes,
            ZetaKind::Irr => character_degrees(&g, bounds)?.degrees,
        };
        Ok(counts)
    };
    let linear = |kind| -> Result<BTreeMap<u64, u64>, SeriesError> {
        check_admissible(profile, p)?;
        let counts = match kind {
            ZetaKind::Cc => cc_zeta_from_a(profile, &ring, bounds)?.sizes,
            ZetaKind::Irr => irr_zeta_from_b(profile, &ring, bounds)?.degrees,
        };
        Ok(counts)
    };
    let counts = match method {
        Method::Brute => brute(kind)?,
        Method::Linear => linear(kind)?,
        Method::Both => {
            let b = brute(kind)?;
            let l = linear(kind)?;
            if b != l {
                return Err(SeriesError::OracleMismatch { p, level });
            }
            b
        }
    };
    counts
        .into_iter()
        .map(|(n, c)| Ok((log_base(n, q)?, c)))
        .collect()
}

/// Truncated local factor: sum over levels N = 0..N_max of the level-N zeta
/// polynomial in s1 weighted by q^{-N s2}; the N = 0 term is 1.
pub fn local_factor_truncated(
    profile: &LatticeProfile,
    p: u64,
    f: u32,
    n_max: u32,
    kind: ZetaKind,
    method: Method,
    bounds: &Bounds,
) -> Result<BivariateDirichletPolynomial, SeriesError> {
    check_admissible(profile, p)?;
    let q = pow_u64(p, f);
    let mut terms = BTreeMap::new();
    terms.insert((0, 0), BigUint::one());
    for level in 1..=n_max {
        for (j, count) in level_terms(profile, p, f, level, kind, method, bounds)? {
            terms.insert((j, level as u64), BigUint::from(count));
        }
    }
    Ok(BivariateDirichletPolynomial {
        base: SeriesBase::Prime(q),
        terms,
    })
}

/// Sets s1 = 0: the coefficient of q^{-m s2} becomes the class number (or
/// character count) at level m.
pub fn specialize_class_number(
    z: &BivariateDirichletPolynomial,
) -> BTreeMap<u64, BigUint> {
    let mut out: BTreeMap<u64, BigUint> = BTreeMap::new();
    for (&(_, m), c) in &z.terms {
        *out.entry(m).or_insert_with(BigUint::zero) += c;
    }
    out
}

/// Finite Euler product over rational primes up to the bound; inadmissible
/// primes are skipped and reported, never silently dropped.
pub struct EulerAssembly {
    pub series: BivariateDirichletPolynomial,
    pub used_primes: Vec<u64>,
    pub skipped: Vec<(u64, String)>,
}

pub fn euler_assemble(
    profile: &LatticeProfile,
    kind: ZetaKind,
    primes_up_to: u64,
    n_max: u32,
    method: Method,
    bounds: &Bounds,
) -> Result<EulerAssembly, SeriesError> {
    let verdicts = admissible_primes(profile, primes_up_to);
    let mut used_primes = Vec::new();
    let mut skipped = Vec::new();
    for (p, v) in &verdicts {
        match v {
            Admissibility::Admissible => used_primes.push(*p),
            other => skipped.push((*p, format!("{other:?}"))),
        }
    }
    let locals: Vec<Result<BivariateDirichletPolynomial, SeriesError>> = used_primes
        .par_iter()
        .map(|&p| {
            local_factor_truncated(profile, p, 1, n_max, kind, method, bounds)
                .map(|l| l.globalize(p))
        })
        .collect();
    let mut series = BivariateDirichletPolynomial::one(SeriesBase::Global);
    for l in locals {
        series = series.mul_global(&l?);
    }
    Ok(EulerAssembly {
        series,
        used_primes,
        skipped,
    })
}

/// Per-key polynomials in q with exact rational coefficients, fitted from the
/// local factors at several primes and checked at a holdout prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientLaw {
    /// (j, m) -> polynomial coefficients, ascending in the power of q
    pub laws: BTreeMap<(u64, u64), Vec<BigRational>>,
    /// m -> law for the class-number specialization coefficient
    pub specialized_laws: BTreeMap<u64, Vec<BigRational>>,
    pub source_primes: Vec<u64>,
    pub holdout_prime: u64,
}

pub fn eval_poly(coeffs: &[BigRational], q: u64) -> BigRational {
    let qb = BigRational::from_integer(BigInt::from(q));
    let mut acc = BigRational::zero();
    for c in coeffs.iter().rev() {
        acc = acc * &qb + c;
    }
    acc
}

/// Exact Lagrange interpolation through (x_i, y_i), returned in the monomial
/// basis with ascending powers and trailing zeros trimmed.
fn interpolate(points: &[(u64, BigUint)]) -> Vec<BigRational> {
    let n = points.len();
    let xs: Vec<BigRational> = points
        .iter()
        .map(|&(x, _)| BigRational::from_integer(BigInt::from(x)))
        .collect();
    let mut acc = vec![BigRational::zero(); n];
    for i in 0..n {
        // numerator polynomial prod_{k != i} (X - x_k), coefficients ascending
        let mut num = vec![BigRational::one()];
        let mut denom = BigRational::one();
        for k in 0..n {
            if k == i {
                continue;
            }
            let mut next = vec![BigRational::zero(); num.len() + 1];
            for (d, c) in num.iter().enumerate() {
                next[d + 1] += c;
                next[d] -= c * &xs[k];
            }
            num = next;
            denom *= &xs[i] - &xs[k];
        }
        let yi = BigRational::from_integer(BigInt::from(points[i].1.clone()));
        let scale = yi / denom;
        for (d, c) in num.iter().enumerate() {
            acc[d] += c * &scale;
        }
    }
    while acc.len() > 1 && acc.last().map(|c| c.is_zero()) == Some(true) {
        acc.pop();
    }
    acc
}

pub(crate) fn fit_poly(
    points: &[(u64, BigUint)],
    holdout: (u64, BigUint),
    key: (u64, u64),
) -> Result<Vec<BigRational>, SeriesError> {
    let law = interpolate(points);
    let predicted = eval_poly(&law, holdout.0);
    let expected = BigRational::from_integer(BigInt::from(holdout.1));
    if predicted != expected {
        return Err(SeriesError::InterpolationInconsistent {
            holdout: holdout.0,
            key,
        });
    }
    Ok(law)
}

/// Fits per-coefficient laws from f = 1 local factors at the given primes,
/// using the last prime as the mandatory holdout.
pub fn fit_coefficient_law(
    profile: &LatticeProfile,
    kind: ZetaKind,
    primes: &[u64],
    n_max: u32,
    method: Method,
    bounds: &Bounds,
) -> Result<CoefficientLaw, SeriesError> {
    if primes.len() < 3 {
        return Err(SeriesError::NeedMorePrimes {
            need: 3,
            got: primes.len(),
        });
    }
    let locals: Vec<(u64, BivariateDirichletPolynomial)> = primes
        .par_iter()
        .map(|&p| {
            local_factor_truncated(profile, p, 1, n_max, kind, method, bounds).map(|l| (p, l))
        })
        .collect::<Result<_, _>>()?;
    let (holdout_prime, holdout_local) = locals.last().unwrap().clone();
    let fit_sources = &locals[..locals.len() - 1];

    let mut keys: std::collections::BTreeSet<(u64, u64)> = std::collections::BTreeSet::new();
    for (_, l) in &locals {
        keys.extend(l.terms.keys().copied());
    }
    let coeff_at = |l: &BivariateDirichletPolynomial, key: &(u64, u64)| -> BigUint {
        l.terms.get(key).cloned().unwrap_or_else(BigUint::zero)
    };

    let mut laws = BTreeMap::new();
    for key in &keys {
        let points: Vec<(u64, BigUint)> = fit_sources
            .iter()
            .map(|(p, l)| (*p, coeff_at(l, key)))
            .collect();
        let law = fit_poly(&points, (holdout_prime, coeff_at(&holdout_local, key)), *key)?;
        laws.insert(*key, law);
    }

    let mut specialized_laws = BTreeMap::new();
    let spec: Vec<(u64, BTreeMap<u64, BigUint>)> = locals
        .iter()
        .map(|(p, l)| (*p, specialize_class_number(l)))
        .collect();
    for m in 0..=n_max as u64 {
        let at = |s: &BTreeMap<u64, BigUint>| s.get(&m).cloned().unwrap_or_else(BigUint::zero);
        let points: Vec<(u64, BigUint)> = spec[..spec.len() - 1]
            .iter()
            .map(|(p, s)| (*p, at(s)))
            .collect();
        let law = fit_poly(
            &points,
            (holdout_prime, at(&spec.last().unwrap().1)),
            (u64::MAX, m),
        )
        .map_err(|e| match e {
            SeriesError::InterpolationInconsistent { holdout, .. } => {
                SeriesError::InterpolationInconsistent {
                    holdout,
                    key: (0, m),
                }
            }
            other => other,
        })?;
        specialized_laws.insert(m, law);
    }

    Ok(CoefficientLaw {
        laws,
        specialized_laws,
        source_primes: primes[..primes.len() - 1].to_vec(),
        holdout_prime,
    })
}

impl CoefficientLaw {
    pub fn to_json(&self) -> serde_json::Value {
        let render = |law: &Vec<BigRational>| -> Vec<String> {
            law.iter().map(|c| c.to_string()).collect()
        };
        json!({
            "source_primes": self.source_primes,
            "holdout_prime": self.holdout_prime,
            "laws": self.laws.iter().map(|(&(j, m), law)| json!({
                "j": j, "m": m, "poly_ascending": render(law),
            })).collect::<Vec<_>>(),
            "specialized_laws": self.specialized_laws.iter().map(|(&m, law)| json!({
                "m": m, "poly_ascending": render(law),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Renders an exact-rational polynomial in q, highest power first.
pub fn render_poly(coeffs: &[BigRational]) -> String {
    let mut parts = Vec::new();
    for (d, c) in coeffs.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        let var = match d {
            0 => String::new(),
            1 => "q".to_string(),
            _ => format!("q^{d}"),
        };
        let body = if var.is_empty() {
            mag.to_string()
        } else if mag.is_one() {
            var
        } else {
            format!("{mag}*{var}")
        };
        if parts.is_empty() {
            parts.push(if c.is_negative() {
                format!("-{body}")
            } else {
                body
            });
        } else {
            parts.push(format!("{} {body}", if c.is_negative() { "-" } else { "+" }));
        }
    }
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join(" ")
    }
}
