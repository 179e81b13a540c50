//! Polyhedral convergence and meromorphy domains in the (Re s1, Re s2)
//! plane: W_c(delta) built from sparse exponent polynomials, canonical
//! intersections of open half-planes, the boundary-sharing index set R,
//! cyclotomic factor detection, and numerical convergence probing of the
//! associated Euler products over rational primes.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DomainError {
    #[error("input polynomial has a cyclotomic factor (1 - X^{0:?})")]
    CyclotomicInput([u32; 3]),
    #[error("input polynomial is constant")]
    ConstantInput,
    #[error("probe point is within {margin} of the W_c(1) boundary (distance {distance})")]
    InconclusiveBoundary { distance: String, margin: String },
    #[error("bad input: {0}")]
    BadInput(String),
}

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn parse_rational(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| format!("bad numerator in {s}"))?;
        let d: BigInt = den.trim().parse().map_err(|_| format!("bad denominator in {s}"))?;
        if d.is_zero() {
            return Err(format!("zero denominator in {s}"));
        }
        Ok(BigRational::new(n, d))
    } else {
        let n: BigInt = s.parse().map_err(|_| format!("bad rational {s}"))?;
        Ok(BigRational::from_integer(n))
    }
}

/// Open half-plane {(s1, s2) : a1 s1 + a2 s2 > b}, stored in lowest terms:
/// coefficients are scaled by the unique positive rational making (a1, a2, b)
/// a primitive integer triple, so set equality is structural equality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct HalfPlane {
    pub a1: BigRational,
    pub a2: BigRational,
    pub b: BigRational,
}

impl HalfPlane {
    pub fn new(a1: BigRational, a2: BigRational, b: BigRational) -> HalfPlane {
        let mut h = HalfPlane { a1, a2, b };
        h.normalize();
        h
    }

    fn normalize(&mut self) {
        let lcm_den = [&self.a1, &self.a2, &self.b]
            .iter()
            .fold(BigInt::one(), |acc, r| num_integer::lcm(acc, r.denom().clone()));
        let ints: Vec<BigInt> = [&self.a1, &self.a2, &self.b]
            .iter()
            .map(|r| r.numer() * (&lcm_den / r.denom()))
            .collect();
        let mut g = ints
            .iter()
            .fold(BigInt::zero(), |acc, n| num_integer::gcd(acc, n.clone()));
        if g.is_zero() {
            g = BigInt::one();
        }
        self.a1 = BigRational::from_integer(&ints[0] / &g);
        self.a2 = BigRational::from_integer(&ints[1] / &g);
        self.b = BigRational::from_integer(&ints[2] / &g);
    }

    pub fn is_trivial(&self) -> bool {
        self.a1.is_zero() && self.a2.is_zero()
    }

    /// For trivial half-planes: whole plane iff b < 0, empty otherwise.
    pub fn trivial_is_full(&self) -> bool {
        self.b.is_negative()
    }

    pub fn contains(&self, s1: &BigRational, s2: &BigRational) -> bool {
        &self.a1 * s1 + &self.a2 * s2 > self.b
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyhedralDomain {
    pub halfplanes: Vec<HalfPlane>,
    pub canonical: bool,
}

impl PolyhedralDomain {
    pub fn new(halfplanes: Vec<HalfPlane>) -> PolyhedralDomain {
        PolyhedralDomain {
            halfplanes,
            canonical: false,
        }
    }

    pub fn contains(&self, s1: &BigRational, s2: &BigRational) -> bool {
        self.halfplanes.iter().all(|h| {
            if h.is_trivial() {
                h.trivial_is_full()
            } else {
                h.contains(s1, s2)
            }
        })
    }

    /// JSON list of {a1, a2, b} in lowest terms, sorted lexicographically.
    pub fn to_json(&self) -> serde_json::Value {
        let mut sorted = self.halfplanes.clone();
        sorted.sort();
        json!(sorted
            .iter()
            .map(|h| json!({
                "a1": h.a1.to_string(),
                "a2": h.a2.to_string(),
                "b": h.b.to_string(),
            }))
            .collect::<Vec<_>>())
    }

    pub fn from_json(value: &serde_json::Value) -> Result<PolyhedralDomain, String> {
        let arr = value.as_array().ok_or("domain JSON must be a list")?;
        let mut halfplanes = Vec::new();
        for item in arr {
            let field = |k: &str| -> Result<BigRational, String> {
                parse_rational(item[k].as_str().ok_or(format!("missing field {k}"))?)
            };
            halfplanes.push(HalfPlane::new(field("a1")?, field("a2")?, field("b")?));
        }
        Ok(PolyhedralDomain::new(halfplanes))
    }
}

/// Strict or weak linear constraint a1 x + a2 y (>|>=) b, the working
/// representation for exact feasibility tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Rel {
    Strict,
    Weak,
}

#[derive(Debug, Clone)]
struct LinCon {
    a1: BigRational,
    a2: BigRational,
    rel: Rel,
    b: BigRational,
}

impl LinCon {
    fn from_halfplane(h: &HalfPlane) -> LinCon {
        LinCon {
            a1: h.a1.clone(),
            a2: h.a2.clone(),
            rel: Rel::Strict,
            b: h.b.clone(),
        }
    }

    /// The closed complement a1 x + a2 y <= b, as a weak greater-than.
    fn negation_of(h: &HalfPlane) -> LinCon {
        LinCon {
            a1: -h.a1.clone(),
            a2: -h.a2.clone(),
            rel: Rel::Weak,
            b: -h.b.clone(),
        }
    }
}

fn combine_rel(r1: Rel, r2: Rel) -> Rel {
    if r1 == Rel::Strict || r2 == Rel::Strict {
        Rel::Strict
    } else {
        Rel::Weak
    }
}

/// Exact feasibility of a 2-variable system by Fourier-Motzkin elimination.
fn feasible(cons: &[LinCon]) -> bool {
    // eliminate y
    let mut lowers = Vec::new(); // y rel (b - a1 x) / a2, a2 > 0
    let mut uppers = Vec::new(); // y rel-below ..., a2 < 0
    let mut rest = Vec::new(); // (a1, rel, b): a1 x rel b
    for c in cons {
        if c.a2.is_zero() {
            rest.push((c.a1.clone(), c.rel, c.b.clone()));
        } else if c.a2.is_positive() {
            lowers.push(((&c.b / &c.a2), (-&c.a1 / &c.a2), c.rel));
        } else {
            uppers.push(((&c.b / &c.a2), (-&c.a1 / &c.a2), c.rel));
        }
    }
    for (bl, al, rl) in &lowers {
        for (bu, au, ru) in &uppers {
            // lower(x) < upper(x): (au - al) x + (bu - bl) rel-greater 0
            rest.push((au - al, combine_rel(*rl, *ru), bl - bu));
        }
    }
    // eliminate x
    let mut lo: Option<(BigRational, Rel)> = None;
    let mut hi: Option<(BigRational, Rel)> = None;
    for (a, rel, b) in &rest {
        if a.is_zero() {
            let ok = match rel {
                Rel::Strict => b.is_negative(),
                Rel::Weak => !b.is_positive(),
            };
            if !ok {
                return false;
            }
        } else if a.is_positive() {
            let bound = b / a;
            if lo.as_ref().is_none_or(|(v, r)| {
                bound > *v || (bound == *v && *r == Rel::Weak && *rel == Rel::Strict)
            }) {
                lo = Some((bound, *rel));
            }
        } else {
            let bound = b / a;
            if hi.as_ref().is_none_or(|(v, r)| {
                bound < *v || (bound == *v && *r == Rel::Weak && *rel == Rel::Strict)
            }) {
                hi = Some((bound, *rel));
            }
        }
    }
    match (lo, hi) {
        (Some((l, rl)), Some((h, rh))) => {
            l < h || (l == h && rl == Rel::Weak && rh == Rel::Weak)
        }
        _ => true,
    }
}

/// Removes half-planes implied by the rest; exact, idempotent.  Trivial
/// full-plane constraints are dropped outright.
pub fn canonicalize(d: &PolyhedralDomain) -> PolyhedralDomain {
    let mut planes: Vec<HalfPlane> = Vec::new();
    for h in &d.halfplanes {
        if h.is_trivial() && h.trivial_is_full() {
            continue;
        }
        if !planes.contains(h) {
            planes.push(h.clone());
        }
    }
    loop {
        let mut removed = false;
        for i in 0..planes.len() {
            let others: Vec<LinCon> = planes
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, h)| LinCon::from_halfplane(h))
                .collect();
            let mut sys = others;
            sys.push(LinCon::negation_of(&planes[i]));
            if !feasible(&sys) {
                planes.remove(i);
                removed = true;
                break;
            }
        }
        if !removed {
            break;
        }
    }
    PolyhedralDomain {
        halfplanes: planes,
        canonical: true,
    }
}

/// True iff the intersection of `halfplanes` is contained in `target`.
pub fn contained_in(halfplanes: &[HalfPlane], target: &HalfPlane) -> bool {
    let mut sys: Vec<LinCon> = halfplanes.iter().map(LinCon::from_halfplane).collect();
    sys.push(LinCon::negation_of(target));
    !feasible(&sys)
}

/// Sparse exponent polynomial h = 1 + sum a_j X1^{e1} X2^{e2} X3^{e3}; the
/// map includes the constant term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseExponentPolynomial {
    pub terms: BTreeMap<[u32; 3], i64>,
}

fn total_deg(e: &[u32; 3]) -> u32 {
    e[0] + e[1] + e[2]
}

impl SparseExponentPolynomial {
    pub fn one() -> SparseExponentPolynomial {
        let mut terms = BTreeMap::new();
        terms.insert([0, 0, 0], 1);
        SparseExponentPolynomial { terms }
    }

    /// Builds 1 + the given terms; exponent triples must be distinct and
    /// nonzero, coefficients nonzero.
    pub fn from_terms(terms: &[(i64, [u32; 3])]) -> Result<SparseExponentPolynomial, DomainError> {
        let mut map = BTreeMap::new();
        map.insert([0, 0, 0], 1i64);
        for &(c, e) in terms {
            if c == 0 {
                return Err(DomainError::BadInput("zero coefficient".to_string()));
            }
            if e == [0, 0, 0] {
                return Err(DomainError::BadInput("zero exponent triple".to_string()));
            }
            if map.insert(e, c).is_some() {
                return Err(DomainError::BadInput(format!("repeated exponent {e:?}")));
            }
        }
        Ok(SparseExponentPolynomial { terms: map })
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&[0, 0, 0]) == Some(&1)
    }

    /// Nonconstant terms (the h-hat part).
    pub fn hat_terms(&self) -> impl Iterator<Item = (&[u32; 3], &i64)> {
        self.terms.iter().filter(|(e, _)| **e != [0, 0, 0])
    }

    pub fn mul(&self, other: &SparseExponentPolynomial) -> SparseExponentPolynomial {
        let mut terms: BTreeMap<[u32; 3], i64> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e = [e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2]];
                let entry = terms.entry(e).or_insert(0);
                *entry += c1 * c2;
                if *entry == 0 {
                    terms.remove(&e);
                }
            }
        }
        SparseExponentPolynomial { terms }
    }

    pub fn to_json(&self, c: i64) -> serde_json::Value {
        json!({
            "c": c,
            "terms": self.hat_terms().map(|(e, a)| json!({
                "coeff": a, "e1": e[0], "e2": e[1], "e3": e[2],
            })).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(
        value: &serde_json::Value,
    ) -> Result<(SparseExponentPolynomial, i64), String> {
        let c = value["c"].as_i64().ok_or("missing integer field c")?;
        let arr = value["terms"].as_array().ok_or("missing terms list")?;
        let mut terms = Vec::new();
        for t in arr {
            let f = |k: &str| -> Result<i64, String> {
                t[k].as_i64().ok_or(format!("missing integer field {k}"))
            };
            terms.push((
                f("coeff")?,
                [f("e1")? as u32, f("e2")? as u32, f("e3")? as u32],
            ));
        }
        let poly = SparseExponentPolynomial::from_terms(&terms).map_err(|e| e.to_string())?;
        Ok((poly, c))
    }
}

/// Result of cyclotomic factor extraction: factors (1 - X^lambda)^gamma and
/// the cyclotomic-free residual; `cyclotomic` means the residual is 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclotomicReport {
    pub factors: Vec<([u32; 3], u32)>,
    pub residual: SparseExponentPolynomial,
    pub cyclotomic: bool,
}

/// Exact division h / (1 - X^lambda) by minimal-term elimination; None if
/// the division is not exact.
fn divide_by_cyclotomic(
    h: &SparseExponentPolynomial,
    lambda: [u32; 3],
) -> Option<SparseExponentPolynomial> {
    let max_deg = h.terms.keys().map(total_deg).max().unwrap_or(0);
    let mut rem = h.terms.clone();
    let mut quot: BTreeMap<[u32; 3], i64> = BTreeMap::new();
    loop {
        let next = rem
            .iter()
            .min_by_key(|&(e, _)| (total_deg(e), *e))
            .map(|(&e, &c)| (e, c));
        let Some((e, c)) = next else {
            break;
        };
        if total_deg(&e) > max_deg {
            return None;
        }
        *quot.entry(e).or_insert(0) += c;
        rem.remove(&e);
        let shifted = [e[0] + lambda[0], e[1] + lambda[1], e[2] + lambda[2]];
        let entry = rem.entry(shifted).or_insert(0);
        *entry += c;
        if *entry == 0 {
            rem.remove(&shifted);
        }
    }
    Some(SparseExponentPolynomial { terms: quot })
}

/// Greedily strips factors (1 - X^lambda), lambda taken from the minimal
/// term of the current residual.
pub fn detect_cyclotomic(h: &SparseExponentPolynomial) -> CyclotomicReport {
    let mut cur = h.clone();
    let mut factors: BTreeMap<[u32; 3], u32> = BTreeMap::new();
    loop {
        if cur.is_one() {
            break;
        }
        let Some((&lambda, &coeff)) = cur
            .terms
            .iter()
            .filter(|&(e, _)| *e != [0, 0, 0])
            .min_by_key(|&(e, _)| (total_deg(e), *e))
        else {
            break;
        };
        if coeff >= 0 {
            break; // a product of (1 - X^lambda) has a negative minimal term
        }
        match divide_by_cyclotomic(&cur, lambda) {
            Some(quot) if quot.terms.get(&[0, 0, 0]) == Some(&1) => {
                *factors.entry(lambda).or_insert(0) += 1;
                cur = quot;
            }
            _ => break,
        }
    }
    let cyclotomic = cur.is_one();
    CyclotomicReport {
        factors: factors.into_iter().collect(),
        residual: cur,
        cyclotomic,
    }
}

/// W_c(delta): one half-plane Re(a1 s1 + a2 s2) > delta - c*a3 per term of
/// h-hat, canonicalized.  Requires h non-constant and cyclotomic-free.
pub fn wc_domain(
    h: &SparseExponentPolynomial,
    c: i64,
    delta: &BigRational,
) -> Result<PolyhedralDomain, DomainError> {
    if h.is_one() {
        return Err(DomainError::ConstantInput);
    }
    let report = detect_cyclotomic(h);
    if let Some(&(lambda, _)) = report.factors.first() {
        return Err(DomainError::CyclotomicInput(lambda));
    }
    let halfplanes = h
        .hat_terms()
        .map(|(e, _)| {
            HalfPlane::new(
                rat(e[0] as i64),
                rat(e[1] as i64),
                delta - rat(c) * rat(e[2] as i64),
            )
        })
        .collect();
    Ok(canonicalize(&PolyhedralDomain::new(halfplanes)))
}

/// The boundary-sharing index set R: groups of equal half-planes (1-based
/// indices) whose common boundary carries part of the intersection boundary,
/// i.e. which survive canonicalization.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct RSet {
    pub indices: Vec<usize>,
    pub groups: Vec<Vec<usize>>,
}

pub fn r_set(halfplanes: &[HalfPlane]) -> RSet {
    let mut groups: Vec<(HalfPlane, Vec<usize>)> = Vec::new();
    for (i, h) in halfplanes.iter().enumerate() {
        match groups.iter_mut().find(|(g, _)| g == h) {
            Some((_, idxs)) => idxs.push(i + 1),
            None => groups.push((h.clone(), vec![i + 1])),
        }
    }
    let mut indices = Vec::new();
    let mut essential_groups = Vec::new();
    for (gi, (h, idxs)) in groups.iter().enumerate() {
        let others: Vec<HalfPlane> = groups
            .iter()
            .enumerate()
            .filter(|&(gj, _)| gj != gi)
            .map(|(_, (g, _))| g.clone())
            .collect();
        if !contained_in(&others, h) {
            indices.extend(idxs.iter().copied());
            essential_groups.push(idxs.clone());
        }
    }
    indices.sort_unstable();
    RSet {
        indices,
        groups: essential_groups,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum ProbeVerdict {
    Converges,
    Diverges,
}

#[derive(Debug, Clone)]
pub struct ProbeReport {
    pub verdict: ProbeVerdict,
    /// minimal exponent over the terms of h-hat at the probe point
    pub min_exponent: Option<BigRational>,
    pub partial_sum: f64,
    pub last_increment: f64,
    pub primes_used: usize,
}

/// Sums |h-hat(q^{-sigma1}, q^{-sigma2}, q^{-c})| over primes q up to the
/// bound and reports a comparison-series verdict.  Points within `margin`
/// of the W_c(1) boundary are refused.
pub fn probe_convergence(
    h: &SparseExponentPolynomial,
    c: i64,
    sigma1: &BigRational,
    sigma2: &BigRational,
    prime_bound: u64,
    margin: &BigRational,
) -> Result<ProbeReport, DomainError> {
    let exps: Vec<(i64, BigRational)> = h
        .hat_terms()
        .map(|(e, &a)| {
            let exp = rat(e[0] as i64) * sigma1 + rat(e[1] as i64) * sigma2 + rat(c * e[2] as i64);
            (a, exp)
        })
        .collect();
    let min_exponent = exps.iter().map(|(_, e)| e.clone()).min();
    if let Some(me) = &min_exponent {
        let distance = (me - rat(1)).abs();
        if distance <= *margin {
            return Err(DomainError::InconclusiveBoundary {
                distance: distance.to_string(),
                margin: margin.to_string(),
            });
        }
    }
    let verdict = match &min_exponent {
        None => ProbeVerdict::Converges,
        Some(me) => {
            if *me > rat(1) {
                ProbeVerdict::Converges
            } else {
                ProbeVerdict::Diverges
            }
        }
    };
    let exps_f: Vec<(f64, f64)> = exps
        .iter()
        .map(|(a, e)| {
            (
                (a.abs()) as f64,
                e.numer().to_string().parse::<f64>().unwrap()
                    / e.denom().to_string().parse::<f64>().unwrap(),
            )
        })
        .collect();
    let primes = sieve(prime_bound);
    // fixed summation order keeps the trace deterministic
    let mut partial_sum = 0.0;
    let mut last_increment = 0.0;
    for &q in &primes {
        let term: f64 = exps_f
            .iter()
            .map(|&(a, e)| a * (q as f64).powf(-e))
            .sum();
        partial_sum += term;
        last_increment = term;
    }
    Ok(ProbeReport {
        verdict,
        min_exponent,
        partial_sum,
        last_increment,
        primes_used: primes.len(),
    })
}

fn sieve(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for q in 2..=n {
        if !composite[q] {
            primes.push(q as u64);
            let mut multiple = q * q;
            while multiple <= n {
                composite[multiple] = true;
                multiple += q;
            }
        }
    }
    primes
}
