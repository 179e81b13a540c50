//! Evaluates the Xi-functions and ray-product closed forms of Denef-type
//! formulae from user-supplied numerical data, with exact rational partial
//! sums, geometric tail bounds, and a cross-check of truncated cone sums
//! against closed forms.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::domain::parse_rational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DenefError {
    #[error("bad numerical data: {0}")]
    BadData(String),
    #[error("sum diverges at this point: direction {0} has nonnegative exponent slope")]
    DivergentAtPoint(String),
    #[error("summand exponent {0} is not an integer; exact evaluation impossible")]
    NonIntegralExponent(String),
    #[error("ray {0} has exponent zero at this point (pole)")]
    PoleHit(usize),
    #[error("truncated sum and closed form differ beyond the tail bound at grid points {0:?}")]
    MismatchBeyondTail(Vec<usize>),
}

/// One (kappa, iota) pair of the numerical data: kappa selects the s-variable,
/// `n_u` holds N_{u,kappa,iota} per u in T, `e` is e_{kappa,iota} and
/// `d_shift` the optional d_{kappa,iota}.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KappaIota {
    pub kappa: usize,
    pub n_u: Vec<u32>,
    pub e: u32,
    pub d_shift: u32,
}

/// Numerical data of a principalization: all user-supplied, never computed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DenefData {
    /// matrix size d >= 1
    pub d: u32,
    /// number of s-variables
    pub l: usize,
    /// multiplicities nu_u per u in T (so |T| = nu.len())
    pub nu: Vec<u32>,
    pub pairs: Vec<KappaIota>,
    /// level N >= 1 of the congruence quotient
    pub level: u32,
}

impl DenefData {
    pub fn validate(&self) -> Result<(), DenefError> {
        if self.d < 1 {
            return Err(DenefError::BadData("d must be >= 1".to_string()));
        }
        if self.level < 1 {
            return Err(DenefError::BadData("level N must be >= 1".to_string()));
        }
        if self.nu.iter().any(|&v| v < 1) {
            return Err(DenefError::BadData("every nu_u must be >= 1".to_string()));
        }
        for (i, p) in self.pairs.iter().enumerate() {
            if p.kappa >= self.l {
                return Err(DenefError::BadData(format!(
                    "pair {i} references s-variable {} out of {}",
                    p.kappa, self.l
                )));
            }
            if p.n_u.len() != self.nu.len() {
                return Err(DenefError::BadData(format!(
                    "pair {i} has {} N_u entries, expected {}",
                    p.n_u.len(),
                    self.nu.len()
                )));
            }
        }
        for kappa in 0..self.l {
            if !self.pairs.iter().any(|p| p.kappa == kappa) {
                return Err(DenefError::BadData(format!(
                    "s-variable {kappa} has no (kappa, iota) pair"
                )));
            }
        }
        Ok(())
    }

    /// (1 - q^{-1})^{d+1} * q^{-N * binom(d, 2)}
    pub fn prefactor(&self, q: u64) -> BigRational {
        let qr = BigRational::from_integer(BigInt::from(q));
        let one = BigRational::one();
        let factor = &one - qr.recip();
        let mut acc = BigRational::one();
        for _ in 0..=self.d {
            acc *= &factor;
        }
        let binom = (self.d * self.d.saturating_sub(1)) / 2;
        acc * q_pow(q, -((self.level * binom) as i64))
    }
}

fn q_pow(q: u64, e: i64) -> BigRational {
    let p = BigInt::from(q).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::INFINITY)
}

#[derive(Debug, Clone)]
pub struct XiResult {
    pub value: BigRational,
    /// upper bound on the omitted tail, rounded up
    pub tail_bound: f64,
    pub terms: u64,
}

/// Exact partial sum of Xi^N_{U,(d)} over the box m_u in [N, N+depth-1] for
/// u in U and m_{t+1} in [1, depth], times the prefactor, plus a geometric
/// tail bound.  Requires every coordinate direction to have negative exponent
/// slope at the s-point; every summand exponent must be an integer.
pub fn xi_truncated(
    data: &DenefData,
    u_set: &[usize],
    q: u64,
    s: &[BigRational],
    depth: u32,
) -> Result<XiResult, DenefError> {
    data.validate()?;
    if s.len() != data.l {
        return Err(DenefError::BadData(format!(
            "s-point has {} coordinates, expected {}",
            s.len(),
            data.l
        )));
    }
    if depth < 1 {
        return Err(DenefError::BadData("depth must be >= 1".to_string()));
    }
    if u_set.iter().any(|&u| u >= data.nu.len()) {
        return Err(DenefError::BadData("U contains an index outside T".to_string()));
    }
    let dims = u_set.len() + 1; // last coordinate is m_{t+1}
    let last = dims - 1;

    // linear coefficient of direction `dir` in L(m)
    let l_coeff = |dir: usize| -> i64 {
        if dir == last {
            1
        } else {
            data.nu[u_set[dir]] as i64
        }
    };
    // coefficient of direction `dir` in L_{kappa iota}(m) for a given pair
    let pair_coeff = |p: &KappaIota, dir: usize| -> i64 {
        if dir == last {
            p.e as i64
        } else {
            p.n_u[u_set[dir]] as i64
        }
    };

    // slope bound per direction: L_dir - sum_kappa s_kappa * min_iota coeff
    for dir in 0..dims {
        let mut slope = BigRational::from_integer(BigInt::from(l_coeff(dir)));
        for kappa in 0..data.l {
            let min_c = data
                .pairs
                .iter()
                .filter(|p| p.kappa == kappa)
                .map(|p| pair_coeff(p, dir))
                .min()
                .unwrap();
            slope -= &s[kappa] * BigRational::from_integer(BigInt::from(min_c));
        }
        if !slope.is_negative() {
            let name = if dir == last {
                "m_{t+1}".to_string()
            } else {
                format!("m_u (u = {})", u_set[dir])
            };
            return Err(DenefError::DivergentAtPoint(name));
        }
    }

    // exact sum over the box
    let starts: Vec<i64> = (0..dims)
        .map(|dir| if dir == last { 1 } else { data.level as i64 })
        .collect();
    let mut m: Vec<i64> = starts.clone();
    let mut value = BigRational::zero();
    let mut terms = 0u64;
    loop {
        // E(m) = L(m) - sum_kappa s_kappa min_iota (L_{kappa iota}(m) - d_{kappa iota})
        let l_val: i64 = (0..dims).map(|dir| l_coeff(dir) * m[dir]).sum();
        let mut exponent = BigRational::from_integer(BigInt::from(l_val));
        for kappa in 0..data.l {
            let min_val = data
                .pairs
                .iter()
                .filter(|p| p.kappa == kappa)
                .map(|p| {
                    (0..dims).map(|dir| pair_coeff(p, dir) * m[dir]).sum::<i64>()
                        - p.d_shift as i64
                })
                .min()
                .unwrap();
            exponent -= &s[kappa] * BigRational::from_integer(BigInt::from(min_val));
        }
        if !exponent.is_integer() {
            return Err(DenefError::NonIntegralExponent(exponent.to_string()));
        }
        let e_int = exponent
            .to_integer()
            .to_i64()
            .ok_or_else(|| DenefError::BadData("exponent overflow".to_string()))?;
        value += q_pow(q, e_int);
        terms += 1;
        // advance the box counter
        let mut dir = 0;
        loop {
            if dir == dims {
                break;
            }
            m[dir] += 1;
            if m[dir] < starts[dir] + depth as i64 {
                break;
            }
            m[dir] = starts[dir];
            dir += 1;
        }
        if dir == dims {
            break;
        }
    }

    // tail bound: E(m) <= sum_dir slope_dir m_dir + C with
    // C = sum_kappa s_kappa max_iota d_{kappa iota}; union bound over the
    // directions that exceed the box, geometric in each.
    let slopes_f: Vec<f64> = (0..dims)
        .map(|dir| {
            let mut slope = BigRational::from_integer(BigInt::from(l_coeff(dir)));
            for kappa in 0..data.l {
                let min_c = data
                    .pairs
                    .iter()
                    .filter(|p| p.kappa == kappa)
                    .map(|p| pair_coeff(p, dir))
                    .min()
                    .unwrap();
                slope -= &s[kappa] * BigRational::from_integer(BigInt::from(min_c));
            }
            rational_to_f64(&slope)
        })
        .collect();
    let mut c_const = BigRational::zero();
    for kappa in 0..data.l {
        let max_d = data
            .pairs
            .iter()
            .filter(|p| p.kappa == kappa)
            .map(|p| p.d_shift as i64)
            .max()
            .unwrap();
        c_const += &s[kappa] * BigRational::from_integer(BigInt::from(max_d));
    }
    let qf = q as f64;
    let geo_from = |slope: f64, start: i64| -> f64 {
        let x = qf.powf(slope);
        x.powi(start as i32) / (1.0 - x)
    };
    let mut tail = 0.0f64;
    for dir in 0..dims {
        let mut t = qf.powf(rational_to_f64(&c_const));
        for d2 in 0..dims {
            if d2 == dir {
                t *= geo_from(slopes_f[d2], starts[d2] + depth as i64);
            } else {
                t *= geo_from(slopes_f[d2], starts[d2]);
            }
        }
        tail += t;
    }
    let prefactor = data.prefactor(q);
    tail *= rational_to_f64(&prefactor.abs()) * 1.000001;

    Ok(XiResult {
        value: prefactor * value,
        tail_bound: tail,
        terms,
    })
}

/// A single ray (A_{1j}, A_{2j}, B_j) with exact rational entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ray {
    pub a1: BigRational,
    pub a2: BigRational,
    pub b: BigRational,
}

/// A cone: the rays it uses, its W' membership, and the user-supplied weight
/// c_i * (q-1)^{|U_i|} split into the integer c_i and |U_i|.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cone {
    pub rays: Vec<usize>,
    pub in_w_prime: bool,
    pub weight_c: BigInt,
    pub u_size: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RayData {
    pub rays: Vec<Ray>,
    pub cones: Vec<Cone>,
}

impl RayData {
    /// Checks index consistency and the A-sum flag: the A-vectors of a cone
    /// sum to zero iff the cone is outside W'.  With `strict_b` the sign
    /// condition B_j >= 0 is enforced as well.
    pub fn validate(&self, strict_b: bool) -> Result<(), DenefError> {
        for (j, r) in self.rays.iter().enumerate() {
            if strict_b && r.b.is_negative() {
                return Err(DenefError::BadData(format!("ray {j} has B < 0")));
            }
        }
        for (i, cone) in self.cones.iter().enumerate() {
            if cone.rays.iter().any(|&j| j >= self.rays.len()) {
                return Err(DenefError::BadData(format!(
                    "cone {i} references a missing ray"
                )));
            }
            let mut sum1 = BigRational::zero();
            let mut sum2 = BigRational::zero();
            for &j in &cone.rays {
                sum1 += &self.rays[j].a1;
                sum2 += &self.rays[j].a2;
            }
            let zero_sum = sum1.is_zero() && sum2.is_zero();
            if zero_sum == cone.in_w_prime {
                return Err(DenefError::BadData(format!(
                    "cone {i}: A-vector sum is zero iff the cone is outside W'"
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "rays": self.rays.iter().map(|r| json!({
                "a1": r.a1.to_string(), "a2": r.a2.to_string(), "b": r.b.to_string(),
            })).collect::<Vec<_>>(),
            "cones": self.cones.iter().map(|c| json!({
                "rays": c.rays,
                "in_w_prime": c.in_w_prime,
                "weight_c": c.weight_c.to_string(),
                "u_size": c.u_size,
            })).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<RayData, String> {
        let rays = value["rays"]
            .as_array()
            .ok_or("missing rays list")?
            .iter()
            .map(|r| {
                let field = |k: &str| -> Result<BigRational, String> {
                    parse_rational(r[k].as_str().ok_or(format!("missing ray field {k}"))?)
                };
                Ok(Ray {
                    a1: field("a1")?,
                    a2: field("a2")?,
                    b: field("b")?,
                })
            })
            .collect::<Result<Vec<_>, String>>()?;
        let cones = value["cones"]
            .as_array()
            .ok_or("missing cones list")?
            .iter()
            .map(|c| {
                Ok(Cone {
                    rays: c["rays"]
                        .as_array()
                        .ok_or("missing cone rays")?
                        .iter()
                        .map(|v| v.as_u64().map(|x| x as usize).ok_or("bad ray index"))
                        .collect::<Result<Vec<_>, _>>()?,
                    in_w_prime: c["in_w_prime"].as_bool().ok_or("missing in_w_prime")?,
                    weight_c: c["weight_c"]
                        .as_str()
                        .ok_or("missing weight_c")?
                        .parse()
                        .map_err(|_| "bad weight_c")?,
                    u_size: c["u_size"].as_u64().ok_or("missing u_size")? as u32,
                })
            })
            .collect::<Result<Vec<_>, String>>()?;
        Ok(RayData { rays, cones })
    }
}

/// Sum over cones i in W' of c_i (q-1)^{|U_i|} prod_{j in M_i}
/// x_j / (1 - x_j) with x_j = q^{-(A_{1j} s1 + A_{2j} s2 + B_j)}.  Every used
/// ray must have positive integral exponent at the point.
pub fn ray_closed_form(
    data: &RayData,
    q: u64,
    s1: &BigRational,
    s2: &BigRational,
) -> Result<BigRational, DenefError> {
    let mut total = BigRational::zero();
    let q_minus_1 = BigRational::from_integer(BigInt::from(q - 1));
    for cone in &data.cones {
        if !cone.in_w_prime {
            continue;
        }
        let mut prod = BigRational::from_integer(cone.weight_c.clone());
        for _ in 0..cone.u_size {
            prod *= &q_minus_1;
        }
        for &j in &cone.rays {
            let r = &data.rays[j];
            let exp = &r.a1 * s1 + &r.a2 * s2 + &r.b;
            if exp.is_zero() {
                return Err(DenefError::PoleHit(j));
            }
            if exp.is_negative() {
                return Err(DenefError::DivergentAtPoint(format!("ray {j}")));
            }
            if !exp.is_integer() {
                return Err(DenefError::NonIntegralExponent(exp.to_string()));
            }
            let e_int = exp
                .to_integer()
                .to_i64()
                .ok_or_else(|| DenefError::BadData("exponent overflow".to_string()))?;
            let x = q_pow(q, -e_int);
            prod *= &x / (BigRational::one() - &x);
        }
        total += prod;
    }
    Ok(total)
}

#[derive(Debug, Clone, Serialize)]
pub struct ShapePoint {
    pub s: Vec<String>,
    pub xi_value: String,
    pub closed_value: String,
    pub difference: f64,
    pub tail_bound: f64,
    pub pass: bool,
    /// the tail bound is too loose to be informative
    pub low_power: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShapeReport {
    pub points: Vec<ShapePoint>,
    pub all_pass: bool,
}

impl ShapeReport {
    pub fn render(&self) -> String {
        let mut out = String::from("point | xi | closed | diff | tail | verdict\n");
        for p in &self.points {
            out.push_str(&format!(
                "({}) | {} | {} | {:.3e} | {:.3e} | {}{}\n",
                p.s.join(", "),
                p.xi_value,
                p.closed_value,
                p.difference,
                p.tail_bound,
                if p.pass { "pass" } else { "FAIL" },
                if p.low_power { " (low power)" } else { "" },
            ));
        }
        out
    }
}

const LOW_POWER_THRESHOLD: f64 = 0.1;

/// Compares the truncated Xi sum against prefactor times the ray closed form
/// on a grid of s-points; passes iff the difference is within the tail bound
/// everywhere.
pub fn denef_shape_check(
    data: &DenefData,
    u_set: &[usize],
    rays: &RayData,
    q: u64,
    grid: &[Vec<BigRational>],
    depth: u32,
) -> Result<ShapeReport, DenefError> {
    rays.validate(false)?;
    let rows: Vec<Result<ShapePoint, DenefError>> = grid
        .par_iter()
        .map(|s| {
            let xi = xi_truncated(data, u_set, q, s, depth)?;
            let zero = BigRational::zero();
            let s2 = s.get(1).unwrap_or(&zero);
            let closed = data.prefactor(q) * ray_closed_form(rays, q, &s[0], s2)?;
            let diff = rational_to_f64(&(&xi.value - &closed).abs());
            let pass = diff <= xi.tail_bound;
            Ok(ShapePoint {
                s: s.iter().map(|x| x.to_string()).collect(),
                xi_value: xi.value.to_string(),
                closed_value: closed.to_string(),
                difference: diff,
                tail_bound: xi.tail_bound,
                pass,
                low_power: xi.tail_bound > LOW_POWER_THRESHOLD,
            })
        })
        .collect();
    let mut points = Vec::with_capacity(rows.len());
    for row in rows {
        points.push(row?);
    }
    let failures: Vec<usize> = points
        .iter()
        .enumerate()
        .filter(|(_, p)| !p.pass)
        .map(|(i, _)| i)
        .collect();
    if !failures.is_empty() {
        return Err(DenefError::MismatchBeyondTail(failures));
    }
    Ok(ShapeReport {
        all_pass: true,
        points,
    })
}
