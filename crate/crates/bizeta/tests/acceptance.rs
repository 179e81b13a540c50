//! Acceptance gate: one test per primary criterion, each printing a single
//! pass line on success.  Every check is exact unless explicitly a tail
//! bound.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use bizeta::denef::{
    denef_shape_check, xi_truncated, Cone, DenefData, KappaIota, Ray, RayData,
};
use bizeta::domain::{
    canonicalize, contained_in, detect_cyclotomic, probe_convergence, rat, wc_domain, HalfPlane,
    ProbeVerdict, SparseExponentPolynomial,
};
use bizeta::lattice::{corpus, profile, LatticeProfile};
use bizeta::orbit::{cc_zeta_from_a, irr_zeta_from_b};
use bizeta::quotient::{
    build_group, character_degrees, conjugacy_classes, Bounds, QuotientError,
};
use bizeta::ring::GaloisRing;
use bizeta::series::{
    eval_poly, fit_coefficient_law, local_factor_truncated, specialize_class_number, Method,
    ZetaKind,
};

const MAX_ORDER: u64 = 59049; // 3^10

fn corpus_profiles() -> Vec<LatticeProfile> {
    ["abelian_z2", "heisenberg", "heisenberg_plus_z", "free_class2_rank3"]
        .iter()
        .map(|name| profile(&corpus::by_name(name).unwrap()).unwrap())
        .collect()
}

/// (profile, ring, group order) for every corpus configuration of criterion 1
/// whose group fits in the 3^10 bound.
fn corpus_configs() -> Vec<(LatticeProfile, GaloisRing, u64)> {
    let mut out = Vec::new();
    for prof in corpus_profiles() {
        for p in [3u64, 5, 7] {
            for f in [1u32, 2] {
                for n in [1u32, 2] {
                    let ring = GaloisRing::make(p, n, f).unwrap();
                    let mut order = 1u64;
                    let mut fits = true;
                    for _ in 0..prof.h {
                        match order.checked_mul(ring.size()) {
                            Some(v) if v <= MAX_ORDER => order = v,
                            _ => {
                                fits = false;
                                break;
                            }
                        }
                    }
                    if fits {
                        out.push((prof.clone(), ring, order));
                    }
                }
            }
        }
    }
    out
}

#[test]
fn criterion_1_dual_oracle_conjugacy() {
    let bounds = Bounds::default();
    let mut checked = 0usize;
    for (prof, ring, order) in corpus_configs() {
        let g = build_group(&prof, &ring, &bounds).unwrap();
        let brute = conjugacy_classes(&g);
        let linear = cc_zeta_from_a(&prof, &ring, &bounds).unwrap();
        assert_eq!(
            brute.sizes, linear.sizes,
            "class-size histograms differ for {} over GR({}^{}, {})",
            prof.lattice.name,
            ring.p(),
            ring.level(),
            ring.inertia_degree()
        );
        assert_eq!(brute.k, linear.k);
        assert_eq!(brute.total_elements(), order);
        checked += 1;
    }
    assert!(checked >= 20, "only {checked} configurations in the sweep");
    println!("[PRIMARY 1] dual-oracle conjugacy equivalence ({checked} configurations): PASS");
}

#[test]
fn criterion_2_representation_moments_and_dixon() {
    let bounds = Bounds::default();
    let mut moment_runs = 0usize;
    let mut dixon_runs = 0usize;
    for (prof, ring, order) in corpus_configs() {
        let irr = irr_zeta_from_b(&prof, &ring, &bounds).unwrap();
        let cc = cc_zeta_from_a(&prof, &ring, &bounds).unwrap();
        assert_eq!(irr.k(), cc.k, "character count must equal class count");
        assert_eq!(irr.sum_of_squares(), order, "sum r_n n^2 must equal |G|");
        moment_runs += 1;
        if order <= bounds.max_dixon_order {
            let g = build_group(&prof, &ring, &bounds).unwrap();
            let dixon = character_degrees(&g, &bounds).unwrap();
            assert_eq!(dixon, irr, "Dixon degrees differ for {}", prof.lattice.name);
            dixon_runs += 1;
        }
    }
    assert!(moment_runs >= 20 && dixon_runs >= 10);
    println!(
        "[PRIMARY 2] representation moments ({moment_runs} runs) + Dixon equivalence ({dixon_runs} groups): PASS"
    );
}

#[test]
fn criterion_3_specialization_identity() {
    let bounds = Bounds::default();
    let mut checked = 0usize;
    for prof in corpus_profiles() {
        for p in [3u64, 5, 7] {
            for f in [1u32, 2] {
                // deepest level still inside the enumeration bound
                let n_max = (1..=2u32)
                    .filter(|&n| {
                        (prof.h as u32)
                            .checked_mul(n * f)
                            .map(|e| {
                                (0..e).try_fold(1u64, |acc, _| acc.checked_mul(p))
                                    .is_some_and(|v| v <= MAX_ORDER)
                            })
                            .unwrap_or(false)
                    })
                    .max();
                let Some(n_max) = n_max else { continue };
                let cc = local_factor_truncated(
                    &prof, p, f, n_max, ZetaKind::Cc, Method::Linear, &bounds,
                )
                .unwrap();
                let irr = local_factor_truncated(
                    &prof, p, f, n_max, ZetaKind::Irr, Method::Linear, &bounds,
                )
                .unwrap();
                assert_eq!(
                    specialize_class_number(&cc),
                    specialize_class_number(&irr),
                    "specialization s1 = 0 differs for {} at p = {p}, f = {f}",
                    prof.lattice.name
                );
                checked += 1;
            }
        }
    }
    assert!(checked >= 15);
    println!("[PRIMARY 3] class-number specialization identity ({checked} configurations): PASS");
}

#[test]
fn criterion_4_field_independence() {
    let bounds = Bounds::default();

    // Heisenberg cc at N = 1, laws from p in {3, 5, 7} with holdout 11:
    // the class-number law is q^2 + q - 1 and evaluates to 89 at q = 9.
    let heis = profile(&corpus::by_name("heisenberg").unwrap()).unwrap();
    let law = fit_coefficient_law(&heis, ZetaKind::Cc, &[3, 5, 7, 11], 1, Method::Both, &bounds)
        .unwrap();
    let k_law = &law.specialized_laws[&1];
    assert_eq!(k_law, &vec![rat(-1), rat(1), rat(1)], "k-law must be q^2 + q - 1");
    assert_eq!(eval_poly(k_law, 9), rat(89));

    // Every (j, m) coefficient law at N = 1 must reproduce direct GR(3, 2)
    // enumeration for each lattice with |G(F_9)| <= 3^10.
    let mut coeff_checks = 0usize;
    for name in ["abelian_z2", "heisenberg", "heisenberg_plus_z"] {
        let prof = profile(&corpus::by_name(name).unwrap()).unwrap();
        for kind in [ZetaKind::Cc, ZetaKind::Irr] {
            let law = fit_coefficient_law(
                &prof,
                kind,
                &[3, 5, 7, 11, 13, 17],
                1,
                Method::Linear,
                &bounds,
            )
            .unwrap();
            let direct =
                local_factor_truncated(&prof, 3, 2, 1, kind, Method::Linear, &bounds).unwrap();
            let mut predicted: BTreeMap<(u64, u64), BigRational> = BTreeMap::new();
            for (key, coeffs) in &law.laws {
                predicted.insert(*key, eval_poly(coeffs, 9));
            }
            let direct_map: BTreeMap<(u64, u64), BigRational> = direct
                .terms
                .iter()
                .map(|(k, v)| (*k, BigRational::from_integer(BigInt::from(v.clone()))))
                .collect();
            assert_eq!(predicted, direct_map, "laws at q = 9 differ for {name} {kind:?}");
            coeff_checks += predicted.len();
        }
    }
    assert!(coeff_checks >= 10);
    println!(
        "[PRIMARY 4] field independence: k-law q^2+q-1 -> 89 and {coeff_checks} coefficient laws at q = 9: PASS"
    );
}

fn random_cyclotomic_free(rng: &mut StdRng) -> SparseExponentPolynomial {
    loop {
        let nterms = rng.gen_range(1..=3usize);
        let mut terms: Vec<(i64, [u32; 3])> = Vec::new();
        for _ in 0..nterms {
            let coeff = *[-2i64, -1, 1, 2].get(rng.gen_range(0..4)).unwrap();
            let e = [
                rng.gen_range(0..=3u32),
                rng.gen_range(0..=3u32),
                rng.gen_range(0..=3u32),
            ];
            if e == [0, 0, 0] {
                continue;
            }
            if terms.iter().any(|&(_, t)| t == e) {
                continue;
            }
            terms.push((coeff, e));
        }
        if terms.is_empty() {
            continue;
        }
        let Ok(h) = SparseExponentPolynomial::from_terms(&terms) else {
            continue;
        };
        let report = detect_cyclotomic(&h);
        if report.factors.is_empty() && !h.is_one() {
            return h;
        }
    }
}

#[test]
fn criterion_5_domain_suite() {
    let mut rng = StdRng::seed_from_u64(2024);

    // monotone nesting, idempotence and f-scaling on 200 random polynomials
    for _ in 0..200 {
        let h = random_cyclotomic_free(&mut rng);
        let c = rng.gen_range(1..=2i64);
        let wc1 = wc_domain(&h, c, &rat(1)).unwrap();
        let wc0 = wc_domain(&h, c, &rat(0)).unwrap();
        for target in &wc0.halfplanes {
            assert!(
                contained_in(&wc1.halfplanes, target),
                "W_c(1) not contained in W_c(0)"
            );
        }
        assert_eq!(canonicalize(&wc1), wc1, "canonicalize must be idempotent");
        assert_eq!(canonicalize(&wc0), wc0);
        for f in [2u32, 3] {
            let scaled_terms: Vec<(i64, [u32; 3])> = h
                .hat_terms()
                .map(|(e, &a)| (a, [e[0] * f, e[1] * f, e[2] * f]))
                .collect();
            let scaled = SparseExponentPolynomial::from_terms(&scaled_terms).unwrap();
            let wcf = wc_domain(&scaled, c, &rat(0)).unwrap();
            assert_eq!(
                wcf.to_json(),
                wc0.to_json(),
                "f-scaling must leave the emitted domain unchanged"
            );
        }
    }

    // corollary-proof containment on 200 random ray families
    for _ in 0..200 {
        let z = rng.gen_range(1..=4usize);
        let extra = rng.gen_range(0..=3usize);
        // marked rays carry nonzero A-vectors and B >= 0
        let mut rays: Vec<(i64, i64, i64)> = Vec::new();
        for _ in 0..z {
            loop {
                let a1 = rng.gen_range(-3..=3i64);
                let a2 = rng.gen_range(-3..=3i64);
                if (a1, a2) != (0, 0) {
                    rays.push((a1, a2, rng.gen_range(0..=3i64)));
                    break;
                }
            }
        }
        for _ in 0..extra {
            rays.push((0, 0, rng.gen_range(0..=3i64)));
        }
        let base: Vec<HalfPlane> = (0..z)
            .map(|i| {
                let (a1, a2, b) = rays[i];
                HalfPlane::new(rat(a1), rat(a2), rat(1 - b))
            })
            .collect();
        for _ in 0..rng.gen_range(1..=3usize) {
            // composite cone: nonempty marked part plus any unmarked indices;
            // a W'-cone must have a nonzero A-vector sum
            let (marked, members, sum_a1, sum_a2) = loop {
                let mut marked: Vec<usize> = (0..z).filter(|_| rng.gen_bool(0.5)).collect();
                if marked.is_empty() {
                    marked.push(rng.gen_range(0..z));
                }
                let unmarked: Vec<usize> =
                    (z..z + extra).filter(|_| rng.gen_bool(0.5)).collect();
                let members: Vec<usize> = marked.iter().chain(unmarked.iter()).copied().collect();
                let sum_a1: i64 = members.iter().map(|&j| rays[j].0).sum();
                let sum_a2: i64 = members.iter().map(|&j| rays[j].1).sum();
                if (sum_a1, sum_a2) != (0, 0) {
                    break (marked, members, sum_a1, sum_a2);
                }
            };
            let sum_b: i64 = members.iter().map(|&j| rays[j].2).sum();
            let mut composite = vec![HalfPlane::new(rat(sum_a1), rat(sum_a2), rat(1 - sum_b))];
            for &j in &marked {
                let (a1, a2, b) = rays[j];
                composite.push(HalfPlane::new(rat(a1), rat(a2), rat(-b)));
            }
            for target in &composite {
                assert!(
                    contained_in(&base, target),
                    "base intersection escapes a composite domain"
                );
            }
        }
    }
    println!("[PRIMARY 5] domain suite (nesting, idempotence, f-scaling, corollary containment; 200 + 200 instances): PASS");
}

#[test]
fn criterion_6_euler_probing() {
    let h = SparseExponentPolynomial::from_terms(&[(-1, [1, 1, 2])]).unwrap();
    let margin = BigRational::new(BigInt::one(), BigInt::from(100));

    let coarse = probe_convergence(&h, 1, &rat(1), &rat(1), 10_000, &margin).unwrap();
    let fine = probe_convergence(&h, 1, &rat(1), &rat(1), 100_000, &margin).unwrap();
    assert_eq!(fine.verdict, ProbeVerdict::Converges);
    assert!(
        (fine.partial_sum - coarse.partial_sum).abs() < 1e-6,
        "partial sums not Cauchy to 1e-6 between prime bounds 1e4 and 1e5"
    );
    assert!(fine.last_increment < 1e-6);

    let diverging = probe_convergence(&h, 1, &rat(-1), &rat(-1), 1_000, &margin).unwrap();
    assert_eq!(diverging.verdict, ProbeVerdict::Diverges);
    println!("[PRIMARY 6] Euler probing (Cauchy at (1,1), divergence flagged at (-1,-1)): PASS");
}

fn q_pow(q: u64, e: i64) -> BigRational {
    let p = BigInt::from(q).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

#[test]
fn criterion_7_xi_consistency() {
    // separable instance: Xi = prefactor * x/(1-x) with x = q^{1-s}, which
    // matches the one-ray closed form (A1, A2, B) = (1, 0, -1)
    let data = DenefData {
        d: 1,
        l: 1,
        nu: vec![],
        pairs: vec![KappaIota {
            kappa: 0,
            n_u: vec![],
            e: 1,
            d_shift: 0,
        }],
        level: 1,
    };
    let rays = RayData {
        rays: vec![Ray {
            a1: rat(1),
            a2: rat(0),
            b: rat(-1),
        }],
        cones: vec![Cone {
            rays: vec![0],
            in_w_prime: true,
            weight_c: BigInt::one(),
            u_size: 0,
        }],
    };
    let grid: Vec<Vec<BigRational>> = (2..=10).map(|s| vec![rat(s)]).collect();
    let report = denef_shape_check(&data, &[], &rays, 2, &grid, 60).unwrap();
    assert!(report.all_pass);
    assert_eq!(report.points.len(), 9);

    // shift identity on 50 random instances, exact rational equality
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..50 {
        let t = rng.gen_range(0..=2usize);
        let nu: Vec<u32> = (0..t).map(|_| rng.gen_range(1..=3)).collect();
        let npairs = rng.gen_range(1..=2usize);
        let base_pairs: Vec<KappaIota> = (0..npairs)
            .map(|_| KappaIota {
                kappa: 0,
                n_u: (0..t).map(|_| rng.gen_range(1..=2)).collect(),
                e: rng.gen_range(1..=2),
                d_shift: rng.gen_range(0..=2),
            })
            .collect();
        let level = rng.gen_range(2..=3u32);
        let d = rng.gen_range(1..=3u32);
        let u_set: Vec<usize> = (0..t).collect();
        let q = 3u64;
        let s = vec![rat(5)];

        let data1 = DenefData {
            d,
            l: 1,
            nu: nu.clone(),
            pairs: base_pairs.clone(),
            level: 1,
        };
        let shifted_pairs: Vec<KappaIota> = base_pairs
            .iter()
            .map(|p| {
                let extra: u32 = p.n_u.iter().sum::<u32>() * (level - 1);
                KappaIota {
                    d_shift: p.d_shift + extra,
                    ..p.clone()
                }
            })
            .collect();
        let data_n = DenefData {
            d,
            l: 1,
            nu: nu.clone(),
            pairs: shifted_pairs,
            level,
        };
        let lhs = xi_truncated(&data_n, &u_set, q, &s, 6).unwrap();
        let rhs = xi_truncated(&data1, &u_set, q, &s, 6).unwrap();
        let s_nu: i64 = nu.iter().map(|&v| (v * (level - 1)) as i64).sum::<i64>()
            - ((level - 1) * (d * (d - 1) / 2)) as i64;
        assert_eq!(lhs.value, q_pow(q, s_nu) * rhs.value, "shift identity fails");
    }
    println!("[PRIMARY 7] Xi consistency (9-point shape check, 50 shift-identity instances): PASS");
}

/// One composite artifact string covering every criterion's machinery; used
/// to compare byte-identical output across thread-pool sizes.
fn determinism_artifact(bounds: &Bounds) -> String {
    let heis = profile(&corpus::by_name("heisenberg").unwrap()).unwrap();
    let hpz = profile(&corpus::by_name("heisenberg_plus_z").unwrap()).unwrap();

    let mut parts: Vec<String> = Vec::new();
    parts.push(
        local_factor_truncated(&heis, 3, 1, 2, ZetaKind::Cc, Method::Both, bounds)
            .unwrap()
            .to_json()
            .to_string(),
    );
    parts.push(
        local_factor_truncated(&heis, 5, 1, 1, ZetaKind::Irr, Method::Both, bounds)
            .unwrap()
            .to_json()
            .to_string(),
    );
    parts.push(
        local_factor_truncated(&hpz, 3, 2, 1, ZetaKind::Cc, Method::Linear, bounds)
            .unwrap()
            .to_json()
            .to_string(),
    );
    parts.push(
        fit_coefficient_law(&heis, ZetaKind::Cc, &[3, 5, 7, 11], 1, Method::Linear, bounds)
            .unwrap()
            .to_json()
            .to_string(),
    );

    let h = SparseExponentPolynomial::from_terms(&[(1, [2, 1, 1]), (-1, [1, 2, 2])]).unwrap();
    parts.push(wc_domain(&h, 1, &rat(1)).unwrap().to_json().to_string());

    let probe_h = SparseExponentPolynomial::from_terms(&[(-1, [1, 1, 2])]).unwrap();
    let margin = BigRational::new(BigInt::one(), BigInt::from(100));
    let probe = probe_convergence(&probe_h, 1, &rat(1), &rat(1), 10_000, &margin).unwrap();
    parts.push(format!(
        "{:?}|{:.17e}|{:.17e}|{}",
        probe.verdict, probe.partial_sum, probe.last_increment, probe.primes_used
    ));

    let data = DenefData {
        d: 1,
        l: 1,
        nu: vec![],
        pairs: vec![KappaIota {
            kappa: 0,
            n_u: vec![],
            e: 1,
            d_shift: 0,
        }],
        level: 1,
    };
    let rays = RayData {
        rays: vec![Ray {
            a1: rat(1),
            a2: rat(0),
            b: rat(-1),
        }],
        cones: vec![Cone {
            rays: vec![0],
            in_w_prime: true,
            weight_c: BigInt::one(),
            u_size: 0,
        }],
    };
    let grid: Vec<Vec<BigRational>> = (2..=6).map(|s| vec![rat(s)]).collect();
    let report = denef_shape_check(&data, &[], &rays, 2, &grid, 40).unwrap();
    parts.push(serde_json::to_string(&report.points).unwrap());

    parts.join("\n")
}

#[test]
fn criterion_8_determinism_across_thread_pools() {
    let bounds = Bounds::default();
    let artifacts: Vec<String> = [1usize, 4, 8]
        .iter()
        .map(|&n| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .unwrap()
                .install(|| determinism_artifact(&bounds))
        })
        .collect();
    assert_eq!(artifacts[0], artifacts[1], "1-thread vs 4-thread artifacts differ");
    assert_eq!(artifacts[0], artifacts[2], "1-thread vs 8-thread artifacts differ");
    println!("[PRIMARY 8] determinism across 1/4/8 worker threads: PASS");
}

#[test]
fn sweep_is_size_bounded_not_vacuous() {
    // configurations beyond the bound must be refused, not silently wrong
    let bounds = Bounds::default();
    let free = profile(&corpus::by_name("free_class2_rank3").unwrap()).unwrap();
    let ring = GaloisRing::make(7, 1, 2).unwrap();
    let err = build_group(&free, &ring, &bounds).unwrap_err();
    assert!(matches!(err, QuotientError::SizeBound { .. }));
}
