//! Property suites shared by the `properties` and `acceptance` targets.
//! Each returns `Err` with proptest's minimal failing case on violation.
#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rvs_core::channel::{element_gain, incidence_cosine, irradiance_cosine};
use rvs_core::optimizer::{crossover, mutate, run_ga, run_ga_in, GenomeLayout, SearchSpace};
use rvs_core::rates::{noma_coefficients, noma_report, rsma_report, RsmaOptions, RsmaPowerAllocation};
use rvs_core::scenario::{sample_orientation, OrientationKind, OrientationModel, Point3};
use rvs_core::{
    brute_force_oracle, build_default_scenario, AssociationMatrix, ChannelState, DeviceOrientation, GaConfig, GridSpec,
    Overrides, ParamValue, ProblemId, ProblemSpec, RisElementPose, Scenario, SystemParameters,
};

pub const CASES: u32 = 1000;

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

pub fn scenario(k: usize, u: usize, seed: u64) -> Scenario {
    let mut o = Overrides::new();
    o.insert("K".into(), ParamValue::Number(k as f64));
    o.insert("U".into(), ParamValue::Number(u as f64));
    build_default_scenario(&o, seed).unwrap()
}

fn problem(i: usize) -> ProblemId {
    ProblemId::ALL[i % 4]
}

/// Secrecy rates are `[R_u - R_eve,u]⁺` and the objective is their minimum.
pub fn clamp_min_identity(cases: u32) -> Result<(), String> {
    let strat = (
        1usize..8,
        1usize..5,
        any::<u64>(),
        prop::collection::vec(0.0f64..1e-5, 45),
        0.0f64..1.0,
        0.5f64 + 1e-6..=1.0,
    );
    runner(cases)
        .run(&strat, |(k, u, seed, pool, share, eps)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            use rand::Rng;
            let mut draw = |i: usize| pool[i % pool.len()] * rng.random::<f64>();
            let users: Vec<Vec<f64>> = (0..u).map(|j| (0..k).map(|e| draw(j * k + e)).collect()).collect();
            let eve: Vec<f64> = (0..k).map(|e| draw(e + 7)).collect();
            let ch = ChannelState { users, eve };
            let assign: Vec<usize> = (0..k).map(|e| (seed as usize).wrapping_add(e * 31) % u).collect();
            let assoc = AssociationMatrix::new(assign, u).unwrap();
            let link = SystemParameters::default().link();
            let p_s = link.tx_power;
            let alloc = RsmaPowerAllocation::new(share * p_s, vec![(1.0 - share) * p_s / u as f64; u], p_s).unwrap();
            let reports = [
                rsma_report(&link, &ch, &assoc, &alloc, RsmaOptions::default()).unwrap(),
                noma_report(&link, &ch, &assoc, &noma_coefficients(eps, u).unwrap()).unwrap(),
            ];
            for r in reports {
                let mut lowest = f64::INFINITY;
                for j in 0..u {
                    let expect = (r.per_user_rates[j].total - r.eve_rates[j].total).max(0.0);
                    prop_assert_eq!(r.secrecy_rates[j], expect);
                    prop_assert!(r.secrecy_rates[j] >= 0.0);
                    lowest = lowest.min(expect);
                }
                prop_assert_eq!(r.min_secrecy_rate, lowest);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// No gain beyond the field of view; positive gain inside it when the mirror faces the receiver.
pub fn fov_gating(cases: u32) -> Result<(), String> {
    let strat = (
        0.3f64..4.7,
        0.5f64..4.7,
        0.2f64..2.0,
        0.0f64..=FRAC_PI_2,
        -PI..=PI,
        -FRAC_PI_2..=FRAC_PI_2,
        -FRAC_PI_2..=FRAC_PI_2,
        10.0f64..=90.0,
        0usize..30,
    );
    let base = scenario(30, 2, 1);
    let positions = base.layout.element_positions();
    runner(cases)
        .run(&strat, |(x, y, z, alpha, beta, omega, gamma, fov_deg, k)| {
            let mut s = base.clone();
            s.params.fov = fov_deg.to_radians();
            let rx = Point3::new(x, y, z);
            let orient = DeviceOrientation { alpha, beta };
            let pos = positions[k];
            let pose = RisElementPose {
                index: k,
                position: pos,
                omega,
                gamma,
            };
            let g = element_gain(&s, &pose, &rx, &orient).unwrap();
            let cos_inc = incidence_cosine(&rx, &orient, &pos).unwrap();
            let cos_irr = irradiance_cosine(&pos, s.layout.ris_panel.wall, omega, gamma, &rx).unwrap();
            let edge = s.params.fov.cos();
            prop_assert!(g >= 0.0);
            if cos_inc < edge - 1e-12 || cos_inc <= 0.0 {
                prop_assert_eq!(g, 0.0);
            }
            if cos_inc > edge + 1e-12 && cos_inc > 1e-9 && cos_irr > 1e-9 {
                prop_assert!(g > 0.0);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// NOMA coefficients are non-negative, non-increasing and sum to one.
pub fn coefficient_normalization(cases: u32) -> Result<(), String> {
    let strat = (0.5f64 + 1e-9..=1.0, 1usize..16);
    runner(cases)
        .run(&strat, |(eps, u)| {
            let c = noma_coefficients(eps, u).unwrap();
            prop_assert_eq!(c.len(), u);
            prop_assert!((c.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(c.iter().all(|&v| v >= 0.0));
            prop_assert!(c.windows(2).all(|w| w[0] >= w[1]));
            let head = if u == 1 { 1.0 } else { eps };
            prop_assert!((c[0] - head).abs() < 1e-15);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Gain scales linearly in ρ, A_PD and the element area.
pub fn channel_linearity(cases: u32) -> Result<(), String> {
    let strat = (
        0.05f64..=1.0,
        1e-5f64..1.0,
        0.01f64..0.3,
        -FRAC_PI_2..=FRAC_PI_2,
        -FRAC_PI_2..=FRAC_PI_2,
        0usize..30,
        0usize..2,
    );
    let base = scenario(30, 2, 1);
    let positions = base.layout.element_positions();
    runner(cases)
        .run(&strat, |(rho, area, side, omega, gamma, k, u)| {
            let pose = RisElementPose {
                index: k,
                position: positions[k],
                omega,
                gamma,
            };
            let rx = base.layout.user_positions[u];
            let orient = base.user_orientations[u];
            let g0 = element_gain(&base, &pose, &rx, &orient).unwrap();
            let mut s = base.clone();
            s.params.ris_reflectivity = rho;
            s.params.pd_area = area;
            s.layout.ris_panel.element_side = side;
            let g1 = element_gain(&s, &pose, &rx, &orient).unwrap();
            let factor = (rho / base.params.ris_reflectivity)
                * (area / base.params.pd_area)
                * (side / base.layout.ris_panel.element_side).powi(2);
            prop_assert!((g1 - factor * g0).abs() <= 1e-12 * (factor * g0).abs());
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn tiny_config(pop: usize, gens: usize, seed: u64) -> GaConfig {
    GaConfig {
        population: pop,
        generations: gens,
        rng_seed: seed,
        ..GaConfig::default()
    }
}

fn ga_strategy() -> impl Strategy<Value = (usize, usize, usize, usize, usize, u64, u64)> {
    (1usize..7, 1usize..4, 0usize..4, 4usize..13, 0usize..7, any::<u64>(), 0u64..50)
}

/// Best-so-far objective in the trace never decreases.
pub fn elitism_monotonicity(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&ga_strategy(), |(k, u, p, pop, gens, seed, snap)| {
            let s = scenario(k, u, snap);
            let r = run_ga(&s, &ProblemSpec::new(problem(p)), &tiny_config(pop, gens, seed)).unwrap();
            prop_assert_eq!(r.trace.len(), gens + 1);
            prop_assert!(r.trace.windows(2).all(|w| w[1].best_objective >= w[0].best_objective));
            if r.record.feasible {
                prop_assert_eq!(r.trace[gens].best_objective, r.record.objective);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Same scenario, spec and seed give bit-identical results.
pub fn seed_determinism(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&ga_strategy(), |(k, u, p, pop, gens, seed, snap)| {
            let s = scenario(k, u, snap);
            let spec = ProblemSpec::new(problem(p));
            let a = run_ga(&s, &spec, &tiny_config(pop, gens, seed)).unwrap();
            let b = run_ga(&s, &spec, &tiny_config(pop, gens, seed)).unwrap();
            prop_assert_eq!(a, b);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Sampled device angles stay inside α ∈ [0, π/2], β ∈ [-π, π].
pub fn orientation_ranges(cases: u32) -> Result<(), String> {
    let strat = (0.0f64..=FRAC_PI_2, 1e-3f64..1.0, any::<u64>(), -3.0f64..3.0, -7.0f64..7.0, any::<bool>());
    runner(cases)
        .run(&strat, |(mean, std, seed, fa, fb, fixed)| {
            let model = OrientationModel {
                alpha_mean: mean,
                alpha_std: std,
                kind: if fixed {
                    OrientationKind::Fixed { alpha: fa, beta: fb }
                } else {
                    OrientationKind::LaplaceTruncated
                },
                rng_seed: seed,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..20 {
                let o = sample_orientation(&model, &mut rng);
                prop_assert!((0.0..=FRAC_PI_2).contains(&o.alpha));
                prop_assert!((-PI..=PI).contains(&o.beta));
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Crossover and mutation keep every gene inside its domain, in both search spaces.
pub fn genome_closure(cases: u32) -> Result<(), String> {
    let strat = (1usize..12, 1usize..5, 0usize..5, any::<u64>(), 0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..2.0, any::<bool>());
    runner(cases)
        .run(&strat, |(k, u, p, seed, pc, pm, sigma, grid)| {
            let s = scenario(k, u, 1);
            let spec = if p == 4 {
                ProblemSpec::fixed_power(ProblemId::P2, 0.6).unwrap()
            } else {
                ProblemSpec::new(problem(p))
            };
            let mut layout = GenomeLayout::new(&s, &spec);
            if grid {
                let g = GridSpec::uniform(&s, &spec, 5, 4).unwrap();
                layout = layout.with_space(SearchSpace::Grid(g)).unwrap();
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = layout.random(&mut rng);
            let b = layout.random(&mut rng);
            prop_assert!(layout.check(&a).is_ok());
            let (mut x, mut y) = crossover(&a, &b, &layout, pc, &mut rng).unwrap();
            mutate(&mut x, &layout, pm, sigma, &mut rng);
            mutate(&mut y, &layout, pm, sigma, &mut rng);
            for c in [&x, &y] {
                prop_assert!(layout.check(c).is_ok(), "{:?}", layout.check(c));
                prop_assert_eq!(c.gene_count(), layout.gene_count());
                if let SearchSpace::Grid(g) = &layout.space {
                    prop_assert!(c.omega.iter().chain(&c.gamma).all(|a| g.angles.contains(a)));
                    prop_assert!(g.powers.contains(&c.power));
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Grid-restricted GA never beats the oracle on the same grid.
pub fn oracle_dominance(cases: u32) -> Result<(), String> {
    let strat = (0usize..4, any::<u64>(), 0u64..20);
    runner(cases)
        .run(&strat, |(p, seed, snap)| {
            let s = scenario(1, 2, snap);
            let spec = ProblemSpec::new(problem(p));
            let grid = GridSpec::uniform(&s, &spec, 3, 3).unwrap();
            let best = brute_force_oracle(&s, &spec, &grid).unwrap();
            let ga = run_ga_in(&s, &spec, &tiny_config(6, 4, seed), SearchSpace::Grid(grid)).unwrap();
            prop_assert!(rvs_core::optimizer::rank_cmp(&ga.record, &best.record) != std::cmp::Ordering::Greater);
            Ok(())
        })
        .map_err(|e| e.to_string())
}
