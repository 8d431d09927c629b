use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wpmec_core::model::{harvested_energy, link_capacity_bits, local_bits, path_loss_gain};
use wpmec_core::oracle::{audit_raw_feasibility, sample_point};
use wpmec_core::solver::{maximize, BarrierSettings};
use wpmec_core::transform::{assemble_subproblem, perspective_rate, recover_powers};
use wpmec_core::{
    solve_with, CooperationMode, EnergyVars, GoldenSectionConfig, Instance, PathLossModel, SolveOptions, SystemParams,
    TimeAllocation,
};

fn instance(lambda: f64, d: [f64; 4], w1: f64) -> Instance {
    let pl = PathLossModel { exponent: lambda, d_e1: d[0], d_e2: d[1], d_12: d[2], d_20: d[3], ..Default::default() };
    Instance::from_path_loss(SystemParams::default().with_w1(w1), &pl).unwrap()
}

fn mode() -> impl Strategy<Value = CooperationMode> {
    prop_oneof![Just(CooperationMode::Full), Just(CooperationMode::CommOnly), Just(CooperationMode::CompOnly)]
}

proptest! {
    #[test]
    fn path_loss_decreases(d in 0.05f64..50.0, step in 1e-3f64..5.0, lambda in 1.0f64..5.0) {
        let pl = PathLossModel { exponent: lambda, ..Default::default() };
        prop_assert!(path_loss_gain(d + step, &pl).unwrap() < path_loss_gain(d, &pl).unwrap());
        let steeper = PathLossModel { exponent: lambda + 0.5, ..pl };
        prop_assert!(path_loss_gain(d, &steeper).unwrap() < path_loss_gain(d, &pl).unwrap());
    }

    #[test]
    fn harvest_and_compute_are_bilinear(g in 0.0f64..1e-2, t in 0.0f64..1.0, f in 0.0f64..3e6, c in 0.1f64..10.0) {
        let p = SystemParams::default();
        let q = harvested_energy(&p, g, t);
        prop_assert!((harvested_energy(&p, c * g, t) - c * q).abs() <= 1e-12 * q.max(1e-300) * c);
        prop_assert!((harvested_energy(&p, g, c * t) - c * q).abs() <= 1e-12 * q.max(1e-300) * c);
        let b = local_bits(f, t, p.phi);
        prop_assert!((local_bits(c * f, t, p.phi) - c * b).abs() <= 1e-9 * b.max(1e-300) * c);
    }

    #[test]
    fn capacity_concave_in_power(t in 0.01f64..1.0, p1 in 0.0f64..1.0, p2 in 0.0f64..1.0, h in 1e-9f64..1e-3) {
        let s = SystemParams::default();
        let mid = link_capacity_bits(t, 0.5 * (p1 + p2), h, &s);
        let avg = 0.5 * (link_capacity_bits(t, p1, h, &s) + link_capacity_bits(t, p2, h, &s));
        prop_assert!(mid >= avg - 1e-9 * mid.max(1.0));
    }

    #[test]
    fn powers_round_trip(t in 1e-3f64..0.5, e in 0.0f64..1e-5, h in 1e-8f64..1e-4) {
        let params = SystemParams::default();
        let times = TimeAllocation { t0: 0.2, t1: t, t2_1: t, t2_2: t, t2c: 0.0, t3: t };
        let tau = EnergyVars { tau0: 0.6, tau1: e, tau2_1: e, tau2_2: e, tau3: e };
        let p = recover_powers(&tau, &times).unwrap();
        let rho = h / (params.gamma * params.n0);
        let a = perspective_rate(t, e, rho, params.bandwidth);
        let b = link_capacity_bits(t, p.p1, h, &params);
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1e-300));
    }

    #[test]
    fn golden_brackets_unimodal_peaks(c in 0.0f64..1.0, k in 0.1f64..10.0) {
        let out = maximize(|z: f64| Ok::<_, wpmec_core::Error>((-(k * (z - c)).powi(2), ())), &GoldenSectionConfig::default(), 1.0).unwrap();
        prop_assert!((out.z - c).abs() <= 2e-4);
        for s in &out.trace.steps {
            prop_assert!(s.a0 <= out.z + 1e-15 && out.z <= s.a1 + 1e-15);
        }
        prop_assert_eq!(out.trace.evaluations, 2 + out.trace.iterations());
    }

    #[test]
    fn samples_pass_audit(lambda in 2.0f64..4.0, d in prop::array::uniform4(2.0f64..20.0), m in mode(), seed in any::<u64>()) {
        let inst = instance(lambda, d, 0.7);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..200 {
            let pt = sample_point(&inst, m, &mut rng);
            let r = audit_raw_feasibility(&inst, m, &pt);
            prop_assert!(r.passed(), "{}", r.summary());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn full_dominates_benchmarks(lambda in 2.0f64..4.0, d in prop::array::uniform4(2.0f64..20.0), w1 in 0.0f64..=1.0) {
        let inst = instance(lambda, d, w1);
        let opts = SolveOptions::default().with_prescan(21);
        let full = solve_with(&inst, CooperationMode::Full, &opts).unwrap();
        prop_assert!(full.audit.passed());
        for m in [CooperationMode::CommOnly, CooperationMode::CompOnly] {
            let b = solve_with(&inst, m, &opts).unwrap();
            prop_assert!(full.wscr >= b.wscr - 1e-6 * full.wscr, "{:?}: {} < {}", m, full.wscr, b.wscr);
        }
    }

    #[test]
    fn weight_scaling(c in 0.01f64..100.0, z in 0.0f64..0.95, m in mode()) {
        let prog = assemble_subproblem(&Instance::reference(), z, m).unwrap();
        let s = BarrierSettings::default();
        let a = wpmec_core::solver::solve_subproblem(&prog, &s);
        let b = wpmec_core::solver::solve_subproblem(&prog.with_objective_scaled(c), &s);
        prop_assert!((b.objective - c * a.objective).abs() <= 1e-9 * c * a.objective.max(1e-300));
        for con in &prog.constraints {
            let (ra, rb) = (con.residual(&a.x), con.residual(&b.x));
            prop_assert!((ra - rb).abs() <= 1e-9 * ra.abs().max(1.0));
        }
    }

    #[test]
    fn inner_optimum_beats_samples(lambda in 2.0f64..4.0, d in prop::array::uniform4(2.0f64..20.0), m in mode(), seed in any::<u64>()) {
        let inst = instance(lambda, d, 0.7);
        let best = wpmec_core::oracle::sample_lower_bounds(&inst, m, 2000, seed).best;
        let sol = solve_with(&inst, m, &SolveOptions::default().with_prescan(21)).unwrap();
        prop_assert!(best <= sol.wscr + 1e-9);
    }
}
