use super::*;
use crate::formulation::{BoundSense, ScreeningTarget};
use crate::screening::solve_uc;
use crate::milp::MipOptions;

#[test]
fn shipped_nominal_profile_matches_generator() {
    assert_eq!(Fixture::Fix39.loads(), fix39_nominal());
}

#[test]
fn fixtures_load_and_match_dimensions() {
    for f in [Fixture::Fix2, Fixture::FixA, Fixture::Fix6, Fixture::Fix39] {
        let (inst, flow, loads) = f.load();
        assert_eq!(flow.num_lines(), inst.num_lines());
        loads.check_matches(&inst).unwrap();
    }
    let inst = Fixture::Fix39.instance();
    assert_eq!((inst.num_buses(), inst.num_lines(), inst.num_generators()), (39, 46, 10));
}

#[test]
fn daily_shape_peaks_mid_afternoon() {
    assert!((daily_shape(9) - 0.72).abs() < 1e-12);
    assert!((daily_shape(15) - 0.92).abs() < 1e-12);
    assert!((daily_shape(3) - 0.52).abs() < 1e-12);
}

#[test]
fn samples_stay_in_band_and_are_reproducible() {
    let nominal = fix39_nominal();
    let a = gen_samples(&nominal, 0.2, 50, 7).unwrap();
    let b = gen_samples(&nominal, 0.2, 50, 7).unwrap();
    let c = gen_samples(&nominal, 0.2, 50, 8).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    let mut rel = Vec::new();
    for s in &a {
        for bus in 0..nominal.num_buses() {
            for t in 1..=nominal.horizon() {
                let l = nominal.load(bus, t);
                let v = s.load(bus, t);
                assert!(v >= 0.8 * l - 1e-9 && v <= 1.2 * l + 1e-9);
                if l > 0.0 {
                    rel.push(v / l - 1.0);
                }
            }
        }
    }
    // Uniform on [-0.2, 0.2]: mean 0, variance 0.04 / 3.
    let n = rel.len() as f64;
    let m = rel.iter().sum::<f64>() / n;
    let var = rel.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
    assert!(m.abs() < 0.01, "mean {m}");
    assert!((var - 0.04 / 3.0).abs() < 0.001, "variance {var}");
}

#[test]
fn zero_radius_returns_nominal_and_bad_radius_fails() {
    let nominal = Fixture::FixA.loads();
    for s in gen_samples(&nominal, 0.0, 3, 1).unwrap() {
        assert_eq!(s, nominal);
    }
    assert!(gen_samples(&nominal, 1.0, 1, 1).is_err());
    assert!(gen_samples(&nominal, -0.1, 1, 1).is_err());
}

#[test]
fn random_instances_are_deterministic_and_in_range() {
    for seed in 0..20 {
        let (a, la) = random_instance(seed);
        let (b, lb) = random_instance(seed);
        assert_eq!(a.fingerprint(), b.fingerprint());
        assert_eq!(la, lb);
        assert!((3..=6).contains(&a.num_buses()));
        assert!((2..=4).contains(&a.num_generators()));
        assert!((2..=6).contains(&a.horizon()));
        la.check_matches(&a).unwrap();
    }
}

#[test]
fn oracle_uc_on_fixa() {
    let (inst, flow, loads) = Fixture::FixA.load();
    let o = oracle_uc(&inst, &flow, &loads, DEFAULT_ORACLE_LIMIT).unwrap();
    // Hand solution: all units on, cheap unit carries what the line allows.
    assert!((o.objective.unwrap() - 1440.0).abs() < 1e-6);
    let s = o.schedule.unwrap();
    assert!((1..=2).all(|t| (0..2).all(|g| s.is_on(g, t))));
}

#[test]
fn oracle_uc_single_unit_cost_is_price_times_load() {
    let (inst, flow, loads) = Fixture::Fix2.load();
    let o = oracle_uc(&inst, &flow, &loads, DEFAULT_ORACLE_LIMIT).unwrap();
    assert!((o.objective.unwrap() - 10.0 * 80.0).abs() < 1e-9);
    assert!(o.unique);
}

#[test]
fn oracle_uc_reports_infeasible_loads() {
    let (inst, flow, mut loads) = Fixture::Fix2.load();
    loads.set(1, 2, 60.0); // beyond the line limit
    let o = oracle_uc(&inst, &flow, &loads, DEFAULT_ORACLE_LIMIT).unwrap();
    assert!(o.objective.is_none());
    assert!(o.schedule.is_none());
}

#[test]
fn oracle_rejects_large_instances() {
    let (inst, flow, loads) = Fixture::Fix39.load();
    assert!(matches!(
        oracle_uc(&inst, &flow, &loads, DEFAULT_ORACLE_LIMIT),
        Err(crate::Error::TooLarge { .. })
    ));
}

#[test]
fn oracle_uc_agrees_with_milp_on_random_instances() {
    let mut compared = 0;
    for seed in 0..25 {
        let (inst, loads) = random_instance(seed);
        let flow = crate::model::FlowModel::build(&inst).unwrap();
        let o = oracle_uc(&inst, &flow, &loads, DEFAULT_ORACLE_LIMIT).unwrap();
        let m = solve_uc(&inst, &flow, &loads, None, None, &MipOptions::default()).unwrap();
        match o.objective {
            Some(v) => {
                compared += 1;
                let got = m.solution.objective_value;
                assert!((got - v).abs() <= 1e-6 * v.abs().max(1.0), "seed {seed}: {got} vs {v}");
            }
            None => assert!(!m.solution.is_optimal(), "seed {seed}"),
        }
    }
    assert!(compared >= 15);
}

#[test]
fn binding_oracle_values() {
    let (inst, flow, loads) = Fixture::Fix2.load();
    let up = ScreeningTarget::new(0, BoundSense::Upper, 1);
    let v = oracle_binding(&inst, &flow, &loads, up, DEFAULT_ORACLE_LIMIT).unwrap().unwrap();
    assert!((v - 40.0).abs() < 1e-6);
    assert!(certify(&inst, &flow, &loads, up, DEFAULT_ORACLE_LIMIT).unwrap().certified);

    // FIX-A: with every step enforced the line 0 upper bound at t=2 tops out at 20.
    let (inst, flow, loads) = Fixture::FixA.load();
    let t = ScreeningTarget::new(0, BoundSense::Upper, 2);
    let v = oracle_binding(&inst, &flow, &loads, t, DEFAULT_ORACLE_LIMIT).unwrap().unwrap();
    assert!((v - 20.0).abs() < 1e-6, "{v}");
}

#[test]
fn certification_fails_on_binding_rows() {
    let inst_text = Fixture::Fix2.case_text().replace("limit = 50.0", "limit = 30.0");
    let inst = crate::model::parse_case(&inst_text).unwrap();
    let flow = crate::model::FlowModel::build(&inst).unwrap();
    let mut loads = Fixture::Fix2.loads();
    loads.set(1, 1, 30.0);
    loads.set(1, 2, 30.0);
    let up = ScreeningTarget::new(0, BoundSense::Upper, 1);
    let c = certify(&inst, &flow, &loads, up, DEFAULT_ORACLE_LIMIT).unwrap();
    assert!(c.certified, "flow exactly at the limit stays within tolerance");
    loads.set(1, 1, 31.0);
    // Without the target row the load pushes 31 through the line.
    let c = certify(&inst, &flow, &loads, up, DEFAULT_ORACLE_LIMIT).unwrap();
    assert!(!c.certified);
    assert!((c.witness.unwrap() - 31.0).abs() < 1e-6);
}
