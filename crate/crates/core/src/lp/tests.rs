use super::*;
use approx::assert_abs_diff_eq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn opts() -> LpOptions {
    LpOptions::default()
}

/// Brute-force optimum of `min c'x, A x <= b, lo <= x <= hi` by enumerating
/// every vertex of the (bounded) feasible set.
fn vertex_oracle(c: &[f64], a: &[Vec<f64>], b: &[f64], lo: f64, hi: f64) -> Option<f64> {
    let n = c.len();
    let mut halfspaces: Vec<(Vec<f64>, f64)> = a.iter().cloned().zip(b.iter().copied()).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        halfspaces.push((e.clone(), hi));
        e[j] = -1.0;
        halfspaces.push((e, -lo));
    }
    let k = halfspaces.len();
    let mut best: Option<f64> = None;
    let mut pick: Vec<usize> = (0..n).collect();
    loop {
        let mut m: Vec<Vec<f64>> = pick
            .iter()
            .map(|&i| {
                let mut r = halfspaces[i].0.clone();
                r.push(halfspaces[i].1);
                r
            })
            .collect();
        if let Some(x) = gauss(&mut m, n) {
            let feasible = halfspaces
                .iter()
                .all(|(row, rhs)| row.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() <= rhs + 1e-9);
            if feasible {
                let v: f64 = c.iter().zip(&x).map(|(p, q)| p * q).sum();
                best = Some(best.map_or(v, |b: f64| b.min(v)));
            }
        }
        // next combination
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if pick[i] < k - n + i {
                pick[i] += 1;
                for t in i + 1..n {
                    pick[t] = pick[t - 1] + 1;
                }
                break;
            }
        }
    }
}

fn gauss(m: &mut [Vec<f64>], n: usize) -> Option<Vec<f64>> {
    for col in 0..n {
        let piv = (col..n).max_by(|&p, &q| m[p][col].abs().total_cmp(&m[q][col].abs()))?;
        if m[piv][col].abs() < 1e-10 {
            return None;
        }
        m.swap(piv, col);
        for r in 0..n {
            if r != col {
                let f = m[r][col] / m[col][col];
                for c in col..=n {
                    let v = m[col][c];
                    m[r][c] -= f * v;
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

fn random_lp(rng: &mut ChaCha8Rng, n: usize, m: usize) -> (Vec<f64>, Vec<Vec<f64>>, Vec<f64>) {
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
    let a: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect())
        .collect();
    let b: Vec<f64> = (0..m).map(|_| rng.gen_range(-4.0..6.0)).collect();
    (c, a, b)
}

fn build(c: &[f64], a: &[Vec<f64>], b: &[f64], lo: f64, hi: f64) -> LinearProgram {
    let mut lp = LinearProgram::new(Sense::Minimize);
    for &cj in c {
        lp.add_var(lo, hi, cj);
    }
    for (row, &rhs) in a.iter().zip(b) {
        let coeffs: Vec<(usize, f64)> = row.iter().copied().enumerate().collect();
        lp.add_row(coeffs, f64::NEG_INFINITY, rhs);
    }
    lp
}

#[test]
fn two_variable_textbook() {
    // max 3x + 2y, x + y <= 4, x + 3y <= 6, x <= 3
    let mut lp = LinearProgram::new(Sense::Maximize);
    let x = lp.add_var(0.0, 3.0, 3.0);
    let y = lp.add_var(0.0, f64::INFINITY, 2.0);
    lp.add_row([(x, 1.0), (y, 1.0)], f64::NEG_INFINITY, 4.0);
    lp.add_row([(x, 1.0), (y, 3.0)], f64::NEG_INFINITY, 6.0);
    let sol = solve_lp(&lp, &opts()).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    assert_abs_diff_eq!(sol.objective_value, 11.0, epsilon = 1e-9);
    assert_abs_diff_eq!(sol.primal[0], 3.0, epsilon = 1e-9);
    assert_abs_diff_eq!(sol.primal[1], 1.0, epsilon = 1e-9);
    let kkt = kkt_residuals(&lp, &sol);
    assert!(kkt.stationarity < 1e-9 && kkt.duality_gap < 1e-9, "{kkt:?}");
}

#[test]
fn infeasible_detected_with_farkas() {
    let mut lp = LinearProgram::new(Sense::Minimize);
    let x = lp.add_var(0.0, 10.0, 1.0);
    let y = lp.add_var(0.0, 10.0, 1.0);
    lp.add_row([(x, 1.0), (y, 1.0)], 25.0, f64::INFINITY);
    let sol = solve_lp(&lp, &opts()).unwrap();
    assert_eq!(sol.status, LpStatus::Infeasible);
    assert!(sol.farkas.is_some());
}

#[test]
fn unbounded_detected_with_ray() {
    let mut lp = LinearProgram::new(Sense::Maximize);
    let x = lp.add_var(0.0, f64::INFINITY, 1.0);
    let y = lp.add_var(0.0, f64::INFINITY, 0.0);
    lp.add_row([(x, 1.0), (y, -1.0)], f64::NEG_INFINITY, 2.0);
    let sol = solve_lp(&lp, &opts()).unwrap();
    assert_eq!(sol.status, LpStatus::Unbounded);
    let ray = sol.ray.unwrap();
    assert!(ray[0] > 0.0);
    // The ray stays inside the recession cone of the constraint.
    assert!(ray[0] - ray[1] <= 1e-9);
}

#[test]
fn equality_rows_and_free_variables() {
    // min x + 2y, x - y = 1, x + y = 5, y free
    let mut lp = LinearProgram::new(Sense::Minimize);
    let x = lp.add_var(f64::NEG_INFINITY, f64::INFINITY, 1.0);
    let y = lp.add_var(f64::NEG_INFINITY, f64::INFINITY, 2.0);
    lp.add_row([(x, 1.0), (y, -1.0)], 1.0, 1.0);
    lp.add_row([(x, 1.0), (y, 1.0)], 5.0, 5.0);
    let sol = solve_lp(&lp, &opts()).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    assert_abs_diff_eq!(sol.primal[0], 3.0, epsilon = 1e-9);
    assert_abs_diff_eq!(sol.primal[1], 2.0, epsilon = 1e-9);
    assert_abs_diff_eq!(sol.objective_value, 7.0, epsilon = 1e-9);
}

#[test]
fn fixed_columns_and_offset() {
    let mut lp = LinearProgram::new(Sense::Minimize);
    lp.set_offset(5.0);
    let x = lp.add_var(2.0, 2.0, 3.0);
    let y = lp.add_var(0.0, 10.0, 1.0);
    lp.add_row([(x, 1.0), (y, 1.0)], 6.0, f64::INFINITY);
    let sol = solve_lp(&lp, &opts()).unwrap();
    assert_abs_diff_eq!(sol.objective_value, 5.0 + 6.0 + 4.0, epsilon = 1e-9);
    let kkt = kkt_residuals(&lp, &sol);
    assert!(kkt.duality_gap < 1e-9, "{kkt:?}");
}

#[test]
fn random_lps_match_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut optimal = 0;
    for _ in 0..200 {
        let (c, a, b) = random_lp(&mut rng, 5, 5);
        let lp = build(&c, &a, &b, -4.0, 4.0);
        let sol = solve_lp(&lp, &opts()).unwrap();
        match vertex_oracle(&c, &a, &b, -4.0, 4.0) {
            Some(v) => {
                optimal += 1;
                assert_eq!(sol.status, LpStatus::Optimal);
                assert_abs_diff_eq!(sol.objective_value, v, epsilon = 1e-7);
                let kkt = kkt_residuals(&lp, &sol);
                assert!(kkt.primal < 1e-7, "{kkt:?}");
                assert!(kkt.dual < 1e-7 && kkt.stationarity < 1e-7, "{kkt:?}");
                assert!(kkt.complementarity < 1e-6, "{kkt:?}");
                assert!(kkt.duality_gap < 1e-6, "{kkt:?}");
            }
            None => assert_eq!(sol.status, LpStatus::Infeasible),
        }
    }
    assert!(optimal > 50);
}

#[test]
fn degenerate_lp_terminates() {
    // Many redundant constraints through the same vertex.
    let mut lp = LinearProgram::new(Sense::Maximize);
    let x = lp.add_var(0.0, f64::INFINITY, 1.0);
    let y = lp.add_var(0.0, f64::INFINITY, 1.0);
    for k in 1..=20 {
        let a = k as f64;
        lp.add_row([(x, a), (y, 1.0)], f64::NEG_INFINITY, a + 1.0);
        lp.add_row([(x, 1.0), (y, a)], f64::NEG_INFINITY, a + 1.0);
    }
    let sol = solve_lp(&lp, &opts()).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    assert_abs_diff_eq!(sol.objective_value, 2.0, epsilon = 1e-9);
}

#[test]
fn repeated_solves_are_bitwise_identical() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (c, a, b) = random_lp(&mut rng, 8, 12);
    let lp = build(&c, &a, &b, -2.0, 3.0);
    let first = solve_lp(&lp, &opts()).unwrap();
    for _ in 0..5 {
        let again = solve_lp(&lp, &opts()).unwrap();
        assert_eq!(first.objective_value.to_bits(), again.objective_value.to_bits());
        assert_eq!(first.primal, again.primal);
    }
}

#[test]
fn objective_scaling_scales_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let (c, a, b) = random_lp(&mut rng, 6, 6);
        let lp = build(&c, &a, &b, -3.0, 3.0);
        let scaled_c: Vec<f64> = c.iter().map(|v| 7.5 * v).collect();
        let lp2 = build(&scaled_c, &a, &b, -3.0, 3.0);
        let s1 = solve_lp(&lp, &opts()).unwrap();
        let s2 = solve_lp(&lp2, &opts()).unwrap();
        assert_eq!(s1.status, s2.status);
        if s1.is_optimal() {
            assert_abs_diff_eq!(7.5 * s1.objective_value, s2.objective_value, epsilon = 1e-6);
        }
    }
}

#[test]
fn frequent_reinversion_gives_same_answer() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let tight = LpOptions {
        refactor_interval: 1,
        ..LpOptions::default()
    };
    for _ in 0..30 {
        let (c, a, b) = random_lp(&mut rng, 10, 15);
        let lp = build(&c, &a, &b, -5.0, 5.0);
        let s1 = solve_lp(&lp, &opts()).unwrap();
        let s2 = solve_lp(&lp, &tight).unwrap();
        assert_eq!(s1.status, s2.status);
        if s1.is_optimal() {
            assert_abs_diff_eq!(s1.objective_value, s2.objective_value, epsilon = 1e-7);
        }
    }
}

#[test]
fn restricted_solve_fixes_columns() {
    let mut lp = LinearProgram::new(Sense::Minimize);
    let x = lp.add_var(0.0, 10.0, 1.0);
    let y = lp.add_var(0.0, 10.0, 2.0);
    lp.add_row([(x, 1.0), (y, 1.0)], 4.0, f64::INFINITY);
    let sol = solve_lp_restricted(&lp, &[(x, 1.0)], &opts()).unwrap();
    assert_abs_diff_eq!(sol.objective_value, 1.0 + 6.0, epsilon = 1e-9);
    let out = solve_lp_restricted(&lp, &[(x, 11.0)], &opts()).unwrap();
    assert_eq!(out.status, LpStatus::Infeasible);
    assert!(matches!(
        solve_lp_restricted(&lp, &[(5, 0.0)], &opts()),
        Err(Error::InvalidFix(_))
    ));
}

#[test]
fn iteration_limit_is_reported() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (c, a, b) = random_lp(&mut rng, 10, 10);
    let lp = build(&c, &a, &b, -5.0, 5.0);
    let limited = LpOptions {
        max_iterations: Some(0),
        ..LpOptions::default()
    };
    assert!(matches!(solve_lp(&lp, &limited), Err(Error::IterationLimit(0))));
}

#[test]
fn lp_file_lists_rows_and_bounds() {
    let mut lp = LinearProgram::new(Sense::Minimize);
    let x = lp.add_var(0.0, 5.0, 1.0);
    let y = lp.add_var(f64::NEG_INFINITY, f64::INFINITY, -2.0);
    lp.add_row([(x, 1.0), (y, 1.0)], 1.0, 1.0);
    let text = write_lp(&lp, &DefaultNames);
    assert!(text.starts_with("Minimize"));
    assert!(text.contains("r0: 1 x0 + 1 x1 = 1"));
    assert!(text.contains("x1 free"));
    assert!(text.trim_end().ends_with("End"));
}
