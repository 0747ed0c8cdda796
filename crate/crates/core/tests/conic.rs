use ewg_restore::conic::*;

fn solve(p: &ConicProgram) -> ContinuousSolution {
    solve_socp(p, &[], &SolveSettings::default()).unwrap()
}

#[test]
fn norm_of_three_four() {
    let mut p = ConicProgram::new(Sense::Minimize);
    let t = p.add_var("t", f64::NEG_INFINITY, f64::INFINITY);
    p.add_objective(t, 1.0);
    p.add_cone(ConeKind::SecondOrder, vec![AffineExpr::var(t), AffineExpr::constant(3.0), AffineExpr::constant(4.0)], "");
    let s = solve(&p);
    assert_eq!(s.status, SolveStatus::Optimal);
    assert!((s.x[t] - 5.0).abs() < 1e-6, "{}", s.x[t]);
}

#[test]
fn rotated_cone_with_fixed_voltage() {
    // 3² + 4² ≤ v·l with v = 5, written as 2·(v/2)·l
    let mut p = ConicProgram::new(Sense::Minimize);
    let v = p.add_var("v", 5.0, 5.0);
    let l = p.add_var("l", 0.0, f64::INFINITY);
    p.add_objective(l, 1.0);
    p.add_cone(
        ConeKind::Rotated,
        vec![AffineExpr::scaled(v, 0.5), AffineExpr::var(l), AffineExpr::constant(3.0), AffineExpr::constant(4.0)],
        "35",
    );
    let s = solve(&p);
    assert_eq!(s.status, SolveStatus::Optimal);
    assert!((s.x[l] - 5.0).abs() < 1e-6);
}

#[test]
fn contradictory_rows_are_infeasible() {
    let mut p = ConicProgram::new(Sense::Minimize);
    let x = p.add_var("x", f64::NEG_INFINITY, f64::INFINITY);
    p.add_objective(x, 1.0);
    p.add_row(vec![(x, 1.0)], RowKind::Le, 0.0, "");
    p.add_row(vec![(x, -1.0)], RowKind::Le, -1.0, "");
    assert_eq!(solve(&p).status, SolveStatus::Infeasible);
}

#[test]
fn unbounded_direction_detected() {
    let mut p = ConicProgram::new(Sense::Maximize);
    let x = p.add_var("x", 0.0, f64::INFINITY);
    p.add_objective(x, 1.0);
    assert_eq!(solve(&p).status, SolveStatus::Unbounded);
}

fn small_mixed() -> ConicProgram {
    let mut p = ConicProgram::new(Sense::Maximize);
    let b = p.add_binary("b");
    let x = p.add_var("x", 0.0, 10.0);
    let y = p.add_var("y", 0.0, 10.0);
    p.add_objective(x, 1.0);
    p.add_objective(y, 0.5);
    p.add_row(vec![(x, 1.0), (b, -3.0)], RowKind::Le, 0.0, "a");
    p.add_row(vec![(x, 1.0), (y, 1.0)], RowKind::Eq, 4.0, "b");
    p.add_quadratic_le(AffineExpr::constant(5.0), vec![(y, 1.0)], "c");
    p
}

#[test]
fn optimal_solution_rechecks_clean() {
    let p = small_mixed();
    let s = solve(&p);
    assert_eq!(s.status, SolveStatus::Optimal);
    let rep = check_solution(&p, &s.x, 1e-6).unwrap();
    assert!(rep.max_violation() <= 1e-6, "{rep:?}");
    assert!(s.gap <= 1e-8 * (1.0 + s.objective.abs()) + 1e-12);
}

#[test]
fn perturbation_is_flagged() {
    let p = small_mixed();
    let mut x = solve(&p).x;
    x[2] += 1.0;
    let rep = check_solution(&p, &x, 1e-6).unwrap();
    assert!(rep.flagged_rows.contains(&1));
}

#[test]
fn empty_program_empty_report() {
    let p = ConicProgram::new(Sense::Minimize);
    let rep = check_solution(&p, &[], 1e-6).unwrap();
    assert!(rep.is_clean());
    assert!(rep.cones.is_empty());
}

#[test]
fn fixing_binary_never_improves_relaxation() {
    let p = small_mixed();
    let free = solve(&p).objective;
    for v in [0.0, 1.0] {
        let s = solve_socp(&p, &[(0, v)], &SolveSettings::default()).unwrap();
        if s.status == SolveStatus::Optimal {
            assert!(s.objective <= free + 1e-7);
        }
    }
}

#[test]
fn fixing_non_binary_is_rejected() {
    let p = small_mixed();
    assert!(solve_socp(&p, &[(1, 1.0)], &SolveSettings::default()).is_err());
    assert!(solve_socp(&p, &[(0, 0.5)], &SolveSettings::default()).is_err());
}

#[test]
fn deterministic_repeat() {
    let p = small_mixed();
    let a = solve(&p);
    let b = solve(&p);
    assert_eq!(a.status, b.status);
    assert_eq!(a.objective.to_bits(), b.objective.to_bits());
}

#[test]
fn text_round_trip() {
    let mut p = small_mixed();
    p.add_var("free", f64::NEG_INFINITY, f64::INFINITY);
    let text = export_program(&p);
    let q = import_program(&text).unwrap();
    assert_eq!(p, q);
}

#[test]
fn text_errors_carry_line() {
    let err = import_program("CONIC 1\nVARS x\n").unwrap_err();
    assert!(matches!(err, ewg_restore::error::ConicError::Text { line: 2, .. }), "{err:?}");
}
