use alloc::vec;

use super::*;
use crate::linalg::{ComplexMatrix, C64};
use crate::random::Sampler;

fn random_hermitian(s: &mut Sampler, n: usize) -> ComplexMatrix {
    let g = s.ginibre(n, n);
    g.add(&g.adjoint()).scale(0.5)
}


#[test]
fn trace_above_hermitian_is_positive_eigenvalue_sum() {
    let mut s = Sampler::new(11);
    for _ in 0..4 {
        let m = random_hermitian(&mut s, 4);
        let mut p = HermitianProgram::new();
        let x = p.hermitian_psd_var(4);
        p.add_objective_trace(x, 1.0).unwrap();
        p.hermitian_lmi(vec![Term::identity(1.0, x)], &m).unwrap();
        let sol = p.solve(DEFAULT_TOL, DEFAULT_MAX_ITERS).unwrap();
        assert_eq!(sol.sdp.status, SolveStatus::Optimal);
        assert!(sol.report.passed, "{:?}", sol.report);
        let oracle: f64 = m.eigenvalues().unwrap().iter().filter(|&&l| l > 0.0).sum();
        assert!((sol.primal_obj() - oracle).abs() < 1e-7, "{} vs {oracle}", sol.primal_obj());
    }
}

#[test]
fn epigraph_gives_largest_eigenvalue() {
    let mut s = Sampler::new(12);
    for _ in 0..4 {
        let m = random_hermitian(&mut s, 4).add(&ComplexMatrix::scaled_identity(4, 5.0));
        let mut p = HermitianProgram::new();
        let t = p.scalar_var();
        p.add_objective_trace(t, 1.0).unwrap();
        p.hermitian_lmi(vec![Term::new(1.0, t, LinearMap::ScalarIdentity(4))], &m).unwrap();
        let sol = p.solve(DEFAULT_TOL, DEFAULT_MAX_ITERS).unwrap();
        assert_eq!(sol.sdp.status, SolveStatus::Optimal);
        let oracle = m.max_eigenvalue().unwrap();
        assert!((sol.scalar(t) - oracle).abs() < 1e-7);
    }
}

#[test]
fn tiny_lp() {
    // x − s = 3, minimize x
    let mut p = SdpProblem::new(vec![1, 1]);
    p.add_objective(0, 0, 0, 1.0);
    let mut a = BlockSparse::new();
    a.push(0, 0, 0, 1.0);
    a.push(1, 0, 0, -1.0);
    p.add_constraint(a, 3.0);
    let sol = solve(&p, DEFAULT_TOL, DEFAULT_MAX_ITERS).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert!((sol.primal_obj - 3.0).abs() < 1e-7);
    let rep = verify(&p, &sol, DEFAULT_TOL).unwrap();
    assert!(rep.passed);
    let (lo, hi) = rep.interval();
    assert!(lo <= 3.0 + 1e-8 && hi >= 3.0 - 1e-8);
}

#[test]
fn complex_rank_one_dominance() {
    let v = ComplexMatrix::column(vec![
        C64::new(1.0 / 2f64.sqrt(), 0.0),
        C64::new(0.0, 1.0 / 2f64.sqrt()),
    ]);
    let mut p = HermitianProgram::new();
    let x = p.hermitian_psd_var(2);
    p.add_objective_trace(x, 1.0).unwrap();
    p.hermitian_lmi(vec![Term::identity(1.0, x)], &ComplexMatrix::outer(&v)).unwrap();
    let sol = p.solve(DEFAULT_TOL, DEFAULT_MAX_ITERS).unwrap();
    assert!((sol.primal_obj() - 1.0).abs() < 1e-7);
    assert!(sol.value(x).max_abs_diff(&ComplexMatrix::outer(&v)) < 1e-4);
}

#[test]
fn real_data_matches_direct_real_program() {
    let mut s = Sampler::new(13);
    let g = s.ginibre(3, 3).map(|z| C64::new(z.re, 0.0));
    let m = g.add(&g.adjoint()).scale(0.5);
    let mut hp = HermitianProgram::new();
    let x = hp.hermitian_psd_var(3);
    hp.add_objective_trace(x, 1.0).unwrap();
    hp.hermitian_lmi(vec![Term::identity(1.0, x)], &m).unwrap();
    let embedded = hp.solve(DEFAULT_TOL, DEFAULT_MAX_ITERS).unwrap();

    // X − S = M directly over real symmetric blocks
    let mut p = SdpProblem::new(vec![3, 3]);
    for i in 0..3 {
        p.add_objective(0, i, i, 1.0);
    }
    for i in 0..3 {
        for j in i..3 {
            let mut a = BlockSparse::new();
            a.push(0, i, j, 1.0);
            a.push(1, i, j, -1.0);
            p.add_constraint(a, m[(i, j)].re);
        }
    }
    let direct = solve(&p, DEFAULT_TOL, DEFAULT_MAX_ITERS).unwrap();
    assert!((embedded.primal_obj() - direct.primal_obj).abs() < 1e-7);
}

#[test]
fn embedding_trace_bookkeeping() {
    let h = ComplexMatrix::from_diag(&[1.0, 2.0, 3.0]);
    assert!((h.real_embedding().unwrap().trace() - 2.0 * h.trace().re).abs() < 1e-15);
    // min Tr X with X ⪰ H diagonal: the reported optimum is the complex trace
    let mut p = HermitianProgram::new();
    let x = p.hermitian_psd_var(3);
    p.add_objective_trace(x, 1.0).unwrap();
    p.hermitian_lmi(vec![Term::identity(1.0, x)], &h).unwrap();
    let sol = p.solve(DEFAULT_TOL, DEFAULT_MAX_ITERS).unwrap();
    assert!((sol.primal_obj() - 6.0).abs() < 1e-7);
}

#[test]
fn perturbed_solution_fails_verification() {
    let mut p = SdpProblem::new(vec![1, 1]);
    p.add_objective(0, 0, 0, 1.0);
    let mut a = BlockSparse::new();
    a.push(0, 0, 0, 1.0);
    a.push(1, 0, 0, -1.0);
    p.add_constraint(a, 3.0);
    let mut sol = solve(&p, DEFAULT_TOL, DEFAULT_MAX_ITERS).unwrap();
    assert!(verify(&p, &sol, DEFAULT_TOL).unwrap().passed);
    sol.x[0][(0, 0)] += 1e-3;
    let rep = verify(&p, &sol, DEFAULT_TOL).unwrap();
    assert!(!rep.passed);
    assert!(rep.primal_residual > 5e-4);
}


#[test]
fn random_regression_suite() {
    for seed in 0..20u64 {
        let p = random_feasible(1000 + seed);
        let sol = solve(&p, DEFAULT_TOL, 200).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal, "seed {seed}: {:?}", sol.history.last());
        assert!(sol.iterations <= 200);
        let rep = verify(&p, &sol, DEFAULT_TOL).unwrap();
        assert!(rep.passed, "seed {seed}: {rep:?}");
        let rel = rep.gap.abs() / (1.0 + rep.primal_obj.abs() + rep.dual_obj.abs());
        assert!(rel <= 1e-8);
        // weak duality on the returned iterate and every feasible one
        let scale = 1.0 + rep.primal_obj.abs();
        assert!(sol.dual_obj <= sol.primal_obj + 1e-9 * scale);
        for r in &sol.history {
            if r.primal_residual <= 1e-9 && r.dual_residual <= 1e-9 {
                assert!(r.dual_obj <= r.primal_obj + 1e-9 * scale);
            }
        }
    }
}

#[test]
fn infeasible_lp_yields_certificate() {
    // x = −1 with x ≥ 0
    let mut p = SdpProblem::new(vec![1]);
    p.add_objective(0, 0, 0, 1.0);
    let mut a = BlockSparse::new();
    a.push(0, 0, 0, 1.0);
    p.add_constraint(a, -1.0);
    let sol = solve(&p, DEFAULT_TOL, DEFAULT_MAX_ITERS).unwrap();
    assert_eq!(sol.status, SolveStatus::PrimalInfeasibleCertificate);
}

#[test]
fn unbounded_lp_yields_certificate() {
    // minimize −x₁ with x₁ = x₂, both ≥ 0
    let mut p = SdpProblem::new(vec![1, 1]);
    p.add_objective(0, 0, 0, -1.0);
    let mut a = BlockSparse::new();
    a.push(0, 0, 0, 1.0);
    a.push(1, 0, 0, -1.0);
    p.add_constraint(a, 0.0);
    let sol = solve(&p, DEFAULT_TOL, DEFAULT_MAX_ITERS).unwrap();
    assert_eq!(sol.status, SolveStatus::DualInfeasibleCertificate);
}

#[test]
fn solves_are_deterministic() {
    let p = random_feasible(77);
    let a = solve(&p, DEFAULT_TOL, 200).unwrap();
    let b = solve(&p, DEFAULT_TOL, 200).unwrap();
    assert_eq!(a.history, b.history);
    assert_eq!(a.y, b.y);
}

#[test]
fn ingestion_rejects_dependent_constraints_and_bad_tol() {
    let mut p = SdpProblem::new(vec![2]);
    p.add_objective(0, 0, 0, 1.0);
    let mut a = BlockSparse::new();
    a.push(0, 0, 1, 1.0);
    p.add_constraint(a.clone(), 1.0);
    let mut twice = BlockSparse::new();
    twice.push(0, 1, 0, 2.0);
    p.add_constraint(twice, 2.0);
    assert!(matches!(solve(&p, DEFAULT_TOL, 50), Err(Error::RankDeficient { .. })));
    let mut q = SdpProblem::new(vec![1]);
    q.add_constraint(BlockSparse::new(), 0.0);
    assert!(solve(&q, DEFAULT_TOL, 50).is_err());
    let mut r = SdpProblem::new(vec![1]);
    let mut one = BlockSparse::new();
    one.push(0, 0, 0, 1.0);
    r.add_constraint(one, 1.0);
    assert!(matches!(solve(&r, 1e-3, 50), Err(Error::OutOfRange(_))));
}

#[test]
fn iteration_cap_reports_trouble() {
    let p = random_feasible(5);
    let sol = solve(&p, DEFAULT_TOL, 2).unwrap();
    assert_eq!(sol.status, SolveStatus::NumericalTrouble);
}
