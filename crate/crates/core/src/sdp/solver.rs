//! Infeasible-start path-following with Nesterov–Todd scaling and a
//! Mehrotra predictor–corrector step.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{IterateRecord, SdpProblem, SdpSolution, SolveStatus};
use crate::error::{Error, Result};
use crate::linalg::RealMatrix;

const STEP_FRACTION: f64 = 0.98;
/// Ray-detection threshold for infeasibility certificates.
const CERT_TOL: f64 = 1e-8;
const CERT_SCALE: f64 = 1e8;
const REFINE_STEPS: usize = 3;
/// Diagonal shift applied to the equilibrated Schur complement when its
/// Cholesky factorization breaks down.
const SCHUR_SHIFT: f64 = 1e-13;

/// Per-block NT scaling: `W = G Gᵀ`, `W S W = X`, `Gᵀ S G = G⁻¹ X G⁻ᵀ = diag(λ)`.
struct Scaling {
    g: RealMatrix,
    g_inv: RealMatrix,
    w: RealMatrix,
    lambda: Vec<f64>,
}

fn nt_scaling(x: &RealMatrix, s: &RealMatrix) -> Result<Scaling> {
    let l = x.cholesky()?;
    let r = s.cholesky()?;
    let (u, d, v) = r.transpose().matmul(&l).svd_jacobi()?;
    let n = x.rows();
    if d.iter().any(|&di| !(di > 0.0)) {
        return Err(Error::Solver("degenerate scaling".into()));
    }
    let mut lv = l.matmul(&v);
    let mut ginv = u.transpose().matmul(&r.transpose());
    for j in 0..n {
        let f = 1.0 / libm::sqrt(d[j]);
        for i in 0..n {
            lv[(i, j)] *= f;
            ginv[(j, i)] *= f;
        }
    }
    let w = lv.matmul_t(&lv);
    Ok(Scaling { g: lv, g_inv: ginv, w, lambda: d })
}

fn blocks_dot(a: &[RealMatrix], b: &[RealMatrix]) -> f64 {
    a.iter().zip(b).map(|(a, b)| a.dot(b)).sum()
}

fn blocks_max_abs(a: &[RealMatrix]) -> f64 {
    a.iter().fold(0.0, |m, b| m.max(b.max_abs()))
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(libm::fabs(*x)))
}

/// Largest `α ∈ (0, 1]` scaled by the fraction-to-boundary rule such that
/// `diag(λ) + α Δ̃ ⪰ 0`.
fn step_length(lambda: &[f64], delta_scaled: &RealMatrix) -> Result<f64> {
    let n = lambda.len();
    let mut m = delta_scaled.clone();
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] /= libm::sqrt(lambda[i] * lambda[j]);
        }
    }
    m.symmetrize();
    let lo = m.min_eigenvalue()?;
    Ok(if lo >= 0.0 { f64::INFINITY } else { -1.0 / lo })
}

/// `W A_j W` restricted to the blocks `A_j` touches.
fn congruence_sparse(a: &super::BlockSparse, w: &[RealMatrix], out: &mut [RealMatrix], touched: &mut Vec<usize>) {
    touched.clear();
    for e in a.entries() {
        if !touched.contains(&e.block) {
            touched.push(e.block);
            let n = w[e.block].rows();
            out[e.block].as_mut_slice()[..n * n].fill(0.0);
        }
        let wb = w[e.block].as_slice();
        let n = w[e.block].rows();
        let ob = out[e.block].as_mut_slice();
        let (p, q, v) = (e.row, e.col, e.value);
        for r in 0..n {
            let wrp = wb[r * n + p] * v;
            let wrq = wb[r * n + q] * v;
            let row = &mut ob[r * n..(r + 1) * n];
            if p == q {
                for c in 0..n {
                    row[c] += wrp * wb[p * n + c];
                }
            } else {
                for c in 0..n {
                    row[c] += wrp * wb[q * n + c] + wrq * wb[p * n + c];
                }
            }
        }
    }
}

/// Schur complement `M_ij = ⟨A_i, W A_j W⟩`.
fn schur(problem: &SdpProblem, w: &[RealMatrix]) -> RealMatrix {
    let m = problem.num_constraints();
    let mut out = RealMatrix::zeros(m, m);
    let mut scratch = problem.zero_blocks();
    let mut touched = Vec::new();
    let cons = problem.constraints();
    for j in 0..m {
        congruence_sparse(&cons[j], w, &mut scratch, &mut touched);
        for i in j..m {
            let mut acc = 0.0;
            for e in cons[i].entries() {
                if !touched.contains(&e.block) {
                    continue;
                }
                let b = &scratch[e.block];
                acc += if e.row == e.col {
                    e.value * b[(e.row, e.row)]
                } else {
                    e.value * (b[(e.row, e.col)] + b[(e.col, e.row)])
                };
            }
            out[(i, j)] = acc;
            out[(j, i)] = acc;
        }
    }
    out
}

/// Cholesky factor of the diagonally equilibrated Schur complement
/// `D M D`, `D = diag(M_ii)^{-1/2}`.
struct SchurFactor {
    l: RealMatrix,
    d: Vec<f64>,
}

impl SchurFactor {
    fn new(m: &RealMatrix) -> Result<Self> {
        let n = m.rows();
        let d: Vec<f64> = (0..n)
            .map(|i| if m[(i, i)] > 0.0 { 1.0 / libm::sqrt(m[(i, i)]) } else { 1.0 })
            .collect();
        let mut e = m.clone();
        for i in 0..n {
            for j in 0..n {
                e[(i, j)] *= d[i] * d[j];
            }
        }
        let l = match e.cholesky() {
            Ok(l) => l,
            Err(_) => {
                for i in 0..n {
                    e[(i, i)] += SCHUR_SHIFT;
                }
                e.cholesky()?
            }
        };
        Ok(SchurFactor { l, d })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let scaled: Vec<f64> = b.iter().zip(&self.d).map(|(b, d)| b * d).collect();
        let mut x = self.l.cholesky_solve(&scaled);
        for (x, d) in x.iter_mut().zip(&self.d) {
            *x *= d;
        }
        x
    }
}

struct Direction {
    dx: Vec<RealMatrix>,
    dy: Vec<f64>,
    ds: Vec<RealMatrix>,
}

/// Solves `A(ΔX) = rp`, `A*(Δy) + ΔS = Rd`, `ΔX + W ΔS W = H`.
fn direction(
    problem: &SdpProblem,
    chol_m: &SchurFactor,
    scal: &[Scaling],
    rp: &[f64],
    rd: &[RealMatrix],
    h: &[RealMatrix],
) -> Direction {
    let wrdw: Vec<RealMatrix> = scal
        .iter()
        .zip(rd)
        .map(|(sc, r)| sc.w.matmul(r).matmul(&sc.w))
        .collect();
    let ah = problem.apply(h);
    let awrdw = problem.apply(&wrdw);
    let rhs: Vec<f64> = (0..rp.len()).map(|k| rp[k] - ah[k] + awrdw[k]).collect();
    let dy = chol_m.solve(&rhs);
    let mut d = assemble(problem, scal, rd, h, &dy);
    // iterative refinement against the unfactored equation A(ΔX) = rp,
    // kept only while it reduces the defect
    let defect = |d: &Direction| {
        let adx = problem.apply(&d.dx);
        rp.iter().zip(&adx).map(|(r, a)| r - a).collect::<Vec<f64>>()
    };
    let mut err = defect(&d);
    for _ in 0..REFINE_STEPS {
        let size = inf_norm(&err);
        if size <= f64::EPSILON * (1.0 + inf_norm(rp)) {
            break;
        }
        let corr = chol_m.solve(&err);
        let dy: Vec<f64> = d.dy.iter().zip(&corr).map(|(y, c)| y + c).collect();
        let next = assemble(problem, scal, rd, h, &dy);
        let next_err = defect(&next);
        if inf_norm(&next_err) >= size {
            break;
        }
        d = next;
        err = next_err;
    }
    d
}

fn assemble(problem: &SdpProblem, scal: &[Scaling], rd: &[RealMatrix], h: &[RealMatrix], dy: &[f64]) -> Direction {
    let aty = problem.adjoint(dy);
    let ds: Vec<RealMatrix> = rd.iter().zip(&aty).map(|(r, a)| r.sub(a)).collect();
    let dx: Vec<RealMatrix> = scal
        .iter()
        .zip(&ds)
        .zip(h)
        .map(|((sc, d), h)| {
            let mut v = h.sub(&sc.w.matmul(d).matmul(&sc.w));
            v.symmetrize();
            v
        })
        .collect();
    Direction { dx, dy: dy.to_vec(), ds }
}

/// Scaled directions `G⁻¹ ΔX G⁻ᵀ` and `Gᵀ ΔS G` per block.
fn scaled(scal: &[Scaling], d: &Direction) -> (Vec<RealMatrix>, Vec<RealMatrix>) {
    let dx = scal
        .iter()
        .zip(&d.dx)
        .map(|(sc, dx)| sc.g_inv.matmul(dx).matmul_t(&sc.g_inv))
        .collect();
    let ds = scal
        .iter()
        .zip(&d.ds)
        .map(|(sc, ds)| sc.g.transpose().matmul(ds).matmul(&sc.g))
        .collect();
    (dx, ds)
}

fn steps(scal: &[Scaling], dxs: &[RealMatrix], dss: &[RealMatrix], fraction: f64) -> Result<(f64, f64)> {
    let mut ap = f64::INFINITY;
    let mut ad = f64::INFINITY;
    for ((sc, dx), ds) in scal.iter().zip(dxs).zip(dss) {
        ap = ap.min(step_length(&sc.lambda, dx)?);
        ad = ad.min(step_length(&sc.lambda, ds)?);
    }
    Ok(((fraction * ap).min(1.0), (fraction * ad).min(1.0)))
}

/// `H = G Z Gᵀ` with `Z_ij = 2 Rc_ij / (λ_i + λ_j)`.
fn complementarity_rhs(sc: &Scaling, rc: &RealMatrix) -> RealMatrix {
    let n = sc.lambda.len();
    let mut z = rc.clone();
    for i in 0..n {
        for j in 0..n {
            z[(i, j)] = 2.0 * rc[(i, j)] / (sc.lambda[i] + sc.lambda[j]);
        }
    }
    let mut h = sc.g.matmul(&z).matmul_t(&sc.g);
    h.symmetrize();
    h
}

struct Iterate {
    x: Vec<RealMatrix>,
    y: Vec<f64>,
    s: Vec<RealMatrix>,
}

struct Measures {
    pobj: f64,
    dobj: f64,
    gap: f64,
    rel_gap: f64,
    pres: f64,
    dres: f64,
    rp: Vec<f64>,
    rd: Vec<RealMatrix>,
}

fn measure(problem: &SdpProblem, c: &[RealMatrix], it: &Iterate) -> Measures {
    let pobj = blocks_dot(c, &it.x);
    let dobj: f64 = problem.rhs().iter().zip(&it.y).map(|(b, y)| b * y).sum();
    let ax = problem.apply(&it.x);
    let rp: Vec<f64> = problem.rhs().iter().zip(&ax).map(|(b, a)| b - a).collect();
    let aty = problem.adjoint(&it.y);
    let rd: Vec<RealMatrix> = c
        .iter()
        .zip(&aty)
        .zip(&it.s)
        .map(|((c, a), s)| c.sub(a).sub(s))
        .collect();
    let gap = pobj - dobj;
    Measures {
        pobj,
        dobj,
        gap,
        rel_gap: libm::fabs(gap) / (1.0 + libm::fabs(pobj) + libm::fabs(dobj)),
        pres: inf_norm(&rp),
        dres: blocks_max_abs(&rd),
        rp,
        rd,
    }
}

fn finish(it: Iterate, m: &Measures, status: SolveStatus, iterations: usize, history: Vec<IterateRecord>) -> SdpSolution {
    SdpSolution {
        x: it.x,
        y: it.y,
        s: it.s,
        primal_obj: m.pobj,
        dual_obj: m.dobj,
        gap: m.gap,
        primal_residual: m.pres,
        dual_residual: m.dres,
        status,
        iterations,
        history,
    }
}

/// Solves the program to relative tolerance `tol` (objective gap relative to
/// `1 + |p| + |d|`, absolute primal and dual residuals).
///
/// Returns an error only for invalid input; non-convergence is reported as
/// [`SolveStatus::NumericalTrouble`] carrying the best iterate.
pub fn solve(problem: &SdpProblem, tol: f64, max_iters: usize) -> Result<SdpSolution> {
    if !(1e-12..=1e-4).contains(&tol) {
        return Err(Error::OutOfRange(format!("tol = {tol} not in [1e-12, 1e-4]")));
    }
    let mut problem = problem.clone();
    problem.validate()?;
    let problem = &problem;
    let blocks = problem.blocks().to_vec();
    let n_total: usize = blocks.iter().sum();
    let c = problem.dense_objective();
    let eta = 1.0 + inf_norm(problem.rhs()).max(problem.objective_scale());
    let mut it = Iterate {
        x: blocks.iter().map(|&n| RealMatrix::scaled_identity(n, eta)).collect(),
        y: vec![0.0; problem.num_constraints()],
        s: blocks.iter().map(|&n| RealMatrix::scaled_identity(n, eta)).collect(),
    };
    let scale_b = inf_norm(problem.rhs());
    let scale_c = problem.objective_scale();
    let mut history = Vec::new();
    let mut best: Option<(f64, Iterate, usize)> = None;

    for iter in 0..=max_iters {
        let m = measure(problem, &c, &it);
        history.push(IterateRecord {
            primal_obj: m.pobj,
            dual_obj: m.dobj,
            primal_residual: m.pres,
            dual_residual: m.dres,
        });
        if m.rel_gap <= tol && m.pres <= tol && m.dres <= tol {
            return Ok(finish(it, &m, SolveStatus::Optimal, iter, history));
        }
        let merit = m.rel_gap.max(m.pres / (1.0 + scale_b)).max(m.dres / (1.0 + scale_c));
        if best.as_ref().is_none_or(|(b, _, _)| merit < *b) {
            best = Some((merit, Iterate { x: it.x.clone(), y: it.y.clone(), s: it.s.clone() }, iter));
        }
        // dual ray: bᵀy large while C − A*(y) − S stays bounded
        if m.dobj > CERT_SCALE * (1.0 + scale_c) {
            let ray = blocks_max_abs(&c.iter().zip(&m.rd).map(|(c, r)| c.sub(r)).collect::<Vec<_>>());
            if ray / m.dobj <= CERT_TOL * (1.0 + scale_c) || m.dobj.is_infinite() {
                return Ok(finish(it, &m, SolveStatus::PrimalInfeasibleCertificate, iter, history));
            }
        }
        if -m.pobj > CERT_SCALE * (1.0 + scale_b) {
            let ax = problem.apply(&it.x);
            if inf_norm(&ax) / -m.pobj <= CERT_TOL * (1.0 + scale_b) {
                return Ok(finish(it, &m, SolveStatus::DualInfeasibleCertificate, iter, history));
            }
        }
        if iter == max_iters {
            break;
        }
        match step(problem, &mut it, &m, n_total) {
            Ok(()) => {}
            Err(_) => break,
        }
        if it.x.iter().chain(&it.s).any(|b| b.as_slice().iter().any(|v| !v.is_finite())) {
            break;
        }
    }
    let (_, it, iters) = best.expect("at least one iterate");
    let m = measure(problem, &c, &it);
    Ok(finish(it, &m, SolveStatus::NumericalTrouble, iters, history))
}

fn step(problem: &SdpProblem, it: &mut Iterate, m: &Measures, n_total: usize) -> Result<()> {
    let mu = blocks_dot(&it.x, &it.s) / n_total as f64;
    let scal: Vec<Scaling> = it
        .x
        .iter()
        .zip(&it.s)
        .map(|(x, s)| nt_scaling(x, s))
        .collect::<Result<_>>()?;
    let w: Vec<RealMatrix> = scal.iter().map(|sc| sc.w.clone()).collect();
    let chol = SchurFactor::new(&schur(problem, &w))?;

    // predictor
    let h_aff: Vec<RealMatrix> = it.x.iter().map(|x| x.scale(-1.0)).collect();
    let aff = direction(problem, &chol, &scal, &m.rp, &m.rd, &h_aff);
    let (dxa, dsa) = scaled(&scal, &aff);
    let (ap, ad) = steps(&scal, &dxa, &dsa, 1.0)?;
    let mut mu_aff = 0.0;
    for b in 0..it.x.len() {
        let mut xa = it.x[b].clone();
        xa.axpy(ap, &aff.dx[b]);
        let mut sa = it.s[b].clone();
        sa.axpy(ad, &aff.ds[b]);
        mu_aff += xa.dot(&sa);
    }
    mu_aff /= n_total as f64;
    let sigma = if mu > 0.0 {
        let r = (mu_aff / mu).clamp(0.0, 1.0);
        r * r * r
    } else {
        0.0
    };

    // corrector
    let h: Vec<RealMatrix> = scal
        .iter()
        .enumerate()
        .map(|(b, sc)| {
            let n = sc.lambda.len();
            let cross = dxa[b].matmul(&dsa[b]);
            let mut rc = RealMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    rc[(i, j)] = -0.5 * (cross[(i, j)] + cross[(j, i)]);
                }
                rc[(i, i)] += sigma * mu - sc.lambda[i] * sc.lambda[i];
            }
            complementarity_rhs(sc, &rc)
        })
        .collect();
    let dir = direction(problem, &chol, &scal, &m.rp, &m.rd, &h);
    let (dxs, dss) = scaled(&scal, &dir);
    let (ap, ad) = steps(&scal, &dxs, &dss, STEP_FRACTION)?;
    for b in 0..it.x.len() {
        it.x[b].axpy(ap, &dir.dx[b]);
        it.x[b].symmetrize();
        it.s[b].axpy(ad, &dir.ds[b]);
        it.s[b].symmetrize();
    }
    for (y, d) in it.y.iter_mut().zip(&dir.dy) {
        *y += ad * d;
    }
    Ok(())
}
