use alloc::vec;
use alloc::vec::Vec;

use proptest::prelude::*;

use super::*;
use crate::random::Sampler;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn dims(f: &[usize]) -> DimSpec {
    DimSpec::from_slice(f).unwrap()
}

fn random_hermitian(s: &mut Sampler, n: usize) -> ComplexMatrix {
    s.ginibre(n, n).hermitian_part()
}

fn phi(d: usize) -> ComplexMatrix {
    ComplexMatrix::outer(&max_entangled_vector(d, true))
}

fn swap(d: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            m[(i * d + j, j * d + i)] = c(1.0, 0.0);
        }
    }
    m
}

#[test]
fn kron_identity_and_basis_placement() {
    let i2 = ComplexMatrix::identity(2);
    assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
    let p0 = ComplexMatrix::unit(2, 0, 0);
    let p1 = ComplexMatrix::unit(2, 1, 1);
    let k = kron(&p0, &p1);
    let mut expected = ComplexMatrix::zeros(4, 4);
    expected[(1, 1)] = c(1.0, 0.0);
    assert_eq!(k, expected);
}

#[test]
fn kron_matches_definitional_double_loop() {
    let mut s = Sampler::new(7);
    let a = s.ginibre(2, 2);
    let b = s.ginibre(2, 3);
    let k = kron(&a, &b);
    assert_eq!((k.rows(), k.cols()), (4, 6));
    for i in 0..2 {
        for j in 0..2 {
            for p in 0..2 {
                for q in 0..3 {
                    assert_eq!(k[(i * 2 + p, j * 3 + q)], a[(i, j)] * b[(p, q)]);
                }
            }
        }
    }
}

#[test]
fn partial_trace_product_and_maximally_entangled() {
    let mut s = Sampler::new(1);
    let rho = s.density_matrix(2, 2);
    let sigma = random_hermitian(&mut s, 3);
    let pt = partial_trace(&kron(&rho, &sigma), &dims(&[2, 3]), &[1]).unwrap();
    assert!(pt.max_abs_diff(&rho.scale_c(sigma.trace())) < 1e-12);
    let reduced = partial_trace(&phi(2), &dims(&[2, 2]), &[1]).unwrap();
    assert!(reduced.max_abs_diff(&ComplexMatrix::scaled_identity(2, 0.5)) < 1e-15);
}

#[test]
fn partial_trace_matches_index_contraction_oracle() {
    let mut s = Sampler::new(3);
    let x = s.ginibre(6, 6);
    let d = dims(&[2, 3]);
    // x[(a,b),(a',b')] with a∈2, b∈3
    let mut oracle_b = ComplexMatrix::zeros(2, 2);
    let mut oracle_a = ComplexMatrix::zeros(3, 3);
    for a in 0..2 {
        for ap in 0..2 {
            for b in 0..3 {
                oracle_b[(a, ap)] += x[(a * 3 + b, ap * 3 + b)];
            }
        }
    }
    for b in 0..3 {
        for bp in 0..3 {
            for a in 0..2 {
                oracle_a[(b, bp)] += x[(a * 3 + b, a * 3 + bp)];
            }
        }
    }
    assert!(partial_trace(&x, &d, &[1]).unwrap().max_abs_diff(&oracle_b) < 1e-13);
    assert!(partial_trace(&x, &d, &[0]).unwrap().max_abs_diff(&oracle_a) < 1e-13);
    let full = partial_trace(&x, &d, &[0, 1]).unwrap();
    assert!((full[(0, 0)] - x.trace()).norm() < 1e-13);
}

#[test]
fn partial_trace_rejects_inconsistent_dims() {
    let x = ComplexMatrix::identity(6);
    assert!(partial_trace(&x, &dims(&[2, 2]), &[1]).is_err());
    assert!(partial_trace(&x, &dims(&[2, 3]), &[2]).is_err());
    assert!(partial_transpose(&x, &dims(&[3, 3]), &[0]).is_err());
}

#[test]
fn partial_transpose_of_product_and_phi() {
    let mut s = Sampler::new(11);
    let rho = s.density_matrix(2, 2);
    let sigma = s.density_matrix(3, 3);
    let t = partial_transpose(&kron(&rho, &sigma), &dims(&[2, 3]), &[1]).unwrap();
    assert!(t.max_abs_diff(&kron(&rho, &sigma.transpose())) < 1e-15);

    // direct 4x4 expansion: T_B(Φ₂) = SWAP/2
    let tphi = partial_transpose(&phi(2), &dims(&[2, 2]), &[1]).unwrap();
    assert!(tphi.max_abs_diff(&swap(2).scale(0.5)) < 1e-15);
    let ev = tphi.eigenvalues().unwrap();
    let expected = [-0.5, 0.5, 0.5, 0.5];
    for (a, b) in ev.iter().zip(expected) {
        assert!((a - b).abs() < 1e-12, "{ev:?}");
    }
}

#[test]
fn partial_transpose_adjoint_identity() {
    // ⟨T_B(X), Y⟩ = ⟨X, T_B(Y)⟩
    let mut s = Sampler::new(5);
    let d = dims(&[2, 3]);
    let x = random_hermitian(&mut s, 6);
    let y = random_hermitian(&mut s, 6);
    let lhs = partial_transpose(&x, &d, &[1]).unwrap().inner(&y);
    let rhs = x.inner(&partial_transpose(&y, &d, &[1]).unwrap());
    assert!((lhs - rhs).norm() < 1e-12);
}

#[test]
fn trace_norm_examples() {
    assert!((trace_norm(&ComplexMatrix::identity(4)).unwrap() - 4.0).abs() < 1e-12);
    for d in 2..=4 {
        let t = partial_transpose(&phi(d), &dims(&[d, d]), &[1]).unwrap();
        // SWAP/d has d² eigenvalues ±1/d
        assert!((trace_norm(&t).unwrap() - d as f64).abs() < 1e-10);
    }
    let mut s = Sampler::new(2);
    let rho = s.density_matrix(5, 3);
    assert!((trace_norm(&rho).unwrap() - 1.0).abs() < 1e-12);
    // non-Hermitian: sum of singular values of diag(3, -4i) = 7
    let mut m = ComplexMatrix::zeros(2, 2);
    m[(0, 0)] = c(3.0, 0.0);
    m[(1, 1)] = c(0.0, -4.0);
    assert!((trace_norm(&m).unwrap() - 7.0).abs() < 1e-12);
}

fn power_iteration(h: &ComplexMatrix, s: &mut Sampler) -> f64 {
    // on h² so the dominant |λ| wins regardless of sign
    let h2 = h.matmul(h);
    let mut v = s.unit_vector(h.rows());
    let mut lam = 0.0;
    for _ in 0..2000 {
        let w = h2.matmul(&v);
        let norm = w.frobenius_norm();
        v = w.scale(1.0 / norm);
        lam = norm;
    }
    libm::sqrt(lam)
}

#[test]
fn operator_norm_examples() {
    assert!((operator_norm(&ComplexMatrix::identity(3)).unwrap() - 1.0).abs() < 1e-12);
    let d = ComplexMatrix::from_diag(&[3.0, -5.0]);
    assert!((operator_norm(&d).unwrap() - 5.0).abs() < 1e-12);
    assert!(operator_norm(&ComplexMatrix::unit(2, 0, 1)).is_err());
    let mut s = Sampler::new(9);
    let h = random_hermitian(&mut s, 5);
    let norm = operator_norm(&h).unwrap();
    assert!((norm - power_iteration(&h, &mut s)).abs() < 1e-6);
    for _ in 0..50 {
        let v = s.unit_vector(5);
        let rq = expectation(&h, &v).re.abs();
        assert!(rq <= norm + 1e-12);
    }
}

#[test]
fn max_entangled_vector_flavors() {
    assert_eq!(max_entangled_vector(1, false).as_slice(), &[c(1.0, 0.0)]);
    let v = max_entangled_vector(2, false);
    assert_eq!(v.as_slice(), &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    let u5 = max_entangled_vector(5, false);
    assert!((u5.frobenius_norm().powi(2) - 5.0).abs() < 1e-12);
    let p5 = max_entangled_vector(5, true);
    assert!((p5.frobenius_norm() - 1.0).abs() < 1e-12);
}

#[test]
fn sandwich_of_x_tensor_identity_is_partial_trace() {
    let mut s = Sampler::new(21);
    // X on S ⊗ R with |S| = 3, |R| = 2, then ⊗ I_A
    let x = s.ginibre(6, 6);
    let m = kron(&x, &ComplexMatrix::identity(2));
    let (out, out_dims) = sandwich_max_entangled(&m, &dims(&[3, 2, 2]), 1, 2).unwrap();
    assert_eq!(out_dims.factors(), &[3]);
    let expected = partial_trace(&x, &dims(&[3, 2]), &[1]).unwrap();
    assert!(out.max_abs_diff(&expected) < 1e-12);
}

#[test]
fn sandwich_with_identity_channel_choi_returns_input() {
    let mut s = Sampler::new(4);
    let rho = s.density_matrix(2, 2);
    let upsilon = ComplexMatrix::outer(&max_entangled_vector(2, false));
    // ρ_A' ⊗ J_{RB}, contract A' with R
    let m = kron(&rho, &upsilon);
    let (out, out_dims) = sandwich_max_entangled(&m, &dims(&[2, 2, 2]), 0, 1).unwrap();
    assert_eq!(out_dims.factors(), &[2]);
    assert!(out.max_abs_diff(&rho) < 1e-14);
    assert!(sandwich_max_entangled(&m, &dims(&[2, 2, 2]), 0, 0).is_err());
    assert!(sandwich_max_entangled(
        &ComplexMatrix::identity(6),
        &dims(&[2, 3]),
        0,
        1
    )
    .is_err());
}

#[test]
fn transpose_trick_examples() {
    assert!(transpose_trick_check(&ComplexMatrix::identity(4), &dims(&[2, 2])).unwrap());
    assert!(transpose_trick_check(&swap(2), &dims(&[2, 2])).unwrap());
    let mut s = Sampler::new(8);
    for _ in 0..10 {
        let x = s.ginibre(6, 6);
        assert!(transpose_trick_check(&x, &dims(&[3, 2])).unwrap());
    }
}

#[test]
fn real_embedding_examples() {
    assert_eq!(
        ComplexMatrix::identity(2).real_embedding().unwrap(),
        RealMatrix::identity(4)
    );
    let mut y = ComplexMatrix::zeros(2, 2);
    y[(0, 1)] = c(0.0, -1.0);
    y[(1, 0)] = c(0.0, 1.0);
    let ev = y.real_embedding().unwrap().sym_eigenvalues().unwrap();
    for (a, b) in ev.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
        assert!((a - b).abs() < 1e-12);
    }
    let mut s = Sampler::new(13);
    let h = random_hermitian(&mut s, 3);
    let e = h.real_embedding().unwrap();
    assert!((e.trace() - 2.0 * h.trace().re).abs() < 1e-12);
    let complex_ev = h.eigenvalues().unwrap();
    let real_ev = e.sym_eigenvalues().unwrap();
    for (k, lam) in complex_ev.iter().enumerate() {
        assert!((real_ev[2 * k] - lam).abs() < 1e-10);
        assert!((real_ev[2 * k + 1] - lam).abs() < 1e-10);
    }
    assert!(ComplexMatrix::unit(2, 0, 1).real_embedding().is_err());
}

#[test]
fn real_embedding_pairing_with_inverse_map() {
    let mut s = Sampler::new(17);
    let b = random_hermitian(&mut s, 3);
    let g = s.ginibre(6, 6);
    let z = {
        let c = ComplexMatrix::from_real(6, 6, &g.as_slice().iter().map(|z| z.re).collect::<Vec<_>>())
            .unwrap();
        let mut r = RealMatrix::zeros(6, 6);
        for i in 0..6 {
            for j in 0..6 {
                r[(i, j)] = c[(i, j)].re;
            }
        }
        r.matmul_t(&r)
    };
    let back = ComplexMatrix::from_real_embedding(&z).unwrap();
    let lhs = b.real_embedding().unwrap().dot(&z);
    let rhs = 2.0 * b.matmul(&back).trace().re;
    assert!((lhs - rhs).abs() < 1e-10);
    assert!(back.min_eigenvalue().unwrap() >= -1e-12);
    let h = random_hermitian(&mut s, 4);
    let round = ComplexMatrix::from_real_embedding(&h.real_embedding().unwrap()).unwrap();
    assert!(round.max_abs_diff(&h) < 1e-15);
}

#[test]
fn fidelity_examples() {
    let mut s = Sampler::new(6);
    let rho = s.density_matrix(3, 2);
    assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-8);
    let f0 = fidelity(&ComplexMatrix::unit(2, 0, 0), &ComplexMatrix::unit(2, 1, 1)).unwrap();
    assert!(f0.abs() < 1e-12);
    // pure vs mixed: F = ⟨Φ|κ|Φ⟩ = 1/4
    let f = fidelity(&phi(2), &ComplexMatrix::scaled_identity(4, 0.25)).unwrap();
    assert!((f - 0.25).abs() < 1e-10);
    let sigma = s.density_matrix(3, 3);
    let ab = fidelity(&rho, &sigma).unwrap();
    let ba = fidelity(&sigma, &rho).unwrap();
    assert!((ab - ba).abs() < 1e-8);
    assert!(fidelity(&ComplexMatrix::from_diag(&[1.0, -0.5]), &rho).is_err());
}

#[test]
fn hermitian_ingestion_policy() {
    let mut m = ComplexMatrix::identity(2);
    m[(0, 1)] = c(1e-11, 0.0);
    assert!(!m.is_hermitian());
    let h = m.hermitized().unwrap();
    assert!(h.is_hermitian());
    m[(0, 1)] = c(1e-6, 0.0);
    assert!(matches!(m.hermitized(), Err(crate::Error::NotHermitian { .. })));
}

#[test]
fn eigen_reconstruction_and_closed_form() {
    let mut s = Sampler::new(31);
    for n in [1usize, 2, 3, 5, 8, 13] {
        let h = random_hermitian(&mut s, n);
        let (vals, vecs) = hermitian_eigen(&h).unwrap();
        let recon = vecs.matmul(&ComplexMatrix::from_diag(&vals)).matmul(&vecs.adjoint());
        assert!(recon.max_abs_diff(&h) < 1e-11, "n={n}");
        let gram = vecs.adjoint().matmul(&vecs);
        assert!(gram.max_abs_diff(&ComplexMatrix::identity(n)) < 1e-12);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }
    // 2x2 closed form: (a+d)/2 ± sqrt(((a-d)/2)² + |b|²)
    let mut h = ComplexMatrix::zeros(2, 2);
    h[(0, 0)] = c(1.5, 0.0);
    h[(1, 1)] = c(-0.3, 0.0);
    h[(0, 1)] = c(0.4, 0.7);
    h[(1, 0)] = c(0.4, -0.7);
    let mid = 0.6;
    let rad = libm::sqrt(0.9f64.powi(2) + 0.4f64.powi(2) + 0.7f64.powi(2));
    let ev = h.eigenvalues().unwrap();
    assert!((ev[0] - (mid - rad)).abs() < 1e-13);
    assert!((ev[1] - (mid + rad)).abs() < 1e-13);
}

#[test]
fn eigen_handles_degenerate_spectra() {
    let mut s = Sampler::new(2);
    let u = s.unitary(6);
    let h = u.congruence(&ComplexMatrix::from_diag(&[1.0, 1.0, 1.0, -2.0, -2.0, 0.0]));
    let (vals, vecs) = hermitian_eigen(&h).unwrap();
    let expected = [-2.0, -2.0, 0.0, 1.0, 1.0, 1.0];
    for (a, b) in vals.iter().zip(expected) {
        assert!((a - b).abs() < 1e-12);
    }
    let recon = vecs.matmul(&ComplexMatrix::from_diag(&vals)).matmul(&vecs.adjoint());
    assert!(recon.max_abs_diff(&h) < 1e-12);
}

#[test]
fn real_cholesky_and_svd() {
    let mut s = Sampler::new(40);
    let n = 7;
    let mut g = RealMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = s.normal();
        }
    }
    let a = g.matmul_t(&g).add(&RealMatrix::identity(n));
    let l = a.cholesky().unwrap();
    assert!(l.matmul_t(&l).sub(&a).max_abs() < 1e-12);
    let b: Vec<f64> = (0..n).map(|i| i as f64 - 2.0).collect();
    let x = l.cholesky_solve(&b);
    for i in 0..n {
        let r: f64 = (0..n).map(|j| a[(i, j)] * x[j]).sum();
        assert!((r - b[i]).abs() < 1e-10);
    }
    let (u, sigma, v) = g.svd_jacobi().unwrap();
    let recon = u.matmul(&RealMatrix::from_diag(&sigma)).matmul_t(&v);
    assert!(recon.sub(&g).max_abs() < 1e-12);
    assert!(u.transpose().matmul(&u).sub(&RealMatrix::identity(n)).max_abs() < 1e-12);
    assert!(RealMatrix::from_diag(&[1.0, -1.0]).cholesky().is_err());
}

fn hermitian_strategy() -> impl Strategy<Value = (u64, usize, usize)> {
    (any::<u64>(), prop::sample::select(vec![(2usize, 2usize), (2, 3), (3, 3)]))
        .prop_map(|(seed, (a, b))| (seed, a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn partial_transpose_is_trace_preserving_hermitian_involution((seed, a, b) in hermitian_strategy()) {
        let mut s = Sampler::new(seed);
        let d = dims(&[a, b]);
        let x = random_hermitian(&mut s, a * b);
        let t = partial_transpose(&x, &d, &[1]).unwrap();
        prop_assert_eq!(partial_transpose(&t, &d, &[1]).unwrap(), x.clone());
        prop_assert!((t.trace() - x.trace()).norm() < 1e-12);
        prop_assert!(t.is_hermitian());
        // linearity
        let y = random_hermitian(&mut s, a * b);
        let lhs = partial_transpose(&x.add(&y.scale(0.3)), &d, &[1]).unwrap();
        let rhs = t.add(&partial_transpose(&y, &d, &[1]).unwrap().scale(0.3));
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-14);
    }

    #[test]
    fn separable_states_stay_psd_under_partial_transpose((seed, a, b) in hermitian_strategy()) {
        let mut s = Sampler::new(seed);
        let terms = 1 + s.below(4);
        let w = s.simplex(terms);
        let mut sigma = ComplexMatrix::zeros(a * b, a * b);
        for p in w {
            let ra = 1 + s.below(a);
            let tau = s.density_matrix(a, ra);
            let rb = 1 + s.below(b);
            let omega = s.density_matrix(b, rb);
            sigma.axpy(p, &kron(&tau, &omega));
        }
        let t = partial_transpose(&sigma, &dims(&[a, b]), &[1]).unwrap();
        prop_assert!(t.min_eigenvalue().unwrap() >= -1e-10);
    }

    #[test]
    fn real_embedding_preserves_min_eigenvalue(seed in any::<u64>(), n in 1usize..6) {
        let mut s = Sampler::new(seed);
        let h = random_hermitian(&mut s, n);
        let lhs = h.real_embedding().unwrap().min_eigenvalue().unwrap();
        prop_assert!((lhs - h.min_eigenvalue().unwrap()).abs() < 1e-10);
    }

    #[test]
    fn trace_norm_dominates_trace_and_operator_norm(seed in any::<u64>(), n in 1usize..7) {
        let mut s = Sampler::new(seed);
        let h = random_hermitian(&mut s, n);
        let tn = trace_norm(&h).unwrap();
        prop_assert!(tn + 1e-12 >= h.trace().re.abs());
        prop_assert!(tn + 1e-12 >= operator_norm(&h).unwrap());
    }
}
