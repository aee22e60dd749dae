use super::*;
use crate::linalg::{kron, trace_norm};
use crate::rains::{gamma_channel, r_max_channel, sandwiched_choi, w_state};

fn dimspec(f: &[usize]) -> DimSpec {
    DimSpec::from_slice(f).unwrap()
}

const EXACT: SepConeMode = SepConeMode::ExactSmallDims;
const RELAXED: SepConeMode = SepConeMode::PptRelaxation;

// Isotropic twirl: the optimal separable σ for Φ_d is pΦ + (1 − p)(I − Φ)/(d² − 1)
// with p ≤ 1/d, giving D_max = −log₂ p at best p = 1/d.
fn isotropic_oracle(d: usize) -> f64 {
    let phi = BipartiteState::max_entangled(d).unwrap();
    let n = d * d;
    let rest = ComplexMatrix::identity(n).sub(phi.matrix()).scale(1.0 / (n as f64 - 1.0));
    let mut best = f64::INFINITY;
    for k in 1..=1000 {
        let p = k as f64 / 1000.0;
        let sigma = phi.matrix().scale(p).add(&rest.scale(1.0 - p));
        let t = partial_transpose(&sigma, phi.dims(), &[1]).unwrap();
        if t.min_eigenvalue().unwrap() < -1e-12 {
            continue;
        }
        best = best.min(crate::rains::dmax(phi.matrix(), &sigma).unwrap());
    }
    best
}

#[test]
fn exact_mode_is_gated() {
    let rho = BipartiteState::random(&dimspec(&[3, 3]), 1).unwrap();
    assert!(matches!(w_sep(&rho, &[1], EXACT), Err(Error::ExactModeUnavailable { product: 9 })));
    let n = Channel::random(2, 4, 2, 1).unwrap();
    assert!(matches!(sigma_channel(&n, EXACT), Err(Error::ExactModeUnavailable { product: 8 })));
    assert_eq!(SepConeMode::for_product(6), EXACT);
    assert_eq!(SepConeMode::for_product(8), RELAXED);
}

#[test]
fn separable_and_maximally_entangled_values() {
    let mut s = crate::random::Sampler::new(3);
    let prod = kron(&s.density_matrix(2, 2), &s.density_matrix(3, 1));
    let rho = BipartiteState::new(prod, dimspec(&[2, 3])).unwrap();
    let r = w_sep(&rho, &[1], EXACT).unwrap();
    assert!((r.value - 1.0).abs() < 1e-6 && r.exact);
    assert!(r.contains_value());
    let phi = BipartiteState::max_entangled(2).unwrap();
    let e = e_max_state(&phi, &[1], EXACT).unwrap();
    assert!((e - 1.0).abs() < 1e-6);
    assert!((isotropic_oracle(2) - e).abs() < 1e-6);
}

#[test]
fn optimizer_is_feasible() {
    let rho = BipartiteState::random(&dimspec(&[2, 3]), 8).unwrap();
    let r = w_sep(&rho, &[1], EXACT).unwrap();
    let x = &r.optimizers[0];
    assert!(x.sub(rho.matrix()).min_eigenvalue().unwrap() >= -1e-8);
    assert!(partial_transpose(x, rho.dims(), &[1]).unwrap().min_eigenvalue().unwrap() >= -1e-8);
    assert!(r.feasibility_residual >= -1e-8);
}

#[test]
fn separable_cone_never_beats_ppt_prime() {
    for seed in 0..10u64 {
        let f: &[usize] = if seed % 2 == 0 { &[2, 2] } else { &[2, 3] };
        let rho = BipartiteState::random(&dimspec(f), 300 + seed).unwrap();
        let ws = w_sep(&rho, &[1], EXACT).unwrap();
        let wr = w_state(&rho, &[1]).unwrap();
        assert!(wr.log2_value <= ws.log2_value + 1e-6);
        let relaxed = w_sep(&rho, &[1], RELAXED).unwrap();
        assert!((relaxed.value - ws.value).abs() < 1e-9);
        assert!(!relaxed.exact);
    }
}

#[test]
fn ppt_entangled_state_is_invisible_to_the_relaxation() {
    let rho = horodecki_ppt_entangled(0.4).unwrap();
    let t = partial_transpose(rho.matrix(), rho.dims(), &[1]).unwrap();
    assert!(t.min_eigenvalue().unwrap() >= -1e-12);
    assert!((trace_norm(&t).unwrap() - 1.0).abs() < 1e-12);
    assert!(w_state(&rho, &[1]).unwrap().log2_value.abs() < 1e-6);
    let r = w_sep(&rho, &[1], RELAXED).unwrap();
    assert!(r.log2_value.abs() < 1e-6);
    assert!(!r.exact);
    assert!(w_sep(&rho, &[1], EXACT).is_err());
    assert!(horodecki_ppt_entangled(1.0).is_err());
}

#[test]
fn sigma_examples() {
    let id = sigma_channel(&Channel::identity(2).unwrap(), EXACT).unwrap();
    assert!((id.value - 2.0).abs() < 1e-6);
    let g = gamma_channel(&Channel::identity(2).unwrap()).unwrap();
    assert!((id.value - g.value).abs() < 1e-6);
    let dep = sigma_channel(&Channel::depolarizing(2, 1.0).unwrap(), EXACT).unwrap();
    assert!((dep.value - 1.0).abs() < 1e-6);
    let er = sigma_channel(&Channel::erasure(2, 1.0).unwrap(), EXACT).unwrap();
    assert!((er.value - 1.0).abs() < 1e-6);
}

#[test]
fn channel_ordering() {
    for seed in 0..6u64 {
        let n = Channel::random(2, 2, 1 + seed as usize % 2, 400 + seed).unwrap();
        let r = r_max_channel(&n).unwrap();
        let e = e_max_channel(&n, EXACT).unwrap();
        assert!(r <= e + 1e-6, "{r} > {e}");
    }
}

#[test]
fn product_operators_link_to_products() {
    let mut s = crate::random::Sampler::new(6);
    let dims = AmortizationDims::new(1, 2, 2);
    let p = s.density_matrix(2, 2);
    let q = s.density_matrix(2, 2);
    let l = s.density_matrix(2, 1);
    let m = s.density_matrix(2, 2);
    let n = Channel::identity(2).unwrap();
    let e = construct_feasible_e_sep(&kron(&p, &q), &kron(&l, &m), &dims, &n).unwrap();
    // Tr_A{P T_A(L)} is the scalar Tr(P Lᵀ) since A′ is trivial
    let scalar = p.matmul(&l.transpose()).trace().re;
    let expect = kron(&m, &q).scale(scalar);
    assert!(e.max_abs_diff(&expect) < 1e-13);
    assert!(e.min_eigenvalue().unwrap() >= -1e-14);
}

#[test]
fn construction_for_identity_and_separable_input() {
    let dims = AmortizationDims::new(1, 2, 2);
    let rho = BipartiteState::random_ppt(&dims.input().unwrap(), &[2], 4).unwrap();
    let rep = verify_emax_amortization(&Channel::identity(2).unwrap(), &rho, &dims, EXACT).unwrap();
    assert!(rep.passed(), "{rep:?}");
    assert!(rep.construction_value <= rep.w_input.value * rep.sigma.value + 1e-6);
}

#[test]
fn maximally_entangled_input_saturates() {
    let dims = AmortizationDims::new(2, 2, 1);
    let phi = BipartiteState::max_entangled(2).unwrap();
    let rho = BipartiteState::new(phi.matrix().clone(), dims.input().unwrap()).unwrap();
    let rep = verify_emax_amortization(&Channel::identity(2).unwrap(), &rho, &dims, EXACT).unwrap();
    assert!((rep.w_input.value - 1.0).abs() < 1e-6);
    assert!((rep.sigma.value - 2.0).abs() < 1e-6);
    assert!((rep.w_output.value - 2.0).abs() < 1e-6);
    assert!(rep.passed());
}

#[test]
fn random_small_instances() {
    for (k, &(ap, bp)) in [(1usize, 2usize), (2, 1), (1, 3), (3, 1)].iter().enumerate() {
        let dims = AmortizationDims::new(ap, 2, bp);
        let (n, rho) = crate::amortization::random_instance(&dims, 2, 500 + k as u64).unwrap();
        let rep = verify_emax_amortization(&n, &rho, &dims, EXACT).unwrap();
        assert!(rep.passed(), "{rep:?}");
    }
}

#[test]
fn relaxed_amortization_keeps_ppt_of_construction() {
    let dims = AmortizationDims::new(2, 2, 2);
    let (n, rho) = crate::amortization::random_instance(&dims, 2, 77).unwrap();
    assert!(verify_emax_amortization(&n, &rho, &dims, EXACT).is_err());
    let rep = verify_emax_amortization(&n, &rho, &dims, RELAXED).unwrap();
    assert!(rep.passed(), "{rep:?}");
    assert!(!rep.exact);
}

#[test]
fn congruent_inner_program_matches_sandwich() {
    let mut s = Sampler::new(8);
    for seed in 0..5 {
        let n = Channel::random(2, 2, 2, 100 + seed).unwrap();
        let rho = s.density_matrix(2, 2);
        let direct = w_sep(&sandwiched_choi(&n, &rho).unwrap(), &[1], EXACT).unwrap().value;
        let congruent = inner_sep_value(&n, &rho, EXACT, &SolveConfig::default()).unwrap();
        assert!((direct - congruent).abs() < 1e-7, "{direct} vs {congruent}");
    }
}

#[test]
fn minimax_identity_channel() {
    let rep = minimax_consistency_check(&Channel::identity(2).unwrap(), 5, 1).unwrap();
    assert!((rep.channel_value - 1.0).abs() < 1e-6);
    assert!((rep.samples[0].inner_value - 1.0).abs() < 1e-6);
    assert!(rep.samples[1].inner_value < 1e-3);
    assert!(rep.samples[2].inner_value.is_finite());
    assert!(rep.all_below);
    assert!(rep.shortfall < 1e-6);
}

#[test]
fn minimax_random_channel() {
    let n = Channel::random(2, 2, 2, 33).unwrap();
    let rep = minimax_consistency_check(&n, 20, 2).unwrap();
    assert!(rep.all_below);
    let sigma = sigma_channel(&n, EXACT).unwrap();
    let best = sandwiched_choi(&n, sigma.dual_witness.as_ref().unwrap()).unwrap();
    let inner = e_max_state(&best, &[1], EXACT).unwrap();
    assert!((inner - rep.channel_value).abs() < 1e-4);
}

#[test]
fn subadditivity_probe_examples() {
    let id = Channel::identity(2).unwrap();
    let p = sigma_subadditivity_probe(&id, &id).unwrap();
    assert!(p.tensor_relaxed <= 2.0 + 1e-6);
    assert!(p.subadditive);
    let dep = Channel::depolarizing(2, 1.0).unwrap();
    let q = sigma_subadditivity_probe(&dep, &id).unwrap();
    assert!(q.tensor_relaxed <= q.parts[1] + 1e-6);
}
