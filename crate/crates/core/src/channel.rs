//! Quantum channels in Kraus and Choi form, bipartite states, and seeded
//! random instance generators.
//!
//! The Choi operator lives on `S ⊗ B` with `|S| = dim_in` and is built from
//! the unnormalized maximally entangled vector:
//! `J = Σ_k (I ⊗ K_k)|Υ⟩⟨Υ|(I ⊗ K_k)†`, so `Tr_B J = I_S`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigen, kron, partial_trace, partial_transpose, permute_subsystems,
    sandwich_max_entangled, ComplexMatrix, DimSpec, C64,
};
use crate::random::Sampler;

/// Tolerance for trace preservation, complete positivity and state checks.
pub const CHANNEL_TOL: f64 = 1e-10;

/// Completely positive trace-preserving map `dim_in → dim_out`.
#[derive(Debug, Clone)]
pub struct Channel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
    choi: ComplexMatrix,
}

/// A density operator together with its tensor-factor layout.
#[derive(Debug, Clone)]
pub struct BipartiteState {
    matrix: ComplexMatrix,
    dims: DimSpec,
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange(format!("{name} = {p} not in [0, 1]")));
    }
    Ok(())
}

/// `J = Σ_k (I ⊗ K_k)|Υ⟩⟨Υ|(I ⊗ K_k)†`, entry `J[(i,b),(j,b')] = Σ_k K_k[b,i] conj(K_k[b',j])`.
pub fn choi_from_kraus(kraus: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let first = kraus
        .first()
        .ok_or_else(|| Error::DimensionMismatch("empty Kraus list".into()))?;
    let (dout, din) = (first.rows(), first.cols());
    if kraus.iter().any(|k| k.rows() != dout || k.cols() != din) {
        return Err(Error::DimensionMismatch("Kraus operators of unequal shape".into()));
    }
    let residual = tp_residual(kraus, din);
    if residual > CHANNEL_TOL {
        return Err(Error::NotTracePreserving { residual });
    }
    let n = din * dout;
    let mut j = ComplexMatrix::zeros(n, n);
    for k in kraus {
        for i in 0..din {
            for b in 0..dout {
                let kbi = k[(b, i)];
                if kbi.re == 0.0 && kbi.im == 0.0 {
                    continue;
                }
                for jj in 0..din {
                    for bp in 0..dout {
                        j[(i * dout + b, jj * dout + bp)] += kbi * k[(bp, jj)].conj();
                    }
                }
            }
        }
    }
    Ok(j)
}

/// `max |(Σ K†K − I)_ij|`.
fn tp_residual(kraus: &[ComplexMatrix], din: usize) -> f64 {
    let mut sum = ComplexMatrix::zeros(din, din);
    for k in kraus {
        sum = sum.add(&k.adjoint().matmul(k));
    }
    sum.max_abs_diff(&ComplexMatrix::identity(din))
}

impl Channel {
    pub fn from_kraus(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let choi = choi_from_kraus(&kraus)?;
        let (dim_out, dim_in) = (kraus[0].rows(), kraus[0].cols());
        Ok(Self { dim_in, dim_out, kraus, choi })
    }

    /// Builds a channel from its Choi operator on `S ⊗ B`; Kraus operators
    /// are recovered from the spectral decomposition.
    pub fn from_choi(dim_in: usize, dim_out: usize, choi: ComplexMatrix) -> Result<Self> {
        let dims = DimSpec::new(vec![dim_in, dim_out])?;
        dims.check_matrix(&choi)?;
        let choi = choi.hermitized()?;
        let (vals, vecs) = hermitian_eigen(&choi)?;
        let scale = 1.0 + choi.max_abs();
        if vals[0] < -CHANNEL_TOL * scale {
            return Err(Error::NotPositive { min_eigenvalue: vals[0] });
        }
        let marginal = partial_trace(&choi, &dims, &[1])?;
        let residual = marginal.max_abs_diff(&ComplexMatrix::identity(dim_in));
        if residual > CHANNEL_TOL * scale {
            return Err(Error::NotTracePreserving { residual });
        }
        let mut kraus = Vec::new();
        for (k, &lam) in vals.iter().enumerate() {
            if lam <= CHANNEL_TOL * scale {
                continue;
            }
            let amp = libm::sqrt(lam);
            let mut op = ComplexMatrix::zeros(dim_out, dim_in);
            for i in 0..dim_in {
                for b in 0..dim_out {
                    op[(b, i)] = vecs[(i * dim_out + b, k)] * amp;
                }
            }
            kraus.push(op);
        }
        Ok(Self { dim_in, dim_out, kraus, choi })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn choi(&self) -> &ComplexMatrix {
        &self.choi
    }

    /// Layout `[dim_in, dim_out]` of the Choi operator.
    pub fn choi_dims(&self) -> DimSpec {
        DimSpec::new(vec![self.dim_in, self.dim_out]).expect("positive dims")
    }

    /// `max |J_self − J_other|`; channels compare on Choi matrices only.
    pub fn choi_distance(&self, other: &Self) -> f64 {
        if self.dim_in != other.dim_in || self.dim_out != other.dim_out {
            return f64::INFINITY;
        }
        self.choi.max_abs_diff(&other.choi)
    }

    /// Parallel composition `self ⊗ other`, input and output ordered
    /// `(self, other)`.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(kron(a, b));
            }
        }
        Self::from_kraus(kraus)
    }

    /// Sequential composition: `after ∘ self`.
    pub fn then(&self, after: &Self) -> Result<Self> {
        if after.dim_in != self.dim_out {
            return Err(Error::DimensionMismatch(format!(
                "composing output {} with input {}",
                self.dim_out, after.dim_in
            )));
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * after.kraus.len());
        for b in &after.kraus {
            for a in &self.kraus {
                kraus.push(b.matmul(a));
            }
        }
        Self::from_kraus(kraus)
    }

    /// Identity channel on dimension `d`.
    pub fn identity(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::OutOfRange("dimension must be positive".into()));
        }
        Self::from_kraus(vec![ComplexMatrix::identity(d)])
    }

    /// `ρ ↦ (1 − p)ρ + p Tr(ρ) I/d`, Kraus operators from the Weyl basis.
    pub fn depolarizing(d: usize, p: f64) -> Result<Self> {
        check_prob("p", p)?;
        if d == 0 {
            return Err(Error::OutOfRange("dimension must be positive".into()));
        }
        let df = d as f64;
        let mut kraus = Vec::with_capacity(d * d);
        for a in 0..d {
            for b in 0..d {
                let weight = if a == 0 && b == 0 { 1.0 - p + p / (df * df) } else { p / (df * df) };
                if weight == 0.0 {
                    continue;
                }
                kraus.push(weyl(d, a, b).scale(libm::sqrt(weight)));
            }
        }
        Self::from_kraus(kraus)
    }

    /// Erasure channel: with probability `p` the input is replaced by the
    /// flag `|e⟩ = |d⟩` of the `(d+1)`-dimensional output; otherwise the
    /// input is embedded in the first `d` coordinates.
    pub fn erasure(d: usize, p: f64) -> Result<Self> {
        check_prob("p", p)?;
        if d == 0 {
            return Err(Error::OutOfRange("dimension must be positive".into()));
        }
        let mut kraus = Vec::with_capacity(d + 1);
        if p < 1.0 {
            let mut keep = ComplexMatrix::zeros(d + 1, d);
            for i in 0..d {
                keep[(i, i)] = C64::new(libm::sqrt(1.0 - p), 0.0);
            }
            kraus.push(keep);
        }
        if p > 0.0 {
            for i in 0..d {
                let mut erase = ComplexMatrix::zeros(d + 1, d);
                erase[(d, i)] = C64::new(libm::sqrt(p), 0.0);
                kraus.push(erase);
            }
        }
        Self::from_kraus(kraus)
    }

    /// Qubit dephasing `ρ ↦ (1 − p)ρ + p ZρZ`.
    pub fn dephasing(p: f64) -> Result<Self> {
        check_prob("p", p)?;
        let mut kraus = vec![ComplexMatrix::identity(2).scale(libm::sqrt(1.0 - p))];
        if p > 0.0 {
            kraus.push(ComplexMatrix::from_diag(&[1.0, -1.0]).scale(libm::sqrt(p)));
        }
        Self::from_kraus(kraus)
    }

    /// Qubit amplitude damping with decay probability `gamma`.
    pub fn amplitude_damping(gamma: f64) -> Result<Self> {
        check_prob("gamma", gamma)?;
        let k0 = ComplexMatrix::from_diag(&[1.0, libm::sqrt(1.0 - gamma)]);
        let mut kraus = vec![k0];
        if gamma > 0.0 {
            kraus.push(ComplexMatrix::unit(2, 0, 1).scale(libm::sqrt(gamma)));
        }
        Self::from_kraus(kraus)
    }

    /// Replacement channel `ρ ↦ Tr(ρ) σ`.
    pub fn replacement(dim_in: usize, sigma: &ComplexMatrix) -> Result<Self> {
        let (vals, vecs) = hermitian_eigen(sigma)?;
        let d = sigma.rows();
        let mut kraus = Vec::new();
        for (k, &lam) in vals.iter().enumerate() {
            if lam <= 0.0 {
                continue;
            }
            for i in 0..dim_in {
                let mut op = ComplexMatrix::zeros(d, dim_in);
                for r in 0..d {
                    op[(r, i)] = vecs[(r, k)] * libm::sqrt(lam);
                }
                kraus.push(op);
            }
        }
        Self::from_kraus(kraus)
    }

    /// Random channel from a Haar-ish isometry `dim_in → dim_out ⊗ env`.
    pub fn random(dim_in: usize, dim_out: usize, env_dim: usize, seed: u64) -> Result<Self> {
        if dim_in == 0 || dim_out == 0 || env_dim == 0 {
            return Err(Error::OutOfRange("dimensions must be positive".into()));
        }
        if dim_out * env_dim < dim_in {
            return Err(Error::OutOfRange(format!(
                "dim_out·env_dim = {} below dim_in = {dim_in}",
                dim_out * env_dim
            )));
        }
        let mut s = Sampler::new(seed);
        let v = s.isometry(dim_out * env_dim, dim_in);
        Self::from_kraus(split_isometry(&v, dim_out, env_dim))
    }

    /// Applies the channel to a single operator on its input space:
    /// `Σ_k K_k x K_k†`.
    pub fn apply_operator(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.rows() != self.dim_in || !x.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "channel input {} applied to {}x{}",
                self.dim_in,
                x.rows(),
                x.cols()
            )));
        }
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out = out.add(&k.congruence(x));
        }
        Ok(out)
    }
}

/// Generalized Pauli `X^a Z^b`.
fn weyl(d: usize, a: usize, b: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    for j in 0..d {
        let phase = 2.0 * core::f64::consts::PI * ((b * j) % d) as f64 / d as f64;
        m[((j + a) % d, j)] = C64::new(libm::cos(phase), libm::sin(phase));
    }
    m
}

/// Kraus operators `(I ⊗ ⟨e|) V` of an isometry `V : in → out ⊗ env`.
fn split_isometry(v: &ComplexMatrix, dim_out: usize, env_dim: usize) -> Vec<ComplexMatrix> {
    let dim_in = v.cols();
    (0..env_dim)
        .map(|e| {
            let mut k = ComplexMatrix::zeros(dim_out, dim_in);
            for b in 0..dim_out {
                for i in 0..dim_in {
                    k[(b, i)] = v[(b * env_dim + e, i)];
                }
            }
            k
        })
        .collect()
}

/// Applies `n` to factor `acted` of `rho` through the Choi identity
/// `⟨Υ|_{AS} ρ ⊗ J_{SB} |Υ⟩_{AS}`; the output factor takes the place of the
/// input factor.
pub fn apply_channel(n: &Channel, rho: &BipartiteState, acted: usize) -> Result<BipartiteState> {
    let dims = rho.dims();
    dims.check_systems(&[acted])?;
    if dims.dim(acted) != n.dim_in {
        return Err(Error::DimensionMismatch(format!(
            "channel input {} acting on factor of dim {}",
            n.dim_in,
            dims.dim(acted)
        )));
    }
    let k = dims.len();
    let mut joint = dims.factors().to_vec();
    joint.push(n.dim_in);
    joint.push(n.dim_out);
    let joint = DimSpec::new(joint)?;
    let m = kron(rho.matrix(), n.choi());
    let (out, out_dims) = sandwich_max_entangled(&m, &joint, acted, k)?;
    if k == 1 {
        return BipartiteState::new(out, DimSpec::new(vec![n.dim_out])?);
    }
    // remaining order: rho factors without `acted`, then B
    let mut perm: Vec<usize> = (0..k - 1).collect();
    perm.insert(acted, k - 1);
    let out = permute_subsystems(&out, &out_dims, &perm)?;
    let mut new_dims = dims.factors().to_vec();
    new_dims[acted] = n.dim_out;
    BipartiteState::new(out.hermitian_part(), DimSpec::new(new_dims)?)
}

/// Applies a channel acting on the whole state, relabelling the output with
/// `out_dims`.
pub fn apply_global(n: &Channel, rho: &BipartiteState, out_dims: DimSpec) -> Result<BipartiteState> {
    if out_dims.total() != n.dim_out {
        return Err(Error::InvalidDims(format!(
            "output factors {:?} for channel output {}",
            out_dims.factors(),
            n.dim_out
        )));
    }
    let merged = BipartiteState::new(
        rho.matrix().clone(),
        DimSpec::new(vec![rho.dims().total()])?,
    )?;
    let out = apply_channel(n, &merged, 0)?;
    BipartiteState::new(out.matrix, out_dims)
}

/// Whether `T_{B_out} ∘ L ∘ T_{B_in}` is completely positive, i.e. the Choi
/// operator of a bipartite channel `L : A_in B_in → A_out B_out` stays PSD
/// after partial transposition of `R_B` and `B_out`.
pub fn is_ppt_preserving(
    l: &Channel,
    alice: (usize, usize),
    bob: (usize, usize),
    tol: f64,
) -> Result<bool> {
    let dims = DimSpec::new(vec![alice.0, bob.0, alice.1, bob.1])?;
    dims.check_matrix(l.choi())?;
    let t = partial_transpose(l.choi(), &dims, &[1, 3])?;
    Ok(t.min_eigenvalue()? >= -tol)
}

impl BipartiteState {
    /// Validates PSD (to `-1e-10`) and unit trace (to `1e-10`).
    pub fn new(matrix: ComplexMatrix, dims: DimSpec) -> Result<Self> {
        dims.check_matrix(&matrix)?;
        let matrix = matrix.hermitized()?;
        let tr = matrix.trace().re;
        if libm::fabs(tr - 1.0) > CHANNEL_TOL * 10.0 {
            return Err(Error::OutOfRange(format!("state trace {tr} differs from 1")));
        }
        let lam = matrix.min_eigenvalue()?;
        if lam < -CHANNEL_TOL {
            return Err(Error::NotPositive { min_eigenvalue: lam });
        }
        Ok(Self { matrix, dims })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> &DimSpec {
        &self.dims
    }

    pub fn into_parts(self) -> (ComplexMatrix, DimSpec) {
        (self.matrix, self.dims)
    }

    /// Normalized maximally entangled state `Φ_d` on `d ⊗ d`.
    pub fn max_entangled(d: usize) -> Result<Self> {
        let v = crate::linalg::max_entangled_vector(d, true);
        Self::new(ComplexMatrix::outer(&v), DimSpec::new(vec![d, d])?)
    }

    pub fn product(&self, other: &Self) -> Result<Self> {
        let mut dims = self.dims.factors().to_vec();
        dims.extend_from_slice(other.dims.factors());
        Self::new(kron(&self.matrix, &other.matrix), DimSpec::new(dims)?)
    }

    /// Hilbert–Schmidt random state: partial trace of a random pure state
    /// on the system and an equally large environment.
    pub fn random(dims: &DimSpec, seed: u64) -> Result<Self> {
        let mut s = Sampler::new(seed);
        let n = dims.total();
        Self::new(s.density_matrix(n, n), dims.clone())
    }

    pub fn random_pure(dims: &DimSpec, seed: u64) -> Result<Self> {
        let mut s = Sampler::new(seed);
        let v = s.unit_vector(dims.total());
        Self::new(ComplexMatrix::outer(&v), dims.clone())
    }

    /// Random separable mixture across the cut `b_side | rest`: each term is
    /// a random (possibly internally entangled) state on the A side tensored
    /// with one on the B side. PPT across the cut by construction.
    pub fn random_ppt(dims: &DimSpec, b_side: &[usize], seed: u64) -> Result<Self> {
        dims.check_systems(b_side)?;
        let mut s = Sampler::new(seed);
        let a_side: Vec<usize> = (0..dims.len()).filter(|k| !b_side.contains(k)).collect();
        let da = dims.product_of(&a_side);
        let db = dims.product_of(b_side);
        let terms = 1 + s.below(4);
        let weights = s.simplex(terms);
        let mut mixed = ComplexMatrix::zeros(da * db, da * db);
        for w in weights {
            let ra = 1 + s.below(da);
            let rb = 1 + s.below(db);
            let tau = s.density_matrix(da, ra);
            let omega = s.density_matrix(db, rb);
            mixed.axpy(w, &kron(&tau, &omega));
        }
        // (A-side, B-side) back to the original factor order
        let mut grouped: Vec<usize> = a_side.clone();
        grouped.extend_from_slice(b_side);
        let grouped_dims = DimSpec::new(grouped.iter().map(|&k| dims.dim(k)).collect())?;
        let mut inverse = vec![0; dims.len()];
        for (pos, &k) in grouped.iter().enumerate() {
            inverse[k] = pos;
        }
        let out = permute_subsystems(&mixed, &grouped_dims, &inverse)?;
        Self::new(out, dims.clone())
    }
}

/// A one-way LOCC channel `Σ_x F^x ⊗ G^x` on `(A_in ⊗ B_in) → (A_out ⊗ B_out)`:
/// Alice applies an instrument whose outcomes each carry a single Kraus
/// operator (taken from a Haar-random isometry `A_in → A_out ⊗ X`), and Bob
/// applies a Haar-random Stinespring isometry selected by the outcome `x`.
/// The branch count is raised to `⌈a_in / a_out⌉` when smaller.
pub fn random_one_way_locc(
    dims_in: (usize, usize),
    dims_out: (usize, usize),
    branches: usize,
    seed: u64,
) -> Result<Channel> {
    let (a_in, b_in) = dims_in;
    let (a_out, b_out) = dims_out;
    if branches == 0 || a_in == 0 || b_in == 0 || a_out == 0 || b_out == 0 {
        return Err(Error::OutOfRange("dimensions and branch count must be positive".into()));
    }
    let mut s = Sampler::new(seed);
    // an instrument with fewer outcomes than `a_in / a_out` cannot be trace preserving
    let branches = branches.max(a_in.div_ceil(a_out));
    let instrument = split_isometry(&s.isometry(a_out * branches, a_in), a_out, branches);
    let env = b_in.div_ceil(b_out);
    let mut kraus = Vec::new();
    for f in &instrument {
        let w = s.isometry(b_out * env, b_in);
        for g in split_isometry(&w, b_out, env) {
            kraus.push(kron(f, &g));
        }
    }
    Channel::from_kraus(kraus)
}
