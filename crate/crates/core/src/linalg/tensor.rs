use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{ComplexMatrix, DimSpec, C64};
use crate::error::{Error, Result};

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ra, ca, rb, cb) = (a.rows(), a.cols(), b.rows(), b.cols());
    let mut out = ComplexMatrix::zeros(ra * rb, ca * cb);
    for i in 0..ra {
        for j in 0..ca {
            let aij = a[(i, j)];
            if aij.re == 0.0 && aij.im == 0.0 {
                continue;
            }
            for k in 0..rb {
                for l in 0..cb {
                    out[(i * rb + k, j * cb + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Precomputed digit expansions of every basis index.
struct DigitTable {
    width: usize,
    digits: Vec<usize>,
}

impl DigitTable {
    fn new(dims: &DimSpec) -> Self {
        let n = dims.total();
        let width = dims.len();
        let mut digits = vec![0; n * width];
        for i in 0..n {
            dims.digits(i, &mut digits[i * width..(i + 1) * width]);
        }
        Self { width, digits }
    }

    fn get(&self, i: usize) -> &[usize] {
        &self.digits[i * self.width..(i + 1) * self.width]
    }
}

/// Index of the reduced basis element obtained by dropping `systems`.
fn reduced_index(dims: &DimSpec, digits: &[usize], systems: &[usize]) -> usize {
    let mut idx = 0;
    for (k, &d) in dims.factors().iter().enumerate() {
        if !systems.contains(&k) {
            idx = idx * d + digits[k];
        }
    }
    idx
}

/// Partial trace over the listed factors; remaining factors keep their order.
pub fn partial_trace(x: &ComplexMatrix, dims: &DimSpec, traced: &[usize]) -> Result<ComplexMatrix> {
    dims.check_matrix(x)?;
    dims.check_systems(traced)?;
    let n = dims.total();
    let m = n / dims.product_of(traced);
    let table = DigitTable::new(dims);
    let mut out = ComplexMatrix::zeros(m, m);
    for r in 0..n {
        let dr = table.get(r);
        let rr = reduced_index(dims, dr, traced);
        for c in 0..n {
            let dc = table.get(c);
            if traced.iter().all(|&k| dr[k] == dc[k]) {
                let rc = reduced_index(dims, dc, traced);
                out[(rr, rc)] += x[(r, c)];
            }
        }
    }
    Ok(out)
}

/// Transpose of the listed factors in the computational basis.
pub fn partial_transpose(
    x: &ComplexMatrix,
    dims: &DimSpec,
    transposed: &[usize],
) -> Result<ComplexMatrix> {
    dims.check_matrix(x)?;
    dims.check_systems(transposed)?;
    let n = dims.total();
    let table = DigitTable::new(dims);
    let mut out = ComplexMatrix::zeros(n, n);
    let mut dr2 = vec![0; dims.len()];
    let mut dc2 = vec![0; dims.len()];
    for r in 0..n {
        for c in 0..n {
            dr2.copy_from_slice(table.get(r));
            dc2.copy_from_slice(table.get(c));
            for &k in transposed {
                core::mem::swap(&mut dr2[k], &mut dc2[k]);
            }
            out[(dims.index_of(&dr2), dims.index_of(&dc2))] = x[(r, c)];
        }
    }
    Ok(out)
}

/// Reorders tensor factors: factor `k` of the result is factor `perm[k]`
/// of the input.
pub fn permute_subsystems(x: &ComplexMatrix, dims: &DimSpec, perm: &[usize]) -> Result<ComplexMatrix> {
    dims.check_matrix(x)?;
    if perm.len() != dims.len() {
        return Err(Error::InvalidDims(format!(
            "permutation of length {} for {} factors",
            perm.len(),
            dims.len()
        )));
    }
    dims.check_systems(perm)?;
    let out_dims = DimSpec::new(perm.iter().map(|&k| dims.dim(k)).collect())?;
    let n = dims.total();
    let table = DigitTable::new(dims);
    // new basis index for every old basis index
    let mut map = vec![0; n];
    let mut nd = vec![0; dims.len()];
    for (i, slot) in map.iter_mut().enumerate() {
        let d = table.get(i);
        for (k, &p) in perm.iter().enumerate() {
            nd[k] = d[p];
        }
        *slot = out_dims.index_of(&nd);
    }
    let mut out = ComplexMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            out[(map[r], map[c])] = x[(r, c)];
        }
    }
    Ok(out)
}

/// `Σ_i |i⟩|i⟩` (`normalized = false`, the unnormalized `Υ`) or its
/// unit-norm version `Φ` as a `d² × 1` column.
pub fn max_entangled_vector(d: usize, normalized: bool) -> ComplexMatrix {
    let amp = if normalized { 1.0 / libm::sqrt(d as f64) } else { 1.0 };
    let mut v = vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        v[i * d + i] = C64::new(amp, 0.0);
    }
    ComplexMatrix::column(v)
}

/// `⟨Υ|_{LR} m |Υ⟩_{LR}` with the unnormalized maximally entangled vector
/// on factors `left` and `right`. The result acts on the remaining factors
/// in their original order, returned alongside.
pub fn sandwich_max_entangled(
    m: &ComplexMatrix,
    dims: &DimSpec,
    left: usize,
    right: usize,
) -> Result<(ComplexMatrix, DimSpec)> {
    dims.check_matrix(m)?;
    dims.check_systems(&[left, right])?;
    if dims.dim(left) != dims.dim(right) {
        return Err(Error::DimensionMismatch(format!(
            "contracted factors have dims {} and {}",
            dims.dim(left),
            dims.dim(right)
        )));
    }
    if dims.len() == 2 {
        // full contraction: a scalar
        let d = dims.dim(left);
        let mut s = C64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                let mut di = [0usize; 2];
                let mut dj = [0usize; 2];
                di[left] = i;
                di[right] = i;
                dj[left] = j;
                dj[right] = j;
                s += m[(dims.index_of(&di), dims.index_of(&dj))];
            }
        }
        let out = ComplexMatrix::from_vec(1, 1, vec![s])?;
        return Ok((out, DimSpec::new(vec![1])?));
    }
    let pair = [left, right];
    let out_dims = DimSpec::new(dims.without(&pair))?;
    let n = dims.total();
    let table = DigitTable::new(dims);
    let keep: Vec<usize> = (0..n)
        .filter(|&i| {
            let d = table.get(i);
            d[left] == d[right]
        })
        .collect();
    let reduced: Vec<usize> = keep.iter().map(|&i| reduced_index(dims, table.get(i), &pair)).collect();
    let mut out = ComplexMatrix::zeros(out_dims.total(), out_dims.total());
    for (a, &r) in keep.iter().enumerate() {
        for (b, &c) in keep.iter().enumerate() {
            out[(reduced[a], reduced[b])] += m[(r, c)];
        }
    }
    Ok((out, out_dims))
}

/// Checks `(X_SR ⊗ I_A)|Υ⟩_RA = (T_A(X_SA) ⊗ I_R)|Υ⟩_RA` entrywise at
/// `1e-12 · (1 + max|X|)`, where `dims = [|S|, |R|]` and `A ≅ R`.
pub fn transpose_trick_check(x: &ComplexMatrix, dims: &DimSpec) -> Result<bool> {
    dims.check_matrix(x)?;
    if dims.len() != 2 {
        return Err(Error::InvalidDims(format!("expected two factors S, R, got {}", dims.len())));
    }
    let (s, r) = (dims.dim(0), dims.dim(1));
    let upsilon = max_entangled_vector(r, false);
    // I_S ⊗ |Υ⟩_RA as an operator S -> S R A
    let embed = kron(&ComplexMatrix::identity(s), &upsilon);
    let lhs = kron(x, &ComplexMatrix::identity(r)).matmul(&embed);
    // T_A(X_SA) ⊗ I_R acts on S A R; move to S R A
    let x_sa_t = partial_transpose(x, dims, &[1])?;
    let sar = DimSpec::new(vec![s, r, r])?;
    let op = permute_subsystems(&kron(&x_sa_t, &ComplexMatrix::identity(r)), &sar, &[0, 2, 1])?;
    let rhs = op.matmul(&embed);
    let tol = 1e-12 * (1.0 + x.max_abs());
    Ok(lhs.max_abs_diff(&rhs) <= tol)
}
