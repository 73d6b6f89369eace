//! Symmetric sparse matrices and a direct solver for shifted SPD systems.
//!
//! Matrices keep both triangles in CSR form over a fixed sparsity pattern;
//! every off-diagonal update is written to `(i, j)` and `(j, i)` together,
//! so symmetry is exact. Solves reorder the unknowns with reverse
//! Cuthill-McKee and factor in envelope (skyline) storage.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{PmeError, Result};
use crate::math;

/// Relative residual the direct solver refines towards.
pub const SOLVE_RESIDUAL: f64 = 1e-12;

/// A pivot below this fraction of its original diagonal marks the system singular.
const PIVOT_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymMatrix {
    /// Zero matrix whose pattern holds the diagonal plus both orientations
    /// of every listed pair.
    pub fn with_pattern(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut rows: Vec<BTreeSet<usize>> = (0..n).map(|i| BTreeSet::from([i])).collect();
        for (i, j) in pairs {
            rows[i].insert(j);
            rows[j].insert(i);
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for r in rows {
            col_idx.extend(r);
            row_ptr.push(col_idx.len());
        }
        let values = vec![0.0; col_idx.len()];
        SparseSymMatrix { n, row_ptr, col_idx, values }
    }

    /// Builds `(T + Tᵀ)/2` from the `(row, col, value)` triplets `T`, so a
    /// symmetric input must list both `(i, j)` and `(j, i)`.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut m = Self::with_pattern(n, triplets.iter().map(|&(i, j, _)| (i, j)));
        for &(i, j, v) in triplets {
            if i == j {
                m.add(i, i, v);
            } else {
                m.add(i, j, 0.5 * v);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Same pattern, all values zero.
    pub fn zeroed(&self) -> Self {
        SparseSymMatrix { values: vec![0.0; self.values.len()], ..self.clone() }
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()].binary_search(&j).ok().map(|p| range.start + p)
    }

    /// Adds `v` to `(i, j)` and, for `i != j`, to `(j, i)`.
    ///
    /// Panics if the entry is outside the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j).expect("entry outside sparsity pattern");
        self.values[s] += v;
        if i != j {
            let t = self.slot(j, i).expect("entry outside sparsity pattern");
            self.values[t] += v;
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.values[s])
    }

    pub fn diag(&self, i: usize) -> f64 {
        self.get(i, i)
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn scale(&mut self, c: f64) {
        self.values.iter_mut().for_each(|v| *v *= c);
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(|(&j, &a)| a * x[j]).sum()
            })
            .collect()
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).1.iter().sum()
    }

    /// `xᵀ A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

/// Envelope Cholesky factor of `P (diag(shift) + A) Pᵀ` restricted to a
/// subset of unknowns.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    /// Global index of each unknown in factor order.
    order: Vec<usize>,
    /// First stored column of each factor row.
    first: Vec<usize>,
    /// Offset of each row's envelope in `data`.
    start: Vec<usize>,
    data: Vec<f64>,
}

fn reverse_cuthill_mckee(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let bfs = |root: usize, visited: &mut [bool], out: &mut Vec<usize>| -> usize {
        let mut queue = VecDeque::from([root]);
        visited[root] = true;
        let mut last = root;
        while let Some(v) = queue.pop_front() {
            out.push(v);
            last = v;
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (adj[w].len(), w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
        last
    };
    while order.len() < n {
        let seed = (0..n).filter(|&i| !visited[i]).min_by_key(|&i| (adj[i].len(), i)).unwrap();
        // one sweep towards a pseudo-peripheral start
        let mut scratch = visited.clone();
        let mut tmp = Vec::new();
        let root = bfs(seed, &mut scratch, &mut tmp);
        bfs(root, &mut visited, &mut order);
    }
    order.reverse();
    order
}

impl CholeskyFactor {
    /// Factors `diag(shift) + A` on the unknowns listed in `subset`
    /// (global indices); couplings to unknowns outside the subset are
    /// dropped.
    pub fn new(a: &SparseSymMatrix, shift: &[f64], subset: &[usize]) -> Result<Self> {
        let mut local = vec![usize::MAX; a.dim()];
        for (l, &g) in subset.iter().enumerate() {
            local[g] = l;
        }
        let adj: Vec<Vec<usize>> = subset
            .iter()
            .map(|&g| {
                let (cols, _) = a.row(g);
                cols.iter().filter(|&&c| c != g && local[c] != usize::MAX).map(|&c| local[c]).collect()
            })
            .collect();
        let perm = reverse_cuthill_mckee(&adj);
        let order: Vec<usize> = perm.iter().map(|&l| subset[l]).collect();
        let mut pos = vec![usize::MAX; a.dim()];
        for (p, &g) in order.iter().enumerate() {
            pos[g] = p;
        }

        let n = order.len();
        let mut first = vec![0; n];
        let mut start = vec![0; n + 1];
        for (p, &g) in order.iter().enumerate() {
            let (cols, _) = a.row(g);
            first[p] = cols.iter().filter(|&&c| pos[c] != usize::MAX).map(|&c| pos[c]).min().unwrap_or(p).min(p);
            start[p + 1] = start[p] + (p - first[p] + 1);
        }
        let mut data = vec![0.0; start[n]];
        let mut orig_diag = vec![0.0; n];
        for (p, &g) in order.iter().enumerate() {
            let (cols, vals) = a.row(g);
            for (&c, &v) in cols.iter().zip(vals) {
                let q = pos[c];
                if q != usize::MAX && q <= p {
                    data[start[p] + q - first[p]] += v;
                }
            }
            let d = start[p] + p - first[p];
            data[d] += shift[g];
            orig_diag[p] = data[d];
        }

        for i in 0..n {
            let (fi, si) = (first[i], start[i]);
            for j in fi..i {
                let (fj, sj) = (first[j], start[j]);
                let k0 = fi.max(fj);
                let mut s = data[si + j - fi];
                for k in k0..j {
                    s -= data[si + k - fi] * data[sj + k - fj];
                }
                data[si + j - fi] = s / data[sj + j - fj];
            }
            let mut d = data[si + i - fi];
            for k in fi..i {
                let l = data[si + k - fi];
                d -= l * l;
            }
            if !(d > PIVOT_FLOOR * orig_diag[i].abs()) || !d.is_finite() || !(orig_diag[i] > 0.0) {
                return Err(PmeError::Singular { row: order[i] });
            }
            data[si + i - fi] = math::sqrt(d);
        }
        Ok(CholeskyFactor { order, first, start, data })
    }

    /// Solves for the subset unknowns; `rhs` and the result are indexed
    /// globally and entries outside the subset are left untouched.
    pub fn solve_into(&self, rhs: &[f64], x: &mut [f64]) {
        let n = self.order.len();
        let mut y: Vec<f64> = self.order.iter().map(|&g| rhs[g]).collect();
        for i in 0..n {
            let (fi, si) = (self.first[i], self.start[i]);
            let mut s = y[i];
            for k in fi..i {
                s -= self.data[si + k - fi] * y[k];
            }
            y[i] = s / self.data[si + i - fi];
        }
        for i in (0..n).rev() {
            let (fi, si) = (self.first[i], self.start[i]);
            y[i] /= self.data[si + i - fi];
            let yi = y[i];
            for k in fi..i {
                y[k] -= self.data[si + k - fi] * yi;
            }
        }
        for (i, &g) in self.order.iter().enumerate() {
            x[g] = y[i];
        }
    }
}

fn shifted_residual(a: &SparseSymMatrix, shift: &[f64], subset: &[usize], inside: &[bool], x: &[f64], rhs: &[f64]) -> Vec<f64> {
    let mut r = vec![0.0; a.dim()];
    for &i in subset {
        let (cols, vals) = a.row(i);
        let mut s = shift[i] * x[i];
        for (&c, &v) in cols.iter().zip(vals) {
            if inside[c] {
                s += v * x[c];
            }
        }
        r[i] = rhs[i] - s;
    }
    r
}

/// Solves `(diag(shift) + A) x = rhs` on the unknowns where `mask` is
/// true; other entries of the result are zero and their couplings are
/// ignored. Iterative refinement drives the relative residual towards
/// [`SOLVE_RESIDUAL`].
pub fn spd_solve_masked(a: &SparseSymMatrix, shift: &[f64], rhs: &[f64], mask: &[bool]) -> Result<Vec<f64>> {
    let n = a.dim();
    for len in [shift.len(), rhs.len(), mask.len()] {
        if len != n {
            return Err(PmeError::DimensionMismatch { expected: n, found: len });
        }
    }
    let subset: Vec<usize> = (0..n).filter(|&i| mask[i]).collect();
    let mut x = vec![0.0; n];
    if subset.is_empty() {
        return Ok(x);
    }
    let factor = CholeskyFactor::new(a, shift, &subset)?;
    factor.solve_into(rhs, &mut x);
    let norm = |v: &[f64]| math::sqrt(subset.iter().map(|&i| v[i] * v[i]).sum::<f64>());
    let target = SOLVE_RESIDUAL * norm(rhs);
    for _ in 0..3 {
        let r = shifted_residual(a, shift, &subset, mask, &x, rhs);
        if norm(&r) <= target {
            break;
        }
        let mut dx = vec![0.0; n];
        factor.solve_into(&r, &mut dx);
        for &i in &subset {
            x[i] += dx[i];
        }
    }
    Ok(x)
}

/// Solves `(diag(shift) + A) x = rhs` on all unknowns.
pub fn spd_solve(a: &SparseSymMatrix, shift: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    spd_solve_masked(a, shift, rhs, &vec![true; a.dim()])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> SparseSymMatrix {
        let mut a = SparseSymMatrix::with_pattern(n, (0..n - 1).map(|i| (i, i + 1)));
        for i in 0..n - 1 {
            a.add(i, i, 1.0);
            a.add(i + 1, i + 1, 1.0);
            a.add(i, i + 1, -1.0);
        }
        a
    }

    #[test]
    fn identity_shift_returns_rhs() {
        let a = SparseSymMatrix::with_pattern(3, []);
        let x = spd_solve(&a, &[1.0; 3], &[1.0, -2.0, 3.5]).unwrap();
        assert_eq!(x, vec![1.0, -2.0, 3.5]);
    }

    #[test]
    fn two_by_two_hand_solve() {
        let a = SparseSymMatrix::from_triplets(2, &[(0, 0, 2.0), (1, 1, 2.0), (0, 1, -1.0), (1, 0, -1.0)]);
        let x = spd_solve(&a, &[0.0; 2], &[1.0, 0.0]).unwrap();
        assert!((x[0] - 2.0 / 3.0).abs() < 1e-15 && (x[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn singular_systems_fail() {
        let zero = SparseSymMatrix::with_pattern(2, [(0, 1)]);
        assert!(matches!(spd_solve(&zero, &[0.0; 2], &[1.0, 1.0]), Err(PmeError::Singular { .. })));
        let lap = laplacian_1d(6);
        assert!(matches!(spd_solve(&lap, &[0.0; 6], &[1.0; 6]), Err(PmeError::Singular { .. })));
    }

    #[test]
    fn masked_solve_drops_outside_couplings() {
        let lap = laplacian_1d(4);
        let mask = [true, true, false, false];
        let x = spd_solve_masked(&lap, &[1.0; 4], &[1.0, 2.0, 5.0, 5.0], &mask).unwrap();
        // [[2, -1], [-1, 3]] x = [1, 2]
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
        assert_eq!(&x[2..], &[0.0, 0.0]);
    }

    #[test]
    fn residual_bound_on_grid_laplacian() {
        let (nx, ny) = (17, 11);
        let id = |i: usize, j: usize| j * nx + i;
        let mut pairs = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                if i + 1 < nx {
                    pairs.push((id(i, j), id(i + 1, j)));
                }
                if j + 1 < ny {
                    pairs.push((id(i, j), id(i, j + 1)));
                }
            }
        }
        let mut a = SparseSymMatrix::with_pattern(nx * ny, pairs.iter().copied());
        for &(p, q) in &pairs {
            a.add(p, p, 3.0);
            a.add(q, q, 3.0);
            a.add(p, q, -3.0);
        }
        let n = nx * ny;
        let shift: Vec<f64> = (0..n).map(|i| 1e-3 * (1.0 + (i % 7) as f64)).collect();
        let rhs: Vec<f64> = (0..n).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let x = spd_solve(&a, &shift, &rhs).unwrap();
        let ax = a.mul_vec(&x);
        let res: f64 = (0..n).map(|i| (ax[i] + shift[i] * x[i] - rhs[i]).powi(2)).sum::<f64>().sqrt();
        let rn: f64 = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(res <= 1e-12 * rn, "residual {res}");
    }

    #[test]
    fn triplets_are_symmetrised() {
        let a = SparseSymMatrix::from_triplets(3, &[(0, 2, 1.0), (2, 0, 1.0), (1, 1, 4.0)]);
        assert_eq!(a.get(0, 2), 1.0);
        assert_eq!(a.get(2, 0), 1.0);
        assert_eq!(a.get(0, 1), 0.0);
        assert_eq!(a.diag(1), 4.0);
    }
}
