//! Compressed sparse rows and an envelope Cholesky factorization.

use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicate entries in input order, so the result does not depend
    /// on how the triplets were produced as long as their order is fixed.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0; n + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            if last == Some((i, j)) {
                if let Some(x) = values.last_mut() {
                    *x += v;
                }
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix { n, row_ptr, col_idx, values }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map(|(_, v)| v).unwrap_or(0.0)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).into_par_iter().map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// `max |a_ij - a_ji| / max |a_ij|`.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst / scale
    }

    /// Principal submatrix on `keep` (in that order).
    pub fn restrict(&self, keep: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut triplets = Vec::new();
        for (new_i, &old_i) in keep.iter().enumerate() {
            for (j, v) in self.row(old_i) {
                if map[j] != usize::MAX {
                    triplets.push((new_i, map[j], v));
                }
            }
        }
        Self::from_triplets(keep.len(), triplets)
    }

    /// Symmetric permutation `P A Pᵀ` with `perm[new] = old`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        self.restrict(perm)
    }

    fn degree(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }
}

fn bfs_levels(a: &CsrMatrix, start: usize, seen: &mut [bool]) -> Vec<usize> {
    let mut order = vec![start];
    seen[start] = true;
    let mut head = 0;
    while head < order.len() {
        let i = order[head];
        head += 1;
        let mut nbrs: Vec<usize> = a.row(i).map(|(j, _)| j).filter(|&j| !seen[j]).collect();
        nbrs.sort_by_key(|&j| (a.degree(j), j));
        for j in nbrs {
            if !seen[j] {
                seen[j] = true;
                order.push(j);
            }
        }
    }
    order
}

/// Reverse Cuthill–McKee ordering (`perm[new] = old`) of the sparsity graph.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.dim();
    let mut seen = vec![false; n];
    let mut perm = Vec::with_capacity(n);
    let mut candidates: Vec<usize> = (0..n).collect();
    candidates.sort_by_key(|&i| (a.degree(i), i));
    for &seed in &candidates {
        if seen[seed] {
            continue;
        }
        // walk to a pseudo-peripheral node of this component
        let mut start = seed;
        let mut scratch = seen.clone();
        let probe = bfs_levels(a, start, &mut scratch);
        if let Some(&far) = probe.last() {
            start = far;
        }
        perm.extend(bfs_levels(a, start, &mut seen));
    }
    perm.reverse();
    perm
}

/// Four independent accumulators so the loop vectorizes.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Lower-triangular Cholesky factor stored row by row over the envelope.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    /// Factors a symmetric positive definite matrix; fails on a non-positive pivot.
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.dim();
        let first: Vec<usize> =
            (0..n).map(|i| a.row(i).map(|(j, _)| j).filter(|&j| j <= i).min().unwrap_or(i)).collect();
        let mut start = vec![0; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i] + 1);
        }
        let mut data = vec![0.0; start[n]];
        for i in 0..n {
            for (j, v) in a.row(i) {
                if j <= i {
                    data[start[i] + j - first[i]] = v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            let (before, row_i) = data.split_at_mut(start[i]);
            for j in fi..i {
                let fj = first[j];
                let lo = fi.max(fj);
                let row_j = &before[start[j]..start[j + 1]];
                let s = row_i[j - fi] - dot(&row_i[lo - fi..j - fi], &row_j[lo - fj..j - fj]);
                row_i[j - fi] = s / row_j[j - fj];
            }
            let d = row_i[i - fi] - dot(&row_i[..i - fi], &row_i[..i - fi]);
            if !(d > 0.0) {
                return Err(Error::Degenerate(format!(
                    "stiffness matrix not positive definite (pivot {d:e} at row {i})"
                )));
            }
            row_i[i - fi] = d.sqrt();
        }
        Ok(EnvelopeCholesky { first, start, data })
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = b.to_vec();
        for i in 0..n {
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let fi = self.first[i];
            y[i] = (y[i] - dot(&row[..i - fi], &y[fi..i])) / row[i - fi];
        }
        for i in (0..n).rev() {
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let fi = self.first[i];
            y[i] /= row[i - fi];
            let xi = y[i];
            for (yk, l) in y[fi..i].iter_mut().zip(&row[..i - fi]) {
                *yk -= l * xi;
            }
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
                t.push((i - 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, t)
    }

    #[test]
    fn triplets_are_summed() {
        let a = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (0, 0, 2.0), (1, 0, 4.0), (0, 1, 4.0)]);
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.asymmetry(), 0.0);
        assert_eq!(a.mul_vec(&[1.0, 1.0]), vec![7.0, 4.0]);
    }

    #[test]
    fn cholesky_solves_after_reordering() {
        // 2D grid Laplacian plus identity, scrambled numbering
        let k = 12;
        let n = k * k;
        let scramble = |i: usize| (i * 37) % n;
        let mut t = Vec::new();
        for y in 0..k {
            for x in 0..k {
                let i = scramble(y * k + x);
                t.push((i, i, 5.0));
                for (dx, dy) in [(1usize, 0usize), (0, 1)] {
                    if x + dx < k && y + dy < k {
                        let j = scramble((y + dy) * k + x + dx);
                        t.push((i, j, -1.0));
                        t.push((j, i, -1.0));
                    }
                }
            }
        }
        let a = CsrMatrix::from_triplets(n, t);
        let perm = reverse_cuthill_mckee(&a);
        let mut sorted = perm.clone();
        sorted.sort();
        assert_eq!(sorted, (0..n).collect::<Vec<_>>());
        let pa = a.permute(&perm);
        let chol = EnvelopeCholesky::factor(&pa).unwrap();
        assert!(chol.envelope_size() < n * 3 * k);
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let b = pa.mul_vec(&x_true);
        let x = chol.solve(&b);
        let err = x.iter().zip(&x_true).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let mut a = laplacian_1d(5);
        a = CsrMatrix::from_triplets(5, {
            let mut t: Vec<_> = (0..5).flat_map(|i| a.row(i).map(move |(j, v)| (i, j, v))).collect();
            t.push((2, 2, -10.0));
            t
        });
        assert!(EnvelopeCholesky::factor(&a).is_err());
    }
}
