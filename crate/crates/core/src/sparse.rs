//! Sparse symmetric storage and the LDL^T machinery behind inertia counts.
//!
//! The factorization is the classic up-looking sparse LDL^T: an elimination
//! tree pass sizes the factor, then each row of `L` is produced by a sparse
//! triangular solve along the tree. No pivoting is performed; for spectrum
//! slicing that is the right trade: a (measure-zero) zero pivot means the
//! shift grazed an eigenvalue of a leading principal submatrix, and the
//! caller retries with a perturbed shift.

use nalgebra::DMatrix;

/// Symmetric sparse matrix in CSR format, both triangles stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SymCsr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub vals: Vec<f64>,
}

impl SymCsr {
    /// Build from per-row entry lists. Each row must be sorted by column and
    /// the overall pattern symmetric with equal stored values; callers
    /// assemble rows symmetrically so this holds bit-exactly.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in rows {
            debug_assert!(row.windows(2).all(|w| w[0].0 < w[1].0));
            for (c, v) in row {
                col_idx.push(c);
                vals.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            n,
            row_ptr,
            col_idx,
            vals,
        }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Entries of row `i` as `(column, value)` pairs.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |p| (self.col_idx[p], self.vals[p]))
    }

    /// y = A x.
    pub fn spmv(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut acc = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[p] * x[self.col_idx[p]];
            }
            y[i] = acc;
        }
    }

    /// Quadratic form x^T A x.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            let mut row_acc = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                row_acc += self.vals[p] * x[self.col_idx[p]];
            }
            acc += x[i] * row_acc;
        }
        acc
    }

    /// Exact symmetry of the stored triples.
    pub fn is_symmetric(&self) -> bool {
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                if j >= i {
                    continue;
                }
                let mirrored = self.row(j).find(|&(c, _)| c == i).map(|(_, w)| w);
                if mirrored != Some(v) {
                    return false;
                }
            }
        }
        true
    }

    /// Diagonal as a vector (zero where absent).
    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                if j == i {
                    d[i] = v;
                }
            }
        }
        d
    }

    /// Gershgorin bound on the spectral radius: max_i (|a_ii| + sum |a_ij|).
    pub fn gershgorin_norm(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Tridiagonal view `(diag, offdiag)` if the pattern is tridiagonal.
    pub fn as_tridiagonal(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let n = self.n;
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n.saturating_sub(1)];
        for i in 0..n {
            for (j, v) in self.row(i) {
                if j == i {
                    diag[i] = v;
                } else if j + 1 == i {
                    off[j] = v;
                } else if j == i + 1 {
                    off[i] = v;
                } else {
                    return None;
                }
            }
        }
        Some((diag, off))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }
}

/// Reverse Cuthill-McKee ordering. Returns `perm` with `perm[new] = old`.
///
/// Bandwidth-reducing, which keeps the LDL^T fill modest on the grid graphs
/// produced by finite-difference stencils.
pub fn reverse_cuthill_mckee(a: &SymCsr) -> Vec<usize> {
    let n = a.n;
    let degree: Vec<usize> = (0..n)
        .map(|i| a.row(i).filter(|&(j, _)| j != i).count())
        .collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    while order.len() < n {
        // Start each component from a pseudo-peripheral node: begin at the
        // unvisited node of minimum degree, then hop to the farthest BFS leaf.
        let start = (0..n)
            .filter(|&i| !visited[i])
            .min_by_key(|&i| degree[i])
            .expect("unvisited node exists");
        let start = farthest_node(a, start, &visited);

        let mut queue = std::collections::VecDeque::new();
        visited[start] = true;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            let mut neighbors: Vec<usize> = a
                .row(u)
                .filter(|&(j, _)| j != u && !visited[j])
                .map(|(j, _)| j)
                .collect();
            neighbors.sort_by_key(|&j| (degree[j], j));
            for j in neighbors {
                visited[j] = true;
                queue.push_back(j);
            }
        }
    }
    order.reverse();
    order
}

fn farthest_node(a: &SymCsr, start: usize, blocked: &[bool]) -> usize {
    let mut seen = blocked.to_vec();
    let mut queue = std::collections::VecDeque::new();
    seen[start] = true;
    queue.push_back(start);
    let mut last = start;
    while let Some(u) = queue.pop_front() {
        last = u;
        for (j, _) in a.row(u) {
            if j != u && !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    last
}

/// Outcome of an LDL^T factorization attempt.
pub struct LdltFactor {
    pub n: usize,
    perm: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
    pub d: Vec<f64>,
}

impl LdltFactor {
    /// Number of negative pivots (the inertia below the shift).
    pub fn negative_pivots(&self) -> usize {
        self.d.iter().filter(|&&x| x < 0.0).count()
    }

    /// Smallest pivot magnitude.
    pub fn min_abs_pivot(&self) -> f64 {
        self.d.iter().fold(f64::INFINITY, |m, &x| m.min(x.abs()))
    }

    pub fn pivots_finite(&self) -> bool {
        self.d.iter().all(|x| x.is_finite())
    }

    /// Solve `A x = b` using `P^T L D L^T P x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y: Vec<f64> = (0..n).map(|k| b[self.perm[k]]).collect();
        // forward: L y' = y
        for k in 0..n {
            let yk = y[k];
            for p in self.lp[k]..self.lp[k + 1] {
                y[self.li[p]] -= self.lx[p] * yk;
            }
        }
        for k in 0..n {
            y[k] /= self.d[k];
        }
        // backward: L^T z = y
        for k in (0..n).rev() {
            let mut acc = y[k];
            for p in self.lp[k]..self.lp[k + 1] {
                acc -= self.lx[p] * y[self.li[p]];
            }
            y[k] = acc;
        }
        let mut x = vec![0.0; n];
        for k in 0..n {
            x[self.perm[k]] = y[k];
        }
        x
    }
}

/// Sparse LDL^T of `A - shift*I` under a fill-reducing permutation.
///
/// `perm[new] = old`. Breakdown is not an error here: callers inspect the
/// pivots (`pivots_finite`, `min_abs_pivot`) and retry with a nudged shift.
pub fn ldlt(a: &SymCsr, shift: f64, perm: &[usize]) -> LdltFactor {
    let n = a.n;
    let mut inv = vec![0usize; n];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }

    // Column-compressed upper triangle of the permuted, shifted matrix:
    // column k holds B[i, k] for i <= k where B = P (A - shift I) P^T.
    let mut up_cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for new_k in 0..n {
        let old_k = perm[new_k];
        for (old_j, v) in a.row(old_k) {
            let new_i = inv[old_j];
            if new_i <= new_k {
                let val = if new_i == new_k { v - shift } else { v };
                up_cols[new_k].push((new_i, val));
            }
        }
        // Shift must appear even if the diagonal entry is structurally absent.
        if !up_cols[new_k].iter().any(|&(i, _)| i == new_k) {
            up_cols[new_k].push((new_k, -shift));
        }
    }

    // Symbolic: elimination tree and column counts.
    let none = usize::MAX;
    let mut parent = vec![none; n];
    let mut flag = vec![none; n];
    let mut lnz = vec![0usize; n];
    for k in 0..n {
        flag[k] = k;
        for &(i, _) in &up_cols[k] {
            if i >= k {
                continue;
            }
            let mut node = i;
            while flag[node] != k {
                if parent[node] == none {
                    parent[node] = k;
                }
                lnz[node] += 1;
                flag[node] = k;
                node = parent[node];
            }
        }
    }
    let mut lp = vec![0usize; n + 1];
    for k in 0..n {
        lp[k + 1] = lp[k] + lnz[k];
    }
    let total = lp[n];
    let mut li = vec![0usize; total];
    let mut lx = vec![0.0f64; total];
    let mut lnext = lp[..n].to_vec();

    // Numeric: compute row k of L by a sparse solve along the etree.
    let mut y = vec![0.0f64; n];
    let mut pattern = vec![0usize; n];
    let mut d = vec![0.0f64; n];
    let mut flag = vec![none; n];
    for k in 0..n {
        flag[k] = k;
        let mut top = n;
        let mut dk = 0.0;
        for &(i, v) in &up_cols[k] {
            if i == k {
                dk = v;
                continue;
            }
            y[i] = v;
            let mut len = 0;
            let mut node = i;
            while flag[node] != k {
                pattern[len] = node;
                len += 1;
                flag[node] = k;
                node = parent[node];
            }
            while len > 0 {
                len -= 1;
                top -= 1;
                pattern[top] = pattern[len];
            }
        }
        // pattern[top..n] lists the row pattern in topological order. The
        // two-stack trick above reverses each etree path into place.
        for s in top..n {
            let i = pattern[s];
            let yi = y[i];
            y[i] = 0.0;
            for p in lp[i]..lnext[i] {
                y[li[p]] -= lx[p] * yi;
            }
            let lki = yi / d[i];
            dk -= lki * yi;
            li[lnext[i]] = k;
            lx[lnext[i]] = lki;
            lnext[i] += 1;
        }
        d[k] = dk;
    }

    LdltFactor {
        n,
        perm: perm.to_vec(),
        lp,
        li,
        lx,
        d,
    }
}
