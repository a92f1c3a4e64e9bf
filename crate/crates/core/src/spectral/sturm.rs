//! Sturm sequences and tridiagonal kernels for the d = 1 fast path.

/// One Sturm pass over a symmetric tridiagonal matrix: LDL^T pivots of
/// `T - shift*I`, returning the negative-pivot count and the smallest pivot
/// magnitude encountered (before guarding).
pub fn sturm_pass(diag: &[f64], off: &[f64], shift: f64) -> (usize, f64) {
    let n = diag.len();
    if n == 0 {
        return (0, f64::INFINITY);
    }
    let mut count = 0usize;
    let mut min_abs = f64::INFINITY;
    let mut q = diag[0] - shift;
    if q < 0.0 {
        count += 1;
    }
    min_abs = min_abs.min(q.abs());
    for i in 1..n {
        let guarded = if q.abs() < 1e-300 {
            if q >= 0.0 {
                1e-300
            } else {
                -1e-300
            }
        } else {
            q
        };
        q = (diag[i] - shift) - off[i - 1] * off[i - 1] / guarded;
        if q < 0.0 {
            count += 1;
        }
        min_abs = min_abs.min(q.abs());
    }
    (count, min_abs)
}

/// Negative-pivot count only.
pub fn sturm_count(diag: &[f64], off: &[f64], shift: f64) -> usize {
    sturm_pass(diag, off, shift).0
}

/// LU factorization of a tridiagonal matrix with partial pivoting
/// (the `gttrf` layout: `dl`, `d`, `du`, second superdiagonal `du2`,
/// pivot swaps). Stable enough for inverse iteration at near-singular
/// shifts.
pub struct TridiagLu {
    n: usize,
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swap: Vec<bool>,
}

impl TridiagLu {
    pub fn factor(diag: &[f64], off: &[f64], shift: f64) -> Self {
        let n = diag.len();
        let mut d: Vec<f64> = diag.iter().map(|&x| x - shift).collect();
        let mut dl: Vec<f64> = off.to_vec();
        let mut du: Vec<f64> = off.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swap = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                // no interchange
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                } else {
                    dl[i] = 0.0;
                }
                if i + 2 < n {
                    du2[i] = 0.0;
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let tmp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = tmp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swap[i] = true;
            }
        }
        Self {
            n,
            dl,
            d,
            du,
            du2,
            swap,
        }
    }

    /// Solve `(T - shift I) x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n.saturating_sub(1) {
            if self.swap[i] {
                b.swap(i, i + 1);
            }
            let factor = self.dl[i];
            b[i + 1] -= factor * b[i];
        }
        // back substitution
        for i in (0..n).rev() {
            let mut acc = b[i];
            if i + 1 < n {
                acc -= self.du[i] * b[i + 1];
            }
            if i + 2 < n {
                acc -= self.du2[i] * b[i + 2];
            }
            let dd = if self.d[i] == 0.0 { 1e-300 } else { self.d[i] };
            b[i] = acc / dd;
        }
    }
}
