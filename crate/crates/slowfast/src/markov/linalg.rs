//! Dense LU factorization with partial pivoting, sized for the small systems
//! that arise here (restricted transient blocks of at most a few thousand
//! states).

/// LU factors of a square matrix, stored packed with the pivot permutation.
pub(crate) struct Lu {
    n: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
}

/// Factor `a` (row-major, `n x n`). Returns `None` when a pivot is numerically
/// zero relative to the matrix scale.
pub(crate) fn lu_factor(mut a: Vec<f64>, n: usize) -> Option<Lu> {
    assert_eq!(a.len(), n * n);
    let scale = a.iter().fold(0.0f64, |m, &x| m.max(x.abs())).max(1.0);
    let tiny = scale * 1e-14;
    let mut piv: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut p = k;
        let mut best = a[k * n + k].abs();
        for r in (k + 1)..n {
            let cand = a[r * n + k].abs();
            if cand > best {
                best = cand;
                p = r;
            }
        }
        if best <= tiny {
            return None;
        }
        if p != k {
            for c in 0..n {
                a.swap(k * n + c, p * n + c);
            }
            piv.swap(k, p);
        }
        let pivot = a[k * n + k];
        for r in (k + 1)..n {
            let f = a[r * n + k] / pivot;
            a[r * n + k] = f;
            if f != 0.0 {
                for c in (k + 1)..n {
                    a[r * n + c] -= f * a[k * n + c];
                }
            }
        }
    }
    Some(Lu { n, lu: a, piv })
}

impl Lu {
    /// Solve `A x = b`.
    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut x: Vec<f64> = self.piv.iter().map(|&p| b[p]).collect();
        for r in 1..n {
            let mut s = x[r];
            for c in 0..r {
                s -= self.lu[r * n + c] * x[c];
            }
            x[r] = s;
        }
        for r in (0..n).rev() {
            let mut s = x[r];
            for c in (r + 1)..n {
                s -= self.lu[r * n + c] * x[c];
            }
            x[r] = s / self.lu[r * n + r];
        }
        x
    }
}

/// Max-norm residual `||A x - b||_inf` for a row-major `A`.
pub(crate) fn residual_inf(a: &[f64], n: usize, x: &[f64], b: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..n {
        let mut s = -b[r];
        for c in 0..n {
            s += a[r * n + c] * x[c];
        }
        worst = worst.max(s.abs());
    }
    worst
}
