//! Banded LU with partial pivoting, used for shifted inverse iteration.

/// LU factors of a square band matrix with `kl` sub- and `ku` superdiagonals.
/// Pivoting widens the upper band to `ku + kl`.
#[derive(Debug, Clone)]
pub(crate) struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandLu {
    /// Factors the matrix given by sparse rows `(col, value)`. Entries outside
    /// the band `[i - kl, i + ku]` must not occur.
    pub(crate) fn factor(rows: &[Vec<(usize, f64)>], kl: usize, ku: usize, shift: f64) -> Self {
        let n = rows.len();
        let width = 2 * kl + ku + 1;
        let mut lu = BandLu {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
            pivots: vec![0; n],
        };
        for (i, row) in rows.iter().enumerate() {
            for &(j, v) in row {
                debug_assert!(j + kl >= i && j <= i + ku, "entry ({i}, {j}) outside band");
                *lu.at_mut(i, j) += v;
            }
            *lu.at_mut(i, i) -= shift;
        }
        lu.eliminate();
        lu
    }

    fn index(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[self.index(i, j)]
    }

    fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        let idx = self.index(i, j);
        &mut self.data[idx]
    }

    fn eliminate(&mut self) {
        let n = self.n;
        let tiny = f64::EPSILON * self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let last_col = (k + self.ku + self.kl).min(n - 1);
            let p = (k..=last_row)
                .max_by(|&a, &b| self.at(a, k).abs().total_cmp(&self.at(b, k).abs()))
                .unwrap_or(k);
            self.pivots[k] = p;
            if p != k {
                for c in k..=last_col {
                    let (a, b) = (self.index(k, c), self.index(p, c));
                    self.data.swap(a, b);
                }
            }
            if self.at(k, k).abs() < tiny {
                // exact singularity only happens when the shift hits an eigenvalue
                *self.at_mut(k, k) = tiny;
            }
            let pivot = self.at(k, k);
            for r in k + 1..=last_row {
                let l = self.at(r, k) / pivot;
                *self.at_mut(r, k) = l;
                if l != 0.0 {
                    for c in k + 1..=last_col {
                        let u = self.at(k, c);
                        *self.at_mut(r, c) -= l * u;
                    }
                }
            }
        }
    }

    pub(crate) fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for k in 0..n {
            b.swap(k, self.pivots[k]);
            let bk = b[k];
            for r in k + 1..=(k + self.kl).min(n - 1) {
                b[r] -= self.at(r, k) * bk;
            }
        }
        for k in (0..n).rev() {
            let mut acc = b[k];
            for c in k + 1..=(k + self.ku + self.kl).min(n - 1) {
                acc -= self.at(k, c) * b[c];
            }
            b[k] = acc / self.at(k, k);
        }
    }
}

/// Lower and upper bandwidths of a sparse row matrix.
pub(crate) fn bandwidths(rows: &[Vec<(usize, f64)>]) -> (usize, usize) {
    rows.iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().map(move |&(j, _)| (i, j)))
        .fold((0, 0), |(kl, ku), (i, j)| {
            (kl.max(i.saturating_sub(j)), ku.max(j.saturating_sub(i)))
        })
}
