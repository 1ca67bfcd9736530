//! Banded LU factorisation with partial pivoting.

/// Square matrix stored by diagonals: row `i` keeps columns
/// `i - kl ..= i + ku + kl` (room for pivoting fill-in).
#[derive(Debug, Clone)]
pub(crate) struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub(crate) fn new(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    /// Builds the matrix of a sparse row operator, scaled by `scale`, plus
    /// the diagonal `diag`.
    pub(crate) fn from_rows(rows: &[Vec<(usize, f64)>], scale: f64, diag: &[f64]) -> Self {
        let (mut kl, mut ku) = (0, 0);
        for (i, row) in rows.iter().enumerate() {
            for &(j, _) in row {
                if j < i {
                    kl = kl.max(i - j);
                } else {
                    ku = ku.max(j - i);
                }
            }
        }
        let mut m = BandMatrix::new(rows.len(), kl, ku);
        for (i, row) in rows.iter().enumerate() {
            for &(j, c) in row {
                *m.at_mut(i, j) += scale * c;
            }
            *m.at_mut(i, i) += diag[i];
        }
        m
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width + (j + self.kl - i)
    }

    fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        let k = self.idx(i, j);
        &mut self.data[k]
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku + self.kl {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    /// Solves `A x = b` in place; returns `None` for a singular matrix.
    pub(crate) fn solve(mut self, b: &mut [f64]) -> Option<()> {
        let n = self.n;
        let last_col = |i: usize, s: &BandMatrix| (i + s.ku + s.kl).min(n - 1);
        for k in 0..n {
            let lo = (k + self.kl).min(n - 1);
            let mut piv = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=lo {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if !(best > 0.0) || !best.is_finite() {
                return None;
            }
            if piv != k {
                for j in k..=last_col(k, &self) {
                    let a = self.get(k, j);
                    let c = self.get(piv, j);
                    *self.at_mut(k, j) = c;
                    *self.at_mut(piv, j) = a;
                }
                b.swap(k, piv);
            }
            let d = self.get(k, k);
            for i in k + 1..=lo {
                let l = self.get(i, k) / d;
                if l == 0.0 {
                    continue;
                }
                *self.at_mut(i, k) = 0.0;
                for j in k + 1..=last_col(k, &self) {
                    let u = self.get(k, j);
                    if u != 0.0 {
                        *self.at_mut(i, j) -= l * u;
                    }
                }
                b[i] -= l * b[k];
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..=last_col(k, &self) {
                s -= self.get(k, j) * b[j];
            }
            b[k] = s / self.get(k, k);
        }
        Some(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_pivoting_system() {
        // rows with a zero leading diagonal force a swap
        let rows = vec![
            vec![(0, 0.0), (1, 2.0), (2, 1.0)],
            vec![(0, 1.0), (1, 1.0), (3, 1.0)],
            vec![(1, 3.0), (2, 1.0), (3, -1.0)],
            vec![(1, 1.0), (2, 1.0), (3, 4.0)],
        ];
        let x = [1.0, -2.0, 0.5, 3.0];
        let mut b: Vec<f64> = rows.iter().map(|r| r.iter().map(|&(j, c)| c * x[j]).sum()).collect();
        BandMatrix::from_rows(&rows, 1.0, &[0.0; 4]).solve(&mut b).unwrap();
        for (a, e) in b.iter().zip(x) {
            assert!((a - e).abs() < 1e-13);
        }
    }
}
