//! Uniform-grid stencil weights: Fornberg finite differences and
//! per-interval Lagrange integration weights.

/// Fornberg weights for derivatives `0..=max_order` at `z` from nodes `xs`.
/// Returns `w[order][j]`.
pub fn fornberg(z: f64, xs: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Centered first and second derivative weights on offsets `-s..=s`
/// (unit spacing).
pub fn centered(s: usize) -> (Vec<f64>, Vec<f64>) {
    let xs: Vec<f64> = (-(s as i64)..=s as i64).map(|k| k as f64).collect();
    let w = fornberg(0.0, &xs, 2);
    (w[1].clone(), w[2].clone())
}

/// Weights `a_j` with `int_0^1 p(t) dt = sum_j a_j p(o_j)` for every
/// polynomial `p` of degree `< offsets.len()`.
pub fn interval_weights(offsets: &[i64]) -> Vec<f64> {
    let m = offsets.len();
    let mut out = Vec::with_capacity(m);
    for j in 0..m {
        // expand l_j(t) = prod_{k != j} (t - o_k) / (o_j - o_k) into monomials
        let mut poly = vec![1.0];
        let mut denom = 1.0;
        for k in 0..m {
            if k == j {
                continue;
            }
            let ok = offsets[k] as f64;
            let mut next = vec![0.0; poly.len() + 1];
            for (d, &a) in poly.iter().enumerate() {
                next[d + 1] += a;
                next[d] -= ok * a;
            }
            poly = next;
            denom *= offsets[j] as f64 - ok;
        }
        let integral: f64 = poly.iter().enumerate().map(|(d, a)| a / (d as f64 + 1.0)).sum();
        out.push(integral / denom);
    }
    out
}

/// Weights that extrapolate an even function to the origin from its values
/// at `x = h, 2h, ..., m h` (interpolation in `x^2`).
pub fn even_origin_weights(m: usize) -> Vec<f64> {
    (1..=m)
        .map(|j| {
            let yj = (j * j) as f64;
            (1..=m)
                .filter(|&k| k != j)
                .map(|k| {
                    let yk = (k * k) as f64;
                    -yk / (yj - yk)
                })
                .product()
        })
        .collect()
}
