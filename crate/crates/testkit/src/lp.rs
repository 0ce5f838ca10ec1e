//! Brute-force LP optimum by vertex enumeration.

use evsim::lp::LpProblem;
use rand::Rng;

/// Dense half-spaces `a·x <= b` describing the whole feasible region,
/// including `x >= 0` and the upper bounds.
fn halfspaces(p: &LpProblem) -> Vec<(Vec<f64>, f64)> {
    let n = p.num_vars();
    let mut out = Vec::new();
    for c in &p.constraints {
        let mut a = vec![0.0; n];
        for &(j, v) in &c.coeffs {
            a[j] += v;
        }
        out.push((a, c.rhs));
    }
    for j in 0..n {
        let mut a = vec![0.0; n];
        a[j] = -1.0;
        out.push((a, 0.0));
        if let Some(u) = p.upper_bounds[j] {
            let mut a = vec![0.0; n];
            a[j] = 1.0;
            out.push((a, u));
        }
    }
    out
}

/// Gaussian elimination with partial pivoting; `None` if singular.
pub fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for k in col..n {
                a[r][k] -= f * a[col][k];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Best objective over all feasible vertices, or `None` when no vertex is
/// feasible. Only meaningful for bounded problems.
pub fn vertex_optimum(p: &LpProblem) -> Option<f64> {
    let n = p.num_vars();
    if n == 0 {
        return p.constraints.iter().all(|c| c.rhs >= 0.0).then_some(0.0);
    }
    let hs = halfspaces(p);
    let mut best: Option<f64> = None;
    for idx in combinations(hs.len(), n) {
        let a = idx.iter().map(|&i| hs[i].0.clone()).collect();
        let b = idx.iter().map(|&i| hs[i].1).collect();
        let Some(x) = solve_square(a, b) else {
            continue;
        };
        let feasible = hs.iter().all(|(a, b)| {
            let lhs: f64 = a.iter().zip(&x).map(|(ai, xi)| ai * xi).sum();
            lhs <= b + 1e-9 * (1.0 + b.abs())
        });
        if feasible {
            let obj: f64 = p.objective.iter().zip(&x).map(|(c, xi)| c * xi).sum();
            best = Some(best.map_or(obj, |b: f64| b.max(obj)));
        }
    }
    best
}

/// Random problem with 1-4 variables and 1-4 rows. The first row has
/// strictly positive coefficients, so the region is bounded; later rows mix
/// signs and may have negative right-hand sides, so it can be empty.
pub fn random_bounded<R: Rng>(rng: &mut R) -> LpProblem {
    let n = rng.random_range(1..=4);
    let m = rng.random_range(1..=4);
    let mut p = LpProblem::new((0..n).map(|_| rng.random_range(-3.0..5.0)).collect());
    p.add_constraint(
        (0..n).map(|j| (j, rng.random_range(0.2..3.0))).collect(),
        rng.random_range(1.0..10.0),
    );
    for _ in 1..m {
        let mut coeffs = Vec::new();
        for j in 0..n {
            if rng.random_bool(0.8) {
                coeffs.push((j, rng.random_range(-2.0..3.0)));
            }
        }
        p.add_constraint(coeffs, rng.random_range(-2.0..8.0));
    }
    for j in 0..n {
        if rng.random_bool(0.4) {
            p.set_upper_bound(j, rng.random_range(0.5..5.0));
        }
    }
    p
}
