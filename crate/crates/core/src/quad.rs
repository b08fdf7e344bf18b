//! Adaptive Gauss–Legendre quadrature.

use std::sync::LazyLock;

const ORDER: usize = 20;
const MAX_DEPTH: usize = 50;

/// Nodes and weights on [-1, 1], from Newton iteration on `P_n`.
static RULE: LazyLock<(Vec<f64>, Vec<f64>)> = LazyLock::new(|| legendre_rule(ORDER));

pub fn legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn fixed<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (nodes, weights) = &*RULE;
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    nodes.iter().zip(weights).map(|(x, w)| w * f(mid + half * x)).sum::<f64>() * half
}

/// Integrates `f` over `[a, b]` to absolute error `tol`, bisecting wherever
/// the rule disagrees with its two halves.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: usize) -> f64 {
        let m = 0.5 * (a + b);
        let left = fixed(f, a, m);
        let right = fixed(f, m, b);
        let split = left + right;
        if (split - whole).abs() <= tol || depth >= MAX_DEPTH {
            return split;
        }
        recurse(f, a, m, left, tol / 2.0, depth + 1) + recurse(f, m, b, right, tol / 2.0, depth + 1)
    }
    if a == b {
        return 0.0;
    }
    let whole = fixed(&f, a, b);
    recurse(&f, a, b, whole, tol, 0)
}
