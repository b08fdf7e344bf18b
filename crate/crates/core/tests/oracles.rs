//! Checks against independently implemented references: an alternating
//! series for ζ, the Hardy Z function, Ramanujan's series for li, and
//! high-precision values of derivative zeros.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zkz_core::argtrack::s_of_t;
use zkz_core::funceq::li_from_2;
use zkz_core::verify::{cor2_main, theorem1_main, theorem1_main_with};
use zkz_core::zeroscan::{locate_zeros, nk_empirical, T_MIN};
use zkz_core::zeta::zeta;
use zkz_core::{Complex, EvalContext};

const ZETA_ORDINATES: [f64; 3] = [14.134725141734693790, 21.022039638771554993, 25.010857580145688763];

/// Zeros of ζ′ below height 40.
const ZETA1_ZEROS: [(f64, f64); 3] = [
    (2.463161869454321285874, 23.29832049276285790201),
    (1.286496822269047697044, 31.70825008311590860495),
    (2.307570063722631641620, 38.48998317307893585125),
];

/// Lowest zero of ζ″ in the upper half-plane.
const ZETA2_LOW_ZERO: (f64, f64) = (-0.3550843302104763734298, 3.590839324398967426679);

const LI_OF_2: f64 = 1.045163780117492784844588889194613136522615578151;
const EULER_GAMMA: f64 = 0.5772156649015328606065120900824024310421;

/// Borwein's alternating-series ζ, valid for `σ > 0`, `s ≠ 1`, moderate `t`.
fn zeta_borwein(s: Complex) -> Complex {
    const N: usize = 60;
    let n = N as f64;
    let mut term = 1.0 / n;
    let mut d = vec![n * term];
    for i in 1..=N {
        let fi = i as f64;
        term *= 4.0 * (n + fi - 1.0) * (n - fi + 1.0) / ((2.0 * fi) * (2.0 * fi - 1.0));
        d.push(d[i - 1] + n * term);
    }
    let dn = d[N];
    let mut eta = Complex::new(0.0, 0.0);
    for (k, dk) in d.iter().take(N).enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        eta += sign * (dk - dn) * (-s * ((k + 1) as f64).ln()).exp();
    }
    eta = -eta / dn;
    eta / (Complex::new(1.0, 0.0) - (Complex::new(1.0, 0.0) - s).scale(std::f64::consts::LN_2).exp())
}

/// Riemann–Siegel theta from its asymptotic series (adequate for `t ≥ 10`).
fn theta(t: f64) -> f64 {
    t / 2.0 * (t / (2.0 * PI)).ln() - t / 2.0 - PI / 8.0 + 1.0 / (48.0 * t) + 7.0 / (5760.0 * t.powi(3))
        + 31.0 / (80640.0 * t.powi(5))
}

fn hardy_z(t: f64) -> f64 {
    (Complex::new(0.0, theta(t)).exp() * zeta_borwein(Complex::new(0.5, t))).re
}

fn sign_changes(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut a = lo;
    let mut za = hardy_z(a);
    while a < hi {
        let b = a + step;
        let zb = hardy_z(b);
        if za * zb < 0.0 {
            let (mut l, mut r, mut zl) = (a, b, za);
            for _ in 0..80 {
                let m = 0.5 * (l + r);
                let zm = hardy_z(m);
                if zl * zm <= 0.0 {
                    r = m;
                } else {
                    l = m;
                    zl = zm;
                }
            }
            out.push(0.5 * (l + r));
        }
        a = b;
        za = zb;
    }
    out
}

/// Ramanujan's series for `li(x)`, shifted to the lower limit 2.
fn li_ramanujan(x: f64) -> f64 {
    let l = x.ln();
    let mut sum = 0.0;
    let mut power = 1.0;
    let mut inner = 0.0;
    for n in 1..200 {
        power *= l / n as f64;
        if (n - 1) % 2 == 0 {
            inner += 1.0 / n as f64;
        }
        let term = power / 2f64.powi(n - 1) * inner;
        sum += if n % 2 == 1 { term } else { -term };
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    EULER_GAMMA + l.ln() + x.sqrt() * sum - LI_OF_2
}

#[test]
fn zeta_matches_alternating_series() {
    let ctx = EvalContext::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let s = Complex::new(rng.gen_range(0.1..5.0), rng.gen_range(0.5..40.0));
        let got = zeta(s, &ctx).unwrap();
        let want = zeta_borwein(s);
        assert!((got - want).norm() < 1e-11 * want.norm().max(1.0), "{s}: {got} vs {want}");
    }
}

#[test]
fn hardy_z_sign_changes_give_the_lowest_ordinates() {
    let found = sign_changes(10.0, 26.0, 0.05);
    assert_eq!(found.len(), 3);
    for (got, want) in found.iter().zip(ZETA_ORDINATES) {
        assert!((got - want).abs() < 1e-10, "{got} vs {want}");
    }
    let located = locate_zeros(0, T_MIN, 26.0, &EvalContext::default()).unwrap();
    for (z, g) in located.iter().zip(&found) {
        assert!((z.gamma - g).abs() < 1e-8);
        assert!((z.beta - 0.5).abs() < 1e-9);
    }
}

#[test]
fn riemann_von_mangoldt_at_100() {
    let ctx = EvalContext::default();
    let n = theta(100.0) / PI + 1.0 + s_of_t(100.0, &ctx).unwrap();
    assert!((n - 29.0).abs() < 1e-6, "{n}");
    assert_eq!(nk_empirical(0, 100.0, &ctx).unwrap(), 29);
}

#[test]
fn s_jumps_by_one_across_a_zero() {
    let ctx = EvalContext::default();
    let g = ZETA_ORDINATES[0];
    let jump = s_of_t(g + 1e-4, &ctx).unwrap() - s_of_t(g - 1e-4, &ctx).unwrap();
    assert!((jump - 1.0).abs() < 1e-3, "{jump}");
}

#[test]
fn li_matches_ramanujan_series() {
    for x in [2.5, 5.0, 10.0, 100.0, 1000.0, 5000.0 / (2.0 * PI)] {
        let got = li_from_2(x).unwrap();
        let want = li_ramanujan(x);
        assert!((got - want).abs() < 1e-10, "{x}: {got} vs {want}");
    }
    for k in 1..=4 {
        for t in [13.0, 100.0, 1000.0, 5000.0] {
            let a = theorem1_main(k, t).unwrap();
            let b = theorem1_main_with(k, t, |x| Ok(li_ramanujan(x))).unwrap();
            assert!((a - b).abs() < 1e-9, "k={k} T={t}");
        }
    }
}

#[test]
fn window_main_term_is_the_local_slope() {
    // The window term is the derivative of the global term, so their gap
    // over a window of width U is second order in U.
    let (t, u) = (500.0, 50.0);
    for k in 1..=3 {
        let gap = theorem1_main(k, t + u).unwrap() - theorem1_main(k, t).unwrap() - cor2_main(k, t, u).unwrap();
        let second_order = k as f64 * u * u / (2.0 * PI * t * (t / (2.0 * PI)).ln());
        assert!(gap.abs() < second_order, "k={k}: gap {gap} vs {second_order}");
    }
}

#[test]
fn derivative_zeros_match_reference_values() {
    let ctx = EvalContext::default();
    let z1 = locate_zeros(1, T_MIN, 40.0, &ctx).unwrap();
    assert_eq!(z1.len(), ZETA1_ZEROS.len());
    for (z, (b, g)) in z1.iter().zip(ZETA1_ZEROS) {
        assert!((z.beta - b).abs() < 1e-9 && (z.gamma - g).abs() < 1e-9, "{z:?}");
    }
    let z2 = locate_zeros(2, T_MIN, 5.0, &ctx).unwrap();
    let low = z2.iter().find(|z| (z.gamma - ZETA2_LOW_ZERO.1).abs() < 1e-6).expect("low zero of ζ″ found");
    assert!((low.beta - ZETA2_LOW_ZERO.0).abs() < 1e-9);
}
