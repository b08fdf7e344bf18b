use proptest::prelude::*;
use zkz_core::argtrack::{track_arg, track_arg_with, FunctionId, TrackOptions};
use zkz_core::cache::ZeroCache;
use zkz_core::funceq::fe2_residual;
use zkz_core::zeroscan::{count_zeros_rect, locate_zeros, Rectangle, ZeroRecord, T_MIN};
use zkz_core::zeta::{zeta, zeta_derivs};
use zkz_core::{Complex, EvalContext};

fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn zeta_commutes_with_conjugation(sigma in -8.0..8.0f64, t in 0.5..300.0f64) {
        let ctx = EvalContext::default();
        let s = c(sigma, t);
        let a = zeta(s, &ctx).unwrap();
        let b = zeta(s.conj(), &ctx).unwrap();
        prop_assert!((a.conj() - b).norm() <= 1e-12 * a.norm().max(1.0));
    }

    #[test]
    fn derivatives_commute_with_conjugation(sigma in -2.0..6.0f64, t in 1.0..300.0f64) {
        let ctx = EvalContext::default();
        let s = c(sigma, t);
        let up = zeta_derivs(s, 3, &ctx).unwrap();
        let down = zeta_derivs(s.conj(), 3, &ctx).unwrap();
        for (a, b) in up.iter().zip(&down) {
            prop_assert!((a.conj() - b).norm() <= 1e-10 * a.norm().max(1.0));
        }
    }

    #[test]
    fn derivative_functional_equation_holds(sigma in -5.0..6.0f64, t in 2.0..200.0f64, k in 1usize..=3) {
        let r = fe2_residual(c(sigma, t), k, &EvalContext::default()).unwrap();
        prop_assert!(r.abs_gap < 1e-7, "{:?}", r);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn halving_the_step_keeps_the_branch(t in 30.0..800.0f64) {
        let ctx = EvalContext::default();
        let path = [c(30.0, t), c(0.5, t)];
        let coarse = track_arg(FunctionId::GK, 1, &path, &ctx).unwrap();
        let opts = TrackOptions::new(&ctx).with_max_step(0.125);
        let fine = track_arg_with(FunctionId::GK, 1, &path, &ctx, opts, None).unwrap();
        prop_assert!((coarse.final_arg() - fine.final_arg()).abs() < 1e-6);
    }

    #[test]
    fn argument_change_is_path_independent_where_zero_free(
        s0 in 1.5..4.0f64, ds in 0.5..3.0f64, t0 in 2.0..300.0f64, dt in 1.0..30.0f64,
    ) {
        let ctx = EvalContext::default();
        let (a, d) = (c(s0, t0), c(s0 + ds, t0 + dt));
        let via_right = track_arg(FunctionId::Zeta, 0, &[a, c(s0 + ds, t0), d], &ctx).unwrap();
        let via_up = track_arg(FunctionId::Zeta, 0, &[a, c(s0, t0 + dt), d], &ctx).unwrap();
        prop_assert!((via_right.total_change() - via_up.total_change()).abs() < 1e-9);
    }

    #[test]
    fn argument_change_flips_under_conjugation(t in 2.0..500.0f64) {
        let ctx = EvalContext::default();
        let path = [c(30.0, t), c(1.5, t)];
        let up = track_arg(FunctionId::GK, 2, &path, &ctx).unwrap();
        let mirrored: Vec<Complex> = path.iter().map(|p| p.conj()).collect();
        let down = track_arg(FunctionId::GK, 2, &mirrored, &ctx).unwrap();
        // G_2 scales ζ″ by 2^30 at the anchor, so ring round-off shows at 1e-8
        prop_assert!((up.total_change() + down.total_change()).abs() < 1e-7);
    }

    #[test]
    fn mirrored_rectangles_count_alike(k in 1usize..=3, t_lo in 5.0..150.0f64, h in 2.0..8.0f64) {
        let ctx = EvalContext::default();
        let rect = Rectangle::new(-2.0, 8.0, t_lo + 0.0123, t_lo + h + 0.0321).unwrap();
        let n = count_zeros_rect(k, &rect, &ctx).unwrap();
        prop_assert_eq!(count_zeros_rect(k, &rect.mirrored(), &ctx).unwrap(), n);
    }
}

#[test]
fn tighter_tolerances_barely_move_zeros() {
    let base = EvalContext::default();
    let tight = base.with_abs_tol(base.abs_tol / 10.0);
    let a = locate_zeros(1, T_MIN, 60.0, &base).unwrap();
    let b = locate_zeros(1, T_MIN, 60.0, &tight).unwrap();
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert!((x.point() - y.point()).norm() < 1e-8, "{x:?} vs {y:?}");
    }
}

fn record(i: usize, digest: &str) -> ZeroRecord {
    ZeroRecord {
        k: 1,
        beta: 0.5 + (i as f64 * 0.37).sin(),
        gamma: 1.0 + i as f64 * 0.731,
        multiplicity: 1 + (i % 7 == 0) as u32,
        residual: 1e-14 * i as f64,
        ctx_digest: digest.into(),
    }
}

#[test]
fn cache_round_trips_and_flags_bad_lines() {
    let dir = tempfile::tempdir().unwrap();
    let cache = ZeroCache::new(dir.path().join("zeros.jsonl"));
    let zeros: Vec<ZeroRecord> = (0..1000).map(|i| record(i, "current")).collect();
    cache.store(1, 0.0, 1000.0, "current", &zeros).unwrap();
    let back = cache.read(1, "current").unwrap();
    assert_eq!(back.zeros, zeros);

    // corrupt one zero line and add one from an older context
    let text = std::fs::read_to_string(cache.path()).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    lines[500] = "{\"k\": 1, \"beta\": ".into();
    lines.push(serde_json::to_string(&record(0, "older")).unwrap());
    std::fs::write(cache.path(), lines.join("\n") + "\n").unwrap();

    let back = cache.read(1, "current").unwrap();
    assert_eq!(back.zeros.len(), 999);
    assert_eq!(back.corrupt.len(), 1);
    assert_eq!(back.corrupt[0].line, 501);
    assert_eq!(back.stale, 1);
}
