//! Counting and locating the non-real zeros of `ζ^(k)` by the argument
//! principle.
//!
//! A strip `[σ_lo, σ_hi] × [t_lo, t_hi]` is cut into horizontal bands. Each
//! band is quad-subdivided until every cell holds at most one zero, which is
//! then polished by Newton's method. Cell counts use the fast series
//! evaluator by default; the strip total is recounted independently on the
//! Cauchy ring and must agree exactly.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::argtrack::{zeta_k_evaluator, TrackOptions, Tracker};
use crate::context::{EvalContext, MAX_ORDER};
use crate::error::{Error, Result};
use crate::zeta::{zeta_derivs, Evaluator};
use crate::Complex;

/// Left edge of the scan strip.
pub const STRIP_SIGMA_LO: f64 = -2.0;
/// Left edge of the region checked to be zero-free beyond the strip.
pub const LEFT_CHECK_SIGMA: f64 = -10.0;
/// Lower ordinate of every scan starting at the real axis.
pub const T_MIN: f64 = 1e-3;
pub const T_MAX: f64 = 5000.0;
/// Boundary shift used when a zero sits on a scan line.
pub const NUDGE: f64 = 1e-3;
/// Zeros closer than this to a counting boundary are reported as on it.
pub const BOUNDARY_RESOLUTION: f64 = 5e-5;
/// Cells below this diameter still holding several zeros are one multiple zero.
pub const MULTIPLE_ZERO_DIAMETER: f64 = 1e-6;
/// Largest distance of a pre-rounding winding number from an integer.
pub const WINDING_GATE: f64 = 0.05;
/// Newton stops once its step falls below this.
pub const NEWTON_TOL: f64 = 1e-12;

/// Right edge of the scan strip, one unit beyond the zero-free half-plane
/// `σ ≥ 7k/4 + 2`.
pub fn strip_sigma_hi(k: usize) -> f64 {
    1.75 * k as f64 + 3.0
}

/// Closed axis-parallel rectangle lying entirely above or entirely below the
/// real axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub sigma_lo: f64,
    pub sigma_hi: f64,
    pub t_lo: f64,
    pub t_hi: f64,
}

impl Rectangle {
    pub fn new(sigma_lo: f64, sigma_hi: f64, t_lo: f64, t_hi: f64) -> Result<Rectangle> {
        let r = Rectangle { sigma_lo, sigma_hi, t_lo, t_hi };
        if !(sigma_lo < sigma_hi && t_lo < t_hi) || ![sigma_lo, sigma_hi, t_lo, t_hi].iter().all(|x| x.is_finite()) {
            return Err(Error::Domain(format!("degenerate rectangle {r:?}")));
        }
        if !(t_lo > 0.0 || t_hi < 0.0) {
            return Err(Error::Domain(format!("rectangle {r:?} meets the real axis")));
        }
        Ok(r)
    }

    /// The complex-conjugate rectangle.
    pub fn mirrored(&self) -> Rectangle {
        Rectangle { t_lo: -self.t_hi, t_hi: -self.t_lo, ..*self }
    }

    /// Counter-clockwise closed boundary starting at the lower-left corner.
    pub fn boundary(&self) -> [Complex; 5] {
        let ll = Complex::new(self.sigma_lo, self.t_lo);
        [ll, Complex::new(self.sigma_hi, self.t_lo), Complex::new(self.sigma_hi, self.t_hi), Complex::new(self.sigma_lo, self.t_hi), ll]
    }

    pub fn center(&self) -> Complex {
        Complex::new(0.5 * (self.sigma_lo + self.sigma_hi), 0.5 * (self.t_lo + self.t_hi))
    }

    pub fn diameter(&self) -> f64 {
        (self.sigma_hi - self.sigma_lo).hypot(self.t_hi - self.t_lo)
    }

    pub fn contains_interior(&self, s: Complex) -> bool {
        s.re > self.sigma_lo && s.re < self.sigma_hi && s.im > self.t_lo && s.im < self.t_hi
    }

    fn quarters(&self, fs: f64, ft: f64) -> [Rectangle; 4] {
        let ms = self.sigma_lo + fs * (self.sigma_hi - self.sigma_lo);
        let mt = self.t_lo + ft * (self.t_hi - self.t_lo);
        [
            Rectangle { sigma_hi: ms, t_hi: mt, ..*self },
            Rectangle { sigma_lo: ms, t_hi: mt, ..*self },
            Rectangle { sigma_hi: ms, t_lo: mt, ..*self },
            Rectangle { sigma_lo: ms, t_lo: mt, ..*self },
        ]
    }
}

/// A refined zero `β + iγ` of `ζ^(k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroRecord {
    pub k: usize,
    pub beta: f64,
    pub gamma: f64,
    pub multiplicity: u32,
    /// `|ζ^(k)(β + iγ)|` on the Cauchy ring.
    pub residual: f64,
    pub ctx_digest: String,
}

impl ZeroRecord {
    pub fn point(&self) -> Complex {
        Complex::new(self.beta, self.gamma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    /// Evaluator for cell counts and the first Newton phase.
    pub evaluator: Evaluator,
    /// Band boundaries lie on multiples of this height.
    pub band_height: f64,
    pub max_step: f64,
    pub max_depth: usize,
    /// Recount the whole strip on the Cauchy ring and require agreement.
    pub cross_check: bool,
    /// Require `[−10, σ_lo] × [t_lo, t_hi]` to be zero-free.
    pub check_left_region: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            evaluator: Evaluator::Series,
            band_height: 2.0,
            max_step: 0.25,
            max_depth: 60,
            cross_check: true,
            check_left_region: true,
        }
    }
}

/// Result of [`scan_strip`] with the geometry actually used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripScan {
    pub k: usize,
    pub strip: Rectangle,
    /// Band boundaries after nudging, from `t_lo` to `t_hi`.
    pub band_edges: Vec<f64>,
    pub zeros: Vec<ZeroRecord>,
    /// Independent ring count of the strip, when cross-checked.
    pub boundary_count: Option<usize>,
    pub evaluations: usize,
}

impl StripScan {
    pub fn total_multiplicity(&self) -> usize {
        self.zeros.iter().map(|z| z.multiplicity as usize).sum()
    }
}

struct Counter<'a> {
    k: usize,
    ctx: EvalContext,
    opts: ScanOptions,
    tracker: Tracker<'a>,
}

impl<'a> Counter<'a> {
    fn new(k: usize, ctx: &EvalContext, evaluator: Evaluator, opts: ScanOptions) -> Counter<'a> {
        let mut topts = TrackOptions::new(ctx).with_max_step(opts.max_step);
        topts.min_step = BOUNDARY_RESOLUTION;
        Counter { k, ctx: *ctx, opts, tracker: Tracker::new(zeta_k_evaluator(k, *ctx, evaluator), topts) }
    }

    fn min_step(rect: &Rectangle) -> f64 {
        BOUNDARY_RESOLUTION.min(rect.diameter() * 1e-2)
    }

    fn on_boundary(e: Error) -> Error {
        match e {
            Error::ZeroOnPath { point, .. } => Error::ZeroOnBoundary(point),
            e => e,
        }
    }

    fn count(&self, rect: &Rectangle) -> Result<usize> {
        let tr = self.tracker.trace_with(&rect.boundary(), Self::min_step(rect)).map_err(Self::on_boundary)?;
        let total = tr.total_change() / (2.0 * PI);
        let n = total.round();
        let pre = tr.total_quadrature().map_or(total, |q| q / (2.0 * PI));
        if (total - n).abs() > 1e-6 || (pre - n).abs() > WINDING_GATE || n < 0.0 {
            return Err(Error::NonIntegerWinding(pre));
        }
        Ok(n as usize)
    }

    /// Whether the segment stays clear of zeros by the boundary resolution.
    fn clear(&self, a: Complex, b: Complex) -> Result<bool> {
        match self.tracker.trace_with(&[a, b], BOUNDARY_RESOLUTION) {
            Ok(_) => Ok(true),
            Err(Error::ZeroOnPath { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    }

    fn resolve(&self, cell: Rectangle, count: usize, depth: usize, out: &mut Vec<ZeroRecord>) -> Result<()> {
        if count == 0 {
            return Ok(());
        }
        if depth > self.opts.max_depth {
            return Err(Error::SubdivisionLimit(cell.center()));
        }
        if count >= 2 && cell.diameter() < MULTIPLE_ZERO_DIAMETER {
            out.push(self.record(cell.center(), count as u32)?);
            return Ok(());
        }
        if count == 1 {
            if let Some(z) = self.newton(&cell) {
                out.push(self.record(z, 1)?);
                return Ok(());
            }
        }
        let (children, counts) = self.split(&cell, count)?;
        for (child, c) in children.iter().zip(counts) {
            self.resolve(*child, c, depth + 1, out)?;
        }
        Ok(())
    }

    fn split(&self, cell: &Rectangle, count: usize) -> Result<([Rectangle; 4], [usize; 4])> {
        const FRACTIONS: [(f64, f64); 6] = [(0.5, 0.5), (0.47, 0.53), (0.53, 0.47), (0.41, 0.59), (0.59, 0.41), (0.37, 0.63)];
        'fractions: for (fs, ft) in FRACTIONS {
            let children = cell.quarters(fs, ft);
            let mut counts = [0; 4];
            for (c, child) in counts.iter_mut().zip(&children) {
                match self.count(child) {
                    Ok(n) => *c = n,
                    Err(Error::ZeroOnBoundary(_)) => continue 'fractions,
                    Err(e) => return Err(e),
                }
            }
            if counts.iter().sum::<usize>() == count {
                return Ok((children, counts));
            }
            log::warn!("children of {cell:?} count {counts:?}, parent {count}");
        }
        Err(Error::SubdivisionLimit(cell.center()))
    }

    /// Newton's method from the cell centre: first on the scan evaluator,
    /// then polished on the ring. `None` when the iteration leaves the cell,
    /// grows its step three times running, or stalls.
    fn newton(&self, cell: &Rectangle) -> Option<Complex> {
        let mut s = cell.center();
        for (evaluator, iters, strict) in [(self.opts.evaluator, 60, true), (Evaluator::Ring, 10, false)] {
            let mut last = f64::INFINITY;
            let mut growth = 0;
            let mut converged = false;
            for _ in 0..iters {
                let d = evaluator.derivs(s, self.k + 1, &self.ctx).ok()?;
                let step = d[self.k] / d[self.k + 1];
                if !step.is_finite() {
                    return None;
                }
                s -= step;
                if !cell.contains_interior(s) {
                    return None;
                }
                let size = step.norm();
                if size > last {
                    growth += 1;
                    if growth >= 3 {
                        return None;
                    }
                } else {
                    growth = 0;
                }
                last = size;
                if size < NEWTON_TOL {
                    converged = true;
                    break;
                }
            }
            // at large t the rounding floor of s itself can exceed the tolerance
            if !converged && (strict || last > 1e3 * NEWTON_TOL) {
                return None;
            }
        }
        Some(s)
    }

    fn record(&self, s: Complex, multiplicity: u32) -> Result<ZeroRecord> {
        let residual = zeta_derivs(s, self.k, &self.ctx)?[self.k].norm();
        Ok(ZeroRecord { k: self.k, beta: s.re, gamma: s.im, multiplicity, residual, ctx_digest: self.ctx.digest() })
    }
}

fn check_order(k: usize, ctx: &EvalContext) -> Result<()> {
    if k > MAX_ORDER {
        return Err(Error::Domain(format!("k must be at most {MAX_ORDER}, got {k}")));
    }
    ctx.validate_for_order(k + 2)
}

/// Number of zeros of `ζ^(k)` inside `rect`, counted with multiplicity, from
/// the winding of `ζ^(k)` along its boundary on the Cauchy ring.
pub fn count_zeros_rect(k: usize, rect: &Rectangle, ctx: &EvalContext) -> Result<usize> {
    count_zeros_rect_with(k, rect, ctx, Evaluator::Ring)
}

pub fn count_zeros_rect_with(k: usize, rect: &Rectangle, ctx: &EvalContext, evaluator: Evaluator) -> Result<usize> {
    check_order(k, ctx)?;
    Counter::new(k, ctx, evaluator, ScanOptions::default()).count(rect)
}

fn sort_zeros(zeros: &mut [ZeroRecord]) {
    zeros.sort_by(|a, b| a.gamma.total_cmp(&b.gamma).then(a.beta.total_cmp(&b.beta)));
}

/// Locates every zero of `ζ^(k)` in the strip `[−2, 7k/4 + 3] × (t_lo, t_hi]`.
pub fn scan_strip(k: usize, t_lo: f64, t_hi: f64, ctx: &EvalContext, opts: &ScanOptions) -> Result<StripScan> {
    check_order(k, ctx)?;
    if !(t_lo > 0.0 && t_lo < t_hi && t_hi <= T_MAX) {
        return Err(Error::Domain(format!("need 0 < t_lo < t_hi <= {T_MAX}, got [{t_lo}, {t_hi}]")));
    }
    let counter = Counter::new(k, ctx, opts.evaluator, *opts);
    let sigma_hi = strip_sigma_hi(k);

    let mut sigma_lo = STRIP_SIGMA_LO;
    let mut tries = 0;
    while !counter.clear(Complex::new(sigma_lo, t_lo), Complex::new(sigma_lo, t_hi))? {
        tries += 1;
        if tries > 20 {
            return Err(Error::ZeroOnBoundary(Complex::new(sigma_lo, t_lo)));
        }
        sigma_lo -= NUDGE;
        log::info!("left edge moved to sigma = {sigma_lo}");
    }
    let strip = Rectangle::new(sigma_lo, sigma_hi, t_lo, t_hi)?;

    let mut edges = vec![t_lo];
    let first = (t_lo / opts.band_height).floor() as i64 + 1;
    let mut i = first;
    loop {
        let mut b = i as f64 * opts.band_height;
        if b >= t_hi - 0.5 * opts.band_height {
            break;
        }
        let mut tries = 0;
        while !counter.clear(Complex::new(sigma_lo, b), Complex::new(sigma_hi, b))? {
            tries += 1;
            if tries > 20 {
                return Err(Error::ZeroOnBoundary(Complex::new(sigma_lo, b)));
            }
            b += NUDGE;
        }
        edges.push(b);
        i += 1;
    }
    edges.push(t_hi);

    let bands: Vec<Rectangle> = edges.windows(2).map(|w| Rectangle { t_lo: w[0], t_hi: w[1], ..strip }).collect();
    let per_band: Vec<Result<Vec<ZeroRecord>>> = bands
        .par_iter()
        .map(|band| {
            let n = counter.count(band)?;
            let mut out = Vec::with_capacity(n);
            counter.resolve(*band, n, 0, &mut out)?;
            Ok(out)
        })
        .collect();
    let mut zeros = Vec::new();
    for r in per_band {
        zeros.extend(r?);
    }
    sort_zeros(&mut zeros);

    if opts.check_left_region {
        let left = Rectangle::new(LEFT_CHECK_SIGMA, sigma_lo, t_lo, t_hi)?;
        let n = counter.count(&left)?;
        if n > 0 {
            return Err(Error::ZerosOutsideStrip { count: n, sigma_lo });
        }
    }

    let located: usize = zeros.iter().map(|z| z.multiplicity as usize).sum();
    let boundary_count = if opts.cross_check {
        let counted = count_zeros_rect(k, &strip, ctx)?;
        if counted != located {
            return Err(Error::CountMismatch { located, counted });
        }
        Some(counted)
    } else {
        None
    };

    Ok(StripScan { k, strip, band_edges: edges, zeros, boundary_count, evaluations: counter.tracker.cached_points() })
}

/// Zeros of `ζ^(k)` with `t_lo < γ ≤ t_hi`, sorted by `γ` then `β`.
pub fn locate_zeros(k: usize, t_lo: f64, t_hi: f64, ctx: &EvalContext) -> Result<Vec<ZeroRecord>> {
    Ok(scan_strip(k, t_lo, t_hi, ctx, &ScanOptions::default())?.zeros)
}

/// `N_k(T)`: zeros with `0 < γ ≤ T`, counted with multiplicity.
pub fn nk_empirical(k: usize, big_t: f64, ctx: &EvalContext) -> Result<usize> {
    Ok(scan_strip(k, T_MIN, big_t, ctx, &ScanOptions::default())?.total_multiplicity())
}

/// `Σ (β − ½)` over zeros with `0 < γ ≤ T`.
pub fn dist_sum(k: usize, big_t: f64, ctx: &EvalContext) -> Result<f64> {
    Ok(dist_sum_of(&locate_zeros(k, T_MIN, big_t, ctx)?, big_t))
}

/// `Σ m (β − ½)` over the records with `γ ≤ T`.
pub fn dist_sum_of(zeros: &[ZeroRecord], big_t: f64) -> f64 {
    zeros.iter().filter(|z| z.gamma <= big_t).map(|z| z.multiplicity as f64 * (z.beta - 0.5)).sum()
}

/// Count with multiplicity of the records with `γ ≤ T`.
pub fn count_of(zeros: &[ZeroRecord], big_t: f64) -> usize {
    zeros.iter().filter(|z| z.gamma <= big_t).map(|z| z.multiplicity as usize).sum()
}

/// Threshold below `½` for a zero to count as left of the critical line.
pub const LEFT_OF_LINE_GAP: f64 = 1e-9;

/// Located zeros with `β < ½` and `0 < γ ≤ T`.
pub fn left_of_line_report(k: usize, big_t: f64, ctx: &EvalContext) -> Result<Vec<ZeroRecord>> {
    Ok(left_of_line(&locate_zeros(k, T_MIN, big_t, ctx)?))
}

pub fn left_of_line(zeros: &[ZeroRecord]) -> Vec<ZeroRecord> {
    zeros.iter().filter(|z| z.beta < 0.5 - LEFT_OF_LINE_GAP).cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> EvalContext {
        EvalContext::default()
    }

    #[test]
    fn rectangle_invariants() {
        assert!(Rectangle::new(0.0, 1.0, 1.0, 2.0).is_ok());
        assert!(Rectangle::new(1.0, 0.0, 1.0, 2.0).is_err());
        assert!(Rectangle::new(0.0, 1.0, -1.0, 2.0).is_err());
        let r = Rectangle::new(0.0, 1.0, 1.0, 2.0).unwrap();
        assert_eq!(r.mirrored(), Rectangle::new(0.0, 1.0, -2.0, -1.0).unwrap());
        let q = r.quarters(0.5, 0.5);
        assert_eq!(q[3], Rectangle::new(0.5, 1.0, 1.5, 2.0).unwrap());
    }

    #[test]
    fn zero_free_right_of_three() {
        let r = Rectangle::new(2.0, 4.0, 5.0, 6.0).unwrap();
        assert_eq!(count_zeros_rect(1, &r, &ctx()).unwrap(), 0);
    }

    #[test]
    fn first_zeta_zero_counted_and_mirrored() {
        let r = Rectangle::new(0.0, 1.0, 13.0, 15.0).unwrap();
        assert_eq!(count_zeros_rect(0, &r, &ctx()).unwrap(), 1);
        assert_eq!(count_zeros_rect(0, &r.mirrored(), &ctx()).unwrap(), 1);
        assert_eq!(count_zeros_rect_with(0, &r, &ctx(), Evaluator::Series).unwrap(), 1);
    }

    #[test]
    fn boundary_through_zero() {
        let gamma1 = 14.134_725_141_734_694;
        let r = Rectangle::new(0.0, 1.0, gamma1, 15.0).unwrap();
        assert!(matches!(count_zeros_rect(0, &r, &ctx()), Err(Error::ZeroOnBoundary(_))));
    }

    #[test]
    fn zeta_zeros_to_thirty() {
        let z = locate_zeros(0, 10.0, 30.0, &ctx()).unwrap();
        let want = [14.134_725_141_734_694, 21.022_039_638_771_555, 25.010_857_580_145_689];
        assert_eq!(z.len(), 3);
        for (r, g) in z.iter().zip(want) {
            assert!((r.gamma - g).abs() < 1e-9 && (r.beta - 0.5).abs() < 1e-9, "{r:?}");
            assert!(r.residual < 1e-9);
        }
    }

    #[test]
    fn first_derivative_zero() {
        let z = locate_zeros(1, 1.0, 30.0, &ctx()).unwrap();
        assert_eq!(z.len(), 1);
        assert!((z[0].beta - 2.463_161_869_454_321).abs() < 1e-9);
        assert!((z[0].gamma - 23.298_320_492_762_86).abs() < 1e-9);
        assert!((dist_sum_of(&z, 30.0) - 1.963_161_869_454_321).abs() < 1e-9);
    }

    #[test]
    fn second_derivative_zero_left_of_line() {
        let z = locate_zeros(2, T_MIN, 5.0, &ctx()).unwrap();
        assert_eq!(z.len(), 1);
        assert!((z[0].beta + 0.355_084_330_210_476_4).abs() < 1e-9);
        assert!((z[0].gamma - 3.590_839_324_398_967).abs() < 1e-9);
        assert_eq!(left_of_line(&z).len(), 1);
    }

    #[test]
    fn scan_rejects_bad_ranges() {
        assert!(locate_zeros(1, 0.0, 10.0, &ctx()).is_err());
        assert!(locate_zeros(1, 10.0, 5.0, &ctx()).is_err());
        assert!(locate_zeros(1, 1.0, 6000.0, &ctx()).is_err());
        assert!(locate_zeros(MAX_ORDER + 1, 1.0, 6.0, &ctx()).is_err());
    }

    #[test]
    fn sums_are_additive() {
        let z = locate_zeros(1, T_MIN, 60.0, &ctx()).unwrap();
        let whole = dist_sum_of(&z, 60.0);
        let lower = dist_sum_of(&z, 40.0);
        let upper: f64 = z.iter().filter(|r| r.gamma > 40.0).map(|r| r.beta - 0.5).sum();
        assert!((whole - lower - upper).abs() < 1e-12);
        assert!(count_of(&z, 40.0) <= count_of(&z, 60.0));
    }
}
