//! Continuous tracking of the argument of a function along a polyline.
//!
//! Every branch convention used downstream (`arg ζ`, `arg G_k`, the window
//! conditions on `F^(k)/F` and `ζ^(k)/ζ`, `S(T)`) is realized by unwrapping
//! along an explicit path from an anchor point.

mod lemma;

use std::collections::HashMap;
use std::f64::consts::{LN_2, PI};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::context::EvalContext;
use crate::error::{Error, Result};
use crate::funceq::{fe2_rhs, fk_over_f, g_k_from};
use crate::zeta::Evaluator;
use crate::Complex;

pub use lemma::{
    check_lemma1, lemma4_diag, minimal_a_k, ConditionReport, Lemma1Grid, Lemma1Witness, Lemma4Grid,
    Lemma4Row, Lemma4Table, SkippedPoint,
};

/// Abscissa standing in for `σ → ∞` when anchoring `arg ζ` and `arg G_k`.
pub const ANCHOR_SIGMA: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FunctionId {
    #[serde(rename = "ZETA")]
    Zeta,
    #[serde(rename = "G_K")]
    GK,
    #[serde(rename = "FK_OVER_F")]
    FkOverF,
    #[serde(rename = "ZETAK_OVER_ZETA")]
    ZetakOverZeta,
    #[serde(rename = "FE2_RHS")]
    Fe2Rhs,
}

impl std::str::FromStr for FunctionId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "ZETA" => Ok(FunctionId::Zeta),
            "G_K" | "GK" => Ok(FunctionId::GK),
            "FK_OVER_F" => Ok(FunctionId::FkOverF),
            "ZETAK_OVER_ZETA" => Ok(FunctionId::ZetakOverZeta),
            "FE2_RHS" => Ok(FunctionId::Fe2Rhs),
            other => Err(Error::Domain(format!("unknown function id {other}"))),
        }
    }
}

/// A function value with, when cheaply available, the logarithmic
/// derivative `g = f′/f` and its derivative `g′`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointEval {
    pub value: Complex,
    pub dlog: Option<(Complex, Complex)>,
}

impl PointEval {
    /// From `[f, f′, f″]`.
    pub fn from_derivs(d: &[Complex]) -> PointEval {
        let g = d[1] / d[0];
        PointEval { value: d[0], dlog: Some((g, d[2] / d[0] - g * g)) }
    }

    pub fn value_only(value: Complex) -> PointEval {
        PointEval { value, dlog: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackOptions {
    /// Paths are first cut at a lattice of this spacing.
    pub max_step: f64,
    /// Largest accepted principal phase change between neighbouring samples.
    pub phase_limit: f64,
    /// Largest accepted gap between the phase change and the quadrature of
    /// `Im ∫ f′/f` over a segment, when derivatives are available.
    pub quad_tol: f64,
    pub max_depth: usize,
    /// Segments that still need splitting below this length signal a zero
    /// on (or within this distance of) the path.
    pub min_step: f64,
    /// Values with modulus below this count as zeros on the path.
    pub zero_floor: f64,
}

impl TrackOptions {
    pub fn new(ctx: &EvalContext) -> TrackOptions {
        TrackOptions {
            max_step: 0.25,
            phase_limit: PI / 2.0,
            quad_tol: 2e-4,
            max_depth: 40,
            min_step: 1e-9,
            zero_floor: 10.0 * ctx.abs_tol,
        }
    }

    pub fn with_max_step(mut self, step: f64) -> Self {
        self.max_step = step;
        self
    }
}

type Key = (u64, u64);

fn key(s: Complex) -> Key {
    (s.re.to_bits(), s.im.to_bits())
}

/// Memoizing adaptive phase tracker for one function.
pub struct Tracker<'a> {
    f: Box<dyn Fn(Complex) -> Result<PointEval> + Send + Sync + 'a>,
    opts: TrackOptions,
    cache: Mutex<HashMap<Key, PointEval>>,
}

/// Samples and per-segment phase increments along a path.
#[derive(Debug, Clone, Default)]
pub struct Trace {
    pub points: Vec<Complex>,
    pub values: Vec<Complex>,
    /// `increments[i]` is the principal phase change from sample `i` to `i + 1`.
    pub increments: Vec<f64>,
    /// Quadrature of `Im ∫ f′/f` over each segment, where derivatives exist.
    pub quad_increments: Vec<Option<f64>>,
    pub min_modulus: f64,
}

impl Trace {
    pub fn total_change(&self) -> f64 {
        self.increments.iter().sum()
    }

    pub fn total_quadrature(&self) -> Option<f64> {
        self.quad_increments.iter().copied().sum()
    }

    /// Unwrapped arguments at every sample, starting from `start`.
    pub fn unwrapped(&self, start: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.points.len());
        let mut acc = start;
        out.push(acc);
        for d in &self.increments {
            acc += d;
            out.push(acc);
        }
        out
    }

    fn append(&mut self, other: Trace) {
        if self.points.is_empty() {
            *self = other;
            return;
        }
        self.points.extend(other.points.into_iter().skip(1));
        self.values.extend(other.values.into_iter().skip(1));
        self.increments.extend(other.increments);
        self.quad_increments.extend(other.quad_increments);
        self.min_modulus = self.min_modulus.min(other.min_modulus);
    }
}

/// Points that cut the segment `a → b` at a global lattice of spacing
/// `step`, so that edges shared by neighbouring rectangles are sampled at
/// identical points in either direction.
fn lattice_points(a: Complex, b: Complex, step: f64) -> Vec<Complex> {
    let reversed = (a.re, a.im) > (b.re, b.im);
    let (lo, hi) = if reversed { (b, a) } else { (a, b) };
    let margin = 1e-3 * step;
    let mut pts = vec![lo];
    if lo.im == hi.im || lo.re == hi.re {
        let horizontal = lo.im == hi.im;
        let (from, to) = if horizontal { (lo.re, hi.re) } else { (lo.im, hi.im) };
        let first = (from / step).floor() as i64 + 1;
        let last = (to / step).ceil() as i64 - 1;
        for i in first..=last {
            let x = i as f64 * step;
            if x > from + margin && x < to - margin {
                pts.push(if horizontal { Complex::new(x, lo.im) } else { Complex::new(lo.re, x) });
            }
        }
    } else {
        let n = ((hi - lo).norm() / step).ceil().max(1.0) as usize;
        for i in 1..n {
            pts.push(lo + (hi - lo) * (i as f64 / n as f64));
        }
    }
    pts.push(hi);
    if reversed {
        pts.reverse();
    }
    pts
}

fn principal_step(from: Complex, to: Complex) -> f64 {
    (to / from).arg()
}

impl<'a> Tracker<'a> {
    pub fn new<F>(f: F, opts: TrackOptions) -> Tracker<'a>
    where
        F: Fn(Complex) -> Result<PointEval> + Send + Sync + 'a,
    {
        Tracker { f: Box::new(f), opts, cache: Mutex::new(HashMap::new()) }
    }

    pub fn options(&self) -> &TrackOptions {
        &self.opts
    }

    pub fn eval(&self, s: Complex) -> Result<PointEval> {
        if let Some(v) = self.cache.lock().unwrap().get(&key(s)) {
            return Ok(*v);
        }
        let v = (self.f)(s)?;
        let modulus = v.value.norm();
        if !(modulus >= self.opts.zero_floor) {
            return Err(Error::ZeroOnPath { point: s, modulus });
        }
        self.cache.lock().unwrap().insert(key(s), v);
        Ok(v)
    }

    pub fn cached_points(&self) -> usize {
        self.cache.lock().unwrap().len()
    }

    /// Tracks along the polyline through `vertices`.
    pub fn trace(&self, vertices: &[Complex]) -> Result<Trace> {
        self.trace_with(vertices, self.opts.min_step)
    }

    /// [`Tracker::trace`] with a different zero-proximity resolution.
    pub fn trace_with(&self, vertices: &[Complex], min_step: f64) -> Result<Trace> {
        let mut trace = Trace { min_modulus: f64::INFINITY, ..Default::default() };
        if vertices.is_empty() {
            return Ok(trace);
        }
        let first = self.eval(vertices[0])?;
        trace.points.push(vertices[0]);
        trace.values.push(first.value);
        trace.min_modulus = first.value.norm();
        for pair in vertices.windows(2) {
            let pts = lattice_points(pair[0], pair[1], self.opts.max_step);
            for seg in pts.windows(2) {
                let mut part = Trace { min_modulus: f64::INFINITY, ..Default::default() };
                let ea = self.eval(seg[0])?;
                part.points.push(seg[0]);
                part.values.push(ea.value);
                let eb = self.eval(seg[1])?;
                self.refine(seg[0], seg[1], ea, eb, 0, min_step, &mut part)?;
                part.min_modulus = part.values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
                trace.append(part);
            }
        }
        Ok(trace)
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(
        &self,
        a: Complex,
        b: Complex,
        ea: PointEval,
        eb: PointEval,
        depth: usize,
        min_step: f64,
        out: &mut Trace,
    ) -> Result<()> {
        let d = principal_step(ea.value, eb.value);
        let quad = match (ea.dlog, eb.dlog) {
            (Some((ga, dga)), Some((gb, dgb))) => {
                let h = b - a;
                Some((h * (ga + gb) * 0.5 + h * h * (dga - dgb) / 12.0).im)
            }
            _ => None,
        };
        let accept = d.abs() < self.opts.phase_limit && quad.is_none_or(|q| (q - d).abs() < self.opts.quad_tol);
        if accept {
            out.points.push(b);
            out.values.push(eb.value);
            out.increments.push(d);
            out.quad_increments.push(quad);
            return Ok(());
        }
        if depth >= self.opts.max_depth {
            return Err(Error::MaxSubdivision { from: a, to: b });
        }
        let mid = (a + b) * 0.5;
        if (b - a).norm() < min_step {
            let modulus = ea.value.norm().min(eb.value.norm());
            return Err(Error::ZeroOnPath { point: mid, modulus });
        }
        let em = self.eval(mid)?;
        self.refine(a, mid, ea, em, depth + 1, min_step, out)?;
        self.refine(mid, b, em, eb, depth + 1, min_step, out)
    }
}

/// A continuously tracked argument of a named function along a polyline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchTrace {
    pub function_id: FunctionId,
    pub k: usize,
    pub path: Vec<Complex>,
    pub samples: Vec<BranchSample>,
    pub min_modulus: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchSample {
    pub point: Complex,
    pub value: Complex,
    pub unwrapped_arg: f64,
}

impl BranchTrace {
    pub fn final_arg(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.unwrapped_arg)
    }

    pub fn total_change(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.unwrapped_arg - a.unwrapped_arg,
            _ => 0.0,
        }
    }
}

/// Point evaluator for a tracked function. `ζ`, `G_k` and `ζ^(k)` carry
/// their logarithmic derivatives; the ratio functions are value-only.
pub fn point_evaluator(
    function_id: FunctionId,
    k: usize,
    ctx: EvalContext,
    evaluator: Evaluator,
) -> impl Fn(Complex) -> Result<PointEval> + Send + Sync {
    move |s: Complex| -> Result<PointEval> {
        match function_id {
            FunctionId::Zeta => Ok(PointEval::from_derivs(&evaluator.derivs(s, 2, &ctx)?)),
            FunctionId::GK => {
                let d = evaluator.derivs(s, k + 2, &ctx)?;
                let mut e = PointEval::from_derivs(&d[k..]);
                e.value = g_k_from(s, k, d[k]);
                if let Some((g, dg)) = e.dlog {
                    e.dlog = Some((g + LN_2, dg));
                }
                Ok(e)
            }
            FunctionId::FkOverF => Ok(PointEval::value_only(fk_over_f(s, k)?)),
            FunctionId::ZetakOverZeta => {
                let d = evaluator.derivs(s, k, &ctx)?;
                if d[0].norm() < 10.0 * ctx.abs_tol {
                    return Err(Error::ZeroOnPath { point: s, modulus: 0.0 });
                }
                Ok(PointEval::value_only(d[k] / d[0]))
            }
            FunctionId::Fe2Rhs => Ok(PointEval::value_only(fe2_rhs(s, k, &ctx)?)),
        }
    }
}

/// `ζ^(k)` with its logarithmic derivatives, for zero counting.
pub fn zeta_k_evaluator(k: usize, ctx: EvalContext, evaluator: Evaluator) -> impl Fn(Complex) -> Result<PointEval> + Send + Sync {
    move |s: Complex| Ok(PointEval::from_derivs(&evaluator.derivs(s, k + 2, &ctx)?[k..]))
}

/// Tracks `arg` of `function_id` along `path`, starting from the principal
/// argument at the first vertex.
pub fn track_arg(function_id: FunctionId, k: usize, path: &[Complex], ctx: &EvalContext) -> Result<BranchTrace> {
    track_arg_with(function_id, k, path, ctx, TrackOptions::new(ctx), None)
}

/// [`track_arg`] with explicit options and an optional starting argument
/// (otherwise the principal argument at the first vertex).
pub fn track_arg_with(
    function_id: FunctionId,
    k: usize,
    path: &[Complex],
    ctx: &EvalContext,
    opts: TrackOptions,
    start_arg: Option<f64>,
) -> Result<BranchTrace> {
    ctx.validate()?;
    let tracker = Tracker::new(point_evaluator(function_id, k, *ctx, Evaluator::Ring), opts);
    let trace = tracker.trace(path)?;
    Ok(into_branch_trace(function_id, k, path, trace, start_arg))
}

fn into_branch_trace(function_id: FunctionId, k: usize, path: &[Complex], trace: Trace, start_arg: Option<f64>) -> BranchTrace {
    let start = start_arg.unwrap_or_else(|| trace.values.first().map_or(0.0, |v| v.arg()));
    let args = trace.unwrapped(start);
    let samples = trace
        .points
        .iter()
        .zip(&trace.values)
        .zip(args)
        .map(|((p, v), a)| BranchSample { point: *p, value: *v, unwrapped_arg: a })
        .collect();
    BranchTrace { function_id, k, path: path.to_vec(), samples, min_modulus: trace.min_modulus }
}

fn horizontal_path(t: f64) -> [Complex; 2] {
    [Complex::new(ANCHOR_SIGMA, t), Complex::new(0.5, t)]
}

/// `arg ζ(½ + iT)` on the branch continuous along `σ: 30 → ½` at height `T`
/// and starting from the principal value at `σ = 30`.
pub fn arg_zeta_at_half(t: f64, ctx: &EvalContext) -> Result<f64> {
    if !(t >= 2.0) {
        return Err(Error::Domain(format!("T must be at least 2, got {t}")));
    }
    Ok(track_arg(FunctionId::Zeta, 0, &horizontal_path(t), ctx)?.final_arg())
}

/// `S(T) = arg ζ(½ + iT) / π`.
pub fn s_of_t(t: f64, ctx: &EvalContext) -> Result<f64> {
    Ok(arg_zeta_at_half(t, ctx)? / PI)
}

/// `arg G_k(½ + iT)`, tracked along `σ: 30 → ½` at height `T`.
///
/// For `k ≥ 1` the anchor is the principal value at `σ = 30`, where `G_k` is
/// within `10^{-4}` of 1. `G_0 = 2^s ζ(s)` does not tend to 1; its anchor is
/// `T log 2 + arg ζ(30 + iT)`, which is the branch `log G_0 = s log 2 + log ζ`.
pub fn arg_gk_at_half(t: f64, k: usize, ctx: &EvalContext) -> Result<f64> {
    if !(t >= 2.0) {
        return Err(Error::Domain(format!("T must be at least 2, got {t}")));
    }
    let path = horizontal_path(t);
    let opts = TrackOptions::new(ctx);
    let start = if k == 0 {
        let z = crate::zeta::zeta(path[0], ctx)?;
        Some(t * LN_2 + z.arg())
    } else {
        None
    };
    Ok(track_arg_with(FunctionId::GK, k, &path, ctx, opts, start)?.final_arg())
}

/// Retries `f` at `T, T + δ, T + 2δ, …` (δ = 10⁻³) while it reports a zero on
/// the path; returns the height used with the result.
pub fn perturb_height<R>(t: f64, mut f: impl FnMut(f64) -> Result<R>) -> Result<(f64, R)> {
    const STEP: f64 = 1e-3;
    const TRIES: usize = 20;
    let mut last = None;
    for i in 0..TRIES {
        let height = t + i as f64 * STEP;
        match f(height) {
            Ok(r) => return Ok((height, r)),
            Err(e @ (Error::ZeroOnPath { .. } | Error::ZeroOnBoundary(_) | Error::MaxSubdivision { .. })) => {
                last = Some(e)
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap())
}
