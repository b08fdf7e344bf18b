//! Grid checks of the region conditions on `G_k`, the reflected sum,
//! `F^(k)/F` and `ζ^(k)/ζ`, and the magnitude diagnostic for `ζ^(k)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{track_arg_with, FunctionId, TrackOptions};
use crate::context::EvalContext;
use crate::error::{Error, Result};
use crate::funceq::{fe2_rhs_parts, g_k};
use crate::zeta::zeta_derivs;
use crate::Complex;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedPoint {
    pub point: Complex,
    pub reason: String,
}

/// Outcome of one condition on its sampled grid. Margins are positive when
/// the inequality holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: u8,
    pub pass: bool,
    pub worst_margin: f64,
    pub worst_point: Option<Complex>,
    pub points_checked: usize,
    pub skipped: Vec<SkippedPoint>,
    /// Human-readable extent of the sampled region.
    pub verified_range: String,
}

impl ConditionReport {
    fn new(condition: u8, verified_range: String) -> Self {
        ConditionReport {
            condition,
            pass: true,
            worst_margin: f64::INFINITY,
            worst_point: None,
            points_checked: 0,
            skipped: Vec::new(),
            verified_range,
        }
    }

    fn record(&mut self, point: Complex, margin: f64) {
        self.points_checked += 1;
        if !(margin > 0.0) {
            self.pass = false;
        }
        if !(margin >= self.worst_margin) {
            self.worst_margin = margin;
            self.worst_point = Some(point);
        }
    }

    fn skip(&mut self, point: Complex, err: &Error) {
        log::warn!("condition {}: skipping {point}: {err}", self.condition);
        self.skipped.push(SkippedPoint { point, reason: err.to_string() });
    }
}

/// Candidate constants for the region conditions, with the grid outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Witness {
    pub k: usize,
    pub a_k: f64,
    pub sigma_k: f64,
    pub t_k: f64,
    pub alpha_k: i32,
    pub beta_k: i32,
    /// Upper end of the sampled `t` range for conditions 2–4.
    pub t_cap: f64,
    pub grid_report: Vec<ConditionReport>,
}

impl Lemma1Witness {
    /// `a_k = 10`, `σ_k = −max(8, 4k)`, `t_k = max(a_k², −σ_k, 100)`, `t_cap = 2000`.
    pub fn defaults(k: usize) -> Lemma1Witness {
        let a_k = 10.0;
        let sigma_k = -(8.0f64).max(4.0 * k as f64);
        let (alpha_k, beta_k) = Self::parity(k);
        Lemma1Witness {
            k,
            a_k,
            sigma_k,
            t_k: (a_k * a_k).max(-sigma_k).max(100.0),
            alpha_k,
            beta_k,
            t_cap: 2000.0,
            grid_report: Vec::new(),
        }
    }

    pub fn parity(k: usize) -> (i32, i32) {
        if k % 2 == 1 {
            (5, 7)
        } else {
            (-1, 1)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Domain(m));
        if self.k == 0 || self.k > crate::context::MAX_ORDER {
            return bad(format!("k must be in 1..={}, got {}", crate::context::MAX_ORDER, self.k));
        }
        if !(self.a_k >= 10.0) {
            return bad(format!("a_k must be at least 10, got {}", self.a_k));
        }
        if !(self.sigma_k <= -1.0) {
            return bad(format!("sigma_k must be at most -1, got {}", self.sigma_k));
        }
        if !(self.t_k >= (self.a_k * self.a_k).max(-self.sigma_k)) {
            return bad(format!("t_k = {} is below max(a_k^2, -sigma_k)", self.t_k));
        }
        if (self.alpha_k, self.beta_k) != Self::parity(self.k) {
            return bad(format!("(alpha_k, beta_k) must be {:?} for k = {}", Self::parity(self.k), self.k));
        }
        if !(self.t_cap >= self.t_k) {
            return bad(format!("t_cap = {} is below t_k = {}", self.t_cap, self.t_k));
        }
        Ok(())
    }

    pub fn passed(&self) -> bool {
        !self.grid_report.is_empty() && self.grid_report.iter().all(|r| r.pass)
    }

    pub fn condition(&self, n: u8) -> Option<&ConditionReport> {
        self.grid_report.iter().find(|r| r.condition == n)
    }
}

/// Sampling density for [`check_lemma1`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Grid {
    pub cond1_sigma_max: f64,
    pub cond1_sigma_step: f64,
    pub cond1_t_max: f64,
    pub cond1_t_step: f64,
    /// Offsets below `σ_k` sampled for condition 2.
    pub cond2_sigma_offsets: Vec<f64>,
    pub cond2_ts: Vec<f64>,
    /// Spacing of the horizontal rows for conditions 3–4.
    pub row_t_step: f64,
    /// Lattice spacing for tracking along rows and the anchoring column.
    pub track_step: f64,
    /// Which conditions to evaluate.
    pub conditions: Vec<u8>,
}

impl Default for Lemma1Grid {
    fn default() -> Self {
        Lemma1Grid {
            cond1_sigma_max: 30.0,
            cond1_sigma_step: 2.0,
            cond1_t_max: 100.0,
            cond1_t_step: 10.0,
            cond2_sigma_offsets: vec![0.0, 4.0, 12.0, 28.0],
            cond2_ts: vec![2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0, 2000.0],
            row_t_step: 25.0,
            track_step: 1.0,
            conditions: vec![1, 2, 3, 4],
        }
    }
}

fn steps(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

/// `½ (2/3)^{σ/2}`.
pub fn cond1_envelope(sigma: f64) -> f64 {
    0.5 * (2.0f64 / 3.0).powf(sigma / 2.0)
}

fn check_cond1(w: &Lemma1Witness, grid: &Lemma1Grid, ctx: &EvalContext) -> ConditionReport {
    let mut rep = ConditionReport::new(
        1,
        format!("sigma in [{}, {}], t in [0, {}]", w.a_k, grid.cond1_sigma_max, grid.cond1_t_max),
    );
    for sigma in steps(w.a_k, grid.cond1_sigma_max, grid.cond1_sigma_step) {
        for t in steps(0.0, grid.cond1_t_max, grid.cond1_t_step) {
            let s = Complex::new(sigma, t);
            match g_k(s, w.k, ctx) {
                Ok(g) => rep.record(s, cond1_envelope(sigma) - (g - 1.0).norm()),
                Err(e) => rep.skip(s, &e),
            }
        }
    }
    rep
}

fn check_cond2(w: &Lemma1Witness, grid: &Lemma1Grid, ctx: &EvalContext) -> ConditionReport {
    let lowest = grid.cond2_sigma_offsets.iter().copied().fold(0.0, f64::max);
    let mut rep = ConditionReport::new(
        2,
        format!("sigma in [{}, {}], t in [2, {}]", w.sigma_k - lowest, w.sigma_k, w.t_cap),
    );
    for off in &grid.cond2_sigma_offsets {
        let sigma = w.sigma_k - off;
        for &t in grid.cond2_ts.iter().filter(|&&t| t >= 2.0 && t <= w.t_cap) {
            let s = Complex::new(sigma, t);
            match fe2_rhs_parts(s, w.k, ctx) {
                // relative margin, since 2^σ is tiny
                Ok((_, sum)) => rep.record(s, 1.0 - sum.norm() / sigma.exp2()),
                Err(e) => rep.skip(s, &e),
            }
        }
    }
    rep
}

/// Re-expresses `arg` on the branch nearest `centre`.
fn nearest_branch(arg: f64, centre: f64) -> f64 {
    arg + 2.0 * PI * ((centre - arg) / (2.0 * PI)).round()
}

/// Tracks `function_id` up the column `σ = σ_k` and then along each row to
/// `sigma_end`, so that every sample lies on one branch continuous over the
/// region. The branch is fixed at `(σ_k, t_k − 1)` as the representative
/// nearest `centre`.
fn check_window(
    w: &Lemma1Witness,
    grid: &Lemma1Grid,
    ctx: &EvalContext,
    function_id: FunctionId,
    sigma_end: f64,
    window: (f64, f64),
    rep: &mut ConditionReport,
    mut extra: impl FnMut(Complex, Complex, &mut ConditionReport),
) {
    let opts = TrackOptions::new(ctx).with_max_step(grid.track_step);
    let centre = 0.5 * (window.0 + window.1);
    let t0 = w.t_k - 1.0;
    let mut rows = steps(t0, w.t_cap, grid.row_t_step);
    if rows.last().is_some_and(|&t| t < w.t_cap) {
        rows.push(w.t_cap);
    }
    let corner = Complex::new(w.sigma_k, t0);
    let mut col_arg = match track_arg_with(function_id, w.k, &[corner], ctx, opts, None) {
        Ok(tr) => nearest_branch(tr.final_arg(), centre),
        Err(e) => {
            rep.skip(corner, &e);
            rep.pass = false;
            return;
        }
    };
    let mut prev = corner;
    for &t in &rows {
        let start = Complex::new(w.sigma_k, t);
        if start != prev {
            match track_arg_with(function_id, w.k, &[prev, start], ctx, opts, Some(col_arg)) {
                Ok(tr) => {
                    for smp in &tr.samples {
                        rep.record(smp.point, (smp.unwrapped_arg - window.0).min(window.1 - smp.unwrapped_arg));
                        extra(smp.point, smp.value, rep);
                    }
                    col_arg = tr.final_arg();
                }
                Err(e) => {
                    // the branch cannot be carried past a zero on the column
                    rep.skip(start, &e);
                    rep.pass = false;
                    return;
                }
            }
            prev = start;
        }
        let path = [start, Complex::new(sigma_end, t)];
        match track_arg_with(function_id, w.k, &path, ctx, opts, Some(col_arg)) {
            Ok(tr) => {
                for smp in &tr.samples {
                    rep.record(smp.point, (smp.unwrapped_arg - window.0).min(window.1 - smp.unwrapped_arg));
                    extra(smp.point, smp.value, rep);
                }
            }
            Err(e) => rep.skip(start, &e),
        }
    }
}

fn check_cond3(w: &Lemma1Witness, grid: &Lemma1Grid, ctx: &EvalContext) -> ConditionReport {
    let mut rep = ConditionReport::new(3, format!("sigma in [{}, 0.5], t in [{}, {}]", w.sigma_k, w.t_k - 1.0, w.t_cap));
    let window = (w.alpha_k as f64 * PI / 6.0, w.beta_k as f64 * PI / 6.0);
    check_window(w, grid, ctx, FunctionId::FkOverF, 0.5, window, &mut rep, |s, v, rep| {
        // |F^(k)/F| ≥ 1 is part of the same condition
        if !(v.norm() >= 1.0) {
            rep.pass = false;
            let margin = v.norm() - 1.0;
            if margin < rep.worst_margin {
                rep.worst_margin = margin;
                rep.worst_point = Some(s);
            }
        }
    });
    rep
}

/// Rows stop this far left of the critical line, where zeros of `ζ` sit.
const COND4_LINE_GAP: f64 = 1e-2;

fn check_cond4(w: &Lemma1Witness, grid: &Lemma1Grid, ctx: &EvalContext) -> ConditionReport {
    let sigma_end = 0.5 - COND4_LINE_GAP;
    let mut rep =
        ConditionReport::new(4, format!("sigma in [{}, {sigma_end}], t in [{}, {}]", w.sigma_k, w.t_k - 1.0, w.t_cap));
    let k = w.k as f64;
    let window = (k * PI / 2.0, 3.0 * k * PI / 2.0);
    check_window(w, grid, ctx, FunctionId::ZetakOverZeta, sigma_end, window, &mut rep, |_, _, _| {});
    rep
}

/// Samples conditions 1–4 on `grid` and fills `grid_report`. Points where
/// evaluation fails are skipped and listed; they do not abort the check.
pub fn check_lemma1(candidate: &Lemma1Witness, grid: &Lemma1Grid, ctx: &EvalContext) -> Result<Lemma1Witness> {
    candidate.validate()?;
    ctx.validate_for_order(candidate.k + 2)?;
    let mut w = candidate.clone();
    w.grid_report.clear();
    for &c in &grid.conditions {
        let rep = match c {
            1 => check_cond1(&w, grid, ctx),
            2 => check_cond2(&w, grid, ctx),
            3 => check_cond3(&w, grid, ctx),
            4 => check_cond4(&w, grid, ctx),
            other => return Err(Error::Domain(format!("no region condition {other}"))),
        };
        w.grid_report.push(rep);
    }
    Ok(w)
}

/// Smallest `a` on the lattice `10, 10 + step, …` below the grid's `σ` cap
/// for which condition 1 holds on the whole sampled region `σ ≥ a`.
pub fn minimal_a_k(k: usize, step: f64, grid: &Lemma1Grid, ctx: &EvalContext) -> Result<Option<f64>> {
    let mut w = Lemma1Witness::defaults(k);
    w.validate()?;
    let mut a = 10.0;
    while a <= grid.cond1_sigma_max {
        w.a_k = a;
        let rep = check_cond1(&w, grid, ctx);
        if rep.pass && rep.skipped.is_empty() {
            return Ok(Some(a));
        }
        a += step;
    }
    Ok(None)
}

/// Sample points for [`lemma4_diag`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma4Grid {
    pub sigmas: Vec<f64>,
    pub ts: Vec<f64>,
    /// Right edge `A` of the region.
    pub a: f64,
}

impl Lemma4Grid {
    /// `n_sigma × n_t` evenly spaced points filling the region for `T`.
    pub fn uniform(t: f64, a: f64, n_sigma: usize, n_t: usize) -> Lemma4Grid {
        let lo = 0.5 - 1.0 / t.ln().ln();
        let spread = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
            if n <= 1 {
                return vec![lo];
            }
            (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
        };
        Lemma4Grid { sigmas: spread(lo, a, n_sigma), ts: spread(t / 2.0, 2.0 * t, n_t), a }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma4Row {
    pub sigma: f64,
    pub t: f64,
    pub log_abs: f64,
    /// `(log T)^{2(1−σ)} / log log T + (log T)^{1/10}`.
    pub shape: f64,
    /// `c0 · shape`.
    pub envelope_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma4Table {
    pub k: usize,
    pub big_t: f64,
    /// Smallest constant with `log|ζ^(k)| ≤ c0 · shape` on the grid.
    pub c0: f64,
    pub rows: Vec<Lemma4Row>,
}

/// Smallest height accepted by [`lemma4_diag`], the default `t_k`.
pub const LEMMA4_MIN_T: f64 = 100.0;

pub fn lemma4_shape(sigma: f64, big_t: f64) -> f64 {
    let l = big_t.ln();
    l.powf(2.0 * (1.0 - sigma)) / l.ln() + l.powf(0.1)
}

/// Tabulates `log|ζ^(k)(σ+it)|` against the magnitude envelope shape over
/// `½ − 1/log log T ≤ σ ≤ A`, `T/2 ≤ t ≤ 2T`.
pub fn lemma4_diag(k: usize, big_t: f64, grid: &Lemma4Grid, ctx: &EvalContext) -> Result<Lemma4Table> {
    if !(big_t >= LEMMA4_MIN_T) {
        return Err(Error::Domain(format!("T must be at least {LEMMA4_MIN_T}, got {big_t}")));
    }
    let lo = 0.5 - 1.0 / big_t.ln().ln();
    if !(grid.a >= 0.5) {
        return Err(Error::Domain(format!("A must be at least 1/2, got {}", grid.a)));
    }
    if let Some(s) = grid.sigmas.iter().find(|&&s| !(s >= lo - 1e-12 && s <= grid.a)) {
        return Err(Error::Domain(format!("sigma {s} outside [{lo}, {}]", grid.a)));
    }
    if let Some(t) = grid.ts.iter().find(|&&t| !(t >= big_t / 2.0 && t <= 2.0 * big_t)) {
        return Err(Error::Domain(format!("t {t} outside [T/2, 2T]")));
    }
    ctx.validate_for_order(k)?;
    let mut rows = Vec::with_capacity(grid.sigmas.len() * grid.ts.len());
    for &sigma in &grid.sigmas {
        for &t in &grid.ts {
            let d = zeta_derivs(Complex::new(sigma, t), k, ctx)?;
            rows.push(Lemma4Row {
                sigma,
                t,
                log_abs: d[k].norm().ln(),
                shape: lemma4_shape(sigma, big_t),
                envelope_value: 0.0,
            });
        }
    }
    let c0 = rows.iter().map(|r| r.log_abs / r.shape).fold(f64::NEG_INFINITY, f64::max);
    for r in &mut rows {
        r.envelope_value = c0 * r.shape;
    }
    Ok(Lemma4Table { k, big_t, c0, rows })
}
