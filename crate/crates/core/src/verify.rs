//! Main terms of the counting and distribution formulas for the zeros of
//! `ζ^(k)`, and residual reports against scanned zeros.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::argtrack::{arg_gk_at_half, arg_zeta_at_half, perturb_height};
use crate::context::EvalContext;
use crate::error::{Error, Result};
use crate::funceq::li_from_2;
use crate::stats;
use crate::zeroscan::{count_of, dist_sum_of, scan_strip, ScanOptions, ZeroRecord, T_MAX, T_MIN};

const TWO_PI: f64 = 2.0 * PI;

/// `(T/2π) log(T/4π) − T/2π`.
pub fn berndt_main(t: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("T must be positive, got {t}")));
    }
    Ok(t / TWO_PI * (t / (2.0 * TWO_PI)).ln() - t / TWO_PI)
}

/// `(kT/2π) log log(T/2π) + (1/2π)(½ log 2 − k log log 2) T − k Li(T/2π)`,
/// for `T > 4π`.
pub fn theorem1_main(k: usize, t: f64) -> Result<f64> {
    theorem1_main_with(k, t, li_from_2)
}

/// [`theorem1_main`] with a caller-supplied `Li`.
pub fn theorem1_main_with(k: usize, t: f64, li: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    if !(t > 2.0 * TWO_PI && t.is_finite()) {
        return Err(Error::Domain(format!("T must exceed 4π, got {t}")));
    }
    let k = k as f64;
    let x = t / TWO_PI;
    Ok(k * x * x.ln().ln() + (0.5 * LN_2 - k * LN_2.ln()) * x - k * li(x)?)
}

/// `(kU/2π) log log(T/2π) + (1/2π)(½ log 2 − k log log 2) U`, for `T > 2π`.
pub fn cor2_main(k: usize, t: f64, u: f64) -> Result<f64> {
    if !(t > TWO_PI && t.is_finite()) {
        return Err(Error::Domain(format!("T must exceed 2π, got {t}")));
    }
    if !(u >= 0.0 && u.is_finite()) {
        return Err(Error::Domain(format!("U must be non-negative, got {u}")));
    }
    let k = k as f64;
    Ok(k * u / TWO_PI * (t / TWO_PI).ln().ln() + (0.5 * LN_2 - k * LN_2.ln()) * u / TWO_PI)
}

/// One evaluation of the exact decomposition
/// `N_k(T) = berndt_main(T) + arg G_k(½+iT)/2π + arg ζ(½+iT)/2π + O_k(1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prop6Row {
    pub t_requested: f64,
    /// Height actually used, moved off zero ordinates.
    pub t: f64,
    pub n_k: usize,
    pub berndt: f64,
    pub arg_gk: f64,
    pub arg_zeta: f64,
    pub residual: f64,
}

/// Zero ordinates closer than this to a height force a perturbation.
const ORDINATE_GAP: f64 = 1e-6;

/// [`Prop6Row`] at `t`, counting from `zeros` (which must cover `(0, t]`).
pub fn prop6_row_from(k: usize, t: f64, zeros: &[ZeroRecord], ctx: &EvalContext) -> Result<Prop6Row> {
    let (used, (arg_gk, arg_zeta)) = perturb_height(t, |h| {
        if let Some(z) = zeros.iter().find(|z| (z.gamma - h).abs() < ORDINATE_GAP) {
            return Err(Error::ZeroOnPath { point: z.point(), modulus: 0.0 });
        }
        Ok((arg_gk_at_half(h, k, ctx)?, arg_zeta_at_half(h, ctx)?))
    })?;
    let n_k = count_of(zeros, used);
    let berndt = berndt_main(used)?;
    let residual = n_k as f64 - (berndt + arg_gk / TWO_PI + arg_zeta / TWO_PI);
    Ok(Prop6Row { t_requested: t, t: used, n_k, berndt, arg_gk, arg_zeta, residual })
}

fn scan_to(k: usize, t: f64, ctx: &EvalContext) -> Result<Vec<ZeroRecord>> {
    // the scan top only has to clear the heights actually used
    let (_, scan) = perturb_height(t + 0.5, |h| scan_strip(k, T_MIN, h, ctx, &ScanOptions::default()))?;
    Ok(scan.zeros)
}

/// Zeros up to (about) [`scan_height`], enough for [`residual_suite_from`].
pub fn zeros_for_grid(k: usize, grid: &[f64], ctx: &EvalContext) -> Result<Vec<ZeroRecord>> {
    check_grid(grid)?;
    if grid.is_empty() {
        return Ok(Vec::new());
    }
    scan_to(k, scan_height(grid) - 0.5, ctx)
}

/// `N_k(T) − [berndt_main(T) + arg G_k(½+iT)/2π + arg ζ(½+iT)/2π]`.
pub fn prop6_residual(k: usize, t: f64, ctx: &EvalContext) -> Result<Prop6Row> {
    if !(t >= 2.0 && t + 0.5 <= T_MAX) {
        return Err(Error::Domain(format!("T must lie in [2, {}], got {t}", T_MAX - 0.5)));
    }
    prop6_row_from(k, t, &scan_to(k, t, ctx)?, ctx)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Quantity {
    Count,
    DistSum,
    Prop6,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::Count => "COUNT",
            Quantity::DistSum => "DIST_SUM",
            Quantity::Prop6 => "PROP6",
        }
    }

    pub fn envelope_id(self) -> &'static str {
        match self {
            Quantity::Count => "log T",
            Quantity::DistSum => "(log log T)^2",
            Quantity::Prop6 => "const",
        }
    }

    pub fn envelope(self, t: f64) -> f64 {
        match self {
            Quantity::Count => t.ln(),
            Quantity::DistSum => t.ln().ln().powi(2),
            Quantity::Prop6 => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    #[serde(rename = "T")]
    pub t: f64,
    pub empirical: f64,
    pub main_term: f64,
    pub residual: f64,
    /// `fitted_constant · envelope(T)`.
    pub envelope_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub k: usize,
    pub quantity: Quantity,
    pub rows: Vec<ResidualRow>,
    /// Least-squares constant `c` in `|residual| ≈ c · envelope(T)`.
    pub fitted_constant: f64,
    /// Smallest `c` with `|residual| ≤ c · envelope(T)` on every row.
    pub bound_constant: f64,
    pub envelope_id: String,
}

/// Trend diagnostics of `|residual| / envelope(T)` against `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendCheck {
    pub spearman_rho: f64,
    /// One-sided p-value for a positive rank correlation.
    pub spearman_p: f64,
    /// OLS slope of `|residual|` against `log T`, with its standard error.
    pub slope_vs_log_t: f64,
    pub slope_se: f64,
    pub max_over_median: f64,
}

/// 12 significant digits, shortest round-trip form.
pub fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

impl ResidualReport {
    pub fn new(k: usize, quantity: Quantity, mut rows: Vec<ResidualRow>) -> ResidualReport {
        rows.sort_by(|a, b| a.t.total_cmp(&b.t));
        let env: Vec<f64> = rows.iter().map(|r| quantity.envelope(r.t)).collect();
        let num: f64 = rows.iter().zip(&env).map(|(r, e)| r.residual.abs() * e).sum();
        let den: f64 = env.iter().map(|e| e * e).sum();
        let fitted_constant = if den > 0.0 { num / den } else { 0.0 };
        let bound_constant = rows.iter().zip(&env).map(|(r, e)| r.residual.abs() / e).fold(0.0, f64::max);
        for (r, e) in rows.iter_mut().zip(&env) {
            r.envelope_value = fitted_constant * e;
        }
        ResidualReport { k, quantity, rows, fitted_constant, bound_constant, envelope_id: quantity.envelope_id().into() }
    }

    /// `None` below three rows.
    pub fn trend(&self) -> Option<TrendCheck> {
        let n = self.rows.len();
        if n < 3 {
            return None;
        }
        let ts: Vec<f64> = self.rows.iter().map(|r| r.t).collect();
        let abs: Vec<f64> = self.rows.iter().map(|r| r.residual.abs()).collect();
        let ratio: Vec<f64> = self.rows.iter().map(|r| r.residual.abs() / self.quantity.envelope(r.t)).collect();
        let rho = stats::spearman(&ts, &ratio);
        let logs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
        let (slope, se) = stats::ols_slope(&logs, &abs);
        let max = abs.iter().copied().fold(0.0, f64::max);
        Some(TrendCheck {
            spearman_rho: rho,
            spearman_p: stats::spearman_p_positive(rho, n),
            slope_vs_log_t: slope,
            slope_se: se,
            max_over_median: max / stats::median(&abs),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["T", "empirical", "main_term", "residual", "envelope_value"]).expect("in-memory write");
        for r in &self.rows {
            w.write_record([r.t, r.empirical, r.main_term, r.residual, r.envelope_value].map(sig12))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    match grid.iter().find(|&&t| !(t > 2.0 * TWO_PI && t + 0.5 <= T_MAX)) {
        Some(t) => Err(Error::Domain(format!("grid height {t} outside (4π, {}]", T_MAX - 0.5))),
        None => Ok(()),
    }
}

/// Height a scan must reach to serve [`residual_suite_from`] on `grid`.
pub fn scan_height(grid: &[f64]) -> f64 {
    grid.iter().copied().fold(f64::MIN, f64::max) + 0.5
}

/// COUNT, DIST_SUM (for `k ≥ 1`) and PROP6 reports over `grid`, from a
/// single scan. Each height is first moved off zero ordinates; all three
/// reports use the moved heights.
pub fn residual_suite(k: usize, grid: &[f64], ctx: &EvalContext) -> Result<Vec<ResidualReport>> {
    residual_suite_from(k, grid, &zeros_for_grid(k, grid, ctx)?, ctx)
}

/// [`residual_suite`] on zeros already located up to [`scan_height`].
pub fn residual_suite_from(k: usize, grid: &[f64], zeros: &[ZeroRecord], ctx: &EvalContext) -> Result<Vec<ResidualReport>> {
    check_grid(grid)?;
    let mut quantities = vec![Quantity::Count, Quantity::DistSum, Quantity::Prop6];
    if k == 0 {
        quantities.retain(|q| *q != Quantity::DistSum);
    }
    if grid.is_empty() {
        return Ok(quantities.into_iter().map(|q| ResidualReport::new(k, q, Vec::new())).collect());
    }
    let p6: Vec<Prop6Row> = grid.iter().map(|&t| prop6_row_from(k, t, zeros, ctx)).collect::<Result<_>>()?;
    let mut reports = Vec::new();
    for q in quantities {
        let rows = p6
            .iter()
            .map(|p| {
                let (empirical, main_term) = match q {
                    Quantity::Count => (p.n_k as f64, p.berndt),
                    Quantity::DistSum => (dist_sum_of(zeros, p.t), theorem1_main(k, p.t)?),
                    Quantity::Prop6 => (p.n_k as f64, p.n_k as f64 - p.residual),
                };
                Ok(ResidualRow { t: p.t, empirical, main_term, residual: empirical - main_term, envelope_value: 0.0 })
            })
            .collect::<Result<Vec<_>>>()?;
        reports.push(ResidualReport::new(k, q, rows));
    }
    Ok(reports)
}
