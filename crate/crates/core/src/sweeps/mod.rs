//! Parameter scans over χ, α and the basis angle γ, and crossover search.
//!
//! Every grid point is an independent task. Work is spread over a rayon pool
//! whose size can be capped with the `QMB_THREADS` environment variable;
//! results are always returned in grid order, so the output does not depend
//! on the worker count.

use std::f64::consts::FRAC_PI_4;

use log::{debug, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{ideal_channel, readout_channel, IdealVariant, Outcome, Snr, SuperOp};
use crate::linalg;
use crate::metrics::{diamond_distance, trace_norm, DiamondResult, DiamondStatus, DEFAULT_TOL};
use crate::spectrum::{mixing_angle, BasisAngle, SystemParams};
use crate::{Error, Result};

/// Golden-section refinement stops once the bracket is narrower than this (radians).
pub const GAMMA_TOL: f64 = 1e-4;

/// Relative bracket width at which the crossover bisection stops.
pub const CROSSOVER_REL_WIDTH: f64 = 1e-2;

/// Extra Fock levels used by the truncation spot check.
pub const TRUNCATION_PROBE: usize = 10;

/// Environment variable capping the number of sweep workers.
pub const THREADS_ENV: &str = "QMB_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Requested certificate width of every diamond distance.
    pub tol: f64,
    /// Construction of the non-bare reference measurements.
    pub variant: IdealVariant,
    /// Also evaluate outcome `-` and fail if it disagrees with `+`.
    pub check_outcomes: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            variant: IdealVariant::default(),
            check_outcomes: false,
        }
    }
}

/// The four reference measurements the readout channel is compared with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    /// Projective, bare basis.
    Bare,
    /// Projective, basis diagonalising the zero-photon Hamiltonian.
    Dressed,
    /// Projective, basis diagonalising the Hamiltonian at `n = α²`.
    Nalpha2,
    /// Finite signal-to-noise, basis at `n = α²`.
    Nalpha2Snr,
}

impl Reference {
    pub const ALL: [Reference; 4] = [
        Reference::Bare,
        Reference::Dressed,
        Reference::Nalpha2,
        Reference::Nalpha2Snr,
    ];

    /// Column suffix used in CSV output.
    pub fn name(self) -> &'static str {
        match self {
            Reference::Bare => "bare",
            Reference::Dressed => "dressed",
            Reference::Nalpha2 => "nalpha2",
            Reference::Nalpha2Snr => "nalpha2_snr",
        }
    }

    pub fn basis(self, params: &SystemParams) -> Result<BasisAngle> {
        match self {
            Reference::Bare => Ok(BasisAngle::BARE),
            Reference::Dressed => mixing_angle(params, 0.0),
            Reference::Nalpha2 | Reference::Nalpha2Snr => mixing_angle(params, params.alpha * params.alpha),
        }
    }

    pub fn snr(self) -> Snr {
        match self {
            Reference::Nalpha2Snr => Snr::Finite,
            _ => Snr::Perfect,
        }
    }
}

/// Reference channel in basis `gamma`. The bare basis has no finite `n(γ)`, so
/// it is always built with [`IdealVariant::Diagonal`], whatever `variant` says.
pub fn reference_at(
    params: &SystemParams,
    gamma: BasisAngle,
    x: Outcome,
    variant: IdealVariant,
    snr: Snr,
) -> Result<SuperOp> {
    let variant = if gamma.gamma() == 0.0 {
        IdealVariant::Diagonal
    } else {
        variant
    };
    ideal_channel(params, gamma, x, variant, snr)
}

pub fn reference_channel(
    params: &SystemParams,
    reference: Reference,
    x: Outcome,
    variant: IdealVariant,
) -> Result<SuperOp> {
    reference_at(params, reference.basis(params)?, x, variant, reference.snr())
}

/// One evaluated parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub chi: f64,
    pub alpha: f64,
    /// Basis angle of the reference, for rows of a γ scan.
    pub gamma: Option<f64>,
    pub d_bare: DiamondResult,
    pub d_dressed: DiamondResult,
    pub d_nalpha2: DiamondResult,
    pub d_nalpha2_snr: DiamondResult,
}

impl SweepRow {
    pub fn get(&self, reference: Reference) -> &DiamondResult {
        match reference {
            Reference::Bare => &self.d_bare,
            Reference::Dressed => &self.d_dressed,
            Reference::Nalpha2 => &self.d_nalpha2,
            Reference::Nalpha2Snr => &self.d_nalpha2_snr,
        }
    }

    pub fn any_failed(&self) -> bool {
        Reference::ALL
            .iter()
            .any(|r| self.get(*r).status == DiamondStatus::Failed)
    }
}

/// Size of the worker pool: `QMB_THREADS` if set to a positive integer,
/// otherwise rayon's default.
pub fn worker_count() -> usize {
    match std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        Some(n) if n > 0 => n,
        _ => rayon::current_num_threads(),
    }
}

/// Map `f` over `items` on a capped pool, preserving order.
fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    let threads = worker_count();
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
        Err(e) => {
            warn!("could not build a {threads}-thread pool ({e}); running serially");
            items.iter().map(f).collect()
        }
    }
}

fn distances_for_outcome(params: &SystemParams, x: Outcome, opts: &SweepOptions) -> Result<[DiamondResult; 4]> {
    let readout = readout_channel(params, x)?;
    let mut out = [None; 4];
    for (slot, reference) in out.iter_mut().zip(Reference::ALL) {
        let r = reference_channel(params, reference, x, opts.variant)?;
        *slot = Some(diamond_distance(&readout, &r, opts.tol)?);
    }
    Ok(out.map(|d| d.expect("every reference evaluated")))
}

/// True when the certified intervals of `a` and `b` are within `slack` of each other.
fn consistent(a: &DiamondResult, b: &DiamondResult, slack: f64) -> bool {
    a.lower_cert <= b.upper_cert + slack && b.lower_cert <= a.upper_cert + slack
}

/// All four reference distances at one parameter point, for outcome `+`.
pub fn evaluate(params: &SystemParams, opts: &SweepOptions) -> Result<SweepRow> {
    let d = distances_for_outcome(params, Outcome::Plus, opts)?;
    if opts.check_outcomes {
        let m = distances_for_outcome(params, Outcome::Minus, opts)?;
        for (k, reference) in Reference::ALL.iter().enumerate() {
            if !consistent(&d[k], &m[k], 1e-8) {
                return Err(Error::OutcomeAsymmetry {
                    reference: reference.name(),
                    plus: d[k].value,
                    minus: m[k].value,
                });
            }
        }
    }
    for (k, reference) in Reference::ALL.iter().enumerate() {
        if d[k].status != DiamondStatus::Converged {
            debug!(
                "chi = {}, alpha = {}: {} distance {}",
                params.chi,
                params.alpha,
                reference.name(),
                d[k].status.as_str()
            );
        }
    }
    Ok(SweepRow {
        chi: params.chi,
        alpha: params.alpha,
        gamma: None,
        d_bare: d[0],
        d_dressed: d[1],
        d_nalpha2: d[2],
        d_nalpha2_snr: d[3],
    })
}

/// Distances at every `chi` in the grid, other parameters from `template`.
pub fn sweep_chi(template: &SystemParams, chi_grid: &[f64], opts: &SweepOptions) -> Result<Vec<SweepRow>> {
    let points = chi_grid
        .iter()
        .map(|&chi| {
            let p = template.with_chi(chi);
            p.validate().map(|_| p)
        })
        .collect::<Result<Vec<_>>>()?;
    par_map(&points, |p| evaluate(p, opts)).into_iter().collect()
}

/// Distances at every probe amplitude in the grid, other parameters from `template`.
pub fn sweep_alpha(template: &SystemParams, alpha_grid: &[f64], opts: &SweepOptions) -> Result<Vec<SweepRow>> {
    let points = alpha_grid
        .iter()
        .map(|&alpha| {
            let p = template.with_alpha(alpha);
            p.validate().map(|_| p)
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(p) = points.iter().find(|p| !p.truncation_ok()) {
        warn!(
            "n_max = {} is below the recommended {} from alpha = {} on",
            p.n_max,
            SystemParams::recommended_n_max(p.alpha),
            p.alpha
        );
    }
    par_map(&points, |p| evaluate(p, opts)).into_iter().collect()
}

/// Distance between the readout channel and the projective reference in basis `gamma`.
pub fn distance_at_gamma(params: &SystemParams, gamma: f64, opts: &SweepOptions) -> Result<DiamondResult> {
    let basis = BasisAngle::new(gamma)?;
    let readout = readout_channel(params, Outcome::Plus)?;
    distance_to(&readout, params, basis, opts)
}

fn distance_to(readout: &SuperOp, params: &SystemParams, basis: BasisAngle, opts: &SweepOptions) -> Result<DiamondResult> {
    let r = reference_at(params, basis, Outcome::Plus, opts.variant, Snr::Perfect)?;
    diamond_distance(readout, &r, opts.tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaPoint {
    pub gamma: f64,
    pub distance: DiamondResult,
}

/// γ landscape at one χ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaSlice {
    pub chi: f64,
    pub alpha: f64,
    /// Dressed angle `γ₀`.
    pub gamma0: f64,
    /// Angle diagonalising the Hamiltonian at `n = α²`.
    pub gamma_nalpha2: f64,
    /// Projective distance in the `n = α²` basis.
    pub d_nalpha2: DiamondResult,
    pub points: Vec<GammaPoint>,
    pub grid_argmin: f64,
    pub grid_min: f64,
    pub argmin: f64,
    pub min_distance: f64,
    /// Several grid points lie within the certificate width of the minimum;
    /// the one with the smallest `|γ|` was taken.
    pub tie: bool,
    /// Negative χ: the scan covers the whole `[-π/4, π/4]` and is not validated.
    pub experimental: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaScan {
    pub slices: Vec<GammaSlice>,
}

/// Basis angles scanned at `params.chi`: `points` equally spaced values between
/// the bare basis and the dressed basis `γ₀` for χ > 0, the full
/// `[-π/4, π/4]` for χ < 0.
pub fn gamma_grid(params: &SystemParams, points: usize) -> Result<Vec<f64>> {
    if points < 3 {
        return Err(Error::InvalidParameter(format!("gamma grid needs at least 3 points, got {points}")));
    }
    let (a, b) = if params.chi > 0.0 {
        let g0 = mixing_angle(params, 0.0)?.gamma();
        if g0 == 0.0 {
            return Err(Error::InvalidParameter("dressed and bare bases coincide (J = 0)".into()));
        }
        (g0.min(0.0), g0.max(0.0))
    } else {
        (-FRAC_PI_4, FRAC_PI_4)
    };
    let step = (b - a) / (points - 1) as f64;
    Ok((0..points)
        .map(|k| if k == points - 1 { b } else { a + k as f64 * step })
        .collect())
}

/// Golden-section search of `f` on `[a, b]` down to width `tol`; returns the
/// best point evaluated.
fn golden_section<F>(mut a: f64, mut b: f64, tol: f64, f: F) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
        for (x, v) in [(c, fc), (d, fd)] {
            if v < best.1 {
                best = (x, v);
            }
        }
    }
    Ok(best)
}

/// For every χ: distance on a γ grid, grid minimum, and a golden-section
/// refinement on the bracket around it.
pub fn scan_gamma_chi(
    template: &SystemParams,
    chi_grid: &[f64],
    gamma_points: usize,
    opts: &SweepOptions,
) -> Result<GammaScan> {
    let mut tasks = Vec::new();
    let mut grids = Vec::with_capacity(chi_grid.len());
    for &chi in chi_grid {
        let p = template.with_chi(chi);
        p.validate()?;
        let grid = gamma_grid(&p, gamma_points)?;
        if chi < 0.0 {
            warn!("gamma scan at chi = {chi} < 0 is experimental");
        }
        for &g in &grid {
            tasks.push((p, g));
        }
        grids.push((p, grid));
    }
    let values = par_map(&tasks, |(p, g)| distance_at_gamma(p, *g, opts))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let mut offset = 0;
    let mut staged = Vec::with_capacity(grids.len());
    for (p, grid) in grids {
        let points: Vec<GammaPoint> = grid
            .iter()
            .zip(&values[offset..offset + grid.len()])
            .map(|(&gamma, &distance)| GammaPoint { gamma, distance })
            .collect();
        offset += grid.len();
        staged.push((p, points));
    }

    let slices = par_map(&staged, |(p, points)| refine_slice(p, points.clone(), opts))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(GammaScan { slices })
}

fn refine_slice(p: &SystemParams, points: Vec<GammaPoint>, opts: &SweepOptions) -> Result<GammaSlice> {
    let min_value = points
        .iter()
        .map(|q| q.distance.value)
        .fold(f64::INFINITY, f64::min);
    let near: Vec<usize> = (0..points.len())
        .filter(|&k| points[k].distance.value <= min_value + opts.tol)
        .collect();
    let k = *near
        .iter()
        .min_by(|&&a, &&b| points[a].gamma.abs().total_cmp(&points[b].gamma.abs()))
        .expect("grid is not empty");
    let tie = near.len() > 1;
    let grid_argmin = points[k].gamma;
    let grid_min = points[k].distance.value;

    let lo = points[k.saturating_sub(1)].gamma;
    let hi = points[(k + 1).min(points.len() - 1)].gamma;
    let readout = readout_channel(p, Outcome::Plus)?;
    let (g_ref, d_ref) = golden_section(lo, hi, GAMMA_TOL, |g| {
        Ok(distance_to(&readout, p, BasisAngle::new(g)?, opts)?.value)
    })?;
    let (argmin, min_distance) = if d_ref < grid_min {
        (g_ref, d_ref)
    } else {
        (grid_argmin, grid_min)
    };

    let gamma_nalpha2 = Reference::Nalpha2.basis(p)?;
    let d_nalpha2 = distance_to(&readout, p, gamma_nalpha2, opts)?;
    Ok(GammaSlice {
        chi: p.chi,
        alpha: p.alpha,
        gamma0: mixing_angle(p, 0.0)?.gamma(),
        gamma_nalpha2: gamma_nalpha2.gamma(),
        d_nalpha2,
        points,
        grid_argmin,
        grid_min,
        argmin,
        min_distance,
        tie,
        experimental: p.chi < 0.0,
    })
}

/// Swept parameter of [`find_crossover`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Chi,
    Alpha,
}

impl Axis {
    fn apply(self, template: &SystemParams, value: f64) -> SystemParams {
        match self {
            Axis::Chi => template.with_chi(value),
            Axis::Alpha => template.with_alpha(value),
        }
    }
}

/// `d_bare - d_dressed` at one point of the axis.
pub fn bare_minus_dressed(template: &SystemParams, axis: Axis, value: f64, opts: &SweepOptions) -> Result<f64> {
    let p = axis.apply(template, value);
    p.validate()?;
    let readout = readout_channel(&p, Outcome::Plus)?;
    let d = |r: Reference| -> Result<f64> {
        let c = reference_channel(&p, r, Outcome::Plus, opts.variant)?;
        Ok(diamond_distance(&readout, &c, opts.tol)?.value)
    };
    Ok(d(Reference::Bare)? - d(Reference::Dressed)?)
}

/// Point where the bare and dressed references are equally good, by bisection
/// on the sign of `d_bare - d_dressed` at geometric midpoints until the
/// bracket's relative width is below [`CROSSOVER_REL_WIDTH`].
///
/// Both ends of `bracket` must be nonzero and of equal sign.
pub fn find_crossover(template: &SystemParams, axis: Axis, bracket: (f64, f64), opts: &SweepOptions) -> Result<f64> {
    let (mut lo, mut hi) = bracket;
    if !(lo.is_finite() && hi.is_finite()) || lo * hi <= 0.0 || lo == hi {
        return Err(Error::InvalidParameter(format!(
            "crossover bracket [{lo}, {hi}] must be finite, distinct, nonzero and of one sign"
        )));
    }
    if lo.abs() > hi.abs() {
        std::mem::swap(&mut lo, &mut hi);
    }
    let sign = lo.signum();
    let mut f_lo = bare_minus_dressed(template, axis, lo, opts)?;
    let f_hi = bare_minus_dressed(template, axis, hi, opts)?;
    let no_change = (f_lo == 0.0 && f_hi == 0.0) || (f_lo > 0.0 && f_hi > 0.0) || (f_lo < 0.0 && f_hi < 0.0);
    if no_change {
        return Err(Error::NoSignChange { lo, hi, f_lo, f_hi });
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    while hi / lo > 1.0 + CROSSOVER_REL_WIDTH {
        let mid = sign * (lo * hi).sqrt();
        let f_mid = bare_minus_dressed(template, axis, mid, opts)?;
        debug!("crossover bisection: f({mid}) = {f_mid:.6e}");
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(sign * (lo * hi).sqrt())
}

/// Upper bound on how much any diamond distance at `params` can move when the
/// Fock truncation is raised by [`TRUNCATION_PROBE`]: the Choi-matrix trace
/// norm of the change in the readout channel.
pub fn truncation_shift(params: &SystemParams) -> Result<f64> {
    let base = readout_channel(params, Outcome::Plus)?;
    let more = readout_channel(&params.with_n_max(params.n_max + TRUNCATION_PROBE), Outcome::Plus)?;
    trace_norm(&linalg::hermitian_part(&(base.choi() - more.choi())))
}

/// `count` log-spaced values from `10^lo_exp` to `10^hi_exp`, both included.
pub fn log_grid(lo_exp: f64, hi_exp: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![10f64.powf(lo_exp)],
        _ => (0..count)
            .map(|k| 10f64.powf(lo_exp + (hi_exp - lo_exp) * k as f64 / (count - 1) as f64))
            .collect(),
    }
}

/// Default χ grid of the χ sweep: `10^-0.5 … 10^3` at 13 points per decade.
pub fn default_chi_grid() -> Vec<f64> {
    log_grid(-0.5, 3.0, (3.5f64 * 13.0).ceil() as usize + 1)
}

/// Default χ grid of the γ scan: `10^0 … 10^3` at 6 points per decade.
pub fn default_scan_chi_grid() -> Vec<f64> {
    log_grid(0.0, 3.0, 19)
}

pub const DEFAULT_GAMMA_POINTS: usize = 41;

/// Default amplitude grid of the α sweep: `0, 0.125, …, 3`. The upper end is
/// the largest α for which the preset truncation `n_max = 40` still meets
/// the recommended `α² + 6α + 10`.
pub fn default_alpha_grid() -> Vec<f64> {
    (0..=24).map(|k| 0.125 * k as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (x, v) = golden_section(-1.0, 2.0, 1e-6, |x| Ok((x - 0.3) * (x - 0.3) + 1.0)).unwrap();
        assert!((x - 0.3).abs() < 1e-6);
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grids() {
        let g = default_chi_grid();
        assert_eq!(g.len(), 47);
        assert!((g[0] - 10f64.powf(-0.5)).abs() < 1e-15);
        assert!((g[46] - 1000.0).abs() < 1e-9);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        let p = SystemParams::fig2(5.0);
        let gg = gamma_grid(&p, 11).unwrap();
        assert_eq!(gg[0], 0.0);
        assert_eq!(gg[10], mixing_angle(&p, 0.0).unwrap().gamma());
        let neg = gamma_grid(&p.with_chi(-5.0), 5).unwrap();
        assert_eq!((neg[0], neg[4]), (-FRAC_PI_4, FRAC_PI_4));
        assert!(gamma_grid(&p, 2).is_err());
    }

    #[test]
    fn crossover_rejects_bad_brackets() {
        let p = SystemParams::fig2(5.0);
        let o = SweepOptions::default();
        assert!(find_crossover(&p, Axis::Chi, (-1.0, 5.0), &o).is_err());
        assert!(find_crossover(&p, Axis::Chi, (3.0, 3.0), &o).is_err());
    }

    #[test]
    fn bare_reference_ignores_literal_variant() {
        let p = SystemParams::fig2(5.0);
        let a = reference_channel(&p, Reference::Bare, Outcome::Plus, IdealVariant::Literal).unwrap();
        let b = reference_channel(&p, Reference::Bare, Outcome::Plus, IdealVariant::Diagonal).unwrap();
        assert_eq!(a.choi(), b.choi());
    }
}
