//! Parameter-space drivers: feasibility boundaries, regions, entanglement
//! landscapes and the search for the best carrier measurement.
//!
//! Every grid point is evaluated independently on the rayon pool and
//! results are collected in grid order, so output does not depend on the
//! number of workers.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matcore::CMatrix;
use crate::protocol::{
    initial_ab_entanglement, measured_negativity, screen, screen_decoding, screen_encoding, trace_out_entanglement,
    MeasurementSpec, ProtocolParams,
};
use crate::simplex::{self, SimplexOptions};
use crate::states::{DensityMatrix, MixtureWeight};

pub const DEFAULT_BISECT_TOL: f64 = 5e-4;
pub const DEFAULT_HI_GAMMA_AC: f64 = 0.5;
pub const DEFAULT_HI_GAMMA_BC: f64 = 2.0;

/// How many times the upper bracket may double before giving up.
const MAX_BRACKET_DOUBLINGS: usize = 6;

/// A protocol knob that a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepParam {
    GammaAc,
    GammaBc,
    BetaAc,
    BetaBc,
    TAc,
    TBc,
    P,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::GammaAc => "gamma_ac",
            SweepParam::GammaBc => "gamma_bc",
            SweepParam::BetaAc => "beta_ac",
            SweepParam::BetaBc => "beta_bc",
            SweepParam::TAc => "t_ac",
            SweepParam::TBc => "t_bc",
            SweepParam::P => "p",
        }
    }

    pub fn apply(self, params: &ProtocolParams, value: f64) -> Result<ProtocolParams> {
        let mut out = *params;
        match self {
            SweepParam::GammaAc => out.encoding.gamma = value,
            SweepParam::GammaBc => out.decoding.gamma = value,
            SweepParam::BetaAc => out.encoding.beta = value,
            SweepParam::BetaBc => out.decoding.beta = value,
            SweepParam::TAc => out.encoding.duration = value,
            SweepParam::TBc => out.decoding.duration = value,
            SweepParam::P => out.p = MixtureWeight::new(value)?,
        }
        Ok(out)
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "gamma_ac" => SweepParam::GammaAc,
            "gamma_bc" => SweepParam::GammaBc,
            "beta_ac" => SweepParam::BetaAc,
            "beta_bc" => SweepParam::BetaBc,
            "t_ac" => SweepParam::TAc,
            "t_bc" => SweepParam::TBc,
            "p" => SweepParam::P,
            other => return Err(Error::InvalidParams(format!("unknown sweep parameter `{other}`"))),
        })
    }
}

/// Evenly spaced values of one parameter, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridAxis {
    pub param: SweepParam,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl GridAxis {
    pub fn new(param: SweepParam, min: f64, max: f64, count: usize) -> Result<Self> {
        if !(min < max) || count < 2 || !min.is_finite() || !max.is_finite() {
            return Err(Error::InvalidParams(format!(
                "axis {param} needs min < max and at least 2 points (got {min}:{max}:{count})"
            )));
        }
        Ok(Self { param, min, max, count })
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            return self.max;
        }
        self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }
}

/// One or two axes; two-axis grids are traversed with the first axis outermost.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    axes: Vec<GridAxis>,
}

impl GridSpec {
    pub fn one(axis: GridAxis) -> Self {
        Self { axes: vec![axis] }
    }

    pub fn two(x: GridAxis, y: GridAxis) -> Result<Self> {
        if x.param == y.param {
            return Err(Error::InvalidParams(format!("both axes vary {}", x.param)));
        }
        Ok(Self { axes: vec![x, y] })
    }

    pub fn axes(&self) -> &[GridAxis] {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinates of every point, in traversal order.
    pub fn points(&self) -> Vec<Vec<f64>> {
        match self.axes.as_slice() {
            [x] => x.values().into_iter().map(|v| vec![v]).collect(),
            [x, y] => x.values().into_iter().flat_map(|a| y.values().into_iter().map(move |b| vec![a, b])).collect(),
            _ => unreachable!("grids have one or two axes"),
        }
    }

    fn apply(&self, base: &ProtocolParams, coords: &[f64]) -> Result<ProtocolParams> {
        self.axes.iter().zip(coords).try_fold(*base, |p, (axis, &v)| axis.param.apply(&p, v))
    }

    fn require_two_of(&self, allowed: &[SweepParam]) -> Result<()> {
        if self.axes.len() != 2 || !self.axes.iter().all(|a| allowed.contains(&a.param)) {
            return Err(Error::InvalidParams(format!(
                "expected two axes drawn from {allowed:?}, got {:?}",
                self.axes.iter().map(|a| a.param).collect::<Vec<_>>()
            )));
        }
        Ok(())
    }
}

/// Which incoherent strength a boundary search varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaTarget {
    GammaAc,
    GammaBc,
}

/// Which part of the protocol must keep the carrier separable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    EncodingOnly,
    FullProtocol,
}

/// Feasibility as a function of the target strength, with the parts that do
/// not depend on it computed once.
struct FeasibilityOracle {
    base: ProtocolParams,
    target: GammaTarget,
    scope: Scope,
    /// Post-encoding state when the target only affects decoding.
    after_encoding: Option<std::result::Result<CMatrix, f64>>,
}

impl FeasibilityOracle {
    fn new(base: &ProtocolParams, target: GammaTarget, scope: Scope) -> Result<Self> {
        base.validate()?;
        if scope == Scope::EncodingOnly && target == GammaTarget::GammaBc {
            return Err(Error::InvalidParams("gamma_bc does not act during encoding".into()));
        }
        let after_encoding = match target {
            GammaTarget::GammaBc => Some(screen_encoding(base)?),
            GammaTarget::GammaAc => None,
        };
        Ok(Self { base: *base, target, scope, after_encoding })
    }

    /// Negativity at the first violation, or `None` if feasible.
    fn violation(&self, gamma: f64) -> Result<Option<f64>> {
        let mut params = self.base;
        match self.target {
            GammaTarget::GammaAc => params.encoding.gamma = gamma,
            GammaTarget::GammaBc => params.decoding.gamma = gamma,
        }
        match (&self.after_encoding, self.scope) {
            (Some(Err(v)), _) => Ok(Some(*v)),
            (Some(Ok(rho)), _) => Ok(screen_decoding(&params, rho)?.err()),
            (None, Scope::EncodingOnly) => Ok(screen_encoding(&params)?.err()),
            (None, Scope::FullProtocol) => Ok(screen(&params)?.violation),
        }
    }

    fn feasible(&self, gamma: f64) -> Result<bool> {
        Ok(self.violation(gamma)?.is_none())
    }
}

/// Largest feasible value of the target strength, holding everything else
/// fixed, to within `tol`.
///
/// The bracket starts at `[0, hi_start]` and doubles while `hi` is still
/// feasible. Monotonicity in the target is assumed; after bisection the
/// points `b + 2·tol`, and a quarter and half of the way to the initial
/// infeasible bracket, are re-checked and must all be infeasible.
pub fn max_feasible_gamma(base: &ProtocolParams, target: GammaTarget, hi_start: f64, tol: f64) -> Result<f64> {
    bisect(&FeasibilityOracle::new(base, target, Scope::FullProtocol)?, hi_start, tol)
}

/// As [`max_feasible_gamma`], with the separability constraint limited to `scope`.
pub fn max_feasible_gamma_in(
    base: &ProtocolParams,
    target: GammaTarget,
    scope: Scope,
    hi_start: f64,
    tol: f64,
) -> Result<f64> {
    bisect(&FeasibilityOracle::new(base, target, scope)?, hi_start, tol)
}

fn bisect(oracle: &FeasibilityOracle, hi_start: f64, tol: f64) -> Result<f64> {
    if !(hi_start > 0.0) || !(tol > 0.0) {
        return Err(Error::InvalidParams(format!("need hi_start > 0 and tol > 0 (got {hi_start}, {tol})")));
    }
    if let Some(v) = oracle.violation(0.0)? {
        return Err(Error::BaseInfeasible(v));
    }
    let mut lo = 0.0;
    let mut hi = hi_start;
    let mut doublings = 0;
    while oracle.feasible(hi)? {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > MAX_BRACKET_DOUBLINGS {
            return Err(Error::NoUpperBound(lo));
        }
    }
    let bracket = hi;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if oracle.feasible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let span = bracket - lo;
    for probe in [lo + 2.0 * tol, lo + 0.25 * span, lo + 0.5 * span] {
        if probe > lo + tol && oracle.feasible(probe)? {
            return Err(Error::MonotonicityViolation { boundary: lo, probe });
        }
    }
    Ok(lo)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryResult {
    pub abscissa: Vec<f64>,
    pub max_gamma: Vec<f64>,
    pub tol: f64,
}

fn par_try_map<T: Send, U: Send>(items: Vec<T>, f: impl Fn(T) -> Result<U> + Sync + Send) -> Result<Vec<U>> {
    items.into_par_iter().map(f).collect()
}

/// Largest `γ_AC` keeping `C|AB` separable during encoding, per encoding duration.
pub fn gamma_ac_vs_time(base: &ProtocolParams, t_ac: &GridAxis, hi_start: f64, tol: f64) -> Result<BoundaryResult> {
    if t_ac.param != SweepParam::TAc || !(t_ac.min > 0.0) {
        return Err(Error::InvalidParams("the time axis must be t_ac with positive values".into()));
    }
    let abscissa = t_ac.values();
    let max_gamma = par_try_map(abscissa.clone(), |t| {
        let params = SweepParam::TAc.apply(base, t)?;
        max_feasible_gamma_in(&params, GammaTarget::GammaAc, Scope::EncodingOnly, hi_start, tol)
    })?;
    Ok(BoundaryResult { abscissa, max_gamma, tol })
}

/// Boundary of the feasible `(γ_AC, γ_BC)` region for one initial weight.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionCurve {
    pub p: f64,
    pub gamma_ac: Vec<f64>,
    /// Largest feasible `γ_BC` per `γ_AC`; `None` when no `γ_BC` works.
    pub max_gamma_bc: Vec<Option<f64>>,
}

impl RegionCurve {
    /// Trapezoidal area under the boundary, counting infeasible columns as zero.
    pub fn area(&self) -> f64 {
        let h: Vec<f64> = self.max_gamma_bc.iter().map(|v| v.unwrap_or(0.0)).collect();
        self.gamma_ac.windows(2).zip(h.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
    }

    /// Largest grid `γ_AC` that admits any `γ_BC`.
    pub fn max_gamma_ac(&self) -> Option<f64> {
        self.gamma_ac.iter().zip(&self.max_gamma_bc).rev().find(|(_, b)| b.is_some()).map(|(a, _)| *a)
    }
}

/// For each `p` and each `γ_AC` on the axis, the largest feasible `γ_BC`.
pub fn feasibility_region(
    base: &ProtocolParams,
    p_values: &[f64],
    gamma_ac: &GridAxis,
    hi_start: f64,
    tol: f64,
) -> Result<Vec<RegionCurve>> {
    if gamma_ac.param != SweepParam::GammaAc {
        return Err(Error::InvalidParams("feasibility regions are swept over gamma_ac".into()));
    }
    let xs = gamma_ac.values();
    let jobs: Vec<(f64, f64)> = p_values.iter().flat_map(|&p| xs.iter().map(move |&g| (p, g))).collect();
    let cells = par_try_map(jobs, |(p, g)| {
        let params = base.with_p(p)?.with_gammas(g, 0.0);
        match max_feasible_gamma(&params, GammaTarget::GammaBc, hi_start, tol) {
            Ok(b) => Ok(Some(b)),
            Err(Error::BaseInfeasible(_)) => Ok(None),
            Err(e) => Err(e),
        }
    })?;
    Ok(p_values
        .iter()
        .zip(cells.chunks(xs.len()))
        .map(|(&p, chunk)| RegionCurve { p, gamma_ac: xs.clone(), max_gamma_bc: chunk.to_vec() })
        .collect())
}

/// How `A|B` entanglement is read out after decoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extraction {
    /// Discard the carrier.
    TraceOut,
    /// Measure the carrier in `{|0⟩, |1⟩}` and keep outcome `|0⟩`.
    StandardBasis,
    /// Best rank-one projective measurement on the carrier.
    Optimal,
}

impl Extraction {
    pub fn name(self) -> &'static str {
        match self {
            Extraction::TraceOut => "trace_out",
            Extraction::StandardBasis => "standard",
            Extraction::Optimal => "optimal",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandscapePoint {
    pub x: f64,
    pub y: f64,
    /// `γ_BC` actually used at this point.
    pub gamma_bc: f64,
    pub feasible: bool,
    pub e_ab: Option<f64>,
    pub gain: Option<f64>,
    pub theta: Option<f64>,
    pub phi: Option<f64>,
    /// Why `e_ab` is missing, when it is.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Landscape {
    pub x_param: SweepParam,
    pub y_param: SweepParam,
    pub extraction: Extraction,
    pub e_ab_initial: f64,
    pub points: Vec<LandscapePoint>,
}

impl Landscape {
    pub fn feasible_points(&self) -> impl Iterator<Item = &LandscapePoint> {
        self.points.iter().filter(|p| p.feasible && p.e_ab.is_some())
    }

    /// Feasible point with the largest `e_ab`.
    pub fn max_point(&self) -> Option<&LandscapePoint> {
        self.feasible_points().max_by(|a, b| a.e_ab.unwrap().total_cmp(&b.e_ab.unwrap()))
    }

    /// Feasible point with the smallest `e_ab`.
    pub fn min_point(&self) -> Option<&LandscapePoint> {
        self.feasible_points().min_by(|a, b| a.e_ab.unwrap().total_cmp(&b.e_ab.unwrap()))
    }

    pub fn at(&self, x: f64, y: f64) -> Option<&LandscapePoint> {
        self.points.iter().find(|p| (p.x - x).abs() < 1e-12 && (p.y - y).abs() < 1e-12)
    }
}

fn extract(state: &DensityMatrix, extraction: Extraction) -> (Option<f64>, Option<(f64, f64)>, Option<String>) {
    match extraction {
        Extraction::TraceOut => (Some(trace_out_entanglement(state)), None, None),
        Extraction::StandardBasis => match measured_negativity(state.matrix(), MeasurementSpec::STANDARD) {
            (_, Some(e)) => (Some(e), Some((0.0, 0.0)), None),
            (prob, None) => (None, None, Some(format!("zero probability ({prob:.1e})"))),
        },
        Extraction::Optimal => {
            let best = optimize_measurement(state);
            (Some(best.e_star), Some((best.theta_star, best.phi_star)), None)
        }
    }
}

fn blank_point(x: f64, y: f64, gamma_bc: f64, feasible: bool, note: Option<String>) -> LandscapePoint {
    LandscapePoint { x, y, gamma_bc, feasible, e_ab: None, gain: None, theta: None, phi: None, note }
}

/// Screens one parameter set and applies every extraction to the result.
fn landscape_points(
    params: &ProtocolParams,
    x: f64,
    y: f64,
    extractions: &[Extraction],
    e0: f64,
) -> Result<Vec<LandscapePoint>> {
    let s = screen(params)?;
    let gamma_bc = params.decoding.gamma;
    let state = match (s.violation, s.state_after_decoding) {
        (None, Some(state)) => state,
        _ => {
            let p = blank_point(x, y, gamma_bc, false, Some("carrier entangled with AB".into()));
            return Ok(vec![p; extractions.len()]);
        }
    };
    Ok(extractions
        .iter()
        .map(|&extraction| {
            let (e, angles, note) = extract(&state, extraction);
            LandscapePoint {
                e_ab: e,
                gain: e.map(|e| e - e0),
                theta: angles.map(|a| a.0),
                phi: angles.map(|a| a.1),
                ..blank_point(x, y, gamma_bc, true, note)
            }
        })
        .collect())
}

/// Splits per-point results into one landscape per extraction.
fn assemble(
    x_param: SweepParam,
    y_param: SweepParam,
    extractions: &[Extraction],
    e0: f64,
    per_point: Vec<Vec<LandscapePoint>>,
) -> Vec<Landscape> {
    let mut out: Vec<Landscape> = extractions
        .iter()
        .map(|&extraction| Landscape {
            x_param,
            y_param,
            extraction,
            e_ab_initial: e0,
            points: Vec::with_capacity(per_point.len()),
        })
        .collect();
    for row in per_point {
        for (landscape, point) in out.iter_mut().zip(row) {
            landscape.points.push(point);
        }
    }
    out
}

/// Extracted `E_{A|B}` over a two-parameter grid. Infeasible points are kept
/// with `feasible = false` and no `e_ab`.
pub fn entanglement_landscape(base: &ProtocolParams, grid: &GridSpec, extraction: Extraction) -> Result<Landscape> {
    Ok(entanglement_landscapes(base, grid, &[extraction])?.remove(0))
}

/// As [`entanglement_landscape`] for several extractions, sharing one
/// protocol run per grid point.
pub fn entanglement_landscapes(
    base: &ProtocolParams,
    grid: &GridSpec,
    extractions: &[Extraction],
) -> Result<Vec<Landscape>> {
    use SweepParam::*;
    grid.require_two_of(&[GammaAc, GammaBc, BetaAc, BetaBc])?;
    base.validate()?;
    let e0 = initial_ab_entanglement(base.p);
    let per_point = par_try_map(grid.points(), |xy| {
        let params = grid.apply(base, &xy)?;
        landscape_points(&params, xy[0], xy[1], extractions, e0)
    })?;
    Ok(assemble(grid.axes[0].param, grid.axes[1].param, extractions, e0, per_point))
}

/// Landscape with `γ_BC` set at each point to the largest value that keeps
/// the protocol feasible.
///
/// Axes are drawn from `γ_AC`, `β_AC`, `β_BC`. With a single axis the
/// result traces the boundary curve: `y` is the boundary `γ_BC` and
/// `y_param` is [`SweepParam::GammaBc`].
pub fn boundary_landscape(
    base: &ProtocolParams,
    grid: &GridSpec,
    extraction: Extraction,
    hi_start: f64,
    tol: f64,
) -> Result<Landscape> {
    Ok(boundary_landscapes(base, grid, &[extraction], hi_start, tol)?.remove(0))
}

/// As [`boundary_landscape`] for several extractions, sharing one bisection
/// per grid point.
pub fn boundary_landscapes(
    base: &ProtocolParams,
    grid: &GridSpec,
    extractions: &[Extraction],
    hi_start: f64,
    tol: f64,
) -> Result<Vec<Landscape>> {
    use SweepParam::*;
    let allowed = [GammaAc, BetaAc, BetaBc];
    if !grid.axes.iter().all(|a| allowed.contains(&a.param)) {
        return Err(Error::InvalidParams(format!("boundary landscapes vary only {allowed:?}")));
    }
    base.validate()?;
    let e0 = initial_ab_entanglement(base.p);
    let one_axis = grid.axes.len() == 1;
    let per_point = par_try_map(grid.points(), |coords| {
        let params = grid.apply(base, &coords)?;
        match max_feasible_gamma(&params, GammaTarget::GammaBc, hi_start, tol) {
            Ok(g) => {
                let y = if one_axis { g } else { coords[1] };
                landscape_points(&params.with_gammas(params.encoding.gamma, g), coords[0], y, extractions, e0)
            }
            Err(e @ (Error::BaseInfeasible(_) | Error::NoUpperBound(_) | Error::MonotonicityViolation { .. })) => {
                let y = if one_axis { f64::NAN } else { coords[1] };
                Ok(vec![blank_point(coords[0], y, f64::NAN, false, Some(e.to_string())); extractions.len()])
            }
            Err(e) => Err(e),
        }
    })?;
    let y_param = if one_axis { GammaBc } else { grid.axes[1].param };
    Ok(assemble(grid.axes[0].param, y_param, extractions, e0, per_point))
}

/// Boundary `γ_BC` at every point of a grid over `γ_AC`, `β_AC`, `β_BC`.
pub fn gamma_bc_boundary_map(
    base: &ProtocolParams,
    grid: &GridSpec,
    hi_start: f64,
    tol: f64,
) -> Result<Vec<Result<f64>>> {
    use SweepParam::*;
    let allowed = [GammaAc, BetaAc, BetaBc];
    if !grid.axes.iter().all(|a| allowed.contains(&a.param)) {
        return Err(Error::InvalidParams(format!("boundary maps vary only {allowed:?}")));
    }
    Ok(grid
        .points()
        .into_par_iter()
        .map(|coords| {
            grid.apply(base, &coords).and_then(|p| max_feasible_gamma(&p, GammaTarget::GammaBc, hi_start, tol))
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSearch {
    pub theta_points: usize,
    pub phi_points: usize,
    pub refine: SimplexOptions,
}

impl Default for MeasurementSearch {
    fn default() -> Self {
        Self { theta_points: 64, phi_points: 64, refine: SimplexOptions::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalMeasurement {
    pub theta_star: f64,
    pub phi_star: f64,
    pub e_star: f64,
}

/// Post-selected `E_{A|B}`, scoring unusable outcomes as `-∞`.
fn score(rho: &CMatrix, m: MeasurementSpec) -> f64 {
    measured_negativity(rho, m).1.unwrap_or(f64::NEG_INFINITY)
}

/// Best carrier projector: a 64×64 grid over `[0, π/2] × [0, 2π)`, then a
/// simplex refinement from the best cell.
pub fn optimize_measurement(state: &DensityMatrix) -> OptimalMeasurement {
    optimize_measurement_with(state, &MeasurementSearch::default())
}

pub fn optimize_measurement_with(state: &DensityMatrix, search: &MeasurementSearch) -> OptimalMeasurement {
    let rho = state.matrix();
    let nt = search.theta_points.max(2);
    let np = search.phi_points.max(1);
    let dtheta = FRAC_PI_2 / (nt - 1) as f64;
    let dphi = TAU / np as f64;

    let mut best = (f64::NEG_INFINITY, MeasurementSpec::STANDARD);
    for i in 0..nt {
        let theta = if i + 1 == nt { FRAC_PI_2 } else { i as f64 * dtheta };
        for j in 0..np {
            let m = MeasurementSpec::canonical(theta, j as f64 * dphi);
            let e = score(rho, m);
            if e > best.0 {
                best = (e, m);
            }
        }
    }

    let start = [best.1.theta(), best.1.phi()];
    let refined = simplex::minimize(
        |[t, p]| -score(rho, MeasurementSpec::canonical(t, p)),
        start,
        [0.5 * dtheta, 0.5 * dphi],
        search.refine,
    );
    if -refined.value > best.0 {
        best = (-refined.value, MeasurementSpec::canonical(refined.x[0], refined.x[1]));
    }
    OptimalMeasurement { theta_star: best.1.theta(), phi_star: best.1.phi(), e_star: best.0 }
}

/// Post-selected `E_{A|B}` on a regular `(θ, φ)` grid; `None` marks
/// outcomes with negligible probability.
pub fn measurement_map(
    state: &DensityMatrix,
    theta_points: usize,
    phi_points: usize,
) -> Result<Vec<(f64, f64, Option<f64>)>> {
    let theta = GridAxis::new(SweepParam::P, 0.0, FRAC_PI_2, theta_points)?;
    let phi = GridAxis::new(SweepParam::P, 0.0, TAU, phi_points)?;
    let mut out = Vec::with_capacity(theta_points * phi_points);
    for t in theta.values() {
        for p in phi.values() {
            let e = measured_negativity(state.matrix(), MeasurementSpec::canonical(t, p)).1;
            out.push((t, p, e));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapPoint {
    pub x: f64,
    pub y: f64,
    pub feasible: bool,
    pub e_star: Option<f64>,
    pub theta_star: Option<f64>,
    pub phi_star: Option<f64>,
    pub e_standard: Option<f64>,
    pub gap: Option<f64>,
}

/// Per grid point: optimal-measurement `E_{A|B}`, the standard-basis value,
/// and their difference.
pub fn optimal_vs_standard_gap(base: &ProtocolParams, grid: &GridSpec) -> Result<Vec<GapPoint>> {
    use SweepParam::*;
    grid.require_two_of(&[GammaAc, GammaBc, BetaAc, BetaBc])?;
    base.validate()?;
    par_try_map(grid.points(), |xy| {
        let params = grid.apply(base, &xy)?;
        let s = screen(&params)?;
        let mut point = GapPoint {
            x: xy[0],
            y: xy[1],
            feasible: s.feasible(),
            e_star: None,
            theta_star: None,
            phi_star: None,
            e_standard: None,
            gap: None,
        };
        if let (true, Some(state)) = (s.feasible(), s.state_after_decoding) {
            let best = optimize_measurement(&state);
            let standard = measured_negativity(state.matrix(), MeasurementSpec::STANDARD).1;
            point.e_star = Some(best.e_star);
            point.theta_star = Some(best.theta_star);
            point.phi_star = Some(best.phi_star);
            point.e_standard = standard;
            point.gap = standard.map(|s| best.e_star - s);
        }
        Ok(point)
    })
}

/// `E_{A|BC}` after encoding and `E_{B|AC}` after decoding, without monitoring.
pub fn stage_entanglements(params: &ProtocolParams) -> Result<(f64, f64)> {
    use crate::dynamics::evolve_state;
    use crate::entanglement::{negativity, Bipartition};
    use crate::states::alpha;
    params.validate()?;
    let enc = evolve_state(&alpha(params.p), &params.encoding, params.jump_dir, params.dt)?;
    let dec = evolve_state(&enc, &params.decoding, params.jump_dir, params.dt)?;
    Ok((negativity(&enc, Bipartition::A_BC)?.value(), negativity(&dec, Bipartition::B_AC)?.value()))
}
