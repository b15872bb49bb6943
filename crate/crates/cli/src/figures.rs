//! `edss figure <name>`: the parameter sweeps behind each published panel.
//!
//! Every figure writes one CSV and one plot script per panel into the output
//! directory, plus `<name>_summary.json` with its headline numbers.

use std::fs;
use std::path::PathBuf;

use clap::ValueEnum;
use edss::protocol::{extract_trace_out, run_protocol, ProtocolParams};
use edss::sweeps::{
    boundary_landscapes, entanglement_landscapes, feasibility_region, gamma_ac_vs_time, gamma_bc_boundary_map,
    max_feasible_gamma_in, measurement_map, optimize_measurement, stage_entanglements, Extraction, GammaTarget,
    GridAxis, GridSpec, Landscape, LandscapePoint, Scope, SweepParam, DEFAULT_HI_GAMMA_AC, DEFAULT_HI_GAMMA_BC,
};
use rayon::prelude::*;
use serde_json::json;

use crate::output::{write_panel, Cell, Plot, Table};
use crate::{echo_config, CliError, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureName {
    Fig2a,
    Fig2b,
    Fig3,
    Fig4,
    Fig5b,
    Fig5cd,
    Fig6,
}

impl FigureName {
    pub fn as_str(self) -> &'static str {
        match self {
            FigureName::Fig2a => "fig2a",
            FigureName::Fig2b => "fig2b",
            FigureName::Fig3 => "fig3",
            FigureName::Fig4 => "fig4",
            FigureName::Fig5b => "fig5b",
            FigureName::Fig5cd => "fig5cd",
            FigureName::Fig6 => "fig6",
        }
    }
}

/// Initial weights of the three feasibility regions.
pub const REGION_P_VALUES: [f64; 3] = [0.9, 0.5, 0.1];

/// The fixed `γ_BC` of the middle row of the β panels.
pub const UNIFORM_GAMMA_BC: f64 = 0.091;

/// `(γ_AC, γ_BC)` of the four measurement-map panels.
pub const SHOWCASE_POINTS: [(f64, f64); 4] = [(0.0, 0.0), (0.09, 0.0), (0.0, 0.6), (0.06, 0.4)];

#[derive(Debug, Clone, PartialEq)]
pub struct Headline {
    pub key: String,
    pub value: f64,
    /// Grid coordinates the value was taken at, when it is an extremum.
    pub at: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureReport {
    pub name: FigureName,
    pub files: Vec<PathBuf>,
    pub headlines: Vec<Headline>,
}

impl FigureReport {
    pub fn get(&self, key: &str) -> Option<&Headline> {
        self.headlines.iter().find(|h| h.key == key)
    }

    pub fn value(&self, key: &str) -> Option<f64> {
        self.get(key).map(|h| h.value)
    }
}

struct Builder<'a> {
    cfg: &'a RunConfig,
    files: Vec<PathBuf>,
    headlines: Vec<Headline>,
}

impl Builder<'_> {
    fn panel(&mut self, name: &str, title: &str, table: &Table, plot: Plot) -> Result<(), CliError> {
        self.files.extend(write_panel(&self.cfg.out_dir, name, title, table, &plot)?);
        Ok(())
    }

    fn headline(&mut self, key: &str, value: f64, at: Option<(f64, f64)>) {
        self.headlines.push(Headline { key: key.into(), value, at });
    }

    fn extremum(&mut self, key: &str, point: Option<&LandscapePoint>) {
        if let Some(p) = point {
            self.headline(key, p.e_ab.expect("extrema are feasible"), Some((p.x, p.y)));
        }
    }
}

fn axis(param: SweepParam, min: f64, max: f64, count: usize) -> GridAxis {
    GridAxis::new(param, min, max, count).expect("constant axis")
}

fn gamma_axes(cfg: &RunConfig) -> (GridAxis, GridAxis) {
    cfg.axes_or(axis(SweepParam::GammaAc, 0.0, 0.1, 61), axis(SweepParam::GammaBc, 0.0, 0.7, 61))
}

fn beta_axes(cfg: &RunConfig) -> (GridAxis, GridAxis) {
    cfg.axes_or(axis(SweepParam::BetaAc, 0.0, 2.0, 41), axis(SweepParam::BetaBc, 0.0, 2.0, 41))
}

fn map_plot(x: &str, y: &str, z_col: usize, z: &str) -> Plot {
    Plot::Map { x: 1, y: 2, z: z_col, xlabel: x.into(), ylabel: y.into(), zlabel: z.into() }
}

/// Columns: x, y, feasible, e_ab, gain, then optional extras.
fn landscape_table(l: &Landscape, angles: bool, gamma_bc: bool) -> Table {
    let mut header = vec![l.x_param.name(), l.y_param.name(), "feasible", "e_ab", "gain"];
    if angles {
        header.extend(["theta", "phi"]);
    }
    if gamma_bc {
        header.push("gamma_bc");
    }
    let mut t = Table::new(&header);
    for p in &l.points {
        let mut row =
            vec![Cell::Num(p.x), Cell::Num(p.y), Cell::Bool(p.feasible), Cell::Opt(p.e_ab), Cell::Opt(p.gain)];
        if angles {
            row.extend([Cell::Opt(p.theta), Cell::Opt(p.phi)]);
        }
        if gamma_bc {
            row.push(Cell::Num(p.gamma_bc));
        }
        t.push(row);
    }
    t
}

fn min_gain(ls: &[&Landscape]) -> Option<f64> {
    ls.iter().flat_map(|l| l.feasible_points()).filter_map(|p| p.gain).min_by(f64::total_cmp)
}

fn max_of<'a>(ls: &[&'a Landscape]) -> Option<&'a LandscapePoint> {
    ls.iter().filter_map(|l| l.max_point()).max_by(|a, b| a.e_ab.unwrap().total_cmp(&b.e_ab.unwrap()))
}

fn min_of<'a>(ls: &[&'a Landscape]) -> Option<&'a LandscapePoint> {
    ls.iter().filter_map(|l| l.min_point()).min_by(|a, b| a.e_ab.unwrap().total_cmp(&b.e_ab.unwrap()))
}

/// Runs a figure on the configured worker pool and writes its outputs.
pub fn run_figure(name: FigureName, cfg: &RunConfig) -> Result<FigureReport, CliError> {
    let base = cfg.params();
    base.validate()?;
    let mut b = Builder { cfg, files: Vec::new(), headlines: Vec::new() };
    crate::with_workers(cfg, || -> Result<(), CliError> {
        match name {
            FigureName::Fig2a => fig2a(&mut b, &base),
            FigureName::Fig2b => fig2b(&mut b, &base),
            FigureName::Fig3 => fig3(&mut b, &base),
            FigureName::Fig4 => fig4(&mut b, &base),
            FigureName::Fig5b => fig5b(&mut b, &base),
            FigureName::Fig5cd => fig5cd(&mut b, &base),
            FigureName::Fig6 => fig6(&mut b, &base),
        }
    })??;

    echo_config(cfg)?;
    let headlines: serde_json::Map<String, serde_json::Value> = b
        .headlines
        .iter()
        .map(|h| (h.key.clone(), json!({ "value": h.value, "at": h.at.map(|(x, y)| [x, y]) })))
        .collect();
    let summary = json!({ "figure": name.as_str(), "headlines": headlines });
    let path = cfg.out_dir.join(format!("{}_summary.json", name.as_str()));
    fs::write(&path, serde_json::to_string_pretty(&summary).expect("finite json") + "\n")?;
    b.files.push(path);
    Ok(FigureReport { name, files: b.files, headlines: b.headlines })
}

/// Boundary `γ_AC` against encoding time, separability enforced during encoding only.
fn fig2a(b: &mut Builder, base: &ProtocolParams) -> Result<(), CliError> {
    let t_axis = b.cfg.axis1.unwrap_or(axis(SweepParam::TAc, 0.1, 2.0, 20));
    let tol = b.cfg.bisect_tol;
    let curve = gamma_ac_vs_time(base, &t_axis, DEFAULT_HI_GAMMA_AC, tol)?;
    let mut t = Table::new(&["t_ac", "max_gamma_ac"]);
    for (x, g) in curve.abscissa.iter().zip(&curve.max_gamma) {
        t.push(vec![Cell::Num(*x), Cell::Num(*g)]);
    }
    let plot = Plot::Line { x: 1, y: 2, xlabel: "t_AC".into(), ylabel: "max gamma_AC".into() };
    b.panel("fig2a", "Largest gamma_AC keeping C|AB separable during encoding", &t, plot)?;

    let mut unit = *base;
    unit.encoding.duration = 1.0;
    let at_unit = max_feasible_gamma_in(&unit, GammaTarget::GammaAc, Scope::EncodingOnly, DEFAULT_HI_GAMMA_AC, tol)?;
    b.headline("max_gamma_ac_at_t1", at_unit, None);
    let rises = curve.max_gamma.windows(2).filter(|w| w[1] > w[0] + 2.0 * tol).count();
    b.headline("non_increasing_violations", rises as f64, None);
    Ok(())
}

/// Largest feasible `γ_BC` per `γ_AC`, for three initial weights.
fn fig2b(b: &mut Builder, base: &ProtocolParams) -> Result<(), CliError> {
    let g_axis = b.cfg.axis1.unwrap_or(axis(SweepParam::GammaAc, 0.0, 0.6, 61));
    let curves = feasibility_region(base, &REGION_P_VALUES, &g_axis, DEFAULT_HI_GAMMA_BC, b.cfg.bisect_tol)?;
    let mut t = Table::new(&["p", "gamma_ac", "max_gamma_bc", "feasible"]);
    for c in &curves {
        for (g, m) in c.gamma_ac.iter().zip(&c.max_gamma_bc) {
            t.push(vec![Cell::Num(c.p), Cell::Num(*g), Cell::Opt(*m), Cell::Bool(m.is_some())]);
        }
    }
    let plot =
        Plot::Map { x: 2, y: 3, z: 1, xlabel: "gamma_AC".into(), ylabel: "max gamma_BC".into(), zlabel: "p".into() };
    b.panel("fig2b", "Feasible (gamma_AC, gamma_BC) region", &t, plot)?;
    for c in &curves {
        b.headline(&format!("area_p{}", c.p), c.area(), None);
        b.headline(&format!("max_gamma_ac_p{}", c.p), c.max_gamma_ac().unwrap_or(f64::NAN), None);
        b.headline(&format!("max_gamma_bc_p{}", c.p), c.max_gamma_bc[0].unwrap_or(f64::NAN), None);
    }
    Ok(())
}

/// Grid over `(γ_AC, γ_BC)` plus, when the grid is over exactly those two,
/// the boundary curve where the extrema sit.
fn gamma_landscapes(
    b: &Builder,
    base: &ProtocolParams,
    extractions: &[Extraction],
) -> Result<(Vec<Landscape>, Option<Vec<Landscape>>), CliError> {
    let (x, y) = gamma_axes(b.cfg);
    let grid = GridSpec::two(x, y)?;
    let main = entanglement_landscapes(base, &grid, extractions)?;
    let boundary = if x.param == SweepParam::GammaAc && y.param == SweepParam::GammaBc {
        let curve = GridSpec::one(x);
        Some(boundary_landscapes(base, &curve, extractions, DEFAULT_HI_GAMMA_BC, b.cfg.bisect_tol)?)
    } else {
        None
    };
    Ok((main, boundary))
}

/// Trace-out `E_{A|B}` over the feasible `(γ_AC, γ_BC)` region.
fn fig3(b: &mut Builder, base: &ProtocolParams) -> Result<(), CliError> {
    let (main, boundary) = gamma_landscapes(b, base, &[Extraction::TraceOut])?;
    let l = &main[0];
    b.panel(
        "fig3",
        "E(A|B) with C traced out",
        &landscape_table(l, false, false),
        map_plot("gamma_AC", "gamma_BC", 4, "E(A|B)"),
    )?;
    let mut all = vec![l];
    if let Some(bd) = &boundary {
        let plot = Plot::Line { x: 1, y: 4, xlabel: "gamma_AC".into(), ylabel: "E(A|B) on the boundary".into() };
        b.panel(
            "fig3_boundary",
            "E(A|B) with C traced out, on the gamma_BC boundary",
            &landscape_table(&bd[0], false, false),
            plot,
        )?;
        all.push(&bd[0]);
    }
    b.extremum("max_e_ab", max_of(&all));
    b.extremum("max_e_ab_grid", l.max_point());
    if let Some(g) = min_gain(&all) {
        b.headline("min_gain", g, None);
    }
    b.headline("monotonicity_violations", monotonicity_violations(l) as f64, None);
    Ok(())
}

/// Feasible columns at fixed `x` where `e_ab` drops as `y` grows.
pub fn monotonicity_violations(l: &Landscape) -> usize {
    let mut count = 0;
    for pair in l.points.windows(2) {
        let (a, c) = (&pair[0], &pair[1]);
        if a.x == c.x && a.feasible && c.feasible {
            if let (Some(ea), Some(ec)) = (a.e_ab, c.e_ab) {
                if ec < ea - 1e-12 {
                    count += 1;
                }
            }
        }
    }
    count
}

/// Measured extraction: showcase maps (a)-(d), optimal value (e), angle (f)
/// and the gap to the standard basis (g).
fn fig4(b: &mut Builder, base: &ProtocolParams) -> Result<(), CliError> {
    let showcase: Vec<_> = SHOWCASE_POINTS
        .par_iter()
        .map(|&(ga, gb)| -> Result<_, CliError> {
            let r = run_protocol(&base.with_gammas(ga, gb))?;
            let map = measurement_map(&r.state_after_decoding, 31, 61)?;
            let best = optimize_measurement(&r.state_after_decoding);
            Ok((map, best.e_star, extract_trace_out(&r), r.is_feasible()))
        })
        .collect::<Result<_, _>>()?;
    for (i, ((map, e_star, trace_out, feasible), (ga, gb))) in showcase.iter().zip(SHOWCASE_POINTS).enumerate() {
        let label = ["a", "b", "c", "d"][i];
        let mut t = Table::new(&["theta", "phi", "e_ab"]);
        for (th, ph, e) in map {
            t.push(vec![Cell::Num(*th), Cell::Num(*ph), Cell::Opt(*e)]);
        }
        let title = format!("E(A|B) after projecting C, gamma_AC={ga}, gamma_BC={gb}");
        b.panel(&format!("fig4{label}"), &title, &t, map_plot("theta", "phi", 3, "E(A|B)"))?;
        b.headline(&format!("{label}_e_star"), *e_star, Some((ga, gb)));
        b.headline(&format!("{label}_ratio_to_trace_out"), e_star / trace_out, Some((ga, gb)));
        b.headline(&format!("{label}_feasible"), if *feasible { 1.0 } else { 0.0 }, Some((ga, gb)));
    }

    let (main, boundary) = gamma_landscapes(b, base, &[Extraction::Optimal, Extraction::StandardBasis])?;
    let (opt, std) = (&main[0], &main[1]);
    b.panel(
        "fig4e",
        "Largest E(A|B) over projective measurements on C",
        &landscape_table(opt, true, false),
        map_plot("gamma_AC", "gamma_BC", 4, "E(A|B)"),
    )?;
    b.panel(
        "fig4f",
        "Optimal measurement angle theta",
        &landscape_table(opt, true, false),
        map_plot("gamma_AC", "gamma_BC", 6, "theta"),
    )?;
    b.panel(
        "fig4g",
        "Optimal minus standard-basis E(A|B)",
        &gap_table(opt, std),
        map_plot("gamma_AC", "gamma_BC", 7, "gap"),
    )?;

    let mut opts = vec![opt];
    let mut pairs = vec![(opt, std)];
    if let Some(bd) = &boundary {
        b.panel(
            "fig4_boundary",
            "Measured E(A|B) on the gamma_BC boundary",
            &gap_table(&bd[0], &bd[1]),
            Plot::Line { x: 1, y: 4, xlabel: "gamma_AC".into(), ylabel: "E(A|B)".into() },
        )?;
        opts.push(&bd[0]);
        pairs.push((&bd[0], &bd[1]));
    }
    b.extremum("min_e_ab", min_of(&opts));
    b.extremum("min_e_ab_grid", opt.min_point());
    if let Some(g) = min_gain(&opts) {
        b.headline("min_gain", g, None);
    }
    let theta = opts.iter().flat_map(|l| l.feasible_points()).filter_map(|p| p.theta).fold(f64::NAN, f64::max);
    b.headline("max_theta", theta, None);
    let mut best_gap: Option<(f64, (f64, f64))> = None;
    let mut min_gap = f64::INFINITY;
    for (o, s) in pairs {
        for (po, ps) in o.points.iter().zip(&s.points) {
            if let (Some(eo), Some(es)) = (po.e_ab, ps.e_ab) {
                let g = eo - es;
                min_gap = min_gap.min(g);
                if best_gap.is_none_or(|(bg, _)| g > bg) {
                    best_gap = Some((g, (po.x, po.y)));
                }
            }
        }
    }
    if let Some((g, at)) = best_gap {
        b.headline("max_gap", g, Some(at));
        b.headline("min_gap", min_gap, None);
    }
    Ok(())
}

/// Columns: x, y, feasible, e_ab (optimal), gain, theta, e_ab_standard, gap.
fn gap_table(opt: &Landscape, std: &Landscape) -> Table {
    let mut t = Table::new(&[
        opt.x_param.name(),
        opt.y_param.name(),
        "feasible",
        "e_ab",
        "gain",
        "theta",
        "e_ab_standard",
        "gap",
    ]);
    for (o, s) in opt.points.iter().zip(&std.points) {
        let gap = o.e_ab.zip(s.e_ab).map(|(a, b)| a - b);
        t.push(vec![
            Cell::Num(o.x),
            Cell::Num(o.y),
            Cell::Bool(o.feasible),
            Cell::Opt(o.e_ab),
            Cell::Opt(o.gain),
            Cell::Opt(o.theta),
            Cell::Opt(s.e_ab),
            Cell::Opt(gap),
        ]);
    }
    t
}

fn beta_grid(cfg: &RunConfig) -> Result<GridSpec, CliError> {
    let (x, y) = beta_axes(cfg);
    Ok(GridSpec::two(x, y)?)
}

/// Boundary `γ_BC` over `(β_AC, β_BC)` at the configured `γ_AC`.
fn boundary_map(b: &Builder, base: &ProtocolParams, grid: &GridSpec) -> Result<Vec<Option<f64>>, CliError> {
    gamma_bc_boundary_map(base, grid, DEFAULT_HI_GAMMA_BC, b.cfg.bisect_tol)?
        .into_iter()
        .map(|r| match r {
            Ok(g) => Ok(Some(g)),
            Err(edss::Error::BaseInfeasible(_) | edss::Error::NoUpperBound(_)) => Ok(None),
            Err(e) => Err(e.into()),
        })
        .collect()
}

fn grid_lookup(grid: &GridSpec, x: f64, y: f64) -> Option<usize> {
    grid.points().iter().position(|p| (p[0] - x).abs() < 1e-12 && (p[1] - y).abs() < 1e-12)
}

/// Largest feasible `γ_BC` over the β plane.
fn fig5b(b: &mut Builder, base: &ProtocolParams) -> Result<(), CliError> {
    let grid = beta_grid(b.cfg)?;
    let bound = boundary_map(b, base, &grid)?;
    let (xn, yn) = (grid.axes()[0].param.name(), grid.axes()[1].param.name());
    let mut t = Table::new(&[xn, yn, "max_gamma_bc", "feasible"]);
    for (p, g) in grid.points().iter().zip(&bound) {
        t.push(vec![Cell::Num(p[0]), Cell::Num(p[1]), Cell::Opt(*g), Cell::Bool(g.is_some())]);
    }
    b.panel("fig5b", "Largest gamma_BC keeping C|AB separable", &t, map_plot(xn, yn, 3, "max gamma_BC"))?;
    let points = grid.points();
    if let Some((i, g)) =
        bound.iter().enumerate().filter_map(|(i, g)| g.map(|g| (i, g))).min_by(|a, b| a.1.total_cmp(&b.1))
    {
        b.headline("min_max_gamma_bc", g, Some((points[i][0], points[i][1])));
    }
    for (key, x, y) in [("max_gamma_bc_at_1_1", 1.0, 1.0), ("max_gamma_bc_at_0.8_0.85", 0.8, 0.85)] {
        if let Some(g) = grid_lookup(&grid, x, y).and_then(|i| bound[i]) {
            b.headline(key, g, Some((x, y)));
        }
    }
    Ok(())
}

/// `E_{B|AC}` after decoding with `γ_BC = 0` (c) and at the boundary (d).
fn fig5cd(b: &mut Builder, base: &ProtocolParams) -> Result<(), CliError> {
    let grid = beta_grid(b.cfg)?;
    let bound = boundary_map(b, base, &grid)?;
    let points = grid.points();
    let (xn, yn) = (grid.axes()[0].param.name(), grid.axes()[1].param.name());
    let apply = |p: &[f64], gamma_bc: f64| {
        let mut q = base.with_gammas(base.encoding.gamma, gamma_bc);
        for (axis, v) in grid.axes().iter().zip(p) {
            q = axis.param.apply(&q, *v)?;
        }
        Ok::<_, edss::Error>(q)
    };
    let panel_c: Vec<f64> =
        points.par_iter().map(|p| Ok(stage_entanglements(&apply(p, 0.0)?)?.1)).collect::<Result<_, edss::Error>>()?;
    let panel_d: Vec<Option<f64>> = points
        .par_iter()
        .zip(&bound)
        .map(|(p, g)| match g {
            Some(g) => Ok(Some(stage_entanglements(&apply(p, *g)?)?.1)),
            None => Ok(None),
        })
        .collect::<Result<_, edss::Error>>()?;

    let mut tc = Table::new(&[xn, yn, "e_b_ac"]);
    let mut td = Table::new(&[xn, yn, "feasible", "e_b_ac", "gamma_bc"]);
    for ((p, ec), (ed, g)) in points.iter().zip(&panel_c).zip(panel_d.iter().zip(&bound)) {
        tc.push(vec![Cell::Num(p[0]), Cell::Num(p[1]), Cell::Num(*ec)]);
        td.push(vec![Cell::Num(p[0]), Cell::Num(p[1]), Cell::Bool(g.is_some()), Cell::Opt(*ed), Cell::Opt(*g)]);
    }
    b.panel("fig5c", "E(B|AC) after decoding, gamma = 0", &tc, map_plot(xn, yn, 3, "E(B|AC)"))?;
    b.panel("fig5d", "E(B|AC) after decoding at the gamma_BC boundary", &td, map_plot(xn, yn, 4, "E(B|AC)"))?;

    let argmax = |v: &mut dyn Iterator<Item = (usize, f64)>| v.max_by(|a, b| a.1.total_cmp(&b.1));
    if let Some((i, e)) = argmax(&mut panel_c.iter().copied().enumerate()) {
        b.headline("c_max_e_b_ac", e, Some((points[i][0], points[i][1])));
    }
    if let Some((i, e)) = argmax(&mut panel_d.iter().enumerate().filter_map(|(i, e)| e.map(|e| (i, e)))) {
        b.headline("d_max_e_b_ac", e, Some((points[i][0], points[i][1])));
    }
    Ok(())
}

/// Standard-basis (a-c) and optimal (d-f) extraction over the β plane with
/// `γ_BC` = 0, [`UNIFORM_GAMMA_BC`], and the per-point boundary.
fn fig6(b: &mut Builder, base: &ProtocolParams) -> Result<(), CliError> {
    let grid = beta_grid(b.cfg)?;
    let both = [Extraction::StandardBasis, Extraction::Optimal];
    let ga = base.encoding.gamma;
    let zero = entanglement_landscapes(&base.with_gammas(ga, 0.0), &grid, &both)?;
    let uniform = entanglement_landscapes(&base.with_gammas(ga, UNIFORM_GAMMA_BC), &grid, &both)?;
    let edge = boundary_landscapes(base, &grid, &both, DEFAULT_HI_GAMMA_BC, b.cfg.bisect_tol)?;
    let (xn, yn) = (grid.axes()[0].param.name(), grid.axes()[1].param.name());

    let rows: [(&str, &Landscape, bool, &str); 6] = [
        ("a", &zero[0], false, "standard basis, gamma_BC = 0"),
        ("b", &uniform[0], false, "standard basis, gamma_BC = 0.091"),
        ("c", &edge[0], true, "standard basis, gamma_BC at the boundary"),
        ("d", &zero[1], false, "optimal measurement, gamma_BC = 0"),
        ("e", &uniform[1], false, "optimal measurement, gamma_BC = 0.091"),
        ("f", &edge[1], true, "optimal measurement, gamma_BC at the boundary"),
    ];
    for (label, l, with_gamma, desc) in rows {
        let angles = l.extraction == Extraction::Optimal;
        b.panel(
            &format!("fig6{label}"),
            &format!("E(A|B), {desc}"),
            &landscape_table(l, angles, with_gamma),
            map_plot(xn, yn, 4, "E(A|B)"),
        )?;
    }

    for (label, l) in [("a", &zero[0]), ("b", &uniform[0]), ("c", &edge[0]), ("f", &edge[1])] {
        if let Some(p) = l.at(1.0, 1.0).filter(|p| p.feasible) {
            b.headline(&format!("{label}_e_ab_at_1_1"), p.e_ab.unwrap_or(f64::NAN), Some((1.0, 1.0)));
            b.headline(&format!("{label}_gain_at_1_1"), p.gain.unwrap_or(f64::NAN), Some((1.0, 1.0)));
        }
    }
    for (label, l) in rows.iter().map(|r| (r.0, r.1)) {
        b.extremum(&format!("{label}_max_e_ab"), l.max_point());
    }
    if let Some(p) = edge[1].max_point() {
        b.headline("f_max_gamma_bc", p.gamma_bc, Some((p.x, p.y)));
    }
    let min_boundary = edge[0].points.iter().filter(|p| p.feasible).map(|p| p.gamma_bc).fold(f64::NAN, f64::min);
    b.headline("min_boundary_gamma_bc", min_boundary, None);
    let uniform_infeasible = uniform[0].points.iter().filter(|p| !p.feasible).count();
    b.headline("b_infeasible_points", uniform_infeasible as f64, None);
    Ok(())
}
