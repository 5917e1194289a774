//! The four subcommands. Heavy work fans out over rayon; files are written
//! afterwards, one at a time.

use std::path::PathBuf;

use pairsirs_core::bifurcation::{assemble_slice, classify, Axis, CellClass, Classification, SliceSpec, SweepGrid};
use pairsirs_core::fastslow::slow_solution;
use pairsirs_core::integrate::{
    integrate_full_stiff, integrate_layer, integrate_reduced, integrate_slow, IntegrationConfig, Trajectory,
};
use pairsirs_core::model::geometry;
use pairsirs_core::netsim::{
    compare_to_ode, ensemble_summary, generate_regular_graph, gillespie_run, random_nodes, replica_seed, splitmix64,
    RegularGraph, SimRecord, EDGE_COMPONENTS,
};
use pairsirs_core::singular::{
    assemble_interval, find_candidate_cycle, interval_grid, map_interval_point, IntervalImage, IntervalSample, Verdict,
};
use pairsirs_core::{Params, SlowPoint};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{HopfConfig, IntegrateConfig, NetsimConfig, Resolved, RunConfig, SingularConfig, System};
use crate::error::CliError;
use crate::output::{num, Writer};
use crate::svg::{bounds, Svg, PALETTE};

/// Files written and a short human-readable summary.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
}

pub fn run(config: &Resolved) -> Result<Outcome, CliError> {
    match &config.run {
        RunConfig::Integrate(c) => integrate_cmd(config, c),
        RunConfig::Singular(c) => singular_cmd(config, c),
        RunConfig::Hopf(c) => hopf_cmd(config, c),
        RunConfig::Netsim(c) => netsim_cmd(config, c),
    }
}

/// Classify every cell of a slice in parallel, then locate the boundary.
pub fn sweep_parallel(spec: &SliceSpec) -> pairsirs_core::Result<SweepGrid> {
    spec.validate()?;
    let classes: Vec<Classification> = spec.grid().par_iter().map(classify).collect();
    assemble_slice(spec, &classes)
}

/// The interval test with samples mapped in parallel.
pub fn interval_parallel(p: &Params, center: SlowPoint, width: f64, count: usize) -> IntervalImage {
    let samples = interval_grid(center, width, count)
        .into_par_iter()
        .map(|j1| IntervalSample { j1, image: map_interval_point(j1, p) })
        .collect();
    assemble_interval(center.s, samples)
}

/// Replicas in parallel; the result is in replica order and independent of
/// the thread count.
pub fn ensemble_parallel(
    graph: &RegularGraph,
    p: &Params,
    infected: &[usize],
    t_max: f64,
    sample_dt: f64,
    root_seed: u64,
    replicas: usize,
) -> pairsirs_core::Result<Vec<SimRecord>> {
    (0..replicas)
        .into_par_iter()
        .map(|r| gillespie_run(graph, p, infected, t_max, sample_dt, replica_seed(root_seed, r)))
        .collect()
}

fn trajectory_rows<const N: usize>(tr: &Trajectory<N>) -> Vec<Vec<String>> {
    tr.times
        .iter()
        .zip(&tr.states)
        .map(|(t, y)| std::iter::once(num(*t)).chain(y.iter().map(|v| num(*v))).collect())
        .collect()
}

fn trajectory_plot<const N: usize>(tr: &Trajectory<N>, plot: &[String], title: &str, time: &str) -> Svg {
    let idx: Vec<usize> = plot.iter().filter_map(|c| tr.labels.iter().position(|l| l == c)).collect();
    let ys: Vec<f64> = tr.states.iter().flat_map(|y| idx.iter().map(move |&i| y[i])).collect();
    let mut svg = Svg::new(title, time, &plot.join(", "), bounds(&tr.times), bounds(&ys));
    for (k, &i) in idx.iter().enumerate() {
        let pts: Vec<(f64, f64)> = tr.times.iter().zip(&tr.states).map(|(t, y)| (*t, y[i])).collect();
        svg.line(&tr.labels[i], PALETTE[k % PALETTE.len()], &pts);
    }
    svg
}

fn write_trajectory<const N: usize>(
    w: &mut Writer,
    tr: &Trajectory<N>,
    time: &str,
    c: &IntegrateConfig,
) -> Result<(), CliError> {
    let mut header = vec![time];
    header.extend(tr.labels.iter().map(String::as_str));
    w.csv("trajectory.csv", &header, trajectory_rows(tr))?;
    if !c.plot.is_empty() {
        let title = format!("{:?} system", c.system).to_lowercase();
        w.svg("trajectory.svg", trajectory_plot(tr, &c.plot, &title, time))?;
    }
    Ok(())
}

fn integrate_cmd(config: &Resolved, c: &IntegrateConfig) -> Result<Outcome, CliError> {
    let p = &c.params;
    let mut summary = Vec::new();
    match c.system {
        System::Slow => {
            let cfg = IntegrationConfig::<2>::new(c.tmax).tolerances(c.rtol, c.atol).sample_every(c.sample_dt);
            let tr = integrate_slow(p.n, c.initial.slow_point(), &cfg)?;
            summary.push(format!("slow flow: {} samples, final {:?}", tr.len(), tr.last().1));
            let mut w = Writer::new(config)?;
            write_trajectory(&mut w, &tr, "tau", c)?;
            Ok(Outcome { files: w.written, summary })
        }
        System::Full | System::Layer => {
            let cfg = IntegrationConfig::<5>::new(c.tmax).tolerances(c.rtol, c.atol).sample_every(c.sample_dt);
            let tr = match c.system {
                System::Layer => integrate_layer(p, c.initial, &cfg)?,
                _ if p.epsilon > 0.0 => integrate_full_stiff(p, c.initial, &cfg)?,
                _ => integrate_reduced(p, c.initial, &cfg)?,
            };
            summary.push(format!(
                "{} samples, {} steps accepted, {} rejected, final {:?}",
                tr.len(),
                tr.steps_accepted,
                tr.steps_rejected,
                tr.last().1
            ));
            let mut w = Writer::new(config)?;
            write_trajectory(&mut w, &tr, "t", c)?;
            Ok(Outcome { files: w.written, summary })
        }
    }
}

fn singular_plot(p: &Params, image: &IntervalImage, cycle: &[SlowPoint]) -> Svg {
    let g = geometry(p);
    let mut svg = Svg::new("singular return map", "S", "SS", (0.0, 1.0), (0.0, p.n));
    let grid: Vec<f64> = (0..=200).map(|k| k as f64 / 200.0).collect();
    svg.line("SS = L S", "#9467bd", &grid.iter().map(|&s| (s, g.l_line(s).min(p.n))).collect::<Vec<_>>());
    svg.line("parabola", "#000000", &grid.iter().map(|&s| (s, g.parabola(s))).collect::<Vec<_>>());
    svg.line("alpha", "#2ca02c", &grid.iter().map(|&s| (s, g.alpha(s))).collect::<Vec<_>>());
    if let Some((start, Ok((entry, exit)))) = cycle.last().map(|q| (q, map_interval_point(*q, p))) {
        svg.line("fast jump", "#d62728", &[(start.s, start.ss), (entry.s, entry.ss)]);
        let tau = ((1.0 - entry.s) / (1.0 - exit.s).max(1e-300)).ln().max(0.0);
        let slow: Vec<(f64, f64)> =
            (0..=100).map(|k| slow_solution(entry, tau * k as f64 / 100.0, p.n)).map(|q| (q.s, q.ss)).collect();
        svg.line("slow passage", "#1f77b4", &slow);
    }
    let pts = |it: &mut dyn Iterator<Item = SlowPoint>| it.map(|q| (q.s, q.ss)).collect::<Vec<_>>();
    svg.points("J1", "#000000", &pts(&mut image.samples.iter().map(|s| s.j1)));
    svg.points("J2", "#ff7f0e", &pts(&mut image.j2()));
    svg.points("J3", "#17becf", &pts(&mut image.j3()));
    svg
}

fn singular_cmd(config: &Resolved, c: &SingularConfig) -> Result<Outcome, CliError> {
    let p = &c.params;
    let cycle = match find_candidate_cycle(p, c.s0) {
        Ok(cycle) => cycle,
        Err(e) => {
            let mut w = Writer::new(config)?;
            w.json("diagnostic.json", &json!({ "error": e.to_string(), "stage": "find_candidate_cycle" }))?;
            return Err(CliError::Runtime(format!("return map diverged: {e} (details in {})", w.written[0].display())));
        }
    };
    let image = interval_parallel(p, cycle.point, c.width, c.samples);
    let transversal = image.verdict == Verdict::Transversal;
    let rows = image.samples.iter().enumerate().map(|(k, s)| {
        let (j2, j3, err) = match &s.image {
            Ok((a, b)) => (Some(*a), Some(*b), String::new()),
            Err(e) => (None, None, e.to_string()),
        };
        let f = |q: Option<SlowPoint>, s: bool| q.map(|q| num(if s { q.s } else { q.ss })).unwrap_or_default();
        vec![k.to_string(), num(s.j1.s), num(s.j1.ss), f(j2, true), f(j2, false), f(j3, true), f(j3, false), err]
    });
    let rows: Vec<Vec<String>> = rows.collect();
    let mut w = Writer::new(config)?;
    w.csv("interval.csv", &["k", "J1_S", "J1_SS", "J2_S", "J2_SS", "J3_S", "J3_SS", "error"], rows)?;
    w.svg("interval.svg", singular_plot(p, &image, &cycle.history))?;
    w.json(
        "verdict.json",
        &json!({
            "transversal": transversal,
            "verdict": image.verdict,
            "candidate": cycle,
            "sample_failures": image.failures(),
        }),
    )?;
    Ok(Outcome {
        files: w.written,
        summary: vec![format!(
            "candidate {:?} (converged {}, {} iterations); verdict {:?}",
            cycle.point, cycle.converged, cycle.iterations, image.verdict
        )],
    })
}

fn class_color(c: CellClass) -> &'static str {
    match c {
        CellClass::StableEquilibrium => "#1f77b4",
        CellClass::CycleSide => "#d62728",
        CellClass::BelowThreshold => "#bbbbbb",
        CellClass::Failed => "#000000",
    }
}

fn hopf_cmd(config: &Resolved, c: &HopfConfig) -> Result<Outcome, CliError> {
    let spec = &c.slice;
    let grid = sweep_parallel(spec)?;
    for cell in grid.cells.iter().filter(|c| c.class == CellClass::Failed) {
        eprintln!(
            "cell ({}, {}) at {} = {}, {} = {} failed to classify",
            cell.i,
            cell.j,
            spec.x_axis.name(),
            cell.x,
            spec.y_axis.name(),
            cell.y
        );
    }
    let (xn, yn) = (spec.x_axis.name(), spec.y_axis.name());
    let rows: Vec<Vec<String>> = grid
        .cells
        .iter()
        .map(|cell| {
            vec![
                cell.i.to_string(),
                cell.j.to_string(),
                num(cell.x),
                num(cell.y),
                cell.class.label().to_string(),
                num(cell.leading.re),
                num(cell.leading.im),
            ]
        })
        .collect();
    let mut svg = Svg::new("Hopf boundary", xn, yn, spec.x_range, spec.y_range);
    let (rx, ry) = spec.resolution;
    let dx = (spec.x_range.1 - spec.x_range.0) / (rx - 1) as f64;
    let dy = (spec.y_range.1 - spec.y_range.0) / (ry - 1) as f64;
    for cell in &grid.cells {
        svg.cell(cell.x, cell.y, dx, dy, class_color(cell.class));
    }
    for seg in &grid.segments {
        svg.segment(seg[0], seg[1], "#000000");
    }
    let hp: Vec<(f64, f64)> =
        grid.hopf_points.iter().map(|h| (spec.x_axis.get(&h.params()), spec.y_axis.get(&h.params()))).collect();
    svg.points("Hopf points", "#ff7f0e", &hp);
    for class in [CellClass::StableEquilibrium, CellClass::CycleSide, CellClass::BelowThreshold] {
        svg.legend_entry(class.label(), class_color(class));
    }
    let extent = |axis: Axis| grid.max_on_cycle_side(axis);
    let mut w = Writer::new(config)?;
    w.csv("grid.csv", &["i", "j", xn, yn, "class", "leading_re", "leading_im"], rows)?;
    w.json(
        "hopf.json",
        &json!({
            "points": grid.hopf_points,
            "segments": grid.segments,
            "failures": grid.failures,
            "max_on_cycle_side": { "n": extent(Axis::N), "beta": extent(Axis::Beta), "epsilon": extent(Axis::Epsilon) },
        }),
    )?;
    w.svg("boundary.svg", svg)?;
    let cycle_cells = grid.cells.iter().filter(|c| c.class == CellClass::CycleSide).count();
    let mut summary = vec![format!(
        "{} cells, {} on the cycle side, {} Hopf points, {} boundary segments",
        grid.cells.len(),
        cycle_cells,
        grid.hopf_points.len(),
        grid.segments.len()
    )];
    if grid.failures > 0 {
        summary.push(format!("{} cells failed to classify", grid.failures));
    }
    Ok(Outcome { files: w.written, summary })
}

fn netsim_cmd(config: &Resolved, c: &NetsimConfig) -> Result<Outcome, CliError> {
    let p = &c.params;
    let graph = generate_regular_graph(c.nodes, c.degree, c.seed)?;
    let infected = random_nodes(c.nodes, c.initial_infected, splitmix64(c.seed ^ 0x1f3d_5b79));
    let records = ensemble_parallel(&graph, p, &infected, c.tmax, c.sample_dt, c.seed, c.replicas)?;
    let worst_identity = records.iter().map(SimRecord::identity_violation).max().unwrap_or(0);
    let summary_stats = ensemble_summary(&records)?;
    let report = compare_to_ode(&records, p)?;
    let within = report.peak_time_rel_error <= c.tolerance;

    let mut rows = Vec::new();
    for (r, rec) in records.iter().enumerate() {
        for (k, t) in rec.times.iter().enumerate() {
            let mut row = vec![r.to_string(), rec.seed.to_string(), num(*t)];
            row.extend(rec.node_counts[k].iter().map(u64::to_string));
            row.extend(rec.edge_counts[k].iter().map(u64::to_string));
            rows.push(row);
        }
    }
    let mut header = vec!["replica", "seed", "t", "S", "I", "R"];
    header.extend(EDGE_COMPONENTS);

    let mut w = Writer::new(config)?;
    w.json(
        "ensemble.json",
        &json!({
            "replicas": records.len(),
            "events": records.iter().map(|r| r.events).collect::<Vec<_>>(),
            "max_identity_violation": worst_identity,
            "summary": summary_stats,
        }),
    )?;
    w.json("comparison.json", &json!({ "tolerance": c.tolerance, "within_tolerance": within, "report": report }))?;
    w.csv("records.csv", &header, rows)?;
    Ok(Outcome {
        files: w.written,
        summary: vec![format!(
            "peak I at t = {:.4} (ODE {:.4}), relative error {:.4} (tolerance {}), sup |I| error {:.4e}, identity violations {}",
            report.peak_time_sim, report.peak_time_ode, report.peak_time_rel_error, c.tolerance, report.sup_norm[1], worst_identity
        )],
    })
}
