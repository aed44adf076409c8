mod contour;
mod output;
mod svg;

use clap::{Parser, Subcommand};
use contour::Field;
use output::{json_document, num, Csv, Meta, OutputError, Outputs};
use rayon::prelude::*;
use rpr_analytic::atlas::{section_count_jumps, Axis, WorkspaceGrid};
use rpr_analytic::geometry::DEFAULT_CLASS_TOL;
use rpr_analytic::motion::{loop_crossings, make_loop};
use rpr_analytic::reference::DEFAULT_PHI_SAMPLES;
use rpr_analytic::singularity::sample_workspace;
use rpr_analytic::{
    branch_surface, check_analytic_class, classify_section, count_aspects, discriminant_surface, find_cusps_in_section,
    forward_kinematics_analytic, forward_kinematics_reference, inverse_kinematics, make_cusp_loop, track_branch,
    AnalyticGeometry, Error, GeometryParams, JointPath, JointVector, Pose, SearchBox, SectionGrid, SectionMap,
    SeedGrid, TrackOptions,
};
use serde_json::json;
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use svg::Plot;

/// Refinement tolerance for locating count changes between map cells.
const JUMP_REFINE_TOL: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "rpr3", version, about = "Kinematic analysis of analytic planar 3-RPR manipulators")]
struct Cli {
    /// Geometry JSON file {c2, c3, d3, l2, l3, beta}; the example geometry when omitted.
    #[arg(long, global = true)]
    geometry: Option<PathBuf>,

    /// Output stem: writes <stem>.json, <stem>.csv and <stem>*.svg. Without it
    /// the JSON report (or CSV) goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Tolerance of the analytic-class test.
    #[arg(long, global = true, default_value_t = DEFAULT_CLASS_TOL)]
    tol: f64,

    /// Worker threads for grid scans.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    /// Recorded in every output header; no subcommand draws random numbers.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Test the geometry against the analytic-class conditions.
    CheckClass,
    /// Joint lengths of a pose.
    Ik {
        /// x,y,phi (radians).
        #[arg(long, allow_hyphen_values = true)]
        pose: Triple,
    },
    /// All assembly modes of a joint vector.
    Fk {
        /// rho1,rho2,rho3.
        #[arg(long, allow_hyphen_values = true)]
        joints: JointVector,
        /// Use the brute-force orientation scan instead of the cubic.
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = DEFAULT_PHI_SAMPLES)]
        phi_samples: usize,
    },
    /// Workspace singularity factors on x-y slices.
    SingWorkspace {
        /// Square x-y lattice min,max,n.
        #[arg(long, allow_hyphen_values = true, default_value = "-3,3,121")]
        grid: GridSpec,
        /// Comma-separated orientations (radians).
        #[arg(long, allow_hyphen_values = true, default_value = "0")]
        phi: FloatList,
    },
    /// Discriminant and branch surfaces on a rho2 section.
    SingJointspace {
        #[arg(long, default_value_t = 1.0)]
        rho2: f64,
        /// Square rho1-rho3 lattice min,max,n.
        #[arg(long, default_value = "0.1,4,200")]
        grid: GridSpec,
    },
    /// Triple-root points on a rho2 section.
    Cusps {
        #[arg(long, default_value_t = 1.0)]
        rho2: f64,
        /// Search square min,max in rho1 and rho3.
        #[arg(long = "box", default_value = "0.1,4")]
        search: Pair,
        /// Multistart seeds per axis.
        #[arg(long, default_value_t = 40)]
        seeds: usize,
        /// Lattice for the discriminant curve.
        #[arg(long, default_value = "0.1,4,200")]
        grid: GridSpec,
    },
    /// Solution-count map of a rho2 section.
    RegionMap {
        #[arg(long, default_value_t = 1.0)]
        rho2: f64,
        #[arg(long, default_value = "0.1,4,200")]
        grid: GridSpec,
    },
    /// Connected non-singular workspace regions.
    Aspects {
        /// Square x-y cell grid min,max,n.
        #[arg(long, allow_hyphen_values = true, default_value = "-3,3,60")]
        grid: GridSpec,
        #[arg(long, default_value_t = 72)]
        phi_cells: usize,
        /// Relative |detM| below which a cell counts as singular.
        #[arg(long, default_value_t = 1e-9)]
        threshold: f64,
    },
    /// Track assembly modes along a joint-space circle.
    Transit {
        #[arg(long, default_value_t = 1.0)]
        rho2: f64,
        /// Loop centre rho1,rho3.
        #[arg(long, default_value = "1.7320508075688772,1")]
        centre: Pair,
        #[arg(long, default_value_t = 0.3)]
        radius: f64,
        #[arg(long, default_value_t = 720)]
        steps: usize,
        /// Centre is a regular point: the loop must not meet either surface.
        #[arg(long)]
        regular: bool,
        /// Track only this FK solution of the first waypoint.
        #[arg(long)]
        start: Option<usize>,
        /// Lattice of the background map.
        #[arg(long, default_value = "0.1,4,200")]
        grid: GridSpec,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Analysis(#[from] Error),
    #[error("{0}")]
    Output(#[from] OutputError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 1 for bad input, 2 for a numerical degeneracy abort.
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Analysis(
                Error::AllCoefficientsZero
                | Error::BothEquationsDegenerate
                | Error::Inconsistent
                | Error::SingularApproach { .. }
                | Error::BranchJump { .. }
                | Error::StartNotOnBranch { .. },
            ) => 2,
            _ => 1,
        }
    }
}

fn parse_floats(s: &str, want: Option<usize>) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("not a number: {p:?}")))
        .collect::<Result<_, _>>()?;
    if let Some(n) = want {
        if v.len() != n {
            return Err(format!("expected {n} comma-separated values, got {}", v.len()));
        }
    }
    if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
        return Err(format!("value is not finite: {bad}"));
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy)]
struct Triple([f64; 3]);

impl FromStr for Triple {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let v = parse_floats(s, Some(3))?;
        Ok(Triple([v[0], v[1], v[2]]))
    }
}

#[derive(Debug, Clone, Copy)]
struct Pair([f64; 2]);

impl FromStr for Pair {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let v = parse_floats(s, Some(2))?;
        Ok(Pair([v[0], v[1]]))
    }
}

#[derive(Debug, Clone)]
struct FloatList(Vec<f64>);

impl FromStr for FloatList {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        parse_floats(s, None).map(FloatList)
    }
}

/// `min,max,n` with `min < max` and `n >= 2`.
#[derive(Debug, Clone, Copy)]
struct GridSpec {
    min: f64,
    max: f64,
    n: usize,
}

impl FromStr for GridSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 3 {
            return Err("grid must be min,max,n".into());
        }
        let b = parse_floats(&parts[..2].join(","), Some(2))?;
        let n: usize = parts[2].trim().parse().map_err(|_| format!("grid size is not an integer: {:?}", parts[2]))?;
        if n < 2 {
            return Err(format!("grid size must be at least 2, got {n}"));
        }
        if b[0] >= b[1] {
            return Err(format!("grid bounds must satisfy min < max, got {},{}", b[0], b[1]));
        }
        Ok(GridSpec { min: b[0], max: b[1], n })
    }
}

impl GridSpec {
    /// Lattice nodes including both bounds.
    fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.min + (self.max - self.min) * i as f64 / (self.n - 1) as f64).collect()
    }

    fn section(&self) -> Result<SectionGrid, Error> {
        SectionGrid::square(self.min, self.max, self.n)
    }

    fn axis(&self) -> Result<Axis, Error> {
        Axis::new(self.min, self.max, self.n)
    }
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--{name} must be positive, got {v}")))
    }
}

/// Argument list without the flags that do not affect results.
fn command_line(args: &[String]) -> String {
    let mut kept = Vec::new();
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
            continue;
        }
        if a == "--threads" || a == "--out" {
            skip = true;
            continue;
        }
        if a.starts_with("--threads=") || a.starts_with("--out=") {
            continue;
        }
        kept.push(a.as_str());
    }
    kept.join(" ")
}

struct Context {
    params: GeometryParams,
    meta: Meta,
    tol: f64,
}

impl Context {
    fn analytic(&self) -> Result<AnalyticGeometry, CliError> {
        Ok(AnalyticGeometry::with_tolerance(self.params, self.tol)?)
    }
}

fn count_colour(count: u8, boundary: bool) -> &'static str {
    match (boundary, count) {
        (true, _) => "white",
        (false, 2) => "#4caf50",
        (false, 4) => "#ffeb3b",
        (false, 6) => "#e53935",
        _ => "white",
    }
}

/// Lattice nodes with Δ and G on them, row-major in `ρ3`.
type SectionFields = (Vec<f64>, Vec<f64>, Vec<f64>);

/// Δ and G sampled on the lattice nodes of a `(ρ1, ρ3)` section.
fn section_fields(g: &AnalyticGeometry, rho2: f64, grid: &GridSpec) -> Result<SectionFields, CliError> {
    let nodes = grid.nodes();
    let rows: Vec<Vec<(f64, f64)>> = nodes
        .par_iter()
        .map(|&r3| {
            nodes
                .iter()
                .map(|&r1| {
                    let j = JointVector::new(r1, rho2, r3)?;
                    Ok((discriminant_surface(g, &j).value, branch_surface(g, &j).value))
                })
                .collect::<Result<Vec<_>, Error>>()
        })
        .collect::<Result<_, _>>()?;
    let (delta, branch) = rows.into_iter().flatten().unzip();
    Ok((nodes, delta, branch))
}

fn map_plot(title: &str, map: &SectionMap) -> Plot {
    let (a, b) = (map.grid.rho1, map.grid.rho3);
    let mut plot = Plot::new(title, "rho1", "rho3", [a.min, a.max], [b.min, b.max]);
    for i3 in 0..b.n {
        for i1 in 0..a.n {
            let c = map.get(i1, i3);
            let (x, y) = map.centre(i1, i3);
            let (hx, hy) = (0.5 * a.width(), 0.5 * b.width());
            plot.cell([x - hx, y - hy], [x + hx, y + hy], count_colour(c.count, c.boundary));
        }
    }
    plot.legend(&[
        ("#4caf50", "2 solutions"),
        ("#ffeb3b", "4 solutions"),
        ("#e53935", "6 solutions"),
        ("white", "0 or boundary"),
    ]);
    plot
}

type Status = Option<String>;

fn run(cli: &Cli, ctx: &Context) -> Result<(Outputs, Status), CliError> {
    let meta = &ctx.meta;
    let mut out = Outputs::default();
    let mut status = None;
    match &cli.command {
        Command::CheckClass => {
            let verdict = check_analytic_class(&ctx.params, ctx.tol);
            out.json = Some(json_document(meta, json!({ "verdict": verdict })));
        }
        Command::Ik { pose } => {
            let p = Pose::new(pose.0[0], pose.0[1], pose.0[2]);
            if !p.is_finite() {
                return Err(Error::InvalidInput("pose is not finite".into()).into());
            }
            let j = inverse_kinematics(&ctx.params, &p);
            out.json = Some(json_document(meta, json!({ "pose": p, "joints": j })));
        }
        Command::Fk { joints, oracle, phi_samples } => {
            let set = if *oracle {
                if *phi_samples < 8 {
                    return Err(CliError::Usage(format!("--phi-samples must be at least 8, got {phi_samples}")));
                }
                forward_kinematics_reference(&ctx.params, joints, *phi_samples)
            } else {
                forward_kinematics_analytic(&ctx.analytic()?, joints)
            };
            if set.degenerate {
                status = Some("forward kinematics is degenerate: a continuum of solutions".to_string());
            }
            let method = if *oracle { "reference" } else { "analytic" };
            out.json = Some(json_document(meta, json!({ "joints": joints, "method": method, "solutions": set })));
        }
        Command::SingWorkspace { grid, phi } => {
            let g = ctx.analytic()?;
            let nodes = grid.nodes();
            let mut csv = Csv::new(meta, &["x", "y", "phi", "f1", "f2", "detM"]);
            for (k, &angle) in phi.0.iter().enumerate() {
                let samples: Vec<_> = nodes
                    .par_iter()
                    .flat_map_iter(|&y| nodes.iter().map(move |&x| (x, y)))
                    .map(|(x, y)| ((x, y), sample_workspace(&g, &Pose::new(x, y, angle))))
                    .collect();
                for ((x, y), s) in &samples {
                    csv.row(&[num(*x), num(*y), num(angle), num(s.f1), num(s.f2), num(s.det_m)]);
                }
                let f1: Vec<f64> = samples.iter().map(|(_, s)| s.f1).collect();
                let f2: Vec<f64> = samples.iter().map(|(_, s)| s.f2).collect();
                let range = [grid.min, grid.max];
                let mut plot = Plot::new(&format!("singular poses at phi = {angle}"), "x", "y", range, range);
                plot.segments(&Field { xs: &nodes, ys: &nodes, values: &f1 }.zero_segments(), "#1e66d0", 1.5);
                plot.segments(&Field { xs: &nodes, ys: &nodes, values: &f2 }.zero_segments(), "#d02a1e", 1.5);
                plot.legend(&[("#1e66d0", "f1 = 0"), ("#d02a1e", "f2 = 0")]);
                out.svg(meta, format!("_phi{k}.svg"), plot.render());
            }
            out.csv = Some(csv.into_string());
        }
        Command::SingJointspace { rho2, grid } => {
            let g = ctx.analytic()?;
            let (nodes, delta, branch) = section_fields(&g, *rho2, grid)?;
            let mut csv = Csv::new(meta, &["rho1", "rho3", "delta", "branch"]);
            for (idx, (d, b)) in delta.iter().zip(&branch).enumerate() {
                let (r1, r3) = (nodes[idx % nodes.len()], nodes[idx / nodes.len()]);
                csv.row(&[num(r1), num(r3), num(*d), num(*b)]);
            }
            let range = [grid.min, grid.max];
            let mut plot =
                Plot::new(&format!("joint-space singularities at rho2 = {rho2}"), "rho1", "rho3", range, range);
            plot.segments(&Field { xs: &nodes, ys: &nodes, values: &branch }.zero_segments(), "#1e66d0", 1.5);
            plot.segments(&Field { xs: &nodes, ys: &nodes, values: &delta }.zero_segments(), "black", 2.0);
            plot.legend(&[("black", "discriminant = 0"), ("#1e66d0", "branch surface = 0")]);
            out.svg(meta, ".svg", plot.render());
            out.csv = Some(csv.into_string());
        }
        Command::Cusps { rho2, search, seeds, grid } => {
            let g = ctx.analytic()?;
            JointVector::new(0.0, *rho2, 0.0)?;
            if search.0[0] >= search.0[1] {
                return Err(CliError::Usage("--box must satisfy min < max".into()));
            }
            if *seeds < 2 {
                return Err(CliError::Usage(format!("--seeds must be at least 2, got {seeds}")));
            }
            let found = find_cusps_in_section(
                &g,
                *rho2,
                &SearchBox::square(search.0[0], search.0[1]),
                &SeedGrid { per_axis: *seeds, ..Default::default() },
            );
            let (nodes, delta, _) = section_fields(&g, *rho2, grid)?;
            let curve = Field { xs: &nodes, ys: &nodes, values: &delta }.zero_segments();
            let mut csv = Csv::new(meta, &["kind", "index", "rho1", "rho3"]);
            for (i, seg) in curve.iter().enumerate() {
                for q in seg {
                    csv.row(&["curve".into(), i.to_string(), num(q[0]), num(q[1])]);
                }
            }
            for (i, c) in found.points.iter().enumerate() {
                csv.row(&["cusp".into(), i.to_string(), num(c.rho1), num(c.rho3)]);
            }
            let range = [grid.min, grid.max];
            let mut plot = Plot::new(&format!("cusps at rho2 = {rho2}"), "rho1", "rho3", range, range);
            plot.segments(&curve, "black", 2.0);
            for c in &found.points {
                plot.marker([c.rho1, c.rho3], "#d02a1e");
            }
            plot.legend(&[("black", "discriminant = 0"), ("#d02a1e", "cusp")]);
            out.svg(meta, ".svg", plot.render());
            out.csv = Some(csv.into_string());
            out.json = Some(json_document(
                meta,
                json!({
                    "rho2": rho2,
                    "search_box": search.0,
                    "seeds_per_axis": seeds,
                    "cusps": found.points,
                    "non_converged": found.non_converged,
                    "discarded": found.discarded,
                }),
            ));
        }
        Command::RegionMap { rho2, grid } => {
            let g = ctx.analytic()?;
            let map = classify_section(&g, *rho2, &grid.section()?)?;
            let mut csv = Csv::new(meta, &["rho1", "rho3", "count", "boundary"]);
            for i3 in 0..map.grid.rho3.n {
                for i1 in 0..map.grid.rho1.n {
                    let (r1, r3) = map.centre(i1, i3);
                    let c = map.get(i1, i3);
                    csv.row(&[num(r1), num(r3), c.count.to_string(), u8::from(c.boundary).to_string()]);
                }
            }
            let jumps = section_count_jumps(&g, &map, JUMP_REFINE_TOL);
            let mut by_change: BTreeMap<String, usize> = BTreeMap::new();
            let (mut delta_only, mut branch_only, mut both, mut neither) = (0, 0, 0, 0);
            for j in &jumps {
                *by_change.entry(format!("{:+}", j.change())).or_default() += 1;
                match (j.delta_flips, j.branch_flips) {
                    (true, false) => delta_only += 1,
                    (false, true) => branch_only += 1,
                    (true, true) => both += 1,
                    (false, false) => neither += 1,
                }
            }
            let histogram: BTreeMap<String, usize> =
                map.histogram().iter().enumerate().filter(|(_, n)| **n > 0).map(|(k, n)| (k.to_string(), *n)).collect();
            out.json = Some(json_document(
                meta,
                json!({
                    "rho2": rho2,
                    "grid": map.grid,
                    "histogram": histogram,
                    "boundary_cells": map.boundary_count(),
                    "count_changes": {
                        "total": jumps.len(),
                        "by_change": by_change,
                        "across_discriminant_only": delta_only,
                        "across_branch_surface_only": branch_only,
                        "across_both": both,
                        "without_sign_change": neither,
                    },
                }),
            ));
            out.svg(meta, ".svg", map_plot(&format!("solution count at rho2 = {rho2}"), &map).render());
            out.csv = Some(csv.into_string());
        }
        Command::Aspects { grid, phi_cells, threshold } => {
            let g = ctx.analytic()?;
            positive("threshold", *threshold)?;
            let ws = WorkspaceGrid::new(grid.axis()?, grid.axis()?, *phi_cells)?;
            let report = count_aspects(&g, &ws, *threshold);
            out.json = Some(json_document(meta, json!({ "grid": ws, "threshold": threshold, "aspects": report })));
        }
        Command::Transit { rho2, centre, radius, steps, regular, start, grid } => {
            let g = ctx.analytic()?;
            positive("radius", *radius)?;
            let c = JointVector::new(centre.0[0], *rho2, centre.0[1])?;
            let path: JointPath = if *regular {
                make_loop(&g, &c, *radius, *steps, 0)?
            } else {
                make_cusp_loop(&g, &c, *radius, *steps)?
            };
            let crossings = loop_crossings(&g, &path);
            let opts = TrackOptions::default();
            let starts = forward_kinematics_analytic(&g, &path.points[0]).poses;
            let chosen: Vec<usize> = match start {
                Some(k) if *k >= starts.len() => {
                    return Err(CliError::Usage(format!(
                        "--start {k} is out of range: the first waypoint has {} solutions",
                        starts.len()
                    )))
                }
                Some(k) => vec![*k],
                None => (0..starts.len()).collect(),
            };
            let mut csv = Csv::new(meta, &["run", "step", "rho1", "rho2", "rho3", "x", "y", "phi", "detM"]);
            let mut runs = Vec::new();
            for &k in &chosen {
                match track_branch(&g, &path, starts[k].pose, &opts) {
                    Ok(r) => {
                        for (i, s) in r.trace.iter().enumerate() {
                            let j = s.joints;
                            csv.row(&[
                                k.to_string(),
                                i.to_string(),
                                num(j.rho1),
                                num(j.rho2),
                                num(j.rho3),
                                num(s.pose.x),
                                num(s.pose.y),
                                num(s.pose.phi),
                                num(s.det_m),
                            ]);
                        }
                        runs.push(json!({ "start_index": k, "status": "ok", "report": r }));
                    }
                    Err(e) if start.is_some() => return Err(e.into()),
                    Err(e) => runs.push(json!({
                        "start_index": k,
                        "start_pose": starts[k].pose,
                        "status": "aborted",
                        "error": e.to_string(),
                    })),
                }
            }
            let map = classify_section(&g, *rho2, &grid.section()?)?;
            let mut plot = map_plot(&format!("loop at rho2 = {rho2}"), &map);
            let pts: Vec<[f64; 2]> = path.points.iter().map(|j| [j.rho1, j.rho3]).collect();
            plot.polyline(&pts, "black", 2.0);
            plot.marker(centre.0, "black");
            out.svg(meta, ".svg", plot.render());
            out.csv = Some(csv.into_string());
            out.json = Some(json_document(
                meta,
                json!({
                    "loop": {
                        "centre": c,
                        "radius": radius,
                        "steps": steps,
                        "kind": if *regular { "regular" } else { "cusp" },
                        "discriminant_crossings": crossings.delta_sign_changes,
                        "branch_surface_crossings": crossings.branch_sign_changes,
                    },
                    "track_options": opts,
                    "runs": runs,
                }),
            ));
        }
    }
    Ok((out, status))
}

fn load_geometry(cli: &Cli) -> Result<GeometryParams, CliError> {
    match &cli.geometry {
        None => Ok(GeometryParams::example()),
        Some(path) => {
            let text = output::read_file(path)?;
            GeometryParams::from_json(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
        }
    }
}

fn main_inner(args: Vec<String>) -> Result<Status, CliError> {
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return Ok(None);
        }
        Err(e) => return Err(CliError::Usage(e.render().to_string().trim_end().to_string())),
    };
    positive("tol", cli.tol)?;
    if cli.threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    let params = load_geometry(&cli)?;
    let ctx = Context {
        params,
        meta: Meta {
            tool: env!("CARGO_BIN_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command_line(&args[1..]),
            geometry: params,
            tol: cli.tol,
            seed: cli.seed,
        },
        tol: cli.tol,
    };
    let (outputs, status) = run(&cli, &ctx)?;
    for path in outputs.emit(cli.out.as_deref())? {
        eprintln!("wrote {}", path.display());
    }
    Ok(status)
}

fn main() -> ExitCode {
    match main_inner(std::env::args().collect()) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            let text = e.to_string();
            if text.starts_with("error:") {
                eprintln!("{text}");
            } else {
                eprintln!("error: {text}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
