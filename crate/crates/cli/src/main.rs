//! `surfremap` command-line harness: generates meshes and runs the transfer
//! experiments, writing CSV (or JSON) records plus a JSON metadata sidecar.

mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use output::{Sink, Table};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use surfremap::experiment::{self, MeshFamily};
use surfremap::fields::{error_norms, to_spherical, AnalyticField};
use surfremap::mesh::io::save_mesh;
use surfremap::remap::{build_plan, Method, RemapConfig};
use surfremap::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "surfremap", version, about = "High-order non-oscillatory remap between sphere meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a sphere mesh of the given level.
    GenMesh(GenMeshArgs),
    /// Transfer an analytic field once and report errors per target node.
    Remap(Common),
    /// Errors and observed rates over a range of levels, both directions.
    Convergence(Common),
    /// Error versus the radius ratio σ of the scaled Buhmann weights.
    SweepSigma(Common),
    /// Repeated round trips between the two mesh families.
    Repeat(Common),
    /// Discontinuity indicators and markers on the source mesh.
    Detect(Common),
    /// Values along a great circle through the poles after one transfer.
    Trace(Common),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Family {
    Icosphere,
    CubedSphere,
}

impl From<Family> for MeshFamily {
    fn from(f: Family) -> Self {
        match f {
            Family::Icosphere => MeshFamily::Icosphere,
            Family::CubedSphere => MeshFamily::CubedSphere,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    WlsEnor,
    Wls,
    Linear,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct GenMeshArgs {
    #[arg(long, value_enum, default_value = "icosphere")]
    family: Family,
    #[arg(long = "source-level", default_value_t = 1)]
    level: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct Common {
    /// Source mesh level (first level for `convergence`).
    #[arg(long, default_value_t = 1)]
    source_level: usize,
    /// Target mesh level (last level for `convergence`); defaults to the
    /// source level.
    #[arg(long)]
    target_level: Option<usize>,
    /// Mesh family of the source; the target is the other family.
    #[arg(long, value_enum, default_value = "icosphere")]
    source_family: Family,
    /// f1, f2, f3, f4 or const.
    #[arg(long, default_value = "f1")]
    field: String,
    #[arg(long, value_enum, default_value = "wls-enor")]
    method: MethodArg,
    #[arg(long, default_value_t = 4)]
    degree: usize,
    #[arg(long, default_value_t = 2)]
    eno_degree: usize,
    /// Radius ratio σ; the tuned default for the degree when absent.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, default_value_t = 100)]
    steps: usize,
    /// Round trips after which a great-circle trace is written.
    #[arg(long, value_delimiter = ',')]
    trace_at: Vec<usize>,
    /// Azimuth of the traced great circle.
    #[arg(long, default_value_t = 0.0)]
    phi: f64,
    /// Output file; records go to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

impl Common {
    fn field(&self) -> Result<AnalyticField> {
        AnalyticField::from_name(&self.field)
    }

    fn config(&self) -> Result<RemapConfig> {
        let method = match self.method {
            MethodArg::WlsEnor => Method::WlsEnor,
            MethodArg::Wls => Method::Wls,
            MethodArg::Linear => Method::Linear,
        };
        let cfg = RemapConfig {
            method,
            degree: self.degree,
            eno_degree: self.eno_degree,
            sigma: self.sigma,
            ..Default::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn target_level(&self) -> usize {
        self.target_level.unwrap_or(self.source_level)
    }

    fn sink(&self) -> Sink {
        Sink::new(self.out.clone(), self.format)
    }

    fn meta(&self, command: &str) -> serde_json::Value {
        json!({
            "schema_version": output::SCHEMA_VERSION,
            "tool_version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "source_family": format!("{:?}", MeshFamily::from(self.source_family)),
            "method": format!("{:?}", self.method),
            "format": format!("{:?}", self.format),
            "spec": {
                "source_level": self.source_level,
                "target_level": self.target_level(),
                "field": self.field,
                "degree": self.degree,
                "eno_degree": self.eno_degree,
                "sigma": self.sigma,
                "steps": self.steps,
                "trace_at": self.trace_at,
                "phi": self.phi,
            },
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_configuration() { 2 } else { 3 })
        }
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::GenMesh(a) => {
            let mesh = experiment::family_mesh(a.family.into(), a.level)?;
            save_mesh(&mesh, &a.out)
        }
        Command::Remap(c) => cmd_remap(&c),
        Command::Convergence(c) => cmd_convergence(&c),
        Command::SweepSigma(c) => cmd_sweep_sigma(&c),
        Command::Repeat(c) => cmd_repeat(&c),
        Command::Detect(c) => cmd_detect(&c),
        Command::Trace(c) => cmd_trace(&c),
    }
}

fn meshes(c: &Common) -> Result<(Arc<surfremap::mesh::SurfaceMesh>, Arc<surfremap::mesh::SurfaceMesh>)> {
    let fam: MeshFamily = c.source_family.into();
    let s = experiment::family_mesh(fam, c.source_level)?;
    let t = experiment::family_mesh(fam.other(), c.target_level())?;
    Ok((Arc::new(s), Arc::new(t)))
}

fn cmd_remap(c: &Common) -> Result<()> {
    let field = c.field()?;
    let cfg = c.config()?;
    let (s, t) = meshes(c)?;
    let plan = build_plan(s.clone(), t.clone(), cfg)?;
    let out = plan.apply(&field.sample(s.nodes()))?;
    let exact = field.sample(t.nodes());
    let norms = error_norms(&out.values, &exact)?;
    let mut table = Table::new(&["node", "theta", "phi", "value", "exact", "marked", "limited"]);
    for i in 0..t.node_count() {
        let (theta, phi) = to_spherical(t.node(i))?;
        table.row(vec![
            i.into(),
            theta.into(),
            phi.into(),
            out.values[i].into(),
            exact[i].into(),
            out.target_markers[i].into(),
            out.limiter_active[i].into(),
        ]);
    }
    let mut meta = c.meta("remap");
    meta["summary"] = json!({
        "source_nodes": s.node_count(),
        "target_nodes": t.node_count(),
        "l2": norms.l2,
        "linf": norms.linf,
        "diagnostics": out.diagnostics,
    });
    c.sink().write(&table, &meta)
}

fn cmd_convergence(c: &Common) -> Result<()> {
    let field = c.field()?;
    let cfg = c.config()?;
    let last = c.target_level();
    if last <= c.source_level {
        return Err(Error::Config("convergence needs --target-level above --source-level".into()));
    }
    let levels: Vec<usize> = (c.source_level..=last).collect();
    let mut table = Table::new(&["source", "level", "source_nodes", "target_nodes", "l1", "l2", "linf", "rate_l2", "rate_linf"]);
    let mut reports = Vec::new();
    for fam in [MeshFamily::Icosphere, MeshFamily::CubedSphere] {
        let r = experiment::convergence(&field, cfg, fam, &levels)?;
        for (k, l) in r.levels.iter().enumerate() {
            let rate = |v: &[f64]| if k == 0 { output::Cell::Empty } else { v[k - 1].into() };
            table.row(vec![
                format!("{fam:?}").into(),
                l.level.into(),
                l.source_nodes.into(),
                l.target_nodes.into(),
                l.l1.into(),
                l.l2.into(),
                l.linf.into(),
                rate(&r.rates_l2),
                rate(&r.rates_linf),
            ]);
        }
        reports.push(json!({ "source": format!("{fam:?}"), "rates_l2": r.rates_l2, "rates_linf": r.rates_linf }));
    }
    let mut meta = c.meta("convergence");
    meta["summary"] = json!(reports);
    c.sink().write(&table, &meta)
}

fn cmd_sweep_sigma(c: &Common) -> Result<()> {
    let field = c.field()?;
    let degrees = if c.degree == 4 && c.sigma.is_none() { vec![2, 4, 6] } else { vec![c.degree] };
    let mut table = Table::new(&["degree", "sigma", "l2"]);
    let mut summary = Vec::new();
    for p in degrees {
        let s = experiment::sweep_sigma(&field, p, c.source_level, &experiment::default_sigma_grid())?;
        for pt in &s.points {
            table.row(vec![p.into(), pt.sigma.into(), pt.l2.into()]);
        }
        summary.push(json!({
            "degree": p,
            "argmin": s.argmin,
            "min_l2": s.min_l2,
            "inverse_distance_l2": s.inverse_distance_l2,
            "v_shaped": s.v_shaped,
        }));
    }
    let mut meta = c.meta("sweep-sigma");
    meta["summary"] = json!(summary);
    c.sink().write(&table, &meta)
}

fn cmd_repeat(c: &Common) -> Result<()> {
    let field = c.field()?;
    let cfg = c.config()?;
    if c.steps == 0 {
        return Err(Error::Config("--steps must be at least 1".into()));
    }
    if c.source_family != Family::Icosphere {
        return Err(Error::Config("repeated transfer starts on the icosphere".into()));
    }
    let r = experiment::repeat(&field, cfg, c.source_level, c.steps, &c.trace_at)?;
    let mut table = Table::new(&[
        "step", "l1", "l2", "linf", "min", "max", "integral", "conservation_error", "marked_targets", "limiter_activations",
    ]);
    for s in &r.steps {
        table.row(vec![
            s.step.into(),
            s.l1.into(),
            s.l2.into(),
            s.linf.into(),
            s.min.into(),
            s.max.into(),
            s.integral.into(),
            s.conservation_error.into(),
            s.marked_targets.into(),
            s.limiter_activations.into(),
        ]);
    }
    let sink = c.sink();
    if !r.snapshots.is_empty() {
        let mesh = experiment::family_mesh(MeshFamily::Icosphere, c.source_level)?;
        let tol = 0.5 * mesh.metrics().h_global;
        for (step, values) in &r.snapshots {
            let trace = experiment::trace(&mesh, values, c.phi, tol)?;
            sink.write_aux(&format!("trace-{step}"), &trace_table(&trace, &field, &mesh))?;
        }
    }
    let mut meta = c.meta("repeat");
    meta["summary"] = json!({ "last": r.steps.last(), "snapshots": r.snapshots.iter().map(|s| s.0).collect::<Vec<_>>() });
    sink.write(&table, &meta)
}

fn trace_table(trace: &[experiment::TracePoint], field: &AnalyticField, mesh: &surfremap::mesh::SurfaceMesh) -> Table {
    let mut t = Table::new(&["node", "s", "theta", "value", "exact"]);
    for p in trace {
        t.row(vec![p.node.into(), p.s.into(), p.theta.into(), p.value.into(), field.eval(mesh.node(p.node)).into()]);
    }
    t
}

fn cmd_detect(c: &Common) -> Result<()> {
    let field = c.field()?;
    let fam: MeshFamily = c.source_family.into();
    let mesh = experiment::family_mesh(fam, c.source_level)?;
    let r = experiment::detect_on(&field, &mesh, fam, c.source_level)?;
    let ind = r.indicators.as_ref().ok_or(Error::MissingContext)?;
    let mut table = Table::new(&["node", "theta", "phi", "beta", "tau", "marked"]);
    for v in 0..mesh.node_count() {
        let (theta, phi) = to_spherical(mesh.node(v))?;
        table.row(vec![v.into(), theta.into(), phi.into(), ind.beta[v].into(), ind.tau[v].into(), ind.markers[v].into()]);
    }
    let mut alpha = Table::new(&["element", "alpha"]);
    for (e, a) in ind.alpha.iter().enumerate() {
        alpha.row(vec![e.into(), (*a).into()]);
    }
    let sink = c.sink();
    sink.write_aux("alpha", &alpha)?;
    // Target markers for a transfer to the other family at the same level.
    let (s, t) = (Arc::new(mesh), Arc::new(experiment::family_mesh(fam.other(), c.target_level())?));
    let plan = build_plan(s.clone(), t, RemapConfig { degree: c.degree, ..Default::default() })?;
    let out = plan.apply(&field.sample(s.nodes()))?;
    let mut meta = c.meta("detect");
    meta["summary"] = json!({
        "nodes": r.nodes,
        "source_marked": r.marked,
        "target_marked": out.diagnostics.target_marked,
        "farthest_marker_h": r.farthest_marker_h,
        "breaks": r.breaks,
        "delta_f_global": ind.delta_f_global,
    });
    sink.write(&table, &meta)
}

fn cmd_trace(c: &Common) -> Result<()> {
    let field = c.field()?;
    let cfg = c.config()?;
    let (s, t) = meshes(c)?;
    let plan = build_plan(s.clone(), t.clone(), cfg)?;
    let out = plan.apply(&field.sample(s.nodes()))?;
    let tol = 0.5 * t.metrics().h_global;
    let trace = experiment::trace(&t, &out.values, c.phi, tol)?;
    let mut meta = c.meta("trace");
    meta["summary"] = json!({ "points": trace.len(), "tolerance": tol });
    c.sink().write(&trace_table(&trace, &field, &t), &meta)
}
