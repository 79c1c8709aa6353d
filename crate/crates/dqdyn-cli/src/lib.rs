//! Command-line front end: load a robot description, generate sinusoidal
//! trajectories, run the composed or monolithic dynamics, compare the two
//! with RMSE/CMC, integrate the pose controller's error dynamics, and
//! export the subsystem graph.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use dqdyn::composition::{dmc, dmc_forward_recursion, export_graph_dot, NoSensors};
use dqdyn::control::{integrate_scenario, project_generalized, ControlGains, LeafTarget};
use dqdyn::dq::DualQuaternion;
use dqdyn::metrics::{cmc, rmse, summarize, Waveform};
use dqdyn::model::{parse_robot_description, RobotDescription, RobotTree};
use dqdyn::oracle::{flatten, monolithic_ne, FlatTree};
use dqdyn::trajectory::{subsystem_states_at, TrajectoryConfig};

#[derive(Parser)]
#[command(
    name = "dqdyn",
    about = "Inverse dynamics of branched robots by modular composition",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub mode: Mode,
}

#[derive(Subcommand)]
pub enum Mode {
    /// Composed inverse dynamics over a sinusoidal trajectory (torques.csv).
    Dmc(RunArgs),
    /// Monolithic single-pass dynamics over the same trajectory (torques.csv).
    Monolithic(RunArgs),
    /// Both backends plus per-joint RMSE/CMC (torques.csv,
    /// torques_monolithic.csv, metrics.csv).
    Compare(RunArgs),
    /// Closed-loop pose-error integration from the file's [control]
    /// scenario (errors.csv).
    Control(RunArgs),
    /// Subsystem graph in DOT format (topology.dot).
    Graph(RunArgs),
}

#[derive(Args)]
pub struct RunArgs {
    /// Robot description file.
    #[arg(long)]
    pub robot: PathBuf,
    /// Sinusoid amplitude, rad (or m for prismatic coordinates).
    #[arg(long, default_value_t = 0.01)]
    pub amplitude: f64,
    /// Sinusoid frequency, Hz.
    #[arg(long, default_value_t = 1.0)]
    pub frequency: f64,
    /// Trajectory duration, s.
    #[arg(long, default_value_t = 10.0)]
    pub duration: f64,
    /// Sample rate, Hz.
    #[arg(long, default_value_t = 100.0)]
    pub rate: f64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Override the file's gravity vector, as "gx,gy,gz".
    #[arg(long, value_parser = parse_gravity)]
    pub gravity: Option<Gravity>,
}

#[derive(Clone, Copy, Debug)]
pub struct Gravity(pub [f64; 3]);

fn parse_gravity(s: &str) -> Result<Gravity, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err("expected gx,gy,gz".into());
    }
    let mut g = [0.0; 3];
    for (slot, p) in g.iter_mut().zip(&parts) {
        *slot = p
            .trim()
            .parse()
            .map_err(|_| format!("bad gravity component {p:?}"))?;
    }
    Ok(Gravity(g))
}

#[derive(Debug)]
pub enum CliError {
    /// Robot file missing or unreadable.
    RobotFile(PathBuf, std::io::Error),
    Io(std::io::Error),
    Other(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::RobotFile(p, e) => write!(f, "cannot read robot file {}: {e}", p.display()),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Other(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::RobotFile(..) => 2,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn other<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Other(e.to_string())
}

fn load(args: &RunArgs) -> Result<RobotDescription, CliError> {
    let text = std::fs::read_to_string(&args.robot)
        .map_err(|e| CliError::RobotFile(args.robot.clone(), e))?;
    let mut desc = parse_robot_description(&text).map_err(other)?;
    if let Some(Gravity(g)) = args.gravity {
        desc.tree.gravity = dqdyn::dq::Quaternion::pure(g[0], g[1], g[2]);
    }
    Ok(desc)
}

fn trajectory(args: &RunArgs) -> Result<TrajectoryConfig, CliError> {
    let cfg = TrajectoryConfig {
        amplitude: args.amplitude,
        frequency_hz: args.frequency,
        duration: args.duration,
        rate_hz: args.rate,
    };
    cfg.validate().map_err(other)?;
    Ok(cfg)
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// One column label per DoF, subsystems in ascending id order.
fn joint_labels(tree: &RobotTree) -> Vec<String> {
    let mut labels = Vec::new();
    for id in tree.ids() {
        let sub = tree.subsystem(id).unwrap();
        for k in 1..=sub.dof() {
            labels.push(format!("s{id}_j{k}"));
        }
    }
    labels
}

fn write_csv(
    path: &Path,
    labels: &[String],
    times: &[f64],
    rows: &[Vec<f64>],
) -> Result<(), CliError> {
    let mut out = String::from("time");
    for l in labels {
        out.push(',');
        out.push_str(l);
    }
    out.push('\n');
    for (t, row) in times.iter().zip(rows) {
        out.push_str(&fmt_f64(*t));
        for v in row {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Generalized forces from the composed dynamics at every sample.
fn dmc_rows(
    tree: &RobotTree,
    cfg: &TrajectoryConfig,
    times: &[f64],
) -> Result<Vec<Vec<f64>>, CliError> {
    let mut rows = Vec::with_capacity(times.len());
    for &t in times {
        let states = subsystem_states_at(tree, cfg.amplitude, cfg.frequency_hz, t);
        let result = dmc(tree, &states, &NoSensors).map_err(other)?;
        let mut row = Vec::new();
        for id in tree.ids() {
            let links = tree.subsystem(id).unwrap().links().ok_or_else(|| {
                CliError::Other(format!(
                    "subsystem {id} is a black box; trajectory modes need a fully modeled robot"
                ))
            })?;
            row.extend(project_generalized(&result.gamma[&id], links).map_err(other)?);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Generalized forces from the monolithic reference at every sample.
fn monolithic_rows(
    tree: &RobotTree,
    flat: &FlatTree,
    cfg: &TrajectoryConfig,
    times: &[f64],
) -> Result<Vec<Vec<f64>>, CliError> {
    let id_order = flat.id_order();
    let mut rows = Vec::with_capacity(times.len());
    for &t in times {
        let states = subsystem_states_at(tree, cfg.amplitude, cfg.frequency_hz, t);
        // Flatten per-subsystem states into the oracle's global layout.
        let mut offsets: BTreeMap<u32, usize> = BTreeMap::new();
        let (mut q, mut qd, mut qdd) = (Vec::new(), Vec::new(), Vec::new());
        for link in &flat.links {
            let st = &states[&link.subsystem];
            let off = offsets.entry(link.subsystem).or_insert(0);
            let d = link.link.joint.dof();
            q.extend_from_slice(&st.q[*off..*off + d]);
            qd.extend_from_slice(&st.qdot[*off..*off + d]);
            qdd.extend_from_slice(&st.qddot[*off..*off + d]);
            *off += d;
        }
        let wrenches = monolithic_ne(flat, &q, &qd, &qdd, &BTreeMap::new()).map_err(other)?;
        let mut row = Vec::new();
        for &idx in &id_order {
            let w = DualQuaternion::from_vec6(wrenches[idx]);
            let link = std::slice::from_ref(&flat.links[idx].link);
            row.extend(project_generalized(&[w], link).map_err(other)?);
        }
        rows.push(row);
    }
    Ok(rows)
}

fn metrics_csv(
    labels: &[String],
    times: &[f64],
    a: &[Vec<f64>],
    b: &[Vec<f64>],
) -> Result<String, CliError> {
    let dt = if times.len() > 1 { times[1] - times[0] } else { 1.0 };
    let column = |rows: &[Vec<f64>], j: usize| -> Result<Waveform, CliError> {
        Waveform::new(rows.iter().map(|r| r[j]).collect(), dt).map_err(other)
    };
    let mut rmses = Vec::new();
    let mut cmcs = Vec::new();
    let mut out = String::from("joint,rmse,cmc\n");
    for (j, label) in labels.iter().enumerate() {
        let wa = column(a, j)?;
        let wb = column(b, j)?;
        let r = rmse(&wa, &wb).map_err(other)?;
        let c = cmc(&[&wa, &wb]).map_err(other)?;
        let _ = writeln!(out, "{label},{},{}", fmt_f64(r), fmt_f64(c));
        rmses.push(r);
        cmcs.push(c);
    }
    let (sr, sc) = (summarize(&rmses), summarize(&cmcs));
    for (stat, r, c) in [
        ("min", sr.min, sc.min),
        ("max", sr.max, sc.max),
        ("mean", sr.mean, sc.mean),
        ("std", sr.std, sc.std),
    ] {
        let _ = writeln!(out, "{stat},{},{}", fmt_f64(r), fmt_f64(c));
    }
    Ok(out)
}

fn run_control(args: &RunArgs) -> Result<(), CliError> {
    let desc = load(args)?;
    let scenario = desc
        .control
        .as_ref()
        .ok_or_else(|| CliError::Other("robot file has no [control] section".into()))?;
    let gains = ControlGains::new(scenario.kp, scenario.kv).map_err(other)?;
    let targets: Vec<LeafTarget> = scenario.targets.iter().map(LeafTarget::from).collect();

    // Leaf end-effector poses at the zero configuration give the initial
    // errors.
    let states: dqdyn::composition::SubsystemStates = desc
        .tree
        .ids()
        .filter_map(|id| {
            let sub = desc.tree.subsystem(id)?;
            sub.links()
                .map(|_| (id, dqdyn::serial::ChainState::zero(sub.dof())))
        })
        .collect();
    let fwd = dmc_forward_recursion(&desc.tree, &states, &NoSensors).map_err(other)?;
    let mut initial = BTreeMap::new();
    for t in &targets {
        let pose = fwd.end_effector_world(t.leaf).ok_or_else(|| {
            CliError::Other(format!("control target {} is not a modeled subsystem", t.leaf))
        })?;
        initial.insert(t.leaf, pose);
    }

    let traj = integrate_scenario(&initial, &targets, &gains, scenario.dt, scenario.duration)
        .map_err(other)?;

    let mut labels: Vec<String> = targets.iter().map(|t| format!("leaf_{}", t.leaf)).collect();
    labels.push("total".into());
    let rows: Vec<Vec<f64>> = (0..traj.times.len())
        .map(|k| {
            let mut row: Vec<f64> = traj.per_leaf.iter().map(|n| n[k]).collect();
            row.push(traj.total[k]);
            row
        })
        .collect();
    std::fs::create_dir_all(&args.out)?;
    write_csv(&args.out.join("errors.csv"), &labels, &traj.times, &rows)
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.mode {
        Mode::Dmc(args) => {
            let desc = load(args)?;
            let cfg = trajectory(args)?;
            let times = cfg.sample_times();
            let rows = dmc_rows(&desc.tree, &cfg, &times)?;
            std::fs::create_dir_all(&args.out)?;
            write_csv(
                &args.out.join("torques.csv"),
                &joint_labels(&desc.tree),
                &times,
                &rows,
            )
        }
        Mode::Monolithic(args) => {
            let desc = load(args)?;
            let cfg = trajectory(args)?;
            let times = cfg.sample_times();
            let flat = flatten(&desc.tree).map_err(other)?;
            let rows = monolithic_rows(&desc.tree, &flat, &cfg, &times)?;
            std::fs::create_dir_all(&args.out)?;
            write_csv(
                &args.out.join("torques.csv"),
                &joint_labels(&desc.tree),
                &times,
                &rows,
            )
        }
        Mode::Compare(args) => {
            let desc = load(args)?;
            let cfg = trajectory(args)?;
            let times = cfg.sample_times();
            let labels = joint_labels(&desc.tree);
            let composed = dmc_rows(&desc.tree, &cfg, &times)?;
            let flat = flatten(&desc.tree).map_err(other)?;
            let reference = monolithic_rows(&desc.tree, &flat, &cfg, &times)?;
            std::fs::create_dir_all(&args.out)?;
            write_csv(&args.out.join("torques.csv"), &labels, &times, &composed)?;
            write_csv(
                &args.out.join("torques_monolithic.csv"),
                &labels,
                &times,
                &reference,
            )?;
            let metrics = metrics_csv(&labels, &times, &composed, &reference)?;
            std::fs::write(args.out.join("metrics.csv"), metrics)?;
            Ok(())
        }
        Mode::Control(args) => run_control(args),
        Mode::Graph(args) => {
            let desc = load(args)?;
            std::fs::create_dir_all(&args.out)?;
            std::fs::write(args.out.join("topology.dot"), export_graph_dot(&desc.tree))?;
            Ok(())
        }
    }
}
