//! Robot, scenario, sweep and comparison documents.
//!
//! Files use SI units unless a `units` block selects millimetres or grams.
//! Segment numbers in files are 1-based.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use pac_core::actuation::symmetric_routing;
use pac_core::kinematics::ModelKind;
use pac_core::solver::STANDARD_GRAVITY;
use pac_core::{
    PointLoad, RobotState, SegmentParams, SegmentState, SolverOptions, StaticsProblem, StiffnessModel, TendonCommand,
    TendonRouting,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const DEFAULT_GAIN: f64 = pac_core::actuation::DEFAULT_GAIN;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LengthUnit {
    #[default]
    M,
    Mm,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MassUnit {
    #[default]
    Kg,
    G,
}

/// Optional unit header. With `mm`, lengths are in millimetres, axial
/// stiffness and servo gains in N/mm, bending and torsion stiffness and
/// moments in N·mm. Gravity is always m/s².
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Units {
    #[serde(default)]
    pub length: LengthUnit,
    #[serde(default)]
    pub mass: MassUnit,
}

impl Units {
    fn length(&self) -> f64 {
        match self.length {
            LengthUnit::M => 1.0,
            LengthUnit::Mm => 1e-3,
        }
    }

    fn mass(&self) -> f64 {
        match self.mass {
            MassUnit::Kg => 1.0,
            MassUnit::G => 1e-3,
        }
    }
}

fn scale_units(units: Option<Units>) -> (f64, f64) {
    let u = units.unwrap_or_default();
    (u.length(), u.mass())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TendonSpec {
    /// 1-based segment the tendon terminates on.
    pub segment: usize,
    pub radius: f64,
    /// Radians.
    pub azimuth: f64,
    pub stations: Vec<f64>,
}

/// Shorthand for `count` tendons per segment at equal azimuths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetricTendons {
    pub count: usize,
    pub radius: f64,
    pub guides: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StiffnessSpec {
    /// Bending stiffening per metre of contraction.
    #[serde(default)]
    pub contraction_stiffening: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<Units>,
    pub segments: Vec<SegmentParams>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tendons: Vec<TendonSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetric_tendons: Option<SymmetricTendons>,
    /// Base-frame gravity (m/s²); defaults to `(0, 0, −9.81)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gravity: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stiffness: Option<StiffnessSpec>,
}

/// A robot description in SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct Robot {
    pub params: Vec<SegmentParams>,
    pub tendons: Vec<TendonRouting>,
    pub gravity: Vector3<f64>,
    pub stiffness: StiffnessModel,
}

impl Robot {
    pub fn load(path: &Path) -> CliResult<Self> {
        Self::from_file(read_json(path)?)
    }

    pub fn from_file(file: RobotFile) -> CliResult<Self> {
        let (lu, mu) = scale_units(file.units);
        if file.segments.is_empty() {
            return Err(CliError::invalid("robot has no segments"));
        }
        let params: Vec<SegmentParams> = file
            .segments
            .iter()
            .map(|p| SegmentParams {
                rest_length: p.rest_length * lu,
                radius: p.radius * lu,
                mass: p.mass * mu,
                k_bending: p.k_bending * lu,
                k_torsion: p.k_torsion * lu,
                k_axial: p.k_axial / lu,
            })
            .collect();
        for (i, p) in params.iter().enumerate() {
            p.validate(i)
                .map_err(|e| CliError::invalid(format!("segment {}: {e}", i + 1)))?;
        }
        let mut tendons = Vec::new();
        for (j, t) in file.tendons.iter().enumerate() {
            if t.segment == 0 || t.segment > params.len() {
                return Err(CliError::invalid(format!(
                    "tendon {} references segment {}, robot has {}",
                    j + 1,
                    t.segment,
                    params.len()
                )));
            }
            tendons.push(TendonRouting::new(
                t.segment - 1,
                t.radius * lu,
                t.azimuth,
                t.stations.clone(),
            ));
        }
        if let Some(sym) = &file.symmetric_tendons {
            if sym.count == 0 || sym.guides == 0 {
                return Err(CliError::invalid("symmetric_tendons needs count and guides ≥ 1"));
            }
            tendons.extend(symmetric_routing(params.len(), sym.count, sym.radius * lu, sym.guides));
        }
        for (j, t) in tendons.iter().enumerate() {
            t.validate(&params)
                .map_err(|e| CliError::invalid(format!("tendon {}: {e}", j + 1)))?;
        }
        let gravity = file
            .gravity
            .map(Vector3::from)
            .unwrap_or(Vector3::new(0.0, 0.0, -STANDARD_GRAVITY));
        let stiffness = StiffnessModel::from_params(&params)
            .with_contraction_stiffening(file.stiffness.map(|s| s.contraction_stiffening / lu).unwrap_or(0.0));
        stiffness.validate()?;
        Ok(Self {
            params,
            tendons,
            gravity,
            stiffness,
        })
    }

    /// Tendon lengths of the straight, unstretched robot.
    pub fn rest_tendon_lengths(&self) -> Vec<f64> {
        pac_core::actuation::tendon_lengths(&RobotState::zeros(self.params.len()), &self.tendons, &self.params)
            .expect("validated robot")
            .iter()
            .copied()
            .collect()
    }

    pub fn tip_segment(&self) -> usize {
        self.params.len()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandSpec {
    /// Absolute tendon targets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_lengths: Option<Vec<f64>>,
    /// Targets as shortening from the straight rest length.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contractions: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_rates: Option<Vec<f64>>,
    /// N/m (N/mm with millimetre units).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadSpec {
    /// 1-based.
    pub segment: usize,
    pub s: f64,
    pub force: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moment: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub damping_time: Option<f64>,
}

impl SolverSpec {
    pub fn options(&self) -> SolverOptions {
        let d = SolverOptions::default();
        SolverOptions {
            residual_tolerance: self.residual_tolerance.unwrap_or(d.residual_tolerance),
            step_tolerance: self.step_tolerance.unwrap_or(d.step_tolerance),
            max_steps: self.max_steps.unwrap_or(d.max_steps),
            initial_step: self.initial_step.unwrap_or(d.initial_step),
            max_step: self.max_step.unwrap_or(d.max_step),
            damping_time: self.damping_time.unwrap_or(d.damping_time),
            ..d
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<Units>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelKind>,
    /// Initial guess, one `[c0, c1, phi, delta_l]` per segment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<[f64; 4]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub commands: Option<CommandSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub loads: Vec<LoadSpec>,
    /// Mass hung from the distal tip.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tip_mass: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gravity: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

/// A scenario resolved against a robot, in SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub problem: StaticsProblem,
    pub options: SolverOptions,
    pub output: Option<PathBuf>,
}

impl ScenarioFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        read_json(path)
    }

    /// The same scenario with every quantity in SI units and no unit header.
    pub fn normalized(&self) -> Self {
        let (lu, mu) = scale_units(self.units);
        let mut out = self.clone();
        out.units = None;
        if let Some(init) = &mut out.initial {
            for q in init.iter_mut() {
                q[3] *= lu;
            }
        }
        if let Some(c) = &mut out.commands {
            for v in [&mut c.target_lengths, &mut c.contractions, &mut c.target_rates]
                .into_iter()
                .flatten()
            {
                v.iter_mut().for_each(|x| *x *= lu);
            }
            c.kp = c.kp.map(|k| k / lu);
            c.kd = c.kd.map(|k| k / lu);
        }
        for l in &mut out.loads {
            if let Some(m) = &mut l.moment {
                m.iter_mut().for_each(|x| *x *= lu);
            }
        }
        out.tip_mass = out.tip_mass.map(|m| m * mu);
        out
    }

    pub fn resolve(&self, robot: &Robot, model_override: Option<ModelKind>) -> CliResult<Scenario> {
        let f = self.normalized();
        let n = robot.params.len();
        let model = model_override.or(f.model).unwrap_or(ModelKind::Pac);
        let mut problem = StaticsProblem::new(robot.params.clone());
        problem.stiffness = robot.stiffness.clone();
        problem.model = model;
        problem.gravity = f.gravity.map(Vector3::from).unwrap_or(robot.gravity);
        problem.tendons = robot.tendons.clone();
        if let Some(init) = &f.initial {
            if init.len() != n {
                return Err(CliError::invalid(format!(
                    "initial state has {} segments, robot has {n}",
                    init.len()
                )));
            }
            problem.initial = RobotState::new(init.iter().map(|&q| SegmentState::from_array(q)).collect());
            problem
                .initial
                .validate(&problem.params, model)
                .map_err(|e| CliError::invalid(format!("initial state: {e}")))?;
        }
        if let Some(c) = &f.commands {
            problem.command = Some(command(c, robot)?);
        }
        for (k, l) in f.loads.iter().enumerate() {
            if l.segment == 0 || l.segment > n {
                return Err(CliError::invalid(format!(
                    "load {} references segment {}, robot has {n}",
                    k + 1,
                    l.segment
                )));
            }
            if !(0.0..=1.0).contains(&l.s) {
                return Err(CliError::invalid(format!(
                    "load {} has s = {} outside [0, 1]",
                    k + 1,
                    l.s
                )));
            }
            problem.loads.push(PointLoad {
                segment: l.segment - 1,
                s: l.s,
                force: Vector3::from(l.force),
                moment: l.moment.map(Vector3::from),
            });
        }
        if let Some(m) = f.tip_mass {
            if !(m >= 0.0) {
                return Err(CliError::invalid("tip_mass must be non-negative"));
            }
            if m > 0.0 {
                problem.loads.push(PointLoad::tip_mass(n - 1, m, &problem.gravity));
            }
        }
        problem.validate()?;
        let options = f.solver.clone().unwrap_or_default().options();
        options.validate(problem.initial.dof())?;
        Ok(Scenario {
            name: f.name.clone().unwrap_or_else(|| "scenario".into()),
            problem,
            options,
            output: f.output.and_then(|o| o.directory).map(PathBuf::from),
        })
    }
}

fn command(c: &CommandSpec, robot: &Robot) -> CliResult<TendonCommand> {
    let m = robot.tendons.len();
    if m == 0 {
        return Err(CliError::invalid("scenario commands tendons but the robot has none"));
    }
    let targets = match (&c.target_lengths, &c.contractions) {
        (Some(t), None) => t.clone(),
        (None, Some(dc)) => {
            if dc.len() != m {
                return Err(CliError::invalid(format!(
                    "expected {m} contractions, got {}",
                    dc.len()
                )));
            }
            robot.rest_tendon_lengths().iter().zip(dc).map(|(l, d)| l - d).collect()
        }
        _ => {
            return Err(CliError::invalid(
                "commands need exactly one of target_lengths and contractions",
            ))
        }
    };
    let mut cmd = TendonCommand::hold(targets).with_gains(c.kp.unwrap_or(DEFAULT_GAIN), c.kd.unwrap_or(DEFAULT_GAIN));
    if let Some(r) = &c.target_rates {
        cmd.target_rates = r.clone();
    }
    cmd.validate(m)
        .map_err(|e| CliError::invalid(format!("commands: {e}")))?;
    Ok(cmd)
}

/// Workspace sweep: every combination of per-tendon contractions, repeated for
/// each tip mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<Units>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelKind>,
    /// One list of contraction values per tendon.
    pub contractions: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tip_masses: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kd: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gravity: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub grid: Vec<Vec<f64>>,
    /// Tip mass of each load case (kg).
    pub masses: Vec<f64>,
    pub loads: Vec<Scenario>,
}

impl SweepFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        read_json(path)
    }

    /// Grid points (contraction vectors) and one base scenario per tip mass.
    pub fn resolve(&self, robot: &Robot, model_override: Option<ModelKind>) -> CliResult<Sweep> {
        let (lu, mu) = scale_units(self.units);
        let m = robot.tendons.len();
        if self.contractions.is_empty() || self.contractions.iter().any(Vec::is_empty) {
            return Err(CliError::invalid("sweep grid is empty"));
        }
        if self.contractions.len() != m {
            return Err(CliError::invalid(format!(
                "sweep lists contractions for {} tendons, robot has {m}",
                self.contractions.len()
            )));
        }
        let mut grid: Vec<Vec<f64>> = vec![Vec::new()];
        for axis in &self.contractions {
            grid = grid
                .into_iter()
                .flat_map(|prefix| {
                    axis.iter().map(move |&v| {
                        let mut p = prefix.clone();
                        p.push(v * lu);
                        p
                    })
                })
                .collect();
        }
        let masses: Vec<f64> = if self.tip_masses.is_empty() {
            vec![0.0]
        } else {
            self.tip_masses.iter().map(|m| m * mu).collect()
        };
        let loads = masses
            .iter()
            .map(|&mass| {
                ScenarioFile {
                    name: Some(format!("{mass} kg")),
                    model: self.model,
                    commands: Some(CommandSpec {
                        contractions: Some(vec![0.0; m]),
                        kp: self.kp.map(|k| k / lu),
                        kd: self.kd.map(|k| k / lu),
                        ..CommandSpec::default()
                    }),
                    tip_mass: Some(mass),
                    gravity: self.gravity,
                    solver: self.solver.clone(),
                    output: self.output.clone(),
                    ..ScenarioFile::default()
                }
                .resolve(robot, model_override)
            })
            .collect::<CliResult<Vec<_>>>()?;
        Ok(Sweep { grid, masses, loads })
    }
}

/// Where the reference shapes of a comparison come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TruthSpec {
    Oracle {
        #[serde(default = "default_elements")]
        elements_per_segment: usize,
    },
    /// Marker CSV, relative to the comparison file.
    Markers(String),
}

fn default_elements() -> usize {
    100
}

impl Default for TruthSpec {
    fn default() -> Self {
        TruthSpec::Oracle {
            elements_per_segment: default_elements(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareFile {
    #[serde(default)]
    pub ground_truth: TruthSpec,
    pub scenarios: Vec<ScenarioFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

impl CompareFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        read_json(path)
    }
}

/// Reads and parses a JSON document; syntax and schema errors carry the
/// line and column.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_json(path, &text)
}

pub fn parse_json<T: DeserializeOwned>(path: &Path, text: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: strip_position(&e.to_string()),
    })
}

fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(k) => message[..k].to_string(),
        None => message.to_string(),
    }
}

/// Parses a state written as `c0,c1,phi,dl;c0,c1,phi,dl;…` (SI units).
pub fn parse_state(text: &str) -> CliResult<RobotState> {
    let mut segments = Vec::new();
    for (i, chunk) in text.split(';').filter(|c| !c.trim().is_empty()).enumerate() {
        let values: Vec<f64> = chunk
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::invalid(format!("state segment {}: {e}", i + 1)))?;
        let q: [f64; 4] = values.try_into().map_err(|v: Vec<f64>| {
            CliError::invalid(format!("state segment {} has {} values, expected 4", i + 1, v.len()))
        })?;
        segments.push(SegmentState::from_array(q));
    }
    Ok(RobotState::new(segments))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn robot_json() -> &'static str {
        r#"{
            "units": {"length": "mm", "mass": "g"},
            "segments": [{"rest_length": 135.4, "radius": 40, "mass": 80,
                          "k_bending": 100, "k_torsion": 100, "k_axial": 1.078}],
            "symmetric_tendons": {"count": 3, "radius": 30, "guides": 10}
        }"#
    }

    #[test]
    fn millimetre_units_are_normalized() {
        let file: RobotFile = parse_json(Path::new("r.json"), robot_json()).unwrap();
        let robot = Robot::from_file(file).unwrap();
        let p = &robot.params[0];
        assert!((p.rest_length - 0.1354).abs() < 1e-15);
        assert!((p.k_axial - 1078.0).abs() < 1e-9);
        assert!((p.k_bending - 0.1).abs() < 1e-15);
        assert!((p.mass - 0.08).abs() < 1e-15);
        assert_eq!(robot.tendons.len(), 3);
        assert!((robot.tendons[0].radius - 0.03).abs() < 1e-15);
    }

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        let err = parse_json::<RobotFile>(Path::new("r.json"), "{\n  \"segmets\": []\n}").unwrap_err();
        match err {
            CliError::Parse { line, message, .. } => {
                assert_eq!(line, 2);
                assert!(message.contains("segmets"));
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn empty_robot_is_invalid() {
        let file: RobotFile = parse_json(Path::new("r.json"), r#"{"segments": []}"#).unwrap();
        assert!(matches!(Robot::from_file(file), Err(CliError::Invalid(_))));
    }

    #[test]
    fn scenario_normalization_round_trips() {
        let text = r#"{"units": {"length": "mm", "mass": "g"}, "initial": [[0.1, 0.2, 0.3, 2.0]],
                       "commands": {"contractions": [1, 0, 0], "kp": 2}, "tip_mass": 200}"#;
        let file: ScenarioFile = parse_json(Path::new("s.json"), text).unwrap();
        let si = file.normalized();
        assert_eq!(si.tip_mass, Some(0.2));
        assert_eq!(si.initial.as_ref().unwrap()[0][3], 0.002);
        let back: ScenarioFile = parse_json(Path::new("s.json"), &serde_json::to_string(&si).unwrap()).unwrap();
        assert_eq!(back, si);
    }

    #[test]
    fn pcc_scenario_rejects_curvature_slope() {
        let robot = Robot::from_file(parse_json(Path::new("r.json"), robot_json()).unwrap()).unwrap();
        let file: ScenarioFile = parse_json(
            Path::new("s.json"),
            r#"{"model": "pcc", "initial": [[0.1, 0.2, 0, 0]]}"#,
        )
        .unwrap();
        assert!(file.resolve(&robot, None).is_err());
        assert!(file.resolve(&robot, Some(ModelKind::Pac)).is_ok());
    }

    #[test]
    fn sweep_grid_is_cartesian() {
        let robot = Robot::from_file(parse_json(Path::new("r.json"), robot_json()).unwrap()).unwrap();
        let sweep: SweepFile = parse_json(
            Path::new("w.json"),
            r#"{"units": {"length": "mm"}, "contractions": [[0, 5], [0, 5, 10], [0]], "tip_masses": [0, 0.5]}"#,
        )
        .unwrap();
        let s = sweep.resolve(&robot, None).unwrap();
        assert_eq!(s.grid.len(), 6);
        assert_eq!(s.grid[5], vec![0.005, 0.01, 0.0]);
        assert_eq!(s.loads.len(), 2);
        let empty: SweepFile = parse_json(Path::new("w.json"), r#"{"contractions": [[], [0], [0]]}"#).unwrap();
        assert!(empty.resolve(&robot, None).is_err());
    }

    #[test]
    fn state_strings_parse() {
        let s = parse_state("0.1, 0, 0.2, 0; 0,0,0,0.001").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.segments[1].delta_l, 0.001);
        assert!(parse_state("0.1,0,0").is_err());
    }
}
