//! Run configuration read from TOML, with sweep overrides applied before
//! deserialization.

use crate::defaults;
use crate::error::{CliError, CliResult};
use dods_core::catalog::{self, Params, DEFAULT_MAX_DELAY};
use dods_core::invariant_solutions::Constants;
use dods_core::linear::CanonicalMode;
use dods_core::solver::SolverOptions;
use dods_core::symmetry::Invariance;
use dods_core::{DODSystem, LinearDODS};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Solve,
    CheckSymmetry,
    InvariantSolutions,
    ClassifyLinear,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Solve => "solve",
            Task::CheckSymmetry => "check-symmetry",
            Task::InvariantSolutions => "invariant-solutions",
            Task::ClassifyLinear => "classify-linear",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: Option<Task>,
    #[serde(default)]
    pub seed: u64,
    pub system: Option<SystemSpec>,
    pub initial: Option<InitialSpec>,
    #[serde(default)]
    pub solver: SolverOptions,
    pub symmetry: Option<SymmetrySpec>,
    pub invariant: Option<InvariantSpec>,
    pub linear: Option<LinearSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

/// A catalog family with parameters, or raw right-hand side and delay.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub family: Option<String>,
    #[serde(default)]
    pub params: Params,
    pub f: Option<String>,
    pub g: Option<String>,
    /// Implicit relation `residual = 0` in place of `g`.
    pub residual: Option<String>,
    pub max_delay: Option<f64>,
    pub domain: Option<(f64, f64)>,
    pub label: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    pub phi: String,
    pub interval: (f64, f64),
    pub end: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub xi: String,
    pub eta: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetrySpec {
    #[serde(default)]
    pub fields: Vec<FieldSpec>,
    /// Also test every basis field of the family's algebra.
    #[serde(default)]
    pub algebra: bool,
    #[serde(default = "defaults::symmetry_sample")]
    pub sample: usize,
    #[serde(default = "defaults::symmetry_tol")]
    pub tol: f64,
    #[serde(default = "defaults::invariance")]
    pub mode: Invariance,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvariantSpec {
    /// Restrict to one subalgebra representative.
    pub subalgebra: Option<String>,
    /// Values for constants the reduction leaves free.
    #[serde(default)]
    pub free: Constants,
    #[serde(default = "defaults::verify_grid")]
    pub verify_grid: usize,
    /// Rows per solution in the optional CSV; zero writes none.
    #[serde(default)]
    pub samples: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearSpec {
    pub alpha: String,
    pub beta: String,
    pub gamma: String,
    pub g: String,
    pub domain: (f64, f64),
    #[serde(default)]
    pub mode: CanonicalMode,
    /// Particular solution used to remove the forcing first.
    pub sigma: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
    pub stem: String,
    pub samples: usize,
    pub include_initial: bool,
    pub residual_grid: usize,
    pub residual_tol: f64,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: None,
            stem: "run".into(),
            samples: defaults::SAMPLES,
            include_initial: true,
            residual_grid: defaults::RESIDUAL_GRID,
            residual_tol: defaults::RESIDUAL_TOL,
        }
    }
}

/// `--sweep path=lo:hi:n`, with `path` a dotted key into the config.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub path: String,
    pub values: Vec<f64>,
}

impl std::str::FromStr for Sweep {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (path, range) = s.split_once('=').ok_or("expected path=lo:hi:n")?;
        let parts: Vec<&str> = range.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            return Err(format!("range `{range}` is not lo:hi:n"));
        };
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("`{v}` is not a number"));
        let (lo, hi) = (num(lo)?, num(hi)?);
        let n: usize = n.trim().parse().map_err(|_| format!("`{n}` is not a count"))?;
        if n == 0 || path.trim().is_empty() || !lo.is_finite() || !hi.is_finite() {
            return Err(format!("empty or invalid sweep `{s}`"));
        }
        let values = if n == 1 { vec![lo] } else { dods_core::numerics::linspace(lo, hi, n) };
        Ok(Sweep { path: path.trim().to_string(), values })
    }
}

/// One concrete run of a (possibly swept) configuration.
#[derive(Debug, Clone)]
pub struct Run {
    pub index: Option<usize>,
    pub assignment: Vec<(String, f64)>,
    pub config: RunConfig,
}

impl Run {
    pub fn stem(&self) -> String {
        match self.index {
            Some(i) => format!("{}-{i:03}", self.config.output.stem),
            None => self.config.output.stem.clone(),
        }
    }
}

fn set_path(table: &mut toml::Table, path: &str, value: f64) -> Result<(), String> {
    let keys: Vec<&str> = path.split('.').collect();
    let (last, parents) = keys.split_last().expect("split yields one key");
    let mut cur = table;
    for k in parents {
        let entry = cur.entry(k.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry.as_table_mut().ok_or_else(|| format!("`{k}` in `{path}` is not a table"))?;
    }
    cur.insert(last.to_string(), toml::Value::Float(value));
    Ok(())
}

pub fn read_table(path: &Path) -> CliResult<toml::Table> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    text.parse::<toml::Table>()
        .map_err(|e| CliError::Config { path: path.into(), message: e.to_string() })
}

/// Every run named by the cartesian product of `sweeps`, in row-major order.
pub fn expand(path: &Path, table: &toml::Table, sweeps: &[Sweep], force: bool) -> CliResult<Vec<Run>> {
    let mut assignments: Vec<Vec<(String, f64)>> = vec![vec![]];
    for s in sweeps {
        assignments = assignments
            .into_iter()
            .flat_map(|a| {
                s.values.iter().map(move |&v| {
                    let mut next = a.clone();
                    next.push((s.path.clone(), v));
                    next
                })
            })
            .collect();
    }
    let swept = !sweeps.is_empty();
    assignments
        .into_iter()
        .enumerate()
        .map(|(i, assignment)| {
            let mut t = table.clone();
            for (p, v) in &assignment {
                set_path(&mut t, p, *v).map_err(|message| CliError::Config { path: path.into(), message })?;
            }
            let mut config: RunConfig = toml::Value::Table(t)
                .try_into()
                .map_err(|e: toml::de::Error| CliError::Config { path: path.into(), message: e.to_string() })?;
            config.solver.force |= force;
            Ok(Run { index: swept.then_some(i), assignment, config })
        })
        .collect()
}

impl RunConfig {
    pub fn check_task(&self, wanted: Task) -> CliResult<()> {
        match self.task {
            Some(t) if t != wanted => Err(CliError::Usage(format!(
                "config selects task `{}` but the command is `{}`",
                t.name(),
                wanted.name()
            ))),
            _ => Ok(()),
        }
    }

    pub fn system_spec(&self) -> CliResult<&SystemSpec> {
        self.system.as_ref().ok_or_else(|| CliError::Usage("config has no [system] table".into()))
    }

    pub fn initial_spec(&self) -> CliResult<&InitialSpec> {
        self.initial.as_ref().ok_or_else(|| CliError::Usage("config has no [initial] table".into()))
    }

    /// The system to integrate or test.
    pub fn build_system(&self) -> CliResult<DODSystem> {
        let spec = self.system_spec()?;
        let raw = spec.f.is_some() || spec.g.is_some() || spec.residual.is_some();
        match (&spec.family, raw) {
            (Some(_), true) => Err(CliError::Usage("[system] gives both a family and raw expressions".into())),
            (Some(id), false) => {
                let max_delay = spec.max_delay.unwrap_or(DEFAULT_MAX_DELAY);
                let mut sys = catalog::family_with_max_delay(id, &spec.params, max_delay)?.system;
                if let Some(d) = spec.domain {
                    sys.domain = d;
                }
                Ok(sys)
            }
            (None, _) => {
                if !spec.params.0.is_empty() {
                    return Err(CliError::Usage("[system] params need a family".into()));
                }
                let f = spec.f.as_deref().ok_or_else(|| CliError::Usage("[system] needs `f` or `family`".into()))?;
                let domain = match (spec.domain, &self.initial) {
                    (Some(d), _) => d,
                    (None, Some(i)) => (i.interval.0, i.end.max(i.interval.1)),
                    (None, None) => return Err(CliError::Usage("[system] needs a domain".into())),
                };
                let sys = match (&spec.g, &spec.residual) {
                    (Some(g), None) => DODSystem::explicit(f, g, domain)?,
                    (None, Some(r)) => DODSystem::implicit(f, r, domain, spec.max_delay.unwrap_or(DEFAULT_MAX_DELAY))?,
                    _ => return Err(CliError::Usage("[system] needs exactly one of `g` and `residual`".into())),
                };
                let label = spec.label.clone().unwrap_or_else(|| match (&spec.g, &spec.residual) {
                    (Some(g), _) => format!("yd = {f}, x_ = {g}"),
                    (_, Some(r)) => format!("yd = {f}, {r} = 0"),
                    _ => unreachable!(),
                });
                Ok(sys.with_label(label))
            }
        }
    }

    pub fn family_id(&self) -> CliResult<&str> {
        self.system_spec()?
            .family
            .as_deref()
            .ok_or_else(|| CliError::Usage("this task needs [system] family".into()))
    }

    /// `[linear]` when present, otherwise the linear form of `[system]`.
    pub fn build_linear(&self) -> CliResult<(LinearDODS, CanonicalMode, Option<String>)> {
        match &self.linear {
            Some(l) => Ok((LinearDODS::new(&l.alpha, &l.beta, &l.gamma, &l.g, l.domain)?, l.mode, l.sigma.clone())),
            None => Ok((LinearDODS::from_system(&self.build_system()?)?, CanonicalMode::default(), None)),
        }
    }

    pub fn out_path(&self, stem: &str, ext: &str) -> Option<PathBuf> {
        self.output.dir.as_ref().map(|d| d.join(format!("{stem}.{ext}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_syntax() {
        let s: Sweep = "system.params.a=1:3:5".parse().unwrap();
        assert_eq!(s.path, "system.params.a");
        assert_eq!(s.values, vec![1.0, 1.5, 2.0, 2.5, 3.0]);
        assert_eq!("x=2:9:1".parse::<Sweep>().unwrap().values, vec![2.0]);
        for bad in ["x", "x=1:2", "x=1:2:0", "=1:2:3", "x=a:2:3"] {
            assert!(bad.parse::<Sweep>().is_err(), "{bad}");
        }
    }

    #[test]
    fn sweeps_multiply() {
        let t: toml::Table = "[initial]\nphi = \"1\"\ninterval = [-1.0, 0.0]\nend = 2.0\n".parse().unwrap();
        let sweeps = ["initial.end=1:2:2".parse().unwrap(), "seed=0:0:1".parse().unwrap()];
        let runs = expand(Path::new("c.toml"), &t, &sweeps, false);
        // seed must be an integer
        assert!(runs.is_err());
        let sweeps = ["initial.end=1:2:2".parse().unwrap(), "solver.rel_tol=1e-8:1e-6:3".parse().unwrap()];
        let runs = expand(Path::new("c.toml"), &t, &sweeps, true).unwrap();
        assert_eq!(runs.len(), 6);
        assert_eq!(runs[4].config.initial.as_ref().unwrap().end, 2.0);
        assert!(runs[4].config.solver.force);
        assert_eq!(runs[4].stem(), "run-004");
    }
}
