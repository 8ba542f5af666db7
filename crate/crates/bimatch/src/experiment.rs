//! JSON experiment specifications and their runner.
//!
//! A spec names one study (a size sweep, a distribution sweep or the
//! triangular-graph comparison) together with its seed and replication
//! count. Running it yields a CSV of per-replication coverages and a JSON
//! summary; both start with a `#` comment line embedding the spec and seed.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use bimatch_core::hydro::OdeSettings;
use bimatch_core::{Criterion, DistributionSpec};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{
    run_convergence, run_sweep, run_topology_comparison, Construction, ConvergenceRow,
    Replications, SweepRow, TopologyRow,
};

/// Specs shipped with the binary, looked up by file name when no such file
/// exists on disk.
pub const BUNDLED_SPECS: [(&str, &str); 4] = [
    ("table1.json", include_str!("../specs/table1.json")),
    (
        "poisson_sweep.json",
        include_str!("../specs/poisson_sweep.json"),
    ),
    (
        "regular_sweep.json",
        include_str!("../specs/regular_sweep.json"),
    ),
    (
        "karp_triangular.json",
        include_str!("../specs/karp_triangular.json"),
    ),
];

fn both_criteria() -> Vec<Criterion> {
    vec![Criterion::Greedy, Criterion::MinRes]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub replications: usize,
    #[serde(default = "both_criteria")]
    pub criteria: Vec<Criterion>,
    #[serde(default)]
    pub ode: OdeSettings,
    /// CSV file name; defaults to `<name>.csv`. The summary goes next to it
    /// with a `.summary.json` suffix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    pub plan: Plan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Plan {
    Convergence {
        xi_plus: DistributionSpec,
        xi_minus: DistributionSpec,
        n_values: Vec<usize>,
        #[serde(default)]
        construction: Construction,
        #[serde(default)]
        require_simple: bool,
    },
    Sweep {
        n: usize,
        distributions: Vec<DistributionSpec>,
        #[serde(default)]
        regenerate: bool,
        #[serde(default)]
        require_simple: bool,
    },
    Topology {
        n: usize,
        avg_degree: f64,
    },
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    /// Reads a spec file, falling back to a bundled spec of the same file
    /// name when the path does not exist.
    pub fn load(path: &Path) -> Result<Self> {
        match std::fs::read_to_string(path) {
            Ok(text) => Self::from_json(&text),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                let bundled = path
                    .file_name()
                    .and_then(|f| f.to_str())
                    .filter(|_| path.parent().is_none_or(|p| p.as_os_str().is_empty()))
                    .and_then(bundled_spec);
                match bundled {
                    Some(text) => Self::from_json(text),
                    None => Err(Error::io(path)(e)),
                }
            }
            Err(e) => Err(Error::io(path)(e)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| {
            Err(Error::InvalidParameter(format!(
                "spec {:?}: {m}",
                self.name
            )))
        };
        if self.name.is_empty() {
            return bad("name must not be empty");
        }
        if self.replications == 0 {
            return bad("replications must be at least 1");
        }
        if self.criteria.is_empty() {
            return bad("criteria must not be empty");
        }
        self.ode.validate()?;
        match &self.plan {
            Plan::Convergence { n_values, .. } if n_values.is_empty() => {
                bad("n_values must not be empty")
            }
            Plan::Convergence { n_values, .. } if n_values.contains(&0) => {
                bad("sizes must be positive")
            }
            Plan::Sweep { distributions, .. } if distributions.is_empty() => {
                bad("distributions must not be empty")
            }
            Plan::Sweep { n: 0, .. } | Plan::Topology { n: 0, .. } => bad("n must be positive"),
            _ => Ok(()),
        }
    }

    pub fn csv_name(&self) -> String {
        self.output
            .clone()
            .unwrap_or_else(|| format!("{}.csv", self.name))
    }

    pub fn summary_name(&self) -> String {
        let csv = self.csv_name();
        let stem = csv.strip_suffix(".csv").unwrap_or(&csv);
        format!("{stem}.summary.json")
    }

    /// The comment line that opens every output file.
    pub fn header_line(&self) -> String {
        let json = serde_json::to_string(self).expect("specs serialize");
        format!("# spec={json} seed={}", self.seed)
    }

    fn replications(&self) -> Replications {
        Replications {
            seed: self.seed,
            count: self.replications,
            criteria: self.criteria.clone(),
        }
    }
}

pub fn bundled_spec(file_name: &str) -> Option<&'static str> {
    BUNDLED_SPECS
        .iter()
        .find(|(name, _)| *name == file_name)
        .map(|(_, text)| *text)
}

/// Rows produced by one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "rows", rename_all = "lowercase")]
pub enum Outcome {
    Convergence(Vec<ConvergenceRow>),
    Sweep(Vec<SweepRow>),
    Topology(Vec<TopologyRow>),
}

/// Runs the study described by `spec` on the current rayon pool.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Outcome> {
    spec.validate()?;
    let reps = spec.replications();
    Ok(match &spec.plan {
        Plan::Convergence {
            xi_plus,
            xi_minus,
            n_values,
            construction,
            require_simple,
        } => Outcome::Convergence(run_convergence(
            xi_plus,
            xi_minus,
            n_values,
            *construction,
            *require_simple,
            &reps,
            Some(&spec.ode),
        )?),
        Plan::Sweep {
            n,
            distributions,
            regenerate,
            require_simple,
        } => Outcome::Sweep(run_sweep(
            distributions,
            *n,
            *regenerate,
            *require_simple,
            &reps,
        )?),
        Plan::Topology { n, avg_degree } => {
            Outcome::Topology(run_topology_comparison(*n, *avg_degree, &reps)?)
        }
    })
}

fn dist_kind_param(d: &DistributionSpec) -> (&'static str, f64) {
    match d {
        DistributionSpec::Dirac { p } => ("dirac", f64::from(*p)),
        DistributionSpec::Poisson { lambda, .. } => ("poisson", *lambda),
        DistributionSpec::Pmf { .. } => ("pmf", d.mean().unwrap_or(f64::NAN)),
    }
}

impl Outcome {
    /// Per-replication coverages, one row per (group, replication).
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match self {
            Outcome::Convergence(rows) => {
                out.push_str("n,replication,criterion,coverage\n");
                for row in rows {
                    for (r, c) in row.group.coverages.iter().enumerate() {
                        let _ = writeln!(out, "{},{r},{},{c}", row.n, row.group.criterion);
                    }
                }
            }
            Outcome::Sweep(rows) => {
                out.push_str("dist_kind,param,criterion,replication,coverage\n");
                for row in rows {
                    let (kind, param) = dist_kind_param(&row.distribution);
                    for (r, c) in row.group.coverages.iter().enumerate() {
                        let _ = writeln!(out, "{kind},{param},{},{r},{c}", row.group.criterion);
                    }
                }
            }
            Outcome::Topology(rows) => {
                out.push_str("construction,criterion,replication,coverage\n");
                for row in rows {
                    for (r, c) in row.group.coverages.iter().enumerate() {
                        let _ = writeln!(
                            out,
                            "{},{},{r},{c}",
                            row.construction.name(),
                            row.group.criterion
                        );
                    }
                }
            }
        }
        out
    }

    /// Group statistics without the raw coverages.
    pub fn summary_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("outcomes serialize");
        if let Some(rows) = value.get_mut("rows").and_then(|r| r.as_array_mut()) {
            for row in rows {
                if let Some(obj) = row.as_object_mut() {
                    obj.remove("coverages");
                }
            }
        }
        let mut s = serde_json::to_string_pretty(&value).expect("values serialize");
        s.push('\n');
        s
    }
}

/// Files written by [`write_outputs`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Written {
    pub csv: PathBuf,
    pub summary: PathBuf,
}

/// Writes the CSV and summary for `outcome` into `dir`, creating it if needed.
pub fn write_outputs(spec: &ExperimentSpec, outcome: &Outcome, dir: &Path) -> Result<Written> {
    std::fs::create_dir_all(dir).map_err(Error::io(dir))?;
    let header = spec.header_line();
    let csv = dir.join(spec.csv_name());
    let summary = dir.join(spec.summary_name());
    std::fs::write(&csv, format!("{header}\n{}", outcome.to_csv())).map_err(Error::io(&csv))?;
    std::fs::write(&summary, format!("{header}\n{}", outcome.summary_json()))
        .map_err(Error::io(&summary))?;
    Ok(Written { csv, summary })
}
