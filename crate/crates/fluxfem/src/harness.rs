//! Grid-refinement driver: runs a problem across a ladder of meshes,
//! estimates convergence orders, and renders the results as CSV or
//! markdown tables.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem2d::{solve_augmented, solve_standard_fem};
use crate::ifem1d::{solve, Grid1d};
use crate::mesh2d::build_mesh;
use crate::norms::{error_norms_1d, error_norms_2d};
use crate::problems::{quartic_interface_1d, radial_r2r4_2d, trig_circle_2d, Problem1d, Problem2d};
use crate::solver::LsqMethod;
use crate::tube2d::extract_tube;

/// Problem selector shared by config files and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemId {
    Quartic,
    Trig,
    R2r4,
}

impl ProblemId {
    pub fn as_str(self) -> &'static str {
        match self {
            ProblemId::Quartic => "quartic",
            ProblemId::Trig => "trig",
            ProblemId::R2r4 => "r2r4",
        }
    }
}

impl std::str::FromStr for ProblemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quartic" => Ok(ProblemId::Quartic),
            "trig" => Ok(ProblemId::Trig),
            "r2r4" => Ok(ProblemId::R2r4),
            other => Err(Error::Parameter(format!(
                "unknown problem id {other:?}; expected quartic, trig, or r2r4"
            ))),
        }
    }
}

/// Output rendering for [`emit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Markdown,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "markdown" => Ok(OutputFormat::Markdown),
            other => Err(Error::Parameter(format!(
                "unknown output format {other:?}; expected csv or markdown"
            ))),
        }
    }
}

/// One refinement study: the problem, its parameters, the mesh ladder, and
/// where the rendered table goes.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub problem: ProblemId,
    /// 1D interface position.
    pub alpha: f64,
    pub beta_minus: f64,
    pub beta_plus: f64,
    pub q: f64,
    /// 2D interface radius; 0 removes the interface.
    pub r_gamma: f64,
    /// Tube half-width in units of h; 0 widens the tube to the whole domain.
    pub eps_mult: f64,
    pub n_list: Vec<usize>,
    pub method: LsqMethod,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: ProblemId::Quartic,
            alpha: 1.0 / 3.0,
            beta_minus: 2.0,
            beta_plus: 10.0,
            q: 0.0,
            r_gamma: 0.9,
            eps_mult: 3.0,
            n_list: vec![16, 32, 64, 128, 256, 512, 1024],
            method: LsqMethod::SparseQr,
            out: None,
            format: OutputFormat::Csv,
        }
    }
}

impl RunConfig {
    /// 2D defaults: N = 8..128 cells per direction and the reference
    /// coefficient pair beta = (100, 1).
    pub fn default_2d(problem: ProblemId) -> Self {
        Self {
            problem,
            beta_minus: 100.0,
            beta_plus: 1.0,
            n_list: vec![8, 16, 32, 64, 128],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() {
            return Err(Error::Parameter("n_list must not be empty".into()));
        }
        if !self.n_list.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Parameter(format!(
                "n_list must be strictly increasing, got {:?}",
                self.n_list
            )));
        }
        if self.eps_mult < 0.0 {
            return Err(Error::Parameter(format!(
                "eps_mult must be >= 0, got {}",
                self.eps_mult
            )));
        }
        Ok(())
    }

    pub(crate) fn problem_1d(&self) -> Result<Problem1d> {
        match self.problem {
            ProblemId::Quartic => {
                quartic_interface_1d(self.alpha, self.beta_minus, self.beta_plus, self.q)
            }
            other => Err(Error::Parameter(format!(
                "1D studies use the quartic problem, not {}",
                other.as_str()
            ))),
        }
    }

    pub(crate) fn problem_2d(&self) -> Result<Problem2d> {
        match self.problem {
            ProblemId::Trig => {
                trig_circle_2d(self.beta_minus, self.beta_plus, self.q, self.r_gamma)
            }
            ProblemId::R2r4 => radial_r2r4_2d(self.beta_minus, self.beta_plus, self.q),
            ProblemId::Quartic => Err(Error::Parameter(
                "2D studies use the trig or r2r4 problem, not quartic".into(),
            )),
        }
    }

    /// Tube half-width at mesh step `h`; `eps_mult = 0` widens the tube
    /// past the domain diameter so every element is a member.
    pub fn tube_epsilon(&self, problem: &Problem2d, h: f64) -> f64 {
        if self.eps_mult == 0.0 {
            2.0 * problem.domain.side_length()
        } else {
            self.eps_mult * h
        }
    }

    fn title_2d(&self, variant: &str, with_tube: bool) -> String {
        let interface = match self.problem {
            ProblemId::Trig if self.r_gamma == 0.0 => "no interface".to_string(),
            ProblemId::Trig => format!("r_gamma = {}", self.r_gamma),
            _ => "r_gamma = 1".to_string(),
        };
        let mut title = format!(
            "{} {variant}: beta = ({}, {}), q = {}, {interface}",
            self.problem.as_str(),
            self.beta_minus,
            self.beta_plus,
            self.q
        );
        if with_tube {
            if self.eps_mult == 0.0 {
                title.push_str(", tube = whole domain");
            } else {
                title.push_str(&format!(", tube = {} h", self.eps_mult));
            }
        }
        title
    }
}

#[derive(Debug, Deserialize)]
struct StudyFile {
    #[serde(default)]
    run: Vec<RunConfig>,
}

/// Reads the `[[run]]` sections of a TOML study file.
pub fn load_config(path: &Path) -> Result<Vec<RunConfig>> {
    let text = std::fs::read_to_string(path)?;
    let file: StudyFile = toml::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    for run in &file.run {
        run.validate()?;
    }
    Ok(file.run)
}

/// Per-step convergence orders down a refinement ladder. Steps touching a
/// zero or non-finite error are degenerate (the quantity already converged
/// past measurability): flagged `None` and excluded from the average.
#[derive(Debug, Clone)]
pub struct Orders {
    pub per_step: Vec<Option<f64>>,
    pub average: Option<f64>,
}

/// `p_k = log(E_k / E_{k+1}) / log(N_{k+1} / N_k)` for each refinement step.
pub fn estimate_orders(ns: &[usize], errors: &[f64]) -> Result<Orders> {
    if ns.len() != errors.len() {
        return Err(Error::Dimension(format!(
            "{} mesh sizes vs {} errors",
            ns.len(),
            errors.len()
        )));
    }
    if ns.len() < 2 {
        return Err(Error::Parameter(
            "order estimation needs at least two refinement levels".into(),
        ));
    }
    if !ns.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Parameter(format!(
            "mesh sizes must be strictly increasing, got {ns:?}"
        )));
    }
    let per_step: Vec<Option<f64>> = errors
        .windows(2)
        .zip(ns.windows(2))
        .map(|(e, n)| {
            let usable = e[0] > 0.0 && e[1] > 0.0 && e[0].is_finite() && e[1].is_finite();
            usable.then(|| (e[0] / e[1]).ln() / (n[1] as f64 / n[0] as f64).ln())
        })
        .collect();
    let defined: Vec<f64> = per_step.iter().filter_map(|o| *o).collect();
    let average = if defined.is_empty() {
        None
    } else {
        Some(defined.iter().sum::<f64>() / defined.len() as f64)
    };
    Ok(Orders { per_step, average })
}

/// Errors and orders for several tracked quantities across one mesh ladder.
#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub title: String,
    pub quantities: Vec<String>,
    pub ns: Vec<usize>,
    /// `errors[row][quantity]`.
    pub errors: Vec<Vec<f64>>,
    /// `orders[row][quantity]`; the first row never has one.
    pub orders: Vec<Vec<Option<f64>>>,
    pub averages: Vec<Option<f64>>,
    /// Annotation carried into rendered output (e.g. an early-stop reason).
    pub note: Option<String>,
}

fn fmt_err(e: f64) -> String {
    format!("{e:.3e}")
}

fn fmt_order(o: Option<f64>) -> String {
    o.map(|p| format!("{p:.3}")).unwrap_or_default()
}

impl ConvergenceTable {
    pub fn from_errors(
        title: impl Into<String>,
        quantities: &[&str],
        ns: &[usize],
        errors: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if ns.is_empty() {
            return Err(Error::Parameter("table needs at least one row".into()));
        }
        if errors.len() != ns.len() {
            return Err(Error::Dimension(format!(
                "{} rows of errors vs {} mesh sizes",
                errors.len(),
                ns.len()
            )));
        }
        for (row, &n) in errors.iter().zip(ns) {
            if row.len() != quantities.len() {
                return Err(Error::Dimension(format!(
                    "row for N = {n} has {} entries, expected {}",
                    row.len(),
                    quantities.len()
                )));
            }
            if let Some(bad) = row.iter().find(|e| !e.is_finite() || **e < 0.0) {
                return Err(Error::Parameter(format!(
                    "row for N = {n} carries an invalid error value {bad}"
                )));
            }
        }

        let mut orders = vec![vec![None; quantities.len()]; ns.len()];
        let mut averages = vec![None; quantities.len()];
        if ns.len() >= 2 {
            for j in 0..quantities.len() {
                let column: Vec<f64> = errors.iter().map(|row| row[j]).collect();
                let est = estimate_orders(ns, &column)?;
                for (k, order) in est.per_step.into_iter().enumerate() {
                    orders[k + 1][j] = order;
                }
                averages[j] = est.average;
            }
        }
        Ok(Self {
            title: title.into(),
            quantities: quantities.iter().map(|q| q.to_string()).collect(),
            ns: ns.to_vec(),
            errors,
            orders,
            averages,
            note: None,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("N");
        for q in &self.quantities {
            out.push_str(&format!(",{q},{q}_order"));
        }
        out.push('\n');
        for (i, &n) in self.ns.iter().enumerate() {
            out.push_str(&n.to_string());
            for j in 0..self.quantities.len() {
                out.push_str(&format!(
                    ",{},{}",
                    fmt_err(self.errors[i][j]),
                    fmt_order(self.orders[i][j])
                ));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!("## {}\n\n", self.title);
        out.push_str("| N |");
        for q in &self.quantities {
            out.push_str(&format!(" {q} | order |"));
        }
        out.push('\n');
        out.push_str("|---:|");
        for _ in &self.quantities {
            out.push_str("---:|---:|");
        }
        out.push('\n');
        for (i, &n) in self.ns.iter().enumerate() {
            out.push_str(&format!("| {n} |"));
            for j in 0..self.quantities.len() {
                out.push_str(&format!(
                    " {} | {} |",
                    fmt_err(self.errors[i][j]),
                    fmt_order(self.orders[i][j])
                ));
            }
            out.push('\n');
        }
        let averages: Vec<String> = self
            .quantities
            .iter()
            .zip(&self.averages)
            .filter_map(|(q, a)| a.map(|a| format!("{q} {a:.3}")))
            .collect();
        if !averages.is_empty() {
            out.push_str(&format!("\nAverage orders: {}.\n", averages.join(", ")));
        }
        if let Some(note) = &self.note {
            out.push_str(&format!("\nNote: {note}\n"));
        }
        out
    }
}

/// Renders `table` to `path` in the requested format.
pub fn emit(table: &ConvergenceTable, format: OutputFormat, path: &Path) -> Result<()> {
    if table.ns.is_empty() {
        return Err(Error::Parameter("refusing to emit an empty table".into()));
    }
    let text = match format {
        OutputFormat::Csv => table.to_csv(),
        OutputFormat::Markdown => table.to_markdown(),
    };
    std::fs::write(path, text)?;
    Ok(())
}

/// Shared ladder loop of the studies: `step` turns one mesh size into a
/// row of error values; a mid-ladder failure still writes the rows
/// collected so far, annotated, before the error propagates.
fn run_ladder(
    config: &RunConfig,
    title: String,
    quantities: &[&str],
    mut step: impl FnMut(usize) -> Result<Vec<f64>>,
) -> Result<ConvergenceTable> {
    let mut ns_done: Vec<usize> = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for &n in &config.n_list {
        match step(n) {
            Ok(row) => {
                rows.push(row);
                ns_done.push(n);
            }
            Err(e) => {
                let msg = format!("N = {n}: {e}");
                if !ns_done.is_empty() {
                    if let Ok(mut partial) =
                        ConvergenceTable::from_errors(title.clone(), quantities, &ns_done, rows)
                    {
                        partial.note = Some(format!("stopped early: {msg}"));
                        if let Some(path) = &config.out {
                            let _ = emit(&partial, config.format, path);
                        }
                    }
                }
                return Err(Error::Parameter(msg));
            }
        }
    }
    let table = ConvergenceTable::from_errors(title, quantities, &ns_done, rows)?;
    if let Some(path) = &config.out {
        emit(&table, config.format, path)?;
    }
    Ok(table)
}

/// Runs the 1D refinement study: solves at every N in the ladder and
/// tabulates the nodal sup norm, integral norms, and the recovered left
/// derivative error. Writes the table when `out` is set.
pub fn run_study_1d(config: &RunConfig) -> Result<ConvergenceTable> {
    config.validate()?;
    let problem = config.problem_1d()?;
    let title = format!(
        "quartic interface: alpha = {:.6}, beta = ({}, {}), q = {}",
        config.alpha, config.beta_minus, config.beta_plus, config.q
    );
    run_ladder(config, title, &["linf", "l2", "h1", "ux_minus"], |n| {
        let grid = Grid1d::new(n)?;
        let sol = solve(&problem, grid)?;
        let r = error_norms_1d(&sol, &problem)?;
        Ok(vec![r.linf_nodal, r.l2, r.h1_semi, r.ux_minus])
    })
}

/// Runs the 2D augmented refinement study: solves the rectangular system
/// at every N in the ladder and tabulates the integral norms of u, the
/// interface flux errors per side, and the tube error of the flux unknown.
/// Without an interface (`r_gamma = 0`) the flux columns are identically
/// zero and their orders stay empty.
pub fn run_study_2d(config: &RunConfig) -> Result<ConvergenceTable> {
    config.validate()?;
    let problem = config.problem_2d()?;
    let title = config.title_2d("augmented", true);
    let quantities = ["l2", "h1", "flux_minus", "flux_plus", "v_l2"];
    run_ladder(config, title, &quantities, |n| {
        let mesh = build_mesh(problem.domain, n)?;
        let tube = extract_tube(&mesh, &problem.interface, config.tube_epsilon(&problem, mesh.h))?;
        let sol = solve_augmented(&problem, &mesh, &tube, config.method)?;
        let r = error_norms_2d(&sol, &problem)?;
        Ok(vec![r.l2, r.h1_semi, r.flux_minus, r.flux_plus, r.v_l2_tube])
    })
}

/// Runs the standard-FEM baseline study on the same ladder: P1 Galerkin
/// with the interface line source but no flux unknowns.
pub fn run_study_2d_standard(config: &RunConfig) -> Result<ConvergenceTable> {
    config.validate()?;
    let problem = config.problem_2d()?;
    let title = config.title_2d("standard fem", false);
    run_ladder(config, title, &["l2", "h1"], |n| {
        let mesh = build_mesh(problem.domain, n)?;
        let sol = solve_standard_fem(&problem, &mesh)?;
        let r = error_norms_2d(&sol, &problem)?;
        Ok(vec![r.l2, r.h1_semi])
    })
}
