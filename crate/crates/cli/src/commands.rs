//! Subcommand implementations. Every command renders its files in memory
//! first, so callers can compare runs without touching the disk.

use std::path::{Path, PathBuf};

use serde_json::json;

use procure_core::mechanism::{AnchorRule, Solution, PROFIT_TIE_TOL};
use procure_core::settlement::settlement_rows;
use procure_core::verify::{self, VerificationReport, VerifyOptions};
use procure_core::{PriceSchedule, ProcurementProblem, QuantityGrid};

use crate::output::{num, sha256_hex, write_atomic, Table, CLOSED};
use crate::scenario::Scenario;
use crate::CliError;

/// Command-line settings layered over the scenario file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub grid_cells: Option<usize>,
    pub alpha: Option<f64>,
    pub admissible: Option<Vec<String>>,
    pub out: Option<PathBuf>,
    /// Reserved; recorded in the manifest only.
    pub seed: Option<u64>,
}

/// A loaded and validated scenario.
pub struct Prepared {
    pub scenario: Scenario,
    pub file_name: String,
    pub scenario_sha256: String,
    pub problem: ProcurementProblem,
    pub admissible: Option<Vec<usize>>,
    pub overrides: Overrides,
}

impl Prepared {
    pub fn load(path: &Path, overrides: Overrides) -> Result<Self, CliError> {
        let (scenario, bytes) = Scenario::load(path)?;
        Self::from_scenario(scenario, &bytes, path_name(path), overrides)
    }

    pub fn from_scenario(scenario: Scenario, bytes: &[u8], file_name: String, overrides: Overrides) -> Result<Self, CliError> {
        let problem = scenario.problem(overrides.grid_cells)?;
        let admissible = scenario.admissible_indices(problem.space(), overrides.admissible.as_deref())?;
        if let Some(a) = overrides.alpha.or(scenario.options.alpha) {
            procure_core::settlement::check_alpha(a).map_err(|e| CliError::Scenario(format!("alpha: {e}")))?;
        }
        Ok(Prepared {
            file_name,
            scenario_sha256: sha256_hex(bytes),
            scenario,
            problem,
            admissible,
            overrides,
        })
    }

    pub fn alpha(&self) -> Option<f64> {
        self.overrides.alpha.or(self.scenario.options.alpha)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.overrides
            .out
            .clone()
            .or_else(|| self.scenario.options.out.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"))
    }
}

fn path_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Result of the exclusion search, for the manifest.
#[derive(Debug, Clone)]
pub struct ExclusionSummary {
    pub evaluated: usize,
    pub heuristic: bool,
}

pub struct SolveRun {
    pub solution: Solution,
    pub exclusion: Option<ExclusionSummary>,
}

pub fn solve(prep: &Prepared, force_exclusion: bool) -> Result<SolveRun, CliError> {
    let p = &prep.problem;
    if force_exclusion || prep.scenario.options.exclusion_search {
        let r = p.exclusion_search(prep.scenario.options.max_subsets)?;
        return Ok(SolveRun {
            solution: r.solution,
            exclusion: Some(ExclusionSummary {
                evaluated: r.evaluated,
                heuristic: r.heuristic,
            }),
        });
    }
    Ok(SolveRun {
        solution: p.solve(prep.admissible.as_deref())?,
        exclusion: None,
    })
}

pub type Files = Vec<(String, Vec<u8>)>;

pub fn schedule_csv(problem: &ProcurementProblem, schedule: &PriceSchedule) -> Vec<u8> {
    let mut t = Table::new(&["q_MWh", "p_k$_per_MWh", "p_$_per_kWh", "t_k$"]);
    for k in 0..problem.grid().n_points() {
        // 1 k$/MWh is 1 $/kWh
        let p = schedule.price(k).map(num).unwrap_or_else(|| CLOSED.to_string());
        t.row([num(problem.grid().point(k)), p.clone(), p, num(schedule.payment(k))]);
    }
    t.into_bytes()
}

/// Reads back a schedule file written by [`schedule_csv`].
pub fn read_schedule_csv(bytes: &[u8], grid: QuantityGrid) -> Result<PriceSchedule, CliError> {
    let mut reader = csv::ReaderBuilder::new().from_reader(bytes);
    let mut prices = Vec::new();
    let mut t0 = None;
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Scenario(format!("schedule row {i}: {e}")))?;
        let parse = |j: usize| -> Result<f64, CliError> {
            rec[j].parse().map_err(|_| CliError::Scenario(format!("schedule row {i}: bad number {:?}", &rec[j])))
        };
        if i == 0 {
            t0 = Some(parse(3)?);
        }
        if &rec[1] == CLOSED {
            continue;
        }
        if prices.len() != i {
            return Err(CliError::Scenario(format!("schedule row {i}: reopens after a closed cell")));
        }
        prices.push(parse(1)?);
    }
    let t0 = t0.ok_or_else(|| CliError::Scenario("schedule file has no rows".into()))?;
    Ok(PriceSchedule::from_open_prices(grid, prices, t0)?)
}

pub fn outcome_csv(solution: &Solution) -> Vec<u8> {
    let mut t = Table::new(&[
        "type_id",
        "q_MWh",
        "payment_k$",
        "expected_cost_k$",
        "utility_k$",
        "admissible",
        "participates",
    ]);
    for o in &solution.outcome.types {
        t.row([
            o.id.clone(),
            num(o.q),
            num(o.payment),
            num(o.expected_cost),
            num(o.utility),
            o.admissible.to_string(),
            o.participates.to_string(),
        ]);
    }
    t.into_bytes()
}

pub fn settlement_csv(problem: &ProcurementProblem, solution: &Solution, alpha: f64) -> Result<Vec<u8>, CliError> {
    let rows = settlement_rows(problem, solution, alpha)?;
    let mut t = Table::with_preamble(
        &format!("alpha = {}", num(alpha)),
        &[
            "type_id",
            "w_m_per_s",
            "prob",
            "g_MWh",
            "realized_cost_k$",
            "payment_base_k$",
            "payment_expost_k$",
            "payment_risk_alpha_k$",
            "profit_k$",
        ],
    );
    for r in rows {
        t.row([
            r.type_id,
            num(r.w),
            num(r.prob),
            r.generation.map(num).unwrap_or_default(),
            num(r.realized_cost),
            num(r.payment_base),
            r.payment_expost.map(num).unwrap_or_else(|| "unsupported".into()),
            num(r.payment_risk),
            num(r.profit),
        ]);
    }
    Ok(t.into_bytes())
}

fn manifest(prep: &Prepared, command: &str, run: Option<&SolveRun>, files: &Files) -> Vec<u8> {
    let p = &prep.problem;
    let outputs: Vec<_> = files
        .iter()
        .map(|(name, bytes)| json!({ "file": name, "sha256": sha256_hex(bytes) }))
        .collect();
    let solution = run.map(|r| {
        let o = &r.solution.outcome;
        let anchor = match o.anchor {
            AnchorRule::WorstType { index } => json!({ "rule": "worst_type", "type": p.types()[index].id }),
            AnchorRule::Posterior { binding } => json!({ "rule": "posterior", "binding": p.types()[binding].id }),
        };
        json!({
            "t0_k$": o.t0,
            "anchor": anchor,
            "admissible": o.admissible.iter().map(|&x| p.types()[x].id.clone()).collect::<Vec<_>>(),
            "open_cells": r.solution.schedule.open_cells(),
            "buyer_utility_k$": o.buyer_utility,
            "buyer_utility_survival_k$": o.buyer_utility_survival,
            "exclusion_search": r.exclusion.as_ref().map(|e| json!({ "evaluated": e.evaluated, "heuristic": e.heuristic })),
        })
    });
    let value = json!({
        "tool": "procure",
        "version": env!("CARGO_PKG_VERSION"),
        "core_version": procure_core::VERSION,
        "command": command,
        "scenario": { "file": prep.file_name, "sha256": prep.scenario_sha256 },
        "seed": prep.overrides.seed,
        "cost_model": p.model().name(),
        "weather": p.weather().description(),
        "grid": { "q_max_MWh": p.grid().q_max(), "n_cells": p.grid().n_cells(), "dq_MWh": p.grid().dq() },
        "tolerances": {
            "tol_grid_k$": p.tol_grid(),
            "profit_tie_rel": PROFIT_TIE_TOL,
            "roundoff": verify::ROUNDOFF_TOL,
            "oracle": verify::ORACLE_TOL,
            "identity_rel": verify::IDENTITY_REL_TOL,
        },
        "alpha": prep.alpha(),
        "solution": solution,
        "outputs": outputs,
    });
    let mut text = serde_json::to_string_pretty(&value).expect("manifest serializes");
    text.push('\n');
    text.into_bytes()
}

/// Files produced by `solve` (and `exclusion-search`), manifest last.
pub fn solve_files(prep: &Prepared, run: &SolveRun, command: &str) -> Result<Files, CliError> {
    let p = &prep.problem;
    let mut files: Files = vec![
        ("schedule.csv".into(), schedule_csv(p, &run.solution.schedule)),
        ("outcome.csv".into(), outcome_csv(&run.solution)),
    ];
    if let Some(alpha) = prep.alpha() {
        files.push(("settlement.csv".into(), settlement_csv(p, &run.solution, alpha)?));
    }
    let m = manifest(prep, command, Some(run), &files);
    files.push(("run_manifest.json".into(), m));
    Ok(files)
}

pub fn plot_files(prep: &Prepared, run: &SolveRun) -> Files {
    let p = &prep.problem;
    let s = &run.solution.schedule;
    let ids: Vec<String> = p.types().iter().map(|x| format!("c_{}_k$_per_MWh", x.id)).collect();
    let mut header = vec!["q_MWh", "p_k$_per_MWh", "t_k$"];
    header.extend(ids.iter().map(String::as_str));
    let open = s.open_cells();
    let mut series = if open == 0 {
        Table::with_preamble("no open cells: procurement is closed on the whole grid", &header)
    } else {
        Table::new(&header)
    };
    for k in 0..open {
        let mut row = vec![num(p.grid().point(k)), num(s.open_prices()[k]), num(s.payment(k))];
        row.extend((0..p.types().len()).map(|x| num(p.cell_cost(x, k))));
        series.row(row);
    }
    if open > 0 {
        let mut row = vec![num(p.grid().point(open)), CLOSED.to_string(), num(s.payment(open))];
        row.extend((0..p.types().len()).map(|_| String::new()));
        series.row(row);
    }
    let mut markers = Table::new(&["type_id", "q_MWh", "t_k$", "participates"]);
    for o in &run.solution.outcome.types {
        markers.row([o.id.clone(), num(o.q), num(o.payment), o.participates.to_string()]);
    }
    let mut files: Files = vec![
        ("series.csv".into(), series.into_bytes()),
        ("markers.csv".into(), markers.into_bytes()),
    ];
    let m = manifest(prep, "plotdata", Some(run), &files);
    files.push(("run_manifest.json".into(), m));
    files
}

/// Full verification suite, on the corrupted copy when the scenario asks for a negative control.
pub fn verify_report(prep: &Prepared, run: &SolveRun) -> Result<VerificationReport, CliError> {
    let sol = match prep.scenario.options.negative_control {
        Some(factor) => verify::corrupted(&run.solution, factor),
        None => run.solution.clone(),
    };
    let mut options = VerifyOptions::default();
    if let Some(a) = prep.alpha() {
        if !options.alphas.contains(&a) {
            options.alphas.push(a);
        }
    }
    Ok(verify::verify_solution(&prep.problem, &sol, &options)?)
}

pub fn write_files(dir: &Path, files: &Files) -> Result<Vec<PathBuf>, CliError> {
    files
        .iter()
        .map(|(name, bytes)| {
            let path = dir.join(name);
            write_atomic(&path, bytes)?;
            Ok(path)
        })
        .collect()
}

pub fn cmd_solve(path: &Path, overrides: Overrides) -> Result<Vec<PathBuf>, CliError> {
    let prep = Prepared::load(path, overrides)?;
    let run = solve(&prep, false)?;
    write_files(&prep.out_dir(), &solve_files(&prep, &run, "solve")?)
}

pub fn cmd_exclusion(path: &Path, overrides: Overrides) -> Result<(Vec<String>, Vec<PathBuf>), CliError> {
    let prep = Prepared::load(path, overrides)?;
    let run = solve(&prep, true)?;
    let chosen = run
        .solution
        .outcome
        .admissible
        .iter()
        .map(|&x| prep.problem.types()[x].id.clone())
        .collect();
    let written = write_files(&prep.out_dir(), &solve_files(&prep, &run, "exclusion-search")?)?;
    Ok((chosen, written))
}

pub fn cmd_plotdata(path: &Path, overrides: Overrides) -> Result<Vec<PathBuf>, CliError> {
    let prep = Prepared::load(path, overrides)?;
    let run = solve(&prep, false)?;
    write_files(&prep.out_dir(), &plot_files(&prep, &run))
}

/// Runs the suite; the report is also written when an output directory is given.
pub fn cmd_verify(path: &Path, overrides: Overrides) -> Result<VerificationReport, CliError> {
    let write = overrides.out.clone();
    let prep = Prepared::load(path, overrides)?;
    let run = solve(&prep, false)?;
    let report = verify_report(&prep, &run)?;
    if let Some(dir) = write {
        let text = format!("{}\n{}", report.records(), report.summary_table());
        write_atomic(&dir.join("verify_report.txt"), text.as_bytes())?;
    }
    Ok(report)
}
