//! Subcommand implementations. Each writes its files into one output
//! directory and returns a short human-readable summary.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use lvpatch::export::{write_conditions_csv, write_scan_csv, write_trajectory_csv};
use lvpatch::{
    almost_period_scan, attractivity_experiment, check_contraction, check_dispersal_bound,
    estimate_ultimate_bounds, integrate, verify_decay, ConditionReport, DispersalReport, Execution,
    RegionEstimate,
};
use serde::Serialize;

use crate::error::CliError;
use crate::plot::{emit_plot, PlotKind};
use crate::scenario::Scenario;

/// Settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
    pub execution: Execution,
    pub plots: bool,
}

impl RunConfig {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        RunConfig { out_dir: out_dir.into(), seed: None, execution: Execution::default(), plots: true }
    }

    fn apply(&self, scenario: &Scenario) -> Scenario {
        let mut s = scenario.clone();
        if let Some(seed) = self.seed {
            s.region.seed = seed;
        }
        s.region.execution = self.execution;
        s.attract.execution = self.execution;
        s.scan.execution = self.execution;
        s
    }

    fn prepare(&self) -> Result<&Path, CliError> {
        fs::create_dir_all(&self.out_dir)?;
        Ok(&self.out_dir)
    }

    fn in_subdir(&self, name: &str) -> RunConfig {
        RunConfig { out_dir: self.out_dir.join(name), ..self.clone() }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Integrates every initial state over the `simulate` horizon.
pub fn simulate(scenario: &Scenario, cfg: &RunConfig) -> Result<String, CliError> {
    let s = cfg.apply(scenario);
    s.validate()?;
    let dir = cfg.prepare()?;
    let (t0, t1) = (s.simulate.t0, s.simulate.t_end);
    let trajectories = cfg
        .execution
        .map(&s.initial_states, |z| integrate(&s.params, z, t0, t1, &s.integration))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::from_run)?;

    let mut summary = format!("simulated {} trajectories on [{t0}, {t1}]\n", trajectories.len());
    for (i, traj) in trajectories.iter().enumerate() {
        let csv = dir.join(format!("trajectory_{}.csv", i + 1));
        write_trajectory_csv(traj, create(&csv)?)?;
        if cfg.plots {
            let svg = dir.join(format!("trajectory_{}.svg", i + 1));
            emit_plot(std::slice::from_ref(&csv), PlotKind::TimeSeries, &format!("{}: initial state {}", s.name, i + 1), &svg)?;
        }
        let z = traj.last();
        summary.push_str(&format!(
            "  {}: {} samples, final (x1, y1, x2, y2) = ({:.6}, {:.6}, {:.6}, {:.6})\n",
            csv.display(),
            traj.len(),
            z[0],
            z[1],
            z[2],
            z[3]
        ));
    }
    Ok(summary)
}

#[derive(Debug, Serialize)]
struct DecaySummary {
    t0: f64,
    t1: f64,
    c: f64,
    tol: f64,
    v0: f64,
    v_end: f64,
    fitted_rate: Option<f64>,
    envelope_violations: usize,
    max_violation: f64,
    monotonicity_violations: usize,
    holds: bool,
}

#[derive(Debug, Serialize)]
struct CheckReport<'a> {
    scenario: &'a str,
    dispersal: &'a DispersalReport,
    region: Option<&'a RegionEstimate>,
    contraction: Option<&'a ConditionReport>,
    decay: Option<DecaySummary>,
    holds: bool,
}

/// Dispersal bounds, empirical region, contraction margins and the paired
/// decay run. Hypotheses that fail are reported, not raised.
pub fn check(scenario: &Scenario, cfg: &RunConfig) -> Result<String, CliError> {
    let s = cfg.apply(scenario);
    s.validate()?;
    let dir = cfg.prepare()?;
    let dispersal = check_dispersal_bound(&s.params);
    let mut summary = String::new();
    for r in &dispersal.inequalities {
        summary.push_str(&format!("  {:<40} margin {:+.6}  {}\n", r.name, r.margin, verdict(r.holds)));
    }

    let mut region = None;
    let mut contraction = None;
    let mut decay = None;
    if dispersal.holds {
        let reg = estimate_ultimate_bounds(&s.params, &s.region, &s.integration).map_err(CliError::from_run)?;
        let report = check_contraction(&s.params, &reg).map_err(CliError::from_run)?;
        summary.push_str(&format!(
            "  region lower {:?}\n  region upper {:?}\n",
            reg.lower.to_array(),
            reg.upper.to_array()
        ));
        for r in &report.inequalities {
            summary.push_str(&format!("  {:<40} margin {:+.6}  {}\n", r.name, r.margin, verdict(r.holds)));
        }
        summary.push_str(&format!("  eta = {:.6}, c = {:.6}\n", report.eta, report.c));

        let (z0, shadow0) = s.decay_pair()?;
        let d = verify_decay(
            &s.params,
            &z0,
            &shadow0,
            (s.decay.t0, s.decay.t1),
            report.c,
            &s.decay.options(),
            &s.integration,
        )
        .map_err(CliError::from_run)?;
        let mut out = create(&dir.join("decay.csv"))?;
        writeln!(out, "t,V,envelope")?;
        let v0 = d.samples[0].1;
        for &(t, v) in &d.samples {
            writeln!(out, "{},{},{}", t, v, v0 * (-d.c * (t - s.decay.t0)).exp())?;
        }
        out.flush()?;
        let holds = d.envelope_violations == 0;
        summary.push_str(&format!(
            "  decay V(t) <= V(t0) exp(-c (t - t0)) on [{}, {}]: {} ({} violations, max excess {:.3e}, fitted rate {})\n",
            s.decay.t0,
            s.decay.t1,
            verdict(holds),
            d.envelope_violations,
            d.max_violation,
            d.fitted_rate.map_or("n/a".to_string(), |r| format!("{r:.4}")),
        ));
        decay = Some(DecaySummary {
            t0: s.decay.t0,
            t1: s.decay.t1,
            c: d.c,
            tol: d.tol,
            v0,
            v_end: d.samples.last().map_or(v0, |p| p.1),
            fitted_rate: d.fitted_rate,
            envelope_violations: d.envelope_violations,
            max_violation: d.max_violation,
            monotonicity_violations: d.monotonicity_violations,
            holds,
        });
        region = Some(reg);
        contraction = Some(report);
    } else {
        summary.push_str("  dispersal bounds fail; region and contraction checks skipped\n");
    }

    let records = dispersal
        .inequalities
        .iter()
        .chain(contraction.iter().flat_map(|c: &ConditionReport| c.inequalities.iter()));
    write_conditions_csv(records, create(&dir.join("conditions.csv"))?)?;

    let holds = dispersal.holds
        && contraction.as_ref().is_some_and(|c| c.holds)
        && decay.as_ref().is_some_and(|d| d.holds);
    let report = CheckReport {
        scenario: &s.name,
        dispersal: &dispersal,
        region: region.as_ref(),
        contraction: contraction.as_ref(),
        decay,
        holds,
    };
    let mut out = create(&dir.join("report.json"))?;
    serde_json::to_writer_pretty(&mut out, &report).map_err(|e| CliError::Io(e.into()))?;
    writeln!(out)?;
    out.flush()?;

    Ok(format!("conditions for {}: {}\n{summary}", s.name, verdict(holds)))
}

fn verdict(holds: bool) -> &'static str {
    if holds {
        "holds"
    } else {
        "FAILS"
    }
}

/// Runs every initial state and reports pairwise convergence.
pub fn attract(scenario: &Scenario, cfg: &RunConfig) -> Result<String, CliError> {
    let s = cfg.apply(scenario);
    s.validate()?;
    let dir = cfg.prepare()?;
    let report =
        attractivity_experiment(&s.params, &s.initial_states, &s.attract, &s.integration).map_err(CliError::from_run)?;

    let mut csvs = Vec::new();
    for (i, traj) in report.trajectories.iter().enumerate() {
        let csv = dir.join(format!("trajectory_{}.csv", i + 1));
        write_trajectory_csv(traj, create(&csv)?)?;
        csvs.push(csv);
    }

    let mut out = create(&dir.join("pairs.csv"))?;
    writeln!(out, "i,j,converged_at,final_difference")?;
    for p in &report.pairs {
        let at = p.converged_at.map_or(String::new(), |t| t.to_string());
        writeln!(out, "{},{},{},{}", p.i + 1, p.j + 1, at, p.final_difference)?;
    }
    out.flush()?;

    let mut out = create(&dir.join("differences.csv"))?;
    let cols: Vec<String> = report.pairs.iter().map(|p| format!("d{}_{}", p.i + 1, p.j + 1)).collect();
    writeln!(out, "t,{}", cols.join(","))?;
    for (k, t) in report.grid.iter().enumerate() {
        let row: Vec<String> = report.pairs.iter().map(|p| p.differences[k].to_string()).collect();
        writeln!(out, "{},{}", t, row.join(","))?;
    }
    out.flush()?;

    if cfg.plots {
        emit_plot(&csvs, PlotKind::Overlay, &format!("{}: trajectories from {} initial states", s.name, csvs.len()), &dir.join("overlay.svg"))?;
    }

    let mut summary = format!(
        "attractivity for {} with eps = {}: {}\n",
        s.name,
        report.eps,
        if report.all_converged() { "all pairs converge" } else { "some pairs do not converge" }
    );
    for p in &report.pairs {
        summary.push_str(&format!(
            "  pair ({}, {}): converged at {}, final difference {:.3e}\n",
            p.i + 1,
            p.j + 1,
            p.converged_at.map_or("never".to_string(), |t| format!("t = {t:.3}")),
            p.final_difference
        ));
    }
    Ok(summary)
}

/// Scans shifts of the first initial state's trajectory for almost periods.
pub fn almost_period(scenario: &Scenario, cfg: &RunConfig) -> Result<String, CliError> {
    let s = cfg.apply(scenario);
    s.validate()?;
    let dir = cfg.prepare()?;
    let scan = &s.scan;
    let t0 = scan.window.0.min(scan.window.0 + scan.t_min).min(0.0);
    let t1 = scan.window.1.max(scan.window.1 + scan.t_max);
    let traj = integrate(&s.params, &s.initial_states[0], t0, t1, &s.integration).map_err(CliError::from_run)?;
    let result = almost_period_scan(&traj, scan).map_err(CliError::from_run)?;

    let csv = dir.join("scan.csv");
    write_scan_csv(&result, create(&csv)?)?;
    if cfg.plots {
        emit_plot(&[csv], PlotKind::Defect, &format!("{}: almost-period defect", s.name), &dir.join("scan.svg"))?;
    }

    let mut out = create(&dir.join("candidates.json"))?;
    serde_json::to_writer_pretty(&mut out, &result.candidates).map_err(|e| CliError::Io(e.into()))?;
    writeln!(out)?;
    out.flush()?;

    let accepted = result.accepted().count();
    let mut summary = format!(
        "almost-period scan for {} on T in [{}, {}], window [{}, {}], eps = {}: {} accepted\n",
        s.name, scan.t_min, scan.t_max, scan.window.0, scan.window.1, scan.epsilon, accepted
    );
    for c in &result.candidates {
        summary.push_str(&format!(
            "  T = {:.2}: defect {:.4} {}\n",
            c.shift,
            c.defect,
            if c.accepted { "accepted" } else { "rejected" }
        ));
    }
    Ok(summary)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Simulate,
    Check,
    Attract,
    AlmostPeriod,
    All,
}

impl Experiment {
    const EACH: [(Experiment, &'static str); 4] = [
        (Experiment::Simulate, "simulate"),
        (Experiment::Check, "check"),
        (Experiment::Attract, "attract"),
        (Experiment::AlmostPeriod, "almost-period"),
    ];
}

/// Runs one experiment, or all of them in named subdirectories.
pub fn run(experiment: Experiment, scenario: &Scenario, cfg: &RunConfig) -> Result<String, CliError> {
    match experiment {
        Experiment::Simulate => simulate(scenario, cfg),
        Experiment::Check => check(scenario, cfg),
        Experiment::Attract => attract(scenario, cfg),
        Experiment::AlmostPeriod => almost_period(scenario, cfg),
        Experiment::All => {
            let mut summary = String::new();
            for (exp, name) in Experiment::EACH {
                summary.push_str(&run(exp, scenario, &cfg.in_subdir(name))?);
            }
            Ok(summary)
        }
    }
}
