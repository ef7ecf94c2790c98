use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use xnls_core::acceptance::{Acceptance, CriterionResult};
use xnls_core::evolution::{evolve, Criticality};
use xnls_core::field::Spectrum;
use xnls_core::harness::standard_suite;
use xnls_core::io::{
    list_snapshots, read_series, read_snapshot, read_snapshot_time, write_atomic, write_snapshot, write_tables,
    SnapshotWriter, SERIES_FILE,
};
use xnls_core::orlicz::{luxemburg_norm, OrliczSpec, OrliczVariant};
use xnls_core::profiles::ScaledProfileField;
use xnls_core::radial::Integrable;
use xnls_core::rearrangement::{rearrange, rearrangement_invariants};
use xnls_core::scattering::{
    apriori_ratio, bootstrap_ratios, scattering_test, slice_norms, space_time_norms, space_time_norms_half_cadence,
    st_deviation, transported, BootstrapRatios, SliceNorms, SliceOptions, SpaceTimeNorms, MIN_SAMPLES,
};

use crate::config::{ExperimentConfig, Format};
use crate::manifest::{start_run, RunManifest, CONFIG_ECHO};
use crate::CliError;

/// Most transported states kept for the pairwise scattering distances.
const MAX_STATES: usize = 32;

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| CliError::Runtime(format!("cannot serialize report: {e}")))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    write_atomic(path, text.as_bytes()).map_err(CliError::from_core)
}

fn config_base(config_path: &Path) -> PathBuf {
    config_path.parent().map(Path::to_path_buf).unwrap_or_default()
}

#[derive(Serialize)]
struct EvolveSummary {
    h0: f64,
    criticality: Criticality,
    steps_done: usize,
    completed: bool,
    abort: Option<String>,
    wrapped_at: Option<f64>,
    mass_drift: f64,
    hamiltonian_drift: f64,
    snapshots: usize,
}

pub fn evolve_cmd(config_path: &Path, overrides: &[String]) -> Result<(), CliError> {
    let cfg = ExperimentConfig::load(config_path, overrides)?;
    let dir = cfg.output.directory.clone();
    let echo = cfg.echo()?;
    let u0 = cfg.initial_field(&config_base(config_path))?;
    let sim = cfg.sim_config()?;
    let mut manifest = start_run(&dir, "evolve", &echo)?;
    let mut writer = SnapshotWriter::new(&dir, cfg.diagnostics.snapshot_every).map_err(CliError::from_core)?;
    let outcome = evolve(&u0, &sim, &mut [&mut writer]).map_err(CliError::from_core)?;
    if outcome.completed() {
        if let Some(last) = outcome.series.rows.last() {
            writer
                .finish(outcome.series.rows.len() - 1, last.t, &outcome.final_field)
                .map_err(CliError::from_core)?;
        }
    }
    write_tables(&dir, &outcome).map_err(CliError::from_core)?;
    let summary = EvolveSummary {
        h0: outcome.h0,
        criticality: outcome.criticality,
        steps_done: outcome.steps_done,
        completed: outcome.completed(),
        abort: outcome.abort.as_ref().map(ToString::to_string),
        wrapped_at: outcome.wrapped_at,
        mass_drift: outcome.mass_drift(),
        hamiltonian_drift: outcome.hamiltonian_drift(),
        snapshots: writer.written.len(),
    };
    if cfg.output.wants(Format::Json) {
        write_file(&dir.join("summary.json"), &to_json(&summary)?)?;
    }
    manifest.suites.insert("completed".into(), summary.completed);
    manifest.suites.insert("mass_conserved".into(), summary.mass_drift < 1e-10);
    manifest.write(&dir)?;
    eprintln!(
        "evolve: {} steps, mass drift {:.3e}, H drift {:.3e}, {} snapshots in {}",
        summary.steps_done,
        summary.mass_drift,
        summary.hamiltonian_drift,
        summary.snapshots,
        dir.display()
    );
    match outcome.abort {
        Some(e) => Err(CliError::Runtime(e.to_string())),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct IntervalReport {
    interval: (f64, f64),
    norms: SpaceTimeNorms,
    /// Relative change of `st` when every other sample is dropped.
    cadence_change: f64,
    st_deviation: f64,
    apriori_ratio: Option<f64>,
    bootstrap: Option<BootstrapRatios>,
}

#[derive(Serialize)]
struct ScatteringSummary {
    window: (f64, f64),
    times: Vec<f64>,
    distance_to_final: Vec<f64>,
    max_pairwise: f64,
    tolerance: f64,
}

#[derive(Serialize)]
struct OrliczEnds {
    variant: OrliczVariant,
    threshold: f64,
    initial: f64,
    last: f64,
}

#[derive(Serialize)]
struct DiagnoseReport {
    run_id: Option<String>,
    nonlinear: bool,
    snapshots: usize,
    intervals: Vec<IntervalReport>,
    orlicz: OrliczEnds,
    scattering: ScatteringSummary,
    pass: DiagnosePass,
}

#[derive(Serialize)]
struct DiagnosePass {
    ratios_finite: bool,
    scattering_converged: bool,
}

fn missing(detail: String) -> CliError {
    CliError::Runtime(format!("incomplete run directory: {detail}"))
}

pub fn diagnose_cmd(run_dir: &Path, intervals: &[(f64, f64)], window_start: Option<f64>) -> Result<(), CliError> {
    let cfg = match std::fs::read_to_string(run_dir.join(CONFIG_ECHO)) {
        Ok(text) => ExperimentConfig::from_toml(&text, &[])?,
        Err(_) => return Err(missing(format!("no {CONFIG_ECHO} in `{}`", run_dir.display()))),
    };
    let manifest = RunManifest::read(run_dir).ok();
    if let Some(m) = &manifest {
        if !m.verify(run_dir)? {
            return Err(CliError::Runtime("manifest hash does not match config.echo".into()));
        }
    }
    let listed = list_snapshots(run_dir).map_err(|e| missing(format!("snapshots: {e}")))?;
    if listed.len() < MIN_SAMPLES || listed[0].0 != 0 {
        return Err(missing(format!("{} snapshots, need index 0 and at least {MIN_SAMPLES}", listed.len())));
    }
    let times = listed
        .iter()
        .map(|(_, p)| read_snapshot_time(p))
        .collect::<xnls_core::Result<Vec<f64>>>()
        .map_err(|e| missing(e.to_string()))?;
    let t_last = *times.last().expect("nonempty");
    if run_dir.join(SERIES_FILE).exists() {
        let series = read_series(run_dir).map_err(|e| missing(format!("{SERIES_FILE}: {e}")))?;
        let t_series = series.rows.last().map_or(0.0, |r| r.t);
        if (t_series - t_last).abs() > 1e-9 * t_series.abs().max(1.0) {
            return Err(missing(format!("last snapshot at t = {t_last}, series ends at t = {t_series}")));
        }
    }
    let (_, u0) = read_snapshot(&listed[0].1).map_err(|e| missing(e.to_string()))?;
    let reference = u0.spectrum();
    let opts = SliceOptions { nonlinear: cfg.time.nonlinear, with_ltilde: cfg.diagnostics.with_ltilde };
    let start = window_start.unwrap_or_else(|| cfg.window_start());
    let in_window: Vec<usize> = (0..listed.len()).filter(|&i| times[i] >= start - 1e-9).collect();
    let stride = in_window.len().div_ceil(MAX_STATES).max(1);
    let mut keep: Vec<usize> = in_window.iter().copied().step_by(stride).collect();
    if let Some(&last) = in_window.last() {
        if keep.last() != Some(&last) {
            keep.push(last);
        }
    }
    let computed = listed
        .par_iter()
        .enumerate()
        .map(|(i, (_, path))| -> Result<(SliceNorms, Option<(f64, Spectrum)>), CliError> {
            let (t, u) = read_snapshot(path).map_err(|e| missing(e.to_string()))?;
            let slice = slice_norms(t, &u, Some(&reference), opts).map_err(CliError::from_core)?;
            let state = keep.binary_search(&i).is_ok().then(|| (t, transported(t, &u)));
            Ok((slice, state))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let (slices, states): (Vec<SliceNorms>, Vec<Option<(f64, Spectrum)>>) = computed.into_iter().unzip();
    let states: Vec<(f64, Spectrum)> = states.into_iter().flatten().collect();

    let requested: Vec<(f64, f64)> = if !intervals.is_empty() {
        intervals.to_vec()
    } else if !cfg.diagnostics.intervals.is_empty() {
        cfg.diagnostics.intervals.iter().map(|iv| (iv[0], iv[1])).collect()
    } else {
        vec![(times[0], t_last)]
    };
    let mut reports = Vec::new();
    for iv in requested {
        let norms = space_time_norms(&slices, iv).map_err(CliError::from_core)?;
        let half = space_time_norms_half_cadence(&slices, iv).map_err(CliError::from_core)?;
        let cadence_change = if norms.st > 0.0 { (half.st - norms.st).abs() / norms.st } else { 0.0 };
        reports.push(IntervalReport {
            interval: iv,
            norms,
            cadence_change,
            st_deviation: st_deviation(&slices, iv).map_err(CliError::from_core)?,
            apriori_ratio: apriori_ratio(&norms).ok(),
            bootstrap: if opts.nonlinear { bootstrap_ratios(&slices, iv).map_err(CliError::from_core)? } else { None },
        });
    }
    let scat = scattering_test(&states, (start, t_last)).map_err(CliError::from_core)?;
    let tol = cfg.diagnostics.scattering_tol;
    let ratios_finite = reports.iter().all(|r| {
        r.norms.st.is_finite()
            && r.apriori_ratio.map_or(true, f64::is_finite)
            && r.bootstrap.map_or(true, |b| b.r1.is_finite() && b.r2.is_finite())
    });
    let spec = cfg.orlicz_spec()?;
    let (_, u_last) = read_snapshot(&listed[listed.len() - 1].1).map_err(|e| missing(e.to_string()))?;
    let orlicz = OrliczEnds {
        variant: spec.variant,
        threshold: spec.threshold,
        initial: luxemburg_norm(&u0, spec).map_err(CliError::from_core)?,
        last: luxemburg_norm(&u_last, spec).map_err(CliError::from_core)?,
    };
    let report = DiagnoseReport {
        run_id: manifest.map(|m| m.run_id),
        nonlinear: opts.nonlinear,
        snapshots: listed.len(),
        intervals: reports,
        orlicz,
        pass: DiagnosePass { ratios_finite, scattering_converged: scat.max_pairwise < tol },
        scattering: ScatteringSummary {
            window: scat.window,
            times: scat.times,
            distance_to_final: scat.distance_to_final,
            max_pairwise: scat.max_pairwise,
            tolerance: tol,
        },
    };
    write_file(&run_dir.join("report.json"), &to_json(&report)?)?;
    if cfg.output.wants(Format::Csv) {
        write_file(&run_dir.join("slices.csv"), &slices_csv(&slices))?;
    }
    eprintln!(
        "diagnose: {} snapshots, max pairwise H¹ distance {:.3e} on [{start}, {t_last}]",
        report.snapshots, report.scattering.max_pairwise
    );
    Ok(())
}

/// Columns: `t, l2, grad_l2, l4, grad_l4, l8, linf, f_l43, grad_f_l43, dev_l2, dev_grad_l2, dev_l4, dev_grad_l4`.
fn slices_csv(slices: &[SliceNorms]) -> String {
    let mut out = String::from("t,l2,grad_l2,l4,grad_l4,l8,linf,f_l43,grad_f_l43,dev_l2,dev_grad_l2,dev_l4,dev_grad_l4\n");
    for s in slices {
        let d = s.deviation.unwrap_or_default();
        let cols = [
            s.t, s.l2, s.grad_l2, s.l4, s.grad_l4, s.l8, s.linf, s.f_l43, s.grad_f_l43, d.l2, d.grad_l2, d.l4, d.grad_l4,
        ];
        let row: Vec<String> = cols.iter().map(|c| format!("{c:e}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn inequalities_cmd(config_path: &Path, overrides: &[String]) -> Result<(), CliError> {
    let cfg = ExperimentConfig::load(config_path, overrides)?;
    let dir = cfg.output.directory.clone();
    let mut manifest = start_run(&dir, "inequalities", &cfg.echo()?)?;
    let report = standard_suite(&cfg.suite_config()?).map_err(CliError::from_core)?;
    if cfg.output.wants(Format::Json) {
        write_file(&dir.join("inequalities.json"), &to_json(&report)?)?;
    }
    if cfg.output.wants(Format::Csv) {
        let mut csv = String::from("id,max_ratio,members,skipped,refinement_change,trend_growth,pass\n");
        for r in &report.reports {
            let change = r.refinement.as_ref().map_or(String::new(), |x| format!("{:e}", x.rel_change));
            let growth = r.trend.as_ref().map_or(String::new(), |x| format!("{:e}", x.growth));
            csv.push_str(&format!(
                "{},{:e},{},{},{change},{growth},{}\n",
                r.id,
                r.max_ratio,
                r.members.len(),
                r.skipped.len(),
                r.pass
            ));
        }
        write_file(&dir.join("inequalities.csv"), &csv)?;
    }
    for r in &report.reports {
        manifest.suites.insert(r.id.clone(), r.pass);
    }
    manifest.suites.insert("cond_l4".into(), report.cond_l4.pass);
    manifest.suites.insert("dichotomy".into(), report.dichotomy.pass);
    manifest.write(&dir)?;
    eprintln!(
        "inequalities: {} checks, suite {}",
        report.reports.len(),
        if report.pass { "passed" } else { "FAILED" }
    );
    Ok(())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MoserRow {
    pub alpha: f64,
    pub grad_l2: f64,
    pub l2: f64,
    pub orlicz_l: f64,
    pub orlicz_ltilde: f64,
}

/// Moser fields by radial quadrature.
pub fn moser_table(alphas: &[f64]) -> Result<Vec<MoserRow>, CliError> {
    alphas
        .iter()
        .map(|&alpha| {
            let f = ScaledProfileField::moser(alpha).map_err(CliError::from_core)?;
            Ok(MoserRow {
                alpha,
                grad_l2: f.grad_energy().sqrt(),
                l2: f.mass().sqrt(),
                orlicz_l: luxemburg_norm(&f, OrliczSpec::l()).map_err(CliError::from_core)?,
                orlicz_ltilde: luxemburg_norm(&f, OrliczSpec::ltilde()).map_err(CliError::from_core)?,
            })
        })
        .collect()
}

pub fn moser_cmd(alphas: &[f64], out: Option<&Path>) -> Result<(), CliError> {
    if alphas.is_empty() {
        return Err(CliError::Usage("moser needs at least one --alpha".into()));
    }
    let rows = moser_table(alphas)?;
    let mut csv = String::from("alpha,grad_l2,l2,orlicz_L,orlicz_Ltilde\n");
    for r in &rows {
        csv.push_str(&format!("{:e},{:e},{:e},{:e},{:e}\n", r.alpha, r.grad_l2, r.l2, r.orlicz_l, r.orlicz_ltilde));
    }
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("cannot create `{}`: {e}", dir.display())))?;
            write_file(&dir.join("moser.csv"), &csv)?;
            write_file(&dir.join("moser.json"), &to_json(&rows)?)?;
        }
        None => print!("{csv}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct OrliczReport {
    input: String,
    t: f64,
    n: usize,
    l: f64,
    variant: OrliczVariant,
    threshold: f64,
    norm: f64,
}

fn read_input(path: &Path) -> Result<(f64, xnls_core::Field2D), CliError> {
    read_snapshot(path).map_err(|e| CliError::Usage(format!("cannot read snapshot `{}`: {e}", path.display())))
}

pub fn orlicz_cmd(input: &Path, variant: OrliczVariant, threshold: f64, out: Option<&Path>) -> Result<(), CliError> {
    let spec = OrliczSpec::new(variant, threshold).map_err(|e| CliError::Usage(e.to_string()))?;
    let (t, u) = read_input(input)?;
    let norm = luxemburg_norm(&u, spec).map_err(CliError::from_core)?;
    let report = OrliczReport {
        input: input.display().to_string(),
        t,
        n: u.grid().n,
        l: u.grid().l,
        variant,
        threshold,
        norm,
    };
    emit(&to_json(&report)?, out)
}

#[derive(Serialize)]
struct RearrangeReport {
    input: String,
    lp_deviation: Vec<(f64, f64)>,
    orlicz_deviation: f64,
    grad_ratio: f64,
    output: Option<String>,
}

pub fn rearrange_cmd(input: &Path, output: Option<&Path>, report_path: Option<&Path>) -> Result<(), CliError> {
    let (t, u) = read_input(input)?;
    let rep = rearrangement_invariants(&u, &[1.0, 2.0, 4.0, 8.0], OrliczSpec::ltilde()).map_err(CliError::from_core)?;
    if let Some(path) = output {
        write_snapshot(path, t, &rearrange(&u)).map_err(CliError::from_core)?;
    }
    let report = RearrangeReport {
        input: input.display().to_string(),
        lp_deviation: rep.lp_deviation,
        orlicz_deviation: rep.orlicz_deviation,
        grad_ratio: rep.grad_ratio,
        output: output.map(|p| p.display().to_string()),
    };
    emit(&to_json(&report)?, report_path)
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => write_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Runs the selected acceptance criteria; any failure exits with the runtime code.
pub fn fulltest_cmd(only: &[u8], out: Option<&Path>) -> Result<(), CliError> {
    let ids: Vec<u8> = if only.is_empty() { (1..=10).collect() } else { only.to_vec() };
    if let Some(bad) = ids.iter().find(|&&i| !(1..=10).contains(&i)) {
        return Err(CliError::Usage(format!("no acceptance criterion {bad}")));
    }
    let suite = Acceptance::new();
    let mut results: Vec<CriterionResult> = Vec::new();
    for id in ids {
        let r = suite.run(id).map_err(CliError::from_core)?;
        println!("{}", r.line());
        results.push(r);
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("cannot create `{}`: {e}", dir.display())))?;
        write_file(&dir.join("acceptance.json"), &to_json(&results)?)?;
    }
    let failed: Vec<u8> = results.iter().filter(|r| !r.pass).map(|r| r.id).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Runtime(format!("acceptance criteria failed: {failed:?}")))
    }
}
