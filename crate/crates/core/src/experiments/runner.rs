//! Experiment drivers: chaos decay, Galerkin refinement, pathwise
//! stability, condition audits and plain simulation runs.
//!
//! Every random ingredient of a cell is derived from (master seed, cell
//! index, role tag), so a re-run with the same config produces byte-equal
//! outputs at any worker count, and `--resume` can trust finished cells
//! keyed by the config hash.

use super::config::{
    ChaosSection, ExperimentConfig, ExperimentKind, ModelConfig, OuCouplingStyle,
};
use super::record::{load_cell, store_cell, CellRow, ResultRecord, RunMetrics};
use super::snapshot::Snapshot;
use crate::conditions::{run_all_audits, AuditConfig, AuditReport};
use crate::error::Error;
use crate::measures::chaos_statistic;
use crate::mvsde::{self, moment_monitor, steps_for, VectorState};
use crate::particles::{
    sample_initial_scalar, sample_initial_velocity, simulate_nse, simulate_scalar, L2State,
    ParticleEnsemble, PathEnsemble, PathMeta, SimParams, SpdeEquation,
};
use crate::rng::{seed_schedule, CounterStream};
use crate::spectral::SpectralVelocityField;
use crate::Result;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

/// Role tags for deriving independent sub-seeds from one cell seed.
const ROLE_SYSTEM_NOISE: u64 = 0x01;
const ROLE_SYSTEM_INIT: u64 = 0x02;
const ROLE_REFERENCE_NOISE: u64 = 0x03;
const ROLE_REFERENCE_INIT: u64 = 0x04;
const ROLE_SUBSAMPLE: u64 = 0x05;
const ROLE_AUDIT_SAMPLER: u64 = 0x06;

fn derive(seed: u64, role: u64) -> u64 {
    CounterStream::new(seed, role).at(0)
}

/// Everything a finished experiment leaves behind.
#[derive(Debug)]
pub struct ExperimentOutcome {
    pub record: ResultRecord,
    pub audits: Vec<AuditReport>,
    pub audit_violation: bool,
    pub metrics: RunMetrics,
}

/// Run the configured experiment, writing summary.json, rows.csv,
/// incremental cell files, audits.json (audit runs), optional snapshots and
/// metrics.json under `out_dir`.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    out_dir: &Path,
    resume: bool,
) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let started = Instant::now();
    let hash = cfg.hash();

    let (record, audits, work_units) = match cfg.kind {
        ExperimentKind::Chaos => {
            let (rows, work) = run_chaos(cfg, out_dir, resume, &hash)?;
            (ResultRecord::new(hash.clone(), "chaos", rows), vec![], work)
        }
        ExperimentKind::Galerkin => {
            let (rows, extra, work) = run_galerkin(cfg)?;
            let mut record = ResultRecord::new(hash.clone(), "galerkin", rows);
            record.extra = extra;
            (record, vec![], work)
        }
        ExperimentKind::Stability => {
            let (rows, extra, work) = run_stability(cfg)?;
            let mut record = ResultRecord::new(hash.clone(), "stability", rows);
            record.extra = extra;
            (record, vec![], work)
        }
        ExperimentKind::Audit => {
            let audits = run_audits(cfg)?;
            let mut record = ResultRecord::new(hash.clone(), "audit", vec![]);
            record.extra.insert(
                "violations".to_string(),
                audits.iter().filter(|a| a.violated).count() as f64,
            );
            (record, audits, 0.0)
        }
        ExperimentKind::Simulate => {
            let (rows, work) = run_simulate(cfg, out_dir)?;
            (ResultRecord::new(hash.clone(), "simulate", rows), vec![], work)
        }
    };

    record.write_into(out_dir)?;
    if cfg.kind == ExperimentKind::Audit {
        let json = serde_json::to_string_pretty(&audits)
            .map_err(|e| Error::Serialize(e.to_string()))?;
        let tmp = out_dir.join("audits.json.tmp");
        std::fs::write(&tmp, json)?;
        std::fs::rename(tmp, out_dir.join("audits.json"))?;
    }

    let wall = started.elapsed().as_secs_f64().max(1e-9);
    let metrics = RunMetrics {
        wall_seconds: wall,
        particle_mode_steps_per_second: work_units / wall,
        worker_threads: rayon::current_num_threads(),
    };
    metrics.write_into(out_dir)?;

    let audit_violation = audits.iter().any(|a| a.violated);
    Ok(ExperimentOutcome {
        record,
        audits,
        audit_violation,
        metrics,
    })
}

/// One chaos cell: the statistic plus moment diagnostics of the system run.
struct CellOutput {
    statistic: f64,
    sup_second_moment: f64,
    dissipation_integral: f64,
}

/// A system family the chaos experiment can drive: simulate N coupled
/// particles under a cell seed and expose the trajectory.
trait ChaosDriver: Sync {
    type State: L2State;

    fn simulate(
        &self,
        n: usize,
        noise_seed: u64,
        init_seed: u64,
    ) -> Result<(PathEnsemble<Self::State>, f64, f64)>;

    /// work accounting: state components per particle
    fn state_size(&self) -> f64;
}

struct OuDriver<'a> {
    cfg: &'a ExperimentConfig,
}

impl ChaosDriver for OuDriver<'_> {
    type State = VectorState;

    fn simulate(
        &self,
        n: usize,
        noise_seed: u64,
        _init_seed: u64,
    ) -> Result<(PathEnsemble<VectorState>, f64, f64)> {
        let ModelConfig::MeanFieldOu {
            dim,
            reversion,
            coupling,
            coupling_style,
            noise_sigma,
            initial,
        } = &self.cfg.model
        else {
            return Err(Error::config("OU driver needs the mean-field OU model"));
        };
        let run = &self.cfg.run;
        let init = vec![vec![*initial; *dim]; n];
        let streams = CounterStream::new(noise_seed, 0);
        let path = match coupling_style {
            OuCouplingStyle::Mean => {
                let model = mvsde::models::MeanFieldOu {
                    dim: *dim,
                    reversion: *reversion,
                    coupling: *coupling,
                    noise: *noise_sigma,
                };
                mvsde::simulate(&model, init, run.t_end, run.dt, run.save_stride, &streams)?
            }
            OuCouplingStyle::Drag => {
                let model = mvsde::models::StokesCoupledOu {
                    dim: *dim,
                    reversion: *reversion,
                    drag: *coupling,
                    noise: *noise_sigma,
                };
                mvsde::simulate(&model, init, run.t_end, run.dt, run.save_stride, &streams)?
            }
        };
        let report = moment_monitor(&path, 2.0);
        let ensemble_path = PathEnsemble::new(path.times, path.states, PathMeta::default())?;
        Ok((
            ensemble_path,
            report.sup_moment,
            report.dissipation_integral,
        ))
    }

    fn state_size(&self) -> f64 {
        match &self.cfg.model {
            ModelConfig::MeanFieldOu { dim, .. } => *dim as f64,
            _ => 1.0,
        }
    }
}

struct SpectralDriver<'a> {
    cfg: &'a ExperimentConfig,
}

impl ChaosDriver for SpectralDriver<'_> {
    type State = SpectralVelocityField;

    fn simulate(
        &self,
        n: usize,
        noise_seed: u64,
        init_seed: u64,
    ) -> Result<(PathEnsemble<SpectralVelocityField>, f64, f64)> {
        let spec = self
            .cfg
            .spde_spec(noise_seed)?
            .ok_or_else(|| Error::config("spectral driver needs a spectral model"))?;
        if !matches!(spec.equation, SpdeEquation::NavierStokes2d { .. }) {
            return Err(Error::config(
                "the chaos experiment drives the fluid system or the OU family",
            ));
        }
        let run = &self.cfg.run;
        let ids: Vec<u64> = (0..n as u64).collect();
        let initial = sample_initial_velocity(
            spec.modes,
            spec.domain_size,
            n,
            init_seed,
            self.cfg.initial_amplitude(),
            &ids,
        );
        let sim = SimParams {
            t_end: run.t_end,
            dt: run.dt,
            save_stride: run.save_stride,
            stop_threshold: None,
        };
        let run_out = simulate_nse(&spec, initial, &sim, Some(&ids), PathMeta::default())?;
        Ok((
            run_out.path,
            run_out.diagnostics.sup_mean_l2_sq(),
            run_out.diagnostics.dissipation_integral_first(),
        ))
    }

    fn state_size(&self) -> f64 {
        match &self.cfg.model {
            ModelConfig::NavierStokes2d { modes, .. } => {
                let side = (2 * modes + 1) as f64;
                side * side
            }
            _ => 1.0,
        }
    }
}

fn run_chaos(
    cfg: &ExperimentConfig,
    out_dir: &Path,
    resume: bool,
    hash: &str,
) -> Result<(Vec<CellRow>, f64)> {
    let section = cfg.chaos.as_ref().expect("validated");
    match &cfg.model {
        ModelConfig::MeanFieldOu { .. } => {
            chaos_cells(&OuDriver { cfg }, cfg, section, out_dir, resume, hash)
        }
        _ => chaos_cells(&SpectralDriver { cfg }, cfg, section, out_dir, resume, hash),
    }
}

fn chaos_cells<D: ChaosDriver>(
    driver: &D,
    cfg: &ExperimentConfig,
    section: &ChaosSection,
    out_dir: &Path,
    resume: bool,
    hash: &str,
) -> Result<(Vec<CellRow>, f64)> {
    let seeds = seed_schedule(cfg.run.master_seed, cfg.run.seeds);
    let steps = steps_for(cfg.run.t_end, cfg.run.dt)? as f64;

    let per_seed: Vec<Result<(Vec<CellRow>, f64)>> = seeds
        .par_iter()
        .enumerate()
        .map(|(seed_index, &cell_seed)| -> Result<(Vec<CellRow>, f64)> {
            let mut rows = Vec::new();
            let mut work = 0.0;
            // resume: reuse every finished cell of this seed
            let cached: Vec<Option<CellRow>> = section
                .n_schedule
                .iter()
                .map(|&n| {
                    if resume {
                        load_cell(out_dir, hash, n, seed_index)
                    } else {
                        None
                    }
                })
                .collect();

            let missing: Vec<usize> = section
                .n_schedule
                .iter()
                .enumerate()
                .filter(|(i, _)| cached[*i].is_none())
                .map(|(_, &n)| n)
                .collect();

            // the surrogate limit law: one independent large-N run per seed,
            // shared by every system size
            let reference = if missing.is_empty() {
                None
            } else {
                work += section.n_ref as f64 * steps * driver.state_size();
                match driver.simulate(
                    section.n_ref,
                    derive(cell_seed, ROLE_REFERENCE_NOISE),
                    derive(cell_seed, ROLE_REFERENCE_INIT),
                ) {
                    Ok((path, _, _)) => Some(Ok(path)),
                    Err(Error::BlowUp { particle, time, energy }) => {
                        Some(Err(Error::BlowUp { particle, time, energy }))
                    }
                    Err(e) => return Err(e),
                }
            };

            for (i, &n) in section.n_schedule.iter().enumerate() {
                if let Some(row) = &cached[i] {
                    rows.push(row.clone());
                    continue;
                }
                work += n as f64 * steps * driver.state_size();
                let outcome: Result<CellOutput> = (|| {
                    let reference = match reference.as_ref().unwrap() {
                        Ok(path) => path,
                        Err(_) => {
                            return Err(Error::BlowUp {
                                particle: 0,
                                time: 0.0,
                                energy: f64::NAN,
                            })
                        }
                    };
                    let (system, sup_moment, dissipation) = driver.simulate(
                        n,
                        derive(cell_seed, ROLE_SYSTEM_NOISE ^ (n as u64) << 8),
                        derive(cell_seed, ROLE_SYSTEM_INIT ^ (n as u64) << 8),
                    )?;
                    let subsample = if section.subsample == 0 {
                        n.min(section.n_ref)
                    } else {
                        section.subsample.min(n)
                    };
                    let statistic = chaos_statistic(
                        &system,
                        reference,
                        subsample,
                        derive(cell_seed, ROLE_SUBSAMPLE ^ (n as u64) << 8),
                    )?;
                    Ok(CellOutput {
                        statistic,
                        sup_second_moment: sup_moment,
                        dissipation_integral: dissipation,
                    })
                })();

                let row = match outcome {
                    Ok(out) => CellRow {
                        n,
                        seed_index,
                        seed: cell_seed,
                        statistic: Some(out.statistic),
                        sup_second_moment: out.sup_second_moment,
                        dissipation_integral: out.dissipation_integral,
                        blow_up: false,
                    },
                    // a blow-up marks the cell as failed; the experiment
                    // continues with the other cells
                    Err(Error::BlowUp { .. }) => CellRow {
                        n,
                        seed_index,
                        seed: cell_seed,
                        statistic: None,
                        sup_second_moment: f64::NAN,
                        dissipation_integral: f64::NAN,
                        blow_up: true,
                    },
                    Err(e) => return Err(e),
                };
                store_cell(out_dir, hash, &row)?;
                rows.push(row);
            }
            Ok((rows, work))
        })
        .collect();

    let mut rows = Vec::new();
    let mut work = 0.0;
    for r in per_seed {
        let (mut seed_rows, seed_work) = r?;
        rows.append(&mut seed_rows);
        work += seed_work;
    }
    // a schedule entry with no surviving cell means the experiment cannot
    // report the statistic it exists for
    for &n in &section.n_schedule {
        if rows.iter().filter(|r| r.n == n).all(|r| r.blow_up) {
            return Err(Error::BlowUp {
                particle: 0,
                time: 0.0,
                energy: f64::NAN,
            });
        }
    }
    Ok((rows, work))
}

fn run_galerkin(cfg: &ExperimentConfig) -> Result<(Vec<CellRow>, BTreeMap<String, f64>, f64)> {
    let section = cfg.galerkin.as_ref().expect("validated");
    if cfg.spde_spec(0)?.map(|s| s.equation.tag()) != Some(1) {
        return Err(Error::config(
            "the refinement experiment drives the fluid system",
        ));
    }
    let run = &cfg.run;
    let master = cfg.run.master_seed;
    let m_max = *section.mode_schedule.last().unwrap();
    let steps = steps_for(run.t_end, run.dt)? as f64;

    // one fixed smooth initial datum, truncated per level; one fixed noise
    // realization shared across levels through the nested mode streams
    let domain_size = cfg.spde_spec(0)?.unwrap().domain_size;
    let init_stream = CounterStream::new(derive(master, ROLE_SYSTEM_INIT), 0);
    let mut initial_fine = SpectralVelocityField::random(
        m_max,
        domain_size,
        4.0,
        cfg.initial_amplitude(),
        &init_stream,
    );
    if let Some(band) = cfg.initial_modes() {
        initial_fine = initial_fine.with_modes(band.min(m_max)).with_modes(m_max);
    }
    let noise_seed = derive(master, ROLE_SYSTEM_NOISE);

    let mut paths = Vec::new();
    let mut extra = BTreeMap::new();
    let mut work = 0.0;
    for &m in &section.mode_schedule {
        let mut spec = cfg.spde_spec(noise_seed)?.unwrap();
        spec.modes = m;
        let sim = SimParams {
            t_end: run.t_end,
            dt: run.dt,
            save_stride: run.save_stride,
            stop_threshold: None,
        };
        let initial = vec![initial_fine.with_modes(m)];
        let out = simulate_nse(&spec, initial, &sim, None, PathMeta::default())?;
        let side = (2 * m + 1) as f64;
        work += steps * side * side;
        let report = moment_level(&out.diagnostics.mean_l2_sq);
        extra.insert(format!("sup_moment_m{m:03}"), report);
        paths.push((m, out.path));
    }

    let mut rows = Vec::new();
    for pair in paths.windows(2) {
        let (m_coarse, coarse) = &pair[0];
        let (_, fine) = &pair[1];
        let mut diff = 0.0f64;
        for (fa, fb) in coarse.frames().iter().zip(fine.frames().iter()) {
            diff = diff.max(fa[0].l2_distance_sq(&fb[0]));
        }
        rows.push(CellRow {
            n: *m_coarse,
            seed_index: 0,
            seed: master,
            statistic: Some(diff.sqrt()),
            sup_second_moment: extra[&format!("sup_moment_m{m_coarse:03}")],
            dissipation_integral: 0.0,
            blow_up: false,
        });
    }

    let moments: Vec<f64> = section
        .mode_schedule
        .iter()
        .map(|m| extra[&format!("sup_moment_m{m:03}")])
        .collect();
    let band = moments.iter().copied().fold(f64::MIN, f64::max)
        / moments.iter().copied().fold(f64::MAX, f64::min).max(1e-300);
    extra.insert("moment_band_ratio".to_string(), band);
    Ok((rows, extra, work))
}

fn moment_level(mean_l2_sq: &[f64]) -> f64 {
    mean_l2_sq.iter().copied().fold(0.0, f64::max)
}

fn run_stability(cfg: &ExperimentConfig) -> Result<(Vec<CellRow>, BTreeMap<String, f64>, f64)> {
    let section = cfg.stability.as_ref().expect("validated");
    if cfg.spde_spec(0)?.map(|s| s.equation.tag()) != Some(1) {
        return Err(Error::config(
            "the stability experiment drives the fluid system",
        ));
    }
    let run = &cfg.run;
    let master = run.master_seed;
    let noise_seed = derive(master, ROLE_SYSTEM_NOISE);
    let spec = cfg.spde_spec(noise_seed)?.unwrap();
    let steps = steps_for(run.t_end, run.dt)? as f64;

    let init_stream = CounterStream::new(derive(master, ROLE_SYSTEM_INIT), 0);
    let base_initial = SpectralVelocityField::random(
        spec.modes,
        spec.domain_size,
        3.0,
        cfg.initial_amplitude(),
        &init_stream.substream(0),
    );
    let mut bump =
        SpectralVelocityField::random(spec.modes, spec.domain_size, 3.0, 1.0, &init_stream.substream(1));
    bump.scale_mut(1.0 / bump.l2_norm_sq().sqrt());

    let sim = SimParams {
        t_end: run.t_end,
        dt: run.dt,
        save_stride: run.save_stride,
        stop_threshold: None,
    };
    // identical noise across the paired runs: same seed, same stream id
    let base = simulate_nse(&spec, vec![base_initial.clone()], &sim, None, PathMeta::default())?;
    let side = (2 * spec.modes + 1) as f64;
    let mut work = steps * side * side;

    let mut epsilons = Vec::new();
    for &e in &section.epsilons {
        epsilons.push(e);
        epsilons.push(e / 2.0);
    }

    let mut rows = Vec::new();
    let mut extra = BTreeMap::new();
    let mut lambda_worst = f64::MIN;
    let mut terminal = Vec::new();
    for (i, &eps) in epsilons.iter().enumerate() {
        let mut initial = base_initial.clone();
        initial.axpy(eps, &bump);
        let perturbed = simulate_nse(&spec, vec![initial], &sim, None, PathMeta::default())?;
        work += steps * side * side;
        // gap stream on the saved grid
        let mut lambda = f64::MIN;
        let mut gap_end = 0.0;
        for (frame, (fa, fb)) in base
            .path
            .frames()
            .iter()
            .zip(perturbed.path.frames())
            .enumerate()
        {
            let t = base.path.times()[frame];
            let gap = fa[0].l2_distance_sq(&fb[0]).sqrt();
            if t > 0.0 && gap > 0.0 {
                lambda = lambda.max((gap / eps).ln() / t);
            }
            gap_end = gap;
        }
        terminal.push(gap_end);
        lambda_worst = lambda_worst.max(lambda);
        extra.insert(format!("epsilon_{i}"), eps);
        rows.push(CellRow {
            n: i + 1,
            seed_index: 0,
            seed: master,
            statistic: Some(gap_end),
            sup_second_moment: base.diagnostics.sup_mean_l2_sq(),
            dissipation_integral: base.diagnostics.dissipation_integral_first(),
            blow_up: false,
        });
    }
    for (pair, &eps) in section.epsilons.iter().enumerate() {
        let g_full = terminal[2 * pair];
        let g_half = terminal[2 * pair + 1];
        extra.insert(format!("ratio_eps{eps:e}"), g_full / g_half);
    }
    extra.insert("gronwall_lambda".to_string(), lambda_worst);
    Ok((rows, extra, work))
}

fn run_audits(cfg: &ExperimentConfig) -> Result<Vec<AuditReport>> {
    let section = cfg.audit.as_ref().expect("validated");
    let spec = cfg
        .spde_spec(derive(cfg.run.master_seed, ROLE_SYSTEM_NOISE))?
        .ok_or_else(|| Error::config("audits are wired for the spectral models"))?;
    let audit_cfg = AuditConfig {
        samples: section.samples,
        seed: derive(cfg.run.master_seed, ROLE_AUDIT_SAMPLER),
        declared_constant: section.declared_constant,
        ensemble_size: section.ensemble_size,
    };
    run_all_audits(&spec, &audit_cfg)
}

fn run_simulate(cfg: &ExperimentConfig, out_dir: &Path) -> Result<(Vec<CellRow>, f64)> {
    let n = cfg.simulate.map(|s| s.particles).unwrap_or(1);
    let run = &cfg.run;
    let noise_seed = derive(run.master_seed, ROLE_SYSTEM_NOISE);
    let init_seed = derive(run.master_seed, ROLE_SYSTEM_INIT);
    let spec = cfg
        .spde_spec(noise_seed)?
        .ok_or_else(|| Error::config("simulate runs drive the spectral models"))?;
    let sim = SimParams {
        t_end: run.t_end,
        dt: run.dt,
        save_stride: run.save_stride,
        stop_threshold: None,
    };
    let ids: Vec<u64> = (0..n as u64).collect();
    let steps = steps_for(run.t_end, run.dt)? as f64;
    let side = (2 * spec.modes + 1) as f64;
    let work = n as f64 * steps * side * side;

    let (snapshot, diag, final_energy) = match spec.equation.scalar_dim() {
        None => {
            let initial = sample_initial_velocity(
                spec.modes,
                spec.domain_size,
                n,
                init_seed,
                cfg.initial_amplitude(),
                &ids,
            );
            let out = simulate_nse(&spec, initial, &sim, Some(&ids), PathMeta::default())?;
            let energy = out
                .path
                .final_frame()
                .iter()
                .map(|s| s.l2_norm_sq())
                .sum::<f64>()
                / n as f64;
            (
                Snapshot::Velocity {
                    time: *out.path.times().last().unwrap(),
                    dt: run.dt,
                    states: out.path.final_frame().to_vec(),
                },
                out.diagnostics,
                energy,
            )
        }
        Some(dim) => {
            let initial = sample_initial_scalar(
                spec.modes,
                dim,
                spec.domain_size,
                n,
                init_seed,
                cfg.initial_amplitude(),
                &ids,
            );
            let out = simulate_scalar(&spec, initial, &sim, Some(&ids), PathMeta::default())?;
            let energy = out
                .path
                .final_frame()
                .iter()
                .map(|s| s.l2_norm_sq())
                .sum::<f64>()
                / n as f64;
            (
                Snapshot::Scalar {
                    time: *out.path.times().last().unwrap(),
                    dt: run.dt,
                    states: out.path.final_frame().to_vec(),
                },
                out.diagnostics,
                energy,
            )
        }
    };

    snapshot.write_to(&out_dir.join("final.snap"))?;
    let mut csv = String::from("t,l2_sq_first,dissipation_sq_first,mean_l2_sq,max_l2_sq\n");
    for i in 0..diag.times.len() {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            diag.times[i],
            diag.l2_sq_first[i],
            diag.dissipation_sq_first[i],
            diag.mean_l2_sq[i],
            diag.max_l2_sq[i]
        ));
    }
    let tmp = out_dir.join("diagnostics.csv.tmp");
    std::fs::write(&tmp, csv)?;
    std::fs::rename(tmp, out_dir.join("diagnostics.csv"))?;

    let rows = vec![CellRow {
        n,
        seed_index: 0,
        seed: run.master_seed,
        statistic: Some(final_energy),
        sup_second_moment: diag.sup_mean_l2_sq(),
        dissipation_integral: diag.dissipation_integral_first(),
        blow_up: false,
    }];
    Ok((rows, work))
}

/// Exact W2 between the ensembles stored in two snapshot files.
pub fn wasserstein_between_snapshots(a: &Path, b: &Path) -> Result<f64> {
    let sa = Snapshot::read_from(a)?;
    let sb = Snapshot::read_from(b)?;
    match (sa, sb) {
        (
            Snapshot::Velocity { states: va, .. },
            Snapshot::Velocity { states: vb, .. },
        ) => {
            let ea = ParticleEnsemble::new(va)?;
            let eb = ParticleEnsemble::new(vb)?;
            crate::measures::wasserstein2_states(&ea, &eb)
        }
        (Snapshot::Scalar { states: va, .. }, Snapshot::Scalar { states: vb, .. }) => {
            let ea = ParticleEnsemble::new(va)?;
            let eb = ParticleEnsemble::new(vb)?;
            crate::measures::wasserstein2_states(&ea, &eb)
        }
        _ => Err(Error::dim(
            "snapshots hold different state kinds".to_string(),
        )),
    }
}
