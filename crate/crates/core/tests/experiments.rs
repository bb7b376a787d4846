//! Integration tests of the experiment runners against the library API:
//! Galerkin refinement behavior, stability edge cases, and blow-up
//! bookkeeping in chaos cells.

use mvlab::experiments::{run_experiment, ExperimentConfig};
use mvlab::particles::{
    simulate_nse, InteractionKernel, NoiseModel, PathMeta, SimParams, SpdeEquation, SpdeModelSpec,
};
use mvlab::rng::CounterStream;
use mvlab::spectral::SpectralVelocityField;
use std::f64::consts::TAU;

const GALERKIN_SMOOTH: &str = r#"
schema_version = 1
kind = "galerkin"

[model]
system = "navier_stokes_2d"
modes = 64
viscosity = 1.0
kernel = { kind = "zero", lipschitz = 0.0 }
noise = { base_amplitude = 0.0, multiplicative = 0.0 }
initial_amplitude = 1.0

[run]
t_end = 0.25
dt = 0.005
save_stride = 10
master_seed = 42

[galerkin]
mode_schedule = [8, 16, 32, 64]

[output]
dir = "unused"
"#;

#[test]
fn galerkin_differences_decay_spectrally_for_smooth_data() {
    let cfg = ExperimentConfig::from_toml(GALERKIN_SMOOTH).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let outcome = run_experiment(&cfg, dir.path(), false).unwrap();
    let diffs: Vec<(usize, f64)> = outcome
        .record
        .rows
        .iter()
        .map(|r| (r.n, r.statistic.unwrap()))
        .collect();
    assert_eq!(diffs.len(), 3);
    for w in diffs.windows(2) {
        let ratio = w[0].1 / w[1].1;
        assert!(
            ratio >= 4.0,
            "refinement decay only {ratio:.2}x per doubling: {diffs:?}"
        );
    }
}

const GALERKIN_RESOLVED: &str = r#"
schema_version = 1
kind = "galerkin"

[model]
system = "navier_stokes_2d"
modes = 32
viscosity = 1.0
kernel = { kind = "zero", lipschitz = 0.0 }
noise = { base_amplitude = 0.0, multiplicative = 0.0 }
nonlinear = false
initial_amplitude = 1.0
initial_modes = 4

[run]
t_end = 0.1
dt = 0.005
save_stride = 5
master_seed = 42

[galerkin]
mode_schedule = [8, 16, 32]

[output]
dir = "unused"
"#;

#[test]
fn galerkin_linear_flow_with_resolved_data_is_exact() {
    // initial data band-limited to modes <= 4, nonlinear term off: every
    // level integrates the same diagonal updates on the same modes, so
    // differences sit at machine noise
    let cfg = ExperimentConfig::from_toml(GALERKIN_RESOLVED).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let outcome = run_experiment(&cfg, dir.path(), false).unwrap();
    assert_eq!(outcome.record.rows.len(), 2);
    for r in &outcome.record.rows {
        let d = r.statistic.unwrap();
        assert!(
            d <= 1e-13,
            "linear resolved flow should agree across levels, got {d} at m={}",
            r.n
        );
    }
}

const GALERKIN_NOISY: &str = r#"
schema_version = 1
kind = "galerkin"

[model]
system = "navier_stokes_2d"
modes = 32
viscosity = 1.0
kernel = { kind = "zero", lipschitz = 0.0 }
noise = { base_amplitude = 0.5, multiplicative = 0.2 }
initial_amplitude = 1.0

[run]
t_end = 0.25
dt = 0.005
save_stride = 10
master_seed = 43

[galerkin]
mode_schedule = [8, 16, 32]

[output]
dir = "unused"
"#;

#[test]
fn galerkin_moments_bounded_uniformly_across_levels() {
    // one fixed noise realization (nested mode streams): sup-in-time second
    // moments stay inside the configured band across truncation levels
    let cfg = ExperimentConfig::from_toml(GALERKIN_NOISY).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let outcome = run_experiment(&cfg, dir.path(), false).unwrap();
    let band = outcome.record.extra["moment_band_ratio"];
    assert!(
        band < cfg.tolerances.galerkin_moment_band,
        "moment band {band} exceeds {}",
        cfg.tolerances.galerkin_moment_band
    );
}

#[test]
fn stability_zero_perturbation_is_bitwise_zero_gap() {
    // two simulations from the same initial state with the same noise
    // master are the same computation
    let spec = SpdeModelSpec {
        equation: SpdeEquation::NavierStokes2d { viscosity: 1.0 },
        modes: 8,
        domain_size: TAU,
        kernel: InteractionKernel::zero(),
        noise: NoiseModel {
            retained_modes: 0,
            base_amplitude: 0.5,
            multiplicative: 0.2,
            clip: 10.0,
            include_mean_mode: false,
            growth: Default::default(),
            master_seed: 55,
        },
        include_nonlinear: true,
    };
    let stream = CounterStream::new(5, 0);
    let initial = vec![SpectralVelocityField::random(8, TAU, 3.0, 1.0, &stream)];
    let sim = SimParams {
        t_end: 0.2,
        dt: 0.01,
        save_stride: 5,
        stop_threshold: None,
    };
    let a = simulate_nse(&spec, initial.clone(), &sim, None, PathMeta::default()).unwrap();
    let b = simulate_nse(&spec, initial, &sim, None, PathMeta::default()).unwrap();
    for (fa, fb) in a.path.frames().iter().zip(b.path.frames()) {
        assert_eq!(fa[0].transverse(), fb[0].transverse());
        assert_eq!(fa[0].l2_distance_sq(&fb[0]), 0.0);
    }
}

const BLOWUP_CHAOS: &str = r#"
schema_version = 1
kind = "chaos"

[model]
system = "navier_stokes_2d"
modes = 8
viscosity = 1.0
kernel = { kind = "linear_custom", self_gain = 500.0, other_gain = 0.0, lipschitz = 500.0 }
noise = { base_amplitude = 0.0, multiplicative = 0.0 }
initial_amplitude = 10.0

[run]
t_end = 2.0
dt = 0.5
master_seed = 3
seeds = 1

[chaos]
n_schedule = [2]
n_ref = 4

[output]
dir = "unused"
"#;

#[test]
fn chaos_blow_up_in_every_cell_is_an_error() {
    // an explosive linear gain at a huge step overflows to infinity; with a
    // single schedule entry and every cell failed, the experiment cannot
    // report its statistic
    let cfg = ExperimentConfig::from_toml(BLOWUP_CHAOS).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let err = run_experiment(&cfg, dir.path(), false).unwrap_err();
    assert!(matches!(err, mvlab::Error::BlowUp { .. }), "{err}");
}

#[test]
fn ou_mean_coupling_style_parses_and_runs() {
    let toml = r#"
schema_version = 1
kind = "chaos"

[model]
system = "mean_field_ou"
dim = 2
reversion = -1.0
coupling = 0.5
coupling_style = "mean"
noise_sigma = 0.5

[run]
t_end = 0.2
dt = 0.01
save_stride = 5
master_seed = 12
seeds = 2

[chaos]
n_schedule = [4, 8]
n_ref = 16

[output]
dir = "unused"
"#;
    let cfg = ExperimentConfig::from_toml(toml).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let outcome = run_experiment(&cfg, dir.path(), false).unwrap();
    assert_eq!(outcome.record.rows.len(), 4);
    assert!(outcome.record.rows.iter().all(|r| !r.blow_up));
}
