use std::f64::consts::TAU;
use std::sync::Arc;

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use num_complex::Complex64;

use ionpair::*;
use ionpair_bench::{mg25_trap, OMEGA_AX, OMEGA_RAD};

fn bench_equilibrium(c: &mut Criterion) {
    let two = mg25_trap(2);
    let ten = mg25_trap(10);
    c.bench_function("equilibrium_n2", |b| {
        b.iter(|| solve_equilibrium(black_box(&two)).unwrap())
    });
    c.bench_function("equilibrium_n10", |b| {
        b.iter(|| solve_equilibrium(black_box(&ten)).unwrap())
    });
}

fn bench_scale_solve(c: &mut Criterion) {
    let waveform = AxialWaveform::pulse(OMEGA_AX, TAU * 0.7e6, 0.5e-6, 0.5e-6, 0.0).unwrap();
    let opts = ScaleOdeOptions::default();
    c.bench_function("scale_ode_pulse", |b| {
        b.iter(|| solve_scale_ode(black_box(&waveform), OMEGA_AX, (0.0, 16e-6), &opts).unwrap())
    });
}

fn bench_mode_integration(c: &mut Criterion) {
    let model = CollisionModel::new(150.0 * OMEGA_AX * OMEGA_AX, 12.0 * OMEGA_AX, OMEGA_AX).unwrap();
    let scale: Arc<dyn ScaleFunction> = Arc::new(model);
    let profile = ModeProfile {
        scale,
        omega_rad: OMEGA_RAD,
        omega_kappa_sq: OMEGA_AX * OMEGA_AX,
    };
    let omega_out = (OMEGA_RAD * OMEGA_RAD - OMEGA_AX * OMEGA_AX).sqrt();
    let window = stationary_window(model.settle_time(), omega_out);
    let opts = ModeOptions::default();
    c.bench_function("mode_integrate_collision", |b| {
        b.iter(|| {
            let sol = integrate_mode(black_box(&profile), window, &opts).unwrap();
            extract_bogoliubov(&sol).unwrap()
        })
    });
}

fn bench_analytic(c: &mut Criterion) {
    let omega_in = (OMEGA_RAD * OMEGA_RAD - OMEGA_AX * OMEGA_AX).sqrt();
    c.bench_function("analytic_collision_beta", |b| {
        b.iter(|| {
            analytic_collision_beta_sq(
                black_box(150.0 * OMEGA_AX * OMEGA_AX),
                12.0 * OMEGA_AX,
                omega_in,
            )
            .unwrap()
        })
    });
    let model = CollisionModel::new(150.0 * OMEGA_AX * OMEGA_AX, 12.0 * OMEGA_AX, OMEGA_AX).unwrap();
    let profile = CollisionFrequencyProfile::new(&model, omega_in).unwrap();
    let window = (-model.settle_time(), model.settle_time());
    c.bench_function("wkb_contour_exponent", |b| {
        b.iter(|| wkb_beta_exponent(black_box(&profile), window).unwrap())
    });
}

fn bench_entanglement(c: &mut Criterion) {
    let coeffs = bogoliubov::BogoliubovCoefficients {
        alpha: Complex64::from_polar(0.8_f64.cosh(), 0.3),
        beta: Complex64::from_polar(0.8_f64.sinh(), -0.2),
        mode_index: None,
    };
    let s = squeeze_transform(&coeffs, Complex64::new(1.0, 0.0)).unwrap();
    let occ = ThermalOccupation::new(0.3, 0.1).unwrap();
    let sigma = basis_change(&evolve_covariance(&thermal_covariance(&occ), &s));
    c.bench_function("pt_symplectic_eigenvalues", |b| {
        b.iter(|| pt_symplectic_eigenvalues(black_box(&sigma)).unwrap())
    });
}

criterion_group!(
    benches,
    bench_equilibrium,
    bench_scale_solve,
    bench_mode_integration,
    bench_analytic,
    bench_entanglement
);
criterion_main!(benches);
