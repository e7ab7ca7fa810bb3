use fracscale::fast::{euler_step, integrate_cycle, shoot_periodic, FastField, StepScheme};
use fracscale::multiscale::{multiscale_solve, MacroConfig};
use fracscale::problems::{example1, example2, Overrides};
use std::f64::consts::PI;

fn residual_ratios(lambda: f64, period: f64) -> Vec<f64> {
    let field = FastField::new(move |_u, v: f64| lambda * v, |t: f64| (2.0 * PI * t).sin(), period)
        .unwrap()
        .with_dg_dv(move |_, _| lambda);
    // loose tol so the run lasts long enough to see several ratios, then fail on purpose
    let err = shoot_periodic(&field, &StepScheme::implicit(), 0.0, 0.0, 1.0 / 256.0, 5.0, 1e-300, 8).unwrap_err();
    let fracscale::Error::ShootingNotConverged { residuals } = err else { panic!("{err}") };
    residuals.windows(2).map(|w| w[1] / w[0]).collect()
}

#[test]
fn shooting_contracts_at_the_linear_rate() {
    for lambda in [0.5, 1.0, 2.0] {
        let bound = (-lambda * 1.0f64).exp() * 1.05;
        let ratios = residual_ratios(lambda, 1.0);
        assert!(ratios.len() >= 5);
        for r in &ratios {
            assert!(*r <= bound, "lambda {lambda}: ratio {r} > {bound}");
        }
    }
}

#[test]
fn implicit_and_explicit_steps_differ_at_second_order() {
    let field = FastField::new(|u: f64, v: f64| u * v.sin() + 2.0 * v, |t: f64| (2.0 * PI * t).cos(), 1.0).unwrap();
    let gap = |dt: f64| {
        let e = euler_step(&field, &StepScheme::explicit(), 0.7, 0.3 + dt, 1.2, dt).unwrap();
        let i = euler_step(&field, &StepScheme::implicit(), 0.7, 0.3 + dt, 1.2, dt).unwrap();
        (e - i).abs()
    };
    let ratio = gap(1e-2) / gap(5e-3);
    assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
}

#[test]
fn example1_cell_matches_exact_profile() {
    let p = example1::<f64>(&Overrides::default()).unwrap();
    let dt = 1.0 / 32.0;
    for (scheme, bound) in [(StepScheme::explicit(), 0.18), (StepScheme::implicit(), 0.02)] {
        let cell = shoot_periodic(&p.fast, &scheme, p.u0, 0.0, dt, p.v0, 1e-5, 1000).unwrap();
        assert_eq!(cell.samples.len(), 6 * 32 + 1);
        assert!(cell.residual <= 1e-5);
        let err = cell
            .samples
            .iter()
            .enumerate()
            .map(|(k, v)| (v - p.exact_v(k as f64 * dt).unwrap()).abs())
            .fold(0.0, f64::max);
        assert!(err <= bound, "{:?}: {err}", scheme.kind);
    }
}

#[test]
fn example1_single_cycle_ends_near_zero() {
    let p = example1::<f64>(&Overrides::default()).unwrap();
    let samples = integrate_cycle(&p.fast, &StepScheme::explicit(), p.u0, 0.0, 0.0, 1.0 / 32.0).unwrap();
    let end = *samples.last().unwrap();
    assert!(end.abs() < 0.2, "v(6) = {end}");
    let half = integrate_cycle(&p.fast, &StepScheme::explicit(), p.u0, 0.0, 0.0, 1.0 / 64.0).unwrap();
    assert!(half.last().unwrap().abs() < 0.6 * end.abs());
}

#[test]
fn warm_start_does_not_cost_more_shooting() {
    let p = example2::<f64>(&Overrides { horizon: Some(400.0), ..Default::default() }).unwrap();
    for dtm in [20.0, 5.0, 1.0] {
        let cfg = MacroConfig::new(dtm, 0.01, p.horizon);
        let (state, _) = multiscale_solve(&p, &cfg).unwrap();
        let mut cold_total = 0;
        for (m, cell) in state.cells.iter().enumerate() {
            let cold = shoot_periodic(&p.fast, &cfg.scheme, cell.frozen_u, cell.t_start, cfg.micro_dt, p.v0, cfg.tol, cfg.max_cycles)
                .unwrap();
            // the periodic start value drifts between distant cells, so v0 can win a single cell by one cycle
            assert!(cell.shooting_iters <= cold.shooting_iters + 1, "dT {dtm} cell {m}: warm {} cold {}", cell.shooting_iters, cold.shooting_iters);
            cold_total += cold.shooting_iters;
        }
        assert!(state.shooting_iters <= cold_total, "dT {dtm}: warm {} cold {cold_total}", state.shooting_iters);
    }
}
