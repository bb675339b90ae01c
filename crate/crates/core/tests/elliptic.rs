mod common;

use std::f64::consts::PI;

use common::*;
use illusory::canyon::{CanyonField, ConfigurationMask};
use illusory::elliptic::*;
use illusory::energy::{ModelParams, PhaseField};
use illusory::grid::{GridField, GridGeometry};
use illusory::Error;
use rand::Rng;

fn inner(a: &GridField, b: &GridField) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| x * y).sum()
}

fn random_data(p: &ModelParams, r: &mut rand_chacha::ChaCha8Rng) -> LinearizedData {
    let zn = random_phase(*p.geometry(), 0.0, 1.0, r);
    linearize(&zn, p).unwrap()
}

#[test]
fn linearize_at_constant_states() {
    let mut r = rng(10);
    let p = random_model(8, 8, &mut r);
    let geo = *p.geometry();
    let chi = |idx: usize| if p.mask.inside()[idx] { p.lambda } else { 0.0 };

    let zero = linearize(&PhaseField::zeros(geo), &p).unwrap();
    let ones = PhaseField::with_zero_boundary(GridField::constant(geo, 1.0));
    let one = linearize(&ones, &p).unwrap();
    for idx in 0..geo.len() {
        let g = p.canyon.values()[idx];
        assert_eq!(zero.g_n.values()[idx], g + chi(idx));
        assert_eq!(zero.f_n.values()[idx], 0.0);
        assert_eq!(zero.gamma_n.values()[idx], 0.0);
        let (i, j) = geo.coords(idx);
        if !geo.is_boundary(i, j) {
            assert!((one.g_n.values()[idx] - (3.0 * g + chi(idx))).abs() <= 1e-15);
            assert!((one.f_n.values()[idx] - 3.0 * g).abs() <= 1e-15);
            assert!((one.gamma_n.values()[idx] - 1.0).abs() <= 1e-15);
        }
    }
}

#[test]
fn linearize_consistency_identity() {
    let mut r = rng(11);
    for _ in 0..10 {
        let p = random_model(8, 8, &mut r);
        let d = random_data(&p, &mut r);
        for idx in 0..p.geometry().len() {
            let chi = if p.mask.inside()[idx] { p.lambda } else { 0.0 };
            let (g, f, gm) = (d.g_n.values()[idx], d.f_n.values()[idx], d.gamma_n.values()[idx]);
            assert!((f - (g * gm - chi * gm)).abs() <= 1e-12);
            assert!(g >= p.canyon.alpha());
            assert!(f >= 0.0);
        }
    }
}

#[test]
fn operator_is_linear_and_symmetric() {
    let mut r = rng(12);
    for _ in 0..20 {
        let p = random_model(13, 10, &mut r);
        let d = random_data(&p, &mut r);
        let geo = *p.geometry();
        assert!(apply_operator(&GridField::zeros(geo), &d, &p)
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == 0.0));
        let z = random_phase(geo, -1.0, 1.0, &mut r).into_field();
        let w = random_phase(geo, -1.0, 1.0, &mut r).into_field();
        let (azw, zaw) = (
            inner(&apply_operator(&z, &d, &p).unwrap(), &w),
            inner(&z, &apply_operator(&w, &d, &p).unwrap()),
        );
        assert!((azw - zaw).abs() <= 1e-12 * azw.abs().max(zaw.abs()));
    }
}

#[test]
fn operator_eigenpairs_on_flat_canyon() {
    // zero at both ends of each axis: the sine period spans the w - 1 gaps
    for (w, ht, k, l) in [(17, 17, 1, 1), (17, 17, 3, 5), (20, 12, 2, 7), (9, 14, 7, 1)] {
        let p = flat_model(w, ht, 1.0, 2.0);
        let geo = *p.geometry();
        let c = 1.7;
        let data = LinearizedData {
            g_n: GridField::constant(geo, c),
            f_n: GridField::zeros(geo),
            gamma_n: GridField::zeros(geo),
        };
        let (sx, sy) = (PI * k as f64 / (w - 1) as f64, PI * l as f64 / (ht - 1) as f64);
        let z = PhaseField::from_fn(geo, |i, j| (sx * i as f64).sin() * (sy * j as f64).sin());
        let h = geo.h();
        let lam = 4.0 / (h * h) * ((sx / 2.0).sin().powi(2) + (sy / 2.0).sin().powi(2));
        let mu = p.epsilon * p.epsilon * lam + c;
        let az = apply_operator(z.field(), &data, &p).unwrap();
        let scale = z.values().iter().fold(0.0f64, |m, v| m.max(v.abs())) * mu;
        for (a, v) in az.values().iter().zip(z.values()) {
            assert!((a - mu * v).abs() <= 1e-10 * scale, "{w}x{ht} k={k} l={l}");
        }
    }
}

#[test]
fn operator_bounded_below_by_reaction() {
    let mut r = rng(13);
    for _ in 0..20 {
        let p = random_model(12, 12, &mut r);
        let d = random_data(&p, &mut r);
        let z = random_phase(*p.geometry(), -1.0, 1.0, &mut r).into_field();
        let quad = inner(&apply_operator(&z, &d, &p).unwrap(), &z);
        let floor = d.g_n.min() * inner(&z, &z);
        assert!(quad >= floor && floor > 0.0);
    }
}

#[test]
fn cg_short_circuits_on_zero_rhs() {
    let mut r = rng(14);
    let p = random_model(10, 10, &mut r);
    let d = linearize(&PhaseField::zeros(*p.geometry()), &p).unwrap();
    let warm = random_phase(*p.geometry(), 0.0, 1.0, &mut r);
    let s = cg_solve(&d, &p, &CgParams::default(), warm.field()).unwrap();
    assert_eq!(s.iterations, 0);
    assert!(s.field.values().iter().all(|&v| v == 0.0));
}

#[test]
fn cg_matches_dense_oracle_and_restarts_at_solution() {
    let mut r = rng(15);
    for _ in 0..20 {
        let p = random_model(8, 8, &mut r);
        let d = random_data(&p, &mut r);
        let geo = *p.geometry();
        let oracle = dense_solve_oracle(&d, &p).unwrap();
        let cold = cg_solve(&d, &p, &CgParams::default(), &GridField::zeros(geo)).unwrap();
        assert!(max_abs_diff(cold.field.values(), oracle.values()) <= 1e-8);

        let again = cg_solve(&d, &p, &CgParams::default(), &cold.field).unwrap();
        assert_eq!(again.iterations, 0);
        assert_eq!(again.field, cold.field);
    }
}

#[test]
fn cg_residual_contract_on_many_instances() {
    let mut r = rng(16);
    let cg = CgParams::default();
    for _ in 0..100 {
        let p = random_model(16, 16, &mut r);
        let d = random_data(&p, &mut r);
        let geo = *p.geometry();
        let s = cg_solve(&d, &p, &cg, &random_phase(geo, 0.0, 1.0, &mut r).into_field()).unwrap();
        let az = apply_operator(&s.field, &d, &p).unwrap();
        let (mut res, mut norm) = (0.0, 0.0);
        for c in interior_indices(&geo) {
            let f = d.f_n.values()[c];
            res += (f - az.values()[c]).powi(2);
            norm += f * f;
        }
        assert!((res / norm).sqrt() <= cg.rel_tol);
        assert!(s.relative_residual <= cg.rel_tol);
        for idx in 0..geo.len() {
            let (i, j) = geo.coords(idx);
            if geo.is_boundary(i, j) {
                assert_eq!(s.field.values()[idx], 0.0);
            }
        }
    }
}

#[test]
fn cg_reports_best_iterate_when_budget_runs_out() {
    let mut r = rng(17);
    let p = random_model(16, 16, &mut r);
    let d = random_data(&p, &mut r);
    let cg = CgParams {
        rel_tol: 1e-10,
        max_iters: Some(2),
    };
    match cg_solve(&d, &p, &cg, &GridField::zeros(*p.geometry())) {
        Err(Error::CgNotConverged {
            iterations,
            residual,
            best,
        }) => {
            assert_eq!(iterations, 2);
            assert!(residual > 1e-10 && residual < 1.0);
            assert_eq!(best.geometry(), p.geometry());
        }
        other => panic!("expected CgNotConverged, got {other:?}"),
    }
    assert!(CgParams { rel_tol: 1e-3, max_iters: None }.validate().is_err());
    assert_eq!(CgParams::default().iteration_limit(p.geometry()), 10 * 256);
}

#[test]
fn dense_oracle_single_unknown() {
    let geo = GridGeometry::new(3, 3).unwrap();
    let g = GridField::from_fn(geo, |i, j| 0.1 + 0.1 * (i + 3 * j) as f64);
    let canyon = CanyonField::from_field(g.clone(), 0.1, 1.0).unwrap();
    let mask = ConfigurationMask::new_unchecked(geo, vec![false, false, false, false, true, false, false, false, false])
        .unwrap();
    // no ε satisfies h <= ε <= 1/4 when h = 1/3, so build the parameters directly
    let p = ModelParams {
        epsilon: geo.h(),
        lambda: 2.0,
        canyon,
        mask,
    };
    let z = PhaseField::from_fn(geo, |_, _| 0.6);
    let d = linearize(&z, &p).unwrap();

    let h = geo.h();
    let gc = g.get(1, 1);
    let faces: f64 = [(0, 1), (2, 1), (1, 0), (1, 2)]
        .iter()
        .map(|&(i, j)| 0.5 * (gc + g.get(i, j)))
        .sum();
    let reaction = gc * (1.0 + 2.0 * 0.36) + 2.0;
    let expected = 3.0 * gc * 0.36 / (p.epsilon * p.epsilon * faces / (h * h) + reaction);

    let s = dense_solve_oracle(&d, &p).unwrap();
    assert!((s.get(1, 1) - expected).abs() <= 1e-14);
    assert_eq!(s.values().iter().filter(|&&v| v != 0.0).count(), 1);
}

#[test]
fn dense_oracle_consistency_and_columns() {
    let mut r = rng(18);
    for _ in 0..5 {
        let p = random_model(9, 7, &mut r);
        let d = random_data(&p, &mut r);
        let geo = *p.geometry();
        let s = dense_solve_oracle(&d, &p).unwrap();
        let back = apply_operator(&s, &d, &p).unwrap();
        for c in interior_indices(&geo) {
            assert!((back.values()[c] - d.f_n.values()[c]).abs() <= 1e-10);
        }

        let a = assemble_dense(&d, &p).unwrap();
        let interior = interior_indices(&geo);
        for (col, &c) in interior.iter().enumerate() {
            let e = GridField::from_fn(geo, |i, j| if geo.index(i, j) == c { 1.0 } else { 0.0 });
            let ae = apply_operator(&e, &d, &p).unwrap();
            for (row, &rc) in interior.iter().enumerate() {
                assert_eq!(a[(row, col)], ae.values()[rc]);
            }
        }
    }
}

#[test]
fn dense_oracle_refuses_large_grids() {
    let p = flat_model(70, 70, 1.0, 3.0);
    let d = linearize(&PhaseField::zeros(*p.geometry()), &p).unwrap();
    assert!(matches!(dense_solve_oracle(&d, &p), Err(Error::OracleTooLarge { .. })));
}

#[test]
fn nonnegative_rhs_gives_nonnegative_solution() {
    let mut r = rng(19);
    for _ in 0..20 {
        let p = random_model(10, 10, &mut r);
        let mut d = random_data(&p, &mut r);
        let geo = *p.geometry();
        d.f_n = GridField::from_fn(geo, |_, _| if r.gen_bool(0.3) { 0.0 } else { r.gen_range(0.0..5.0) });
        let s = dense_solve_oracle(&d, &p).unwrap();
        assert!(s.min() >= -1e-12);
    }
}
