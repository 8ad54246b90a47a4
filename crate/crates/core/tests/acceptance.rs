//! Acceptance criteria 1–8. Each test prints one `PASS`/`FAIL` line to
//! stderr (uncaptured) and then asserts.

use num_complex::Complex64;
use qcilab::admissibility::{check_admissible, EnergyPair, Grid, Threshold, Verdict};
use qcilab::eigensolve::joint_eigenfunctions;
use qcilab::geometry::{latitude_arc, longitude_arc, polar_longitude_arc, Geodesic, ProfileFunction};
use qcilab::lineintegral::{integrate_restriction, QuadratureSpec, SphericalHarmonic, SurfaceFunction};
use qcilab::specfun::{assoc_legendre_norm_theta, legendre_p, semiclassical_h, szego_main_term};
use qcilab::sweep::{
    default_equator_arc, run_tesseral_sweep, run_transition_peak_sweep, run_zonal_sweep, ArcPlacement, SweepReport,
};
use qcilab::symbol::{builtin_moment_map, MomentMap, PhasePoint, SymbolExpr};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::io::Write;
use std::time::{Duration, Instant};

fn report(criterion: u32, name: &str, ok: bool, elapsed: Duration, detail: &str) {
    let line = format!(
        "acceptance {criterion} [{name}]: {} ({:.2} s) {detail}\n",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let value = f();
    (value, start.elapsed())
}

#[test]
fn criterion_1_admissibility_verdicts() {
    let s = ProfileFunction::sphere();
    let map = builtin_moment_map(&s);
    let grid = Grid::new(128, 128);
    let run = |g: &Geodesic, e: EnergyPair| timed(|| check_admissible(&map, g, e, grid, Threshold::default()).unwrap());

    let (case1, t1) = run(&latitude_arc(&s, (0.0, PI / 3.0)).unwrap(), EnergyPair::new(1.0, 0.0, 0.1));
    let (case2, t2) = run(&longitude_arc(&s, (0.3, 0.8), 0.0).unwrap(), EnergyPair::new(1.0, 0.5, 0.05));
    let (straddle, t3) = run(&longitude_arc(&s, (-0.2, 0.2), 0.0).unwrap(), EnergyPair::new(1.0, 0.5, 0.05));

    let ok = case1.verdict == Verdict::NotAdmissible
        && case1.min_derivative <= 1e-8
        && case2.verdict == Verdict::Admissible
        && case2.min_derivative >= 0.1
        && straddle.verdict == Verdict::NotAdmissible
        && [t1, t2, t3].iter().all(|t| t.as_secs_f64() < 1.0);
    report(
        1,
        "admissibility verdicts",
        ok,
        t1 + t2 + t3,
        &format!(
            "case1 min={:.3e} case2 min={:.4} straddle min={:.3e} max time {:.3} s",
            case1.min_derivative,
            case2.min_derivative,
            straddle.min_derivative,
            t1.max(t2).max(t3).as_secs_f64()
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_2_sphere_spectrum() {
    let s = ProfileFunction::sphere();
    let cases = [(2u32, 0u32), (4, 2), (20, 10), (40, 20)];
    let (errors, elapsed) = timed(|| {
        cases
            .iter()
            .map(|&(l, k)| {
                let index = (l - k) as usize;
                let modes = joint_eigenfunctions(&s, k, 4096, index + 1).unwrap();
                let u = &modes[index];
                let exact = (l * (l + 1)) as f64;
                let lambda_err = (u.lambda - exact).abs() / exact;
                let vec_err = u
                    .theta_grid()
                    .iter()
                    .zip(&u.radial_values)
                    .map(|(&theta, w)| (w - assoc_legendre_norm_theta(l, k, theta).unwrap()).abs())
                    .fold(0.0f64, f64::max);
                (lambda_err, vec_err)
            })
            .collect::<Vec<_>>()
    });
    let worst_lambda = errors.iter().map(|e| e.0).fold(0.0, f64::max);
    let worst_vec = errors.iter().map(|e| e.1).fold(0.0, f64::max);
    let ok = worst_lambda <= 1e-6 && worst_vec <= 1e-5 && elapsed.as_secs_f64() < 30.0;
    report(
        2,
        "sphere spectrum",
        ok,
        elapsed,
        &format!("max rel λ err {worst_lambda:.2e}, max sup-norm err {worst_vec:.2e}"),
    );
    assert!(ok);
}

#[test]
fn criterion_3_szego_remainder() {
    let (worst, elapsed) = timed(|| {
        let mut worst = 0.0f64;
        for k in [200u32, 500, 1000, 2000] {
            for theta in [PI / 3.0, PI / 2.0, 2.0 * PI / 3.0] {
                let remainder = (legendre_p(k, theta.cos()) - szego_main_term(k, theta).unwrap()).abs();
                worst = worst.max(remainder / (k as f64).powf(-1.5));
            }
        }
        worst
    });
    let ok = worst <= 5.0;
    report(
        3,
        "Szegő remainder",
        ok,
        elapsed,
        &format!("max |remainder|·k^1.5 = {worst:.4} (bound 5)"),
    );
    assert!(ok);
}

#[test]
fn criterion_4_zonal_law() {
    let ks: Vec<u32> = (1..=10).map(|i| 100 * i).collect();
    let (r, elapsed) = timed(|| run_zonal_sweep(&ks, &default_equator_arc(), &QuadratureSpec::default()).unwrap());
    let in_band = r.rows.iter().all(|row| (0.30..=0.36).contains(&row.abs_i));
    // rows are sorted by h descending, i.e. by increasing degree
    let deviations: Vec<f64> = r.rows.iter().map(|row| (row.abs_i - 1.0 / 3.0).abs()).collect();
    let monotone = deviations.windows(2).all(|w| w[1] < w[0]);
    let slope = r.slope.unwrap();
    let ok = in_band && monotone && slope.abs() <= 0.05 && elapsed.as_secs_f64() < 5.0;
    report(
        4,
        "zonal O(1) law",
        ok,
        elapsed,
        &format!(
            "|I| from {:.8} to {:.8}, slope {slope:.2e}",
            r.rows.first().unwrap().abs_i,
            r.rows.last().unwrap().abs_i
        ),
    );
    assert!(ok);
}

/// `C_fit` from least squares with slope fixed at ½; `C_env = max |I|/√h`.
fn half_power_constants(r: &SweepReport) -> (f64, f64) {
    let ratios: Vec<f64> = r.rows.iter().map(|row| row.abs_i / row.h.sqrt()).collect();
    let c_fit = (ratios.iter().map(|x| x.ln()).sum::<f64>() / ratios.len() as f64).exp();
    let c_env = ratios.iter().copied().fold(0.0, f64::max);
    (c_fit, c_env)
}

#[test]
fn criterion_5_tesseral_half_power() {
    let ks = [25u32, 50, 100, 200, 400];
    let (r, elapsed) = timed(|| {
        run_tesseral_sweep(
            &ks,
            0.3,
            &ProfileFunction::sphere(),
            ArcPlacement::Forbidden,
            &QuadratureSpec::default(),
        )
        .unwrap()
    });
    let slope = r.slope.unwrap();
    let r2 = r.r_squared.unwrap();
    let (c_fit, c_env) = half_power_constants(&r);
    let bounded = r.rows.iter().all(|row| row.abs_i <= c_env * row.h.sqrt()) && c_env <= 1.25 * c_fit;
    let ok = (0.35..=0.65).contains(&slope) && r2 >= 0.9 && bounded && elapsed.as_secs_f64() < 60.0;
    report(
        5,
        "tesseral h^1/2 law",
        ok,
        elapsed,
        &format!("slope {slope:.4}, R² {r2:.5}, C_fit {c_fit:.4}, C_env {c_env:.4}"),
    );
    assert!(ok);
}

#[test]
fn criterion_6_transition_peak() {
    let ks = [50u32, 100, 200, 400, 800];
    let (r, elapsed) = timed(|| run_transition_peak_sweep(&ks, 1.0).unwrap());
    let slope = r.slope.unwrap();
    let ok = (-0.25..=-0.08).contains(&slope);
    report(
        6,
        "transition peak",
        ok,
        elapsed,
        &format!("slope {slope:.4} (R² {:.5})", r.r_squared.unwrap()),
    );
    assert!(ok);
}

fn max_relative_change(a: &SweepReport, b: &SweepReport) -> f64 {
    a.rows
        .iter()
        .zip(&b.rows)
        .map(|(x, y)| {
            let dx = Complex64::new(x.re_i - y.re_i, x.im_i - y.im_i).norm();
            dx / x.abs_i.max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max)
}

#[test]
fn criterion_7_quadrature_self_consistency() {
    let spec = QuadratureSpec::default();
    let fine = spec.doubled();
    let s = ProfileFunction::sphere();
    let ((doubling, linear, additive), elapsed) = timed(|| {
        let zonal_ks: Vec<u32> = (1..=10).map(|i| 100 * i).collect();
        let tess_ks = [25u32, 50, 100, 200, 400];
        let arc = default_equator_arc();
        let mut doubling = max_relative_change(
            &run_zonal_sweep(&zonal_ks, &arc, &spec).unwrap(),
            &run_zonal_sweep(&zonal_ks, &arc, &fine).unwrap(),
        );
        for placement in [ArcPlacement::Forbidden, ArcPlacement::Allowed] {
            doubling = doubling.max(max_relative_change(
                &run_tesseral_sweep(&tess_ks, 0.3, &s, placement, &spec).unwrap(),
                &run_tesseral_sweep(&tess_ks, 0.3, &s, placement, &fine).unwrap(),
            ));
        }

        let arc = polar_longitude_arc(&s, (0.2, 0.5), 0.4).unwrap();
        let h = semiclassical_h(200);
        let a = SphericalHarmonic { l: 200, k: 100 };
        let b = SphericalHarmonic { l: 150, k: 60 };
        let (alpha, beta) = (Complex64::new(0.7, -0.2), Complex64::new(-1.5, 2.0));
        let combo = |t: f64, phi: f64| alpha * a.value(t, phi) + beta * b.value(t, phi);
        let ia = integrate_restriction(&a, &arc, &spec, h).unwrap();
        let ib = integrate_restriction(&b, &arc, &spec, h).unwrap();
        let ic = integrate_restriction(&combo, &arc, &spec, h).unwrap();
        let expected = alpha * ia + beta * ib;
        let linear = (ic - expected).norm() / expected.norm();

        let (left, right) = arc.split(0.31).unwrap();
        let parts = integrate_restriction(&a, &left, &spec, h).unwrap() + integrate_restriction(&a, &right, &spec, h).unwrap();
        let additive = (parts - ia).norm() / ia.norm();
        (doubling, linear, additive)
    });
    let ok = doubling < 1e-8 && linear <= 1e-12 && additive <= 1e-12;
    report(
        7,
        "quadrature self-consistency",
        ok,
        elapsed,
        &format!("doubling {doubling:.2e}, linearity {linear:.2e}, additivity {additive:.2e}"),
    );
    assert!(ok);
}

#[test]
fn criterion_8_dsl_equivalence() {
    let s = ProfileFunction::sphere();
    let builtin = builtin_moment_map(&s);
    let dsl = MomentMap::from_sources(&s, Some(SymbolExpr::BUILTIN_P1), Some(SymbolExpr::BUILTIN_P2)).unwrap();
    let ((worst, verdicts), elapsed) = timed(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let p = PhasePoint::new(
                rng.gen_range(-0.99..0.99),
                rng.gen_range(0.0..2.0 * PI),
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-5.0..5.0),
            );
            for (x, y) in [(builtin.p1(&p), dsl.p1(&p)), (builtin.p2(&p), dsl.p2(&p))] {
                let (x, y) = (x.unwrap(), y.unwrap());
                worst = worst.max((x - y).abs() / x.abs().max(1.0));
            }
        }
        let cases = [
            (latitude_arc(&s, (0.0, PI / 3.0)).unwrap(), EnergyPair::new(1.0, 0.0, 0.1)),
            (longitude_arc(&s, (0.3, 0.8), 0.0).unwrap(), EnergyPair::new(1.0, 0.5, 0.05)),
        ];
        let verdicts: Vec<(Verdict, Verdict)> = cases
            .iter()
            .map(|(g, e)| {
                let run = |m: &MomentMap| {
                    check_admissible(m, g, *e, Grid::default(), Threshold::default())
                        .unwrap()
                        .verdict
                };
                (run(&builtin), run(&dsl))
            })
            .collect();
        (worst, verdicts)
    });
    let ok = worst <= 1e-12 && verdicts.iter().all(|(a, b)| a == b);
    report(
        8,
        "DSL equivalence",
        ok,
        elapsed,
        &format!("max rel diff {worst:.2e}, verdicts {verdicts:?}"),
    );
    assert!(ok);
}
