//! Runs the eleven acceptance criteria and prints one PASS/FAIL line per
//! criterion. Exits 0 unless `ACCEPTANCE_STRICT=1` is set and a criterion
//! failed.

use std::f64::consts::PI;
use std::process::ExitCode;

use fracture_core::analytic::{strain_from_stress, StressState};
use fracture_core::config::{check_criticality, critical_gc, Reference};
use fracture_core::eigenerosion::{
    optimal_epsilon, optimal_inelastic_energy, richardson_inelastic_energy, solve_ee_elastic,
};
use fracture_core::fem::{kernel_for, quadrature_strains};
use fracture_core::grid::{build_grid, register_crack_ee};
use fracture_core::harness::{
    fit_log_log, fit_method, fit_power_law, timing_comparison, timing_epsilon, write_records, RECORD_COLUMNS,
};
use fracture_core::nonlocal::{neighborhood_area_distance, IndicatorField};
use fracture_core::phasefield::homogeneous_instability_epsilon;
use fracture_core::{
    reference_energies, run_study, EEOptions, LinearSolverKind, Method, PFParams, PhaseField, ProblemParams, QuadratureMode,
    StudyConfig, StudyRun,
};

const STUDY_MESHES: [f64; 5] = [0.02, 0.01, 0.005, 0.0025, 0.00125];
const EE_TABLE: [f64; 5] = [0.9963327, 0.7658681, 0.6327005, 0.5522746, 0.5018124];

struct Report {
    failed: Vec<usize>,
}

impl Report {
    fn verdict(&mut self, n: usize, name: &str, pass: bool, detail: String) {
        let word = if pass { "PASS" } else { "FAIL" };
        println!("criterion {n:>2} {word} {name}: {detail}");
        if !pass {
            self.failed.push(n);
        }
    }
}

fn info(text: String) {
    println!("            info: {text}");
}

fn within(x: f64, lo: f64, hi: f64) -> bool {
    x >= lo && x <= hi
}

fn ee_options(quadrature: QuadratureMode) -> EEOptions {
    EEOptions {
        quadrature,
        residual: 0.0,
        solver: LinearSolverKind::Direct,
    }
}

fn criticality(report: &mut Report, cfg: &StudyConfig) {
    let p = &cfg.problem;
    let m = &p.material;
    let gc = critical_gc(p.sigma0, p.a, m.young, m.poisson);
    let rel = (gc - 5.936506e-5).abs() / 5.936506e-5;
    let check = check_criticality(&ProblemParams::table1(), 1e-5);
    report.verdict(
        1,
        "criticality identity",
        rel <= 1e-5 && check.pass,
        format!("Gc_crit = {gc:.9e}, relative mismatch {rel:.2e}"),
    );
}

fn uncracked(report: &mut Report, cfg: &StudyConfig) {
    let problem = cfg.problem.uncracked();
    let far = strain_from_stress(
        StressState {
            s11: problem.sigma0,
            s22: problem.sigma0,
            s12: 0.0,
        },
        &problem.material,
    );
    let mut worst_energy = 0.0f64;
    let mut worst_strain = 0.0f64;
    let mut ok = true;
    for ratio in [0.02, 0.01] {
        for mode in [QuadratureMode::Fast, QuadratureMode::Reference] {
            let grid = build_grid(problem.d, ratio).unwrap();
            match solve_ee_elastic(&grid, &problem, &ee_options(mode)) {
                Ok(sol) => {
                    worst_energy = worst_energy.max((sol.energy.potential + 1.5625e-3).abs() / 1.5625e-3);
                    let kernel = kernel_for(mode, problem.material);
                    for s in quadrature_strains(&grid, &kernel, &sol.u) {
                        let d = (s.e11 - far.e11).abs().max((s.e22 - far.e22).abs()).max(s.g12.abs());
                        worst_strain = worst_strain.max(d);
                    }
                }
                Err(e) => {
                    ok = false;
                    info(format!("uncracked solve failed: {e}"));
                }
            }
        }
    }
    report.verdict(
        2,
        "uncracked oracle",
        ok && worst_energy <= 1e-10 && worst_strain <= 1e-12,
        format!("max relative potential error {worst_energy:.2e}, max strain deviation {worst_strain:.2e}"),
    );
}

/// Golden-section minimum of the rounded-rectangle fracture energy over ε.
fn scanned_inelastic(a: f64, h: f64) -> f64 {
    let n = (2.0 * a / h).ceil();
    let f = |eps: f64| ((n * h + 2.0 * eps) * (h + 2.0 * eps) - (4.0 - PI) * eps * eps) / (2.0 * eps);
    let (mut lo, mut hi) = (1e-6 * h, 100.0 * h);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let (x1, x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
        if f(x1) < f(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    f(0.5 * (lo + hi))
}

fn ee_closed_forms(report: &mut Report, cfg: &StudyConfig) {
    let (a, d, gc) = (cfg.problem.a, cfg.problem.d, cfg.problem.material.gc);
    let mut worst = 0.0f64;
    for (ratio, expect) in STUDY_MESHES.iter().zip(EE_TABLE) {
        let h = ratio * d;
        let closed = optimal_inelastic_energy(a, h, gc) / gc;
        let scanned = scanned_inelastic(a, h);
        worst = worst
            .max((closed - expect).abs() / expect)
            .max((closed - scanned).abs() / scanned);
    }
    report.verdict(
        3,
        "EE closed forms",
        worst <= 1e-6,
        format!("max relative deviation {worst:.2e} over five meshes"),
    );
}

fn ee_convergence(report: &mut Report, run: &StudyRun, cfg: &StudyConfig) {
    let ee = fit_method(run, Method::Ee);
    match &ee {
        Ok(f) => report.verdict(
            4,
            "EE convergence",
            within(f.alpha, 0.40, 0.80) && run.method(Method::Ee).all(|r| r.error > 0.0),
            format!("alpha = {:.4}, C = {:.4e} ({} meshes, domain reference)", f.alpha, f.c, f.points),
        ),
        Err(e) => report.verdict(4, "EE convergence", false, format!("fit failed: {e}")),
    }
    let closed = reference_energies(&cfg.problem).pi_total_exact;
    let samples: Vec<(f64, f64)> = run.method(Method::Ee).map(|r| (r.h, r.energy.potential)).collect();
    if let Ok(f) = fit_power_law(&samples, closed) {
        info(format!("against the closed-form potential: alpha = {:.4}", f.alpha));
    }
    let inelastic: Vec<(f64, f64)> = run.method(Method::Ee).map(|r| (r.h, r.inelastic_error.abs())).collect();
    if let Ok(f) = fit_log_log(&inelastic) {
        info(format!("inelastic error alone: alpha = {:.4}", f.alpha));
    }
}

fn richardson_convergence(report: &mut Report, run: &StudyRun, cfg: &StudyConfig) {
    let fit = fit_method(run, Method::EeRe);
    let ee: Vec<_> = run.method(Method::Ee).collect();
    let re: Vec<_> = run.method(Method::EeRe).collect();
    let d = cfg.problem.d;
    let smaller = ee
        .iter()
        .zip(&re)
        .filter(|(e, _)| e.h / d <= 0.01 + 1e-12)
        .all(|(e, r)| r.error.abs() < e.error.abs());
    let a = cfg.problem.a;
    let errs: Vec<f64> = [0.005, 0.0025, 0.00125]
        .iter()
        .map(|r| richardson_inelastic_energy(a, r * d, 1.0) - 2.0 * a)
        .collect();
    let ratios = [errs[1] / errs[0], errs[2] / errs[1]];
    let ratios_ok = (ratios[0] - 0.4896).abs() < 5e-4 && (ratios[1] - 0.5140).abs() < 5e-4;
    match fit {
        Ok(f) => report.verdict(
            5,
            "EE+RE convergence",
            within(f.alpha, 0.80, 1.30) && smaller && ratios_ok,
            format!(
                "alpha = {:.4}, |error| below EE at h/D <= 0.01: {smaller}, closed-form ratios {:.4}, {:.4}",
                f.alpha, ratios[0], ratios[1]
            ),
        ),
        Err(e) => report.verdict(5, "EE+RE convergence", false, format!("fit failed: {e}")),
    }
    let closed = reference_energies(&cfg.problem).pi_total_exact;
    let samples: Vec<(f64, f64)> = re.iter().map(|r| (r.h, r.energy.potential)).collect();
    if let Ok(f) = fit_power_law(&samples, closed) {
        info(format!("against the closed-form potential: alpha = {:.4}", f.alpha));
    }
    for r in &re {
        info(format!("h = {:.5}: EE+RE error {:+.4e}", r.h, r.error));
    }
}

fn pf_convergence(report: &mut Report, run: &StudyRun, cfg: &StudyConfig) {
    let threshold = homogeneous_instability_epsilon(&cfg.problem);
    info(format!(
        "intact state loses stability for eps > 27 Gc / (1024 W0) = {threshold:.5e}"
    ));
    // A collapsed panel releases far more than the uncracked potential.
    let uncracked = -reference_energies(&cfg.problem).w0 * cfg.problem.d * cfg.problem.d;
    let is_collapsed = |p: f64| p < 2.0 * uncracked;
    for s in &run.sweeps {
        let collapsed: Vec<f64> = s
            .records
            .iter()
            .filter(|r| r.failure.is_none() && is_collapsed(r.energy.potential))
            .map(|r| r.epsilon)
            .collect();
        let stable = s
            .records
            .iter()
            .filter(|r| r.converged && !is_collapsed(r.energy.potential))
            .min_by(|a, b| a.energy.potential.total_cmp(&b.energy.potential));
        info(format!(
            "h = {:.5}: {} of {} sweep points collapsed (eps from {:.4e}), best intact point {}",
            s.h,
            collapsed.len(),
            s.records.len(),
            collapsed.iter().cloned().fold(f64::INFINITY, f64::min),
            stable.map_or("none".to_string(), |r| format!(
                "eps = {:.4e}, error {:+.4e}",
                r.epsilon,
                r.energy.potential - run.limits.total
            )),
        ));
    }
    let pf: Vec<_> = run.method(Method::Pf).collect();
    for r in &pf {
        info(format!(
            "h = {:.5}: eps_h = {:.4e}, error {:+.4e}, converged {}{}",
            r.h,
            r.epsilon,
            r.error,
            r.converged,
            r.failure.as_deref().map(|f| format!(", {f}")).unwrap_or_default()
        ));
    }
    let positive = !pf.is_empty() && pf.iter().all(|r| r.failure.is_none() && r.error > 0.0);
    let ratio = pf
        .iter()
        .filter_map(|p| run.method(Method::Ee).find(|e| e.h == p.h).map(|e| p.error / e.error))
        .fold(f64::INFINITY, f64::min);
    match fit_method(run, Method::Pf) {
        Ok(f) => report.verdict(
            6,
            "PF convergence",
            within(f.alpha, 0.35, 0.75) && positive && ratio > 2.0,
            format!(
                "alpha = {:.4}, all errors positive: {positive}, min PF/EE error ratio at matched h {ratio:.3e}",
                f.alpha
            ),
        ),
        Err(e) => report.verdict(
            6,
            "PF convergence",
            false,
            format!("fit failed: {e}; all errors positive: {positive}"),
        ),
    }
}

fn pf_scaling(report: &mut Report, run: &StudyRun, cfg: &StudyConfig) {
    let a = cfg.problem.a;
    let ee_pts: Vec<(f64, f64)> = (6..=12)
        .map(|k| {
            let h = 2.0 * a / 2f64.powi(k);
            (h, optimal_epsilon(a, h).0)
        })
        .collect();
    let ee_slope = fit_log_log(&ee_pts).map(|f| f.alpha).unwrap_or(f64::NAN);
    let pf_pts: Vec<(f64, f64)> = run
        .sweeps
        .iter()
        .filter_map(|s| s.optimum.as_ref().ok().map(|&(eps, _)| (s.h, eps)))
        .collect();
    let pf_slope = if pf_pts.len() == 4 {
        fit_log_log(&pf_pts).map(|f| f.alpha).unwrap_or(f64::NAN)
    } else {
        f64::NAN
    };
    report.verdict(
        7,
        "PF eps_h scaling",
        within(pf_slope, 0.35, 0.65) && (ee_slope - 0.5).abs() <= 0.05,
        format!(
            "PF slope {pf_slope:.4} over {} meshes with an optimum, EE slope {ee_slope:.4}",
            pf_pts.len()
        ),
    );
}

fn pf_mechanics(report: &mut Report, run: &StudyRun, cfg: &StudyConfig) {
    let mut worst_increase = f64::NEG_INFINITY;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut runs = 0;
    for r in run.sweeps.iter().flat_map(|s| &s.records) {
        if r.failure.is_some() {
            continue;
        }
        runs += 1;
        worst_increase = worst_increase.max(r.max_trace_increase);
        lo = lo.min(r.v_bounds.0);
        hi = hi.max(r.v_bounds.1);
    }
    let grid = build_grid(cfg.problem.d, 0.02).unwrap();
    let mut pf = PhaseField::new(&grid, &cfg.problem, QuadratureMode::Reference, LinearSolverKind::Direct).unwrap();
    let params = PFParams::new(0.01, cfg.problem.d, &cfg.pf).unwrap();
    let state = pf.alternate_minimize(&params, None).unwrap();
    let mut state_rng = 0x2545_f491_4f6c_dd1du64;
    let mut next = || {
        state_rng ^= state_rng << 13;
        state_rng ^= state_rng >> 7;
        state_rng ^= state_rng << 17;
        (state_rng >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    let u_scale = state.u.values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut worst_derivative = 0.0f64;
    for _ in 0..10 {
        let du: Vec<f64> = (0..state.u.values.len()).map(|_| next() * u_scale).collect();
        let dv: Vec<f64> = (0..state.v.len()).map(|_| next()).collect();
        let (dd, scale) = pf
            .directional_derivative(&state.u, &state.v, &du, &dv, 1e-6, &params)
            .unwrap();
        worst_derivative = worst_derivative.max(dd.abs() / scale);
    }
    report.verdict(
        8,
        "PF mechanics",
        runs > 0 && worst_increase <= 1e-12 && lo >= 0.0 && hi <= 1.0 + 1e-9 && worst_derivative <= 1e-6,
        format!(
            "{runs} runs: max relative trace increase {worst_increase:.2e}, v in [{lo:.4e}, {hi:.12}], \
             stationarity {worst_derivative:.2e}"
        ),
    );
}

fn nonlocal(report: &mut Report, cfg: &StudyConfig) {
    let p = &cfg.problem;
    let grid = build_grid(p.d, 0.01).unwrap();
    let crack = register_crack_ee(&grid, p.a).unwrap();
    let (eps, _) = optimal_epsilon(p.a, grid.h);
    let exact = fracture_core::eigenerosion::neighborhood_area(p.a, grid.h, eps);
    let perimeter = 2.0 * crack.eroded.len() as f64 * grid.h + 2.0 * grid.h + 2.0 * PI * eps;
    let error = |k: f64| {
        let field = IndicatorField::from_eroded(&grid, &crack.eroded, eps / k, eps).unwrap();
        (neighborhood_area_distance(&field, eps, 1.0).unwrap().area - exact).abs()
    };
    let (e32, e64) = (error(32.0), error(64.0));
    let bound = 1.5 * perimeter * eps / 32.0;
    let ratio = e64 / e32;
    report.verdict(
        9,
        "nonlocal oracle",
        e32 <= bound && within(ratio, 0.4, 0.6),
        format!("error {e32:.3e} (bound {bound:.3e}) at eps/32, halving ratio {ratio:.3}"),
    );
}

fn timing(report: &mut Report, cfg: &StudyConfig) {
    let mut timed = cfg.clone();
    timed.h_over_d = vec![0.005, 0.0025];
    timed.pf.epsilon_list = None;
    match timing_comparison(&timed, 3, |h| timing_epsilon(&timed, h)) {
        Ok(rows) => {
            let min = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
            let detail = rows
                .iter()
                .map(|r| {
                    format!(
                        "h = {:.5}: ee {:.3} s, pf {:.3} s ({} iterations), ratio {:.1}",
                        r.h, r.ee_time, r.pf_time, r.pf_iterations, r.ratio
                    )
                })
                .collect::<Vec<_>>()
                .join("; ");
            report.verdict(10, "timing", !rows.is_empty() && min >= 3.0, detail);
        }
        Err(e) => report.verdict(10, "timing", false, format!("timing failed: {e}")),
    }
}

fn csv_without_times(run: &StudyRun) -> String {
    let mut buf = Vec::new();
    write_records(&run.records, &mut buf).unwrap();
    let time = RECORD_COLUMNS.iter().position(|c| *c == "wall_time_s").unwrap();
    String::from_utf8(buf)
        .unwrap()
        .lines()
        .map(|l| {
            l.split(',')
                .enumerate()
                .filter(|(i, _)| *i != time)
                .map(|(_, f)| f)
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn determinism(report: &mut Report, cfg: &StudyConfig) {
    let mut small = cfg.clone();
    small.h_over_d = vec![0.02, 0.01];
    let first = run_study(&small).map(|r| csv_without_times(&r));
    let second = run_study(&small).map(|r| csv_without_times(&r));
    match (first, second) {
        (Ok(a), Ok(b)) => report.verdict(
            11,
            "determinism",
            a == b,
            format!("{} CSV lines compared, identical: {}", a.lines().count(), a == b),
        ),
        (Err(e), _) | (_, Err(e)) => report.verdict(11, "determinism", false, format!("study failed: {e}")),
    }
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let cfg = StudyConfig::table1();
    assert_eq!(cfg.reference, Reference::Domain);
    let mut report = Report { failed: Vec::new() };

    criticality(&mut report, &cfg);
    uncracked(&mut report, &cfg);
    ee_closed_forms(&mut report, &cfg);

    let study = run_study(&cfg).expect("study runs");
    ee_convergence(&mut report, &study, &cfg);
    richardson_convergence(&mut report, &study, &cfg);
    pf_convergence(&mut report, &study, &cfg);
    pf_scaling(&mut report, &study, &cfg);
    pf_mechanics(&mut report, &study, &cfg);

    nonlocal(&mut report, &cfg);
    timing(&mut report, &cfg);
    determinism(&mut report, &cfg);

    println!(
        "acceptance: {} of 11 criteria passed{}",
        11 - report.failed.len(),
        if report.failed.is_empty() {
            String::new()
        } else {
            format!(", failed: {:?}", report.failed)
        }
    );
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && !report.failed.is_empty() {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
