//! End-to-end checks shared by the integration tests and the acceptance
//! runner. Each returns a verdict with the measured numbers.

use num_complex::Complex64;
use rand::Rng;
use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use sfr_core::evaluation::Method;
use sfr_core::field::{green_point_source, plane_wave};
use sfr_core::geometry::{Direction, Position};
use sfr_core::harness::{preset_paper_experiment, run, RunMode};
use sfr_core::kernel::{fit_interpolant, gram_assemble, interp_eval, kernel_eval, KernelGeometry, KernelSpec};
use sfr_core::linalg::{hermitian_defect, hermitian_eigenvalues, trace_re, CMatrix, CVector, Regularization};
use sfr_core::quadrature::{quadrature_rule, QuadratureSpec, Region};
use sfr_core::solvers::{
    build_transfer_matrix, solve_pm, solve_wpm_general, solve_wpm_shared, weight_shared_with_rule,
    weights_general_with_rule,
};

use super::oracle;
use super::{preset, random_direction, random_points, rel_diff, rel_diff_mat, rng, unit_square, wavenumber};

pub struct Check {
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

pub const PAPER_SDR_450: [(&str, f64); 3] = [("pm", 11.9), ("wpm", 17.3), ("wpm_directional", 18.3)];
pub const SDR_TOLERANCE_DB: f64 = 1.5;

pub fn paper_sdr_450() -> Check {
    let t = Instant::now();
    let (_, exp) = preset();
    let r = exp.evaluate_frequency(450.0).unwrap();
    let elapsed = t.elapsed();
    let mut pass = elapsed < Duration::from_secs(10);
    let mut parts = Vec::new();
    for ((name, target), m) in PAPER_SDR_450.iter().zip(&r.methods) {
        assert_eq!(*name, m.name);
        pass &= (m.sdr - target).abs() <= SDR_TOLERANCE_DB;
        parts.push(format!("{name} {:.2} dB (target {target})", m.sdr));
    }
    Check::new(pass, format!("{}; {:.2} s", parts.join(", "), elapsed.as_secs_f64()))
}

pub fn sweep_bands() -> Check {
    let t = Instant::now();
    let (cfg, exp) = preset();
    let s = exp.sweep(&cfg.frequency_list().unwrap()).unwrap();
    let elapsed = t.elapsed();
    let (pm, wpm, dir) = (s.method("pm").unwrap(), s.method("wpm").unwrap(), s.method("wpm_directional").unwrap());
    let mut low_min = f64::INFINITY;
    let mut margin_wpm = f64::INFINITY;
    let mut margin_dir = f64::INFINITY;
    for (i, &f) in s.frequencies.iter().enumerate() {
        if f <= 380.0 + 1e-9 {
            low_min = low_min.min(pm[i]).min(wpm[i]).min(dir[i]);
        }
        if f >= 410.0 - 1e-9 {
            margin_wpm = margin_wpm.min(wpm[i] - pm[i]);
            margin_dir = margin_dir.min(dir[i] - pm[i]);
        }
    }
    let pass = low_min > 20.0 && margin_wpm >= 0.0 && margin_dir >= 0.0 && elapsed < Duration::from_secs(60);
    Check::new(
        pass,
        format!(
            "min SDR <= 380 Hz {low_min:.2} dB; min WPM-PM >= 410 Hz {margin_wpm:.3} dB; \
             min WPMdir-PM {margin_dir:.3} dB; {} frequencies in {:.1} s",
            s.frequencies.len(),
            elapsed.as_secs_f64()
        ),
    )
}

/// Transfer matrix, desired pressures and regularization of the preset at `f`.
pub fn preset_problem(f: f64) -> (sfr_core::evaluation::Experiment, CMatrix, CVector) {
    let (_, exp) = preset();
    let k = wavenumber(f);
    let g = build_transfer_matrix(&exp.scene, k).unwrap().g;
    let u = CVector::from_vec(exp.desired.values(k, exp.scene.control_points()).unwrap());
    (exp, g, u)
}

fn method_kernels(exp: &sfr_core::evaluation::Experiment) -> (KernelSpec, Vec<KernelSpec>, KernelSpec) {
    let shared = match &exp.methods[1].method {
        Method::WpmShared { kernel, .. } => *kernel,
        _ => unreachable!(),
    };
    match &exp.methods[2].method {
        Method::WpmGeneral {
            source_kernels,
            desired_kernel,
            ..
        } => (shared, source_kernels.clone(), *desired_kernel),
        _ => unreachable!(),
    }
}

pub fn reduction_identities() -> Check {
    let eta = Regularization::absolute(1e-6);
    let lambda = Regularization::absolute(1e-6);
    let (exp, g, u) = preset_problem(450.0);
    let k = wavenumber(450.0);
    let cps = exp.scene.control_points();

    let n = cps.len();
    let d_pm = solve_pm(&g, &u, eta).unwrap();
    let d_id = solve_wpm_shared(&g, &CMatrix::identity(n, n), &u, eta).unwrap();
    let a = rel_diff(&d_id.d, &d_pm.d);

    let rule = exp.quadrature_rule();
    let (shared, per_source, _) = method_kernels(&exp);
    let mut b: f64 = 0.0;
    for spec in [shared, per_source[0]] {
        let w = weight_shared_with_rule(&spec, k, cps, lambda, rule).unwrap();
        let gw = weights_general_with_rule(&vec![spec; g.ncols()], &spec, k, cps, &g, lambda, rule).unwrap();
        let d_shared = solve_wpm_shared(&g, &w.w, &u, eta).unwrap();
        let d_general = solve_wpm_general(&gw.w_gg, &gw.w_gu, &u, eta).unwrap();
        b = b.max(rel_diff(&d_general.d, &d_shared.d));
    }

    let mut r = rng(3);
    let mut c: f64 = 0.0;
    for geometry in [KernelGeometry::Circular, KernelGeometry::Spherical] {
        let dim = geometry.dimension();
        let region = Region::new(Position::origin(dim).unwrap(), &vec![1.0; dim]).unwrap();
        for _ in 0..20 {
            let p = random_points(&region, 2, &mut r);
            let kk = wavenumber(r.gen_range(50.0..700.0));
            let prior = random_direction(dim, &mut r);
            let zero = KernelSpec::directional(geometry, 0.0, prior).unwrap();
            let uni = KernelSpec::uniform(geometry);
            let x = kernel_eval(&zero, kk, &p[0], &p[1]).unwrap();
            let y = kernel_eval(&uni, kk, &p[0], &p[1]).unwrap();
            c = c.max((x - y).norm());
        }
    }
    Check::new(
        a <= 1e-10 && b <= 1e-8 && c <= 1e-12,
        format!("WPM(W=I) vs PM {a:.1e} (<=1e-10); general vs shared {b:.1e} (<=1e-8); rho=0 vs uniform {c:.1e} (<=1e-12)"),
    )
}

pub const ORACLE_SAMPLES: usize = 20_000;

/// Largest relative deviation of `kernel_eval` from direct quadrature of the
/// plane-wave average, over 20 random pairs for each rho in {0, 1, 5}.
pub fn kernel_oracle() -> Check {
    let mut r = rng(11);
    let mut worst: BTreeMap<&str, f64> = BTreeMap::new();
    let cases: [(&str, KernelGeometry, usize); 3] = [
        ("circular 2D", KernelGeometry::Circular, 2),
        ("spherical 3D", KernelGeometry::Spherical, 3),
        ("spherical in-plane", KernelGeometry::Spherical, 2),
    ];
    for (label, geometry, dim) in cases {
        let region = Region::new(Position::origin(dim).unwrap(), &vec![1.0; dim]).unwrap();
        let mut e: f64 = 0.0;
        for rho in [0.0, 1.0, 5.0] {
            for _ in 0..20 {
                let p = random_points(&region, 2, &mut r);
                let k = wavenumber(r.gen_range(50.0..700.0));
                let prior = random_direction(geometry.dimension(), &mut r);
                let spec = KernelSpec::directional(geometry, rho, prior).unwrap();
                let got = kernel_eval(&spec, k, &p[0], &p[1]).unwrap();
                let d = p[0].sub(&p[1]);
                let pr = prior.xyz();
                let want = match geometry {
                    KernelGeometry::Circular => {
                        oracle::circle_average(rho, [pr[0], pr[1]], k.k(), [d[0], d[1]], ORACLE_SAMPLES)
                    }
                    KernelGeometry::Spherical => oracle::sphere_average(rho, pr, k.k(), d, 100, 200),
                };
                e = e.max((got - want).norm() / want.norm());
            }
        }
        worst.insert(label, e);
    }
    let max = worst.values().cloned().fold(0.0, f64::max);
    let detail: Vec<String> = worst.iter().map(|(k, v)| format!("{k} {v:.1e}")).collect();
    Check::new(max <= 1e-6, format!("max relative error {} (<=1e-6)", detail.join(", ")))
}

fn psd_margin(a: &CMatrix) -> f64 {
    // min eigenvalue relative to trace / n
    let n = a.nrows() as f64;
    hermitian_eigenvalues(a)[0] / (trace_re(a) / n)
}

/// Convergence ratio `res(h) / res(h / 2)` of the Helmholtz residual at `r`.
fn fd_ratio(u: &dyn Fn([f64; 3]) -> Complex64, r: [f64; 3], k: f64, dim: usize) -> f64 {
    let h = 0.02;
    oracle::helmholtz_residual(u, r, h, k, dim).norm() / oracle::helmholtz_residual(u, r, h / 2.0, k, dim).norm()
}

pub fn rkhs_helmholtz() -> Check {
    let mut notes = Vec::new();
    let mut pass = true;
    let mut r = rng(5);
    let k = wavenumber(450.0);

    // Gram matrices: random geometries, both families
    let mut gram_defect: f64 = 0.0;
    let mut gram_margin = f64::INFINITY;
    for (geometry, dim) in [
        (KernelGeometry::Circular, 2),
        (KernelGeometry::Spherical, 2),
        (KernelGeometry::Spherical, 3),
    ] {
        let region = Region::new(Position::origin(dim).unwrap(), &vec![1.0; dim]).unwrap();
        for rho in [0.0, 1.0, 5.0] {
            let spec = KernelSpec::directional(geometry, rho, random_direction(geometry.dimension(), &mut r)).unwrap();
            let pts = random_points(&region, 20, &mut r);
            let kk = wavenumber(r.gen_range(50.0..700.0));
            let gm = gram_assemble(&spec, kk, &pts).unwrap();
            gram_defect = gram_defect.max(hermitian_defect(&gm.entries));
            gram_margin = gram_margin.min(psd_margin(&gm.entries));
        }
    }
    pass &= gram_defect <= 1e-12 && gram_margin >= -1e-9;
    notes.push(format!("Gram defect {gram_defect:.1e}, min eig/(tr/N) {gram_margin:.1e}"));

    // Weight matrices of the preset
    let (exp, g, _) = preset_problem(450.0);
    let cps = exp.scene.control_points();
    let (shared, per_source, desired) = method_kernels(&exp);
    let lambda = Regularization::absolute(1e-6);
    let w = weight_shared_with_rule(&shared, k, cps, lambda, exp.quadrature_rule()).unwrap().w;
    let gw = weights_general_with_rule(&per_source, &desired, k, cps, &g, lambda, exp.quadrature_rule()).unwrap();
    let w_defect = hermitian_defect(&w).max(hermitian_defect(&gw.w_gg));
    let w_margin = psd_margin(&w).min(psd_margin(&gw.w_gg));
    pass &= w_defect <= 1e-10 && w_margin >= -1e-8;
    notes.push(format!("W defect {w_defect:.1e}, min eig/(tr/N) {w_margin:.1e}"));

    // Helmholtz residual O(h^2): fields and kernels
    let kk = k.k();
    let at = |c: [f64; 3], dim: usize| Position::from_slice(&c[..dim]).unwrap();
    let prop2 = Direction::from_angle(0.3);
    let prop3 = Direction::from_spherical(0.3, 1.1);
    let src2 = Position::new2(1.2, -0.7);
    let src3 = Position::new3(1.2, -0.7, 0.4);
    let r2 = random_points(&unit_square(), 1, &mut r)[0];
    let r3 = Position::new3(r2.x(), r2.y(), 0.1);
    let tail = Position::new2(0.2, -0.3);
    let tail3 = Position::new3(0.2, -0.3, 0.25);
    let prior2 = Direction::from_angle(2.0);
    let prior3 = Direction::from_spherical(2.0, 0.8);
    let circ_dir = KernelSpec::directional(KernelGeometry::Circular, 5.0, prior2).unwrap();
    let sph_dir = KernelSpec::directional(KernelGeometry::Spherical, 5.0, prior3).unwrap();
    let circ = KernelSpec::uniform(KernelGeometry::Circular);
    let sph = KernelSpec::uniform(KernelGeometry::Spherical);
    type Field<'a> = Box<dyn Fn([f64; 3]) -> Complex64 + 'a>;
    let cases: Vec<(&str, usize, [f64; 3], Field)> = vec![
        ("plane 2D", 2, r2.xyz(), Box::new(|c| plane_wave(k, &prop2, &at(c, 2)).unwrap())),
        ("plane 3D", 3, r3.xyz(), Box::new(|c| plane_wave(k, &prop3, &at(c, 3)).unwrap())),
        ("point 2D", 2, r2.xyz(), Box::new(|c| green_point_source(k, &src2, &at(c, 2)).unwrap())),
        ("point 3D", 3, r3.xyz(), Box::new(|c| green_point_source(k, &src3, &at(c, 3)).unwrap())),
        ("circular", 2, r2.xyz(), Box::new(|c| kernel_eval(&circ, k, &at(c, 2), &tail).unwrap())),
        ("circular rho=5", 2, r2.xyz(), Box::new(|c| kernel_eval(&circ_dir, k, &at(c, 2), &tail).unwrap())),
        ("spherical", 3, r3.xyz(), Box::new(|c| kernel_eval(&sph, k, &at(c, 3), &tail3).unwrap())),
        ("spherical rho=5", 3, r3.xyz(), Box::new(|c| kernel_eval(&sph_dir, k, &at(c, 3), &tail3).unwrap())),
    ];
    let mut ratios = Vec::new();
    for (label, dim, c, f) in &cases {
        let q = fd_ratio(f.as_ref(), *c, kk, *dim);
        pass &= (3.6..=4.4).contains(&q);
        ratios.push(format!("{label} {q:.2}"));
    }
    notes.push(format!("FD residual ratio h/(h/2) [{}]", ratios.join(", ")));

    // interpolation property at lambda = 0
    let samples = CVector::from_vec(exp.desired.values(k, cps).unwrap());
    let mut interp_err: f64 = 0.0;
    for spec in [shared, circ, desired] {
        let f = fit_interpolant(&spec, k, cps, &samples, Regularization::absolute(0.0)).unwrap();
        for (p, s) in cps.iter().zip(samples.iter()) {
            interp_err = interp_err.max((interp_eval(&f, p).unwrap() - s).norm());
        }
    }
    pass &= interp_err <= 1e-8;
    notes.push(format!("lambda=0 sample reproduction {interp_err:.1e}"));
    Check::new(pass, notes.join("; "))
}

pub const PERTURBATIONS: usize = 50;

type Objective<'a> = Box<dyn Fn(&CVector) -> f64 + 'a>;

/// Smallest objective increase over random perturbations of relative size
/// 1e-3, for each solver on the preset at 450 Hz.
pub fn optimality() -> Check {
    let eta = 1e-6;
    let reg = Regularization::absolute(eta);
    let (exp, g, u) = preset_problem(450.0);
    let k = wavenumber(450.0);
    let cps = exp.scene.control_points();
    let (shared, per_source, desired) = method_kernels(&exp);
    let w = weight_shared_with_rule(&shared, k, cps, reg, exp.quadrature_rule()).unwrap().w;
    let gw = weights_general_with_rule(&per_source, &desired, k, cps, &g, reg, exp.quadrature_rule()).unwrap();

    let d_pm = solve_pm(&g, &u, reg).unwrap().d;
    let d_wpm = solve_wpm_shared(&g, &w, &u, reg).unwrap().d;
    let d_gen = solve_wpm_general(&gw.w_gg, &gw.w_gu, &u, reg).unwrap().d;

    let objectives: [(&str, CVector, Objective); 3] = [
        ("PM", d_pm, Box::new(|d| oracle::pm_objective(&g, &u, eta, d))),
        ("WPM", d_wpm, Box::new(|d| oracle::wpm_objective(&g, &w, &u, eta, d))),
        (
            "WPM general",
            d_gen,
            Box::new(|d| oracle::general_objective(&gw.w_gg, &gw.w_gu, &u, eta, d)),
        ),
    ];
    let mut r = rng(17);
    let mut pass = true;
    let mut notes = Vec::new();
    for (label, d, obj) in &objectives {
        let base = obj(d);
        let mut worst = f64::INFINITY;
        for _ in 0..PERTURBATIONS {
            let mut delta = super::random_cvector(d.len(), &mut r);
            delta *= Complex64::from(1e-3 * d.norm() / delta.norm());
            worst = worst.min(obj(&(d + delta)) - base);
        }
        pass &= worst >= 0.0;
        notes.push(format!("{label} min increase {worst:.2e}"));
    }
    Check::new(pass, notes.join("; "))
}

pub fn weights_at(nodes_per_axis: usize, f: f64) -> (CMatrix, CMatrix, CMatrix) {
    let (exp, g, _) = preset_problem(f);
    let k = wavenumber(f);
    let cps = exp.scene.control_points();
    let (shared, per_source, desired) = method_kernels(&exp);
    let rule = quadrature_rule(exp.scene.region(), &QuadratureSpec::GaussLegendre { nodes_per_axis }).unwrap();
    let lambda = Regularization::absolute(1e-6);
    let w = weight_shared_with_rule(&shared, k, cps, lambda, &rule).unwrap().w;
    let gw = weights_general_with_rule(&per_source, &desired, k, cps, &g, lambda, &rule).unwrap();
    (w, gw.w_gg, gw.w_gu)
}

pub fn quadrature_convergence() -> Check {
    let (w40, gg40, gu40) = weights_at(40, 450.0);
    let (w80, gg80, gu80) = weights_at(80, 450.0);
    let dw = rel_diff_mat(&w40, &w80);
    let dgg = rel_diff_mat(&gg40, &gg80);
    let dgu = rel_diff_mat(&gu40, &gu80);
    Check::new(
        dw < 5e-3 && dgg < 5e-3 && dgu < 5e-3,
        format!("||W40-W80||/||W80|| {dw:.1e}; W_gg {dgg:.1e}; W_gu {dgu:.1e} (<5e-3)"),
    )
}

fn csv_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect()
}

/// Runs the preset (over a shortened sweep) with 1 and 4 worker threads and
/// compares every CSV byte for byte.
pub fn determinism() -> Check {
    let mut cfg = preset_paper_experiment();
    cfg.frequencies.start = 300.0;
    cfg.frequencies.stop = 600.0;
    cfg.frequencies.step = 50.0;
    let tmp = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in [1, 4, 4] {
        let dir = tmp.path().join(format!("t{threads}_{}", outputs.len()));
        run(&cfg, &dir, threads, RunMode::Full).unwrap();
        outputs.push(csv_files(&dir));
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    let bytes: usize = outputs[0].values().map(Vec::len).sum();
    Check::new(
        same && !outputs[0].is_empty(),
        format!("{} CSV files ({bytes} bytes) identical across thread counts 1, 4, 4: {same}", outputs[0].len()),
    )
}
