//! End-to-end acceptance checks. Runs as a plain binary so that every check
//! prints one PASS/FAIL line; exits non-zero if any check fails.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::Instant;
use surfremap::experiment::{
    convergence, default_sigma_grid, detect, mesh_pair, repeat, sweep_sigma, BreakKind, ConvergenceReport,
    MeshFamily, RepeatReport,
};
use surfremap::fields::{AnalyticField, F3_RANGE};
use surfremap::mesh::{gen_planar_grid, ElementKind};
use surfremap::numerics::{cond_estimate_1norm, qrcp, DenseMatrix, SparseOperator};
use surfremap::remap::{build_plan, Method, RemapConfig};
use surfremap::wls::{build_transfer_row, default_sigma, monomial_count, Purpose, WeightKind, WeightScheme, WlsConfig};

type Check = (bool, String);

fn enor() -> RemapConfig {
    RemapConfig::default()
}

fn linear() -> RemapConfig {
    RemapConfig::with_method(Method::Linear)
}

// Round-trip runs shared by several checks.
fn f3_repeat(level: usize, cfg: RemapConfig) -> RepeatReport {
    repeat(&AnalyticField::F3, cfg, level, 100, &[]).expect("f3 round trips")
}

static F3_L2_ENOR: OnceLock<RepeatReport> = OnceLock::new();
static F3_L3_ENOR: OnceLock<RepeatReport> = OnceLock::new();
static F3_L3_LINEAR: OnceLock<RepeatReport> = OnceLock::new();

fn rates_in(r: &ConvergenceReport, lo: f64, hi: f64) -> bool {
    r.rates_l2.iter().all(|&x| x >= lo && x <= hi)
}

fn fmt_rates(r: &ConvergenceReport) -> String {
    let errs: Vec<String> = r.levels.iter().map(|l| format!("{:.2e}", l.l2)).collect();
    let rates: Vec<String> = r.rates_l2.iter().map(|x| format!("{x:.2}")).collect();
    format!("{} l2=[{}] rates=[{}]", r.field, errs.join(", "), rates.join(", "))
}

fn superconvergence() -> Check {
    let t = Instant::now();
    let cfg = RemapConfig { method: Method::Wls, degree: 4, sigma: Some(1.6), ..Default::default() };
    let mut ok = true;
    let mut msg = Vec::new();
    for f in [AnalyticField::F1, AnalyticField::F2] {
        let r = convergence(&f, cfg, MeshFamily::Icosphere, &[1, 2, 3]).unwrap();
        ok &= rates_in(&r, 4.5, f64::INFINITY);
        msg.push(fmt_rates(&r));
    }
    let secs = t.elapsed().as_secs_f64();
    ok &= secs < 120.0;
    (ok, format!("quartic WLS rates >= 4.5: {}; {secs:.1}s", msg.join("; ")))
}

fn quadratic_order() -> Check {
    let wls2 = RemapConfig { method: Method::Wls, degree: 2, sigma: Some(2.0), ..Default::default() };
    let mut ok = true;
    let mut msg = Vec::new();
    for f in [AnalyticField::F1, AnalyticField::F2] {
        let r = convergence(&f, wls2, MeshFamily::Icosphere, &[1, 2, 3]).unwrap();
        ok &= rates_in(&r, 1.8, 3.5);
        msg.push(format!("p=2 {}", fmt_rates(&r)));
        let r = convergence(&f, linear(), MeshFamily::Icosphere, &[1, 2, 3]).unwrap();
        ok &= rates_in(&r, 1.7, 2.3);
        msg.push(format!("linear {}", fmt_rates(&r)));
    }
    (ok, format!("p=2 in [1.8, 3.5], linear in [1.7, 2.3]: {}", msg.join("; ")))
}

fn sigma_optimum() -> Check {
    let mut ok = true;
    let mut msg = Vec::new();
    for (p, best) in [(2, 2.0), (4, 1.6), (6, 1.4)] {
        let s = sweep_sigma(&AnalyticField::F1, p, 1, &default_sigma_grid()).unwrap();
        ok &= (s.argmin - best).abs() <= 0.2 + 1e-12;
        let ratio = s.inverse_distance_l2 / s.min_l2;
        if p == 4 {
            ok &= ratio >= 10.0;
        }
        msg.push(format!(
            "p={p}: argmin {:.1} (expected {best:.1}), min {:.2e}, inverse-distance {:.2e} ({ratio:.1}x), V-shaped {}",
            s.argmin, s.min_l2, s.inverse_distance_l2, s.v_shaped
        ));
    }
    (ok, format!("argmin within 0.2 and >= 10x over inverse distance at p=4: {}", msg.join("; ")))
}

fn detector() -> Check {
    let mut ok = true;
    let mut msg = Vec::new();
    let mut false_marks = 0;
    for f in [AnalyticField::F1, AnalyticField::F2] {
        for fam in [MeshFamily::Icosphere, MeshFamily::CubedSphere] {
            for level in 1..=3 {
                false_marks += detect(&f, fam, level).unwrap().marked;
            }
        }
    }
    ok &= false_marks == 0;
    msg.push(format!("smooth-field markers {false_marks}"));
    for f in [AnalyticField::F3, AnalyticField::F4] {
        for fam in [MeshFamily::Icosphere, MeshFamily::CubedSphere] {
            let r = detect(&f, fam, 3).unwrap();
            let mut parts = Vec::new();
            for b in r.breaks.iter() {
                let Some(theta) = b.breakpoint.theta else { continue };
                let good = match b.breakpoint.kind {
                    BreakKind::Curvature => b.marked_within_h == 0,
                    _ => b.marked_within_h > 0,
                };
                ok &= good;
                parts.push(format!(
                    "{:?}@{theta:.3}: {} within h, nearest {}{}",
                    b.breakpoint.kind,
                    b.marked_within_h,
                    b.nearest_marked_h.map_or("-".into(), |x| format!("{x:.2}h")),
                    if good { "" } else { " [x]" }
                ));
            }
            msg.push(format!("{} {:?} ({} marked): {}", r.field, fam, r.marked, parts.join(", ")));
        }
    }
    (ok, format!("no false markers on smooth fields; breaks covered within h, C2 band clear: {}", msg.join("; ")))
}

fn within_f3(values: &[f64]) -> (bool, f64, f64) {
    let (lo, hi) = F3_RANGE;
    let slack = 1e-6 * (hi - lo);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (min >= lo - slack && max <= hi + slack, min, max)
}

fn non_oscillation() -> Check {
    let mut ok = true;
    let mut msg = Vec::new();
    for level in [2, 3] {
        for fam in [MeshFamily::Icosphere, MeshFamily::CubedSphere] {
            let (s, t) = mesh_pair(fam, level).unwrap();
            let plan = build_plan(s.clone(), t, enor()).unwrap();
            let out = plan.apply(&AnalyticField::F3.sample(s.nodes())).unwrap();
            let (good, min, max) = within_f3(&out.values);
            ok &= good;
            msg.push(format!("one step L{level} from {fam:?}: [{min:.7}, {max:.7}]"));
        }
        let r = if level == 2 { &F3_L2_ENOR } else { &F3_L3_ENOR }.get_or_init(|| f3_repeat(level, enor()));
        let (good, min, max) = within_f3(&r.final_values);
        let worst = r.steps.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, s| (a.0.min(s.min), a.1.max(s.max)));
        let first_bad = r.steps.iter().find(|s| !within_f3(&[s.min, s.max]).0).map(|s| s.step);
        ok &= good && within_f3(&[worst.0, worst.1]).0;
        msg.push(format!(
            "100 round trips L{level}: final [{min:.7}, {max:.7}], over all steps [{:.7}, {:.7}], first excursion at {}",
            worst.0,
            worst.1,
            first_bad.map_or("none".into(), |s| format!("round trip {s}"))
        ));
    }
    (ok, format!("f3 within [0.12, 1] +- 1e-6 range: {}", msg.join("; ")))
}

fn diffusion() -> Check {
    let e = F3_L3_ENOR.get_or_init(|| f3_repeat(3, enor())).steps.last().unwrap().l1.unwrap();
    let l = F3_L3_LINEAR.get_or_init(|| f3_repeat(3, linear())).steps.last().unwrap().l1.unwrap();
    (2.0 * e <= l, format!("f3 L3 100 round trips: l1 WLS-ENOR {e:.3e}, linear {l:.3e} ({:.1}x)", l / e))
}

fn conservation() -> Check {
    let run = |cfg| repeat(&AnalyticField::F2, cfg, 2, 100, &[]).unwrap().steps.last().unwrap().conservation_error.unwrap();
    let (e, l) = (run(enor()), run(linear()));
    (e < l, format!("f2 L2 100 round trips: conservation error WLS-ENOR {e:.3e}, linear {l:.3e}"))
}

fn equivariance() -> Check {
    let (s, t) = mesh_pair(MeshFamily::Icosphere, 2).unwrap();
    let plan = build_plan(s.clone(), t, enor()).unwrap();
    let mut ok = true;
    let mut worst = 0.0f64;
    let mut marker_mismatch = 0;
    for f in [AnalyticField::F3, AnalyticField::F4] {
        let base_in = f.sample(s.nodes());
        let base = plan.apply(&base_in).unwrap();
        for lambda in [1e-3, 1e3] {
            for c in [-1e6, 1e6] {
                let g: Vec<f64> = base_in.iter().map(|v| lambda * v + c).collect();
                let out = plan.apply(&g).unwrap();
                let expect: Vec<f64> = base.values.iter().map(|v| lambda * v + c).collect();
                let scale = expect.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                let err = out.values.iter().zip(&expect).fold(0.0f64, |a, (x, y)| a.max((x - y).abs())) / scale;
                worst = worst.max(err);
                ok &= err <= 1e-9;
                if out.target_markers != base.target_markers {
                    marker_mismatch += 1;
                    ok = false;
                }
            }
        }
    }
    (ok, format!("f3/f4, lambda in {{1e-3, 1e3}}, c in {{+-1e6}}: worst relative deviation {worst:.2e}, marker mismatches {marker_mismatch}"))
}

fn poly(c: &[f64], p: usize, x: f64, y: f64) -> f64 {
    let mut k = 0;
    let mut s = 0.0;
    for d in 0..=p {
        for j in 0..=d {
            s += c[k] * x.powi((d - j) as i32) * y.powi(j as i32);
            k += 1;
        }
    }
    s
}

fn exactness() -> Check {
    let mut worst_const = 0.0f64;
    for level in [1, 2] {
        for fam in [MeshFamily::Icosphere, MeshFamily::CubedSphere] {
            let (s, t) = mesh_pair(fam, level).unwrap();
            for m in [Method::WlsEnor, Method::Wls, Method::Linear] {
                for p in [2, 4, 6] {
                    let cfg = RemapConfig { method: m, degree: p, ..Default::default() };
                    let plan = build_plan(s.clone(), t.clone(), cfg).unwrap();
                    let out = plan.apply(&vec![-7.25; s.node_count()]).unwrap();
                    worst_const = out.values.iter().fold(worst_const, |a, v| a.max((v + 7.25).abs() / 7.25));
                    if m == Method::Linear {
                        break;
                    }
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_poly = 0.0f64;
    for kind in [ElementKind::Triangle, ElementKind::Quad] {
        let mesh = gen_planar_grid(20, 20, kind).unwrap();
        for p in [2, 3, 4, 6] {
            for scheme in WeightKind::SMOOTH {
                let cfg = WlsConfig::new(p, WeightScheme::new(scheme, default_sigma(p)));
                let coeffs: Vec<f64> = (0..monomial_count(p)).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let values: Vec<f64> = mesh.nodes().iter().map(|x| poly(&coeffs, p, x[0], x[1])).collect();
                let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                for _ in 0..20 {
                    let pt = [rng.gen_range(0.3..0.7), rng.gen_range(0.3..0.7), 0.0];
                    let loc = mesh.locate_element(pt).unwrap();
                    let row = build_transfer_row(&mesh, pt, &loc, &cfg, Purpose::Smooth, None).unwrap();
                    let err = (row.apply(&values) - poly(&coeffs, p, pt[0], pt[1])).abs() / scale;
                    worst_poly = worst_poly.max(err);
                }
            }
        }
    }
    (
        worst_const <= 1e-10 && worst_poly <= 1e-9,
        format!("constants: worst relative {worst_const:.2e} (<= 1e-10); planar polynomials p in {{2,3,4,6}} x 4 schemes: worst relative {worst_poly:.2e} (<= 1e-9)"),
    )
}

fn upper_inverse(r: &DenseMatrix) -> DenseMatrix {
    let n = r.rows();
    let mut inv = DenseMatrix::zeros(n, n);
    for col in 0..n {
        for i in (0..=col).rev() {
            let mut s = if i == col { 1.0 } else { 0.0 };
            for k in i + 1..=col {
                s -= r[(i, k)] * inv[(k, col)];
            }
            inv[(i, col)] = s / r[(i, i)];
        }
    }
    inv
}

fn norm1(a: &DenseMatrix) -> f64 {
    (0..a.cols()).map(|j| (0..a.rows()).map(|i| a[(i, j)].abs()).sum::<f64>()).fold(0.0, f64::max)
}

fn numerics() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut worst_rec, mut worst_orth, mut structure) = (0.0f64, 0.0f64, true);
    for _ in 0..300 {
        let n = rng.gen_range(1..=28);
        let m = rng.gen_range(n..=60);
        let a = DenseMatrix::from_fn(m, n, |_, _| rng.gen_range(-10.0..10.0));
        let f = qrcp(&a).unwrap();
        let qr = f.q.matmul(&f.r).unwrap();
        let amax = a.max_abs();
        for i in 0..m {
            for k in 0..n {
                worst_rec = worst_rec.max((qr[(i, k)] - a[(i, f.perm[k])]).abs() / amax);
            }
        }
        let qtq = f.q.transpose().matmul(&f.q).unwrap();
        for i in 0..n {
            for j in 0..n {
                worst_orth = worst_orth.max((qtq[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs());
            }
            for j in 0..i {
                structure &= f.r[(i, j)] == 0.0;
            }
            if i > 0 {
                structure &= f.r[(i, i)].abs() <= f.r[(i - 1, i - 1)].abs() * (1.0 + 1e-12);
            }
        }
    }
    let mut worst_ratio = 1.0f64;
    for trial in 0..200 {
        let n = [2, 4, 6, 10, 15][trial % 5];
        let r = DenseMatrix::from_fn(n, n, |i, j| {
            if j < i {
                0.0
            } else if i == j {
                rng.gen_range(0.01..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 }
            } else {
                rng.gen_range(-1.0..1.0)
            }
        });
        let exact = norm1(&r) * norm1(&upper_inverse(&r));
        let est = cond_estimate_1norm(&r).unwrap();
        worst_ratio = worst_ratio.max(est / exact).max(exact / est);
    }
    let mut worst_spmv = 0.0f64;
    for _ in 0..50 {
        let dense = DenseMatrix::from_fn(50, 30, |_, _| if rng.gen_bool(0.2) { rng.gen_range(-3.0..3.0) } else { 0.0 });
        let rows: Vec<Vec<(usize, f64)>> = (0..50)
            .map(|i| (0..30).filter(|&j| dense[(i, j)] != 0.0).map(|j| (j, dense[(i, j)])).collect())
            .collect();
        let sp = SparseOperator::from_rows(30, rows).unwrap();
        let x: Vec<f64> = (0..30).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let xmax = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let rowsum = (0..50).map(|i| dense.row(i).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
        let (a, b) = (sp.spmv(&x).unwrap(), dense.matvec(&x).unwrap());
        let d = a.iter().zip(&b).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
        worst_spmv = worst_spmv.max(d / (xmax * rowsum));
    }
    let ok = worst_rec < 5e-14 && worst_orth < 1e-12 && structure && worst_ratio <= 3.0 && worst_spmv < 1e-14;
    (
        ok,
        format!(
            "QRCP residual {worst_rec:.1e} (< 5e-14), orthogonality {worst_orth:.1e} (< 1e-12), triangular+ordered {structure}; \
             condition estimate worst factor {worst_ratio:.2} (<= 3); sparse vs dense {worst_spmv:.1e} (< 1e-14)"
        ),
    )
}

fn main() {
    let checks: [(&str, fn() -> Check); 10] = [
        ("superconvergence", superconvergence),
        ("quadratic order", quadratic_order),
        ("sigma optimum", sigma_optimum),
        ("detector", detector),
        ("non-oscillation", non_oscillation),
        ("diffusion ordering", diffusion),
        ("conservation ordering", conservation),
        ("equivariance", equivariance),
        ("exactness", exactness),
        ("numerics oracles", numerics),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let id = format!("{}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| *f == id || name.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let (ok, detail) = match catch_unwind(AssertUnwindSafe(check)) {
            Ok(r) => r,
            Err(e) => {
                let why = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
                (false, format!("panicked: {}", why.unwrap_or_default()))
            }
        };
        failed += !ok as usize;
        println!(
            "criterion {id:>2} {name}: {} ({:.1}s) — {detail}",
            if ok { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
