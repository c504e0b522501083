//! Acceptance suite: one PASS/FAIL line per criterion, each at its pinned
//! tolerance. Exits non-zero if any criterion fails.

use std::sync::OnceLock;
use std::time::Instant;

use ripforge::dictionaries::{wavelet_2d, Direction};
use ripforge::ensembles::{draw_ensemble, draw_row_selector, EnsembleKind};
use ripforge::factorize::{build_sensing, factorize, Construction, Factorization};
use ripforge::harness::{
    phase_csv, run_mri_benchmark, run_phase_transition, piecewise_smooth, Arm, PhaseTransitionConfig,
};
use ripforge::linalg::{solve_sylvester, sym_inv_sqrt, SylvesterMethod};
use ripforge::mri::{
    image_metrics, make_mask, reconstruct, recover_image, simulate_kspace, zero_fill, AccelMask, FactorMode, GState,
    HState, L1Data, L2Data, Method, MriDicts, MriParams,
};
use ripforge::recovery::{cosamp, SparseRecoveryConfig};
use ripforge::{Mat, Seed};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn gaussian(r: usize, c: usize, seed: Seed) -> Mat {
    let mut s = seed.stream(0);
    Mat::from_fn(r, c, |_, _| s.normal())
}

/// Projects onto the nearest matrix with orthonormal rows.
fn tight(m: &Mat) -> Mat {
    sym_inv_sqrt(&m.matmul_t(m)).unwrap().matmul(m)
}

const SHAPES: [(usize, usize); 3] = [(8, 16), (32, 64), (128, 256)];
const PAIRS: u64 = 100;

/// Worst-case diagnostics over the seeded pair suite, shared by the
/// exactness and sensing-identity criteria.
struct SuiteReport {
    count: usize,
    seconds: f64,
    residual: f64,
    orth_per_n: f64,
    gram_transport: f64,
    sensing_gap: f64,
    failures: Vec<String>,
}

fn suite() -> &'static SuiteReport {
    static REPORT: OnceLock<SuiteReport> = OnceLock::new();
    REPORT.get_or_init(run_suite)
}

/// `seconds` covers the factorizations and their exactness checks; the
/// sensing-identity checks are not timed.
fn run_suite() -> SuiteReport {
    let mut rep = SuiteReport {
        count: 0,
        seconds: 0.0,
        residual: 0.0,
        orth_per_n: 0.0,
        gram_transport: 0.0,
        sensing_gap: 0.0,
        failures: Vec::new(),
    };
    for (si, &(l, n)) in SHAPES.iter().enumerate() {
        for t in 0..PAIRS {
            let seed = Seed(1000 * si as u64 + t);
            let d = gaussian(l, n, seed.derive(1));
            let a = draw_ensemble(EnsembleKind::Gaussian, l, n, seed.derive(2));
            for c in [Construction::Spectral, Construction::Range, Construction::TightFrame] {
                // The tight-frame construction needs DDᵀ = I.
                let d = if c == Construction::TightFrame { tight(&d) } else { d.clone() };
                let tag = format!("{l}×{n} pair {t} {c:?}");
                let t0 = Instant::now();
                let f = match factorize(c, &d, &a) {
                    Ok(f) => f,
                    Err(e) => {
                        rep.failures.push(format!("{tag}: {e}"));
                        continue;
                    }
                };
                rep.count += 1;
                check_exactness(&d, &a, &f, &mut rep, &tag);
                rep.seconds += t0.elapsed().as_secs_f64();
                check_sensing(&d, &f, &mut rep, &tag);
            }
        }
    }
    rep
}

fn check_exactness(d: &Mat, a: &Mat, f: &Factorization, rep: &mut SuiteReport, tag: &str) {
    let n = d.cols() as f64;
    let orth = f.h.matmul_t(&f.h).sub(&Mat::identity(d.cols())).frobenius();
    let resid = f.g.matmul(a).matmul(&f.h).sub(d).frobenius() / d.frobenius();
    rep.residual = rep.residual.max(resid);
    rep.orth_per_n = rep.orth_per_n.max(orth / n);
    if resid > 1e-8 || orth > 1e-8 * n {
        rep.failures.push(format!("{tag}: residual {resid:.2e}, orth {orth:.2e}"));
    }
    if f.construction == Construction::Spectral {
        // With D = G·A·H, T = G⁻¹ satisfies T·D·Dᵀ·Tᵀ = A·Aᵀ.
        let t = &f.g_inv;
        let aat = a.matmul_t(a);
        let rel = t.matmul(d).matmul_t(d).matmul_t(t).sub(&aat).frobenius() / aat.frobenius();
        rep.gram_transport = rep.gram_transport.max(rel);
        if rel > 1e-8 {
            rep.failures.push(format!("{tag}: Gram transport {rel:.2e}"));
        }
    }
}

fn check_sensing(d: &Mat, f: &Factorization, rep: &mut SuiteReport, tag: &str) {
    let l = d.rows();
    for m in [(l / 4).max(1), l / 2, l] {
        let sel = draw_row_selector(m, l, Seed((l * 31 + m) as u64)).unwrap();
        let sys = match build_sensing(f, d, &sel) {
            Ok(s) => s,
            Err(e) => {
                rep.failures.push(format!("{tag}, m = {m}: {e}"));
                continue;
            }
        };
        // Directly from the factors, and through the assembled system.
        let direct = sel.apply(&f.g_inv).matmul(d).sub(&sel.apply(&f.a).matmul(&f.h)).frobenius();
        let assembled = sys.composed.sub(&sys.ensemble_side()).frobenius();
        let gap = direct.max(assembled) / d.frobenius();
        rep.sensing_gap = rep.sensing_gap.max(gap);
        if gap > 1e-8 {
            rep.failures.push(format!("{tag}, m = {m}: sensing gap {gap:.2e}"));
        }
    }
}

fn failures_summary(rep: &SuiteReport, filter: &str) -> Option<String> {
    let hits: Vec<&String> = rep.failures.iter().filter(|f| f.contains(filter)).collect();
    (!hits.is_empty()).then(|| format!("{} failures, first: {}", hits.len(), hits[0]))
}

fn factorization_exactness() -> Outcome {
    let rep = suite();
    let errors = rep.failures.iter().filter(|f| !f.contains("sensing gap")).count();
    let detail = format!(
        "{} factorizations; max residual {:.1e}, max ‖HHᵀ−I‖/n {:.1e}, max Gram transport {:.1e}; {:.1}s (< 60s)",
        rep.count, rep.residual, rep.orth_per_n, rep.gram_transport, rep.seconds
    );
    match failures_summary(rep, "") {
        Some(msg) if errors > 0 => outcome(false, format!("{detail}; {msg}")),
        _ => outcome(rep.seconds < 60.0 && rep.count == 900, detail),
    }
}

fn sensing_identity() -> Outcome {
    let rep = suite();
    let detail = format!(
        "{} factorizations × 3 row counts; max ‖ℰG⁻¹D − ℰAH‖/‖D‖ = {:.1e} (≤ 1e-8)",
        rep.count, rep.sensing_gap
    );
    match failures_summary(rep, "sensing gap") {
        Some(msg) => outcome(false, format!("{detail}; {msg}")),
        None => outcome(rep.count == 900, detail),
    }
}

fn tight_frame_orthonormal_g() -> Outcome {
    let mut worst = 0.0f64;
    for t in 0..20 {
        let d = tight(&gaussian(16, 48, Seed(7000 + t)));
        let a = tight(&gaussian(16, 48, Seed(8000 + t)));
        match factorize(Construction::TightFrame, &d, &a) {
            Ok(f) => worst = worst.max(f.g.matmul_t(&f.g).sub(&Mat::identity(16)).frobenius()),
            Err(e) => return outcome(false, format!("instance {t}: {e}")),
        }
    }
    outcome(worst <= 1e-8, format!("20 instances 16×48; max ‖GGᵀ − I‖_F = {worst:.1e} (≤ 1e-8)"))
}

/// Dense LU with partial pivoting.
fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    x
}

/// Solves `P·X + X·Q + C = 0` through `(I ⊗ P + Qᵀ ⊗ I)·vec(X) = −vec(C)`.
fn kronecker_oracle(p: &Mat, q: &Mat, c: &Mat) -> Mat {
    let (r, s) = c.shape();
    let idx = |i: usize, j: usize| j * r + i;
    let mut a = vec![vec![0.0; r * s]; r * s];
    let mut b = vec![0.0; r * s];
    for j in 0..s {
        for i in 0..r {
            b[idx(i, j)] = -c[(i, j)];
            for k in 0..r {
                a[idx(i, j)][idx(k, j)] += p[(i, k)];
            }
            for k in 0..s {
                a[idx(i, j)][idx(i, k)] += q[(k, j)];
            }
        }
    }
    let x = dense_solve(a, b);
    Mat::from_fn(r, s, |i, j| x[idx(i, j)])
}

fn spd(n: usize, seed: Seed) -> Mat {
    let b = gaussian(n, n, seed);
    b.matmul_t(&b).add(&Mat::identity(n).scale(0.5))
}

fn sylvester_oracle() -> Outcome {
    let mut worst = [0.0f64; 2];
    for t in 0..50u64 {
        let seed = Seed(9000 + t);
        let mut s = seed.stream(9);
        let (r, c) = (1 + s.below(12), 1 + s.below(12));
        let p = spd(r, seed.derive(1));
        let q = spd(c, seed.derive(2));
        let cm = gaussian(r, c, seed.derive(3));
        let want = kronecker_oracle(&p, &q, &cm);
        for (k, method) in [SylvesterMethod::Spectral, SylvesterMethod::Krylov].into_iter().enumerate() {
            match solve_sylvester(&p, &q, &cm, method, 1e-12) {
                Ok(x) => worst[k] = worst[k].max(x.sub(&want).frobenius() / want.frobenius()),
                Err(e) => return outcome(false, format!("instance {t} {method:?}: {e}")),
            }
        }
    }
    outcome(
        worst[0] <= 1e-6 && worst[1] <= 1e-6,
        format!("50 instances; max relative error spectral {:.1e}, krylov {:.1e} (≤ 1e-6)", worst[0], worst[1]),
    )
}

/// Max relative error between `grad` and central differences of `f`.
fn fd_error(f: impl Fn(&Mat) -> f64, x: &Mat, grad: &Mat) -> f64 {
    let h = 1e-5;
    let fd = Mat::from_fn(x.rows(), x.cols(), |i, j| {
        let mut p = x.clone();
        p[(i, j)] += h;
        let mut m = x.clone();
        m[(i, j)] -= h;
        (f(&p) - f(&m)) / (2.0 * h)
    });
    fd.sub(grad).frobenius() / grad.frobenius().max(1e-12)
}

fn gradient_fidelity() -> Outcome {
    let n = 6;
    let mut worst = [0.0f64; 4];
    for t in 0..20u64 {
        let seed = Seed(11_000 + t);
        let f = gaussian(n, n, seed.derive(1));
        let mut ms = seed.stream(2);
        let rows: Vec<f64> = (0..n).map(|_| if ms.coin() { 1.0 } else { 0.0 }).collect();
        let l1 = L1Data {
            f_part: &f,
            rows: &rows,
            rho: 0.3,
        };
        let gs = GState {
            g: gaussian(n, n, seed.derive(3)),
            g_tilde: gaussian(n, n, seed.derive(4)),
            lambda1: gaussian(n, n, seed.derive(5)),
            lambda2: gaussian(n, n, seed.derive(6)),
        };
        let g_grad = l1.g_system(&gs).gradient_at(&gs.g);
        worst[0] = worst[0].max(fd_error(|g| l1.value(&GState { g: g.clone(), ..gs.clone() }), &gs.g, &g_grad));
        let gt_grad = l1.g_tilde_system(&gs).gradient_at(&gs.g_tilde);
        worst[1] = worst[1].max(fd_error(
            |g| l1.value(&GState { g_tilde: g.clone(), ..gs.clone() }),
            &gs.g_tilde,
            &gt_grad,
        ));

        let (d, g, a) = (gaussian(n, n, seed.derive(7)), gaussian(n, n, seed.derive(8)), gaussian(n, n, seed.derive(9)));
        let l2 = L2Data {
            d: &d,
            g: &g,
            a: &a,
            nu: 0.7,
            mu: 0.4,
        };
        let hs = HState {
            h: gaussian(n, n, seed.derive(10)),
            h_tilde: gaussian(n, n, seed.derive(11)),
            lambda3: gaussian(n, n, seed.derive(12)),
            lambda4: gaussian(n, n, seed.derive(13)),
        };
        let h_grad = l2.h_system(&hs).gradient_at(&hs.h);
        worst[2] = worst[2].max(fd_error(|h| l2.value(&HState { h: h.clone(), ..hs.clone() }), &hs.h, &h_grad));
        let ht_grad = l2.h_tilde_system(&hs).gradient_at(&hs.h_tilde);
        worst[3] = worst[3].max(fd_error(
            |h| l2.value(&HState { h_tilde: h.clone(), ..hs.clone() }),
            &hs.h_tilde,
            &ht_grad,
        ));
    }
    outcome(
        worst.iter().all(|&w| w <= 1e-5),
        format!(
            "20 instances 6×6; max relative error ∇G {:.1e}, ∇G̃ {:.1e}, ∇H {:.1e}, ∇H̃ {:.1e} (≤ 1e-5)",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

fn desk_phase_transition() -> Outcome {
    let t0 = Instant::now();
    let mut details = Vec::new();
    let mut pass = true;
    for ensemble in [EnsembleKind::Gaussian, EnsembleKind::Bernoulli] {
        let cfg = PhaseTransitionConfig {
            ensemble,
            sparsity_levels: vec![5],
            ..PhaseTransitionConfig::desk()
        };
        let rec = match run_phase_transition(&cfg) {
            Ok(r) => r,
            Err(e) => return outcome(false, format!("{ensemble:?}: {e}")),
        };
        let ours = rec.curve(5, Arm::Factored);
        let theirs = rec.curve(5, Arm::Benchmark);
        // Compared as success counts so a gap of exactly 0.15·trials is not
        // lost to rounding in the probabilities.
        let counts = |arm: Arm| -> Vec<usize> {
            rec.points.iter().filter(|p| p.arm == arm).map(|p| p.successes).collect()
        };
        let max_gap = counts(Arm::Factored)
            .iter()
            .zip(counts(Arm::Benchmark))
            .map(|(a, b)| a.abs_diff(b))
            .max()
            .unwrap_or(0);
        let gap = max_gap as f64 / cfg.trials as f64;
        let drop = |c: &[(f64, f64)]| {
            let mut best = f64::NEG_INFINITY;
            let mut worst_drop = 0.0f64;
            for &(_, p) in c {
                worst_drop = worst_drop.max(best - p);
                best = best.max(p);
            }
            worst_drop
        };
        let (d1, d2) = (drop(&ours), drop(&theirs));
        pass &= ours.len() == 8 && max_gap as f64 <= 0.15 * cfg.trials as f64 && d1 <= 0.1 && d2 <= 0.1;
        let probs = |c: &[(f64, f64)]| c.iter().map(|p| format!("{:.2}", p.1)).collect::<Vec<_>>().join(" ");
        details.push(format!(
            "{ensemble:?}: factored [{}] benchmark [{}] max gap {gap:.3} (≤ 0.15), max drop {:.3}/{:.3} (≤ 0.1)",
            probs(&ours),
            probs(&theirs),
            d1,
            d2
        ));
    }
    let secs = t0.elapsed().as_secs_f64();
    pass &= secs < 600.0;
    details.push(format!("{secs:.1}s (< 600s)"));
    outcome(pass, details.join("; "))
}

fn cosamp_correctness() -> Outcome {
    let (m, n, k) = (100, 256, 5);
    let phi = draw_ensemble(EnsembleKind::Gaussian, m, n, Seed(12_000));
    let cfg = SparseRecoveryConfig::new(k);
    let mut exact = 0;
    for t in 0..200u64 {
        let mut s = Seed(12_001).derive(t).stream(0);
        let mut x = vec![0.0; n];
        for j in s.sample_indices(n, k) {
            x[j] = s.normal();
        }
        let z = phi.matvec(&x);
        let Ok(r) = cosamp(&phi, &z, &cfg) else { continue };
        let err: f64 = r.estimate.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        if err <= 1e-6 {
            exact += 1;
        }
    }
    outcome(exact >= 180, format!("{exact}/200 exact recoveries (≥ 180)"))
}

fn wavelet_perfect_reconstruction() -> Outcome {
    let sizes = [(32, 32), (64, 64), (128, 128), (256, 256), (32, 256), (128, 64)];
    let mut worst = 0.0f64;
    for (t, &(r, c)) in sizes.iter().enumerate() {
        for levels in 1..=3 {
            let z = gaussian(r, c, Seed(13_000 + 10 * t as u64 + levels as u64));
            let x = wavelet_2d(&z, levels, Direction::Analyze).unwrap();
            let back = wavelet_2d(&x, levels, Direction::Synthesize).unwrap();
            worst = worst.max(back.sub(&z).frobenius() / z.frobenius());
        }
    }
    outcome(worst <= 1e-8, format!("sizes 32–256, levels 1–3; max relative residual {worst:.1e} (≤ 1e-8)"))
}

fn mri_lossless_path() -> Outcome {
    let (n1, n2) = (64, 64);
    let z = piecewise_smooth(n1, n2);
    let mask = AccelMask::full(n1);
    let y = simulate_kspace(&z, &mask).unwrap();
    let params = MriParams {
        gamma: 0.0,
        factor_mode: FactorMode::Oracle,
        levels: 3,
        fista_iters: 2000,
        fista_tol: 1e-15,
        ..Default::default()
    };
    match recover_image(&y, &mask, &MriDicts::wavelet(n1, n2, 3).unwrap(), &params, Seed(14_000)) {
        Ok(rec) => {
            let zf = zero_fill(&y);
            let rel = rec.z.sub(&zf).frobenius() / zf.frobenius();
            outcome(rel <= 1e-4, format!("64×64, full mask, γ = 0: relative error {rel:.1e} (≤ 1e-4)"))
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn mri_phantom_benchmark() -> Outcome {
    let z = piecewise_smooth(128, 128);
    let mask = make_mask(128, 4, Seed(1)).unwrap();
    let y = simulate_kspace(&z, &mask).unwrap();
    let params = MriParams::default();
    let mut metrics = Vec::new();
    for method in [Method::ZeroFill, Method::Tv, Method::Proposed] {
        match reconstruct(method, &y, &mask, &params, Seed(2)).and_then(|r| image_metrics(&z, &r.z, 1.0)) {
            Ok(m) => metrics.push(m),
            Err(e) => return outcome(false, format!("{}: {e}", method.name())),
        }
    }
    let (zf, tv, ours) = (metrics[0], metrics[1], metrics[2]);
    let tv_ok = tv.psnr.is_finite() && tv.ssim.is_finite();
    outcome(
        ours.psnr >= zf.psnr + 2.0 && tv_ok,
        format!(
            "128×128 phantom, 4×: zero-fill {:.2} dB/{:.3}, TV {:.2} dB/{:.3} (finite: {tv_ok}), proposed {:.2} dB/{:.3}; proposed − zero-fill = {:+.2} dB (≥ +2)",
            zf.psnr,
            zf.ssim,
            tv.psnr,
            tv.ssim,
            ours.psnr,
            ours.ssim,
            ours.psnr - zf.psnr
        ),
    )
}

fn mask_structure() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    for n1 in [128usize, 256, 640] {
        for (accel, frac, center) in [(4u32, 0.25, 0.08), (8, 0.125, 0.04)] {
            let total = (frac * n1 as f64).round() as usize;
            let c = (center * n1 as f64).round() as usize;
            let mask = make_mask(n1, accel, Seed(n1 as u64 + accel as u64)).unwrap();
            // The centre block is contiguous around DC, wrapping through row 0.
            let block: Vec<usize> = (0..c).map(|t| (t + n1 - c / 2) % n1).collect();
            let ok = mask.selected_count() == total
                && mask.center_rows().len() == c
                && block.iter().all(|&i| mask.selected[i]);
            pass &= ok;
            details.push(format!("{n1}/{accel}×: {}+{} of {}", c, mask.selected_count() - c, n1));
        }
    }
    outcome(pass, details.join(", "))
}

fn reproducibility() -> Outcome {
    let cfg = PhaseTransitionConfig {
        sparsity_levels: vec![5],
        cs_ratios: vec![0.125, 0.25],
        trials: 20,
        ..PhaseTransitionConfig::desk()
    };
    let a = phase_csv(&run_phase_transition(&cfg).unwrap().points);
    let b = phase_csv(&run_phase_transition(&cfg).unwrap().points);
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let params = MriParams {
        outer_iters: 10,
        fista_iters: 50,
        tv_iters: 50,
        ..Default::default()
    };
    let images = vec![("phantom".to_string(), piecewise_smooth(32, 32))];
    for d in &dirs {
        run_mri_benchmark(&images, &[4, 8], &[Method::ZeroFill, Method::Tv, Method::Proposed], &params, Seed(3), Some(d.path()))
            .unwrap();
    }
    let read = |i: usize, f: &str| std::fs::read(dirs[i].path().join(f)).unwrap();
    let same_mri = read(0, "benchmark.csv") == read(1, "benchmark.csv") && read(0, "table.csv") == read(1, "table.csv");
    outcome(
        a == b && same_mri,
        format!("phase CSV identical: {}; MRI benchmark CSVs identical: {same_mri}", a == b),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("factorization exactness", factorization_exactness),
        ("sensing identity ℰG⁻¹D = ℰAH", sensing_identity),
        ("tight frames give orthonormal G", tight_frame_orthonormal_g),
        ("Sylvester solvers match Kronecker oracle", sylvester_oracle),
        ("Lagrangian gradient fidelity", gradient_fidelity),
        ("desk-scale phase transition", desk_phase_transition),
        ("CoSaMP exact recovery", cosamp_correctness),
        ("CDF 9/7 perfect reconstruction", wavelet_perfect_reconstruction),
        ("MRI lossless oracle path", mri_lossless_path),
        ("MRI phantom: proposed ≥ zero-fill + 2 dB, TV finite", mri_phantom_benchmark),
        ("acceleration mask structure", mask_structure),
    ];
    let criteria: Vec<(&str, fn() -> Outcome)> = criteria.into_iter().chain([("byte-identical reruns", reproducibility as fn() -> Outcome)]).collect();
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        ran += 1;
        let t0 = Instant::now();
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {name} ({:.1}s): {}", t0.elapsed().as_secs_f64(), o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
