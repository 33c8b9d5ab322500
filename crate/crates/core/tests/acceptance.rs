//! Acceptance suite: one PASS/FAIL/SKIP line per criterion.
//!
//! The dataset-gated reproduction check reads frame directories from
//! `QUATFILL_BUS_FRAMES` and `QUATFILL_SUZIE_FRAMES` and is skipped when
//! they are unset.

use std::path::{Path, PathBuf};
use std::time::Instant;

use quatfill::completion::{lrc_qm, lrc_qt, SamplingMask, Solver, SolverConfig};
use quatfill::linalg::{adjoint_singular_values, nuclear_norm, qsvd, svt, RankTolerance};
use quatfill::media::{load_frames, qtensor_to_video, video_to_qtensor, ColorImage};
use quatfill::metrics::{psnr, psnr_video, ssim, MetricConfig};
use quatfill::synth::{
    pure_low_rank_matrix, pure_tucker_tensor, random_qmatrix, rng, unitarity_residual,
};
use quatfill::{QuaternionMatrix, QuaternionTensor};
use rand::Rng;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn random_shapes(seed: u64, count: usize, max_rows: usize, max_cols: usize) -> Vec<(usize, usize)> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| (r.gen_range(1..=max_rows), r.gen_range(1..=max_cols)))
        .collect()
}

fn qsvd_matrices() -> Vec<QuaternionMatrix> {
    let mut r = rng(2024);
    random_shapes(1, 200, 64, 48)
        .into_iter()
        .map(|(m, n)| random_qmatrix(&mut r, m, n))
        .collect()
}

fn criterion_1(mats: &[QuaternionMatrix]) -> Outcome {
    let start = Instant::now();
    let (mut worst_rec, mut worst_unit) = (0.0f64, 0.0f64);
    for q in mats {
        let d = qsvd(q, RankTolerance::Auto).unwrap();
        worst_rec = worst_rec.max(d.reconstruct().sub(q).unwrap().frobenius() / q.frobenius());
        worst_unit = worst_unit
            .max(unitarity_residual(&d.u))
            .max(unitarity_residual(&d.v));
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst_rec <= 1e-9 && worst_unit <= 1e-10 && secs < 10.0,
        format!(
            "max rel reconstruction {worst_rec:.2e}, max unitarity {worst_unit:.2e}, {secs:.2} s"
        ),
    )
}

fn criterion_2(mats: &[QuaternionMatrix]) -> Outcome {
    let mut worst = 0.0f64;
    for q in mats {
        let s = adjoint_singular_values(q).unwrap();
        let smax = s[0];
        for pair in s.chunks(2) {
            worst = worst.max((pair[0] - pair[1]).abs() / smax);
        }
    }
    verdict(
        worst <= 1e-10,
        format!("max pair gap / sigma_max {worst:.2e}"),
    )
}

fn svt_objective(x: &QuaternionMatrix, q: &QuaternionMatrix, xi: f64) -> f64 {
    xi * nuclear_norm(x).unwrap() + 0.5 * x.sub(q).unwrap().frobenius().powi(2)
}

fn criterion_3() -> Outcome {
    let mut r = rng(33);
    let shapes = random_shapes(3, 50, 8, 6);
    let (mut trials, mut violations) = (0usize, 0usize);
    for (m, n) in shapes {
        let q = random_qmatrix(&mut r, m, n);
        for xi in [0.1, 1.0, 5.0] {
            let x = svt(&q, xi).unwrap();
            let best = svt_objective(&x, &q, xi);
            for radius in [1e-3, 1e-1, 1.0] {
                for _ in 0..200 {
                    let d = random_qmatrix(&mut r, m, n);
                    let y = x.add_scaled(radius / d.frobenius(), &d).unwrap();
                    trials += 1;
                    if svt_objective(&y, &q, xi) < best {
                        violations += 1;
                    }
                }
            }
        }
    }
    verdict(
        violations == 0,
        format!("{violations} violations in {trials} perturbations"),
    )
}

fn qm_fixture() -> (QuaternionMatrix, SamplingMask) {
    let truth = pure_low_rank_matrix(&mut rng(4), 60, 60, 5).unwrap();
    let mask = SamplingMask::generate(&[60, 60], 0.5, 4).unwrap();
    (truth, mask)
}

fn qt_fixture() -> (QuaternionTensor, SamplingMask) {
    let truth = pure_tucker_tensor(&mut rng(5), &[20, 20, 10], &[2, 2, 2]).unwrap();
    let mask = SamplingMask::generate(truth.shape(), 0.5, 5).unwrap();
    (truth, mask)
}

fn criterion_4() -> Outcome {
    let (truth, mask) = qm_fixture();
    let y = mask.apply_matrix(&truth).unwrap();
    let start = Instant::now();
    let (x, rep) = lrc_qm(&y, &mask, &SolverConfig::matrix_default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let rel = x.sub(&truth).unwrap().frobenius() / truth.frobenius();
    verdict(
        rel < 1e-2 && rep.iterations <= 500 && secs < 60.0,
        format!(
            "rel error {rel:.2e}, {} iterations, {secs:.2} s",
            rep.iterations
        ),
    )
}

fn criterion_5() -> Outcome {
    let (truth, mask) = qt_fixture();
    let y = mask.apply(&truth).unwrap();
    let start = Instant::now();
    let (x, rep) = lrc_qt(&y, &mask, &SolverConfig::tensor_default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let rel = x.sub(&truth).unwrap().frobenius() / truth.frobenius();
    verdict(
        rel < 1e-2 && rep.iterations <= 500 && secs < 120.0,
        format!(
            "rel error {rel:.2e}, {} iterations, {secs:.2} s",
            rep.iterations
        ),
    )
}

fn criterion_6() -> Outcome {
    let (qm, _) = qm_fixture();
    let full_m = SamplingMask::full(&[60, 60]).unwrap();
    let (xm, rm) = lrc_qm(&qm, &full_m, &SolverConfig::matrix_default()).unwrap();
    let (qt, _) = qt_fixture();
    let full_t = SamplingMask::full(qt.shape()).unwrap();
    let (xt, rt) = lrc_qt(&qt, &full_t, &SolverConfig::tensor_default()).unwrap();
    verdict(
        xm == qm && xt == qt && rm.iterations <= 2 && rt.iterations <= 2,
        format!(
            "matrix {} iterations, tensor {} iterations, exact: {}",
            rm.iterations,
            rt.iterations,
            xm == qm && xt == qt
        ),
    )
}

fn criterion_7() -> Outcome {
    let cfg = MetricConfig::default();
    let reference = ColorImage::from_fn(64, 64, |i, j| {
        [
            ((i * 3 + j) % 200) as f64,
            ((i * j) % 200) as f64,
            ((5 * j + 17) % 200) as f64,
        ]
    })
    .unwrap();
    let shifted =
        ColorImage::from_fn(64, 64, |i, j| reference.pixel(i, j).map(|v| v + 16.0)).unwrap();
    let p = psnr(&shifted, &reference, &cfg).unwrap();
    let want = 10.0 * (255.0f64 * 255.0 / 256.0).log10();
    let s = ssim(&reference, &reference, &cfg).unwrap();
    verdict(
        (p - want).abs() <= 1e-6 && (s - 1.0).abs() <= 1e-12,
        format!(
            "psnr {p:.9} (want {want:.9}), ssim(X, X) - 1 = {:.1e}",
            s - 1.0
        ),
    )
}

fn reproduction_run(dir: &Path, sr: f64, target: f64) -> (f64, String) {
    let video = load_frames(dir).unwrap();
    let truth = video_to_qtensor(&video);
    let mut total = 0.0;
    for seed in 0..5 {
        let mask = SamplingMask::generate(truth.shape(), sr, seed).unwrap();
        let y = mask.apply(&truth).unwrap();
        let (x, _) = lrc_qt(&y, &mask, &SolverConfig::tensor_default()).unwrap();
        let rec = qtensor_to_video(&x).unwrap();
        total += psnr_video(&rec, &video, &MetricConfig::default()).unwrap();
    }
    let mean = total / 5.0;
    (
        mean,
        format!(
            "{} sr {sr}: mean psnr {mean:.3} dB (target {target})",
            dir.display()
        ),
    )
}

fn criterion_8() -> Outcome {
    let bus = std::env::var_os("QUATFILL_BUS_FRAMES").map(PathBuf::from);
    let suzie = std::env::var_os("QUATFILL_SUZIE_FRAMES").map(PathBuf::from);
    if bus.is_none() && suzie.is_none() {
        return Outcome::Skip("set QUATFILL_BUS_FRAMES / QUATFILL_SUZIE_FRAMES to run".into());
    }
    let mut ok = true;
    let mut notes = Vec::new();
    for (dir, sr, target) in [(bus, 0.5, 26.230), (suzie, 0.1, 25.712)] {
        if let Some(d) = dir {
            let (mean, note) = reproduction_run(&d, sr, target);
            ok &= (mean - target).abs() <= 1.5;
            notes.push(note);
        }
    }
    verdict(ok, notes.join("; "))
}

fn criterion_9() -> Outcome {
    let (qm, mask_m) = qm_fixture();
    let ym = mask_m.apply_matrix(&qm).unwrap();
    let cfg_m = SolverConfig::matrix_default();
    let (m1, _) = Solver::new(cfg_m.clone())
        .threads(1)
        .complete_matrix(&ym, &mask_m)
        .unwrap();
    let (m4, _) = Solver::new(cfg_m)
        .threads(4)
        .complete_matrix(&ym, &mask_m)
        .unwrap();

    let (qt, mask_t) = qt_fixture();
    let yt = mask_t.apply(&qt).unwrap();
    let cfg_t = SolverConfig::tensor_default();
    let (t1, r1) = Solver::new(cfg_t.clone())
        .threads(1)
        .complete_tensor(&yt, &mask_t)
        .unwrap();
    let (t4, r4) = Solver::new(cfg_t)
        .threads(4)
        .complete_tensor(&yt, &mask_t)
        .unwrap();
    let same = m1 == m4 && t1 == t4 && r1.delta_history == r4.delta_history;
    verdict(same, format!("1 vs 4 threads bit-identical: {same}"))
}

#[test]
fn acceptance() {
    let mats = qsvd_matrices();
    let results = [
        ("QSVD correctness", criterion_1(&mats)),
        ("paired adjoint spectrum", criterion_2(&mats)),
        ("SVT optimality", criterion_3()),
        ("LRC-QM synthetic recovery", criterion_4()),
        ("LRC-QT synthetic recovery", criterion_5()),
        ("fully observed fixed point", criterion_6()),
        ("metric oracles", criterion_7()),
        ("video benchmark reproduction", criterion_8()),
        ("parallel determinism", criterion_9()),
    ];
    let mut failed = Vec::new();
    for (i, (name, outcome)) in results.iter().enumerate() {
        let n = i + 1;
        match outcome {
            Outcome::Pass(d) => println!("criterion {n} PASS {name}: {d}"),
            Outcome::Skip(d) => println!("criterion {n} SKIP {name}: {d}"),
            Outcome::Fail(d) => {
                println!("criterion {n} FAIL {name}: {d}");
                failed.push(n);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
