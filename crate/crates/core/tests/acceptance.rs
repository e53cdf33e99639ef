//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Run with `cargo test -p dqc1 --test acceptance`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dqc1::cli::tables::{TableMethod, TablesOutput};
use dqc1::cli::{fidelity_rows, reproduce_tables, DatasetKind, ExperimentConfig};
use dqc1::circuit::FeatureMapSpec;
use dqc1::dqc1::{
    noisy_offdiagonal, sample_from_kernel, shots_needed, ControlPrep, NoiseModel, RegisterPrep,
    ShotPlan,
};
use dqc1::kernel::{quantum_kernel, rbf_gram, rbf_kernel, rff_estimate, GramMatrix, GramParams, KernelMethod};
use dqc1::svm::{dual_objective, train_smo, Label, SmoParams};

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

fn random_phase_points(n: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| [rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..2.0 * PI)])
        .collect()
}

fn preps() -> [RegisterPrep; 2] {
    [RegisterPrep::MaximallyMixed, RegisterPrep::AllZerosPure]
}

fn run_tables(threads: usize) -> TablesOutput {
    let cfg = ExperimentConfig::default();
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(|| reproduce_tables(&cfg))
        .expect("table reproduction runs")
}

fn table_check(t: &TablesOutput, family: DatasetKind) -> Outcome {
    let cells: Vec<_> = t.cells.iter().filter(|c| c.family == family).collect();
    let bad: Vec<String> = cells
        .iter()
        .filter(|c| !c.within_tolerance())
        .map(|c| {
            format!(
                "{:?} zeta={} {:.4}/{:.4} vs {}/{}",
                c.method, c.zeta, c.train_score, c.test_score, c.published[0], c.published[1]
            )
        })
        .collect();
    let within = cells.len() - bad.len();
    let mut detail = format!("{within}/{} cells within tolerance", cells.len());
    if !bad.is_empty() {
        detail.push_str("; outside: ");
        detail.push_str(&bad.join(", "));
    }
    outcome(bad.is_empty(), detail)
}

fn criterion_ordering(t: &TablesOutput) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (family, zeta) in [(DatasetKind::Moons, 0.15), (DatasetKind::Circles, 0.1)] {
        let get = |m| t.cell(family, m, zeta).expect("cell present");
        let (mixed, pure, rbf) = (get(TableMethod::Mixed), get(TableMethod::Pure), get(TableMethod::Rbf));
        let beats = mixed.test_score > pure.test_score;
        let close = (mixed.test_score - rbf.test_score).abs() <= 0.05
            && (mixed.train_score - rbf.train_score).abs() <= 0.05;
        pass &= beats && close;
        parts.push(format!(
            "{family:?} zeta={zeta}: mixed test {:.4} vs pure {:.4} ({}), mixed vs RBF train {:.4}/{:.4} test {:.4}/{:.4} ({})",
            mixed.test_score,
            pure.test_score,
            if beats { "ok" } else { "not greater" },
            mixed.train_score,
            rbf.train_score,
            mixed.test_score,
            rbf.test_score,
            if close { "ok" } else { "gap > 0.05" },
        ));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_normalization() -> Outcome {
    let pts = random_phase_points(100, 4);
    let mut worst: f64 = 0.0;
    for prep in preps() {
        for &x in &pts {
            let k = quantum_kernel(x, x, 3, &prep).unwrap();
            worst = worst.max((k - dqc1::Complex::new(1.0, 0.0)).norm());
        }
    }
    outcome(worst <= 1e-10, format!("max |K(x,x) - 1| = {worst:.3e} over 100 points, both registers"))
}

fn fixed_pairs() -> Vec<([f64; 2], [f64; 2])> {
    let pts = random_phase_points(20, 5);
    pts.chunks(2).map(|c| (c[0], c[1])).collect()
}

fn criterion_concentration() -> Outcome {
    let shots = shots_needed(0.1, 0.05, 1.0).unwrap();
    let plan = ShotPlan::fixed(shots, shots).unwrap();
    let control = ControlPrep::pure();
    let mut miss = [0usize; 2];
    let mut trials = 0usize;
    for (p, (x, y)) in fixed_pairs().into_iter().enumerate() {
        let k = quantum_kernel(x, y, 3, &RegisterPrep::MaximallyMixed).unwrap();
        for t in 0..1000u64 {
            let est = sample_from_kernel(k, control, &plan, (p as u64) << 32 | t).unwrap();
            miss[0] += ((est.re - k.re).abs() > 0.1) as usize;
            miss[1] += ((est.im - k.im).abs() > 0.1) as usize;
            trials += 1;
        }
    }
    let fx = miss[0] as f64 / trials as f64;
    let fy = miss[1] as f64 / trials as f64;
    outcome(
        fx <= 0.05 && fy <= 0.05,
        format!("{shots} shots/quadrature, {trials} trials: miss fraction Re {fx:.4}, Im {fy:.4}"),
    )
}

fn criterion_beta_overhead() -> Outcome {
    // The pair with the smallest |Re K| among seeded candidates, where the
    // variance ratio is closest to its β⁻² leading term.
    let (k, _) = random_phase_points(200, 6)
        .chunks(2)
        .map(|c| {
            let k = quantum_kernel(c[0], c[1], 3, &RegisterPrep::MaximallyMixed).unwrap();
            (k, k.re.abs())
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let plan = ShotPlan::fixed(200, 200).unwrap();
    let variance = |beta: f64, salt: u64| {
        let control = ControlPrep::new(beta).unwrap();
        let xs: Vec<f64> = (0..10_000u64)
            .map(|t| sample_from_kernel(k, control, &plan, salt << 40 | t).unwrap().re)
            .collect();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        xs.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
    };
    let ratio = variance(0.5, 1) / variance(1.0, 2);
    outcome(
        (3.4..=4.6).contains(&ratio),
        format!("Var(beta=0.5)/Var(beta=1) = {ratio:.3} at Re K = {:.4}", k.re),
    )
}

fn criterion_shift_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_r1: f64 = 0.0;
    for _ in 0..100 {
        let mut p = || [rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..2.0 * PI)];
        let (x, y, c) = (p(), p(), p());
        let shift = |v: [f64; 2]| [v[0] + c[0], v[1] + c[1]];
        let a = quantum_kernel(x, y, 1, &RegisterPrep::MaximallyMixed).unwrap();
        let b = quantum_kernel(shift(x), shift(y), 1, &RegisterPrep::MaximallyMixed).unwrap();
        worst_r1 = worst_r1.max((a - b).norm());
    }
    let (x, y, c) = ([0.5, 1.0], [2.0, 0.3], [0.7, 1.1]);
    let a = quantum_kernel(x, y, 3, &RegisterPrep::MaximallyMixed).unwrap();
    let b = quantum_kernel([x[0] + c[0], x[1] + c[1]], [y[0] + c[0], y[1] + c[1]], 3, &RegisterPrep::MaximallyMixed).unwrap();
    let r3 = (a - b).norm();
    outcome(
        worst_r1 <= 1e-10 && r3 > 1e-3,
        format!("r=1 max |K(x+c,x'+c) - K(x,x')| = {worst_r1:.3e} (need <= 1e-10); r=3 pinned violation = {r3:.3e} (need > 1e-3)"),
    )
}

fn criterion_depolarizing() -> Outcome {
    let pts = random_phase_points(40, 8);
    let r = 3;
    let mut worst_k: f64 = 0.0;
    for prep in preps() {
        for p in [0.01, 0.1, 0.3] {
            let noise = NoiseModel::depolarizing(p).unwrap();
            for c in pts.chunks(2) {
                let (a, b) = (FeatureMapSpec::new(&c[0], r).unwrap(), FeatureMapSpec::new(&c[1], r).unwrap());
                let noisy = noisy_offdiagonal(&a, &b, &prep, noise).unwrap();
                let exact = quantum_kernel(c[0], c[1], r, &prep).unwrap();
                worst_k = worst_k.max((noisy - exact * (1.0 - p).powi(2 * r as i32)).norm());
            }
        }
    }
    let cfg = ExperimentConfig::default();
    let rows = fidelity_rows(&cfg, &[0.0, 0.05, 0.1, 0.2, 0.3, 0.5]).unwrap();
    let worst_f = rows.iter().map(|r| (r.measured - r.predicted).abs()).fold(0.0, f64::max);
    let f0 = rows[0].measured;
    outcome(
        worst_k <= 1e-10 && worst_f <= 1e-9 && (f0 - 1.0).abs() <= 1e-12,
        format!("max kernel deviation {worst_k:.3e}; max fidelity deviation {worst_f:.3e}; F(p=0) = {f0}"),
    )
}

/// Accelerated projected-gradient ascent on the dual, projecting onto
/// `{0 ≤ α ≤ C, yᵀα = 0}` by bisection on the multiplier.
fn qp_oracle(g: &GramMatrix, y: &[Label], c: f64) -> f64 {
    let n = y.len();
    let yf: Vec<f64> = y.iter().map(|&l| l as f64).collect();
    let q: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| yf[i] * yf[j] * g.get(i, j)).collect()).collect();
    let lip = q.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let step = 1.0 / lip.max(1e-12);
    let project = |v: &[f64]| -> Vec<f64> {
        let f = |nu: f64| -> f64 { (0..n).map(|i| yf[i] * (v[i] - nu * yf[i]).clamp(0.0, c)).sum() };
        let (mut lo, mut hi) = (-1e6, 1e6);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let nu = 0.5 * (lo + hi);
        (0..n).map(|i| (v[i] - nu * yf[i]).clamp(0.0, c)).collect()
    };
    let mut a = vec![0.0; n];
    let mut z = a.clone();
    let mut t = 1.0f64;
    for _ in 0..30_000 {
        let stepped: Vec<f64> = (0..n)
            .map(|i| z[i] + step * (1.0 - (0..n).map(|j| q[i][j] * z[j]).sum::<f64>()))
            .collect();
        let next = project(&stepped);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        z = (0..n).map(|i| next[i] + (t - 1.0) / t_next * (next[i] - a[i])).collect();
        a = next;
        t = t_next;
    }
    dual_objective(g, y, &a)
}

fn criterion_smo_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for problem in 0..50 {
        let pts: Vec<[f64; 2]> = (0..12)
            .map(|_| [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)])
            .collect();
        let mut y: Vec<Label> = (0..12).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect();
        y[0] = 1;
        y[1] = -1;
        let c = rng.random_range(0.1..10.0);
        let g = if problem % 2 == 0 {
            rbf_gram(&pts, &pts, rng.random_range(0.2..3.0)).unwrap()
        } else {
            // Linear kernel: PSD and rank two, so many ties in the dual.
            let v = pts.iter().flat_map(|a| pts.iter().map(move |b| a[0] * b[0] + a[1] * b[1])).collect();
            GramMatrix::new(12, 12, v, KernelMethod::ClassicalRbf, GramParams::default()).unwrap()
        };
        let model = train_smo(&g, &y, SmoParams::new(c)).unwrap();
        worst = worst.max((model.solver.dual_objective - qp_oracle(&g, &y, c)).abs());
    }
    outcome(worst <= 1e-4, format!("max |W_smo - W_qp| = {worst:.3e} over 50 problems"))
}

fn criterion_rff() -> Outcome {
    let (x, y, gamma) = ([0.3, -0.2], [1.1, 0.4], 0.8);
    let exact = rbf_kernel(&x, &y, gamma).unwrap();
    let reps = 400u64;
    let estimates = |m: usize, salt: u64| -> Vec<f64> {
        (0..reps).map(|s| rff_estimate(&x, &y, gamma, m, salt << 32 | s).unwrap()).collect()
    };
    let est = estimates(100, 1);
    let mean = est.iter().sum::<f64>() / reps as f64;
    let sd = (est.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt();
    let se = sd / (reps as f64).sqrt();
    let unbiased = (mean - exact).abs() <= 3.0 * se;

    let ms = [10usize, 100, 1000, 10_000];
    let pts: Vec<(f64, f64)> = ms
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            let e = estimates(m, 10 + k as u64);
            let rmse = (e.iter().map(|v| (v - exact).powi(2)).sum::<f64>() / reps as f64).sqrt();
            ((m as f64).ln(), rmse.ln())
        })
        .collect();
    let (mx, my) = (
        pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64,
        pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64,
    );
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    outcome(
        unbiased && (slope + 0.5).abs() <= 0.1,
        format!(
            "M=100 mean {mean:.5} vs exact {exact:.5} (|bias| {:.2} SE); RMSE slope {slope:.3}",
            (mean - exact).abs() / se
        ),
    )
}

fn criterion_determinism(first: &TablesOutput) -> Outcome {
    let csv = |t: &TablesOutput| -> Vec<(String, String)> {
        t.files
            .iter()
            .filter(|(k, _)| k.ends_with(".csv"))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    };
    let reference = csv(first);
    let runs = [("8 threads, second run", 8), ("1 thread, first run", 1), ("1 thread, second run", 1)];
    let mut mismatches = Vec::new();
    for (label, threads) in runs {
        if csv(&run_tables(threads)) != reference {
            mismatches.push(label);
        }
    }
    outcome(
        mismatches.is_empty(),
        if mismatches.is_empty() {
            format!("{} CSV files byte-identical across 2 runs at 8 threads and 2 at 1 thread", reference.len())
        } else {
            format!("outputs differ: {}", mismatches.join(", "))
        },
    )
}

fn main() {
    // Skip when the test binary is only listing tests.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let tables = run_tables(8);
    let results: Vec<(&str, Outcome)> = vec![
        ("Table I reproduction (moons)", table_check(&tables, DatasetKind::Moons)),
        ("Table II reproduction (circles)", table_check(&tables, DatasetKind::Circles)),
        ("Ordering: mixed > pure, mixed ~ RBF at highest noise", criterion_ordering(&tables)),
        ("Kernel normalization K(x,x) = 1", criterion_normalization()),
        ("Shot concentration at shots_needed(0.1, 0.05, 1)", criterion_concentration()),
        ("Control polarization overhead beta^-2", criterion_beta_overhead()),
        ("Shift invariance: r=1 invariant, r=3 not", criterion_shift_invariance()),
        ("Depolarizing scaling and fidelity closed form", criterion_depolarizing()),
        ("SMO dual objective vs brute-force QP", criterion_smo_oracle()),
        ("Random Fourier features: bias and RMSE rate", criterion_rff()),
        ("Deterministic table CSVs at 1 and 8 threads", criterion_determinism(&tables)),
    ];
    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {:>2}. {name}: {}", i + 1, o.detail);
        failed += (!o.pass) as usize;
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
