//! Acceptance suite: one PASS/FAIL line per criterion.

use mpctrack_cli::{run_experiment, write_outputs, ExperimentConfig, Mode};
use mpctrack_core::association::{exhaustive_da_oracle, loopy_da, AssociationMarginals, AssociationWeights};
use mpctrack_core::eval::{assignment, ospa, ospa_angle};
use mpctrack_core::model::{
    birth_log_evidence, crlb_amp_scale_numeric, detection_prob, fa_density, lik_amplitude, ln_detected_lik,
    ln_fa_density, miss_prob, angle_diff,
};
use mpctrack_core::special::integrate;
use mpctrack_core::synth::{
    paper_scenario, snapshot_estimate, synth_radio, EstimatorConfig, RadioComponent, Scenario, ScenarioVariant,
};
use mpctrack_core::tracker::{init, update};
use mpctrack_core::{
    ArrayGeometry, FarBelief, HyperParams, KinematicState, LikelihoodMode, Measurement, PmpcBelief,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn c1_normalization() -> Outcome {
    let t = Instant::now();
    let g = ArrayGeometry::default();
    let p = HyperParams::default();
    let thr = p.u_de.sqrt();
    let mut worst: f64 = 0.0;
    for mode in [LikelihoodMode::Exact, LikelihoodMode::Gauss] {
        for u in [0.0, 1.0, 5.0, 20.0] {
            let f = |z: f64| lik_amplitude(z, u, p.u_de, g.n_eff(), mode);
            let mass = integrate(f, thr, thr + u + 60.0, 1e-12);
            worst = worst.max((mass - 1.0).abs());
        }
    }
    // clutter: uniform in distance and angle, truncated Rayleigh in amplitude
    let area = 2.0 * std::f64::consts::PI * p.d_max;
    let fa = |z: f64| area * fa_density(&Measurement::new(1.0, 0.0, z), p.u_de, p.d_max);
    let mass = integrate(fa, thr, thr + 60.0, 1e-12);
    worst = worst.max((mass - 1.0).abs());
    let secs = t.elapsed().as_secs_f64();
    outcome(worst < 1e-6 && secs < 1.0, format!("max |mass - 1| = {worst:.2e}, {secs:.3} s"))
}

fn c2_detection_anchor() -> Outcome {
    let g = ArrayGeometry::default();
    let u_de = 4.14;
    let pd0 = detection_prob(0.0, u_de, g.n_eff(), LikelihoodMode::Exact);
    let anchor = (pd0 - (-u_de).exp()).abs();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut us: Vec<f64> = (0..1000).map(|_| rng.random_range(0.0..30.0)).collect();
    us.sort_by(f64::total_cmp);
    let mut monotone = true;
    for mode in [LikelihoodMode::Exact, LikelihoodMode::Gauss] {
        let pd: Vec<f64> = us.iter().map(|&u| detection_prob(u, u_de, g.n_eff(), mode)).collect();
        monotone &= pd.windows(2).all(|w| w[1] >= w[0]);
    }
    outcome(
        anchor < 1e-9 && monotone,
        format!("|p_d(0) - e^-u_de| = {anchor:.2e}, monotone = {monotone}"),
    )
}

fn c3_crlb() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let alpha = Complex64::from_polar(rng.random_range(0.05..5.0), rng.random_range(-3.0..3.0));
        let s_norm_sq = rng.random_range(1.0..500.0);
        let sigma_sq = rng.random_range(0.1..10.0);
        let n_eff = rng.random_range(10.0..5000.0);
        let u_sq = alpha.norm_sqr() * s_norm_sq / sigma_sq;
        let want = 0.5 + u_sq / (4.0 * n_eff);
        let got = crlb_amp_scale_numeric(alpha, s_norm_sq, sigma_sq, n_eff).expect("regular FIM");
        worst = worst.max((got - want).abs() / want);
    }
    let alpha = Complex64::new(2.0, 1.0);
    let small = crlb_amp_scale_numeric(alpha, 100.0, 1.0, 100.0).unwrap() - 0.5;
    let large = crlb_amp_scale_numeric(alpha, 100.0, 1.0, 1e12).unwrap() - 0.5;
    let vanishing = small > 1.0 && large.abs() < 1e-8;
    outcome(
        worst < 1e-9 && vanishing,
        format!("max rel err = {worst:.2e}, noise term {small:.3} -> {large:.1e}"),
    )
}

fn random_weights(k: usize, m: usize, rng: &mut ChaCha8Rng) -> AssociationWeights {
    let mut draw = || 10f64.powf(rng.random_range(-1.5..1.5));
    let beta: Vec<Vec<f64>> = (0..k).map(|_| (0..=m).map(|_| draw()).collect()).collect();
    let xi0: Vec<f64> = (0..m).map(|_| draw()).collect();
    AssociationWeights::new(beta, xi0)
}

fn tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

fn max_tv(a: &AssociationMarginals, b: &AssociationMarginals) -> f64 {
    let rows_a = a.p_a.iter().zip(&b.p_a).map(|(x, y)| tv(x, y));
    let rows_b = a.p_b.iter().zip(&b.p_b).map(|(x, y)| tv(x, y));
    rows_a.chain(rows_b).fold(0.0, f64::max)
}

fn c4_da_oracle() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut loopy_worst, mut tree_worst): (f64, f64) = (0.0, 0.0);
    let mut n_tree = 0;
    for _ in 0..200 {
        let k = rng.random_range(1..=3);
        let m = rng.random_range(1..=3);
        let w = random_weights(k, m, &mut rng);
        let bp = loopy_da(&w, 5000, 1e-12);
        let exact = exhaustive_da_oracle(&w).expect("small instance");
        let d = max_tv(&bp, &exact);
        if k == 1 || m == 1 {
            n_tree += 1;
            tree_worst = tree_worst.max(d);
        } else {
            loopy_worst = loopy_worst.max(d);
        }
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        loopy_worst <= 0.02 && tree_worst < 1e-9 && secs < 10.0,
        format!("loopy max TV = {loopy_worst:.4}, tree max TV = {tree_worst:.1e} ({n_tree} trees), {secs:.2} s"),
    )
}

fn c5_single_bernoulli() -> Outcome {
    const J: usize = 100;
    let p = HyperParams {
        j: J,
        ..Default::default()
    };
    let g = ArrayGeometry::default();
    let mut worst: f64 = 0.0;
    let cases = [
        (KinematicState::new(5.0, 0.3, 6.0, 0.0, 0.0), Some(Measurement::new(5.01, 0.31, 6.2)), 0.5, 1.5),
        (KinematicState::new(5.0, 0.3, 6.0, 0.0, 0.0), Some(Measurement::new(7.0, -1.0, 2.5)), 0.9, 2.0),
        (KinematicState::new(3.0, -2.0, 2.5, 0.0, 0.0), Some(Measurement::new(3.05, -2.1, 2.3)), 0.2, 0.7),
        (KinematicState::new(3.0, -2.0, 2.5, 0.0, 0.0), None, 0.6, 1.0),
        (KinematicState::new(9.0, 1.0, 20.0, 0.0, 0.0), None, 0.99, 1.0),
    ];
    for (x, z, q, mu) in cases {
        let mut s = init(&p, 1).unwrap();
        s.legacy = vec![PmpcBelief::uniform(0, 0, vec![x; J], q)];
        s.next_id = 1;
        s.far = Some(FarBelief {
            particles: vec![mu; J],
            weights: vec![1.0 / J as f64; J],
        });
        let zs: Vec<Measurement> = z.into_iter().collect();
        update(&mut s, &zs, &p, &g).unwrap();
        let ex = |id: u64| s.legacy.iter().find(|b| b.id == id).map_or(0.0, |b| b.p_exist);
        let pm = miss_prob(x.u, p.u_de, g.n_eff(), p.likelihood_mode);
        match z {
            None => {
                let want = q * pm / (q * pm + 1.0 - q);
                worst = worst.max((ex(0) - want).abs());
            }
            Some(z) => {
                let l = (ln_detected_lik(&z, &x, &p, &g) - ln_fa_density(&z, p.u_de, p.d_max)).exp();
                let c = p.mu_n * birth_log_evidence(&z, &p, &g).exp();
                let other = 1.0 + c / mu;
                let den = q * l / mu + (q * pm + 1.0 - q) * other;
                worst = worst.max((ex(0) - (q * l / mu + q * pm * other) / den).abs());
                worst = worst.max((ex(1) - (c / mu) * (q * pm + 1.0 - q) / den).abs());
            }
        }
    }
    outcome(worst < 1e-6, format!("max existence error = {worst:.2e}"))
}

fn desk_config(variant: ScenarioVariant, out: &Path) -> (ExperimentConfig, Scenario) {
    let scn = paper_scenario(variant);
    let mut cfg = ExperimentConfig::default();
    cfg.scenario = variant.name().into();
    cfg.hyper.j = 1000;
    cfg.hyper.u_de = scn.u_de;
    cfg.runs = 20;
    cfg.out_dir = out.to_path_buf();
    (cfg, scn)
}

fn c6_desk(out: &Path) -> Outcome {
    let (cfg, scn) = desk_config(ScenarioVariant::Desk, out);
    let t = Instant::now();
    let res = run_experiment(&cfg, &scn).and_then(|o| write_outputs(&cfg, &o).map(|_| o));
    let secs = t.elapsed().as_secs_f64();
    let o = match res {
        Ok(o) => o,
        Err(e) => return outcome(false, format!("run failed: {e}")),
    };
    let steady: Vec<_> = o.summary.per_step.iter().filter(|r| r.step >= 20).collect();
    let d = steady.iter().map(|r| r.ospa_d_m).fold(0.0, f64::max);
    let phi = steady.iter().map(|r| r.ospa_phi_deg).fold(0.0, f64::max);
    let nom = steady.iter().map(|r| (r.nom_hat - r.nom_true).abs()).fold(0.0, f64::max);
    let far = o
        .summary
        .per_step
        .iter()
        .filter(|r| r.step > 30)
        .map(|r| (r.mu_fa_hat - r.mu_fa_true).abs())
        .fold(0.0, f64::max);
    let pass = d < 0.02 && phi < 2.0 && nom <= 0.3 && far <= 0.5 && secs < 300.0;
    outcome(
        pass,
        format!(
            "max MOSPA d = {:.2} cm, phi = {phi:.2} deg, max |NOM err| = {nom:.3}, max |FAR err| = {far:.3}, {secs:.0} s",
            d * 100.0
        ),
    )
}

fn c7_fast_far(out: &Path) -> Outcome {
    let (mut cfg, scn) = desk_config(ScenarioVariant::DeskFastFar, out);
    cfg.hyper.sigma_fa = 0.5;
    let o = match run_experiment(&cfg, &scn) {
        Ok(o) => o,
        Err(e) => return outcome(false, format!("run failed: {e}")),
    };
    // steps at least 10 after the start or the latest change of the profile
    let mut last_change = 0;
    let mut far: f64 = 0.0;
    for (n, r) in o.summary.per_step.iter().enumerate() {
        if n > 0 && scn.far_profile[n] != scn.far_profile[n - 1] {
            last_change = n;
        }
        if n >= last_change + 10 {
            far = far.max((r.mu_fa_hat - r.mu_fa_true).abs());
        }
    }
    let mut k_excess = i64::MIN;
    let mut k_max = 0;
    for run in &o.runs {
        for (n, &k) in run.track_counts.iter().enumerate() {
            k_max = k_max.max(k);
            k_excess = k_excess.max(k as i64 - (3 * scn.nom(n) + 5) as i64);
        }
    }
    outcome(
        far <= 0.8 && k_excess < 0,
        format!("max |FAR err| after settling = {far:.3}, max K = {k_max} (bound 3 NOM + 5 exceeded by {k_excess})"),
    )
}

fn c8_ospa() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut axioms = true;
    let set = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let n = rng.random_range(0..5);
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    };
    for _ in 0..500 {
        let (x, y, z) = (set(&mut rng), set(&mut rng), set(&mut rng));
        for f in [ospa, ospa_angle] {
            let (c, p) = (0.5, 2.0);
            let dxy = f(&x, &y, p, c);
            axioms &= f(&x, &x, p, c).abs() < 1e-9;
            axioms &= (dxy - f(&y, &x, p, c)).abs() < 1e-9;
            axioms &= dxy <= f(&x, &z, p, c) + f(&z, &y, p, c) + 1e-9;
            axioms &= (0.0..=c + 1e-9).contains(&dxy);
        }
    }
    fn brute(cost: &[Vec<f64>], row: usize, used: &mut Vec<bool>) -> f64 {
        if row == cost.len() {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                best = best.min(cost[row][j] + brute(cost, row + 1, used));
                used[j] = false;
            }
        }
        best
    }
    let mut optimal = true;
    for _ in 0..300 {
        let n = rng.random_range(1..=6);
        let m = rng.random_range(n..=6);
        let cost: Vec<Vec<f64>> = (0..n).map(|_| (0..m).map(|_| rng.random_range(0.0..1.0)).collect()).collect();
        let a = assignment(&cost);
        let got: f64 = a.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
        optimal &= (got - brute(&cost, 0, &mut vec![false; m])).abs() < 1e-9;
    }
    outcome(axioms && optimal, format!("axioms = {axioms}, assignment optimal = {optimal}"))
}

fn c9_radio(out: &Path) -> Outcome {
    let g = ArrayGeometry::default();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut d_err, mut phi_err): (f64, f64) = (0.0, 0.0);
    for _ in 0..10 {
        let d = rng.random_range(1.0..15.0);
        let phi = rng.random_range(-3.1..3.1);
        let c = RadioComponent {
            state: KinematicState::new(d, phi, 40.0, 0.0, 0.0),
            phase: rng.random_range(-3.0..3.0),
        };
        let snap = synth_radio(&[c], &g, 0.0, &mut rng);
        let est = snapshot_estimate(&snap, None, &g, 15.04, &EstimatorConfig::default());
        match est.iter().max_by(|a, b| a.z_u.total_cmp(&b.z_u)) {
            Some(z) => {
                d_err = d_err.max((z.z_d - d).abs());
                phi_err = phi_err.max(angle_diff(z.z_phi, phi).abs().to_degrees());
            }
            None => d_err = f64::INFINITY,
        }
    }
    let single = d_err < g.c * g.t_s / 20.0 && phi_err < 1.0;

    let scn = paper_scenario(ScenarioVariant::RadioDesk);
    let mut cfg = ExperimentConfig::default();
    cfg.mode = Mode::RadioPipeline;
    cfg.scenario = scn.name.clone();
    cfg.hyper.j = 1000;
    cfg.hyper.u_de = scn.u_de;
    cfg.runs = 5;
    cfg.out_dir = out.to_path_buf();
    let nom = match run_experiment(&cfg, &scn) {
        Ok(o) => (o.summary.overall.nom_hat - o.summary.overall.nom_true).abs(),
        Err(e) => return outcome(false, format!("pipeline failed: {e}")),
    };
    outcome(
        single && nom <= 0.5,
        format!(
            "noiseless max err d = {:.2} mm, phi = {phi_err:.3} deg; pipeline mean |NOM err| = {nom:.3}",
            d_err * 1e3
        ),
    )
}

fn c10_determinism(out: &Path) -> Outcome {
    // rerun the identical config into the same directory, keeping the first outputs aside
    let first = out.with_extension("first");
    if let Err(e) = std::fs::rename(out, &first) {
        return outcome(false, format!("first run outputs missing: {e}"));
    }
    let (cfg, scn) = desk_config(ScenarioVariant::Desk, out);
    if let Err(e) = run_experiment(&cfg, &scn).and_then(|o| write_outputs(&cfg, &o)) {
        return outcome(false, format!("rerun failed: {e}"));
    }
    let mut names: Vec<_> = std::fs::read_dir(&first)
        .map(|d| d.filter_map(|e| e.ok()).map(|e| e.file_name()).collect())
        .unwrap_or_default();
    names.sort();
    let same = !names.is_empty()
        && names.iter().all(|n| {
            let a = std::fs::read(first.join(n));
            let b = std::fs::read(out.join(n));
            matches!((a, b), (Ok(a), Ok(b)) if a == b)
        });
    outcome(same, format!("{} files compared, identical = {same}", names.len()))
}

fn report(n: usize, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let o = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        outcome(false, format!("panicked: {msg}"))
    });
    println!(
        "criterion {n:>2} {:<28} {}  {}",
        name,
        if o.pass { "PASS" } else { "FAIL" },
        o.detail
    );
    o.pass
}

fn main() {
    let tmp = tempfile::tempdir().expect("temp dir");
    let desk = tmp.path().join("desk");
    let mut ok = true;
    ok &= report(1, "likelihood normalization", c1_normalization);
    ok &= report(2, "detection anchor", c2_detection_anchor);
    ok &= report(3, "amplitude CRLB identity", c3_crlb);
    ok &= report(4, "DA oracle equivalence", c4_da_oracle);
    ok &= report(5, "single-Bernoulli oracle", c5_single_bernoulli);
    ok &= report(6, "desk experiment", || c6_desk(&desk));
    ok &= report(7, "fast FAR variant", || c7_fast_far(&tmp.path().join("fast")));
    ok &= report(8, "OSPA metric", c8_ospa);
    ok &= report(9, "radio pipeline", || c9_radio(&tmp.path().join("radio")));
    ok &= report(10, "determinism", || c10_determinism(&desk));
    if !ok {
        std::process::exit(1);
    }
}
