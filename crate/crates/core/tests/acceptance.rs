//! Acceptance criteria 1–10. Each test prints one `PASS`/`FAIL` line (written
//! straight to stdout so it shows without `--nocapture`) and then asserts.

mod common;

use common::{base_extension_oracle, lower_hull, pointed, q, random_rays, Q};
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::io::Write;
use std::process::Command;
use std::time::Instant;
use toricdeg::degeneration::{
    is_simple, lambda_constants, minimal_base_extension, scale_weights, DegenerationSpec,
};
use toricdeg::fan_pl::build_fan;
use toricdeg::Error;
use toricdeg::lattice::LatticeVector;
use toricdeg::model_metrics::{dbar_mu, metric_matrix, phi, Chart, ChartPoint, Convention, MetricMode};
use toricdeg::region::{metric_bound, sample_points};
use toricdeg::scalar::{q_frac, q_int};
use toricdeg::wp_asymptotics::{chart_volume, ks_field, wp_decay, PanelRule};

const ETA: f64 = 10.0;

fn report(n: u32, name: &str, pass: bool, detail: String) {
    let line = format!("criterion {n:>2} [{name}]: {} — {detail}\n", if pass { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    assert!(pass, "criterion {n} failed: {detail}");
}

fn rank_one() -> DegenerationSpec {
    DegenerationSpec::from_i64(&[&[1], &[-1]], &[q_int(0), q_int(1)]).unwrap()
}

fn example_one() -> DegenerationSpec {
    DegenerationSpec::from_i64(&[&[1, 0], &[-1, 0], &[0, 1], &[0, -1]], &[q_int(0), q_int(1), q_int(0), q_int(1)])
        .unwrap()
}

fn example_two() -> DegenerationSpec {
    DegenerationSpec::from_i64(&[&[1, 0], &[-1, 0], &[0, 1], &[1, -1]], &[q_int(0), q_int(1), q_int(0), q_int(1)])
        .unwrap()
}

fn paper_specs() -> Vec<(&'static str, DegenerationSpec)> {
    vec![("rank-1", rank_one()), ("example 1", example_one()), ("example 2", example_two())]
}

fn to_i64(v: &LatticeVector) -> Vec<i64> {
    v.0.iter().map(|x| x.to_i64().unwrap()).collect()
}

fn lattice(rays: &[Vec<i64>]) -> Vec<LatticeVector> {
    rays.iter().map(|r| LatticeVector::from_i64(r)).collect()
}

fn cone_sets(spec_cones: &[toricdeg::fan_pl::Cone]) -> BTreeSet<BTreeSet<Vec<i64>>> {
    spec_cones.iter().map(|c| c.rays().iter().map(to_i64).collect()).collect()
}

/// Log-spaced grid of chart points in `[eta, tau]^n` inside the chart domain
/// with every raw coordinate at least `eta`.
fn grid(chart: &Chart<f64>, tau: f64, per_axis: usize) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (0..per_axis)
        .map(|i| (ETA.ln() + (tau.ln() - ETA.ln()) * (i as f64 + 0.5) / per_axis as f64).exp())
        .collect();
    let mut pts = vec![vec![]];
    for _ in 0..chart.rank {
        pts = pts.into_iter().flat_map(|p: Vec<f64>| axis.iter().map(move |&x| [p.clone(), vec![x]].concat())).collect();
    }
    pts.retain(|a| {
        let raw = chart.raw_unchecked(a, tau);
        raw.iter().all(|&r| r >= ETA) && chart.in_domain(&raw)
    });
    pts
}

#[test]
fn criterion_01_convexification_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut agree, mut total, mut rejected) = (0, 0, 0);
    while total < 200 {
        let n = rng.gen_range(1..=3);
        let rays = random_rays(&mut rng, n);
        let w: Vec<Q> = rays.iter().map(|_| q(rng.gen_range(0..=6))).collect();
        total += 1;
        let oracle: BTreeSet<BTreeSet<Vec<i64>>> = lower_hull(&rays, &w).into_iter().map(|f| f.rays).collect();
        let valid = oracle.iter().all(pointed);
        rejected += !valid as usize;
        let same = match build_fan(&lattice(&rays), &w) {
            Ok(hull) => {
                let kept: BTreeSet<Vec<i64>> = hull.weight.rays.iter().map(to_i64).collect();
                let oracle_rays: BTreeSet<Vec<i64>> = oracle.iter().flatten().cloned().collect();
                valid && cone_sets(hull.fan.maximal()) == oracle && kept == oracle_rays
            }
            Err(Error::NotStrictlyConvex) => !valid,
            Err(_) => false,
        };
        agree += same as usize;
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        1,
        "convexification oracle",
        agree == total && secs < 10.0,
        format!("{agree}/{total} agree ({rejected} with a non-pointed hull facet, rejected by both), {secs:.2} s"),
    );
}

#[test]
fn criterion_02_base_extension() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut good, mut total) = (0, 0);
    while total < 100 {
        let n = rng.gen_range(1..=2);
        let rays = random_rays(&mut rng, n);
        let w: Vec<Q> = rays.iter().map(|_| q_frac(rng.gen_range(0..=12), rng.gen_range(1..=6))).collect();
        let Ok(spec) = DegenerationSpec::new(lattice(&rays), w.clone()) else { continue };
        total += 1;
        let d = base_extension_oracle(&lower_hull(&rays, &w));
        let mut ok = minimal_base_extension(&spec).unwrap() == d;
        for dp in 1..=12u64 {
            ok &= is_simple(&scale_weights(&spec, dp).unwrap()).unwrap() == (dp % d == 0);
        }
        good += ok as usize;
    }
    let mut examples_ok = true;
    for (_, spec) in paper_specs().into_iter().skip(1) {
        let rays: Vec<Vec<i64>> = spec.rays().iter().map(to_i64).collect();
        let d = base_extension_oracle(&lower_hull(&rays, spec.weights()));
        examples_ok &= d == 1 && is_simple(&spec).unwrap() && minimal_base_extension(&spec).unwrap() == 1;
    }
    report(
        2,
        "simplicity / base extension",
        good == total && examples_ok,
        format!("{good}/{total} specs satisfy d | d' <=> simple for d' in 1..=12; examples simple with d = 1: {examples_ok}"),
    );
}

#[test]
fn criterion_03_lambda_soundness() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut details = Vec::new();
    let mut pass = true;
    for (name, spec) in paper_specs().into_iter().take(2) {
        let lc = lambda_constants(&spec).unwrap();
        let l1 = lc.lambda1.to_f64().unwrap();
        let l2 = lc.lambda2.to_f64().unwrap();
        pass &= lc.lambda2 == q_int(1);
        let n = spec.rank();
        let rays: Vec<Vec<f64>> = spec.rays().iter().map(|r| to_i64(r).iter().map(|&x| x as f64).collect()).collect();
        let w: Vec<f64> = spec.weights().iter().map(|x| x.to_f64().unwrap()).collect();
        let maximal: Vec<BTreeSet<usize>> = spec
            .fan()
            .maximal()
            .iter()
            .map(|c| c.rays().iter().map(|r| spec.rays().iter().position(|x| x == r).unwrap()).collect())
            .collect();
        for tau in [1e3, 1e5] {
            let (mut count, mut worst, mut sharp, mut contained) = (0, f64::NEG_INFINITY, 0.0f64, true);
            while count < 1000 {
                // global log moduli x = -log|z|^2; a_m = -log|t^{w_m} z^m|^2
                let x: Vec<f64> = (0..n).map(|_| tau * rng.gen_range(-2.0..2.0)).collect();
                let a: Vec<f64> =
                    rays.iter().zip(&w).map(|(m, wm)| wm * tau + m.iter().zip(&x).map(|(u, v)| u * v).sum::<f64>()).collect();
                if a.iter().any(|&v| v < 0.0) {
                    continue;
                }
                count += 1;
                let top = a.iter().copied().fold(f64::NEG_INFINITY, f64::max) / tau;
                worst = worst.max(top - l2);
                sharp = sharp.max(top);
                let small: BTreeSet<usize> = (0..a.len()).filter(|&m| a[m] <= l1 * tau).collect();
                contained &= maximal.iter().any(|s| small.is_subset(s));
            }
            let ok = worst <= 0.01 && sharp >= l2 - 0.01 && contained;
            pass &= ok;
            details.push(format!(
                "{name} tau={tau:.0e}: lambda2={l2} max(a_m/tau)-lambda2={worst:.2e} sup={sharp:.4} S_x contained={contained} (lambda1={l1})"
            ));
        }
    }
    report(3, "lambda soundness", pass, details.join("; "));
}

#[test]
fn criterion_04_metric_bounds() {
    let mut details = Vec::new();
    let mut pass = true;
    for (name, spec) in paper_specs() {
        let charts = Chart::<f64>::all(&spec).unwrap();
        let per_axis = if spec.rank() == 1 { 1000 } else { 48 };
        for tau in [1e3, 1e5] {
            let (mut pts, mut min_eig, mut slack) = (0, f64::INFINITY, f64::INFINITY);
            for c in &charts {
                let bound = metric_bound(c, tau, ETA);
                for a in grid(c, tau, per_axis) {
                    let s = metric_matrix(c, &ChartPoint::new(c.index, a, tau), MetricMode::Exact, Convention::Unshifted)
                        .unwrap();
                    pts += 1;
                    min_eig = min_eig.min(s.min_eig);
                    slack = slack.min(bound - s.max_eig);
                }
            }
            pass &= pts >= 1000 && min_eig >= 1.0 - 1e-12 && slack >= 0.0;
            details.push(format!("{name} tau={tau:.0e}: {pts} pts min eig {min_eig:.15} bound slack {slack:.3e}"));
        }
        // glued against exact where the origin partition function is 1 on a
        // neighbourhood of the point
        let tau = 1e5;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (mut pts, mut worst) = (0, 0.0f64);
        for c in &charts {
            let o = c.origin_stratum();
            let mu_o = |x: &[f64]| c.partition_from(&c.convert(&c.raw_unchecked(x, tau), Convention::Shifted), tau).unwrap()[o];
            for a in sample_points(c, tau, ETA, 1000, &mut rng) {
                let core = (0..c.rank).all(|j| {
                    [0.99, 1.0, 1.01].iter().all(|f| {
                        let mut b = a.clone();
                        b[j] *= f;
                        mu_o(&b) == 1.0
                    })
                });
                if !core {
                    continue;
                }
                let p = ChartPoint::new(c.index, a, tau);
                let g = metric_matrix(c, &p, MetricMode::Glued, Convention::Shifted).unwrap().g;
                let e = metric_matrix(c, &p, MetricMode::Exact, Convention::Shifted).unwrap().g;
                for j in 0..c.rank {
                    for k in 0..c.rank {
                        worst = worst.max((g[j][k] - e[j][k]).abs());
                    }
                }
                pts += 1;
            }
        }
        pass &= pts >= 100 && worst <= 1e-4;
        details.push(format!("{name} glued-exact: {pts} pts max entry diff {worst:.2e}"));
    }
    report(4, "metric bounds", pass, details.join("; "));
}

#[test]
fn criterion_05_monge_ampere_defect() {
    let taus = [1e3, 1e4, 1e5, 1e6];
    let mut details = Vec::new();
    let mut pass = true;
    for (name, spec) in paper_specs() {
        let charts = Chart::<f64>::all(&spec).unwrap();
        let mut sups = Vec::new();
        for &tau in &taus {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let mut sup = 0.0f64;
            for c in &charts {
                for a in sample_points(c, tau, ETA, 2000, &mut rng) {
                    sup = sup.max(phi(c, &ChartPoint::new(c.index, a, tau), MetricMode::Exact).unwrap().abs());
                }
            }
            sups.push(sup);
        }
        let hi = sups.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = sups.iter().copied().fold(f64::INFINITY, f64::min);
        let var = (hi - lo) / hi;
        pass &= var < 0.05;
        let shown: Vec<String> = sups.iter().map(|s| format!("{s:.4}")).collect();
        details.push(format!("{name}: sup|phi| [{}] variation {:.3}%", shown.join(", "), 100.0 * var));
    }
    report(5, "Monge-Ampere defect", pass, details.join("; "));
}

#[test]
fn criterion_06_volume_constant() {
    let start = Instant::now();
    let tau = 1e6;
    let mut details = Vec::new();
    let mut pass = true;
    for (name, spec) in paper_specs() {
        let n = spec.rank() as i32;
        let target = (1..=n).product::<i32>() as f64 * 2f64.powi(n);
        for c in Chart::<f64>::all(&spec).unwrap() {
            let v = chart_volume(&c, tau, PanelRule::default()).unwrap();
            let scaled = v.value * ETA.powi(n) / target;
            let rel = v.error / v.value;
            pass &= (0.99..=1.01).contains(&scaled) && rel < 1e-4;
            details.push(format!("{name} chart {}: vol*eta^n/(n!2^n)={scaled:.6} rel err {rel:.1e}", c.index));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 60.0;
    report(6, "volume constant", pass, format!("{}; {secs:.1} s", details.join("; ")));
}

#[test]
fn criterion_07_wp_decay() {
    let mut details = Vec::new();
    let mut pass = true;
    for (name, spec) in paper_specs() {
        for chart in 0..spec.fan().maximal().len() {
            let d = wp_decay(&spec, chart, PanelRule::default()).unwrap();
            let e = d.exponent.unwrap_or(f64::NAN);
            let top = d.rows.last().unwrap();
            let within = d
                .rows
                .iter()
                .all(|r| (r.ratio_tau3 - d.c_const).abs() <= d.k_fit * r.tau.ln() / r.tau * (1.0 + 1e-12));
            let rel_top = (top.ratio_tau3 - d.c_const).abs() / d.c_const;
            let ok = (-3.1..=-2.9).contains(&e) && d.k_fit.is_finite() && within && rel_top < 0.01;
            pass &= ok;
            if name == "rank-1" {
                let c_ref = 280.0 / 3.0;
                pass &= (d.c_const - c_ref).abs() <= 0.005 * c_ref && (top.ratio_tau3 - c_ref).abs() <= 0.005 * c_ref;
            }
            details.push(format!(
                "{name} chart {chart}: exponent {e:.4} C {:.4} ratio*tau^3(1e7) {:.4} K {:.1}",
                d.c_const, top.ratio_tau3, d.k_fit
            ));
        }
    }
    report(7, "Weil-Petersson decay", pass, details.join("; "));
}

#[test]
fn criterion_08_ks_residual() {
    let product = DegenerationSpec::from_i64(
        &[&[1, 0, 0], &[-1, 0, 0], &[0, 1, 0], &[0, -1, 0], &[0, 0, 1], &[0, 0, -1]],
        &[q_int(0), q_int(1), q_int(0), q_int(1), q_int(0), q_int(1)],
    )
    .unwrap();
    let half = DegenerationSpec::from_i64(&[&[1, 0], &[1, 2], &[-1, 0], &[0, -1]], &[q_int(0), q_int(1), q_int(1), q_int(1)])
        .unwrap();
    let mut specs = paper_specs();
    specs.push(("rank-3 product", product));
    specs.push(("half weights", half));
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut worst, mut pts) = (0.0f64, 0);
    let mut closed = 0.0f64;
    for (name, spec) in &specs {
        for c in Chart::<f64>::all(spec).unwrap() {
            for tau in [1e3, 1e5, 1e7] {
                for a in sample_points(&c, tau, ETA, 200, &mut rng) {
                    let p = ChartPoint::new(c.index, a, tau);
                    let f = ks_field(&c, &p).unwrap();
                    worst = worst.max(f.residual);
                    pts += 1;
                    if *name == "rank-1" {
                        let raw = c.raw(&p).unwrap();
                        let (ab, ao) = (raw[c.basis[0]], raw[1 - c.basis[0]]);
                        let expect = ab * ab / (ab * ab + ao * ao);
                        closed = closed.max((f.q[0] - expect).abs() / (expect.abs() * f64::EPSILON));
                    }
                }
            }
        }
    }
    report(
        8,
        "Kodaira-Spencer residual",
        worst <= 1e-10 && closed <= 4.0 && pts > 0,
        format!("{pts} samples, max residual {worst:.2e}, rank-1 closed form within {closed:.1} ulp"),
    );
}

/// Hard-minimum core of stratum `s`: every partition argument at least
/// `log(tau / eta^2)`.
fn in_core(c: &Chart<f64>, shifted: &[f64], tau: f64, s: usize) -> bool {
    let st = &c.strata[s];
    let scale = (tau / (ETA * ETA)).ln();
    st.star.iter().all(|&m| (shifted[m] / ETA).ln() >= scale)
        && st.own.iter().all(|&m| (tau / (shifted[m] * ETA)).ln() >= scale)
}

#[test]
fn criterion_09_partition_of_unity() {
    let mut details = Vec::new();
    let mut pass = true;
    for (name, spec) in paper_specs() {
        let charts = Chart::<f64>::all(&spec).unwrap();
        let ns = charts[0].strata.len();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for tau in [1e4f64, 1e7] {
            let mut core = vec![0usize; ns];
            let (mut violations, mut dev, mut draws) = (0usize, 0.0f64, 0usize);
            while core.iter().any(|&k| k < 1000) && draws < 2_000_000 {
                draws += 1;
                let c = &charts[draws % charts.len()];
                let a: Vec<f64> = (0..c.rank).map(|_| rng.gen_range((1e-2f64).ln()..tau.ln()).exp()).collect();
                let raw = c.raw_unchecked(&a, tau);
                if !raw.iter().all(|&r| r > 0.0) || !c.in_domain(&raw) {
                    continue;
                }
                let sh = c.convert(&raw, Convention::Shifted);
                let mu = c.partition_from(&sh, tau).unwrap();
                dev = dev.max((mu.iter().sum::<f64>() - 1.0).abs());
                for p in 0..ns {
                    if !in_core(c, &sh, tau, p) {
                        continue;
                    }
                    core[p] += 1;
                    // mu_q must vanish unless q is a face of p
                    for q in 0..ns {
                        let face = c.strata[q].own.iter().all(|m| c.strata[p].own.contains(m));
                        if !face && mu[q] != 0.0 {
                            violations += 1;
                        }
                    }
                }
            }
            let min_core = core.iter().copied().min().unwrap();
            pass &= dev <= 1e-12 && violations == 0 && min_core >= 1000;
            details.push(format!(
                "{name} tau={tau:.0e}: |sum mu - 1| <= {dev:.1e}, {violations} support violations, >= {min_core} core samples per stratum"
            ));
        }
        // sup |dbar mu_p| log tau over the grid
        let taus = [1e4f64, 1e5, 1e6, 1e7];
        let mut sups = Vec::new();
        for &tau in &taus {
            let mut rng = ChaCha8Rng::seed_from_u64(90);
            let mut sup = 0.0f64;
            for c in &charts {
                for a in sample_points(c, tau, ETA, 300, &mut rng) {
                    let v = dbar_mu(c, &ChartPoint::new(c.index, a, tau)).unwrap();
                    sup = sup.max(v.into_iter().fold(0.0, f64::max) * tau.ln());
                }
            }
            sups.push(sup);
        }
        let xs: Vec<f64> = taus.iter().map(|t| t.ln()).collect();
        let ys: Vec<f64> = sups.iter().map(|s| s.ln()).collect();
        let (mx, my) = (xs.iter().sum::<f64>() / 4.0, ys.iter().sum::<f64>() / 4.0);
        let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
            / xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>();
        pass &= slope <= 0.0 && sups.iter().all(|s| s.is_finite());
        let shown: Vec<String> = sups.iter().map(|s| format!("{s:.3}")).collect();
        details.push(format!("{name}: sup|dbar mu| log tau [{}] fitted slope {slope:.3}", shown.join(", ")));
    }
    report(9, "partition of unity", pass, details.join("; "));
}

fn run_all(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let specs = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs");
    let jobs: &[(&str, &str, &[&str])] = &[
        ("rank1.json", "check", &[]),
        ("nonconvex_cone.json", "reduce", &[]),
        ("example2.json", "strata", &[]),
        ("example1.json", "lambda", &[]),
        ("example1.json", "metric-sample", &["--format", "csv"]),
        ("example2.json", "metric-sample", &["--mode", "glued"]),
        ("example1.json", "volume", &[]),
        ("rank1.json", "wp-decay", &["--panels", "2", "--mode", "glued"]),
        ("atlas_pair.json", "atlas-validate", &[]),
    ];
    for (spec, cmd, extra) in jobs {
        let status = Command::new(env!("CARGO_BIN_EXE_toricdeg"))
            .arg("--spec")
            .arg(specs.join(spec))
            .arg("--out")
            .arg(dir)
            .args(["--seed", "7"])
            .args(*extra)
            .arg(cmd)
            .output()
            .unwrap();
        assert!(status.status.code().is_some(), "{cmd} terminated by signal");
    }
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn criterion_10_determinism() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = run_all(a.path());
    let second = run_all(b.path());
    let same = first == second && !first.is_empty() && first.iter().all(|(_, bytes)| !bytes.is_empty());
    report(10, "determinism", same, format!("{} report files byte-identical across two runs: {same}", first.len()));
}
