use super::spec_file::{format_rational, SpecFile};
use super::{Command, Report, Settings};
use crate::degeneration::{
    divisor_multiplicity, is_simple, lambda_constants, minimal_base_extension, strata, toroidal_min_extension,
    validate_atlas, DegenerationSpec,
};
use crate::error::{Error, Result};
use crate::fan_pl::{build_fan, is_simplicial, is_strictly_convex, DropReason};
use crate::model_metrics::{metric_matrix, Chart, ChartPoint, Convention, MetricMode};
use crate::region::{metric_bound, sample_points};
use crate::wp_asymptotics::{chart_volume, glued_field_check, wp_decay};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

/// Points per chart and tau for `metric-sample`.
pub const METRIC_SAMPLES: usize = 32;
/// Exponent window accepted by `wp-decay`.
pub const EXPONENT_WINDOW: (f64, f64) = (-3.1, -2.9);

pub fn dispatch(cmd: Command, spec: &SpecFile, s: &Settings) -> Result<Report> {
    match cmd {
        Command::Check => check(spec),
        Command::Reduce => reduce(spec),
        Command::Strata => strata_report(spec),
        Command::Lambda => lambda(spec),
        Command::MetricSample => metric_sample(spec, s),
        Command::Volume => volume(spec, s),
        Command::WpDecay => wp(spec, s),
        Command::AtlasValidate => atlas(spec),
    }
}

fn kv(rows: &[(&str, String)]) -> (Vec<String>, Vec<Vec<String>>) {
    (vec!["key".into(), "value".into()], rows.iter().map(|(k, v)| vec![k.to_string(), v.clone()]).collect())
}

fn reason(r: DropReason) -> &'static str {
    match r {
        DropReason::AboveHull => "above-hull",
        DropReason::NonExtremal => "non-extremal",
    }
}

fn check(f: &SpecFile) -> Result<Report> {
    let hull = build_fan(&f.lattice_rays(), &f.rational_weights())?;
    let complete = hull.fan.is_complete();
    let simplicial = is_simplicial(&hull.fan);
    let strictly = is_strictly_convex(&hull.fan, &hull.weight);
    let dropped: Vec<Value> = hull
        .dropped
        .iter()
        .map(|(r, w, why)| json!({"ray": r, "weight": format_rational(w), "reason": reason(*why)}))
        .collect();
    let mut body = json!({
        "rank": f.rank,
        "rays_in": f.rays.len(),
        "rays_kept": hull.weight.rays.len(),
        "convex": hull.convex,
        "dropped": dropped,
        "complete": complete,
        "simplicial": simplicial,
        "strictly_convex": strictly,
    });
    let mut rows = vec![
        ("convex", hull.convex.to_string()),
        ("complete", complete.to_string()),
        ("simplicial", simplicial.to_string()),
        ("strictly_convex", strictly.to_string()),
    ];
    let mut passed = hull.convex;
    let mut message = (!hull.convex).then(|| "weights are not convex; run `reduce` first".to_string());
    match f.degeneration() {
        Ok(spec) => {
            let simple = is_simple(&spec)?;
            let d = minimal_base_extension(&spec)?;
            let mult: Vec<Value> = spec
                .fan()
                .maximal()
                .iter()
                .map(|c| Ok(json!({"cone": c.rays(), "multiplicity": divisor_multiplicity(&spec, c)?.to_string()})))
                .collect::<Result<_>>()?;
            body["simple"] = json!(simple);
            body["min_base_extension"] = json!(d);
            body["multiplicities"] = Value::Array(mult);
            rows.push(("simple", simple.to_string()));
            rows.push(("min_base_extension", d.to_string()));
        }
        Err(e) => {
            passed = false;
            body["error"] = json!(e.to_string());
            rows.push(("error", e.to_string()));
            message = Some(e.to_string());
        }
    }
    let (header, rows) = kv(&rows);
    Ok(Report { header, rows, body, passed, message, ..Default::default() })
}

fn reduce(f: &SpecFile) -> Result<Report> {
    let rays = f.lattice_rays();
    let ws = f.rational_weights();
    let hull = build_fan(&rays, &ws)?;
    let (kept_r, kept_w): (Vec<_>, Vec<_>) = rays
        .iter()
        .zip(&ws)
        .filter(|(r, _)| hull.weight.rays.contains(r))
        .map(|(r, w)| (r.clone(), w.clone()))
        .unzip();
    let out = f.with_rays(&kept_r, &kept_w);
    let text = out.to_text();
    let body = json!({
        "rays_in": rays.len(),
        "rays_out": kept_r.len(),
        "dropped": hull.dropped.iter().map(|(r, w, why)| json!({"ray": r, "weight": format_rational(w), "reason": reason(*why)})).collect::<Vec<_>>(),
        "spec": serde_json::to_value(&out).expect("serializable"),
    });
    let header = vec!["ray".into(), "weight".into(), "kept".into()];
    let rows = rays
        .iter()
        .zip(&ws)
        .map(|(r, w)| vec![r.to_string(), format_rational(w), hull.weight.rays.contains(r).to_string()])
        .collect();
    Ok(Report { header, rows, body, files: vec![("reduced.json".into(), text)], passed: true, message: None })
}

fn strata_report(f: &SpecFile) -> Result<Report> {
    let poset = strata(&f.degeneration()?)?;
    let header = ["id", "dim", "rays", "multiplicity"].map(String::from).to_vec();
    let rows = poset
        .nodes
        .iter()
        .map(|n| {
            let rays: Vec<String> = n.rays.iter().map(|r| r.to_string()).collect();
            vec![n.id.to_string(), n.dim.to_string(), rays.join(" "), n.multiplicity.map_or(String::new(), |m| m.to_string())]
        })
        .collect();
    let body = serde_json::to_value(&poset).expect("serializable");
    Ok(Report { header, rows, body, passed: true, ..Default::default() })
}

fn lambda(f: &SpecFile) -> Result<Report> {
    let l = lambda_constants(&f.degeneration()?)?;
    let body = serde_json::to_value(&l).expect("serializable");
    let (header, rows) = kv(&[
        ("lambda1", format_rational(&l.lambda1)),
        ("lambda2", format_rational(&l.lambda2)),
        ("lambda_star", format_rational(&l.lambda_star)),
        ("binding_set", l.binding_set.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(" ")),
    ]);
    Ok(Report { header, rows, body, passed: true, ..Default::default() })
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn metric_sample(f: &SpecFile, s: &Settings) -> Result<Report> {
    let spec = f.degeneration()?;
    let charts = Chart::<f64>::all(&spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let n = spec.rank();
    let mut header: Vec<String> = vec!["chart".into(), "tau".into()];
    header.extend((1..=n).map(|j| format!("a{j}")));
    header.extend(["min_eig", "max_eig", "det", "volume_density", "phi", "bound"].map(String::from));
    let conv = match s.mode {
        MetricMode::Exact => Convention::Unshifted,
        MetricMode::Glued => Convention::Shifted,
    };
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut bound_violations = 0usize;
    for &tau in &spec.tau_grid {
        if !(tau > spec.eta * spec.eta) {
            continue;
        }
        for c in &charts {
            let bound = metric_bound(c, tau, c.eta);
            for a in sample_points(c, tau, c.eta, METRIC_SAMPLES, &mut rng) {
                let p = ChartPoint::new(c.index, a.clone(), tau);
                match metric_matrix(c, &p, s.mode, conv) {
                    Ok(m) => {
                        if s.mode == MetricMode::Exact && m.max_eig > bound * (1.0 + 1e-12) {
                            bound_violations += 1;
                        }
                        let mut row = vec![c.index.to_string(), num(tau)];
                        row.extend(a.iter().map(|x| num(*x)));
                        row.extend([m.min_eig, m.max_eig, m.det, m.volume_density, m.phi, bound].map(num));
                        rows.push(row);
                    }
                    Err(e @ Error::PositivityFailure(_)) => failures.push(e.to_string()),
                    Err(e) => return Err(e),
                }
            }
        }
    }
    let passed = failures.is_empty() && bound_violations == 0;
    let body = json!({
        "mode": format!("{:?}", s.mode).to_lowercase(),
        "samples": rows.len(),
        "positivity_failures": failures,
        "bound_violations": bound_violations,
        "header": header,
        "rows": rows,
    });
    Ok(Report { header, rows, body, passed, ..Default::default() })
}

fn volume(f: &SpecFile, s: &Settings) -> Result<Report> {
    let spec = f.degeneration()?;
    let n = spec.rank();
    let target = (1..=n).map(|k| (2 * k) as f64).product::<f64>();
    let header = ["chart", "tau", "volume", "quad_error", "volume_eta_n", "target", "rel_dev"].map(String::from).to_vec();
    let mut rows = Vec::new();
    let mut recs = Vec::new();
    for c in Chart::<f64>::all(&spec)? {
        for &tau in &spec.tau_grid {
            let v = chart_volume(&c, tau, s.rule)?;
            let scaled = v.value * spec.eta.powi(n as i32);
            let dev = scaled / target - 1.0;
            rows.push(vec![c.index.to_string(), num(tau), num(v.value), num(v.error), num(scaled), num(target), num(dev)]);
            recs.push(json!({"chart": c.index, "tau": tau, "volume": v.value, "quad_error": v.error, "volume_eta_n": scaled, "rel_dev": dev}));
        }
    }
    let body = json!({"eta": spec.eta, "target": target, "rows": recs});
    Ok(Report { header, rows, body, passed: true, ..Default::default() })
}

fn wp(f: &SpecFile, s: &Settings) -> Result<Report> {
    let spec: DegenerationSpec = f.degeneration()?;
    let header = ["chart", "eta", "tau", "volume", "wp_ratio", "ratio_tau3", "c_fit", "exponent", "quad_error"]
        .map(String::from)
        .to_vec();
    let mut rows = Vec::new();
    let mut charts = Vec::new();
    let mut passed = true;
    for i in 0..spec.fan().maximal().len() {
        let d = wp_decay(&spec, i, s.rule)?;
        let e = d.exponent.unwrap_or(f64::NAN);
        if !(e >= EXPONENT_WINDOW.0 && e <= EXPONENT_WINDOW.1) {
            passed = false;
        }
        for r in &d.rows {
            rows.push(vec![
                i.to_string(),
                num(d.eta),
                num(r.tau),
                num(r.volume),
                num(r.ratio),
                num(r.ratio_tau3),
                num(d.c_const),
                num(e),
                num(r.quad_error),
            ]);
        }
        charts.push(serde_json::to_value(&d).expect("serializable"));
    }
    let mut body = json!({"panels_per_decade": s.rule.per_decade, "charts": charts});
    if s.mode == MetricMode::Glued {
        let taus: Vec<f64> = spec.tau_grid.iter().copied().filter(|t| *t >= 10.0 * spec.eta * spec.eta).collect();
        let g = glued_field_check(&spec, &taus, s.rule, METRIC_SAMPLES, s.seed)?;
        body["glued"] = serde_json::to_value(&g).expect("serializable");
    }
    let message = (!passed).then(|| format!("decay exponent outside [{}, {}]", EXPONENT_WINDOW.0, EXPONENT_WINDOW.1));
    Ok(Report { header, rows, body, passed, message, ..Default::default() })
}

fn atlas(f: &SpecFile) -> Result<Report> {
    let a = f
        .toroidal_atlas()?
        .ok_or_else(|| Error::Parse { line: 1, msg: "spec has no atlas block".into() })?;
    let r = validate_atlas(&a)?;
    let mut body = serde_json::to_value(&r).expect("serializable");
    let mut kvs = vec![
        ("valid", r.valid.to_string()),
        ("charts", r.charts.to_string()),
        ("incidences", r.incidences.to_string()),
        ("chains_checked", r.chains_checked.to_string()),
    ];
    if r.valid {
        let d = toroidal_min_extension(&a)?;
        body["min_base_extension"] = json!(d);
        kvs.push(("min_base_extension", d.to_string()));
    }
    for v in &r.violations {
        kvs.push(("violation", v.clone()));
    }
    let (header, rows) = kv(&kvs);
    let message = (!r.valid).then(|| format!("{} atlas violation(s)", r.violations.len()));
    Ok(Report { header, rows, body, passed: r.valid, message, ..Default::default() })
}
