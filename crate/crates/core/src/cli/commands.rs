use std::time::Instant;

use log::info;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernels::ParamSet;
use crate::model::{BoundaryMode, ModelSpec};
use crate::oracle;
use crate::scalar_product::{
    determinant, extract_coefficient, gaudin_norm, hny_form, oracle_normalization, scalar_sum_form, ScalarOptions,
};
use crate::solver::{solve_bethe, verify_on_shell, BetheRoots};
use crate::Scalar;

use super::config::{Method, RunConfig};
use super::report::{Comparison, Section, Value};
use super::ExecOptions;

pub(super) fn random_set(rng: &mut ChaCha8Rng, n: usize, center: Scalar) -> ParamSet<f64> {
    (0..n).map(|_| center + Scalar::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

fn centroid(model: &ModelSpec<f64>) -> Scalar {
    match model.theta() {
        Some(t) if !t.is_empty() => t.iter().sum::<Scalar>() / t.len() as f64,
        _ => Scalar::new(0.0, 0.0),
    }
}

fn root_values(section: &mut Section, label: &str, roots: &ParamSet<f64>) {
    for (k, &z) in roots.iter().enumerate() {
        section.values.push(Value::new(format!("{label} u[{k}]"), z));
    }
}

fn pick_roots(cfg: &RunConfig, model: &ModelSpec<f64>) -> Result<BetheRoots<f64>> {
    let found = solve_bethe(model, &cfg.solve_config())?;
    let count = found.len();
    found.into_iter().nth(cfg.task.root_index).ok_or_else(|| {
        Error::InvalidArgument(format!("root_index {} out of range ({count} root sets found)", cfg.task.root_index))
    })
}

fn options(cfg: &RunConfig, opts: &ExecOptions) -> ScalarOptions<f64> {
    ScalarOptions { unchecked: cfg.task.unchecked || opts.unchecked, ..ScalarOptions::default() }
}

pub(super) fn solve(cfg: &RunConfig) -> Result<Vec<Section>> {
    let model = cfg.model_spec();
    let found = solve_bethe(&model, &cfg.solve_config())?;
    info!("solve: {} root sets", found.len());
    let mut section = Section::new("solve");
    section.values.push(Value::new("root sets", found.len() as f64));
    for (i, r) in found.iter().enumerate() {
        let label = format!("set {i}");
        root_values(&mut section, &label, &r.roots);
        section.comparisons.push(Comparison::residual(format!("{label} cleared residual"), r.residual_norm, cfg.solver.newton_tol));
        let rep = verify_on_shell(&r.roots, &model, 1e-9, true, cfg.solver.rng_seed)?;
        section.comparisons.push(Comparison::residual(format!("{label} max |residue of tau|"), rep.max_residue, 1e-9));
        if let Some(e) = rep.oracle_residual {
            section.comparisons.push(Comparison::residual(format!("{label} oracle eigenvector residual"), e, 1e-9));
        }
    }
    Ok(vec![section])
}

pub(super) fn eval_method(
    method: Method,
    x: &ParamSet<f64>,
    u: &ParamSet<f64>,
    model: &ModelSpec<f64>,
    opts: &ScalarOptions<f64>,
) -> Result<Scalar> {
    match method {
        Method::Det => determinant(x, u, model, opts),
        Method::Hny(m) => hny_form(x, u, m, model, opts),
        Method::Sum => scalar_sum_form(x, u, model, opts),
        Method::Action => extract_coefficient(x, u, model, opts),
        Method::Oracle => {
            let dual = oracle::dual_bethe_vector(x, model)?;
            oracle::inner_product(&dual, &oracle::bethe_vector(u, model)?)
        }
    }
}

pub(super) fn scalar(cfg: &RunConfig, opts: &ExecOptions) -> Result<Vec<Section>> {
    let model = cfg.model_spec();
    let sopts = options(cfg, opts);
    let x = pick_roots(cfg, &model)?.roots;
    let u: ParamSet<f64> = match &cfg.task.u {
        Some(u) => u.iter().map(|z| z.value()).collect(),
        None => random_set(&mut ChaCha8Rng::seed_from_u64(cfg.solver.rng_seed), x.len(), centroid(&model)),
    };
    let methods = match &opts.methods {
        Some(m) => m.clone(),
        None => cfg.methods().map_err(|e| Error::InvalidArgument(e.to_string()))?,
    };
    let mut section = Section::new("scalar");
    root_values(&mut section, "on-shell", &x);
    root_values(&mut section, "off-shell", &u);
    let mut reference: Option<(String, Scalar)> = None;
    for method in methods {
        let label = method.label();
        let value = eval_method(method, &x, &u, &model, &sopts)?;
        section.values.push(Value::new(&label, value));
        let compared = match (method, model.mode()) {
            (Method::Oracle, BoundaryMode::Periodic) => {
                let normalized = value / oracle_normalization(&x, &model)?;
                section.values.push(Value::new("oracle / lambda2(x)", normalized));
                Some(("oracle / lambda2(x)".to_string(), normalized))
            }
            (Method::Oracle, BoundaryMode::Reflection) => None,
            _ => Some((label, value)),
        };
        if let Some((name, v)) = compared {
            match &reference {
                None => reference = Some((name, v)),
                Some((rname, rv)) => {
                    section.comparisons.push(Comparison::relative(format!("{name} vs {rname}"), v, *rv, cfg.task.tol))
                }
            }
        }
    }
    Ok(vec![section])
}

pub(super) fn norm(cfg: &RunConfig, opts: &ExecOptions) -> Result<Vec<Section>> {
    let model = cfg.model_spec();
    let sopts = options(cfg, opts);
    let x = pick_roots(cfg, &model)?.roots;
    let g = gaudin_norm(&x, &model, &sopts, cfg.task.directions, cfg.solver.rng_seed)?;
    let mut section = Section::new("norm");
    root_values(&mut section, "on-shell", &x);
    section.values.push(Value::new("gaudin limit", g.value));
    section.comparisons.push(Comparison::residual("direction spread", g.spread, 1e-6));
    if model.theta().is_some_and(|t| t.len() <= oracle::MAX_SITES) {
        let self_pairing = oracle::inner_product(&oracle::dual_bethe_vector(&x, &model)?, &oracle::bethe_vector(&x, &model)?)?;
        section.values.push(Value::new("oracle self-pairing", self_pairing));
        if model.mode() == BoundaryMode::Periodic {
            let normalized = self_pairing / oracle_normalization(&x, &model)?;
            section.comparisons.push(Comparison::relative("oracle / lambda2(x) vs gaudin limit", normalized, g.value, 1e-6));
        }
    }
    Ok(vec![section])
}

/// Mean wall time of `f` over enough repetitions to fill ~20 ms.
fn time<F: FnMut() -> Result<Scalar>>(mut f: F) -> Result<f64> {
    let start = Instant::now();
    let mut reps = 0u32;
    while reps == 0 || (start.elapsed().as_secs_f64() < 0.02 && reps < 10_000) {
        std::hint::black_box(f()?);
        reps += 1;
    }
    Ok(start.elapsed().as_secs_f64() / reps as f64)
}

pub(super) fn bench(cfg: &RunConfig) -> Result<Vec<Section>> {
    let c = cfg.model.c.value();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.solver.rng_seed);
    let opts = ScalarOptions::<f64>::unchecked();
    let mut section = Section::new("bench");
    for n in 1..=cfg.task.bench_max_n {
        let theta = random_set(&mut rng, 2 * n, Scalar::new(0.0, 0.0));
        let model = ModelSpec::xxx(c, theta);
        let x = random_set(&mut rng, n, Scalar::new(0.0, 0.0));
        let u = random_set(&mut rng, n, Scalar::new(0.0, 0.0));
        let det = time(|| determinant(&x, &u, &model, &opts))?;
        let sum = time(|| scalar_sum_form(&x, &u, &model, &opts))?;
        let action = time(|| extract_coefficient(&x, &u, &model, &opts))?;
        section.values.push(Value::new(format!("n={n} det seconds"), det));
        section.values.push(Value::new(format!("n={n} sum seconds"), sum));
        section.values.push(Value::new(format!("n={n} action seconds"), action));
        if n >= 5 {
            section.comparisons.push(Comparison {
                name: format!("n={n} det time < sum time"),
                lhs: det.into(),
                rhs: sum.into(),
                rel_err: det / sum,
                tol: 1.0,
                pass: det < sum,
            });
        }
    }
    Ok(vec![section])
}
