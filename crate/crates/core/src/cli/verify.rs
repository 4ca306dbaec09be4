//! The full invariant suite behind `bethe verify`.
//!
//! Chains are generated from the config's coupling and `rng_seed`: periodic
//! sizes use `N = 2n` sites (regular Bethe states need `n ≤ N/2`),
//! reflection sizes `N = 2n` as well. Boundary parameters come from the
//! config in reflection mode and default to fixed generic values otherwise.
//! Everything is drawn from one seeded stream in a fixed order, so the
//! report is byte-identical across runs.

use log::info;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::kernels::ParamSet;
use crate::model::{Boundary, ModelSpec};
use crate::oracle;
use crate::real::rel_err;
use crate::scalar_product::{
    determinant, extract_coefficient, gaudin_norm, hny_form, oracle_normalization, scalar_sum_form, sum_jm_check,
    ScalarOptions,
};
use crate::solver::{solve_bethe, BetheRoots, SolveConfig};
use crate::Scalar;

use super::commands::random_set;
use super::config::RunConfig;
use super::report::{Comparison, Section};

const DEFAULT_XI: (Scalar, Scalar) = (Scalar::new(0.4, 0.7), Scalar::new(-0.3, 0.5));

struct Suite {
    c: Scalar,
    xi: (Scalar, Scalar),
    rng: ChaCha8Rng,
    solver: SolveConfig<f64>,
    samples: usize,
    draws: usize,
    periodic_n: usize,
    symmetrized_n: usize,
    reflection_n: usize,
}

impl Suite {
    fn new(cfg: &RunConfig) -> Self {
        let model = cfg.model_spec();
        let xi = match model.boundary {
            Boundary::Reflection { xi_minus, xi_plus } => (xi_minus, xi_plus),
            Boundary::Periodic => DEFAULT_XI,
        };
        Suite {
            c: model.c,
            xi,
            rng: ChaCha8Rng::seed_from_u64(cfg.solver.rng_seed),
            solver: SolveConfig { seeds: cfg.solver.seeds.max(64), ..cfg.solve_config() },
            samples: cfg.task.samples,
            draws: cfg.task.draws,
            periodic_n: cfg.task.verify_periodic_n,
            symmetrized_n: cfg.task.verify_symmetrized_n,
            reflection_n: cfg.task.verify_reflection_n,
        }
    }

    fn chain(&mut self, sites: usize) -> ModelSpec<f64> {
        let theta = (0..sites).map(|_| Scalar::new(self.rng.gen_range(-0.5..0.5), self.rng.gen_range(-0.5..0.5))).collect();
        ModelSpec::xxx(self.c, theta)
    }

    fn open_chain(&mut self, sites: usize) -> ModelSpec<f64> {
        let (xm, xp) = self.xi;
        self.chain(sites).with_reflection(xm, xp)
    }

    fn point(&mut self) -> Scalar {
        Scalar::new(self.rng.gen_range(-1.0..1.0), self.rng.gen_range(-1.0..1.0))
    }

    fn off_shell(&mut self, n: usize) -> ParamSet<f64> {
        random_set(&mut self.rng, n, Scalar::new(0.0, 0.0))
    }

    fn roots(&self, model: &ModelSpec<f64>, n: usize) -> Result<Vec<BetheRoots<f64>>> {
        solve_bethe(model, &SolveConfig { n_roots: n, ..self.solver.clone() })
    }
}

/// Max relative spread of `values` around their mean.
fn spread(values: &[Scalar]) -> (Scalar, f64) {
    let mean = values.iter().sum::<Scalar>() / values.len() as f64;
    let s = values.iter().map(|&v| rel_err(v, mean, 1e-300)).fold(0.0, f64::max);
    (mean, s)
}

/// Keeps the comparison with the largest relative error.
fn worst(acc: &mut Option<Comparison>, c: Comparison) {
    if acc.as_ref().is_none_or(|a| c.rel_err > a.rel_err || c.rel_err.is_nan()) {
        *acc = Some(c);
    }
}

pub fn run_verify(cfg: &RunConfig) -> Result<Vec<Section>> {
    let mut s = Suite::new(cfg);
    let sections = vec![
        algebra(&mut s)?,
        action(&mut s)?,
        solver(&mut s)?,
        theorem2(&mut s)?,
        theorem1(&mut s)?,
        oracle_consistency(&mut s)?,
        norms(&mut s)?,
    ];
    Ok(sections)
}

fn algebra(s: &mut Suite) -> Result<Section> {
    info!("verify: algebra");
    let model = s.open_chain(4);
    let mut max = [0.0f64; 7];
    for _ in 0..s.draws {
        let (u, v) = (s.point(), s.point());
        let r = oracle::check_algebra(&model, u, v)?;
        let vals = [
            r.rtt,
            r.reflection_minus,
            r.reflection_plus,
            r.vacuum,
            r.vacuum_reflection.unwrap_or(0.0),
            r.commute_periodic,
            r.commute_reflection.unwrap_or(0.0),
        ];
        for (m, v) in max.iter_mut().zip(vals) {
            *m = m.max(v);
        }
    }
    let names = ["RTT relation", "reflection equation K-", "reflection equation K+", "vacuum eigenvalues T", "vacuum eigenvalues double-row", "[t(u), t(v)]", "[t^(u), t^(v)]"];
    let mut section = Section::new("algebra");
    for (name, m) in names.iter().zip(max) {
        section.comparisons.push(Comparison::residual(*name, m, 1e-11));
    }
    Ok(section)
}

fn action(s: &mut Suite) -> Result<Section> {
    info!("verify: single action");
    let mut section = Section::new("single action");
    for reflection in [false, true] {
        let model = if reflection { s.open_chain(4) } else { s.chain(4) };
        for n in 1..=2 {
            let mut m = 0.0f64;
            for _ in 0..s.samples {
                let z = s.point();
                let set = s.off_shell(n);
                let r = oracle::check_single_action(&model, z, &set)?;
                m = m.max(r.max_rel_err).max(r.residual);
            }
            let tag = if reflection { "reflection" } else { "periodic" };
            section.comparisons.push(Comparison::residual(format!("{tag} n={n} literal vs expansion coefficients"), m, 1e-10));
        }
    }
    Ok(section)
}

fn solver(s: &mut Suite) -> Result<Section> {
    info!("verify: solver");
    let mut section = Section::new("solver");
    let homogeneous = ModelSpec::xxx(s.c, ParamSet::new(vec![Scalar::new(0.0, 0.0); 2]));
    let found = s.roots(&homogeneous, 1)?;
    section.comparisons.push(Comparison::count("N=2 n=1 root sets", found.len(), 1));
    section.comparisons.push(Comparison::relative("N=2 n=1 root vs -c/2", found[0].roots[0], -s.c / 2.0, 1e-10));

    let model = s.chain(4);
    let found = s.roots(&model, 2)?;
    let expected = oracle::highest_weight_count(4, 2)?;
    section.comparisons.push(Comparison::count("N=4 n=2 root sets vs highest-weight states", found.len(), expected));
    let mut residual = 0.0f64;
    let mut states = Vec::new();
    for r in &found {
        for _ in 0..3 {
            let z = s.point();
            residual = residual.max(oracle::eigenvector_residual(&model, &r.roots, z)?);
        }
        states.push(oracle::bethe_vector(&r.roots, &model)?);
    }
    section.comparisons.push(Comparison::residual("N=4 n=2 eigenvector residual", residual, 1e-9));
    section.comparisons.push(Comparison::count("N=4 n=2 independent Bethe states", oracle::state_rank(&states, 1e-9), found.len()));
    Ok(section)
}

fn theorem2(s: &mut Suite) -> Result<Section> {
    info!("verify: symmetrized forms");
    let mut section = Section::new("symmetrized forms");
    let opts = ScalarOptions::default();
    for n in 1..=s.symmetrized_n {
        let model = s.chain(2 * n);
        let x = s.roots(&model, n)?.swap_remove(0).roots;
        let mut hny: Vec<Option<Comparison>> = vec![None; n];
        let mut sum = None;
        let mut jm = None;
        for _ in 0..s.samples {
            let u = s.off_shell(n);
            let det = determinant(&x, &u, &model, &opts)?;
            for m in 1..=n {
                let h = hny_form(&x, &u, m, &model, &opts)?;
                worst(&mut hny[m - 1], Comparison::relative(format!("n={n} hny(m={m}) vs det"), h, det, 1e-9));
            }
            let v = scalar_sum_form(&x, &u, &model, &opts)?;
            worst(&mut sum, Comparison::relative(format!("n={n} residue sum vs det"), v, det, 1e-9));
            for m in 1..=n {
                for j in 0..m {
                    let (l, r) = sum_jm_check(m, j, &u, &x, &model)?;
                    worst(&mut jm, Comparison::relative(format!("n={n} sum rule over all (j, m)"), l, r, 1e-10));
                }
            }
        }
        section.comparisons.extend(hny.into_iter().flatten());
        section.comparisons.extend(sum);
        section.comparisons.extend(jm);
    }
    Ok(section)
}

fn theorem1(s: &mut Suite) -> Result<Section> {
    info!("verify: multiple action");
    let mut section = Section::new("multiple action");
    let opts = ScalarOptions::default();
    let sizes: Vec<(bool, usize)> =
        (1..=s.periodic_n).map(|n| (false, n)).chain((1..=s.reflection_n).map(|n| (true, n))).collect();
    for (reflection, n) in sizes {
        let model = if reflection { s.open_chain(2 * n) } else { s.chain(2 * n) };
        let x = s.roots(&model, n)?.swap_remove(0).roots;
        let mut acc = None;
        let tag = if reflection { "reflection" } else { "periodic" };
        for _ in 0..s.samples {
            let u = s.off_shell(n);
            let det = determinant(&x, &u, &model, &opts)?;
            let act = extract_coefficient(&x, &u, &model, &opts)?;
            worst(&mut acc, Comparison::relative(format!("{tag} n={n} action coefficient vs determinant"), act, det, 1e-8));
        }
        section.comparisons.extend(acc);
    }
    Ok(section)
}

fn oracle_consistency(s: &mut Suite) -> Result<Section> {
    info!("verify: oracle normalization");
    let mut section = Section::new("oracle");
    let opts = ScalarOptions::default();
    let sizes: Vec<(bool, usize)> =
        (1..=s.periodic_n).map(|n| (false, n)).chain((1..=s.reflection_n).map(|n| (true, n))).collect();
    for (reflection, n) in sizes {
        let model = if reflection { s.open_chain(2 * n) } else { s.chain(2 * n) };
        let found = s.roots(&model, n)?;
        let x = &found[0].roots;
        let dual = oracle::dual_bethe_vector(x, &model)?;
        let mut ratios = Vec::new();
        for _ in 0..s.samples {
            let u = s.off_shell(n);
            let overlap = oracle::inner_product(&dual, &oracle::bethe_vector(&u, &model)?)?;
            ratios.push(overlap / determinant(x, &u, &model, &opts)?);
        }
        let (kappa, sp) = spread(&ratios);
        let tag = if reflection { "reflection" } else { "periodic" };
        section.comparisons.push(Comparison::residual(format!("{tag} n={n} oracle/det ratio spread over u"), sp, 1e-8));
        if !reflection {
            let closed = oracle_normalization(x, &model)?;
            section.comparisons.push(Comparison::relative(format!("periodic n={n} ratio vs lambda2(x)"), kappa, closed, 1e-8));
        }
        if !reflection && found.len() >= 2 {
            let b = oracle::bethe_vector(&found[1].roots, &model)?;
            let o = oracle::inner_product(&dual, &b)?.norm() / (dual.norm() * b.norm());
            section.comparisons.push(Comparison::residual(format!("periodic n={n} distinct on-shell states orthogonal"), o, 1e-9));
        }
    }
    Ok(section)
}

fn norms(s: &mut Suite) -> Result<Section> {
    info!("verify: norms");
    let mut section = Section::new("norm");
    let opts = ScalarOptions::default();
    for n in 1..=2.min(s.periodic_n) {
        let model = s.chain(2 * n);
        let x = s.roots(&model, n)?.swap_remove(0).roots;
        let seed = s.rng.gen();
        let g = gaudin_norm(&x, &model, &opts, 3, seed)?;
        section.comparisons.push(Comparison::residual(format!("n={n} limit spread over directions"), g.spread, 1e-6));
        let pairing = oracle::inner_product(&oracle::dual_bethe_vector(&x, &model)?, &oracle::bethe_vector(&x, &model)?)?;
        let normalized = pairing / oracle_normalization(&x, &model)?;
        section.comparisons.push(Comparison::relative(format!("n={n} oracle self-pairing / lambda2(x) vs limit"), normalized, g.value, 1e-6));
    }
    Ok(section)
}
