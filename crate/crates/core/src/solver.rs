//! Multistart damped Newton on the cleared Bethe residuals.

use itertools::Itertools;
use log::{debug, info};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{multiset_match, ParamSet};
use crate::model::{BoundaryMode, ModelSpec};
use crate::oracle;
use crate::real::Real;

type C<T> = Complex<T>;

const MAX_HALVINGS: usize = 20;
const POLISH_STEPS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig<T> {
    pub n_roots: usize,
    pub seeds: usize,
    /// Half-width of the complex sampling box around the centroid of `θ`.
    pub seed_box: T,
    pub newton_tol: T,
    pub max_iter: usize,
    /// Roots closer than this (or at a spurious singular configuration)
    /// are rejected; root sets closer than this are merged.
    pub dedup_tol: T,
    pub rng_seed: u64,
}

impl<T: Real> SolveConfig<T> {
    pub fn new(n_roots: usize) -> Self {
        SolveConfig {
            n_roots,
            seeds: 64,
            seed_box: T::lit(2.0),
            newton_tol: T::lit(1e-10),
            max_iter: 100,
            dedup_tol: T::lit(1e-6),
            rng_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.newton_tol < self.dedup_tol) {
            return Err(Error::InvalidArgument("newton_tol must be smaller than dedup_tol".into()));
        }
        if self.seed_box <= T::zero() {
            return Err(Error::InvalidArgument("seed_box must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetheRoots<T> {
    pub roots: ParamSet<T>,
    pub mode: BoundaryMode,
    /// Max modulus of the cleared residuals.
    pub residual_norm: T,
    pub converged: bool,
}

/// Finds distinct on-shell sets of `cfg.n_roots` parameters.
///
/// Seeds are drawn up front from `cfg.rng_seed`, solved independently (in
/// parallel), sorted and deduplicated, so the output does not depend on the
/// thread schedule.
pub fn solve_bethe<T: Real>(model: &ModelSpec<T>, cfg: &SolveConfig<T>) -> Result<Vec<BetheRoots<T>>> {
    model.validate()?;
    cfg.validate()?;
    if cfg.n_roots == 0 {
        return Ok(vec![BetheRoots {
            roots: ParamSet::empty(),
            mode: model.mode(),
            residual_norm: T::zero(),
            converged: true,
        }]);
    }
    let center = match model.theta() {
        Some(theta) if !theta.is_empty() => {
            theta.iter().fold(C::new(T::zero(), T::zero()), |a, &t| a + t) / T::from_count(theta.len())
        }
        _ => C::new(T::zero(), T::zero()),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let width = cfg.seed_box.to_f64_lossy();
    let starts: Vec<ParamSet<T>> = (0..cfg.seeds)
        .map(|_| {
            (0..cfg.n_roots)
                .map(|_| {
                    let re: f64 = rng.gen_range(-width..width);
                    let im: f64 = rng.gen_range(-width..width);
                    center + C::new(T::lit(re), T::lit(im))
                })
                .collect()
        })
        .collect();

    let outcomes: Vec<Result<BetheRoots<T>>> = starts.par_iter().map(|s| newton(model, s, cfg)).collect();
    let mut candidates = Vec::new();
    for (seed, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(r) => candidates.push(r),
            Err(e) => debug!("seed {seed} discarded: {e}"),
        }
    }
    if candidates.is_empty() {
        return Err(Error::NoConvergence { seeds: cfg.seeds });
    }
    let found = dedup_roots(candidates, model.mode(), cfg.dedup_tol);
    info!("{} distinct root sets for n = {}", found.len(), cfg.n_roots);
    Ok(found)
}

/// Damped Newton from one starting point, with the result screened for
/// collapsed and singular configurations.
pub fn newton<T: Real>(model: &ModelSpec<T>, start: &ParamSet<T>, cfg: &SolveConfig<T>) -> Result<BetheRoots<T>> {
    let n = start.len();
    let mut u: Vec<C<T>> = start.to_vec();
    let mut r = model.bethe_residual(&u)?;
    let mut norm = l2(&r);
    let mut polish = 0;
    for _ in 0..cfg.max_iter {
        if max_abs(&r) < cfg.newton_tol {
            polish += 1;
            if polish > POLISH_STEPS {
                break;
            }
        }
        let (_, jac) = model.bethe_residual_jacobian(&u)?;
        let rhs: Vec<_> = r.iter().map(|&x| -x).collect();
        let Ok(step) = jac.lu().solve(&rhs) else {
            break;
        };
        let mut scale = T::one();
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<_> = u.iter().zip(&step).map(|(&a, &d)| a + d * scale).collect();
            if let Ok(rt) = model.bethe_residual(&trial) {
                let nt = l2(&rt);
                if nt.is_finite() && (nt < norm || (polish > 0 && nt <= norm)) {
                    u = trial;
                    r = rt;
                    norm = nt;
                    accepted = true;
                    break;
                }
            }
            scale = scale * T::lit(0.5);
        }
        if !accepted {
            break;
        }
    }
    let residual_norm = max_abs(&r);
    if !(residual_norm < cfg.newton_tol) {
        return Err(Error::NoConvergence { seeds: 1 });
    }
    screen(model, &u, cfg.dedup_tol)?;
    debug_assert_eq!(u.len(), n);
    Ok(BetheRoots { roots: ParamSet::new(u), mode: model.mode(), residual_norm, converged: true })
}

/// Rejects configurations where the cleared residuals vanish without the
/// Bethe equations holding: coinciding roots, pairs at distance `±c`, and
/// (reflection) roots at `0`, `±c/2` or `u_i = −u_j`, `u_i + u_j = ±c`.
fn screen<T: Real>(model: &ModelSpec<T>, u: &[C<T>], tol: T) -> Result<()> {
    let c = model.c;
    let near = |z: C<T>| z.norm() <= tol;
    for (i, j) in (0..u.len()).tuple_combinations() {
        let d = u[i] - u[j];
        if near(d) || near(d - c) || near(d + c) {
            return Err(Error::DegenerateRoot { first: i, second: j });
        }
        if model.mode() == BoundaryMode::Reflection {
            let s = u[i] + u[j];
            if near(s) || near(s - c) || near(s + c) {
                return Err(Error::DegenerateRoot { first: i, second: j });
            }
        }
    }
    if model.mode() == BoundaryMode::Reflection {
        let hc = c * T::lit(0.5);
        if let Some(i) = u.iter().position(|&x| near(x) || near(x - hc) || near(x + hc)) {
            return Err(Error::DegenerateRoot { first: i, second: i });
        }
    }
    Ok(())
}

fn canonical<T: Real>(roots: &ParamSet<T>, mode: BoundaryMode, tol: T) -> ParamSet<T> {
    match mode {
        BoundaryMode::Periodic => roots.sorted(),
        BoundaryMode::Reflection => roots
            .iter()
            .map(|&z| if z.re > tol || (z.re.abs() <= tol && z.im >= T::zero()) { z } else { -z })
            .collect::<ParamSet<T>>()
            .sorted(),
    }
}

fn lex_key<T: Real>(s: &ParamSet<T>) -> Vec<(f64, f64)> {
    s.iter().map(|z| (z.re.to_f64_lossy(), z.im.to_f64_lossy())).collect()
}

/// Removes duplicates modulo permutations (and per-element sign flips in
/// reflection mode). Survivors carry the canonical representative: sorted
/// by `(re, im)`, reflection roots on the `re ≥ 0` branch.
pub fn dedup_roots<T: Real>(candidates: Vec<BetheRoots<T>>, mode: BoundaryMode, tol: T) -> Vec<BetheRoots<T>> {
    let mut canon: Vec<BetheRoots<T>> = candidates
        .into_iter()
        .map(|mut r| {
            r.roots = canonical(&r.roots, mode, tol);
            r
        })
        .collect();
    canon.sort_by(|a, b| {
        lex_key(&a.roots)
            .partial_cmp(&lex_key(&b.roots))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.residual_norm.partial_cmp(&b.residual_norm).unwrap_or(std::cmp::Ordering::Equal))
    });
    let mut out: Vec<BetheRoots<T>> = Vec::new();
    for cand in canon {
        let dup = out.iter().any(|kept| matches!(multiset_match(&kept.roots, &cand.roots, tol), Ok(Some(_))));
        if !dup {
            out.push(cand);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct OnShellReport<T> {
    pub max_residual: T,
    pub max_residue: T,
    /// `max_z ‖t(z)B(ū) − τ(z|ū)B(ū)‖/‖B(ū)‖`, when the oracle ran.
    pub oracle_residual: Option<T>,
    pub residual_pass: bool,
    pub residue_pass: bool,
    pub oracle_pass: Option<bool>,
}

impl<T: Real> OnShellReport<T> {
    pub fn pass(&self) -> bool {
        self.residual_pass && self.residue_pass && self.oracle_pass.unwrap_or(true)
    }
}

/// Checks the three on-shell characterizations: cleared residuals, residues
/// of the eigenvalue, and (xxx chains with `N ≤ 10`) the literal eigenvector
/// equation at three random points.
pub fn verify_on_shell<T: Real>(
    roots: &ParamSet<T>,
    model: &ModelSpec<T>,
    tol: T,
    use_oracle: bool,
    rng_seed: u64,
) -> Result<OnShellReport<T>> {
    let max_residual = model.bethe_residual(roots)?.iter().map(|r| r.norm()).fold(T::zero(), T::max);
    let mut max_residue = T::zero();
    for j in 0..roots.len() {
        max_residue = max_residue.max(model.tau_residue(j, roots)?.norm());
    }
    let sites = model.theta().map(|t| t.len());
    let oracle_residual = match sites {
        Some(n) if use_oracle && n <= 10 => {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            let mut worst = T::zero();
            for _ in 0..3 {
                let z = C::new(T::lit(rng.gen_range(-1.5..1.5)), T::lit(rng.gen_range(0.3..1.5)));
                worst = worst.max(oracle::eigenvector_residual(model, roots, z)?);
            }
            Some(worst)
        }
        _ => None,
    };
    Ok(OnShellReport {
        max_residual,
        max_residue,
        oracle_residual,
        residual_pass: max_residual < tol,
        residue_pass: max_residue < tol,
        oracle_pass: oracle_residual.map(|r| r < tol),
    })
}

fn max_abs<T: Real>(v: &[C<T>]) -> T {
    v.iter().map(|z| z.norm()).fold(T::zero(), T::max)
}

fn l2<T: Real>(v: &[C<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}
