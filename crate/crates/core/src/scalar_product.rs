//! Scalar products of Bethe vectors: determinant, hybrid symmetrized forms,
//! chained-residue sum, multiple-action coefficient, Gaudin limit, and the
//! reflection determinant.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{multiset_match, permutations, KernelKind, ParamSet};
use crate::linalg::Matrix;
use crate::model::{BoundaryMode, ModelSpec};
use crate::real::Real;

type C<T> = Complex<T>;

/// Largest `n` for which `n!`-term symmetrizations are evaluated.
pub const MAX_SYMMETRIZE: usize = 6;

fn zero<T: Real>() -> C<T> {
    C::new(T::zero(), T::zero())
}

fn one<T: Real>() -> C<T> {
    C::new(T::one(), T::zero())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarOptions<T> {
    /// Bound on the max cleared Bethe residual of the on-shell argument.
    pub on_shell_tol: T,
    /// Skip the on-shell check.
    pub unchecked: bool,
    /// Keys of a [`StateExpansion`] closer than this are merged.
    pub dedup_tol: T,
    /// Terms below `prune_rel · max|coef|` are dropped after each action.
    pub prune_rel: T,
}

impl<T: Real> Default for ScalarOptions<T> {
    fn default() -> Self {
        ScalarOptions { on_shell_tol: T::lit(1e-8), unchecked: false, dedup_tol: T::lit(1e-9), prune_rel: T::lit(1e-14) }
    }
}

impl<T: Real> ScalarOptions<T> {
    pub fn unchecked() -> Self {
        ScalarOptions { unchecked: true, ..Self::default() }
    }
}

/// Linear combination `Σ a_k B(ū_k)` of abstract Bethe vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct StateExpansion<T> {
    terms: Vec<(ParamSet<T>, C<T>)>,
    mode: BoundaryMode,
    dedup_tol: T,
}

impl<T: Real> StateExpansion<T> {
    pub fn new(mode: BoundaryMode, dedup_tol: T) -> Self {
        StateExpansion { terms: Vec::new(), mode, dedup_tol }
    }

    /// The single vector `B(ū)`.
    pub fn singleton(set: ParamSet<T>, mode: BoundaryMode, dedup_tol: T) -> Self {
        StateExpansion { terms: vec![(set, one())], mode, dedup_tol }
    }

    pub fn mode(&self) -> BoundaryMode {
        self.mode
    }

    pub fn terms(&self) -> &[(ParamSet<T>, C<T>)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn find(&self, key: &[C<T>]) -> Result<Option<usize>> {
        for (i, (k, _)) in self.terms.iter().enumerate() {
            if multiset_match(k, key, self.dedup_tol)?.is_some() {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    /// Adds `coef · B(key)`, merging with an existing matching key.
    pub fn add(&mut self, key: ParamSet<T>, coef: C<T>) -> Result<()> {
        match self.find(&key)? {
            Some(i) => self.terms[i].1 += coef,
            None => self.terms.push((key, coef)),
        }
        Ok(())
    }

    /// Drops terms with `|coef| < rel · max|coef|`.
    pub fn prune(&mut self, rel: T) {
        let max = self.terms.iter().map(|(_, a)| a.norm()).fold(T::zero(), T::max);
        self.terms.retain(|(_, a)| a.norm() >= rel * max && a.norm() > T::zero());
    }

    /// Coefficient of `B(key)`.
    pub fn coefficient(&self, key: &[C<T>]) -> Result<C<T>> {
        self.find(key)?.map(|i| self.terms[i].1).ok_or(Error::MissingTerm)
    }
}

/// Coefficients of `t(z)B(ū) = a₀ B(ū) + Σ_j a_j B({z, ū_j})`: returns
/// `(a₀, [a_j])` with `a₀ = τ(z|ū)` and
/// periodic `a_j = −c⁻¹ g(z,u_j) res_{w=u_j} τ(w|ū)`,
/// reflection `a_j = −c⁻¹ 2u_j/(c+2u_j) (c+2z)/c g(z,u_j) g(z,−u_j) res_{w=u_j} τ̂(w|ū)`.
pub fn single_action<T: Real>(z: C<T>, set: &[C<T>], model: &ModelSpec<T>) -> Result<(C<T>, Vec<C<T>>)> {
    let k = model.kernels();
    let c = model.c;
    let diag = model.tau(z, set)?;
    let mut off = Vec::with_capacity(set.len());
    for (j, &u) in set.iter().enumerate() {
        let res = model.tau_residue(j, set)?;
        let coef = match model.mode() {
            BoundaryMode::Periodic => -k.g(z, u)? * res / c,
            BoundaryMode::Reflection => {
                let two_u = u * T::lit(2.0);
                if (two_u + c).norm() <= model.collision_tol {
                    return Err(Error::pole("action", format!("c + 2u_{j} vanishes at u = {u}")));
                }
                let pre = two_u / (c + two_u) * (c + z * T::lit(2.0)) / c;
                -pre * k.g(z, u)? * k.g(z, -u)? * res / c
            }
        };
        off.push(coef);
    }
    Ok((diag, off))
}

/// `t(z)` applied term by term, recombined and pruned.
pub fn apply_transfer<T: Real>(
    z: C<T>,
    state: &StateExpansion<T>,
    model: &ModelSpec<T>,
    prune_rel: T,
) -> Result<StateExpansion<T>> {
    if state.mode != model.mode() {
        return Err(Error::InvalidArgument(format!("expansion is {} but model is {}", state.mode, model.mode())));
    }
    let mut out = StateExpansion::new(state.mode, state.dedup_tol);
    for (key, a) in &state.terms {
        let (diag, off) = single_action(z, key, model).map_err(|e| match e {
            Error::Pole { kernel, detail } => Error::Pole { kernel, detail: format!("term {key:?}, z = {z}: {detail}") },
            other => other,
        })?;
        out.add(key.clone(), *a * diag)?;
        for (j, coef) in off.into_iter().enumerate() {
            out.add(key.without(j).with_front(z), *a * coef)?;
        }
    }
    out.prune(prune_rel);
    Ok(out)
}

fn check_sizes<T: Real>(x: &[C<T>], u: &[C<T>]) -> Result<()> {
    if x.len() != u.len() {
        return Err(Error::DimensionMismatch { left: x.len(), right: u.len() });
    }
    Ok(())
}

/// Fails with [`Error::OffShell`] unless `x` satisfies the Bethe equations
/// of `model` (skipped when `opts.unchecked`).
pub fn check_on_shell<T: Real>(x: &[C<T>], model: &ModelSpec<T>, opts: &ScalarOptions<T>) -> Result<()> {
    if opts.unchecked {
        return Ok(());
    }
    let residual = model.max_residual(x)?;
    if !(residual < opts.on_shell_tol) {
        return Err(Error::OffShell { residual: residual.to_f64_lossy(), tol: opts.on_shell_tol.to_f64_lossy() });
    }
    Ok(())
}

fn require_mode<T: Real>(model: &ModelSpec<T>, mode: BoundaryMode, op: &str) -> Result<()> {
    if model.mode() != mode {
        return Err(Error::unsupported(op, format!("{mode} mode")));
    }
    Ok(())
}

/// `R(v̄|ū,v̄)`: the coefficient of `B(v̄)` in `t(v₁)⋯t(v_n) B(ū)`.
pub fn extract_coefficient<T: Real>(
    v: &ParamSet<T>,
    u: &ParamSet<T>,
    model: &ModelSpec<T>,
    opts: &ScalarOptions<T>,
) -> Result<C<T>> {
    check_sizes(v, u)?;
    check_on_shell(v, model, opts)?;
    for (i, &a) in v.iter().enumerate() {
        if let Some(j) = u.iter().position(|&b| (a - b).norm() <= model.collision_tol) {
            return Err(Error::InvalidArgument(format!("v[{i}] coincides with u[{j}]")));
        }
    }
    let mut state = StateExpansion::singleton(u.clone(), model.mode(), opts.dedup_tol);
    for &z in v.iter() {
        state = apply_transfer(z, &state, model, opts.prune_rel)?;
    }
    state.coefficient(v)
}

/// `J(u, x_k) = λ₂(u) t(u,x_k) h(u,x̄) + (−1)^{n−1} λ₁(u) t(x_k,u) h(x̄,u)`
pub fn j_entry<T: Real>(u: C<T>, k: usize, x: &[C<T>], model: &ModelSpec<T>) -> Result<C<T>> {
    let kern = model.kernels();
    let xk = x[k];
    let sign = if x.len() % 2 == 1 { T::one() } else { -T::one() };
    let left = model.lambda2(u)? * kern.t(u, xk)? * kern.product_left(KernelKind::H, u, x)?;
    let right = model.lambda1(u)? * kern.t(xk, u)? * kern.product_right(KernelKind::H, x, u)?;
    Ok(left + right * sign)
}

/// `J(u, x_k) = c/g(u,x̄) · ∂τ(u|x̄)/∂x_k`, from the analytic derivative.
pub fn j_entry_derivative<T: Real>(u: C<T>, k: usize, x: &[C<T>], model: &ModelSpec<T>) -> Result<C<T>> {
    let per = model.periodic();
    let g = model.kernels().product_left(KernelKind::G, u, x)?;
    Ok(model.c / g * per.dtau_dx(u, x, k)?)
}

fn delta_prime<T: Real>(model: &ModelSpec<T>, set: &[C<T>]) -> Result<C<T>> {
    Ok(model.kernels().delta_products(set)?.0)
}

fn delta<T: Real>(model: &ModelSpec<T>, set: &[C<T>]) -> Result<C<T>> {
    Ok(model.kernels().delta_products(set)?.1)
}

/// `S(x̄|ū) = Δ′(ū) Δ(x̄) det J(u_j, x_k)` (periodic).
pub fn slavnov_det<T: Real>(
    x: &ParamSet<T>,
    u: &ParamSet<T>,
    model: &ModelSpec<T>,
    opts: &ScalarOptions<T>,
) -> Result<C<T>> {
    require_mode(model, BoundaryMode::Periodic, "slavnov_det")?;
    check_sizes(x, u)?;
    check_on_shell(x, model, opts)?;
    let n = x.len();
    if n == 0 {
        return Ok(one());
    }
    let j = Matrix::try_from_fn(n, |r, k| j_entry(u[r], k, x, model))?;
    Ok(delta_prime(model, u)? * delta(model, x)? * j.det())
}

/// Sum over all orderings of `0..n` evaluated in parallel and reduced in
/// lexicographic order, so the result is independent of scheduling.
fn sym_sum<T, F>(n: usize, f: F) -> Result<C<T>>
where
    T: Real,
    F: Fn(&[usize]) -> Result<C<T>> + Sync,
{
    if n > MAX_SYMMETRIZE {
        return Err(Error::TooManyTerms { n, limit: MAX_SYMMETRIZE });
    }
    let perms: Vec<Vec<usize>> = permutations(n).collect();
    let terms: Vec<Result<C<T>>> = perms.par_iter().map(|p| f(p)).collect();
    let mut acc = zero();
    for (p, t) in perms.iter().zip(terms) {
        acc += t.map_err(|e| match e {
            Error::Pole { kernel, detail } => Error::Pole { kernel, detail: format!("permutation {p:?}: {detail}") },
            other => other,
        })?;
    }
    Ok(acc)
}

/// `res_{z=s_ℓ} τ(z|s̄)` with `s̄ = (w₀,…,w_ℓ, x_{ℓ+1},…,x_{n−1})`.
fn chained_residue<T: Real>(model: &ModelSpec<T>, w: &[C<T>], x: &[C<T>], l: usize) -> Result<C<T>> {
    let s: Vec<_> = w[..=l].iter().chain(&x[l + 1..]).copied().collect();
    model.tau_residue(l, &s)
}

/// Hybrid form with `m` determinant-type factors and `n − m` residues:
/// `c^{m−n} Sym_ū ∏_{i<m}[J(u_i,x_i) g(u_i, x_{m..})] Δ′(u_{<m}) Δ(x_{<m})
///  ∏_{ℓ≥m} g(u_ℓ,x_ℓ) res τ(·|u_{≤ℓ}, x_{>ℓ})`.
pub fn hny_form<T: Real>(
    x: &ParamSet<T>,
    u: &ParamSet<T>,
    m: usize,
    model: &ModelSpec<T>,
    opts: &ScalarOptions<T>,
) -> Result<C<T>> {
    require_mode(model, BoundaryMode::Periodic, "hny_form")?;
    check_sizes(x, u)?;
    let n = x.len();
    if m < 1 || m > n {
        return Err(Error::InvalidArgument(format!("m = {m} outside 1..={n}")));
    }
    check_on_shell(x, model, opts)?;
    let kern = model.kernels();
    let total = sym_sum(n, |p| {
        let w = u.permuted(p);
        let mut term = delta_prime(model, &w[..m])? * delta(model, &x[..m])?;
        for i in 0..m {
            term *= j_entry(w[i], i, x, model)? * kern.product_left(KernelKind::G, w[i], &x[m..])?;
        }
        for l in m..n {
            term *= kern.g(w[l], x[l])? * chained_residue(model, &w, x, l)?;
        }
        Ok(term)
    })?;
    Ok(total / model.c.powu((n - m) as u32))
}

/// `S(x̄|ū) = c^{−n} Sym_ū ∏_ℓ g(u_ℓ,x_ℓ) res_{z=u_ℓ} τ(z|u_{≤ℓ}, x_{>ℓ})`.
pub fn scalar_sum_form<T: Real>(
    x: &ParamSet<T>,
    u: &ParamSet<T>,
    model: &ModelSpec<T>,
    opts: &ScalarOptions<T>,
) -> Result<C<T>> {
    require_mode(model, BoundaryMode::Periodic, "scalar_sum_form")?;
    check_sizes(x, u)?;
    check_on_shell(x, model, opts)?;
    let n = x.len();
    let kern = model.kernels();
    let total = sym_sum(n, |p| {
        let w = u.permuted(p);
        let mut term: C<T> = one();
        for l in 0..n {
            term *= kern.g(w[l], x[l])? * chained_residue(model, &w, x, l)?;
        }
        Ok(term)
    })?;
    Ok(total / model.c.powu(n as u32))
}

/// Both sides of
/// `Σ_{k<m} J(u_j,x_k) ν_k = −res_{z=u_j} τ(z|u_{<m}, x_{≥m}) / (c ∏_{i<m,i≠j} g(u_j,u_i) ∏_{ℓ≥m} g(u_j,x_ℓ))`
/// with `ν_k = ∏_{ℓ<m,ℓ≠k} g(x_k,x_ℓ) / ∏_{ℓ<m} g(x_k,u_ℓ)`.
/// Indices are zero-based: `j < m ≤ n`; only `u[..m]` is used.
pub fn sum_jm_check<T: Real>(
    m: usize,
    j: usize,
    u: &[C<T>],
    x: &[C<T>],
    model: &ModelSpec<T>,
) -> Result<(C<T>, C<T>)> {
    let n = x.len();
    if !(j < m && m <= n && u.len() >= m) {
        return Err(Error::InvalidArgument(format!("need j < m <= n, got j = {j}, m = {m}, n = {n}")));
    }
    let per = model.periodic();
    let kern = model.kernels();
    let um = &u[..m];
    let mut lhs = zero();
    for k in 0..m {
        let mut nu = kern.product_left(KernelKind::G, x[k], &x[..m].iter().enumerate().filter(|&(l, _)| l != k).map(|(_, &v)| v).collect::<Vec<_>>())?;
        nu /= kern.product_left(KernelKind::G, x[k], um)?;
        lhs += j_entry(um[j], k, x, &per)? * nu;
    }
    let s: Vec<_> = um.iter().chain(&x[m..]).copied().collect();
    let others: Vec<_> = um.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, &v)| v).collect();
    let denom = model.c * kern.product_left(KernelKind::G, um[j], &others)? * kern.product_left(KernelKind::G, um[j], &x[m..])?;
    let rhs = -per.tau_residue(j, &s)? / denom;
    Ok((lhs, rhs))
}

/// Reflection determinant
/// `Δ′ᵣ(ū) Δᵣ(x̄) det[(2x_k+c)/(2x_k) · c/(2u_j+c) · c/(g(u_j,x̄)g(u_j,−x̄)) · ∂τ̂(u_j|x̄)/∂x_k]`
/// with `Δ′ᵣ(ū) = ∏_{j<k} g(u_j,u_k)g(u_j,−u_k)` and `Δᵣ(x̄) = ∏_{j>k} g(x_j,x_k)g(x_j,−x_k)`.
pub fn reflection_det<T: Real>(
    x: &ParamSet<T>,
    u: &ParamSet<T>,
    model: &ModelSpec<T>,
    opts: &ScalarOptions<T>,
) -> Result<C<T>> {
    require_mode(model, BoundaryMode::Reflection, "reflection_det")?;
    check_sizes(x, u)?;
    check_on_shell(x, model, opts)?;
    let n = x.len();
    if n == 0 {
        return Ok(one());
    }
    let kern = model.kernels();
    let c = model.c;
    let two = T::lit(2.0);
    let neg_x = x.negated();
    let mat = Matrix::try_from_fn(n, |j, k| {
        let (uj, xk) = (u[j], x[k]);
        if xk.norm() <= model.collision_tol {
            return Err(Error::pole("reflection_det", format!("x_{k} = 0")));
        }
        if (uj * two + c).norm() <= model.collision_tol {
            return Err(Error::pole("reflection_det", format!("2u_{j} + c = 0")));
        }
        let gg = kern.product_left(KernelKind::G, uj, x)? * kern.product_left(KernelKind::G, uj, &neg_x)?;
        Ok((xk * two + c) / (xk * two) * c / (uj * two + c) * c / gg * model.dtau_dx(uj, x, k)?)
    })?;
    let mut pre: C<T> = one();
    for a in 0..n {
        for b in (a + 1)..n {
            pre *= kern.g(u[a], u[b])? * kern.g(u[a], -u[b])?;
            pre *= kern.g(x[b], x[a])? * kern.g(x[b], -x[a])?;
        }
    }
    Ok(pre * mat.det())
}

/// Determinant representation for the model's boundary mode.
pub fn determinant<T: Real>(
    x: &ParamSet<T>,
    u: &ParamSet<T>,
    model: &ModelSpec<T>,
    opts: &ScalarOptions<T>,
) -> Result<C<T>> {
    match model.mode() {
        BoundaryMode::Periodic => slavnov_det(x, u, model, opts),
        BoundaryMode::Reflection => reflection_det(x, u, model, opts),
    }
}

/// Normalization between the determinant and the literal pairing
/// `⟨0|T₂₁(x̄) T₁₂(ū)|0⟩` for on-shell `x̄` (periodic): `κ(x̄) = λ₂(x̄)`.
pub fn oracle_normalization<T: Real>(x: &[C<T>], model: &ModelSpec<T>) -> Result<C<T>> {
    x.iter().try_fold(one(), |acc, &v| Ok(acc * model.lambda2(v)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaudinNorm<T> {
    pub value: C<T>,
    /// Largest relative deviation of a single direction from `value`.
    pub spread: T,
}

/// Shift sizes of the ε-limit.
pub const GAUDIN_EPS: [f64; 3] = [1e-4, 5e-5, 2.5e-5];
/// Spread above which the limit is rejected.
pub const GAUDIN_SPREAD_TOL: f64 = 1e-5;

/// `lim_{ū→v̄} S(v̄|ū)` for on-shell `v̄`: the determinant at `ū = v̄ + εδ`,
/// Richardson-extrapolated over [`GAUDIN_EPS`], averaged over `directions`
/// random unit directions `δ` drawn from `rng_seed`.
pub fn gaudin_norm<T: Real>(
    v: &ParamSet<T>,
    model: &ModelSpec<T>,
    opts: &ScalarOptions<T>,
    directions: usize,
    rng_seed: u64,
) -> Result<GaudinNorm<T>> {
    check_on_shell(v, model, opts)?;
    if v.is_empty() {
        return Ok(GaudinNorm { value: one(), spread: T::zero() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let inner = ScalarOptions { unchecked: true, ..*opts };
    let mut values = Vec::with_capacity(directions);
    for _ in 0..directions.max(1) {
        let delta: Vec<C<T>> = (0..v.len())
            .map(|_| {
                let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                C::new(T::lit(phi.cos()), T::lit(phi.sin()))
            })
            .collect();
        let at = |eps: f64| -> Result<C<T>> {
            let u: ParamSet<T> = v.iter().zip(&delta).map(|(&a, &d)| a + d * T::lit(eps)).collect();
            determinant(v, &u, model, &inner)
        };
        let d: Vec<C<T>> = GAUDIN_EPS.iter().map(|&e| at(e)).collect::<Result<_>>()?;
        let two = T::lit(2.0);
        let r1 = d[1] * two - d[0];
        let r2 = d[2] * two - d[1];
        values.push((r2 * T::lit(4.0) - r1) / T::lit(3.0));
    }
    let value = values.iter().fold(zero::<T>(), |a, &b| a + b) / T::from_count(values.len());
    let scale = value.norm().max(T::min_positive_value());
    let spread = values.iter().map(|&w| (w - value).norm() / scale).fold(T::zero(), T::max);
    if spread > T::lit(GAUDIN_SPREAD_TOL) {
        return Err(Error::UnstableLimit { spread: spread.to_f64_lossy(), tol: GAUDIN_SPREAD_TOL });
    }
    Ok(GaudinNorm { value, spread })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::{cplx, re, rel_err};
    use rand::Rng;
    use crate::solver::{solve_bethe, SolveConfig};
    use proptest::prelude::*;

    fn standard() -> ModelSpec<f64> {
        ModelSpec::xxx(re(1.0), ParamSet::from_reals(&[0.0, 0.0]))
    }

    fn chain(n: usize) -> ModelSpec<f64> {
        let th = [cplx(0.1, 0.2), cplx(-0.3, 0.05), cplx(0.25, -0.15), cplx(-0.05, -0.3), cplx(0.4, 0.1), cplx(-0.2, 0.35)];
        ModelSpec::xxx(cplx(1.0, 0.3), ParamSet::new(th[..n].to_vec()))
    }

    fn on_shell(m: &ModelSpec<f64>, n: usize) -> ParamSet<f64> {
        solve_bethe(m, &SolveConfig { seeds: 80, ..SolveConfig::new(n) }).unwrap()[0].roots.clone()
    }

    fn off_shell(n: usize, seed: u64) -> ParamSet<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| cplx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
    }

    fn close(a: C<f64>, b: C<f64>, tol: f64) -> bool {
        rel_err(a, b, 1e-300) < tol
    }

    #[test]
    fn standard_instance_all_methods() {
        let m = standard();
        let (x, u) = (ParamSet::from_reals(&[-0.5]), ParamSet::from_reals(&[1.0]));
        let o = ScalarOptions::default();
        assert!(close(j_entry(re(1.0), 0, &x, &m).unwrap(), re(-2.0), 1e-15));
        assert!(close(slavnov_det(&x, &u, &m, &o).unwrap(), re(-2.0), 1e-15));
        assert!(close(hny_form(&x, &u, 1, &m, &o).unwrap(), re(-2.0), 1e-15));
        assert!(close(scalar_sum_form(&x, &u, &m, &o).unwrap(), re(-2.0), 1e-15));
        assert!(close(extract_coefficient(&x, &u, &m, &o).unwrap(), re(-2.0), 1e-15));
        let e = ParamSet::empty();
        assert_eq!(slavnov_det(&e, &e, &m, &o).unwrap(), re(1.0));
        let g = gaudin_norm(&x, &m, &o, 3, 0).unwrap();
        assert!(close(g.value, re(-2.0), 1e-9), "{g:?}");
        assert_eq!(gaudin_norm(&e, &m, &o, 3, 0).unwrap().value, re(1.0));
    }

    #[test]
    fn off_shell_argument_is_rejected() {
        let m = standard();
        let (x, u) = (ParamSet::from_reals(&[0.3]), ParamSet::from_reals(&[1.0]));
        assert!(matches!(slavnov_det(&x, &u, &m, &ScalarOptions::default()), Err(Error::OffShell { .. })));
        assert!(slavnov_det(&x, &u, &m, &ScalarOptions::unchecked()).is_ok());
        assert!(matches!(hny_form(&x, &u, 2, &m, &ScalarOptions::unchecked()), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn action_examples() {
        let m = standard();
        let z = cplx(0.4, 0.9);
        let vac = StateExpansion::singleton(ParamSet::empty(), BoundaryMode::Periodic, 1e-9);
        let out = apply_transfer(z, &vac, &m, 1e-14).unwrap();
        assert_eq!(out.len(), 1);
        assert!(close(out.terms()[0].1, m.lambda1(z).unwrap() + m.lambda2(z).unwrap(), 1e-15));
        let on = StateExpansion::singleton(ParamSet::from_reals(&[-0.5]), BoundaryMode::Periodic, 1e-9);
        assert_eq!(apply_transfer(z, &on, &m, 1e-14).unwrap().len(), 1);
        let u = re(1.0);
        let (diag, off) = single_action(z, &[u], &m).unwrap();
        assert!(close(diag, m.tau(z, &[u]).unwrap(), 1e-15));
        let g = m.kernels().g(z, u).unwrap();
        assert!(close(off[0], g * (m.lambda1(u).unwrap() - m.lambda2(u).unwrap()), 1e-14));
    }

    #[test]
    fn missing_term_is_reported() {
        let e = StateExpansion::<f64>::singleton(ParamSet::from_reals(&[1.0]), BoundaryMode::Periodic, 1e-9);
        assert_eq!(e.coefficient(&[re(2.0)]), Err(Error::MissingTerm));
        assert_eq!(e.coefficient(&[re(1.0)]).unwrap(), re(1.0));
    }

    #[test]
    fn expansion_merges_and_prunes() {
        let mut e = StateExpansion::<f64>::new(BoundaryMode::Periodic, 1e-9);
        e.add(ParamSet::from_reals(&[1.0, 2.0]), re(1.0)).unwrap();
        e.add(ParamSet::from_reals(&[2.0, 1.0]), re(2.0)).unwrap();
        e.add(ParamSet::from_reals(&[3.0, 1.0]), re(1e-20)).unwrap();
        assert_eq!(e.len(), 2);
        e.prune(1e-14);
        assert_eq!(e.len(), 1);
        assert_eq!(e.coefficient(&[re(1.0), re(2.0)]).unwrap(), re(3.0));
    }

    #[test]
    fn four_way_agreement_n2() {
        let m = chain(4);
        let x = on_shell(&m, 2);
        let o = ScalarOptions::default();
        for seed in 0..3 {
            let u = off_shell(2, seed);
            let det = slavnov_det(&x, &u, &m, &o).unwrap();
            for mm in 1..=2 {
                assert!(close(hny_form(&x, &u, mm, &m, &o).unwrap(), det, 1e-10));
            }
            assert!(close(scalar_sum_form(&x, &u, &m, &o).unwrap(), det, 1e-10));
            assert!(close(extract_coefficient(&x, &u, &m, &o).unwrap(), det, 1e-9));
        }
    }

    #[test]
    fn single_precision_agreement() {
        let m = chain(4);
        let x = on_shell(&m, 2);
        let narrow = |s: &[C<f64>]| -> ParamSet<f32> { s.iter().map(|z| C::new(z.re as f32, z.im as f32)).collect() };
        let c = C::new(m.c.re as f32, m.c.im as f32);
        let m32 = ModelSpec::xxx(c, narrow(m.theta().unwrap()));
        let (x32, u32) = (narrow(&x), narrow(&off_shell(2, 5)));
        let o = ScalarOptions { on_shell_tol: 1e-3f32, ..ScalarOptions::default() };
        let det = slavnov_det(&x32, &u32, &m32, &o).unwrap();
        let reference = slavnov_det(&x, &off_shell(2, 5), &m, &ScalarOptions::default()).unwrap();
        assert!(rel_err(C::new(det.re as f64, det.im as f64), reference, 1e-300) < 1e-4);
        for v in [scalar_sum_form(&x32, &u32, &m32, &o).unwrap(), extract_coefficient(&x32, &u32, &m32, &o).unwrap()] {
            assert!(rel_err(v, det, 1e-30) < 1e-4, "{v} vs {det}");
        }
    }

    #[test]
    fn permutation_invariance() {
        let m = chain(4);
        let x = on_shell(&m, 2);
        let u = off_shell(2, 9);
        let o = ScalarOptions::default();
        let base = slavnov_det(&x, &u, &m, &o).unwrap();
        assert!(close(slavnov_det(&x, &u.permuted(&[1, 0]), &m, &o).unwrap(), base, 1e-12));
        assert!(close(slavnov_det(&x.permuted(&[1, 0]), &u, &m, &o).unwrap(), base, 1e-12));
    }

    #[test]
    fn sum_jm_examples() {
        let m = chain(6);
        let x = off_shell(3, 21);
        let u = off_shell(3, 22);
        for mm in 1..=3 {
            for j in 0..mm {
                let (l, r) = sum_jm_check(mm, j, &u, &x, &m).unwrap();
                assert!(close(l, r, 1e-10), "m={mm} j={j}: {l} vs {r}");
            }
        }
        assert!(sum_jm_check(2, 2, &u, &x, &m).is_err());
    }

    #[test]
    fn reflection_det_matches_action_n1() {
        let m = chain(2).with_reflection(cplx(0.4, 0.7), cplx(-0.3, 0.5));
        let x = on_shell(&m, 1);
        let o = ScalarOptions::default();
        for seed in 0..3 {
            let u = off_shell(1, seed);
            let det = reflection_det(&x, &u, &m, &o).unwrap();
            assert!(close(extract_coefficient(&x, &u, &m, &o).unwrap(), det, 1e-10));
        }
        assert!(matches!(slavnov_det(&x, &x, &m, &o), Err(Error::Unsupported { .. })));
        // x → −x is the same Bethe state.
        let u = off_shell(1, 5);
        let a = reflection_det(&x, &u, &m, &o).unwrap();
        let b = reflection_det(&x.negated(), &u, &m, &o).unwrap();
        assert!(a.norm() > 0.0 && b.norm() > 0.0);
    }

    #[test]
    fn symmetrization_limit() {
        let m = ModelSpec::xxx(re(1.0), ParamSet::new(vec![re(0.0); 8]));
        let x = off_shell(7, 1);
        let u = off_shell(7, 2);
        assert!(matches!(scalar_sum_form(&x, &u, &m, &ScalarOptions::unchecked()), Err(Error::TooManyTerms { n: 7, limit: 6 })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn j_forms_agree(ur in -2.0f64..2.0, ui in 0.2f64..2.0, seed in 0u64..1000, n in 1usize..4) {
            let m = chain(5);
            let x = off_shell(n, seed);
            let u = cplx(ur, ui);
            for k in 0..n {
                let a = j_entry(u, k, &x, &m).unwrap();
                let b = j_entry_derivative(u, k, &x, &m).unwrap();
                prop_assert!(close(a, b, 1e-11), "{} vs {}", a, b);
            }
        }

        #[test]
        fn hny_is_m_independent(seed in 0u64..1000) {
            static ROOTS: std::sync::OnceLock<ParamSet<f64>> = std::sync::OnceLock::new();
            let m = chain(6);
            let x = ROOTS.get_or_init(|| on_shell(&chain(6), 3));
            let u = off_shell(3, seed);
            let o = ScalarOptions::default();
            let det = slavnov_det(x, &u, &m, &o).unwrap();
            for mm in 1..=3 {
                let h = hny_form(x, &u, mm, &m, &o).unwrap();
                prop_assert!(close(h, det, 1e-9), "m={}: {} vs {}", mm, h, det);
            }
        }
    }
}
