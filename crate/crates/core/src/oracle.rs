//! Brute-force spin chain on `(ℂ²)^⊗N`: L-operators, monodromy and
//! double-row monodromy as dense blocks, literal Bethe vectors, bilinear
//! pairing, and residual checks of the algebra relations.
//!
//! Basis index bit `N−1−k` encodes site `k` (0 = spin up); the vacuum is
//! index 0. `L_k(w)_{ab} = w δ_{ab} + c e_{ba}^{(k)}` and
//! `T(u) = L_N(u−θ_N)⋯L_1(u−θ_1)`.

use std::io::{self, Read, Write};

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::ParamSet;
use crate::linalg::{rank, Matrix};
use crate::model::{Boundary, BoundaryMode, ModelSpec};
use crate::real::Real;
use crate::scalar_product::single_action;

type C<T> = Complex<T>;

/// Largest chain the dense oracle will build.
pub const MAX_SITES: usize = 12;

fn zero<T: Real>() -> C<T> {
    C::new(T::zero(), T::zero())
}

fn one<T: Real>() -> C<T> {
    C::new(T::one(), T::zero())
}

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator<T> {
    dim: usize,
    data: Vec<C<T>>,
}

impl<T: Real> DenseOperator<T> {
    pub fn zeros(dim: usize) -> Self {
        DenseOperator { dim, data: vec![zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = one();
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> C<T> {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C<T>) {
        self.data[i * self.dim + j] = v;
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[C<T>] {
        &self.data
    }

    /// `a·self + b·other`
    pub fn combine(&self, a: C<T>, other: &Self, b: C<T>) -> Self {
        assert_eq!(self.dim, other.dim);
        DenseOperator { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(&x, &y)| a * x + b * y).collect() }
    }

    pub fn scale(&self, a: C<T>) -> Self {
        DenseOperator { dim: self.dim, data: self.data.iter().map(|&x| a * x).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(one(), other, one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(one(), other, -one::<T>())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.dim;
        assert_eq!(n, other.dim);
        let mut out = vec![zero(); n * n];
        out.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == zero() {
                    continue;
                }
                let src = &other.data[k * n..(k + 1) * n];
                for (o, &b) in row.iter_mut().zip(src) {
                    *o += a * b;
                }
            }
        });
        DenseOperator { dim: n, data: out }
    }

    /// `[self, other]`
    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other).sub(&other.matmul(self))
    }

    /// Frobenius norm.
    pub fn norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// `self · v`
    pub fn apply(&self, v: &StateVector<T>) -> StateVector<T> {
        assert_eq!(self.dim, v.amps.len());
        let n = self.dim;
        let amps = (0..n)
            .map(|i| self.data[i * n..(i + 1) * n].iter().zip(&v.amps).fold(zero(), |acc, (&a, &b)| acc + a * b))
            .collect();
        StateVector { n_sites: v.n_sites, amps }
    }

    /// `v · self` (row vector on the left).
    pub fn apply_left(&self, v: &StateVector<T>) -> StateVector<T> {
        assert_eq!(self.dim, v.amps.len());
        let n = self.dim;
        let mut amps = vec![zero(); n];
        for (i, &vi) in v.amps.iter().enumerate() {
            if vi == zero() {
                continue;
            }
            for (o, &a) in amps.iter_mut().zip(&self.data[i * n..(i + 1) * n]) {
                *o += vi * a;
            }
        }
        StateVector { n_sites: v.n_sites, amps }
    }

    /// `E_{ab}^{(k)} · self` on an `n_sites` chain: keeps rows whose site-`k`
    /// spin is `a`, filled from the row with that spin set to `b`.
    fn site_left(&self, k: usize, a: usize, b: usize, n_sites: usize) -> Self {
        let bit = 1usize << (n_sites - 1 - k);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            if ((i & bit) != 0) as usize != a {
                continue;
            }
            let src = if b == 1 { i | bit } else { i & !bit };
            out.data[i * n..(i + 1) * n].copy_from_slice(&self.data[src * n..(src + 1) * n]);
        }
        out
    }
}

/// A vector in `(ℂ²)^⊗N`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T> {
    n_sites: usize,
    amps: Vec<C<T>>,
}

impl<T: Real> StateVector<T> {
    /// All spins up.
    pub fn vacuum(n_sites: usize) -> Self {
        let mut amps = vec![zero(); 1 << n_sites];
        amps[0] = one();
        StateVector { n_sites, amps }
    }

    pub fn from_amplitudes(n_sites: usize, amps: Vec<C<T>>) -> Result<Self> {
        if amps.len() != 1 << n_sites {
            return Err(Error::DimensionMismatch { left: 1 << n_sites, right: amps.len() });
        }
        Ok(StateVector { n_sites, amps })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amps
    }

    pub fn norm(&self) -> T {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn combine(&self, a: C<T>, other: &Self, b: C<T>) -> Self {
        assert_eq!(self.amps.len(), other.amps.len());
        StateVector {
            n_sites: self.n_sites,
            amps: self.amps.iter().zip(&other.amps).map(|(&x, &y)| a * x + b * y).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(one(), other, -one::<T>())
    }

    pub fn scale(&self, a: C<T>) -> Self {
        StateVector { n_sites: self.n_sites, amps: self.amps.iter().map(|&x| a * x).collect() }
    }

    /// Norm of the components outside the `n_down` sector.
    pub fn sector_leak(&self, n_down: usize) -> T {
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i.count_ones() as usize != n_down)
            .map(|(_, z)| z.norm_sqr())
            .sum::<T>()
            .sqrt()
    }
}

/// `⟨dual, vec⟩ = Σ dual_i vec_i`, bilinear (no conjugation).
pub fn inner_product<T: Real>(dual: &StateVector<T>, vec: &StateVector<T>) -> Result<C<T>> {
    if dual.amps.len() != vec.amps.len() {
        return Err(Error::DimensionMismatch { left: dual.amps.len(), right: vec.amps.len() });
    }
    Ok(dual.amps.iter().zip(&vec.amps).fold(zero(), |acc, (&a, &b)| acc + a * b))
}

/// A 2×2 array of operators on the physical space.
pub type Blocks<T> = [[DenseOperator<T>; 2]; 2];

/// `R(u,v) = 𝟙 + g(u,v) P` on `ℂ²⊗ℂ²`, index `2a + b`.
pub fn build_r_matrix<T: Real>(u: C<T>, v: C<T>, c: C<T>) -> Result<DenseOperator<T>> {
    let g = crate::kernels::Kernels::new(c).g(u, v)?;
    Ok(r_from_g(g))
}

fn r_from_g<T: Real>(g: C<T>) -> DenseOperator<T> {
    DenseOperator::from_fn(4, |i, j| {
        let (a, b) = (i / 2, i % 2);
        let id: C<T> = if i == j { one() } else { zero() };
        let p = if j == 2 * b + a { g } else { zero() };
        id + p
    })
}

fn theta_of<T: Real>(model: &ModelSpec<T>) -> Result<&ParamSet<T>> {
    let theta = model.theta().ok_or_else(|| Error::unsupported("dense oracle", "an xxx realization"))?;
    if theta.len() > MAX_SITES {
        return Err(Error::DimensionCap { sites: theta.len(), cap: MAX_SITES });
    }
    Ok(theta)
}

/// Number of sites of the chain realizing `model`.
pub fn n_sites<T: Real>(model: &ModelSpec<T>) -> Result<usize> {
    theta_of(model).map(|t| t.len())
}

/// Blocks `T_{ab}(u)` of the monodromy matrix.
pub fn build_monodromy<T: Real>(model: &ModelSpec<T>, u: C<T>) -> Result<Blocks<T>> {
    let theta = theta_of(model)?;
    let n = theta.len();
    let dim = 1usize << n;
    let mut t = [
        [DenseOperator::identity(dim), DenseOperator::zeros(dim)],
        [DenseOperator::zeros(dim), DenseOperator::identity(dim)],
    ];
    for (k, &th) in theta.iter().enumerate() {
        let w = u - th;
        // (L T)_{ab} = w T_{ab} + c Σ_d e_{da} T_{db}
        let next = |a: usize, b: usize| {
            let mut acc = t[a][b].scale(w);
            for d in 0..2 {
                acc = acc.add(&t[d][b].site_left(k, d, a, n).scale(model.c));
            }
            acc
        };
        t = [[next(0, 0), next(0, 1)], [next(1, 0), next(1, 1)]];
    }
    Ok(t)
}

/// Blocks of `𝒯(u) = T(u) K(u − c/2, ξ₋) σ₂ Tᵗ(−u) σ₂`.
pub fn build_double_row<T: Real>(model: &ModelSpec<T>, u: C<T>) -> Result<Blocks<T>> {
    let Boundary::Reflection { xi_minus, .. } = model.boundary else {
        return Err(Error::unsupported("double-row monodromy", "reflection boundary parameters"));
    };
    let t = build_monodromy(model, u)?;
    let m = build_monodromy(model, -u)?;
    let hc = model.c * T::lit(0.5);
    let k = [xi_minus + u - hc, xi_minus - u + hc];
    // σ₂ Tᵗ(−u) σ₂ = [[T₂₂, −T₁₂], [−T₂₁, T₁₁]](−u)
    let neg = -one::<T>();
    let dual = [[m[1][1].clone(), m[0][1].scale(neg)], [m[1][0].scale(neg), m[0][0].clone()]];
    let entry = |a: usize, b: usize| {
        t[a][0].matmul(&dual[0][b]).combine(k[0], &t[a][1].matmul(&dual[1][b]), k[1])
    };
    Ok([[entry(0, 0), entry(0, 1)], [entry(1, 0), entry(1, 1)]])
}

/// `t(u) = T₁₁ + T₂₂` or `t̂(u) = (ξ₊+u+c/2)𝒯₁₁ + (ξ₊−u−c/2)𝒯₂₂`.
pub fn transfer_operator<T: Real>(model: &ModelSpec<T>, u: C<T>) -> Result<DenseOperator<T>> {
    match model.boundary {
        Boundary::Periodic => {
            let t = build_monodromy(model, u)?;
            Ok(t[0][0].add(&t[1][1]))
        }
        Boundary::Reflection { xi_plus, .. } => {
            let t = build_double_row(model, u)?;
            let hc = model.c * T::lit(0.5);
            Ok(t[0][0].combine(xi_plus + u + hc, &t[1][1], xi_plus - u - hc))
        }
    }
}

fn blocks_for<T: Real>(model: &ModelSpec<T>, u: C<T>) -> Result<Blocks<T>> {
    match model.mode() {
        BoundaryMode::Periodic => build_monodromy(model, u),
        BoundaryMode::Reflection => build_double_row(model, u),
    }
}

/// `B(ū) = T₁₂(u₁)⋯T₁₂(u_n)|0⟩`, or the `𝒯₁₂` analogue in reflection mode.
pub fn bethe_vector<T: Real>(set: &[C<T>], model: &ModelSpec<T>) -> Result<StateVector<T>> {
    let mut v = StateVector::vacuum(n_sites(model)?);
    for &u in set.iter().rev() {
        v = blocks_for(model, u)?[0][1].apply(&v);
    }
    Ok(v)
}

/// `C(v̄) = ⟨0|T₂₁(v₁)⋯T₂₁(v_n)`, or the `𝒯₂₁` analogue in reflection mode.
pub fn dual_bethe_vector<T: Real>(set: &[C<T>], model: &ModelSpec<T>) -> Result<StateVector<T>> {
    let mut v = StateVector::vacuum(n_sites(model)?);
    for &u in set {
        v = blocks_for(model, u)?[1][0].apply_left(&v);
    }
    Ok(v)
}

/// `‖t(z)B(ū) − τ(z|ū)B(ū)‖ / ‖B(ū)‖`
pub fn eigenvector_residual<T: Real>(model: &ModelSpec<T>, set: &[C<T>], z: C<T>) -> Result<T> {
    let b = bethe_vector(set, model)?;
    let tb = transfer_operator(model, z)?.apply(&b);
    let tau = model.tau(z, set)?;
    Ok(tb.sub(&b.scale(tau)).norm() / b.norm())
}

/// Literal `t(z)B(ū)` resolved on `B(ū), B({z, ū₁}), …, B({z, ū_n})` and
/// compared against the single-action coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionCheck<T> {
    pub fitted: Vec<C<T>>,
    pub formula: Vec<C<T>>,
    /// Largest `|fitted − formula| / max|formula|`.
    pub max_rel_err: T,
    /// `‖t(z)B(ū) − Σ formula_k basis_k‖ / ‖t(z)B(ū)‖`
    pub residual: T,
}

pub fn check_single_action<T: Real>(model: &ModelSpec<T>, z: C<T>, set: &ParamSet<T>) -> Result<ActionCheck<T>> {
    let (diag, off) = single_action(z, set, model)?;
    let mut formula = vec![diag];
    formula.extend(off);
    let mut basis = vec![bethe_vector(set, model)?];
    for j in 0..set.len() {
        basis.push(bethe_vector(&set.without(j).with_front(z), model)?);
    }
    let lhs = transfer_operator(model, z)?.apply(&basis[0]);

    // Least squares through the Hermitian normal equations.
    let k = basis.len();
    let herm = |a: &StateVector<T>, b: &StateVector<T>| {
        a.amps.iter().zip(&b.amps).fold(zero::<T>(), |acc, (x, &y)| acc + x.conj() * y)
    };
    let gram = Matrix::from_fn(k, |i, j| herm(&basis[i], &basis[j]));
    let rhs: Vec<_> = basis.iter().map(|b| herm(b, &lhs)).collect();
    let fitted = gram.lu().solve(&rhs)?;

    let scale = formula.iter().map(|z| z.norm()).fold(T::zero(), T::max).max(T::min_positive_value());
    let max_rel_err = fitted.iter().zip(&formula).map(|(a, b)| (a - b).norm() / scale).fold(T::zero(), T::max);
    let mut recon = basis[0].scale(formula[0]);
    for (b, &f) in basis.iter().zip(&formula).skip(1) {
        recon = recon.combine(one(), b, f);
    }
    let residual = lhs.sub(&recon).norm() / lhs.norm();
    Ok(ActionCheck { fitted, formula, max_rel_err, residual })
}

/// Relative residuals of the algebraic relations at a pair of points.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraReport<T> {
    pub rtt: T,
    pub reflection_minus: T,
    pub reflection_plus: T,
    pub vacuum: T,
    pub vacuum_reflection: Option<T>,
    pub commute_periodic: T,
    pub commute_reflection: Option<T>,
    /// Single-action check with `z = u` on `ū = {v, −v/2 + c/3}` (truncated to `N`).
    pub action: T,
}

impl<T: Real> AlgebraReport<T> {
    pub fn max(&self) -> T {
        [self.rtt, self.reflection_minus, self.reflection_plus, self.vacuum, self.commute_periodic, self.action]
            .into_iter()
            .chain(self.vacuum_reflection)
            .chain(self.commute_reflection)
            .fold(T::zero(), T::max)
    }
}

pub fn check_algebra<T: Real>(model: &ModelSpec<T>, u: C<T>, v: C<T>) -> Result<AlgebraReport<T>> {
    let periodic = model.periodic();
    let n = n_sites(model)?;
    let tu = build_monodromy(model, u)?;
    let tv = build_monodromy(model, v)?;
    let rtt = rtt_residual(&tu, &tv, crate::kernels::Kernels::new(model.c).g(u, v)?);
    let (reflection_minus, reflection_plus) = reflection_residuals(model, u, v)?;

    let vac = StateVector::vacuum(n);
    let (l1, l2) = (model.lambda1(u)?, model.lambda2(u)?);
    let vscale = l1.norm() + l2.norm();
    let vacuum = [
        tu[0][0].apply(&vac).sub(&vac.scale(l1)).norm(),
        tu[1][1].apply(&vac).sub(&vac.scale(l2)).norm(),
        tu[1][0].apply(&vac).norm(),
    ]
    .into_iter()
    .fold(T::zero(), T::max)
        / vscale;

    let vacuum_reflection = match model.mode() {
        BoundaryMode::Reflection => Some(vacuum_reflection_residual(model, u)?),
        BoundaryMode::Periodic => None,
    };
    let commute = |m: &ModelSpec<T>| -> Result<T> {
        let a = transfer_operator(m, u)?;
        let b = transfer_operator(m, v)?;
        Ok(a.commutator(&b).norm() / (a.norm() * b.norm()))
    };
    let commute_periodic = commute(&periodic)?;
    let commute_reflection = match model.mode() {
        BoundaryMode::Reflection => Some(commute(model)?),
        BoundaryMode::Periodic => None,
    };
    let probe: ParamSet<T> = [v, -v * T::lit(0.5) + model.c / T::lit(3.0)].into_iter().take(n.min(2)).collect();
    let act = check_single_action(model, u, &probe)?;
    Ok(AlgebraReport {
        rtt,
        reflection_minus,
        reflection_plus,
        vacuum,
        vacuum_reflection,
        commute_periodic,
        commute_reflection,
        action: act.max_rel_err.max(act.residual),
    })
}

/// `‖R T⁽¹⁾(u) T⁽²⁾(v) − T⁽²⁾(v) T⁽¹⁾(u) R‖ / ‖R T⁽¹⁾ T⁽²⁾‖` with `R = 𝟙 + gP`.
fn rtt_residual<T: Real>(tu: &Blocks<T>, tv: &Blocks<T>, g: C<T>) -> T {
    let r = r_from_g(g);
    let dim = tu[0][0].dim();
    let idx = |a: usize, b: usize| 2 * a + b;
    // (T1T2)_{(cd),(a'b')} = T_{ca'}(u) T_{db'}(v); (T2T1) likewise in the other order.
    let mut t12 = Vec::with_capacity(16);
    let mut t21 = Vec::with_capacity(16);
    for row in 0..4 {
        for col in 0..4 {
            let (c, d, a, b) = (row / 2, row % 2, col / 2, col % 2);
            t12.push(tu[c][a].matmul(&tv[d][b]));
            t21.push(tv[d][b].matmul(&tu[c][a]));
        }
    }
    let mut diff = T::zero();
    let mut scale = T::zero();
    for row in 0..4 {
        for col in 0..4 {
            let mut lhs = DenseOperator::zeros(dim);
            let mut rhs = DenseOperator::zeros(dim);
            for k in 0..4 {
                lhs = lhs.combine(one(), &t12[idx(k / 2, k % 2) * 4 + col], r.get(row, k));
                rhs = rhs.combine(one(), &t21[row * 4 + k], r.get(k, col));
            }
            diff += lhs.sub(&rhs).norm().powi(2);
            scale += lhs.norm().powi(2);
        }
    }
    diff.sqrt() / scale.sqrt()
}

fn kron2<T: Real>(a: [C<T>; 2], left: bool) -> DenseOperator<T> {
    DenseOperator::from_fn(4, |i, j| {
        if i != j {
            return zero();
        }
        if left {
            a[i / 2]
        } else {
            a[i % 2]
        }
    })
}

/// Both reflection equations on diagonal `K₋(u) = K(u, ξ₋)`, `K₊(u) = K(u + c, ξ₊)`
/// as 4×4 identities; `R(w) = 𝟙 + (c/w)P`. Uses unit `ξ` in periodic mode.
fn reflection_residuals<T: Real>(model: &ModelSpec<T>, u1: C<T>, u2: C<T>) -> Result<(T, T)> {
    let (xm, xp) = match model.boundary {
        Boundary::Reflection { xi_minus, xi_plus } => (xi_minus, xi_plus),
        Boundary::Periodic => (one(), one()),
    };
    let c = model.c;
    let r = |w: C<T>| -> Result<DenseOperator<T>> {
        if w.norm() <= model.collision_tol {
            return Err(Error::pole("R", format!("R(w) at w = {w}")));
        }
        Ok(r_from_g(c / w))
    };
    let k = |u: C<T>, xi: C<T>| [xi + u, xi - u];
    let rel = |l: DenseOperator<T>, rr: DenseOperator<T>| l.sub(&rr).norm() / l.norm();

    let (k1, k2) = (kron2(k(u1, xm), true), kron2(k(u2, xm), false));
    let lhs = r(u1 - u2)?.matmul(&k1).matmul(&r(u1 + u2)?).matmul(&k2);
    let rhs = k2.matmul(&r(u1 + u2)?).matmul(&k1).matmul(&r(u1 - u2)?);
    let minus = rel(lhs, rhs);

    let (p1, p2) = (kron2(k(u1 + c, xp), true), kron2(k(u2 + c, xp), false));
    let two_c = c * T::lit(2.0);
    let lhs = r(u2 - u1)?.matmul(&p1).matmul(&r(-u1 - u2 - two_c)?).matmul(&p2);
    let rhs = p2.matmul(&r(-u1 - u2 - two_c)?).matmul(&p1).matmul(&r(u2 - u1)?);
    Ok((minus, rel(lhs, rhs)))
}

/// Vacuum eigenvalues of `𝒯₁₁`, `𝒯₂₂` and `𝒯₂₁|0⟩ = 0`:
/// `𝒯₁₁ → (u+ξ₋−c/2)λ₁(u)λ₂(−u)`,
/// `𝒯₂₂ → (c−2u)/(2u)(u−ξ₋+c/2)λ₁(−u)λ₂(u) + c(u+ξ₋−c/2)/(2u)λ₁(u)λ₂(−u)`.
fn vacuum_reflection_residual<T: Real>(model: &ModelSpec<T>, u: C<T>) -> Result<T> {
    let Boundary::Reflection { xi_minus, .. } = model.boundary else {
        return Err(Error::unsupported("reflection vacuum", "reflection boundary parameters"));
    };
    let c = model.c;
    let hc = c * T::lit(0.5);
    let two_u = u * T::lit(2.0);
    let plus = model.lambda1(u)? * model.lambda2(-u)?;
    let minus = model.lambda1(-u)? * model.lambda2(u)?;
    let e11 = (u + xi_minus - hc) * plus;
    let e22 = (c - two_u) / two_u * (u - xi_minus + hc) * minus + c * (u + xi_minus - hc) / two_u * plus;
    let t = build_double_row(model, u)?;
    let vac = StateVector::vacuum(n_sites(model)?);
    let scale = e11.norm() + e22.norm();
    Ok([
        t[0][0].apply(&vac).sub(&vac.scale(e11)).norm(),
        t[1][1].apply(&vac).sub(&vac.scale(e22)).norm(),
        t[1][0].apply(&vac).norm(),
    ]
    .into_iter()
    .fold(T::zero(), T::max)
        / scale)
}

/// Basis indices with exactly `n_down` down spins, ascending.
pub fn sector_indices(n_sites: usize, n_down: usize) -> Vec<usize> {
    (0..1usize << n_sites).filter(|i| i.count_ones() as usize == n_down).collect()
}

/// Total raising operator `S⁺ = Σ_k e_{12}^{(k)}` (flips one down spin up).
pub fn raising_operator<T: Real>(n_sites: usize) -> Result<DenseOperator<T>> {
    if n_sites > MAX_SITES {
        return Err(Error::DimensionCap { sites: n_sites, cap: MAX_SITES });
    }
    let dim = 1usize << n_sites;
    let mut s = DenseOperator::zeros(dim);
    for k in 0..n_sites {
        let bit = 1usize << (n_sites - 1 - k);
        for j in (0..dim).filter(|j| j & bit != 0) {
            s.set(j & !bit, j, one());
        }
    }
    Ok(s)
}

/// Number of highest-weight states (`S⁺ψ = 0`) with `n_down` down spins;
/// these are the states reachable by regular Bethe vectors.
pub fn highest_weight_count(n_sites: usize, n_down: usize) -> Result<usize> {
    let s = raising_operator::<f64>(n_sites)?;
    let cols = sector_indices(n_sites, n_down);
    if n_down == 0 {
        return Ok(1);
    }
    let rows = sector_indices(n_sites, n_down - 1);
    let data: Vec<_> = rows.iter().flat_map(|&i| cols.iter().map(move |&j| (i, j))).map(|(i, j)| s.get(i, j)).collect();
    Ok(cols.len() - rank(rows.len(), cols.len(), &data, 1e-12))
}

/// Numerical rank of a family of states.
pub fn state_rank<T: Real>(states: &[StateVector<T>], rel_tol: T) -> usize {
    let Some(first) = states.first() else { return 0 };
    let cols = first.dim();
    let data: Vec<_> = states.iter().flat_map(|s| s.amps.iter().copied()).collect();
    rank(states.len(), cols, &data, rel_tol)
}

const DUMP_MAGIC: &[u8; 4] = b"BETH";

/// Decoded binary dump: a `rows × cols` complex array.
#[derive(Debug, Clone, PartialEq)]
pub struct Dump {
    pub n_sites: u32,
    pub rows: u32,
    pub cols: u32,
    pub mode: BoundaryMode,
    pub data: Vec<Complex<f64>>,
}

/// Layout: `"BETH"`, `u32` N, `u32` rows, `u32` cols, `u8` mode
/// (0 periodic, 1 reflection), then row-major `f64` (re, im) pairs;
/// everything little-endian.
fn write_raw<W: Write, T: Real>(w: &mut W, n_sites: usize, rows: usize, cols: usize, mode: BoundaryMode, data: &[C<T>]) -> io::Result<()> {
    w.write_all(DUMP_MAGIC)?;
    for x in [n_sites, rows, cols] {
        w.write_all(&(x as u32).to_le_bytes())?;
    }
    w.write_all(&[match mode {
        BoundaryMode::Periodic => 0u8,
        BoundaryMode::Reflection => 1u8,
    }])?;
    for z in data {
        w.write_all(&z.re.to_f64_lossy().to_le_bytes())?;
        w.write_all(&z.im.to_f64_lossy().to_le_bytes())?;
    }
    Ok(())
}

pub fn write_operator<W: Write, T: Real>(w: &mut W, n_sites: usize, mode: BoundaryMode, op: &DenseOperator<T>) -> io::Result<()> {
    write_raw(w, n_sites, op.dim, op.dim, mode, &op.data)
}

pub fn write_state<W: Write, T: Real>(w: &mut W, mode: BoundaryMode, state: &StateVector<T>) -> io::Result<()> {
    write_raw(w, state.n_sites, state.amps.len(), 1, mode, &state.amps)
}

pub fn read_dump<R: Read>(r: &mut R) -> io::Result<Dump> {
    let bad = |msg: &str| io::Error::new(io::ErrorKind::InvalidData, msg.to_string());
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != DUMP_MAGIC {
        return Err(bad("not an operator dump"));
    }
    let mut word = [0u8; 4];
    let mut next_u32 = |r: &mut R| -> io::Result<u32> {
        r.read_exact(&mut word)?;
        Ok(u32::from_le_bytes(word))
    };
    let n_sites = next_u32(r)?;
    let rows = next_u32(r)?;
    let cols = next_u32(r)?;
    let mut m = [0u8; 1];
    r.read_exact(&mut m)?;
    let mode = match m[0] {
        0 => BoundaryMode::Periodic,
        1 => BoundaryMode::Reflection,
        _ => return Err(bad("unknown boundary mode")),
    };
    let mut data = Vec::with_capacity(rows as usize * cols as usize);
    let mut buf = [0u8; 8];
    for _ in 0..rows as usize * cols as usize {
        r.read_exact(&mut buf)?;
        let re = f64::from_le_bytes(buf);
        r.read_exact(&mut buf)?;
        data.push(Complex::new(re, f64::from_le_bytes(buf)));
    }
    Ok(Dump { n_sites, rows, cols, mode, data })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::{cplx, re};
    use crate::solver::{solve_bethe, SolveConfig};

    fn chain(n: usize) -> ModelSpec<f64> {
        let th = [cplx(0.1, 0.2), cplx(-0.3, 0.05), cplx(0.25, -0.15), cplx(-0.05, -0.3), cplx(0.4, 0.1), cplx(-0.2, 0.35)];
        ModelSpec::xxx(cplx(1.0, 0.3), ParamSet::new(th[..n].to_vec()))
    }

    fn open_chain(n: usize) -> ModelSpec<f64> {
        chain(n).with_reflection(cplx(0.4, 0.7), cplx(-0.3, 0.5))
    }

    #[test]
    fn r_matrix_examples() {
        let c = re(1.0);
        let r = build_r_matrix(re(1.0), re(0.0), c).unwrap();
        // 𝟙 + P: rank 3 (kills the antisymmetric singlet).
        assert_eq!(rank(4, 4, r.entries(), 1e-12), 3);
        let far = build_r_matrix(re(1e9), re(0.0), c).unwrap();
        assert!(far.sub(&DenseOperator::identity(4)).norm() < 1e-8);
        let (u, v) = (cplx(0.3, 0.2), cplx(-0.4, 0.9));
        let g = c / (u - v);
        let prod = build_r_matrix(u, v, c).unwrap().matmul(&build_r_matrix(v, u, c).unwrap());
        let expect = DenseOperator::identity(4).scale(one::<f64>() - g * g);
        assert!(prod.sub(&expect).norm() < 1e-14);
        assert!(build_r_matrix(u, u, c).is_err());
    }

    #[test]
    fn single_site_vacuum() {
        let m = ModelSpec::xxx(re(1.0), ParamSet::from_reals(&[0.0]));
        let u = cplx(0.7, -0.2);
        let t = build_monodromy(&m, u).unwrap();
        let vac = StateVector::vacuum(1);
        assert!(t[0][0].apply(&vac).sub(&vac.scale(u + 1.0)).norm() < 1e-15);
        assert!(t[1][1].apply(&vac).sub(&vac.scale(u)).norm() < 1e-15);
        assert_eq!(t[1][0].apply(&vac).norm(), 0.0);
    }

    #[test]
    fn algebra_relations_hold() {
        for m in [chain(3), open_chain(3)] {
            let rep = check_algebra(&m, cplx(0.31, 0.42), cplx(-0.57, 0.13)).unwrap();
            assert!(rep.max() < 1e-11, "{rep:?}");
        }
    }

    #[test]
    fn creation_operators_commute() {
        let m = chain(3);
        let (a, b) = (build_monodromy(&m, cplx(0.2, 0.1)).unwrap(), build_monodromy(&m, cplx(-0.6, 0.4)).unwrap());
        let comm = a[0][1].commutator(&b[0][1]);
        assert!(comm.norm() < 1e-12 * a[0][1].norm() * b[0][1].norm());
    }

    #[test]
    fn bethe_vectors_are_symmetric_and_graded() {
        for m in [chain(4), open_chain(3)] {
            let (u1, u2) = (cplx(0.3, 0.5), cplx(-0.8, 0.2));
            let a = bethe_vector(&[u1, u2], &m).unwrap();
            let b = bethe_vector(&[u2, u1], &m).unwrap();
            assert!(a.sub(&b).norm() < 1e-12 * a.norm());
            assert!(a.sector_leak(2) < 1e-13 * a.norm());
            let d = dual_bethe_vector(&[u1], &m).unwrap();
            assert!(d.sector_leak(1) < 1e-13 * d.norm());
            assert_eq!(inner_product(&d, &a).unwrap(), zero());
        }
        let vac = StateVector::<f64>::vacuum(2);
        assert_eq!(inner_product(&vac, &vac).unwrap(), one());
        assert!(inner_product(&vac, &StateVector::vacuum(3)).is_err());
    }

    #[test]
    fn n1_inner_product_closed_form() {
        // ⟨0|T₂₁(x)T₁₂(u)|0⟩ = g(x,u)(λ₁(u)λ₂(x) − λ₁(x)λ₂(u)).
        let m = ModelSpec::<f64>::xxx(re(1.0), ParamSet::from_reals(&[0.0, 0.0]));
        let (x, u) = (re(-0.5), re(1.0));
        let s = inner_product(&dual_bethe_vector(&[x], &m).unwrap(), &bethe_vector(&[u], &m).unwrap()).unwrap();
        let l = |z| (m.lambda1(z).unwrap(), m.lambda2(z).unwrap());
        let ((l1u, l2u), (l1x, l2x)) = (l(u), l(x));
        let expect = re::<f64>(1.0) / (x - u) * (l1u * l2x - l1x * l2u);
        assert!((s - expect).norm() < 1e-14);
        // On-shell this is λ₂(x)·J(u,x) = 0.25·(−2).
        assert!((s - re(-0.5)).norm() < 1e-14);
    }

    #[test]
    fn single_action_matches_literal_action() {
        let set = ParamSet::new(vec![cplx(0.3, 0.5), cplx(-0.8, 0.2)]);
        let rep = check_single_action(&chain(4), cplx(0.45, -0.35), &set).unwrap();
        assert!(rep.max_rel_err < 1e-10 && rep.residual < 1e-10, "{rep:?}");
        let rep = check_single_action(&open_chain(2), cplx(0.45, -0.35), &ParamSet::new(vec![cplx(0.3, 0.5)])).unwrap();
        assert!(rep.max_rel_err < 1e-10 && rep.residual < 1e-10, "{rep:?}");
    }

    #[test]
    fn on_shell_vectors_are_eigenvectors() {
        let m = chain(4);
        let roots = solve_bethe(&m, &SolveConfig { seeds: 60, ..SolveConfig::new(2) }).unwrap();
        for r in &roots {
            assert!(eigenvector_residual(&m, &r.roots, cplx(0.6, 0.9)).unwrap() < 1e-9);
        }
    }

    #[test]
    fn highest_weight_counts() {
        // dim of spin-(N/2 − n) multiplet-tops: C(N,n) − C(N,n−1)
        assert_eq!(highest_weight_count(4, 2).unwrap(), 2);
        assert_eq!(highest_weight_count(4, 1).unwrap(), 3);
        assert_eq!(highest_weight_count(6, 3).unwrap(), 5);
        assert_eq!(highest_weight_count(2, 0).unwrap(), 1);
    }

    #[test]
    fn dimension_cap() {
        let m = ModelSpec::<f64>::xxx(re(1.0), ParamSet::new(vec![re(0.0); 13]));
        assert!(matches!(bethe_vector(&[], &m), Err(Error::DimensionCap { sites: 13, cap: 12 })));
    }

    #[test]
    fn dump_round_trip() {
        let op = transfer_operator(&chain(2), cplx(0.2, 0.7)).unwrap();
        let mut buf = Vec::new();
        write_operator(&mut buf, 2, BoundaryMode::Periodic, &op).unwrap();
        assert_eq!(buf.len(), 4 + 12 + 1 + 16 * 16);
        let d = read_dump(&mut buf.as_slice()).unwrap();
        assert_eq!((d.n_sites, d.rows, d.cols, d.mode), (2, 4, 4, BoundaryMode::Periodic));
        assert_eq!(d.data, op.entries());
        let mut sbuf = Vec::new();
        write_state(&mut sbuf, BoundaryMode::Reflection, &StateVector::<f64>::vacuum(1)).unwrap();
        let s = read_dump(&mut sbuf.as_slice()).unwrap();
        assert_eq!((s.rows, s.cols, s.mode), (2, 1, BoundaryMode::Reflection));
        assert!(read_dump(&mut &b"NOPE"[..]).is_err());
    }
}
