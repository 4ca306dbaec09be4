//! The generalized model: vacuum eigenvalues `λ₁`, `λ₂`, transfer-matrix
//! eigenvalues for periodic and reflection boundaries, their residues and
//! derivatives, and denominator-cleared Bethe residuals.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::kernels::{KernelKind, Kernels, ParamSet, DEFAULT_COLLISION_TOL};
use crate::linalg::Matrix;
use crate::real::{is_finite, Real};

type C<T> = Complex<T>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryMode {
    Periodic,
    Reflection,
}

impl std::fmt::Display for BoundaryMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BoundaryMode::Periodic => "periodic",
            BoundaryMode::Reflection => "reflection",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Boundary<T> {
    Periodic,
    /// Diagonal K-matrices `K₋(u) = K(u, ξ₋)`, `K₊(u) = K(u + c, ξ₊)`.
    Reflection { xi_minus: C<T>, xi_plus: C<T> },
}

/// Ratio of two polynomials given by ascending coefficient lists.
#[derive(Debug, Clone, PartialEq)]
pub struct Rational<T> {
    pub num: Vec<C<T>>,
    pub den: Vec<C<T>>,
}

impl<T: Real> Rational<T> {
    pub fn polynomial(num: Vec<C<T>>) -> Self {
        Rational { num, den: vec![C::new(T::one(), T::zero())] }
    }

    pub fn constant(value: C<T>) -> Self {
        Self::polynomial(vec![value])
    }

    fn horner(coeffs: &[C<T>], x: C<T>) -> C<T> {
        coeffs.iter().rev().fold(C::new(T::zero(), T::zero()), |acc, &a| acc * x + a)
    }

    fn horner_deriv(coeffs: &[C<T>], x: C<T>) -> C<T> {
        coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(C::new(T::zero(), T::zero()), |acc, (k, &a)| acc * x + a * T::from_count(k))
    }

    fn den_at(&self, x: C<T>, tol: T) -> Result<C<T>> {
        let d = Self::horner(&self.den, x);
        if d.norm() <= tol {
            return Err(Error::pole("lambda", format!("denominator vanishes at {x}")));
        }
        Ok(d)
    }

    pub fn eval(&self, x: C<T>, tol: T) -> Result<C<T>> {
        let d = self.den_at(x, tol)?;
        Ok(Self::horner(&self.num, x) / d)
    }

    pub fn deriv(&self, x: C<T>, tol: T) -> Result<C<T>> {
        let d = self.den_at(x, tol)?;
        let n = Self::horner(&self.num, x);
        let dn = Self::horner_deriv(&self.num, x);
        let dd = Self::horner_deriv(&self.den, x);
        Ok((dn * d - n * dd) / (d * d))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Realization<T> {
    /// Inhomogeneous XXX chain: `λ₁(u) = ∏(u − θ_k + c)`, `λ₂(u) = ∏(u − θ_k)`.
    Xxx { theta: ParamSet<T> },
    Custom { lambda1: Rational<T>, lambda2: Rational<T> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lambda {
    One,
    Two,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec<T> {
    pub c: C<T>,
    pub boundary: Boundary<T>,
    pub realization: Realization<T>,
    pub collision_tol: T,
}

impl<T: Real> ModelSpec<T> {
    pub fn xxx(c: C<T>, theta: ParamSet<T>) -> Self {
        ModelSpec {
            c,
            boundary: Boundary::Periodic,
            realization: Realization::Xxx { theta },
            collision_tol: T::lit(DEFAULT_COLLISION_TOL),
        }
    }

    pub fn custom(c: C<T>, lambda1: Rational<T>, lambda2: Rational<T>) -> Self {
        ModelSpec {
            c,
            boundary: Boundary::Periodic,
            realization: Realization::Custom { lambda1, lambda2 },
            collision_tol: T::lit(DEFAULT_COLLISION_TOL),
        }
    }

    pub fn with_reflection(mut self, xi_minus: C<T>, xi_plus: C<T>) -> Self {
        self.boundary = Boundary::Reflection { xi_minus, xi_plus };
        self
    }

    pub fn with_collision_tol(mut self, tol: T) -> Self {
        self.collision_tol = tol;
        self
    }

    pub fn mode(&self) -> BoundaryMode {
        match self.boundary {
            Boundary::Periodic => BoundaryMode::Periodic,
            Boundary::Reflection { .. } => BoundaryMode::Reflection,
        }
    }

    pub fn periodic(&self) -> Self {
        ModelSpec { boundary: Boundary::Periodic, ..self.clone() }
    }

    pub fn theta(&self) -> Option<&ParamSet<T>> {
        match &self.realization {
            Realization::Xxx { theta } => Some(theta),
            Realization::Custom { .. } => None,
        }
    }

    pub fn kernels(&self) -> Kernels<T> {
        Kernels::with_tol(self.c, self.collision_tol)
    }

    pub fn validate(&self) -> Result<()> {
        if self.c.norm() <= self.collision_tol || !is_finite(self.c) {
            return Err(Error::InvalidArgument(format!("coupling c must be finite and nonzero, got {}", self.c)));
        }
        if let Boundary::Reflection { xi_minus, xi_plus } = self.boundary {
            if !is_finite(xi_minus) || !is_finite(xi_plus) {
                return Err(Error::InvalidArgument("boundary parameters must be finite".into()));
            }
        }
        match &self.realization {
            Realization::Xxx { theta } if !theta.is_finite() => {
                Err(Error::InvalidArgument("inhomogeneities must be finite".into()))
            }
            Realization::Custom { lambda1, lambda2 }
                if [lambda1, lambda2].iter().any(|r| r.den.iter().all(|a| a.norm() == T::zero())) =>
            {
                Err(Error::InvalidArgument("custom lambda has zero denominator".into()))
            }
            _ => Ok(()),
        }
    }

    fn xis(&self, op: &str) -> Result<(C<T>, C<T>)> {
        match self.boundary {
            Boundary::Reflection { xi_minus, xi_plus } => Ok((xi_minus, xi_plus)),
            Boundary::Periodic => Err(Error::unsupported(op, "reflection boundary parameters")),
        }
    }

    fn one(&self) -> C<T> {
        C::new(T::one(), T::zero())
    }

    fn half_c(&self) -> C<T> {
        self.c * T::lit(0.5)
    }

    pub fn lambda(&self, which: Lambda, u: C<T>) -> Result<C<T>> {
        match &self.realization {
            Realization::Xxx { theta } => {
                let shift = if which == Lambda::One { self.c } else { C::new(T::zero(), T::zero()) };
                Ok(theta.iter().fold(self.one(), |acc, &t| acc * (u - t + shift)))
            }
            Realization::Custom { lambda1, lambda2 } => {
                let r = if which == Lambda::One { lambda1 } else { lambda2 };
                r.eval(u, self.collision_tol)
            }
        }
    }

    pub fn lambda1(&self, u: C<T>) -> Result<C<T>> {
        self.lambda(Lambda::One, u)
    }

    pub fn lambda2(&self, u: C<T>) -> Result<C<T>> {
        self.lambda(Lambda::Two, u)
    }

    pub fn lambda_deriv(&self, which: Lambda, u: C<T>) -> Result<C<T>> {
        match &self.realization {
            Realization::Xxx { theta } => {
                let shift = if which == Lambda::One { self.c } else { C::new(T::zero(), T::zero()) };
                let factors: Vec<_> = theta.iter().map(|&t| u - t + shift).collect();
                Ok(products_except(&factors).into_iter().sum())
            }
            Realization::Custom { lambda1, lambda2 } => {
                let r = if which == Lambda::One { lambda1 } else { lambda2 };
                r.deriv(u, self.collision_tol)
            }
        }
    }

    /// `X(v) = d/dz ln(λ₁(z)/λ₂(z))` at `z = v`.
    pub fn log_derivative_x(&self, v: C<T>) -> Result<C<T>> {
        match &self.realization {
            Realization::Xxx { theta } => {
                let mut acc = C::new(T::zero(), T::zero());
                for &t in theta.iter() {
                    let a = v - t + self.c;
                    let b = v - t;
                    if a.norm() <= self.collision_tol || b.norm() <= self.collision_tol {
                        return Err(Error::pole("X", format!("lambda vanishes at v = {v}")));
                    }
                    acc += a.inv() - b.inv();
                }
                Ok(acc)
            }
            Realization::Custom { .. } => {
                let l1 = self.lambda1(v)?;
                let l2 = self.lambda2(v)?;
                if l1.norm() <= self.collision_tol || l2.norm() <= self.collision_tol {
                    return Err(Error::pole("X", format!("lambda vanishes at v = {v}")));
                }
                Ok(self.lambda_deriv(Lambda::One, v)? / l1 - self.lambda_deriv(Lambda::Two, v)? / l2)
            }
        }
    }

    /// `τ(z|ū) = λ₁(z) f(ū,z) + λ₂(z) f(z,ū)`
    pub fn tau_periodic(&self, z: C<T>, set: &[C<T>]) -> Result<C<T>> {
        let k = self.kernels();
        Ok(self.lambda1(z)? * k.product_right(KernelKind::F, set, z)?
            + self.lambda2(z)? * k.product_left(KernelKind::F, z, set)?)
    }

    /// Boundary factors `(A(z), D(z))` of the reflection eigenvalue:
    /// `A = (2z+c)/(2z)(z+ξ₊−c/2)(z+ξ₋−c/2)λ₁(z)λ₂(−z)`,
    /// `D = (2z−c)/(2z)(z−ξ₊+c/2)(z−ξ₋+c/2)λ₁(−z)λ₂(z)`.
    fn reflection_factors(&self, z: C<T>) -> Result<(C<T>, C<T>)> {
        let (xm, xp) = self.xis("reflection eigenvalue")?;
        if z.norm() <= self.collision_tol {
            return Err(Error::pole("tau_hat", format!("z = {z} at the origin")));
        }
        let hc = self.half_c();
        let two_z = z * T::lit(2.0);
        let a = (two_z + self.c) / two_z * (z + xp - hc) * (z + xm - hc) * self.lambda1(z)? * self.lambda2(-z)?;
        let d = (two_z - self.c) / two_z * (z - xp + hc) * (z - xm + hc) * self.lambda1(-z)? * self.lambda2(z)?;
        Ok((a, d))
    }

    /// `τ̂(z|ū) = A(z) f(ū,z) f(−ū,z) + D(z) f(z,ū) f(z,−ū)`
    pub fn tau_reflection(&self, z: C<T>, set: &[C<T>]) -> Result<C<T>> {
        let k = self.kernels();
        let (a, d) = self.reflection_factors(z)?;
        let neg: Vec<_> = set.iter().map(|&u| -u).collect();
        Ok(a * k.product_right(KernelKind::F, set, z)? * k.product_right(KernelKind::F, &neg, z)?
            + d * k.product_left(KernelKind::F, z, set)? * k.product_left(KernelKind::F, z, &neg)?)
    }

    /// Transfer-matrix eigenvalue for the model's boundary mode.
    pub fn tau(&self, z: C<T>, set: &[C<T>]) -> Result<C<T>> {
        match self.mode() {
            BoundaryMode::Periodic => self.tau_periodic(z, set),
            BoundaryMode::Reflection => self.tau_reflection(z, set),
        }
    }

    /// `res_{w = s_j} τ(w|s̄)` in closed form.
    ///
    /// Periodic: `−c (λ₁(s_j) f(s̄_j,s_j) − λ₂(s_j) f(s_j,s̄_j))`.
    /// Reflection: `−c A(s_j) f(s̄_j,s_j) f(−s̄_j,s_j) f(−s_j,s_j) + c D(s_j) f(s_j,s̄_j) f(s_j,−s̄_j) f(s_j,−s_j)`.
    pub fn tau_residue(&self, j: usize, set: &[C<T>]) -> Result<C<T>> {
        let k = self.kernels();
        let u = set[j];
        let rest: Vec<_> = set.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, &v)| v).collect();
        match self.mode() {
            BoundaryMode::Periodic => {
                let left = self.lambda1(u)? * k.product_right(KernelKind::F, &rest, u)?;
                let right = self.lambda2(u)? * k.product_left(KernelKind::F, u, &rest)?;
                Ok(-self.c * (left - right))
            }
            BoundaryMode::Reflection => {
                let (a, d) = self.reflection_factors(u)?;
                let neg: Vec<_> = rest.iter().map(|&v| -v).collect();
                let left = a
                    * k.product_right(KernelKind::F, &rest, u)?
                    * k.product_right(KernelKind::F, &neg, u)?
                    * k.f(-u, u)?;
                let right = d
                    * k.product_left(KernelKind::F, u, &rest)?
                    * k.product_left(KernelKind::F, u, &neg)?
                    * k.f(u, -u)?;
                Ok(self.c * (right - left))
            }
        }
    }

    /// Residue estimate from `(w − s_j) τ(w|s̄)` at `w = s_j + h`, with two
    /// Richardson steps over `h ∈ {h₀, h₀/2, h₀/4}`.
    pub fn tau_residue_numeric(&self, j: usize, set: &[C<T>], h0: C<T>) -> Result<C<T>> {
        let u = set[j];
        let probe = |h: C<T>| -> Result<C<T>> { Ok(h * self.tau(u + h, set)?) };
        let two = T::lit(2.0);
        let e1 = probe(h0)?;
        let e2 = probe(h0 / two)?;
        let e3 = probe(h0 / T::lit(4.0))?;
        let r1 = e2 * two - e1;
        let r2 = e3 * two - e2;
        Ok((r2 * T::lit(4.0) - r1) / T::lit(3.0))
    }

    /// `∂τ(z|x̄)/∂x_k`, analytic.
    pub fn dtau_dx(&self, z: C<T>, set: &[C<T>], idx: usize) -> Result<C<T>> {
        let k = self.kernels();
        let x = set[idx];
        let rest: Vec<_> = set.iter().enumerate().filter(|&(i, _)| i != idx).map(|(_, &v)| v).collect();
        // ∂_a f(a,b) = −c/(a−b)², ∂_b f(a,b) = c/(a−b)²
        let df_first = |a: C<T>, b: C<T>| -> Result<C<T>> {
            k.g(a, b)?;
            Ok(-self.c / ((a - b) * (a - b)))
        };
        let df_second = |a: C<T>, b: C<T>| -> Result<C<T>> {
            k.g(a, b)?;
            Ok(self.c / ((a - b) * (a - b)))
        };
        match self.mode() {
            BoundaryMode::Periodic => {
                let left = self.lambda1(z)? * k.product_right(KernelKind::F, &rest, z)? * df_first(x, z)?;
                let right = self.lambda2(z)? * k.product_left(KernelKind::F, z, &rest)? * df_second(z, x)?;
                Ok(left + right)
            }
            BoundaryMode::Reflection => {
                let (a, d) = self.reflection_factors(z)?;
                let neg: Vec<_> = rest.iter().map(|&v| -v).collect();
                let left_rest = k.product_right(KernelKind::F, &rest, z)? * k.product_right(KernelKind::F, &neg, z)?;
                let right_rest = k.product_left(KernelKind::F, z, &rest)? * k.product_left(KernelKind::F, z, &neg)?;
                let left_pair = df_first(x, z)? * k.f(-x, z)? - k.f(x, z)? * df_first(-x, z)?;
                let right_pair = df_second(z, x)? * k.f(z, -x)? - k.f(z, x)? * df_second(z, -x)?;
                Ok(a * left_rest * left_pair + d * right_rest * right_pair)
            }
        }
    }

    /// Denominator-cleared Bethe residuals; all vanish iff `set` is on-shell.
    ///
    /// Periodic: `r_i = λ₁(u_i) ∏_{j≠i}(u_i−u_j−c) − λ₂(u_i) ∏_{j≠i}(u_i−u_j+c)`.
    /// Reflection: `r_i = P₊(u_i) ∏_{j≠i}(u_j−u_i+c)(−u_j−u_i+c) − P₋(u_i) ∏_{j≠i}(u_i−u_j+c)(u_i+u_j+c)`
    /// with `P₊(u) = (u+ξ₊−c/2)(u+ξ₋−c/2)λ₁(u)λ₂(−u)` and `P₋(u) = (u−ξ₊+c/2)(u−ξ₋+c/2)λ₁(−u)λ₂(u)`.
    pub fn bethe_residual(&self, set: &[C<T>]) -> Result<Vec<C<T>>> {
        Ok(self.residual_system(set, false)?.0)
    }

    /// Residuals together with their analytic Jacobian `∂r_i/∂u_j`.
    pub fn bethe_residual_jacobian(&self, set: &[C<T>]) -> Result<(Vec<C<T>>, Matrix<T>)> {
        let (r, j) = self.residual_system(set, true)?;
        Ok((r, j.expect("jacobian requested")))
    }

    pub fn max_residual(&self, set: &[C<T>]) -> Result<T> {
        Ok(self.bethe_residual(set)?.iter().map(|r| r.norm()).fold(T::zero(), T::max))
    }

    fn residual_system(&self, set: &[C<T>], with_jacobian: bool) -> Result<(Vec<C<T>>, Option<Matrix<T>>)> {
        let n = set.len();
        let mut res = Vec::with_capacity(n);
        let mut jac = with_jacobian.then(|| Matrix::zeros(n));
        let one = self.one();
        for i in 0..n {
            let u = set[i];
            // Each factor: (value, ∂/∂u_i, owner j, ∂/∂u_j).
            let (pos_w, neg_w, dpos_w, dneg_w, pos_factors, neg_factors) = match self.mode() {
                BoundaryMode::Periodic => {
                    let pos: Vec<_> = (0..n).filter(|&j| j != i).map(|j| (u - set[j] - self.c, one, j, -one)).collect();
                    let neg: Vec<_> = (0..n).filter(|&j| j != i).map(|j| (u - set[j] + self.c, one, j, -one)).collect();
                    let (w1, w2) = (self.lambda1(u)?, self.lambda2(u)?);
                    let (d1, d2) = if with_jacobian {
                        (self.lambda_deriv(Lambda::One, u)?, self.lambda_deriv(Lambda::Two, u)?)
                    } else {
                        (one, one)
                    };
                    (w1, w2, d1, d2, pos, neg)
                }
                BoundaryMode::Reflection => {
                    let (xm, xp) = self.xis("reflection Bethe equations")?;
                    let hc = self.half_c();
                    let mut pos = Vec::with_capacity(2 * n);
                    let mut neg = Vec::with_capacity(2 * n);
                    for j in (0..n).filter(|&j| j != i) {
                        let v = set[j];
                        pos.push((v - u + self.c, -one, j, one));
                        pos.push((-v - u + self.c, -one, j, -one));
                        neg.push((u - v + self.c, one, j, -one));
                        neg.push((u + v + self.c, one, j, one));
                    }
                    let (p1, p2) = (u + xp - hc, u + xm - hc);
                    let (m1, m2) = (u - xp + hc, u - xm + hc);
                    let lp = self.lambda1(u)? * self.lambda2(-u)?;
                    let lm = self.lambda1(-u)? * self.lambda2(u)?;
                    let (dp, dm) = if with_jacobian {
                        let dlp = self.lambda_deriv(Lambda::One, u)? * self.lambda2(-u)?
                            - self.lambda1(u)? * self.lambda_deriv(Lambda::Two, -u)?;
                        let dlm = -self.lambda_deriv(Lambda::One, -u)? * self.lambda2(u)?
                            + self.lambda1(-u)? * self.lambda_deriv(Lambda::Two, u)?;
                        ((p1 + p2) * lp + p1 * p2 * dlp, (m1 + m2) * lm + m1 * m2 * dlm)
                    } else {
                        (one, one)
                    };
                    (p1 * p2 * lp, m1 * m2 * lm, dp, dm, pos, neg)
                }
            };
            let (pp, pdi, pdj) = linear_product(&pos_factors, n);
            let (np, ndi, ndj) = linear_product(&neg_factors, n);
            res.push(pos_w * pp - neg_w * np);
            if let Some(m) = jac.as_mut() {
                for j in 0..n {
                    let v = if j == i {
                        dpos_w * pp + pos_w * pdi - dneg_w * np - neg_w * ndi
                    } else {
                        pos_w * pdj[j] - neg_w * ndj[j]
                    };
                    m.set(i, j, v);
                }
            }
        }
        Ok((res, jac))
    }
}

/// `[∏_{l≠k} a_l for k]`, without dividing.
pub(crate) fn products_except<T: Real>(factors: &[C<T>]) -> Vec<C<T>> {
    let n = factors.len();
    let one = C::new(T::one(), T::zero());
    let mut prefix = vec![one; n + 1];
    for k in 0..n {
        prefix[k + 1] = prefix[k] * factors[k];
    }
    let mut out = vec![one; n];
    let mut suffix = one;
    for k in (0..n).rev() {
        out[k] = prefix[k] * suffix;
        suffix *= factors[k];
    }
    out
}

/// Product of linear factors and its gradient: returns `(∏ a, ∂/∂u_i, [∂/∂u_j])`.
fn linear_product<T: Real>(factors: &[(C<T>, C<T>, usize, C<T>)], n: usize) -> (C<T>, C<T>, Vec<C<T>>) {
    let values: Vec<_> = factors.iter().map(|f| f.0).collect();
    let prod = values.iter().fold(C::new(T::one(), T::zero()), |acc, &a| acc * a);
    let excl = products_except(&values);
    let mut di = C::new(T::zero(), T::zero());
    let mut dj = vec![C::new(T::zero(), T::zero()); n];
    for (f, e) in factors.iter().zip(excl) {
        di += f.1 * e;
        dj[f.2] += f.3 * e;
    }
    (prod, di, dj)
}
