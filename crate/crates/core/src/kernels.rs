//! Rational kernels `g`, `f`, `h`, `t`, products over parameter sets, the
//! antisymmetric prefactors `Δ′`/`Δ`, partitions and symmetrization.

use std::fmt;
use std::ops::Deref;

use itertools::Itertools;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::real::Real;

/// Default absolute tolerance on parameter differences at kernel poles.
pub const DEFAULT_COLLISION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    /// `g(u,v) = c/(u−v)`
    G,
    /// `f(u,v) = (u−v+c)/(u−v)`
    F,
    /// `h(u,v) = (u−v+c)/c`
    H,
    /// `t(u,v) = g(u,v)/h(u,v) = c²/((u−v)(u−v+c))`
    T,
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            KernelKind::G => "g",
            KernelKind::F => "f",
            KernelKind::H => "h",
            KernelKind::T => "t",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValues<T> {
    pub g: Complex<T>,
    pub f: Complex<T>,
    pub h: Complex<T>,
    pub t: Complex<T>,
}

/// An ordered sequence of spectral parameters standing for a set `ū`.
///
/// Order is kept so that symmetrization and partition enumeration stay
/// index-stable; permutation invariance is a property of the operations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamSet<T>(Vec<Complex<T>>);

impl<T: Real> ParamSet<T> {
    pub fn new(elems: Vec<Complex<T>>) -> Self {
        ParamSet(elems)
    }

    pub fn empty() -> Self {
        ParamSet(Vec::new())
    }

    pub fn from_reals(xs: &[f64]) -> Self {
        ParamSet(xs.iter().map(|&x| Complex::new(T::lit(x), T::zero())).collect())
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Complex<T>> {
        self.0
    }

    /// `ū_j = ū \ u_j`
    pub fn without(&self, j: usize) -> Self {
        ParamSet(self.0.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, &u)| u).collect())
    }

    /// `{z, ū}` with `z` in front.
    pub fn with_front(&self, z: Complex<T>) -> Self {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(z);
        v.extend_from_slice(&self.0);
        ParamSet(v)
    }

    /// `−ū`
    pub fn negated(&self) -> Self {
        ParamSet(self.0.iter().map(|&u| -u).collect())
    }

    /// `ū²`
    pub fn squared(&self) -> Self {
        ParamSet(self.0.iter().map(|&u| u * u).collect())
    }

    /// Reorders the elements: position `i` receives element `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        ParamSet(perm.iter().map(|&i| self.0[i]).collect())
    }

    /// `{u_1, …, u_k, x_{k+1}, …, x_n}`, the prefix of `self` followed by the tail of `other`.
    pub fn splice(&self, k: usize, other: &Self) -> Self {
        let mut v: Vec<_> = self.0[..k].to_vec();
        v.extend_from_slice(&other.0[k..]);
        ParamSet(v)
    }

    /// Sorted by `(re, im)`.
    pub fn sorted(&self) -> Self {
        let mut v = self.0.clone();
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap_or(std::cmp::Ordering::Equal).then(
            a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal),
        ));
        ParamSet(v)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| crate::real::is_finite(*z))
    }

    /// Smallest pairwise distance, or `+∞` for fewer than two elements.
    pub fn min_separation(&self) -> T {
        self.0
            .iter()
            .tuple_combinations()
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::infinity(), T::min)
    }
}

impl<T> Deref for ParamSet<T> {
    type Target = [Complex<T>];

    fn deref(&self) -> &[Complex<T>] {
        &self.0
    }
}

impl<T: Real> From<Vec<Complex<T>>> for ParamSet<T> {
    fn from(v: Vec<Complex<T>>) -> Self {
        ParamSet(v)
    }
}

impl<T: Real> FromIterator<Complex<T>> for ParamSet<T> {
    fn from_iter<I: IntoIterator<Item = Complex<T>>>(iter: I) -> Self {
        ParamSet(iter.into_iter().collect())
    }
}

/// Two disjoint parts whose union is a permutation of the parent set.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition<T> {
    pub part_one: ParamSet<T>,
    pub part_two: ParamSet<T>,
    /// Parent indices of `part_one`, ascending.
    pub indices_one: Vec<usize>,
}

/// Kernel evaluator for a fixed coupling `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernels<T> {
    pub c: Complex<T>,
    pub collision_tol: T,
}

impl<T: Real> Kernels<T> {
    pub fn new(c: Complex<T>) -> Self {
        Kernels { c, collision_tol: T::lit(DEFAULT_COLLISION_TOL) }
    }

    pub fn with_tol(c: Complex<T>, collision_tol: T) -> Self {
        Kernels { c, collision_tol }
    }

    fn check(&self, kind: KernelKind, what: &str, d: Complex<T>, u: Complex<T>, v: Complex<T>) -> Result<()> {
        if d.norm() <= self.collision_tol {
            Err(Error::pole(
                kind.to_string(),
                format!("|{what}| = {:e} <= {:e} at u = {u}, v = {v}", d.norm(), self.collision_tol),
            ))
        } else {
            Ok(())
        }
    }

    pub fn g(&self, u: Complex<T>, v: Complex<T>) -> Result<Complex<T>> {
        let d = u - v;
        self.check(KernelKind::G, "u - v", d, u, v)?;
        Ok(self.c / d)
    }

    pub fn f(&self, u: Complex<T>, v: Complex<T>) -> Result<Complex<T>> {
        let d = u - v;
        self.check(KernelKind::F, "u - v", d, u, v)?;
        Ok((d + self.c) / d)
    }

    pub fn h(&self, u: Complex<T>, v: Complex<T>) -> Complex<T> {
        (u - v + self.c) / self.c
    }

    pub fn t(&self, u: Complex<T>, v: Complex<T>) -> Result<Complex<T>> {
        let d = u - v;
        self.check(KernelKind::T, "u - v", d, u, v)?;
        self.check(KernelKind::T, "u - v + c", d + self.c, u, v)?;
        Ok(self.c * self.c / (d * (d + self.c)))
    }

    pub fn eval(&self, kind: KernelKind, u: Complex<T>, v: Complex<T>) -> Result<Complex<T>> {
        match kind {
            KernelKind::G => self.g(u, v),
            KernelKind::F => self.f(u, v),
            KernelKind::H => Ok(self.h(u, v)),
            KernelKind::T => self.t(u, v),
        }
    }

    /// All four kernels at once; fails if any of them is at a pole.
    pub fn values(&self, u: Complex<T>, v: Complex<T>) -> Result<KernelValues<T>> {
        Ok(KernelValues { g: self.g(u, v)?, f: self.f(u, v)?, h: self.h(u, v), t: self.t(u, v)? })
    }

    /// `k(z, ū) = ∏ k(z, u_i)`
    pub fn product_left(&self, kind: KernelKind, z: Complex<T>, set: &[Complex<T>]) -> Result<Complex<T>> {
        set.iter().enumerate().try_fold(Complex::new(T::one(), T::zero()), |acc, (i, &u)| {
            self.eval(kind, z, u).map(|k| acc * k).map_err(|e| annotate(e, i))
        })
    }

    /// `k(ū, z) = ∏ k(u_i, z)`
    pub fn product_right(&self, kind: KernelKind, set: &[Complex<T>], z: Complex<T>) -> Result<Complex<T>> {
        set.iter().enumerate().try_fold(Complex::new(T::one(), T::zero()), |acc, (i, &u)| {
            self.eval(kind, u, z).map(|k| acc * k).map_err(|e| annotate(e, i))
        })
    }

    /// `k(ā, b̄) = ∏_i ∏_j k(a_i, b_j)`
    pub fn product_sets(&self, kind: KernelKind, a: &[Complex<T>], b: &[Complex<T>]) -> Result<Complex<T>> {
        a.iter().try_fold(Complex::new(T::one(), T::zero()), |acc, &ai| {
            self.product_left(kind, ai, b).map(|p| acc * p)
        })
    }

    /// `(Δ′(ū), Δ(ū)) = (∏_{j<k} g(u_j,u_k), ∏_{j>k} g(u_j,u_k))`
    pub fn delta_products(&self, set: &[Complex<T>]) -> Result<(Complex<T>, Complex<T>)> {
        let one = Complex::new(T::one(), T::zero());
        let mut dp = one;
        let mut d = one;
        for j in 0..set.len() {
            for k in (j + 1)..set.len() {
                dp *= self.g(set[j], set[k])?;
                d *= self.g(set[k], set[j])?;
            }
        }
        Ok((dp, d))
    }
}

fn annotate(e: Error, index: usize) -> Error {
    match e {
        Error::Pole { kernel, detail } => Error::Pole { kernel, detail: format!("element {index}: {detail}") },
        other => other,
    }
}

/// All `C(n, size_one)` ways to split `set` in two, with parts in index order.
pub fn enumerate_partitions<T: Real>(set: &ParamSet<T>, size_one: usize) -> Vec<Partition<T>> {
    let n = set.len();
    assert!(size_one <= n, "partition size {size_one} exceeds set size {n}");
    (0..n)
        .combinations(size_one)
        .map(|idx| {
            let part_one = idx.iter().map(|&i| set[i]).collect();
            let part_two = (0..n).filter(|i| !idx.contains(i)).map(|i| set[i]).collect();
            Partition { part_one, part_two, indices_one: idx }
        })
        .collect()
}

/// Permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..n).permutations(n)
}

/// `Sym_ū fn(ū)`: the plain sum of `fn` over all orderings of `set`.
pub fn symmetrize<T, F>(set: &ParamSet<T>, mut func: F) -> Result<Complex<T>>
where
    T: Real,
    F: FnMut(&ParamSet<T>) -> Result<Complex<T>>,
{
    let mut acc = Complex::new(T::zero(), T::zero());
    for perm in permutations(set.len()) {
        let ordered = set.permuted(&perm);
        acc += func(&ordered).map_err(|e| match e {
            Error::Pole { kernel, detail } => {
                Error::Pole { kernel, detail: format!("permutation {perm:?}: {detail}") }
            }
            other => other,
        })?;
    }
    Ok(acc)
}

/// Matches the elements of `a` to distinct elements of `b` within `tol`.
///
/// Returns `perm` with `|a[i] − b[perm[i]]| ≤ tol`, or `None` if no bijection
/// exists. An element with more than one candidate target means the
/// tolerance cannot resolve the set and yields [`Error::AmbiguousMatch`].
pub fn multiset_match<T: Real>(a: &[Complex<T>], b: &[Complex<T>], tol: T) -> Result<Option<Vec<usize>>> {
    if a.len() != b.len() {
        return Ok(None);
    }
    let mut perm = Vec::with_capacity(a.len());
    let mut used = vec![false; b.len()];
    for (i, &ai) in a.iter().enumerate() {
        let mut hits = b.iter().enumerate().filter(|(_, &bj)| (ai - bj).norm() <= tol).map(|(j, _)| j);
        let Some(first) = hits.next() else {
            return Ok(None);
        };
        if let Some(second) = hits.next() {
            return Err(Error::AmbiguousMatch { index: i, first, second });
        }
        if used[first] {
            return Ok(None);
        }
        used[first] = true;
        perm.push(first);
    }
    Ok(Some(perm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::{cplx, re};
    use proptest::prelude::*;

    fn k1() -> Kernels<f64> {
        Kernels::new(re(1.0))
    }

    fn close(a: Complex<f64>, b: Complex<f64>) -> bool {
        (a - b).norm() <= 1e-13 * (1.0 + b.norm())
    }

    #[test]
    fn kernel_values_direct_substitution() {
        let k = Kernels::new(re(2.0));
        let v = k.values(re(3.0), re(1.0)).unwrap();
        assert!(close(v.g, re(1.0)) && close(v.f, re(2.0)) && close(v.h, re(2.0)) && close(v.t, re(0.5)));
    }

    #[test]
    fn kernel_values_at_difference_c() {
        let v = k1().values(re(0.0), re(-1.0)).unwrap();
        assert!(close(v.g, re(1.0)) && close(v.f, re(2.0)) && close(v.h, re(2.0)) && close(v.t, re(0.5)));
    }

    #[test]
    fn t_has_pole_at_zero_of_f() {
        let k = k1();
        assert!(close(k.g(re(1.0), re(2.0)).unwrap(), re(-1.0)));
        assert!(close(k.f(re(1.0), re(2.0)).unwrap(), re(0.0)));
        assert!(close(k.h(re(1.0), re(2.0)), re(0.0)));
        match k.t(re(1.0), re(2.0)) {
            Err(Error::Pole { kernel, detail }) => {
                assert_eq!(kernel, "t");
                assert!(detail.contains("u - v + c"));
            }
            other => panic!("expected pole, got {other:?}"),
        }
        assert!(matches!(k.values(re(1.0), re(2.0)), Err(Error::Pole { .. })));
    }

    #[test]
    fn g_pole_at_coincidence() {
        assert!(matches!(k1().g(re(0.5), re(0.5)), Err(Error::Pole { .. })));
        assert!(matches!(k1().f(re(0.5), re(0.5 + 1e-12)), Err(Error::Pole { .. })));
    }

    #[test]
    fn products_over_sets() {
        let k = k1();
        assert_eq!(k.product_left(KernelKind::F, re(1.0), &[]).unwrap(), re(1.0));
        assert!(close(k.product_left(KernelKind::G, re(5.0), &[re(4.0), re(3.0)]).unwrap(), re(0.5)));
        assert!(close(k.product_sets(KernelKind::F, &[re(3.0)], &[re(1.0), re(2.0)]).unwrap(), re(3.0)));
        assert_eq!(k.product_sets(KernelKind::F, &[], &[re(1.0)]).unwrap(), re(1.0));
    }

    #[test]
    fn product_error_names_element() {
        let err = k1().product_left(KernelKind::G, re(2.0), &[re(1.0), re(2.0)]).unwrap_err();
        match err {
            Error::Pole { detail, .. } => assert!(detail.starts_with("element 1")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn delta_products_examples() {
        let k = k1();
        assert_eq!(k.delta_products(&[re(0.3)]).unwrap(), (re(1.0), re(1.0)));
        assert_eq!(k.delta_products(&[]).unwrap(), (re(1.0), re(1.0)));
        let (dp, d) = k.delta_products(&[re(2.0), re(1.0)]).unwrap();
        assert!(close(dp, re(1.0)) && close(d, re(-1.0)));
        assert!(k.delta_products(&[re(1.0), re(1.0)]).is_err());
    }

    #[test]
    fn delta_sign_pattern() {
        let k = Kernels::new(cplx::<f64>(0.7, 0.2));
        let set = [cplx(0.1, 0.3), cplx(-0.4, 0.9), cplx(1.2, -0.5), cplx(0.0, -1.1)];
        let (dp, d) = k.delta_products(&set).unwrap();
        let n = set.len();
        let sign = if (n * (n - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        assert!(close(dp, d * sign));
    }

    #[test]
    fn partition_enumeration() {
        let s = ParamSet::<f64>::from_reals(&[1.0, 2.0]);
        let parts = enumerate_partitions(&s, 1);
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].part_one.as_slice(), &[re(1.0)]);
        assert_eq!(parts[0].part_two.as_slice(), &[re(2.0)]);
        assert_eq!(parts[1].part_one.as_slice(), &[re(2.0)]);
        let zero = enumerate_partitions(&s, 0);
        assert_eq!(zero.len(), 1);
        assert!(zero[0].part_one.is_empty());
        assert_eq!(zero[0].part_two, s);
        let four = ParamSet::<f64>::from_reals(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(enumerate_partitions(&four, 2).len(), 6);
    }

    #[test]
    fn symmetrize_examples() {
        let s = ParamSet::<f64>::from_reals(&[3.0, 5.0]);
        assert_eq!(symmetrize(&s, |_| Ok(re(1.5))).unwrap(), re(3.0));
        assert_eq!(symmetrize(&s, |u| Ok(u[0] - u[1])).unwrap(), re(0.0));
        assert_eq!(symmetrize(&s, |u| Ok(u[0])).unwrap(), re(8.0));
    }

    #[test]
    fn symmetrize_reports_permutation() {
        let s = ParamSet::<f64>::from_reals(&[1.0, 2.0]);
        let k = k1();
        let err = symmetrize(&s, |u| k.g(u[0], re(2.0))).unwrap_err();
        match err {
            Error::Pole { detail, .. } => assert!(detail.contains("[1, 0]")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn multiset_match_examples() {
        let a = [re::<f64>(1.0), re(2.0)];
        let b = [re::<f64>(2.0), re(1.0)];
        assert_eq!(multiset_match(&a, &b, 1e-9).unwrap(), Some(vec![1, 0]));
        assert_eq!(multiset_match(&a, &[re(1.0), re(2.5)], 1e-9).unwrap(), None);
        let near = [re::<f64>(1.0), re(1.0 + 1e-12)];
        assert!(matches!(multiset_match(&near, &near, 1e-9), Err(Error::AmbiguousMatch { .. })));
        assert_eq!(multiset_match(&a, &a[..1], 1e-9).unwrap(), None);
    }

    #[test]
    fn single_precision_kernels() {
        let k = Kernels::<f32>::with_tol(Complex::new(2.0, 0.0), 1e-5);
        let v = k.values(Complex::new(3.0, 0.0), Complex::new(1.0, 0.0)).unwrap();
        assert!((v.t.re - 0.5).abs() < 1e-6);
    }

    fn arb_c() -> impl Strategy<Value = Complex<f64>> {
        (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(a, b)| Complex::new(a, b))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn f_equals_g_times_h(u in arb_c(), v in arb_c(), c in arb_c()) {
            prop_assume!((u - v).norm() > 1e-3 && c.norm() > 1e-3);
            let k = Kernels::new(c);
            let f = k.f(u, v).unwrap();
            let gh = k.g(u, v).unwrap() * k.h(u, v);
            prop_assert!((f - gh).norm() <= 1e-13 * f.norm().max(1.0));
        }
    }

    proptest! {
        #[test]
        fn antisymmetry_identities(u in arb_c(), v in arb_c(), c in arb_c()) {
            prop_assume!((u - v).norm() > 1e-3 && c.norm() > 1e-3);
            let k = Kernels::new(c);
            let gsum = k.g(u, v).unwrap() + k.g(v, u).unwrap();
            prop_assert!(gsum.norm() <= 1e-12 * k.g(u, v).unwrap().norm());
            let fsum = k.f(u, v).unwrap() + k.f(v, u).unwrap();
            prop_assert!((fsum - Complex::new(2.0, 0.0)).norm() <= 1e-12 * k.f(u, v).unwrap().norm().max(1.0));
        }

        #[test]
        fn product_is_order_independent(
            z in arb_c(),
            set in proptest::collection::vec(arb_c(), 1..6),
            c in arb_c(),
            rot in 0usize..6,
        ) {
            prop_assume!(c.norm() > 1e-2 && set.iter().all(|u| (z - *u).norm() > 1e-2));
            let k = Kernels::new(c);
            let mut rotated = set.clone();
            let r = rot % set.len();
            rotated.rotate_left(r);
            rotated.reverse();
            for kind in [KernelKind::G, KernelKind::F, KernelKind::H] {
                let a = k.product_left(kind, z, &set).unwrap();
                let b = k.product_left(kind, z, &rotated).unwrap();
                prop_assert!((a - b).norm() <= 1e-13 * a.norm().max(1e-300) * 10.0);
            }
        }

        #[test]
        fn symmetrize_is_invariant_under_prepermutation(
            set in proptest::collection::vec(arb_c(), 1..5),
            swap in (0usize..4, 0usize..4),
        ) {
            let s = ParamSet::new(set.clone());
            let mut other = set.clone();
            let (i, j) = (swap.0 % set.len(), swap.1 % set.len());
            other.swap(i, j);
            let o = ParamSet::new(other);
            let weight = |u: &ParamSet<f64>| -> Result<Complex<f64>> {
                Ok(u.iter().enumerate().map(|(i, z)| z * (i as f64 + 1.0)).sum::<Complex<f64>>() * u[0])
            };
            let mut a_terms: Vec<_> = permutations(s.len()).map(|p| weight(&s.permuted(&p)).unwrap()).collect();
            let mut b_terms: Vec<_> = permutations(o.len()).map(|p| weight(&o.permuted(&p)).unwrap()).collect();
            let key = |z: &Complex<f64>| (z.re, z.im);
            a_terms.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
            b_terms.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
            prop_assert_eq!(a_terms, b_terms);
        }

        #[test]
        fn partitions_count_and_distinct(n in 0usize..7, k in 0usize..7) {
            prop_assume!(k <= n);
            let set = ParamSet::<f64>::from_reals(&(0..n).map(|i| i as f64).collect::<Vec<_>>());
            let parts = enumerate_partitions(&set, k);
            let binom = (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1));
            prop_assert_eq!(parts.len(), binom);
            let keys: std::collections::HashSet<_> = parts.iter().map(|p| p.indices_one.clone()).collect();
            prop_assert_eq!(keys.len(), binom);
            for p in &parts {
                prop_assert_eq!(p.part_one.len() + p.part_two.len(), n);
            }
        }
    }
}
