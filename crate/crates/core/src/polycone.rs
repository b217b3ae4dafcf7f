//! Rational polyhedral cones and polytopes.
//!
//! Cones are stored by generators. Facets come from the double description
//! method run on the dual cone; extreme rays are the generators whose tight
//! facets have corank one. Polytopes are H-described and their lattice points
//! are enumerated coordinate by coordinate with exact LP bounds.

use crate::error::{Error, Result};
use crate::exactlin::{
    combination, dot, in_span, is_zero_vec, kernel, primitive_direction, rank, to_rational, Field,
    RationalField,
};
use crate::lp::{LinearProgram, LpOutcome};
use num_traits::{One, Zero};

/// Output of the double description method: `cone = lineality + cone(rays)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VDescription<F> {
    pub lineality: Vec<Vec<F>>,
    pub rays: Vec<Vec<F>>,
}

/// `{x : a·x ≥ 0 for a in inequalities, e·x = 0 for e in equations}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HDescription<F> {
    pub inequalities: Vec<Vec<F>>,
    pub equations: Vec<Vec<F>>,
}

fn normalize<F: Field>(v: Vec<F>) -> Vec<F> {
    match v.iter().find(|x| !x.is_zero()) {
        Some(p) => {
            let p = p.abs();
            v.into_iter().map(|x| x / p.clone()).collect()
        }
        None => v,
    }
}

fn combine<F: Field>(a: &F, u: &[F], b: &F, w: &[F]) -> Vec<F> {
    u.iter()
        .zip(w)
        .map(|(x, y)| a.clone() * x.clone() - b.clone() * y.clone())
        .collect()
}

/// Double description method. Constraints are processed in the order given, so
/// the output is reproducible; rays are returned normalized and sorted.
pub fn double_description<F: Field>(
    n: usize,
    equations: &[Vec<F>],
    inequalities: &[Vec<F>],
) -> VDescription<F> {
    let mut lin: Vec<Vec<F>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { F::one() } else { F::zero() })
                .collect()
        })
        .collect();
    let mut rays: Vec<Vec<F>> = Vec::new();
    let mut processed: Vec<Vec<F>> = Vec::new();

    for a in equations {
        if let Some(k) = lin.iter().position(|l| !dot(a, l).is_zero()) {
            let mut l0 = lin.remove(k);
            if dot(a, &l0).is_negative() {
                l0 = l0.into_iter().map(|x| -x).collect();
            }
            let a0 = dot(a, &l0);
            lin = lin
                .into_iter()
                .map(|l| combine(&a0, &l, &dot(a, &l), &l0))
                .map(normalize)
                .collect();
            rays = rays
                .into_iter()
                .map(|r| combine(&a0, &r, &dot(a, &r), &l0))
                .map(normalize)
                .collect();
        } else {
            rays.retain(|r| dot(a, r).is_zero());
        }
        processed.push(a.clone());
    }

    for a in inequalities {
        if let Some(k) = lin.iter().position(|l| !dot(a, l).is_zero()) {
            let mut l0 = lin.remove(k);
            if dot(a, &l0).is_negative() {
                l0 = l0.into_iter().map(|x| -x).collect();
            }
            let a0 = dot(a, &l0);
            lin = lin
                .into_iter()
                .map(|l| combine(&a0, &l, &dot(a, &l), &l0))
                .map(normalize)
                .collect();
            rays = rays
                .into_iter()
                .map(|r| combine(&a0, &r, &dot(a, &r), &l0))
                .map(normalize)
                .collect();
            rays.push(normalize(l0));
            processed.push(a.clone());
            continue;
        }
        let vals: Vec<F> = rays.iter().map(|r| dot(a, r)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_negative()).collect();
        if neg.is_empty() {
            processed.push(a.clone());
            continue;
        }
        let target = n - lin.len();
        let mut next: Vec<Vec<F>> = (0..rays.len())
            .filter(|&i| !vals[i].is_negative())
            .map(|i| rays[i].clone())
            .collect();
        for &p in &pos {
            for &q in &neg {
                let tight: Vec<Vec<F>> = processed
                    .iter()
                    .filter(|c| dot(c, &rays[p]).is_zero() && dot(c, &rays[q]).is_zero())
                    .cloned()
                    .collect();
                if target < 2 || rank(&tight) != target - 2 {
                    continue;
                }
                // (a·p) q - (a·q) p has a·x = 0
                let new = combine(&vals[p], &rays[q], &vals[q], &rays[p]);
                next.push(normalize(new));
            }
        }
        rays = next;
        processed.push(a.clone());
    }
    rays.sort();
    rays.dedup();
    VDescription {
        lineality: lin,
        rays,
    }
}

/// A rational polyhedral cone given by generators.
#[derive(Debug, Clone, PartialEq)]
pub struct RatCone<Q> {
    pub dim: usize,
    pub generators: Vec<Vec<Q>>,
}

impl<Q: RationalField> RatCone<Q> {
    pub fn new(dim: usize, generators: Vec<Vec<Q>>) -> Self {
        debug_assert!(generators.iter().all(|g| g.len() == dim));
        RatCone { dim, generators }
    }

    pub fn from_int(dim: usize, generators: &[Vec<Q::Int>]) -> Self {
        RatCone::new(dim, generators.iter().map(|g| to_rational(g)).collect())
    }

    /// Facet normals (irredundant) and the equations of the linear span.
    pub fn h_description(&self) -> HDescription<Q> {
        let dual = double_description::<Q>(self.dim, &[], &self.generators);
        let prim = |v: &Vec<Q>| -> Vec<Q> {
            to_rational(&primitive_direction(v).expect("dual rays are nonzero"))
        };
        let mut inequalities: Vec<Vec<Q>> = dual.rays.iter().map(prim).collect();
        inequalities.sort();
        let equations = dual.lineality.iter().map(prim).collect();
        HDescription {
            inequalities,
            equations,
        }
    }

    pub fn contains(&self, x: &[Q]) -> bool {
        let h = self.h_description();
        h.equations.iter().all(|e| dot(e, x).is_zero())
            && h.inequalities.iter().all(|a| !dot(a, x).is_negative())
    }

    /// Dimension of the linear span.
    pub fn span_dim(&self) -> usize {
        rank(&self.generators)
    }

    pub fn is_pointed(&self) -> bool {
        let h = self.h_description();
        let mut rows = h.inequalities;
        rows.extend(h.equations);
        rank(&rows) == self.dim
    }

    pub fn extreme_rays(&self) -> Result<Vec<Vec<Q::Int>>> {
        extreme_rays(self)
    }
}

/// Primitive generators of the extreme rays, deduplicated and sorted.
pub fn extreme_rays<Q: RationalField>(c: &RatCone<Q>) -> Result<Vec<Vec<Q::Int>>> {
    let h = c.h_description();
    let mut all = h.inequalities.clone();
    all.extend(h.equations.iter().cloned());
    if c.dim > 0 && rank(&all) < c.dim {
        return Err(Error::ConeHasLineality);
    }
    let mut out: Vec<Vec<Q::Int>> = Vec::new();
    for g in &c.generators {
        if is_zero_vec(g) {
            continue;
        }
        let mut tight = h.equations.clone();
        tight.extend(
            h.inequalities
                .iter()
                .filter(|a| dot(a, g).is_zero())
                .cloned(),
        );
        if rank(&tight) + 1 == c.dim {
            out.push(primitive_direction(g)?);
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Extreme rays of an H-described cone, which must be pointed.
pub fn cone_from_h<Q: RationalField>(dim: usize, h: &HDescription<Q>) -> Result<RatCone<Q>> {
    let v = double_description(dim, &h.equations, &h.inequalities);
    if !v.lineality.is_empty() {
        return Err(Error::ConeHasLineality);
    }
    let mut rays: Vec<Vec<Q::Int>> = v
        .rays
        .iter()
        .map(|r| primitive_direction(r))
        .collect::<Result<_>>()?;
    rays.sort();
    rays.dedup();
    Ok(RatCone::from_int(dim, &rays))
}

/// `σ ∩ span(basis)`, described by its extreme rays.
pub fn intersect_subspace<Q: RationalField>(
    sigma: &RatCone<Q>,
    basis: &[Vec<Q>],
) -> Result<RatCone<Q>> {
    let mut h = sigma.h_description();
    h.equations.extend(kernel(basis, sigma.dim));
    cone_from_h(sigma.dim, &h)
}

/// Intersection of two cones.
pub fn intersect<Q: RationalField>(a: &RatCone<Q>, b: &RatCone<Q>) -> Result<RatCone<Q>> {
    let mut h = a.h_description();
    let hb = b.h_description();
    h.inequalities.extend(hb.inequalities);
    h.equations.extend(hb.equations);
    cone_from_h(a.dim, &h)
}

/// Whether `sub` (assumed contained in `a`) is a face of the pointed cone `a`.
pub fn is_face<Q: RationalField>(a: &RatCone<Q>, sub: &RatCone<Q>) -> Result<bool> {
    let sub_rays = extreme_rays(sub)?;
    if sub_rays.is_empty() {
        return Ok(true);
    }
    let center: Vec<Q> = sub_rays.iter().fold(vec![Q::zero(); a.dim], |acc, r| {
        acc.iter()
            .zip(r)
            .map(|(x, y)| x.clone() + Q::from_int(y.clone()))
            .collect()
    });
    let h = a.h_description();
    let tight: Vec<&Vec<Q>> = h
        .inequalities
        .iter()
        .filter(|f| dot(f, &center).is_zero())
        .collect();
    let face: Vec<Vec<Q::Int>> = extreme_rays(a)?
        .into_iter()
        .filter(|r| {
            let rq = to_rational::<Q>(r);
            tight.iter().all(|f| dot(f, &rq).is_zero())
        })
        .collect();
    Ok(face == sub_rays)
}

/// `{x : a·x ≤ b for (a,b) in le, a·x = b for (a,b) in eq}`.
#[derive(Debug, Clone, PartialEq)]
pub struct RatPolytope<Q> {
    pub dim: usize,
    pub le: Vec<(Vec<Q>, Q)>,
    pub eq: Vec<(Vec<Q>, Q)>,
}

impl<Q: RationalField> RatPolytope<Q> {
    pub fn new(dim: usize) -> Self {
        RatPolytope {
            dim,
            le: Vec::new(),
            eq: Vec::new(),
        }
    }

    fn program(&self) -> LinearProgram<Q> {
        LinearProgram {
            nvars: self.dim,
            le: self.le.clone(),
            eq: self.eq.clone(),
        }
    }

    pub fn contains(&self, x: &[Q]) -> bool {
        self.program().is_satisfied_by(x)
    }

    /// Exact coordinate bounds, or an unbounded direction.
    pub fn bounding_box(&self) -> Result<Option<Vec<(Q, Q)>>> {
        let lp = self.program();
        if lp.feasible_point().is_none() {
            return Ok(None);
        }
        let mut bounds = Vec::with_capacity(self.dim);
        for i in 0..self.dim {
            let mut c = vec![Q::zero(); self.dim];
            c[i] = Q::one();
            let hi = match lp.maximize(&c) {
                LpOutcome::Optimal { value, .. } => value,
                LpOutcome::Unbounded { direction, .. } => return Err(unbounded(&direction)),
                LpOutcome::Infeasible => return Ok(None),
            };
            let lo = match lp.minimize(&c) {
                LpOutcome::Optimal { value, .. } => value,
                LpOutcome::Unbounded { direction, .. } => return Err(unbounded(&direction)),
                LpOutcome::Infeasible => return Ok(None),
            };
            bounds.push((lo, hi));
        }
        Ok(Some(bounds))
    }
}

fn unbounded<Q: RationalField>(direction: &[Q]) -> Error {
    Error::Unbounded {
        direction: direction.iter().map(|x| x.to_string()).collect(),
    }
}

/// All integer points of a bounded polytope, in lexicographic order.
pub fn lattice_points<Q: RationalField>(p: &RatPolytope<Q>) -> Result<Vec<Vec<Q::Int>>> {
    if p.bounding_box()?.is_none() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    enumerate(p, &mut prefix, &mut out);
    Ok(out)
}

fn enumerate<Q: RationalField>(
    p: &RatPolytope<Q>,
    prefix: &mut Vec<Q::Int>,
    out: &mut Vec<Vec<Q::Int>>,
) {
    let k = prefix.len();
    if k == p.dim {
        out.push(prefix.clone());
        return;
    }
    let mut lp = p.program();
    for (i, x) in prefix.iter().enumerate() {
        let mut e = vec![Q::zero(); p.dim];
        e[i] = Q::one();
        lp.add_eq(e, Q::from_int(x.clone()));
    }
    let mut c = vec![Q::zero(); p.dim];
    c[k] = Q::one();
    let (LpOutcome::Optimal { value: hi, .. }, LpOutcome::Optimal { value: lo, .. }) =
        (lp.maximize(&c), lp.minimize(&c))
    else {
        return;
    };
    let mut x = lo.ceil_int();
    let top = hi.floor_int();
    while x <= top {
        prefix.push(x.clone());
        enumerate(p, prefix, out);
        prefix.pop();
        x = x + Q::Int::one();
    }
}

/// A rational point of `relint(τ) ∩ span(basis)` for a simplicial cone τ.
///
/// Existence is decided by an exact LP maximizing the smallest barycentric
/// coordinate. The witness is `Σ λ_i g_i` for the integer vector `λ > 0` of
/// smallest total (then lexicographically smallest) found in a bounded search;
/// if the search bound is exhausted, the LP solution is used instead.
pub fn relint_rational_point<Q: RationalField>(
    tau: &RatCone<Q>,
    basis: &[Vec<Q>],
) -> Result<Option<Vec<Q>>> {
    let k = tau.generators.len();
    if k == 0 {
        return Ok(None);
    }
    if rank(&tau.generators) != k {
        return Err(Error::NotSimplicial);
    }
    let normals = kernel(basis, tau.dim);
    // M λ = 0 cuts out the barycentric coordinates of points in span(basis)
    let m: Vec<Vec<Q>> = normals
        .iter()
        .map(|w| tau.generators.iter().map(|g| dot(w, g)).collect())
        .collect();

    // max t  s.t.  λ_i ≥ t, Σλ = 1, Mλ = 0
    let mut lp = LinearProgram::new(k + 1);
    for i in 0..k {
        let mut a = vec![Q::zero(); k + 1];
        a[i] = Q::one();
        a[k] = -Q::one();
        lp.add_ge(a, Q::zero());
    }
    let mut sum = vec![Q::one(); k + 1];
    sum[k] = Q::zero();
    lp.add_eq(sum, Q::one());
    for row in &m {
        let mut a = row.clone();
        a.push(Q::zero());
        lp.add_eq(a, Q::zero());
    }
    let mut obj = vec![Q::zero(); k + 1];
    obj[k] = Q::one();
    let lambda_lp = match lp.maximize(&obj) {
        LpOutcome::Optimal { value, point } if value.is_positive() => point[..k].to_vec(),
        _ => return Ok(None),
    };
    let lambda_lp: Vec<Q::Int> = primitive_direction(&lambda_lp)?;

    let lambda = if kernel(&m, k).len() == 1 || m.is_empty() && k == 1 {
        lambda_lp
    } else {
        let lp_total = lambda_lp.iter().fold(Q::Int::zero(), |a, b| a + b.clone());
        let mut cap = 3 * k + 6;
        while cap > k && int_from::<Q::Int>(cap) > lp_total {
            cap -= 1;
        }
        smallest_positive_solution::<Q>(&m, k, cap).unwrap_or(lambda_lp)
    };
    let point = (0..tau.dim)
        .map(|j| {
            tau.generators
                .iter()
                .zip(&lambda)
                .fold(Q::zero(), |acc, (g, l)| {
                    acc + g[j].clone() * Q::from_int(l.clone())
                })
        })
        .collect();
    Ok(Some(point))
}

fn smallest_positive_solution<Q: RationalField>(
    m: &[Vec<Q>],
    k: usize,
    cap: usize,
) -> Option<Vec<Q::Int>> {
    fn compositions(
        total: usize,
        parts: usize,
        cur: &mut Vec<usize>,
        f: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if parts == 1 {
            cur.push(total);
            let hit = f(cur);
            cur.pop();
            return hit;
        }
        for first in 1..=total - (parts - 1) {
            cur.push(first);
            if compositions(total - first, parts - 1, cur, f) {
                cur.pop();
                return true;
            }
            cur.pop();
        }
        false
    }
    for total in k..=cap {
        let mut found = None;
        compositions(total, k, &mut Vec::new(), &mut |lam| {
            let ok = m.iter().all(|row| {
                row.iter()
                    .zip(lam)
                    .fold(Q::zero(), |acc, (a, &l)| {
                        acc + a.clone() * Q::from_int(int_from(l))
                    })
                    .is_zero()
            });
            if ok {
                found = Some(lam.iter().map(|&l| int_from::<Q::Int>(l)).collect());
            }
            ok
        });
        if found.is_some() {
            return found;
        }
    }
    None
}

fn int_from<T: num_integer::Integer + Clone>(x: usize) -> T {
    let mut acc = T::zero();
    for _ in 0..x {
        acc = acc + T::one();
    }
    acc
}

/// Whether `v` lies in the linear span of the cone's generators.
pub fn in_linear_span<Q: RationalField>(c: &RatCone<Q>, v: &[Q]) -> bool {
    in_span(&c.generators, v)
}

/// Barycentric coordinates of `v` in a simplicial cone, if `v` is in its span.
pub fn barycentric<Q: RationalField>(c: &RatCone<Q>, v: &[Q]) -> Option<Vec<Q>> {
    combination(&c.generators, v)
}
