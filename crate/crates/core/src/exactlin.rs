//! Exact integer and rational linear algebra.
//!
//! Everything here is generic over an exact scalar: [`Field`] for elimination,
//! [`RationalField`] where integrality matters (primitive directions, floors),
//! and plain `Integer + Signed` types for Smith and Hermite normal forms.

use std::fmt::{Debug, Display};

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Num, One, Signed, Zero};

use crate::error::{Error, Result};

/// An exact ordered field. No floating point type implements this.
pub trait Field: Clone + Debug + Display + Ord + Num + Signed + Send + Sync + 'static {}

impl<T> Field for T where T: Clone + Debug + Display + Ord + Num + Signed + Send + Sync + 'static {}

/// Integer scalar used by the normal-form routines.
pub trait Ring: Clone + Debug + Display + Ord + Integer + Signed + Send + Sync + 'static {}

impl<T> Ring for T where T: Clone + Debug + Display + Ord + Integer + Signed + Send + Sync + 'static {}

/// The field of fractions of an integer [`Ring`].
pub trait RationalField: Field {
    type Int: Ring;

    fn from_int(i: Self::Int) -> Self;
    fn numer_ref(&self) -> &Self::Int;
    fn denom_ref(&self) -> &Self::Int;
    fn floor_int(&self) -> Self::Int;
    fn ceil_int(&self) -> Self::Int;
}

impl<T: Ring> RationalField for Ratio<T> {
    type Int = T;

    fn from_int(i: T) -> Self {
        Ratio::from_integer(i)
    }
    fn numer_ref(&self) -> &T {
        self.numer()
    }
    fn denom_ref(&self) -> &T {
        self.denom()
    }
    fn floor_int(&self) -> T {
        self.floor().to_integer()
    }
    fn ceil_int(&self) -> T {
        self.ceil().to_integer()
    }
}

pub fn dot<F: Field>(a: &[F], b: &[F]) -> F {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(F::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

pub fn is_zero_vec<F: Zero>(v: &[F]) -> bool {
    v.iter().all(Zero::is_zero)
}

pub fn add<F: Field>(a: &[F], b: &[F]) -> Vec<F> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.clone() + y.clone())
        .collect()
}

pub fn sub<F: Field>(a: &[F], b: &[F]) -> Vec<F> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.clone() - y.clone())
        .collect()
}

pub fn scale<F: Field>(c: &F, a: &[F]) -> Vec<F> {
    a.iter().map(|x| c.clone() * x.clone()).collect()
}

pub fn transpose<F: Clone>(rows: &[Vec<F>], ncols: usize) -> Vec<Vec<F>> {
    (0..ncols)
        .map(|j| rows.iter().map(|r| r[j].clone()).collect())
        .collect()
}

pub fn to_rational<Q: RationalField>(v: &[Q::Int]) -> Vec<Q> {
    v.iter().map(|x| Q::from_int(x.clone())).collect()
}

/// Divides an integer vector by the gcd of its entries. Sign is preserved.
pub fn primitive_part<T: Ring>(v: &[T]) -> Result<Vec<T>> {
    let g = v.iter().fold(T::zero(), |g, x| g.gcd(x));
    if g.is_zero() {
        return Err(Error::ZeroVector);
    }
    Ok(v.iter().map(|x| x.clone() / g.clone()).collect())
}

/// The primitive lattice vector on the ray through a nonzero rational vector.
pub fn primitive_direction<Q: RationalField>(v: &[Q]) -> Result<Vec<Q::Int>> {
    let l = v.iter().fold(Q::Int::one(), |l, x| l.lcm(x.denom_ref()));
    let ints: Vec<Q::Int> = v
        .iter()
        .map(|x| x.numer_ref().clone() * (l.clone() / x.denom_ref().clone()))
        .collect();
    primitive_part(&ints)
}

/// Reduced row echelon form with the pivot columns. Zero rows are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct Echelon<F> {
    pub rows: Vec<Vec<F>>,
    pub pivots: Vec<usize>,
}

pub fn rref<F: Field>(rows: &[Vec<F>], ncols: usize) -> Echelon<F> {
    let mut m: Vec<Vec<F>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = F::one() / m[r][c].clone();
        for x in m[r].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let pivot_row = m[r].clone();
                for (x, y) in m[i][c..ncols].iter_mut().zip(&pivot_row[c..ncols]) {
                    *x = x.clone() - f.clone() * y.clone();
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    Echelon { rows: m, pivots }
}

/// Rank over the field by fraction-free (Bareiss) elimination.
pub fn rank<F: Field>(rows: &[Vec<F>]) -> usize {
    let Some(ncols) = rows.first().map(Vec::len) else {
        return 0;
    };
    let mut m: Vec<Vec<F>> = rows.to_vec();
    let nrows = m.len();
    let mut prev = F::one();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..nrows {
            for j in c + 1..ncols {
                let v = (m[r][c].clone() * m[i][j].clone() - m[i][c].clone() * m[r][j].clone())
                    / prev.clone();
                m[i][j] = v;
            }
            m[i][c] = F::zero();
        }
        prev = m[r][c].clone();
        r += 1;
    }
    r
}

/// Determinant of a square matrix by Bareiss elimination.
pub fn determinant<F: Field>(rows: &[Vec<F>]) -> F {
    let n = rows.len();
    if n == 0 {
        return F::one();
    }
    let mut m = rows.to_vec();
    let mut sign = F::one();
    let mut prev = F::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !m[i][k].is_zero()) else {
            return F::zero();
        };
        if p != k {
            m.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[k][k].clone() * m[i][j].clone() - m[i][k].clone() * m[k][j].clone())
                    / prev.clone();
            }
        }
        prev = m[k][k].clone();
    }
    sign * m[n - 1][n - 1].clone()
}

/// One exact solution of `A x = b`, or `None` when inconsistent.
///
/// Free variables are set to zero, so the answer is the echelon-canonical
/// solution supported on pivot columns.
pub fn solve<F: Field>(a: &[Vec<F>], b: &[F]) -> Result<Option<Vec<F>>> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} equations but {} right-hand sides",
            a.len(),
            b.len()
        )));
    }
    let Some(ncols) = a.first().map(Vec::len) else {
        return Err(Error::DimensionMismatch("empty system".into()));
    };
    if a.iter().any(|r| r.len() != ncols) {
        return Err(Error::DimensionMismatch("ragged matrix".into()));
    }
    let aug: Vec<Vec<F>> = a
        .iter()
        .zip(b)
        .map(|(r, x)| {
            let mut r = r.clone();
            r.push(x.clone());
            r
        })
        .collect();
    let e = rref(&aug, ncols + 1);
    if e.pivots.last() == Some(&ncols) {
        return Ok(None);
    }
    let mut x = vec![F::zero(); ncols];
    for (row, &p) in e.rows.iter().zip(&e.pivots) {
        x[p] = row[ncols].clone();
    }
    Ok(Some(x))
}

/// Coefficients `c` with `Σ c_i g_i = v`, if `v` lies in the span of `gens`.
pub fn combination<F: Field>(gens: &[Vec<F>], v: &[F]) -> Option<Vec<F>> {
    if gens.is_empty() {
        return is_zero_vec(v).then(Vec::new);
    }
    solve(&transpose(gens, v.len()), v).ok().flatten()
}

/// Basis of the right kernel `{x : A x = 0}`, one vector per free column.
pub fn kernel<F: Field>(rows: &[Vec<F>], ncols: usize) -> Vec<Vec<F>> {
    let e = rref(rows, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !e.pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![F::zero(); ncols];
            x[f] = F::one();
            for (row, &p) in e.rows.iter().zip(&e.pivots) {
                x[p] = -row[f].clone();
            }
            x
        })
        .collect()
}

/// Whether `v` lies in the row span of `basis`.
pub fn in_span<F: Field>(basis: &[Vec<F>], v: &[F]) -> bool {
    if is_zero_vec(v) {
        return true;
    }
    if basis.is_empty() {
        return false;
    }
    let mut rows = basis.to_vec();
    rows.push(v.to_vec());
    rank(&rows) == rank(basis)
}

/// Basis of the intersection of two row spans in `F^n`.
pub fn span_intersection<F: Field>(a: &[Vec<F>], b: &[Vec<F>], n: usize) -> Vec<Vec<F>> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    // x ∈ A ∩ B  ⟺  x ⊥ (A^⊥ + B^⊥)
    let mut perp = kernel(a, n);
    perp.extend(kernel(b, n));
    if perp.is_empty() {
        return rref(a, n).rows;
    }
    rref(&kernel(&perp, n), n).rows
}

/// Smith normal form `U · A · W = D` with `U`, `W` unimodular.
#[derive(Debug, Clone, PartialEq)]
pub struct Smith<T> {
    pub left: Vec<Vec<T>>,
    pub diagonal: Vec<T>,
    pub right: Vec<Vec<T>>,
    /// Inverse of `right`.
    pub right_inverse: Vec<Vec<T>>,
}

fn identity<T: Ring>(n: usize) -> Vec<Vec<T>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { T::one() } else { T::zero() })
                .collect()
        })
        .collect()
}

pub fn smith_normal_form<T: Ring>(a: &[Vec<T>], ncols: usize) -> Smith<T> {
    let m = a.len();
    let n = ncols;
    let mut d: Vec<Vec<T>> = a.to_vec();
    let mut u = identity::<T>(m);
    let mut w = identity::<T>(n);
    let mut winv = identity::<T>(n);

    // row_i -= q * row_k on d and u
    fn row_op<T: Ring>(mat: &mut [Vec<T>], i: usize, k: usize, q: &T) {
        let rk = mat[k].clone();
        for (x, y) in mat[i].iter_mut().zip(rk) {
            *x = x.clone() - q.clone() * y;
        }
    }
    // col_j -= q * col_k on d and w; winv gets row_k += q * row_j
    fn col_op<T: Ring>(
        d: &mut [Vec<T>],
        w: &mut [Vec<T>],
        winv: &mut [Vec<T>],
        j: usize,
        k: usize,
        q: &T,
    ) {
        for r in d.iter_mut().chain(w.iter_mut()) {
            let t = q.clone() * r[k].clone();
            r[j] = r[j].clone() - t;
        }
        let rj = winv[j].clone();
        for (x, y) in winv[k].iter_mut().zip(rj) {
            *x = x.clone() + q.clone() * y;
        }
    }
    fn swap_cols<T: Ring>(
        d: &mut [Vec<T>],
        w: &mut [Vec<T>],
        winv: &mut [Vec<T>],
        a: usize,
        b: usize,
    ) {
        for r in d.iter_mut().chain(w.iter_mut()) {
            r.swap(a, b);
        }
        winv.swap(a, b);
    }
    fn negate_col<T: Ring>(d: &mut [Vec<T>], w: &mut [Vec<T>], winv: &mut [Vec<T>], j: usize) {
        for r in d.iter_mut().chain(w.iter_mut()) {
            r[j] = -r[j].clone();
        }
        for x in winv[j].iter_mut() {
            *x = -x.clone();
        }
    }

    let mut t = 0;
    while t < m.min(n) {
        // smallest nonzero entry of the remaining block
        let mut best: Option<(usize, usize)> = None;
        for i in t..m {
            for j in t..n {
                if !d[i][j].is_zero() && best.is_none_or(|(bi, bj)| d[i][j].abs() < d[bi][bj].abs())
                {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        d.swap(t, pi);
        u.swap(t, pi);
        swap_cols(&mut d, &mut w, &mut winv, t, pj);

        loop {
            let mut done = true;
            for i in t + 1..m {
                if !d[i][t].is_zero() {
                    let q = d[i][t].div_floor(&d[t][t]);
                    row_op(&mut d, i, t, &q);
                    row_op(&mut u, i, t, &q);
                    if !d[i][t].is_zero() {
                        done = false;
                    }
                }
            }
            for j in t + 1..n {
                if !d[t][j].is_zero() {
                    let q = d[t][j].div_floor(&d[t][t]);
                    col_op(&mut d, &mut w, &mut winv, j, t, &q);
                    if !d[t][j].is_zero() {
                        done = false;
                    }
                }
            }
            if done {
                // divisibility of the remaining block
                let bad = (t + 1..m)
                    .flat_map(|i| (t + 1..n).map(move |j| (i, j)))
                    .find(|&(i, j)| !d[i][j].is_multiple_of(&d[t][t]));
                match bad {
                    Some((i, _)) => {
                        let q = -T::one();
                        row_op(&mut d, t, i, &q);
                        row_op(&mut u, t, i, &q);
                    }
                    None => break,
                }
            } else {
                // move the smallest entry of row/column t to the pivot
                let mut best = (t, t);
                for i in t..m {
                    if !d[i][t].is_zero() && d[i][t].abs() < d[best.0][best.1].abs() {
                        best = (i, t);
                    }
                }
                for j in t..n {
                    if !d[t][j].is_zero() && d[t][j].abs() < d[best.0][best.1].abs() {
                        best = (t, j);
                    }
                }
                if best.0 != t {
                    d.swap(t, best.0);
                    u.swap(t, best.0);
                } else if best.1 != t {
                    swap_cols(&mut d, &mut w, &mut winv, t, best.1);
                }
            }
        }
        if d[t][t].is_negative() {
            negate_col(&mut d, &mut w, &mut winv, t);
        }
        t += 1;
    }
    let diagonal = (0..m.min(n))
        .map(|i| d[i][i].clone())
        .take_while(|x| !x.is_zero())
        .collect();
    Smith {
        left: u,
        diagonal,
        right: w,
        right_inverse: winv,
    }
}

/// Row-style Hermite normal form: echelon, positive pivots, entries above each
/// pivot reduced into `[0, pivot)`. Zero rows are dropped. Unique for a given
/// row lattice.
pub fn hermite_normal_form<T: Ring>(a: &[Vec<T>], ncols: usize) -> Vec<Vec<T>> {
    let mut m: Vec<Vec<T>> = a.to_vec();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        // Euclid down column c until a single nonzero remains at row r
        loop {
            let piv = (r..m.len())
                .filter(|&i| !m[i][c].is_zero())
                .min_by(|&i, &j| m[i][c].abs().cmp(&m[j][c].abs()));
            let Some(p) = piv else { break };
            m.swap(r, p);
            let mut clean = true;
            for i in r + 1..m.len() {
                if !m[i][c].is_zero() {
                    let q = m[i][c].div_floor(&m[r][c]);
                    let rr = m[r].clone();
                    for (x, y) in m[i].iter_mut().zip(rr) {
                        *x = x.clone() - q.clone() * y;
                    }
                    if !m[i][c].is_zero() {
                        clean = false;
                    }
                }
            }
            if clean {
                break;
            }
        }
        if r < m.len() && !m[r][c].is_zero() {
            if m[r][c].is_negative() {
                for x in m[r].iter_mut() {
                    *x = -x.clone();
                }
            }
            for i in 0..r {
                let q = m[i][c].div_floor(&m[r][c]);
                if !q.is_zero() {
                    let rr = m[r].clone();
                    for (x, y) in m[i].iter_mut().zip(rr) {
                        *x = x.clone() - q.clone() * y;
                    }
                }
            }
            r += 1;
        }
    }
    m.truncate(r);
    m
}

/// Lattice index of the span of linearly independent integer generators inside
/// its saturation; 1 exactly when the cone they generate is smooth.
pub fn cone_multiplicity<T: Ring>(generators: &[Vec<T>]) -> Result<T> {
    let Some(n) = generators.first().map(Vec::len) else {
        return Ok(T::one());
    };
    let q: Vec<Vec<Ratio<T>>> = generators
        .iter()
        .map(|g| g.iter().map(|x| Ratio::from_integer(x.clone())).collect())
        .collect();
    if rank(&q) != generators.len() {
        return Err(Error::NotSimplicial);
    }
    let s = smith_normal_form(generators, n);
    Ok(s.diagonal.into_iter().fold(T::one(), |a, b| a * b))
}

/// The lattice `N / (N ∩ V')` for a rational subspace `V'` given by integer
/// spanning vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientLattice<T> {
    /// `(n - k) × n` integer matrix of the projection, in Hermite normal form.
    pub projection: Vec<Vec<T>>,
    /// Basis of the saturated sublattice `N ∩ V'`.
    pub kernel_basis: Vec<Vec<T>>,
}

impl<T: Ring> QuotientLattice<T> {
    pub fn project(&self, v: &[T]) -> Vec<T> {
        self.projection
            .iter()
            .map(|row| {
                row.iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }
}

pub fn quotient_lattice<T: Ring>(spanning: &[Vec<T>], n: usize) -> QuotientLattice<T> {
    if spanning.is_empty() {
        return QuotientLattice {
            projection: identity(n),
            kernel_basis: Vec::new(),
        };
    }
    let s = smith_normal_form(spanning, n);
    let k = s.diagonal.len();
    let cols: Vec<Vec<T>> = (k..n)
        .map(|j| (0..n).map(|i| s.right[i][j].clone()).collect())
        .collect();
    QuotientLattice {
        projection: hermite_normal_form(&cols, n),
        kernel_basis: hermite_normal_form(&s.right_inverse[..k], n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Int, Rat, Rat64};
    use proptest::prelude::*;

    fn iv(v: &[i64]) -> Vec<Int> {
        v.iter().map(|&x| Int::from(x)).collect()
    }
    fn rv(v: &[i64]) -> Vec<Rat> {
        v.iter().map(|&x| Rat::from_integer(Int::from(x))).collect()
    }

    #[test]
    fn primitive_part_examples() {
        assert_eq!(primitive_part(&iv(&[2, 4, 6])).unwrap(), iv(&[1, 2, 3]));
        assert_eq!(primitive_part(&iv(&[1, 0, 0])).unwrap(), iv(&[1, 0, 0]));
        assert_eq!(primitive_part(&iv(&[0, -3, 0])).unwrap(), iv(&[0, -1, 0]));
        assert_eq!(primitive_part(&iv(&[0, 0])), Err(Error::ZeroVector));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&[rv(&[1, 0, 0]), rv(&[0, 1, 0]), rv(&[0, 0, 1])]), 3);
        assert_eq!(rank(&[rv(&[1, 1, 0]), rv(&[2, 2, 0])]), 1);
        assert_eq!(rank(&[rv(&[1, 0, 0]), rv(&[0, 1, 1]), rv(&[0, 1, 0])]), 3);
        // cofactor expansion along the first row gives det = -1
        assert_eq!(
            determinant(&[rv(&[1, 0, 0]), rv(&[0, 1, 1]), rv(&[0, 1, 0])]),
            Rat::from_integer((-1).into())
        );
    }

    #[test]
    fn solve_examples() {
        let id = vec![rv(&[1, 0]), rv(&[0, 1])];
        assert_eq!(solve(&id, &rv(&[3, 5])).unwrap(), Some(rv(&[3, 5])));
        let bad = vec![rv(&[1, 0]), rv(&[1, 0])];
        assert_eq!(solve(&bad, &rv(&[1, 2])).unwrap(), None);
        assert!(solve(&bad, &rv(&[1])).is_err());

        // the functional on <v1,v2,v3> with values (0,0,1): only v3 lies in span(v3,v4)
        let a = vec![rv(&[1, 0, 0]), rv(&[0, 1, 1]), rv(&[0, 1, 0])];
        let m = solve(&a, &rv(&[0, 0, 1])).unwrap().unwrap();
        assert_eq!(m, rv(&[0, 1, -1]));
        // forward substitution on v4 = v1 + v2 - v3
        assert_eq!(dot(&m, &rv(&[1, 0, 1])), Rat::from_integer((-1).into()));
        // underdetermined: free variable set to zero
        let under = vec![rv(&[1, 1, 0])];
        assert_eq!(solve(&under, &rv(&[2])).unwrap(), Some(rv(&[2, 0, 0])));
    }

    #[test]
    fn multiplicity_examples() {
        assert_eq!(
            cone_multiplicity(&[iv(&[1, 0, 0]), iv(&[0, 1, 0]), iv(&[0, 0, 1])]).unwrap(),
            Int::from(1)
        );
        assert_eq!(
            cone_multiplicity(&[iv(&[1, 0, 0]), iv(&[0, 1, 1]), iv(&[0, 1, 0])]).unwrap(),
            Int::from(1)
        );
        assert_eq!(
            cone_multiplicity(&[iv(&[1, 1]), iv(&[1, -1])]).unwrap(),
            Int::from(2)
        );
        assert_eq!(
            cone_multiplicity(&[iv(&[1, 1]), iv(&[2, 2])]),
            Err(Error::NotSimplicial)
        );
        // lower-dimensional: (1,1,0),(1,-1,0) spans index 2 in its saturation
        assert_eq!(
            cone_multiplicity(&[iv(&[1, 1, 0]), iv(&[1, -1, 0])]).unwrap(),
            Int::from(2)
        );
        assert_eq!(cone_multiplicity(&[iv(&[2, 0, 0])]).unwrap(), Int::from(2));
    }

    #[test]
    fn kernel_and_intersection() {
        let k = kernel(&[rv(&[1, 1, 0])], 3);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(dot(v, &rv(&[1, 1, 0])).is_zero());
        }
        let i = span_intersection(
            &[rv(&[1, 0, 0]), rv(&[0, 1, 1])],
            &[rv(&[0, 1, 0]), rv(&[1, 0, 1])],
            3,
        );
        assert_eq!(i, vec![rv(&[1, 1, 1])]);
    }

    #[test]
    fn quotient_examples() {
        let q = quotient_lattice(&[iv(&[0, 0, 1])], 3);
        assert_eq!(q.projection, vec![iv(&[1, 0, 0]), iv(&[0, 1, 0])]);
        assert_eq!(q.kernel_basis, vec![iv(&[0, 0, 1])]);
        let q = quotient_lattice(&[iv(&[2, 2])], 2);
        assert_eq!(q.kernel_basis, vec![iv(&[1, 1])]);
        assert_eq!(q.project(&iv(&[1, 0])).len(), 1);
        assert_eq!(q.project(&iv(&[1, 1])), iv(&[0]));
    }

    #[test]
    fn generic_over_machine_rationals() {
        let m: Vec<Vec<Rat64>> = vec![
            vec![Rat64::from(2), Rat64::from(1)],
            vec![Rat64::from(4), Rat64::from(2)],
        ];
        assert_eq!(rank(&m), 1);
        assert_eq!(
            primitive_direction(&[Rat64::new(1, 2), Rat64::new(-3, 4)]).unwrap(),
            vec![2, -3]
        );
    }

    fn minors_gcd(gens: &[Vec<i64>]) -> i64 {
        // gcd over all k×k minors, by brute-force enumeration of column subsets
        let k = gens.len();
        let n = gens[0].len();
        let mut g = 0i64;
        let mut cols = vec![0usize; k];
        fn rec(
            start: usize,
            depth: usize,
            cols: &mut Vec<usize>,
            gens: &[Vec<i64>],
            n: usize,
            g: &mut i64,
        ) {
            if depth == cols.len() {
                let m: Vec<Vec<Rat64>> = gens
                    .iter()
                    .map(|r| cols.iter().map(|&c| Rat64::from(r[c])).collect())
                    .collect();
                *g = g.gcd(&determinant(&m).to_integer());
                return;
            }
            for c in start..n {
                cols[depth] = c;
                rec(c + 1, depth + 1, cols, gens, n, g);
            }
        }
        rec(0, 0, &mut cols, gens, n, &mut g);
        g
    }

    proptest! {
        #[test]
        fn primitive_part_idempotent_and_scale_invariant(
            v in prop::collection::vec(-20i64..20, 1..5), k in 1i64..6
        ) {
            prop_assume!(v.iter().any(|&x| x != 0));
            let p = primitive_part(&v).unwrap();
            prop_assert_eq!(primitive_part(&p).unwrap(), p.clone());
            let kv: Vec<i64> = v.iter().map(|x| x * k).collect();
            prop_assert_eq!(primitive_part(&kv).unwrap(), p);
        }

        #[test]
        fn rank_of_transpose(rows in prop::collection::vec(prop::collection::vec(-3i64..4, 4), 1..5)) {
            let m: Vec<Vec<Rat64>> = rows.iter().map(|r| r.iter().map(|&x| Rat64::from(x)).collect()).collect();
            prop_assert_eq!(rank(&m), rank(&transpose(&m, 4)));
            prop_assert_eq!(rank(&m), rref(&m, 4).rows.len());
        }

        #[test]
        fn solve_is_exact(rows in prop::collection::vec(prop::collection::vec(-3i64..4, 3), 1..5),
                          b in prop::collection::vec(-5i64..5, 5)) {
            let a: Vec<Vec<Rat>> = rows.iter().map(|r| rv(r)).collect();
            let b = rv(&b[..a.len()]);
            if let Some(x) = solve(&a, &b).unwrap() {
                for (row, bi) in a.iter().zip(&b) {
                    prop_assert_eq!(&dot(row, &x), bi);
                }
            }
        }

        #[test]
        fn multiplicity_matches_minors_and_is_invariant(
            rows in prop::collection::vec(prop::collection::vec(-4i64..5, 3), 1..4),
            perm_seed in 0usize..6
        ) {
            let q: Vec<Vec<Rat64>> = rows.iter().map(|r| r.iter().map(|&x| Rat64::from(x)).collect()).collect();
            prop_assume!(rank(&q) == rows.len());
            let m = cone_multiplicity(&rows).unwrap();
            prop_assert_eq!(m, minors_gcd(&rows));
            let mut p = rows.clone();
            p.rotate_left(perm_seed % rows.len());
            prop_assert_eq!(cone_multiplicity(&p).unwrap(), m);
            // unimodular change of basis: x -> (x0 + 2 x1, x1, x2 - x0)
            let g: Vec<Vec<i64>> = rows.iter().map(|r| vec![r[0] + 2 * r[1], r[1], r[2] - r[0]]).collect();
            prop_assert_eq!(cone_multiplicity(&g).unwrap(), m);
        }

        #[test]
        fn smith_decomposition_holds(rows in prop::collection::vec(prop::collection::vec(-6i64..7, 3), 1..4)) {
            let s = smith_normal_form(&rows, 3);
            // U A W == D
            let mul = |a: &[Vec<i64>], b: &[Vec<i64>]| -> Vec<Vec<i64>> {
                a.iter()
                    .map(|row| (0..b[0].len()).map(|j| row.iter().zip(b).map(|(x, r)| x * r[j]).sum()).collect())
                    .collect()
            };
            let d = mul(&mul(&s.left, &rows), &s.right);
            for (i, row) in d.iter().enumerate() {
                for (j, &x) in row.iter().enumerate() {
                    let expect = if i == j && i < s.diagonal.len() { s.diagonal[i] } else { 0 };
                    prop_assert_eq!(x, expect);
                }
            }
            for w in s.diagonal.windows(2) { prop_assert!(w[1] % w[0] == 0); }
            // W * Winv == I
            let id = mul(&s.right, &s.right_inverse);
            for (i, row) in id.iter().enumerate() {
                for (j, &x) in row.iter().enumerate() {
                    prop_assert_eq!(x, i64::from(i == j));
                }
            }
        }
    }
}
