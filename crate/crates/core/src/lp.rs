//! Exact two-phase simplex over any [`Field`], with Bland's rule.
//!
//! Variables are free. Constraints are `a·x ≤ b` and `a·x = b`. The solver is
//! small and dense; it is meant for the handful-of-variables programs that come
//! up in boundedness certificates and strict-feasibility queries.

use crate::exactlin::{dot, Field};

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome<F> {
    Optimal {
        value: F,
        point: Vec<F>,
    },
    /// `point` is feasible and `point + t·direction` stays feasible for all
    /// `t ≥ 0` while the objective grows without bound.
    Unbounded {
        point: Vec<F>,
        direction: Vec<F>,
    },
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<F> {
    pub nvars: usize,
    pub le: Vec<(Vec<F>, F)>,
    pub eq: Vec<(Vec<F>, F)>,
}

impl<F: Field> LinearProgram<F> {
    pub fn new(nvars: usize) -> Self {
        LinearProgram {
            nvars,
            le: Vec::new(),
            eq: Vec::new(),
        }
    }

    pub fn add_le(&mut self, a: Vec<F>, b: F) -> &mut Self {
        debug_assert_eq!(a.len(), self.nvars);
        self.le.push((a, b));
        self
    }

    pub fn add_ge(&mut self, a: Vec<F>, b: F) -> &mut Self {
        self.add_le(a.into_iter().map(|x| -x).collect(), -b)
    }

    pub fn add_eq(&mut self, a: Vec<F>, b: F) -> &mut Self {
        debug_assert_eq!(a.len(), self.nvars);
        self.eq.push((a, b));
        self
    }

    pub fn is_satisfied_by(&self, x: &[F]) -> bool {
        self.le.iter().all(|(a, b)| dot(a, x) <= *b) && self.eq.iter().all(|(a, b)| dot(a, x) == *b)
    }

    pub fn feasible_point(&self) -> Option<Vec<F>> {
        match self.maximize(&vec![F::zero(); self.nvars]) {
            LpOutcome::Optimal { point, .. } => Some(point),
            LpOutcome::Unbounded { point, .. } => Some(point),
            LpOutcome::Infeasible => None,
        }
    }

    pub fn minimize(&self, c: &[F]) -> LpOutcome<F> {
        let neg: Vec<F> = c.iter().map(|x| -x.clone()).collect();
        match self.maximize(&neg) {
            LpOutcome::Optimal { value, point } => LpOutcome::Optimal {
                value: -value,
                point,
            },
            other => other,
        }
    }

    pub fn maximize(&self, c: &[F]) -> LpOutcome<F> {
        let n = self.nvars;
        let m_le = self.le.len();
        let m = m_le + self.eq.len();
        // columns: x+ (n) | x- (n) | slack (m_le) | artificial (m) | rhs
        let art0 = 2 * n + m_le;
        let ncols = art0 + m;
        let mut t: Vec<Vec<F>> = Vec::with_capacity(m);
        for (i, (a, b)) in self.le.iter().chain(&self.eq).enumerate() {
            let mut row = vec![F::zero(); ncols + 1];
            for k in 0..n {
                row[k] = a[k].clone();
                row[n + k] = -a[k].clone();
            }
            if i < m_le {
                row[2 * n + i] = F::one();
            }
            row[ncols] = b.clone();
            if b.is_negative() {
                for x in row.iter_mut() {
                    *x = -x.clone();
                }
            }
            row[art0 + i] = F::one();
            t.push(row);
        }
        let mut basis: Vec<usize> = (art0..art0 + m).collect();

        // phase 1: maximize -Σ artificial
        let mut cost1 = vec![F::zero(); ncols];
        for c in cost1.iter_mut().skip(art0) {
            *c = -F::one();
        }
        match run_simplex(&mut t, &mut basis, &cost1, ncols) {
            Phase::Optimal => {}
            Phase::Unbounded(_) => unreachable!("phase one is bounded above by zero"),
        }
        let infeas: F = basis
            .iter()
            .zip(&t)
            .filter(|(&b, _)| b >= art0)
            .fold(F::zero(), |acc, (_, row)| acc + row[ncols].clone());
        if infeas.is_positive() {
            return LpOutcome::Infeasible;
        }
        // drive artificials out of the basis; drop redundant rows
        let mut i = 0;
        while i < t.len() {
            if basis[i] >= art0 {
                if let Some(j) = (0..art0).find(|&j| !t[i][j].is_zero()) {
                    pivot(&mut t, &mut basis, i, j);
                } else {
                    t.remove(i);
                    basis.remove(i);
                    continue;
                }
            }
            i += 1;
        }

        // phase 2
        let mut cost2 = vec![F::zero(); ncols];
        for k in 0..n {
            cost2[k] = c[k].clone();
            cost2[n + k] = -c[k].clone();
        }
        let extract = |t: &[Vec<F>], basis: &[usize]| -> Vec<F> {
            let mut y = vec![F::zero(); ncols];
            for (row, &b) in t.iter().zip(basis) {
                y[b] = row[ncols].clone();
            }
            (0..n).map(|k| y[k].clone() - y[n + k].clone()).collect()
        };
        match run_simplex(&mut t, &mut basis, &cost2, art0) {
            Phase::Optimal => {
                let point = extract(&t, &basis);
                LpOutcome::Optimal {
                    value: dot(c, &point),
                    point,
                }
            }
            Phase::Unbounded(j) => {
                let point = extract(&t, &basis);
                let mut d = vec![F::zero(); ncols];
                d[j] = F::one();
                for (row, &b) in t.iter().zip(&basis) {
                    d[b] = -row[j].clone();
                }
                let direction = (0..n).map(|k| d[k].clone() - d[n + k].clone()).collect();
                LpOutcome::Unbounded { point, direction }
            }
        }
    }
}

enum Phase {
    Optimal,
    Unbounded(usize),
}

fn pivot<F: Field>(t: &mut [Vec<F>], basis: &mut [usize], r: usize, c: usize) {
    let inv = F::one() / t[r][c].clone();
    for x in t[r].iter_mut() {
        *x = x.clone() * inv.clone();
    }
    let prow = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i != r && !row[c].is_zero() {
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(&prow) {
                *x = x.clone() - f.clone() * p.clone();
            }
        }
    }
    basis[r] = c;
}

/// Maximizes `cost·y` over columns `0..allowed`; the last column is the rhs.
fn run_simplex<F: Field>(
    t: &mut [Vec<F>],
    basis: &mut [usize],
    cost: &[F],
    allowed: usize,
) -> Phase {
    let rhs = cost.len();
    loop {
        let entering = (0..allowed).find(|&j| {
            if basis.contains(&j) {
                return false;
            }
            let reduced = t
                .iter()
                .zip(basis.iter())
                .fold(cost[j].clone(), |acc, (row, &b)| {
                    acc - cost[b].clone() * row[j].clone()
                });
            reduced.is_positive()
        });
        let Some(j) = entering else {
            return Phase::Optimal;
        };
        let mut leave: Option<(usize, F)> = None;
        for (i, row) in t.iter().enumerate() {
            if row[j].is_positive() {
                let ratio = row[rhs].clone() / row[j].clone();
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        match leave {
            None => return Phase::Unbounded(j),
            Some((r, _)) => pivot(t, basis, r, j),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rat64 as Q;

    fn q(v: &[i64]) -> Vec<Q> {
        v.iter().map(|&x| Q::from(x)).collect()
    }

    #[test]
    fn simple_maximum() {
        let mut lp = LinearProgram::new(2);
        lp.add_le(q(&[1, 1]), Q::from(4))
            .add_le(q(&[1, 3]), Q::from(6))
            .add_ge(q(&[1, 0]), Q::from(0))
            .add_ge(q(&[0, 1]), Q::from(0));
        match lp.maximize(&q(&[3, 2])) {
            LpOutcome::Optimal { value, point } => {
                assert_eq!(value, Q::from(12));
                assert_eq!(point, q(&[4, 0]));
            }
            o => panic!("{o:?}"),
        }
        match lp.maximize(&q(&[1, 3])) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, Q::from(6)),
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn fractional_optimum_and_equalities() {
        let mut lp = LinearProgram::new(2);
        lp.add_eq(q(&[2, 3]), Q::from(1))
            .add_ge(q(&[1, 0]), Q::from(0))
            .add_ge(q(&[0, 1]), Q::from(0));
        match lp.maximize(&q(&[0, 1])) {
            LpOutcome::Optimal { value, point } => {
                assert_eq!(value, Q::new(1, 3));
                assert!(lp.is_satisfied_by(&point));
            }
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.add_le(q(&[1]), Q::from(0)).add_ge(q(&[1]), Q::from(1));
        assert_eq!(lp.maximize(&q(&[1])), LpOutcome::Infeasible);

        let mut lp = LinearProgram::new(2);
        lp.add_ge(q(&[1, -1]), Q::from(0))
            .add_ge(q(&[0, 1]), Q::from(0));
        match lp.maximize(&q(&[1, 1])) {
            LpOutcome::Unbounded { point, direction } => {
                assert!(lp.is_satisfied_by(&point));
                assert!(dot(&q(&[1, 1]), &direction) > Q::from(0));
                // recession direction
                assert!(dot(&q(&[1, -1]), &direction) >= Q::from(0));
                assert!(dot(&q(&[0, 1]), &direction) >= Q::from(0));
            }
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(3);
        lp.add_eq(q(&[1, 1, 0]), Q::from(2))
            .add_eq(q(&[2, 2, 0]), Q::from(4))
            .add_le(q(&[0, 0, 1]), Q::from(1))
            .add_ge(q(&[1, 0, 0]), Q::from(0))
            .add_ge(q(&[0, 1, 0]), Q::from(0))
            .add_ge(q(&[0, 0, 1]), Q::from(-1));
        match lp.maximize(&q(&[1, 0, 1])) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, Q::from(3)),
            o => panic!("{o:?}"),
        }
    }
}
