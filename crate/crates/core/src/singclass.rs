//! Discrepancies of exceptional toric divisors and the terminal/canonical
//! classification of `F_V`.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactlin::{
    dot, primitive_direction, primitive_part, quotient_lattice, solve, to_rational, transpose,
};
use crate::fan::FanData;
use crate::foliation::FoliationDatum;
use crate::polycone::{extreme_rays, intersect_subspace, lattice_points, RatPolytope};
use crate::{Int, IntVector, Rat, RatVector};

/// A linear functional on `span(σ)` given by its values on σ's generators,
/// together with one extension to `N_Q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeFunctional {
    pub cone: Vec<usize>,
    pub values: Vec<Rat>,
    pub extension: RatVector,
}

impl ConeFunctional {
    pub fn new(fan: &FanData, cone: &[usize], values: Vec<Rat>) -> ConeFunctional {
        let gens: Vec<RatVector> = cone.iter().map(|&i| fan.ray_q(i)).collect();
        let extension = solve(&gens, &values)
            .expect("dimensions agree")
            .expect("simplicial cones have independent generators");
        ConeFunctional {
            cone: cone.to_vec(),
            values,
            extension,
        }
    }

    pub fn eval(&self, v: &[Rat]) -> Rat {
        dot(&self.extension, v)
    }

    pub fn eval_int(&self, v: &[Int]) -> Rat {
        self.eval(&to_rational::<Rat>(v))
    }
}

/// `m_σ` (1 on every generator), `m'_σ = m_σ - m_{σ,V}`, and `m_{σ,V}` (1 on
/// generators in `V`, 0 on the others).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeFunctionals {
    pub m_sigma: ConeFunctional,
    pub m_prime: ConeFunctional,
    pub m_v: ConeFunctional,
}

pub fn m_sigma_v(fan: &FanData, cone: &[usize], v: &FoliationDatum) -> ConeFunctionals {
    let in_v: Vec<bool> = cone.iter().map(|&i| v.contains_int(fan.ray(i))).collect();
    let ind = |b: bool| if b { Rat::one() } else { Rat::zero() };
    ConeFunctionals {
        m_sigma: ConeFunctional::new(fan, cone, vec![Rat::one(); cone.len()]),
        m_prime: ConeFunctional::new(fan, cone, in_v.iter().map(|&b| ind(!b)).collect()),
        m_v: ConeFunctional::new(fan, cone, in_v.iter().map(|&b| ind(b)).collect()),
    }
}

fn discrepancy_unchecked(m_v: &ConeFunctional, v: &FoliationDatum, vj: &[Int]) -> Rat {
    let m = m_v.eval_int(vj);
    if v.contains_int(vj) {
        m - Rat::one()
    } else {
        m
    }
}

/// Discrepancy of the divisor of the ray through the primitive vector `vj`
/// in the star subdivision of the cone `cone`.
pub fn discrepancy(fan: &FanData, cone: &[usize], v: &FoliationDatum, vj: &[Int]) -> Result<Rat> {
    if vj.len() != fan.rank() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} in a rank-{} lattice",
            vj.len(),
            fan.rank()
        )));
    }
    if primitive_part(vj)? != vj {
        return Err(Error::NotPrimitive(format!("{vj:?}")));
    }
    if fan.ray_index(vj).is_some() {
        return Err(Error::NotExceptional(format!("{vj:?}")));
    }
    if !fan.cone(cone).contains(&to_rational::<Rat>(vj)) {
        return Err(Error::NotInCone(format!("{vj:?} not in cone {cone:?}")));
    }
    Ok(discrepancy_unchecked(&m_sigma_v(fan, cone, v).m_v, v, vj))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verdict {
    NotCanonical,
    CanonicalNotTerminal,
    Terminal,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Terminal => "terminal",
            Verdict::CanonicalNotTerminal => "canonical_not_terminal",
            Verdict::NotCanonical => "not_canonical",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub cone: Vec<usize>,
    pub point: IntVector,
    pub discrepancy: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeReport {
    pub cone: Vec<usize>,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingularityReport {
    pub verdict: Verdict,
    pub cones: Vec<ConeReport>,
    pub witness: Option<Witness>,
}

impl SingularityReport {
    pub fn is_terminal(&self) -> bool {
        self.verdict == Verdict::Terminal
    }

    pub fn is_canonical(&self) -> bool {
        self.verdict != Verdict::NotCanonical
    }
}

/// Lex-smallest candidate among those with the given property.
fn smallest(cands: &[(IntVector, Rat)], pred: impl Fn(&Rat) -> bool) -> Option<(IntVector, Rat)> {
    cands
        .iter()
        .filter(|(_, d)| pred(d))
        .min_by(|a, b| a.0.cmp(&b.0))
        .cloned()
}

pub fn classify_cone(fan: &FanData, cone: &[usize], v: &FoliationDatum) -> Result<ConeReport> {
    let n = fan.rank();
    let fs = m_sigma_v(fan, cone, v);
    let m_v = &fs.m_v;
    debug_assert!(m_v.values.iter().all(|x| !x.is_negative()));

    // candidates breaking terminality off V: relative interiors of 2-faces
    // spanned by rays outside V
    let off_v: Vec<&IntVector> = cone
        .iter()
        .map(|&i| fan.ray(i))
        .filter(|r| !v.contains_int(r))
        .collect();
    let mut terminal_breaks: Vec<(IntVector, Rat)> = Vec::new();
    for a in 0..off_v.len() {
        for b in a + 1..off_v.len() {
            for (s, t) in [(1, 1), (2, 1), (1, 2)] {
                let p: IntVector = off_v[a]
                    .iter()
                    .zip(off_v[b])
                    .map(|(x, y)| x * Int::from(s) + y * Int::from(t))
                    .collect();
                let p = primitive_part(&p)?;
                if !v.contains_int(&p) && fan.ray_index(&p).is_none() {
                    let d = discrepancy_unchecked(m_v, v, &p);
                    terminal_breaks.push((p, d));
                }
            }
        }
    }

    // σ ∩ V: an extreme ray where m_{σ,V} vanishes has discrepancy -1
    let sigma = fan.cone(cone);
    let c = intersect_subspace(&sigma, v.basis())?;
    let mut canonical_breaks: Vec<(IntVector, Rat)> = Vec::new();
    let mut positive_on_c = true;
    for r in extreme_rays(&c)? {
        if m_v.eval_int(&r).is_zero() {
            positive_on_c = false;
            let d = discrepancy_unchecked(m_v, v, &r);
            canonical_breaks.push((r, d));
        }
    }

    if positive_on_c {
        // {x ∈ σ ∩ V : m_{σ,V}(x) ≤ 1} is a polytope; enumerate it in a
        // basis of the lattice N ∩ V
        let spanning: Vec<IntVector> = v
            .basis()
            .iter()
            .map(|b| primitive_direction(b))
            .collect::<Result<_>>()?;
        let kernel = quotient_lattice(&spanning, n).kernel_basis;
        let lattice: Vec<RatVector> = kernel.iter().map(|b| to_rational(b)).collect();
        let pull = |a: &[Rat]| -> RatVector { lattice.iter().map(|b| dot(a, b)).collect() };
        let h = sigma.h_description();
        let mut p = RatPolytope::new(lattice.len());
        for a in &h.inequalities {
            p.le.push((pull(a).iter().map(|x| -x).collect(), Rat::zero()));
        }
        for a in &h.equations {
            p.eq.push((pull(a), Rat::zero()));
        }
        p.le.push((pull(&m_v.extension), Rat::one()));
        let mut seen: Vec<IntVector> = Vec::new();
        for c in lattice_points(&p)? {
            let x: IntVector = (0..n)
                .map(|i| {
                    c.iter()
                        .zip(&kernel)
                        .fold(Int::zero(), |acc, (cj, b)| acc + cj * &b[i])
                })
                .collect();
            if x.iter().all(Zero::is_zero) {
                continue;
            }
            let prim = primitive_direction(&to_rational::<Rat>(&x))?;
            if fan.ray_index(&prim).is_some() || seen.contains(&prim) {
                continue;
            }
            seen.push(prim.clone());
            let d = discrepancy_unchecked(m_v, v, &prim);
            if d.is_negative() {
                canonical_breaks.push((prim, d));
            } else if d.is_zero() {
                terminal_breaks.push((prim, d));
            }
        }
    }

    let mk = |(point, discrepancy): (IntVector, Rat)| Witness {
        cone: cone.to_vec(),
        point,
        discrepancy,
    };
    let report = if let Some(w) = smallest(&canonical_breaks, |d| d.is_negative()) {
        ConeReport {
            cone: cone.to_vec(),
            verdict: Verdict::NotCanonical,
            witness: Some(mk(w)),
        }
    } else if let Some(w) = smallest(&terminal_breaks, |d| !d.is_positive()) {
        ConeReport {
            cone: cone.to_vec(),
            verdict: Verdict::CanonicalNotTerminal,
            witness: Some(mk(w)),
        }
    } else {
        ConeReport {
            cone: cone.to_vec(),
            verdict: Verdict::Terminal,
            witness: None,
        }
    };
    Ok(report)
}

pub fn classify(fan: &FanData, v: &FoliationDatum) -> Result<SingularityReport> {
    let cones: Vec<ConeReport> = fan
        .cones()
        .iter()
        .map(|c| classify_cone(fan, c, v))
        .collect::<Result<_>>()?;
    let verdict = cones
        .iter()
        .map(|c| c.verdict)
        .min()
        .unwrap_or(Verdict::Terminal);
    let witness = cones
        .iter()
        .filter(|c| c.verdict == verdict)
        .filter_map(|c| c.witness.clone())
        .min_by(|a, b| a.point.cmp(&b.point));
    Ok(SingularityReport {
        verdict,
        cones,
        witness,
    })
}

/// Generators of the cone as columns: coordinates of `x` in the ray basis.
pub fn ray_coordinates(fan: &FanData, cone: &[usize], x: &[Rat]) -> Option<RatVector> {
    let gens: Vec<RatVector> = cone.iter().map(|&i| fan.ray_q(i)).collect();
    let cols = transpose(&gens, cone.len());
    solve(&cols, x).ok().flatten()
}
