//! Toric foliations `F_V` given by a rational subspace `V ⊆ N_Q`.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactlin::{
    in_span, kernel, primitive_direction, rank, rref, solve, span_intersection, to_rational,
};
use crate::fan::{FanData, Wall};
use crate::polycone::relint_rational_point;
use crate::{Int, IntVector, Rat, RatVector};

/// A nonzero proper rational subspace `V`, stored as its reduced row echelon
/// basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FoliationDatum {
    ambient: usize,
    basis: Vec<RatVector>,
}

impl FoliationDatum {
    pub fn new(ambient: usize, spanning: Vec<RatVector>) -> Result<FoliationDatum> {
        if let Some(v) = spanning.iter().find(|v| v.len() != ambient) {
            return Err(Error::InvalidFoliation(format!(
                "vector of length {} in a rank-{ambient} lattice",
                v.len()
            )));
        }
        let basis = if spanning.is_empty() {
            Vec::new()
        } else {
            rref(&spanning, ambient).rows
        };
        if basis.is_empty() || basis.len() >= ambient {
            return Err(Error::InvalidFoliation(format!(
                "subspace has dimension {} but must lie strictly between 0 and {ambient}",
                basis.len()
            )));
        }
        Ok(FoliationDatum { ambient, basis })
    }

    pub fn from_int(ambient: usize, spanning: &[IntVector]) -> Result<FoliationDatum> {
        FoliationDatum::new(ambient, spanning.iter().map(|v| to_rational(v)).collect())
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[RatVector] {
        &self.basis
    }

    pub fn contains(&self, v: &[Rat]) -> bool {
        in_span(&self.basis, v)
    }

    pub fn contains_int(&self, v: &[Int]) -> bool {
        self.contains(&to_rational::<Rat>(v))
    }

    /// Basis of the annihilator `W = V^⊥ ⊆ M_Q`.
    pub fn annihilator(&self) -> Vec<RatVector> {
        kernel(&self.basis, self.ambient)
    }

    pub fn is_subspace_of(&self, span: &[RatVector]) -> bool {
        self.basis.iter().all(|b| in_span(span, b))
    }
}

/// A torus-invariant Weil divisor `Σ a_ρ D_ρ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TorusDivisor {
    pub coeffs: Vec<Rat>,
}

impl TorusDivisor {
    pub fn zero(num_rays: usize) -> TorusDivisor {
        TorusDivisor {
            coeffs: vec![Rat::zero(); num_rays],
        }
    }

    pub fn from_ints(coeffs: &[i64]) -> TorusDivisor {
        TorusDivisor {
            coeffs: coeffs
                .iter()
                .map(|&c| Rat::from_integer(Int::from(c)))
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn add(&self, other: &TorusDivisor) -> TorusDivisor {
        TorusDivisor {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn neg(&self) -> TorusDivisor {
        TorusDivisor {
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }

    pub fn sub(&self, other: &TorusDivisor) -> TorusDivisor {
        self.add(&other.neg())
    }
}

impl fmt::Display for TorusDivisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let a = c.abs();
            if a.is_one() {
                write!(f, "D_{i}")?;
            } else {
                write!(f, "{a}*D_{i}")?;
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// One step of a filtration: from `index` on, the filtered piece is the span
/// of `basis` (until the next jump).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Jump {
    pub index: i64,
    pub basis: Vec<RatVector>,
}

/// Sparse per-ray multi-filtration. Before the first jump the piece is zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Filtration {
    /// Dimension of the space the pieces live in (`N_Q` or `M_Q`).
    pub ambient_dim: usize,
    pub per_ray: Vec<Vec<Jump>>,
}

impl Filtration {
    /// `dim F^ρ(i)`.
    pub fn dim_at(&self, ray: usize, i: i64) -> usize {
        self.per_ray[ray]
            .iter()
            .take_while(|j| j.index <= i)
            .last()
            .map_or(0, |j| j.basis.len())
    }

    pub fn stable_dim(&self, ray: usize) -> usize {
        self.per_ray[ray].last().map_or(0, |j| j.basis.len())
    }
}

pub fn rays_in_v(fan: &FanData, v: &FoliationDatum) -> Vec<usize> {
    (0..fan.num_rays())
        .filter(|&i| v.contains_int(fan.ray(i)))
        .collect()
}

/// `K_F = -Σ_{v_ρ ∈ V} D_ρ`.
pub fn canonical_divisor(fan: &FanData, v: &FoliationDatum) -> TorusDivisor {
    let mut d = TorusDivisor::zero(fan.num_rays());
    for i in rays_in_v(fan, v) {
        d.coeffs[i] = -Rat::one();
    }
    d
}

/// `K_X = -Σ D_ρ`.
pub fn canonical_divisor_of_variety(fan: &FanData) -> TorusDivisor {
    TorusDivisor {
        coeffs: vec![-Rat::one(); fan.num_rays()],
    }
}

pub fn foliation_filtration(fan: &FanData, v: &FoliationDatum) -> Filtration {
    let per_ray = (0..fan.num_rays())
        .map(|i| {
            let full = Jump {
                index: 0,
                basis: v.basis.clone(),
            };
            if v.contains_int(fan.ray(i)) {
                vec![
                    Jump {
                        index: -1,
                        basis: vec![fan.ray_q(i)],
                    },
                    full,
                ]
            } else {
                vec![full]
            }
        })
        .collect();
    Filtration {
        ambient_dim: fan.rank(),
        per_ray,
    }
}

/// Filtration of the conormal sheaf, living in `W = V^⊥ ⊆ M_Q`.
pub fn conormal_filtration(fan: &FanData, v: &FoliationDatum) -> Filtration {
    let n = fan.rank();
    let w = v.annihilator();
    let per_ray = (0..fan.num_rays())
        .map(|i| {
            let ray = fan.ray_q(i);
            let full = Jump {
                index: 0,
                basis: w.clone(),
            };
            let perp = kernel(&[ray], n);
            if w.iter().all(|m| in_span(&perp, m)) {
                vec![full]
            } else {
                vec![
                    Jump {
                        index: 0,
                        basis: span_intersection(&w, &perp, n),
                    },
                    Jump {
                        index: 1,
                        basis: w.clone(),
                    },
                ]
            }
        })
        .collect();
    Filtration {
        ambient_dim: n,
        per_ray,
    }
}

pub fn tangent_filtration(fan: &FanData) -> Filtration {
    let n = fan.rank();
    let all = identity(n);
    let per_ray = (0..fan.num_rays())
        .map(|i| {
            vec![
                Jump {
                    index: -1,
                    basis: vec![fan.ray_q(i)],
                },
                Jump {
                    index: 0,
                    basis: all.clone(),
                },
            ]
        })
        .collect();
    Filtration {
        ambient_dim: n,
        per_ray,
    }
}

pub fn cotangent_filtration(fan: &FanData) -> Filtration {
    let n = fan.rank();
    let all = identity(n);
    let per_ray = (0..fan.num_rays())
        .map(|i| {
            vec![
                Jump {
                    index: 0,
                    basis: kernel(&[fan.ray_q(i)], n),
                },
                Jump {
                    index: 1,
                    basis: all.clone(),
                },
            ]
        })
        .collect();
    Filtration {
        ambient_dim: n,
        per_ray,
    }
}

fn identity(n: usize) -> Vec<RatVector> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Rat::one() } else { Rat::zero() })
                .collect()
        })
        .collect()
}

/// `c_1 = -Σ_ρ Σ_i i·dim F^[ρ](i) D_ρ`.
pub fn c1_from_filtration(phi: &Filtration) -> TorusDivisor {
    let coeffs = phi
        .per_ray
        .iter()
        .map(|jumps| {
            let mut prev = 0usize;
            let mut s = Int::zero();
            for j in jumps {
                let d = j.basis.len();
                s += Int::from(j.index) * Int::from(d as i64 - prev as i64);
                prev = d;
            }
            Rat::from_integer(-s)
        })
        .collect();
    TorusDivisor { coeffs }
}

/// `-Σ D_ρ` over rays with `V^⊥ ⊆ ρ^⊥`.
pub fn canonical_divisor_via_conormal(fan: &FanData, v: &FoliationDatum) -> TorusDivisor {
    let n = fan.rank();
    let w = v.annihilator();
    let mut d = TorusDivisor::zero(fan.num_rays());
    for i in 0..fan.num_rays() {
        let perp = kernel(&[fan.ray_q(i)], n);
        if w.iter().all(|m| in_span(&perp, m)) {
            d.coeffs[i] = -Rat::one();
        }
    }
    d
}

/// Cones whose orbit closures lie in `Sing(F_V)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingularLocus {
    /// Every singular cone, by dimension then lexicographically.
    pub cones: Vec<Vec<usize>>,
    /// The inclusion-minimal ones; the locus is the union of their orbit
    /// closures.
    pub minimal: Vec<Vec<usize>>,
}

impl SingularLocus {
    pub fn contains(&self, tau: &[usize]) -> bool {
        let mut t = tau.to_vec();
        t.sort_unstable();
        self.cones.contains(&t)
    }

    pub fn is_empty(&self) -> bool {
        self.cones.is_empty()
    }
}

/// Rank rule in the chart of the maximal cone `sigma`: coordinates are the
/// ray generators of `sigma` completed by unit vectors to a basis of `N_Q`.
/// Returns true when the orbit of the face `tau` is singular.
pub fn rank_rule_singular(
    fan: &FanData,
    v: &FoliationDatum,
    sigma: &[usize],
    tau: &[usize],
) -> bool {
    let n = fan.rank();
    let mut frame: Vec<RatVector> = sigma.iter().map(|&i| fan.ray_q(i)).collect();
    for e in identity(n) {
        if frame.len() == n {
            break;
        }
        let mut trial = frame.clone();
        trial.push(e);
        if rank(&trial) == trial.len() {
            frame = trial;
        }
    }
    let frame_t = crate::exactlin::transpose(&frame, n);
    let coords: Vec<RatVector> = v
        .basis()
        .iter()
        .map(|b| {
            solve(&frame_t, b)
                .expect("square system")
                .expect("frame is a basis")
        })
        .collect();
    let mut span: Vec<RatVector> = Vec::new();
    for (k, &i) in sigma.iter().enumerate() {
        if v.contains_int(fan.ray(i)) {
            let mut e = vec![Rat::zero(); n];
            e[k] = Rat::one();
            span.push(e);
        }
    }
    for c in coords {
        let projected: RatVector = c
            .iter()
            .enumerate()
            .map(|(k, x)| {
                if k < sigma.len() && tau.contains(&sigma[k]) {
                    Rat::zero()
                } else {
                    x.clone()
                }
            })
            .collect();
        span.push(projected);
    }
    rank(&span) < v.rank()
}

pub fn singular_locus(fan: &FanData, v: &FoliationDatum) -> SingularLocus {
    let mut cones = Vec::new();
    for tau in fan.all_cones() {
        if tau.is_empty() {
            continue;
        }
        let sigma = fan
            .cones()
            .iter()
            .find(|c| tau.iter().all(|i| c.contains(i)))
            .expect("face of a maximal cone");
        if rank_rule_singular(fan, v, sigma, &tau) {
            cones.push(tau);
        }
    }
    let minimal = cones
        .iter()
        .filter(|t| {
            !cones
                .iter()
                .any(|s| s != *t && s.iter().all(|i| t.contains(i)))
        })
        .cloned()
        .collect();
    SingularLocus { cones, minimal }
}

/// Whether the curve of the interior wall `wall` is tangent to `F_V`, i.e.
/// `V ⊄ span(wall)`.
pub fn curve_tangent(fan: &FanData, v: &FoliationDatum, wall: &Wall) -> Result<bool> {
    if !wall.is_interior() {
        return Err(Error::BoundaryWall(wall.rays.clone()));
    }
    let span: Vec<RatVector> = wall.rays.iter().map(|&i| fan.ray_q(i)).collect();
    Ok(!v.is_subspace_of(&span))
}

/// A singular cone whose relative interior meets `V`, with a primitive
/// lattice vector there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DicriticalWitness {
    pub cone: Vec<usize>,
    pub ray: IntVector,
}

pub fn dicritical_witness(fan: &FanData, v: &FoliationDatum) -> Option<DicriticalWitness> {
    let sing = singular_locus(fan, v);
    for tau in &sing.cones {
        let gens: Vec<RatVector> = tau.iter().map(|&i| fan.ray_q(i)).collect();
        let point =
            relint_rational_point(&crate::polycone::RatCone::new(fan.rank(), gens), v.basis())
                .expect("dimensions agree");
        if let Some(p) = point {
            let ray = primitive_direction(&p).expect("relative interior point of a nonzero cone");
            return Some(DicriticalWitness {
                cone: tau.clone(),
                ray,
            });
        }
    }
    None
}

pub fn is_dicritical(fan: &FanData, v: &FoliationDatum) -> bool {
    dicritical_witness(fan, v).is_some()
}
