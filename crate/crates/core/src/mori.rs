//! Wall relations, curve classes, extremal rays, contractions, flips, and
//! the foliated MMP driver.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactlin::{dot, kernel, primitive_direction, rref, to_rational};
use crate::fan::{quotient_fan, FanData, Quotient, Wall};
use crate::foliation::{canonical_divisor, dicritical_witness, rays_in_v, FoliationDatum};
use crate::polycone::{extreme_rays, RatCone};
use crate::singclass::classify;
use crate::{Int, IntVector, Rat, RatVector};

/// The linear relation `Σ a_i v_i = 0` among the rays of an interior wall
/// and the two opposite rays.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WallRelationData {
    pub wall: Wall,
    /// Ray indices `v_1 … v_{n+1}`: the wall's rays, then the opposite ray of
    /// `wall.sides[0]`, then that of `wall.sides[1]`.
    pub rays: Vec<usize>,
    /// Coefficients aligned with `rays`, scaled so that they are the
    /// intersection numbers `D_ρ · C`.
    pub coeffs: Vec<Rat>,
    pub alpha: Vec<usize>,
    pub zero: Vec<usize>,
    pub beta: Vec<usize>,
}

impl WallRelationData {
    pub fn coefficient(&self, ray: usize) -> Rat {
        self.rays
            .iter()
            .position(|&r| r == ray)
            .map_or_else(Rat::zero, |k| self.coeffs[k].clone())
    }
}

fn opposite(fan: &FanData, wall: &Wall, side: usize) -> usize {
    *fan.cones()[wall.sides[side]]
        .iter()
        .find(|i| !wall.rays.contains(i))
        .expect("a facet misses one ray")
}

pub fn wall_relation(fan: &FanData, wall: &Wall) -> Result<WallRelationData> {
    if !wall.is_interior() {
        return Err(Error::BoundaryWall(wall.rays.clone()));
    }
    let mut rays = wall.rays.clone();
    rays.push(opposite(fan, wall, 0));
    rays.push(opposite(fan, wall, 1));
    let n = fan.rank();
    // columns are the rays: kernel of the n × (n+1) matrix
    let rows: Vec<RatVector> = (0..n)
        .map(|k| {
            rays.iter()
                .map(|&i| Rat::from_integer(fan.ray(i)[k].clone()))
                .collect()
        })
        .collect();
    let ker = kernel(&rows, rays.len());
    debug_assert_eq!(ker.len(), 1);
    let raw = &ker[0];
    let last = raw.last().expect("n+1 entries").clone();
    let mult_wall = fan.multiplicity(&wall.rays);
    let side1 = &fan.cones()[wall.sides[1]];
    let target = Rat::new(mult_wall, fan.multiplicity(side1));
    let s = target / last;
    let coeffs: Vec<Rat> = raw.iter().map(|a| a * &s).collect();
    let pick = |f: fn(&Rat) -> bool| {
        let mut v: Vec<usize> = rays
            .iter()
            .zip(&coeffs)
            .filter(|(_, a)| f(a))
            .map(|(&r, _)| r)
            .collect();
        v.sort_unstable();
        v
    };
    let alpha = pick(|a| a.is_negative());
    let zero = pick(|a| a.is_zero());
    let beta = pick(|a| a.is_positive());
    Ok(WallRelationData {
        wall: wall.clone(),
        rays,
        coeffs,
        alpha,
        zero,
        beta,
    })
}

/// Intersection numbers `D_ρ · C` of the curve of a wall, over all rays.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveClass {
    pub wall: Wall,
    pub dots: Vec<Rat>,
}

pub fn curve_class(fan: &FanData, wall: &Wall) -> Result<CurveClass> {
    let rel = wall_relation(fan, wall)?;
    let dots = (0..fan.num_rays()).map(|i| rel.coefficient(i)).collect();
    Ok(CurveClass {
        wall: wall.clone(),
        dots,
    })
}

/// `K_F · C` for the curve of `wall`.
pub fn kf_dot(fan: &FanData, v: &FoliationDatum, wall: &Wall) -> Result<Rat> {
    let c = curve_class(fan, wall)?;
    Ok(dot(&canonical_divisor(fan, v).coeffs, &c.dots))
}

/// An extreme ray of the cone of curves, with all walls whose class lies on
/// it (lexicographically sorted; the first is the representative).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtremalRay {
    pub direction: IntVector,
    pub walls: Vec<Wall>,
}

impl ExtremalRay {
    pub fn representative(&self) -> &Wall {
        &self.walls[0]
    }
}

/// Extremal rays ordered by representative wall.
pub fn extremal_rays(fan: &FanData) -> Result<Vec<ExtremalRay>> {
    if !fan.is_complete() {
        return Err(Error::RequiresComplete);
    }
    let walls = fan.interior_walls();
    let classes: Vec<(Wall, IntVector)> = walls
        .iter()
        .map(|w| {
            let c = curve_class(fan, w)?;
            Ok((w.clone(), primitive_direction(&c.dots)?))
        })
        .collect::<Result<_>>()?;
    let cone = RatCone::<Rat>::new(
        fan.num_rays(),
        classes.iter().map(|(_, d)| to_rational(d)).collect(),
    );
    let ext = match extreme_rays(&cone) {
        Ok(e) => e,
        Err(Error::ConeHasLineality) => return Err(Error::NotProjective),
        Err(e) => return Err(e),
    };
    let mut out: Vec<ExtremalRay> = ext
        .into_iter()
        .map(|direction| {
            let walls = classes
                .iter()
                .filter(|(_, d)| *d == direction)
                .map(|(w, _)| w.clone())
                .collect();
            ExtremalRay { direction, walls }
        })
        .collect();
    out.sort_by(|a, b| a.representative().cmp(b.representative()));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ContractionKind {
    Fibre,
    Divisorial { ray: usize },
    Small,
}

impl fmt::Display for ContractionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContractionKind::Fibre => write!(f, "fibre"),
            ContractionKind::Divisorial { ray } => write!(f, "divisorial(D_{ray})"),
            ContractionKind::Small => write!(f, "flip"),
        }
    }
}

fn kind_of(rel: &WallRelationData) -> ContractionKind {
    match rel.alpha.len() {
        0 => ContractionKind::Fibre,
        1 => ContractionKind::Divisorial { ray: rel.alpha[0] },
        _ => ContractionKind::Small,
    }
}

pub fn classify_contraction(
    fan: &FanData,
    v: &FoliationDatum,
    ray: &ExtremalRay,
) -> Result<ContractionKind> {
    let w = ray.representative();
    let k = kf_dot(fan, v, w)?;
    if !k.is_negative() {
        return Err(Error::NotNegative(k.to_string()));
    }
    Ok(kind_of(&wall_relation(fan, w)?))
}

/// Removes the unique negative ray of the class and merges the cones around
/// it. Ray indices above the removed one shift down by one.
pub fn contract_divisorial(fan: &FanData, ray: &ExtremalRay) -> Result<FanData> {
    let rel = wall_relation(fan, ray.representative())?;
    let ContractionKind::Divisorial { ray: rho } = kind_of(&rel) else {
        return Err(Error::NotDivisorial);
    };
    let mut merged: BTreeSet<Vec<usize>> = BTreeSet::new();
    for w in &ray.walls {
        let rel = wall_relation(fan, w)?;
        let mut c: Vec<usize> = rel.rays.iter().copied().filter(|&r| r != rho).collect();
        c.sort_unstable();
        merged.insert(c);
    }
    let shift = |i: usize| if i > rho { i - 1 } else { i };
    let mut cones: Vec<Vec<usize>> = fan
        .cones()
        .iter()
        .filter(|c| !c.contains(&rho))
        .map(|c| c.iter().map(|&i| shift(i)).collect())
        .collect();
    let mut rays = fan.rays().to_vec();
    rays.remove(rho);
    for c in merged {
        let gens: Vec<RatVector> = c.iter().map(|&i| fan.ray_q(i)).collect();
        if crate::exactlin::rank(&gens) != c.len() {
            return Err(Error::NonQFactorialResult(c));
        }
        cones.push(c.iter().map(|&i| shift(i)).collect());
    }
    FanData::new(fan.rank(), rays, cones)
}

/// Exchanges the two triangulations of `τ(ω)` for each given wall: removes
/// `τ_j` for `j` with positive coefficient and adds `τ_j` for negative `j`.
pub fn flip_walls(fan: &FanData, walls: &[Wall]) -> Result<FanData> {
    let mut remove: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut add: BTreeSet<Vec<usize>> = BTreeSet::new();
    for w in walls {
        let rel = wall_relation(fan, w)?;
        if rel.alpha.len() < 2 {
            return Err(Error::NotSmall);
        }
        let tau = |j: usize| {
            let mut c: Vec<usize> = rel.rays.iter().copied().filter(|&r| r != j).collect();
            c.sort_unstable();
            c
        };
        for &j in &rel.beta {
            let t = tau(j);
            if !fan.cones().contains(&t) {
                return Err(Error::InconsistentFlip(format!("cone {t:?} is missing")));
            }
            remove.insert(t);
        }
        for &j in &rel.alpha {
            add.insert(tau(j));
        }
    }
    let mut cones: Vec<Vec<usize>> = fan
        .cones()
        .iter()
        .filter(|c| !remove.contains(*c))
        .cloned()
        .collect();
    cones.extend(add);
    FanData::new(fan.rank(), fan.rays().to_vec(), cones)
}

pub fn flip(fan: &FanData, ray: &ExtremalRay) -> Result<FanData> {
    flip_walls(fan, &ray.walls)
}

/// The quotient along the span of the rays lying in `V`, with the induced
/// subspace `V / V'` in quotient coordinates (possibly zero).
#[derive(Debug, Clone, PartialEq)]
pub struct Pullback {
    pub rays_in_v: Vec<usize>,
    pub quotient: Quotient,
    pub induced: Vec<RatVector>,
}

pub fn detect_pullback(fan: &FanData, v: &FoliationDatum) -> Result<Option<Pullback>> {
    let inside = rays_in_v(fan, v);
    if inside.is_empty() {
        return Ok(None);
    }
    let span: Vec<RatVector> = inside.iter().map(|&i| fan.ray_q(i)).collect();
    let quotient = quotient_fan(fan, &span)?;
    let induced = project_subspace(&quotient, v.basis());
    Ok(Some(Pullback {
        rays_in_v: inside,
        quotient,
        induced,
    }))
}

fn project_subspace(q: &Quotient, basis: &[RatVector]) -> Vec<RatVector> {
    let proj: Vec<RatVector> = q
        .lattice
        .projection
        .iter()
        .map(|r| to_rational(r))
        .collect();
    let images: Vec<RatVector> = basis
        .iter()
        .map(|b| proj.iter().map(|row| dot(row, b)).collect())
        .collect();
    if proj.is_empty() {
        return Vec::new();
    }
    rref(&images, proj.len()).rows
}

/// The toric contraction of a fibre-type class: quotient by the span of the
/// rays with positive coefficient in the wall relation.
pub fn fibre_target(fan: &FanData, ray: &ExtremalRay) -> Result<Quotient> {
    let rel = wall_relation(fan, ray.representative())?;
    let span: Vec<RatVector> = rel.beta.iter().map(|&i| fan.ray_q(i)).collect();
    quotient_fan(fan, &span)
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Pick {
    /// Lexicographically smallest representative wall.
    #[default]
    Lex,
    /// Per step, an index into the current fan's interior walls; steps past
    /// the end of the list fall back to `Lex`.
    Walls(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MmpOptions {
    pub max_flips: usize,
    pub pick: Pick,
    pub allow_noncanonical: bool,
}

impl Default for MmpOptions {
    fn default() -> Self {
        MmpOptions {
            max_flips: 1000,
            pick: Pick::Lex,
            allow_noncanonical: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MmpStep {
    /// Index of the representative wall among the interior walls of
    /// `fan_before`.
    pub wall_index: usize,
    pub wall: Wall,
    pub class_walls: Vec<Wall>,
    pub kind: ContractionKind,
    pub kf_dot: Rat,
    pub fan_before: FanData,
    /// Absent for the fibre step, which leaves the category of birational
    /// models.
    pub fan_after: Option<FanData>,
    pub picard_before: i64,
    pub picard_after: i64,
    pub dicritical_before: bool,
    pub dicritical_after: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MmpOutcome {
    KfNef,
    Fibration {
        contraction: Quotient,
        pullback: Option<Pullback>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MmpTrace {
    pub initial: FanData,
    pub foliation: FoliationDatum,
    pub canonical_override: bool,
    pub steps: Vec<MmpStep>,
    pub final_fan: FanData,
    pub outcome: MmpOutcome,
    /// Steps that turned a non-dicritical foliation into a dicritical one.
    pub consistency_failures: Vec<String>,
}

pub fn run_mmp(fan: &FanData, v: &FoliationDatum, opts: &MmpOptions) -> Result<MmpTrace> {
    if !fan.is_complete() {
        return Err(Error::RequiresComplete);
    }
    let canonical = classify(fan, v)?.is_canonical();
    if !canonical && !opts.allow_noncanonical {
        return Err(Error::NotCanonical);
    }
    let mut cur = fan.clone();
    let mut steps = Vec::new();
    let mut failures = Vec::new();
    let mut flips = 0usize;
    loop {
        let rays = extremal_rays(&cur)?;
        let mut negative = Vec::new();
        for r in rays {
            if kf_dot(&cur, v, r.representative())?.is_negative() {
                negative.push(r);
            }
        }
        if negative.is_empty() {
            return Ok(MmpTrace {
                initial: fan.clone(),
                foliation: v.clone(),
                canonical_override: !canonical,
                steps,
                final_fan: cur,
                outcome: MmpOutcome::KfNef,
                consistency_failures: failures,
            });
        }
        let walls = cur.interior_walls();
        let chosen = match &opts.pick {
            Pick::Walls(seq) if steps.len() < seq.len() => {
                let k = seq[steps.len()];
                let w = walls.get(k).ok_or(Error::InvalidPick(k))?;
                negative
                    .iter()
                    .find(|r| r.walls.contains(w))
                    .ok_or(Error::InvalidPick(k))?
                    .clone()
            }
            _ => negative[0].clone(),
        };
        let wall = match &opts.pick {
            Pick::Walls(seq) if steps.len() < seq.len() => walls[seq[steps.len()]].clone(),
            _ => chosen.representative().clone(),
        };
        let wall_index = walls
            .iter()
            .position(|w| *w == wall)
            .expect("interior wall");
        let kind = classify_contraction(&cur, v, &chosen)?;
        let k = kf_dot(&cur, v, &wall)?;
        let dicritical_before = dicritical_witness(&cur, v).is_some();
        let mut step = MmpStep {
            wall_index,
            wall,
            class_walls: chosen.walls.clone(),
            kind: kind.clone(),
            kf_dot: k,
            fan_before: cur.clone(),
            fan_after: None,
            picard_before: cur.picard_number(),
            picard_after: 0,
            dicritical_before,
            dicritical_after: None,
        };
        let next = match kind {
            ContractionKind::Fibre => {
                let contraction = fibre_target(&cur, &chosen)?;
                step.picard_after = contraction.fan.picard_number();
                let pullback = detect_pullback(&cur, v)?;
                steps.push(step);
                return Ok(MmpTrace {
                    initial: fan.clone(),
                    foliation: v.clone(),
                    canonical_override: !canonical,
                    steps,
                    final_fan: cur,
                    outcome: MmpOutcome::Fibration {
                        contraction,
                        pullback,
                    },
                    consistency_failures: failures,
                });
            }
            ContractionKind::Divisorial { .. } => contract_divisorial(&cur, &chosen)?,
            ContractionKind::Small => {
                flips += 1;
                if flips > opts.max_flips {
                    return Err(Error::FlipCapExceeded(opts.max_flips));
                }
                flip(&cur, &chosen)?
            }
        };
        let after = dicritical_witness(&next, v).is_some();
        if !dicritical_before && after {
            failures.push(format!(
                "step {}: {} at wall {:?} made the foliation dicritical",
                steps.len(),
                step.kind,
                step.wall.rays
            ));
        }
        step.dicritical_after = Some(after);
        step.picard_after = next.picard_number();
        step.fan_after = Some(next.clone());
        steps.push(step);
        cur = next;
    }
}

/// `Σ_ρ ⟨m, v_ρ⟩ (D_ρ · C)`, zero for every character `m`.
pub fn principal_pairing(fan: &FanData, class: &CurveClass, m: &[Int]) -> Rat {
    let mq = to_rational::<Rat>(m);
    (0..fan.num_rays())
        .map(|i| dot(&mq, &fan.ray_q(i)) * &class.dots[i])
        .fold(Rat::zero(), |a, b| a + b)
}

/// `true` when every coefficient is an integer and `a_{n+1}` is one, as on
/// smooth fans.
pub fn is_unimodular_relation(rel: &WallRelationData) -> bool {
    rel.coeffs.last().is_some_and(One::is_one) && rel.coeffs.iter().all(|c| c.is_integer())
}
