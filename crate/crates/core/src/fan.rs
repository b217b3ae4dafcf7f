//! Simplicial fans.
//!
//! A [`FanData`] holds primitive ray generators in input order and maximal
//! cones as sorted index sets, themselves sorted lexicographically. Every
//! surgery returns a new value.

use std::cell::OnceCell;
use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactlin::{
    combination, dot, kernel, primitive_direction, primitive_part, quotient_lattice,
    rank as lin_rank, solve, to_rational, QuotientLattice,
};
use crate::polycone::{double_description, extreme_rays, is_face, HDescription, RatCone};
use crate::{Int, IntVector, Rat, RatVector};

/// One reason a fan description is not a valid simplicial fan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    ZeroRank,
    WrongDimension { ray: usize },
    ZeroRay { ray: usize },
    NonPrimitiveRay { ray: usize },
    DuplicateRay { first: usize, second: usize },
    EmptyCone { cone: usize },
    RayIndexOutOfRange { cone: usize, index: usize },
    RepeatedIndex { cone: usize },
    NonSimplicialCone { cone: usize },
    NotMaximal { cone: usize, contained_in: usize },
    UnusedRay { ray: usize },
    BadIntersection { first: usize, second: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ZeroRank => write!(f, "ZeroRank: lattice rank must be positive"),
            Violation::WrongDimension { ray } => write!(f, "WrongDimension: ray {ray}"),
            Violation::ZeroRay { ray } => write!(f, "ZeroRay: ray {ray}"),
            Violation::NonPrimitiveRay { ray } => write!(f, "NonPrimitiveRay: ray {ray}"),
            Violation::DuplicateRay { first, second } => {
                write!(f, "DuplicateRay: rays {first} and {second}")
            }
            Violation::EmptyCone { cone } => write!(f, "EmptyCone: cone {cone}"),
            Violation::RayIndexOutOfRange { cone, index } => {
                write!(f, "RayIndexOutOfRange: cone {cone} uses index {index}")
            }
            Violation::RepeatedIndex { cone } => write!(f, "RepeatedIndex: cone {cone}"),
            Violation::NonSimplicialCone { cone } => write!(f, "NonSimplicialCone: cone {cone}"),
            Violation::NotMaximal { cone, contained_in } => {
                write!(
                    f,
                    "NotMaximal: cone {cone} is a face of cone {contained_in}"
                )
            }
            Violation::UnusedRay { ray } => write!(f, "UnusedRay: ray {ray}"),
            Violation::BadIntersection { first, second } => {
                write!(
                    f,
                    "BadIntersection: cones {first} and {second} do not meet in a common face"
                )
            }
        }
    }
}

/// A simplicial fan in `N ≅ Z^rank`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FanData {
    rank: usize,
    rays: Vec<IntVector>,
    cones: Vec<Vec<usize>>,
}

/// A codimension-one face of a maximal cone with the maximal cones having it
/// as a facet.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Wall {
    pub rays: Vec<usize>,
    pub sides: Vec<usize>,
}

impl Wall {
    pub fn is_interior(&self) -> bool {
        self.sides.len() == 2
    }
}

fn normalize_cones(cones: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = cones
        .iter()
        .map(|c| {
            let mut c = c.clone();
            c.sort_unstable();
            c
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Checks a raw fan description and returns every violation found.
pub fn validate(rank: usize, rays: &[IntVector], cones: &[Vec<usize>]) -> Vec<Violation> {
    let mut out = Vec::new();
    if rank == 0 {
        out.push(Violation::ZeroRank);
        return out;
    }
    let mut ray_ok = vec![true; rays.len()];
    for (i, r) in rays.iter().enumerate() {
        if r.len() != rank {
            out.push(Violation::WrongDimension { ray: i });
            ray_ok[i] = false;
        } else if r.iter().all(Zero::is_zero) {
            out.push(Violation::ZeroRay { ray: i });
            ray_ok[i] = false;
        } else if primitive_part(r).ok().as_ref() != Some(r) {
            out.push(Violation::NonPrimitiveRay { ray: i });
        }
    }
    for i in 0..rays.len() {
        for j in i + 1..rays.len() {
            if ray_ok[i] && rays[i] == rays[j] {
                out.push(Violation::DuplicateRay {
                    first: i,
                    second: j,
                });
            }
        }
    }
    let mut cone_ok = vec![true; cones.len()];
    let mut used = vec![false; rays.len()];
    for (c, cone) in cones.iter().enumerate() {
        if cone.is_empty() {
            out.push(Violation::EmptyCone { cone: c });
            cone_ok[c] = false;
            continue;
        }
        let set: BTreeSet<usize> = cone.iter().copied().collect();
        if set.len() != cone.len() {
            out.push(Violation::RepeatedIndex { cone: c });
            cone_ok[c] = false;
        }
        for &i in cone {
            if i >= rays.len() {
                out.push(Violation::RayIndexOutOfRange { cone: c, index: i });
                cone_ok[c] = false;
            } else {
                used[i] = true;
                if !ray_ok[i] {
                    cone_ok[c] = false;
                }
            }
        }
        if cone_ok[c] {
            let gens: Vec<RatVector> = cone.iter().map(|&i| to_rational(&rays[i])).collect();
            if lin_rank(&gens) != cone.len() {
                out.push(Violation::NonSimplicialCone { cone: c });
                cone_ok[c] = false;
            }
        }
    }
    for (i, u) in used.iter().enumerate() {
        if !u {
            out.push(Violation::UnusedRay { ray: i });
        }
    }
    let sets: Vec<BTreeSet<usize>> = cones.iter().map(|c| c.iter().copied().collect()).collect();
    for a in 0..cones.len() {
        for b in 0..cones.len() {
            if a != b && sets[a].is_subset(&sets[b]) && (sets[a] != sets[b] || a > b) {
                out.push(Violation::NotMaximal {
                    cone: a,
                    contained_in: b,
                });
                cone_ok[a] = false;
                break;
            }
        }
    }
    let rays_q: Vec<Option<RatVector>> = rays
        .iter()
        .map(|r| (r.len() == rank).then(|| to_rational(r)))
        .collect();
    let duals: Vec<Option<Vec<RatVector>>> = cones
        .iter()
        .enumerate()
        .map(|(c, cone)| {
            if cone_ok[c] {
                dual_basis(rank, rays, cone)
            } else {
                None
            }
        })
        .collect();
    let local: Vec<OnceCell<Local>> = cones.iter().map(|_| OnceCell::new()).collect();
    let local_of =
        |c: usize| local[c].get_or_init(|| Local::new(&cone_of(rank, rays, &cones[c]), &rays_q));
    for a in 0..cones.len() {
        for b in a + 1..cones.len() {
            if !(cone_ok[a] && cone_ok[b]) {
                continue;
            }
            let quick = duals[a]
                .as_ref()
                .is_some_and(|d| dual_sum_separates(&rays_q, &cones[a], d, &sets[b]))
                || duals[b]
                    .as_ref()
                    .is_some_and(|d| dual_sum_separates(&rays_q, &cones[b], d, &sets[a]));
            if quick {
                continue;
            }
            if !meets_in_common_face(rank, rays, &sets[a], &sets[b], local_of(a), local_of(b)) {
                out.push(Violation::BadIntersection {
                    first: a,
                    second: b,
                });
            }
        }
    }
    out
}

/// Dual basis of a full-dimensional simplicial cone: `duals[k]` is 1 on the
/// k-th generator and 0 on the others.
fn dual_basis(rank: usize, rays: &[IntVector], cone: &[usize]) -> Option<Vec<RatVector>> {
    if cone.len() != rank {
        return None;
    }
    let gens: Vec<RatVector> = cone.iter().map(|&i| to_rational(&rays[i])).collect();
    (0..rank)
        .map(|k| {
            let e: Vec<Rat> = (0..rank)
                .map(|j| if j == k { Rat::one() } else { Rat::zero() })
                .collect();
            solve(&gens, &e).ok().flatten()
        })
        .collect()
}

/// The functional equal to 1 on the rays of `a` not in `b` and 0 on the
/// shared ones separates when it is `≤ 0` on `b` and vanishes on `b` only
/// at the shared rays.
fn dual_sum_separates(
    rays_q: &[Option<RatVector>],
    a: &[usize],
    duals: &[RatVector],
    b: &BTreeSet<usize>,
) -> bool {
    let mut u: Option<RatVector> = None;
    for (k, i) in a.iter().enumerate() {
        if !b.contains(i) {
            u = Some(match u {
                None => duals[k].clone(),
                Some(u) => u.iter().zip(&duals[k]).map(|(x, y)| x + y).collect(),
            });
        }
    }
    let Some(u) = u else {
        return false;
    };
    b.iter().all(|j| {
        let x = dot(&u, rays_q[*j].as_ref().expect("valid ray"));
        x.is_negative() || (x.is_zero() && a.contains(j))
    })
}

/// A cone's H-description with the sign of every candidate separating
/// functional (facet normals and both signs of span equations) on every ray.
struct Local {
    h: HDescription<Rat>,
    signs: Vec<Vec<i8>>,
}

impl Local {
    fn new(cone: &RatCone<Rat>, rays_q: &[Option<RatVector>]) -> Local {
        let h = cone.h_description();
        let negated: Vec<RatVector> = h
            .equations
            .iter()
            .map(|e| e.iter().map(|x| -x).collect())
            .collect();
        let signs = h
            .inequalities
            .iter()
            .chain(&h.equations)
            .chain(&negated)
            .map(|u| {
                rays_q
                    .iter()
                    .map(|r| match r {
                        Some(r) => {
                            let x = dot(u, r);
                            if x.is_positive() {
                                1
                            } else if x.is_negative() {
                                -1
                            } else {
                                0
                            }
                        }
                        None => 1,
                    })
                    .collect()
            })
            .collect();
        Local { h, signs }
    }

    /// A functional `u ≥ 0` on this cone with `u ≤ 0` on `b`, vanishing on
    /// the same rays of both; then the two cones meet in the face spanned by
    /// those rays.
    fn separates(&self, a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> bool {
        self.signs.iter().any(|s| {
            b.iter().all(|&j| s[j] <= 0)
                && a.iter()
                    .filter(|&&i| s[i] == 0)
                    .eq(b.iter().filter(|&&j| s[j] == 0))
        })
    }
}

fn cone_of(rank: usize, rays: &[IntVector], idx: &[usize]) -> RatCone<Rat> {
    RatCone::new(rank, idx.iter().map(|&i| to_rational(&rays[i])).collect())
}

fn meets_in_common_face(
    rank: usize,
    rays: &[IntVector],
    a: &BTreeSet<usize>,
    b: &BTreeSet<usize>,
    la: &Local,
    lb: &Local,
) -> bool {
    if la.separates(a, b) || lb.separates(b, a) {
        return true;
    }
    let (ha, hb) = (&la.h, &lb.h);
    let mut eqs = ha.equations.clone();
    eqs.extend(hb.equations.iter().cloned());
    let mut ineqs = ha.inequalities.clone();
    ineqs.extend(hb.inequalities.iter().cloned());
    let v = double_description(rank, &eqs, &ineqs);
    if !v.lineality.is_empty() {
        return false;
    }
    let mut got: Vec<IntVector> = v
        .rays
        .iter()
        .map(|r| primitive_direction(r).expect("nonzero ray"))
        .collect();
    got.sort();
    got.dedup();
    let mut expect: Vec<IntVector> = a.intersection(b).map(|&i| rays[i].clone()).collect();
    expect.sort();
    got == expect
}

impl FanData {
    /// Builds and validates a fan; cones are normalized to sorted index sets.
    pub fn new(rank: usize, rays: Vec<IntVector>, cones: Vec<Vec<usize>>) -> Result<FanData> {
        let v = validate(rank, &rays, &cones);
        if !v.is_empty() {
            return Err(Error::InvalidFan(v));
        }
        Ok(FanData::from_parts_unchecked(rank, rays, cones))
    }

    /// Skips validation. Used for quotient images, which may fail to be fans.
    pub fn from_parts_unchecked(
        rank: usize,
        rays: Vec<IntVector>,
        cones: Vec<Vec<usize>>,
    ) -> FanData {
        FanData {
            rank,
            rays,
            cones: normalize_cones(&cones),
        }
    }

    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        let v = validate(self.rank, &self.rays, &self.cones);
        if v.is_empty() {
            Ok(())
        } else {
            Err(v)
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rays(&self) -> &[IntVector] {
        &self.rays
    }

    pub fn ray(&self, i: usize) -> &IntVector {
        &self.rays[i]
    }

    pub fn ray_q(&self, i: usize) -> RatVector {
        to_rational(&self.rays[i])
    }

    pub fn num_rays(&self) -> usize {
        self.rays.len()
    }

    pub fn cones(&self) -> &[Vec<usize>] {
        &self.cones
    }

    /// `#rays - rank`, the Picard number of a complete simplicial fan.
    pub fn picard_number(&self) -> i64 {
        self.rays.len() as i64 - self.rank as i64
    }

    pub fn ray_index(&self, v: &[Int]) -> Option<usize> {
        self.rays.iter().position(|r| r.as_slice() == v)
    }

    pub fn generators(&self, idx: &[usize]) -> Vec<IntVector> {
        idx.iter().map(|&i| self.rays[i].clone()).collect()
    }

    pub fn cone(&self, idx: &[usize]) -> RatCone<Rat> {
        cone_of(self.rank, &self.rays, idx)
    }

    /// Index of the sublattice spanned by the cone's rays in its saturation.
    pub fn multiplicity(&self, idx: &[usize]) -> Int {
        crate::exactlin::cone_multiplicity(&self.generators(idx)).expect("fan cones are simplicial")
    }

    pub fn is_smooth_cone(&self, idx: &[usize]) -> bool {
        self.multiplicity(idx) == Int::from(1)
    }

    /// Every cone of the fan (all faces of maximal cones, including the zero
    /// cone), ordered by dimension and then lexicographically.
    pub fn all_cones(&self) -> Vec<Vec<usize>> {
        let mut set = BTreeSet::new();
        for c in &self.cones {
            for mask in 0u64..(1u64 << c.len()) {
                let face: Vec<usize> = c
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask >> k & 1 == 1)
                    .map(|(_, &i)| i)
                    .collect();
                set.insert(face);
            }
        }
        let mut out: Vec<Vec<usize>> = set.into_iter().collect();
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }

    /// Barycentric coordinates of `v` in maximal cone `c`, if `v ∈ c`.
    pub fn barycentric(&self, c: usize, v: &[Rat]) -> Option<RatVector> {
        let gens: Vec<RatVector> = self.cones[c].iter().map(|&i| self.ray_q(i)).collect();
        combination(&gens, v).filter(|l| l.iter().all(|x| !x.is_negative()))
    }

    /// First maximal cone containing `v`.
    pub fn cone_containing(&self, v: &[Rat]) -> Option<usize> {
        (0..self.cones.len()).find(|&c| self.barycentric(c, v).is_some())
    }

    /// The smallest cone of the fan containing `v` (its relative interior
    /// contains `v`).
    pub fn minimal_cone_containing(&self, v: &[Rat]) -> Option<Vec<usize>> {
        let c = self.cone_containing(v)?;
        let lam = self.barycentric(c, v)?;
        Some(
            self.cones[c]
                .iter()
                .zip(&lam)
                .filter(|(_, l)| l.is_positive())
                .map(|(&i, _)| i)
                .collect(),
        )
    }

    pub fn walls(&self) -> Vec<Wall> {
        let mut map: std::collections::BTreeMap<Vec<usize>, Vec<usize>> = Default::default();
        for (ci, c) in self.cones.iter().enumerate() {
            for skip in 0..c.len() {
                let facet: Vec<usize> = c
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != skip)
                    .map(|(_, &i)| i)
                    .collect();
                map.entry(facet).or_default().push(ci);
            }
        }
        map.into_iter()
            .map(|(rays, sides)| Wall { rays, sides })
            .collect()
    }

    pub fn interior_walls(&self) -> Vec<Wall> {
        self.walls().into_iter().filter(Wall::is_interior).collect()
    }

    /// Complete iff pure of full dimension, every wall interior, and the two
    /// sides of every wall lie on opposite sides of its hyperplane.
    pub fn is_complete(&self) -> bool {
        if self.cones.iter().any(|c| c.len() != self.rank) {
            return false;
        }
        for w in self.walls() {
            if !w.is_interior() {
                return false;
            }
            let gens: Vec<RatVector> = w.rays.iter().map(|&i| self.ray_q(i)).collect();
            let normal = if gens.is_empty() {
                kernel::<Rat>(&[], self.rank)
            } else {
                kernel(&gens, self.rank)
            };
            if normal.len() != 1 {
                return false;
            }
            let side = |c: usize| {
                let opp = self.cones[c]
                    .iter()
                    .find(|i| !w.rays.contains(i))
                    .expect("facet");
                dot(&normal[0], &self.ray_q(*opp))
            };
            let (a, b) = (side(w.sides[0]), side(w.sides[1]));
            if !(a.is_positive() && b.is_negative() || a.is_negative() && b.is_positive()) {
                return false;
            }
        }
        true
    }

    /// Star subdivision at the primitive vector `v`.
    pub fn star_subdivide(&self, v: &[Int]) -> Result<FanData> {
        if v.len() != self.rank {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} in a rank-{} lattice",
                v.len(),
                self.rank
            )));
        }
        let show = || format!("{v:?}");
        if primitive_part(v)? != v {
            return Err(Error::NotPrimitive(show()));
        }
        if self.ray_index(v).is_some() {
            return Err(Error::RayExists(show()));
        }
        let vq = to_rational::<Rat>(v);
        let new = self.rays.len();
        let mut cones = Vec::new();
        let mut hit = false;
        for (c, cone) in self.cones.iter().enumerate() {
            match self.barycentric(c, &vq) {
                Some(lam) => {
                    hit = true;
                    for (k, l) in lam.iter().enumerate() {
                        if l.is_positive() {
                            let mut nc: Vec<usize> = cone
                                .iter()
                                .enumerate()
                                .filter(|&(j, _)| j != k)
                                .map(|(_, &i)| i)
                                .collect();
                            nc.push(new);
                            cones.push(nc);
                        }
                    }
                }
                None => cones.push(cone.clone()),
            }
        }
        if !hit {
            return Err(Error::OutsideSupport(show()));
        }
        let mut rays = self.rays.clone();
        rays.push(v.to_vec());
        FanData::new(self.rank, rays, cones)
    }

    /// Projection of the fan to `N / (N ∩ span(basis))`.
    pub fn quotient_fan(&self, basis: &[RatVector]) -> Result<Quotient> {
        quotient_fan(self, basis)
    }
}

/// Why the projected cones fail to form a (simplicial) fan.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QuotientReport {
    /// Pairs of image cones (indices into the quotient's cone list) whose
    /// intersection is not a face of both.
    pub overlaps: Vec<(usize, usize)>,
    /// Images of maximal cones that contain a line.
    pub not_strongly_convex: Vec<usize>,
    /// Image cones whose generators are dependent.
    pub non_simplicial: Vec<usize>,
}

impl QuotientReport {
    pub fn is_fan(&self) -> bool {
        self.overlaps.is_empty() && self.not_strongly_convex.is_empty()
    }
}

/// The quotient lattice, the image fan, and its validity report.
#[derive(Debug, Clone, PartialEq)]
pub struct Quotient {
    pub lattice: QuotientLattice<Int>,
    /// Image cones; a genuine fan only when `report.is_fan()`. Otherwise the
    /// map is defined in codimension one only.
    pub fan: FanData,
    /// For each original ray, the index of the quotient ray its image spans.
    pub ray_images: Vec<Option<usize>>,
    pub report: QuotientReport,
}

pub fn quotient_fan(fan: &FanData, basis: &[RatVector]) -> Result<Quotient> {
    let n = fan.rank;
    let spanning: Vec<IntVector> = basis
        .iter()
        .filter(|b| b.iter().any(|x| !x.is_zero()))
        .map(|b| primitive_direction(b))
        .collect::<Result<_>>()?;
    let lattice = quotient_lattice(&spanning, n);
    let n2 = lattice.projection.len();

    let images: Vec<Option<IntVector>> = fan
        .rays
        .iter()
        .map(|r| {
            let p = lattice.project(r);
            primitive_part(&p).ok()
        })
        .collect();
    let mut new_rays: Vec<IntVector> = images.iter().flatten().cloned().collect();
    new_rays.sort();
    new_rays.dedup();
    let ray_images: Vec<Option<usize>> = images
        .iter()
        .map(|im| {
            im.as_ref()
                .map(|p| new_rays.binary_search(p).expect("present"))
        })
        .collect();

    let mut report = QuotientReport::default();
    let mut candidate: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut strongly_convex_failures: BTreeSet<Vec<usize>> = BTreeSet::new();
    for cone in &fan.cones {
        let mut idx: Vec<usize> = cone.iter().filter_map(|&i| ray_images[i]).collect();
        idx.sort_unstable();
        idx.dedup();
        let c = cone_of(n2, &new_rays, &idx);
        match extreme_rays(&c) {
            Ok(ext) => {
                let ext_idx: Vec<usize> = ext
                    .iter()
                    .map(|e| {
                        new_rays
                            .binary_search(e)
                            .expect("extreme ray is an image ray")
                    })
                    .collect();
                candidate.insert(ext_idx);
            }
            Err(_) => {
                strongly_convex_failures.insert(idx);
            }
        }
    }
    // drop cones that are faces (by ray set) of other candidates
    let cand: Vec<Vec<usize>> = candidate.iter().cloned().collect();
    let mut kept: Vec<Vec<usize>> = cand
        .iter()
        .filter(|a| {
            !cand
                .iter()
                .any(|b| b != *a && a.iter().all(|x| b.contains(x)))
        })
        .cloned()
        .collect();
    // image rays that are not extreme in any kept cone become their own cones
    for r in 0..new_rays.len() {
        if !kept.iter().any(|k| k.contains(&r)) {
            kept.push(vec![r]);
        }
    }
    kept.extend(strongly_convex_failures.iter().cloned());
    kept.sort();
    kept.dedup();
    if n2 == 0 {
        kept = vec![Vec::new()];
    }

    for (ci, k) in kept.iter().enumerate() {
        if strongly_convex_failures.contains(k) {
            report.not_strongly_convex.push(ci);
            continue;
        }
        let gens: Vec<RatVector> = k.iter().map(|&i| to_rational(&new_rays[i])).collect();
        if lin_rank(&gens) != k.len() {
            report.non_simplicial.push(ci);
        }
    }
    for a in 0..kept.len() {
        for b in a + 1..kept.len() {
            if report.not_strongly_convex.contains(&a) || report.not_strongly_convex.contains(&b) {
                continue;
            }
            let ca = cone_of(n2, &new_rays, &kept[a]);
            let cb = cone_of(n2, &new_rays, &kept[b]);
            let meet = crate::polycone::intersect(&ca, &cb)?;
            if !(is_face(&ca, &meet)? && is_face(&cb, &meet)?) {
                report.overlaps.push((a, b));
            }
        }
    }
    Ok(Quotient {
        lattice,
        fan: FanData::from_parts_unchecked(n2, new_rays, kept),
        ray_images,
        report,
    })
}
