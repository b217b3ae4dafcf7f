//! Independent recomputations of the main formulas, and seeded random fans.

use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exactlin::{dot, primitive_part, quotient_lattice, rank, rref, solve, to_rational};
use crate::fan::{FanData, Wall};
use crate::foliation::{
    c1_from_filtration, canonical_divisor, canonical_divisor_of_variety,
    canonical_divisor_via_conormal, conormal_filtration, foliation_filtration, singular_locus,
    FoliationDatum, TorusDivisor,
};
use crate::mori::{curve_class, principal_pairing};
use crate::singclass::discrepancy;
use crate::{Int, IntVector, Rat, RatVector};

/// Piecewise linear function with `ψ(v_ρ) = -a_ρ` for `D = Σ a_ρ D_ρ`,
/// one functional per maximal cone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportFunction {
    pub divisor: TorusDivisor,
    pub pieces: Vec<(Vec<usize>, RatVector)>,
}

impl SupportFunction {
    pub fn eval(&self, fan: &FanData, v: &[Rat]) -> Option<Rat> {
        let c = fan.cone_containing(v)?;
        Some(dot(&self.pieces[c].1, v))
    }

    /// Reads the divisor back off the ray values.
    pub fn divisor_from_values(&self, fan: &FanData) -> TorusDivisor {
        TorusDivisor {
            coeffs: (0..fan.num_rays())
                .map(|i| {
                    -self
                        .eval(fan, &fan.ray_q(i))
                        .expect("rays lie in the support")
                })
                .collect(),
        }
    }
}

pub fn support_function(fan: &FanData, d: &TorusDivisor) -> SupportFunction {
    let pieces = fan
        .cones()
        .iter()
        .map(|c| {
            let gens: Vec<RatVector> = c.iter().map(|&i| fan.ray_q(i)).collect();
            let vals: Vec<Rat> = c.iter().map(|&i| -d.coeffs[i].clone()).collect();
            let m = solve(&gens, &vals)
                .expect("dimensions agree")
                .expect("simplicial cones are Q-Cartier");
            (c.clone(), m)
        })
        .collect();
    SupportFunction {
        divisor: d.clone(),
        pieces,
    }
}

/// Coefficient of the new ray in `K_{F'} - φ^* K_F` for the star
/// subdivision `φ` at `vj`.
pub fn discrepancy_oracle(fan: &FanData, v: &FoliationDatum, vj: &[Int]) -> Result<Rat> {
    let refined = fan.star_subdivide(vj)?;
    let new = refined.num_rays() - 1;
    let k_new = canonical_divisor(&refined, v).coeffs[new].clone();
    let psi = support_function(fan, &canonical_divisor(fan, v));
    let at = psi
        .eval(fan, &to_rational::<Rat>(vj))
        .ok_or_else(|| Error::OutsideSupport(format!("{vj:?}")))?;
    // pullback coefficient at the new ray is -ψ(vj)
    Ok(k_new + at)
}

/// Rank of the local generators of `F_V` at a generic point of the orbit of
/// `tau`, in the smooth chart of the maximal cone `sigma`. Returns true when
/// the rank drops below `dim V`.
pub fn minor_rank_oracle(
    fan: &FanData,
    sigma: &[usize],
    v: &FoliationDatum,
    tau: &[usize],
) -> Result<bool> {
    let n = fan.rank();
    if sigma.len() != n || !fan.is_smooth_cone(sigma) {
        return Err(Error::SmoothChartOnly);
    }
    let gens: Vec<RatVector> = sigma.iter().map(|&i| fan.ray_q(i)).collect();
    let cols = crate::exactlin::transpose(&gens, n);
    let coords: Vec<RatVector> = v
        .basis()
        .iter()
        .map(|b| solve(&cols, b).expect("square").expect("σ is a basis"))
        .collect();
    let unit = |k: usize| -> RatVector {
        (0..n)
            .map(|j| if j == k { Rat::one() } else { Rat::zero() })
            .collect()
    };
    let in_v: Vec<usize> = (0..n).filter(|&k| v.contains(&gens[k])).collect();
    // V ∩ {x_k = 0 for k in in_v}: the log part of the generators
    let reduced: Vec<RatVector> = coords
        .iter()
        .map(|c| {
            c.iter()
                .enumerate()
                .map(|(k, x)| {
                    if in_v.contains(&k) {
                        Rat::zero()
                    } else {
                        x.clone()
                    }
                })
                .collect()
        })
        .collect();
    let log_basis = rref(&reduced, n).rows;
    let rank_at = |primes: &[i64]| {
        let point: Vec<Rat> = (0..n)
            .map(|k| {
                if tau.contains(&sigma[k]) {
                    Rat::zero()
                } else {
                    Rat::from_integer(Int::from(primes[k]))
                }
            })
            .collect();
        let mut rows: Vec<RatVector> = in_v.iter().map(|&k| unit(k)).collect();
        for b in &log_basis {
            rows.push(b.iter().zip(&point).map(|(x, p)| x * p).collect());
        }
        rank(&rows)
    };
    const FIRST: [i64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];
    const SECOND: [i64; 8] = [23, 29, 31, 37, 41, 43, 47, 53];
    assert!(
        n <= FIRST.len(),
        "minor oracle supports rank up to {}",
        FIRST.len()
    );
    let (a, b) = (rank_at(&FIRST), rank_at(&SECOND));
    assert_eq!(a, b, "generic evaluations disagree");
    Ok(a < v.rank())
}

/// `D · C` for the curve of an interior wall, from the jump of the support
/// function of `D` across the wall.
pub fn intersection_via_support(fan: &FanData, d: &TorusDivisor, wall: &Wall) -> Result<Rat> {
    if !wall.is_interior() {
        return Err(Error::BoundaryWall(wall.rays.clone()));
    }
    let psi = support_function(fan, d);
    let (s, t) = (wall.sides[0], wall.sides[1]);
    let diff: RatVector = psi.pieces[s]
        .1
        .iter()
        .zip(&psi.pieces[t].1)
        .map(|(a, b)| a - b)
        .collect();
    let far = *fan.cones()[t]
        .iter()
        .find(|i| !wall.rays.contains(i))
        .expect("facet");
    let q = quotient_lattice(&fan.generators(&wall.rays), fan.rank());
    let k = q.project(fan.ray(far));
    debug_assert_eq!(k.len(), 1);
    Ok(dot(&diff, &fan.ray_q(far)) / Rat::from_integer(k[0].abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseFan {
    ProjectiveSpace,
    ProductOfLines,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomFanSpec {
    pub seed: u64,
    pub rank: usize,
    pub base: BaseFan,
    pub subdivisions: usize,
}

pub fn projective_space(n: usize) -> FanData {
    let mut rays: Vec<IntVector> = (0..n)
        .map(|i| (0..n).map(|j| Int::from((i == j) as i64)).collect())
        .collect();
    rays.push(vec![Int::from(-1); n]);
    let cones = (0..=n)
        .map(|skip| (0..=n).filter(|&i| i != skip).collect())
        .collect();
    FanData::new(n, rays, cones).expect("projective space")
}

pub fn product_of_lines(n: usize) -> FanData {
    let mut rays = Vec::new();
    for i in 0..n {
        for s in [1i64, -1] {
            rays.push(
                (0..n)
                    .map(|j| Int::from(if i == j { s } else { 0 }))
                    .collect(),
            );
        }
    }
    let cones = (0u64..(1 << n))
        .map(|mask| (0..n).map(|i| 2 * i + (mask >> i & 1) as usize).collect())
        .collect();
    FanData::new(n, rays, cones).expect("product of lines")
}

fn random_subspace(rng: &mut ChaCha8Rng, fan: &FanData) -> FoliationDatum {
    let n = fan.rank();
    loop {
        let r = rng.gen_range(1..n);
        let mut basis: Vec<RatVector> = Vec::new();
        for k in 0..r {
            let v: RatVector = if k == 0 && rng.gen_bool(0.6) {
                fan.ray_q(rng.gen_range(0..fan.num_rays()))
            } else if rng.gen_bool(0.3) {
                // a sum of two rays, to hit relative interiors
                let a = fan.ray_q(rng.gen_range(0..fan.num_rays()));
                let b = fan.ray_q(rng.gen_range(0..fan.num_rays()));
                a.iter().zip(&b).map(|(x, y)| x + y).collect()
            } else {
                (0..n)
                    .map(|_| {
                        Rat::new(
                            Int::from(rng.gen_range(-2..=2)),
                            Int::from(rng.gen_range(1..=3)),
                        )
                    })
                    .collect()
            };
            basis.push(v);
        }
        if rank(&basis) == r {
            return FoliationDatum::new(n, basis).expect("proper nonzero subspace");
        }
    }
}

/// A seeded complete simplicial fan and a rational subspace of dimension
/// between 1 and `rank - 1`.
pub fn random_complete_fan(spec: &RandomFanSpec) -> (FanData, FoliationDatum) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut fan = match spec.base {
        BaseFan::ProjectiveSpace => projective_space(spec.rank),
        BaseFan::ProductOfLines => product_of_lines(spec.rank),
    };
    let mut done = 0;
    while done < spec.subdivisions {
        let v = random_interior_point(&mut rng, &fan);
        if let Ok(f) = fan.star_subdivide(&v) {
            fan = f;
            done += 1;
        }
    }
    let v = random_subspace(&mut rng, &fan);
    (fan, v)
}

/// A primitive vector in the relative interior of a random face of dimension
/// at least two of a random maximal cone.
pub fn random_interior_point(rng: &mut ChaCha8Rng, fan: &FanData) -> IntVector {
    let cone = fan.cones().choose(rng).expect("nonempty fan");
    loop {
        let coeffs: Vec<i64> = cone.iter().map(|_| rng.gen_range(0..=2)).collect();
        if coeffs.iter().filter(|&&c| c > 0).count() < 2 {
            continue;
        }
        let mut v = vec![Int::zero(); fan.rank()];
        for (&i, &c) in cone.iter().zip(&coeffs) {
            for (x, y) in v.iter_mut().zip(fan.ray(i)) {
                *x += y * Int::from(c);
            }
        }
        return primitive_part(&v).expect("nonzero");
    }
}

/// Outcome of one oracle family on one input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub name: &'static str,
    pub checked: usize,
    pub failures: Vec<String>,
}

impl CheckResult {
    fn new(name: &'static str) -> Self {
        CheckResult {
            name,
            checked: 0,
            failures: Vec::new(),
        }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(what());
        }
    }
}

/// Runs every oracle on one (fan, V) pair.
pub fn verify_all(fan: &FanData, v: &FoliationDatum) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();

    let mut c = CheckResult::new("canonical divisor: rays / filtration / conormal");
    let k = canonical_divisor(fan, v);
    let via_filtration = c1_from_filtration(&foliation_filtration(fan, v)).neg();
    let via_conormal = canonical_divisor_via_conormal(fan, v);
    c.record(k == via_filtration && k == via_conormal, || {
        format!("{k} vs {via_filtration} vs {via_conormal}")
    });
    let kx = k.add(&c1_from_filtration(&conormal_filtration(fan, v)));
    c.record(kx == canonical_divisor_of_variety(fan), || {
        format!("K_F + c1(N*) = {kx}")
    });
    out.push(c);

    let mut c = CheckResult::new("support function round trip");
    for d in [k.clone(), canonical_divisor_of_variety(fan)] {
        let back = support_function(fan, &d).divisor_from_values(fan);
        c.record(back == d, || format!("{d} came back as {back}"));
    }
    out.push(c);

    let mut c = CheckResult::new("discrepancy vs star subdivision");
    for cone in fan.cones() {
        for cand in small_candidates(fan, cone) {
            let a = discrepancy(fan, cone, v, &cand)?;
            let b = discrepancy_oracle(fan, v, &cand)?;
            c.record(a == b, || format!("{cand:?} in {cone:?}: {a} vs {b}"));
        }
    }
    out.push(c);

    let mut c = CheckResult::new("singular locus vs generator minors");
    let sing = singular_locus(fan, v);
    for sigma in fan.cones() {
        if sigma.len() != fan.rank() || !fan.is_smooth_cone(sigma) {
            continue;
        }
        for mask in 1u64..(1 << sigma.len()) {
            let tau: Vec<usize> = sigma
                .iter()
                .enumerate()
                .filter(|(b, _)| mask >> b & 1 == 1)
                .map(|(_, &i)| i)
                .collect();
            let minors = minor_rank_oracle(fan, sigma, v, &tau)?;
            c.record(minors == sing.contains(&tau), || {
                format!("face {tau:?} of {sigma:?}")
            });
        }
    }
    out.push(c);

    let mut c = CheckResult::new("wall classes: principal divisors and support jumps");
    for w in fan.interior_walls() {
        let class = curve_class(fan, &w)?;
        for m in characters(fan.rank()) {
            let p = principal_pairing(fan, &class, &m);
            c.record(p.is_zero(), || format!("wall {:?}, m = {m:?}: {p}", w.rays));
        }
        for i in 0..fan.num_rays() {
            let mut d = TorusDivisor::zero(fan.num_rays());
            d.coeffs[i] = Rat::one();
            let jump = intersection_via_support(fan, &d, &w)?;
            c.record(jump == class.dots[i], || {
                format!("wall {:?}, D_{i}: {} vs {jump}", w.rays, class.dots[i])
            });
        }
    }
    out.push(c);
    Ok(out)
}

/// Primitive non-ray points `Σ c_i v_i` with `c_i ∈ {0,1,2}` and at least two
/// nonzero coefficients.
pub fn small_candidates(fan: &FanData, cone: &[usize]) -> Vec<IntVector> {
    let mut out: Vec<IntVector> = Vec::new();
    let k = cone.len();
    for code in 0..3usize.pow(k as u32) {
        let coeffs: Vec<i64> = (0..k)
            .map(|j| (code / 3usize.pow(j as u32) % 3) as i64)
            .collect();
        if coeffs.iter().filter(|&&c| c > 0).count() < 2 {
            continue;
        }
        let mut v = vec![Int::zero(); fan.rank()];
        for (&i, &c) in cone.iter().zip(&coeffs) {
            for (x, y) in v.iter_mut().zip(fan.ray(i)) {
                *x += y * Int::from(c);
            }
        }
        let p = primitive_part(&v).expect("nonzero");
        if fan.ray_index(&p).is_none() && !out.contains(&p) {
            out.push(p);
        }
    }
    out.sort();
    out
}

fn characters(n: usize) -> Vec<IntVector> {
    let mut out: Vec<IntVector> = (0..n)
        .map(|i| (0..n).map(|j| Int::from((i == j) as i64)).collect())
        .collect();
    out.push((0..n).map(|j| Int::from(2 * j as i64 - 3)).collect());
    out
}
