//! TOML input documents and MMP traces.
//!
//! ```toml
//! lattice_rank = 3
//! rays = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
//! max_cones = [[0, 1, 2]]
//! foliation = [[1, 1, 0], [0, 0, "1/2"]]
//! ```

use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fan::{FanData, Quotient};
use crate::foliation::FoliationDatum;
use crate::mori::{ContractionKind, MmpOutcome, MmpTrace};
use crate::{Int, Rat, RatVector};

/// A rational entry: a bare integer or a `"p/q"` string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Int(i64),
    Text(String),
}

pub fn parse_rational(s: &str) -> Result<Rat> {
    let bad = |why: &str| Error::Parse(format!("malformed rational {s:?}: {why}"));
    let (p, q) = match s.trim().split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s.trim(), "1"),
    };
    let p: Int = p.parse().map_err(|_| bad("numerator is not an integer"))?;
    let q: Int = q
        .parse()
        .map_err(|_| bad("denominator is not an integer"))?;
    if q == Int::from(0) {
        return Err(bad("zero denominator"));
    }
    Ok(Rat::new(p, q))
}

/// `"p/q"` with `q > 1`, or the bare integer.
pub fn format_rational(x: &Rat) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

fn scalar_of(x: &Rat) -> Scalar {
    match (x.denom().is_one(), x.numer().to_i64()) {
        (true, Some(n)) => Scalar::Int(n),
        _ => Scalar::Text(format_rational(x)),
    }
}

fn rational_of(s: &Scalar) -> Result<Rat> {
    match s {
        Scalar::Int(n) => Ok(Rat::from_integer(Int::from(*n))),
        Scalar::Text(t) => parse_rational(t),
    }
}

/// A fan as it appears on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanDoc {
    pub lattice_rank: usize,
    pub rays: Vec<Vec<i64>>,
    pub max_cones: Vec<Vec<usize>>,
}

impl FanDoc {
    pub fn of(fan: &FanData) -> FanDoc {
        FanDoc {
            lattice_rank: fan.rank(),
            rays: fan
                .rays()
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|x| x.to_i64().expect("coordinates fit in i64"))
                        .collect()
                })
                .collect(),
            max_cones: fan.cones().to_vec(),
        }
    }

    pub fn to_fan(&self) -> Result<FanData> {
        FanData::new(
            self.lattice_rank,
            self.rays
                .iter()
                .map(|r| r.iter().map(|&x| Int::from(x)).collect())
                .collect(),
            self.max_cones.clone(),
        )
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("plain data serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDocument {
    pub lattice_rank: usize,
    pub rays: Vec<Vec<i64>>,
    pub max_cones: Vec<Vec<usize>>,
    pub foliation: Vec<Vec<Scalar>>,
}

impl InputDocument {
    pub fn of(fan: &FanData, v: &FoliationDatum) -> InputDocument {
        let f = FanDoc::of(fan);
        InputDocument {
            lattice_rank: f.lattice_rank,
            rays: f.rays,
            max_cones: f.max_cones,
            foliation: v
                .basis()
                .iter()
                .map(|b| b.iter().map(scalar_of).collect())
                .collect(),
        }
    }

    pub fn fan(&self) -> Result<FanData> {
        FanDoc {
            lattice_rank: self.lattice_rank,
            rays: self.rays.clone(),
            max_cones: self.max_cones.clone(),
        }
        .to_fan()
    }

    pub fn foliation(&self) -> Result<FoliationDatum> {
        let basis = self
            .foliation
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, s)| {
                        rational_of(s).map_err(|e| match e {
                            Error::Parse(m) => Error::Parse(format!("foliation[{i}][{j}]: {m}")),
                            e => e,
                        })
                    })
                    .collect::<Result<RatVector>>()
            })
            .collect::<Result<Vec<_>>>()?;
        FoliationDatum::new(self.lattice_rank, basis)
    }
}

/// Parses and validates a document.
pub fn parse(text: &str) -> Result<(FanData, FoliationDatum)> {
    let doc: InputDocument = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let v = doc.foliation()?;
    Ok((doc.fan()?, v))
}

pub fn serialize(fan: &FanData, v: &FoliationDatum) -> String {
    toml::to_string(&InputDocument::of(fan, v)).expect("plain data serializes")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientDoc {
    pub is_fan: bool,
    #[serde(flatten)]
    pub fan: FanDoc,
    pub projection: Vec<Vec<i64>>,
}

impl QuotientDoc {
    pub fn of(q: &Quotient) -> QuotientDoc {
        QuotientDoc {
            is_fan: q.report.is_fan(),
            fan: FanDoc::of(&q.fan),
            projection: q
                .lattice
                .projection
                .iter()
                .map(|r| r.iter().map(|x| x.to_i64().expect("fits in i64")).collect())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PullbackDoc {
    pub rays_in_v: Vec<usize>,
    /// Induced subspace `V / V'` in quotient coordinates; empty when the
    /// foliation is the fibration itself.
    pub induced: Vec<Vec<String>>,
    pub quotient: QuotientDoc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepDoc {
    pub index: usize,
    pub wall_index: usize,
    pub wall: Vec<usize>,
    pub class_walls: Vec<Vec<usize>>,
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub contracted_ray: Option<usize>,
    pub kf_dot: String,
    pub picard_before: i64,
    pub picard_after: i64,
    pub dicritical_before: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dicritical_after: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fan_after: Option<FanDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FibrationDoc {
    pub contraction: QuotientDoc,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pullback: Option<PullbackDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceDoc {
    pub outcome: String,
    pub canonical_override: bool,
    pub consistency_failures: Vec<String>,
    pub input: InputDocument,
    #[serde(rename = "step", default)]
    pub steps: Vec<StepDoc>,
    #[serde(rename = "final")]
    pub final_fan: FanDoc,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fibration: Option<FibrationDoc>,
}

impl TraceDoc {
    pub fn of(t: &MmpTrace) -> TraceDoc {
        let steps = t
            .steps
            .iter()
            .enumerate()
            .map(|(index, s)| StepDoc {
                index,
                wall_index: s.wall_index,
                wall: s.wall.rays.clone(),
                class_walls: s.class_walls.iter().map(|w| w.rays.clone()).collect(),
                kind: match s.kind {
                    ContractionKind::Fibre => "fibre",
                    ContractionKind::Divisorial { .. } => "divisorial",
                    ContractionKind::Small => "flip",
                }
                .to_string(),
                contracted_ray: match s.kind {
                    ContractionKind::Divisorial { ray } => Some(ray),
                    _ => None,
                },
                kf_dot: format_rational(&s.kf_dot),
                picard_before: s.picard_before,
                picard_after: s.picard_after,
                dicritical_before: s.dicritical_before,
                dicritical_after: s.dicritical_after,
                fan_after: s.fan_after.as_ref().map(FanDoc::of),
            })
            .collect();
        let (outcome, fibration) = match &t.outcome {
            MmpOutcome::KfNef => ("kf_nef", None),
            MmpOutcome::Fibration {
                contraction,
                pullback,
            } => (
                "fibration",
                Some(FibrationDoc {
                    contraction: QuotientDoc::of(contraction),
                    pullback: pullback.as_ref().map(|p| PullbackDoc {
                        rays_in_v: p.rays_in_v.clone(),
                        induced: p
                            .induced
                            .iter()
                            .map(|r| r.iter().map(format_rational).collect())
                            .collect(),
                        quotient: QuotientDoc::of(&p.quotient),
                    }),
                }),
            ),
        };
        TraceDoc {
            outcome: outcome.to_string(),
            canonical_override: t.canonical_override,
            consistency_failures: t.consistency_failures.clone(),
            input: InputDocument::of(&t.initial, &t.foliation),
            steps,
            final_fan: FanDoc::of(&t.final_fan),
            fibration,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("plain data serializes")
    }

    pub fn from_toml(text: &str) -> Result<TraceDoc> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Wall indices of the recorded steps, for replay.
    pub fn picks(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.wall_index).collect()
    }
}
