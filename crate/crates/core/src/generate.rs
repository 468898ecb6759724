//! Seeded instance generators.

use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::ratio::{format_rational, parse_rational};
use crate::seed::{stage_rng, Rng as StageRng};
use crate::vectors::{BinaryVector, Instance, IntVector, PointSetPair};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    UniformBinary,
    /// At least `count` left vectors get a complement on the right.
    PlantedOrthogonal { count: usize },
    /// One all-ones left vector; no zero vector on the right.
    PlantedHitting,
    /// Integer points in `[0, bound]^d` around shared cluster centres.
    ClusteredInteger { bound: i128 },
    /// The right side is a shuffled copy of the complements of the left.
    ComplementMatched,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::UniformBinary => f.write_str("uniform-binary"),
            Family::PlantedOrthogonal { count } => write!(f, "planted-orthogonal:{count}"),
            Family::PlantedHitting => f.write_str("planted-hitting"),
            Family::ClusteredInteger { bound } => write!(f, "clustered-integer:{bound}"),
            Family::ComplementMatched => f.write_str("complement-matched"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    /// `uniform-binary`, `planted-orthogonal:<count>`, `planted-hitting`,
    /// `clustered-integer:<bound>`, `complement-matched`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let num = |default: i128| -> Result<i128> {
            arg.map_or(Ok(default), |a| {
                a.parse().map_err(|_| Error::parameter(format!("bad family argument in {s:?}")))
            })
        };
        Ok(match name {
            "uniform-binary" => Family::UniformBinary,
            "planted-orthogonal" => Family::PlantedOrthogonal {
                count: usize::try_from(num(1)?)
                    .map_err(|_| Error::parameter("planted count must be nonnegative"))?,
            },
            "planted-hitting" => Family::PlantedHitting,
            "clustered-integer" => Family::ClusteredInteger { bound: num(100)? },
            "complement-matched" => Family::ComplementMatched,
            _ => return Err(Error::parameter(format!("unknown generator family {s:?}"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub family: Family,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    /// Probability of a one in binary families.
    pub density: Rational64,
}

impl GeneratorSpec {
    pub fn new(family: Family, n: usize, d: usize, seed: u64) -> Self {
        Self {
            family,
            n,
            d,
            seed,
            density: Rational64::new(1, 2),
        }
    }

    pub fn with_density(mut self, density: Rational64) -> Self {
        self.density = density;
        self
    }

    pub fn with_density_str(self, density: &str) -> Result<Self> {
        Ok(self.with_density(parse_rational(density)?))
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(Error::parameter("generator needs n ≥ 1 and d ≥ 1"));
        }
        if self.density < Rational64::from_integer(0) || self.density > Rational64::from_integer(1) {
            return Err(Error::parameter(format!(
                "density must lie in [0, 1], got {}",
                format_rational(self.density)
            )));
        }
        match self.family {
            Family::PlantedOrthogonal { count } if count > self.n => Err(Error::parameter(format!(
                "cannot plant {count} orthogonal pairs among {} vectors",
                self.n
            ))),
            Family::ClusteredInteger { bound } if bound < 1 => {
                Err(Error::parameter("clustered-integer bound must be ≥ 1"))
            }
            _ => Ok(()),
        }
    }
}

fn random_binary(rng: &mut StageRng, d: usize, density: Rational64) -> BinaryVector {
    let (num, den) = (*density.numer() as u64, *density.denom() as u64);
    let bits: Vec<bool> = (0..d).map(|_| rng.gen_range(0..den) < num).collect();
    BinaryVector::from_bits(&bits)
}

fn binary_sides(spec: &GeneratorSpec, rng: &mut StageRng) -> (Vec<BinaryVector>, Vec<BinaryVector>) {
    let left = (0..spec.n).map(|_| random_binary(rng, spec.d, spec.density)).collect();
    let right = (0..spec.n).map(|_| random_binary(rng, spec.d, spec.density)).collect();
    (left, right)
}

pub fn generate(spec: &GeneratorSpec) -> Result<Instance> {
    spec.validate()?;
    let mut rng = stage_rng(spec.seed, 0);
    let mut plant = stage_rng(spec.seed, 1);
    let (n, d) = (spec.n, spec.d);
    let binary = |left, right| Ok(Instance::Binary(PointSetPair::new(d, left, right)?));
    match spec.family {
        Family::UniformBinary => {
            let (l, r) = binary_sides(spec, &mut rng);
            binary(l, r)
        }
        Family::PlantedOrthogonal { count } => {
            let (l, mut r) = binary_sides(spec, &mut rng);
            let lefts = rand::seq::index::sample(&mut plant, n, count);
            let rights = rand::seq::index::sample(&mut plant, n, count);
            for (i, j) in lefts.into_iter().zip(rights) {
                r[j] = l[i].complement();
            }
            binary(l, r)
        }
        Family::PlantedHitting => {
            let (mut l, mut r) = binary_sides(spec, &mut rng);
            l[plant.gen_range(0..n)] = BinaryVector::ones(d);
            for b in r.iter_mut().filter(|b| b.is_zero()) {
                b.set(plant.gen_range(0..d), true);
            }
            binary(l, r)
        }
        Family::ComplementMatched => {
            let l: Vec<BinaryVector> = (0..n).map(|_| random_binary(&mut rng, d, spec.density)).collect();
            let mut r: Vec<BinaryVector> = l.iter().map(BinaryVector::complement).collect();
            r.shuffle(&mut plant);
            binary(l, r)
        }
        Family::ClusteredInteger { bound } => {
            let centres: Vec<Vec<i128>> = (0..n.div_ceil(4).max(1))
                .map(|_| (0..d).map(|_| rng.gen_range(0..=bound)).collect())
                .collect();
            let spread = (bound / 10).max(1);
            let point = |rng: &mut StageRng| {
                let c = &centres[rng.gen_range(0..centres.len())];
                IntVector::new(
                    c.iter()
                        .map(|&x| (x + rng.gen_range(-spread..=spread)).clamp(0, bound))
                        .collect(),
                )
            };
            let left = (0..n).map(|_| point(&mut rng)).collect();
            let right = (0..n).map(|_| point(&mut rng)).collect();
            Ok(Instance::Integer(PointSetPair::new(d, left, right)?))
        }
    }
}
