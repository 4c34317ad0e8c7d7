//! Finitely generated rational semigroups: words, word maps, and orbits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ratmap::{MapError, RationalMap};
use crate::sphere::{chordal_distance, SpherePoint};

/// Word maps above this degree are not formed.
pub const MAX_WORD_DEGREE: usize = 64;
/// A backward orbit that sits on one point for more steps than this is stuck.
pub const STUCK_STEPS: usize = 1000;
const SAME_POINT: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SemigroupError {
    #[error("at least one generator required")]
    NoGenerators,
    #[error("generator {index} has degree {degree}; semigroup generators need degree >= 2")]
    GeneratorDegree { index: usize, degree: usize },
    #[error("words must be nonempty")]
    EmptyWord,
    #[error("generator index {index} out of range for {len} generators")]
    InvalidIndex { index: usize, len: usize },
    #[error("word map would have degree {degree}, above the cap {cap}")]
    DegreeCapExceeded { degree: usize, cap: usize },
    #[error("sample count must be positive")]
    ZeroCount,
    #[error("backward orbit stuck at {point} for {steps} steps (exceptional point?)")]
    StuckOrbit { point: SpherePoint, steps: usize },
    #[error(transparent)]
    Map(#[from] MapError),
}

/// A nonempty sequence of generator indices. The rightmost index acts first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn new(indices: Vec<usize>) -> Result<Self, SemigroupError> {
        if indices.is_empty() {
            return Err(SemigroupError::EmptyWord);
        }
        Ok(Word(indices))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Concatenation; the map of `a.concat(b)` is `map(a) ∘ map(b)`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RationalSemigroup {
    generators: Vec<RationalMap>,
}

impl RationalSemigroup {
    pub fn new(generators: Vec<RationalMap>) -> Result<Self, SemigroupError> {
        if generators.is_empty() {
            return Err(SemigroupError::NoGenerators);
        }
        for (index, g) in generators.iter().enumerate() {
            if g.degree() < 2 {
                return Err(SemigroupError::GeneratorDegree {
                    index,
                    degree: g.degree(),
                });
            }
        }
        Ok(RationalSemigroup { generators })
    }

    pub fn generators(&self) -> &[RationalMap] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    fn check_word(&self, w: &Word) -> Result<(), SemigroupError> {
        match w.0.iter().find(|&&i| i >= self.len()) {
            Some(&index) => Err(SemigroupError::InvalidIndex {
                index,
                len: self.len(),
            }),
            None => Ok(()),
        }
    }

    /// Degree of the word map, saturating.
    pub fn word_degree(&self, w: &Word) -> Result<usize, SemigroupError> {
        self.check_word(w)?;
        Ok(w.0
            .iter()
            .fold(1usize, |acc, &i| acc.saturating_mul(self.generators[i].degree())))
    }

    /// `g_{w[0]} ∘ g_{w[1]} ∘ … ∘ g_{w[k-1]}`.
    pub fn word_map(&self, w: &Word) -> Result<RationalMap, SemigroupError> {
        let degree = self.word_degree(w)?;
        if degree > MAX_WORD_DEGREE {
            return Err(SemigroupError::DegreeCapExceeded {
                degree,
                cap: MAX_WORD_DEGREE,
            });
        }
        let mut it = w.0.iter().rev();
        let first = *it.next().expect("word is nonempty");
        let mut acc = self.generators[first].clone();
        for &i in it {
            acc = self.generators[i].compose(&acc)?;
        }
        Ok(acc)
    }

    /// All words of length `1..=max_len`, shorter words first, each length in
    /// lexicographic order.
    pub fn enumerate_words(&self, max_len: usize) -> Vec<Word> {
        let n = self.len();
        let mut out = Vec::new();
        let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
        for _ in 0..max_len {
            layer = layer
                .iter()
                .flat_map(|prefix| {
                    (0..n).map(move |i| {
                        let mut v = prefix.clone();
                        v.push(i);
                        v
                    })
                })
                .collect();
            out.extend(layer.iter().cloned().map(Word));
        }
        out
    }

    /// The trajectory of `start` as the letters of `w` act right to left.
    pub fn forward_orbit(
        &self,
        start: SpherePoint,
        w: &Word,
    ) -> Result<Vec<SpherePoint>, SemigroupError> {
        self.check_word(w)?;
        let mut out = Vec::with_capacity(w.len() + 1);
        let mut z = start;
        out.push(z);
        for &i in w.0.iter().rev() {
            z = self.generators[i].eval(z)?;
            out.push(z);
        }
        Ok(out)
    }

    /// Random backward orbit: each step picks a generator uniformly and one of its
    /// distinct preimages uniformly. The orbit starts at `start` (step 0); the first
    /// `burn_in` points are dropped and the next `count` returned.
    pub fn backward_orbit_sample(
        &self,
        start: SpherePoint,
        count: usize,
        burn_in: usize,
        seed: u64,
    ) -> Result<Vec<SpherePoint>, SemigroupError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        run_backward(start, count, burn_in, |z| {
            let g = &self.generators[rng.gen_range(0..self.len())];
            let pre = g.preimages(z)?;
            Ok(pre[rng.gen_range(0..pre.len())].0)
        })
    }

    /// Backward orbit of the single element named by `w`. Preimages under the word
    /// map are taken letter by letter (leftmost letter inverted first), which gives
    /// the same preimage set as inverting the composed map.
    pub fn word_backward_orbit(
        &self,
        w: &Word,
        start: SpherePoint,
        count: usize,
        burn_in: usize,
        seed: u64,
    ) -> Result<Vec<SpherePoint>, SemigroupError> {
        self.check_word(w)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        run_backward(start, count, burn_in, |mut z| {
            for &i in &w.0 {
                let pre = self.generators[i].preimages(z)?;
                z = pre[rng.gen_range(0..pre.len())].0;
            }
            Ok(z)
        })
    }
}

fn run_backward<F>(
    start: SpherePoint,
    count: usize,
    burn_in: usize,
    mut step: F,
) -> Result<Vec<SpherePoint>, SemigroupError>
where
    F: FnMut(SpherePoint) -> Result<SpherePoint, SemigroupError>,
{
    if count == 0 {
        return Err(SemigroupError::ZeroCount);
    }
    let mut out = Vec::with_capacity(count);
    let mut z = start;
    let mut repeats = 0usize;
    for k in 0..burn_in + count {
        if k >= burn_in {
            out.push(z);
        }
        if k + 1 == burn_in + count {
            break;
        }
        let next = step(z)?;
        if chordal_distance(next, z) <= SAME_POINT {
            repeats += 1;
            if repeats > STUCK_STEPS {
                return Err(SemigroupError::StuckOrbit {
                    point: z,
                    steps: repeats,
                });
            }
        } else {
            repeats = 0;
        }
        z = next;
    }
    Ok(out)
}

/// Derives an independent stream seed from a base seed and a stream index.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 finalizer
    let mut x = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}
