//! Finitely supported probability measures on `K^(F_2^n)` with exact rational
//! weights.
//!
//! At finite scale the extreme invariant measures are the uniform measures on
//! single orbits, so the "ergodic decomposition" of an invariant measure is
//! its list of orbit masses. Nothing here uses floating point: invariance is
//! equality of exact measures.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::cube::{config_orbits, generators, orbit_of, Config, Face, Isometry};
use crate::rational::int;
use crate::{Error, Result};

/// Cap on orbit sizes explored by breadth-first search.
pub const MAX_ORBIT: usize = 1 << 20;

/// A probability measure with finite support and exact weights.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ExactMeasure {
    n: usize,
    k: u32,
    support: BTreeMap<Config, BigRational>,
}

impl ExactMeasure {
    /// Builds a measure from weighted configurations; repeated configurations
    /// accumulate. Weights must be positive and sum to exactly one.
    pub fn new(n: usize, k: u32, entries: impl IntoIterator<Item = (Config, BigRational)>) -> Result<Self> {
        let mut support: BTreeMap<Config, BigRational> = BTreeMap::new();
        for (c, w) in entries {
            if c.n() != n {
                return Err(Error::DimensionMismatch { expected: n, found: c.n() });
            }
            if c.k() != k {
                return Err(Error::AlphabetMismatch { expected: k, found: c.k() });
            }
            if !w.is_positive() {
                return Err(Error::InvalidMeasure(format!("non-positive weight {w}")));
            }
            *support.entry(c).or_insert_with(BigRational::zero) += w;
        }
        let total: BigRational = support.values().sum();
        if !total.is_one() {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}, not 1")));
        }
        Ok(ExactMeasure { n, k, support })
    }

    /// Internal constructor for totals that are one by construction; zero
    /// weights are dropped.
    pub(crate) fn from_map(n: usize, k: u32, mut support: BTreeMap<Config, BigRational>) -> Self {
        support.retain(|_, w| !w.is_zero());
        debug_assert!(support.values().sum::<BigRational>().is_one());
        ExactMeasure { n, k, support }
    }

    pub fn dirac(c: Config) -> Self {
        let (n, k) = (c.n(), c.k());
        Self::from_map(n, k, BTreeMap::from([(c, BigRational::one())]))
    }

    /// Uniform measure on the given (distinct) configurations.
    pub fn uniform(configs: impl IntoIterator<Item = Config>) -> Result<Self> {
        let configs: Vec<Config> = configs.into_iter().collect();
        let first = configs.first().ok_or_else(|| Error::InvalidMeasure("empty support".into()))?;
        let w = BigRational::new(1.into(), configs.len().into());
        let (n, k) = (first.n(), first.k());
        Self::new(n, k, configs.into_iter().map(|c| (c, w.clone())))
    }

    /// Uniform measure on the orbit of `seed`.
    pub fn orbit_uniform(seed: &Config) -> Result<Self> {
        Self::uniform(orbit_of(seed, MAX_ORBIT)?)
    }

    /// `Σ a_i μ_i` for convex weights `a_i`.
    pub fn mixture(parts: &[(BigRational, &ExactMeasure)]) -> Result<Self> {
        let (_, first) = parts.first().ok_or_else(|| Error::InvalidMeasure("empty mixture".into()))?;
        let (n, k) = (first.n, first.k);
        let mut entries = Vec::new();
        for (a, mu) in parts {
            if mu.n != n || mu.k != k {
                return Err(Error::invalid("mixture components live on different spaces"));
            }
            if a.is_negative() {
                return Err(Error::InvalidMeasure(format!("negative mixture weight {a}")));
            }
            if a.is_zero() {
                continue;
            }
            entries.extend(mu.support.iter().map(|(c, w)| (c.clone(), a * w)));
        }
        Self::new(n, k, entries)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Support in ascending configuration order.
    pub fn iter(&self) -> impl Iterator<Item = (&Config, &BigRational)> {
        self.support.iter()
    }

    pub fn weight(&self, c: &Config) -> BigRational {
        self.support.get(c).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn mass(&self, mut pred: impl FnMut(&Config) -> bool) -> BigRational {
        self.support.iter().filter(|(c, _)| pred(c)).map(|(_, w)| w).sum()
    }

    /// Pushforward along an arbitrary map into `K'^(F_2^{n'})`.
    pub fn pushforward(&self, n: usize, k: u32, mut f: impl FnMut(&Config) -> Config) -> Result<Self> {
        let mut out: BTreeMap<Config, BigRational> = BTreeMap::new();
        for (c, w) in &self.support {
            let image = f(c);
            if image.n() != n || image.k() != k {
                return Err(Error::invalid("pushforward map leaves the declared target space"));
            }
            *out.entry(image).or_insert_with(BigRational::zero) += w;
        }
        Ok(Self::from_map(n, k, out))
    }

    /// Pushforward by the contravariant group action `c ↦ g · c`.
    pub fn act(&self, g: &Isometry) -> Result<Self> {
        Error::check_dim(self.n, g.n())?;
        self.pushforward(self.n, self.k, |c| c.act_unchecked(g))
    }

    /// Maps each support configuration to the minimal member of its orbit.
    /// Fails if some orbit leaves the support, which cannot happen for an
    /// invariant measure.
    pub fn orbit_representatives(&self) -> Result<BTreeMap<Config, Config>> {
        let mut rep: BTreeMap<Config, Config> = BTreeMap::new();
        for c in self.support.keys() {
            if rep.contains_key(c) {
                continue;
            }
            let orbit = orbit_of(c, MAX_ORBIT)?;
            let min = orbit.iter().next().expect("orbit contains its seed").clone();
            for member in orbit {
                if !self.support.contains_key(&member) {
                    return Err(Error::NotInvariant);
                }
                rep.insert(member, min.clone());
            }
        }
        Ok(rep)
    }
}

/// Invariance under every generator (adjacent transpositions and bit-flips),
/// which generate the full isometry group.
pub fn is_invariant(mu: &ExactMeasure) -> bool {
    let gens = generators(mu.n).expect("measure dimension already validated");
    gens.iter().all(|g| {
        mu.support.iter().all(|(c, w)| mu.support.get(&c.act_unchecked(g)) == Some(w))
    })
}

/// Weights of an invariant measure on its orbits.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OrbitDecomposition {
    n: usize,
    k: u32,
    components: Vec<(Config, BigRational)>,
}

impl OrbitDecomposition {
    /// `(minimal representative, orbit mass)`, ascending by representative.
    pub fn components(&self) -> &[(Config, BigRational)] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// `Σ_O w_O · uniform(O)`.
    pub fn reconstruct(&self) -> Result<ExactMeasure> {
        let mut entries = Vec::new();
        for (rep, w) in &self.components {
            let orbit = orbit_of(rep, MAX_ORBIT)?;
            let each = w / int(orbit.len() as u64);
            entries.extend(orbit.into_iter().map(|c| (c, each.clone())));
        }
        ExactMeasure::new(self.n, self.k, entries)
    }
}

/// Orbit masses of an invariant measure.
pub fn ergodic_decompose(mu: &ExactMeasure) -> Result<OrbitDecomposition> {
    if !is_invariant(mu) {
        return Err(Error::NotInvariant);
    }
    let reps = mu.orbit_representatives()?;
    let mut masses: BTreeMap<Config, BigRational> = BTreeMap::new();
    for (c, w) in &mu.support {
        *masses.entry(reps[c].clone()).or_insert_with(BigRational::zero) += w;
    }
    Ok(OrbitDecomposition { n: mu.n, k: mu.k, components: masses.into_iter().collect() })
}

/// The extreme points of the invariant simplex on `K^(F_2^n)`: one uniform
/// orbit measure per orbit, in representative order.
pub fn extreme_points(n: usize, k: u32) -> Result<Vec<ExactMeasure>> {
    let table = config_orbits(n, k)?;
    table
        .representatives()
        .iter()
        .map(|&rep| ExactMeasure::orbit_uniform(&Config::from_index(n, k, rep)?))
        .collect()
}

/// Law of the restriction to `face`, as a measure on `K^(F_2^r)` through the
/// face's canonical chart.
pub fn marginal(mu: &ExactMeasure, face: &Face) -> Result<ExactMeasure> {
    Error::check_dim(mu.n, face.n())?;
    mu.pushforward(face.dim(), mu.k, |c| c.restrict(face).expect("dimension checked"))
}

/// `½ Σ |μ_F(a) − ν_F(a)|` over patterns `a` on the face.
pub fn total_variation(mu: &ExactMeasure, nu: &ExactMeasure) -> Result<BigRational> {
    Error::check_dim(mu.n, nu.n)?;
    if mu.k != nu.k {
        return Err(Error::AlphabetMismatch { expected: mu.k, found: nu.k });
    }
    let mut sum = BigRational::zero();
    for (c, w) in &mu.support {
        sum += (w - nu.weight(c)).abs();
    }
    for (c, w) in &nu.support {
        if !mu.support.contains_key(c) {
            sum += w;
        }
    }
    Ok(sum / int(2))
}

/// Total variation between the marginals on `face`.
pub fn cylinder_tv(mu: &ExactMeasure, nu: &ExactMeasure, face: &Face) -> Result<BigRational> {
    Error::check_dim(mu.n, nu.n)?;
    total_variation(&marginal(mu, face)?, &marginal(nu, face)?)
}

/// Encoding of pairs of symbols `(a, b)` from alphabets of sizes `k1`, `k2` as
/// the single symbol `a + k1 · b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairAlphabet {
    pub k1: u32,
    pub k2: u32,
}

impl PairAlphabet {
    pub fn new(k1: u32, k2: u32) -> Result<Self> {
        if u64::from(k1) * u64::from(k2) > u64::from(crate::cube::MAX_ALPHABET) {
            return Err(Error::limit(format!("pair alphabet {k1} x {k2} too large")));
        }
        Ok(PairAlphabet { k1, k2 })
    }

    pub fn size(&self) -> u32 {
        self.k1 * self.k2
    }

    pub fn encode(&self, a: u16, b: u16) -> u16 {
        (u32::from(a) + self.k1 * u32::from(b)) as u16
    }

    pub fn decode(&self, s: u16) -> (u16, u16) {
        ((u32::from(s) % self.k1) as u16, (u32::from(s) / self.k1) as u16)
    }

    pub fn zip(&self, first: &Config, second: &Config) -> Result<Config> {
        Error::check_dim(first.n(), second.n())?;
        let values = first.values().iter().zip(second.values()).map(|(&a, &b)| self.encode(a, b)).collect();
        Config::new(first.n(), self.size(), values)
    }

    pub fn first(&self, pair: &Config) -> Config {
        let values = pair.values().iter().map(|&s| self.decode(s).0).collect();
        Config::from_raw(pair.n(), self.k1, values)
    }

    pub fn second(&self, pair: &Config) -> Config {
        let values = pair.values().iter().map(|&s| self.decode(s).1).collect();
        Config::from_raw(pair.n(), self.k2, values)
    }

    pub fn project_first(&self, lambda: &ExactMeasure) -> Result<ExactMeasure> {
        lambda.pushforward(lambda.n, self.k1, |c| self.first(c))
    }

    pub fn project_second(&self, lambda: &ExactMeasure) -> Result<ExactMeasure> {
        lambda.pushforward(lambda.n, self.k2, |c| self.second(c))
    }
}

/// The independent coupling `μ ⊗ ν` on the pair alphabet.
pub fn product(mu: &ExactMeasure, nu: &ExactMeasure) -> Result<ExactMeasure> {
    Error::check_dim(mu.n, nu.n)?;
    let pa = PairAlphabet::new(mu.k, nu.k)?;
    let mut out = BTreeMap::new();
    for (a, wa) in &mu.support {
        for (b, wb) in &nu.support {
            out.insert(pa.zip(a, b)?, wa * wb);
        }
    }
    Ok(ExactMeasure::from_map(mu.n, pa.size(), out))
}
