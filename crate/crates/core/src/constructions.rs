//! Explicit invariant measures and the selector-mixture experiment.
//!
//! * The sparse-hyperplane measure: the law of `x ↦ ⟨x, z⟩ + η` with the bits
//!   of `z` i.i.d. Bernoulli(`p`) and `η` a fair bit. For small `p` it is close
//!   on any fixed subcube to `½δ₀ + ½δ₁`.
//! * Random-walk measures over a finite abelian group `U`: `g_0` uniform, the
//!   increments `g_i` i.i.d. with law `ν`, and `g_v = g_0 + Σ v_i g_i`.
//! * The selector map `ψ(η, ω¹, ω²)_t = ω¹_t` if `η_t = 0`, else `ω²_t`, and
//!   the experiment comparing `ψ_#(μ₀ ⊗ λ)` with `½μ₁ + ½μ₂` on a face.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::cube::{config_space_size, Config, Face};
use crate::measures::{
    ergodic_decompose, is_invariant, marginal, product, ExactMeasure, OrbitDecomposition,
    PairAlphabet,
};
use crate::rational::{int, pow, rat};
use crate::{Error, Result};

pub const MAX_HYPERPLANE_DIM: usize = 20;
pub const MAX_CYCLIC_FACTOR: u32 = 16;
pub const MAX_GROUP_ORDER: usize = 10_000;
pub const MAX_WALK_SUPPORT: u64 = 1_000_000;
/// Cap on `|supp μ₀| · |supp λ|` in the mixture experiment.
pub const MAX_MIXTURE_PRODUCT: usize = 1 << 22;
/// Cap on the number of cylinder patterns listed individually.
pub const MAX_PATTERNS: u64 = 1 << 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HyperplaneParams {
    n: usize,
    p: BigRational,
}

impl HyperplaneParams {
    pub fn new(n: usize, p: BigRational) -> Result<Self> {
        if !p.is_positive() || p >= BigRational::one() {
            return Err(Error::invalid(format!("hyperplane density p = {p} must lie in (0, 1)")));
        }
        if n == 0 || n > MAX_HYPERPLANE_DIM {
            return Err(Error::limit(format!("hyperplane dimension {n} outside 1..={MAX_HYPERPLANE_DIM}")));
        }
        Ok(HyperplaneParams { n, p })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> &BigRational {
        &self.p
    }
}

/// The configuration `x ↦ ⟨x, z⟩ + η`.
pub fn hyperplane_config(n: usize, z: u32, eta: bool) -> Config {
    let values = (0..1u32 << n).map(|x| u16::from(((x & z).count_ones() & 1 == 1) ^ eta)).collect();
    Config::from_raw(n, 2, values)
}

/// Law of `x ↦ ⟨x, z⟩ + η`; the `2^(n+1)` pairs `(z, η)` give distinct
/// configurations, with weight `½ p^|z| (1-p)^(n-|z|)`.
pub fn hyperplane_measure(params: &HyperplaneParams) -> ExactMeasure {
    let n = params.n;
    let q = BigRational::one() - &params.p;
    let half = rat(1, 2);
    let mut support = BTreeMap::new();
    for z in 0..1u32 << n {
        let ones = z.count_ones() as usize;
        let w = &half * pow(&params.p, ones) * pow(&q, n - ones);
        for eta in [false, true] {
            support.insert(hyperplane_config(n, z, eta), w.clone());
        }
    }
    ExactMeasure::from_map(n, 2, support)
}

/// `(1-p)^N / 2`: the restriction to the leading `N`-subcube is all-zero
/// exactly when `z_1 = ... = z_N = 0` and `η = 0`. The all-one probability is
/// the same by the symmetry `η ↦ η + 1`.
pub fn marginal_allzero_prob(params: &HyperplaneParams, subcube_dim: usize) -> Result<BigRational> {
    if subcube_dim > params.n {
        return Err(Error::invalid(format!("subcube dimension {subcube_dim} exceeds n = {}", params.n)));
    }
    Ok(pow(&(BigRational::one() - &params.p), subcube_dim) / int(2))
}

/// Probability that `μ` restricted to the leading `N`-subcube is constantly
/// `symbol`, by summing over the support.
pub fn constant_marginal_prob(mu: &ExactMeasure, subcube_dim: usize, symbol: u16) -> Result<BigRational> {
    let face = Face::leading(mu.n(), subcube_dim)?;
    let m = marginal(mu, &face)?;
    Ok(m.weight(&Config::constant(subcube_dim, mu.k(), symbol)?))
}

/// `Z/m_1 × ... × Z/m_s`, elements indexed in mixed radix with the first
/// factor least significant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteAbelianGroup {
    moduli: Vec<u32>,
    order: usize,
}

impl FiniteAbelianGroup {
    pub fn new(moduli: Vec<u32>) -> Result<Self> {
        if moduli.is_empty() {
            return Err(Error::invalid("group needs at least one cyclic factor"));
        }
        if let Some(m) = moduli.iter().find(|&&m| !(2..=MAX_CYCLIC_FACTOR).contains(&m)) {
            return Err(Error::invalid(format!("cyclic factor Z/{m} outside 2..={MAX_CYCLIC_FACTOR}")));
        }
        let order = moduli.iter().try_fold(1usize, |acc, &m| acc.checked_mul(m as usize));
        let order = order.filter(|&o| o <= MAX_GROUP_ORDER).ok_or_else(|| {
            Error::limit(format!("group order exceeds {MAX_GROUP_ORDER}"))
        })?;
        Ok(FiniteAbelianGroup { moduli, order })
    }

    pub fn cyclic(m: u32) -> Result<Self> {
        Self::new(vec![m])
    }

    pub fn moduli(&self) -> &[u32] {
        &self.moduli
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn element(&self, index: usize) -> Vec<u32> {
        let mut rest = index;
        self.moduli
            .iter()
            .map(|&m| {
                let r = (rest % m as usize) as u32;
                rest /= m as usize;
                r
            })
            .collect()
    }

    pub fn index_of(&self, residues: &[u32]) -> Result<usize> {
        Error::check_dim(self.moduli.len(), residues.len())?;
        let mut index = 0;
        for (&r, &m) in residues.iter().zip(&self.moduli).rev() {
            if r >= m {
                return Err(Error::invalid(format!("residue {r} out of range for Z/{m}")));
            }
            index = index * m as usize + r as usize;
        }
        Ok(index)
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut place = 1;
        for &m in &self.moduli {
            let m = m as usize;
            out += ((a % m + b % m) % m) * place;
            a /= m;
            b /= m;
            place *= m;
        }
        out
    }

    pub fn neg(&self, a: usize) -> usize {
        let mut a = a;
        let mut out = 0;
        let mut place = 1;
        for &m in &self.moduli {
            let m = m as usize;
            out += ((m - a % m) % m) * place;
            a /= m;
            place *= m;
        }
        out
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }
}

fn check_probability_vector(group: &FiniteAbelianGroup, nu: &[BigRational]) -> Result<()> {
    Error::check_dim(group.order(), nu.len())?;
    if nu.iter().any(|w| w.is_negative()) {
        return Err(Error::InvalidMeasure("negative step probability".into()));
    }
    let total: BigRational = nu.iter().sum();
    if !total.is_one() {
        return Err(Error::InvalidMeasure(format!("step law sums to {total}, not 1")));
    }
    Ok(())
}

/// Whether `(g₀, g₁) ↦ (g₀, g₀ + g₁)` and `(g₀, g₁) ↦ (g₀ + g₁, g₀)` have the
/// same law under `Haar ⊗ ν`, comparing the two pushforwards on `U²` exactly.
pub fn check_nu_symmetry(group: &FiniteAbelianGroup, nu: &[BigRational]) -> Result<bool> {
    check_probability_vector(group, nu)?;
    let haar = BigRational::new(1.into(), group.order().into());
    let mut lhs: BTreeMap<(usize, usize), BigRational> = BTreeMap::new();
    let mut rhs: BTreeMap<(usize, usize), BigRational> = BTreeMap::new();
    for g0 in 0..group.order() {
        for (g1, w) in nu.iter().enumerate().filter(|(_, w)| !w.is_zero()) {
            let mass = &haar * w;
            let s = group.add(g0, g1);
            *lhs.entry((g0, s)).or_insert_with(BigRational::zero) += &mass;
            *rhs.entry((s, g0)).or_insert_with(BigRational::zero) += mass;
        }
    }
    Ok(lhs == rhs)
}

#[derive(Clone, Debug)]
pub struct WalkParams {
    pub group: FiniteAbelianGroup,
    pub nu: Vec<BigRational>,
    pub n: usize,
}

/// Exact law of `v ↦ g_0 + Σ v_i g_i` on `U^(F_2^n)`; symbols are group
/// element indices.
pub fn random_walk_measure(params: &WalkParams) -> Result<ExactMeasure> {
    let WalkParams { group, nu, n } = params;
    let n = *n;
    check_probability_vector(group, nu)?;
    if n == 0 {
        return Err(Error::invalid("random walk needs n >= 1"));
    }
    let steps: Vec<(usize, &BigRational)> = nu.iter().enumerate().filter(|(_, w)| !w.is_zero()).collect();
    let outcomes = (group.order() as u64).saturating_mul((steps.len() as u64).checked_pow(n as u32).unwrap_or(u64::MAX));
    let bound = (group.order() as u64).checked_pow(n as u32 + 1).unwrap_or(u64::MAX);
    if bound > MAX_WALK_SUPPORT && outcomes > MAX_WALK_SUPPORT {
        return Err(Error::limit(format!("random walk with |U|^(n+1) = {bound} outcomes refused")));
    }
    if u32::try_from(group.order()).map_or(true, |o| o > crate::cube::MAX_ALPHABET) {
        return Err(Error::limit("group too large to serve as an alphabet"));
    }
    let k = group.order() as u32;
    let haar = BigRational::new(1.into(), group.order().into());
    let mut support: BTreeMap<Config, BigRational> = BTreeMap::new();
    let mut choice = vec![0usize; n];
    let mut values = vec![0u16; 1 << n];
    loop {
        let step_weight: BigRational = choice.iter().map(|&c| steps[c].1).product();
        for g0 in 0..group.order() {
            values[0] = g0 as u16;
            for v in 1usize..1 << n {
                let low = v.trailing_zeros() as usize;
                let prev = values[v & (v - 1)] as usize;
                values[v] = group.add(prev, steps[choice[low]].0) as u16;
            }
            *support.entry(Config::from_raw(n, k, values.clone())).or_insert_with(BigRational::zero) +=
                &haar * &step_weight;
        }
        let mut i = 0;
        while i < n {
            choice[i] += 1;
            if choice[i] < steps.len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
    }
    Ok(ExactMeasure::from_map(n, k, support))
}

/// Pointwise selection: `w1(t)` where `eta(t) = 0`, `w2(t)` elsewhere.
pub fn psi_combine(eta: &Config, w1: &Config, w2: &Config) -> Result<Config> {
    if eta.k() != 2 {
        return Err(Error::AlphabetMismatch { expected: 2, found: eta.k() });
    }
    Error::check_dim(eta.n(), w1.n())?;
    Error::check_dim(eta.n(), w2.n())?;
    if w1.k() != w2.k() {
        return Err(Error::AlphabetMismatch { expected: w1.k(), found: w2.k() });
    }
    let values = eta
        .values()
        .iter()
        .zip(w1.values().iter().zip(w2.values()))
        .map(|(&e, (&a, &b))| if e == 0 { a } else { b })
        .collect();
    Ok(Config::from_raw(eta.n(), w1.k(), values))
}

#[derive(Clone, Debug)]
pub struct CylinderDeviation {
    pub pattern: Config,
    /// `ψ_#(μ₀ ⊗ λ)` of the cylinder.
    pub mixture: BigRational,
    /// `½ μ₁ + ½ μ₂` of the cylinder.
    pub target: BigRational,
    pub deviation: BigRational,
}

#[derive(Clone, Debug)]
pub struct MixtureReport {
    pub face: Face,
    /// Number of free coordinates of the face.
    pub m: usize,
    pub epsilon: BigRational,
    pub bound: BigRational,
    pub lambda_representative: Config,
    pub lambda_weight: BigRational,
    /// Whether λ's marginals are `μ₁` and `μ₂` (guaranteed when both are
    /// single orbits).
    pub lambda_is_joining: bool,
    /// One row per cylinder pattern on the face; all `k^(2^r)` patterns when
    /// that is at most [`MAX_PATTERNS`], otherwise the patterns charged by
    /// some measure (all others have deviation zero).
    pub rows: Vec<CylinderDeviation>,
    pub all_patterns_listed: bool,
    pub max_deviation: BigRational,
    pub within_bound: bool,
    pub output: ExactMeasure,
    pub output_invariant: bool,
    pub output_decomposition: Option<OrbitDecomposition>,
}

/// Builds `λ` (heaviest orbit component of `μ₁ ⊗ μ₂`, ties to the smallest
/// representative), `μ₀` the hyperplane measure and `ψ_#(μ₀ ⊗ λ)`, then
/// compares every cylinder on `face` against `½μ₁ + ½μ₂` with tolerance
/// `2ε`, `ε = 1 - (1-p)^m`.
pub fn mixture_experiment(
    mu1: &ExactMeasure,
    mu2: &ExactMeasure,
    params: &HyperplaneParams,
    face: &Face,
) -> Result<MixtureReport> {
    let n = mu1.n();
    Error::check_dim(n, mu2.n())?;
    Error::check_dim(n, params.n())?;
    Error::check_dim(n, face.n())?;
    if mu1.k() != mu2.k() {
        return Err(Error::AlphabetMismatch { expected: mu1.k(), found: mu2.k() });
    }
    if !is_invariant(mu1) || !is_invariant(mu2) {
        return Err(Error::NotInvariant);
    }
    let k = mu1.k();
    let pa = PairAlphabet::new(k, k)?;
    let prod = product(mu1, mu2)?;
    let decomposition = ergodic_decompose(&prod)?;
    let (lambda_representative, lambda_weight) = decomposition
        .components()
        .iter()
        .fold(None::<&(Config, BigRational)>, |best, c| match best {
            Some(b) if b.1 >= c.1 => Some(b),
            _ => Some(c),
        })
        .cloned()
        .expect("product of probability measures is nonempty");
    let lambda = ExactMeasure::orbit_uniform(&lambda_representative)?;
    let lambda_is_joining = pa.project_first(&lambda)? == *mu1 && pa.project_second(&lambda)? == *mu2;

    let mu0 = hyperplane_measure(params);
    if mu0.len().saturating_mul(lambda.len()) > MAX_MIXTURE_PRODUCT {
        return Err(Error::limit("product support in the mixture experiment is too large"));
    }
    let mut out: BTreeMap<Config, BigRational> = BTreeMap::new();
    for (eta, a) in mu0.iter() {
        for (pair, b) in lambda.iter() {
            let c = psi_combine(eta, &pa.first(pair), &pa.second(pair))?;
            *out.entry(c).or_insert_with(BigRational::zero) += a * b;
        }
    }
    let output = ExactMeasure::from_map(n, k, out);
    let output_invariant = is_invariant(&output);
    let output_decomposition = if output_invariant { Some(ergodic_decompose(&output)?) } else { None };

    let m = face.dim();
    let epsilon = BigRational::one() - pow(&(BigRational::one() - params.p()), m);
    let bound = &epsilon * int(2);

    let psi_j = marginal(&output, face)?;
    let mu1_j = marginal(mu1, face)?;
    let mu2_j = marginal(mu2, face)?;
    let half = rat(1, 2);
    let row = |pattern: Config| {
        let mixture = psi_j.weight(&pattern);
        let target = &half * mu1_j.weight(&pattern) + &half * mu2_j.weight(&pattern);
        let deviation = (&mixture - &target).abs();
        CylinderDeviation { pattern, mixture, target, deviation }
    };
    let pattern_count = config_space_size(m, k).filter(|&c| c <= MAX_PATTERNS);
    let rows: Vec<CylinderDeviation> = match pattern_count {
        Some(count) => (0..count).map(|i| Config::from_index(m, k, i).map(row)).collect::<Result<_>>()?,
        None => {
            let mut charged: Vec<Config> = psi_j.iter().chain(mu1_j.iter()).chain(mu2_j.iter()).map(|(c, _)| c.clone()).collect();
            charged.sort();
            charged.dedup();
            charged.into_iter().map(row).collect()
        }
    };
    let max_deviation = rows.iter().map(|r| r.deviation.clone()).max().unwrap_or_else(BigRational::zero);
    let within_bound = max_deviation <= bound;
    Ok(MixtureReport {
        face: *face,
        m,
        epsilon,
        bound,
        lambda_representative,
        lambda_weight,
        lambda_is_joining,
        rows,
        all_patterns_listed: pattern_count.is_some(),
        max_deviation,
        within_bound,
        output,
        output_invariant,
        output_decomposition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::{enumerate_group, Isometry};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(n: usize, p: BigRational) -> HyperplaneParams {
        HyperplaneParams::new(n, p).unwrap()
    }

    #[test]
    fn hyperplane_basics() {
        let mu = hyperplane_measure(&params(3, rat(1, 8)));
        assert_eq!(mu.len(), 16);
        assert_eq!(mu.weight(&Config::constant(3, 2, 0).unwrap()), rat(343, 1024));
        assert!(is_invariant(&hyperplane_measure(&params(4, rat(1, 8)))));
        assert!(HyperplaneParams::new(3, rat(0, 1)).is_err());
        assert!(HyperplaneParams::new(3, rat(1, 1)).is_err());
    }

    #[test]
    fn hyperplane_support_has_degree_at_most_one() {
        let mu = hyperplane_measure(&params(4, rat(1, 3)));
        for (c, _) in mu.iter() {
            let g = crate::boolfn::BoolFn::from_config(c).unwrap();
            assert!(crate::boolfn::degree(&g) <= 1);
            assert!(crate::boolfn::omega_member(&g, 2).unwrap());
        }
    }

    #[test]
    fn allzero_closed_form_matches_enumeration() {
        for n in 1..=6 {
            for p in [rat(1, 2), rat(1, 8), rat(3, 7), rat(1, 16), rat(9, 10)] {
                let prm = params(n, p);
                let mu = hyperplane_measure(&prm);
                for big_n in 0..=n {
                    let closed = marginal_allzero_prob(&prm, big_n).unwrap();
                    assert_eq!(constant_marginal_prob(&mu, big_n, 0).unwrap(), closed);
                    assert_eq!(constant_marginal_prob(&mu, big_n, 1).unwrap(), closed);
                }
            }
        }
        assert_eq!(marginal_allzero_prob(&params(4, rat(1, 8)), 0).unwrap(), rat(1, 2));
        assert_eq!(marginal_allzero_prob(&params(4, rat(1, 8)), 3).unwrap(), rat(343, 1024));
        assert!(marginal_allzero_prob(&params(4, rat(1, 8)), 5).is_err());
    }

    #[test]
    fn hyperplane_two_coordinate_marginal() {
        let mu = hyperplane_measure(&params(3, rat(1, 8)));
        let m = marginal(&mu, &Face::leading(3, 2).unwrap()).unwrap();
        assert_eq!(m.weight(&Config::constant(2, 2, 0).unwrap()), rat(49, 128));
    }

    #[test]
    fn group_axioms() {
        let g = FiniteAbelianGroup::new(vec![2, 3]).unwrap();
        for a in 0..6 {
            assert_eq!(g.add(a, 0), a);
            assert_eq!(g.add(a, g.neg(a)), 0);
            for b in 0..6 {
                assert_eq!(g.add(a, b), g.add(b, a));
                for c in 0..6 {
                    assert_eq!(g.add(g.add(a, b), c), g.add(a, g.add(b, c)));
                }
            }
            assert_eq!(g.index_of(&g.element(a)).unwrap(), a);
        }
        assert!(FiniteAbelianGroup::cyclic(17).is_err());
        assert!(FiniteAbelianGroup::new(vec![]).is_err());
    }

    fn delta(order: usize, i: usize) -> Vec<BigRational> {
        (0..order).map(|j| if i == j { rat(1, 1) } else { rat(0, 1) }).collect()
    }

    #[test]
    fn nu_symmetry_examples() {
        let z2 = FiniteAbelianGroup::cyclic(2).unwrap();
        for p in [rat(0, 1), rat(1, 3), rat(1, 2), rat(1, 1)] {
            let nu = vec![rat(1, 1) - &p, p];
            assert!(check_nu_symmetry(&z2, &nu).unwrap());
        }
        let z4 = FiniteAbelianGroup::cyclic(4).unwrap();
        assert!(!check_nu_symmetry(&z4, &delta(4, 1)).unwrap());
        let sym = vec![rat(0, 1), rat(1, 2), rat(0, 1), rat(1, 2)];
        assert!(check_nu_symmetry(&z4, &sym).unwrap());
        assert!(check_nu_symmetry(&z4, &[rat(1, 2), rat(1, 2)]).is_err());
        assert!(check_nu_symmetry(&z4, &[rat(1, 2), rat(1, 4), rat(0, 1), rat(0, 1)]).is_err());
    }

    #[test]
    fn nu_symmetry_is_reflection_symmetry() {
        // oracle: ν(h) = ν(-h) for all h
        let g = FiniteAbelianGroup::new(vec![2, 3]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let raw: Vec<u64> = (0..6).map(|_| rng.random_range(0..3)).collect();
            let mut raw = raw;
            if rng.random_bool(0.5) {
                for h in 0..6 {
                    raw[g.neg(h)] = raw[h].max(raw[g.neg(h)]);
                }
            }
            let total: u64 = raw.iter().sum::<u64>().max(1);
            if raw.iter().all(|&r| r == 0) {
                raw[0] = 1;
            }
            let total = total.max(raw.iter().sum());
            let nu: Vec<BigRational> = raw.iter().map(|&r| rat(r as i64, total as i64)).collect();
            let oracle = (0..6).all(|h| nu[h] == nu[g.neg(h)]);
            assert_eq!(check_nu_symmetry(&g, &nu).unwrap(), oracle);
        }
    }

    #[test]
    fn walk_with_zero_steps_is_uniform_constants() {
        let z3 = FiniteAbelianGroup::cyclic(3).unwrap();
        let mu = random_walk_measure(&WalkParams { group: z3, nu: delta(3, 0), n: 2 }).unwrap();
        let d = ergodic_decompose(&mu).unwrap();
        assert_eq!(d.len(), 3);
        for (rep, w) in d.components() {
            assert!(rep.is_constant());
            assert_eq!(*w, rat(1, 3));
        }
    }

    #[test]
    fn binary_walk_is_hyperplane_measure() {
        for n in 1..=4 {
            let p = rat(1, 5);
            let z2 = FiniteAbelianGroup::cyclic(2).unwrap();
            let walk = random_walk_measure(&WalkParams { group: z2, nu: vec![rat(4, 5), p.clone()], n }).unwrap();
            assert_eq!(walk, hyperplane_measure(&params(n, p)));
            let origin = marginal(&walk, &Face::vertex(crate::cube::CubePoint::origin(n).unwrap())).unwrap();
            assert_eq!(origin.weight(&Config::constant(0, 2, 0).unwrap()), rat(1, 2));
        }
    }

    #[test]
    fn walk_invariance_iff_symmetry() {
        let cases: Vec<(Vec<u32>, Vec<BigRational>)> = vec![
            (vec![4], vec![rat(0, 1), rat(1, 2), rat(0, 1), rat(1, 2)]),
            (vec![4], delta(4, 1)),
            (vec![4], vec![rat(1, 4), rat(1, 4), rat(1, 4), rat(1, 4)]),
            (vec![4], vec![rat(1, 2), rat(1, 4), rat(1, 4), rat(0, 1)]),
            (vec![3], vec![rat(1, 3), rat(1, 3), rat(1, 3)]),
            (vec![3], vec![rat(1, 2), rat(1, 2), rat(0, 1)]),
            (vec![2, 2], vec![rat(1, 4), rat(1, 4), rat(1, 2), rat(0, 1)]),
            (vec![5], vec![rat(0, 1), rat(1, 3), rat(1, 6), rat(1, 6), rat(1, 3)]),
        ];
        for (moduli, nu) in cases {
            let group = FiniteAbelianGroup::new(moduli).unwrap();
            let sym = check_nu_symmetry(&group, &nu).unwrap();
            for n in 1..=2 {
                let mu = random_walk_measure(&WalkParams { group: group.clone(), nu: nu.clone(), n }).unwrap();
                assert_eq!(is_invariant(&mu), sym);
                // coordinate permutations always preserve the law
                if n == 2 {
                    let swap = Isometry::transposition(2, 1, 2).unwrap();
                    assert_eq!(mu.act(&swap).unwrap(), mu);
                }
            }
        }
    }

    #[test]
    fn psi_examples() {
        let w1 = Config::new(1, 3, vec![0, 0]).unwrap();
        let w2 = Config::new(1, 3, vec![2, 2]).unwrap();
        let zeros = Config::constant(1, 2, 0).unwrap();
        let ones = Config::constant(1, 2, 1).unwrap();
        assert_eq!(psi_combine(&zeros, &w1, &w2).unwrap(), w1);
        assert_eq!(psi_combine(&ones, &w1, &w2).unwrap(), w2);
        let eta = Config::new(1, 2, vec![0, 1]).unwrap();
        assert_eq!(psi_combine(&eta, &w1, &w2).unwrap().values(), &[0, 2]);
        assert!(psi_combine(&w1, &w1, &w2).is_err());
    }

    #[test]
    fn psi_is_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=4 {
            let group = enumerate_group(n).unwrap();
            for _ in 0..100 {
                let g = group[rng.random_range(0..group.len())];
                let rand_cfg = |rng: &mut ChaCha8Rng, k: u32| {
                    Config::new(n, k, (0..1 << n).map(|_| rng.random_range(0..k) as u16).collect()).unwrap()
                };
                let eta = rand_cfg(&mut rng, 2);
                let w1 = rand_cfg(&mut rng, 3);
                let w2 = rand_cfg(&mut rng, 3);
                let lhs = psi_combine(&eta.act(&g).unwrap(), &w1.act(&g).unwrap(), &w2.act(&g).unwrap()).unwrap();
                let rhs = psi_combine(&eta, &w1, &w2).unwrap().act(&g).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn mixture_of_equal_diracs_is_exact() {
        let d0 = ExactMeasure::dirac(Config::constant(2, 2, 0).unwrap());
        let r = mixture_experiment(&d0, &d0, &params(2, rat(1, 4)), &Face::whole(2).unwrap()).unwrap();
        assert!(r.max_deviation.is_zero());
        assert_eq!(r.output, d0);
        assert!(r.lambda_is_joining);
    }

    #[test]
    fn mixture_rejects_non_invariant_inputs() {
        let e1 = ExactMeasure::dirac(Config::new(1, 2, vec![0, 1]).unwrap());
        let d0 = ExactMeasure::dirac(Config::constant(1, 2, 0).unwrap());
        let err = mixture_experiment(&e1, &d0, &params(1, rat(1, 2)), &Face::whole(1).unwrap());
        assert!(matches!(err, Err(Error::NotInvariant)));
    }

    #[test]
    fn mixture_bound_on_subfaces() {
        let d0 = ExactMeasure::dirac(Config::constant(3, 2, 0).unwrap());
        let d1 = ExactMeasure::dirac(Config::constant(3, 2, 1).unwrap());
        for r in 0..=3 {
            for face in crate::cube::enumerate_faces(3, r).unwrap() {
                let rep = mixture_experiment(&d0, &d1, &params(3, rat(1, 16)), &face).unwrap();
                assert!(rep.within_bound, "face {face:?}");
                assert_eq!(rep.rows.len(), 1 << (1 << r));
                assert!(rep.output_invariant);
            }
        }
    }
}
