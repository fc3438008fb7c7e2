//! The d̄ distance between invariant measures, as an exact linear program
//! over orbit-reduced invariant joinings.
//!
//! A joining of `μ` and `ν` lives on configurations over the pair alphabet
//! (see [`PairAlphabet`]). Averaging a joining over the group keeps its
//! marginals and its disagreement mass, so it is enough to optimise over
//! invariant joinings, which are exactly the nonnegative weightings of pair
//! orbits with the right marginal orbit masses.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::cube::{config_orbits, orbit_of, Config, CubePoint};
use crate::lp::{LinearProgram, LpOutcome};
use crate::measures::{ergodic_decompose, is_invariant, ExactMeasure, PairAlphabet};
use crate::rational::int;
use crate::{Error, Result};

/// Cap on `|supp μ| · |supp ν|`, the number of pair configurations that can
/// carry a joining.
pub const MAX_PAIR_SUPPORT: usize = 1 << 20;

#[derive(Clone, Debug)]
pub struct PairOrbit {
    /// Smallest member.
    pub representative: Config,
    pub members: Vec<Config>,
    /// Index into [`JoiningProgram::first_orbits`].
    pub first: usize,
    /// Index into [`JoiningProgram::second_orbits`].
    pub second: usize,
    /// Fraction of members disagreeing at the reference vertex.
    pub disagreement: BigRational,
}

#[derive(Clone, Debug)]
pub struct JoiningProgram {
    n: usize,
    alphabet: PairAlphabet,
    reference: CubePoint,
    first_orbits: Vec<(Config, BigRational)>,
    second_orbits: Vec<(Config, BigRational)>,
    orbits: Vec<PairOrbit>,
}

impl JoiningProgram {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet(&self) -> PairAlphabet {
        self.alphabet
    }

    pub fn reference(&self) -> CubePoint {
        self.reference
    }

    /// Orbits of `supp μ` with their masses, ascending by representative.
    pub fn first_orbits(&self) -> &[(Config, BigRational)] {
        &self.first_orbits
    }

    pub fn second_orbits(&self) -> &[(Config, BigRational)] {
        &self.second_orbits
    }

    /// Pair orbits inside `supp μ × supp ν`, ascending by representative.
    pub fn orbits(&self) -> &[PairOrbit] {
        &self.orbits
    }

    pub fn objective(&self) -> Vec<BigRational> {
        self.orbits.iter().map(|o| o.disagreement.clone()).collect()
    }

    /// Rows `0..F` are first-marginal orbits, then second-marginal orbits.
    pub fn constraint_matrix(&self) -> Vec<Vec<BigRational>> {
        let f = self.first_orbits.len();
        let rows = f + self.second_orbits.len();
        let mut a = vec![vec![BigRational::zero(); self.orbits.len()]; rows];
        for (j, o) in self.orbits.iter().enumerate() {
            a[o.first][j] = BigRational::one();
            a[f + o.second][j] = BigRational::one();
        }
        a
    }

    pub fn linear_program(&self) -> LinearProgram {
        let b = self.first_orbits.iter().chain(&self.second_orbits).map(|(_, w)| w.clone()).collect();
        LinearProgram { a: self.constraint_matrix(), b, c: self.objective() }
    }

    /// The invariant joining given by orbit weights, uniform within each orbit.
    pub fn joining(&self, weights: &[BigRational]) -> Result<ExactMeasure> {
        Error::check_dim(self.orbits.len(), weights.len())?;
        let mut support = BTreeMap::new();
        for (o, w) in self.orbits.iter().zip(weights) {
            if w.is_zero() {
                continue;
            }
            let each = w / int(o.members.len() as u64);
            for m in &o.members {
                support.insert(m.clone(), each.clone());
            }
        }
        Ok(ExactMeasure::from_map(self.n, self.alphabet.size(), support))
    }

    pub fn solve(&self) -> Result<JoiningSolution> {
        match self.linear_program().solve()? {
            LpOutcome::Optimal { value, x } => {
                let joining = self.joining(&x)?;
                Ok(JoiningSolution { value, weights: x, joining })
            }
            LpOutcome::Infeasible => {
                Err(Error::Internal("joining program infeasible despite invariant marginals".into()))
            }
            LpOutcome::Unbounded => Err(Error::Internal("joining program unbounded".into())),
        }
    }
}

#[derive(Clone, Debug)]
pub struct JoiningSolution {
    pub value: BigRational,
    /// One weight per pair orbit, in program order.
    pub weights: Vec<BigRational>,
    pub joining: ExactMeasure,
}

type OrbitMasses = (Vec<(Config, BigRational)>, HashMap<Config, usize>);

fn orbit_masses(mu: &ExactMeasure) -> Result<OrbitMasses> {
    let reps = mu.orbit_representatives()?;
    let mut masses: BTreeMap<Config, BigRational> = BTreeMap::new();
    for (c, w) in mu.iter() {
        *masses.entry(reps[c].clone()).or_insert_with(BigRational::zero) += w;
    }
    let orbits: Vec<(Config, BigRational)> = masses.into_iter().collect();
    let index: HashMap<&Config, usize> = orbits.iter().enumerate().map(|(i, (r, _))| (r, i)).collect();
    let of = reps.iter().map(|(c, r)| (c.clone(), index[r])).collect();
    Ok((orbits, of))
}

/// Builds the orbit-reduced program for invariant joinings of `mu` and `nu`
/// with objective `λ{ω_v ≠ η_v}` at the vertex `v`.
pub fn build_joining_program(mu: &ExactMeasure, nu: &ExactMeasure, v: CubePoint) -> Result<JoiningProgram> {
    let n = mu.n();
    Error::check_dim(n, nu.n())?;
    Error::check_dim(n, v.n())?;
    if !is_invariant(mu) || !is_invariant(nu) {
        return Err(Error::NotInvariant);
    }
    let alphabet = PairAlphabet::new(mu.k(), nu.k())?;
    if mu.len().saturating_mul(nu.len()) > MAX_PAIR_SUPPORT {
        return Err(Error::limit(format!(
            "{} x {} pair configurations exceed {MAX_PAIR_SUPPORT}",
            mu.len(),
            nu.len()
        )));
    }
    let (first_orbits, first_of) = orbit_masses(mu)?;
    let (second_orbits, second_of) = orbit_masses(nu)?;

    let mut seen: HashSet<Config> = HashSet::new();
    let mut raw: Vec<Vec<Config>> = Vec::new();
    for (a, _) in mu.iter() {
        for (b, _) in nu.iter() {
            let pair = alphabet.zip(a, b)?;
            if seen.contains(&pair) {
                continue;
            }
            let members: Vec<Config> = orbit_of(&pair, MAX_PAIR_SUPPORT)?.into_iter().collect();
            for m in &members {
                seen.insert(m.clone());
            }
            raw.push(members);
        }
    }
    let vx = v.index();
    let mut orbits: Vec<PairOrbit> = raw
        .into_iter()
        .map(|members| {
            let representative = members[0].clone();
            let (x, y) = (alphabet.first(&representative), alphabet.second(&representative));
            let differ = members
                .iter()
                .filter(|m| {
                    let (p, q) = alphabet.decode(m.value(vx));
                    p != q
                })
                .count();
            PairOrbit {
                first: first_of[&x],
                second: second_of[&y],
                disagreement: BigRational::new(differ.into(), members.len().into()),
                representative,
                members,
            }
        })
        .collect();
    orbits.sort_by(|a, b| a.representative.cmp(&b.representative));
    Ok(JoiningProgram { n, alphabet, reference: v, first_orbits, second_orbits, orbits })
}

/// Number of orbits of the isometry group acting diagonally on all pairs of
/// configurations (the unreduced pair space).
pub fn pair_orbit_count(n: usize, k1: u32, k2: u32) -> Result<usize> {
    let alphabet = PairAlphabet::new(k1, k2)?;
    Ok(config_orbits(n, alphabet.size())?.orbit_count())
}

#[derive(Clone, Debug)]
pub struct DbarResult {
    pub value: BigRational,
    pub program: JoiningProgram,
    pub solution: JoiningSolution,
}

/// `d̄(μ, ν)` with the reference vertex at the origin.
pub fn dbar_distance(mu: &ExactMeasure, nu: &ExactMeasure) -> Result<BigRational> {
    Ok(dbar_at(mu, nu, CubePoint::origin(mu.n())?)?.value)
}

pub fn dbar_at(mu: &ExactMeasure, nu: &ExactMeasure, v: CubePoint) -> Result<DbarResult> {
    let program = build_joining_program(mu, nu, v)?;
    let solution = program.solve()?;
    Ok(DbarResult { value: solution.value.clone(), program, solution })
}

/// An invariant joining attaining `d̄(μ, ν)`.
pub fn optimal_joining(mu: &ExactMeasure, nu: &ExactMeasure) -> Result<ExactMeasure> {
    Ok(dbar_at(mu, nu, CubePoint::origin(mu.n())?)?.solution.joining)
}

/// `λ{ω_v ≠ η_v}` for a measure on pair configurations.
pub fn disagreement(lambda: &ExactMeasure, alphabet: PairAlphabet, v: CubePoint) -> Result<BigRational> {
    Error::check_dim(lambda.n(), v.n())?;
    if lambda.k() != alphabet.size() {
        return Err(Error::AlphabetMismatch { expected: alphabet.size(), found: lambda.k() });
    }
    Ok(lambda.mass(|c| {
        let (p, q) = alphabet.decode(c.value(v.index()));
        p != q
    }))
}

#[derive(Clone, Debug)]
pub struct NearDiagonalComponent {
    pub representative: Config,
    pub weight: BigRational,
    pub disagreement: BigRational,
}

#[derive(Clone, Debug)]
pub struct NearDiagonalReport {
    pub components: Vec<NearDiagonalComponent>,
    pub total_disagreement: BigRational,
    /// Whether `Σ weight · disagreement` equals the total.
    pub averaging_identity: bool,
}

/// Orbit decomposition of an invariant joining with the disagreement mass of
/// each component at `v`.
pub fn near_diagonal_decomposition(
    lambda: &ExactMeasure,
    alphabet: PairAlphabet,
    v: CubePoint,
) -> Result<NearDiagonalReport> {
    if !is_invariant(lambda) {
        return Err(Error::NotInvariant);
    }
    let total_disagreement = disagreement(lambda, alphabet, v)?;
    let decomposition = ergodic_decompose(lambda)?;
    let mut components = Vec::with_capacity(decomposition.len());
    for (rep, weight) in decomposition.components() {
        let component = ExactMeasure::orbit_uniform(rep)?;
        components.push(NearDiagonalComponent {
            representative: rep.clone(),
            weight: weight.clone(),
            disagreement: disagreement(&component, alphabet, v)?,
        });
    }
    let averaged: BigRational = components.iter().map(|c| &c.weight * &c.disagreement).sum();
    Ok(NearDiagonalReport { averaging_identity: averaged == total_disagreement, components, total_disagreement })
}

/// Relational composition `λ₁₃(a, c) = Σ_b λ₁₂(a, b) λ₂₃(b, c) / μ₂(b)`.
/// The result joins the outer marginals and is invariant when both inputs are.
pub fn compose_joinings(
    l12: &ExactMeasure,
    a12: PairAlphabet,
    l23: &ExactMeasure,
    a23: PairAlphabet,
) -> Result<(ExactMeasure, PairAlphabet)> {
    Error::check_dim(l12.n(), l23.n())?;
    if a12.k2 != a23.k1 {
        return Err(Error::AlphabetMismatch { expected: a12.k2, found: a23.k1 });
    }
    let mu2 = a12.project_second(l12)?;
    if mu2 != a23.project_first(l23)? {
        return Err(Error::invalid("middle marginals of the two joinings differ"));
    }
    let a13 = PairAlphabet::new(a12.k1, a23.k2)?;
    let mut left: BTreeMap<Config, Vec<(Config, &BigRational)>> = BTreeMap::new();
    for (p, w) in l12.iter() {
        left.entry(a12.second(p)).or_default().push((a12.first(p), w));
    }
    let mut right: BTreeMap<Config, Vec<(Config, &BigRational)>> = BTreeMap::new();
    for (p, w) in l23.iter() {
        right.entry(a23.first(p)).or_default().push((a23.second(p), w));
    }
    let mut out: BTreeMap<Config, BigRational> = BTreeMap::new();
    for (b, lefts) in &left {
        let Some(rights) = right.get(b) else { continue };
        let mb = mu2.weight(b);
        for (a, wl) in lefts {
            for (c, wr) in rights {
                *out.entry(a13.zip(a, c)?).or_insert_with(BigRational::zero) += *wl * *wr / &mb;
            }
        }
    }
    Ok((ExactMeasure::from_map(l12.n(), a13.size(), out), a13))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{cylinder_tv, extreme_points};
    use crate::rational::rat;
    use crate::cube::Face;

    fn dirac_const(n: usize, s: u16) -> ExactMeasure {
        ExactMeasure::dirac(Config::constant(n, 2, s).unwrap())
    }

    #[test]
    fn trivial_programs() {
        for n in 1..=3 {
            let o = CubePoint::origin(n).unwrap();
            let p = build_joining_program(&dirac_const(n, 0), &dirac_const(n, 0), o).unwrap();
            assert_eq!(p.orbits().len(), 1);
            assert!(p.solve().unwrap().value.is_zero());
            let p = build_joining_program(&dirac_const(n, 0), &dirac_const(n, 1), o).unwrap();
            assert_eq!(p.orbits().len(), 1);
            assert!(p.solve().unwrap().value.is_one());
        }
    }

    #[test]
    fn constraint_columns_sum_to_one_per_side() {
        let mu = ExactMeasure::orbit_uniform(&Config::new(2, 2, vec![0, 1, 0, 0]).unwrap()).unwrap();
        let nu = ExactMeasure::mixture(&[(rat(1, 2), &dirac_const(2, 0)), (rat(1, 2), &mu)]).unwrap();
        let p = build_joining_program(&mu, &nu, CubePoint::origin(2).unwrap()).unwrap();
        let a = p.constraint_matrix();
        let f = p.first_orbits().len();
        for j in 0..p.orbits().len() {
            let top: BigRational = a[..f].iter().map(|r| r[j].clone()).sum();
            let bottom: BigRational = a[f..].iter().map(|r| r[j].clone()).sum();
            assert!(top.is_one() && bottom.is_one());
        }
    }

    #[test]
    fn dbar_half_example() {
        let d0 = dirac_const(2, 0);
        let mix = ExactMeasure::mixture(&[(rat(1, 2), &d0), (rat(1, 2), &dirac_const(2, 1))]).unwrap();
        assert_eq!(dbar_distance(&d0, &mix).unwrap(), rat(1, 2));
        let r = dbar_at(&d0, &mix, CubePoint::origin(2).unwrap()).unwrap();
        let nd = near_diagonal_decomposition(&r.solution.joining, r.program.alphabet(), r.program.reference()).unwrap();
        assert!(nd.averaging_identity);
        assert_eq!(nd.total_disagreement, rat(1, 2));
    }

    #[test]
    fn rejects_non_invariant() {
        let e = ExactMeasure::dirac(Config::new(1, 2, vec![0, 1]).unwrap());
        assert!(matches!(dbar_distance(&e, &dirac_const(1, 0)), Err(Error::NotInvariant)));
    }

    #[test]
    fn diagonal_decompositions() {
        let pa = PairAlphabet::new(2, 2).unwrap();
        let d00 = ExactMeasure::dirac(pa.zip(&Config::constant(2, 2, 0).unwrap(), &Config::constant(2, 2, 0).unwrap()).unwrap());
        let d11 = ExactMeasure::dirac(pa.zip(&Config::constant(2, 2, 1).unwrap(), &Config::constant(2, 2, 1).unwrap()).unwrap());
        let o = CubePoint::origin(2).unwrap();
        let r = near_diagonal_decomposition(&d00, pa, o).unwrap();
        assert_eq!(r.components.len(), 1);
        assert!(r.total_disagreement.is_zero());
        let half = ExactMeasure::mixture(&[(rat(1, 2), &d00), (rat(1, 2), &d11)]).unwrap();
        let r = near_diagonal_decomposition(&half, pa, o).unwrap();
        assert_eq!(r.components.len(), 2);
        assert!(r.components.iter().all(|c| c.disagreement.is_zero()));
    }

    #[test]
    fn pair_orbit_burnside() {
        let (fix_sum, order) = crate::cube::burnside_sum(2, 4).unwrap();
        assert_eq!(pair_orbit_count(2, 2, 2).unwrap() as u128, fix_sum / order);
    }

    #[test]
    fn metric_on_extreme_points_n1() {
        let ext = extreme_points(1, 2).unwrap();
        for a in &ext {
            for b in &ext {
                let d = dbar_distance(a, b).unwrap();
                assert_eq!(d.is_zero(), a == b);
                assert_eq!(d, dbar_distance(b, a).unwrap());
                let v = Face::vertex(CubePoint::origin(1).unwrap());
                assert!(d >= cylinder_tv(a, b, &v).unwrap());
            }
        }
    }

    #[test]
    fn composition_joins_outer_marginals() {
        let ext = extreme_points(2, 2).unwrap();
        let (m1, m2, m3) = (&ext[0], &ext[2], &ext[4]);
        let r12 = dbar_at(m1, m2, CubePoint::origin(2).unwrap()).unwrap();
        let r23 = dbar_at(m2, m3, CubePoint::origin(2).unwrap()).unwrap();
        let (l13, a13) =
            compose_joinings(&r12.solution.joining, r12.program.alphabet(), &r23.solution.joining, r12.program.alphabet())
                .unwrap();
        assert_eq!(a13.project_first(&l13).unwrap(), *m1);
        assert_eq!(a13.project_second(&l13).unwrap(), *m3);
        assert!(is_invariant(&l13));
    }
}
