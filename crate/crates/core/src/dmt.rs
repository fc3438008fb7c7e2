//! Distant multiple transitivity at finite scale.
//!
//! For an index set `T` with a group `Γ` acting on it, finite `I, J ⊆ T` and
//! a pair `(γ₁, γ₂)`, a witness is some `ξ ∈ Γ` fixing `I` pointwise with
//! `ξ(γ₁(t)) = γ₂(t)` for every `t ∈ J`. We count the pairs that admit one.
//!
//! Two contexts are supported: `k`-subsets of `{1..n}` under all point
//! permutations, and the cube `F_2^n` under its isometries.
//!
//! Whether a witness exists depends on `(γ₁, γ₂)` only through the image
//! tuples `γ₁(J)` and `γ₂(J)`, so exhaustive counts group the elements of
//! `Γ` by image tuple and decide each pair of tuples once.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cube::{enumerate_group, next_permutation, CubePoint, Isometry};
use crate::{Error, Result};

pub const MAX_HYPERGRAPH_POINTS: usize = 24;
pub const MAX_EXHAUSTIVE_HYPERGRAPH: usize = 7;
pub const MAX_EXHAUSTIVE_CUBE: usize = 4;
/// Witness search scans a stabilizer inside the enumerated cube group.
pub const MAX_WITNESS_CUBE: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FiniteContext {
    /// `T` = `k`-subsets of `{1..n}`, encoded as bit masks (bit `i-1` for
    /// point `i`); `Γ` = permutations of `{1..n}`.
    Hypergraph { n: usize, k: usize },
    /// `T` = points of `F_2^n` by index; `Γ` = `Isom(F_2^n)`.
    Cube { n: usize },
}

/// A group element of either context.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ContextElement {
    /// One-line notation, 0-based internally.
    Permutation(Vec<u8>),
    Isometry(Isometry),
}

impl fmt::Display for ContextElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContextElement::Permutation(p) => {
                let line: Vec<String> = p.iter().map(|&x| (x + 1).to_string()).collect();
                write!(f, "[{}]", line.join(" "))
            }
            ContextElement::Isometry(g) => {
                let line: Vec<String> = g.perm().iter().map(|x| x.to_string()).collect();
                write!(f, "[{}]+{:#x}", line.join(" "), g.trans().index())
            }
        }
    }
}

impl FiniteContext {
    pub fn hypergraph(n: usize, k: usize) -> Result<Self> {
        if n == 0 || n > MAX_HYPERGRAPH_POINTS {
            return Err(Error::invalid(format!("hypergraph on {n} points outside 1..={MAX_HYPERGRAPH_POINTS}")));
        }
        if k == 0 || k > n {
            return Err(Error::invalid(format!("edge size {k} outside 1..={n}")));
        }
        Ok(FiniteContext::Hypergraph { n, k })
    }

    pub fn cube(n: usize) -> Result<Self> {
        CubePoint::origin(n)?;
        if n == 0 {
            return Err(Error::invalid("cube context needs n >= 1"));
        }
        Ok(FiniteContext::Cube { n })
    }

    pub fn n(&self) -> usize {
        match *self {
            FiniteContext::Hypergraph { n, .. } | FiniteContext::Cube { n } => n,
        }
    }

    /// Encodes a 1-based `k`-subset.
    pub fn subset(&self, points: &[usize]) -> Result<u32> {
        let FiniteContext::Hypergraph { n, .. } = *self else {
            return Err(Error::invalid("subsets index the hypergraph context only"));
        };
        let mut mask = 0u32;
        for &p in points {
            if p == 0 || p > n {
                return Err(Error::invalid(format!("point {p} outside 1..={n}")));
            }
            mask |= 1 << (p - 1);
        }
        self.check_element(mask)?;
        Ok(mask)
    }

    pub fn check_element(&self, t: u32) -> Result<()> {
        let ok = match *self {
            FiniteContext::Hypergraph { n, k } => t >> n == 0 && t.count_ones() as usize == k,
            FiniteContext::Cube { n } => t >> n == 0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("{t:#x} is not an element of the index set")))
        }
    }

    pub fn check_group_element(&self, g: &ContextElement) -> Result<()> {
        match (self, g) {
            (FiniteContext::Hypergraph { n, .. }, ContextElement::Permutation(p)) => {
                let mut seen = vec![false; *n];
                if p.len() != *n || !p.iter().all(|&x| (x as usize) < *n && !std::mem::replace(&mut seen[x as usize], true)) {
                    return Err(Error::invalid("not a permutation of the hypergraph points"));
                }
                Ok(())
            }
            (FiniteContext::Cube { n }, ContextElement::Isometry(g)) => Error::check_dim(*n, g.n()),
            _ => Err(Error::invalid("group element does not belong to this context")),
        }
    }

    pub fn identity(&self) -> ContextElement {
        match *self {
            FiniteContext::Hypergraph { n, .. } => ContextElement::Permutation((0..n as u8).collect()),
            FiniteContext::Cube { n } => ContextElement::Isometry(Isometry::identity(n).expect("validated dimension")),
        }
    }

    /// Action of a group element on the index set.
    pub fn apply(&self, g: &ContextElement, t: u32) -> u32 {
        match g {
            ContextElement::Permutation(p) => {
                let mut out = 0u32;
                let mut rest = t;
                while rest != 0 {
                    let i = rest.trailing_zeros() as usize;
                    out |= 1 << p[i];
                    rest &= rest - 1;
                }
                out
            }
            ContextElement::Isometry(g) => g.apply_index(t),
        }
    }

    pub fn group_order(&self) -> u128 {
        match *self {
            FiniteContext::Hypergraph { n, .. } => (1..=n as u128).product(),
            FiniteContext::Cube { n } => crate::cube::group_order(n),
        }
    }

    /// All of `Γ`, permutations in lexicographic order.
    pub fn enumerate_group(&self) -> Result<Vec<ContextElement>> {
        match *self {
            FiniteContext::Hypergraph { n, .. } => {
                if n > MAX_EXHAUSTIVE_HYPERGRAPH + 1 {
                    return Err(Error::limit(format!("refusing to enumerate S_{n}")));
                }
                let mut p: Vec<u8> = (0..n as u8).collect();
                let mut out = Vec::new();
                loop {
                    out.push(ContextElement::Permutation(p.clone()));
                    if !next_permutation(&mut p) {
                        return Ok(out);
                    }
                }
            }
            FiniteContext::Cube { n } => Ok(enumerate_group(n)?.into_iter().map(ContextElement::Isometry).collect()),
        }
    }

    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> ContextElement {
        match *self {
            FiniteContext::Hypergraph { n, .. } => {
                let mut p: Vec<u8> = (0..n as u8).collect();
                p.shuffle(rng);
                ContextElement::Permutation(p)
            }
            FiniteContext::Cube { n } => {
                let mut p: Vec<u8> = (0..n as u8).collect();
                p.shuffle(rng);
                let t = rng.random::<u32>() & ((1u32 << n) - 1);
                ContextElement::Isometry(Isometry::from_parts(n, &p, t))
            }
        }
    }
}

/// Direct check of the two witness conditions.
pub fn verify_witness(
    ctx: &FiniteContext,
    i: &[u32],
    j: &[u32],
    g1: &ContextElement,
    g2: &ContextElement,
    xi: &ContextElement,
) -> bool {
    ctx.check_group_element(xi).is_ok()
        && i.iter().all(|&t| ctx.apply(xi, t) == t)
        && j.iter().all(|&t| ctx.apply(xi, ctx.apply(g1, t)) == ctx.apply(g2, t))
}

/// Hypergraph witness for the set constraints `ξ(a) = b`. Such a `ξ` exists
/// iff every membership pattern across the sources is shared by as many
/// points as the corresponding pattern across the targets; matching the
/// classes in increasing order gives one.
fn hypergraph_witness(n: usize, constraints: &[(u32, u32)]) -> Option<Vec<u8>> {
    let signature = |p: usize, side: fn(&(u32, u32)) -> u32| -> Vec<bool> {
        constraints.iter().map(|c| side(c) >> p & 1 == 1).collect()
    };
    let mut classes: BTreeMap<Vec<bool>, (Vec<u8>, Vec<u8>)> = BTreeMap::new();
    for p in 0..n {
        classes.entry(signature(p, |c| c.0)).or_default().0.push(p as u8);
        classes.entry(signature(p, |c| c.1)).or_default().1.push(p as u8);
    }
    let mut xi = vec![0u8; n];
    for (src, dst) in classes.values() {
        if src.len() != dst.len() {
            return None;
        }
        for (&s, &d) in src.iter().zip(dst) {
            xi[s as usize] = d;
        }
    }
    Some(xi)
}

fn check_sets(ctx: &FiniteContext, i: &[u32], j: &[u32]) -> Result<()> {
    if i.is_empty() || j.is_empty() {
        return Err(Error::invalid("I and J must be nonempty"));
    }
    i.iter().chain(j).try_for_each(|&t| ctx.check_element(t))
}

fn cube_stabilizer(ctx: &FiniteContext, i: &[u32]) -> Result<Vec<ContextElement>> {
    let n = ctx.n();
    if n > MAX_WITNESS_CUBE {
        return Err(Error::limit(format!("cube witness search limited to n <= {MAX_WITNESS_CUBE}")));
    }
    Ok(ctx.enumerate_group()?.into_iter().filter(|g| i.iter().all(|&t| ctx.apply(g, t) == t)).collect())
}

/// Searches for `ξ` given the image tuples `a = γ₁(J)` and `b = γ₂(J)`.
fn witness_for_images(
    ctx: &FiniteContext,
    i: &[u32],
    a: &[u32],
    b: &[u32],
    stabilizer: Option<&[ContextElement]>,
) -> Option<ContextElement> {
    match *ctx {
        FiniteContext::Hypergraph { n, .. } => {
            let constraints: Vec<(u32, u32)> = i.iter().map(|&t| (t, t)).chain(a.iter().copied().zip(b.iter().copied())).collect();
            hypergraph_witness(n, &constraints).map(ContextElement::Permutation)
        }
        FiniteContext::Cube { .. } => stabilizer
            .expect("cube search needs the stabilizer")
            .iter()
            .find(|g| a.iter().zip(b).all(|(&x, &y)| ctx.apply(g, x) == y))
            .cloned(),
    }
}

/// A witness for `(g1, g2)`, or `None` when no group element qualifies.
/// Returned witnesses have been re-checked by [`verify_witness`].
pub fn dmt_witness(
    ctx: &FiniteContext,
    i: &[u32],
    j: &[u32],
    g1: &ContextElement,
    g2: &ContextElement,
) -> Result<Option<ContextElement>> {
    check_sets(ctx, i, j)?;
    ctx.check_group_element(g1)?;
    ctx.check_group_element(g2)?;
    let stab = match ctx {
        FiniteContext::Cube { .. } => Some(cube_stabilizer(ctx, i)?),
        FiniteContext::Hypergraph { .. } => None,
    };
    let a: Vec<u32> = j.iter().map(|&t| ctx.apply(g1, t)).collect();
    let b: Vec<u32> = j.iter().map(|&t| ctx.apply(g2, t)).collect();
    let xi = witness_for_images(ctx, i, &a, &b, stab.as_deref());
    if let Some(x) = &xi {
        if !verify_witness(ctx, i, j, g1, g2, x) {
            return Err(Error::Internal(format!("witness {x} failed verification")));
        }
    }
    Ok(xi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DmtMode {
    Exhaustive,
    Sampled { trials: u64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DmtQuery {
    pub context: FiniteContext,
    pub i: Vec<u32>,
    pub j: Vec<u32>,
    pub mode: DmtMode,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DmtResult {
    /// Pairs admitting a witness.
    pub hits: u128,
    /// Pairs examined: `|Γ|^2` when exhaustive, the trial count when sampled.
    pub pairs: u128,
    /// Witnesses constructed and independently verified.
    pub witnesses_verified: u64,
    /// Distinct image tuples of `J` under `Γ` (exhaustive mode).
    pub image_classes: Option<usize>,
}

impl DmtResult {
    pub fn fraction(&self) -> BigRational {
        BigRational::new(self.hits.into(), self.pairs.max(1).into())
    }
}

/// Fraction of ordered pairs `(γ₁, γ₂) ∈ Γ²` admitting a witness.
pub fn dmt_fraction(query: &DmtQuery) -> Result<DmtResult> {
    let ctx = &query.context;
    check_sets(ctx, &query.i, &query.j)?;
    match query.mode {
        DmtMode::Exhaustive => exhaustive(ctx, &query.i, &query.j),
        DmtMode::Sampled { trials, seed } => sampled(ctx, &query.i, &query.j, trials, seed),
    }
}

fn exhaustive(ctx: &FiniteContext, i: &[u32], j: &[u32]) -> Result<DmtResult> {
    let limit = match ctx {
        FiniteContext::Hypergraph { .. } => MAX_EXHAUSTIVE_HYPERGRAPH,
        FiniteContext::Cube { .. } => MAX_EXHAUSTIVE_CUBE,
    };
    if ctx.n() > limit {
        return Err(Error::limit(format!("exhaustive mode needs n <= {limit}; use sampled mode")));
    }
    let group = ctx.enumerate_group()?;
    // image tuple -> (multiplicity, first element producing it)
    let mut classes: BTreeMap<Vec<u32>, (u128, usize)> = BTreeMap::new();
    for (idx, g) in group.iter().enumerate() {
        let img: Vec<u32> = j.iter().map(|&t| ctx.apply(g, t)).collect();
        classes.entry(img).or_insert((0, idx)).0 += 1;
    }
    let classes: Vec<(Vec<u32>, u128, usize)> = classes.into_iter().map(|(k, (c, i))| (k, c, i)).collect();
    let stab = match ctx {
        FiniteContext::Cube { .. } => Some(cube_stabilizer(ctx, i)?),
        FiniteContext::Hypergraph { .. } => None,
    };
    let (hits, verified) = classes
        .par_iter()
        .map(|(a, ca, ga)| -> Result<(u128, u64)> {
            let mut hits = 0u128;
            let mut verified = 0u64;
            for (b, cb, gb) in &classes {
                if let Some(xi) = witness_for_images(ctx, i, a, b, stab.as_deref()) {
                    if !verify_witness(ctx, i, j, &group[*ga], &group[*gb], &xi) {
                        return Err(Error::Internal(format!("witness {xi} failed verification")));
                    }
                    verified += 1;
                    hits += ca * cb;
                }
            }
            Ok((hits, verified))
        })
        .try_reduce(|| (0, 0), |x, y| Ok((x.0 + y.0, x.1 + y.1)))?;
    let order = group.len() as u128;
    Ok(DmtResult { hits, pairs: order * order, witnesses_verified: verified, image_classes: Some(classes.len()) })
}

fn sampled(ctx: &FiniteContext, i: &[u32], j: &[u32], trials: u64, seed: u64) -> Result<DmtResult> {
    let stab = match ctx {
        FiniteContext::Cube { .. } => Some(cube_stabilizer(ctx, i)?),
        FiniteContext::Hypergraph { .. } => None,
    };
    let (hits, verified) = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<(u128, u64)> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t);
            let g1 = ctx.random_element(&mut rng);
            let g2 = ctx.random_element(&mut rng);
            let a: Vec<u32> = j.iter().map(|&x| ctx.apply(&g1, x)).collect();
            let b: Vec<u32> = j.iter().map(|&x| ctx.apply(&g2, x)).collect();
            match witness_for_images(ctx, i, &a, &b, stab.as_deref()) {
                Some(xi) if verify_witness(ctx, i, j, &g1, &g2, &xi) => Ok((1, 1)),
                Some(xi) => Err(Error::Internal(format!("witness {xi} failed verification"))),
                None => Ok((0, 0)),
            }
        })
        .try_reduce(|| (0, 0), |x, y| Ok((x.0 + y.0, x.1 + y.1)))?;
    Ok(DmtResult { hits, pairs: trials as u128, witnesses_verified: verified, image_classes: None })
}
