//! Random-face testing of the low-degree property and the monomial family
//! showing that it is not testable: the pass probability of `v_1 ⋯ v_{r+1}`
//! tends to 1 as `n` grows while its relative distance from degree `≤ r`
//! stays at `2^-(r+1)`.
//!
//! A face is identified with `F_2^J` through its canonical chart (free
//! coordinates in increasing order, offset by the base point), and a trial
//! passes when the restriction has degree at most `r` there.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::boolfn::{degree, rm_dimension, rm_distance, BoolFn, MAX_RM_DIMENSION};
use crate::cube::{enumerate_faces, Face};
use crate::rational::{binomial, int};
use crate::{Error, Result};

/// Brute-force distances are skipped above this many word operations.
pub const MAX_DISTANCE_WORK: u64 = 1 << 28;

/// The `trial`-th face of a run: a uniform `j`-subset of free coordinates,
/// then a uniform base on the remaining ones. Each trial owns a ChaCha
/// stream, so the outcome does not depend on scheduling.
pub fn sample_face(n: usize, j: usize, seed: u64, trial: u64) -> Result<Face> {
    if j > n {
        return Err(Error::invalid(format!("face dimension {j} exceeds n = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let free = index::sample(&mut rng, n, j).iter().fold(0u32, |m, i| m | 1 << i);
    let base = rng.random::<u32>() & ((1u32 << n) - 1) & !free;
    Face::from_masks(n, free, base)
}

fn passes(e: &BoolFn, face: &Face, r: usize) -> Result<bool> {
    Ok(degree(&e.restrict(face)?) <= r as i32)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FaceTestOutcome {
    pub passes: u64,
    pub trials: u64,
}

/// Samples `trials` random `j`-faces and counts those on which `e` has
/// degree at most `r`.
pub fn face_test(e: &BoolFn, j: usize, r: usize, trials: u64, seed: u64) -> Result<FaceTestOutcome> {
    let n = e.n();
    if j > n {
        return Err(Error::invalid(format!("face dimension {j} exceeds n = {n}")));
    }
    let passes = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<u64> { Ok(u64::from(passes(e, &sample_face(n, j, seed, t)?, r)?)) })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(FaceTestOutcome { passes, trials })
}

/// Fraction of all `j`-faces on which `e` has degree at most `r`.
pub fn exhaustive_pass_probability(e: &BoolFn, j: usize, r: usize) -> Result<BigRational> {
    let faces = enumerate_faces(e.n(), j)?;
    let good = faces.par_iter().map(|f| passes(e, f, r).map(u64::from)).try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(BigRational::new(good.into(), faces.len().into()))
}

fn check_monomial(monomial: &[usize], n: usize) -> Result<()> {
    if monomial.is_empty() {
        return Err(Error::invalid("monomial needs at least one coordinate"));
    }
    let mut sorted = monomial.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != monomial.len() {
        return Err(Error::invalid("monomial repeats a coordinate"));
    }
    if let Some(&c) = monomial.iter().find(|&&c| c == 0 || c > n) {
        return Err(Error::invalid(format!("monomial coordinate {c} outside 1..={n}")));
    }
    Ok(())
}

/// Pass probability of the monomial on the listed coordinates (1-based)
/// under a uniform random `j`-face.
///
/// If `f` of the `d` monomial coordinates are free, the restriction is a
/// degree-`f` monomial when the other `d - f` are fixed to 1 and zero
/// otherwise. For `d = r + 1` this is `1 - C(n-d, j-d) / C(n, j)`.
pub fn exact_pass_probability(monomial: &[usize], n: usize, j: usize, r: usize) -> Result<BigRational> {
    check_monomial(monomial, n)?;
    if j > n {
        return Err(Error::invalid(format!("face dimension {j} exceeds n = {n}")));
    }
    let (n, j, d) = (n as i64, j as i64, monomial.len() as i64);
    let total = binomial(n, j);
    let mut fail = BigRational::zero();
    for f in (r as i64 + 1)..=d {
        let ways = binomial(d, f) * binomial(n - d, j - f);
        let fixed_ones = BigRational::new(BigInt::one(), BigInt::one() << (d - f) as usize);
        fail += BigRational::new(ways, total.clone()) * fixed_ones;
    }
    Ok(BigRational::one() - fail)
}

/// Whether `passes` lies within three standard deviations of `trials · p`,
/// decided exactly: `(passes - T p)^2 ≤ 9 T p (1 - p)`.
pub fn within_three_sigma(passes: u64, trials: u64, p: &BigRational) -> bool {
    let t = int(trials);
    let diff = int(passes) - &t * p;
    &diff * &diff <= int(9) * &t * p * (BigRational::one() - p)
}

#[derive(Clone, Debug)]
pub struct TestabilityTrial {
    pub n: usize,
    pub j: usize,
    pub r: usize,
    pub subject: BoolFn,
    pub trials: u64,
    pub seed: u64,
    pub passes: u64,
    pub exact_pass_probability: Option<BigRational>,
    pub distance: Option<u64>,
}

impl TestabilityTrial {
    /// Runs the face test on `subject` and fills in its distance from degree
    /// `≤ r` when brute force is affordable.
    pub fn run(subject: BoolFn, j: usize, r: usize, trials: u64, seed: u64) -> Result<Self> {
        let outcome = face_test(&subject, j, r, trials, seed)?;
        let distance = if brute_force_affordable(subject.n(), r) { Some(rm_distance(&subject, r)?) } else { None };
        Ok(TestabilityTrial {
            n: subject.n(),
            j,
            r,
            subject,
            trials,
            seed,
            passes: outcome.passes,
            exact_pass_probability: None,
            distance,
        })
    }
}

fn brute_force_affordable(n: usize, r: usize) -> bool {
    let k = rm_dimension(n, r);
    let words = ((1u64 << n) / 64).max(1);
    k <= MAX_RM_DIMENSION && (1u64 << k).saturating_mul(words) <= MAX_DISTANCE_WORK
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NontestabilityRow {
    pub n: usize,
    pub j: usize,
    pub r: usize,
    pub trials: u64,
    pub passes: u64,
    pub exact_p: BigRational,
    pub distance: u64,
    pub rel_distance: BigRational,
    /// False when the distance is the analytic `2^(n-r-1)` rather than a
    /// brute-force minimum.
    pub distance_brute_force: bool,
}

/// One row per `n` for the subject `v_1 ⋯ v_{r+1}`. With `trials = 0` no
/// sampling is done and `passes` is 0.
pub fn nontestability_report(r: usize, n_list: &[usize], j: usize, trials: u64, seed: u64) -> Result<Vec<NontestabilityRow>> {
    let monomial: Vec<usize> = (1..=r + 1).collect();
    n_list
        .iter()
        .map(|&n| {
            if n < r + 1 {
                return Err(Error::invalid(format!("n = {n} too small for a degree-{} monomial", r + 1)));
            }
            let subject = BoolFn::monomial(n, &monomial)?;
            let exact_p = exact_pass_probability(&monomial, n, j, r)?;
            let passes = if trials > 0 { face_test(&subject, j, r, trials, seed)?.passes } else { 0 };
            let brute = brute_force_affordable(n, r);
            let distance = if brute { rm_distance(&subject, r)? } else { 1u64 << (n - r - 1) };
            let rel_distance = BigRational::new(distance.into(), BigInt::one() << n);
            Ok(NontestabilityRow { n, j, r, trials, passes, exact_p, distance, rel_distance, distance_brute_force: brute })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn closed_forms() {
        assert_eq!(exact_pass_probability(&[1, 2], 10, 4, 1).unwrap(), rat(13, 15));
        assert_eq!(exact_pass_probability(&[1, 2, 3], 10, 4, 2).unwrap(), rat(29, 30));
        assert_eq!(exact_pass_probability(&[1, 2], 16, 4, 1).unwrap(), rat(1, 1) - rat(91, 1820));
        assert!(exact_pass_probability(&[1, 2, 3], 10, 2, 2).unwrap().is_one());
        assert!(exact_pass_probability(&[1, 1], 10, 4, 1).is_err());
        assert!(exact_pass_probability(&[0, 2], 10, 4, 1).is_err());
        assert!(exact_pass_probability(&[1, 11], 10, 4, 1).is_err());
        assert!(exact_pass_probability(&[], 10, 4, 1).is_err());
    }

    #[test]
    fn closed_form_matches_face_enumeration() {
        for n in 2..=7 {
            for d in 1..=n.min(4) {
                let mono: Vec<usize> = (1..=d).collect();
                let e = BoolFn::monomial(n, &mono).unwrap();
                for j in 0..=n {
                    for r in 0..=d {
                        assert_eq!(
                            exact_pass_probability(&mono, n, j, r).unwrap(),
                            exhaustive_pass_probability(&e, j, r).unwrap(),
                            "n={n} d={d} j={j} r={r}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn sampled_faces_are_valid_and_deterministic() {
        for t in 0..200 {
            let f = sample_face(10, 4, 7, t).unwrap();
            assert_eq!(f.dim(), 4);
            assert_eq!(f, sample_face(10, 4, 7, t).unwrap());
        }
        assert!(sample_face(3, 4, 0, 0).is_err());
    }

    #[test]
    fn low_degree_always_passes() {
        let e = BoolFn::monomial(8, &[2, 5]).unwrap();
        assert_eq!(face_test(&e, 4, 2, 500, 1).unwrap().passes, 500);
    }

    #[test]
    fn monte_carlo_agrees() {
        let e = BoolFn::monomial(10, &[1, 2]).unwrap();
        let out = face_test(&e, 4, 1, 10_000, 42).unwrap();
        assert!(within_three_sigma(out.passes, out.trials, &rat(13, 15)));
        assert_eq!(out, face_test(&e, 4, 1, 10_000, 42).unwrap());
    }

    #[test]
    fn report_rows() {
        let rows = nontestability_report(1, &[5, 8], 4, 0, 0).unwrap();
        assert_eq!(rows[0].rel_distance, rat(1, 4));
        assert!(rows.iter().all(|r| r.distance_brute_force));
        let rows = nontestability_report(2, &[5], 4, 0, 0).unwrap();
        assert_eq!(rows[0].rel_distance, rat(1, 8));
    }
}
