//! Boolean functions on `F_2^n`: algebraic normal form, degree, face sums,
//! `Ω_r` membership and exact Reed–Muller distance.
//!
//! Truth tables are bit-packed into `u64` words, bit `x` holding `g(x)`.
//! ANF coefficients use the same packing: bit `a` holds `u_α` for
//! `α = {i : bit i-1 of a is set}`.
//!
//! `Ω_r` is the set of functions whose sum over every `r`-face vanishes. Over
//! `F_2` this is exactly the set of functions of degree at most `r - 1`: the
//! sum over a face with free set `S` collects the coefficients `u_α` with
//! `α ⊇ S`, so every `r`-face sum vanishes iff no monomial of size `≥ r`
//! survives.

mod field;

pub use field::{
    field_degree, field_face_sum_test, field_search, CubeCopies, CubeMode, FieldFn,
    FieldSearchReport, SearchMode,
};

use std::fmt;

use rand::Rng;

use crate::cube::{enumerate_faces, Config, Face, Isometry, MAX_DIM};
use crate::rational::binomial_u64;
use crate::{Error, Result};

/// Largest Reed–Muller code dimension [`rm_distance`] enumerates.
pub const MAX_RM_DIMENSION: usize = 20;

const STAGE_MASKS: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0f0f_0f0f_0f0f_0f0f,
    0x00ff_00ff_00ff_00ff,
    0x0000_ffff_0000_ffff,
    0x0000_0000_ffff_ffff,
];

#[derive(Clone, PartialEq, Eq, Hash)]
struct BitTable {
    n: u8,
    words: Vec<u64>,
}

impl BitTable {
    fn zero(n: usize) -> Result<Self> {
        if n > MAX_DIM {
            return Err(Error::limit(format!("dimension {n} exceeds {MAX_DIM}")));
        }
        let words = (1usize << n).div_ceil(64);
        Ok(BitTable { n: n as u8, words: vec![0; words] })
    }

    fn len(&self) -> usize {
        1 << self.n
    }

    #[inline]
    fn get(&self, i: usize) -> bool {
        self.words[i >> 6] >> (i & 63) & 1 == 1
    }

    #[inline]
    fn set(&mut self, i: usize, b: bool) {
        let bit = 1u64 << (i & 63);
        if b {
            self.words[i >> 6] |= bit;
        } else {
            self.words[i >> 6] &= !bit;
        }
    }

    fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * 64 + b)
            })
        })
    }

    /// Subset-sum (zeta/Möbius) transform over `F_2`: `out[a] = ⊕_{b ⊆ a} in[b]`.
    fn mobius_in_place(&mut self) {
        let n = self.n as usize;
        for (i, &m) in STAGE_MASKS.iter().enumerate().take(n.min(6)) {
            let shift = 1 << i;
            for w in &mut self.words {
                *w ^= (*w & m) << shift;
            }
        }
        for i in 6..n {
            let step = 1 << (i - 6);
            for block in (0..self.words.len()).step_by(2 * step) {
                for j in block..block + step {
                    self.words[j + step] ^= self.words[j];
                }
            }
        }
    }

    fn to_hex(&self) -> String {
        let digits = (self.len() / 4).max(1);
        let mut s = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let nibble = (self.words[(4 * d) >> 6] >> ((4 * d) & 63)) & 0xf;
            s.push(char::from_digit(nibble as u32, 16).expect("nibble"));
        }
        s
    }

    fn from_hex(n: usize, hex: &str) -> Result<Self> {
        let mut t = Self::zero(n)?;
        let digits = (t.len() / 4).max(1);
        if hex.len() != digits {
            return Err(Error::invalid(format!(
                "truth table for n = {n} needs {digits} hex digits, got {}",
                hex.len()
            )));
        }
        for (pos, ch) in hex.chars().enumerate() {
            let nibble = match ch {
                '0'..='9' | 'a'..='f' => ch.to_digit(16).expect("hex digit") as u64,
                _ => return Err(Error::invalid(format!("invalid hex digit {ch:?}"))),
            };
            let d = digits - 1 - pos;
            t.words[(4 * d) >> 6] |= nibble << ((4 * d) & 63);
        }
        if t.len() < 4 && t.words[0] >> t.len() != 0 {
            return Err(Error::invalid(format!("hex {hex:?} sets bits beyond 2^{n} points")));
        }
        Ok(t)
    }
}

/// A Boolean function `g : F_2^n → F_2` stored as its truth table.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BoolFn(BitTable);

/// ANF coefficients `(u_α)` of a Boolean function.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AnfCoeffs(BitTable);

macro_rules! table_api {
    ($ty:ident) => {
        impl $ty {
            pub fn zero(n: usize) -> Result<Self> {
                Ok($ty(BitTable::zero(n)?))
            }

            pub fn from_fn(n: usize, mut f: impl FnMut(u32) -> bool) -> Result<Self> {
                let mut t = BitTable::zero(n)?;
                for i in 0..t.len() {
                    t.set(i, f(i as u32));
                }
                Ok($ty(t))
            }

            /// Table given by the low `2^n` bits of `bits` (`n <= 6`).
            pub fn from_u64(n: usize, bits: u64) -> Result<Self> {
                if n > 6 {
                    return Err(Error::invalid("from_u64 needs n <= 6"));
                }
                let mut t = BitTable::zero(n)?;
                t.words[0] = if n == 6 { bits } else { bits & ((1u64 << (1 << n)) - 1) };
                Ok($ty(t))
            }

            pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
                let mut t = BitTable::zero(n)?;
                for w in &mut t.words {
                    *w = rng.random();
                }
                if t.len() < 64 {
                    t.words[0] &= (1u64 << t.len()) - 1;
                }
                Ok($ty(t))
            }

            /// Lowercase hex, most significant point first; point 0 is the
            /// least significant bit of the last digit.
            pub fn from_hex(n: usize, hex: &str) -> Result<Self> {
                Ok($ty(BitTable::from_hex(n, hex)?))
            }

            pub fn to_hex(&self) -> String {
                self.0.to_hex()
            }

            pub fn n(&self) -> usize {
                self.0.n as usize
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                false
            }

            pub fn get(&self, i: u32) -> bool {
                self.0.get(i as usize)
            }

            pub fn set(&mut self, i: u32, b: bool) {
                self.0.set(i as usize, b)
            }

            pub fn count_ones(&self) -> u64 {
                self.0.count_ones()
            }

            pub fn is_zero(&self) -> bool {
                self.0.words.iter().all(|&w| w == 0)
            }

            pub fn words(&self) -> &[u64] {
                &self.0.words
            }
        }

        impl fmt::Debug for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}(n={}, {})", stringify!($ty), self.n(), self.to_hex())
            }
        }
    };
}

table_api!(BoolFn);
table_api!(AnfCoeffs);

impl AnfCoeffs {
    /// Coefficient vector with the given monomials set; each monomial is a
    /// list of 1-based coordinates.
    pub fn from_monomials(n: usize, monomials: &[&[usize]]) -> Result<Self> {
        let mut t = BitTable::zero(n)?;
        for mono in monomials {
            let mut a = 0usize;
            for &i in *mono {
                if i == 0 || i > n {
                    return Err(Error::invalid(format!("coordinate {i} out of range 1..={n}")));
                }
                a |= 1 << (i - 1);
            }
            let cur = t.get(a);
            t.set(a, !cur);
        }
        Ok(AnfCoeffs(t))
    }

    /// Masks `a` of the monomials with `u_α = 1`, ascending.
    pub fn support(&self) -> Vec<u32> {
        self.0.ones().map(|a| a as u32).collect()
    }
}

impl BoolFn {
    pub fn monomial(n: usize, coords: &[usize]) -> Result<Self> {
        Ok(mobius_forward(&AnfCoeffs::from_monomials(n, &[coords])?))
    }

    pub fn from_config(c: &Config) -> Result<Self> {
        if c.k() != 2 {
            return Err(Error::AlphabetMismatch { expected: 2, found: c.k() });
        }
        Self::from_fn(c.n(), |x| c.value(x) == 1)
    }

    pub fn to_config(&self) -> Config {
        let values = (0..self.len() as u32).map(|x| u16::from(self.get(x))).collect();
        Config::from_raw(self.n(), 2, values)
    }

    /// `x ↦ g(h(x))` for an isometry `h`, matching the configuration action.
    pub fn act(&self, h: &Isometry) -> Result<BoolFn> {
        Error::check_dim(self.n(), h.n())?;
        BoolFn::from_fn(self.n(), |x| self.get(h.apply_index(x)))
    }

    /// Restriction to a face, as a function on `F_2^r` through the canonical
    /// chart.
    pub fn restrict(&self, face: &Face) -> Result<BoolFn> {
        Error::check_dim(self.n(), face.n())?;
        BoolFn::from_fn(face.dim(), |y| self.get(face.chart(y)))
    }

    pub fn xor(&self, other: &BoolFn) -> Result<BoolFn> {
        Error::check_dim(self.n(), other.n())?;
        let mut out = self.clone();
        for (a, b) in out.0.words.iter_mut().zip(&other.0.words) {
            *a ^= b;
        }
        Ok(out)
    }

    pub fn hamming(&self, other: &BoolFn) -> Result<u64> {
        Error::check_dim(self.n(), other.n())?;
        Ok(self.0.words.iter().zip(&other.0.words).map(|(a, b)| u64::from((a ^ b).count_ones())).sum())
    }
}

/// `g(v) = ⊕_{α ⊆ supp(v)} u_α`.
pub fn mobius_forward(u: &AnfCoeffs) -> BoolFn {
    let mut t = u.0.clone();
    t.mobius_in_place();
    BoolFn(t)
}

/// `u_α = ⊕_{β ⊆ α} g(1_β)`; over `F_2` the same transform as
/// [`mobius_forward`].
pub fn mobius_inverse(g: &BoolFn) -> AnfCoeffs {
    let mut t = g.0.clone();
    t.mobius_in_place();
    AnfCoeffs(t)
}

/// Algebraic degree; `-1` for the zero function.
pub fn degree(g: &BoolFn) -> i32 {
    anf_degree(&mobius_inverse(g))
}

pub fn anf_degree(u: &AnfCoeffs) -> i32 {
    u.0.ones().map(|a| a.count_ones() as i32).max().unwrap_or(-1)
}

/// Parity of `g` over the points of `face`.
pub fn face_sum(g: &BoolFn, face: &Face) -> Result<bool> {
    Error::check_dim(g.n(), face.n())?;
    Ok(face.points().fold(false, |acc, x| acc ^ g.get(x)))
}

/// Whether every `r`-face sum of `g` vanishes, checked face by face.
pub fn omega_member(g: &BoolFn, r: usize) -> Result<bool> {
    if r == 0 || r > g.n() {
        return Err(Error::invalid(format!("face dimension r = {r} outside 1..={}", g.n())));
    }
    for face in enumerate_faces(g.n(), r)? {
        if face_sum(g, &face)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Number of monomials of degree at most `r` in `n` variables.
pub fn rm_dimension(n: usize, r: usize) -> usize {
    (0..=r.min(n)).map(|i| binomial_u64(n, i) as usize).sum()
}

/// Hamming distance from `g` to the nearest function of degree at most `r`,
/// by Gray-code enumeration of all `2^K` Reed–Muller codewords.
pub fn rm_distance(g: &BoolFn, r: usize) -> Result<u64> {
    let n = g.n();
    let dim = rm_dimension(n, r);
    if dim > MAX_RM_DIMENSION {
        return Err(Error::limit(format!(
            "RM({r},{n}) has dimension {dim} > {MAX_RM_DIMENSION}; exhaustive search refused"
        )));
    }
    let basis: Vec<BoolFn> = (0..1u32 << n)
        .filter(|a| a.count_ones() as usize <= r)
        .map(|a| {
            let mut u = AnfCoeffs::zero(n)?;
            u.set(a, true);
            Ok(mobius_forward(&u))
        })
        .collect::<Result<_>>()?;
    debug_assert_eq!(basis.len(), dim);

    let mut diff = g.0.words.clone();
    let mut best = g.count_ones();
    for step in 1u64..1 << dim {
        let b = &basis[step.trailing_zeros() as usize];
        let mut dist = 0u64;
        for (w, bw) in diff.iter_mut().zip(&b.0.words) {
            *w ^= bw;
            dist += u64::from(w.count_ones());
        }
        best = best.min(dist);
        if best == 0 {
            break;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::{enumerate_group, CubePoint};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Direct `O(3^n)` subset sum, independent of the butterfly.
    fn naive_forward(u: &AnfCoeffs) -> BoolFn {
        BoolFn::from_fn(u.n(), |v| {
            let mut acc = false;
            let mut a = v;
            loop {
                acc ^= u.get(a);
                if a == 0 {
                    break;
                }
                a = (a - 1) & v;
            }
            acc
        })
        .unwrap()
    }

    #[test]
    fn forward_examples() {
        let one = mobius_forward(&AnfCoeffs::from_monomials(3, &[&[]]).unwrap());
        assert_eq!(one.count_ones(), 8);
        let x1 = mobius_forward(&AnfCoeffs::from_monomials(3, &[&[1]]).unwrap());
        assert!((0..8).all(|v| x1.get(v) == (v & 1 == 1)));
        let and = mobius_forward(&AnfCoeffs::from_monomials(2, &[&[1, 2]]).unwrap());
        assert_eq!((0..4).map(|v| and.get(v)).collect::<Vec<_>>(), vec![false, false, false, true]);
    }

    #[test]
    fn inverse_examples() {
        assert!(mobius_inverse(&BoolFn::zero(4).unwrap()).is_zero());
        let xor = BoolFn::from_fn(2, |v| (v & 1 == 1) ^ (v & 2 == 2)).unwrap();
        assert_eq!(mobius_inverse(&xor).support(), vec![1, 2]);
    }

    #[test]
    fn butterfly_matches_naive_transform() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 0..=9 {
            for _ in 0..20 {
                let u = AnfCoeffs::random(n, &mut rng).unwrap();
                assert_eq!(mobius_forward(&u), naive_forward(&u), "n = {n}");
            }
        }
    }

    #[test]
    fn degree_examples() {
        let one = BoolFn::from_fn(3, |_| true).unwrap();
        assert_eq!(degree(&one), 0);
        assert_eq!(degree(&BoolFn::monomial(4, &[1, 2, 3]).unwrap()), 3);
        assert_eq!(degree(&BoolFn::zero(5).unwrap()), -1);
    }

    #[test]
    fn face_sum_examples() {
        let one = BoolFn::from_fn(2, |_| true).unwrap();
        let edge = Face::new(&[1], CubePoint::origin(2).unwrap()).unwrap();
        assert!(!face_sum(&one, &edge).unwrap());
        let x1 = BoolFn::monomial(2, &[1]).unwrap();
        assert!(face_sum(&x1, &edge).unwrap());
        let x1x2 = BoolFn::monomial(2, &[1, 2]).unwrap();
        assert!(face_sum(&x1x2, &Face::whole(2).unwrap()).unwrap());
        assert!(face_sum(&x1x2, &Face::whole(3).unwrap()).is_err());
    }

    #[test]
    fn omega_examples() {
        let c = BoolFn::from_fn(3, |_| true).unwrap();
        for r in 1..=3 {
            assert!(omega_member(&c, r).unwrap());
        }
        let x1x2 = BoolFn::monomial(2, &[1, 2]).unwrap();
        assert!(!omega_member(&x1x2, 2).unwrap());
        assert!(omega_member(&x1x2, 0).is_err());
        assert!(omega_member(&x1x2, 3).is_err());
    }

    #[test]
    fn omega_monotone_and_degree_threshold_n3() {
        for bits in 0..256u64 {
            let g = BoolFn::from_u64(3, bits).unwrap();
            let d = degree(&g);
            for r in 1..=3 {
                let m = omega_member(&g, r).unwrap();
                assert_eq!(m, d < r as i32);
                if m && r < 3 {
                    assert!(omega_member(&g, r + 1).unwrap());
                }
            }
        }
    }

    #[test]
    fn degree_is_isometry_invariant() {
        let group = enumerate_group(3).unwrap();
        for bits in 0..256u64 {
            let g = BoolFn::from_u64(3, bits).unwrap();
            for h in &group {
                assert_eq!(degree(&g.act(h).unwrap()), degree(&g));
            }
        }
    }

    #[test]
    fn rm_distance_examples() {
        let m3 = BoolFn::monomial(3, &[1, 2, 3]).unwrap();
        assert_eq!(rm_distance(&m3, 2).unwrap(), 1);
        let m5 = BoolFn::monomial(5, &[1, 2, 3]).unwrap();
        assert_eq!(rm_distance(&m5, 2).unwrap(), 4);
        let lin = BoolFn::from_fn(5, |v| v.count_ones() % 2 == 1).unwrap();
        assert_eq!(rm_distance(&lin, 1).unwrap(), 0);
        assert!(matches!(rm_distance(&BoolFn::zero(10).unwrap(), 3), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn rm_distance_matches_exhaustive_search_n3() {
        // Oracle: scan all 256 functions, keep those with degree <= r.
        let all: Vec<BoolFn> = (0..256).map(|b| BoolFn::from_u64(3, b).unwrap()).collect();
        for r in 0..=3 {
            let code: Vec<&BoolFn> = all.iter().filter(|h| degree(h) <= r as i32).collect();
            assert_eq!(code.len(), 1 << rm_dimension(3, r));
            for g in &all {
                let brute = code.iter().map(|h| g.hamming(h).unwrap()).min().unwrap();
                assert_eq!(rm_distance(g, r).unwrap(), brute);
            }
        }
    }

    #[test]
    fn hex_round_trip() {
        let g = BoolFn::monomial(3, &[1, 2]).unwrap();
        assert_eq!(g.to_hex(), "88");
        assert_eq!(BoolFn::from_hex(3, "88").unwrap(), g);
        assert_eq!(BoolFn::monomial(1, &[1]).unwrap().to_hex(), "2");
        assert!(BoolFn::from_hex(1, "4").is_err());
        assert!(BoolFn::from_hex(3, "8").is_err());
        assert!(BoolFn::from_hex(3, "8G").is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let big = BoolFn::random(8, &mut rng).unwrap();
        assert_eq!(BoolFn::from_hex(8, &big.to_hex()).unwrap(), big);
    }

    #[test]
    fn restriction_examples() {
        let g = BoolFn::monomial(4, &[1, 3]).unwrap();
        // free {1,3}, base e_2: restriction is y1*y2
        let f = Face::from_masks(4, 0b0101, 0b0010).unwrap();
        assert_eq!(g.restrict(&f).unwrap(), BoolFn::monomial(2, &[1, 2]).unwrap());
        // free {1}, base 0 (x3 = 0): restriction vanishes
        let f = Face::from_masks(4, 0b0001, 0).unwrap();
        assert!(g.restrict(&f).unwrap().is_zero());
    }
}
