//! The cube `F_2^n`, its faces, its isometry group and the induced action on
//! configurations.
//!
//! Points are `n`-bit indices: coordinate `i` (1-based) is bit `i - 1`.
//! An isometry is a pair `(π, t)` acting by `g(x) = π(x) + t`, where
//! `π(x)_i = x_{π⁻¹(i)}`, i.e. the bit at coordinate `j` moves to `π(j)`.
//! Composition is `(π_g ∘ π_h, π_g(t_h) + t_g)`, so that
//! `compose(g, h)(x) = g(h(x))`.
//!
//! Configurations transform contravariantly: `(g · c)(x) = c(g(x))`. With that
//! convention `act(compose(g, h), c) = act(h, act(g, c))`.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet, VecDeque};

use crate::{Error, Result};

pub const MAX_DIM: usize = 24;
/// Largest `n` for which [`enumerate_group`] materialises the group.
pub const MAX_ENUM_DIM: usize = 8;
/// Largest configuration space [`config_orbits`] will enumerate.
pub const MAX_CONFIG_SPACE: u64 = 1 << 22;

fn check_dim(n: usize) -> Result<()> {
    if n > MAX_DIM {
        return Err(Error::limit(format!("dimension {n} exceeds {MAX_DIM}")));
    }
    Ok(())
}

#[inline]
fn mask(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

/// A vertex of `F_2^n`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct CubePoint {
    n: u8,
    index: u32,
}

impl CubePoint {
    pub fn new(n: usize, index: u32) -> Result<Self> {
        check_dim(n)?;
        if u64::from(index) >= 1u64 << n {
            return Err(Error::invalid(format!("point index {index} out of range for n = {n}")));
        }
        Ok(CubePoint { n: n as u8, index })
    }

    pub fn origin(n: usize) -> Result<Self> {
        Self::new(n, 0)
    }

    /// The unit vector `e_i`, `i` 1-based.
    pub fn basis(n: usize, i: usize) -> Result<Self> {
        if i == 0 || i > n {
            return Err(Error::invalid(format!("coordinate {i} out of range 1..={n}")));
        }
        Self::new(n, 1 << (i - 1))
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    /// Coordinate `x_i`, `i` 1-based.
    pub fn coord(&self, i: usize) -> bool {
        (self.index >> (i - 1)) & 1 == 1
    }

    pub fn weight(&self) -> u32 {
        self.index.count_ones()
    }

    pub fn hamming(&self, other: &CubePoint) -> u32 {
        (self.index ^ other.index).count_ones()
    }
}

/// An element `(π, t)` of `Isom(F_2^n)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Isometry {
    n: u8,
    // perm[j] = π(j), 0-based; entries past n hold the identity so derived
    // equality compares only the meaningful part.
    perm: [u8; MAX_DIM],
    trans: u32,
}

impl Isometry {
    /// Builds `(π, t)` from a one-line permutation of `1..=n`.
    pub fn new(perm: &[usize], trans: CubePoint) -> Result<Self> {
        let n = trans.n();
        Error::check_dim(n, perm.len())?;
        let mut seen = [false; MAX_DIM];
        let mut out = Self::identity(n)?;
        for (j, &p) in perm.iter().enumerate() {
            if p == 0 || p > n || seen[p - 1] {
                return Err(Error::invalid(format!("{perm:?} is not a permutation of 1..={n}")));
            }
            seen[p - 1] = true;
            out.perm[j] = (p - 1) as u8;
        }
        out.trans = trans.index();
        Ok(out)
    }

    pub fn identity(n: usize) -> Result<Self> {
        check_dim(n)?;
        let mut perm = [0u8; MAX_DIM];
        for (j, p) in perm.iter_mut().enumerate() {
            *p = j as u8;
        }
        Ok(Isometry { n: n as u8, perm, trans: 0 })
    }

    pub fn translation(t: CubePoint) -> Self {
        let mut g = Self::identity(t.n()).expect("point dimension already validated");
        g.trans = t.index();
        g
    }

    /// The bit-flip `σ_i`, `i` 1-based.
    pub fn bit_flip(n: usize, i: usize) -> Result<Self> {
        Ok(Self::translation(CubePoint::basis(n, i)?))
    }

    /// The coordinate transposition `(i j)`, 1-based.
    pub fn transposition(n: usize, i: usize, j: usize) -> Result<Self> {
        if i == 0 || j == 0 || i > n || j > n {
            return Err(Error::invalid(format!("transposition ({i} {j}) out of range 1..={n}")));
        }
        let mut g = Self::identity(n)?;
        g.perm.swap(i - 1, j - 1);
        Ok(g)
    }

    pub(crate) fn from_parts(n: usize, perm0: &[u8], trans: u32) -> Self {
        let mut g = Self::identity(n).expect("dimension validated by caller");
        g.perm[..n].copy_from_slice(perm0);
        g.trans = trans;
        g
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    /// One-line form of `π` over `1..=n`.
    pub fn perm(&self) -> Vec<usize> {
        self.perm[..self.n()].iter().map(|&p| p as usize + 1).collect()
    }

    pub fn trans(&self) -> CubePoint {
        CubePoint { n: self.n, index: self.trans }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n()).expect("valid dimension")
    }

    #[inline]
    pub fn permute_index(&self, x: u32) -> u32 {
        let mut out = 0u32;
        let mut rest = x;
        while rest != 0 {
            let j = rest.trailing_zeros() as usize;
            out |= 1 << self.perm[j];
            rest &= rest - 1;
        }
        out
    }

    /// `g(x)` on a raw index; the caller guarantees `x < 2^n`.
    #[inline]
    pub fn apply_index(&self, x: u32) -> u32 {
        self.permute_index(x) ^ self.trans
    }

    pub fn apply(&self, x: CubePoint) -> Result<CubePoint> {
        Error::check_dim(self.n(), x.n())?;
        Ok(CubePoint { n: self.n, index: self.apply_index(x.index) })
    }

    /// `self ∘ h`.
    pub fn compose(&self, h: &Isometry) -> Result<Isometry> {
        Error::check_dim(self.n(), h.n())?;
        let mut out = *self;
        for j in 0..self.n() {
            out.perm[j] = self.perm[h.perm[j] as usize];
        }
        out.trans = self.permute_index(h.trans) ^ self.trans;
        Ok(out)
    }

    pub fn inverse(&self) -> Isometry {
        let mut out = *self;
        for j in 0..self.n() {
            out.perm[self.perm[j] as usize] = j as u8;
        }
        out.trans = out.permute_index(self.trans);
        out
    }

    /// `[g(0), g(1), ..., g(2^n - 1)]`.
    pub fn action_table(&self) -> Vec<u32> {
        (0..1u32 << self.n).map(|x| self.apply_index(x)).collect()
    }

    /// Number of cycles of `g` on the `2^n` points.
    pub fn point_cycles(&self) -> usize {
        let size = 1usize << self.n;
        let mut seen = vec![false; size];
        let mut cycles = 0;
        for start in 0..size {
            if seen[start] {
                continue;
            }
            cycles += 1;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                x = self.apply_index(x as u32) as usize;
            }
        }
        cycles
    }
}

/// `g(x)`.
pub fn apply_isometry(g: &Isometry, x: CubePoint) -> Result<CubePoint> {
    g.apply(x)
}

/// `g ∘ h`.
pub fn compose(g: &Isometry, h: &Isometry) -> Result<Isometry> {
    g.compose(h)
}

/// Generating set: adjacent transpositions `(i i+1)` and all bit-flips `σ_i`.
///
/// The transpositions generate every coordinate permutation and the flips
/// generate every translation; since each `(π, t)` factors as translation
/// after permutation, together they generate `Isom(F_2^n)`.
pub fn generators(n: usize) -> Result<Vec<Isometry>> {
    check_dim(n)?;
    let mut out = Vec::with_capacity(2 * n);
    for i in 1..n {
        out.push(Isometry::transposition(n, i, i + 1)?);
    }
    for i in 1..=n {
        out.push(Isometry::bit_flip(n, i)?);
    }
    Ok(out)
}

/// `|Isom(F_2^n)| = 2^n · n!`.
pub fn group_order(n: usize) -> u128 {
    (1..=n as u128).product::<u128>() << n
}

/// Advances `perm` to the next permutation in lexicographic order.
pub(crate) fn next_permutation(perm: &mut [u8]) -> bool {
    if perm.len() < 2 {
        return false;
    }
    let mut i = perm.len() - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = perm.len() - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// All `2^n · n!` isometries, permutations in lexicographic order and
/// translations ascending within each permutation.
///
/// Elements are deduplicated by their action on the affine frame
/// `0, e_1, ..., e_n`, which determines the whole action table of an
/// affine map of `F_2^n`.
pub fn enumerate_group(n: usize) -> Result<Vec<Isometry>> {
    if n > MAX_ENUM_DIM {
        return Err(Error::limit(format!(
            "full enumeration of Isom(F_2^{n}) refused (n > {MAX_ENUM_DIM}); use generators()"
        )));
    }
    let mut perm: Vec<u8> = (0..n as u8).collect();
    let mut out = Vec::with_capacity(group_order(n) as usize);
    let mut seen = HashSet::with_capacity(group_order(n) as usize);
    loop {
        for t in 0..1u32 << n {
            let g = Isometry::from_parts(n, &perm, t);
            let frame: Vec<u32> = std::iter::once(0)
                .chain((0..n).map(|i| 1u32 << i))
                .map(|x| g.apply_index(x))
                .collect();
            if seen.insert(frame) {
                out.push(g);
            }
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(out)
}

/// A face (subcube) `{b + Σ_{i∈S} x_i e_i}` of `F_2^n`.
///
/// Faces are keyed by `(free mask, base)` with the free bits of `base`
/// cleared. The canonical chart identifies a face with `F_2^r` by listing the
/// free coordinates in increasing order: chart point `y` maps to the face
/// point whose `j`-th free coordinate is bit `j` of `y`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Face {
    n: u8,
    free: u32,
    base: u32,
}

impl Face {
    /// `free` lists 1-based coordinates; `base` must vanish on them.
    pub fn new(free: &[usize], base: CubePoint) -> Result<Self> {
        let n = base.n();
        let mut free_mask = 0u32;
        for &i in free {
            if i == 0 || i > n {
                return Err(Error::invalid(format!("free coordinate {i} out of range 1..={n}")));
            }
            free_mask |= 1 << (i - 1);
        }
        Self::from_masks(n, free_mask, base.index())
    }

    pub fn from_masks(n: usize, free: u32, base: u32) -> Result<Self> {
        check_dim(n)?;
        if free & !mask(n) != 0 || base & !mask(n) != 0 {
            return Err(Error::invalid(format!("face masks exceed dimension {n}")));
        }
        if free & base != 0 {
            return Err(Error::invalid("face base must vanish on the free coordinates"));
        }
        Ok(Face { n: n as u8, free, base })
    }

    pub fn whole(n: usize) -> Result<Self> {
        Self::from_masks(n, mask(n), 0)
    }

    pub fn vertex(x: CubePoint) -> Self {
        Face { n: x.n, free: 0, base: x.index }
    }

    /// The subcube spanned by coordinates `1..=dim` through the origin.
    pub fn leading(n: usize, dim: usize) -> Result<Self> {
        if dim > n {
            return Err(Error::invalid(format!("face dimension {dim} exceeds n = {n}")));
        }
        Self::from_masks(n, mask(dim), 0)
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn dim(&self) -> usize {
        self.free.count_ones() as usize
    }

    pub fn free_mask(&self) -> u32 {
        self.free
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    /// Free coordinates, 1-based and increasing.
    pub fn free_coords(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.free >> i & 1 == 1).map(|i| i + 1).collect()
    }

    /// Face point for chart coordinate `y ∈ [0, 2^r)`.
    pub fn chart(&self, y: u32) -> u32 {
        let mut out = self.base;
        let mut free = self.free;
        let mut bit = 0;
        while free != 0 {
            let i = free.trailing_zeros();
            if y >> bit & 1 == 1 {
                out |= 1 << i;
            }
            bit += 1;
            free &= free - 1;
        }
        out
    }

    /// Point indices in chart order.
    pub fn points(&self) -> impl Iterator<Item = u32> + '_ {
        (0..1u32 << self.dim()).map(move |y| self.chart(y))
    }

    pub fn contains(&self, x: u32) -> bool {
        x & !self.free == self.base
    }

    /// The image face `{g(x) : x ∈ F}`.
    pub fn image(&self, g: &Isometry) -> Result<Face> {
        Error::check_dim(self.n(), g.n())?;
        let free = g.permute_index(self.free);
        let base = g.apply_index(self.base) & !free;
        Face::from_masks(self.n(), free, base)
    }
}

/// All `C(n, r) · 2^(n-r)` faces of dimension `r`, ordered by free mask then
/// base.
pub fn enumerate_faces(n: usize, r: usize) -> Result<Vec<Face>> {
    check_dim(n)?;
    if r > n {
        return Err(Error::invalid(format!("face dimension {r} exceeds n = {n}")));
    }
    let mut out = Vec::new();
    for free in 0..=mask(n) {
        if free.count_ones() as usize != r {
            continue;
        }
        let rest = mask(n) & !free;
        // submasks of `rest` in increasing order
        let mut base = 0u32;
        loop {
            out.push(Face { n: n as u8, free, base });
            if base == rest {
                break;
            }
            base = (base.wrapping_sub(rest)) & rest;
        }
    }
    Ok(out)
}

/// A colouring `c : F_2^n → {0, ..., k-1}`.
///
/// Ordering compares `(n, k)` first and then the value tables as base-`k`
/// numbers `Σ c(x) k^x`, so the most significant point is the last one.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Config {
    n: u8,
    k: u32,
    values: Box<[u16]>,
}

pub const MAX_ALPHABET: u32 = 1 << 16;

impl Config {
    pub fn new(n: usize, k: u32, values: Vec<u16>) -> Result<Self> {
        check_dim(n)?;
        if k == 0 || k > MAX_ALPHABET {
            return Err(Error::invalid(format!("alphabet size {k} outside 1..={MAX_ALPHABET}")));
        }
        Error::check_dim(1 << n, values.len())?;
        if let Some(v) = values.iter().find(|&&v| u32::from(v) >= k) {
            return Err(Error::invalid(format!("symbol {v} outside alphabet of size {k}")));
        }
        Ok(Config { n: n as u8, k, values: values.into_boxed_slice() })
    }

    pub fn constant(n: usize, k: u32, symbol: u16) -> Result<Self> {
        Self::new(n, k, vec![symbol; 1 << n])
    }

    /// Inverse of [`Config::index`].
    pub fn from_index(n: usize, k: u32, mut index: u64) -> Result<Self> {
        let mut values = Vec::with_capacity(1 << n);
        for _ in 0..1usize << n {
            values.push((index % u64::from(k)) as u16);
            index /= u64::from(k);
        }
        if index != 0 {
            return Err(Error::invalid("configuration index out of range"));
        }
        Self::new(n, k, values)
    }

    pub(crate) fn from_raw(n: usize, k: u32, values: Vec<u16>) -> Self {
        debug_assert_eq!(values.len(), 1 << n);
        Config { n: n as u8, k, values: values.into_boxed_slice() }
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn values(&self) -> &[u16] {
        &self.values
    }

    pub fn value(&self, x: u32) -> u16 {
        self.values[x as usize]
    }

    /// `Σ c(x) k^x`, if it fits in 64 bits.
    pub fn index(&self) -> Option<u64> {
        let k = u64::from(self.k);
        self.values
            .iter()
            .rev()
            .try_fold(0u64, |acc, &v| acc.checked_mul(k)?.checked_add(u64::from(v)))
    }

    pub fn is_constant(&self) -> bool {
        self.values.windows(2).all(|w| w[0] == w[1])
    }

    /// `(g · c)(x) = c(g(x))`.
    pub fn act(&self, g: &Isometry) -> Result<Config> {
        Error::check_dim(self.n(), g.n())?;
        Ok(self.act_unchecked(g))
    }

    pub(crate) fn act_unchecked(&self, g: &Isometry) -> Config {
        let values = (0..self.values.len() as u32)
            .map(|x| self.values[g.apply_index(x) as usize])
            .collect();
        Config::from_raw(self.n(), self.k, values)
    }

    /// Restriction to a face, read through the face's canonical chart.
    pub fn restrict(&self, face: &Face) -> Result<Config> {
        Error::check_dim(self.n(), face.n())?;
        let values = face.points().map(|x| self.values[x as usize]).collect();
        Ok(Config::from_raw(face.dim(), self.k, values))
    }
}

impl Ord for Config {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then(self.k.cmp(&other.k))
            .then_with(|| self.values.iter().rev().cmp(other.values.iter().rev()))
    }
}

impl PartialOrd for Config {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `c ↦ g · c`.
pub fn act_on_config(g: &Isometry, c: &Config) -> Result<Config> {
    c.act(g)
}

/// The orbit of `seed`, by breadth-first search over [`generators`]. Fails
/// once the orbit grows beyond `limit`.
pub fn orbit_of(seed: &Config, limit: usize) -> Result<BTreeSet<Config>> {
    let gens = generators(seed.n())?;
    let mut orbit = BTreeSet::new();
    let mut queue = VecDeque::new();
    orbit.insert(seed.clone());
    queue.push_back(seed.clone());
    while let Some(c) = queue.pop_front() {
        for g in &gens {
            let image = c.act_unchecked(g);
            if !orbit.contains(&image) {
                if orbit.len() >= limit {
                    return Err(Error::limit(format!("orbit larger than {limit}")));
                }
                orbit.insert(image.clone());
                queue.push_back(image);
            }
        }
    }
    Ok(orbit)
}

/// Partition of all `k^(2^n)` configurations into `Isom(F_2^n)`-orbits.
#[derive(Clone, Debug)]
pub struct OrbitTable {
    n: usize,
    k: u32,
    orbit_of: Vec<u32>,
    representatives: Vec<u64>,
    sizes: Vec<u64>,
}

impl OrbitTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn orbit_count(&self) -> usize {
        self.representatives.len()
    }

    /// Orbit id of the configuration with the given index.
    pub fn orbit_id(&self, config_index: u64) -> usize {
        self.orbit_of[config_index as usize] as usize
    }

    /// Minimal configuration index in each orbit, ascending.
    pub fn representatives(&self) -> &[u64] {
        &self.representatives
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn members(&self, orbit: usize) -> impl Iterator<Item = u64> + '_ {
        self.orbit_of
            .iter()
            .enumerate()
            .filter(move |(_, &o)| o as usize == orbit)
            .map(|(i, _)| i as u64)
    }
}

pub fn config_space_size(n: usize, k: u32) -> Option<u64> {
    u64::from(k).checked_pow(1u32.checked_shl(n as u32)?)
}

/// Enumerates every configuration and groups them into orbits. Orbit ids
/// follow ascending representatives, and representatives are minimal indices.
pub fn config_orbits(n: usize, k: u32) -> Result<OrbitTable> {
    let space = config_space_size(n, k)
        .filter(|&s| s <= MAX_CONFIG_SPACE)
        .ok_or_else(|| {
            Error::limit(format!("configuration space k^(2^n) for n={n}, k={k} is too large"))
        })?;
    let group = enumerate_group(n)?;
    let tables: Vec<Vec<u32>> = group.iter().map(Isometry::action_table).collect();
    let points = 1usize << n;
    let kk = u64::from(k);

    let mut orbit_of = vec![u32::MAX; space as usize];
    let mut representatives = Vec::new();
    let mut sizes = Vec::new();
    let mut digits = vec![0u64; points];
    for c in 0..space {
        if orbit_of[c as usize] != u32::MAX {
            continue;
        }
        let id = representatives.len() as u32;
        let mut rest = c;
        for d in digits.iter_mut() {
            *d = rest % kk;
            rest /= kk;
        }
        let mut size = 0;
        for table in &tables {
            // image(x) = c(g(x))
            let image = (0..points).rev().fold(0u64, |acc, x| acc * kk + digits[table[x] as usize]);
            if orbit_of[image as usize] == u32::MAX {
                orbit_of[image as usize] = id;
                size += 1;
            }
        }
        representatives.push(c);
        sizes.push(size);
    }
    Ok(OrbitTable { n, k, orbit_of, representatives, sizes })
}

/// `(Σ_g |Fix(g)|, |G|)` for the action on `k`-colourings; the orbit count is
/// the quotient.
pub fn burnside_sum(n: usize, k: u32) -> Result<(u128, u128)> {
    let group = enumerate_group(n)?;
    let mut total = 0u128;
    for g in &group {
        let cycles = g.point_cycles() as u32;
        total += u128::from(k)
            .checked_pow(cycles)
            .ok_or_else(|| Error::limit("Burnside sum overflows"))?;
    }
    Ok((total, group.len() as u128))
}
