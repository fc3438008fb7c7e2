//! Functions `f : F_q^d → F_q` for small primes `q`, their polynomial degree,
//! and zero-sum tests over affine versus coordinate-aligned copies of the
//! discrete `r`-cube.
//!
//! Points and function tables are indexed in base `q` with `x_1` least
//! significant. A function is itself indexed in base `q` by its table, which
//! fixes the scan order of exhaustive searches.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::{Error, Result};

pub const MAX_FIELD_POINTS: usize = 20_000;
/// Bound on the number of `(base, direction tuple)` candidates enumerated
/// when listing affine cube copies.
pub const MAX_AFFINE_CANDIDATES: u64 = 20_000_000;
/// Bound on `q^(q^d)` for exhaustive function scans.
pub const MAX_EXHAUSTIVE_FUNCTIONS: u64 = 1 << 22;
/// Bound on `q^d` for the kernel computation in [`field_search`].
pub const MAX_KERNEL_POINTS: usize = 1024;

fn check_q(q: u8) -> Result<()> {
    match q {
        2 | 3 | 5 => Ok(()),
        _ if !(2..q).all(|p| !q.is_multiple_of(p)) || q < 2 => {
            Err(Error::invalid(format!("field order {q} is not prime")))
        }
        _ => Err(Error::invalid(format!("field order {q} unsupported (use 2, 3 or 5)"))),
    }
}

fn points_of(q: u8, d: usize) -> Result<usize> {
    (q as usize)
        .checked_pow(d as u32)
        .filter(|&p| p <= MAX_FIELD_POINTS)
        .ok_or_else(|| Error::limit(format!("F_{q}^{d} has more than {MAX_FIELD_POINTS} points")))
}

fn inv_mod(a: u8, q: u8) -> u8 {
    (1..q).find(|&b| (u32::from(a) * u32::from(b)) % u32::from(q) == 1).expect("nonzero element of a prime field")
}

/// A function `F_q^d → F_q` given by its value table.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct FieldFn {
    q: u8,
    d: u8,
    table: Vec<u8>,
}

impl FieldFn {
    pub fn new(q: u8, d: usize, table: Vec<u8>) -> Result<Self> {
        check_q(q)?;
        let points = points_of(q, d)?;
        Error::check_dim(points, table.len())?;
        if table.iter().any(|&v| v >= q) {
            return Err(Error::invalid(format!("table value outside F_{q}")));
        }
        Ok(FieldFn { q, d: d as u8, table })
    }

    pub fn zero(q: u8, d: usize) -> Result<Self> {
        check_q(q)?;
        Self::new(q, d, vec![0; points_of(q, d)?])
    }

    /// Function number `index` in the base-`q` enumeration of tables.
    pub fn from_index(q: u8, d: usize, mut index: u64) -> Result<Self> {
        check_q(q)?;
        let points = points_of(q, d)?;
        let mut table = Vec::with_capacity(points);
        for _ in 0..points {
            table.push((index % u64::from(q)) as u8);
            index /= u64::from(q);
        }
        if index != 0 {
            return Err(Error::invalid("function index out of range"));
        }
        Ok(FieldFn { q, d: d as u8, table })
    }

    /// Tabulates `f` over all points; `f` sees coordinates `x_1..x_d`.
    pub fn from_fn(q: u8, d: usize, mut f: impl FnMut(&[u8]) -> u64) -> Result<Self> {
        check_q(q)?;
        let points = points_of(q, d)?;
        let mut coords = vec![0u8; d];
        let table = (0..points)
            .map(|i| {
                decode_point(q, i, &mut coords);
                (f(&coords) % u64::from(q)) as u8
            })
            .collect();
        Ok(FieldFn { q, d: d as u8, table })
    }

    pub fn q(&self) -> u8 {
        self.q
    }

    pub fn d(&self) -> usize {
        self.d as usize
    }

    pub fn table(&self) -> &[u8] {
        &self.table
    }

    pub fn value(&self, point: usize) -> u8 {
        self.table[point]
    }

    /// Table as a digit string, highest point first (base-`q` index order).
    pub fn to_digits(&self) -> String {
        self.table.iter().rev().map(|&v| char::from(b'0' + v)).collect()
    }

    /// Coefficients `c_e` of the reduced polynomial
    /// `f(x) = Σ_e c_e Π x_i^{e_i}` with every `e_i < q`, indexed like points
    /// (exponent `e_i` is digit `i`).
    pub fn coefficients(&self) -> Vec<u8> {
        let q = self.q as usize;
        let vinv = inverse_vandermonde(self.q);
        let mut c = self.table.clone();
        let mut buf = vec![0u8; q];
        let mut stride = 1usize;
        for _ in 0..self.d {
            for start in 0..c.len() {
                if !(start / stride).is_multiple_of(q) {
                    continue;
                }
                for (j, slot) in buf.iter_mut().enumerate() {
                    let mut acc = 0u32;
                    for x in 0..q {
                        acc += u32::from(vinv[j][x]) * u32::from(c[start + x * stride]);
                    }
                    *slot = (acc % q as u32) as u8;
                }
                for (j, &v) in buf.iter().enumerate() {
                    c[start + j * stride] = v;
                }
            }
            stride *= q;
        }
        c
    }
}

fn decode_point(q: u8, mut index: usize, coords: &mut [u8]) {
    for c in coords.iter_mut() {
        *c = (index % q as usize) as u8;
        index /= q as usize;
    }
}

fn digit_sum(q: u8, mut index: usize) -> usize {
    let mut s = 0;
    while index > 0 {
        s += index % q as usize;
        index /= q as usize;
    }
    s
}

/// Inverse of `V[x][j] = x^j` over `F_q`, by Gauss–Jordan elimination.
fn inverse_vandermonde(q: u8) -> Vec<Vec<u8>> {
    let n = q as usize;
    let qq = u32::from(q);
    let mut a: Vec<Vec<u8>> = (0..n)
        .map(|x| (0..n).map(|j| (x as u32).pow(j as u32).rem_euclid(qq) as u8).collect())
        .collect();
    let mut inv: Vec<Vec<u8>> = (0..n).map(|i| (0..n).map(|j| u8::from(i == j)).collect()).collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| a[r][col] != 0).expect("Vandermonde on distinct nodes is invertible");
        a.swap(col, piv);
        inv.swap(col, piv);
        let s = inv_mod(a[col][col], q);
        for j in 0..n {
            a[col][j] = (u32::from(a[col][j]) * u32::from(s) % qq) as u8;
            inv[col][j] = (u32::from(inv[col][j]) * u32::from(s) % qq) as u8;
        }
        for r in 0..n {
            if r != col && a[r][col] != 0 {
                let f = u32::from(a[r][col]);
                for j in 0..n {
                    a[r][j] = ((u32::from(a[r][j]) + qq * qq - f * u32::from(a[col][j])) % qq) as u8;
                    inv[r][j] = ((u32::from(inv[r][j]) + qq * qq - f * u32::from(inv[col][j])) % qq) as u8;
                }
            }
        }
    }
    inv
}

/// Total degree of the reduced polynomial representing `f`; `-1` for zero.
pub fn field_degree(f: &FieldFn) -> i32 {
    f.coefficients()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(e, _)| digit_sum(f.q, e) as i32)
        .max()
        .unwrap_or(-1)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CubeMode {
    /// `{a + Σ_j x_j b_j : x ∈ {0,1}^r}` with `b_1..b_r` linearly independent.
    Affine,
    /// `r` distinct coordinates, each ranging over an unordered pair of
    /// distinct values, all other coordinates fixed.
    Isometric,
}

/// All distinct copies of the `r`-cube of one kind, each as a sorted list of
/// point indices.
#[derive(Clone, Debug)]
pub struct CubeCopies {
    q: u8,
    d: usize,
    r: usize,
    mode: CubeMode,
    cubes: Vec<Vec<u32>>,
}

impl CubeCopies {
    pub fn new(q: u8, d: usize, r: usize, mode: CubeMode) -> Result<Self> {
        check_q(q)?;
        if r == 0 || r > d {
            return Err(Error::invalid(format!("cube dimension r = {r} outside 1..={d}")));
        }
        let points = points_of(q, d)?;
        let cubes = match mode {
            CubeMode::Affine => affine_cubes(q, d, r, points)?,
            CubeMode::Isometric => isometric_cubes(q, d, r, points),
        };
        Ok(CubeCopies { q, d, r, mode, cubes })
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn mode(&self) -> CubeMode {
        self.mode
    }

    pub fn cubes(&self) -> &[Vec<u32>] {
        &self.cubes
    }

    pub fn passes(&self, f: &FieldFn) -> Result<bool> {
        if f.q != self.q || f.d() != self.d {
            return Err(Error::invalid(format!(
                "function on F_{}^{} tested against cubes in F_{}^{}",
                f.q, f.d, self.q, self.d
            )));
        }
        Ok(self.passes_table(&f.table))
    }

    fn passes_table(&self, table: &[u8]) -> bool {
        let q = u32::from(self.q);
        self.cubes.iter().all(|c| c.iter().map(|&p| u32::from(table[p as usize])).sum::<u32>() % q == 0)
    }

    pub fn r(&self) -> usize {
        self.r
    }
}

fn add_points(q: u8, a: usize, b: usize) -> usize {
    let (mut a, mut b) = (a, b);
    let qq = q as usize;
    let mut out = 0;
    let mut place = 1;
    while a > 0 || b > 0 {
        out += ((a % qq + b % qq) % qq) * place;
        a /= qq;
        b /= qq;
        place *= qq;
    }
    out
}

/// Rank over `F_q` of the given vectors (as point indices).
fn rank(q: u8, d: usize, vectors: &[usize]) -> usize {
    let qq = u32::from(q);
    let mut rows: Vec<Vec<u8>> = vectors
        .iter()
        .map(|&v| {
            let mut c = vec![0u8; d];
            decode_point(q, v, &mut c);
            c
        })
        .collect();
    let mut rank = 0;
    for col in 0..d {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else { continue };
        rows.swap(rank, p);
        let s = inv_mod(rows[rank][col], q);
        for r in 0..rows.len() {
            if r != rank && rows[r][col] != 0 {
                let f = u32::from(rows[r][col]) * u32::from(s) % qq;
                for j in 0..d {
                    rows[r][j] = ((u32::from(rows[r][j]) + qq * qq - f * u32::from(rows[rank][j])) % qq) as u8;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn affine_cubes(q: u8, d: usize, r: usize, points: usize) -> Result<Vec<Vec<u32>>> {
    let candidates = (points as u64).checked_pow(r as u32 + 1);
    if candidates.is_none_or(|c| c > MAX_AFFINE_CANDIDATES) {
        return Err(Error::limit(format!("too many affine {r}-cube candidates in F_{q}^{d}")));
    }
    // Direction tuples up to reordering; the point set does not depend on the
    // order of the b_j.
    let mut directions: Vec<Vec<usize>> = Vec::new();
    let mut tuple = Vec::with_capacity(r);
    fn extend(
        q: u8,
        d: usize,
        r: usize,
        points: usize,
        start: usize,
        tuple: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if tuple.len() == r {
            out.push(tuple.clone());
            return;
        }
        for b in start..points {
            tuple.push(b);
            if rank(q, d, tuple) == tuple.len() {
                extend(q, d, r, points, b + 1, tuple, out);
            }
            tuple.pop();
        }
    }
    extend(q, d, r, points, 1, &mut tuple, &mut directions);

    let mut seen = HashSet::new();
    let mut cubes = Vec::new();
    for b in &directions {
        for a in 0..points {
            let mut cube: Vec<u32> = (0..1usize << r)
                .map(|x| {
                    (0..r).filter(|&j| x >> j & 1 == 1).fold(a, |p, j| add_points(q, p, b[j])) as u32
                })
                .collect();
            cube.sort_unstable();
            if seen.insert(cube.clone()) {
                cubes.push(cube);
            }
        }
    }
    cubes.sort();
    Ok(cubes)
}

fn isometric_cubes(q: u8, d: usize, r: usize, points: usize) -> Vec<Vec<u32>> {
    let qq = q as usize;
    let pairs: Vec<(usize, usize)> =
        (0..qq).flat_map(|a| (a + 1..qq).map(move |b| (a, b))).collect();
    let mut cubes = Vec::new();
    let mut coords = vec![0u8; d];
    for free in 0u32..1 << d {
        if free.count_ones() as usize != r {
            continue;
        }
        let free_axes: Vec<usize> = (0..d).filter(|&i| free >> i & 1 == 1).collect();
        // base ranges over points whose free coordinates are zero
        for base in 0..points {
            decode_point(q, base, &mut coords);
            if free_axes.iter().any(|&i| coords[i] != 0) {
                continue;
            }
            let mut choice = vec![0usize; r];
            loop {
                let mut cube: Vec<u32> = (0..1usize << r)
                    .map(|x| {
                        let mut p = base;
                        for (j, &axis) in free_axes.iter().enumerate() {
                            let (lo, hi) = pairs[choice[j]];
                            let v = if x >> j & 1 == 1 { hi } else { lo };
                            p += v * qq.pow(axis as u32);
                        }
                        p as u32
                    })
                    .collect();
                cube.sort_unstable();
                cubes.push(cube);
                // odometer over pair choices
                let mut j = 0;
                while j < r {
                    choice[j] += 1;
                    if choice[j] < pairs.len() {
                        break;
                    }
                    choice[j] = 0;
                    j += 1;
                }
                if j == r {
                    break;
                }
            }
        }
    }
    cubes.sort();
    cubes
}

/// Whether every `r`-cube copy of the given kind sums to zero in `F_q`.
pub fn field_face_sum_test(f: &FieldFn, r: usize, mode: CubeMode) -> Result<bool> {
    CubeCopies::new(f.q, f.d(), r, mode)?.passes(f)
}

/// Basis of `{v : M v = 0}` over `F_q` for rows given as point lists (each
/// row is the indicator of a cube).
fn kernel_basis(q: u8, points: usize, cubes: &CubeCopies) -> Vec<Vec<u8>> {
    let qq = u32::from(q);
    let mut pivots: Vec<(usize, Vec<u8>)> = Vec::new();
    for cube in cubes.cubes() {
        let mut row = vec![0u8; points];
        for &p in cube {
            row[p as usize] = (row[p as usize] + 1) % q;
        }
        for (col, prow) in &pivots {
            let f = u32::from(row[*col]);
            if f != 0 {
                for j in 0..points {
                    row[j] = ((u32::from(row[j]) + qq * qq - f * u32::from(prow[j])) % qq) as u8;
                }
            }
        }
        let Some(col) = row.iter().position(|&v| v != 0) else { continue };
        let s = inv_mod(row[col], q);
        for v in row.iter_mut() {
            *v = (u32::from(*v) * u32::from(s) % qq) as u8;
        }
        for (_, prow) in pivots.iter_mut() {
            let f = u32::from(prow[col]);
            if f != 0 {
                for j in 0..points {
                    prow[j] = ((u32::from(prow[j]) + qq * qq - f * u32::from(row[j])) % qq) as u8;
                }
            }
        }
        pivots.push((col, row));
    }
    let pivot_cols: HashSet<usize> = pivots.iter().map(|(c, _)| *c).collect();
    (0..points)
        .filter(|c| !pivot_cols.contains(c))
        .map(|free| {
            let mut v = vec![0u8; points];
            v[free] = 1;
            for (col, prow) in &pivots {
                v[*col] = ((qq - u32::from(prow[free])) % qq) as u8;
            }
            v
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum SearchMode {
    /// Every function `F_q^d → F_q`.
    Exhaustive,
    /// Uniform samples from the space of functions passing the isometric test.
    Sampled { samples: u64, seed: u64 },
}

/// Outcome of comparing affine and isometric zero-sum conditions on `F_q^d`.
#[derive(Clone, Debug, Serialize)]
pub struct FieldSearchReport {
    pub q: u8,
    pub d: usize,
    pub r: usize,
    pub mode: SearchMode,
    pub affine_copies: usize,
    pub isometric_copies: usize,
    /// Dimension of the solution space of the affine zero-sum equations.
    pub affine_kernel_dim: usize,
    pub isometric_kernel_dim: usize,
    /// Dimension of the space of reduced polynomials of degree at most `r`.
    pub low_degree_dim: usize,
    pub affine_implies_low_degree: bool,
    pub isometric_implies_low_degree: bool,
    pub functions_scanned: u64,
    pub affine_pass: u64,
    pub isometric_pass: u64,
    pub affine_high_degree: u64,
    pub isometric_high_degree: u64,
    /// Smallest function (scan order) passing the isometric test with degree
    /// above `r`; from the kernel basis in sampled mode.
    pub witness: Option<String>,
    pub witness_degree: Option<i32>,
    /// Exhaustive pass counts equal `q^kernel_dim` for both kinds.
    pub routes_agree: bool,
}

/// Scans functions on `F_q^d` for the implication "zero sums over every
/// `r`-cube copy ⇒ degree at most `r`", for affine and isometric copies.
pub fn field_search(q: u8, d: usize, r: usize, mode: SearchMode) -> Result<FieldSearchReport> {
    check_q(q)?;
    let points = points_of(q, d)?;
    if points > MAX_KERNEL_POINTS {
        return Err(Error::limit(format!("F_{q}^{d} too large for the kernel computation")));
    }
    let affine = CubeCopies::new(q, d, r, CubeMode::Affine)?;
    let iso = CubeCopies::new(q, d, r, CubeMode::Isometric)?;
    let affine_kernel = kernel_basis(q, points, &affine);
    let iso_kernel = kernel_basis(q, points, &iso);
    let low_degree_dim = (0..points).filter(|&e| digit_sum(q, e) <= r).count();

    let degree_of = |table: &[u8]| field_degree(&FieldFn { q, d: d as u8, table: table.to_vec() });
    let affine_implies_low_degree = affine_kernel.iter().all(|v| degree_of(v) <= r as i32);
    let kernel_witness = iso_kernel.iter().find(|v| degree_of(v) > r as i32).cloned();
    let isometric_implies_low_degree = kernel_witness.is_none();

    let mut report = FieldSearchReport {
        q,
        d,
        r,
        mode,
        affine_copies: affine.len(),
        isometric_copies: iso.len(),
        affine_kernel_dim: affine_kernel.len(),
        isometric_kernel_dim: iso_kernel.len(),
        low_degree_dim,
        affine_implies_low_degree,
        isometric_implies_low_degree,
        functions_scanned: 0,
        affine_pass: 0,
        isometric_pass: 0,
        affine_high_degree: 0,
        isometric_high_degree: 0,
        witness: None,
        witness_degree: None,
        routes_agree: true,
    };

    let record = |report: &mut FieldSearchReport, f: FieldFn| {
        report.functions_scanned += 1;
        let a = affine.passes_table(&f.table);
        let i = iso.passes_table(&f.table);
        if !a && !i {
            return;
        }
        let high = field_degree(&f) > r as i32;
        if a {
            report.affine_pass += 1;
            report.affine_high_degree += u64::from(high);
        }
        if i {
            report.isometric_pass += 1;
            if high {
                report.isometric_high_degree += 1;
                if report.witness.is_none() {
                    report.witness_degree = Some(field_degree(&f));
                    report.witness = Some(f.to_digits());
                }
            }
        }
    };

    match mode {
        SearchMode::Exhaustive => {
            let total = u64::from(q)
                .checked_pow(points as u32)
                .filter(|&t| t <= MAX_EXHAUSTIVE_FUNCTIONS)
                .ok_or_else(|| Error::limit(format!("{q}^{points} functions is too many to scan")))?;
            for index in 0..total {
                record(&mut report, FieldFn::from_index(q, d, index)?);
            }
            let expect = |dim: usize| u64::from(q).pow(dim as u32);
            report.routes_agree = report.affine_pass == expect(affine_kernel.len())
                && report.isometric_pass == expect(iso_kernel.len())
                && (report.isometric_high_degree == 0) == isometric_implies_low_degree
                && (report.affine_high_degree == 0) == affine_implies_low_degree;
        }
        SearchMode::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..samples {
                let mut table = vec![0u8; points];
                for basis in &iso_kernel {
                    let c = rng.random_range(0..q);
                    if c != 0 {
                        for (t, &b) in table.iter_mut().zip(basis) {
                            *t = ((u32::from(*t) + u32::from(c) * u32::from(b)) % u32::from(q)) as u8;
                        }
                    }
                }
                record(&mut report, FieldFn { q, d: d as u8, table });
            }
            report.routes_agree = report.isometric_pass == report.functions_scanned
                && (report.affine_high_degree == 0 || !affine_implies_low_degree);
            if report.witness.is_none() {
                if let Some(w) = kernel_witness {
                    let f = FieldFn { q, d: d as u8, table: w };
                    report.witness_degree = Some(field_degree(&f));
                    report.witness = Some(f.to_digits());
                }
            }
        }
    }
    Ok(report)
}
