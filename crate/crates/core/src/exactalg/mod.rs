//! Exact linear algebra over the rationals and prime fields.
//!
//! Every equality tested anywhere in the crate bottoms out here, so there is
//! no floating point: rationals are exact (machine words promoted to big
//! integers on overflow) and prime-field entries live in `[0, p)`.

mod rat;

pub use rat::Rat;

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgError {
    #[error("linear system has no solution")]
    NoSolution,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("cannot parse {0}")]
    Parse(String),
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(FieldSpec, FieldSpec),
}

/// Coefficient field: `Q` or `F<p>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldSpec {
    Rationals,
    PrimeField(u64),
}

pub(crate) fn inv_mod(a: u64, p: u64) -> u64 {
    // Fermat; p is prime and a is a unit.
    pow_mod(a % p, p - 2, p)
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64 % p;
    while e > 0 {
        if e & 1 == 1 {
            r = ((r as u128 * b as u128) % p as u128) as u64;
        }
        b = ((b as u128 * b as u128) % p as u128) as u64;
        e >>= 1;
    }
    r
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl FieldSpec {
    pub fn prime(p: u64) -> Result<Self, AlgError> {
        if is_prime(p) {
            Ok(FieldSpec::PrimeField(p))
        } else {
            Err(AlgError::NotPrime(p))
        }
    }

    /// 0 for the rationals.
    pub fn characteristic(&self) -> u64 {
        match self {
            FieldSpec::Rationals => 0,
            FieldSpec::PrimeField(p) => *p,
        }
    }

    /// Whether `n` is invertible in the field.
    pub fn is_unit(&self, n: u64) -> bool {
        match self {
            FieldSpec::Rationals => n != 0,
            FieldSpec::PrimeField(p) => n % p != 0,
        }
    }

    pub fn int(&self, n: i64) -> Scalar {
        match self {
            FieldSpec::Rationals => Scalar::Q(Rat::from_int(n)),
            FieldSpec::PrimeField(p) => Scalar::F(n.rem_euclid(*p as i64) as u64),
        }
    }

    pub fn zero(&self) -> Scalar {
        self.int(0)
    }

    pub fn one(&self) -> Scalar {
        self.int(1)
    }

    pub fn add(&self, x: &Scalar, y: &Scalar) -> Scalar {
        match self {
            FieldSpec::Rationals => Scalar::Q(QA.elem(x).add(&QA.elem(y))),
            FieldSpec::PrimeField(p) => Scalar::F(PA(*p).add(&PA(*p).elem(x), &PA(*p).elem(y))),
        }
    }

    pub fn mul(&self, x: &Scalar, y: &Scalar) -> Scalar {
        match self {
            FieldSpec::Rationals => Scalar::Q(QA.elem(x).mul(&QA.elem(y))),
            FieldSpec::PrimeField(p) => Scalar::F(PA(*p).mul(&PA(*p).elem(x), &PA(*p).elem(y))),
        }
    }

    pub fn neg(&self, x: &Scalar) -> Scalar {
        neg_scalar(*self, x)
    }

    /// Multiplicative inverse.
    ///
    /// # Panics
    /// Panics on zero.
    pub fn inv(&self, x: &Scalar) -> Scalar {
        match self {
            FieldSpec::Rationals => Scalar::Q(QA.elem(x).inv()),
            FieldSpec::PrimeField(p) => Scalar::F(PA(*p).inv(&PA(*p).elem(x))),
        }
    }

    pub fn parse_scalar(&self, s: &str) -> Result<Scalar, AlgError> {
        let r = Rat::from_str(s).map_err(AlgError::Parse)?;
        match self {
            FieldSpec::Rationals => Ok(Scalar::Q(r)),
            FieldSpec::PrimeField(p) => r
                .mod_p(*p)
                .map(Scalar::F)
                .ok_or_else(|| AlgError::Parse(format!("{s} has no residue mod {p}"))),
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Rationals => write!(f, "Q"),
            FieldSpec::PrimeField(p) => write!(f, "F{p}"),
        }
    }
}

impl FromStr for FieldSpec {
    type Err = AlgError;

    fn from_str(s: &str) -> Result<Self, AlgError> {
        let t = s.trim();
        if t == "Q" {
            return Ok(FieldSpec::Rationals);
        }
        let p = t
            .strip_prefix('F')
            .and_then(|d| d.parse::<u64>().ok())
            .ok_or_else(|| AlgError::Parse(format!("field {s:?} (expected Q or F<p>)")))?;
        FieldSpec::prime(p)
    }
}

impl Serialize for FieldSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for FieldSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A single field element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scalar {
    Q(Rat),
    F(u64),
}

impl Scalar {
    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Q(r) => r.is_zero(),
            Scalar::F(v) => *v == 0,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Q(r) => write!(f, "{r}"),
            Scalar::F(v) => write!(f, "{v}"),
        }
    }
}

trait Arith: Copy {
    type E: Clone + PartialEq;
    fn zero(&self) -> Self::E;
    fn add(&self, x: &Self::E, y: &Self::E) -> Self::E;
    fn sub(&self, x: &Self::E, y: &Self::E) -> Self::E;
    fn mul(&self, x: &Self::E, y: &Self::E) -> Self::E;
    fn neg(&self, x: &Self::E) -> Self::E;
    fn inv(&self, x: &Self::E) -> Self::E;
    fn is_zero(&self, x: &Self::E) -> bool;
    fn wrap(&self, v: Vec<Self::E>) -> Data;
    fn scalar(&self, x: &Self::E) -> Scalar;
    fn elem(&self, s: &Scalar) -> Self::E;
}

#[derive(Clone, Copy)]
struct QA;

#[derive(Clone, Copy)]
struct PA(u64);

impl Arith for QA {
    type E = Rat;
    fn zero(&self) -> Rat {
        Rat::zero()
    }
    fn add(&self, x: &Rat, y: &Rat) -> Rat {
        x.add(y)
    }
    fn sub(&self, x: &Rat, y: &Rat) -> Rat {
        x.sub(y)
    }
    fn mul(&self, x: &Rat, y: &Rat) -> Rat {
        x.mul(y)
    }
    fn neg(&self, x: &Rat) -> Rat {
        x.neg()
    }
    fn inv(&self, x: &Rat) -> Rat {
        x.inv()
    }
    fn is_zero(&self, x: &Rat) -> bool {
        x.is_zero()
    }
    fn wrap(&self, v: Vec<Rat>) -> Data {
        Data::Q(v)
    }
    fn scalar(&self, x: &Rat) -> Scalar {
        Scalar::Q(x.clone())
    }
    fn elem(&self, s: &Scalar) -> Rat {
        match s {
            Scalar::Q(r) => r.clone(),
            Scalar::F(_) => panic!("prime-field scalar used in a rational matrix"),
        }
    }
}

impl Arith for PA {
    type E = u64;
    fn zero(&self) -> u64 {
        0
    }
    fn add(&self, x: &u64, y: &u64) -> u64 {
        let s = x + y;
        if s >= self.0 {
            s - self.0
        } else {
            s
        }
    }
    fn sub(&self, x: &u64, y: &u64) -> u64 {
        if x >= y {
            x - y
        } else {
            x + self.0 - y
        }
    }
    fn mul(&self, x: &u64, y: &u64) -> u64 {
        ((*x as u128 * *y as u128) % self.0 as u128) as u64
    }
    fn neg(&self, x: &u64) -> u64 {
        if *x == 0 {
            0
        } else {
            self.0 - x
        }
    }
    fn inv(&self, x: &u64) -> u64 {
        assert!(*x != 0, "division by zero");
        inv_mod(*x, self.0)
    }
    fn is_zero(&self, x: &u64) -> bool {
        *x == 0
    }
    fn wrap(&self, v: Vec<u64>) -> Data {
        Data::P(v)
    }
    fn scalar(&self, x: &u64) -> Scalar {
        Scalar::F(*x)
    }
    fn elem(&self, s: &Scalar) -> u64 {
        match s {
            Scalar::F(v) => v % self.0,
            Scalar::Q(r) => r.mod_p(self.0).expect("rational scalar not defined mod p"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Data {
    Q(Vec<Rat>),
    P(Vec<u64>),
}

/// Dense row-major matrix over a [`FieldSpec`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    field: FieldSpec,
    rows: usize,
    cols: usize,
    data: Data,
}

macro_rules! with_arith {
    ($m:expr, |$a:ident, $v:ident| $body:expr) => {
        match (&$m.data, $m.field) {
            (Data::Q($v), _) => {
                let $a = QA;
                $body
            }
            (Data::P($v), FieldSpec::PrimeField(p)) => {
                let $a = PA(p);
                $body
            }
            _ => unreachable!("matrix storage disagrees with its field"),
        }
    };
}

macro_rules! with_arith2 {
    ($m:expr, $n:expr, |$a:ident, $v:ident, $w:ident| $body:expr) => {
        match (&$m.data, &$n.data, $m.field) {
            (Data::Q($v), Data::Q($w), _) => {
                let $a = QA;
                $body
            }
            (Data::P($v), Data::P($w), FieldSpec::PrimeField(p)) => {
                let $a = PA(p);
                $body
            }
            _ => panic!("field mismatch: {} vs {}", $m.field, $n.field),
        }
    };
}

/// Row reduction on a row-major buffer. Pivots are searched only in the first
/// `limit` columns. With `full`, rows above each pivot are also cleared and
/// pivots normalised to one (reduced echelon form).
fn eliminate<A: Arith>(a: A, v: &mut [A::E], rows: usize, cols: usize, limit: usize, full: bool) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..limit {
        if r == rows {
            break;
        }
        let Some(i) = (r..rows).find(|&i| !a.is_zero(&v[i * cols + c])) else {
            continue;
        };
        if i != r {
            for j in 0..cols {
                v.swap(i * cols + j, r * cols + j);
            }
        }
        let inv = a.inv(&v[r * cols + c]);
        for j in c..cols {
            v[r * cols + j] = a.mul(&v[r * cols + j], &inv);
        }
        let start = if full { 0 } else { r + 1 };
        for i in start..rows {
            if i == r {
                continue;
            }
            let f = v[i * cols + c].clone();
            if a.is_zero(&f) {
                continue;
            }
            for j in c..cols {
                if a.is_zero(&v[r * cols + j]) {
                    continue;
                }
                let t = a.mul(&f, &v[r * cols + j]);
                v[i * cols + j] = a.sub(&v[i * cols + j], &t);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

fn matmul<A: Arith>(a: A, x: &[A::E], y: &[A::E], n: usize, k: usize, m: usize) -> Vec<A::E> {
    let mut out = vec![a.zero(); n * m];
    for i in 0..n {
        for l in 0..k {
            let xv = &x[i * k + l];
            if a.is_zero(xv) {
                continue;
            }
            for j in 0..m {
                let yv = &y[l * m + j];
                if a.is_zero(yv) {
                    continue;
                }
                let t = a.mul(xv, yv);
                out[i * m + j] = a.add(&out[i * m + j], &t);
            }
        }
    }
    out
}

impl Matrix {
    pub fn zeros(field: FieldSpec, rows: usize, cols: usize) -> Self {
        let data = match field {
            FieldSpec::Rationals => Data::Q(vec![Rat::zero(); rows * cols]),
            FieldSpec::PrimeField(_) => Data::P(vec![0; rows * cols]),
        };
        Matrix { field, rows, cols, data }
    }

    pub fn identity(field: FieldSpec, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, &field.one());
        }
        m
    }

    /// Builds a matrix from integer entries, reduced into the field.
    pub fn from_i64(field: FieldSpec, rows: usize, cols: usize, entries: &[i64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count");
        let mut m = Self::zeros(field, rows, cols);
        for (idx, e) in entries.iter().enumerate() {
            if *e != 0 {
                m.set(idx / cols, idx % cols, &field.int(*e));
            }
        }
        m
    }

    pub fn from_rows(field: FieldSpec, rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let flat: Vec<i64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::from_i64(field, rows.len(), cols, &flat)
    }

    pub fn from_fn(field: FieldSpec, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Scalar) -> Self {
        let mut m = Self::zeros(field, rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                let s = f(i, j);
                if !s.is_zero() {
                    m.set(i, j, &s);
                }
            }
        }
        m
    }

    /// A single column vector.
    pub fn column(field: FieldSpec, entries: &[Scalar]) -> Self {
        Self::from_fn(field, entries.len(), 1, |i, _| entries[i].clone())
    }

    /// Random matrix; rational entries are drawn from `-2..=2`.
    pub fn random<R: Rng>(field: FieldSpec, rows: usize, cols: usize, rng: &mut R) -> Self {
        Self::from_fn(field, rows, cols, |_, _| match field {
            FieldSpec::Rationals => field.int(rng.gen_range(-2..=2)),
            FieldSpec::PrimeField(p) => Scalar::F(rng.gen_range(0..p)),
        })
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> Scalar {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of {}x{}", self.rows, self.cols);
        with_arith!(self, |a, v| a.scalar(&v[i * self.cols + j]))
    }

    pub fn set(&mut self, i: usize, j: usize, s: &Scalar) {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of {}x{}", self.rows, self.cols);
        let idx = i * self.cols + j;
        match (&mut self.data, self.field) {
            (Data::Q(v), _) => v[idx] = QA.elem(s),
            (Data::P(v), FieldSpec::PrimeField(p)) => v[idx] = PA(p).elem(s),
            _ => unreachable!(),
        }
    }

    /// Adds `s` to entry `(i, j)`.
    pub fn add_to(&mut self, i: usize, j: usize, s: &Scalar) {
        let cur = self.get(i, j);
        let t = self.field.add(&cur, s);
        self.set(i, j, &t);
    }

    pub fn set_int(&mut self, i: usize, j: usize, n: i64) {
        let s = self.field.int(n);
        self.set(i, j, &s);
    }

    pub fn is_zero(&self) -> bool {
        with_arith!(self, |a, v| v.iter().all(|x| a.is_zero(x)))
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols && *self == Self::identity(self.field, self.rows)
    }

    fn map_entries(&self, f: impl Fn(&Scalar) -> Scalar) -> Self {
        Self::from_fn(self.field, self.rows, self.cols, |i, j| f(&self.get(i, j)))
    }

    pub fn add(&self, o: &Matrix) -> Matrix {
        assert_eq!(self.shape(), o.shape(), "add shape mismatch");
        let data = with_arith2!(self, o, |a, x, y| a.wrap(x.iter().zip(y).map(|(p, q)| a.add(p, q)).collect()));
        Matrix { field: self.field, rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, o: &Matrix) -> Matrix {
        assert_eq!(self.shape(), o.shape(), "sub shape mismatch");
        let data = with_arith2!(self, o, |a, x, y| a.wrap(x.iter().zip(y).map(|(p, q)| a.sub(p, q)).collect()));
        Matrix { field: self.field, rows: self.rows, cols: self.cols, data }
    }

    pub fn neg(&self) -> Matrix {
        let data = with_arith!(self, |a, x| a.wrap(x.iter().map(|p| a.neg(p)).collect()));
        Matrix { field: self.field, rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: &Scalar) -> Matrix {
        let data = with_arith!(self, |a, x| {
            let e = a.elem(s);
            a.wrap(x.iter().map(|p| a.mul(p, &e)).collect())
        });
        Matrix { field: self.field, rows: self.rows, cols: self.cols, data }
    }

    pub fn scale_int(&self, n: i64) -> Matrix {
        self.scale(&self.field.int(n))
    }

    pub fn mul(&self, o: &Matrix) -> Matrix {
        assert_eq!(self.cols, o.rows, "mul shape mismatch {}x{} * {}x{}", self.rows, self.cols, o.rows, o.cols);
        let data = with_arith2!(self, o, |a, x, y| a.wrap(matmul(a, x, y, self.rows, self.cols, o.cols)));
        Matrix { field: self.field, rows: self.rows, cols: o.cols, data }
    }

    pub fn transpose(&self) -> Matrix {
        let (r, c) = (self.rows, self.cols);
        let data = with_arith!(self, |a, x| {
            let mut out = vec![a.zero(); r * c];
            for i in 0..r {
                for j in 0..c {
                    out[j * r + i] = x[i * c + j].clone();
                }
            }
            a.wrap(out)
        });
        Matrix { field: self.field, rows: c, cols: r, data }
    }

    /// Copies `block` into `self` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Matrix) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols, "block out of range");
        let cols = self.cols;
        match (&mut self.data, &block.data) {
            (Data::Q(v), Data::Q(b)) => {
                for i in 0..block.rows {
                    v[(r0 + i) * cols + c0..(r0 + i) * cols + c0 + block.cols]
                        .clone_from_slice(&b[i * block.cols..(i + 1) * block.cols]);
                }
            }
            (Data::P(v), Data::P(b)) => {
                for i in 0..block.rows {
                    v[(r0 + i) * cols + c0..(r0 + i) * cols + c0 + block.cols]
                        .copy_from_slice(&b[i * block.cols..(i + 1) * block.cols]);
                }
            }
            _ => panic!("field mismatch in set_block"),
        }
    }

    /// Adds `block` into `self` at `(r0, c0)`.
    pub fn add_block(&mut self, r0: usize, c0: usize, block: &Matrix) {
        let cur = self.submatrix(r0, r0 + block.rows, c0, c0 + block.cols);
        self.set_block(r0, c0, &cur.add(block));
    }

    pub fn submatrix(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Matrix {
        assert!(r0 <= r1 && r1 <= self.rows && c0 <= c1 && c1 <= self.cols, "submatrix range");
        let rows: Vec<usize> = (r0..r1).collect();
        let cols: Vec<usize> = (c0..c1).collect();
        self.select(&rows, &cols)
    }

    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        let c = self.cols;
        let data = with_arith!(self, |a, x| {
            let mut out = Vec::with_capacity(rows.len() * cols.len());
            for &i in rows {
                for &j in cols {
                    out.push(x[i * c + j].clone());
                }
            }
            a.wrap(out)
        });
        Matrix { field: self.field, rows: rows.len(), cols: cols.len(), data }
    }

    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        let cols: Vec<usize> = (0..self.cols).collect();
        self.select(rows, &cols)
    }

    pub fn select_cols(&self, cols: &[usize]) -> Matrix {
        let rows: Vec<usize> = (0..self.rows).collect();
        self.select(&rows, cols)
    }

    pub fn col(&self, j: usize) -> Matrix {
        self.select_cols(&[j])
    }

    pub fn hstack(field: FieldSpec, rows: usize, parts: &[&Matrix]) -> Matrix {
        let cols = parts.iter().map(|m| m.cols).sum();
        let mut out = Matrix::zeros(field, rows, cols);
        let mut c = 0;
        for m in parts {
            assert_eq!(m.rows, rows, "hstack row mismatch");
            out.set_block(0, c, m);
            c += m.cols;
        }
        out
    }

    pub fn vstack(field: FieldSpec, cols: usize, parts: &[&Matrix]) -> Matrix {
        let rows = parts.iter().map(|m| m.rows).sum();
        let mut out = Matrix::zeros(field, rows, cols);
        let mut r = 0;
        for m in parts {
            assert_eq!(m.cols, cols, "vstack column mismatch");
            out.set_block(r, 0, m);
            r += m.rows;
        }
        out
    }

    pub fn block_diag(field: FieldSpec, parts: &[&Matrix]) -> Matrix {
        let rows = parts.iter().map(|m| m.rows).sum();
        let cols = parts.iter().map(|m| m.cols).sum();
        let mut out = Matrix::zeros(field, rows, cols);
        let (mut r, mut c) = (0, 0);
        for m in parts {
            out.set_block(r, c, m);
            r += m.rows;
            c += m.cols;
        }
        out
    }

    /// Kronecker product; the row index of `a ⊗ b` is `i * b.rows + k`.
    pub fn kron(&self, o: &Matrix) -> Matrix {
        let (r1, c1, r2, c2) = (self.rows, self.cols, o.rows, o.cols);
        let data = with_arith2!(self, o, |a, x, y| {
            let mut out = vec![a.zero(); r1 * r2 * c1 * c2];
            let cols = c1 * c2;
            for i in 0..r1 {
                for j in 0..c1 {
                    let xv = &x[i * c1 + j];
                    if a.is_zero(xv) {
                        continue;
                    }
                    for k in 0..r2 {
                        for l in 0..c2 {
                            out[(i * r2 + k) * cols + j * c2 + l] = a.mul(xv, &y[k * c2 + l]);
                        }
                    }
                }
            }
            a.wrap(out)
        });
        Matrix { field: self.field, rows: r1 * r2, cols: c1 * c2, data }
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let (r, c) = (m.rows, m.cols);
        let pivots = match (&mut m.data, m.field) {
            (Data::Q(v), _) => eliminate(QA, v, r, c, c, true),
            (Data::P(v), FieldSpec::PrimeField(p)) => eliminate(PA(p), v, r, c, c, true),
            _ => unreachable!(),
        };
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let (r, c) = (m.rows, m.cols);
        // eliminate along the shorter side
        if c > r {
            m = m.transpose();
            return match (&mut m.data, m.field) {
                (Data::Q(v), _) => eliminate(QA, v, c, r, r, false).len(),
                (Data::P(v), FieldSpec::PrimeField(p)) => eliminate(PA(p), v, c, r, r, false).len(),
                _ => unreachable!(),
            };
        }
        match (&mut m.data, m.field) {
            (Data::Q(v), _) => eliminate(QA, v, r, c, c, false).len(),
            (Data::P(v), FieldSpec::PrimeField(p)) => eliminate(PA(p), v, r, c, c, false).len(),
            _ => unreachable!(),
        }
    }

    /// Columns form a basis of the null space. Each basis vector has a one in
    /// its own free coordinate and zeros in the other free coordinates.
    pub fn kernel_basis(&self) -> Matrix {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut k = Matrix::zeros(self.field, self.cols, free.len());
        for (j, &f) in free.iter().enumerate() {
            k.set(f, j, &self.field.one());
            for (i, &p) in pivots.iter().enumerate() {
                let e = r.get(i, f);
                if !e.is_zero() {
                    k.set(p, j, &neg_scalar(self.field, &e));
                }
            }
        }
        k
    }

    /// Some `x` with `self * x = b`.
    pub fn solve(&self, b: &Matrix) -> Result<Matrix, AlgError> {
        if b.rows != self.rows {
            return Err(AlgError::DimensionMismatch(format!(
                "solve: {} rows vs right-hand side with {} rows",
                self.rows, b.rows
            )));
        }
        if b.field != self.field {
            return Err(AlgError::FieldMismatch(self.field, b.field));
        }
        let n = self.cols;
        let mut aug = Matrix::hstack(self.field, self.rows, &[self, b]);
        let (r, c) = (aug.rows, aug.cols);
        let pivots = match (&mut aug.data, aug.field) {
            (Data::Q(v), _) => eliminate(QA, v, r, c, n, true),
            (Data::P(v), FieldSpec::PrimeField(p)) => eliminate(PA(p), v, r, c, n, true),
            _ => unreachable!(),
        };
        // rows below the pivots must vanish on the right-hand side
        for i in pivots.len()..r {
            for j in n..c {
                if !aug.get(i, j).is_zero() {
                    return Err(AlgError::NoSolution);
                }
            }
        }
        let mut x = Matrix::zeros(self.field, n, b.cols);
        for (i, &p) in pivots.iter().enumerate() {
            for j in 0..b.cols {
                let e = aug.get(i, n + j);
                if !e.is_zero() {
                    x.set(p, j, &e);
                }
            }
        }
        Ok(x)
    }

    /// Some `x` with `x * self = b`.
    pub fn solve_left(&self, b: &Matrix) -> Result<Matrix, AlgError> {
        Ok(self.transpose().solve(&b.transpose())?.transpose())
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if self.rows != self.cols {
            return None;
        }
        if self.rank() != self.rows {
            return None;
        }
        self.solve(&Matrix::identity(self.field, self.rows)).ok()
    }

    /// Linearly independent columns spanning the column space.
    pub fn column_basis(&self) -> Matrix {
        let (_, pivots) = self.rref();
        self.select_cols(&pivots)
    }

    /// Whether every column of `v` lies in the column space.
    pub fn spans(&self, v: &Matrix) -> bool {
        self.solve(v).is_ok()
    }

    pub fn to_strings(&self) -> Vec<Vec<String>> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j).to_string()).collect()).collect()
    }

    pub fn from_strings(field: FieldSpec, rows: usize, cols: usize, entries: &[Vec<String>]) -> Result<Matrix, AlgError> {
        if entries.len() != rows || entries.iter().any(|r| r.len() != cols) {
            return Err(AlgError::DimensionMismatch(format!("expected a {rows}x{cols} matrix")));
        }
        let mut m = Matrix::zeros(field, rows, cols);
        for (i, row) in entries.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                m.set(i, j, &field.parse_scalar(e)?);
            }
        }
        Ok(m)
    }

    /// Entries as a flat vector in row-major order.
    pub fn flatten(&self) -> Vec<Scalar> {
        with_arith!(self, |a, v| v.iter().map(|x| a.scalar(x)).collect())
    }

    /// Reshape a column vector of length `rows * cols` (row-major).
    pub fn unflatten(v: &Matrix, rows: usize, cols: usize) -> Matrix {
        assert_eq!(v.rows * v.cols, rows * cols, "unflatten size");
        Matrix { field: v.field, rows, cols, data: v.data.clone() }
    }

    /// Flattens into a single column (row-major order).
    pub fn vectorize(&self) -> Matrix {
        Matrix { field: self.field, rows: self.rows * self.cols, cols: 1, data: self.data.clone() }
    }

    pub fn map_scalars(&self, f: impl Fn(&Scalar) -> Scalar) -> Matrix {
        self.map_entries(f)
    }
}

fn neg_scalar(f: FieldSpec, s: &Scalar) -> Scalar {
    match (f, s) {
        (_, Scalar::Q(r)) => Scalar::Q(r.neg()),
        (FieldSpec::PrimeField(p), Scalar::F(v)) => Scalar::F((p - v) % p),
        _ => unreachable!(),
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.to_strings().iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

/// Quotient of `k^n` by the column span of a matrix, with a linear section.
#[derive(Debug, Clone)]
pub struct Quotient {
    /// `q × n`, surjective, kernel = the span.
    pub proj: Matrix,
    /// `n × q`, with `proj * section = 1`.
    pub section: Matrix,
}

impl Quotient {
    pub fn of(field: FieldSpec, n: usize, span: &Matrix) -> Quotient {
        assert_eq!(span.rows(), n, "span lives in the wrong ambient space");
        let (r, pivots) = span.transpose().rref();
        let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
        let mut proj = Matrix::zeros(field, free.len(), n);
        let mut section = Matrix::zeros(field, n, free.len());
        for (j, &i) in free.iter().enumerate() {
            proj.set(j, i, &field.one());
            section.set(i, j, &field.one());
            for (k, &p) in pivots.iter().enumerate() {
                let e = r.get(k, i);
                if !e.is_zero() {
                    proj.set(j, p, &neg_scalar(field, &e));
                }
            }
        }
        Quotient { proj, section }
    }

    pub fn dim(&self) -> usize {
        self.proj.rows()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const F2: FieldSpec = FieldSpec::PrimeField(2);
    const Q: FieldSpec = FieldSpec::Rationals;

    fn all_vectors_f2(n: usize) -> Vec<Vec<i64>> {
        (0..1u32 << n).map(|m| (0..n).map(|i| ((m >> i) & 1) as i64).collect()).collect()
    }

    fn brute_rank_f2(m: &Matrix) -> usize {
        // log2 of the size of the row span
        let rows: Vec<u32> = (0..m.rows())
            .map(|i| (0..m.cols()).fold(0u32, |acc, j| acc | ((m.get(i, j) == Scalar::F(1)) as u32) << j))
            .collect();
        let mut span = std::collections::BTreeSet::new();
        for mask in 0..1u32 << rows.len() {
            let v = rows.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).fold(0, |a, (_, r)| a ^ r);
            span.insert(v);
        }
        span.len().trailing_zeros() as usize
    }

    #[test]
    fn rank_examples() {
        assert_eq!(Matrix::zeros(Q, 0, 0).rank(), 0);
        assert_eq!(Matrix::from_rows(F2, &[vec![1, 1], vec![1, 1]]).rank(), 1);
        assert_eq!(Matrix::from_rows(Q, &[vec![1, 1], vec![1, 1]]).rank(), 1);
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(Matrix::identity(Q, 2).kernel_basis().shape(), (2, 0));
        let k = Matrix::zeros(Q, 2, 3).kernel_basis();
        assert_eq!(k.shape(), (3, 3));
        assert_eq!(k.rank(), 3);
        let k = Matrix::from_rows(F2, &[vec![1, 1]]).kernel_basis();
        let nonzero_solutions: Vec<_> = all_vectors_f2(2)
            .into_iter()
            .filter(|v| v.iter().any(|x| *x != 0) && (v[0] + v[1]) % 2 == 0)
            .collect();
        assert_eq!(nonzero_solutions, vec![vec![1, 1]]);
        assert_eq!(k, Matrix::from_rows(F2, &[vec![1], vec![1]]));
    }

    #[test]
    fn solve_examples() {
        let b = Matrix::from_rows(Q, &[vec![3, 1], vec![-2, 5]]);
        assert_eq!(Matrix::identity(Q, 2).solve(&b).unwrap(), b);
        let x = Matrix::from_rows(F2, &[vec![1, 1]]).solve(&Matrix::from_rows(F2, &[vec![1]])).unwrap();
        assert!(x == Matrix::from_rows(F2, &[vec![1], vec![0]]) || x == Matrix::from_rows(F2, &[vec![0], vec![1]]));
        assert_eq!(Matrix::zeros(Q, 1, 1).solve(&Matrix::identity(Q, 1)), Err(AlgError::NoSolution));
        assert!(matches!(Matrix::zeros(Q, 2, 1).solve(&Matrix::identity(Q, 1)), Err(AlgError::DimensionMismatch(_))));
    }

    #[test]
    fn rational_arithmetic_promotes() {
        let big = Rat::from_int(i64::MAX);
        let s = big.add(&big);
        assert_eq!(s.to_string(), "18446744073709551614");
        assert_eq!(s.sub(&big), big);
        assert_eq!("6/-4".parse::<Rat>().unwrap(), Rat::new(-3, 2));
        assert_eq!(Rat::new(1, 3).mod_p(7), Some(5));
    }

    #[test]
    fn field_parsing() {
        assert_eq!("F3".parse::<FieldSpec>().unwrap(), FieldSpec::PrimeField(3));
        assert_eq!("Q".parse::<FieldSpec>().unwrap(), FieldSpec::Rationals);
        assert!(matches!("F4".parse::<FieldSpec>(), Err(AlgError::NotPrime(4))));
        assert_eq!(FieldSpec::PrimeField(3).parse_scalar("1/2").unwrap(), Scalar::F(2));
    }

    #[test]
    fn quotient_section() {
        let span = Matrix::from_rows(Q, &[vec![1], vec![2], vec![0]]);
        let q = Quotient::of(Q, 3, &span);
        assert_eq!(q.dim(), 2);
        assert!(q.proj.mul(&span).is_zero());
        assert!(q.proj.mul(&q.section).is_identity());
    }

    fn f2_matrix(r: usize, c: usize) -> impl Strategy<Value = Matrix> {
        proptest::collection::vec(0i64..2, r * c).prop_map(move |v| Matrix::from_i64(F2, r, c, &v))
    }

    fn sized_f2() -> impl Strategy<Value = Matrix> {
        (0usize..=5, 0usize..=5).prop_flat_map(|(r, c)| f2_matrix(r, c))
    }

    proptest! {
        #[test]
        fn rank_matches_span_enumeration(m in sized_f2()) {
            prop_assert_eq!(m.rank(), brute_rank_f2(&m));
        }

        #[test]
        fn rank_nullity(m in sized_f2()) {
            let k = m.kernel_basis();
            prop_assert_eq!(m.rank() + k.cols(), m.cols());
            prop_assert!(m.mul(&k).is_zero());
            prop_assert_eq!(k.rank(), k.cols());
        }

        #[test]
        fn solve_agrees_with_enumeration(m in (1usize..=4, 1usize..=4).prop_flat_map(|(r, c)| (f2_matrix(r, c), f2_matrix(r, 1)))) {
            let (a, b) = m;
            let found = all_vectors_f2(a.cols()).into_iter().any(|v| {
                a.mul(&Matrix::from_i64(F2, v.len(), 1, &v)) == b
            });
            match a.solve(&b) {
                Ok(x) => prop_assert_eq!(a.mul(&x), b),
                Err(AlgError::NoSolution) => prop_assert!(!found),
                Err(e) => prop_assert!(false, "unexpected {e}"),
            }
        }

        #[test]
        fn rational_solve_is_exact(v in proptest::collection::vec(-3i64..=3, 12)) {
            let a = Matrix::from_i64(Q, 3, 3, &v[..9]);
            let b = Matrix::from_i64(Q, 3, 1, &v[9..]);
            if let Ok(x) = a.solve(&b) {
                prop_assert_eq!(a.mul(&x), b);
            } else {
                prop_assert!(a.rank() < 3);
            }
        }
    }
}
