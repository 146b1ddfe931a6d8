use super::rep::{hconcat, hom_space, vconcat, Rep, RepMap};
use super::{same_carrier, Carrier, Discrete, HomError};
use crate::exactalg::{FieldSpec, Matrix, Quotient, Scalar};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// A bounded cochain complex of representations, cohomologically indexed.
#[derive(Clone)]
pub struct Complex {
    carrier: Arc<dyn Carrier>,
    field: FieldSpec,
    lo: i32,
    objects: Vec<Rep>,
    diffs: Vec<RepMap>,
    zero: Rep,
    valid_from: Option<i32>,
    valid_to: Option<i32>,
}

impl fmt::Debug for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Complex")
            .field("carrier", &self.carrier.key())
            .field("field", &self.field)
            .field("lo", &self.lo)
            .field("dims", &self.objects.iter().map(|o| o.dims.clone()).collect::<Vec<_>>())
            .field("valid_from", &self.valid_from)
            .field("valid_to", &self.valid_to)
            .finish()
    }
}

impl Complex {
    /// Builds a complex with objects in degrees `lo..lo + objects.len()`;
    /// `diffs[i]` maps degree `lo + i` to `lo + i + 1`.
    pub fn new(
        carrier: Arc<dyn Carrier>,
        field: FieldSpec,
        lo: i32,
        objects: Vec<Rep>,
        diffs: Vec<RepMap>,
    ) -> Result<Complex, HomError> {
        if diffs.len() != objects.len().saturating_sub(1) {
            return Err(HomError::Contract(format!("{} differentials for {} objects", diffs.len(), objects.len())));
        }
        for (i, o) in objects.iter().enumerate() {
            if o.field != field || o.dims.len() != carrier.quiver().vertices {
                return Err(HomError::Contract(format!("object in degree {} does not live on the carrier", lo + i as i32)));
            }
        }
        for (i, d) in diffs.iter().enumerate() {
            if !d.is_morphism(carrier.as_ref(), &objects[i], &objects[i + 1]) {
                return Err(HomError::Contract(format!("d^{} is not a morphism of representations", lo + i as i32)));
            }
        }
        for i in 1..diffs.len() {
            if !diffs[i].compose(&diffs[i - 1]).is_zero() {
                return Err(HomError::Contract(format!("d^{} ∘ d^{} ≠ 0", lo + i as i32, lo + i as i32 - 1)));
            }
        }
        let zero = Rep::zero(carrier.as_ref(), field);
        Ok(Complex { carrier, field, lo, objects, diffs, zero, valid_from: None, valid_to: None }.trimmed())
    }

    pub fn zero_complex(carrier: Arc<dyn Carrier>, field: FieldSpec) -> Complex {
        let zero = Rep::zero(carrier.as_ref(), field);
        Complex { carrier, field, lo: 0, objects: Vec::new(), diffs: Vec::new(), zero, valid_from: None, valid_to: None }
    }

    /// A single object in one degree.
    pub fn concentrated(carrier: Arc<dyn Carrier>, rep: Rep, degree: i32) -> Complex {
        let field = rep.field;
        Complex::new(carrier, field, degree, vec![rep], Vec::new()).expect("single object is a complex")
    }

    /// Vect with `k` in degree 0.
    pub fn unit_vect(field: FieldSpec) -> Complex {
        let rep = Rep { field, dims: vec![1], arrows: Vec::new() };
        Complex::concentrated(Discrete::vect(), rep, 0)
    }

    /// Drops zero objects at both ends.
    fn trimmed(mut self) -> Complex {
        while self.objects.last().is_some_and(Rep::is_zero) {
            self.objects.pop();
            self.diffs.pop();
        }
        while self.objects.first().is_some_and(Rep::is_zero) {
            self.objects.remove(0);
            if !self.diffs.is_empty() {
                self.diffs.remove(0);
            }
            self.lo += 1;
        }
        if self.objects.is_empty() {
            self.lo = 0;
        }
        self
    }

    pub fn carrier(&self) -> &Arc<dyn Carrier> {
        &self.carrier
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn lo(&self) -> i32 {
        self.lo
    }

    /// Top nonzero degree; `lo - 1` for the zero complex.
    pub fn hi(&self) -> i32 {
        self.lo + self.objects.len() as i32 - 1
    }

    pub fn is_zero(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn degrees(&self) -> std::ops::RangeInclusive<i32> {
        self.lo..=self.hi()
    }

    /// Degrees at and above which this complex is a faithful model; `None`
    /// when exact everywhere.
    pub fn valid_from(&self) -> Option<i32> {
        self.valid_from
    }

    pub fn with_valid_from(mut self, v: Option<i32>) -> Complex {
        self.valid_from = v;
        self
    }

    /// Degrees at and below which this complex is a faithful model.
    pub fn valid_to(&self) -> Option<i32> {
        self.valid_to
    }

    pub fn with_valid_to(mut self, v: Option<i32>) -> Complex {
        self.valid_to = v;
        self
    }

    /// Whether degree `n` lies in the faithful range.
    pub fn is_valid_at(&self, n: i32) -> bool {
        self.valid_from.is_none_or(|v| n >= v) && self.valid_to.is_none_or(|v| n <= v)
    }

    fn with_validity_of(self, o: &Complex) -> Complex {
        self.with_valid_from(o.valid_from).with_valid_to(o.valid_to)
    }

    pub fn obj(&self, n: i32) -> &Rep {
        if n < self.lo || n > self.hi() {
            return &self.zero;
        }
        &self.objects[(n - self.lo) as usize]
    }

    pub fn dims(&self, n: i32) -> &[usize] {
        &self.obj(n).dims
    }

    pub fn total_dim(&self, n: i32) -> usize {
        self.obj(n).total_dim()
    }

    /// `d^n: C^n -> C^{n+1}`.
    pub fn d(&self, n: i32) -> RepMap {
        if n < self.lo || n >= self.hi() {
            return RepMap::zero(self.obj(n), self.obj(n + 1));
        }
        self.diffs[(n - self.lo) as usize].clone()
    }

    fn check_same(&self, o: &Complex, what: &str) {
        assert!(
            same_carrier(self.carrier.as_ref(), o.carrier.as_ref()) && self.field == o.field,
            "contract violation: {what} across carriers {} / {} or fields {} / {}",
            self.carrier.key(),
            o.carrier.key(),
            self.field,
            o.field
        );
    }

    /// `C[k]^n = C^{n+k}` with differential `(-1)^k d`.
    pub fn shift(&self, k: i32) -> Complex {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        Complex {
            carrier: self.carrier.clone(),
            field: self.field,
            lo: if self.is_zero() { 0 } else { self.lo - k },
            objects: self.objects.clone(),
            diffs: self.diffs.iter().map(|d| d.scale_int(sign)).collect(),
            zero: self.zero.clone(),
            valid_from: self.valid_from.map(|v| v - k),
            valid_to: self.valid_to.map(|v| v - k),
        }
    }

    /// Direct sum, blocks in argument order.
    pub fn direct_sum(parts: &[&Complex]) -> Complex {
        let first = parts[0];
        for p in parts {
            first.check_same(p, "direct sum");
        }
        let nonzero: Vec<&&Complex> = parts.iter().filter(|p| !p.is_zero()).collect();
        if nonzero.is_empty() {
            return Complex::zero_complex(first.carrier.clone(), first.field);
        }
        let lo = nonzero.iter().map(|p| p.lo).min().unwrap();
        let hi = nonzero.iter().map(|p| p.hi()).max().unwrap();
        let c = first.carrier.as_ref();
        let objects: Vec<Rep> = (lo..=hi)
            .map(|n| {
                let reps: Vec<&Rep> = parts.iter().map(|p| p.obj(n)).collect();
                Rep::direct_sum(c, first.field, &reps)
            })
            .collect();
        let diffs = (lo..hi)
            .map(|n| {
                let ds: Vec<RepMap> = parts.iter().map(|p| p.d(n)).collect();
                let refs: Vec<&RepMap> = ds.iter().collect();
                RepMap::block_diag(first.field, &refs)
            })
            .collect();
        let valid = parts.iter().filter_map(|p| p.valid_from).max();
        let valid_to = parts.iter().filter_map(|p| p.valid_to).min();
        Complex::new(first.carrier.clone(), first.field, lo, objects, diffs)
            .expect("direct sum of complexes")
            .with_valid_from(valid)
            .with_valid_to(valid_to)
    }

    /// Per-vertex cohomology dimensions in degree `n`, from ranks only.
    pub fn homology_dims(&self, n: i32) -> Vec<usize> {
        let dn = self.d(n);
        let dp = self.d(n - 1);
        (0..self.obj(n).dims.len())
            .map(|v| self.obj(n).dims[v] - dn.comps[v].rank() - dp.comps[v].rank())
            .collect()
    }

    /// Total cohomology dimension in degree `n`.
    pub fn betti(&self, n: i32) -> usize {
        self.homology_dims(n).iter().sum()
    }

    /// Like [`Complex::betti`], refusing degrees outside the faithful range.
    pub fn betti_checked(&self, n: i32) -> Result<usize, HomError> {
        if self.is_valid_at(n) {
            return Ok(self.betti(n));
        }
        let (n, lo, hi) = (n as i64, self.lo as i64, self.hi() as i64);
        let from = self.valid_from.map_or(lo, |v| v as i64);
        let to = self.valid_to.map_or(hi, |v| v as i64);
        let available = (to.min(hi) - from.max(lo) + 1).max(0) as usize;
        let needed = available + (from - n).max(n - to).max(0) as usize;
        Err(HomError::TruncationInsufficient { needed, available })
    }

    /// Nonzero total cohomology dimensions by degree.
    pub fn betti_profile(&self) -> BTreeMap<i32, usize> {
        self.degrees().map(|n| (n, self.betti(n))).filter(|(_, b)| *b > 0).collect()
    }

    pub fn is_acyclic(&self) -> bool {
        self.degrees().all(|n| self.betti(n) == 0)
    }

    /// Cohomology in degree `n` with representatives.
    pub fn homology(&self, n: i32) -> Homology {
        let dn = self.d(n);
        let dp = self.d(n - 1);
        let per_vertex = (0..self.obj(n).dims.len())
            .map(|v| VertexHomology::new(self.field, &dn.comps[v], &dp.comps[v]))
            .collect();
        Homology { degree: n, per_vertex }
    }

    /// Tensor product with Koszul signs: on `C^p ⊗ D^q`,
    /// `d(x ⊗ y) = dx ⊗ y + (-1)^p x ⊗ dy`. Degree `n` is the sum over `p`
    /// ascending of the blocks `C^p ⊗ D^{n-p}`.
    pub fn tensor(&self, o: &Complex) -> Complex {
        self.check_same(o, "tensor");
        let field = self.field;
        let car = self.carrier.as_ref();
        if self.is_zero() || o.is_zero() {
            return Complex::zero_complex(self.carrier.clone(), field);
        }
        let (lo, hi) = (self.lo + o.lo, self.hi() + o.hi());
        let blocks = |n: i32| -> Vec<i32> { self.degrees().filter(|p| o.degrees().contains(&(n - p))).collect() };
        let objects: Vec<Rep> = (lo..=hi)
            .map(|n| {
                let reps: Vec<Rep> = blocks(n).iter().map(|&p| self.obj(p).tensor(o.obj(n - p))).collect();
                let refs: Vec<&Rep> = reps.iter().collect();
                Rep::direct_sum(car, field, &refs)
            })
            .collect();
        let nv = car.quiver().vertices;
        let diffs = (lo..hi)
            .map(|n| {
                let src_blocks = blocks(n);
                let tgt_blocks = blocks(n + 1);
                let comps = (0..nv)
                    .map(|v| {
                        let off = |bl: &[i32], deg: i32, p: i32| -> usize {
                            bl.iter().take_while(|&&q| q < p).map(|&q| self.dims(q)[v] * o.dims(deg - q)[v]).sum()
                        };
                        let rows: usize = tgt_blocks.iter().map(|&q| self.dims(q)[v] * o.dims(n + 1 - q)[v]).sum();
                        let cols: usize = src_blocks.iter().map(|&q| self.dims(q)[v] * o.dims(n - q)[v]).sum();
                        let mut m = Matrix::zeros(field, rows, cols);
                        for &p in &src_blocks {
                            let c0 = off(&src_blocks, n, p);
                            let q = n - p;
                            if tgt_blocks.contains(&(p + 1)) {
                                let b = self.d(p).comps[v].kron(&Matrix::identity(field, o.dims(q)[v]));
                                m.set_block(off(&tgt_blocks, n + 1, p + 1), c0, &b);
                            }
                            if tgt_blocks.contains(&p) {
                                let b = Matrix::identity(field, self.dims(p)[v]).kron(&o.d(q).comps[v]);
                                let b = if p % 2 == 0 { b } else { b.neg() };
                                m.set_block(off(&tgt_blocks, n + 1, p), c0, &b);
                            }
                        }
                        m
                    })
                    .collect();
                RepMap { comps }
            })
            .collect();
        let valid = match (self.valid_from, o.valid_from) {
            (None, None) => None,
            // a defect in one factor can only propagate upward by the
            // other factor's amplitude
            (Some(a), None) => Some(a + o.hi()),
            (None, Some(b)) => Some(b + self.hi()),
            (Some(a), Some(b)) => Some((a + o.hi()).max(b + self.hi())),
        };
        let valid_to = [self.valid_to.map(|a| a + o.lo), o.valid_to.map(|b| b + self.lo)].into_iter().flatten().min();
        Complex::new(self.carrier.clone(), field, lo, objects, diffs)
            .expect("tensor complex")
            .with_valid_from(valid)
            .with_valid_to(valid_to)
    }

    /// External Hom complex over Vect: `Hom^n = ⊕_p Hom(C^p, D^{p+n})`,
    /// `df = d_D f - (-1)^n f d_C`. Coordinates in each summand are those of
    /// [`hom_space`]; the morphism bases are returned alongside.
    pub fn hom_complex(&self, o: &Complex) -> (Complex, HomComplexData) {
        self.check_same(o, "hom complex");
        let field = self.field;
        let car = self.carrier.as_ref();
        let mut bases = BTreeMap::new();
        for p in self.degrees() {
            for q in o.degrees() {
                bases.insert((p, q), hom_space(car, self.obj(p), o.obj(q)));
            }
        }
        let data = HomComplexData { bases };
        if self.is_zero() || o.is_zero() {
            return (Complex::zero_complex(Discrete::vect(), field), data);
        }
        let (lo, hi) = (o.lo - self.hi(), o.hi() - self.lo);
        let blocks = |n: i32| -> Vec<i32> { self.degrees().filter(|p| o.degrees().contains(&(p + n))).collect() };
        let dim_of = |n: i32| -> usize { blocks(n).iter().map(|&p| data.bases[&(p, p + n)].len()).sum() };
        let objects: Vec<Rep> =
            (lo..=hi).map(|n| Rep { field, dims: vec![dim_of(n)], arrows: Vec::new() }).collect();
        let diffs = (lo..hi)
            .map(|n| {
                let (sb, tb) = (blocks(n), blocks(n + 1));
                let mut m = Matrix::zeros(field, dim_of(n + 1), dim_of(n));
                let mut col = 0;
                for &p in &sb {
                    for f in &data.bases[&(p, p + n)].maps {
                        // (df)_r for r = p (d_D f) and r = p - 1 (f d_C)
                        let mut row = 0;
                        for &r in &tb {
                            let basis = &data.bases[&(r, r + n + 1)];
                            let g = if r == p {
                                Some(o.d(p + n).compose(f))
                            } else if r == p - 1 {
                                let t = f.compose(&self.d(p - 1));
                                Some(if n % 2 == 0 { t.neg() } else { t })
                            } else {
                                None
                            };
                            if let Some(g) = g {
                                for (i, c) in basis.coords(&g).into_iter().enumerate() {
                                    if !c.is_zero() {
                                        m.set(row + i, col, &c);
                                    }
                                }
                            }
                            row += basis.len();
                        }
                        col += 1;
                    }
                }
                RepMap { comps: vec![m] }
            })
            .collect();
        let c = Complex::new(Discrete::vect(), field, lo, objects, diffs).expect("hom complex");
        (c, data)
    }

    /// Internal Hom complex over the same carrier.
    pub fn internal_hom(&self, o: &Complex) -> Complex {
        self.check_same(o, "internal hom");
        let field = self.field;
        let car = self.carrier.as_ref();
        if self.is_zero() || o.is_zero() {
            return Complex::zero_complex(self.carrier.clone(), field);
        }
        let (lo, hi) = (o.lo - self.hi(), o.hi() - self.lo);
        let blocks = |n: i32| -> Vec<i32> { self.degrees().filter(|p| o.degrees().contains(&(p + n))).collect() };
        let mut homs = BTreeMap::new();
        for p in self.degrees() {
            for q in o.degrees() {
                homs.insert((p, q), car.internal_hom(self.obj(p), o.obj(q)));
            }
        }
        let objects: Vec<Rep> = (lo..=hi)
            .map(|n| {
                let reps: Vec<&Rep> = blocks(n).iter().map(|&p| &homs[&(p, p + n)]).collect();
                Rep::direct_sum(car, field, &reps)
            })
            .collect();
        let diffs = (lo..hi)
            .map(|n| {
                let (sb, tb) = (blocks(n), blocks(n + 1));
                let src = &objects[(n - lo) as usize];
                let tgt = &objects[(n + 1 - lo) as usize];
                let cols: Vec<RepMap> = sb
                    .iter()
                    .map(|&p| {
                        let hp = &homs[&(p, p + n)];
                        let rows: Vec<RepMap> = tb
                            .iter()
                            .map(|&r| {
                                let hr = &homs[&(r, r + n + 1)];
                                if r == p {
                                    let id = RepMap::identity(self.obj(p));
                                    car.internal_hom_map(self.obj(p), o.obj(p + n), self.obj(p), o.obj(p + n + 1), &id, &o.d(p + n))
                                } else if r == p - 1 {
                                    let id = RepMap::identity(o.obj(p + n));
                                    let t = car.internal_hom_map(self.obj(p), o.obj(p + n), self.obj(p - 1), o.obj(p + n), &self.d(p - 1), &id);
                                    if n % 2 == 0 {
                                        t.neg()
                                    } else {
                                        t
                                    }
                                } else {
                                    RepMap::zero(hp, hr)
                                }
                            })
                            .collect();
                        let refs: Vec<&RepMap> = rows.iter().collect();
                        vconcat(field, &hp.dims, &refs)
                    })
                    .collect();
                let refs: Vec<&RepMap> = cols.iter().collect();
                let _ = src;
                hconcat(field, &tgt.dims, &refs)
            })
            .collect();
        Complex::new(self.carrier.clone(), field, lo, objects, diffs).expect("internal hom complex")
    }

    /// Applies a vertexwise linear transport (e.g. restriction along a map of
    /// carriers) to every object and differential.
    pub fn map_reps(
        &self,
        carrier: Arc<dyn Carrier>,
        f: impl Fn(&Rep) -> Rep,
        g: impl Fn(&Rep, &Rep, &RepMap) -> RepMap,
    ) -> Complex {
        if self.is_zero() {
            return Complex::zero_complex(carrier, self.field);
        }
        let objects: Vec<Rep> = self.objects.iter().map(&f).collect();
        let diffs = self
            .diffs
            .iter()
            .enumerate()
            .map(|(i, d)| g(&self.objects[i], &self.objects[i + 1], d))
            .collect();
        Complex::new(carrier, self.field, self.lo, objects, diffs)
            .expect("transported complex")
            .with_validity_of(self)
    }

    /// Brutal truncation keeping degrees `>= n` (a quotient complex).
    pub fn truncate_below(&self, n: i32) -> Complex {
        if self.is_zero() || n <= self.lo {
            return self.clone();
        }
        if n > self.hi() {
            return Complex::zero_complex(self.carrier.clone(), self.field);
        }
        let k = (n - self.lo) as usize;
        Complex {
            carrier: self.carrier.clone(),
            field: self.field,
            lo: n,
            objects: self.objects[k..].to_vec(),
            diffs: self.diffs[k..].to_vec(),
            zero: self.zero.clone(),
            valid_from: self.valid_from,
            valid_to: self.valid_to,
        }
    }
}

/// Bases of the Hom spaces making up an external Hom complex.
#[derive(Debug, Clone)]
pub struct HomComplexData {
    pub bases: BTreeMap<(i32, i32), super::rep::HomBasis>,
}

/// Cohomology at one vertex: cycle basis, class representatives and the
/// projection from cycle coordinates to class coordinates.
#[derive(Debug, Clone)]
pub struct VertexHomology {
    pub cycles: Matrix,
    pub reps: Matrix,
    free: Vec<usize>,
    class_proj: Matrix,
}

impl VertexHomology {
    fn new(field: FieldSpec, dn: &Matrix, dp: &Matrix) -> VertexHomology {
        let cycles = dn.kernel_basis();
        let (_, piv) = dn.rref();
        let free: Vec<usize> = (0..dn.cols()).filter(|c| !piv.contains(c)).collect();
        let bz = dp.select_rows(&free);
        let q = Quotient::of(field, cycles.cols(), &bz);
        let reps = cycles.mul(&q.section);
        VertexHomology { cycles, reps, free, class_proj: q.proj }
    }

    pub fn dim(&self) -> usize {
        self.reps.cols()
    }

    /// Class coordinates of cycles (given as columns).
    pub fn class_of(&self, cycles: &Matrix) -> Matrix {
        self.class_proj.mul(&cycles.select_rows(&self.free))
    }
}

#[derive(Debug, Clone)]
pub struct Homology {
    pub degree: i32,
    pub per_vertex: Vec<VertexHomology>,
}

impl Homology {
    pub fn dims(&self) -> Vec<usize> {
        self.per_vertex.iter().map(VertexHomology::dim).collect()
    }

    pub fn total(&self) -> usize {
        self.dims().iter().sum()
    }
}

/// A degree-0 map of complexes.
#[derive(Clone)]
pub struct ChainMap {
    pub source: Arc<Complex>,
    pub target: Arc<Complex>,
    comps: BTreeMap<i32, RepMap>,
}

impl fmt::Debug for ChainMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChainMap").field("source", &self.source).field("target", &self.target).finish()
    }
}

impl ChainMap {
    /// Validates shapes, equivariance and commutation with differentials.
    pub fn new(source: Arc<Complex>, target: Arc<Complex>, comps: BTreeMap<i32, RepMap>) -> Result<ChainMap, HomError> {
        let m = ChainMap::new_unchecked(source, target, comps);
        m.validate()?;
        Ok(m)
    }

    pub(crate) fn new_unchecked(source: Arc<Complex>, target: Arc<Complex>, comps: BTreeMap<i32, RepMap>) -> ChainMap {
        source.check_same(&target, "chain map");
        let comps = comps
            .into_iter()
            .filter(|(n, _)| source.degrees().contains(n) && target.degrees().contains(n))
            .collect();
        ChainMap { source, target, comps }
    }

    pub fn validate(&self) -> Result<(), HomError> {
        let car = self.source.carrier.as_ref();
        for n in self.degrees() {
            let f = self.comp(n);
            if !f.is_morphism(car, self.source.obj(n), self.target.obj(n)) {
                return Err(HomError::Contract(format!("component {n} is not a morphism")));
            }
            let lhs = self.target.d(n).compose(&f);
            let rhs = self.comp(n + 1).compose(&self.source.d(n));
            if lhs != rhs {
                return Err(HomError::Contract(format!("chain map fails to commute with d^{n}")));
            }
        }
        Ok(())
    }

    pub fn identity(c: &Arc<Complex>) -> ChainMap {
        let comps = c.degrees().map(|n| (n, RepMap::identity(c.obj(n)))).collect();
        ChainMap { source: c.clone(), target: c.clone(), comps }
    }

    pub fn zero(source: &Arc<Complex>, target: &Arc<Complex>) -> ChainMap {
        ChainMap::new_unchecked(source.clone(), target.clone(), BTreeMap::new())
    }

    /// Degrees where both source and target may be nonzero, widened by one
    /// on each side for commutation checks.
    pub fn degrees(&self) -> std::ops::RangeInclusive<i32> {
        let lo = self.source.lo().min(self.target.lo()) - 1;
        let hi = self.source.hi().max(self.target.hi()) + 1;
        lo..=hi
    }

    pub fn comp(&self, n: i32) -> RepMap {
        self.comps.get(&n).cloned().unwrap_or_else(|| RepMap::zero(self.source.obj(n), self.target.obj(n)))
    }

    /// `self ∘ g`.
    pub fn compose(&self, g: &ChainMap) -> ChainMap {
        assert!(
            g.target.carrier.key() == self.source.carrier.key(),
            "contract violation: composing maps over different carriers"
        );
        let comps = g.source.degrees().map(|n| (n, self.comp(n).compose(&g.comp(n)))).collect();
        ChainMap::new_unchecked(g.source.clone(), self.target.clone(), comps)
    }

    fn zip(&self, o: &ChainMap, f: impl Fn(&RepMap, &RepMap) -> RepMap) -> ChainMap {
        let comps = self.source.degrees().map(|n| (n, f(&self.comp(n), &o.comp(n)))).collect();
        ChainMap::new_unchecked(self.source.clone(), self.target.clone(), comps)
    }

    pub fn add(&self, o: &ChainMap) -> ChainMap {
        self.zip(o, RepMap::add)
    }

    pub fn sub(&self, o: &ChainMap) -> ChainMap {
        self.zip(o, RepMap::sub)
    }

    pub fn neg(&self) -> ChainMap {
        self.zip(self, |a, _| a.neg())
    }

    pub fn scale(&self, s: &Scalar) -> ChainMap {
        self.zip(self, |a, _| a.scale(s))
    }

    pub fn is_zero(&self) -> bool {
        self.comps.values().all(RepMap::is_zero)
    }

    /// Same underlying maps, reinterpreted between equal complexes.
    pub fn retarget(&self, source: Arc<Complex>, target: Arc<Complex>) -> ChainMap {
        ChainMap::new_unchecked(source, target, self.comps.clone())
    }

    /// Induced map on cohomology in degree `n`, per vertex, in the class
    /// coordinates of [`Complex::homology`].
    pub fn on_homology(&self, n: i32) -> Vec<Matrix> {
        let hs = self.source.homology(n);
        let ht = self.target.homology(n);
        let f = self.comp(n);
        hs.per_vertex
            .iter()
            .zip(&ht.per_vertex)
            .enumerate()
            .map(|(v, (a, b))| b.class_of(&f.comps[v].mul(&a.reps)))
            .collect()
    }

    /// Whether the induced map on cohomology is invertible in every degree,
    /// decided by acyclicity of the mapping cone.
    pub fn is_quasi_iso(&self) -> bool {
        self.cone().0.is_acyclic()
    }

    /// Quasi-isomorphism restricted to degrees `>= from`.
    pub fn is_quasi_iso_from(&self, from: i32) -> bool {
        let lo = self.source.lo().min(self.target.lo()).max(from);
        let hi = self.source.hi().max(self.target.hi());
        (lo..=hi).all(|n| {
            self.source.homology_dims(n) == self.target.homology_dims(n)
                && self.on_homology(n).iter().all(|m| m.rank() == m.rows())
        })
    }

    /// `cone(f)^n = S^{n+1} ⊕ T^n`, `d(s, t) = (-d s, f s + d t)`, with the
    /// inclusion `T -> cone` and the projection `cone -> S[1]`.
    pub fn cone(&self) -> (Complex, ChainMap, ChainMap) {
        let (s, t) = (&self.source, &self.target);
        let field = s.field;
        let car = s.carrier.as_ref();
        let mut degs: Vec<i32> = Vec::new();
        if !s.is_zero() {
            degs.extend([s.lo - 1, s.hi() - 1]);
        }
        if !t.is_zero() {
            degs.extend([t.lo, t.hi()]);
        }
        if degs.is_empty() {
            let z = Arc::new(Complex::zero_complex(s.carrier.clone(), field));
            let zs = Arc::new(s.shift(1));
            return ((*z).clone(), ChainMap::zero(t, &z), ChainMap::zero(&z, &zs));
        }
        let (lo, hi) = (*degs.iter().min().unwrap(), *degs.iter().max().unwrap());
        let objects: Vec<Rep> = (lo..=hi).map(|n| Rep::direct_sum(car, field, &[s.obj(n + 1), t.obj(n)])).collect();
        let diffs = (lo..hi)
            .map(|n| {
                let a = s.d(n + 1).neg();
                let b = RepMap::zero(t.obj(n), s.obj(n + 2));
                let c = self.comp(n + 1);
                let d = t.d(n);
                let top = hconcat(field, &s.obj(n + 2).dims, &[&a, &b]);
                let bot = hconcat(field, &t.obj(n + 1).dims, &[&c, &d]);
                vconcat(field, &objects[(n - lo) as usize].dims, &[&top, &bot])
            })
            .collect();
        let valid = match (s.valid_from, t.valid_from) {
            (None, None) => None,
            (a, b) => Some(a.map(|x| x - 1).unwrap_or(i32::MIN).max(b.unwrap_or(i32::MIN))),
        };
        let cone = Arc::new(
            Complex::new(s.carrier.clone(), field, lo, objects, diffs)
                .expect("mapping cone")
                .with_valid_from(valid)
                .with_valid_to([s.valid_to.map(|x| x - 1), t.valid_to].into_iter().flatten().min()),
        );
        let incl = t
            .degrees()
            .map(|n| {
                let z = RepMap::zero(t.obj(n), s.obj(n + 1));
                (n, vconcat(field, &t.obj(n).dims, &[&z, &RepMap::identity(t.obj(n))]))
            })
            .collect();
        let s1 = Arc::new(s.shift(1));
        let proj = s1
            .degrees()
            .map(|n| {
                let z = RepMap::zero(t.obj(n), s.obj(n + 1));
                (n, hconcat(field, &s.obj(n + 1).dims, &[&RepMap::identity(s.obj(n + 1)), &z]))
            })
            .collect();
        let incl = ChainMap::new_unchecked(t.clone(), cone.clone(), incl);
        let proj = ChainMap::new_unchecked(cone.clone(), s1, proj);
        ((*cone).clone(), incl, proj)
    }

    /// `f ⊗ g` on tensor complexes (degree-0 maps, so no signs).
    pub fn tensor(&self, g: &ChainMap, source: Arc<Complex>, target: Arc<Complex>) -> ChainMap {
        let (a, b, c, d) = (&self.source, &g.source, &self.target, &g.target);
        let field = a.field;
        let nv = a.carrier.quiver().vertices;
        let comps = source
            .degrees()
            .map(|n| {
                let sb: Vec<i32> = a.degrees().filter(|p| b.degrees().contains(&(n - p))).collect();
                let tb: Vec<i32> = c.degrees().filter(|p| d.degrees().contains(&(n - p))).collect();
                let comps = (0..nv)
                    .map(|v| {
                        let rows: usize = tb.iter().map(|&q| c.dims(q)[v] * d.dims(n - q)[v]).sum();
                        let cols: usize = sb.iter().map(|&q| a.dims(q)[v] * b.dims(n - q)[v]).sum();
                        let mut m = Matrix::zeros(field, rows, cols);
                        let mut c0 = 0;
                        for &p in &sb {
                            let w = a.dims(p)[v] * b.dims(n - p)[v];
                            if let Some(pos) = tb.iter().position(|&q| q == p) {
                                let r0: usize = tb[..pos].iter().map(|&q| c.dims(q)[v] * d.dims(n - q)[v]).sum();
                                let blk = self.comp(p).comps[v].kron(&g.comp(n - p).comps[v]);
                                m.set_block(r0, c0, &blk);
                            }
                            c0 += w;
                        }
                        m
                    })
                    .collect();
                (n, RepMap { comps })
            })
            .collect();
        ChainMap::new_unchecked(source, target, comps)
    }

    /// Applies a linear transport to each component (see [`Complex::map_reps`]).
    pub fn map_comps(&self, source: Arc<Complex>, target: Arc<Complex>, g: impl Fn(i32, &RepMap) -> RepMap) -> ChainMap {
        let comps = self.comps.iter().map(|(&n, m)| (n, g(n, m))).collect();
        ChainMap::new_unchecked(source, target, comps)
    }

    pub fn components(&self) -> &BTreeMap<i32, RepMap> {
        &self.comps
    }
}

/// `h^n: C^n -> D^{n-1}`.
#[derive(Debug, Clone)]
pub struct Homotopy {
    pub comps: BTreeMap<i32, RepMap>,
}

impl Homotopy {
    /// Checks `d h + h d = f - g` exactly.
    pub fn certifies(&self, f: &ChainMap, g: &ChainMap) -> bool {
        let (c, d) = (&f.source, &f.target);
        let h = |n: i32| self.comps.get(&n).cloned().unwrap_or_else(|| RepMap::zero(c.obj(n), d.obj(n - 1)));
        f.degrees().all(|n| {
            let lhs = d.d(n - 1).compose(&h(n)).add(&h(n + 1).compose(&c.d(n)));
            lhs == f.comp(n).sub(&g.comp(n))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vect(d: usize, f: FieldSpec) -> Rep {
        Rep { field: f, dims: vec![d], arrows: Vec::new() }
    }

    /// A random complex over Vect.
    fn random_complex(f: FieldSpec, lo: i32, dims: &[usize], seed: u64) -> Complex {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut diffs: Vec<Matrix> = Vec::new();
        for i in 0..dims.len().saturating_sub(1) {
            // factor through the cokernel of the previous differential
            let q = match diffs.last() {
                Some(prev) => Quotient::of(f, dims[i], prev).proj,
                None => Matrix::identity(f, dims[i]),
            };
            diffs.push(Matrix::random(f, dims[i + 1], q.rows(), &mut rng).mul(&q));
        }
        let objects = dims.iter().map(|&d| vect(d, f)).collect();
        let diffs = diffs.into_iter().map(|m| RepMap { comps: vec![m] }).collect();
        Complex::new(Discrete::vect(), f, lo, objects, diffs).unwrap()
    }

    fn euler(c: &Complex) -> i64 {
        c.degrees().map(|n| if n % 2 == 0 { c.total_dim(n) as i64 } else { -(c.total_dim(n) as i64) }).sum()
    }

    fn homology_euler(c: &Complex) -> i64 {
        c.degrees().map(|n| if n % 2 == 0 { c.betti(n) as i64 } else { -(c.betti(n) as i64) }).sum()
    }

    #[test]
    fn shift_moves_cohomology() {
        let f = FieldSpec::Rationals;
        let c = Complex::unit_vect(f);
        let s = c.shift(2);
        assert_eq!(s.betti(-2), 1);
        assert_eq!(s.shift(-2).betti(0), 1);
    }

    #[test]
    fn cone_of_identity_is_acyclic() {
        let f = FieldSpec::prime(2).unwrap();
        let c = Arc::new(random_complex(f, -1, &[2, 3, 2], 7));
        let (cone, _, _) = ChainMap::identity(&c).cone();
        assert!(cone.is_acyclic());
    }

    #[test]
    fn tensor_and_hom_adjunction_over_vect() {
        let f = FieldSpec::Rationals;
        let a = random_complex(f, 0, &[1, 2], 1);
        let b = random_complex(f, -1, &[2, 1], 2);
        let c = random_complex(f, 0, &[1, 1, 1], 3);
        let (lhs, _) = a.tensor(&b).hom_complex(&c);
        let (bc, _) = b.hom_complex(&c);
        let (rhs, _) = a.hom_complex(&bc);
        for n in -4..=4 {
            assert_eq!(lhs.betti(n), rhs.betti(n), "degree {n}");
        }
    }

    #[test]
    fn homology_classes_of_cycles() {
        let f = FieldSpec::Rationals;
        let d = RepMap { comps: vec![Matrix::from_rows(f, &[vec![1, 0]])] };
        let c = Complex::new(Discrete::vect(), f, 0, vec![vect(2, f), vect(1, f)], vec![d]).unwrap();
        let h = c.homology(0);
        assert_eq!(h.dims(), vec![1]);
        let rep = &h.per_vertex[0].reps;
        assert_eq!(h.per_vertex[0].class_of(rep), Matrix::identity(f, 1));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn euler_characteristic_is_preserved(seed in 0u64..1000, a in 0usize..4, b in 0usize..4, c in 0usize..4) {
            let f = FieldSpec::prime(3).unwrap();
            let x = random_complex(f, -1, &[a, b, c], seed);
            prop_assert_eq!(euler(&x), homology_euler(&x));
        }

        #[test]
        fn cone_long_exact_sequence(seed in 0u64..1000, a in 1usize..3, b in 1usize..3) {
            use rand::SeedableRng;
            let f = FieldSpec::Rationals;
            let s = Arc::new(random_complex(f, 0, &[a, b], seed));
            let t = Arc::new(random_complex(f, 0, &[b, a], seed + 1));
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let basis = crate::homlib::chain_map_basis(&s, &t);
            let coeffs: Vec<Scalar> = basis.iter().map(|_| Matrix::random(f, 1, 1, &mut rng).get(0, 0)).collect();
            let m = crate::homlib::combine(&s, &t, &basis, &coeffs);
            prop_assert!(m.validate().is_ok());
            let (cone, i, p) = m.cone();
            prop_assert!(i.validate().is_ok());
            prop_assert!(p.validate().is_ok());
            // H(S) -> H(T) -> H(cone) -> H(S[1]) exact: H(cone) = coker ⊕ ker
            for n in -3..=3 {
                let r = |k: i32| m.on_homology(k)[0].rank();
                prop_assert_eq!(cone.betti(n), (t.betti(n) - r(n)) + (s.betti(n + 1) - r(n + 1)));
                let ri = i.on_homology(n)[0].rank();
                prop_assert_eq!(ri, t.betti(n) - r(n));
            }
        }
    }
}
