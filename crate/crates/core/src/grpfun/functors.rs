use super::groupoid::{FinGroupoid, GpdMap, GroupoidCarrier};
use super::GrpError;
use crate::exactalg::{FieldSpec, Matrix, Quotient};
use crate::homlib::{projective_replacement, Carrier, ChainMap, Complex, Rep, RepMap};
use std::collections::BTreeMap;
use std::sync::Arc;

pub fn carrier_of(x: &Arc<FinGroupoid>) -> Arc<dyn Carrier> {
    GroupoidCarrier::new(x.clone())
}

/// The unit: the trivial representation on every component, in degree 0.
pub fn unit(x: &Arc<FinGroupoid>, field: FieldSpec) -> Complex {
    let car = GroupoidCarrier::new(x.clone());
    let k = car.trivial(field);
    Complex::concentrated(car, k, 0)
}

/// `f^*` on a single representation.
pub fn restrict_rep(f: &GpdMap, rep: &Rep) -> Rep {
    let tcar = GroupoidCarrier::new(f.target.clone());
    let scar = GroupoidCarrier::new(f.source.clone());
    let all: Vec<Vec<Matrix>> = (0..f.target.len()).map(|d| tcar.elements(rep, d)).collect();
    let dims = f.comp.iter().map(|&d| rep.dims[d]).collect();
    scar.rep_from(rep.field, dims, |c, s| all[f.comp[c]][f.homs[c][s]].clone())
}

fn restrict_repmap(f: &GpdMap, m: &RepMap) -> RepMap {
    RepMap { comps: f.comp.iter().map(|&d| m.comps[d].clone()).collect() }
}

/// `f^*`: precompose with the homomorphisms. Exact.
pub fn restrict(f: &GpdMap, a: &Complex) -> Complex {
    a.map_reps(carrier_of(&f.source), |r| restrict_rep(f, r), |_, _, m| restrict_repmap(f, m))
}

pub fn restrict_map(f: &GpdMap, m: &ChainMap, source: Arc<Complex>, target: Arc<Complex>) -> ChainMap {
    m.map_comps(source, target, |_, r| restrict_repmap(f, r))
}

/// `f^! = f^*` in this instance.
pub fn upper_shriek(f: &GpdMap, a: &Complex) -> Complex {
    restrict(f, a)
}

/// Contragredient dual: `(DA)^n = (A^{-n})^*`, `d^n = (d^{-n-1})ᵀ`.
pub fn dual(x: &Arc<FinGroupoid>, a: &Complex) -> Complex {
    let car = GroupoidCarrier::new(x.clone());
    if a.is_zero() {
        return Complex::zero_complex(car, a.field());
    }
    let objects = (-a.hi()..=-a.lo()).map(|n| car.dual_rep(a.obj(-n))).collect();
    let diffs = (-a.hi()..-a.lo())
        .map(|n| RepMap { comps: a.d(-n - 1).comps.iter().map(Matrix::transpose).collect() })
        .collect();
    Complex::new(car, a.field(), -a.hi(), objects, diffs)
        .expect("dual complex")
        .with_valid_from(a.valid_to().map(|v| -v))
        .with_valid_to(a.valid_from().map(|v| -v))
}

/// `D(m): DB -> DA` for `m: A -> B`.
pub fn dual_map(m: &ChainMap, da: Arc<Complex>, db: Arc<Complex>) -> ChainMap {
    let comps = db
        .degrees()
        .map(|n| (n, RepMap { comps: m.comp(-n).comps.iter().map(Matrix::transpose).collect() }))
        .collect();
    ChainMap::new(db, da, comps).expect("dual of a chain map")
}

/// Left Kan extension along one source component `c -> d`.
struct Part {
    c: usize,
    d: usize,
    kernel: Vec<usize>,
    /// A preimage of each element of the image.
    lift: BTreeMap<usize, usize>,
    reps: Vec<usize>,
    which: Vec<(usize, usize)>,
}

/// Per component, `k` or a free resolution of `k` over the isotropy group,
/// assembled into one complex on `x` with its augmentation to the unit.
pub fn vertexwise_resolution(x: &Arc<FinGroupoid>, field: FieldSpec, window: usize, needs: &[bool]) -> (Arc<Complex>, ChainMap) {
    let xcar = GroupoidCarrier::new(x.clone());
    let nv = x.len();
    let mut pieces = Vec::new();
    let mut augs = Vec::new();
    for c in 0..nv {
        let incl = GpdMap::component(x, c);
        let hcar = GroupoidCarrier::new(incl.source.clone());
        let k = Arc::new(Complex::concentrated(hcar.clone(), hcar.trivial(field), 0));
        let (p, eps) = if needs[c] {
            let r = projective_replacement(&k, window);
            let eps = r.map.comp(0).comps[0].clone();
            (r.complex, eps)
        } else {
            (k, Matrix::identity(field, 1))
        };
        let place = |r: &Rep| {
            let mut dims = vec![0; nv];
            dims[c] = r.dims[0];
            let all = hcar.elements(r, 0);
            xcar.rep_from(field, dims.clone(), |v, s| {
                if v == c { all[s].clone() } else { Matrix::zeros(field, dims[v], dims[v]) }
            })
        };
        let place_map = |m: &RepMap| RepMap {
            comps: (0..nv).map(|v| if v == c { m.comps[0].clone() } else { Matrix::zeros(field, 0, 0) }).collect(),
        };
        pieces.push(p.map_reps(xcar.clone(), place, |_, _, m| place_map(m)));
        augs.push(eps);
    }
    let refs: Vec<&Complex> = pieces.iter().collect();
    let res = Arc::new(if refs.is_empty() { Complex::zero_complex(xcar.clone(), field) } else { Complex::direct_sum(&refs) });
    let one = Arc::new(unit(x, field));
    let comps = if res.degrees().contains(&0) {
        let dims = res.dims(0);
        let aug = (0..nv)
            .map(|c| if dims[c] == 0 { Matrix::zeros(field, 1, 0) } else { augs[c].clone() })
            .collect();
        BTreeMap::from([(0, RepMap { comps: aug })])
    } else {
        BTreeMap::new()
    };
    let aug = ChainMap::new(res.clone(), one, comps).expect("augmentation is a chain map");
    (res, aug)
}

/// `f_!` for a fixed map, field and window. For each source component
/// `H -> G` with kernel `K` and image `L`, `f_!A` is
/// `Ind_L^G((R ⊗ A)_K)` where `R -> 1` restricts to a `K`-free resolution
/// of `k` on every component whose kernel order the characteristic divides.
pub struct ShriekPush {
    f: GpdMap,
    field: FieldSpec,
    xcar: Arc<GroupoidCarrier>,
    ycar: Arc<GroupoidCarrier>,
    parts: Vec<Part>,
    res: Arc<Complex>,
    aug: ChainMap,
}

impl ShriekPush {
    pub fn new(f: &GpdMap, field: FieldSpec, window: usize) -> ShriekPush {
        let p = field.characteristic();
        let needs: Vec<bool> =
            (0..f.source.len()).map(|c| p > 0 && f.kernel(c).len() as u64 % p == 0).collect();
        let (res, aug) = vertexwise_resolution(&f.source, field, window, &needs);
        ShriekPush::with_resolution(f, field, res, aug)
    }

    /// Uses a caller-supplied `R -> 1`; `R` must restrict to a `K`-free
    /// resolution wherever the characteristic divides `|K|`.
    pub fn with_resolution(f: &GpdMap, field: FieldSpec, res: Arc<Complex>, aug: ChainMap) -> ShriekPush {
        let parts = (0..f.source.len())
            .map(|c| {
                let d = f.comp[c];
                let (h, g) = (f.source.group(c), f.target.group(d));
                let kernel = f.kernel(c);
                let image = f.image(c);
                let mut lift = BTreeMap::new();
                for x in h.elements() {
                    lift.entry(f.homs[c][x]).or_insert(x);
                }
                let (reps, which) = g.cosets(&image);
                Part { c, d, kernel, lift, reps, which }
            })
            .collect();
        ShriekPush {
            f: f.clone(),
            field,
            xcar: GroupoidCarrier::new(f.source.clone()),
            ycar: GroupoidCarrier::new(f.target.clone()),
            parts,
            res,
            aug,
        }
    }

    pub fn map(&self) -> &GpdMap {
        &self.f
    }

    pub fn resolution(&self) -> &Arc<Complex> {
        &self.res
    }

    pub fn augmentation(&self) -> &ChainMap {
        &self.aug
    }

    /// `R ⊗ A`, whose coinvariants are pushed.
    pub fn stage(&self, a: &Complex) -> Complex {
        self.res.tensor(a)
    }

    fn stage_map(&self, m: &ChainMap, sa: &Arc<Complex>, sb: &Arc<Complex>) -> ChainMap {
        ChainMap::identity(&self.res).tensor(m, sa.clone(), sb.clone())
    }

    fn coinvariants(&self, part: &Part, v: &Rep) -> Quotient {
        let n = v.dims[part.c];
        let all = self.xcar.elements(v, part.c);
        let id = Matrix::identity(self.field, n);
        let parts: Vec<Matrix> = part.kernel.iter().map(|&k| all[k].sub(&id)).collect();
        let refs: Vec<&Matrix> = parts.iter().collect();
        Quotient::of(self.field, n, &Matrix::hstack(self.field, n, &refs))
    }

    fn place(&self, d: usize, dim: usize, act: impl Fn(usize) -> Matrix) -> Rep {
        let mut dims = vec![0; self.f.target.len()];
        dims[d] = dim;
        let field = self.field;
        self.ycar.rep_from(field, dims.clone(), |c, s| if c == d { act(s) } else { Matrix::zeros(field, dims[c], dims[c]) })
    }

    fn place_map(&self, d: usize, m: Matrix) -> RepMap {
        let comps =
            (0..self.f.target.len()).map(|c| if c == d { m.clone() } else { Matrix::zeros(self.field, 0, 0) }).collect();
        RepMap { comps }
    }

    fn obj(&self, part: &Part, v: &Rep) -> Rep {
        let q = self.coinvariants(part, v);
        let all = self.xcar.elements(v, part.c);
        let w = q.dim();
        let r = part.reps.len();
        let g = self.f.target.group(part.d);
        self.place(part.d, r * w, |s| {
            let mut m = Matrix::zeros(self.field, r * w, r * w);
            for (i, &ri) in part.reps.iter().enumerate() {
                let (j, l) = part.which[g.mul(s, ri)];
                let wl = q.proj.mul(&all[part.lift[&l]]).mul(&q.section);
                m.set_block(j * w, i * w, &wl);
            }
            m
        })
    }

    fn mor(&self, part: &Part, a: &Rep, b: &Rep, m: &RepMap) -> RepMap {
        let (qa, qb) = (self.coinvariants(part, a), self.coinvariants(part, b));
        let core = qb.proj.mul(&m.comps[part.c]).mul(&qa.section);
        let copies = vec![&core; part.reps.len()];
        self.place_map(part.d, Matrix::block_diag(self.field, &copies))
    }

    pub fn push(&self, a: &Complex) -> Complex {
        let staged = self.stage(a);
        let pieces: Vec<Complex> = self
            .parts
            .iter()
            .map(|part| staged.map_reps(self.ycar.clone(), |v| self.obj(part, v), |x, y, m| self.mor(part, x, y, m)))
            .collect();
        if pieces.is_empty() {
            return Complex::zero_complex(self.ycar.clone(), self.field);
        }
        let refs: Vec<&Complex> = pieces.iter().collect();
        Complex::direct_sum(&refs)
    }

    /// `f_!(m)` between previously pushed complexes.
    pub fn push_map(&self, m: &ChainMap, source: Arc<Complex>, target: Arc<Complex>) -> ChainMap {
        let sa = Arc::new(self.stage(&m.source));
        let sb = Arc::new(self.stage(&m.target));
        let sm = self.stage_map(m, &sa, &sb);
        let comps = source
            .degrees()
            .map(|n| {
                let blocks: Vec<RepMap> =
                    self.parts.iter().map(|part| self.mor(part, sa.obj(n), sb.obj(n), &sm.comp(n))).collect();
                let refs: Vec<&RepMap> = blocks.iter().collect();
                (n, RepMap::block_diag(self.field, &refs))
            })
            .collect();
        ChainMap::new(source, target, comps).expect("pushforward of a chain map")
    }

    /// Row offset of each part's block inside `(f_!A)^n` at its target vertex.
    fn offsets(&self, staged: &Complex, n: i32) -> Vec<(usize, Quotient)> {
        let mut used = vec![0; self.f.target.len()];
        self.parts
            .iter()
            .map(|part| {
                let q = self.coinvariants(part, staged.obj(n));
                let off = used[part.d];
                used[part.d] += q.dim() * part.reps.len();
                (off, q)
            })
            .collect()
    }

    /// The quotient `R ⊗ A -> f^*f_!A` onto the identity coset.
    pub fn unit(&self, a: &Complex, pushed: &Arc<Complex>) -> ChainMap {
        let staged = Arc::new(self.stage(a));
        let target = Arc::new(restrict(&self.f, pushed));
        let comps = staged
            .degrees()
            .map(|n| {
                let offs = self.offsets(&staged, n);
                let tdims = target.dims(n);
                let sdims = staged.dims(n);
                let comps = self
                    .parts
                    .iter()
                    .zip(offs)
                    .map(|(part, (off, q))| {
                        let mut m = Matrix::zeros(self.field, tdims[part.c], sdims[part.c]);
                        m.set_block(off, 0, &q.proj);
                        m
                    })
                    .collect();
                (n, RepMap { comps })
            })
            .collect();
        ChainMap::new(staged, target, comps).expect("unit of the pushforward")
    }

    /// The map `f_!A -> B` adjoint to an equivariant `lam: R ⊗ A -> f^*B`
    /// that is constant on `K`-orbits.
    pub fn descend(&self, pushed: &Arc<Complex>, b: &Arc<Complex>, lam: &ChainMap) -> Result<ChainMap, GrpError> {
        let staged = &lam.source;
        let comps = pushed
            .degrees()
            .map(|n| {
                let offs = self.offsets(staged, n);
                let (pd, bd) = (pushed.dims(n), b.dims(n));
                let mut comps: Vec<Matrix> =
                    (0..self.f.target.len()).map(|d| Matrix::zeros(self.field, bd[d], pd[d])).collect();
                let lc = lam.comp(n);
                for (part, (off, q)) in self.parts.iter().zip(offs) {
                    let core = lc.comps[part.c].mul(&q.section);
                    if bd[part.d] == 0 || q.dim() == 0 {
                        continue;
                    }
                    let act = self.ycar.elements(b.obj(n), part.d);
                    for (i, &ri) in part.reps.iter().enumerate() {
                        comps[part.d].set_block(0, off + i * q.dim(), &act[ri].mul(&core));
                    }
                }
                (n, RepMap { comps })
            })
            .collect();
        Ok(ChainMap::new(pushed.clone(), b.clone(), comps)?)
    }

    /// Degree-0 norm `f_!1 -> f_*1 = D f_!1`: on each part `|K|` times the
    /// augmentation followed by its transpose.
    fn norm_component(&self, shr: &Complex) -> RepMap {
        let unit = unit(&self.f.source, self.field);
        let st = self.stage(&unit);
        let aug = self.aug.comp(0);
        let blocks: Vec<RepMap> = self
            .parts
            .iter()
            .map(|part| {
                let q = self.coinvariants(part, st.obj(0));
                // R^0 ⊗ k = R^0
                let eps = aug.comps[part.c].mul(&q.section);
                let core = eps.transpose().mul(&eps).scale(&self.field.int(part.kernel.len() as i64));
                let copies = vec![&core; part.reps.len()];
                self.place_map(part.d, Matrix::block_diag(self.field, &copies))
            })
            .collect();
        let refs: Vec<&RepMap> = blocks.iter().collect();
        if refs.is_empty() {
            return RepMap::zero(shr.obj(0), shr.obj(0));
        }
        RepMap::block_diag(self.field, &refs)
    }

    /// Whether the characteristic is prime to every kernel order.
    pub fn divisibility_predicate(&self) -> bool {
        self.parts.iter().all(|p| self.field.is_unit(p.kernel.len() as u64))
    }
}

pub fn shriek_push(f: &GpdMap, a: &Complex, window: usize) -> Complex {
    ShriekPush::new(f, a.field(), window).push(a)
}

/// `f_* = D f_! D`.
pub fn star_push(f: &GpdMap, a: &Complex, window: usize) -> Complex {
    let da = dual(&f.source, a);
    dual(&f.target, &ShriekPush::new(f, a.field(), window).push(&da))
}

pub fn star_push_map(f: &GpdMap, m: &ChainMap, source: Arc<Complex>, target: Arc<Complex>, window: usize) -> ChainMap {
    let sp = ShriekPush::new(f, m.source.field(), window);
    let (da, db) = (Arc::new(dual(&f.source, &m.source)), Arc::new(dual(&f.source, &m.target)));
    let dm = dual_map(m, da.clone(), db.clone());
    let (pa, pb) = (Arc::new(sp.push(&da)), Arc::new(sp.push(&db)));
    let pm = sp.push_map(&dm, pb.clone(), pa.clone());
    // D(pm): D(pa) -> D(pb), i.e. f_*A -> f_*B
    dual_map(&pm, target, source)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Proper,
    /// The norm fails to be an isomorphism in a faithful degree.
    NotProper { degree: i32 },
    UnknownWithinWindow { window: usize },
}

#[derive(Debug, Clone)]
pub struct ProperReport {
    pub norm: ChainMap,
    pub verdict: Verdict,
    /// `char k ∤ |isotropy|` on every component.
    pub predicate: bool,
}

impl ProperReport {
    pub fn agrees(&self) -> bool {
        match self.verdict {
            Verdict::Proper => self.predicate,
            Verdict::NotProper { .. } => !self.predicate,
            Verdict::UnknownWithinWindow { .. } => true,
        }
    }
}

/// The norm `f_!1 -> f_*1` in degree 0.
pub fn norm_map(f: &GpdMap, field: FieldSpec, window: usize) -> ChainMap {
    let sp = ShriekPush::new(f, field, window);
    norm_with(&sp, field)
}

fn norm_with(sp: &ShriekPush, field: FieldSpec) -> ChainMap {
    let shr = Arc::new(sp.push(&unit(&sp.f.source, field)));
    let star = Arc::new(dual(&sp.f.target, &shr));
    let n0 = sp.norm_component(&shr);
    ChainMap::new(shr, star, BTreeMap::from([(0, n0)])).expect("norm is a chain map")
}

/// Decides whether the norm on the unit is a quasi-isomorphism, looking
/// only at degrees where both sides are faithful.
pub fn is_cohomologically_proper(f: &GpdMap, field: FieldSpec, window: usize) -> ProperReport {
    let sp = ShriekPush::new(f, field, window);
    let norm = norm_with(&sp, field);
    let predicate = sp.divisibility_predicate();
    let (shr, star) = (&norm.source, &norm.target);
    let lo = shr.valid_from().unwrap_or(shr.lo().min(star.lo()));
    let hi = star.valid_to().unwrap_or(shr.hi().max(star.hi()));
    let exact = shr.valid_from().is_none() && star.valid_to().is_none();
    let bad = (lo..=hi).find(|&n| {
        let (a, b) = (shr.homology_dims(n), star.homology_dims(n));
        a != b || norm.on_homology(n).iter().any(|m| m.rank() != m.rows())
    });
    let verdict = match bad {
        Some(degree) => Verdict::NotProper { degree },
        None if exact => Verdict::Proper,
        None => Verdict::UnknownWithinWindow { window },
    };
    ProperReport { norm, verdict, predicate }
}

/// One component of a homotopy pullback: the double coset of
/// `conjugator` over source components `(x_comp, y_comp)`.
#[derive(Debug, Clone)]
pub struct DoubleCoset {
    pub x_comp: usize,
    pub y_comp: usize,
    pub conjugator: usize,
    pub size: usize,
}

/// `X ×_Z Y` for `f: X -> Z`, `g: Y -> Z`. Objects over a pair of
/// components are `γ ∈ G`, with `(h, k)` acting as `γ ↦ g(k) γ f(h)⁻¹`;
/// isotropy is `{(h, k) : g(k) γ = γ f(h)}`.
#[derive(Debug, Clone)]
pub struct HtpyPullback {
    pub groupoid: Arc<FinGroupoid>,
    pub p1: GpdMap,
    pub p2: GpdMap,
    pub cosets: Vec<DoubleCoset>,
}

pub fn homotopy_pullback(f: &GpdMap, g: &GpdMap) -> Result<HtpyPullback, GrpError> {
    if *f.target != *g.target {
        return Err(GrpError::Contract("homotopy pullback needs a common target".into()));
    }
    let mut comps = Vec::new();
    let (mut c1, mut c2, mut h1, mut h2) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut cosets = Vec::new();
    for a in 0..f.source.len() {
        for b in 0..g.source.len() {
            if f.comp[a] != g.comp[b] {
                continue;
            }
            let big = f.target.group(f.comp[a]);
            let (hg, kg) = (f.source.group(a), g.source.group(b));
            let (phi, psi) = (&f.homs[a], &g.homs[b]);
            let mut seen = vec![false; big.order()];
            let mut total = 0;
            for gamma in big.elements() {
                if seen[gamma] {
                    continue;
                }
                let mut size = 0;
                for k in kg.elements() {
                    for h in hg.elements() {
                        let x = big.mul(big.mul(psi[k], gamma), big.inv(phi[h]));
                        if !seen[x] {
                            seen[x] = true;
                            size += 1;
                        }
                    }
                }
                total += size;
                let pairs: Vec<(usize, usize)> = hg
                    .elements()
                    .flat_map(|h| kg.elements().map(move |k| (h, k)))
                    .filter(|&(h, k)| big.mul(psi[k], gamma) == big.mul(gamma, phi[h]))
                    .collect();
                let idx = |p: (usize, usize)| pairs.iter().position(|&q| q == p).unwrap();
                let labels = pairs.iter().map(|&(h, k)| format!("({},{})", hg.label(h), kg.label(k))).collect();
                let table = pairs
                    .iter()
                    .map(|&(h, k)| pairs.iter().map(|&(h2, k2)| idx((hg.mul(h, h2), kg.mul(k, k2)))).collect())
                    .collect();
                comps.push(Arc::new(super::group::FinGroup::new(labels, table)?));
                c1.push(a);
                c2.push(b);
                h1.push(pairs.iter().map(|p| p.0).collect());
                h2.push(pairs.iter().map(|p| p.1).collect());
                cosets.push(DoubleCoset { x_comp: a, y_comp: b, conjugator: gamma, size });
            }
            if total != big.order() {
                return Err(GrpError::Contract("double cosets do not partition the group".into()));
            }
        }
    }
    let gpd = Arc::new(FinGroupoid::new(comps));
    let p1 = GpdMap::new(gpd.clone(), f.source.clone(), c1, h1)?;
    let p2 = GpdMap::new(gpd.clone(), g.source.clone(), c2, h2)?;
    Ok(HtpyPullback { groupoid: gpd, p1, p2, cosets })
}

#[derive(Debug, Clone)]
pub struct MackeyReport {
    /// `g^* f_! M`.
    pub lhs: Rep,
    /// `⊕ ind ∘ conj ∘ res M` over double cosets.
    pub rhs: Rep,
    /// An isomorphism `rhs -> lhs`, when one was found.
    pub iso: Option<RepMap>,
}

impl MackeyReport {
    pub fn holds(&self) -> bool {
        self.iso.is_some()
    }
}

/// Base change for subgroup inclusions `f: BH -> BG`, `g: BK -> BG` and a
/// representation `m` of `H`: compares `res_K ind_H M` with the double coset
/// sum through the canonical map `t ⊗ x ↦ tγ ⊗ x`.
pub fn mackey_check(f: &GpdMap, g: &GpdMap, m: &Rep, seed: u64) -> Result<MackeyReport, GrpError> {
    for (name, map) in [("f", f), ("g", g)] {
        if map.source.len() != 1 || map.target.len() != 1 || map.kernel(0).len() != 1 {
            return Err(GrpError::Contract(format!("{name} must be a subgroup inclusion of groups")));
        }
    }
    let field = m.field;
    let pb = homotopy_pullback(f, g)?;
    let xcar = GroupoidCarrier::new(f.source.clone());
    let kcar = GroupoidCarrier::new(g.source.clone());
    let a = Complex::concentrated(xcar, m.clone(), 0);
    let lhs = restrict(g, &shriek_push(f, &a, 0)).obj(0).clone();
    let rhs = shriek_push(&pb.p2, &restrict(&pb.p1, &a), 0).obj(0).clone();
    let (big, kg) = (f.target.group(0), g.source.group(0));
    let (greps, gwhich) = big.cosets(&f.image(0));
    let lift: BTreeMap<usize, usize> = f.homs[0].iter().enumerate().map(|(h, &x)| (x, h)).collect();
    let mall = GroupoidCarrier::new(f.source.clone()).elements(m, 0);
    let dm = m.dims[0];
    let mut phi = Matrix::zeros(field, lhs.dims[0], rhs.dims[0]);
    let mut col = 0;
    for (c, dc) in pb.cosets.iter().enumerate() {
        let (treps, _) = kg.cosets(&pb.p2.image(c));
        for &t in &treps {
            let x = big.mul(g.homs[0][t], dc.conjugator);
            let (i, l) = gwhich[x];
            phi.set_block(i * dm, col, &mall[lift[&l]]);
            col += dm;
        }
    }
    let _ = greps;
    let canonical = RepMap { comps: vec![phi] };
    let iso = if lhs.dims == rhs.dims && canonical.is_morphism(kcar.as_ref(), &rhs, &lhs) && canonical.is_iso() {
        Some(canonical)
    } else {
        search_iso(kcar.as_ref(), &rhs, &lhs, seed)
    };
    Ok(MackeyReport { lhs, rhs, iso })
}

/// Random combinations of a basis of `Hom(a, b)`, looking for an invertible one.
pub fn search_iso(car: &dyn Carrier, a: &Rep, b: &Rep, seed: u64) -> Option<RepMap> {
    use rand::SeedableRng;
    if a.dims != b.dims {
        return None;
    }
    let basis = crate::homlib::hom_space(car, a, b);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..32 {
        let coeffs = Matrix::random(a.field, basis.len(), 1, &mut rng).flatten();
        let m = basis.combine(a.field, a, b, &coeffs);
        if m.is_iso() {
            return Some(m);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grpfun::group::FinGroup;
    use crate::homlib::derived_hom;

    fn bg(g: FinGroup) -> Arc<FinGroupoid> {
        FinGroupoid::classifying(g)
    }

    fn profile(c: &Complex, degrees: std::ops::RangeInclusive<i32>) -> Vec<usize> {
        degrees.map(|n| c.betti_checked(n).unwrap()).collect()
    }

    #[test]
    fn identity_functors() {
        let x = bg(FinGroup::symmetric3());
        let id = GpdMap::identity(&x);
        let f = FieldSpec::prime(2).unwrap();
        let u = unit(&x, f);
        assert_eq!(restrict(&id, &u).dims(0), u.dims(0));
        assert_eq!(shriek_push(&id, &u, 3).dims(0), u.dims(0));
        assert_eq!(star_push(&id, &u, 3).dims(0), u.dims(0));
        let r = is_cohomologically_proper(&id, f, 3);
        assert_eq!(r.verdict, Verdict::Proper);
    }

    #[test]
    fn group_homology_and_cohomology() {
        let f2 = FieldSpec::prime(2).unwrap();
        let x = bg(FinGroup::cyclic(2));
        let pt = GpdMap::to_point(&x);
        let h = shriek_push(&pt, &unit(&x, f2), 3);
        assert_eq!(profile(&h, -2..=0), vec![1, 1, 1]);
        assert!(h.betti_checked(-3).is_err());

        let x3 = bg(FinGroup::cyclic(3));
        let pt3 = GpdMap::to_point(&x3);
        let q = FieldSpec::Rationals;
        let c = star_push(&pt3, &unit(&x3, q), 4);
        assert_eq!(c.betti_profile(), BTreeMap::from([(0, 1)]));
        let f3 = FieldSpec::prime(3).unwrap();
        let c = star_push(&pt3, &unit(&x3, f3), 4);
        assert_eq!(profile(&c, 0..=3), vec![1, 1, 1, 1]);
        assert!(matches!(c.betti_checked(4), Err(crate::homlib::HomError::TruncationInsufficient { .. })));
    }

    #[test]
    fn induction_and_restriction_in_s3() {
        let q = FieldSpec::Rationals;
        let s3 = Arc::new(FinGroup::symmetric3());
        let inc = GpdMap::subgroup(&s3, &[0, 1]).unwrap();
        let k = unit(&inc.source, q);
        let ind = shriek_push(&inc, &k, 0);
        assert_eq!(ind.dims(0), &[3]);
        // coinduction agrees with induction for a subgroup
        assert_eq!(star_push(&inc, &k, 0).dims(0), &[3]);
        // the standard representation: permutation rep minus the trivial summand
        let car = GroupoidCarrier::new(inc.target.clone());
        let std = car.rep_from(q, vec![2], |_, s| {
            let perm: [usize; 3] = [[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0], [2, 0, 1]][s];
            // basis e0 - e2, e1 - e2
            let v = |i: usize| -> [i64; 2] {
                match i {
                    0 => [1, 0],
                    1 => [0, 1],
                    _ => [0, 0],
                }
            };
            let mut m = Matrix::zeros(q, 2, 2);
            for j in 0..2 {
                let img = v(perm[j]);
                let base = v(perm[2]);
                m.set_int(0, j, img[0] - base[0]);
                m.set_int(1, j, img[1] - base[1]);
            }
            m
        });
        assert!(car.check_relations(&std).is_ok());
        let res = restrict_rep(&inc, &std);
        let t = &res.arrows[0];
        let id = Matrix::identity(q, 2);
        assert_eq!(t.sub(&id).rank(), 1);
        assert_eq!(t.add(&id).rank(), 1);
    }

    #[test]
    fn norm_and_properness() {
        let x = bg(FinGroup::cyclic(3));
        let pt = GpdMap::to_point(&x);
        let r = is_cohomologically_proper(&pt, FieldSpec::Rationals, 4);
        assert_eq!(r.verdict, Verdict::Proper);
        assert!(r.norm.is_quasi_iso());
        let r = is_cohomologically_proper(&pt, FieldSpec::prime(3).unwrap(), 4);
        assert!(matches!(r.verdict, Verdict::NotProper { .. }));
        assert!(r.agrees());
        for (g, p) in [(FinGroup::cyclic(2), 3), (FinGroup::cyclic(4), 2), (FinGroup::symmetric3(), 2), (FinGroup::symmetric3(), 5)] {
            let x = bg(g);
            let r = is_cohomologically_proper(&GpdMap::to_point(&x), FieldSpec::prime(p).unwrap(), 3);
            assert!(r.agrees(), "{:?}", r.verdict);
            assert!(!matches!(r.verdict, Verdict::UnknownWithinWindow { .. }));
        }
    }

    #[test]
    fn double_cosets_in_s3() {
        let s3 = Arc::new(FinGroup::symmetric3());
        let inc = GpdMap::subgroup(&s3, &[0, 1]).unwrap();
        let pb = homotopy_pullback(&inc, &inc).unwrap();
        let mut orders: Vec<usize> = pb.groupoid.components.iter().map(|g| g.order()).collect();
        orders.sort();
        assert_eq!(orders, vec![1, 2]);
        let triv = GpdMap::subgroup(&s3, &[0]).unwrap();
        let pb = homotopy_pullback(&triv, &triv).unwrap();
        assert_eq!(pb.groupoid.len(), 6);
        let id = GpdMap::identity(&inc.target);
        let pb = homotopy_pullback(&id, &id).unwrap();
        assert_eq!(pb.groupoid.len(), 1);
        assert_eq!(pb.groupoid.group(0).order(), 6);
        let other = GpdMap::identity(&FinGroupoid::classifying(FinGroup::cyclic(2)));
        assert!(homotopy_pullback(&inc, &other).is_err());
    }

    #[test]
    fn mackey_in_s3() {
        let s3 = Arc::new(FinGroup::symmetric3());
        let inc = GpdMap::subgroup(&s3, &[0, 1]).unwrap();
        let q = FieldSpec::Rationals;
        let car = GroupoidCarrier::new(inc.source.clone());
        let r = mackey_check(&inc, &inc, &car.trivial(q), 1).unwrap();
        assert_eq!(r.lhs.dims, vec![3]);
        assert!(r.holds());
        let f2 = FieldSpec::prime(2).unwrap();
        let sign = car.rep_from(f2, vec![2], |_, _| Matrix::from_rows(f2, &[vec![1, 1], vec![0, 1]]));
        assert!(mackey_check(&inc, &inc, &sign, 2).unwrap().holds());
        let id = GpdMap::identity(&inc.target);
        let tcar = GroupoidCarrier::new(inc.target.clone());
        let r = mackey_check(&id, &id, &tcar.trivial(q), 0).unwrap();
        assert_eq!(r.lhs, r.rhs);
    }

    #[test]
    fn adjunction_over_f2() {
        let f2 = FieldSpec::prime(2).unwrap();
        let x = bg(FinGroup::cyclic(2));
        let pt = GpdMap::to_point(&x);
        let w = 4;
        let k = unit(&x, f2);
        let kp = unit(&pt.target, f2);
        let lhs = derived_hom(&Arc::new(shriek_push(&pt, &k, w)), &kp, w).unwrap();
        let rhs = derived_hom(&Arc::new(k.clone()), &upper_shriek(&pt, &kp), w).unwrap();
        assert_eq!(lhs.valid_to(), Some(3));
        assert_eq!(profile(&lhs, 0..=3), profile(&rhs, 0..=3));
        assert_eq!(profile(&lhs, 0..=3), vec![1, 1, 1, 1]);
    }

    #[test]
    fn push_map_is_functorial() {
        let f3 = FieldSpec::prime(3).unwrap();
        let x = bg(FinGroup::symmetric3());
        let pt = GpdMap::to_point(&x);
        let car = GroupoidCarrier::new(x.clone());
        let reg = car.projective(0, f3);
        let a = Arc::new(Complex::concentrated(car.clone(), reg.clone(), 0));
        let b = Arc::new(unit(&x, f3));
        // augmentation k[G] -> k
        let aug = RepMap { comps: vec![Matrix::from_fn(f3, 1, 6, |_, _| f3.one())] };
        assert!(aug.is_morphism(car.as_ref(), &reg, b.obj(0)));
        let m = ChainMap::new(a.clone(), b.clone(), BTreeMap::from([(0, aug)])).unwrap();
        let sp = ShriekPush::new(&pt, f3, 3);
        let (pa, pb) = (Arc::new(sp.push(&a)), Arc::new(sp.push(&b)));
        let pm = sp.push_map(&m, pa.clone(), pb.clone());
        assert!(pm.validate().is_ok());
        assert_eq!(pa.valid_from(), Some(-2));
        assert_eq!(profile(&pa, -2..=0), vec![0, 0, 1]);
        assert_eq!(pm.on_homology(0)[0].rank(), 1);
        let sm = star_push_map(&pt, &m, Arc::new(star_push(&pt, &a, 3)), Arc::new(star_push(&pt, &b, 3)), 3);
        assert!(sm.validate().is_ok());
    }
}
