use super::group::FinGroup;
use super::GrpError;
use crate::exactalg::{FieldSpec, Matrix, Quotient};
use crate::homlib::{Carrier, Quiver, Rep, RepMap};
use serde::{Deserialize, Serialize};
use std::any::Any;
use std::collections::BTreeMap;
use std::sync::Arc;

/// A finite groupoid up to equivalence: one group per component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinGroupoid {
    pub components: Vec<Arc<FinGroup>>,
}

impl FinGroupoid {
    pub fn new(components: Vec<Arc<FinGroup>>) -> FinGroupoid {
        FinGroupoid { components }
    }

    /// `BG`.
    pub fn classifying(g: FinGroup) -> Arc<FinGroupoid> {
        Arc::new(FinGroupoid::new(vec![Arc::new(g)]))
    }

    pub fn point() -> Arc<FinGroupoid> {
        FinGroupoid::classifying(FinGroup::trivial())
    }

    pub fn discrete(n: usize) -> Arc<FinGroupoid> {
        let t = Arc::new(FinGroup::trivial());
        Arc::new(FinGroupoid::new(vec![t; n]))
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn group(&self, c: usize) -> &Arc<FinGroup> {
        &self.components[c]
    }

    /// Components `(a, b)` at index `a * other.len() + b`.
    pub fn product(&self, other: &FinGroupoid) -> FinGroupoid {
        let mut comps = Vec::new();
        for a in &self.components {
            for b in &other.components {
                comps.push(Arc::new(a.product(b)));
            }
        }
        FinGroupoid::new(comps)
    }
}

/// A strict functor of groupoids: a component function and one
/// homomorphism per source component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GpdMap {
    pub source: Arc<FinGroupoid>,
    pub target: Arc<FinGroupoid>,
    pub comp: Vec<usize>,
    pub homs: Vec<Vec<usize>>,
}

impl GpdMap {
    pub fn new(
        source: Arc<FinGroupoid>,
        target: Arc<FinGroupoid>,
        comp: Vec<usize>,
        homs: Vec<Vec<usize>>,
    ) -> Result<GpdMap, GrpError> {
        if comp.len() != source.len() || homs.len() != source.len() {
            return Err(GrpError::Invalid("one component image and homomorphism per source component".into()));
        }
        for (c, (&d, h)) in comp.iter().zip(&homs).enumerate() {
            if d >= target.len() {
                return Err(GrpError::Invalid(format!("component {c} maps to missing component {d}")));
            }
            if !source.group(c).is_hom(target.group(d), h) {
                return Err(GrpError::Invalid(format!("component {c}: not a homomorphism")));
            }
        }
        Ok(GpdMap { source, target, comp, homs })
    }

    pub fn identity(x: &Arc<FinGroupoid>) -> GpdMap {
        let homs = x.components.iter().map(|g| g.elements().collect()).collect();
        GpdMap { source: x.clone(), target: x.clone(), comp: (0..x.len()).collect(), homs }
    }

    pub fn to_point(x: &Arc<FinGroupoid>) -> GpdMap {
        let homs = x.components.iter().map(|g| vec![0; g.order()]).collect();
        GpdMap { source: x.clone(), target: FinGroupoid::point(), comp: vec![0; x.len()], homs }
    }

    /// `BH -> BG` for a subgroup given by its elements.
    pub fn subgroup(g: &Arc<FinGroup>, elements: &[usize]) -> Result<GpdMap, GrpError> {
        let mut elems = elements.to_vec();
        elems.sort_unstable();
        elems.dedup();
        if g.generated(&elems) != elems {
            return Err(GrpError::Invalid("elements do not form a subgroup".into()));
        }
        let labels = elems.iter().map(|&e| g.label(e).to_string()).collect();
        let pos = |x: usize| elems.binary_search(&x).unwrap();
        let table = elems.iter().map(|&a| elems.iter().map(|&b| pos(g.mul(a, b))).collect()).collect();
        let h = FinGroup::new(labels, table)?;
        let target = Arc::new(FinGroupoid::new(vec![g.clone()]));
        GpdMap::new(FinGroupoid::classifying(h), target, vec![0], vec![elems])
    }

    /// `B(src) -> B(tgt)` along a homomorphism.
    pub fn from_hom(src: &Arc<FinGroup>, tgt: &Arc<FinGroup>, hom: Vec<usize>) -> Result<GpdMap, GrpError> {
        GpdMap::new(
            Arc::new(FinGroupoid::new(vec![src.clone()])),
            Arc::new(FinGroupoid::new(vec![tgt.clone()])),
            vec![0],
            vec![hom],
        )
    }

    /// The inclusion of component `c` as `BG_c -> X`.
    pub fn component(x: &Arc<FinGroupoid>, c: usize) -> GpdMap {
        let g = x.group(c).clone();
        GpdMap {
            source: Arc::new(FinGroupoid::new(vec![g.clone()])),
            target: x.clone(),
            comp: vec![c],
            homs: vec![g.elements().collect()],
        }
    }

    /// Projections of `x × y` to its factors.
    pub fn projections(x: &Arc<FinGroupoid>, y: &Arc<FinGroupoid>) -> (Arc<FinGroupoid>, GpdMap, GpdMap) {
        let xy = Arc::new(x.product(y));
        let (mut c1, mut c2, mut h1, mut h2) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for a in 0..x.len() {
            for b in 0..y.len() {
                let m = y.group(b).order();
                let n = x.group(a).order() * m;
                c1.push(a);
                c2.push(b);
                h1.push((0..n).map(|i| i / m).collect());
                h2.push((0..n).map(|i| i % m).collect());
            }
        }
        let p1 = GpdMap { source: xy.clone(), target: x.clone(), comp: c1, homs: h1 };
        let p2 = GpdMap { source: xy.clone(), target: y.clone(), comp: c2, homs: h2 };
        (xy, p1, p2)
    }

    /// `self ∘ g`.
    pub fn compose(&self, g: &GpdMap) -> Result<GpdMap, GrpError> {
        if *g.target != *self.source {
            return Err(GrpError::Contract("composable maps must share the middle groupoid".into()));
        }
        let comp = g.comp.iter().map(|&c| self.comp[c]).collect();
        let homs = g.homs.iter().zip(&g.comp).map(|(h, &c)| h.iter().map(|&x| self.homs[c][x]).collect()).collect();
        Ok(GpdMap { source: g.source.clone(), target: self.target.clone(), comp, homs })
    }

    /// Kernel of the homomorphism on component `c`.
    pub fn kernel(&self, c: usize) -> Vec<usize> {
        let e = self.target.group(self.comp[c]).identity();
        self.source.group(c).elements().filter(|&x| self.homs[c][x] == e).collect()
    }

    /// Sorted image of the homomorphism on component `c`.
    pub fn image(&self, c: usize) -> Vec<usize> {
        let mut im = self.homs[c].clone();
        im.sort_unstable();
        im.dedup();
        im
    }
}

/// Representations of a finite groupoid: one vertex per component, one
/// loop per group generator, with the group relations imposed.
#[derive(Debug)]
pub struct GroupoidCarrier {
    gpd: Arc<FinGroupoid>,
    quiver: Quiver,
    /// First arrow index of each component.
    offsets: Vec<usize>,
    key: String,
}

impl GroupoidCarrier {
    pub fn new(gpd: Arc<FinGroupoid>) -> Arc<GroupoidCarrier> {
        let mut arrows = Vec::new();
        let mut offsets = Vec::new();
        for (c, g) in gpd.components.iter().enumerate() {
            offsets.push(arrows.len());
            arrows.extend(g.generators().iter().map(|_| (c, c)));
        }
        let quiver = Quiver { vertices: gpd.len(), arrows };
        let key = if quiver.arrows.is_empty() {
            format!("discrete:{}", quiver.vertices)
        } else {
            let tables: Vec<String> = gpd
                .components
                .iter()
                .map(|g| {
                    g.elements()
                        .map(|a| g.elements().map(|b| g.mul(a, b).to_string()).collect::<Vec<_>>().join(","))
                        .collect::<Vec<_>>()
                        .join(";")
                })
                .collect();
            format!("groupoid:{}", tables.join("|"))
        };
        Arc::new(GroupoidCarrier { gpd, quiver, offsets, key })
    }

    pub fn groupoid(&self) -> &Arc<FinGroupoid> {
        &self.gpd
    }

    /// The generator matrices of component `c`.
    pub fn gens<'a>(&self, rep: &'a Rep, c: usize) -> &'a [Matrix] {
        let n = self.gpd.group(c).generators().len();
        &rep.arrows[self.offsets[c]..self.offsets[c] + n]
    }

    /// `ρ(g)` for every element of component `c`.
    pub fn elements(&self, rep: &Rep, c: usize) -> Vec<Matrix> {
        self.gpd.group(c).element_matrices(rep.field, rep.dims[c], self.gens(rep, c))
    }

    /// Builds a representation from a matrix for each `(component, element)`;
    /// only generators are queried.
    pub fn rep_from(&self, field: FieldSpec, dims: Vec<usize>, act: impl Fn(usize, usize) -> Matrix) -> Rep {
        let mut arrows = Vec::new();
        for (c, g) in self.gpd.components.iter().enumerate() {
            arrows.extend(g.generators().iter().map(|&s| act(c, s)));
        }
        Rep { field, dims, arrows }
    }

    /// The trivial one-dimensional representation on every component.
    pub fn trivial(&self, field: FieldSpec) -> Rep {
        self.rep_from(field, vec![1; self.gpd.len()], |_, _| Matrix::identity(field, 1))
    }

    /// Contragredient: `ρ*(g) = ρ(g⁻¹)ᵀ`.
    pub fn dual_rep(&self, rep: &Rep) -> Rep {
        let all: Vec<Vec<Matrix>> = (0..self.gpd.len()).map(|c| self.elements(rep, c)).collect();
        self.rep_from(rep.field, rep.dims.clone(), |c, s| all[c][self.gpd.group(c).inv(s)].transpose())
    }

    fn rad_span(&self, rep: &Rep, c: usize) -> Matrix {
        let field = rep.field;
        let d = rep.dims[c];
        let id = Matrix::identity(field, d);
        let parts: Vec<Matrix> = self.elements(rep, c).iter().map(|m| m.sub(&id)).collect();
        let refs: Vec<&Matrix> = parts.iter().collect();
        Matrix::hstack(field, d, &refs)
    }
}

impl Carrier for GroupoidCarrier {
    fn key(&self) -> String {
        self.key.clone()
    }

    fn quiver(&self) -> &Quiver {
        &self.quiver
    }

    fn check_relations(&self, rep: &Rep) -> Result<(), String> {
        for (c, g) in self.gpd.components.iter().enumerate() {
            let gens = self.gens(rep, c);
            let all = self.elements(rep, c);
            for x in g.elements() {
                for (i, &s) in g.generators().iter().enumerate() {
                    if gens[i].mul(&all[x]) != all[g.mul(s, x)] {
                        return Err(format!(
                            "component {c}: ρ({})ρ({}) ≠ ρ({})",
                            g.label(s),
                            g.label(x),
                            g.label(g.mul(s, x))
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    fn all_projective(&self, field: FieldSpec) -> bool {
        let p = field.characteristic();
        p == 0 || self.gpd.components.iter().all(|g| g.order() as u64 % p != 0)
    }

    /// The regular representation `k[G_v]`, basis `e_g`, `s·e_g = e_{sg}`.
    fn projective(&self, v: usize, field: FieldSpec) -> Rep {
        let g = self.gpd.group(v);
        let mut dims = vec![0; self.gpd.len()];
        dims[v] = g.order();
        self.rep_from(field, dims.clone(), |c, s| {
            if c != v {
                return Matrix::zeros(field, dims[c], dims[c]);
            }
            let mut m = Matrix::zeros(field, g.order(), g.order());
            for x in g.elements() {
                m.set(g.mul(s, x), x, &field.one());
            }
            m
        })
    }

    fn projective_map(&self, v: usize, target: &Rep, vector: &Matrix) -> RepMap {
        let field = target.field;
        let all = self.elements(target, v);
        let comps = (0..self.gpd.len())
            .map(|c| {
                if c == v {
                    let cols: Vec<Matrix> = all.iter().map(|m| m.mul(vector)).collect();
                    let refs: Vec<&Matrix> = cols.iter().collect();
                    Matrix::hstack(field, target.dims[v], &refs)
                } else {
                    Matrix::zeros(field, target.dims[c], 0)
                }
            })
            .collect();
        RepMap { comps }
    }

    fn cover_generators(&self, rep: &Rep) -> Vec<(usize, Matrix)> {
        let field = rep.field;
        let p = field.characteristic();
        let mut out = Vec::new();
        for c in 0..self.gpd.len() {
            let d = rep.dims[c];
            if d == 0 {
                continue;
            }
            if p > 0 && self.gpd.group(c).is_p_group(p) {
                // the radical is the augmentation ideal; lift a basis of the top
                let q = Quotient::of(field, d, &self.rad_span(rep, c));
                out.extend((0..q.dim()).map(|j| (c, q.section.col(j))));
                continue;
            }
            let all = self.elements(rep, c);
            let mut span = Matrix::zeros(field, d, 0);
            let id = Matrix::identity(field, d);
            for j in 0..d {
                let x = id.col(j);
                if span.spans(&x) {
                    continue;
                }
                let orbit: Vec<Matrix> = all.iter().map(|m| m.mul(&x)).collect();
                let mut parts: Vec<&Matrix> = vec![&span];
                parts.extend(orbit.iter());
                span = Matrix::hstack(field, d, &parts).column_basis();
                out.push((c, x));
            }
        }
        out
    }

    /// `Hom_k(M_v, N_v)` with `g·φ = ρ_N(g) φ ρ_M(g)⁻¹`.
    fn internal_hom(&self, m: &Rep, n: &Rep) -> Rep {
        let field = m.field;
        let mall: Vec<Vec<Matrix>> = (0..self.gpd.len()).map(|c| self.elements(m, c)).collect();
        let nall: Vec<Vec<Matrix>> = (0..self.gpd.len()).map(|c| self.elements(n, c)).collect();
        let dims = m.dims.iter().zip(&n.dims).map(|(a, b)| a * b).collect();
        self.rep_from(field, dims, |c, s| {
            let inv = self.gpd.group(c).inv(s);
            nall[c][s].kron(&mall[c][inv].transpose())
        })
    }

    fn internal_hom_map(&self, _m: &Rep, _n: &Rep, _m2: &Rep, _n2: &Rep, f: &RepMap, g: &RepMap) -> RepMap {
        RepMap { comps: f.comps.iter().zip(&g.comps).map(|(f, g)| g.kron(&f.transpose())).collect() }
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

/// Representation file for a single group.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GpdRepFile {
    pub group_ref: String,
    pub field: FieldSpec,
    pub dim: usize,
    pub matrices: BTreeMap<String, Vec<Vec<String>>>,
}

/// Loads a representation of `BG`, checking `ρ(gh) = ρ(g)ρ(h)` and `ρ(e) = 1`
/// on every listed element.
pub fn rep_from_file(g: &Arc<FinGroup>, f: &GpdRepFile) -> Result<(Arc<GroupoidCarrier>, Rep), GrpError> {
    let field = f.field;
    let mut mats: Vec<Option<Matrix>> = vec![None; g.order()];
    for (label, entries) in &f.matrices {
        let i = g
            .labels()
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| GrpError::Invalid(format!("matrices: unknown element {label:?}")))?;
        let m = Matrix::from_strings(field, f.dim, f.dim, entries)
            .map_err(|e| GrpError::Invalid(format!("matrices.{label}: {e}")))?;
        mats[i] = Some(m);
    }
    let e = g.identity();
    let id = Matrix::identity(field, f.dim);
    match &mats[e] {
        Some(m) if *m != id => return Err(GrpError::Invalid("ρ(e) is not the identity".into())),
        _ => mats[e] = Some(id),
    }
    for &s in g.generators() {
        if mats[s].is_none() {
            return Err(GrpError::Invalid(format!("matrices: missing generator {:?}", g.label(s))));
        }
    }
    let car = GroupoidCarrier::new(Arc::new(FinGroupoid::new(vec![g.clone()])));
    let rep = car.rep_from(field, vec![f.dim], |_, s| mats[s].clone().unwrap());
    car.check_relations(&rep).map_err(GrpError::Invalid)?;
    let all = car.elements(&rep, 0);
    for (x, m) in mats.iter().enumerate() {
        if let Some(m) = m {
            if *m != all[x] {
                return Err(GrpError::Invalid(format!("ρ({}) is inconsistent with the generators", g.label(x))));
            }
        }
    }
    Ok((car, rep))
}

pub fn rep_to_file(car: &GroupoidCarrier, rep: &Rep, group_ref: &str) -> GpdRepFile {
    let g = car.groupoid().group(0);
    let all = car.elements(rep, 0);
    GpdRepFile {
        group_ref: group_ref.to_string(),
        field: rep.field,
        dim: rep.dims[0],
        matrices: g.elements().map(|x| (g.label(x).to_string(), all[x].to_strings())).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homlib::{projective_replacement, Complex};

    #[test]
    fn regular_rep_is_a_rep() {
        let car = GroupoidCarrier::new(FinGroupoid::classifying(FinGroup::symmetric3()));
        let f = FieldSpec::prime(3).unwrap();
        let p = car.projective(0, f);
        assert!(car.check_relations(&p).is_ok());
        let h = car.internal_hom(&p, &car.trivial(f));
        assert!(car.check_relations(&h).is_ok());
    }

    #[test]
    fn c2_resolution_over_f2_is_periodic() {
        let car: Arc<dyn Carrier> = GroupoidCarrier::new(FinGroupoid::classifying(FinGroup::cyclic(2)));
        let f = FieldSpec::prime(2).unwrap();
        let k = GroupoidCarrier::new(FinGroupoid::classifying(FinGroup::cyclic(2))).trivial(f);
        let c = Arc::new(Complex::concentrated(car, k, 0));
        let r = projective_replacement(&c, 3);
        for n in -3..=0 {
            assert_eq!(r.complex.dims(n), &[2]);
        }
        assert_eq!(r.valid_from, Some(-2));
        assert!(r.map.is_quasi_iso_from(-2));
    }

    #[test]
    fn file_round_trip() {
        let g = Arc::new(FinGroup::symmetric3());
        let f = FieldSpec::Rationals;
        // permutation representation on three letters
        let car = GroupoidCarrier::new(Arc::new(FinGroupoid::new(vec![g.clone()])));
        let perm = |s: usize| {
            let p: [usize; 3] = [[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0], [2, 0, 1]][s];
            let mut m = Matrix::zeros(f, 3, 3);
            for (i, &j) in p.iter().enumerate() {
                m.set(j, i, &f.one());
            }
            m
        };
        let rep = car.rep_from(f, vec![3], |_, s| perm(s));
        assert!(car.check_relations(&rep).is_ok());
        let file = rep_to_file(&car, &rep, "S3");
        let (_, back) = rep_from_file(&g, &file).unwrap();
        assert_eq!(back, rep);
        let mut bad = file.clone();
        bad.matrices.insert("(012)".into(), Matrix::identity(f, 3).to_strings());
        assert!(rep_from_file(&g, &bad).is_err());
    }
}
