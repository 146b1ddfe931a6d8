use super::gen::{gen_groupoid, gen_pieces, gen_poset, gen_rep, gen_sheaf, rng};
use crate::exactalg::{FieldSpec, Matrix};
use crate::grpfun::{carrier_of as gcarrier, FinGroupoid, GroupoidCarrier};
use crate::homlib::{ChainMap, Complex, RepMap};
use crate::kernels::{associator, convolve, identity_kernel, left_unitor, right_unitor, Kernel};
use crate::posetsheaf::{
    carrier_of, classify_subset, excision_map, extend_by_zero, kunneth_map, pull, restrict,
    unit_to_push, verify_compactification_independence, FinPoset, MonotoneMap,
};
use rand::Rng;
use serde_json::json;
use std::collections::BTreeMap;
use std::sync::Arc;

/// A generated input that can propose smaller versions of itself.
pub trait Case: Sized {
    fn candidates(&self) -> Vec<Self>;
    fn describe(&self) -> serde_json::Value;
}

/// Greedy shrinking: take the first smaller candidate that still fails,
/// until none does.
pub fn shrink<C: Case>(mut case: C, fails: impl Fn(&C) -> bool) -> C {
    'outer: loop {
        for c in case.candidates() {
            if fails(&c) {
                case = c;
                continue 'outer;
            }
        }
        return case;
    }
}

pub(crate) fn faithful_qiso(m: &ChainMap) -> bool {
    let from = [m.source.valid_from(), m.target.valid_from()].into_iter().flatten().max().unwrap_or(i32::MIN);
    m.is_quasi_iso_from(from)
}

/// The identity comparison between two complexes with equal stalk data;
/// `ChainMap::new` checks it commutes with everything.
pub(crate) fn identity_comparison(a: Complex, b: Complex) -> Result<ChainMap, String> {
    let (a, b) = (Arc::new(a), Arc::new(b));
    let field = a.field();
    let mut comps = BTreeMap::new();
    let lo = a.lo().min(b.lo());
    let hi = a.hi().max(b.hi());
    for n in lo..=hi {
        if a.dims(n) != b.dims(n) {
            return Err(format!("stalk dimensions differ in degree {n}: {:?} vs {:?}", a.dims(n), b.dims(n)));
        }
        if a.degrees().contains(&n) {
            comps.insert(n, RepMap { comps: a.dims(n).iter().map(|&d| Matrix::identity(field, d)).collect() });
        }
    }
    ChainMap::new(a, b, comps).map_err(|e| format!("identity is not a chain map: {e}"))
}

fn sum(pieces: &[Complex]) -> Complex {
    let refs: Vec<&Complex> = pieces.iter().collect();
    Complex::direct_sum(&refs)
}

fn positions(of: &[usize], inside: &[usize]) -> Vec<usize> {
    of.iter().map(|x| inside.iter().position(|y| y == x).unwrap()).collect()
}

/// A poset with marked subsets, a mask on `Y × {0 < 1}` selecting a base
/// change source, and complexes on the poset given as summands.
#[derive(Debug, Clone)]
pub struct PosetCase {
    pub poset: Arc<FinPoset>,
    pub subsets: Vec<Vec<usize>>,
    pub mask: Vec<bool>,
    pub objects: Vec<Vec<Complex>>,
}

impl PosetCase {
    pub fn object(&self, i: usize) -> Complex {
        sum(&self.objects[i])
    }

    fn without(&self, x: usize) -> PosetCase {
        let keep: Vec<usize> = (0..self.poset.len()).filter(|&y| y != x).collect();
        let sub = Arc::new(self.poset.subposet(&keep));
        let reindex = |s: &Vec<usize>| s.iter().filter(|&&y| y != x).map(|&y| if y > x { y - 1 } else { y }).collect();
        let mask = self.mask.iter().enumerate().filter(|(k, _)| k / 2 != x).map(|(_, &b)| b).collect();
        let objects = self
            .objects
            .iter()
            .map(|ps| ps.iter().map(|p| restrict(&self.poset, &keep, p)).collect())
            .collect();
        PosetCase { poset: sub, subsets: self.subsets.iter().map(reindex).collect(), mask, objects }
    }

    /// `Y' ⊂ Y × {0 < 1}` and the projection to `Y`.
    pub fn base_change(&self) -> MonotoneMap {
        let two = FinPoset::from_labels(&["0", "1"], &[("0", "1")]).unwrap();
        let prod = self.poset.product(&two);
        let sel: Vec<usize> = (0..prod.len()).filter(|&k| self.mask[k]).collect();
        let src = Arc::new(prod.subposet(&sel));
        MonotoneMap::new(src, self.poset.clone(), sel.iter().map(|k| k / 2).collect()).expect("projection is monotone")
    }
}

impl Case for PosetCase {
    fn candidates(&self) -> Vec<PosetCase> {
        let mut out = Vec::new();
        for (i, ps) in self.objects.iter().enumerate() {
            if ps.len() > 1 {
                for k in 0..ps.len() {
                    let mut c = self.clone();
                    c.objects[i].remove(k);
                    out.push(c);
                }
            }
        }
        if self.poset.len() > 1 {
            out.extend((0..self.poset.len()).map(|x| self.without(x)));
        }
        out
    }

    fn describe(&self) -> serde_json::Value {
        let p = &self.poset;
        let names = |s: &Vec<usize>| s.iter().map(|&i| p.label(i).to_string()).collect::<Vec<_>>();
        json!({
            "poset": p.to_file(),
            "subsets": self.subsets.iter().map(names).collect::<Vec<_>>(),
            "objects": self.objects.iter().map(|ps| ps.iter().map(describe_complex).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }
}

fn describe_complex(c: &Complex) -> serde_json::Value {
    let stalks: BTreeMap<String, Vec<usize>> = c.degrees().map(|n| (n.to_string(), c.dims(n).to_vec())).collect();
    json!({ "stalk_dims": stalks, "betti": c.betti_profile() })
}

fn random_subset(p: &FinPoset, r: &mut impl Rng) -> Vec<usize> {
    (0..p.len()).filter(|_| r.gen_ratio(1, 3)).collect()
}

/// Generates a poset case; `kinds` says which subsets to draw (`'U'` open,
/// `'Z'` closed).
pub fn gen_poset_case(seed: u64, field: FieldSpec, max_poset: usize, max_dim: usize, kinds: &str, objects: usize) -> PosetCase {
    let mut r = rng(seed);
    let n = r.gen_range(1..=max_poset);
    let poset = Arc::new(gen_poset(r.gen(), n).unwrap());
    let subsets = kinds
        .chars()
        .map(|k| {
            let s = random_subset(&poset, &mut r);
            if k == 'U' {
                poset.up_closure(&s)
            } else {
                poset.down_closure(&s)
            }
        })
        .collect();
    let mask = (0..2 * n).map(|_| r.gen_bool(0.6)).collect();
    let car = carrier_of(&poset);
    let objects = (0..objects).map(|_| gen_pieces(r.gen(), &car, field, max_dim).unwrap()).collect();
    PosetCase { poset, subsets, mask, objects }
}

/// `cone(j_! j^* A -> A) -> i_* i^* A` is a quasi-isomorphism.
pub fn excision(c: &PosetCase) -> Result<(), String> {
    let a = Arc::new(c.object(0));
    let m = excision_map(&c.poset, &c.subsets[0], &a).map_err(|e| e.to_string())?;
    if m.is_quasi_iso() {
        Ok(())
    } else {
        Err("excision comparison is not a quasi-isomorphism".into())
    }
}

fn sub(p: &Arc<FinPoset>, s: &[usize]) -> Arc<FinPoset> {
    Arc::new(p.subposet(s))
}

/// `g^* j_! A = j'_! g'^* A` (open) or `g^* i_* A = i'_* g'^* A` (closed),
/// with `A` on the subset; for closed subsets also `i_! A -> Ri_* A` on
/// both sides.
pub fn base_change(c: &PosetCase) -> Result<(), String> {
    let y = &c.poset;
    let s = &c.subsets[0];
    let g = c.base_change();
    let yp = &g.source;
    let a = restrict(y, s, &c.object(0));
    let sp = g.preimage(s);
    let (ssub, spsub) = (sub(y, s), sub(yp, &sp));
    let gs = MonotoneMap::new(spsub.clone(), ssub, sp.iter().map(|&k| s.iter().position(|&x| x == g.map[k]).unwrap()).collect())
        .map_err(|e| e.to_string())?;
    let ext = |amb: &Arc<FinPoset>, sub: &[usize], a: &Complex| extend_by_zero(amb, sub, a).map_err(|e| e.to_string());
    let lhs = pull(&g, &ext(y, s, &a)?);
    let ga = pull(&gs, &a);
    let rhs = ext(yp, &sp, &ga)?;
    identity_comparison(lhs, rhs)?;
    if y.is_down_set(s) {
        for (amb, sset, obj) in [(y, s, &a), (yp, &sp, &ga)] {
            let inc = MonotoneMap::inclusion(amb, sset);
            let (_, unit) = unit_to_push(&inc, &Arc::new(ext(amb, sset, obj)?));
            if !faithful_qiso(&unit) {
                return Err("i_! -> Ri_* is not a quasi-isomorphism".into());
            }
        }
    }
    Ok(())
}

/// `j_!(A ⊗ j^*B) = j_!A ⊗ B` for the marked subset.
pub fn projection(c: &PosetCase) -> Result<(), String> {
    let y = &c.poset;
    let s = &c.subsets[0];
    let (a, b) = (restrict(y, s, &c.object(0)), c.object(1));
    let lhs = extend_by_zero(y, s, &a.tensor(&restrict(y, s, &b))).map_err(|e| e.to_string())?;
    let rhs = extend_by_zero(y, s, &a).map_err(|e| e.to_string())?.tensor(&b);
    identity_comparison(lhs, rhs).map(|_| ())
}

/// Extends a chain map on a locally closed subset by zero.
fn extend_map(y: &Arc<FinPoset>, s: &[usize], m: &ChainMap) -> Result<ChainMap, String> {
    let src = Arc::new(extend_by_zero(y, s, &m.source).map_err(|e| e.to_string())?);
    let tgt = Arc::new(extend_by_zero(y, s, &m.target).map_err(|e| e.to_string())?);
    let field = m.source.field();
    let comps = src
        .degrees()
        .map(|n| {
            let inner = m.comp(n);
            let comps = (0..y.len())
                .map(|x| match s.iter().position(|&z| z == x) {
                    Some(i) => inner.comps[i].clone(),
                    None => Matrix::zeros(field, 0, 0),
                })
                .collect();
            (n, RepMap { comps })
        })
        .collect();
    ChainMap::new(src, tgt, comps).map_err(|e| e.to_string())
}

/// For `j: U -> Y` open, `g: Z -> Y` closed and `A` on `U ∩ Z`: the two
/// sides `j_! Rg'_* A` and `Rg_* j'_! A` both receive quasi-isomorphisms
/// from the extension by zero of `A`, so the natural map between them is
/// one.
pub fn condition_four(c: &PosetCase) -> Result<(), String> {
    let y = &c.poset;
    let (u, z) = (&c.subsets[0], &c.subsets[1]);
    let uz: Vec<usize> = u.iter().copied().filter(|x| z.contains(x)).collect();
    let a = restrict(y, &uz, &c.object(0));
    let usub = sub(y, u);
    let uz_in_u = positions(&uz, u);
    let gp = MonotoneMap::inclusion(&usub, &uz_in_u);
    let (_, unit_u) = unit_to_push(&gp, &Arc::new(extend_by_zero(&usub, &uz_in_u, &a).map_err(|e| e.to_string())?));
    let left = extend_map(y, u, &unit_u)?;
    let e = Arc::new(extend_by_zero(y, &uz, &a).map_err(|e| e.to_string())?);
    let g = MonotoneMap::inclusion(y, z);
    let (rhs, right) = unit_to_push(&g, &e);
    if !faithful_qiso(&left) || !faithful_qiso(&right) {
        return Err("a comparison from the extension by zero is not a quasi-isomorphism".into());
    }
    let lhs = &left.target;
    for n in lhs.lo().min(rhs.lo())..=lhs.hi().max(rhs.hi()) {
        if lhs.homology_dims(n) != rhs.homology_dims(n) {
            return Err(format!("homology differs in degree {n}"));
        }
    }
    Ok(())
}

/// For a union of components `C`, `j_! A -> Rj_* A` is a quasi-isomorphism.
pub fn clopen(c: &PosetCase) -> Result<(), String> {
    let y = &c.poset;
    let s = &c.subsets[0];
    let a = restrict(y, s, &c.object(0));
    let inc = MonotoneMap::inclusion(y, s);
    let ja = Arc::new(extend_by_zero(y, s, &a).map_err(|e| e.to_string())?);
    let (_, unit) = unit_to_push(&inc, &ja);
    if faithful_qiso(&unit) {
        Ok(())
    } else {
        Err("j_! -> Rj_* is not a quasi-isomorphism on a clopen subset".into())
    }
}

/// Disjoint union of two random posets, the first marked.
pub fn gen_clopen_case(seed: u64, field: FieldSpec, max_poset: usize, max_dim: usize) -> PosetCase {
    let mut r = rng(seed);
    let n1 = r.gen_range(1..max_poset.max(2));
    let n2 = r.gen_range(1..=(max_poset - n1).max(1));
    let (p1, p2) = (gen_poset(r.gen(), n1).unwrap(), gen_poset(r.gen(), n2).unwrap());
    let labels = (0..n1 + n2).map(|i| format!("p{i}")).collect();
    let mut rel: Vec<(usize, usize)> = p1.covers().to_vec();
    rel.extend(p2.covers().iter().map(|&(a, b)| (a + n1, b + n1)));
    let poset = Arc::new(FinPoset::new(labels, &rel).unwrap());
    let objects = vec![gen_pieces(r.gen(), &carrier_of(&poset), field, max_dim).unwrap()];
    PosetCase { poset, subsets: vec![(0..n1).collect()], mask: vec![false; 2 * (n1 + n2)], objects }
}

/// Every pair of presentations `U ∩ Z` of the marked locally closed subset
/// gives the same extension.
pub fn compactification(c: &PosetCase) -> Result<(), String> {
    let y = &c.poset;
    let (u, z) = (&c.subsets[0], &c.subsets[1]);
    let s: Vec<usize> = u.iter().copied().filter(|x| z.contains(x)).collect();
    if s.is_empty() {
        return Ok(());
    }
    let imm = classify_subset(y, &s).map_err(|e| e.to_string())?;
    let a = restrict(y, &imm.subset, &c.object(0));
    let fs = imm.factorizations();
    for f1 in fs.iter().take(3) {
        for f2 in fs.iter().take(3) {
            let (_, ok) = verify_compactification_independence(&imm, f1, f2, &a).map_err(|e| e.to_string())?;
            if !ok {
                return Err("two presentations give different extensions".into());
            }
        }
    }
    Ok(())
}

/// Sheaves `F` on `X`, `G` on `Y` (degree 0).
#[derive(Debug, Clone)]
pub struct KunnethCase {
    pub x: Arc<FinPoset>,
    pub y: Arc<FinPoset>,
    pub f: Complex,
    pub g: Complex,
}

impl Case for KunnethCase {
    fn candidates(&self) -> Vec<KunnethCase> {
        let mut out = Vec::new();
        for side in 0..2 {
            let p = if side == 0 { &self.x } else { &self.y };
            if p.len() < 2 {
                continue;
            }
            for drop in 0..p.len() {
                let keep: Vec<usize> = (0..p.len()).filter(|&v| v != drop).collect();
                let q = Arc::new(p.subposet(&keep));
                let mut c = self.clone();
                if side == 0 {
                    c.f = restrict(&self.x, &keep, &self.f);
                    c.x = q;
                } else {
                    c.g = restrict(&self.y, &keep, &self.g);
                    c.y = q;
                }
                out.push(c);
            }
        }
        out
    }

    fn describe(&self) -> serde_json::Value {
        json!({
            "x": self.x.to_file(), "y": self.y.to_file(),
            "f": describe_complex(&self.f), "g": describe_complex(&self.g),
        })
    }
}

pub fn gen_kunneth_case(seed: u64, field: FieldSpec, max_side: usize, max_dim: usize) -> KunnethCase {
    let mut r = rng(seed);
    let x = Arc::new(gen_poset(r.gen(), r.gen_range(1..=max_side)).unwrap());
    let y = Arc::new(gen_poset(r.gen(), r.gen_range(1..=max_side)).unwrap());
    let f = gen_sheaf(r.gen(), &x, field, max_dim).unwrap().complex(0);
    let g = gen_sheaf(r.gen(), &y, field, max_dim).unwrap().complex(0);
    KunnethCase { x, y, f, g }
}

pub fn kunneth(c: &KunnethCase) -> Result<(), String> {
    let m = kunneth_map(&c.x, &c.y, &c.f, &c.g).map_err(|e| e.to_string())?;
    if !m.is_quasi_iso() {
        return Err("cross product is not a quasi-isomorphism".into());
    }
    Ok(())
}

/// Three composable kernels `X -> Y -> Z -> W` and an object on `X`, each
/// as summands.
#[derive(Debug, Clone)]
pub struct KernelCase {
    pub spaces: Vec<Arc<FinGroupoid>>,
    pub kernels: Vec<Vec<Complex>>,
    pub object: Vec<Complex>,
    pub window: usize,
}

impl Case for KernelCase {
    fn candidates(&self) -> Vec<KernelCase> {
        let mut out = Vec::new();
        for i in 0..self.kernels.len() {
            if self.kernels[i].len() > 1 {
                for k in 0..self.kernels[i].len() {
                    let mut c = self.clone();
                    c.kernels[i].remove(k);
                    out.push(c);
                }
            }
        }
        if self.object.len() > 1 {
            for k in 0..self.object.len() {
                let mut c = self.clone();
                c.object.remove(k);
                out.push(c);
            }
        }
        out
    }

    fn describe(&self) -> serde_json::Value {
        json!({
            "spaces": self.spaces.iter().map(|x| x.components.iter().map(|g| g.order()).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "kernels": self.kernels.iter().map(|ps| ps.iter().map(describe_complex).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "object": self.object.iter().map(describe_complex).collect::<Vec<_>>(),
        })
    }
}

pub fn gen_kernel_case(seed: u64, field: FieldSpec, max_order: usize, window: usize) -> KernelCase {
    let mut r = rng(seed);
    let spaces: Vec<Arc<FinGroupoid>> = (0..4).map(|_| gen_groupoid(r.gen(), max_order)).collect();
    let kernels = (0..3)
        .map(|i| {
            let xy = Arc::new(spaces[i].product(&spaces[i + 1]));
            vec![Complex::concentrated(gcarrier(&xy), gen_rep(r.gen(), &xy, field, 2).unwrap(), r.gen_range(-1..=0))]
        })
        .collect();
    let x = &spaces[0];
    let object = vec![
        Complex::concentrated(gcarrier(x), gen_rep(r.gen(), x, field, 2).unwrap(), 0),
        Complex::concentrated(gcarrier(x), GroupoidCarrier::new(x.clone()).trivial(field), 1),
    ];
    KernelCase { spaces, kernels, object, window }
}

/// Unitors and the associator are quasi-isomorphisms, and realization is
/// functorial (the associator of `(A, K1, K2)`).
pub fn kernel_calculus(c: &KernelCase) -> Result<(), String> {
    let e = |e: crate::kernels::KernelError| e.to_string();
    let ks: Vec<Kernel> = (0..3)
        .map(|i| Kernel::new(c.spaces[i].clone(), c.spaces[i + 1].clone(), sum(&c.kernels[i])))
        .collect::<Result<_, _>>()
        .map_err(e)?;
    let field = ks[0].field();
    let w = c.window;
    let cl = convolve(&identity_kernel(&c.spaces[0], field), &ks[0], w).map_err(e)?;
    if !faithful_qiso(&left_unitor(&cl).map_err(e)?) {
        return Err("left unitor is not a quasi-isomorphism".into());
    }
    let cr = convolve(&ks[0], &identity_kernel(&c.spaces[1], field), w).map_err(e)?;
    if !faithful_qiso(&right_unitor(&cr).map_err(e)?) {
        return Err("right unitor is not a quasi-isomorphism".into());
    }
    let a = associator(&ks[0], &ks[1], &ks[2], w).map_err(e)?;
    if !faithful_qiso(&a.forward) {
        return Err("associator is not a quasi-isomorphism".into());
    }
    let obj = Kernel::into(&c.spaces[0], &sum(&c.object)).map_err(e)?;
    let r = associator(&obj, &ks[0], &ks[1], w).map_err(e)?;
    if !faithful_qiso(&r.forward) {
        return Err("realization is not functorial".into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axioms::{run_suite, Suite, SuiteConfig};
    use std::time::Instant;

    #[test]
    fn shrinking_keeps_failure() {
        let q = FieldSpec::Rationals;
        // false whenever the poset has three or more elements
        let prop = |c: &PosetCase| c.poset.len() < 3;
        let case = (0..).map(|s| gen_poset_case(s, q, 6, 2, "U", 1)).find(|c| !prop(c)).unwrap();
        let small = shrink(case, |c| !prop(c));
        assert_eq!(small.poset.len(), 3);
        assert_eq!(small.objects[0].len(), 1);
        assert_eq!(small.mask.len(), 6);
        assert!(small.subsets[0].iter().all(|&x| x < 3));
    }

    #[test]
    #[ignore]
    fn suite_timings() {
        for field in [FieldSpec::Rationals, FieldSpec::prime(2).unwrap()] {
            let cfg = SuiteConfig::new(7, field);
            for s in Suite::ALL {
                let t = Instant::now();
                let out = run_suite(&cfg, s);
                eprintln!("{field} {:<18} {:>7.2}s {:?}", s.name(), t.elapsed().as_secs_f64(), out);
            }
        }
    }
}
