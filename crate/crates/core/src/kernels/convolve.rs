use super::product::Factors;
use super::{Kernel, KernelError};
use crate::exactalg::{FieldSpec, Matrix};
use crate::grpfun::{carrier_of, restrict, restrict_map, unit, vertexwise_resolution, FinGroupoid, GpdMap, GroupoidCarrier, ShriekPush};
use crate::homlib::{tensor_bracketed, tensor_rearrange, Bracket, ChainMap, Complex, RepMap};
use std::collections::BTreeMap;
use std::sync::Arc;

/// `Δ_!1` on `X × X`: at `(a, a)` the permutation module on `G_a` with
/// `(x, y)·e_g = e_{y g x⁻¹}`.
pub fn identity_kernel(x: &Arc<FinGroupoid>, field: FieldSpec) -> Kernel {
    let xx = Factors::new(&[x.clone(), x.clone()]);
    let car = GroupoidCarrier::new(xx.total().clone());
    let n = x.len();
    let dims: Vec<usize> = (0..n * n).map(|c| if c / n == c % n { x.group(c / n).order() } else { 0 }).collect();
    let rep = car.rep_from(field, dims.clone(), |c, s| {
        let (a, b) = (c / n, c % n);
        if a != b {
            return Matrix::zeros(field, 0, 0);
        }
        let g = x.group(a);
        let o = g.order();
        let (gx, gy) = (s / o, s % o);
        let mut m = Matrix::zeros(field, o, o);
        for h in g.elements() {
            m.set_int(g.mul(g.mul(gy, h), g.inv(gx)), h, 1);
        }
        m
    });
    Kernel { source: x.clone(), target: x.clone(), payload: Arc::new(Complex::concentrated(car, rep, 0)) }
}

/// `K1 ⋆ K2 = p13!(p12^*K1 ⊗ p23^*K2)` on `X × Z`, integrating out `Y`
/// against a resolution pulled back from `Y`.
pub struct Convolution {
    pub first: Kernel,
    pub second: Kernel,
    /// `[X, Y, Z]`.
    pub space: Factors,
    /// `p12^*K1 ⊗ p23^*K2`.
    pub input: Arc<Complex>,
    pub result: Kernel,
    /// The resolution of `1_Y` used, on `Y`.
    pub middle: Arc<Complex>,
    pub window: usize,
    p12: GpdMap,
    p23: GpdMap,
    p13: GpdMap,
    push: ShriekPush,
}

pub fn convolve(k1: &Kernel, k2: &Kernel, window: usize) -> Result<Convolution, KernelError> {
    if *k1.target != *k2.source {
        return Err(KernelError::Contract("kernels are not composable".into()));
    }
    let field = k1.field();
    if k2.field() != field {
        return Err(KernelError::Contract("kernels over different fields".into()));
    }
    let (x, y, z) = (&k1.source, &k1.target, &k2.target);
    let space = Factors::new(&[x.clone(), y.clone(), z.clone()]);
    let (_, p12) = space.projection(&[0, 1]);
    let (_, p23) = space.projection(&[1, 2]);
    let (_, p13) = space.projection(&[0, 2]);
    let (_, py) = space.projection(&[1]);
    let input = Arc::new(restrict(&p12, &k1.payload).tensor(&restrict(&p23, &k2.payload)));
    let p = field.characteristic();
    let needs: Vec<bool> = (0..y.len()).map(|b| p > 0 && y.group(b).order() as u64 % p == 0).collect();
    let (middle, aug_y) = vertexwise_resolution(y, field, window, &needs);
    let res = Arc::new(restrict(&py, &middle));
    let aug = restrict_map(&py, &aug_y, res.clone(), Arc::new(unit(space.total(), field)));
    let push = ShriekPush::with_resolution(&p13, field, res, aug);
    let payload = Arc::new(push.push(&input));
    let result = Kernel { source: x.clone(), target: z.clone(), payload };
    Ok(Convolution {
        first: k1.clone(),
        second: k2.clone(),
        space,
        input,
        result,
        middle,
        window,
        p12,
        p23,
        p13,
        push,
    })
}

impl Convolution {
    /// `R ⊗ input -> p13^*(K1 ⋆ K2)`.
    pub fn unit(&self) -> ChainMap {
        self.push.unit(&self.input, &self.result.payload)
    }

    pub fn p13(&self) -> &GpdMap {
        &self.p13
    }

    /// The augmentation of the pulled-back resolution in degree 0, per
    /// vertex of `X × Y × Z`.
    fn augmentation0(&self) -> RepMap {
        self.push.augmentation().comp(0)
    }

    fn resolution(&self) -> &Arc<Complex> {
        self.push.resolution()
    }
}

/// `f ⋆ g: K1 ⋆ K2 -> K1' ⋆ K2'` for `f: K1 -> K1'`, `g: K2 -> K2'`.
pub fn convolve_maps(from: &Convolution, to: &Convolution, f: &ChainMap, g: &ChainMap) -> ChainMap {
    let pull = |p: &GpdMap, m: &ChainMap| {
        let (s, t) = (Arc::new(restrict(p, &m.source)), Arc::new(restrict(p, &m.target)));
        restrict_map(p, m, s, t)
    };
    let m = pull(&from.p12, f).tensor(&pull(&from.p23, g), from.input.clone(), to.input.clone());
    from.push.push_map(&m, from.result.payload.clone(), to.result.payload.clone())
}

/// The map `C -> D` through which `v: T -> p^*D` factors along the
/// degreewise surjection `u: T -> p^*C`.
pub fn factor_through(
    u: &ChainMap,
    v: &ChainMap,
    p: &GpdMap,
    c: &Arc<Complex>,
    d: &Arc<Complex>,
) -> Result<ChainMap, KernelError> {
    let field = c.field();
    let mut comps = BTreeMap::new();
    for n in c.degrees() {
        let (uc, vc) = (u.comp(n), v.comp(n));
        let mut out = Vec::new();
        for a in 0..p.target.len() {
            let fiber: Vec<usize> = (0..p.source.len()).filter(|&s| p.comp[s] == a).collect();
            let (rc, rd) = (c.dims(n)[a], d.dims(n)[a]);
            let us: Vec<&Matrix> = fiber.iter().map(|&s| &uc.comps[s]).collect();
            let vs: Vec<&Matrix> = fiber.iter().map(|&s| &vc.comps[s]).collect();
            let ua = Matrix::hstack(field, rc, &us);
            let va = Matrix::hstack(field, rd, &vs);
            let right = ua
                .solve(&Matrix::identity(field, rc))
                .map_err(|_| KernelError::Contract(format!("not surjective in degree {n}")))?;
            let w = va.mul(&right);
            if w.mul(&ua) != va {
                return Err(KernelError::Contract(format!("map does not factor in degree {n}")));
            }
            out.push(w);
        }
        comps.insert(n, RepMap { comps: out });
    }
    Ok(ChainMap::new(c.clone(), d.clone(), comps)?)
}

/// Column offset of `R^0 ⊗ input^n` inside `(R ⊗ input)^n` at vertex `v`.
fn degree_zero_offset(r: &Complex, input: &Complex, n: i32, v: usize) -> usize {
    r.degrees()
        .filter(|&p| p < 0 && input.degrees().contains(&(n - p)))
        .map(|p| r.dims(p)[v] * input.dims(n - p)[v])
        .sum()
}

/// Builds `ε ⊗ M: R ⊗ input -> p13^*K` from per-vertex blocks `M`.
fn augmented_map(
    conv: &Convolution,
    k: &Kernel,
    block: impl Fn(i32, usize) -> Option<Matrix>,
) -> Result<ChainMap, KernelError> {
    let u = conv.unit();
    let staged = u.source.clone();
    let target = Arc::new(restrict(&conv.p13, &k.payload));
    let field = k.field();
    let res = conv.resolution();
    let eps = conv.augmentation0();
    let mut comps = BTreeMap::new();
    for n in staged.degrees() {
        let mut out = Vec::new();
        for v in 0..conv.space.total().len() {
            let mut m = Matrix::zeros(field, target.dims(n)[v], staged.dims(n)[v]);
            if res.degrees().contains(&0) && res.dims(0)[v] > 0 {
                if let Some(b) = block(n, v) {
                    let off = degree_zero_offset(res, &conv.input, n, v);
                    m.set_block(0, off, &eps.comps[v].kron(&b));
                }
            }
            out.push(m);
        }
        comps.insert(n, RepMap { comps: out });
    }
    Ok(ChainMap::new(staged, target, comps)?)
}

/// `λ: I_X ⋆ K -> K`, `e_g ⊗ v ↦ (g⁻¹, 1)·v`.
pub fn left_unitor(conv: &Convolution) -> Result<ChainMap, KernelError> {
    let k = &conv.second;
    let (x, y) = (&k.source, &k.target);
    let kcar = carrier_of(&k.space().total().clone());
    let kcar = kcar.as_any().downcast_ref::<GroupoidCarrier>().expect("groupoid carrier");
    let sp = &conv.space;
    let lam = augmented_map(conv, k, |n, v| {
        let ds = sp.digits(v);
        let (a, b, c) = (ds[0], ds[1], ds[2]);
        if a != b || !k.payload.degrees().contains(&n) {
            return None;
        }
        let kc = a * y.len() + c;
        let all = kcar.elements(k.payload.obj(n), kc);
        let (g, oy) = (x.group(a), y.group(c).order());
        let ey = y.group(c).identity();
        let parts: Vec<&Matrix> = g.elements().map(|h| &all[g.inv(h) * oy + ey]).collect();
        Some(Matrix::hstack(k.field(), k.payload.dims(n)[kc], &parts))
    })?;
    factor_through(&conv.unit(), &lam, &conv.p13, &conv.result.payload, &k.payload)
}

/// `ρ: K ⋆ I_Y -> K`, `v ⊗ e_g ↦ (1, g)·v`.
pub fn right_unitor(conv: &Convolution) -> Result<ChainMap, KernelError> {
    let k = &conv.first;
    let (x, y) = (&k.source, &k.target);
    let kcar = carrier_of(&k.space().total().clone());
    let kcar = kcar.as_any().downcast_ref::<GroupoidCarrier>().expect("groupoid carrier");
    let sp = &conv.space;
    let field = k.field();
    let rho = augmented_map(conv, k, |n, v| {
        let ds = sp.digits(v);
        let (a, b, c) = (ds[0], ds[1], ds[2]);
        if b != c || !k.payload.degrees().contains(&n) {
            return None;
        }
        let kc = a * y.len() + b;
        let dk = k.payload.dims(n)[kc];
        let all = kcar.elements(k.payload.obj(n), kc);
        let g = y.group(b);
        let (o, ex) = (g.order(), x.group(a).identity());
        let mut m = Matrix::zeros(field, dk, dk * o);
        for j in 0..dk {
            for h in g.elements() {
                m.set_block(0, j * o + h, &all[ex * o + h].col(j));
            }
        }
        Some(m)
    })?;
    factor_through(&conv.unit(), &rho, &conv.p13, &conv.result.payload, &k.payload)
}

/// `(K1 ⋆ K2) ⋆ K3 ≅ K1 ⋆ (K2 ⋆ K3)`, induced by the symmetric monoidal
/// structure on the five-fold product `R_Y ⊗ K1 ⊗ K2 ⊗ R_Z ⊗ K3` over
/// `X × Y × Z × W`.
pub struct Associator {
    pub inner_left: Convolution,
    pub left: Convolution,
    pub inner_right: Convolution,
    pub right: Convolution,
    pub forward: ChainMap,
    pub backward: ChainMap,
}

pub fn associator(k1: &Kernel, k2: &Kernel, k3: &Kernel, window: usize) -> Result<Associator, KernelError> {
    let inner_left = convolve(k1, k2, window)?;
    let left = convolve(&inner_left.result, k3, window)?;
    let inner_right = convolve(k2, k3, window)?;
    let right = convolve(k1, &inner_right.result, window)?;
    let big = Factors::new(&[k1.source.clone(), k1.target.clone(), k2.target.clone(), k3.target.clone()]);
    let pull = |keep: &[usize], a: &Complex| restrict(&big.projection(keep).1, a);
    let ry = pull(&[1], &inner_left.middle);
    let rz = pull(&[2], &inner_right.middle);
    let f1 = pull(&[0, 1], &k1.payload);
    let f2 = pull(&[1, 2], &k2.payload);
    let f3 = pull(&[2, 3], &k3.payload);
    let fs = [&ry, &f1, &f2, &rz, &f3];
    use Bracket::Leaf as L;
    let bl = Bracket::node(L(3), Bracket::node(Bracket::node(L(0), Bracket::node(L(1), L(2))), L(4)));
    let br = Bracket::node(L(0), Bracket::node(L(1), Bracket::node(L(3), Bracket::node(L(2), L(4)))));
    let tl = tensor_bracketed(&fs, &bl);
    let tr = tensor_bracketed(&fs, &br);
    let pull_map = |keep: &[usize], m: &ChainMap| {
        let p = big.projection(keep).1;
        restrict_map(&p, m, Arc::new(restrict(&p, &m.source)), Arc::new(restrict(&p, &m.target)))
    };
    // left side: R_Z ⊗ ((R_Y ⊗ (K1 ⊗ K2)) ⊗ K3) -> R_Z ⊗ (K12 ⊗ K3) -> K_L
    let u1 = pull_map(&[0, 1, 2], &inner_left.unit());
    let k3a = Arc::new(f3.clone());
    let mid_l = u1.tensor(
        &ChainMap::identity(&k3a),
        Arc::new(u1.source.tensor(&k3a)),
        Arc::new(u1.target.tensor(&k3a)),
    );
    let rza = Arc::new(rz.clone());
    let m1 = ChainMap::identity(&rza).tensor(&mid_l, tl.clone(), Arc::new(rz.tensor(&mid_l.target)));
    let pi_l = pull_map(&[0, 2, 3], &left.unit()).compose(&m1);
    // right side: R_Y ⊗ (K1 ⊗ (R_Z ⊗ (K2 ⊗ K3))) -> R_Y ⊗ (K1 ⊗ K23) -> K_R
    let u1r = pull_map(&[1, 2, 3], &inner_right.unit());
    let k1a = Arc::new(f1.clone());
    let mid_r = ChainMap::identity(&k1a).tensor(
        &u1r,
        Arc::new(k1a.tensor(&u1r.source)),
        Arc::new(k1a.tensor(&u1r.target)),
    );
    let rya = Arc::new(ry.clone());
    let m1r = ChainMap::identity(&rya).tensor(&mid_r, tr.clone(), Arc::new(ry.tensor(&mid_r.target)));
    let pi_r = pull_map(&[0, 1, 3], &right.unit()).compose(&m1r);
    let to_r = tensor_rearrange(&fs, &bl, &br);
    let to_l = tensor_rearrange(&fs, &br, &bl);
    let (_, pxw) = big.projection(&[0, 3]);
    let forward = factor_through(&pi_l, &pi_r.compose(&to_r), &pxw, &left.result.payload, &right.result.payload)?;
    let backward = factor_through(&pi_r, &pi_l.compose(&to_l), &pxw, &right.result.payload, &left.result.payload)?;
    Ok(Associator { inner_left, left, inner_right, right, forward, backward })
}

/// `A ↦ p2!(p1^*A ⊗ K)` for `A` on the source of `K`.
pub fn realize(k: &Kernel, a: &Complex, window: usize) -> Result<Complex, KernelError> {
    let c = convolve(&Kernel::into(&k.source, a)?, k, window)?;
    c.result.as_object()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::FieldSpec;
    use crate::grpfun::{FinGroup, GpdMap};

    fn bg(n: usize) -> Arc<FinGroupoid> {
        FinGroupoid::classifying(FinGroup::cyclic(n))
    }

    fn regular_kernel(x: &Arc<FinGroupoid>, y: &Arc<FinGroupoid>, field: FieldSpec) -> Kernel {
        let s = super::super::Span::new(
            Factors::new(&[x.clone(), y.clone()]).projection(&[0]).1,
            Factors::new(&[x.clone(), y.clone()]).projection(&[1]).1,
        )
        .unwrap();
        s.kernel(field, 3).unwrap()
    }

    #[test]
    fn identity_kernel_of_bc2_is_the_group_algebra() {
        let f = FieldSpec::prime(2).unwrap();
        let i = identity_kernel(&bg(2), f);
        assert_eq!(i.payload.dims(0), &[2]);
        let diag = GpdMap::new(
            bg(2),
            i.space().total().clone(),
            vec![0],
            vec![vec![0, 3]],
        )
        .unwrap();
        let pushed = ShriekPush::new(&diag, f, 2).push(&unit(&bg(2), f));
        let car = carrier_of(i.space().total());
        assert!(crate::grpfun::search_iso(car.as_ref(), pushed.obj(0), i.payload.obj(0), 0).is_some());
    }

    #[test]
    fn unitors_are_quasi_isomorphisms() {
        for f in [FieldSpec::Rationals, FieldSpec::prime(2).unwrap()] {
            let (x, y) = (bg(2), bg(3));
            let k = regular_kernel(&x, &y, f);
            let cl = convolve(&identity_kernel(&x, f), &k, 3).unwrap();
            let l = left_unitor(&cl).unwrap();
            assert!(l.is_quasi_iso_from(cl.result.payload.valid_from().unwrap_or(i32::MIN)));
            let cr = convolve(&k, &identity_kernel(&y, f), 3).unwrap();
            let r = right_unitor(&cr).unwrap();
            assert!(r.is_quasi_iso());
        }
    }

    #[test]
    fn associator_is_a_quasi_isomorphism() {
        for f in [FieldSpec::Rationals, FieldSpec::prime(2).unwrap()] {
            let (x, y, z) = (bg(2), FinGroupoid::point(), bg(2));
            let k1 = regular_kernel(&x, &y, f);
            let k2 = regular_kernel(&y, &z, f);
            let k3 = regular_kernel(&z, &x, f);
            let a = associator(&k1, &k2, &k3, 3).unwrap();
            let from = a.left.result.payload.valid_from().unwrap_or(i32::MIN);
            assert!(a.forward.is_quasi_iso_from(from));
            assert!(a.backward.compose(&a.forward).sub(&ChainMap::identity(&a.left.result.payload)).is_zero());
        }
    }

    #[test]
    fn realize_along_a_span_pushes_forward() {
        let f = FieldSpec::Rationals;
        let x = bg(3);
        let k = Kernel::out_of(&x, &unit(&x, f)).unwrap();
        let r = realize(&k, &unit(&x, f), 2).unwrap();
        assert_eq!(r.betti_profile(), BTreeMap::from([(0, 1)]));
    }
}
