use super::carrier::PosetCarrier;
use super::poset::{FinPoset, MonotoneMap};
use super::PosetError;
use crate::exactalg::Matrix;
use crate::homlib::{Carrier, ChainMap, Complex, Discrete, Rep, RepMap};
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

pub fn carrier_of(p: &Arc<FinPoset>) -> Arc<dyn Carrier> {
    PosetCarrier::new(p.clone())
}

fn pc(p: &Arc<FinPoset>) -> Arc<PosetCarrier> {
    PosetCarrier::new(p.clone())
}

/// `f^*`: stalks at `x` are stalks at `f(x)`.
pub fn pull(f: &MonotoneMap, a: &Complex) -> Complex {
    let (xs, ys) = (pc(&f.source), pc(&f.target));
    let pull_rep = |r: &Rep| {
        let dims = f.map.iter().map(|&y| r.dims[y]).collect();
        xs.rep_from(r.field, dims, |s, t| ys.transport(r, f.map[s], f.map[t]))
    };
    a.map_reps(xs.clone(), pull_rep, |_, _, m| RepMap { comps: f.map.iter().map(|&y| m.comps[y].clone()).collect() })
}

pub fn pull_map(f: &MonotoneMap, m: &ChainMap, source: Arc<Complex>, target: Arc<Complex>) -> ChainMap {
    m.map_comps(source, target, |_, c| RepMap { comps: f.map.iter().map(|&y| c.comps[y].clone()).collect() })
}

/// Whether `subset` is convex, i.e. locally closed.
pub fn is_locally_closed(p: &FinPoset, subset: &[usize]) -> bool {
    let mut up = p.up_closure(subset);
    up.retain(|x| p.down_closure(subset).contains(x));
    let mut s = subset.to_vec();
    s.sort();
    s.dedup();
    up == s
}

/// Extension by zero from a locally closed subset; `a` lives on the induced
/// subposet with elements in the order of `subset`.
pub fn extend_by_zero(ambient: &Arc<FinPoset>, subset: &[usize], a: &Complex) -> Result<Complex, PosetError> {
    if !is_locally_closed(ambient, subset) {
        return Err(PosetError::NotLocallyClosed(describe(ambient, subset)));
    }
    let sub = pc(&Arc::new(ambient.subposet(subset)));
    let big = pc(ambient);
    let pos: Vec<Option<usize>> = (0..ambient.len()).map(|x| subset.iter().position(|&s| s == x)).collect();
    let ext = |r: &Rep| {
        let dims = pos.iter().map(|p| p.map_or(0, |i| r.dims[i])).collect::<Vec<_>>();
        big.rep_from(r.field, dims.clone(), |s, t| match (pos[s], pos[t]) {
            (Some(i), Some(j)) => sub.transport(r, i, j),
            _ => Matrix::zeros(r.field, dims[t], dims[s]),
        })
    };
    Ok(a.map_reps(big.clone(), ext, |src, tgt, m| {
        let _ = (src, tgt);
        RepMap {
            comps: pos
                .iter()
                .enumerate()
                .map(|(x, p)| match p {
                    Some(i) => m.comps[*i].clone(),
                    None => {
                        let _ = x;
                        Matrix::zeros(a.field(), 0, 0)
                    }
                })
                .collect(),
        }
    }))
}

pub fn describe(p: &FinPoset, subset: &[usize]) -> String {
    let names: Vec<&str> = subset.iter().map(|&i| p.label(i)).collect();
    format!("{{{}}}", names.join(", "))
}

/// Restriction to a subset (pullback along the inclusion).
pub fn restrict(ambient: &Arc<FinPoset>, subset: &[usize], a: &Complex) -> Complex {
    pull(&MonotoneMap::inclusion(ambient, subset), a)
}

/// Normalized cochains of the nerve: `C^p = ⊕_{x_0 < ... < x_p} A(x_p)`,
/// coboundary `Σ (-1)^i` over faces, the last face transported along
/// `x_p -> x_{p+1}`; total differential `δ + (-1)^p d_A`.
#[derive(Debug, Clone)]
pub struct Cochains {
    pub chains: Vec<Vec<Vec<usize>>>,
    index: Vec<HashMap<Vec<usize>, usize>>,
    /// `(p, q, chain) -> offset` inside total degree `p + q`.
    offsets: HashMap<(usize, i32, usize), usize>,
    pub lo: i32,
    pub hi: i32,
}

impl Cochains {
    pub fn offset(&self, p: usize, q: i32, chain: &[usize]) -> Option<usize> {
        let c = *self.index.get(p)?.get(chain)?;
        self.offsets.get(&(p, q, c)).copied()
    }
}

/// `RΓ(subset, A)` as a complex of vector spaces with its layout.
pub fn sections_on(space: &Arc<FinPoset>, subset: &[usize], a: &Complex) -> (Complex, Cochains) {
    let car = pc(space);
    let field = a.field();
    let chains = space.chains(subset);
    let index: Vec<HashMap<Vec<usize>, usize>> =
        chains.iter().map(|cs| cs.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect()).collect();
    let maxp = chains.len() as i32 - 1;
    let (lo, hi) = (a.lo(), a.hi() + maxp.max(0));
    let mut offsets = HashMap::new();
    let mut totals = BTreeMap::new();
    for n in lo..=hi {
        let mut off = 0;
        for (p, cs) in chains.iter().enumerate() {
            let q = n - p as i32;
            for (ci, c) in cs.iter().enumerate() {
                offsets.insert((p, q, ci), off);
                off += a.dims(q)[*c.last().unwrap()];
            }
        }
        totals.insert(n, off);
    }
    let layout = Cochains { chains, index, offsets, lo, hi };
    if a.is_zero() || subset.is_empty() {
        return (Complex::zero_complex(Discrete::vect(), field), layout);
    }
    let objects: Vec<Rep> = (lo..=hi).map(|n| Rep { field, dims: vec![totals[&n]], arrows: Vec::new() }).collect();
    let diffs = (lo..hi)
        .map(|n| {
            let mut m = Matrix::zeros(field, totals[&(n + 1)], totals[&n]);
            for (p, cs) in layout.chains.iter().enumerate() {
                let q = n - p as i32;
                let aq = a.obj(q);
                if aq.total_dim() == 0 {
                    continue;
                }
                let dq = a.d(q);
                let sign = if p % 2 == 0 { 1 } else { -1 };
                for (ci, c) in cs.iter().enumerate() {
                    let src = layout.offsets[&(p, q, ci)];
                    let x = *c.last().unwrap();
                    // d_A part
                    let tgt = layout.offsets[&(p, q + 1, ci)];
                    m.add_block(tgt, src, &dq.comps[x].scale_int(sign));
                }
                // δ part: for each (p+1)-chain, pull back from its faces
                if let Some(next) = layout.chains.get(p + 1) {
                    for (ti, t) in next.iter().enumerate() {
                        let tgt = layout.offsets[&(p + 1, q, ti)];
                        for i in 0..t.len() {
                            let mut face = t.clone();
                            face.remove(i);
                            let fi = layout.index[p][&face];
                            let src = layout.offsets[&(p, q, fi)];
                            let s = if i % 2 == 0 { 1 } else { -1 };
                            let blk = if i == t.len() - 1 {
                                car.transport(aq, t[i - 1], t[i]).scale_int(s)
                            } else {
                                Matrix::identity(field, aq.dims[t[t.len() - 1]]).scale_int(s)
                            };
                            m.add_block(tgt, src, &blk);
                        }
                    }
                }
            }
            RepMap { comps: vec![m] }
        })
        .collect();
    let c = Complex::new(Discrete::vect(), field, lo, objects, diffs).expect("cochain complex").with_valid_from(a.valid_from());
    (c, layout)
}

/// `RΓ(X, A)`.
pub fn derived_sections(space: &Arc<FinPoset>, a: &Complex) -> Complex {
    let all: Vec<usize> = (0..space.len()).collect();
    sections_on(space, &all, a).0
}

/// `RΓ_c` of `a` on a locally closed subset, computed in the given ambient
/// compactification as `RΓ(ambient, j_! a)`.
pub fn compact_support_sections(ambient: &Arc<FinPoset>, subset: &[usize], a: &Complex) -> Result<Complex, PosetError> {
    Ok(derived_sections(ambient, &extend_by_zero(ambient, subset, a)?))
}

/// `Rf_*`: the stalk at `y` is `RΓ(f^{-1}(U_y), A)`, assembled along the
/// restrictions for `y <= y'`.
pub fn derived_push(f: &MonotoneMap, a: &Complex) -> Complex {
    let (x, y) = (&f.source, &f.target);
    let ycar = pc(y);
    let field = a.field();
    let pre: Vec<Vec<usize>> = (0..y.len()).map(|v| f.preimage(&y.up(v))).collect();
    let locals: Vec<(Complex, Cochains)> = pre.iter().map(|s| sections_on(x, s, a)).collect();
    let nonzero: Vec<&Complex> = locals.iter().map(|l| &l.0).filter(|c| !c.is_zero()).collect();
    if nonzero.is_empty() {
        return Complex::zero_complex(ycar, field);
    }
    let lo = nonzero.iter().map(|c| c.lo()).min().unwrap();
    let hi = nonzero.iter().map(|c| c.hi()).max().unwrap();
    let restriction = |n: i32, s: usize, t: usize| -> Matrix {
        let (cs, ls) = (&locals[s].0, &locals[s].1);
        let (ct, lt) = (&locals[t].0, &locals[t].1);
        let mut m = Matrix::zeros(field, ct.total_dim(n), cs.total_dim(n));
        if m.rows() == 0 {
            return m;
        }
        for (p, chains) in lt.chains.iter().enumerate() {
            let q = n - p as i32;
            for c in chains {
                let d = a.dims(q)[*c.last().unwrap()];
                if d == 0 {
                    continue;
                }
                let (to, from) = (lt.offset(p, q, c).unwrap(), ls.offset(p, q, c).unwrap());
                m.set_block(to, from, &Matrix::identity(field, d));
            }
        }
        m
    };
    let objects: Vec<Rep> = (lo..=hi)
        .map(|n| {
            let dims = locals.iter().map(|l| l.0.total_dim(n)).collect();
            ycar.rep_from(field, dims, |s, t| restriction(n, s, t))
        })
        .collect();
    let diffs = (lo..hi).map(|n| RepMap { comps: locals.iter().map(|l| l.0.d(n).comps[0].clone()).collect() }).collect();
    Complex::new(ycar, field, lo, objects, diffs).expect("pushforward complex").with_valid_from(a.valid_from())
}

/// The unit `G -> Rf_* f^* G`: at `y`, into the zero-chains `(x)` of
/// `f^{-1}(U_y)` by generization `G_y -> G_{f(x)}`.
pub fn unit_to_push(f: &MonotoneMap, g: &Arc<Complex>) -> (Arc<Complex>, ChainMap) {
    let ycar = pc(&f.target);
    let pulled = pull(f, g);
    let push = Arc::new(derived_push(f, &pulled));
    let field = g.field();
    let pre: Vec<Vec<usize>> = (0..f.target.len()).map(|v| f.preimage(&f.target.up(v))).collect();
    let layouts: Vec<Cochains> = pre.iter().map(|s| sections_on(&f.source, s, &pulled).1).collect();
    let comps = g
        .degrees()
        .map(|n| {
            let comps = (0..f.target.len())
                .map(|y| {
                    let mut m = Matrix::zeros(field, push.dims(n)[y], g.dims(n)[y]);
                    for &x in &pre[y] {
                        if let Some(o) = layouts[y].offset(0, n, &[x]) {
                            m.set_block(o, 0, &ycar.transport(g.obj(n), y, f.map[x]));
                        }
                    }
                    m
                })
                .collect();
            (n, RepMap { comps })
        })
        .collect();
    let map = ChainMap::new(g.clone(), push.clone(), comps).expect("unit of pullback and pushforward");
    (push, map)
}

/// The counit `j_! j^* A -> A` for an open subset.
pub fn counit_open(ambient: &Arc<FinPoset>, open: &[usize], a: &Arc<Complex>) -> Result<(Arc<Complex>, ChainMap), PosetError> {
    let ja = Arc::new(extend_by_zero(ambient, open, &restrict(ambient, open, a))?);
    let comps = a
        .degrees()
        .map(|n| {
            let comps = (0..ambient.len())
                .map(|x| {
                    if open.contains(&x) {
                        Matrix::identity(a.field(), a.dims(n)[x])
                    } else {
                        Matrix::zeros(a.field(), a.dims(n)[x], 0)
                    }
                })
                .collect();
            (n, RepMap { comps })
        })
        .collect();
    let map = ChainMap::new(ja.clone(), a.clone(), comps)?;
    Ok((ja, map))
}

/// The comparison `cone(j_! j^* A -> A) -> i_* i^* A` for an open subset
/// and its closed complement.
pub fn excision_map(ambient: &Arc<FinPoset>, open: &[usize], a: &Arc<Complex>) -> Result<ChainMap, PosetError> {
    let closed: Vec<usize> = (0..ambient.len()).filter(|x| !open.contains(x)).collect();
    let (_, counit) = counit_open(ambient, open, a)?;
    let (cone, _, _) = counit.cone();
    let cone = Arc::new(cone);
    let ii = Arc::new(extend_by_zero(ambient, &closed, &restrict(ambient, &closed, a))?);
    let field = a.field();
    let comps = cone
        .degrees()
        .map(|n| {
            let comps = (0..ambient.len())
                .map(|x| {
                    let c = cone.dims(n)[x];
                    if closed.contains(&x) {
                        // cone^n_x = (j_!j^*A)^{n+1}_x ⊕ A^n_x with the first summand zero
                        Matrix::identity(field, c)
                    } else {
                        Matrix::zeros(field, 0, c)
                    }
                })
                .collect();
            (n, RepMap { comps })
        })
        .collect();
    Ok(ChainMap::new(cone, ii, comps)?)
}

/// `i^! G = i^* fib(G -> Rj_* j^* G)` for a closed subset with open
/// complement.
pub fn closed_upper_shriek(ambient: &Arc<FinPoset>, closed: &[usize], g: &Arc<Complex>) -> Result<Complex, PosetError> {
    if !ambient.is_down_set(closed) {
        return Err(PosetError::Contract(format!("{} is not closed", describe(ambient, closed))));
    }
    let open: Vec<usize> = (0..ambient.len()).filter(|x| !closed.contains(x)).collect();
    let j = MonotoneMap::inclusion(ambient, &open);
    let (_, unit) = unit_to_push(&j, g);
    let (cone, _, _) = unit.cone();
    Ok(restrict(ambient, closed, &cone.shift(-1)))
}

/// Cross product `RΓ(X, F) ⊗ RΓ(Y, G) -> RΓ(X × Y, F ⊠ G)` for sheaves in
/// degree 0 (front face on `X`, back face on `Y`).
pub fn kunneth_map(x: &Arc<FinPoset>, y: &Arc<FinPoset>, f: &Complex, g: &Complex) -> Result<ChainMap, PosetError> {
    if f.degrees() != (0..=0) || g.degrees() != (0..=0) {
        return Err(PosetError::Contract("cross product is implemented for sheaves in degree 0".into()));
    }
    let xy = Arc::new(x.product(y));
    let m = y.len();
    let p1 = MonotoneMap { source: xy.clone(), target: x.clone(), map: (0..xy.len()).map(|i| i / m).collect() };
    let p2 = MonotoneMap { source: xy.clone(), target: y.clone(), map: (0..xy.len()).map(|i| i % m).collect() };
    let boxed = pull(&p1, f).tensor(&pull(&p2, g));
    let all = |p: &FinPoset| (0..p.len()).collect::<Vec<_>>();
    let (rx, lx) = sections_on(x, &all(x), f);
    let (ry, ly) = sections_on(y, &all(y), g);
    let (rxy, lxy) = sections_on(&xy, &all(&xy), &boxed);
    let src = Arc::new(rx.tensor(&ry));
    let tgt = Arc::new(rxy);
    let xcar = pc(x);
    let (f0, g0) = (f.obj(0), g.obj(0));
    let field = f.field();
    let comps = src
        .degrees()
        .map(|n| {
            let mut mat = Matrix::zeros(field, tgt.total_dim(n), src.total_dim(n));
            if n >= 0 && (n as usize) < lxy.chains.len() {
                let mut base = 0;
                for p in rx.degrees() {
                    let q = n - p;
                    if !ry.degrees().contains(&q) {
                        continue;
                    }
                    let dq = ry.total_dim(q);
                    for rho in &lxy.chains[n as usize] {
                        let us: Vec<usize> = rho.iter().map(|&r| r / m).collect();
                        let vs: Vec<usize> = rho.iter().map(|&r| r % m).collect();
                        let (pu, qv) = (&us[..=p as usize], &vs[p as usize..]);
                        if pu.windows(2).any(|w| w[0] == w[1]) || qv.windows(2).any(|w| w[0] == w[1]) {
                            continue;
                        }
                        let (Some(oa), Some(ob)) = (lx.offset(p as usize, 0, pu), ly.offset(q as usize, 0, qv)) else {
                            continue;
                        };
                        let to = lxy.offset(n as usize, 0, rho).unwrap();
                        let (ue, ve) = (*us.last().unwrap(), *vs.last().unwrap());
                        let tr = xcar.transport(f0, pu[p as usize], ue);
                        let (da, db) = (f0.dims[pu[p as usize]], g0.dims[ve]);
                        for e in 0..da {
                            for k in 0..db {
                                let col = base + (oa + e) * dq + ob + k;
                                for e2 in 0..f0.dims[ue] {
                                    let c = tr.get(e2, e);
                                    if !c.is_zero() {
                                        mat.set(to + e2 * db + k, col, &c);
                                    }
                                }
                            }
                        }
                    }
                    base += rx.total_dim(p) * dq;
                }
            }
            (n, RepMap { comps: vec![mat] })
        })
        .collect();
    Ok(ChainMap::new(src, tgt, comps)?)
}
