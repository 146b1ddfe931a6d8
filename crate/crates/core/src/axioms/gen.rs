use super::AxiomError;
use crate::exactalg::{FieldSpec, Matrix};
use crate::grpfun::{FinGroup, FinGroupoid, GroupoidCarrier};
use crate::homlib::{hom_space, Carrier, Complex, Rep};
use crate::posetsheaf::{FinPoset, PosetCarrier, Sheaf};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

pub const MAX_POSET: usize = 6;
pub const MAX_GROUP_ORDER: usize = 24;
pub const MAX_STALK_DIM: usize = 3;

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random poset on `p0 .. p{n-1}`, each pair `i < j` related with
/// probability 2/5 before transitive closure.
pub fn gen_poset(seed: u64, n: usize) -> Result<FinPoset, AxiomError> {
    if n == 0 || n > MAX_POSET {
        return Err(AxiomError::Bounds(format!("poset size {n} outside 1..={MAX_POSET}")));
    }
    let mut r = rng(seed);
    let labels = (0..n).map(|i| format!("p{i}")).collect();
    let mut rel = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if r.gen_ratio(2, 5) {
                rel.push((i, j));
            }
        }
    }
    Ok(FinPoset::new(labels, &rel).expect("upper-triangular relations are antisymmetric"))
}

pub(crate) fn random_invertible(field: FieldSpec, n: usize, r: &mut ChaCha8Rng) -> Matrix {
    loop {
        let m = Matrix::random(field, n, n, r);
        if m.rank() == n {
            return m;
        }
    }
}

/// A random sheaf: a sum of constant sheaves on random intervals `[x, y]`,
/// extended by zero, with a random basis change at every stalk.
pub fn gen_sheaf(seed: u64, poset: &Arc<FinPoset>, field: FieldSpec, max_dim: usize) -> Result<Sheaf, AxiomError> {
    if max_dim > MAX_STALK_DIM {
        return Err(AxiomError::Bounds(format!("stalk dimension {max_dim} above {MAX_STALK_DIM}")));
    }
    let mut r = rng(seed);
    let n = poset.len();
    let mut pieces: Vec<Vec<bool>> = Vec::new();
    let mut dims = vec![0; n];
    for _ in 0..r.gen_range(1..=3) {
        let x = r.gen_range(0..n);
        let ups = poset.up(x);
        let y = *ups.choose(&mut r).unwrap();
        let inside: Vec<bool> = (0..n).map(|z| poset.leq(x, z) && poset.leq(z, y)).collect();
        if (0..n).any(|z| inside[z] && dims[z] + 1 > max_dim) {
            continue;
        }
        for z in 0..n {
            dims[z] += inside[z] as usize;
        }
        pieces.push(inside);
    }
    let bases: Vec<Matrix> = dims.iter().map(|&d| random_invertible(field, d, &mut r)).collect();
    let car = PosetCarrier::new(poset.clone());
    let rep = car.rep_from(field, dims.clone(), |s, t| {
        let mut m = Matrix::zeros(field, dims[t], dims[s]);
        let (mut i, mut j) = (0, 0);
        for p in &pieces {
            if p[s] && p[t] {
                m.set_int(j, i, 1);
            }
            i += p[s] as usize;
            j += p[t] as usize;
        }
        bases[t].mul(&m).mul(&bases[s].inverse().unwrap())
    });
    car.check_relations(&rep).expect("interval sheaves are functors");
    Ok(Sheaf { poset: poset.clone(), rep })
}

/// Element matrices of a random representation of `g`: a sum of the
/// trivial representation and permutation representations on cosets of
/// cyclic subgroups, in a random basis.
pub fn gen_group_rep(seed: u64, g: &FinGroup, field: FieldSpec, max_dim: usize) -> Result<Vec<Matrix>, AxiomError> {
    if g.order() > MAX_GROUP_ORDER {
        return Err(AxiomError::Bounds(format!("group order {} above {MAX_GROUP_ORDER}", g.order())));
    }
    if max_dim == 0 || max_dim > MAX_STALK_DIM {
        return Err(AxiomError::Bounds(format!("dimension {max_dim} outside 1..={MAX_STALK_DIM}")));
    }
    let mut r = rng(seed);
    let mut blocks: Vec<Vec<Matrix>> = Vec::new();
    let mut dim = 0;
    for _ in 0..r.gen_range(1..=2) {
        let x = r.gen_range(0..g.order());
        let sub = g.generated(&[x]);
        let (reps, which) = g.cosets(&sub);
        let k = reps.len();
        let (k, mats) = if dim + k <= max_dim && r.gen_bool(0.7) {
            let mats = g
                .elements()
                .map(|e| {
                    let mut m = Matrix::zeros(field, k, k);
                    for (i, &ri) in reps.iter().enumerate() {
                        m.set_int(which[g.mul(e, ri)].0, i, 1);
                    }
                    m
                })
                .collect();
            (k, mats)
        } else if dim < max_dim {
            (1, g.elements().map(|_| Matrix::identity(field, 1)).collect())
        } else {
            continue;
        };
        dim += k;
        blocks.push(mats);
    }
    let p = random_invertible(field, dim, &mut r);
    let pinv = p.inverse().unwrap();
    Ok(g
        .elements()
        .map(|e| {
            let mut m = Matrix::zeros(field, dim, dim);
            let mut off = 0;
            for b in &blocks {
                m.set_block(off, off, &b[e]);
                off += b[e].rows();
            }
            p.mul(&m).mul(&pinv)
        })
        .collect())
}

/// A random representation of a groupoid, componentwise.
pub fn gen_rep(seed: u64, gpd: &Arc<FinGroupoid>, field: FieldSpec, max_dim: usize) -> Result<Rep, AxiomError> {
    let mut r = rng(seed);
    let mats = (0..gpd.len())
        .map(|c| gen_group_rep(r.gen(), gpd.group(c), field, max_dim))
        .collect::<Result<Vec<_>, _>>()?;
    let car = GroupoidCarrier::new(gpd.clone());
    let dims = mats.iter().map(|m| m[0].rows()).collect();
    Ok(car.rep_from(field, dims, |c, s| mats[c][s].clone()))
}

fn gen_object(seed: u64, carrier: &Arc<dyn Carrier>, field: FieldSpec, max_dim: usize) -> Result<Rep, AxiomError> {
    let any = carrier.as_any();
    if let Some(p) = any.downcast_ref::<PosetCarrier>() {
        Ok(gen_sheaf(seed, p.poset(), field, max_dim)?.rep)
    } else if let Some(g) = any.downcast_ref::<GroupoidCarrier>() {
        gen_rep(seed, g.groupoid(), field, max_dim)
    } else {
        Err(AxiomError::Bounds("no generator for this carrier".into()))
    }
}

/// Summands of a random complex: two-term complexes `R1 -> R2` along a
/// random morphism, and single objects, in degrees `-1..=1`. Each stalk
/// stays within `max_dim` per degree.
pub fn gen_pieces(seed: u64, carrier: &Arc<dyn Carrier>, field: FieldSpec, max_dim: usize) -> Result<Vec<Complex>, AxiomError> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    let mut used = [0usize; 3];
    for _ in 0..r.gen_range(1..=2) {
        let lo = r.gen_range(-1..=0);
        let two = r.gen_bool(0.6);
        let room = |d: i32| max_dim.saturating_sub(used[(d + 1) as usize]);
        let (a_max, b_max) = (room(lo), room(lo + 1));
        if a_max == 0 || (two && b_max == 0) {
            continue;
        }
        let a = gen_object(r.gen(), carrier, field, a_max.min(max_dim))?;
        if a.dims.iter().all(|&d| d == 0) {
            continue;
        }
        if !two {
            used[(lo + 1) as usize] += a.dims.iter().max().copied().unwrap_or(0);
            out.push(Complex::concentrated(carrier.clone(), a, lo));
            continue;
        }
        let b = gen_object(r.gen(), carrier, field, b_max)?;
        let basis = hom_space(carrier.as_ref(), &a, &b);
        let coeffs: Vec<_> = (0..basis.len()).map(|_| Matrix::random(field, 1, 1, &mut r).get(0, 0)).collect();
        let d = basis.combine(field, &a, &b, &coeffs);
        used[(lo + 1) as usize] += a.dims.iter().max().copied().unwrap_or(0);
        used[(lo + 2) as usize] += b.dims.iter().max().copied().unwrap_or(0);
        out.push(Complex::new(carrier.clone(), field, lo, vec![a, b], vec![d]).expect("two-term complex"));
    }
    if out.is_empty() {
        let a = gen_object(r.gen(), carrier, field, 1)?;
        out.push(Complex::concentrated(carrier.clone(), a, 0));
    }
    Ok(out)
}

pub fn gen_complex(seed: u64, carrier: &Arc<dyn Carrier>, field: FieldSpec, max_dim: usize) -> Result<Complex, AxiomError> {
    let pieces = gen_pieces(seed, carrier, field, max_dim)?;
    let refs: Vec<&Complex> = pieces.iter().collect();
    Ok(Complex::direct_sum(&refs))
}

/// A random small groupoid: one or two components with groups of order
/// at most `max_order` from a fixed menu.
pub fn gen_groupoid(seed: u64, max_order: usize) -> Arc<FinGroupoid> {
    let mut r = rng(seed);
    let menu: Vec<FinGroup> =
        [1, 2, 3].iter().filter(|&&n| n <= max_order.max(1)).map(|&n| FinGroup::cyclic(n)).collect();
    let comps = if r.gen_ratio(1, 4) { 2 } else { 1 };
    Arc::new(FinGroupoid::new((0..comps).map(|_| Arc::new(menu.choose(&mut r).unwrap().clone())).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::posetsheaf::carrier_of;

    #[test]
    fn generators_are_valid() {
        let q = FieldSpec::Rationals;
        for s in 0..200 {
            let p = Arc::new(gen_poset(s, 1 + (s as usize) % MAX_POSET).unwrap());
            for a in 0..p.len() {
                for b in 0..p.len() {
                    assert!(!(a != b && p.leq(a, b) && p.leq(b, a)));
                }
            }
            let c = gen_complex(s, &carrier_of(&p), q, 3).unwrap();
            for n in c.lo()..c.hi() {
                assert!(c.d(n + 1).compose(&c.d(n)).is_zero());
            }
            for n in c.degrees() {
                assert!(c.dims(n).iter().all(|&d| d <= 3));
            }
        }
        assert_eq!(gen_poset(3, 1).unwrap().len(), 1);
        assert!(gen_poset(0, 7).is_err());
        let s3 = FinGroup::symmetric3();
        let f2 = FieldSpec::prime(2).unwrap();
        for s in 0..50 {
            let m = gen_group_rep(s, &s3, f2, 3).unwrap();
            for a in s3.elements() {
                for b in s3.elements() {
                    assert_eq!(m[s3.mul(a, b)], m[a].mul(&m[b]));
                }
            }
        }
    }
}
