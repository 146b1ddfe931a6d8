use super::complex::{ChainMap, Complex};
use super::rep::{hconcat, kernel, quotient, vconcat, Rep, RepMap};
use super::HomError;
use crate::exactalg::Matrix;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Degrees below the bottom of a complex that a replacement resolves.
pub const DEFAULT_WINDOW: usize = 6;

/// A complex of projectives with a map to the original complex, a
/// quasi-isomorphism in degrees `>= valid_from` (everywhere when `None`).
#[derive(Debug, Clone)]
pub struct Replacement {
    pub complex: Arc<Complex>,
    pub map: ChainMap,
    pub valid_from: Option<i32>,
}

impl Replacement {
    /// Fails unless the replacement is faithful in degrees `>= degree`.
    pub fn require_from(&self, degree: i32) -> Result<(), HomError> {
        match self.valid_from {
            Some(v) if v > degree => Err(HomError::TruncationInsufficient {
                needed: (self.complex.hi().max(degree) - degree + 1) as usize,
                available: (self.complex.hi().max(v) - v + 1).max(0) as usize,
            }),
            _ => Ok(()),
        }
    }
}

/// Resolves `c` by projectives, working down from the top degree and
/// killing the cohomology of the mapping cone one degree at a time. Stops
/// once the cone is acyclic below the bottom of `c`, or after `window`
/// degrees below it.
pub fn projective_replacement(c: &Arc<Complex>, window: usize) -> Replacement {
    let car = c.carrier().clone();
    let field = c.field();
    if c.is_zero() || car.all_projective(field) {
        return Replacement { complex: c.clone(), map: ChainMap::identity(c), valid_from: c.valid_from() };
    }
    let bottom = c.lo() - window as i32;
    // built top-down: (degree, P^n, d_P^n: P^n -> P^{n+1}, q^n)
    let mut built: Vec<(i32, Rep, RepMap, RepMap)> = Vec::new();
    let zero = Rep::zero(car.as_ref(), field);
    let mut truncated = false;
    let mut n = c.hi();
    loop {
        let (p1, dp1, q1) = match built.last() {
            Some((_, p, d, q)) => (p.clone(), d.clone(), q.clone()),
            None => (zero.clone(), RepMap::zero(&zero, &zero), RepMap::zero(&zero, c.obj(n + 1))),
        };
        let p2 = built.len().checked_sub(2).map_or(zero.clone(), |i| built[i].1.clone());
        // cone^n = P^{n+1} ⊕ C^n -> cone^{n+1} = P^{n+2} ⊕ C^{n+1}
        let cone_n = Rep::direct_sum(car.as_ref(), field, &[&p1, c.obj(n)]);
        let tgt = Rep::direct_sum(car.as_ref(), field, &[&p2, c.obj(n + 1)]);
        let top = hconcat(field, &p2.dims, &[&dp1.neg(), &RepMap::zero(c.obj(n), &p2)]);
        let bot = hconcat(field, &c.obj(n + 1).dims, &[&q1, &c.d(n)]);
        let dn = vconcat(field, &cone_n.dims, &[&top, &bot]);
        debug_assert_eq!(dn.comps.iter().map(Matrix::rows).collect::<Vec<_>>(), tgt.dims);
        let (z, zi) = kernel(car.as_ref(), &cone_n, &dn);
        // boundaries from C^{n-1}, in Z coordinates
        let inc_c = vconcat(field, &c.obj(n - 1).dims, &[&RepMap::zero(c.obj(n - 1), &p1), &c.d(n - 1)]);
        let spans: Vec<Matrix> = zi
            .comps
            .iter()
            .zip(&inc_c.comps)
            .map(|(zb, b)| zb.solve(b).expect("boundaries are cycles"))
            .collect();
        let (h, _, sect) = quotient(car.as_ref(), &z, &spans);
        if h.is_zero() && n < c.lo() {
            break;
        }
        let gens = car.cover_generators(&h);
        let projs: Vec<Rep> = gens.iter().map(|(v, _)| car.projective(*v, field)).collect();
        let refs: Vec<&Rep> = projs.iter().collect();
        let pn = Rep::direct_sum(car.as_ref(), field, &refs);
        let maps: Vec<RepMap> = gens
            .iter()
            .map(|(v, x)| {
                let in_cone = zi.comps[*v].mul(&sect.comps[*v].mul(x));
                car.projective_map(*v, &cone_n, &in_cone)
            })
            .collect();
        let mrefs: Vec<&RepMap> = maps.iter().collect();
        let psi = hconcat(field, &cone_n.dims, &mrefs);
        let split = |v: usize| p1.dims[v];
        let d_p = RepMap {
            comps: psi.comps.iter().enumerate().map(|(v, m)| m.submatrix(0, split(v), 0, m.cols()).neg()).collect(),
        };
        let q = RepMap {
            comps: psi.comps.iter().enumerate().map(|(v, m)| m.submatrix(split(v), m.rows(), 0, m.cols())).collect(),
        };
        built.push((n, pn, d_p, q));
        if n <= bottom {
            truncated = true;
            break;
        }
        n -= 1;
    }
    built.reverse();
    let Some(&(lo, ..)) = built.first() else {
        let z = Arc::new(Complex::zero_complex(car, field));
        return Replacement { map: ChainMap::zero(&z, c), complex: z, valid_from: None };
    };
    let objects: Vec<Rep> = built.iter().map(|b| b.1.clone()).collect();
    let diffs: Vec<RepMap> = built[..built.len() - 1].iter().map(|b| b.2.clone()).collect();
    let valid_from = if truncated { Some(lo + 1) } else { None };
    let valid_from = match (valid_from, c.valid_from()) {
        (Some(a), Some(b)) => Some(a.max(b)),
        (a, b) => a.or(b),
    };
    let p = Arc::new(
        Complex::new(car, field, lo, objects, diffs)
            .expect("replacement is a complex")
            .with_valid_from(valid_from)
            .with_valid_to(c.valid_to()),
    );
    let comps: BTreeMap<i32, RepMap> = built.into_iter().map(|(n, _, _, q)| (n, q)).collect();
    let map = ChainMap::new(p.clone(), c.clone(), comps).expect("replacement map is a chain map");
    Replacement { complex: p, map, valid_from }
}

/// `RHom(a, b)` over Vect through a replacement of `a`. The result is
/// faithful in degrees `<= valid_to`. `b` must be faithful from below.
pub fn derived_hom(a: &Arc<Complex>, b: &Complex, window: usize) -> Result<Complex, HomError> {
    if b.valid_from().is_some() {
        return Err(HomError::Contract("second argument of RHom is truncated from below".into()));
    }
    let r = projective_replacement(a, window);
    let h = r.complex.hom_complex(b).0;
    let bounds = [r.valid_from.map(|v| b.lo() - v), b.valid_to().map(|u| u - a.hi())];
    Ok(h.with_valid_to(bounds.into_iter().flatten().min()))
}
