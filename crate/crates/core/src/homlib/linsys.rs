use super::complex::{ChainMap, Complex, Homotopy};
use super::rep::{hom_space, HomBasis, RepMap};
use crate::exactalg::{FieldSpec, Matrix, Scalar};
use std::collections::BTreeMap;
use std::sync::Arc;

/// `Σ c_i F_i - G = d h + h d` between a fixed pair of complexes. All
/// problems handed to [`affine_homotopy_solve`] share the coefficients `c`.
#[derive(Debug, Clone)]
pub struct HomotopyProblem {
    pub candidates: Vec<ChainMap>,
    pub target: ChainMap,
}

/// Two chain maps that are not homotopic; `residue` is their difference.
#[derive(Debug, Clone, thiserror::Error)]
#[error("maps are not chain homotopic")]
pub struct NotHomotopic {
    pub residue: ChainMap,
}

/// Flat coordinates of all components of a degree-wise family of maps.
struct Layout {
    degrees: Vec<i32>,
    offsets: BTreeMap<(i32, usize), usize>,
    len: usize,
}

impl Layout {
    fn for_maps(s: &Complex, t: &Complex, degrees: Vec<i32>) -> Layout {
        let mut offsets = BTreeMap::new();
        let mut len = 0;
        for &n in &degrees {
            for v in 0..s.dims(n).len() {
                offsets.insert((n, v), len);
                len += s.dims(n)[v] * t.dims(n)[v];
            }
        }
        Layout { degrees, offsets, len }
    }

    fn write(&self, n: i32, m: &RepMap, out: &mut [Option<Scalar>]) {
        for (v, c) in m.comps.iter().enumerate() {
            if let Some(&o) = self.offsets.get(&(n, v)) {
                for (i, x) in c.flatten().into_iter().enumerate() {
                    if !x.is_zero() {
                        out[o + i] = Some(x);
                    }
                }
            }
        }
    }

    fn flatten_map(&self, f: &ChainMap) -> Vec<Option<Scalar>> {
        let mut out = vec![None; self.len];
        for &n in &self.degrees {
            self.write(n, &f.comp(n), &mut out);
        }
        out
    }
}

fn overlap(s: &Complex, t: &Complex, shift: i32) -> Vec<i32> {
    if s.is_zero() || t.is_zero() {
        return Vec::new();
    }
    s.degrees().filter(|n| t.degrees().contains(&(n + shift))).collect()
}

/// Columns of the linear system as sparse vectors.
struct System {
    field: FieldSpec,
    rows: usize,
    cols: Vec<Vec<(usize, Scalar)>>,
    rhs: Vec<(usize, Scalar)>,
}

impl System {
    fn push_col(&mut self, offset: usize, col: Vec<Option<Scalar>>) {
        let v = col.into_iter().enumerate().filter_map(|(i, x)| x.map(|x| (offset + i, x))).collect();
        self.cols.push(v);
    }

    /// Solves, dropping rows where everything vanishes. `None` if
    /// inconsistent.
    fn solve(&self) -> Option<Vec<Scalar>> {
        let mut used = vec![false; self.rows];
        for col in self.cols.iter().chain(std::iter::once(&self.rhs)) {
            for (i, _) in col {
                used[*i] = true;
            }
        }
        let mut index = vec![usize::MAX; self.rows];
        let mut r = 0;
        for i in 0..self.rows {
            if used[i] {
                index[i] = r;
                r += 1;
            }
        }
        let mut a = Matrix::zeros(self.field, r, self.cols.len());
        for (j, col) in self.cols.iter().enumerate() {
            for (i, x) in col {
                a.add_to(index[*i], j, x);
            }
        }
        let mut b = Matrix::zeros(self.field, r, 1);
        for (i, x) in &self.rhs {
            b.add_to(index[*i], 0, x);
        }
        a.solve(&b).ok().map(|x| (0..x.rows()).map(|i| x.get(i, 0)).collect())
    }
}

/// Solves all problems jointly for shared coefficients and one homotopy per
/// problem. Homotopies are built from bases of morphism spaces, so they are
/// maps of representations.
pub fn affine_homotopy_solve(problems: &[HomotopyProblem]) -> Option<(Vec<Scalar>, Vec<Homotopy>)> {
    let ncand = problems.first().map_or(0, |p| p.candidates.len());
    assert!(problems.iter().all(|p| p.candidates.len() == ncand), "contract violation: candidate counts differ");
    let field = problems.first()?.target.source.field();
    let mut sys = System { field, rows: 0, cols: vec![Vec::new(); ncand], rhs: Vec::new() };
    let mut hbases: Vec<Vec<(i32, HomBasis)>> = Vec::new();
    for p in problems {
        let (s, t) = (&p.target.source, &p.target.target);
        let car = s.carrier().as_ref();
        let mut degs: Vec<i32> = p.target.degrees().collect();
        degs.retain(|&n| s.total_dim(n) * t.total_dim(n) > 0);
        let lay = Layout::for_maps(s, t, degs);
        let base = sys.rows;
        for (i, f) in p.candidates.iter().enumerate() {
            let col = lay.flatten_map(f);
            sys.cols[i].extend(col.into_iter().enumerate().filter_map(|(k, x)| x.map(|x| (base + k, x))));
        }
        sys.rhs.extend(lay.flatten_map(&p.target).into_iter().enumerate().filter_map(|(k, x)| x.map(|x| (base + k, x))));
        // h^n: S^n -> T^{n-1} contributes -d h^n to degree n and -h^n d to n - 1
        let mut hb = Vec::new();
        for n in overlap(s, t, -1) {
            let basis = hom_space(car, s.obj(n), t.obj(n - 1));
            for b in &basis.maps {
                let mut col = vec![None; lay.len];
                lay.write(n, &t.d(n - 1).compose(b).neg(), &mut col);
                let mut col2 = vec![None; lay.len];
                lay.write(n - 1, &b.compose(&s.d(n - 1)).neg(), &mut col2);
                for (k, x) in col2.into_iter().enumerate() {
                    if x.is_some() {
                        col[k] = x;
                    }
                }
                sys.push_col(base, col);
            }
            hb.push((n, basis));
        }
        sys.rows += lay.len;
        hbases.push(hb);
    }
    let x = sys.solve()?;
    let coeffs = x[..ncand].to_vec();
    let mut pos = ncand;
    let mut homotopies = Vec::new();
    for (p, hb) in problems.iter().zip(hbases) {
        let (s, t) = (&p.target.source, &p.target.target);
        let mut comps = BTreeMap::new();
        for (n, basis) in hb {
            let k = basis.len();
            let h = basis.combine(field, s.obj(n), t.obj(n - 1), &x[pos..pos + k]);
            pos += k;
            comps.insert(n, h);
        }
        homotopies.push(Homotopy { comps });
    }
    Some((coeffs, homotopies))
}

/// A homotopy `f ≃ g`, or the difference as a witness of failure.
pub fn homotopic(f: &ChainMap, g: &ChainMap) -> Result<Homotopy, NotHomotopic> {
    let residue = f.sub(g);
    let problem = HomotopyProblem { candidates: Vec::new(), target: g.sub(f) };
    match affine_homotopy_solve(&[problem]) {
        Some((_, mut hs)) => Ok(hs.remove(0)),
        None => Err(NotHomotopic { residue }),
    }
}

/// A basis of the space of chain maps `c -> d`.
pub fn chain_map_basis(c: &Arc<Complex>, d: &Arc<Complex>) -> Vec<ChainMap> {
    let car = c.carrier().as_ref();
    let field = c.field();
    let degs = overlap(c, d, 0);
    let bases: Vec<(i32, HomBasis)> = degs.iter().map(|&n| (n, hom_space(car, c.obj(n), d.obj(n)))).collect();
    let total: usize = bases.iter().map(|(_, b)| b.len()).sum();
    if total == 0 {
        return Vec::new();
    }
    // constraint d_D f^n - f^{n+1} d_C = 0 in every degree n
    let mut cdegs: Vec<i32> = degs.iter().flat_map(|&n| [n - 1, n]).collect();
    cdegs.sort();
    cdegs.dedup();
    let mut offsets = BTreeMap::new();
    let mut rows = 0;
    for &n in &cdegs {
        for v in 0..c.dims(n).len() {
            offsets.insert((n, v), rows);
            rows += c.dims(n)[v] * d.dims(n + 1)[v];
        }
    }
    let mut sys = Matrix::zeros(field, rows, total);
    let mut col = 0;
    let put = |n: i32, m: &RepMap, col: usize, sys: &mut Matrix| {
        for (v, c) in m.comps.iter().enumerate() {
            let o = offsets[&(n, v)];
            for (i, x) in c.flatten().into_iter().enumerate() {
                if !x.is_zero() {
                    sys.add_to(o + i, col, &x);
                }
            }
        }
    };
    for (n, b) in &bases {
        for f in &b.maps {
            put(*n, &d.d(*n).compose(f), col, &mut sys);
            put(*n - 1, &f.compose(&c.d(*n - 1)).neg(), col, &mut sys);
            col += 1;
        }
    }
    let ker = sys.kernel_basis();
    (0..ker.cols())
        .map(|j| {
            let mut comps = BTreeMap::new();
            let mut pos = 0;
            for (n, b) in &bases {
                let coeffs: Vec<Scalar> = (pos..pos + b.len()).map(|i| ker.get(i, j)).collect();
                pos += b.len();
                comps.insert(*n, b.combine(field, c.obj(*n), d.obj(*n), &coeffs));
            }
            ChainMap::new_unchecked(c.clone(), d.clone(), comps)
        })
        .collect()
}

/// Some chain map `g: P -> C` with `q ∘ g ≃ f`, with the homotopy.
pub fn lift(f: &ChainMap, q: &ChainMap) -> Option<(ChainMap, Homotopy)> {
    let basis = chain_map_basis(&f.source, &q.source);
    let candidates = basis.iter().map(|g| q.compose(g)).collect();
    let (c, mut h) = affine_homotopy_solve(&[HomotopyProblem { candidates, target: f.clone() }])?;
    let g = combine(&f.source, &q.source, &basis, &c);
    Some((g, h.remove(0)))
}

/// `Σ c_i g_i`.
pub fn combine(s: &Arc<Complex>, t: &Arc<Complex>, maps: &[ChainMap], coeffs: &[Scalar]) -> ChainMap {
    let mut out = ChainMap::zero(s, t);
    for (g, c) in maps.iter().zip(coeffs) {
        if !c.is_zero() {
            out = out.add(&g.scale(c));
        }
    }
    out
}

/// A homotopy inverse of `f`, if `f` is a homotopy equivalence.
pub fn homotopy_inverse(f: &ChainMap) -> Option<ChainMap> {
    let (c, d) = (&f.source, &f.target);
    let basis = chain_map_basis(d, c);
    let p1 = HomotopyProblem {
        candidates: basis.iter().map(|g| f.compose(g)).collect(),
        target: ChainMap::identity(d),
    };
    let p2 = HomotopyProblem {
        candidates: basis.iter().map(|g| g.compose(f)).collect(),
        target: ChainMap::identity(c),
    };
    let (coeffs, _) = affine_homotopy_solve(&[p1, p2])?;
    Some(combine(d, c, &basis, &coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::FieldSpec;
    use crate::homlib::{Discrete, Rep};

    fn vect(d: usize, f: FieldSpec) -> Rep {
        Rep { field: f, dims: vec![d], arrows: Vec::new() }
    }

    /// `k --1--> k` in degrees 0, 1.
    fn contractible(f: FieldSpec) -> Arc<Complex> {
        let d = RepMap { comps: vec![Matrix::identity(f, 1)] };
        Arc::new(Complex::new(Discrete::vect(), f, 0, vec![vect(1, f), vect(1, f)], vec![d]).unwrap())
    }

    #[test]
    fn identity_of_contractible_is_nullhomotopic() {
        let f = FieldSpec::Rationals;
        let c = contractible(f);
        let id = ChainMap::identity(&c);
        let h = homotopic(&id, &ChainMap::zero(&c, &c)).unwrap();
        assert!(h.certifies(&id, &ChainMap::zero(&c, &c)));
    }

    #[test]
    fn identity_of_point_is_not_nullhomotopic() {
        let f = FieldSpec::prime(3).unwrap();
        let c = Arc::new(Complex::unit_vect(f));
        let id = ChainMap::identity(&c);
        let err = homotopic(&id, &ChainMap::zero(&c, &c)).unwrap_err();
        assert!(!err.residue.is_zero());
    }

    #[test]
    fn chain_maps_of_contractible() {
        let f = FieldSpec::Rationals;
        let c = contractible(f);
        // f^0 = a, f^1 = a: one-dimensional
        let b = chain_map_basis(&c, &c);
        assert_eq!(b.len(), 1);
        assert!(b[0].validate().is_ok());
    }

    #[test]
    fn inverse_of_quasi_iso_between_projectives() {
        let f = FieldSpec::Rationals;
        let c = contractible(f);
        let unit = Arc::new(Complex::unit_vect(f));
        let sum = Arc::new(Complex::direct_sum(&[&unit, &c]));
        let mut comps = BTreeMap::new();
        comps.insert(0, RepMap { comps: vec![Matrix::from_rows(f, &[vec![1], vec![0]])] });
        let i = ChainMap::new(unit.clone(), sum.clone(), comps).unwrap();
        assert!(i.is_quasi_iso());
        let g = homotopy_inverse(&i).unwrap();
        assert!(homotopic(&g.compose(&i), &ChainMap::identity(&unit)).is_ok());
    }
}
