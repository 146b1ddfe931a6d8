use super::poset::FinPoset;
use crate::exactalg::{FieldSpec, Matrix, Quotient};
use crate::homlib::{hom_space, Carrier, Quiver, Rep, RepMap};
use std::any::Any;
use std::collections::VecDeque;
use std::sync::Arc;

/// Sheaves on a finite poset as representations of its Hasse diagram with
/// commutativity relations. Arrow `i` is the generization map along the
/// `i`-th covering relation.
#[derive(Debug)]
pub struct PosetCarrier {
    poset: Arc<FinPoset>,
    quiver: Quiver,
    /// `paths[x][y]`: arrow indices of a fixed Hasse path from `x` to `y`.
    paths: Vec<Vec<Option<Vec<usize>>>>,
}

impl PosetCarrier {
    pub fn new(poset: Arc<FinPoset>) -> Arc<PosetCarrier> {
        let n = poset.len();
        let quiver = Quiver { vertices: n, arrows: poset.covers().to_vec() };
        let mut paths = vec![vec![None; n]; n];
        for (x, row) in paths.iter_mut().enumerate() {
            row[x] = Some(Vec::new());
            let mut queue = VecDeque::from([x]);
            while let Some(y) = queue.pop_front() {
                for (a, &(s, t)) in quiver.arrows.iter().enumerate() {
                    if s == y && row[t].is_none() {
                        let mut p = row[y].clone().unwrap();
                        p.push(a);
                        row[t] = Some(p);
                        queue.push_back(t);
                    }
                }
            }
        }
        Arc::new(PosetCarrier { poset, quiver, paths })
    }

    pub fn poset(&self) -> &Arc<FinPoset> {
        &self.poset
    }

    /// The generization map `F_x -> F_y` for `x <= y`.
    pub fn transport(&self, rep: &Rep, x: usize, y: usize) -> Matrix {
        let path = self.paths[x][y].as_ref().expect("transport needs x <= y");
        let mut m = Matrix::identity(rep.field, rep.dims[x]);
        for &a in path {
            m = rep.arrows[a].mul(&m);
        }
        m
    }

    /// Builds a representation from per-pair generization data.
    pub fn rep_from(&self, field: FieldSpec, dims: Vec<usize>, gen: impl Fn(usize, usize) -> Matrix) -> Rep {
        let arrows = self.quiver.arrows.iter().map(|&(s, t)| gen(s, t)).collect();
        Rep { field, dims, arrows }
    }

    fn restrict_to(&self, rep: &Rep, subset: &[usize], sub: &PosetCarrier) -> Rep {
        let dims = subset.iter().map(|&x| rep.dims[x]).collect();
        sub.rep_from(rep.field, dims, |s, t| self.transport(rep, subset[s], subset[t]))
    }

    fn restrict_map(f: &RepMap, subset: &[usize]) -> RepMap {
        RepMap { comps: subset.iter().map(|&x| f.comps[x].clone()).collect() }
    }
}

impl Carrier for PosetCarrier {
    fn key(&self) -> String {
        if self.quiver.arrows.is_empty() {
            return format!("discrete:{}", self.quiver.vertices);
        }
        let f = self.poset.to_file();
        format!("poset:{}|{:?}", f.elements.join(","), f.relations)
    }

    fn quiver(&self) -> &Quiver {
        &self.quiver
    }

    fn check_relations(&self, rep: &Rep) -> Result<(), String> {
        // every cover z ⋖ y with x <= z must extend the fixed path x -> z
        for x in 0..self.poset.len() {
            for (a, &(z, y)) in self.quiver.arrows.iter().enumerate() {
                if self.poset.leq(x, z) {
                    let lhs = rep.arrows[a].mul(&self.transport(rep, x, z));
                    if lhs != self.transport(rep, x, y) {
                        return Err(format!(
                            "square from {} to {} through {} does not commute",
                            self.poset.label(x),
                            self.poset.label(y),
                            self.poset.label(z)
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    fn all_projective(&self, _field: FieldSpec) -> bool {
        self.quiver.arrows.is_empty()
    }

    fn projective(&self, v: usize, field: FieldSpec) -> Rep {
        let dims = (0..self.poset.len()).map(|y| usize::from(self.poset.leq(v, y))).collect::<Vec<_>>();
        self.rep_from(field, dims.clone(), |s, t| {
            if dims[s] == 1 {
                Matrix::identity(field, 1)
            } else {
                Matrix::zeros(field, dims[t], dims[s])
            }
        })
    }

    fn projective_map(&self, v: usize, target: &Rep, vector: &Matrix) -> RepMap {
        let field = target.field;
        let comps = (0..self.poset.len())
            .map(|y| {
                if self.poset.leq(v, y) {
                    self.transport(target, v, y).mul(vector)
                } else {
                    Matrix::zeros(field, target.dims[y], 0)
                }
            })
            .collect();
        RepMap { comps }
    }

    fn cover_generators(&self, rep: &Rep) -> Vec<(usize, Matrix)> {
        let field = rep.field;
        let mut out = Vec::new();
        for y in 0..self.poset.len() {
            let incoming: Vec<&Matrix> =
                self.quiver.arrows.iter().enumerate().filter(|(_, &(_, t))| t == y).map(|(a, _)| &rep.arrows[a]).collect();
            let span = Matrix::hstack(field, rep.dims[y], &incoming);
            let q = Quotient::of(field, rep.dims[y], &span);
            for j in 0..q.dim() {
                out.push((y, q.section.col(j)));
            }
        }
        out
    }

    fn internal_hom(&self, m: &Rep, n: &Rep) -> Rep {
        let field = m.field;
        let ups: Vec<Vec<usize>> = (0..self.poset.len()).map(|x| self.poset.up(x)).collect();
        let subs: Vec<Arc<PosetCarrier>> = ups.iter().map(|u| PosetCarrier::new(Arc::new(self.poset.subposet(u)))).collect();
        let bases: Vec<_> = (0..self.poset.len())
            .map(|x| {
                let (mm, nn) = (self.restrict_to(m, &ups[x], &subs[x]), self.restrict_to(n, &ups[x], &subs[x]));
                hom_space(subs[x].as_ref(), &mm, &nn)
            })
            .collect();
        let dims = bases.iter().map(|b| b.len()).collect();
        self.rep_from(field, dims, |x, y| {
            // restrict each basis map on U_x to U_y ⊂ U_x
            let pos: Vec<usize> = ups[y].iter().map(|z| ups[x].iter().position(|w| w == z).unwrap()).collect();
            let mut mat = Matrix::zeros(field, bases[y].len(), bases[x].len());
            for (j, phi) in bases[x].maps.iter().enumerate() {
                let r = PosetCarrier::restrict_map(phi, &pos);
                for (i, c) in bases[y].coords(&r).into_iter().enumerate() {
                    mat.set(i, j, &c);
                }
            }
            mat
        })
    }

    fn internal_hom_map(&self, m: &Rep, n: &Rep, m2: &Rep, n2: &Rep, f: &RepMap, g: &RepMap) -> RepMap {
        let field = m.field;
        let comps = (0..self.poset.len())
            .map(|x| {
                let u = self.poset.up(x);
                let sub = PosetCarrier::new(Arc::new(self.poset.subposet(&u)));
                let src = hom_space(sub.as_ref(), &self.restrict_to(m, &u, &sub), &self.restrict_to(n, &u, &sub));
                let tgt = hom_space(sub.as_ref(), &self.restrict_to(m2, &u, &sub), &self.restrict_to(n2, &u, &sub));
                let (fr, gr) = (PosetCarrier::restrict_map(f, &u), PosetCarrier::restrict_map(g, &u));
                let mut mat = Matrix::zeros(field, tgt.len(), src.len());
                for (j, phi) in src.maps.iter().enumerate() {
                    for (i, c) in tgt.coords(&gr.compose(phi).compose(&fr)).into_iter().enumerate() {
                        mat.set(i, j, &c);
                    }
                }
                mat
            })
            .collect();
        RepMap { comps }
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}
