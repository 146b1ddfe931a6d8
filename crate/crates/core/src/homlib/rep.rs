use super::{Carrier, HomError};
use crate::exactalg::{FieldSpec, Matrix, Quotient, Scalar};

/// A representation of a carrier's quiver: one vector space per vertex and
/// one matrix per arrow (`dims[target] x dims[source]`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rep {
    pub field: FieldSpec,
    pub dims: Vec<usize>,
    pub arrows: Vec<Matrix>,
}

/// A morphism of representations, one matrix per vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepMap {
    pub comps: Vec<Matrix>,
}

impl Rep {
    /// Validates arrow shapes and the carrier's relations.
    pub fn new(carrier: &dyn Carrier, field: FieldSpec, dims: Vec<usize>, arrows: Vec<Matrix>) -> Result<Rep, HomError> {
        let q = carrier.quiver();
        if dims.len() != q.vertices {
            return Err(HomError::Contract(format!("{} dims for {} vertices", dims.len(), q.vertices)));
        }
        if arrows.len() != q.arrows.len() {
            return Err(HomError::Contract(format!("{} matrices for {} arrows", arrows.len(), q.arrows.len())));
        }
        for (a, (&(s, t), m)) in q.arrows.iter().zip(&arrows).enumerate() {
            if m.shape() != (dims[t], dims[s]) || m.field() != field {
                return Err(HomError::Contract(format!(
                    "arrow {a} ({s}->{t}) has shape {:?}, expected {:?}",
                    m.shape(),
                    (dims[t], dims[s])
                )));
            }
        }
        let rep = Rep { field, dims, arrows };
        carrier.check_relations(&rep).map_err(HomError::Contract)?;
        Ok(rep)
    }

    pub fn zero(carrier: &dyn Carrier, field: FieldSpec) -> Rep {
        let q = carrier.quiver();
        Rep {
            field,
            dims: vec![0; q.vertices],
            arrows: q.arrows.iter().map(|_| Matrix::zeros(field, 0, 0)).collect(),
        }
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.total_dim() == 0
    }

    /// Direct sum; the blocks of each vertex space appear in argument order.
    pub fn direct_sum(carrier: &dyn Carrier, field: FieldSpec, parts: &[&Rep]) -> Rep {
        let q = carrier.quiver();
        let dims = (0..q.vertices).map(|v| parts.iter().map(|r| r.dims[v]).sum()).collect();
        let arrows = (0..q.arrows.len())
            .map(|a| {
                let blocks: Vec<&Matrix> = parts.iter().map(|r| &r.arrows[a]).collect();
                Matrix::block_diag(field, &blocks)
            })
            .collect();
        Rep { field, dims, arrows }
    }

    /// Vertexwise tensor product with diagonal arrow action.
    pub fn tensor(&self, o: &Rep) -> Rep {
        Rep {
            field: self.field,
            dims: self.dims.iter().zip(&o.dims).map(|(a, b)| a * b).collect(),
            arrows: self.arrows.iter().zip(&o.arrows).map(|(a, b)| a.kron(b)).collect(),
        }
    }
}

impl RepMap {
    pub fn zero(src: &Rep, tgt: &Rep) -> RepMap {
        RepMap {
            comps: src.dims.iter().zip(&tgt.dims).map(|(&s, &t)| Matrix::zeros(src.field, t, s)).collect(),
        }
    }

    pub fn identity(r: &Rep) -> RepMap {
        RepMap { comps: r.dims.iter().map(|&d| Matrix::identity(r.field, d)).collect() }
    }

    /// `self ∘ g`.
    pub fn compose(&self, g: &RepMap) -> RepMap {
        RepMap { comps: self.comps.iter().zip(&g.comps).map(|(a, b)| a.mul(b)).collect() }
    }

    pub fn add(&self, o: &RepMap) -> RepMap {
        RepMap { comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn sub(&self, o: &RepMap) -> RepMap {
        RepMap { comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a.sub(b)).collect() }
    }

    pub fn neg(&self) -> RepMap {
        RepMap { comps: self.comps.iter().map(Matrix::neg).collect() }
    }

    pub fn scale(&self, s: &Scalar) -> RepMap {
        RepMap { comps: self.comps.iter().map(|m| m.scale(s)).collect() }
    }

    pub fn scale_int(&self, n: i64) -> RepMap {
        RepMap { comps: self.comps.iter().map(|m| m.scale_int(n)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Matrix::is_zero)
    }

    pub fn tensor(&self, o: &RepMap) -> RepMap {
        RepMap { comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a.kron(b)).collect() }
    }

    pub fn block_diag(field: FieldSpec, parts: &[&RepMap]) -> RepMap {
        let n = parts.first().map_or(0, |p| p.comps.len());
        RepMap {
            comps: (0..n)
                .map(|v| {
                    let blocks: Vec<&Matrix> = parts.iter().map(|p| &p.comps[v]).collect();
                    Matrix::block_diag(field, &blocks)
                })
                .collect(),
        }
    }

    /// Whether this commutes with the arrow actions of `src` and `tgt`.
    pub fn is_morphism(&self, carrier: &dyn Carrier, src: &Rep, tgt: &Rep) -> bool {
        let q = carrier.quiver();
        if self.comps.len() != q.vertices {
            return false;
        }
        for v in 0..q.vertices {
            if self.comps[v].shape() != (tgt.dims[v], src.dims[v]) {
                return false;
            }
        }
        q.arrows.iter().enumerate().all(|(a, &(s, t))| {
            tgt.arrows[a].mul(&self.comps[s]) == self.comps[t].mul(&src.arrows[a])
        })
    }

    pub fn is_iso(&self) -> bool {
        self.comps.iter().all(|m| m.rows() == m.cols() && m.rank() == m.rows())
    }
}

/// A subrepresentation given by per-vertex spanning columns, returned as a
/// representation together with its inclusion. The spans must be closed
/// under the arrow action.
pub fn subrep(carrier: &dyn Carrier, ambient: &Rep, spans: &[Matrix]) -> (Rep, RepMap) {
    let field = ambient.field;
    let bases: Vec<Matrix> = spans.iter().map(Matrix::column_basis).collect();
    let arrows = carrier
        .quiver()
        .arrows
        .iter()
        .enumerate()
        .map(|(a, &(s, t))| {
            let img = ambient.arrows[a].mul(&bases[s]);
            bases[t].solve(&img).expect("span not closed under the arrow action")
        })
        .collect();
    let dims = bases.iter().map(Matrix::cols).collect();
    (Rep { field, dims, arrows }, RepMap { comps: bases })
}

/// Kernel of a morphism with its inclusion.
pub fn kernel(carrier: &dyn Carrier, src: &Rep, f: &RepMap) -> (Rep, RepMap) {
    let field = src.field;
    let bases: Vec<Matrix> = f.comps.iter().map(Matrix::kernel_basis).collect();
    // kernel_basis has an identity block on free coordinates, so coordinates
    // of a kernel vector are read off those rows
    let free: Vec<Vec<usize>> = f
        .comps
        .iter()
        .map(|m| {
            let (_, piv) = m.rref();
            (0..m.cols()).filter(|c| !piv.contains(c)).collect()
        })
        .collect();
    let arrows = carrier
        .quiver()
        .arrows
        .iter()
        .enumerate()
        .map(|(a, &(s, t))| src.arrows[a].mul(&bases[s]).select_rows(&free[t]))
        .collect();
    let dims = bases.iter().map(Matrix::cols).collect();
    (Rep { field, dims, arrows }, RepMap { comps: bases })
}

/// Quotient of `tgt` by per-vertex subspaces (closed under the action),
/// returned with the projection and a vertexwise linear section.
pub fn quotient(carrier: &dyn Carrier, tgt: &Rep, spans: &[Matrix]) -> (Rep, RepMap, RepMap) {
    let field = tgt.field;
    let qs: Vec<Quotient> = spans.iter().zip(&tgt.dims).map(|(s, &n)| Quotient::of(field, n, s)).collect();
    let arrows = carrier
        .quiver()
        .arrows
        .iter()
        .enumerate()
        .map(|(a, &(s, t))| qs[t].proj.mul(&tgt.arrows[a]).mul(&qs[s].section))
        .collect();
    let dims = qs.iter().map(Quotient::dim).collect();
    (
        Rep { field, dims, arrows },
        RepMap { comps: qs.iter().map(|q| q.proj.clone()).collect() },
        RepMap { comps: qs.into_iter().map(|q| q.section).collect() },
    )
}

/// Cokernel of a morphism with the projection and a section.
pub fn cokernel(carrier: &dyn Carrier, tgt: &Rep, f: &RepMap) -> (Rep, RepMap, RepMap) {
    quotient(carrier, tgt, &f.comps)
}

/// A basis of `Hom(m, n)` with cheap coordinates: each basis map has a one in
/// its own free entry and zeros in the other free entries.
#[derive(Debug, Clone)]
pub struct HomBasis {
    pub maps: Vec<RepMap>,
    free: Vec<usize>,
    offsets: Vec<usize>,
}

impl HomBasis {
    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    /// Coordinates of a morphism in this basis.
    pub fn coords(&self, f: &RepMap) -> Vec<Scalar> {
        self.free
            .iter()
            .map(|&idx| {
                let v = self.offsets.partition_point(|&o| o <= idx) - 1;
                let local = idx - self.offsets[v];
                let cols = f.comps[v].cols();
                f.comps[v].get(local / cols, local % cols)
            })
            .collect()
    }

    pub fn combine(&self, field: FieldSpec, src: &Rep, tgt: &Rep, coeffs: &[Scalar]) -> RepMap {
        let mut out = RepMap::zero(src, tgt);
        for (b, c) in self.maps.iter().zip(coeffs) {
            if !c.is_zero() {
                out = out.add(&b.scale(c));
            }
        }
        let _ = field;
        out
    }
}

/// Basis of the space of morphisms `m -> n`.
pub fn hom_space(carrier: &dyn Carrier, m: &Rep, n: &Rep) -> HomBasis {
    let field = m.field;
    let q = carrier.quiver();
    let mut offsets = Vec::with_capacity(q.vertices + 1);
    let mut total = 0;
    for v in 0..q.vertices {
        offsets.push(total);
        total += m.dims[v] * n.dims[v];
    }
    let rows: usize = q.arrows.iter().map(|&(s, t)| n.dims[t] * m.dims[s]).sum();
    let mut sys = Matrix::zeros(field, rows, total);
    let mut r0 = 0;
    for (a, &(s, t)) in q.arrows.iter().enumerate() {
        // n_a X_s - X_t m_a = 0, entry (i, j)
        let (na, ma) = (&n.arrows[a], &m.arrows[a]);
        let (nt, ms) = (n.dims[t], m.dims[s]);
        if nt * ms == 0 {
            continue;
        }
        for i in 0..nt {
            for k in 0..n.dims[s] {
                let c = na.get(i, k);
                if c.is_zero() {
                    continue;
                }
                for j in 0..ms {
                    sys.add_to(r0 + i * ms + j, offsets[s] + k * ms + j, &c);
                }
            }
        }
        for l in 0..m.dims[t] {
            for j in 0..ms {
                let c = ma.get(l, j);
                if c.is_zero() {
                    continue;
                }
                let c = field.neg(&c);
                for i in 0..nt {
                    sys.add_to(r0 + i * ms + j, offsets[t] + i * m.dims[t] + l, &c);
                }
            }
        }
        r0 += nt * ms;
    }
    let (_, pivots) = sys.rref();
    let free: Vec<usize> = (0..total).filter(|c| !pivots.contains(c)).collect();
    let ker = sys.kernel_basis();
    let maps = (0..ker.cols())
        .map(|c| {
            let col = ker.col(c);
            RepMap {
                comps: (0..q.vertices)
                    .map(|v| {
                        let len = m.dims[v] * n.dims[v];
                        let piece = col.submatrix(offsets[v], offsets[v] + len, 0, 1);
                        Matrix::unflatten(&piece, n.dims[v], m.dims[v])
                    })
                    .collect(),
            }
        })
        .collect();
    offsets.push(total);
    HomBasis { maps, free, offsets }
}

/// Concatenates maps out of the summands of a direct sum.
pub fn hconcat(field: FieldSpec, tgt_dims: &[usize], parts: &[&RepMap]) -> RepMap {
    RepMap {
        comps: (0..tgt_dims.len())
            .map(|v| {
                let blocks: Vec<&Matrix> = parts.iter().map(|p| &p.comps[v]).collect();
                Matrix::hstack(field, tgt_dims[v], &blocks)
            })
            .collect(),
    }
}

/// Stacks maps into the summands of a direct sum.
pub fn vconcat(field: FieldSpec, src_dims: &[usize], parts: &[&RepMap]) -> RepMap {
    RepMap {
        comps: (0..src_dims.len())
            .map(|v| {
                let blocks: Vec<&Matrix> = parts.iter().map(|p| &p.comps[v]).collect();
                Matrix::vstack(field, src_dims[v], &blocks)
            })
            .collect(),
    }
}
