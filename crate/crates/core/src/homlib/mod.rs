//! Bounded cochain complexes over a representation category.
//!
//! Both geometric instances present their module categories as quiver
//! representations: a finite poset through its Hasse diagram (with
//! commutativity relations), a finite groupoid through one loop per group
//! generator (with the group relations). Everything generic (kernels,
//! cokernels, sums, Hom spaces, tensor products with diagonal action) lives
//! here; projectives, covers and internal Hom come from the [`Carrier`].

mod complex;
mod linsys;
mod rep;
mod replace;
mod tensor;

pub use complex::{ChainMap, Complex, HomComplexData, Homology, Homotopy, VertexHomology};
pub use linsys::{affine_homotopy_solve, chain_map_basis, combine, homotopic, homotopy_inverse, lift, HomotopyProblem, NotHomotopic};
pub use rep::{cokernel, hconcat, hom_space, kernel, quotient, subrep, vconcat, HomBasis, Rep, RepMap};
pub use replace::{derived_hom, projective_replacement, Replacement, DEFAULT_WINDOW};
pub use tensor::{tensor_bracketed, tensor_rearrange, Bracket};

use crate::exactalg::{AlgError, FieldSpec, Matrix};
use std::any::Any;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HomError {
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("truncation window insufficient: {needed} degrees needed, {available} available")]
    TruncationInsufficient { needed: usize, available: usize },
    #[error(transparent)]
    Alg(#[from] AlgError),
}

/// Vertices and arrows `(source, target)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quiver {
    pub vertices: usize,
    pub arrows: Vec<(usize, usize)>,
}

/// A category of finite-dimensional representations of a quiver with
/// relations, with enough projectives.
pub trait Carrier: fmt::Debug + Send + Sync {
    /// Structural identity; complexes can only be combined over equal keys.
    fn key(&self) -> String;

    fn quiver(&self) -> &Quiver;

    /// Relations beyond arrow shapes (commutativity, group relations).
    fn check_relations(&self, _rep: &Rep) -> Result<(), String> {
        Ok(())
    }

    /// Whether every representation over `field` is projective.
    fn all_projective(&self, field: FieldSpec) -> bool;

    /// The projective generated at vertex `v`.
    fn projective(&self, v: usize, field: FieldSpec) -> Rep;

    /// The morphism `projective(v) -> target` sending the generator to
    /// `vector` (a column in `target` at `v`).
    fn projective_map(&self, v: usize, target: &Rep, vector: &Matrix) -> RepMap;

    /// Vectors `(v, x)` generating `rep`.
    fn cover_generators(&self, rep: &Rep) -> Vec<(usize, Matrix)>;

    /// Underived internal Hom.
    fn internal_hom(&self, m: &Rep, n: &Rep) -> Rep;

    /// `Hom(m, n) -> Hom(m2, n2)`, `phi ↦ g ∘ phi ∘ f` for `f: m2 -> m` and
    /// `g: n -> n2`.
    #[allow(clippy::too_many_arguments)]
    fn internal_hom_map(&self, m: &Rep, n: &Rep, m2: &Rep, n2: &Rep, f: &RepMap, g: &RepMap) -> RepMap;

    fn as_any(&self) -> &dyn Any;
}

pub fn same_carrier(a: &dyn Carrier, b: &dyn Carrier) -> bool {
    a.key() == b.key()
}

/// `n` disjoint copies of vector spaces: no arrows. `Discrete(1)` is Vect.
#[derive(Debug, Clone)]
pub struct Discrete {
    quiver: Quiver,
}

impl Discrete {
    pub fn new(n: usize) -> Self {
        Discrete { quiver: Quiver { vertices: n, arrows: Vec::new() } }
    }

    pub fn vect() -> Arc<dyn Carrier> {
        Arc::new(Discrete::new(1))
    }
}

impl Carrier for Discrete {
    fn key(&self) -> String {
        format!("discrete:{}", self.quiver.vertices)
    }

    fn quiver(&self) -> &Quiver {
        &self.quiver
    }

    fn all_projective(&self, _field: FieldSpec) -> bool {
        true
    }

    fn projective(&self, v: usize, field: FieldSpec) -> Rep {
        let mut dims = vec![0; self.quiver.vertices];
        dims[v] = 1;
        Rep { field, dims, arrows: Vec::new() }
    }

    fn projective_map(&self, v: usize, target: &Rep, vector: &Matrix) -> RepMap {
        let p = self.projective(v, target.field);
        let mut m = RepMap::zero(&p, target);
        m.comps[v] = vector.clone();
        m
    }

    fn cover_generators(&self, rep: &Rep) -> Vec<(usize, Matrix)> {
        let mut out = Vec::new();
        for (v, &d) in rep.dims.iter().enumerate() {
            let id = Matrix::identity(rep.field, d);
            for i in 0..d {
                out.push((v, id.col(i)));
            }
        }
        out
    }

    fn internal_hom(&self, m: &Rep, n: &Rep) -> Rep {
        Rep { field: m.field, dims: m.dims.iter().zip(&n.dims).map(|(a, b)| a * b).collect(), arrows: Vec::new() }
    }

    fn internal_hom_map(&self, _m: &Rep, _n: &Rep, _m2: &Rep, _n2: &Rep, f: &RepMap, g: &RepMap) -> RepMap {
        // row-major vec(g X f) = (g ⊗ fᵀ) vec(X)
        RepMap { comps: f.comps.iter().zip(&g.comps).map(|(f, g)| g.kron(&f.transpose())).collect() }
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}
