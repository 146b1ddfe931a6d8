//! Kernels between finite groupoids: convolution, its coherence maps,
//! adjunction certificates, and the suave, prim and smooth criteria built
//! on them.
//!
//! A kernel `X -> Y` is a complex on `X × Y`; `convolve(K1, K2)` composes
//! diagrammatically (`K1` first), so the composite functor `G ∘ F` is
//! `convolve(F, G)`.

mod cert;
mod convolve;
mod file;
mod product;

pub use cert::{
    check_prim, check_smooth_certificate, check_suave, check_triangle_identities, compactness_probe, repair_unit,
    retract_transfer, search_certificate, verdier_dual, AdjunctionCertificate, Certificate, DualReport,
    InvertibilityWitness, ObjectCertificate, Retraction, SmoothCertificate, SmoothReport, TriangleVerdict, Triangles,
};
pub use convolve::{
    associator, convolve, convolve_maps, factor_through, identity_kernel, left_unitor, realize, right_unitor,
    Associator, Convolution,
};
pub use file::{
    certify_file, unit_certificate, CertKind, CertificateFile, CertifyOutcome, ComplexFile, GpdMapFile, GroupSpec, InstanceKind,
    MapFile, RepFile, SpaceFile, WitnessFile,
};
pub use product::Factors;

use crate::exactalg::{AlgError, FieldSpec};
use crate::grpfun::{carrier_of, homotopy_pullback, FinGroupoid, GpdMap, GrpError, ShriekPush};
use crate::homlib::{Complex, HomError};
use crate::posetsheaf::FinPoset;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KernelError {
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("unsupported in this instance: {0}")]
    UnsupportedInInstance(String),
    #[error("not repairable: {0}")]
    NotRepairable(String),
    #[error(transparent)]
    Grp(#[from] GrpError),
    #[error(transparent)]
    Hom(#[from] HomError),
}

impl From<AlgError> for KernelError {
    fn from(e: AlgError) -> Self {
        KernelError::Hom(HomError::Alg(e))
    }
}

/// A complex on `source × target`.
#[derive(Debug, Clone)]
pub struct Kernel {
    pub source: Arc<FinGroupoid>,
    pub target: Arc<FinGroupoid>,
    pub payload: Arc<Complex>,
}

/// Re-homes a complex onto an equal-keyed carrier (`X`, `X × pt`, `pt × X`).
pub(crate) fn transport(a: &Complex, to: &Arc<FinGroupoid>) -> Result<Complex, KernelError> {
    let car = carrier_of(to);
    if car.key() != a.carrier().key() {
        return Err(KernelError::Contract("complex lives on a different groupoid".into()));
    }
    Ok(a.map_reps(car, |r| r.clone(), |_, _, m| m.clone()))
}

fn is_point(x: &FinGroupoid) -> bool {
    x.len() == 1 && x.group(0).order() == 1
}

impl Kernel {
    pub fn new(source: Arc<FinGroupoid>, target: Arc<FinGroupoid>, payload: Complex) -> Result<Kernel, KernelError> {
        let space = Factors::new(&[source.clone(), target.clone()]);
        let payload = transport(&payload, space.total())?;
        Ok(Kernel { source, target, payload: Arc::new(payload) })
    }

    pub fn field(&self) -> FieldSpec {
        self.payload.field()
    }

    pub fn space(&self) -> Factors {
        Factors::new(&[self.source.clone(), self.target.clone()])
    }

    /// `A ∈ D(X)` as a kernel `X -> pt`.
    pub fn out_of(x: &Arc<FinGroupoid>, a: &Complex) -> Result<Kernel, KernelError> {
        Kernel::new(x.clone(), FinGroupoid::point(), a.clone())
    }

    /// `A ∈ D(X)` as a kernel `pt -> X`.
    pub fn into(x: &Arc<FinGroupoid>, a: &Complex) -> Result<Kernel, KernelError> {
        Kernel::new(FinGroupoid::point(), x.clone(), a.clone())
    }

    /// The payload as a complex on whichever side is not a point.
    pub fn as_object(&self) -> Result<Complex, KernelError> {
        if is_point(&self.target) {
            transport(&self.payload, &self.source)
        } else if is_point(&self.source) {
            transport(&self.payload, &self.target)
        } else {
            Err(KernelError::Contract("neither side of the kernel is a point".into()))
        }
    }

    /// `(id, f)_! A` on `X × Y`, realizing `f_!(A ⊗ -)`.
    pub fn graph(f: &GpdMap, a: &Complex) -> Result<Kernel, KernelError> {
        Kernel::graph_oriented(f, a, false)
    }

    /// `(f, id)_! A` on `Y × X`, realizing `A ⊗ f^*(-)`.
    pub fn cograph(f: &GpdMap, a: &Complex) -> Result<Kernel, KernelError> {
        Kernel::graph_oriented(f, a, true)
    }

    fn graph_oriented(f: &GpdMap, a: &Complex, flip: bool) -> Result<Kernel, KernelError> {
        let (x, y) = (&f.source, &f.target);
        let space = if flip { Factors::new(&[y.clone(), x.clone()]) } else { Factors::new(&[x.clone(), y.clone()]) };
        let mut comp = Vec::new();
        let mut homs = Vec::new();
        for c in 0..x.len() {
            let d = f.comp[c];
            let digits = if flip { [d, c] } else { [c, d] };
            let tc = space.component(&digits);
            comp.push(tc);
            homs.push(
                x.group(c)
                    .elements()
                    .map(|g| {
                        let h = f.homs[c][g];
                        space.element(tc, &if flip { [h, g] } else { [g, h] })
                    })
                    .collect(),
            );
        }
        let g = GpdMap::new(x.clone(), space.total().clone(), comp, homs)?;
        let payload = ShriekPush::new(&g, a.field(), 1).push(a);
        let (s, t) = if flip { (y.clone(), x.clone()) } else { (x.clone(), y.clone()) };
        Ok(Kernel { source: s, target: t, payload: Arc::new(payload) })
    }
}

/// Groupoids as a discrete poset presents them; posets with a nontrivial
/// order relation have no kernel calculus here.
pub fn groupoid_of_poset(p: &FinPoset) -> Result<Arc<FinGroupoid>, KernelError> {
    if !p.covers().is_empty() {
        return Err(KernelError::UnsupportedInInstance(
            "kernel calculus on posets is only available for discrete posets".into(),
        ));
    }
    Ok(FinGroupoid::discrete(p.len()))
}

/// A correspondence `X <- W -> Y`.
#[derive(Debug, Clone)]
pub struct Span {
    pub left: GpdMap,
    pub right: GpdMap,
}

#[derive(Debug, Clone)]
pub struct ComposedSpan {
    pub span: Span,
    /// Apex projections to the two input apexes.
    pub to_first: GpdMap,
    pub to_second: GpdMap,
}

impl Span {
    pub fn new(left: GpdMap, right: GpdMap) -> Result<Span, KernelError> {
        if *left.source != *right.source {
            return Err(KernelError::Contract("span legs must share the apex".into()));
        }
        Ok(Span { left, right })
    }

    pub fn identity(x: &Arc<FinGroupoid>) -> Span {
        Span { left: GpdMap::identity(x), right: GpdMap::identity(x) }
    }

    pub fn apex(&self) -> &Arc<FinGroupoid> {
        &self.left.source
    }

    /// `(left, right)_! 1_W` on `X × Y`.
    pub fn kernel(&self, field: FieldSpec, window: usize) -> Result<Kernel, KernelError> {
        let (x, y) = (&self.left.target, &self.right.target);
        let space = Factors::new(&[x.clone(), y.clone()]);
        let w = self.apex();
        let mut comp = Vec::new();
        let mut homs = Vec::new();
        for c in 0..w.len() {
            let tc = space.component(&[self.left.comp[c], self.right.comp[c]]);
            comp.push(tc);
            homs.push(
                w.group(c)
                    .elements()
                    .map(|g| space.element(tc, &[self.left.homs[c][g], self.right.homs[c][g]]))
                    .collect(),
            );
        }
        let g = GpdMap::new(w.clone(), space.total().clone(), comp, homs)?;
        let payload = ShriekPush::new(&g, field, window).push(&crate::grpfun::unit(w, field));
        Ok(Kernel { source: x.clone(), target: y.clone(), payload: Arc::new(payload) })
    }
}

/// Composes `X <- W1 -> Y` with `Y <- W2 -> Z` through the homotopy pullback
/// `W1 ×_Y W2`. Every groupoid map is admissible, so no class check is
/// needed.
pub fn compose_spans(s1: &Span, s2: &Span) -> Result<ComposedSpan, KernelError> {
    if *s1.right.target != *s2.left.target {
        return Err(KernelError::Contract("spans do not share the middle groupoid".into()));
    }
    let pb = homotopy_pullback(&s1.right, &s2.left)?;
    let left = s1.left.compose(&pb.p1)?;
    let right = s2.right.compose(&pb.p2)?;
    Ok(ComposedSpan { span: Span { left, right }, to_first: pb.p1, to_second: pb.p2 })
}

/// Bijective on components and an isomorphism on every group.
pub fn is_equivalence(f: &GpdMap) -> bool {
    let mut seen = vec![false; f.target.len()];
    for (c, &d) in f.comp.iter().enumerate() {
        if seen[d] || f.source.group(c).order() != f.target.group(d).order() {
            return false;
        }
        seen[d] = true;
        if f.image(c).len() != f.target.group(d).order() {
            return false;
        }
    }
    seen.iter().all(|&s| s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grpfun::FinGroup;

    #[test]
    fn span_composition_through_bc2() {
        let bc2 = FinGroupoid::classifying(FinGroup::cyclic(2));
        let s = Span::new(GpdMap::to_point(&bc2), GpdMap::to_point(&bc2)).unwrap();
        let c = compose_spans(&s, &s).unwrap();
        let apex = c.span.apex();
        assert_eq!(apex.len(), 1);
        assert_eq!(apex.group(0).order(), 4);
        assert!(apex.group(0).elements().all(|g| apex.group(0).mul(g, g) == apex.group(0).identity()));
    }

    #[test]
    fn identity_span_is_a_unit_up_to_equivalence() {
        let s3 = Arc::new(FinGroup::symmetric3());
        let sub = GpdMap::subgroup(&s3, &[0, 1]).unwrap();
        let s = Span::new(sub.clone(), GpdMap::to_point(&sub.source)).unwrap();
        let c = compose_spans(&Span::identity(&sub.target), &s).unwrap();
        assert!(is_equivalence(&c.to_second));
        let c = compose_spans(&s, &Span::identity(&s.right.target)).unwrap();
        assert!(is_equivalence(&c.to_first));
    }

    #[test]
    fn discrete_posets_only() {
        assert!(groupoid_of_poset(&FinPoset::discrete(3)).is_ok());
        let chain = FinPoset::from_labels(&["a", "b"], &[("a", "b")]).unwrap();
        assert!(matches!(groupoid_of_poset(&chain), Err(KernelError::UnsupportedInInstance(_))));
    }
}
