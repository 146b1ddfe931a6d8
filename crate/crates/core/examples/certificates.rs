//! Searching for suave, prim and smooth certificates of the unit over BC_n.
use sixfun::exactalg::FieldSpec;
use sixfun::grpfun::{unit, FinGroup, FinGroupoid, GpdMap};
use sixfun::kernels::{check_smooth_certificate, search_certificate, InvertibilityWitness, ObjectCertificate, SmoothCertificate};
use std::sync::Arc;

fn main() {
    for (n, k) in [(3, "Q"), (3, "F3"), (2, "F2")] {
        let field: FieldSpec = k.parse().unwrap();
        let x = FinGroupoid::classifying(FinGroup::cyclic(n));
        let f = GpdMap::to_point(&x);
        let one = Arc::new(unit(&x, field));
        let suave = ObjectCertificate::suave_triangles(&f, &one, &one, 3).unwrap();
        let prim = ObjectCertificate::prim_triangles(&f, &one, &one, 3).unwrap();
        let show = |r: Result<_, sixfun::kernels::TriangleVerdict>| match r {
            Ok(_) => "certified".to_string(),
            Err(v) => v.name().to_string(),
        };
        println!("BC{n} over {k}: suave {}, prim {}", show(search_certificate(&suave, 0)), show(search_certificate(&prim, 0)));
    }
    let q = FieldSpec::Rationals;
    let x = FinGroupoid::classifying(FinGroup::cyclic(2));
    let f = GpdMap::to_point(&x);
    let l = Arc::new(unit(&x, q));
    let tri = SmoothCertificate::triangles(&f, &l, 3).unwrap();
    let (alpha, beta) = search_certificate(&tri, 0).unwrap();
    let cert = SmoothCertificate { map: f, l, alpha: alpha.scale(&q.int(5)), beta, witness: InvertibilityWitness::trivial(&x, q) };
    println!("mis-scaled smooth certificate: {:?}", matches!(check_smooth_certificate(&cert, 3).unwrap(), sixfun::kernels::SmoothReport::Smooth { repaired: true, .. }));
}
