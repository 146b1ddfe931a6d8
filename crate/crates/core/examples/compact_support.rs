//! RΓ_c of an open interval inside the circle, and of two intervals inside
//! the figure eight.
use sixfun::exactalg::FieldSpec;
use sixfun::posetsheaf::{compact_support_sections, model, Model, Sheaf};
use std::sync::Arc;

fn main() {
    let q = FieldSpec::Rationals;
    for m in [Model::IntervalInCircle, Model::FigureEight] {
        let (p, open) = model(m);
        let sub = Arc::new(p.subposet(&open));
        let a = Sheaf::constant(sub, q).complex(-1);
        let rc = compact_support_sections(&p, &open, &a).unwrap();
        let labels: Vec<&str> = open.iter().map(|&i| p.label(i)).collect();
        println!("{m:?}, J = {labels:?}: RΓ_c(J, k[1]) has H^* = {:?}", rc.betti_profile());
    }
}
