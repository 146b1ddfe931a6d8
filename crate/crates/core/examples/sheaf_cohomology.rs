//! Cohomology of the constant sheaf on the sphere and torus models.
use sixfun::exactalg::FieldSpec;
use sixfun::posetsheaf::{derived_sections, model, Model, Sheaf};

fn main() {
    for (name, m) in [("S^1", Model::Sphere(1)), ("S^2", Model::Sphere(2)), ("T^2", Model::ProductOfCircles)] {
        for field in [FieldSpec::Rationals, FieldSpec::prime(2).unwrap()] {
            let (p, _) = model(m);
            let k = Sheaf::constant(p.clone(), field).complex(0);
            println!("{name} over {field}: {} points, H^* = {:?}", p.len(), derived_sections(&p, &k).betti_profile());
        }
    }
}
