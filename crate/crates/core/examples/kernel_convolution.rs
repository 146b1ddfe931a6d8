//! Convolving kernels between classifying groupoids and checking the
//! unitors and associator.
use sixfun::exactalg::FieldSpec;
use sixfun::grpfun::{unit, FinGroup, FinGroupoid, GpdMap};
use sixfun::kernels::{associator, convolve, identity_kernel, left_unitor, Kernel};

fn main() {
    let q = FieldSpec::Rationals;
    let x = FinGroupoid::classifying(FinGroup::cyclic(2));
    let y = FinGroupoid::classifying(FinGroup::cyclic(3));
    let k = Kernel::graph(&GpdMap::to_point(&x), &unit(&x, q)).unwrap();
    let l = Kernel::cograph(&GpdMap::to_point(&y), &unit(&y, q)).unwrap();
    let c = convolve(&k, &l, 3).unwrap();
    println!("BC2 -> pt -> BC3: H^* = {:?}", c.result.payload.betti_profile());
    let u = left_unitor(&convolve(&identity_kernel(&x, q), &k, 3).unwrap()).unwrap();
    println!("left unitor quasi-iso: {}", u.is_quasi_iso());
    let a = associator(&identity_kernel(&x, q), &k, &l, 3).unwrap();
    println!("associator quasi-iso: {}", a.forward.is_quasi_iso());
}
