//! The norm f_!1 -> f_*1 for BG -> pt, and a Mackey decomposition.
use sixfun::exactalg::FieldSpec;
use sixfun::grpfun::{is_cohomologically_proper, mackey_check, FinGroup, FinGroupoid, GpdMap, GroupoidCarrier};
use std::sync::Arc;

fn main() {
    for g in ["C2", "C3", "C4", "S3"] {
        for k in ["Q", "F2", "F3"] {
            let field: FieldSpec = k.parse().unwrap();
            let x = FinGroupoid::classifying(FinGroup::by_name(g).unwrap());
            let r = is_cohomologically_proper(&GpdMap::to_point(&x), field, 3);
            println!("B{g} -> pt over {k}: {:?} (char ∤ |G|: {})", r.verdict, r.predicate);
        }
    }
    let s3 = Arc::new(FinGroup::symmetric3());
    let f = GpdMap::subgroup(&s3, &[0, 4, 5]).unwrap();
    let g = GpdMap::subgroup(&s3, &[0, 1]).unwrap();
    let m = GroupoidCarrier::new(f.source.clone()).trivial(FieldSpec::Rationals);
    let r = mackey_check(&f, &g, &m, 0).unwrap();
    println!("res_C2 ind_C3^S3 k: dims {:?} vs {:?}, iso found: {}", r.lhs.dims, r.rhs.dims, r.holds());
}
