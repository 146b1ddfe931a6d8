use proptest::prelude::*;
use sixfun::axioms::checks::{gen_kernel_case, gen_poset_case, kernel_calculus, shrink, Case, PosetCase};
use sixfun::axioms::gen::{gen_complex, gen_rep};
use sixfun::axioms::{run, Suite, SuiteConfig};
use sixfun::exactalg::FieldSpec;
use sixfun::grpfun::{
    carrier_of, dual, mackey_check, restrict, shriek_push, star_push, unit, upper_shriek, FinGroup, FinGroupoid, GpdMap,
    GroupoidCarrier,
};
use sixfun::homlib::{chain_map_basis, combine, derived_hom, homotopic, projective_replacement, ChainMap, Complex};
use sixfun::kernels::{convolve, realize, repair_unit, search_certificate, Kernel, ObjectCertificate};
use std::collections::BTreeMap;
use std::sync::Arc;

const Q: FieldSpec = FieldSpec::Rationals;

fn f2() -> FieldSpec {
    FieldSpec::prime(2).unwrap()
}

fn field(i: usize) -> FieldSpec {
    [Q, f2(), FieldSpec::prime(3).unwrap()][i]
}

fn rhom(a: &Complex, b: &Complex, w: usize) -> BTreeMap<i32, usize> {
    let h = derived_hom(&Arc::new(a.clone()), b, w).unwrap();
    let top = h.valid_to().unwrap_or(i32::MAX);
    h.betti_profile().into_iter().filter(|&(n, _)| n <= top).collect()
}

fn subgroup_maps() -> Vec<GpdMap> {
    let s3 = Arc::new(FinGroup::symmetric3());
    let c4 = Arc::new(FinGroup::cyclic(4));
    vec![
        GpdMap::subgroup(&s3, &[0, 1]).unwrap(),
        GpdMap::subgroup(&s3, &[0, 4, 5]).unwrap(),
        GpdMap::subgroup(&c4, &[0, 2]).unwrap(),
        GpdMap::subgroup(&s3, &[0]).unwrap(),
    ]
}

fn bg(n: usize) -> Arc<FinGroupoid> {
    FinGroupoid::classifying(FinGroup::cyclic(n))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn adjunction_triple_on_homology(seed in any::<u64>(), which in 0usize..4, k in 0usize..3) {
        let f = &subgroup_maps()[which];
        let k = field(k);
        let a = gen_complex(seed, &carrier_of(&f.source), k, 2).unwrap();
        let b = gen_complex(seed ^ 1, &carrier_of(&f.target), k, 2).unwrap();
        prop_assert_eq!(rhom(&shriek_push(f, &a, 3), &b, 3), rhom(&a, &restrict(f, &b), 3));
        prop_assert_eq!(rhom(&restrict(f, &b), &a, 3), rhom(&b, &star_push(f, &a, 3), 3));
        // étale: f^! is f^*
        prop_assert_eq!(upper_shriek(f, &b).betti_profile(), restrict(f, &b).betti_profile());
    }

    #[test]
    fn projection_formula_to_a_point(seed in any::<u64>(), n in 2usize..4, k in 0usize..3) {
        let k = field(k);
        let x = bg(n);
        let f = GpdMap::to_point(&x);
        let a = gen_complex(seed, &carrier_of(&x), k, 2).unwrap();
        let b = gen_complex(seed ^ 7, &carrier_of(&f.target), k, 2).unwrap();
        let lhs = shriek_push(&f, &a.tensor(&restrict(&f, &b)), 4);
        let rhs = shriek_push(&f, &a, 4).tensor(&b);
        let from = [lhs.valid_from(), rhs.valid_from()].into_iter().flatten().max().unwrap_or(i32::MIN);
        let cut = |c: &Complex| c.betti_profile().into_iter().filter(|&(d, _)| d >= from).collect::<BTreeMap<_, _>>();
        prop_assert_eq!(cut(&lhs), cut(&rhs));
    }

    #[test]
    fn mackey_for_random_modules(seed in any::<u64>(), i in 0usize..4, j in 0usize..4, k in 0usize..3) {
        let maps = subgroup_maps();
        let (f, g) = (&maps[i], &maps[j]);
        prop_assume!(f.target == g.target);
        let m = gen_rep(seed, &f.source, field(k), 2).unwrap();
        prop_assert!(mackey_check(f, g, &m, seed).unwrap().holds());
    }

    #[test]
    fn kernel_coherence(seed in any::<u64>(), k in 0usize..2) {
        let case = gen_kernel_case(seed, field(k), 3, 3);
        prop_assert_eq!(kernel_calculus(&case), Ok(()));
    }

    #[test]
    fn realization_is_functorial(seed in any::<u64>()) {
        let case = gen_kernel_case(seed, Q, 3, 3);
        let x = &case.spaces;
        let k1 = Kernel::new(x[0].clone(), x[1].clone(), case.kernels[0][0].clone()).unwrap();
        let k2 = Kernel::new(x[1].clone(), x[2].clone(), case.kernels[1][0].clone()).unwrap();
        let a = case.object[0].clone();
        let step = realize(&k2, &realize(&k1, &a, 3).unwrap(), 3).unwrap();
        let once = realize(&convolve(&k1, &k2, 3).unwrap().result, &a, 3).unwrap();
        prop_assert_eq!(step.betti_profile(), once.betti_profile());
    }

    /// Units for a fixed counit agree up to homotopy, and a certified suave
    /// pair gives the Hom isomorphism `Hom(f_!(A ⊗ C), D) = Hom(C, B ⊗ f^*D)`.
    #[test]
    fn suave_objects(seed in any::<u64>(), n in 2usize..4, scale in 2i64..5) {
        let x = bg(n);
        let f = GpdMap::to_point(&x);
        let rep = gen_rep(seed, &x, Q, 2).unwrap();
        let a = Complex::concentrated(GroupoidCarrier::new(x.clone()), rep, 0);
        let b = dual(&x, &a);
        let tri = ObjectCertificate::suave_triangles(&f, &a, &b, 3).unwrap();
        let (alpha, beta) = search_certificate(&tri, seed).unwrap();
        let other = repair_unit(&tri, &alpha.scale(&Q.int(scale)), &beta).unwrap();
        prop_assert!(tri.check(&other, &beta).unwrap().is_adjoint());
        prop_assert!(other.sub(&alpha).is_zero() || homotopic(&other, &alpha).is_ok());

        let c = gen_complex(seed ^ 3, &carrier_of(&x), Q, 2).unwrap();
        let d = gen_complex(seed ^ 5, &carrier_of(&f.target), Q, 2).unwrap();
        let lhs = rhom(&shriek_push(&f, &a.tensor(&c), 0), &d, 3);
        let rhs = rhom(&c, &b.tensor(&restrict(&f, &d)), 3);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn homotopic_maps_agree_on_homology(seed in any::<u64>(), k in 0usize..3, coeffs in proptest::collection::vec(0i64..3, 12)) {
        let k = field(k);
        let x = bg(2);
        let a = Arc::new(gen_complex(seed, &carrier_of(&x), k, 2).unwrap());
        let b = Arc::new(gen_complex(seed ^ 11, &carrier_of(&x), k, 2).unwrap());
        let basis = chain_map_basis(&a, &b);
        let pick = |off: usize| {
            let c: Vec<_> = (0..basis.len()).map(|i| k.int(coeffs[(i + off) % coeffs.len()])).collect();
            combine(&a, &b, &basis, &c)
        };
        let (f, g) = (pick(0), pick(5));
        if homotopic(&f, &g).is_ok() {
            for n in a.degrees() {
                prop_assert!(f.sub(&g).on_homology(n).iter().all(|m| m.is_zero()));
            }
        }
        let zero = ChainMap::zero(&a, &a);
        // the identity is null-homotopic exactly when the complex is acyclic
        prop_assert_eq!(homotopic(&ChainMap::identity(&a), &zero).is_ok(), a.is_acyclic());
    }

    #[test]
    fn projective_replacement_is_a_quasi_iso(seed in any::<u64>(), poset in 1usize..6) {
        let case = gen_poset_case(seed, f2(), poset, 2, "U", 1);
        let a = Arc::new(case.object(0));
        let r = projective_replacement(&a, 6);
        prop_assert!(r.valid_from.is_none());
        prop_assert!(r.map.is_quasi_iso());
    }

    /// `Hom(c ⊗ d, e) = Hom(c, Hom(d, e))` for `d` free over `F_2[C_2]`.
    #[test]
    fn tensor_hom_adjunction(seed in any::<u64>(), m in 1usize..3) {
        let x = bg(2);
        let car = GroupoidCarrier::new(x.clone());
        let g = x.group(0);
        let free = car.rep_from(f2(), vec![2 * m], |_, s| {
            let mut mat = sixfun::exactalg::Matrix::zeros(f2(), 2 * m, 2 * m);
            for i in 0..m {
                for h in g.elements() {
                    mat.set_int(2 * i + g.mul(s, h), 2 * i + h, 1);
                }
            }
            mat
        });
        let d = Complex::concentrated(car, free, 0);
        let c = gen_complex(seed, &carrier_of(&x), f2(), 2).unwrap();
        let e = gen_complex(seed ^ 9, &carrier_of(&x), f2(), 2).unwrap();
        let lhs = rhom(&c.tensor(&d), &e, 4);
        let rhs = rhom(&c, &d.internal_hom(&e), 4);
        prop_assert_eq!(lhs.get(&0), rhs.get(&0));
    }

    #[test]
    fn shrinking_preserves_failure(seed in any::<u64>(), bound in 1usize..4) {
        let big = |c: &PosetCase| c.objects[0].iter().map(|p| p.degrees().map(|n| p.dims(n).iter().sum::<usize>()).sum::<usize>()).sum::<usize>() > bound;
        let case = gen_poset_case(seed, Q, 6, 2, "U", 1);
        prop_assume!(big(&case));
        let small = shrink(case, big);
        prop_assert!(big(&small));
        prop_assert!(small.candidates().iter().all(|c| !big(c)));
    }

    #[test]
    fn reports_are_deterministic(seed in any::<u64>()) {
        let mut cfg = SuiteConfig::new(seed, f2());
        cfg.suites = vec![Suite::Excision, Suite::Mackey, Suite::Kernels];
        cfg.cases = Some(5);
        let (a, b) = (run(&cfg).unwrap(), run(&cfg).unwrap());
        prop_assert_eq!(a.to_json(), b.to_json());
        prop_assert!(a.ok());
    }
}

#[test]
fn unit_is_prim_exactly_away_from_p() {
    for (n, k, prim) in [(2, Q, true), (3, Q, true), (2, FieldSpec::prime(3).unwrap(), true), (2, f2(), false), (3, FieldSpec::prime(3).unwrap(), false)] {
        let x = bg(n);
        let one = Arc::new(unit(&x, k));
        let tri = ObjectCertificate::prim_triangles(&GpdMap::to_point(&x), &one, &one, 3).unwrap();
        assert_eq!(search_certificate(&tri, 0).is_ok(), prim, "BC{n} over {k}");
    }
}
