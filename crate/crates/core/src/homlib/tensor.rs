use super::complex::{ChainMap, Complex};
use super::rep::RepMap;
use crate::exactalg::Matrix;
use std::collections::BTreeMap;
use std::sync::Arc;

/// A bracketing of factors `0..n`, possibly permuted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bracket {
    Leaf(usize),
    Node(Box<Bracket>, Box<Bracket>),
}

impl Bracket {
    pub fn node(a: Bracket, b: Bracket) -> Bracket {
        Bracket::Node(Box::new(a), Box::new(b))
    }

    /// `((x0 ⊗ x1) ⊗ x2) ⊗ ...` over the given leaf order.
    pub fn left(order: &[usize]) -> Bracket {
        let mut b = Bracket::Leaf(order[0]);
        for &i in &order[1..] {
            b = Bracket::node(b, Bracket::Leaf(i));
        }
        b
    }

    /// `x0 ⊗ (x1 ⊗ (x2 ⊗ ...))` over the given leaf order.
    pub fn right(order: &[usize]) -> Bracket {
        let mut b = Bracket::Leaf(*order.last().unwrap());
        for &i in order[..order.len() - 1].iter().rev() {
            b = Bracket::node(Bracket::Leaf(i), b);
        }
        b
    }

    pub fn leaves(&self) -> Vec<usize> {
        match self {
            Bracket::Leaf(i) => vec![*i],
            Bracket::Node(a, b) => {
                let mut l = a.leaves();
                l.extend(b.leaves());
                l
            }
        }
    }
}

enum Tree {
    Leaf(usize, Arc<Complex>),
    Node(Box<Tree>, Box<Tree>, Arc<Complex>),
}

impl Tree {
    fn build(factors: &[&Complex], b: &Bracket) -> Tree {
        match b {
            Bracket::Leaf(i) => Tree::Leaf(*i, Arc::new(factors[*i].clone())),
            Bracket::Node(l, r) => {
                let (l, r) = (Tree::build(factors, l), Tree::build(factors, r));
                let c = Arc::new(l.complex().tensor(r.complex()));
                Tree::Node(Box::new(l), Box::new(r), c)
            }
        }
    }

    fn complex(&self) -> &Arc<Complex> {
        match self {
            Tree::Leaf(_, c) | Tree::Node(_, _, c) => c,
        }
    }

    /// Degree and position at vertex `v` of the elementary tensor with
    /// factor `i` in degree `at[i].0`, basis index `at[i].1`.
    fn position(&self, v: usize, at: &[(i32, usize)]) -> (i32, usize) {
        match self {
            Tree::Leaf(i, _) => at[*i],
            Tree::Node(l, r, _) => {
                let (p, i) = l.position(v, at);
                let (q, j) = r.position(v, at);
                let (lc, rc) = (l.complex(), r.complex());
                let n = p + q;
                let off: usize = lc
                    .degrees()
                    .filter(|&s| s < p && rc.degrees().contains(&(n - s)))
                    .map(|s| lc.dims(s)[v] * rc.dims(n - s)[v])
                    .sum();
                (n, off + i * rc.dims(q)[v] + j)
            }
        }
    }
}

/// Builds the tensor product of `factors` bracketed as `b`.
pub fn tensor_bracketed(factors: &[&Complex], b: &Bracket) -> Arc<Complex> {
    Tree::build(factors, b).complex().clone()
}

/// The canonical isomorphism between two bracketings (and orderings) of
/// the same factors: reassociation is sign-free, each transposition of
/// `x` past `y` contributes `(-1)^{|x||y|}`.
pub fn tensor_rearrange(factors: &[&Complex], from: &Bracket, to: &Bracket) -> ChainMap {
    let (tf, tt) = (Tree::build(factors, from), Tree::build(factors, to));
    let (src, tgt) = (tf.complex().clone(), tt.complex().clone());
    let field = src.field();
    let nv = src.carrier().quiver().vertices;
    let order_from = from.leaves();
    let rank_to: BTreeMap<usize, usize> = to.leaves().into_iter().enumerate().map(|(k, i)| (i, k)).collect();
    let mut comps: BTreeMap<i32, Vec<Matrix>> = src
        .degrees()
        .map(|n| (n, (0..nv).map(|v| Matrix::zeros(field, tgt.dims(n)[v], src.dims(n)[v])).collect()))
        .collect();
    let m = factors.len();
    for v in 0..nv {
        // enumerate elementary tensors factor by factor
        let mut stack: Vec<Vec<(i32, usize)>> = vec![Vec::new()];
        for f in factors {
            let mut next = Vec::new();
            for partial in &stack {
                for d in f.degrees() {
                    for i in 0..f.dims(d)[v] {
                        let mut p = partial.clone();
                        p.push((d, i));
                        next.push(p);
                    }
                }
            }
            stack = next;
        }
        for at in stack.iter().filter(|a| a.len() == m) {
            let (n, ps) = tf.position(v, at);
            let (n2, pt) = tt.position(v, at);
            debug_assert_eq!(n, n2);
            let mut odd = false;
            for a in 0..m {
                for b in a + 1..m {
                    let (x, y) = (order_from[a], order_from[b]);
                    if rank_to[&x] > rank_to[&y] && at[x].0 % 2 != 0 && at[y].0 % 2 != 0 {
                        odd = !odd;
                    }
                }
            }
            let e = if odd { -1 } else { 1 };
            comps.get_mut(&n).unwrap()[v].set_int(pt, ps, e);
        }
    }
    let comps = comps.into_iter().map(|(n, c)| (n, RepMap { comps: c })).collect();
    ChainMap::new(src, tgt, comps).expect("rearrangement is a chain map")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::FieldSpec;
    use crate::homlib::{Discrete, Rep};

    fn two_term(f: FieldSpec, lo: i32, a: usize, b: usize, seed: i64) -> Complex {
        let d = Matrix::from_fn(f, b, a, |i, j| f.int((i as i64 * 3 + j as i64 + seed) % 2));
        Complex::new(
            Discrete::vect(),
            f,
            lo,
            vec![Rep { field: f, dims: vec![a], arrows: vec![] }, Rep { field: f, dims: vec![b], arrows: vec![] }],
            vec![RepMap { comps: vec![d] }],
        )
        .unwrap()
    }

    #[test]
    fn associator_and_symmetry_are_chain_isos() {
        let f = FieldSpec::Rationals;
        let (a, b, c) = (two_term(f, -1, 2, 1, 0), two_term(f, 0, 1, 2, 1), two_term(f, 1, 2, 2, 0));
        let fs = [&a, &b, &c];
        let assoc = tensor_rearrange(&fs, &Bracket::left(&[0, 1, 2]), &Bracket::right(&[0, 1, 2]));
        assert!(assoc.is_quasi_iso());
        let swap = tensor_rearrange(&fs, &Bracket::left(&[0, 1, 2]), &Bracket::left(&[2, 0, 1]));
        assert!(swap.validate().is_ok());
        let back = tensor_rearrange(&fs, &Bracket::left(&[2, 0, 1]), &Bracket::left(&[0, 1, 2]));
        assert!(back.compose(&swap).sub(&ChainMap::identity(&swap.source)).is_zero());
    }
}
