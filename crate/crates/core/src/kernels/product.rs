use crate::grpfun::{FinGroupoid, GpdMap};
use std::sync::Arc;

/// A left-nested product `((x0 × x1) × x2) × ...` remembering its factors.
#[derive(Debug, Clone)]
pub struct Factors {
    list: Vec<Arc<FinGroupoid>>,
    total: Arc<FinGroupoid>,
}

fn join(digits: &[usize], radices: &[usize]) -> usize {
    digits.iter().zip(radices).fold(0, |acc, (&d, &r)| acc * r + d)
}

fn split(mut n: usize, radices: &[usize]) -> Vec<usize> {
    let mut out = vec![0; radices.len()];
    for i in (0..radices.len()).rev() {
        out[i] = n % radices[i];
        n /= radices[i];
    }
    out
}

impl Factors {
    pub fn new(list: &[Arc<FinGroupoid>]) -> Factors {
        let mut total = list[0].clone();
        for x in &list[1..] {
            total = Arc::new(total.product(x));
        }
        Factors { list: list.to_vec(), total }
    }

    pub fn total(&self) -> &Arc<FinGroupoid> {
        &self.total
    }

    pub fn factor(&self, i: usize) -> &Arc<FinGroupoid> {
        &self.list[i]
    }

    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    /// Component of each factor.
    pub fn digits(&self, c: usize) -> Vec<usize> {
        let radices: Vec<usize> = self.list.iter().map(|x| x.len()).collect();
        split(c, &radices)
    }

    pub fn component(&self, digits: &[usize]) -> usize {
        let radices: Vec<usize> = self.list.iter().map(|x| x.len()).collect();
        join(digits, &radices)
    }

    /// Group element of each factor at component `c`.
    pub fn element_digits(&self, c: usize, x: usize) -> Vec<usize> {
        let comps = self.digits(c);
        let orders: Vec<usize> = comps.iter().enumerate().map(|(i, &ci)| self.list[i].group(ci).order()).collect();
        split(x, &orders)
    }

    pub fn element(&self, c: usize, digits: &[usize]) -> usize {
        let comps = self.digits(c);
        let orders: Vec<usize> = comps.iter().enumerate().map(|(i, &ci)| self.list[i].group(ci).order()).collect();
        join(digits, &orders)
    }

    /// The factors listed in `keep`, in that order.
    pub fn sub(&self, keep: &[usize]) -> Factors {
        let list: Vec<Arc<FinGroupoid>> = keep.iter().map(|&i| self.list[i].clone()).collect();
        Factors::new(&list)
    }

    /// Projection to `target`, which must be `self.sub(keep)`.
    pub fn select(&self, keep: &[usize], target: &Factors) -> GpdMap {
        debug_assert!(keep.iter().zip(&target.list).all(|(&i, t)| *self.list[i] == **t));
        let mut comp = Vec::new();
        let mut homs = Vec::new();
        for c in 0..self.total.len() {
            let ds = self.digits(c);
            let kept: Vec<usize> = keep.iter().map(|&i| ds[i]).collect();
            let tc = target.component(&kept);
            comp.push(tc);
            let h = (0..self.total.group(c).order())
                .map(|x| {
                    let es = self.element_digits(c, x);
                    let ke: Vec<usize> = keep.iter().map(|&i| es[i]).collect();
                    target.element(tc, &ke)
                })
                .collect();
            homs.push(h);
        }
        GpdMap { source: self.total.clone(), target: target.total.clone(), comp, homs }
    }

    /// `select` into a freshly built sub-product.
    pub fn projection(&self, keep: &[usize]) -> (Factors, GpdMap) {
        let t = self.sub(keep);
        let p = self.select(keep, &t);
        (t, p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grpfun::FinGroup;

    #[test]
    fn selections_are_functors() {
        let a = FinGroupoid::classifying(FinGroup::cyclic(2));
        let b = Arc::new(FinGroupoid::new(vec![Arc::new(FinGroup::cyclic(3)), Arc::new(FinGroup::trivial())]));
        let f = Factors::new(&[a.clone(), b.clone(), a.clone()]);
        assert_eq!(f.total().len(), 2);
        for keep in [vec![0, 2], vec![2, 1], vec![1]] {
            let (t, p) = f.projection(&keep);
            let q = GpdMap::new(p.source.clone(), p.target.clone(), p.comp.clone(), p.homs.clone());
            assert!(q.is_ok(), "{keep:?}");
            assert_eq!(t.total().len(), keep.iter().map(|&i| f.factor(i).len()).product::<usize>());
        }
    }
}
