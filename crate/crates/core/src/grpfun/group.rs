use super::GrpError;
use crate::exactalg::{FieldSpec, Matrix};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, VecDeque};

/// A finite group by multiplication table: `table[a][b] = a·b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinGroup {
    labels: Vec<String>,
    table: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
    generators: Vec<usize>,
    /// `(generator index, previous element)` reaching each element from the
    /// identity by left multiplication; `None` for the identity.
    parent: Vec<Option<(usize, usize)>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupFile {
    pub elements: Vec<String>,
    pub table: Vec<Vec<usize>>,
}

impl FinGroup {
    pub fn new(labels: Vec<String>, table: Vec<Vec<usize>>) -> Result<FinGroup, GrpError> {
        let n = labels.len();
        if n == 0 || n > 256 {
            return Err(GrpError::Invalid(format!("group order {n} outside 1..=256")));
        }
        if table.len() != n || table.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return Err(GrpError::Invalid("table is not an n×n array of element indices".into()));
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|a| table[e][a] == a && table[a][e] == a))
            .ok_or_else(|| GrpError::Invalid("no identity element".into()))?;
        let mut inverse = vec![0; n];
        for a in 0..n {
            inverse[a] = (0..n)
                .find(|&b| table[a][b] == identity && table[b][a] == identity)
                .ok_or_else(|| GrpError::Invalid(format!("{} has no inverse", labels[a])))?;
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(GrpError::Invalid(format!(
                            "associativity fails for ({}, {}, {})",
                            labels[a], labels[b], labels[c]
                        )));
                    }
                }
            }
        }
        let mut g = FinGroup { labels, table, identity, inverse, generators: Vec::new(), parent: Vec::new() };
        let mut gens = Vec::new();
        let mut span = g.generated(&gens);
        for a in 0..n {
            if !span.contains(&a) {
                gens.push(a);
                span = g.generated(&gens);
            }
        }
        g.generators = gens;
        g.parent = g.words();
        Ok(g)
    }

    pub fn from_file(f: &GroupFile) -> Result<FinGroup, GrpError> {
        FinGroup::new(f.elements.clone(), f.table.clone())
    }

    pub fn to_file(&self) -> GroupFile {
        GroupFile { elements: self.labels.clone(), table: self.table.clone() }
    }

    pub fn trivial() -> FinGroup {
        FinGroup::cyclic(1)
    }

    pub fn cyclic(n: usize) -> FinGroup {
        let labels = (0..n).map(|i| format!("g{i}")).collect();
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        FinGroup::new(labels, table).expect("cyclic group")
    }

    /// Permutations of three letters, composed as functions.
    pub fn symmetric3() -> FinGroup {
        let perms: Vec<[usize; 3]> = vec![[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0], [2, 0, 1]];
        let labels = ["e", "(01)", "(12)", "(02)", "(012)", "(021)"].iter().map(|s| s.to_string()).collect();
        let compose = |a: &[usize; 3], b: &[usize; 3]| [a[b[0]], a[b[1]], a[b[2]]];
        let table = perms
            .iter()
            .map(|a| perms.iter().map(|b| perms.iter().position(|c| *c == compose(a, b)).unwrap()).collect())
            .collect();
        FinGroup::new(labels, table).expect("S3")
    }

    /// `(a, b)` has index `a * other.order() + b`.
    pub fn product(&self, other: &FinGroup) -> FinGroup {
        let m = other.order();
        let mut labels = Vec::new();
        for a in &self.labels {
            for b in &other.labels {
                labels.push(format!("({a},{b})"));
            }
        }
        let n = self.order() * m;
        let table = (0..n)
            .map(|x| (0..n).map(|y| self.mul(x / m, y / m) * m + other.mul(x % m, y % m)).collect())
            .collect();
        FinGroup::new(labels, table).expect("product group")
    }

    pub fn by_name(name: &str) -> Result<FinGroup, GrpError> {
        match name {
            "S3" => Ok(FinGroup::symmetric3()),
            "C2xC2" | "V4" => Ok(FinGroup::cyclic(2).product(&FinGroup::cyclic(2))),
            _ => match name.strip_prefix('C').map(str::parse::<usize>) {
                Some(Ok(n)) if (1..=24).contains(&n) => Ok(FinGroup::cyclic(n)),
                _ => Err(GrpError::Invalid(format!("unknown group {name:?}"))),
            },
        }
    }

    pub fn order(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, g: usize) -> &str {
        &self.labels[g]
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order()
    }

    /// Subgroup generated by `gens`, sorted.
    pub fn generated(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = BTreeSet::from([self.identity]);
        let mut queue = VecDeque::from([self.identity]);
        while let Some(x) = queue.pop_front() {
            for &s in gens {
                let y = self.mul(s, x);
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        seen.into_iter().collect()
    }

    fn words(&self) -> Vec<Option<(usize, usize)>> {
        let mut parent = vec![None; self.order()];
        let mut seen = vec![false; self.order()];
        seen[self.identity] = true;
        let mut queue = VecDeque::from([self.identity]);
        while let Some(x) = queue.pop_front() {
            for (i, &s) in self.generators.iter().enumerate() {
                let y = self.mul(s, x);
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = Some((i, x));
                    queue.push_back(y);
                }
            }
        }
        parent
    }

    /// Extends generator matrices to all elements along fixed words.
    pub fn element_matrices(&self, field: FieldSpec, dim: usize, gens: &[Matrix]) -> Vec<Matrix> {
        let mut out: Vec<Option<Matrix>> = vec![None; self.order()];
        out[self.identity] = Some(Matrix::identity(field, dim));
        let mut order: Vec<usize> = self.elements().collect();
        order.sort_by_key(|&g| self.word_len(g));
        for g in order {
            if let Some((i, prev)) = self.parent[g] {
                let m = gens[i].mul(out[prev].as_ref().unwrap());
                out[g] = Some(m);
            }
        }
        out.into_iter().map(Option::unwrap).collect()
    }

    fn word_len(&self, mut g: usize) -> usize {
        let mut n = 0;
        while let Some((_, p)) = self.parent[g] {
            g = p;
            n += 1;
        }
        n
    }

    /// Whether `f` is a homomorphism `self -> target`.
    pub fn is_hom(&self, target: &FinGroup, f: &[usize]) -> bool {
        f.len() == self.order()
            && f.iter().all(|&x| x < target.order())
            && self.elements().all(|a| self.elements().all(|b| f[self.mul(a, b)] == target.mul(f[a], f[b])))
    }

    /// Left coset representatives of `sub` (first is the identity), and for
    /// each element `g` the pair `(i, l)` with `g = r_i l`.
    pub fn cosets(&self, sub: &[usize]) -> (Vec<usize>, Vec<(usize, usize)>) {
        let mut reps = vec![self.identity];
        let mut which = vec![None; self.order()];
        for &l in sub {
            which[l] = Some((0, l));
        }
        for g in self.elements() {
            if which[g].is_none() {
                let i = reps.len();
                reps.push(g);
                for &l in sub {
                    which[self.mul(g, l)] = Some((i, l));
                }
            }
        }
        (reps, which.into_iter().map(Option::unwrap).collect())
    }

    /// Whether the order is a power of `p`.
    pub fn is_p_group(&self, p: u64) -> bool {
        let mut n = self.order() as u64;
        while p > 1 && n % p == 0 {
            n /= p;
        }
        n == 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s3_structure() {
        let g = FinGroup::symmetric3();
        assert_eq!(g.order(), 6);
        assert_eq!(g.generators().len(), 2);
        let c2 = g.generated(&[1]);
        let (reps, which) = g.cosets(&c2);
        assert_eq!(reps.len(), 3);
        for x in g.elements() {
            let (i, l) = which[x];
            assert_eq!(g.mul(reps[i], l), x);
        }
    }

    #[test]
    fn element_matrices_are_a_representation() {
        let g = FinGroup::cyclic(4);
        let f = FieldSpec::Rationals;
        let gen = Matrix::from_rows(f, &[vec![0, -1], vec![1, 0]]);
        let ms = g.element_matrices(f, 2, &[gen]);
        for a in g.elements() {
            for b in g.elements() {
                assert_eq!(ms[g.mul(a, b)], ms[a].mul(&ms[b]));
            }
        }
    }

    #[test]
    fn rejects_non_groups() {
        let labels = vec!["a".to_string(), "b".to_string()];
        assert!(FinGroup::new(labels.clone(), vec![vec![0, 0], vec![0, 0]]).is_err());
        assert!(FinGroup::new(labels, vec![vec![0, 1], vec![1, 0]]).is_ok());
    }
}
