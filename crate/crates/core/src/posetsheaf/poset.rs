use super::PosetError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::sync::Arc;

/// A finite poset, viewed as a finite T0 space whose opens are the up-sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinPoset {
    labels: Vec<String>,
    leq: Vec<Vec<bool>>,
    covers: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PosetFile {
    pub elements: Vec<String>,
    pub relations: Vec<(String, String)>,
}

impl FinPoset {
    /// Builds the order generated by `relations` (pairs `a <= b`).
    pub fn new(labels: Vec<String>, relations: &[(usize, usize)]) -> Result<FinPoset, PosetError> {
        let n = labels.len();
        let distinct: BTreeSet<&String> = labels.iter().collect();
        if distinct.len() != n {
            return Err(PosetError::Invalid("duplicate element labels".into()));
        }
        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(a, b) in relations {
            if a >= n || b >= n {
                return Err(PosetError::Invalid(format!("relation ({a}, {b}) out of range")));
            }
            leq[a][b] = true;
        }
        // Floyd–Warshall closure
        for k in 0..n {
            for i in 0..n {
                if leq[i][k] {
                    for j in 0..n {
                        if leq[k][j] {
                            leq[i][j] = true;
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && leq[i][j] && leq[j][i] {
                    return Err(PosetError::Invalid(format!(
                        "antisymmetry fails for {} and {}",
                        labels[i], labels[j]
                    )));
                }
            }
        }
        let mut covers = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && leq[i][j] && !(0..n).any(|k| k != i && k != j && leq[i][k] && leq[k][j]) {
                    covers.push((i, j));
                }
            }
        }
        Ok(FinPoset { labels, leq, covers })
    }

    pub fn from_labels(labels: &[&str], relations: &[(&str, &str)]) -> Result<FinPoset, PosetError> {
        let labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        let find = |s: &str| {
            labels.iter().position(|l| l == s).ok_or_else(|| PosetError::Invalid(format!("unknown element {s:?}")))
        };
        let rel = relations.iter().map(|(a, b)| Ok((find(a)?, find(b)?))).collect::<Result<Vec<_>, PosetError>>()?;
        FinPoset::new(labels, &rel)
    }

    pub fn from_file(f: &PosetFile) -> Result<FinPoset, PosetError> {
        let labels: Vec<&str> = f.elements.iter().map(String::as_str).collect();
        let rel: Vec<(&str, &str)> = f.relations.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        FinPoset::from_labels(&labels, &rel)
    }

    pub fn to_file(&self) -> PosetFile {
        PosetFile {
            elements: self.labels.clone(),
            relations: self.covers.iter().map(|&(a, b)| (self.labels[a].clone(), self.labels[b].clone())).collect(),
        }
    }

    pub fn discrete(n: usize) -> FinPoset {
        FinPoset::new((0..n).map(|i| format!("p{i}")).collect(), &[]).expect("discrete poset")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a][b]
    }

    pub fn lt(&self, a: usize, b: usize) -> bool {
        a != b && self.leq[a][b]
    }

    /// Covering relations `a ⋖ b`, the Hasse diagram.
    pub fn covers(&self) -> &[(usize, usize)] {
        &self.covers
    }

    /// Minimal open neighbourhood `U_x`.
    pub fn up(&self, x: usize) -> Vec<usize> {
        (0..self.len()).filter(|&y| self.leq[x][y]).collect()
    }

    pub fn down(&self, x: usize) -> Vec<usize> {
        (0..self.len()).filter(|&y| self.leq[y][x]).collect()
    }

    pub fn up_closure(&self, s: &[usize]) -> Vec<usize> {
        (0..self.len()).filter(|&y| s.iter().any(|&x| self.leq[x][y])).collect()
    }

    pub fn down_closure(&self, s: &[usize]) -> Vec<usize> {
        (0..self.len()).filter(|&y| s.iter().any(|&x| self.leq[y][x])).collect()
    }

    pub fn is_up_set(&self, s: &[usize]) -> bool {
        self.up_closure(s).len() == dedup(s).len()
    }

    pub fn is_down_set(&self, s: &[usize]) -> bool {
        self.down_closure(s).len() == dedup(s).len()
    }

    /// Induced subposet on `elements` (kept in the given order).
    pub fn subposet(&self, elements: &[usize]) -> FinPoset {
        let labels = elements.iter().map(|&i| self.labels[i].clone()).collect();
        let mut rel = Vec::new();
        for (a, &x) in elements.iter().enumerate() {
            for (b, &y) in elements.iter().enumerate() {
                if self.leq[x][y] && x != y {
                    rel.push((a, b));
                }
            }
        }
        FinPoset::new(labels, &rel).expect("subposet of a poset")
    }

    /// Product order; element `(i, j)` has index `i * other.len() + j`.
    pub fn product(&self, other: &FinPoset) -> FinPoset {
        let (n, m) = (self.len(), other.len());
        let mut labels = Vec::with_capacity(n * m);
        for a in &self.labels {
            for b in &other.labels {
                labels.push(format!("({a},{b})"));
            }
        }
        let mut rel = Vec::new();
        for &(a, b) in &self.covers {
            for j in 0..m {
                rel.push((a * m + j, b * m + j));
            }
        }
        for &(a, b) in &other.covers {
            for i in 0..n {
                rel.push((i * m + a, i * m + b));
            }
        }
        FinPoset::new(labels, &rel).expect("product of posets")
    }

    /// Nondegenerate chains `x_0 < ... < x_p` inside `subset`, grouped by
    /// `p` and sorted lexicographically within each length.
    pub fn chains(&self, subset: &[usize]) -> Vec<Vec<Vec<usize>>> {
        let mut members = dedup(subset);
        members.sort();
        let mut out: Vec<Vec<Vec<usize>>> = Vec::new();
        let mut current: Vec<Vec<usize>> = members.iter().map(|&x| vec![x]).collect();
        while !current.is_empty() {
            let mut next = Vec::new();
            for c in &current {
                let last = *c.last().unwrap();
                for &y in &members {
                    if self.lt(last, y) {
                        let mut d = c.clone();
                        d.push(y);
                        next.push(d);
                    }
                }
            }
            next.sort();
            out.push(std::mem::replace(&mut current, next));
        }
        out
    }

    /// Connected components of a subset under comparability.
    pub fn components(&self, subset: &[usize]) -> Vec<Vec<usize>> {
        let members = dedup(subset);
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for &s in &members {
            if seen[s] {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut i = 0;
            while i < comp.len() {
                let x = comp[i];
                for &y in &members {
                    if !seen[y] && (self.leq[x][y] || self.leq[y][x]) {
                        seen[y] = true;
                        comp.push(y);
                    }
                }
                i += 1;
            }
            comp.sort();
            out.push(comp);
        }
        out
    }
}

fn dedup(s: &[usize]) -> Vec<usize> {
    let set: BTreeSet<usize> = s.iter().copied().collect();
    set.into_iter().collect()
}

/// An order-preserving map of finite posets.
#[derive(Debug, Clone)]
pub struct MonotoneMap {
    pub source: Arc<FinPoset>,
    pub target: Arc<FinPoset>,
    pub map: Vec<usize>,
}

impl MonotoneMap {
    pub fn new(source: Arc<FinPoset>, target: Arc<FinPoset>, map: Vec<usize>) -> Result<MonotoneMap, PosetError> {
        if map.len() != source.len() || map.iter().any(|&y| y >= target.len()) {
            return Err(PosetError::Contract("map has the wrong shape".into()));
        }
        for &(a, b) in source.covers() {
            if !target.leq(map[a], map[b]) {
                return Err(PosetError::Contract(format!(
                    "not monotone: {} <= {} but {} !<= {}",
                    source.label(a),
                    source.label(b),
                    target.label(map[a]),
                    target.label(map[b])
                )));
            }
        }
        Ok(MonotoneMap { source, target, map })
    }

    pub fn identity(p: &Arc<FinPoset>) -> MonotoneMap {
        MonotoneMap { source: p.clone(), target: p.clone(), map: (0..p.len()).collect() }
    }

    pub fn to_point(p: &Arc<FinPoset>) -> MonotoneMap {
        MonotoneMap { source: p.clone(), target: Arc::new(FinPoset::discrete(1)), map: vec![0; p.len()] }
    }

    /// Inclusion of a subset, with the induced order on the source.
    pub fn inclusion(ambient: &Arc<FinPoset>, subset: &[usize]) -> MonotoneMap {
        MonotoneMap { source: Arc::new(ambient.subposet(subset)), target: ambient.clone(), map: subset.to_vec() }
    }

    pub fn compose(&self, g: &MonotoneMap) -> MonotoneMap {
        MonotoneMap { source: g.source.clone(), target: self.target.clone(), map: g.map.iter().map(|&x| self.map[x]).collect() }
    }

    /// Elements of the source mapping into `subset` of the target.
    pub fn preimage(&self, subset: &[usize]) -> Vec<usize> {
        (0..self.source.len()).filter(|&x| subset.contains(&self.map[x])).collect()
    }

    /// For every `x` and `y' <= f(x)` some `x' <= x` with `f(x') = y'`.
    /// Exploratory only.
    pub fn is_specialization_lifting(&self) -> bool {
        (0..self.source.len()).all(|x| {
            self.target
                .down(self.map[x])
                .into_iter()
                .all(|y| self.source.down(x).into_iter().any(|x2| self.map[x2] == y))
        })
    }
}

/// `{(x, y) : f(x) = g(y)}` with the product order and both projections.
pub fn fiber_product(f: &MonotoneMap, g: &MonotoneMap) -> Result<(Arc<FinPoset>, MonotoneMap, MonotoneMap), PosetError> {
    if f.target != g.target {
        return Err(PosetError::Contract("fiber product over different bases".into()));
    }
    let (x, y) = (&f.source, &g.source);
    let pairs: Vec<(usize, usize)> =
        (0..x.len()).flat_map(|a| (0..y.len()).map(move |b| (a, b))).filter(|&(a, b)| f.map[a] == g.map[b]).collect();
    let labels = pairs.iter().map(|&(a, b)| format!("({},{})", x.label(a), y.label(b))).collect();
    let mut rel = Vec::new();
    for (i, &(a, b)) in pairs.iter().enumerate() {
        for (j, &(c, d)) in pairs.iter().enumerate() {
            if i != j && x.leq(a, c) && y.leq(b, d) {
                rel.push((i, j));
            }
        }
    }
    let p = Arc::new(FinPoset::new(labels, &rel)?);
    let p1 = MonotoneMap { source: p.clone(), target: x.clone(), map: pairs.iter().map(|q| q.0).collect() };
    let p2 = MonotoneMap { source: p.clone(), target: y.clone(), map: pairs.iter().map(|q| q.1).collect() };
    Ok((p, p1, p2))
}

/// Named finite models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Point,
    Sierpinski,
    /// `n`-fold non-Hausdorff suspension of two points, `2n + 2` elements.
    Sphere(usize),
    /// The four-point circle with the open three-point interval.
    IntervalInCircle,
    ProductOfCircles,
    /// Two circles sharing the point `a`, with two disjoint open intervals.
    FigureEight,
}

impl std::str::FromStr for Model {
    type Err = PosetError;

    fn from_str(s: &str) -> Result<Model, PosetError> {
        Ok(match s {
            "point" => Model::Point,
            "sierpinski" => Model::Sierpinski,
            "circle" => Model::Sphere(1),
            "interval-in-circle" => Model::IntervalInCircle,
            "torus" | "product-of-circles" => Model::ProductOfCircles,
            "figure-eight" => Model::FigureEight,
            _ => match s.strip_prefix("sphere:").map(str::parse::<usize>) {
                Some(Ok(n)) if n <= 6 => Model::Sphere(n),
                _ => return Err(PosetError::Invalid(format!("unknown model {s:?}"))),
            },
        })
    }
}

/// A model poset with its distinguished open subset (everything if none).
pub fn model(m: Model) -> (Arc<FinPoset>, Vec<usize>) {
    let p = match m {
        Model::Point => FinPoset::discrete(1),
        Model::Sierpinski => FinPoset::from_labels(&["s", "g"], &[("s", "g")]).unwrap(),
        Model::Sphere(1) | Model::IntervalInCircle => circle(),
        Model::Sphere(n) => sphere(n),
        Model::ProductOfCircles => circle().product(&circle()),
        Model::FigureEight => FinPoset::from_labels(
            &["a", "b1", "b2", "x1", "y1", "x2", "y2"],
            &[
                ("a", "x1"),
                ("a", "y1"),
                ("b1", "x1"),
                ("b1", "y1"),
                ("a", "x2"),
                ("a", "y2"),
                ("b2", "x2"),
                ("b2", "y2"),
            ],
        )
        .unwrap(),
    };
    let open = match m {
        Model::Sierpinski => vec![1],
        Model::IntervalInCircle => p.up(0),
        Model::FigureEight => {
            let mut u = p.up(1);
            u.extend(p.up(2));
            u.sort();
            u
        }
        _ => (0..p.len()).collect(),
    };
    (Arc::new(p), open)
}

/// `a, b < x, y`.
pub fn circle() -> FinPoset {
    FinPoset::from_labels(&["a", "b", "x", "y"], &[("a", "x"), ("a", "y"), ("b", "x"), ("b", "y")]).unwrap()
}

fn sphere(n: usize) -> FinPoset {
    let mut labels = Vec::new();
    let mut rel = Vec::new();
    for level in 0..=n {
        for side in ["a", "b"] {
            let i = labels.len();
            labels.push(format!("{side}{level}"));
            if level > 0 {
                rel.push((2 * (level - 1), i));
                rel.push((2 * (level - 1) + 1, i));
            }
        }
    }
    FinPoset::new(labels, &rel).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_subsets() {
        let c = circle();
        let idx = |s: &str| c.index(s).unwrap();
        assert!(c.is_up_set(&[idx("a"), idx("x"), idx("y")]));
        assert!(c.is_down_set(&[idx("b")]));
        assert_eq!(c.covers().len(), 4);
        assert_eq!(c.chains(&[0, 1, 2, 3]).iter().map(Vec::len).collect::<Vec<_>>(), vec![4, 4]);
    }

    #[test]
    fn sphere_sizes() {
        assert_eq!(sphere(0).len(), 2);
        assert!(sphere(0).covers().is_empty());
        assert_eq!(sphere(3).len(), 8);
    }

    #[test]
    fn fiber_products() {
        let (s, _) = model(Model::Sierpinski);
        let g = MonotoneMap::inclusion(&s, &[1]);
        let pt = MonotoneMap::inclusion(&s, &[0]);
        let (p, _, _) = fiber_product(&g, &pt).unwrap();
        assert!(p.is_empty());
        let c = Arc::new(circle());
        let id = MonotoneMap::identity(&c);
        assert_eq!(fiber_product(&id, &id).unwrap().0.len(), 4);
        let pt1 = MonotoneMap::to_point(&c);
        let (q, ..) = fiber_product(&pt1, &pt1).unwrap();
        assert_eq!(q.len(), 16);
    }

    #[test]
    fn antisymmetry_rejected() {
        assert!(FinPoset::from_labels(&["a", "b"], &[("a", "b"), ("b", "a")]).is_err());
    }
}
