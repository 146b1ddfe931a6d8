use super::carrier::PosetCarrier;
use super::poset::FinPoset;
use super::PosetError;
use crate::exactalg::{FieldSpec, Matrix};
use crate::homlib::{Carrier, Complex, Rep};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

/// A sheaf on a finite poset: stalks and generization maps along covers.
#[derive(Debug, Clone, PartialEq)]
pub struct Sheaf {
    pub poset: Arc<FinPoset>,
    pub rep: Rep,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SheafFile {
    pub poset_ref: String,
    pub field: FieldSpec,
    pub stalk_dims: BTreeMap<String, usize>,
    #[serde(default)]
    pub maps: BTreeMap<String, Vec<Vec<String>>>,
}

impl Sheaf {
    /// `maps[i]` is the generization map along the `i`-th cover.
    pub fn new(poset: Arc<FinPoset>, field: FieldSpec, dims: Vec<usize>, maps: Vec<Matrix>) -> Result<Sheaf, PosetError> {
        let car = PosetCarrier::new(poset.clone());
        let rep = Rep::new(car.as_ref(), field, dims, maps)?;
        Ok(Sheaf { poset, rep })
    }

    pub fn constant(poset: Arc<FinPoset>, field: FieldSpec) -> Sheaf {
        let car = PosetCarrier::new(poset.clone());
        let rep = car.rep_from(field, vec![1; poset.len()], |_, _| Matrix::identity(field, 1));
        Sheaf { poset, rep }
    }

    pub fn carrier(&self) -> Arc<dyn Carrier> {
        PosetCarrier::new(self.poset.clone())
    }

    /// The sheaf as a complex concentrated in one degree.
    pub fn complex(&self, degree: i32) -> Complex {
        Complex::concentrated(self.carrier(), self.rep.clone(), degree)
    }

    pub fn stalk(&self, label: &str) -> Option<usize> {
        self.poset.index(label).map(|i| self.rep.dims[i])
    }

    pub fn from_file(poset: Arc<FinPoset>, f: &SheafFile) -> Result<Sheaf, PosetError> {
        let mut dims = vec![0; poset.len()];
        for (label, &d) in &f.stalk_dims {
            let i = poset.index(label).ok_or_else(|| PosetError::Invalid(format!("stalk_dims: unknown element {label:?}")))?;
            dims[i] = d;
        }
        let mut maps = Vec::new();
        for &(a, b) in poset.covers() {
            let key = format!("{}<{}", poset.label(a), poset.label(b));
            let m = match f.maps.get(&key) {
                Some(e) => Matrix::from_strings(f.field, dims[b], dims[a], e)
                    .map_err(|err| PosetError::Invalid(format!("maps.{key}: {err}")))?,
                None if dims[a] == 0 || dims[b] == 0 => Matrix::zeros(f.field, dims[b], dims[a]),
                None => return Err(PosetError::Invalid(format!("maps: missing generization map {key:?}"))),
            };
            maps.push(m);
        }
        for key in f.maps.keys() {
            let ok = poset.covers().iter().any(|&(a, b)| *key == format!("{}<{}", poset.label(a), poset.label(b)));
            if !ok {
                return Err(PosetError::Invalid(format!("maps: {key:?} is not a covering relation")));
            }
        }
        Sheaf::new(poset, f.field, dims, maps)
    }

    pub fn to_file(&self, poset_ref: &str) -> SheafFile {
        let p = &self.poset;
        SheafFile {
            poset_ref: poset_ref.to_string(),
            field: self.rep.field,
            stalk_dims: (0..p.len()).map(|i| (p.label(i).to_string(), self.rep.dims[i])).collect(),
            maps: p
                .covers()
                .iter()
                .zip(&self.rep.arrows)
                .map(|(&(a, b), m)| (format!("{}<{}", p.label(a), p.label(b)), m.to_strings()))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::posetsheaf::poset::circle;

    #[test]
    fn functoriality_checked_on_load() {
        let c = Arc::new(circle());
        let f = FieldSpec::Rationals;
        let s = Sheaf::constant(c.clone(), f);
        let file = s.to_file("circle");
        let back = Sheaf::from_file(c.clone(), &file).unwrap();
        assert_eq!(back, s);
        // the circle has no nontrivial squares; use a diamond
        let d = Arc::new(
            FinPoset::from_labels(&["0", "l", "r", "1"], &[("0", "l"), ("0", "r"), ("l", "1"), ("r", "1")]).unwrap(),
        );
        let one = Matrix::identity(f, 1);
        let two = one.scale_int(2);
        let maps = d.covers().iter().map(|&(a, _)| if a == 0 { one.clone() } else if a == 1 { one.clone() } else { two.clone() }).collect();
        let err = Sheaf::new(d, f, vec![1; 4], maps).unwrap_err();
        assert!(err.to_string().contains("does not commute"));
    }
}
