use super::cert::{
    check_smooth_certificate, search_certificate, InvertibilityWitness, ObjectCertificate, SmoothCertificate,
    SmoothReport, TriangleVerdict, Triangles,
};
use super::{groupoid_of_poset, Kernel, KernelError};
use crate::exactalg::{FieldSpec, Matrix};
use crate::grpfun::{carrier_of, FinGroup, FinGroupoid, GpdMap, GroupFile};
use crate::homlib::{Carrier, ChainMap, Complex, Rep, RepMap};
use crate::posetsheaf::{FinPoset, PosetFile};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

type MatrixFile = Vec<Vec<String>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupSpec {
    Name(String),
    Table(GroupFile),
}

/// A space of the instance: a groupoid by its component groups, or a
/// poset (only discrete posets carry kernels).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<Vec<GroupSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poset: Option<PosetFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpdMapFile {
    pub components: Vec<usize>,
    pub homs: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepFile {
    pub dims: Vec<usize>,
    pub arrows: Vec<MatrixFile>,
}

/// A bounded complex: objects from degree `lo` up, `differentials[i]`
/// leaving degree `lo + i`, one matrix per vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexFile {
    pub lo: i32,
    pub objects: Vec<RepFile>,
    #[serde(default)]
    pub differentials: Vec<Vec<MatrixFile>>,
}

/// Degree -> one matrix per vertex. Missing degrees are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapFile {
    pub components: BTreeMap<i32, Vec<MatrixFile>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessFile {
    pub inverse: ComplexFile,
    pub left: MapFile,
    pub right: MapFile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertKind {
    Adjunction,
    Suave,
    Prim,
    Smooth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstanceKind {
    Groupoid,
    Poset,
}

/// A certificate on disk. `payloads` holds `F`, `G` (adjunction), `A`, `B`
/// (suave, prim) or `L` (smooth); `two_cells` holds `alpha` and `beta`, and
/// when absent the 2-cells are searched for.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateFile {
    pub kind: CertKind,
    pub instance: InstanceKind,
    pub field: FieldSpec,
    pub objects: BTreeMap<String, SpaceFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<GpdMapFile>,
    #[serde(default = "default_window")]
    pub window: usize,
    pub payloads: BTreeMap<String, ComplexFile>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub two_cells: BTreeMap<String, MapFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invertibility_witness: Option<WitnessFile>,
}

fn default_window() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyOutcome {
    pub verdict: String,
    #[serde(default)]
    pub repaired: bool,
    #[serde(default)]
    pub searched: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residue: Option<MapFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

fn bad(path: &str, msg: impl std::fmt::Display) -> KernelError {
    KernelError::Contract(format!("{path}: {msg}"))
}

fn matrix_from(field: FieldSpec, rows: usize, cols: usize, m: &MatrixFile, path: &str) -> Result<Matrix, KernelError> {
    Matrix::from_strings(field, rows, cols, m).map_err(|e| bad(path, e))
}

impl ComplexFile {
    pub fn from_complex(c: &Complex) -> ComplexFile {
        let objects = c
            .degrees()
            .map(|n| {
                let r = c.obj(n);
                RepFile { dims: r.dims.clone(), arrows: r.arrows.iter().map(Matrix::to_strings).collect() }
            })
            .collect();
        let differentials = c
            .degrees()
            .filter(|&n| n < c.hi())
            .map(|n| c.d(n).comps.iter().map(Matrix::to_strings).collect())
            .collect();
        ComplexFile { lo: c.lo(), objects, differentials }
    }

    pub fn to_complex(&self, car: Arc<dyn Carrier>, field: FieldSpec, path: &str) -> Result<Complex, KernelError> {
        let q = car.quiver().clone();
        let mut objects = Vec::new();
        for (i, o) in self.objects.iter().enumerate() {
            let p = format!("{path}.objects[{i}]");
            if o.dims.len() != q.vertices {
                return Err(bad(&p, format!("{} dims for {} vertices", o.dims.len(), q.vertices)));
            }
            if o.arrows.len() != q.arrows.len() {
                return Err(bad(&p, format!("{} arrow matrices for {} arrows", o.arrows.len(), q.arrows.len())));
            }
            let arrows = q
                .arrows
                .iter()
                .zip(&o.arrows)
                .enumerate()
                .map(|(a, (&(s, t), m))| matrix_from(field, o.dims[t], o.dims[s], m, &format!("{p}.arrows[{a}]")))
                .collect::<Result<Vec<_>, _>>()?;
            objects.push(Rep::new(car.as_ref(), field, o.dims.clone(), arrows).map_err(|e| bad(&p, e))?);
        }
        if self.differentials.len() != objects.len().saturating_sub(1) {
            return Err(bad(
                &format!("{path}.differentials"),
                format!("{} differentials for {} objects", self.differentials.len(), objects.len()),
            ));
        }
        let mut diffs = Vec::new();
        for (i, d) in self.differentials.iter().enumerate() {
            let p = format!("{path}.differentials[{i}]");
            if d.len() != q.vertices {
                return Err(bad(&p, format!("{} matrices for {} vertices", d.len(), q.vertices)));
            }
            let comps = (0..q.vertices)
                .map(|v| matrix_from(field, objects[i + 1].dims[v], objects[i].dims[v], &d[v], &format!("{p}[{v}]")))
                .collect::<Result<Vec<_>, _>>()?;
            diffs.push(RepMap { comps });
        }
        if objects.is_empty() {
            return Ok(Complex::zero_complex(car, field));
        }
        Complex::new(car, field, self.lo, objects, diffs).map_err(|e| bad(path, e))
    }
}

impl MapFile {
    pub fn from_map(m: &ChainMap) -> MapFile {
        let components = m
            .source
            .degrees()
            .filter(|&n| !m.comp(n).is_zero())
            .map(|n| (n, m.comp(n).comps.iter().map(Matrix::to_strings).collect()))
            .collect();
        MapFile { components }
    }

    pub fn to_map(&self, source: &Arc<Complex>, target: &Arc<Complex>, path: &str) -> Result<ChainMap, KernelError> {
        let field = source.field();
        let nv = source.carrier().quiver().vertices;
        let mut comps = BTreeMap::new();
        for n in source.degrees() {
            let rep = match self.components.get(&n) {
                None => RepMap::zero(source.obj(n), target.obj(n)),
                Some(ms) => {
                    let p = format!("{path}.components.{n}");
                    if ms.len() != nv {
                        return Err(bad(&p, format!("{} matrices for {} vertices", ms.len(), nv)));
                    }
                    let comps = (0..nv)
                        .map(|v| matrix_from(field, target.dims(n)[v], source.dims(n)[v], &ms[v], &format!("{p}[{v}]")))
                        .collect::<Result<Vec<_>, _>>()?;
                    RepMap { comps }
                }
            };
            comps.insert(n, rep);
        }
        if let Some(n) = self.components.keys().find(|n| !source.degrees().contains(n)) {
            return Err(bad(&format!("{path}.components.{n}"), "degree outside the source complex"));
        }
        ChainMap::new(source.clone(), target.clone(), comps).map_err(|e| bad(path, e))
    }
}

impl SpaceFile {
    pub fn groups(names: &[&str]) -> SpaceFile {
        SpaceFile { groups: Some(names.iter().map(|s| GroupSpec::Name(s.to_string())).collect()), poset: None }
    }

    fn build(&self, kind: InstanceKind, path: &str) -> Result<Arc<FinGroupoid>, KernelError> {
        match (kind, &self.groups, &self.poset) {
            (InstanceKind::Groupoid, Some(gs), None) => {
                let comps = gs
                    .iter()
                    .enumerate()
                    .map(|(i, g)| {
                        let p = format!("{path}.groups[{i}]");
                        match g {
                            GroupSpec::Name(n) => FinGroup::by_name(n),
                            GroupSpec::Table(t) => FinGroup::from_file(t),
                        }
                        .map(Arc::new)
                        .map_err(|e| bad(&p, e))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                if comps.is_empty() {
                    return Err(bad(path, "a groupoid needs at least one component"));
                }
                Ok(Arc::new(FinGroupoid::new(comps)))
            }
            (InstanceKind::Poset, None, Some(p)) => {
                let poset = FinPoset::from_file(p).map_err(|e| bad(&format!("{path}.poset"), e))?;
                groupoid_of_poset(&poset)
            }
            (InstanceKind::Groupoid, _, _) => Err(bad(path, "groupoid instance expects `groups` only")),
            (InstanceKind::Poset, _, _) => Err(bad(path, "poset instance expects `poset` only")),
        }
    }
}

impl CertifyOutcome {
    fn pass(verdict: &str) -> CertifyOutcome {
        CertifyOutcome { verdict: verdict.into(), repaired: false, searched: false, residue: None, detail: None }
    }

    fn failed(v: &TriangleVerdict) -> CertifyOutcome {
        CertifyOutcome {
            verdict: v.name().into(),
            repaired: false,
            searched: false,
            residue: v.residue().map(MapFile::from_map),
            detail: None,
        }
    }

    pub fn is_success(&self) -> bool {
        matches!(self.verdict.as_str(), "Adjoint" | "Suave" | "Prim" | "Smooth")
    }
}

impl CertificateFile {
    pub fn parse(text: &str) -> Result<CertificateFile, KernelError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| KernelError::Contract(format!("{}: {}", e.path(), e.inner())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    fn space(&self, name: &str) -> Result<Arc<FinGroupoid>, KernelError> {
        match self.objects.get(name) {
            Some(s) => s.build(self.instance, &format!("objects.{name}")),
            None if name == "Y" => Ok(FinGroupoid::point()),
            None => Err(bad("objects", format!("missing space {name:?}"))),
        }
    }

    fn payload(&self, name: &str, x: &Arc<FinGroupoid>) -> Result<Arc<Complex>, KernelError> {
        let p = format!("payloads.{name}");
        let c = self.payloads.get(name).ok_or_else(|| bad("payloads", format!("missing {name:?}")))?;
        Ok(Arc::new(c.to_complex(carrier_of(x), self.field, &p)?))
    }

    fn gpd_map(&self, x: &Arc<FinGroupoid>, y: &Arc<FinGroupoid>) -> Result<GpdMap, KernelError> {
        match &self.map {
            Some(m) => GpdMap::new(x.clone(), y.clone(), m.components.clone(), m.homs.clone()).map_err(|e| bad("map", e)),
            None if y.len() == 1 && y.group(0).order() == 1 => Ok(GpdMap::to_point(x)),
            None => Err(bad("map", "required unless Y is a point")),
        }
    }

    fn cells(&self, tri: &Triangles) -> Result<Option<(ChainMap, ChainMap)>, KernelError> {
        match (self.two_cells.get("alpha"), self.two_cells.get("beta")) {
            (None, None) => Ok(None),
            (Some(a), Some(b)) => Ok(Some((
                a.to_map(&tri.id_x.payload, tri.fg(), "two_cells.alpha")?,
                b.to_map(tri.gf(), &tri.id_y.payload, "two_cells.beta")?,
            ))),
            _ => Err(bad("two_cells", "give both alpha and beta, or neither")),
        }
    }

    /// Records solved or supplied 2-cells.
    pub fn with_cells(mut self, alpha: &ChainMap, beta: &ChainMap) -> CertificateFile {
        self.two_cells.insert("alpha".into(), MapFile::from_map(alpha));
        self.two_cells.insert("beta".into(), MapFile::from_map(beta));
        self
    }

    /// The triangle data the file's 2-cells refer to.
    pub fn triangles(&self) -> Result<Triangles, KernelError> {
        let x = self.space("X")?;
        let y = self.space("Y")?;
        match self.kind {
            CertKind::Adjunction => {
                let xy = Arc::new(x.product(&y));
                let yx = Arc::new(y.product(&x));
                let f = self.payloads.get("F").ok_or_else(|| bad("payloads", "missing \"F\""))?;
                let g = self.payloads.get("G").ok_or_else(|| bad("payloads", "missing \"G\""))?;
                let f = Kernel::new(x.clone(), y.clone(), f.to_complex(carrier_of(&xy), self.field, "payloads.F")?)?;
                let g = Kernel::new(y, x, g.to_complex(carrier_of(&yx), self.field, "payloads.G")?)?;
                Triangles::new(&f, &g, self.window)
            }
            CertKind::Suave | CertKind::Prim => {
                let f = self.gpd_map(&x, &y)?;
                let (a, b) = (self.payload("A", &x)?, self.payload("B", &x)?);
                if self.kind == CertKind::Suave {
                    ObjectCertificate::suave_triangles(&f, &a, &b, self.window)
                } else {
                    ObjectCertificate::prim_triangles(&f, &a, &b, self.window)
                }
            }
            CertKind::Smooth => {
                let f = self.gpd_map(&x, &y)?;
                SmoothCertificate::triangles(&f, &*self.payload("L", &x)?, self.window)
            }
        }
    }

    fn witness(&self, x: &Arc<FinGroupoid>, l: &Arc<Complex>) -> Result<InvertibilityWitness, KernelError> {
        let w = self
            .invertibility_witness
            .as_ref()
            .ok_or_else(|| bad("invertibility_witness", "a smoothness certificate needs one"))?;
        let car = carrier_of(x);
        let inverse = Arc::new(w.inverse.to_complex(car.clone(), self.field, "invertibility_witness.inverse")?);
        let one = Arc::new(crate::grpfun::unit(x, self.field));
        let li = Arc::new(l.tensor(&inverse));
        let il = Arc::new(inverse.tensor(l));
        Ok(InvertibilityWitness {
            left: w.left.to_map(&li, &one, "invertibility_witness.left")?,
            right: w.right.to_map(&il, &one, "invertibility_witness.right")?,
            inverse,
        })
    }
}

fn success_name(kind: CertKind) -> &'static str {
    match kind {
        CertKind::Adjunction => "Adjoint",
        CertKind::Suave => "Suave",
        CertKind::Prim => "Prim",
        CertKind::Smooth => "Smooth",
    }
}

/// Checks (or, without 2-cells, searches for) the certificate in `file`.
pub fn certify_file(file: &CertificateFile) -> Result<CertifyOutcome, KernelError> {
    let tri = match file.triangles() {
        Ok(t) => t,
        Err(KernelError::UnsupportedInInstance(msg)) => {
            return Ok(CertifyOutcome { detail: Some(msg), ..CertifyOutcome::pass("UnsupportedInInstance") })
        }
        Err(e) => return Err(e),
    };
    let given = file.cells(&tri)?;
    if file.kind == CertKind::Smooth {
        let x = file.space("X")?;
        let y = file.space("Y")?;
        let l = file.payload("L", &x)?;
        let witness = file.witness(&x, &l)?;
        let (alpha, beta, searched) = match given {
            Some((a, b)) => (a, b, false),
            None => match search_certificate(&tri, 0) {
                Ok((a, b)) => (a, b, true),
                Err(v) => return Ok(CertifyOutcome { searched: true, ..CertifyOutcome::failed(&v) }),
            },
        };
        let cert = SmoothCertificate { map: file.gpd_map(&x, &y)?, l, alpha, beta, witness };
        return Ok(match check_smooth_certificate(&cert, file.window)? {
            SmoothReport::Smooth { repaired, .. } => CertifyOutcome { repaired, searched, ..CertifyOutcome::pass("Smooth") },
            SmoothReport::Fails(v) => CertifyOutcome { searched, ..CertifyOutcome::failed(&v) },
        });
    }
    match given {
        Some((a, b)) => Ok(match tri.check(&a, &b)? {
            TriangleVerdict::Adjoint => CertifyOutcome::pass(success_name(file.kind)),
            v => CertifyOutcome::failed(&v),
        }),
        None => Ok(match search_certificate(&tri, 0) {
            Ok(_) => CertifyOutcome { searched: true, ..CertifyOutcome::pass(success_name(file.kind)) },
            Err(v) => CertifyOutcome { searched: true, ..CertifyOutcome::failed(&v) },
        }),
    }
}

/// A file for `1` over `BG_1 ⊔ ... -> pt` without 2-cells.
pub fn unit_certificate(kind: CertKind, groups: &[&str], field: FieldSpec, window: usize) -> Result<CertificateFile, KernelError> {
    let x = SpaceFile::groups(groups).build(InstanceKind::Groupoid, "objects.X")?;
    let one = ComplexFile::from_complex(&crate::grpfun::unit(&x, field));
    let names: &[&str] = match kind {
        CertKind::Smooth => &["L"],
        CertKind::Suave | CertKind::Prim => &["A", "B"],
        CertKind::Adjunction => return Err(KernelError::Contract("adjunction files carry explicit kernels".into())),
    };
    let mut file = CertificateFile {
        kind,
        instance: InstanceKind::Groupoid,
        field,
        objects: BTreeMap::from([("X".to_string(), SpaceFile::groups(groups)), ("Y".to_string(), SpaceFile::groups(&["C1"]))]),
        map: None,
        window,
        payloads: names.iter().map(|n| (n.to_string(), one.clone())).collect(),
        two_cells: BTreeMap::new(),
        invertibility_witness: None,
    };
    if kind == CertKind::Smooth {
        let w = InvertibilityWitness::trivial(&x, field);
        file.invertibility_witness = Some(WitnessFile {
            inverse: ComplexFile::from_complex(&w.inverse),
            left: MapFile::from_map(&w.left),
            right: MapFile::from_map(&w.right),
        });
    }
    Ok(file)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_verdicts() {
        let q = FieldSpec::Rationals;
        let file = unit_certificate(CertKind::Suave, &["C3"], q, 3).unwrap();
        let tri = file.triangles().unwrap();
        let (a, b) = search_certificate(&tri, 0).unwrap();
        let file = file.with_cells(&a, &b);
        let back = CertificateFile::parse(&file.to_json()).unwrap();
        assert_eq!(back.to_json(), file.to_json());
        assert_eq!(certify_file(&back).unwrap().verdict, "Suave");

        let f2 = FieldSpec::prime(2).unwrap();
        let prim = unit_certificate(CertKind::Prim, &["C2"], f2, 3).unwrap();
        let out = certify_file(&prim).unwrap();
        assert_eq!(out.verdict, "FailsRight");
        assert!(out.residue.is_some());
    }

    #[test]
    fn diagnostics_name_the_path() {
        let mut file = unit_certificate(CertKind::Smooth, &["C2"], FieldSpec::Rationals, 2).unwrap();
        file.payloads.get_mut("L").unwrap().objects[0].dims = vec![2];
        let err = certify_file(&file).unwrap_err().to_string();
        assert!(err.contains("payloads.L.objects[0]"), "{err}");
        file.payloads.get_mut("L").unwrap().objects[0].dims = vec![1];
        file.invertibility_witness = None;
        assert!(certify_file(&file).unwrap_err().to_string().contains("invertibility_witness"));
    }

    #[test]
    fn posets_with_order_are_unsupported() {
        let mut file = unit_certificate(CertKind::Suave, &["C1"], FieldSpec::Rationals, 2).unwrap();
        file.instance = InstanceKind::Poset;
        let sierpinski = PosetFile { elements: vec!["s".into(), "u".into()], relations: vec![("s".into(), "u".into())] };
        file.objects.insert("X".into(), SpaceFile { groups: None, poset: Some(sierpinski) });
        file.objects.remove("Y");
        assert_eq!(certify_file(&file).unwrap().verdict, "UnsupportedInInstance");
    }
}
