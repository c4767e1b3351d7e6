//! JSON documents for spaces, relations, modules, matrices, diagnostics and
//! functor specs. Serialization is deterministic: pairs are sorted and maps
//! are ordered.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use coarse_core::category::{assemble_functor, functor_from_unitaries, FunctorSpec};
use coarse_core::lfcm::make_module;
use coarse_core::rigidity::{describe_failures, Mode, StepDiagnostics};
use coarse_core::{CMatrix, CoarseError, DimensionVector, LfcmSpace, MeasurableMap, Module, Operator, Relation, Scale, Space, C64};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] CoarseError),
    #[error("{0}")]
    Invalid(String),
    #[error("unknown reference {0:?}")]
    UnknownRef(String),
}

/// A scale on the wire: a nonnegative integer or the string `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct JScale(pub Scale);

impl Serialize for JScale {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            Scale::Finite(n) => s.serialize_u64(n),
            Scale::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for JScale {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = JScale;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a nonnegative integer or \"inf\"")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<JScale, E> {
                Ok(JScale(Scale::Finite(v)))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<JScale, E> {
                u64::try_from(v).map(|v| JScale(Scale::Finite(v))).map_err(|_| E::custom("negative distance"))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<JScale, E> {
                if v >= 0.0 && v.fract() == 0.0 && v < u64::MAX as f64 {
                    Ok(JScale(Scale::Finite(v as u64)))
                } else {
                    Err(E::custom("distance must be a nonnegative integer"))
                }
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<JScale, E> {
                if v == "inf" {
                    Ok(JScale(Scale::Infinite))
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceDoc {
    pub points: Vec<usize>,
    pub dist: Vec<Vec<JScale>>,
}

impl SpaceDoc {
    pub fn from_space(x: &Space) -> Self {
        let n = x.len();
        SpaceDoc {
            points: (0..n).collect(),
            dist: (0..n).map(|i| (0..n).map(|j| JScale(x.dist(i, j))).collect()).collect(),
        }
    }

    /// Point ids must be `0..n` in order.
    pub fn to_space(&self) -> Result<Space, FormatError> {
        if self.points.iter().enumerate().any(|(i, &p)| i != p) {
            return Err(FormatError::Invalid("point ids must be 0..n in order".into()));
        }
        if self.dist.len() != self.points.len() {
            return Err(FormatError::Invalid("dist has the wrong number of rows".into()));
        }
        let rows = self.dist.iter().map(|r| r.iter().map(|s| s.0).collect()).collect();
        Ok(Space::new(rows)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationDoc {
    /// `(y, x)` pairs, sorted.
    pub pairs: Vec<[usize; 2]>,
}

impl RelationDoc {
    pub fn from_relation(r: &Relation) -> Self {
        RelationDoc { pairs: r.pairs().map(|(y, x)| [y, x]).collect() }
    }

    pub fn to_relation(&self, source_len: usize, target_len: usize) -> Result<Relation, FormatError> {
        Ok(Relation::from_pairs(source_len, target_len, self.pairs.iter().map(|p| (p[0], p[1])))?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LfcmDoc {
    pub space: SpaceDoc,
    pub blocks: Vec<Vec<usize>>,
}

impl LfcmDoc {
    pub fn from_lfcm(x: &LfcmSpace) -> Self {
        LfcmDoc { space: SpaceDoc::from_space(x.base()), blocks: x.blocks().to_vec() }
    }

    pub fn to_lfcm(&self) -> Result<LfcmSpace, FormatError> {
        Ok(LfcmSpace::new(self.space.to_space()?, self.blocks.clone())?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModuleDoc {
    pub space_ref: String,
    /// Rank per block; every block must be listed.
    pub dims: BTreeMap<usize, usize>,
}

impl ModuleDoc {
    /// Documents only carry dimension vectors, so modules are written in the
    /// contiguous layout.
    pub fn from_module(c: &Module, space_ref: &str) -> Self {
        ModuleDoc {
            space_ref: space_ref.to_string(),
            dims: c.dims().0.into_iter().enumerate().collect(),
        }
    }

    pub fn dimension_vector(&self, block_count: usize) -> Result<DimensionVector, FormatError> {
        if let Some((&b, _)) = self.dims.iter().find(|(&b, _)| b >= block_count) {
            return Err(CoarseError::UnknownBlock { block: b, count: block_count }.into());
        }
        if self.dims.len() != block_count {
            return Err(CoarseError::DimensionMismatch { expected: block_count, got: self.dims.len() }.into());
        }
        Ok(DimensionVector(self.dims.values().copied().collect()))
    }

    pub fn to_module(&self, space: Arc<LfcmSpace>) -> Result<Module, FormatError> {
        let dims = self.dimension_vector(space.block_count())?;
        Ok(make_module(space, &dims)?)
    }
}

/// Rows of `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixDoc(pub Vec<Vec<[f64; 2]>>);

impl MatrixDoc {
    pub fn from_matrix(m: &CMatrix) -> Self {
        MatrixDoc((0..m.rows()).map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect()).collect())
    }

    pub fn to_matrix(&self) -> Result<CMatrix, FormatError> {
        let rows = self.0.len();
        let cols = self.0.first().map_or(0, Vec::len);
        if self.0.iter().any(|r| r.len() != cols) {
            return Err(FormatError::Invalid("ragged matrix".into()));
        }
        let data = self.0.iter().flatten().map(|p| C64::new(p[0], p[1])).collect();
        Ok(CMatrix::from_row_major(rows, cols, data)?)
    }
}

/// An operator between contiguous-layout modules, with its spaces inlined.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorDoc {
    pub source_space: LfcmDoc,
    pub target_space: LfcmDoc,
    pub source_dims: Vec<usize>,
    pub target_dims: Vec<usize>,
    pub matrix: MatrixDoc,
}

impl OperatorDoc {
    /// Fails unless both modules use the contiguous layout, which is the
    /// only one a dimension vector can describe.
    pub fn from_operator(t: &Operator) -> Result<Self, FormatError> {
        for c in [t.source(), t.target()] {
            if make_module(c.space().clone(), &c.dims())? != *c {
                return Err(FormatError::Invalid("module layout is not contiguous".into()));
            }
        }
        Ok(OperatorDoc {
            source_space: LfcmDoc::from_lfcm(t.source().space()),
            target_space: LfcmDoc::from_lfcm(t.target().space()),
            source_dims: t.source().dims().0,
            target_dims: t.target().dims().0,
            matrix: MatrixDoc::from_matrix(t.matrix()),
        })
    }

    /// Source and target share one `Arc` when their space documents agree,
    /// so endogenous operators round-trip as endogenous.
    pub fn to_operator(&self) -> Result<Operator, FormatError> {
        let sx = Arc::new(self.source_space.to_lfcm()?);
        let sy = if self.target_space == self.source_space { sx.clone() } else { Arc::new(self.target_space.to_lfcm()?) };
        let c = make_module(sx, &DimensionVector(self.source_dims.clone()))?;
        let d = make_module(sy, &DimensionVector(self.target_dims.clone()))?;
        Ok(Operator::new(c, d, self.matrix.to_matrix()?)?)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModeDoc {
    #[default]
    Blocks,
    Windows,
}

impl From<ModeDoc> for Mode {
    fn from(m: ModeDoc) -> Mode {
        match m {
            ModeDoc::Blocks => Mode::Blocks,
            ModeDoc::Windows => Mode::Windows,
        }
    }
}

impl From<Mode> for ModeDoc {
    fn from(m: Mode) -> ModeDoc {
        match m {
            Mode::Blocks => ModeDoc::Blocks,
            Mode::Windows => ModeDoc::Windows,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessDoc {
    pub densely_defined: JScale,
    pub coarsely_surjective: JScale,
    pub expansion_at_disc: JScale,
    pub co_expansion_at_disc: JScale,
    pub inverse_thickening: JScale,
    pub controlled: bool,
    pub co_controlled: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepDoc {
    pub delta: f64,
    #[serde(rename = "F_scale")]
    pub f_scale: JScale,
    #[serde(rename = "E_scale")]
    pub e_scale: JScale,
    pub mode: ModeDoc,
    pub relation_size: usize,
    pub witness_scales: WitnessDoc,
    /// `"success"` or the failure reasons.
    pub verdict: String,
}

impl StepDoc {
    pub fn from_diagnostics(d: &StepDiagnostics) -> Self {
        let w = &d.witness;
        StepDoc {
            delta: d.delta,
            f_scale: JScale(d.f_scale),
            e_scale: JScale(d.e_scale),
            mode: d.mode.into(),
            relation_size: d.relation_size,
            witness_scales: WitnessDoc {
                densely_defined: JScale(w.densely_defined),
                coarsely_surjective: JScale(w.coarsely_surjective),
                expansion_at_disc: JScale(w.expansion_at_disc),
                co_expansion_at_disc: JScale(w.co_expansion_at_disc),
                inverse_thickening: JScale(w.inverse_thickening),
                controlled: w.controlled,
                co_controlled: w.co_controlled,
            },
            verdict: if d.succeeded() { "success".into() } else { describe_failures(&d.failures) },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapDoc {
    pub source: String,
    pub target: String,
    pub images: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectDoc {
    pub module: String,
    pub image: String,
    pub unitary: String,
}

/// A functor in normal form with every referenced value stored by id.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct FunctorDoc {
    pub spaces: BTreeMap<String, LfcmDoc>,
    pub modules: BTreeMap<String, ModuleDoc>,
    pub matrices: BTreeMap<String, MatrixDoc>,
    pub maps: BTreeMap<String, MapDoc>,
    pub objects: Vec<ObjectDoc>,
    pub fallback: Option<String>,
}

impl FunctorDoc {
    fn lookup<'a, T>(map: &'a BTreeMap<String, T>, id: &str) -> Result<&'a T, FormatError> {
        map.get(id).ok_or_else(|| FormatError::UnknownRef(id.to_string()))
    }

    pub fn resolve(&self) -> Result<FunctorSpec, FormatError> {
        let mut spaces = BTreeMap::new();
        for (id, doc) in &self.spaces {
            spaces.insert(id.clone(), Arc::new(doc.to_lfcm()?));
        }
        let space = |id: &str| Self::lookup(&spaces, id).cloned();
        let module = |id: &str| -> Result<Module, FormatError> {
            let doc = Self::lookup(&self.modules, id)?;
            doc.to_module(space(&doc.space_ref)?)
        };
        let mut unitaries = Vec::new();
        for o in &self.objects {
            let m = Self::lookup(&self.matrices, &o.unitary)?.to_matrix()?;
            unitaries.push(Operator::new(module(&o.module)?, module(&o.image)?, m)?);
        }
        match &self.fallback {
            None => Ok(functor_from_unitaries(unitaries)?),
            Some(id) => {
                let m = Self::lookup(&self.maps, id)?;
                let f = MeasurableMap::new(space(&m.source)?, space(&m.target)?, m.images.clone())?;
                Ok(assemble_functor(unitaries, f)?)
            }
        }
    }

    /// Stores every table entry of `f` under generated ids; `source` and
    /// `target` name the spaces.
    pub fn from_functor(f: &FunctorSpec, source: &LfcmSpace, target: &LfcmSpace) -> Self {
        let mut doc = FunctorDoc::default();
        doc.spaces.insert("X".into(), LfcmDoc::from_lfcm(source));
        doc.spaces.insert("Y".into(), LfcmDoc::from_lfcm(target));
        for (i, u) in f.entries().iter().enumerate() {
            let (c, d) = (format!("C{i}"), format!("F{i}"));
            doc.modules.insert(c.clone(), ModuleDoc::from_module(u.source(), "X"));
            doc.modules.insert(d.clone(), ModuleDoc::from_module(u.target(), "Y"));
            doc.matrices.insert(format!("U{i}"), MatrixDoc::from_matrix(u.matrix()));
            doc.objects.push(ObjectDoc { module: c, image: d, unitary: format!("U{i}") });
        }
        if let Some(m) = f.fallback() {
            doc.maps.insert("f".into(), MapDoc { source: "X".into(), target: "Y".into(), images: m.images().to_vec() });
            doc.fallback = Some("f".into());
        }
        doc
    }
}
