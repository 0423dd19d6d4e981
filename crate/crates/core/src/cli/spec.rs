//! Manifold spec files: one chart germ per document.

use crate::chern::HermitianData;
use crate::error::{GeomError, Result};
use crate::jet::{Jet, JetMatrix, Mono, MAX_DIM};
use crate::normal_coords::structure_from_b;
use crate::structure::{random_deformation, structure_from_deformation, AlmostComplexStructure};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Largest accepted jet order.
pub const MAX_ORDER: u32 = 8;

/// `J^2 = -I` residual above which a spec is rejected.
pub const VALIDATION_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldSpec {
    pub n: usize,
    pub order: u32,
    pub structure: StructureBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StructureKind {
    J0,
    /// Entries are `B_{k,l}`; `A` is derived.
    #[serde(rename = "B-normal")]
    BNormal,
    /// Entries are `P_{k,l}` of the `2n x 2n` deformation `J = (I + P) J0 (I + P)^{-1}`.
    /// Without entries, a seeded random deformation is used.
    #[serde(rename = "deformation")]
    Deformation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureBlock {
    pub kind: StructureKind,
    #[serde(default)]
    pub entries: Vec<Entry>,
}

/// `H = I + sum of entries`; entries fill the upper triangle `k <= l`, the lower one is conjugate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricBlock {
    #[serde(default)]
    pub entries: Vec<Entry>,
}

/// Coefficient `re + i im` of `z^alpha zbar^beta` in the matrix entry `(k, l)`, indices from 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Entry {
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
    pub k: usize,
    pub l: usize,
    pub re: f64,
    pub im: f64,
}

fn parse_error(path: impl Into<String>, message: impl Into<String>) -> GeomError {
    GeomError::Parse { path: path.into(), message: message.into() }
}

/// Parses and validates a spec; the structure it describes must satisfy `J^2 = -I`.
pub fn parse_manifold_spec(text: &str) -> Result<ManifoldSpec> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let spec: ManifoldSpec = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { "$".to_string() } else { format!("$.{path}") };
        parse_error(path, e.into_inner().to_string())
    })?;
    spec.check_schema()?;
    let s = spec.structure(None)?;
    let res = s.validate().residual();
    if res > VALIDATION_TOL {
        return Err(GeomError::Validation(format!("J^2 = -I residual {res:.3e} exceeds {VALIDATION_TOL:.0e}")));
    }
    spec.metric(None)?;
    Ok(spec)
}

pub fn serialize_manifold_spec(spec: &ManifoldSpec) -> String {
    serde_json::to_string_pretty(spec).expect("specs serialize")
}

impl ManifoldSpec {
    fn check_entry(&self, e: &Entry, path: &str, max_index: usize) -> Result<()> {
        for (name, v) in [("alpha", &e.alpha), ("beta", &e.beta)] {
            if v.len() != self.n {
                return Err(parse_error(
                    format!("{path}.{name}"),
                    format!("expected {} exponents, found {}", self.n, v.len()),
                ));
            }
        }
        let deg: u32 = e.alpha.iter().chain(&e.beta).sum();
        if deg > self.order {
            return Err(parse_error(path, format!("|alpha| + |beta| = {deg} exceeds order {}", self.order)));
        }
        for (name, v) in [("k", e.k), ("l", e.l)] {
            if v == 0 || v > max_index {
                return Err(parse_error(format!("{path}.{name}"), format!("index {v} outside 1..={max_index}")));
            }
        }
        if !e.re.is_finite() || !e.im.is_finite() {
            return Err(parse_error(path, "coefficient is not finite"));
        }
        Ok(())
    }

    fn check_schema(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_DIM {
            return Err(parse_error("$.n", format!("dimension must lie in 1..={MAX_DIM}")));
        }
        if self.order == 0 || self.order > MAX_ORDER {
            return Err(parse_error("$.order", format!("order must lie in 1..={MAX_ORDER}")));
        }
        let max_index = match self.structure.kind {
            StructureKind::J0 if !self.structure.entries.is_empty() => {
                return Err(parse_error("$.structure.entries", "kind J0 takes no entries"));
            }
            StructureKind::Deformation => 2 * self.n,
            _ => self.n,
        };
        for (i, e) in self.structure.entries.iter().enumerate() {
            self.check_entry(e, &format!("$.structure.entries[{i}]"), max_index)?;
        }
        if let Some(m) = &self.metric {
            for (i, e) in m.entries.iter().enumerate() {
                let path = format!("$.metric.entries[{i}]");
                self.check_entry(e, &path, self.n)?;
                if e.k > e.l {
                    return Err(parse_error(format!("{path}.k"), "metric entries fill the upper triangle (k <= l)"));
                }
            }
        }
        Ok(())
    }

    fn effective_order(&self, order: Option<u32>) -> u32 {
        order.unwrap_or(self.order)
    }

    fn matrix(&self, entries: &[Entry], size: usize, order: u32) -> JetMatrix {
        let mut m = JetMatrix::zeros(size, size, self.n, order);
        for e in entries {
            let mono = Mono::new(&e.alpha, &e.beta);
            if mono.degree() > order {
                continue;
            }
            m.get_mut(e.k - 1, e.l - 1).add_term(mono, Complex64::new(e.re, e.im));
        }
        m.map(|f| f.clone().exact())
    }

    /// The structure at the spec order or at `order` when given.
    pub fn structure(&self, order: Option<u32>) -> Result<AlmostComplexStructure> {
        let order = self.effective_order(order);
        let entries = &self.structure.entries;
        match self.structure.kind {
            StructureKind::J0 => Ok(AlmostComplexStructure::j0(self.n, order)),
            StructureKind::BNormal => structure_from_b(self.matrix(entries, self.n, order)),
            StructureKind::Deformation if entries.is_empty() => {
                structure_from_deformation(&random_deformation(self.n, order, self.seed.unwrap_or(0)))
            }
            StructureKind::Deformation => structure_from_deformation(&self.matrix(entries, 2 * self.n, order)),
        }
        .map_err(|e| GeomError::Validation(format!("structure: {e}")))
    }

    pub fn metric(&self, order: Option<u32>) -> Result<HermitianData> {
        let order = self.effective_order(order);
        let entries = self.metric.as_ref().map(|m| m.entries.as_slice()).unwrap_or(&[]);
        let upper = self.matrix(entries, self.n, order);
        let h = JetMatrix::from_fn(self.n, self.n, |k, l| {
            let one = if k == l { Jet::one(self.n, order) } else { Jet::zero(self.n, order) };
            let f = if k <= l { upper.get(k, l).clone() } else { upper.get(l, k).conj() };
            &one + &f
        });
        HermitianData::new(h).map_err(|e| GeomError::Validation(format!("metric: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXB: &str = r#"{"n": 2, "order": 4,
        "structure": {"kind": "B-normal", "entries": [{"alpha": [0, 1], "beta": [0, 0], "k": 1, "l": 1, "re": 0.3, "im": 0.1}]}}"#;

    #[test]
    fn j0_document() {
        let spec = parse_manifold_spec(r#"{"n": 2, "order": 3, "structure": {"kind": "J0"}}"#).unwrap();
        assert_eq!(spec.structure.kind, StructureKind::J0);
        assert_eq!(spec.structure(None).unwrap().validate().residual(), 0.0);
    }

    #[test]
    fn fixb_document_derives_a() {
        let spec = parse_manifold_spec(FIXB).unwrap();
        let s = spec.structure(None).unwrap();
        assert!(s.validate().residual() < 1e-11);
        assert!(s.b().distance(crate::fixtures::fix_b(4).b()) < 1e-15);
        assert!(s.a().distance(crate::fixtures::fix_b(4).a()) < 1e-15);
    }

    #[test]
    fn entry_above_order_is_rejected_with_path() {
        let text = FIXB.replace(r#""alpha": [0, 1]"#, r#""alpha": [3, 2]"#);
        match parse_manifold_spec(&text) {
            Err(GeomError::Parse { path, .. }) => assert_eq!(path, "$.structure.entries[0]"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn schema_errors_carry_the_path() {
        let text = FIXB.replace(r#""re": 0.3"#, r#""re": "x""#);
        match parse_manifold_spec(&text) {
            Err(GeomError::Parse { path, .. }) => assert_eq!(path, "$.structure.entries[0].re"),
            other => panic!("{other:?}"),
        }
        match parse_manifold_spec(r#"{"n": 2, "order": 3, "structure": {"kind": "K"}}"#) {
            Err(GeomError::Parse { path, .. }) => assert_eq!(path, "$.structure.kind"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn round_trip() {
        let spec = parse_manifold_spec(FIXB).unwrap();
        let text = serialize_manifold_spec(&spec);
        let again = parse_manifold_spec(&text).unwrap();
        assert_eq!(spec, again);
        assert_eq!(text, serialize_manifold_spec(&again));
    }

    #[test]
    fn metric_is_completed_hermitian() {
        let text = r#"{"n": 2, "order": 3, "structure": {"kind": "J0"},
            "metric": {"entries": [{"alpha": [0, 1], "beta": [0, 0], "k": 1, "l": 2, "re": 0.2, "im": 0.0}]}}"#;
        let spec = parse_manifold_spec(text).unwrap();
        let h = spec.metric(None).unwrap();
        assert!(h.matrix().get(1, 0).distance(&h.matrix().get(0, 1).conj()) == 0.0);
        assert!(h.matrix().get(0, 0).distance(&Jet::one(2, 3)) == 0.0);
    }

    #[test]
    fn non_unit_structure_is_rejected() {
        // the symmetrized P(0) has row sum 1.5, so I + P may be singular
        let text = r#"{"n": 1, "order": 2, "structure": {"kind": "deformation",
            "entries": [{"alpha": [0], "beta": [0], "k": 1, "l": 1, "re": 3.0, "im": 0.0}]}}"#;
        assert!(matches!(parse_manifold_spec(text), Err(GeomError::Validation(_))));
    }
}
