//! JSON documents holding a generator set of the Klein quadric.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::engine::Candidate;
use crate::error::{Error, Result};
use crate::field::{Elem, Field};
use crate::klein::{quadratic_form, GeneratorClass, KleinModel, QUADRIC_TAG};
use crate::proj::ProjSubspace;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    pub h: u32,
    pub t: u32,
}

impl FieldSpec {
    pub fn of(field: &Field) -> FieldSpec {
        FieldSpec { p: field.characteristic(), h: field.base_degree(), t: field.extension_degree() }
    }

    pub fn build(&self) -> Result<Field> {
        Field::new(self.p, self.h, self.t)
    }
}

/// A generator as the reduced echelon basis of its plane in `PG(5, q^t)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorEntry {
    pub class: GeneratorClass,
    pub basis: Vec<Vec<Elem>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub construction: String,
    pub q: u64,
    pub t: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub parameters: BTreeMap<String, serde_json::Value>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Derived {
    /// `None` when the size is not a multiple of `2(q+1)`.
    pub x: Option<usize>,
    pub latin: usize,
    pub greek: usize,
    pub p0: usize,
    pub p2: usize,
}

impl Derived {
    pub fn of(c: &Candidate<'_>) -> Derived {
        let (latin, greek) = c.class_counts();
        Derived { x: c.parameter().ok(), latin, greek, p0: latin, p2: greek }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetDocument {
    pub format_version: u32,
    pub field: FieldSpec,
    pub quadric: String,
    pub generators: Vec<GeneratorEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
    pub derived: Derived,
}

impl SetDocument {
    pub fn from_candidate(c: &Candidate<'_>, provenance: Option<Provenance>) -> SetDocument {
        let model = c.model();
        let generators = c
            .members()
            .iter()
            .map(|g| {
                let gen = model.generator(g);
                GeneratorEntry { class: gen.class, basis: gen.space.rows().to_vec() }
            })
            .collect();
        SetDocument {
            format_version: FORMAT_VERSION,
            field: FieldSpec::of(model.field()),
            quadric: QUADRIC_TAG.to_string(),
            generators,
            provenance,
            derived: Derived::of(c),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serializes");
        s.push('\n');
        s
    }

    /// Parses the JSON and checks the header. Generators are resolved by
    /// [`SetDocument::candidate`].
    pub fn parse(text: &str) -> Result<SetDocument> {
        let doc: SetDocument = serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))?;
        if doc.format_version != FORMAT_VERSION {
            return Err(Error::Document(format!("unsupported format_version {}", doc.format_version)));
        }
        if doc.quadric != QUADRIC_TAG {
            return Err(Error::Document(format!("unknown quadric model {:?}", doc.quadric)));
        }
        Ok(doc)
    }

    /// Resolves the generators against `model` and cross-checks the
    /// derived block. Bases may be any spanning rows; duplicates are
    /// rejected.
    pub fn candidate<'m>(&self, model: &'m KleinModel) -> Result<Candidate<'m>> {
        let field = model.field();
        if FieldSpec::of(field) != self.field {
            return Err(Error::Document(format!("document field {:?} does not match the model", self.field)));
        }
        let mut members = Vec::with_capacity(self.generators.len());
        for (i, entry) in self.generators.iter().enumerate() {
            let bad = |why: &str| Error::Document(format!("generator {i}: {why}"));
            if entry.basis.iter().flatten().any(|&e| !field.contains(e)) {
                return Err(bad("element outside the field"));
            }
            if entry.basis.iter().any(|r| r.len() == 6 && quadratic_form(field, r) != Elem::ZERO) {
                return Err(bad("basis vector off the quadric"));
            }
            let space = ProjSubspace::from_rows(field, 6, entry.basis.clone()).map_err(|e| bad(&e.to_string()))?;
            let g = model.generator_index(&space).ok_or_else(|| bad("not a generator of the quadric"))?;
            if model.class(g) != entry.class {
                return Err(bad("class label does not match the plane"));
            }
            members.push(g);
        }
        let c = Candidate::from_indices(model, members.iter().copied());
        if c.len() != members.len() {
            return Err(Error::Document("duplicate generator".into()));
        }
        let derived = Derived::of(&c);
        if derived != self.derived {
            return Err(Error::Document(format!(
                "derived block {:?} does not match the recomputed {:?}",
                self.derived, derived
            )));
        }
        Ok(c)
    }

    /// Same set with canonical bases, order and derived block.
    pub fn canonicalize(&self, model: &KleinModel) -> Result<SetDocument> {
        let c = self.candidate(model)?;
        Ok(SetDocument::from_candidate(&c, self.provenance.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(model: &KleinModel) -> SetDocument {
        let prov = Provenance {
            construction: "pencils".into(),
            q: 2,
            t: 1,
            seed: Some(4),
            parameters: BTreeMap::from([("x".to_string(), serde_json::json!(1))]),
        };
        SetDocument::from_candidate(&Candidate::pencil(model, 4), Some(prov))
    }

    #[test]
    fn round_trip() {
        let m = KleinModel::over(2).unwrap();
        let d = doc(&m);
        let text = d.to_json();
        let back = SetDocument::parse(&text).unwrap();
        assert_eq!(back, d);
        assert_eq!(back.to_json(), text);
        assert_eq!(back.candidate(&m).unwrap(), Candidate::pencil(&m, 4));
        assert_eq!(d.derived, Derived { x: Some(1), latin: 3, greek: 3, p0: 3, p2: 3 });
    }

    #[test]
    fn generators_are_increasing_and_isotropic() {
        let m = KleinModel::over(3).unwrap();
        let d = SetDocument::from_candidate(&Candidate::full(&m), None);
        assert!(d.generators.windows(2).all(|w| w[0].basis < w[1].basis));
        let f = m.field();
        assert!(d.generators.iter().flat_map(|g| &g.basis).all(|r| quadratic_form(f, r) == Elem::ZERO));
    }

    #[test]
    fn canonicalizing_rewrite_is_stable() {
        let m = KleinModel::over(2).unwrap();
        let mut d = doc(&m);
        d.generators.reverse();
        let f = m.field();
        // a non-reduced basis of the same plane
        let b = &mut d.generators[0].basis;
        let sum: Vec<Elem> = b[0].iter().zip(&b[1]).map(|(&a, &c)| f.add(a, c)).collect();
        b[0] = sum;
        let once = d.canonicalize(&m).unwrap();
        assert_eq!(once, doc(&m));
        assert_eq!(once.canonicalize(&m).unwrap().to_json(), once.to_json());
    }

    #[test]
    fn rejects_bad_documents() {
        let m = KleinModel::over(2).unwrap();
        let base = doc(&m);
        let mut d = base.clone();
        d.generators[0].basis[0] = vec![Elem(1), Elem(0), Elem(0), Elem(0), Elem(0), Elem(1)];
        assert!(matches!(d.candidate(&m), Err(Error::Document(_))));
        let mut d = base.clone();
        d.generators[1] = d.generators[0].clone();
        assert!(d.candidate(&m).is_err());
        let mut d = base.clone();
        d.derived.x = Some(2);
        assert!(d.candidate(&m).is_err());
        let mut d = base.clone();
        d.generators[0].basis[0][0] = Elem(9);
        assert!(d.candidate(&m).is_err());
        let mut d = base.clone();
        d.field.t = 2;
        assert!(d.candidate(&m).is_err());
        assert!(SetDocument::parse("{\"format_version\": 1}").is_err());
        let text = base.to_json().replace(QUADRIC_TAG, "X0X1");
        assert!(SetDocument::parse(&text).is_err());
    }
}
