//! Candidate generator sets and the procedures that certify them as
//! Cameron-Liebler sets.
//!
//! Three criteria are checked on the quadric side:
//!
//! * disjointness: every generator `π` is disjoint from exactly
//!   `(x - χ(π)) q` members;
//! * intersection numbers: the members meeting `π` in a plane, line, point
//!   or nothing number `(1, x+q, xq+x-1, (x-1)q)` for `π` in the set and
//!   `(0, x, x(q+1), xq)` otherwise;
//! * image: the characteristic vector lies in the rational row space of the
//!   point-generator incidence matrix.
//!
//! A fourth check runs on the `PG(3, q)` side: the points `P0` and planes
//! `P2` of the set must have the two-valued incidence spectra `{x, q+x}`.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::klein::{GeneratorClass, KleinModel};
use crate::linalg::{default_primes, ImageMode, ImageOracle};
use crate::proj::Pg3;

/// A set of generators of the quadric of `model`.
#[derive(Clone)]
pub struct Candidate<'m> {
    model: &'m KleinModel,
    members: BitSet,
}

impl PartialEq for Candidate<'_> {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.model, other.model) && self.members == other.members
    }
}

impl Eq for Candidate<'_> {}

impl std::fmt::Debug for Candidate<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Candidate").field("q", &self.model.q()).field("members", &self.members).finish()
    }
}

impl<'m> Candidate<'m> {
    pub fn new(model: &'m KleinModel, members: BitSet) -> Candidate<'m> {
        assert_eq!(members.capacity(), model.num_generators());
        Candidate { model, members }
    }

    pub fn empty(model: &'m KleinModel) -> Candidate<'m> {
        Candidate::new(model, BitSet::new(model.num_generators()))
    }

    pub fn full(model: &'m KleinModel) -> Candidate<'m> {
        Candidate::new(model, BitSet::full(model.num_generators()))
    }

    pub fn from_indices(model: &'m KleinModel, gens: impl IntoIterator<Item = usize>) -> Candidate<'m> {
        Candidate::new(model, BitSet::from_indices(model.num_generators(), gens))
    }

    /// The point-pencil with vertex `qpoint`.
    pub fn pencil(model: &'m KleinModel, qpoint: usize) -> Candidate<'m> {
        Candidate::from_indices(model, model.pencil(qpoint).iter().copied())
    }

    pub fn model(&self) -> &'m KleinModel {
        self.model
    }

    pub fn members(&self) -> &BitSet {
        &self.members
    }

    pub fn into_members(self) -> BitSet {
        self.members
    }

    pub fn len(&self) -> usize {
        self.members.count()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, g: usize) -> bool {
        self.members.contains(g)
    }

    /// `2(q+1)`, the size of a parameter-one set.
    pub fn unit(&self) -> usize {
        2 * (self.model.q() + 1)
    }

    /// `|L| / 2(q+1)`.
    pub fn parameter(&self) -> Result<usize> {
        let (size, unit) = (self.len(), self.unit());
        if size % unit != 0 {
            return Err(Error::NotClSized { size, unit });
        }
        Ok(size / unit)
    }

    /// `(Latin, Greek)` member counts.
    pub fn class_counts(&self) -> (usize, usize) {
        let latin = self.members.iter().filter(|&g| self.model.class(g) == GeneratorClass::Latin).count();
        (latin, self.len() - latin)
    }

    /// Characteristic vector over the generators.
    pub fn chi(&self) -> Vec<i64> {
        (0..self.model.num_generators()).map(|g| self.contains(g) as i64).collect()
    }
}

/// Points and planes of `PG(3, q)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointPlaneSystem {
    pub points: BitSet,
    pub planes: BitSet,
}

impl PointPlaneSystem {
    pub fn empty(pg: &Pg3) -> PointPlaneSystem {
        PointPlaneSystem { points: BitSet::new(pg.num_points()), planes: BitSet::new(pg.num_planes()) }
    }
}

/// Latin members become points, Greek members planes.
pub fn to_pg3(c: &Candidate<'_>) -> PointPlaneSystem {
    let pg = c.model.pg3();
    let mut sys = PointPlaneSystem::empty(pg);
    for g in c.members.iter() {
        let gen = c.model.generator(g);
        match gen.class {
            GeneratorClass::Latin => sys.points.insert(gen.origin),
            GeneratorClass::Greek => sys.planes.insert(gen.origin),
        };
    }
    sys
}

pub fn from_pg3<'m>(model: &'m KleinModel, sys: &PointPlaneSystem) -> Candidate<'m> {
    let gens =
        sys.points.iter().map(|p| model.latin_of_point(p)).chain(sys.planes.iter().map(|pl| model.greek_of_plane(pl)));
    Candidate::from_indices(model, gens)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    Disjointness,
    Intersections,
    Image,
    Property31,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Disjointness => "disjoint",
            CheckKind::Intersections => "intersections",
            CheckKind::Image => "image",
            CheckKind::Property31 => "property31",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WitnessKind {
    Generator,
    Point,
    Plane,
    Set,
}

/// First offending object in canonical order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub kind: WitnessKind,
    pub index: usize,
    pub expected: i64,
    pub observed: i64,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub check: CheckKind,
    pub passed: bool,
    pub witness: Option<Witness>,
    /// Summary value when there is no witness (e.g. ranks of the image check).
    pub expected: Option<i64>,
    pub observed: Option<i64>,
    pub millis: f64,
}

impl CheckOutcome {
    fn finish(check: CheckKind, start: Instant, witness: Option<Witness>) -> CheckOutcome {
        CheckOutcome {
            check,
            passed: witness.is_none(),
            witness,
            expected: None,
            observed: None,
            millis: start.elapsed().as_secs_f64() * 1e3,
        }
    }

    fn not_cl_sized(check: CheckKind, start: Instant, size: usize, unit: usize) -> CheckOutcome {
        let w = Witness {
            kind: WitnessKind::Set,
            index: 0,
            expected: (size / unit * unit) as i64,
            observed: size as i64,
            note: format!("size is not a multiple of {unit}"),
        };
        CheckOutcome::finish(check, start, Some(w))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckOutcome>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, kind: CheckKind) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.check == kind)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per check: check, pass, witness, expected, observed, ms.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["check", "pass", "witness", "expected", "observed", "ms"]).unwrap();
        for c in &self.checks {
            let (witness, expected, observed) = match &c.witness {
                Some(w) => (w.index as i64, Some(w.expected), Some(w.observed)),
                None => (-1, c.expected, c.observed),
            };
            let opt = |v: Option<i64>| v.map(|v| v.to_string()).unwrap_or_default();
            w.write_record([
                c.check.name().to_string(),
                c.passed.to_string(),
                witness.to_string(),
                opt(expected),
                opt(observed),
                format!("{:.3}", c.millis),
            ])
            .unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}

/// Every generator sees `(x - χ(π)) q` disjoint members.
pub fn check_disjointness(c: &Candidate<'_>) -> CheckOutcome {
    let start = Instant::now();
    let x = match c.parameter() {
        Ok(x) => x as i64,
        Err(_) => return CheckOutcome::not_cl_sized(CheckKind::Disjointness, start, c.len(), c.unit()),
    };
    let q = c.model.q() as i64;
    let members: Vec<usize> = c.members.iter().collect();
    let witness = (0..c.model.num_generators()).into_par_iter().find_map_first(|pi| {
        let row = c.model.meet_row(pi);
        let observed = members.iter().filter(|&&s| row[s] == -1).count() as i64;
        let expected = (x - c.contains(pi) as i64) * q;
        (observed != expected).then(|| Witness {
            kind: WitnessKind::Generator,
            index: pi,
            expected,
            observed,
            note: "disjoint members".into(),
        })
    });
    CheckOutcome::finish(CheckKind::Disjointness, start, witness)
}

/// Counts of members meeting `π` in a plane, line, point, or nothing.
pub fn intersection_profile(c: &Candidate<'_>, pi: usize) -> [i64; 4] {
    let mut out = [0i64; 4];
    let row = c.model.meet_row(pi);
    for s in c.members.iter() {
        out[(2 - row[s]) as usize] += 1;
    }
    out
}

/// Expected `(plane, line, point, empty)` profile for a parameter-`x` set.
pub fn expected_profile(x: i64, q: i64, in_set: bool) -> [i64; 4] {
    if in_set {
        [1, x + q, x * q + x - 1, (x - 1) * q]
    } else {
        [0, x, x * (q + 1), x * q]
    }
}

pub fn check_intersection_numbers(c: &Candidate<'_>) -> CheckOutcome {
    const BUCKETS: [&str; 4] = ["plane", "line", "point", "disjoint"];
    let start = Instant::now();
    let x = match c.parameter() {
        Ok(x) => x as i64,
        Err(_) => return CheckOutcome::not_cl_sized(CheckKind::Intersections, start, c.len(), c.unit()),
    };
    let q = c.model.q() as i64;
    let witness = (0..c.model.num_generators()).into_par_iter().find_map_first(|pi| {
        let observed = intersection_profile(c, pi);
        let expected = expected_profile(x, q, c.contains(pi));
        (0..4).find(|&b| observed[b] != expected[b]).map(|b| Witness {
            kind: WitnessKind::Generator,
            index: pi,
            expected: expected[b],
            observed: observed[b],
            note: format!("members meeting in a {}", BUCKETS[b]).replace("a disjoint", "the empty space"),
        })
    });
    CheckOutcome::finish(CheckKind::Intersections, start, witness)
}

/// Mode used when the caller does not ask for one.
pub fn default_image_mode(model: &KleinModel) -> ImageMode {
    if model.q() as u32 <= model.budget().exact_image_max_q {
        ImageMode::Exact
    } else {
        ImageMode::Modular
    }
}

/// Row-space oracle of the point-generator incidence matrix, built once per
/// model and mode.
///
/// The exact route eliminates the rows of the incidence matrix itself. The
/// modular route eliminates the Gram matrix `AᵀA`, whose rational row space
/// and rank coincide with those of `A`; its entries are the point counts
/// `θ(meet)` of pairwise generator intersections.
pub fn image_oracle(model: &KleinModel, mode: ImageMode) -> Result<&ImageOracle> {
    let n = model.num_generators();
    match mode {
        ImageMode::Exact => {
            if model.q() as u32 > model.budget().exact_image_max_q {
                return Err(Error::Budget(format!(
                    "exact image check over GF({}) exceeds the configured limit q <= {}",
                    model.q(),
                    model.budget().exact_image_max_q
                )));
            }
            Ok(model.exact_oracle.get_or_init(|| {
                let rows: Vec<Vec<i64>> = (0..model.num_points())
                    .map(|p| {
                        let mut r = vec![0i64; n];
                        model.pencil(p).iter().for_each(|&g| r[g] = 1);
                        r
                    })
                    .collect();
                ImageOracle::exact(n, &rows)
            }))
        }
        ImageMode::Modular => Ok(model.modular_oracle.get_or_init(|| {
            let q = model.q() as i64;
            let theta = |d: i8| match d {
                2 => q * q + q + 1,
                1 => q + 1,
                0 => 1,
                _ => 0,
            };
            let rows: Vec<Vec<i64>> = (0..n).map(|g| model.meet_row(g).iter().map(|&d| theta(d)).collect()).collect();
            ImageOracle::modular(n, &rows, &default_primes())
        })),
    }
}

/// `χ` lies in the rational row space of the point-generator incidence
/// matrix.
pub fn check_image(c: &Candidate<'_>, mode: ImageMode) -> Result<CheckOutcome> {
    let start = Instant::now();
    let oracle = image_oracle(c.model, mode)?;
    let extended = oracle.extended_rank(&c.chi());
    let mut out = CheckOutcome::finish(CheckKind::Image, start, None);
    out.passed = extended == oracle.rank();
    out.expected = Some(oracle.rank() as i64);
    out.observed = Some(extended as i64);
    if !out.passed {
        out.witness = Some(Witness {
            kind: WitnessKind::Set,
            index: 0,
            expected: oracle.rank() as i64,
            observed: extended as i64,
            note: format!("{mode:?} rank grows when the characteristic vector is appended"),
        });
    }
    Ok(out)
}

/// Two-valued spectra `{x, q+x}` of the point set on planes and of the plane
/// set on points, with `P2` and `P0` the large-valued ones.
pub fn check_property31(sys: &PointPlaneSystem, x: usize, pg: &Pg3) -> CheckOutcome {
    let start = Instant::now();
    let (x, q) = (x as i64, pg.q() as i64);
    let classify = |count: i64, in_set: bool| -> Option<i64> {
        // returns the expected count when `count` is wrong
        let expected = if in_set { q + x } else { x };
        (count != expected).then_some(expected)
    };
    let plane_witness = (0..pg.num_planes()).into_par_iter().find_map_first(|pl| {
        let count = pg.plane_points(pl).iter().filter(|&&p| sys.points.contains(p)).count() as i64;
        classify(count, sys.planes.contains(pl)).map(|expected| Witness {
            kind: WitnessKind::Plane,
            index: pl,
            expected,
            observed: count,
            note: "points of P0 in the plane".into(),
        })
    });
    let witness = plane_witness.or_else(|| {
        (0..pg.num_points()).into_par_iter().find_map_first(|p| {
            let count = pg.point_planes(p).iter().filter(|&&pl| sys.planes.contains(pl)).count() as i64;
            classify(count, sys.points.contains(p)).map(|expected| Witness {
                kind: WitnessKind::Point,
                index: p,
                expected,
                observed: count,
                note: "planes of P2 through the point".into(),
            })
        })
    });
    CheckOutcome::finish(CheckKind::Property31, start, witness)
}

/// All four checks.
pub fn verify_all(c: &Candidate<'_>, mode: ImageMode) -> Result<VerificationReport> {
    let checks =
        vec![check_disjointness(c), check_intersection_numbers(c), check_image(c, mode)?, check_property31_of(c)];
    Ok(VerificationReport { checks })
}

/// Point/plane spectrum check on the `PG(3, q)` image with the candidate's own parameter.
pub fn check_property31_of(c: &Candidate<'_>) -> CheckOutcome {
    match c.parameter() {
        Ok(x) => check_property31(&to_pg3(c), x, c.model.pg3()),
        Err(_) => CheckOutcome::not_cl_sized(CheckKind::Property31, Instant::now(), c.len(), c.unit()),
    }
}

/// Runs one check.
pub fn run_check(c: &Candidate<'_>, kind: CheckKind, mode: ImageMode) -> Result<CheckOutcome> {
    Ok(match kind {
        CheckKind::Disjointness => check_disjointness(c),
        CheckKind::Intersections => check_intersection_numbers(c),
        CheckKind::Image => check_image(c, mode)?,
        CheckKind::Property31 => check_property31_of(c),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CombineOp {
    Complement,
    Union,
    Difference,
}

/// Complement of `a`, disjoint union `a ∪ b`, or difference `a \ b` with
/// `b ⊆ a`. `b` is ignored for the complement.
pub fn combine<'m>(a: &Candidate<'m>, b: Option<&Candidate<'m>>, op: CombineOp) -> Result<Candidate<'m>> {
    let need_b = || b.ok_or_else(|| Error::Precondition(format!("{op:?} needs a second operand")));
    let members = match op {
        CombineOp::Complement => a.members.complement(),
        CombineOp::Union => {
            let b = need_b()?;
            if !a.members.is_disjoint(&b.members) {
                return Err(Error::Precondition("union operands are not disjoint".into()));
            }
            a.members.union(&b.members)
        }
        CombineOp::Difference => {
            let b = need_b()?;
            if !b.members.is_subset(&a.members) {
                return Err(Error::Precondition("difference operand is not a subset".into()));
            }
            a.members.difference(&b.members)
        }
    };
    Ok(Candidate::new(a.model, members))
}
