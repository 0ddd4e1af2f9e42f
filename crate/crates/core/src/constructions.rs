//! Constructions of Cameron-Liebler sets, all produced on the `PG(3, q)`
//! side as point/plane systems.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::engine::{Candidate, PointPlaneSystem};
use crate::error::{Error, Result};
use crate::field::{Elem, Field};
use crate::klein::KleinModel;
use crate::proj::{rref, theta, Pg3, ProjSubspace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Maximality {
    Unknown,
    Maximal,
    Extendable,
}

/// Pairwise disjoint lines of `PG(3, q)`, by line index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialSpread {
    pub lines: Vec<usize>,
    pub maximality: Maximality,
}

impl PartialSpread {
    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn covered_points(&self, pg: &Pg3) -> BitSet {
        BitSet::from_indices(pg.num_points(), self.lines.iter().flat_map(|&l| pg.line_points(l).iter().copied()))
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Points on the lines and planes through them.
pub fn from_disjoint_lines(pg: &Pg3, lines: &[usize]) -> Result<PointPlaneSystem> {
    let mut sys = PointPlaneSystem::empty(pg);
    for (i, &a) in lines.iter().enumerate() {
        for &b in &lines[..i] {
            if pg.line_points(a).iter().any(|p| pg.line_points(b).binary_search(p).is_ok()) {
                return Err(Error::LinesMeet(b, a));
            }
        }
        pg.line_points(a).iter().for_each(|&p| {
            sys.points.insert(p);
        });
        pg.line_planes(a).iter().for_each(|&pl| {
            sys.planes.insert(pl);
        });
    }
    Ok(sys)
}

/// Greedy partial spread. Seed 0 scans lines in canonical order, any other
/// seed in a seeded random order. A scan that runs to the end is maximal.
pub fn greedy_partial_spread(pg: &Pg3, seed: u64, stop_size: Option<usize>) -> PartialSpread {
    let mut order: Vec<usize> = (0..pg.num_lines()).collect();
    if seed != 0 {
        order.shuffle(&mut rng(seed));
    }
    let mut covered = BitSet::new(pg.num_points());
    let mut lines = Vec::new();
    for l in order {
        if stop_size.is_some_and(|s| lines.len() >= s) {
            return PartialSpread { lines, maximality: Maximality::Unknown };
        }
        if pg.line_points(l).iter().all(|&p| !covered.contains(p)) {
            pg.line_points(l).iter().for_each(|&p| {
                covered.insert(p);
            });
            lines.push(l);
        }
    }
    // covered points only grow, so every rejected line stays blocked
    PartialSpread { lines, maximality: Maximality::Maximal }
}

/// No line of `PG(3, q)` avoids every line of the spread. Updates the flag.
pub fn is_maximal(pg: &Pg3, spread: &mut PartialSpread) -> bool {
    let covered = spread.covered_points(pg);
    let maximal = (0..pg.num_lines()).all(|l| pg.line_points(l).iter().any(|&p| covered.contains(p)));
    spread.maximality = if maximal { Maximality::Maximal } else { Maximality::Extendable };
    maximal
}

/// Holes of the spread and planes containing none of its lines.
pub fn holes_construction(pg: &Pg3, spread: &PartialSpread) -> PointPlaneSystem {
    let points = spread.covered_points(pg).complement();
    let blocked =
        BitSet::from_indices(pg.num_planes(), spread.lines.iter().flat_map(|&l| pg.line_planes(l).iter().copied()));
    PointPlaneSystem { points, planes: blocked.complement() }
}

/// Union of pencils with pairwise non-collinear vertices.
pub fn pencil_union<'m>(model: &'m KleinModel, vertices: &[usize]) -> Result<Candidate<'m>> {
    for (i, &a) in vertices.iter().enumerate() {
        if let Some(&b) = vertices[..i].iter().find(|&&b| model.collinear(a, b)) {
            return Err(Error::Precondition(format!("pencil vertices {b} and {a} are collinear")));
        }
    }
    Ok(Candidate::from_indices(model, vertices.iter().flat_map(|&v| model.pencil(v).iter().copied())))
}

/// Greedy partial ovoid of `x` pairwise non-collinear quadric points; seed 0
/// scans in canonical order.
pub fn greedy_partial_ovoid(model: &KleinModel, x: usize, seed: u64) -> Result<Vec<usize>> {
    let mut order: Vec<usize> = (0..model.num_points()).collect();
    if seed != 0 {
        order.shuffle(&mut rng(seed));
    }
    let mut chosen: Vec<usize> = Vec::new();
    for p in order {
        if chosen.len() == x {
            break;
        }
        if chosen.iter().all(|&c| !model.collinear(c, p)) {
            chosen.push(p);
        }
    }
    if chosen.len() < x {
        return Err(Error::Precondition(format!(
            "greedy partial ovoid stopped at {} points, {x} requested",
            chosen.len()
        )));
    }
    Ok(chosen)
}

/// Histogram `points of the set in the plane -> number of planes`.
pub fn plane_spectrum(pg: &Pg3, points: &BitSet) -> BTreeMap<usize, usize> {
    let mut out = BTreeMap::new();
    for pl in 0..pg.num_planes() {
        let k = pg.plane_points(pl).iter().filter(|&&p| points.contains(p)).count();
        *out.entry(k).or_insert(0) += 1;
    }
    out
}

/// Planes holding exactly `count` points of `points`.
fn planes_with(pg: &Pg3, points: &BitSet, count: usize) -> BitSet {
    BitSet::from_indices(
        pg.num_planes(),
        (0..pg.num_planes()).filter(|&pl| pg.plane_points(pl).iter().filter(|&&p| points.contains(p)).count() == count),
    )
}

fn is_subfield_vector(field: &Field, v: &[Elem]) -> bool {
    v.iter().all(|&e| field.in_subfield(e))
}

fn require_degree(field: &Field, t: u32, what: &str) -> Result<()> {
    if field.extension_degree() != t {
        return Err(Error::Precondition(format!(
            "{what} needs a degree-{t} tower, the field has degree {}",
            field.extension_degree()
        )));
    }
    Ok(())
}

/// The Baer subgeometry `PG(3, q)` of `PG(3, q^2)` and its planes.
pub fn baer_construction(pg: &Pg3) -> Result<PointPlaneSystem> {
    let field = pg.field().clone();
    require_degree(&field, 2, "the Baer construction")?;
    let points = BitSet::from_indices(
        pg.num_points(),
        (0..pg.num_points()).filter(|&p| is_subfield_vector(&field, pg.point(p))),
    );
    let planes =
        BitSet::from_indices(pg.num_planes(), (0..pg.num_planes()).filter(|&pl| points.contains(pg.dual_point(pl))));
    Ok(PointPlaneSystem { points, planes })
}

/// A `GF(q)`-subspace `W` of `GF(q^t)^4` given by `2t` spanning vectors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearSetSpec {
    pub t: u32,
    pub basis: Vec<Vec<Elem>>,
}

impl LinearSetSpec {
    /// Standard basis vectors, which span the Baer subgeometry when `t = 2`.
    pub fn standard(field: &Field) -> LinearSetSpec {
        let t = field.extension_degree();
        let basis = (0..(2 * t as usize).min(4))
            .map(|i| (0..4).map(|j| if i == j { Elem::ONE } else { Elem::ZERO }).collect())
            .collect();
        LinearSetSpec { t, basis }
    }
}

/// Every nonzero `GF(q)`-combination of `vectors`, plus the number of
/// combinations that vanish.
fn subfield_combinations(field: &Field, vectors: &[Vec<Elem>]) -> (Vec<Vec<Elem>>, u64) {
    let q = field.subfield_order() as u64;
    let mut out = Vec::new();
    let mut zero = 0;
    for code in 1..q.pow(vectors.len() as u32) {
        let mut v = vec![Elem::ZERO; 4];
        let mut c = code;
        for w in vectors {
            let coef = Elem((c % q) as u32);
            c /= q;
            if !coef.is_zero() {
                for (e, &x) in v.iter_mut().zip(w) {
                    *e = field.add(*e, field.mul(coef, x));
                }
            }
        }
        if v.iter().all(|e| e.is_zero()) {
            zero += 1;
        } else {
            out.push(v);
        }
    }
    (out, zero)
}

fn points_of_vectors(pg: &Pg3, vectors: &[Vec<Elem>]) -> BitSet {
    BitSet::from_indices(pg.num_points(), vectors.iter().map(|v| pg.point_index(v).unwrap()))
}

/// `B(W)`: points of `PG(3, q^t)` spanned by nonzero vectors of `W`.
pub fn linear_set_points(pg: &Pg3, spec: &LinearSetSpec) -> Result<BitSet> {
    let field = pg.field();
    let expected = 2 * spec.t as usize;
    if spec.basis.len() != expected || spec.basis.iter().any(|v| v.len() != 4) {
        return Err(Error::Precondition(format!("a rank-{expected} linear set needs {expected} vectors of length 4")));
    }
    let (vectors, zero) = subfield_combinations(field, &spec.basis);
    if zero > 0 {
        // q^(n - rank) combinations vanish, the trivial one included
        let q = field.subfield_order() as u64;
        let mut kernel = 0;
        while q.pow(kernel + 1) <= zero + 1 {
            kernel += 1;
        }
        return Err(Error::RankDeficient { rank: expected - kernel as usize, expected });
    }
    Ok(points_of_vectors(pg, &vectors))
}

/// `(q^{2t} - 1) / (q - 1)`, the size of a scattered linear set.
pub fn scattered_size(q: u64, t: u32) -> usize {
    theta(2 * t - 1, q) as usize
}

pub fn scattered_test(pg: &Pg3, spec: &LinearSetSpec) -> Result<bool> {
    let q = pg.field().subfield_order() as u64;
    Ok(linear_set_points(pg, spec)?.count() == scattered_size(q, spec.t))
}

/// Seeded basis completion: vectors are added one at a time and kept only
/// while the partial span stays scattered, restarting after repeated
/// rejections.
pub fn random_scattered_spec(pg: &Pg3, seed: u64, max_trials: u64) -> Result<LinearSetSpec> {
    let field = pg.field().clone();
    let t = field.extension_degree();
    let q = field.subfield_order() as u64;
    let target = 2 * t as usize;
    let mut rng = rng(seed);
    let mut basis: Vec<Vec<Elem>> = Vec::new();
    let mut misses = 0;
    for _ in 0..max_trials {
        let v: Vec<Elem> = (0..4).map(|_| Elem(rng.gen_range(0..field.order()))).collect();
        basis.push(v);
        let (vectors, zero) = subfield_combinations(&field, &basis);
        let points = points_of_vectors(pg, &vectors);
        if zero == 0 && points.count() as u128 == theta(basis.len() as u32 - 1, q) {
            misses = 0;
            if basis.len() == target {
                return Ok(LinearSetSpec { t, basis });
            }
        } else {
            basis.pop();
            misses += 1;
            if misses > 64 {
                basis.clear();
                misses = 0;
            }
        }
    }
    Err(Error::Budget(format!("no scattered rank-{target} subspace found in {max_trials} trials")))
}

/// `P0 = B(W)` and the planes meeting it in `θ_t(q)` points.
pub fn linear_set_construction(pg: &Pg3, spec: &LinearSetSpec) -> Result<PointPlaneSystem> {
    let q = pg.field().subfield_order() as u64;
    let points = linear_set_points(pg, spec)?;
    let expected = scattered_size(q, spec.t);
    if points.count() != expected {
        return Err(Error::NotScattered { points: points.count(), expected });
    }
    let planes = planes_with(pg, &points, theta(spec.t, q) as usize);
    Ok(PointPlaneSystem { points, planes })
}

/// Output of the projected subgeometry construction.
#[derive(Clone, Debug)]
pub struct ProjectedSubgeometry {
    pub system: PointPlaneSystem,
    /// Basis of the vertex line in `PG(5, q^3)`.
    pub vertex: [Vec<Elem>; 2],
    /// Solid the subgeometry is projected onto.
    pub solid: ProjSubspace,
    /// Random lines drawn before one was accepted.
    pub trials: u64,
}

fn conjugate_vector(field: &Field, v: &[Elem], k: u32) -> Vec<Elem> {
    v.iter().map(|&e| field.conjugate(e, k)).collect()
}

/// Inverse of a square matrix by Gauss-Jordan elimination.
fn invert(field: &Field, m: &[Vec<Elem>]) -> Option<Vec<Vec<Elem>>> {
    let n = m.len();
    let aug: Vec<Vec<Elem>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { Elem::ONE } else { Elem::ZERO }));
            row
        })
        .collect();
    let red = rref(field, aug);
    if red.len() < n || (0..n).any(|i| red[i][i] != Elem::ONE) {
        return None;
    }
    Some(red.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// The subgeometry `PG(5, q)` of `PG(5, q^3)` projected from a line `ℓ`
/// skew to it with `⟨ℓ, ℓ^q, ℓ^{q²}⟩ = PG(5, q^3)` onto a solid skew to `ℓ`.
pub fn projected_pg5_construction(pg: &Pg3, seed: u64, max_trials: u64) -> Result<ProjectedSubgeometry> {
    let field = pg.field().clone();
    require_degree(&field, 3, "the projected PG(5,q) construction")?;
    let f = &*field;
    let q = f.subfield_order() as u64;

    let sub_points: Vec<Vec<Elem>> = (1..q.pow(6))
        .map(|code| (0..6).map(|i| Elem((code / q.pow(i) % q) as u32)).collect::<Vec<_>>())
        .filter(|v: &Vec<Elem>| v.iter().find(|e| !e.is_zero()) == Some(&Elem::ONE))
        .collect();

    let mut coordinate_solids: Vec<ProjSubspace> = (0..6usize)
        .flat_map(|a| (a + 1..6).flat_map(move |b| (b + 1..6).flat_map(move |c| (c + 1..6).map(move |d| [a, b, c, d]))))
        .map(|cols| {
            let rows =
                cols.iter().map(|&i| (0..6).map(|j| if i == j { Elem::ONE } else { Elem::ZERO }).collect()).collect();
            ProjSubspace::from_rows(f, 6, rows).unwrap()
        })
        .collect();
    // X4 = X5 = 0 first, then the remaining coordinate solids in canonical order
    coordinate_solids.sort_by_key(|s| (s.pivots() != [0, 1, 2, 3], s.clone()));

    let mut rng = rng(seed);
    for trial in 1..=max_trials {
        let mut draw = || -> Vec<Elem> { (0..6).map(|_| Elem(rng.gen_range(0..f.order()))).collect() };
        let (u, w) = (draw(), draw());
        let line = ProjSubspace::from_rows(f, 6, vec![u.clone(), w.clone()])?;
        if line.rank() != 2 {
            continue;
        }
        let line_points = line.points(f);
        if line_points.iter().any(|p| is_subfield_vector(f, p.coords())) {
            continue;
        }
        let conj: Vec<Vec<Elem>> =
            (0..3).flat_map(|k| [conjugate_vector(f, &u, k), conjugate_vector(f, &w, k)]).collect();
        if rref(f, conj).len() != 6 {
            continue;
        }
        let Some(solid) = coordinate_solids.iter().find(|s| s.span(f, &line).rank() == 6).cloned() else {
            continue;
        };
        let mut frame = vec![u.clone(), w.clone()];
        frame.extend(solid.rows().iter().cloned());
        let inv = invert(f, &frame).expect("line and solid are complementary");

        let mut images = BitSet::new(pg.num_points());
        for v in &sub_points {
            // coordinates of v in the frame (u, w, solid basis)
            let coords: Vec<Elem> =
                (0..6).map(|j| (0..6).fold(Elem::ZERO, |acc, i| f.add(acc, f.mul(v[i], inv[i][j])))).collect();
            images.insert(pg.point_index(&coords[2..])?);
        }
        if images.count() != sub_points.len() {
            return Err(Error::Precondition(format!(
                "projection is not injective: {} images of {} points",
                images.count(),
                sub_points.len()
            )));
        }
        let planes = planes_with(pg, &images, theta(3, q) as usize);
        return Ok(ProjectedSubgeometry {
            system: PointPlaneSystem { points: images, planes },
            vertex: [u, w],
            solid,
            trials: trial,
        });
    }
    Err(Error::Budget(format!("no admissible vertex line found in {max_trials} trials")))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::config::Budget;
    use crate::engine::{check_property31, from_pg3};

    fn pg(q: u64, t: u32) -> Pg3 {
        Pg3::new(Arc::new(Field::tower(q, t).unwrap()), 1 << 20).unwrap()
    }

    #[test]
    fn one_line_gives_pencil_system() {
        let g = pg(2, 1);
        let sys = from_disjoint_lines(&g, &[0]).unwrap();
        assert_eq!((sys.points.count(), sys.planes.count()), (3, 3));
        assert!(check_property31(&sys, 1, &g).passed);
    }

    #[test]
    fn meeting_lines_are_rejected() {
        let g = pg(2, 1);
        let p = g.line_points(0)[0];
        let other = (1..g.num_lines()).find(|&l| g.line_points(l).contains(&p)).unwrap();
        assert_eq!(from_disjoint_lines(&g, &[0, other]).unwrap_err(), Error::LinesMeet(0, other));
    }

    #[test]
    fn greedy_determinism_and_early_stop() {
        let g = pg(3, 1);
        assert_eq!(greedy_partial_spread(&g, 17, None), greedy_partial_spread(&g, 17, None));
        let s = greedy_partial_spread(&g, 0, Some(3));
        assert_eq!((s.len(), s.maximality), (3, Maximality::Unknown));
    }

    #[test]
    fn greedy_q2_canonical_completes() {
        let g = pg(2, 1);
        let mut s = greedy_partial_spread(&g, 0, None);
        // regression value of the canonical-order scan
        assert_eq!(s.len(), 5);
        assert_eq!(s.covered_points(&g).count(), 15);
        assert!(is_maximal(&g, &mut s));
    }

    #[test]
    fn maximality_flags() {
        let g = pg(2, 1);
        let mut empty = PartialSpread { lines: vec![], maximality: Maximality::Unknown };
        assert!(!is_maximal(&g, &mut empty));
        assert_eq!(empty.maximality, Maximality::Extendable);
        for q in [2u64, 3] {
            let g = pg(q, 1);
            let full = greedy_partial_spread(&g, 0, None);
            if full.len() as u64 == q * q + 1 {
                let mut deficient =
                    PartialSpread { lines: full.lines[..full.len() - 1].to_vec(), maximality: Maximality::Unknown };
                assert!(!is_maximal(&g, &mut deficient));
            }
        }
    }

    #[test]
    fn full_spread_covers_every_plane_once() {
        for q in [2u64, 3] {
            let g = pg(q, 1);
            let s = (0..50)
                .map(|seed| greedy_partial_spread(&g, seed, None))
                .find(|s| s.len() as u64 == q * q + 1)
                .unwrap();
            let sys = from_disjoint_lines(&g, &s.lines).unwrap();
            assert_eq!(sys.points.count(), g.num_points());
            assert_eq!(sys.planes.count(), g.num_planes());
            let holes = holes_construction(&g, &s);
            assert!(holes.points.is_empty() && holes.planes.is_empty());
        }
    }

    #[test]
    fn holes_are_complement_of_lines() {
        let g = pg(3, 1);
        for seed in 0..10 {
            let s = greedy_partial_spread(&g, seed, Some(4 + seed as usize % 5));
            let lines = from_disjoint_lines(&g, &s.lines).unwrap();
            let holes = holes_construction(&g, &s);
            assert_eq!(holes.points, lines.points.complement());
            assert_eq!(holes.planes, lines.planes.complement());
        }
    }

    #[test]
    fn baer_example_q2() {
        let g = pg(2, 2);
        let sys = baer_construction(&g).unwrap();
        assert_eq!((sys.points.count(), sys.planes.count()), (15, 15));
        let spec = plane_spectrum(&g, &sys.points);
        assert_eq!(spec.keys().copied().collect::<Vec<_>>(), vec![3, 7]);
        assert!(check_property31(&sys, 3, &g).passed);
        for p in 0..g.num_points() {
            if !sys.points.contains(p) {
                let n = g.point_planes(p).iter().filter(|&&pl| sys.planes.contains(pl)).count();
                assert_eq!(n, 3);
            }
        }
        assert!(baer_construction(&pg(2, 1)).is_err());
    }

    #[test]
    fn standard_linear_set_is_baer() {
        let g = pg(2, 2);
        let spec = LinearSetSpec::standard(g.field());
        assert!(scattered_test(&g, &spec).unwrap());
        assert_eq!(linear_set_points(&g, &spec).unwrap(), baer_construction(&g).unwrap().points);
        assert_eq!(linear_set_construction(&g, &spec).unwrap(), baer_construction(&g).unwrap());
    }

    #[test]
    fn rank_deficient_spec() {
        let g = pg(2, 2);
        let mut spec = LinearSetSpec::standard(g.field());
        spec.basis[3] = spec.basis[2].clone();
        assert_eq!(linear_set_points(&g, &spec).unwrap_err(), Error::RankDeficient { rank: 3, expected: 4 });
    }

    #[test]
    fn linear_set_size_bound() {
        let g = pg(2, 3);
        let mut r = rng(5);
        let mut seen_scattered = false;
        for _ in 0..40 {
            let basis = (0..6).map(|_| (0..4).map(|_| Elem(r.gen_range(0..8))).collect()).collect();
            let spec = LinearSetSpec { t: 3, basis };
            if let Ok(points) = linear_set_points(&g, &spec) {
                assert!(points.count() <= 63);
                assert_eq!(points.count() == 63, scattered_test(&g, &spec).unwrap());
                seen_scattered |= points.count() == 63;
            }
        }
        assert!(seen_scattered);
    }

    #[test]
    fn scattered_t3_construction() {
        let g = pg(2, 3);
        let spec = random_scattered_spec(&g, 1, 10_000).unwrap();
        assert_eq!(linear_set_points(&g, &spec).unwrap().count(), 63);
        let sys = linear_set_construction(&g, &spec).unwrap();
        assert_eq!(plane_spectrum(&g, &sys.points).keys().copied().collect::<Vec<_>>(), vec![7, 15]);
        assert_eq!(sys.planes.count(), 63);
        assert!(check_property31(&sys, 7, &g).passed);
    }

    #[test]
    fn projected_subgeometry_q2() {
        let g = pg(2, 3);
        let out = projected_pg5_construction(&g, 7, 10_000).unwrap();
        assert_eq!(out.system.points.count(), 63);
        assert_eq!(plane_spectrum(&g, &out.system.points).keys().copied().collect::<Vec<_>>(), vec![7, 15]);
        assert!(check_property31(&out.system, 7, &g).passed);
        assert!(projected_pg5_construction(&pg(2, 2), 7, 10).is_err());
    }

    #[test]
    fn partial_ovoid_pencils() {
        let m = KleinModel::new(Arc::new(Field::of_order(3).unwrap()), &Budget::default()).unwrap();
        let v = greedy_partial_ovoid(&m, 4, 3).unwrap();
        let c = pencil_union(&m, &v).unwrap();
        assert_eq!(c.parameter().unwrap(), 4);
        let sys = crate::engine::to_pg3(&c);
        let lines: Vec<usize> = v.iter().map(|&p| m.line_of_point(p)).collect();
        assert_eq!(sys, from_disjoint_lines(m.pg3(), &lines).unwrap());
        assert_eq!(from_pg3(&m, &sys), c);
        assert!(greedy_partial_ovoid(&m, 11, 0).is_err());
    }
}
