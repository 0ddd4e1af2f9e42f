//! The Klein quadric `Q+(5, q)` with form `X0X5 + X1X4 + X2X3`.
//!
//! Lines of `PG(3, q)` map to quadric points through Plücker coordinates
//! `(p01, p02, p03, p12, p31, p23)`. The generators (planes on the quadric)
//! come in two classes: the Latin planes are the images of the line stars
//! through a point of `PG(3, q)`, the Greek planes the images of the lines
//! inside a plane of `PG(3, q)`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::config::Budget;
use crate::error::{Error, Result};
use crate::field::{Elem, Field};
use crate::linalg::ImageOracle;
use crate::proj::{Pg3, ProjPoint, ProjSubspace};

pub const QUADRIC_TAG: &str = "X0X5+X1X4+X2X3";

/// `X0X5 + X1X4 + X2X3`.
pub fn quadratic_form(field: &Field, v: &[Elem]) -> Elem {
    let t = |a: usize, b: usize| field.mul(v[a], v[b]);
    field.add(field.add(t(0, 5), t(1, 4)), t(2, 3))
}

/// Polar bilinear form of [`quadratic_form`].
pub fn polar_form(field: &Field, x: &[Elem], y: &[Elem]) -> Elem {
    [(0, 5), (1, 4), (2, 3)].iter().fold(Elem::ZERO, |acc, &(a, b)| {
        let s = field.add(field.mul(x[a], y[b]), field.mul(x[b], y[a]));
        field.add(acc, s)
    })
}

/// Plücker coordinates of the line through `x` and `y` (not normalized).
pub fn pluecker_vectors(field: &Field, x: &[Elem], y: &[Elem]) -> Vec<Elem> {
    let m = |i: usize, j: usize| field.sub(field.mul(x[i], y[j]), field.mul(x[j], y[i]));
    vec![m(0, 1), m(0, 2), m(0, 3), m(1, 2), m(3, 1), m(2, 3)]
}

/// Plücker point of a line of `PG(3, q)`.
pub fn pluecker(field: &Field, line: &ProjSubspace) -> Result<ProjPoint> {
    if line.width() != 4 {
        return Err(Error::WrongLength { expected: 4, got: line.width() });
    }
    if line.proj_dim() != 1 {
        return Err(Error::WrongDimension { expected: 1, got: line.proj_dim() });
    }
    let r = line.rows();
    ProjPoint::new(field, pluecker_vectors(field, &r[0], &r[1]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorClass {
    Latin,
    Greek,
}

#[derive(Clone, Debug)]
pub struct Generator {
    pub class: GeneratorClass,
    /// Index of the originating point (Latin) or plane (Greek) of `PG(3, q)`.
    pub origin: usize,
    pub space: ProjSubspace,
}

/// The quadric, its points and generators, and the Klein dictionary linking
/// them to `PG(3, q)`.
pub struct KleinModel {
    pg3: Pg3,
    qpoints: Vec<ProjPoint>,
    qpoint_index: HashMap<ProjPoint, usize>,
    line_of_qpoint: Vec<usize>,
    qpoint_of_line: Vec<usize>,
    generators: Vec<Generator>,
    latin_of_point: Vec<usize>,
    greek_of_plane: Vec<usize>,
    meet: Vec<i8>,
    pencils: Vec<Vec<usize>>,
    generator_points: Vec<Vec<usize>>,
    budget: Budget,
    pub(crate) exact_oracle: OnceLock<ImageOracle>,
    pub(crate) modular_oracle: OnceLock<ImageOracle>,
}

impl std::fmt::Debug for KleinModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KleinModel")
            .field("field", self.field())
            .field("points", &self.qpoints.len())
            .field("generators", &self.generators.len())
            .finish()
    }
}

impl KleinModel {
    pub fn new(field: Arc<Field>, budget: &Budget) -> Result<KleinModel> {
        let pg3 = Pg3::new(field.clone(), budget.max_objects)?;
        let f = &*field;

        let mut images: Vec<(ProjPoint, usize)> =
            (0..pg3.num_lines()).map(|l| (pluecker(f, pg3.line(l)).unwrap(), l)).collect();
        images.sort();
        let mut line_of_qpoint = Vec::with_capacity(images.len());
        let mut qpoint_of_line = vec![0; images.len()];
        let mut qpoints = Vec::with_capacity(images.len());
        for (i, (p, l)) in images.into_iter().enumerate() {
            line_of_qpoint.push(l);
            qpoint_of_line[l] = i;
            qpoints.push(p);
        }
        let qpoint_index: HashMap<ProjPoint, usize> = qpoints.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();

        let mut point_lines = vec![Vec::new(); pg3.num_points()];
        let mut plane_lines = vec![Vec::new(); pg3.num_planes()];
        for l in 0..pg3.num_lines() {
            for &p in pg3.line_points(l) {
                point_lines[p].push(l);
            }
            for &pl in pg3.line_planes(l) {
                plane_lines[pl].push(l);
            }
        }

        let mut generators = Vec::with_capacity(pg3.num_points() + pg3.num_planes());
        for a in 0..pg3.num_points() {
            let pa = pg3.point(a);
            let mut rows = Vec::new();
            let mut span = ProjSubspace::from_rows(f, 4, vec![pa.to_vec()])?;
            for i in 0..4 {
                let mut e = vec![Elem::ZERO; 4];
                e[i] = Elem::ONE;
                if !span.contains_vector(f, &e) {
                    rows.push(pluecker_vectors(f, pa, &e));
                    span = span.span(f, &ProjSubspace::from_rows(f, 4, vec![e])?);
                }
            }
            let space = ProjSubspace::from_rows(f, 6, rows)?;
            generators.push(Generator { class: GeneratorClass::Latin, origin: a, space });
        }
        for b in 0..pg3.num_planes() {
            let r = pg3.plane(b).rows();
            let rows = vec![
                pluecker_vectors(f, &r[0], &r[1]),
                pluecker_vectors(f, &r[0], &r[2]),
                pluecker_vectors(f, &r[1], &r[2]),
            ];
            let space = ProjSubspace::from_rows(f, 6, rows)?;
            generators.push(Generator { class: GeneratorClass::Greek, origin: b, space });
        }
        generators.sort_by(|a, b| a.space.cmp(&b.space));

        let mut latin_of_point = vec![0; pg3.num_points()];
        let mut greek_of_plane = vec![0; pg3.num_planes()];
        for (g, gen) in generators.iter().enumerate() {
            match gen.class {
                GeneratorClass::Latin => latin_of_point[gen.origin] = g,
                GeneratorClass::Greek => greek_of_plane[gen.origin] = g,
            }
        }

        let n = generators.len();
        let mut meet = vec![0i8; n * n];
        for (i, a) in generators.iter().enumerate() {
            for (j, b) in generators.iter().enumerate() {
                meet[i * n + j] = if i == j {
                    2
                } else if a.class == b.class {
                    0
                } else {
                    let (pt, pl) = match a.class {
                        GeneratorClass::Latin => (a.origin, b.origin),
                        GeneratorClass::Greek => (b.origin, a.origin),
                    };
                    if pg3.incident(pt, pl) {
                        1
                    } else {
                        -1
                    }
                };
            }
        }

        let generator_points: Vec<Vec<usize>> = generators
            .iter()
            .map(|g| {
                let lines = match g.class {
                    GeneratorClass::Latin => &point_lines[g.origin],
                    GeneratorClass::Greek => &plane_lines[g.origin],
                };
                let mut v: Vec<usize> = lines.iter().map(|&l| qpoint_of_line[l]).collect();
                v.sort_unstable();
                v
            })
            .collect();
        let mut pencils = vec![Vec::new(); qpoints.len()];
        for (g, pts) in generator_points.iter().enumerate() {
            for &p in pts {
                pencils[p].push(g);
            }
        }

        Ok(KleinModel {
            pg3,
            qpoints,
            qpoint_index,
            line_of_qpoint,
            qpoint_of_line,
            generators,
            latin_of_point,
            greek_of_plane,
            meet,
            pencils,
            generator_points,
            budget: budget.clone(),
            exact_oracle: OnceLock::new(),
            modular_oracle: OnceLock::new(),
        })
    }

    /// Model over `GF(q)`.
    pub fn over(q: u64) -> Result<KleinModel> {
        KleinModel::new(Arc::new(Field::of_order(q)?), &Budget::default())
    }

    pub fn field(&self) -> &Arc<Field> {
        self.pg3.field()
    }

    /// Order of the field the quadric lives over.
    pub fn q(&self) -> usize {
        self.pg3.q()
    }

    pub fn pg3(&self) -> &Pg3 {
        &self.pg3
    }

    pub fn budget(&self) -> &Budget {
        &self.budget
    }

    pub fn num_points(&self) -> usize {
        self.qpoints.len()
    }

    pub fn points(&self) -> &[ProjPoint] {
        &self.qpoints
    }

    pub fn point(&self, i: usize) -> &ProjPoint {
        &self.qpoints[i]
    }

    pub fn point_index(&self, p: &ProjPoint) -> Option<usize> {
        self.qpoint_index.get(p).copied()
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn generator(&self, g: usize) -> &Generator {
        &self.generators[g]
    }

    /// Index of a generator given in canonical (RREF) form.
    pub fn generator_index(&self, space: &ProjSubspace) -> Option<usize> {
        self.generators.binary_search_by(|g| g.space.cmp(space)).ok()
    }

    pub fn class(&self, g: usize) -> GeneratorClass {
        self.generators[g].class
    }

    /// Projective dimension of the meet of two generators: 2, 1, 0 or -1.
    #[inline]
    pub fn meet_dim(&self, a: usize, b: usize) -> i8 {
        self.meet[a * self.generators.len() + b]
    }

    pub fn meet_row(&self, a: usize) -> &[i8] {
        let n = self.generators.len();
        &self.meet[a * n..(a + 1) * n]
    }

    pub fn latin_of_point(&self, point: usize) -> usize {
        self.latin_of_point[point]
    }

    pub fn greek_of_plane(&self, plane: usize) -> usize {
        self.greek_of_plane[plane]
    }

    /// Quadric point of a line of `PG(3, q)`.
    pub fn point_of_line(&self, line: usize) -> usize {
        self.qpoint_of_line[line]
    }

    /// Line of `PG(3, q)` of a quadric point (index form of
    /// [`KleinModel::klein_inverse`]).
    pub fn line_of_point(&self, qpoint: usize) -> usize {
        self.line_of_qpoint[qpoint]
    }

    /// The line of `PG(3, q)` whose Plücker point is `coords`.
    pub fn klein_inverse(&self, coords: &[Elem]) -> Result<&ProjSubspace> {
        if coords.len() != 6 {
            return Err(Error::WrongLength { expected: 6, got: coords.len() });
        }
        let f = self.field();
        if !quadratic_form(f, coords).is_zero() {
            return Err(Error::NotOnQuadric);
        }
        let p = ProjPoint::new(f, coords.to_vec())?;
        let i = self.qpoint_index.get(&p).ok_or(Error::NotOnQuadric)?;
        Ok(self.pg3.line(self.line_of_qpoint[*i]))
    }

    /// Generators through a quadric point, sorted.
    pub fn pencil(&self, qpoint: usize) -> &[usize] {
        &self.pencils[qpoint]
    }

    /// Pencil of the point given by coordinates.
    pub fn point_pencil(&self, coords: &[Elem]) -> Result<&[usize]> {
        let line = self.klein_inverse(coords)?;
        let l = self.pg3.line_index(line).unwrap();
        Ok(self.pencil(self.qpoint_of_line[l]))
    }

    /// Quadric points on a generator, sorted.
    pub fn generator_points(&self, g: usize) -> &[usize] {
        &self.generator_points[g]
    }

    /// Whether two quadric points are collinear on the quadric (their joining
    /// line lies on it), i.e. the corresponding lines of `PG(3, q)` meet.
    pub fn collinear(&self, a: usize, b: usize) -> bool {
        polar_form(self.field(), self.qpoints[a].coords(), self.qpoints[b].coords()).is_zero()
    }
}
