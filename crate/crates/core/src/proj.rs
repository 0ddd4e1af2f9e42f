//! Subspaces of `PG(n, q)` in reduced row-echelon form, their enumeration,
//! and the point/line/plane incidence structure of `PG(3, q)`.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{Elem, Field};

/// Gaussian binomial `[n k]_q`; zero when `k > n`.
pub fn gaussian_binomial(n: u32, k: u32, q: u64) -> u128 {
    if k > n {
        return 0;
    }
    let q = q as u128;
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc * (q.pow(n - k + i) - 1) / (q.pow(i) - 1);
    }
    acc
}

/// Number of points of `PG(n, q)`.
pub fn theta(n: u32, q: u64) -> u128 {
    gaussian_binomial(n + 1, 1, q)
}

/// Scales `v` so that its first nonzero coordinate is one.
pub fn normalize(field: &Field, v: &mut [Elem]) -> Result<()> {
    let lead = v.iter().copied().find(|e| !e.is_zero()).ok_or(Error::ZeroVector)?;
    if lead != Elem::ONE {
        let inv = field.inv(lead).unwrap();
        v.iter_mut().for_each(|e| *e = field.mul(*e, inv));
    }
    Ok(())
}

/// Reduced row-echelon form of `rows`, zero rows dropped.
pub fn rref(field: &Field, mut rows: Vec<Vec<Elem>>) -> Vec<Vec<Elem>> {
    let width = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..width {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = field.inv(rows[rank][col]).unwrap();
        rows[rank].iter_mut().for_each(|e| *e = field.mul(*e, inv));
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            let factor = row[col];
            if r == rank || factor.is_zero() {
                continue;
            }
            for (e, &p) in row.iter_mut().zip(&pivot_row) {
                *e = field.sub(*e, field.mul(factor, p));
            }
        }
        rank += 1;
    }
    rows.truncate(rank);
    rows
}

/// A normalized homogeneous coordinate vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjPoint(Vec<Elem>);

impl ProjPoint {
    pub fn new(field: &Field, mut coords: Vec<Elem>) -> Result<ProjPoint> {
        normalize(field, &mut coords)?;
        Ok(ProjPoint(coords))
    }

    pub fn coords(&self) -> &[Elem] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<Elem> {
        self.0
    }
}

/// A subspace of `PG(n, q)` given by its reduced row-echelon basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjSubspace {
    width: usize,
    rows: Vec<Vec<Elem>>,
}

impl ProjSubspace {
    pub fn from_rows(field: &Field, width: usize, rows: Vec<Vec<Elem>>) -> Result<ProjSubspace> {
        if let Some(bad) = rows.iter().find(|r| r.len() != width) {
            return Err(Error::WrongLength { expected: width, got: bad.len() });
        }
        Ok(ProjSubspace { width, rows: rref(field, rows) })
    }

    pub fn empty(width: usize) -> ProjSubspace {
        ProjSubspace { width, rows: Vec::new() }
    }

    pub fn whole(width: usize) -> ProjSubspace {
        let rows =
            (0..width).map(|i| (0..width).map(|j| if i == j { Elem::ONE } else { Elem::ZERO }).collect()).collect();
        ProjSubspace { width, rows }
    }

    pub fn point(p: &ProjPoint) -> ProjSubspace {
        ProjSubspace { width: p.0.len(), rows: vec![p.0.clone()] }
    }

    /// Length of the coordinate vectors, `n + 1`.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Projective dimension; `-1` for the empty subspace.
    pub fn proj_dim(&self) -> i32 {
        self.rows.len() as i32 - 1
    }

    pub fn rows(&self) -> &[Vec<Elem>] {
        &self.rows
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.iter().position(|e| !e.is_zero()).unwrap()).collect()
    }

    pub fn contains_vector(&self, field: &Field, v: &[Elem]) -> bool {
        let mut v = v.to_vec();
        for (row, piv) in self.rows.iter().zip(self.pivots()) {
            let factor = v[piv];
            if !factor.is_zero() {
                for (e, &r) in v.iter_mut().zip(row) {
                    *e = field.sub(*e, field.mul(factor, r));
                }
            }
        }
        v.iter().all(|e| e.is_zero())
    }

    pub fn contains(&self, field: &Field, other: &ProjSubspace) -> bool {
        other.rows.iter().all(|r| self.contains_vector(field, r))
    }

    pub fn span(&self, field: &Field, other: &ProjSubspace) -> ProjSubspace {
        let rows = self.rows.iter().chain(&other.rows).cloned().collect();
        ProjSubspace { width: self.width, rows: rref(field, rows) }
    }

    pub fn meet(&self, field: &Field, other: &ProjSubspace) -> ProjSubspace {
        self.dual(field).span(field, &other.dual(field)).dual(field)
    }

    /// Orthogonal complement under the standard bilinear form.
    pub fn dual(&self, field: &Field) -> ProjSubspace {
        let pivots = self.pivots();
        let rows = (0..self.width)
            .filter(|c| !pivots.contains(c))
            .map(|free| {
                let mut v = vec![Elem::ZERO; self.width];
                v[free] = Elem::ONE;
                for (row, &piv) in self.rows.iter().zip(&pivots) {
                    v[piv] = field.neg(row[free]);
                }
                v
            })
            .collect();
        ProjSubspace { width: self.width, rows: rref(field, rows) }
    }

    /// All points, each normalized and listed once.
    pub fn points(&self, field: &Field) -> Vec<ProjPoint> {
        let q = field.order() as u64;
        let r = self.rank();
        let mut out = Vec::new();
        for lead in 0..r {
            let free = r - lead - 1;
            for code in 0..q.pow(free as u32) {
                let mut v = self.rows[lead].clone();
                let mut c = code;
                for row in &self.rows[lead + 1..] {
                    let coef = Elem((c % q) as u32);
                    c /= q;
                    if !coef.is_zero() {
                        for (e, &x) in v.iter_mut().zip(row) {
                            *e = field.add(*e, field.mul(coef, x));
                        }
                    }
                }
                out.push(ProjPoint(v));
            }
        }
        out
    }
}

/// Span of a nonempty list of points.
pub fn span_points(field: &Field, pts: &[ProjPoint]) -> Result<ProjSubspace> {
    let first = pts.first().ok_or_else(|| Error::Precondition("span of an empty point list".into()))?;
    ProjSubspace::from_rows(field, first.0.len(), pts.iter().map(|p| p.0.clone()).collect())
}

/// All subspaces of vector rank `k` in `PG(n, q)`, sorted by canonical form.
pub fn enumerate_subspaces(field: &Field, n: usize, k: usize) -> Vec<ProjSubspace> {
    let width = n + 1;
    let q = field.order() as u64;
    let mut out = Vec::new();
    if k == 0 || k > width {
        return out;
    }
    let mut pivots: Vec<usize> = (0..k).collect();
    loop {
        let free: Vec<(usize, usize)> = (0..k)
            .flat_map(|i| {
                let pivots = &pivots;
                (pivots[i] + 1..width).filter(move |c| !pivots.contains(c)).map(move |c| (i, c))
            })
            .collect();
        for code in 0..q.pow(free.len() as u32) {
            let mut rows = vec![vec![Elem::ZERO; width]; k];
            for (i, &p) in pivots.iter().enumerate() {
                rows[i][p] = Elem::ONE;
            }
            let mut c = code;
            for &(i, col) in &free {
                rows[i][col] = Elem((c % q) as u32);
                c /= q;
            }
            out.push(ProjSubspace { width, rows });
        }
        // next combination of pivot columns
        let Some(i) = (0..k).rev().find(|&i| pivots[i] < width - k + i) else {
            break;
        };
        pivots[i] += 1;
        for j in i + 1..k {
            pivots[j] = pivots[j - 1] + 1;
        }
    }
    out.sort();
    out
}

/// An indexed, canonically ordered list of subspaces of one rank.
#[derive(Clone, Debug)]
pub struct SubspaceList {
    items: Vec<ProjSubspace>,
    index: HashMap<ProjSubspace, usize>,
}

impl SubspaceList {
    pub fn new(items: Vec<ProjSubspace>) -> SubspaceList {
        let index = items.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        SubspaceList { items, index }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, i: usize) -> &ProjSubspace {
        &self.items[i]
    }

    pub fn items(&self) -> &[ProjSubspace] {
        &self.items
    }

    pub fn index_of(&self, s: &ProjSubspace) -> Option<usize> {
        self.index.get(s).copied()
    }
}

/// Points, lines, planes (and solids when `n >= 4`) of `PG(n, q)`.
#[derive(Clone, Debug)]
pub struct GeometryTable {
    n: usize,
    by_rank: Vec<SubspaceList>,
}

impl GeometryTable {
    /// Enumerates subspaces of vector rank `1..=min(n, 4)`, refusing when any
    /// list would exceed `max_objects`.
    pub fn new(field: &Field, n: usize, max_objects: u128) -> Result<GeometryTable> {
        let q = field.order() as u64;
        let top = n.min(4);
        for k in 1..=top {
            let count = gaussian_binomial(n as u32 + 1, k as u32, q);
            if count > max_objects {
                return Err(Error::Budget(format!(
                    "PG({n},{q}) has {count} subspaces of rank {k}, limit is {max_objects}"
                )));
            }
        }
        let by_rank = (1..=top).map(|k| SubspaceList::new(enumerate_subspaces(field, n, k))).collect();
        Ok(GeometryTable { n, by_rank })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    /// Subspaces of vector rank `k`.
    pub fn rank(&self, k: usize) -> &SubspaceList {
        &self.by_rank[k - 1]
    }

    pub fn points(&self) -> &SubspaceList {
        self.rank(1)
    }

    pub fn lines(&self) -> &SubspaceList {
        self.rank(2)
    }

    pub fn planes(&self) -> &SubspaceList {
        self.rank(3)
    }
}

/// `PG(3, q)` with precomputed incidences between points, lines and planes.
#[derive(Debug)]
pub struct Pg3 {
    field: Arc<Field>,
    table: GeometryTable,
    point_index: HashMap<Vec<Elem>, usize>,
    line_points: Vec<Vec<usize>>,
    plane_points: Vec<Vec<usize>>,
    point_planes: Vec<Vec<usize>>,
    line_planes: Vec<Vec<usize>>,
}

impl Pg3 {
    pub fn new(field: Arc<Field>, max_objects: u128) -> Result<Pg3> {
        let table = GeometryTable::new(&field, 3, max_objects)?;
        let point_index: HashMap<Vec<Elem>, usize> =
            table.points().items().iter().enumerate().map(|(i, p)| (p.rows()[0].clone(), i)).collect();
        let points_of = |s: &ProjSubspace| -> Vec<usize> {
            let mut v: Vec<usize> = s.points(&field).into_iter().map(|p| point_index[&p.0]).collect();
            v.sort_unstable();
            v
        };
        let line_points: Vec<Vec<usize>> = table.lines().items().iter().map(points_of).collect();
        let plane_points: Vec<Vec<usize>> = table.planes().items().iter().map(points_of).collect();
        let mut point_planes = vec![Vec::new(); table.points().len()];
        for (pi, pts) in plane_points.iter().enumerate() {
            for &p in pts {
                point_planes[p].push(pi);
            }
        }
        let line_planes = line_points
            .iter()
            .map(|pts| {
                let (a, b) = (&point_planes[pts[0]], &point_planes[pts[1]]);
                a.iter().copied().filter(|pl| b.binary_search(pl).is_ok()).collect()
            })
            .collect();
        Ok(Pg3 { field, table, point_index, line_points, plane_points, point_planes, line_planes })
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    /// Order of the field the geometry is defined over.
    pub fn q(&self) -> usize {
        self.field.order() as usize
    }

    pub fn table(&self) -> &GeometryTable {
        &self.table
    }

    pub fn num_points(&self) -> usize {
        self.table.points().len()
    }

    pub fn num_lines(&self) -> usize {
        self.table.lines().len()
    }

    pub fn num_planes(&self) -> usize {
        self.table.planes().len()
    }

    pub fn point(&self, i: usize) -> &[Elem] {
        &self.table.points().get(i).rows()[0]
    }

    pub fn line(&self, i: usize) -> &ProjSubspace {
        self.table.lines().get(i)
    }

    pub fn plane(&self, i: usize) -> &ProjSubspace {
        self.table.planes().get(i)
    }

    /// Index of the point spanned by a nonzero vector.
    pub fn point_index(&self, v: &[Elem]) -> Result<usize> {
        let p = ProjPoint::new(&self.field, v.to_vec())?;
        self.point_index.get(&p.0).copied().ok_or(Error::WrongLength { expected: 4, got: v.len() })
    }

    pub fn line_index(&self, s: &ProjSubspace) -> Option<usize> {
        self.table.lines().index_of(s)
    }

    pub fn plane_index(&self, s: &ProjSubspace) -> Option<usize> {
        self.table.planes().index_of(s)
    }

    pub fn line_points(&self, line: usize) -> &[usize] {
        &self.line_points[line]
    }

    pub fn plane_points(&self, plane: usize) -> &[usize] {
        &self.plane_points[plane]
    }

    pub fn point_planes(&self, point: usize) -> &[usize] {
        &self.point_planes[point]
    }

    pub fn line_planes(&self, line: usize) -> &[usize] {
        &self.line_planes[line]
    }

    pub fn incident(&self, point: usize, plane: usize) -> bool {
        self.plane_points[plane].binary_search(&point).is_ok()
    }

    /// The plane dual to a point and vice versa.
    pub fn dual_point(&self, plane: usize) -> usize {
        let d = self.plane(plane).dual(&self.field);
        self.point_index[&d.rows()[0]]
    }

    pub fn dual_plane(&self, point: usize) -> usize {
        let d = self.table.points().get(point).dual(&self.field);
        self.plane_index(&d).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(q: u64) -> Field {
        Field::of_order(q).unwrap()
    }

    fn pt(v: &[u32]) -> ProjPoint {
        ProjPoint(v.iter().map(|&x| Elem(x)).collect())
    }

    #[test]
    fn gaussian_binomial_values() {
        // [4 2]_2 = (2^3-1)(2^4-1)/((2-1)(2^2-1)) = 7*15/3
        assert_eq!(gaussian_binomial(4, 2, 2), 7 * 15 / 3);
        assert_eq!(gaussian_binomial(4, 2, 2), 35);
        assert_eq!(gaussian_binomial(7, 0, 5), 1);
        assert_eq!(gaussian_binomial(2, 3, 2), 0);
        assert_eq!(theta(3, 2), 15);
        // [6 3]_2 = 63*31*15 / (1*3*7)
        assert_eq!(gaussian_binomial(6, 3, 2), 63 * 31 * 15 / 21);
    }

    #[test]
    fn enumeration_counts() {
        let f2 = f(2);
        assert_eq!(enumerate_subspaces(&f2, 3, 2).len(), 35);
        assert_eq!(enumerate_subspaces(&f2, 3, 1).len(), 15);
        assert_eq!(enumerate_subspaces(&f2, 5, 3).len(), 1395);
        for q in [2u64, 3, 4, 5, 7, 8] {
            let field = f(q);
            for n in 1..=4usize {
                if theta(n as u32, q) > 600 {
                    continue;
                }
                for k in 1..=n + 1 {
                    let subs = enumerate_subspaces(&field, n, k);
                    assert_eq!(subs.len() as u128, gaussian_binomial(n as u32 + 1, k as u32, q), "q={q} n={n} k={k}");
                    assert!(subs.windows(2).all(|w| w[0] < w[1]));
                }
            }
        }
    }

    #[test]
    fn points_of_subspace_are_members() {
        for q in [2u64, 3, 4] {
            let field = f(q);
            for s in enumerate_subspaces(&field, 3, 3) {
                let pts = s.points(&field);
                assert_eq!(pts.len() as u128, theta(2, q));
                for p in &pts {
                    let canon = ProjPoint::new(&field, p.0.clone()).unwrap();
                    assert_eq!(&canon, p);
                    assert!(s.contains_vector(&field, p.coords()));
                }
            }
        }
    }

    #[test]
    fn span_meet_and_dual() {
        let field = f(3);
        let p = pt(&[1, 0, 0, 0]);
        assert_eq!(span_points(&field, std::slice::from_ref(&p)).unwrap(), ProjSubspace::point(&p));
        let l1 = span_points(&field, &[pt(&[1, 0, 0, 0]), pt(&[0, 1, 0, 0])]).unwrap();
        let l2 = span_points(&field, &[pt(&[0, 0, 1, 0]), pt(&[0, 0, 0, 1])]).unwrap();
        assert_eq!(l1.meet(&field, &l2).proj_dim(), -1);
        let planes = enumerate_subspaces(&field, 3, 3);
        assert_eq!(planes[0].meet(&field, &planes[1]).proj_dim(), 1);
        let e0 = ProjSubspace::point(&pt(&[1, 0, 0, 0]));
        assert_eq!(e0.dual(&field).proj_dim(), 2);
        // hyperplane X0 = 0 has dual point (1,0,0,0)
        let x0 = span_points(&field, &[pt(&[0, 1, 0, 0]), pt(&[0, 0, 1, 0]), pt(&[0, 0, 0, 1])]).unwrap();
        assert_eq!(x0.dual(&field), e0);
        for s in &planes {
            assert_eq!(s.dual(&field).dual(&field), *s);
            assert_eq!(s.dual(&field).proj_dim(), 0);
        }
    }

    #[test]
    fn modular_dimension_law() {
        let field = f(2);
        let lines = enumerate_subspaces(&field, 4, 2);
        let planes = enumerate_subspaces(&field, 4, 3);
        for a in lines.iter().step_by(7) {
            for b in planes.iter().step_by(5) {
                let s = a.span(&field, b);
                let m = a.meet(&field, b);
                assert_eq!(s.proj_dim() + m.proj_dim(), a.proj_dim() + b.proj_dim());
                assert!(s.contains(&field, a) && s.contains(&field, b));
                assert!(a.contains(&field, &m) && b.contains(&field, &m));
            }
        }
    }

    #[test]
    fn duality_preserves_incidence_count() {
        let pg = Pg3::new(Arc::new(f(2)), 1 << 20).unwrap();
        let mut direct = 0;
        let mut dualized = 0;
        for p in 0..pg.num_points() {
            for pl in 0..pg.num_planes() {
                if pg.incident(p, pl) {
                    direct += 1;
                }
                // dual(plane) is a point, dual(point) is a plane
                if pg.incident(pg.dual_point(pl), pg.dual_plane(p)) {
                    dualized += 1;
                }
            }
        }
        assert_eq!(direct, 15 * 7);
        assert_eq!(dualized, 15 * 7);
    }

    #[test]
    fn pg3_incidence_counts() {
        for q in [2usize, 3, 4] {
            let pg = Pg3::new(Arc::new(f(q as u64)), 1 << 20).unwrap();
            assert!((0..pg.num_lines()).all(|l| pg.line_points(l).len() == q + 1 && pg.line_planes(l).len() == q + 1));
            assert!((0..pg.num_planes()).all(|p| pg.plane_points(p).len() == q * q + q + 1));
            assert!((0..pg.num_points()).all(|p| pg.point_planes(p).len() == q * q + q + 1));
        }
    }

    #[test]
    fn budget_gate() {
        assert!(matches!(GeometryTable::new(&f(2), 5, 100), Err(Error::Budget(_))));
    }
}
