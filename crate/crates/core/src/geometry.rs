//! Exact-arithmetic spacetime geometry.
//!
//! Spatial coordinates and times are arbitrary-precision rationals. Euclidean
//! travel times are computed by one shared deterministic fixed-point routine
//! ([`distance`]) used by the scheduler and by every honest party's
//! expected-time computation, so timing checks are exact equalities.

use num::bigint::BigInt;
use num::{BigRational, Signed, Zero};
use thiserror::Error;

use crate::fixed::{sqrt_fixed_round_half_even, Fix};

pub type Rat = BigRational;

/// Spatial column of rationals.
pub type SpatialPoint = Vec<Rat>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeometryError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("empty point set")]
    EmptySet,
    #[error("margin must be positive")]
    NonPositiveMargin,
    #[error("verifier placement is affinely dependent")]
    DegeneratePlacement,
}

/// A point in spacetime: spatial coordinates plus a time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpacetimePoint {
    pub pos: SpatialPoint,
    pub t: Rat,
}

impl SpacetimePoint {
    pub fn new(pos: SpatialPoint, t: Rat) -> Self {
        SpacetimePoint { pos, t }
    }

    pub fn dim(&self) -> usize {
        self.pos.len()
    }

    pub fn time_fix(&self) -> Fix {
        Fix::from_rational(&self.t)
    }
}

/// A travel time under the shared fixed-point rounding routine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TravelTime {
    /// Nonnegative fixed-point duration.
    pub value: Fix,
    /// Whether the underlying Euclidean distance is rational.
    pub exact: bool,
}

pub fn rat_int(v: i64) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

pub fn rat_frac(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Parses "3", "-7/2" or "1.25" into an exact rational.
pub fn rat_parse(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().ok()?;
        let d: BigInt = den.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rat::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let neg = int.trim_start().starts_with('-');
        let int_part: BigInt = if int == "-" || int.is_empty() {
            BigInt::zero()
        } else {
            int.parse().ok()?
        };
        let frac_num: BigInt = frac.parse().ok()?;
        let den = BigInt::from(10u8).pow(frac.len() as u32);
        let mag = int_part.abs() * &den + frac_num;
        return Some(Rat::new(if neg { -mag } else { mag }, den));
    }
    let n: BigInt = s.parse().ok()?;
    Some(Rat::from_integer(n))
}

fn check_dim(a: &[Rat], b: &[Rat]) -> Result<(), GeometryError> {
    if a.len() != b.len() {
        return Err(GeometryError::DimensionMismatch(a.len(), b.len()));
    }
    Ok(())
}

/// Euclidean travel time between two spatial points. Exact when the distance
/// is rational, otherwise rounded to nearest even on the fixed-point grid.
pub fn distance(a: &[Rat], b: &[Rat]) -> Result<TravelTime, GeometryError> {
    check_dim(a, b)?;
    let mut sq = Rat::zero();
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        sq += &d * &d;
    }
    let (raw, fixed_exact) = sqrt_fixed_round_half_even(sq.numer(), sq.denom());
    // The distance is rational iff num/den is the square of a rational, i.e.
    // (for a reduced fraction) both parts are perfect squares.
    let exact = is_perfect_square(sq.numer()) && is_perfect_square(sq.denom());
    let _ = fixed_exact;
    Ok(TravelTime {
        value: Fix::from_raw(raw),
        exact,
    })
}

fn is_perfect_square(v: &BigInt) -> bool {
    if v.is_negative() {
        return false;
    }
    let r = v.sqrt();
    &(&r * &r) == v
}

/// Delivery time of a light-speed signal: `send_time + distance(from, to)`.
pub fn arrival_time(send_time: Fix, from: &[Rat], to: &[Rat]) -> Result<Fix, GeometryError> {
    Ok(send_time + distance(from, to)?.value)
}

/// Exact membership of `p` in the convex hull of `vertices`.
///
/// Uses Caratheodory's theorem: `p` lies in the hull iff some affinely
/// independent subset of at most `d+1` vertices contains it, and for such a
/// subset the barycentric coordinates are unique, so rational Gaussian
/// elimination decides membership exactly.
pub fn in_convex_hull(p: &[Rat], vertices: &[SpatialPoint]) -> Result<bool, GeometryError> {
    if vertices.is_empty() {
        return Err(GeometryError::EmptySet);
    }
    let d = p.len();
    for v in vertices {
        check_dim(p, v)?;
    }
    let m = vertices.len();
    let max_size = (d + 1).min(m);
    let mut subset = Vec::new();
    for size in 1..=max_size {
        subset.clear();
        if subsets_have_containing(p, vertices, size, 0, &mut subset) {
            return Ok(true);
        }
    }
    Ok(false)
}

fn subsets_have_containing(
    p: &[Rat],
    vertices: &[SpatialPoint],
    size: usize,
    start: usize,
    acc: &mut Vec<usize>,
) -> bool {
    if acc.len() == size {
        return barycentric_nonnegative(p, vertices, acc);
    }
    for i in start..vertices.len() {
        acc.push(i);
        if subsets_have_containing(p, vertices, size, i + 1, acc) {
            acc.pop();
            return true;
        }
        acc.pop();
    }
    false
}

/// Solves `sum(lambda_j * v_j) = p`, `sum(lambda_j) = 1` for the chosen
/// subset. Returns true iff the subset is affinely independent, the system is
/// consistent, and all coordinates are nonnegative.
fn barycentric_nonnegative(p: &[Rat], vertices: &[SpatialPoint], idx: &[usize]) -> bool {
    let d = p.len();
    let cols = idx.len();
    // Augmented matrix: (d+1) x (cols+1).
    let mut mat: Vec<Vec<Rat>> = Vec::with_capacity(d + 1);
    for row in 0..d {
        let mut r: Vec<Rat> = idx.iter().map(|&j| vertices[j][row].clone()).collect();
        r.push(p[row].clone());
        mat.push(r);
    }
    let mut ones: Vec<Rat> = vec![Rat::from_integer(BigInt::from(1)); cols];
    ones.push(Rat::from_integer(BigInt::from(1)));
    mat.push(ones);

    let rows = d + 1;
    let mut pivot_rows = Vec::with_capacity(cols);
    let mut row = 0;
    for col in 0..cols {
        let Some(pr) = (row..rows).find(|&r| !mat[r][col].is_zero()) else {
            // Column dependence: a smaller subset covers this case.
            return false;
        };
        mat.swap(row, pr);
        let inv = mat[row][col].clone();
        for c in col..=cols {
            mat[row][c] = &mat[row][c] / &inv;
        }
        for r in 0..rows {
            if r != row && !mat[r][col].is_zero() {
                let f = mat[r][col].clone();
                for c in col..=cols {
                    let sub = &f * &mat[row][c];
                    mat[r][c] = &mat[r][c] - sub;
                }
            }
        }
        pivot_rows.push(row);
        row += 1;
    }
    // Consistency: remaining rows must be all-zero.
    for r in row..rows {
        if !mat[r][cols].is_zero() {
            return false;
        }
    }
    // Unique solution; check nonnegativity.
    (0..cols).all(|c| !mat[pivot_rows[c]][cols].is_negative())
}

/// Deterministic enclosing simplex: the axis-aligned bounding box of the
/// spatial projection of `points`, expanded by `margin`, wrapped in a
/// canonical right simplex. Every face clears the original set by at least
/// `margin`.
pub fn enclosing_simplex(
    points: &[SpacetimePoint],
    margin: &Rat,
) -> Result<Vec<SpatialPoint>, GeometryError> {
    if points.is_empty() {
        return Err(GeometryError::EmptySet);
    }
    if !margin.is_positive() {
        return Err(GeometryError::NonPositiveMargin);
    }
    let d = points[0].dim();
    let mut lo = points[0].pos.clone();
    let mut hi = points[0].pos.clone();
    for pt in points {
        if pt.dim() != d {
            return Err(GeometryError::DimensionMismatch(pt.dim(), d));
        }
        for (i, c) in pt.pos.iter().enumerate() {
            if c < &lo[i] {
                lo[i] = c.clone();
            }
            if c > &hi[i] {
                hi[i] = c.clone();
            }
        }
    }
    for i in 0..d {
        lo[i] = &lo[i] - margin;
        hi[i] = &hi[i] + margin;
    }
    if d == 1 {
        return Ok(vec![vec![lo[0].clone()], vec![hi[0].clone()]]);
    }
    // Right simplex anchored at the expanded box's low corner, with leg
    // length equal to the sum of the box's edge lengths. The diagonal face
    // then clears the expanded box, hence clears `points` by >= margin.
    let span: Rat = (0..d).map(|i| &hi[i] - &lo[i]).sum();
    let mut vertices = vec![lo.clone()];
    for axis in 0..d {
        let mut v = lo.clone();
        v[axis] = &lo[axis] + &span;
        vertices.push(v);
    }
    Ok(vertices)
}

/// True iff the points are the vertices of a nondegenerate simplex
/// (affinely independent set of d+1 points in dimension d).
pub fn is_nondegenerate_simplex(vertices: &[SpatialPoint]) -> bool {
    if vertices.is_empty() {
        return false;
    }
    let d = vertices[0].len();
    if vertices.len() != d + 1 || vertices.iter().any(|v| v.len() != d) {
        return false;
    }
    // Rank of the d x d matrix of edge vectors must be d.
    let mut mat: Vec<Vec<Rat>> = (1..=d)
        .map(|j| {
            (0..d)
                .map(|i| &vertices[j][i] - &vertices[0][i])
                .collect::<Vec<_>>()
        })
        .collect();
    let mut rank = 0;
    for col in 0..d {
        let Some(pr) = (rank..d).find(|&r| !mat[r][col].is_zero()) else {
            continue;
        };
        mat.swap(rank, pr);
        for r in 0..d {
            if r != rank && !mat[r][col].is_zero() {
                let f = &mat[r][col] / &mat[rank][col];
                for c in col..d {
                    let sub = &f * &mat[rank][c];
                    mat[r][c] = &mat[r][c] - sub;
                }
            }
        }
        rank += 1;
    }
    rank == d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(coords: &[i64]) -> SpatialPoint {
        coords.iter().map(|&c| rat_int(c)).collect()
    }

    #[test]
    fn distance_1d_absolute_difference() {
        let t = distance(&pt(&[0]), &pt(&[6])).unwrap();
        assert_eq!(t.value, Fix::from_int(6));
        assert!(t.exact);
    }

    #[test]
    fn distance_identity_is_zero() {
        let a = vec![rat_frac(7, 3), rat_frac(-1, 2)];
        let t = distance(&a, &a).unwrap();
        assert_eq!(t.value, Fix::ZERO);
        assert!(t.exact);
    }

    #[test]
    fn distance_pythagorean_triple() {
        let t = distance(&pt(&[0, 0]), &pt(&[3, 4])).unwrap();
        assert_eq!(t.value, Fix::from_int(5));
        assert!(t.exact);
    }

    #[test]
    fn distance_irrational_flags_inexact() {
        let t = distance(&pt(&[0, 0]), &pt(&[1, 1])).unwrap();
        assert!(!t.exact);
        // sqrt(2) is between 1.41 and 1.42.
        let v = t.value.to_f64();
        assert!(v > 1.41 && v < 1.42);
    }

    #[test]
    fn distance_symmetry() {
        let a = pt(&[1, 2]);
        let b = pt(&[5, -3]);
        assert_eq!(distance(&a, &b).unwrap(), distance(&b, &a).unwrap());
    }

    #[test]
    fn distance_dimension_mismatch() {
        assert!(matches!(
            distance(&pt(&[0]), &pt(&[0, 0])),
            Err(GeometryError::DimensionMismatch(1, 2))
        ));
    }

    #[test]
    fn arrival_time_adds_distance() {
        let t = arrival_time(Fix::from_int(0), &pt(&[0]), &pt(&[6])).unwrap();
        assert_eq!(t, Fix::from_int(6));
        let t = arrival_time(Fix::from_int(3), &pt(&[0, 0]), &pt(&[3, 4])).unwrap();
        assert_eq!(t, Fix::from_int(8));
        let p = pt(&[2, 2]);
        assert_eq!(arrival_time(Fix::from_int(9), &p, &p).unwrap(), Fix::from_int(9));
    }

    #[test]
    fn hull_membership_1d() {
        let verts = vec![pt(&[0]), pt(&[6])];
        assert!(in_convex_hull(&pt(&[3]), &verts).unwrap());
        assert!(!in_convex_hull(&pt(&[7]), &verts).unwrap());
        assert!(in_convex_hull(&pt(&[0]), &verts).unwrap());
    }

    #[test]
    fn hull_membership_triangle_centroid() {
        let verts = vec![pt(&[0, 0]), pt(&[3, 0]), pt(&[0, 3])];
        let centroid = vec![rat_int(1), rat_int(1)];
        assert!(in_convex_hull(&centroid, &verts).unwrap());
        assert!(!in_convex_hull(&pt(&[2, 2]), &verts).unwrap());
        // Boundary counts as inside.
        let edge_mid = vec![rat_frac(3, 2), rat_frac(3, 2)];
        assert!(in_convex_hull(&edge_mid, &verts).unwrap());
    }

    #[test]
    fn hull_membership_errors() {
        assert!(matches!(
            in_convex_hull(&pt(&[0]), &[]),
            Err(GeometryError::EmptySet)
        ));
        assert!(matches!(
            in_convex_hull(&pt(&[0, 1]), &[pt(&[0])]),
            Err(GeometryError::DimensionMismatch(2, 1))
        ));
    }

    #[test]
    fn enclosing_simplex_1d_interval() {
        let s = vec![
            SpacetimePoint::new(pt(&[2]), rat_int(0)),
            SpacetimePoint::new(pt(&[4]), rat_int(0)),
        ];
        let verts = enclosing_simplex(&s, &rat_int(1)).unwrap();
        assert_eq!(verts, vec![pt(&[1]), pt(&[5])]);

        let single = vec![SpacetimePoint::new(pt(&[3]), rat_int(0))];
        let verts = enclosing_simplex(&single, &rat_int(1)).unwrap();
        assert_eq!(verts, vec![pt(&[2]), pt(&[4])]);
    }

    #[test]
    fn enclosing_simplex_2d_contains_expanded_box() {
        let s = vec![
            SpacetimePoint::new(pt(&[0, 0]), rat_int(0)),
            SpacetimePoint::new(pt(&[1, 1]), rat_int(0)),
        ];
        let verts = enclosing_simplex(&s, &rat_int(1)).unwrap();
        assert_eq!(verts.len(), 3);
        // Expanded box is [-1,2]^2; all four corners must be inside the hull.
        for x in [-1i64, 2] {
            for y in [-1i64, 2] {
                assert!(in_convex_hull(&pt(&[x, y]), &verts).unwrap());
            }
        }
        assert!(is_nondegenerate_simplex(&verts));
    }

    #[test]
    fn enclosing_simplex_rejects_bad_inputs() {
        assert!(matches!(
            enclosing_simplex(&[], &rat_int(1)),
            Err(GeometryError::EmptySet)
        ));
        let s = vec![SpacetimePoint::new(pt(&[0]), rat_int(0))];
        assert!(matches!(
            enclosing_simplex(&s, &rat_int(0)),
            Err(GeometryError::NonPositiveMargin)
        ));
    }

    /// Independent oracle: barycentric coordinates of a full simplex via
    /// Cramer's rule, no Gaussian elimination.
    fn cramer_in_simplex(p: &[Rat], verts: &[SpatialPoint]) -> bool {
        let d = p.len();
        assert_eq!(verts.len(), d + 1);
        fn det(m: &Vec<Vec<Rat>>) -> Rat {
            match m.len() {
                1 => m[0][0].clone(),
                2 => &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0]),
                3 => {
                    let a = &m[0][0] * (&(&m[1][1] * &m[2][2]) - &(&m[1][2] * &m[2][1]));
                    let b = &m[0][1] * (&(&m[1][0] * &m[2][2]) - &(&m[1][2] * &m[2][0]));
                    let c = &m[0][2] * (&(&m[1][0] * &m[2][1]) - &(&m[1][1] * &m[2][0]));
                    &(&a - &b) + &c
                }
                4 => {
                    let mut acc = num::Zero::zero();
                    for c in 0..4 {
                        let minor: Vec<Vec<Rat>> = (1..4)
                            .map(|r| {
                                (0..4)
                                    .filter(|&cc| cc != c)
                                    .map(|cc| m[r][cc].clone())
                                    .collect()
                            })
                            .collect();
                        let term = &m[0][c] * det(&minor);
                        if c % 2 == 0 {
                            acc += term;
                        } else {
                            acc -= term;
                        }
                    }
                    acc
                }
                _ => unreachable!(),
            }
        }
        // Homogeneous matrix whose columns are [v_j; 1].
        let full: Vec<Vec<Rat>> = (0..=d)
            .map(|row| {
                (0..=d)
                    .map(|col| {
                        if row < d {
                            verts[col][row].clone()
                        } else {
                            rat_int(1)
                        }
                    })
                    .collect()
            })
            .collect();
        let denom = det(&full);
        if denom.is_zero() {
            return false;
        }
        for j in 0..=d {
            let mut m = full.clone();
            for row in 0..=d {
                m[row][j] = if row < d { p[row].clone() } else { rat_int(1) };
            }
            let lambda = &det(&m) / &denom;
            if lambda.is_negative() {
                return false;
            }
        }
        true
    }

    #[test]
    fn hull_agrees_with_cramer_oracle_on_simplices() {
        // Deterministic sweep over small rational grids, dimensions 1..=3.
        let verts1 = vec![pt(&[0]), pt(&[4])];
        for num in -8..=16 {
            let p = vec![rat_frac(num, 2)];
            assert_eq!(
                in_convex_hull(&p, &verts1).unwrap(),
                cramer_in_simplex(&p, &verts1),
                "1d point {num}/2"
            );
        }
        let verts2 = vec![pt(&[0, 0]), pt(&[4, 1]), pt(&[1, 5])];
        for x in -4..=8 {
            for y in -4..=8 {
                let p = vec![rat_frac(x, 2), rat_frac(y, 2)];
                assert_eq!(
                    in_convex_hull(&p, &verts2).unwrap(),
                    cramer_in_simplex(&p, &verts2),
                    "2d point ({x}/2,{y}/2)"
                );
            }
        }
        let verts3 = vec![pt(&[0, 0, 0]), pt(&[3, 0, 0]), pt(&[0, 3, 0]), pt(&[0, 0, 3])];
        for x in -2..=4 {
            for y in -2..=4 {
                for z in -2..=4 {
                    let p = vec![rat_int(x), rat_int(y), rat_int(z)];
                    assert_eq!(
                        in_convex_hull(&p, &verts3).unwrap(),
                        cramer_in_simplex(&p, &verts3),
                        "3d point ({x},{y},{z})"
                    );
                }
            }
        }
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(rat_parse("3").unwrap(), rat_int(3));
        assert_eq!(rat_parse("-7/2").unwrap(), rat_frac(-7, 2));
        assert_eq!(rat_parse("1.25").unwrap(), rat_frac(5, 4));
        assert_eq!(rat_parse("-0.5").unwrap(), rat_frac(-1, 2));
        assert!(rat_parse("1/0").is_none());
        assert!(rat_parse("abc").is_none());
    }
}
