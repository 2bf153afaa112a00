//! Newton polytope at infinity, `d(a)`, first meet loci and the fans built
//! from them.

use std::cmp::Ordering;
use std::fmt;

use num_integer::Integer;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::laurent::{Exp, LaurentPolynomial};

pub fn dot(a: Exp, b: Exp) -> i64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn det(a: Exp, b: Exp) -> i64 {
    a[0] * b[1] - a[1] * b[0]
}

pub fn norm1(a: Exp) -> i64 {
    a[0] + a[1]
}

pub fn primitive(a: Exp) -> Exp {
    let g = a[0].gcd(&a[1]);
    if g == 0 {
        a
    } else {
        [a[0] / g, a[1] / g]
    }
}

fn half(a: Exp) -> u8 {
    if a[1] > 0 || (a[1] == 0 && a[0] > 0) {
        0
    } else {
        1
    }
}

/// Counterclockwise angle order starting at the positive x axis.
pub fn angle_cmp(a: Exp, b: Exp) -> Ordering {
    half(a)
        .cmp(&half(b))
        .then_with(|| 0.cmp(&det(a, b)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Facet {
    /// Primitive inward normal.
    pub normal: Exp,
    /// `d(normal)`.
    pub offset: i64,
    /// Indices of the two endpoint vertices.
    pub ends: [usize; 2],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NewtonPolytope {
    /// Hull vertices, counterclockwise.
    pub vertices: Vec<Exp>,
    pub facets: Vec<Facet>,
    #[serde(skip)]
    pub support: Vec<Exp>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Face {
    pub dim: u8,
    /// Support points on the face, sorted.
    pub points: Vec<Exp>,
    /// Facet normal for `dim == 1`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normal: Option<Exp>,
}

impl Face {
    /// Stable human-readable identifier: `Gamma`, `v(a,b)` or `e(n1,n2)`.
    pub fn label(&self) -> String {
        match self.dim {
            0 => format!("v({},{})", self.points[0][0], self.points[0][1]),
            1 => {
                let n = self.normal.unwrap();
                format!("e({},{})", n[0], n[1])
            }
            _ => "Gamma".to_string(),
        }
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

pub fn newton_polytope(f: &LaurentPolynomial) -> Result<NewtonPolytope> {
    if f.is_constant() {
        return Err(Error::ConstantPolynomial);
    }
    let support = f.support();
    let hull = convex_hull(&support);
    if hull.len() < 3 {
        return Err(Error::DegeneratePolytope(hull.len() - 1));
    }
    let n = hull.len();
    let facets = (0..n)
        .map(|i| {
            let (a, b) = (hull[i], hull[(i + 1) % n]);
            let normal = primitive([a[1] - b[1], b[0] - a[0]]);
            Facet {
                normal,
                offset: dot(normal, a),
                ends: [i, (i + 1) % n],
            }
        })
        .collect();
    Ok(NewtonPolytope {
        vertices: hull,
        facets,
        support,
    })
}

/// Faces of the convex hull of the support, whatever its dimension.
pub fn hull_faces(f: &LaurentPolynomial) -> Vec<Face> {
    match newton_polytope(f) {
        Ok(p) => p.faces(),
        Err(_) => {
            let support = f.support();
            let hull = convex_hull(&support);
            let mut out: Vec<Face> = hull
                .iter()
                .map(|&v| Face {
                    dim: 0,
                    points: vec![v],
                    normal: None,
                })
                .collect();
            if hull.len() == 2 {
                out.push(Face {
                    dim: 2,
                    points: support,
                    normal: None,
                });
            }
            out
        }
    }
}

/// Monotone chain; returns strict vertices counterclockwise starting from
/// the lexicographically smallest point.
fn convex_hull(points: &[Exp]) -> Vec<Exp> {
    let mut pts = points.to_vec();
    pts.sort();
    pts.dedup();
    if pts.len() <= 1 {
        return pts;
    }
    let cross = |o: Exp, a: Exp, b: Exp| det([a[0] - o[0], a[1] - o[1]], [b[0] - o[0], b[1] - o[1]]);
    let mut lower: Vec<Exp> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Exp> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

impl NewtonPolytope {
    pub fn d_value(&self, a: Exp) -> i64 {
        self.vertices.iter().map(|&v| dot(a, v)).min().unwrap()
    }

    pub fn first_meet_locus(&self, a: Exp) -> Face {
        if a == [0, 0] {
            return self.whole();
        }
        let d = self.d_value(a);
        let points: Vec<Exp> = self
            .support
            .iter()
            .copied()
            .filter(|&l| dot(a, l) == d)
            .collect();
        if points.len() == 1 {
            Face {
                dim: 0,
                points,
                normal: None,
            }
        } else {
            Face {
                dim: 1,
                points,
                normal: Some(primitive(a)),
            }
        }
    }

    pub fn whole(&self) -> Face {
        Face {
            dim: 2,
            points: self.support.clone(),
            normal: None,
        }
    }

    /// Every face: vertices, edges, then the polytope itself.
    pub fn faces(&self) -> Vec<Face> {
        let mut out: Vec<Face> = self
            .vertices
            .iter()
            .map(|&v| Face {
                dim: 0,
                points: vec![v],
                normal: None,
            })
            .collect();
        out.extend(self.facets.iter().map(|f| self.first_meet_locus(f.normal)));
        out.push(self.whole());
        out
    }

    pub fn is_facet_normal(&self, a: Exp) -> bool {
        self.facets.iter().any(|f| f.normal == a)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "vertices": self.vertices,
            "facets": self.facets.iter().map(|f| serde_json::json!({
                "normal": f.normal,
                "offset": f.offset,
                "vertices": [self.vertices[f.ends[0]], self.vertices[f.ends[1]]],
            })).collect::<Vec<_>>(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum EdgeTag {
    /// Inward facet normal of the polytope.
    #[serde(rename = "D")]
    FacetNormal,
    /// A coordinate vector that is not a facet normal.
    #[serde(rename = "E")]
    Axis,
    /// Ray added during refinement.
    #[serde(rename = "E'")]
    Inserted,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cone {
    /// One generator (a ray) or two, ordered so that `det >= 0`.
    pub gens: Vec<Exp>,
    pub face: Face,
    pub det: i64,
}

impl Cone {
    pub fn is_ray(&self) -> bool {
        self.gens.len() == 1
    }

    pub fn is_simple(&self) -> bool {
        self.is_ray() || self.det.abs() == 1
    }

    /// Whether `v` lies in the closed cone.
    pub fn contains(&self, v: Exp) -> bool {
        if self.is_ray() {
            let a = self.gens[0];
            det(a, v) == 0 && dot(a, v) >= 0
        } else {
            det(self.gens[0], v) >= 0 && det(v, self.gens[1]) >= 0
        }
    }

    /// Whether `v` lies in the relative interior.
    pub fn contains_interior(&self, v: Exp) -> bool {
        if self.is_ray() {
            let a = self.gens[0];
            det(a, v) == 0 && dot(a, v) > 0
        } else {
            det(self.gens[0], v) > 0 && det(v, self.gens[1]) > 0
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Fan {
    /// One-dimensional cones with their classification.
    pub rays: Vec<(Exp, EdgeTag)>,
    /// All cones, rays first then two-dimensional cones.
    pub cones: Vec<Cone>,
}

impl Fan {
    pub fn two_cones(&self) -> impl Iterator<Item = &Cone> {
        self.cones.iter().filter(|c| !c.is_ray())
    }

    pub fn edges(&self) -> Vec<Exp> {
        self.rays.iter().map(|r| r.0).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "rays": self.rays.iter().map(|(v, t)| serde_json::json!({"ray": v, "tag": t})).collect::<Vec<_>>(),
            "cones": self.cones.iter().map(|c| serde_json::json!({
                "generators": c.gens,
                "det": c.det,
                "face": c.face.label(),
                "face_points": c.face.points,
            })).collect::<Vec<_>>(),
        })
    }
}

fn tag_of(p: &NewtonPolytope, a: Exp) -> EdgeTag {
    if p.is_facet_normal(a) {
        EdgeTag::FacetNormal
    } else if a == [1, 0] || a == [0, 1] {
        EdgeTag::Axis
    } else {
        EdgeTag::Inserted
    }
}

fn ray_cone(p: &NewtonPolytope, a: Exp) -> Cone {
    Cone {
        gens: vec![a],
        face: p.first_meet_locus(a),
        det: 0,
    }
}

fn two_cone(p: &NewtonPolytope, a: Exp, b: Exp) -> Cone {
    Cone {
        gens: vec![a, b],
        face: p.first_meet_locus([a[0] + b[0], a[1] + b[1]]),
        det: det(a, b),
    }
}

/// The normal fan `F_0` of the whole plane.
pub fn build_normal_fan(p: &NewtonPolytope) -> Fan {
    let mut normals: Vec<Exp> = p.facets.iter().map(|f| f.normal).collect();
    normals.sort_by(|&a, &b| angle_cmp(a, b));
    let n = normals.len();
    let mut cones: Vec<Cone> = normals.iter().map(|&a| ray_cone(p, a)).collect();
    for i in 0..n {
        cones.push(two_cone(p, normals[i], normals[(i + 1) % n]));
    }
    Fan {
        rays: normals.iter().map(|&a| (a, EdgeTag::FacetNormal)).collect(),
        cones,
    }
}

/// The fan `F_A`: common refinement of `F_0` with the first quadrant.
pub fn attainable_fan(p: &NewtonPolytope) -> Fan {
    let mut rays: Vec<Exp> = p
        .facets
        .iter()
        .map(|f| f.normal)
        .filter(|a| a[0] > 0 && a[1] > 0)
        .collect();
    rays.push([1, 0]);
    rays.push([0, 1]);
    rays.sort_by(|&a, &b| angle_cmp(a, b));
    quadrant_fan_from_rays(p, &rays)
}

fn quadrant_fan_from_rays(p: &NewtonPolytope, rays: &[Exp]) -> Fan {
    let mut cones: Vec<Cone> = rays.iter().map(|&a| ray_cone(p, a)).collect();
    for w in rays.windows(2) {
        cones.push(two_cone(p, w[0], w[1]));
    }
    Fan {
        rays: rays.iter().map(|&a| (a, tag_of(p, a))).collect(),
        cones,
    }
}

/// Tag every edge of the fan.
pub fn classify_edges(fan: &Fan, p: &NewtonPolytope) -> Vec<(Exp, EdgeTag)> {
    fan.edges().into_iter().map(|a| (a, tag_of(p, a))).collect()
}

/// Split the trivial quadrant fan along `(1,1)`. Other fans are returned
/// unchanged.
pub fn insert_diagonal(fan: &Fan, p: &NewtonPolytope) -> Fan {
    if fan.rays.len() != 2 {
        return fan.clone();
    }
    let rays = [[1, 0], [1, 1], [0, 1]];
    let mut out = quadrant_fan_from_rays(p, &rays);
    out.rays[1].1 = EdgeTag::Inserted;
    out
}

/// Smooth two-dimensional cone `(a, b)`, `det(a,b) > 0`: the rays strictly
/// between `a` and `b` of the minimal regular subdivision.
pub fn hirzebruch_jung(a: Exp, b: Exp) -> Vec<Exp> {
    let mut out = Vec::new();
    let mut u = a;
    while det(u, b) != 1 {
        let e = u[0].extended_gcd(&u[1]);
        // u0*x + u1*y = 1 gives det(u, (-y, x)) = 1
        let v0 = [-e.y, e.x];
        let du = det(u, b);
        let dv = det(v0, b);
        // smallest j with dv + j*du >= 0
        let j = Integer::div_ceil(&-dv, &du);
        let v = [v0[0] + j * u[0], v0[1] + j * u[1]];
        out.push(v);
        u = v;
    }
    out
}

/// Minimal simple refinement; the cone faces are inherited from the parent.
pub fn refine_to_simple(fan: &Fan) -> Fan {
    let mut rays = fan.rays.clone();
    let mut ray_cones: Vec<Cone> = fan.cones.iter().filter(|c| c.is_ray()).cloned().collect();
    let mut two: Vec<Cone> = Vec::new();
    for c in fan.two_cones() {
        if c.is_simple() {
            two.push(c.clone());
            continue;
        }
        let (a, b) = (c.gens[0], c.gens[1]);
        let inner = hirzebruch_jung(a, b);
        let mut chain = vec![a];
        chain.extend(inner.iter().copied());
        chain.push(b);
        for &v in &inner {
            rays.push((v, EdgeTag::Inserted));
            ray_cones.push(Cone {
                gens: vec![v],
                face: c.face.clone(),
                det: 0,
            });
        }
        for w in chain.windows(2) {
            two.push(Cone {
                gens: vec![w[0], w[1]],
                face: c.face.clone(),
                det: det(w[0], w[1]),
            });
        }
    }
    rays.sort_by(|x, y| angle_cmp(x.0, y.0));
    ray_cones.sort_by(|x, y| angle_cmp(x.gens[0], y.gens[0]));
    two.sort_by(|x, y| angle_cmp(x.gens[0], y.gens[0]));
    ray_cones.extend(two);
    Fan {
        rays,
        cones: ray_cones,
    }
}

/// Lattice points `sum l_j a_j` with `0 <= l_j < 1`.
pub fn fundamental_lattice_points(c: &Cone) -> Vec<Exp> {
    if c.is_ray() {
        return vec![[0, 0]];
    }
    let (a, b) = (c.gens[0], c.gens[1]);
    let d = det(a, b).abs();
    let mut out = Vec::new();
    for i in 0..d {
        for j in 0..d {
            let x = i * a[0] + j * b[0];
            let y = i * a[1] + j * b[1];
            if x % d == 0 && y % d == 0 {
                out.push([x / d, y / d]);
            }
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::parse;

    fn g() -> NewtonPolytope {
        newton_polytope(&parse("x^-3 + y^-2 + y^4").unwrap()).unwrap()
    }

    #[test]
    fn example_polytopes() {
        let p = g();
        let mut v = p.vertices.clone();
        v.sort();
        assert_eq!(v, vec![[-3, 0], [0, -2], [0, 4]]);
        let q = newton_polytope(&parse("x^-3 + y^2 + y^4").unwrap()).unwrap();
        let mut n: Vec<Exp> = q.facets.iter().map(|f| f.normal).collect();
        n.sort();
        assert_eq!(n, vec![[-2, 3], [-1, 0], [4, -3]]);
        assert!(matches!(
            newton_polytope(&parse("x + x^2").unwrap()),
            Err(Error::DegeneratePolytope(1))
        ));
    }

    #[test]
    fn d_and_meet_locus() {
        let p = g();
        assert_eq!(p.d_value([0, 1]), -2);
        assert_eq!(p.d_value([2, 3]), -6);
        assert_eq!(p.d_value([0, 0]), 0);
        assert_eq!(p.first_meet_locus([1, 0]).points, vec![[-3, 0]]);
        let t2 = p.first_meet_locus([2, 3]);
        assert_eq!(t2.points, vec![[-3, 0], [0, -2]]);
        assert_eq!(t2.label(), "e(2,3)");
        assert_eq!(p.first_meet_locus([0, 0]).dim, 2);
    }

    #[test]
    fn fans_of_g() {
        let p = g();
        let f0 = build_normal_fan(&p);
        let mut rays = f0.edges();
        rays.sort();
        assert_eq!(rays, vec![[-1, 0], [2, 3], [4, -3]]);
        let fa = attainable_fan(&p);
        assert_eq!(fa.edges(), vec![[1, 0], [2, 3], [0, 1]]);
        let tags: Vec<EdgeTag> = classify_edges(&fa, &p).into_iter().map(|x| x.1).collect();
        assert_eq!(tags, vec![EdgeTag::Axis, EdgeTag::FacetNormal, EdgeTag::Axis]);
        let fp = refine_to_simple(&fa);
        assert_eq!(fp.edges(), vec![[1, 0], [1, 1], [2, 3], [1, 2], [0, 1]]);
        assert!(fp.two_cones().all(|c| c.det == 1));
        assert_eq!(refine_to_simple(&fp), fp);
    }

    #[test]
    fn single_cone_quadrant() {
        let p = newton_polytope(&parse("x^-3 + y^2 + y^4").unwrap()).unwrap();
        let fa = attainable_fan(&p);
        assert_eq!(fa.two_cones().count(), 1);
        let c = fa.two_cones().next().unwrap();
        assert_eq!(c.face.points, vec![[-3, 0]]);
        let f0 = build_normal_fan(&p);
        assert!(f0
            .two_cones()
            .any(|c| c.gens == vec![[4, -3], [-2, 3]] && c.face.points == vec![[-3, 0]]));
    }

    #[test]
    fn lattice_points() {
        let p = g();
        let c = two_cone(&p, [2, 3], [0, 1]);
        assert_eq!(fundamental_lattice_points(&c), vec![[0, 0], [1, 2]]);
        let c = two_cone(&p, [1, 0], [1, 3]);
        assert_eq!(fundamental_lattice_points(&c), vec![[0, 0], [1, 1], [1, 2]]);
    }
}
