mod common;

use meshpaint::geometry::obj::{parse_obj, to_obj_string};
use meshpaint::geometry::{bake_texel_geometry, normalize_mesh, shapes, GeometryError, Mesh, TexelKind};
use nalgebra::{Point2, Point3};

#[test]
fn icosphere_normals_match_cross_products() {
    let text = to_obj_string(&shapes::icosphere(2, 1.0), None);
    let mesh = parse_obj(&text).unwrap();
    assert_eq!(mesh.face_count(), 320);
    for f in 0..mesh.face_count() {
        let [a, b, c] = mesh.face_positions(f);
        let n = (b - a).cross(&(c - a)).normalize();
        assert!((mesh.face_normals()[f] - n).norm() < 1e-12);
        assert!((mesh.face_normals()[f].norm() - 1.0).abs() < 1e-6);
        // Outward: the centroid direction agrees with the normal.
        assert!(n.dot(&((a.coords + b.coords + c.coords) / 3.0)) > 0.0);
    }
}

#[test]
fn loader_errors_name_the_line() {
    let quad = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvt 0 0\nf 1/1 2/1 3/1 4/1\n";
    assert!(matches!(parse_obj(quad), Err(GeometryError::NonTriangulated { line: 6, corners: 4, .. })));
    let no_uv = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n";
    assert!(matches!(parse_obj(no_uv), Err(GeometryError::MissingUVs { line: 4, .. })));
    assert!(matches!(parse_obj(""), Err(GeometryError::ParseError { .. })));
    assert!(matches!(parse_obj("v 0 zero 0\n"), Err(GeometryError::ParseError { line: 1, .. })));
}

#[test]
fn elongated_box_normalizes_to_unit_extent() {
    let mesh = shapes::cube_with_corners(Point3::new(0.0, 0.0, 0.0), Point3::new(4.0, 1.0, 1.0));
    let n = normalize_mesh(&mesh).unwrap();
    let (lo, hi) = n.bounds().unwrap();
    assert_eq!(hi.x - lo.x, 1.0);
    assert_eq!((lo.x, hi.x), (-0.5, 0.5));
    assert_eq!((lo.y, hi.y), (-0.125, 0.125));
    assert_eq!((lo.z + hi.z, lo.y + hi.y), (0.0, 0.0));
    assert_eq!(normalize_mesh(&n).unwrap(), n);
}

#[test]
fn normalize_is_idempotent_on_odd_shapes() {
    let mesh = shapes::cube_with_corners(Point3::new(-3.3, 0.7, 1.1), Point3::new(0.9, 2.45, 1.4));
    let once = normalize_mesh(&mesh).unwrap();
    assert_eq!(normalize_mesh(&once).unwrap(), once);
}

/// Barycentrics of `p` in the UV triangle, by solving the 2x2 system.
fn uv_barycentrics(tri: [Point2<f64>; 3], p: Point2<f64>) -> [f64; 3] {
    let (v0, v1, v2) = (tri[1] - tri[0], tri[2] - tri[0], p - tri[0]);
    let det = v0.x * v1.y - v1.x * v0.y;
    let b1 = (v2.x * v1.y - v1.x * v2.y) / det;
    let b2 = (v0.x * v2.y - v2.x * v0.y) / det;
    [1.0 - b1 - b2, b1, b2]
}

fn texel_center(t: usize, res: usize) -> Point2<f64> {
    let (x, y) = (t % res, t / res);
    Point2::new((x as f64 + 0.5) / res as f64, 1.0 - (y as f64 + 0.5) / res as f64)
}

#[test]
fn interior_positions_match_point_in_triangle_oracle() {
    let mesh = common::sphere(2);
    let res = 128;
    let geo = bake_texel_geometry(&mesh, res).unwrap();
    let interior: Vec<usize> = (0..res * res).filter(|&t| geo.kind(t) == TexelKind::Interior).collect();
    let sample: Vec<usize> = interior.iter().copied().step_by(interior.len() / 150).collect();
    assert!(sample.len() >= 100);
    for t in sample {
        let uv = texel_center(t, res);
        let face = (0..mesh.face_count())
            .find(|&f| uv_barycentrics(mesh.corner_uvs()[f], uv).iter().all(|&b| b >= -1e-12))
            .expect("interior texel lies in some face");
        assert_eq!(geo.face(t), Some(face));
        let b = uv_barycentrics(mesh.corner_uvs()[face], uv);
        let [p0, p1, p2] = mesh.face_positions(face);
        let expect = p0.coords * b[0] + p1.coords * b[1] + p2.coords * b[2];
        assert!((geo.position(t).unwrap().coords - expect).norm() < 1e-9);
    }
}

#[test]
fn interior_count_brackets_center_oracle() {
    let tri = [Point2::new(0.1, 0.05), Point2::new(0.93, 0.3), Point2::new(0.4, 0.88)];
    let mesh = Mesh::new(
        vec![Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, 1.0, 0.0)],
        vec![[0, 1, 2]],
        vec![tri],
    )
    .unwrap();
    let res = 32;
    let geo = bake_texel_geometry(&mesh, res).unwrap();
    let (mut strict, mut closed) = (0, 0);
    for t in 0..res * res {
        let b = uv_barycentrics(tri, texel_center(t, res));
        strict += b.iter().all(|&x| x > 1e-12) as usize;
        closed += b.iter().all(|&x| x >= -1e-12) as usize;
    }
    assert!((strict..=closed).contains(&geo.interior_count()), "{strict} {} {closed}", geo.interior_count());
    assert!(geo.valid_count() >= geo.interior_count());
}

#[test]
fn cube_texels_lie_on_the_surface() {
    let geo = bake_texel_geometry(&common::cube(), 256).unwrap();
    assert!(geo.valid_count() > 0);
    for t in geo.valid_texels() {
        let p = geo.position(t).unwrap();
        let m = p.x.abs().max(p.y.abs()).max(p.z.abs());
        assert!((m - 0.5).abs() < 1e-4, "{p}");
        assert!(p.iter().all(|c| c.is_finite()));
    }
}

#[test]
fn bake_is_deterministic_and_rejects_collapsed_uvs() {
    let mesh = common::sphere(1);
    assert_eq!(bake_texel_geometry(&mesh, 64).unwrap(), bake_texel_geometry(&mesh, 64).unwrap());
    let collapsed = Mesh::new(
        vec![Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, 1.0, 0.0)],
        vec![[0, 1, 2]],
        vec![[Point2::new(0.3, 0.3); 3]],
    )
    .unwrap();
    assert!(matches!(bake_texel_geometry(&collapsed, 64), Err(GeometryError::ZeroCoverage)));
}
