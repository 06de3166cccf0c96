//! Wavefront OBJ reading and OBJ/MTL writing.
//!
//! Only what texturing needs is understood: `v`, `vt` and triangular `f`
//! records. Normals (`vn`), groups, smoothing and material statements are
//! accepted and ignored; face normals are always recomputed from winding.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::{Point2, Point3};

use super::{GeometryError, Mesh};

/// Reads an OBJ file from disk.
pub fn load_obj(path: impl AsRef<Path>) -> Result<Mesh, GeometryError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| GeometryError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_obj(&text)
}

/// Parses OBJ text. Every face must be a triangle and every corner must
/// reference a texture coordinate.
pub fn parse_obj(text: &str) -> Result<Mesh, GeometryError> {
    let mut positions = Vec::new();
    let mut uvs: Vec<Point2<f64>> = Vec::new();
    let mut faces = Vec::new();
    let mut corner_uvs = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        let mut tokens = content.split_whitespace();
        let Some(tag) = tokens.next() else { continue };
        let parse_err = |message: String| GeometryError::ParseError { line, message };
        match tag {
            "v" => {
                let xyz = parse_floats(tokens, 3, line)?;
                positions.push(Point3::new(xyz[0], xyz[1], xyz[2]));
            }
            "vt" => {
                let uv = parse_floats(tokens, 2, line)?;
                uvs.push(Point2::new(uv[0], uv[1]));
            }
            "f" => {
                let face = faces.len();
                let corners: Vec<&str> = tokens.collect();
                if corners.len() < 3 {
                    return Err(parse_err(format!(
                        "face {face} has only {} corners",
                        corners.len()
                    )));
                }
                if corners.len() > 3 {
                    return Err(GeometryError::NonTriangulated {
                        face,
                        line,
                        corners: corners.len(),
                    });
                }
                let mut idx = [0u32; 3];
                let mut tri_uv = [Point2::origin(); 3];
                for (k, corner) in corners.iter().enumerate() {
                    let mut parts = corner.split('/');
                    let v = parts.next().unwrap_or("");
                    let vt = parts.next().unwrap_or("");
                    let vi = resolve_index(v, positions.len(), line)?;
                    if vt.is_empty() {
                        return Err(GeometryError::MissingUVs { face, line });
                    }
                    let ti = resolve_index(vt, uvs.len(), line)?;
                    idx[k] = vi as u32;
                    tri_uv[k] = uvs[ti];
                }
                faces.push(idx);
                corner_uvs.push(tri_uv);
            }
            "vn" | "vp" | "o" | "g" | "s" | "usemtl" | "mtllib" | "l" | "p" => {}
            other => log::debug!("line {line}: ignoring OBJ record {other:?}"),
        }
    }
    if faces.is_empty() {
        return Err(GeometryError::ParseError {
            line: text.lines().count(),
            message: "no faces found".into(),
        });
    }
    Mesh::new(positions, faces, corner_uvs)
}

fn parse_floats<'a>(
    tokens: impl Iterator<Item = &'a str>,
    want: usize,
    line: usize,
) -> Result<Vec<f64>, GeometryError> {
    let values = tokens
        .take(want)
        .map(|t| {
            t.parse::<f64>().map_err(|e| GeometryError::ParseError {
                line,
                message: format!("bad number {t:?}: {e}"),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.len() < want {
        return Err(GeometryError::ParseError {
            line,
            message: format!("expected {want} numbers, found {}", values.len()),
        });
    }
    Ok(values)
}

/// Resolves a 1-based (or negative, relative) OBJ index against `count`
/// elements seen so far.
fn resolve_index(token: &str, count: usize, line: usize) -> Result<usize, GeometryError> {
    let raw: i64 = token.parse().map_err(|_| GeometryError::ParseError {
        line,
        message: format!("bad index {token:?}"),
    })?;
    let resolved = match raw {
        r if r > 0 => r - 1,
        r if r < 0 => count as i64 + r,
        _ => -1,
    };
    if resolved < 0 || resolved as usize >= count {
        return Err(GeometryError::ParseError {
            line,
            message: format!("index {raw} out of range ({count} defined)"),
        });
    }
    Ok(resolved as usize)
}

/// Serializes `mesh` as OBJ text. When `material` is given as
/// `(mtllib file name, material name)` the file references it.
pub fn to_obj_string(mesh: &Mesh, material: Option<(&str, &str)>) -> String {
    let mut out = String::new();
    if let Some((lib, _)) = material {
        let _ = writeln!(out, "mtllib {lib}");
    }
    for p in mesh.positions() {
        let _ = writeln!(out, "v {} {} {}", p.x, p.y, p.z);
    }
    for uvs in mesh.corner_uvs() {
        for uv in uvs {
            let _ = writeln!(out, "vt {} {}", uv.x, uv.y);
        }
    }
    if let Some((_, name)) = material {
        let _ = writeln!(out, "usemtl {name}");
    }
    for (fi, f) in mesh.faces().iter().enumerate() {
        let t = 3 * fi + 1;
        let _ = writeln!(
            out,
            "f {}/{} {}/{} {}/{}",
            f[0] + 1,
            t,
            f[1] + 1,
            t + 1,
            f[2] + 1,
            t + 2
        );
    }
    out
}

pub fn write_obj(
    mesh: &Mesh,
    path: impl AsRef<Path>,
    material: Option<(&str, &str)>,
) -> Result<(), GeometryError> {
    let path = path.as_ref();
    fs::write(path, to_obj_string(mesh, material)).map_err(|source| GeometryError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes a single-material MTL file whose diffuse map is `texture_file`.
pub fn write_mtl(
    path: impl AsRef<Path>,
    material: &str,
    texture_file: &str,
) -> Result<(), GeometryError> {
    let path = path.as_ref();
    let body = format!(
        "newmtl {material}\nKa 1 1 1\nKd 1 1 1\nKs 0 0 0\nillum 1\nmap_Kd {texture_file}\n"
    );
    fs::write(path, body).map_err(|source| GeometryError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Extracts the `map_Kd` texture file name of the first material in MTL text.
pub fn mtl_diffuse_map(text: &str) -> Option<String> {
    text.lines().find_map(|l| {
        let l = l.trim();
        l.strip_prefix("map_Kd")
            .map(|rest| rest.trim().to_string())
            .filter(|s| !s.is_empty())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRI: &str = "v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvt 1 0\nvt 0 1\n";

    #[test]
    fn parses_plain_and_normal_carrying_corners() {
        let m = parse_obj(&format!("{TRI}vn 0 0 1\nf 1/1/1 2/2/1 3/3/1\nf -3/-3 -2/-2 -1/-1\n")).unwrap();
        assert_eq!(m.face_count(), 2);
        assert_eq!(m.corner_uvs()[1][1], Point2::new(1.0, 0.0));
    }

    #[test]
    fn quad_is_rejected_with_location() {
        let err = parse_obj(&format!("{TRI}v 1 1 0\nvt 1 1\nf 1/1 2/2 4/4 3/3\n")).unwrap_err();
        assert!(matches!(
            err,
            GeometryError::NonTriangulated { face: 0, line: 9, corners: 4 }
        ));
    }

    #[test]
    fn missing_uv_is_rejected() {
        let err = parse_obj(&format!("{TRI}f 1/1 2/2 3/3\nf 1//1 2//1 3//1\n")).unwrap_err();
        assert!(matches!(err, GeometryError::MissingUVs { face: 1, line: 8 }));
        let err = parse_obj(&format!("{TRI}f 1 2 3\n")).unwrap_err();
        assert!(matches!(err, GeometryError::MissingUVs { face: 0, .. }));
    }

    #[test]
    fn empty_input_is_a_parse_error() {
        assert!(matches!(parse_obj(""), Err(GeometryError::ParseError { .. })));
        assert!(matches!(
            parse_obj("v 0 0 x\n"),
            Err(GeometryError::ParseError { line: 1, .. })
        ));
    }

    #[test]
    fn bad_index_is_a_parse_error() {
        let err = parse_obj(&format!("{TRI}f 1/1 2/2 9/3\n")).unwrap_err();
        assert!(matches!(err, GeometryError::ParseError { line: 7, .. }));
    }

    #[test]
    fn write_then_parse_is_exact() {
        let mesh = crate::geometry::shapes::icosphere(1, 0.37);
        let text = to_obj_string(&mesh, Some(("model.mtl", "texture")));
        assert_eq!(parse_obj(&text).unwrap(), mesh);
    }

    #[test]
    fn mtl_map_lookup() {
        assert_eq!(
            mtl_diffuse_map("newmtl a\nKd 1 1 1\nmap_Kd texture.png\n").as_deref(),
            Some("texture.png")
        );
        assert_eq!(mtl_diffuse_map("newmtl a\n"), None);
    }
}
