//! Edge-function triangle coverage shared by the screen rasterizer and the
//! UV-space baker.

pub(crate) type Vec2 = [f64; 2];

#[inline]
pub(crate) fn orient(a: Vec2, b: Vec2, p: Vec2) -> f64 {
    (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
}

/// Top or left edge for a triangle with positive `orient` area in a y-down
/// raster.
#[inline]
fn is_top_left(a: Vec2, b: Vec2) -> bool {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    dy < 0.0 || (dy == 0.0 && dx > 0.0)
}

/// Calls `visit(x, y, lambdas)` for every cell of a `width`×`height` grid whose
/// center `(x+0.5, y+0.5)` lies inside the triangle, using the top-left rule
/// on shared edges. `lambdas` are the 2D barycentric weights of the center
/// with respect to `v` in the given vertex order. Zero-area triangles cover
/// nothing.
pub(crate) fn for_each_covered(
    v: [Vec2; 3],
    width: usize,
    height: usize,
    mut visit: impl FnMut(usize, usize, [f64; 3]),
) {
    let mut area = orient(v[0], v[1], v[2]);
    if area == 0.0 || !area.is_finite() {
        return;
    }
    let flipped = area < 0.0;
    let t = if flipped { [v[0], v[2], v[1]] } else { v };
    area = area.abs();

    let min_x = t.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
    let max_x = t.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
    let min_y = t.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
    let max_y = t.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max);
    let x0 = (min_x - 0.5).ceil().max(0.0) as i64;
    let x1 = ((max_x - 0.5).floor() as i64).min(width as i64 - 1);
    let y0 = (min_y - 0.5).ceil().max(0.0) as i64;
    let y1 = ((max_y - 0.5).floor() as i64).min(height as i64 - 1);
    if x0 > x1 || y0 > y1 {
        return;
    }

    let edges = [(t[1], t[2]), (t[2], t[0]), (t[0], t[1])];
    let top_left = edges.map(|(a, b)| is_top_left(a, b));
    for y in y0..=y1 {
        for x in x0..=x1 {
            let p = [x as f64 + 0.5, y as f64 + 0.5];
            let w = edges.map(|(a, b)| orient(a, b, p));
            let inside = (0..3).all(|i| w[i] > 0.0 || (w[i] == 0.0 && top_left[i]));
            if inside {
                let l = w.map(|wi| wi / area);
                let lambdas = if flipped { [l[0], l[2], l[1]] } else { l };
                visit(x as usize, y as usize, lambdas);
            }
        }
    }
}

/// Barycentric weights of the point of triangle `v` closest to `p`, and the
/// distance to it.
pub(crate) fn closest_point_barycentric(v: [Vec2; 3], p: Vec2) -> ([f64; 3], f64) {
    let sub = |a: Vec2, b: Vec2| [a[0] - b[0], a[1] - b[1]];
    let dot = |a: Vec2, b: Vec2| a[0] * b[0] + a[1] * b[1];
    let [a, b, c] = v;
    let ab = sub(b, a);
    let ac = sub(c, a);
    let ap = sub(p, a);
    let d1 = dot(ab, ap);
    let d2 = dot(ac, ap);
    let bary = if d1 <= 0.0 && d2 <= 0.0 {
        [1.0, 0.0, 0.0]
    } else {
        let bp = sub(p, b);
        let d3 = dot(ab, bp);
        let d4 = dot(ac, bp);
        let cp = sub(p, c);
        let d5 = dot(ab, cp);
        let d6 = dot(ac, cp);
        let vc = d1 * d4 - d3 * d2;
        let vb = d5 * d2 - d1 * d6;
        let va = d3 * d6 - d5 * d4;
        if d3 >= 0.0 && d4 <= d3 {
            [0.0, 1.0, 0.0]
        } else if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
            let s = d1 / (d1 - d3);
            [1.0 - s, s, 0.0]
        } else if d6 >= 0.0 && d5 <= d6 {
            [0.0, 0.0, 1.0]
        } else if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
            let s = d2 / (d2 - d6);
            [1.0 - s, 0.0, s]
        } else if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
            let s = (d4 - d3) / ((d4 - d3) + (d5 - d6));
            [0.0, 1.0 - s, s]
        } else {
            let denom = 1.0 / (va + vb + vc);
            let (sb, sc) = (vb * denom, vc * denom);
            [1.0 - sb - sc, sb, sc]
        }
    };
    let q = [
        a[0] * bary[0] + b[0] * bary[1] + c[0] * bary[2],
        a[1] * bary[0] + b[1] * bary[1] + c[1] * bary[2],
    ];
    let d = sub(p, q);
    (bary, dot(d, d).sqrt())
}
